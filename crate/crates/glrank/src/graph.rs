//! Undirected graphs, named-family generators, and the combinatorial
//! invariants that bound the existence ranks: degeneracy, disconnection
//! number, subgraph connectivity, clique number, chordality.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

/// Default vertex budget for the exponential invariants (disconnection
/// number and subgraph connectivity enumerate vertex subsets).
pub const SUBSET_BUDGET: usize = 15;
/// Node budget for the clique branch-and-bound.
pub const CLIQUE_NODE_BUDGET: u64 = 1_000_000;
/// Rejection-sampling cap for the connected Erdős–Rényi generator.
pub const ER_RETRY_BUDGET: usize = 100_000;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex count must be positive")]
    EmptyGraph,
    #[error("edge ({0}, {1}) is a self-loop")]
    SelfLoop(usize, usize),
    #[error("edge ({0}, {1}) has endpoint out of range (p = {2})")]
    VertexOutOfRange(usize, usize, usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("unknown graph family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameters for family `{0}`: {1}")]
    InvalidParams(&'static str, String),
    #[error("Erdős–Rényi retry budget exhausted ({0} attempts): edge probability too low for connectivity")]
    RetryBudgetExhausted(usize),
    #[error("budget exceeded for {field}: p = {p} > {budget}")]
    BudgetExceeded {
        field: &'static str,
        p: usize,
        budget: usize,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// An undirected simple graph on vertices `0..p`. Edges are stored as
/// ordered pairs `(i, j)` with `i < j`, each once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    p: usize,
    edges: BTreeSet<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new<I>(p: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if p == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a, b));
            }
            if a >= p || b >= p {
                return Err(GraphError::VertexOutOfRange(a, b, p));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(GraphError::DuplicateEdge(e.0, e.1));
            }
        }
        let mut adj = vec![Vec::new(); p];
        for &(a, b) in &set {
            adj[a].push(b);
            adj[b].push(a);
        }
        Ok(Graph { p, edges: set, adj })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.p).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Induced subgraph on `verts` (deduplicated, relabeled 0..k in the
    /// given order).
    pub fn induced(&self, verts: &[usize]) -> Graph {
        let mut pos = vec![usize::MAX; self.p];
        for (k, &v) in verts.iter().enumerate() {
            pos[v] = k;
        }
        let edges = self.edges.iter().filter_map(|&(a, b)| {
            if pos[a] != usize::MAX && pos[b] != usize::MAX {
                Some((pos[a], pos[b]))
            } else {
                None
            }
        });
        Graph::new(verts.len().max(1), edges).expect("induced subgraph of a valid graph is valid")
    }

    pub fn is_connected(&self) -> bool {
        if self.p == 0 {
            return true;
        }
        let mut seen = vec![false; self.p];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.p
    }

    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.p];
        let mut comps = Vec::new();
        for s in 0..self.p {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(v) = stack.pop() {
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// True if `self`'s edge set is a subset of `other`'s (same p).
    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.p == other.p && self.edges.is_subset(&other.edges)
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "graph(p={}, m={})", self.p, self.edges.len())
    }
}

/// Named graph families from the rank catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphFamily {
    /// Path P_p.
    Path(usize),
    /// Star K_{1,p-1}.
    Star(usize),
    /// Cycle C_p.
    Cycle(usize),
    /// Complete graph K_p.
    Complete(usize),
    /// Rectangular grid with `rows x cols` vertices.
    Grid(usize, usize),
    /// Complete bipartite K_{m,n}.
    CompleteBipartite(usize, usize),
    /// Connected Erdős–Rényi G(p, prob), conditioned on connectivity by
    /// rejection sampling.
    ErdosRenyi { p: usize, prob: f64 },
    /// Random chordal graph: Erdős–Rényi base chordalized by elimination
    /// fill-in along a random order.
    Chordal { p: usize, prob: f64 },
}

impl GraphFamily {
    pub fn generate<R: Rng + ?Sized>(self, rng: Option<&mut R>) -> Result<Graph, GraphError> {
        match self {
            GraphFamily::Path(p) => {
                require(p >= 1, "path", "p >= 1")?;
                Graph::new(p, (1..p).map(|i| (i - 1, i)))
            }
            GraphFamily::Star(p) => {
                require(p >= 1, "star", "p >= 1")?;
                Graph::new(p, (1..p).map(|i| (0, i)))
            }
            GraphFamily::Cycle(p) => {
                require(p >= 3, "circular", "p >= 3")?;
                Graph::new(p, (0..p).map(|i| (i, (i + 1) % p)))
            }
            GraphFamily::Complete(p) => {
                require(p >= 1, "complete", "p >= 1")?;
                Graph::new(p, pairs(p))
            }
            GraphFamily::Grid(r, c) => {
                require(r >= 1 && c >= 1, "grid", "rows, cols >= 1")?;
                let idx = |i: usize, j: usize| i * c + j;
                let mut edges = Vec::new();
                for i in 0..r {
                    for j in 0..c {
                        if j + 1 < c {
                            edges.push((idx(i, j), idx(i, j + 1)));
                        }
                        if i + 1 < r {
                            edges.push((idx(i, j), idx(i + 1, j)));
                        }
                    }
                }
                Graph::new(r * c, edges)
            }
            GraphFamily::CompleteBipartite(m, n) => {
                require(m >= 1 && n >= 1, "complete_bipartite", "m, n >= 1")?;
                let mut edges = Vec::new();
                for i in 0..m {
                    for j in 0..n {
                        edges.push((i, m + j));
                    }
                }
                Graph::new(m + n, edges)
            }
            GraphFamily::ErdosRenyi { p, prob } => {
                require(p >= 1, "erdos_renyi", "p >= 1")?;
                require(
                    (0.0..=1.0).contains(&prob),
                    "erdos_renyi",
                    "prob in [0, 1]",
                )?;
                let rng = rng.ok_or(GraphError::InvalidParams(
                    "erdos_renyi",
                    "requires an RNG seed".into(),
                ))?;
                for _ in 0..ER_RETRY_BUDGET {
                    let edges: Vec<_> = pairs(p).filter(|_| rng.gen::<f64>() < prob).collect();
                    let g = Graph::new(p, edges)?;
                    if g.is_connected() {
                        return Ok(g);
                    }
                }
                Err(GraphError::RetryBudgetExhausted(ER_RETRY_BUDGET))
            }
            GraphFamily::Chordal { p, prob } => {
                require(p >= 1, "chordal", "p >= 1")?;
                let rng = rng.ok_or(GraphError::InvalidParams(
                    "chordal",
                    "requires an RNG seed".into(),
                ))?;
                let base =
                    GraphFamily::ErdosRenyi { p, prob }.generate(Some(rng))?;
                Ok(chordal_completion(&base))
            }
        }
    }

    /// Parse a family from a CLI-style name and parameter list. The last
    /// parameter of the random families is the edge probability.
    pub fn parse(kind: &str, params: &[f64]) -> Result<Self, GraphError> {
        let int = |x: f64| -> Result<usize, GraphError> {
            if x.fract() == 0.0 && x >= 0.0 {
                Ok(x as usize)
            } else {
                Err(GraphError::InvalidParams("family", format!("{x} is not a nonnegative integer")))
            }
        };
        let arity = |n: usize| -> Result<(), GraphError> {
            if params.len() == n {
                Ok(())
            } else {
                Err(GraphError::InvalidParams(
                    "family",
                    format!("expected {n} parameters, got {}", params.len()),
                ))
            }
        };
        match kind {
            "path" => {
                arity(1)?;
                Ok(GraphFamily::Path(int(params[0])?))
            }
            "star" | "tree" => {
                arity(1)?;
                Ok(GraphFamily::Star(int(params[0])?))
            }
            "circular" | "cycle" => {
                arity(1)?;
                Ok(GraphFamily::Cycle(int(params[0])?))
            }
            "complete" => {
                arity(1)?;
                Ok(GraphFamily::Complete(int(params[0])?))
            }
            "grid" => {
                arity(2)?;
                Ok(GraphFamily::Grid(int(params[0])?, int(params[1])?))
            }
            "complete_bipartite" => {
                arity(2)?;
                Ok(GraphFamily::CompleteBipartite(int(params[0])?, int(params[1])?))
            }
            "erdos_renyi" => {
                arity(2)?;
                Ok(GraphFamily::ErdosRenyi {
                    p: int(params[0])?,
                    prob: params[1],
                })
            }
            "chordal" => {
                arity(2)?;
                Ok(GraphFamily::Chordal {
                    p: int(params[0])?,
                    prob: params[1],
                })
            }
            other => Err(GraphError::UnknownFamily(other.to_string())),
        }
    }
}

fn require(cond: bool, family: &'static str, msg: &str) -> Result<(), GraphError> {
    if cond {
        Ok(())
    } else {
        Err(GraphError::InvalidParams(family, msg.to_string()))
    }
}

fn pairs(p: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..p).flat_map(move |i| (i + 1..p).map(move |j| (i, j)))
}

/// Chordalize by elimination fill-in along the identity order of a
/// randomly labeled graph (the base is already randomly generated, so no
/// extra permutation is needed).
fn chordal_completion(g: &Graph) -> Graph {
    let p = g.p();
    let mut adj: Vec<BTreeSet<usize>> = (0..p)
        .map(|v| g.neighbors(v).iter().copied().collect())
        .collect();
    let mut edges: BTreeSet<(usize, usize)> = g.edges().collect();
    for v in 0..p {
        let later: Vec<usize> = adj[v].iter().copied().filter(|&w| w > v).collect();
        for (a, &x) in later.iter().enumerate() {
            for &y in &later[a + 1..] {
                if edges.insert((x.min(y), x.max(y))) {
                    adj[x].insert(y);
                    adj[y].insert(x);
                }
            }
        }
    }
    Graph::new(p, edges).expect("fill-in preserves validity")
}

/// All invariants from the rank bound chain, plus chordality and clique
/// number for the chordal oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphInvariants {
    pub degeneracy: usize,
    pub disconnection: usize,
    pub subgraph_connectivity: usize,
    pub max_degree: usize,
    pub clique_number: usize,
    pub chordal: bool,
}

/// Degeneracy via repeated minimum-degree vertex removal: the maximum,
/// over the elimination order, of the minimum degree at removal time.
pub fn degeneracy(g: &Graph) -> usize {
    let p = g.p();
    let mut deg: Vec<usize> = (0..p).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; p];
    let mut delta = 0;
    for _ in 0..p {
        let v = (0..p)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| deg[v])
            .unwrap();
        delta = delta.max(deg[v]);
        removed[v] = true;
        for &w in g.neighbors(v) {
            if !removed[w] {
                deg[w] -= 1;
            }
        }
    }
    delta
}

/// Smallest k such that deleting some k vertices leaves a disconnected or
/// single-vertex induced subgraph. Brute force over deletion sets in
/// increasing size.
pub fn disconnection_number(g: &Graph) -> Result<usize, GraphError> {
    let p = g.p();
    if p > SUBSET_BUDGET {
        return Err(GraphError::BudgetExceeded {
            field: "disconnection_number",
            p,
            budget: SUBSET_BUDGET,
        });
    }
    if p == 1 {
        return Ok(0);
    }
    for k in 0..p {
        let keep = p - k;
        if keep == 1 {
            return Ok(k);
        }
        let mut found = false;
        for_each_subset(p, keep, &mut |verts| {
            if !found && !g.induced(verts).is_connected() {
                found = true;
            }
        });
        if found {
            return Ok(k);
        }
    }
    unreachable!("keep == 1 case terminates the loop")
}

/// Maximum of the disconnection number over all nonempty induced
/// subgraphs.
pub fn subgraph_connectivity(g: &Graph) -> Result<usize, GraphError> {
    let p = g.p();
    if p > SUBSET_BUDGET {
        return Err(GraphError::BudgetExceeded {
            field: "subgraph_connectivity",
            p,
            budget: SUBSET_BUDGET,
        });
    }
    let mut best = 0;
    for mask in 1u32..(1 << p) {
        let verts: Vec<usize> = (0..p).filter(|&v| mask >> v & 1 == 1).collect();
        // A subgraph cannot beat its own vertex count - 1.
        if verts.len() <= best {
            continue;
        }
        best = best.max(disconnection_number(&g.induced(&verts))?);
    }
    Ok(best)
}

fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for v in start..n {
            if n - v < k - cur.len() {
                break;
            }
            cur.push(v);
            rec(n, k, v + 1, cur, f);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, f);
}

/// Clique number by branch-and-bound with a node budget.
pub fn clique_number(g: &Graph) -> Result<usize, GraphError> {
    let p = g.p();
    let mut best = 0usize;
    let mut nodes = 0u64;
    // Candidates ordered by degeneracy order keeps branching shallow.
    let mut cand: Vec<usize> = (0..p).collect();
    cand.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
    fn expand(
        g: &Graph,
        r: usize,
        cand: &[usize],
        best: &mut usize,
        nodes: &mut u64,
    ) -> Result<(), GraphError> {
        *nodes += 1;
        if *nodes > CLIQUE_NODE_BUDGET {
            return Err(GraphError::BudgetExceeded {
                field: "clique_number",
                p: g.p(),
                budget: CLIQUE_NODE_BUDGET as usize,
            });
        }
        if cand.is_empty() {
            *best = (*best).max(r);
            return Ok(());
        }
        for (i, &v) in cand.iter().enumerate() {
            if r + cand.len() - i <= *best {
                break;
            }
            let next: Vec<usize> = cand[i + 1..]
                .iter()
                .copied()
                .filter(|&w| g.has_edge(v, w))
                .collect();
            expand(g, r + 1, &next, best, nodes)?;
        }
        *best = (*best).max(r);
        Ok(())
    }
    expand(g, 0, &cand, &mut best, &mut nodes)?;
    Ok(best)
}

/// Chordality by maximum cardinality search plus perfect elimination
/// ordering verification.
pub fn is_chordal(g: &Graph) -> bool {
    let p = g.p();
    // MCS: repeatedly pick the unnumbered vertex with the most numbered
    // neighbors; numbering from p-1 down to 0.
    let mut weight = vec![0usize; p];
    let mut order = vec![0usize; p]; // order[k] = vertex numbered k
    let mut position = vec![usize::MAX; p];
    for k in (0..p).rev() {
        let v = (0..p)
            .filter(|&v| position[v] == usize::MAX)
            .max_by_key(|&v| weight[v])
            .unwrap();
        position[v] = k;
        order[k] = v;
        for &w in g.neighbors(v) {
            if position[w] == usize::MAX {
                weight[w] += 1;
            }
        }
    }
    // order is a PEO candidate: for each v, its later neighbors minus the
    // first one must all be adjacent to that first one.
    for k in 0..p {
        let v = order[k];
        let later: Vec<usize> = g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| position[w] > k)
            .collect();
        if let Some(&u) = later.iter().min_by_key(|&&w| position[w]) {
            for &w in &later {
                if w != u && !g.has_edge(u, w) {
                    return false;
                }
            }
        }
    }
    true
}

/// All invariant fields at once. Each exponential field propagates its own
/// budget error.
pub fn invariants(g: &Graph) -> Result<GraphInvariants, GraphError> {
    Ok(GraphInvariants {
        degeneracy: degeneracy(g),
        disconnection: disconnection_number(g)?,
        subgraph_connectivity: subgraph_connectivity(g)?,
        max_degree: g.max_degree(),
        clique_number: clique_number(g)?,
        chordal: is_chordal(g),
    })
}

/// Parse the edge-list text format: `p <count>` on the first meaningful
/// line, then `e <i> <j>` lines; `#` comments and blank lines ignored.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut p: Option<usize> = None;
    let mut edges: Vec<(usize, usize, usize)> = Vec::new(); // (i, j, line)
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let tag = parts.next().unwrap();
        let err = |msg: String| GraphError::Parse { line: line_no, msg };
        match tag {
            "p" => {
                if p.is_some() {
                    return Err(err("duplicate `p` line".into()));
                }
                let count: usize = parts
                    .next()
                    .ok_or_else(|| err("missing vertex count".into()))?
                    .parse()
                    .map_err(|e| err(format!("bad vertex count: {e}")))?;
                if parts.next().is_some() {
                    return Err(err("trailing tokens after `p` line".into()));
                }
                if count == 0 {
                    return Err(err("vertex count must be positive".into()));
                }
                p = Some(count);
            }
            "e" => {
                let p = p.ok_or_else(|| err("`e` line before `p` line".into()))?;
                let i: usize = parts
                    .next()
                    .ok_or_else(|| err("missing endpoint".into()))?
                    .parse()
                    .map_err(|e| err(format!("bad endpoint: {e}")))?;
                let j: usize = parts
                    .next()
                    .ok_or_else(|| err("missing endpoint".into()))?
                    .parse()
                    .map_err(|e| err(format!("bad endpoint: {e}")))?;
                if parts.next().is_some() {
                    return Err(err("trailing tokens after `e` line".into()));
                }
                if i == j {
                    return Err(err(format!("self-loop ({i}, {j})")));
                }
                if i >= p || j >= p {
                    return Err(err(format!("endpoint out of range (p = {p})")));
                }
                if edges
                    .iter()
                    .any(|&(a, b, _)| (a.min(b), a.max(b)) == (i.min(j), i.max(j)))
                {
                    return Err(err(format!("duplicate edge ({i}, {j})")));
                }
                edges.push((i, j, line_no));
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }
    let p = p.ok_or(GraphError::Parse {
        line: 0,
        msg: "missing `p` line".into(),
    })?;
    Graph::new(p, edges.into_iter().map(|(i, j, _)| (i, j)))
}

/// Render a graph in the edge-list text format.
pub fn format_edge_list(g: &Graph) -> String {
    let mut out = format!("p {}\n", g.p());
    for (i, j) in g.edges() {
        out.push_str(&format!("e {i} {j}\n"));
    }
    out
}
