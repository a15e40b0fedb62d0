//! Exact rational phase-1 simplex with Bland's rule. Decides feasibility
//! of {x : Ex = f, x_i >= 0 for i in a given index set} and returns an
//! exact feasible point when one exists.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::qmat::{QMatrix, Rat};

/// Feasibility of the system `equalities * x = rhs` with `x[i] >= 0` for
/// every `i` in `nonneg`. Returns `Some(point)` with an exactly feasible
/// rational point, or `None` when the system is infeasible. Termination is
/// guaranteed by Bland's rule.
pub fn lp_feasible(
    equalities: &QMatrix,
    rhs: &[Rat],
    nonneg: &BTreeSet<usize>,
) -> Option<Vec<Rat>> {
    let m = equalities.nrows();
    let n = equalities.ncols();
    assert_eq!(rhs.len(), m);
    assert!(nonneg.iter().all(|&i| i < n));

    // Split free variables x_j = u_j - v_j so every tableau variable is
    // nonnegative. Column map: j -> (col of u_j, Some(col of v_j) if free).
    let free: Vec<usize> = (0..n).filter(|j| !nonneg.contains(j)).collect();
    let n_total = n + free.len();
    let mut split_col = vec![usize::MAX; n];
    for (k, &j) in free.iter().enumerate() {
        split_col[j] = n + k;
    }

    // Tableau: m rows of [vars | artificials | rhs], artificial basis.
    let width = n_total + m + 1;
    let mut tab: Vec<Vec<Rat>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![Rat::zero(); width];
        let flip = rhs[i].is_negative();
        for j in 0..n {
            let mut v = equalities[(i, j)].clone();
            if flip {
                v = -v;
            }
            if split_col[j] != usize::MAX {
                row[split_col[j]] = -v.clone();
            }
            row[j] = v;
        }
        row[n_total + i] = Rat::one();
        row[width - 1] = if flip { -rhs[i].clone() } else { rhs[i].clone() };
        tab.push(row);
    }
    let mut basis: Vec<usize> = (0..m).map(|i| n_total + i).collect();

    // Phase 1: minimize the sum of artificials. Reduced cost of column j
    // is c_j - sum over rows with artificial basis of tab[i][j]; we keep
    // the objective row implicitly as the sum of artificial-basic rows.
    loop {
        // Entering: smallest-index column with positive objective-row
        // coefficient (i.e. reduced cost < 0 for minimization).
        let mut entering = None;
        for j in 0..n_total {
            let coeff: Rat = tab
                .iter()
                .enumerate()
                .filter(|(i, _)| basis[*i] >= n_total)
                .map(|(_, row)| row[j].clone())
                .sum();
            if coeff.is_positive() {
                entering = Some(j);
                break;
            }
        }
        let Some(e) = entering else { break };
        // Leaving: minimum ratio, ties by smallest basis index (Bland).
        let mut leave: Option<usize> = None;
        let mut best_ratio: Option<Rat> = None;
        for i in 0..m {
            if tab[i][e].is_positive() {
                let ratio = &tab[i][width - 1] / &tab[i][e];
                let better = match &best_ratio {
                    None => true,
                    Some(b) => {
                        ratio < *b || (ratio == *b && basis[i] < basis[leave.unwrap()])
                    }
                };
                if better {
                    best_ratio = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(l) = leave else {
            // Unbounded entering column cannot happen in phase 1 (the
            // objective is bounded below by zero), but bail defensively.
            break;
        };
        pivot(&mut tab, l, e);
        basis[l] = e;
    }

    // Feasible iff all artificials carry value zero.
    let infeasibility: Rat = tab
        .iter()
        .enumerate()
        .filter(|(i, _)| basis[*i] >= n_total)
        .map(|(i, row)| {
            debug_assert!(!row[width - 1].is_negative());
            let _ = i;
            row[width - 1].clone()
        })
        .sum();
    if !infeasibility.is_zero() {
        return None;
    }

    let mut y = vec![Rat::zero(); n_total];
    for (i, &b) in basis.iter().enumerate() {
        if b < n_total {
            y[b] = tab[i][width - 1].clone();
        }
    }
    let mut x = vec![Rat::zero(); n];
    for j in 0..n {
        x[j] = if split_col[j] == usize::MAX {
            y[j].clone()
        } else {
            &y[j] - &y[split_col[j]]
        };
    }
    debug_assert!(check_point(equalities, rhs, nonneg, &x));
    Some(x)
}

fn pivot(tab: &mut [Vec<Rat>], l: usize, e: usize) {
    let width = tab[l].len();
    let inv = tab[l][e].recip();
    for j in 0..width {
        if !tab[l][j].is_zero() {
            let v = &tab[l][j] * &inv;
            tab[l][j] = v;
        }
    }
    for i in 0..tab.len() {
        if i != l && !tab[i][e].is_zero() {
            let factor = tab[i][e].clone();
            for j in 0..width {
                if !tab[l][j].is_zero() {
                    let v = &tab[i][j] - &factor * &tab[l][j];
                    tab[i][j] = v;
                }
            }
        }
    }
}

/// Exact constraint check for a candidate point.
pub fn check_point(
    equalities: &QMatrix,
    rhs: &[Rat],
    nonneg: &BTreeSet<usize>,
    x: &[Rat],
) -> bool {
    equalities
        .mul_vec(x)
        .iter()
        .zip(rhs)
        .all(|(a, b)| a == b)
        && nonneg.iter().all(|&i| !x[i].is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{rat, rat_int};

    fn all_nonneg(n: usize) -> BTreeSet<usize> {
        (0..n).collect()
    }

    #[test]
    fn simple_feasible() {
        let e = QMatrix::from_int_rows(&[&[1, 1]]);
        let x = lp_feasible(&e, &[rat_int(1)], &all_nonneg(2)).unwrap();
        assert!(check_point(&e, &[rat_int(1)], &all_nonneg(2), &x));
    }

    #[test]
    fn simple_infeasible() {
        let e = QMatrix::from_int_rows(&[&[1, 1]]);
        assert!(lp_feasible(&e, &[rat_int(-1)], &all_nonneg(2)).is_none());
    }

    #[test]
    fn unique_solution_half_half() {
        let e = QMatrix::from_int_rows(&[&[1, -1], &[1, 1]]);
        let rhs = [rat_int(0), rat_int(1)];
        let x = lp_feasible(&e, &rhs, &all_nonneg(2)).unwrap();
        assert_eq!(x, vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn free_variables_allowed_negative() {
        // x0 free, x1 >= 0: x0 + x1 = -2 is feasible via x0 = -2.
        let e = QMatrix::from_int_rows(&[&[1, 1]]);
        let nonneg: BTreeSet<usize> = [1].into_iter().collect();
        let x = lp_feasible(&e, &[rat_int(-2)], &nonneg).unwrap();
        assert!(check_point(&e, &[rat_int(-2)], &nonneg, &x));
    }

    /// Independent oracle: a standard-form polyhedron {Ay = b, y >= 0} is
    /// nonempty iff some basic feasible solution exists; enumerate all
    /// column subsets.
    fn feasible_by_enumeration(e: &QMatrix, rhs: &[Rat], nonneg: &BTreeSet<usize>) -> bool {
        let n = e.ncols();
        // Split free variables, like the simplex does.
        let free: Vec<usize> = (0..n).filter(|j| !nonneg.contains(j)).collect();
        let nt = n + free.len();
        let m = e.nrows();
        let col = |j: usize, i: usize| -> Rat {
            if j < n {
                e[(i, j)].clone()
            } else {
                -e[(i, free[j - n])].clone()
            }
        };
        if rhs.iter().all(|x| x.is_zero()) {
            return true;
        }
        for mask in 1u64..(1 << nt) {
            if (mask.count_ones() as usize) > m {
                continue;
            }
            let cols: Vec<usize> = (0..nt).filter(|j| mask >> j & 1 == 1).collect();
            // Solve E_B y_B = rhs by least squares over the subset: append
            // rhs and look for a consistent solution via rref.
            let mut rows = Vec::new();
            for i in 0..m {
                let mut r: Vec<Rat> = cols.iter().map(|&j| col(j, i)).collect();
                r.push(rhs[i].clone());
                rows.push(r);
            }
            let sys = QMatrix::from_rows(rows);
            let (rr, pivots) = sys.rref();
            if pivots.contains(&cols.len()) {
                continue; // inconsistent
            }
            if pivots.len() < cols.len() {
                continue; // underdetermined subset; a smaller subset covers it
            }
            let mut y = vec![Rat::zero(); cols.len()];
            for (r, &pc) in pivots.iter().enumerate() {
                y[pc] = rr[(r, cols.len())].clone();
            }
            if y.iter().all(|v| !v.is_negative()) {
                return true;
            }
        }
        false
    }

    #[test]
    fn agrees_with_vertex_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for trial in 0..60 {
            let m = rng.gen_range(1..4);
            let n = rng.gen_range(1..6);
            let e = QMatrix::from_rows(
                (0..m)
                    .map(|_| (0..n).map(|_| rat_int(rng.gen_range(-3..=3))).collect())
                    .collect(),
            );
            let rhs: Vec<Rat> = (0..m).map(|_| rat_int(rng.gen_range(-3..=3))).collect();
            let nonneg: BTreeSet<usize> =
                (0..n).filter(|_| rng.gen::<bool>()).collect();
            let got = lp_feasible(&e, &rhs, &nonneg);
            let expect = feasible_by_enumeration(&e, &rhs, &nonneg);
            match &got {
                Some(x) => {
                    assert!(check_point(&e, &rhs, &nonneg, x), "trial {trial}");
                    assert!(expect, "trial {trial}: simplex feasible, oracle not");
                }
                None => assert!(!expect, "trial {trial}: oracle feasible, simplex not"),
            }
        }
    }
}
