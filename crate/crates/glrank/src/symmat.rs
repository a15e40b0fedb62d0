//! Dense symmetric float matrices: eigensolves, general-position checks,
//! and the matrix/data CSV interchange formats. Floats stay on the
//! estimator and eigensolver side; verdicts use the exact modules.

use nalgebra::DMatrix;
use thiserror::Error;

/// Relative singular value cutoff for float rank decisions.
pub const RANK_TOL: f64 = 1e-8;
/// Symmetry validation tolerance for matrix CSV input.
pub const CSV_SYMMETRY_TOL: f64 = 1e-12;
/// Brute-force budget for the general-position check (2^p submatrices).
pub const GENERAL_POSITION_BUDGET: usize = 12;

#[derive(Debug, Error)]
pub enum SymMatrixError {
    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {delta}")]
    Asymmetric { i: usize, j: usize, delta: f64 },
    #[error("entry is not finite at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("general-position budget exceeded: p = {0} > {1}")]
    BudgetExceeded(usize, usize),
    #[error("eigensolver failed to converge")]
    EigNonConvergence,
    #[error("line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

/// Symmetric p x p float matrix. The lower triangle mirrors the upper by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    p: usize,
    // Upper triangle, row-major: entry (i, j) with i <= j at tri_index.
    tri: Vec<f64>,
}

fn tri_index(p: usize, i: usize, j: usize) -> usize {
    let (i, j) = (i.min(j), i.max(j));
    i * p - i * (i + 1) / 2 + j
}

impl SymMatrix {
    pub fn zeros(p: usize) -> Self {
        SymMatrix {
            p,
            tri: vec![0.0; p * (p + 1) / 2],
        }
    }

    pub fn identity(p: usize) -> Self {
        let mut m = SymMatrix::zeros(p);
        for i in 0..p {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m.set(i, i, x);
        }
        m
    }

    /// Build from a full dense row-major array, validating symmetry.
    pub fn from_dense(p: usize, a: &[f64], tol: f64) -> Result<Self, SymMatrixError> {
        assert_eq!(a.len(), p * p);
        let mut m = SymMatrix::zeros(p);
        for i in 0..p {
            for j in i..p {
                let x = a[i * p + j];
                let y = a[j * p + i];
                if !x.is_finite() || !y.is_finite() {
                    return Err(SymMatrixError::NonFinite(i, j));
                }
                let delta = (x - y).abs();
                if delta > tol {
                    return Err(SymMatrixError::Asymmetric { i, j, delta });
                }
                m.set(i, j, 0.5 * (x + y));
            }
        }
        Ok(m)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.tri[tri_index(self.p, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.tri[tri_index(self.p, i, j)] = v;
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.p, self.p, |i, j| self.get(i, j))
    }

    pub fn from_dmatrix_symmetrized(m: &DMatrix<f64>) -> Self {
        let p = m.nrows();
        let mut s = SymMatrix::zeros(p);
        for i in 0..p {
            for j in i..p {
                s.set(i, j, 0.5 * (m[(i, j)] + m[(j, i)]));
            }
        }
        s
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.p {
            for j in 0..self.p {
                acc += self.get(i, j).powi(2);
            }
        }
        acc.sqrt()
    }
}

/// Eigenvalues (ascending) with orthonormal eigenvectors as columns.
pub struct EigDecomposition {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn symmetric_eig(a: &SymMatrix) -> Result<EigDecomposition, SymMatrixError> {
    let m = a.to_dmatrix();
    for i in 0..a.p() {
        for j in 0..a.p() {
            if !m[(i, j)].is_finite() {
                return Err(SymMatrixError::NonFinite(i, j));
            }
        }
    }
    let eig = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or(SymMatrixError::EigNonConvergence)?;
    let mut order: Vec<usize> = (0..a.p()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(a.p(), a.p(), |i, j| eig.eigenvectors[(i, order[j])]);
    // Reconstruction contract: ||V L V^T - A||_F <= 1e-8 (1 + ||A||_F).
    let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(values.clone()));
    let resid = (&vectors * lam * vectors.transpose() - &m).norm();
    if resid > 1e-8 * (1.0 + m.norm()) {
        return Err(SymMatrixError::EigNonConvergence);
    }
    Ok(EigDecomposition { values, vectors })
}

/// Float rank via singular values against `tol * max(1, sigma_max)`.
pub fn float_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    sv.iter().filter(|&&s| s > tol * smax.max(1.0)).count()
}

/// True iff every principal submatrix of `a` has rank min(q, rank(a)).
pub fn general_position(a: &SymMatrix, tol: f64) -> Result<bool, SymMatrixError> {
    let p = a.p();
    if p > GENERAL_POSITION_BUDGET {
        return Err(SymMatrixError::BudgetExceeded(p, GENERAL_POSITION_BUDGET));
    }
    let full = a.to_dmatrix();
    let r = float_rank(&full, tol);
    for mask in 1u32..(1 << p) {
        let idx: Vec<usize> = (0..p).filter(|&v| mask >> v & 1 == 1).collect();
        let q = idx.len();
        let sub = DMatrix::from_fn(q, q, |i, j| a.get(idx[i], idx[j]));
        if float_rank(&sub, tol) != q.min(r) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Parse CSV rows of floats; every row must have the same width.
pub fn parse_csv(text: &str) -> Result<(usize, usize, Vec<f64>), SymMatrixError> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Result<Vec<f64>, _> = line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let vals = vals.map_err(|e| SymMatrixError::Csv {
            line: line_no,
            msg: format!("bad number: {e}"),
        })?;
        match cols {
            None => cols = Some(vals.len()),
            Some(c) if c != vals.len() => {
                return Err(SymMatrixError::Csv {
                    line: line_no,
                    msg: format!("expected {c} columns, got {}", vals.len()),
                })
            }
            _ => {}
        }
        rows += 1;
        data.extend(vals);
    }
    if rows == 0 {
        return Err(SymMatrixError::Csv {
            line: 0,
            msg: "empty matrix".into(),
        });
    }
    Ok((rows, cols.unwrap(), data))
}

/// Matrix CSV mode: a square symmetric matrix.
pub fn parse_matrix_csv(text: &str) -> Result<SymMatrix, SymMatrixError> {
    let (rows, cols, data) = parse_csv(text)?;
    if rows != cols {
        return Err(SymMatrixError::Csv {
            line: 0,
            msg: format!("matrix mode requires a square matrix, got {rows}x{cols}"),
        });
    }
    SymMatrix::from_dense(rows, &data, CSV_SYMMETRY_TOL)
}

/// Data-matrix mode: n x p samples X, from which S = (1/n) X^T X.
pub fn parse_data_csv(text: &str) -> Result<(usize, SymMatrix), SymMatrixError> {
    let (n, p, data) = parse_csv(text)?;
    let x = DMatrix::from_row_slice(n, p, &data);
    let s = (x.transpose() * &x) / n as f64;
    Ok((n, SymMatrix::from_dmatrix_symmetrized(&s)))
}

pub fn format_matrix_csv(a: &SymMatrix) -> String {
    let mut out = String::new();
    for i in 0..a.p() {
        let row: Vec<String> = (0..a.p()).map(|j| format!("{}", a.get(i, j))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
