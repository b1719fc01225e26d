//! Linear maps used as constraint matrices.
//!
//! Every map exposes `apply` (x ↦ Ax) and `apply_adjoint` (y ↦ Aᵀy). Maps
//! are immutable after construction and can be shared across threads.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::vector::{dot, norm};

pub const DEFAULT_NORM_SEED: u64 = 42;
pub const DEFAULT_NORM_TOL: f64 = 1e-6;
pub const DEFAULT_NORM_MAX_ITERS: usize = 5000;

/// Compressed-sparse-row storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub rows: usize,
    pub cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    /// Builds a CSR matrix from (row, col, value) triplets. Duplicate
    /// entries are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::InvalidInput(format!(
                    "entry ({i}, {j}) outside a {rows}x{cols} matrix"
                )));
            }
            sorted.push((i, j, v));
        }
        sorted.sort_by_key(|&(i, j, _)| (i, j));

        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indices.push(j);
            values.push(v);
            indptr[i + 1] += 1;
            last = Some((i, j));
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        Ok(Csr {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Csr {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }
}

/// Weighted graph Laplacian acting blockwise on node-major vectors of
/// length `nodes * block`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    pub nodes: usize,
    pub block: usize,
    /// `neighbors[i]` lists `(j, w_ij)`; each undirected edge appears twice.
    pub neighbors: Vec<Vec<(usize, f64)>>,
}

impl Laplacian {
    pub fn degree(&self, i: usize) -> f64 {
        self.neighbors[i].iter().map(|&(_, w)| w).sum()
    }

    pub fn max_degree(&self) -> f64 {
        (0..self.nodes).map(|i| self.degree(i)).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub enum LinearMap {
    /// Row-major dense matrix.
    Dense {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    },
    Sparse(Csr),
    Laplacian(Laplacian),
    /// x ↦ AᵀA x for the inner map A.
    Gram(Arc<LinearMap>),
    /// x ↦ c · A x.
    Scaled(f64, Arc<LinearMap>),
}

impl LinearMap {
    pub fn dense(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "dense matrix data",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(LinearMap::Dense { rows, cols, data })
    }

    /// Dense matrix from a list of rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(m * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "dense matrix row",
                    expected: n,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::dense(m, n, data)
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let triplets: Vec<_> = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        if n == 0 {
            return Err(Error::InvalidInput("empty diagonal".into()));
        }
        Ok(LinearMap::Sparse(Csr::from_triplets(n, n, &triplets)?))
    }

    pub fn sparse(csr: Csr) -> Result<Self> {
        if csr.rows == 0 || csr.cols == 0 {
            return Err(Error::InvalidInput("matrix dimensions must be positive".into()));
        }
        Ok(LinearMap::Sparse(csr))
    }

    pub fn scaled(factor: f64, inner: LinearMap) -> Self {
        LinearMap::Scaled(factor, Arc::new(inner))
    }

    pub fn rows(&self) -> usize {
        match self {
            LinearMap::Dense { rows, .. } => *rows,
            LinearMap::Sparse(c) => c.rows,
            LinearMap::Laplacian(l) => l.nodes * l.block,
            LinearMap::Gram(a) => a.cols(),
            LinearMap::Scaled(_, a) => a.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            LinearMap::Dense { cols, .. } => *cols,
            LinearMap::Sparse(c) => c.cols,
            LinearMap::Laplacian(l) => l.nodes * l.block,
            LinearMap::Gram(a) => a.cols(),
            LinearMap::Scaled(_, a) => a.cols(),
        }
    }

    /// True when the map is known to be symmetric positive semidefinite by
    /// construction.
    pub fn is_symmetric_psd(&self) -> bool {
        match self {
            LinearMap::Laplacian(_) | LinearMap::Gram(_) => true,
            LinearMap::Scaled(c, a) => *c >= 0.0 && a.is_symmetric_psd(),
            _ => false,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols() {
            return Err(Error::DimensionMismatch {
                context: "apply",
                expected: self.cols(),
                found: x.len(),
            });
        }
        Ok(self.mul(x))
    }

    pub fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows() {
            return Err(Error::DimensionMismatch {
                context: "apply_adjoint",
                expected: self.rows(),
                found: y.len(),
            });
        }
        Ok(self.mul_t(y))
    }

    /// Unchecked product; callers guarantee `x.len() == cols()`.
    pub(crate) fn mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols(), "LinearMap::mul dimension");
        match self {
            LinearMap::Dense { rows, cols, data } => (0..*rows)
                .map(|i| dot(&data[i * cols..(i + 1) * cols], x))
                .collect(),
            LinearMap::Sparse(c) => (0..c.rows)
                .map(|i| {
                    (c.indptr[i]..c.indptr[i + 1])
                        .map(|p| c.values[p] * x[c.indices[p]])
                        .sum()
                })
                .collect(),
            LinearMap::Laplacian(l) => laplacian_mul(l, x),
            LinearMap::Gram(a) => a.mul_t(&a.mul(x)),
            LinearMap::Scaled(c, a) => {
                let mut y = a.mul(x);
                y.iter_mut().for_each(|v| *v *= c);
                y
            }
        }
    }

    pub(crate) fn mul_t(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows(), "LinearMap::mul_t dimension");
        match self {
            LinearMap::Dense { rows, cols, data } => {
                let mut out = vec![0.0; *cols];
                for i in 0..*rows {
                    let yi = y[i];
                    if yi == 0.0 {
                        continue;
                    }
                    for (o, a) in out.iter_mut().zip(&data[i * cols..(i + 1) * cols]) {
                        *o += a * yi;
                    }
                }
                out
            }
            LinearMap::Sparse(c) => {
                let mut out = vec![0.0; c.cols];
                for (i, &yi) in y.iter().enumerate().take(c.rows) {
                    for p in c.indptr[i]..c.indptr[i + 1] {
                        out[c.indices[p]] += c.values[p] * yi;
                    }
                }
                out
            }
            LinearMap::Laplacian(l) => laplacian_mul(l, y),
            LinearMap::Gram(a) => a.mul_t(&a.mul(y)),
            LinearMap::Scaled(c, a) => {
                let mut x = a.mul_t(y);
                x.iter_mut().for_each(|v| *v *= c);
                x
            }
        }
    }

    /// Materializes the map as a row-major dense matrix by applying it to
    /// the unit vectors.
    pub fn to_dense(&self) -> Vec<f64> {
        let (m, n) = (self.rows(), self.cols());
        let mut out = vec![0.0; m * n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.mul(&e);
            for i in 0..m {
                out[i * n + j] = col[i];
            }
            e[j] = 0.0;
        }
        out
    }

    /// Power-iteration estimate of the operator norm with the default
    /// seed, tolerance and iteration cap.
    pub fn norm(&self) -> NormEstimate {
        self.operator_norm_estimate(DEFAULT_NORM_TOL, DEFAULT_NORM_MAX_ITERS, DEFAULT_NORM_SEED)
    }

    /// Estimates ‖A‖ by power iteration.
    ///
    /// Symmetric PSD maps are iterated directly; all other maps are iterated
    /// through AᵀA. The returned value is a Rayleigh quotient, so it never
    /// exceeds the true norm (up to rounding). Iteration stops once the
    /// eigen-residual ‖Mv − ρv‖ drops below `tol · ρ`.
    pub fn operator_norm_estimate(&self, tol: f64, max_iters: usize, seed: u64) -> NormEstimate {
        assert!(tol > 0.0, "operator_norm_estimate: tol must be positive");
        let symmetric = self.is_symmetric_psd();
        let op = |v: &[f64]| -> Vec<f64> {
            if symmetric {
                self.mul(v)
            } else {
                self.mul_t(&self.mul(v))
            }
        };
        let finish = |rho: f64, iterations: usize, converged: bool| {
            let rho = rho.max(0.0);
            NormEstimate {
                value: if symmetric { rho } else { rho.sqrt() },
                iterations,
                converged,
            }
        };

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..self.cols()).map(|_| rng.random::<f64>() - 0.5).collect();
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);

        let mut rho = 0.0;
        for it in 1..=max_iters.max(1) {
            let w = op(&v);
            rho = dot(&v, &w);
            let nw = norm(&w);
            if nw == 0.0 {
                return finish(0.0, it, true);
            }
            let residual = w
                .iter()
                .zip(&v)
                .map(|(wi, vi)| (wi - rho * vi).powi(2))
                .sum::<f64>()
                .sqrt();
            if residual <= tol * rho.abs() {
                return finish(rho, it, true);
            }
            v = w;
            v.iter_mut().for_each(|x| *x /= nw);
        }
        finish(rho, max_iters, false)
    }

    /// Returns the map x ↦ AᵀA x.
    pub fn build_gram(&self) -> LinearMap {
        LinearMap::Gram(Arc::new(self.clone()))
    }
}

fn laplacian_mul(l: &Laplacian, x: &[f64]) -> Vec<f64> {
    let d = l.block;
    let mut out = vec![0.0; l.nodes * d];
    for (i, nbrs) in l.neighbors.iter().enumerate() {
        let xi = &x[i * d..(i + 1) * d];
        let oi = &mut out[i * d..(i + 1) * d];
        for &(j, w) in nbrs {
            let xj = &x[j * d..(j + 1) * d];
            for t in 0..d {
                oi[t] += w * (xi[t] - xj[t]);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    /// False when `max_iters` was reached before the residual test passed.
    pub converged: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::{norm_sq, sub};

    fn path_laplacian(n: usize) -> LinearMap {
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n - 1 {
            neighbors[i].push((i + 1, 1.0));
            neighbors[i + 1].push((i, 1.0));
        }
        LinearMap::Laplacian(Laplacian {
            nodes: n,
            block: 1,
            neighbors,
        })
    }

    #[test]
    fn dense_one_by_one() {
        let a = LinearMap::dense(1, 1, vec![2.0]).unwrap();
        assert_eq!(a.apply(&[3.0]).unwrap(), vec![6.0]);
    }

    #[test]
    fn sparse_identity() {
        let a = LinearMap::sparse(Csr::identity(3)).unwrap();
        assert_eq!(a.apply(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn laplacian_kernel_and_adjoint() {
        let l = path_laplacian(3);
        assert_eq!(l.apply(&[1.0, 1.0, 1.0]).unwrap(), vec![0.0, 0.0, 0.0]);
        assert_eq!(l.apply_adjoint(&[0.0, 1.0, 0.0]).unwrap(), vec![-1.0, 2.0, -1.0]);
    }

    #[test]
    fn rank_one_adjoint() {
        let a = LinearMap::dense(1, 2, vec![1.0, 1.0]).unwrap();
        assert_eq!(a.apply_adjoint(&[2.0]).unwrap(), vec![2.0, 2.0]);
        assert_eq!(a.apply_adjoint(&[0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = LinearMap::dense(1, 2, vec![1.0, 1.0]).unwrap();
        assert!(matches!(a.apply(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(a.apply_adjoint(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn norm_of_simple_maps() {
        let d = LinearMap::diagonal(&[3.0, 4.0]).unwrap();
        assert!((d.norm().value - 4.0).abs() < 1e-5);
        assert!((path_laplacian(2).norm().value - 2.0).abs() < 1e-5);
        assert!((path_laplacian(3).norm().value - 3.0).abs() < 1e-5);
    }

    #[test]
    fn norm_of_zero_map_is_zero() {
        let z = LinearMap::dense(2, 3, vec![0.0; 6]).unwrap();
        let est = z.norm();
        assert_eq!(est.value, 0.0);
        assert!(est.converged);
    }

    #[test]
    fn non_convergence_is_flagged() {
        // Two nearly equal singular values and a single iteration.
        let d = LinearMap::diagonal(&[1.0, 0.999_999]).unwrap();
        let est = d.operator_norm_estimate(1e-12, 1, 7);
        assert!(!est.converged);
        assert!(est.value <= 1.0 + 1e-12);
    }

    #[test]
    fn norm_is_deterministic() {
        let a = LinearMap::from_rows(&[vec![1.0, 2.0, 0.5], vec![-1.0, 0.3, 2.0]]).unwrap();
        assert_eq!(a.norm(), a.norm());
    }

    #[test]
    fn gram_examples() {
        let a = LinearMap::dense(1, 1, vec![2.0]).unwrap();
        assert_eq!(a.build_gram().apply(&[1.5]).unwrap(), vec![6.0]);

        let b = LinearMap::dense(1, 2, vec![1.0, 1.0]).unwrap();
        let g = b.build_gram();
        assert_eq!(g.to_dense(), vec![1.0, 1.0, 1.0, 1.0]);
        assert_eq!(g.apply(&[1.0, -1.0]).unwrap(), vec![0.0, 0.0]);
        assert!(g.is_symmetric_psd());
    }

    #[test]
    fn gram_norm_is_square_of_norm() {
        let a = LinearMap::from_rows(&[vec![1.0, 2.0, 0.5], vec![-1.0, 0.3, 2.0]]).unwrap();
        let tol = DEFAULT_NORM_TOL;
        let na = a.norm().value;
        let ng = a.build_gram().norm().value;
        assert!((ng - na * na).abs() / (na * na) <= 2.0 * tol);
    }

    #[test]
    fn csr_sums_duplicates() {
        let c = Csr::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 2.0), (0, 0, 0.5)]).unwrap();
        assert_eq!(c.nnz(), 2);
        let a = LinearMap::sparse(c).unwrap();
        assert_eq!(a.to_dense(), vec![1.5, 0.0, 2.0, 0.0]);
    }

    #[test]
    fn cosine_law_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let v = |rng: &mut ChaCha8Rng| (0..7).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect::<Vec<_>>();
            let (x, y, z) = (v(&mut rng), v(&mut rng), v(&mut rng));
            let lhs = 2.0 * dot(&sub(&x, &y), &sub(&z, &x));
            let rhs = norm_sq(&sub(&y, &z)) - norm_sq(&sub(&x, &y)) - norm_sq(&sub(&x, &z));
            assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
        }
    }
}
