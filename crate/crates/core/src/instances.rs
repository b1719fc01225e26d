//! Seeded random test instances.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::operators::LinearMap;
use crate::problem::ConstrainedProblem;
use crate::prox::ProxFunction;

pub fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let nd = Normal::new(0.0, 1.0).expect("unit normal");
    (0..n).map(|_| nd.sample(rng)).collect()
}

/// m×n matrix with i.i.d. N(0, 1/m) entries.
pub fn gaussian_map<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> LinearMap {
    let scale = 1.0 / (m as f64).sqrt();
    let data = gaussian_vector(m * n, rng).into_iter().map(|v| v * scale).collect();
    LinearMap::dense(m, n, data).expect("sizes match")
}

/// Product of Gaussian m×r and r×n factors, of rank r almost surely.
pub fn rank_deficient_map<R: Rng + ?Sized>(m: usize, n: usize, r: usize, rng: &mut R) -> LinearMap {
    let b = gaussian_map(m, r, rng).to_dense();
    let c = gaussian_map(r, n, rng).to_dense();
    let mut data = vec![0.0; m * n];
    for i in 0..m {
        for t in 0..r {
            let bit = b[i * r + t];
            for j in 0..n {
                data[i * n + j] += bit * c[t * n + j];
            }
        }
    }
    LinearMap::dense(m, n, data).expect("sizes match")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GKind {
    L1,
    Quadratic,
    Box,
}

impl GKind {
    pub const ALL: [GKind; 3] = [GKind::L1, GKind::Quadratic, GKind::Box];
}

/// A member of the family `kind` on ℝⁿ with randomized parameters.
pub fn random_g<R: Rng + ?Sized>(kind: GKind, n: usize, rng: &mut R) -> ProxFunction {
    match kind {
        GKind::L1 => ProxFunction::l1(0.1 + rng.random::<f64>(), n).expect("positive weight"),
        GKind::Quadratic => {
            ProxFunction::quadratic(0.5 + rng.random::<f64>(), gaussian_vector(n, rng)).expect("positive rho")
        }
        GKind::Box => {
            let lo: Vec<f64> = (0..n).map(|_| -1.0 - rng.random::<f64>()).collect();
            let hi: Vec<f64> = (0..n).map(|_| 1.0 + rng.random::<f64>()).collect();
            ProxFunction::boxed(lo, hi).expect("lo < hi")
        }
    }
}

/// b = A x_true for a Gaussian x_true, so Ax = b is consistent.
pub fn consistent_problem<R: Rng + ?Sized>(a: LinearMap, g: ProxFunction, rng: &mut R) -> Result<ConstrainedProblem> {
    let x_true = gaussian_vector(a.cols(), rng);
    let b = a.mul(&x_true);
    Ok(ConstrainedProblem::new(a, b, g)?.with_fstar(0.0))
}

/// A = [2], b = 2, g = ½x².
pub fn canonical() -> ConstrainedProblem {
    ConstrainedProblem::new(
        LinearMap::dense(1, 1, vec![2.0]).expect("1x1"),
        vec![2.0],
        ProxFunction::quadratic(1.0, vec![0.0]).expect("rho > 0"),
    )
    .expect("consistent sizes")
    .with_fstar(0.0)
}

/// A = (1, 1)ᵀ, b = (0, 2), g = ½x²: inconsistent, f_* = 1 at x = 1.
pub fn stacked() -> ConstrainedProblem {
    ConstrainedProblem::new(
        LinearMap::dense(2, 1, vec![1.0, 1.0]).expect("2x1"),
        vec![0.0, 2.0],
        ProxFunction::quadratic(1.0, vec![0.0]).expect("rho > 0"),
    )
    .expect("consistent sizes")
    .with_fstar(1.0)
}
