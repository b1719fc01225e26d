//! Proximable convex functions with closed-form proximal operators.

use crate::error::{Error, Result};
use crate::vector::{dist, dot};

/// Tolerance used by [`ProxFunction::check_prox_inequality`].
pub const PROX_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ProxFunction {
    Zero { dim: usize },
    /// ⟨c, x⟩
    Linear { c: Vec<f64> },
    /// (ρ/2)‖x − a‖²
    Quadratic { rho: f64, center: Vec<f64> },
    /// w‖x‖₁
    L1 { weight: f64, dim: usize },
    /// Indicator of lo ≤ x ≤ hi (componentwise).
    Box { lo: Vec<f64>, hi: Vec<f64> },
    NonNegative { dim: usize },
    /// Indicator of the single point {a}.
    Point { a: Vec<f64> },
    /// Sum of functions acting on consecutive blocks of x.
    Separable(Vec<ProxFunction>),
    /// g(x) + (ρ/2)‖x‖²
    StronglyConvexified { inner: Box<ProxFunction>, rho: f64 },
}

impl ProxFunction {
    pub fn quadratic(rho: f64, center: Vec<f64>) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::InvalidInput(format!("quadratic rho must be positive, got {rho}")));
        }
        Ok(ProxFunction::Quadratic { rho, center })
    }

    pub fn l1(weight: f64, dim: usize) -> Result<Self> {
        if !(weight >= 0.0) {
            return Err(Error::InvalidInput(format!("l1 weight must be nonnegative, got {weight}")));
        }
        Ok(ProxFunction::L1 { weight, dim })
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                context: "box bounds",
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::InvalidInput("box requires lo <= hi".into()));
        }
        Ok(ProxFunction::Box { lo, hi })
    }

    pub fn strongly_convexified(inner: ProxFunction, rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::InvalidInput(format!("strong convexity rho must be positive, got {rho}")));
        }
        Ok(ProxFunction::StronglyConvexified {
            inner: Box::new(inner),
            rho,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ProxFunction::Zero { dim } | ProxFunction::L1 { dim, .. } | ProxFunction::NonNegative { dim } => *dim,
            ProxFunction::Linear { c } => c.len(),
            ProxFunction::Quadratic { center, .. } => center.len(),
            ProxFunction::Box { lo, .. } => lo.len(),
            ProxFunction::Point { a } => a.len(),
            ProxFunction::Separable(blocks) => blocks.iter().map(ProxFunction::dim).sum(),
            ProxFunction::StronglyConvexified { inner, .. } => inner.dim(),
        }
    }

    /// Strong-convexity modulus γ. `Point` reports +∞.
    pub fn modulus(&self) -> f64 {
        match self {
            ProxFunction::Quadratic { rho, .. } => *rho,
            ProxFunction::Point { .. } => f64::INFINITY,
            ProxFunction::StronglyConvexified { inner, rho } => rho + inner.modulus(),
            ProxFunction::Separable(blocks) => blocks
                .iter()
                .map(ProxFunction::modulus)
                .fold(f64::INFINITY, f64::min),
            _ => 0.0,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            ProxFunction::Zero { .. } => 0.0,
            ProxFunction::Linear { c } => dot(c, x),
            ProxFunction::Quadratic { rho, center } => 0.5 * rho * dist(x, center).powi(2),
            ProxFunction::L1 { weight, .. } => weight * x.iter().map(|v| v.abs()).sum::<f64>(),
            ProxFunction::Box { lo, hi } => {
                let inside = x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| l <= v && v <= h);
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxFunction::NonNegative { .. } => {
                if x.iter().all(|&v| v >= 0.0) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxFunction::Point { a } => {
                if x == a.as_slice() {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxFunction::Separable(blocks) => {
                let mut off = 0;
                let mut total = 0.0;
                for b in blocks {
                    let d = b.dim();
                    total += b.value(&x[off..off + d]);
                    off += d;
                }
                total
            }
            ProxFunction::StronglyConvexified { inner, rho } => {
                inner.value(x) + 0.5 * rho * dot(x, x)
            }
        }
    }

    /// prox_{τg}(z) = argmin_x { τ g(x) + ½‖x − z‖² }.
    pub fn prox(&self, tau: f64, z: &[f64]) -> Vec<f64> {
        debug_assert!(tau > 0.0);
        debug_assert_eq!(z.len(), self.dim());
        let mut out = z.to_vec();
        self.prox_into(tau, z, &mut out);
        out
    }

    fn prox_into(&self, tau: f64, z: &[f64], out: &mut [f64]) {
        match self {
            ProxFunction::Zero { .. } => out.copy_from_slice(z),
            ProxFunction::Linear { c } => {
                for ((o, zi), ci) in out.iter_mut().zip(z).zip(c) {
                    *o = zi - tau * ci;
                }
            }
            ProxFunction::Quadratic { rho, center } => {
                let denom = 1.0 + tau * rho;
                for ((o, zi), ai) in out.iter_mut().zip(z).zip(center) {
                    *o = (zi + tau * rho * ai) / denom;
                }
            }
            ProxFunction::L1 { weight, .. } => {
                let t = tau * weight;
                for (o, &zi) in out.iter_mut().zip(z) {
                    *o = zi.signum() * (zi.abs() - t).max(0.0);
                }
            }
            ProxFunction::Box { lo, hi } => {
                for (i, (o, zi)) in out.iter_mut().zip(z).enumerate() {
                    *o = zi.clamp(lo[i], hi[i]);
                }
            }
            ProxFunction::NonNegative { .. } => {
                for (o, zi) in out.iter_mut().zip(z) {
                    *o = zi.max(0.0);
                }
            }
            ProxFunction::Point { a } => out.copy_from_slice(a),
            ProxFunction::Separable(blocks) => {
                let mut off = 0;
                for b in blocks {
                    let d = b.dim();
                    b.prox_into(tau, &z[off..off + d], &mut out[off..off + d]);
                    off += d;
                }
            }
            ProxFunction::StronglyConvexified { inner, rho } => {
                let denom = 1.0 + tau * rho;
                let shrunk: Vec<f64> = z.iter().map(|v| v / denom).collect();
                inner.prox_into(tau / denom, &shrunk, out);
            }
        }
    }

    /// Verifies the (strengthened) prox-inequality at x̄ = prox_{τg}(z):
    /// ⟨x̄ − z, x − x̄⟩ ≥ τ(g(x̄) − g(x)) + τγ/2‖x̄ − x‖² for every probe x in
    /// dom g. Probes outside the domain are skipped.
    pub fn check_prox_inequality(&self, tau: f64, z: &[f64], probes: &[Vec<f64>]) -> bool {
        let xbar = self.prox(tau, z);
        let gbar = self.value(&xbar);
        let gamma = self.modulus();
        let gamma = if gamma.is_finite() { gamma } else { 0.0 };
        let step: Vec<f64> = xbar.iter().zip(z).map(|(a, b)| a - b).collect();
        probes.iter().all(|x| {
            let gx = self.value(x);
            if !gx.is_finite() {
                return true;
            }
            let diff: Vec<f64> = x.iter().zip(&xbar).map(|(a, b)| a - b).collect();
            let lhs = dot(&step, &diff);
            let rhs = tau * (gbar - gx) + 0.5 * tau * gamma * dot(&diff, &diff);
            lhs >= rhs - PROX_CHECK_TOL
        })
    }

    /// Returns (diag Q, c, constant) when g(x) = ½xᵀQx + cᵀx + const with
    /// diagonal Q, i.e. for zero, linear, quadratic and their separable or
    /// strongly-convexified combinations.
    pub fn quadratic_form(&self) -> Option<(Vec<f64>, Vec<f64>, f64)> {
        match self {
            ProxFunction::Zero { dim } => Some((vec![0.0; *dim], vec![0.0; *dim], 0.0)),
            ProxFunction::Linear { c } => Some((vec![0.0; c.len()], c.clone(), 0.0)),
            ProxFunction::Quadratic { rho, center } => Some((
                vec![*rho; center.len()],
                center.iter().map(|a| -rho * a).collect(),
                0.5 * rho * dot(center, center),
            )),
            ProxFunction::Separable(blocks) => {
                let mut q = Vec::new();
                let mut c = Vec::new();
                let mut k = 0.0;
                for b in blocks {
                    let (bq, bc, bk) = b.quadratic_form()?;
                    q.extend(bq);
                    c.extend(bc);
                    k += bk;
                }
                Some((q, c, k))
            }
            ProxFunction::StronglyConvexified { inner, rho } => {
                let (mut q, c, k) = inner.quadratic_form()?;
                q.iter_mut().for_each(|v| *v += rho);
                Some((q, c, k))
            }
            _ => None,
        }
    }
}
