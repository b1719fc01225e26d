//! The constrained model: minimize g(x) (+ h(x)) over argmin f, where
//! f(x) = ½‖Ax − b‖².

use crate::error::{Error, Result};
use crate::operators::LinearMap;
use crate::oracle;
use crate::prox::ProxFunction;
use crate::vector::{dot, norm_sq, sub};

/// Convex differentiable term with β-Lipschitz gradient.
#[derive(Debug, Clone)]
pub enum SmoothTerm {
    /// ⟨c, x⟩, β = 0
    Linear { c: Vec<f64> },
    /// (ρ/2)‖x − a‖², β = ρ
    Quadratic { rho: f64, center: Vec<f64> },
    /// ½‖Mx − d‖², β = ‖M‖² unless supplied
    LeastSquares {
        map: LinearMap,
        target: Vec<f64>,
        beta: f64,
    },
}

impl SmoothTerm {
    pub fn least_squares(map: LinearMap, target: Vec<f64>, beta: Option<f64>) -> Result<Self> {
        if target.len() != map.rows() {
            return Err(Error::DimensionMismatch {
                context: "smooth least-squares target",
                expected: map.rows(),
                found: target.len(),
            });
        }
        let beta = match beta {
            Some(b) => b,
            None => {
                let est = map.norm();
                // the estimate is a lower bound; inflate by its tolerance
                (est.value * (1.0 + crate::operators::DEFAULT_NORM_TOL)).powi(2)
            }
        };
        Ok(SmoothTerm::LeastSquares { map, target, beta })
    }

    pub fn dim(&self) -> usize {
        match self {
            SmoothTerm::Linear { c } => c.len(),
            SmoothTerm::Quadratic { center, .. } => center.len(),
            SmoothTerm::LeastSquares { map, .. } => map.cols(),
        }
    }

    /// Lipschitz constant β of ∇h.
    pub fn beta(&self) -> f64 {
        match self {
            SmoothTerm::Linear { .. } => 0.0,
            SmoothTerm::Quadratic { rho, .. } => *rho,
            SmoothTerm::LeastSquares { beta, .. } => *beta,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            SmoothTerm::Linear { c } => dot(c, x),
            SmoothTerm::Quadratic { rho, center } => 0.5 * rho * norm_sq(&sub(x, center)),
            SmoothTerm::LeastSquares { map, target, .. } => 0.5 * norm_sq(&sub(&map.mul(x), target)),
        }
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        match self {
            SmoothTerm::Linear { c } => c.clone(),
            SmoothTerm::Quadratic { rho, center } => x.iter().zip(center).map(|(a, b)| rho * (a - b)).collect(),
            SmoothTerm::LeastSquares { map, target, .. } => map.mul_t(&sub(&map.mul(x), target)),
        }
    }

    /// Descent-lemma inequality h(u) − h(v) − ⟨∇h(v), u − v⟩ ≤ (β/2)‖u − v‖².
    pub fn check_descent_inequality(&self, u: &[f64], v: &[f64], tol: f64) -> bool {
        let d = sub(u, v);
        let lhs = self.value(u) - self.value(v) - dot(&self.grad(v), &d);
        lhs <= 0.5 * self.beta() * norm_sq(&d) + tol * (1.0 + lhs.abs())
    }
}

#[derive(Debug, Clone)]
pub struct ConstrainedProblem {
    pub a: LinearMap,
    pub b: Vec<f64>,
    pub g: ProxFunction,
    pub h: Option<SmoothTerm>,
    fstar: Option<f64>,
}

impl ConstrainedProblem {
    pub fn new(a: LinearMap, b: Vec<f64>, g: ProxFunction) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                context: "right-hand side b",
                expected: a.rows(),
                found: b.len(),
            });
        }
        if g.dim() != a.cols() {
            return Err(Error::DimensionMismatch {
                context: "prox function g",
                expected: a.cols(),
                found: g.dim(),
            });
        }
        Ok(ConstrainedProblem {
            a,
            b,
            g,
            h: None,
            fstar: None,
        })
    }

    pub fn with_smooth(mut self, h: SmoothTerm) -> Result<Self> {
        if h.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "smooth term h",
                expected: self.dim(),
                found: h.dim(),
            });
        }
        self.h = Some(h);
        Ok(self)
    }

    /// Sets a known f_* instead of computing it.
    pub fn with_fstar(mut self, fstar: f64) -> Self {
        self.fstar = Some(fstar);
        self
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    /// Strong-convexity modulus of g.
    pub fn gamma(&self) -> f64 {
        self.g.modulus()
    }

    pub fn beta(&self) -> f64 {
        self.h.as_ref().map_or(0.0, SmoothTerm::beta)
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        sub(&self.a.mul(x), &self.b)
    }

    /// f(x) = ½‖Ax − b‖²
    pub fn f_value(&self, x: &[f64]) -> f64 {
        0.5 * norm_sq(&self.residual(x))
    }

    /// ∇f(x) = Aᵀ(Ax − b)
    pub fn f_grad(&self, x: &[f64]) -> Vec<f64> {
        self.a.mul_t(&self.residual(x))
    }

    /// g(x) + h(x)
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.g.value(x) + self.h.as_ref().map_or(0.0, |h| h.value(x))
    }

    /// Cached f_*, if computed or supplied.
    pub fn fstar(&self) -> Option<f64> {
        self.fstar
    }

    /// Computes f_* = min f with the least-squares oracle and caches it.
    /// A residual ‖Ax − b‖ ≤ tol certifies feasibility and yields 0.
    pub fn compute_fstar(&mut self, tol: f64) -> Result<f64> {
        if let Some(v) = self.fstar {
            return Ok(v);
        }
        let ls = oracle::solve_least_squares(&self.a, &self.b, tol)?;
        let resid = (2.0 * ls.fstar).sqrt();
        let v = if resid <= tol { 0.0 } else { ls.fstar };
        self.fstar = Some(v);
        Ok(v)
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn canonical() -> ConstrainedProblem {
        ConstrainedProblem::new(
            LinearMap::dense(1, 1, vec![2.0]).unwrap(),
            vec![2.0],
            ProxFunction::quadratic(1.0, vec![0.0]).unwrap(),
        )
        .unwrap()
    }

    fn stacked() -> ConstrainedProblem {
        ConstrainedProblem::new(
            LinearMap::dense(2, 1, vec![1.0, 1.0]).unwrap(),
            vec![0.0, 2.0],
            ProxFunction::quadratic(1.0, vec![0.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn f_value_examples() {
        let p = canonical();
        assert_eq!(p.f_value(&[1.0]), 0.0);
        assert_eq!(p.f_value(&[0.0]), 2.0);
        assert_eq!(stacked().f_value(&[1.0]), 1.0);
    }

    #[test]
    fn f_grad_examples() {
        assert_eq!(canonical().f_grad(&[0.0]), vec![-4.0]);
        assert_eq!(canonical().f_grad(&[1.0]), vec![0.0]);
        assert_eq!(stacked().f_grad(&[1.0]), vec![0.0]);
    }

    #[test]
    fn f_grad_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let data: Vec<f64> = (0..12).map(|_| rng.random::<f64>() - 0.5).collect();
        let p = ConstrainedProblem::new(
            LinearMap::dense(3, 4, data).unwrap(),
            vec![0.3, -1.0, 2.0],
            ProxFunction::Zero { dim: 4 },
        )
        .unwrap();
        let x: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 2.0).collect();
        let g = p.f_grad(&x);
        let h = 1e-5 * (1.0 + crate::vector::norm(&x));
        for i in 0..4 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (p.f_value(&xp) - p.f_value(&xm)) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + g[i].abs()));
        }
    }

    #[test]
    fn fstar_examples() {
        assert_eq!(canonical().compute_fstar(1e-10).unwrap(), 0.0);
        assert!((stacked().compute_fstar(1e-10).unwrap() - 1.0).abs() < 1e-12);
        let mut z = ConstrainedProblem::new(
            LinearMap::dense(1, 1, vec![0.0]).unwrap(),
            vec![1.0],
            ProxFunction::Zero { dim: 1 },
        )
        .unwrap();
        assert!((z.compute_fstar(1e-10).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(z.fstar(), Some(0.5));
    }

    #[test]
    fn dimension_checks() {
        let a = LinearMap::dense(2, 3, vec![0.0; 6]).unwrap();
        assert!(ConstrainedProblem::new(a.clone(), vec![0.0; 3], ProxFunction::Zero { dim: 3 }).is_err());
        assert!(ConstrainedProblem::new(a.clone(), vec![0.0; 2], ProxFunction::Zero { dim: 2 }).is_err());
        let p = ConstrainedProblem::new(a, vec![0.0; 2], ProxFunction::Zero { dim: 3 }).unwrap();
        assert!(p.with_smooth(SmoothTerm::Linear { c: vec![1.0] }).is_err());
    }

    #[test]
    fn descent_lemma_self_test() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data: Vec<f64> = (0..20).map(|_| rng.random::<f64>() - 0.5).collect();
        let terms = vec![
            SmoothTerm::Linear { c: vec![1.0, -1.0, 0.5, 2.0] },
            SmoothTerm::Quadratic { rho: 3.0, center: vec![0.1; 4] },
            SmoothTerm::least_squares(LinearMap::dense(5, 4, data).unwrap(), vec![1.0; 5], None).unwrap(),
        ];
        for h in &terms {
            for _ in 0..100 {
                let u: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
                let v: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
                assert!(h.check_descent_inequality(&u, &v, 1e-12));
            }
        }
        // a β that is too small must be caught somewhere
        let bad = SmoothTerm::LeastSquares {
            map: LinearMap::dense(1, 1, vec![2.0]).unwrap(),
            target: vec![0.0],
            beta: 1.0,
        };
        assert!(!bad.check_descent_inequality(&[1.0], &[0.0], 1e-12));
    }
}
