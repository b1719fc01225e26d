//! Reference computations used to certify solver output.
//!
//! Dense paths materialize the constraint map and rely on nalgebra's SVD
//! and LU; they are meant for desk-scale instances (n ≤ 50). Nothing here
//! shares code with the iteration schemes in [`crate::solvers`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operators::{LinearMap, DEFAULT_NORM_TOL};
use crate::problem::ConstrainedProblem;
use crate::vector::{dist, dot, norm, norm_sq, sub};

/// Largest column count handled by the dense code paths.
pub const DENSE_LIMIT: usize = 50;
pub const PENALIZED_MAX_ITERS: usize = 10_000_000;
/// Continuation ladder for reference solutions of non-quadratic g.
pub const RHO_LADDER: [f64; 4] = [1e2, 1e4, 1e6, 1e8];

#[derive(Debug, Clone)]
pub struct LeastSquaresSolution {
    /// Minimum-norm minimizer of f.
    pub x: Vec<f64>,
    pub fstar: f64,
    /// ‖Aᵀ(Ax − b)‖
    pub normal_residual: f64,
}

/// A primal solution of min g s.t. AᵀAx = Aᵀb together with a dual
/// certificate.
#[derive(Debug, Clone)]
pub struct DualCertificate {
    pub x: Vec<f64>,
    /// Au* ∈ ℝᵐ; equals the Lagrange multiplier y* when Ax = b is consistent.
    pub y: Vec<f64>,
    pub g_star: f64,
    /// ‖Au*‖
    pub d_y: f64,
    /// ‖∇g(x*) + AᵀAu*‖ (or the analogous subgradient residual).
    pub stationarity: f64,
    /// ‖AᵀAx* − Aᵀb‖
    pub feasibility: f64,
}

#[derive(Debug, Clone)]
pub struct PenalizedSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn to_matrix(a: &LinearMap) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), &a.to_dense())
}

/// Minimizer of f(x) = ½‖Ax − b‖² with ‖Aᵀ(Ax − b)‖ ≤ tol·(1 + ‖Aᵀb‖).
///
/// Uses an SVD pseudo-inverse for n ≤ 50 and CGLS otherwise.
pub fn solve_least_squares(a: &LinearMap, b: &[f64], tol: f64) -> Result<LeastSquaresSolution> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "least squares rhs",
            expected: a.rows(),
            found: b.len(),
        });
    }
    let atb_norm = norm(&a.mul_t(b));
    let target = tol * (1.0 + atb_norm);

    let x = if a.cols() <= DENSE_LIMIT {
        let m = to_matrix(a);
        let smax = m.norm();
        let svd = m.svd(true, true);
        let eps = (a.rows().max(a.cols()) as f64) * f64::EPSILON * smax.max(1e-300);
        let sol = svd
            .solve(&DVector::from_column_slice(b), eps)
            .map_err(|_| Error::Singular("least squares SVD"))?;
        let x: Vec<f64> = sol.iter().copied().collect();
        // one CGLS polish pass from the SVD point
        cgls(a, b, x, target, 4 * a.cols() + 10).0
    } else {
        let (x, ok) = cgls(a, b, vec![0.0; a.cols()], target, 20 * a.cols() + 1000);
        if !ok {
            let r = norm(&a.mul_t(&sub(&a.mul(&x), b)));
            return Err(Error::NotConverged {
                what: "least squares (CGLS)",
                iterations: 20 * a.cols() + 1000,
                residual: r,
            });
        }
        x
    };
    let r = sub(&a.mul(&x), b);
    let normal_residual = norm(&a.mul_t(&r));
    if normal_residual > target {
        return Err(Error::NotConverged {
            what: "least squares",
            iterations: 0,
            residual: normal_residual,
        });
    }
    Ok(LeastSquaresSolution {
        fstar: 0.5 * norm_sq(&r),
        x,
        normal_residual,
    })
}

/// Conjugate gradients on the normal equations (CGLS). Returns the iterate
/// and whether ‖Aᵀ(Ax − b)‖ ≤ target was reached.
fn cgls(a: &LinearMap, b: &[f64], mut x: Vec<f64>, target: f64, max_iters: usize) -> (Vec<f64>, bool) {
    let mut r = sub(b, &a.mul(&x));
    let mut s = a.mul_t(&r);
    let mut p = s.clone();
    let mut gamma = norm_sq(&s);
    if gamma.sqrt() <= target {
        return (x, true);
    }
    for _ in 0..max_iters {
        let q = a.mul(&p);
        let qq = norm_sq(&q);
        if qq == 0.0 {
            break;
        }
        let alpha = gamma / qq;
        for (xi, pi) in x.iter_mut().zip(&p) {
            *xi += alpha * pi;
        }
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri -= alpha * qi;
        }
        s = a.mul_t(&r);
        let gamma_new = norm_sq(&s);
        if gamma_new.sqrt() <= target {
            return (x, true);
        }
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + beta * *pi;
        }
    }
    let ok = norm(&a.mul_t(&sub(&a.mul(&x), b))) <= target;
    (x, ok)
}

/// Solves min ½xᵀQx + cᵀx s.t. AᵀAx = Aᵀb through its KKT system
/// Qx + c + AᵀAu = 0, AᵀAx = Aᵀb. `q` is row-major n×n.
///
/// The constraint is rewritten on the row space of A using its SVD
/// (V_rᵀx = V_rᵀx_ls), so the reduced KKT matrix is nonsingular whenever Q
/// is positive definite on ker A.
pub fn solve_qp_kkt(q: &[f64], c: &[f64], a: &LinearMap, b: &[f64]) -> Result<DualCertificate> {
    let n = a.cols();
    if n > DENSE_LIMIT {
        return Err(Error::InvalidInput(format!("KKT oracle limited to n <= {DENSE_LIMIT}")));
    }
    if q.len() != n * n || c.len() != n || b.len() != a.rows() {
        return Err(Error::InvalidInput("KKT oracle dimension mismatch".into()));
    }
    let am = to_matrix(a);
    let smax = am.norm();
    let svd = am.clone().svd(true, true);
    let (u, vt) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
    let cutoff = (a.rows().max(n) as f64) * f64::EPSILON * smax.max(1e-300) * 10.0;
    let ranks: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cutoff)
        .collect();
    let r = ranks.len();

    // w = Σ_r⁻¹ U_rᵀ b = V_rᵀ x_ls
    let bv = DVector::from_column_slice(b);
    let mut kkt = DMatrix::<f64>::zeros(n + r, n + r);
    let mut rhs = DVector::<f64>::zeros(n + r);
    for i in 0..n {
        for j in 0..n {
            kkt[(i, j)] = q[i * n + j];
        }
        rhs[i] = -c[i];
    }
    for (col, &k) in ranks.iter().enumerate() {
        for i in 0..n {
            kkt[(i, n + col)] = vt[(k, i)];
            kkt[(n + col, i)] = vt[(k, i)];
        }
        rhs[n + col] = u.column(k).dot(&bv) / svd.singular_values[k];
    }
    let sol = kkt.lu().solve(&rhs).ok_or(Error::Singular("KKT system"))?;
    let x: Vec<f64> = sol.rows(0, n).iter().copied().collect();

    // AᵀAu = V_r μ with u = V_r Σ⁻² μ, so Au = U_r Σ⁻¹ μ.
    let mut y = vec![0.0; a.rows()];
    let mut uvec = vec![0.0; n];
    for (col, &k) in ranks.iter().enumerate() {
        let s = svd.singular_values[k];
        let mu = sol[n + col];
        for i in 0..a.rows() {
            y[i] += u[(i, k)] * mu / s;
        }
        for i in 0..n {
            uvec[i] += vt[(k, i)] * mu / (s * s);
        }
    }

    let qx: Vec<f64> = (0..n).map(|i| dot(&q[i * n..(i + 1) * n], &x)).collect();
    let atau = a.mul_t(&a.mul(&uvec));
    let stationarity = norm(&qx.iter().zip(c).zip(&atau).map(|((p, cc), t)| p + cc + t).collect::<Vec<_>>());
    let feasibility = norm(&sub(&a.mul_t(&a.mul(&x)), &a.mul_t(b)));
    if !stationarity.is_finite() || !feasibility.is_finite() {
        return Err(Error::Singular("KKT system"));
    }
    let g_star = 0.5 * dot(&qx, &x) + dot(c, &x);
    Ok(DualCertificate {
        d_y: norm(&y),
        x,
        y,
        g_star,
        stationarity,
        feasibility,
    })
}

/// KKT certificate for a problem whose g is quadratic with diagonal
/// Hessian (see [`ProxFunction::quadratic_form`]). `g_star` includes the
/// constant term of g.
pub fn certify_quadratic(p: &ConstrainedProblem) -> Result<DualCertificate> {
    let (qd, c, _) = p
        .g
        .quadratic_form()
        .ok_or_else(|| Error::Configuration("KKT oracle needs a quadratic g".into()))?;
    let n = p.dim();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = qd[i];
    }
    let mut cert = solve_qp_kkt(&q, &c, &p.a, &p.b)?;
    cert.g_star = p.g.value(&cert.x);
    Ok(cert)
}

/// Minimizes g(x) + (ρ/2)‖Ax − b‖² by accelerated proximal gradient with
/// stepsize η = 0.99/(ρ‖A‖²) and gradient-based restarts, until the
/// fixed-point residual ‖prox_{ηg}(y − η∇) − y‖ is at most `tol`.
pub fn solve_penalized(p: &ConstrainedProblem, rho: f64, tol: f64, x0: Option<&[f64]>) -> Result<PenalizedSolution> {
    if !(rho > 0.0) {
        return Err(Error::InvalidInput(format!("penalty rho must be positive, got {rho}")));
    }
    let l = p.a.norm().value * (1.0 + DEFAULT_NORM_TOL);
    if l == 0.0 {
        return Err(Error::InvalidInput("penalized oracle needs a nonzero map".into()));
    }
    let eta = 0.99 / (rho * l * l);
    let mut x = x0.map_or_else(|| vec![0.0; p.dim()], <[f64]>::to_vec);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut residual = f64::INFINITY;
    for it in 1..=PENALIZED_MAX_ITERS {
        let grad = p.a.mul_t(&p.residual(&y));
        let z: Vec<f64> = y.iter().zip(&grad).map(|(yi, gi)| yi - eta * rho * gi).collect();
        let x_new = p.g.prox(eta, &z);
        residual = dist(&x_new, &y);
        if residual <= tol {
            return Ok(PenalizedSolution {
                x: x_new,
                iterations: it,
                residual,
            });
        }
        let restart = y
            .iter()
            .zip(&x_new)
            .zip(&x)
            .map(|((yi, xn), xo)| (yi - xn) * (xn - xo))
            .sum::<f64>()
            > 0.0;
        if restart {
            t = 1.0;
            y = x_new.clone();
        } else {
            let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let mom = (t - 1.0) / t_new;
            y = x_new.iter().zip(&x).map(|(xn, xo)| xn + mom * (xn - xo)).collect();
            t = t_new;
        }
        x = x_new;
    }
    Err(Error::NotConverged {
        what: "penalized proximal gradient",
        iterations: PENALIZED_MAX_ITERS,
        residual,
    })
}

/// Warm-started continuation over [`RHO_LADDER`]; returns the last solution.
pub fn solve_penalized_ladder(p: &ConstrainedProblem, tol: f64) -> Result<PenalizedSolution> {
    let mut warm: Option<Vec<f64>> = None;
    let mut last = None;
    for &rho in &RHO_LADDER {
        let sol = solve_penalized(p, rho, tol, warm.as_deref())?;
        warm = Some(sol.x.clone());
        last = Some(sol);
    }
    Ok(last.expect("ladder is nonempty"))
}

/// Exact solution and dual certificate for min w‖x‖₁ + (ρ/2)‖x‖² s.t.
/// Ax = b (consistent systems), given a guess of the solution support.
///
/// The guess (typically from [`solve_penalized_ladder`]) fixes the support
/// S and the signs; the equality-constrained KKT system on S is then solved
/// directly and the result is checked for sign consistency and dual
/// feasibility |A_jᵀy| ≤ w off the support.
pub fn certify_sparse(a: &LinearMap, b: &[f64], weight: f64, rho: f64, guess: &[f64], support_tol: f64) -> Result<DualCertificate> {
    let n = a.cols();
    let m = a.rows();
    if n > DENSE_LIMIT {
        return Err(Error::InvalidInput(format!("sparse certificate limited to n <= {DENSE_LIMIT}")));
    }
    let dense = a.to_dense();
    let support: Vec<usize> = (0..n).filter(|&i| guess[i].abs() > support_tol).collect();
    let k = support.len();
    let mut kkt = DMatrix::<f64>::zeros(k + m, k + m);
    let mut rhs = DVector::<f64>::zeros(k + m);
    for (col, &j) in support.iter().enumerate() {
        kkt[(col, col)] = rho;
        rhs[col] = -weight * guess[j].signum();
        for i in 0..m {
            kkt[(col, k + i)] = dense[i * n + j];
            kkt[(k + i, col)] = dense[i * n + j];
        }
    }
    for i in 0..m {
        rhs[k + i] = b[i];
    }
    let svd = kkt.svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-12 * svd.singular_values.max())
        .map_err(|_| Error::Singular("sparse KKT system"))?;
    let mut x = vec![0.0; n];
    for (col, &j) in support.iter().enumerate() {
        x[j] = sol[col];
        if x[j].signum() != guess[j].signum() {
            return Err(Error::Configuration(format!("support sign flipped at coordinate {j}")));
        }
    }
    let y: Vec<f64> = (0..m).map(|i| sol[k + i]).collect();
    let aty = a.mul_t(&y);
    let mut stat = 0.0f64;
    for j in 0..n {
        if support.contains(&j) {
            let r = weight * x[j].signum() + rho * x[j] + aty[j];
            stat += r * r;
        } else {
            let excess = (aty[j].abs() - weight).max(0.0);
            if excess > 1e-9 {
                return Err(Error::Configuration(format!(
                    "dual infeasible off the support at coordinate {j} (excess {excess:.3e})"
                )));
            }
        }
    }
    let feasibility = norm(&sub(&a.mul(&x), b));
    let g_star = weight * x.iter().map(|v| v.abs()).sum::<f64>() + 0.5 * rho * norm_sq(&x);
    Ok(DualCertificate {
        d_y: norm(&y),
        x,
        y,
        g_star,
        stationarity: stat.sqrt(),
        feasibility,
    })
}

/// Checks ⟨∇f(u), x̄ − v⟩ = 2f_* − f(u) − f(v) + ½‖A(u − v)‖² within
/// `tol · (1 + |rhs|)`, for x̄ a least-squares solution.
pub fn check_three_point_identity(a: &LinearMap, b: &[f64], ls: &LeastSquaresSolution, u: &[f64], v: &[f64], tol: f64) -> bool {
    let f = |x: &[f64]| 0.5 * norm_sq(&sub(&a.mul(x), b));
    let grad_u = a.mul_t(&sub(&a.mul(u), b));
    let lhs = dot(&grad_u, &sub(&ls.x, v));
    let rhs = 2.0 * ls.fstar - f(u) - f(v) + 0.5 * norm_sq(&a.mul(&sub(u, v)));
    (lhs - rhs).abs() <= tol * (1.0 + rhs.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::ProxFunction;

    fn quad(n: usize) -> ProxFunction {
        ProxFunction::quadratic(1.0, vec![0.0; n]).unwrap()
    }

    #[test]
    fn least_squares_examples() {
        let a = LinearMap::dense(1, 1, vec![2.0]).unwrap();
        let s = solve_least_squares(&a, &[2.0], 1e-12).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-14 && s.fstar.abs() < 1e-28);

        let a = LinearMap::dense(2, 1, vec![1.0, 1.0]).unwrap();
        let s = solve_least_squares(&a, &[0.0, 2.0], 1e-12).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-14 && (s.fstar - 1.0).abs() < 1e-14);

        // orthonormal columns: x_ls = Aᵀb
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = LinearMap::dense(3, 2, vec![h, 0.0, h, 0.0, 0.0, 1.0]).unwrap();
        let b = [1.0, 3.0, -2.0];
        let s = solve_least_squares(&a, &b, 1e-12).unwrap();
        let atb = a.apply_adjoint(&b).unwrap();
        assert!(dist(&s.x, &atb) < 1e-13);
    }

    #[test]
    fn least_squares_cgls_path() {
        // n > DENSE_LIMIT goes through CGLS
        let n = 60;
        let diag: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / 10.0).collect();
        let a = LinearMap::diagonal(&diag).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let s = solve_least_squares(&a, &b, 1e-12).unwrap();
        for i in 0..n {
            assert!((s.x[i] - b[i] / diag[i]).abs() < 1e-10);
        }
        assert!(s.fstar < 1e-20);
    }

    #[test]
    fn kkt_examples() {
        // min ½‖x‖² s.t. x1 + x2 = 2
        let a = LinearMap::dense(1, 2, vec![1.0, 1.0]).unwrap();
        let p = ConstrainedProblem::new(a, vec![2.0], quad(2)).unwrap();
        let c = certify_quadratic(&p).unwrap();
        assert!(dist(&c.x, &[1.0, 1.0]) < 1e-12);
        assert!((c.y[0] + 1.0).abs() < 1e-12);
        assert!((c.d_y - 1.0).abs() < 1e-12 && (c.g_star - 1.0).abs() < 1e-12);

        // canonical 1-D problem: u* = -0.25, D_y = 0.5
        let a = LinearMap::dense(1, 1, vec![2.0]).unwrap();
        let p = ConstrainedProblem::new(a, vec![2.0], quad(1)).unwrap();
        let c = certify_quadratic(&p).unwrap();
        assert!((c.x[0] - 1.0).abs() < 1e-14);
        assert!((c.d_y - 0.5).abs() < 1e-14 && (c.g_star - 0.5).abs() < 1e-14);
        assert!((c.y[0] + 0.5).abs() < 1e-14);

        // inconsistent stacked system, constraint reduces to 2x = 2
        let a = LinearMap::dense(2, 1, vec![1.0, 1.0]).unwrap();
        let p = ConstrainedProblem::new(a, vec![0.0, 2.0], quad(1)).unwrap();
        let c = certify_quadratic(&p).unwrap();
        assert!((c.x[0] - 1.0).abs() < 1e-14 && (c.g_star - 0.5).abs() < 1e-14);
        assert!(c.stationarity < 1e-12 && c.feasibility < 1e-12);
    }

    #[test]
    fn kkt_rejects_singular_system() {
        // g = 0 has Q = 0; with a kernel direction the reduced KKT is singular
        let a = LinearMap::dense(1, 2, vec![1.0, 0.0]).unwrap();
        let r = solve_qp_kkt(&[0.0; 4], &[0.0, 0.0], &a, &[1.0]);
        assert!(r.is_err());
    }

    #[test]
    fn penalized_closed_forms() {
        let a = LinearMap::dense(1, 1, vec![2.0]).unwrap();
        let p = ConstrainedProblem::new(a, vec![2.0], quad(1)).unwrap();
        // x̂ = 4ρ/(1 + 4ρ)
        for rho in [0.2, 1e6] {
            let s = solve_penalized(&p, rho, 1e-12, None).unwrap();
            let exact = 4.0 * rho / (1.0 + 4.0 * rho);
            assert!((s.x[0] - exact).abs() < 1e-9, "rho={rho} {:?}", s.x);
        }
        let s = solve_penalized(&p, 1e6, 1e-12, None).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-3);

        // g = 0: least-squares point
        let a = LinearMap::dense(2, 1, vec![1.0, 1.0]).unwrap();
        let p = ConstrainedProblem::new(a, vec![0.0, 2.0], ProxFunction::Zero { dim: 1 }).unwrap();
        let s = solve_penalized(&p, 3.0, 1e-12, None).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn three_point_identity_examples() {
        let a = LinearMap::dense(1, 1, vec![2.0]).unwrap();
        let ls = solve_least_squares(&a, &[2.0], 1e-12).unwrap();
        assert!(check_three_point_identity(&a, &[2.0], &ls, &[0.0], &[0.0], 1e-12));
        let xb = ls.x.clone();
        assert!(check_three_point_identity(&a, &[2.0], &ls, &xb, &xb, 1e-12));
    }

    #[test]
    fn sparse_certificate_on_tiny_instance() {
        // min |x1| + |x2| s.t. x1 + 2 x2 = 2  →  x = (0, 1), y = -1/2
        let a = LinearMap::dense(1, 2, vec![1.0, 2.0]).unwrap();
        let c = certify_sparse(&a, &[2.0], 1.0, 0.0, &[0.0, 0.9], 1e-6).unwrap();
        assert!(dist(&c.x, &[0.0, 1.0]) < 1e-12);
        assert!((c.y[0] + 0.5).abs() < 1e-12);
        assert!((c.g_star - 1.0).abs() < 1e-12);
        // wrong support: x = (2, 0) needs |2y| ≤ 1 with y = -1 → infeasible
        assert!(certify_sparse(&a, &[2.0], 1.0, 0.0, &[1.0, 0.0], 1e-6).is_err());
    }
}
