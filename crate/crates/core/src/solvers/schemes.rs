use super::schedule::AccelSchedule;
use super::StepSizes;
use crate::error::{Error, Result};
use crate::problem::ConstrainedProblem;
use crate::vector::{axpy, lincomb, scale};

/// Iterate of the primal-dual schemes: x^k, x^{k−1} and y^k.
#[derive(Debug, Clone, PartialEq)]
pub struct PdhgState {
    pub k: usize,
    pub x: Vec<f64>,
    pub x_prev: Vec<f64>,
    pub y: Vec<f64>,
}

impl PdhgState {
    /// y⁰ = 0 of length `dual_dim`, x^{−1} = x⁰ so that x̄⁰ = x⁰.
    pub fn new(x0: Vec<f64>, dual_dim: usize) -> Self {
        PdhgState {
            k: 0,
            x_prev: x0.clone(),
            x: x0,
            y: vec![0.0; dual_dim],
        }
    }

    fn extrapolated(&self, theta: f64) -> Vec<f64> {
        lincomb(1.0 + theta, &self.x, -theta, &self.x_prev)
    }
}

/// Iterate of the primal-only schemes: x^k and the running average s^k.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalState {
    pub k: usize,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
}

impl PrimalState {
    pub fn new(x0: Vec<f64>) -> Self {
        PrimalState {
            k: 0,
            s: x0.clone(),
            x: x0,
        }
    }
}

/// x^k together with x̃^k = Ax^k and s̃^k = As^k.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSpaceState {
    pub k: usize,
    pub x: Vec<f64>,
    pub x_tilde: Vec<f64>,
    pub s_tilde: Vec<f64>,
}

impl DualSpaceState {
    pub fn new(p: &ConstrainedProblem, x0: Vec<f64>) -> Self {
        let ax = p.a.mul(&x0);
        DualSpaceState {
            k: 0,
            x: x0,
            s_tilde: ax.clone(),
            x_tilde: ax,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccelState {
    pub k: usize,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub schedule: AccelSchedule,
}

impl AccelState {
    pub fn new(x0: Vec<f64>, tau0: f64, lambda: f64) -> Self {
        AccelState {
            k: 0,
            s: x0.clone(),
            x: x0,
            schedule: AccelSchedule::new(tau0, lambda),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccelPdhgState {
    pub inner: PdhgState,
    pub schedule: AccelSchedule,
}

impl AccelPdhgState {
    pub fn new(x0: Vec<f64>, dual_dim: usize, schedule: AccelSchedule) -> Self {
        AccelPdhgState {
            inner: PdhgState::new(x0, dual_dim),
            schedule,
        }
    }
}

fn next_average(k: usize, x_new: &[f64], s: &[f64]) -> Vec<f64> {
    let kf = k as f64;
    lincomb(1.0 / (kf + 1.0), x_new, kf / (kf + 1.0), s)
}

fn smooth_grad(p: &ConstrainedProblem, x: &[f64]) -> Result<Vec<f64>> {
    p.h
        .as_ref()
        .map(|h| h.grad(x))
        .ok_or_else(|| Error::Configuration("scheme requires a smooth term h".into()))
}

/// y ← y + σ(Ax̄ − b), x ← prox_{τg}(x − τAᵀy), x̄ = 2x^k − x^{k−1}.
pub fn step_pdhg(st: &PdhgState, p: &ConstrainedProblem, ss: &StepSizes) -> PdhgState {
    let xbar = st.extrapolated(1.0);
    let mut y = st.y.clone();
    axpy(ss.sigma, &p.residual(&xbar), &mut y);
    let mut z = st.x.clone();
    axpy(-ss.tau, &p.a.mul_t(&y), &mut z);
    PdhgState {
        k: st.k + 1,
        x: p.g.prox(ss.tau, &z),
        x_prev: st.x.clone(),
        y,
    }
}

/// x ← prox_{τg}(x − λAᵀ(A(x + k s) − (k+1)b)), s ← (x_new + k s)/(k+1).
pub fn step_primal(st: &PrimalState, p: &ConstrainedProblem, ss: &StepSizes) -> PrimalState {
    let kf = st.k as f64;
    let mut w = p.a.mul(&lincomb(1.0, &st.x, kf, &st.s));
    axpy(-(kf + 1.0), &p.b, &mut w);
    let mut z = st.x.clone();
    axpy(-ss.lambda(), &p.a.mul_t(&w), &mut z);
    let x = p.g.prox(ss.tau, &z);
    PrimalState {
        k: st.k + 1,
        s: next_average(st.k, &x, &st.s),
        x,
    }
}

/// Same iterates as [`step_primal`] with the average carried in the range
/// of A: one application of A and one of Aᵀ per step.
pub fn step_primal_dualspace(st: &DualSpaceState, p: &ConstrainedProblem, ss: &StepSizes) -> DualSpaceState {
    let kf = st.k as f64;
    let mut w = lincomb(1.0, &st.x_tilde, kf, &st.s_tilde);
    axpy(-(kf + 1.0), &p.b, &mut w);
    let mut z = st.x.clone();
    axpy(-ss.lambda(), &p.a.mul_t(&w), &mut z);
    let x = p.g.prox(ss.tau, &z);
    let x_tilde = p.a.mul(&x);
    DualSpaceState {
        k: st.k + 1,
        s_tilde: next_average(st.k, &x_tilde, &st.s_tilde),
        x_tilde,
        x,
    }
}

/// [`step_primal`] with an additional explicit step −τ∇h(x^k).
pub fn step_primal_smooth(st: &PrimalState, p: &ConstrainedProblem, ss: &StepSizes) -> Result<PrimalState> {
    let gh = smooth_grad(p, &st.x)?;
    let kf = st.k as f64;
    let mut w = p.a.mul(&lincomb(1.0, &st.x, kf, &st.s));
    axpy(-(kf + 1.0), &p.b, &mut w);
    let mut z = st.x.clone();
    axpy(-ss.lambda(), &p.a.mul_t(&w), &mut z);
    axpy(-ss.tau, &gh, &mut z);
    let x = p.g.prox(ss.tau, &z);
    Ok(PrimalState {
        k: st.k + 1,
        s: next_average(st.k, &x, &st.s),
        x,
    })
}

/// y ← y + σ(Ax̄ − b), x ← prox_{τg}(x − τ(Aᵀy + ∇h(x))).
pub fn step_condat_vu(st: &PdhgState, p: &ConstrainedProblem, ss: &StepSizes) -> Result<PdhgState> {
    let gh = smooth_grad(p, &st.x)?;
    let xbar = st.extrapolated(1.0);
    let mut y = st.y.clone();
    axpy(ss.sigma, &p.residual(&xbar), &mut y);
    let mut d = p.a.mul_t(&y);
    axpy(1.0, &gh, &mut d);
    let z = lincomb(1.0, &st.x, -ss.tau, &d);
    Ok(PdhgState {
        k: st.k + 1,
        x: p.g.prox(ss.tau, &z),
        x_prev: st.x.clone(),
        y,
    })
}

/// PDHG on the normal equations AᵀAx = Aᵀb; y lives in the primal space.
pub fn step_pdhg_gram(st: &PdhgState, p: &ConstrainedProblem, ss: &StepSizes) -> PdhgState {
    let xbar = st.extrapolated(1.0);
    let mut y = st.y.clone();
    axpy(ss.sigma, &p.f_grad(&xbar), &mut y);
    let mut z = st.x.clone();
    axpy(-ss.tau, &p.a.mul_t(&p.a.mul(&y)), &mut z);
    PdhgState {
        k: st.k + 1,
        x: p.g.prox(ss.tau, &z),
        x_prev: st.x.clone(),
        y,
    }
}

fn accel_prox_scale(p: &ConstrainedProblem) -> Result<f64> {
    let gamma = p.gamma();
    if gamma > 0.0 && gamma.is_finite() {
        Ok(gamma)
    } else {
        Err(Error::Configuration(format!(
            "accelerated schemes need a finite positive strong-convexity modulus (got {gamma})"
        )))
    }
}

/// x ← prox_{(τ_k/γ)g}(x − τ_k Aᵀ(A(σ_k x + Σ_{k−1}s) − Σ_k b)),
/// s ← (σ_k x_new + Σ_{k−1}s)/Σ_k.
pub fn step_accelerated(st: &AccelState, p: &ConstrainedProblem) -> Result<AccelState> {
    let gamma = accel_prox_scale(p)?;
    let sch = &st.schedule;
    let mut w = p.a.mul(&lincomb(sch.sigma, &st.x, sch.sigma_sum_prev, &st.s));
    axpy(-sch.sigma_sum, &p.b, &mut w);
    let mut z = st.x.clone();
    axpy(-sch.tau, &p.a.mul_t(&w), &mut z);
    let x = p.g.prox(sch.tau / gamma, &z);
    let s = scale(
        1.0 / sch.sigma_sum,
        &lincomb(sch.sigma, &x, sch.sigma_sum_prev, &st.s),
    );
    Ok(AccelState {
        k: st.k + 1,
        x,
        s,
        schedule: sch.advance(),
    })
}

/// y ← y + σ_k(Ax̄ − b), x ← prox_{(τ_k/γ)g}(x − τ_k Aᵀy), with
/// x̄ = x^k + θ_k(x^k − x^{k−1}).
pub fn step_accelerated_pdhg(st: &AccelPdhgState, p: &ConstrainedProblem) -> Result<AccelPdhgState> {
    let gamma = if st.schedule.frozen { 1.0 } else { accel_prox_scale(p)? };
    let sch = &st.schedule;
    let cur = &st.inner;
    let xbar = cur.extrapolated(sch.theta);
    let mut y = cur.y.clone();
    axpy(sch.sigma, &p.residual(&xbar), &mut y);
    let mut z = cur.x.clone();
    axpy(-sch.tau, &p.a.mul_t(&y), &mut z);
    Ok(AccelPdhgState {
        inner: PdhgState {
            k: cur.k + 1,
            x: p.g.prox(sch.tau / gamma, &z),
            x_prev: cur.x.clone(),
            y,
        },
        schedule: sch.advance(),
    })
}

/// Tseng-type accelerated proximal gradient on g + f/λ-scaled steps:
/// z = θx + (1−θ)s, x ← prox_{(λ/θ)g}(x − (λ/θ)∇f(z)), s ← θx_new + (1−θ)s.
pub fn step_tseng_with(st: &PrimalState, p: &ConstrainedProblem, lambda: f64, theta: f64) -> PrimalState {
    let zpt = lincomb(theta, &st.x, 1.0 - theta, &st.s);
    let step = lambda / theta;
    let z = lincomb(1.0, &st.x, -step, &p.f_grad(&zpt));
    let x = p.g.prox(step, &z);
    PrimalState {
        k: st.k + 1,
        s: lincomb(theta, &x, 1.0 - theta, &st.s),
        x,
    }
}

/// [`step_tseng_with`] for θ_k = 2/(k+2).
pub fn step_tseng(st: &PrimalState, p: &ConstrainedProblem, lambda: f64) -> PrimalState {
    step_tseng_with(st, p, lambda, 2.0 / (st.k as f64 + 2.0))
}
