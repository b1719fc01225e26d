//! Closed-form convergence bounds and their evaluation against traces.
//!
//! Bounds are computed from [`Certificates`] on demand, so a trace can be
//! re-audited after sharpening the oracle solution.

use std::io::Write;

use crate::error::{Error, Result};
use crate::oracle::DualCertificate;
use crate::problem::ConstrainedProblem;
use crate::solvers::{AccelSchedule, Column, Snapshot, StepSizes, Trace, Variant};
use crate::vector::{dist, norm, norm_sq, sub};

/// Oracle quantities entering the bounds: D_x = ‖x⁰ − x̄‖, D_y = ‖Au*‖,
/// g_* = min of g over argmin f, and f_* = min f.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificates {
    pub d_x: f64,
    pub d_y: f64,
    pub g_star: f64,
    pub f_star: f64,
}

impl Certificates {
    pub fn new(d_x: f64, d_y: f64, g_star: f64, f_star: f64) -> Result<Self> {
        if !(d_x >= 0.0 && d_y >= 0.0 && f_star >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "certificates must be nonnegative (D_x={d_x}, D_y={d_y}, f_*={f_star})"
            )));
        }
        Ok(Certificates { d_x, d_y, g_star, f_star })
    }

    pub fn from_dual(cert: &DualCertificate, x0: &[f64], f_star: f64) -> Result<Self> {
        Self::new(dist(x0, &cert.x), cert.d_y, cert.g_star, f_star)
    }
}

/// F(x) = g(x) + weight·(f(x) − f_*), with weight σk for the basic schemes
/// and γΣ_{k−1} for the accelerated ones. A zero weight gives g(x).
pub fn penalty_value(p: &ConstrainedProblem, f_star: f64, weight: f64, x: &[f64]) -> f64 {
    let g = p.g.value(x);
    if weight == 0.0 {
        g
    } else {
        g + weight * (p.f_value(x) - f_star)
    }
}

/// True iff |g(x) − g_*| ≤ ε and ‖Ax − b‖ ≤ ε.
pub fn epsilon_check(p: &ConstrainedProblem, g_star: f64, x: &[f64], eps: f64) -> bool {
    (p.g.value(x) - g_star).abs() <= eps && norm(&p.residual(x)) <= eps
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Bounds {
    pub penalty_upper: f64,
    pub penalty_lower: f64,
    pub feas_upper: f64,
    pub obj_upper: f64,
    pub obj_lower: f64,
}

pub fn theorem1_bounds(cert: &Certificates, ss: &StepSizes, k: usize) -> Theorem1Bounds {
    let (tau, sigma) = (ss.tau, ss.sigma);
    let kf = k as f64;
    let (dx2, dy) = (cert.d_x * cert.d_x, cert.d_y);
    let root = (dy * dy + sigma * dx2 / tau).sqrt();
    Theorem1Bounds {
        penalty_upper: dx2 / (2.0 * tau * kf),
        penalty_lower: -dy * dy / (2.0 * sigma * kf),
        feas_upper: (dy + root) / (sigma * kf),
        obj_upper: dx2 / (2.0 * tau * kf),
        obj_lower: -(dy * dy + dy * root) / (sigma * kf),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem2Bounds {
    pub penalty_upper: f64,
    pub penalty_lower: f64,
    /// Upper bound on f(s^k) − f_*.
    pub fgap_upper: f64,
    /// Upper bound on ‖x^k − x̄‖.
    pub dist_upper: f64,
}

/// Bounds for the accelerated schemes at a schedule point with
/// Σ_{k−1} > 0, in the units of the original g with modulus γ.
pub fn theorem2_bounds(cert: &Certificates, gamma: f64, sch: &AccelSchedule) -> Theorem2Bounds {
    let lambda = sch.lambda;
    let big = sch.sigma_sum_prev;
    let dx2 = cert.d_x * cert.d_x;
    let dy = cert.d_y / gamma;
    let t = (dy + (dy * dy + lambda * dx2).sqrt()) / (std::f64::consts::SQRT_2 * big);
    Theorem2Bounds {
        penalty_upper: gamma * lambda * dx2 / (2.0 * big),
        penalty_lower: -cert.d_y * cert.d_y / (2.0 * gamma * big),
        fgap_upper: t * t,
        dist_upper: ((sch.tau / sch.sigma) * (lambda * dx2 + dy * dy)).sqrt(),
    }
}

/// Lower bound g(x) − g_* ≥ −D_y √(2 f_gap).
pub fn dual_lower_estimate(cert: &Certificates, f_gap: f64) -> f64 {
    -cert.d_y * (2.0 * f_gap.max(0.0)).sqrt()
}

/// Least-squares slope of log(value) against log(k).
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(k, v)| *k > 0.0 && *v > 0.0 && v.is_finite())
        .map(|(k, v)| (k.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidInput("rate fit needs at least two positive points".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("rate fit needs distinct k values".into()));
    }
    Ok(sxy / sxx)
}

/// Fits the decay rate of `column − offset` over records with
/// `k_min ≤ k ≤ k_max`. Nonpositive values are dropped.
///
/// Without an explicit window use [`default_window`].
pub fn rate_fit(trace: &Trace, column: Column, offset: f64, k_min: usize, k_max: Option<usize>) -> Result<f64> {
    let window: Vec<(f64, f64)> = trace
        .records
        .iter()
        .filter(|r| r.k >= k_min && k_max.is_none_or(|m| r.k <= m))
        .map(|r| (r.k as f64, r.get(column) - offset))
        .collect();
    if window.len() < 10 {
        return Err(Error::InvalidInput(format!(
            "rate fit needs at least 10 records in the window, found {}",
            window.len()
        )));
    }
    log_log_slope(&window)
}

/// Last half of the records, restricted to k ≥ 100.
pub fn default_window(trace: &Trace) -> usize {
    let last = trace.records.last().map_or(0, |r| r.k);
    (last / 2).max(100)
}

/// Per-step excess of the Lyapunov inequality
/// (1/2τ)‖x^{k+1} − x̄‖² + (k+1)(F_{k+1}(s^{k+1}) − g_*)
///   ≤ (1/2τ)‖x^k − x̄‖² + k(F_k(s^k) − g_*).
///
/// Entry i is lhs − rhs for the step from snapshot i to i+1; snapshots must
/// be consecutive iterations of the basic scheme.
pub fn lyapunov_residuals(
    snapshots: &[Snapshot],
    p: &ConstrainedProblem,
    cert: &Certificates,
    ss: &StepSizes,
    xbar: &[f64],
) -> Result<Vec<f64>> {
    let energy = |s: &Snapshot| {
        let kf = s.k as f64;
        let dist_term = norm_sq(&sub(&s.x, xbar)) / (2.0 * ss.tau);
        if s.k == 0 {
            dist_term
        } else {
            let f = penalty_value(p, cert.f_star, ss.sigma * kf, &s.s);
            dist_term + kf * (f - cert.g_star)
        }
    };
    snapshots
        .windows(2)
        .map(|w| {
            if w[1].k != w[0].k + 1 {
                return Err(Error::InvalidInput(format!(
                    "snapshots {} and {} are not consecutive",
                    w[0].k, w[1].k
                )));
            }
            Ok(energy(&w[1]) - energy(&w[0]))
        })
        .collect()
}

pub fn lyapunov_check(
    snapshots: &[Snapshot],
    p: &ConstrainedProblem,
    cert: &Certificates,
    ss: &StepSizes,
    xbar: &[f64],
) -> Result<bool> {
    Ok(lyapunov_residuals(snapshots, p, cert, ss, xbar)?
        .iter()
        .all(|&r| r <= 1e-8))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

/// One audited inequality at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub k: usize,
    pub check: &'static str,
    pub side: Side,
    pub measured: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Absolute slack plus an allowance that grows linearly in k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slack {
    pub abs: f64,
    pub per_k: f64,
}

impl Default for Slack {
    fn default() -> Self {
        Slack { abs: 1e-8, per_k: 1e-10 }
    }
}

impl Slack {
    fn at(&self, k: usize) -> f64 {
        self.abs + self.per_k * k as f64
    }
}

fn row(k: usize, check: &'static str, side: Side, measured: f64, bound: f64, slack: f64) -> AuditRow {
    let satisfied = match side {
        Side::Upper => measured <= bound + slack,
        Side::Lower => measured >= bound - slack,
    };
    AuditRow {
        k,
        check,
        side,
        measured,
        bound,
        satisfied,
    }
}

fn feasibility_measure(f_s: f64, f_star: f64) -> f64 {
    (2.0 * (f_s - f_star).max(0.0)).sqrt()
}

/// Audits a basic-scheme trace against every Theorem 1 inequality at every
/// recorded k ≥ 1. Feasibility is measured as √(2(f(s^k) − f_*)), which is
/// ‖As^k − b‖ in the consistent case.
pub fn audit_theorem1(trace: &Trace, cert: &Certificates, slack: Slack) -> Result<Vec<AuditRow>> {
    if !matches!(trace.variant, Variant::Pdhg | Variant::Primal | Variant::DualSpace) {
        return Err(Error::Configuration(format!(
            "theorem 1 audit applies to pdhg, primal and dualspace traces, not {}",
            trace.variant
        )));
    }
    let mut rows = Vec::new();
    for r in trace.records.iter().filter(|r| r.k >= 1) {
        let b = theorem1_bounds(cert, &trace.steps, r.k);
        let sl = slack.at(r.k);
        let pen = r.penalty_s - cert.g_star;
        let obj = r.g_s - cert.g_star;
        rows.push(row(r.k, "penalty_upper", Side::Upper, pen, b.penalty_upper, sl));
        rows.push(row(r.k, "penalty_lower", Side::Lower, pen, b.penalty_lower, sl));
        rows.push(row(
            r.k,
            "feasibility",
            Side::Upper,
            feasibility_measure(r.f_s, cert.f_star),
            b.feas_upper,
            sl,
        ));
        rows.push(row(r.k, "objective_upper", Side::Upper, obj, b.obj_upper, sl));
        rows.push(row(r.k, "objective_lower", Side::Lower, obj, b.obj_lower, sl));
    }
    Ok(rows)
}

/// Reference point for audits: the problem and an x̄ ∈ argmin f.
///
/// With a reference, audits evaluate f(s^k) − f_* as ½‖A(s^k − x̄)‖², which
/// equals it exactly for x̄ ∈ argmin f but avoids the cancellation of
/// f(s^k) − f_* when f_* > 0. The accelerated bounds multiply that
/// difference by Σ_{k−1}² ~ k⁴, so the direct form loses all accuracy.
#[derive(Debug, Clone, Copy)]
pub struct Reference<'a> {
    pub p: &'a ConstrainedProblem,
    pub xbar: &'a [f64],
}

/// Audits an accelerated trace: Σ_{k−1}(F_k(s^k) − g_*) on both sides and
/// the f-gap bound at every recorded k ≥ 1. With a reference and a
/// snapshot at k, the f-gap is evaluated stably and ‖x^k − x̄‖ is audited
/// as well.
pub fn audit_theorem2(
    trace: &Trace,
    cert: &Certificates,
    gamma: f64,
    reference: Option<Reference<'_>>,
    slack: Slack,
) -> Result<Vec<AuditRow>> {
    if !trace.variant.is_accelerated() {
        return Err(Error::Configuration(format!(
            "theorem 2 audit applies to accelerated traces, not {}",
            trace.variant
        )));
    }
    let mut sch = AccelSchedule::new(trace.steps.tau, trace.steps.lambda());
    let mut sk = 0;
    let mut rows = Vec::new();
    let mut snaps = trace.snapshots.iter().peekable();
    for r in &trace.records {
        while sk < r.k {
            sch = sch.advance();
            sk += 1;
        }
        if r.k == 0 {
            continue;
        }
        let b = theorem2_bounds(cert, gamma, &sch);
        let sl = slack.at(r.k);
        let big = sch.sigma_sum_prev;
        while snaps.peek().is_some_and(|s| s.k < r.k) {
            snaps.next();
        }
        let snap = snaps.peek().filter(|s| s.k == r.k);
        let (g_gap, f_gap) = match (reference, snap) {
            (Some(rf), Some(s)) => (
                rf.p.g.value(&s.s) - cert.g_star,
                0.5 * norm_sq(&rf.p.a.mul(&sub(&s.s, rf.xbar))),
            ),
            _ => (r.g_s - cert.g_star, r.f_s - cert.f_star),
        };
        let scaled = big * g_gap + gamma * big * big * f_gap;
        rows.push(row(r.k, "scaled_penalty_upper", Side::Upper, scaled, b.penalty_upper * big, sl));
        rows.push(row(r.k, "scaled_penalty_lower", Side::Lower, scaled, b.penalty_lower * big, sl));
        rows.push(row(r.k, "fgap_upper", Side::Upper, f_gap, b.fgap_upper, sl));
        if let (Some(rf), Some(s)) = (reference, snap) {
            rows.push(row(r.k, "dist_upper", Side::Upper, dist(&s.x, rf.xbar), b.dist_upper, sl));
        }
    }
    Ok(rows)
}

pub const AUDIT_HEADER: &str = "k,check,measured,bound,satisfied";

pub fn write_audit<W: Write>(rows: &[AuditRow], mut w: W) -> Result<()> {
    writeln!(w, "{AUDIT_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{:.16e},{:.16e},{}", r.k, r.check, r.measured, r.bound, r.satisfied)?;
    }
    Ok(())
}
