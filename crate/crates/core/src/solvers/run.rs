use super::schedule::AccelSchedule;
use super::schemes::*;
use super::trace::{Snapshot, Trace, TraceRecord};
use super::{validate_stepsizes, StepSizes, Variant};
use crate::error::{Error, Result};
use crate::operators::DEFAULT_NORM_TOL;
use crate::oracle;
use crate::problem::ConstrainedProblem;
use crate::vector::{dist, lincomb, norm, scale};

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub max_iters: usize,
    /// Record every this many iterations; the last iteration is always kept.
    pub record_every: usize,
    /// Keep (x^k, s^k) alongside each record.
    pub snapshots: bool,
    /// Known ‖A‖; estimated by power iteration when absent.
    pub norm: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_iters: 1000,
            record_every: 1,
            snapshots: false,
            norm: None,
        }
    }
}

enum State {
    Pdhg(PdhgState),
    Primal(PrimalState),
    Dual(DualSpaceState),
    Accel(AccelState),
    AccelPdhg(AccelPdhgState),
}

impl State {
    fn x(&self) -> &[f64] {
        match self {
            State::Pdhg(s) => &s.x,
            State::Primal(s) => &s.x,
            State::Dual(s) => &s.x,
            State::Accel(s) => &s.x,
            State::AccelPdhg(s) => &s.inner.x,
        }
    }

    fn own_average(&self) -> Option<&[f64]> {
        match self {
            State::Primal(s) => Some(&s.s),
            State::Accel(s) => Some(&s.s),
            _ => None,
        }
    }

    fn schedule(&self) -> Option<AccelSchedule> {
        match self {
            State::Accel(s) => Some(s.schedule),
            State::AccelPdhg(s) => Some(s.schedule),
            _ => None,
        }
    }
}

/// Runs `variant` from `x0` for `opts.max_iters` iterations and records
/// f(x^k), f(s^k), (g+h)(s^k), F_k(s^k), ‖As^k − b‖ and ‖x^k − x^{k−1}‖.
///
/// Stepsizes are validated against the variant's admissibility inequality
/// before any iteration; f_* is computed if the problem does not carry it.
pub fn run(variant: Variant, p: &ConstrainedProblem, ss: &StepSizes, x0: &[f64], opts: &RunOptions) -> Result<Trace> {
    if x0.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            context: "initial point",
            expected: p.dim(),
            found: x0.len(),
        });
    }
    if opts.record_every == 0 {
        return Err(Error::InvalidInput("record_every must be at least 1".into()));
    }
    let est = opts.norm.unwrap_or_else(|| p.a.norm().value);
    // power iteration underestimates; strict inequalities use a padded value
    let bound = if variant.is_accelerated() { est } else { est * (1.0 + DEFAULT_NORM_TOL) };
    let beta = if variant.uses_smooth_term() {
        if p.h.is_none() {
            return Err(Error::Configuration(format!("variant {variant} requires a smooth term h")));
        }
        p.beta()
    } else {
        0.0
    };
    validate_stepsizes(variant, ss, bound, beta)?;
    let gamma = p.gamma();
    if variant.is_accelerated() && !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Configuration(format!(
            "variant {variant} needs a finite positive strong-convexity modulus (got {gamma})"
        )));
    }
    let f_star = match p.fstar() {
        Some(v) => v,
        None => {
            let ls = oracle::solve_least_squares(&p.a, &p.b, 1e-10)?;
            if (2.0 * ls.fstar).sqrt() <= 1e-10 { 0.0 } else { ls.fstar }
        }
    };

    let x0 = x0.to_vec();
    let mut state = match variant {
        Variant::Pdhg | Variant::CondatVu => State::Pdhg(PdhgState::new(x0.clone(), p.rows())),
        Variant::Gram => State::Pdhg(PdhgState::new(x0.clone(), p.dim())),
        Variant::Primal | Variant::Smooth | Variant::Tseng => State::Primal(PrimalState::new(x0.clone())),
        Variant::DualSpace => State::Dual(DualSpaceState::new(p, x0.clone())),
        Variant::Accel => State::Accel(AccelState::new(x0.clone(), ss.tau, ss.lambda())),
        Variant::AccelPdhg => State::AccelPdhg(AccelPdhgState::new(
            x0.clone(),
            p.rows(),
            AccelSchedule::new(ss.tau, ss.lambda()),
        )),
    };
    // running average for schemes that do not carry one
    let mut avg = x0.clone();
    let mut dx = 0.0;
    let mut records = Vec::new();
    let mut snapshots = Vec::new();

    let record = |k: usize, state: &State, avg: &[f64], dx: f64, records: &mut Vec<TraceRecord>, snaps: &mut Vec<Snapshot>| {
        let x = state.x();
        let s = state.own_average().unwrap_or(avg);
        let weight = match state.schedule() {
            Some(sch) => gamma * sch.sigma_sum_prev,
            None => ss.sigma * k as f64,
        };
        let f_s = p.f_value(s);
        let g_s = p.objective(s);
        let penalty_s = if weight == 0.0 { g_s } else { g_s + weight * (f_s - f_star) };
        records.push(TraceRecord {
            k,
            f_x: p.f_value(x),
            f_s,
            g_s,
            penalty_s,
            residual_s: norm(&p.residual(s)),
            dx_norm: dx,
        });
        if opts.snapshots {
            snaps.push(Snapshot {
                k,
                x: x.to_vec(),
                s: s.to_vec(),
            });
        }
    };

    record(0, &state, &avg, dx, &mut records, &mut snapshots);
    for k in 0..opts.max_iters {
        let sched = state.schedule();
        let next = match &state {
            State::Pdhg(st) => State::Pdhg(match variant {
                Variant::CondatVu => step_condat_vu(st, p, ss)?,
                Variant::Gram => step_pdhg_gram(st, p, ss),
                _ => step_pdhg(st, p, ss),
            }),
            State::Primal(st) => State::Primal(match variant {
                Variant::Smooth => step_primal_smooth(st, p, ss)?,
                Variant::Tseng => step_tseng(st, p, ss.lambda()),
                _ => step_primal(st, p, ss),
            }),
            State::Dual(st) => State::Dual(step_primal_dualspace(st, p, ss)),
            State::Accel(st) => State::Accel(step_accelerated(st, p)?),
            State::AccelPdhg(st) => State::AccelPdhg(step_accelerated_pdhg(st, p)?),
        };
        dx = dist(next.x(), state.x());
        if next.own_average().is_none() {
            avg = match sched {
                Some(sch) => scale(1.0 / sch.sigma_sum, &lincomb(sch.sigma, next.x(), sch.sigma_sum_prev, &avg)),
                None => {
                    let kf = k as f64;
                    lincomb(1.0 / (kf + 1.0), next.x(), kf / (kf + 1.0), &avg)
                }
            };
        }
        state = next;
        let kk = k + 1;
        if kk % opts.record_every == 0 || kk == opts.max_iters {
            record(kk, &state, &avg, dx, &mut records, &mut snapshots);
        }
    }

    let s = state.own_average().unwrap_or(&avg).to_vec();
    Ok(Trace {
        variant,
        steps: *ss,
        f_star,
        records,
        snapshots,
        x: state.x().to_vec(),
        s,
    })
}
