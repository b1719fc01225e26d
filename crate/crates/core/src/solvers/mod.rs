//! Iteration schemes as pure stepping functions, plus a trace-recording
//! driver.
//!
//! All schemes start from x⁰ with s⁰ = x⁰, x̄⁰ = x⁰ and y⁰ = 0, for which
//! the primal schemes reproduce the x-iterates of their primal-dual
//! counterparts exactly.

mod run;
mod schedule;
mod schemes;
mod trace;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use run::{run, RunOptions};
pub use schedule::{accel_schedule_next, AccelSchedule};
pub use schemes::{
    step_accelerated, step_accelerated_pdhg, step_condat_vu, step_pdhg, step_pdhg_gram, step_primal,
    step_primal_dualspace, step_primal_smooth, step_tseng, step_tseng_with, AccelPdhgState, AccelState,
    DualSpaceState, PdhgState, PrimalState,
};
pub use trace::{read_records, write_records, Column, Snapshot, Trace, TraceRecord, TRACE_HEADER};

/// Default safety factor applied to stepsize inequalities.
pub const DEFAULT_SAFETY: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Pdhg,
    Primal,
    DualSpace,
    Smooth,
    CondatVu,
    Gram,
    Accel,
    AccelPdhg,
    Tseng,
}

impl Variant {
    pub const ALL: [Variant; 9] = [
        Variant::Pdhg,
        Variant::Primal,
        Variant::DualSpace,
        Variant::Smooth,
        Variant::CondatVu,
        Variant::Gram,
        Variant::Accel,
        Variant::AccelPdhg,
        Variant::Tseng,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Pdhg => "pdhg",
            Variant::Primal => "primal",
            Variant::DualSpace => "dualspace",
            Variant::Smooth => "smooth",
            Variant::CondatVu => "condat-vu",
            Variant::Gram => "gram",
            Variant::Accel => "accel",
            Variant::AccelPdhg => "accel-pdhg",
            Variant::Tseng => "tseng",
        }
    }

    pub fn is_accelerated(self) -> bool {
        matches!(self, Variant::Accel | Variant::AccelPdhg)
    }

    pub fn uses_smooth_term(self) -> bool {
        matches!(self, Variant::Smooth | Variant::CondatVu)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown variant '{s}'")))
    }
}

/// Primal stepsize τ and dual stepsize σ; λ = τσ.
///
/// For the accelerated variants `tau` is the initial τ₀ of the schedule and
/// λ = τ₀σ₀ stays fixed along it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizes {
    pub tau: f64,
    pub sigma: f64,
}

impl StepSizes {
    pub fn new(tau: f64, sigma: f64) -> Result<Self> {
        if !(tau > 0.0 && sigma > 0.0) || !tau.is_finite() || !sigma.is_finite() {
            return Err(Error::InvalidInput(format!(
                "stepsizes must be positive and finite (tau={tau}, sigma={sigma})"
            )));
        }
        Ok(StepSizes { tau, sigma })
    }

    /// τ = σ = √λ.
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        let r = lambda.sqrt();
        Self::new(r, r)
    }

    pub fn lambda(&self) -> f64 {
        self.tau * self.sigma
    }

    /// Default stepsizes for `variant` given ‖A‖ and the smoothness β of h.
    pub fn default_for(variant: Variant, norm: f64, beta: f64) -> Result<Self> {
        let safety = DEFAULT_SAFETY;
        let n2 = (norm * norm).max(f64::MIN_POSITIVE);
        match variant {
            Variant::Gram => Self::from_lambda(safety / (n2 * n2)),
            Variant::Smooth | Variant::CondatVu => {
                // τ = σ = t with ‖A‖²t² + βt = safety
                let t = if beta == 0.0 {
                    (safety / n2).sqrt()
                } else {
                    (-beta + (beta * beta + 4.0 * n2 * safety).sqrt()) / (2.0 * n2)
                };
                Self::new(t, t)
            }
            Variant::Accel | Variant::AccelPdhg => Self::new(1.0, safety / n2),
            _ => Self::from_lambda(safety / n2),
        }
    }
}

/// Checks the admissibility inequality of `variant` for operator norm
/// `norm` and smoothness `beta`.
pub fn validate_stepsizes(variant: Variant, ss: &StepSizes, norm: f64, beta: f64) -> Result<()> {
    let lambda = ss.lambda();
    let n2 = norm * norm;
    let (ok, condition, value) = match variant {
        Variant::Gram => {
            let v = lambda * n2 * n2;
            (v < 1.0, "tau*sigma*|A|^4 < 1", v)
        }
        Variant::Smooth | Variant::CondatVu => {
            let v = lambda * n2 + ss.tau * beta;
            (v < 1.0, "tau*sigma*|A|^2 < 1 - tau*beta", v)
        }
        Variant::Accel | Variant::AccelPdhg => {
            let v = lambda * n2;
            (v <= 1.0, "lambda*|A|^2 <= 1", v)
        }
        _ => {
            let v = lambda * n2;
            (v < 1.0, "lambda*|A|^2 < 1", v)
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::StepSize { condition, value })
    }
}
