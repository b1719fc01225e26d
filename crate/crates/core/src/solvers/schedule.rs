/// One step of the accelerated stepsize rule for fixed λ = τσ:
/// τ' = τ/√(1+τ), σ' = λ/τ', θ' = τ'/τ.
pub fn accel_schedule_next(tau: f64, lambda: f64) -> (f64, f64, f64) {
    let next = tau / (1.0 + tau).sqrt();
    (next, lambda / next, next / tau)
}

/// Stepsizes of the accelerated schemes at iteration k together with the
/// running sums Σ_k = σ_0 + … + σ_k and Σ_{k−1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelSchedule {
    pub tau: f64,
    pub sigma: f64,
    pub theta: f64,
    pub sigma_sum: f64,
    pub sigma_sum_prev: f64,
    pub lambda: f64,
    /// Keeps τ, σ constant and θ = 1; used to recover the basic schemes.
    pub frozen: bool,
}

impl AccelSchedule {
    pub fn new(tau0: f64, lambda: f64) -> Self {
        let sigma = lambda / tau0;
        AccelSchedule {
            tau: tau0,
            sigma,
            theta: 1.0,
            sigma_sum: sigma,
            sigma_sum_prev: 0.0,
            lambda,
            frozen: false,
        }
    }

    pub fn frozen(tau: f64, sigma: f64) -> Self {
        AccelSchedule {
            tau,
            sigma,
            theta: 1.0,
            sigma_sum: sigma,
            sigma_sum_prev: 0.0,
            lambda: tau * sigma,
            frozen: true,
        }
    }

    pub fn advance(&self) -> Self {
        let (tau, sigma, theta) = if self.frozen {
            (self.tau, self.sigma, 1.0)
        } else {
            accel_schedule_next(self.tau, self.lambda)
        };
        AccelSchedule {
            tau,
            sigma,
            theta,
            sigma_sum: self.sigma_sum + sigma,
            sigma_sum_prev: self.sigma_sum,
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_values() {
        let (t, s, th) = accel_schedule_next(1.0, 0.5);
        let r = 2f64.sqrt();
        assert!((t - 1.0 / r).abs() < 1e-15);
        assert!((s - 0.5 * r).abs() < 1e-15);
        assert!((th - 1.0 / r).abs() < 1e-15);
    }

    #[test]
    fn sandwich_from_unit_start() {
        let mut sch = AccelSchedule::new(1.0, 0.3);
        for k in 0..100_000usize {
            let kk = k as f64;
            assert!(sch.tau >= 2.0 / (kk + 2.0) - 1e-15, "k={k}");
            assert!(sch.tau <= 3.0 / (kk + 2.0) + 1e-15, "k={k}");
            assert!((sch.tau * sch.sigma - 0.3).abs() < 1e-14);
            sch = sch.advance();
        }
    }

    #[test]
    fn sigma_sums() {
        let s0 = AccelSchedule::new(1.0, 0.5);
        assert_eq!(s0.sigma_sum_prev, 0.0);
        assert_eq!(s0.sigma_sum, 0.5);
        let s1 = s0.advance();
        assert_eq!(s1.sigma_sum_prev, 0.5);
        assert!((s1.sigma_sum - (0.5 + s1.sigma)).abs() < 1e-15);
    }

    #[test]
    fn frozen_is_constant() {
        let mut s = AccelSchedule::frozen(0.7, 0.2);
        for _ in 0..5 {
            s = s.advance();
            assert_eq!((s.tau, s.sigma, s.theta), (0.7, 0.2, 1.0));
        }
        assert!((s.sigma_sum - 6.0 * 0.2).abs() < 1e-14);
    }
}
