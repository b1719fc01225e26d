#![allow(dead_code)]

use pdhg_core::diagnostics::Certificates;
use pdhg_core::instances::{gaussian_map, gaussian_vector, rank_deficient_map};
use pdhg_core::oracle::{certify_quadratic, DualCertificate};
use pdhg_core::{ConstrainedProblem, LinearMap, ProxFunction, StepSizes, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub struct Certified {
    pub name: String,
    pub p: ConstrainedProblem,
    pub cert: DualCertificate,
    pub consistent: bool,
}

impl Certified {
    pub fn certificates(&self, x0: &[f64]) -> Certificates {
        Certificates::from_dual(&self.cert, x0, self.p.fstar().unwrap()).unwrap()
    }

    pub fn defaults(&self, v: Variant) -> StepSizes {
        StepSizes::default_for(v, self.p.a.norm().value, self.p.beta()).unwrap()
    }
}

fn certify(name: &str, a: LinearMap, b: Vec<f64>, g: ProxFunction, consistent: bool) -> Certified {
    let mut p = ConstrainedProblem::new(a, b, g).unwrap();
    p.compute_fstar(1e-12).unwrap();
    let cert = certify_quadratic(&p).unwrap();
    assert!(cert.stationarity < 1e-9 && cert.feasibility < 1e-9, "{name}: weak certificate");
    Certified {
        name: name.to_string(),
        p,
        cert,
        consistent,
    }
}

fn quadratic_g(n: usize, rho: Option<f64>, r: &mut ChaCha8Rng) -> ProxFunction {
    let rho = rho.unwrap_or_else(|| 0.5 + r.random::<f64>());
    ProxFunction::quadratic(rho, gaussian_vector(n, r)).unwrap()
}

/// Five KKT-certified instances with quadratic g, n ≤ 20; the first three
/// are consistent, the last two are not. `rho` fixes the modulus of g.
pub fn quadratic_family(seed: u64, rho: Option<f64>) -> Vec<Certified> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    for (i, &(m, n)) in [(6usize, 10usize), (10, 15), (12, 20)].iter().enumerate() {
        let a = gaussian_map(m, n, &mut r);
        let xt = gaussian_vector(n, &mut r);
        let b = a.apply(&xt).unwrap();
        let g = quadratic_g(n, rho, &mut r);
        out.push(certify(&format!("consistent-{i} {m}x{n}"), a, b, g, true));
    }
    let a = gaussian_map(20, 12, &mut r);
    let b = gaussian_vector(20, &mut r);
    let g = quadratic_g(12, rho, &mut r);
    out.push(certify("overdetermined 20x12", a, b, g, false));
    let a = rank_deficient_map(8, 16, 5, &mut r);
    let b = gaussian_vector(8, &mut r);
    let g = quadratic_g(16, rho, &mut r);
    out.push(certify("rank-5 8x16", a, b, g, false));
    out
}
