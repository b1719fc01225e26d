mod common;

use std::io::BufReader;

use pdhg_core::instances::{canonical, gaussian_map, gaussian_vector, random_g, GKind};
use pdhg_core::solvers::{accel_schedule_next, read_records, AccelSchedule};
use pdhg_core::{run, ConstrainedProblem, Error, ProxFunction, RunOptions, StepSizes, Variant};
use proptest::prelude::*;

fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

fn prox_family(n: usize, seed: u64) -> Vec<ProxFunction> {
    let mut r = common::rng(seed);
    let mut out: Vec<ProxFunction> = GKind::ALL.iter().map(|&k| random_g(k, n, &mut r)).collect();
    out.push(ProxFunction::Zero { dim: n });
    out.push(ProxFunction::NonNegative { dim: n });
    out.push(ProxFunction::Linear { c: gaussian_vector(n, &mut r) });
    out.push(ProxFunction::strongly_convexified(ProxFunction::l1(0.5, n).unwrap(), 0.7).unwrap());
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prox_is_nonexpansive(seed in any::<u64>(), tau in 0.01f64..10.0, u in vec_strategy(5), v in vec_strategy(5)) {
        for g in prox_family(5, seed) {
            let pu = g.prox(tau, &u);
            let pv = g.prox(tau, &v);
            let d_out: f64 = pu.iter().zip(&pv).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let d_in: f64 = u.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            prop_assert!(d_out <= d_in * (1.0 + 1e-12) + 1e-12, "{g:?}");
        }
    }

    #[test]
    fn prox_inequality_holds(seed in any::<u64>(), tau in 0.01f64..10.0, z in vec_strategy(4),
                             probes in prop::collection::vec(vec_strategy(4), 1..8)) {
        for g in prox_family(4, seed) {
            prop_assert!(g.check_prox_inequality(tau, &z, &probes), "{g:?}");
        }
    }

    #[test]
    fn schedule_keeps_lambda_and_sums(lambda in 1e-3f64..10.0, tau0 in 0.1f64..5.0) {
        let mut sch = AccelSchedule::new(tau0, lambda);
        let mut sum = sch.sigma;
        prop_assert!(sch.sigma_sum_prev == 0.0);
        for _ in 0..200 {
            let (t, s, th) = accel_schedule_next(sch.tau, lambda);
            let next = sch.advance();
            prop_assert!((t * s - lambda).abs() <= 1e-12 * lambda);
            prop_assert!((next.tau - t).abs() <= 1e-15 && (next.theta - th).abs() <= 1e-15);
            prop_assert!((next.sigma_sum_prev - sch.sigma_sum).abs() <= 1e-12 * sch.sigma_sum);
            sum += next.sigma;
            prop_assert!((next.sigma_sum - sum).abs() <= 1e-10 * sum);
            sch = next;
        }
    }

    #[test]
    fn trace_csv_round_trips(seed in any::<u64>(), m in 1usize..=8, n in 1usize..=8, iters in 0usize..40) {
        let mut r = common::rng(seed);
        let p = ConstrainedProblem::new(gaussian_map(m, n, &mut r), gaussian_vector(m, &mut r), random_g(GKind::L1, n, &mut r))
            .unwrap();
        let ss = StepSizes::default_for(Variant::Primal, p.a.norm().value, 0.0).unwrap();
        let opts = RunOptions { max_iters: iters, ..RunOptions::default() };
        let t = run(Variant::Primal, &p, &ss, &vec![0.0; n], &opts).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = read_records(BufReader::new(&buf[..])).unwrap();
        prop_assert_eq!(back, t.records);
    }
}

#[test]
fn schedule_sandwich_from_unit_start() {
    let mut tau = 1.0;
    for k in 1..=1_000_000usize {
        tau = accel_schedule_next(tau, 0.5).0;
        let kf = k as f64;
        assert!(2.0 / (kf + 2.0) <= tau && tau <= 3.0 / (kf + 2.0), "k = {k}");
    }
}

#[test]
fn primal_run_recovers_canonical_solution() {
    let p = canonical();
    let ss = StepSizes::from_lambda(0.1).unwrap();
    let opts = RunOptions { max_iters: 10_000, record_every: 100, ..RunOptions::default() };
    let t = run(Variant::Primal, &p, &ss, &[0.0], &opts).unwrap();
    assert!((t.s[0] - 1.0).abs() <= 1e-3, "s = {}", t.s[0]);
}

#[test]
fn zero_iterations_give_the_initial_record() {
    let t = run(Variant::Pdhg, &canonical(), &StepSizes::from_lambda(0.1).unwrap(), &[0.0], &RunOptions {
        max_iters: 0,
        ..RunOptions::default()
    })
    .unwrap();
    assert_eq!(t.records.len(), 1);
    assert_eq!(t.records[0].k, 0);
    assert_eq!(t.records[0].f_x, 2.0);
}

#[test]
fn primal_and_pdhg_runs_record_the_same_x() {
    let mut r = common::rng(31);
    let p = ConstrainedProblem::new(gaussian_map(12, 18, &mut r), gaussian_vector(12, &mut r), random_g(GKind::Box, 18, &mut r))
        .unwrap();
    let ss = StepSizes::default_for(Variant::Primal, p.a.norm().value, 0.0).unwrap();
    let opts = RunOptions { max_iters: 300, snapshots: true, ..RunOptions::default() };
    let a = run(Variant::Primal, &p, &ss, &[0.0; 18], &opts).unwrap();
    let b = run(Variant::Pdhg, &p, &ss, &[0.0; 18], &opts).unwrap();
    assert_eq!(a.snapshots.len(), b.snapshots.len());
    for (u, v) in a.snapshots.iter().zip(&b.snapshots) {
        let d = u.x.iter().zip(&v.x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(d <= 1e-9, "k = {}: {d:e}", u.k);
        let ds = u.s.iter().zip(&v.s).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(ds <= 1e-9, "k = {}: {ds:e}", u.k);
    }
}

#[test]
fn rejection_names_the_violated_inequality() {
    let p = canonical();
    let cases = [
        (Variant::Primal, StepSizes::from_lambda(0.25).unwrap(), "lambda*|A|^2 < 1"),
        (Variant::Gram, StepSizes::from_lambda(0.9 / 4.0).unwrap(), "tau*sigma*|A|^4 < 1"),
        (Variant::Accel, StepSizes::new(1.0, 0.3).unwrap(), "lambda*|A|^2 <= 1"),
    ];
    for (v, ss, cond) in cases {
        match run(v, &p, &ss, &[0.0], &RunOptions::default()) {
            Err(e @ Error::StepSize { condition, .. }) => {
                assert_eq!(condition, cond);
                assert!(e.is_rejection());
            }
            other => panic!("{v}: expected rejection, got {other:?}"),
        }
    }
    assert!(matches!(
        run(Variant::Smooth, &p, &StepSizes::from_lambda(0.1).unwrap(), &[0.0], &RunOptions::default()),
        Err(Error::Configuration(_))
    ));
}
