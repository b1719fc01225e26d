use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use pdhg_core::diagnostics::{audit_theorem1, audit_theorem2, write_audit, Certificates, Slack};
use pdhg_core::distributed::{laplacian, run_consensus, run_consensus_pdhg_baseline, ConsensusOptions, ConsensusTrace};
use pdhg_core::operators::{DEFAULT_NORM_MAX_ITERS, DEFAULT_NORM_TOL};
use pdhg_core::solvers::{read_records, DEFAULT_SAFETY};
use pdhg_core::{io, oracle, run, RunOptions, StepSizes, Trace, Variant};
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::manifest::{load_consensus, load_problem};
use crate::{AuditArgs, ConsensusArgs, ConsensusVariant, OracleArgs, OracleMode, SolveArgs, Theorem};

pub const CONSENSUS_HEADER: &str = "k,gap_x,gap_s,objective_s,comm_count";

/// Path of the run metadata written next to a trace.
pub fn meta_path(trace: &Path) -> PathBuf {
    let mut name = trace.as_os_str().to_os_string();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io {
        file: path.to_path_buf(),
        source,
    })
}

fn flush(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|source| CliError::Io {
        file: path.to_path_buf(),
        source,
    })
}

/// Resolves τ and σ from any combination of --tau, --sigma and --lambda;
/// missing values come from the variant's default λ.
pub fn resolve_stepsizes(
    variant: Variant,
    tau: Option<f64>,
    sigma: Option<f64>,
    lambda: Option<f64>,
    norm: f64,
    beta: f64,
) -> Result<StepSizes> {
    let default = || StepSizes::default_for(variant, norm, beta);
    let ss = match (tau, sigma, lambda) {
        (None, None, None) => default()?,
        (None, None, Some(l)) => StepSizes::from_lambda(l)?,
        (Some(t), Some(s), None) => StepSizes::new(t, s)?,
        (Some(t), None, Some(l)) => StepSizes::new(t, l / t)?,
        (None, Some(s), Some(l)) => StepSizes::new(l / s, s)?,
        (Some(t), None, None) => StepSizes::new(t, default()?.lambda() / t)?,
        (None, Some(s), None) => StepSizes::new(default()?.lambda() / s, s)?,
        (Some(t), Some(s), Some(l)) => {
            if (t * s - l).abs() > 1e-12 * l.abs().max(f64::MIN_POSITIVE) {
                return Err(CliError::Usage(format!("--tau {t} --sigma {s} disagrees with --lambda {l}")));
            }
            StepSizes::new(t, s)?
        }
    };
    Ok(ss)
}

pub fn solve(args: &SolveArgs) -> Result<String> {
    let p = load_problem(&args.manifest)?;
    let variant: Variant = args.variant.parse()?;
    let norm = match args.seed {
        Some(seed) => p.a.operator_norm_estimate(DEFAULT_NORM_TOL, DEFAULT_NORM_MAX_ITERS, seed).value,
        None => p.a.norm().value,
    };
    let beta = if variant.uses_smooth_term() { p.beta() } else { 0.0 };
    let ss = resolve_stepsizes(variant, args.tau, args.sigma, args.lambda, norm, beta)?;
    let x0 = match &args.x0 {
        Some(path) => io::read_vector(path)?,
        None => vec![0.0; p.dim()],
    };
    let opts = RunOptions {
        max_iters: args.max_iters,
        record_every: args.record_every,
        snapshots: false,
        norm: Some(norm),
    };
    let trace = run(variant, &p, &ss, &x0, &opts)?;

    let mut w = create(&args.out)?;
    trace.write_csv(&mut w)?;
    flush(w, &args.out)?;

    let meta = json!({
        "variant": variant.name(),
        "tau": ss.tau,
        "sigma": ss.sigma,
        "f_star": trace.f_star,
        "x0": x0,
    });
    let meta_file = meta_path(&args.out);
    fs::write(&meta_file, meta.to_string()).map_err(|source| CliError::Io { file: meta_file, source })?;

    if let Some(path) = &args.solution {
        let mut w = create(path)?;
        io::write_vector(&trace.s, &mut w)?;
        flush(w, path)?;
    }
    let last = trace.last().expect("a trace has at least the initial record");
    Ok(format!(
        "{variant}: k = {}, tau = {:.6e}, sigma = {:.6e}, f(s) = {:.6e}, g(s) = {:.6e}, |As - b| = {:.6e}",
        last.k, ss.tau, ss.sigma, last.f_s, last.g_s, last.residual_s
    ))
}

struct Meta {
    variant: Variant,
    steps: StepSizes,
    f_star: f64,
    x0: Vec<f64>,
}

fn read_meta(trace: &Path) -> Result<Meta> {
    let file = meta_path(trace);
    let text = fs::read_to_string(&file).map_err(|source| CliError::Io {
        file: file.clone(),
        source,
    })?;
    let v: Value = serde_json::from_str(&text).map_err(|source| CliError::Json {
        file: file.clone(),
        source,
    })?;
    let bad = |field: &str| CliError::Manifest {
        file: file.clone(),
        field: field.to_string(),
        message: "missing or malformed".into(),
    };
    let num = |field: &str| v.get(field).and_then(Value::as_f64).ok_or_else(|| bad(field));
    let variant = v.get("variant").and_then(Value::as_str).ok_or_else(|| bad("variant"))?.parse()?;
    let x0 = v
        .get("x0")
        .and_then(Value::as_array)
        .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
        .ok_or_else(|| bad("x0"))?;
    Ok(Meta {
        variant,
        steps: StepSizes::new(num("tau")?, num("sigma")?)?,
        f_star: num("f_star")?,
        x0,
    })
}

pub fn audit(args: &AuditArgs) -> Result<String> {
    let meta = read_meta(&args.trace)?;
    let file = File::open(&args.trace).map_err(|source| CliError::Io {
        file: args.trace.clone(),
        source,
    })?;
    let records = read_records(BufReader::new(file))?;
    let p = load_problem(&args.manifest)?;
    if meta.x0.len() != p.dim() {
        return Err(CliError::Usage(format!(
            "trace was produced for dimension {}, manifest has {}",
            meta.x0.len(),
            p.dim()
        )));
    }
    let dual = oracle::certify_quadratic(&p)?;
    let cert = Certificates::from_dual(&dual, &meta.x0, meta.f_star)?;
    let trace = Trace {
        variant: meta.variant,
        steps: meta.steps,
        f_star: meta.f_star,
        records,
        snapshots: Vec::new(),
        x: Vec::new(),
        s: Vec::new(),
    };
    let rows = match args.theorem {
        Theorem::One => audit_theorem1(&trace, &cert, Slack::default())?,
        Theorem::Two => audit_theorem2(&trace, &cert, p.gamma(), None, Slack::default())?,
    };
    let mut w = create(&args.out)?;
    write_audit(&rows, &mut w)?;
    flush(w, &args.out)?;
    let violated = rows.iter().filter(|r| !r.satisfied).count();
    Ok(format!(
        "{} inequalities checked, {violated} violated (D_x = {:.6e}, D_y = {:.6e}, g_* = {:.6e})",
        rows.len(),
        cert.d_x,
        cert.d_y,
        cert.g_star
    ))
}

fn write_consensus(t: &ConsensusTrace, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io_err = |source| CliError::Io {
        file: path.to_path_buf(),
        source,
    };
    writeln!(w, "{CONSENSUS_HEADER}").map_err(io_err)?;
    for r in &t.records {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e},{}",
            r.k, r.gap_x, r.gap_s, r.objective_s, r.comm_count
        )
        .map_err(io_err)?;
    }
    flush(w, path)
}

pub fn consensus(args: &ConsensusArgs) -> Result<String> {
    let cp = load_consensus(&args.graph)?;
    let lnorm = laplacian(&cp.graph)?.norm().value;
    let default_lambda = match args.variant {
        ConsensusVariant::Primal => DEFAULT_SAFETY / lnorm,
        ConsensusVariant::Pdhg => DEFAULT_SAFETY / (lnorm * lnorm),
    };
    // a single node has L = 0 and no constraint to respect
    let lambda = args
        .lambda
        .unwrap_or(if default_lambda.is_finite() { default_lambda } else { 1.0 });
    let opts = ConsensusOptions {
        max_iters: args.max_iters,
        record_every: args.record_every,
        x0: None,
        gap_tol: args.gap_tol,
    };
    let t = match args.variant {
        ConsensusVariant::Primal => run_consensus(&cp, lambda, args.tau, &opts)?,
        ConsensusVariant::Pdhg => run_consensus_pdhg_baseline(&cp, lambda, args.tau, &opts)?,
    };
    write_consensus(&t, &args.out)?;
    let last = t.records.last().expect("the initial record is always kept");
    Ok(format!(
        "{} nodes: k = {}, communications = {}, gap = {:.6e}, |L| = {:.6e}",
        cp.graph.nodes(),
        last.k,
        t.comm_count,
        last.gap_x,
        t.laplacian_norm
    ))
}

pub fn oracle(args: &OracleArgs) -> Result<String> {
    let p = load_problem(&args.manifest)?;
    let (x, summary) = match args.mode {
        OracleMode::Lsq => {
            let ls = oracle::solve_least_squares(&p.a, &p.b, args.tol)?;
            let s = format!("f_* = {:.6e}, |A^T(Ax - b)| = {:.3e}", ls.fstar, ls.normal_residual);
            (ls.x, s)
        }
        OracleMode::Kkt => {
            let c = oracle::certify_quadratic(&p)?;
            let s = format!(
                "g_* = {:.6e}, D_y = {:.6e}, stationarity = {:.3e}, feasibility = {:.3e}",
                c.g_star, c.d_y, c.stationarity, c.feasibility
            );
            (c.x, s)
        }
        OracleMode::Penalized => {
            let rho = args
                .rho
                .ok_or_else(|| CliError::Usage("--mode penalized requires --rho".into()))?;
            let sol = oracle::solve_penalized(&p, rho, args.tol, None)?;
            let s = format!(
                "rho = {rho:e}: {} iterations, fixed-point residual {:.3e}, objective {:.6e}",
                sol.iterations,
                sol.residual,
                p.objective(&sol.x) + rho * p.f_value(&sol.x)
            );
            (sol.x, s)
        }
    };
    let mut w = create(&args.out)?;
    io::write_vector(&x, &mut w)?;
    flush(w, &args.out)?;
    Ok(summary)
}
