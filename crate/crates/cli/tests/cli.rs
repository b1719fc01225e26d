use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pdhg_cli::{parse_manifest, Manifest};
use pdhg_core::solvers::read_records;
use pdhg_core::ProxFunction;

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

fn pdhg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdhg")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn minimal_manifest_is_the_canonical_problem() {
    let Manifest::Constrained(p) = parse_manifest(&fixture("canonical/manifest.json")).unwrap() else {
        panic!("expected a constrained problem");
    };
    assert_eq!((p.rows(), p.dim()), (1, 1));
    assert_eq!(p.a.to_dense(), vec![2.0]);
    assert_eq!(p.b, vec![2.0]);
    assert!(matches!(&p.g, ProxFunction::Quadratic { rho, center } if *rho == 1.0 && center == &vec![0.0]));
    assert!(p.h.is_none());
}

#[test]
fn missing_b_is_named() {
    let err = parse_manifest(&fixture("missing_b/manifest.json")).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("field 'b'"), "{msg}");
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn unknown_family_is_named_with_its_path() {
    let msg = parse_manifest(&fixture("bad_family/manifest.json")).unwrap_err().to_string();
    assert!(msg.contains("field 'g.family'") && msg.contains("huber"), "{msg}");
}

#[test]
fn p5_consensus_manifest_has_five_nodes() {
    let Manifest::Consensus(cp) = parse_manifest(&fixture("p5/manifest.json")).unwrap() else {
        panic!("expected a consensus problem");
    };
    assert_eq!(cp.graph.nodes(), 5);
    assert_eq!(cp.graph.dim(), 1);
    assert_eq!(cp.graph.edges().len(), 4);
    assert_eq!(cp.local.len(), 5);
}

#[test]
fn separable_manifest_with_sparse_matrix_and_smooth_term() {
    let Manifest::Constrained(p) = parse_manifest(&fixture("sparse/manifest.json")).unwrap() else {
        panic!("expected a constrained problem");
    };
    assert_eq!((p.rows(), p.dim()), (3, 4));
    assert_eq!(p.beta(), 0.5);
    assert_eq!(p.gamma(), 1.0);
}

#[test]
fn solve_then_audit_theorem_one() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let audit = dir.path().join("audit.csv");
    let manifest = fixture("canonical/manifest.json");
    let out = pdhg(&[
        "solve",
        "--manifest",
        path_str(&manifest),
        "--variant",
        "primal",
        "--max-iters",
        "10000",
        "--out",
        path_str(&trace),
    ]);
    assert_success(&out);
    let records = read_records(BufReader::new(fs::File::open(&trace).unwrap())).unwrap();
    let last = records.last().unwrap();
    assert_eq!(last.k, 10_000);
    assert!(last.residual_s <= 2e-3, "residual {}", last.residual_s);

    let out = pdhg(&[
        "audit",
        "--trace",
        path_str(&trace),
        "--manifest",
        path_str(&manifest),
        "--theorem",
        "1",
        "--out",
        path_str(&audit),
    ]);
    assert_success(&out);
    let text = fs::read_to_string(&audit).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,check,measured,bound,satisfied"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5 * 10_000);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn accelerated_solve_passes_theorem_two_audit() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("accel.csv");
    let audit = dir.path().join("audit.csv");
    let manifest = fixture("canonical/manifest.json");
    assert_success(&pdhg(&[
        "solve",
        "--manifest",
        path_str(&manifest),
        "--variant",
        "accel",
        "--max-iters",
        "2000",
        "--out",
        path_str(&trace),
    ]));
    assert_success(&pdhg(&[
        "audit",
        "--trace",
        path_str(&trace),
        "--manifest",
        path_str(&manifest),
        "--theorem",
        "2",
        "--out",
        path_str(&audit),
    ]));
    let text = fs::read_to_string(&audit).unwrap();
    assert!(text.lines().skip(1).all(|r| r.ends_with(",true")));
}

#[test]
fn oversized_lambda_is_rejected_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = pdhg(&[
        "solve",
        "--manifest",
        path_str(&fixture("canonical/manifest.json")),
        "--variant",
        "primal",
        "--lambda",
        "10",
        "--out",
        path_str(&trace),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lambda*|A|^2 < 1"), "{err}");
    assert!(!trace.exists());
}

#[test]
fn missing_file_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = pdhg(&[
        "solve",
        "--manifest",
        path_str(&dir.path().join("absent.json")),
        "--out",
        path_str(&dir.path().join("t.csv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn consensus_command_counts_communications() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture("p5/manifest.json");
    for (variant, per_iter) in [("primal", 1), ("pdhg", 2)] {
        let csv = dir.path().join(format!("{variant}.csv"));
        assert_success(&pdhg(&[
            "consensus",
            "--graph",
            path_str(&manifest),
            "--variant",
            variant,
            "--max-iters",
            "3000",
            "--out",
            path_str(&csv),
        ]));
        let text = fs::read_to_string(&csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("k,gap_x,gap_s,objective_s,comm_count"));
        let last: Vec<&str> = lines.last().unwrap().split(',').collect();
        let k: usize = last[0].parse().unwrap();
        let gap: f64 = last[1].parse().unwrap();
        let comms: usize = last[4].parse().unwrap();
        assert_eq!(k, 3000);
        assert_eq!(comms, per_iter * k);
        assert!(gap < 1e-3, "{variant}: gap {gap}");
    }
}

#[test]
fn oracle_modes_write_solutions() {
    let dir = tempfile::tempdir().unwrap();
    let read = |p: &Path| -> Vec<f64> { fs::read_to_string(p).unwrap().lines().map(|l| l.parse().unwrap()).collect() };

    let kkt = dir.path().join("kkt.txt");
    assert_success(&pdhg(&[
        "oracle",
        "--manifest",
        path_str(&fixture("canonical/manifest.json")),
        "--mode",
        "kkt",
        "--out",
        path_str(&kkt),
    ]));
    assert!((read(&kkt)[0] - 1.0).abs() < 1e-12);

    let sparse = fixture("sparse/manifest.json");
    let lsq = dir.path().join("lsq.txt");
    assert_success(&pdhg(&["oracle", "--manifest", path_str(&sparse), "--mode", "lsq", "--out", path_str(&lsq)]));
    assert_eq!(read(&lsq).len(), 4);

    let pen = dir.path().join("pen.txt");
    assert_success(&pdhg(&[
        "oracle",
        "--manifest",
        path_str(&sparse),
        "--mode",
        "penalized",
        "--rho",
        "100",
        "--out",
        path_str(&pen),
    ]));
    assert_eq!(read(&pen).len(), 4);

    let out = pdhg(&["oracle", "--manifest", path_str(&sparse), "--mode", "penalized", "--out", path_str(&pen)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn smooth_variant_runs_from_a_given_start() {
    let dir = tempfile::tempdir().unwrap();
    let x0 = dir.path().join("x0.txt");
    fs::write(&x0, "0.1\n0.2\n0.3\n0.4\n").unwrap();
    let trace = dir.path().join("smooth.csv");
    let sol = dir.path().join("s.txt");
    let out = pdhg(&[
        "solve",
        "--manifest",
        path_str(&fixture("sparse/manifest.json")),
        "--variant",
        "smooth",
        "--max-iters",
        "5000",
        "--record-every",
        "100",
        "--x0",
        path_str(&x0),
        "--seed",
        "7",
        "--out",
        path_str(&trace),
        "--solution",
        path_str(&sol),
    ]);
    assert_success(&out);
    let records = read_records(BufReader::new(fs::File::open(&trace).unwrap())).unwrap();
    assert_eq!(records.len(), 51);
    assert!(records.last().unwrap().residual_s < 1e-2);
    assert_eq!(fs::read_to_string(&sol).unwrap().lines().count(), 4);
}

#[test]
fn trace_csv_uses_seventeen_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    assert_success(&pdhg(&[
        "solve",
        "--manifest",
        path_str(&fixture("canonical/manifest.json")),
        "--max-iters",
        "3",
        "--out",
        path_str(&trace),
    ]));
    let text = fs::read_to_string(&trace).unwrap();
    let row = text.lines().nth(1).unwrap();
    let field = row.split(',').nth(1).unwrap();
    let mantissa = field.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{field}");
}
