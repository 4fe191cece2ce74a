use std::fs;
use std::path::Path;

use gsadmm::harness::cli::run_cli;
use gsadmm::harness::Report;

struct Run {
    code: u8,
    out: String,
    err: String,
}

fn cli(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_cli(std::iter::once("gsadmm").chain(args.iter().copied()), &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_bundled_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let r = cli(&["run", "--bundled", "qp1", "--out", path(&out), "--export-matrices"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("converged"), "{}", r.out);
    for f in ["trace.csv", "report.json", "Q.csv", "M.csv", "G.csv", "H.csv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let report = Report::read(&out.join("report.json")).unwrap();
    assert_eq!(report.get_bool("identity.check_ok"), Some(true));
    assert!(report.get_f64("final.dist_H").unwrap() <= 1e-8);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("k,feasibility,"));

    let summary = cli(&["report", path(&out)]);
    assert_eq!(summary.code, 0, "{}", summary.out);
    assert!(summary.out.contains("trace rows ="));
}

#[test]
fn invalid_parameters_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let sigma = cli(&["run", "--sigma1", "-0.1", "--out", path(&out)]);
    assert_eq!(sigma.code, 1, "{}", sigma.err);
    let outside = cli(&["run", "--tau", "1.5", "--s", "0.3", "--out", path(&out)]);
    assert_eq!(outside.code, 1, "{}", outside.err);
    let singular = cli(&["check", "--tau", "0.5", "--s", "-0.5"]);
    assert_eq!(singular.code, 1);
    assert!(singular.out.contains("FAIL M.invertible"), "{}", singular.out);
    let unknown = cli(&["run", "--bundled", "nope", "--out", path(&out)]);
    assert_eq!(unknown.code, 1);
    assert!(!out.exists());
}

#[test]
fn golden_check_passes() {
    let r = cli(&["check", "--golden"]);
    assert_eq!(r.code, 0, "{}", r.out);
    for item in ["golden.Q_tilde", "golden.M", "golden.G", "golden.H", "G.positive_definite"] {
        assert!(r.out.contains(&format!("PASS {item}")), "{item}: {}", r.out);
    }
    assert!(!r.out.contains("FAIL"));
}

#[test]
fn corrupted_document_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("qp.json");
    assert_eq!(cli(&["gen", "quadratic", "--seed", "4", "--out", path(&file)]).code, 0);
    let text = fs::read_to_string(&file).unwrap();
    fs::write(&file, &text[..text.len() / 2]).unwrap();
    let r = cli(&["check", "--instance", path(&file)]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("error"), "{}", r.err);
}

#[test]
fn gen_round_trip_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = ["--p", "2", "--q", "2", "--dims", "2", "--n", "3", "--seed", "7"];
    let mut first = vec!["gen", "quadratic", "--out", path(&a)];
    first.extend(args);
    assert_eq!(cli(&first).code, 0);
    let mut second = vec!["gen", "quadratic", "--out", path(&b)];
    second.extend(args);
    assert_eq!(cli(&second).code, 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let doc = gsadmm::harness::Instance::read(&a).unwrap();
    assert_eq!(doc.to_json().as_bytes(), fs::read(&a).unwrap().as_slice());
    assert_eq!(cli(&["check", "--instance", path(&a)]).code, 0);
}

#[test]
fn gen_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let big = cli(&["gen", "l1", "--dims", "9", "--n", "9", "--out", path(&dir.path().join("l1.json"))]);
    assert_eq!(big.code, 3, "{}", big.err);
    let boxed = dir.path().join("box.json");
    let ok = cli(&["gen", "boxqp", "--seed", "11", "--out", path(&boxed)]);
    assert_eq!(ok.code, 0, "{}", ok.err);
    let check = cli(&["check", "--instance", path(&boxed)]);
    assert_eq!(check.code, 0, "{}", check.out);
    assert!(check.out.contains("PASS reference.kkt_residual"));
}

#[test]
fn sweep_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let grid = ["--tau-min", "0", "--tau-max", "1", "--tau-count", "3", "--s-min", "-0.5", "--s-max", "1", "--s-count", "4"];
    for out in [&a, &b] {
        let mut args = vec!["sweep", "--bundled", "quadratic-1", "--out", path(out)];
        args.extend(grid);
        assert_eq!(cli(&args).code, 0);
    }
    let atlas = fs::read_to_string(a.join("atlas.csv")).unwrap();
    assert_eq!(atlas.as_bytes(), fs::read(b.join("atlas.csv")).unwrap().as_slice());

    let lines: Vec<&str> = atlas.lines().collect();
    assert_eq!(lines.len(), 1 + 12);
    assert!(lines[0].starts_with("tau,s,in_G,in_D,"));
    let corner = lines.iter().find(|l| l.starts_with("1.0,1.0,")).expect("row for (1, 1)");
    let fields: Vec<&str> = corner.split(',').collect();
    assert_eq!(&fields[2..4], &["false", "false"]);
    assert_eq!(fields[7], "-1");
    assert_eq!(fields[9], "not-run: outside G");
    let inside = lines.iter().find(|l| l.starts_with("0.5,0.0,")).expect("row for (0.5, 0)");
    let fields: Vec<&str> = inside.split(',').collect();
    assert_eq!(&fields[2..4], &["true", "true"]);
    assert!(fields[7].parse::<i64>().unwrap() > 0);
    assert_eq!(fields[9], "ok");
}

#[test]
fn catalog_report_passes() {
    let r = cli(&["report", "--catalog", "--max-iters", "3000"]);
    assert_eq!(r.code, 0, "{}", r.out);
    assert_eq!(r.out.lines().filter(|l| l.starts_with("PASS")).count(), 12);
}
