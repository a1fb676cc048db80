use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use markov_moment::io::ProblemFile;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_markov-moment"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn switches_file(values: &str) -> String {
    format!("schema_version = 1\nkind = \"switches\"\nvalues = [{values}]\n")
}

fn moments_file(values: &str) -> String {
    format!("schema_version = 1\nkind = \"moments\"\nvalues = [{values}]\n")
}

fn read(p: &str) -> ProblemFile {
    ProblemFile::read(&PathBuf::from(p)).unwrap()
}

#[test]
fn forward_examples() {
    let dir = tempfile::tempdir().unwrap();
    for (input, want) in [
        ("0.25, 0.75", vec![0.5, 0.5]),
        ("0.0, 1.0", vec![1.0, 1.0]),
        ("0.1, 0.3, 0.6, 0.9", vec![0.5, 0.53, 0.539, 0.5345]),
    ] {
        let inp = write(dir.path(), "u.toml", &switches_file(input));
        let out = path(dir.path(), "m.toml");
        let r = bin(&["forward", &inp, "-o", &out]);
        assert_eq!(
            r.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&r.stderr)
        );
        let got = read(&out).to_moments().unwrap();
        for (g, w) in got.values().iter().zip(&want) {
            assert!((g - w).abs() < 1e-15, "{input}: {g} vs {w}");
        }
        let diag = String::from_utf8(r.stderr).unwrap();
        assert!(diag.contains(&format!("K = {}", want.len())), "{diag}");
        assert!(diag.contains("X = "), "{diag}");
    }
}

#[test]
fn forward_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let unordered = write(dir.path(), "u.toml", &switches_file("0.5, 0.25"));
    let malformed = write(dir.path(), "bad.toml", "values = ");
    let wrong_kind = write(dir.path(), "m.toml", &moments_file("0.5, 0.5"));
    for f in [&unordered, &malformed, &wrong_kind] {
        let r = bin(&["forward", f]);
        assert_eq!(r.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&r.stderr).starts_with("error: "));
        assert!(r.stdout.is_empty());
    }
    assert_eq!(
        bin(&["forward", &path(dir.path(), "missing.toml")])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn invert_k2_to_stdout_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let inp = write(dir.path(), "m.toml", &moments_file("0.5, 0.5"));
    let r = bin(&["invert", &inp]);
    assert_eq!(r.status.code(), Some(0));
    let u = ProblemFile::parse(&String::from_utf8(r.stdout).unwrap())
        .unwrap()
        .to_switches()
        .unwrap();
    assert_eq!(u.points(), &[0.25, 0.75]);
    let diag = String::from_utf8(r.stderr).unwrap();
    for key in [
        "residual_inf = ",
        "eig_imag_max = ",
        "min_gap = ",
        "status = ok",
    ] {
        assert!(diag.contains(key), "missing {key}: {diag}");
    }
}

#[test]
fn invert_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (moments_file("1.0, -1.0"), 3),
        (moments_file("0.5, 0.5, 0.5"), 2),
        (moments_file("0.0, 0.0"), 4),
        (switches_file("0.25, 0.75"), 2),
    ];
    for (i, (body, code)) in cases.iter().enumerate() {
        let inp = write(dir.path(), &format!("c{i}.toml"), body);
        let r = bin(&["invert", &inp]);
        assert_eq!(r.status.code(), Some(*code), "{body}");
        assert!(r.stdout.is_empty());
    }
    let ok = write(dir.path(), "ok.toml", &moments_file("0.5, 0.5"));
    assert_eq!(
        bin(&["invert", &ok, "--imag-tol", "-1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        bin(&["invert", &ok, "--precision", "quad"]).status.code(),
        Some(2)
    );
}

#[test]
fn forward_then_invert_is_identity_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let points = "0.05, 0.17, 0.31, 0.42, 0.58, 0.66, 0.81, 0.97";
    let inp = write(dir.path(), "u.toml", &switches_file(points));
    let m = path(dir.path(), "m.toml");
    assert_eq!(bin(&["forward", &inp, "-o", &m]).status.code(), Some(0));
    let mut outputs = Vec::new();
    for name in ["u1.toml", "u2.toml"] {
        let out = path(dir.path(), name);
        assert_eq!(bin(&["invert", &m, "-o", &out]).status.code(), Some(0));
        outputs.push(std::fs::read(&out).unwrap());
        let got = read(&out).to_switches().unwrap();
        let want = read(&inp).to_switches().unwrap();
        assert!(want.distance(&got).unwrap() < 1e-6);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn invert_with_rescale_far_from_unit_interval() {
    let dir = tempfile::tempdir().unwrap();
    let inp = write(
        dir.path(),
        "u.toml",
        &switches_file("10.0, 30.0, 60.0, 90.0"),
    );
    let m = path(dir.path(), "m.toml");
    assert_eq!(bin(&["forward", &inp, "-o", &m]).status.code(), Some(0));
    assert_eq!(read(&m).domain_scale, Some(90.0));
    for extra in [&["--rescale"][..], &[]] {
        let mut args = vec!["invert", m.as_str()];
        args.extend_from_slice(extra);
        let r = bin(&args);
        assert_eq!(r.status.code(), Some(0), "{extra:?}");
        let got = ProblemFile::parse(&String::from_utf8(r.stdout).unwrap())
            .unwrap()
            .to_switches()
            .unwrap();
        for (g, w) in got.points().iter().zip([10.0, 30.0, 60.0, 90.0]) {
            assert!((g - w).abs() < 1e-6 * w, "{extra:?}: {g} vs {w}");
        }
    }
}

#[test]
fn tolerances_in_file_are_honoured() {
    let dir = tempfile::tempdir().unwrap();
    // Moments of (-1e-12, 0.5): the first point is clamped to 0, leaving a
    // residual near 1e-12.
    let body = format!(
        "{}\n[tolerances]\nresidual_tol = 1e-300\n",
        moments_file("0.500000000001, 0.25")
    );
    let inp = write(dir.path(), "m.toml", &body);
    let r = bin(&["invert", &inp]);
    assert_eq!(r.status.code(), Some(0));
    let diag = String::from_utf8(r.stderr).unwrap();
    assert!(diag.contains("status = ill_conditioned_warning"), "{diag}");
    let r = bin(&["invert", &inp, "--residual-tol", "1"]);
    assert!(String::from_utf8(r.stderr).unwrap().contains("status = ok"));
}

fn csv_errors(out: &[u8]) -> Vec<f64> {
    String::from_utf8(out.to_vec())
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

fn worst(out: &[u8]) -> f64 {
    csv_errors(out).into_iter().fold(0.0, f64::max)
}

#[test]
fn roundtrip_examples() {
    let r = bin(&["roundtrip", "--n", "1", "--trials", "50", "--seed", "3"]);
    assert_eq!(r.status.code(), Some(0));
    assert!(worst(&r.stdout) <= 1e-10);

    let wide = bin(&["roundtrip", "--n", "4", "--trials", "100", "--gap", "0.05"]);
    assert_eq!(wide.status.code(), Some(0));
    assert!(worst(&wide.stdout) <= 1e-6);

    let tight = bin(&["roundtrip", "--n", "4", "--trials", "100", "--gap", "0.001"]);
    assert_eq!(tight.status.code(), Some(0));
    assert!(worst(&tight.stdout) >= 10.0 * worst(&wide.stdout));
}

#[test]
fn roundtrip_is_deterministic_per_seed() {
    let args = ["roundtrip", "--n", "3", "--trials", "20", "--seed", "9"];
    let (a, b) = (bin(&args), bin(&args));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
    let c = bin(&["roundtrip", "--n", "3", "--trials", "20", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn probe_examples() {
    let dir = tempfile::tempdir().unwrap();
    let wide = write(dir.path(), "w.toml", &switches_file("0.1, 0.3, 0.6, 0.9"));
    let r = bin(&["probe", &wide, "--eps", "0", "--trials", "1"]);
    assert_eq!(r.status.code(), Some(0));
    let diag = String::from_utf8(r.stderr).unwrap();
    let baseline: f64 = diag
        .lines()
        .find_map(|l| l.strip_prefix("baseline = "))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(csv_errors(&r.stdout), vec![baseline]);

    let r = bin(&["probe", &wide, "--eps", "1e-10", "--trials", "50"]);
    let text = String::from_utf8(r.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("trial,error,status"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",ok")));

    let clustered = write(
        dir.path(),
        "c.toml",
        &switches_file("0.5, 0.501, 0.502, 0.503"),
    );
    let r = bin(&["probe", &clustered, "--eps", "1e-4", "--trials", "50"]);
    assert_eq!(r.status.code(), Some(0));
    let diag = String::from_utf8(r.stderr).unwrap();
    assert!(!diag.contains("failures = 0"), "{diag}");

    assert_eq!(bin(&["probe", &wide, "--eps", "-1"]).status.code(), Some(2));
}

#[test]
fn selftest_passes_and_is_deterministic() {
    let (a, b) = (bin(&["selftest"]), bin(&["selftest"]));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    for name in [
        "newton_relations",
        "inverse_pair_identity",
        "fixture_k2",
        "fixture_k4",
    ] {
        assert!(text.contains(&format!("PASS {name}")), "{text}");
    }
}

#[test]
fn help_documents_defaults() {
    let r = bin(&["roundtrip", "--help"]);
    assert_eq!(r.status.code(), Some(0));
    let text = String::from_utf8(r.stdout).unwrap();
    for flag in [
        "--n",
        "--trials",
        "--gap",
        "--seed",
        "--output",
        "--imag-tol",
        "--rescale",
    ] {
        assert!(text.contains(flag), "{flag} missing");
    }
    assert!(text.contains("[default: 0.05]"));
}
