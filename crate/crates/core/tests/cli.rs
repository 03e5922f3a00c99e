use std::fs;
use std::path::{Path, PathBuf};

use markovdyn::chain_spec::REFERENCE_SPEC;
use markovdyn::cli::run;
use tempfile::TempDir;

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn markovdyn(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("markovdyn").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn write_spec(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn value<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
        .unwrap_or_else(|| panic!("no key {key} in\n{report}"))
}

#[test]
fn analyze_reference() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "ref.chain", REFERENCE_SPEC);
    let o = markovdyn(&["analyze", s(&spec)]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert_eq!(value(&o.out, "lambda_1"), "1");
    assert_eq!(value(&o.out, "lambda_2"), "0.7");
    assert_eq!(
        value(&o.out, "stationary"),
        "0.333333333333, 0.666666666667"
    );
    assert_eq!(value(&o.out, "steady_state.r"), "3, 6");
    assert_eq!(value(&o.out, "steps_to_tol.r"), "15");
    assert_eq!(value(&o.out, "rate.r"), "0.7");
    assert_eq!(value(&o.out, "v_1"), "0.4472135955, 0.894427191");
    assert_eq!(value(&o.out, "tol"), "0.02");
    let o = markovdyn(&["analyze", s(&spec), "--tol", "0.5"]);
    assert_eq!(value(&o.out, "tol"), "0.5");
}

#[test]
fn analyze_report_is_stable() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "small.chain",
        "matrix 2 2\n0.8 0.1\n0.2 0.9\ninitial r 7 2\n",
    );
    let o = markovdyn(&["analyze", s(&spec)]);
    assert_eq!(o.code, 0);
    let golden = "\
dim = 2
matrix_row_0 = 0.8, 0.1
matrix_row_1 = 0.2, 0.9
lambda_1 = 1
lambda_2 = 0.7
v_1 = 0.4472135955, 0.894427191
v_2 = 0.707106781187, -0.707106781187
stationary = 0.333333333333, 0.666666666667
tol = 0.02
initial.r = 7, 2
coeffs.r = 6.7082039325, 5.65685424949
steady_state.r = 3, 6
rate.r = 0.7
steps_to_tol.r = 15
";
    assert_eq!(o.out, golden);
}

#[test]
fn analyze_input_errors() {
    let o = markovdyn(&["analyze", "/nonexistent/spec.chain"]);
    assert_eq!(o.code, 2);
    assert!(o.err.contains("cannot read"));

    let dir = TempDir::new().unwrap();
    let bad = write_spec(&dir, "bad.chain", "matrix 2 2\n0.8 0.1\n0.3\n");
    let o = markovdyn(&["analyze", s(&bad)]);
    assert_eq!(o.code, 2);
    assert!(o.err.contains("line 3"), "{}", o.err);

    let sum = write_spec(&dir, "sum.chain", "matrix 2 2\n0.9 0.1\n0.2 0.9\n");
    let o = markovdyn(&["analyze", s(&sum)]);
    assert_eq!(o.code, 3);
    assert!(o.err.contains("column 0"), "{}", o.err);

    let neg = write_spec(&dir, "neg.chain", "matrix 2 2\n1.5 0.1\n-0.5 0.9\n");
    let o = markovdyn(&["analyze", s(&neg)]);
    assert_eq!(o.code, 3);
    assert!(o.err.contains("line 3"), "{}", o.err);
}

#[test]
fn analyze_reports_spectral_failures_inline() {
    let dir = TempDir::new().unwrap();
    let cyc = write_spec(&dir, "cycle.chain", "matrix 3 3\n0 0 1\n1 0 0\n0 1 0\n");
    let o = markovdyn(&["analyze", s(&cyc)]);
    assert_eq!(o.code, 3);
    assert!(value(&o.out, "spectrum").starts_with("error: eigenpair 1"));
    assert!(o.err.contains("eigenpair 1"));

    let swap = write_spec(&dir, "swap.chain", "matrix 2 2\n0 1\n1 0\ninitial a 1 0\n");
    let o = markovdyn(&["analyze", s(&swap)]);
    assert_eq!(o.code, 3);
    assert_eq!(value(&o.out, "lambda_2"), "-1");
    assert!(value(&o.out, "stationary").starts_with("error: periodic"));
}

#[test]
fn simulate_reference() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "ref.chain", REFERENCE_SPEC);
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    assert_eq!(
        markovdyn(&["simulate", s(&spec), "--output", s(&out1)]).code,
        0
    );
    assert_eq!(markovdyn(&["simulate", s(&spec), "-o", s(&out2)]).code, 0);
    let csv = fs::read_to_string(&out1).unwrap();
    assert_eq!(csv, fs::read_to_string(&out2).unwrap());
    assert!(csv.starts_with("k,name,dim0,dim1\n0,p,2,4\n0,q,-6,6\n"));
    assert_eq!(csv.lines().count(), 1 + 16 * 6);
    let q15: Vec<f64> = csv
        .lines()
        .find(|l| l.starts_with("15,q,"))
        .unwrap()
        .split(',')
        .skip(2)
        .map(|x| x.parse().unwrap())
        .collect();
    assert!((q15[0] + 0.0285).abs() <= 5e-5 && (q15[1] - 0.0285).abs() <= 5e-5);
    assert!(csv.contains("\n0,rand_1,") && csv.contains("\n0,rand_2,"));

    let zero = dir.path().join("zero.csv");
    assert_eq!(
        markovdyn(&["simulate", s(&spec), "--steps", "0", "-o", s(&zero)]).code,
        0
    );
    let csv = fs::read_to_string(&zero).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6);
    assert!(csv.lines().skip(1).all(|l| l.starts_with("0,")));
}

#[test]
fn simulate_write_failure_leaves_nothing() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "ref.chain", REFERENCE_SPEC);
    let target = dir.path().join("no_such_dir").join("out.csv");
    let o = markovdyn(&["simulate", s(&spec), "-o", s(&target)]);
    assert_eq!(o.code, 4);
    assert!(!target.exists());
}

#[test]
fn failed_run_does_not_touch_existing_output() {
    let dir = TempDir::new().unwrap();
    let bad = write_spec(&dir, "bad.chain", "matrix 2 2\n0.9 0.1\n0.2 0.9\n");
    let target = dir.path().join("keep.csv");
    fs::write(&target, "old").unwrap();
    assert_eq!(markovdyn(&["simulate", s(&bad), "-o", s(&target)]).code, 3);
    assert_eq!(fs::read_to_string(&target).unwrap(), "old");
}

#[test]
fn plot_counts() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "ref.chain", REFERENCE_SPEC);
    let out = dir.path().join("fig.svg");
    assert_eq!(markovdyn(&["plot", s(&spec), "--output", s(&out)]).code, 0);
    let svg = fs::read_to_string(&out).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 6);
    assert_eq!(svg.matches(r#"class="eigenline""#).count(), 2);

    let four = write_spec(
        &dir,
        "four.chain",
        &REFERENCE_SPEC.replace("random 2\n", ""),
    );
    assert_eq!(markovdyn(&["plot", s(&four), "-o", s(&out)]).code, 0);
    let svg = fs::read_to_string(&out).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 4);

    let three = write_spec(
        &dir,
        "three.chain",
        "matrix 3 3\n0.5 0.25 0.25\n0.25 0.5 0.25\n0.25 0.25 0.5\ninitial a 1 2 3\n",
    );
    let target = dir.path().join("three.svg");
    let o = markovdyn(&["plot", s(&three), "-o", s(&target)]);
    assert_eq!(o.code, 5);
    assert!(!target.exists());
}

#[test]
fn sample_reference() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "ref.chain", REFERENCE_SPEC);
    let o = markovdyn(&["sample", s(&spec)]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert_eq!(value(&o.out, "burn_in"), "1000");
    let d: f64 = value(&o.out, "max_distance").parse().unwrap();
    assert!(d <= 0.02);

    let o = markovdyn(&[
        "sample",
        s(&spec),
        "--walks",
        "5",
        "--seed",
        "40",
        "--steps",
        "2000",
    ]);
    assert_eq!(o.code, 0);
    assert_eq!(
        o.out
            .lines()
            .filter(|l| l.starts_with("empirical."))
            .count(),
        5
    );
    let seeds: Vec<&str> = (0..5)
        .map(|w| value(&o.out, &format!("seed.{w}")))
        .collect();
    assert_eq!(seeds, ["40", "41", "42", "43", "44"]);
    let rows: Vec<&str> = (0..5)
        .map(|w| value(&o.out, &format!("empirical.{w}")))
        .collect();
    assert!(rows.windows(2).any(|w| w[0] != w[1]));
}

#[test]
fn sample_periodic_chain() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "swap.chain", "matrix 2 2\n0 1\n1 0\n");
    let o = markovdyn(&["sample", s(&spec), "--walks", "2", "--steps", "100"]);
    assert_eq!(o.code, 3);
    assert_eq!(value(&o.out, "empirical.0"), "0.5, 0.5");
    assert!(value(&o.out, "empirical.1").contains(", "));
    assert!(value(&o.out, "stationary").starts_with("error: periodic"));
}
