use std::io::Write;
use std::process::{Command, Output, Stdio};

const EQQ: &str = "-2Re(z1) + |z2|^8 + |z2|^4|z3|^6";
const BLOOM: &str = "Re(z1) + (Re(z2) + |z3|^2)^2";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypersurf"))
        .args(args)
        .output()
        .unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_hypersurf"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn multitype_golden() {
    let o = run(&["multitype", "--expr", EQQ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "(1, 8, 12) [exact-commutator]");
}

#[test]
fn bloom_with_commutator() {
    let o = run(&["multitype", "--commutator", "--expr", BLOOM]);
    assert_eq!(stdout(&o).trim(), "search: (1,2,4); commutator: (1,2,inf)");
}

#[test]
fn garbage_is_an_input_error() {
    let o = run(&["multitype", "--expr", "z2 +* )"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("parse error"), "{}", stderr(&o));
    let o = run(&["parse", "/no/such/file"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["parse", "--expr", "|z2|^2", "-"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["parse"]);
    assert_eq!(o.status.code(), Some(2));
    // not real-valued
    let o = run(&["psd", "--expr", "z2^2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn normalize_golden() {
    let o = run(&["normalize", "--weight", "1,8,12", "--expr", EQQ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("K = [[4], [2, 3]]"), "{s}");
    assert!(s.contains("A = [1, 1]"), "{s}");
    assert!(s.contains("residual: 0"), "{s}");
    assert!(s.contains("verified"), "{s}");
}

#[test]
fn tube_keeps_half() {
    let o = run(&["normalize", "--expr", "-2Re(z1) + Re(z2)^2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("A = [1/2]"), "{}", stdout(&o));
}

#[test]
fn contradiction_exit_code() {
    let o = run(&["normalize", "--assert-psc", "--expr", "-2Re(z1) + 2Re(z2^2 zb3^3)"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("pseudoconvexity contradiction"));
    let o = run(&["psd", "--require-certificate", "--expr", "2Re(z2^2 zb3^3)"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("Refuted"));
}

#[test]
fn uncertified_exit_code() {
    // no samples, and no certificate exists
    let o = run(&[
        "--samples",
        "0",
        "psd",
        "--require-certificate",
        "--expr",
        "2Re(z2^2 zb3^3)",
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));
}

#[test]
fn psd_certificate() {
    let o = run(&["psd", "--require-certificate", "--expr", "|z2|^4 + |z2 z3|^2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("CertifiedPSD"));
}

#[test]
fn json_round_trip() {
    let o = run(&["--json", "parse", "--expr", EQQ]);
    let json = stdout(&o);
    let again = run_stdin(&["--json", "parse", "-"], &json);
    assert_eq!(stdout(&again), json);
    let a = run(&["multitype", "--expr", EQQ]);
    let b = run_stdin(&["multitype", "-"], &json);
    assert_eq!(stdout(&a), stdout(&b));
    // the polynomial embedded in a report feeds back too
    let report: serde_json::Value =
        serde_json::from_str(&stdout(&run(&["--json", "multitype", "--expr", BLOOM]))).unwrap();
    let model = report["witness"]["model_json"].to_string();
    let o = run_stdin(&["parse", "-"], &model);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = report["witness"]["model"].as_str().unwrap();
    assert_eq!(
        stdout(&o).trim(),
        stdout(&run(&["parse", "--n", "3", "--expr", text])).trim()
    );
}

#[test]
fn json_reports_parse() {
    for args in [
        vec!["--json", "psd", "--expr", "2Re(z2^2 zb3^3)"],
        vec!["--json", "normalize", "--expr", EQQ],
        vec![
            "--json",
            "boundary-system",
            "--first-block",
            "--expr",
            "-2Re(z1) + |z2 + z3^2|^4 + |z3|^8",
        ],
        vec!["--json", "enumerate", "--n", "3", "--m", "6"],
        vec!["--json", "examples", "--only", "sq"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert!(!v.is_null());
    }
}

#[test]
fn enumerate_lists_and_bounds() {
    let o = run(&["enumerate", "--n", "2", "--m", "4"]);
    assert_eq!(stdout(&o), "(1, 2)\n(1, 4)\n2 enumerated ≤ 2\n");
}

#[test]
fn examples_runner() {
    let o = run(&["examples"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 9);
    assert!(s.lines().all(|l| l.starts_with("PASS")), "{s}");
    let o = run(&["examples", "--only", "torsion"]);
    assert_eq!(stdout(&o).lines().count(), 1);
    assert!(stdout(&o).contains("torsion"));
    let o = run(&["examples", "--only", "counting", "--n", "3", "--m", "6"]);
    assert!(stdout(&o).contains("enumerated ≤ 36"), "{}", stdout(&o));
    let o = run(&["examples", "--only", "nothing"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn boundary_and_torsion() {
    let o = run(&["boundary-system", "--expr", BLOOM]);
    assert!(stdout(&o).starts_with("commutator: (1, 2, inf)"), "{}", stdout(&o));
    let t = "-2Re(z1) + |z2|^6 + |z2|^2|z3|^6 + |z2|^4|z3|^2|z4|^2 + |z2|^2|z3|^4|z4|^4 \
             + 1/5*Re(|z2|^2 z3^2 zb3^3 |z4|^2) + |z3|^8|z4|^2";
    let o = run(&["torsion", "--expr", t]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("torsion at z3"), "{}", stdout(&o));
}

#[test]
fn weight_arguments() {
    let o = run(&["normalize", "--weight", "1,8,inf", "--expr", EQQ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["normalize", "--weight", "1,8", "--expr", EQQ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["normalize", "--weight", "(1, 8, 12)", "--expr", EQQ]);
    assert_eq!(o.status.code(), Some(0));
}
