use std::path::Path;

use mqgroupoid::cli::run;
use mqgroupoid::examples::e1_desc;
use mqgroupoid::report::Report;

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("mqg").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn malformed_json_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.json", "{\"units\": [\"e\"], \"morphisms\": ");
    for cmd in ["validate", "verify"] {
        let (code, out, err) = call(&[cmd, &p]);
        assert_eq!(code, 2, "{cmd}");
        assert!(out.is_empty());
        assert!(err.contains("bad.json"), "{err}");
    }
    assert_eq!(call(&["verify", dir.path().join("absent.json").to_str().unwrap()]).0, 2);
}

#[test]
fn unknown_identifier_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut d = e1_desc();
    d.g1.push("nowhere".into());
    let p = write(dir.path(), "unknown.json", &serde_json::to_string(&d).unwrap());
    let (code, out, _) = call(&["validate", &p]);
    assert_ne!(code, 0);
    assert!(out.contains("nowhere"), "{out}");
}

#[test]
fn broken_factorization_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let mut d = e1_desc();
    // G1 = {e, (12)} and G2 = {e} no longer cover S₃
    d.g2.truncate(1);
    d.haar2 = [(d.groupoid.units[0].clone(), [(d.g2[0].clone(), mqgroupoid::weight::Weight::Num(1.0))].into())].into();
    let p = write(dir.path(), "broken.json", &serde_json::to_string_pretty(&d).unwrap());
    let (code, out, _) = call(&["verify", &p]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("[validate_matched_pair]") && out.contains("ERROR"), "{out}");
    assert!(out.trim_end().ends_with("verdict: FAIL"));
}

#[test]
fn example_then_verify_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e3.json");
    let p = p.to_str().unwrap();
    assert_eq!(call(&["example", "transformation", "--space", "3", "--nu", "1,2,5", "--out", p]).0, 0);
    let report_path = dir.path().join("report.json");
    let (code, out, _) = call(&["verify", p, "--format", "json", "--out", report_path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&report_path).unwrap();
    let rep: Report = serde_json::from_str(&text).unwrap();
    assert!(rep.pass());
    assert!(text.contains("\"anchor\""));
    assert!(rep.find("pmu.pentagon").is_some_and(|c| c.pass));
}

#[test]
fn check_selection_narrows_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("pair.json");
    let p = p.to_str().unwrap();
    assert_eq!(call(&["example", "product-pair", "--out", p]).0, 0);
    let (code, out, _) = call(&["verify", p, "--checks", "pentagon,coinv", "--times", "0.5"]);
    assert_eq!(code, 0, "{out}");
    let names: Vec<&str> =
        out.lines().filter(|l| l.starts_with("  PASS")).map(|l| l.split_whitespace().nth(1).unwrap()).collect();
    assert!(names.contains(&"pmu.pentagon"));
    assert!(names.iter().all(|n| *n == "pmu.pentagon" || n.starts_with("coinv.")), "{names:?}");
    assert_eq!(call(&["verify", p, "--checks", "no_such_check"]).0, 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(call(&[]).0, 2);
    assert_eq!(call(&["verify"]).0, 2);
    assert_eq!(call(&["example", "product-pair", "--x1", "0"]).0, 2);
    assert_eq!(call(&["example", "transformation", "--space", "4"]).0, 2);
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("verify"));
}
