//! End-to-end tests of the binary: spec parsing, report envelopes, CSV
//! output, exit codes, and the manifest runner's fail-fast behaviour.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use approx::assert_abs_diff_eq;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_absnorm"))
}

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../manifests/specs")
        .join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("the binary launches")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("report is valid JSON")
}

fn stderr_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn profile_reports_the_extreme_norms() {
    let out = run(bin().arg("profile").arg(spec("norm-l1.json")));
    let v = stdout_json(&out);
    assert_eq!(v["tool"], "absnorm");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    let sha = v["inputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(sha.len(), 64);
    assert!(sha.chars().all(|c| c.is_ascii_hexdigit()));
    assert_eq!(v["parameters"]["resolution"], 4096);
    let body = &v["body"];
    assert_eq!(body["class"], "OneNorm");
    assert_abs_diff_eq!(body["profile"]["F11"].as_f64().unwrap(), 2.0);
    assert_abs_diff_eq!(body["profile"]["rF"].as_f64().unwrap(), 0.0);
    let po = body["profile"]["po_witness"].as_array().unwrap();
    assert_abs_diff_eq!(po[0].as_f64().unwrap(), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(po[1].as_f64().unwrap(), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(body["asq_obstruction"].as_f64().unwrap(), 0.125);

    let out = run(bin().arg("profile").arg(spec("norm-linf.json")));
    let v = stdout_json(&out);
    let body = &v["body"];
    assert_eq!(body["class"], "InfinityNorm");
    assert!(body["asq_obstruction"].is_null());
    let notes = body["notes"].as_array().unwrap();
    assert!(notes.iter().any(|n| n.as_str().unwrap().contains("excluded")));
    let po = body["profile"]["po_witness"].as_array().unwrap();
    assert_abs_diff_eq!(po[0].as_f64().unwrap(), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(po[1].as_f64().unwrap(), 1.0, epsilon = 1e-12);

    let out = run(bin().arg("profile").arg(spec("norm-l2.json")));
    let v = stdout_json(&out);
    assert_eq!(v["body"]["class"], "Neither");
    assert_abs_diff_eq!(
        v["body"]["profile"]["rF"].as_f64().unwrap(),
        1.0,
        epsilon = 1e-6
    );
    assert!(v["body"]["profile"]["po_witness"].is_null());
}

fn parse_csv(out: &Output) -> Vec<(f64, f64)> {
    assert!(out.status.success(), "{}", stderr_text(out));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,f"));
    lines
        .map(|l| {
            let (t, f) = l.split_once(',').expect("two columns");
            (t.parse().unwrap(), f.parse().unwrap())
        })
        .collect()
}

#[test]
fn curve_matches_closed_forms() {
    let out = run(bin()
        .arg("curve")
        .arg(spec("norm-l2.json"))
        .args(["--resolution", "4"]));
    let rows = parse_csv(&out);
    assert_eq!(rows.len(), 5);
    let expect = [1.0, 0.9682458365518543, 0.8660254037844386, 0.6614378277661477, 0.0];
    for (k, &(t, f)) in rows.iter().enumerate() {
        assert_abs_diff_eq!(t, 0.25 * k as f64, epsilon = 1e-15);
        // Interior samples carry the bisection tolerance; the endpoint sits
        // on the 1 + b^2 == 1 rounding plateau.
        let eps = if k == 4 { 2e-8 } else { 1e-9 };
        assert_abs_diff_eq!(f, expect[k], epsilon = eps);
    }

    let out = run(bin()
        .arg("curve")
        .arg(spec("norm-linf.json"))
        .args(["--resolution", "2"]));
    let rows = parse_csv(&out);
    assert_eq!(rows.len(), 3);
    for &(_, f) in &rows {
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-9);
    }

    let out = run(bin()
        .arg("curve")
        .arg(spec("norm-poly1.json"))
        .args(["--resolution", "2"]));
    let rows = parse_csv(&out);
    let expect = [1.0, 0.75, 0.0];
    for (k, &(_, f)) in rows.iter().enumerate() {
        assert_abs_diff_eq!(f, expect[k], epsilon = 2e-8);
    }
}

#[test]
fn curve_rejects_degenerate_grids() {
    let out = run(bin()
        .arg("curve")
        .arg(spec("norm-l2.json"))
        .args(["--resolution", "1"]));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_text(&out).contains("--resolution >= 2"));
}

#[test]
fn curve_written_to_a_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let piped = run(bin()
        .arg("curve")
        .arg(spec("norm-l1.json"))
        .args(["--resolution", "16"]));
    assert!(piped.status.success());
    let filed = run(bin()
        .arg("curve")
        .arg(spec("norm-l1.json"))
        .args(["--resolution", "16", "--out", path.to_str().unwrap()]));
    assert!(filed.status.success());
    assert!(filed.stdout.is_empty());
    assert_eq!(fs::read(&path).unwrap(), piped.stdout);
}

#[test]
fn dual_of_a_polygon_is_an_exact_polygon() {
    let out = run(bin().arg("dual").arg(spec("norm-poly1.json")));
    let v = stdout_json(&out);
    assert_eq!(v["body"]["kind"], "polygon");
    let verts: Vec<[f64; 2]> =
        serde_json::from_value(v["body"]["vertices"].clone()).unwrap();
    assert_eq!(verts.len(), 4);
    assert_abs_diff_eq!(verts[1][0], 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(verts[1][1], 2.0 / 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(verts[2][0], 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(verts[2][1], 1.0, epsilon = 1e-12);
    assert_eq!(v["body"]["round_trip"]["verdict"], "Pass");

    let out = run(bin().arg("dual").arg(spec("norm-l2.json")));
    let v = stdout_json(&out);
    assert_eq!(v["body"]["kind"], "table");
    assert!(v["body"]["vertices"].is_null());
    assert_eq!(v["body"]["round_trip"]["verdict"], "Pass");
}

#[test]
fn r_verb_reports_both_orientations() {
    let out = run(bin().arg("r").arg(spec("norm-poly1.json")));
    let v = stdout_json(&out);
    assert_abs_diff_eq!(v["body"]["r_f"].as_f64().unwrap(), 0.5, epsilon = 1e-9);
    assert_abs_diff_eq!(
        v["body"]["r_f_swapped"].as_f64().unwrap(),
        0.75,
        epsilon = 1e-9
    );
    assert_eq!(v["body"]["class"], "Neither");
}

#[test]
fn moduli_verb_brackets_the_plane() {
    let out = run(bin().arg("moduli").arg(spec("space-linf-2.json")));
    let v = stdout_json(&out);
    assert_eq!(v["parameters"]["resolution"], 2048);
    let lo = v["body"]["s_lower"].as_f64().unwrap();
    let hi = v["body"]["s_upper"].as_f64().unwrap();
    assert!(lo <= 1.0 && 1.0 <= hi, "bracket [{lo}, {hi}] misses 1");
    assert!(hi - lo < 0.05);
}

#[test]
fn slice_verb_reports_a_bracket() {
    let out = run(bin()
        .arg("slice")
        .arg(spec("space-l1-2.json"))
        .args(["--functional", "1,0", "--eps", "0.1", "--resolution", "8192"]));
    let v = stdout_json(&out);
    let lo = v["body"]["diameter"]["lo"].as_f64().unwrap();
    let hi = v["body"]["diameter"]["hi"].as_f64().unwrap();
    assert!(lo >= 0.18 && lo <= 0.2 + 1e-9, "lo = {lo}");
    assert!(hi >= 0.2 - 1e-9 && hi <= 0.22, "hi = {hi}");
}

#[test]
fn sum_check_refuses_the_max_weight() {
    let out = run(bin()
        .arg("sum-check")
        .args(["--claim", "square"])
        .arg("--left")
        .arg(spec("space-linf-2.json"))
        .arg("--right")
        .arg(spec("space-linf-2.json"))
        .arg("--norm")
        .arg(spec("norm-linf.json")));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_text(&out).contains("max norm"));
}

#[test]
fn sum_check_pushout_requires_eps() {
    let out = run(bin()
        .arg("sum-check")
        .args(["--claim", "pushout"])
        .arg("--left")
        .arg(spec("space-linf-2.json"))
        .arg("--right")
        .arg(spec("space-linf-2.json"))
        .arg("--norm")
        .arg(spec("norm-l2.json")));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_text(&out).contains("--eps"));
}

#[test]
fn bm_verb_certifies_an_inline_map() {
    let out = run(bin()
        .arg("bm")
        .arg("--left")
        .arg(spec("space-l1-2.json"))
        .arg("--right")
        .arg(spec("space-linf-2.json"))
        .args(["--map", "1,1;1,-1", "--resolution", "1048576"]));
    let v = stdout_json(&out);
    let distortion = v["body"]["distortion"].as_f64().unwrap();
    assert!(distortion >= 1.0 - 1e-9 && distortion <= 1.0 + 1e-4);

    let out = run(bin()
        .arg("bm")
        .arg("--left")
        .arg(spec("space-l1-2.json"))
        .arg("--right")
        .arg(spec("space-linf-2.json"))
        .args(["--map", "1,1;2,2"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_errors_carry_line_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ \"type\": \"p\",\n  \"p\": }\n").unwrap();
    let out = run(bin().arg("profile").arg(&bad));
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_text(&out);
    assert!(err.contains("bad.json"), "{err}");
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn threads_env_is_validated() {
    let out = run(bin()
        .arg("r")
        .arg(spec("norm-l1.json"))
        .env("ABSNORM_THREADS", "1"));
    assert!(out.status.success());
    let out = run(bin()
        .arg("r")
        .arg(spec("norm-l1.json"))
        .env("ABSNORM_THREADS", "zero"));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_text(&out).contains("ABSNORM_THREADS"));
}

fn write_suite_fixtures(dir: &Path) -> PathBuf {
    fs::write(
        dir.join("good.json"),
        "{ \"type\": \"p\", \"p\": 1.0 }\n",
    )
    .unwrap();
    // Parses as a spec but fails construction: duplicate vertex angle.
    fs::write(
        dir.join("dented.json"),
        "{ \"type\": \"polygon\", \"vertices\": [[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]] }\n",
    )
    .unwrap();
    dir.to_path_buf()
}

#[test]
fn suite_fails_fast_on_a_missing_spec() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.json");
    fs::write(
        &manifest,
        r#"{
  "output_dir": "reports",
  "commands": [
    { "name": "ok", "claim": "corner-value-pins-max-norm", "norm": "good.json" },
    { "name": "gone", "claim": "corner-value-pins-max-norm", "norm": "missing.json" }
  ]
}"#,
    )
    .unwrap();
    write_suite_fixtures(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(bin()
        .arg("suite")
        .args(["--manifest", manifest.to_str().unwrap()])
        .args(["--out", out_dir.to_str().unwrap()]));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_text(&out).contains("missing.json"));
    // Fail-fast: nothing was computed or written.
    assert!(!out_dir.exists());
}

#[test]
fn suite_records_construction_failures_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.json");
    fs::write(
        &manifest,
        r#"{
  "output_dir": "reports",
  "commands": [
    { "name": "broken", "claim": "corner-value-pins-max-norm", "norm": "dented.json", "resolution": 64 },
    { "name": "healthy", "claim": "corner-value-pins-max-norm", "norm": "good.json", "resolution": 64 }
  ]
}"#,
    )
    .unwrap();
    write_suite_fixtures(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(bin()
        .arg("suite")
        .args(["--manifest", manifest.to_str().unwrap()])
        .args(["--out", out_dir.to_str().unwrap()]));
    assert_eq!(out.status.code(), Some(1));

    let broken: Value =
        serde_json::from_slice(&fs::read(out_dir.join("broken.json")).unwrap()).unwrap();
    assert_eq!(broken["body"]["status"], "error");
    assert!(broken["body"]["error"]
        .as_str()
        .unwrap()
        .contains("strictly increase"));
    assert!(broken["body"]["report"].is_null());

    let healthy: Value =
        serde_json::from_slice(&fs::read(out_dir.join("healthy.json")).unwrap()).unwrap();
    assert_eq!(healthy["body"]["status"], "pass");
    assert_eq!(healthy["body"]["report"]["verdict"], "Pass");

    let summary: Value =
        serde_json::from_slice(&fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["body"]["errored"], 1);
    assert_eq!(summary["body"]["passed"], 1);
    assert_eq!(summary["body"]["failed"], 0);
}

#[test]
fn suite_rejects_duplicate_or_unsafe_names() {
    let dir = tempfile::tempdir().unwrap();
    write_suite_fixtures(dir.path());
    for commands in [
        r#"[ { "name": "a", "claim": "corner-value-pins-max-norm", "norm": "good.json" },
             { "name": "a", "claim": "corner-value-pins-max-norm", "norm": "good.json" } ]"#,
        r#"[ { "name": "../escape", "claim": "corner-value-pins-max-norm", "norm": "good.json" } ]"#,
    ] {
        let manifest = dir.path().join("manifest.json");
        fs::write(
            &manifest,
            format!("{{ \"output_dir\": \"reports\", \"commands\": {commands} }}"),
        )
        .unwrap();
        let out = run(bin()
            .arg("suite")
            .args(["--manifest", manifest.to_str().unwrap()]));
        assert_eq!(out.status.code(), Some(2));
    }
}

#[test]
fn suite_reports_a_genuine_failure() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.json");
    // A non-convex chain passes construction but fakes the corner value
    // F(1,1) = 1 without being the max norm; the corner check must fail.
    fs::write(
        dir.path().join("impostor.json"),
        "{ \"type\": \"polygon\", \"vertices\": [[1.0, 0.0], [1.0, 1.0], [0.5, 1.2], [0.0, 1.0]] }\n",
    )
    .unwrap();
    fs::write(
        &manifest,
        r#"{
  "output_dir": "reports",
  "commands": [
    { "name": "impostor", "claim": "corner-value-pins-max-norm", "norm": "impostor.json", "resolution": 64 }
  ]
}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = run(bin()
        .arg("suite")
        .args(["--manifest", manifest.to_str().unwrap()])
        .args(["--out", out_dir.to_str().unwrap()]));
    assert_eq!(out.status.code(), Some(1));
    let report: Value =
        serde_json::from_slice(&fs::read(out_dir.join("impostor.json")).unwrap()).unwrap();
    assert_eq!(report["body"]["status"], "fail");
    assert_eq!(report["body"]["report"]["verdict"], "Fail");
    assert!(report["body"]["report"]["counterexample"].is_object());
}
