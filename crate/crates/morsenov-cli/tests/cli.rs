//! End-to-end tests for the `morsenov` binary: every verb, every exit
//! status, byte-level determinism, and the golden JSON verdicts.

use std::io::Write as _;
use std::process::{Command, Stdio};

/// Run the binary with `args`, optionally feeding `stdin`, and return
/// `(exit code, stdout, stderr)`.
fn run(args: &[&str], stdin: Option<&str>) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_morsenov"));
    cmd.args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    let mut child = cmd.spawn().expect("binary spawns");
    if let Some(text) = stdin {
        child
            .stdin
            .as_mut()
            .expect("stdin is piped")
            .write_all(text.as_bytes())
            .expect("stdin accepts input");
    }
    drop(child.stdin.take());
    let out = child.wait_with_output().expect("binary runs to completion");
    (
        out.status.code().expect("binary exits normally"),
        String::from_utf8(out.stdout).expect("stdout is UTF-8"),
        String::from_utf8(out.stderr).expect("stderr is UTF-8"),
    )
}

fn mirror_counts(model: &str) -> String {
    let (code, stdout, stderr) = run(&["mirror", model], None);
    assert_eq!(code, 0, "mirror {model} failed: {stderr}");
    stdout
}

/// Double the `z_minus(gamma_p3, p3, 0)` count in a pretty-printed torus_2
/// count document.
fn corrupt_z_minus(counts: &str) -> String {
    let needle = "\"count\": \"1\",\n      \"from\": \"gamma_p3\",";
    let corrupted = counts.replace(needle, "\"count\": \"2\",\n      \"from\": \"gamma_p3\",");
    assert_ne!(counts, corrupted, "corruption must hit an existing row");
    corrupted
}

// ---------------------------------------------------------------------------
// homology

#[test]
fn homology_reports_the_betti_numbers_of_the_sphere() {
    let (code, stdout, _) = run(&["homology", "sphere2"], None);
    assert_eq!(code, 0);
    assert!(stdout.contains("(1, 0, 1)"), "unexpected output: {stdout}");
}

#[test]
fn homology_json_lists_betti_numbers_as_an_array() {
    let (code, stdout, _) = run(&["homology", "torus_2", "--json"], None);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).expect("valid JSON");
    assert_eq!(doc["betti"], serde_json::json!([1, 2, 1]));
    assert_eq!(doc["model"], "torus_2");
}

#[test]
fn homology_rejects_an_unknown_model() {
    let (code, _, stderr) = run(&["homology", "klein_bottle"], None);
    assert_eq!(code, 2);
    assert!(stderr.contains("error:"), "stderr: {stderr}");
}

// ---------------------------------------------------------------------------
// morse

#[test]
fn morse_json_matches_the_independent_homology_oracle() {
    let (code, stdout, _) = run(&["morse", "torus_2", "--json"], None);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).expect("valid JSON");
    assert_eq!(doc["oracle_match"], serde_json::json!(true));
    assert_eq!(doc["betti"], serde_json::json!([1, 2, 1]));
    assert_eq!(doc["oracle"], serde_json::json!([1, 2, 1]));
    let counts = doc["counts"].as_array().expect("counts array");
    assert_eq!(counts.len(), 4);
    for count in counts {
        assert_eq!(count["unsigned"], serde_json::json!(2));
        assert_eq!(count["signed"], serde_json::json!(0));
    }
}

#[test]
fn morse_human_output_names_the_critical_points() {
    let (code, stdout, _) = run(&["morse", "sphere2"], None);
    assert_eq!(code, 0);
    for label in ["p0", "p1", "index", "betti"] {
        assert!(stdout.contains(label), "missing {label} in: {stdout}");
    }
}

#[test]
fn morse_accepts_a_config_override_file() {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("flow.json");
    std::fs::write(&path, r#"{"link_samples": 48}"#).expect("config written");
    let (code, stdout, _) = run(
        &["morse", "torus_2", "--config", path.to_str().unwrap(), "--json"],
        None,
    );
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).expect("valid JSON");
    assert_eq!(doc["oracle_match"], serde_json::json!(true));
}

#[test]
fn morse_rejects_a_malformed_config_file() {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("flow.json");
    std::fs::write(&path, "{not json").expect("config written");
    let (code, _, stderr) = run(
        &["morse", "torus_2", "--config", path.to_str().unwrap()],
        None,
    );
    assert_eq!(code, 2);
    assert!(stderr.contains("error:"), "stderr: {stderr}");
}

// ---------------------------------------------------------------------------
// novikov-invert

#[test]
fn novikov_invert_prints_the_inverse_of_a_criterion_matrix() {
    let matrix = r#"[["1", {"terms": [{"exp": "1", "coeff": "1"}]}], ["0", "2"]]"#;
    let (code, stdout, _) = run(&["novikov-invert", "--matrix", "-", "--cutoff", "5", "--json"], Some(matrix));
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).expect("valid JSON");
    assert_eq!(doc["criterion"]["holds"], serde_json::json!(true));
    assert_eq!(doc["inverse"][1][1]["terms"][0]["coeff"], serde_json::json!("1/2"));
    assert_eq!(doc["inverse"][1][0]["terms"], serde_json::json!([]));
}

#[test]
fn novikov_invert_reports_a_singular_matrix_on_exit_1() {
    let matrix = r#"[["1", "1"], ["1", "1"]]"#;
    let (code, stdout, stderr) =
        run(&["novikov-invert", "--matrix", "-", "--cutoff", "5", "--json"], Some(matrix));
    assert_eq!(code, 1);
    let doc: serde_json::Value = serde_json::from_str(&stdout).expect("valid JSON");
    assert_eq!(doc["error"], serde_json::json!("matrix is singular: determinant is exactly zero"));
    assert!(stderr.contains("verification failed"), "stderr: {stderr}");
}

#[test]
fn novikov_invert_names_the_violated_criterion_entry() {
    // An off-diagonal constant term breaks the sufficient criterion but the
    // matrix is still invertible, so inversion proceeds and exits 0.
    let matrix = r#"[["1", "1"], ["0", "1"]]"#;
    let (code, stdout, _) = run(&["novikov-invert", "--matrix", "-", "--cutoff", "3", "--json"], Some(matrix));
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).expect("valid JSON");
    assert_eq!(doc["criterion"]["holds"], serde_json::json!(false));
    assert!(doc["criterion"]["violations"][0]
        .as_str()
        .unwrap()
        .contains("off-diagonal entry (0,1) has nonzero constant term"));
}

#[test]
fn novikov_invert_rejects_a_ragged_matrix() {
    let matrix = r#"[["1", "0"], ["0"]]"#;
    let (code, _, stderr) = run(&["novikov-invert", "--matrix", "-", "--cutoff", "5"], Some(matrix));
    assert_eq!(code, 2);
    assert!(stderr.contains("error:"), "stderr: {stderr}");
}

#[test]
fn novikov_invert_rejects_an_unparsable_cutoff() {
    let matrix = r#"[["1"]]"#;
    let (code, _, stderr) = run(&["novikov-invert", "--matrix", "-", "--cutoff", "x/y"], Some(matrix));
    assert_eq!(code, 2);
    assert!(stderr.contains("error:"), "stderr: {stderr}");
}

// ---------------------------------------------------------------------------
// mirror | verify pipeline

#[test]
fn mirror_then_verify_passes_for_every_catalog_model() {
    for model in ["sphere2", "torus_2", "torus_3", "sphere2*torus_1"] {
        let counts = mirror_counts(model);
        let (code, stdout, stderr) = run(&["verify", "--counts", "-"], Some(&counts));
        assert_eq!(code, 0, "verify failed for {model}: {stderr}");
        assert!(stdout.contains("iota-claim: pass"), "{model}: {stdout}");
        assert!(stdout.contains("chain-homotopy: pass"), "{model}: {stdout}");
    }
}

#[test]
fn verify_json_lists_every_identity_with_its_status() {
    let counts = mirror_counts("torus_2");
    let (code, stdout, _) = run(&["verify", "--counts", "-", "--json"], Some(&counts));
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).expect("valid JSON");
    let reports = doc["reports"].as_array().expect("report array");
    let identities: Vec<&str> = reports
        .iter()
        .map(|r| r["identity"].as_str().unwrap())
        .collect();
    assert_eq!(
        identities,
        [
            "iota-claim",
            "h-claim",
            "triangularity",
            "differential",
            "chain-map",
            "iota-invertibility",
            "chain-homotopy",
        ]
    );
    for report in reports {
        assert_eq!(report["status"], serde_json::json!("pass"));
        assert_eq!(report["violations"], serde_json::json!([]));
    }
}

#[test]
fn verify_names_the_failing_identity_and_tuple_for_corrupted_counts() {
    let corrupted = corrupt_z_minus(&mirror_counts("torus_2"));
    let (code, stdout, stderr) = run(&["verify", "--counts", "-"], Some(&corrupted));
    assert_eq!(code, 1);
    assert!(
        stdout.contains("h-claim: fail (1 violation; first at (p3, p3, 0) with residual -1)"),
        "stdout: {stdout}"
    );
    assert!(stdout.contains("chain-homotopy: fail"), "stdout: {stdout}");
    assert!(stderr.contains("verification failed"), "stderr: {stderr}");
}

#[test]
fn verify_rejects_a_document_with_unknown_fields() {
    let counts = mirror_counts("torus_2").replace("\"z_iota\"", "\"z_iotas\"");
    let (code, _, stderr) = run(&["verify", "--counts", "-"], Some(&counts));
    assert_eq!(code, 2);
    assert!(stderr.contains("z_iotas"), "stderr: {stderr}");
}

#[test]
fn verify_rejects_malformed_json_input() {
    let (code, _, stderr) = run(&["verify", "--counts", "-"], Some("{not json"));
    assert_eq!(code, 2);
    assert!(stderr.contains("error:"), "stderr: {stderr}");
}

// ---------------------------------------------------------------------------
// arnold

#[test]
fn arnold_human_output_states_the_bound() {
    let counts = mirror_counts("torus_2");
    let (code, stdout, _) = run(
        &["arnold", "--counts", "-", "--betti", "1,2,1", "--cutoff", "10"],
        Some(&counts),
    );
    assert_eq!(code, 0);
    assert!(stdout.trim_end().ends_with("bound: 4"), "stdout: {stdout}");
}

#[test]
fn arnold_aborts_at_the_first_failing_stage_for_corrupted_counts() {
    let counts = corrupt_z_minus(&mirror_counts("torus_2"));
    let (code, _, stderr) = run(
        &["arnold", "--counts", "-", "--betti", "1,2,1", "--cutoff", "10"],
        Some(&counts),
    );
    assert_eq!(code, 1);
    assert!(stderr.contains("stage h-claim"), "stderr: {stderr}");
}

#[test]
fn arnold_rejects_a_malformed_betti_list() {
    let counts = mirror_counts("torus_2");
    let (code, _, stderr) = run(
        &["arnold", "--counts", "-", "--betti", "1,two,1", "--cutoff", "10"],
        Some(&counts),
    );
    assert_eq!(code, 2);
    assert!(stderr.contains("error:"), "stderr: {stderr}");
}

#[test]
fn arnold_reports_a_betti_mismatch_as_a_verification_failure() {
    let counts = mirror_counts("torus_2");
    let (code, _, stderr) = run(
        &["arnold", "--counts", "-", "--betti", "1,1,1", "--cutoff", "10"],
        Some(&counts),
    );
    assert_eq!(code, 1);
    assert!(stderr.contains("cycles"), "stderr: {stderr}");
}

// ---------------------------------------------------------------------------
// golden files and determinism

#[test]
fn mirror_output_matches_the_golden_file_byte_for_byte() {
    let golden = include_str!("golden/mirror_torus_2.json");
    assert_eq!(mirror_counts("torus_2"), golden);
}

#[test]
fn arnold_verdicts_match_the_golden_files_byte_for_byte() {
    let cases = [
        ("torus_2", "1,2,1", include_str!("golden/arnold_torus_2.json")),
        ("torus_3", "1,3,3,1", include_str!("golden/arnold_torus_3.json")),
        ("sphere2", "1,0,1", include_str!("golden/arnold_sphere2.json")),
    ];
    for (model, betti, golden) in cases {
        let counts = mirror_counts(model);
        let (code, stdout, stderr) = run(
            &["arnold", "--counts", "-", "--betti", betti, "--cutoff", "10", "--json"],
            Some(&counts),
        );
        assert_eq!(code, 0, "arnold failed for {model}: {stderr}");
        assert_eq!(stdout, golden, "verdict drifted for {model}");
    }
}

#[test]
fn repeated_runs_produce_byte_identical_output() {
    for args in [
        vec!["homology", "torus_3", "--json"],
        vec!["morse", "sphere2", "--json"],
        vec!["mirror", "sphere2*torus_1"],
    ] {
        let (code_a, first, _) = run(&args, None);
        let (code_b, second, _) = run(&args, None);
        assert_eq!(code_a, 0);
        assert_eq!(code_b, 0);
        assert_eq!(first, second, "nondeterministic output for {args:?}");
    }
}

// ---------------------------------------------------------------------------
// usage errors

#[test]
fn unknown_subcommands_and_flags_exit_2() {
    let (code, _, _) = run(&["frobnicate"], None);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["homology", "sphere2", "--frobnicate"], None);
    assert_eq!(code, 2);
    let (code, _, _) = run(&[], None);
    assert_eq!(code, 2);
}

#[test]
fn missing_counts_file_exits_2() {
    let (code, _, stderr) = run(&["verify", "--counts", "/nonexistent/counts.json"], None);
    assert_eq!(code, 2);
    assert!(stderr.contains("error:"), "stderr: {stderr}");
}
