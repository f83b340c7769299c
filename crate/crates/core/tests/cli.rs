use std::path::PathBuf;
use std::process::{Command, Output};

use odrl_normalize::parse_policy;
use serde_json::Value as Json;

fn fixture_path(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_odrl-normalize"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Json {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Writes `contents` to a fresh file under the target directory.
fn scratch(name: &str, contents: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn rewrite_health_keeps_two_permissions() {
    let out = run(&[
        "rewrite",
        &fixture_path("health.json"),
        "--drop",
        "prohibitions",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let p = parse_policy(&text).unwrap();
    assert_eq!(p.permissions.len(), 2);
    assert!(p.prohibitions.is_empty());
}

#[test]
fn rewrite_drop_permissions_on_health() {
    let out = run(&[
        "rewrite",
        &fixture_path("health.json"),
        "--drop",
        "permissions",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let p = parse_policy(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(p.permissions.is_empty());
    assert!(p.prohibitions.is_empty());
}

#[test]
fn compare_movie_forms_is_equivalent() {
    let out = run(&[
        "compare",
        &fixture_path("movie.json"),
        &fixture_path("movie_split.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let j = json(&out);
    assert_eq!(j["equivalent"], true);
    assert_eq!(j["shared"]["total"], 3);
    assert_eq!(j["obligations"], Json::Null);
}

#[test]
fn compare_labelled_rules() {
    let age = fixture_path("age.json");
    let out = run(&["compare", &age, &age, "--rules", "R'", "R"]);
    let j = json(&out);
    assert_eq!(j["left_in_right"], true);
    assert_eq!(j["right_in_left"], false);
    assert_eq!(j["right_only"]["total"], 4);

    let out = run(&["compare", &age, &age, "--rules", "R", "missing"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no rule labelled `missing`"));
}

#[test]
fn witness_cap_truncates() {
    let age = fixture_path("age.json");
    let out = run(&[
        "compare",
        &age,
        &age,
        "--rules",
        "R'",
        "R",
        "--witness-cap",
        "1",
    ]);
    let j = json(&out);
    assert_eq!(j["right_only"]["cells"].as_array().unwrap().len(), 1);
    assert_eq!(j["right_only"]["truncated"], true);
}

#[test]
fn normalize_empty_policy() {
    let out = run(&["normalize", &fixture_path("empty.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(out.stdout, b"[]\n");
}

#[test]
fn normalize_with_values_splits() {
    let out = run(&[
        "normalize",
        &fixture_path("age.json"),
        "--values",
        &fixture_path("ages.values.json"),
    ]);
    let j = json(&out);
    assert_eq!(j[0]["label"], "R");
    assert_eq!(j[0]["cells"].as_array().unwrap().len(), 7);
    assert_eq!(j[1]["cells"].as_array().unwrap().len(), 3);
}

#[test]
fn split_against_other_policy() {
    let out = run(&[
        "split",
        &fixture_path("movie.json"),
        "--against",
        &fixture_path("movie_split.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let j = json(&out);
    assert_eq!(j.as_array().unwrap().len(), 1);
    assert_eq!(j[0]["cells"].as_array().unwrap().len(), 3);
}

#[test]
fn validate_reports_and_warns() {
    let out = run(&[
        "validate",
        &fixture_path("read.json"),
        &fixture_path("alice_bob.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let j = json(&out);
    assert_eq!(j["valid"], false);
    assert_eq!(j["unpermitted_event"], 1);
    assert!(stderr(&out).contains("event 1 has no value for `Pages`"));

    let out = run(&[
        "validate",
        &fixture_path("read.json"),
        &fixture_path("alice_bob.json"),
        "--default",
        "permit",
    ]);
    let j = json(&out);
    assert_eq!(j["valid"], true);
    assert_eq!(j["default"], "permit");
}

#[test]
fn check_agrees_with_enumeration() {
    let out = run(&[
        "check",
        &fixture_path("health.json"),
        &fixture_path("movie.json"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json(&out)["agree"], true);

    let overlap = fixture_path("overlap.json");
    let out = run(&["check", &overlap, &overlap, "--rules", "R", "R2"]);
    let j = json(&out);
    assert_eq!(j["agree"], true);
    assert_eq!(j["oracle"]["overlap"], true);

    let out = run(&[
        "check", &overlap, &overlap, "--rules", "R", "R2", "--cap", "10",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("domain too large"));
}

#[test]
fn text_format() {
    let out = run(&[
        "--format",
        "text",
        "compare",
        &fixture_path("movie.json"),
        &fixture_path("movie_split.json"),
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("equivalent: true"));
}

#[test]
fn import_odrl() {
    let out = run(&["import", &fixture_path("movie.odrl.jsonld")]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let p = parse_policy(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(p.permissions.len(), 1);
    assert_eq!(p.permissions[0].constraints.len(), 3);
}

#[test]
fn error_exit_codes() {
    let malformed = scratch("malformed.json", "{\n  \"permissions\": [\n}");
    let out = run(&["normalize", &malformed]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let set_op = scratch(
        "set_op.json",
        r#"{"attributes":{"Party":"entity"},"permissions":[{"constraints":[{"left":"Party","op":"in","right":"x"}]}]}"#,
    );
    let out = run(&["normalize", &set_op]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("set constraints and class membership are excluded"));

    let any_of = scratch(
        "any_of.jsonld",
        r#"{"permission":[{"action":"use","constraint":[{"leftOperand":"spatial","operator":"isAnyOf","rightOperand":"EU"}]}]}"#,
    );
    let out = run(&["import", &any_of]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("isAnyOf"));

    let with_obligation = scratch(
        "obligation.json",
        r#"{"attributes":{"Action":"entity"},"obligations":[{"constraints":[{"left":"Action","op":"eq","right":"pay"}]}]}"#,
    );
    let out = run(&["compare", &with_obligation, &with_obligation, "--strict"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["compare", &with_obligation, &with_obligation]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["obligations"]["equal"], true);

    let numeric_party = scratch(
        "numeric_party.json",
        r#"{"attributes":{"Party":"numeric"},"permissions":[]}"#,
    );
    let out = run(&["compare", &fixture_path("read.json"), &numeric_party]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["normalize", "/nonexistent/policy.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn obligations_are_not_decomposed() {
    let policy = scratch(
        "pay.json",
        r#"{"attributes":{"Action":"entity","Amount":"numeric"},
            "permissions":[{"constraints":[{"left":"Action","op":"eq","right":"play"}]}],
            "obligations":[{"constraints":[{"left":"Action","op":"eq","right":"pay"},{"left":"Amount","op":"geq","right":10}]}]}"#,
    );
    let j = json(&run(&["normalize", &policy]));
    assert_eq!(j.as_array().unwrap().len(), 1);
    assert_eq!(j[0]["section"], "permission");

    let out = run(&["rewrite", &policy, "--drop", "prohibitions"]);
    let p = parse_policy(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(p.obligations.len(), 1);
    assert_eq!(p.obligations[0].constraints.len(), 2);
}
