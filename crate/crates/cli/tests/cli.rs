use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn wmt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wmt"))
        .args(args)
        .output()
        .unwrap()
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn names_verdicts_and_exit_codes() {
    let o = wmt(&["names", "sea_water__temperature"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "OK sea_water__temperature\n");
    let o = wmt(&["names", "Sea_Water__T"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "ERR IllegalCharacter@0\n");
    let o = wmt(&["names", "a__b", "c__"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "OK a__b");
    assert!(lines[1].starts_with("ERR EmptyQuantity@"));
    assert_eq!(wmt(&["names"]).status.code(), Some(2));
}

#[test]
fn components_are_sorted() {
    let o = wmt(&["components"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "forcing\nheat2d\nlv_predator\nlv_prey\n");
}

#[test]
fn validate_and_run_exit_codes() {
    let lv = example("lv.composition");
    let o = wmt(&["validate", lv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let o = wmt(&[
        "run",
        lv.to_str().unwrap(),
        "--workdir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "succeeded t_final=20\n");
    assert!(dir.path().join("prey.csv").exists());
    assert!(dir.path().join("predator.csv").exists());

    assert_eq!(wmt(&["run", "missing.composition"]).status.code(), Some(2));
    assert_eq!(
        wmt(&["validate", "missing.composition"]).status.code(),
        Some(2)
    );
    assert_eq!(wmt(&["run"]).status.code(), Some(2));
    assert_eq!(wmt(&["frobnicate"]).status.code(), Some(2));

    let unmatched = dir.path().join("alone.composition");
    std::fs::write(
        &unmatched,
        r#"{"title": "alone", "clock": {"start": 0, "stop": 1, "step": 0.01, "units": "d"},
            "components": [{"id": "prey", "class": "lv_prey"}]}"#,
    )
    .unwrap();
    let o = wmt(&["run", unmatched.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("unsatisfied input ecosystem_predator__population_density"));
    assert_eq!(
        wmt(&["validate", unmatched.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );

    let malformed = dir.path().join("bad.composition");
    std::fs::write(&malformed, "{").unwrap();
    assert_eq!(
        wmt(&["validate", malformed.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn failing_component_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.composition");
    let doc = std::fs::read_to_string(example("lv.composition"))
        .unwrap()
        .replace(r#""c": 0.75"#, r#""c": -0.75"#);
    std::fs::write(&path, doc).unwrap();
    let o = wmt(&[
        "run",
        path.to_str().unwrap(),
        "--workdir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o).starts_with("failed predator: "),
        "{}",
        stdout(&o)
    );
}

#[test]
fn smoke_and_citation() {
    let o = wmt(&["smoke", "--all"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 20);
    let o = wmt(&["smoke", "bad_name_source"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(wmt(&["smoke"]).status.code(), Some(2));

    let doc = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/registry/heat2d.doc");
    let o = wmt(&["citation", doc.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert!(out.trim_end().ends_with('.'));
    assert_eq!(wmt(&["citation", "missing.doc"]).status.code(), Some(2));
}

#[test]
fn identical_invocations_are_identical() {
    let a = wmt(&["names", "x__y", "bad", "a__b__c"]);
    let b = wmt(&["names", "x__y", "bad", "a__b__c"]);
    assert_eq!(a.stdout, b.stdout);
}
