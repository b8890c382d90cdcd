use std::path::Path;

use wmt_core::coupler::{load_composition, run, validate_composition, Catalog, RunStatus, Session};
use wmt_core::mediators::{read_grid_snapshot, read_timeseries, Timeseries};

const PREY: &str = "ecosystem_prey__population_density";
const PREDATOR: &str = "ecosystem_predator__population_density";

fn lv_doc(prey_id: &str, predator_id: &str, stop: f64) -> String {
    format!(
        r#"{{"title": "lv", "clock": {{"start": 0, "stop": {stop}, "step": 0.01, "units": "d"}},
        "components": [{{"id": "{prey_id}", "class": "lv_prey"}}, {{"id": "{predator_id}", "class": "lv_predator"}}],
        "links": [{{"from": "{prey_id}.{PREY}", "to": "{predator_id}.{PREY}"}},
                  {{"from": "{predator_id}.{PREDATOR}", "to": "{prey_id}.{PREDATOR}"}}],
        "outputs": [{{"id": "{prey_id}", "var": "{PREY}", "file": "prey.csv"}},
                    {{"id": "{predator_id}", "var": "{PREDATOR}", "file": "predator.csv"}}]}}"#
    )
}

// Both populations advanced together from the previous values.
fn monolithic_lv(steps: usize) -> Vec<(f64, f64)> {
    let (a, b, c, d, dt) = (1.0, 0.5, 0.75, 0.25, 0.01);
    let (mut x, mut y) = (2.0_f64, 1.0_f64);
    let mut out = vec![(x, y)];
    for _ in 0..steps {
        let nx = (x + dt * (a * x - b * x * y)).max(0.0);
        let ny = (y + dt * (-c * y + d * x * y)).max(0.0);
        x = nx;
        y = ny;
        out.push((x, y));
    }
    out
}

fn run_doc(doc: &str, dir: &Path) -> wmt_core::coupler::RunSummary {
    let catalog = Catalog::builtin();
    let c = load_composition(doc, &catalog).unwrap();
    assert!(validate_composition(&c, &catalog).is_empty());
    run(&c, &catalog, dir)
}

fn series(dir: &Path, file: &str) -> Timeseries<f64> {
    read_timeseries(&dir.join(file)).unwrap()
}

#[test]
fn lv_one_sync_step() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_doc(&lv_doc("prey", "predator", 0.01), dir.path());
    assert_eq!(summary.status, RunStatus::Succeeded, "{summary:?}");
    assert_eq!(summary.sync_steps, 1);
    let x = series(dir.path(), "prey.csv").column(PREY).unwrap();
    let y = series(dir.path(), "predator.csv").column(PREDATOR).unwrap();
    assert!((x[1] - 2.01).abs() < 1e-12);
    assert!((y[1] - 0.9975).abs() < 1e-12);
}

#[test]
fn lv_matches_monolithic_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_doc(&lv_doc("prey", "predator", 20.0), dir.path());
    assert_eq!(summary.status, RunStatus::Succeeded);
    assert_eq!(summary.sync_steps, 2000);
    let oracle = monolithic_lv(2000);
    let prey = series(dir.path(), "prey.csv");
    let x = prey.column(PREY).unwrap();
    let y = series(dir.path(), "predator.csv").column(PREDATOR).unwrap();
    assert_eq!(x.len(), oracle.len());
    for (k, (ox, oy)) in oracle.iter().enumerate() {
        assert!((x[k] - ox).abs() <= 1e-12, "prey at k={k}");
        assert!((y[k] - oy).abs() <= 1e-12, "predator at k={k}");
    }
    let times = prey.times();
    for (k, t) in times.iter().enumerate() {
        assert!((t - k as f64 * 0.01).abs() < 1e-9);
    }
}

#[test]
fn renaming_instances_changes_nothing() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_doc(&lv_doc("prey", "predator", 5.0), a.path());
    // "a" now sorts before "z": the update order flips
    run_doc(&lv_doc("z", "a", 5.0), b.path());
    for f in ["prey.csv", "predator.csv"] {
        let ta = std::fs::read(a.path().join(f)).unwrap();
        let tb = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(ta, tb, "{f}");
    }
}

#[test]
fn runs_are_bit_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let doc = include_str!("../../cli/examples/heat_forced.composition");
    let sa = run_doc(doc, a.path());
    let sb = run_doc(doc, b.path());
    assert_eq!(sa, sb);
    for f in &sa.outputs {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap()
        );
    }
}

#[test]
fn clock_coherence() {
    let catalog = Catalog::builtin();
    let doc = include_str!("../../cli/examples/heat_forced.composition");
    let c = load_composition(doc, &catalog).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut session = Session::start(&c, &catalog, dir.path()).unwrap();
    while !session.is_done() {
        session.step().unwrap();
    }
    for inst in &c.instances {
        let comp = session.component(&inst.instance_id).unwrap();
        let t = comp.current_time().unwrap();
        let step = comp.time_step().unwrap();
        assert!(t >= c.clock.stop - step - 1e-9 && t <= c.clock.stop + 1e-9);
    }
    assert!(session.finalize().is_none());
}

#[test]
fn forcing_reaches_heat_one_sync_late() {
    let dir = tempfile::tempdir().unwrap();
    let doc = include_str!("../../cli/examples/heat_forced.composition");
    let summary = run_doc(doc, dir.path());
    assert_eq!(summary.status, RunStatus::Succeeded, "{summary:?}");
    assert_eq!(
        summary.outputs,
        vec!["air.csv", "boundary.csv", "plate.txt"]
    );
    let air = series(dir.path(), "air.csv")
        .column("atmosphere_bottom_air__temperature")
        .unwrap();
    let boundary = series(dir.path(), "boundary.csv")
        .column("plate_surface_boundary__temperature")
        .unwrap();
    assert_eq!(air.len(), 51);
    assert_eq!(boundary[0], 20.0);
    for k in 1..air.len() {
        assert_eq!(boundary[k], air[k - 1], "k={k}");
    }
    let plate = read_grid_snapshot::<f64>(&dir.path().join("plate.txt")).unwrap();
    assert_eq!(plate.shape, vec![8, 8]);
    assert_eq!(plate.time, 50.0);
}

#[test]
fn heat_relaxes_to_boundary() {
    let doc = r#"{"title": "steady", "clock": {"start": 0, "stop": 64, "units": "s"},
        "components": [{"id": "plate", "class": "heat2d",
                        "params": {"boundary_value": 10.0, "alpha": 1.0, "dt": 0.1}}],
        "outputs": [{"id": "plate", "var": "plate_surface__temperature", "file": "plate.txt"}]}"#;
    let dir = tempfile::tempdir().unwrap();
    let summary = run_doc(doc, dir.path());
    assert_eq!(summary.status, RunStatus::Succeeded);
    assert_eq!(summary.sync_steps, 640);
    let plate = read_grid_snapshot::<f64>(&dir.path().join("plate.txt")).unwrap();
    let dev = plate
        .values
        .iter()
        .map(|u| (u - 10.0).abs())
        .fold(0.0, f64::max);
    assert!(dev < 1e-6, "max deviation {dev}");
}

#[test]
fn component_errors_abort_with_context() {
    // predator rates are validated at initialize
    let doc = lv_doc("prey", "predator", 1.0).replace(
        r#""class": "lv_predator"}"#,
        r#""class": "lv_predator", "params": {"c": -1.0}}"#,
    );
    let dir = tempfile::tempdir().unwrap();
    let summary = run_doc(&doc, dir.path());
    assert_eq!(summary.status, RunStatus::Failed);
    let failure = summary.failure.unwrap();
    assert_eq!(failure.instance.as_deref(), Some("predator"));
}

#[test]
fn default_sync_step_is_smallest_component_step() {
    let doc = r#"{"title": "mixed", "clock": {"start": 0, "stop": 2, "units": "s"},
        "components": [{"id": "air", "class": "forcing", "params": {"dt": 1.0}},
                       {"id": "plate", "class": "heat2d", "params": {"dt": 0.25}}],
        "links": [{"from": "air.atmosphere_bottom_air__temperature",
                   "to": "plate.plate_surface_boundary__temperature", "alias": true}],
        "outputs": [{"id": "plate", "var": "plate_surface_boundary__temperature", "file": "b.csv"}]}"#;
    let dir = tempfile::tempdir().unwrap();
    let summary = run_doc(doc, dir.path());
    assert_eq!(summary.status, RunStatus::Succeeded, "{summary:?}");
    assert_eq!(summary.sync_steps, 8);
    let times = series(dir.path(), "b.csv").times();
    assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]);
}
