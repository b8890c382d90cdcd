use wmt_core::coupler::Catalog;
use wmt_core::registry::{format_citation, Registry};

// Bundled metadata must describe what the components actually expose.
#[test]
fn metadata_matches_components() {
    let catalog = Catalog::builtin();
    let registry = Registry::bundled();
    let classes: Vec<&str> = registry
        .list_components()
        .iter()
        .map(|m| m.class.as_str())
        .collect();
    assert_eq!(classes, catalog.constructible_classes());
    for meta in registry.list_components() {
        let mut c = catalog.create(&meta.class).unwrap();
        c.initialize(&Default::default()).unwrap();
        let mut inputs = c.input_var_names().unwrap();
        let mut outputs = c.output_var_names().unwrap();
        inputs.sort();
        outputs.sort();
        let mut meta_in: Vec<String> = meta.inputs.iter().map(|p| p.name.to_string()).collect();
        let mut meta_out: Vec<String> = meta.outputs.iter().map(|p| p.name.to_string()).collect();
        meta_in.sort();
        meta_out.sort();
        assert_eq!(inputs, meta_in, "{}", meta.class);
        assert_eq!(outputs, meta_out, "{}", meta.class);
        for port in meta.inputs.iter().chain(&meta.outputs) {
            let info = c.var_info(port.name.as_str()).unwrap();
            assert_eq!(info.units, port.units, "{} {}", meta.class, port.name);
            let grid = c.grid_descriptor(info.grid_id).unwrap();
            assert_eq!(
                grid.rank(),
                port.rank as usize,
                "{} {}",
                meta.class,
                port.name
            );
        }
        let start = meta.parameter("start_time").expect("start_time documented");
        assert_eq!(start.units, c.time_units().unwrap(), "{}", meta.class);
    }
}

#[test]
fn every_bundled_citation_is_well_formed() {
    for meta in Registry::bundled().list_components() {
        let text = format_citation(meta).unwrap();
        assert!(text.contains(&format!("({})", meta.year)));
        assert!(text.ends_with('.'));
    }
}
