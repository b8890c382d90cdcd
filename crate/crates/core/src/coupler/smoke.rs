use serde::Serialize;

use crate::bmi::Config;
use crate::standard_names::StandardName;

use super::Catalog;

const SMOKE_UPDATES: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmokeCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmokeReport {
    pub class: String,
    pub checks: Vec<SmokeCheck>,
}

impl SmokeReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }

    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(SmokeCheck {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }
}

/// Exercises a component with its default configuration: initialize, name
/// validity, a few updates with finite outputs, advancing time, finalize.
pub fn smoke_test(catalog: &Catalog, class: &str) -> SmokeReport {
    let mut report = SmokeReport {
        class: class.to_string(),
        checks: Vec::new(),
    };
    let Some(mut c) = catalog.create(class) else {
        report.push("construct", false, format!("unknown class {class}"));
        return report;
    };

    if let Err(e) = c.initialize(&Config::new()) {
        report.push("initialize", false, e.to_string());
        return report;
    }
    report.push("initialize", true, "");

    let mut names = Vec::new();
    match (c.input_var_names(), c.output_var_names()) {
        (Ok(i), Ok(o)) => names.extend(i.into_iter().chain(o)),
        (Err(e), _) | (_, Err(e)) => report.push("names", false, e.to_string()),
    }
    let bad: Vec<String> = names
        .iter()
        .filter_map(|n| StandardName::parse(n).err().map(|e| format!("{n}: {e}")))
        .collect();
    report.push("names", bad.is_empty(), bad.join("; "));

    let t0 = c.current_time().unwrap_or(f64::NAN);
    let mut update_error = None;
    for _ in 0..SMOKE_UPDATES {
        if let Err(e) = c.update() {
            update_error = Some(e.to_string());
            break;
        }
    }
    match &update_error {
        Some(e) => report.push("finite", false, format!("update failed: {e}")),
        None => {
            let mut non_finite = Vec::new();
            for name in c.output_var_names().unwrap_or_default() {
                match c.get_value(&name) {
                    Ok(buf) if buf.all_finite() => {}
                    Ok(_) => non_finite.push(name),
                    Err(e) => non_finite.push(format!("{name}: {e}")),
                }
            }
            report.push("finite", non_finite.is_empty(), non_finite.join("; "));
        }
    }

    let t1 = c.current_time().unwrap_or(f64::NAN);
    report.push(
        "time_advances",
        update_error.is_none() && t1 > t0,
        format!("{t0} -> {t1}"),
    );

    match c.finalize() {
        Ok(()) => report.push("finalize", true, ""),
        Err(e) => report.push("finalize", false, e.to_string()),
    }
    report
}
