use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bmi::{BmiError, GridDescriptor, GridKind, TIME_TOLERANCE};
use crate::mediators::{
    apply_map, build_map, interp_time, write_grid_snapshot, GridMapPlan, TimeSeriesWindow,
    TimeseriesWriter, UnitConversion,
};
use crate::{DynComponent, ValueBuffer};

use super::{Catalog, Composition, Link, UnitMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Succeeded,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    /// Instance that raised the error, when there is one.
    pub instance: Option<String>,
    pub message: String,
}

impl RunFailure {
    fn at(instance: &str, message: impl fmt::Display) -> Self {
        RunFailure {
            instance: Some(instance.to_string()),
            message: message.to_string(),
        }
    }

    fn general(message: impl fmt::Display) -> Self {
        RunFailure {
            instance: None,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.instance {
            Some(i) => write!(f, "{i}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub status: RunStatus,
    /// Last sync time reached, in clock units.
    pub t_final: f64,
    pub sync_steps: usize,
    /// Output file names relative to the workdir, in declaration order.
    pub outputs: Vec<String>,
    pub failure: Option<RunFailure>,
}

struct Member {
    component: DynComponent,
    // clock units -> component time units
    to_local: UnitConversion,
    // component time units -> clock units
    to_clock: UnitConversion,
}

struct LinkPlan {
    link: Link,
    conversion: UnitConversion,
    consumer_units: String,
    map: Option<GridMapPlan<f64>>,
    window: TimeSeriesWindow<f64>,
}

enum Sink {
    Series {
        writer: TimeseriesWriter,
        columns: Vec<(String, String)>,
    },
    Snapshot {
        path: PathBuf,
        instance: String,
        variable: String,
        grid: GridDescriptor<f64>,
    },
}

/// A composition in progress: initialized components, link plans, output
/// sinks and the sync schedule.
pub struct Session {
    members: BTreeMap<String, Member>,
    links: Vec<LinkPlan>,
    sinks: Vec<Sink>,
    output_files: Vec<String>,
    sync_times: Vec<f64>,
    completed: usize,
    finalized: bool,
}

fn sync_schedule(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + TIME_TOLERANCE).floor() as usize;
    let mut times: Vec<f64> = (0..=count).map(|k| start + k as f64 * step).collect();
    if times.last().is_some_and(|&t| t < stop - TIME_TOLERANCE) {
        times.push(stop);
    }
    times
}

impl Session {
    /// Builds and initializes every instance, plans links and opens outputs.
    /// On error, instances initialized so far are finalized.
    pub fn start(
        composition: &Composition,
        catalog: &Catalog,
        workdir: &Path,
    ) -> Result<Session, RunFailure> {
        let mut session = Session {
            members: BTreeMap::new(),
            links: Vec::new(),
            sinks: Vec::new(),
            output_files: Vec::new(),
            sync_times: Vec::new(),
            completed: 0,
            finalized: false,
        };
        match session.setup(composition, catalog, workdir) {
            Ok(()) => Ok(session),
            Err(e) => {
                session.finalize();
                Err(e)
            }
        }
    }

    fn setup(
        &mut self,
        composition: &Composition,
        catalog: &Catalog,
        workdir: &Path,
    ) -> Result<(), RunFailure> {
        std::fs::create_dir_all(workdir)
            .map_err(|e| RunFailure::general(format!("{}: {e}", workdir.display())))?;
        let clock = &composition.clock;

        for inst in &composition.instances {
            let id = inst.instance_id.as_str();
            let mut component = catalog.create(&inst.component_class).ok_or_else(|| {
                RunFailure::at(id, format!("unknown class {}", inst.component_class))
            })?;
            let mut config = inst.params.clone();
            // Clock bounds, in the component's own time units, unless overridden.
            if let Some(units) = catalog
                .meta(&inst.component_class)
                .and_then(|m| m.parameter("start_time"))
                .map(|p| p.units.clone())
            {
                let to_local = UnitConversion::parse_between(&clock.units, &units)
                    .map_err(|e| RunFailure::at(id, e))?;
                if !config.contains("start_time") {
                    config.set("start_time", Value::from(to_local.apply(clock.start)));
                }
                if !config.contains("end_time") {
                    config.set("end_time", Value::from(to_local.apply(clock.stop)));
                }
            }
            component
                .initialize(&config)
                .map_err(|e| RunFailure::at(id, e))?;
            let local_units = component.time_units().map_err(|e| RunFailure::at(id, e))?;
            let to_local = UnitConversion::parse_between(&clock.units, &local_units)
                .map_err(|e| RunFailure::at(id, e))?;
            let to_clock = UnitConversion::parse_between(&local_units, &clock.units)
                .map_err(|e| RunFailure::at(id, e))?;
            self.members.insert(
                id.to_string(),
                Member {
                    component,
                    to_local,
                    to_clock,
                },
            );
        }

        let sync_step = match clock.sync_step {
            Some(step) => step,
            None => {
                let mut smallest = f64::INFINITY;
                for (id, m) in &self.members {
                    let step = m.component.time_step().map_err(|e| RunFailure::at(id, e))?;
                    smallest = smallest.min(m.to_clock.apply(step));
                }
                if !smallest.is_finite() {
                    return Err(RunFailure::general("composition has no instances"));
                }
                smallest
            }
        };
        self.sync_times = sync_schedule(clock.start, clock.stop, sync_step);

        for link in &composition.links {
            self.links.push(self.plan_link(link)?);
        }
        self.open_sinks(composition, workdir)?;
        self.flush_outputs(clock.start)?;
        Ok(())
    }

    fn member(&self, id: &str) -> Result<&Member, RunFailure> {
        self.members
            .get(id)
            .ok_or_else(|| RunFailure::general(format!("unknown instance {id}")))
    }

    fn plan_link(&self, link: &Link) -> Result<LinkPlan, RunFailure> {
        let from_id = link.from.instance.as_str();
        let to_id = link.to.instance.as_str();
        let producer = &self.member(from_id)?.component;
        let consumer = &self.member(to_id)?.component;
        let out_name = link.from.name.as_str();
        let in_name = link.to.name.as_str();

        if !producer
            .output_var_names()
            .map_err(|e| RunFailure::at(from_id, e))?
            .iter()
            .any(|n| n == out_name)
        {
            return Err(RunFailure::at(from_id, format!("no output {out_name}")));
        }
        let out_info = producer
            .var_info(out_name)
            .map_err(|e| RunFailure::at(from_id, e))?;
        let in_info = consumer
            .var_info(in_name)
            .map_err(|e| RunFailure::at(to_id, e))?;
        let source = producer
            .grid_descriptor(out_info.grid_id)
            .map_err(|e| RunFailure::at(from_id, e))?;
        let target = consumer
            .grid_descriptor(in_info.grid_id)
            .map_err(|e| RunFailure::at(to_id, e))?;

        let map = match link.mapper.method() {
            Some(method) => Some(build_map(&source, &target, method).map_err(|e| {
                RunFailure::general(format!("link {} -> {}: {e}", link.from, link.to))
            })?),
            None if source.same_geometry(&target) => None,
            // a scalar broadcasts without an explicit mapper
            None if source.kind == GridKind::Scalar => Some(
                build_map(&source, &target, crate::mediators::MapMethod::Nearest)
                    .map_err(|e| RunFailure::general(e.to_string()))?,
            ),
            None => {
                return Err(RunFailure::general(format!(
                    "link {} -> {}: grids differ and mapper is none",
                    link.from, link.to
                )))
            }
        };
        let conversion = match link.unit_mode {
            UnitMode::Auto => UnitConversion::parse_between(&out_info.units, &in_info.units)
                .map_err(|e| {
                    RunFailure::general(format!("link {} -> {}: {e}", link.from, link.to))
                })?,
            UnitMode::None => UnitConversion::IDENTITY,
        };
        Ok(LinkPlan {
            link: link.clone(),
            conversion,
            consumer_units: in_info.units,
            map,
            window: TimeSeriesWindow::new(),
        })
    }

    fn open_sinks(&mut self, composition: &Composition, workdir: &Path) -> Result<(), RunFailure> {
        let mut by_file: Vec<(String, Vec<(String, String)>)> = Vec::new();
        for out in &composition.outputs {
            let column = (out.instance_id.clone(), out.variable.to_string());
            match by_file.iter_mut().find(|(f, _)| *f == out.file) {
                Some((_, cols)) => cols.push(column),
                None => by_file.push((out.file.clone(), vec![column])),
            }
        }
        for (file, columns) in by_file {
            let path = workdir.join(&file);
            let mut grids = Vec::new();
            for (id, var) in &columns {
                let c = &self.member(id)?.component;
                if !c
                    .output_var_names()
                    .map_err(|e| RunFailure::at(id, e))?
                    .contains(var)
                {
                    return Err(RunFailure::at(id, format!("no output {var}")));
                }
                let info = c.var_info(var).map_err(|e| RunFailure::at(id, e))?;
                grids.push(
                    c.grid_descriptor(info.grid_id)
                        .map_err(|e| RunFailure::at(id, e))?,
                );
            }
            let all_scalar = grids.iter().all(|g| g.kind == GridKind::Scalar);
            let sink = if all_scalar {
                let names: Vec<&str> = columns.iter().map(|(_, v)| v.as_str()).collect();
                let writer =
                    TimeseriesWriter::create(&path, &names).map_err(RunFailure::general)?;
                Sink::Series { writer, columns }
            } else if columns.len() == 1 {
                let (instance, variable) = columns.into_iter().next().expect("one column");
                Sink::Snapshot {
                    path,
                    instance,
                    variable,
                    grid: grids.pop().expect("one grid"),
                }
            } else {
                return Err(RunFailure::general(format!(
                    "output {file}: a gridded variable needs a file of its own"
                )));
            };
            self.output_files.push(file);
            self.sinks.push(sink);
        }
        Ok(())
    }

    fn read(&self, id: &str, var: &str) -> Result<ValueBuffer, RunFailure> {
        self.member(id)?
            .component
            .get_value(var)
            .map_err(|e| RunFailure::at(id, e))
    }

    fn flush_outputs(&mut self, t: f64) -> Result<(), RunFailure> {
        let mut rows = Vec::with_capacity(self.sinks.len());
        for sink in &self.sinks {
            match sink {
                Sink::Series { columns, .. } => {
                    let mut row = Vec::with_capacity(columns.len());
                    for (id, var) in columns {
                        row.push(self.read(id, var)?.values[0]);
                    }
                    rows.push(row);
                }
                Sink::Snapshot {
                    instance, variable, ..
                } => rows.push(self.read(instance, variable)?.values),
            }
        }
        for (sink, row) in self.sinks.iter_mut().zip(rows) {
            match sink {
                Sink::Series { writer, .. } => {
                    writer.append(t, &row).map_err(RunFailure::general)?
                }
                Sink::Snapshot {
                    path,
                    variable,
                    grid,
                    ..
                } => write_grid_snapshot(path, variable, grid, &row, t)
                    .map_err(RunFailure::general)?,
            }
        }
        Ok(())
    }

    /// Sync times `t_0..t_K`, in clock units.
    pub fn sync_times(&self) -> &[f64] {
        &self.sync_times
    }

    /// Index of the last sync time reached.
    pub fn completed(&self) -> usize {
        self.completed
    }

    pub fn is_done(&self) -> bool {
        self.completed + 1 >= self.sync_times.len()
    }

    pub fn component(&self, id: &str) -> Option<&DynComponent> {
        self.members.get(id).map(|m| &m.component)
    }

    pub fn output_files(&self) -> &[String] {
        &self.output_files
    }

    /// Exchanges lagged values, advances every instance to the next sync
    /// time and flushes outputs.
    pub fn step(&mut self) -> Result<(), RunFailure> {
        if self.finalized {
            return Err(RunFailure::general("session already finalized"));
        }
        let Some(&t_next) = self.sync_times.get(self.completed + 1) else {
            return Err(RunFailure::general("no sync times remain"));
        };

        // Phase 1: every read happens before any update.
        let mut deliveries = Vec::with_capacity(self.links.len());
        for k in 0..self.links.len() {
            let (from_id, from_var) = {
                let l = &self.links[k].link;
                (l.from.instance.clone(), l.from.name.to_string())
            };
            let producer = self.member(&from_id)?;
            let produced_at = producer.to_clock.apply(
                producer
                    .component
                    .current_time()
                    .map_err(|e| RunFailure::at(&from_id, e))?,
            );
            let buffer = self.read(&from_id, &from_var)?;
            let plan = &mut self.links[k];
            if plan.window.latest_time().is_none_or(|t| produced_at > t) {
                plan.window
                    .push(produced_at, buffer.values)
                    .map_err(|e| RunFailure::at(&from_id, e))?;
            }
            let mut values =
                interp_time(&plan.window, t_next).map_err(|e| RunFailure::at(&from_id, e))?;
            crate::mediators::convert_in_place(&mut values, plan.conversion);
            if let Some(map) = &plan.map {
                values = apply_map(map, &values).map_err(|e| RunFailure::at(&from_id, e))?;
            }
            deliveries.push(ValueBuffer::new(values, plan.consumer_units.clone()));
        }
        for (plan, buffer) in self.links.iter().zip(deliveries) {
            let to = &plan.link.to;
            let member = self
                .members
                .get_mut(&to.instance)
                .ok_or_else(|| RunFailure::general(format!("unknown instance {}", to.instance)))?;
            member
                .component
                .set_value(to.name.as_str(), &buffer)
                .map_err(|e| RunFailure::at(&to.instance, e))?;
        }

        // Phase 2: advance in instance-id order.
        for (id, member) in self.members.iter_mut() {
            let local = member.to_local.apply(t_next);
            member
                .component
                .update_until(local)
                .map_err(|e| RunFailure::at(id, e))?;
        }

        // Phase 3.
        self.flush_outputs(t_next)?;
        self.completed += 1;
        Ok(())
    }

    /// Finalizes every instance, best effort. Returns the first error.
    pub fn finalize(&mut self) -> Option<RunFailure> {
        if self.finalized {
            return None;
        }
        self.finalized = true;
        self.sinks.clear();
        let mut first = None;
        for (id, member) in self.members.iter_mut() {
            match member.component.finalize() {
                Ok(()) | Err(BmiError::State { .. }) => {}
                Err(e) => {
                    first.get_or_insert(RunFailure::at(id, e));
                }
            }
        }
        first
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        self.finalize();
    }
}

/// Runs a composition to its stop time, writing outputs under `workdir`.
/// Components are finalized whether or not the run succeeds.
pub fn run(composition: &Composition, catalog: &Catalog, workdir: &Path) -> RunSummary {
    let mut session = match Session::start(composition, catalog, workdir) {
        Ok(s) => s,
        Err(failure) => {
            return RunSummary {
                status: RunStatus::Failed,
                t_final: composition.clock.start,
                sync_steps: 0,
                outputs: Vec::new(),
                failure: Some(failure),
            }
        }
    };
    let mut failure = None;
    while !session.is_done() {
        if let Err(e) = session.step() {
            failure = Some(e);
            break;
        }
    }
    let finalize_failure = session.finalize();
    let failure = failure.or(finalize_failure);
    RunSummary {
        status: if failure.is_some() {
            RunStatus::Failed
        } else {
            RunStatus::Succeeded
        },
        t_final: session.sync_times()[session.completed()],
        sync_steps: session.completed(),
        outputs: session.output_files().to_vec(),
        failure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_covers_stop() {
        assert_eq!(sync_schedule(0.0, 1.0, 0.5), vec![0.0, 0.5, 1.0]);
        assert_eq!(sync_schedule(0.0, 1.0, 0.4), vec![0.0, 0.4, 0.8, 1.0]);
        let t = sync_schedule(0.0, 1.0, 0.1);
        assert_eq!(t.len(), 11);
        assert!((t[10] - 1.0).abs() < 1e-12);
    }
}
