//! Deliberately faulty components for exercising the smoke tester.

use crate::bmi::{Bmi, BmiError, Config, GridDescriptor, Model, TimeInfo, VarInfo};
use crate::scalar::Scalar;

const SCALAR_GRID: u32 = 0;

/// Emits NaN on its only output; otherwise well behaved.
pub type NanSource<S> = Bmi<S, NanSourceModel<S>>;
/// Advertises an output name that violates the naming grammar.
pub type BadNameSource<S> = Bmi<S, BadNameSourceModel<S>>;

#[derive(Debug, Clone)]
pub struct NanSourceModel<S> {
    time: TimeInfo<S>,
}

impl<S: Scalar> Model<S> for NanSourceModel<S> {
    const CLASS: &'static str = "nan_source";

    fn from_config(config: &Config) -> Result<Self, BmiError> {
        Ok(NanSourceModel {
            time: TimeInfo::from_config(config, 1.0, 100.0, "s")?,
        })
    }

    fn time_info(&self) -> &TimeInfo<S> {
        &self.time
    }

    fn input_vars(&self) -> Vec<VarInfo> {
        Vec::new()
    }

    fn output_vars(&self) -> Vec<VarInfo> {
        vec![VarInfo::node("probe__signal", "1", SCALAR_GRID, 1)]
    }

    fn grid(&self, grid_id: u32) -> Option<GridDescriptor<S>> {
        (grid_id == SCALAR_GRID).then(|| GridDescriptor::scalar(SCALAR_GRID))
    }

    fn read(&self, name: &str) -> Option<Vec<S>> {
        (name == "probe__signal").then(|| vec![S::nan()])
    }

    fn write(&mut self, _name: &str, _values: &[S]) {}

    fn advance(&mut self, _new_time: S) -> Result<(), String> {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BadNameSourceModel<S> {
    time: TimeInfo<S>,
}

impl<S: Scalar> Model<S> for BadNameSourceModel<S> {
    const CLASS: &'static str = "bad_name_source";

    fn from_config(config: &Config) -> Result<Self, BmiError> {
        Ok(BadNameSourceModel {
            time: TimeInfo::from_config(config, 1.0, 100.0, "s")?,
        })
    }

    fn time_info(&self) -> &TimeInfo<S> {
        &self.time
    }

    fn input_vars(&self) -> Vec<VarInfo> {
        Vec::new()
    }

    fn output_vars(&self) -> Vec<VarInfo> {
        vec![VarInfo::node("BadName", "1", SCALAR_GRID, 1)]
    }

    fn grid(&self, grid_id: u32) -> Option<GridDescriptor<S>> {
        (grid_id == SCALAR_GRID).then(|| GridDescriptor::scalar(SCALAR_GRID))
    }

    fn read(&self, name: &str) -> Option<Vec<S>> {
        (name == "BadName").then(|| vec![S::one()])
    }

    fn write(&mut self, _name: &str, _values: &[S]) {}

    fn advance(&mut self, _new_time: S) -> Result<(), String> {
        Ok(())
    }
}
