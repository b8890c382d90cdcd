//! Sinusoidal scalar forcing source.

use std::f64::consts::PI;

use crate::bmi::{Bmi, BmiError, Config, GridDescriptor, Model, TimeInfo, VarInfo};
use crate::scalar::Scalar;

use super::FORCING_OUTPUT;

const SCALAR_GRID: u32 = 0;

pub type Forcing<S> = Bmi<S, ForcingModel<S>>;

/// `offset + amplitude * sin(2 pi t / period + phase)`.
pub fn forcing_value<S: Scalar>(t: S, amplitude: S, period: S, offset: S, phase: S) -> S {
    let two_pi = S::of(2.0 * PI);
    offset + amplitude * (two_pi * t / period + phase).sin()
}

#[derive(Debug, Clone)]
pub struct ForcingModel<S> {
    pub amplitude: S,
    pub period: S,
    pub offset: S,
    pub phase: S,
    value: S,
    time: TimeInfo<S>,
}

impl<S: Scalar> ForcingModel<S> {
    fn evaluate(&self, t: S) -> S {
        forcing_value(t, self.amplitude, self.period, self.offset, self.phase)
    }
}

impl<S: Scalar> Model<S> for ForcingModel<S> {
    const CLASS: &'static str = "forcing";

    fn from_config(config: &Config) -> Result<Self, BmiError> {
        let time = TimeInfo::from_config(config, 1.0, 1000.0, "s")?;
        let mut model = ForcingModel {
            amplitude: S::of(config.real("amplitude", 1.0)?),
            period: S::of(config.positive_real("period", 10.0)?),
            offset: S::of(config.real("offset", 0.0)?),
            phase: S::of(config.real("phase", 0.0)?),
            value: S::zero(),
            time,
        };
        model.value = model.evaluate(model.time.start);
        Ok(model)
    }

    fn time_info(&self) -> &TimeInfo<S> {
        &self.time
    }

    fn input_vars(&self) -> Vec<VarInfo> {
        Vec::new()
    }

    fn output_vars(&self) -> Vec<VarInfo> {
        vec![VarInfo::node(FORCING_OUTPUT, "degC", SCALAR_GRID, 1)]
    }

    fn grid(&self, grid_id: u32) -> Option<GridDescriptor<S>> {
        (grid_id == SCALAR_GRID).then(|| GridDescriptor::scalar(SCALAR_GRID))
    }

    fn read(&self, name: &str) -> Option<Vec<S>> {
        (name == FORCING_OUTPUT).then(|| vec![self.value])
    }

    fn write(&mut self, _name: &str, _values: &[S]) {}

    fn advance(&mut self, new_time: S) -> Result<(), String> {
        self.value = self.evaluate(new_time);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bmi::Component;

    #[test]
    fn closed_form_values() {
        assert_eq!(forcing_value(3.7, 0.0, 4.0, 12.5, 0.3), 12.5);
        assert_eq!(forcing_value(0.0, 3.0, 4.0, 12.5, 0.0), 12.5);
        assert_eq!(forcing_value(1.0, 1.0, 4.0, 0.0, 0.0), 1.0);
    }

    #[test]
    fn output_tracks_clock() {
        let mut f = Forcing::<f64>::new();
        f.initialize(&Config::from_json_str(r#"{"period": 4.0, "dt": 1.0}"#).unwrap())
            .unwrap();
        assert_eq!(f.get_value(FORCING_OUTPUT).unwrap().values, vec![0.0]);
        f.update().unwrap();
        assert_eq!(f.get_value(FORCING_OUTPUT).unwrap().values, vec![1.0]);
        assert_eq!(f.grid_descriptor(0).unwrap().rank(), 0);
    }

    #[test]
    fn rejects_non_positive_period() {
        let mut f = Forcing::<f64>::new();
        assert!(f
            .initialize(&Config::from_json_str(r#"{"period": 0}"#).unwrap())
            .is_err());
    }
}
