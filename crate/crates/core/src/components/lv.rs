//! Lotka-Volterra predator/prey split into two components, each integrating
//! its own population with explicit Euler against the last value it was
//! given for the other.

use crate::bmi::{Bmi, BmiError, Config, GridDescriptor, Model, TimeInfo, VarInfo};
use crate::scalar::Scalar;

use super::{PREDATOR_DENSITY, PREY_DENSITY};

const SCALAR_GRID: u32 = 0;
const DENSITY_UNITS: &str = "km-2";
const TIME_UNITS: &str = "d";

pub type LvPrey<S> = Bmi<S, LvPreyModel<S>>;
pub type LvPredator<S> = Bmi<S, LvPredatorModel<S>>;

/// `x + dt (a x - b x y)`, clamped at zero.
pub fn prey_step<S: Scalar>(x: S, y: S, a: S, b: S, dt: S) -> S {
    (x + dt * (a * x - b * x * y)).max(S::zero())
}

/// `y + dt (-c y + d x y)`, clamped at zero.
pub fn predator_step<S: Scalar>(y: S, x: S, c: S, d: S, dt: S) -> S {
    (y + dt * (-c * y + d * x * y)).max(S::zero())
}

fn lv_time<S: Scalar>(config: &Config) -> Result<TimeInfo<S>, BmiError> {
    TimeInfo::from_config(config, 0.01, 1000.0, TIME_UNITS)
}

#[derive(Debug, Clone)]
pub struct LvPreyModel<S> {
    pub x: S,
    pub a: S,
    pub b: S,
    pub predator_in: S,
    time: TimeInfo<S>,
}

impl<S: Scalar> Model<S> for LvPreyModel<S> {
    const CLASS: &'static str = "lv_prey";

    fn from_config(config: &Config) -> Result<Self, BmiError> {
        Ok(LvPreyModel {
            x: S::of(config.non_negative_real("x0", 2.0)?),
            a: S::of(config.non_negative_real("a", 1.0)?),
            b: S::of(config.non_negative_real("b", 0.5)?),
            predator_in: S::of(config.non_negative_real("predator_initial", 1.0)?),
            time: lv_time(config)?,
        })
    }

    fn time_info(&self) -> &TimeInfo<S> {
        &self.time
    }

    fn input_vars(&self) -> Vec<VarInfo> {
        vec![VarInfo::node(
            PREDATOR_DENSITY,
            DENSITY_UNITS,
            SCALAR_GRID,
            1,
        )]
    }

    fn output_vars(&self) -> Vec<VarInfo> {
        vec![VarInfo::node(PREY_DENSITY, DENSITY_UNITS, SCALAR_GRID, 1)]
    }

    fn grid(&self, grid_id: u32) -> Option<GridDescriptor<S>> {
        (grid_id == SCALAR_GRID).then(|| GridDescriptor::scalar(SCALAR_GRID))
    }

    fn read(&self, name: &str) -> Option<Vec<S>> {
        (name == PREY_DENSITY).then(|| vec![self.x])
    }

    fn write(&mut self, name: &str, values: &[S]) {
        if name == PREDATOR_DENSITY {
            self.predator_in = values[0];
        }
    }

    fn advance(&mut self, _new_time: S) -> Result<(), String> {
        self.x = prey_step(self.x, self.predator_in, self.a, self.b, self.time.step);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LvPredatorModel<S> {
    pub y: S,
    pub c: S,
    pub d: S,
    pub prey_in: S,
    time: TimeInfo<S>,
}

impl<S: Scalar> Model<S> for LvPredatorModel<S> {
    const CLASS: &'static str = "lv_predator";

    fn from_config(config: &Config) -> Result<Self, BmiError> {
        Ok(LvPredatorModel {
            y: S::of(config.non_negative_real("y0", 1.0)?),
            c: S::of(config.non_negative_real("c", 0.75)?),
            d: S::of(config.non_negative_real("d", 0.25)?),
            prey_in: S::of(config.non_negative_real("prey_initial", 2.0)?),
            time: lv_time(config)?,
        })
    }

    fn time_info(&self) -> &TimeInfo<S> {
        &self.time
    }

    fn input_vars(&self) -> Vec<VarInfo> {
        vec![VarInfo::node(PREY_DENSITY, DENSITY_UNITS, SCALAR_GRID, 1)]
    }

    fn output_vars(&self) -> Vec<VarInfo> {
        vec![VarInfo::node(
            PREDATOR_DENSITY,
            DENSITY_UNITS,
            SCALAR_GRID,
            1,
        )]
    }

    fn grid(&self, grid_id: u32) -> Option<GridDescriptor<S>> {
        (grid_id == SCALAR_GRID).then(|| GridDescriptor::scalar(SCALAR_GRID))
    }

    fn read(&self, name: &str) -> Option<Vec<S>> {
        (name == PREDATOR_DENSITY).then(|| vec![self.y])
    }

    fn write(&mut self, name: &str, values: &[S]) {
        if name == PREY_DENSITY {
            self.prey_in = values[0];
        }
    }

    fn advance(&mut self, _new_time: S) -> Result<(), String> {
        self.y = predator_step(self.y, self.prey_in, self.c, self.d, self.time.step);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bmi::{Component, ValueBuffer};

    fn pair(json: &str) -> (LvPrey<f64>, LvPredator<f64>) {
        let config = Config::from_json_str(json).unwrap();
        let mut prey = LvPrey::<f64>::new();
        let mut predator = LvPredator::<f64>::new();
        prey.initialize(&config).unwrap();
        predator.initialize(&config).unwrap();
        (prey, predator)
    }

    fn exchange(prey: &mut LvPrey<f64>, predator: &mut LvPredator<f64>) {
        let x = prey.get_value(PREY_DENSITY).unwrap();
        let y = predator.get_value(PREDATOR_DENSITY).unwrap();
        prey.set_value(PREDATOR_DENSITY, &y).unwrap();
        predator.set_value(PREY_DENSITY, &x).unwrap();
    }

    #[test]
    fn one_exchanged_step() {
        let (mut prey, mut predator) = pair("{}");
        exchange(&mut prey, &mut predator);
        prey.update().unwrap();
        predator.update().unwrap();
        let x = prey.get_value(PREY_DENSITY).unwrap().values[0];
        let y = predator.get_value(PREDATOR_DENSITY).unwrap().values[0];
        assert!((x - 2.01).abs() < 1e-12);
        assert!((y - 0.9975).abs() < 1e-12);
    }

    #[test]
    fn decoupled_growth() {
        let (mut prey, _) = pair(r#"{"b": 0.0, "d": 0.0}"#);
        prey.update().unwrap();
        let x = prey.get_value(PREY_DENSITY).unwrap().values[0];
        assert!((x - 2.0 * (1.0 + 1.0 * 0.01)).abs() < 1e-15);
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let (mut prey, mut predator) =
            pair(r#"{"x0": 0.0, "y0": 0.0, "predator_initial": 0.0, "prey_initial": 0.0}"#);
        for _ in 0..100 {
            exchange(&mut prey, &mut predator);
            prey.update().unwrap();
            predator.update().unwrap();
        }
        assert_eq!(prey.get_value(PREY_DENSITY).unwrap().values, vec![0.0]);
        assert_eq!(
            predator.get_value(PREDATOR_DENSITY).unwrap().values,
            vec![0.0]
        );
    }

    #[test]
    fn clamps_at_zero() {
        assert_eq!(prey_step(1.0, 100.0, 0.0, 1.0, 1.0), 0.0);
        assert_eq!(predator_step(1.0, 0.0, 2.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn rejects_negative_rates() {
        let mut prey = LvPrey::<f64>::new();
        let err = prey
            .initialize(&Config::from_json_str(r#"{"a": -1}"#).unwrap())
            .unwrap_err();
        assert!(err.to_string().contains("\"a\""));
    }

    #[test]
    fn set_value_rejects_wrong_units() {
        let (mut prey, _) = pair("{}");
        let err = prey
            .set_value(PREDATOR_DENSITY, &ValueBuffer::new(vec![1.0], "m-2"))
            .unwrap_err();
        assert!(matches!(err, BmiError::Units { .. }));
    }
}
