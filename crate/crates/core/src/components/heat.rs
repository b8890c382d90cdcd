//! Explicit (FTCS) 2D heat diffusion on a uniform node grid.

use crate::bmi::{Bmi, BmiError, Config, GridDescriptor, Model, TimeInfo, VarInfo};
use crate::scalar::Scalar;

use super::{HEAT_BOUNDARY, HEAT_OUTPUT};

const FIELD_GRID: u32 = 0;
const BOUNDARY_GRID: u32 = 1;
const TEMPERATURE_UNITS: &str = "degC";

pub type Heat2D<S> = Bmi<S, Heat2DModel<S>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Edge nodes held at a fixed value.
    Dirichlet,
    /// Zero flux: each edge node's missing neighbour mirrors the node itself.
    Insulated,
}

/// `alpha * dt / dx^2` along columns and `alpha * dt / dy^2` along rows.
#[derive(Debug, Clone, Copy)]
pub struct StencilCoefficients<S> {
    pub cx: S,
    pub cy: S,
}

impl<S: Scalar> StencilCoefficients<S> {
    pub fn new(alpha: S, dt: S, dx: S, dy: S) -> Self {
        StencilCoefficients {
            cx: alpha * dt / (dx * dx),
            cy: alpha * dt / (dy * dy),
        }
    }
}

/// One forward-Euler step of the 5-point Laplacian over a row-major
/// `ny x nx` field. In Dirichlet mode edge nodes are copied unchanged.
pub fn ftcs_step<S: Scalar>(
    u: &[S],
    out: &mut [S],
    ny: usize,
    nx: usize,
    coef: StencilCoefficients<S>,
    mode: BoundaryMode,
) {
    debug_assert_eq!(u.len(), ny * nx);
    debug_assert_eq!(out.len(), ny * nx);
    let two = S::of(2.0);
    for r in 0..ny {
        for c in 0..nx {
            let k = r * nx + c;
            let edge = r == 0 || c == 0 || r + 1 == ny || c + 1 == nx;
            if mode == BoundaryMode::Dirichlet && edge {
                out[k] = u[k];
                continue;
            }
            let centre = u[k];
            let west = if c == 0 { centre } else { u[k - 1] };
            let east = if c + 1 == nx { centre } else { u[k + 1] };
            let north = if r == 0 { centre } else { u[k - nx] };
            let south = if r + 1 == ny { centre } else { u[k + nx] };
            out[k] = centre
                + coef.cx * (east - two * centre + west)
                + coef.cy * (south - two * centre + north);
        }
    }
}

#[derive(Debug, Clone)]
pub struct Heat2DModel<S> {
    pub alpha: S,
    pub dx: S,
    pub dy: S,
    pub nx: usize,
    pub ny: usize,
    pub boundary_value: S,
    pub mode: BoundaryMode,
    grid: GridDescriptor<S>,
    time: TimeInfo<S>,
    u: Vec<S>,
    scratch: Vec<S>,
}

impl<S: Scalar> Heat2DModel<S> {
    pub fn field(&self) -> &[S] {
        &self.u
    }

    fn apply_boundary(&mut self) {
        if self.mode != BoundaryMode::Dirichlet {
            return;
        }
        let (ny, nx) = (self.ny, self.nx);
        for r in 0..ny {
            for c in 0..nx {
                if r == 0 || c == 0 || r + 1 == ny || c + 1 == nx {
                    self.u[r * nx + c] = self.boundary_value;
                }
            }
        }
    }
}

impl<S: Scalar> Model<S> for Heat2DModel<S> {
    const CLASS: &'static str = "heat2d";

    fn from_config(config: &Config) -> Result<Self, BmiError> {
        let shape = config.shape("shape", &[8, 8])?;
        if shape.len() != 2 {
            return Err(BmiError::config("shape", "heat2d needs a 2-element shape"));
        }
        let spacing = config.reals("spacing", &[1.0, 1.0])?;
        if spacing.len() != 2 || spacing.iter().any(|&d| d <= 0.0) {
            return Err(BmiError::config("spacing", "needs two components > 0"));
        }
        let origin = config.reals("origin", &[0.0, 0.0])?;
        let alpha = config.positive_real("alpha", 1.0)?;
        let time = TimeInfo::<S>::from_config(config, 0.1, 100.0, "s")?;
        let mode = match config
            .choice("boundary", &["dirichlet", "insulated"], "dirichlet")?
            .as_str()
        {
            "insulated" => BoundaryMode::Insulated,
            _ => BoundaryMode::Dirichlet,
        };
        let boundary_value = config.real("boundary_value", 0.0)?;
        let initial = config.real("initial", 0.0)?;
        let hot_spot = config.real("hot_spot", 100.0)?;

        let (dy, dx) = (spacing[0], spacing[1]);
        let dt = time.step.as_f64();
        let limit = (dx * dx * dy * dy) / (2.0 * alpha * (dx * dx + dy * dy));
        if dt > limit {
            return Err(BmiError::config(
                "dt",
                format!("dt {dt} exceeds the explicit stability limit {limit}"),
            ));
        }

        let grid = GridDescriptor::uniform(
            FIELD_GRID,
            shape.clone(),
            spacing.iter().map(|&d| S::of(d)).collect(),
            origin.iter().map(|&o| S::of(o)).collect(),
            "m",
        )?;
        let (ny, nx) = (shape[0], shape[1]);
        let mut u = vec![S::of(initial); ny * nx];
        u[(ny / 2) * nx + nx / 2] = S::of(hot_spot);
        let mut model = Heat2DModel {
            alpha: S::of(alpha),
            dx: S::of(dx),
            dy: S::of(dy),
            nx,
            ny,
            boundary_value: S::of(boundary_value),
            mode,
            grid,
            time,
            scratch: u.clone(),
            u,
        };
        model.apply_boundary();
        Ok(model)
    }

    fn time_info(&self) -> &TimeInfo<S> {
        &self.time
    }

    fn input_vars(&self) -> Vec<VarInfo> {
        vec![VarInfo::node(
            HEAT_BOUNDARY,
            TEMPERATURE_UNITS,
            BOUNDARY_GRID,
            1,
        )]
    }

    fn output_vars(&self) -> Vec<VarInfo> {
        vec![
            VarInfo::node(
                HEAT_OUTPUT,
                TEMPERATURE_UNITS,
                FIELD_GRID,
                self.nx * self.ny,
            ),
            VarInfo::node(HEAT_BOUNDARY, TEMPERATURE_UNITS, BOUNDARY_GRID, 1),
        ]
    }

    fn grid(&self, grid_id: u32) -> Option<GridDescriptor<S>> {
        match grid_id {
            FIELD_GRID => Some(self.grid.clone()),
            BOUNDARY_GRID => Some(GridDescriptor::scalar(BOUNDARY_GRID)),
            _ => None,
        }
    }

    fn read(&self, name: &str) -> Option<Vec<S>> {
        match name {
            HEAT_OUTPUT => Some(self.u.clone()),
            HEAT_BOUNDARY => Some(vec![self.boundary_value]),
            _ => None,
        }
    }

    fn write(&mut self, name: &str, values: &[S]) {
        if name == HEAT_BOUNDARY {
            self.boundary_value = values[0];
            self.apply_boundary();
        }
    }

    fn advance(&mut self, _new_time: S) -> Result<(), String> {
        let coef = StencilCoefficients::new(self.alpha, self.time.step, self.dx, self.dy);
        ftcs_step(
            &self.u,
            &mut self.scratch,
            self.ny,
            self.nx,
            coef,
            self.mode,
        );
        std::mem::swap(&mut self.u, &mut self.scratch);
        if self.u.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err("temperature field became non-finite".to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bmi::Component;

    fn config(json: &str) -> Config {
        Config::from_json_str(json).unwrap()
    }

    fn heat(json: &str) -> Heat2D<f64> {
        let mut h = Heat2D::<f64>::new();
        h.initialize(&config(json)).unwrap();
        h
    }

    // Hand-applied 5-point stencil, written without the kernel's edge logic.
    fn oracle_dirichlet_step(u: &[f64], ny: usize, nx: usize, c: f64) -> Vec<f64> {
        let mut out = u.to_vec();
        for r in 1..ny - 1 {
            for col in 1..nx - 1 {
                let at = |rr: usize, cc: usize| u[rr * nx + cc];
                let lap = at(r + 1, col) + at(r - 1, col) + at(r, col + 1) + at(r, col - 1)
                    - 4.0 * at(r, col);
                out[r * nx + col] = at(r, col) + c * lap;
            }
        }
        out
    }

    #[test]
    fn hot_centre_single_step() {
        let mut h = heat(r#"{"shape": [3, 3]}"#);
        assert_eq!(h.grid_descriptor(0).unwrap().shape, vec![3, 3]);
        let before = h.get_value(HEAT_OUTPUT).unwrap().values;
        assert_eq!(before[4], 100.0);
        h.update().unwrap();
        let after = h.get_value(HEAT_OUTPUT).unwrap().values;
        assert!((after[4] - 60.0).abs() < 1e-12);
        for (k, v) in after.iter().enumerate() {
            if k != 4 {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn matches_hand_stencil_on_default_grid() {
        let mut h = heat("{}");
        let mut expected = h.get_value(HEAT_OUTPUT).unwrap().values;
        for _ in 0..20 {
            h.update().unwrap();
            expected = oracle_dirichlet_step(&expected, 8, 8, 0.1);
            let got = h.get_value(HEAT_OUTPUT).unwrap().values;
            for (a, b) in got.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn uniform_field_is_stationary() {
        let mut h = heat(r#"{"initial": 5.0, "hot_spot": 5.0, "boundary_value": 5.0}"#);
        for _ in 0..50 {
            h.update().unwrap();
        }
        assert!(h
            .get_value(HEAT_OUTPUT)
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 5.0));
    }

    #[test]
    fn insulated_conserves_sum() {
        let mut h = heat(r#"{"boundary": "insulated"}"#);
        let total = |h: &Heat2D<f64>| h.get_value(HEAT_OUTPUT).unwrap().values.iter().sum::<f64>();
        let initial = total(&h);
        for _ in 0..200 {
            let before = total(&h);
            h.update().unwrap();
            assert!(((total(&h) - before) / before).abs() < 1e-10);
        }
        assert!(((total(&h) - initial) / initial).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_config() {
        let mut h = Heat2D::<f64>::new();
        let err = h
            .initialize(&config(r#"{"spacing": [-1.0, 1.0]}"#))
            .unwrap_err();
        assert!(err.to_string().contains("spacing"));
        let mut h = Heat2D::<f64>::new();
        let err = h.initialize(&config(r#"{"dt": 0.3}"#)).unwrap_err();
        assert!(matches!(err, BmiError::Config { ref key, .. } if key == "dt"));
        let mut h = Heat2D::<f64>::new();
        assert!(h
            .initialize(&config(r#"{"boundary": "periodic"}"#))
            .is_err());
    }

    #[test]
    fn boundary_input_takes_effect() {
        let mut h = heat(r#"{"shape": [3, 3]}"#);
        h.set_value(
            HEAT_BOUNDARY,
            &crate::bmi::ValueBuffer::new(vec![7.0], "degC"),
        )
        .unwrap();
        assert_eq!(h.get_value(HEAT_BOUNDARY).unwrap().values, vec![7.0]);
        let field = h.get_value(HEAT_OUTPUT).unwrap().values;
        assert_eq!(field[0], 7.0);
        assert_eq!(field[4], 100.0);
    }

    #[test]
    fn single_precision_step() {
        let mut h = Heat2D::<f32>::new();
        h.initialize(&config(r#"{"shape": [3, 3]}"#)).unwrap();
        h.update().unwrap();
        let v = h.get_value(HEAT_OUTPUT).unwrap().values;
        assert!((v[4] - 60.0f32).abs() < 1e-4);
    }
}
