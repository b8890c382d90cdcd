//! Reference models implementing the component contract.

mod doubles;
mod forcing;
mod heat;
mod lv;

pub use doubles::{BadNameSource, NanSource};
pub use forcing::{forcing_value, Forcing, ForcingModel};
pub use heat::{ftcs_step, BoundaryMode, Heat2D, Heat2DModel, StencilCoefficients};
pub use lv::{predator_step, prey_step, LvPredator, LvPredatorModel, LvPrey, LvPreyModel};

pub const HEAT_OUTPUT: &str = "plate_surface__temperature";
pub const HEAT_BOUNDARY: &str = "plate_surface_boundary__temperature";
pub const PREY_DENSITY: &str = "ecosystem_prey__population_density";
pub const PREDATOR_DENSITY: &str = "ecosystem_predator__population_density";
pub const FORCING_OUTPUT: &str = "atmosphere_bottom_air__temperature";
