//! Component-based model coupling.
//!
//! The crate is organised bottom-up:
//!
//! * [`standard_names`] parses and matches the controlled-vocabulary labels
//!   components use to advertise their inputs and outputs.
//! * [`bmi`] is the framework-agnostic component contract together with the
//!   lifecycle adapter that enforces it.
//! * [`components`] holds the reference models (2D heat diffusion, a split
//!   Lotka-Volterra pair, a sinusoidal forcing source) plus fault-injection
//!   doubles used by the smoke tester.
//! * [`mediators`] converts units, maps between grids, interpolates in time
//!   and writes text output.
//! * [`coupler`] loads compositions, validates them and runs them to a
//!   shared clock.
//! * [`registry`] serves component metadata and formats software citations.
//!
//! Numerical code is generic over [`Scalar`]; the aliases below fix it to
//! `f64`, which is what the coupling engine exchanges.

pub mod bmi;
pub mod components;
pub mod coupler;
pub mod mediators;
pub mod registry;
pub mod scalar;
pub mod standard_names;

pub use scalar::Scalar;
pub use standard_names::{NameError, NameErrorKind, StandardName, Token};

pub type ValueBuffer = bmi::ValueBuffer<f64>;
pub type GridDescriptor = bmi::GridDescriptor<f64>;
pub type Heat2D = components::Heat2D<f64>;
pub type LvPrey = components::LvPrey<f64>;
pub type LvPredator = components::LvPredator<f64>;
pub type Forcing = components::Forcing<f64>;
pub type GridMapPlan = mediators::GridMapPlan<f64>;
pub type TimeSeriesWindow = mediators::TimeSeriesWindow<f64>;

/// A component exchanging `f64` buffers, as driven by the coupler.
pub type DynComponent = Box<dyn bmi::Component<f64>>;
