//! Single-particle lithium-ion cell model with electrolyte, thermal and
//! expansion dynamics, and a state observer that combines terminal voltage
//! with expansion and temperature measurements.
//!
//! Current convention throughout: positive current charges the cell.

pub mod error;
pub mod harness;
pub mod numerics;
pub mod observer;
pub mod params;
pub mod plant;

pub use error::{Error, Result};
pub use params::{load_params, DriftSpec, Electrode, MaterialCurves, ParamSet};
