//! Grids, quadrature, diffusion operators, Bessel functions and explicit
//! time stepping shared by the plant and the observer.

pub mod bessel;
pub mod diffusion;
pub mod grid;
pub mod rk4;

pub use bessel::{bessel_i, bessel_i1, bessel_i2};
pub use diffusion::{
    electrolyte_rhs, spherical_diffusion_rhs, spherical_diffusion_rhs_into, ElectrolyteOperator,
};
pub use grid::{radial_moment_integral, PlanarGrid, RadialGrid, Region};
pub use rk4::{rk4_step, Rk4};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time stepping: one model step of `dt` seconds is taken as `substeps`
/// equal RK4 sub-steps, each within the explicit diffusion stability bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    dt: f64,
    substeps: usize,
}

impl StepperConfig {
    /// Chooses the smallest sub-step count with `dt / substeps <= max_substep`.
    pub fn new(dt: f64, max_substep: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Invariant(format!("dt must be positive, got {dt}")));
        }
        if !(max_substep.is_finite() && max_substep > 0.0) {
            return Err(Error::Invariant(format!(
                "stability bound must be positive, got {max_substep}"
            )));
        }
        let substeps = (dt / max_substep).ceil().max(1.0) as usize;
        Ok(Self { dt, substeps })
    }

    /// Explicit sub-step count; fails if the resulting sub-step violates
    /// `max_substep`.
    pub fn with_substeps(dt: f64, substeps: usize, max_substep: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) || substeps == 0 {
            return Err(Error::Invariant(format!(
                "invalid stepper: dt={dt}, substeps={substeps}"
            )));
        }
        let h = dt / substeps as f64;
        if h > max_substep {
            return Err(Error::Invariant(format!(
                "sub-step {h} s exceeds diffusion stability bound {max_substep} s"
            )));
        }
        Ok(Self { dt, substeps })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn substep(&self) -> f64 {
        self.dt / self.substeps as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stepper_respects_bound() {
        let s = StepperConfig::new(0.5, 0.0059).unwrap();
        assert_eq!(s.substeps(), 85);
        assert!(s.substep() <= 0.0059);
        assert_eq!(StepperConfig::new(0.5, 1.0).unwrap().substeps(), 1);
        assert!(StepperConfig::new(0.0, 1.0).is_err());
        assert!(StepperConfig::with_substeps(0.5, 2, 0.1).is_err());
        assert!(StepperConfig::with_substeps(0.5, 5, 0.1).is_ok());
    }
}
