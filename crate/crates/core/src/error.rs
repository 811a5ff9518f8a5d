use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parameter file schema violation: {0}")]
    Schema(String),

    /// A parameter or configuration value violates a documented invariant.
    #[error("{0}")]
    Invariant(String),

    #[error("non-finite value at component {index}")]
    NonFinite { index: usize },

    #[error("kinetics singular: surface concentration {c_ss} outside (0, {c_s_max})")]
    KineticsSingular { c_ss: f64, c_s_max: f64 },

    #[error("exchange current must be positive, got {0}")]
    NonPositiveExchangeCurrent(f64),

    #[error("plant state out of physical range at t = {t} s: {detail}")]
    PlantOutOfRange { t: f64, detail: String },

    #[error("observer step failed at t = {t} s: {detail}")]
    Observer { t: f64, detail: String },

    #[error("bessel argument {0} outside [0, 50]")]
    BesselDomain(f64),

    #[error("expansion inversion undefined: kappa_b = 0")]
    ExpansionInversionUndefined,

    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;
