use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{bessel_i1, bessel_i2, RadialGrid};

/// Below this kernel argument the Bessel quotients lose precision and the
/// entire power series in `λ(r²/R² - 1)` is used instead.
const SERIES_SWITCH: f64 = 1e-3;

/// Which measurements feed the negative-electrode estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Voltage only; negative electrode from lithium bookkeeping.
    #[serde(rename = "v-only")]
    VOnly,
    /// Voltage, expansion and temperature.
    #[serde(rename = "v+exp")]
    VPlusExp,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::VOnly => "v-only",
            Mode::VPlusExp => "v+exp",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v-only" => Ok(Mode::VOnly),
            "v+exp" => Ok(Mode::VPlusExp),
            other => Err(Error::Invariant(format!(
                "unknown observer mode {other:?} (expected v-only or v+exp)"
            ))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Scalar gain settings; the kernel is derived from these.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainSettings {
    pub lambda: f64,
    pub gamma_v: f64,
    pub gamma_e: f64,
    pub k_neg: f64,
}

impl Default for GainSettings {
    fn default() -> Self {
        Self {
            lambda: ObserverGains::LAMBDA,
            gamma_v: ObserverGains::GAMMA_V,
            gamma_e: ObserverGains::GAMMA_E,
            k_neg: ObserverGains::K_NEG,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverGains {
    pub lambda: f64,
    pub gamma_v: f64,
    pub gamma_e: f64,
    /// Uniform injection gain of the negative observer (1/s).
    pub k_neg: f64,
    /// Distributed kernel on the positive radial grid (1/s).
    pub p_bar: Vec<f64>,
    /// Boundary gain (1/m).
    pub p0: f64,
    pub mode: Mode,
}

impl ObserverGains {
    pub const LAMBDA: f64 = -20.0;
    pub const GAMMA_V: f64 = 1e8;
    pub const GAMMA_E: f64 = 1e22;
    pub const K_NEG: f64 = 0.01;

    pub fn new(
        lambda: f64,
        gamma_v: f64,
        gamma_e: f64,
        k_neg: f64,
        mode: Mode,
        grid: &RadialGrid,
        d_s_pos: f64,
    ) -> Result<Self> {
        for (name, v) in [("gamma_v", gamma_v), ("gamma_e", gamma_e), ("k_neg", k_neg)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Invariant(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        let (p_bar, p0) = compute_backstepping_gains(lambda, grid, d_s_pos)?;
        Ok(Self {
            lambda,
            gamma_v,
            gamma_e,
            k_neg,
            p_bar,
            p0,
            mode,
        })
    }

    /// Operating gains used for every reported run.
    pub fn standard(mode: Mode, grid: &RadialGrid, d_s_pos: f64) -> Result<Self> {
        Self::from_settings(&GainSettings::default(), mode, grid, d_s_pos)
    }

    pub fn from_settings(
        g: &GainSettings,
        mode: Mode,
        grid: &RadialGrid,
        d_s_pos: f64,
    ) -> Result<Self> {
        Self::new(g.lambda, g.gamma_v, g.gamma_e, g.k_neg, mode, grid, d_s_pos)
    }
}

/// Backstepping output-injection gains for the positive particle.
///
/// Returns the kernel `p̄(r_i)` on every node and the boundary gain
/// `p̄₀ = (3 - λ)/(2R)`. The kernel is
/// `p̄ = -λD/(2R² z̄) [I₁(z̄) - (2λ/z̄) I₂(z̄)]`, `z̄ = √(λ(r²/R² - 1))`,
/// which is an entire function of `λ(r²/R² - 1)`; near `z̄ = 0` (and for
/// `0 < λ < 1/4`, where `z̄` is imaginary) its power series is summed directly.
pub fn compute_backstepping_gains(
    lambda: f64,
    grid: &RadialGrid,
    d_s_pos: f64,
) -> Result<(Vec<f64>, f64)> {
    if !lambda.is_finite() || lambda >= 0.25 {
        return Err(Error::Invariant(format!(
            "backstepping requires lambda < 1/4, got {lambda}"
        )));
    }
    if !(d_s_pos > 0.0 && d_s_pos.is_finite()) {
        return Err(Error::Invariant(format!(
            "diffusivity must be positive, got {d_s_pos}"
        )));
    }
    let r = grid.radius();
    let scale = -lambda * d_s_pos / (2.0 * r * r);
    let p_bar = grid
        .nodes()
        .map(|rho| {
            let w = lambda * ((rho / r).powi(2) - 1.0);
            if w >= SERIES_SWITCH * SERIES_SWITCH {
                let z = w.sqrt();
                Ok(scale / z * (bessel_i1(z)? - 2.0 * lambda / z * bessel_i2(z)?))
            } else {
                Ok(scale * kernel_series(lambda, w))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((p_bar, (3.0 - lambda) / (2.0 * r)))
}

/// `I₁(z)/z - (2λ/z²) I₂(z)` written as a series in `w = z²`:
/// `Σ (w/4)^k [1/(2 k!(k+1)!) - λ/(2 k!(k+2)!)]`.
fn kernel_series(lambda: f64, w: f64) -> f64 {
    let q = 0.25 * w;
    let mut a = 0.5; // (w/4)^k / (2 k! (k+1)!)
    let mut b = 0.25; // (w/4)^k / (4 k! (k+2)!) times 2
    let mut sum = a - lambda * b;
    for k in 1..40 {
        let kf = k as f64;
        a *= q / (kf * (kf + 1.0));
        b *= q / (kf * (kf + 2.0));
        let term = a - lambda * b;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}
