//! Cell parameters, material curves, aging drift and initial conditions.
//!
//! Parameters are loaded from a flat JSON document whose keys carry their SI
//! units (see `docs/params-schema.md`). A [`ParamSet`] is immutable once
//! validated; drifted copies are produced with [`ParamSet::apply_drift`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FARADAY: f64 = 96_485.332_12;
pub const GAS_CONSTANT: f64 = 8.314_462_618;

const BUNDLED_PARAMS: &str = include_str!("../data/default_params.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Electrode {
    Neg,
    Pos,
}

impl Electrode {
    pub fn label(self) -> &'static str {
        match self {
            Electrode::Neg => "neg",
            Electrode::Pos => "pos",
        }
    }
}

/// Geometry, transport and kinetics of one porous electrode.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectrodeParams {
    /// Region thickness `l` (m).
    pub thickness: f64,
    /// Particle radius `R_p` (m).
    pub particle_radius: f64,
    /// Active-material volume fraction `eps_s`.
    pub eps_s: f64,
    /// Electrolyte volume fraction `eps_e`.
    pub eps_e: f64,
    pub brugg: f64,
    /// Solid diffusivity `D_s` (m²/s).
    pub diffusivity: f64,
    /// Reaction rate constant `k0` (A/m² per (mol/m³)^(3α)).
    pub k0: f64,
    /// Film resistance `R_f` (Ω·m²).
    pub film_resistance: f64,
    /// Maximum solid concentration (mol/m³).
    pub c_s_max: f64,
}

impl ElectrodeParams {
    /// Specific interfacial area `a_s = 3 eps_s / R_p` (1/m).
    pub fn a_s(&self) -> f64 {
        3.0 * self.eps_s / self.particle_radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorParams {
    pub thickness: f64,
    pub eps_e: f64,
    pub brugg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectrolyteParams {
    /// Electrolyte diffusivity `D_e` (m²/s).
    pub diffusivity: f64,
    pub t_plus0: f64,
    /// Activity correction factor `1 + d ln f / d ln c_e`, held constant.
    pub t_f: f64,
    /// Conductivity `kappa` (S/m).
    pub conductivity: f64,
    /// Initial (uniform) concentration (mol/m³).
    pub c_e0: f64,
}

/// Stoichiometric windows: `x` for the negative electrode, `y` for the positive.
#[derive(Debug, Clone, PartialEq)]
pub struct StoichWindows {
    pub x0: f64,
    pub x100: f64,
    pub y0: f64,
    pub y100: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalParams {
    /// Lumped heat capacity (J/K).
    pub heat_capacity: f64,
    /// Heat transfer coefficient (W/K).
    pub heat_transfer: f64,
    /// Thermal expansion coefficient of the stack (m/K).
    pub alpha_th: f64,
    /// Expansion reference temperature (K).
    pub t_ref: f64,
    /// Ambient temperature (K).
    pub t_ambient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionParams {
    /// Casing compliance factor; already includes the pouch layer count.
    pub kappa_b: f64,
    /// Number of pouch layers folded into `kappa_b`. Informational.
    pub n_layers: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub neg: ElectrodeParams,
    pub sep: SeparatorParams,
    pub pos: ElectrodeParams,
    /// Electrode plate area `A` (m²), shared by both electrodes.
    pub area: f64,
    pub electrolyte: ElectrolyteParams,
    /// Symmetric charge-transfer coefficient.
    pub alpha: f64,
    pub stoich: StoichWindows,
    pub thermal: ThermalParams,
    pub expansion: ExpansionParams,
    pub faraday: f64,
    pub gas_constant: f64,
}

/// Multiplicative aging drift applied to the plant only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec {
    pub scale_x100: f64,
    pub scale_y0: f64,
    pub scale_eps_s_neg: f64,
}

impl Default for DriftSpec {
    fn default() -> Self {
        Self {
            scale_x100: 1.0,
            scale_y0: 1.0,
            scale_eps_s_neg: 1.0,
        }
    }
}

impl DriftSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("scale_x100", self.scale_x100),
            ("scale_y0", self.scale_y0),
            ("scale_eps_s_neg", self.scale_eps_s_neg),
        ] {
            if !(v > 0.0 && v <= 1.5) {
                return Err(Error::Invariant(format!("{name} out of (0,1.5]")));
            }
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::default()
    }
}

impl ParamSet {
    pub fn electrode(&self, e: Electrode) -> &ElectrodeParams {
        match e {
            Electrode::Neg => &self.neg,
            Electrode::Pos => &self.pos,
        }
    }

    /// Total cell thickness `l^t = l⁻ + l^s + l⁺` (m).
    pub fn total_thickness(&self) -> f64 {
        self.neg.thickness + self.sep.thickness + self.pos.thickness
    }

    /// Nominal capacity (A·h) of the negative stoichiometric window.
    pub fn capacity_ah(&self) -> f64 {
        let n = &self.neg;
        self.faraday
            * n.eps_s
            * n.thickness
            * self.area
            * n.c_s_max
            * (self.stoich.x100 - self.stoich.x0)
            / 3600.0
    }

    /// Current (A) corresponding to the given C-rate.
    pub fn c_rate_current(&self, c_rate: f64) -> f64 {
        c_rate * self.capacity_ah()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("l_neg", self.neg.thickness),
            ("l_sep", self.sep.thickness),
            ("l_pos", self.pos.thickness),
            ("A", self.area),
            ("R_p_neg", self.neg.particle_radius),
            ("R_p_pos", self.pos.particle_radius),
            ("D_s_neg", self.neg.diffusivity),
            ("D_s_pos", self.pos.diffusivity),
            ("D_e", self.electrolyte.diffusivity),
            ("kappa", self.electrolyte.conductivity),
            ("k0_neg", self.neg.k0),
            ("k0_pos", self.pos.k0),
            ("c_s_max_neg", self.neg.c_s_max),
            ("c_s_max_pos", self.pos.c_s_max),
            ("c_e0", self.electrolyte.c_e0),
            ("C_th", self.thermal.heat_capacity),
            ("h", self.thermal.heat_transfer),
            ("T0", self.thermal.t_ref),
            ("T_a", self.thermal.t_ambient),
            ("alpha", self.alpha),
            ("t_f", self.electrolyte.t_f),
            ("F", self.faraday),
            ("R_gas", self.gas_constant),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Invariant(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let non_negative = [
            ("R_f_neg", self.neg.film_resistance),
            ("R_f_pos", self.pos.film_resistance),
            ("alpha_th", self.thermal.alpha_th),
            ("kappa_b", self.expansion.kappa_b),
            ("brugg_neg", self.neg.brugg),
            ("brugg_sep", self.sep.brugg),
            ("brugg_pos", self.pos.brugg),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Invariant(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        let fractions = [
            ("eps_s_neg", self.neg.eps_s),
            ("eps_s_pos", self.pos.eps_s),
            ("eps_e_neg", self.neg.eps_e),
            ("eps_e_sep", self.sep.eps_e),
            ("eps_e_pos", self.pos.eps_e),
            ("t_plus0", self.electrolyte.t_plus0),
        ];
        for (name, v) in fractions {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Invariant(format!("{name} out of (0,1)")));
            }
        }
        let s = &self.stoich;
        if !(0.0 < s.x0 && s.x0 < s.x100 && s.x100 <= 1.0) {
            return Err(Error::Invariant(format!(
                "negative window requires 0 < x0 < x100 <= 1, got x0={}, x100={}",
                s.x0, s.x100
            )));
        }
        if !(0.0 < s.y100 && s.y100 < s.y0 && s.y0 <= 1.0) {
            return Err(Error::Invariant(format!(
                "positive window requires 0 < y100 < y0 <= 1, got y100={}, y0={}",
                s.y100, s.y0
            )));
        }
        Ok(())
    }

    /// Copy of `self` with the stoichiometric windows and negative active
    /// fraction scaled by `drift`.
    pub fn apply_drift(&self, drift: &DriftSpec) -> Result<ParamSet> {
        drift.validate()?;
        let mut p = self.clone();
        p.stoich.x100 *= drift.scale_x100;
        p.stoich.y0 *= drift.scale_y0;
        p.neg.eps_s *= drift.scale_eps_s_neg;
        p.validate()?;
        Ok(p)
    }

    /// Uniform initial solid concentrations `(c_s0⁺, c_s0⁻)` for `soc0`.
    pub fn initial_concentrations(&self, soc0: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&soc0) {
            return Err(Error::Invariant(format!("soc0 {soc0} outside [0,1]")));
        }
        let s = &self.stoich;
        let pos = self.pos.c_s_max * ((1.0 - soc0) * s.y0 + soc0 * s.y100);
        let neg = self.neg.c_s_max * ((1.0 - soc0) * s.x0 + soc0 * s.x100);
        Ok((pos, neg))
    }

    /// State of charge implied by the negative-electrode average
    /// concentration. Not clamped.
    pub fn soc_from_avg_concentration(&self, c_avg_neg: f64) -> f64 {
        let s = &self.stoich;
        (c_avg_neg / self.neg.c_s_max - s.x0) / (s.x100 - s.x0)
    }

    /// Parses and validates a parameter document.
    pub fn from_json_str(text: &str) -> Result<(ParamSet, MaterialCurves)> {
        let file: ParamFile =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        file.into_validated()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(ParamSet, MaterialCurves)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    /// The illustrative graphite/NMC parameter set shipped with the crate.
    pub fn bundled() -> (ParamSet, MaterialCurves) {
        Self::from_json_str(BUNDLED_PARAMS).expect("bundled parameter file is valid")
    }

    pub fn bundled_json() -> &'static str {
        BUNDLED_PARAMS
    }
}

/// Loads a parameter file. See [`ParamSet::load`].
pub fn load_params(path: impl AsRef<Path>) -> Result<(ParamSet, MaterialCurves)> {
    ParamSet::load(path)
}

/// Piecewise-linear sampled curve, clamped to its end values outside the
/// sampled range.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Curve {
    pub const MIN_POINTS: usize = 8;

    pub fn new(points: &[[f64; 2]]) -> Result<Self> {
        if points.len() < Self::MIN_POINTS {
            return Err(Error::Invariant(format!(
                "curve needs at least {} points, got {}",
                Self::MIN_POINTS,
                points.len()
            )));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Invariant("curve contains non-finite values".into()));
        }
        if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(Error::Invariant(
                "curve abscissae must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            xs: points.iter().map(|p| p[0]).collect(),
            ys: points.iter().map(|p| p[1]).collect(),
        })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Index `k` of the segment `[x_k, x_{k+1})` containing `x`, with the last
    /// segment closed on the right. `None` outside the sampled range.
    fn segment(&self, x: f64) -> Option<usize> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return None;
        }
        let k = self.xs.partition_point(|&xi| xi <= x);
        Some(k.saturating_sub(1).min(self.xs.len() - 2))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.segment(x) {
            Some(k) => {
                let t = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
                self.ys[k] + t * (self.ys[k + 1] - self.ys[k])
            }
            None if x < self.xs[0] => self.ys[0],
            None => self.ys[self.ys.len() - 1],
        }
    }

    /// Derivative of the interpolant; zero where the curve is clamped.
    pub fn slope(&self, x: f64) -> f64 {
        match self.segment(x) {
            Some(k) => (self.ys[k + 1] - self.ys[k]) / (self.xs[k + 1] - self.xs[k]),
            None => 0.0,
        }
    }

    pub fn is_non_increasing(&self) -> bool {
        self.ys.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.ys.windows(2).all(|w| w[1] >= w[0])
    }
}

/// Open-circuit potentials (vs. stoichiometry) and volumetric strain
/// functions (vs. concentration in mol/m³).
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialCurves {
    pub u_pos: Curve,
    pub u_neg: Curve,
    pub dv_pos: Curve,
    pub dv_neg: Curve,
}

impl MaterialCurves {
    pub fn ocp(&self, e: Electrode) -> &Curve {
        match e {
            Electrode::Neg => &self.u_neg,
            Electrode::Pos => &self.u_pos,
        }
    }

    pub fn strain(&self, e: Electrode) -> &Curve {
        match e {
            Electrode::Neg => &self.dv_neg,
            Electrode::Pos => &self.dv_pos,
        }
    }
}

fn default_brugg() -> f64 {
    1.5
}
fn default_t_f() -> f64 {
    1.0
}
fn default_alpha() -> f64 {
    0.5
}
fn default_n_layers() -> u32 {
    1
}
fn default_faraday() -> f64 {
    FARADAY
}
fn default_gas_constant() -> f64 {
    GAS_CONSTANT
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveTables {
    #[serde(rename = "U_pos_V")]
    u_pos: Vec<[f64; 2]>,
    #[serde(rename = "U_neg_V")]
    u_neg: Vec<[f64; 2]>,
    #[serde(rename = "dV_pos")]
    dv_pos: Vec<[f64; 2]>,
    #[serde(rename = "dV_neg")]
    dv_neg: Vec<[f64; 2]>,
}

/// On-disk layout. Field names carry SI units.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamFile {
    #[serde(default)]
    description: Option<String>,

    l_neg_m: f64,
    l_sep_m: f64,
    l_pos_m: f64,
    #[serde(rename = "A_m2")]
    area_m2: f64,
    #[serde(rename = "R_p_neg_m")]
    r_p_neg_m: f64,
    #[serde(rename = "R_p_pos_m")]
    r_p_pos_m: f64,
    eps_s_neg: f64,
    eps_s_pos: f64,
    eps_e_neg: f64,
    eps_e_sep: f64,
    eps_e_pos: f64,
    #[serde(default = "default_brugg")]
    brugg_neg: f64,
    #[serde(default = "default_brugg")]
    brugg_sep: f64,
    #[serde(default = "default_brugg")]
    brugg_pos: f64,

    #[serde(rename = "D_s_neg_m2_per_s")]
    d_s_neg: f64,
    #[serde(rename = "D_s_pos_m2_per_s")]
    d_s_pos: f64,
    #[serde(rename = "D_e_m2_per_s")]
    d_e: f64,
    t_plus0: f64,
    #[serde(default = "default_t_f")]
    t_f: f64,
    #[serde(rename = "kappa_S_per_m")]
    kappa: f64,

    k0_neg_si: f64,
    k0_pos_si: f64,
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(rename = "R_f_neg_ohm_m2")]
    r_f_neg: f64,
    #[serde(rename = "R_f_pos_ohm_m2")]
    r_f_pos: f64,
    c_s_max_neg_mol_per_m3: f64,
    c_s_max_pos_mol_per_m3: f64,
    c_e0_mol_per_m3: f64,

    x0: f64,
    x100: f64,
    y0: f64,
    y100: f64,

    #[serde(rename = "C_th_J_per_K")]
    c_th: f64,
    #[serde(rename = "h_W_per_K")]
    h: f64,
    #[serde(rename = "alpha_th_m_per_K")]
    alpha_th: f64,
    #[serde(rename = "T0_K")]
    t0: f64,
    #[serde(rename = "T_a_K", default)]
    t_a: Option<f64>,

    kappa_b: f64,
    #[serde(default = "default_n_layers")]
    n_layers: u32,

    #[serde(rename = "F_C_per_mol", default = "default_faraday")]
    faraday: f64,
    #[serde(rename = "R_gas_J_per_mol_K", default = "default_gas_constant")]
    gas_constant: f64,

    curves: CurveTables,
}

impl ParamFile {
    fn into_validated(self) -> Result<(ParamSet, MaterialCurves)> {
        let p = ParamSet {
            neg: ElectrodeParams {
                thickness: self.l_neg_m,
                particle_radius: self.r_p_neg_m,
                eps_s: self.eps_s_neg,
                eps_e: self.eps_e_neg,
                brugg: self.brugg_neg,
                diffusivity: self.d_s_neg,
                k0: self.k0_neg_si,
                film_resistance: self.r_f_neg,
                c_s_max: self.c_s_max_neg_mol_per_m3,
            },
            sep: SeparatorParams {
                thickness: self.l_sep_m,
                eps_e: self.eps_e_sep,
                brugg: self.brugg_sep,
            },
            pos: ElectrodeParams {
                thickness: self.l_pos_m,
                particle_radius: self.r_p_pos_m,
                eps_s: self.eps_s_pos,
                eps_e: self.eps_e_pos,
                brugg: self.brugg_pos,
                diffusivity: self.d_s_pos,
                k0: self.k0_pos_si,
                film_resistance: self.r_f_pos,
                c_s_max: self.c_s_max_pos_mol_per_m3,
            },
            area: self.area_m2,
            electrolyte: ElectrolyteParams {
                diffusivity: self.d_e,
                t_plus0: self.t_plus0,
                t_f: self.t_f,
                conductivity: self.kappa,
                c_e0: self.c_e0_mol_per_m3,
            },
            alpha: self.alpha,
            stoich: StoichWindows {
                x0: self.x0,
                x100: self.x100,
                y0: self.y0,
                y100: self.y100,
            },
            thermal: ThermalParams {
                heat_capacity: self.c_th,
                heat_transfer: self.h,
                alpha_th: self.alpha_th,
                t_ref: self.t0,
                t_ambient: self.t_a.unwrap_or(self.t0),
            },
            expansion: ExpansionParams {
                kappa_b: self.kappa_b,
                n_layers: self.n_layers,
            },
            faraday: self.faraday,
            gas_constant: self.gas_constant,
        };
        p.validate()?;

        let curve = |name: &str, pts: &[[f64; 2]]| {
            Curve::new(pts).map_err(|e| Error::Invariant(format!("curves.{name}: {e}")))
        };
        let curves = MaterialCurves {
            u_pos: curve("U_pos_V", &self.curves.u_pos)?,
            u_neg: curve("U_neg_V", &self.curves.u_neg)?,
            dv_pos: curve("dV_pos", &self.curves.dv_pos)?,
            dv_neg: curve("dV_neg", &self.curves.dv_neg)?,
        };
        if !curves.u_neg.is_non_increasing() {
            return Err(Error::Invariant(
                "curves.U_neg_V must be non-increasing".into(),
            ));
        }
        if !curves.u_pos.is_non_increasing() {
            return Err(Error::Invariant(
                "curves.U_pos_V must be non-increasing".into(),
            ));
        }
        Ok((p, curves))
    }
}
