//! Cascaded state observer: voltage inversion, backstepping observer for the
//! positive particle, open-loop electrolyte observer, expansion inversion and
//! an average-injection observer for the negative particle.

mod gains;
mod inversion;

pub use gains::{compute_backstepping_gains, GainSettings, Mode, ObserverGains};
pub use inversion::{
    expansion_inversion_step, gradient_flow, h_e, h_v, inverted_neg_displacement, phi_e, phi_v,
    voltage_inversion_step, InversionUpdate, VoltageContext, CLAMP_MARGIN, INVERSION_SUBSTEPS,
};

use crate::error::{Error, Result};
use crate::numerics::{spherical_diffusion_rhs_into, Rk4, StepperConfig};
use crate::params::Electrode;
use crate::plant::{intercalation_flux, voltage_map, CellModel, PlantState};

/// One sample of the measured signals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub v_t: f64,
    pub t_b: f64,
    pub dt_b: f64,
    pub current: f64,
    pub t: f64,
}

impl Measurement {
    fn check(&self) -> Result<()> {
        let fields = [self.v_t, self.t_b, self.dt_b, self.current, self.t];
        match fields.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState {
    pub chat_s_pos: Vec<f64>,
    pub chat_s_neg: Vec<f64>,
    pub chat_e: Vec<f64>,
    /// Inverted positive surface concentration.
    pub check_css_pos: f64,
    /// Inverted negative average concentration.
    pub check_csavg_neg: f64,
    /// Initial positive average, the lithium reference in voltage-only mode.
    pub ref_avg_pos: f64,
    /// Initial negative average.
    pub ref_avg_neg: f64,
}

impl ObserverState {
    /// Uniform solids at `soc0`, electrolyte at rest.
    pub fn uniform(model: &CellModel, soc0: f64) -> Result<Self> {
        Ok(Self::from_plant(&PlantState::uniform(model, soc0)?, model))
    }

    /// Starts the observer exactly at a plant state.
    pub fn from_plant(s: &PlantState, model: &CellModel) -> Self {
        let avg_pos = model.pos_grid.volume_average(&s.c_s_pos);
        let avg_neg = model.neg_grid.volume_average(&s.c_s_neg);
        Self {
            chat_s_pos: s.c_s_pos.clone(),
            chat_s_neg: s.c_s_neg.clone(),
            chat_e: s.c_e.clone(),
            check_css_pos: s.surface(Electrode::Pos),
            check_csavg_neg: avg_neg,
            ref_avg_pos: avg_pos,
            ref_avg_neg: avg_neg,
        }
    }

    pub fn css_pos(&self) -> f64 {
        self.chat_s_pos[self.chat_s_pos.len() - 1]
    }

    pub fn css_neg(&self) -> f64 {
        self.chat_s_neg[self.chat_s_neg.len() - 1]
    }
}

/// Which clamps fired during a step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClampFlags {
    pub voltage_inversion: bool,
    pub expansion_inversion: bool,
    pub states: bool,
}

impl ClampFlags {
    pub fn any(&self) -> bool {
        self.voltage_inversion || self.expansion_inversion || self.states
    }

    /// Packed as bit 0 voltage inversion, bit 1 expansion inversion, bit 2 states.
    pub fn bits(&self) -> u8 {
        self.voltage_inversion as u8
            | (self.expansion_inversion as u8) << 1
            | (self.states as u8) << 2
    }

    pub fn from_bits(b: u8) -> Self {
        Self {
            voltage_inversion: b & 1 != 0,
            expansion_inversion: b & 2 != 0,
            states: b & 4 != 0,
        }
    }
}

/// Estimated outputs after a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverOutputs {
    pub v_t: f64,
    pub dt_b: f64,
    pub css_neg: f64,
    pub css_pos: f64,
    pub csavg_neg: f64,
    pub csavg_pos: f64,
    pub soc: f64,
    pub check_css_pos: f64,
    pub check_csavg_neg: f64,
    pub clamps: ClampFlags,
}

/// `dĉ⁺/dt`: plant diffusion with distributed injection `p̄(r) ẽ` and the
/// surface gradient raised by `p̄₀ ẽ`, where `ẽ = č_ss⁺ - ĉ_ss⁺`.
pub fn positive_observer_rhs(
    model: &CellModel,
    chat_s_pos: &[f64],
    current: f64,
    check_css_pos: f64,
    gains: &ObserverGains,
    out: &mut [f64],
) {
    let d = model.params.pos.diffusivity;
    let innovation = check_css_pos - chat_s_pos[chat_s_pos.len() - 1];
    let flux =
        intercalation_flux(current, Electrode::Pos, &model.params) - d * gains.p0 * innovation;
    spherical_diffusion_rhs_into(&model.pos_grid, chat_s_pos, d, flux, out);
    if innovation != 0.0 {
        for (o, p) in out.iter_mut().zip(&gains.p_bar) {
            *o += p * innovation;
        }
    }
}

/// `dĉ_e/dt`: the plant's electrolyte operator, unchanged.
pub fn electrolyte_observer_rhs(model: &CellModel, chat_e: &[f64], current: f64, out: &mut [f64]) {
    model.electrolyte.rhs_into(chat_e, current, out);
}

/// `dĉ⁻/dt`: plant diffusion plus uniform injection `k⁻ (č_avg - ĉ_avg)`.
pub fn negative_observer_rhs(
    model: &CellModel,
    chat_s_neg: &[f64],
    current: f64,
    check_csavg_neg: f64,
    k_neg: f64,
    out: &mut [f64],
) {
    let flux = intercalation_flux(current, Electrode::Neg, &model.params);
    spherical_diffusion_rhs_into(
        &model.neg_grid,
        chat_s_neg,
        model.params.neg.diffusivity,
        flux,
        out,
    );
    let injection = k_neg * (check_csavg_neg - model.neg_grid.volume_average(chat_s_neg));
    if injection != 0.0 {
        out.iter_mut().for_each(|o| *o += injection);
    }
}

/// Negative average implied by lithium conservation against the
/// observer's initial inventory.
pub fn lithium_balance_neg(model: &CellModel, state: &ObserverState, chat_avg_pos: f64) -> f64 {
    let p = &model.params;
    let ratio = p.pos.eps_s * p.pos.thickness / (p.neg.eps_s * p.neg.thickness);
    state.ref_avg_neg + ratio * (state.ref_avg_pos - chat_avg_pos)
}

/// Observer with its nominal model, gains and time stepping.
#[derive(Debug, Clone)]
pub struct Observer {
    model: CellModel,
    gains: ObserverGains,
    stepper: StepperConfig,
    inversion_substeps: usize,
}

impl Observer {
    pub fn new(model: CellModel, gains: ObserverGains, stepper: StepperConfig) -> Result<Self> {
        if gains.p_bar.len() != model.pos_grid.n_nodes() {
            return Err(Error::Invariant(format!(
                "gain kernel has {} entries, positive grid has {} nodes",
                gains.p_bar.len(),
                model.pos_grid.n_nodes()
            )));
        }
        let stepper = StepperConfig::with_substeps(
            stepper.dt(),
            stepper.substeps(),
            model.max_stable_substep(),
        )?;
        Ok(Self {
            model,
            gains,
            stepper,
            inversion_substeps: INVERSION_SUBSTEPS,
        })
    }

    /// Standard gains for `mode` and the model's own stable stepper.
    pub fn standard(model: CellModel, mode: Mode, dt: f64) -> Result<Self> {
        let gains = ObserverGains::standard(mode, &model.pos_grid, model.params.pos.diffusivity)?;
        let stepper = model.stepper(dt)?;
        Self::new(model, gains, stepper)
    }

    pub fn model(&self) -> &CellModel {
        &self.model
    }

    pub fn gains(&self) -> &ObserverGains {
        &self.gains
    }

    pub fn mode(&self) -> Mode {
        self.gains.mode
    }

    pub fn stepper(&self) -> &StepperConfig {
        &self.stepper
    }

    fn integrate<F>(&self, y: &mut [f64], mut rhs: F) -> Result<()>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let mut rk = Rk4::new(y.len());
        let h = self.stepper.substep();
        for _ in 0..self.stepper.substeps() {
            rk.step(y, h, |y, out| {
                rhs(y, out);
                Ok(())
            })?;
        }
        Ok(())
    }

    /// Advances the observer over one step ending at `meas.t`.
    pub fn step(
        &self,
        s: &ObserverState,
        meas: &Measurement,
    ) -> Result<(ObserverState, ObserverOutputs)> {
        meas.check().map_err(|e| Error::Observer {
            t: meas.t,
            detail: format!("measurement: {e}"),
        })?;
        self.step_inner(s, meas).map_err(|e| match e {
            Error::Observer { .. } => e,
            other => Error::Observer {
                t: meas.t,
                detail: other.to_string(),
            },
        })
    }

    fn step_inner(
        &self,
        s: &ObserverState,
        meas: &Measurement,
    ) -> Result<(ObserverState, ObserverOutputs)> {
        let m = &self.model;
        let g = &self.gains;
        let dt = self.stepper.dt();
        let current = meas.current;
        let mut next = s.clone();
        let mut clamps = ClampFlags::default();

        // voltage inversion
        let ctx = VoltageContext {
            css_neg: s.css_neg(),
            electrolyte: m.electrolyte_summary(&s.chat_e),
            current,
            temperature: meas.t_b,
        };
        let vi = voltage_inversion_step(
            m,
            s.check_css_pos,
            meas.v_t,
            &ctx,
            g.gamma_v,
            dt,
            self.inversion_substeps,
        )?;
        next.check_css_pos = vi.value;
        clamps.voltage_inversion = vi.clamped;

        // positive observer
        let check = next.check_css_pos;
        self.integrate(&mut next.chat_s_pos, |y, out| {
            positive_observer_rhs(m, y, current, check, g, out)
        })?;

        // electrolyte observer
        self.integrate(&mut next.chat_e, |y, out| {
            electrolyte_observer_rhs(m, y, current, out)
        })?;

        // negative-electrode reference
        match g.mode {
            Mode::VPlusExp => {
                let ei = expansion_inversion_step(
                    m,
                    s.check_csavg_neg,
                    &s.chat_s_neg,
                    &next.chat_s_pos,
                    meas.t_b,
                    meas.dt_b,
                    g.gamma_e,
                    dt,
                    self.inversion_substeps,
                )?;
                next.check_csavg_neg = ei.value;
                clamps.expansion_inversion = ei.clamped;
            }
            Mode::VOnly => {
                let avg_pos = m.pos_grid.volume_average(&next.chat_s_pos);
                next.check_csavg_neg = lithium_balance_neg(m, s, avg_pos);
            }
        }

        // negative observer
        let check = next.check_csavg_neg;
        self.integrate(&mut next.chat_s_neg, |y, out| {
            negative_observer_rhs(m, y, current, check, g.k_neg, out)
        })?;

        clamps.states = clamp_states(&mut next, m);
        let out = self.outputs(&next, meas, clamps)?;
        Ok((next, out))
    }

    /// Estimated outputs of a state under the given measurement.
    pub fn outputs(
        &self,
        s: &ObserverState,
        meas: &Measurement,
        clamps: ClampFlags,
    ) -> Result<ObserverOutputs> {
        let m = &self.model;
        let v = voltage_map(
            s.css_pos(),
            s.css_neg(),
            &m.electrolyte_summary(&s.chat_e),
            meas.current,
            meas.t_b,
            &m.params,
            &m.curves,
        )?;
        let dt_pos = m.electrode_expansion(Electrode::Pos, &s.chat_s_pos);
        let dt_neg = m.electrode_expansion(Electrode::Neg, &s.chat_s_neg);
        let csavg_neg = m.neg_grid.volume_average(&s.chat_s_neg);
        Ok(ObserverOutputs {
            v_t: v.v_t,
            dt_b: m.params.expansion.kappa_b * (dt_pos + dt_neg) + m.thermal_expansion(meas.t_b),
            css_neg: s.css_neg(),
            css_pos: s.css_pos(),
            csavg_neg,
            csavg_pos: m.pos_grid.volume_average(&s.chat_s_pos),
            soc: m.params.soc_from_avg_concentration(csavg_neg),
            check_css_pos: s.check_css_pos,
            check_csavg_neg: s.check_csavg_neg,
            clamps,
        })
    }
}

fn clamp_states(s: &mut ObserverState, m: &CellModel) -> bool {
    let mut hit = false;
    let mut clamp = |v: &mut [f64], lo: f64, hi: f64| {
        for c in v.iter_mut() {
            if *c < lo || *c > hi {
                *c = c.clamp(lo, hi);
                hit = true;
            }
        }
    };
    let p = &m.params;
    clamp(
        &mut s.chat_s_pos,
        CLAMP_MARGIN * p.pos.c_s_max,
        (1.0 - CLAMP_MARGIN) * p.pos.c_s_max,
    );
    clamp(
        &mut s.chat_s_neg,
        CLAMP_MARGIN * p.neg.c_s_max,
        (1.0 - CLAMP_MARGIN) * p.neg.c_s_max,
    );
    clamp(
        &mut s.chat_e,
        CLAMP_MARGIN * p.electrolyte.c_e0,
        f64::INFINITY,
    );
    hit
}
