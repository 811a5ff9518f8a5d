//! Gradient-flow output inversions: positive surface concentration from
//! terminal voltage, negative average concentration from expansion.

use crate::error::{Error, Result};
use crate::params::Electrode;
use crate::plant::{voltage_map, voltage_sensitivity_pos, CellModel, ElectrolyteSummary};

/// Sub-steps of the forward-Euler integration of each inversion law per model step.
pub const INVERSION_SUBSTEPS: usize = 100;

/// Relative margin kept between an inverted concentration and its bounds.
pub const CLAMP_MARGIN: f64 = 1e-6;

/// Result of one integration of an inversion law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionUpdate {
    pub value: f64,
    /// Error signal at the start of the interval.
    pub error: f64,
    /// Regressor at the start of the interval.
    pub regressor: f64,
    pub clamped: bool,
}

/// Everything in the voltage map except the positive surface concentration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageContext {
    pub css_neg: f64,
    pub electrolyte: ElectrolyteSummary,
    pub current: f64,
    pub temperature: f64,
}

/// `h_v(c_ss⁺)` with the remaining inputs held at `ctx`.
pub fn h_v(model: &CellModel, css_pos: f64, ctx: &VoltageContext) -> Result<f64> {
    Ok(voltage_map(
        css_pos,
        ctx.css_neg,
        &ctx.electrolyte,
        ctx.current,
        ctx.temperature,
        &model.params,
        &model.curves,
    )?
    .v_t)
}

/// `φ_v = ∂h_v/∂c_ss⁺`.
pub fn phi_v(model: &CellModel, css_pos: f64, ctx: &VoltageContext) -> Result<f64> {
    voltage_sensitivity_pos(
        css_pos,
        &ctx.electrolyte,
        ctx.current,
        ctx.temperature,
        &model.params,
        &model.curves,
    )
}

fn clamp_bounds(c_max: f64) -> (f64, f64) {
    (CLAMP_MARGIN * c_max, (1.0 - CLAMP_MARGIN) * c_max)
}

/// Integrates `dč/dt = γ φ(č) (y - h(č))` over `dt` with `n_sub` Euler
/// sub-steps, clamping `č` to the open interval `(0, c_max)`.
#[allow(clippy::too_many_arguments)]
pub fn gradient_flow<H, P>(
    start: f64,
    measured: f64,
    gamma: f64,
    dt: f64,
    n_sub: usize,
    c_max: f64,
    h: H,
    phi: P,
) -> Result<InversionUpdate>
where
    H: Fn(f64) -> Result<f64>,
    P: Fn(f64) -> Result<f64>,
{
    let (lo, hi) = clamp_bounds(c_max);
    let mut clamped = false;
    let mut c = start;
    if !(lo..=hi).contains(&c) {
        c = c.clamp(lo, hi);
        clamped = true;
    }
    let error0 = measured - h(c)?;
    let regressor0 = phi(c)?;
    let hs = dt / n_sub as f64;
    for k in 0..n_sub {
        let (e, g) = if k == 0 {
            (error0, regressor0)
        } else {
            (measured - h(c)?, phi(c)?)
        };
        if e == 0.0 {
            continue;
        }
        let next = c + hs * gamma * g * e;
        if !next.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        if next < lo || next > hi {
            clamped = true;
        }
        c = next.clamp(lo, hi);
    }
    Ok(InversionUpdate {
        value: c,
        error: error0,
        regressor: regressor0,
        clamped,
    })
}

/// Advances the inverted positive surface concentration `č_ss⁺` by `dt`
/// toward agreement with the measured terminal voltage.
pub fn voltage_inversion_step(
    model: &CellModel,
    check_css_pos: f64,
    v_measured: f64,
    ctx: &VoltageContext,
    gamma_v: f64,
    dt: f64,
    n_sub: usize,
) -> Result<InversionUpdate> {
    gradient_flow(
        check_css_pos,
        v_measured,
        gamma_v,
        dt,
        n_sub,
        model.params.pos.c_s_max,
        |c| h_v(model, c, ctx),
        |c| phi_v(model, c, ctx),
    )
}

/// Negative-electrode surface displacement of the profile
/// `c̃(r) + c_avg`: `h_e = (1/R²) ∫ ρ² ΔV⁻(c̃ + c_avg) dρ`.
pub fn h_e(model: &CellModel, tilde: &[f64], c_avg: f64) -> f64 {
    let g = &model.neg_grid;
    let curve = &model.curves.dv_neg;
    let r = g.radius();
    g.weights()
        .iter()
        .zip(tilde)
        .map(|(w, &c)| w * curve.eval(c + c_avg))
        .sum::<f64>()
        / (r * r)
}

/// `φ_e = ∂h_e/∂c_avg = (1/R²) ∫ ρ² ΔV⁻'(c̃ + c_avg) dρ`.
pub fn phi_e(model: &CellModel, tilde: &[f64], c_avg: f64) -> f64 {
    let g = &model.neg_grid;
    let curve = &model.curves.dv_neg;
    let r = g.radius();
    g.weights()
        .iter()
        .zip(tilde)
        .map(|(w, &c)| w * curve.slope(c + c_avg))
        .sum::<f64>()
        / (r * r)
}

/// Negative-electrode surface displacement implied by the measured cell
/// expansion and temperature and the positive-electrode estimate.
pub fn inverted_neg_displacement(
    model: &CellModel,
    chat_s_pos: &[f64],
    t_b: f64,
    dt_b: f64,
) -> Result<f64> {
    let p = &model.params;
    if p.expansion.kappa_b == 0.0 {
        return Err(Error::ExpansionInversionUndefined);
    }
    let dt_th = model.thermal_expansion(t_b);
    let dt_pos = model.electrode_expansion(Electrode::Pos, chat_s_pos);
    let dt_neg = (dt_b - dt_th) / p.expansion.kappa_b - dt_pos;
    Ok(dt_neg / (p.neg.a_s() * p.neg.thickness))
}

/// Advances the inverted negative average concentration `č_s,avg⁻` by `dt`
/// toward agreement with the displacement recovered from expansion.
#[allow(clippy::too_many_arguments)]
pub fn expansion_inversion_step(
    model: &CellModel,
    check_csavg_neg: f64,
    chat_s_neg: &[f64],
    chat_s_pos: &[f64],
    t_b: f64,
    dt_b: f64,
    gamma_e: f64,
    dt: f64,
    n_sub: usize,
) -> Result<InversionUpdate> {
    let u_target = inverted_neg_displacement(model, chat_s_pos, t_b, dt_b)?;
    let avg = model.neg_grid.volume_average(chat_s_neg);
    let tilde: Vec<f64> = chat_s_neg.iter().map(|c| c - avg).collect();
    gradient_flow(
        check_csavg_neg,
        u_target,
        gamma_e,
        dt,
        n_sub,
        model.params.neg.c_s_max,
        |c| Ok(h_e(model, &tilde, c)),
        |c| Ok(phi_e(model, &tilde, c)),
    )
}
