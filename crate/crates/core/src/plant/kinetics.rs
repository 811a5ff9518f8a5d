//! Butler-Volmer kinetics, electrolyte potential and the terminal-voltage
//! output map.
//!
//! Current convention: `current > 0` charges the cell (lithium moves into
//! the negative electrode). Molar fluxes are outward from the particle.

use crate::error::{Error, Result};
use crate::params::{Electrode, MaterialCurves, ParamSet};

/// Outward molar flux at the particle surface (mol/m²/s):
/// `j = ∓ I / (F a_s l A)`, negative into the negative electrode on charge.
pub fn intercalation_flux(current: f64, electrode: Electrode, p: &ParamSet) -> f64 {
    let e = p.electrode(electrode);
    let magnitude = current / (p.faraday * e.a_s() * e.thickness * p.area);
    match electrode {
        Electrode::Neg => -magnitude,
        Electrode::Pos => magnitude,
    }
}

/// Exchange current density `i0 = k0 c̄_e^α (c_max - c_ss)^α c_ss^α` (A/m²).
pub fn exchange_current(
    c_e_bar: f64,
    c_ss: f64,
    electrode: Electrode,
    p: &ParamSet,
) -> Result<f64> {
    let e = p.electrode(electrode);
    if !(c_ss > 0.0 && c_ss < e.c_s_max) {
        return Err(Error::KineticsSingular {
            c_ss,
            c_s_max: e.c_s_max,
        });
    }
    if c_e_bar.is_nan() || c_e_bar <= 0.0 {
        return Err(Error::Invariant(format!(
            "electrolyte concentration must be positive, got {c_e_bar}"
        )));
    }
    let a = p.alpha;
    Ok(e.k0 * c_e_bar.powf(a) * (e.c_s_max - c_ss).powf(a) * c_ss.powf(a))
}

/// Closed-form inverse of symmetric Butler-Volmer:
/// `η = (R T / (α F)) asinh(F j / (2 i0))`.
pub fn overpotential(j: f64, i0: f64, temperature: f64, p: &ParamSet) -> Result<f64> {
    if i0.is_nan() || i0 <= 0.0 {
        return Err(Error::NonPositiveExchangeCurrent(i0));
    }
    let rt_af = p.gas_constant * temperature / (p.alpha * p.faraday);
    Ok(rt_af * (p.faraday * j / (2.0 * i0)).asinh())
}

/// Forward Butler-Volmer: `j = (i0/F)(e^{αFη/RT} - e^{-αFη/RT})`.
pub fn butler_volmer_flux(eta: f64, i0: f64, temperature: f64, p: &ParamSet) -> f64 {
    let f = p.alpha * p.faraday / (p.gas_constant * temperature);
    i0 / p.faraday * ((f * eta).exp() - (-f * eta).exp())
}

/// Electrolyte potential drop `Φ_e(l^t) - Φ_e(0)` (V) given the boundary
/// concentrations. Ohmic term uses the current density `I/A`.
pub fn electrolyte_potential(
    c_e_0: f64,
    c_e_l: f64,
    current: f64,
    temperature: f64,
    p: &ParamSet,
) -> f64 {
    let i_discharge = -current / p.area;
    let resistance = p.neg.thickness / (2.0 * p.neg.eps_e.powf(p.neg.brugg))
        + p.sep.thickness / p.sep.eps_e.powf(p.sep.brugg)
        + p.pos.thickness / (2.0 * p.pos.eps_e.powf(p.pos.brugg));
    let ohmic = -resistance * i_discharge / p.electrolyte.conductivity;
    let diffusion = 2.0 * p.gas_constant * temperature / p.faraday
        * (1.0 - p.electrolyte.t_plus0)
        * p.electrolyte.t_f
        * (c_e_l.ln() - c_e_0.ln());
    ohmic + diffusion
}

/// Electrolyte quantities the voltage map needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectrolyteSummary {
    /// Mean over the negative region.
    pub mean_neg: f64,
    /// Mean over the positive region.
    pub mean_pos: f64,
    /// Concentration at `x = 0`.
    pub at_neg_end: f64,
    /// Concentration at `x = l^t`.
    pub at_pos_end: f64,
}

impl ElectrolyteSummary {
    pub fn uniform(c: f64) -> Self {
        Self {
            mean_neg: c,
            mean_pos: c,
            at_neg_end: c,
            at_pos_end: c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageBreakdown {
    pub v_t: f64,
    pub ocv: f64,
    pub eta_neg: f64,
    pub eta_pos: f64,
    pub phi_e: f64,
    pub film_neg: f64,
    pub film_pos: f64,
}

/// Terminal voltage
/// `U⁺ + η⁺ + V_R⁺ - U⁻ - η⁻ - V_R⁻ + Φ_e` from surface concentrations.
pub fn voltage_map(
    css_pos: f64,
    css_neg: f64,
    ce: &ElectrolyteSummary,
    current: f64,
    temperature: f64,
    p: &ParamSet,
    m: &MaterialCurves,
) -> Result<VoltageBreakdown> {
    let j_pos = intercalation_flux(current, Electrode::Pos, p);
    let j_neg = intercalation_flux(current, Electrode::Neg, p);
    let i0_pos = exchange_current(ce.mean_pos, css_pos, Electrode::Pos, p)?;
    let i0_neg = exchange_current(ce.mean_neg, css_neg, Electrode::Neg, p)?;
    let eta_pos = overpotential(j_pos, i0_pos, temperature, p)?;
    let eta_neg = overpotential(j_neg, i0_neg, temperature, p)?;
    let film_pos = p.pos.film_resistance * p.faraday * j_pos;
    let film_neg = p.neg.film_resistance * p.faraday * j_neg;
    let ocv = m.u_pos.eval(css_pos / p.pos.c_s_max) - m.u_neg.eval(css_neg / p.neg.c_s_max);
    let phi_e = electrolyte_potential(ce.at_neg_end, ce.at_pos_end, current, temperature, p);
    Ok(VoltageBreakdown {
        v_t: ocv + eta_pos + film_pos - eta_neg - film_neg + phi_e,
        ocv,
        eta_neg,
        eta_pos,
        phi_e,
        film_neg,
        film_pos,
    })
}

/// `∂V_t/∂c_ss⁺` at fixed negative surface, electrolyte, current and
/// temperature: OCP slope plus the `i0`-mediated overpotential sensitivity.
pub fn voltage_sensitivity_pos(
    css_pos: f64,
    ce: &ElectrolyteSummary,
    current: f64,
    temperature: f64,
    p: &ParamSet,
    m: &MaterialCurves,
) -> Result<f64> {
    let c_max = p.pos.c_s_max;
    let j = intercalation_flux(current, Electrode::Pos, p);
    let i0 = exchange_current(ce.mean_pos, css_pos, Electrode::Pos, p)?;
    let x = p.faraday * j / (2.0 * i0);
    // dη/dc = -(RT/F) x/√(1+x²) (1/c - 1/(c_max - c))
    let d_eta = -(p.gas_constant * temperature / p.faraday) * x / (1.0 + x * x).sqrt()
        * (1.0 / css_pos - 1.0 / (c_max - css_pos));
    Ok(m.u_pos.slope(css_pos / c_max) / c_max + d_eta)
}

/// Lumped thermal balance `dT_b/dt` with Joule heat `I (V_t - OCV)`.
pub fn thermal_rhs(t_b: f64, current: f64, v_t: f64, ocv: f64, p: &ParamSet) -> f64 {
    let th = &p.thermal;
    (-th.heat_transfer * (t_b - th.t_ambient) + current * (v_t - ocv)) / th.heat_capacity
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bundled() -> (ParamSet, MaterialCurves) {
        ParamSet::bundled()
    }

    #[test]
    fn flux_vanishes_at_rest_and_scales_inversely_with_area() {
        let (mut p, _) = bundled();
        assert_eq!(intercalation_flux(0.0, Electrode::Neg, &p), 0.0);
        let j = intercalation_flux(10.0, Electrode::Pos, &p);
        p.area *= 2.0;
        assert_relative_eq!(
            intercalation_flux(10.0, Electrode::Pos, &p),
            0.5 * j,
            max_relative = 1e-15
        );
    }

    #[test]
    fn one_c_flux_matches_hand_evaluation() {
        let (p, _) = bundled();
        let i = p.c_rate_current(1.0);
        // a_s⁻ = 3·0.70/5e-6 = 4.2e5 1/m; a_s⁻ l⁻ A = 4.2e5·80e-6·1 = 33.6
        let by_hand = i / (p.faraday * 33.6);
        assert_relative_eq!(
            intercalation_flux(i, Electrode::Neg, &p),
            -by_hand,
            max_relative = 1e-12
        );
        // a_s⁺ = 3·0.665/5e-6 = 3.99e5; a_s⁺ l⁺ A = 31.92
        let by_hand = i / (p.faraday * 31.92);
        assert_relative_eq!(
            intercalation_flux(i, Electrode::Pos, &p),
            by_hand,
            max_relative = 1e-12
        );
    }

    #[test]
    fn exchange_current_midpoint_and_maximum() {
        let (p, _) = bundled();
        let cmax = p.pos.c_s_max;
        let i0 = exchange_current(1000.0, cmax / 2.0, Electrode::Pos, &p).unwrap();
        assert_relative_eq!(
            i0,
            p.pos.k0 * 1000f64.sqrt() * cmax / 2.0,
            max_relative = 1e-14
        );
        for frac in [0.1, 0.3, 0.49, 0.51, 0.8] {
            assert!(exchange_current(1000.0, frac * cmax, Electrode::Pos, &p).unwrap() < i0);
        }
        assert!(matches!(
            exchange_current(1000.0, cmax, Electrode::Pos, &p),
            Err(Error::KineticsSingular { .. })
        ));
        assert!(exchange_current(1000.0, 0.0, Electrode::Pos, &p).is_err());
    }

    #[test]
    fn exchange_current_at_half_soc_matches_hand_evaluation() {
        let (p, _) = bundled();
        let (_, neg) = p.initial_concentrations(0.5).unwrap();
        // c = 33000·0.5·(0.03 + 0.80) = 13695; k0 √1000 √(19305·13695)
        let by_hand = 2e-6 * 1000f64.sqrt() * (19305.0f64 * 13695.0).sqrt();
        assert_relative_eq!(neg, 13695.0, max_relative = 1e-14);
        assert_relative_eq!(
            exchange_current(1000.0, neg, Electrode::Neg, &p).unwrap(),
            by_hand,
            max_relative = 1e-12
        );
    }

    #[test]
    fn overpotential_is_odd_and_zero_at_equilibrium() {
        let (p, _) = bundled();
        assert_eq!(overpotential(0.0, 2.0, 298.15, &p).unwrap(), 0.0);
        for j in [1e-7, 3e-6, 4e-5] {
            let a = overpotential(j, 1.7, 300.0, &p).unwrap();
            let b = overpotential(-j, 1.7, 300.0, &p).unwrap();
            assert_eq!(a, -b);
        }
        assert!(overpotential(1e-6, 0.0, 300.0, &p).is_err());
    }

    #[test]
    fn overpotential_inverts_forward_butler_volmer() {
        let (p, _) = bundled();
        for &(j, i0, t) in &[
            (1e-6, 0.5, 290.0),
            (-2.3e-5, 3.1, 305.0),
            (8e-5, 0.05, 298.15),
        ] {
            let eta = overpotential(j, i0, t, &p).unwrap();
            assert_relative_eq!(butler_volmer_flux(eta, i0, t, &p), j, max_relative = 1e-12);
        }
    }

    #[test]
    fn electrolyte_potential_terms() {
        let (p, _) = bundled();
        assert_eq!(electrolyte_potential(1000.0, 1000.0, 0.0, 298.15, &p), 0.0);
        let a = electrolyte_potential(1000.0, 1000.0, 10.0, 298.15, &p);
        let b = electrolyte_potential(1000.0, 1000.0, 20.0, 298.15, &p);
        assert_relative_eq!(b, 2.0 * a, max_relative = 1e-14);
        assert_eq!(electrolyte_potential(1000.0, 1000.0, -10.0, 298.15, &p), -a);
        assert!(
            a > 0.0,
            "charging raises the positive-side electrolyte potential"
        );
    }

    #[test]
    fn electrolyte_potential_matches_hand_evaluation() {
        let (p, _) = bundled();
        let (c0, cl, i, t): (f64, f64, f64, f64) = (1040.0, 955.0, 43.0, 301.0);
        let r = 80e-6 / (2.0 * 0.25f64.powf(1.5))
            + 20e-6 / 0.45f64.powf(1.5)
            + 80e-6 / (2.0 * 0.33f64.powf(1.5));
        let by_hand = r * i / 1.0 + 2.0 * p.gas_constant * t / p.faraday * 0.62 * (cl / c0).ln();
        assert_relative_eq!(
            electrolyte_potential(c0, cl, i, t, &p),
            by_hand,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rest_voltage_is_ocv() {
        let (p, m) = bundled();
        let (pos, neg) = p.initial_concentrations(0.4).unwrap();
        let v = voltage_map(
            pos,
            neg,
            &ElectrolyteSummary::uniform(1000.0),
            0.0,
            298.15,
            &p,
            &m,
        )
        .unwrap();
        let ocv = m.u_pos.eval(pos / p.pos.c_s_max) - m.u_neg.eval(neg / p.neg.c_s_max);
        assert_eq!(v.v_t, ocv);
    }

    #[test]
    fn voltage_drops_from_charge_to_discharge() {
        let (p, m) = bundled();
        let (pos, neg) = p.initial_concentrations(0.4).unwrap();
        let ce = ElectrolyteSummary::uniform(1000.0);
        let charge = voltage_map(pos, neg, &ce, 20.0, 298.15, &p, &m).unwrap();
        let rest = voltage_map(pos, neg, &ce, 0.0, 298.15, &p, &m).unwrap();
        let discharge = voltage_map(pos, neg, &ce, -20.0, 298.15, &p, &m).unwrap();
        assert!(charge.v_t > rest.v_t && rest.v_t > discharge.v_t);
        assert_relative_eq!(charge.eta_pos, -discharge.eta_pos, max_relative = 1e-14);
        assert_relative_eq!(charge.phi_e, -discharge.phi_e, max_relative = 1e-14);
    }

    #[test]
    fn thermal_balance_signs() {
        let (p, _) = bundled();
        let ta = p.thermal.t_ambient;
        assert_eq!(thermal_rhs(ta, 0.0, 3.7, 3.7, &p), 0.0);
        assert!(thermal_rhs(ta + 3.0, 0.0, 3.7, 3.7, &p) < 0.0);
        assert!(thermal_rhs(ta, 40.0, 3.8, 3.7, &p) > 0.0);
        assert!(thermal_rhs(ta, -40.0, 3.6, 3.7, &p) > 0.0);
    }

    #[test]
    fn thermal_steady_state_under_constant_heat() {
        let (p, _) = bundled();
        // Q = I (V - OCV) = 20 * 0.05 = 1 W
        let q = 1.0;
        let mut t = [p.thermal.t_ambient];
        let mut rk = crate::numerics::Rk4::new(1);
        for _ in 0..40_000 {
            rk.step(&mut t, 1.0, |y, out| {
                out[0] = thermal_rhs(y[0], 20.0, 3.75, 3.70, &p);
                Ok(())
            })
            .unwrap();
        }
        assert_relative_eq!(
            t[0] - p.thermal.t_ambient,
            q / p.thermal.heat_transfer,
            max_relative = 1e-6
        );
    }

    #[test]
    fn analytic_sensitivity_matches_central_difference() {
        let (p, m) = bundled();
        let ce = ElectrolyteSummary {
            mean_neg: 1020.0,
            mean_pos: 980.0,
            at_neg_end: 1040.0,
            at_pos_end: 960.0,
        };
        let cmax = p.pos.c_s_max;
        // stay away from table knots by more than the difference step
        for c in [0.4123 * cmax, 0.5517 * cmax, 0.7311 * cmax] {
            let h = 1e-6 * cmax;
            let f = |x: f64| {
                voltage_map(x, 9000.0, &ce, 43.0, 300.0, &p, &m)
                    .unwrap()
                    .v_t
            };
            let fd = (f(c + h) - f(c - h)) / (2.0 * h);
            let an = voltage_sensitivity_pos(c, &ce, 43.0, 300.0, &p, &m).unwrap();
            assert_relative_eq!(an, fd, max_relative = 1e-6);
        }
    }
}
