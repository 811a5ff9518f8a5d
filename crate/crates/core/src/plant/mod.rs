//! Truth model: solid diffusion in one particle per electrode, electrolyte
//! diffusion, lumped temperature and intercalation/thermal expansion.

pub mod kinetics;

use serde::{Deserialize, Serialize};

pub use kinetics::{
    butler_volmer_flux, electrolyte_potential, exchange_current, intercalation_flux, overpotential,
    thermal_rhs, voltage_map, voltage_sensitivity_pos, ElectrolyteSummary, VoltageBreakdown,
};

use crate::error::{Error, Result};
use crate::numerics::{
    spherical_diffusion_rhs_into, ElectrolyteOperator, PlanarGrid, RadialGrid, Region, Rk4,
    StepperConfig,
};
use crate::params::{Electrode, MaterialCurves, ParamSet};

/// Discretization sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n_shells_neg: usize,
    pub n_shells_pos: usize,
    /// Planar node counts for negative electrode, separator, positive electrode.
    pub planar: [usize; 3],
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_shells_neg: 16,
            n_shells_pos: 16,
            planar: [10, 10, 10],
        }
    }
}

/// Parameters, curves and discretization of one cell. Shared by the plant
/// and (with nominal parameters) by the observer.
#[derive(Debug, Clone)]
pub struct CellModel {
    pub params: ParamSet,
    pub curves: MaterialCurves,
    pub neg_grid: RadialGrid,
    pub pos_grid: RadialGrid,
    pub electrolyte: ElectrolyteOperator,
}

impl CellModel {
    pub fn new(params: ParamSet, curves: MaterialCurves, grids: &GridConfig) -> Result<Self> {
        params.validate()?;
        let neg_grid = RadialGrid::new(grids.n_shells_neg, params.neg.particle_radius)?;
        let pos_grid = RadialGrid::new(grids.n_shells_pos, params.pos.particle_radius)?;
        let planar = PlanarGrid::new(
            grids.planar,
            [
                params.neg.thickness,
                params.sep.thickness,
                params.pos.thickness,
            ],
        )?;
        let electrolyte = ElectrolyteOperator::new(&planar, &params);
        Ok(Self {
            params,
            curves,
            neg_grid,
            pos_grid,
            electrolyte,
        })
    }

    pub fn grid(&self, e: Electrode) -> &RadialGrid {
        match e {
            Electrode::Neg => &self.neg_grid,
            Electrode::Pos => &self.pos_grid,
        }
    }

    /// Largest RK4 sub-step satisfying every diffusion stability bound.
    pub fn max_stable_substep(&self) -> f64 {
        self.neg_grid
            .stable_step(self.params.neg.diffusivity)
            .min(self.pos_grid.stable_step(self.params.pos.diffusivity))
            .min(self.electrolyte.stable_step())
    }

    pub fn stepper(&self, dt: f64) -> Result<StepperConfig> {
        StepperConfig::new(dt, self.max_stable_substep())
    }

    pub fn electrolyte_summary(&self, c_e: &[f64]) -> ElectrolyteSummary {
        let g = self.electrolyte.grid();
        ElectrolyteSummary {
            mean_neg: g.region_mean(c_e, Region::Neg),
            mean_pos: g.region_mean(c_e, Region::Pos),
            at_neg_end: c_e[0],
            at_pos_end: c_e[c_e.len() - 1],
        }
    }

    /// `u_R = (1/R²) ∫ ρ² ΔV(c(ρ)) dρ` for one electrode's radial profile.
    pub fn surface_displacement(&self, e: Electrode, c: &[f64]) -> f64 {
        let curve = self.curves.strain(e);
        let g = self.grid(e);
        g.weights()
            .iter()
            .zip(c)
            .map(|(w, &v)| w * curve.eval(v))
            .sum::<f64>()
            / (g.radius() * g.radius())
    }

    /// Electrode thickness change `Δt = a_s l u_R` (m).
    pub fn electrode_expansion(&self, e: Electrode, c: &[f64]) -> f64 {
        let ep = self.params.electrode(e);
        ep.a_s() * ep.thickness * self.surface_displacement(e, c)
    }

    pub fn thermal_expansion(&self, t_b: f64) -> f64 {
        self.params.thermal.alpha_th * (t_b - self.params.thermal.t_ref)
    }
}

/// Full truth state.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub c_s_neg: Vec<f64>,
    pub c_s_pos: Vec<f64>,
    pub c_e: Vec<f64>,
    pub t_b: f64,
}

impl PlantState {
    /// Uniform solids at `soc0`, uniform electrolyte at `c_e0`, ambient temperature.
    pub fn uniform(model: &CellModel, soc0: f64) -> Result<Self> {
        let p = &model.params;
        let (pos, neg) = p.initial_concentrations(soc0)?;
        Ok(Self {
            c_s_neg: vec![neg; model.neg_grid.n_nodes()],
            c_s_pos: vec![pos; model.pos_grid.n_nodes()],
            c_e: vec![p.electrolyte.c_e0; model.electrolyte.n_nodes()],
            t_b: p.thermal.t_ambient,
        })
    }

    pub fn surface(&self, e: Electrode) -> f64 {
        let c = match e {
            Electrode::Neg => &self.c_s_neg,
            Electrode::Pos => &self.c_s_pos,
        };
        c[c.len() - 1]
    }

    fn pack(&self, out: &mut Vec<f64>) {
        out.clear();
        out.extend_from_slice(&self.c_s_neg);
        out.extend_from_slice(&self.c_s_pos);
        out.extend_from_slice(&self.c_e);
        out.push(self.t_b);
    }

    fn unpack(&mut self, y: &[f64]) {
        let (nn, np) = (self.c_s_neg.len(), self.c_s_pos.len());
        let ne = self.c_e.len();
        self.c_s_neg.copy_from_slice(&y[..nn]);
        self.c_s_pos.copy_from_slice(&y[nn..nn + np]);
        self.c_e.copy_from_slice(&y[nn + np..nn + np + ne]);
        self.t_b = y[nn + np + ne];
    }

    /// Checks the physical-range invariants.
    pub fn check(&self, p: &ParamSet) -> std::result::Result<(), String> {
        for (name, c, cmax) in [
            ("c_s_neg", &self.c_s_neg, p.neg.c_s_max),
            ("c_s_pos", &self.c_s_pos, p.pos.c_s_max),
        ] {
            if let Some((i, v)) = c.iter().enumerate().find(|(_, &v)| !(v > 0.0 && v < cmax)) {
                return Err(format!("{name}[{i}] = {v} outside (0, {cmax})"));
            }
        }
        if let Some((i, v)) = self
            .c_e
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v > 0.0 && v.is_finite()))
        {
            return Err(format!("c_e[{i}] = {v} not positive"));
        }
        if !self.t_b.is_finite() {
            return Err(format!("T_b = {} not finite", self.t_b));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionBreakdown {
    pub dt_neg: f64,
    pub dt_pos: f64,
    pub dt_th: f64,
    /// `κ_b (Δt⁺ + Δt⁻)`
    pub dt_e: f64,
    pub dt_b: f64,
}

pub fn expansion_outputs(model: &CellModel, s: &PlantState) -> ExpansionBreakdown {
    let dt_neg = model.electrode_expansion(Electrode::Neg, &s.c_s_neg);
    let dt_pos = model.electrode_expansion(Electrode::Pos, &s.c_s_pos);
    let dt_th = model.thermal_expansion(s.t_b);
    let dt_e = model.params.expansion.kappa_b * (dt_pos + dt_neg);
    ExpansionBreakdown {
        dt_neg,
        dt_pos,
        dt_th,
        dt_e,
        dt_b: dt_e + dt_th,
    }
}

pub fn terminal_voltage(
    model: &CellModel,
    s: &PlantState,
    current: f64,
) -> Result<VoltageBreakdown> {
    voltage_map(
        s.surface(Electrode::Pos),
        s.surface(Electrode::Neg),
        &model.electrolyte_summary(&s.c_e),
        current,
        s.t_b,
        &model.params,
        &model.curves,
    )
}

/// Measured and diagnostic outputs of the plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantOutputs {
    pub v_t: f64,
    pub t_b: f64,
    pub dt_b: f64,
    pub css_neg: f64,
    pub css_pos: f64,
    pub csavg_neg: f64,
    pub csavg_pos: f64,
    pub eta_neg: f64,
    pub eta_pos: f64,
    pub phi_e: f64,
    pub dt_neg: f64,
    pub dt_pos: f64,
    pub dt_th: f64,
    pub soc: f64,
}

pub fn plant_outputs(model: &CellModel, s: &PlantState, current: f64) -> Result<PlantOutputs> {
    let v = terminal_voltage(model, s, current)?;
    let x = expansion_outputs(model, s);
    let csavg_neg = model.neg_grid.volume_average(&s.c_s_neg);
    Ok(PlantOutputs {
        v_t: v.v_t,
        t_b: s.t_b,
        dt_b: x.dt_b,
        css_neg: s.surface(Electrode::Neg),
        css_pos: s.surface(Electrode::Pos),
        csavg_neg,
        csavg_pos: model.pos_grid.volume_average(&s.c_s_pos),
        eta_neg: v.eta_neg,
        eta_pos: v.eta_pos,
        phi_e: v.phi_e,
        dt_neg: x.dt_neg,
        dt_pos: x.dt_pos,
        dt_th: x.dt_th,
        soc: model.params.soc_from_avg_concentration(csavg_neg),
    })
}

/// Plant transition function with a fixed stepper.
#[derive(Debug, Clone)]
pub struct Plant {
    model: CellModel,
    stepper: StepperConfig,
}

impl Plant {
    pub fn new(model: CellModel, dt: f64) -> Result<Self> {
        let stepper = model.stepper(dt)?;
        Ok(Self { model, stepper })
    }

    pub fn with_stepper(model: CellModel, stepper: StepperConfig) -> Result<Self> {
        let stepper = StepperConfig::with_substeps(
            stepper.dt(),
            stepper.substeps(),
            model.max_stable_substep(),
        )?;
        Ok(Self { model, stepper })
    }

    pub fn model(&self) -> &CellModel {
        &self.model
    }

    pub fn stepper(&self) -> &StepperConfig {
        &self.stepper
    }

    /// Advances the state by one step of `dt` under constant `current`,
    /// starting at time `t`; returns the new state and its outputs.
    pub fn step(&self, s: &PlantState, current: f64, t: f64) -> Result<(PlantState, PlantOutputs)> {
        let m = &self.model;
        let p = &m.params;
        let (nn, np, ne) = (s.c_s_neg.len(), s.c_s_pos.len(), s.c_e.len());
        let j_neg = intercalation_flux(current, Electrode::Neg, p);
        let j_pos = intercalation_flux(current, Electrode::Pos, p);

        let mut y = Vec::with_capacity(nn + np + ne + 1);
        s.pack(&mut y);
        let mut rk = Rk4::new(y.len());
        let rhs = |y: &[f64], out: &mut [f64]| -> Result<()> {
            let (cn, rest) = y.split_at(nn);
            let (cp, rest) = rest.split_at(np);
            let (ce, tb) = rest.split_at(ne);
            let (on, orest) = out.split_at_mut(nn);
            let (op, orest) = orest.split_at_mut(np);
            let (oe, ot) = orest.split_at_mut(ne);
            spherical_diffusion_rhs_into(&m.neg_grid, cn, p.neg.diffusivity, j_neg, on);
            spherical_diffusion_rhs_into(&m.pos_grid, cp, p.pos.diffusivity, j_pos, op);
            m.electrolyte.rhs_into(ce, current, oe);
            let v = voltage_map(
                cp[np - 1],
                cn[nn - 1],
                &m.electrolyte_summary(ce),
                current,
                tb[0],
                p,
                &m.curves,
            )?;
            ot[0] = thermal_rhs(tb[0], current, v.v_t, v.ocv, p);
            Ok(())
        };
        let h = self.stepper.substep();
        let mut rhs = rhs;
        for k in 0..self.stepper.substeps() {
            rk.step(&mut y, h, &mut rhs)
                .map_err(|e| Error::PlantOutOfRange {
                    t: t + (k + 1) as f64 * h,
                    detail: e.to_string(),
                })?;
        }
        let mut next = s.clone();
        next.unpack(&y);
        let t_end = t + self.stepper.dt();
        next.check(p)
            .map_err(|detail| Error::PlantOutOfRange { t: t_end, detail })?;
        let out = plant_outputs(m, &next, current).map_err(|e| Error::PlantOutOfRange {
            t: t_end,
            detail: e.to_string(),
        })?;
        Ok((next, out))
    }
}

/// Total solid-phase lithium per electrode `ε_s l A c_avg` (mol).
pub fn solid_lithium(model: &CellModel, s: &PlantState) -> (f64, f64) {
    let p = &model.params;
    let neg = p.neg.eps_s * p.neg.thickness * p.area * model.neg_grid.volume_average(&s.c_s_neg);
    let pos = p.pos.eps_s * p.pos.thickness * p.area * model.pos_grid.volume_average(&s.c_s_pos);
    (neg, pos)
}
