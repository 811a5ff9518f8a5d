//! Method-of-lines right-hand sides for solid and electrolyte diffusion.

use crate::error::{Error, Result};
use crate::numerics::grid::{PlanarGrid, RadialGrid, Region};
use crate::params::ParamSet;

fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Writes `∂c/∂t` for `(1/r²) ∂_r(D r² ∂_r c)` with `∂_r c(0) = 0` and
/// `D ∂_r c(R) = -surface_flux`.
///
/// `surface_flux` is the outward molar flux (mol/m²/s): positive when lithium
/// leaves the particle. The surface row uses a ghost node
/// `c_{N+1} = c_{N-1} + 2Δr ∂_r c(R)`.
pub fn spherical_diffusion_rhs_into(
    grid: &RadialGrid,
    c: &[f64],
    d: f64,
    surface_flux: f64,
    out: &mut [f64],
) {
    let n = grid.n_shells();
    let dr = grid.dr();
    let k = d / (dr * dr);
    out[0] = 6.0 * k * (c[1] - c[0]);
    for i in 1..n {
        let inv_i = 1.0 / i as f64;
        out[i] = k * ((1.0 + inv_i) * (c[i + 1] - c[i]) + (1.0 - inv_i) * (c[i - 1] - c[i]));
    }
    out[n] = 2.0 * k * (c[n - 1] - c[n]) - surface_flux * (2.0 / dr + 2.0 / grid.radius());
}

pub fn spherical_diffusion_rhs(
    grid: &RadialGrid,
    c: &[f64],
    d: f64,
    surface_flux: f64,
) -> Result<Vec<f64>> {
    if c.len() != grid.n_nodes() {
        return Err(Error::Invariant(format!(
            "concentration vector has {} entries, grid has {} nodes",
            c.len(),
            grid.n_nodes()
        )));
    }
    check_finite(c)?;
    if !surface_flux.is_finite() {
        return Err(Error::NonFinite { index: c.len() });
    }
    let mut out = vec![0.0; c.len()];
    spherical_diffusion_rhs_into(grid, c, d, surface_flux, &mut out);
    Ok(out)
}

/// Finite-volume operator for electrolyte diffusion with a piecewise-constant
/// source in the two electrodes.
///
/// Every node owns half of each adjacent edge; interface nodes straddle two
/// regions. Each edge lies inside a single region, so the interface flux uses
/// that region's effective diffusivity and the series (harmonic) combination
/// of the two half-edges reduces to it.
#[derive(Debug, Clone)]
pub struct ElectrolyteOperator {
    grid: PlanarGrid,
    /// `D_eff / Δx` per edge (m/s).
    conductance: Vec<f64>,
    /// `Σ ε_e Δx / 2` over the half-edges owned by each node (m).
    capacity: Vec<f64>,
    /// Per-node source per unit charge-positive current density.
    source: Vec<f64>,
    salt_coeff: f64,
}

impl ElectrolyteOperator {
    pub fn new(grid: &PlanarGrid, p: &ParamSet) -> Self {
        let n = grid.n_nodes();
        let eps = |r: Region| match r {
            Region::Neg => p.neg.eps_e,
            Region::Sep => p.sep.eps_e,
            Region::Pos => p.pos.eps_e,
        };
        let brugg = |r: Region| match r {
            Region::Neg => p.neg.brugg,
            Region::Sep => p.sep.brugg,
            Region::Pos => p.pos.brugg,
        };
        // source density per unit current density (1/m): +1/l⁻ in the
        // negative region, -1/l⁺ in the positive region.
        let src = |r: Region| match r {
            Region::Neg => 1.0 / p.neg.thickness,
            Region::Sep => 0.0,
            Region::Pos => -1.0 / p.pos.thickness,
        };
        let mut conductance = Vec::with_capacity(n - 1);
        let mut capacity = vec![0.0; n];
        let mut source = vec![0.0; n];
        for k in 0..n - 1 {
            let r = grid.edge_region(k);
            let dx = grid.spacing(r);
            conductance.push(p.electrolyte.diffusivity * eps(r).powf(brugg(r)) / dx);
            for node in [k, k + 1] {
                capacity[node] += 0.5 * eps(r) * dx;
                source[node] += 0.5 * src(r) * dx;
            }
        }
        Self {
            grid: grid.clone(),
            conductance,
            capacity,
            source,
            salt_coeff: (1.0 - p.electrolyte.t_plus0) / (p.faraday * p.area),
        }
    }

    pub fn grid(&self) -> &PlanarGrid {
        &self.grid
    }

    pub fn n_nodes(&self) -> usize {
        self.capacity.len()
    }

    /// `ε_e`-weighted node lengths; `Σ capacity_k c_k` is the salt per area.
    pub fn capacity(&self) -> &[f64] {
        &self.capacity
    }

    pub fn total_salt(&self, c: &[f64]) -> f64 {
        self.capacity.iter().zip(c).map(|(w, v)| w * v).sum()
    }

    /// Writes `∂c_e/∂t` for cell current `current` (A, positive on charge).
    pub fn rhs_into(&self, c: &[f64], current: f64, out: &mut [f64]) {
        // the source is written for discharge-positive current
        let s = -current * self.salt_coeff;
        for (o, src) in out.iter_mut().zip(&self.source) {
            *o = s * src;
        }
        for (k, g) in self.conductance.iter().enumerate() {
            let flux = g * (c[k + 1] - c[k]);
            out[k] += flux;
            out[k + 1] -= flux;
        }
        for (o, cap) in out.iter_mut().zip(&self.capacity) {
            *o /= cap;
        }
    }

    pub fn rhs(&self, c: &[f64], current: f64) -> Result<Vec<f64>> {
        if c.len() != self.n_nodes() {
            return Err(Error::Invariant(format!(
                "electrolyte vector has {} entries, grid has {} nodes",
                c.len(),
                self.n_nodes()
            )));
        }
        check_finite(c)?;
        let mut out = vec![0.0; c.len()];
        self.rhs_into(c, current, &mut out);
        Ok(out)
    }

    /// Largest explicit step: `0.4 / max_k(Σ conductance / capacity)`, which
    /// is `0.2 ε Δx² / D_eff` on a uniform interior node.
    pub fn stable_step(&self) -> f64 {
        let n = self.n_nodes();
        let worst = (0..n)
            .map(|k| {
                let left = if k > 0 { self.conductance[k - 1] } else { 0.0 };
                let right = if k + 1 < n { self.conductance[k] } else { 0.0 };
                (left + right) / self.capacity[k]
            })
            .fold(0.0, f64::max);
        0.4 / worst
    }
}

/// One-shot form of [`ElectrolyteOperator::rhs`].
pub fn electrolyte_rhs(
    c_e: &[f64],
    current: f64,
    grid: &PlanarGrid,
    p: &ParamSet,
) -> Result<Vec<f64>> {
    ElectrolyteOperator::new(grid, p).rhs(c_e, current)
}
