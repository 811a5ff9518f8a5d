use crate::error::{Error, Result};

/// Uniform radial grid on `[0, R_p]` with `n_shells + 1` nodes.
///
/// Carries the radial quadrature used for volume averages, the expansion
/// moment and lithium bookkeeping. The weights are the ones the ghost-node
/// diffusion operator conserves exactly (`0, 1², 2², …, (N-1)², N(N-1)/2`
/// in units of `Δr³`), rescaled so that constants integrate exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    n_shells: usize,
    radius: f64,
    dr: f64,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub const MIN_SHELLS: usize = 8;

    pub fn new(n_shells: usize, radius: f64) -> Result<Self> {
        if n_shells < Self::MIN_SHELLS {
            return Err(Error::Invariant(format!(
                "radial grid needs at least {} shells, got {n_shells}",
                Self::MIN_SHELLS
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Invariant(format!(
                "particle radius must be positive, got {radius}"
            )));
        }
        let n = n_shells as f64;
        let dr = radius / n;
        let scale = dr.powi(3) * n * n / (n * n - 1.0);
        let weights = (0..=n_shells)
            .map(|i| {
                let i = i as f64;
                let w = if i == n { n * (n - 1.0) / 2.0 } else { i * i };
                w * scale
            })
            .collect();
        Ok(Self {
            n_shells,
            radius,
            dr,
            weights,
        })
    }

    pub fn n_shells(&self) -> usize {
        self.n_shells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_shells + 1
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_shells {
            self.radius
        } else {
            i as f64 * self.dr
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_shells).map(|i| self.node(i))
    }

    /// Quadrature weights for `∫₀^R ρ² f(ρ) dρ ≈ Σ wᵢ fᵢ`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(1/R²) ∫₀^R ρ² f(ρ) dρ`.
    pub fn radial_moment_integral(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n_nodes());
        let s: f64 = self.weights.iter().zip(f).map(|(w, v)| w * v).sum();
        s / (self.radius * self.radius)
    }

    /// Volume average `(3/R³) ∫₀^R ρ² c dρ`.
    pub fn volume_average(&self, c: &[f64]) -> f64 {
        3.0 * self.radial_moment_integral(c) / self.radius
    }

    /// Largest explicit step allowed for diffusivity `d`: `0.2 Δr² / D`.
    pub fn stable_step(&self, d: f64) -> f64 {
        0.2 * self.dr * self.dr / d
    }
}

/// Free-function form of [`RadialGrid::radial_moment_integral`].
pub fn radial_moment_integral(grid: &RadialGrid, f: &[f64]) -> f64 {
    grid.radial_moment_integral(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Neg,
    Sep,
    Pos,
}

/// Uniform-per-region planar grid across negative electrode, separator and
/// positive electrode. Region end nodes are shared at the two interfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarGrid {
    counts: [usize; 3],
    lengths: [f64; 3],
}

impl PlanarGrid {
    pub const MIN_NODES: usize = 4;

    pub fn new(counts: [usize; 3], lengths: [f64; 3]) -> Result<Self> {
        if counts.iter().any(|&n| n < Self::MIN_NODES) {
            return Err(Error::Invariant(format!(
                "planar grid needs at least {} nodes per region, got {counts:?}",
                Self::MIN_NODES
            )));
        }
        if lengths.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::Invariant(format!(
                "region thicknesses must be positive, got {lengths:?}"
            )));
        }
        Ok(Self { counts, lengths })
    }

    pub fn n_nodes(&self) -> usize {
        self.counts.iter().sum::<usize>() - 2
    }

    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn length(&self, r: Region) -> f64 {
        self.lengths[r as usize]
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn spacing(&self, r: Region) -> f64 {
        self.lengths[r as usize] / (self.counts[r as usize] - 1) as f64
    }

    /// Node index range `[first, last]` (inclusive) covered by a region.
    pub fn region_nodes(&self, r: Region) -> (usize, usize) {
        let [nn, ns, _] = self.counts;
        match r {
            Region::Neg => (0, nn - 1),
            Region::Sep => (nn - 1, nn + ns - 2),
            Region::Pos => (nn + ns - 2, self.n_nodes() - 1),
        }
    }

    /// Region owning the edge between node `k` and `k + 1`.
    pub fn edge_region(&self, k: usize) -> Region {
        let [nn, ns, _] = self.counts;
        if k < nn - 1 {
            Region::Neg
        } else if k < nn + ns - 2 {
            Region::Sep
        } else {
            Region::Pos
        }
    }

    pub fn node_position(&self, k: usize) -> f64 {
        let (_, sep_start) = self.region_nodes(Region::Neg);
        let (_, pos_start) = self.region_nodes(Region::Sep);
        if k <= sep_start {
            k as f64 * self.spacing(Region::Neg)
        } else if k <= pos_start {
            self.lengths[0] + (k - sep_start) as f64 * self.spacing(Region::Sep)
        } else {
            self.lengths[0] + self.lengths[1] + (k - pos_start) as f64 * self.spacing(Region::Pos)
        }
    }

    /// Spatial mean of `c` over one region (trapezoid).
    pub fn region_mean(&self, c: &[f64], r: Region) -> f64 {
        let (a, b) = self.region_nodes(r);
        let inner: f64 = c[a + 1..b].iter().sum();
        let sum = inner + 0.5 * (c[a] + c[b]);
        sum / (b - a) as f64
    }
}
