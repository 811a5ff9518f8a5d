use crate::error::{Error, Result};

/// Classical explicit 4-stage Runge-Kutta with reusable stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    /// Advances `y` in place by `dt`. `rhs(y, out)` must write `dy/dt`.
    pub fn step<F>(&mut self, y: &mut [f64], dt: f64, mut rhs: F) -> Result<()>
    where
        F: FnMut(&[f64], &mut [f64]) -> Result<()>,
    {
        let n = y.len();
        if self.k1.len() != n {
            *self = Self::new(n);
        }
        rhs(y, &mut self.k1)?;
        for ((t, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *t = y + 0.5 * dt * k;
        }
        rhs(&self.tmp, &mut self.k2)?;
        for ((t, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *t = y + 0.5 * dt * k;
        }
        rhs(&self.tmp, &mut self.k3)?;
        for ((t, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *t = y + dt * k;
        }
        rhs(&self.tmp, &mut self.k4)?;
        for (i, y) in y.iter_mut().enumerate() {
            *y += dt / 6.0 * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
        match y.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }
}

/// Single RK4 step returning the new state.
pub fn rk4_step<F>(state: &[f64], rhs: F, dt: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let mut y = state.to_vec();
    Rk4::new(y.len()).step(&mut y, dt, rhs)?;
    Ok(y)
}
