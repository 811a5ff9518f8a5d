use crate::error::{Error, Result};

const MAX_ARG: f64 = 50.0;
const REL_TOL: f64 = 1e-15;

/// Modified Bessel function of the first kind `I_ν(z)` for `ν ∈ {1, 2}`,
/// `0 ≤ z ≤ 50`, by the ascending series `Σ (z/2)^(2k+ν) / (k! (k+ν)!)`.
pub fn bessel_i(order: u32, z: f64) -> Result<f64> {
    assert!(order == 1 || order == 2, "bessel_i supports orders 1 and 2");
    if !(0.0..=MAX_ARG).contains(&z) {
        return Err(Error::BesselDomain(z));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let half = 0.5 * z;
    let q = half * half;
    let nu = order as f64;
    // leading term (z/2)^ν / ν!
    let mut term = half.powi(order as i32) / if order == 1 { 1.0 } else { 2.0 };
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        sum += term;
        if term < REL_TOL * sum {
            break;
        }
    }
    Ok(sum)
}

pub fn bessel_i1(z: f64) -> Result<f64> {
    bessel_i(1, z)
}

pub fn bessel_i2(z: f64) -> Result<f64> {
    bessel_i(2, z)
}
