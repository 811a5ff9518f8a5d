use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::records::TimeseriesRecord;

/// Default start of the error window (s).
pub const RMSPE_T_START: f64 = 300.0;

/// Root mean square percent error over samples with `t >= t_start`:
/// `100 sqrt(mean(((est - truth)/truth)²))`.
pub fn rmspe(times: &[f64], estimates: &[f64], truths: &[f64], t_start: f64) -> Result<f64> {
    if times.len() != estimates.len() || times.len() != truths.len() {
        return Err(Error::Invariant(format!(
            "series lengths differ: t {}, estimate {}, truth {}",
            times.len(),
            estimates.len(),
            truths.len()
        )));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for ((&t, &e), &x) in times.iter().zip(estimates).zip(truths) {
        if t < t_start {
            continue;
        }
        if x == 0.0 {
            return Err(Error::Invariant(format!(
                "truth is zero at t = {t} s; percent error undefined"
            )));
        }
        sum += ((e - x) / x).powi(2);
        n += 1;
    }
    if n == 0 {
        return Err(Error::Invariant(format!(
            "no samples at or after t = {t_start} s"
        )));
    }
    Ok(100.0 * (sum / n as f64).sqrt())
}

/// RMSPE (%) of the four concentration estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RmspeReport {
    pub t_start: f64,
    pub css_neg: f64,
    pub csavg_neg: f64,
    pub css_pos: f64,
    pub csavg_pos: f64,
}

impl RmspeReport {
    pub fn from_records(records: &[TimeseriesRecord], t_start: f64) -> Result<Self> {
        let t: Vec<f64> = records.iter().map(|r| r.t).collect();
        let metric = |est: fn(&TimeseriesRecord) -> f64, truth: fn(&TimeseriesRecord) -> f64| {
            let e: Vec<f64> = records.iter().map(est).collect();
            let x: Vec<f64> = records.iter().map(truth).collect();
            rmspe(&t, &e, &x, t_start)
        };
        Ok(Self {
            t_start,
            css_neg: metric(|r| r.css_neg_hat, |r| r.css_neg)?,
            csavg_neg: metric(|r| r.csavg_neg_hat, |r| r.csavg_neg)?,
            css_pos: metric(|r| r.css_pos_hat, |r| r.css_pos)?,
            csavg_pos: metric(|r| r.csavg_pos_hat, |r| r.csavg_pos)?,
        })
    }

    pub fn max(&self) -> f64 {
        self.css_neg
            .max(self.csavg_neg)
            .max(self.css_pos)
            .max(self.csavg_pos)
    }
}
