use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::metrics::{RmspeReport, RMSPE_T_START};
use crate::harness::noise::{add_noise, NoiseConfig, NoiseSource};
use crate::harness::records::{CsvSink, TimeseriesRecord};
use crate::observer::{GainSettings, Measurement, Mode, Observer, ObserverGains, ObserverState};
use crate::params::{load_params, DriftSpec, MaterialCurves, ParamSet};
use crate::plant::{plant_outputs, CellModel, GridConfig, Plant, PlantState};

/// Applied current as a function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CurrentProfile {
    /// Constant charge at a multiple of the nominal capacity.
    ConstantCharge { c_rate: f64 },
    /// Piecewise-constant `(t_start_s, current_A)` breakpoints, sorted by time.
    /// The first breakpoint must be at `t = 0`.
    Piecewise(Vec<(f64, f64)>),
}

impl CurrentProfile {
    fn validate(&self) -> Result<()> {
        match self {
            CurrentProfile::ConstantCharge { c_rate } if !c_rate.is_finite() => Err(
                Error::Invariant(format!("c-rate must be finite, got {c_rate}")),
            ),
            CurrentProfile::Piecewise(points) => {
                if points.first().map(|p| p.0) != Some(0.0) {
                    return Err(Error::Invariant(
                        "current profile must start at t = 0".into(),
                    ));
                }
                if points
                    .windows(2)
                    .any(|w| w[1].0.is_nan() || w[1].0 <= w[0].0)
                {
                    return Err(Error::Invariant(
                        "current profile times must increase strictly".into(),
                    ));
                }
                if points.iter().any(|p| !p.1.is_finite()) {
                    return Err(Error::Invariant(
                        "current profile values must be finite".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Current held over the step that starts at `t`.
    pub fn current_at(&self, t: f64, p: &ParamSet) -> f64 {
        match self {
            CurrentProfile::ConstantCharge { c_rate } => p.c_rate_current(*c_rate),
            CurrentProfile::Piecewise(points) => {
                let k = points.partition_point(|q| q.0 <= t);
                points[k.saturating_sub(1)].1
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub profile: CurrentProfile,
    /// Simulated time (s).
    pub duration: f64,
    pub soc0_plant: f64,
    pub soc0_observer: f64,
    /// Aging drift applied to the plant only.
    pub drift: DriftSpec,
    pub mode: Mode,
    pub noise: NoiseConfig,
    /// Model step (s).
    pub dt: f64,
    pub grids: GridConfig,
    pub gains: GainSettings,
    /// Where to stream the CSV, if anywhere.
    pub output: Option<PathBuf>,
}

impl ScenarioConfig {
    /// 1C charge from SOC 0.05 with the observer started at 0.10 and the
    /// default noise levels.
    pub fn standard_cc(mode: Mode, duration: f64, seed: u64) -> Self {
        Self {
            profile: CurrentProfile::ConstantCharge { c_rate: 1.0 },
            duration,
            soc0_plant: 0.05,
            soc0_observer: 0.10,
            drift: DriftSpec::default(),
            mode,
            noise: NoiseConfig::standard(seed),
            dt: 0.5,
            grids: GridConfig::default(),
            gains: GainSettings::default(),
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::Invariant(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Invariant(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        for (name, s) in [("soc0", self.soc0_plant), ("obs-soc0", self.soc0_observer)] {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::Invariant(format!("{name} {s} outside [0,1]")));
            }
        }
        self.drift.validate()?;
        self.noise.validate()?;
        self.profile.validate()
    }

    pub fn n_steps(&self) -> usize {
        (self.duration / self.dt).round().max(1.0) as usize
    }
}

/// Records and error report of one observer run.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub mode: Mode,
    pub records: Vec<TimeseriesRecord>,
    pub report: RmspeReport,
}

/// Runs plant, noise and one observer per entry of `modes` in lockstep. All
/// observers consume the same measurement stream. `sinks` (one per mode, or
/// empty) receive each row as soon as it exists.
fn simulate(
    cfg: &ScenarioConfig,
    params: &ParamSet,
    curves: &MaterialCurves,
    modes: &[Mode],
    sinks: &mut [CsvSink],
) -> Result<Vec<Vec<TimeseriesRecord>>> {
    cfg.validate()?;
    let plant_model = CellModel::new(params.apply_drift(&cfg.drift)?, curves.clone(), &cfg.grids)?;
    let obs_model = CellModel::new(params.clone(), curves.clone(), &cfg.grids)?;
    // one stepper for both sides so the plant and observers see the same sub-steps
    let max_h = plant_model
        .max_stable_substep()
        .min(obs_model.max_stable_substep());
    let stepper = crate::numerics::StepperConfig::new(cfg.dt, max_h)?;
    let plant = Plant::with_stepper(plant_model, stepper)?;
    let observers = modes
        .iter()
        .map(|&mode| {
            let gains = ObserverGains::from_settings(
                &cfg.gains,
                mode,
                &obs_model.pos_grid,
                obs_model.params.pos.diffusivity,
            )?;
            Observer::new(obs_model.clone(), gains, stepper)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut ps = PlantState::uniform(plant.model(), cfg.soc0_plant)?;
    let mut os = vec![ObserverState::uniform(&obs_model, cfg.soc0_observer)?; modes.len()];
    let mut noise = NoiseSource::new(cfg.noise.seed);
    let n = cfg.n_steps();
    let mut out = vec![Vec::with_capacity(n); modes.len()];

    log::debug!(
        "simulating {n} steps of {} s with {} sub-steps",
        cfg.dt,
        stepper.substeps()
    );
    for k in 0..n {
        let t0 = k as f64 * cfg.dt;
        let t1 = (k + 1) as f64 * cfg.dt;
        let current = cfg.profile.current_at(t0, params);
        let (next, po) = plant.step(&ps, current, t0)?;
        ps = next;
        let meas = Measurement {
            v_t: add_noise(po.v_t, cfg.noise.sigma_v, &mut noise),
            t_b: po.t_b,
            dt_b: add_noise(po.dt_b, cfg.noise.sigma_dt, &mut noise),
            current,
            t: t1,
        };
        for (i, obs) in observers.iter().enumerate() {
            let (next, oo) = obs.step(&os[i], &meas)?;
            os[i] = next;
            if oo.clamps.any() {
                log::debug!("{}: clamp {:?} at t = {t1} s", obs.mode(), oo.clamps);
            }
            let rec = TimeseriesRecord {
                t: t1,
                current,
                v_t: po.v_t,
                t_b: po.t_b,
                dt_b: po.dt_b,
                css_neg: po.css_neg,
                css_pos: po.css_pos,
                csavg_neg: po.csavg_neg,
                csavg_pos: po.csavg_pos,
                soc: po.soc,
                v_t_meas: meas.v_t,
                dt_b_meas: meas.dt_b,
                v_t_hat: oo.v_t,
                dt_b_hat: oo.dt_b,
                css_neg_hat: oo.css_neg,
                css_pos_hat: oo.css_pos,
                csavg_neg_hat: oo.csavg_neg,
                csavg_pos_hat: oo.csavg_pos,
                soc_hat: oo.soc,
                check_css_pos: oo.check_css_pos,
                check_csavg_neg: oo.check_csavg_neg,
                clamps: oo.clamps,
            };
            if let Some(sink) = sinks.get_mut(i) {
                sink.push(&rec)?;
            }
            out[i].push(rec);
        }
    }
    Ok(out)
}

fn finish(mode: Mode, records: Vec<TimeseriesRecord>) -> Result<ScenarioRun> {
    let t_start = RMSPE_T_START.min(records.last().map_or(0.0, |r| r.t));
    let report = RmspeReport::from_records(&records, t_start)?;
    Ok(ScenarioRun {
        mode,
        records,
        report,
    })
}

/// Runs one scenario with already-loaded parameters, streaming the CSV to
/// `cfg.output` when set. On failure the rows written so far stay on disk.
pub fn run_scenario_with(
    cfg: &ScenarioConfig,
    params: &ParamSet,
    curves: &MaterialCurves,
) -> Result<ScenarioRun> {
    let mut sinks = match &cfg.output {
        Some(path) => vec![CsvSink::create(path)?],
        None => Vec::new(),
    };
    let result = simulate(cfg, params, curves, &[cfg.mode], &mut sinks);
    for s in sinks {
        s.finish()?;
    }
    let records = result?.pop().expect("one mode requested");
    finish(cfg.mode, records)
}

/// Loads the parameter file and runs one scenario.
pub fn run_scenario(cfg: &ScenarioConfig, params_path: &Path) -> Result<ScenarioRun> {
    let (p, c) = load_params(params_path)?;
    run_scenario_with(cfg, &p, &c)
}

/// Both observer modes driven by one plant run and one noise realization.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub v_only: ScenarioRun,
    pub v_plus_exp: ScenarioRun,
}

/// Runs the comparison; `cfg.mode` is ignored. With `outputs`, the two CSVs
/// are written to `(v_only, v_plus_exp)` paths.
pub fn run_comparison(
    cfg: &ScenarioConfig,
    params: &ParamSet,
    curves: &MaterialCurves,
    outputs: Option<(&Path, &Path)>,
) -> Result<Comparison> {
    let mut sinks = match outputs {
        Some((a, b)) => vec![CsvSink::create(a)?, CsvSink::create(b)?],
        None => Vec::new(),
    };
    let result = simulate(
        cfg,
        params,
        curves,
        &[Mode::VOnly, Mode::VPlusExp],
        &mut sinks,
    );
    for s in sinks {
        s.finish()?;
    }
    let mut runs = result?;
    let vpe = runs.pop().expect("two modes");
    let vo = runs.pop().expect("two modes");
    Ok(Comparison {
        v_only: finish(Mode::VOnly, vo)?,
        v_plus_exp: finish(Mode::VPlusExp, vpe)?,
    })
}

/// Plant outputs at `t = 0` for a configuration, mostly for diagnostics.
pub fn initial_truth(
    cfg: &ScenarioConfig,
    params: &ParamSet,
    curves: &MaterialCurves,
) -> Result<crate::plant::PlantOutputs> {
    let m = CellModel::new(params.apply_drift(&cfg.drift)?, curves.clone(), &cfg.grids)?;
    let s = PlantState::uniform(&m, cfg.soc0_plant)?;
    plant_outputs(&m, &s, cfg.profile.current_at(0.0, params))
}
