use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use spme::harness::{
    emit_plotdata, parse_csv, run_comparison, run_scenario_with, CurrentProfile, NoiseConfig,
    RmspeReport, ScenarioConfig, TimeseriesRecord, RMSPE_T_START,
};
use spme::observer::{GainSettings, Mode};
use spme::plant::GridConfig;
use spme::{load_params, DriftSpec, MaterialCurves, ParamSet};

#[derive(Parser)]
#[command(
    name = "spme",
    version,
    about = "Single-particle cell model and state observer scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the plant and one observer, writing the time series as CSV.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_parser = parse_mode, default_value = "v+exp")]
        mode: Mode,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
        /// Optional JSON file with the figure panels.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Print the RMSPE table of an existing CSV.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = RMSPE_T_START)]
        t_start: f64,
    },
    /// Run both observer modes on one plant run and one noise stream.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Directory for `v-only.csv` and `v+exp.csv`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Write the bundled parameter file.
    Params {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioKind {
    /// Constant-current charge.
    Cc,
}

#[derive(Args)]
struct RunArgs {
    /// Parameter file; the bundled cell when omitted.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "cc")]
    scenario: ScenarioKind,
    #[arg(long, default_value_t = 1.0)]
    c_rate: f64,
    /// Simulated time in seconds.
    #[arg(long, default_value_t = 3600.0)]
    duration: f64,
    #[arg(long, default_value_t = 0.05)]
    soc0: f64,
    #[arg(long, default_value_t = 0.10)]
    obs_soc0: f64,
    /// Plant-only scale on x100.
    #[arg(long, default_value_t = 1.0)]
    drift_x100: f64,
    /// Plant-only scale on y0.
    #[arg(long, default_value_t = 1.0)]
    drift_y0: f64,
    /// Plant-only scale on the negative active-material fraction.
    #[arg(long, default_value_t = 1.0)]
    drift_eps_neg: f64,
    /// Voltage noise standard deviation (V).
    #[arg(long, default_value_t = 1e-3)]
    sigma_v: f64,
    /// Expansion noise standard deviation (m).
    #[arg(long, default_value_t = 1e-6)]
    sigma_dt: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Model step in seconds.
    #[arg(long, default_value_t = 0.5)]
    dt: f64,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse().map_err(|e: spme::Error| e.to_string())
}

impl RunArgs {
    fn load(&self) -> Result<(ParamSet, MaterialCurves)> {
        match &self.params {
            Some(path) => load_params(path).with_context(|| format!("loading {}", path.display())),
            None => Ok(ParamSet::bundled()),
        }
    }

    fn config(&self, mode: Mode, output: Option<PathBuf>) -> Result<ScenarioConfig> {
        let profile = match self.scenario {
            ScenarioKind::Cc => CurrentProfile::ConstantCharge {
                c_rate: self.c_rate,
            },
        };
        let cfg = ScenarioConfig {
            profile,
            duration: self.duration,
            soc0_plant: self.soc0,
            soc0_observer: self.obs_soc0,
            drift: DriftSpec {
                scale_x100: self.drift_x100,
                scale_y0: self.drift_y0,
                scale_eps_s_neg: self.drift_eps_neg,
            },
            mode,
            noise: NoiseConfig {
                sigma_v: self.sigma_v,
                sigma_dt: self.sigma_dt,
                seed: self.seed,
            },
            dt: self.dt,
            grids: GridConfig::default(),
            gains: GainSettings::default(),
            output,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

const ROWS: [&str; 4] = ["css_neg", "csavg_neg", "css_pos", "csavg_pos"];

fn report_values(r: &RmspeReport) -> [f64; 4] {
    [r.css_neg, r.csavg_neg, r.css_pos, r.csavg_pos]
}

/// Largest |V̂ - V| at or after `t_start`, in volts.
fn max_voltage_error(records: &[TimeseriesRecord], t_start: f64) -> f64 {
    records
        .iter()
        .filter(|r| r.t >= t_start)
        .map(|r| (r.v_t_hat - r.v_t).abs())
        .fold(0.0, f64::max)
}

fn print_single(label: &str, report: &RmspeReport, records: &[TimeseriesRecord]) {
    println!("RMSPE (%) after t = {} s, observer {label}", report.t_start);
    for (name, v) in ROWS.iter().zip(report_values(report)) {
        println!("  {name:<10} {v:>9.4}");
    }
    println!(
        "  max |V_hat - V| = {:.3} mV",
        1e3 * max_voltage_error(records, report.t_start)
    );
}

fn simulate(run: &RunArgs, mode: Mode, out: &Path, plot: Option<&Path>) -> Result<()> {
    let (params, curves) = run.load()?;
    let cfg = run.config(mode, Some(out.to_path_buf()))?;
    let result = run_scenario_with(&cfg, &params, &curves)
        .with_context(|| format!("simulating into {}", out.display()))?;
    if let Some(plot) = plot {
        emit_plotdata(&result.records, plot)?;
    }
    print_single(mode.label(), &result.report, &result.records);
    Ok(())
}

fn report(input: &Path, t_start: f64) -> Result<()> {
    let records = parse_csv(input).with_context(|| format!("reading {}", input.display()))?;
    if records.is_empty() {
        bail!("{} has no rows", input.display());
    }
    let report = RmspeReport::from_records(&records, t_start)?;
    print_single(&input.display().to_string(), &report, &records);
    Ok(())
}

fn compare(run: &RunArgs, out_dir: Option<&Path>) -> Result<()> {
    let (params, curves) = run.load()?;
    let cfg = run.config(Mode::VPlusExp, None)?;
    let paths = match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            Some((dir.join("v-only.csv"), dir.join("v+exp.csv")))
        }
        None => None,
    };
    let outputs = paths.as_ref().map(|(a, b)| (a.as_path(), b.as_path()));
    let cmp = run_comparison(&cfg, &params, &curves, outputs)?;
    let (a, b) = (&cmp.v_only, &cmp.v_plus_exp);
    println!(
        "RMSPE (%) after t = {} s, seed {}",
        a.report.t_start, run.seed
    );
    println!("  {:<10} {:>9} {:>9}", "", "v-only", "v+exp");
    for ((name, x), y) in ROWS
        .iter()
        .zip(report_values(&a.report))
        .zip(report_values(&b.report))
    {
        println!("  {name:<10} {x:>9.4} {y:>9.4}");
    }
    println!(
        "  {:<10} {:>9.3} {:>9.3}",
        "maxdV_mV",
        1e3 * max_voltage_error(&a.records, a.report.t_start),
        1e3 * max_voltage_error(&b.records, b.report.t_start)
    );
    Ok(())
}

fn write_params(out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, ParamSet::bundled_json())
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{}", ParamSet::bundled_json());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate {
            run,
            mode,
            out,
            plot,
        } => simulate(run, *mode, out, plot.as_deref()),
        Command::Report { input, t_start } => report(input, *t_start),
        Command::Compare { run, out_dir } => compare(run, out_dir.as_deref()),
        Command::Params { out } => write_params(out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
