//! Per-step time-series records and their CSV / plot-data forms.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::observer::ClampFlags;

/// Column names of the CSV output, in order.
pub const CSV_COLUMNS: [&str; 22] = [
    "t_s",
    "current_A",
    "v_t_V",
    "t_b_K",
    "dt_b_m",
    "css_neg_mol_m3",
    "css_pos_mol_m3",
    "csavg_neg_mol_m3",
    "csavg_pos_mol_m3",
    "soc",
    "v_t_meas_V",
    "dt_b_meas_m",
    "v_t_hat_V",
    "dt_b_hat_m",
    "css_neg_hat_mol_m3",
    "css_pos_hat_mol_m3",
    "csavg_neg_hat_mol_m3",
    "csavg_pos_hat_mol_m3",
    "soc_hat",
    "check_css_pos_mol_m3",
    "check_csavg_neg_mol_m3",
    "clamp_flags",
];

/// The header row exactly as written.
pub fn csv_header() -> String {
    CSV_COLUMNS.join(",")
}

/// One plant step: truth, measurements and estimates at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeseriesRecord {
    pub t: f64,
    pub current: f64,
    pub v_t: f64,
    pub t_b: f64,
    pub dt_b: f64,
    pub css_neg: f64,
    pub css_pos: f64,
    pub csavg_neg: f64,
    pub csavg_pos: f64,
    pub soc: f64,
    pub v_t_meas: f64,
    pub dt_b_meas: f64,
    pub v_t_hat: f64,
    pub dt_b_hat: f64,
    pub css_neg_hat: f64,
    pub css_pos_hat: f64,
    pub csavg_neg_hat: f64,
    pub csavg_pos_hat: f64,
    pub soc_hat: f64,
    pub check_css_pos: f64,
    pub check_csavg_neg: f64,
    pub clamps: ClampFlags,
}

impl TimeseriesRecord {
    const N_FLOATS: usize = 21;

    fn floats(&self) -> [f64; Self::N_FLOATS] {
        [
            self.t,
            self.current,
            self.v_t,
            self.t_b,
            self.dt_b,
            self.css_neg,
            self.css_pos,
            self.csavg_neg,
            self.csavg_pos,
            self.soc,
            self.v_t_meas,
            self.dt_b_meas,
            self.v_t_hat,
            self.dt_b_hat,
            self.css_neg_hat,
            self.css_pos_hat,
            self.csavg_neg_hat,
            self.csavg_pos_hat,
            self.soc_hat,
            self.check_css_pos,
            self.check_csavg_neg,
        ]
    }

    fn from_floats(v: [f64; Self::N_FLOATS], clamps: ClampFlags) -> Self {
        Self {
            t: v[0],
            current: v[1],
            v_t: v[2],
            t_b: v[3],
            dt_b: v[4],
            css_neg: v[5],
            css_pos: v[6],
            csavg_neg: v[7],
            csavg_pos: v[8],
            soc: v[9],
            v_t_meas: v[10],
            dt_b_meas: v[11],
            v_t_hat: v[12],
            dt_b_hat: v[13],
            css_neg_hat: v[14],
            css_pos_hat: v[15],
            csavg_neg_hat: v[16],
            csavg_pos_hat: v[17],
            soc_hat: v[18],
            check_css_pos: v[19],
            check_csavg_neg: v[20],
            clamps,
        }
    }

    fn csv_fields(&self) -> Vec<String> {
        let mut out: Vec<String> = self.floats().iter().map(|v| format!("{v:.16e}")).collect();
        out.push(self.clamps.bits().to_string());
        out
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Csv(format!("{}: {other:?}", path.display())),
    }
}

/// Streams records to a CSV file, header first. Rows are flushed on
/// [`CsvSink::finish`] or when the sink is dropped, so a run that aborts
/// still leaves the rows produced so far.
pub struct CsvSink {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
    rows: usize,
}

impl CsvSink {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(BufWriter::new(file));
        writer.write_record(CSV_COLUMNS).map_err(csv_err(path))?;
        Ok(Self {
            path: path.to_path_buf(),
            writer,
            rows: 0,
        })
    }

    pub fn push(&mut self, r: &TimeseriesRecord) -> Result<()> {
        self.writer
            .write_record(r.csv_fields())
            .map_err(csv_err(&self.path))?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(io_err(&self.path))
    }
}

pub fn emit_csv(records: &[TimeseriesRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Csv("refusing to write an empty record list".into()));
    }
    let mut sink = CsvSink::create(path)?;
    for r in records {
        sink.push(r)?;
    }
    sink.finish()
}

pub fn parse_csv(path: &Path) -> Result<Vec<TimeseriesRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(csv_err(path))?;
    let header = reader.headers().map_err(csv_err(path))?;
    if header.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(Error::Csv(format!(
            "{}: header does not match the expected columns {}",
            path.display(),
            csv_header()
        )));
    }
    let mut records = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(csv_err(path))?;
        let bad =
            |what: &str| Error::Csv(format!("{}: data row {}: {what}", path.display(), line + 1));
        if row.len() != CSV_COLUMNS.len() {
            return Err(bad(&format!(
                "expected {} fields, found {}",
                CSV_COLUMNS.len(),
                row.len()
            )));
        }
        let mut v = [0.0; TimeseriesRecord::N_FLOATS];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = row[k].trim().parse().map_err(|_| {
                bad(&format!(
                    "column {} is not a number: {:?}",
                    CSV_COLUMNS[k], &row[k]
                ))
            })?;
        }
        let flags: u8 = row[TimeseriesRecord::N_FLOATS]
            .trim()
            .parse()
            .map_err(|_| bad("clamp_flags is not an integer"))?;
        records.push(TimeseriesRecord::from_floats(
            v,
            ClampFlags::from_bits(flags),
        ));
    }
    Ok(records)
}

#[derive(Debug, Serialize)]
struct Series {
    name: &'static str,
    unit: &'static str,
    values: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct Panel {
    id: &'static str,
    title: &'static str,
    series: Vec<Series>,
}

#[derive(Debug, Serialize)]
struct PlotData {
    t_s: Vec<f64>,
    panels: Vec<Panel>,
}

fn plot_data(records: &[TimeseriesRecord]) -> PlotData {
    let col = |f: fn(&TimeseriesRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
    let s = |name, unit, values| Series { name, unit, values };
    let panels = vec![
        Panel {
            id: "a",
            title: "Current",
            series: vec![s("current", "A", col(|r| r.current))],
        },
        Panel {
            id: "b",
            title: "Voltage",
            series: vec![
                s("v_t_meas", "V", col(|r| r.v_t_meas)),
                s("v_t", "V", col(|r| r.v_t)),
                s("v_t_hat", "V", col(|r| r.v_t_hat)),
            ],
        },
        Panel {
            id: "c",
            title: "Expansion",
            series: vec![
                s("dt_b_meas", "m", col(|r| r.dt_b_meas)),
                s("dt_b", "m", col(|r| r.dt_b)),
                s("dt_b_hat", "m", col(|r| r.dt_b_hat)),
            ],
        },
        Panel {
            id: "d",
            title: "Voltage and expansion errors",
            series: vec![
                s("v_t_error", "V", col(|r| r.v_t_hat - r.v_t_meas)),
                s("dt_b_error", "m", col(|r| r.dt_b_hat - r.dt_b_meas)),
            ],
        },
        Panel {
            id: "e",
            title: "Surface concentration",
            series: vec![
                s("css_neg", "mol/m3", col(|r| r.css_neg)),
                s("css_neg_hat", "mol/m3", col(|r| r.css_neg_hat)),
                s("css_pos", "mol/m3", col(|r| r.css_pos)),
                s("css_pos_hat", "mol/m3", col(|r| r.css_pos_hat)),
            ],
        },
        Panel {
            id: "f",
            title: "Average concentration",
            series: vec![
                s("csavg_neg", "mol/m3", col(|r| r.csavg_neg)),
                s("csavg_neg_hat", "mol/m3", col(|r| r.csavg_neg_hat)),
                s("csavg_pos", "mol/m3", col(|r| r.csavg_pos)),
                s("csavg_pos_hat", "mol/m3", col(|r| r.csavg_pos_hat)),
            ],
        },
    ];
    PlotData {
        t_s: col(|r| r.t),
        panels,
    }
}

/// Writes the records as JSON grouped into the six figure panels (a)-(f).
pub fn emit_plotdata(records: &[TimeseriesRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Csv(
            "refusing to write plot data for an empty record list".into(),
        ));
    }
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, &plot_data(records))
        .map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
    w.flush().map_err(io_err(path))
}
