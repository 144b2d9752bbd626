//! Result files: `outlets.csv`, `fields.csv` and `ledger.json`.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::audit::{InvariantMonitor, LedgerReport};
use crate::error::Result;
use crate::geometry::ModelKind;
use crate::orchestrator::{RunOutput, StageSummary};

pub const OUTLETS_FILE: &str = "outlets.csv";
pub const FIELDS_FILE: &str = "fields.csv";
pub const LEDGER_FILE: &str = "ledger.json";

/// Paths of the files produced by [`write_outputs`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputPaths {
    pub outlets: PathBuf,
    pub fields: PathBuf,
    pub ledger: PathBuf,
}

#[derive(Serialize)]
struct StageRecord<'a> {
    index: usize,
    name: &'a str,
    model: ModelKind,
    t_start_s: f64,
    t_end_s: f64,
    mass_start: &'a [f64],
    mass_end: &'a [f64],
    inflow: &'a [f64],
    underflow: &'a [f64],
    effluent: &'a [f64],
    reacted: &'a [f64],
}

impl<'a> From<&'a StageSummary> for StageRecord<'a> {
    fn from(s: &'a StageSummary) -> Self {
        StageRecord {
            index: s.index,
            name: &s.name,
            model: s.model,
            t_start_s: s.t_start,
            t_end_s: s.t_end,
            mass_start: &s.mass_start,
            mass_end: &s.mass_end,
            inflow: &s.inflow,
            underflow: &s.underflow,
            effluent: &s.effluent,
            reacted: &s.reacted,
        }
    }
}

#[derive(Serialize)]
struct LedgerDocument<'a> {
    scenario: &'a str,
    #[serde(flatten)]
    report: &'a LedgerReport,
    max_relative_residual: f64,
    invariants: &'a InvariantMonitor,
    stages: Vec<StageRecord<'a>>,
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

fn number(v: f64) -> String {
    // Shortest round-trip representation; scientific for very small or large magnitudes.
    format!("{v:?}")
}

pub fn outlets_header(names: &[String], k_c: usize) -> Vec<String> {
    let (solids, solubles) = names.split_at(k_c);
    let mut header = vec!["t_s".to_string(), "zbar_m".to_string()];
    for (prefix, group) in [("C_u", solids), ("S_u", solubles), ("C_e", solids), ("S_e", solubles)] {
        header.extend(group.iter().map(|n| format!("{prefix}_{n}")));
    }
    header
}

pub fn write_outlets(path: &Path, run: &RunOutput) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(outlets_header(&run.names, run.k_c))?;
    for o in &run.outlets {
        let row = [o.t, o.zbar]
            .into_iter()
            .chain(o.c_u.iter().copied())
            .chain(o.s_u.iter().copied())
            .chain(o.c_e.iter().copied())
            .chain(o.s_e.iter().copied())
            .map(number);
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Long format, one row per sample time, cell and quantity. The solids total
/// `X` and water concentration `W` follow the named components.
pub fn write_fields(path: &Path, run: &RunOutput) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t_s", "z_m", "component", "value"])?;
    let k_c = run.k_c;
    let k_s = run.names.len() - k_c;
    for f in &run.fields {
        let t = number(f.t);
        for (j, z) in run.cell_centers.iter().enumerate() {
            let z = number(*z);
            for (k, name) in run.names.iter().enumerate() {
                let v = if k < k_c { f.c[j * k_c + k] } else { f.s[j * k_s + k - k_c] };
                w.write_record([t.as_str(), z.as_str(), name.as_str(), &number(v)])?;
            }
            w.write_record([t.as_str(), z.as_str(), "X", &number(f.x[j])])?;
            w.write_record([t.as_str(), z.as_str(), "W", &number(f.w[j])])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_ledger(path: &Path, scenario: &str, run: &RunOutput) -> Result<()> {
    let doc = LedgerDocument {
        scenario,
        report: &run.ledger,
        max_relative_residual: run.ledger.max_relative_residual(),
        invariants: &run.monitor,
        stages: run.stages.iter().map(StageRecord::from).collect(),
    };
    let mut file = File::create(path)?;
    serde_json::to_writer_pretty(&mut file, &doc)?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Writes all three result files into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, scenario: &str, run: &RunOutput) -> Result<OutputPaths> {
    std::fs::create_dir_all(dir)?;
    let paths = OutputPaths {
        outlets: dir.join(OUTLETS_FILE),
        fields: dir.join(FIELDS_FILE),
        ledger: dir.join(LEDGER_FILE),
    };
    write_outlets(&paths.outlets, run)?;
    write_fields(&paths.fields, run)?;
    write_ledger(&paths.ledger, scenario, run)?;
    Ok(paths)
}
