//! JSON envelope and CSV grid writers.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use bellmix::tol;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub global: f64,
    pub algebra: f64,
    pub lagrangian: f64,
    pub stationarity: f64,
    pub insensitive: f64,
}

impl Tolerances {
    pub fn current() -> Self {
        Tolerances {
            global: tol::global(),
            algebra: tol::ALGEBRA,
            lagrangian: tol::LAGRANGIAN,
            stationarity: tol::STATIONARITY,
            insensitive: tol::INSENSITIVE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// The parsed arguments of the command.
    pub spec: serde_json::Value,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub format: Format,
    pub metadata: Metadata,
    pub payload: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(command: &str, args: &impl Serialize, payload: T) -> Self {
        Envelope {
            format: Format::Json,
            metadata: Metadata {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                spec: serde_json::to_value(args).unwrap_or(serde_json::Value::Null),
                tolerances: Tolerances::current(),
            },
            payload,
        }
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            Ok(Box::new(io::BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

pub fn write_json(value: &impl Serialize, out: Option<&Path>) -> Result<(), CliError> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::Io(e.to_string()))
}

/// A rectangular table with a header row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Grid {
    pub fn new(columns: &[&str]) -> Self {
        Grid {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Row with the smallest value in column `col`.
    pub fn argmin(&self, col: usize) -> Option<&[f64]> {
        self.rows
            .iter()
            .filter(|r| r[col].is_finite())
            .min_by(|a, b| a[col].total_cmp(&b[col]))
            .map(|r| r.as_slice())
    }
}

pub fn write_csv(grid: &Grid, out: Option<&Path>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    let io_err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&grid.columns).map_err(io_err)?;
    for row in &grid.rows {
        w.write_record(row.iter().map(|x| format!("{x:e}"))).map_err(io_err)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}
