//! Trajectory files (JSON) and ledger tables (CSV).

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::accounting::{AccountingError, EnergyLedger, Sample, Trajectory};
use crate::linalg::CMatrix;
use crate::qstate::{DensityMatrix, Hamiltonian};

/// Largest accepted |tr ρ − 1| in an ingested trajectory.
pub const FILE_TRACE_TOL: f64 = 1e-8;

pub const LEDGER_COLUMNS: [&str; 10] = [
    "t",
    "U",
    "W",
    "Q_cal",
    "C",
    "W_cl",
    "Q_cl",
    "S",
    "l1_coherence",
    "closure_defect",
];

#[derive(Debug, Error)]
pub enum FileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed document at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("sample {index}: field `{field}`: {message}")]
    Record {
        index: usize,
        field: String,
        message: String,
    },
    #[error("units: {0}")]
    Units(String),
    #[error(
        "sample {sample}: trace of rho is {trace}, not 1 (trajectory is not trace preserving)"
    )]
    NotTracePreserving { sample: usize, trace: f64 },
    #[error(transparent)]
    Trajectory(#[from] AccountingError),
    #[error("ledger line {line}: {message}")]
    Ledger { line: usize, message: String },
}

/// A complex matrix as separate real and imaginary row lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixRecord {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self {
            re: m.real_parts(),
            im: m.imag_parts(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Units {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one", rename = "k_B")]
    pub k_b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<String>,
}

fn one() -> f64 {
    1.0
}

impl Default for Units {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            k_b: 1.0,
            energy: None,
            time: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub t: f64,
    #[serde(rename = "H")]
    pub h: MatrixRecord,
    pub rho: MatrixRecord,
}

/// On-disk form of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    #[serde(default)]
    pub units: Units,
    pub samples: Vec<SampleRecord>,
}

// Loose mirror of the file layout so that missing or mistyped fields can be
// reported with their record index.
#[derive(Deserialize)]
struct RawFile {
    units: Option<serde_json::Value>,
    samples: Option<Vec<serde_json::Value>>,
}

fn record_err(index: usize, field: &str, message: impl Into<String>) -> FileError {
    FileError::Record {
        index,
        field: field.to_string(),
        message: message.into(),
    }
}

fn parse_matrix(
    index: usize,
    field: &str,
    value: Option<&serde_json::Value>,
) -> Result<CMatrix, FileError> {
    let value = value.ok_or_else(|| record_err(index, field, "missing"))?;
    let part = |name: &str| -> Result<Vec<Vec<f64>>, FileError> {
        let path = format!("{field}.{name}");
        let v = value
            .get(name)
            .ok_or_else(|| record_err(index, &path, "missing"))?;
        serde_json::from_value(v.clone())
            .map_err(|_| record_err(index, &path, "expected a list of rows of numbers"))
    };
    let (re, im) = (part("re")?, part("im")?);
    CMatrix::from_parts(&re, &im).map_err(|e| record_err(index, field, e.to_string()))
}

impl TrajectoryFile {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let samples = traj
            .samples()
            .iter()
            .map(|s| SampleRecord {
                t: s.t,
                h: MatrixRecord::from_matrix(s.hamiltonian.matrix()),
                rho: MatrixRecord::from_matrix(s.rho.matrix()),
            })
            .collect();
        Self {
            units: Units::default(),
            samples,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory records serialize")
    }

    pub fn write(&self, path: &Path) -> Result<(), FileError> {
        write_atomic(path, self.to_json().as_bytes())
    }

    /// Parses and validates a document, returning the units and the trajectory.
    pub fn parse(text: &str) -> Result<(Units, Trajectory), FileError> {
        let raw: RawFile = serde_json::from_str(text).map_err(|e| FileError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let units = match raw.units {
            None => Units::default(),
            Some(v) => {
                serde_json::from_value::<Units>(v).map_err(|e| FileError::Units(e.to_string()))?
            }
        };
        if !(units.hbar > 0.0 && units.hbar.is_finite() && units.k_b > 0.0 && units.k_b.is_finite())
        {
            return Err(FileError::Units("hbar and k_B must be positive".into()));
        }
        let records = raw.samples.ok_or_else(|| FileError::Syntax {
            line: 1,
            column: 1,
            message: "missing field `samples`".into(),
        })?;

        let mut samples = Vec::with_capacity(records.len());
        for (index, rec) in records.iter().enumerate() {
            let t = rec
                .get("t")
                .ok_or_else(|| record_err(index, "t", "missing"))?
                .as_f64()
                .ok_or_else(|| record_err(index, "t", "expected a number"))?;
            let h = parse_matrix(index, "H", rec.get("H"))?;
            let rho = parse_matrix(index, "rho", rec.get("rho"))?;
            let trace = rho.trace().re;
            if (trace - 1.0).abs() > FILE_TRACE_TOL {
                return Err(FileError::NotTracePreserving {
                    sample: index,
                    trace,
                });
            }
            let hamiltonian =
                Hamiltonian::new(h).map_err(|e| record_err(index, "H", e.to_string()))?;
            let rho =
                DensityMatrix::new(rho).map_err(|e| record_err(index, "rho", e.to_string()))?;
            samples.push(Sample::new(t, hamiltonian, rho));
        }
        Ok((units, Trajectory::new(samples)?))
    }

    pub fn read(path: &Path) -> Result<(Units, Trajectory), FileError> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

/// Writes `bytes` to a temporary file beside `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FileError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| FileError::Io(e.error))?;
    Ok(())
}

/// One parsed line of a ledger table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRecord {
    pub t: f64,
    pub u: f64,
    pub w: f64,
    pub q_cal: f64,
    pub c: f64,
    pub w_cl: f64,
    pub q_cl: f64,
    pub s: f64,
    pub l1_coherence: f64,
    pub closure_defect: f64,
}

impl LedgerRecord {
    fn values(&self) -> [f64; 10] {
        [
            self.t,
            self.u,
            self.w,
            self.q_cal,
            self.c,
            self.w_cl,
            self.q_cl,
            self.s,
            self.l1_coherence,
            self.closure_defect,
        ]
    }
}

pub fn ledger_records(ledger: &EnergyLedger) -> Vec<LedgerRecord> {
    ledger
        .rows()
        .iter()
        .map(|r| LedgerRecord {
            t: r.t,
            u: r.u,
            w: r.w,
            q_cal: r.q_cal,
            c: r.c,
            w_cl: r.w_cl,
            q_cl: r.q_cl,
            s: r.entropy,
            l1_coherence: r.l1_coherence,
            closure_defect: r.closure_defect,
        })
        .collect()
}

/// CSV text with a header row and 17 significant digits per value.
pub fn render_ledger(ledger: &EnergyLedger) -> String {
    let mut out = LEDGER_COLUMNS.join(",");
    out.push('\n');
    for rec in ledger_records(ledger) {
        let line = rec
            .values()
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(out, "{line}");
    }
    out
}

pub fn write_ledger(path: &Path, ledger: &EnergyLedger) -> Result<(), FileError> {
    write_atomic(path, render_ledger(ledger).as_bytes())
}

pub fn parse_ledger(text: &str) -> Result<Vec<LedgerRecord>, FileError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(FileError::Ledger {
        line: 1,
        message: "empty table".into(),
    })?;
    if header.split(',').map(str::trim).ne(LEDGER_COLUMNS) {
        return Err(FileError::Ledger {
            line: 1,
            message: format!("unexpected header `{header}`"),
        });
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| FileError::Ledger {
                line: i + 2,
                message: e.to_string(),
            })?;
        if v.len() != LEDGER_COLUMNS.len() {
            return Err(FileError::Ledger {
                line: i + 2,
                message: format!(
                    "expected {} fields, found {}",
                    LEDGER_COLUMNS.len(),
                    v.len()
                ),
            });
        }
        out.push(LedgerRecord {
            t: v[0],
            u: v[1],
            w: v[2],
            q_cal: v[3],
            c: v[4],
            w_cl: v[5],
            q_cl: v[6],
            s: v[7],
            l1_coherence: v[8],
            closure_defect: v[9],
        });
    }
    Ok(out)
}

pub fn read_ledger(path: &Path) -> Result<Vec<LedgerRecord>, FileError> {
    parse_ledger(&fs::read_to_string(path)?)
}
