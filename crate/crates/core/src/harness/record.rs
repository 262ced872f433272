//! Result rows and their CSV form.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::nonlinearity::RegVariant;

/// Column order of every CSV the harness writes.
pub const CSV_HEADER: &str = "case,variant,eps,h,tau,T,t_eval,err_l2,err_h1,err_linf,err_energy,\
mass_drift,momentum_drift,energy_drift,steps,stab_violations,wall_ms";

/// A measured quantity in a row. Written as a number, as an empty field when the
/// run did not compute it, or as `FAILED` when the run blew up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Value(f64),
    NotComputed,
    Failed,
}

impl Metric {
    pub fn value(self) -> Option<f64> {
        match self {
            Metric::Value(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_failed(self) -> bool {
        self == Metric::Failed
    }
}

impl From<f64> for Metric {
    fn from(v: f64) -> Self {
        Metric::Value(v)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Value(v) => write!(f, "{v:.3e}"),
            Metric::NotComputed => f.write_str("-"),
            Metric::Failed => f.write_str("FAILED"),
        }
    }
}

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Metric::Value(v) => s.serialize_f64(*v),
            Metric::NotComputed => s.serialize_str(""),
            Metric::Failed => s.serialize_str("FAILED"),
        }
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "" => Ok(Metric::NotComputed),
            "FAILED" => Ok(Metric::Failed),
            other => other
                .parse::<f64>()
                .map(Metric::Value)
                .map_err(|_| serde::de::Error::custom(format!("bad metric `{other}`"))),
        }
    }
}

mod variant_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &RegVariant, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(v.as_str())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<RegVariant, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One run (or one snapshot of a run) of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub case: u8,
    #[serde(with = "variant_serde")]
    pub variant: RegVariant,
    pub eps: f64,
    pub h: f64,
    pub tau: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub t_eval: f64,
    pub err_l2: Metric,
    pub err_h1: Metric,
    pub err_linf: Metric,
    pub err_energy: Metric,
    pub mass_drift: Metric,
    pub momentum_drift: Metric,
    pub energy_drift: Metric,
    pub steps: usize,
    pub stab_violations: usize,
    pub wall_ms: u64,
}

impl ResultRow {
    pub fn failed(&self) -> bool {
        self.err_l2.is_failed()
    }

    /// Equality on everything except the wall-clock column.
    pub fn same_result(&self, other: &ResultRow) -> bool {
        let mut a = self.clone();
        a.wall_ms = other.wall_ms;
        a == *other
    }
}

pub fn write_csv_to<W: Write>(w: W, rows: &[ResultRow]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    write_csv_to(File::create(path)?, rows)
}

pub fn read_csv_from<R: Read>(r: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::InvalidInput(format!(
            "unexpected CSV header `{}`",
            header.join(",")
        )));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    read_csv_from(File::open(path)?)
}

/// `out.csv` -> `out.csv.meta`
pub fn meta_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn write_meta(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut f = File::create(path)?;
    for (k, v) in entries {
        writeln!(f, "{k} = {v}")?;
    }
    Ok(())
}
