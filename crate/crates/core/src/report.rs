//! JSON-lines quality reports.
//!
//! Each metric evaluation becomes one JSON object on its own line with the
//! fields `metric`, `params`, `value`, `exact`, `witness`, `budget` and
//! `seed`. Appending never rewrites earlier rows.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::Result;

/// Where a supremum-type metric was attained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    None,
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Anchor { corner: Vec<f64> },
    Hat { center: Vec<f64>, scale: Vec<f64> },
    Frequency { k: Vec<i64> },
    Subspace { s: Vec<usize>, trial: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub metric: String,
    pub params: Map<String, Value>,
    pub value: f64,
    pub exact: bool,
    pub witness: Witness,
    pub budget: Option<u64>,
    pub seed: Option<u64>,
}

impl ReportRow {
    pub fn new(metric: impl Into<String>, value: f64) -> Self {
        Self {
            metric: metric.into(),
            params: Map::new(),
            value,
            exact: false,
            witness: Witness::None,
            budget: None,
            seed: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn exact(mut self, exact: bool) -> Self {
        self.exact = exact;
        self
    }

    pub fn witness(mut self, witness: Witness) -> Self {
        self.witness = witness;
        self
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// Appends rows to a JSON-lines file, flushing after every row.
pub struct ReportWriter {
    out: BufWriter<File>,
}

impl ReportWriter {
    pub fn append(path: impl AsRef<Path>) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            out: BufWriter::new(file),
        })
    }

    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self {
            out: BufWriter::new(File::create(path)?),
        })
    }

    pub fn write(&mut self, row: &ReportRow) -> Result<()> {
        serde_json::to_writer(&mut self.out, row)?;
        self.out.write_all(b"\n")?;
        self.out.flush()?;
        Ok(())
    }
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Into::into))
        .collect()
}
