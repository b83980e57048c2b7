//! Per-epoch result rows and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exact header of `runs.csv`.
pub const CSV_HEADER: &str =
    "run_id,experiment,epoch,mi_xy_bits,mi_sy_bits,epsilon,noise_kind,noise_std,seed,wall_ms";

/// One row of `runs.csv`: the state of one run after one epoch.
///
/// `epsilon` is empty for runs without a budget (plain estimation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub experiment: String,
    pub epoch: usize,
    pub mi_xy_bits: f64,
    pub mi_sy_bits: f64,
    pub epsilon: Option<f64>,
    pub noise_kind: String,
    pub noise_std: f64,
    pub seed: u64,
    pub wall_ms: u64,
}

impl RunRecord {
    fn check(&self) -> Result<()> {
        let finite = self.mi_xy_bits.is_finite()
            && self.mi_sy_bits.is_finite()
            && self.noise_std.is_finite()
            && self.epsilon.is_none_or(f64::is_finite);
        if finite {
            Ok(())
        } else {
            Err(Error::NonFinite(format!("record {} epoch {}", self.run_id, self.epoch)))
        }
    }
}

/// Stable order for output: grouped by run id, epochs ascending. Runs keep
/// their first-appearance order.
pub fn sort_records(records: &mut [RunRecord]) {
    let mut order: Vec<&str> = Vec::new();
    for r in records.iter() {
        if !order.contains(&r.run_id.as_str()) {
            order.push(&r.run_id);
        }
    }
    let rank: std::collections::HashMap<String, usize> = order
        .into_iter()
        .enumerate()
        .map(|(i, id)| (id.to_string(), i))
        .collect();
    records.sort_by_key(|r| (rank[&r.run_id], r.epoch));
}

/// Writes `records` as CSV, grouped by run id with ascending epochs.
pub fn write_records<W: Write>(writer: W, records: &[RunRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to write".into()));
    }
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut w = csv::Writer::from_writer(writer);
    for r in &sorted {
        r.check()?;
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records_file(path: &Path, records: &[RunRecord]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_records(std::io::BufWriter::new(file), records)
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::InvalidArgument(format!("unexpected CSV header {header:?}")));
    }
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn read_records_file(path: &Path) -> Result<Vec<RunRecord>> {
    read_records(std::fs::File::open(path)?)
}
