//! One CSV row per trial.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// Column order of the run CSV.
pub const HEADER: [&str; 15] = [
    "algo",
    "seed",
    "n",
    "m",
    "epsilon",
    "delta",
    "budget",
    "queries",
    "cost",
    "mc_expected_cost",
    "mc_stderr",
    "opt",
    "success",
    "bound_ref",
    "wall_ms",
];

/// A trial result. `None` fields are written empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub algo: String,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub budget: Option<u64>,
    pub queries: Option<u64>,
    pub cost: Option<f64>,
    pub mc_expected_cost: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub opt: Option<f64>,
    pub success: Option<bool>,
    pub bound_ref: Option<f64>,
    pub wall_ms: Option<f64>,
}

pub fn write_csv<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(HEADER)?;
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}
