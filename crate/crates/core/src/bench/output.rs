use std::io::Write;

use serde::Serialize;

use super::SweepRecord;
use crate::error::Result;

/// First line of every sweep CSV.
pub const SWEEP_SCHEMA: &str = "# qcausal sweep schema v1";

const COLUMNS: [&str; 13] = [
    "family",
    "param",
    "mechanism",
    "C11",
    "C22",
    "C33",
    "round",
    "criterion",
    "distance",
    "verdict",
    "N",
    "std_criterion",
    "std_distance",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the schema comment, the header and one row per record.
pub fn write_csv<W: Write>(records: &[SweepRecord], mut out: W) -> Result<()> {
    writeln!(out, "{SWEEP_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in records {
        let [c11, c22, c33] = r.round0.0;
        w.write_record([
            r.family.tag().to_string(),
            r.param.clone(),
            r.mechanism.tag().to_string(),
            c11.to_string(),
            c22.to_string(),
            c33.to_string(),
            r.rounds_used.to_string(),
            r.criterion.to_string(),
            opt(r.distance),
            r.verdict.tag().to_string(),
            r.shots.to_string(),
            opt(r.std_criterion),
            opt(r.std_distance),
        ])
        ?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}
