//! CSV renderings. Floats are written in Rust's shortest round-trip form,
//! so a written table parses back to identical values.

use std::io::{Read, Write};

use anyhow::{anyhow, bail, Context, Result};
use hdloc::simharness::tables::{AreCell, ComparedCell};
use hdloc::simharness::PowerRow;

pub const POWER_HEADER: [&str; 16] = [
    "test",
    "scenario",
    "n",
    "p",
    "allocation",
    "signal",
    "rejections",
    "reps",
    "rejection_rate",
    "mc_stderr",
    "seed",
    "size_corrected",
    "critical_value",
    "wall_time",
    "reference",
    "deviation",
];

pub const ARE_HEADER: [&str; 6] = ["measure", "distribution", "value", "se", "reference", "relative_deviation"];

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

pub fn write_power_csv<W: Write>(out: W, cells: &[ComparedCell]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(POWER_HEADER)?;
    for c in cells {
        let r = &c.row;
        w.write_record([
            r.test.label().to_string(),
            r.scenario.clone(),
            r.n.to_string(),
            r.p.to_string(),
            r.allocation.label().to_string(),
            r.signal.to_string(),
            r.rejections.to_string(),
            r.reps.to_string(),
            r.rejection_rate.to_string(),
            r.mc_stderr.to_string(),
            r.seed.to_string(),
            r.size_corrected.to_string(),
            opt(r.critical_value),
            r.wall_time.to_string(),
            opt(c.reference),
            opt(c.deviation),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_power_csv<R: Read>(input: R) -> Result<Vec<ComparedCell>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != POWER_HEADER {
        bail!("unexpected header {header:?}");
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let f = |c: usize| rec.get(c).ok_or_else(|| anyhow!("row {row}: missing column {}", c + 1));
        let ctx = |c: usize| format!("row {row}, column {}", c + 1);
        let num = |c: usize| -> Result<f64> { f(c)?.parse::<f64>().with_context(|| ctx(c)) };
        let int = |c: usize| -> Result<u64> { f(c)?.parse::<u64>().with_context(|| ctx(c)) };
        let maybe = |c: usize| -> Result<Option<f64>> {
            let s = f(c)?;
            if s.is_empty() {
                Ok(None)
            } else {
                Ok(Some(s.parse::<f64>().with_context(|| ctx(c))?))
            }
        };
        out.push(ComparedCell {
            row: PowerRow {
                test: f(0)?.parse().with_context(|| ctx(0))?,
                scenario: f(1)?.to_string(),
                n: int(2)? as usize,
                p: int(3)? as usize,
                allocation: f(4)?.parse().with_context(|| ctx(4))?,
                signal: num(5)?,
                rejections: int(6)?,
                reps: int(7)?,
                rejection_rate: num(8)?,
                mc_stderr: num(9)?,
                seed: int(10)?,
                size_corrected: f(11)?.parse().with_context(|| ctx(11))?,
                critical_value: maybe(12)?,
                wall_time: num(13)?,
            },
            reference: maybe(14)?,
            deviation: maybe(15)?,
        });
    }
    Ok(out)
}

pub fn write_are_csv<W: Write>(out: W, cells: &[AreCell]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ARE_HEADER)?;
    for c in cells {
        w.write_record([
            c.measure.clone(),
            c.noise.label(),
            c.value.to_string(),
            c.se.to_string(),
            opt(c.reference),
            opt(c.relative_deviation),
        ])?;
    }
    w.flush()?;
    Ok(())
}
