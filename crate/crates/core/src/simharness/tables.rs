//! Table grids and the driver that runs them cell by cell.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::reference;
use super::store::ResultStore;
use super::{run_experiment_with_critical, simulate_critical_values, ExperimentConfig, PowerRow, PowerTable};
use crate::analysis::{are_table, are_table_kinds, AreRow};
use crate::error::{Error, Result};
use crate::samplers::{Allocation, NoiseKind};
use crate::stat_tests::{TestKind, TraceMode};
use crate::DEFAULT_SEED;

pub const DEFAULT_REPS: usize = 2500;
pub const DEFAULT_NULL_REPS: usize = 2500;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_ARE_P: usize = 2000;
pub const DEFAULT_ARE_REPS: usize = 10_000;
pub const SCATTER_RHO: f64 = 0.5;
pub const HIGH_DIM_SIGNAL: f64 = 0.05;
pub const LOW_DIM_SIGNAL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableId {
    T1,
    T2,
    T3,
    T4,
}

impl TableId {
    pub const ALL: [TableId; 4] = [Self::T1, Self::T2, Self::T3, Self::T4];
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for TableId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T1" => Ok(Self::T1),
            "T2" => Ok(Self::T2),
            "T3" => Ok(Self::T3),
            "T4" => Ok(Self::T4),
            _ => Err(Error::InvalidParameter(format!("unknown table {s:?}; expected T1, T2, T3 or T4"))),
        }
    }
}

/// Settings that may replace the published protocol, e.g. for quick runs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TableOverrides {
    pub reps: Option<usize>,
    pub null_reps: Option<usize>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub trace_mode: Option<TraceMode>,
    pub are_p: Option<usize>,
    pub are_reps: Option<usize>,
}

/// Every configuration of a size/power table, in display order. Each
/// configuration evaluates all of the table's tests on common samples.
pub fn table_configs(id: TableId, o: &TableOverrides) -> Result<Vec<ExperimentConfig>> {
    let base = |scenario: NoiseKind, n, p, allocation, signal, tests: Vec<TestKind>, size_corrected| ExperimentConfig {
        scenario,
        rho: SCATTER_RHO,
        n,
        p,
        allocation,
        signal,
        tests,
        alpha: o.alpha.unwrap_or(DEFAULT_ALPHA),
        reps: o.reps.unwrap_or(DEFAULT_REPS),
        master_seed: o.seed.unwrap_or(DEFAULT_SEED),
        size_corrected,
        null_reps: o.null_reps.unwrap_or(DEFAULT_NULL_REPS),
        trace_mode: o.trace_mode.unwrap_or_default(),
    };
    let mut out = Vec::new();
    match id {
        TableId::T1 => return Err(Error::InvalidParameter("T1 is an efficiency table, not a power table".into())),
        TableId::T2 => {
            for k in 1..=3 {
                for allocation in [Allocation::Dense, Allocation::Sparse] {
                    for (n, p) in [(30, 24), (40, 32)] {
                        let s = NoiseKind::scenario(k)?;
                        out.push(base(s, n, p, allocation, LOW_DIM_SIGNAL, vec![TestKind::Tsr, TestKind::Sr], true));
                    }
                }
            }
        }
        TableId::T3 | TableId::T4 => {
            let scenarios: &[u8] = if id == TableId::T3 { &[1, 2, 3] } else { &[4, 5] };
            for &k in scenarios {
                for n in [30, 40] {
                    for p in [100, 200, 400] {
                        for allocation in [Allocation::Null, Allocation::Dense, Allocation::Sparse] {
                            let signal = if allocation == Allocation::Null { 0.0 } else { HIGH_DIM_SIGNAL };
                            let tests = vec![TestKind::Cq, TestKind::Ss, TestKind::Sr];
                            out.push(base(NoiseKind::scenario(k)?, n, p, allocation, signal, tests, false));
                        }
                    }
                }
            }
        }
    }
    for c in &out {
        c.validate()?;
    }
    Ok(out)
}

/// A simulated cell next to its published value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparedCell {
    pub row: PowerRow,
    /// Published value in percent.
    pub reference: Option<f64>,
    /// Simulated minus published, in percentage points.
    pub deviation: Option<f64>,
}

impl ComparedCell {
    pub fn new(row: PowerRow) -> Self {
        let reference = reference::power_cell(row.test, &row.scenario, row.n, row.p, row.allocation);
        let deviation = reference.map(|r| 100.0 * row.rejection_rate - r);
        Self { row, reference, deviation }
    }
}

/// One efficiency value next to its published value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreCell {
    pub noise: NoiseKind,
    /// "ARE(SS,CQ)", "ARE(SR,CQ)" or "ARE(SR,SS)".
    pub measure: String,
    pub value: f64,
    pub se: f64,
    pub reference: Option<f64>,
    /// `value / reference - 1`.
    pub relative_deviation: Option<f64>,
}

pub const ARE_MEASURES: [&str; 3] = ["ARE(SS,CQ)", "ARE(SR,CQ)", "ARE(SR,SS)"];

pub fn are_cells(rows: &[AreRow]) -> Vec<AreCell> {
    let kinds = are_table_kinds();
    let mut out = Vec::new();
    for (m, name) in ARE_MEASURES.iter().enumerate() {
        for row in rows {
            let (value, se) = match m {
                0 => (row.ss_cq, row.se_ss_cq),
                1 => (row.sr_cq, row.se_sr_cq),
                _ => (row.sr_ss, row.se_sr_ss),
            };
            let reference = kinds.iter().position(|k| *k == row.noise).map(|c| reference::T1[m][c]);
            out.push(AreCell {
                noise: row.noise,
                measure: name.to_string(),
                value,
                se,
                reference,
                relative_deviation: reference.map(|r| value / r - 1.0),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TableArtifact {
    Are { p: usize, reps: usize, seed: u64, rows: Vec<AreRow>, cells: Vec<AreCell> },
    Power { id: TableId, cells: Vec<ComparedCell> },
}

impl TableArtifact {
    pub fn power_table(&self) -> Option<PowerTable> {
        match self {
            Self::Power { cells, .. } => Some(PowerTable { rows: cells.iter().map(|c| c.row.clone()).collect() }),
            Self::Are { .. } => None,
        }
    }
}

/// Progress notification after each finished cell; `cached` is true when
/// the result came from the store.
pub type Progress<'a> = &'a mut dyn FnMut(&ExperimentConfig, &PowerTable, bool);

pub fn run_table(id: TableId, overrides: &TableOverrides, store: Option<&ResultStore>) -> Result<TableArtifact> {
    run_table_with_progress(id, overrides, store, &mut |_, _, _| {})
}

pub fn run_table_with_progress(
    id: TableId,
    o: &TableOverrides,
    store: Option<&ResultStore>,
    progress: Progress<'_>,
) -> Result<TableArtifact> {
    if id == TableId::T1 {
        let p = o.are_p.unwrap_or(DEFAULT_ARE_P);
        let reps = o.are_reps.unwrap_or(DEFAULT_ARE_REPS);
        let seed = o.seed.unwrap_or(DEFAULT_SEED);
        let rows = are_table(&are_table_kinds(), p, reps, seed)?;
        let cells = are_cells(&rows);
        return Ok(TableArtifact::Are { p, reps, seed, rows, cells });
    }
    let mut critical: HashMap<String, Vec<f64>> = HashMap::new();
    let mut cells = Vec::new();
    for config in table_configs(id, o)? {
        let table = run_cell(&config, store, &mut critical, progress).map_err(|e| Error::Cell {
            cell: describe(&config),
            source: Box::new(e),
        })?;
        cells.extend(table.rows.into_iter().map(ComparedCell::new));
    }
    Ok(TableArtifact::Power { id, cells })
}

fn run_cell(
    config: &ExperimentConfig,
    store: Option<&ResultStore>,
    critical: &mut HashMap<String, Vec<f64>>,
    progress: Progress<'_>,
) -> Result<PowerTable> {
    let hash = config.hash();
    if let Some(record) = store.map(|s| s.get(&hash)).transpose()?.flatten() {
        let table = PowerTable { rows: record.rows };
        progress(config, &table, true);
        return Ok(table);
    }
    // Dense and sparse cells share the null calibration of their scenario.
    let crit = if config.size_corrected {
        let key = config.null_version().hash();
        if !critical.contains_key(&key) {
            critical.insert(key.clone(), simulate_critical_values(config, &config.tests, config.alpha)?);
        }
        Some(critical[&key].clone())
    } else {
        None
    };
    let table = run_experiment_with_critical(config, crit.as_deref())?;
    if let Some(s) = store {
        s.append(config, &table)?;
    }
    progress(config, &table, false);
    Ok(table)
}

pub fn describe(c: &ExperimentConfig) -> String {
    format!(
        "scenario {}, n = {}, p = {}, {}",
        c.scenario_label(),
        c.n,
        c.p,
        c.allocation.label()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        let o = TableOverrides::default();
        let t2 = table_configs(TableId::T2, &o).unwrap();
        assert_eq!(t2.len(), 12);
        assert!(t2.iter().all(|c| c.size_corrected && c.signal == 0.1 && c.tests.len() == 2));
        let t3 = table_configs(TableId::T3, &o).unwrap();
        assert_eq!(t3.len(), 2 * 3 * 3 * 3);
        assert_eq!(t3.iter().map(|c| c.tests.len()).sum::<usize>(), 162);
        assert!(t3.iter().all(|c| c.allocation == Allocation::Null || c.signal == 0.05));
        let t4 = table_configs(TableId::T4, &o).unwrap();
        assert_eq!(t4.len(), 36);
        assert!(t4.iter().all(|c| matches!(c.scenario_label().as_str(), "IV" | "V")));
        assert!(table_configs(TableId::T1, &o).is_err());
    }

    #[test]
    fn every_cell_has_a_reference() {
        let o = TableOverrides::default();
        for id in [TableId::T2, TableId::T3, TableId::T4] {
            for c in table_configs(id, &o).unwrap() {
                for &t in &c.tests {
                    let r = reference::power_cell(t, &c.scenario_label(), c.n, c.p, c.allocation);
                    assert!(r.is_some(), "{id} {} {t}", describe(&c));
                }
            }
        }
    }

    #[test]
    fn overrides_apply() {
        let o = TableOverrides { reps: Some(100), seed: Some(9), trace_mode: Some(TraceMode::Full), ..Default::default() };
        let c = &table_configs(TableId::T3, &o).unwrap()[0];
        assert_eq!((c.reps, c.master_seed, c.trace_mode), (100, 9, TraceMode::Full));
    }

    #[test]
    fn table_ids_parse() {
        assert_eq!("t3".parse::<TableId>().unwrap(), TableId::T3);
        assert!("T5".parse::<TableId>().is_err());
    }
}
