//! Markdown renderings laid out like the published tables. Each cell shows
//! the simulated value followed by the published one in parentheses.

use std::fmt::Write;

use super::tables::{AreCell, ComparedCell, TableArtifact, TableId, ARE_MEASURES};
use crate::analysis::are_table_kinds;
use crate::samplers::{Allocation, NoiseKind};
use crate::stat_tests::TestKind;

fn are_column_label(noise: &NoiseKind) -> String {
    match noise {
        NoiseKind::Mvt { df } => format!("t{df}"),
        NoiseKind::Normal => "N(0,I)".into(),
        NoiseKind::MixedNormal { gamma, tau } => format!("MN({gamma},{tau})"),
        other => other.label(),
    }
}

fn pair(value: String, reference: Option<f64>, digits: usize) -> String {
    match reference {
        Some(r) => format!("{value} ({r:.digits$})"),
        None => value,
    }
}

pub fn render_markdown(artifact: &TableArtifact) -> String {
    match artifact {
        TableArtifact::Are { p, reps, seed, cells, .. } => render_are(*p, *reps, *seed, cells),
        TableArtifact::Power { id: TableId::T2, cells } => render_low_dim(cells),
        TableArtifact::Power { id, cells } => render_high_dim(*id, cells),
    }
}

fn render_are(p: usize, reps: usize, seed: u64, cells: &[AreCell]) -> String {
    let kinds = are_table_kinds();
    let mut noises: Vec<NoiseKind> = Vec::new();
    for c in cells {
        if !noises.contains(&c.noise) {
            noises.push(c.noise);
        }
    }
    noises.sort_by_key(|n| kinds.iter().position(|k| k == n).unwrap_or(usize::MAX));
    let mut s = String::new();
    writeln!(s, "Asymptotic relative efficiencies (p = {p}, {reps} replications, seed {seed}); published values in parentheses.\n").unwrap();
    write!(s, "| |").unwrap();
    for n in &noises {
        write!(s, " {} |", are_column_label(n)).unwrap();
    }
    write!(s, "\n|---|").unwrap();
    for _ in &noises {
        write!(s, "---|").unwrap();
    }
    s.push('\n');
    for m in ARE_MEASURES {
        write!(s, "| {m} |").unwrap();
        for n in &noises {
            let cell = cells.iter().find(|c| c.measure == m && c.noise == *n);
            let text = cell.map_or("-".into(), |c| pair(format!("{:.2}", c.value), c.reference, 2));
            write!(s, " {text} |").unwrap();
        }
        s.push('\n');
    }
    s
}

fn pct(cell: Option<&ComparedCell>) -> String {
    cell.map_or("-".into(), |c| pair(format!("{:.1}", 100.0 * c.row.rejection_rate), c.reference, 1))
}

fn find<'a>(cells: &'a [ComparedCell], t: TestKind, s: &str, n: usize, p: usize, a: Allocation) -> Option<&'a ComparedCell> {
    cells
        .iter()
        .find(|c| c.row.test == t && c.row.scenario == s && c.row.n == n && c.row.p == p && c.row.allocation == a)
}

fn scenarios(cells: &[ComparedCell]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for c in cells {
        if !out.contains(&c.row.scenario) {
            out.push(c.row.scenario.clone());
        }
    }
    out
}

fn render_high_dim(id: TableId, cells: &[ComparedCell]) -> String {
    let tests = [TestKind::Cq, TestKind::Ss, TestKind::Sr];
    let groups = [Allocation::Null, Allocation::Dense, Allocation::Sparse];
    let mut s = String::new();
    writeln!(s, "{id}: empirical size and power (%); published values in parentheses.\n").unwrap();
    writeln!(s, "| | | Size | | | Dense | | | Sparse | | |").unwrap();
    writeln!(s, "|---|---|---|---|---|---|---|---|---|---|---|").unwrap();
    writeln!(s, "| n | p | CQ | SS | SR | CQ | SS | SR | CQ | SS | SR |").unwrap();
    for sc in scenarios(cells) {
        writeln!(s, "| **Scenario {sc}** | | | | | | | | | | |").unwrap();
        let mut np: Vec<(usize, usize)> = Vec::new();
        for c in cells.iter().filter(|c| c.row.scenario == sc) {
            if !np.contains(&(c.row.n, c.row.p)) {
                np.push((c.row.n, c.row.p));
            }
        }
        for (n, p) in np {
            write!(s, "| {n} | {p} |").unwrap();
            for a in groups {
                for t in tests {
                    write!(s, " {} |", pct(find(cells, t, &sc, n, p, a))).unwrap();
                }
            }
            s.push('\n');
        }
    }
    s
}

fn render_low_dim(cells: &[ComparedCell]) -> String {
    let dims = [(30, 24), (40, 32)];
    let mut s = String::new();
    writeln!(s, "T2: size-corrected power (%); published values in parentheses.\n").unwrap();
    writeln!(s, "| | Dense | | | | Sparse | | | |").unwrap();
    writeln!(s, "|---|---|---|---|---|---|---|---|---|").unwrap();
    writeln!(s, "| (n,p) | (30,24) | | (40,32) | | (30,24) | | (40,32) | |").unwrap();
    writeln!(s, "| Scenario | TSR | SR | TSR | SR | TSR | SR | TSR | SR |").unwrap();
    for sc in scenarios(cells) {
        write!(s, "| ({sc}) |").unwrap();
        for a in [Allocation::Dense, Allocation::Sparse] {
            for (n, p) in dims {
                for t in [TestKind::Tsr, TestKind::Sr] {
                    write!(s, " {} |", pct(find(cells, t, &sc, n, p, a))).unwrap();
                }
            }
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simharness::PowerRow;

    fn cell(test: TestKind, scenario: &str, n: usize, p: usize, allocation: Allocation, rate: f64) -> ComparedCell {
        ComparedCell::new(PowerRow {
            test,
            scenario: scenario.into(),
            n,
            p,
            allocation,
            signal: 0.05,
            rejections: (rate * 100.0) as u64,
            reps: 100,
            rejection_rate: rate,
            mc_stderr: 0.0,
            seed: 1,
            size_corrected: false,
            critical_value: None,
            wall_time: 0.0,
        })
    }

    #[test]
    fn high_dim_layout() {
        let cells = vec![
            cell(TestKind::Cq, "II", 40, 400, Allocation::Dense, 0.42),
            cell(TestKind::Sr, "II", 40, 400, Allocation::Null, 0.05),
        ];
        let md = render_markdown(&TableArtifact::Power { id: TableId::T3, cells });
        assert!(md.contains("| n | p | CQ | SS | SR | CQ | SS | SR | CQ | SS | SR |"));
        assert!(md.contains("**Scenario II**"));
        assert!(md.contains("| 40 | 400 | - | - | 5.0 (6.5) | 42.0 (41.7) | - |"), "{md}");
    }

    #[test]
    fn low_dim_layout() {
        let cells = vec![cell(TestKind::Sr, "I", 30, 24, Allocation::Dense, 0.5)];
        let md = render_markdown(&TableArtifact::Power { id: TableId::T2, cells });
        assert!(md.contains("| (I) | - | 50.0 (51.8) | - |"), "{md}");
    }
}
