//! Published values of the four reproduction tables, in percent for the
//! size/power tables and as plain ratios for the efficiency table.

use crate::samplers::Allocation;
use crate::stat_tests::TestKind;

/// Efficiency rows ARE(SS,CQ), ARE(SR,CQ), ARE(SR,SS); columns follow
/// [`crate::analysis::are_table_kinds`].
pub const T1: [[f64; 8]; 3] = [
    [2.54, 1.76, 1.51, 1.38, 1.18, 1.00, 1.95, 5.79],
    [1.98, 1.48, 1.31, 1.22, 1.10, 1.00, 1.64, 5.26],
    [0.78, 0.84, 0.87, 0.88, 0.93, 1.00, 0.84, 0.91],
];

/// Size-corrected power. Rows are scenarios I–III; columns are
/// dense (30,24) TSR, SR, (40,32) TSR, SR, then the same for sparse.
pub const T2: [[f64; 8]; 3] = [
    [9.6, 51.8, 11.4, 65.4, 11.8, 86.0, 16.2, 86.8],
    [11.7, 68.2, 16.6, 84.8, 16.0, 97.0, 21.5, 96.8],
    [15.2, 74.0, 19.6, 88.4, 17.2, 97.8, 25.5, 97.9],
];

/// One printed row of the high-dimensional tables: `(n, p)` then CQ, SS, SR
/// for size, dense and sparse.
pub type HighDimRow = (usize, usize, [f64; 9]);

pub const T3: [(&str, [HighDimRow; 6]); 3] = [
    (
        "I",
        [
            (30, 100, [4.7, 5.6, 5.7, 26.9, 30.0, 29.6, 33.2, 37.4, 36.4]),
            (30, 200, [5.0, 6.8, 6.3, 26.4, 29.9, 29.3, 29.8, 31.9, 32.8]),
            (30, 400, [4.8, 6.0, 5.8, 26.3, 30.0, 29.3, 29.0, 32.5, 31.9]),
            (40, 100, [4.5, 5.8, 4.8, 38.0, 40.2, 39.6, 46.4, 49.1, 48.0]),
            (40, 200, [4.9, 6.2, 5.8, 38.5, 41.2, 41.1, 42.6, 45.1, 45.4]),
            (40, 400, [5.3, 6.2, 6.2, 37.1, 40.5, 40.4, 41.9, 44.4, 43.7]),
        ],
    ),
    (
        "II",
        [
            (30, 100, [5.5, 5.6, 5.2, 31.2, 50.5, 42.7, 39.6, 63.0, 55.0]),
            (30, 200, [4.5, 6.8, 5.9, 31.1, 55.4, 44.9, 34.8, 61.4, 50.2]),
            (30, 400, [4.5, 6.0, 5.6, 29.0, 56.2, 43.8, 32.1, 59.5, 48.9]),
            (40, 100, [4.3, 5.8, 5.2, 41.3, 67.7, 58.4, 49.1, 80.1, 67.8]),
            (40, 200, [5.0, 6.2, 5.5, 42.7, 69.6, 59.6, 48.8, 77.3, 67.0]),
            (40, 400, [5.8, 6.2, 6.5, 41.7, 72.2, 62.7, 45.7, 75.7, 65.5]),
        ],
    ),
    (
        "III",
        [
            (30, 100, [5.1, 5.6, 5.6, 29.7, 56.0, 47.5, 36.8, 68.6, 59.8]),
            (30, 200, [4.9, 6.8, 5.8, 29.3, 60.3, 48.8, 32.8, 67.9, 56.6]),
            (30, 400, [4.8, 6.0, 5.3, 29.6, 62.3, 53.8, 31.2, 64.5, 55.4]),
            (40, 100, [5.0, 5.8, 5.0, 39.4, 72.2, 62.9, 45.7, 85.1, 74.9]),
            (40, 200, [4.7, 6.2, 6.4, 42.8, 75.8, 66.1, 45.7, 82.2, 71.9]),
            (40, 400, [4.0, 6.2, 5.5, 39.8, 77.9, 68.8, 44.3, 81.4, 72.2]),
        ],
    ),
];

pub const T4: [(&str, [HighDimRow; 6]); 2] = [
    (
        "IV",
        [
            (30, 100, [5.6, 7.4, 6.1, 26.6, 30.4, 29.1, 31.5, 37.2, 36.4]),
            (30, 200, [3.6, 5.8, 5.7, 27.5, 31.0, 30.5, 30.8, 33.4, 33.3]),
            (30, 400, [4.5, 5.5, 5.7, 24.9, 30.0, 29.2, 26.7, 31.3, 29.8]),
            (40, 100, [5.7, 7.3, 6.3, 39.5, 42.7, 41.6, 46.9, 51.9, 50.1]),
            (40, 200, [5.6, 6.9, 6.7, 35.5, 38.6, 38.0, 38.3, 42.1, 41.5]),
            (40, 400, [6.0, 6.9, 6.9, 39.3, 43.1, 42.8, 41.2, 44.1, 44.1]),
        ],
    ),
    (
        "V",
        [
            (30, 100, [4.5, 7.1, 6.0, 29.5, 55.4, 46.6, 33.9, 66.1, 56.7]),
            (30, 200, [5.7, 6.1, 6.0, 30.1, 58.6, 48.5, 34.3, 63.5, 53.3]),
            (30, 400, [3.7, 6.4, 5.3, 30.9, 58.8, 49.8, 30.8, 62.6, 51.7]),
            (40, 100, [6.5, 7.1, 6.0, 42.2, 73.4, 65.4, 50.4, 84.0, 74.5]),
            (40, 200, [6.3, 7.0, 6.2, 43.2, 76.4, 66.3, 45.4, 80.8, 70.7]),
            (40, 400, [4.6, 4.9, 4.5, 39.0, 75.6, 65.7, 42.4, 79.4, 69.7]),
        ],
    ),
];

fn allocation_offset(a: Allocation) -> usize {
    match a {
        Allocation::Null => 0,
        Allocation::Dense => 3,
        Allocation::Sparse => 6,
    }
}

/// Published percentage for one cell of the size/power tables.
pub fn power_cell(test: TestKind, scenario: &str, n: usize, p: usize, allocation: Allocation) -> Option<f64> {
    if test == TestKind::Tsr || (test == TestKind::Sr && p < n) {
        let row = ["I", "II", "III"].iter().position(|s| *s == scenario)?;
        let col_n = match (n, p) {
            (30, 24) => 0,
            (40, 32) => 2,
            _ => return None,
        };
        let col_a = match allocation {
            Allocation::Dense => 0,
            Allocation::Sparse => 4,
            Allocation::Null => return None,
        };
        let col_t = usize::from(test == TestKind::Sr);
        return Some(T2[row][col_a + col_n + col_t]);
    }
    let col_t = match test {
        TestKind::Cq => 0,
        TestKind::Ss => 1,
        TestKind::Sr => 2,
        TestKind::Tsr => unreachable!(),
    };
    T3.iter()
        .chain(T4.iter())
        .find(|(s, _)| *s == scenario)?
        .1
        .iter()
        .find(|(rn, rp, _)| *rn == n && *rp == p)
        .map(|(_, _, v)| v[allocation_offset(allocation) + col_t])
}
