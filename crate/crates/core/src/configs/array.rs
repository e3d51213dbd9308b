use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::detect::p1_members;
use crate::error::{Error, Result};
use crate::sequence::Levels;
use crate::structure::Tuple;

/// A grid position; ordered by column, then row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub col: usize,
    pub row: usize,
}

/// An `n`-row, `m`-column grid of parameters. Cross-column sets of size at
/// most `r_max` hold; no column holds as a whole.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub rows: usize,
    /// `columns[i][t]` is the entry in row `t` of column `i`.
    pub columns: Vec<Vec<Tuple>>,
    pub r_max: usize,
    pub sharp: bool,
}

/// The first failed array condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayViolation {
    pub reason: String,
    pub cells: Vec<Cell>,
}

impl ArrayConfig {
    pub fn new(columns: Vec<Vec<Tuple>>, r_max: usize) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidArgument("columns of unequal height".into()));
        }
        Ok(Self { rows, columns, r_max, sharp: false })
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, c: Cell) -> &Tuple {
        &self.columns[c.col][c.row]
    }

    pub fn cells(&self) -> Vec<Cell> {
        (0..self.cols()).flat_map(|col| (0..self.rows).map(move |row| Cell { col, row })).collect()
    }

    pub fn tuples(&self, cells: &[Cell]) -> Vec<Tuple> {
        cells.iter().map(|&c| self.get(c).clone()).collect()
    }

    /// Row `t` across all columns.
    pub fn row(&self, t: usize) -> Vec<Tuple> {
        self.columns.iter().map(|c| c[t].clone()).collect()
    }

    /// The sub-grid on the given rows and columns, in the given order.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self {
            rows: rows.len(),
            columns: cols.iter().map(|&i| rows.iter().map(|&t| self.columns[i][t].clone()).collect()).collect(),
            r_max: self.r_max,
            sharp: false,
        }
    }

    /// First violated array condition under fresh level queries, if any.
    pub fn violation(&self, cs: &dyn Levels) -> Option<ArrayViolation> {
        let cells = self.cells();
        let all: Vec<&Tuple> = cells.iter().map(|&c| self.get(c)).collect();
        if all.iter().unique().count() != all.len() {
            return Some(ArrayViolation { reason: "repeated entry".into(), cells: Vec::new() });
        }
        if self.rows == 0 || self.r_max < self.rows.min(2) || self.r_max > cs.level_cap() || self.rows > cs.level_cap() {
            return Some(ArrayViolation { reason: "bounds out of range".into(), cells: Vec::new() });
        }
        for (i, col) in self.columns.iter().enumerate() {
            let set: Vec<&Tuple> = col.iter().collect();
            if cs.holds_refs(&set) {
                return Some(ArrayViolation {
                    reason: "column holds".into(),
                    cells: (0..self.rows).map(|row| Cell { col: i, row }).collect(),
                });
            }
        }
        // Cross-column sets of the largest size suffice by monotonicity.
        let s = self.r_max.min(self.cols());
        for cols in (0..self.cols()).combinations(s) {
            for rows in (0..s).map(|_| 0..self.rows).multi_cartesian_product() {
                let cells: Vec<Cell> = cols.iter().zip(&rows).map(|(&col, &row)| Cell { col, row }).collect();
                let set: Vec<&Tuple> = cells.iter().map(|&c| self.get(c)).collect();
                if !cs.holds_refs(&set) {
                    return Some(ArrayViolation { reason: "cross-column set fails".into(), cells });
                }
            }
        }
        None
    }

    pub fn is_valid(&self, cs: &dyn Levels) -> bool {
        self.violation(cs).is_none()
    }
}

/// Search column by column for an `(m, n)`-array inside `region`. Columns are
/// sets of `n` members of `P_1` failing `P_n`, taken in lexicographic order.
pub fn detect_array(cs: &dyn Levels, n: usize, m: usize, r_max: usize, region: &[Tuple]) -> Result<Option<ArrayConfig>> {
    if n < 2 || r_max < n || r_max > cs.level_cap() {
        return Err(Error::InvalidArgument(format!("need 2 <= n <= r_max <= {}", cs.level_cap())));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("at least one column".into()));
    }
    let p1 = p1_members(cs, region);
    let columns: Vec<Vec<usize>> = (0..p1.len())
        .combinations(n)
        .filter(|c| !cs.holds_refs(&c.iter().map(|&i| &p1[i]).collect::<Vec<_>>()))
        .collect();
    let mut chosen: Vec<usize> = Vec::new();
    fn fits(cs: &dyn Levels, p1: &[Tuple], columns: &[Vec<usize>], chosen: &[usize], new: usize, r_max: usize) -> bool {
        let col = &columns[new];
        if chosen.iter().any(|&c| columns[c].iter().any(|e| col.contains(e))) {
            return false;
        }
        let s = (r_max - 1).min(chosen.len());
        chosen.iter().combinations(s).all(|prev| {
            prev.iter()
                .map(|&&c| columns[c].iter())
                .multi_cartesian_product()
                .all(|picks| {
                    col.iter().all(|e| {
                        let mut set: Vec<&Tuple> = picks.iter().map(|&&i| &p1[i]).collect();
                        set.push(&p1[*e]);
                        cs.holds_refs(&set)
                    })
                })
        })
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(cs: &dyn Levels, p1: &[Tuple], columns: &[Vec<usize>], chosen: &mut Vec<usize>, m: usize, r_max: usize, start: usize) -> bool {
        if chosen.len() == m {
            return true;
        }
        for c in start..columns.len() {
            if fits(cs, p1, columns, chosen, c, r_max) {
                chosen.push(c);
                if rec(cs, p1, columns, chosen, m, r_max, c + 1) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    if !rec(cs, &p1, &columns, &mut chosen, m, r_max, 0) {
        return Ok(None);
    }
    let grid = chosen.iter().map(|&c| columns[c].iter().map(|&i| p1[i].clone()).collect()).collect();
    ArrayConfig::new(grid, r_max).map(Some)
}

/// Per-column occupancy of a set of cells, in descending order. Ordered
/// lexicographically, which pads shorter counts with zeros.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ColumnCount(pub Vec<usize>);

impl ColumnCount {
    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }
}

pub fn column_count(cells: &[Cell]) -> ColumnCount {
    let mut counts: Vec<usize> = cells.iter().map(|c| c.col).sorted().dedup_with_count().map(|(k, _)| k).collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    ColumnCount(counts)
}

/// Column counts of size `sum`, ascending.
fn partitions(sum: usize) -> Vec<ColumnCount> {
    fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<ColumnCount>) {
        if rest == 0 {
            out.push(ColumnCount(cur.clone()));
            return;
        }
        for p in 1..=rest.min(max) {
            cur.push(p);
            rec(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(sum, sum, &mut Vec::new(), &mut out);
    out.sort();
    out
}

fn check_count(c: &ColumnCount) -> Result<()> {
    if c.0.is_empty() || c.0.contains(&0) || c.0.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument(format!("not a column count: {:?}", c.0)));
    }
    Ok(())
}

/// Next column count of the same size, if any.
pub fn lex_successor(c: &ColumnCount) -> Result<Option<ColumnCount>> {
    check_count(c)?;
    let all = partitions(c.size());
    let i = all.iter().position(|p| p == c).expect("listed");
    Ok(all.get(i + 1).cloned())
}

/// Previous column count of the same size, if any.
pub fn lex_predecessor(c: &ColumnCount) -> Result<Option<ColumnCount>> {
    check_count(c)?;
    let all = partitions(c.size());
    let i = all.iter().position(|p| p == c).expect("listed");
    Ok(i.checked_sub(1).map(|j| all[j].clone()))
}

/// The entry that grew on passing from the predecessor to `c`: the value of
/// `c` at the first position where the two differ.
pub fn gap(c: &ColumnCount) -> Result<usize> {
    let prev = lex_predecessor(c)?.ok_or_else(|| Error::InvalidArgument("gap is undefined on the least column count".into()))?;
    let i = (0..c.0.len()).find(|&i| prev.0.get(i) != c.0.get(i)).expect("distinct counts");
    Ok(c.0[i])
}

/// Outcome of a sharpness check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharpReport {
    pub sharp: bool,
    /// Failing path with the least column count, ties broken by cells.
    pub failing: Option<Vec<Cell>>,
    pub column_count: Option<ColumnCount>,
    pub paths_checked: usize,
}

/// Paths: at most `rows - 1` cells per column, size between 1 and `r_max`.
pub fn paths(a: &ArrayConfig, r_max: usize) -> Vec<Vec<Cell>> {
    let per_col: Vec<Vec<usize>> = (0..a.rows.saturating_sub(1) + 1).flat_map(|s| (0..a.rows).combinations(s)).collect();
    let mut out = Vec::new();
    fn rec(a: &ArrayConfig, per_col: &[Vec<usize>], col: usize, budget: usize, cur: &mut Vec<Cell>, out: &mut Vec<Vec<Cell>>) {
        if col == a.cols() {
            if !cur.is_empty() {
                out.push(cur.clone());
            }
            return;
        }
        for rows in per_col {
            if rows.len() > budget {
                continue;
            }
            let before = cur.len();
            cur.extend(rows.iter().map(|&row| Cell { col, row }));
            rec(a, per_col, col + 1, budget - rows.len(), cur, out);
            cur.truncate(before);
        }
    }
    rec(a, &per_col, 0, r_max, &mut Vec::new(), &mut out);
    out
}

/// Whether every path of size at most `r_max` holds.
pub fn is_sharp(cs: &dyn Levels, a: &ArrayConfig, r_max: usize) -> Result<SharpReport> {
    if r_max > cs.level_cap() {
        return Err(Error::LevelCap { size: r_max, cap: cs.level_cap() });
    }
    let all = paths(a, r_max);
    let mut best: Option<(ColumnCount, Vec<Cell>)> = None;
    for p in &all {
        let set: Vec<&Tuple> = p.iter().map(|&c| a.get(c)).collect();
        if !cs.holds_refs(&set) {
            let key = (column_count(p), p.clone());
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
    }
    Ok(SharpReport {
        sharp: best.is_none(),
        column_count: best.as_ref().map(|b| b.0.clone()),
        failing: best.map(|b| b.1),
        paths_checked: all.len(),
    })
}
