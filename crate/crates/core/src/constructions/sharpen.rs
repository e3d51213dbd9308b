use itertools::Itertools;
use serde::Serialize;
use serde_json::json;

use super::{json, ConstructionReport, Validation};
use crate::configs::{column_count, gap, is_sharp, paths, ArrayConfig, Cell, ColumnCount};
use crate::error::{Error, Result};
use crate::sequence::{canonical, CharSequence, DividingWitness, Levels, Relative};
use crate::structure::Tuple;

/// Minimum distance between kept columns and columns used as parameters.
pub const DEFAULT_SPACING: usize = 2;

/// One descent: the failing path `z`, its companion `y` (one cell per column
/// outside `z`), the split into added parameters `x0` and the new column
/// pattern `x1`, and the restriction that results.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SharpenRound {
    pub rows_before: usize,
    pub ell: usize,
    pub z: Vec<Cell>,
    pub z_column_count: ColumnCount,
    pub y: Vec<Cell>,
    pub x0: Vec<Cell>,
    pub x1: Vec<Cell>,
    pub added: Vec<Tuple>,
    pub kept_rows: Vec<usize>,
    pub kept_columns: Vec<usize>,
    /// Candidate paths rejected before this one.
    pub rejected: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SharpenResult {
    pub a_bar: Vec<Tuple>,
    pub array: ArrayConfig,
    pub rounds: Vec<SharpenRound>,
}

/// Least `y`, by size then cells, with one cell in each of some columns
/// outside `z` and `z ∪ y` failing.
fn companion(view: &dyn Levels, arr: &ArrayConfig, z: &[Cell], budget: usize) -> Option<Vec<Cell>> {
    let z_cols: Vec<usize> = z.iter().map(|c| c.col).unique().collect();
    let free: Vec<usize> = (0..arr.cols()).filter(|c| !z_cols.contains(c)).collect();
    let base: Vec<&Tuple> = z.iter().map(|&c| arr.get(c)).collect();
    for size in 0..=budget.min(free.len()) {
        for cols in free.iter().combinations(size) {
            for rows in (0..size).map(|_| 0..arr.rows).multi_cartesian_product() {
                let y: Vec<Cell> = cols.iter().zip(&rows).map(|(&&col, &row)| Cell { col, row }).collect();
                let mut set = base.clone();
                set.extend(y.iter().map(|&c| arr.get(c)));
                if !view.holds_refs(&set) {
                    return Some(y);
                }
            }
        }
    }
    None
}

/// Repeatedly replaces a non-sharp array by a shorter one over more
/// parameters. Each round takes the failing path `z` of least column count
/// with its least companion `y`, moves everything outside the first column
/// of `z` holding `gap(col-ct(z))` cells into the parameters, and keeps the
/// rows of that column and the columns at least `spacing` away from the new
/// parameters. Candidates whose restriction is not an array are skipped.
pub fn sharpen_array(cs: &CharSequence, a: &ArrayConfig, a_bar: &[Tuple], spacing: usize) -> Result<ConstructionReport<SharpenResult>> {
    let input_bar = canonical(a_bar);
    let mut a_bar = input_bar.clone();
    let start = Relative::new(cs, &a_bar);
    if let Some(v) = a.violation(&start) {
        return Err(Error::Validation(format!("input is not an array over the parameters: {} at {:?}", v.reason, v.cells)));
    }
    let mut arr = a.clone();
    let mut rounds: Vec<SharpenRound> = Vec::new();
    let mut trace = Vec::new();
    loop {
        let view = Relative::new(cs, &a_bar);
        let report = is_sharp(&view, &arr, arr.r_max)?;
        trace.push(json!({ "rows": arr.rows, "columns": arr.cols(), "parameters": a_bar.len(), "sharp": report.sharp, "failing": report.failing }));
        if report.sharp {
            break;
        }
        let mut zs: Vec<(ColumnCount, Vec<Cell>)> = paths(&arr, arr.r_max)
            .into_iter()
            .map(|p| (column_count(&p), p))
            .filter(|(c, _)| c.0.first().is_some_and(|&top| top >= 2))
            .collect();
        zs.sort();
        let mut next = None;
        let mut rejected = 0;
        for (count, z) in zs {
            let Some(y) = companion(&view, &arr, &z, arr.r_max - z.len()) else { continue };
            let g = gap(&count)?;
            let col = z.iter().map(|c| c.col).unique().find(|&c| z.iter().filter(|x| x.col == c).count() == g).expect("gap is an occupancy");
            let x1: Vec<Cell> = z.iter().copied().filter(|c| c.col == col).collect();
            let x0: Vec<Cell> = z.iter().copied().filter(|c| c.col != col).chain(y.iter().copied()).sorted().collect();
            let added = arr.tuples(&x0);
            let new_bar = canonical(&[a_bar.clone(), added.clone()].concat());
            let x0_cols: Vec<usize> = x0.iter().map(|c| c.col).unique().collect();
            let kept_rows: Vec<usize> = x1.iter().map(|c| c.row).collect();
            let kept_columns: Vec<usize> = (0..arr.cols()).filter(|&c| x0_cols.iter().all(|&d| c.abs_diff(d) >= spacing)).collect();
            let r_max = arr.r_max.min(cs.level_cap().saturating_sub(new_bar.len()));
            let candidate = ArrayConfig { r_max, ..arr.restrict(&kept_rows, &kept_columns) };
            let valid = kept_columns.len() >= 2 && r_max >= 2 && candidate.is_valid(&Relative::new(cs, &new_bar));
            if !valid {
                rejected += 1;
                continue;
            }
            let round = SharpenRound {
                rows_before: arr.rows,
                ell: g,
                z,
                z_column_count: count,
                y,
                x0,
                x1,
                added,
                kept_rows,
                kept_columns,
                rejected,
            };
            next = Some((round, candidate, new_bar));
            break;
        }
        let Some((round, candidate, new_bar)) = next else {
            return Err(Error::Validation(format!(
                "column supply exhausted after {} rounds ({rejected} candidates rejected); trace: {}",
                rounds.len(),
                serde_json::Value::Array(trace)
            )));
        };
        trace.push(json(&round));
        rounds.push(round);
        arr = candidate;
        a_bar = new_bar;
    }
    arr.sharp = true;
    let mut validation = Validation::new();
    let view = Relative::new(cs, &a_bar);
    validation.check("output is an array over the parameters", arr.is_valid(&view));
    validation.check("output is sharp", is_sharp(&view, &arr, arr.r_max)?.sharp);
    validation.check("rows decrease every round", rounds.iter().all(|r| r.ell < r.rows_before));
    validation.check("parameters extend the input", input_bar.iter().all(|t| a_bar.contains(t)));
    Ok(ConstructionReport {
        construction: "sharpen_array".into(),
        input: json!({ "array": json(a), "a_bar": input_bar, "spacing": spacing }),
        output: SharpenResult { a_bar, array: arr, rounds },
        validation,
        trace,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpringboardReport {
    pub mu: usize,
    pub l_check: usize,
    pub sharp_at_mu: bool,
    pub passes: bool,
    pub failing: Option<Vec<Cell>>,
    /// Offset tuples: rows `0..n-1` of column `i` with rows `1..n` of column `i+1`.
    pub offset_family: Vec<Tuple>,
    pub dividing: Option<DividingWitness>,
}

/// Whether the paths of a sharp array for `P_mu` stay complete up to
/// `l_check`. On failure reports the offset family and the least arity at
/// which it divides.
pub fn springboard_check(cs: &CharSequence, a: &ArrayConfig, mu: usize, l_check: usize) -> Result<SpringboardReport> {
    let n = a.rows;
    if n < 2 {
        return Err(Error::InvalidArgument("arrays need at least two rows".into()));
    }
    let sharp_at_mu = is_sharp(cs, a, mu)?.sharp;
    let report = is_sharp(cs, a, l_check.max(mu))?;
    let offset_family: Vec<Tuple> = (0..a.cols().saturating_sub(1))
        .step_by(2)
        .map(|i| a.columns[i][..n - 1].iter().chain(&a.columns[i + 1][1..]).flatten().copied().collect())
        .collect();
    let mut dividing = None;
    if !report.sharp {
        let max_k = offset_family.len().min(cs.level_cap() / (2 * n - 2));
        for k in 2..=max_k {
            if let Some(w) = cs.extract_dividing_witness(&offset_family, 2 * n - 2, k)? {
                dividing = Some(w);
                break;
            }
        }
    }
    Ok(SpringboardReport {
        mu,
        l_check,
        sharp_at_mu,
        passes: sharp_at_mu && report.sharp,
        failing: report.failing,
        offset_family,
        dividing,
    })
}
