//! Parameter sets in the subset lattice over `N` points. A parameter is a
//! pair `(y, z)` of bitmasks; a set of parameters holds exactly when the
//! meet of the `y` escapes every `z`. Writing `y = ¬X`, `z = ¬D`, the set
//! holds exactly when no `D` lies inside the union of the `X`.

use itertools::Itertools;
use serde::Serialize;
use serde_json::json;

use super::{json, ConstructionReport, Validation};
use crate::configs::{matches_exactly, t0_consistent, ArrayConfig, T0Config};
use crate::error::{Error, Result};
use crate::models::gen_subset_lattice;
use crate::structure::{Elem, Tuple};

fn full(n_points: usize) -> Elem {
    ((1u64 << n_points) - 1) as Elem
}

fn mask(points: &[usize]) -> Elem {
    points.iter().fold(0, |m, &p| m | 1 << p)
}

/// The parameter whose excluded set is `x` and whose required set is `d`.
fn xd(n_points: usize, x: &[usize], d: &[usize]) -> Tuple {
    vec![full(n_points) & !mask(x), full(n_points) & !mask(d)]
}

fn lattice_sequence(n_points: usize) -> Result<crate::sequence::CharSequence> {
    Ok(gen_subset_lattice(n_points)?.sequence())
}

/// Parameters realizing `x` exactly: `y_i` is the set of points `p_sigma`
/// for the maximal `sigma` containing `i`, and `z_i = {q_i}` is a fresh
/// singleton. A set of indices then holds exactly when it lies in some
/// maximal set.
pub fn universal_witness(x: &T0Config, n_points: usize) -> Result<ConstructionReport<Vec<Tuple>>> {
    if let Err((s, t)) = t0_consistent(x) {
        return Err(Error::InvalidArgument(format!("configuration not closed under subsets: {s:?} contains {t:?}")));
    }
    let maximal = x.maximal();
    let need = maximal.len() + x.v;
    if n_points < need || n_points > 12 {
        return Err(Error::InvalidArgument(format!("need {need} <= N <= 12 points, got {n_points}")));
    }
    let params: Vec<Tuple> = (0..x.v)
        .map(|i| {
            let y = maximal.iter().enumerate().filter(|(_, s)| s.contains(&i)).fold(0, |m, (p, _)| m | 1 << p);
            let z = 1 << (maximal.len() + i);
            vec![y, z]
        })
        .collect();
    let cs = lattice_sequence(n_points)?;
    let mut validation = Validation::new();
    validation.check("exact pattern on every subset", matches_exactly(&cs, x, &params));
    Ok(ConstructionReport {
        construction: "universal_witness".into(),
        input: json!({ "config": json(x), "n_points": n_points }),
        output: params,
        validation,
        trace: vec![json!({ "maximal": maximal })],
    })
}

/// `k + 1` parameters whose `k`-subsets all hold while the whole set fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupportFailure {
    pub k: usize,
    pub params: Vec<Tuple>,
    pub subsets_hold: bool,
    pub whole_fails: bool,
}

/// `y_i` is the first `k + 1` points less point `i`, and `z_i` is empty:
/// any `k` of the `y_i` share a point, all of them share none.
pub fn support_failure_witness(k: usize, n_points: usize) -> Result<ConstructionReport<SupportFailure>> {
    if k < 1 || n_points < k + 1 || n_points > 12 {
        return Err(Error::InvalidArgument(format!("need 1 <= k < N <= 12, got k = {k}, N = {n_points}")));
    }
    let cs = lattice_sequence(n_points)?;
    if k + 1 > cs.level_cap() {
        return Err(Error::LevelCap { size: k + 1, cap: cs.level_cap() });
    }
    let base = mask(&(0..=k).collect::<Vec<_>>());
    let params: Vec<Tuple> = (0..=k).map(|i| vec![base & !(1 << i), 0]).collect();
    let subsets_hold = params.iter().combinations(k).all(|c| cs.holds_set(&c));
    let whole_fails = !cs.holds_set(&params.iter().collect::<Vec<_>>());
    let mut validation = Validation::new();
    validation.check(format!("every {k}-subset holds"), subsets_hold);
    validation.check("the whole set fails", whole_fails);
    Ok(ConstructionReport {
        construction: "support_failure_witness".into(),
        input: json!({ "k": k, "n_points": n_points }),
        output: SupportFailure { k, params, subsets_hold, whole_fails },
        validation,
        trace: Vec::new(),
    })
}

/// Points used by the planted arrays: one per column, then `s`, `q`, `r`.
pub const PLANT_POINTS: usize = 11;
const PLANT_COLUMNS: usize = 8;

/// Two ways to make a 3-row array fail sharpness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PlantVariant {
    /// Two cells of one column already fail together.
    SameColumn,
    /// Two cells of one column fail only with a cell of another column.
    CrossColumn,
}

/// An `(8, 3)`-array for `P_6` in the subset lattice over
/// [`PLANT_POINTS`] points that is not sharp. Rows are listed in the order
/// `row_order`; points are relabelled by `p -> (p + shift) mod N`.
pub fn planted_array(variant: PlantVariant, row_order: [usize; 3], shift: usize) -> ArrayConfig {
    let n = PLANT_POINTS;
    let relabel = |ps: &[usize]| ps.iter().map(|&p| (p + shift) % n).collect::<Vec<_>>();
    let (s, q, r) = (PLANT_COLUMNS, PLANT_COLUMNS + 1, PLANT_COLUMNS + 2);
    let columns = (0..PLANT_COLUMNS)
        .map(|p| {
            let rows: [(Vec<usize>, Vec<usize>); 3] = match variant {
                PlantVariant::SameColumn => [(vec![p], vec![p, s]), (vec![], vec![p]), (vec![r], vec![p])],
                PlantVariant::CrossColumn => [(vec![p], vec![p, s]), (vec![], vec![p, q]), (vec![q], vec![p, s])],
            };
            row_order.iter().map(|&t| xd(n, &relabel(&rows[t].0), &relabel(&rows[t].1))).collect()
        })
        .collect();
    ArrayConfig::new(columns, 6).expect("columns have equal height")
}

/// `count` planted arrays, cycling through row orders, then variants, then
/// relabellings.
pub fn planted_arrays(count: usize) -> Vec<(PlantVariant, [usize; 3], usize, ArrayConfig)> {
    let orders: Vec<[usize; 3]> = (0..3).permutations(3).map(|p| [p[0], p[1], p[2]]).collect();
    (0..)
        .flat_map(|shift| {
            let orders = orders.clone();
            [PlantVariant::SameColumn, PlantVariant::CrossColumn]
                .into_iter()
                .flat_map(move |v| orders.clone().into_iter().map(move |o| (v, o, shift)))
        })
        .take(count)
        .map(|(v, o, shift)| (v, o, shift, planted_array(v, o, shift)))
        .collect()
}

/// A `(4, 2)`-array for `P_3` over [`PLANT_POINTS`] points whose paths of
/// size at most 3 hold while the path through rows 0, 1, 0, 1 fails.
pub fn springboard_planted_array() -> ArrayConfig {
    let n = PLANT_POINTS;
    let (u, v) = (|c: usize| c, |c: usize| 4 + c);
    let (w1, w2, w3) = (8, 9, 10);
    let mut cells: Vec<[(Vec<usize>, Vec<usize>); 2]> =
        (0..4).map(|c| [(vec![u(c)], vec![v(c)]), (vec![v(c)], vec![u(c)])]).collect();
    cells[0][0].1 = vec![w1, w2, w3];
    cells[1][1].0.push(w1);
    cells[2][0].0.push(w2);
    cells[3][1].0.push(w3);
    let columns = cells.iter().map(|col| col.iter().map(|(x, d)| xd(n, x, d)).collect()).collect();
    ArrayConfig::new(columns, 3).expect("columns have equal height")
}
