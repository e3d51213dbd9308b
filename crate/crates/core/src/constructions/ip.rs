use itertools::Itertools;
use serde_json::json;

use super::{json, ConstructionReport, Validation};
use crate::configs::{detect_ip_shattering, is_sharp, ArrayConfig, ShatterMode, ShatterWitness};
use crate::error::{Error, Result};
use crate::formula::conjunct;
use crate::sequence::{CharSequence, Levels};
use crate::structure::Tuple;

fn concat(a: &Tuple, b: &Tuple) -> Tuple {
    a.iter().chain(b).copied().collect()
}

/// Whether `theta(x; y,z)` agrees with `phi(x; y) & !phi(x; z)` for every
/// object and every `y, z` drawn from `ys`.
fn theta_agrees(cs_phi: &CharSequence, cs_theta: &CharSequence, ys: &[Tuple]) -> bool {
    let s = cs_phi.structure();
    let objects: Vec<Tuple> = crate::structure::TupleIter::new(s, cs_phi.object_sig()).collect();
    ys.iter().cartesian_product(ys).all(|(y, z)| {
        let t = concat(y, z);
        objects.iter().all(|x| {
            cs_theta.compiled().satisfies(cs_theta.structure(), x, &t)
                == (cs_phi.compiled().satisfies(s, x, y) && !cs_phi.compiled().satisfies(s, x, z))
        })
    })
}

/// The least sequence of `2m` distinct `phi`-parameters whose paired array
/// `[(i_2j, i_2j+1), (i_2j+1, i_2j)]` is valid for `theta` with cross-column
/// sets of size up to `r_max`, and whose first four members are shattered
/// in pairs by `phi`.
pub fn find_ip_sequence(cs_phi: &CharSequence, cs_theta: &CharSequence, m: usize, r_max: usize) -> Result<Option<Vec<Tuple>>> {
    if m == 0 || r_max < 2 || r_max > cs_theta.level_cap() {
        return Err(Error::InvalidArgument(format!("need m >= 1 and 2 <= r_max <= {}", cs_theta.level_cap())));
    }
    let verts: Vec<Tuple> = cs_phi.all_params().collect();
    let mut seq: Vec<usize> = Vec::new();
    fn column(verts: &[Tuple], seq: &[usize], j: usize) -> [Tuple; 2] {
        let (u, w) = (&verts[seq[2 * j]], &verts[seq[2 * j + 1]]);
        [concat(u, w), concat(w, u)]
    }
    fn fits(cs_phi: &CharSequence, cs_theta: &CharSequence, verts: &[Tuple], seq: &[usize], r_max: usize) -> bool {
        let j = seq.len() / 2 - 1;
        let new = column(verts, seq, j);
        if !new.iter().all(|t| cs_theta.holds_set(&[t])) {
            return false;
        }
        let cols: Vec<[Tuple; 2]> = (0..j).map(|i| column(verts, seq, i)).collect();
        for s in 1..r_max.min(j + 1) {
            for chosen in (0..j).combinations(s) {
                for rows in (0..=s).map(|_| 0..2).multi_cartesian_product() {
                    let mut set: Vec<&Tuple> = chosen.iter().zip(&rows).map(|(&c, &r)| &cols[c][r]).collect();
                    set.push(&new[rows[s]]);
                    if !cs_theta.holds_set(&set) {
                        return false;
                    }
                }
            }
        }
        if j == 1 {
            let region: Vec<Tuple> = seq.iter().map(|&i| verts[i].clone()).collect();
            return matches!(detect_ip_shattering(cs_phi, 2, ShatterMode::ExactK, &region), Ok(Some(_)));
        }
        true
    }
    fn rec(cs_phi: &CharSequence, cs_theta: &CharSequence, verts: &[Tuple], seq: &mut Vec<usize>, m: usize, r_max: usize) -> bool {
        if seq.len() == 2 * m {
            return true;
        }
        for u in 0..verts.len() {
            if seq.contains(&u) {
                continue;
            }
            for w in 0..verts.len() {
                if w == u || seq.contains(&w) {
                    continue;
                }
                seq.push(u);
                seq.push(w);
                if fits(cs_phi, cs_theta, verts, seq, r_max) && rec(cs_phi, cs_theta, verts, seq, m, r_max) {
                    return true;
                }
                seq.truncate(seq.len() - 2);
            }
        }
        false
    }
    Ok(rec(cs_phi, cs_theta, &verts, &mut seq, m, r_max).then(|| seq.iter().map(|&i| verts[i].clone()).collect()))
}

/// The `(m, 2)`-array `a^0_j = (i_2j, i_2j+1)`, `a^1_j = (i_2j+1, i_2j)` in the
/// sequence of `theta = phi & !phi'`, built from a sequence over which `phi`
/// is independent. Columns use disjoint index pairs.
pub fn array_from_ip(
    cs_phi: &CharSequence,
    cs_theta: &CharSequence,
    ip_sequence: &[Tuple],
    m: usize,
    r_max: usize,
) -> Result<ConstructionReport<ArrayConfig>> {
    if m == 0 || ip_sequence.len() < 2 * m {
        return Err(Error::InvalidArgument(format!("{m} columns need {} indices, got {}", 2 * m, ip_sequence.len())));
    }
    let used = &ip_sequence[..2 * m];
    if used.iter().unique().count() != used.len() {
        return Err(Error::InvalidArgument("indices must be distinct".into()));
    }
    for y in used {
        cs_phi.structure().check_tuple(cs_phi.param_sig(), y)?;
    }
    let mut validation = Validation::new();
    validation.check("theta is the difference of phi", theta_agrees(cs_phi, cs_theta, used));
    let k = (used.len() / 2).min(2);
    let prefix = &used[..2 * k];
    let shattered = detect_ip_shattering(cs_phi, k, ShatterMode::ExactK, prefix)?.is_some();
    validation.check(format!("prefix of {} shattered", 2 * k), shattered);
    let columns: Vec<Vec<Tuple>> =
        (0..m).map(|j| vec![concat(&used[2 * j], &used[2 * j + 1]), concat(&used[2 * j + 1], &used[2 * j])]).collect();
    let mut array = ArrayConfig::new(columns, r_max.min(cs_theta.level_cap()))?;
    let violation = array.violation(cs_theta);
    validation.check("array conditions", violation.is_none());
    if !validation.passed {
        return Err(Error::Validation(format!(
            "input is not an independence witness: {}",
            violation.map_or_else(|| "precondition failed".to_string(), |v| format!("{} at {:?}", v.reason, v.cells))
        )));
    }
    array.sharp = true;
    Ok(ConstructionReport {
        construction: "array_from_ip".into(),
        input: json!({ "ip_sequence": used, "m": m, "r_max": array.r_max }),
        output: array,
        validation,
        trace: Vec::new(),
    })
}

/// Shattering of the first `2 k_check` columns, each read through its rows
/// `0..n-1` as one parameter of `phi_{n-1}`. The realizer of pattern `sigma`
/// completes the top rows of the `sigma` columns and the bottom rows of the
/// others, a path of the sharp array.
pub fn ip_from_sharp_array(cs: &CharSequence, a: &ArrayConfig, k_check: usize) -> Result<ConstructionReport<ShatterWitness>> {
    let n = a.rows;
    if n < 2 {
        return Err(Error::InvalidArgument("arrays need at least two rows".into()));
    }
    if a.cols() < 2 * k_check {
        return Err(Error::InvalidArgument(format!("{} columns cannot supply {} parameters", a.cols(), 2 * k_check)));
    }
    let path_size = 2 * k_check * (n - 1);
    if path_size > cs.level_cap() {
        return Err(Error::LevelCap { size: path_size, cap: cs.level_cap() });
    }
    let phi_n = conjunct(cs.phi(), n - 1)?;
    let cs_n = CharSequence::new(cs.structure_arc(), phi_n)?;
    let params: Vec<Tuple> = (0..2 * k_check).map(|j| a.columns[j][..n - 1].concat()).collect();
    let mut trace = Vec::new();
    let mut realizers = Vec::new();
    if k_check == 0 {
        let x = cs.raw_witness(&[]).ok_or_else(|| Error::InvalidArgument("empty object domain".into()))?;
        realizers.push((Vec::new(), x));
    }
    for sigma in (0..2 * k_check).combinations(k_check).filter(|_| k_check > 0) {
        let set: Vec<Tuple> = (0..2 * k_check)
            .flat_map(|j| {
                let rows = if sigma.contains(&j) { 0..n - 1 } else { 1..n };
                a.columns[j][rows].to_vec()
            })
            .collect();
        let x = cs.witness(&set)?.ok_or_else(|| {
            Error::Validation(format!("sharpness violated: path for pattern {sigma:?} has no realization"))
        })?;
        trace.push(json!({ "pattern": sigma, "path": set, "realizer": x }));
        realizers.push((sigma, x));
    }
    let witness = ShatterWitness { k: k_check, mode: ShatterMode::ExactK, params, realizers };
    let mut validation = Validation::new();
    validation.check(format!("shattering of phi_{} by direct evaluation", n - 1), witness.validate(&cs_n));
    if path_size > 0 {
        let sharp = is_sharp(cs as &dyn Levels, &a.restrict(&(0..n).collect::<Vec<_>>(), &(0..2 * k_check).collect::<Vec<_>>()), path_size)?;
        validation.check("used columns sharp", sharp.sharp);
    }
    if !validation.passed {
        return Err(Error::Validation(format!("shattering witness rejected: {:?}", validation.checks)));
    }
    Ok(ConstructionReport {
        construction: "ip_from_sharp_array".into(),
        input: json!({ "array": json(a), "k_check": k_check }),
        output: witness,
        validation,
        trace,
    })
}
