use std::sync::Arc;

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{fresh_name, Formula, PartitionedFormula, Term, Var};
use crate::sequence::CharSequence;
use crate::structure::{FiniteStructure, Tuple};

/// `theta(x; y,z,w) = (z=w & x=y) | (z!=w & phi(x; y))` for a formula with
/// one object and one parameter variable of the same sort.
pub fn coding_theta(phi: &PartitionedFormula) -> Result<PartitionedFormula> {
    let ([x], [y]) = (phi.object_vars.as_slice(), phi.param_vars.as_slice()) else {
        return Err(Error::InvalidArgument("coding needs one object and one parameter variable".into()));
    };
    if x.sort != y.sort {
        return Err(Error::SortMismatch(format!("object sort {} differs from parameter sort {}", x.sort, y.sort)));
    }
    let mut used = phi.used_names();
    let z = Var::new(fresh_name("z", &mut used), y.sort.clone());
    let w = Var::new(fresh_name("w", &mut used), y.sort.clone());
    let var = |v: &Var| Term::Var(v.name.clone());
    let same = Formula::Eq(var(&z), var(&w));
    let body = Formula::Or(
        Box::new(Formula::and(same.clone(), Formula::Eq(var(x), var(y)))),
        Box::new(Formula::and(Formula::not(same), phi.formula.clone())),
    );
    Ok(PartitionedFormula {
        name: format!("{}_coded", phi.name),
        object_vars: vec![x.clone()],
        param_vars: vec![y.clone(), z, w],
        formula: body,
    })
}

/// One case of the description of the coded levels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CodingCase {
    pub case: String,
    pub checked: usize,
    /// Up to ten parameter sets where the description and the levels differ.
    pub mismatches: Vec<Vec<Tuple>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CodingReport {
    pub n_max: usize,
    pub cases: Vec<CodingCase>,
}

impl CodingReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.mismatches.is_empty())
    }
}

/// Compares the levels of the coded formula with the case description on
/// every set of at most `n_max` parameters: all `-` pairs follow `phi`, all
/// `*` pairs follow equality, and a mixed set holds exactly when its `*`
/// pairs share one `y*` and `phi(y*; y_j)` holds for each `-` pair.
pub fn verify_coding(structure: Arc<FiniteStructure>, phi: &PartitionedFormula, n_max: usize) -> Result<CodingReport> {
    let theta = coding_theta(phi)?;
    let cs_phi = CharSequence::new(structure.clone(), phi.clone())?.with_level_cap(n_max.max(1));
    let cs = CharSequence::new(structure, theta)?.with_level_cap(n_max.max(1));
    let params: Vec<Tuple> = cs.all_params().collect();
    let mut cases: Vec<CodingCase> = ["all minus", "all star", "mixed"]
        .into_iter()
        .map(|c| CodingCase { case: c.into(), checked: 0, mismatches: Vec::new() })
        .collect();
    for n in 1..=n_max {
        for set in params.iter().combinations(n) {
            let (stars, minus): (Vec<&Tuple>, Vec<&Tuple>) = set.iter().copied().partition(|t| t[1] == t[2]);
            let ys: Vec<Tuple> = minus.iter().map(|t| vec![t[0]]).unique().collect();
            let (case, expected) = if stars.is_empty() {
                (0, cs_phi.holds_set(&ys.iter().collect::<Vec<_>>()))
            } else {
                let star_ys: Vec<_> = stars.iter().map(|t| t[0]).unique().collect();
                let expected = star_ys.len() == 1
                    && ys.iter().all(|y| cs_phi.compiled().satisfies(cs_phi.structure(), &[star_ys[0]], y));
                (if minus.is_empty() { 1 } else { 2 }, expected)
            };
            let c = &mut cases[case];
            c.checked += 1;
            if cs.holds_set(&set) != expected && c.mismatches.len() < 10 {
                c.mismatches.push(set.into_iter().cloned().collect());
            }
        }
    }
    Ok(CodingReport { n_max, cases })
}
