//! Maps between configurations. Every output is re-checked by the detectors
//! in [`crate::configs`] before it is returned, and the outcome of that check
//! travels with the output in a [`ConstructionReport`].

use serde::Serialize;
use serde_json::Value;

use crate::localize::{is_nontrivial, localized_set, Localization};
use crate::sequence::{canonical, CharSequence};
use crate::structure::Tuple;
use crate::error::Result;

mod coding;
mod ip;
mod lattice;
mod order;
mod rg;
mod sharpen;
mod staged;

pub use coding::{coding_theta, verify_coding, CodingCase, CodingReport};
pub use ip::{array_from_ip, find_ip_sequence, ip_from_sharp_array};
pub use lattice::{planted_array, planted_arrays, springboard_planted_array, support_failure_witness, universal_witness, PlantVariant, SupportFailure, PLANT_POINTS};
pub use order::{dividing_from_order_property, interval_supply, sop2_tree_from_compatible_order, tree_from_persistent_order, PairTree};
pub use rg::{rg_solution_extension, SolutionExtension};
pub use sharpen::{sharpen_array, springboard_check, SharpenResult, SharpenRound, SpringboardReport, DEFAULT_SPACING};
pub use staged::{array_from_persistent_empty_tuple, tree_from_persistent_empty_graph};

/// Outcome of re-checking an output with the detectors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Validation {
    pub passed: bool,
    /// Each named check and its result, in the order run.
    pub checks: Vec<(String, bool)>,
}

impl Validation {
    pub fn new() -> Self {
        Self { passed: true, checks: Vec::new() }
    }

    pub fn check(&mut self, name: impl Into<String>, ok: bool) -> bool {
        self.checks.push((name.into(), ok));
        self.passed &= ok;
        ok
    }
}

/// An output with its input description, validation and iteration trace.
#[derive(Clone, Debug, Serialize)]
pub struct ConstructionReport<T> {
    pub construction: String,
    pub input: Value,
    pub output: T,
    pub validation: Validation,
    pub trace: Vec<Value>,
}

/// A staged construction either completes or names the stage that blocked it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "value")]
pub enum Staged<T> {
    Built(T),
    Obstructed(Obstruction),
}

impl<T> Staged<T> {
    pub fn built(&self) -> Option<&T> {
        match self {
            Staged::Built(t) => Some(t),
            Staged::Obstructed(_) => None,
        }
    }

    pub fn obstruction(&self) -> Option<&Obstruction> {
        match self {
            Staged::Built(_) => None,
            Staged::Obstructed(o) => Some(o),
        }
    }
}

/// Where a staged construction stopped: the stage (or tree node), the
/// localization in force there and why no continuation exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Obstruction {
    pub stage: usize,
    pub node: Vec<usize>,
    pub base: Vec<Tuple>,
    pub localization: Localization,
    pub candidates: usize,
    pub reason: String,
}

/// One stage of a staged construction, with the audit of its localization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageAudit {
    pub stage: usize,
    pub node: Vec<usize>,
    pub localization: Localization,
    pub localized_size: usize,
    pub nontrivial: bool,
    pub contains_base: bool,
}

impl StageAudit {
    pub fn ok(&self) -> bool {
        self.nontrivial && self.contains_base
    }
}

/// Audits `f`: nontrivial up to `l_check` and containing `a`.
pub(crate) fn audit_stage(
    cs: &CharSequence,
    stage: usize,
    node: &[usize],
    f: &Localization,
    a: &[Tuple],
    l_check: usize,
) -> Result<StageAudit> {
    let set = localized_set(cs, f)?;
    let a = canonical(a);
    let contains_base = a.iter().all(|t| set.contains(t));
    Ok(StageAudit {
        stage,
        node: node.to_vec(),
        localization: f.clone(),
        localized_size: set.len(),
        nontrivial: is_nontrivial(cs, f, l_check)?,
        contains_base,
    })
}

pub(crate) fn json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("construction data serializes")
}

#[cfg(test)]
mod tests;
