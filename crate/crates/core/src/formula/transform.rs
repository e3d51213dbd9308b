//! Formula-level constructions: the difference transform, n-fold
//! conjunction, and inlined localization.

use std::collections::BTreeSet;

use super::ast::{fresh_name, Formula, PartitionedFormula, Term, Var};
use super::eval::CompiledFormula;
use crate::error::{Error, Result};
use crate::localize::Localization;
use crate::structure::{Elem, FiniteStructure, Tuple, TupleIter};

/// Substitutes the object and parameter variables of `phi` by the given terms.
fn instantiate(phi: &PartitionedFormula, xs: &[Term], ys: &[Term]) -> Formula {
    let map = |name: &str| -> Option<Term> {
        if let Some(i) = phi.object_vars.iter().position(|v| v.name == name) {
            return Some(xs[i].clone());
        }
        phi.param_vars.iter().position(|v| v.name == name).map(|i| ys[i].clone())
    };
    phi.formula.substitute(&map)
}

fn vars_as_terms(vs: &[Var]) -> Vec<Term> {
    vs.iter().map(|v| Term::Var(v.name.clone())).collect()
}

fn renamed(vs: &[Var], suffix: &str, used: &mut BTreeSet<String>) -> Vec<Var> {
    vs.iter().map(|v| Var::new(fresh_name(&format!("{}{suffix}", v.name), used), v.sort.clone())).collect()
}

/// `theta(x; y, z) = phi(x; y) & !phi(x; z)`.
pub fn theta_transform(phi: &PartitionedFormula) -> PartitionedFormula {
    let mut used = phi.used_names();
    let second = renamed(&phi.param_vars, "'", &mut used);
    let xs = vars_as_terms(&phi.object_vars);
    let body = Formula::And(
        Box::new(phi.formula.clone()),
        Box::new(Formula::not(instantiate(phi, &xs, &vars_as_terms(&second)))),
    );
    PartitionedFormula {
        name: format!("{}_theta", phi.name),
        object_vars: phi.object_vars.clone(),
        param_vars: phi.param_vars.iter().cloned().chain(second).collect(),
        formula: body,
    }
}

/// `phi_n(x; y_1..y_n) = phi(x; y_1) & .. & phi(x; y_n)`.
pub fn conjunct(phi: &PartitionedFormula, n: usize) -> Result<PartitionedFormula> {
    if n == 0 {
        return Err(Error::InvalidArgument("conjunction width must be positive".into()));
    }
    if n == 1 {
        return Ok(phi.clone());
    }
    let mut used = phi.used_names();
    let xs = vars_as_terms(&phi.object_vars);
    let copies: Vec<Vec<Var>> = (1..=n).map(|i| renamed(&phi.param_vars, &format!("_{i}"), &mut used)).collect();
    let body = Formula::conjunction(copies.iter().map(|c| instantiate(phi, &xs, &vars_as_terms(c))));
    Ok(PartitionedFormula {
        name: format!("{}_{n}", phi.name),
        object_vars: phi.object_vars.clone(),
        param_vars: copies.into_iter().flatten().collect(),
        formula: body,
    })
}

fn const_terms(t: &[Elem]) -> Vec<Term> {
    t.iter().map(|&e| Term::Const(e)).collect()
}

/// The formula `exists x' . phi(x'; t_1) & .. & phi(x'; t_r)`.
fn p_atom(phi: &PartitionedFormula, args: &[Vec<Term>], used: &mut BTreeSet<String>) -> Formula {
    let fresh = renamed(&phi.object_vars, "'", used);
    let xs = vars_as_terms(&fresh);
    let body = Formula::conjunction(args.iter().map(|ys| instantiate(phi, &xs, ys)));
    fresh.into_iter().rev().fold(body, |acc, v| Formula::exists(v, acc))
}

fn in_p1(s: &FiniteStructure, c: &CompiledFormula, a: &[Elem]) -> bool {
    TupleIter::new(s, &c.x_sig).any(|x| c.satisfies(s, &x, a))
}

/// `phi(x; y) & P^f_1(y) & phi(x; a_1) & .. & phi(x; a_k)`, with the
/// localization's level atoms expanded into their existential definitions.
pub fn star_localize(
    s: &FiniteStructure,
    phi: &PartitionedFormula,
    f: &Localization,
    a_bar: &[Tuple],
) -> Result<PartitionedFormula> {
    if f.arity != 1 {
        return Err(Error::InvalidArgument(format!("expected a localization of P_1, got arity {}", f.arity)));
    }
    let c = CompiledFormula::new(s, phi)?;
    for a in a_bar.iter().chain(f.conjuncts.iter().flat_map(|k| k.params.iter())) {
        s.check_tuple(&c.y_sig, a)?;
        if !in_p1(s, &c, a) {
            return Err(Error::NotInP1(a.clone()));
        }
    }
    let mut used = phi.used_names();
    let ys = vars_as_terms(&phi.param_vars);
    let xs = vars_as_terms(&phi.object_vars);
    let mut parts = vec![phi.formula.clone()];
    for k in &f.conjuncts {
        if k.positions.iter().any(|&p| p != 0) {
            return Err(Error::InvalidArgument(format!("position out of range in {k:?}")));
        }
        let args: Vec<Vec<Term>> =
            k.positions.iter().map(|_| ys.clone()).chain(k.params.iter().map(|b| const_terms(b))).collect();
        parts.push(p_atom(phi, &args, &mut used));
    }
    for a in a_bar {
        parts.push(instantiate(phi, &xs, &const_terms(a)));
    }
    Ok(PartitionedFormula {
        name: format!("{}_loc", phi.name),
        object_vars: phi.object_vars.clone(),
        param_vars: phi.param_vars.clone(),
        formula: Formula::conjunction(parts),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::ast::Signature;
    use crate::formula::parse::parse_formula;
    use crate::structure::StructureBuilder;

    fn graph() -> FiniteStructure {
        let edges = [(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (1, 4)];
        let tuples = edges.iter().flat_map(|&(a, b)| [vec![a, b], vec![b, a]]);
        StructureBuilder::new().sort("V", 5).relation("R", &["V", "V"], tuples).build().unwrap()
    }

    #[test]
    fn theta_shape() {
        let s = graph();
        let phi = parse_formula("phi(x; y) := R(x,y)", &Signature::of(&s)).unwrap();
        let th = theta_transform(&phi);
        assert_eq!(th.to_string(), "phi_theta(x:V; y:V, y':V) := R(x, y) & !R(x, y')");
        let c = CompiledFormula::new(&s, &th).unwrap();
        for a in 0..5 {
            for b in 0..5 {
                assert!(!c.satisfies(&s, &[a], &[b, b]));
            }
        }
        let wide = parse_formula("phi(x; y,z) := R(x,y) & R(x,z)", &Signature::of(&s)).unwrap();
        assert_eq!(theta_transform(&wide).param_arity(), 4);
    }

    #[test]
    fn conjunction_shape() {
        let s = graph();
        let phi = parse_formula("phi(x; y,z) := R(x,y) & !R(x,z)", &Signature::of(&s)).unwrap();
        assert!(conjunct(&phi, 0).is_err());
        assert_eq!(conjunct(&phi, 1).unwrap(), phi);
        let p2 = conjunct(&phi, 2).unwrap();
        assert_eq!(p2.formula.to_string(), "R(x, y_1) & !R(x, z_1) & (R(x, y_2) & !R(x, z_2))");
        let c1 = CompiledFormula::new(&s, &phi).unwrap();
        let c2 = CompiledFormula::new(&s, &p2).unwrap();
        for x in 0..5 {
            for y in 0..5 {
                for z in 0..5 {
                    assert_eq!(c2.satisfies(&s, &[x], &[y, z, y, z]), c1.satisfies(&s, &[x], &[y, z]));
                }
            }
        }
    }

    #[test]
    fn empty_localization_is_identity() {
        let s = graph();
        let phi = parse_formula("phi(x; y,z) := R(x,y) & !R(x,z)", &Signature::of(&s)).unwrap();
        let out = star_localize(&s, &phi, &Localization::empty(1), &[]).unwrap();
        assert_eq!(out.formula, phi.formula);
        assert!(matches!(
            star_localize(&s, &phi, &Localization::empty(1), &[vec![2, 2]]),
            Err(Error::NotInP1(_))
        ));
    }
}
