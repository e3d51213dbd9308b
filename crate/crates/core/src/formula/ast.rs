use std::collections::BTreeSet;
use std::fmt;

use crate::structure::{Elem, FiniteStructure};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    /// An element id; its sort comes from the position it occupies.
    Const(Elem),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Rel(String, Vec<Term>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
}

/// A sorted variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub sort: String,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: impl Into<String>) -> Self {
        Self { name: name.into(), sort: sort.into() }
    }
}

/// A formula `phi(x; y)` with its variables split into object and parameter
/// tuples.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartitionedFormula {
    pub name: String,
    pub object_vars: Vec<Var>,
    pub param_vars: Vec<Var>,
    pub formula: Formula,
}

/// Sort and relation declarations a formula is checked against.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub sorts: Vec<(String, usize)>,
    pub relations: Vec<(String, Vec<String>)>,
}

impl Signature {
    pub fn of(s: &FiniteStructure) -> Self {
        Self {
            sorts: s.sorts().to_vec(),
            relations: s
                .relations()
                .iter()
                .map(|r| (r.name.clone(), r.signature.iter().map(|&i| s.sort_name(i).to_string()).collect()))
                .collect(),
        }
    }

    pub fn sort_size(&self, name: &str) -> Option<usize> {
        self.sorts.iter().find(|(n, _)| n == name).map(|&(_, k)| k)
    }

    pub fn relation(&self, name: &str) -> Option<&[String]> {
        self.relations.iter().find(|(n, _)| n == name).map(|(_, s)| s.as_slice())
    }
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::True, b) => b,
            (a, Formula::True) => a,
            (a, b) => Formula::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        parts.into_iter().fold(Formula::True, Formula::and)
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    /// Free variable names.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut term = |t: &Term, bound: &Vec<String>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            Formula::Rel(_, args) => args.iter().for_each(|t| term(t, bound)),
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                bound.push(v.name.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name occurring anywhere, free or bound.
    pub fn all_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) => {
                for t in [a, b] {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Rel(_, args) => {
                for t in args {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Not(a) => a.all_names(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                out.insert(v.name.clone());
                a.all_names(out);
            }
        }
    }

    /// Replaces free variables according to `map`. Callers must make sure the
    /// replacement variables are not bound inside `self`.
    pub fn substitute(&self, map: &dyn Fn(&str) -> Option<Term>) -> Formula {
        self.subst_inner(map, &mut Vec::new())
    }

    fn subst_inner(&self, map: &dyn Fn(&str) -> Option<Term>, bound: &mut Vec<String>) -> Formula {
        let term = |t: &Term, bound: &Vec<String>| match t {
            Term::Var(v) if !bound.contains(v) => map(v).unwrap_or_else(|| t.clone()),
            _ => t.clone(),
        };
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Eq(a, b) => Formula::Eq(term(a, bound), term(b, bound)),
            Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(|t| term(t, bound)).collect()),
            Formula::Not(a) => Formula::not(a.subst_inner(map, bound)),
            Formula::And(a, b) => {
                Formula::And(Box::new(a.subst_inner(map, bound)), Box::new(b.subst_inner(map, bound)))
            }
            Formula::Or(a, b) => {
                Formula::Or(Box::new(a.subst_inner(map, bound)), Box::new(b.subst_inner(map, bound)))
            }
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                bound.push(v.name.clone());
                let body = Box::new(a.subst_inner(map, bound));
                bound.pop();
                if matches!(self, Formula::Exists(..)) {
                    Formula::Exists(v.clone(), body)
                } else {
                    Formula::Forall(v.clone(), body)
                }
            }
        }
    }
}

impl PartitionedFormula {
    pub fn object_arity(&self) -> usize {
        self.object_vars.len()
    }

    pub fn param_arity(&self) -> usize {
        self.param_vars.len()
    }

    /// All names used in the formula, including declared ones.
    pub fn used_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.formula.all_names(&mut out);
        out.extend(self.object_vars.iter().chain(&self.param_vars).map(|v| v.name.clone()));
        out
    }
}

/// Picks `base`, or `base` with primes appended, avoiding `used`; the result
/// is added to `used`.
pub fn fresh_name(base: &str, used: &mut BTreeSet<String>) -> String {
    let mut name = base.to_string();
    while used.contains(&name) {
        name.push('\'');
    }
    used.insert(name.clone());
    name
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(e) => write!(f, "@{e}"),
        }
    }
}

impl Formula {
    fn write_prec(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Eq(a, b) => {
                if ctx >= 4 {
                    write!(f, "({a} = {b})")
                } else {
                    write!(f, "{a} = {b}")
                }
            }
            Formula::Rel(r, args) => {
                write!(f, "{r}(")?;
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            Formula::Not(a) => {
                write!(f, "!")?;
                a.write_prec(f, 4)
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                let (p, op) = if matches!(self, Formula::And(..)) { (2, "&") } else { (1, "|") };
                if ctx > p {
                    write!(f, "(")?;
                }
                a.write_prec(f, p)?;
                write!(f, " {op} ")?;
                b.write_prec(f, p + 1)?;
                if ctx > p {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                let q = if matches!(self, Formula::Exists(..)) { "exists" } else { "forall" };
                if ctx > 0 {
                    write!(f, "(")?;
                }
                write!(f, "{q} {}:{} . ", v.name, v.sort)?;
                a.write_prec(f, 0)?;
                if ctx > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

impl fmt::Display for PartitionedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |vs: &[Var]| vs.iter().map(|v| format!("{}:{}", v.name, v.sort)).collect::<Vec<_>>().join(", ");
        write!(f, "{}({}; {}) := {}", self.name, list(&self.object_vars), list(&self.param_vars), self.formula)
    }
}
