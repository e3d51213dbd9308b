//! Reference semantics: brute-force Tarskian evaluation over a finite structure.

use std::collections::HashMap;

use super::ast::{Formula, PartitionedFormula, Term};
use crate::error::{Error, Result};
use crate::structure::{Elem, FiniteStructure, SortId};

#[derive(Clone, Debug)]
enum Arg {
    Slot(usize),
    Const(Elem),
}

#[derive(Clone, Debug)]
enum Node {
    True,
    False,
    Eq(Arg, Arg),
    Rel(usize, Vec<Arg>),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Exists(usize, Elem, Box<Node>),
    Forall(usize, Elem, Box<Node>),
}

/// A formula with variables resolved to environment slots.
#[derive(Clone, Debug)]
pub struct Compiled {
    node: Node,
    slots: usize,
}

struct Ctx<'a> {
    s: &'a FiniteStructure,
    scope: Vec<(String, usize, Option<SortId>)>,
    next: usize,
    max: usize,
}

impl Ctx<'_> {
    fn lookup(&mut self, v: &str) -> Result<(usize, Option<SortId>)> {
        self.scope
            .iter()
            .rev()
            .find(|(n, _, _)| n == v)
            .map(|&(_, i, s)| (i, s))
            .ok_or_else(|| Error::MissingAssignment(v.to_string()))
    }

    fn arg(&mut self, t: &Term, want: Option<SortId>) -> Result<Arg> {
        match t {
            Term::Const(e) => {
                if let Some(s) = want {
                    if *e as usize >= self.s.sort_size(s) {
                        return Err(Error::OutOfRange { elem: *e, sort: self.s.sort_name(s).to_string() });
                    }
                }
                Ok(Arg::Const(*e))
            }
            Term::Var(v) => {
                let (slot, have) = self.lookup(v)?;
                match (have, want) {
                    (Some(h), Some(w)) if h != w => Err(Error::SortMismatch(format!(
                        "`{v}` has sort {}, expected {}",
                        self.s.sort_name(h),
                        self.s.sort_name(w)
                    ))),
                    (None, Some(w)) => {
                        // Untyped free variable: pin its sort at first use.
                        for e in self.scope.iter_mut().rev() {
                            if e.0 == *v {
                                e.2 = Some(w);
                                break;
                            }
                        }
                        Ok(Arg::Slot(slot))
                    }
                    _ => Ok(Arg::Slot(slot)),
                }
            }
        }
    }

    fn sort_of(&mut self, t: &Term) -> Result<Option<SortId>> {
        match t {
            Term::Const(_) => Ok(None),
            Term::Var(v) => Ok(self.lookup(v)?.1),
        }
    }

    fn node(&mut self, f: &Formula) -> Result<Node> {
        Ok(match f {
            Formula::True => Node::True,
            Formula::False => Node::False,
            Formula::Eq(a, b) => {
                let sa = self.sort_of(a)?;
                let sb = self.sort_of(b)?;
                let want = sa.or(sb);
                Node::Eq(self.arg(a, want)?, self.arg(b, want)?)
            }
            Formula::Rel(r, args) => {
                let ri = self.s.relation_index(r).ok_or_else(|| Error::UnknownRelation(r.clone()))?;
                let sig = self.s.relations()[ri].signature.clone();
                if sig.len() != args.len() {
                    return Err(Error::SortMismatch(format!("relation `{r}` takes {} arguments", sig.len())));
                }
                let args = args.iter().zip(&sig).map(|(t, &s)| self.arg(t, Some(s))).collect::<Result<_>>()?;
                Node::Rel(ri, args)
            }
            Formula::Not(a) => Node::Not(Box::new(self.node(a)?)),
            Formula::And(a, b) => Node::And(Box::new(self.node(a)?), Box::new(self.node(b)?)),
            Formula::Or(a, b) => Node::Or(Box::new(self.node(a)?), Box::new(self.node(b)?)),
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                let sort = self.s.sort_id(&v.sort)?;
                let slot = self.next;
                self.next += 1;
                self.max = self.max.max(self.next);
                self.scope.push((v.name.clone(), slot, Some(sort)));
                let body = Box::new(self.node(a)?);
                self.scope.pop();
                self.next -= 1;
                let size = self.s.sort_size(sort) as Elem;
                if matches!(f, Formula::Exists(..)) {
                    Node::Exists(slot, size, body)
                } else {
                    Node::Forall(slot, size, body)
                }
            }
        })
    }
}

impl Compiled {
    /// Compiles `f` with the listed free variables in slots `0..free.len()`.
    pub fn new(s: &FiniteStructure, f: &Formula, free: &[(String, Option<SortId>)]) -> Result<(Self, Vec<Option<SortId>>)> {
        let mut ctx = Ctx {
            s,
            scope: free.iter().enumerate().map(|(i, (n, srt))| (n.clone(), i, *srt)).collect(),
            next: free.len(),
            max: free.len(),
        };
        let node = ctx.node(f)?;
        let sorts = ctx.scope.iter().map(|e| e.2).collect();
        Ok((Self { node, slots: ctx.max }, sorts))
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Evaluates with `env` holding at least [`slots`](Self::slots) entries.
    pub fn eval(&self, s: &FiniteStructure, env: &mut [Elem]) -> bool {
        eval_node(&self.node, s, env)
    }
}

fn arg_val(a: &Arg, env: &[Elem]) -> Elem {
    match a {
        Arg::Slot(i) => env[*i],
        Arg::Const(e) => *e,
    }
}

fn eval_node(n: &Node, s: &FiniteStructure, env: &mut [Elem]) -> bool {
    match n {
        Node::True => true,
        Node::False => false,
        Node::Eq(a, b) => arg_val(a, env) == arg_val(b, env),
        Node::Rel(r, args) => {
            let rel = &s.relations()[*r];
            if args.len() <= 8 {
                let mut buf = [0 as Elem; 8];
                for (i, a) in args.iter().enumerate() {
                    buf[i] = arg_val(a, env);
                }
                rel.contains(&buf[..args.len()])
            } else {
                let t: Vec<Elem> = args.iter().map(|a| arg_val(a, env)).collect();
                rel.contains(&t)
            }
        }
        Node::Not(a) => !eval_node(a, s, env),
        Node::And(a, b) => eval_node(a, s, env) && eval_node(b, s, env),
        Node::Or(a, b) => eval_node(a, s, env) || eval_node(b, s, env),
        Node::Exists(slot, size, body) => (0..*size).any(|e| {
            env[*slot] = e;
            eval_node(body, s, env)
        }),
        Node::Forall(slot, size, body) => (0..*size).all(|e| {
            env[*slot] = e;
            eval_node(body, s, env)
        }),
    }
}

/// Truth of `f` in `s` under `env`, which must assign every free variable.
pub fn evaluate(s: &FiniteStructure, f: &Formula, env: &HashMap<String, Elem>) -> Result<bool> {
    let free: Vec<(String, Option<SortId>)> = f.free_vars().into_iter().map(|v| (v, None)).collect();
    let mut vals = Vec::with_capacity(free.len());
    for (v, _) in &free {
        vals.push(*env.get(v).ok_or_else(|| Error::MissingAssignment(v.clone()))?);
    }
    let (c, sorts) = Compiled::new(s, f, &free)?;
    for (i, srt) in sorts.iter().enumerate().take(free.len()) {
        if let Some(srt) = srt {
            if vals[i] as usize >= s.sort_size(*srt) {
                return Err(Error::SortMismatch(format!(
                    "`{}` = {} is not an element of sort {}",
                    free[i].0,
                    vals[i],
                    s.sort_name(*srt)
                )));
            }
        }
    }
    let mut slots = vec![0; c.slots()];
    slots[..vals.len()].copy_from_slice(&vals);
    Ok(c.eval(s, &mut slots))
}

/// A partitioned formula compiled for repeated evaluation at `(x, y)`.
#[derive(Clone, Debug)]
pub struct CompiledFormula {
    inner: Compiled,
    pub x_sig: Vec<SortId>,
    pub y_sig: Vec<SortId>,
}

impl CompiledFormula {
    pub fn new(s: &FiniteStructure, pf: &PartitionedFormula) -> Result<Self> {
        let x_sig = pf.object_vars.iter().map(|v| s.sort_id(&v.sort)).collect::<Result<Vec<_>>>()?;
        let y_sig = pf.param_vars.iter().map(|v| s.sort_id(&v.sort)).collect::<Result<Vec<_>>>()?;
        let free: Vec<(String, Option<SortId>)> = pf
            .object_vars
            .iter()
            .zip(&x_sig)
            .chain(pf.param_vars.iter().zip(&y_sig))
            .map(|(v, &s)| (v.name.clone(), Some(s)))
            .collect();
        for v in pf.formula.free_vars() {
            if !free.iter().any(|(n, _)| *n == v) {
                return Err(Error::UndeclaredVariable(v));
            }
        }
        let (inner, _) = Compiled::new(s, &pf.formula, &free)?;
        Ok(Self { inner, x_sig, y_sig })
    }

    /// `phi(x; y)`; both tuples must already fit their signatures.
    pub fn satisfies(&self, s: &FiniteStructure, x: &[Elem], y: &[Elem]) -> bool {
        let mut env = vec![0; self.inner.slots()];
        env[..x.len()].copy_from_slice(x);
        env[x.len()..x.len() + y.len()].copy_from_slice(y);
        self.inner.eval(s, &mut env)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse::parse_body;
    use crate::structure::StructureBuilder;

    fn env(pairs: &[(&str, Elem)]) -> HashMap<String, Elem> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn atoms_and_quantifiers() {
        let s = StructureBuilder::new().sort("V", 3).relation("R", &["V", "V"], [vec![0, 1]]).build().unwrap();
        let r = parse_body("R(x,y)").unwrap();
        assert!(evaluate(&s, &r, &env(&[("x", 0), ("y", 1)])).unwrap());
        let ex = parse_body("exists x:V . R(x,y)").unwrap();
        assert!(!evaluate(&s, &ex, &env(&[("y", 2)])).unwrap());
        assert!(evaluate(&s, &ex, &env(&[("y", 1)])).unwrap());
        assert!(matches!(evaluate(&s, &r, &env(&[("x", 0)])), Err(Error::MissingAssignment(_))));
        assert!(matches!(evaluate(&s, &r, &env(&[("x", 0), ("y", 7)])), Err(Error::SortMismatch(_))));
    }

    #[test]
    fn subset_atom() {
        // Elements of S are bitmasks over {0,1,2}.
        let tuples = (0..8u32).flat_map(|a| (0..8u32).filter(move |b| a & !b == 0).map(move |b| vec![a, b]));
        let s = StructureBuilder::new().sort("S", 8).relation("sub", &["S", "S"], tuples).build().unwrap();
        let f = parse_body("sub(x,y)").unwrap();
        assert!(evaluate(&s, &f, &env(&[("x", 0b001), ("y", 0b011)])).unwrap());
        assert!(!evaluate(&s, &f, &env(&[("x", 0b100), ("y", 0b011)])).unwrap());
    }
}
