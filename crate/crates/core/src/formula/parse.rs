//! Text syntax for partitioned formulas.
//!
//! ```text
//! head    := NAME '(' vars? ';' vars ')' ':=' formula
//! vars    := var (',' var)*          var := NAME (':' SORT)?
//! formula := conj ('|' conj)*
//! conj    := unary ('&' unary)*
//! unary   := '!' unary | quant | '(' formula ')' | atom
//! quant   := ('exists' | 'forall') NAME ':' SORT '.' formula
//! atom    := 'true' | 'false' | NAME '(' terms ')' | term '=' term
//! term    := NAME | '@' NUMBER
//! ```
//!
//! Head variables without a sort annotation get their sort from the relation
//! positions they occupy, or the unique sort of a one-sorted signature.

use std::collections::BTreeMap;

use super::ast::{Formula, PartitionedFormula, Signature, Term, Var};
use crate::error::{Error, Result};
use crate::structure::Elem;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(u64),
    At,
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Dot,
    Define,
    Amp,
    Bar,
    Bang,
    Eq,
    End,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '.' => Tok::Dot,
            '&' => Tok::Amp,
            '|' => Tok::Bar,
            '!' => Tok::Bang,
            '=' => Tok::Eq,
            '@' => Tok::At,
            ':' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Define
            }
            ':' => Tok::Colon,
            c if c.is_ascii_digit() => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let n = text[start..=i]
                    .parse()
                    .map_err(|_| Error::Parse { pos: start, msg: "number too large".into() })?;
                Tok::Num(n)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i + 1 < bytes.len()
                    && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_' || bytes[i + 1] == b'\'')
                {
                    i += 1;
                }
                Tok::Ident(text[start..=i].to_string())
            }
            _ => return Err(Error::Parse { pos: i, msg: format!("unexpected character `{c}`") }),
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos(), msg: msg.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {:?}", self.peek()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.err(format!("expected {what}, found {t:?}")),
        }
    }

    fn head_vars(&mut self, stop: Tok) -> Result<Vec<(String, Option<String>)>> {
        let mut vars = Vec::new();
        if *self.peek() == stop {
            return Ok(vars);
        }
        loop {
            let name = self.ident("variable name")?;
            let sort = if *self.peek() == Tok::Colon {
                self.bump();
                Some(self.ident("sort name")?)
            } else {
                None
            };
            vars.push((name, sort));
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                return Ok(vars);
            }
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut f = self.conj()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let g = self.conj()?;
            f = Formula::Or(Box::new(f), Box::new(g));
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let g = self.unary()?;
            f = Formula::And(Box::new(f), Box::new(g));
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(q) if q == "exists" || q == "forall" => {
                self.bump();
                let name = self.ident("bound variable")?;
                self.expect(Tok::Colon, "`:` and a sort")?;
                let sort = self.ident("sort name")?;
                self.expect(Tok::Dot, "`.`")?;
                let body = Box::new(self.formula()?);
                let v = Var::new(name, sort);
                Ok(if q == "exists" { Formula::Exists(v, body) } else { Formula::Forall(v, body) })
            }
            Tok::Ident(k) if k == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(k) if k == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(name) if self.toks[self.at + 1].1 == Tok::LParen => {
                self.bump();
                self.bump();
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    loop {
                        args.push(self.term()?);
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(Formula::Rel(name, args))
            }
            _ => {
                let a = self.term()?;
                self.expect(Tok::Eq, "`=`")?;
                let b = self.term()?;
                Ok(Formula::Eq(a, b))
            }
        }
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek().clone() {
            Tok::Ident(v) => {
                self.bump();
                Ok(Term::Var(v))
            }
            Tok::At => {
                self.bump();
                match self.bump() {
                    Tok::Num(n) => Ok(Term::Const(n as Elem)),
                    t => self.err(format!("expected element id after `@`, found {t:?}")),
                }
            }
            t => self.err(format!("expected a term, found {t:?}")),
        }
    }
}

/// Parses a bare formula body (no head).
pub fn parse_body(text: &str) -> Result<Formula> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(f)
}

/// Parses `name(x..; y..) := body` and checks it against `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<PartitionedFormula> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let name = p.ident("formula name")?;
    p.expect(Tok::LParen, "`(`")?;
    let xs = p.head_vars(Tok::Semi)?;
    p.expect(Tok::Semi, "`;` separating object and parameter variables")?;
    let ys = p.head_vars(Tok::RParen)?;
    p.expect(Tok::RParen, "`)`")?;
    p.expect(Tok::Define, "`:=`")?;
    let body = p.formula()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Parse { pos: 0, msg: "object and parameter tuples must be nonempty".into() });
    }
    let mut declared: BTreeMap<String, Option<String>> = BTreeMap::new();
    for (n, s) in xs.iter().chain(&ys) {
        if declared.insert(n.clone(), s.clone()).is_some() {
            return Err(Error::Parse { pos: 0, msg: format!("variable `{n}` declared twice") });
        }
    }
    for v in body.free_vars() {
        if !declared.contains_key(&v) {
            return Err(Error::UndeclaredVariable(v));
        }
    }
    let sorts = infer_sorts(&body, declared, sig)?;
    let mk = |vs: &[(String, Option<String>)]| vs.iter().map(|(n, _)| Var::new(n.clone(), sorts[n].clone())).collect();
    let pf = PartitionedFormula { name, object_vars: mk(&xs), param_vars: mk(&ys), formula: body };
    check(&pf, sig)?;
    Ok(pf)
}

fn infer_sorts(
    body: &Formula,
    mut free: BTreeMap<String, Option<String>>,
    sig: &Signature,
) -> Result<BTreeMap<String, String>> {
    loop {
        let before = free.clone();
        infer_walk(body, &mut free, &mut Vec::new(), sig)?;
        if before == free {
            break;
        }
    }
    let only = if sig.sorts.len() == 1 { Some(sig.sorts[0].0.clone()) } else { None };
    free.into_iter()
        .map(|(n, s)| match s.or_else(|| only.clone()) {
            Some(s) => Ok((n, s)),
            None => Err(Error::SortMismatch(format!("cannot infer the sort of `{n}`"))),
        })
        .collect()
}

fn infer_walk(
    f: &Formula,
    free: &mut BTreeMap<String, Option<String>>,
    bound: &mut Vec<Var>,
    sig: &Signature,
) -> Result<()> {
    let known = |v: &str, free: &BTreeMap<String, Option<String>>, bound: &Vec<Var>| -> Option<String> {
        match bound.iter().rev().find(|b| b.name == v) {
            Some(b) => Some(b.sort.clone()),
            None => free.get(v).cloned().flatten(),
        }
    };
    let is_free = |v: &str, bound: &Vec<Var>| !bound.iter().any(|b| b.name == v);
    match f {
        Formula::Rel(r, args) => {
            let rs = sig.relation(r).ok_or_else(|| Error::UnknownRelation(r.clone()))?;
            if rs.len() != args.len() {
                return Err(Error::SortMismatch(format!("relation `{r}` takes {} arguments", rs.len())));
            }
            for (t, s) in args.iter().zip(rs) {
                if let Term::Var(v) = t {
                    if is_free(v, bound) && free.get(v).is_some_and(|x| x.is_none()) {
                        free.insert(v.clone(), Some(s.clone()));
                    }
                }
            }
        }
        Formula::Eq(Term::Var(a), Term::Var(b)) => {
            let (sa, sb) = (known(a, free, bound), known(b, free, bound));
            if let (Some(s), None) = (&sa, &sb) {
                if is_free(b, bound) {
                    free.insert(b.clone(), Some(s.clone()));
                }
            }
            if let (None, Some(s)) = (&sa, &sb) {
                if is_free(a, bound) {
                    free.insert(a.clone(), Some(s.clone()));
                }
            }
        }
        Formula::Not(a) => infer_walk(a, free, bound, sig)?,
        Formula::And(a, b) | Formula::Or(a, b) => {
            infer_walk(a, free, bound, sig)?;
            infer_walk(b, free, bound, sig)?;
        }
        Formula::Exists(v, a) | Formula::Forall(v, a) => {
            bound.push(v.clone());
            infer_walk(a, free, bound, sig)?;
            bound.pop();
        }
        _ => {}
    }
    Ok(())
}

/// Checks sorts at every atom and that free variables are declared.
pub fn check(pf: &PartitionedFormula, sig: &Signature) -> Result<()> {
    let mut scope: Vec<Var> = pf.object_vars.iter().chain(&pf.param_vars).cloned().collect();
    for v in &scope {
        if sig.sort_size(&v.sort).is_none() {
            return Err(Error::UnknownSort(v.sort.clone()));
        }
    }
    if pf.object_vars.is_empty() || pf.param_vars.is_empty() {
        return Err(Error::InvalidArgument("object and parameter tuples must be nonempty".into()));
    }
    for (i, v) in scope.iter().enumerate() {
        if scope[..i].iter().any(|w| w.name == v.name) {
            return Err(Error::InvalidArgument(format!("variable `{}` declared twice", v.name)));
        }
    }
    check_walk(&pf.formula, &mut scope, sig)
}

fn check_walk(f: &Formula, scope: &mut Vec<Var>, sig: &Signature) -> Result<()> {
    let sort_of = |t: &Term, scope: &Vec<Var>| -> Result<Option<String>> {
        match t {
            Term::Var(v) => scope
                .iter()
                .rev()
                .find(|b| b.name == *v)
                .map(|b| Some(b.sort.clone()))
                .ok_or_else(|| Error::UndeclaredVariable(v.clone())),
            Term::Const(_) => Ok(None),
        }
    };
    let const_ok = |t: &Term, sort: &str| -> Result<()> {
        if let Term::Const(e) = t {
            let size = sig.sort_size(sort).ok_or_else(|| Error::UnknownSort(sort.to_string()))?;
            if *e as usize >= size {
                return Err(Error::OutOfRange { elem: *e, sort: sort.to_string() });
            }
        }
        Ok(())
    };
    match f {
        Formula::True | Formula::False => Ok(()),
        Formula::Rel(r, args) => {
            let rs = sig.relation(r).ok_or_else(|| Error::UnknownRelation(r.clone()))?;
            if rs.len() != args.len() {
                return Err(Error::SortMismatch(format!("relation `{r}` takes {} arguments", rs.len())));
            }
            for (t, s) in args.iter().zip(rs) {
                if let Some(ts) = sort_of(t, scope)? {
                    if ts != *s {
                        return Err(Error::SortMismatch(format!("`{t}` has sort {ts}, `{r}` expects {s}")));
                    }
                }
                const_ok(t, s)?;
            }
            Ok(())
        }
        Formula::Eq(a, b) => match (sort_of(a, scope)?, sort_of(b, scope)?) {
            (Some(x), Some(y)) if x != y => Err(Error::SortMismatch(format!("`{a} = {b}` compares {x} with {y}"))),
            (Some(x), _) => const_ok(b, &x),
            (None, Some(y)) => const_ok(a, &y),
            (None, None) => Err(Error::SortMismatch(format!("`{a} = {b}` has no sorted side"))),
        },
        Formula::Not(a) => check_walk(a, scope, sig),
        Formula::And(a, b) | Formula::Or(a, b) => {
            check_walk(a, scope, sig)?;
            check_walk(b, scope, sig)
        }
        Formula::Exists(v, a) | Formula::Forall(v, a) => {
            if sig.sort_size(&v.sort).is_none() {
                return Err(Error::UnknownSort(v.sort.clone()));
            }
            scope.push(v.clone());
            let r = check_walk(a, scope, sig);
            scope.pop();
            r
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_sig() -> Signature {
        Signature { sorts: vec![("V".into(), 4)], relations: vec![("R".into(), vec!["V".into(), "V".into()])] }
    }

    #[test]
    fn parses_random_graph_formula() {
        let pf = parse_formula("phi(x; y,z) := R(x,y) & !R(x,z)", &graph_sig()).unwrap();
        assert_eq!(pf.object_arity(), 1);
        assert_eq!(pf.param_arity(), 2);
        assert_eq!(pf.to_string(), "phi(x:V; y:V, z:V) := R(x, y) & !R(x, z)");
    }

    #[test]
    fn undeclared_free_variable() {
        let sig = Signature {
            sorts: vec![("V".into(), 4)],
            relations: vec![("R".into(), vec!["V".into(), "V".into()]), ("S".into(), vec!["V".into(), "V".into()])],
        };
        let err = parse_formula("phi(x; y) := R(x,y) & S(w,y)", &sig).unwrap_err();
        assert!(err.to_string().contains("free variable not declared"), "{err}");
    }

    #[test]
    fn errors_carry_positions() {
        match parse_formula("phi(x; y) := R(x,y) & ", &graph_sig()) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 22),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_formula("phi(x; y) := Q(x,y)", &graph_sig()), Err(Error::UnknownRelation(_))));
    }

    #[test]
    fn sort_mismatch_detected() {
        let sig = Signature {
            sorts: vec![("X".into(), 2), ("Y".into(), 3)],
            relations: vec![("E".into(), vec!["X".into(), "Y".into()])],
        };
        assert!(matches!(parse_formula("phi(x; y) := E(x,y) & E(y,x)", &sig), Err(Error::SortMismatch(_))));
        let pf = parse_formula("phi(y; x) := exists z:Y . E(x,z) & z = y", &sig).unwrap();
        assert_eq!(pf.object_vars[0].sort, "Y");
    }

    #[test]
    fn print_parse_fixpoint() {
        let corpus = [
            "phi(x; y,z) := R(x,y) & !R(x,z)",
            "phi(x; y) := (R(x,y) | x = y) & !(exists w:V . R(w,x) & R(y,w))",
            "phi(x; y) := forall w:V . R(x,w) | !(w = y) | R(y, @2)",
            "phi(x; y) := R(x,y) & (R(y,x) & R(x,x)) | true & !!false",
            "phi(x; y) := !(R(x,y) | R(y,x)) & (exists u:V . R(u,u)) | x = @0",
        ];
        for text in corpus {
            let a = parse_formula(text, &graph_sig()).unwrap();
            let b = parse_formula(&a.to_string(), &graph_sig()).unwrap();
            assert_eq!(a, b, "{text}");
        }
    }
}
