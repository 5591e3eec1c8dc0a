//! First-order terms and formulas.
//!
//! Everything downstream of the surface language works on these trees: the
//! kernel builds statement goals out of them, the TPTP printer renders them,
//! and the internal provers clausify them.

mod syntax;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

pub use syntax::{parse_formula, parse_term, SyntaxError};

/// Identifiers are plain strings over `[A-Za-z0-9_']`.
pub type Ident = String;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Ident),
    Const(Ident),
    App(Ident, Vec<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Pred(Ident, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(Ident, Box<Formula>),
    Exists(Ident, Box<Formula>),
    Top,
    Bottom,
}

impl Term {
    pub fn var(name: impl Into<Ident>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<Ident>) -> Self {
        Term::Const(name.into())
    }

    /// Function application; a nullary application collapses to a constant.
    pub fn app(symbol: impl Into<Ident>, args: Vec<Term>) -> Self {
        let symbol = symbol.into();
        if args.is_empty() {
            Term::Const(symbol)
        } else {
            Term::App(symbol, args)
        }
    }

    /// Variables in first-occurrence order, without duplicates.
    pub fn vars(&self) -> Vec<Ident> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Ident>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    fn has_var(&self, name: &str) -> bool {
        match self {
            Term::Var(v) => v == name,
            Term::Const(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.has_var(name)),
        }
    }

    fn subst_var(&self, name: &str, by: &Term) -> Term {
        match self {
            Term::Var(v) if v == name => by.clone(),
            Term::Var(_) | Term::Const(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.subst_var(name, by)).collect()),
        }
    }

    fn collect_names(&self, out: &mut HashSet<Ident>) {
        match self {
            Term::Var(v) | Term::Const(v) => {
                out.insert(v.clone());
            }
            Term::App(f, args) => {
                out.insert(f.clone());
                args.iter().for_each(|a| a.collect_names(out));
            }
        }
    }

    fn collect_consts(&self, out: &mut Vec<Ident>) {
        match self {
            Term::Var(_) => {}
            Term::Const(c) => {
                if !out.contains(c) {
                    out.push(c.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_consts(out)),
        }
    }

    fn collect_signature(&self, sig: &mut Signature) {
        match self {
            Term::Var(_) => {}
            Term::Const(c) => sig.note(c, SymbolKind::Function, 0),
            Term::App(f, args) => {
                sig.note(f, SymbolKind::Function, args.len());
                args.iter().for_each(|a| a.collect_signature(sig));
            }
        }
    }
}

impl Formula {
    pub fn pred(symbol: impl Into<Ident>, args: Vec<Term>) -> Self {
        Formula::Pred(symbol.into(), args)
    }

    pub fn eq(lhs: Term, rhs: Term) -> Self {
        Formula::Eq(lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(var: impl Into<Ident>, body: Formula) -> Self {
        Formula::Forall(var.into(), Box::new(body))
    }

    pub fn exists(var: impl Into<Ident>, body: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    /// Left-nested conjunction; `Top` for an empty list.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts.into_iter().reduce(Formula::and).unwrap_or(Formula::Top)
    }

    /// Left-nested disjunction; `Bottom` for an empty list.
    pub fn disj(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts.into_iter().reduce(Formula::or).unwrap_or(Formula::Bottom)
    }

    pub fn forall_many(vars: &[Ident], body: Formula) -> Self {
        vars.iter().rev().fold(body, |acc, v| Formula::forall(v.clone(), acc))
    }

    pub fn exists_many(vars: &[Ident], body: Formula) -> Self {
        vars.iter().rev().fold(body, |acc, v| Formula::exists(v.clone(), acc))
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<Ident> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    fn collect_free(&self, bound: &mut Vec<Ident>, out: &mut Vec<Ident>) {
        let push_term = |t: &Term, bound: &Vec<Ident>, out: &mut Vec<Ident>| {
            for v in t.vars() {
                if !bound.contains(&v) && !out.contains(&v) {
                    out.push(v);
                }
            }
        };
        match self {
            Formula::Pred(_, args) => args.iter().for_each(|a| push_term(a, bound, out)),
            Formula::Eq(l, r) => {
                push_term(l, bound, out);
                push_term(r, bound, out);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Formula::Top | Formula::Bottom => {}
        }
    }

    fn has_free(&self, name: &str) -> bool {
        match self {
            Formula::Pred(_, args) => args.iter().any(|a| a.has_var(name)),
            Formula::Eq(l, r) => l.has_var(name) || r.has_var(name),
            Formula::Not(f) => f.has_free(name),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.has_free(name) || b.has_free(name)
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => v != name && body.has_free(name),
            Formula::Top | Formula::Bottom => false,
        }
    }

    /// Every identifier occurring anywhere in the formula: variables (bound
    /// or free), constants, function and predicate symbols.
    pub fn names(&self) -> HashSet<Ident> {
        let mut out = HashSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut HashSet<Ident>) {
        match self {
            Formula::Pred(p, args) => {
                out.insert(p.clone());
                args.iter().for_each(|a| a.collect_names(out));
            }
            Formula::Eq(l, r) => {
                l.collect_names(out);
                r.collect_names(out);
            }
            Formula::Not(f) => f.collect_names(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                out.insert(v.clone());
                body.collect_names(out);
            }
            Formula::Top | Formula::Bottom => {}
        }
    }

    /// Constants in first-occurrence order.
    pub fn constants(&self) -> Vec<Ident> {
        let mut out = Vec::new();
        self.for_each_term(&mut |t| t.collect_consts(&mut out));
        out
    }

    fn for_each_term(&self, visit: &mut impl FnMut(&Term)) {
        match self {
            Formula::Pred(_, args) => args.iter().for_each(&mut *visit),
            Formula::Eq(l, r) => {
                visit(l);
                visit(r);
            }
            Formula::Not(f) => f.for_each_term(visit),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.for_each_term(visit);
                b.for_each_term(visit);
            }
            Formula::Forall(_, body) | Formula::Exists(_, body) => body.for_each_term(visit),
            Formula::Top | Formula::Bottom => {}
        }
    }

    /// Records every predicate and function symbol with its arity.
    pub fn collect_signature(&self, sig: &mut Signature) {
        match self {
            Formula::Pred(p, args) => {
                sig.note(p, SymbolKind::Predicate, args.len());
                args.iter().for_each(|a| a.collect_signature(sig));
            }
            Formula::Eq(l, r) => {
                l.collect_signature(sig);
                r.collect_signature(sig);
            }
            Formula::Not(f) => f.collect_signature(sig),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_signature(sig);
                b.collect_signature(sig);
            }
            Formula::Forall(_, body) | Formula::Exists(_, body) => body.collect_signature(sig),
            Formula::Top | Formula::Bottom => {}
        }
    }

    pub fn contains_equality(&self) -> bool {
        match self {
            Formula::Eq(..) => true,
            Formula::Pred(..) | Formula::Top | Formula::Bottom => false,
            Formula::Not(f) | Formula::Forall(_, f) | Formula::Exists(_, f) => f.contains_equality(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.contains_equality() || b.contains_equality()
            }
        }
    }

    /// Capture-avoiding substitution of `by` for the free occurrences of `var`.
    pub fn substitute(&self, var: &str, by: &Term) -> Formula {
        let by_vars = by.vars();
        self.subst_inner(var, by, &by_vars)
    }

    fn subst_inner(&self, var: &str, by: &Term, by_vars: &[Ident]) -> Formula {
        match self {
            Formula::Pred(p, args) => Formula::Pred(p.clone(), args.iter().map(|a| a.subst_var(var, by)).collect()),
            Formula::Eq(l, r) => Formula::Eq(l.subst_var(var, by), r.subst_var(var, by)),
            Formula::Not(f) => Formula::not(f.subst_inner(var, by, by_vars)),
            Formula::And(a, b) => Formula::and(a.subst_inner(var, by, by_vars), b.subst_inner(var, by, by_vars)),
            Formula::Or(a, b) => Formula::or(a.subst_inner(var, by, by_vars), b.subst_inner(var, by, by_vars)),
            Formula::Implies(a, b) => {
                Formula::implies(a.subst_inner(var, by, by_vars), b.subst_inner(var, by, by_vars))
            }
            Formula::Iff(a, b) => Formula::iff(a.subst_inner(var, by, by_vars), b.subst_inner(var, by, by_vars)),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let rebuild = |v: Ident, body: Formula| match self {
                    Formula::Forall(..) => Formula::forall(v, body),
                    _ => Formula::exists(v, body),
                };
                if v == var || !body.has_free(var) {
                    return self.clone();
                }
                if by_vars.contains(v) {
                    let mut avoid = body.names();
                    avoid.extend(by_vars.iter().cloned());
                    avoid.insert(var.to_string());
                    let fresh = fresh_numbered(v, &avoid);
                    let renamed = body.substitute(v, &Term::Var(fresh.clone()));
                    rebuild(fresh, renamed.subst_inner(var, by, by_vars))
                } else {
                    rebuild(v.clone(), body.subst_inner(var, by, by_vars))
                }
            }
            Formula::Top | Formula::Bottom => self.clone(),
        }
    }

    /// Applies several substitutions one after another.
    pub fn substitute_all<'a>(&self, pairs: impl IntoIterator<Item = (&'a str, &'a Term)>) -> Formula {
        pairs.into_iter().fold(self.clone(), |f, (v, t)| f.substitute(v, t))
    }

    /// Universally quantifies the free variables, in first-occurrence order.
    pub fn universal_closure(&self) -> Formula {
        let free = self.free_vars();
        Formula::forall_many(&free, self.clone())
    }

    /// The variables of the outermost run of universal quantifiers.
    pub fn forall_prefix(&self) -> Vec<Ident> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Formula::Forall(v, body) = cur {
            out.push(v.clone());
            cur = body;
        }
        out
    }

    /// Replaces the listed outermost universal variables by fresh constants.
    ///
    /// Fresh names are `c` followed by the variable name, with a numeric
    /// suffix when that name already occurs in the formula or in `avoid`.
    pub fn freeze(&self, vars: &[Ident], avoid: &HashSet<Ident>) -> Result<(Formula, FreezeMap), FreezeError> {
        let prefix = self.forall_prefix();
        if let Some(bad) = vars.iter().find(|v| !prefix.contains(v)) {
            return Err(FreezeError { var: bad.clone() });
        }
        let mut taken = self.names();
        taken.extend(avoid.iter().cloned());
        let mut map = FreezeMap::default();
        let mut kept = Vec::new();
        let mut cur = self;
        while let Formula::Forall(v, body) = cur {
            if vars.contains(v) && !map.contains(v) {
                let name = fresh_constant(v, &taken);
                taken.insert(name.clone());
                map.pairs.push((v.clone(), name));
            } else {
                kept.push(v.clone());
            }
            cur = body;
        }
        let mut body = cur.clone();
        for (v, c) in &map.pairs {
            body = body.substitute(v, &Term::Const(c.clone()));
        }
        // Variables that stay quantified keep their original relative order.
        Ok((Formula::forall_many(&kept, body), map))
    }

    /// Structural comparison that ignores the order and grouping of
    /// conjunctions and the names of bound variables.
    pub fn matches(&self, other: &Formula) -> bool {
        self.normalized() == other.normalized()
    }

    fn normalized(&self) -> Formula {
        let mut counter = 0usize;
        self.normalize_with(&mut Vec::new(), &mut counter)
    }

    fn normalize_with(&self, scope: &mut Vec<(Ident, Ident)>, counter: &mut usize) -> Formula {
        let rename = |t: &Term, scope: &Vec<(Ident, Ident)>| rename_term(t, scope);
        match self {
            Formula::Pred(p, args) => Formula::Pred(p.clone(), args.iter().map(|a| rename(a, scope)).collect()),
            Formula::Eq(l, r) => Formula::Eq(rename(l, scope), rename(r, scope)),
            Formula::Not(f) => Formula::not(f.normalize_with(scope, counter)),
            Formula::And(..) => {
                let mut parts = Vec::new();
                self.flatten_and(&mut parts);
                let mut normed: Vec<Formula> = parts.iter().map(|p| p.normalize_with(scope, counter)).collect();
                normed.sort();
                normed.dedup();
                Formula::conj(normed)
            }
            Formula::Or(a, b) => Formula::or(a.normalize_with(scope, counter), b.normalize_with(scope, counter)),
            Formula::Implies(a, b) => {
                Formula::implies(a.normalize_with(scope, counter), b.normalize_with(scope, counter))
            }
            Formula::Iff(a, b) => Formula::iff(a.normalize_with(scope, counter), b.normalize_with(scope, counter)),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let canon = format!("_{counter}");
                *counter += 1;
                scope.push((v.clone(), canon.clone()));
                let inner = body.normalize_with(scope, counter);
                scope.pop();
                match self {
                    Formula::Forall(..) => Formula::forall(canon, inner),
                    _ => Formula::exists(canon, inner),
                }
            }
            Formula::Top | Formula::Bottom => self.clone(),
        }
    }

    /// Conjuncts of a (possibly nested) conjunction, left to right.
    pub fn conjuncts(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        self.flatten_and(&mut out);
        out
    }

    fn flatten_and(&self, out: &mut Vec<Formula>) {
        match self {
            Formula::And(a, b) => {
                a.flatten_and(out);
                b.flatten_and(out);
            }
            other => out.push(other.clone()),
        }
    }

    /// Renames inner binders that shadow an enclosing binder of the same name.
    pub fn with_distinct_binders(&self) -> Formula {
        let avoid = self.names();
        self.distinct_inner(&mut Vec::new(), &avoid)
    }

    fn distinct_inner(&self, path: &mut Vec<Ident>, avoid: &HashSet<Ident>) -> Formula {
        match self {
            Formula::Not(f) => Formula::not(f.distinct_inner(path, avoid)),
            Formula::And(a, b) => Formula::and(a.distinct_inner(path, avoid), b.distinct_inner(path, avoid)),
            Formula::Or(a, b) => Formula::or(a.distinct_inner(path, avoid), b.distinct_inner(path, avoid)),
            Formula::Implies(a, b) => {
                Formula::implies(a.distinct_inner(path, avoid), b.distinct_inner(path, avoid))
            }
            Formula::Iff(a, b) => Formula::iff(a.distinct_inner(path, avoid), b.distinct_inner(path, avoid)),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let (name, body) = if path.contains(v) {
                    let mut taken = avoid.clone();
                    taken.extend(path.iter().cloned());
                    let fresh = fresh_numbered(v, &taken);
                    let renamed = body.substitute(v, &Term::Var(fresh.clone()));
                    (fresh, renamed)
                } else {
                    (v.clone(), (**body).clone())
                };
                path.push(name.clone());
                let inner = body.distinct_inner(path, avoid);
                path.pop();
                match self {
                    Formula::Forall(..) => Formula::forall(name, inner),
                    _ => Formula::exists(name, inner),
                }
            }
            Formula::Pred(..) | Formula::Eq(..) | Formula::Top | Formula::Bottom => self.clone(),
        }
    }

    /// Deterministic textual form; [`parse_formula`] reads it back.
    pub fn render(&self) -> String {
        syntax::render_formula(self)
    }
}

fn rename_term(t: &Term, scope: &[(Ident, Ident)]) -> Term {
    match t {
        Term::Var(v) => match scope.iter().rev().find(|(orig, _)| orig == v) {
            Some((_, canon)) => Term::Var(canon.clone()),
            None => t.clone(),
        },
        Term::Const(_) => t.clone(),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| rename_term(a, scope)).collect()),
    }
}

/// `base0`, `base1`, ... -- the first name not in `taken`.
pub fn fresh_numbered(base: &str, taken: &HashSet<Ident>) -> Ident {
    (0..)
        .map(|i| format!("{base}{i}"))
        .find(|n| !taken.contains(n))
        .expect("unbounded range")
}

/// `c<name>`, then `c<name>1`, `c<name>2`, ... on collision.
pub fn fresh_constant(var: &str, taken: &HashSet<Ident>) -> Ident {
    let base = format!("c{var}");
    if !taken.contains(&base) {
        return base;
    }
    (1..)
        .map(|i| format!("{base}{i}"))
        .find(|n| !taken.contains(n))
        .expect("unbounded range")
}

/// Variable to fresh-constant pairs produced by [`Formula::freeze`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreezeMap {
    pub pairs: Vec<(Ident, Ident)>,
}

impl FreezeMap {
    pub fn contains(&self, var: &str) -> bool {
        self.pairs.iter().any(|(v, _)| v == var)
    }

    pub fn get(&self, var: &str) -> Option<&Ident> {
        self.pairs.iter().find(|(v, _)| v == var).map(|(_, c)| c)
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("variable `{var}` is not bound by the outermost universal quantifiers")]
pub struct FreezeError {
    pub var: Ident,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKind {
    Predicate,
    Function,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolKind::Predicate => f.write_str("predicate"),
            SymbolKind::Function => f.write_str("function"),
        }
    }
}

/// Symbol table gathered from formulas. Conflicting uses of one name are
/// kept so callers can report them.
#[derive(Debug, Clone, Default)]
pub struct Signature {
    pub symbols: BTreeMap<Ident, (SymbolKind, usize)>,
    pub clashes: Vec<(Ident, (SymbolKind, usize), (SymbolKind, usize))>,
}

impl Signature {
    pub fn note(&mut self, name: &str, kind: SymbolKind, arity: usize) {
        match self.symbols.get(name) {
            Some(&existing) if existing != (kind, arity) => {
                let clash = (name.to_string(), existing, (kind, arity));
                if !self.clashes.contains(&clash) {
                    self.clashes.push(clash);
                }
            }
            Some(_) => {}
            None => {
                self.symbols.insert(name.to_string(), (kind, arity));
            }
        }
    }

    pub fn of(formulas: &[&Formula]) -> Signature {
        let mut sig = Signature::default();
        formulas.iter().for_each(|f| f.collect_signature(&mut sig));
        sig
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&syntax::render_term(self, &[]))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    fn p(name: &str, args: Vec<Term>) -> Formula {
        Formula::pred(name, args)
    }

    #[test]
    fn substitute_replaces_free_occurrence() {
        let f = p("P", vec![v("x")]);
        assert_eq!(f.substitute("x", &Term::constant("a")), p("P", vec![Term::constant("a")]));
    }

    #[test]
    fn substitute_leaves_bound_occurrence() {
        let f = Formula::forall("x", p("P", vec![v("x")]));
        assert_eq!(f.substitute("x", &Term::constant("a")), f);
    }

    #[test]
    fn substitute_renames_to_avoid_capture() {
        let f = Formula::forall("y", p("Q", vec![v("x"), v("y")]));
        let by = Term::app("f", vec![v("y")]);
        let expected = Formula::forall("y0", p("Q", vec![Term::app("f", vec![v("y")]), v("y0")]));
        assert_eq!(f.substitute("x", &by), expected);
    }

    #[test]
    fn free_vars_examples() {
        assert!(Formula::forall("x", p("P", vec![v("x")])).free_vars().is_empty());
        let imp = Formula::implies(p("P", vec![v("x")]), p("Q", vec![v("y")]));
        assert_eq!(imp.free_vars(), vec!["x".to_string(), "y".to_string()]);
        assert!(p("injective", vec![Term::constant("f")]).free_vars().is_empty());
    }

    #[test]
    fn freeze_single_variable() {
        let f = Formula::forall("x", p("P", vec![v("x")]));
        let (frozen, map) = f.freeze(&["x".into()], &HashSet::new()).unwrap();
        assert_eq!(frozen, p("P", vec![Term::constant("cx")]));
        assert_eq!(map.pairs, vec![("x".to_string(), "cx".to_string())]);
    }

    #[test]
    fn freeze_nothing_is_identity() {
        let f = p("P", vec![Term::constant("a")]);
        let (frozen, map) = f.freeze(&[], &HashSet::new()).unwrap();
        assert_eq!(frozen, f);
        assert!(map.is_empty());
    }

    #[test]
    fn freeze_avoids_existing_names() {
        let f = Formula::forall("x", p("P", vec![v("x"), Term::constant("cx")]));
        let (frozen, map) = f.freeze(&["x".into()], &HashSet::new()).unwrap();
        assert_eq!(map.get("x").unwrap(), "cx1");
        assert_eq!(frozen, p("P", vec![Term::constant("cx1"), Term::constant("cx")]));
    }

    #[test]
    fn freeze_rejects_inner_variable() {
        let f = Formula::implies(Formula::Top, Formula::forall("x", p("P", vec![v("x")])));
        assert!(f.freeze(&["x".into()], &HashSet::new()).is_err());
    }

    #[test]
    fn closure_quantifies_in_occurrence_order() {
        let f = Formula::implies(p("P", vec![v("x")]), p("Q", vec![v("x")]));
        assert_eq!(f.universal_closure(), Formula::forall("x", f.clone()));
        let closed = Formula::forall("x", p("P", vec![v("x")]));
        assert_eq!(closed.universal_closure(), closed);
    }

    #[test]
    fn matches_ignores_conjunct_order_and_bound_names() {
        let a = Formula::forall(
            "x",
            Formula::conj([p("A", vec![v("x")]), p("B", vec![]), p("C", vec![])]),
        );
        let b = Formula::forall(
            "z",
            Formula::and(p("C", vec![]), Formula::and(p("B", vec![]), p("A", vec![v("z")]))),
        );
        assert!(a.matches(&b));
        assert!(!a.matches(&Formula::forall("z", p("A", vec![v("z")]))));
    }

    #[test]
    fn shadowed_binders_are_renamed() {
        let f = Formula::forall("x", Formula::forall("x", p("P", vec![v("x")])));
        let g = f.with_distinct_binders();
        assert_eq!(g, Formula::forall("x", Formula::forall("x0", p("P", vec![v("x0")]))));
    }

    #[test]
    fn signature_reports_arity_clash() {
        let f = Formula::and(p("P", vec![v("x")]), p("P", vec![v("x"), v("y")]));
        let sig = Signature::of(&[&f]);
        assert_eq!(sig.clashes.len(), 1);
    }
}
