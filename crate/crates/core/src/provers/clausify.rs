//! Negation normal form, skolemization and conjunctive normal form.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::fol::{Formula, Ident, Term};

/// The predicate name used for equality literals.
pub const EQUALITY: &str = "=";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub predicate: Ident,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(positive: bool, predicate: impl Into<Ident>, args: Vec<Term>) -> Self {
        Literal { positive, predicate: predicate.into(), args }
    }

    pub fn eq(positive: bool, l: Term, r: Term) -> Self {
        Literal::new(positive, EQUALITY, vec![l, r])
    }

    pub fn is_equality(&self) -> bool {
        self.predicate == EQUALITY
    }

    pub fn negated(&self) -> Self {
        Literal { positive: !self.positive, ..self.clone() }
    }

    fn map_terms(&self, f: &impl Fn(&Term) -> Term) -> Self {
        Literal { positive: self.positive, predicate: self.predicate.clone(), args: self.args.iter().map(f).collect() }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_equality() {
            let op = if self.positive { "=" } else { "≠" };
            return write!(f, "{} {op} {}", self.args[0], self.args[1]);
        }
        if !self.positive {
            write!(f, "¬")?;
        }
        write!(f, "{}", Term::app(self.predicate.clone(), self.args.clone()))
    }
}

/// A disjunction of literals; the empty clause is false.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Clause {
    pub literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Self {
        Clause { literals }
    }

    pub fn vars(&self) -> Vec<Ident> {
        let mut out: Vec<Ident> = Vec::new();
        for l in &self.literals {
            for a in &l.args {
                for v in a.vars() {
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literals.is_empty() {
            return write!(f, "□");
        }
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Nnf {
    Lit(Literal),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
    Forall(Ident, Box<Nnf>),
    Exists(Ident, Box<Nnf>),
    True,
    False,
}

fn rename_term(t: &Term, scope: &[(Ident, Ident)]) -> Term {
    match t {
        Term::Var(v) => match scope.iter().rev().find(|(from, _)| from == v) {
            Some((_, to)) => Term::Var(to.clone()),
            None => t.clone(),
        },
        Term::Const(_) => t.clone(),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| rename_term(a, scope)).collect()),
    }
}

fn subst_term(t: &Term, subst: &[(Ident, Term)]) -> Term {
    match t {
        Term::Var(v) => subst.iter().rev().find(|(x, _)| x == v).map_or_else(|| t.clone(), |(_, s)| s.clone()),
        Term::Const(_) => t.clone(),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| subst_term(a, subst)).collect()),
    }
}

/// Turns closed formulas into clauses, sharing fresh-name state so skolem
/// symbols and clause variables stay distinct across calls.
#[derive(Debug, Clone)]
pub struct Clausifier {
    taken: HashSet<Ident>,
    skolems: usize,
    vars: usize,
}

impl Clausifier {
    /// `formulas` are scanned so that skolem symbols avoid their names.
    pub fn new<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Self {
        let mut taken = HashSet::new();
        for f in formulas {
            taken.extend(f.names());
        }
        Clausifier { taken, skolems: 0, vars: 0 }
    }

    fn fresh_var(&mut self) -> Ident {
        self.vars += 1;
        format!("V{}", self.vars)
    }

    fn fresh_skolem(&mut self) -> Ident {
        loop {
            let name = format!("sk{}", self.skolems);
            self.skolems += 1;
            if !self.taken.contains(&name) {
                return name;
            }
        }
    }

    pub fn clauses(&mut self, f: &Formula) -> Vec<Clause> {
        let nnf = self.nnf(f, true, &mut Vec::new());
        let matrix = self.skolemize(nnf, &mut Vec::new());
        cnf(&matrix)
            .into_iter()
            .filter_map(simplify)
            .map(|c| self.standardize(c))
            .collect()
    }

    fn nnf(&mut self, f: &Formula, positive: bool, scope: &mut Vec<(Ident, Ident)>) -> Nnf {
        let lit = |pred: &Ident, args: &[Term], scope: &[(Ident, Ident)]| {
            Nnf::Lit(Literal::new(positive, pred.clone(), args.iter().map(|a| rename_term(a, scope)).collect()))
        };
        match f {
            Formula::Pred(p, args) => lit(p, args, scope),
            Formula::Eq(l, r) => Nnf::Lit(Literal::eq(positive, rename_term(l, scope), rename_term(r, scope))),
            Formula::Not(g) => self.nnf(g, !positive, scope),
            Formula::And(a, b) | Formula::Or(a, b) => {
                let parts = vec![self.nnf(a, positive, scope), self.nnf(b, positive, scope)];
                if matches!(f, Formula::And(..)) == positive {
                    Nnf::And(parts)
                } else {
                    Nnf::Or(parts)
                }
            }
            Formula::Implies(a, b) => {
                let parts = vec![self.nnf(a, !positive, scope), self.nnf(b, positive, scope)];
                if positive {
                    Nnf::Or(parts)
                } else {
                    Nnf::And(parts)
                }
            }
            Formula::Iff(a, b) => {
                // (¬a ∨ b) ∧ (a ∨ ¬b), or (a ∧ ¬b) ∨ (¬a ∧ b) under negation.
                let (pa, na) = (self.nnf(a, true, scope), self.nnf(a, false, scope));
                let (pb, nb) = (self.nnf(b, true, scope), self.nnf(b, false, scope));
                if positive {
                    Nnf::And(vec![Nnf::Or(vec![na, pb]), Nnf::Or(vec![pa, nb])])
                } else {
                    Nnf::Or(vec![Nnf::And(vec![pa, nb]), Nnf::And(vec![na, pb])])
                }
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let fresh = self.fresh_var();
                scope.push((v.clone(), fresh.clone()));
                let inner = self.nnf(body, positive, scope);
                scope.pop();
                if matches!(f, Formula::Forall(..)) == positive {
                    Nnf::Forall(fresh, Box::new(inner))
                } else {
                    Nnf::Exists(fresh, Box::new(inner))
                }
            }
            Formula::Top => {
                if positive {
                    Nnf::True
                } else {
                    Nnf::False
                }
            }
            Formula::Bottom => {
                if positive {
                    Nnf::False
                } else {
                    Nnf::True
                }
            }
        }
    }

    /// Replaces each existential by a skolem term over the universals free
    /// in its subformula, then drops the quantifiers.
    fn skolemize(&mut self, n: Nnf, subst: &mut Vec<(Ident, Term)>) -> Nnf {
        match n {
            Nnf::Lit(l) => Nnf::Lit(l.map_terms(&|t| subst_term(t, subst))),
            Nnf::And(ps) => Nnf::And(ps.into_iter().map(|p| self.skolemize(p, subst)).collect()),
            Nnf::Or(ps) => Nnf::Or(ps.into_iter().map(|p| self.skolemize(p, subst)).collect()),
            Nnf::Forall(_, body) => self.skolemize(*body, subst),
            Nnf::Exists(v, body) => {
                let mut args: Vec<Ident> = Vec::new();
                let mut free = Vec::new();
                nnf_free(&body, &mut vec![v.clone()], &mut free);
                for x in free {
                    for y in subst_term(&Term::Var(x), subst).vars() {
                        if !args.contains(&y) {
                            args.push(y);
                        }
                    }
                }
                let symbol = self.fresh_skolem();
                let term = Term::app(symbol, args.into_iter().map(Term::Var).collect());
                subst.push((v, term));
                let out = self.skolemize(*body, subst);
                subst.pop();
                out
            }
            Nnf::True => Nnf::True,
            Nnf::False => Nnf::False,
        }
    }

    fn standardize(&mut self, c: Clause) -> Clause {
        let renaming: Vec<(Ident, Term)> = c.vars().into_iter().map(|v| (v, Term::Var(self.fresh_var()))).collect();
        Clause::new(c.literals.iter().map(|l| l.map_terms(&|t| subst_term(t, &renaming))).collect())
    }
}

fn nnf_free(n: &Nnf, bound: &mut Vec<Ident>, out: &mut Vec<Ident>) {
    match n {
        Nnf::Lit(l) => {
            for a in &l.args {
                for v in a.vars() {
                    if !bound.contains(&v) && !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
        }
        Nnf::And(ps) | Nnf::Or(ps) => ps.iter().for_each(|p| nnf_free(p, bound, out)),
        Nnf::Forall(v, b) | Nnf::Exists(v, b) => {
            bound.push(v.clone());
            nnf_free(b, bound, out);
            bound.pop();
        }
        Nnf::True | Nnf::False => {}
    }
}

/// Distributes disjunctions over conjunctions.
fn cnf(n: &Nnf) -> Vec<Vec<Literal>> {
    match n {
        Nnf::Lit(l) => vec![vec![l.clone()]],
        Nnf::True => vec![],
        Nnf::False => vec![vec![]],
        Nnf::And(ps) => ps.iter().flat_map(cnf).collect(),
        Nnf::Or(ps) => {
            let mut acc: Vec<Vec<Literal>> = vec![vec![]];
            for p in ps {
                let part = cnf(p);
                let mut next = Vec::with_capacity(acc.len() * part.len());
                for a in &acc {
                    for b in &part {
                        let mut c = a.clone();
                        c.extend(b.iter().cloned());
                        next.push(c);
                    }
                }
                acc = next;
            }
            acc
        }
        Nnf::Forall(_, b) | Nnf::Exists(_, b) => cnf(b),
    }
}

/// Drops duplicate literals; `None` for tautologies.
fn simplify(lits: Vec<Literal>) -> Option<Clause> {
    let mut out: Vec<Literal> = Vec::with_capacity(lits.len());
    for l in lits {
        if l.is_equality() && l.args[0] == l.args[1] {
            if l.positive {
                return None;
            }
            continue;
        }
        if out.iter().any(|o| o.positive != l.positive && o.predicate == l.predicate && o.args == l.args) {
            return None;
        }
        if !out.contains(&l) {
            out.push(l);
        }
    }
    Some(Clause::new(out))
}

/// Reflexivity, symmetry, transitivity, and one congruence clause per
/// argument position of every function and predicate symbol in `clauses`.
pub fn equality_axioms(clauses: &[Clause]) -> Vec<Clause> {
    let mut functions: BTreeSet<(Ident, usize)> = BTreeSet::new();
    let mut predicates: BTreeSet<(Ident, usize)> = BTreeSet::new();
    fn collect(t: &Term, out: &mut BTreeSet<(Ident, usize)>) {
        if let Term::App(f, args) = t {
            out.insert((f.clone(), args.len()));
            args.iter().for_each(|a| collect(a, out));
        }
    }
    for c in clauses {
        for l in &c.literals {
            if !l.is_equality() && !l.args.is_empty() {
                predicates.insert((l.predicate.clone(), l.args.len()));
            }
            l.args.iter().for_each(|a| collect(a, &mut functions));
        }
    }
    let v = |s: &str| Term::var(s);
    let mut out = vec![
        Clause::new(vec![Literal::eq(true, v("X"), v("X"))]),
        Clause::new(vec![Literal::eq(false, v("X"), v("Y")), Literal::eq(true, v("Y"), v("X"))]),
        Clause::new(vec![Literal::eq(false, v("X"), v("Y")), Literal::eq(false, v("Y"), v("Z")), Literal::eq(true, v("X"), v("Z"))]),
    ];
    let args_with = |n: usize, i: usize, at: &str| -> Vec<Term> {
        (0..n).map(|k| if k == i { v(at) } else { v(&format!("A{k}")) }).collect()
    };
    for (f, n) in &functions {
        for i in 0..*n {
            out.push(Clause::new(vec![
                Literal::eq(false, v("X"), v("Y")),
                Literal::eq(true, Term::app(f.clone(), args_with(*n, i, "X")), Term::app(f.clone(), args_with(*n, i, "Y"))),
            ]));
        }
    }
    for (p, n) in &predicates {
        for i in 0..*n {
            out.push(Clause::new(vec![
                Literal::eq(false, v("X"), v("Y")),
                Literal::new(false, p.clone(), args_with(*n, i, "X")),
                Literal::new(true, p.clone(), args_with(*n, i, "Y")),
            ]));
        }
    }
    out
}

pub fn uses_equality(clauses: &[Clause]) -> bool {
    clauses.iter().any(|c| c.literals.iter().any(Literal::is_equality))
}

/// Clauses for the conjunction of `formulas`, with equality axioms appended
/// when `=` occurs.
pub fn clausify(formulas: &[Formula]) -> Vec<Clause> {
    let mut c = Clausifier::new(formulas);
    let mut out: Vec<Clause> = formulas.iter().flat_map(|f| c.clauses(f)).collect();
    if uses_equality(&out) {
        let axioms = equality_axioms(&out);
        out.extend(axioms);
    }
    out
}
