//! Finite model search by grounding flattened clauses to SAT.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use varisat::{ExtendFormula, Lit, Solver, Var};

use super::clausify::{Clause, Clausifier, EQUALITY};
use crate::fol::{Formula, Ident, Term};

/// Interpretation over the domain `0..size`. Tables are indexed by the
/// argument tuple read as a base-`size` number, first argument most
/// significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteModel {
    pub size: usize,
    pub functions: BTreeMap<Ident, (usize, Vec<usize>)>,
    pub predicates: BTreeMap<Ident, (usize, Vec<bool>)>,
}

fn tuple_index(args: &[usize], size: usize) -> usize {
    args.iter().fold(0, |acc, a| acc * size + a)
}

fn tuples(arity: usize, size: usize) -> impl Iterator<Item = Vec<usize>> {
    let count = size.pow(arity as u32);
    (0..count).map(move |mut i| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = i % size;
            i /= size;
        }
        t
    })
}

impl FiniteModel {
    pub fn eval_term(&self, t: &Term, env: &[(Ident, usize)]) -> usize {
        match t {
            Term::Var(v) => env.iter().rev().find(|(x, _)| x == v).map_or(0, |(_, d)| *d),
            Term::Const(c) => self.functions.get(c).map_or(0, |(_, table)| table[0]),
            Term::App(f, args) => {
                let vals: Vec<usize> = args.iter().map(|a| self.eval_term(a, env)).collect();
                self.functions.get(f).map_or(0, |(_, table)| table[tuple_index(&vals, self.size)])
            }
        }
    }

    /// Truth value of `f`; symbols missing from the tables read as 0 / false.
    pub fn eval(&self, f: &Formula) -> bool {
        self.eval_in(f, &mut Vec::new())
    }

    fn eval_in(&self, f: &Formula, env: &mut Vec<(Ident, usize)>) -> bool {
        match f {
            Formula::Pred(p, args) => {
                let vals: Vec<usize> = args.iter().map(|a| self.eval_term(a, env)).collect();
                self.predicates.get(p).is_some_and(|(_, table)| table[tuple_index(&vals, self.size)])
            }
            Formula::Eq(l, r) => self.eval_term(l, env) == self.eval_term(r, env),
            Formula::Not(g) => !self.eval_in(g, env),
            Formula::And(a, b) => self.eval_in(a, env) && self.eval_in(b, env),
            Formula::Or(a, b) => self.eval_in(a, env) || self.eval_in(b, env),
            Formula::Implies(a, b) => !self.eval_in(a, env) || self.eval_in(b, env),
            Formula::Iff(a, b) => self.eval_in(a, env) == self.eval_in(b, env),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let universal = matches!(f, Formula::Forall(..));
                for d in 0..self.size {
                    env.push((v.clone(), d));
                    let holds = self.eval_in(body, env);
                    env.pop();
                    if holds != universal {
                        return !universal;
                    }
                }
                universal
            }
            Formula::Top => true,
            Formula::Bottom => false,
        }
    }

    /// TPTP finite-interpretation records over elements `e0`, `e1`, ...
    pub fn render(&self) -> String {
        let e = |d: usize| format!("e{d}");
        let mut out = String::new();
        let elements: Vec<String> = (0..self.size).map(|d| format!("X = {}", e(d))).collect();
        let _ = writeln!(out, "fof(domain, fi_domain, ! [X] : ({})).", elements.join(" | "));
        let mut entries = Vec::new();
        for (f, (arity, table)) in &self.functions {
            for t in tuples(*arity, self.size) {
                let value = e(table[tuple_index(&t, self.size)]);
                if t.is_empty() {
                    entries.push(format!("{f} = {value}"));
                } else {
                    let args: Vec<String> = t.iter().map(|d| e(*d)).collect();
                    entries.push(format!("{f}({}) = {value}", args.join(",")));
                }
            }
        }
        if !entries.is_empty() {
            let _ = writeln!(out, "fof(functors, fi_functors, ({})).", entries.join(" & "));
        }
        let mut atoms = Vec::new();
        for (p, (arity, table)) in &self.predicates {
            for t in tuples(*arity, self.size) {
                let sign = if table[tuple_index(&t, self.size)] { "" } else { "~" };
                if t.is_empty() {
                    atoms.push(format!("{sign}{p}"));
                } else {
                    let args: Vec<String> = t.iter().map(|d| e(*d)).collect();
                    atoms.push(format!("{sign}{p}({})", args.join(",")));
                }
            }
        }
        if !atoms.is_empty() {
            let _ = writeln!(out, "fof(predicates, fi_predicates, ({})).", atoms.join(" & "));
        }
        out
    }
}

/// Flat literals mention only variables: `p(x̄)`, `f(x̄) = y` and `x = y`.
#[derive(Debug, Clone)]
enum Flat {
    Pred { pos: bool, sym: usize, args: Vec<usize> },
    Fun { pos: bool, sym: usize, args: Vec<usize>, value: usize },
    Eq { pos: bool, a: usize, b: usize },
}

#[derive(Debug, Default)]
struct Signature {
    functions: Vec<(Ident, usize)>,
    predicates: Vec<(Ident, usize)>,
}

impl Signature {
    fn function(&mut self, name: &str, arity: usize) -> usize {
        position_or_push(&mut self.functions, name, arity)
    }

    fn predicate(&mut self, name: &str, arity: usize) -> usize {
        position_or_push(&mut self.predicates, name, arity)
    }

    fn note_formula(&mut self, f: &Formula) {
        fn term(sig: &mut Signature, t: &Term) {
            match t {
                Term::Var(_) => {}
                Term::Const(c) => {
                    sig.function(c, 0);
                }
                Term::App(f, args) => {
                    sig.function(f, args.len());
                    args.iter().for_each(|a| term(sig, a));
                }
            }
        }
        match f {
            Formula::Pred(p, args) => {
                self.predicate(p, args.len());
                args.iter().for_each(|a| term(self, a));
            }
            Formula::Eq(l, r) => {
                term(self, l);
                term(self, r);
            }
            Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => self.note_formula(g),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                self.note_formula(a);
                self.note_formula(b);
            }
            Formula::Top | Formula::Bottom => {}
        }
    }
}

fn position_or_push(list: &mut Vec<(Ident, usize)>, name: &str, arity: usize) -> usize {
    match list.iter().position(|(n, a)| n == name && *a == arity) {
        Some(i) => i,
        None => {
            list.push((name.to_string(), arity));
            list.len() - 1
        }
    }
}

struct Flattener<'a> {
    sig: &'a mut Signature,
    vars: Vec<Ident>,
    memo: HashMap<Term, usize>,
    lits: Vec<Flat>,
}

impl Flattener<'_> {
    fn var(&mut self, name: &str) -> usize {
        match self.vars.iter().position(|v| v == name) {
            Some(i) => i,
            None => {
                self.vars.push(name.to_string());
                self.vars.len() - 1
            }
        }
    }

    fn fresh(&mut self) -> usize {
        self.vars.push(String::new());
        self.vars.len() - 1
    }

    fn term(&mut self, t: &Term) -> usize {
        if let Term::Var(v) = t {
            return self.var(v);
        }
        if let Some(&v) = self.memo.get(t) {
            return v;
        }
        let (sym, args) = self.application(t);
        let value = self.fresh();
        self.lits.push(Flat::Fun { pos: false, sym, args, value });
        self.memo.insert(t.clone(), value);
        value
    }

    fn application(&mut self, t: &Term) -> (usize, Vec<usize>) {
        match t {
            Term::Const(c) => (self.sig.function(c, 0), vec![]),
            Term::App(f, args) => {
                let sym = self.sig.function(f, args.len());
                (sym, args.iter().map(|a| self.term(a)).collect())
            }
            Term::Var(_) => unreachable!(),
        }
    }

    fn clause(sig: &mut Signature, c: &Clause) -> (Vec<Flat>, usize) {
        let mut fl = Flattener { sig, vars: Vec::new(), memo: HashMap::new(), lits: Vec::new() };
        for l in &c.literals {
            let flat = if l.predicate == EQUALITY {
                match (&l.args[0], &l.args[1]) {
                    (Term::Var(a), Term::Var(b)) => Flat::Eq { pos: l.positive, a: fl.var(a), b: fl.var(b) },
                    (s, t) => {
                        let (s, t) = if matches!(s, Term::Var(_)) { (t, s) } else { (s, t) };
                        let value = fl.term(t);
                        let (sym, args) = fl.application(s);
                        Flat::Fun { pos: l.positive, sym, args, value }
                    }
                }
            } else {
                let sym = fl.sig.predicate(&l.predicate, l.args.len());
                Flat::Pred { pos: l.positive, sym, args: l.args.iter().map(|a| fl.term(a)).collect() }
            };
            fl.lits.push(flat);
        }
        let nvars = fl.vars.len();
        (fl.lits, nvars)
    }
}

/// Instances beyond this per clause make a domain size infeasible.
const MAX_INSTANCES: usize = 2_000_000;

/// Searches domain sizes `1..=max_domain` for a model of `axioms` in which
/// `conjecture` is false. A returned model has been checked by evaluating
/// the input formulas.
pub fn find_model(axioms: &[Formula], conjecture: &Formula, max_domain: usize, deadline: Instant, cancel: &AtomicBool) -> Option<FiniteModel> {
    let mut formulas: Vec<Formula> = axioms.to_vec();
    formulas.push(Formula::not(conjecture.clone()));
    let mut clausifier = Clausifier::new(&formulas);
    let clauses: Vec<Clause> = formulas.iter().flat_map(|f| clausifier.clauses(f)).collect();
    let mut sig = Signature::default();
    for f in &formulas {
        sig.note_formula(f);
    }
    let original = (sig.functions.clone(), sig.predicates.clone());
    let flat: Vec<(Vec<Flat>, usize)> = clauses.iter().map(|c| Flattener::clause(&mut sig, c)).collect();
    let stop = || cancel.load(Ordering::Relaxed) || Instant::now() > deadline;
    for size in 1..=max_domain {
        if stop() {
            return None;
        }
        let Some(model) = solve_size(&sig, &flat, size, &stop) else { continue };
        let model = FiniteModel {
            size,
            functions: model.functions.into_iter().filter(|(f, (a, _))| original.0.contains(&(f.clone(), *a))).collect(),
            predicates: model.predicates.into_iter().filter(|(p, (a, _))| original.1.contains(&(p.clone(), *a))).collect(),
        };
        let valid = axioms.iter().all(|a| model.eval(a)) && !model.eval(conjecture);
        debug_assert!(valid, "model finder produced an invalid model");
        if valid {
            return Some(model);
        }
    }
    None
}

fn solve_size(sig: &Signature, clauses: &[(Vec<Flat>, usize)], size: usize, stop: &impl Fn() -> bool) -> Option<FiniteModel> {
    let mut solver = Solver::new();
    let mut next = 0usize;
    let mut alloc = |count: usize| {
        let base = next;
        next += count;
        base
    };
    let fun_base: Vec<usize> = sig.functions.iter().map(|(_, a)| alloc(size.pow(*a as u32) * size)).collect();
    let pred_base: Vec<usize> = sig.predicates.iter().map(|(_, a)| alloc(size.pow(*a as u32))).collect();
    let fun_lit = |sym: usize, args: &[usize], value: usize, pos: bool| {
        Lit::from_var(Var::from_index(fun_base[sym] + tuple_index(args, size) * size + value), pos)
    };
    let pred_lit = |sym: usize, args: &[usize], pos: bool| Lit::from_var(Var::from_index(pred_base[sym] + tuple_index(args, size)), pos);

    // Every function entry takes exactly one value.
    let mut constants = 0;
    for (sym, (_, arity)) in sig.functions.iter().enumerate() {
        for t in tuples(*arity, size) {
            let lits: Vec<Lit> = (0..size).map(|v| fun_lit(sym, &t, v, true)).collect();
            solver.add_clause(&lits);
            for a in 0..size {
                for b in a + 1..size {
                    solver.add_clause(&[fun_lit(sym, &t, a, false), fun_lit(sym, &t, b, false)]);
                }
            }
        }
        // The k-th constant takes one of the first k+1 elements.
        if *arity == 0 {
            for v in constants + 1..size {
                solver.add_clause(&[fun_lit(sym, &[], v, false)]);
            }
            constants += 1;
        }
    }

    for (lits, nvars) in clauses {
        let instances = size.checked_pow(*nvars as u32).filter(|n| *n <= MAX_INSTANCES)?;
        let mut ground = Vec::with_capacity(lits.len());
        let mut assignment = vec![0usize; *nvars];
        for i in 0..instances {
            if i % 4096 == 0 && stop() {
                return None;
            }
            let mut rest = i;
            for slot in assignment.iter_mut().rev() {
                *slot = rest % size;
                rest /= size;
            }
            ground.clear();
            let mut satisfied = false;
            for l in lits {
                match l {
                    Flat::Eq { pos, a, b } => {
                        if (assignment[*a] == assignment[*b]) == *pos {
                            satisfied = true;
                            break;
                        }
                    }
                    Flat::Pred { pos, sym, args } => {
                        let vals: Vec<usize> = args.iter().map(|v| assignment[*v]).collect();
                        ground.push(pred_lit(*sym, &vals, *pos));
                    }
                    Flat::Fun { pos, sym, args, value } => {
                        let vals: Vec<usize> = args.iter().map(|v| assignment[*v]).collect();
                        ground.push(fun_lit(*sym, &vals, assignment[*value], *pos));
                    }
                }
            }
            if !satisfied {
                if ground.is_empty() {
                    return None;
                }
                solver.add_clause(&ground);
            }
        }
    }
    if stop() || !solver.solve().ok()? {
        return None;
    }
    let truth: HashMap<usize, bool> = solver.model()?.into_iter().map(|l| (l.index(), l.is_positive())).collect();
    let holds = |index: usize| truth.get(&index).copied().unwrap_or(false);
    let mut model = FiniteModel { size, functions: BTreeMap::new(), predicates: BTreeMap::new() };
    for (sym, (name, arity)) in sig.functions.iter().enumerate() {
        let table = tuples(*arity, size)
            .map(|t| (0..size).find(|v| holds(fun_lit(sym, &t, *v, true).index())).unwrap_or(0))
            .collect();
        model.functions.insert(name.clone(), (*arity, table));
    }
    for (sym, (name, arity)) in sig.predicates.iter().enumerate() {
        let table = tuples(*arity, size).map(|t| holds(pred_lit(sym, &t, true).index())).collect();
        model.predicates.insert(name.clone(), (*arity, table));
    }
    Some(model)
}
