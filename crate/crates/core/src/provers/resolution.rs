//! Given-clause saturation: ordered resolution with negative selection,
//! superposition for equality, factoring, demodulation and subsumption.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use super::clausify::{Clause, Literal, EQUALITY};
use crate::fol::Term;

type Sym = u32;

/// Marks predicate symbols when atoms are compared as terms.
const ATOM: Sym = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum T {
    V(u32),
    F(Sym, Box<[T]>),
}

impl T {
    fn top(&self) -> Option<Sym> {
        match self {
            T::V(_) => None,
            T::F(f, _) => Some(*f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Lit {
    pos: bool,
    pred: Sym,
    args: Box<[T]>,
}

#[derive(Debug, Clone)]
struct Cl {
    lits: Vec<Lit>,
    weight: usize,
    nvars: u32,
    /// One bit per (sign, predicate) class, for subsumption prefiltering.
    mask: u64,
    /// Literals inferences may use: a selected negative one, or else the
    /// maximal ones.
    eligible: Vec<bool>,
    selected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_clauses: usize,
    pub timeout: Duration,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_clauses: 50_000, timeout: Duration::from_secs(10) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refutation {
    /// The empty clause was derived.
    Found,
    /// Saturated, or a limit was reached, or cancelled.
    NotFound,
}

#[derive(Default)]
struct Symbols {
    ids: HashMap<String, Sym>,
}

impl Symbols {
    fn id(&mut self, name: &str) -> Sym {
        let next = self.ids.len() as Sym;
        *self.ids.entry(name.to_string()).or_insert(next)
    }
}

fn intern_term(t: &Term, syms: &mut Symbols, vars: &mut Vec<String>) -> T {
    match t {
        Term::Var(v) => {
            let i = vars.iter().position(|x| x == v).unwrap_or_else(|| {
                vars.push(v.clone());
                vars.len() - 1
            });
            T::V(i as u32)
        }
        Term::Const(c) => T::F(syms.id(c), Box::new([])),
        Term::App(f, args) => {
            let f = syms.id(f);
            T::F(f, args.iter().map(|a| intern_term(a, syms, vars)).collect())
        }
    }
}

fn term_size(t: &T) -> usize {
    match t {
        T::V(_) => 1,
        T::F(_, args) => 1 + args.iter().map(term_size).sum::<usize>(),
    }
}

fn vars_of(t: &T, out: &mut Vec<u32>) {
    match t {
        T::V(v) => out.push(*v),
        T::F(_, args) => args.iter().for_each(|a| vars_of(a, out)),
    }
}

/// Heavier, and no variable occurs more often in `t` than in `s`. Stable
/// under substitution and contained in every Knuth-Bendix ordering with unit
/// weights.
fn greater(s: &T, t: &T) -> bool {
    if term_size(s) <= term_size(t) {
        return false;
    }
    let (mut vs, mut vt) = (Vec::new(), Vec::new());
    vars_of(s, &mut vs);
    vars_of(t, &mut vt);
    vs.sort_unstable();
    vt.sort_unstable();
    let mut i = 0;
    vt.iter().all(|v| {
        while i < vs.len() && vs[i] < *v {
            i += 1;
        }
        let found = i < vs.len() && vs[i] == *v;
        i += 1;
        found
    })
}

fn sides(l: &Lit, eq: Sym) -> Vec<T> {
    if l.pred == eq {
        l.args.to_vec()
    } else {
        vec![T::F(l.pred | ATOM, l.args.clone())]
    }
}

/// Some side of `a` exceeds every side of `b`.
fn lit_greater(a: &[T], b: &[T]) -> bool {
    a.iter().any(|x| b.iter().all(|y| greater(x, y)))
}

fn mentions(t: &T, syms: &HashSet<Sym>) -> bool {
    match t {
        T::V(_) => false,
        T::F(f, args) => syms.contains(f) || args.iter().any(|a| mentions(a, syms)),
    }
}

/// Selects a negative literal unless a positive literal free of Skolem
/// symbols dominates it; otherwise the maximal literals are eligible.
fn eligibility(lits: &[Lit], eq: Sym, skolems: &HashSet<Sym>) -> (Vec<bool>, bool) {
    let s: Vec<Vec<T>> = lits.iter().map(|l| sides(l, eq)).collect();
    let size = |i: usize| s[i].iter().map(term_size).sum::<usize>();
    let ground = |i: usize| {
        let mut v = Vec::new();
        lits[i].args.iter().for_each(|a| vars_of(a, &mut v));
        v.is_empty()
    };
    let selected = (0..lits.len())
        .filter(|&i| !lits[i].pos && (ground(i) || !(0..lits.len()).any(|o| lits[o].pos && !lits[o].args.iter().any(|a| mentions(a, skolems)) && lit_greater(&s[o], &s[i]))))
        .max_by_key(|&i| (ground(i), size(i), Reverse(i)));
    match selected {
        Some(k) => ((0..lits.len()).map(|i| i == k).collect(), true),
        None => ((0..lits.len()).map(|i| !(0..lits.len()).any(|o| lit_greater(&s[o], &s[i]))).collect(), false),
    }
}

fn at<'a>(t: &'a T, path: &[usize]) -> &'a T {
    path.iter().fold(t, |t, &i| match t {
        T::F(_, args) => &args[i],
        T::V(_) => unreachable!("paths lead through function terms"),
    })
}

fn replace(t: &T, path: &[usize], new: &T) -> T {
    match (path.split_first(), t) {
        (None, _) => new.clone(),
        (Some((&i, rest)), T::F(f, args)) => {
            let mut args = args.to_vec();
            args[i] = replace(&args[i], rest, new);
            T::F(*f, args.into())
        }
        (Some(_), T::V(_)) => unreachable!("paths lead through function terms"),
    }
}

fn positions(t: &T, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if let T::F(_, args) = t {
        out.push(path.clone());
        for (i, a) in args.iter().enumerate() {
            path.push(i);
            positions(a, path, out);
            path.pop();
        }
    }
}

/// Variable bindings with an undo trail.
struct Subst {
    binds: Vec<Option<T>>,
    trail: Vec<u32>,
}

impl Subst {
    fn new(n: usize) -> Self {
        Subst { binds: vec![None; n], trail: Vec::new() }
    }

    fn reset(&mut self, n: usize) {
        self.binds.clear();
        self.binds.resize(n, None);
        self.trail.clear();
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            self.binds[v as usize] = None;
        }
    }

    fn bind(&mut self, v: u32, t: T) {
        self.binds[v as usize] = Some(t);
        self.trail.push(v);
    }

    fn walk<'a>(&'a self, mut t: &'a T) -> &'a T {
        while let T::V(v) = t {
            match &self.binds[*v as usize] {
                Some(b) => t = b,
                None => break,
            }
        }
        t
    }

    fn occurs(&self, v: u32, t: &T) -> bool {
        match self.walk(t) {
            T::V(w) => *w == v,
            T::F(_, args) => args.iter().any(|a| self.occurs(v, a)),
        }
    }

    fn unify(&mut self, a: &T, b: &T) -> bool {
        let a = self.walk(a).clone();
        let b = self.walk(b).clone();
        match (&a, &b) {
            (T::V(x), T::V(y)) if x == y => true,
            (T::V(x), _) => {
                if self.occurs(*x, &b) {
                    return false;
                }
                self.bind(*x, b);
                true
            }
            (_, T::V(y)) => {
                if self.occurs(*y, &a) {
                    return false;
                }
                self.bind(*y, a);
                true
            }
            (T::F(f, xs), T::F(g, ys)) => f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| self.unify(x, y)),
        }
    }

    fn unify_args(&mut self, xs: &[T], ys: &[T]) -> bool {
        let mark = self.trail.len();
        let ok = xs.iter().zip(ys).all(|(x, y)| self.unify(x, y));
        if !ok {
            self.undo(mark);
        }
        ok
    }

    fn apply(&self, t: &T) -> T {
        match self.walk(t) {
            T::V(v) => T::V(*v),
            T::F(f, args) => T::F(*f, args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    fn apply_lit(&self, l: &Lit) -> Lit {
        Lit { pos: l.pos, pred: l.pred, args: l.args.iter().map(|a| self.apply(a)).collect() }
    }
}

fn shift(t: &T, by: u32) -> T {
    match t {
        T::V(v) => T::V(v + by),
        T::F(f, args) => T::F(*f, args.iter().map(|a| shift(a, by)).collect()),
    }
}

fn shift_lit(l: &Lit, by: u32) -> Lit {
    Lit { pos: l.pos, pred: l.pred, args: l.args.iter().map(|a| shift(a, by)).collect() }
}

fn rename(t: &T, map: &mut Vec<(u32, u32)>) -> T {
    match t {
        T::V(v) => match map.iter().find(|(from, _)| from == v) {
            Some((_, to)) => T::V(*to),
            None => {
                let to = map.len() as u32;
                map.push((*v, to));
                T::V(to)
            }
        },
        T::F(f, args) => T::F(*f, args.iter().map(|a| rename(a, map)).collect()),
    }
}

/// One-way matching of `pattern` onto `target`; only pattern variables bind.
fn match_term(pattern: &T, target: &T, binds: &mut Vec<Option<T>>, trail: &mut Vec<u32>) -> bool {
    match pattern {
        T::V(v) => match &binds[*v as usize] {
            Some(b) => b == target,
            None => {
                binds[*v as usize] = Some(target.clone());
                trail.push(*v);
                true
            }
        },
        T::F(f, xs) => match target {
            T::F(g, ys) => f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| match_term(x, y, binds, trail)),
            T::V(_) => false,
        },
    }
}

fn instantiate(t: &T, binds: &[Option<T>]) -> T {
    match t {
        T::V(v) => binds[*v as usize].clone().unwrap_or(T::V(*v)),
        T::F(f, args) => T::F(*f, args.iter().map(|a| instantiate(a, binds)).collect()),
    }
}

fn subsumes(c: &Cl, d: &Cl) -> bool {
    if c.lits.len() > d.lits.len() || c.mask & !d.mask != 0 {
        return false;
    }
    fn go(c: &[Lit], d: &[Lit], binds: &mut Vec<Option<T>>, trail: &mut Vec<u32>) -> bool {
        let Some((first, rest)) = c.split_first() else { return true };
        for l in d {
            if l.pos != first.pos || l.pred != first.pred {
                continue;
            }
            let mark = trail.len();
            if first.args.iter().zip(l.args.iter()).all(|(x, y)| match_term(x, y, binds, trail)) && go(rest, d, binds, trail) {
                return true;
            }
            while trail.len() > mark {
                binds[trail.pop().unwrap() as usize] = None;
            }
        }
        false
    }
    let mut binds = vec![None; c.nvars as usize];
    go(&c.lits, &d.lits, &mut binds, &mut Vec::new())
}

/// A rewritable position: literal, argument and path below it.
type Pos = (usize, usize, Vec<usize>);

struct Prover {
    eq: Sym,
    clauses: Vec<Cl>,
    alive: Vec<bool>,
    taken: Vec<bool>,
    passive: BinaryHeap<Reverse<(usize, usize)>>,
    fifo: VecDeque<usize>,
    picks: usize,
    active: Vec<usize>,
    /// Active clauses by eligible (sign, predicate), equality excluded.
    index: HashMap<(bool, Sym), Vec<usize>>,
    /// Active clauses by the top symbols of their rewritable subterms.
    subterms: HashMap<Sym, Vec<usize>>,
    /// Eligible positive equations of active clauses: (clause, literal, side),
    /// keyed by the top symbol of the side used as the left-hand side.
    equations: HashMap<Option<Sym>, Vec<(usize, usize, usize)>>,
    /// Active unit equations orientable left to right: (clause, side).
    rewrites: HashMap<Sym, Vec<(usize, usize)>>,
    /// Active unit clauses by (sign, predicate).
    units: HashMap<(bool, Sym), Vec<usize>>,
    seen: HashSet<Vec<Lit>>,
    subst: Subst,
    skolems: HashSet<Sym>,
}

enum Added {
    Empty,
    Kept(usize),
    Dropped,
}

/// Every seventh given clause is the oldest one.
const AGE_PICK: usize = 7;

impl Prover {
    fn new(eq: Sym) -> Self {
        Prover {
            eq,
            clauses: Vec::new(),
            alive: Vec::new(),
            taken: Vec::new(),
            passive: BinaryHeap::new(),
            fifo: VecDeque::new(),
            picks: 0,
            active: Vec::new(),
            index: HashMap::new(),
            subterms: HashMap::new(),
            equations: HashMap::new(),
            rewrites: HashMap::new(),
            units: HashMap::new(),
            seen: HashSet::new(),
            subst: Subst::new(0),
            skolems: HashSet::new(),
        }
    }

    fn demodulate(&self, t: &T, budget: &mut usize) -> T {
        let T::F(f, args) = t else { return t.clone() };
        let t = T::F(*f, args.iter().map(|a| self.demodulate(a, budget)).collect());
        if *budget == 0 {
            return t;
        }
        for &(id, side) in self.rewrites.get(f).into_iter().flatten() {
            if !self.alive[id] {
                continue;
            }
            let c = &self.clauses[id];
            let (l, r) = (&c.lits[0].args[side], &c.lits[0].args[1 - side]);
            let mut binds = vec![None; c.nvars as usize];
            if match_term(l, &t, &mut binds, &mut Vec::new()) {
                *budget -= 1;
                return self.demodulate(&instantiate(r, &binds), budget);
            }
        }
        t
    }

    /// Whether an active unit of sign `pos` is an instance-generalization of
    /// the atom `pred(args)`.
    fn unit_covers(&self, pos: bool, pred: Sym, args: &[T]) -> bool {
        let flipped: Option<Vec<T>> = (pred == self.eq).then(|| vec![args[1].clone(), args[0].clone()]);
        self.units.get(&(pos, pred)).into_iter().flatten().any(|&u| {
            if !self.alive[u] {
                return false;
            }
            let c = &self.clauses[u];
            [Some(args), flipped.as_deref()].into_iter().flatten().any(|args| {
                let mut binds = vec![None; c.nvars as usize];
                let mut trail = Vec::new();
                c.lits[0].args.iter().zip(args).all(|(x, y)| match_term(x, y, &mut binds, &mut trail))
            })
        })
    }

    /// Normalizes and stores a clause unless it is a tautology, a duplicate
    /// or implied by an active unit.
    fn add(&mut self, lits: Vec<Lit>) -> Added {
        let mut budget = 64;
        let mut out: Vec<Lit> = Vec::with_capacity(lits.len());
        for l in lits {
            let mut args: Vec<T> = l.args.iter().map(|a| self.demodulate(a, &mut budget)).collect();
            if l.pred == self.eq {
                if args[0] == args[1] {
                    if l.pos {
                        return Added::Dropped;
                    }
                    continue;
                }
                if args[1] < args[0] {
                    args.swap(0, 1);
                }
            }
            if self.unit_covers(l.pos, l.pred, &args) {
                return Added::Dropped;
            }
            if self.unit_covers(!l.pos, l.pred, &args) {
                continue;
            }
            let l = Lit { pos: l.pos, pred: l.pred, args: args.into() };
            if out.iter().any(|o| o.pos != l.pos && o.pred == l.pred && o.args == l.args) {
                return Added::Dropped;
            }
            if !out.contains(&l) {
                out.push(l);
            }
        }
        if out.is_empty() {
            return Added::Empty;
        }
        out.sort_by_key(|a| (a.pred, a.pos));
        let mut map = Vec::new();
        let lits: Vec<Lit> = out
            .iter()
            .map(|l| Lit { pos: l.pos, pred: l.pred, args: l.args.iter().map(|a| rename(a, &mut map)).collect() })
            .collect();
        if !self.seen.insert(lits.clone()) {
            return Added::Dropped;
        }
        let weight = lits.iter().map(|l| 1 + l.args.iter().map(term_size).sum::<usize>()).sum();
        let mask = lits.iter().fold(0u64, |m, l| m | 1u64 << ((l.pred as u64 * 2 + l.pos as u64) % 64));
        let (eligible, selected) = eligibility(&lits, self.eq, &self.skolems);
        self.clauses.push(Cl { lits, weight, nvars: map.len() as u32, mask, eligible, selected });
        self.alive.push(true);
        self.taken.push(false);
        Added::Kept(self.clauses.len() - 1)
    }

    fn enqueue(&mut self, id: usize) {
        self.passive.push(Reverse((self.clauses[id].weight, id)));
        self.fifo.push_back(id);
    }

    fn next_given(&mut self) -> Option<usize> {
        self.picks += 1;
        loop {
            let id = if self.picks.is_multiple_of(AGE_PICK) {
                self.fifo.pop_front().or_else(|| self.passive.pop().map(|Reverse((_, id))| id))?
            } else {
                self.passive.pop().map(|Reverse((_, id))| id).or_else(|| self.fifo.pop_front())?
            };
            if !self.taken[id] {
                self.taken[id] = true;
                return Some(id);
            }
        }
    }

    /// Sides of eligible positive equations that may rewrite: (literal, side).
    fn sides_from(&self, id: usize) -> Vec<(usize, usize)> {
        let c = &self.clauses[id];
        let mut out = Vec::new();
        if c.selected {
            return out;
        }
        for (i, l) in c.lits.iter().enumerate() {
            if l.pos && l.pred == self.eq && c.eligible[i] {
                for side in 0..2 {
                    if !greater(&l.args[1 - side], &l.args[side]) {
                        out.push((i, side));
                    }
                }
            }
        }
        out
    }

    /// Non-variable positions of eligible literals that may be rewritten.
    fn positions_into(&self, id: usize) -> Vec<Pos> {
        let c = &self.clauses[id];
        let mut out = Vec::new();
        for (i, l) in c.lits.iter().enumerate() {
            if !c.eligible[i] {
                continue;
            }
            for (a, arg) in l.args.iter().enumerate() {
                if l.pred == self.eq && greater(&l.args[1 - a], arg) {
                    continue;
                }
                let mut paths = Vec::new();
                positions(arg, &mut Vec::new(), &mut paths);
                out.extend(paths.into_iter().map(|p| (i, a, p)));
            }
        }
        out
    }

    fn activate(&mut self, id: usize) {
        self.active.push(id);
        let c = &self.clauses[id];
        let mut keys: Vec<(bool, Sym)> =
            c.lits.iter().enumerate().filter(|(i, l)| c.eligible[*i] && l.pred != self.eq).map(|(_, l)| (l.pos, l.pred)).collect();
        keys.sort();
        keys.dedup();
        for k in keys {
            self.index.entry(k).or_default().push(id);
        }
        let mut tops: Vec<Sym> = self.positions_into(id).iter().filter_map(|(i, a, p)| at(&c.lits[*i].args[*a], p).top()).collect();
        tops.sort();
        tops.dedup();
        for f in tops {
            self.subterms.entry(f).or_default().push(id);
        }
        if c.lits.len() == 1 {
            self.units.entry((c.lits[0].pos, c.lits[0].pred)).or_default().push(id);
        }
        for (i, side) in self.sides_from(id) {
            let l = &c.lits[i].args[side];
            self.equations.entry(l.top()).or_default().push((id, i, side));
            if c.lits.len() == 1 && greater(l, &c.lits[i].args[1 - side]) {
                self.rewrites.entry(l.top().expect("a heavier side is not a variable")).or_default().push((id, side));
            }
        }
    }

    /// Rewrites `into` at `pos` with side `side` of literal `fl` of `from`.
    fn superpose(&mut self, from: usize, fl: usize, side: usize, into: usize, pos: &Pos) -> Option<Vec<Lit>> {
        let (f, g) = (&self.clauses[from], &self.clauses[into]);
        let off = f.nvars;
        let (il, a, path) = pos;
        let target = shift(at(&g.lits[*il].args[*a], path), off);
        self.subst.reset((f.nvars + g.nvars) as usize);
        let eqn = &f.lits[fl];
        if !self.subst.unify(&eqn.args[side], &target) {
            return None;
        }
        let (l, r) = (self.subst.apply(&eqn.args[side]), self.subst.apply(&eqn.args[1 - side]));
        if greater(&r, &l) {
            return None;
        }
        let mut lits: Vec<Lit> = f.lits.iter().enumerate().filter(|(k, _)| *k != fl).map(|(_, l)| self.subst.apply_lit(l)).collect();
        for (k, l) in g.lits.iter().enumerate() {
            let mut l = self.subst.apply_lit(&shift_lit(l, off));
            if k == *il {
                let mut args = l.args.to_vec();
                args[*a] = replace(&args[*a], path, &r);
                l.args = args.into();
            }
            lits.push(l);
        }
        Some(lits)
    }

    fn inferences(&mut self, given: usize) -> Vec<Vec<Lit>> {
        let mut out = Vec::new();
        let g = self.clauses[given].clone();
        let eq = self.eq;
        for i in (0..g.lits.len()).filter(|&i| g.eligible[i]) {
            let a = &g.lits[i];
            // Equality resolution.
            if !a.pos && a.pred == eq {
                self.subst.reset(g.nvars as usize);
                if self.subst.unify(&a.args[0], &a.args[1]) {
                    out.push(g.lits.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, l)| self.subst.apply_lit(l)).collect());
                }
            }
            if !a.pos || g.selected {
                continue;
            }
            for j in (0..g.lits.len()).filter(|&j| j != i) {
                let b = &g.lits[j];
                if !b.pos || a.pred != b.pred {
                    continue;
                }
                if a.pred != eq {
                    // Factoring.
                    if j > i || !g.eligible[j] {
                        self.subst.reset(g.nvars as usize);
                        if self.subst.unify_args(&a.args, &b.args) {
                            out.push(g.lits.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, l)| self.subst.apply_lit(l)).collect());
                        }
                    }
                    continue;
                }
                // Equality factoring.
                for (sa, sb) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    self.subst.reset(g.nvars as usize);
                    if !self.subst.unify(&a.args[sa], &b.args[sb]) {
                        continue;
                    }
                    let mut lits: Vec<Lit> = g.lits.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, l)| self.subst.apply_lit(l)).collect();
                    lits.push(Lit { pos: false, pred: eq, args: [self.subst.apply(&a.args[1 - sa]), self.subst.apply(&b.args[1 - sb])].into() });
                    out.push(lits);
                }
            }
        }
        // Binary resolvents with every active clause, the given one included.
        for (i, gl) in g.lits.iter().enumerate().filter(|(i, l)| g.eligible[*i] && l.pred != eq) {
            let Some(partners) = self.index.get(&(!gl.pos, gl.pred)) else { continue };
            for &p in partners.clone().iter() {
                if !self.alive[p] {
                    continue;
                }
                let other = &self.clauses[p];
                let off = g.nvars;
                let shifted: Vec<Lit> = other.lits.iter().map(|l| shift_lit(l, off)).collect();
                let total = (g.nvars + other.nvars) as usize;
                let eligible = other.eligible.clone();
                for (j, ol) in shifted.iter().enumerate() {
                    if ol.pos == gl.pos || ol.pred != gl.pred || !eligible[j] {
                        continue;
                    }
                    self.subst.reset(total);
                    if !self.subst.unify_args(&gl.args, &ol.args) {
                        continue;
                    }
                    let mut lits: Vec<Lit> = Vec::with_capacity(g.lits.len() + shifted.len() - 2);
                    lits.extend(g.lits.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, l)| self.subst.apply_lit(l)));
                    lits.extend(shifted.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, l)| self.subst.apply_lit(l)));
                    out.push(lits);
                }
            }
        }
        // Superposition from the given clause into active ones.
        for (fl, side) in self.sides_from(given) {
            let top = g.lits[fl].args[side].top();
            let partners: Vec<usize> = match top {
                Some(f) => self.subterms.get(&f).cloned().unwrap_or_default(),
                None => self.active.clone(),
            };
            for p in partners {
                if !self.alive[p] {
                    continue;
                }
                for pos in self.positions_into(p) {
                    let t = at(&self.clauses[p].lits[pos.0].args[pos.1], &pos.2).top();
                    if top.is_some() && t != top {
                        continue;
                    }
                    out.extend(self.superpose(given, fl, side, p, &pos));
                }
            }
        }
        // Superposition from active equations into the given clause.
        for pos in self.positions_into(given) {
            let t = at(&g.lits[pos.0].args[pos.1], &pos.2).top();
            let mut from: Vec<(usize, usize, usize)> = self.equations.get(&t).cloned().unwrap_or_default();
            from.extend(self.equations.get(&None).cloned().unwrap_or_default());
            for (e, fl, side) in from {
                if self.alive[e] {
                    out.extend(self.superpose(e, fl, side, given, &pos));
                }
            }
        }
        out
    }

    fn run(&mut self, limits: &Limits, start: Instant, cancel: &AtomicBool) -> Refutation {
        while let Some(given) = self.next_given() {
            if cancel.load(Ordering::Relaxed) || start.elapsed() > limits.timeout || self.clauses.len() > limits.max_clauses {
                return Refutation::NotFound;
            }
            if !self.alive[given] {
                continue;
            }
            let g = &self.clauses[given];
            if self.active.iter().any(|&a| self.alive[a] && subsumes(&self.clauses[a], g)) {
                self.alive[given] = false;
                continue;
            }
            for &a in &self.active {
                if self.alive[a] && subsumes(g, &self.clauses[a]) {
                    self.alive[a] = false;
                }
            }
            self.active.retain(|&a| self.alive[a]);
            self.activate(given);
            for lits in self.inferences(given) {
                match self.add(lits) {
                    Added::Empty => return Refutation::Found,
                    Added::Kept(id) => self.enqueue(id),
                    Added::Dropped => {}
                }
            }
        }
        Refutation::NotFound
    }
}

/// Searches for a refutation of `clauses`. Clauses flagged as support start
/// in the passive set; the others are only inferred against. If the support
/// set saturates, the search restarts with every clause passive. Equality is
/// built in; equality axioms among the input are harmless but unneeded.
fn is_skolem(name: &str) -> bool {
    name.strip_prefix("sk").is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
}

pub fn refute(clauses: &[(Clause, bool)], limits: &Limits, cancel: &AtomicBool) -> Refutation {
    let start = Instant::now();
    let mut syms = Symbols::default();
    let eq = syms.id(EQUALITY);
    let interned: Vec<(Vec<Lit>, bool)> = clauses
        .iter()
        .map(|(c, support)| {
            let mut vars = Vec::new();
            let lits = c
                .literals
                .iter()
                .map(|l: &Literal| Lit {
                    pos: l.positive,
                    pred: syms.id(&l.predicate),
                    args: l.args.iter().map(|a| intern_term(a, &mut syms, &mut vars)).collect(),
                })
                .collect();
            (lits, *support)
        })
        .collect();
    let has_support = interned.iter().any(|(_, s)| *s);
    let everything_passive = interned.iter().all(|(_, s)| *s);
    for use_support in [true, false] {
        if use_support && !has_support || !use_support && everything_passive {
            continue;
        }
        let mut p = Prover::new(eq);
        p.skolems = syms.ids.iter().filter(|(k, _)| is_skolem(k)).map(|(_, v)| *v).collect();
        let mut background = Vec::new();
        for (lits, support) in &interned {
            match p.add(lits.clone()) {
                Added::Empty => return Refutation::Found,
                Added::Kept(id) if *support || !use_support => p.enqueue(id),
                Added::Kept(id) => background.push(id),
                Added::Dropped => {}
            }
        }
        for id in background {
            p.taken[id] = true;
            p.activate(id);
        }
        let r = p.run(limits, start, cancel);
        if r == Refutation::Found {
            return Refutation::Found;
        }
        if cancel.load(Ordering::Relaxed) || start.elapsed() > limits.timeout {
            break;
        }
    }
    Refutation::NotFound
}
