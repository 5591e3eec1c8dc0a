//! TPTP FOF problems and SZS result parsing.

mod fof;

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;

use crate::fol::{Formula, Ident, Term};
use crate::kernel::Obligation;

pub use fof::{parse_fof, FofError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Axiom,
    Conjecture,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Axiom => "axiom",
            Role::Conjecture => "conjecture",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub name: String,
    pub role: Role,
    pub formula: Formula,
}

/// An ordered list of FOF records with exactly one conjecture, last.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TptpProblem {
    pub records: Vec<Record>,
}

impl TptpProblem {
    pub fn conjecture(&self) -> Option<&Formula> {
        self.records.iter().find(|r| r.role == Role::Conjecture).map(|r| &r.formula)
    }

    pub fn axioms(&self) -> impl Iterator<Item = &Formula> {
        self.records.iter().filter(|r| r.role == Role::Axiom).map(|r| &r.formula)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let _ = writeln!(out, "fof({}, {}, {}).", r.name, r.role.as_str(), fof_formula(&r.formula));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("identifier `{0}` has no TPTP form")]
pub struct MangleError(pub String);

/// Maps source identifiers to TPTP tokens, injectively.
#[derive(Debug, Default)]
struct Mangler {
    vars: HashMap<Ident, String>,
    functors: HashMap<Ident, String>,
    used: HashSet<String>,
}

impl Mangler {
    fn token(&mut self, name: &str, var: bool) -> Result<String, MangleError> {
        let table = if var { &self.vars } else { &self.functors };
        if let Some(t) = table.get(name) {
            return Ok(t.clone());
        }
        let stem = name.trim_end_matches('\'');
        let primes = name.len() - stem.len();
        let mut chars = stem.chars();
        let Some(first) = chars.next() else {
            return Err(MangleError(name.to_string()));
        };
        let rest: String = chars.map(|c| if c == '\'' { '_' } else { c }).collect();
        let mut base = if !first.is_ascii_alphabetic() {
            format!("{}{first}{rest}", if var { 'V' } else { 's' })
        } else if var {
            format!("{}{rest}", first.to_ascii_uppercase())
        } else {
            format!("{}{rest}", first.to_ascii_lowercase())
        };
        if primes > 0 {
            base.push_str(&primes.to_string());
        }
        let mut candidate = base.clone();
        let mut n = 1;
        while self.used.contains(&candidate) {
            candidate = format!("{base}_{n}");
            n += 1;
        }
        self.used.insert(candidate.clone());
        let table = if var { &mut self.vars } else { &mut self.functors };
        table.insert(name.to_string(), candidate.clone());
        Ok(candidate)
    }

    fn term(&mut self, t: &Term) -> Result<Term, MangleError> {
        Ok(match t {
            Term::Var(v) => Term::Var(self.token(v, true)?),
            Term::Const(c) => Term::Const(self.token(c, false)?),
            Term::App(f, args) => Term::App(self.token(f, false)?, args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?),
        })
    }

    fn formula(&mut self, f: &Formula) -> Result<Formula, MangleError> {
        let bin = |m: &mut Self, a: &Formula, b: &Formula| -> Result<(Box<Formula>, Box<Formula>), MangleError> {
            Ok((Box::new(m.formula(a)?), Box::new(m.formula(b)?)))
        };
        Ok(match f {
            Formula::Pred(p, args) => Formula::Pred(self.token(p, false)?, args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?),
            Formula::Eq(l, r) => Formula::Eq(self.term(l)?, self.term(r)?),
            Formula::Not(g) => Formula::Not(Box::new(self.formula(g)?)),
            Formula::And(a, b) => {
                let (a, b) = bin(self, a, b)?;
                Formula::And(a, b)
            }
            Formula::Or(a, b) => {
                let (a, b) = bin(self, a, b)?;
                Formula::Or(a, b)
            }
            Formula::Implies(a, b) => {
                let (a, b) = bin(self, a, b)?;
                Formula::Implies(a, b)
            }
            Formula::Iff(a, b) => {
                let (a, b) = bin(self, a, b)?;
                Formula::Iff(a, b)
            }
            Formula::Forall(v, b) => Formula::Forall(self.token(v, true)?, Box::new(self.formula(b)?)),
            Formula::Exists(v, b) => Formula::Exists(self.token(v, true)?, Box::new(self.formula(b)?)),
            Formula::Top => Formula::Top,
            Formula::Bottom => Formula::Bottom,
        })
    }
}

fn record_name(id: &str, used: &mut HashSet<String>) -> String {
    let mut base: String = id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    if !base.starts_with(|c: char| c.is_ascii_lowercase()) {
        base.insert(0, 'a');
    }
    let mut candidate = base.clone();
    let mut n = 1;
    while !used.insert(candidate.clone()) {
        candidate = format!("{base}_{n}");
        n += 1;
    }
    candidate
}

/// The problem for an obligation with identifiers mapped to TPTP tokens:
/// one axiom per context entry in order, then the conjecture `goal`.
pub fn mangle(ob: &Obligation) -> Result<TptpProblem, MangleError> {
    let mut m = Mangler::default();
    let mut names: HashSet<String> = HashSet::from(["goal".to_string()]);
    let mut records = Vec::with_capacity(ob.axioms.len() + 1);
    for a in &ob.axioms {
        records.push(Record { name: record_name(&a.id, &mut names), role: Role::Axiom, formula: m.formula(&a.formula)? });
    }
    records.push(Record { name: "goal".into(), role: Role::Conjecture, formula: m.formula(&ob.conjecture)? });
    Ok(TptpProblem { records })
}

/// Renders an obligation as a FOF problem.
pub fn emit(ob: &Obligation) -> Result<String, MangleError> {
    Ok(format!("% {}\n{}", ob.id, mangle(ob)?.render()))
}

fn fof_term(t: &Term, out: &mut String) {
    match t {
        Term::Var(v) | Term::Const(v) => out.push_str(v),
        Term::App(f, args) => {
            out.push_str(f);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                fof_term(a, out);
            }
            out.push(')');
        }
    }
}

/// Fully parenthesized FOF syntax.
pub fn fof_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_fof(f, &mut out);
    out
}

fn write_fof(f: &Formula, out: &mut String) {
    let binary = |a: &Formula, op: &str, b: &Formula, out: &mut String| {
        out.push('(');
        write_fof(a, out);
        out.push(' ');
        out.push_str(op);
        out.push(' ');
        write_fof(b, out);
        out.push(')');
    };
    match f {
        Formula::Pred(p, args) => fof_term(&Term::app(p.clone(), args.clone()), out),
        Formula::Eq(l, r) => {
            out.push('(');
            fof_term(l, out);
            out.push_str(" = ");
            fof_term(r, out);
            out.push(')');
        }
        Formula::Not(g) => match &**g {
            Formula::Eq(l, r) => {
                out.push('(');
                fof_term(l, out);
                out.push_str(" != ");
                fof_term(r, out);
                out.push(')');
            }
            _ => {
                out.push('~');
                write_fof(g, out);
            }
        },
        Formula::And(a, b) => binary(a, "&", b, out),
        Formula::Or(a, b) => binary(a, "|", b, out),
        Formula::Implies(a, b) => binary(a, "=>", b, out),
        Formula::Iff(a, b) => binary(a, "<=>", b, out),
        Formula::Forall(..) | Formula::Exists(..) => {
            let universal = matches!(f, Formula::Forall(..));
            let mut vars = Vec::new();
            let mut body = f;
            loop {
                match body {
                    Formula::Forall(v, b) if universal => {
                        vars.push(v.as_str());
                        body = b;
                    }
                    Formula::Exists(v, b) if !universal => {
                        vars.push(v.as_str());
                        body = b;
                    }
                    _ => break,
                }
            }
            let _ = write!(out, "({} [{}] : ", if universal { '!' } else { '?' }, vars.join(", "));
            write_fof(body, out);
            out.push(')');
        }
        Formula::Top => out.push_str("$true"),
        Formula::Bottom => out.push_str("$false"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SzsStatus {
    Theorem,
    CounterSatisfiable,
    Satisfiable,
    Unknown,
    Timeout,
    Error,
}

impl SzsStatus {
    pub fn is_decisive(self) -> bool {
        matches!(self, SzsStatus::Theorem | SzsStatus::CounterSatisfiable | SzsStatus::Satisfiable)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProverVerdict {
    pub status: SzsStatus,
    /// Only for `CounterSatisfiable` and `Satisfiable`.
    pub model: Option<String>,
    pub elapsed: Duration,
    /// Raw output kept when no status line was found or the prover failed.
    pub output: Option<String>,
}

impl ProverVerdict {
    pub fn new(status: SzsStatus) -> Self {
        ProverVerdict { status, model: None, elapsed: Duration::ZERO, output: None }
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model = Some(model.into());
        self
    }
}

/// Reads the first `SZS status` line and an optional `SZS output` block.
pub fn parse_szs(stdout: &str) -> ProverVerdict {
    let status = stdout.lines().find_map(|line| {
        let rest = &line[line.find("SZS status")? + "SZS status".len()..];
        Some(match rest.split_whitespace().next().unwrap_or("") {
            "Theorem" => SzsStatus::Theorem,
            "CounterSatisfiable" => SzsStatus::CounterSatisfiable,
            "Satisfiable" => SzsStatus::Satisfiable,
            "Timeout" | "ResourceOut" => SzsStatus::Timeout,
            _ => SzsStatus::Unknown,
        })
    });
    let Some(status) = status else {
        let mut v = ProverVerdict::new(SzsStatus::Unknown);
        v.output = Some(stdout.to_string());
        return v;
    };
    let mut v = ProverVerdict::new(status);
    if matches!(status, SzsStatus::CounterSatisfiable | SzsStatus::Satisfiable) {
        let mut lines = stdout.lines();
        if lines.by_ref().any(|l| l.contains("SZS output start")) {
            let body: Vec<&str> = lines.take_while(|l| !l.contains("SZS output end")).collect();
            v.model = Some(body.join("\n"));
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::parse_formula;
    use crate::kernel::ContextEntry;

    fn ob(axioms: &[(&str, &str)], conjecture: &str) -> Obligation {
        Obligation {
            id: "t".into(),
            axioms: axioms
                .iter()
                .map(|(id, f)| ContextEntry { id: id.to_string(), formula: parse_formula(f).unwrap(), local: false })
                .collect(),
            conjecture: parse_formula(conjecture).unwrap(),
            span: Default::default(),
            restricted: false,
        }
    }

    #[test]
    fn frozen_primed_constants() {
        let text = emit(&ob(&[], "cx = cx'")).unwrap();
        assert_eq!(text, "% t\nfof(goal, conjecture, (cx = cx1)).\n");
    }

    #[test]
    fn single_conjecture_line() {
        let text = emit(&ob(&[], "P → P")).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("fof")).count(), 1);
        assert!(text.contains("fof(goal, conjecture, (p => p))."));
    }

    #[test]
    fn variables_and_connectives() {
        let text = emit(&ob(&[("subset", "∀A, B. subset(A, B) ↔ (∀x. in(x, A) → in(x, B))")], "∃y'. ¬y' = cA ∧ ⊥")).unwrap();
        assert!(text.contains("fof(subset, axiom, (! [A, B] : (subset(A,B) <=> (! [X] : (in(X,A) => in(X,B))))))."), "{text}");
        assert!(text.contains("fof(goal, conjecture, (? [Y1] : ((Y1 != cA) & $false)))."), "{text}");
    }

    #[test]
    fn mangling_is_collision_free() {
        let p = mangle(&ob(&[("a", "∀x', x1. p(x', x1)"), ("b", "P ∧ p(c, c)")], "⊤")).unwrap();
        assert_eq!(p.records[0].formula, parse_formula("∀X1, X1_1. p(X1, X1_1)").unwrap());
        assert_eq!(p.records[1].formula, parse_formula("p_1 ∧ p(c, c)").unwrap());
    }

    #[test]
    fn record_names_are_sanitized_and_unique() {
        let p = mangle(&ob(&[("goal", "P"), ("Def", "P"), ("x.y", "P"), ("x_y", "P")], "P")).unwrap();
        let names: Vec<&str> = p.records.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["goal_1", "aDef", "x_y", "x_y_1", "goal"]);
    }

    #[test]
    fn szs_statuses() {
        assert_eq!(parse_szs("% SZS status Theorem for f").status, SzsStatus::Theorem);
        assert_eq!(parse_szs("# SZS status ResourceOut").status, SzsStatus::Timeout);
        assert_eq!(parse_szs("SZS status Timeout").status, SzsStatus::Timeout);
        assert_eq!(parse_szs("SZS status GaveUp").status, SzsStatus::Unknown);
        let garbage = parse_szs("segmentation fault");
        assert_eq!(garbage.status, SzsStatus::Unknown);
        assert_eq!(garbage.output.as_deref(), Some("segmentation fault"));
    }

    #[test]
    fn szs_model_block() {
        let out = "% SZS status CounterSatisfiable for p\n% SZS output start FiniteModel for p\nfof(m, fi_domain, ! [X] : X = 1).\n% SZS output end FiniteModel for p\n";
        let v = parse_szs(out);
        assert_eq!(v.status, SzsStatus::CounterSatisfiable);
        assert_eq!(v.model.as_deref(), Some("fof(m, fi_domain, ! [X] : X = 1)."));
        assert_eq!(parse_szs("SZS status Theorem\nSZS output start Proof\nx\nSZS output end").model, None);
    }
}
