//! The end-to-end pipeline and its per-line report.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::Serialize;

use crate::fol::Formula;
use crate::kernel::{collect_obligations, elaborate_document, Obligation, Statement};
use crate::language::{
    apply_let_bindings, check_signature, desugar, parse, resolve_includes, Document, ItemKind, LanguageError, LibrarySource, SearchPath,
    SourceSpan, Step, StepKind,
};
use crate::provers::{default_provers, portfolio, ObligationResult, Problem, ProverConfig};
use crate::tptp::{ProverVerdict, SzsStatus};

/// Origin name of the text being verified.
pub const INPUT: &str = "input";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Parsed,
    Assumed,
    Proved,
    Unknown,
    Refuted,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Green,
    Orange,
    Red,
}

impl Status {
    pub fn color(self) -> Color {
        match self {
            Status::Parsed | Status::Assumed | Status::Proved => Color::Green,
            Status::Unknown | Status::Refuted | Status::Error => Color::Red,
        }
    }

    pub fn is_failure(self) -> bool {
        self.color() == Color::Red
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StatementReport {
    pub id: String,
    pub span: SourceSpan,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prover: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tptp: Option<String>,
    pub ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl StatementReport {
    fn new(id: impl Into<String>, span: SourceSpan, status: Status) -> Self {
        StatementReport { id: id.into(), span, status, prover: None, model: None, tptp: None, ms: 0, message: None }
    }

    /// Obligation entries carry their problem text.
    pub fn is_obligation(&self) -> bool {
        self.tptp.is_some()
    }

    /// Like [`Status::color`]; in verbose mode proved obligations are orange.
    pub fn color(&self, verbose: bool) -> Color {
        if verbose && self.status == Status::Proved && self.is_obligation() {
            Color::Orange
        } else {
            self.status.color()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub verified: bool,
    pub statements: Vec<StatementReport>,
    /// Obligations times the longest prover limit.
    pub wall_cap_ms: u64,
}

impl Report {
    fn finish(mut statements: Vec<StatementReport>, wall_cap: Duration) -> Report {
        statements.sort_by_key(|s| (s.span.start_byte, std::cmp::Reverse(s.span.end_byte)));
        let verified = statements.iter().all(|s| !s.status.is_failure());
        Report { verified, statements, wall_cap_ms: wall_cap.as_millis() as u64 }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The entry whose span covers `line`, if any.
    pub fn at_line(&self, line: usize) -> Option<&StatementReport> {
        self.statements.iter().find(|s| s.span.contains_line(line))
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub search: SearchPath,
    pub provers: Vec<ProverConfig>,
    /// Overrides every prover's time limit, in seconds.
    pub timeout: Option<f64>,
    /// Directory receiving one `<id>.p` file per obligation.
    pub emit_dir: Option<PathBuf>,
    /// Obligations verified at once.
    pub jobs: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            search: SearchPath::new(vec![PathBuf::from("lib")]),
            provers: default_provers(),
            timeout: None,
            emit_dir: None,
            jobs: thread::available_parallelism().map_or(2, |n| n.get()).div_ceil(2),
        }
    }
}

impl Options {
    pub fn effective_provers(&self) -> Vec<ProverConfig> {
        let mut provers = self.provers.clone();
        if let Some(t) = self.timeout {
            provers.iter_mut().for_each(|p| p.timeout = t);
        }
        provers
    }
}

/// Parses, elaborates and verifies `text`; never fails, errors become
/// report entries.
pub fn verify_text(text: &str, options: &Options) -> Report {
    let provers = options.effective_provers();
    verify_with(text, &options.search, options, move |problem| portfolio(Arc::new(problem.clone()), &provers))
}

/// [`verify_text`] with a caller-supplied way of discharging obligations.
pub fn verify_with<F>(text: &str, search: &dyn LibrarySource, options: &Options, discharge: F) -> Report
where
    F: Fn(&Problem) -> ObligationResult + Sync,
{
    let longest = options.effective_provers().iter().map(ProverConfig::time_limit).max().unwrap_or_default();
    let doc = match front_end(text, search) {
        Ok(d) => d,
        Err(e) => return Report::finish(vec![language_error(&e)], Duration::ZERO),
    };
    let elaborated = elaborate_document(&doc);
    let mut entries = Vec::new();
    let mut jobs: Vec<(usize, Obligation)> = Vec::new();
    let mut lemmas: Vec<(usize, usize, &Statement)> = Vec::new();
    for (index, item) in doc.items.iter().enumerate() {
        if item.origin != INPUT {
            continue;
        }
        let stmt = elaborated.items.iter().position(|i| *i == index).map(|k| &elaborated.statements[k]);
        let status = match &item.kind {
            ItemKind::Definition { .. } | ItemKind::Axiom { .. } => Status::Assumed,
            ItemKind::Lemma { .. } => {
                lemmas.push((entries.len(), index, stmt.expect("lemmas elaborate to statements")));
                Status::Proved
            }
            _ => Status::Parsed,
        };
        let id = stmt.map_or_else(|| format!("line{}", item.span.start_line), |s| s.id.clone());
        entries.push(StatementReport::new(id, item.span, status));
        if let ItemKind::Lemma { proof: Some(p), .. } = &item.kind {
            step_entries(&p.steps, &mut entries);
            entries.push(StatementReport::new("qed", p.qed, Status::Parsed));
        }
    }
    let mut failed: HashMap<usize, (Status, String, SourceSpan)> = HashMap::new();
    for &(entry, index, lemma) in &lemmas {
        if let Some((_, e)) = elaborated.errors.iter().find(|(i, _)| *i == index) {
            failed.insert(entry, (Status::Error, e.message.clone(), e.span));
            continue;
        }
        match collect_obligations(&elaborated.statements, |s| s.id == lemma.id) {
            Ok(obs) => jobs.extend(obs.into_iter().map(|o| (entry, o))),
            Err(e) => {
                failed.insert(entry, (Status::Error, e.to_string(), e.span));
            }
        }
    }
    let results = discharge_all(&jobs, options, &discharge);
    for (entry, (status, message, span)) in failed {
        entries[entry].status = status;
        entries[entry].message = Some(message.clone());
        if span != entries[entry].span {
            if let Some(e) = entries.iter_mut().find(|e| e.span == span) {
                e.status = status;
                e.message = Some(message);
            }
        }
    }
    for ((lemma_entry, ob), (tptp, result)) in jobs.iter().zip(results) {
        let report = obligation_entry(ob, &tptp, &result);
        let target = entries.iter().position(|e| e.span == ob.span).unwrap_or(*lemma_entry);
        merge(&mut entries[target], report.clone());
        if target != *lemma_entry {
            let lemma = &mut entries[*lemma_entry];
            lemma.status = lemma.status.max(report.status);
            lemma.ms += report.ms;
        }
    }
    Report::finish(entries, longest * jobs.len() as u32)
}

/// The statement trees and obligations of a text, without discharging.
#[derive(Debug, Clone)]
pub struct Elaboration {
    pub document: Document<Formula>,
    pub statements: Vec<Statement>,
    /// Obligations of the text's own lemmas, in source order.
    pub obligations: Vec<Obligation>,
    /// Messages for lemmas that failed to elaborate or name unknown hints.
    pub errors: Vec<String>,
}

pub fn elaborate_text(text: &str, search: &dyn LibrarySource) -> Result<Elaboration, LanguageError> {
    let document = front_end(text, search)?;
    let elaborated = elaborate_document(&document);
    let mut errors: Vec<String> = elaborated
        .errors
        .iter()
        .filter(|(i, _)| document.items[*i].origin == INPUT)
        .map(|(_, e)| e.message.clone())
        .collect();
    let own: Vec<&str> = elaborated
        .items
        .iter()
        .zip(&elaborated.statements)
        .filter(|(i, _)| document.items[**i].origin == INPUT)
        .map(|(_, s)| s.id.as_str())
        .collect();
    let obligations = match collect_obligations(&elaborated.statements, |s| own.contains(&s.id.as_str())) {
        Ok(obs) => obs,
        Err(e) => {
            errors.push(e.to_string());
            Vec::new()
        }
    };
    Ok(Elaboration { document, statements: elaborated.statements, obligations, errors })
}

fn front_end(text: &str, search: &dyn LibrarySource) -> Result<Document<Formula>, LanguageError> {
    let doc = resolve_includes(parse(text, INPUT)?, search)?;
    let doc = apply_let_bindings(desugar(doc)?.0)?;
    check_signature(&doc)?;
    Ok(doc)
}

fn language_error(e: &LanguageError) -> StatementReport {
    let in_input = e.file.as_deref().is_none_or(|f| f == INPUT);
    let span = e.span.filter(|_| in_input).unwrap_or(SourceSpan { start_line: 1, start_col: 1, end_line: 1, end_col: 1, ..Default::default() });
    let mut message = e.message.clone();
    if !in_input {
        message = format!("in library `{}`: {message}", e.file.as_deref().unwrap_or("?"));
    }
    if !e.expected.is_empty() {
        message = format!("{message} (expected {})", e.expected.join(", "));
    }
    let mut r = StatementReport::new("error", span, Status::Error);
    r.message = Some(message);
    r
}

fn step_entries(steps: &[Step<Formula>], out: &mut Vec<StatementReport>) {
    for s in steps {
        let id = s.kind.keyword().to_lowercase();
        match &s.kind {
            StepKind::Assume(_) => out.push(StatementReport::new(id, s.span, Status::Assumed)),
            StepKind::Then { .. } | StepKind::Hence { .. } => out.push(StatementReport::new(id, s.span, Status::Parsed)),
            StepKind::Case { body, .. } => {
                out.push(StatementReport::new(id, s.span, Status::Assumed));
                step_entries(&body.steps, out);
                out.push(StatementReport::new("qed", body.qed, Status::Parsed));
            }
            StepKind::SubProof { body, .. } => {
                out.push(StatementReport::new(id, s.span, Status::Parsed));
                step_entries(&body.steps, out);
                out.push(StatementReport::new("qed", body.qed, Status::Parsed));
            }
        }
    }
}

fn discharge_all<F>(jobs: &[(usize, Obligation)], options: &Options, discharge: &F) -> Vec<(Option<String>, ObligationResult)>
where
    F: Fn(&Problem) -> ObligationResult + Sync,
{
    let next = Mutex::new(0usize);
    let results: Mutex<Vec<Option<(Option<String>, ObligationResult)>>> = Mutex::new(vec![None; jobs.len()]);
    let workers = options.jobs.clamp(1, jobs.len().max(1));
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = {
                    let mut n = next.lock().unwrap();
                    let i = *n;
                    *n += 1;
                    i
                };
                let Some((_, ob)) = jobs.get(i) else { break };
                let outcome = match Problem::from_obligation(ob) {
                    Ok(problem) => {
                        if let Some(dir) = &options.emit_dir {
                            let _ = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join(format!("{}.p", ob.id)), &problem.tptp));
                        }
                        (Some(problem.tptp.clone()), discharge(&problem))
                    }
                    Err(e) => {
                        let mut v = ProverVerdict::new(SzsStatus::Error);
                        v.output = Some(e.to_string());
                        (None, ObligationResult { verdict: v, prover: None, verdicts: Vec::new() })
                    }
                };
                results.lock().unwrap()[i] = Some(outcome);
            });
        }
    });
    results.into_inner().unwrap().into_iter().map(|r| r.expect("every obligation is discharged")).collect()
}

fn obligation_entry(ob: &Obligation, tptp: &Option<String>, result: &ObligationResult) -> StatementReport {
    let status = match result.verdict.status {
        SzsStatus::Theorem => Status::Proved,
        SzsStatus::CounterSatisfiable | SzsStatus::Satisfiable => Status::Refuted,
        SzsStatus::Unknown | SzsStatus::Timeout => Status::Unknown,
        SzsStatus::Error => Status::Error,
    };
    let mut r = StatementReport::new(ob.id.clone(), ob.span, status);
    r.prover = result.prover.clone();
    r.model = result.verdict.model.clone();
    r.tptp = tptp.clone();
    r.ms = result.verdict.elapsed.as_millis() as u64;
    if status == Status::Error {
        r.message = result.verdict.output.clone();
    }
    r
}

/// Folds an obligation into the entry for its line; the worst status wins.
fn merge(entry: &mut StatementReport, ob: StatementReport) {
    let first = !entry.is_obligation();
    let keep_existing = !first && entry.status >= ob.status;
    entry.ms += ob.ms;
    if first {
        entry.id = ob.id;
        entry.status = if entry.status == Status::Assumed || entry.status == Status::Parsed { ob.status } else { entry.status.max(ob.status) };
        entry.prover = ob.prover;
        entry.model = ob.model;
        entry.tptp = ob.tptp;
        entry.message = ob.message;
        return;
    }
    let tptp = format!("{}\n{}", entry.tptp.take().unwrap_or_default(), ob.tptp.clone().unwrap_or_default());
    if !keep_existing {
        entry.id = ob.id;
        entry.status = ob.status;
        entry.prover = ob.prover;
        entry.model = ob.model;
        entry.message = ob.message;
    }
    entry.tptp = Some(tptp);
}
