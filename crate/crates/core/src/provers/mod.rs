//! Discharging obligations with a portfolio of provers run in parallel.
//!
//! Each prover receives the same [`Problem`]. Internal provers work on the
//! formulas directly; external ones get the rendered TPTP text. The first
//! decisive verdict cancels the rest, and [`combine`] turns the collected
//! verdicts into one result independent of completion order.

pub mod clausify;
mod external;
mod model;
mod resolution;

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use clausify::{clausify, equality_axioms, Clause, Clausifier, Literal};
pub use external::{run_external, ProcessSlots, GRACE};
pub use model::{find_model, FiniteModel};
pub use resolution::{refute, Limits, Refutation};

use crate::fol::Formula;
use crate::kernel::Obligation;
use crate::tptp::{mangle, MangleError, ProverVerdict, SzsStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProverKind {
    External,
    Resolution,
    ModelFinder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProverConfig {
    pub name: String,
    pub kind: ProverKind,
    /// For external provers: argv template with `{file}` and `{timeout}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// Seconds.
    #[serde(default = "default_timeout")]
    pub timeout: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_clauses: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_domain: Option<usize>,
}

fn default_timeout() -> f64 {
    5.0
}

pub const DEFAULT_MAX_DOMAIN: usize = 4;

impl ProverConfig {
    pub fn resolution() -> Self {
        ProverConfig { name: "resolution".into(), kind: ProverKind::Resolution, command: None, timeout: 10.0, max_clauses: None, max_domain: None }
    }

    pub fn model_finder() -> Self {
        ProverConfig { name: "models".into(), kind: ProverKind::ModelFinder, command: None, timeout: 10.0, max_clauses: None, max_domain: None }
    }

    pub fn external(name: &str, command: &str, timeout: f64) -> Self {
        ProverConfig {
            name: name.into(),
            kind: ProverKind::External,
            command: Some(command.into()),
            timeout,
            max_clauses: None,
            max_domain: None,
        }
    }

    pub fn time_limit(&self) -> Duration {
        Duration::from_secs_f64(self.timeout.max(0.0))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError(format!("prover `{}`: {m}", self.name)));
        if self.name.is_empty() {
            return Err(ConfigError("prover without a name".into()));
        }
        if !self.timeout.is_finite() || self.timeout <= 0.0 {
            return fail("timeout must be positive");
        }
        match (&self.kind, &self.command) {
            (ProverKind::External, None) => fail("external provers need a command"),
            (ProverKind::External, Some(c)) if c.matches("{file}").count() != 1 => fail("command must contain `{file}` exactly once"),
            (ProverKind::External, Some(c)) if shlex::split(c).is_none_or(|w| w.is_empty()) => fail("command cannot be split into words"),
            (ProverKind::External, _) => Ok(()),
            (_, Some(_)) => fail("only external provers take a command"),
            _ => Ok(()),
        }
    }
}

/// The internal resolution prover and model finder.
pub fn default_provers() -> Vec<ProverConfig> {
    vec![ProverConfig::resolution(), ProverConfig::model_finder()]
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    prover: Vec<ProverConfig>,
}

/// Reads a TOML file of `[[prover]]` tables.
pub fn parse_config(text: &str) -> Result<Vec<ProverConfig>, ConfigError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
    for (i, p) in file.prover.iter().enumerate() {
        p.validate()?;
        if file.prover[..i].iter().any(|q| q.name == p.name) {
            return Err(ConfigError(format!("prover `{}` is configured twice", p.name)));
        }
    }
    Ok(file.prover)
}

/// An obligation as handed to provers: formulas use TPTP identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub axioms: Vec<Formula>,
    /// Assumptions local to the proof; these seed the internal prover's search.
    pub hypotheses: Vec<Formula>,
    pub conjecture: Formula,
    pub tptp: String,
}

impl Problem {
    pub fn from_obligation(ob: &Obligation) -> Result<Problem, MangleError> {
        let problem = mangle(ob)?;
        let mut axioms = Vec::new();
        let mut hypotheses = Vec::new();
        for (entry, record) in ob.axioms.iter().zip(&problem.records) {
            if entry.local {
                hypotheses.push(record.formula.clone());
            } else {
                axioms.push(record.formula.clone());
            }
        }
        let conjecture = problem.conjecture().cloned().unwrap_or(Formula::Top);
        Ok(Problem { axioms, hypotheses, conjecture, tptp: format!("% {}\n{}", ob.id, problem.render()) })
    }

    pub fn new(axioms: Vec<Formula>, conjecture: Formula) -> Problem {
        let ob = Obligation {
            id: "problem".into(),
            axioms: axioms
                .iter()
                .enumerate()
                .map(|(i, f)| crate::kernel::ContextEntry { id: format!("a{i}"), formula: f.clone(), local: false })
                .collect(),
            conjecture: conjecture.clone(),
            span: Default::default(),
            restricted: false,
        };
        let tptp = crate::tptp::emit(&ob).unwrap_or_default();
        Problem { axioms, hypotheses: Vec::new(), conjecture, tptp }
    }

    fn premises(&self) -> Vec<Formula> {
        self.axioms.iter().chain(&self.hypotheses).cloned().collect()
    }
}

/// Runs the resolution prover: `Theorem` if the premises entail the
/// conjecture within the limits, `Unknown` otherwise.
pub fn resolution_prove(problem: &Problem, limits: &Limits, cancel: &AtomicBool) -> SzsStatus {
    let negated = Formula::not(problem.conjecture.clone());
    let all: Vec<&Formula> = problem.axioms.iter().chain(&problem.hypotheses).chain([&negated]).collect();
    let mut c = Clausifier::new(all.iter().copied());
    let mut clauses: Vec<(Clause, bool)> = Vec::new();
    for f in &problem.axioms {
        clauses.extend(c.clauses(f).into_iter().map(|cl| (cl, false)));
    }
    for f in problem.hypotheses.iter().chain([&negated]) {
        clauses.extend(c.clauses(f).into_iter().map(|cl| (cl, true)));
    }
    match refute(&clauses, limits, cancel) {
        Refutation::Found => SzsStatus::Theorem,
        Refutation::NotFound => SzsStatus::Unknown,
    }
}

/// Runs one configured prover to completion, cancellation or its limit.
pub fn run_prover(cfg: &ProverConfig, problem: &Problem, cancel: &AtomicBool) -> ProverVerdict {
    let start = Instant::now();
    let mut verdict = match cfg.kind {
        ProverKind::Resolution => {
            let limits = Limits { max_clauses: cfg.max_clauses.unwrap_or(Limits::default().max_clauses), timeout: cfg.time_limit() };
            ProverVerdict::new(resolution_prove(problem, &limits, cancel))
        }
        ProverKind::ModelFinder => {
            let max = cfg.max_domain.unwrap_or(DEFAULT_MAX_DOMAIN);
            match find_model(&problem.premises(), &problem.conjecture, max, start + cfg.time_limit(), cancel) {
                Some(m) => ProverVerdict::new(SzsStatus::CounterSatisfiable).with_model(m.render()),
                None => ProverVerdict::new(SzsStatus::Unknown),
            }
        }
        ProverKind::External => run_external(cfg.command.as_deref().unwrap_or(""), cfg.time_limit(), &problem.tptp, cancel),
    };
    verdict.elapsed = start.elapsed();
    verdict
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObligationResult {
    pub verdict: ProverVerdict,
    /// The prover whose verdict was taken, if any was decisive.
    pub prover: Option<String>,
    /// Every prover's verdict, in configuration order.
    pub verdicts: Vec<(String, ProverVerdict)>,
}

/// Merges verdicts given in configuration order. A proof and a
/// countermodel together are an error; otherwise the first decisive
/// verdict in configuration order is taken, else `Unknown`.
pub fn combine(verdicts: Vec<(String, ProverVerdict)>) -> ObligationResult {
    let proved = verdicts.iter().position(|(_, v)| v.status == SzsStatus::Theorem);
    let refuted = verdicts.iter().position(|(_, v)| matches!(v.status, SzsStatus::CounterSatisfiable | SzsStatus::Satisfiable));
    let elapsed = verdicts.iter().map(|(_, v)| v.elapsed).max().unwrap_or_default();
    let (verdict, prover) = match (proved, refuted) {
        (Some(p), Some(r)) => {
            let mut v = ProverVerdict::new(SzsStatus::Error);
            v.output = Some(format!(
                "provers disagree: `{}` reports Theorem, `{}` reports {:?}",
                verdicts[p].0, verdicts[r].0, verdicts[r].1.status
            ));
            v.model = verdicts[r].1.model.clone();
            v.elapsed = elapsed;
            (v, None)
        }
        (Some(i), None) | (None, Some(i)) => (verdicts[i].1.clone(), Some(verdicts[i].0.clone())),
        (None, None) => {
            let mut v = ProverVerdict::new(SzsStatus::Unknown);
            v.elapsed = elapsed;
            (v, None)
        }
    };
    ObligationResult { verdict, prover, verdicts }
}

/// Launches every configured prover on `problem` concurrently and combines
/// their verdicts. Provers still running after a decisive verdict are
/// cancelled and get one grace period to report; those not reporting by
/// their deadline count as timed out.
pub fn portfolio(problem: Arc<Problem>, cfgs: &[ProverConfig]) -> ObligationResult {
    portfolio_with(cfgs, move |cfg, cancel| run_prover(cfg, &problem, cancel))
}

/// [`portfolio`] over an arbitrary prover implementation.
pub fn portfolio_with<F>(cfgs: &[ProverConfig], run: F) -> ObligationResult
where
    F: Fn(&ProverConfig, &AtomicBool) -> ProverVerdict + Send + Sync + 'static,
{
    let cancel = Arc::new(AtomicBool::new(false));
    let run = Arc::new(run);
    let (tx, rx) = mpsc::channel();
    for (i, cfg) in cfgs.iter().enumerate() {
        let (tx, cancel, run, cfg) = (tx.clone(), cancel.clone(), run.clone(), cfg.clone());
        thread::spawn(move || {
            let v = run(&cfg, &cancel);
            let _ = tx.send((i, v));
        });
    }
    drop(tx);
    let longest = cfgs.iter().map(ProverConfig::time_limit).max().unwrap_or_default();
    let mut deadline = Instant::now() + longest + GRACE * 2;
    let mut results: Vec<Option<ProverVerdict>> = vec![None; cfgs.len()];
    let mut pending = cfgs.len();
    while pending > 0 {
        let wait = deadline.saturating_duration_since(Instant::now());
        match rx.recv_timeout(wait) {
            Ok((i, v)) => {
                if v.status.is_decisive() {
                    cancel.store(true, Ordering::Relaxed);
                    deadline = deadline.min(Instant::now() + GRACE);
                }
                results[i] = Some(v);
                pending -= 1;
            }
            Err(_) => break,
        }
    }
    cancel.store(true, Ordering::Relaxed);
    let verdicts = cfgs
        .iter()
        .zip(results)
        .map(|(c, v)| (c.name.clone(), v.unwrap_or_else(|| ProverVerdict::new(SzsStatus::Timeout))))
        .collect();
    combine(verdicts)
}
