//! The controlled proof language: tokens, sentences, notations, Let
//! bindings and library includes.

mod desugar;
mod include;
mod lets;
mod parse;
mod token;

pub use desugar::{desugar, formula_from_tokens, NotationKind, NotationPattern, NotationRegistry, PatternPart};
pub use include::{resolve_includes, LibrarySource, SearchPath};
pub use lets::apply_let_bindings;
pub use parse::{parse_tokens, Tokens};
pub use token::{tokenize, tokenize_bytes, SourceSpan, Token, TokenKind};

use crate::fol::{Formula, Signature};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}{message}", file.as_deref().map(|f| format!("{f}: ")).unwrap_or_default())]
pub struct LanguageError {
    pub message: String,
    pub span: Option<SourceSpan>,
    /// Token descriptions that would have been accepted at `span`.
    pub expected: Vec<String>,
    pub file: Option<String>,
}

impl LanguageError {
    pub fn new(message: impl Into<String>, span: Option<SourceSpan>) -> Self {
        LanguageError { message: message.into(), span, expected: Vec::new(), file: None }
    }

    pub fn expecting(mut self, expected: &[&str]) -> Self {
        self.expected = expected.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn in_file(mut self, file: &str) -> Self {
        if self.file.is_none() {
            self.file = Some(file.to_string());
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document<F> {
    pub items: Vec<Item<F>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Item<F> {
    pub kind: ItemKind<F>,
    /// For lemmas, the statement sentence only; the proof block has its own spans.
    pub span: SourceSpan,
    /// Name of the file the item came from (`input` for the checked text).
    pub origin: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ItemKind<F> {
    Include(Vec<String>),
    Let(LetBinding<F>),
    Notation { name: String, pattern: Tokens },
    Definition { name: String, formula: F },
    Axiom { name: String, formula: F },
    Lemma { name: Option<String>, formula: F, proof: Option<ProofBlock<F>> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LetBinding<F> {
    /// `Let A, B be set.`
    Typed { vars: Vec<String>, predicate: String },
    /// `Let f: A → B.`
    Pattern(F),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProofBlock<F> {
    pub steps: Vec<Step<F>>,
    /// `Proof:`, `Case φ:` or `Proof φ:`
    pub header: SourceSpan,
    /// `qed.`
    pub qed: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step<F> {
    pub kind: StepKind<F>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepKind<F> {
    Assume(F),
    Then { formula: F, hints: Vec<String> },
    Hence { formula: F, hints: Vec<String> },
    Case { case: F, body: ProofBlock<F> },
    SubProof { goal: F, body: ProofBlock<F> },
}

impl<F> StepKind<F> {
    pub fn keyword(&self) -> &'static str {
        match self {
            StepKind::Assume(_) => "Assume",
            StepKind::Then { .. } => "Then",
            StepKind::Hence { .. } => "Hence",
            StepKind::Case { .. } => "Case",
            StepKind::SubProof { .. } => "Proof",
        }
    }
}

impl<F> Document<F> {
    /// Applies `f` to every formula, keeping structure and spans.
    pub fn try_map<G, E>(self, f: &mut impl FnMut(F, &str) -> Result<G, E>) -> Result<Document<G>, E> {
        let mut items = Vec::with_capacity(self.items.len());
        for item in self.items {
            let origin = item.origin;
            let kind = match item.kind {
                ItemKind::Include(names) => ItemKind::Include(names),
                ItemKind::Notation { name, pattern } => ItemKind::Notation { name, pattern },
                ItemKind::Let(LetBinding::Typed { vars, predicate }) => ItemKind::Let(LetBinding::Typed { vars, predicate }),
                ItemKind::Let(LetBinding::Pattern(p)) => ItemKind::Let(LetBinding::Pattern(f(p, &origin)?)),
                ItemKind::Definition { name, formula } => ItemKind::Definition { name, formula: f(formula, &origin)? },
                ItemKind::Axiom { name, formula } => ItemKind::Axiom { name, formula: f(formula, &origin)? },
                ItemKind::Lemma { name, formula, proof } => ItemKind::Lemma {
                    name,
                    formula: f(formula, &origin)?,
                    proof: match proof {
                        Some(p) => Some(p.try_map(&mut |x| f(x, &origin))?),
                        None => None,
                    },
                },
            };
            items.push(Item { kind, span: item.span, origin });
        }
        Ok(Document { items })
    }

    pub fn items_from<'a>(&'a self, origin: &'a str) -> impl Iterator<Item = &'a Item<F>> + 'a {
        self.items.iter().filter(move |i| i.origin == origin)
    }
}

impl<F> ProofBlock<F> {
    pub fn try_map<G, E>(self, f: &mut impl FnMut(F) -> Result<G, E>) -> Result<ProofBlock<G>, E> {
        let mut steps = Vec::with_capacity(self.steps.len());
        for step in self.steps {
            let kind = match step.kind {
                StepKind::Assume(x) => StepKind::Assume(f(x)?),
                StepKind::Then { formula, hints } => StepKind::Then { formula: f(formula)?, hints },
                StepKind::Hence { formula, hints } => StepKind::Hence { formula: f(formula)?, hints },
                StepKind::Case { case, body } => StepKind::Case { case: f(case)?, body: body.try_map(f)? },
                StepKind::SubProof { goal, body } => StepKind::SubProof { goal: f(goal)?, body: body.try_map(f)? },
            };
            steps.push(Step { kind, span: step.span });
        }
        Ok(ProofBlock { steps, header: self.header, qed: self.qed })
    }
}

/// Tokenizes and parses one file.
pub fn parse(text: &str, origin: &str) -> Result<Document<Tokens>, LanguageError> {
    parse_tokens(&tokenize(text), origin)
}

/// Reports predicate/function symbols used with inconsistent kinds or arities.
pub fn check_signature(doc: &Document<Formula>) -> Result<Signature, LanguageError> {
    let mut sig = Signature::default();
    let visit = |f: &Formula, span: SourceSpan, origin: &str, sig: &mut Signature| -> Result<(), LanguageError> {
        f.collect_signature(sig);
        if let Some(clash) = sig.clashes.first() {
            return Err(LanguageError::new(format!("symbol `{}` is used inconsistently", clash.0), Some(span)).in_file(origin));
        }
        Ok(())
    };
    fn block_formulas<'a>(b: &'a ProofBlock<Formula>, out: &mut Vec<(&'a Formula, SourceSpan)>) {
        for s in &b.steps {
            match &s.kind {
                StepKind::Assume(f) | StepKind::Then { formula: f, .. } | StepKind::Hence { formula: f, .. } => out.push((f, s.span)),
                StepKind::Case { case: f, body } | StepKind::SubProof { goal: f, body } => {
                    out.push((f, s.span));
                    block_formulas(body, out);
                }
            }
        }
    }
    for item in &doc.items {
        let mut fs = Vec::new();
        match &item.kind {
            ItemKind::Let(LetBinding::Pattern(f)) | ItemKind::Definition { formula: f, .. } | ItemKind::Axiom { formula: f, .. } => fs.push((f, item.span)),
            ItemKind::Lemma { formula, proof, .. } => {
                fs.push((formula, item.span));
                if let Some(p) = proof {
                    block_formulas(p, &mut fs);
                }
            }
            _ => {}
        }
        for (f, span) in fs {
            visit(f, span, &item.origin, &mut sig)?;
        }
    }
    Ok(sig)
}
