//! Interprets sentence token runs as formulas: connectives, bounded
//! quantifiers, user notations and the built-in bracket forms
//! `f{x}`, `R[x,y]`, `Aᶜ` and `R⁻¹`.

use super::{Document, ItemKind, LanguageError, SourceSpan, Token, TokenKind, Tokens};
use std::collections::{HashMap, HashSet};

use crate::fol::{Formula, Term};

const KEYWORDS: [&str; 10] = ["and", "or", "not", "implies", "iff", "for", "all", "exists", "is", "by"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternPart {
    Literal(String),
    Slot(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotationKind {
    TermForming,
    PredicateForming,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotationPattern {
    pub target: String,
    pub parts: Vec<PatternPart>,
    pub arity: usize,
    /// Fixed by the first use.
    pub kind: Option<NotationKind>,
    /// File declaring the notation.
    pub origin: String,
}

impl NotationPattern {
    pub fn from_tokens(target: &str, pattern: &[Token]) -> Result<Self, LanguageError> {
        let parts: Vec<PatternPart> = pattern
            .iter()
            .map(|t| match &t.kind {
                TokenKind::Word(w) => PatternPart::Slot(w.clone()),
                _ => PatternPart::Literal(t.text().to_string()),
            })
            .collect();
        let literals = parts.iter().filter(|p| matches!(p, PatternPart::Literal(_))).count();
        let span = pattern.first().map(|t| t.span.merge(pattern.last().unwrap().span));
        if literals == 0 {
            return Err(LanguageError::new(format!("notation `{target}` has no symbol"), span));
        }
        if parts.windows(2).any(|w| matches!(w, [PatternPart::Slot(_), PatternPart::Slot(_)])) {
            return Err(LanguageError::new(format!("notation `{target}` has adjacent placeholders"), span));
        }
        Ok(NotationPattern { target: target.to_string(), arity: parts.len() - literals, parts, kind: None, origin: String::new() })
    }

    fn literal_count(&self) -> usize {
        self.parts.len() - self.arity
    }

    fn same_shape(&self, other: &NotationPattern) -> bool {
        self.target == other.target
            && self.parts.len() == other.parts.len()
            && self.parts.iter().zip(&other.parts).all(|(a, b)| match (a, b) {
                (PatternPart::Literal(x), PatternPart::Literal(y)) => x == y,
                (PatternPart::Slot(_), PatternPart::Slot(_)) => true,
                _ => false,
            })
    }
}

/// Notations in declaration order.
#[derive(Debug, Clone, Default)]
pub struct NotationRegistry {
    pub patterns: Vec<NotationPattern>,
}

impl NotationRegistry {
    pub fn register(&mut self, pattern: NotationPattern) {
        if !self.patterns.iter().any(|p| p.same_shape(&pattern)) {
            self.patterns.push(pattern);
        }
    }
}

/// Desugars every formula of the document, registering notations as they
/// are declared.
/// A notation is visible in the file declaring it and in every file that
/// includes that file, directly or transitively.
pub fn desugar(doc: Document<Tokens>) -> Result<(Document<Formula>, NotationRegistry), LanguageError> {
    let mut includes: HashMap<String, Vec<String>> = HashMap::new();
    for item in &doc.items {
        if let ItemKind::Include(names) = &item.kind {
            includes.entry(item.origin.clone()).or_default().extend(names.iter().cloned());
        }
    }
    let mut registry = NotationRegistry::default();
    let mut items = Vec::with_capacity(doc.items.len());
    for item in doc.items {
        if let ItemKind::Notation { name, pattern } = &item.kind {
            let mut p = NotationPattern::from_tokens(name, pattern).map_err(|e| e.in_file(&item.origin))?;
            p.origin = item.origin.clone();
            registry.register(p);
        }
        let visible = reachable(&item.origin, &includes);
        let single = Document { items: vec![item] };
        let mapped = single.try_map(&mut |toks: Tokens, origin: &str| {
            formula_in_scope(&toks, &mut registry, Some(&visible)).map_err(|e| e.in_file(origin))
        })?;
        items.extend(mapped.items);
    }
    Ok((Document { items }, registry))
}

fn reachable(origin: &str, includes: &HashMap<String, Vec<String>>) -> HashSet<String> {
    let mut seen = HashSet::new();
    let mut stack = vec![origin.to_string()];
    while let Some(o) = stack.pop() {
        if seen.insert(o.clone()) {
            stack.extend(includes.get(&o).into_iter().flatten().cloned());
        }
    }
    seen
}

/// Desugars one formula given as tokens, with every registered notation in scope.
pub fn formula_from_tokens(toks: &[Token], registry: &mut NotationRegistry) -> Result<Formula, LanguageError> {
    formula_in_scope(toks, registry, None)
}

fn formula_in_scope(toks: &[Token], registry: &mut NotationRegistry, visible: Option<&HashSet<String>>) -> Result<Formula, LanguageError> {
    let end = toks.last().map(|t| t.span).unwrap_or_default();
    let mut d = Desugarer { toks, pos: 0, registry, end, visible };
    let f = d.formula()?;
    if d.pos < toks.len() {
        return d.fail("unexpected token", &["and", "or", "implies", "iff"]);
    }
    Ok(f.with_distinct_binders())
}

struct Desugarer<'a> {
    toks: &'a [Token],
    pos: usize,
    registry: &'a mut NotationRegistry,
    end: SourceSpan,
    visible: Option<&'a HashSet<String>>,
}

/// A parsed term, remembering whether its outermost construction was a
/// user notation (such a term may stand as a predicate).
struct Parsed {
    term: Term,
    notation: Option<usize>,
    bare: bool,
}

impl<'a> Desugarer<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn at_word(&self, w: &str) -> bool {
        self.peek().is_some_and(|t| t.is_word(w))
    }

    fn at_text(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.text() == s)
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.at_word(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_text(&mut self, s: &str) -> bool {
        if self.at_text(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, message: &str, expected: &[&str]) -> Result<T, LanguageError> {
        let (span, found) = match self.peek() {
            Some(t) => (t.span, format!("`{}`", t.text())),
            None => (self.end, "end of sentence".to_string()),
        };
        Err(LanguageError::new(format!("{message}, found {found}"), Some(span)).expecting(expected))
    }

    fn expect_text(&mut self, s: &str) -> Result<(), LanguageError> {
        if self.eat_text(s) {
            Ok(())
        } else {
            self.fail(&format!("expected `{s}`"), &[s])
        }
    }

    fn formula(&mut self) -> Result<Formula, LanguageError> {
        let mut lhs = self.implication()?;
        while self.eat_word("iff") {
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, LanguageError> {
        let lhs = self.disjunction()?;
        if self.eat_word("implies") {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, LanguageError> {
        let mut acc = self.conjunction()?;
        while self.eat_word("or") {
            acc = Formula::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, LanguageError> {
        let mut acc = self.unary()?;
        while self.eat_word("and") {
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, LanguageError> {
        if self.eat_word("not") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.at_word("for") && self.toks.get(self.pos + 1).is_some_and(|t| t.is_word("all")) {
            self.pos += 2;
            return self.quantified(true);
        }
        if self.eat_word("exists") {
            return self.quantified(false);
        }
        self.atom()
    }

    fn quantified(&mut self, universal: bool) -> Result<Formula, LanguageError> {
        let mut vars = Vec::new();
        let mut guards = Vec::new();
        let mut pending = Vec::new();
        loop {
            let var = match self.peek().and_then(|t| t.word()) {
                Some(w) if !KEYWORDS.contains(&w) => w.to_string(),
                _ => return self.fail("expected a variable", &["identifier"]),
            };
            self.pos += 1;
            vars.push(var.clone());
            pending.push(var);
            if self.eat_text("∈") {
                let set = self.term_expr()?.term;
                for v in pending.drain(..) {
                    guards.push(Formula::pred("in", vec![Term::var(v), set.clone()]));
                }
            }
            if !self.eat_text(",") {
                break;
            }
        }
        self.expect_text(".")?;
        let body = self.formula()?;
        Ok(match (universal, guards.is_empty()) {
            (true, true) => Formula::forall_many(&vars, body),
            (true, false) => Formula::forall_many(&vars, Formula::implies(Formula::conj(guards), body)),
            (false, true) => Formula::exists_many(&vars, body),
            (false, false) => Formula::exists_many(&vars, Formula::and(Formula::conj(guards), body)),
        })
    }

    fn atom(&mut self) -> Result<Formula, LanguageError> {
        if self.at_text("(") {
            let save = self.pos;
            if let Ok(f) = self.term_atom() {
                if self.at_boundary() {
                    return Ok(f);
                }
            }
            self.pos = save;
            self.pos += 1;
            let f = self.formula()?;
            self.expect_text(")")?;
            return Ok(f);
        }
        self.term_atom()
    }

    fn at_boundary(&self) -> bool {
        match self.peek() {
            None => true,
            Some(t) => t.text() == ")" || ["and", "or", "implies", "iff"].iter().any(|k| t.is_word(k)),
        }
    }

    fn term_atom(&mut self) -> Result<Formula, LanguageError> {
        let lhs = self.term_expr()?;
        if self.eat_text("=") {
            return Ok(Formula::eq(lhs.term, self.term_expr()?.term));
        }
        if self.eat_text("≠") {
            return Ok(Formula::not(Formula::eq(lhs.term, self.term_expr()?.term)));
        }
        if self.eat_text("∈") {
            return Ok(Formula::pred("in", vec![lhs.term, self.term_expr()?.term]));
        }
        if self.eat_text("∉") {
            return Ok(Formula::not(Formula::pred("in", vec![lhs.term, self.term_expr()?.term])));
        }
        if self.eat_word("is") {
            let negated = self.eat_word("not");
            if !self.eat_word("a") {
                self.eat_word("an");
            }
            let pred = match self.peek().and_then(|t| t.word()) {
                Some(w) if !KEYWORDS.contains(&w) => w.to_string(),
                _ => return self.fail("expected a property after `is`", &["identifier"]),
            };
            self.pos += 1;
            let f = Formula::pred(pred, vec![lhs.term]);
            return Ok(if negated { Formula::not(f) } else { f });
        }
        if self.eat_text("[") {
            let mut args = vec![lhs.term];
            args.extend(self.term_list("]")?);
            return Ok(Formula::pred("relapp", args));
        }
        if let Some(index) = lhs.notation {
            self.fix_kind(index, NotationKind::PredicateForming)?;
            if let Term::App(name, args) = lhs.term {
                return Ok(Formula::pred(name, args));
            }
        }
        if lhs.bare {
            if let Term::Var(name) = lhs.term {
                return Ok(Formula::pred(name, vec![]));
            }
        }
        self.fail("expected a relation after the term", &["=", "≠", "∈", "∉", "is", "["])
    }

    fn fix_kind(&mut self, index: usize, kind: NotationKind) -> Result<(), LanguageError> {
        let pattern = &mut self.registry.patterns[index];
        match pattern.kind {
            None => {
                pattern.kind = Some(kind);
                Ok(())
            }
            Some(k) if k == kind => Ok(()),
            Some(_) => {
                let target = pattern.target.clone();
                self.fail(&format!("notation `{target}` is used both as a term and as a statement"), &[])
            }
        }
    }

    fn term_list(&mut self, close: &str) -> Result<Vec<Term>, LanguageError> {
        let mut args = vec![self.term_expr()?.term];
        while self.eat_text(",") {
            args.push(self.term_expr()?.term);
        }
        self.expect_text(close)?;
        Ok(args)
    }

    /// A primary followed by infix notations, applied left to right.
    fn term_expr(&mut self) -> Result<Parsed, LanguageError> {
        let mut acc = self.operand()?;
        loop {
            let Some((index, args, end)) = self.best_match(Some(&acc.term))? else { break };
            self.pos = end;
            acc = Parsed { term: Term::app(self.registry.patterns[index].target.clone(), args), notation: Some(index), bare: false };
        }
        Ok(acc)
    }

    /// A primary with postfix forms.
    fn operand(&mut self) -> Result<Parsed, LanguageError> {
        let mut acc = self.primary()?;
        loop {
            if self.eat_text("{") {
                let mut args = vec![acc.term];
                args.extend(self.term_list("}")?);
                acc = Parsed { term: Term::app("funApp", args), notation: None, bare: false };
            } else if self.eat_text("ᶜ") {
                acc = Parsed { term: Term::app("complement", vec![acc.term]), notation: None, bare: false };
            } else if self.eat_text("⁻¹") {
                acc = Parsed { term: Term::app("inverse", vec![acc.term]), notation: None, bare: false };
            } else {
                return Ok(acc);
            }
        }
    }

    fn primary(&mut self) -> Result<Parsed, LanguageError> {
        match self.peek() {
            Some(t) if t.text() == "(" => {
                self.pos += 1;
                let inner = self.term_expr()?;
                self.expect_text(")")?;
                if let Some(index) = inner.notation {
                    self.fix_kind(index, NotationKind::TermForming)?;
                }
                Ok(Parsed { term: inner.term, notation: None, bare: false })
            }
            Some(t) => match t.word() {
                Some(w) if !KEYWORDS.contains(&w) => {
                    self.pos += 1;
                    Ok(Parsed { term: Term::var(w), notation: None, bare: true })
                }
                Some(_) => self.fail("expected a term", &["identifier", "("]),
                None => match self.best_match(None)? {
                    Some((index, args, end)) => {
                        self.pos = end;
                        Ok(Parsed { term: Term::app(self.registry.patterns[index].target.clone(), args), notation: Some(index), bare: false })
                    }
                    None => self.fail("expected a term", &["identifier", "("]),
                },
            },
            None => self.fail("expected a term", &["identifier", "("]),
        }
    }

    /// Finds the notation matching at the current position: with `left`
    /// given, patterns starting with a placeholder filled by it; otherwise
    /// patterns starting with a symbol. Longest literal match wins, then the
    /// earliest declaration.
    fn best_match(&mut self, left: Option<&Term>) -> Result<Option<(usize, Vec<Term>, usize)>, LanguageError> {
        let start = self.pos;
        let mut best: Option<(usize, usize, Vec<Term>, usize)> = None;
        for index in 0..self.registry.patterns.len() {
            let pattern = &self.registry.patterns[index];
            if self.visible.is_some_and(|v| !v.contains(&pattern.origin)) {
                continue;
            }
            let parts = pattern.parts.clone();
            let (rest, mut args) = match (left, parts.first()) {
                (Some(t), Some(PatternPart::Slot(_))) => (&parts[1..], vec![t.clone()]),
                (None, Some(PatternPart::Literal(_))) => (&parts[..], vec![]),
                _ => continue,
            };
            self.pos = start;
            let mut ok = true;
            for part in rest {
                match part {
                    PatternPart::Literal(lit) => {
                        if !self.eat_text(lit) {
                            ok = false;
                            break;
                        }
                    }
                    PatternPart::Slot(_) => match self.operand() {
                        Ok(p) => args.push(p.term),
                        Err(_) => {
                            ok = false;
                            break;
                        }
                    },
                }
            }
            if ok {
                let literals = self.registry.patterns[index].literal_count();
                if best.as_ref().is_none_or(|b| literals > b.0) {
                    best = Some((literals, index, args, self.pos));
                }
            }
        }
        self.pos = start;
        Ok(best.map(|(_, index, args, end)| (index, args, end)))
    }
}
