//! Sentence-level structure: items, proof blocks and steps. Formula bodies
//! are kept as token runs and interpreted later by the desugarer, once all
//! notations in scope are known.

use super::{Document, Item, ItemKind, LanguageError, LetBinding, ProofBlock, SourceSpan, Step, StepKind, Token, TokenKind};

pub type Tokens = Vec<Token>;

const STEP_KEYWORDS: [&str; 5] = ["Assume", "Then", "Hence", "Case", "Proof"];
const ITEM_KEYWORDS: [&str; 6] = ["Include", "Let", "Notation", "Definition", "Axiom", "Lemma"];

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    eof: SourceSpan,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + k)
    }

    fn here(&self) -> SourceSpan {
        self.peek().map(|t| t.span).unwrap_or(self.eof)
    }

    fn fail<T>(&self, message: impl Into<String>, expected: &[&str]) -> Result<T, LanguageError> {
        let found = self.peek().map(|t| format!("`{}`", t.text())).unwrap_or_else(|| "end of input".into());
        Err(LanguageError::new(format!("{}, found {found}", message.into()), Some(self.here())).expecting(expected))
    }

    fn expect_punct(&mut self, c: char) -> Result<&'a Token, LanguageError> {
        match self.peek() {
            Some(t) if t.is_punct(c) => {
                self.pos += 1;
                Ok(t)
            }
            _ => self.fail(format!("expected `{c}`"), &[&c.to_string()]),
        }
    }

    fn name(&mut self) -> Result<String, LanguageError> {
        match self.peek().and_then(|t| t.word()) {
            Some(w) => {
                self.pos += 1;
                Ok(w.to_string())
            }
            None => self.fail("expected a name", &["identifier"]),
        }
    }

    /// Tokens up to the `.` ending the sentence. Dots closing a
    /// `for all ...` or `exists ...` binder list do not end the sentence.
    fn sentence(&mut self) -> Result<(Tokens, &'a Token), LanguageError> {
        let start = self.pos;
        let mut pending_binders = 0usize;
        let mut depth = 0i32;
        while let Some(t) = self.peek() {
            match &t.kind {
                TokenKind::Word(w) if w == "exists" => pending_binders += 1,
                TokenKind::Word(w) if w == "for" && self.peek_at(1).is_some_and(|n| n.is_word("all")) => pending_binders += 1,
                TokenKind::Punct('(') | TokenKind::Punct('[') | TokenKind::Punct('{') => depth += 1,
                TokenKind::Punct(')') | TokenKind::Punct(']') | TokenKind::Punct('}') => depth -= 1,
                TokenKind::Punct('.') => {
                    if pending_binders > 0 {
                        pending_binders -= 1;
                    } else if depth <= 0 {
                        let body = self.toks[start..self.pos].to_vec();
                        self.pos += 1;
                        return Ok((body, t));
                    }
                }
                TokenKind::Word(w) if depth <= 0 && pending_binders == 0 && self.pos > start && (w == "qed" || ITEM_KEYWORDS.contains(&w.as_str())) => {
                    if self.peek_at(1).is_some_and(|n| n.is_punct('.') || n.is_punct(':') || w == "Include" || w == "Let") {
                        return self.fail("missing `.` before next sentence", &["."]);
                    }
                }
                _ => {}
            }
            self.pos += 1;
        }
        self.fail("unterminated sentence", &["."])
    }

    /// Tokens of a `Case φ:` or `Proof φ:` header. The header ends at a `:`
    /// followed by a step keyword or `qed`.
    fn header(&mut self) -> Result<(Tokens, &'a Token), LanguageError> {
        let start = self.pos;
        while let Some(t) = self.peek() {
            if t.is_punct(':') {
                if let Some(n) = self.peek_at(1) {
                    if n.word().is_some_and(|w| w == "qed" || STEP_KEYWORDS.contains(&w)) {
                        let body = self.toks[start..self.pos].to_vec();
                        self.pos += 1;
                        return Ok((body, t));
                    }
                }
            }
            if t.is_punct('.') && start < self.pos {
                break;
            }
            self.pos += 1;
        }
        self.pos = start;
        self.fail("expected `:` ending the header", &[":"])
    }

    fn nonempty(&self, toks: &Tokens, what: &str, at: SourceSpan) -> Result<(), LanguageError> {
        if toks.is_empty() {
            Err(LanguageError::new(format!("empty {what}"), Some(at)).expecting(&["formula"]))
        } else {
            Ok(())
        }
    }

    fn document(&mut self, origin: &str) -> Result<Document<Tokens>, LanguageError> {
        let mut items = Vec::new();
        while let Some(t) = self.peek() {
            let start = t.span;
            let kind = match t.word() {
                Some("Include") => {
                    self.pos += 1;
                    let mut names = vec![self.name()?];
                    while self.peek().is_some_and(|t| t.is_punct(',')) {
                        self.pos += 1;
                        names.push(self.name()?);
                    }
                    self.expect_punct('.')?;
                    ItemKind::Include(names)
                }
                Some("Let") => {
                    self.pos += 1;
                    let (body, _) = self.sentence()?;
                    self.nonempty(&body, "Let binding", start)?;
                    let_binding(body)
                }
                Some("Notation") => {
                    self.pos += 1;
                    let name = self.name()?;
                    self.expect_punct(':')?;
                    let (pattern, _) = self.sentence()?;
                    self.nonempty(&pattern, "notation pattern", start)?;
                    ItemKind::Notation { name, pattern }
                }
                Some(kw @ ("Definition" | "Axiom")) => {
                    self.pos += 1;
                    let name = self.name()?;
                    self.expect_punct(':')?;
                    let (formula, _) = self.sentence()?;
                    self.nonempty(&formula, "formula", start)?;
                    if kw == "Definition" {
                        ItemKind::Definition { name, formula }
                    } else {
                        ItemKind::Axiom { name, formula }
                    }
                }
                Some("Lemma") => {
                    self.pos += 1;
                    let name = if self.peek().is_some_and(|t| t.is_punct(':')) { None } else { Some(self.name()?) };
                    self.expect_punct(':')?;
                    let (formula, _) = self.sentence()?;
                    self.nonempty(&formula, "formula", start)?;
                    let head_end = self.toks[self.pos - 1].span;
                    let proof = if self.peek().is_some_and(|t| t.is_word("Proof")) && self.peek_at(1).is_some_and(|t| t.is_punct(':')) {
                        let proof_start = self.peek().unwrap().span;
                        self.pos += 2;
                        Some(self.block(proof_start)?)
                    } else {
                        None
                    };
                    items.push(Item {
                        kind: ItemKind::Lemma { name, formula, proof },
                        span: start.merge(head_end),
                        origin: origin.to_string(),
                    });
                    continue;
                }
                _ => return self.fail("unknown keyword", &ITEM_KEYWORDS),
            };
            let end = self.toks[self.pos - 1].span;
            items.push(Item { kind, span: start.merge(end), origin: origin.to_string() });
        }
        Ok(Document { items })
    }

    /// Steps up to and including `qed.`.
    fn block(&mut self, opened: SourceSpan) -> Result<ProofBlock<Tokens>, LanguageError> {
        let mut steps = Vec::new();
        loop {
            let Some(t) = self.peek() else {
                return Err(LanguageError::new("unterminated proof, missing `qed`", Some(opened)).expecting(&["qed"]));
            };
            let start = t.span;
            let kind = match t.word() {
                Some("qed") => {
                    self.pos += 1;
                    let dot = self.expect_punct('.')?;
                    return Ok(ProofBlock { steps, header: opened, qed: start.merge(dot.span) });
                }
                Some("Assume") => {
                    self.pos += 1;
                    let (f, _) = self.sentence()?;
                    self.nonempty(&f, "assumption", start)?;
                    StepKind::Assume(f)
                }
                Some(kw @ ("Then" | "Hence")) => {
                    self.pos += 1;
                    let (body, _) = self.sentence()?;
                    let (formula, hints) = split_hints(body, start)?;
                    self.nonempty(&formula, "claim", start)?;
                    if kw == "Then" {
                        StepKind::Then { formula, hints }
                    } else {
                        StepKind::Hence { formula, hints }
                    }
                }
                Some(kw @ ("Case" | "Proof")) => {
                    self.pos += 1;
                    let (f, colon) = self.header()?;
                    self.nonempty(&f, "header", start)?;
                    let header = start.merge(colon.span);
                    let body = self.block(header)?;
                    if body.steps.is_empty() {
                        return Err(LanguageError::new(format!("empty {} body", kw.to_lowercase()), Some(header)));
                    }
                    let span = header;
                    steps.push(Step {
                        kind: if kw == "Case" { StepKind::Case { case: f, body } } else { StepKind::SubProof { goal: f, body } },
                        span,
                    });
                    continue;
                }
                _ => return self.fail("unknown proof step", &["Assume", "Then", "Hence", "Case", "Proof", "qed"]),
            };
            let end = self.toks[self.pos - 1].span;
            steps.push(Step { kind, span: start.merge(end) });
        }
    }
}

fn let_binding(body: Tokens) -> ItemKind<Tokens> {
    // `x, y be P` or `x be a P`
    let mut vars = Vec::new();
    let mut i = 0;
    while let Some(w) = body.get(i).and_then(|t| t.word()) {
        vars.push(w.to_string());
        i += 1;
        if body.get(i).is_some_and(|t| t.is_punct(',')) {
            i += 1;
        } else {
            break;
        }
    }
    if !vars.is_empty() && body.get(i).is_some_and(|t| t.is_word("be")) {
        let predicate = match &body[i + 1..] {
            [p] => p.word(),
            [a, p] if a.is_word("a") || a.is_word("an") => p.word(),
            _ => None,
        };
        if let Some(predicate) = predicate {
            return ItemKind::Let(LetBinding::Typed { vars, predicate: predicate.to_string() });
        }
    }
    ItemKind::Let(LetBinding::Pattern(body))
}

fn split_hints(body: Tokens, at: SourceSpan) -> Result<(Tokens, Vec<String>), LanguageError> {
    let Some(by) = body.iter().rposition(|t| t.is_word("by")) else {
        return Ok((body, Vec::new()));
    };
    let mut hints = Vec::new();
    let mut expect_name = true;
    for t in &body[by + 1..] {
        match (&t.kind, expect_name) {
            (TokenKind::Word(w), true) => {
                hints.push(w.clone());
                expect_name = false;
            }
            (TokenKind::Punct(','), false) => expect_name = true,
            _ => return Err(LanguageError::new("malformed `by` hint list", Some(t.span)).expecting(&["identifier", ","])),
        }
    }
    if expect_name {
        return Err(LanguageError::new("`by` must be followed by names", Some(at)).expecting(&["identifier"]));
    }
    let mut formula = body;
    formula.truncate(by);
    Ok((formula, hints))
}

pub fn parse_tokens(toks: &[Token], origin: &str) -> Result<Document<Tokens>, LanguageError> {
    let eof = toks.last().map(|t| t.span).unwrap_or_default();
    let mut p = Parser { toks, pos: 0, eof };
    p.document(origin).map_err(|e| e.in_file(origin))
}

#[cfg(test)]
mod tests {
    use super::super::{parse, tokenize};
    use super::*;

    const INJECTIVITY: &str = "Include functions.\n\nLet A,B,C be set.\n\nLet f: A → B.\nLet g: B → C.\n\nLemma: g∘f is injective implies f is injective.\nProof:\n  Assume g∘f is injective.\n  Assume x ∈ A and x' ∈ A and (f{x}) = (f{x'}).\n  Then ((g∘f){x}) = ((g∘f){x'}).\n  Hence x = x'.\n  Hence f is injective.\nqed.\n";

    #[test]
    fn exemplary_text_structure() {
        let doc = parse(INJECTIVITY, "input").unwrap();
        let kinds: Vec<&str> = doc
            .items
            .iter()
            .map(|i| match &i.kind {
                ItemKind::Include(_) => "include",
                ItemKind::Let(LetBinding::Typed { .. }) => "let-typed",
                ItemKind::Let(LetBinding::Pattern(_)) => "let-pattern",
                ItemKind::Lemma { .. } => "lemma",
                _ => "other",
            })
            .collect();
        assert_eq!(kinds, ["include", "let-typed", "let-pattern", "let-pattern", "lemma"]);
        let ItemKind::Lemma { proof: Some(proof), .. } = &doc.items[4].kind else { panic!() };
        assert_eq!(proof.steps.len(), 5);
        assert_eq!(proof.steps[1].span.start_line, 11);
        assert_eq!(proof.qed.start_line, 15);
    }

    #[test]
    fn empty_proof() {
        let doc = parse("Lemma: P. Proof: qed.", "input").unwrap();
        let ItemKind::Lemma { proof: Some(proof), .. } = &doc.items[0].kind else { panic!() };
        assert!(proof.steps.is_empty());
    }

    #[test]
    fn cases_and_hints() {
        let text = "Lemma: P. Proof:\n Then R[x,y] or Q by a, b.\n Case R[x,y]:\n  Then S[x,y] by subrelation.\n qed.\n Case Q:\n  Then S[x,y].\n qed.\n Hence P.\nqed.";
        let doc = parse(text, "input").unwrap();
        let ItemKind::Lemma { proof: Some(proof), .. } = &doc.items[0].kind else { panic!() };
        let StepKind::Then { hints, .. } = &proof.steps[0].kind else { panic!() };
        assert_eq!(hints, &["a", "b"]);
        assert!(matches!(&proof.steps[1].kind, StepKind::Case { body, .. } if body.steps.len() == 1));
        assert!(matches!(&proof.steps[2].kind, StepKind::Case { .. }));
        assert_eq!(proof.steps.len(), 4);
    }

    #[test]
    fn binder_dots_do_not_end_sentences() {
        let doc = parse("Definition d: for all x ∈ A. exists y ∈ B. f[x,y].", "lib").unwrap();
        let ItemKind::Definition { formula, .. } = &doc.items[0].kind else { panic!() };
        assert_eq!(formula.len(), 17);
    }

    #[test]
    fn missing_qed_is_reported() {
        let err = parse("Lemma: P. Proof: Assume P.", "input").unwrap_err();
        assert!(err.message.contains("qed"), "{}", err.message);
        assert!(err.expected.contains(&"qed".to_string()));
    }

    #[test]
    fn unknown_keyword_is_reported_with_span() {
        let err = parse("Lemma: P.\nTheorem: Q.", "input").unwrap_err();
        assert_eq!(err.span.unwrap().start_line, 2);
        assert!(err.expected.contains(&"Lemma".to_string()));
    }

    #[test]
    fn let_forms() {
        let doc = parse("Let x be an element. Let R,S be relation. Let f: A → B.", "input").unwrap();
        assert!(matches!(&doc.items[0].kind, ItemKind::Let(LetBinding::Typed { vars, predicate }) if vars == &["x"] && predicate == "element"));
        assert!(matches!(&doc.items[1].kind, ItemKind::Let(LetBinding::Typed { vars, .. }) if vars.len() == 2));
        assert!(matches!(&doc.items[2].kind, ItemKind::Let(LetBinding::Pattern(p)) if p.len() == 5));
    }

    #[test]
    fn spans_lie_within_input() {
        let toks = tokenize(INJECTIVITY);
        let doc = parse_tokens(&toks, "input").unwrap();
        for item in &doc.items {
            assert!(item.span.end_byte <= INJECTIVITY.len());
            assert!(item.span.start_byte <= item.span.end_byte);
        }
    }
}
