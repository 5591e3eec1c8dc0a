//! Turns a lemma and its proof steps into a statement tree.
//!
//! The constructions, tried in order for a goal and remaining steps:
//! a final claim matching the goal becomes a leaf; an outer `∀` is frozen to
//! fresh constants; an `Assume` matching the antecedent of an implication
//! unfolds it; any other `Assume` starts an alternative goal closed by its
//! `Hence`; a `Then` becomes a cornerstone; `Case` and nested `Proof` blocks
//! add their conclusions as cornerstones.

use std::collections::HashSet;

use super::{Proof, Statement};
use crate::fol::{Formula, Ident, Term};
use crate::language::{Document, ItemKind, SourceSpan, Step, StepKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct ElabError {
    pub message: String,
    pub span: SourceSpan,
}

fn err<T>(message: impl Into<String>, span: SourceSpan) -> Result<T, ElabError> {
    Err(ElabError { message: message.into(), span })
}

/// The top-level statement sequence of a document.
#[derive(Debug, Clone, Default)]
pub struct Elaborated {
    pub statements: Vec<Statement>,
    /// Index of the document item each statement came from.
    pub items: Vec<usize>,
    /// Lemmas that failed to elaborate; they still enter later contexts as assumed.
    pub errors: Vec<(usize, ElabError)>,
}

pub fn elaborate_document(doc: &Document<Formula>) -> Elaborated {
    let mut taken: HashSet<Ident> = HashSet::new();
    for item in &doc.items {
        match &item.kind {
            ItemKind::Definition { formula, .. } | ItemKind::Axiom { formula, .. } => taken.extend(formula.names()),
            ItemKind::Lemma { formula, proof, .. } => {
                taken.extend(formula.names());
                if let Some(p) = proof {
                    collect_names(&p.steps, &mut taken);
                }
            }
            _ => {}
        }
    }
    let mut out = Elaborated::default();
    let mut used: HashSet<String> = HashSet::new();
    let mut lemmas = 0;
    let mut unique = |id: String| {
        let mut candidate = id.clone();
        let mut n = 2;
        while !used.insert(candidate.clone()) {
            candidate = format!("{id}_{n}");
            n += 1;
        }
        candidate
    };
    for (index, item) in doc.items.iter().enumerate() {
        let stmt = match &item.kind {
            ItemKind::Definition { name, formula } | ItemKind::Axiom { name, formula } => {
                let mut s = Statement::new(formula.clone(), Proof::Assumed, item.span);
                s.id = unique(name.clone());
                s
            }
            ItemKind::Lemma { name, formula, proof } => {
                lemmas += 1;
                let id = unique(name.clone().unwrap_or_else(|| format!("lemma{lemmas}")));
                let steps = proof.as_ref().map(|p| (&p.steps[..], p.qed));
                match elaborate_lemma(&id, formula, steps, item.span, &taken) {
                    Ok(s) => s,
                    Err(e) => {
                        out.errors.push((index, e));
                        let mut s = Statement::new(formula.clone(), Proof::Assumed, item.span);
                        s.id = id;
                        s
                    }
                }
            }
            _ => continue,
        };
        out.statements.push(stmt);
        out.items.push(index);
    }
    out
}

fn collect_names(steps: &[Step<Formula>], out: &mut HashSet<Ident>) {
    for s in steps {
        match &s.kind {
            StepKind::Assume(f) | StepKind::Then { formula: f, .. } | StepKind::Hence { formula: f, .. } => out.extend(f.names()),
            StepKind::Case { case: f, body } | StepKind::SubProof { goal: f, body } => {
                out.extend(f.names());
                collect_names(&body.steps, out);
            }
        }
    }
}

/// Elaborates one lemma. Without a proof the lemma itself is an obligation.
/// `taken` lists names fresh constants must avoid.
pub fn elaborate_lemma(
    id: &str,
    goal: &Formula,
    proof: Option<(&[Step<Formula>], SourceSpan)>,
    span: SourceSpan,
    taken: &HashSet<Ident>,
) -> Result<Statement, ElabError> {
    let mut root = match proof {
        None => Statement::new(goal.clone(), Proof::ByContext, span),
        Some((steps, qed)) => {
            let mut taken = taken.clone();
            taken.extend(goal.names());
            collect_names(steps, &mut taken);
            let mut e = Elab { taken, env: Vec::new() };
            e.prove(goal, steps, qed, span)?
        }
    };
    root.assign_ids(id);
    Ok(root)
}

struct Elab {
    taken: HashSet<Ident>,
    /// Variables frozen so far, innermost last.
    env: Vec<(Ident, Term)>,
}

impl Elab {
    fn inst(&self, f: &Formula) -> Formula {
        f.substitute_all(self.env.iter().rev().map(|(v, t)| (v.as_str(), t)))
    }

    fn closed(&self, f: &Formula, span: SourceSpan) -> Result<Formula, ElabError> {
        let g = self.inst(f);
        match g.free_vars().first() {
            Some(v) => err(format!("`{v}` is not introduced; assume something about it first"), span),
            None => Ok(g),
        }
    }

    fn leaf(goal: Formula, hints: &[String], span: SourceSpan) -> Statement {
        let proof = if hints.is_empty() { Proof::ByContext } else { Proof::BySubContext(hints.to_vec()) };
        Statement::new(goal, proof, span)
    }

    fn sequence(goal: &Formula, children: Vec<Statement>, span: SourceSpan) -> Statement {
        Statement::new(goal.clone(), Proof::BySequence(children), span)
    }

    /// The final step, if it is a claim matching `goal`.
    fn final_claim<'s>(&self, steps: &'s [Step<Formula>], goal: &Formula) -> Result<Option<(&'s [String], SourceSpan)>, ElabError> {
        if let [only] = steps {
            if let StepKind::Then { formula, hints } | StepKind::Hence { formula, hints } = &only.kind {
                if self.closed(formula, only.span)?.matches(goal) {
                    return Ok(Some((hints, only.span)));
                }
            }
        }
        Ok(None)
    }

    fn assume_matches(&self, step: Option<&Step<Formula>>, antecedent: &Formula) -> bool {
        matches!(step.map(|s| &s.kind), Some(StepKind::Assume(a)) if self.inst(a).matches(antecedent))
    }

    fn prove(&mut self, goal: &Formula, steps: &[Step<Formula>], end: SourceSpan, anchor: SourceSpan) -> Result<Statement, ElabError> {
        if steps.is_empty() {
            return Ok(Self::leaf(goal.clone(), &[], end));
        }
        if let Some((hints, span)) = self.final_claim(steps, goal)? {
            return Ok(Self::leaf(goal.clone(), hints, span));
        }
        if let Formula::Forall(..) = goal {
            return self.forall_intro(goal, steps, end, anchor);
        }
        let first = &steps[0];
        let rest = &steps[1..];
        match &first.kind {
            StepKind::Assume(a) => {
                if let Formula::Implies(p, q) = goal {
                    if self.inst(a).matches(p) {
                        let assumed = Statement::new((**p).clone(), Proof::Assumed, first.span);
                        let body = self.prove(q, rest, end, anchor)?;
                        return Ok(Self::sequence(goal, vec![assumed, body], anchor));
                    }
                }
                self.alternative_goal(goal, steps, end, anchor)
            }
            StepKind::Then { formula, hints } => {
                let claim = self.closed(formula, first.span)?;
                let cornerstone = Self::leaf(claim, hints, first.span);
                let body = self.prove(goal, rest, end, anchor)?;
                Ok(Self::sequence(goal, vec![cornerstone, body], anchor))
            }
            StepKind::Hence { formula, .. } => {
                let claim = self.closed(formula, first.span)?;
                if rest.is_empty() {
                    err(format!("`Hence {claim}` does not match the goal `{goal}`"), first.span)
                } else {
                    err(format!("`Hence {claim}` has no pending assumption to close"), first.span)
                }
            }
            StepKind::Case { case, body } => {
                let condition = self.closed(case, first.span)?;
                let Some(last) = body.steps.last() else {
                    return err("empty case", first.span);
                };
                let conclusion = match &last.kind {
                    StepKind::Then { formula, .. } | StepKind::Hence { formula, .. } => self.closed(formula, last.span)?,
                    _ => return err("a case must end with `Then` or `Hence`", last.span),
                };
                let assumed = Statement::new(condition.clone(), Proof::Assumed, first.span);
                let inner = self.prove(&conclusion, &body.steps, body.qed, first.span)?;
                let case_goal = Formula::implies(condition, conclusion);
                let case_stmt = Self::sequence(&case_goal, vec![assumed, inner], first.span);
                let after = self.prove(goal, rest, end, anchor)?;
                Ok(Self::sequence(goal, vec![case_stmt, after], anchor))
            }
            StepKind::SubProof { goal: sub_goal, body } => {
                let sub_goal = self.closed(sub_goal, first.span)?;
                let sub = self.prove(&sub_goal, &body.steps, body.qed, first.span)?;
                let after = self.prove(goal, rest, end, anchor)?;
                Ok(Self::sequence(goal, vec![sub, after], anchor))
            }
        }
    }

    /// Freezes the outer universal prefix; an implication below it is
    /// unfolded right away unless the next step assumes its antecedent.
    fn forall_intro(&mut self, goal: &Formula, steps: &[Step<Formula>], end: SourceSpan, anchor: SourceSpan) -> Result<Statement, ElabError> {
        let vars = goal.forall_prefix();
        let (frozen, map) = goal.freeze(&vars, &self.taken).map_err(|e| ElabError { message: e.to_string(), span: anchor })?;
        let depth = self.env.len();
        for (v, c) in &map.pairs {
            self.taken.insert(c.clone());
            self.env.push((v.clone(), Term::constant(c.clone())));
        }
        let child = match &frozen {
            Formula::Implies(p, q) if !self.assume_matches(steps.first(), p) => {
                let assumed = Statement::new((**p).clone(), Proof::Assumed, anchor);
                self.prove(q, steps, end, anchor).map(|body| Self::sequence(&frozen, vec![assumed, body], anchor))
            }
            _ => self.prove(&frozen, steps, end, anchor),
        };
        self.env.truncate(depth);
        Ok(Self::sequence(goal, vec![child?], anchor))
    }

    /// `Assume A ... Hence K` proves `Q = ∀vars. A → K` in place of the
    /// goal, with a separate check that `Q` implies the goal.
    fn alternative_goal(&mut self, goal: &Formula, steps: &[Step<Formula>], end: SourceSpan, anchor: SourceSpan) -> Result<Statement, ElabError> {
        let mut depth = 0usize;
        let mut close = None;
        for (i, s) in steps.iter().enumerate() {
            match &s.kind {
                StepKind::Assume(_) => depth += 1,
                StepKind::Hence { .. } => {
                    depth -= 1;
                    if depth == 0 {
                        close = Some(i);
                        break;
                    }
                }
                _ => {}
            }
        }
        let Some(k) = close else {
            return err("assumption is never closed by `Hence`", steps[0].span);
        };
        let (StepKind::Assume(a), StepKind::Hence { formula: h, .. }) = (&steps[0].kind, &steps[k].kind) else {
            unreachable!()
        };
        let body = Formula::implies(self.inst(a), self.inst(h));
        let alternative = Formula::forall_many(&body.free_vars(), body).with_distinct_binders();
        let (block, rest) = steps.split_at(k + 1);

        let check_goal = Formula::implies(alternative.clone(), goal.clone());
        let check = match self.final_claim(rest, goal)? {
            _ if rest.is_empty() => Self::leaf(check_goal, &[], end),
            Some((hints, span)) => Self::leaf(check_goal, hints, span),
            None => {
                let assumed = Statement::new(alternative.clone(), Proof::Assumed, steps[k].span);
                let after = self.prove(goal, rest, end, anchor)?;
                Self::sequence(&check_goal, vec![assumed, after], anchor)
            }
        };
        let proved = self.prove(&alternative, block, steps[k].span, steps[0].span)?;
        Ok(Statement::new(goal.clone(), Proof::BySplit(vec![check, proved]), anchor))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{collect_obligations, context_of, Proof};
    use super::*;
    use crate::fol::parse_formula;
    use crate::language::{apply_let_bindings, desugar, parse, resolve_includes, SearchPath};

    fn elaborate(text: &str) -> Elaborated {
        let doc = resolve_includes(parse(text, "input").unwrap(), &SearchPath::new(vec![])).unwrap();
        let doc = apply_let_bindings(desugar(doc).unwrap().0).unwrap();
        elaborate_document(&doc)
    }

    fn lemma(e: &Elaborated) -> &Statement {
        e.statements.iter().find(|s| s.id.starts_with("lemma")).unwrap()
    }

    const INJECTIVITY: &str = "Include functions.\nLet A,B,C be set.\nLet f: A → B.\nLet g: B → C.\nLemma: g∘f is injective implies f is injective.\nProof:\n  Assume g∘f is injective.\n  Assume x ∈ A and x' ∈ A and (f{x}) = (f{x'}).\n  Then ((g∘f){x}) = ((g∘f){x'}).\n  Hence x = x'.\n  Hence f is injective.\nqed.\n";

    #[test]
    fn injectivity_leaves() {
        let e = elaborate(INJECTIVITY);
        assert!(e.errors.is_empty(), "{:?}", e.errors);
        let l = lemma(&e);
        let leaves: Vec<&str> = l.leaves().iter().map(|s| s.id.as_str()).collect();
        assert_eq!(leaves, ["lemma1_6", "lemma1_11", "lemma1_12"]);
        let goals: Vec<String> = l.leaves().iter().map(|s| s.goal.render()).collect();
        assert_eq!(
            goals,
            [
                "(∀x, x'. in(x, cA) ∧ in(x', cA) ∧ funApp(cf, x) = funApp(cf, x') → x = x') → injective(cf)",
                "funApp(composition(cg, cf), cx) = funApp(composition(cg, cf), cx')",
                "cx = cx'",
            ]
        );
        assert_eq!(l.leaves()[0].span.start_line, 11);
        assert_eq!(l.leaves()[2].span.start_line, 10);
    }

    #[test]
    fn injectivity_tree_shape() {
        let e = elaborate(INJECTIVITY);
        let l = lemma(&e);
        let s1 = &l.children()[0];
        assert_eq!(s1.goal.render(), "set(cA) ∧ set(cB) ∧ set(cC) ∧ function(cf, cA, cB) ∧ function(cg, cB, cC) → (injective(composition(cg, cf)) → injective(cf))");
        let s5 = &s1.children()[1].children()[1];
        assert_eq!(s5.id, "lemma1_5");
        assert!(matches!(s5.proof, Proof::BySplit(_)));
        let top = e.statements.clone();
        assert_eq!(context_of(&top, "lemma1_6"), context_of(&top, "lemma1_7"));
        let ctx12 = context_of(&top, "lemma1_12").unwrap();
        let local: Vec<String> = ctx12.iter().filter(|c| c.local).map(|c| c.formula.render()).collect();
        assert_eq!(
            local,
            [
                "set(cA) ∧ set(cB) ∧ set(cC) ∧ function(cf, cA, cB) ∧ function(cg, cB, cC)",
                "injective(composition(cg, cf))",
                "in(cx, cA) ∧ in(cx', cA) ∧ funApp(cf, cx) = funApp(cf, cx')",
                "funApp(composition(cg, cf), cx) = funApp(composition(cg, cf), cx')",
            ]
        );
    }

    #[test]
    fn simple_implication() {
        let e = elaborate("Lemma: P implies P. Proof: Assume P. Hence P. qed.");
        let obs = collect_obligations(&e.statements, |_| true).unwrap();
        assert_eq!(obs.len(), 1);
        assert_eq!(obs[0].conjecture, parse_formula("P").unwrap());
        assert!(obs[0].axioms.iter().any(|a| a.formula == parse_formula("P").unwrap()));
    }

    #[test]
    fn conjunctive_antecedent_matches_in_any_order() {
        let e = elaborate("Lemma: (B and A) implies A. Proof: Assume A and B. Hence A. qed.");
        assert!(e.errors.is_empty());
        assert_eq!(lemma(&e).leaves().len(), 1);
    }

    #[test]
    fn chained_cornerstones_enter_the_final_context() {
        let e = elaborate("Lemma: P. Proof: Then Q. Then R. Hence P. qed.");
        let obs = collect_obligations(&e.statements, |_| true).unwrap();
        assert_eq!(obs.len(), 3);
        let last: Vec<String> = obs[2].axioms.iter().map(|a| a.formula.render()).collect();
        assert_eq!(last, ["Q", "R"]);
    }

    #[test]
    fn nested_quantifiers_freeze_at_once() {
        let e = elaborate("Lemma: for all x, y. x = y implies y = x. Proof: Assume x = y. Hence y = x. qed.");
        let l = lemma(&e);
        assert_eq!(l.children()[0].goal.render(), "cx = cy → cy = cx");
        assert_eq!(l.leaves().len(), 1);
    }

    #[test]
    fn unintroduced_variable_is_an_error() {
        let e = elaborate("Lemma: P. Proof: Then x = x. Hence P. qed.");
        assert_eq!(e.errors.len(), 1);
        assert!(e.errors[0].1.message.contains("`x`"));
    }

    #[test]
    fn hence_errors() {
        let e = elaborate("Lemma: P. Proof: Hence Q. qed.");
        assert!(e.errors[0].1.message.contains("does not match the goal"));
        let e = elaborate("Lemma: P. Proof: Hence Q. Then P. qed.");
        assert!(e.errors[0].1.message.contains("no pending assumption"));
    }

    #[test]
    fn lemma_without_proof_is_a_single_obligation() {
        let e = elaborate("Axiom a: P. Lemma: P.");
        let obs = collect_obligations(&e.statements, |s| s.id == "lemma1").unwrap();
        assert_eq!(obs.len(), 1);
        assert_eq!(obs[0].axioms.len(), 1);
    }

    #[test]
    fn case_blocks_become_implications() {
        let text = "Include relations.\nLet R,S be relation.\nLemma: R ⊆ S and S is symmetric implies\n  (R ∪ (R⁻¹)) ⊆ S.\nProof:\n  Assume R ⊆ S and S is symmetric.\n  Assume (R ∪ (R⁻¹))[x,y].\n  Then R[x,y] or (R⁻¹)[x,y].\n  Case R[x,y]:\n    Then S[x,y] by subrelation.\n  qed.\n  Case (R⁻¹)[x,y]:\n    Then R[y,x] by relationInverse.\n    Then S[y,x] by subrelation.\n    Then S[x,y] by symmetry.\n  qed.\n  Hence S[x,y].\n  Hence (R ∪ (R⁻¹)) ⊆ S.\nqed.\n";
        let e = elaborate(text);
        assert!(e.errors.is_empty(), "{:?}", e.errors);
        let obs = collect_obligations(&e.statements, |s| s.id == "lemma1").unwrap();
        let lines: Vec<usize> = obs.iter().map(|o| o.span.start_line).collect();
        assert_eq!(lines, [18, 8, 10, 13, 14, 15, 17]);
        let hinted = &obs[2];
        assert!(hinted.restricted);
        let ids: Vec<&str> = hinted.axioms.iter().map(|a| a.id.as_str()).collect();
        assert_eq!(ids[0], "subrelation");
        assert!(hinted.axioms[1..].iter().all(|a| a.local));
        let last = obs.iter().find(|o| o.span.start_line == 17).unwrap();
        let implications: Vec<String> = last.axioms.iter().filter(|a| a.local).map(|a| a.formula.render()).collect();
        assert!(implications.contains(&"relapp(cR, cx, cy) → relapp(cS, cx, cy)".to_string()), "{implications:?}");
        assert!(implications.contains(&"relapp(inverse(cR), cx, cy) → relapp(cS, cx, cy)".to_string()));
    }

    #[test]
    fn elaboration_is_deterministic() {
        let a = collect_obligations(&elaborate(INJECTIVITY).statements, |_| true).unwrap();
        let b = collect_obligations(&elaborate(INJECTIVITY).statements, |_| true).unwrap();
        assert_eq!(a, b);
    }
}
