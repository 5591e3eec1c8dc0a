//! Statement trees, their contexts, and the proof obligations they induce.

mod elaborate;

pub use elaborate::{elaborate_document, elaborate_lemma, ElabError, Elaborated};

use crate::fol::Formula;
use crate::language::SourceSpan;

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub id: String,
    pub goal: Formula,
    pub proof: Proof,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Proof {
    Assumed,
    ByContext,
    /// Restricted to the named statements plus the local context.
    BySubContext(Vec<String>),
    BySequence(Vec<Statement>),
    /// Children do not see each other's goals.
    BySplit(Vec<Statement>),
}

impl Statement {
    pub fn new(goal: Formula, proof: Proof, span: SourceSpan) -> Self {
        Statement { id: String::new(), goal, proof, span }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.proof, Proof::ByContext | Proof::BySubContext(_))
    }

    pub fn children(&self) -> &[Statement] {
        match &self.proof {
            Proof::BySequence(c) | Proof::BySplit(c) => c,
            _ => &[],
        }
    }

    /// Pre-order traversal including `self`.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Statement)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn leaves(&self) -> Vec<&Statement> {
        let mut out = Vec::new();
        self.walk(&mut |s| {
            if s.is_leaf() {
                out.push(s)
            }
        });
        out
    }

    /// Numbers all descendants `<id>_1`, `<id>_2`, ... in pre-order.
    pub fn assign_ids(&mut self, id: &str) {
        fn go(s: &mut Statement, root: &str, next: &mut usize) {
            let children = match &mut s.proof {
                Proof::BySequence(c) | Proof::BySplit(c) => c,
                _ => return,
            };
            for c in children {
                c.id = format!("{root}_{next}");
                *next += 1;
                go(c, root, next);
            }
        }
        self.id = id.to_string();
        let mut next = 1;
        go(self, id, &mut next);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextEntry {
    pub id: String,
    pub formula: Formula,
    /// Introduced inside a lemma rather than at the top level.
    pub local: bool,
}

pub type Context = Vec<ContextEntry>;

/// Visits every statement below the top-level sequence `top` with its
/// context: the goals of preceding siblings plus the parent's context,
/// except that children of a split see no sibling goals.
pub fn walk_contexts<'a>(top: &'a [Statement], f: &mut impl FnMut(&'a Statement, &Context)) {
    fn go<'a>(seq: &'a [Statement], parent: &Context, split: bool, depth: usize, f: &mut impl FnMut(&'a Statement, &Context)) {
        let mut ctx = parent.clone();
        for s in seq {
            f(s, &ctx);
            match &s.proof {
                Proof::BySequence(c) => go(c, &ctx, false, depth + 1, f),
                Proof::BySplit(c) => go(c, &ctx, true, depth + 1, f),
                _ => {}
            }
            if !split {
                ctx.push(ContextEntry { id: s.id.clone(), formula: s.goal.clone(), local: depth > 0 });
            }
        }
    }
    go(top, &Vec::new(), false, 0, f);
}

/// The context of the statement with the given id, if present.
pub fn context_of(top: &[Statement], id: &str) -> Option<Context> {
    let mut found = None;
    walk_contexts(top, &mut |s, ctx| {
        if s.id == id && found.is_none() {
            found = Some(ctx.clone());
        }
    });
    found
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obligation {
    pub id: String,
    pub axioms: Context,
    pub conjecture: Formula,
    pub span: SourceSpan,
    /// Set for `by` steps, whose context is restricted.
    pub restricted: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("unknown hint `{hint}`")]
pub struct UnknownHint {
    pub hint: String,
    pub span: SourceSpan,
}

/// One obligation per leaf below the top-level statements selected by
/// `include`, in depth-first source order.
pub fn collect_obligations(top: &[Statement], include: impl Fn(&Statement) -> bool) -> Result<Vec<Obligation>, UnknownHint> {
    let selected: Vec<&str> = top.iter().filter(|s| include(s)).map(|s| s.id.as_str()).collect();
    let mut inside: Vec<String> = Vec::new();
    let mut out = Vec::new();
    let mut error = None;
    let mut current_root: Option<&str> = None;
    walk_contexts(top, &mut |s, ctx| {
        if top.iter().any(|t| std::ptr::eq(t, s)) {
            current_root = selected.iter().find(|id| **id == s.id).copied();
            inside.clear();
        }
        if current_root.is_none() || error.is_some() {
            return;
        }
        let axioms = match &s.proof {
            Proof::ByContext => ctx.clone(),
            Proof::BySubContext(hints) => {
                let mut axioms: Context = Vec::new();
                for h in hints {
                    match ctx.iter().find(|e| &e.id == h) {
                        Some(e) => {
                            if !axioms.iter().any(|a| a.id == e.id) {
                                axioms.push(e.clone())
                            }
                        }
                        None => {
                            error = Some(UnknownHint { hint: h.clone(), span: s.span });
                            return;
                        }
                    }
                }
                for e in ctx.iter().filter(|e| e.local) {
                    if !axioms.iter().any(|a| a.id == e.id) {
                        axioms.push(e.clone());
                    }
                }
                axioms
            }
            _ => return,
        };
        out.push(Obligation {
            id: s.id.clone(),
            axioms,
            conjecture: s.goal.clone(),
            span: s.span,
            restricted: matches!(s.proof, Proof::BySubContext(_)),
        });
    });
    match error {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
