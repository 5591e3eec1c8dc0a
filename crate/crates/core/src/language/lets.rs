use std::collections::BTreeSet;

use super::{Document, ItemKind, LanguageError, LetBinding};
use crate::fol::{Formula, Ident, Term};

#[derive(Debug, Clone)]
struct Binding {
    vars: Vec<Ident>,
    guard: Formula,
}

/// Closes definitions, axioms and lemma statements over the Let-bound
/// symbols they mention, guarded by their Let predicates; remaining free
/// variables are universally closed outermost. Bindings are scoped to the
/// file declaring them; proof steps are left alone.
pub fn apply_let_bindings(doc: Document<Formula>) -> Result<Document<Formula>, LanguageError> {
    let mut scopes: Vec<(String, Vec<Binding>)> = Vec::new();
    let mut items = Vec::with_capacity(doc.items.len());
    for mut item in doc.items {
        let pos = match scopes.iter().position(|(o, _)| *o == item.origin) {
            Some(p) => p,
            None => {
                scopes.push((item.origin.clone(), Vec::new()));
                scopes.len() - 1
            }
        };
        let bindings = &mut scopes[pos].1;
        let err = |msg: String| LanguageError::new(msg, Some(item.span)).in_file(&item.origin);
        match &mut item.kind {
            ItemKind::Let(LetBinding::Typed { vars, predicate }) => {
                for v in vars.iter() {
                    let guard = Formula::pred(predicate.clone(), vec![Term::var(v.clone())]);
                    bind(bindings, vec![v.clone()], guard).map_err(err)?;
                }
            }
            ItemKind::Let(LetBinding::Pattern(guard)) => {
                let fresh: Vec<Ident> = guard.free_vars().into_iter().filter(|v| !bindings.iter().any(|b| b.vars.contains(v))).collect();
                if fresh.is_empty() {
                    let first = guard.free_vars().into_iter().next();
                    match first {
                        Some(v) => bind(bindings, vec![v], guard.clone()).map_err(err)?,
                        None => return Err(err("Let binds no variable".into())),
                    }
                } else {
                    bind(bindings, fresh, guard.clone()).map_err(err)?;
                }
            }
            ItemKind::Definition { formula, .. } | ItemKind::Axiom { formula, .. } | ItemKind::Lemma { formula, .. } => {
                *formula = close(formula, bindings);
            }
            _ => {}
        }
        items.push(item);
    }
    Ok(Document { items })
}

fn bind(bindings: &mut Vec<Binding>, vars: Vec<Ident>, guard: Formula) -> Result<(), String> {
    for v in &vars {
        if let Some(old) = bindings.iter().find(|b| b.vars.contains(v)) {
            if old.guard != guard {
                return Err(format!("`{v}` is already bound by `{}`, cannot rebind it to `{}`", old.guard, guard));
            }
            return Ok(());
        }
    }
    bindings.push(Binding { vars, guard });
    Ok(())
}

fn close(f: &Formula, bindings: &[Binding]) -> Formula {
    let mut needed = BTreeSet::new();
    let mut frontier: Vec<Ident> = f.free_vars();
    while let Some(v) = frontier.pop() {
        if let Some(i) = bindings.iter().position(|b| b.vars.contains(&v)) {
            if needed.insert(i) {
                frontier.extend(bindings[i].guard.free_vars());
            }
        }
    }
    let vars: Vec<Ident> = needed.iter().flat_map(|&i| bindings[i].vars.clone()).collect();
    let guarded = if vars.is_empty() {
        f.clone()
    } else {
        let guards = needed.iter().map(|&i| bindings[i].guard.clone());
        Formula::forall_many(&vars, Formula::implies(Formula::conj(guards), f.clone()))
    };
    guarded.universal_closure().with_distinct_binders()
}

#[cfg(test)]
mod tests {
    use super::super::{desugar, parse};
    use super::*;

    fn closed(text: &str) -> Vec<String> {
        let doc = desugar(parse(text, "input").unwrap()).unwrap().0;
        apply_let_bindings(doc)
            .unwrap()
            .items
            .iter()
            .filter_map(|i| match &i.kind {
                ItemKind::Lemma { formula, .. } | ItemKind::Definition { formula, .. } => Some(formula.render()),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn injectivity_lemma_shape() {
        let text = "Notation function: f: A → B.\nNotation composition: g∘f.\nLet A,B,C be set.\nLet f: A → B.\nLet g: B → C.\nLemma: g∘f is injective implies f is injective.";
        assert_eq!(
            closed(text),
            ["∀ set(A), set(B), set(C), function(f, A, B), function(g, B, C). injective(composition(g, f)) → injective(f)"]
        );
    }

    #[test]
    fn no_let_only_closes() {
        assert_eq!(closed("Lemma: P implies P."), ["P → P"]);
        assert_eq!(closed("Lemma: x = x."), ["∀x. x = x"]);
    }

    #[test]
    fn pattern_let_pulls_in_its_dependencies() {
        let text = "Notation function: f: A → B.\nLet A,B,C be set.\nLet f: A → B.\nDefinition injective: f is injective.";
        assert_eq!(closed(text), ["∀ set(A), set(B), function(f, A, B). injective(f)"]);
    }

    #[test]
    fn explicitly_bound_symbols_are_left_alone() {
        let text = "Notation function: f: A → B.\nLet A,B be set.\nDefinition function: for all f. f: A → B iff f = f.";
        assert_eq!(closed(text), ["∀ set(A), set(B). ∀f. function(f, A, B) ↔ f = f"]);
    }

    #[test]
    fn conflicting_rebinding_fails() {
        let doc = desugar(parse("Let A be set.\nLet A be relation.", "input").unwrap()).unwrap().0;
        let err = apply_let_bindings(doc).unwrap_err();
        assert!(err.message.contains("already bound"));
        assert_eq!(err.span.unwrap().start_line, 2);
    }

    #[test]
    fn bindings_are_scoped_per_file() {
        let lib = desugar(parse("Let A be set.", "lib").unwrap()).unwrap().0;
        let input = desugar(parse("Lemma: A = A.", "input").unwrap()).unwrap().0;
        let mut items = lib.items;
        items.extend(input.items);
        let out = apply_let_bindings(Document { items }).unwrap();
        let ItemKind::Lemma { formula, .. } = &out.items[1].kind else { panic!() };
        assert_eq!(formula.render(), "∀A. A = A");
    }
}
