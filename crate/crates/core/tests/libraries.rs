use std::sync::atomic::AtomicBool;
use std::time::{Duration, Instant};

use cnlproof::fol::Formula;
use cnlproof::language::{ItemKind, SearchPath};
use cnlproof::provers::find_model;
use cnlproof::stdlib::{bundled, NAMES};
use cnlproof::verifier::elaborate_text;

fn search() -> SearchPath {
    SearchPath::new(vec![])
}

#[test]
fn libraries_have_no_obligations() {
    for name in NAMES {
        let elab = elaborate_text(bundled(name).unwrap(), &search()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(elab.obligations.is_empty(), "{name}");
        assert!(elab.errors.is_empty(), "{name}: {:?}", elab.errors);
    }
}

#[test]
fn functions_library_has_the_listed_definitions() {
    let elab = elaborate_text("Include functions.", &search()).unwrap();
    let names: Vec<&str> = elab
        .document
        .items
        .iter()
        .filter_map(|i| match &i.kind {
            ItemKind::Definition { name, .. } => Some(name.as_str()),
            _ => None,
        })
        .collect();
    for expected in ["function", "injective", "composition", "subset", "union", "complement", "subrelation", "relationInverse", "symmetry"] {
        assert!(names.contains(&expected), "{expected} in {names:?}");
    }
}

#[test]
fn libraries_have_small_models() {
    for name in NAMES {
        let elab = elaborate_text(bundled(name).unwrap(), &search()).unwrap();
        let axioms: Vec<Formula> = elab
            .document
            .items
            .iter()
            .filter_map(|i| match &i.kind {
                ItemKind::Definition { formula, .. } | ItemKind::Axiom { formula, .. } => Some(formula.clone()),
                _ => None,
            })
            .collect();
        let deadline = Instant::now() + Duration::from_secs(60);
        let model = find_model(&axioms, &Formula::Bottom, 3, deadline, &AtomicBool::new(false));
        let model = model.unwrap_or_else(|| panic!("{name} has no model of size at most 3"));
        assert!(axioms.iter().all(|a| model.eval(a)), "{name}");
    }
}
