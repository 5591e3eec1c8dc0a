#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::AtomicBool;
use std::thread;
use std::time::Duration;

use cnlproof::fol::{Formula, Term};
use cnlproof::kernel::{collect_obligations, Proof, Statement};
use cnlproof::language::SourceSpan;
use cnlproof::provers::{portfolio_with, resolution_prove, Clause, Limits, Problem, ProverConfig};
use cnlproof::tptp::{ProverVerdict, SzsStatus};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const ATOMS: [&str; 4] = ["p", "q", "r", "s"];

pub fn atom(name: &str) -> Formula {
    Formula::pred(name, vec![])
}

/// A random propositional formula over the first `atoms` atoms.
pub fn random_formula(rng: &mut StdRng, atoms: usize, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..12) {
            0 => Formula::Top,
            1 => Formula::Bottom,
            _ => atom(ATOMS[rng.gen_range(0..atoms)]),
        };
    }
    let op = rng.gen_range(0..5);
    let a = random_formula(rng, atoms, depth - 1);
    if op == 0 {
        return Formula::not(a);
    }
    let b = random_formula(rng, atoms, depth - 1);
    match op {
        1 => Formula::and(a, b),
        2 => Formula::or(a, b),
        3 => Formula::implies(a, b),
        _ => Formula::iff(a, b),
    }
}

/// Truth value under the set of true atoms.
pub fn truth(f: &Formula, true_atoms: &BTreeSet<String>) -> bool {
    match f {
        Formula::Pred(p, args) if args.is_empty() => true_atoms.contains(p.as_str()),
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::Not(a) => !truth(a, true_atoms),
        Formula::And(a, b) => truth(a, true_atoms) && truth(b, true_atoms),
        Formula::Or(a, b) => truth(a, true_atoms) || truth(b, true_atoms),
        Formula::Implies(a, b) => !truth(a, true_atoms) || truth(b, true_atoms),
        Formula::Iff(a, b) => truth(a, true_atoms) == truth(b, true_atoms),
        other => panic!("not propositional: {other:?}"),
    }
}

/// All assignments to the atoms in `ATOMS`.
pub fn assignments() -> impl Iterator<Item = BTreeSet<String>> {
    (0u32..1 << ATOMS.len()).map(|bits| (0..ATOMS.len()).filter(|i| bits >> i & 1 == 1).map(|i| ATOMS[i].to_string()).collect())
}

pub fn entails(axioms: &[Formula], goal: &Formula) -> bool {
    assignments().all(|v| !axioms.iter().all(|a| truth(a, &v)) || truth(goal, &v))
}

pub fn satisfiable(fs: &[Formula]) -> bool {
    assignments().any(|v| fs.iter().all(|f| truth(f, &v)))
}

pub fn prove(axioms: &[Formula], goal: &Formula) -> SzsStatus {
    let limits = Limits { max_clauses: 20_000, timeout: Duration::from_secs(10) };
    resolution_prove(&Problem::new(axioms.to_vec(), goal.clone()), &limits, &AtomicBool::new(false))
}

pub fn stmt(goal: Formula, proof: Proof) -> Statement {
    Statement::new(goal, proof, SourceSpan::default())
}

/// A random tree with distinct atom goals `g<n>` and random proof shapes.
pub fn random_tree(rng: &mut StdRng, depth: u32, next: &mut usize) -> Statement {
    *next += 1;
    let goal = atom(&format!("g{next}"));
    let leaf = depth == 0 || rng.gen_bool(0.3);
    let proof = if leaf {
        match rng.gen_range(0..3) {
            0 => Proof::Assumed,
            1 => Proof::ByContext,
            _ => Proof::BySubContext(vec![]),
        }
    } else {
        let children = (0..rng.gen_range(1..4)).map(|_| random_tree(rng, depth - 1, next)).collect();
        if rng.gen_bool(0.5) {
            Proof::BySequence(children)
        } else {
            Proof::BySplit(children)
        }
    };
    stmt(goal, proof)
}

pub fn random_document(seed: u64) -> Vec<Statement> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut next = 0;
    let mut top: Vec<Statement> = (0..rng.gen_range(1..4)).map(|_| random_tree(&mut rng, 4, &mut next)).collect();
    for (i, s) in top.iter_mut().enumerate() {
        s.assign_ids(&format!("t{i}"));
    }
    top
}

/// Contexts by direct recursion: a statement sees its parent's context
/// and, unless the parent splits, the goals of its earlier siblings.
pub fn oracle_contexts(seq: &[Statement], inherited: &[Formula], split: bool, out: &mut HashMap<String, Vec<Formula>>) {
    for (i, s) in seq.iter().enumerate() {
        let mut ctx = inherited.to_vec();
        if !split {
            ctx.extend(seq[..i].iter().map(|p| p.goal.clone()));
        }
        match &s.proof {
            Proof::BySequence(c) => oracle_contexts(c, &ctx, false, out),
            Proof::BySplit(c) => oracle_contexts(c, &ctx, true, out),
            _ => {}
        }
        out.insert(s.id.clone(), ctx);
    }
}

/// Builds a proof of `goal` from the four constructions: unfolding an
/// implication, proving an alternative goal, giving a cornerstone, or
/// leaving it to the provers.
pub fn construct(rng: &mut StdRng, goal: Formula, depth: u32) -> Statement {
    let choice = if depth == 0 { 3 } else { rng.gen_range(0..4) };
    match (choice, &goal) {
        (0, Formula::Implies(p, q)) => {
            let body = construct(rng, (**q).clone(), depth - 1);
            stmt(goal.clone(), Proof::BySequence(vec![stmt((**p).clone(), Proof::Assumed), body]))
        }
        (0 | 1, _) => {
            let alternatives: Vec<Formula> = (0..rng.gen_range(1..3)).map(|_| random_formula(rng, 3, 2)).collect();
            let soundness = Formula::implies(Formula::conj(alternatives.clone()), goal.clone());
            let mut children = vec![stmt(soundness, Proof::ByContext)];
            children.extend(alternatives.into_iter().map(|q| construct(rng, q, depth - 1)));
            stmt(goal, Proof::BySplit(children))
        }
        (2, _) => {
            let q = random_formula(rng, 3, 2);
            let cornerstone = construct(rng, q, depth - 1);
            let rest = construct(rng, goal.clone(), depth - 1);
            stmt(goal, Proof::BySequence(vec![cornerstone, rest]))
        }
        _ => stmt(goal, Proof::ByContext),
    }
}


/// Generates `trees` random lemma trees from the four proof constructions
/// and asserts that whenever the prover discharges every obligation, it
/// also proves the root goal from the root's context. Returns how many
/// trees were fully discharged.
pub fn discharged_tree_count(trees: usize, seed: u64) -> usize {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut discharged = 0;
    for _ in 0..trees {
        let axioms: Vec<Formula> = (0..rng.gen_range(0..3)).map(|_| random_formula(&mut rng, 3, 2)).collect();
        let goal = if rng.gen_bool(0.5) {
            Formula::implies(random_formula(&mut rng, 3, 1), random_formula(&mut rng, 3, 2))
        } else {
            random_formula(&mut rng, 3, 2)
        };
        let mut top: Vec<Statement> = axioms.iter().map(|a| stmt(a.clone(), Proof::Assumed)).collect();
        top.push(construct(&mut rng, goal.clone(), 3));
        for (i, s) in top.iter_mut().enumerate() {
            s.assign_ids(&format!("s{i}"));
        }
        let lemma = top.last().unwrap().id.clone();
        let obligations = collect_obligations(&top, |s| s.id == lemma).unwrap();
        let all_proved = obligations.iter().all(|ob| {
            let premises: Vec<Formula> = ob.axioms.iter().map(|e| e.formula.clone()).collect();
            let status = prove(&premises, &ob.conjecture);
            if status == SzsStatus::Theorem {
                assert!(entails(&premises, &ob.conjecture), "prover unsound on {}", ob.id);
            }
            status == SzsStatus::Theorem
        });
        if all_proved {
            discharged += 1;
            assert_eq!(prove(&axioms, &goal), SzsStatus::Theorem, "root not provable: {goal:?} from {axioms:?}");
        }
    }
    discharged
}

/// Brute force over every nullary predicate occurring in `clauses`.
pub fn clauses_satisfiable(clauses: &[Clause]) -> bool {
    let atoms: Vec<String> = clauses
        .iter()
        .flat_map(|c| &c.literals)
        .map(|l| {
            assert!(l.args.is_empty(), "propositional input yields nullary literals");
            l.predicate.clone()
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    assert!(atoms.len() <= 16, "too many atoms for brute force");
    (0u32..1 << atoms.len()).any(|bits| {
        clauses.iter().all(|c| {
            c.literals.iter().any(|l| {
                let i = atoms.iter().position(|a| *a == l.predicate).unwrap();
                (bits >> i & 1 == 1) == l.positive
            })
        })
    })
}

/// A random formula over unary predicates, constants and one function.
pub fn random_first_order(rng: &mut StdRng, bound: &mut Vec<String>, depth: u32) -> Formula {
    let term = |rng: &mut StdRng, bound: &[String]| {
        let base = if !bound.is_empty() && rng.gen_bool(0.6) {
            Term::var(bound[rng.gen_range(0..bound.len())].clone())
        } else {
            Term::constant(["a", "b"][rng.gen_range(0..2)])
        };
        if rng.gen_bool(0.2) {
            Term::app("f", vec![base])
        } else {
            base
        }
    };
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..4) {
            0 => Formula::eq(term(rng, bound), term(rng, bound)),
            1 => Formula::pred("r", vec![term(rng, bound), term(rng, bound)]),
            n => Formula::pred(["p", "q"][n - 2], vec![term(rng, bound)]),
        };
    }
    match rng.gen_range(0..6) {
        0 => Formula::not(random_first_order(rng, bound, depth - 1)),
        1 | 2 => {
            let a = random_first_order(rng, bound, depth - 1);
            let b = random_first_order(rng, bound, depth - 1);
            [Formula::and, Formula::or, Formula::implies][rng.gen_range(0..3)](a, b)
        }
        n => {
            let v = format!("X{}", bound.len());
            bound.push(v.clone());
            let body = random_first_order(rng, bound, depth - 1);
            bound.pop();
            if n == 3 {
                Formula::forall(v, body)
            } else {
                Formula::exists(v, body)
            }
        }
    }
}

fn stub(name: &str) -> ProverConfig {
    let mut cfg = ProverConfig::resolution();
    cfg.name = name.into();
    cfg.timeout = 5.0;
    cfg
}

pub fn verdict(status: SzsStatus) -> ProverVerdict {
    match status {
        SzsStatus::CounterSatisfiable => ProverVerdict::new(status).with_model("model"),
        _ => ProverVerdict::new(status),
    }
}

/// Runs stubs reporting `statuses` in the completion order `order`.
pub fn run_stubs(statuses: &[SzsStatus], order: &[usize]) -> (SzsStatus, Option<String>, Vec<SzsStatus>) {
    let cfgs: Vec<ProverConfig> = (0..statuses.len()).map(|i| stub(&format!("p{i}"))).collect();
    let delays: Vec<u64> = {
        let mut d = vec![0; statuses.len()];
        for (rank, &i) in order.iter().enumerate() {
            d[i] = 10 * rank as u64;
        }
        d
    };
    let statuses = statuses.to_vec();
    let result = portfolio_with(&cfgs, move |cfg, _cancel| {
        let i: usize = cfg.name[1..].parse().unwrap();
        thread::sleep(Duration::from_millis(delays[i]));
        verdict(statuses[i])
    });
    (result.verdict.status, result.prover, result.verdicts.into_iter().map(|(_, v)| v.status).collect())
}


/// The worked examples under `tests/fixtures`.
pub const FIXTURES: [&str; 5] = ["injectivity", "injectivity_wrong", "relations_no_cases", "relations_cases", "double_complement"];

pub fn fixture(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(format!("{name}.elfe"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// The bundled libraries only.
pub fn bundled() -> cnlproof::language::SearchPath {
    cnlproof::language::SearchPath::new(vec![])
}

/// Checks that every obligation of `text` survives emit and reparse and
/// that all constants carry the `c` prefix; returns the emitted problems.
pub fn check_format(text: &str) -> Result<Vec<String>, String> {
    use cnlproof::tptp::{emit, mangle, parse_fof};
    let elab = cnlproof::verifier::elaborate_text(text, &bundled()).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for ob in &elab.obligations {
        let emitted = emit(ob).map_err(|e| e.to_string())?;
        let parsed = parse_fof(&emitted).map_err(|e| format!("{}: {e}", ob.id))?;
        let mangled = mangle(ob).map_err(|e| e.to_string())?;
        if parsed != mangled {
            return Err(format!("{}: round trip differs", ob.id));
        }
        for record in &parsed.records {
            if let Some(c) = record.formula.constants().into_iter().find(|c| !c.starts_with('c')) {
                return Err(format!("{}: constant `{c}` lacks the prefix", ob.id));
            }
        }
        out.push(emitted);
    }
    Ok(out)
}
