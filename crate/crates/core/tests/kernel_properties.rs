mod common;

use std::collections::HashMap;

use cnlproof::fol::Formula;
use cnlproof::kernel::{walk_contexts, Proof};
use common::{discharged_tree_count, oracle_contexts, random_document};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn contexts_match_direct_recursion(seed in any::<u64>()) {
        let top = random_document(seed);
        let mut expected = HashMap::new();
        oracle_contexts(&top, &[], false, &mut expected);
        let mut seen = 0;
        walk_contexts(&top, &mut |s, ctx| {
            let got: Vec<Formula> = ctx.iter().map(|e| e.formula.clone()).collect();
            assert_eq!(&got, &expected[&s.id], "context of {}", s.id);
            seen += 1;
        });
        prop_assert_eq!(seen, expected.len());
    }

    #[test]
    fn split_children_share_one_context(seed in any::<u64>()) {
        let top = random_document(seed);
        let mut contexts = HashMap::new();
        walk_contexts(&top, &mut |s, ctx| {
            contexts.insert(s.id.clone(), ctx.clone());
        });
        for root in &top {
            root.walk(&mut |s| {
                if let Proof::BySplit(children) = &s.proof {
                    for pair in children.windows(2) {
                        assert_eq!(contexts[&pair[0].id], contexts[&pair[1].id]);
                    }
                }
            });
        }
    }
}

#[test]
fn discharged_lemma_trees_prove_their_root() {
    let discharged = discharged_tree_count(200, 0x5eed);
    assert!(discharged >= 20, "only {discharged} of 200 trees fully discharged");
}
