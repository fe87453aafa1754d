mod common;

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rmrs_core::explorer::{bounded_equiv, Explorer};
use rmrs_core::regulation::{PriorityRelation, Regulation, RegulationClass};
use rmrs_core::transforms::{attach_neutral, cfr_to_cr, cfr_to_cr_in_order, or_to_pr};
use rmrs_core::{serialize_model, ModelDocument, Multiset};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn or_to_pr_preserves_runs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_system(&mut rng);
        let z = random_regulation(&mut rng, RegulationClass::Ordered, &s);
        let Regulation::Ordered(order) = &z else { unreachable!() };
        let (t, succ) = or_to_pr(&s, order);
        let zt = Regulation::Programmed(succ);
        prop_assert!(zt.validate(&t).is_empty());
        prop_assert!(bounded_equiv(&Explorer::new(&s, &z), &Explorer::new(&t, &zt), 5).unwrap().equal);
    }

    #[test]
    fn cfr_to_cr_preserves_runs_in_any_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_system(&mut rng);
        let pairs = random_priority_pairs(&mut rng, &s, 0.8);
        let rel = PriorityRelation { pairs };
        let z = Regulation::ConcurrentFree(rel.clone());
        let t = cfr_to_cr(&s, &rel);
        let zt = Regulation::Conditional(t.contexts.clone());
        prop_assert!(zt.validate(&t.system).is_empty());
        prop_assert!(bounded_equiv(&Explorer::new(&s, &z), &Explorer::new(&t.system, &zt), 5).unwrap().equal);

        let mut order: Vec<_> = rel.pairs.iter().cloned().collect();
        order.shuffle(&mut rng);
        let other = cfr_to_cr_in_order(&s, &order);
        prop_assert_eq!(&other.system, &t.system);
        prop_assert_eq!(&other.contexts, &t.contexts);
    }

    #[test]
    fn neutral_attachment_changes_nothing(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_system(&mut rng);
        let plain = Regulation::Unregulated;
        for class in RegulationClass::REGULATED {
            let (t, z) = attach_neutral(&s, class);
            prop_assert!(bounded_equiv(&Explorer::new(&s, &plain), &Explorer::new(&t, &z), 4).unwrap().equal);
        }
    }
}

#[test]
fn ordered_example_translation_serializes() {
    let d = load("ordered");
    let Regulation::Ordered(order) = &d.regulation else {
        panic!()
    };
    let (t, succ) = or_to_pr(&d.system, order);
    let text = serialize_model(&ModelDocument::new(t, Regulation::Programmed(succ)));
    assert!(text.contains("  mu1 -> { mu1, mu2 }\n"));
    assert!(text.contains("  mu2 -> { mu2 }\n"));
}

#[test]
fn priority_witness_translation() {
    let d = load("priority_witness");
    let Regulation::ConcurrentFree(rel) = &d.regulation else {
        panic!()
    };
    let t = cfr_to_cr(&d.system, rel);
    assert!(t.removed.is_empty());
    assert_eq!(
        t.contexts.contexts(&id("mu2")).cloned().collect::<Vec<_>>(),
        vec![Multiset::of(&["A", "B"])]
    );
    let z = Regulation::Conditional(t.contexts);
    assert!(
        bounded_equiv(
            &Explorer::new(&d.system, &d.regulation),
            &Explorer::new(&t.system, &z),
            6
        )
        .unwrap()
        .equal
    );
}

#[test]
fn equal_left_sides_remove_the_loser() {
    let text = "\
elements: A
init: {A}
rules:
  mu1: {A} -> {}
  mu2: {A} -> {A, A}
regulation: concurrent-free
  mu1 < mu2
";
    let d = rmrs_core::parse_model(text).unwrap();
    let Regulation::ConcurrentFree(rel) = &d.regulation else {
        panic!()
    };
    let t = cfr_to_cr(&d.system, rel);
    assert_eq!(t.removed, vec![id("mu1")]);
    assert_eq!(t.system.rules().len(), 1);
}
