#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rmrs_core::omega::{parse_omega, OmegaExpr, RegexExpr};
use rmrs_core::regulation::{
    PriorityRelation, ProhibitedContexts, Regulation, RegulationClass, SuccessorMap,
};
use rmrs_core::{parse_model, Element, ModelDocument, Multiset, Rule, RuleId, System};

pub const GOLDEN: [&str; 12] = [
    "basic",
    "regular",
    "ordered",
    "programmed",
    "conditional",
    "concurrent_free",
    "ordered_rules_plain",
    "alternating_ordered",
    "two_runs_conditional",
    "priority_witness",
    "regular_witness",
    "priority_chain",
];

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn read_model_text(name: &str) -> String {
    let path = models_dir().join(format!("{name}.rmrs"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn load(name: &str) -> ModelDocument {
    parse_model(&read_model_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn read_program(name: &str) -> String {
    std::fs::read_to_string(models_dir().join(format!("{name}.rm"))).unwrap()
}

pub fn id(n: &str) -> RuleId {
    RuleId::parse(n).unwrap()
}

pub fn ids(s: &str) -> Vec<RuleId> {
    s.split_whitespace().map(id).collect()
}

const NAMES: [&str; 3] = ["A", "B", "C"];

fn random_multiset(rng: &mut ChaCha8Rng, elements: &[Element], max: usize) -> Multiset {
    let n = rng.random_range(0..=max);
    Multiset::from_elements((0..n).map(|_| elements[rng.random_range(0..elements.len())].clone()))
}

/// At most three elements, four rules, sides of size two and an initial
/// multiset of size three.
pub fn random_system(rng: &mut ChaCha8Rng) -> System {
    let k = rng.random_range(1..=3);
    let elements: Vec<Element> = NAMES[..k]
        .iter()
        .map(|n| Element::new(n).unwrap())
        .collect();
    let rule_count = rng.random_range(1..=4);
    let rules = (1..=rule_count)
        .map(|i| {
            Rule::new(
                RuleId::new(&format!("mu{i}")).unwrap(),
                random_multiset(rng, &elements, 2),
                random_multiset(rng, &elements, 2),
            )
        })
        .collect();
    let init = random_multiset(rng, &elements, 3);
    System::new(elements.into_iter().collect(), rules, init).unwrap()
}

fn random_regex(rng: &mut ChaCha8Rng, alphabet: &[RuleId], depth: u32) -> String {
    let sym = |rng: &mut ChaCha8Rng| alphabet[rng.random_range(0..alphabet.len())].to_string();
    if depth == 0 {
        return sym(rng);
    }
    match rng.random_range(0..4) {
        0 => sym(rng),
        1 => format!(
            "({} . {})",
            random_regex(rng, alphabet, depth - 1),
            random_regex(rng, alphabet, depth - 1)
        ),
        2 => format!(
            "({} | {})",
            random_regex(rng, alphabet, depth - 1),
            random_regex(rng, alphabet, depth - 1)
        ),
        _ => format!("({})*", random_regex(rng, alphabet, depth - 1)),
    }
}

/// Text of a random ω-expression: one or two lassos over the rules and ε.
pub fn random_omega_text(rng: &mut ChaCha8Rng, s: &System) -> String {
    let mut alphabet: Vec<RuleId> = s.rule_ids().cloned().collect();
    alphabet.push(RuleId::eps());
    let lassos = rng.random_range(1..=2);
    let parts: Vec<String> = (0..lassos)
        .map(|_| {
            let head = alphabet[rng.random_range(0..alphabet.len())].clone();
            let cycle = if rng.random_bool(0.5) {
                head.to_string()
            } else {
                format!("({head} . {})", random_regex(rng, &alphabet, 1))
            };
            if rng.random_bool(0.3) {
                format!("{cycle}^w")
            } else {
                format!("{} . {cycle}^w", random_regex(rng, &alphabet, 2))
            }
        })
        .collect();
    parts.join(" | ")
}

fn ranking(rng: &mut ChaCha8Rng, s: &System) -> BTreeMap<RuleId, usize> {
    let mut order: Vec<RuleId> = s.rule_ids().cloned().collect();
    order.shuffle(rng);
    order.into_iter().enumerate().map(|(i, r)| (r, i)).collect()
}

/// A well-formed random regulation of the requested class.
pub fn random_regulation(rng: &mut ChaCha8Rng, class: RegulationClass, s: &System) -> Regulation {
    let rules: Vec<RuleId> = s.rule_ids().cloned().collect();
    match class {
        RegulationClass::None => Regulation::Unregulated,
        RegulationClass::Regular => {
            let known = rules.iter().cloned().collect();
            let text = random_omega_text(rng, s);
            Regulation::regular(parse_omega(&text, &known).unwrap())
        }
        RegulationClass::Ordered => {
            let rank = ranking(rng, s);
            let mut pairs = BTreeSet::new();
            for a in &rules {
                for b in &rules {
                    if rank[a] < rank[b] && rng.random_bool(0.4) {
                        pairs.insert((a.clone(), b.clone()));
                    }
                }
            }
            Regulation::ordered(pairs)
        }
        RegulationClass::Programmed => Regulation::Programmed(SuccessorMap {
            succ: rules
                .iter()
                .map(|r| {
                    let set = rules
                        .iter()
                        .filter(|_| rng.random_bool(0.5))
                        .cloned()
                        .collect();
                    (r.clone(), set)
                })
                .collect(),
        }),
        RegulationClass::Conditional => {
            let elements: Vec<Element> = s.elements().iter().cloned().collect();
            let mut forbid = BTreeMap::new();
            for r in &rules {
                let n = rng.random_range(0..=2);
                let set: BTreeSet<Multiset> = (0..n)
                    .map(|_| {
                        let mut m = random_multiset(rng, &elements, 1);
                        m.add(elements[rng.random_range(0..elements.len())].clone(), 1);
                        m
                    })
                    .collect();
                forbid.insert(r.clone(), set);
            }
            Regulation::Conditional(ProhibitedContexts::new(forbid))
        }
        RegulationClass::ConcurrentFree => Regulation::ConcurrentFree(PriorityRelation {
            pairs: random_priority_pairs(rng, s, 0.5),
        }),
    }
}

/// Acyclic, irreflexive pairs between concurrent rules.
pub fn random_priority_pairs(
    rng: &mut ChaCha8Rng,
    s: &System,
    p: f64,
) -> BTreeSet<(RuleId, RuleId)> {
    let rank = ranking(rng, s);
    let mut pairs = BTreeSet::new();
    for a in s.rules() {
        for b in s.rules() {
            if rank[&a.id] < rank[&b.id] && a.lhs.intersects(&b.lhs) && rng.random_bool(p) {
                pairs.insert((a.id.clone(), b.id.clone()));
            }
        }
    }
    pairs
}

pub fn random_class(rng: &mut ChaCha8Rng) -> RegulationClass {
    let all = [
        RegulationClass::None,
        RegulationClass::Regular,
        RegulationClass::Ordered,
        RegulationClass::Programmed,
        RegulationClass::Conditional,
        RegulationClass::ConcurrentFree,
    ];
    all[rng.random_range(0..all.len())]
}

/// Every word of `e` with length at most `max`.
pub fn finite_words(e: &RegexExpr, max: usize) -> BTreeSet<Vec<RuleId>> {
    match e {
        RegexExpr::EmptyWord => [vec![]].into(),
        RegexExpr::Symbol(s) => {
            if max >= 1 {
                [vec![s.clone()]].into()
            } else {
                BTreeSet::new()
            }
        }
        RegexExpr::Union(items) => items.iter().flat_map(|i| finite_words(i, max)).collect(),
        RegexExpr::Concat(items) => {
            let mut acc: BTreeSet<Vec<RuleId>> = [vec![]].into();
            for item in items {
                let words = finite_words(item, max);
                acc = acc
                    .iter()
                    .flat_map(|a| {
                        words
                            .iter()
                            .filter(move |w| a.len() + w.len() <= max)
                            .map(move |w| {
                                let mut v = a.clone();
                                v.extend(w.iter().cloned());
                                v
                            })
                    })
                    .collect();
            }
            acc
        }
        RegexExpr::Star(inner) => {
            let parts: Vec<Vec<RuleId>> = finite_words(inner, max)
                .into_iter()
                .filter(|w| !w.is_empty())
                .collect();
            let mut acc: BTreeSet<Vec<RuleId>> = [vec![]].into();
            let mut frontier = vec![vec![]];
            while let Some(w) = frontier.pop() {
                for p in &parts {
                    if w.len() + p.len() <= max {
                        let mut v = w.clone();
                        v.extend(p.iter().cloned());
                        if acc.insert(v.clone()) {
                            frontier.push(v);
                        }
                    }
                }
            }
            acc
        }
    }
}

fn occurrences(e: &RegexExpr) -> usize {
    match e {
        RegexExpr::EmptyWord => 0,
        RegexExpr::Symbol(_) => 1,
        RegexExpr::Union(items) | RegexExpr::Concat(items) => items.iter().map(occurrences).sum(),
        RegexExpr::Star(inner) => occurrences(inner),
    }
}

/// Length-`len` prefixes of the infinite words denoted by `e`, computed by
/// unrolling each lasso's cycle.
///
/// Any word starting with a given prefix can be completed within as many
/// extra symbols as the expression has symbol occurrences, which bounds the
/// finite words that need listing.
pub fn omega_prefixes(e: &OmegaExpr, len: usize) -> BTreeSet<Vec<RuleId>> {
    let mut out = BTreeSet::new();
    for lasso in &e.lassos {
        let cycles: Vec<Vec<RuleId>> = finite_words(&lasso.cycle, len + occurrences(&lasso.cycle))
            .into_iter()
            .filter(|w| !w.is_empty())
            .collect();
        if cycles.is_empty() {
            continue;
        }
        let mut seen = BTreeSet::new();
        let mut frontier: Vec<Vec<RuleId>> =
            finite_words(&lasso.prefix, len + occurrences(&lasso.prefix))
                .into_iter()
                .map(|mut w| {
                    w.truncate(len);
                    w
                })
                .collect();
        while let Some(w) = frontier.pop() {
            for c in &cycles {
                let mut v = w.clone();
                v.extend(c.iter().cloned());
                v.truncate(len);
                if v.len() == len {
                    out.insert(v);
                } else if seen.insert(v.clone()) {
                    frontier.push(v);
                }
            }
        }
    }
    out
}

pub fn all_words(alphabet: &[RuleId], len: usize) -> Vec<Vec<RuleId>> {
    let mut words = vec![vec![]];
    for _ in 0..len {
        words = words
            .into_iter()
            .flat_map(|w| {
                alphabet.iter().map(move |a| {
                    let mut v = w.clone();
                    v.push(a.clone());
                    v
                })
            })
            .collect();
    }
    words
}
