//! Translations between regulation classes.

use std::collections::{BTreeMap, BTreeSet};

use crate::multiset::Multiset;
use crate::regulation::{
    PriorityRelation, ProhibitedContexts, Regulation, RegulationClass, RuleOrder, RulePair,
    SuccessorMap,
};
use crate::rewriting::{RuleId, System};

/// Ordered to programmed: a rule may follow `μ` unless it lies below `μ` in
/// the order.
pub fn or_to_pr(s: &System, order: &RuleOrder) -> (System, SuccessorMap) {
    let succ = s
        .rule_ids()
        .map(|mu| {
            let allowed = s
                .rule_ids()
                .filter(|nu| !order.less(nu, mu))
                .cloned()
                .collect();
            (mu.clone(), allowed)
        })
        .collect();
    (s.clone(), SuccessorMap { succ })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfrTranslation {
    pub system: System,
    pub contexts: ProhibitedContexts,
    /// Rules dropped because a prioritised rule is enabled whenever they are.
    pub removed: Vec<RuleId>,
}

/// Concurrent-free to conditional, processing pairs in lexicographic order.
pub fn cfr_to_cr(s: &System, rel: &PriorityRelation) -> CfrTranslation {
    let pairs: Vec<RulePair> = rel.pairs.iter().cloned().collect();
    cfr_to_cr_in_order(s, &pairs)
}

/// Same as [`cfr_to_cr`] with an explicit pair processing order.
///
/// A removed rule keeps acting as a winner: rules it beats still get its
/// left side as a prohibited context, since it stays enabled in exactly the
/// same states.
pub fn cfr_to_cr_in_order(s: &System, pairs: &[RulePair]) -> CfrTranslation {
    let mut removed: Vec<RuleId> = Vec::new();
    let mut forbid: BTreeMap<RuleId, BTreeSet<Multiset>> = BTreeMap::new();
    for (loser, winner) in pairs {
        if removed.contains(loser) {
            continue;
        }
        let (Some(l), Some(w)) = (s.rule(loser), s.rule(winner)) else {
            continue;
        };
        if w.lhs.is_subset(&l.lhs) {
            removed.push(loser.clone());
            forbid.remove(loser);
        } else {
            forbid
                .entry(loser.clone())
                .or_default()
                .insert(w.lhs.clone());
        }
    }
    let gone: BTreeSet<RuleId> = removed.iter().cloned().collect();
    CfrTranslation {
        system: s.without_rules(&gone),
        contexts: ProhibitedContexts::new(forbid),
        removed,
    }
}

pub fn attach_neutral(s: &System, class: RegulationClass) -> (System, Regulation) {
    (s.clone(), Regulation::neutral(class, s))
}
