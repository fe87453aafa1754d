//! The five regulation mechanisms: well-formedness checks, per-step
//! permission and the memory each mechanism carries between steps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::multiset::Multiset;
use crate::omega::{BuchiAutomaton, OmegaExpr, StateSet};
use crate::rewriting::{RuleId, System};

pub type RulePair = (RuleId, RuleId);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegulationError {
    #[error("unknown rule `{0}`")]
    UnknownRule(RuleId),
    #[error("regulation memory does not match the regulation class")]
    MemoryMismatch,
}

/// Regulation classes, plus `None` for unregulated systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegulationClass {
    None,
    Regular,
    Ordered,
    Programmed,
    Conditional,
    ConcurrentFree,
}

impl RegulationClass {
    pub const REGULATED: [RegulationClass; 5] = [
        RegulationClass::Regular,
        RegulationClass::Ordered,
        RegulationClass::Programmed,
        RegulationClass::Conditional,
        RegulationClass::ConcurrentFree,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            RegulationClass::None => "none",
            RegulationClass::Regular => "regular",
            RegulationClass::Ordered => "ordered",
            RegulationClass::Programmed => "programmed",
            RegulationClass::Conditional => "conditional",
            RegulationClass::ConcurrentFree => "concurrent-free",
        }
    }
}

impl fmt::Display for RegulationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for RegulationClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [RegulationClass::None]
            .into_iter()
            .chain(RegulationClass::REGULATED)
            .find(|c| c.keyword() == s)
            .ok_or_else(|| format!("unknown regulation class `{s}`"))
    }
}

/// ω-regular language of admissible run labels.
#[derive(Debug, Clone)]
pub struct RegularLanguage {
    expr: OmegaExpr,
    automaton: BuchiAutomaton,
}

impl RegularLanguage {
    pub fn new(expr: OmegaExpr) -> Self {
        let automaton = BuchiAutomaton::from_omega(&expr);
        RegularLanguage { expr, automaton }
    }

    pub fn expr(&self) -> &OmegaExpr {
        &self.expr
    }

    pub fn automaton(&self) -> &BuchiAutomaton {
        &self.automaton
    }
}

impl PartialEq for RegularLanguage {
    fn eq(&self, other: &Self) -> bool {
        self.expr == other.expr
    }
}

impl Eq for RegularLanguage {}

/// Generating pairs of a strict order; `(a, b)` means `a < b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleOrder {
    pairs: BTreeSet<RulePair>,
    closure: BTreeSet<RulePair>,
}

impl RuleOrder {
    pub fn new(pairs: BTreeSet<RulePair>) -> Self {
        let closure = transitive_closure(&pairs);
        RuleOrder { pairs, closure }
    }

    pub fn pairs(&self) -> &BTreeSet<RulePair> {
        &self.pairs
    }

    pub fn closure(&self) -> &BTreeSet<RulePair> {
        &self.closure
    }

    pub fn less(&self, a: &RuleId, b: &RuleId) -> bool {
        self.closure.contains(&(a.clone(), b.clone()))
    }
}

/// Successor sets keyed by rule.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SuccessorMap {
    pub succ: BTreeMap<RuleId, BTreeSet<RuleId>>,
}

/// Prohibited contexts keyed by rule. Rules without an entry have none;
/// empty entries are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProhibitedContexts {
    forbid: BTreeMap<RuleId, BTreeSet<Multiset>>,
}

impl ProhibitedContexts {
    pub fn new(forbid: BTreeMap<RuleId, BTreeSet<Multiset>>) -> Self {
        ProhibitedContexts {
            forbid: forbid.into_iter().filter(|(_, v)| !v.is_empty()).collect(),
        }
    }

    pub fn contexts(&self, rule: &RuleId) -> impl Iterator<Item = &Multiset> + '_ {
        self.forbid.get(rule).into_iter().flatten()
    }

    pub fn add(&mut self, rule: RuleId, context: Multiset) {
        self.forbid.entry(rule).or_default().insert(context);
    }

    pub fn remove_rule(&mut self, rule: &RuleId) {
        self.forbid.remove(rule);
    }

    pub fn entries(&self) -> impl Iterator<Item = (&RuleId, &BTreeSet<Multiset>)> + '_ {
        self.forbid.iter()
    }
}

/// Priority relation; `(loser, winner)` blocks `loser` while `winner` is enabled.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PriorityRelation {
    pub pairs: BTreeSet<RulePair>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regulation {
    Unregulated,
    Regular(RegularLanguage),
    Ordered(RuleOrder),
    Programmed(SuccessorMap),
    Conditional(ProhibitedContexts),
    ConcurrentFree(PriorityRelation),
}

/// What a regulation remembers between steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegulationMemory {
    NoMemory,
    /// Last non-ε rule applied, absent before the first one.
    LastRule(Option<RuleId>),
    AutomatonStates(StateSet),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    UnknownRule { rule: RuleId, context: &'static str },
    EpsNotAllowed { context: &'static str },
    OrderCycle { rules: Vec<RuleId> },
    Reflexive(RuleId),
    NotConcurrent(RuleId, RuleId),
    PriorityCycle(RuleId, RuleId),
    MissingSuccessors(RuleId),
    EmptyLanguage,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UnknownRule { rule, context } => {
                write!(f, "unknown rule `{rule}` in {context}")
            }
            Diagnostic::EpsNotAllowed { context } => {
                write!(
                    f,
                    "`eps` cannot appear in {context}; it is handled implicitly"
                )
            }
            Diagnostic::OrderCycle { rules } => {
                let names: Vec<_> = rules.iter().map(RuleId::as_str).collect();
                write!(f, "order is not strict: cycle through {}", names.join(", "))
            }
            Diagnostic::Reflexive(r) => write!(f, "rule `{r}` is given priority over itself"),
            Diagnostic::NotConcurrent(a, b) => {
                write!(
                    f,
                    "rules `{a}` and `{b}` are not concurrent (left sides share no element)"
                )
            }
            Diagnostic::PriorityCycle(a, b) => {
                write!(f, "priority between `{a}` and `{b}` is cyclic")
            }
            Diagnostic::MissingSuccessors(r) => {
                write!(f, "rule `{r}` has no successor set")
            }
            Diagnostic::EmptyLanguage => f.write_str("the ω-regular language is empty"),
        }
    }
}

pub fn transitive_closure(pairs: &BTreeSet<RulePair>) -> BTreeSet<RulePair> {
    let mut adj: BTreeMap<&RuleId, Vec<&RuleId>> = BTreeMap::new();
    for (a, b) in pairs {
        adj.entry(a).or_default().push(b);
    }
    let mut out = BTreeSet::new();
    for &start in adj.keys() {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&RuleId> = adj[start].clone();
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                out.insert((start.clone(), n.clone()));
                if let Some(next) = adj.get(n) {
                    stack.extend(next.iter().copied());
                }
            }
        }
    }
    out
}

impl Regulation {
    pub fn class(&self) -> RegulationClass {
        match self {
            Regulation::Unregulated => RegulationClass::None,
            Regulation::Regular(_) => RegulationClass::Regular,
            Regulation::Ordered(_) => RegulationClass::Ordered,
            Regulation::Programmed(_) => RegulationClass::Programmed,
            Regulation::Conditional(_) => RegulationClass::Conditional,
            Regulation::ConcurrentFree(_) => RegulationClass::ConcurrentFree,
        }
    }

    pub fn regular(expr: OmegaExpr) -> Self {
        Regulation::Regular(RegularLanguage::new(expr))
    }

    pub fn ordered(pairs: BTreeSet<RulePair>) -> Self {
        Regulation::Ordered(RuleOrder::new(pairs))
    }

    /// The regulation of `class` that restricts nothing on `s`.
    pub fn neutral(class: RegulationClass, s: &System) -> Self {
        match class {
            RegulationClass::None => Regulation::Unregulated,
            RegulationClass::Regular => {
                let mut alphabet: Vec<RuleId> = s.rule_ids().cloned().collect();
                alphabet.push(RuleId::eps());
                Regulation::regular(OmegaExpr::universal(&alphabet))
            }
            RegulationClass::Ordered => Regulation::ordered(BTreeSet::new()),
            RegulationClass::Programmed => {
                let all: BTreeSet<RuleId> = s.rule_ids().cloned().collect();
                Regulation::Programmed(SuccessorMap {
                    succ: all.iter().map(|r| (r.clone(), all.clone())).collect(),
                })
            }
            RegulationClass::Conditional => Regulation::Conditional(ProhibitedContexts::default()),
            RegulationClass::ConcurrentFree => {
                Regulation::ConcurrentFree(PriorityRelation::default())
            }
        }
    }

    /// Well-formedness of the regulation against `s`; empty means valid.
    pub fn validate(&self, s: &System) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let check_rule = |r: &RuleId, context: &'static str, out: &mut Vec<Diagnostic>| {
            if r.is_eps() {
                out.push(Diagnostic::EpsNotAllowed { context });
                false
            } else if s.rule(r).is_none() {
                out.push(Diagnostic::UnknownRule {
                    rule: r.clone(),
                    context,
                });
                false
            } else {
                true
            }
        };
        match self {
            Regulation::Unregulated => {}
            Regulation::Regular(lang) => {
                for sym in lang.expr.symbols() {
                    if !s.has_rule(&sym) {
                        out.push(Diagnostic::UnknownRule {
                            rule: sym,
                            context: "the ω-regular expression",
                        });
                    }
                }
                if lang.automaton.initial_states().is_empty() {
                    out.push(Diagnostic::EmptyLanguage);
                }
            }
            Regulation::Ordered(order) => {
                for (a, b) in &order.pairs {
                    check_rule(a, "the order", &mut out);
                    check_rule(b, "the order", &mut out);
                }
                let cyclic: Vec<RuleId> = order
                    .closure
                    .iter()
                    .filter(|(a, b)| a == b)
                    .map(|(a, _)| a.clone())
                    .collect();
                if !cyclic.is_empty() {
                    out.push(Diagnostic::OrderCycle { rules: cyclic });
                }
            }
            Regulation::Programmed(map) => {
                for (rule, succ) in &map.succ {
                    check_rule(rule, "the successor function", &mut out);
                    for t in succ {
                        check_rule(t, "a successor set", &mut out);
                    }
                }
                for r in s.rule_ids() {
                    if !map.succ.contains_key(r) {
                        out.push(Diagnostic::MissingSuccessors(r.clone()));
                    }
                }
            }
            Regulation::Conditional(ctx) => {
                for (rule, _) in ctx.entries() {
                    check_rule(rule, "the prohibited contexts", &mut out);
                }
            }
            Regulation::ConcurrentFree(rel) => {
                let closure = transitive_closure(&rel.pairs);
                for (a, b) in &rel.pairs {
                    let known = check_rule(a, "the priority relation", &mut out)
                        & check_rule(b, "the priority relation", &mut out);
                    if a == b {
                        out.push(Diagnostic::Reflexive(a.clone()));
                        continue;
                    }
                    if known {
                        let (ra, rb) = (s.rule(a).unwrap(), s.rule(b).unwrap());
                        if !ra.lhs.intersects(&rb.lhs) {
                            out.push(Diagnostic::NotConcurrent(a.clone(), b.clone()));
                        }
                    }
                    if closure.contains(&(b.clone(), a.clone())) {
                        out.push(Diagnostic::PriorityCycle(a.clone(), b.clone()));
                    }
                }
            }
        }
        out
    }

    pub fn init_memory(&self) -> RegulationMemory {
        match self {
            Regulation::Ordered(_) | Regulation::Programmed(_) => RegulationMemory::LastRule(None),
            Regulation::Regular(lang) => {
                RegulationMemory::AutomatonStates(lang.automaton.initial_states())
            }
            _ => RegulationMemory::NoMemory,
        }
    }

    /// Whether the regulation lets `candidate` fire at `state`.
    ///
    /// `enabled_now` lists the non-ε rules whose left sides are contained in
    /// `state`. The ε rule is always allowed by the memoryless and rule-order
    /// classes; whether it is actually applicable is decided by the explorer.
    pub fn permits(
        &self,
        s: &System,
        mem: &RegulationMemory,
        state: &Multiset,
        candidate: &RuleId,
        enabled_now: &[RuleId],
    ) -> Result<bool, RegulationError> {
        if !s.has_rule(candidate) {
            return Err(RegulationError::UnknownRule(candidate.clone()));
        }
        if let Regulation::Regular(lang) = self {
            let RegulationMemory::AutomatonStates(qs) = mem else {
                return Err(RegulationError::MemoryMismatch);
            };
            return Ok(!lang.automaton.step_states(qs, candidate).is_empty());
        }
        if candidate.is_eps() {
            return Ok(true);
        }
        Ok(match self {
            Regulation::Unregulated => true,
            Regulation::Ordered(order) => match mem {
                RegulationMemory::LastRule(None) => true,
                RegulationMemory::LastRule(Some(last)) => !order.less(candidate, last),
                _ => return Err(RegulationError::MemoryMismatch),
            },
            Regulation::Programmed(map) => match mem {
                RegulationMemory::LastRule(None) => true,
                RegulationMemory::LastRule(Some(last)) => map
                    .succ
                    .get(last)
                    .is_some_and(|succ| succ.contains(candidate)),
                _ => return Err(RegulationError::MemoryMismatch),
            },
            Regulation::Conditional(ctx) => ctx.contexts(candidate).all(|a| !a.is_subset(state)),
            Regulation::ConcurrentFree(rel) => enabled_now
                .iter()
                .all(|m| !rel.pairs.contains(&(candidate.clone(), m.clone()))),
            Regulation::Regular(_) => unreachable!(),
        })
    }

    /// Memory after `applied` fired. ε leaves rule-order memory untouched.
    pub fn advance_memory(&self, mem: &RegulationMemory, applied: &RuleId) -> RegulationMemory {
        match (self, mem) {
            (Regulation::Regular(lang), RegulationMemory::AutomatonStates(qs)) => {
                RegulationMemory::AutomatonStates(lang.automaton.step_states(qs, applied))
            }
            (Regulation::Ordered(_) | Regulation::Programmed(_), _) if !applied.is_eps() => {
                RegulationMemory::LastRule(Some(applied.clone()))
            }
            _ => mem.clone(),
        }
    }
}
