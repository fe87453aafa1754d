//! Rules, systems and unregulated rule application.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::multiset::{is_valid_token, Element, Multiset, RESERVED_EPS};

/// Identifier of a rule. The name `eps` denotes the built-in empty rule.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleId(Arc<str>);

impl RuleId {
    /// Identifier for a user rule; rejects malformed names and `eps`.
    pub fn new(name: &str) -> Result<Self, RewriteError> {
        if !is_valid_token(name) {
            return Err(RewriteError::InvalidRuleName(name.to_string()));
        }
        if name == RESERVED_EPS {
            return Err(RewriteError::ReservedName);
        }
        Ok(RuleId(Arc::from(name)))
    }

    /// Accepts `eps` as well as user rule names.
    pub fn parse(name: &str) -> Result<Self, RewriteError> {
        if name == RESERVED_EPS {
            Ok(Self::eps())
        } else {
            Self::new(name)
        }
    }

    pub fn eps() -> Self {
        RuleId(Arc::from(RESERVED_EPS))
    }

    pub fn is_eps(&self) -> bool {
        &*self.0 == RESERVED_EPS
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("rule `{0}` is not enabled")]
    RuleNotEnabled(RuleId),
    #[error("invalid rule name `{0}`")]
    InvalidRuleName(String),
    #[error("`eps` is reserved for the empty rule")]
    ReservedName,
    #[error("duplicate rule `{0}`")]
    DuplicateRule(RuleId),
    #[error("element `{element}` used by {context} is not declared")]
    UnknownElement { element: Element, context: String },
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
}

/// A rewriting rule `id: lhs -> rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub id: RuleId,
    pub lhs: Multiset,
    pub rhs: Multiset,
}

impl Rule {
    pub fn new(id: RuleId, lhs: Multiset, rhs: Multiset) -> Self {
        Rule { id, lhs, rhs }
    }

    /// The empty rule `(∅, ∅)`.
    pub fn eps() -> Self {
        Rule::new(RuleId::eps(), Multiset::new(), Multiset::new())
    }

    pub fn is_eps(&self) -> bool {
        self.id.is_eps()
    }

    pub fn enabled(&self, m: &Multiset) -> bool {
        self.lhs.is_subset(m)
    }

    /// `(m ∖ lhs) + rhs`.
    pub fn apply(&self, m: &Multiset) -> Result<Multiset, RewriteError> {
        let rest = m
            .difference(&self.lhs)
            .map_err(|_| RewriteError::RuleNotEnabled(self.id.clone()))?;
        Ok(rest.sum(&self.rhs))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} -> {}", self.id, self.lhs, self.rhs)
    }
}

/// An unregulated multiset rewriting system. The empty rule is implicit and
/// never stored in `rules`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct System {
    elements: BTreeSet<Element>,
    rules: Vec<Rule>,
    init: Multiset,
    index: BTreeMap<RuleId, usize>,
}

impl System {
    pub fn new(
        elements: BTreeSet<Element>,
        rules: Vec<Rule>,
        init: Multiset,
    ) -> Result<Self, RewriteError> {
        let check = |m: &Multiset, context: &dyn Fn() -> String| {
            m.support()
                .find(|e| !elements.contains(*e))
                .map(|e| RewriteError::UnknownElement {
                    element: e.clone(),
                    context: context(),
                })
        };
        if let Some(err) = check(&init, &|| "the initial multiset".to_string()) {
            return Err(err);
        }
        let mut index = BTreeMap::new();
        for (i, r) in rules.iter().enumerate() {
            if r.is_eps() {
                return Err(RewriteError::ReservedName);
            }
            if index.insert(r.id.clone(), i).is_some() {
                return Err(RewriteError::DuplicateRule(r.id.clone()));
            }
            for side in [&r.lhs, &r.rhs] {
                if let Some(err) = check(side, &|| format!("rule `{}`", r.id)) {
                    return Err(err);
                }
            }
        }
        Ok(System {
            elements,
            rules,
            init,
            index,
        })
    }

    pub fn elements(&self) -> &BTreeSet<Element> {
        &self.elements
    }

    /// User rules in declaration order (ε excluded).
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn init(&self) -> &Multiset {
        &self.init
    }

    pub fn rule(&self, id: &RuleId) -> Option<&Rule> {
        self.index.get(id).map(|&i| &self.rules[i])
    }

    /// Declaration position of a rule; ε sorts after every user rule.
    pub fn rule_position(&self, id: &RuleId) -> Option<usize> {
        if id.is_eps() {
            Some(self.rules.len())
        } else {
            self.index.get(id).copied()
        }
    }

    pub fn has_rule(&self, id: &RuleId) -> bool {
        id.is_eps() || self.index.contains_key(id)
    }

    pub fn rule_ids(&self) -> impl Iterator<Item = &RuleId> + '_ {
        self.rules.iter().map(|r| &r.id)
    }

    pub fn with_init(&self, init: Multiset) -> Result<Self, RewriteError> {
        System::new(self.elements.clone(), self.rules.clone(), init)
    }

    /// Same system with the listed rules dropped.
    pub fn without_rules(&self, removed: &BTreeSet<RuleId>) -> Self {
        let rules = self
            .rules
            .iter()
            .filter(|r| !removed.contains(&r.id))
            .cloned()
            .collect();
        System::new(self.elements.clone(), rules, self.init.clone())
            .expect("subset of a valid system is valid")
    }

    /// Non-ε rules whose left side is contained in `m`, in declaration order.
    pub fn multiset_enabled_rules<'a>(
        &'a self,
        m: &'a Multiset,
    ) -> impl Iterator<Item = &'a Rule> + 'a {
        self.rules.iter().filter(move |r| r.enabled(m))
    }
}

/// A finite prefix of a run: `states[i] -labels[i]-> states[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RunPrefix {
    pub states: Vec<Multiset>,
    pub labels: Vec<RuleId>,
}

impl RunPrefix {
    pub fn start(init: Multiset) -> Self {
        RunPrefix {
            states: vec![init],
            labels: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn last_state(&self) -> &Multiset {
        self.states.last().expect("a run prefix always has a state")
    }

    pub fn push(&mut self, label: RuleId, state: Multiset) {
        self.labels.push(label);
        self.states.push(state);
    }

    /// `state0 -mu-> state1 -mu-> ...`
    pub fn render(&self) -> String {
        let mut out = self.states[0].to_string();
        for (label, state) in self.labels.iter().zip(&self.states[1..]) {
            out.push_str(&format!(" -{label}-> {state}"));
        }
        out
    }

    pub fn render_states(&self) -> String {
        render_state_sequence(&self.states)
    }

    pub fn render_labels(&self) -> String {
        self.labels
            .iter()
            .map(RuleId::as_str)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn render_state_sequence(states: &[Multiset]) -> String {
    states
        .iter()
        .map(Multiset::to_string)
        .collect::<Vec<_>>()
        .join(" -> ")
}
