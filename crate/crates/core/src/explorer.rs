//! Step semantics with the ε fallback, run validation and bounded
//! exploration of regulated systems.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::multiset::{Element, Multiset};
use crate::regulation::{Regulation, RegulationError, RegulationMemory};
use crate::rewriting::{RuleId, RunPrefix, System};

pub const DEFAULT_MAX_CONFIGS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("exploration limit of {limit} configurations exceeded at depth {depth}")]
    ExplosionLimit { limit: usize, depth: usize },
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("rule `{0}` is not applicable")]
    NotApplicable(RuleId),
    #[error("element `{0}` is not part of the system")]
    UnknownElement(Element),
    #[error(transparent)]
    Regulation(#[from] RegulationError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: Multiset,
    pub memory: RegulationMemory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailReason {
    NotEnabled,
    RegulationForbids,
    EpsNotFallback,
    AutomatonDead,
}

impl fmt::Display for FailReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailReason::NotEnabled => "rule not enabled",
            FailReason::RegulationForbids => "forbidden by the regulation",
            FailReason::EpsNotFallback => "eps used while another rule is applicable",
            FailReason::AutomatonDead => "label sequence leaves the regular language",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunVerdict {
    Valid,
    /// `step` is 1-based; a failing `eps^w` tail is reported one past the labels.
    Invalid {
        step: usize,
        reason: FailReason,
    },
}

impl fmt::Display for RunVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunVerdict::Valid => f.write_str("valid"),
            RunVerdict::Invalid { step, reason } => write!(f, "invalid at step {step}: {reason}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// A run present on exactly one side of a bounded comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub side: Side,
    pub states: Vec<Multiset>,
    pub labels: Vec<RuleId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivResult {
    pub equal: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalOutputs {
    pub max: Option<u32>,
    pub values: BTreeSet<u32>,
    pub all_terminated: bool,
}

#[derive(Clone, Copy)]
pub struct Explorer<'a> {
    system: &'a System,
    regulation: &'a Regulation,
    max_configs: usize,
}

impl<'a> Explorer<'a> {
    pub fn new(system: &'a System, regulation: &'a Regulation) -> Self {
        Explorer {
            system,
            regulation,
            max_configs: DEFAULT_MAX_CONFIGS,
        }
    }

    pub fn with_max_configs(mut self, max_configs: usize) -> Self {
        self.max_configs = max_configs;
        self
    }

    pub fn system(&self) -> &'a System {
        self.system
    }

    pub fn regulation(&self) -> &'a Regulation {
        self.regulation
    }

    pub fn initial(&self) -> Configuration {
        Configuration {
            state: self.system.init().clone(),
            memory: self.regulation.init_memory(),
        }
    }

    /// Applicable rules in declaration order. ε appears only when nothing
    /// else is applicable and the regulation allows it.
    pub fn applicable(&self, c: &Configuration) -> Result<Vec<RuleId>, ExploreError> {
        let enabled: Vec<RuleId> = self
            .system
            .multiset_enabled_rules(&c.state)
            .map(|r| r.id.clone())
            .collect();
        let mut out = Vec::new();
        for r in &enabled {
            if self
                .regulation
                .permits(self.system, &c.memory, &c.state, r, &enabled)?
            {
                out.push(r.clone());
            }
        }
        if out.is_empty() {
            let eps = RuleId::eps();
            if self
                .regulation
                .permits(self.system, &c.memory, &c.state, &eps, &enabled)?
            {
                out.push(eps);
            }
        }
        Ok(out)
    }

    pub fn step(&self, c: &Configuration, r: &RuleId) -> Result<Configuration, ExploreError> {
        if !self.system.has_rule(r) {
            return Err(ExploreError::UnknownRule(r.to_string()));
        }
        if !self.applicable(c)?.contains(r) {
            return Err(ExploreError::NotApplicable(r.clone()));
        }
        Ok(self.fire(c, r))
    }

    fn fire(&self, c: &Configuration, r: &RuleId) -> Configuration {
        let state = match self.system.rule(r) {
            Some(rule) => rule.apply(&c.state).expect("fired rules are enabled"),
            None => c.state.clone(),
        };
        Configuration {
            state,
            memory: self.regulation.advance_memory(&c.memory, r),
        }
    }

    /// True when the run may continue with ε forever from `c`.
    pub fn eps_absorbing(&self, c: &Configuration) -> Result<bool, ExploreError> {
        let eps = RuleId::eps();
        let Regulation::Regular(lang) = self.regulation else {
            return Ok(self.applicable(c)? == [eps]);
        };
        let RegulationMemory::AutomatonStates(start) = &c.memory else {
            return Err(RegulationError::MemoryMismatch.into());
        };
        if !lang.automaton().accepts_repeated(start, &eps) {
            return Ok(false);
        }
        // ε never changes the state, so only the automaton part can evolve.
        let mut seen = HashSet::new();
        let mut cur = c.clone();
        while seen.insert(cur.memory.clone()) {
            if self.applicable(&cur)? != [eps.clone()] {
                return Ok(false);
            }
            cur = self.fire(&cur, &eps);
        }
        Ok(true)
    }

    /// Replays `labels` from the initial configuration.
    pub fn validate_run(
        &self,
        labels: &[RuleId],
        omega_eps_tail: bool,
    ) -> Result<RunVerdict, ExploreError> {
        let regular = matches!(self.regulation, Regulation::Regular(_));
        let mut c = self.initial();
        for (i, label) in labels.iter().enumerate() {
            let step = i + 1;
            let Some(pos) = self.system.rule_position(label) else {
                return Err(ExploreError::UnknownRule(label.to_string()));
            };
            if let Some(rule) = self.system.rules().get(pos) {
                if !rule.enabled(&c.state) {
                    return Ok(RunVerdict::Invalid {
                        step,
                        reason: FailReason::NotEnabled,
                    });
                }
            }
            let app = self.applicable(&c)?;
            if !app.contains(label) {
                let reason = if label.is_eps() && !app.is_empty() {
                    FailReason::EpsNotFallback
                } else if regular {
                    FailReason::AutomatonDead
                } else {
                    FailReason::RegulationForbids
                };
                return Ok(RunVerdict::Invalid { step, reason });
            }
            c = self.fire(&c, label);
        }
        if omega_eps_tail && !self.eps_absorbing(&c)? {
            let app = self.applicable(&c)?;
            let reason = if app.iter().any(|r| !r.is_eps()) {
                FailReason::EpsNotFallback
            } else {
                FailReason::AutomatonDead
            };
            return Ok(RunVerdict::Invalid {
                step: labels.len() + 1,
                reason,
            });
        }
        Ok(RunVerdict::Valid)
    }

    /// Successor lists for a batch of distinct configurations, in input order.
    fn expand(
        &self,
        configs: &[Configuration],
    ) -> Result<Vec<Vec<(RuleId, Configuration)>>, ExploreError> {
        configs
            .par_iter()
            .map(|c| {
                Ok(self
                    .applicable(c)?
                    .into_iter()
                    .map(|r| {
                        let next = self.fire(c, &r);
                        (r, next)
                    })
                    .collect())
            })
            .collect()
    }

    fn check_cap(&self, size: usize, depth: usize) -> Result<(), ExploreError> {
        if size > self.max_configs {
            Err(ExploreError::ExplosionLimit {
                limit: self.max_configs,
                depth,
            })
        } else {
            Ok(())
        }
    }

    /// All run prefixes of exactly `depth` steps, lexicographic by rule
    /// declaration order with ε last. Prefixes that reach a dead end are
    /// dropped.
    pub fn enumerate(&self, depth: usize) -> Result<Vec<RunPrefix>, ExploreError> {
        let init = self.initial();
        let mut frontier = vec![(RunPrefix::start(init.state.clone()), init)];
        for level in 1..=depth {
            let mut index: BTreeMap<&Configuration, usize> = BTreeMap::new();
            let mut distinct = Vec::new();
            for (_, c) in &frontier {
                index.entry(c).or_insert_with(|| {
                    distinct.push(c.clone());
                    distinct.len() - 1
                });
            }
            let succ = self.expand(&distinct)?;
            let total: usize = frontier.iter().map(|(_, c)| succ[index[c]].len()).sum();
            self.check_cap(total, level)?;
            let mut next = Vec::with_capacity(total);
            for (prefix, c) in &frontier {
                for (r, nc) in &succ[index[c]] {
                    let mut p = prefix.clone();
                    p.push(r.clone(), nc.state.clone());
                    next.push((p, nc.clone()));
                }
            }
            frontier = next;
        }
        Ok(frontier.into_iter().map(|(p, _)| p).collect())
    }

    /// Distinct configurations reachable in exactly `k` steps, for each `k ≤ depth`.
    pub fn configurations_by_level(
        &self,
        depth: usize,
    ) -> Result<Vec<Vec<Configuration>>, ExploreError> {
        let mut levels = vec![vec![self.initial()]];
        for level in 1..=depth {
            let succ = self.expand(levels.last().unwrap())?;
            let next: BTreeSet<Configuration> =
                succ.into_iter().flatten().map(|(_, c)| c).collect();
            self.check_cap(next.len(), level)?;
            levels.push(next.into_iter().collect());
        }
        Ok(levels)
    }

    /// Output counts at configurations that can only idle with ε, within `depth` steps.
    pub fn terminal_outputs(
        &self,
        out: &Element,
        depth: usize,
    ) -> Result<TerminalOutputs, ExploreError> {
        if !self.system.elements().contains(out) {
            return Err(ExploreError::UnknownElement(out.clone()));
        }
        let mut values = BTreeSet::new();
        let mut frontier = vec![self.initial()];
        for level in 0..=depth {
            let flags: Vec<bool> = frontier
                .par_iter()
                .map(|c| self.eps_absorbing(c))
                .collect::<Result<_, _>>()?;
            let mut open = Vec::new();
            for (c, terminal) in frontier.into_iter().zip(flags) {
                if terminal {
                    values.insert(c.state.multiplicity(out));
                } else {
                    open.push(c);
                }
            }
            if level == depth || open.is_empty() {
                return Ok(TerminalOutputs {
                    max: values.iter().max().copied(),
                    values,
                    all_terminated: open.is_empty(),
                });
            }
            let next: BTreeSet<Configuration> = self
                .expand(&open)?
                .into_iter()
                .flatten()
                .map(|(_, c)| c)
                .collect();
            self.check_cap(next.len(), level + 1)?;
            frontier = next.into_iter().collect();
        }
        unreachable!("loop returns at the last level")
    }

    /// Shortest label words the regular language allows that no run of at
    /// most `depth` steps realizes. Empty for other classes.
    pub fn unrealized_viable_prefixes(
        &self,
        depth: usize,
    ) -> Result<Vec<Vec<RuleId>>, ExploreError> {
        let Regulation::Regular(lang) = self.regulation else {
            return Ok(Vec::new());
        };
        let automaton = lang.automaton();
        let mut realized: HashSet<Vec<RuleId>> = HashSet::new();
        for k in 0..=depth {
            for p in self.enumerate(k)? {
                realized.insert(p.labels);
            }
        }
        let mut missing = Vec::new();
        let mut frontier = vec![(Vec::new(), automaton.initial_states())];
        for _ in 0..depth {
            let mut next = Vec::new();
            for (word, qs) in &frontier {
                for sym in automaton.alphabet() {
                    let qn = automaton.step_states(qs, sym);
                    if qn.is_empty() {
                        continue;
                    }
                    let mut w: Vec<RuleId> = word.clone();
                    w.push(sym.clone());
                    if realized.contains(&w) {
                        next.push((w, qn));
                    } else {
                        missing.push(w);
                    }
                }
            }
            frontier = next;
        }
        Ok(missing)
    }

    /// A walk of up to `steps` steps choosing uniformly among applicable
    /// rules; stops early at a dead end.
    pub fn random_walk<R: Rng + ?Sized>(
        &self,
        steps: usize,
        rng: &mut R,
    ) -> Result<RunPrefix, ExploreError> {
        let mut c = self.initial();
        let mut run = RunPrefix::start(c.state.clone());
        for _ in 0..steps {
            let app = self.applicable(&c)?;
            if app.is_empty() {
                break;
            }
            let r = &app[rng.random_range(0..app.len())];
            c = self.fire(&c, r);
            run.push(r.clone(), c.state.clone());
        }
        Ok(run)
    }
}

/// Compares the label-free run sets of two regulated systems up to `depth`.
///
/// On inequality the witness is a run on one side only, chosen by the
/// earliest position at which it leaves the other side's runs, preferring a
/// real state change over an ε stutter there, then side A, then
/// enumeration order.
pub fn bounded_equiv(
    a: &Explorer<'_>,
    b: &Explorer<'_>,
    depth: usize,
) -> Result<EquivResult, ExploreError> {
    let runs_a = a.enumerate(depth)?;
    let runs_b = b.enumerate(depth)?;
    let seqs = |runs: &[RunPrefix]| -> HashSet<Vec<Multiset>> {
        runs.iter().map(|r| r.states.clone()).collect()
    };
    let (set_a, set_b) = (seqs(&runs_a), seqs(&runs_b));
    if set_a == set_b {
        return Ok(EquivResult {
            equal: true,
            witness: None,
        });
    }
    let prefixes = |set: &HashSet<Vec<Multiset>>| -> HashSet<Vec<Multiset>> {
        set.iter()
            .flat_map(|s| (1..=s.len()).map(move |k| s[..k].to_vec()))
            .collect()
    };
    let (pre_a, pre_b) = (prefixes(&set_a), prefixes(&set_b));
    let mut best: Option<((usize, bool, u8, usize), Witness)> = None;
    for (side, runs, other, rank) in [
        (Side::A, &runs_a, &pre_b, 0u8),
        (Side::B, &runs_b, &pre_a, 1u8),
    ] {
        for (i, run) in runs.iter().enumerate() {
            let Some(k) = (1..=run.states.len()).find(|&k| !other.contains(&run.states[..k]))
            else {
                continue;
            };
            let pos = k - 1;
            let stutter = pos > 0 && run.states[pos] == run.states[pos - 1];
            let key = (pos, stutter, rank, i);
            if best.as_ref().is_none_or(|(b, _)| key < *b) {
                best = Some((
                    key,
                    Witness {
                        side,
                        states: run.states.clone(),
                        labels: run.labels.clone(),
                    },
                ));
            }
        }
    }
    Ok(EquivResult {
        equal: false,
        witness: best.map(|(_, w)| w),
    })
}
