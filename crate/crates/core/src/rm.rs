//! Two-counter register machines: parser, interpreter and compilation to
//! conditional and concurrent-free systems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::multiset::{Element, Multiset};
use crate::regulation::{PriorityRelation, ProhibitedContexts, Regulation};
use crate::rewriting::{Rule, RuleId, System};

pub const DEFAULT_BUDGET: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RmError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: jump target l{target} is out of range")]
    BadTarget { line: usize, target: usize },
    #[error("program has no final halt instruction")]
    MissingHalt,
    #[error("line {line}: halt must be the last instruction")]
    MisplacedHalt { line: usize },
    #[error("step budget of {0} exhausted before halting")]
    BudgetExceeded(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instruction {
    Inc {
        counter: u8,
        goto: usize,
    },
    DecOrJz {
        counter: u8,
        zero_goto: usize,
        dec_goto: usize,
    },
    Halt,
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Instruction::Inc { counter, goto } => write!(f, "inc c{counter} goto l{goto}"),
            Instruction::DecOrJz {
                counter,
                zero_goto,
                dec_goto,
            } => write!(
                f,
                "if c{counter} = 0 goto l{zero_goto} else dec goto l{dec_goto}"
            ),
            Instruction::Halt => f.write_str("halt"),
        }
    }
}

/// Instructions `l1 … l(m+1)`; the last one is the only halt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterProgram {
    instructions: Vec<Instruction>,
}

impl RegisterProgram {
    pub fn new(instructions: Vec<Instruction>) -> Result<Self, RmError> {
        let n = instructions.len();
        if instructions.last() != Some(&Instruction::Halt) {
            return Err(RmError::MissingHalt);
        }
        for (i, ins) in instructions.iter().enumerate() {
            let line = i + 1;
            let targets = match *ins {
                Instruction::Halt if i + 1 < n => return Err(RmError::MisplacedHalt { line }),
                Instruction::Halt => vec![],
                Instruction::Inc { goto, .. } => vec![goto],
                Instruction::DecOrJz {
                    zero_goto,
                    dec_goto,
                    ..
                } => vec![zero_goto, dec_goto],
            };
            if let Some(&target) = targets.iter().find(|&&t| t == 0 || t > n) {
                return Err(RmError::BadTarget { line, target });
            }
        }
        Ok(RegisterProgram { instructions })
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }
}

impl fmt::Display for RegisterProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, ins) in self.instructions.iter().enumerate() {
            writeln!(f, "l{}: {ins}", i + 1)?;
        }
        Ok(())
    }
}

fn numbered(tok: &str, prefix: char) -> Option<usize> {
    let rest = tok.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

/// Parses `lK: inc cJ goto lP`, `lK: if cJ = 0 goto lP else dec goto lQ`
/// and `lK: halt` lines. `#` starts a comment.
pub fn parse_rm(text: &str) -> Result<RegisterProgram, RmError> {
    let mut instructions = Vec::new();
    let mut lines_of = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        let spaced = body.replace(':', " : ").replace('=', " = ");
        let toks: Vec<&str> = spaced.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let syntax = |message: String| RmError::Syntax { line, message };
        let expected = instructions.len() + 1;
        match (toks.first().and_then(|t| numbered(t, 'l')), toks.get(1)) {
            (Some(k), Some(&":")) if k == expected => {}
            (Some(k), Some(&":")) => {
                return Err(syntax(format!("expected label l{expected}, found l{k}")))
            }
            _ => return Err(syntax("expected `l<k>:` label".to_string())),
        }
        let counter = |t: &str| match numbered(t, 'c') {
            Some(j @ 1..=2) => Ok(j as u8),
            _ => Err(syntax(format!("expected counter c1 or c2, found `{t}`"))),
        };
        let label = |t: &str| {
            numbered(t, 'l').ok_or_else(|| syntax(format!("expected label, found `{t}`")))
        };
        let ins = match &toks[2..] {
            ["inc", c, "goto", p] => Instruction::Inc {
                counter: counter(c)?,
                goto: label(p)?,
            },
            ["if", c, "=", "0", "goto", p, "else", "dec", "goto", q] => Instruction::DecOrJz {
                counter: counter(c)?,
                zero_goto: label(p)?,
                dec_goto: label(q)?,
            },
            ["halt"] => Instruction::Halt,
            _ => return Err(syntax("unrecognised instruction".to_string())),
        };
        instructions.push(ins);
        lines_of.push(line);
    }
    RegisterProgram::new(instructions).map_err(|e| match e {
        RmError::BadTarget { line, target } => RmError::BadTarget {
            line: lines_of[line - 1],
            target,
        },
        RmError::MisplacedHalt { line } => RmError::MisplacedHalt {
            line: lines_of[line - 1],
        },
        other => other,
    })
}

/// Runs the program with `c1 = n`, `c2 = 0` and returns `c2` on halting.
pub fn interpret_rm(p: &RegisterProgram, n: u64, budget: u64) -> Result<u64, RmError> {
    let mut c = [n, 0u64];
    let mut pc = 1usize;
    for _ in 0..=budget {
        match p.instructions[pc - 1] {
            Instruction::Halt => return Ok(c[1]),
            Instruction::Inc { counter, goto } => {
                c[counter as usize - 1] += 1;
                pc = goto;
            }
            Instruction::DecOrJz {
                counter,
                zero_goto,
                dec_goto,
            } => {
                let slot = &mut c[counter as usize - 1];
                if *slot == 0 {
                    pc = zero_goto;
                } else {
                    *slot -= 1;
                    pc = dec_goto;
                }
            }
        }
    }
    Err(RmError::BudgetExceeded(budget))
}

fn element(name: String) -> Element {
    Element::new(&name).expect("generated names are valid")
}

fn rule_id(name: String) -> RuleId {
    RuleId::new(&name).expect("generated names are valid")
}

struct Compiled {
    system: System,
    /// (zero-branch rule, decrement rule, tested counter) per test instruction.
    tests: Vec<(RuleId, RuleId, Element)>,
}

fn compile(p: &RegisterProgram) -> Compiled {
    let m1 = p.instructions.len();
    let c = |j: u8| element(format!("c{j}"));
    let l = |i: usize| element(format!("l{i}"));
    let mut elements: BTreeSet<Element> = [c(1), c(2)].into();
    elements.extend((1..=m1).map(l));
    let mut rules = Vec::new();
    let mut tests = Vec::new();
    for (k, ins) in p.instructions.iter().enumerate() {
        let i = k + 1;
        match *ins {
            Instruction::Inc { counter, goto } => rules.push(Rule::new(
                rule_id(format!("mu{i}")),
                Multiset::from_elements([l(i)]),
                Multiset::from_elements([l(goto), c(counter)]),
            )),
            Instruction::DecOrJz {
                counter,
                zero_goto,
                dec_goto,
            } => {
                let zero = rule_id(format!("mu{i}"));
                let dec = rule_id(format!("mub{i}"));
                rules.push(Rule::new(
                    zero.clone(),
                    Multiset::from_elements([l(i)]),
                    Multiset::from_elements([l(zero_goto)]),
                ));
                rules.push(Rule::new(
                    dec.clone(),
                    Multiset::from_elements([l(i), c(counter)]),
                    Multiset::from_elements([l(dec_goto)]),
                ));
                tests.push((zero, dec, c(counter)));
            }
            Instruction::Halt => {}
        }
    }
    let init = Multiset::from_elements([l(1)]);
    Compiled {
        system: System::new(elements, rules, init).expect("compiled system is well formed"),
        tests,
    }
}

/// Compiles to a conditional system: each zero branch is forbidden in the
/// presence of its counter. The initial multiset is `{l1}`.
pub fn compile_to_cr(p: &RegisterProgram) -> (System, Regulation) {
    let Compiled { system, tests } = compile(p);
    let mut forbid = BTreeMap::new();
    for (zero, _, counter) in tests {
        forbid.insert(zero, BTreeSet::from([Multiset::from_elements([counter])]));
    }
    (
        system,
        Regulation::Conditional(ProhibitedContexts::new(forbid)),
    )
}

/// Compiles to a concurrent-free system: each decrement rule takes priority
/// over its zero branch.
pub fn compile_to_cfr(p: &RegisterProgram) -> (System, Regulation) {
    let Compiled { system, tests } = compile(p);
    let pairs = tests
        .into_iter()
        .map(|(zero, dec, _)| (zero, dec))
        .collect();
    (
        system,
        Regulation::ConcurrentFree(PriorityRelation { pairs }),
    )
}

/// The compiled system started with input `n` in counter `c1`.
pub fn with_input(s: &System, n: u32) -> System {
    let mut init = s.init().clone();
    init.add(element("c1".to_string()), n);
    s.with_init(init)
        .expect("c1 belongs to every compiled system")
}
