//! Text format for models (`.rmrs`) and run files (`.run`).
//!
//! ```text
//! format: 1
//! elements: A B
//! init: {A}
//! rules:
//!   mu1: {A} -> {A, B}
//!   mu2: {A, B} -> {A}
//! regulation: concurrent-free
//!   mu2 < mu1
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::multiset::{is_valid_token, Element, Multiset, MultisetError, RESERVED_EPS};
use crate::omega::{parse_omega, OmegaError};
use crate::regulation::{
    PriorityRelation, ProhibitedContexts, Regulation, RegulationClass, RulePair, SuccessorMap,
};
use crate::rewriting::{RewriteError, Rule, RuleId, System};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("duplicate rule `{0}`")]
    DuplicateRule(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("`eps` is reserved for the empty rule")]
    ReservedName,
    #[error("{0}")]
    Omega(OmegaError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ModelError {
    pub line: usize,
    pub column: usize,
    pub kind: ModelErrorKind,
}

/// Source location of a construct, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone)]
pub struct ModelDocument {
    pub system: System,
    pub regulation: Regulation,
    /// Keys: `elements`, `init`, `rules`, `regulation` and `rule <id>`.
    pub spans: BTreeMap<String, Span>,
}

impl ModelDocument {
    pub fn new(system: System, regulation: Regulation) -> Self {
        ModelDocument {
            system,
            regulation,
            spans: BTreeMap::new(),
        }
    }

    pub fn span(&self, key: &str) -> Option<Span> {
        self.spans.get(key).copied()
    }
}

impl PartialEq for ModelDocument {
    fn eq(&self, other: &Self) -> bool {
        self.system == other.system && self.regulation == other.regulation
    }
}

impl Eq for ModelDocument {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Start,
    Format,
    Elements,
    Init,
    Rules,
    Regulation,
}

struct Line<'a> {
    no: usize,
    /// Column of the first byte of `text`.
    col: usize,
    text: &'a str,
}

impl<'a> Line<'a> {
    fn err(&self, offset: usize, kind: ModelErrorKind) -> ModelError {
        ModelError {
            line: self.no,
            column: self.col + offset,
            kind,
        }
    }

    fn syntax(&self, offset: usize, msg: impl Into<String>) -> ModelError {
        self.err(offset, ModelErrorKind::Syntax(msg.into()))
    }

    /// Offset of `sub` inside this line's text; `sub` must be a subslice.
    fn offset_of(&self, sub: &str) -> usize {
        sub.as_ptr() as usize - self.text.as_ptr() as usize
    }
}

fn significant_lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let trimmed = body.trim();
            if trimmed.is_empty() {
                return None;
            }
            let lead = body.len() - body.trim_start().len();
            Some(Line {
                no: i + 1,
                col: lead + 1,
                text: trimmed,
            })
        })
        .collect()
}

struct Parser {
    elements: BTreeSet<Element>,
    rules: Vec<Rule>,
    rule_index: BTreeSet<RuleId>,
    init: Multiset,
    spans: BTreeMap<String, Span>,
}

impl Parser {
    fn multiset(&self, line: &Line<'_>, sub: &str) -> Result<Multiset, ModelError> {
        let off = line.offset_of(sub);
        let m = Multiset::parse_literal(sub).map_err(|e| match e {
            MultisetError::Syntax { column, message } => line.syntax(off + column - 1, message),
            MultisetError::ReservedName => line.err(off, ModelErrorKind::ReservedName),
            other => line.syntax(off, other.to_string()),
        })?;
        if let Some(e) = m.support().find(|e| !self.elements.contains(*e)) {
            let pos = sub.find(e.as_str()).unwrap_or(0);
            return Err(line.err(off + pos, ModelErrorKind::UnknownElement(e.to_string())));
        }
        Ok(m)
    }

    /// A declared, non-ε rule name.
    fn known_rule(&self, line: &Line<'_>, tok: &str) -> Result<RuleId, ModelError> {
        let off = line.offset_of(tok);
        if tok == RESERVED_EPS {
            return Err(line.err(off, ModelErrorKind::ReservedName));
        }
        if !is_valid_token(tok) {
            return Err(line.syntax(off, format!("invalid rule name `{tok}`")));
        }
        let id = RuleId::new(tok).expect("validated token");
        if !self.rule_index.contains(&id) {
            return Err(line.err(off, ModelErrorKind::UnknownRule(tok.to_string())));
        }
        Ok(id)
    }

    fn rule_line(&mut self, line: &Line<'_>) -> Result<(), ModelError> {
        let Some((name, rest)) = line.text.split_once(':') else {
            return Err(line.syntax(0, "expected `name: {..} -> {..}`"));
        };
        let name = name.trim();
        if name == RESERVED_EPS {
            return Err(line.err(0, ModelErrorKind::ReservedName));
        }
        if !is_valid_token(name) {
            return Err(line.syntax(0, format!("invalid rule name `{name}`")));
        }
        let Some((lhs, rhs)) = rest.split_once("->") else {
            return Err(line.syntax(line.offset_of(rest), "expected `->`"));
        };
        let lhs = self.multiset(line, lhs.trim())?;
        let rhs = self.multiset(line, rhs.trim())?;
        let id = RuleId::new(name).expect("validated token");
        if !self.rule_index.insert(id.clone()) {
            return Err(line.err(0, ModelErrorKind::DuplicateRule(name.to_string())));
        }
        self.spans.insert(
            format!("rule {name}"),
            Span {
                line: line.no,
                column: line.col,
            },
        );
        self.rules.push(Rule::new(id, lhs, rhs));
        Ok(())
    }
}

/// Splits `key: value` headers; returns the value slice.
fn header<'a>(line: &Line<'a>, key: &str) -> Option<&'a str> {
    let rest = line.text.strip_prefix(key)?;
    let rest = rest.trim_start().strip_prefix(':')?;
    Some(rest.trim())
}

fn parse_pair<'a>(line: &Line<'a>) -> Result<(&'a str, &'a str), ModelError> {
    let Some((a, b)) = line.text.split_once('<') else {
        return Err(line.syntax(0, "expected `rule < rule`"));
    };
    let (a, b) = (a.trim(), b.trim());
    if a.is_empty() || b.is_empty() || b.contains(char::is_whitespace) {
        return Err(line.syntax(0, "expected `rule < rule`"));
    }
    Ok((a, b))
}

pub fn parse_model(text: &str) -> Result<ModelDocument, ModelError> {
    let lines = significant_lines(text);
    let mut p = Parser {
        elements: BTreeSet::new(),
        rules: Vec::new(),
        rule_index: BTreeSet::new(),
        init: Multiset::new(),
        spans: BTreeMap::new(),
    };
    let mut section = Section::Start;
    let mut class = RegulationClass::None;
    let mut body: Vec<&Line<'_>> = Vec::new();
    let at = |l: &Line<'_>| Span {
        line: l.no,
        column: l.col,
    };
    for line in &lines {
        let is_header = match section {
            Section::Rules => header(line, "regulation").is_some() && !line.text.contains("->"),
            Section::Regulation => false,
            _ => true,
        };
        let next = if !is_header {
            match section {
                Section::Rules => p.rule_line(line)?,
                _ => body.push(line),
            }
            continue;
        } else if header(line, "format").is_some() {
            Section::Format
        } else if header(line, "elements").is_some() {
            Section::Elements
        } else if header(line, "init").is_some() {
            Section::Init
        } else if line.text == "rules:" || header(line, "rules") == Some("") {
            Section::Rules
        } else if header(line, "regulation").is_some() {
            Section::Regulation
        } else {
            return Err(line.syntax(0, "unexpected line"));
        };
        if next <= section {
            return Err(line.syntax(0, "section out of order or repeated"));
        }
        let expected = match section {
            Section::Start | Section::Format => Section::Elements,
            Section::Elements => Section::Init,
            Section::Init => Section::Rules,
            Section::Rules => Section::Regulation,
            Section::Regulation => unreachable!(),
        };
        if next != expected && !(section == Section::Start && next == Section::Format) {
            return Err(line.syntax(0, format!("missing section before `{}`", line.text)));
        }
        section = next;
        match next {
            Section::Format => {
                let v = header(line, "format").unwrap();
                if v != "1" {
                    return Err(line.syntax(line.offset_of(v), format!("unsupported format `{v}`")));
                }
            }
            Section::Elements => {
                let v = header(line, "elements").unwrap();
                for tok in v.split_whitespace() {
                    let off = line.offset_of(tok);
                    let e = Element::new(tok).map_err(|e| match e {
                        MultisetError::ReservedName => line.err(off, ModelErrorKind::ReservedName),
                        _ => line.syntax(off, format!("invalid element name `{tok}`")),
                    })?;
                    if !p.elements.insert(e) {
                        return Err(line.syntax(off, format!("duplicate element `{tok}`")));
                    }
                }
                p.spans.insert("elements".into(), at(line));
            }
            Section::Init => {
                let v = header(line, "init").unwrap();
                p.init = p.multiset(line, v)?;
                p.spans.insert("init".into(), at(line));
            }
            Section::Rules => {
                p.spans.insert("rules".into(), at(line));
            }
            Section::Regulation => {
                let v = header(line, "regulation").unwrap();
                class = v
                    .parse()
                    .map_err(|m: String| line.syntax(line.offset_of(v), m))?;
                p.spans.insert("regulation".into(), at(line));
            }
            Section::Start => unreachable!(),
        }
    }
    if section < Section::Rules {
        let (no, what) = (
            lines.last().map_or(1, |l| l.no + 1),
            match section {
                Section::Start | Section::Format => "elements",
                Section::Elements => "init",
                _ => "rules",
            },
        );
        return Err(ModelError {
            line: no,
            column: 1,
            kind: ModelErrorKind::Syntax(format!("missing `{what}:` section")),
        });
    }
    let regulation = parse_regulation(&p, class, &body, lines.last().map_or(1, |l| l.no + 1))?;
    let system = System::new(p.elements, p.rules, p.init).map_err(|e| {
        let kind = match e {
            RewriteError::UnknownElement { element, .. } => {
                ModelErrorKind::UnknownElement(element.to_string())
            }
            other => ModelErrorKind::Syntax(other.to_string()),
        };
        ModelError {
            line: 1,
            column: 1,
            kind,
        }
    })?;
    Ok(ModelDocument {
        system,
        regulation,
        spans: p.spans,
    })
}

fn parse_regulation(
    p: &Parser,
    class: RegulationClass,
    body: &[&Line<'_>],
    end_line: usize,
) -> Result<Regulation, ModelError> {
    Ok(match class {
        RegulationClass::None => {
            if let Some(l) = body.first() {
                return Err(l.syntax(0, "unregulated models take no regulation body"));
            }
            Regulation::Unregulated
        }
        RegulationClass::Regular => {
            let [line] = body else {
                let l = body.get(1).map_or(end_line, |l| l.no);
                return Err(ModelError {
                    line: l,
                    column: 1,
                    kind: ModelErrorKind::Syntax("expected exactly one `zeta = ...` line".into()),
                });
            };
            let Some(expr) = line
                .text
                .strip_prefix("zeta")
                .map(str::trim_start)
                .and_then(|r| r.strip_prefix('='))
            else {
                return Err(line.syntax(0, "expected `zeta = <omega-expression>`"));
            };
            let off = line.offset_of(expr);
            let known = p.rule_index.clone();
            let e = parse_omega(expr, &known).map_err(|e| {
                let pos = match &e {
                    OmegaError::Syntax { position, .. }
                    | OmegaError::UnknownSymbol { position, .. }
                    | OmegaError::MalformedOmega { position, .. } => *position,
                };
                line.err(off + pos.saturating_sub(1), ModelErrorKind::Omega(e))
            })?;
            Regulation::regular(e)
        }
        RegulationClass::Ordered | RegulationClass::ConcurrentFree => {
            let mut pairs: BTreeSet<RulePair> = BTreeSet::new();
            for line in body {
                let (a, b) = parse_pair(line)?;
                pairs.insert((p.known_rule(line, a)?, p.known_rule(line, b)?));
            }
            if class == RegulationClass::Ordered {
                Regulation::ordered(pairs)
            } else {
                Regulation::ConcurrentFree(PriorityRelation { pairs })
            }
        }
        RegulationClass::Programmed => {
            let mut succ = BTreeMap::new();
            for line in body {
                let Some((name, set)) = line.text.split_once("->") else {
                    return Err(line.syntax(0, "expected `rule -> { rule, ... }`"));
                };
                let id = p.known_rule(line, name.trim())?;
                let set = set.trim();
                let inner = set
                    .strip_prefix('{')
                    .and_then(|s| s.strip_suffix('}'))
                    .ok_or_else(|| line.syntax(line.offset_of(set), "expected `{ ... }`"))?;
                let mut targets = BTreeSet::new();
                if !inner.trim().is_empty() {
                    for tok in inner.split(',') {
                        let tok = tok.trim();
                        if tok.is_empty() {
                            return Err(
                                line.syntax(line.offset_of(inner), "empty entry in rule set")
                            );
                        }
                        targets.insert(p.known_rule(line, tok)?);
                    }
                }
                if succ.insert(id.clone(), targets).is_some() {
                    return Err(line.syntax(0, format!("second successor set for `{id}`")));
                }
            }
            Regulation::Programmed(SuccessorMap { succ })
        }
        RegulationClass::Conditional => {
            let mut ctx = ProhibitedContexts::default();
            for line in body {
                let Some((name, rest)) = line.text.split_once(':') else {
                    return Err(line.syntax(0, "expected `rule: forbid {..}`"));
                };
                let id = p.known_rule(line, name.trim())?;
                let Some(lit) = rest.trim_start().strip_prefix("forbid") else {
                    return Err(line.syntax(line.offset_of(rest), "expected `forbid`"));
                };
                let m = p.multiset(line, lit.trim())?;
                ctx.add(id, m);
            }
            Regulation::Conditional(ctx)
        }
    })
}

/// Canonical text: `format: 1` header, sorted elements, rules in
/// declaration order.
pub fn serialize_model(d: &ModelDocument) -> String {
    let s = &d.system;
    let mut out = String::from("format: 1\n");
    let names: Vec<&str> = s.elements().iter().map(Element::as_str).collect();
    writeln!(out, "elements: {}", names.join(" ")).unwrap();
    writeln!(out, "init: {}", s.init()).unwrap();
    out.push_str("rules:\n");
    for r in s.rules() {
        writeln!(out, "  {}: {} -> {}", r.id, r.lhs, r.rhs).unwrap();
    }
    writeln!(out, "regulation: {}", d.regulation.class()).unwrap();
    let mut pairs_by_decl = |pairs: &BTreeSet<RulePair>| {
        let mut v: Vec<&RulePair> = pairs.iter().collect();
        v.sort_by_key(|(a, b)| (s.rule_position(a), s.rule_position(b)));
        for (a, b) in v {
            writeln!(out, "  {a} < {b}").unwrap();
        }
    };
    match &d.regulation {
        Regulation::Unregulated => {}
        Regulation::Regular(lang) => writeln!(out, "  zeta = {}", lang.expr()).unwrap(),
        Regulation::Ordered(order) => pairs_by_decl(order.pairs()),
        Regulation::ConcurrentFree(rel) => pairs_by_decl(&rel.pairs),
        Regulation::Programmed(map) => {
            for r in s.rule_ids() {
                if let Some(succ) = map.succ.get(r) {
                    let mut names: Vec<&RuleId> = succ.iter().collect();
                    names.sort_by_key(|r| s.rule_position(r));
                    let names: Vec<&str> = names.into_iter().map(RuleId::as_str).collect();
                    if names.is_empty() {
                        writeln!(out, "  {r} -> {{}}").unwrap();
                    } else {
                        writeln!(out, "  {r} -> {{ {} }}", names.join(", ")).unwrap();
                    }
                }
            }
        }
        Regulation::Conditional(ctx) => {
            for r in s.rule_ids() {
                for m in ctx.contexts(r) {
                    writeln!(out, "  {r}: forbid {m}").unwrap();
                }
            }
        }
    }
    out
}

/// A parsed run file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunFile {
    pub labels: Vec<RuleId>,
    pub omega_eps_tail: bool,
}

/// Whitespace-separated rule ids; a final `eps^w` marks an infinite ε tail.
pub fn parse_run(text: &str, s: &System) -> Result<RunFile, ModelError> {
    let mut toks: Vec<(usize, usize, &str)> = Vec::new();
    for line in significant_lines(text) {
        for tok in line.text.split_whitespace() {
            toks.push((line.no, line.col + line.offset_of(tok), tok));
        }
    }
    let mut run = RunFile {
        labels: Vec::new(),
        omega_eps_tail: false,
    };
    let n = toks.len();
    for (i, (line, column, tok)) in toks.into_iter().enumerate() {
        let err = |kind| ModelError { line, column, kind };
        if tok == "eps^w" {
            if i + 1 != n {
                return Err(err(ModelErrorKind::Syntax(
                    "`eps^w` must be the last token".into(),
                )));
            }
            run.omega_eps_tail = true;
            continue;
        }
        let id = RuleId::parse(tok)
            .map_err(|_| err(ModelErrorKind::Syntax(format!("invalid rule name `{tok}`"))))?;
        if !s.has_rule(&id) {
            return Err(err(ModelErrorKind::UnknownRule(tok.to_string())));
        }
        run.labels.push(id);
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "\
elements: A B C X
init: {A, A}
rules:
  mu1: {A, A} -> {B, A}
  mu2: {A} -> {X}
  mu3: {B} -> {C}
  mu4: {C} -> {B}
";

    const CONDITIONAL: &str = "\
# conditional example
elements: A B
init: {}
rules:
  mu1: {} -> {A}
  mu2: {A} -> {B}
regulation: conditional
  mu1: forbid {B}
";

    fn id(n: &str) -> RuleId {
        RuleId::parse(n).unwrap()
    }

    #[test]
    fn parses_unregulated_system() {
        let d = parse_model(BASIC).unwrap();
        assert_eq!(d.system.rules().len(), 4);
        assert_eq!(d.system.init(), &Multiset::of(&["A", "A"]));
        assert_eq!(d.regulation, Regulation::Unregulated);
        assert_eq!(d.span("rule mu3").unwrap().line, 6);
    }

    #[test]
    fn conditional_defaults_to_no_contexts() {
        let d = parse_model(CONDITIONAL).unwrap();
        let Regulation::Conditional(ctx) = &d.regulation else {
            panic!("expected conditional")
        };
        assert_eq!(ctx.contexts(&id("mu2")).count(), 0);
        assert_eq!(ctx.contexts(&id("mu1")).count(), 1);
    }

    #[test]
    fn errors_carry_lines() {
        let bad = BASIC.replace("mu4: {C} -> {B}", "mu4: {C} -> {D}");
        let e = parse_model(&bad).unwrap_err();
        assert_eq!(e.line, 7);
        assert_eq!(e.kind, ModelErrorKind::UnknownElement("D".into()));

        let dup = BASIC.replace("mu4:", "mu3:");
        assert_eq!(
            parse_model(&dup).unwrap_err().kind,
            ModelErrorKind::DuplicateRule("mu3".into())
        );
        let eps = BASIC.replace("mu4:", "eps:");
        assert_eq!(
            parse_model(&eps).unwrap_err().kind,
            ModelErrorKind::ReservedName
        );

        let unknown = format!("{BASIC}regulation: ordered\n  mu1 < mu9\n");
        let e = parse_model(&unknown).unwrap_err();
        assert_eq!((e.line, e.column), (9, 9));
        assert_eq!(e.kind, ModelErrorKind::UnknownRule("mu9".into()));

        let eps_pair = format!("{BASIC}regulation: ordered\n  mu1 < eps\n");
        assert_eq!(
            parse_model(&eps_pair).unwrap_err().kind,
            ModelErrorKind::ReservedName
        );

        let e = parse_model("init: {}\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_model("elements: A\ninit: {A\nrules:\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, ModelErrorKind::Syntax(_)));
    }

    #[test]
    fn omega_errors_are_located() {
        let text = format!("{BASIC}regulation: regular\n  zeta = mu1 . mu9^w\n");
        let e = parse_model(&text).unwrap_err();
        assert_eq!(e.line, 9);
        assert_eq!(e.column, 16);
        assert!(matches!(
            e.kind,
            ModelErrorKind::Omega(OmegaError::UnknownSymbol { .. })
        ));
    }

    #[test]
    fn serialization_is_canonical() {
        let text = "\
elements: X A
init: {A}
rules:
  mu1: {A} -> {A, X}
  mu2: {A, X} -> {A}
  mu3: {A} -> {}
regulation: concurrent-free
  mu3 < mu2
";
        let d = parse_model(text).unwrap();
        let once = serialize_model(&d);
        assert!(once.starts_with("format: 1\nelements: A X\n"));
        assert!(once.contains("  mu3 < mu2\n"));
        let again = parse_model(&once).unwrap();
        assert_eq!(again, d);
        assert_eq!(serialize_model(&again), once);
    }

    #[test]
    fn programmed_round_trip() {
        let text = "\
elements: A
init: {}
rules:
  mu1: {} -> {A}
  mu2: {A} -> {}
regulation: programmed
  mu1 -> { mu2, mu1 }
  mu2 -> {}
";
        let d = parse_model(text).unwrap();
        let s = serialize_model(&d);
        assert!(s.contains("  mu1 -> { mu1, mu2 }\n  mu2 -> {}\n"));
        assert_eq!(parse_model(&s).unwrap(), d);
    }

    #[test]
    fn run_files() {
        let d = parse_model(BASIC).unwrap();
        let r = parse_run("mu2 mu2\n  eps^w # tail\n", &d.system).unwrap();
        assert_eq!(r.labels, vec![id("mu2"), id("mu2")]);
        assert!(r.omega_eps_tail);
        let e = parse_run("mu1 eps^w mu2", &d.system).unwrap_err();
        assert_eq!((e.line, e.column), (1, 5));
        let e = parse_run("mu1\nmu7", &d.system).unwrap_err();
        assert_eq!(e.line, 2);
        assert_eq!(parse_run("eps eps", &d.system).unwrap().labels.len(), 2);
    }
}
