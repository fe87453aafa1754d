//! ω-regular expressions over rule identifiers and their Büchi automata.
//!
//! Expressions are finite sums of lassos `U.V^w`. Each lasso is compiled
//! with a position (Glushkov) construction, so the resulting automaton has
//! no silent transitions; the last positions of `V` are accepting. Stepping
//! works on sets of states and prunes states whose ω-language is empty.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::rewriting::RuleId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OmegaError {
    #[error("syntax error at column {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown symbol `{name}` at column {position}")]
    UnknownSymbol { name: String, position: usize },
    #[error("malformed ω-expression at column {position}: {message}")]
    MalformedOmega { position: usize, message: String },
}

/// A regular expression over rule identifiers (finite words).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegexExpr {
    Symbol(RuleId),
    Concat(Vec<RegexExpr>),
    Union(Vec<RegexExpr>),
    Star(Box<RegexExpr>),
    EmptyWord,
}

impl RegexExpr {
    pub fn concat(items: Vec<RegexExpr>) -> RegexExpr {
        let mut flat = Vec::new();
        for item in items {
            match item {
                RegexExpr::Concat(inner) => flat.extend(inner),
                RegexExpr::EmptyWord => {}
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => RegexExpr::EmptyWord,
            1 => flat.pop().unwrap(),
            _ => RegexExpr::Concat(flat),
        }
    }

    pub fn union(items: Vec<RegexExpr>) -> RegexExpr {
        let mut flat = Vec::new();
        for item in items {
            match item {
                RegexExpr::Union(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            RegexExpr::Union(flat)
        }
    }

    pub fn star(inner: RegexExpr) -> RegexExpr {
        match inner {
            RegexExpr::Star(_) | RegexExpr::EmptyWord => inner,
            other => RegexExpr::Star(Box::new(other)),
        }
    }

    /// Whether the empty word belongs to the language.
    pub fn nullable(&self) -> bool {
        match self {
            RegexExpr::Symbol(_) => false,
            RegexExpr::Concat(items) => items.iter().all(RegexExpr::nullable),
            RegexExpr::Union(items) => items.iter().any(RegexExpr::nullable),
            RegexExpr::Star(_) | RegexExpr::EmptyWord => true,
        }
    }

    /// Whether the language is empty (only an empty union can make it so).
    pub fn is_empty_language(&self) -> bool {
        match self {
            RegexExpr::Symbol(_) | RegexExpr::Star(_) | RegexExpr::EmptyWord => false,
            RegexExpr::Concat(items) => items.iter().any(RegexExpr::is_empty_language),
            RegexExpr::Union(items) => items.iter().all(RegexExpr::is_empty_language),
        }
    }

    pub fn collect_symbols(&self, out: &mut BTreeSet<RuleId>) {
        match self {
            RegexExpr::Symbol(s) => {
                out.insert(s.clone());
            }
            RegexExpr::Concat(items) | RegexExpr::Union(items) => {
                items.iter().for_each(|i| i.collect_symbols(out))
            }
            RegexExpr::Star(inner) => inner.collect_symbols(out),
            RegexExpr::EmptyWord => {}
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            RegexExpr::Union(_) => 0,
            RegexExpr::Concat(_) => 1,
            RegexExpr::Star(_) => 2,
            RegexExpr::Symbol(_) | RegexExpr::EmptyWord => 3,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.fmt_at(f, 0)?;
            return f.write_str(")");
        }
        match self {
            RegexExpr::Symbol(s) => write!(f, "{s}"),
            // Not expressible on its own; only appears as an absent lasso prefix.
            RegexExpr::EmptyWord => f.write_str("()"),
            RegexExpr::Star(inner) => {
                inner.fmt_at(f, 3)?;
                f.write_str("*")
            }
            RegexExpr::Concat(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" . ")?;
                    }
                    item.fmt_at(f, 2)?;
                }
                Ok(())
            }
            RegexExpr::Union(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    item.fmt_at(f, 1)?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for RegexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// One `prefix . cycle^w` component.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lasso {
    pub prefix: RegexExpr,
    pub cycle: RegexExpr,
}

/// A finite union of lassos.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OmegaExpr {
    pub lassos: Vec<Lasso>,
}

impl OmegaExpr {
    /// `Σ* . Σ^w` over the given alphabet.
    pub fn universal(alphabet: &[RuleId]) -> OmegaExpr {
        let sigma = RegexExpr::union(alphabet.iter().cloned().map(RegexExpr::Symbol).collect());
        OmegaExpr {
            lassos: vec![Lasso {
                prefix: RegexExpr::star(sigma.clone()),
                cycle: sigma,
            }],
        }
    }

    pub fn symbols(&self) -> BTreeSet<RuleId> {
        let mut out = BTreeSet::new();
        for l in &self.lassos {
            l.prefix.collect_symbols(&mut out);
            l.cycle.collect_symbols(&mut out);
        }
        out
    }
}

impl fmt::Display for Lasso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prefix != RegexExpr::EmptyWord {
            self.prefix.fmt_at(f, 1)?;
            f.write_str(" . ")?;
        }
        self.cycle.fmt_at(f, 3)?;
        f.write_str("^w")
    }
}

impl fmt::Display for OmegaExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.lassos.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Dot,
    Bar,
    Star,
    Omega,
    LParen,
    RParen,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, OmegaError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        match c {
            c if c.is_whitespace() => i += 1,
            '.' => {
                out.push((Tok::Dot, pos));
                i += 1;
            }
            '|' => {
                out.push((Tok::Bar, pos));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, pos));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, pos));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, pos));
                i += 1;
            }
            '^' => {
                if chars.get(i + 1) == Some(&'w') {
                    out.push((Tok::Omega, pos));
                    i += 2;
                } else {
                    return Err(OmegaError::Syntax {
                        position: pos,
                        message: "expected `^w`".into(),
                    });
                }
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            }
            other => {
                return Err(OmegaError::Syntax {
                    position: pos,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

#[derive(Debug)]
enum Ast {
    Sym(RuleId),
    Concat(Vec<(Ast, usize)>),
    Union(Vec<(Ast, usize)>),
    Star(Box<Ast>),
    Omega(Box<Ast>),
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    known: &'a BTreeSet<RuleId>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn union(&mut self) -> Result<Ast, OmegaError> {
        let pos = self.pos();
        let mut items = vec![(self.concat()?, pos)];
        while *self.peek() == Tok::Bar {
            self.at += 1;
            let pos = self.pos();
            items.push((self.concat()?, pos));
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap().0
        } else {
            Ast::Union(items)
        })
    }

    fn concat(&mut self) -> Result<Ast, OmegaError> {
        let pos = self.pos();
        let mut items = vec![(self.postfix()?, pos)];
        while *self.peek() == Tok::Dot {
            self.at += 1;
            let pos = self.pos();
            items.push((self.postfix()?, pos));
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap().0
        } else {
            Ast::Concat(items)
        })
    }

    fn postfix(&mut self) -> Result<Ast, OmegaError> {
        let mut node = self.atom()?;
        loop {
            match self.peek() {
                Tok::Star => node = Ast::Star(Box::new(node)),
                Tok::Omega => node = Ast::Omega(Box::new(node)),
                _ => return Ok(node),
            }
            self.at += 1;
        }
    }

    fn atom(&mut self) -> Result<Ast, OmegaError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.at += 1;
                let id = RuleId::parse(&name).map_err(|_| OmegaError::UnknownSymbol {
                    name: name.clone(),
                    position: pos,
                })?;
                if !id.is_eps() && !self.known.contains(&id) {
                    return Err(OmegaError::UnknownSymbol {
                        name,
                        position: pos,
                    });
                }
                Ok(Ast::Sym(id))
            }
            Tok::LParen => {
                self.at += 1;
                let inner = self.union()?;
                if *self.peek() != Tok::RParen {
                    return Err(OmegaError::Syntax {
                        position: self.pos(),
                        message: "expected `)`".into(),
                    });
                }
                self.at += 1;
                Ok(inner)
            }
            other => Err(OmegaError::Syntax {
                position: pos,
                message: match other {
                    Tok::End => "unexpected end of expression".into(),
                    _ => "expected a rule name or `(`".into(),
                },
            }),
        }
    }
}

fn finite(ast: Ast, pos: usize) -> Result<RegexExpr, OmegaError> {
    Ok(match ast {
        Ast::Sym(s) => RegexExpr::Symbol(s),
        Ast::Concat(items) => RegexExpr::concat(
            items
                .into_iter()
                .map(|(a, p)| finite(a, p))
                .collect::<Result<_, _>>()?,
        ),
        Ast::Union(items) => RegexExpr::union(
            items
                .into_iter()
                .map(|(a, p)| finite(a, p))
                .collect::<Result<_, _>>()?,
        ),
        Ast::Star(inner) => RegexExpr::star(finite(*inner, pos)?),
        Ast::Omega(_) => {
            return Err(OmegaError::MalformedOmega {
                position: pos,
                message: "`^w` may only end a lasso".into(),
            })
        }
    })
}

fn lassos(ast: Ast, pos: usize) -> Result<Vec<Lasso>, OmegaError> {
    match ast {
        Ast::Omega(inner) => {
            let cycle = finite(*inner, pos)?;
            if cycle.nullable() {
                return Err(OmegaError::MalformedOmega {
                    position: pos,
                    message: "`^w` applied to an expression accepting the empty word".into(),
                });
            }
            Ok(vec![Lasso {
                prefix: RegexExpr::EmptyWord,
                cycle,
            }])
        }
        Ast::Union(items) => {
            let mut out = Vec::new();
            for (a, p) in items {
                out.extend(lassos(a, p)?);
            }
            Ok(out)
        }
        Ast::Concat(mut items) => {
            let (last, last_pos) = items.pop().expect("concat has at least two items");
            let head = items
                .into_iter()
                .map(|(a, p)| finite(a, p))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(lassos(last, last_pos)?
                .into_iter()
                .map(|l| {
                    let mut parts = head.clone();
                    parts.push(l.prefix);
                    Lasso {
                        prefix: RegexExpr::concat(parts),
                        cycle: l.cycle,
                    }
                })
                .collect())
        }
        Ast::Sym(_) | Ast::Star(_) => Err(OmegaError::MalformedOmega {
            position: pos,
            message: "missing `^w` tail".into(),
        }),
    }
}

/// Parses a sum of lassos such as `(mu1 . mu2)* . mu3* . eps^w`.
pub fn parse_omega(text: &str, known_rules: &BTreeSet<RuleId>) -> Result<OmegaExpr, OmegaError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        known: known_rules,
    };
    let start = p.pos();
    let ast = p.union()?;
    if *p.peek() != Tok::End {
        return Err(OmegaError::Syntax {
            position: p.pos(),
            message: "unexpected trailing input".into(),
        });
    }
    Ok(OmegaExpr {
        lassos: lassos(ast, start)?,
    })
}

// ---------------------------------------------------------------------------
// Automaton construction

/// Position automaton data for one regular expression.
struct Positions {
    symbols: Vec<RuleId>,
    follow: Vec<BTreeSet<usize>>,
    first: BTreeSet<usize>,
    last: BTreeSet<usize>,
    nullable: bool,
}

impl Positions {
    fn build(e: &RegexExpr) -> Positions {
        let mut p = Positions {
            symbols: Vec::new(),
            follow: Vec::new(),
            first: BTreeSet::new(),
            last: BTreeSet::new(),
            nullable: false,
        };
        let (n, f, l) = p.visit(e);
        p.nullable = n;
        p.first = f;
        p.last = l;
        p
    }

    fn visit(&mut self, e: &RegexExpr) -> (bool, BTreeSet<usize>, BTreeSet<usize>) {
        match e {
            RegexExpr::Symbol(s) => {
                let i = self.symbols.len();
                self.symbols.push(s.clone());
                self.follow.push(BTreeSet::new());
                (false, [i].into(), [i].into())
            }
            RegexExpr::EmptyWord => (true, BTreeSet::new(), BTreeSet::new()),
            RegexExpr::Concat(items) => {
                let mut acc: (bool, BTreeSet<usize>, BTreeSet<usize>) =
                    (true, BTreeSet::new(), BTreeSet::new());
                for item in items {
                    let (n2, f2, l2) = self.visit(item);
                    for &l in &acc.2 {
                        self.follow[l].extend(f2.iter().copied());
                    }
                    let first = if acc.0 { &acc.1 | &f2 } else { acc.1.clone() };
                    let last = if n2 { &acc.2 | &l2 } else { l2 };
                    acc = (acc.0 && n2, first, last);
                }
                acc
            }
            RegexExpr::Union(items) => {
                let mut acc: (bool, BTreeSet<usize>, BTreeSet<usize>) =
                    (false, BTreeSet::new(), BTreeSet::new());
                for item in items {
                    let (n, f, l) = self.visit(item);
                    acc.0 |= n;
                    acc.1.extend(f);
                    acc.2.extend(l);
                }
                acc
            }
            RegexExpr::Star(inner) => {
                let (_, f, l) = self.visit(inner);
                for &x in &l {
                    self.follow[x].extend(f.iter().copied());
                }
                (true, f, l)
            }
        }
    }
}

/// A nondeterministic Büchi automaton over rule identifiers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuchiAutomaton {
    transitions: Vec<Vec<(RuleId, usize)>>,
    initial: BTreeSet<usize>,
    accepting: BTreeSet<usize>,
    live: BTreeSet<usize>,
    alphabet: BTreeSet<RuleId>,
}

pub type StateSet = BTreeSet<usize>;

impl BuchiAutomaton {
    pub fn from_omega(e: &OmegaExpr) -> BuchiAutomaton {
        let mut transitions: Vec<Vec<(RuleId, usize)>> = Vec::new();
        let mut initial = BTreeSet::new();
        let mut accepting = BTreeSet::new();
        for lasso in &e.lassos {
            let u = Positions::build(&lasso.prefix);
            let v = Positions::build(&lasso.cycle);
            let base = transitions.len();
            let u_state = |p: usize| base + 1 + p;
            let v_state = |p: usize| base + 1 + u.symbols.len() + p;
            transitions.resize(base + 1 + u.symbols.len() + v.symbols.len(), Vec::new());
            initial.insert(base);
            if v.first.is_empty() {
                // The cycle has an empty language, so this lasso contributes nothing.
                continue;
            }
            for &p in &u.first {
                transitions[base].push((u.symbols[p].clone(), u_state(p)));
            }
            for (p, follow) in u.follow.iter().enumerate() {
                for &q in follow {
                    transitions[u_state(p)].push((u.symbols[q].clone(), u_state(q)));
                }
            }
            let mut done: Vec<usize> = u.last.iter().map(|&p| u_state(p)).collect();
            if u.nullable {
                done.push(base);
            }
            for d in done {
                for &c in &v.first {
                    transitions[d].push((v.symbols[c].clone(), v_state(c)));
                }
            }
            for (p, follow) in v.follow.iter().enumerate() {
                for &q in follow {
                    transitions[v_state(p)].push((v.symbols[q].clone(), v_state(q)));
                }
            }
            for &l in &v.last {
                for &c in &v.first {
                    transitions[v_state(l)].push((v.symbols[c].clone(), v_state(c)));
                }
                accepting.insert(v_state(l));
            }
        }
        for edges in &mut transitions {
            edges.sort();
            edges.dedup();
        }
        let alphabet = transitions
            .iter()
            .flatten()
            .map(|(s, _)| s.clone())
            .collect();
        let mut a = BuchiAutomaton {
            transitions,
            initial,
            accepting,
            live: BTreeSet::new(),
            alphabet,
        };
        a.live = a.compute_live(|_| true);
        a
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn alphabet(&self) -> &BTreeSet<RuleId> {
        &self.alphabet
    }

    pub fn accepting(&self) -> &StateSet {
        &self.accepting
    }

    pub fn live(&self) -> &StateSet {
        &self.live
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, &RuleId, usize)> + '_ {
        self.transitions
            .iter()
            .enumerate()
            .flat_map(|(q, edges)| edges.iter().map(move |(s, t)| (q, s, *t)))
    }

    /// Live initial states.
    pub fn initial_states(&self) -> StateSet {
        self.initial.intersection(&self.live).copied().collect()
    }

    /// Successors of `qs` on `sym`, restricted to live states.
    pub fn step_states(&self, qs: &StateSet, sym: &RuleId) -> StateSet {
        qs.iter()
            .flat_map(|&q| self.transitions[q].iter())
            .filter(|(s, t)| s == sym && self.live.contains(t))
            .map(|&(_, t)| t)
            .collect()
    }

    /// True if some accepted infinite word begins with `word`.
    pub fn prefix_viable(&self, word: &[RuleId]) -> bool {
        let mut qs = self.initial_states();
        for sym in word {
            if qs.is_empty() {
                return false;
            }
            qs = self.step_states(&qs, sym);
        }
        !qs.is_empty()
    }

    /// True if `sym^ω` is accepted from some state in `qs`.
    pub fn accepts_repeated(&self, qs: &StateSet, sym: &RuleId) -> bool {
        let live = self.compute_live(|s| s == sym);
        qs.iter().any(|q| live.contains(q))
    }

    /// States from which an accepting state lying on a cycle is reachable,
    /// using only transitions whose symbol satisfies `allow`.
    fn compute_live(&self, allow: impl Fn(&RuleId) -> bool) -> StateSet {
        let n = self.transitions.len();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (q, edges) in self.transitions.iter().enumerate() {
            for (s, t) in edges {
                if allow(s) {
                    preds[*t].push(q);
                }
            }
        }
        let reaches = |from: &[usize], target: usize| {
            let mut seen = vec![false; n];
            let mut queue: VecDeque<usize> = from.iter().copied().collect();
            while let Some(q) = queue.pop_front() {
                if q == target {
                    return true;
                }
                if std::mem::replace(&mut seen[q], true) {
                    continue;
                }
                for (s, t) in &self.transitions[q] {
                    if allow(s) && !seen[*t] {
                        queue.push_back(*t);
                    }
                }
            }
            false
        };
        let mut live = BTreeSet::new();
        let mut queue = VecDeque::new();
        for &acc in &self.accepting {
            let succ: Vec<usize> = self.transitions[acc]
                .iter()
                .filter(|(s, _)| allow(s))
                .map(|&(_, t)| t)
                .collect();
            if reaches(&succ, acc) && live.insert(acc) {
                queue.push_back(acc);
            }
        }
        while let Some(q) = queue.pop_front() {
            for &p in &preds[q] {
                if live.insert(p) {
                    queue.push_back(p);
                }
            }
        }
        live
    }

    /// Line-oriented dump: header lines followed by one transition per line.
    pub fn dump(&self) -> String {
        let set = |s: &StateSet| {
            s.iter()
                .map(|q| format!("q{q}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = format!("states: {}\n", self.num_states());
        out.push_str(&format!("initial: {}\n", set(&self.initial)));
        out.push_str(&format!("accepting: {}\n", set(&self.accepting)));
        out.push_str(&format!("live: {}\n", set(&self.live)));
        for (q, s, t) in self.transitions() {
            out.push_str(&format!("q{q} -{s}-> q{t}\n"));
        }
        out
    }
}
