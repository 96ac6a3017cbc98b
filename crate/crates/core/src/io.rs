//! Line-based text formats for games, adversary models and strategies.
//!
//! ```text
//! game shortest-path
//! state s1 p1
//! edge s1 s2 1 label go
//! init s1
//! target s3
//!
//! model memoryless
//! row s2: s1 1/2, s3 1/2
//!
//! model mealy 2
//! mem even init
//! mem odd
//! update even s2 -> odd
//! row even s2: s1 1/1
//!
//! strategy 2
//! mem 0 init
//! mem 1
//! act 0 s1 -> s2
//! update 0 s2 s1 -> 1
//! ```
//!
//! An edge is named from its source by its label, else by its target name,
//! else by `@k` (the k-th outgoing edge, from 0). `#` starts a comment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::eval::product;
use crate::model::{
    EdgeId, FiniteMemoryModel, FiniteMemoryStrategy, GameGraph, Measure, ModelError, Player, StateId,
    StochasticModel,
};
use crate::rational::Rational;

/// Position in the input: 1-based line and column range (inclusive start,
/// exclusive end).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub start: usize,
    pub end: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.end <= self.start + 1 {
            write!(f, "line {}, column {}", self.line, self.start)
        } else {
            write!(f, "line {}, columns {}-{}", self.line, self.start, self.end - 1)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    DuplicateState(String),
    UnknownState(String),
    UnknownEdge { state: String, token: String },
    AmbiguousEdge { state: String, token: String },
    Invalid(ModelError),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseErrorKind::DuplicateState(s) => write!(f, "state `{s}` declared twice"),
            ParseErrorKind::UnknownState(s) => write!(f, "unknown state `{s}`"),
            ParseErrorKind::UnknownEdge { state, token } => write!(f, "no edge `{token}` leaves `{state}`"),
            ParseErrorKind::AmbiguousEdge { state, token } => {
                write!(f, "`{token}` names several edges leaving `{state}`; use a label or @k")
            }
            ParseErrorKind::Invalid(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token<'a> {
    text: &'a str,
    span: SourceSpan,
}

fn syntax(span: SourceSpan, msg: impl Into<String>) -> ParseError {
    ParseError { kind: ParseErrorKind::Syntax(msg.into()), span }
}

/// Splits on whitespace; `:`, `,` and `->` are separate tokens.
fn tokenize(line_no: usize, line: &str) -> Vec<Token<'_>> {
    let line = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let bytes = line.as_bytes();
    let mut i = 0;
    let col = |byte: usize| line[..byte].chars().count() + 1;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c == b':' || c == b',' {
            i += 1;
        } else if line[i..].starts_with("->") {
            i += 2;
        } else {
            while i < bytes.len()
                && !bytes[i].is_ascii_whitespace()
                && bytes[i] != b':'
                && bytes[i] != b','
                && !line[i..].starts_with("->")
            {
                i += 1;
            }
        }
        out.push(Token { text: &line[start..i], span: SourceSpan { line: line_no, start: col(start), end: col(i) } });
    }
    out
}

fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<Token<'_>>)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, tokenize(i + 1, l))).filter(|(_, t)| !t.is_empty())
}

fn line_span(line: usize, toks: &[Token<'_>]) -> SourceSpan {
    let start = toks.first().map_or(1, |t| t.span.start);
    let end = toks.last().map_or(1, |t| t.span.end);
    SourceSpan { line, start, end }
}

fn expect_len(line: usize, toks: &[Token<'_>], n: &[usize], what: &str) -> Result<(), ParseError> {
    if n.contains(&toks.len()) {
        Ok(())
    } else {
        Err(syntax(line_span(line, toks), format!("malformed `{what}` line")))
    }
}

fn expect_word(tok: &Token<'_>, word: &str) -> Result<(), ParseError> {
    if tok.text == word {
        Ok(())
    } else {
        Err(syntax(tok.span, format!("expected `{word}`, found `{}`", tok.text)))
    }
}

fn lookup_state(g: &GameGraph, tok: &Token<'_>) -> Result<StateId, ParseError> {
    g.state_id(tok.text)
        .ok_or_else(|| ParseError { kind: ParseErrorKind::UnknownState(tok.text.to_string()), span: tok.span })
}

/// Resolves an edge token leaving `s`: `@k`, then labels, then target names.
pub fn resolve_edge(g: &GameGraph, s: StateId, token: &str) -> Result<EdgeId, ParseErrorKind> {
    let out = g.out_edges(s);
    if let Some(k) = token.strip_prefix('@').and_then(|k| k.parse::<usize>().ok()) {
        return out.get(k).copied().ok_or_else(|| unknown_edge(g, s, token));
    }
    let by_label: Vec<EdgeId> = out.iter().copied().filter(|&e| g.edge(e).label.as_deref() == Some(token)).collect();
    let by_target: Vec<EdgeId> = out.iter().copied().filter(|&e| g.name(g.edge(e).target) == token).collect();
    let candidates = if by_label.is_empty() { by_target } else { by_label };
    match candidates.as_slice() {
        [e] => Ok(*e),
        [] => Err(unknown_edge(g, s, token)),
        _ => Err(ParseErrorKind::AmbiguousEdge { state: g.name(s).to_string(), token: token.to_string() }),
    }
}

fn unknown_edge(g: &GameGraph, s: StateId, token: &str) -> ParseErrorKind {
    ParseErrorKind::UnknownEdge { state: g.name(s).to_string(), token: token.to_string() }
}

/// Shortest token naming `e` from its source.
pub fn edge_token(g: &GameGraph, e: EdgeId) -> String {
    let edge = g.edge(e);
    if let Some(l) = &edge.label {
        if resolve_edge(g, edge.source, l) == Ok(e) {
            return l.clone();
        }
    }
    let target = g.name(edge.target);
    if resolve_edge(g, edge.source, target) == Ok(e) {
        return target.to_string();
    }
    let k = g.out_edges(edge.source).iter().position(|&x| x == e).expect("edge leaves its source");
    format!("@{k}")
}

fn parse_edge(g: &GameGraph, s: StateId, tok: &Token<'_>) -> Result<EdgeId, ParseError> {
    resolve_edge(g, s, tok.text).map_err(|kind| ParseError { kind, span: tok.span })
}

fn parse_int(tok: &Token<'_>) -> Result<i64, ParseError> {
    tok.text.parse().map_err(|_| syntax(tok.span, format!("expected an integer, found `{}`", tok.text)))
}

fn parse_probability(tok: &Token<'_>) -> Result<Rational, ParseError> {
    let err = || syntax(tok.span, format!("expected a probability num/den, found `{}`", tok.text));
    let (n, d) = tok.text.split_once('/').ok_or_else(err)?;
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(n, d))
}

fn empty_input() -> ParseError {
    syntax(SourceSpan { line: 1, start: 1, end: 1 }, "empty input")
}

/// A parsed game file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedGame {
    pub game: GameGraph,
    pub measure: Measure,
    pub targets: BTreeSet<StateId>,
}

pub fn parse_game(text: &str) -> Result<ParsedGame, ParseError> {
    let mut it = lines(text);
    let (l, head) = it.next().ok_or_else(empty_input)?;
    expect_len(l, &head, &[2], "game")?;
    expect_word(&head[0], "game")?;
    let measure = match head[1].text {
        "mean-payoff" => Measure::MeanPayoff,
        "shortest-path" => Measure::ShortestPath,
        other => return Err(syntax(head[1].span, format!("unknown measure `{other}`"))),
    };
    let mut g = GameGraph::new();
    let mut decl: BTreeMap<StateId, SourceSpan> = BTreeMap::new();
    let mut edge_span: Vec<SourceSpan> = Vec::new();
    let mut init: Option<(StateId, SourceSpan)> = None;
    let mut targets = BTreeSet::new();
    let mut pending_edges = Vec::new();
    for (l, toks) in it {
        match toks[0].text {
            "state" => {
                expect_len(l, &toks, &[3], "state")?;
                let owner = match toks[2].text {
                    "p1" => Player::P1,
                    "p2" => Player::P2,
                    other => return Err(syntax(toks[2].span, format!("owner must be p1 or p2, found `{other}`"))),
                };
                if g.state_id(toks[1].text).is_some() {
                    return Err(ParseError {
                        kind: ParseErrorKind::DuplicateState(toks[1].text.to_string()),
                        span: toks[1].span,
                    });
                }
                let s = g.add_state(toks[1].text, owner);
                decl.insert(s, line_span(l, &toks));
            }
            "edge" => {
                expect_len(l, &toks, &[4, 6], "edge")?;
                if toks.len() == 6 {
                    expect_word(&toks[4], "label")?;
                }
                pending_edges.push((l, toks));
            }
            "init" => {
                expect_len(l, &toks, &[2], "init")?;
                if init.is_some() {
                    return Err(syntax(line_span(l, &toks), "initial state given twice"));
                }
                pending_edges.push((l, toks));
            }
            "target" => {
                expect_len(l, &toks, &[2], "target")?;
                if measure != Measure::ShortestPath {
                    return Err(syntax(toks[0].span, "targets are only allowed in shortest-path games"));
                }
                pending_edges.push((l, toks));
            }
            other => return Err(syntax(toks[0].span, format!("unknown declaration `{other}`"))),
        }
    }
    // States may be declared after the edges that use them.
    let mut last_line = 1;
    for (l, toks) in pending_edges {
        last_line = last_line.max(l);
        match toks[0].text {
            "edge" => {
                let src = lookup_state(&g, &toks[1])?;
                let dst = lookup_state(&g, &toks[2])?;
                let w = parse_int(&toks[3])?;
                if toks.len() == 6 {
                    g.add_labeled_edge(src, dst, w, toks[5].text);
                } else {
                    g.add_edge(src, dst, w);
                }
                edge_span.push(line_span(l, &toks));
            }
            "init" => {
                if init.is_some() {
                    return Err(syntax(line_span(l, &toks), "initial state given twice"));
                }
                init = Some((lookup_state(&g, &toks[1])?, line_span(l, &toks)));
            }
            _ => {
                targets.insert(lookup_state(&g, &toks[1])?);
            }
        }
    }
    let Some((init, _)) = init else {
        return Err(syntax(SourceSpan { line: last_line, start: 1, end: 1 }, "missing `init` declaration"));
    };
    g.set_initial(init);
    if measure == Measure::ShortestPath && targets.is_empty() {
        return Err(syntax(SourceSpan { line: last_line, start: 1, end: 1 }, "shortest-path game needs a `target`"));
    }
    if let Err(e) = g.check(measure) {
        let span = match &e {
            ModelError::BlockingState { state, .. } => decl[state],
            ModelError::NonPositiveWeight { edge, .. } | ModelError::DanglingEdge { edge } => edge_span[*edge],
            _ => SourceSpan { line: 1, start: 1, end: 1 },
        };
        return Err(ParseError { kind: ParseErrorKind::Invalid(e), span });
    }
    Ok(ParsedGame { game: g, measure, targets })
}

pub fn serialize_game(p: &ParsedGame) -> String {
    let g = &p.game;
    let mut out = format!("game {}\n", p.measure);
    for st in g.states() {
        out += &format!("state {} {}\n", st.name, st.owner);
    }
    for e in g.edges() {
        out += &format!("edge {} {} {}", g.name(e.source), g.name(e.target), e.weight);
        if let Some(l) = &e.label {
            out += &format!(" label {l}");
        }
        out.push('\n');
    }
    out += &format!("init {}\n", g.name(g.initial()));
    for &t in &p.targets {
        out += &format!("target {}\n", g.name(t));
    }
    out
}

/// A parsed adversary model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedModel {
    Memoryless(StochasticModel),
    Mealy(FiniteMemoryModel),
}

/// Parses `<state>: <edge> p/q, ...` starting at `toks[0]` = state.
fn parse_row(g: &GameGraph, l: usize, toks: &[Token<'_>]) -> Result<(StateId, Vec<(EdgeId, Rational)>), ParseError> {
    if toks.len() < 2 || toks[1].text != ":" {
        return Err(syntax(line_span(l, toks), "expected `<state>: <edge> <p/q>, ...`"));
    }
    let s = lookup_state(g, &toks[0])?;
    if g.owner(s) != Player::P2 {
        return Err(ParseError { kind: ParseErrorKind::Invalid(ModelError::NotAdversaryState { state: s, name: g.name(s).to_string() }), span: toks[0].span });
    }
    let mut dist: Vec<(EdgeId, Rational)> = Vec::new();
    for entry in toks[2..].split(|t| t.text == ",") {
        let [edge, prob] = entry else {
            return Err(syntax(line_span(l, toks), "each entry is `<edge> <p/q>`"));
        };
        let e = parse_edge(g, s, edge)?;
        if dist.iter().any(|(x, _)| *x == e) {
            return Err(ParseError {
                kind: ParseErrorKind::Invalid(ModelError::DuplicateEntry { state: s, edge: e }),
                span: edge.span,
            });
        }
        dist.push((e, parse_probability(prob)?));
    }
    let sum = dist.iter().fold(Rational::zero(), |acc, (_, p)| acc + p);
    if !sum.is_one() {
        return Err(ParseError {
            kind: ParseErrorKind::Invalid(ModelError::ProbabilityNotOne { state: s, name: g.name(s).to_string(), sum }),
            span: line_span(l, toks),
        });
    }
    Ok((s, dist))
}

pub fn parse_model(text: &str, g: &GameGraph) -> Result<ParsedModel, ParseError> {
    let mut it = lines(text);
    let (l, head) = it.next().ok_or_else(empty_input)?;
    let head_span = line_span(l, &head);
    expect_word(&head[0], "model")?;
    let invalid = |e: ModelError| ParseError { kind: ParseErrorKind::Invalid(e), span: head_span };
    match head.get(1).map(|t| t.text) {
        Some("memoryless") => {
            expect_len(l, &head, &[2], "model")?;
            let mut m = StochasticModel::new();
            for (l, toks) in it {
                expect_word(&toks[0], "row")?;
                let (s, dist) = parse_row(g, l, &toks[1..])?;
                if m.row(s).is_some() {
                    return Err(syntax(toks[1].span, "row given twice"));
                }
                m.set_row(s, dist);
            }
            m.check(g).map_err(invalid)?;
            Ok(ParsedModel::Memoryless(m))
        }
        Some("mealy") => {
            expect_len(l, &head, &[3], "model")?;
            let k: usize = parse_int(&head[2])?.try_into().map_err(|_| syntax(head[2].span, "negative size"))?;
            let mut names: Vec<String> = Vec::new();
            let mut initial = None;
            let mut body = Vec::new();
            for (l, toks) in it {
                if toks[0].text == "mem" {
                    parse_mem_line(l, &toks, &mut names, &mut initial)?;
                } else {
                    body.push((l, toks));
                }
            }
            check_memory(&head, &names, k, initial, head_span)?;
            let mem_id = |t: &Token<'_>| {
                names.iter().position(|n| n == t.text).ok_or_else(|| syntax(t.span, format!("unknown memory `{}`", t.text)))
            };
            let mut fm = FiniteMemoryModel::new(names.clone(), initial.unwrap());
            for (l, toks) in body {
                match toks[0].text {
                    "update" => {
                        expect_len(l, &toks, &[5], "update")?;
                        expect_word(&toks[3], "->")?;
                        let from = mem_id(&toks[1])?;
                        let s = lookup_state(g, &toks[2])?;
                        fm.set_update(from, s, mem_id(&toks[4])?);
                    }
                    "row" => {
                        let mem = mem_id(toks.get(1).ok_or_else(|| syntax(toks[0].span, "missing memory"))?)?;
                        let (s, dist) = parse_row(g, l, &toks[2..])?;
                        if fm.row(mem, s).is_some() {
                            return Err(syntax(toks[2].span, "row given twice"));
                        }
                        fm.set_row(mem, s, dist);
                    }
                    other => return Err(syntax(toks[0].span, format!("unknown declaration `{other}`"))),
                }
            }
            fm.check(g).map_err(invalid)?;
            Ok(ParsedModel::Mealy(fm))
        }
        _ => Err(syntax(head_span, "expected `model memoryless` or `model mealy <k>`")),
    }
}

fn parse_mem_line(l: usize, toks: &[Token<'_>], names: &mut Vec<String>, initial: &mut Option<usize>) -> Result<(), ParseError> {
    expect_len(l, toks, &[2, 3], "mem")?;
    if names.iter().any(|n| n == toks[1].text) {
        return Err(syntax(toks[1].span, format!("memory `{}` declared twice", toks[1].text)));
    }
    if toks.len() == 3 {
        expect_word(&toks[2], "init")?;
        if initial.is_some() {
            return Err(syntax(toks[2].span, "initial memory given twice"));
        }
        *initial = Some(names.len());
    }
    names.push(toks[1].text.to_string());
    Ok(())
}

fn check_memory(head: &[Token<'_>], names: &[String], k: usize, initial: Option<usize>, span: SourceSpan) -> Result<(), ParseError> {
    if names.len() != k {
        return Err(syntax(head.last().map_or(span, |t| t.span), format!("header announces {k} memory elements, found {}", names.len())));
    }
    if initial.is_none() {
        return Err(syntax(span, "no initial memory (`mem <id> init`)"));
    }
    Ok(())
}

fn row_text(g: &GameGraph, dist: &[(EdgeId, Rational)]) -> String {
    dist.iter()
        .map(|(e, p)| format!("{} {}/{}", edge_token(g, *e), p.numer(), p.denom()))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn serialize_model(m: &ParsedModel, g: &GameGraph) -> String {
    match m {
        ParsedModel::Memoryless(m) => {
            let mut out = String::from("model memoryless\n");
            for (s, dist) in m.rows() {
                out += &format!("row {}: {}\n", g.name(s), row_text(g, dist));
            }
            out
        }
        ParsedModel::Mealy(fm) => {
            let names = fm.memory();
            let mut out = format!("model mealy {}\n", names.len());
            for (i, n) in names.iter().enumerate() {
                out += &format!("mem {n}{}\n", if i == fm.initial() { " init" } else { "" });
            }
            for ((m, s), n) in fm.updates() {
                out += &format!("update {} {} -> {}\n", names[m], g.name(s), names[n]);
            }
            for ((m, s), dist) in fm.rows() {
                out += &format!("row {} {}: {}\n", names[m], g.name(s), row_text(g, dist));
            }
            out
        }
    }
}

/// Parses a strategy and checks it is defined on every reachable
/// (memory, player-1 state) pair of `g`.
pub fn parse_strategy(text: &str, g: &GameGraph) -> Result<FiniteMemoryStrategy, ParseError> {
    let mut it = lines(text);
    let (l, head) = it.next().ok_or_else(empty_input)?;
    let head_span = line_span(l, &head);
    expect_len(l, &head, &[2], "strategy")?;
    expect_word(&head[0], "strategy")?;
    let k: usize = parse_int(&head[1])?.try_into().map_err(|_| syntax(head[1].span, "negative size"))?;
    let mut names = Vec::new();
    let mut initial = None;
    let mut body = Vec::new();
    for (l, toks) in it {
        if toks[0].text == "mem" {
            parse_mem_line(l, &toks, &mut names, &mut initial)?;
        } else {
            body.push((l, toks));
        }
    }
    check_memory(&head, &names, k, initial, head_span)?;
    let mem_id = |t: &Token<'_>| {
        names.iter().position(|n| n == t.text).ok_or_else(|| syntax(t.span, format!("unknown memory `{}`", t.text)))
    };
    let mut s = FiniteMemoryStrategy::new(names.clone(), initial.unwrap());
    let mut seen_act = BTreeSet::new();
    let mut seen_update = BTreeSet::new();
    for (l, toks) in body {
        match toks[0].text {
            "act" => {
                expect_len(l, &toks, &[5], "act")?;
                expect_word(&toks[3], "->")?;
                let m = mem_id(&toks[1])?;
                let st = lookup_state(g, &toks[2])?;
                if g.owner(st) != Player::P1 {
                    return Err(syntax(toks[2].span, format!("`{}` is not a player-1 state", toks[2].text)));
                }
                let e = parse_edge(g, st, &toks[4]).map_err(|e| syntax(e.span, e.kind.to_string()))?;
                if !seen_act.insert((m, st)) {
                    return Err(syntax(line_span(l, &toks), "action given twice"));
                }
                s.set_action(m, st, e);
            }
            "update" => {
                expect_len(l, &toks, &[6], "update")?;
                expect_word(&toks[4], "->")?;
                let m = mem_id(&toks[1])?;
                let st = lookup_state(g, &toks[2])?;
                let e = parse_edge(g, st, &toks[3]).map_err(|e| syntax(e.span, e.kind.to_string()))?;
                if !seen_update.insert((m, e)) {
                    return Err(syntax(line_span(l, &toks), "update given twice"));
                }
                s.set_update(m, e, mem_id(&toks[5])?);
            }
            other => return Err(syntax(toks[0].span, format!("unknown declaration `{other}`"))),
        }
    }
    product(g, &s).map_err(|e| ParseError { kind: ParseErrorKind::Invalid(e), span: head_span })?;
    Ok(s)
}

pub fn serialize_strategy(s: &FiniteMemoryStrategy, g: &GameGraph) -> String {
    let names = s.memory_names();
    let mut out = format!("strategy {}\n", names.len());
    for (i, n) in names.iter().enumerate() {
        out += &format!("mem {n}{}\n", if i == s.initial_memory() { " init" } else { "" });
    }
    for ((m, st), e) in s.actions() {
        out += &format!("act {} {} -> {}\n", names[m], g.name(st), edge_token(g, e));
    }
    for ((m, e), n) in s.updates() {
        let edge = g.edge(e);
        out += &format!("update {} {} {} -> {}\n", names[m], g.name(edge.source), edge_token(g, e), names[n]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    const SMALL_SP_GAME: &str = "\
game shortest-path
state s1 p1
state s2 p2
state s3 p1
edge s1 s2 1
edge s2 s1 1
edge s2 s3 1
edge s1 s3 5
edge s3 s3 1
init s1
target s3
";

    #[test]
    fn game_round_trip() {
        let p = parse_game(SMALL_SP_GAME).unwrap();
        assert_eq!(p.game.num_states(), 3);
        assert_eq!(p.targets, BTreeSet::from([2]));
        assert_eq!(parse_game(&serialize_game(&p)).unwrap(), p);
    }

    #[test]
    fn game_errors() {
        let e = parse_game("").unwrap_err();
        assert_eq!(e.span.line, 1);
        let e = parse_game("game mean-payoff\nstate a p1\nedge a b 1\ninit a\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownState("b".into()));
        assert_eq!(e.span, SourceSpan { line: 3, start: 8, end: 9 });
        let e = parse_game("game mean-payoff\nstate a p1\nstate b p1\nedge a b 1\ninit a\n").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Invalid(ModelError::BlockingState { .. })));
        assert_eq!(e.span.line, 3);
        let e = parse_game(&SMALL_SP_GAME.replace("edge s1 s3 5", "edge s1 s3 0")).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Invalid(ModelError::NonPositiveWeight { .. })));
        let e = parse_game("game mean-payoff\nstate a p1\nstate a p2\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DuplicateState("a".into()));
    }

    #[test]
    fn model_rows() {
        let g = parse_game(SMALL_SP_GAME).unwrap().game;
        let m = parse_model("model memoryless\nrow s2: s1 1/2, s3 1/2\n", &g).unwrap();
        let ParsedModel::Memoryless(sm) = &m else { panic!() };
        assert_eq!(sm.row(1).unwrap(), &vec![(1, ratio(1, 2)), (2, ratio(1, 2))]);
        assert_eq!(parse_model(&serialize_model(&m, &g), &g).unwrap(), m);
        let e = parse_model("model memoryless\nrow s2: s1 6/10, s3 1/2\n", &g).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Invalid(ModelError::ProbabilityNotOne { ref sum, .. }) if *sum == ratio(11, 10)));
        let e = parse_model("model memoryless\n", &g).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Invalid(ModelError::MissingRow { .. })));
        let mealy = "model mealy 2\nmem even init\nmem odd\nupdate even s2 -> odd\nupdate odd s2 -> even\nrow even s2: s1 1/1\nrow odd s2: s3 1/1\n";
        let m = parse_model(mealy, &g).unwrap();
        assert_eq!(parse_model(&serialize_model(&m, &g), &g).unwrap(), m);
    }

    #[test]
    fn strategy_round_trip_and_errors() {
        let g = parse_game(SMALL_SP_GAME).unwrap().game;
        let text = "strategy 2\nmem 0 init\nmem 2\nact 0 s1 -> s2\nact 0 s3 -> s3\nact 2 s1 -> s3\nact 2 s3 -> s3\nupdate 0 s2 s1 -> 2\n";
        let s = parse_strategy(text, &g).unwrap();
        assert_eq!(serialize_strategy(&s, &g), text);
        let e = parse_strategy("strategy 1\nmem 0 init\nact 0 s1 -> s1\n", &g).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        assert_eq!(e.span.line, 3);
        let e = parse_strategy("strategy 1\nmem 0 init\nact 0 s1 -> s2\n", &g).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Invalid(ModelError::UndefinedAction { .. })));
    }
}
