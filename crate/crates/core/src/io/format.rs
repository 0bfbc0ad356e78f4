//! The whitespace/keyword `.pomdp` text format.
//!
//! Supported subset:
//!
//! ```text
//! discount: <real>                      # optional, exposed but unused by the model
//! values: cost | reward                 # default cost; rewards are negated
//! states: <count> | <name> <name> ...
//! actions: <count> | <name> ...
//! observations: <count> | <name> ...
//! start: uniform | <p_0> ... <p_{n-1}>  # optional
//! T: <a>              (uniform | identity | n×n numbers)
//! T: <a> : <i>        (uniform | n numbers)
//! T: <a> : <i> : <j> <p>
//! O: <a>              (uniform | identity | n×o numbers)
//! O: <a> : <j>        (uniform | o numbers)
//! O: <a> : <j> : <o> <p>
//! R: <a> : <i> : * : * <value>
//! terminal: <n numbers>                 # extension: terminal cost vector
//! ```
//!
//! Specifiers are an index, a declared name or `*`. Later entries
//! overwrite earlier ones; unspecified entries are zero. `#` starts a
//! comment. Layout is free: line breaks only separate tokens.

use std::fmt::Write as _;

use thiserror::Error;

use crate::fmt::g17;
use crate::model::{validate_model, Belief, Labels, PomdpModel, Violation, ViolationKind};

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("dimension mismatch at {line}:{column}: {message}")]
    DimensionMismatch {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown {kind} name {name:?} at {line}:{column}")]
    UnknownName {
        kind: &'static str,
        name: String,
        line: usize,
        column: usize,
    },
    #[error("duplicate definition of {what} at {line}:{column}")]
    Duplicate {
        what: String,
        line: usize,
        column: usize,
    },
    #[error("{matrix} matrix of action {action}: row {row} sums to {sum}")]
    Stochasticity {
        matrix: &'static str,
        action: usize,
        row: usize,
        sum: f64,
    },
    #[error("invalid model: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidModel(Vec<Violation>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueKind {
    #[default]
    Cost,
    Reward,
}

/// A parsed file: the model plus optional header data.
#[derive(Debug, Clone, PartialEq)]
pub struct PomdpDocument {
    pub model: PomdpModel,
    pub discount: Option<f64>,
    pub values: ValueKind,
    pub start: Option<Belief>,
}

/// Parses and validates a model.
pub fn parse(text: &str) -> Result<PomdpModel, ParseError> {
    parse_document(text).map(|d| d.model)
}

/// Parses and validates, keeping the header data.
pub fn parse_document(text: &str) -> Result<PomdpDocument, ParseError> {
    let mut doc = parse_unvalidated(text)?;
    let report = validate_model(&doc.model);
    if let Some(v) = report.violations.iter().find(|v| matches!(v.kind, ViolationKind::RowSum(_))) {
        return Err(stochasticity_error(v));
    }
    if !report.is_ok() {
        return Err(ParseError::InvalidModel(report.violations));
    }
    doc.model = doc
        .model
        .validated()
        .map_err(|e| match e {
            crate::Error::InvalidModel(v) => ParseError::InvalidModel(v),
            other => ParseError::InvalidModel(vec![Violation {
                location: other.to_string(),
                kind: ViolationKind::EmptySpace,
            }]),
        })?;
    Ok(doc)
}

fn stochasticity_error(v: &Violation) -> ParseError {
    // location is `transition[a][i]` or `observation[a][i]`
    let (matrix, rest) = v.location.split_once('[').unwrap_or((&v.location, ""));
    let idx: Vec<usize> = rest
        .split(|c| c == '[' || c == ']')
        .filter_map(|s| s.parse().ok())
        .collect();
    let sum = match v.kind {
        ViolationKind::RowSum(s) => s,
        _ => f64::NAN,
    };
    ParseError::Stochasticity {
        matrix: if matrix == "transition" { "transition" } else { "observation" },
        action: idx.first().copied().unwrap_or(0),
        row: idx.get(1).copied().unwrap_or(0),
        sum,
    }
}

#[derive(Debug, Clone)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn tokenize<'a>(text: &'a str) -> Vec<Token<'a>> {
    let mut out = Vec::new();
    for (ln, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let line = line.split('#').next().unwrap_or("");
        let mut start: Option<usize> = None;
        let push = |out: &mut Vec<Token<'a>>, s: usize, e: usize| {
            out.push(Token {
                text: &line[s..e],
                line: ln + 1,
                column: line[..s].chars().count() + 1,
            })
        };
        for (i, ch) in line.char_indices() {
            if ch.is_whitespace() || ch == ':' {
                if let Some(s) = start.take() {
                    push(&mut out, s, i);
                }
                if ch == ':' {
                    push(&mut out, i, i + 1);
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            push(&mut out, s, line.len());
        }
    }
    out
}

const KEYWORDS: [&str; 10] = [
    "discount",
    "values",
    "states",
    "actions",
    "observations",
    "start",
    "T",
    "O",
    "R",
    "terminal",
];

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !KEYWORDS.contains(&s)
        && !matches!(s, "uniform" | "identity" | "reward" | "cost")
}

#[derive(Debug, Clone)]
struct Space {
    n: usize,
    names: Option<Vec<String>>,
}

enum Spec {
    All,
    One(usize),
}

impl Spec {
    fn indices(&self, n: usize) -> std::ops::Range<usize> {
        match *self {
            Spec::All => 0..n,
            Spec::One(i) => i..i + 1,
        }
    }
}

struct Parser<'a> {
    toks: Vec<Token<'a>>,
    pos: usize,
    eof: (usize, usize),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.eof, |t| (t.line, t.column))
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        ParseError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<Token<'a>, ParseError> {
        let t = self.peek().cloned().ok_or_else(|| self.syntax("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn is_directive_at(&self, i: usize) -> bool {
        match (self.toks.get(i), self.toks.get(i + 1)) {
            (Some(k), Some(c)) => KEYWORDS.contains(&k.text) && c.text == ":",
            _ => false,
        }
    }

    fn expect_colon(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t.text == ":" => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.syntax("expected ':'")),
        }
    }

    fn at_colon(&self) -> bool {
        matches!(self.peek(), Some(t) if t.text == ":")
    }

    /// Tokens up to the next directive.
    fn operands(&mut self) -> Vec<Token<'a>> {
        let start = self.pos;
        while self.pos < self.toks.len() && !self.is_directive_at(self.pos) {
            self.pos += 1;
        }
        self.toks[start..self.pos].to_vec()
    }

    fn spec(&mut self, space: &Space, kind: &'static str) -> Result<Spec, ParseError> {
        let t = self.next()?;
        if t.text == "*" {
            return Ok(Spec::All);
        }
        if t.text == ":" {
            return Err(ParseError::Syntax {
                line: t.line,
                column: t.column,
                message: format!("expected {kind} specifier"),
            });
        }
        if let Some(i) = space.names.as_ref().and_then(|n| n.iter().position(|s| s == t.text)) {
            return Ok(Spec::One(i));
        }
        match t.text.parse::<usize>() {
            Ok(i) if i < space.n => Ok(Spec::One(i)),
            _ => Err(ParseError::UnknownName {
                kind,
                name: t.text.to_string(),
                line: t.line,
                column: t.column,
            }),
        }
    }
}

fn number(t: &Token<'_>) -> Result<f64, ParseError> {
    t.text
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ParseError::Syntax {
            line: t.line,
            column: t.column,
            message: format!("expected a number, found {:?}", t.text),
        })
}

fn numbers(toks: &[Token<'_>], expected: usize, at: (usize, usize), what: &str) -> Result<Vec<f64>, ParseError> {
    let values = toks.iter().map(number).collect::<Result<Vec<_>, _>>()?;
    if values.len() != expected {
        return Err(ParseError::DimensionMismatch {
            line: at.0,
            column: at.1,
            message: format!("{what} needs {expected} numbers, found {}", values.len()),
        });
    }
    Ok(values)
}

/// Either a keyword (`uniform`, `identity`) or a block of numbers.
fn matrix_operand(
    toks: &[Token<'_>],
    rows: usize,
    cols: usize,
    at: (usize, usize),
    what: &str,
) -> Result<Vec<Vec<f64>>, ParseError> {
    if let [only] = toks {
        match only.text {
            "uniform" => return Ok(vec![vec![1.0 / cols as f64; cols]; rows]),
            "identity" => {
                if rows != cols {
                    return Err(ParseError::DimensionMismatch {
                        line: only.line,
                        column: only.column,
                        message: format!("identity needs a square matrix, {what} is {rows}×{cols}"),
                    });
                }
                return Ok((0..rows)
                    .map(|i| (0..cols).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                    .collect());
            }
            _ => {}
        }
    }
    let flat = numbers(toks, rows * cols, at, what)?;
    Ok(flat.chunks(cols).map(|c| c.to_vec()).collect())
}

fn row_operand(toks: &[Token<'_>], cols: usize, at: (usize, usize), what: &str) -> Result<Vec<f64>, ParseError> {
    if let [only] = toks {
        if only.text == "uniform" {
            return Ok(vec![1.0 / cols as f64; cols]);
        }
    }
    numbers(toks, cols, at, what)
}

/// Parses the structure of a file without checking stochasticity or cost
/// signs. Used by `validate` to report every violation at once.
pub fn parse_unvalidated(text: &str) -> Result<PomdpDocument, ParseError> {
    let toks = tokenize(text);
    let eof = (text.lines().count().max(1), 1);
    let mut p = Parser { toks, pos: 0, eof };

    let mut discount = None;
    let mut values: Option<ValueKind> = None;
    let mut spaces: [Option<Space>; 3] = [None, None, None];
    let mut start_ops: Option<(Vec<String>, (usize, usize))> = None;

    let mut transition: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut observation: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut cost: Vec<Vec<f64>> = Vec::new();
    let mut terminal: Option<Vec<f64>> = None;
    let mut body_started = false;

    while p.peek().is_some() {
        if !p.is_directive_at(p.pos) {
            return Err(p.syntax(format!("expected a directive, found {:?}", p.peek().unwrap().text)));
        }
        let kw = p.next()?;
        let at = (kw.line, kw.column);
        p.expect_colon()?;
        let dup = |what: &str| ParseError::Duplicate {
            what: what.to_string(),
            line: at.0,
            column: at.1,
        };

        match kw.text {
            "discount" | "values" | "states" | "actions" | "observations" | "start" if body_started => {
                return Err(ParseError::Syntax {
                    line: at.0,
                    column: at.1,
                    message: format!("{} must appear before T:, O:, R: and terminal:", kw.text),
                });
            }
            "discount" => {
                if discount.is_some() {
                    return Err(dup("discount"));
                }
                let ops = p.operands();
                discount = Some(numbers(&ops, 1, at, "discount")?[0]);
            }
            "values" => {
                if values.is_some() {
                    return Err(dup("values"));
                }
                let ops = p.operands();
                values = Some(match ops.iter().map(|t| t.text).collect::<Vec<_>>().as_slice() {
                    ["cost"] => ValueKind::Cost,
                    ["reward"] => ValueKind::Reward,
                    _ => {
                        return Err(ParseError::Syntax {
                            line: at.0,
                            column: at.1,
                            message: "values must be `cost` or `reward`".into(),
                        })
                    }
                });
            }
            "states" | "actions" | "observations" => {
                let slot = match kw.text {
                    "states" => 0,
                    "actions" => 1,
                    _ => 2,
                };
                if spaces[slot].is_some() {
                    return Err(dup(kw.text));
                }
                let ops = p.operands();
                spaces[slot] = Some(space_operand(&ops, at, kw.text)?);
            }
            "start" => {
                if start_ops.is_some() {
                    return Err(dup("start"));
                }
                let ops = p.operands();
                start_ops = Some((ops.iter().map(|t| t.text.to_string()).collect(), at));
            }
            body => {
                let (Some(states), Some(actions), Some(obs)) = (&spaces[0], &spaces[1], &spaces[2]) else {
                    return Err(ParseError::Syntax {
                        line: at.0,
                        column: at.1,
                        message: "states, actions and observations must be declared first".into(),
                    });
                };
                let (n, na, no) = (states.n, actions.n, obs.n);
                if !body_started {
                    check_size(n, na, no, at)?;
                    body_started = true;
                    transition = vec![vec![vec![0.0; n]; n]; na];
                    observation = vec![vec![vec![0.0; no]; n]; na];
                    cost = vec![vec![0.0; n]; na];
                }
                match body {
                    "T" | "O" => {
                        let (cols_space, cols, target, name) = if body == "T" {
                            (states, n, &mut transition, "transition")
                        } else {
                            (obs, no, &mut observation, "observation")
                        };
                        let a = p.spec(actions, "action")?;
                        if !p.at_colon() {
                            let ops = p.operands();
                            let m = matrix_operand(&ops, n, cols, at, name)?;
                            for ai in a.indices(na) {
                                target[ai] = m.clone();
                            }
                            continue;
                        }
                        p.expect_colon()?;
                        let i = p.spec(states, "state")?;
                        if !p.at_colon() {
                            let ops = p.operands();
                            let row = row_operand(&ops, cols, at, name)?;
                            for ai in a.indices(na) {
                                for ii in i.indices(n) {
                                    target[ai][ii] = row.clone();
                                }
                            }
                            continue;
                        }
                        p.expect_colon()?;
                        let j = p.spec(cols_space, if body == "T" { "state" } else { "observation" })?;
                        let ops = p.operands();
                        let v = numbers(&ops, 1, at, "probability entry")?[0];
                        for ai in a.indices(na) {
                            for ii in i.indices(n) {
                                for jj in j.indices(cols) {
                                    target[ai][ii][jj] = v;
                                }
                            }
                        }
                    }
                    "R" => {
                        let a = p.spec(actions, "action")?;
                        p.expect_colon()?;
                        let i = p.spec(states, "state")?;
                        for _ in 0..2 {
                            p.expect_colon()?;
                            let t = p.next()?;
                            if t.text != "*" {
                                return Err(ParseError::Syntax {
                                    line: t.line,
                                    column: t.column,
                                    message: "costs may depend only on action and state; use `*` for end state and observation".into(),
                                });
                            }
                        }
                        let ops = p.operands();
                        let v = numbers(&ops, 1, at, "cost entry")?[0];
                        for ai in a.indices(na) {
                            for ii in i.indices(n) {
                                cost[ai][ii] = v;
                            }
                        }
                    }
                    "terminal" => {
                        if terminal.is_some() {
                            return Err(dup("terminal"));
                        }
                        let ops = p.operands();
                        terminal = Some(numbers(&ops, n, at, "terminal cost")?);
                    }
                    _ => unreachable!("keyword list is closed"),
                }
            }
        }
    }

    let [Some(states), Some(actions), Some(obs)] = spaces else {
        let missing = ["states", "actions", "observations"]
            .iter()
            .zip(&spaces)
            .find(|(_, s)| s.is_none())
            .map(|(n, _)| *n)
            .unwrap_or("states");
        return Err(ParseError::Syntax {
            line: eof.0,
            column: 1,
            message: format!("missing `{missing}:` declaration"),
        });
    };
    let n = states.n;
    if !body_started {
        check_size(n, actions.n, obs.n, eof)?;
        transition = vec![vec![vec![0.0; n]; n]; actions.n];
        observation = vec![vec![vec![0.0; obs.n]; n]; actions.n];
        cost = vec![vec![0.0; n]; actions.n];
    }
    let values = values.unwrap_or_default();
    if values == ValueKind::Reward {
        log::warn!("values: reward; negating rewards into costs");
        for row in cost.iter_mut() {
            for c in row.iter_mut() {
                *c = if *c == 0.0 { 0.0 } else { -*c };
            }
        }
    }

    let start = match start_ops {
        None => None,
        Some((ops, at)) => {
            let weights = if ops.len() == 1 && ops[0] == "uniform" {
                vec![1.0; n]
            } else {
                let w: Result<Vec<f64>, _> = ops.iter().map(|s| s.parse::<f64>()).collect();
                match w {
                    Ok(w) if w.len() == n => w,
                    _ => {
                        return Err(ParseError::DimensionMismatch {
                            line: at.0,
                            column: at.1,
                            message: format!("start needs `uniform` or {n} probabilities"),
                        })
                    }
                }
            };
            Some(Belief::new(weights).map_err(|e| ParseError::Syntax {
                line: at.0,
                column: at.1,
                message: e.to_string(),
            })?)
        }
    };

    let model = PomdpModel {
        n_states: n,
        n_actions: actions.n,
        n_observations: obs.n,
        transition,
        observation,
        stage_cost: cost,
        terminal_cost: terminal.unwrap_or_else(|| vec![0.0; n]),
        labels: Labels {
            states: states.names,
            actions: actions.names,
            observations: obs.names,
        },
    };
    Ok(PomdpDocument {
        model,
        discount,
        values,
        start,
    })
}

/// Upper bound on allocated matrix entries.
const MAX_ENTRIES: usize = 10_000_000;

fn check_size(n: usize, na: usize, no: usize, at: (usize, usize)) -> Result<(), ParseError> {
    let entries = n
        .checked_mul(n.max(no))
        .and_then(|x| x.checked_mul(na))
        .filter(|&x| x <= MAX_ENTRIES);
    if entries.is_none() {
        return Err(ParseError::DimensionMismatch {
            line: at.0,
            column: at.1,
            message: format!("model with {n} states, {na} actions, {no} observations exceeds {MAX_ENTRIES} entries"),
        });
    }
    Ok(())
}

fn space_operand(ops: &[Token<'_>], at: (usize, usize), what: &str) -> Result<Space, ParseError> {
    if ops.is_empty() {
        return Err(ParseError::Syntax {
            line: at.0,
            column: at.1,
            message: format!("{what}: needs a count or a name list"),
        });
    }
    if let [only] = ops {
        if let Ok(n) = only.text.parse::<usize>() {
            if n == 0 {
                return Err(ParseError::DimensionMismatch {
                    line: only.line,
                    column: only.column,
                    message: format!("{what} count must be positive"),
                });
            }
            return Ok(Space { n, names: None });
        }
    }
    let mut names: Vec<String> = Vec::with_capacity(ops.len());
    for t in ops {
        if !valid_name(t.text) {
            return Err(ParseError::Syntax {
                line: t.line,
                column: t.column,
                message: format!("invalid name {:?}", t.text),
            });
        }
        if names.iter().any(|n| n == t.text) {
            return Err(ParseError::Duplicate {
                what: format!("name {:?}", t.text),
                line: t.line,
                column: t.column,
            });
        }
        names.push(t.text.to_string());
    }
    Ok(Space {
        n: names.len(),
        names: Some(names),
    })
}

fn usable_names(names: &Option<Vec<String>>) -> Option<&Vec<String>> {
    names.as_ref().filter(|v| v.iter().all(|s| valid_name(s)))
}

/// Writes `model` in the same format. Zero cost entries and an all-zero
/// terminal vector are omitted.
pub fn serialize(model: &PomdpModel) -> String {
    let mut out = String::new();
    let states = usable_names(&model.labels.states);
    let actions = usable_names(&model.labels.actions);
    let observations = usable_names(&model.labels.observations);

    let space = |names: Option<&Vec<String>>, n: usize| names.map_or(n.to_string(), |v| v.join(" "));
    let name = |names: Option<&Vec<String>>, i: usize| names.map_or(i.to_string(), |v| v[i].clone());
    let row = |r: &[f64]| r.iter().map(|&x| g17(x)).collect::<Vec<_>>().join(" ");

    let _ = writeln!(out, "values: cost");
    let _ = writeln!(out, "states: {}", space(states, model.n_states));
    let _ = writeln!(out, "actions: {}", space(actions, model.n_actions));
    let _ = writeln!(out, "observations: {}", space(observations, model.n_observations));
    for a in 0..model.n_actions {
        let _ = writeln!(out, "T: {}", name(actions, a));
        for r in &model.transition[a] {
            let _ = writeln!(out, "{}", row(r));
        }
    }
    for a in 0..model.n_actions {
        let _ = writeln!(out, "O: {}", name(actions, a));
        for r in &model.observation[a] {
            let _ = writeln!(out, "{}", row(r));
        }
    }
    for a in 0..model.n_actions {
        for (i, &c) in model.stage_cost[a].iter().enumerate() {
            if c != 0.0 {
                let _ = writeln!(out, "R: {} : {} : * : * {}", name(actions, a), name(states, i), g17(c));
            }
        }
    }
    if model.terminal_cost.iter().any(|&c| c != 0.0) {
        let _ = writeln!(out, "# terminal: is a non-standard extension giving the terminal cost vector");
        let _ = writeln!(out, "terminal: {}", row(&model.terminal_cost));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::healthcare_model;

    #[test]
    fn keyword_expansion() {
        let text = "\
# two-state chain
values: cost
states: 2
actions: 1
observations: 2

T: 0
identity

O: 0
uniform

terminal: 0 1
";
        let m = parse(text).unwrap();
        assert_eq!(m.transition[0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(m.observation[0], vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert_eq!(m.terminal_cost, vec![0.0, 1.0]);
    }

    #[test]
    fn entries_wildcards_and_names() {
        let text = "states: a b\nactions: go\nobservations: x y\r\n\
T: * : * : b 1\n\
O: go : * uniform\n\
O: go : b : x 0.9\nO: go : b : y 0.1\n\
R: * : a : * : * 2.5\n\
start: 0.25 0.75\ndiscount: 0.9\n";
        // start/discount after body must be rejected
        assert!(matches!(parse(text), Err(ParseError::Syntax { .. })));
        let text = text.replace("start: 0.25 0.75\ndiscount: 0.9\n", "");
        let text = format!("discount: 0.9\nstart: 0.25 0.75\n{text}");
        let doc = parse_document(&text).unwrap();
        let m = &doc.model;
        assert_eq!(m.transition[0], vec![vec![0.0, 1.0], vec![0.0, 1.0]]);
        assert_eq!(m.observation[0], vec![vec![0.5, 0.5], vec![0.9, 0.1]]);
        assert_eq!(m.stage_cost[0], vec![2.5, 0.0]);
        assert_eq!(doc.discount, Some(0.9));
        assert_eq!(doc.start.unwrap().as_slice(), &[0.25, 0.75]);
        assert_eq!(m.labels.actions, Some(vec!["go".to_string()]));
    }

    #[test]
    fn rewards_are_negated() {
        let text = "values: reward\nstates: 1\nactions: 1\nobservations: 1\nT: 0 identity\nO: 0 identity\nR: 0 : 0 : * : * -3\n";
        let doc = parse_document(text).unwrap();
        assert_eq!(doc.model.stage_cost[0][0], 3.0);
        assert_eq!(doc.values, ValueKind::Reward);
    }

    #[test]
    fn row_sum_defect_names_action_and_row() {
        let text = "states: 3\nactions: 2\nobservations: 1\nT: * identity\nT: 1 : 0\n0.8 0.1 0\nO: * uniform\n";
        match parse(text) {
            Err(ParseError::Stochasticity { matrix, action, row, sum }) => {
                assert_eq!((matrix, action, row), ("transition", 1, 0));
                assert!((sum - 0.9).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn healthcare_round_trip_is_exact() {
        let m = healthcare_model();
        let text = serialize(&m);
        assert_eq!(parse(&text).unwrap(), m);
    }

    #[test]
    fn degenerate_model_serializes_to_eight_lines() {
        let m = PomdpModel::new(vec![vec![vec![1.0]]], vec![vec![vec![1.0]]], vec![vec![0.0]], vec![0.0]).unwrap();
        let text = serialize(&m);
        assert_eq!(text.lines().count(), 8, "{text}");
        assert_eq!(parse(&text).unwrap(), m);
    }

    #[test]
    fn tokens_carry_positions() {
        match parse("states: 2\nactions: 1\nobservations: 1\nT: 0\n0.5 zz\n") {
            Err(ParseError::Syntax { line, column, .. }) => assert_eq!((line, column), (5, 5)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
