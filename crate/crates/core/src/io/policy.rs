//! Plain-text policy files.
//!
//! ```text
//! # pomdp-smpc policy v1
//! horizon 1
//! discount 1
//! states 3
//! actions skip appointment diagnose treatment
//! stage 0 3
//! skip 0 0.80000000000000004 ...
//! ...
//! stage 1 1
//! - 0 4 30
//! ```
//!
//! Each stage lists its vector count, then one `action coeff_0 .. coeff_{n-1}`
//! line per vector; `-` marks the terminal vector. Floats use 17
//! significant digits so reading a file back is exact.

use std::fmt::Write as _;

use super::ParseError;
use crate::fmt::g17;
use crate::solver::{AlphaVector, AlphaVectorSet, PolicyStack};

const MAGIC: &str = "# pomdp-smpc policy v1";

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyFile {
    pub stack: PolicyStack,
    pub action_names: Vec<String>,
}

pub fn write_policy(stack: &PolicyStack, action_names: &[String]) -> String {
    let n_states = stack.per_stage[0].vectors.first().map_or(0, |v| v.coeffs.len());
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "horizon {}", stack.horizon());
    let _ = writeln!(out, "discount {}", g17(stack.discount));
    let _ = writeln!(out, "states {n_states}");
    let _ = writeln!(out, "actions {}", action_names.join(" "));
    for set in &stack.per_stage {
        let _ = writeln!(out, "stage {} {}", set.stage, set.len());
        for v in &set.vectors {
            let action = v.action.map_or("-".to_string(), |a| action_names[a].clone());
            let coeffs: Vec<String> = v.coeffs.iter().map(|&c| g17(c)).collect();
            let _ = writeln!(out, "{action} {}", coeffs.join(" "));
        }
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank, non-comment line as (line number, fields).
    fn next(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, l) in self.inner.by_ref() {
            let l = l.split('#').next().unwrap_or("").trim();
            self.last = i + 1;
            if !l.is_empty() {
                return Some((i + 1, l.split_whitespace().collect()));
            }
        }
        None
    }

    fn expect(&mut self, key: &str) -> Result<(usize, Vec<&'a str>), ParseError> {
        match self.next() {
            Some((ln, fields)) if fields.first() == Some(&key) => Ok((ln, fields[1..].to_vec())),
            Some((ln, _)) => Err(err(ln, format!("expected `{key}`"))),
            None => Err(err(self.last + 1, format!("missing `{key}`"))),
        }
    }
}

fn err(line: usize, message: String) -> ParseError {
    ParseError::Syntax {
        line,
        column: 1,
        message,
    }
}

fn one<T: std::str::FromStr>(line: usize, fields: &[&str], what: &str) -> Result<T, ParseError> {
    match fields {
        [x] => x.parse().map_err(|_| err(line, format!("bad {what} {x:?}"))),
        _ => Err(err(line, format!("`{what}` takes one value"))),
    }
}

pub fn parse_policy(text: &str) -> Result<PolicyFile, ParseError> {
    let mut lines = Lines {
        inner: text.lines().enumerate().peekable(),
        last: 0,
    };
    let (ln, h) = lines.expect("horizon")?;
    let horizon: usize = one(ln, &h, "horizon")?;
    let (ln, d) = lines.expect("discount")?;
    let discount: f64 = one(ln, &d, "discount")?;
    if !(0.0..=1.0).contains(&discount) {
        return Err(err(ln, format!("discount {discount} outside [0, 1]")));
    }
    let (ln, s) = lines.expect("states")?;
    let n_states: usize = one(ln, &s, "states")?;
    if n_states == 0 {
        return Err(err(ln, "states must be positive".into()));
    }
    let (ln, a) = lines.expect("actions")?;
    let action_names: Vec<String> = a.iter().map(|s| s.to_string()).collect();
    if action_names.is_empty() || action_names.iter().any(|n| n == "-") {
        return Err(err(ln, "action list must be nonempty and may not contain `-`".into()));
    }

    let mut per_stage = Vec::new();
    for k in 0..=horizon {
        let (ln, f) = lines.expect("stage")?;
        let [stage, count] = f.as_slice() else {
            return Err(err(ln, "`stage` takes an index and a count".into()));
        };
        if stage.parse::<usize>().ok() != Some(k) {
            return Err(err(ln, format!("expected stage {k}")));
        }
        let count: usize = count.parse().map_err(|_| err(ln, format!("bad count {count:?}")))?;
        if count == 0 {
            return Err(err(ln, "stage with no vectors".into()));
        }
        let mut vectors = Vec::new();
        for _ in 0..count {
            let Some((ln, f)) = lines.next() else {
                return Err(err(lines.last + 1, format!("stage {k} ends early")));
            };
            if f.len() != n_states + 1 {
                return Err(ParseError::DimensionMismatch {
                    line: ln,
                    column: 1,
                    message: format!("expected action and {n_states} coefficients"),
                });
            }
            let action = match f[0] {
                "-" if k == horizon => None,
                name => match action_names.iter().position(|a| a == name) {
                    Some(i) if k < horizon => Some(i),
                    _ => {
                        return Err(ParseError::UnknownName {
                            kind: "action",
                            name: name.to_string(),
                            line: ln,
                            column: 1,
                        })
                    }
                },
            };
            let coeffs = f[1..]
                .iter()
                .map(|x| x.parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| err(ln, "bad coefficient".into()))?;
            vectors.push(AlphaVector { coeffs, action });
        }
        per_stage.push(AlphaVectorSet { vectors, stage: k });
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "trailing content after the last stage".into()));
    }
    Ok(PolicyFile {
        stack: PolicyStack { per_stage, discount },
        action_names,
    })
}
