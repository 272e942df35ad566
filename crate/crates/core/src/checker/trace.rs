//! Line-oriented operation traces.
//!
//! ```text
//! # comment
//! make H 1/4
//! insert H 5
//! findmin H
//! extract H
//! delete H 1
//! meld A B C
//! ```
//!
//! Items are numbered by insertion order across the whole trace, from 1.

use std::fmt;

use thiserror::Error;

use crate::item::Key;
use crate::param::Epsilon;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceOp {
    Make {
        heap: String,
        epsilon: Epsilon,
    },
    Insert {
        heap: String,
        key: Key,
    },
    FindMin {
        heap: String,
    },
    Extract {
        heap: String,
    },
    Delete {
        heap: String,
        id: u64,
    },
    /// Consumes `a` and `b`, binding the union to `result`.
    Meld {
        a: String,
        b: String,
        result: String,
    },
}

impl fmt::Display for TraceOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceOp::Make { heap, epsilon } => write!(f, "make {heap} {epsilon}"),
            TraceOp::Insert { heap, key } => write!(f, "insert {heap} {key}"),
            TraceOp::FindMin { heap } => write!(f, "findmin {heap}"),
            TraceOp::Extract { heap } => write!(f, "extract {heap}"),
            TraceOp::Delete { heap, id } => write!(f, "delete {heap} {id}"),
            TraceOp::Meld { a, b, result } => write!(f, "meld {a} {b} {result}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceLine {
    /// 1-based line number in the source text.
    pub line: usize,
    pub op: TraceOp,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct TraceError {
    pub line: usize,
    pub message: String,
}

pub fn parse_line(text: &str) -> Result<Option<TraceOp>, String> {
    let text = text.split('#').next().unwrap_or("");
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let Some((&cmd, args)) = tokens.split_first() else {
        return Ok(None);
    };
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("{cmd} takes {n} argument(s), got {}", args.len()))
        }
    };
    let name = |i: usize| args[i].to_string();
    let op = match cmd {
        "make" => {
            arity(2)?;
            let epsilon = args[1].parse().map_err(|e| format!("{e}"))?;
            TraceOp::Make { heap: name(0), epsilon }
        }
        "insert" => {
            arity(2)?;
            let key = args[1].parse().map_err(|_| format!("bad key {:?}", args[1]))?;
            TraceOp::Insert { heap: name(0), key }
        }
        "findmin" => {
            arity(1)?;
            TraceOp::FindMin { heap: name(0) }
        }
        "extract" => {
            arity(1)?;
            TraceOp::Extract { heap: name(0) }
        }
        "delete" => {
            arity(2)?;
            let id = args[1].parse().map_err(|_| format!("bad item id {:?}", args[1]))?;
            TraceOp::Delete { heap: name(0), id }
        }
        "meld" => {
            arity(3)?;
            if args[0] == args[1] {
                return Err(format!("cannot meld {} with itself", args[0]));
            }
            TraceOp::Meld {
                a: name(0),
                b: name(1),
                result: name(2),
            }
        }
        other => return Err(format!("unknown operation {other:?}")),
    };
    Ok(Some(op))
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceLine>, TraceError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        match parse_line(raw) {
            Ok(Some(op)) => out.push(TraceLine { line, op }),
            Ok(None) => {}
            Err(message) => return Err(TraceError { line, message }),
        }
    }
    Ok(out)
}

/// Renders operations one per line; `parse_trace` reads it back.
pub fn format_trace<'a>(ops: impl IntoIterator<Item = &'a TraceOp>) -> String {
    ops.into_iter().map(|op| format!("{op}\n")).collect()
}
