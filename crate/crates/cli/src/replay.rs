//! Replays a trace on one implementation and logs every answer.
//!
//! `make`, `insert` and `meld` are silent. The other operations log one line:
//!
//! ```text
//! extract H id=1 real=5 reported=5 corrupted=[]
//! findmin H id=1 real=5 reported=5
//! delete H id=3 corrupted=[]
//! extract H empty
//! ```
//!
//! Every operation is checked against the contract model. With `audit` the
//! structural bounds are checked after every operation too. Violations are
//! logged as `violation step=<line> ...`.

use std::collections::HashMap;
use std::fmt::Write;

use softheap_core::checker::{parse_trace, Session, TraceOp};
use softheap_core::{AnyHeap, HeapKind, IdSource, ItemRef, Key};

use crate::{CliError, Exit, Output};

fn ids(xs: &[ItemRef<Key>]) -> String {
    let v: Vec<String> = xs.iter().map(|x| x.id().to_string()).collect();
    format!("[{}]", v.join(","))
}

/// Replays `text`, every heap built as `kind` with the trace's `make`
/// parameter. Errors stop the replay; the log written so far is kept in
/// the returned output.
pub fn replay(text: &str, kind: HeapKind, audit: bool) -> (Output, Option<CliError>) {
    let mut log = String::new();
    let result = run(text, kind, audit, &mut log);
    match result {
        Ok(violations) => {
            let exit = if violations == 0 { Exit::Clean } else { Exit::Violation };
            (Output { stdout: log, exit }, None)
        }
        Err(e) => (
            Output {
                stdout: log,
                exit: Exit::Usage,
            },
            Some(e),
        ),
    }
}

fn run(text: &str, kind: HeapKind, audit: bool, log: &mut String) -> Result<u64, CliError> {
    let trace = parse_trace(text).map_err(|e| CliError::Trace {
        line: e.line,
        message: e.message,
    })?;
    let mut heaps: HashMap<String, Session> = HashMap::new();
    let mut source = IdSource::new();
    let mut violations = 0;
    let audit_every = u64::from(audit);

    for tl in &trace {
        let line = tl.line;
        let err = |message: String| CliError::Trace { line, message };
        let session = |heaps: &mut HashMap<String, Session>, name: &str| -> Result<Session, CliError> {
            heaps.remove(name).ok_or_else(|| err(format!("unknown heap {name}")))
        };
        let (name, mut s) = match &tl.op {
            TraceOp::Make { heap, epsilon } => {
                let mut s = Session::new(AnyHeap::new(kind, *epsilon), audit_every);
                s.set_step(line as u64);
                heaps.insert(heap.clone(), s);
                continue;
            }
            TraceOp::Meld { a, b, result } => {
                let mut sa = session(&mut heaps, a)?;
                let sb = session(&mut heaps, b)?;
                sa.set_step(line as u64);
                let seen = sa.violation_count() + sb.violation_count();
                sa.meld(sb).map_err(|e| err(format!("meld {a} {b}: {e}")))?;
                collect(&sa, seen, &mut violations, log);
                heaps.insert(result.clone(), sa);
                continue;
            }
            TraceOp::Insert { heap, .. }
            | TraceOp::FindMin { heap }
            | TraceOp::Extract { heap }
            | TraceOp::Delete { heap, .. } => (heap.clone(), session(&mut heaps, heap)?),
        };
        s.set_step(line as u64);
        let seen = s.violation_count();
        let outcome = step(&mut s, &tl.op, &mut source, log);
        collect(&s, seen, &mut violations, log);
        heaps.insert(name, s);
        outcome.map_err(err)?;
    }
    Ok(violations)
}

fn step(s: &mut Session, op: &TraceOp, source: &mut IdSource, log: &mut String) -> Result<(), String> {
    match op {
        TraceOp::Insert { key, .. } => s.insert(source.item(*key, ())),
        TraceOp::FindMin { heap } => match s.find_min() {
            Some((x, k)) => writeln!(log, "findmin {heap} id={} real={} reported={k}", x.id(), x.real_key()).unwrap(),
            None => writeln!(log, "findmin {heap} empty").unwrap(),
        },
        TraceOp::Extract { heap } => match s.extract() {
            Some(r) => writeln!(
                log,
                "extract {heap} id={} real={} reported={} corrupted={}",
                r.item.id(),
                r.item.real_key(),
                r.reported_key,
                ids(&r.corrupted)
            )
            .unwrap(),
            None => writeln!(log, "extract {heap} empty").unwrap(),
        },
        TraceOp::Delete { heap, id } => {
            if *id == 0 || *id >= source.peek() {
                return Err(format!("delete of unknown item {id}"));
            }
            let corrupted = s.delete(*id).map_err(|e| format!("delete {id} from {heap}: {e}"))?;
            writeln!(log, "delete {heap} id={id} corrupted={}", ids(&corrupted)).unwrap();
        }
        TraceOp::Make { .. } | TraceOp::Meld { .. } => unreachable!("handled by the caller"),
    }
    Ok(())
}

/// Logs the violations `s` recorded beyond the first `seen` and adds them to
/// `total`. Sessions keep only their first violations, so later ones are
/// counted but not shown.
fn collect(s: &Session, seen: u64, total: &mut u64, log: &mut String) {
    let kept = s.violations();
    for v in kept.iter().skip(seen as usize) {
        writeln!(log, "{v}").unwrap();
    }
    *total += s.violation_count() - seen;
}
