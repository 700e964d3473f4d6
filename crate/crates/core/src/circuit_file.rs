//! Plain-text circuit files.
//!
//! ```text
//! # comment
//! qubits 3
//! h 0
//! cx 0 1
//! u 2 0 0 1 0 1 0 0 0
//! cu 1 2 0 0 1 0 1 0 0 0
//! ```
//!
//! The first non-comment line declares the register size. Each further line is
//! `<gate> <target>` for `i x y z h`, `c<gate> <control> <target>`, or the
//! explicit-matrix forms `u <target> <8 reals>` and `cu <control> <target> <8 reals>`
//! (row-major `re im` of `q11 q12 q21 q22`).

use std::fmt::Write as _;

use crate::error::{Result, SimError};
use crate::types::{Circuit, Gate2x2, GateOp, StandardGate};

fn parse_err(line: usize, message: impl Into<String>) -> SimError {
    SimError::Parse { line, message: message.into() }
}

fn index(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse().map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

fn matrix(toks: &[&str], line: usize) -> Result<Gate2x2> {
    if toks.len() != 8 {
        return Err(parse_err(line, format!("expected 8 reals, found {}", toks.len())));
    }
    let mut r = [0.0; 8];
    for (slot, tok) in r.iter_mut().zip(toks) {
        *slot = tok.parse().map_err(|_| parse_err(line, format!("invalid real `{tok}`")))?;
    }
    Ok(Gate2x2::from_reals(r))
}

fn parse_op(toks: &[&str], line: usize) -> Result<GateOp> {
    let name = toks[0].to_ascii_lowercase();
    let args = &toks[1..];
    let arity = |want: usize| {
        if args.len() == want {
            Ok(())
        } else {
            Err(parse_err(line, format!("`{name}` takes {want} arguments, found {}", args.len())))
        }
    };
    let op = match name.as_str() {
        "u" => {
            if args.is_empty() {
                return Err(parse_err(line, "`u` needs a target"));
            }
            GateOp::single(matrix(&args[1..], line)?, index(args[0], line, "target")?)
        }
        "cu" => {
            if args.len() < 2 {
                return Err(parse_err(line, "`cu` needs a control and a target"));
            }
            GateOp::controlled(
                matrix(&args[2..], line)?,
                index(args[0], line, "control")?,
                index(args[1], line, "target")?,
            )
        }
        _ => {
            if let Some(base) = name.strip_prefix('c').filter(|b| !b.is_empty()) {
                let g: StandardGate =
                    base.parse().map_err(|_| parse_err(line, format!("unknown gate `{name}`")))?;
                arity(2)?;
                GateOp::controlled(
                    g.matrix(),
                    index(args[0], line, "control")?,
                    index(args[1], line, "target")?,
                )
            } else {
                let g: StandardGate =
                    name.parse().map_err(|_| parse_err(line, format!("unknown gate `{name}`")))?;
                arity(1)?;
                GateOp::single(g.matrix(), index(args[0], line, "target")?)
            }
        }
    };
    Ok(op)
}

/// Parses a circuit file. Errors carry the 1-based line number.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        match &mut circuit {
            None => {
                if toks.len() != 2 || !toks[0].eq_ignore_ascii_case("qubits") {
                    return Err(parse_err(line, "expected `qubits <n>` header"));
                }
                let n = index(toks[1], line, "qubit count")?;
                circuit = Some(Circuit::new(n).map_err(|e| parse_err(line, e.to_string()))?);
            }
            Some(c) => {
                let op = parse_op(&toks, line)?;
                c.push(op).map_err(|e| parse_err(line, e.to_string()))?;
            }
        }
    }
    circuit.ok_or_else(|| parse_err(text.lines().count().max(1), "missing `qubits <n>` header"))
}

/// Writes `circuit` in the file format; named gates where the matrix matches
/// exactly, `u`/`cu` otherwise. Reals use shortest round-trip formatting.
pub fn format_circuit(circuit: &Circuit) -> String {
    let mut out = format!("qubits {}\n", circuit.num_qubits());
    for op in circuit.ops() {
        let named = StandardGate::identify(&op.gate);
        match (op.control, named) {
            (None, Some(g)) => writeln!(out, "{g} {}", op.target),
            (Some(c), Some(g)) => writeln!(out, "c{g} {c} {}", op.target),
            (None, None) => writeln!(out, "u {} {}", op.target, reals(&op.gate)),
            (Some(c), None) => writeln!(out, "cu {c} {} {}", op.target, reals(&op.gate)),
        }
        .expect("writing to a String cannot fail");
    }
    out
}

fn reals(g: &Gate2x2) -> String {
    g.to_reals().iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}
