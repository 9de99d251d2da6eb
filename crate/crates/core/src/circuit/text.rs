//! Line-based circuit text format.
//!
//! ```text
//! circuit 2
//! g0 = INPUT 0
//! g1 = INPUT 1
//! g2 = AND g0 g1
//! output g2
//! ```
//!
//! Order instances prepend `order <n>` to a circuit block on `2n` inputs.
//! Blank lines and lines starting with `#` are ignored by the parser and
//! never emitted by the serializer.

use std::fmt::Write as _;

use super::{Circuit, Gate, GateRef, OrderCircuit};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn serialize_circuit(c: &Circuit) -> String {
    let mut out = String::new();
    write_circuit(&mut out, c);
    out
}

pub fn serialize_order(e: &OrderCircuit) -> String {
    let mut out = format!("order {}\n", e.n());
    write_circuit(&mut out, e.circuit());
    out
}

fn write_circuit(out: &mut String, c: &Circuit) {
    let _ = writeln!(out, "circuit {}", c.num_inputs());
    for (i, gate) in c.gates().iter().enumerate() {
        let _ = match *gate {
            Gate::Input(j) => writeln!(out, "g{i} = INPUT {j}"),
            Gate::Const(b) => writeln!(out, "g{i} = CONST {}", b as u8),
            Gate::Not(a) => writeln!(out, "g{i} = NOT g{}", a.0),
            Gate::And(a, b) => writeln!(out, "g{i} = AND g{} g{}", a.0, b.0),
            Gate::Or(a, b) => writeln!(out, "g{i} = OR g{} g{}", a.0, b.0),
            Gate::Xor(a, b) => writeln!(out, "g{i} = XOR g{} g{}", a.0, b.0),
        };
    }
    let _ = writeln!(out, "output g{}", c.output().0);
}

fn significant_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    keyword: &str,
) -> Result<(usize, usize)> {
    let (line, text) = lines
        .next()
        .ok_or_else(|| parse_err(1, format!("expected `{keyword} <count>`, found end of input")))?;
    let mut parts = text.split_whitespace();
    if parts.next() != Some(keyword) {
        return Err(parse_err(line, format!("expected `{keyword} <count>`")));
    }
    let value = parts
        .next()
        .and_then(|v| v.parse::<usize>().ok())
        .ok_or_else(|| parse_err(line, format!("`{keyword}` needs a nonnegative integer")))?;
    if parts.next().is_some() {
        return Err(parse_err(line, "trailing tokens"));
    }
    Ok((line, value))
}

fn parse_ref(line: usize, tok: Option<&str>) -> Result<u32> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing gate operand"))?;
    tok.strip_prefix('g')
        .and_then(|d| d.parse::<u32>().ok())
        .ok_or_else(|| parse_err(line, format!("bad gate reference {tok:?}")))
}

fn parse_block<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<Circuit> {
    let (header_line, num_inputs) = parse_header(lines, "circuit")?;
    // (line, gate, raw operand refs)
    let mut gates: Vec<(usize, Gate, Vec<u32>)> = Vec::new();
    let mut output = None;
    let mut last_line = header_line;
    for (line, text) in lines.by_ref() {
        last_line = line;
        let mut toks = text.split_whitespace();
        let head = toks.next().unwrap_or_default();
        if head == "output" {
            let r = parse_ref(line, toks.next())?;
            if toks.next().is_some() {
                return Err(parse_err(line, "trailing tokens"));
            }
            output = Some((line, r));
            break;
        }
        let id = head
            .strip_prefix('g')
            .and_then(|d| d.parse::<usize>().ok())
            .ok_or_else(|| parse_err(line, format!("expected a gate line, found {text:?}")))?;
        if id != gates.len() {
            return Err(parse_err(line, format!("expected gate g{}, found g{id}", gates.len())));
        }
        if toks.next() != Some("=") {
            return Err(parse_err(line, "expected `=` after gate name"));
        }
        let op = toks.next().ok_or_else(|| parse_err(line, "missing gate kind"))?;
        let (gate, refs) = match op {
            "INPUT" => {
                let j = toks
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| parse_err(line, "INPUT needs an input index"))?;
                if j >= num_inputs {
                    return Err(parse_err(
                        line,
                        format!("input index {j} out of range for {num_inputs} inputs"),
                    ));
                }
                (Gate::Input(j), vec![])
            }
            "CONST" => match toks.next() {
                Some("0") => (Gate::Const(false), vec![]),
                Some("1") => (Gate::Const(true), vec![]),
                _ => return Err(parse_err(line, "CONST needs 0 or 1")),
            },
            "NOT" => {
                let a = parse_ref(line, toks.next())?;
                (Gate::Not(GateRef(a)), vec![a])
            }
            "AND" | "OR" | "XOR" => {
                let a = parse_ref(line, toks.next())?;
                let b = parse_ref(line, toks.next())?;
                let (ga, gb) = (GateRef(a), GateRef(b));
                let gate = match op {
                    "AND" => Gate::And(ga, gb),
                    "OR" => Gate::Or(ga, gb),
                    _ => Gate::Xor(ga, gb),
                };
                (gate, vec![a, b])
            }
            other => return Err(parse_err(line, format!("unknown gate kind {other:?}"))),
        };
        if toks.next().is_some() {
            return Err(parse_err(line, "trailing tokens"));
        }
        gates.push((line, gate, refs));
    }
    let (out_line, out_ref) =
        output.ok_or_else(|| parse_err(last_line, "missing `output g<i>` line"))?;
    if gates.is_empty() {
        return Err(parse_err(out_line, "circuit has no gates"));
    }
    let total = gates.len() as u32;
    for (i, (line, _, refs)) in gates.iter().enumerate() {
        for &r in refs {
            if r >= total {
                return Err(parse_err(*line, format!("dangling reference g{r}")));
            }
            if r as usize >= i {
                return Err(parse_err(
                    *line,
                    format!("reference g{r} is not an earlier gate (cycle or bad order)"),
                ));
            }
        }
    }
    if out_ref >= total {
        return Err(parse_err(out_line, format!("dangling reference g{out_ref}")));
    }
    let gates = gates.into_iter().map(|(_, g, _)| g).collect();
    Circuit::new(num_inputs, gates, GateRef(out_ref))
        .map_err(|e| parse_err(out_line, e.to_string()))
}

fn expect_end<'a>(mut lines: impl Iterator<Item = (usize, &'a str)>) -> Result<()> {
    match lines.next() {
        Some((line, _)) => Err(parse_err(line, "unexpected content after `output`")),
        None => Ok(()),
    }
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut lines = significant_lines(text);
    let c = parse_block(&mut lines)?;
    expect_end(lines)?;
    Ok(c)
}

pub fn parse_order(text: &str) -> Result<OrderCircuit> {
    let mut lines = significant_lines(text);
    let (line, n) = parse_header(&mut lines, "order")?;
    let c = parse_block(&mut lines)?;
    expect_end(lines)?;
    OrderCircuit::new(n, c).map_err(|e| parse_err(line, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::circuit::CircuitBuilder;

    const AND2: &str = "circuit 2\ng0 = INPUT 0\ng1 = INPUT 1\ng2 = AND g0 g1\noutput g2\n";

    #[test]
    fn parsed_matches_hand_built() {
        let parsed = parse_circuit(AND2).unwrap();
        let mut b = CircuitBuilder::new(2);
        let (x, y) = (b.input(0), b.input(1));
        let out = b.and(x, y);
        let built = b.finish(out);
        for a in BitString::all(2) {
            assert_eq!(parsed.eval_bits(&a).unwrap(), built.eval_bits(&a).unwrap());
        }
        assert_eq!(serialize_circuit(&built), AND2);
    }

    #[test]
    fn malformed_gate_line_names_its_line() {
        let text = "circuit 2\ng0 = INPUT 0\n\ng1 = NAND g0 g0\noutput g1\n";
        match parse_circuit(text) {
            Err(Error::Parse { line: 4, .. }) => {}
            other => panic!("expected parse error on line 4, got {other:?}"),
        }
    }

    #[test]
    fn dangling_and_cyclic_references() {
        let dangling = "circuit 1\ng0 = INPUT 0\ng1 = NOT g7\noutput g1\n";
        let err = parse_circuit(dangling).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("dangling"), "{err}");
        let cycle = "circuit 1\ng0 = NOT g1\ng1 = NOT g0\noutput g1\n";
        let err = parse_circuit(cycle).unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("cycle"), "{err}");
        let self_loop = "circuit 1\ng0 = AND g0 g0\noutput g0\n";
        assert!(parse_circuit(self_loop).is_err());
    }

    #[test]
    fn other_syntax_errors() {
        assert!(parse_circuit("").is_err());
        assert!(parse_circuit("circuit x\n").is_err());
        assert!(parse_circuit("circuit 1\ng0 = INPUT 1\noutput g0\n").is_err());
        assert!(parse_circuit("circuit 1\ng1 = INPUT 0\noutput g1\n").is_err());
        assert!(parse_circuit("circuit 1\ng0 = INPUT 0\n").is_err());
        assert!(parse_circuit("circuit 1\ng0 = CONST 2\noutput g0\n").is_err());
        assert!(parse_circuit("circuit 1\ng0 = INPUT 0\noutput g0\ng1 = INPUT 0\n").is_err());
    }

    #[test]
    fn order_round_trip() {
        let text = format!("order 1\n{AND2}");
        let e = parse_order(&text).unwrap();
        assert_eq!(e.n(), 1);
        assert_eq!(serialize_order(&e), text);
        assert!(parse_order(&format!("order 2\n{AND2}")).is_err());
    }
}
