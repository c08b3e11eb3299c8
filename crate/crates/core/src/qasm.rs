//! Parser and printer for the OpenQASM 2.0 subset used by the benchmark corpus.
//!
//! Supported statements: the `OPENQASM 2.0;` header, `include "qelib1.inc";`,
//! a single `qreg`, and the gates `id h t tdg cx rx ry rz u3 x y z s sdg`.
//! `id x y z s sdg` are desugared into rotations. `creg`, `measure` and `barrier`
//! are skipped and counted. The grammar is written out in `docs/qasm-subset.md`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::circuit::{Circuit, GateSymbol, Op};
use crate::error::{Error, Result};

/// Parse result: the circuit plus the statements that were skipped.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedQasm {
    pub circuit: Circuit,
    pub skipped: Vec<(usize, String)>,
}

impl ParsedQasm {
    pub fn warning_count(&self) -> usize {
        self.skipped.len()
    }
}

struct Statement {
    line: usize,
    text: String,
}

fn strip_comment(line: &str) -> &str {
    match line.find("//") {
        Some(i) => &line[..i],
        None => line,
    }
}

fn split_statements(text: &str) -> Result<Vec<Statement>> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start_line = 1;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        for ch in strip_comment(raw).chars() {
            if current.trim().is_empty() && !ch.is_whitespace() {
                start_line = line_no;
            }
            if ch == ';' {
                out.push(Statement {
                    line: start_line,
                    text: current.trim().to_string(),
                });
                current.clear();
            } else {
                current.push(ch);
            }
        }
        current.push(' ');
    }
    if !current.trim().is_empty() {
        return Err(Error::Parse {
            line: start_line,
            msg: format!("missing ';' after {:?}", current.trim()),
        });
    }
    Ok(out)
}

pub fn parse_qasm(text: &str) -> Result<ParsedQasm> {
    let statements = split_statements(text)?;
    let mut iter = statements.into_iter();
    let header = iter.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty program".into(),
    })?;
    let words: Vec<&str> = header.text.split_whitespace().collect();
    if words != ["OPENQASM", "2.0"] {
        return Err(Error::Parse {
            line: header.line,
            msg: format!("expected 'OPENQASM 2.0;', found {:?}", header.text),
        });
    }

    let mut register: Option<(String, usize)> = None;
    let mut ops = Vec::new();
    let mut skipped = Vec::new();
    for st in iter {
        if st.text.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: st.line, msg };
        let name_end = st
            .text
            .find(|c: char| c.is_whitespace() || c == '(')
            .unwrap_or(st.text.len());
        let name = &st.text[..name_end];
        let rest = st.text[name_end..].trim();
        match name {
            "include" => {
                if rest != "\"qelib1.inc\"" {
                    return Err(err(format!("unsupported include {rest}")));
                }
            }
            "qreg" => {
                if register.is_some() {
                    return Err(err("only one qreg is supported".into()));
                }
                let (reg, size) = parse_indexed(rest).map_err(err)?;
                if size == 0 {
                    return Err(err("qreg must have at least one qubit".into()));
                }
                register = Some((reg, size));
            }
            "creg" | "measure" | "barrier" => skipped.push((st.line, st.text.clone())),
            _ => {
                let (reg, size) = register
                    .as_ref()
                    .ok_or_else(|| err(format!("gate {name:?} before qreg")))?;
                let (params, args) = split_params(rest).map_err(err)?;
                let gate = make_gate(name, &params).map_err(err)?;
                let mut qubits = Vec::new();
                for arg in args.split(',') {
                    let (r, idx) = parse_indexed(arg.trim()).map_err(err)?;
                    if &r != reg {
                        return Err(err(format!("unknown register {r:?}")));
                    }
                    if idx >= *size {
                        return Err(err(format!(
                            "qubit index {idx} out of range for {reg}[{size}]"
                        )));
                    }
                    qubits.push(idx);
                }
                if qubits.len() != gate.arity() {
                    return Err(err(format!("{name} expects {} operand(s)", gate.arity())));
                }
                ops.push((st.line, Op::new(gate, qubits)));
            }
        }
    }
    let (_, size) = register.ok_or(Error::Parse {
        line: 1,
        msg: "no qreg declared".into(),
    })?;
    let mut circuit = Circuit::new(size)?;
    for (line, op) in ops {
        circuit.push_op(op).map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
    }
    Ok(ParsedQasm { circuit, skipped })
}

fn parse_indexed(s: &str) -> std::result::Result<(String, usize), String> {
    let open = s
        .find('[')
        .ok_or_else(|| format!("expected name[index], found {s:?}"))?;
    let close = s
        .rfind(']')
        .filter(|&c| c == s.len() - 1)
        .ok_or_else(|| format!("expected name[index], found {s:?}"))?;
    let name = s[..open].trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("bad identifier {name:?}"));
    }
    let idx = s[open + 1..close]
        .trim()
        .parse()
        .map_err(|_| format!("bad index in {s:?}"))?;
    Ok((name.to_string(), idx))
}

fn split_params(rest: &str) -> std::result::Result<(Vec<f64>, &str), String> {
    if let Some(inner) = rest.strip_prefix('(') {
        let mut depth = 1;
        for (i, ch) in inner.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        let params = split_top_level(&inner[..i])
                            .into_iter()
                            .map(eval_expr)
                            .collect::<std::result::Result<Vec<_>, _>>()?;
                        return Ok((params, inner[i + 1..].trim()));
                    }
                }
                _ => {}
            }
        }
        Err("unbalanced parentheses".into())
    } else {
        Ok((Vec::new(), rest))
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn make_gate(name: &str, params: &[f64]) -> std::result::Result<GateSymbol, String> {
    let want = |n: usize| {
        if params.len() == n {
            Ok(())
        } else {
            Err(format!(
                "{name} takes {n} parameter(s), got {}",
                params.len()
            ))
        }
    };
    let gate = match name {
        "id" => want(0).map(|_| GateSymbol::RZ(0.0)),
        "h" => want(0).map(|_| GateSymbol::H),
        "t" => want(0).map(|_| GateSymbol::T),
        "tdg" => want(0).map(|_| GateSymbol::Tdg),
        "cx" => want(0).map(|_| GateSymbol::CX),
        "x" => want(0).map(|_| GateSymbol::RX(PI)),
        "y" => want(0).map(|_| GateSymbol::RY(PI)),
        "z" => want(0).map(|_| GateSymbol::RZ(PI)),
        "s" => want(0).map(|_| GateSymbol::RZ(PI / 2.0)),
        "sdg" => want(0).map(|_| GateSymbol::RZ(-PI / 2.0)),
        "rx" => want(1).map(|_| GateSymbol::RX(params[0])),
        "ry" => want(1).map(|_| GateSymbol::RY(params[0])),
        "rz" => want(1).map(|_| GateSymbol::RZ(params[0])),
        "u3" => want(3).map(|_| GateSymbol::U3(params[0], params[1], params[2])),
        other => Err(format!("unknown gate {other:?}")),
    }?;
    Ok(gate)
}

/// Evaluates an angle expression: numbers, `pi`, `+ - * /`, parentheses.
fn eval_expr(src: &str) -> std::result::Result<f64, String> {
    let tokens = lex_expr(src)?;
    let mut pos = 0;
    let value = parse_sum(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(format!("trailing input in expression {src:?}"));
    }
    if !value.is_finite() {
        return Err(format!("non-finite angle {src:?}"));
    }
    Ok(value)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Op(char),
}

fn lex_expr(src: &str) -> std::result::Result<Vec<Tok>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if "+-*/()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(
                text.parse().map_err(|_| format!("bad number {text:?}"))?,
            ));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "pi" => out.push(Tok::Num(PI)),
                _ => return Err(format!("unknown identifier {word:?} in expression")),
            }
        } else {
            return Err(format!("unexpected character {c:?} in expression"));
        }
    }
    Ok(out)
}

fn parse_sum(t: &[Tok], pos: &mut usize) -> std::result::Result<f64, String> {
    let mut acc = parse_product(t, pos)?;
    while let Some(Tok::Op(op @ ('+' | '-'))) = t.get(*pos) {
        *pos += 1;
        let rhs = parse_product(t, pos)?;
        if *op == '+' {
            acc += rhs
        } else {
            acc -= rhs
        }
    }
    Ok(acc)
}

fn parse_product(t: &[Tok], pos: &mut usize) -> std::result::Result<f64, String> {
    let mut acc = parse_unary(t, pos)?;
    while let Some(Tok::Op(op @ ('*' | '/'))) = t.get(*pos) {
        *pos += 1;
        let rhs = parse_unary(t, pos)?;
        if *op == '*' {
            acc *= rhs
        } else {
            acc /= rhs
        }
    }
    Ok(acc)
}

fn parse_unary(t: &[Tok], pos: &mut usize) -> std::result::Result<f64, String> {
    match t.get(*pos) {
        Some(Tok::Op('-')) => {
            *pos += 1;
            Ok(-parse_unary(t, pos)?)
        }
        Some(Tok::Op('+')) => {
            *pos += 1;
            parse_unary(t, pos)
        }
        Some(Tok::Num(v)) => {
            *pos += 1;
            Ok(*v)
        }
        Some(Tok::Op('(')) => {
            *pos += 1;
            let v = parse_sum(t, pos)?;
            if t.get(*pos) != Some(&Tok::Op(')')) {
                return Err("missing ')'".into());
            }
            *pos += 1;
            Ok(v)
        }
        other => Err(format!("unexpected token {other:?}")),
    }
}

/// Prints a circuit in the subset dialect; `parse_qasm(&to_qasm(c))` returns `c`.
pub fn to_qasm(c: &Circuit) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[{}];",
        c.num_qubits()
    );
    for op in c.ops() {
        write_op(&mut out, op);
    }
    out
}

fn write_op(out: &mut String, op: &Op) {
    let head = match op.gate {
        GateSymbol::H => "h".to_string(),
        GateSymbol::T => "t".to_string(),
        GateSymbol::Tdg => "tdg".to_string(),
        GateSymbol::CX => "cx".to_string(),
        GateSymbol::RX(t) => format!("rx({t})"),
        GateSymbol::RY(t) => format!("ry({t})"),
        GateSymbol::RZ(t) => format!("rz({t})"),
        GateSymbol::U3(a, b, c) => format!("u3({a},{b},{c})"),
    };
    let args: Vec<String> = op.qubits.iter().map(|q| format!("q[{q}]")).collect();
    let _ = writeln!(out, "{head} {};", args.join(","));
}

/// Comment-stripped source length in bits.
pub fn qasm_byte_size(text: &str) -> u64 {
    let mut bytes = 0u64;
    for chunk in text.split_inclusive('\n') {
        let (body, newline) = match chunk.strip_suffix('\n') {
            Some(b) => (b, 1),
            None => (chunk, 0),
        };
        if body.contains("//") {
            let kept = strip_comment(body).trim_end();
            if !kept.is_empty() {
                bytes += (kept.len() + newline) as u64;
            }
        } else {
            bytes += (body.len() + newline) as u64;
        }
    }
    8 * bytes
}

#[cfg(test)]
mod tests {
    use super::*;

    const GHZ2: &str =
        "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\nh q[0];\ncx q[0],q[1];\n";

    #[test]
    fn single_statement_program() {
        let p = parse_qasm("OPENQASM 2.0; qreg q[1]; h q[0];").unwrap();
        assert_eq!(p.circuit.num_qubits(), 1);
        assert_eq!(p.circuit.ops(), &[Op::one(GateSymbol::H, 0)]);
    }

    #[test]
    fn ghz2() {
        let p = parse_qasm(GHZ2).unwrap();
        assert_eq!(p.circuit.len(), 2);
        assert_eq!(p.circuit.depth(), 2);
        assert_eq!(p.circuit.ops()[1], Op::cx(0, 1));
    }

    #[test]
    fn unknown_gate_names_the_gate() {
        let e = parse_qasm("OPENQASM 2.0;\nqreg q[1];\nfoo q[0];\n").unwrap_err();
        match e {
            Error::Parse { line, msg } => {
                assert_eq!(line, 3);
                assert!(msg.contains("foo"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn index_out_of_range() {
        let e = parse_qasm("OPENQASM 2.0;\nqreg q[2];\ncx q[0],q[2];\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn malformed_header() {
        assert!(matches!(
            parse_qasm("OPENQASM 3.0;\nqreg q[1];"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_qasm("qreg q[1];").is_err());
        assert!(parse_qasm("").is_err());
    }

    #[test]
    fn skips_measurement_and_barriers() {
        let src = "OPENQASM 2.0;\nqreg q[2];\ncreg c[2];\nh q[0]; // prepare\nbarrier q[0],q[1];\nmeasure q[0] -> c[0];\n";
        let p = parse_qasm(src).unwrap();
        assert_eq!(p.circuit.len(), 1);
        assert_eq!(p.warning_count(), 3);
    }

    #[test]
    fn angle_expressions_and_desugaring() {
        let src = "OPENQASM 2.0;\nqreg q[1];\nrz(-pi/4) q[0];\nry(3*pi/8 + 0.5) q[0];\nu3(pi,0,-(pi/2)) q[0];\nx q[0];\ns q[0];\nsdg q[0];\n";
        let ops = parse_qasm(src).unwrap().circuit.ops().to_vec();
        assert_eq!(ops[0].gate, GateSymbol::RZ(-PI / 4.0));
        assert_eq!(ops[1].gate, GateSymbol::RY(3.0 * PI / 8.0 + 0.5));
        assert_eq!(ops[2].gate, GateSymbol::U3(PI, 0.0, -PI / 2.0));
        assert_eq!(ops[3].gate, GateSymbol::RX(PI));
        assert_eq!(ops[4].gate, GateSymbol::RZ(PI / 2.0));
        assert_eq!(ops[5].gate, GateSymbol::RZ(-PI / 2.0));
        assert!(parse_qasm("OPENQASM 2.0;\nqreg q[1];\nrz(tau) q[0];").is_err());
        assert!(parse_qasm("OPENQASM 2.0;\nqreg q[1];\nrz(1,2) q[0];").is_err());
    }

    #[test]
    fn print_parse_fixpoint() {
        let src = "OPENQASM 2.0;\nqreg q[3];\nh q[0];\nrz(0.1234567890123) q[1];\ncx q[1],q[2];\nu3(1,2,3) q[2];\ntdg q[0];\n";
        let c = parse_qasm(src).unwrap().circuit;
        let printed = to_qasm(&c);
        let again = parse_qasm(&printed).unwrap().circuit;
        assert_eq!(c, again);
        assert_eq!(printed, to_qasm(&again));
    }

    #[test]
    fn byte_size_baseline() {
        assert_eq!(qasm_byte_size(""), 0);
        assert_eq!(qasm_byte_size("h q[0];\n"), 64);
        assert_eq!(qasm_byte_size("h q[0]; // hadamard\n"), 64);
        assert_eq!(qasm_byte_size("// header comment\nh q[0];\n"), 64);
        assert_eq!(qasm_byte_size(GHZ2), 8 * GHZ2.len() as u64);
    }
}
