//! SMT-LIB v2 export and an optional external solver.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::VcStatus;
use crate::frontend::IntWidth;
use crate::specs::{ArithOp, CmpOp, Pred, Sym, Term};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmtSolver {
    pub program: String,
    pub args: Vec<String>,
}

impl SmtSolver {
    /// The first of `z3` or `cvc5` found in `PATH`.
    pub fn detect() -> Option<SmtSolver> {
        let candidates = [
            ("z3", vec!["-in", "-smt2"]),
            ("cvc5", vec!["--lang", "smt2", "--produce-models"]),
        ];
        let path = std::env::var_os("PATH")?;
        for (name, args) in candidates {
            if std::env::split_paths(&path).any(|d| d.join(name).is_file()) {
                return Some(SmtSolver {
                    program: name.to_string(),
                    args: args.into_iter().map(String::from).collect(),
                });
            }
        }
        None
    }
}

#[derive(Debug, Error)]
pub enum SmtError {
    #[error("smt-io-error: {0}")]
    Io(#[from] std::io::Error),
    #[error("smt-io-error: unexpected solver output: {0}")]
    Output(String),
}

pub fn logic(formula: &Pred) -> &'static str {
    if formula.is_nonlinear() {
        "QF_NIA"
    } else {
        "QF_LIA"
    }
}

/// A script asserting the negation of `formula` with every symbol bounded
/// by `width`: `unsat` means the formula is valid.
pub fn to_smtlib(formula: &Pred, width: IntWidth, comment: &str) -> String {
    let mut out = String::new();
    for line in comment.lines() {
        let _ = writeln!(out, "; {line}");
    }
    let _ = writeln!(out, "(set-logic {})", logic(formula));
    let _ = writeln!(out, "(set-option :produce-models true)");
    for s in formula.syms() {
        let n = name(&s);
        let _ = writeln!(out, "(declare-fun {n} () Int)");
        let _ = writeln!(out, "(assert (and (<= {} {n}) (<= {n} {})))", int(width.min()), int(width.max()));
    }
    let _ = writeln!(out, "(assert (not {}))", pred(formula, width));
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

fn name(s: &Sym) -> String {
    format!("|{s}|")
}

fn int(v: i128) -> String {
    if v < 0 {
        format!("(- {})", -v)
    } else {
        v.to_string()
    }
}

fn pred(p: &Pred, w: IntWidth) -> String {
    match p {
        Pred::True => "true".into(),
        Pred::False => "false".into(),
        Pred::Cmp(CmpOp::Ne, a, b) => format!("(not (= {} {}))", term(a, w), term(b, w)),
        Pred::Cmp(op, a, b) => {
            let o = match op {
                CmpOp::Eq => "=",
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Gt => ">",
                CmpOp::Ge => ">=",
                CmpOp::Ne => unreachable!(),
            };
            format!("({o} {} {})", term(a, w), term(b, w))
        }
        Pred::Not(q) => format!("(not {})", pred(q, w)),
        Pred::And(ps) => format!("(and {})", ps.iter().map(|q| pred(q, w)).collect::<Vec<_>>().join(" ")),
        Pred::Or(ps) => format!("(or {})", ps.iter().map(|q| pred(q, w)).collect::<Vec<_>>().join(" ")),
        Pred::Implies(a, b) => format!("(=> {} {})", pred(a, w), pred(b, w)),
    }
}

fn term(t: &Term, w: IntWidth) -> String {
    match t {
        Term::Const(c) => int(*c),
        Term::IntMin => int(w.min()),
        Term::IntMax => int(w.max()),
        Term::Var(_) | Term::Result | Term::Old(_) => name(&t.as_sym().unwrap()),
        Term::Neg(a) => format!("(- {})", term(a, w)),
        Term::Bin(op, a, b) => {
            let (x, y) = (term(a, w), term(b, w));
            match op {
                ArithOp::Add => format!("(+ {x} {y})"),
                ArithOp::Sub => format!("(- {x} {y})"),
                ArithOp::Mul => format!("(* {x} {y})"),
                // C truncates towards zero; SMT-LIB `div` is Euclidean.
                ArithOp::Div => format!("(ite (= {y} 0) 0 {})", trunc_div(&x, &y)),
                ArithOp::Rem => format!("(ite (= {y} 0) 0 (- {x} (* {y} {})))", trunc_div(&x, &y)),
            }
        }
        Term::Ite(c, a, b) => format!("(ite {} {} {})", pred(c, w), term(a, w), term(b, w)),
        Term::Call(f, _) => format!("|call:{f}|"),
    }
}

fn trunc_div(x: &str, y: &str) -> String {
    format!("(ite (= (>= {x} 0) (>= {y} 0)) (div (abs {x}) (abs {y})) (- (div (abs {x}) (abs {y}))))")
}

/// Run the solver on the negation of `formula`.
pub fn check(solver: &SmtSolver, formula: &Pred, width: IntWidth) -> Result<VcStatus, SmtError> {
    let script = to_smtlib(formula, width, "");
    let mut child = Command::new(&solver.program)
        .args(&solver.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()?;
    child.stdin.take().expect("piped stdin").write_all(script.as_bytes())?;
    let out = child.wait_with_output()?;
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    parse_answer(&text)
}

/// Map solver output to a status: `unsat` is Valid, `sat` with a model is
/// Invalid.
pub fn parse_answer(text: &str) -> Result<VcStatus, SmtError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some("unsat") => Ok(VcStatus::Valid),
        Some("sat") => Ok(VcStatus::Invalid {
            witness: parse_model(text),
        }),
        Some("unknown") => Ok(VcStatus::Unknown {
            reason: "solver returned unknown".into(),
        }),
        _ => Err(SmtError::Output(text.chars().take(200).collect())),
    }
}

/// Integer assignments from `(define-fun |x| () Int v)` entries.
pub fn parse_model(text: &str) -> BTreeMap<String, i128> {
    let mut out = BTreeMap::new();
    let mut rest = text;
    while let Some(i) = rest.find("(define-fun ") {
        rest = &rest[i + "(define-fun ".len()..];
        let (name, after) = if let Some(r) = rest.strip_prefix('|') {
            let Some(end) = r.find('|') else { break };
            (&r[..end], &r[end + 1..])
        } else {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            (&rest[..end], &rest[end..])
        };
        let after = after.trim_start();
        let Some(after) = after.strip_prefix("()") else { continue };
        let Some(after) = after.trim_start().strip_prefix("Int") else {
            continue;
        };
        let after = after.trim_start();
        let value = if let Some(neg) = after.strip_prefix("(-") {
            let digits: String = neg.trim_start().chars().take_while(char::is_ascii_digit).collect();
            digits.parse::<i128>().ok().map(|v| -v)
        } else {
            let digits: String = after.chars().take_while(char::is_ascii_digit).collect();
            digits.parse::<i128>().ok()
        };
        if let Some(v) = value {
            out.insert(name.to_string(), v);
        }
        rest = after;
    }
    out
}
