//! Reference semantics for specification formulas, kept separate from the
//! library evaluator.

use std::collections::BTreeMap;

use preguss::frontend::IntWidth;
use preguss::specs::{ArithOp, CmpOp, Pred, Term};

pub type Assignment = BTreeMap<String, i128>;

fn key(t: &Term) -> Option<String> {
    match t {
        Term::Var(v) => Some(v.clone()),
        Term::Result => Some("\\result".into()),
        Term::Old(v) => Some(format!("\\old({v})")),
        _ => None,
    }
}

/// Mathematical integers with truncating division and `x / 0 == x % 0 == 0`.
pub fn term(t: &Term, w: IntWidth, env: &Assignment) -> Option<i128> {
    Some(match t {
        Term::Const(c) => *c,
        Term::IntMin => w.min(),
        Term::IntMax => w.max(),
        Term::Var(_) | Term::Result | Term::Old(_) => *env.get(&key(t)?)?,
        Term::Neg(a) => -term(a, w, env)?,
        Term::Bin(op, a, b) => {
            let (x, y) = (term(a, w, env)?, term(b, w, env)?);
            match op {
                ArithOp::Add => x + y,
                ArithOp::Sub => x - y,
                ArithOp::Mul => x.checked_mul(y)?,
                ArithOp::Div => {
                    if y == 0 {
                        0
                    } else {
                        x / y
                    }
                }
                ArithOp::Rem => {
                    if y == 0 {
                        0
                    } else {
                        x % y
                    }
                }
            }
        }
        Term::Ite(c, a, b) => {
            if pred(c, w, env)? {
                term(a, w, env)?
            } else {
                term(b, w, env)?
            }
        }
        Term::Call(..) => return None,
    })
}

pub fn pred(p: &Pred, w: IntWidth, env: &Assignment) -> Option<bool> {
    Some(match p {
        Pred::True => true,
        Pred::False => false,
        Pred::Cmp(op, a, b) => {
            let (x, y) = (term(a, w, env)?, term(b, w, env)?);
            match op {
                CmpOp::Eq => x == y,
                CmpOp::Ne => x != y,
                CmpOp::Lt => x < y,
                CmpOp::Le => x <= y,
                CmpOp::Gt => x > y,
                CmpOp::Ge => x >= y,
            }
        }
        Pred::Not(q) => !pred(q, w, env)?,
        Pred::And(ps) => {
            let mut all = true;
            for q in ps {
                all &= pred(q, w, env)?;
            }
            all
        }
        Pred::Or(ps) => {
            let mut any = false;
            for q in ps {
                any |= pred(q, w, env)?;
            }
            any
        }
        Pred::Implies(a, b) => !pred(a, w, env)? || pred(b, w, env)?,
    })
}

/// Names of the free symbols, spelled as witness keys.
pub fn symbols(p: &Pred) -> Vec<String> {
    p.syms().iter().map(ToString::to_string).collect()
}
