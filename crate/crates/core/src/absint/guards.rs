//! Guard predicates for runtime-error-susceptible operations. Shared by the
//! analyzer (which places and classifies them) and the verifier (which
//! proves them).

use serde::{Deserialize, Serialize};

use super::interval::Interval;
use crate::frontend::{BinOp, Expr, ExprKind, IntWidth, TypedProgram, UnOp};
use crate::specs::{ArithOp, CmpOp, Pred, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RteKind {
    DivByZero,
    SignedOverflow,
    CallSitePrecondition,
}

impl RteKind {
    /// Label used in rendered `assert` clauses.
    pub fn label(self) -> &'static str {
        match self {
            RteKind::DivByZero => "division_by_zero",
            RteKind::SignedOverflow => "signed_overflow",
            RteKind::CallSitePrecondition => "call_precondition",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            RteKind::DivByZero => "div0",
            RteKind::SignedOverflow => "ovf",
            RteKind::CallSitePrecondition => "call",
        }
    }
}

/// Guard kinds needed at `e`, in emission order. Operations whose safety
/// is evident from literal operands get no guard.
pub fn guard_kinds(e: &Expr, tp: &TypedProgram) -> Vec<RteKind> {
    let w = tp.width;
    match &e.kind {
        ExprKind::Unary(UnOp::Neg, a) => match tp.literal_value(a) {
            Some(v) if v != w.min() => vec![],
            _ => vec![RteKind::SignedOverflow],
        },
        ExprKind::Binary(BinOp::Div | BinOp::Rem, a, b) => {
            let mut out = vec![RteKind::DivByZero];
            let a_safe = matches!(tp.literal_value(a), Some(v) if v != w.min());
            let b_safe = matches!(tp.literal_value(b), Some(v) if v != -1);
            if !a_safe && !b_safe {
                out.push(RteKind::SignedOverflow);
            }
            out
        }
        ExprKind::Binary(op @ (BinOp::Add | BinOp::Sub | BinOp::Mul), a, b) => {
            match (tp.literal_value(a), tp.literal_value(b)) {
                (Some(x), Some(y)) if w.contains(arith(*op).apply(x, y)) => vec![],
                _ => vec![RteKind::SignedOverflow],
            }
        }
        _ => vec![],
    }
}

pub fn arith(op: BinOp) -> ArithOp {
    match op {
        BinOp::Add => ArithOp::Add,
        BinOp::Sub => ArithOp::Sub,
        BinOp::Mul => ArithOp::Mul,
        BinOp::Div => ArithOp::Div,
        BinOp::Rem => ArithOp::Rem,
        other => panic!("{other:?} is not arithmetic"),
    }
}

/// Guard predicate over operand terms `a` (and `b` for binary operations).
pub fn guard_pred(kind: RteKind, e: &Expr, a: Term, b: Option<Term>, w: IntWidth) -> Pred {
    match (&e.kind, kind) {
        (ExprKind::Unary(UnOp::Neg, _), RteKind::SignedOverflow) => {
            Pred::Cmp(CmpOp::Le, Term::Const(-w.max()), a)
        }
        (ExprKind::Binary(_, _, _), RteKind::DivByZero) => {
            Pred::Cmp(CmpOp::Ne, b.expect("binary guard"), Term::Const(0))
        }
        (ExprKind::Binary(BinOp::Div | BinOp::Rem, _, _), RteKind::SignedOverflow) => Pred::Or(vec![
            Pred::Cmp(CmpOp::Ne, a, Term::Const(w.min())),
            Pred::Cmp(CmpOp::Ne, b.expect("binary guard"), Term::Const(-1)),
        ]),
        (ExprKind::Binary(op, _, _), RteKind::SignedOverflow) => {
            let r = Term::bin(arith(*op), a, b.expect("binary guard"));
            Pred::And(vec![
                Pred::Cmp(CmpOp::Le, Term::Const(w.min()), r.clone()),
                Pred::Cmp(CmpOp::Le, r, Term::Const(w.max())),
            ])
        }
        _ => panic!("no {kind:?} guard for this expression"),
    }
}

/// Does the guard hold for every pair of operand values drawn from `a` and `b`?
pub fn guard_entailed(kind: RteKind, e: &Expr, a: Interval, b: Interval, w: IntWidth) -> bool {
    if a.is_bottom() || b.is_bottom() && matches!(e.kind, ExprKind::Binary(..)) {
        return true;
    }
    match (&e.kind, kind) {
        (ExprKind::Unary(UnOp::Neg, _), _) => !a.contains(w.min()),
        (ExprKind::Binary(..), RteKind::DivByZero) => !b.contains(0),
        (ExprKind::Binary(BinOp::Div | BinOp::Rem, _, _), _) => !(a.contains(w.min()) && b.contains(-1)),
        (ExprKind::Binary(op, _, _), _) => {
            let r = match op {
                BinOp::Add => a.add(b),
                BinOp::Sub => a.sub(b),
                _ => a.mul(b),
            };
            r.le(Interval::full(w))
        }
        _ => true,
    }
}

/// Operand expression as a specification term, for displaying guards.
pub fn expr_term(e: &Expr, tp: &TypedProgram) -> Term {
    match &e.kind {
        ExprKind::Int(v) => Term::Const(*v),
        ExprKind::Const(b) => match b {
            crate::frontend::Builtin::IntMin => Term::IntMin,
            crate::frontend::Builtin::IntMax => Term::IntMax,
        },
        ExprKind::Var(v) => Term::var(v.clone()),
        ExprKind::Unary(UnOp::Neg, a) => Term::neg(expr_term(a, tp)),
        ExprKind::Binary(op, a, b) if op.is_arith() => Term::bin(arith(*op), expr_term(a, tp), expr_term(b, tp)),
        ExprKind::Call { callee, args } => Term::Call(callee.clone(), args.iter().map(|a| expr_term(a, tp)).collect()),
        _ => Term::Ite(Box::new(expr_pred(e, tp)), Box::new(Term::Const(1)), Box::new(Term::Const(0))),
    }
}

/// Truth of an expression in a condition position.
pub fn expr_pred(e: &Expr, tp: &TypedProgram) -> Pred {
    match &e.kind {
        ExprKind::Unary(UnOp::Not, a) => Pred::Not(Box::new(expr_pred(a, tp))),
        ExprKind::Binary(BinOp::And, a, b) => Pred::And(vec![expr_pred(a, tp), expr_pred(b, tp)]),
        ExprKind::Binary(BinOp::Or, a, b) => Pred::Or(vec![expr_pred(a, tp), expr_pred(b, tp)]),
        ExprKind::Binary(op, a, b) if op.is_comparison() => Pred::Cmp(cmp(*op), expr_term(a, tp), expr_term(b, tp)),
        _ => Pred::Cmp(CmpOp::Ne, expr_term(e, tp), Term::Const(0)),
    }
}

pub fn cmp(op: BinOp) -> CmpOp {
    match op {
        BinOp::Eq => CmpOp::Eq,
        BinOp::Ne => CmpOp::Ne,
        BinOp::Lt => CmpOp::Lt,
        BinOp::Le => CmpOp::Le,
        BinOp::Gt => CmpOp::Gt,
        BinOp::Ge => CmpOp::Ge,
        other => panic!("{other:?} is not a comparison"),
    }
}
