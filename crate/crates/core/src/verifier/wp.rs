//! Weakest preconditions over MiniC function bodies.
//!
//! Expressions are translated in continuation-passing style so that guards
//! and calls nested inside expressions are visited in evaluation order and
//! short-circuit operators only guard what they evaluate. One obligation is
//! the goal of each computation; every other guard is assumed once passed.

use std::cell::RefCell;
use std::collections::BTreeSet;

use crate::absint::guards::{arith, cmp, guard_kinds, guard_pred};
use crate::absint::RteKind;
use crate::frontend::{assigned_vars, BinOp, Expr, ExprKind, FunctionDef, IntWidth, NodeId, Stmt, StmtKind, TypedProgram, UnOp};
use crate::specs::{bindings, CmpOp, ContractEnv, Pred, Sym, Term};

/// The single obligation a weakest precondition is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Focus {
    Guard { node: NodeId, kind: RteKind },
    CallPre(NodeId),
    LoopInit(NodeId),
    LoopPreserve(NodeId),
    Ensures,
    /// No goal: every obligation is assumed or ignored.
    Nothing,
}

/// Symbol standing for the value returned by the call at `site`.
pub fn ret_symbol(callee: &str, site: NodeId) -> String {
    format!("__ret_{callee}_{site}")
}

/// Symbol for the value of `var` at the head of an arbitrary iteration of `lp`.
pub fn havoc_symbol(lp: NodeId, var: &str) -> String {
    format!("__L{}_{var}", lp.0)
}

pub fn is_call_result(name: &str) -> bool {
    name.starts_with("__ret_")
}

pub fn is_havoc(name: &str) -> bool {
    name.starts_with("__L")
}

pub struct Wp<'a> {
    pub tp: &'a TypedProgram,
    pub width: IntWidth,
    pub contracts: &'a ContractEnv,
    pub focus: Focus,
    /// Goal used instead of the full ensures or loop invariant of the focus.
    pub goal: Option<Pred>,
    /// Loops on the way that had no invariant and were given `\true`.
    pub missing_invariants: RefCell<BTreeSet<NodeId>>,
}

impl<'a> Wp<'a> {
    pub fn new(tp: &'a TypedProgram, contracts: &'a ContractEnv, focus: Focus) -> Wp<'a> {
        Wp {
            tp,
            width: tp.width,
            contracts,
            focus,
            goal: None,
            missing_invariants: RefCell::new(BTreeSet::new()),
        }
    }

    pub fn with_goal(mut self, goal: Pred) -> Wp<'a> {
        self.goal = Some(goal);
        self
    }

    /// Goal over the entry state of `f` (parameters), without the
    /// function's own requires.
    pub fn function(&self, f: &FunctionDef) -> Pred {
        let to_old = bindings(f.params.iter().map(|p| (Sym::Var(p.name.clone()), Term::Old(p.name.clone()))));
        let from_old = bindings(f.params.iter().map(|p| (Sym::Old(p.name.clone()), Term::var(p.name.clone()))));
        let qret = if self.focus == Focus::Ensures {
            let post = self.goal.clone().unwrap_or_else(|| self.contracts.contract(&f.name).post());
            post.substitute(&to_old)
        } else {
            Pred::True
        };
        let body = self.stmts(&f.body, qret.clone(), &qret);
        body.substitute(&from_old).simplify(self.width)
    }

    pub fn stmts(&self, ss: &[Stmt], q: Pred, qret: &Pred) -> Pred {
        ss.iter().rev().fold(q, |q, s| self.stmt(s, q, qret))
    }

    pub fn stmt(&self, s: &Stmt, q: Pred, qret: &Pred) -> Pred {
        match &s.kind {
            StmtKind::Decl { name, init: value } | StmtKind::Assign { name, value } => {
                self.expr(value, &|t| q.substitute(&bindings([(Sym::Var(name.clone()), t)])))
            }
            StmtKind::Expr(e) => self.expr(e, &|_| q.clone()),
            StmtKind::Return(Some(e)) => self.expr(e, &|t| qret.substitute(&bindings([(Sym::Result, t)]))),
            StmtKind::Return(None) => qret.clone(),
            StmtKind::Block(b) => self.stmts(b, q, qret),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let t = self.stmt(then_branch, q.clone(), qret);
                let f = match else_branch {
                    Some(e) => self.stmt(e, q, qret),
                    None => q,
                };
                self.cond(cond, &t, &f)
            }
            StmtKind::While { cond, body } => self.while_loop(s.id, cond, body, q, qret),
        }
    }

    fn while_loop(&self, id: NodeId, cond: &Expr, body: &Stmt, q: Pred, qret: &Pred) -> Pred {
        let spec = self.contracts.loop_spec(id);
        if spec.invariants.is_empty() {
            self.missing_invariants.borrow_mut().insert(id);
        }
        let inv = Pred::and(spec.invariants.iter().cloned());
        let havoc = bindings(
            assigned_vars(body)
                .into_iter()
                .map(|v| (Sym::Var(v.clone()), Term::var(havoc_symbol(id, &v)))),
        );
        let goal = self.goal.clone().unwrap_or_else(|| inv.clone());
        let body_goal = if self.focus == Focus::LoopPreserve(id) {
            goal.clone()
        } else {
            Pred::True
        };
        let after_body = self.stmt(body, body_goal, qret);
        let inner = self.cond(cond, &after_body, &q);
        let step = Pred::implies(inv.substitute(&havoc), inner.substitute(&havoc));
        if self.focus == Focus::LoopInit(id) {
            Pred::and([goal, step])
        } else {
            step
        }
    }

    /// Evaluate `e`, then continue with `k` applied to its value.
    pub fn expr(&self, e: &Expr, k: &dyn Fn(Term) -> Pred) -> Pred {
        match &e.kind {
            ExprKind::Int(v) => k(Term::Const(*v)),
            ExprKind::Const(b) => k(Term::Const(self.width.builtin(*b))),
            ExprKind::Var(v) => k(Term::var(v.clone())),
            ExprKind::Unary(UnOp::Neg, a) => self.expr(a, &|ta| self.guarded(e, ta.clone(), None, k(Term::neg(ta)))),
            ExprKind::Unary(UnOp::Not, _) | ExprKind::Binary(BinOp::And | BinOp::Or, ..) => {
                if self.is_pure(e) {
                    k(Term::Ite(Box::new(self.pure_pred(e)), Box::new(Term::Const(1)), Box::new(Term::Const(0))))
                } else {
                    self.cond(e, &k(Term::Const(1)), &k(Term::Const(0)))
                }
            }
            ExprKind::Binary(op, a, b) if op.is_comparison() => self.expr(a, &|ta| {
                self.expr(b, &|tb| {
                    let c = Pred::Cmp(cmp(*op), ta.clone(), tb);
                    k(Term::Ite(Box::new(c), Box::new(Term::Const(1)), Box::new(Term::Const(0))))
                })
            }),
            ExprKind::Binary(op, a, b) => self.expr(a, &|ta| {
                self.expr(b, &|tb| {
                    let v = Term::bin(arith(*op), ta.clone(), tb.clone());
                    self.guarded(e, ta.clone(), Some(tb), k(v))
                })
            }),
            ExprKind::Call { callee, args } => self.args(args, Vec::new(), &|ts| self.call(e, callee, ts, k)),
        }
    }

    fn args(&self, rest: &[Expr], done: Vec<Term>, k: &dyn Fn(Vec<Term>) -> Pred) -> Pred {
        match rest.split_first() {
            None => k(done),
            Some((a, tail)) => self.expr(a, &|t| {
                let mut next = done.clone();
                next.push(t);
                self.args(tail, next, k)
            }),
        }
    }

    fn call(&self, e: &Expr, callee: &str, actuals: Vec<Term>, k: &dyn Fn(Term) -> Pred) -> Pred {
        let f = self.tp.function(callee).expect("resolved callee");
        let c = self.contracts.contract(callee);
        let r = Term::var(ret_symbol(callee, e.id));
        let mut inst = bindings(f.params.iter().zip(&actuals).map(|(p, t)| (Sym::Var(p.name.clone()), t.clone())));
        let pre = c.pre().substitute(&inst);
        for (p, t) in f.params.iter().zip(&actuals) {
            inst.insert(Sym::Old(p.name.clone()), t.clone());
        }
        inst.insert(Sym::Result, r.clone());
        let post = c.post().substitute(&inst);
        let rest = Pred::implies(Pred::implies(pre.clone(), post), k(r));
        if self.focus == Focus::CallPre(e.id) {
            Pred::and([pre, rest])
        } else {
            rest
        }
    }

    /// Guards of the operation `e` followed by `rest`.
    fn guarded(&self, e: &Expr, a: Term, b: Option<Term>, rest: Pred) -> Pred {
        let mut out = rest;
        for kind in guard_kinds(e, self.tp).into_iter().rev() {
            let g = guard_pred(kind, e, a.clone(), b.clone(), self.width);
            out = if self.focus == (Focus::Guard { node: e.id, kind }) {
                Pred::and([g, out])
            } else {
                Pred::implies(g, out)
            };
        }
        out
    }

    /// Evaluate `e` as a condition: `kt` when it is non-zero, `kf` otherwise.
    pub fn cond(&self, e: &Expr, kt: &Pred, kf: &Pred) -> Pred {
        match &e.kind {
            ExprKind::Unary(UnOp::Not, a) => self.cond(a, kf, kt),
            ExprKind::Binary(BinOp::And, a, b) => self.cond(a, &self.cond(b, kt, kf), kf),
            ExprKind::Binary(BinOp::Or, a, b) => self.cond(a, kt, &self.cond(b, kt, kf)),
            ExprKind::Binary(op, a, b) if op.is_comparison() => self.expr(a, &|ta| {
                self.expr(b, &|tb| {
                    let op = cmp(*op);
                    branch(
                        Pred::Cmp(op, ta.clone(), tb.clone()),
                        Pred::Cmp(op.negate(), ta.clone(), tb),
                        kt,
                        kf,
                    )
                })
            }),
            _ => self.expr(e, &|t| {
                branch(
                    Pred::Cmp(CmpOp::Ne, t.clone(), Term::Const(0)),
                    Pred::Cmp(CmpOp::Eq, t, Term::Const(0)),
                    kt,
                    kf,
                )
            }),
        }
    }

    /// No calls and no guarded operations anywhere inside.
    fn is_pure(&self, e: &Expr) -> bool {
        let mut pure = true;
        e.walk(&mut |x| {
            pure &= !matches!(x.kind, ExprKind::Call { .. }) && guard_kinds(x, self.tp).is_empty();
        });
        pure
    }

    fn pure_term(&self, e: &Expr) -> Term {
        match &e.kind {
            ExprKind::Int(v) => Term::Const(*v),
            ExprKind::Const(b) => Term::Const(self.width.builtin(*b)),
            ExprKind::Var(v) => Term::var(v.clone()),
            ExprKind::Unary(UnOp::Neg, a) => Term::neg(self.pure_term(a)),
            ExprKind::Binary(op, a, b) if op.is_arith() => Term::bin(arith(*op), self.pure_term(a), self.pure_term(b)),
            _ => Term::Ite(Box::new(self.pure_pred(e)), Box::new(Term::Const(1)), Box::new(Term::Const(0))),
        }
    }

    fn pure_pred(&self, e: &Expr) -> Pred {
        match &e.kind {
            ExprKind::Unary(UnOp::Not, a) => Pred::not(self.pure_pred(a)),
            ExprKind::Binary(BinOp::And, a, b) => Pred::and([self.pure_pred(a), self.pure_pred(b)]),
            ExprKind::Binary(BinOp::Or, a, b) => Pred::or([self.pure_pred(a), self.pure_pred(b)]),
            ExprKind::Binary(op, a, b) if op.is_comparison() => Pred::Cmp(cmp(*op), self.pure_term(a), self.pure_term(b)),
            _ => Pred::Cmp(CmpOp::Ne, self.pure_term(e), Term::Const(0)),
        }
    }
}

fn branch(c: Pred, not_c: Pred, kt: &Pred, kf: &Pred) -> Pred {
    if kt == kf {
        return kt.clone();
    }
    Pred::and([Pred::implies(c, kt.clone()), Pred::implies(not_c, kf.clone())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, resolve};
    use crate::specs::{parse_predicate, Contract};

    fn program(src: &str, w: IntWidth) -> TypedProgram {
        resolve(parse(src).unwrap(), w).unwrap()
    }

    fn first_guard(tp: &TypedProgram, host: &str, kind: RteKind) -> NodeId {
        let f = tp.function(host).unwrap();
        let mut found = None;
        crate::frontend::walk_exprs(&f.body, &mut |_, e| {
            if found.is_none() && guard_kinds(e, tp).contains(&kind) {
                found = Some(e.id);
            }
        });
        found.unwrap()
    }

    #[test]
    fn empty_block_is_identity() {
        let tp = program("void f() { }", IntWidth::W32);
        let env = ContractEnv::default();
        let wp = Wp::new(&tp, &env, Focus::Nothing);
        let p = parse_predicate("x < 3").unwrap();
        assert_eq!(wp.stmts(&[], p.clone(), &Pred::True), p);
    }

    #[test]
    fn abs_guard_wp() {
        let tp = program("int abs(int x) { if (x < 0) return -x; else return x; }", IntWidth::W32);
        let node = first_guard(&tp, "abs", RteKind::SignedOverflow);
        let env = ContractEnv::default();
        let wp = Wp::new(&tp, &env, Focus::Guard { node, kind: RteKind::SignedOverflow });
        let g = wp.function(tp.function("abs").unwrap());
        assert_eq!(g.to_string(), "x < 0 ==> -2147483647 <= x");
    }

    #[test]
    fn call_result_through_contract() {
        let tp = program(
            "int id(int x) { return x; } void one() { int x = id(1); 1 / x; }",
            IntWidth::W32,
        );
        let node = first_guard(&tp, "one", RteKind::DivByZero);
        let mut env = ContractEnv::default();
        let focus = Focus::Guard { node, kind: RteKind::DivByZero };
        let g = Wp::new(&tp, &env, focus).function(tp.function("one").unwrap());
        let call = tp.function("one").unwrap().body[0].own_exprs()[0].id;
        let r = ret_symbol("id", call);
        assert_eq!(g.to_string(), format!("{r} != 0"));
        env.functions.insert(
            "id".into(),
            Contract {
                requires: vec![],
                ensures: vec![parse_predicate("\\result == x").unwrap()],
            },
        );
        let g = Wp::new(&tp, &env, focus).function(tp.function("one").unwrap());
        assert_eq!(g.to_string(), format!("{r} == 1 ==> {r} != 0"));
    }

    #[test]
    fn short_circuit_guards_only_evaluated_operand() {
        let tp = program("int f(int x) { if (x != 0 && 10 / x > 1) return 1; return 0; }", IntWidth::W8);
        let node = first_guard(&tp, "f", RteKind::DivByZero);
        let env = ContractEnv::default();
        let g = Wp::new(&tp, &env, Focus::Guard { node, kind: RteKind::DivByZero }).function(tp.function("f").unwrap());
        assert_eq!(g, Pred::True);
    }

    #[test]
    fn loop_uses_havoc_and_invariant() {
        let tp = program(
            "int f() { int i = 0; while (i < 10) { i = i + 1; } return i; }",
            IntWidth::W8,
        );
        let f = tp.function("f").unwrap();
        let lp = f.body[1].id;
        let mut env = ContractEnv::default();
        env.loops.entry(lp).or_default().invariants.push(parse_predicate("0 <= i && i <= 10").unwrap());
        let init = Wp::new(&tp, &env, Focus::LoopInit(lp)).function(f);
        assert_eq!(init, Pred::True);
        let pres = Wp::new(&tp, &env, Focus::LoopPreserve(lp));
        let g = pres.function(f);
        let h = havoc_symbol(lp, "i");
        assert!(g.to_string().contains(&h), "{g}");
        assert!(pres.missing_invariants.borrow().is_empty());
    }
}
