//! Concrete MiniC interpreter at a fixed width. Execution stops at the first
//! runtime error; with contracts it also stops at violated requires and
//! reports violated ensures and loop invariants.

use std::collections::BTreeMap;

use preguss::absint::RteKind;
use preguss::frontend::{BinOp, Expr, ExprKind, IntWidth, NodeId, Stmt, StmtKind, TypedProgram, UnOp};
use preguss::specs::{ContractEnv, Pred};

use super::logic::{self, Assignment};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stop {
    Rte(RteKind, NodeId),
    /// An accepted ensures clause of the function did not hold on return.
    Ensures(String, String),
    /// An accepted loop invariant did not hold at the loop head.
    Invariant(NodeId, String),
    Fuel,
}

enum Flow {
    Normal,
    Return(Option<i128>),
}

type R<T> = Result<T, Stop>;

pub struct Interp<'a> {
    pub tp: &'a TypedProgram,
    pub w: IntWidth,
    pub contracts: Option<&'a ContractEnv>,
    pub fuel: u64,
    /// Operand values seen at this node, in evaluation order.
    pub probe: Option<NodeId>,
    pub probed: Vec<(i128, Option<i128>)>,
}

impl<'a> Interp<'a> {
    pub fn new(tp: &'a TypedProgram) -> Interp<'a> {
        Interp {
            tp,
            w: tp.width,
            contracts: None,
            fuel: 20_000,
            probe: None,
            probed: vec![],
        }
    }

    pub fn with_contracts(mut self, env: &'a ContractEnv) -> Interp<'a> {
        self.contracts = Some(env);
        self
    }

    /// Run `f` from its entry; `Ok` carries the return value.
    pub fn run(&mut self, f: &str, args: &[i128]) -> Result<Option<i128>, Stop> {
        self.call(f, args.to_vec(), None)
    }

    fn check(&self, p: &Pred, env: &Assignment) -> bool {
        logic::pred(p, self.w, env).unwrap_or(false)
    }

    fn call(&mut self, name: &str, args: Vec<i128>, site: Option<NodeId>) -> R<Option<i128>> {
        let f = self.tp.function(name).expect("callee exists");
        let mut frame: Assignment = BTreeMap::new();
        for (p, v) in f.params.iter().zip(&args) {
            frame.insert(p.name.clone(), *v);
            frame.insert(format!("\\old({})", p.name), *v);
        }
        let entry = frame.clone();
        let contract = self.contracts.map(|c| c.contract(name)).unwrap_or_default();
        if let Some(site) = site {
            if !contract.requires.iter().all(|p| self.check(p, &entry)) {
                return Err(Stop::Rte(RteKind::CallSitePrecondition, site));
            }
        }
        let body = f.body.clone();
        let ret = match self.block(&body, &mut frame)? {
            Flow::Return(v) => v,
            Flow::Normal => None,
        };
        let mut post = entry;
        if let Some(v) = ret {
            post.insert("\\result".into(), v);
        }
        for p in &contract.ensures {
            if !self.check(p, &post) {
                return Err(Stop::Ensures(name.to_string(), p.to_string()));
            }
        }
        Ok(ret)
    }

    fn block(&mut self, ss: &[Stmt], env: &mut Assignment) -> R<Flow> {
        for s in ss {
            if let Flow::Return(v) = self.stmt(s, env)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn tick(&mut self) -> R<()> {
        if self.fuel == 0 {
            return Err(Stop::Fuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt, env: &mut Assignment) -> R<Flow> {
        self.tick()?;
        match &s.kind {
            StmtKind::Decl { name, init } | StmtKind::Assign { name, value: init } => {
                let v = self.expr(init, env)?;
                env.insert(name.clone(), v);
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                if self.expr(cond, env)? != 0 {
                    return self.stmt(then_branch, env);
                } else if let Some(e) = else_branch {
                    return self.stmt(e, env);
                }
            }
            StmtKind::While { cond, body } => loop {
                self.tick()?;
                if let Some(c) = self.contracts {
                    for inv in c.loop_spec(s.id).invariants {
                        if !self.check(&inv, env) {
                            return Err(Stop::Invariant(s.id, inv.to_string()));
                        }
                    }
                }
                if self.expr(cond, env)? == 0 {
                    break;
                }
                if let Flow::Return(v) = self.stmt(body, env)? {
                    return Ok(Flow::Return(v));
                }
            },
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => Some(self.expr(e, env)?),
                    None => None,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Expr(e) => {
                self.expr(e, env)?;
            }
            StmtKind::Block(b) => return self.block(b, env),
        }
        Ok(Flow::Normal)
    }

    fn observe(&mut self, e: &Expr, a: i128, b: Option<i128>) {
        if self.probe == Some(e.id) {
            self.probed.push((a, b));
        }
    }

    fn expr(&mut self, e: &Expr, env: &mut Assignment) -> R<i128> {
        let w = self.w;
        Ok(match &e.kind {
            ExprKind::Int(v) => *v,
            ExprKind::Const(b) => w.builtin(*b),
            ExprKind::Var(v) => *env.get(v).expect("variable is bound"),
            ExprKind::Unary(UnOp::Neg, a) => {
                let x = self.expr(a, env)?;
                self.observe(e, x, None);
                // A negated literal may be out of range on its own, as in -128.
                if !w.contains(-x) {
                    return Err(Stop::Rte(RteKind::SignedOverflow, e.id));
                }
                -x
            }
            ExprKind::Unary(UnOp::Not, a) => (self.expr(a, env)? == 0) as i128,
            ExprKind::Binary(BinOp::And, a, b) => (self.expr(a, env)? != 0 && self.expr(b, env)? != 0) as i128,
            ExprKind::Binary(BinOp::Or, a, b) => (self.expr(a, env)? != 0 || self.expr(b, env)? != 0) as i128,
            ExprKind::Binary(op, a, b) => {
                let x = self.expr(a, env)?;
                let y = self.expr(b, env)?;
                self.observe(e, x, Some(y));
                let r = match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div | BinOp::Rem => {
                        if y == 0 {
                            return Err(Stop::Rte(RteKind::DivByZero, e.id));
                        }
                        if x == w.min() && y == -1 {
                            return Err(Stop::Rte(RteKind::SignedOverflow, e.id));
                        }
                        if *op == BinOp::Div {
                            x / y
                        } else {
                            x % y
                        }
                    }
                    BinOp::Lt => (x < y) as i128,
                    BinOp::Le => (x <= y) as i128,
                    BinOp::Gt => (x > y) as i128,
                    BinOp::Ge => (x >= y) as i128,
                    BinOp::Eq => (x == y) as i128,
                    BinOp::Ne => (x != y) as i128,
                    BinOp::And | BinOp::Or => unreachable!(),
                };
                if !w.contains(r) {
                    return Err(Stop::Rte(RteKind::SignedOverflow, e.id));
                }
                r
            }
            ExprKind::Call { callee, args } => {
                let mut vs = Vec::with_capacity(args.len());
                for a in args {
                    vs.push(self.expr(a, env)?);
                }
                self.call(callee, vs, Some(e.id))?.unwrap_or(0)
            }
        })
    }
}
