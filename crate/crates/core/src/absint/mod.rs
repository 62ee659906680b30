//! Interval abstract interpretation.
//!
//! The analyzer runs from the entry function (or every uncalled function
//! when there is no `main`) and keeps one summary per function: parameter
//! intervals joined over all call sites and the interval of the returned
//! value. Summaries are iterated to a fixpoint, then a final pass records
//! the states. It places a
//! guard assertion at every operation that may divide by zero or overflow
//! and classifies each one as `Proven` or `Alarm`.

pub mod guards;
mod interval;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{
    walk_exprs, BinOp, Expr, ExprKind, IntWidth, Location, NodeId, RetType, Stmt, StmtKind, TypedProgram, UnOp,
};
use crate::specs::Pred;

pub use guards::{guard_entailed, guard_kinds, guard_pred, RteKind};
pub use interval::{Bound, Interval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// Loop iterations joined before widening kicks in.
    pub widening_delay: u32,
    /// Whole-program rounds allowed before function summaries must be stable.
    pub max_rounds: u32,
    /// Ascending iterations allowed after widening before giving up.
    pub max_loop_iterations: u32,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            widening_delay: 3,
            max_rounds: 64,
            max_loop_iterations: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("analysis budget exceeded: {0}")]
    AnalysisBudgetExceeded(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Status {
    Proven,
    Alarm,
    Pending,
}

/// Stable identifier, e.g. `div0-n12` or `call-n7`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AssertionId(pub String);

impl AssertionId {
    pub fn new(kind: RteKind, node: NodeId) -> AssertionId {
        AssertionId(format!("{}-{}", kind.short(), node))
    }
}

impl fmt::Display for AssertionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RteAssertion {
    pub id: AssertionId,
    pub kind: RteKind,
    pub predicate: Pred,
    /// The guarded operation, or the call expression for call-site assertions.
    pub node: NodeId,
    pub host: String,
    pub loc: Location,
    pub status: Status,
}

/// Variable intervals at a program point.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AbstractEnv {
    pub vars: BTreeMap<String, Interval>,
}

impl AbstractEnv {
    pub fn get(&self, v: &str) -> Option<Interval> {
        self.vars.get(v).copied()
    }

    pub fn join(&self, o: &AbstractEnv) -> AbstractEnv {
        let mut vars = self.vars.clone();
        for (k, v) in &o.vars {
            let e = vars.entry(k.clone()).or_insert(*v);
            *e = e.join(*v);
        }
        AbstractEnv { vars }
    }

    fn widen(&self, next: &AbstractEnv, w: IntWidth) -> AbstractEnv {
        let mut vars = self.vars.clone();
        for (k, v) in &next.vars {
            let e = vars.entry(k.clone()).or_insert(*v);
            *e = e.widen(*v, w);
        }
        AbstractEnv { vars }
    }

    fn le(&self, o: &AbstractEnv) -> bool {
        self.vars
            .iter()
            .all(|(k, v)| o.vars.get(k).is_some_and(|ov| v.le(*ov)))
    }
}

type Env = Option<AbstractEnv>;

fn join_env(a: &Env, b: &Env) -> Env {
    match (a, b) {
        (None, x) | (x, None) => x.clone(),
        (Some(a), Some(b)) => Some(a.join(b)),
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisResult {
    pub width: IntWidth,
    pub config: AnalysisConfig,
    /// Guard assertions ordered by node id, then kind.
    pub assertions: Vec<RteAssertion>,
    /// State before each reached statement, joined over all contexts.
    pub stmt_envs: BTreeMap<NodeId, AbstractEnv>,
    /// Loop-head invariant per reached loop.
    pub loop_heads: BTreeMap<NodeId, AbstractEnv>,
    /// Parameter state at entry of each reached function.
    pub entries: BTreeMap<String, AbstractEnv>,
    pub returns: BTreeMap<String, Interval>,
    /// Functions the analysis started from.
    pub roots: Vec<String>,
    /// Functions syntactically reachable from the roots.
    pub reachable: BTreeSet<String>,
}

impl AnalysisResult {
    pub fn assertion(&self, id: &AssertionId) -> Option<&RteAssertion> {
        self.assertions.iter().find(|a| &a.id == id)
    }

    pub fn count(&self, kind: RteKind, status: Status) -> usize {
        self.assertions
            .iter()
            .filter(|a| a.kind == kind && a.status == status)
            .count()
    }
}

/// Interval of a call-free expression under `env`. Calls evaluate to the
/// full range; operations that may wrap also yield the full range.
pub fn eval_expr(env: &AbstractEnv, e: &Expr, width: IntWidth) -> Interval {
    let mut a = Analyzer::bare(width);
    a.eval(&Some(env.clone()), e)
}

/// Functions never called by another function, in source order.
pub fn uncalled_functions(tp: &TypedProgram) -> Vec<String> {
    let mut called = BTreeSet::new();
    for f in tp.functions() {
        walk_exprs(&f.body, &mut |_, e| {
            if let ExprKind::Call { callee, .. } = &e.kind {
                if callee != &f.name {
                    called.insert(callee.clone());
                }
            }
        });
    }
    tp.functions()
        .iter()
        .filter(|f| !called.contains(&f.name))
        .map(|f| f.name.clone())
        .collect()
}

fn direct_callees(tp: &TypedProgram, name: &str) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(f) = tp.function(name) {
        walk_exprs(&f.body, &mut |_, e| {
            if let ExprKind::Call { callee, .. } = &e.kind {
                if !out.contains(callee) {
                    out.push(callee.clone());
                }
            }
        });
    }
    out
}

/// Reachable functions with every caller before its callees (reverse
/// post-order of a depth-first walk from the roots).
fn caller_first_order(tp: &TypedProgram, roots: &[String]) -> Vec<String> {
    fn visit(tp: &TypedProgram, f: &str, seen: &mut BTreeSet<String>, out: &mut Vec<String>) {
        if !seen.insert(f.to_string()) {
            return;
        }
        for g in direct_callees(tp, f) {
            visit(tp, &g, seen, out);
        }
        out.push(f.to_string());
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for r in roots {
        visit(tp, r, &mut seen, &mut out);
    }
    out.reverse();
    out
}

pub fn analyze(tp: &TypedProgram, width: IntWidth, config: &AnalysisConfig) -> Result<AnalysisResult, AnalysisError> {
    let roots = match &tp.entry {
        Some(e) => vec![e.clone()],
        None => uncalled_functions(tp),
    };
    let mut reachable = BTreeSet::new();
    let mut work = roots.clone();
    while let Some(f) = work.pop() {
        if reachable.insert(f.clone()) {
            work.extend(direct_callees(tp, &f));
        }
    }

    // Register every guard of every reachable function up front.
    let mut safety: BTreeMap<(NodeId, RteKind), bool> = BTreeMap::new();
    let mut meta: BTreeMap<(NodeId, RteKind), RteAssertion> = BTreeMap::new();
    for f in tp.functions().iter().filter(|f| reachable.contains(&f.name)) {
        walk_exprs(&f.body, &mut |_, e| {
            for kind in guard_kinds(e, tp) {
                let (a, b) = match &e.kind {
                    ExprKind::Unary(_, a) => (guards::expr_term(a, tp), None),
                    ExprKind::Binary(_, a, b) => (guards::expr_term(a, tp), Some(guards::expr_term(b, tp))),
                    _ => unreachable!(),
                };
                safety.insert((e.id, kind), true);
                meta.insert(
                    (e.id, kind),
                    RteAssertion {
                        id: AssertionId::new(kind, e.id),
                        kind,
                        predicate: guard_pred(kind, e, a, b, width),
                        node: e.id,
                        host: f.name.clone(),
                        loc: e.loc,
                        status: Status::Proven,
                    },
                );
            }
        });
    }

    let order = caller_first_order(tp, &roots);
    let mut an = Analyzer::bare(width);
    an.tp = Some(tp);
    an.config = *config;
    an.safety = safety;
    for r in &roots {
        let f = tp.function(r).expect("root exists");
        an.ins.insert(r.clone(), vec![Interval::full(width); f.params.len()]);
    }
    let mut rounds = 0u32;
    loop {
        an.changed = false;
        for f in &order {
            an.summarize(f);
        }
        if !an.changed {
            break;
        }
        rounds += 1;
        if rounds > config.max_rounds {
            return Err(AnalysisError::AnalysisBudgetExceeded(format!(
                "function summaries did not stabilize after {} rounds",
                config.max_rounds
            )));
        }
    }
    an.frozen = true;
    an.recording = true;
    for f in &order {
        an.summarize(f);
    }
    if let Some(e) = an.error.take() {
        return Err(e);
    }

    let assertions = meta
        .into_iter()
        .map(|(key, mut a)| {
            if !an.safety[&key] {
                a.status = Status::Alarm;
            }
            a
        })
        .collect();
    Ok(AnalysisResult {
        width,
        config: *config,
        assertions,
        stmt_envs: an.stmt_envs,
        loop_heads: an.loop_heads,
        entries: an.entries,
        returns: an.returns,
        roots,
        reachable,
    })
}

struct Analyzer<'a> {
    tp: Option<&'a TypedProgram>,
    width: IntWidth,
    config: AnalysisConfig,
    /// Only the final pass over a loop body records guard outcomes and states.
    recording: bool,
    /// Parameter intervals per function, joined over call sites.
    ins: BTreeMap<String, Vec<Interval>>,
    outs: BTreeMap<String, Interval>,
    updates: BTreeMap<String, u32>,
    changed: bool,
    /// Summaries no longer change; set for the recording pass.
    frozen: bool,
    safety: BTreeMap<(NodeId, RteKind), bool>,
    stmt_envs: BTreeMap<NodeId, AbstractEnv>,
    loop_heads: BTreeMap<NodeId, AbstractEnv>,
    entries: BTreeMap<String, AbstractEnv>,
    returns: BTreeMap<String, Interval>,
    ret_acc: Interval,
    error: Option<AnalysisError>,
}

impl<'a> Analyzer<'a> {
    fn bare(width: IntWidth) -> Analyzer<'a> {
        Analyzer {
            tp: None,
            width,
            config: AnalysisConfig::default(),
            recording: false,
            ins: BTreeMap::new(),
            outs: BTreeMap::new(),
            updates: BTreeMap::new(),
            changed: false,
            frozen: false,
            safety: BTreeMap::new(),
            stmt_envs: BTreeMap::new(),
            loop_heads: BTreeMap::new(),
            entries: BTreeMap::new(),
            returns: BTreeMap::new(),
            ret_acc: Interval::Bottom,
            error: None,
        }
    }

    fn full(&self) -> Interval {
        Interval::full(self.width)
    }

    /// Count an update of `name`'s summary and report whether to widen.
    fn bump(&mut self, name: &str) -> bool {
        let n = self.updates.entry(name.to_string()).or_default();
        *n += 1;
        *n > self.config.widening_delay
    }

    fn call(&mut self, name: &str, args: Vec<Interval>) -> Interval {
        if self.tp.is_none() {
            return self.full();
        }
        if !self.frozen {
            let cur = self.ins.get(name).cloned();
            let grown = match &cur {
                None => true,
                Some(c) => !args.iter().zip(c).all(|(a, c)| a.le(*c)),
            };
            if grown {
                let widen = self.bump(name);
                let w = self.width;
                let next = match cur {
                    None => args,
                    Some(c) => c
                        .iter()
                        .zip(&args)
                        .map(|(c, a)| if widen { c.widen(*a, w) } else { c.join(*a) })
                        .collect(),
                };
                self.ins.insert(name.to_string(), next);
                self.changed = true;
            }
        }
        self.outs.get(name).copied().unwrap_or(Interval::Bottom)
    }

    /// Analyze `name` under its current parameter summary and update its
    /// return summary.
    fn summarize(&mut self, name: &str) {
        let Some(tp) = self.tp else { return };
        let Some(args) = self.ins.get(name).cloned() else {
            return;
        };
        let f = tp.function(name).expect("resolved callee");
        let env = AbstractEnv {
            vars: f.params.iter().map(|p| p.name.clone()).zip(args).collect(),
        };
        if self.recording {
            self.entries.insert(name.to_string(), env.clone());
        }
        self.ret_acc = Interval::Bottom;
        let end = self.block(Some(env), &f.body);
        let ret = match f.ret {
            RetType::Int => self.ret_acc,
            RetType::Void if end.is_some() || !self.ret_acc.is_bottom() => Interval::single(0),
            RetType::Void => Interval::Bottom,
        };
        if self.recording {
            self.returns.insert(name.to_string(), ret);
        }
        if !self.frozen {
            let cur = self.outs.get(name).copied().unwrap_or(Interval::Bottom);
            if !ret.le(cur) {
                let next = if self.bump(&format!("{name}#ret")) {
                    cur.widen(ret, self.width)
                } else {
                    cur.join(ret)
                };
                self.outs.insert(name.to_string(), next);
                self.changed = true;
            }
        }
    }

    fn block(&mut self, mut env: Env, stmts: &[Stmt]) -> Env {
        for s in stmts {
            env = self.stmt(env, s);
        }
        env
    }

    fn stmt(&mut self, env: Env, s: &Stmt) -> Env {
        let Some(cur) = &env else {
            return None;
        };
        if self.recording {
            let e = self.stmt_envs.entry(s.id).or_default();
            *e = e.join(cur);
        }
        match &s.kind {
            StmtKind::Decl { name, init: value } | StmtKind::Assign { name, value } => {
                let v = self.eval(&env, value);
                if v.is_bottom() {
                    return None;
                }
                let mut next = cur.clone();
                next.vars.insert(name.clone(), v);
                Some(next)
            }
            StmtKind::Expr(e) => {
                let v = self.eval(&env, e);
                if v.is_bottom() {
                    None
                } else {
                    env
                }
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    let v = self.eval(&env, e);
                    self.ret_acc = self.ret_acc.join(v);
                }
                None
            }
            StmtKind::Block(b) => self.block(env, b),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                if self.eval(&env, cond).is_bottom() {
                    return None;
                }
                let t = self.filter(&env, cond, true);
                let f = self.filter(&env, cond, false);
                let t = self.stmt(t, then_branch);
                let f = match else_branch {
                    Some(e) => self.stmt(f, e),
                    None => f,
                };
                join_env(&t, &f)
            }
            StmtKind::While { cond, body } => self.while_loop(env, s.id, cond, body),
        }
    }

    fn while_loop(&mut self, entry: Env, id: NodeId, cond: &Expr, body: &Stmt) -> Env {
        let saved = self.recording;
        self.recording = false;
        let mut head = entry.clone();
        let mut iter = 0u32;
        loop {
            let inside = self.filter(&head, cond, true);
            let out = self.stmt(inside, body);
            let next = join_env(&entry, &out);
            let stable = match (&next, &head) {
                (None, _) => true,
                (Some(n), Some(h)) => n.le(h),
                (Some(_), None) => false,
            };
            if stable {
                break;
            }
            iter += 1;
            head = if iter <= self.config.widening_delay {
                join_env(&head, &next)
            } else {
                match (&head, &next) {
                    (Some(h), Some(n)) => Some(h.widen(n, self.width)),
                    _ => next,
                }
            };
            if iter > self.config.widening_delay + self.config.max_loop_iterations {
                if self.error.is_none() {
                    self.error = Some(AnalysisError::AnalysisBudgetExceeded(format!(
                        "loop {id} did not stabilize"
                    )));
                }
                break;
            }
        }
        // One narrowing step.
        let inside = self.filter(&head, cond, true);
        let out = self.stmt(inside, body);
        let narrowed = join_env(&entry, &out);
        if let (Some(n), Some(h)) = (&narrowed, &head) {
            if n.le(h) {
                head = narrowed;
            }
        }
        self.recording = saved;

        if self.recording {
            if let Some(h) = &head {
                let e = self.loop_heads.entry(id).or_default();
                *e = e.join(h);
            }
        }
        // Final pass records guards inside the body and the condition.
        self.eval(&head, cond);
        let inside = self.filter(&head, cond, true);
        self.stmt(inside, body);
        self.filter(&head, cond, false)
    }

    fn record(&mut self, e: &Expr, a: Interval, b: Interval) {
        if !self.recording {
            return;
        }
        let Some(tp) = self.tp else { return };
        for kind in guard_kinds(e, tp) {
            if !guard_entailed(kind, e, a, b, self.width) {
                if let Some(s) = self.safety.get_mut(&(e.id, kind)) {
                    *s = false;
                }
            }
        }
    }

    fn eval(&mut self, env: &Env, e: &Expr) -> Interval {
        let Some(cur) = env else {
            return Interval::Bottom;
        };
        let w = self.width;
        match &e.kind {
            ExprKind::Int(v) => Interval::single(*v),
            ExprKind::Const(b) => Interval::single(w.builtin(*b)),
            ExprKind::Var(v) => cur.get(v).unwrap_or(self.full()),
            ExprKind::Unary(UnOp::Neg, a) => {
                let x = self.eval(env, a);
                self.record(e, x, Interval::Bottom);
                x.neg().fit(w)
            }
            ExprKind::Unary(UnOp::Not, a) => {
                let x = self.eval(env, a);
                truth(x, |v| v == 0)
            }
            ExprKind::Binary(op @ (BinOp::And | BinOp::Or), a, b) => {
                let x = self.eval(env, a);
                if x.is_bottom() {
                    return x;
                }
                let short = *op == BinOp::Or;
                let rest = self.filter(env, a, !short);
                let y = self.eval(&rest, b);
                let mut out = Interval::Bottom;
                // Short-circuit outcome.
                if self.filter(env, a, short).is_some() {
                    out = out.join(Interval::single(short as i128));
                }
                if rest.is_some() && !y.is_bottom() {
                    out = out.join(truth(y, |v| v != 0));
                }
                out
            }
            ExprKind::Binary(op, a, b) if op.is_comparison() => {
                let x = self.eval(env, a);
                let y = self.eval(env, b);
                if x.is_bottom() || y.is_bottom() {
                    return Interval::Bottom;
                }
                let can_true = cmp_possible(*op, x, y);
                let can_false = cmp_possible(negate(*op), x, y);
                match (can_true, can_false) {
                    (true, true) => Interval::of(0, 1),
                    (true, false) => Interval::single(1),
                    (false, true) => Interval::single(0),
                    (false, false) => Interval::Bottom,
                }
            }
            ExprKind::Binary(op, a, b) => {
                let x = self.eval(env, a);
                let y = self.eval(env, b);
                if x.is_bottom() || y.is_bottom() {
                    return Interval::Bottom;
                }
                self.record(e, x, y);
                let r = match op {
                    BinOp::Add => x.add(y),
                    BinOp::Sub => x.sub(y),
                    BinOp::Mul => x.mul(y),
                    BinOp::Div => x.div(y),
                    BinOp::Rem => x.rem(y),
                    _ => unreachable!(),
                };
                if r.is_bottom() {
                    // Only division by zero is possible: execution stops.
                    return r;
                }
                r.fit(w)
            }
            ExprKind::Call { callee, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    let v = self.eval(env, a);
                    if v.is_bottom() {
                        return Interval::Bottom;
                    }
                    vals.push(v);
                }
                self.call(callee, vals)
            }
        }
    }

    /// Restrict `env` to states where `cond` evaluates to `truth`.
    fn filter(&mut self, env: &Env, cond: &Expr, truth: bool) -> Env {
        let cur = env.as_ref()?;
        let saved = self.recording;
        self.recording = false;
        let out = self.filter_inner(cur, cond, truth);
        self.recording = saved;
        out
    }

    fn filter_inner(&mut self, cur: &AbstractEnv, cond: &Expr, truth: bool) -> Env {
        let env = Some(cur.clone());
        match &cond.kind {
            ExprKind::Unary(UnOp::Not, a) => self.filter_inner(cur, a, !truth),
            ExprKind::Binary(op @ (BinOp::And | BinOp::Or), a, b) => {
                let both = (*op == BinOp::And) == truth;
                if both {
                    let l = self.filter_inner(cur, a, truth)?;
                    self.filter_inner(&l, b, truth)
                } else {
                    let first = self.filter_inner(cur, a, truth);
                    let second = self
                        .filter_inner(cur, a, !truth)
                        .and_then(|l| self.filter_inner(&l, b, truth));
                    join_env(&first, &second)
                }
            }
            ExprKind::Binary(op, a, b) if op.is_comparison() => {
                let op = if truth { *op } else { negate(*op) };
                let x = self.eval(&env, a);
                let y = self.eval(&env, b);
                if x.is_bottom() || y.is_bottom() || !cmp_possible(op, x, y) {
                    return None;
                }
                let mut next = cur.clone();
                if let ExprKind::Var(v) = &a.kind {
                    let r = refine(op, x, y);
                    if r.is_bottom() {
                        return None;
                    }
                    next.vars.insert(v.clone(), r);
                }
                if let ExprKind::Var(v) = &b.kind {
                    let x = next.get(v).map(|_| self.eval(&Some(next.clone()), a)).unwrap_or(x);
                    let r = refine(swap(op), y, x);
                    if r.is_bottom() {
                        return None;
                    }
                    next.vars.insert(v.clone(), r.meet(next.get(v).unwrap_or(r)));
                }
                Some(next)
            }
            _ => {
                let v = self.eval(&env, cond);
                let possible = if truth {
                    !matches!(v.singleton(), Some(0)) && !v.is_bottom()
                } else {
                    v.contains(0)
                };
                if !possible {
                    return None;
                }
                let mut next = cur.clone();
                if let ExprKind::Var(name) = &cond.kind {
                    let r = if truth { refine(BinOp::Ne, v, Interval::single(0)) } else { Interval::single(0) };
                    next.vars.insert(name.clone(), r);
                }
                Some(next)
            }
        }
    }
}

fn truth(x: Interval, is_true: impl Fn(i128) -> bool) -> Interval {
    if x.is_bottom() {
        return x;
    }
    let zero_possible = x.contains(0);
    let nonzero_possible = x.singleton() != Some(0);
    let (t, f) = if is_true(1) {
        (nonzero_possible, zero_possible)
    } else {
        (zero_possible, nonzero_possible)
    };
    match (t, f) {
        (true, true) => Interval::of(0, 1),
        (true, false) => Interval::single(1),
        (false, true) => Interval::single(0),
        (false, false) => Interval::Bottom,
    }
}

fn negate(op: BinOp) -> BinOp {
    match op {
        BinOp::Lt => BinOp::Ge,
        BinOp::Le => BinOp::Gt,
        BinOp::Gt => BinOp::Le,
        BinOp::Ge => BinOp::Lt,
        BinOp::Eq => BinOp::Ne,
        BinOp::Ne => BinOp::Eq,
        op => op,
    }
}

fn swap(op: BinOp) -> BinOp {
    match op {
        BinOp::Lt => BinOp::Gt,
        BinOp::Le => BinOp::Ge,
        BinOp::Gt => BinOp::Lt,
        BinOp::Ge => BinOp::Le,
        op => op,
    }
}

/// Can `x op y` hold for some values of the intervals?
fn cmp_possible(op: BinOp, x: Interval, y: Interval) -> bool {
    let (Interval::Range(a, b), Interval::Range(c, d)) = (x, y) else {
        return false;
    };
    match op {
        BinOp::Lt => a < d,
        BinOp::Le => a <= d,
        BinOp::Gt => b > c,
        BinOp::Ge => b >= c,
        BinOp::Eq => !x.meet(y).is_bottom(),
        BinOp::Ne => !(x.singleton().is_some() && x.singleton() == y.singleton()),
        _ => true,
    }
}

/// Values of `x` for which `x op y` can hold.
fn refine(op: BinOp, x: Interval, y: Interval) -> Interval {
    let (Interval::Range(_, _), Interval::Range(c, d)) = (x, y) else {
        return Interval::Bottom;
    };
    let dec = |b: Bound| match b {
        Bound::Fin(v) => Bound::Fin(v - 1),
        b => b,
    };
    let inc = |b: Bound| match b {
        Bound::Fin(v) => Bound::Fin(v + 1),
        b => b,
    };
    match op {
        BinOp::Lt => x.meet(Interval::new(Bound::NegInf, dec(d))),
        BinOp::Le => x.meet(Interval::new(Bound::NegInf, d)),
        BinOp::Gt => x.meet(Interval::new(inc(c), Bound::PosInf)),
        BinOp::Ge => x.meet(Interval::new(c, Bound::PosInf)),
        BinOp::Eq => x.meet(y),
        BinOp::Ne => match (x, y.singleton()) {
            (Interval::Range(Bound::Fin(lo), hi), Some(v)) if lo == v => Interval::new(Bound::Fin(lo + 1), hi),
            (Interval::Range(lo, Bound::Fin(hi)), Some(v)) if hi == v => Interval::new(lo, Bound::Fin(hi - 1)),
            _ => x,
        },
        _ => x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, resolve};

    fn run(src: &str, w: IntWidth) -> (TypedProgram, AnalysisResult) {
        let tp = resolve(parse(src).unwrap(), w).unwrap();
        let r = analyze(&tp, w, &AnalysisConfig::default()).unwrap();
        (tp, r)
    }

    const ABS_C: &str = "int abs(int x) { if (x < 0) return -x; else return x; }\n\
                         void main() { int a = abs(42); int b = abs(INT_MIN); }";
    const ID_C: &str = "int id(int x) {return x;}\nvoid one() { int x = id(1); 1/x; }\n\
                        void zero() { id(0); }\nvoid main() { one(); zero(); }";

    #[test]
    fn abs_overflow_alarm() {
        let (_, r) = run(ABS_C, IntWidth::W32);
        assert_eq!(r.assertions.len(), 1);
        let a = &r.assertions[0];
        assert_eq!(a.kind, RteKind::SignedOverflow);
        assert_eq!(a.predicate.to_string(), "-2147483647 <= x");
        assert_eq!(a.status, Status::Alarm);
        assert_eq!(a.host, "abs");
    }

    #[test]
    fn abs_without_min_call_is_proven() {
        let (_, r) = run(
            "int abs(int x) { if (x < 0) return -x; else return x; } void main() { int a = abs(42); }",
            IntWidth::W32,
        );
        assert_eq!(r.assertions[0].status, Status::Proven);
    }

    #[test]
    fn identity_division_alarm() {
        let (_, r) = run(ID_C, IntWidth::W32);
        let divs: Vec<_> = r.assertions.iter().filter(|a| a.kind == RteKind::DivByZero).collect();
        assert_eq!(divs.len(), 1);
        assert_eq!(divs[0].predicate.to_string(), "x != 0");
        assert_eq!(divs[0].host, "one");
        // `1 / x` cannot overflow: the dividend is a literal other than INT_MIN.
        assert_eq!(r.assertions.len(), 1);
        // `id` is also called with 0, so its summary returns [0, 1].
        assert_eq!(divs[0].status, Status::Alarm);
        assert_eq!(r.returns["id"], Interval::of(0, 1));
    }

    #[test]
    fn constant_divisor_is_proven() {
        let (_, r) = run("int f() { return 1 / 2; }", IntWidth::W32);
        assert_eq!(r.assertions.len(), 1);
        assert_eq!(r.assertions[0].status, Status::Proven);
    }

    #[test]
    fn eval_examples() {
        let env = AbstractEnv {
            vars: [("x".to_string(), Interval::of(-3, 3))].into(),
        };
        let e = parse("int f(int x) { return -x; }").unwrap().functions[0].body[0].clone();
        let StmtKind::Return(Some(neg)) = &e.kind else { panic!() };
        assert_eq!(eval_expr(&env, neg, IntWidth::W32), Interval::of(-3, 3));
        let env8 = AbstractEnv {
            vars: [("x".to_string(), Interval::single(-128))].into(),
        };
        // 128 does not fit: the result is the whole 8-bit range.
        assert_eq!(eval_expr(&env8, neg, IntWidth::W8), Interval::full(IntWidth::W8));
    }

    #[test]
    fn counting_loop_with_narrowing() {
        let src = "int f() { int i = 0; while (i < 10) i = i + 1; return i; } void main() { f(); }";
        let (tp, r) = run(src, IntWidth::W8);
        let f = tp.function("f").unwrap();
        let head = &r.loop_heads[&f.body[1].id];
        assert_eq!(head.get("i"), Some(Interval::of(0, 10)));
        assert_eq!(r.returns["f"], Interval::single(10));
        assert!(r.assertions.iter().all(|a| a.status == Status::Proven));
    }

    #[test]
    fn unbounded_loop_widens() {
        let src = "void main() { int i = 0; int n = 5; while (n > 0) { i = i + 1; } }";
        let (_, r) = run(src, IntWidth::W8);
        assert_eq!(r.assertions.len(), 1);
        assert_eq!(r.assertions[0].status, Status::Alarm);
    }

    #[test]
    fn short_circuit_protects_division() {
        let src = "int f(int x) { if (x > 0 && 10 / x > 1) return 1; return 0; }";
        let (_, r) = run(src, IntWidth::W8);
        let d = r.assertions.iter().find(|a| a.kind == RteKind::DivByZero).unwrap();
        assert_eq!(d.status, Status::Proven);
    }

    #[test]
    fn unreachable_functions_have_no_assertions() {
        let (_, r) = run("int g(int x) { return x + 1; } void main() { }", IntWidth::W32);
        assert!(r.assertions.is_empty());
        let (_, r) = run("int g(int x) { return x + 1; }", IntWidth::W32);
        assert_eq!(r.roots, vec!["g".to_string()]);
        assert_eq!(r.assertions[0].status, Status::Alarm);
    }

    #[test]
    fn division_overflow_guard() {
        let (_, r) = run("int g(int a, int b) { return a / b; }", IntWidth::W8);
        let kinds: Vec<_> = r.assertions.iter().map(|a| a.kind).collect();
        assert_eq!(kinds, vec![RteKind::DivByZero, RteKind::SignedOverflow]);
        assert_eq!(r.assertions[1].predicate.to_string(), "a != -128 || b != -1");
    }
}
