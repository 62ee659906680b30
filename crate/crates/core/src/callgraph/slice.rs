//! Dependency-based callee filtering.
//!
//! A flow-insensitive backward slice over the host body: starting from the
//! guarded expression, collect every expression the target's value or its
//! reachability can depend on. Callees called from inside that set keep
//! their bodies in the unit.

use std::collections::BTreeSet;

use super::VUnit;
use crate::frontend::{BinOp, Expr, ExprKind, FunctionDef, NodeId, Stmt, StmtKind, TypedProgram};

pub fn filter_callees_by_dependency(mut v: VUnit, tp: &TypedProgram) -> VUnit {
    let Some(f) = tp.function(&v.host) else {
        return v;
    };
    let keep = relevant_callees(f, v.target.node);
    let (kept, dropped): (Vec<String>, Vec<String>) =
        v.slice[1..].iter().cloned().partition(|c| keep.contains(c));
    v.slice.truncate(1);
    v.slice.extend(kept);
    v.dropped.extend(dropped);
    v
}

/// Functions called from expressions that can influence the value at
/// `target` or whether it is reached.
pub fn relevant_callees(f: &FunctionDef, target: NodeId) -> BTreeSet<String> {
    let mut stmts: Vec<(&Stmt, Vec<&Stmt>)> = Vec::new();
    fn index<'a>(s: &'a Stmt, anc: &mut Vec<&'a Stmt>, out: &mut Vec<(&'a Stmt, Vec<&'a Stmt>)>) {
        out.push((s, anc.clone()));
        anc.push(s);
        match &s.kind {
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                index(then_branch, anc, out);
                if let Some(e) = else_branch {
                    index(e, anc, out);
                }
            }
            StmtKind::While { body, .. } => index(body, anc, out),
            StmtKind::Block(b) => b.iter().for_each(|x| index(x, anc, out)),
            _ => {}
        }
        anc.pop();
    }
    for s in &f.body {
        index(s, &mut Vec::new(), &mut stmts);
    }

    let mut work: Vec<&Expr> = Vec::new();
    let mut seen_exprs: BTreeSet<NodeId> = BTreeSet::new();
    fn add<'a>(e: &'a Expr, work: &mut Vec<&'a Expr>, seen: &mut BTreeSet<NodeId>) {
        if seen.insert(e.id) {
            work.push(e);
        }
    }

    // Locate the target and seed the slice with it, the left operands of
    // enclosing short-circuit operators, and enclosing conditions.
    for (s, anc) in &stmts {
        for e in s.own_exprs() {
            let mut path = Vec::new();
            if find_path(e, target, &mut path) {
                add(path.last().unwrap(), &mut work, &mut seen_exprs);
                for w in path.windows(2) {
                    if let ExprKind::Binary(BinOp::And | BinOp::Or, l, r) = &w[0].kind {
                        if r.id == w[1].id {
                            add(l, &mut work, &mut seen_exprs);
                        }
                    }
                }
                for a in anc {
                    if let StmtKind::If { cond, .. } | StmtKind::While { cond, .. } = &a.kind {
                        add(cond, &mut work, &mut seen_exprs);
                    }
                }
            }
        }
    }
    // Early exits decide whether the target is reached at all.
    for (s, _) in &stmts {
        if let StmtKind::If { cond, .. } | StmtKind::While { cond, .. } = &s.kind {
            let mut has_return = false;
            s.walk(&mut |x| has_return |= matches!(x.kind, StmtKind::Return(_)));
            if has_return {
                add(cond, &mut work, &mut seen_exprs);
            }
        }
    }

    let mut vars: BTreeSet<String> = BTreeSet::new();
    let mut callees = BTreeSet::new();
    let mut done_defs: BTreeSet<NodeId> = BTreeSet::new();
    loop {
        while let Some(e) = work.pop() {
            e.walk(&mut |x| match &x.kind {
                ExprKind::Var(v) => {
                    vars.insert(v.clone());
                }
                ExprKind::Call { callee, .. } => {
                    callees.insert(callee.clone());
                }
                _ => {}
            });
        }
        let mut grew = false;
        for (s, anc) in &stmts {
            let (StmtKind::Decl { name, init: value } | StmtKind::Assign { name, value }) = &s.kind else {
                continue;
            };
            if !vars.contains(name) || !done_defs.insert(s.id) {
                continue;
            }
            grew = true;
            add(value, &mut work, &mut seen_exprs);
            for a in anc {
                if let StmtKind::If { cond, .. } | StmtKind::While { cond, .. } = &a.kind {
                    add(cond, &mut work, &mut seen_exprs);
                }
            }
        }
        if !grew && work.is_empty() {
            break;
        }
    }
    callees
}

/// Path of expressions from `e` down to the node `target`.
fn find_path<'a>(e: &'a Expr, target: NodeId, path: &mut Vec<&'a Expr>) -> bool {
    path.push(e);
    if e.id == target {
        return true;
    }
    let found = match &e.kind {
        ExprKind::Unary(_, a) => find_path(a, target, path),
        ExprKind::Binary(_, a, b) => find_path(a, target, path) || find_path(b, target, path),
        ExprKind::Call { args, .. } => args.iter().any(|a| find_path(a, target, path)),
        _ => false,
    };
    if !found {
        path.pop();
    }
    found
}
