//! A deterministic generator that derives clauses from the program itself.
//!
//! Loop invariants come from a Houdini-style fixpoint over candidate atoms
//! (interval bounds at the loop head, the weakened loop condition and
//! comparisons between modified variables). Host requires are the weakest
//! precondition of the target when it only mentions parameters. Callee
//! ensures come from symbolic execution of loop-free bodies, return
//! intervals and simple relations between `\result` and the parameters.
//! Each clause is checked on its own before it is proposed.

use std::collections::{BTreeMap, BTreeSet};

use super::{clause_line, Generator, GeneratorError, GeneratorRequest, GeneratorResponse, Phase, UnitContext};
use crate::absint::guards::{expr_pred, expr_term};
use crate::absint::Bound;
use crate::frontend::{assigned_vars, BinOp, Expr, ExprKind, FunctionDef, NodeId, RetType, Stmt, StmtKind, TypedProgram};
use crate::specs::{AnchoredClause, Clause, CmpOp, ContractEnv, Pred, Sym, Term};
use crate::verifier::{discharge, loops_of, merge_candidate, Focus, VcKind, VcStatus, Verifier};

const MAX_PATHS: usize = 16;

#[derive(Debug, Clone, Default)]
pub struct OracleGenerator {}

impl OracleGenerator {
    pub fn new() -> OracleGenerator {
        OracleGenerator {}
    }
}

impl Generator for OracleGenerator {
    fn id(&self) -> String {
        "oracle".into()
    }

    fn generate(&mut self, req: &GeneratorRequest, cx: &UnitContext<'_>) -> Result<GeneratorResponse, GeneratorError> {
        let tp = cx.tp;
        let rejected: BTreeSet<&str> = req
            .feedback
            .iter()
            .flat_map(|f| f.rejected.iter().map(String::as_str))
            .collect();
        let mut clauses = match req.phase {
            Phase::Host => host_clauses(cx),
            Phase::Callees => callee_clauses(cx, &req.callees),
        };
        clauses.retain(|c| !rejected.contains(clause_line(tp, c).as_str()));
        let raw = if clauses.is_empty() {
            String::new()
        } else {
            let lines: Vec<String> = clauses.iter().map(|c| clause_line(tp, c)).collect();
            format!("```acsl\n{}\n```\n", lines.join("\n"))
        };
        Ok(GeneratorResponse {
            clauses,
            raw,
            notes: vec![],
            usage: None,
        })
    }
}

fn valid(status: &VcStatus) -> bool {
    status.is_valid()
}

fn check(verifier: &Verifier, tp: &TypedProgram, f: &FunctionDef, env: &ContractEnv, focus: Focus, goal: &Pred) -> bool {
    let vc = verifier.vc(tp, f, env, focus, String::new(), VcKind::Target, f.id, String::new(), Some(goal.clone()));
    valid(&verifier.discharge_vc(vc, tp.width).status)
}

fn le(a: Term, b: Term) -> Pred {
    Pred::cmp(CmpOp::Le, a, b)
}

/// Bounds that say more than the integer type already does.
fn bound_atoms(t: Term, lo: Option<Bound>, hi: Option<Bound>, tp: &TypedProgram) -> Vec<Pred> {
    let mut out = Vec::new();
    if let Some(l) = lo.and_then(Bound::finite).filter(|l| *l > tp.width.min()) {
        out.push(le(Term::Const(l), t.clone()));
    }
    if let Some(h) = hi.and_then(Bound::finite).filter(|h| *h < tp.width.max()) {
        out.push(le(t, Term::Const(h)));
    }
    out
}

fn weakened_condition(e: &Expr, tp: &TypedProgram) -> Vec<Pred> {
    if e.contains_call() {
        return vec![];
    }
    match &e.kind {
        ExprKind::Binary(op, a, b) => {
            let (a, b) = (expr_term(a, tp), expr_term(b, tp));
            match op {
                BinOp::Lt => vec![le(a, b)],
                BinOp::Gt => vec![le(b, a)],
                BinOp::Le => vec![le(a, Term::bin(crate::specs::ArithOp::Add, b, Term::Const(1)))],
                BinOp::Ge => vec![le(Term::bin(crate::specs::ArithOp::Sub, b, Term::Const(1)), a)],
                BinOp::And => {
                    let ExprKind::Binary(_, l, r) = &e.kind else { unreachable!() };
                    let mut v = weakened_condition(l, tp);
                    v.extend(weakened_condition(r, tp));
                    v
                }
                _ => vec![],
            }
        }
        _ => vec![],
    }
}

fn find_loop(f: &FunctionDef, lp: NodeId) -> Option<&Stmt> {
    let mut found = None;
    for s in &f.body {
        s.walk(&mut |st| {
            if st.id == lp {
                found = Some(st);
            }
        });
    }
    found
}

fn loop_atoms(cx: &UnitContext<'_>, f: &FunctionDef, lp: NodeId) -> Vec<Pred> {
    let tp = cx.tp;
    let Some(Stmt {
        kind: StmtKind::While { cond, body },
        ..
    }) = find_loop(f, lp)
    else {
        return vec![];
    };
    let head = cx.analysis.loop_heads.get(&lp);
    let scope: Vec<String> = match head {
        Some(env) => env.vars.keys().cloned().collect(),
        None => f.param_names().map(String::from).collect(),
    };
    let modified: BTreeSet<String> = assigned_vars(body).into_iter().collect();
    let mut atoms = Vec::new();
    if let Some(env) = head {
        for (v, iv) in &env.vars {
            atoms.extend(bound_atoms(Term::var(v.clone()), iv.lo(), iv.hi(), tp));
        }
    }
    atoms.extend(weakened_condition(cond, tp));
    for u in modified.iter().filter(|u| scope.contains(u)) {
        for v in scope.iter().filter(|v| *v != u) {
            let (tu, tv) = (Term::var(u.clone()), Term::var(v.clone()));
            atoms.push(Pred::cmp(CmpOp::Eq, tu.clone(), tv.clone()));
            atoms.push(le(tu.clone(), tv.clone()));
            atoms.push(le(tv, tu));
        }
    }
    let mut seen = BTreeSet::new();
    atoms.retain(|a| seen.insert(a.clone()));
    atoms
}

/// Greatest subset of candidate atoms that is inductive for every loop of `f`.
fn houdini(cx: &UnitContext<'_>, f: &FunctionDef, base: &ContractEnv) -> Vec<AnchoredClause> {
    let loops = loops_of(f);
    let mut cands: BTreeMap<NodeId, Vec<Pred>> = loops
        .iter()
        .filter(|lp| base.loop_spec(**lp).invariants.is_empty())
        .map(|lp| (*lp, loop_atoms(cx, f, *lp)))
        .collect();
    loop {
        let mut env = base.clone();
        for (lp, atoms) in &cands {
            env.loops.entry(*lp).or_default().invariants = atoms.clone();
        }
        let mut changed = false;
        for (lp, atoms) in cands.iter_mut() {
            let before = atoms.len();
            atoms.retain(|a| {
                check(cx.verifier, cx.tp, f, &env, Focus::LoopInit(*lp), a)
                    && check(cx.verifier, cx.tp, f, &env, Focus::LoopPreserve(*lp), a)
            });
            changed |= atoms.len() != before;
        }
        if !changed {
            break;
        }
    }
    cands
        .into_iter()
        .flat_map(|(lp, atoms)| {
            atoms.into_iter().map(move |a| AnchoredClause {
                anchor: lp,
                clause: Clause::LoopInvariant(a),
            })
        })
        .collect()
}

fn atoms_of(p: &Pred, out: &mut Vec<Pred>) {
    match p {
        Pred::Cmp(..) => out.push(p.clone()),
        Pred::Not(q) => atoms_of(q, out),
        Pred::And(qs) | Pred::Or(qs) => qs.iter().for_each(|q| atoms_of(q, out)),
        Pred::Implies(a, b) => {
            atoms_of(a, out);
            atoms_of(b, out);
        }
        Pred::True | Pred::False => {}
    }
}

/// `goal` itself, or one of its comparisons when that is equivalent.
fn simplest_equivalent(goal: &Pred, cx: &UnitContext<'_>) -> Pred {
    let mut atoms = Vec::new();
    atoms_of(goal, &mut atoms);
    let cfg = &cx.verifier.discharge;
    for a in atoms {
        let eq = Pred::and([
            Pred::implies(a.clone(), goal.clone()),
            Pred::implies(goal.clone(), a.clone()),
        ]);
        if discharge(&eq, cx.tp.width, cfg).0.is_valid() {
            return a;
        }
    }
    goal.clone()
}

fn host_clauses(cx: &UnitContext<'_>) -> Vec<AnchoredClause> {
    let tp = cx.tp;
    let v = cx.unit;
    let Some(host) = tp.function(&v.host) else { return vec![] };
    let mut out = houdini(cx, host, &v.contracts);
    if tp.entry.as_deref() == Some(v.host.as_str()) {
        return out;
    }
    let env = merge_candidate(tp, &v.contracts, &out);
    let vc = cx.verifier.target_vc(tp, &v.target, &env);
    if valid(&cx.verifier.discharge_vc(vc.clone(), tp.width).status) {
        return out;
    }
    let params: BTreeSet<&str> = host.param_names().collect();
    let goal = vc.goal;
    let over_params = goal
        .syms()
        .iter()
        .all(|s| matches!(s, Sym::Var(x) if params.contains(x.as_str())));
    let satisfiable = !discharge(&Pred::not(goal.clone()), tp.width, &cx.verifier.discharge).0.is_valid();
    if over_params && satisfiable && goal != Pred::True {
        out.push(AnchoredClause {
            anchor: host.id,
            clause: Clause::Requires(simplest_equivalent(&goal, cx)),
        });
    }
    out
}

/// Return paths of a loop- and call-free body as (condition, value) pairs.
fn paths(f: &FunctionDef, tp: &TypedProgram) -> Option<Vec<(Pred, Term)>> {
    #[derive(Clone)]
    struct State {
        store: BTreeMap<Sym, Term>,
        cond: Vec<Pred>,
    }
    fn run(ss: &[Stmt], mut st: State, tp: &TypedProgram, out: &mut Vec<(Pred, Term)>) -> Option<Vec<State>> {
        let mut live = vec![st.clone()];
        for s in ss {
            let mut next = Vec::new();
            for cur in live {
                st = cur;
                next.extend(step(s, st, tp, out)?);
            }
            live = next;
            if out.len() + live.len() > MAX_PATHS {
                return None;
            }
        }
        Some(live)
    }
    fn step(s: &Stmt, mut st: State, tp: &TypedProgram, out: &mut Vec<(Pred, Term)>) -> Option<Vec<State>> {
        let term = |e: &Expr, st: &State| -> Option<Term> {
            (!e.contains_call()).then(|| expr_term(e, tp).substitute(&st.store))
        };
        match &s.kind {
            StmtKind::Decl { name, init: value } | StmtKind::Assign { name, value } => {
                let t = term(value, &st)?;
                st.store.insert(Sym::Var(name.clone()), t);
                Some(vec![st])
            }
            StmtKind::Expr(e) => (!e.contains_call()).then(|| vec![st]),
            StmtKind::Return(Some(e)) => {
                let t = term(e, &st)?;
                out.push((Pred::and(st.cond.iter().cloned()), t));
                Some(vec![])
            }
            StmtKind::Return(None) => Some(vec![]),
            StmtKind::Block(b) => run(b, st, tp, out),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                if cond.contains_call() {
                    return None;
                }
                let c = expr_pred(cond, tp).substitute(&st.store);
                let mut t = st.clone();
                t.cond.push(c.clone());
                let mut e = st;
                e.cond.push(Pred::not(c));
                let mut live = step(then_branch, t, tp, out)?;
                match else_branch {
                    Some(b) => live.extend(step(b, e, tp, out)?),
                    None => live.push(e),
                }
                Some(live)
            }
            StmtKind::While { .. } => None,
        }
    }
    let init = State {
        store: BTreeMap::new(),
        cond: vec![],
    };
    let mut out = Vec::new();
    run(&f.body, init, tp, &mut out)?;
    Some(out)
}

fn symbolic_ensures(f: &FunctionDef, tp: &TypedProgram) -> Vec<Pred> {
    if f.ret != RetType::Int {
        return vec![];
    }
    let Some(ps) = paths(f, tp) else { return vec![] };
    if ps.is_empty() {
        return vec![];
    }
    let eq = |t: &Term| Pred::cmp(CmpOp::Eq, Term::Result, t.clone()).simplify(tp.width);
    if ps.iter().all(|(_, t)| *t == ps[0].1) {
        return vec![eq(&ps[0].1)];
    }
    ps.iter()
        .map(|(c, t)| Pred::implies(c.simplify(tp.width), eq(t)))
        .collect()
}

fn relational_ensures(f: &FunctionDef, cx: &UnitContext<'_>) -> Vec<Pred> {
    if f.ret != RetType::Int {
        return vec![];
    }
    let mut out = Vec::new();
    if let Some(iv) = cx.analysis.returns.get(&f.name) {
        out.extend(bound_atoms(Term::Result, iv.lo(), iv.hi(), cx.tp));
    }
    let r = || Term::Result;
    out.push(le(Term::Const(0), r()));
    out.push(Pred::cmp(CmpOp::Ne, r(), Term::Const(0)));
    for p in f.param_names() {
        let x = Term::var(p);
        out.push(Pred::cmp(CmpOp::Eq, r(), x.clone()));
        out.push(le(x.clone(), r()));
        out.push(le(r(), x));
    }
    out
}

fn callee_clauses(cx: &UnitContext<'_>, callees: &[String]) -> Vec<AnchoredClause> {
    let tp = cx.tp;
    let base = &cx.unit.contracts;
    let mut out = Vec::new();
    for name in callees {
        let Some(f) = tp.function(name) else { continue };
        let loops = houdini(cx, f, base);
        let env = merge_candidate(tp, base, &loops);
        out.extend(loops);
        let known = env.contract(name).ensures;
        let mut cands = symbolic_ensures(f, tp);
        cands.extend(relational_ensures(f, cx));
        let mut seen = BTreeSet::new();
        for p in cands {
            if known.contains(&p) || !seen.insert(p.clone()) {
                continue;
            }
            let vc = cx.verifier.ensures_vc(tp, f, &env, "oracle", Some((1, &p)));
            if valid(&cx.verifier.discharge_vc(vc, tp.width).status) {
                out.push(AnchoredClause {
                    anchor: f.id,
                    clause: Clause::Ensures(p),
                });
            }
        }
    }
    out
}
