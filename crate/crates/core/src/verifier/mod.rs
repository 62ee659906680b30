//! Modular weakest-precondition verifier.
//!
//! Calls are always summarized by the callee's contract. A function's own
//! requires are hypotheses of its conditions; at call sites they become
//! obligations instantiated with the actual arguments.

pub mod discharge;
pub mod linear;
pub mod smt;
pub mod wp;

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::absint::{RteAssertion, RteKind};
use crate::callgraph::VUnit;
use crate::frontend::{FunctionDef, IntWidth, NodeId, StmtKind, TypedProgram};
use crate::specs::{AnchoredClause, Clause, ContractEnv, Pred, Sym};

pub use discharge::{discharge, falsifies, DischargeConfig, Tier};
pub use smt::SmtSolver;
pub use wp::{havoc_symbol, is_call_result, is_havoc, ret_symbol, Focus, Wp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VcKind {
    Target,
    LoopInit,
    LoopPreserve,
    Ensures,
    CallSite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationCondition {
    pub id: String,
    pub kind: VcKind,
    /// Function whose body the condition is about.
    pub function: String,
    pub origin: NodeId,
    pub description: String,
    pub hypothesis: Pred,
    pub goal: Pred,
    /// Loops on the path that had no invariant; `\true` was used.
    pub missing_invariants: Vec<NodeId>,
}

impl VerificationCondition {
    pub fn formula(&self) -> Pred {
        Pred::implies(self.hypothesis.clone(), self.goal.clone())
    }

    /// Symbols introduced for call results or loop iterations.
    pub fn has_auxiliary_symbols(&self) -> bool {
        self.formula().vars().iter().any(|v| is_call_result(v) || is_havoc(v))
    }

    pub fn mentions_call_result(&self) -> bool {
        self.formula().vars().iter().any(|v| is_call_result(v))
    }
}

impl fmt::Display for VerificationCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.id, self.description, self.formula())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum VcStatus {
    Valid,
    Invalid { witness: BTreeMap<String, i128> },
    Unknown { reason: String },
}

impl VcStatus {
    pub fn is_valid(&self) -> bool {
        matches!(self, VcStatus::Valid)
    }

    pub fn name(&self) -> &'static str {
        match self {
            VcStatus::Valid => "valid",
            VcStatus::Invalid { .. } => "invalid",
            VcStatus::Unknown { .. } => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VcReport {
    pub vc: VerificationCondition,
    pub status: VcStatus,
    pub tier: Tier,
}

impl VcReport {
    /// An Invalid outcome that reflects a real execution: the formula is
    /// closed, or its witness binds only parameters of an entry function.
    pub fn is_definitive(&self, tp: &TypedProgram, roots: &[String]) -> bool {
        let VcStatus::Invalid { witness } = &self.status else {
            return false;
        };
        if witness.is_empty() && self.vc.formula().syms().is_empty() {
            return true;
        }
        if !roots.contains(&self.vc.function) || self.vc.has_auxiliary_symbols() {
            return false;
        }
        let Some(f) = tp.function(&self.vc.function) else {
            return false;
        };
        let params: BTreeSet<&str> = f.param_names().collect();
        self.vc
            .formula()
            .syms()
            .iter()
            .all(|s| matches!(s, Sym::Var(v) if params.contains(v.as_str())))
    }
}

/// Outcome of verifying a unit with a candidate: the target first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitOutcome {
    pub vcs: Vec<VcReport>,
}

impl UnitOutcome {
    pub fn target(&self) -> &VcReport {
        self.vcs
            .iter()
            .find(|r| r.vc.kind == VcKind::Target || r.vc.kind == VcKind::CallSite)
            .expect("unit outcome has a target")
    }

    pub fn all_valid(&self) -> bool {
        self.vcs.iter().all(|r| r.status.is_valid())
    }

    pub fn failures(&self) -> impl Iterator<Item = &VcReport> {
        self.vcs.iter().filter(|r| !r.status.is_valid())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verifier {
    pub discharge: DischargeConfig,
    #[serde(skip)]
    memo: Memo,
}

/// Decided formulas of this verifier. Discharge is deterministic, so a
/// repeated formula gets the stored answer.
#[derive(Clone, Default)]
struct Memo(RefCell<HashMap<(Pred, IntWidth), (VcStatus, Tier)>>);

impl fmt::Debug for Memo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Memo({} entries)", self.0.borrow().len())
    }
}

impl PartialEq for Memo {
    fn eq(&self, _: &Memo) -> bool {
        true
    }
}

impl Eq for Memo {}

/// Function name for each function node id.
pub fn function_ids(tp: &TypedProgram) -> BTreeMap<NodeId, String> {
    tp.functions().iter().map(|f| (f.id, f.name.clone())).collect()
}

/// Contracts and loop clauses of `base` extended with `candidate`.
/// Assertions in the candidate are ignored.
pub fn merge_candidate(tp: &TypedProgram, base: &ContractEnv, candidate: &[AnchoredClause]) -> ContractEnv {
    let ids = function_ids(tp);
    let mut env = base.clone();
    for c in candidate {
        match &c.clause {
            Clause::Requires(p) | Clause::Ensures(p) => {
                let Some(name) = ids.get(&c.anchor) else { continue };
                let contract = env.functions.entry(name.clone()).or_default();
                let list = if matches!(c.clause, Clause::Requires(_)) {
                    &mut contract.requires
                } else {
                    &mut contract.ensures
                };
                if !list.contains(p) {
                    list.push(p.clone());
                }
            }
            Clause::LoopInvariant(p) => {
                let spec = env.loops.entry(c.anchor).or_default();
                if !spec.invariants.contains(p) {
                    spec.invariants.push(p.clone());
                }
            }
            Clause::LoopAssigns(vs) => env.loops.entry(c.anchor).or_default().assigns = Some(vs.clone()),
            Clause::Assert { .. } => {}
        }
    }
    env
}

/// While loops of a function, in pre-order.
pub fn loops_of(f: &FunctionDef) -> Vec<NodeId> {
    let mut out = Vec::new();
    for s in &f.body {
        s.walk(&mut |st| {
            if matches!(st.kind, StmtKind::While { .. }) {
                out.push(st.id);
            }
        });
    }
    out
}

impl Verifier {
    pub fn new(discharge: DischargeConfig) -> Verifier {
        Verifier {
            discharge,
            memo: Memo::default(),
        }
    }

    /// Condition for one obligation in `f` under `env`.
    #[allow(clippy::too_many_arguments)]
    pub fn vc(
        &self,
        tp: &TypedProgram,
        f: &FunctionDef,
        env: &ContractEnv,
        focus: Focus,
        id: String,
        kind: VcKind,
        origin: NodeId,
        description: String,
        goal: Option<Pred>,
    ) -> VerificationCondition {
        let mut wp = Wp::new(tp, env, focus);
        wp.goal = goal;
        let goal = wp.function(f);
        VerificationCondition {
            id,
            kind,
            function: f.name.clone(),
            origin,
            description,
            hypothesis: env.contract(&f.name).pre().simplify(tp.width),
            goal,
            missing_invariants: wp.missing_invariants.into_inner().into_iter().collect(),
        }
    }

    /// The condition for an assertion: its guard for UB kinds, the callee's
    /// instantiated requires for call sites.
    pub fn target_vc(&self, tp: &TypedProgram, a: &RteAssertion, env: &ContractEnv) -> VerificationCondition {
        let f = tp.function(&a.host).expect("assertion host exists");
        match a.kind {
            RteKind::CallSitePrecondition => {
                let callee = match tp.find_expr(a.node).map(|e| &e.kind) {
                    Some(crate::frontend::ExprKind::Call { callee, .. }) => callee.clone(),
                    _ => "?".to_string(),
                };
                self.vc(
                    tp,
                    f,
                    env,
                    Focus::CallPre(a.node),
                    format!("{}/call-site", a.id),
                    VcKind::CallSite,
                    a.node,
                    format!("call-site precondition of {callee} at {}", a.loc),
                    None,
                )
            }
            kind => {
                let what = match kind {
                    RteKind::DivByZero => "division-by-zero guard",
                    _ => "overflow guard",
                };
                self.vc(
                    tp,
                    f,
                    env,
                    Focus::Guard { node: a.node, kind },
                    format!("{}/target", a.id),
                    VcKind::Target,
                    a.node,
                    format!("{what} `{}` at {}", a.predicate, a.loc),
                    None,
                )
            }
        }
    }

    /// Invariant establishment and preservation for the loops of `f` that
    /// carry invariants.
    pub fn loop_vcs(&self, tp: &TypedProgram, f: &FunctionDef, env: &ContractEnv, prefix: &str) -> Vec<VerificationCondition> {
        let mut out = Vec::new();
        for lp in loops_of(f) {
            if env.loop_spec(lp).invariants.is_empty() {
                continue;
            }
            out.push(self.vc(
                tp,
                f,
                env,
                Focus::LoopInit(lp),
                format!("{prefix}/loop-init-{lp}"),
                VcKind::LoopInit,
                lp,
                format!("loop invariant of {lp} in {} holds initially", f.name),
                None,
            ));
            out.push(self.vc(
                tp,
                f,
                env,
                Focus::LoopPreserve(lp),
                format!("{prefix}/loop-preserve-{lp}"),
                VcKind::LoopPreserve,
                lp,
                format!("loop invariant of {lp} in {} is preserved", f.name),
                None,
            ));
        }
        out
    }

    /// Establishment of all ensures of `f`, or only of `clause`.
    pub fn ensures_vc(
        &self,
        tp: &TypedProgram,
        f: &FunctionDef,
        env: &ContractEnv,
        prefix: &str,
        clause: Option<(usize, &Pred)>,
    ) -> VerificationCondition {
        let (id, description) = match clause {
            Some((k, p)) => (format!("{prefix}/ensures-{}-{k}", f.name), format!("ensures `{p}` of {}", f.name)),
            None => (format!("{prefix}/ensures-{}", f.name), format!("ensures of {}", f.name)),
        };
        self.vc(
            tp,
            f,
            env,
            Focus::Ensures,
            id,
            VcKind::Ensures,
            f.id,
            description,
            clause.map(|(_, p)| p.clone()),
        )
    }

    /// Conditions of a unit under `candidate`: the target, then loop
    /// invariants of the host, then ensures and loop invariants of every
    /// function the candidate gives an ensures or loop clause.
    pub fn gen_vcs(&self, tp: &TypedProgram, v: &VUnit, candidate: &[AnchoredClause]) -> Vec<VerificationCondition> {
        let env = merge_candidate(tp, &v.contracts, candidate);
        let prefix = v.target.id.to_string();
        let mut out = vec![self.target_vc(tp, &v.target, &env)];
        let host = tp.function(&v.host).expect("host exists");
        out.extend(self.loop_vcs(tp, host, &env, &prefix));

        let ids = function_ids(tp);
        let mut touched: Vec<&str> = Vec::new();
        for c in candidate {
            let owner = match &c.clause {
                Clause::Ensures(_) => ids.get(&c.anchor).map(String::as_str),
                Clause::LoopInvariant(_) | Clause::LoopAssigns(_) => tp.host_of(c.anchor).map(|f| f.name.as_str()),
                _ => None,
            };
            if let Some(o) = owner {
                if !touched.contains(&o) {
                    touched.push(o);
                }
            }
        }
        for name in touched {
            let f = tp.function(name).expect("known function");
            let ensures = candidate.iter().filter_map(|c| match &c.clause {
                Clause::Ensures(p) if ids.get(&c.anchor).map(String::as_str) == Some(name) => Some(p),
                _ => None,
            });
            for (k, p) in ensures.enumerate() {
                out.push(self.ensures_vc(tp, f, &env, &prefix, Some((k + 1, p))));
            }
            if name != v.host {
                out.extend(self.loop_vcs(tp, f, &env, &prefix));
            }
        }
        out
    }

    pub fn discharge_vc(&self, vc: VerificationCondition, width: IntWidth) -> VcReport {
        let formula = vc.formula();
        let key = (formula, width);
        let cached = self.memo.0.borrow().get(&key).cloned();
        let (status, tier) = cached.unwrap_or_else(|| {
            let r = discharge(&key.0, width, &self.discharge);
            self.memo.0.borrow_mut().insert(key, r.clone());
            r
        });
        debug_assert!(
            match &status {
                VcStatus::Invalid { witness } => falsifies(&vc.formula(), width, witness),
                _ => true,
            },
            "witness must falsify {vc}"
        );
        VcReport { vc, status, tier }
    }

    pub fn verify_unit(&self, tp: &TypedProgram, v: &VUnit, candidate: &[AnchoredClause]) -> UnitOutcome {
        UnitOutcome {
            vcs: self
                .gen_vcs(tp, v, candidate)
                .into_iter()
                .map(|vc| self.discharge_vc(vc, tp.width))
                .collect(),
        }
    }

    /// The callee's requires, instantiated at the call site, under the
    /// caller's requires.
    pub fn check_callsite(&self, tp: &TypedProgram, a: &RteAssertion, contracts: &ContractEnv) -> VcReport {
        debug_assert_eq!(a.kind, RteKind::CallSitePrecondition);
        self.discharge_vc(self.target_vc(tp, a, contracts), tp.width)
    }
}
