//! Two-phase specification synthesis over the unit queue.
//!
//! Each unit first asks the generator for host-side clauses (requires and
//! loop clauses of the host). When the target still fails because it
//! depends on values returned by callees, a second phase asks for callee
//! ensures; requires for callees are stripped in that phase. Every
//! candidate is checked by the verifier and refined with its feedback
//! until it verifies or the iteration budget runs out.

pub mod oracle;
pub mod prompt;
pub mod store;

#[cfg(feature = "llm")]
pub mod llm;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::absint::{AnalysisResult, AssertionId, RteKind};
use crate::callgraph::VUnit;
use crate::frontend::{walk_exprs, ExprKind, TypedProgram};
use crate::specs::{AnchoredClause, Clause, ContractEnv};
use crate::verifier::{loops_of, UnitOutcome, VcReport, VcStatus, Verifier};

pub use oracle::OracleGenerator;
pub use store::{ContractStore, StoreAction, StoreEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Host,
    Callees,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    /// Generator calls allowed per phase.
    pub max_iters: u32,
    pub continue_on_alert: bool,
    pub save_transcripts: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            max_iters: 5,
            continue_on_alert: false,
            save_transcripts: false,
        }
    }
}

/// One verification condition as shown to the generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VcFeedback {
    pub id: String,
    pub origin: String,
    pub formula: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<BTreeMap<String, i128>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl VcFeedback {
    pub fn from_report(r: &VcReport) -> VcFeedback {
        let (witness, reason) = match &r.status {
            VcStatus::Invalid { witness } => (Some(witness.clone()), None),
            VcStatus::Unknown { reason } => (None, Some(reason.clone())),
            VcStatus::Valid => (None, None),
        };
        VcFeedback {
            id: r.vc.id.clone(),
            origin: r.vc.description.clone(),
            formula: r.vc.formula().to_string(),
            status: r.status.name().to_string(),
            witness,
            reason,
        }
    }
}

/// What one attempt proposed and how the verifier judged it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeedbackEntry {
    pub phase: Phase,
    pub attempt: u32,
    /// Candidate clauses as `[function] clause` or `[function#k] clause` lines.
    pub candidate: Vec<String>,
    pub outcomes: Vec<VcFeedback>,
    pub messages: Vec<String>,
    /// Candidate lines whose own condition failed.
    pub rejected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratorRequest {
    pub phase: Phase,
    pub unit: AssertionId,
    pub host: String,
    /// Functions whose ensures may be proposed in the callee phase.
    pub callees: Vec<String>,
    /// The target assertion as text.
    pub target: String,
    /// Slice source with current contracts and the target annotated.
    pub source: String,
    pub feedback: Vec<FeedbackEntry>,
    pub attempt: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt: u64,
    pub completion: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GeneratorResponse {
    pub clauses: Vec<AnchoredClause>,
    pub raw: String,
    pub notes: Vec<String>,
    pub usage: Option<TokenUsage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("generator-unavailable: {0}")]
    Unavailable(String),
}

/// Structured access to the unit for generators that reason about the
/// program directly.
pub struct UnitContext<'a> {
    pub tp: &'a TypedProgram,
    pub unit: &'a VUnit,
    pub analysis: &'a AnalysisResult,
    pub verifier: &'a Verifier,
}

pub trait Generator {
    fn id(&self) -> String;
    fn generate(&mut self, req: &GeneratorRequest, cx: &UnitContext<'_>) -> Result<GeneratorResponse, GeneratorError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Certified,
    #[serde(rename = "DefinitiveRTE")]
    DefinitiveRte,
    HighRiskAlert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Iterations {
    pub host: u32,
    pub callees: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VcSummary {
    pub id: String,
    pub status: String,
    pub tier: crate::verifier::Tier,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssertionVerdict {
    pub assertion: AssertionId,
    pub kind: RteKind,
    pub host: String,
    pub line: u32,
    pub column: u32,
    pub predicate: String,
    pub verdict: Verdict,
    /// Last phase entered; absent when no synthesis was needed.
    pub phase: Option<Phase>,
    pub iterations: Iterations,
    /// Clauses accepted into the store by this unit.
    pub accepted: Vec<String>,
    /// Conditions of the final check.
    pub vcs: Vec<VcSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<BTreeMap<String, i128>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub last_feedback: Option<FeedbackEntry>,
    /// Call-site assertions that must hold for an accepted host requires.
    pub provisional_on: Vec<AssertionId>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranscriptDigest {
    pub unit: AssertionId,
    pub phase: Phase,
    pub attempt: u32,
    pub request_sha256: String,
    pub response_sha256: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub unit: AssertionId,
    pub phase: Phase,
    pub attempt: u32,
    pub request: String,
    pub response: String,
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub verdicts: Vec<AssertionVerdict>,
    pub contracts: ContractEnv,
    pub store_events: Vec<StoreEvent>,
    pub generator: String,
    pub generator_calls: u32,
    pub digests: Vec<TranscriptDigest>,
    pub transcripts: Vec<Transcript>,
    /// Units left unprocessed after an alert stopped the run.
    pub unprocessed: Vec<AssertionId>,
}

impl PipelineReport {
    pub fn verdict(&self, id: &AssertionId) -> Option<&AssertionVerdict> {
        self.verdicts.iter().find(|v| &v.assertion == id)
    }

    pub fn all_certified(&self) -> bool {
        self.unprocessed.is_empty() && self.verdicts.iter().all(|v| v.verdict == Verdict::Certified)
    }
}

fn sha256_hex(s: &str) -> String {
    let digest = Sha256::digest(s.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn words(s: &str) -> u64 {
    s.split_whitespace().count() as u64
}

/// `[f] clause` for function clauses, `[f#k] clause` for loop clauses.
pub fn clause_line(tp: &TypedProgram, c: &AnchoredClause) -> String {
    let owner = store::owner(tp, c.anchor);
    if c.clause.is_loop_clause() {
        let k = tp
            .function(&owner)
            .and_then(|f| loops_of(f).iter().position(|l| *l == c.anchor))
            .map_or(0, |i| i + 1);
        format!("[{owner}#{k}] {}", c.clause)
    } else {
        format!("[{owner}] {}", c.clause)
    }
}

enum PhaseEnd {
    Success {
        kept: Vec<AnchoredClause>,
        dropped: Vec<AnchoredClause>,
        outcome: UnitOutcome,
    },
    NeedsCallees,
    Exhausted,
}

struct Runner<'a, G: Generator + ?Sized> {
    tp: &'a TypedProgram,
    analysis: &'a AnalysisResult,
    verifier: &'a Verifier,
    gen: &'a mut G,
    cfg: SynthesisConfig,
    calls: u32,
    digests: Vec<TranscriptDigest>,
    transcripts: Vec<Transcript>,
}

impl<G: Generator + ?Sized> Runner<'_, G> {
    fn is_entry(&self, f: &str) -> bool {
        self.tp.entry.as_deref() == Some(f)
    }

    fn entries(&self) -> Vec<String> {
        self.tp.entry.iter().cloned().collect()
    }

    /// Keep only the clauses a phase may propose; explain the rest.
    fn filter(&self, v: &VUnit, phase: Phase, clauses: Vec<AnchoredClause>, notes: &mut Vec<String>) -> Vec<AnchoredClause> {
        let mut out = Vec::new();
        for c in clauses {
            let owner = store::owner(self.tp, c.anchor);
            let line = clause_line(self.tp, &c);
            let keep = match (&c.clause, phase) {
                (Clause::Assert { .. }, _) => {
                    notes.push(format!("assert clauses are not accepted: {line}"));
                    false
                }
                (Clause::Requires(_), Phase::Callees) => {
                    notes.push(format!("prohibited in the callee phase, stripped: {line}"));
                    false
                }
                (Clause::Requires(_), Phase::Host) if self.is_entry(&owner) => {
                    notes.push(format!("the entry function takes no requires, stripped: {line}"));
                    false
                }
                (_, Phase::Host) if owner != v.host => {
                    notes.push(format!("outside the host `{}`, dropped: {line}", v.host));
                    false
                }
                (Clause::Ensures(_), Phase::Callees) if !v.callees().contains(&owner) => {
                    notes.push(format!("not a callee of this unit, dropped: {line}"));
                    false
                }
                (_, Phase::Callees) if c.clause.is_loop_clause() && !v.callees().contains(&owner) => {
                    notes.push(format!("loop clause outside the callees, dropped: {line}"));
                    false
                }
                (Clause::Ensures(_), _) if !c.clause.pred().is_some_and(|p| p.vars().iter().all(|x| param_of(self.tp, &owner, x))) => {
                    notes.push(format!("ensures may only mention parameters and \\result, dropped: {line}"));
                    false
                }
                _ => true,
            };
            if keep && !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }

    /// Candidate lines whose own ensures or loop conditions failed.
    fn rejected(&self, v: &VUnit, candidate: &[AnchoredClause], outcome: &UnitOutcome) -> Vec<String> {
        let prefix = v.target.id.to_string();
        let failed: Vec<&str> = outcome.failures().map(|r| r.vc.id.as_str()).collect();
        let mut counters: BTreeMap<String, usize> = BTreeMap::new();
        let mut out = Vec::new();
        for c in candidate {
            let owner = store::owner(self.tp, c.anchor);
            let ids: Vec<String> = match &c.clause {
                Clause::Ensures(_) => {
                    let k = counters.entry(owner.clone()).or_default();
                    *k += 1;
                    vec![format!("{prefix}/ensures-{owner}-{k}")]
                }
                Clause::LoopInvariant(_) => vec![
                    format!("{prefix}/loop-init-{}", c.anchor),
                    format!("{prefix}/loop-preserve-{}", c.anchor),
                ],
                _ => vec![],
            };
            if ids.iter().any(|id| failed.contains(&id.as_str())) {
                out.push(clause_line(self.tp, c));
            }
        }
        out
    }

    /// Drop clauses one at a time, latest first, while every condition
    /// stays valid.
    fn minimize(&self, v: &VUnit, clauses: Vec<AnchoredClause>, outcome: UnitOutcome) -> (Vec<AnchoredClause>, Vec<AnchoredClause>, UnitOutcome) {
        let mut kept = clauses;
        let mut dropped = Vec::new();
        let mut best = outcome;
        for i in (0..kept.len()).rev() {
            let mut trial = kept.clone();
            let c = trial.remove(i);
            let o = self.verifier.verify_unit(self.tp, v, &trial);
            if o.all_valid() {
                dropped.push(c);
                kept = trial;
                best = o;
            }
        }
        dropped.reverse();
        (kept, dropped, best)
    }

    #[allow(clippy::too_many_arguments)]
    fn phase(
        &mut self,
        v: &VUnit,
        phase: Phase,
        carry: &[AnchoredClause],
        feedback: &mut Vec<FeedbackEntry>,
        iterations: &mut u32,
        last: &mut Option<(Vec<AnchoredClause>, UnitOutcome)>,
    ) -> Result<PhaseEnd, GeneratorError> {
        let callees = v.callees().to_vec();
        for attempt in 1..=self.cfg.max_iters {
            *iterations = attempt;
            let req = GeneratorRequest {
                phase,
                unit: v.target.id.clone(),
                host: v.host.clone(),
                callees: if phase == Phase::Callees { callees.clone() } else { vec![] },
                target: prompt::target_text(self.tp, &v.target, &v.contracts),
                source: prompt::unit_source(self.tp, v),
                feedback: feedback.clone(),
                attempt,
            };
            let cx = UnitContext {
                tp: self.tp,
                unit: v,
                analysis: self.analysis,
                verifier: self.verifier,
            };
            let resp = self.gen.generate(&req, &cx)?;
            self.calls += 1;
            let request_text = prompt::render_prompt(&req);
            let usage = resp.usage.unwrap_or(TokenUsage {
                prompt: words(&request_text),
                completion: words(&resp.raw),
            });
            self.digests.push(TranscriptDigest {
                unit: v.target.id.clone(),
                phase,
                attempt,
                request_sha256: sha256_hex(&request_text),
                response_sha256: sha256_hex(&resp.raw),
                prompt_tokens: usage.prompt,
                completion_tokens: usage.completion,
            });
            if self.cfg.save_transcripts {
                self.transcripts.push(Transcript {
                    unit: v.target.id.clone(),
                    phase,
                    attempt,
                    request: request_text,
                    response: resp.raw.clone(),
                });
            }

            let mut messages = resp.notes.clone();
            let proposed = self.filter(v, phase, resp.clauses, &mut messages);
            if proposed.is_empty() {
                messages.push("response-parse-empty: no usable clause".into());
            }
            let mut candidate = carry.to_vec();
            for c in proposed {
                if !candidate.contains(&c) {
                    candidate.push(c);
                }
            }
            let outcome = self.verifier.verify_unit(self.tp, v, &candidate);
            for r in &outcome.vcs {
                for lp in &r.vc.missing_invariants {
                    let m = format!("loop {lp} in {} has no invariant; \\true was assumed", r.vc.function);
                    if !messages.contains(&m) {
                        messages.push(m);
                    }
                }
            }
            if outcome.all_valid() {
                let (kept, dropped, outcome) = self.minimize(v, candidate, outcome);
                return Ok(PhaseEnd::Success { kept, dropped, outcome });
            }
            let rejected = self.rejected(v, &candidate, &outcome);
            feedback.push(FeedbackEntry {
                phase,
                attempt,
                candidate: candidate.iter().map(|c| clause_line(self.tp, c)).collect(),
                outcomes: outcome.vcs.iter().map(VcFeedback::from_report).collect(),
                messages,
                rejected,
            });
            let needs_callees = phase == Phase::Host && outcome.target().vc.mentions_call_result() && !callees.is_empty();
            *last = Some((candidate, outcome));
            if needs_callees {
                return Ok(PhaseEnd::NeedsCallees);
            }
        }
        Ok(PhaseEnd::Exhausted)
    }
}

fn param_of(tp: &TypedProgram, f: &str, v: &str) -> bool {
    tp.function(f).is_some_and(|f| f.param_names().any(|p| p == v))
}

/// Call-site assertions at calls to `f` in analyzed functions.
fn call_sites_of(tp: &TypedProgram, analysis: &AnalysisResult, f: &str) -> Vec<AssertionId> {
    let mut out = Vec::new();
    for g in tp.functions().iter().filter(|g| analysis.reachable.contains(&g.name)) {
        walk_exprs(&g.body, &mut |_, e| {
            if let ExprKind::Call { callee, .. } = &e.kind {
                if callee == f {
                    out.push(AssertionId::new(RteKind::CallSitePrecondition, e.id));
                }
            }
        });
    }
    out
}

fn summaries(o: &UnitOutcome) -> Vec<VcSummary> {
    o.vcs
        .iter()
        .map(|r| VcSummary {
            id: r.vc.id.clone(),
            status: r.status.name().to_string(),
            tier: r.tier,
        })
        .collect()
}

/// Process units in order. Contracts accepted by a unit are visible to
/// every later unit.
pub fn process_queue<G: Generator + ?Sized>(
    tp: &TypedProgram,
    analysis: &AnalysisResult,
    queue: &[VUnit],
    gen: &mut G,
    verifier: &Verifier,
    cfg: &SynthesisConfig,
    initial: ContractEnv,
) -> Result<PipelineReport, GeneratorError> {
    assert!(cfg.max_iters >= 1, "max_iters must be at least 1");
    let mut store = ContractStore::new(initial);
    let generator = gen.id();
    let mut r = Runner {
        tp,
        analysis,
        verifier,
        gen,
        cfg: *cfg,
        calls: 0,
        digests: Vec::new(),
        transcripts: Vec::new(),
    };
    let mut verdicts = Vec::new();
    let mut unprocessed = Vec::new();
    let mut stopped = false;
    for unit in queue {
        if stopped {
            unprocessed.push(unit.target.id.clone());
            continue;
        }
        let mut v = unit.clone();
        v.contracts = store.env().clone();
        let verdict = run_unit(&mut r, &mut store, &v)?;
        if verdict.verdict == Verdict::HighRiskAlert && !cfg.continue_on_alert {
            stopped = true;
        }
        verdicts.push(verdict);
    }
    Ok(PipelineReport {
        verdicts,
        contracts: store.env().clone(),
        store_events: store.events().to_vec(),
        generator,
        generator_calls: r.calls,
        digests: r.digests,
        transcripts: r.transcripts,
        unprocessed,
    })
}

fn run_unit<G: Generator + ?Sized>(r: &mut Runner<'_, G>, store: &mut ContractStore, v: &VUnit) -> Result<AssertionVerdict, GeneratorError> {
    let tp = r.tp;
    let a = &v.target;
    let mut out = AssertionVerdict {
        assertion: a.id.clone(),
        kind: a.kind,
        host: a.host.clone(),
        line: a.loc.line,
        column: a.loc.column,
        predicate: prompt::target_predicate(tp, a, &v.contracts).to_string(),
        verdict: Verdict::HighRiskAlert,
        phase: None,
        iterations: Iterations::default(),
        accepted: vec![],
        vcs: vec![],
        witness: None,
        last_feedback: None,
        provisional_on: vec![],
        notes: vec![],
    };

    let bare = r.verifier.verify_unit(tp, v, &[]);
    out.vcs = summaries(&bare);
    if bare.all_valid() {
        out.verdict = Verdict::Certified;
        return Ok(out);
    }
    let target = bare.target();
    if target.is_definitive(tp, &r.entries()) {
        out.verdict = Verdict::DefinitiveRte;
        if let VcStatus::Invalid { witness } = &target.status {
            out.witness = Some(witness.clone());
        }
        return Ok(out);
    }

    let mut feedback = Vec::new();
    let mut last = None;
    out.phase = Some(Phase::Host);
    let host_end = r.phase(v, Phase::Host, &[], &mut feedback, &mut out.iterations.host, &mut last)?;
    let end = match host_end {
        PhaseEnd::NeedsCallees => {
            out.phase = Some(Phase::Callees);
            // Host loop clauses whose own conditions held are carried over.
            let carry: Vec<AnchoredClause> = match &last {
                Some((cand, outcome)) => {
                    let rejected = r.rejected(v, cand, outcome);
                    cand.iter()
                        .filter(|c| c.clause.is_loop_clause() && !rejected.contains(&clause_line(tp, c)))
                        .cloned()
                        .collect()
                }
                None => vec![],
            };
            r.phase(v, Phase::Callees, &carry, &mut feedback, &mut out.iterations.callees, &mut last)?
        }
        e => e,
    };

    match end {
        PhaseEnd::Success { kept, dropped, outcome } => {
            if out.phase == Some(Phase::Callees) {
                store.enter_callee_phase(v.callees());
            }
            store.add(tp, &a.id, &kept, StoreAction::Accepted);
            store.log_not_retained(tp, &a.id, &dropped);
            store.leave_callee_phase();
            out.accepted = kept.iter().map(|c| clause_line(tp, c)).collect();
            if kept.iter().any(|c| matches!(c.clause, Clause::Requires(_))) {
                out.provisional_on = call_sites_of(tp, r.analysis, &v.host);
            }
            out.vcs = summaries(&outcome);
            out.verdict = Verdict::Certified;
        }
        PhaseEnd::NeedsCallees | PhaseEnd::Exhausted => {
            out.verdict = Verdict::HighRiskAlert;
            if let Some((cand, outcome)) = &last {
                out.vcs = summaries(outcome);
                // Verified callee ensures stay in the store.
                if out.phase == Some(Phase::Callees) {
                    let rejected = r.rejected(v, cand, outcome);
                    let keep: Vec<AnchoredClause> = cand
                        .iter()
                        .filter(|c| matches!(c.clause, Clause::Ensures(_)) && !rejected.contains(&clause_line(tp, c)))
                        .filter(|c| v.callees().contains(&store::owner(tp, c.anchor)))
                        .cloned()
                        .collect();
                    if !keep.is_empty() {
                        store.enter_callee_phase(v.callees());
                        store.add(tp, &a.id, &keep, StoreAction::KeptAfterAlert);
                        store.leave_callee_phase();
                        out.notes.push(format!("{} verified callee ensures kept after the alert", keep.len()));
                    }
                }
            }
            out.last_feedback = feedback.last().cloned();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
