//! The JSON report document and the annotated-source views.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::absint::{AssertionId, RteKind, Status};
use crate::callgraph::{queue_entries, QueueEntry};
use crate::frontend::{render_with, NodeId, RenderOptions, TypedProgram};
use crate::pipeline::Prepared;
use crate::specs::{Clause, ContractEnv};
use crate::synthesis::{AssertionVerdict, PipelineReport, StoreEvent, Transcript, TranscriptDigest, Verdict};
use crate::verifier::{function_ids, loops_of};

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: "preguss".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigEcho {
    pub width: u32,
    pub generator: String,
    pub max_iters: u32,
    pub dump_queue: bool,
    pub continue_on_alert: bool,
    pub dependency_filter: bool,
    pub save_transcripts: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Timing {
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub tool: ToolInfo,
    /// `analyze` or `run`.
    pub command: String,
    /// RFC 3339; absent when the caller has no clock.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
    pub config: ConfigEcho,
    pub programs: Vec<ProgramReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KindCount {
    pub kind: RteKind,
    pub status: Status,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisSummary {
    pub counts: Vec<KindCount>,
    pub alarms: usize,
    pub proven: usize,
    pub roots: Vec<String>,
    pub reachable: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssertionEntry {
    pub id: AssertionId,
    pub kind: RteKind,
    pub host: String,
    pub line: u32,
    pub column: u32,
    pub predicate: String,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FunctionContracts {
    pub function: String,
    pub requires: Vec<String>,
    pub ensures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopContracts {
    pub function: String,
    /// `f#k`, the k-th loop of `f` in source order.
    pub label: String,
    pub node: NodeId,
    pub invariants: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerdictCounts {
    pub certified: usize,
    pub definitive_rte: usize,
    pub high_risk_alert: usize,
    pub unprocessed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SynthesisSection {
    pub generator: String,
    pub generator_calls: u32,
    pub summary: VerdictCounts,
    pub verdicts: Vec<AssertionVerdict>,
    pub unprocessed: Vec<AssertionId>,
    pub contracts: Vec<FunctionContracts>,
    pub loops: Vec<LoopContracts>,
    pub store_events: Vec<StoreEvent>,
    pub transcript_digests: Vec<TranscriptDigest>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub transcripts: Vec<Transcript>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProgramReport {
    pub path: String,
    pub sha256: String,
    pub width: u32,
    pub entry: Option<String>,
    pub analysis: AnalysisSummary,
    pub assertions: Vec<AssertionEntry>,
    pub queue_order: Vec<AssertionId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub queue: Option<Vec<QueueEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthesis: Option<SynthesisSection>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn analysis_summary(p: &Prepared) -> AnalysisSummary {
    let mut counts: BTreeMap<(RteKind, Status), usize> = BTreeMap::new();
    for a in &p.assertions {
        *counts.entry((a.kind, a.status)).or_default() += 1;
    }
    AnalysisSummary {
        counts: counts
            .into_iter()
            .map(|((kind, status), count)| KindCount { kind, status, count })
            .collect(),
        alarms: p.analysis.assertions.iter().filter(|a| a.status == Status::Alarm).count(),
        proven: p.analysis.assertions.iter().filter(|a| a.status == Status::Proven).count(),
        roots: p.analysis.roots.clone(),
        reachable: p.analysis.reachable.iter().cloned().collect(),
    }
}

pub fn contract_lists(tp: &TypedProgram, env: &ContractEnv) -> (Vec<FunctionContracts>, Vec<LoopContracts>) {
    let mut fns = Vec::new();
    let mut loops = Vec::new();
    for f in tp.functions() {
        let c = env.contract(&f.name);
        if !c.is_empty() {
            fns.push(FunctionContracts {
                function: f.name.clone(),
                requires: c.requires.iter().map(ToString::to_string).collect(),
                ensures: c.ensures.iter().map(ToString::to_string).collect(),
            });
        }
        for (k, lp) in loops_of(f).into_iter().enumerate() {
            let spec = env.loop_spec(lp);
            if !spec.invariants.is_empty() {
                loops.push(LoopContracts {
                    function: f.name.clone(),
                    label: format!("{}#{}", f.name, k + 1),
                    node: lp,
                    invariants: spec.invariants.iter().map(ToString::to_string).collect(),
                });
            }
        }
    }
    (fns, loops)
}

pub fn synthesis_section(p: &Prepared, r: &PipelineReport) -> SynthesisSection {
    let (contracts, loops) = contract_lists(&p.tp, &r.contracts);
    let count = |v: Verdict| r.verdicts.iter().filter(|x| x.verdict == v).count();
    SynthesisSection {
        generator: r.generator.clone(),
        generator_calls: r.generator_calls,
        summary: VerdictCounts {
            certified: count(Verdict::Certified),
            definitive_rte: count(Verdict::DefinitiveRte),
            high_risk_alert: count(Verdict::HighRiskAlert),
            unprocessed: r.unprocessed.len(),
        },
        verdicts: r.verdicts.clone(),
        unprocessed: r.unprocessed.clone(),
        contracts,
        loops,
        store_events: r.store_events.clone(),
        transcript_digests: r.digests.clone(),
        transcripts: r.transcripts.clone(),
    }
}

pub fn program_report(path: &str, source: &str, p: &Prepared, run: Option<&PipelineReport>, dump_queue: bool) -> ProgramReport {
    ProgramReport {
        path: path.to_string(),
        sha256: sha256_hex(source.as_bytes()),
        width: p.tp.width.bits(),
        entry: p.tp.entry.clone(),
        analysis: analysis_summary(p),
        assertions: p
            .assertions
            .iter()
            .map(|a| AssertionEntry {
                id: a.id.clone(),
                kind: a.kind,
                host: a.host.clone(),
                line: a.loc.line,
                column: a.loc.column,
                predicate: a.predicate.to_string(),
                status: a.status,
            })
            .collect(),
        queue_order: p.queue.iter().map(|v| v.target.id.clone()).collect(),
        queue: dump_queue.then(|| queue_entries(&p.queue)),
        synthesis: run.map(|r| synthesis_section(p, r)),
    }
}

/// Source with the analyzer's assertions as `assert` annotations.
pub fn instrumented_source(p: &Prepared) -> String {
    let notes: Vec<(NodeId, Clause)> = p
        .analysis
        .assertions
        .iter()
        .map(|a| {
            (
                a.node,
                Clause::Assert {
                    label: Some(a.kind.label().to_string()),
                    pred: a.predicate.clone(),
                },
            )
        })
        .collect();
    render_with(&p.tp.program, &notes, &RenderOptions::default()).unwrap_or_default()
}

/// Source with the final contracts.
pub fn annotated_source(tp: &TypedProgram, env: &ContractEnv) -> String {
    let ids: BTreeMap<String, NodeId> = function_ids(tp).into_iter().map(|(id, n)| (n, id)).collect();
    render_with(&tp.program, &env.annotations(&ids), &RenderOptions::default()).unwrap_or_default()
}

pub fn queue_json(p: &Prepared) -> serde_json::Value {
    serde_json::to_value(queue_entries(&p.queue)).expect("queue serializes")
}
