//! End-to-end entry points shared by the command line and the browser demo.

use thiserror::Error;

use crate::absint::{analyze, AnalysisConfig, AnalysisError, AnalysisResult, RteAssertion, RteKind, Status};
use crate::callgraph::{build_call_graph, collect_assertions, enqueue, CallGraph, CallGraphError, VUnit};
use crate::frontend::{parse_named, resolve, FrontendError, IntWidth, TypedProgram};
use crate::specs::ContractEnv;
use crate::synthesis::{process_queue, Generator, GeneratorError, PipelineReport, SynthesisConfig};
use crate::verifier::{DischargeConfig, Verifier};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub width: IntWidth,
    pub analysis: AnalysisConfig,
    pub synthesis: SynthesisConfig,
    pub discharge: DischargeConfig,
    pub dependency_filter: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            width: IntWidth::W32,
            analysis: AnalysisConfig::default(),
            synthesis: SynthesisConfig::default(),
            discharge: DischargeConfig::default(),
            dependency_filter: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    CallGraph(#[from] CallGraphError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}

/// A program after analysis, with its verification queue.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub tp: TypedProgram,
    pub analysis: AnalysisResult,
    pub call_graph: CallGraph,
    /// Analysis assertions plus one call-site assertion per call.
    pub assertions: Vec<RteAssertion>,
    pub queue: Vec<VUnit>,
}

impl Prepared {
    pub fn undischarged(&self) -> usize {
        self.analysis
            .assertions
            .iter()
            .filter(|a| a.status != Status::Proven)
            .count()
    }
}

pub fn prepare(file: &str, source: &str, cfg: &PipelineConfig) -> Result<Prepared, PipelineError> {
    let tp = resolve(parse_named(file, source)?, cfg.width)?;
    let analysis = analyze(&tp, cfg.width, &cfg.analysis)?;
    let call_graph = build_call_graph(&tp)?;
    let assertions = collect_assertions(&analysis, &call_graph);
    let open: Vec<RteAssertion> = assertions
        .iter()
        .filter(|a| a.kind == RteKind::CallSitePrecondition || a.status != Status::Proven)
        .cloned()
        .collect();
    let queue = enqueue(&open, &call_graph, &tp, &ContractEnv::default(), cfg.dependency_filter);
    Ok(Prepared {
        tp,
        analysis,
        call_graph,
        assertions,
        queue,
    })
}

pub fn synthesize<G: Generator + ?Sized>(p: &Prepared, gen: &mut G, cfg: &PipelineConfig) -> Result<PipelineReport, PipelineError> {
    let verifier = Verifier::new(cfg.discharge.clone());
    Ok(process_queue(
        &p.tp,
        &p.analysis,
        &p.queue,
        gen,
        &verifier,
        &cfg.synthesis,
        ContractEnv::default(),
    )?)
}

pub fn run<G: Generator + ?Sized>(file: &str, source: &str, gen: &mut G, cfg: &PipelineConfig) -> Result<(Prepared, PipelineReport), PipelineError> {
    let p = prepare(file, source, cfg)?;
    let r = synthesize(&p, gen, cfg)?;
    Ok((p, r))
}
