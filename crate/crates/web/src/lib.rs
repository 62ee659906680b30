//! Browser bindings: analyze a program, run the pipeline with the oracle
//! generator, or dump the verification queue. Every entry point takes the
//! MiniC source and returns a JSON string.

use preguss::frontend::IntWidth;
use preguss::pipeline::{prepare, synthesize, PipelineConfig};
use preguss::report::{self, ConfigEcho, ReportDocument, ToolInfo, SCHEMA_VERSION};
use preguss::synthesis::{OracleGenerator, SynthesisConfig};
use serde_json::json;
use wasm_bindgen::prelude::*;

const FILE: &str = "input.c";

fn config(width: u32, max_iters: u32, dependency_filter: bool) -> Result<PipelineConfig, String> {
    let width = IntWidth::from_bits(width).ok_or_else(|| format!("width must be 8, 16 or 32, got {width}"))?;
    if max_iters == 0 {
        return Err("max_iters must be at least 1".into());
    }
    Ok(PipelineConfig {
        width,
        synthesis: SynthesisConfig {
            max_iters,
            ..SynthesisConfig::default()
        },
        dependency_filter,
        ..PipelineConfig::default()
    })
}

fn echo(cfg: &PipelineConfig, generator: &str) -> ConfigEcho {
    ConfigEcho {
        width: cfg.width.bits(),
        generator: generator.into(),
        max_iters: cfg.synthesis.max_iters,
        dump_queue: false,
        continue_on_alert: cfg.synthesis.continue_on_alert,
        dependency_filter: cfg.dependency_filter,
        save_transcripts: false,
    }
}

/// `{ "report": ..., "source": instrumented source }`.
pub fn analyze_json(source: &str, width: u32) -> Result<String, String> {
    let cfg = config(width, 1, true)?;
    let p = prepare(FILE, source, &cfg).map_err(|e| e.to_string())?;
    let doc = ReportDocument {
        schema_version: SCHEMA_VERSION.into(),
        tool: ToolInfo::default(),
        command: "analyze".into(),
        generated_at: None,
        timing: None,
        config: echo(&cfg, "none"),
        programs: vec![report::program_report(FILE, source, &p, None, false)],
    };
    Ok(json!({ "report": doc, "source": report::instrumented_source(&p) }).to_string())
}

/// `{ "report": ..., "source": annotated source }`.
pub fn run_json(source: &str, width: u32, max_iters: u32) -> Result<String, String> {
    let cfg = config(width, max_iters, true)?;
    let p = prepare(FILE, source, &cfg).map_err(|e| e.to_string())?;
    let r = synthesize(&p, &mut OracleGenerator::new(), &cfg).map_err(|e| e.to_string())?;
    let doc = ReportDocument {
        schema_version: SCHEMA_VERSION.into(),
        tool: ToolInfo::default(),
        command: "run".into(),
        generated_at: None,
        timing: None,
        config: echo(&cfg, &r.generator),
        programs: vec![report::program_report(FILE, source, &p, Some(&r), false)],
    };
    Ok(json!({ "report": doc, "source": report::annotated_source(&p.tp, &r.contracts) }).to_string())
}

/// The queue as a JSON array.
pub fn queue_json(source: &str, width: u32, dependency_filter: bool) -> Result<String, String> {
    let cfg = config(width, 1, dependency_filter)?;
    let p = prepare(FILE, source, &cfg).map_err(|e| e.to_string())?;
    Ok(report::queue_json(&p).to_string())
}

#[wasm_bindgen]
pub fn analyze(source: &str, width: u32) -> Result<String, JsValue> {
    analyze_json(source, width).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn run_pipeline(source: &str, width: u32, max_iters: u32) -> Result<String, JsValue> {
    run_json(source, width, max_iters).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn dump_queue(source: &str, width: u32, dependency_filter: bool) -> Result<String, JsValue> {
    queue_json(source, width, dependency_filter).map_err(|e| JsValue::from_str(&e))
}
