use super::*;
use crate::pipeline::{prepare, synthesize, PipelineConfig};
use crate::specs::parse_clause;

const ID_C: &str = "int id(int x) {return x;}\nvoid one() { int x = id(1); 1/x; }\n\
                    void zero() { id(0); }\nvoid main() { one(); zero(); }";

fn run_oracle(src: &str, cfg: &PipelineConfig) -> PipelineReport {
    let p = prepare("t.c", src, cfg).unwrap();
    synthesize(&p, &mut OracleGenerator::new(), cfg).unwrap()
}

#[test]
fn identity_is_certified_through_the_callee_phase() {
    let r = run_oracle(ID_C, &PipelineConfig::default());
    assert!(r.all_certified(), "{:#?}", r.verdicts);
    let div = r.verdicts.iter().find(|v| v.kind == RteKind::DivByZero).unwrap();
    assert_eq!(div.phase, Some(Phase::Callees));
    assert!(r.contracts.contract("id").requires.is_empty());
    assert!(!r.contracts.contract("id").ensures.is_empty());
}

#[test]
fn abs_min_call_is_definitive() {
    let src = "int abs(int x) { if (x < 0) return -x; else return x; }\n\
               void main() { int a = abs(42); int b = abs(INT_MIN); }";
    let r = run_oracle(src, &PipelineConfig::default());
    let ovf = r.verdicts.iter().find(|v| v.kind == RteKind::SignedOverflow).unwrap();
    assert_eq!(ovf.verdict, Verdict::Certified);
    assert_eq!(ovf.accepted, ["[abs] requires -2147483647 <= x;"]);
    assert_eq!(ovf.provisional_on.len(), 2);
    let calls: Vec<_> = r.verdicts.iter().filter(|v| v.kind == RteKind::CallSitePrecondition).collect();
    assert_eq!(calls[0].verdict, Verdict::Certified);
    assert_eq!(calls[1].verdict, Verdict::DefinitiveRte);
}

#[test]
fn loop_invariants_are_synthesized() {
    let src = "int sum(int n) { int i = 0; int s = 0; while (i < n) { s = s + 1; i = i + 1; } return s; }\n\
               void main() { sum(100); }";
    let cfg = PipelineConfig {
        width: crate::frontend::IntWidth::W8,
        ..PipelineConfig::default()
    };
    let r = run_oracle(src, &cfg);
    let bad: Vec<_> = r.verdicts.iter().filter(|v| v.verdict != Verdict::Certified).collect();
    assert!(bad.is_empty(), "{bad:#?}");
}

/// Replays fixed responses, one per call.
struct Scripted {
    responses: Vec<&'static str>,
    calls: usize,
}

impl Generator for Scripted {
    fn id(&self) -> String {
        "scripted".into()
    }

    fn generate(&mut self, _: &GeneratorRequest, cx: &UnitContext<'_>) -> Result<GeneratorResponse, GeneratorError> {
        let raw = self.responses.get(self.calls).copied().unwrap_or("");
        self.calls += 1;
        let (clauses, notes) = prompt::parse_response(cx.tp, raw);
        Ok(GeneratorResponse {
            clauses,
            raw: raw.into(),
            notes,
            usage: None,
        })
    }
}

#[test]
fn callee_requires_are_stripped_and_logged() {
    let cfg = PipelineConfig::default();
    let p = prepare("t.c", ID_C, &cfg).unwrap();
    let mut g = Scripted {
        responses: vec!["nothing useful", "[id] requires x != 0;\n[id] ensures \\result == x;"],
        calls: 0,
    };
    let r = synthesize(&p, &mut g, &cfg).unwrap();
    let div = r.verdicts.iter().find(|v| v.kind == RteKind::DivByZero).unwrap();
    assert_eq!(div.verdict, Verdict::Certified);
    assert!(r.contracts.contract("id").requires.is_empty());
    assert!(r
        .store_events
        .iter()
        .all(|e| !matches!(e.clause, Clause::Requires(_))));
}

#[test]
fn alert_stops_the_run_and_bounds_calls() {
    let src = "int id(int x) {return x;}\nvoid one(int y) { int x = id(y); 1/x; }\n\
               void main(int a) { one(a); }";
    let cfg = PipelineConfig::default();
    let p = prepare("t.c", src, &cfg).unwrap();
    let mut g = Scripted {
        responses: vec![],
        calls: 0,
    };
    let r = synthesize(&p, &mut g, &cfg).unwrap();
    assert!(r.verdicts.iter().any(|v| v.verdict == Verdict::HighRiskAlert));
    assert!(!r.unprocessed.is_empty(), "{:#?} {:?}", r.verdicts.iter().map(|v| (&v.assertion, v.verdict)).collect::<Vec<_>>(), r.unprocessed);
    assert!(r.generator_calls as usize <= p.queue.len() * 2 * cfg.synthesis.max_iters as usize);
    let alert = r.verdicts.iter().find(|v| v.verdict == Verdict::HighRiskAlert).unwrap();
    assert!(alert.last_feedback.is_some());
}

#[test]
fn retention_drops_unneeded_clauses() {
    let cfg = PipelineConfig::default();
    let p = prepare("t.c", ID_C, &cfg).unwrap();
    let mut g = Scripted {
        responses: vec!["", "[id] ensures \\result == x;\n[id] ensures \\result <= x;"],
        calls: 0,
    };
    let r = synthesize(&p, &mut g, &cfg).unwrap();
    let ens = r.contracts.contract("id").ensures;
    assert_eq!(ens.len(), 1, "{ens:?}");
    assert!(r.store_events.iter().any(|e| e.action == StoreAction::NotRetained));
    let _ = parse_clause("ensures \\result == x;").unwrap();
}
