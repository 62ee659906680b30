//! Request rendering and response parsing for text-based generators.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{FeedbackEntry, GeneratorRequest, Phase};
use crate::absint::guards::expr_term;
use crate::absint::{RteAssertion, RteKind};
use crate::callgraph::VUnit;
use crate::frontend::{render_with, ExprKind, NodeId, RenderOptions, TypedProgram};
use crate::specs::{parse_clause, AnchoredClause, Clause, ContractEnv, Pred, Sym};
use crate::verifier::{function_ids, loops_of};

/// The predicate a unit must establish. For call sites this is the
/// callee's current requires instantiated with the arguments.
pub fn target_predicate(tp: &TypedProgram, a: &RteAssertion, env: &ContractEnv) -> Pred {
    if a.kind != RteKind::CallSitePrecondition {
        return a.predicate.clone();
    }
    let Some(ExprKind::Call { callee, args }) = tp.find_expr(a.node).map(|e| &e.kind) else {
        return a.predicate.clone();
    };
    let Some(f) = tp.function(callee) else {
        return a.predicate.clone();
    };
    let binds: BTreeMap<Sym, _> = f
        .param_names()
        .zip(args)
        .map(|(p, e)| (Sym::Var(p.to_string()), expr_term(e, tp)))
        .collect();
    env.contract(callee).pre().substitute(&binds)
}

pub fn target_text(tp: &TypedProgram, a: &RteAssertion, env: &ContractEnv) -> String {
    format!(
        "{} `{}` in {} at {}",
        a.kind.label(),
        target_predicate(tp, a, env),
        a.host,
        a.loc
    )
}

/// The slice with its current contracts, the target as an `assert`
/// annotation and `// loop [f#k]` markers.
pub fn unit_source(tp: &TypedProgram, v: &VUnit) -> String {
    let ids: BTreeMap<String, NodeId> = function_ids(tp).into_iter().map(|(id, n)| (n, id)).collect();
    let mut notes = v.contracts.annotations(&ids);
    notes.push((
        v.target.node,
        Clause::Assert {
            label: Some("target".into()),
            pred: target_predicate(tp, &v.target, &v.contracts),
        },
    ));
    let opts = RenderOptions {
        only: Some(v.slice.clone()),
        loop_labels: true,
    };
    let mut out = render_with(&tp.program, &notes, &opts).unwrap_or_default();
    for g in &v.dropped {
        let c = v.contracts.contract(g);
        let _ = writeln!(out, "// {g}: body omitted; requires {}; ensures {};", c.pre(), c.post());
    }
    out
}

fn phase_rules(req: &GeneratorRequest) -> String {
    match req.phase {
        Phase::Host => format!(
            "Propose `requires`/`ensures` for `{}` and `loop invariant` clauses for its loops.\n",
            req.host
        ),
        Phase::Callees => format!(
            "The target depends on values returned by calls. Propose `ensures` (and loop invariants) for the callees: {}.\n\
             Requires are not accepted in this phase.\n",
            req.callees.join(", ")
        ),
    }
}

fn render_feedback(out: &mut String, fb: &FeedbackEntry) {
    let _ = writeln!(out, "### attempt {} ({:?} phase)", fb.attempt, fb.phase);
    if fb.candidate.is_empty() {
        out.push_str("candidate: (none)\n");
    }
    for c in &fb.candidate {
        let _ = writeln!(out, "candidate: {c}");
    }
    for m in &fb.messages {
        let _ = writeln!(out, "note: {m}");
    }
    for r in &fb.rejected {
        let _ = writeln!(out, "rejected: {r}");
    }
    for o in fb.outcomes.iter().filter(|o| o.status != "valid") {
        let _ = writeln!(out, "- {} [{}]: {}", o.origin, o.status, o.formula);
        if let Some(w) = &o.witness {
            let vals: Vec<String> = w.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            let _ = writeln!(out, "  counterexample: {}", vals.join(", "));
        }
        if let Some(r) = &o.reason {
            let _ = writeln!(out, "  reason: {r}");
        }
    }
}

pub fn render_prompt(req: &GeneratorRequest) -> String {
    let mut out = String::new();
    out.push_str(
        "You annotate MiniC (a C subset with `int` only) with ACSL-style clauses so that a \
         runtime-error assertion can be proved.\n\n",
    );
    let _ = writeln!(out, "## Target\n{}\n", req.target);
    let _ = writeln!(out, "## Program slice\n```c\n{}```\n", req.source);
    out.push_str("## Task\n");
    out.push_str(&phase_rules(req));
    out.push_str(
        "Predicates use C comparisons, `&&`, `||`, `!`, `==>`, `+ - * / %`, `INT_MIN`, `INT_MAX`, \
         `\\result` and `\\old(x)`.\n\
         In counterexamples `__ret_f_nK` is the value returned by the call to `f` at node K and \
         `__L<k>_v` is the value of `v` at an arbitrary iteration of loop k.\n\n",
    );
    if !req.feedback.is_empty() {
        out.push_str("## Verifier feedback\n");
        for fb in &req.feedback {
            render_feedback(&mut out, fb);
        }
        out.push('\n');
    }
    out.push_str(
        "## Answer format\nOne clause per line inside a single fenced block; prefix function clauses \
         with `[function]` and loop clauses with the loop marker `[function#k]`:\n\
         ```acsl\n[f] requires x != 0;\n[f] ensures \\result >= 0;\n[f#1] loop invariant 0 <= i;\n```\n",
    );
    out
}

/// Fenced block contents, or the whole text when there is no fence.
fn blocks(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find("```") {
        let after = &rest[start + 3..];
        let body_start = after.find('\n').map_or(after.len(), |i| i + 1);
        let body = &after[body_start..];
        match body.find("```") {
            Some(end) => {
                out.push(&body[..end]);
                rest = &body[end + 3..];
            }
            None => {
                out.push(body);
                break;
            }
        }
    }
    if out.is_empty() {
        out.push(text);
    }
    out
}

/// Resolve `f` or `f#k` to an anchor.
fn anchor(tp: &TypedProgram, tag: &str) -> Result<NodeId, String> {
    let (name, k) = match tag.split_once('#') {
        Some((n, k)) => (n.trim(), Some(k.trim())),
        None => (tag.trim(), None),
    };
    let f = tp.function(name).ok_or_else(|| format!("unknown function `{name}`"))?;
    match k {
        None => Ok(f.id),
        Some(k) => {
            let loops = loops_of(f);
            k.parse::<usize>()
                .ok()
                .filter(|k| (1..=loops.len()).contains(k))
                .map(|k| loops[k - 1])
                .ok_or_else(|| format!("`{name}` has no loop #{k}"))
        }
    }
}

/// Parse tagged clause lines. Lines that fail are reported, not fatal.
pub fn parse_response(tp: &TypedProgram, text: &str) -> (Vec<AnchoredClause>, Vec<String>) {
    let mut clauses = Vec::new();
    let mut notes = Vec::new();
    for block in blocks(text) {
        for line in block.lines().map(str::trim) {
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            let Some(rest) = line.strip_prefix('[') else {
                notes.push(format!("ignored line without a `[function]` tag: {line}"));
                continue;
            };
            let Some((tag, body)) = rest.split_once(']') else {
                notes.push(format!("unterminated tag: {line}"));
                continue;
            };
            let anchor = match anchor(tp, tag) {
                Ok(a) => a,
                Err(e) => {
                    notes.push(format!("{e}: {line}"));
                    continue;
                }
            };
            match parse_clause(body.trim()) {
                Ok(Clause::LoopInvariant(_) | Clause::LoopAssigns(_)) if !tag.contains('#') => {
                    notes.push(format!("loop clause needs a `[function#k]` tag: {line}"));
                }
                Ok(c) if tag.contains('#') && !c.is_loop_clause() => {
                    notes.push(format!("only loop clauses may use a loop tag: {line}"));
                }
                Ok(clause) => clauses.push(AnchoredClause { anchor, clause }),
                Err(e) => notes.push(format!("{e}: {line}")),
            }
        }
    }
    (clauses, notes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, resolve, IntWidth};

    const SRC: &str = "int f(int n) { int i = 0; while (i < n) { i = i + 1; } return i; }\nint g(int x) { return x; }";

    fn tp() -> TypedProgram {
        resolve(parse(SRC).unwrap(), IntWidth::W32).unwrap()
    }

    #[test]
    fn parses_tagged_lines_in_fences() {
        let tp = tp();
        let text = "Here you go:\n```acsl\n[g] ensures \\result == x;\n[f#1] loop invariant i <= n;\n[h] requires x > 0;\n```\n";
        let (cs, notes) = parse_response(&tp, text);
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0].anchor, tp.function("g").unwrap().id);
        assert_eq!(cs[1].anchor, loops_of(tp.function("f").unwrap())[0]);
        assert_eq!(notes.len(), 1);
        assert!(notes[0].contains("unknown function `h`"));
    }

    #[test]
    fn bad_lines_become_notes() {
        let tp = tp();
        let (cs, notes) = parse_response(&tp, "[f#2] loop invariant i >= 0;\n[f] loop invariant i >= 0;\n[g] ensures \\result ==;\nensures x;");
        assert!(cs.is_empty());
        assert_eq!(notes.len(), 4);
    }

    #[test]
    fn missing_semicolon_at_end_is_accepted() {
        let tp = tp();
        let (cs, _) = parse_response(&tp, "```\n[g] requires x != 0\n```");
        assert_eq!(cs.len(), 1);
    }
}
