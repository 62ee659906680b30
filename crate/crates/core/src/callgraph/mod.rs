//! Call graph, recursion check, verification units and their queue.

mod slice;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::absint::{AnalysisResult, AssertionId, RteAssertion, RteKind, Status};
use crate::frontend::{walk_exprs, ExprKind, Location, NodeId, TypedProgram};
use crate::specs::{ContractEnv, Pred};

pub use slice::{filter_callees_by_dependency, relevant_callees};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CallEdge {
    pub caller: String,
    pub callee: String,
    pub site: NodeId,
    #[serde(skip)]
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallGraph {
    /// Function names in source order.
    pub nodes: Vec<String>,
    /// One edge per call site, callers in source order, sites in pre-order.
    pub edges: Vec<CallEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CallGraphError {
    #[error("recursive call cycle: {}", fmt_cycle(.0))]
    MutualRecursion(Vec<String>),
}

fn fmt_cycle(c: &[String]) -> String {
    let mut s = c.join(" -> ");
    if let Some(first) = c.first() {
        s.push_str(" -> ");
        s.push_str(first);
    }
    s
}

impl CallGraph {
    /// Distinct direct callees of `f`, in order of first call.
    pub fn callees(&self, f: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in self.edges.iter().filter(|e| e.caller == f) {
            if !out.contains(&e.callee.as_str()) {
                out.push(&e.callee);
            }
        }
        out
    }

    pub fn callers(&self, f: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in self.edges.iter().filter(|e| e.callee == f) {
            if !out.contains(&e.caller.as_str()) {
                out.push(&e.caller);
            }
        }
        out
    }

    pub fn sites_of<'a>(&'a self, callee: &'a str) -> impl Iterator<Item = &'a CallEdge> + 'a {
        self.edges.iter().filter(move |e| e.callee == callee)
    }

    pub fn edge_at(&self, site: NodeId) -> Option<&CallEdge> {
        self.edges.iter().find(|e| e.site == site)
    }

    /// Functions reachable from `f` through one or more calls.
    pub fn transitive_callees(&self, f: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut work: Vec<&str> = self.callees(f);
        while let Some(g) = work.pop() {
            if seen.insert(g.to_string()) {
                work.extend(self.callees(g));
            }
        }
        seen
    }

    /// Shortest call distance from `from` to `to`.
    pub fn distance(&self, from: &str, to: &str) -> Option<usize> {
        let mut frontier = vec![from];
        let mut seen = BTreeSet::from([from]);
        let mut d = 0;
        while !frontier.is_empty() {
            if frontier.contains(&to) {
                return Some(d);
            }
            let mut next = Vec::new();
            for f in frontier {
                for g in self.callees(f) {
                    if seen.insert(g) {
                        next.push(g);
                    }
                }
            }
            frontier = next;
            d += 1;
        }
        None
    }
}

pub fn build_call_graph(tp: &TypedProgram) -> Result<CallGraph, CallGraphError> {
    let mut edges = Vec::new();
    for f in tp.functions() {
        walk_exprs(&f.body, &mut |_, e| {
            if let ExprKind::Call { callee, .. } = &e.kind {
                edges.push(CallEdge {
                    caller: f.name.clone(),
                    callee: callee.clone(),
                    site: e.id,
                    loc: e.loc,
                });
            }
        });
    }
    let cg = CallGraph {
        nodes: tp.functions().iter().map(|f| f.name.clone()).collect(),
        edges,
    };
    if let Some(cycle) = find_cycle(&cg) {
        return Err(CallGraphError::MutualRecursion(cycle));
    }
    Ok(cg)
}

fn find_cycle(cg: &CallGraph) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    fn dfs(cg: &CallGraph, f: &str, marks: &mut BTreeMap<String, Mark>, stack: &mut Vec<String>) -> Option<Vec<String>> {
        marks.insert(f.to_string(), Mark::Grey);
        stack.push(f.to_string());
        for g in cg.callees(f) {
            match marks.get(g).copied().unwrap_or(Mark::White) {
                Mark::Grey => {
                    let start = stack.iter().position(|s| s == g).unwrap();
                    return Some(stack[start..].to_vec());
                }
                Mark::White => {
                    if let Some(c) = dfs(cg, g, marks, stack) {
                        return Some(c);
                    }
                }
                Mark::Black => {}
            }
        }
        stack.pop();
        marks.insert(f.to_string(), Mark::Black);
        None
    }
    let mut marks = BTreeMap::new();
    for f in &cg.nodes {
        if marks.get(f).copied().unwrap_or(Mark::White) == Mark::White {
            if let Some(c) = dfs(cg, f, &mut marks, &mut Vec::new()) {
                return Some(c);
            }
        }
    }
    None
}

/// Callees before callers: depth-first over functions in source order,
/// visiting callees in call order.
pub fn post_order(cg: &CallGraph) -> Vec<String> {
    fn visit(cg: &CallGraph, f: &str, seen: &mut BTreeSet<String>, out: &mut Vec<String>) {
        if !seen.insert(f.to_string()) {
            return;
        }
        for g in cg.callees(f) {
            visit(cg, g, seen, out);
        }
        out.push(f.to_string());
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for f in &cg.nodes {
        visit(cg, f, &mut seen, &mut out);
    }
    out
}

/// UB assertions of the analysis followed by one `\true` call-site
/// assertion per call site in an analyzed function.
pub fn collect_assertions(analysis: &AnalysisResult, cg: &CallGraph) -> Vec<RteAssertion> {
    let mut out = analysis.assertions.clone();
    for e in &cg.edges {
        if !analysis.reachable.contains(&e.caller) {
            continue;
        }
        out.push(RteAssertion {
            id: AssertionId::new(RteKind::CallSitePrecondition, e.site),
            kind: RteKind::CallSitePrecondition,
            predicate: Pred::True,
            node: e.site,
            host: e.caller.clone(),
            loc: e.loc,
            status: Status::Pending,
        });
    }
    out
}

/// One target assertion with its two-layer slice.
#[derive(Debug, Clone)]
pub struct VUnit {
    pub target: RteAssertion,
    pub host: String,
    /// Host first, then the retained direct callees in call order.
    pub slice: Vec<String>,
    /// Direct callees visible only through their contracts.
    pub dropped: Vec<String>,
    pub contracts: ContractEnv,
    pub priority: usize,
}

impl VUnit {
    pub fn callees(&self) -> &[String] {
        &self.slice[1..]
    }
}

pub fn build_vunit(
    a: &RteAssertion,
    tp: &TypedProgram,
    cg: &CallGraph,
    contracts: &ContractEnv,
    priority: usize,
) -> VUnit {
    debug_assert!(tp.function(&a.host).is_some(), "host `{}` exists", a.host);
    let mut slice = vec![a.host.clone()];
    slice.extend(cg.callees(&a.host).into_iter().map(String::from));
    VUnit {
        target: a.clone(),
        host: a.host.clone(),
        slice,
        dropped: vec![],
        contracts: contracts.clone(),
        priority,
    }
}

/// Units ordered by the post-order position of their host, then by node
/// id and kind within the host.
pub fn enqueue(
    assertions: &[RteAssertion],
    cg: &CallGraph,
    tp: &TypedProgram,
    contracts: &ContractEnv,
    dependency_filter: bool,
) -> Vec<VUnit> {
    let order: BTreeMap<String, usize> = post_order(cg).into_iter().enumerate().map(|(i, f)| (f, i)).collect();
    let mut sorted: Vec<&RteAssertion> = assertions.iter().collect();
    sorted.sort_by_key(|a| (order.get(&a.host).copied().unwrap_or(usize::MAX), a.node, a.kind));
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, a)| {
            let v = build_vunit(a, tp, cg, contracts, i);
            if dependency_filter {
                filter_callees_by_dependency(v, tp)
            } else {
                v
            }
        })
        .collect()
}

/// Machine-readable queue description used by `--dump-queue`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueueEntry {
    pub priority: usize,
    pub assertion: AssertionId,
    pub kind: RteKind,
    pub host: String,
    pub slice: Vec<String>,
    pub dropped: Vec<String>,
}

pub fn queue_entries(q: &[VUnit]) -> Vec<QueueEntry> {
    q.iter()
        .map(|v| QueueEntry {
            priority: v.priority,
            assertion: v.target.id.clone(),
            kind: v.target.kind,
            host: v.host.clone(),
            slice: v.slice.clone(),
            dropped: v.dropped.clone(),
        })
        .collect()
}

impl fmt::Display for VUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{} {} in {} [{}]", self.priority, self.target.id, self.host, self.slice.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::absint::{analyze, AnalysisConfig};
    use crate::frontend::{parse, resolve, IntWidth};

    const ABS_C: &str = "int abs(int x) { if (x < 0) return -x; else return x; }\n\
                         void main() { int a = abs(42); int b = abs(INT_MIN); }";
    const ID_C: &str = "int id(int x) {return x;}\nvoid one() { int x = id(1); 1/x; }\n\
                        void zero() { id(0); }\nvoid main() { one(); zero(); }";

    fn tp(src: &str) -> TypedProgram {
        resolve(parse(src).unwrap(), IntWidth::W32).unwrap()
    }

    #[test]
    fn identity_graph() {
        let cg = build_call_graph(&tp(ID_C)).unwrap();
        let pairs: Vec<_> = cg.edges.iter().map(|e| (e.caller.as_str(), e.callee.as_str())).collect();
        assert_eq!(pairs, [("one", "id"), ("zero", "id"), ("main", "one"), ("main", "zero")]);
        assert_eq!(post_order(&cg), ["id", "one", "zero", "main"]);
    }

    #[test]
    fn abs_post_order_and_queue() {
        let p = tp(ABS_C);
        let cg = build_call_graph(&p).unwrap();
        assert_eq!(post_order(&cg), ["abs", "main"]);
        let r = analyze(&p, IntWidth::W32, &AnalysisConfig::default()).unwrap();
        let all = collect_assertions(&r, &cg);
        assert_eq!(all.len(), 3);
        let q = enqueue(&all, &cg, &p, &ContractEnv::default(), true);
        let kinds: Vec<_> = q.iter().map(|v| (v.target.kind, v.host.as_str())).collect();
        assert_eq!(
            kinds,
            [
                (RteKind::SignedOverflow, "abs"),
                (RteKind::CallSitePrecondition, "main"),
                (RteKind::CallSitePrecondition, "main")
            ]
        );
        assert!(q[1].target.node < q[2].target.node);
    }

    #[test]
    fn identity_assertions() {
        let p = tp(ID_C);
        let cg = build_call_graph(&p).unwrap();
        let r = analyze(&p, IntWidth::W32, &AnalysisConfig::default()).unwrap();
        let all = collect_assertions(&r, &cg);
        assert_eq!(all.iter().filter(|a| a.kind == RteKind::DivByZero).count(), 1);
        assert_eq!(all.iter().filter(|a| a.kind == RteKind::CallSitePrecondition).count(), 4);
        let q = enqueue(&all, &cg, &p, &ContractEnv::default(), true);
        let div = q.iter().find(|v| v.target.kind == RteKind::DivByZero).unwrap();
        assert_eq!(div.slice, ["one", "id"]);
    }

    #[test]
    fn recursion_is_rejected() {
        let err = build_call_graph(&tp("int f(int x) { return g(x); } int g(int x) { return f(x); }")).unwrap_err();
        assert_eq!(err, CallGraphError::MutualRecursion(vec!["f".into(), "g".into()]));
        assert_eq!(err.to_string(), "recursive call cycle: f -> g -> f");
        assert!(build_call_graph(&tp("int f(int x) { return f(x); }")).is_err());
    }

    #[test]
    fn single_function() {
        let cg = build_call_graph(&tp("int f() { return 0; }")).unwrap();
        assert!(cg.edges.is_empty());
        assert_eq!(post_order(&cg), ["f"]);
    }
}
