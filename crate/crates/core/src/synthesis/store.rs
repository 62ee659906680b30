//! The contract store shared by all units of a run.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::absint::AssertionId;
use crate::frontend::{NodeId, TypedProgram};
use crate::specs::{AnchoredClause, Clause, ContractEnv};
use crate::verifier::merge_candidate;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StoreEvent {
    pub unit: AssertionId,
    /// Function the clause belongs to (the enclosing function for loop clauses).
    pub function: String,
    pub clause: Clause,
    pub action: StoreAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StoreAction {
    Accepted,
    /// Verified but not needed by any condition of the unit.
    NotRetained,
    /// Verified in a unit that ended in an alert.
    KeptAfterAlert,
}

/// Accepted contracts. Clauses are only ever added.
#[derive(Debug, Clone, Default)]
pub struct ContractStore {
    env: ContractEnv,
    events: Vec<StoreEvent>,
    callee_role: BTreeSet<String>,
}

impl ContractStore {
    pub fn new(initial: ContractEnv) -> ContractStore {
        ContractStore {
            env: initial,
            ..ContractStore::default()
        }
    }

    pub fn env(&self) -> &ContractEnv {
        &self.env
    }

    pub fn events(&self) -> &[StoreEvent] {
        &self.events
    }

    /// Functions currently playing the callee role; they must not gain requires.
    pub fn enter_callee_phase(&mut self, callees: &[String]) {
        self.callee_role = callees.iter().cloned().collect();
    }

    pub fn leave_callee_phase(&mut self) {
        self.callee_role.clear();
    }

    pub fn add(&mut self, tp: &TypedProgram, unit: &AssertionId, clauses: &[AnchoredClause], action: StoreAction) {
        for c in clauses {
            let function = owner(tp, c.anchor);
            if matches!(c.clause, Clause::Requires(_)) {
                assert!(
                    !self.callee_role.contains(&function),
                    "requires for `{function}` written while it is a callee"
                );
            }
            self.events.push(StoreEvent {
                unit: unit.clone(),
                function,
                clause: c.clause.clone(),
                action,
            });
        }
        if action != StoreAction::NotRetained {
            self.env = merge_candidate(tp, &self.env, clauses);
        }
    }

    /// Record clauses that were verified but dropped by the retention rule.
    pub fn log_not_retained(&mut self, tp: &TypedProgram, unit: &AssertionId, clauses: &[AnchoredClause]) {
        self.add(tp, unit, clauses, StoreAction::NotRetained);
    }
}

pub fn owner(tp: &TypedProgram, anchor: NodeId) -> String {
    tp.host_of(anchor).map(|f| f.name.clone()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, resolve, IntWidth};
    use crate::specs::parse_clause;

    #[test]
    #[should_panic(expected = "while it is a callee")]
    fn requires_on_callee_is_refused() {
        let tp = resolve(parse("int id(int x) { return x; }").unwrap(), IntWidth::W32).unwrap();
        let mut store = ContractStore::default();
        store.enter_callee_phase(&["id".to_string()]);
        let c = AnchoredClause {
            anchor: tp.function("id").unwrap().id,
            clause: parse_clause("requires x != 0;").unwrap(),
        };
        store.add(&tp, &AssertionId("div0-n1".into()), &[c], StoreAction::Accepted);
    }

    #[test]
    fn clauses_accumulate() {
        let tp = resolve(parse("int id(int x) { return x; }").unwrap(), IntWidth::W32).unwrap();
        let mut store = ContractStore::default();
        let id = tp.function("id").unwrap().id;
        let c = AnchoredClause {
            anchor: id,
            clause: parse_clause("ensures \\result == x;").unwrap(),
        };
        store.add(&tp, &AssertionId("a".into()), std::slice::from_ref(&c), StoreAction::Accepted);
        store.add(&tp, &AssertionId("b".into()), &[c], StoreAction::Accepted);
        assert_eq!(store.env().contract("id").ensures.len(), 1);
        assert_eq!(store.events().len(), 2);
        assert_eq!(store.events()[0].function, "id");
    }
}
