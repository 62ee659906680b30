use std::collections::{BTreeMap, BTreeSet};

use super::*;

pub fn resolve(program: Program, width: IntWidth) -> Result<TypedProgram, FrontendError> {
    let mut signatures = BTreeMap::new();
    for f in &program.functions {
        check_name(&f.name, f.loc)?;
        if signatures.contains_key(&f.name) {
            return Err(FrontendError::DuplicateDefinition {
                name: f.name.clone(),
                loc: f.loc,
            });
        }
        signatures.insert(
            f.name.clone(),
            Signature {
                params: f.params.iter().map(|p| p.name.clone()).collect(),
                ret: f.ret,
            },
        );
    }

    for f in &program.functions {
        let mut cx = FnCx {
            sigs: &signatures,
            width,
            ret: f.ret,
            declared: BTreeSet::new(),
            scopes: vec![BTreeSet::new()],
        };
        for p in &f.params {
            check_name(&p.name, p.loc)?;
            if !cx.declared.insert(p.name.clone()) {
                return Err(FrontendError::DuplicateDefinition {
                    name: p.name.clone(),
                    loc: p.loc,
                });
            }
            cx.scopes[0].insert(p.name.clone());
        }
        cx.block(&f.body)?;
        if f.ret == RetType::Int && !always_returns(&f.body) {
            return Err(FrontendError::MissingReturn {
                name: f.name.clone(),
                loc: f.loc,
            });
        }
    }

    let mut nodes = BTreeMap::new();
    for (fi, f) in program.functions.iter().enumerate() {
        nodes.insert(
            f.id,
            NodeInfo {
                function: fi,
                stmt: f.id,
                loc: f.loc,
                kind: NodeKind::Function,
            },
        );
        for s in &f.body {
            s.walk(&mut |st| {
                nodes.insert(
                    st.id,
                    NodeInfo {
                        function: fi,
                        stmt: st.id,
                        loc: st.loc,
                        kind: NodeKind::Stmt,
                    },
                );
                for e in st.own_exprs() {
                    e.walk(&mut |x| {
                        nodes.insert(
                            x.id,
                            NodeInfo {
                                function: fi,
                                stmt: st.id,
                                loc: x.loc,
                                kind: NodeKind::Expr,
                            },
                        );
                    });
                }
            });
        }
    }

    let entry = signatures.contains_key("main").then(|| "main".to_string());
    Ok(TypedProgram {
        program,
        width,
        entry,
        signatures,
        nodes,
    })
}

fn check_name(name: &str, loc: Location) -> Result<(), FrontendError> {
    if name.starts_with("__") || name == "INT_MIN" || name == "INT_MAX" {
        return Err(FrontendError::ReservedName {
            name: name.to_string(),
            loc,
        });
    }
    Ok(())
}

/// Does every path through `stmts` end in a `return`?
fn always_returns(stmts: &[Stmt]) -> bool {
    stmts.iter().any(stmt_returns)
}

fn stmt_returns(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::Block(b) => always_returns(b),
        StmtKind::If {
            then_branch,
            else_branch: Some(e),
            ..
        } => stmt_returns(then_branch) && stmt_returns(e),
        _ => false,
    }
}

struct FnCx<'a> {
    sigs: &'a BTreeMap<String, Signature>,
    width: IntWidth,
    ret: RetType,
    /// Every name declared so far in the function; locals must be unique
    /// function-wide so later passes can rely on plain names.
    declared: BTreeSet<String>,
    scopes: Vec<BTreeSet<String>>,
}

impl FnCx<'_> {
    fn in_scope(&self, name: &str) -> bool {
        self.scopes.iter().any(|s| s.contains(name))
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<(), FrontendError> {
        self.scopes.push(BTreeSet::new());
        for s in stmts {
            self.stmt(s)?;
        }
        self.scopes.pop();
        Ok(())
    }

    fn nested(&mut self, s: &Stmt) -> Result<(), FrontendError> {
        // A branch body is its own scope even without braces.
        self.block(std::slice::from_ref(s))
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), FrontendError> {
        match &s.kind {
            StmtKind::Decl { name, init } => {
                self.value(init)?;
                check_name(name, s.loc)?;
                if !self.declared.insert(name.clone()) {
                    return Err(FrontendError::DuplicateDefinition {
                        name: name.clone(),
                        loc: s.loc,
                    });
                }
                self.scopes.last_mut().unwrap().insert(name.clone());
            }
            StmtKind::Assign { name, value } => {
                if !self.in_scope(name) {
                    return Err(FrontendError::UnknownIdentifier {
                        name: name.clone(),
                        loc: s.loc,
                    });
                }
                self.value(value)?;
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.value(cond)?;
                self.nested(then_branch)?;
                if let Some(e) = else_branch {
                    self.nested(e)?;
                }
            }
            StmtKind::While { cond, body } => {
                self.value(cond)?;
                self.nested(body)?;
            }
            StmtKind::Return(e) => match (self.ret, e) {
                (RetType::Int, Some(e)) => self.value(e)?,
                (RetType::Void, None) => {}
                (RetType::Int, None) => {
                    return Err(FrontendError::TypeMismatch {
                        message: "`return;` in a function returning int".into(),
                        loc: s.loc,
                    })
                }
                (RetType::Void, Some(_)) => {
                    return Err(FrontendError::TypeMismatch {
                        message: "returning a value from a void function".into(),
                        loc: s.loc,
                    })
                }
            },
            StmtKind::Expr(e) => self.expr(e, true)?,
            StmtKind::Block(b) => self.block(b)?,
        }
        Ok(())
    }

    fn value(&mut self, e: &Expr) -> Result<(), FrontendError> {
        self.expr(e, false)
    }

    fn expr(&mut self, e: &Expr, discarded: bool) -> Result<(), FrontendError> {
        match &e.kind {
            ExprKind::Int(v) => {
                if !self.width.contains(*v) {
                    return Err(FrontendError::LiteralOutOfRange {
                        value: *v,
                        width: self.width,
                        loc: e.loc,
                    });
                }
            }
            ExprKind::Const(_) => {}
            ExprKind::Var(name) => {
                if !self.in_scope(name) {
                    return Err(FrontendError::UnknownIdentifier {
                        name: name.clone(),
                        loc: e.loc,
                    });
                }
            }
            ExprKind::Unary(_, a) => self.value(a)?,
            ExprKind::Binary(_, a, b) => {
                self.value(a)?;
                self.value(b)?;
            }
            ExprKind::Call { callee, args } => {
                let sig = self
                    .sigs
                    .get(callee)
                    .ok_or_else(|| FrontendError::UnknownIdentifier {
                        name: callee.clone(),
                        loc: e.loc,
                    })?;
                if sig.params.len() != args.len() {
                    return Err(FrontendError::ArityMismatch {
                        name: callee.clone(),
                        expected: sig.params.len(),
                        found: args.len(),
                        loc: e.loc,
                    });
                }
                if sig.ret == RetType::Void && !discarded {
                    return Err(FrontendError::TypeMismatch {
                        message: format!("void function `{callee}` used as a value"),
                        loc: e.loc,
                    });
                }
                for a in args {
                    self.value(a)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(src: &str) -> Result<TypedProgram, FrontendError> {
        resolve(parse(src)?, IntWidth::W32)
    }

    #[test]
    fn abs_resolves_with_int_signature() {
        let tp = check(
            "int abs(int x) { if (x < 0) return -x; else return x; }\n\
             void main() { int a = abs(42); int b = abs(INT_MIN); }",
        )
        .unwrap();
        let sig = tp.signature("abs").unwrap();
        assert_eq!(sig.params, ["x"]);
        assert_eq!(sig.ret, RetType::Int);
        assert_eq!(tp.entry.as_deref(), Some("main"));
    }

    #[test]
    fn arity_mismatch() {
        let err = check("int abs(int x) { return x; } void main() { abs(1, 2); }").unwrap_err();
        assert!(matches!(err, FrontendError::ArityMismatch { expected: 1, found: 2, .. }));
    }

    #[test]
    fn unknown_identifier() {
        let err = check("int f(int x) { return y; }").unwrap_err();
        assert!(matches!(err, FrontendError::UnknownIdentifier { ref name, .. } if name == "y"));
        assert_eq!(err.location().unwrap().line, 1);
    }

    #[test]
    fn duplicate_definitions() {
        assert!(matches!(
            check("int f() { return 0; } int f() { return 1; }").unwrap_err(),
            FrontendError::DuplicateDefinition { .. }
        ));
        assert!(matches!(
            check("int f(int x) { int x = 1; return x; }").unwrap_err(),
            FrontendError::DuplicateDefinition { .. }
        ));
        assert!(matches!(
            check("int f(int a) { if (a) { int t = 1; } int t = 2; return t; }").unwrap_err(),
            FrontendError::DuplicateDefinition { .. }
        ));
    }

    #[test]
    fn block_scoping() {
        let err = check("int f(int a) { if (a) { int t = 1; } return t; }").unwrap_err();
        assert!(matches!(err, FrontendError::UnknownIdentifier { .. }));
    }

    #[test]
    fn type_mismatches() {
        assert!(matches!(
            check("void g() { return; } int f() { return g(); }").unwrap_err(),
            FrontendError::TypeMismatch { .. }
        ));
        assert!(matches!(
            check("void g() { return 1; }").unwrap_err(),
            FrontendError::TypeMismatch { .. }
        ));
        assert!(matches!(
            check("int f(int a) { if (a) return 1; }").unwrap_err(),
            FrontendError::MissingReturn { .. }
        ));
    }

    #[test]
    fn literal_range_follows_width() {
        let p = parse("int f() { return 200; }").unwrap();
        assert!(resolve(p.clone(), IntWidth::W32).is_ok());
        assert!(matches!(
            resolve(p, IntWidth::W8).unwrap_err(),
            FrontendError::LiteralOutOfRange { .. }
        ));
        assert!(resolve(parse("int f() { return -128; }").unwrap(), IntWidth::W8).is_ok());
    }

    #[test]
    fn reserved_names() {
        assert!(matches!(
            check("int f(int __x) { return 0; }").unwrap_err(),
            FrontendError::ReservedName { .. }
        ));
    }
}
