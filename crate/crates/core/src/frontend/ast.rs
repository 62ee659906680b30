//! MiniC syntax tree.
//!
//! Every statement, expression and function carries a [`NodeId`] assigned in
//! pre-order by the parser, so the same text always yields the same ids.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// 1-based line and column in the source text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    /// Name used in diagnostics; not part of the structure.
    pub file: String,
    pub functions: Vec<FunctionDef>,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RetType {
    Int,
    Void,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    pub id: NodeId,
    pub loc: Location,
    pub name: String,
    pub ret: RetType,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
}

impl FunctionDef {
    pub fn param_names(&self) -> impl Iterator<Item = &str> {
        self.params.iter().map(|p| p.name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub id: NodeId,
    pub loc: Location,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    /// `int x = e;`
    Decl { name: String, init: Expr },
    /// `x = e;`
    Assign { name: String, value: Expr },
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    While { cond: Expr, body: Box<Stmt> },
    Return(Option<Expr>),
    /// Expression statement; a bare call is the common case.
    Expr(Expr),
    Block(Vec<Stmt>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub id: NodeId,
    pub loc: Location,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Builtin {
    IntMin,
    IntMax,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::IntMin => "INT_MIN",
            Builtin::IntMax => "INT_MAX",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(i128),
    Const(Builtin),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call { callee: String, args: Vec<Expr> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }

    pub fn is_arith(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem)
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne
        )
    }
}

impl Stmt {
    /// Pre-order walk over this statement and all nested statements.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Stmt)) {
        f(self);
        match &self.kind {
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.walk(f);
                if let Some(e) = else_branch {
                    e.walk(f);
                }
            }
            StmtKind::While { body, .. } => body.walk(f),
            StmtKind::Block(stmts) => stmts.iter().for_each(|s| s.walk(f)),
            _ => {}
        }
    }

    /// Expressions directly owned by this statement (not nested statements).
    pub fn own_exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Decl { init: e, .. }
            | StmtKind::Assign { value: e, .. }
            | StmtKind::If { cond: e, .. }
            | StmtKind::While { cond: e, .. }
            | StmtKind::Expr(e)
            | StmtKind::Return(Some(e)) => vec![e],
            StmtKind::Return(None) | StmtKind::Block(_) => vec![],
        }
    }
}

impl Expr {
    /// Pre-order walk over this expression tree.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Unary(_, a) => a.walk(f),
            ExprKind::Binary(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::Call { args, .. } => args.iter().for_each(|a| a.walk(f)),
            _ => {}
        }
    }

    pub fn contains_call(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e.kind, ExprKind::Call { .. }));
        found
    }
}

/// Walk every expression of a statement list, including nested statements.
pub fn walk_exprs<'a>(stmts: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt, &'a Expr)) {
    for s in stmts {
        s.walk(&mut |st| {
            for e in st.own_exprs() {
                e.walk(&mut |x| f(st, x));
            }
        });
    }
}

/// Variables assigned or declared anywhere inside `stmt`.
pub fn assigned_vars(stmt: &Stmt) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    stmt.walk(&mut |s| match &s.kind {
        StmtKind::Decl { name, .. } | StmtKind::Assign { name, .. } => {
            if !out.contains(name) {
                out.push(name.clone());
            }
        }
        _ => {}
    });
    out
}

/// Copy of the program with every location zeroed; two programs are
/// structurally equal iff their stripped forms compare equal.
pub fn strip_locations(p: &Program) -> Program {
    fn expr(e: &Expr) -> Expr {
        let kind = match &e.kind {
            ExprKind::Unary(op, a) => ExprKind::Unary(*op, Box::new(expr(a))),
            ExprKind::Binary(op, a, b) => ExprKind::Binary(*op, Box::new(expr(a)), Box::new(expr(b))),
            ExprKind::Call { callee, args } => ExprKind::Call {
                callee: callee.clone(),
                args: args.iter().map(expr).collect(),
            },
            k => k.clone(),
        };
        Expr {
            id: e.id,
            loc: Location::default(),
            kind,
        }
    }
    fn stmt(s: &Stmt) -> Stmt {
        let kind = match &s.kind {
            StmtKind::Decl { name, init } => StmtKind::Decl {
                name: name.clone(),
                init: expr(init),
            },
            StmtKind::Assign { name, value } => StmtKind::Assign {
                name: name.clone(),
                value: expr(value),
            },
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => StmtKind::If {
                cond: expr(cond),
                then_branch: Box::new(stmt(then_branch)),
                else_branch: else_branch.as_ref().map(|e| Box::new(stmt(e))),
            },
            StmtKind::While { cond, body } => StmtKind::While {
                cond: expr(cond),
                body: Box::new(stmt(body)),
            },
            StmtKind::Return(e) => StmtKind::Return(e.as_ref().map(expr)),
            StmtKind::Expr(e) => StmtKind::Expr(expr(e)),
            StmtKind::Block(b) => StmtKind::Block(b.iter().map(stmt).collect()),
        };
        Stmt {
            id: s.id,
            loc: Location::default(),
            kind,
        }
    }
    Program {
        file: String::new(),
        functions: p
            .functions
            .iter()
            .map(|f| FunctionDef {
                id: f.id,
                loc: Location::default(),
                name: f.name.clone(),
                ret: f.ret,
                params: f
                    .params
                    .iter()
                    .map(|p| Param {
                        name: p.name.clone(),
                        loc: Location::default(),
                    })
                    .collect(),
                body: f.body.iter().map(stmt).collect(),
            })
            .collect(),
    }
}
