//! MiniC frontend: parsing, name resolution and pretty-printing.
//!
//! The accepted language is documented in `docs/grammar.md`.

pub mod ast;
pub mod lexer;
mod parser;
mod render;
mod resolve;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::*;
pub use parser::{parse, parse_named};
pub use render::{expr_to_string, render, render_with, RenderOptions};
pub use resolve::resolve;

/// Two's-complement width of the MiniC `int` type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum IntWidth {
    W8,
    W16,
    W32,
}

impl IntWidth {
    pub fn from_bits(bits: u32) -> Option<IntWidth> {
        match bits {
            8 => Some(IntWidth::W8),
            16 => Some(IntWidth::W16),
            32 => Some(IntWidth::W32),
            _ => None,
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            IntWidth::W8 => 8,
            IntWidth::W16 => 16,
            IntWidth::W32 => 32,
        }
    }

    pub fn min(self) -> i128 {
        -(1i128 << (self.bits() - 1))
    }

    pub fn max(self) -> i128 {
        (1i128 << (self.bits() - 1)) - 1
    }

    pub fn contains(self, v: i128) -> bool {
        self.min() <= v && v <= self.max()
    }

    pub fn builtin(self, b: Builtin) -> i128 {
        match b {
            Builtin::IntMin => self.min(),
            Builtin::IntMax => self.max(),
        }
    }
}

impl TryFrom<u32> for IntWidth {
    type Error = String;
    fn try_from(v: u32) -> Result<Self, String> {
        IntWidth::from_bits(v).ok_or_else(|| format!("unsupported int width {v} (expected 8, 16 or 32)"))
    }
}

impl From<IntWidth> for u32 {
    fn from(w: IntWidth) -> u32 {
        w.bits()
    }
}

impl fmt::Display for IntWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{loc}: syntax error: {message}{}", fmt_expected(.expected))]
    Syntax {
        loc: Location,
        message: String,
        expected: Vec<String>,
    },
    #[error("{loc}: unknown identifier `{name}`")]
    UnknownIdentifier { name: String, loc: Location },
    #[error("{loc}: `{name}` expects {expected} argument(s), found {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
        loc: Location,
    },
    #[error("{loc}: type mismatch: {message}")]
    TypeMismatch { message: String, loc: Location },
    #[error("{loc}: duplicate definition of `{name}`")]
    DuplicateDefinition { name: String, loc: Location },
    #[error("{loc}: function `{name}` may reach its end without returning a value")]
    MissingReturn { name: String, loc: Location },
    #[error("{loc}: literal {value} does not fit in a {width}-bit int")]
    LiteralOutOfRange {
        value: i128,
        width: IntWidth,
        loc: Location,
    },
    #[error("{loc}: `{name}` is reserved")]
    ReservedName { name: String, loc: Location },
    #[error("no node with id {0}")]
    UnknownNode(NodeId),
}

fn fmt_expected(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

impl FrontendError {
    pub fn location(&self) -> Option<Location> {
        match self {
            FrontendError::Syntax { loc, .. }
            | FrontendError::UnknownIdentifier { loc, .. }
            | FrontendError::ArityMismatch { loc, .. }
            | FrontendError::TypeMismatch { loc, .. }
            | FrontendError::DuplicateDefinition { loc, .. }
            | FrontendError::MissingReturn { loc, .. }
            | FrontendError::LiteralOutOfRange { loc, .. }
            | FrontendError::ReservedName { loc, .. } => Some(*loc),
            FrontendError::UnknownNode(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub params: Vec<String>,
    pub ret: RetType,
}

/// Where a node lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeInfo {
    pub function: usize,
    /// Innermost statement containing the node (the node itself for statements;
    /// the function id for functions).
    pub stmt: NodeId,
    pub loc: Location,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Function,
    Stmt,
    Expr,
}

/// A resolved program: names bound, arities and types checked, integer
/// literals validated against the configured width.
#[derive(Debug, Clone)]
pub struct TypedProgram {
    pub program: Program,
    pub width: IntWidth,
    /// `main` when defined.
    pub entry: Option<String>,
    signatures: BTreeMap<String, Signature>,
    nodes: BTreeMap<NodeId, NodeInfo>,
}

impl TypedProgram {
    pub fn functions(&self) -> &[FunctionDef] {
        &self.program.functions
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.program.function(name)
    }

    pub fn signature(&self, name: &str) -> Option<&Signature> {
        self.signatures.get(name)
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeInfo> {
        self.nodes.get(&id)
    }

    pub fn host_of(&self, id: NodeId) -> Option<&FunctionDef> {
        self.nodes.get(&id).map(|n| &self.program.functions[n.function])
    }

    pub fn find_expr(&self, id: NodeId) -> Option<&Expr> {
        let f = self.host_of(id)?;
        let mut found = None;
        walk_exprs(&f.body, &mut |_, e| {
            if e.id == id {
                found = Some(e);
            }
        });
        found
    }

    pub fn find_stmt(&self, id: NodeId) -> Option<&Stmt> {
        let f = self.host_of(id)?;
        let mut found = None;
        for s in &f.body {
            s.walk(&mut |st| {
                if st.id == id {
                    found = Some(st);
                }
            });
        }
        found
    }

    /// Value of a literal-like expression (`5`, `-5`, `INT_MIN`).
    pub fn literal_value(&self, e: &Expr) -> Option<i128> {
        match e.kind {
            ExprKind::Int(v) => Some(v),
            ExprKind::Const(b) => Some(self.width.builtin(b)),
            _ => None,
        }
    }
}
