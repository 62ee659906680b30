//! Recursive-descent parser for MiniC.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::FrontendError;

const KEYWORDS: &[&str] = &["int", "void", "if", "else", "while", "return"];
const UNSUPPORTED: &[&str] = &[
    "for", "do", "switch", "break", "continue", "goto", "char", "long", "short", "unsigned",
    "signed", "float", "double", "struct", "union", "enum", "static", "extern", "const",
];

pub fn parse(source: &str) -> Result<Program, FrontendError> {
    parse_named("<input>", source)
}

pub fn parse_named(file: &str, source: &str) -> Result<Program, FrontendError> {
    let toks = tokenize(source, true).map_err(|e| FrontendError::Syntax {
        loc: e.loc,
        message: e.message,
        expected: vec![],
    })?;
    let mut p = Parser { toks, pos: 0 };
    let mut functions = Vec::new();
    while !p.at_eof() {
        functions.push(p.function()?);
    }
    let mut program = Program {
        file: file.to_string(),
        functions,
    };
    number_nodes(&mut program);
    Ok(program)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

const PLACEHOLDER: NodeId = NodeId(0);

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn loc(&self) -> Location {
        self.toks[self.pos].loc
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, FrontendError> {
        let found = self.peek();
        let message = match found {
            Tok::Ident(s) if UNSUPPORTED.contains(&s.as_str()) => {
                format!("`{s}` is not part of MiniC")
            }
            _ => format!("unexpected {}", found.describe()),
        };
        Err(FrontendError::Syntax {
            loc: self.loc(),
            message,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), FrontendError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.error(&[&format!("`{p}`")])
        }
    }

    fn expect_keyword(&mut self, k: &str) -> Result<(), FrontendError> {
        if self.is_keyword(k) {
            self.advance();
            Ok(())
        } else {
            self.error(&[&format!("`{k}`")])
        }
    }

    fn ident(&mut self) -> Result<String, FrontendError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.advance();
                Ok(s)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn function(&mut self) -> Result<FunctionDef, FrontendError> {
        let loc = self.loc();
        let ret = if self.is_keyword("int") {
            RetType::Int
        } else if self.is_keyword("void") {
            RetType::Void
        } else {
            return self.error(&["`int`", "`void`"]);
        };
        self.advance();
        let name = self.ident()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if self.is_keyword("void") && matches!(self.peek_at(1), Tok::Punct(")")) {
            self.advance();
        } else if !self.is_punct(")") {
            loop {
                self.expect_keyword("int")?;
                let ploc = self.loc();
                params.push(Param {
                    name: self.ident()?,
                    loc: ploc,
                });
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        self.expect_punct("{")?;
        let body = self.stmts_until_brace()?;
        Ok(FunctionDef {
            id: PLACEHOLDER,
            loc,
            name,
            ret,
            params,
            body,
        })
    }

    fn stmts_until_brace(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        let mut out = Vec::new();
        while !self.is_punct("}") {
            if self.at_eof() {
                return self.error(&["`}`"]);
            }
            out.push(self.stmt()?);
        }
        self.advance();
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Stmt, FrontendError> {
        let loc = self.loc();
        if matches!(self.peek(), Tok::Ident(s) if UNSUPPORTED.contains(&s.as_str())) {
            return self.error(&["statement"]);
        }
        let kind = if self.eat_punct("{") {
            StmtKind::Block(self.stmts_until_brace()?)
        } else if self.is_keyword("int") {
            self.advance();
            let name = self.ident()?;
            if !self.is_punct("=") {
                return self.error(&["`=` (declarations need an initializer)"]);
            }
            self.advance();
            let init = self.expr()?;
            self.expect_punct(";")?;
            StmtKind::Decl { name, init }
        } else if self.is_keyword("if") {
            self.advance();
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let then_branch = Box::new(self.stmt()?);
            let else_branch = if self.is_keyword("else") {
                self.advance();
                Some(Box::new(self.stmt()?))
            } else {
                None
            };
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            }
        } else if self.is_keyword("while") {
            self.advance();
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let body = Box::new(self.stmt()?);
            StmtKind::While { cond, body }
        } else if self.is_keyword("return") {
            self.advance();
            if self.eat_punct(";") {
                StmtKind::Return(None)
            } else {
                let e = self.expr()?;
                self.expect_punct(";")?;
                StmtKind::Return(Some(e))
            }
        } else if matches!(self.peek(), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()))
            && matches!(self.peek_at(1), Tok::Punct("="))
        {
            let name = self.ident()?;
            self.advance();
            let value = self.expr()?;
            self.expect_punct(";")?;
            StmtKind::Assign { name, value }
        } else {
            let e = match self.expr() {
                Ok(e) => e,
                Err(_) => {
                    return self.error(&[
                        "statement", "`{`", "`int`", "`if`", "`while`", "`return`", "expression",
                    ])
                }
            };
            self.expect_punct(";")?;
            StmtKind::Expr(e)
        };
        Ok(Stmt {
            id: PLACEHOLDER,
            loc,
            kind,
        })
    }

    fn expr(&mut self) -> Result<Expr, FrontendError> {
        self.binary(1)
    }

    fn binop_here(&self) -> Option<BinOp> {
        let Tok::Punct(p) = self.peek() else {
            return None;
        };
        Some(match *p {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Rem,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "&&" => BinOp::And,
            "||" => BinOp::Or,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, FrontendError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop_here() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let loc = self.loc();
            self.advance();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr {
                id: PLACEHOLDER,
                loc,
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, FrontendError> {
        let loc = self.loc();
        if self.is_punct("-") {
            self.advance();
            // `-5` is a literal, not a negation.
            if let Tok::Int(v) = *self.peek() {
                self.advance();
                return Ok(Expr {
                    id: PLACEHOLDER,
                    loc,
                    kind: ExprKind::Int(-literal(v, loc)?),
                });
            }
            let inner = self.unary()?;
            return Ok(Expr {
                id: PLACEHOLDER,
                loc,
                kind: ExprKind::Unary(UnOp::Neg, Box::new(inner)),
            });
        }
        if self.eat_punct("!") {
            let inner = self.unary()?;
            return Ok(Expr {
                id: PLACEHOLDER,
                loc,
                kind: ExprKind::Unary(UnOp::Not, Box::new(inner)),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        let loc = self.loc();
        let kind = match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                ExprKind::Int(literal(v, loc)?)
            }
            Tok::Punct("(") => {
                self.advance();
                let e = self.expr()?;
                self.expect_punct(")")?;
                return Ok(e);
            }
            Tok::Ident(s) if s == "INT_MIN" => {
                self.advance();
                ExprKind::Const(Builtin::IntMin)
            }
            Tok::Ident(s) if s == "INT_MAX" => {
                self.advance();
                ExprKind::Const(Builtin::IntMax)
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.advance();
                if self.eat_punct("(") {
                    let mut args = Vec::new();
                    if !self.is_punct(")") {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    self.expect_punct(")")?;
                    ExprKind::Call { callee: s, args }
                } else {
                    ExprKind::Var(s)
                }
            }
            _ => return self.error(&["expression"]),
        };
        Ok(Expr {
            id: PLACEHOLDER,
            loc,
            kind,
        })
    }
}

fn literal(v: u128, loc: Location) -> Result<i128, FrontendError> {
    i128::try_from(v).map_err(|_| FrontendError::Syntax {
        loc,
        message: "integer literal too large".into(),
        expected: vec![],
    })
}

/// Assign pre-order node ids: function, then its statements, each statement
/// before its expressions, each expression before its operands.
pub(crate) fn number_nodes(p: &mut Program) {
    fn expr(e: &mut Expr, next: &mut u32) {
        e.id = NodeId(*next);
        *next += 1;
        match &mut e.kind {
            ExprKind::Unary(_, a) => expr(a, next),
            ExprKind::Binary(_, a, b) => {
                expr(a, next);
                expr(b, next);
            }
            ExprKind::Call { args, .. } => args.iter_mut().for_each(|a| expr(a, next)),
            _ => {}
        }
    }
    fn stmt(s: &mut Stmt, next: &mut u32) {
        s.id = NodeId(*next);
        *next += 1;
        match &mut s.kind {
            StmtKind::Decl { init: e, .. }
            | StmtKind::Assign { value: e, .. }
            | StmtKind::Expr(e)
            | StmtKind::Return(Some(e)) => expr(e, next),
            StmtKind::Return(None) => {}
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                expr(cond, next);
                stmt(then_branch, next);
                if let Some(e) = else_branch {
                    stmt(e, next);
                }
            }
            StmtKind::While { cond, body } => {
                expr(cond, next);
                stmt(body, next);
            }
            StmtKind::Block(b) => b.iter_mut().for_each(|s| stmt(s, next)),
        }
    }
    let mut next = 1u32;
    for f in &mut p.functions {
        f.id = NodeId(next);
        next += 1;
        for s in &mut f.body {
            stmt(s, &mut next);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const ABS_C: &str = "#include <limits.h>\nint abs(int x) {\n  if (x < 0)\n    return -x;\n  else\n    return x;\n}\nvoid main() {\n  int a = abs(42);\n  int b = abs(INT_MIN);\n}\n";

    #[test]
    fn parses_abs_example() {
        let p = parse(ABS_C).unwrap();
        let names: Vec<_> = p.functions.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["abs", "main"]);
        assert_eq!(p.functions[0].loc, Location { line: 2, column: 1 });
    }

    #[test]
    fn empty_file_has_no_functions() {
        assert!(parse("").unwrap().functions.is_empty());
    }

    #[test]
    fn malformed_header_reports_line_one() {
        match parse("int f( { }") {
            Err(FrontendError::Syntax { loc, expected, .. }) => {
                assert_eq!(loc.line, 1);
                assert!(!expected.is_empty());
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn negative_literal_folds() {
        let p = parse("int f() { return -5 - -(3); }").unwrap();
        let StmtKind::Return(Some(e)) = &p.functions[0].body[0].kind else {
            panic!()
        };
        let ExprKind::Binary(BinOp::Sub, l, r) = &e.kind else {
            panic!()
        };
        assert_eq!(l.kind, ExprKind::Int(-5));
        assert!(matches!(r.kind, ExprKind::Unary(UnOp::Neg, _)));
    }

    #[test]
    fn node_ids_are_preorder_and_deterministic() {
        let a = parse(ABS_C).unwrap();
        let b = parse(ABS_C).unwrap();
        assert_eq!(a, b);
        let mut ids = Vec::new();
        for f in &a.functions {
            ids.push(f.id);
            for s in &f.body {
                s.walk(&mut |st| ids.push(st.id));
            }
        }
        assert_eq!(ids[0], NodeId(1));
        assert!(ids.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn precedence_and_associativity() {
        let p = parse("int f(int a, int b) { return a - b - 1 * 2 < 3 && !b; }").unwrap();
        let StmtKind::Return(Some(e)) = &p.functions[0].body[0].kind else {
            panic!()
        };
        let ExprKind::Binary(BinOp::And, lhs, _) = &e.kind else {
            panic!("{e:?}")
        };
        let ExprKind::Binary(BinOp::Lt, sub, _) = &lhs.kind else {
            panic!()
        };
        let ExprKind::Binary(BinOp::Sub, inner, _) = &sub.kind else {
            panic!()
        };
        assert!(matches!(inner.kind, ExprKind::Binary(BinOp::Sub, _, _)));
    }

    #[test]
    fn rejects_unsupported_constructs() {
        let err = parse("int f() { for (;;) {} }").unwrap_err();
        assert!(err.to_string().contains("not part of MiniC"), "{err}");
        assert!(parse("int f() { int x; return x; }").is_err());
    }
}
