//! Pretty-printer. Output re-parses to the same tree; annotations are
//! emitted as `/*@ ... */` comments on the line above their anchor.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::*;
use crate::specs::Clause;

#[derive(Debug, Clone, Default)]
pub struct RenderOptions {
    /// Restrict output to these functions (in program order).
    pub only: Option<Vec<String>>,
    /// Emit a `// loop [f#k]` marker above every loop.
    pub loop_labels: bool,
}

pub fn render(program: &Program, annotations: &[(NodeId, Clause)]) -> Result<String, FrontendError> {
    render_with(program, annotations, &RenderOptions::default())
}

pub fn render_with(
    program: &Program,
    annotations: &[(NodeId, Clause)],
    opts: &RenderOptions,
) -> Result<String, FrontendError> {
    // Map every node to the function or statement it is printed with.
    let mut anchor_of: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for f in &program.functions {
        anchor_of.insert(f.id, f.id);
        for s in &f.body {
            s.walk(&mut |st| {
                anchor_of.insert(st.id, st.id);
                for e in st.own_exprs() {
                    e.walk(&mut |x| {
                        anchor_of.insert(x.id, st.id);
                    });
                }
            });
        }
    }
    let mut notes: BTreeMap<NodeId, Vec<String>> = BTreeMap::new();
    for (id, clause) in annotations {
        let anchor = anchor_of.get(id).ok_or(FrontendError::UnknownNode(*id))?;
        notes.entry(*anchor).or_default().push(clause.to_string());
    }

    let only: Option<BTreeSet<&str>> = opts
        .only
        .as_ref()
        .map(|v| v.iter().map(String::as_str).collect());
    let mut r = Renderer {
        out: String::new(),
        notes: &notes,
        loop_labels: opts.loop_labels,
        function: String::new(),
        loop_counter: 0,
    };
    let mut first = true;
    for f in &program.functions {
        if let Some(only) = &only {
            if !only.contains(f.name.as_str()) {
                continue;
            }
        }
        if !first {
            r.out.push('\n');
        }
        first = false;
        r.function(f);
    }
    Ok(r.out)
}

struct Renderer<'a> {
    out: String,
    notes: &'a BTreeMap<NodeId, Vec<String>>,
    loop_labels: bool,
    function: String,
    loop_counter: usize,
}

impl Renderer<'_> {
    fn indent(&mut self, depth: usize) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
    }

    fn notes_for(&mut self, id: NodeId, depth: usize) {
        if let Some(ns) = self.notes.get(&id) {
            for n in ns {
                self.indent(depth);
                let _ = writeln!(self.out, "/*@ {n} */");
            }
        }
    }

    fn function(&mut self, f: &FunctionDef) {
        self.function = f.name.clone();
        self.loop_counter = 0;
        self.notes_for(f.id, 0);
        let ret = match f.ret {
            RetType::Int => "int",
            RetType::Void => "void",
        };
        let params: Vec<String> = f.params.iter().map(|p| format!("int {}", p.name)).collect();
        let _ = writeln!(self.out, "{ret} {}({}) {{", f.name, params.join(", "));
        for s in &f.body {
            self.stmt(s, 1);
        }
        self.out.push_str("}\n");
    }

    /// Render a statement that starts on a fresh line.
    fn stmt(&mut self, s: &Stmt, depth: usize) {
        self.notes_for(s.id, depth);
        if self.loop_labels && matches!(s.kind, StmtKind::While { .. }) {
            self.loop_counter += 1;
            self.indent(depth);
            let _ = writeln!(self.out, "// loop [{}#{}]", self.function, self.loop_counter);
        }
        self.indent(depth);
        self.stmt_body(s, depth);
    }

    /// Render the statement text after indentation has been written.
    fn stmt_body(&mut self, s: &Stmt, depth: usize) {
        match &s.kind {
            StmtKind::Decl { name, init } => {
                let _ = writeln!(self.out, "int {name} = {};", expr_to_string(init));
            }
            StmtKind::Assign { name, value } => {
                let _ = writeln!(self.out, "{name} = {};", expr_to_string(value));
            }
            StmtKind::Return(None) => self.out.push_str("return;\n"),
            StmtKind::Return(Some(e)) => {
                let _ = writeln!(self.out, "return {};", expr_to_string(e));
            }
            StmtKind::Expr(e) => {
                let _ = writeln!(self.out, "{};", expr_to_string(e));
            }
            StmtKind::Block(b) => {
                self.out.push_str("{\n");
                for st in b {
                    self.stmt(st, depth + 1);
                }
                self.indent(depth);
                self.out.push_str("}\n");
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let _ = write!(self.out, "if ({})", expr_to_string(cond));
                let then_block = self.branch(then_branch, depth);
                if let Some(e) = else_branch {
                    if then_block {
                        self.out.push_str(" else");
                    } else {
                        self.indent(depth);
                        self.out.push_str("else");
                    }
                    if self.branch(e, depth) {
                        self.out.push('\n');
                    }
                } else if then_block {
                    self.out.push('\n');
                }
            }
            StmtKind::While { cond, body } => {
                let _ = write!(self.out, "while ({})", expr_to_string(cond));
                if self.branch(body, depth) {
                    self.out.push('\n');
                }
            }
        }
    }

    /// Render a branch body after `if (..)`/`else`/`while (..)`. Returns true
    /// when it was an unannotated block whose closing brace is left open on the
    /// current line.
    fn branch(&mut self, s: &Stmt, depth: usize) -> bool {
        match &s.kind {
            StmtKind::Block(b) if !self.notes.contains_key(&s.id) => {
                self.out.push_str(" {\n");
                for st in b {
                    self.stmt(st, depth + 1);
                }
                self.indent(depth);
                self.out.push('}');
                true
            }
            _ => {
                self.out.push('\n');
                self.stmt(s, depth + 1);
                false
            }
        }
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

fn write_expr(out: &mut String, e: &Expr, parent_prec: u8) {
    match &e.kind {
        ExprKind::Int(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::Const(b) => out.push_str(b.name()),
        ExprKind::Var(v) => out.push_str(v),
        ExprKind::Unary(op, a) => {
            out.push_str(match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            });
            let needs_parens = match &a.kind {
                ExprKind::Binary(..) => true,
                // `-5` would re-parse as a literal, `--x` does not lex.
                ExprKind::Int(_) => *op == UnOp::Neg,
                ExprKind::Unary(UnOp::Neg, _) => *op == UnOp::Neg,
                _ => false,
            };
            if needs_parens {
                out.push('(');
                write_expr(out, a, 0);
                out.push(')');
            } else {
                write_expr(out, a, 7);
            }
        }
        ExprKind::Binary(op, a, b) => {
            let prec = op.precedence();
            let parens = prec < parent_prec;
            if parens {
                out.push('(');
            }
            write_expr(out, a, prec);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, b, prec + 1);
            if parens {
                out.push(')');
            }
        }
        ExprKind::Call { callee, args } => {
            out.push_str(callee);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0);
            }
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specs::parse_clause;

    const ID_C: &str = "int id(int x) {return x;}\n\nvoid one() {\n  int x = id(1);\n  1/x;\n}\nvoid zero() {\n  id(0);\n}\nvoid main() {\n  one(); zero();\n}\n";

    #[test]
    fn plain_render_round_trips() {
        let p = parse(ID_C).unwrap();
        let text = render(&p, &[]).unwrap();
        let q = parse(&text).unwrap();
        assert_eq!(strip_locations(&p), strip_locations(&q));
        // and is a fixed point
        assert_eq!(render(&q, &[]).unwrap(), text);
    }

    #[test]
    fn requires_appears_above_function() {
        let src = "int abs(int x) { if (x < 0) return -x; else return x; }\nvoid main() { int a = abs(42); int b = abs(INT_MIN); }";
        let p = parse(src).unwrap();
        let abs = p.functions[0].id;
        let text = render(&p, &[(abs, parse_clause("requires INT_MIN < x;").unwrap())]).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "/*@ requires INT_MIN < x; */");
        assert_eq!(lines[1], "int abs(int x) {");
        assert_eq!(lines[2], "  if (x < 0)");
        assert_eq!(lines[3], "    return -x;");
        assert_eq!(lines[4], "  else");
        assert!(text.contains("int b = abs(INT_MIN);"));
        assert_eq!(strip_locations(&parse(&text).unwrap()), strip_locations(&p));
    }

    #[test]
    fn ensures_layout_for_identity() {
        let p = parse(ID_C).unwrap();
        let text = render(
            &p,
            &[(p.functions[0].id, parse_clause("ensures \\result == x;").unwrap())],
        )
        .unwrap();
        assert!(text.starts_with("/*@ ensures \\result == x; */\nint id(int x) {\n  return x;\n}\n"));
    }

    #[test]
    fn expression_anchor_goes_to_statement() {
        let p = parse(ID_C).unwrap();
        let one = &p.functions[1];
        let StmtKind::Expr(div) = &one.body[1].kind else {
            panic!()
        };
        let text = render(&p, &[(div.id, parse_clause("assert x != 0;").unwrap())]).unwrap();
        assert!(text.contains("  int x = id(1);\n  /*@ assert x != 0; */\n  1 / x;\n"), "{text}");
    }

    #[test]
    fn unknown_anchor_is_an_error() {
        let p = parse(ID_C).unwrap();
        let err = render(&p, &[(NodeId(9999), parse_clause("assert \\true;").unwrap())]).unwrap_err();
        assert_eq!(err, FrontendError::UnknownNode(NodeId(9999)));
    }

    #[test]
    fn tricky_expressions_round_trip() {
        let src = "int f(int a, int b) { int c = -(5) - -3 - (a - b) + -(-a) + !(a < b) * (b % 2); \
                   if (a) { if (b) c = 1; else c = 2; } else if (b) { c = 3; } while (c < 3) c = c + 1; return c; }";
        let p = parse(src).unwrap();
        let text = render(&p, &[]).unwrap();
        assert_eq!(strip_locations(&parse(&text).unwrap()), strip_locations(&p), "{text}");
    }

    #[test]
    fn loop_labels_and_subset() {
        let p = parse("int f(int n) { int i = 0; while (i < n) i = i + 1; return i; } void main() { f(1); }").unwrap();
        let text = render_with(
            &p,
            &[],
            &RenderOptions {
                only: Some(vec!["f".into()]),
                loop_labels: true,
            },
        )
        .unwrap();
        assert!(text.contains("// loop [f#1]\n  while (i < n)"));
        assert!(!text.contains("main"));
    }
}
