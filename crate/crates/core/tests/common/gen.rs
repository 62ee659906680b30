//! Seeded generators of well-formed MiniC programs.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const LITERALS: &[&str] = &["0", "1", "2", "3", "-1", "7", "100", "127", "INT_MAX", "INT_MIN"];

struct Fn {
    name: String,
    arity: usize,
}

struct Body<'r> {
    rng: &'r mut ChaCha8Rng,
    callable: &'r [Fn],
    next: usize,
    /// Readable variables, innermost scope last.
    scopes: Vec<Vec<String>>,
    /// Locals that may be assigned.
    locals: Vec<Vec<String>>,
    loops: usize,
}

impl Body<'_> {
    fn fresh(&mut self, prefix: &str) -> String {
        self.next += 1;
        format!("{prefix}{}", self.next)
    }

    fn readable(&self) -> Vec<String> {
        self.scopes.iter().flatten().cloned().collect()
    }

    fn leaf(&mut self) -> String {
        let vars = self.readable();
        if !vars.is_empty() && self.rng.gen_bool(0.65) {
            vars.choose(&mut *self.rng).unwrap().clone()
        } else {
            LITERALS.choose(&mut *self.rng).unwrap().to_string()
        }
    }

    fn expr(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.leaf();
        }
        match self.rng.gen_range(0..20) {
            0..=8 => {
                let op = ["+", "-", "*", "/", "%", "+", "-", "/", "*"][self.rng.gen_range(0..9)];
                format!("({} {op} {})", self.expr(depth - 1), self.expr(depth - 1))
            }
            9..=11 => {
                let op = ["<", "<=", ">", ">=", "==", "!="].choose(&mut *self.rng).unwrap();
                format!("({} {op} {})", self.expr(depth - 1), self.expr(depth - 1))
            }
            12 => format!("({} && {})", self.expr(depth - 1), self.expr(depth - 1)),
            13 => format!("({} || {})", self.expr(depth - 1), self.expr(depth - 1)),
            14 | 15 => format!("-{}", self.paren(depth - 1)),
            16 => format!("!{}", self.paren(depth - 1)),
            _ if !self.callable.is_empty() => {
                let f = self.callable.choose(&mut *self.rng).unwrap();
                let (name, arity) = (f.name.clone(), f.arity);
                let args: Vec<String> = (0..arity).map(|_| self.expr(depth - 1)).collect();
                format!("{name}({})", args.join(", "))
            }
            _ => self.leaf(),
        }
    }

    fn paren(&mut self, depth: u32) -> String {
        let e = self.expr(depth);
        if e.starts_with('(') || !e.starts_with('-') {
            e
        } else {
            format!("({e})")
        }
    }

    fn cond(&mut self) -> String {
        let op = ["<", "<=", ">", ">=", "==", "!="].choose(&mut *self.rng).unwrap();
        format!("{} {op} {}", self.expr(1), self.expr(1))
    }

    fn stmts(&mut self, n: usize, depth: u32, ret: bool, out: &mut Vec<String>, indent: usize) {
        for _ in 0..n {
            self.stmt(depth, ret, out, indent);
        }
    }

    fn stmt(&mut self, depth: u32, ret: bool, out: &mut Vec<String>, indent: usize) {
        let pad = "  ".repeat(indent);
        let assignable: Vec<String> = self.locals.iter().flatten().cloned().collect();
        match self.rng.gen_range(0..14) {
            0..=4 => {
                let e = self.expr(2);
                let v = self.fresh("v");
                out.push(format!("{pad}int {v} = {e};"));
                self.scopes.last_mut().unwrap().push(v.clone());
                self.locals.last_mut().unwrap().push(v);
            }
            5 | 6 if !assignable.is_empty() => {
                let v = assignable.choose(&mut *self.rng).unwrap().clone();
                let e = self.expr(2);
                out.push(format!("{pad}{v} = {e};"));
            }
            7 | 8 if depth > 0 => {
                out.push(format!("{pad}if ({}) {{", self.cond()));
                self.nested(depth, ret, out, indent);
                if self.rng.gen_bool(0.5) {
                    out.push(format!("{pad}}} else {{"));
                    self.nested(depth, ret, out, indent);
                }
                out.push(format!("{pad}}}"));
            }
            9 if depth > 0 && self.loops < 2 => {
                self.loops += 1;
                let i = self.fresh("i");
                let bound = match self.rng.gen_range(0..4) {
                    0 => self.readable().choose(&mut *self.rng).cloned().unwrap_or_else(|| "3".into()),
                    n => (n + 1).to_string(),
                };
                out.push(format!("{pad}int {i} = 0;"));
                out.push(format!("{pad}while ({i} < {bound}) {{"));
                self.scopes.push(vec![]);
                self.locals.push(vec![]);
                let n = self.rng.gen_range(1..3);
                self.stmts(n, depth - 1, ret, out, indent + 1);
                self.scopes.pop();
                self.locals.pop();
                out.push(format!("{pad}  {i} = {i} + 1;"));
                out.push(format!("{pad}}}"));
                self.scopes.last_mut().unwrap().push(i);
            }
            10 if !self.callable.is_empty() => {
                let e = self.expr(2);
                let f = self.callable.choose(&mut *self.rng).unwrap();
                let args: Vec<String> = (0..f.arity).map(|i| if i == 0 { e.clone() } else { self.leaf() }).collect();
                out.push(format!("{pad}{}({});", f.name, args.join(", ")));
            }
            11 if ret && depth < 2 => {
                let e = self.expr(2);
                out.push(format!("{pad}return {e};"));
            }
            _ => {
                let e = self.expr(2);
                let v = self.fresh("v");
                out.push(format!("{pad}int {v} = {e};"));
                self.scopes.last_mut().unwrap().push(v.clone());
                self.locals.last_mut().unwrap().push(v);
            }
        }
    }

    fn nested(&mut self, depth: u32, ret: bool, out: &mut Vec<String>, indent: usize) {
        self.scopes.push(vec![]);
        self.locals.push(vec![]);
        let n = self.rng.gen_range(1..3);
        self.stmts(n, depth - 1, ret, out, indent + 1);
        self.scopes.pop();
        self.locals.pop();
    }
}

/// A program of up to four helpers and a `void main` with up to two
/// parameters. Helpers call only earlier helpers, so there is no recursion.
pub fn program(rng: &mut ChaCha8Rng) -> String {
    let nfun = rng.gen_range(0..=3);
    let mut fns: Vec<Fn> = Vec::new();
    let mut out = Vec::new();
    for k in 0..nfun {
        let arity = rng.gen_range(1..=2);
        let params: Vec<String> = (0..arity).map(|i| format!("p{i}")).collect();
        let mut body = Vec::new();
        let mut b = Body {
            rng,
            callable: &fns,
            next: 0,
            scopes: vec![params.clone()],
            locals: vec![vec![]],
            loops: 0,
        };
        let n = b.rng.gen_range(1..4);
        b.stmts(n, 2, true, &mut body, 1);
        let e = b.expr(2);
        body.push(format!("  return {e};"));
        let name = format!("f{k}");
        out.push(format!(
            "int {name}({}) {{\n{}\n}}\n",
            params.iter().map(|p| format!("int {p}")).collect::<Vec<_>>().join(", "),
            body.join("\n")
        ));
        fns.push(Fn { name, arity });
    }
    let arity = *[0usize, 1, 1, 1, 2].choose(rng).unwrap();
    let params: Vec<String> = ["a", "b"][..arity].iter().map(|s| s.to_string()).collect();
    let mut body = Vec::new();
    let mut b = Body {
        rng,
        callable: &fns,
        next: 0,
        scopes: vec![params.clone()],
        locals: vec![vec![]],
        loops: 0,
    };
    let n = b.rng.gen_range(1..5);
    b.stmts(n, 2, false, &mut body, 1);
    for f in &fns {
        if b.rng.gen_bool(0.5) {
            let args: Vec<String> = (0..f.arity).map(|_| b.leaf()).collect();
            body.push(format!("  {}({});", f.name, args.join(", ")));
        }
    }
    out.push(format!(
        "void main({}) {{\n{}\n}}\n",
        params.iter().map(|p| format!("int {p}")).collect::<Vec<_>>().join(", "),
        body.join("\n")
    ));
    out.join("\n")
}

/// A star: `main(int x)` calls ten helpers and guards a division whose
/// divisor depends on exactly one of them.
pub struct Star {
    pub source: String,
    pub callees: Vec<String>,
    pub dependent: String,
}

const STAR_BODIES: &[&str] = &[
    "return p;",
    "if (p < 0) return 0; return p;",
    "int t = p / 2; return t;",
    "return 3;",
    "if (p == 5) return 0; return 1;",
];

/// Replacement bodies for callees whose bodies are left out of a slice.
pub const TRIVIAL_BODIES: &[&str] = &["return 0;", "return 1;", "return p;", "return -7;"];

pub fn star(rng: &mut ChaCha8Rng) -> Star {
    let callees: Vec<String> = (0..10).map(|i| format!("c{i}")).collect();
    let d = rng.gen_range(0..10);
    let mut out = Vec::new();
    for c in &callees {
        let body = STAR_BODIES.choose(rng).unwrap();
        out.push(format!("int {c}(int p) {{ {body} }}"));
    }
    let mut main = vec![];
    for (i, c) in callees.iter().enumerate() {
        let arg = ["x", "1", "x / 3"].choose(rng).unwrap();
        main.push(format!("  int r{i} = {c}({arg});"));
    }
    let divisor = format!("r{d}");
    match rng.gen_range(0..3) {
        0 => main.push(format!("  int t = 100 / {divisor};")),
        1 => {
            main.push(format!("  int s = {divisor};"));
            main.push("  int t = 100 / s;".into());
        }
        _ => {
            main.push(format!("  if ({divisor} != 1) {{"));
            main.push("    int t = 100 / x;".into());
            main.push("  }".into());
        }
    }
    main[..10].shuffle(rng);
    out.push(format!("void main(int x) {{\n{}\n}}", main.join("\n")));
    Star {
        source: out.join("\n") + "\n",
        dependent: callees[d].clone(),
        callees,
    }
}

/// `star.source` with every callee in `replace` given `body`.
pub fn replace_bodies(star: &Star, replace: &[String], body: &str) -> String {
    star.source
        .lines()
        .map(|l| {
            for c in replace {
                if l.starts_with(&format!("int {c}(int p)")) {
                    return format!("int {c}(int p) {{ {body} }}");
                }
            }
            l.to_string()
        })
        .collect::<Vec<_>>()
        .join("\n")
}
