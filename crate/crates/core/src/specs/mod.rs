//! Specification language: a quantifier-free ACSL subset over integer terms.
//!
//! Predicates are interpreted over mathematical integers. Program variables
//! are implicitly bounded by the configured [`IntWidth`] wherever a
//! predicate is checked.

mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::frontend::{IntWidth, NodeId};

pub use parse::{parse_clause, parse_predicate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::Rem => "%",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 5,
            ArithOp::Mul | ArithOp::Div | ArithOp::Rem => 6,
        }
    }

    /// Apply with C semantics: truncating division. Division by zero yields 0
    /// for both `/` and `%` so that every term has a value.
    pub fn apply(self, a: i128, b: i128) -> i128 {
        match self {
            ArithOp::Add => a + b,
            ArithOp::Sub => a - b,
            ArithOp::Mul => a * b,
            ArithOp::Div if b == 0 => 0,
            ArithOp::Rem if b == 0 => 0,
            ArithOp::Div => a / b,
            ArithOp::Rem => a % b,
        }
    }

    /// [`ArithOp::apply`] that reports `i128` overflow as `None`.
    pub fn checked_apply(self, a: i128, b: i128) -> Option<i128> {
        match self {
            ArithOp::Add => a.checked_add(b),
            ArithOp::Sub => a.checked_sub(b),
            ArithOp::Mul => a.checked_mul(b),
            _ if b == 0 => Some(0),
            ArithOp::Div => a.checked_div(b),
            ArithOp::Rem => a.checked_rem(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, a: i128, b: i128) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    /// `a op b` iff `b op.swap() a`.
    pub fn swap(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            op => op,
        }
    }
}

/// A symbol that can be substituted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    Var(String),
    Result,
    Old(String),
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::Var(v) => f.write_str(v),
            Sym::Result => f.write_str("\\result"),
            Sym::Old(v) => write!(f, "\\old({v})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(i128),
    IntMin,
    IntMax,
    Var(String),
    Result,
    Old(String),
    Neg(Box<Term>),
    Bin(ArithOp, Box<Term>, Box<Term>),
    /// `(p ? a : b)`
    Ite(Box<Pred>, Box<Term>, Box<Term>),
    /// Value of a program call; appears only in guard assertions printed for
    /// humans and is never produced by the clause parser.
    Call(String, Vec<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pred {
    True,
    False,
    Cmp(CmpOp, Term, Term),
    Not(Box<Pred>),
    And(Vec<Pred>),
    Or(Vec<Pred>),
    Implies(Box<Pred>, Box<Pred>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn bin(op: ArithOp, a: Term, b: Term) -> Term {
        Term::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn neg(a: Term) -> Term {
        Term::Neg(Box::new(a))
    }

    pub fn sym(s: &Sym) -> Term {
        match s {
            Sym::Var(v) => Term::Var(v.clone()),
            Sym::Result => Term::Result,
            Sym::Old(v) => Term::Old(v.clone()),
        }
    }

    pub fn as_sym(&self) -> Option<Sym> {
        match self {
            Term::Var(v) => Some(Sym::Var(v.clone())),
            Term::Result => Some(Sym::Result),
            Term::Old(v) => Some(Sym::Old(v.clone())),
            _ => None,
        }
    }

    /// Value of a closed term under `width` (for `INT_MIN`/`INT_MAX`).
    pub fn eval(&self, width: IntWidth, env: &dyn Fn(&Sym) -> Option<i128>) -> Option<i128> {
        Some(match self {
            Term::Const(c) => *c,
            Term::IntMin => width.min(),
            Term::IntMax => width.max(),
            Term::Var(_) | Term::Result | Term::Old(_) => env(&self.as_sym()?)?,
            Term::Neg(a) => a.eval(width, env)?.checked_neg()?,
            Term::Bin(op, a, b) => op.checked_apply(a.eval(width, env)?, b.eval(width, env)?)?,
            Term::Ite(c, a, b) => {
                if c.eval(width, env)? {
                    a.eval(width, env)?
                } else {
                    b.eval(width, env)?
                }
            }
            Term::Call(..) => return None,
        })
    }

    pub fn collect_syms(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Term::Const(_) | Term::IntMin | Term::IntMax => {}
            Term::Var(_) | Term::Result | Term::Old(_) => {
                out.insert(self.as_sym().unwrap());
            }
            Term::Neg(a) => a.collect_syms(out),
            Term::Bin(_, a, b) => {
                a.collect_syms(out);
                b.collect_syms(out);
            }
            Term::Ite(c, a, b) => {
                c.collect_syms(out);
                a.collect_syms(out);
                b.collect_syms(out);
            }
            Term::Call(_, args) => args.iter().for_each(|a| a.collect_syms(out)),
        }
    }

    pub fn is_ground(&self) -> bool {
        let mut s = BTreeSet::new();
        self.collect_syms(&mut s);
        s.is_empty()
    }

    pub fn substitute(&self, bindings: &BTreeMap<Sym, Term>) -> Term {
        match self {
            Term::Var(_) | Term::Result | Term::Old(_) => {
                let s = self.as_sym().unwrap();
                bindings.get(&s).cloned().unwrap_or_else(|| self.clone())
            }
            Term::Const(_) | Term::IntMin | Term::IntMax => self.clone(),
            Term::Neg(a) => Term::neg(a.substitute(bindings)),
            Term::Bin(op, a, b) => Term::bin(*op, a.substitute(bindings), b.substitute(bindings)),
            Term::Ite(c, a, b) => Term::Ite(
                Box::new(c.substitute(bindings)),
                Box::new(a.substitute(bindings)),
                Box::new(b.substitute(bindings)),
            ),
            Term::Call(f, args) => Term::Call(f.clone(), args.iter().map(|a| a.substitute(bindings)).collect()),
        }
    }

    /// True when a product, quotient or remainder has two non-constant operands.
    pub fn is_nonlinear(&self) -> bool {
        match self {
            Term::Neg(a) => a.is_nonlinear(),
            Term::Bin(op, a, b) => {
                let here = matches!(op, ArithOp::Mul) && !a.is_ground() && !b.is_ground()
                    || matches!(op, ArithOp::Div | ArithOp::Rem) && !b.is_ground();
                here || a.is_nonlinear() || b.is_nonlinear()
            }
            Term::Ite(c, a, b) => c.is_nonlinear() || a.is_nonlinear() || b.is_nonlinear(),
            Term::Call(_, args) => args.iter().any(Term::is_nonlinear),
            _ => false,
        }
    }

    /// Fold ground subterms to constants.
    pub fn simplify(&self, width: IntWidth) -> Term {
        let t = match self {
            Term::Neg(a) => Term::neg(a.simplify(width)),
            Term::Bin(op, a, b) => Term::bin(*op, a.simplify(width), b.simplify(width)),
            Term::Ite(c, a, b) => match c.simplify(width) {
                Pred::True => return a.simplify(width),
                Pred::False => return b.simplify(width),
                c => Term::Ite(Box::new(c), Box::new(a.simplify(width)), Box::new(b.simplify(width))),
            },
            t => t.clone(),
        };
        if matches!(t, Term::Const(_) | Term::Call(..)) || !t.is_ground() {
            return t;
        }
        match t.eval(width, &|_| None) {
            Some(v) => Term::Const(v),
            None => t,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Term::Bin(op, ..) => op.precedence(),
            Term::Neg(_) => 7,
            Term::Const(c) if *c < 0 => 7,
            _ => 8,
        }
    }
}

impl Pred {
    pub fn cmp(op: CmpOp, a: Term, b: Term) -> Pred {
        Pred::Cmp(op, a, b)
    }

    /// Conjunction, flattening nested conjunctions and dropping `\true`.
    pub fn and(ps: impl IntoIterator<Item = Pred>) -> Pred {
        let mut out = Vec::new();
        for p in ps {
            match p {
                Pred::True => {}
                Pred::False => return Pred::False,
                Pred::And(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Pred::True,
            1 => out.pop().unwrap(),
            _ => Pred::And(out),
        }
    }

    pub fn or(ps: impl IntoIterator<Item = Pred>) -> Pred {
        let mut out = Vec::new();
        for p in ps {
            match p {
                Pred::False => {}
                Pred::True => return Pred::True,
                Pred::Or(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Pred::False,
            1 => out.pop().unwrap(),
            _ => Pred::Or(out),
        }
    }

    pub fn implies(a: Pred, b: Pred) -> Pred {
        match (a, b) {
            (Pred::True, b) => b,
            (Pred::False, _) | (_, Pred::True) => Pred::True,
            (a, b) if a == b => Pred::True,
            (a, b) => Pred::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn not(p: Pred) -> Pred {
        match p {
            Pred::True => Pred::False,
            Pred::False => Pred::True,
            Pred::Not(q) => *q,
            p => Pred::Not(Box::new(p)),
        }
    }

    pub fn eval(&self, width: IntWidth, env: &dyn Fn(&Sym) -> Option<i128>) -> Option<bool> {
        Some(match self {
            Pred::True => true,
            Pred::False => false,
            Pred::Cmp(op, a, b) => op.holds(a.eval(width, env)?, b.eval(width, env)?),
            Pred::Not(p) => !p.eval(width, env)?,
            Pred::And(ps) => {
                for p in ps {
                    if !p.eval(width, env)? {
                        return Some(false);
                    }
                }
                true
            }
            Pred::Or(ps) => {
                for p in ps {
                    if p.eval(width, env)? {
                        return Some(true);
                    }
                }
                false
            }
            Pred::Implies(a, b) => !a.eval(width, env)? || b.eval(width, env)?,
        })
    }

    pub fn collect_syms(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Pred::True | Pred::False => {}
            Pred::Cmp(_, a, b) => {
                a.collect_syms(out);
                b.collect_syms(out);
            }
            Pred::Not(p) => p.collect_syms(out),
            Pred::And(ps) | Pred::Or(ps) => ps.iter().for_each(|p| p.collect_syms(out)),
            Pred::Implies(a, b) => {
                a.collect_syms(out);
                b.collect_syms(out);
            }
        }
    }

    pub fn syms(&self) -> BTreeSet<Sym> {
        let mut s = BTreeSet::new();
        self.collect_syms(&mut s);
        s
    }

    /// Plain variable names occurring in the predicate.
    pub fn vars(&self) -> BTreeSet<String> {
        self.syms()
            .into_iter()
            .filter_map(|s| match s {
                Sym::Var(v) => Some(v),
                _ => None,
            })
            .collect()
    }

    /// Simultaneous substitution. Terms contain no binders, so this is
    /// trivially capture-free.
    pub fn substitute(&self, bindings: &BTreeMap<Sym, Term>) -> Pred {
        if bindings.is_empty() {
            return self.clone();
        }
        match self {
            Pred::True | Pred::False => self.clone(),
            Pred::Cmp(op, a, b) => Pred::Cmp(*op, a.substitute(bindings), b.substitute(bindings)),
            Pred::Not(p) => Pred::Not(Box::new(p.substitute(bindings))),
            Pred::And(ps) => Pred::And(ps.iter().map(|p| p.substitute(bindings)).collect()),
            Pred::Or(ps) => Pred::Or(ps.iter().map(|p| p.substitute(bindings)).collect()),
            Pred::Implies(a, b) => Pred::Implies(
                Box::new(a.substitute(bindings)),
                Box::new(b.substitute(bindings)),
            ),
        }
    }

    pub fn is_nonlinear(&self) -> bool {
        match self {
            Pred::True | Pred::False => false,
            Pred::Cmp(_, a, b) => a.is_nonlinear() || b.is_nonlinear(),
            Pred::Not(p) => p.is_nonlinear(),
            Pred::And(ps) | Pred::Or(ps) => ps.iter().any(Pred::is_nonlinear),
            Pred::Implies(a, b) => a.is_nonlinear() || b.is_nonlinear(),
        }
    }

    /// Fold ground comparisons and propagate `\true`/`\false`.
    pub fn simplify(&self, width: IntWidth) -> Pred {
        match self {
            Pred::True | Pred::False => self.clone(),
            Pred::Cmp(op, a, b) => {
                let (a, b) = (a.simplify(width), b.simplify(width));
                match (&a, &b) {
                    (Term::Const(x), Term::Const(y)) => {
                        if op.holds(*x, *y) {
                            Pred::True
                        } else {
                            Pred::False
                        }
                    }
                    _ if a == b && matches!(op, CmpOp::Eq | CmpOp::Le | CmpOp::Ge) => Pred::True,
                    _ => Pred::Cmp(*op, a, b),
                }
            }
            Pred::Not(p) => Pred::not(p.simplify(width)),
            Pred::And(ps) => Pred::and(ps.iter().map(|p| p.simplify(width))),
            Pred::Or(ps) => Pred::or(ps.iter().map(|p| p.simplify(width))),
            Pred::Implies(a, b) => Pred::implies(a.simplify(width), b.simplify(width)),
        }
    }

    /// Top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&Pred> {
        match self {
            Pred::True => vec![],
            Pred::And(ps) => ps.iter().flat_map(|p| p.conjuncts()).collect(),
            p => vec![p],
        }
    }

    fn is_compound(&self) -> bool {
        matches!(self, Pred::And(_) | Pred::Or(_) | Pred::Implies(..))
    }
}

/// Substitution map built from `(symbol, term)` pairs.
pub fn bindings<I: IntoIterator<Item = (Sym, Term)>>(pairs: I) -> BTreeMap<Sym, Term> {
    pairs.into_iter().collect()
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::IntMin => f.write_str("INT_MIN"),
            Term::IntMax => f.write_str("INT_MAX"),
            Term::Var(v) => f.write_str(v),
            Term::Result => f.write_str("\\result"),
            Term::Old(v) => write!(f, "\\old({v})"),
            Term::Neg(a) => {
                if matches!(**a, Term::Const(_) | Term::Neg(_) | Term::Bin(..)) {
                    write!(f, "-({a})")
                } else {
                    write!(f, "-{a}")
                }
            }
            Term::Bin(op, a, b) => {
                let prec = op.precedence();
                if a.precedence() < prec {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if b.precedence() <= prec {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Term::Ite(c, a, b) => write!(f, "({c} ? {a} : {b})"),
            Term::Call(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Child<'a>(&'a Pred);

impl fmt::Display for Child<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_compound() {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pred::True => f.write_str("\\true"),
            Pred::False => f.write_str("\\false"),
            Pred::Cmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            Pred::Not(p) => write!(f, "!({p})"),
            Pred::And(ps) | Pred::Or(ps) => {
                let sep = if matches!(self, Pred::And(_)) { " && " } else { " || " };
                match ps.len() {
                    0 => f.write_str(if matches!(self, Pred::And(_)) { "\\true" } else { "\\false" }),
                    _ => {
                        for (i, p) in ps.iter().enumerate() {
                            if i > 0 {
                                f.write_str(sep)?;
                            }
                            write!(f, "{}", Child(p))?;
                        }
                        Ok(())
                    }
                }
            }
            Pred::Implies(a, b) => write!(f, "{} ==> {}", Child(a), Child(b)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Clause {
    Requires(Pred),
    Ensures(Pred),
    Assert { label: Option<String>, pred: Pred },
    LoopInvariant(Pred),
    /// Empty list renders as `\nothing`.
    LoopAssigns(Vec<String>),
}

impl Clause {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Clause::Requires(_) => "requires",
            Clause::Ensures(_) => "ensures",
            Clause::Assert { .. } => "assert",
            Clause::LoopInvariant(_) => "loop invariant",
            Clause::LoopAssigns(_) => "loop assigns",
        }
    }

    pub fn pred(&self) -> Option<&Pred> {
        match self {
            Clause::Requires(p) | Clause::Ensures(p) | Clause::LoopInvariant(p) => Some(p),
            Clause::Assert { pred, .. } => Some(pred),
            Clause::LoopAssigns(_) => None,
        }
    }

    pub fn is_loop_clause(&self) -> bool {
        matches!(self, Clause::LoopInvariant(_) | Clause::LoopAssigns(_))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Assert {
                label: Some(l),
                pred,
            } => write!(f, "assert {l}: {pred};"),
            Clause::LoopAssigns(vs) if vs.is_empty() => f.write_str("loop assigns \\nothing;"),
            Clause::LoopAssigns(vs) => write!(f, "loop assigns {};", vs.join(", ")),
            c => write!(f, "{} {};", c.kind_name(), c.pred().unwrap()),
        }
    }
}

impl serde::Serialize for Pred {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl serde::Serialize for Clause {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn render_clause(c: &Clause) -> String {
    c.to_string()
}

/// A clause attached to a function, loop or statement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnchoredClause {
    pub anchor: NodeId,
    pub clause: Clause,
}

/// Requires/ensures of one function. Empty lists mean `\true`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Contract {
    pub requires: Vec<Pred>,
    pub ensures: Vec<Pred>,
}

impl Contract {
    pub fn pre(&self) -> Pred {
        Pred::and(self.requires.iter().cloned())
    }

    pub fn post(&self) -> Pred {
        Pred::and(self.ensures.iter().cloned())
    }

    pub fn is_empty(&self) -> bool {
        self.requires.is_empty() && self.ensures.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoopSpec {
    pub invariants: Vec<Pred>,
    pub assigns: Option<Vec<String>>,
}

/// Every known contract and loop annotation of a program.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContractEnv {
    pub functions: BTreeMap<String, Contract>,
    pub loops: BTreeMap<NodeId, LoopSpec>,
}

impl ContractEnv {
    pub fn contract(&self, f: &str) -> Contract {
        self.functions.get(f).cloned().unwrap_or_default()
    }

    pub fn loop_spec(&self, id: NodeId) -> LoopSpec {
        self.loops.get(&id).cloned().unwrap_or_default()
    }

    /// Annotation list for rendering: contracts anchored at function ids,
    /// loop clauses at loop ids.
    pub fn annotations(&self, fn_ids: &BTreeMap<String, NodeId>) -> Vec<(NodeId, Clause)> {
        let mut out = Vec::new();
        for (name, c) in &self.functions {
            let Some(id) = fn_ids.get(name) else { continue };
            out.extend(c.requires.iter().map(|p| (*id, Clause::Requires(p.clone()))));
            out.extend(c.ensures.iter().map(|p| (*id, Clause::Ensures(p.clone()))));
        }
        for (id, l) in &self.loops {
            out.extend(l.invariants.iter().map(|p| (*id, Clause::LoopInvariant(p.clone()))));
            if let Some(a) = &l.assigns {
                out.push((*id, Clause::LoopAssigns(a.clone())));
            }
        }
        out.sort_by_key(|(id, _)| *id);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("specification syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unsupported specification construct `{construct}` at offset {offset}")]
    UnknownConstruct { construct: String, offset: usize },
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Pred {
        parse_predicate(s).unwrap()
    }

    #[test]
    fn canonical_rendering() {
        assert_eq!(Clause::Requires(p("x != 0")).to_string(), "requires x != 0;");
        assert_eq!(Clause::Ensures(Pred::True).to_string(), "ensures \\true;");
        assert_eq!(
            Clause::LoopInvariant(p("0 <= i && i <= n")).to_string(),
            "loop invariant 0 <= i && i <= n;"
        );
        assert_eq!(Clause::LoopAssigns(vec![]).to_string(), "loop assigns \\nothing;");
        assert_eq!(
            Clause::Assert {
                label: Some("signed_overflow".into()),
                pred: p("-2147483647 <= x")
            }
            .to_string(),
            "assert signed_overflow: -2147483647 <= x;"
        );
    }

    #[test]
    fn substitution_examples() {
        let b = bindings([(Sym::Var("x".into()), Term::IntMin)]);
        assert_eq!(p("INT_MIN < x").substitute(&b), p("INT_MIN < INT_MIN"));
        assert_eq!(p("INT_MIN < x").substitute(&BTreeMap::new()), p("INT_MIN < x"));
        let b = bindings([
            (Sym::Result, Term::var("r1")),
            (Sym::Var("x".into()), Term::Const(1)),
        ]);
        assert_eq!(p("\\result == x").substitute(&b), p("r1 == 1"));
    }

    #[test]
    fn substitution_is_simultaneous() {
        let b = bindings([
            (Sym::Var("x".into()), Term::var("y")),
            (Sym::Var("y".into()), Term::var("x")),
        ]);
        assert_eq!(p("x < y").substitute(&b), p("y < x"));
    }

    #[test]
    fn evaluation_uses_width() {
        let env = |_: &Sym| Some(-128);
        assert_eq!(p("INT_MIN < x").eval(IntWidth::W8, &env), Some(false));
        assert_eq!(p("-INT_MAX <= x").eval(IntWidth::W8, &env), Some(false));
        assert_eq!(p("-7 / 2 == -3 && -7 % 2 == -1").eval(IntWidth::W8, &env), Some(true));
    }

    #[test]
    fn nonlinear_flag() {
        assert!(p("x * y <= 10").is_nonlinear());
        assert!(!p("2 * y <= 10").is_nonlinear());
        assert!(p("10 / y == 2").is_nonlinear());
        assert!(!p("y / 2 == 2").is_nonlinear());
    }

    #[test]
    fn smart_constructors() {
        assert_eq!(Pred::and([Pred::True, p("x < 1")]), p("x < 1"));
        assert_eq!(Pred::and([p("a < 1"), Pred::and([p("b < 1"), p("c < 1")])]), p("a < 1 && b < 1 && c < 1"));
        assert_eq!(Pred::or([Pred::False]), Pred::False);
        assert_eq!(Pred::implies(Pred::True, p("x < 1")), p("x < 1"));
        assert_eq!(Pred::not(Pred::not(p("x < 1"))), p("x < 1"));
    }
}
