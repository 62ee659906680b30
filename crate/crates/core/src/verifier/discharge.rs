//! Deciding verification conditions.
//!
//! Every free symbol ranges over the configured width, so a formula has a
//! finite domain. The search splits that domain into boxes, evaluates the
//! formula with interval arithmetic on each box and bisects boxes it cannot
//! decide. Boxes shrink to single points, where evaluation is exact, so the
//! search is complete once the budget allows visiting every point.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::linear;
use super::smt::{self, SmtSolver};
use super::VcStatus;
use crate::frontend::IntWidth;
use crate::specs::{ArithOp, CmpOp, Pred, Sym, Term};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DischargeConfig {
    /// Boxes visited before the search gives up.
    pub box_budget: usize,
    /// External solver consulted when the search is undecided.
    pub smt: Option<SmtSolver>,
}

impl Default for DischargeConfig {
    fn default() -> Self {
        DischargeConfig {
            box_budget: 400_000,
            smt: None,
        }
    }
}

/// Which strategy decided a condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// Closed formula, decided by evaluation.
    Simplify,
    /// Interval reasoning without reaching single points.
    Interval,
    /// At least one box was narrowed to a point.
    Enumeration,
    Smt,
    /// Nothing decided.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tri {
    True,
    False,
    Unknown,
}

impl Tri {
    fn not(self) -> Tri {
        match self {
            Tri::True => Tri::False,
            Tri::False => Tri::True,
            Tri::Unknown => Tri::Unknown,
        }
    }
}

type Range = (i128, i128);

/// Decide `formula` with all free symbols bounded by `width`.
pub fn discharge(formula: &Pred, width: IntWidth, cfg: &DischargeConfig) -> (VcStatus, Tier) {
    let original = formula.simplify(width);
    let reduced = linear::reduce(&original, width);
    let formula = reduced.formula;
    let syms: Vec<Sym> = formula.syms().into_iter().collect();
    let (status, tier) = if syms.is_empty() {
        match formula.eval(width, &|_| None) {
            Some(true) => (VcStatus::Valid, Tier::Simplify),
            Some(false) => (VcStatus::Invalid { witness: BTreeMap::new() }, Tier::Simplify),
            None => (VcStatus::Unknown { reason: "arithmetic overflow in evaluation".into() }, Tier::None),
        }
    } else {
        let search = Search {
            syms: &syms,
            width,
            formula: &formula,
        };
        search.run(cfg.box_budget)
    };
    let status = match status {
        VcStatus::Invalid { witness } => complete_witness(witness, &reduced.eliminated, &original, width),
        s => s,
    };
    if !matches!(status, VcStatus::Unknown { .. }) {
        return (status, tier);
    }
    if let Some(solver) = &cfg.smt {
        return match smt::check(solver, &original, width) {
            Ok(s) => (s, Tier::Smt),
            Err(e) => (VcStatus::Unknown { reason: e.to_string() }, Tier::None),
        };
    }
    (status, tier)
}

/// Add values for eliminated and vanished symbols, then confirm the
/// witness against the unreduced formula.
fn complete_witness(mut witness: BTreeMap<String, i128>, eliminated: &[(Sym, Term)], original: &Pred, width: IntWidth) -> VcStatus {
    for (s, t) in eliminated.iter().rev() {
        let env = |x: &Sym| witness.get(&x.to_string()).copied();
        match t.eval(width, &env) {
            Some(v) => {
                witness.insert(s.to_string(), v);
            }
            None => break,
        }
    }
    for s in original.syms() {
        witness.entry(s.to_string()).or_insert(0);
    }
    if falsifies(original, width, &witness) {
        VcStatus::Invalid { witness }
    } else {
        VcStatus::Unknown {
            reason: "counterexample could not be reconstructed".into(),
        }
    }
}

/// Does `witness` falsify `formula`? Unbound symbols count as not falsifying.
pub fn falsifies(formula: &Pred, width: IntWidth, witness: &BTreeMap<String, i128>) -> bool {
    let env = |s: &Sym| witness.get(&s.to_string()).copied();
    formula.eval(width, &env) == Some(false)
}

struct Search<'a> {
    syms: &'a [Sym],
    width: IntWidth,
    formula: &'a Pred,
}

/// Points tried before the box search: every combination of a few values
/// near zero and at the extremes, then a fixed pseudo-random sequence.
fn sample_points(n: usize, w: IntWidth) -> Vec<Vec<i128>> {
    let edges = [0, 1, -1, 2, w.max(), w.min(), w.max() - 1, w.min() + 1];
    let per = match n {
        0 => return vec![],
        1 => edges.len(),
        2 => 6,
        3 => 4,
        _ => 2,
    };
    let mut out: Vec<Vec<i128>> = vec![vec![]];
    for _ in 0..n.min(6) {
        out = out
            .into_iter()
            .flat_map(|p| edges[..per].iter().map(move |e| [p.as_slice(), &[*e]].concat()))
            .collect();
    }
    for p in &mut out {
        p.resize(n, 0);
    }
    let span = (w.max() - w.min() + 1) as u64;
    let mut x: u64 = 0x9e37_79b9_7f4a_7c15;
    for _ in 0..256 {
        out.push(
            (0..n)
                .map(|_| {
                    x ^= x << 13;
                    x ^= x >> 7;
                    x ^= x << 17;
                    w.min() + (x % span) as i128
                })
                .collect(),
        );
    }
    out
}

impl Search<'_> {
    /// A falsifying point among [`sample_points`], if any.
    fn sample(&self) -> Option<BTreeMap<String, i128>> {
        sample_points(self.syms.len(), self.width).into_iter().find_map(|p| {
            let witness: BTreeMap<String, i128> = self.syms.iter().map(ToString::to_string).zip(p).collect();
            falsifies(self.formula, self.width, &witness).then_some(witness)
        })
    }

    fn run(&self, budget: usize) -> (VcStatus, Tier) {
        if let Some(witness) = self.sample() {
            return (VcStatus::Invalid { witness }, Tier::Enumeration);
        }
        let full = (self.width.min(), self.width.max());
        let mut stack = vec![vec![full; self.syms.len()]];
        let mut visited = 0usize;
        let mut points = false;
        while let Some(mut b) = stack.pop() {
            visited += 1;
            if visited > budget {
                return (
                    VcStatus::Unknown {
                        reason: format!("search budget of {budget} boxes exhausted"),
                    },
                    Tier::None,
                );
            }
            if !self.prune(&mut b) {
                continue;
            }
            let is_point = b.iter().all(|(l, h)| l == h);
            points |= is_point;
            match self.pred(self.formula, &b) {
                Tri::True => continue,
                Tri::False => {
                    let witness = self.point(&b);
                    if falsifies(self.formula, self.width, &witness) {
                        return (VcStatus::Invalid { witness }, if points { Tier::Enumeration } else { Tier::Interval });
                    }
                }
                Tri::Unknown => {}
            }
            if is_point {
                // Interval evaluation of a point is exact unless i128 overflowed.
                let witness = self.point(&b);
                let env = |s: &Sym| witness.get(&s.to_string()).copied();
                match self.formula.eval(self.width, &env) {
                    Some(true) => continue,
                    Some(false) => return (VcStatus::Invalid { witness }, Tier::Enumeration),
                    None => {
                        return (
                            VcStatus::Unknown {
                                reason: "arithmetic overflow in evaluation".into(),
                            },
                            Tier::None,
                        )
                    }
                }
            }
            let (i, _) = b
                .iter()
                .enumerate()
                .max_by_key(|(_, (l, h))| h - l)
                .expect("non-empty box");
            let (l, h) = b[i];
            let mid = l + (h - l) / 2;
            let mut lo = b.clone();
            lo[i] = (l, mid);
            b[i] = (mid + 1, h);
            // Explore the half nearer to zero first: small values are common witnesses.
            if mid >= 0 {
                stack.push(b);
                stack.push(lo);
            } else {
                stack.push(lo);
                stack.push(b);
            }
        }
        (VcStatus::Valid, if points { Tier::Enumeration } else { Tier::Interval })
    }

    /// A point of the box, each coordinate as close to zero as possible.
    fn point(&self, b: &[Range]) -> BTreeMap<String, i128> {
        self.syms
            .iter()
            .zip(b)
            .map(|(s, &(l, h))| (s.to_string(), 0i128.clamp(l, h)))
            .collect()
    }

    fn index(&self, s: &Sym) -> Option<usize> {
        self.syms.iter().position(|x| x == s)
    }

    /// Narrow the box to assignments that could falsify the formula.
    /// Returns false when no such assignment remains.
    fn prune(&self, b: &mut [Range]) -> bool {
        for _ in 0..4 {
            let before = b.to_vec();
            if !self.force(self.formula, false, b) {
                return false;
            }
            if before == b {
                break;
            }
        }
        true
    }

    /// Narrow `b` towards assignments where `p` evaluates to `value`.
    fn force(&self, p: &Pred, value: bool, b: &mut [Range]) -> bool {
        match (p, value) {
            (Pred::True, v) | (Pred::False, v) if matches!(p, Pred::True) != v => false,
            (Pred::Not(q), v) => self.force(q, !v, b),
            (Pred::And(ps), true) | (Pred::Or(ps), false) => ps.iter().all(|q| self.force(q, value, b)),
            (Pred::Implies(a, c), false) => self.force(a, true, b) && self.force(c, false, b),
            (Pred::Cmp(op, x, y), v) => {
                let op = if v { *op } else { op.negate() };
                self.narrow(op, x, y, b) && self.narrow(op.swap(), y, x, b)
            }
            _ => true,
        }
    }

    /// Narrow the variable `x` (if it is one) so that `x op y` can hold.
    fn narrow(&self, op: CmpOp, x: &Term, y: &Term, b: &mut [Range]) -> bool {
        let Some(i) = x.as_sym().and_then(|s| self.index(&s)) else {
            return true;
        };
        let Some((c, d)) = self.term(y, b) else {
            return true;
        };
        let (l, h) = b[i];
        let (nl, nh) = match op {
            CmpOp::Lt => (l, h.min(d.saturating_sub(1))),
            CmpOp::Le => (l, h.min(d)),
            CmpOp::Gt => (l.max(c.saturating_add(1)), h),
            CmpOp::Ge => (l.max(c), h),
            CmpOp::Eq => (l.max(c), h.min(d)),
            CmpOp::Ne if c == d && l == c => (l + 1, h),
            CmpOp::Ne if c == d && h == c => (l, h - 1),
            CmpOp::Ne => (l, h),
        };
        if nl > nh {
            return false;
        }
        b[i] = (nl, nh);
        true
    }

    fn pred(&self, p: &Pred, b: &[Range]) -> Tri {
        match p {
            Pred::True => Tri::True,
            Pred::False => Tri::False,
            Pred::Cmp(op, x, y) => match (self.term(x, b), self.term(y, b)) {
                (Some(x), Some(y)) => cmp3(*op, x, y),
                _ => Tri::Unknown,
            },
            Pred::Not(q) => self.pred(q, b).not(),
            Pred::And(ps) => {
                let mut out = Tri::True;
                for q in ps {
                    match self.pred(q, b) {
                        Tri::False => return Tri::False,
                        Tri::Unknown => out = Tri::Unknown,
                        Tri::True => {}
                    }
                }
                out
            }
            Pred::Or(ps) => {
                let mut out = Tri::False;
                for q in ps {
                    match self.pred(q, b) {
                        Tri::True => return Tri::True,
                        Tri::Unknown => out = Tri::Unknown,
                        Tri::False => {}
                    }
                }
                out
            }
            Pred::Implies(a, c) => match self.pred(a, b) {
                Tri::False => Tri::True,
                Tri::True => self.pred(c, b),
                Tri::Unknown => match self.pred(c, b) {
                    Tri::True => Tri::True,
                    _ => Tri::Unknown,
                },
            },
        }
    }

    /// Interval of a term over the box; `None` when a bound leaves `i128`.
    fn term(&self, t: &Term, b: &[Range]) -> Option<Range> {
        Some(match t {
            Term::Const(c) => (*c, *c),
            Term::IntMin => (self.width.min(), self.width.min()),
            Term::IntMax => (self.width.max(), self.width.max()),
            Term::Var(_) | Term::Result | Term::Old(_) => b[self.index(&t.as_sym()?)?],
            Term::Neg(a) => {
                let (l, h) = self.term(a, b)?;
                (h.checked_neg()?, l.checked_neg()?)
            }
            Term::Bin(op, x, y) => {
                let x = self.term(x, b)?;
                let y = self.term(y, b)?;
                bin(*op, x, y)?
            }
            Term::Ite(c, x, y) => match self.pred(c, b) {
                Tri::True => self.term(x, b)?,
                Tri::False => self.term(y, b)?,
                Tri::Unknown => {
                    let (a, c) = self.term(x, b)?;
                    let (d, e) = self.term(y, b)?;
                    (a.min(d), c.max(e))
                }
            },
            Term::Call(..) => return None,
        })
    }
}

fn cmp3(op: CmpOp, (a, b): Range, (c, d): Range) -> Tri {
    let (always, never) = match op {
        CmpOp::Lt => (b < c, a >= d),
        CmpOp::Le => (b <= c, a > d),
        CmpOp::Gt => (a > d, b <= c),
        CmpOp::Ge => (a >= d, b < c),
        CmpOp::Eq => (a == b && c == d && a == c, b < c || d < a),
        CmpOp::Ne => (b < c || d < a, a == b && c == d && a == c),
    };
    if always {
        Tri::True
    } else if never {
        Tri::False
    } else {
        Tri::Unknown
    }
}

fn hull(vals: &[Option<i128>]) -> Option<Range> {
    let mut lo = i128::MAX;
    let mut hi = i128::MIN;
    for v in vals {
        let v = (*v)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Some((lo, hi))
}

/// Interval of `x op y` under the total semantics of [`ArithOp::apply`].
fn bin(op: ArithOp, (a, b): Range, (c, d): Range) -> Option<Range> {
    match op {
        ArithOp::Add => Some((a.checked_add(c)?, b.checked_add(d)?)),
        ArithOp::Sub => Some((a.checked_sub(d)?, b.checked_sub(c)?)),
        ArithOp::Mul => hull(&[a.checked_mul(c), a.checked_mul(d), b.checked_mul(c), b.checked_mul(d)]),
        ArithOp::Div => {
            let mut out: Option<Range> = None;
            let mut add = |r: Range| {
                out = Some(match out {
                    None => r,
                    Some((l, h)) => (l.min(r.0), h.max(r.1)),
                })
            };
            if c <= 0 && 0 <= d {
                add((0, 0));
            }
            for (lo, hi) in [(c, d.min(-1)), (c.max(1), d)] {
                if lo <= hi {
                    add(hull(&[a.checked_div(lo), a.checked_div(hi), b.checked_div(lo), b.checked_div(hi)])?);
                }
            }
            out
        }
        ArithOp::Rem => {
            if a == b && c == d {
                return Some((op.checked_apply(a, c)?, op.checked_apply(a, c)?));
            }
            let m = c.checked_abs()?.max(d.checked_abs()?);
            let bound = (m - 1).max(0);
            let lo = if a >= 0 { 0 } else { a.max(-bound) };
            let hi = if b <= 0 { 0 } else { b.min(bound) };
            Some((lo.min(0), hi.max(0)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specs::parse_predicate;

    fn decide(src: &str, w: IntWidth) -> VcStatus {
        discharge(&parse_predicate(src).unwrap(), w, &DischargeConfig::default()).0
    }

    #[test]
    fn closed_false_formula() {
        let (s, t) = discharge(
            &parse_predicate("\\true ==> INT_MIN < INT_MIN").unwrap(),
            IntWidth::W32,
            &DischargeConfig::default(),
        );
        assert_eq!(s, VcStatus::Invalid { witness: BTreeMap::new() });
        assert_eq!(t, Tier::Simplify);
    }

    #[test]
    fn abs_guard_under_requires() {
        for w in [IntWidth::W8, IntWidth::W32] {
            assert_eq!(decide("x < 0 && INT_MIN < x ==> -INT_MAX <= x", w), VcStatus::Valid);
            let VcStatus::Invalid { witness } = decide("x < 0 ==> -INT_MAX <= x", w) else {
                panic!()
            };
            assert_eq!(witness["x"], w.min());
        }
    }

    #[test]
    fn equality_from_postcondition() {
        assert_eq!(decide("r1 == 1 ==> r1 != 0", IntWidth::W32), VcStatus::Valid);
        let VcStatus::Invalid { witness } = decide("r1 != 0", IntWidth::W32) else {
            panic!()
        };
        assert_eq!(witness["r1"], 0);
    }

    #[test]
    fn nonlinear_at_small_width() {
        assert_eq!(decide("x * x >= 0", IntWidth::W8), VcStatus::Valid);
        assert_eq!(decide("x % 2 == 0 || x % 2 == 1 || x % 2 == -1", IntWidth::W8), VcStatus::Valid);
        let VcStatus::Invalid { witness } = decide("x * y != 6", IntWidth::W8) else {
            panic!()
        };
        assert_eq!(witness["x"] * witness["y"], 6);
    }

    #[test]
    fn budget_exhaustion_is_unknown() {
        let cfg = DischargeConfig {
            box_budget: 10,
            smt: None,
        };
        let (s, t) = discharge(&parse_predicate("x * x != 2").unwrap(), IntWidth::W32, &cfg);
        assert!(matches!(s, VcStatus::Unknown { .. }), "{s:?}");
        assert_eq!(t, Tier::None);
    }

    #[test]
    fn remainder_interval_is_sound() {
        let w = IntWidth::W8;
        for (a, b) in [((-7, 7), (3, 3)), ((0, 100), (-5, 5)), ((-20, -3), (-4, 0))] {
            let (lo, hi) = bin(ArithOp::Rem, a, b).unwrap();
            for x in a.0..=a.1 {
                for y in b.0..=b.1 {
                    let r = ArithOp::Rem.apply(x, y);
                    assert!(lo <= r && r <= hi, "{x} % {y} = {r} not in [{lo}, {hi}] at {w:?}");
                }
            }
        }
    }
}
