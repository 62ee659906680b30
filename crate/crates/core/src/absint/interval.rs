use std::cmp::{max, min};
use std::fmt;

use serde::Serialize;

use crate::frontend::IntWidth;

/// Interval bound over the extended integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    NegInf,
    Fin(i128),
    PosInf,
}

impl Bound {
    fn neg(self) -> Bound {
        match self {
            Bound::NegInf => Bound::PosInf,
            Bound::PosInf => Bound::NegInf,
            Bound::Fin(v) => Bound::Fin(-v),
        }
    }

    /// Sum; `NegInf + PosInf` never arises for well-formed intervals.
    fn add(self, o: Bound) -> Bound {
        match (self, o) {
            (Bound::Fin(a), Bound::Fin(b)) => Bound::Fin(a + b),
            (Bound::NegInf, _) | (_, Bound::NegInf) => Bound::NegInf,
            _ => Bound::PosInf,
        }
    }

    fn mul(self, o: Bound) -> Bound {
        let sign = |b: Bound| match b {
            Bound::NegInf => -1,
            Bound::PosInf => 1,
            Bound::Fin(v) => v.signum() as i32,
        };
        match (self, o) {
            (Bound::Fin(a), Bound::Fin(b)) => Bound::Fin(a.saturating_mul(b)),
            _ => match sign(self) * sign(o) {
                0 => Bound::Fin(0),
                s if s > 0 => Bound::PosInf,
                _ => Bound::NegInf,
            },
        }
    }

    pub fn finite(self) -> Option<i128> {
        match self {
            Bound::Fin(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => f.write_str("-oo"),
            Bound::PosInf => f.write_str("+oo"),
            Bound::Fin(v) => write!(f, "{v}"),
        }
    }
}

/// A possibly unbounded integer interval, or the empty set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Interval {
    Bottom,
    Range(Bound, Bound),
}

impl Interval {
    /// `[lo, hi]`, or Bottom when `lo > hi`.
    pub fn new(lo: Bound, hi: Bound) -> Interval {
        if lo > hi || lo == Bound::PosInf || hi == Bound::NegInf {
            Interval::Bottom
        } else {
            Interval::Range(lo, hi)
        }
    }

    pub fn of(lo: i128, hi: i128) -> Interval {
        Interval::new(Bound::Fin(lo), Bound::Fin(hi))
    }

    pub fn single(v: i128) -> Interval {
        Interval::of(v, v)
    }

    pub fn top() -> Interval {
        Interval::Range(Bound::NegInf, Bound::PosInf)
    }

    pub fn full(w: IntWidth) -> Interval {
        Interval::of(w.min(), w.max())
    }

    pub fn is_bottom(self) -> bool {
        matches!(self, Interval::Bottom)
    }

    pub fn lo(self) -> Option<Bound> {
        match self {
            Interval::Range(l, _) => Some(l),
            Interval::Bottom => None,
        }
    }

    pub fn hi(self) -> Option<Bound> {
        match self {
            Interval::Range(_, h) => Some(h),
            Interval::Bottom => None,
        }
    }

    pub fn contains(self, v: i128) -> bool {
        match self {
            Interval::Bottom => false,
            Interval::Range(l, h) => l <= Bound::Fin(v) && Bound::Fin(v) <= h,
        }
    }

    /// `self ⊆ other`
    pub fn le(self, other: Interval) -> bool {
        match (self, other) {
            (Interval::Bottom, _) => true,
            (_, Interval::Bottom) => false,
            (Interval::Range(a, b), Interval::Range(c, d)) => c <= a && b <= d,
        }
    }

    pub fn singleton(self) -> Option<i128> {
        match self {
            Interval::Range(Bound::Fin(a), Bound::Fin(b)) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn join(self, o: Interval) -> Interval {
        match (self, o) {
            (Interval::Bottom, x) | (x, Interval::Bottom) => x,
            (Interval::Range(a, b), Interval::Range(c, d)) => Interval::Range(min(a, c), max(b, d)),
        }
    }

    pub fn meet(self, o: Interval) -> Interval {
        match (self, o) {
            (Interval::Bottom, _) | (_, Interval::Bottom) => Interval::Bottom,
            (Interval::Range(a, b), Interval::Range(c, d)) => Interval::new(max(a, c), min(b, d)),
        }
    }

    /// Widening: a bound that moved jumps to the edge of the width's range.
    pub fn widen(self, next: Interval, w: IntWidth) -> Interval {
        match (self, next) {
            (Interval::Bottom, x) => x,
            (x, Interval::Bottom) => x,
            (Interval::Range(a, b), Interval::Range(c, d)) => {
                let lo = if c < a { min(c, Bound::Fin(w.min())) } else { a };
                let hi = if d > b { max(d, Bound::Fin(w.max())) } else { b };
                Interval::Range(lo, hi)
            }
        }
    }

    pub fn neg(self) -> Interval {
        match self {
            Interval::Bottom => Interval::Bottom,
            Interval::Range(a, b) => Interval::Range(b.neg(), a.neg()),
        }
    }

    pub fn add(self, o: Interval) -> Interval {
        match (self, o) {
            (Interval::Range(a, b), Interval::Range(c, d)) => Interval::Range(a.add(c), b.add(d)),
            _ => Interval::Bottom,
        }
    }

    pub fn sub(self, o: Interval) -> Interval {
        self.add(o.neg())
    }

    pub fn mul(self, o: Interval) -> Interval {
        match (self, o) {
            (Interval::Range(a, b), Interval::Range(c, d)) => {
                let cs = [a.mul(c), a.mul(d), b.mul(c), b.mul(d)];
                Interval::Range(*cs.iter().min().unwrap(), *cs.iter().max().unwrap())
            }
            _ => Interval::Bottom,
        }
    }

    /// Split into the strictly negative and strictly positive parts.
    fn sign_parts(self) -> [Interval; 2] {
        [
            self.meet(Interval::new(Bound::NegInf, Bound::Fin(-1))),
            self.meet(Interval::new(Bound::Fin(1), Bound::PosInf)),
        ]
    }

    /// Truncating division over the non-zero part of the divisor.
    pub fn div(self, o: Interval) -> Interval {
        if self.is_bottom() {
            return Interval::Bottom;
        }
        let mut out = Interval::Bottom;
        for part in o.sign_parts() {
            let Interval::Range(c, d) = part else { continue };
            let (Interval::Range(Bound::Fin(a), Bound::Fin(b)), Bound::Fin(c), Bound::Fin(d)) = (self, c, d) else {
                // Unbounded operands: the quotient magnitude never exceeds the dividend's.
                let m = self.abs_max();
                out = out.join(match m {
                    Bound::Fin(m) => Interval::of(-m, m),
                    _ => Interval::top(),
                });
                continue;
            };
            let cs = [a / c, a / d, b / c, b / d];
            out = out.join(Interval::of(*cs.iter().min().unwrap(), *cs.iter().max().unwrap()));
        }
        out
    }

    /// Truncating remainder over the non-zero part of the divisor.
    pub fn rem(self, o: Interval) -> Interval {
        let Interval::Range(a, b) = self else {
            return Interval::Bottom;
        };
        let nz = o.sign_parts();
        if nz.iter().all(|p| p.is_bottom()) {
            return Interval::Bottom;
        }
        if let (Some(x), Some(y)) = (self.singleton(), o.singleton()) {
            return Interval::single(x % y);
        }
        let m = nz[0].abs_max().max(nz[1].abs_max());
        let bound = match m {
            Bound::Fin(m) => Bound::Fin(m - 1),
            _ => Bound::PosInf,
        };
        let lo = if a >= Bound::Fin(0) { Bound::Fin(0) } else { max(a, bound.neg()) };
        let hi = if b <= Bound::Fin(0) { Bound::Fin(0) } else { min(b, bound) };
        Interval::new(lo, hi)
    }

    fn abs_max(self) -> Bound {
        match self {
            Interval::Bottom => Bound::Fin(0),
            Interval::Range(a, b) => max(a.neg(), b),
        }
    }

    /// Keep the interval when it fits the width, otherwise the full range.
    pub fn fit(self, w: IntWidth) -> Interval {
        if self.le(Interval::full(w)) {
            self
        } else {
            Interval::full(w)
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Bottom => f.write_str("bottom"),
            Interval::Range(a, b) => write!(f, "[{a}, {b}]"),
        }
    }
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widening_clamps_to_width() {
        let w = IntWidth::W32;
        assert_eq!(Interval::of(0, 1).widen(Interval::of(0, 2), w), Interval::of(0, w.max()));
        assert_eq!(Interval::of(0, 5).widen(Interval::of(0, 5), w), Interval::of(0, 5));
        assert_eq!(Interval::of(0, 5).widen(Interval::of(-1, 5), w), Interval::of(w.min(), 5));
    }

    #[test]
    fn negation_of_symmetric_interval() {
        assert_eq!(Interval::of(-3, 3).neg(), Interval::of(-3, 3));
    }

    #[test]
    fn division_skips_zero() {
        assert_eq!(Interval::of(10, 10).div(Interval::of(-2, 2)), Interval::of(-10, 10));
        assert_eq!(Interval::of(7, 9).div(Interval::of(2, 3)), Interval::of(2, 4));
        assert_eq!(Interval::of(1, 1).div(Interval::single(0)), Interval::Bottom);
    }

    #[test]
    fn remainder_follows_dividend_sign() {
        assert_eq!(Interval::of(-7, 7).rem(Interval::of(3, 3)), Interval::of(-2, 2));
        assert_eq!(Interval::of(0, 100).rem(Interval::of(-5, 5)), Interval::of(0, 4));
        assert_eq!(Interval::single(-7).rem(Interval::single(2)), Interval::single(-1));
    }

    #[test]
    fn infinite_bounds() {
        let t = Interval::new(Bound::Fin(1), Bound::PosInf);
        assert_eq!(t.neg(), Interval::new(Bound::NegInf, Bound::Fin(-1)));
        assert_eq!(t.mul(Interval::single(0)), Interval::single(0));
        assert_eq!(t.add(Interval::single(1)), Interval::new(Bound::Fin(2), Bound::PosInf));
    }
}
