//! Linear preprocessing before the box search.
//!
//! Comparisons are rewritten to `sum(c_i * t_i) op k` with coprime
//! coefficients, where each `t_i` is a symbol or a non-linear subterm.
//! Hypotheses of the form `v == t` are eliminated by substitution, and goal
//! atoms whose linear form is bounded by the hypotheses are decided.

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::IntWidth;
use crate::specs::{bindings, ArithOp, CmpOp, Pred, Sym, Term};

/// `sum(coeffs[t] * t) + k`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Lin {
    coeffs: BTreeMap<Term, i128>,
    k: i128,
}

impl Lin {
    fn constant(k: i128) -> Lin {
        Lin { coeffs: BTreeMap::new(), k }
    }

    fn atom(t: Term) -> Lin {
        Lin {
            coeffs: BTreeMap::from([(t, 1)]),
            k: 0,
        }
    }

    fn scale(mut self, c: i128) -> Option<Lin> {
        for v in self.coeffs.values_mut() {
            *v = v.checked_mul(c)?;
        }
        self.k = self.k.checked_mul(c)?;
        self.coeffs.retain(|_, v| *v != 0);
        Some(self)
    }

    fn add(mut self, o: Lin) -> Option<Lin> {
        for (t, c) in o.coeffs {
            let e = self.coeffs.entry(t).or_insert(0);
            *e = e.checked_add(c)?;
        }
        self.k = self.k.checked_add(o.k)?;
        self.coeffs.retain(|_, v| *v != 0);
        Some(self)
    }

    fn of(t: &Term, w: IntWidth) -> Option<Lin> {
        match t {
            Term::Const(c) => Some(Lin::constant(*c)),
            Term::IntMin => Some(Lin::constant(w.min())),
            Term::IntMax => Some(Lin::constant(w.max())),
            Term::Neg(a) => Lin::of(a, w)?.scale(-1),
            Term::Bin(ArithOp::Add, a, b) => Lin::of(a, w)?.add(Lin::of(b, w)?),
            Term::Bin(ArithOp::Sub, a, b) => Lin::of(a, w)?.add(Lin::of(b, w)?.scale(-1)?),
            Term::Bin(ArithOp::Mul, a, b) => {
                let (la, lb) = (Lin::of(a, w)?, Lin::of(b, w)?);
                if la.coeffs.is_empty() {
                    lb.scale(la.k)
                } else if lb.coeffs.is_empty() {
                    la.scale(lb.k)
                } else {
                    Some(Lin::atom(Term::bin(ArithOp::Mul, la.full_term(), lb.full_term())))
                }
            }
            Term::Bin(op, a, b) => {
                let (la, lb) = (Lin::of(a, w)?, Lin::of(b, w)?);
                if la.coeffs.is_empty() && lb.coeffs.is_empty() {
                    Some(Lin::constant(op.checked_apply(la.k, lb.k)?))
                } else {
                    Some(Lin::atom(Term::bin(*op, la.full_term(), lb.full_term())))
                }
            }
            Term::Ite(c, a, b) => match canonical(c, w) {
                Pred::True => Lin::of(a, w),
                Pred::False => Lin::of(b, w),
                c => Some(Lin::atom(Term::Ite(
                    Box::new(c),
                    Box::new(Lin::of(a, w)?.full_term()),
                    Box::new(Lin::of(b, w)?.full_term()),
                ))),
            },
            Term::Call(..) => None,
            Term::Var(_) | Term::Result | Term::Old(_) => Some(Lin::atom(t.clone())),
        }
    }

    /// The form including its constant.
    fn full_term(&self) -> Term {
        match (self.coeffs.is_empty(), self.k) {
            (true, k) => Term::Const(k),
            (false, 0) => self.term(),
            (false, k) if k < 0 => Term::bin(ArithOp::Sub, self.term(), Term::Const(-k)),
            (false, k) => Term::bin(ArithOp::Add, self.term(), Term::Const(k)),
        }
    }

    fn term(&self) -> Term {
        let mut out: Option<Term> = None;
        for (t, c) in &self.coeffs {
            let (mag, neg) = (c.abs(), *c < 0);
            let piece = if mag == 1 {
                t.clone()
            } else {
                Term::bin(ArithOp::Mul, Term::Const(mag), t.clone())
            };
            out = Some(match (out, neg) {
                (None, false) => piece,
                (None, true) => Term::neg(piece),
                (Some(acc), false) => Term::bin(ArithOp::Add, acc, piece),
                (Some(acc), true) => Term::bin(ArithOp::Sub, acc, piece),
            });
        }
        out.unwrap_or(Term::Const(0))
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// A comparison `form op bound` with a primitive form whose first
/// coefficient is positive; `op` is one of `<=`, `>=`, `==`, `!=`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Atom {
    form: Lin,
    op: CmpOp,
    bound: i128,
}

enum Norm {
    Const(bool),
    Atom(Atom),
}

fn normalize(op: CmpOp, x: &Term, y: &Term, w: IntWidth) -> Option<Norm> {
    let d = Lin::of(x, w)?.add(Lin::of(y, w)?.scale(-1)?)?;
    // d op 0, i.e. form op -k
    let mut form = Lin {
        coeffs: d.coeffs,
        k: 0,
    };
    let mut bound = d.k.checked_neg()?;
    let mut op = op;
    if form.coeffs.is_empty() {
        return Some(Norm::Const(op.holds(0, bound)));
    }
    // Strict to non-strict over the integers.
    match op {
        CmpOp::Lt => {
            op = CmpOp::Le;
            bound = bound.checked_sub(1)?;
        }
        CmpOp::Gt => {
            op = CmpOp::Ge;
            bound = bound.checked_add(1)?;
        }
        _ => {}
    }
    if *form.coeffs.values().next().expect("non-empty") < 0 {
        form = form.scale(-1)?;
        bound = bound.checked_neg()?;
        op = op.swap();
    }
    let g = form.coeffs.values().fold(0, |g, c| gcd(g, *c));
    if g > 1 {
        form = Lin {
            coeffs: form.coeffs.into_iter().map(|(t, c)| (t, c / g)).collect(),
            k: 0,
        };
        match op {
            CmpOp::Eq | CmpOp::Ne if bound % g != 0 => return Some(Norm::Const(op == CmpOp::Ne)),
            CmpOp::Le => bound = bound.div_euclid(g),
            CmpOp::Ge => bound = -((-bound).div_euclid(g)),
            _ => bound /= g,
        }
    }
    Some(Norm::Atom(Atom { form, op, bound }))
}

impl Atom {
    fn pred(&self) -> Pred {
        Pred::cmp(self.op, self.form.term(), Term::Const(self.bound))
    }
}

/// Rewrite every comparison into normal form.
pub fn canonical(p: &Pred, w: IntWidth) -> Pred {
    match p {
        Pred::Cmp(op, x, y) => match normalize(*op, x, y, w) {
            Some(Norm::Const(true)) => Pred::True,
            Some(Norm::Const(false)) => Pred::False,
            Some(Norm::Atom(a)) => a.pred(),
            None => p.clone(),
        },
        Pred::Not(q) => Pred::not(canonical(q, w)),
        Pred::And(qs) => Pred::and(qs.iter().map(|q| canonical(q, w))),
        Pred::Or(qs) => Pred::or(qs.iter().map(|q| canonical(q, w))),
        Pred::Implies(a, b) => Pred::implies(canonical(a, w), canonical(b, w)),
        Pred::True | Pred::False => p.clone(),
    }
}

/// Split right-nested implications into hypothesis conjuncts and a goal.
fn split(p: &Pred, hyps: &mut Vec<Pred>) -> Pred {
    match p {
        Pred::Implies(a, b) => {
            push_conjuncts(a, hyps);
            split(b, hyps)
        }
        _ => p.clone(),
    }
}

fn push_conjuncts(p: &Pred, out: &mut Vec<Pred>) {
    match p {
        Pred::And(qs) => qs.iter().for_each(|q| push_conjuncts(q, out)),
        Pred::True => {}
        _ => out.push(p.clone()),
    }
}

/// `v == t` with `v` a symbol not occurring in `t`.
fn definition(p: &Pred, w: IntWidth) -> Option<(Sym, Term)> {
    let Pred::Cmp(CmpOp::Eq, x, y) = p else { return None };
    let d = Lin::of(x, w)?.add(Lin::of(y, w)?.scale(-1)?)?;
    for (t, c) in &d.coeffs {
        let Some(s) = t.as_sym() else { continue };
        if c.abs() != 1 {
            continue;
        }
        let mut rest = d.clone();
        rest.coeffs.remove(t);
        let mentions = rest.coeffs.keys().any(|u| {
            let mut syms = Default::default();
            u.collect_syms(&mut syms);
            syms.contains(&s)
        });
        if mentions {
            continue;
        }
        // c*v + rest == 0, so v == -rest/c
        let rhs = if *c == 1 { rest.scale(-1)? } else { rest };
        let rhs_term = if rhs.k == 0 {
            rhs.term()
        } else if rhs.coeffs.is_empty() {
            Term::Const(rhs.k)
        } else {
            Term::bin(ArithOp::Add, rhs.term(), Term::Const(rhs.k))
        };
        return Some((s, rhs_term));
    }
    None
}

fn in_range(t: &Term, w: IntWidth) -> Pred {
    if t.as_sym().is_some() {
        return Pred::True;
    }
    Pred::and([
        Pred::cmp(CmpOp::Le, Term::Const(w.min()), t.clone()),
        Pred::cmp(CmpOp::Le, t.clone(), Term::Const(w.max())),
    ])
}

#[derive(Debug, Clone, Default)]
struct Bounds {
    lo: Option<i128>,
    hi: Option<i128>,
}

fn decide(b: &Bounds, op: CmpOp, m: i128) -> Option<bool> {
    let lo = b.lo.unwrap_or(i128::MIN);
    let hi = b.hi.unwrap_or(i128::MAX);
    match op {
        CmpOp::Le if hi <= m => Some(true),
        CmpOp::Le if lo > m => Some(false),
        CmpOp::Ge if lo >= m => Some(true),
        CmpOp::Ge if hi < m => Some(false),
        CmpOp::Eq if lo == m && hi == m => Some(true),
        CmpOp::Eq if m < lo || m > hi => Some(false),
        CmpOp::Ne => decide(b, CmpOp::Eq, m).map(|v| !v),
        _ => None,
    }
}

fn key(form: &Lin) -> Vec<(Term, i128)> {
    form.coeffs.iter().map(|(t, c)| (t.clone(), *c)).collect()
}

fn decide_atoms(p: &Pred, bounds: &BTreeMap<Vec<(Term, i128)>, Bounds>, w: IntWidth) -> Pred {
    match p {
        Pred::Cmp(op, x, y) => {
            if let Some(Norm::Atom(a)) = normalize(*op, x, y, w) {
                if let Some(v) = bounds.get(&key(&a.form)).and_then(|b| decide(b, a.op, a.bound)) {
                    return if v { Pred::True } else { Pred::False };
                }
            }
            p.clone()
        }
        Pred::Not(q) => Pred::not(decide_atoms(q, bounds, w)),
        Pred::And(qs) => Pred::and(qs.iter().map(|q| decide_atoms(q, bounds, w))),
        Pred::Or(qs) => Pred::or(qs.iter().map(|q| decide_atoms(q, bounds, w))),
        Pred::Implies(a, b) => Pred::implies(decide_atoms(a, bounds, w), decide_atoms(b, bounds, w)),
        Pred::True | Pred::False => p.clone(),
    }
}

/// Replace subformulas of the goal that are hypotheses by `\true`, and
/// negated hypotheses by `\false`.
fn assume(p: &Pred, known: &BTreeSet<&Pred>) -> Pred {
    if known.contains(p) {
        return Pred::True;
    }
    match p {
        Pred::Not(q) if known.contains(q.as_ref()) => Pred::False,
        Pred::Not(q) => Pred::not(assume(q, known)),
        Pred::And(qs) => Pred::and(qs.iter().map(|q| assume(q, known))),
        Pred::Or(qs) => Pred::or(qs.iter().map(|q| assume(q, known))),
        Pred::Implies(a, b) => Pred::implies(assume(a, known), assume(b, known)),
        _ => p.clone(),
    }
}

fn atom_bounds(hyps: &[Pred], w: IntWidth) -> BTreeMap<Vec<(Term, i128)>, Bounds> {
    let mut bounds: BTreeMap<Vec<(Term, i128)>, Bounds> = BTreeMap::new();
    for h in hyps {
        let Pred::Cmp(op, x, y) = h else { continue };
        let Some(Norm::Atom(a)) = normalize(*op, x, y, w) else { continue };
        let b = bounds.entry(key(&a.form)).or_default();
        if matches!(a.op, CmpOp::Le | CmpOp::Eq) {
            b.hi = Some(b.hi.map_or(a.bound, |h| h.min(a.bound)));
        }
        if matches!(a.op, CmpOp::Ge | CmpOp::Eq) {
            b.lo = Some(b.lo.map_or(a.bound, |l| l.max(a.bound)));
        }
    }
    bounds
}

/// A formula equivalent for validity to the input, together with the
/// eliminated symbols in elimination order.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub formula: Pred,
    pub eliminated: Vec<(Sym, Term)>,
}

pub fn reduce(formula: &Pred, w: IntWidth) -> Reduced {
    let mut hyps = Vec::new();
    let mut goal = split(formula, &mut hyps);
    let mut eliminated = Vec::new();
    loop {
        let Some((i, (v, t))) = hyps.iter().enumerate().find_map(|(i, h)| definition(h, w).map(|d| (i, d))) else {
            break;
        };
        hyps.remove(i);
        let b = bindings([(v.clone(), t.clone())]);
        let mut next = Vec::new();
        for h in hyps.iter().map(|h| h.substitute(&b).simplify(w)) {
            push_conjuncts(&h, &mut next);
        }
        push_conjuncts(&in_range(&t, w), &mut next);
        hyps = next;
        goal = goal.substitute(&b);
        for (_, u) in eliminated.iter_mut() {
            *u = Term::substitute(u, &b);
        }
        eliminated.push((v, t));
        if hyps.iter().any(|h| *h == Pred::False) {
            break;
        }
    }
    let mut hyps: Vec<Pred> = hyps.iter().map(|h| canonical(h, w).simplify(w)).collect();
    let mut bounds = atom_bounds(&hyps, w);
    // Compound hypotheses are simplified under the atomic ones until nothing changes.
    for _ in 0..4 {
        let atoms: Vec<Pred> = hyps.iter().filter(|h| matches!(h, Pred::Cmp(..))).cloned().collect();
        let known: BTreeSet<&Pred> = atoms.iter().collect();
        let mut next = Vec::new();
        for h in &hyps {
            let h2 = if matches!(h, Pred::Cmp(..)) {
                h.clone()
            } else {
                assume(&decide_atoms(h, &bounds, w), &known).simplify(w)
            };
            push_conjuncts(&h2, &mut next);
        }
        let changed = next != hyps;
        hyps = next;
        bounds = atom_bounds(&hyps, w);
        if !changed || hyps.contains(&Pred::False) {
            break;
        }
    }
    let contradiction = hyps.contains(&Pred::False)
        || bounds
            .values()
            .any(|b| matches!((b.lo, b.hi), (Some(l), Some(h)) if l > h));
    let goal = if contradiction {
        Pred::True
    } else {
        let known: BTreeSet<&Pred> = hyps.iter().collect();
        assume(&decide_atoms(&canonical(&goal, w).simplify(w), &bounds, w), &known)
    };
    Reduced {
        formula: Pred::implies(Pred::and(hyps), goal).simplify(w),
        eliminated,
    }
}
