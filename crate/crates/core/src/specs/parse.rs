use super::*;
use crate::frontend::lexer::{tokenize, Tok, Token};

/// Parse one clause, e.g. `requires INT_MIN < x;`. The trailing `;` may be
/// omitted at end of input.
pub fn parse_clause(text: &str) -> Result<Clause, SpecError> {
    let mut p = P::new(text)?;
    let c = p.clause()?;
    p.finish()?;
    Ok(c)
}

/// Parse a bare predicate.
pub fn parse_predicate(text: &str) -> Result<Pred, SpecError> {
    let mut p = P::new(text)?;
    let pred = p.pred()?;
    if p.peek() != &Tok::Eof {
        return Err(p.unexpected("end of predicate"));
    }
    Ok(pred)
}

const UNSUPPORTED_CLAUSES: &[&str] = &[
    "assigns",
    "decreases",
    "terminates",
    "behavior",
    "behaviors",
    "complete",
    "disjoint",
    "predicate",
    "logic",
    "axiomatic",
    "lemma",
    "ghost",
    "frees",
    "allocates",
    "exits",
    "breaks",
    "continues",
    "returns",
    "check",
    "admit",
    "global",
];

struct P {
    toks: Vec<Token>,
    pos: usize,
}

impl P {
    fn new(text: &str) -> Result<P, SpecError> {
        let toks = tokenize(text, false).map_err(|e| SpecError::Syntax {
            offset: e.offset,
            message: e.message,
        })?;
        Ok(P { toks, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].offset
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Tok::Punct(q) if *q == p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), SpecError> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{p}`")))
        }
    }

    fn unexpected(&self, expected: &str) -> SpecError {
        SpecError::Syntax {
            offset: self.offset(),
            message: format!("expected {expected}, found {}", self.peek().describe()),
        }
    }

    fn unknown(&self, construct: String) -> SpecError {
        SpecError::UnknownConstruct {
            construct,
            offset: self.offset(),
        }
    }

    fn finish(&mut self) -> Result<(), SpecError> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of clause"))
        }
    }

    fn terminator(&mut self) -> Result<(), SpecError> {
        if self.eat(";") || self.peek() == &Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("`;`"))
        }
    }

    fn clause(&mut self) -> Result<Clause, SpecError> {
        let Tok::Ident(kw) = self.peek().clone() else {
            return Err(self.unexpected("a clause keyword"));
        };
        self.bump();
        let c = match kw.as_str() {
            "requires" => Clause::Requires(self.pred()?),
            "ensures" => Clause::Ensures(self.pred()?),
            "assert" => {
                let label = match (self.peek().clone(), self.peek_at(1)) {
                    (Tok::Ident(l), Tok::Punct(":")) => {
                        self.bump();
                        self.bump();
                        Some(l)
                    }
                    _ => None,
                };
                Clause::Assert {
                    label,
                    pred: self.pred()?,
                }
            }
            "loop" => match self.bump() {
                Tok::Ident(k) if k == "invariant" => Clause::LoopInvariant(self.pred()?),
                Tok::Ident(k) if k == "assigns" => Clause::LoopAssigns(self.assigns()?),
                Tok::Ident(k) => {
                    self.pos -= 1;
                    return Err(self.unknown(format!("loop {k}")));
                }
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected("`invariant` or `assigns`"));
                }
            },
            k if UNSUPPORTED_CLAUSES.contains(&k) => {
                self.pos -= 1;
                return Err(self.unknown(k.to_string()));
            }
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("a clause keyword"));
            }
        };
        self.terminator()?;
        Ok(c)
    }

    fn assigns(&mut self) -> Result<Vec<String>, SpecError> {
        if let Tok::Backslash(w) = self.peek() {
            if w == "nothing" {
                self.bump();
                return Ok(vec![]);
            }
            return Err(self.unknown(format!("\\{w}")));
        }
        let mut out = Vec::new();
        loop {
            match self.bump() {
                Tok::Ident(v) => out.push(v),
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected("a variable name"));
                }
            }
            if !self.eat(",") {
                break;
            }
        }
        Ok(out)
    }

    pub(super) fn pred(&mut self) -> Result<Pred, SpecError> {
        let lhs = self.or()?;
        if self.eat("==>") {
            let rhs = self.pred()?;
            return Ok(Pred::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Pred, SpecError> {
        let first = self.and()?;
        let mut ps = vec![first];
        while self.eat("||") {
            ps.push(self.and()?);
        }
        Ok(if ps.len() == 1 { ps.pop().unwrap() } else { Pred::Or(ps) })
    }

    fn and(&mut self) -> Result<Pred, SpecError> {
        let first = self.unary()?;
        let mut ps = vec![first];
        while self.eat("&&") {
            ps.push(self.unary()?);
        }
        Ok(if ps.len() == 1 { ps.pop().unwrap() } else { Pred::And(ps) })
    }

    fn unary(&mut self) -> Result<Pred, SpecError> {
        if self.eat("!") {
            return Ok(Pred::Not(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Pred, SpecError> {
        match self.peek().clone() {
            Tok::Backslash(w) if w == "true" => {
                self.bump();
                return Ok(Pred::True);
            }
            Tok::Backslash(w) if w == "false" => {
                self.bump();
                return Ok(Pred::False);
            }
            Tok::Punct("(") => {
                let save = self.pos;
                self.bump();
                let inner = self.pred().and_then(|p| self.expect(")").map(|_| p));
                match inner {
                    Ok(p) => return Ok(p),
                    Err(e @ SpecError::UnknownConstruct { .. }) => return Err(e),
                    Err(e1) => {
                        let reached = self.pos;
                        self.pos = save;
                        return self.comparison().map_err(|e2| {
                            if reached > self.pos {
                                e1
                            } else {
                                e2
                            }
                        });
                    }
                }
            }
            _ => {}
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Pred, SpecError> {
        let a = self.term()?;
        let op = match self.peek() {
            Tok::Punct("==") => CmpOp::Eq,
            Tok::Punct("!=") => CmpOp::Ne,
            Tok::Punct("<") => CmpOp::Lt,
            Tok::Punct("<=") => CmpOp::Le,
            Tok::Punct(">") => CmpOp::Gt,
            Tok::Punct(">=") => CmpOp::Ge,
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.bump();
        let b = self.term()?;
        Ok(Pred::Cmp(op, a, b))
    }

    fn term(&mut self) -> Result<Term, SpecError> {
        let mut lhs = self.mul()?;
        loop {
            let op = match self.peek() {
                Tok::Punct("+") => ArithOp::Add,
                Tok::Punct("-") => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mul()?;
            lhs = Term::bin(op, lhs, rhs);
        }
    }

    fn mul(&mut self) -> Result<Term, SpecError> {
        let mut lhs = self.tunary()?;
        loop {
            let op = match self.peek() {
                Tok::Punct("*") => ArithOp::Mul,
                Tok::Punct("/") => ArithOp::Div,
                Tok::Punct("%") => ArithOp::Rem,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.tunary()?;
            lhs = Term::bin(op, lhs, rhs);
        }
    }

    fn tunary(&mut self) -> Result<Term, SpecError> {
        if self.eat("-") {
            if let Tok::Int(v) = *self.peek() {
                self.bump();
                return Ok(Term::Const(-(v as i128)));
            }
            return Ok(Term::neg(self.tunary()?));
        }
        self.tprimary()
    }

    fn tprimary(&mut self) -> Result<Term, SpecError> {
        let offset = self.offset();
        match self.bump() {
            Tok::Int(v) => {
                if v > i64::MAX as u128 {
                    return Err(SpecError::Syntax {
                        offset,
                        message: "integer constant too large".into(),
                    });
                }
                Ok(Term::Const(v as i128))
            }
            Tok::Ident(name) => {
                if matches!(self.peek(), Tok::Punct("(") | Tok::Punct("[")) {
                    self.pos -= 1;
                    return Err(self.unknown(format!("{name}(...)")));
                }
                Ok(match name.as_str() {
                    "INT_MIN" => Term::IntMin,
                    "INT_MAX" => Term::IntMax,
                    _ => Term::Var(name),
                })
            }
            Tok::Backslash(w) if w == "result" => Ok(Term::Result),
            Tok::Backslash(w) if w == "old" => {
                self.expect("(")?;
                let name = match self.bump() {
                    Tok::Ident(n) => n,
                    _ => {
                        self.pos -= 1;
                        return Err(self.unexpected("a variable name inside \\old"));
                    }
                };
                self.expect(")")?;
                Ok(Term::Old(name))
            }
            Tok::Backslash(w) => {
                self.pos -= 1;
                Err(self.unknown(format!("\\{w}")))
            }
            Tok::Punct("(") => {
                let save = self.pos;
                if let Ok(t) = self.term().and_then(|t| self.expect(")").map(|_| t)) {
                    return Ok(t);
                }
                self.pos = save;
                let c = self.pred()?;
                self.expect("?")?;
                let a = self.term()?;
                self.expect(":")?;
                let b = self.term()?;
                self.expect(")")?;
                Ok(Term::Ite(Box::new(c), Box::new(a), Box::new(b)))
            }
            _ => {
                self.pos -= 1;
                Err(self.unexpected("a term"))
            }
        }
    }
}
