//! Exact sparse bivariate polynomial arithmetic over the rationals.
//!
//! Polynomials are maps from monomials to `BigRational` coefficients with no
//! stored zeros. Term order in any serialized output is graded lex, then lex,
//! descending, so rendered output is byte-stable.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Exact rational coefficient. Always reduced, denominator positive.
pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Variable of the ambient ring.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Var {
    X,
    Y,
}

/// A monomial `x^ex * y^ey` with non-negative exponents.
///
/// The `Ord` instance is graded lex ascending (total degree, then `ex`,
/// then `ey`), so reverse iteration over a `BTreeMap` keyed by monomials
/// yields the canonical descending term order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Monomial {
    pub ex: u32,
    pub ey: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { ex: 0, ey: 0 };

    pub fn new(ex: u32, ey: u32) -> Self {
        Monomial { ex, ey }
    }

    pub fn total_deg(&self) -> u32 {
        self.ex + self.ey
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial::new(self.ex + other.ex, self.ey + other.ey)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.ex <= other.ex && self.ey <= other.ey
    }

    /// Exact quotient; caller must ensure divisibility.
    pub fn div(&self, other: &Monomial) -> Monomial {
        debug_assert!(other.divides(self));
        Monomial::new(self.ex - other.ex, self.ey - other.ey)
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial::new(self.ex.max(other.ex), self.ey.max(other.ey))
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial::new(self.ex.min(other.ex), self.ey.min(other.ey))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.total_deg(), self.ex, self.ey).cmp(&(other.total_deg(), other.ex, other.ey))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.ex, self.ey) {
            (0, 0) => write!(f, "1"),
            (ex, 0) => write_var(f, 'x', ex),
            (0, ey) => write_var(f, 'y', ey),
            (ex, ey) => {
                write_var(f, 'x', ex)?;
                write!(f, "*")?;
                write_var(f, 'y', ey)
            }
        }
    }
}

fn write_var(f: &mut fmt::Formatter<'_>, v: char, e: u32) -> fmt::Result {
    if e == 1 {
        write!(f, "{v}")
    } else {
        write!(f, "{v}^{e}")
    }
}

/// A Laurent monomial `x^ex * y^ey`; either exponent may be negative.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct LaurentMonomial {
    pub ex: i64,
    pub ey: i64,
}

impl LaurentMonomial {
    pub fn new(ex: i64, ey: i64) -> Self {
        LaurentMonomial { ex, ey }
    }
}

/// Sparse exact bivariate polynomial over the rationals.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::monomial(Monomial::ONE, Rat::one())
    }

    pub fn var(v: Var) -> Self {
        match v {
            Var::X => Poly::monomial(Monomial::new(1, 0), Rat::one()),
            Var::Y => Poly::monomial(Monomial::new(0, 1), Rat::one()),
        }
    }

    pub fn monomial(m: Monomial, c: Rat) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn constant(c: Rat) -> Self {
        Poly::monomial(Monomial::ONE, c)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rat)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    /// Terms in the canonical descending order used for serialization.
    pub fn terms_desc(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter().rev()
    }

    pub fn support(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(*m, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (*m, k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.mul_keep(other, |_| true)
    }

    /// Product with terms failing `keep` dropped as they are produced.
    ///
    /// Sound for truncation predicates closed under monomial multiples
    /// (deg or filtration cutoffs): a dropped partial product can never
    /// contribute to a kept monomial.
    pub fn mul_keep(&self, other: &Poly, keep: impl Fn(&Monomial) -> bool) -> Poly {
        let mut out = Poly::zero();
        let (small, big) = if self.num_terms() <= other.num_terms() {
            (self, other)
        } else {
            (other, self)
        };
        for (m1, c1) in small.terms() {
            for (m2, c2) in big.terms() {
                let m = m1.mul(m2);
                if keep(&m) {
                    out.add_term(m, c1 * c2);
                }
            }
        }
        out
    }

    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Formal partial derivative.
    pub fn partial(&self, v: Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in self.terms() {
            match v {
                Var::X => {
                    if m.ex > 0 {
                        out.add_term(Monomial::new(m.ex - 1, m.ey), c * rat_int(m.ex as i64));
                    }
                }
                Var::Y => {
                    if m.ey > 0 {
                        out.add_term(Monomial::new(m.ex, m.ey - 1), c * rat_int(m.ey as i64));
                    }
                }
            }
        }
        out
    }

    /// Sum of the terms `t` of `self` with `m * t` a genuine monomial.
    pub fn laurent_restrict(&self, m: &LaurentMonomial) -> Poly {
        self.filter(|t| t.ex as i64 + m.ex >= 0 && t.ey as i64 + m.ey >= 0)
    }

    /// Splits off the maximal monomial factor: `self = factor * sat`.
    ///
    /// Returns `(sat, factor)`; panics on the zero polynomial.
    pub fn saturate(&self) -> (Poly, Monomial) {
        assert!(!self.is_zero(), "saturate of zero polynomial");
        let mut ex = u32::MAX;
        let mut ey = u32::MAX;
        for m in self.support() {
            ex = ex.min(m.ex);
            ey = ey.min(m.ey);
        }
        let factor = Monomial::new(ex, ey);
        let sat = Poly {
            terms: self.terms.iter().map(|(m, c)| (m.div(&factor), c.clone())).collect(),
        };
        (sat, factor)
    }

    /// Minimal total degree among terms; `None` for the zero polynomial.
    pub fn order(&self) -> Option<u32> {
        self.support().map(|m| m.total_deg()).min()
    }

    pub fn degree(&self) -> Option<u32> {
        self.support().map(|m| m.total_deg()).max()
    }

    /// Standard-degree jet: terms of total degree at most `k`.
    pub fn jet(&self, k: u32) -> Poly {
        self.filter(|m| m.total_deg() <= k)
    }

    /// Full substitution `f(sx, sy)`, exactly expanded.
    pub fn substitute(&self, sx: &Poly, sy: &Poly) -> Poly {
        self.substitute_keep(sx, sy, |_| true)
    }

    /// Substitution with on-the-fly truncation by `keep`.
    ///
    /// `keep` must be closed under divisors of monomial products, i.e. once a
    /// monomial is dropped every multiple of it would be dropped too.
    pub fn substitute_keep(
        &self,
        sx: &Poly,
        sy: &Poly,
        keep: impl Fn(&Monomial) -> bool + Copy,
    ) -> Poly {
        // group by ex so each power of sx is computed once
        let mut xpows: Vec<Poly> = vec![Poly::one()];
        let mut ypows: Vec<Poly> = vec![Poly::one()];
        let pow = |pows: &mut Vec<Poly>, base: &Poly, e: usize| {
            while pows.len() <= e {
                let next = pows.last().unwrap().mul_keep(base, keep);
                pows.push(next);
            }
            pows[e].clone()
        };
        let mut out = Poly::zero();
        for (m, c) in self.terms() {
            let px = pow(&mut xpows, sx, m.ex as usize);
            let py = pow(&mut ypows, sy, m.ey as usize);
            let prod = px.mul_keep(&py, keep);
            for (k, v) in prod.terms() {
                out.add_term(*k, v * c);
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms_desc().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, "-")?;
            } else {
                write!(f, "+")?;
            }
            let a = c.abs();
            if *m == Monomial::ONE {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Error produced by [`parse`], with a byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected integer literal");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse::<BigInt>().unwrap())
    }

    fn uint(&mut self) -> Result<u32, ParseError> {
        let n = self.integer()?;
        u32::try_from(&n).map_or_else(|_| self.err("exponent out of range"), Ok)
    }

    // factor := integer ('/' integer)? | ('x'|'y') ('^' uint)?
    fn factor(&mut self) -> Result<Poly, ParseError> {
        match self.peek() {
            Some(b'x') | Some(b'y') => {
                let v = self.bump().unwrap();
                let e = if self.peek() == Some(b'^') {
                    self.bump();
                    self.uint()?
                } else {
                    1
                };
                let m = if v == b'x' {
                    Monomial::new(e, 0)
                } else {
                    Monomial::new(0, e)
                };
                Ok(Poly::monomial(m, Rat::one()))
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                if self.peek() == Some(b'/') {
                    self.bump();
                    let d = self.integer()?;
                    if d.is_zero() {
                        return self.err("zero denominator");
                    }
                    Ok(Poly::constant(Rat::new(n, d)))
                } else {
                    Ok(Poly::constant(Rat::from_integer(n)))
                }
            }
            Some(c) if c.is_ascii_alphabetic() => self.err(format!(
                "unknown variable '{}'; only x and y are allowed",
                c as char
            )),
            Some(c) => self.err(format!("unexpected character '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }

    // term := ['-'|'+'] factor ('*' factor)*
    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut sign = Rat::one();
        loop {
            match self.peek() {
                Some(b'-') => {
                    self.bump();
                    sign = -sign;
                }
                Some(b'+') => {
                    self.bump();
                }
                _ => break,
            }
        }
        let mut p = self.factor()?;
        while self.peek() == Some(b'*') {
            self.bump();
            let q = self.factor()?;
            p = p.mul(&q);
        }
        Ok(p.scale(&sign))
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut p = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') | Some(b'-') => {
                    // sign is consumed by term()
                    let q = self.term()?;
                    p = p.add(&q);
                }
                Some(c) => return self.err(format!("unexpected character '{}'", c as char)),
                None => return Ok(p),
            }
        }
    }
}

/// Parses the textual polynomial grammar used by the CLI.
pub fn parse(text: &str) -> Result<Poly, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    if p.peek().is_none() {
        return p.err("empty input");
    }
    p.expr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn p(s: &str) -> Poly {
        parse(s).unwrap()
    }

    #[test]
    fn parse_basic() {
        let f = p("x^4+y^4");
        assert_eq!(f.num_terms(), 2);
        assert_eq!(f.coeff(&Monomial::new(4, 0)), Rat::one());
        assert_eq!(f.coeff(&Monomial::new(0, 4)), Rat::one());

        let f = p("y^28+x*y^7+x^2*y^3+11*x^2*y^4+x^22");
        assert_eq!(f.num_terms(), 5);
        assert_eq!(f.coeff(&Monomial::new(2, 4)), rat_int(11));

        assert!(p("0").is_zero());
        assert_eq!(p("1/2*x^4"), p("x^4").scale(&rat(1, 2)));
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(parse("x^2 + z").is_err());
        assert!(parse("2x").is_err()); // implicit multiplication
        assert!(parse("1/0").is_err());
        assert!(parse("").is_err());
        let e = parse("x^2+*y").unwrap_err();
        assert!(e.pos > 0);
    }

    #[test]
    fn display_canonical_order() {
        assert_eq!(p("x^2*y^3+11*x^2*y^4").to_string(), "11*x^2*y^4+x^2*y^3");
        assert_eq!(p("0").to_string(), "0");
        assert_eq!(p("x-y").to_string(), "x-y");
        assert_eq!(p("-x^2+1/2*y").to_string(), "-x^2+1/2*y");
    }

    #[test]
    fn partial_matches_hand_values() {
        let f = p("y^28+x*y^7+x^2*y^3+11*x^2*y^4+x^22");
        assert_eq!(f.partial(Var::X), p("2*x*y^3+22*x*y^4+y^7+22*x^21"));
        let g = p("x^2*y^4+x^4*y^2+x^20+y^40+60*x^21*y^14");
        assert_eq!(
            g.partial(Var::Y),
            p("2*x^4*y+4*x^2*y^3+840*x^21*y^13+40*y^39")
        );
        assert!(p("7").partial(Var::X).is_zero());
    }

    #[test]
    fn laurent_restrict_cases() {
        // dy of example 1's germ, restricted by 1/y^5
        let f = p("3*x^2*y^2+44*x^2*y^3+7*x*y^6+28*y^27");
        let r = f.laurent_restrict(&LaurentMonomial::new(0, -5));
        assert_eq!(r, p("7*x*y^6+28*y^27"));
        assert_eq!(f.laurent_restrict(&LaurentMonomial::new(0, 0)), f);
        assert!(p("x^2")
            .laurent_restrict(&LaurentMonomial::new(0, -1))
            .is_zero());
    }

    #[test]
    fn saturate_cases() {
        let (s, m) = p("x^2*y^3+x^3*y^2").saturate();
        assert_eq!(s, p("y+x"));
        assert_eq!(m, Monomial::new(2, 2));
        let (s, m) = p("x^4+y^4").saturate();
        assert_eq!(s, p("x^4+y^4"));
        assert_eq!(m, Monomial::ONE);
        let (s, m) = p("x^2*y^4+x^4*y^2").saturate();
        assert_eq!(s, p("y^2+x^2"));
        assert_eq!(m, Monomial::new(2, 2));
    }

    #[test]
    fn substitute_cases() {
        let f = p("x^2+y");
        assert_eq!(f.substitute(&p("x+y"), &p("y")), p("x^2+2*x*y+y^2+y"));
        let g = p("y^28+x*y^7+x^2*y^3+11*x^2*y^4+x^22");
        assert_eq!(g.substitute(&Poly::var(Var::X), &Poly::var(Var::Y)), g);
        assert_eq!(p("x^4+y^4").scale(&rat(1, 2)), p("1/2*x^4+1/2*y^4"));
    }

    #[test]
    fn substitute_keep_agrees_with_jet() {
        let f = p("x^3+x*y^2+y^5");
        let sx = p("x+y^2");
        let sy = p("y+x^2+x*y");
        let full = f.substitute(&sx, &sy).jet(6);
        let trunc = f.substitute_keep(&sx, &sy, |m| m.total_deg() <= 6);
        assert_eq!(full, trunc);
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec(((0u32..5, 0u32..5), -6i64..7), 0..6).prop_map(|ts| {
            Poly::from_terms(
                ts.into_iter()
                    .map(|((a, b), c)| (Monomial::new(a, b), rat_int(c))),
            )
        })
    }

    proptest! {
        #[test]
        fn ring_distributivity(f in arb_poly(), g in arb_poly(), h in arb_poly()) {
            prop_assert_eq!(f.add(&g).mul(&h), f.mul(&h).add(&g.mul(&h)));
        }

        #[test]
        fn partial_is_derivation(f in arb_poly(), g in arb_poly()) {
            let lhs = f.mul(&g).partial(Var::X);
            let rhs = f.partial(Var::X).mul(&g).add(&f.mul(&g.partial(Var::X)));
            prop_assert_eq!(lhs, rhs);
            let lhs = f.mul(&g).partial(Var::Y);
            let rhs = f.partial(Var::Y).mul(&g).add(&f.mul(&g.partial(Var::Y)));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn saturate_reconstructs(f in arb_poly()) {
            prop_assume!(!f.is_zero());
            let (s, m) = f.saturate();
            let back = s.mul_monomial(&m, &Rat::one());
            prop_assert_eq!(back, f);
            // saturated part has no monomial factor
            let (_, m2) = s.saturate();
            prop_assert_eq!(m2, Monomial::ONE);
        }

        #[test]
        fn laurent_restrict_properties(f in arb_poly(), ex in -4i64..3, ey in -4i64..3) {
            let m = LaurentMonomial::new(ex, ey);
            let r = f.laurent_restrict(&m);
            // restriction is idempotent
            prop_assert_eq!(r.laurent_restrict(&m), r.clone());
            // m * r has only non-negative exponents
            for t in r.support() {
                prop_assert!(t.ex as i64 + ex >= 0 && t.ey as i64 + ey >= 0);
            }
        }

        #[test]
        fn parse_roundtrip(f in arb_poly()) {
            let s = f.to_string();
            prop_assert_eq!(parse(&s).unwrap(), f);
        }
    }
}
