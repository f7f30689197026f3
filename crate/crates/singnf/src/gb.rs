//! Gröbner / standard basis kernel over Q[x,y]: a global weighted order and a
//! local order, Buchberger and Mora completion, normal forms with division
//! certificates, Milnor numbers via staircase counting, monomial k-bases and
//! truncation-ideal generators.

use crate::newton::{PiecewiseWeight, Weight};
use crate::poly::{Monomial, Poly, Rat, Var};
use num_traits::One;
use std::cmp::Ordering;
use std::collections::BTreeSet;

/// Monomial order: one global weighted order for lifting steps, one local
/// order for Milnor numbers and determinacy.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MonOrder {
    /// Weighted degree, reverse lex tie break; a well-order.
    GlobalWeightedDegRevLex(Weight),
    /// Negative degree reverse lex: 1 > x > y.
    LocalNegDegRevLex,
}

impl MonOrder {
    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self {
            MonOrder::GlobalWeightedDegRevLex(w) => {
                w.deg(a).cmp(&w.deg(b)).then(b.ey.cmp(&a.ey))
            }
            MonOrder::LocalNegDegRevLex => b
                .total_deg()
                .cmp(&a.total_deg())
                .then(b.ey.cmp(&a.ey)),
        }
    }

    pub fn is_global(&self) -> bool {
        matches!(self, MonOrder::GlobalWeightedDegRevLex(_))
    }

    /// Leading term of `p` under this order.
    pub fn lt<'a>(&self, p: &'a Poly) -> Option<(&'a Monomial, &'a Rat)> {
        p.terms().max_by(|(m1, _), (m2, _)| self.cmp(m1, m2))
    }
}

/// A completed standard/Gröbner basis.
#[derive(Clone, Debug)]
pub struct GBasis {
    pub gens: Vec<Poly>,
    pub order: MonOrder,
    /// Interreduced (tails reduced, leading coefficients 1). Local bases are
    /// lead-minimal and monic but keep their tails.
    pub reduced: bool,
    /// Expressions of the basis elements over the original generators;
    /// tracked for global orders only (local lifts hold only up to units).
    pub lifts: Option<Vec<Vec<Poly>>>,
    n_orig: usize,
}

/// Division certificate: `unit * dividend = sum coeffs[i] * gens[i] + remainder`.
/// The unit is 1 for global orders; Mora reduction may return a unit with
/// nonzero constant term and higher-order tail.
#[derive(Clone, Debug)]
pub struct LiftRecord {
    pub coeffs: Vec<Poly>,
    pub remainder: Poly,
    pub unit: Poly,
}

impl LiftRecord {
    /// Exact check of the certificate against the given generators.
    pub fn verify(&self, dividend: &Poly, gens: &[Poly]) -> bool {
        let mut acc = self.remainder.clone();
        for (c, g) in self.coeffs.iter().zip(gens) {
            acc = acc.add(&c.mul(g));
        }
        self.unit.mul(dividend) == acc
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GbError {
    #[error("empty or all-zero generator list")]
    NoGenerators,
    #[error("ideal is not zero-dimensional")]
    NotZeroDimensional,
}

fn spair_key(order: &MonOrder, a: &Monomial, b: &Monomial) -> i64 {
    let l = a.lcm(b);
    match order {
        MonOrder::GlobalWeightedDegRevLex(w) => w.deg(&l),
        MonOrder::LocalNegDegRevLex => l.total_deg() as i64,
    }
}

/// Strong normal form against a list of monic divisors (global orders).
/// Returns the remainder and one cofactor per divisor.
fn global_nf(order: &MonOrder, p: &Poly, divisors: &[Poly]) -> (Poly, Vec<Poly>) {
    let mut work = p.clone();
    let mut rem = Poly::zero();
    let mut cofs = vec![Poly::zero(); divisors.len()];
    while let Some((lm, lc)) = order.lt(&work) {
        let (lm, lc) = (*lm, lc.clone());
        let hit = divisors
            .iter()
            .position(|g| !g.is_zero() && order.lt(g).unwrap().0.divides(&lm));
        match hit {
            Some(k) => {
                let g = &divisors[k];
                let (gm, gc) = order.lt(g).unwrap();
                let qm = lm.div(gm);
                let qc = &lc / gc;
                cofs[k].add_term(qm, qc.clone());
                let sub = g.mul_monomial(&qm, &qc);
                work = work.sub(&sub);
            }
            None => {
                rem.add_term(lm, lc.clone());
                work.add_term(lm, -lc);
            }
        }
    }
    (rem, cofs)
}

fn ecart(order: &MonOrder, p: &Poly) -> i64 {
    let lead = order.lt(p).unwrap().0.total_deg() as i64;
    p.degree().unwrap() as i64 - lead
}

/// Mora weak normal form. Tracks, for every in-flight polynomial, the pair
/// (unit, cofactors) with invariant `unit * p = sum cof * gens + value`.
fn mora_nf(order: &MonOrder, p: &Poly, gens: &[Poly], track: bool) -> LiftRecord {
    struct Elt {
        value: Poly,
        unit: Poly,
        cofs: Vec<Poly>,
    }
    let mut t: Vec<Elt> = gens
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let mut cofs = vec![Poly::zero(); if track { gens.len() } else { 0 }];
            if track {
                cofs[i] = Poly::one();
            }
            Elt {
                value: g.clone(),
                unit: Poly::zero(),
                cofs,
            }
        })
        .collect();
    let mut h = Elt {
        value: p.clone(),
        unit: Poly::one(),
        cofs: vec![Poly::zero(); if track { gens.len() } else { 0 }],
    };
    while !h.value.is_zero() {
        let (hm, hc) = {
            let (m, c) = order.lt(&h.value).unwrap();
            (*m, c.clone())
        };
        let mut best: Option<(usize, i64)> = None;
        for (i, e) in t.iter().enumerate() {
            if e.value.is_zero() {
                continue;
            }
            let (gm, _) = order.lt(&e.value).unwrap();
            if gm.divides(&hm) {
                let ec = ecart(order, &e.value);
                if best.map_or(true, |(_, b)| ec < b) {
                    best = Some((i, ec));
                }
            }
        }
        let Some((k, ek)) = best else { break };
        if ek > ecart(order, &h.value) {
            // stash the current state as a future reducer
            t.push(Elt {
                value: h.value.clone(),
                unit: h.unit.clone(),
                cofs: h.cofs.clone(),
            });
        }
        let (gm, gc) = {
            let (m, c) = order.lt(&t[k].value).unwrap();
            (*m, c.clone())
        };
        let qm = hm.div(&gm);
        let qc = &hc / &gc;
        let g = &t[k];
        h.value = h.value.sub(&g.value.mul_monomial(&qm, &qc));
        if track {
            h.unit = h.unit.sub(&g.unit.mul_monomial(&qm, &qc));
            for (a, b) in h.cofs.iter_mut().zip(&g.cofs) {
                *a = a.sub(&b.mul_monomial(&qm, &qc));
            }
        }
    }
    // invariant: unit * p = sum cofs * gens + value, unit has a unit constant term
    LiftRecord {
        coeffs: h.cofs.into_iter().map(|c| c.neg()).collect(),
        remainder: h.value,
        unit: h.unit,
    }
}

fn monic(order: &MonOrder, p: &Poly) -> (Poly, Rat) {
    let lc = order.lt(p).unwrap().1.clone();
    let inv = Rat::one() / &lc;
    (p.scale(&inv), inv)
}

/// Buchberger (global) or Mora (local) completion; pairs are processed by
/// leading-term lcm degree, ties by input index.
pub fn groebner(gens: &[Poly], order: MonOrder) -> Result<GBasis, GbError> {
    let inputs: Vec<Poly> = gens.to_vec();
    let track = order.is_global();
    let mut basis: Vec<(Poly, Vec<Poly>)> = Vec::new();
    for (i, g) in inputs.iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        let (m, inv) = monic(&order, g);
        let mut lift = vec![Poly::zero(); if track { inputs.len() } else { 0 }];
        if track {
            lift[i] = Poly::constant(inv);
        }
        basis.push((m, lift));
    }
    if basis.is_empty() {
        return Err(GbError::NoGenerators);
    }
    let mut pairs: BTreeSet<(i64, usize, usize)> = BTreeSet::new();
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            let key = spair_key(
                &order,
                order.lt(&basis[i].0).unwrap().0,
                order.lt(&basis[j].0).unwrap().0,
            );
            pairs.insert((key, i, j));
        }
    }
    while let Some(&(key, i, j)) = pairs.iter().next() {
        pairs.remove(&(key, i, j));
        let (mi, _) = order.lt(&basis[i].0).unwrap();
        let (mj, _) = order.lt(&basis[j].0).unwrap();
        let (mi, mj) = (*mi, *mj);
        if mi.gcd(&mj) == Monomial::ONE {
            continue; // product criterion
        }
        let l = mi.lcm(&mj);
        let one = Rat::one();
        let spoly = basis[i]
            .0
            .mul_monomial(&l.div(&mi), &one)
            .sub(&basis[j].0.mul_monomial(&l.div(&mj), &one));
        let (rem, lift) = if track {
            let divisors: Vec<Poly> = basis.iter().map(|(g, _)| g.clone()).collect();
            let (rem, cofs) = global_nf(&order, &spoly, &divisors);
            let mut lift = basis[i].1.iter().map(|c| c.mul_monomial(&l.div(&mi), &one)).collect::<Vec<_>>();
            for (a, b) in lift.iter_mut().zip(&basis[j].1) {
                *a = a.sub(&b.mul_monomial(&l.div(&mj), &one));
            }
            for (k, q) in cofs.iter().enumerate() {
                if !q.is_zero() {
                    for (a, b) in lift.iter_mut().zip(&basis[k].1) {
                        *a = a.sub(&q.mul(b));
                    }
                }
            }
            (rem, lift)
        } else {
            let divisors: Vec<Poly> = basis.iter().map(|(g, _)| g.clone()).collect();
            let rec = mora_nf(&order, &spoly, &divisors, false);
            (rec.remainder, Vec::new())
        };
        if rem.is_zero() {
            continue;
        }
        let (m, inv) = monic(&order, &rem);
        let lift = lift.iter().map(|c| c.scale(&inv)).collect();
        let new = basis.len();
        basis.push((m, lift));
        for k in 0..new {
            let key = spair_key(
                &order,
                order.lt(&basis[k].0).unwrap().0,
                order.lt(&basis[new].0).unwrap().0,
            );
            pairs.insert((key, k, new));
        }
    }

    // drop elements whose leading term is divisible by another's
    let mut keep: Vec<bool> = vec![true; basis.len()];
    let lts: Vec<Monomial> = basis.iter().map(|(g, _)| *order.lt(g).unwrap().0).collect();
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            if i != j
                && keep[j]
                && lts[j].divides(&lts[i])
                && (lts[j] != lts[i] || j < i)
            {
                keep[i] = false;
                break;
            }
        }
    }
    let mut kept: Vec<(Poly, Vec<Poly>)> = basis
        .into_iter()
        .zip(keep)
        .filter_map(|(b, k)| k.then_some(b))
        .collect();
    kept.sort_by(|(a, _), (b, _)| {
        order.cmp(order.lt(a).unwrap().0, order.lt(b).unwrap().0)
    });

    let reduced = if track {
        // global: full tail reduction gives the unique reduced basis
        for i in 0..kept.len() {
            let others: Vec<Poly> = kept
                .iter()
                .enumerate()
                .filter_map(|(j, (g, _))| (j != i).then(|| g.clone()))
                .collect();
            let (rem, cofs) = global_nf(&order, &kept[i].0, &others);
            let mut lift = kept[i].1.clone();
            for (k, q) in cofs.iter().enumerate() {
                if !q.is_zero() {
                    let src = if k < i { k } else { k + 1 };
                    let other_lift = kept[src].1.clone();
                    for (a, b) in lift.iter_mut().zip(&other_lift) {
                        *a = a.sub(&q.mul(b));
                    }
                }
            }
            kept[i] = (rem, lift);
        }
        true
    } else {
        false
    };

    let (gens_out, lifts): (Vec<Poly>, Vec<Vec<Poly>>) = kept.into_iter().unzip();
    Ok(GBasis {
        gens: gens_out,
        order,
        reduced,
        lifts: track.then_some(lifts),
        n_orig: inputs.len(),
    })
}

impl GBasis {
    /// Divides `p` by the basis. For global orders the remainder is the
    /// unique normal form and the cofactors are composed back to the
    /// original generators; for local orders this is a Mora weak normal
    /// form with cofactors over the basis elements themselves.
    pub fn reduce(&self, p: &Poly) -> LiftRecord {
        match self.order {
            MonOrder::GlobalWeightedDegRevLex(_) => {
                let (rem, cofs) = global_nf(&self.order, p, &self.gens);
                let lifts = self.lifts.as_ref().unwrap();
                let mut coeffs = vec![Poly::zero(); self.n_orig];
                for (k, q) in cofs.iter().enumerate() {
                    if q.is_zero() {
                        continue;
                    }
                    for (t, l) in lifts[k].iter().enumerate() {
                        if !l.is_zero() {
                            coeffs[t] = coeffs[t].add(&q.mul(l));
                        }
                    }
                }
                LiftRecord {
                    coeffs,
                    remainder: rem,
                    unit: Poly::one(),
                }
            }
            MonOrder::LocalNegDegRevLex => mora_nf(&self.order, p, &self.gens, true),
        }
    }

    /// Leading monomials of the basis.
    pub fn lead_monomials(&self) -> Vec<Monomial> {
        self.gens
            .iter()
            .map(|g| *self.order.lt(g).unwrap().0)
            .collect()
    }

    /// Staircase data for a zero-dimensional local basis: for each x-exponent
    /// below the pure x-power lead, the height of the complement column.
    fn staircase(&self) -> Result<Vec<u32>, GbError> {
        let leads = self.lead_monomials();
        let pure_x = leads
            .iter()
            .filter(|m| m.ey == 0)
            .map(|m| m.ex)
            .min()
            .ok_or(GbError::NotZeroDimensional)?;
        leads
            .iter()
            .filter(|m| m.ex == 0)
            .map(|m| m.ey)
            .min()
            .ok_or(GbError::NotZeroDimensional)?;
        let mut heights = Vec::with_capacity(pure_x as usize);
        for i in 0..pure_x {
            let h = leads
                .iter()
                .filter(|m| m.ex <= i)
                .map(|m| m.ey)
                .min()
                .expect("pure y power present");
            heights.push(h);
        }
        Ok(heights)
    }
}

/// Milnor number of a germ, or `Infinite` for a non-isolated singularity.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Milnor {
    Finite(u64),
    Infinite,
}

impl Milnor {
    pub fn finite(self) -> Option<u64> {
        match self {
            Milnor::Finite(n) => Some(n),
            Milnor::Infinite => None,
        }
    }
}

/// Local algebra dimension via Mora standard basis and staircase counting.
pub fn milnor_number(f: &Poly) -> Milnor {
    let fx = f.partial(Var::X);
    let fy = f.partial(Var::Y);
    if fx.is_zero() && fy.is_zero() {
        return Milnor::Infinite;
    }
    let g = match groebner(&[fx, fy], MonOrder::LocalNegDegRevLex) {
        Ok(g) => g,
        Err(_) => return Milnor::Infinite,
    };
    match g.staircase() {
        Ok(heights) => Milnor::Finite(heights.iter().map(|&h| h as u64).sum()),
        Err(_) => Milnor::Infinite,
    }
}

/// All monomials outside the leading-term staircase of a zero-dimensional
/// local basis, ascending in graded lex.
pub fn kbase(g: &GBasis) -> Result<Vec<Monomial>, GbError> {
    let heights = g.staircase()?;
    let mut out = Vec::new();
    for (i, &h) in heights.iter().enumerate() {
        for j in 0..h {
            out.push(Monomial::new(i as u32, j));
        }
    }
    out.sort();
    Ok(out)
}

/// Determinacy bound mu + 1.
pub fn determinacy_bound(f: &Poly) -> Milnor {
    match milnor_number(f) {
        Milnor::Finite(mu) => Milnor::Finite(mu + 1),
        Milnor::Infinite => Milnor::Infinite,
    }
}

/// Divisibility-minimal monomials of piecewise degree above `d`; generates
/// the truncation ideal.
pub fn truncation_gens(pw: &PiecewiseWeight, d: i64) -> Vec<Monomial> {
    let mut gens: Vec<Monomial> = Vec::new();
    let mut prev_b: Option<u32> = None;
    let mut a = 0u32;
    loop {
        let mut b = 0u32;
        while pw.deg(&Monomial::new(a, b)) <= d {
            b += 1;
        }
        if prev_b != Some(b) {
            gens.push(Monomial::new(a, b));
            prev_b = Some(b);
        }
        if b == 0 {
            break;
        }
        a += 1;
    }
    gens
}

/// Membership with certificate: lifts `q` over the original `gens` when `q`
/// lies in the ideal they generate.
pub fn lift_in_ideal(q: &Poly, gens: &[Poly], order: MonOrder) -> Result<Option<LiftRecord>, GbError> {
    let g = groebner(gens, order)?;
    let rec = g.reduce(q);
    if rec.remainder.is_zero() && order.is_global() {
        Ok(Some(rec))
    } else if rec.remainder.is_zero() {
        Ok(Some(rec)) // local: cofactors over basis elements, unit tracked
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse;

    fn p(s: &str) -> Poly {
        parse(s).unwrap()
    }

    const W11: MonOrder = MonOrder::GlobalWeightedDegRevLex(Weight { wx: 1, wy: 1 });

    #[test]
    fn order_sanity() {
        let o = MonOrder::LocalNegDegRevLex;
        let one = Monomial::ONE;
        let x = Monomial::new(1, 0);
        let y = Monomial::new(0, 1);
        assert_eq!(o.cmp(&one, &x), Ordering::Greater);
        assert_eq!(o.cmp(&x, &y), Ordering::Greater);
        let g = W11;
        assert_eq!(g.cmp(&x, &one), Ordering::Greater);
        assert_eq!(g.cmp(&x, &y), Ordering::Greater);
    }

    #[test]
    fn groebner_trivial_cases() {
        let g = groebner(&[p("x"), p("y")], W11).unwrap();
        assert_eq!(g.gens, vec![p("y"), p("x")]);
        let g = groebner(&[p("4*x^3"), p("4*y^3")], W11).unwrap();
        assert_eq!(g.gens, vec![p("y^3"), p("x^3")]);
    }

    #[test]
    fn reduce_and_lift() {
        let gens = [p("x^3"), p("y^3")];
        let g = groebner(&gens, W11).unwrap();
        let rec = g.reduce(&p("x^3+y"));
        assert_eq!(rec.remainder, p("y"));
        assert_eq!(rec.coeffs, vec![p("1"), p("0")]);
        assert!(rec.verify(&p("x^3+y"), &gens));

        let rec = g.reduce(&p("0"));
        assert!(rec.remainder.is_zero());
        assert!(rec.coeffs.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn buchberger_criterion_holds() {
        // every s-polynomial of the completed basis reduces to zero
        let gens = [p("x^2+y"), p("x*y+x"), p("y^3-x")];
        let g = groebner(&gens, W11).unwrap();
        for i in 0..g.gens.len() {
            for j in (i + 1)..g.gens.len() {
                let (mi, _) = W11.lt(&g.gens[i]).unwrap();
                let (mj, _) = W11.lt(&g.gens[j]).unwrap();
                let l = mi.lcm(mj);
                let s = g.gens[i]
                    .mul_monomial(&l.div(mi), &Rat::one())
                    .sub(&g.gens[j].mul_monomial(&l.div(mj), &Rat::one()));
                let rec = g.reduce(&s);
                assert!(rec.remainder.is_zero());
            }
        }
    }

    #[test]
    fn lift_identity_on_random_style_inputs() {
        let gens = [p("x^2+y^3"), p("x*y^2-2*x"), p("y^4+x*y")];
        let g = groebner(&gens, W11).unwrap();
        for q in ["x^5+y^5", "x^2*y^2-x^2-y^3", "1+x+y"] {
            let rec = g.reduce(&p(q));
            assert!(rec.verify(&p(q), &gens));
        }
    }

    #[test]
    fn milnor_basics() {
        assert_eq!(milnor_number(&p("x^4+y^4")), Milnor::Finite(9));
        assert_eq!(milnor_number(&p("x^3+y^3")), Milnor::Finite(4));
        assert_eq!(milnor_number(&p("x^2+y^2")), Milnor::Finite(1));
        assert_eq!(milnor_number(&p("x^2*y^2")), Milnor::Infinite);
        assert_eq!(milnor_number(&p("x^2*y+x*y^2")), Milnor::Finite(4));
    }

    #[test]
    fn milnor_p_family() {
        // x^p y + x y^p + x^(p^2+2) + y^(p^2+2) has milnor number p^2
        assert_eq!(milnor_number(&p("x^2*y+x*y^2+x^6+y^6")), Milnor::Finite(4));
        assert_eq!(
            milnor_number(&p("x^3*y+x*y^3+x^11+y^11")),
            Milnor::Finite(9)
        );
    }

    #[test]
    fn kbase_staircase() {
        let g = groebner(&[p("x^3"), p("y^3")], MonOrder::LocalNegDegRevLex).unwrap();
        let kb = kbase(&g).unwrap();
        assert_eq!(kb.len(), 9);
        assert!(kb.contains(&Monomial::new(2, 2)));

        let g = groebner(&[p("x"), p("y")], MonOrder::LocalNegDegRevLex).unwrap();
        assert_eq!(kbase(&g).unwrap(), vec![Monomial::ONE]);

        // p = 2 germ: 4 basis monomials
        let f = p("x^2*y+x*y^2+x^6+y^6");
        let g = groebner(
            &[f.partial(Var::X), f.partial(Var::Y)],
            MonOrder::LocalNegDegRevLex,
        )
        .unwrap();
        assert_eq!(kbase(&g).unwrap().len(), 4);
    }

    #[test]
    fn kbase_matches_milnor() {
        for s in ["x^4+y^4", "x^3+y^5", "x^2*y+y^4+x^5"] {
            let f = p(s);
            let g = groebner(
                &[f.partial(Var::X), f.partial(Var::Y)],
                MonOrder::LocalNegDegRevLex,
            )
            .unwrap();
            assert_eq!(
                kbase(&g).unwrap().len() as u64,
                milnor_number(&f).finite().unwrap()
            );
        }
    }

    #[test]
    fn determinacy_bounds() {
        assert_eq!(determinacy_bound(&p("x^4+y^4")), Milnor::Finite(10));
        assert_eq!(determinacy_bound(&p("x^3+y^3")), Milnor::Finite(5));
        assert_eq!(determinacy_bound(&p("x^2+y^2")), Milnor::Finite(2));
    }

    #[test]
    fn truncation_frontier() {
        let pw = PiecewiseWeight {
            weights: vec![Weight::new(1, 1)],
            d: 2,
        };
        let gens = truncation_gens(&pw, 2);
        assert_eq!(
            gens,
            vec![
                Monomial::new(0, 3),
                Monomial::new(1, 2),
                Monomial::new(2, 1),
                Monomial::new(3, 0)
            ]
        );

        let pw2 = PiecewiseWeight {
            weights: vec![Weight::new(1, 2), Weight::new(2, 1)],
            d: 6,
        };
        let gens = truncation_gens(&pw2, 6);
        // every monomial above the threshold is divisible by a generator
        for a in 0..=8u32 {
            for b in 0..=8u32 {
                let m = Monomial::new(a, b);
                if pw2.deg(&m) > 6 {
                    assert!(gens.iter().any(|g| g.divides(&m)), "uncovered {m}");
                }
            }
        }
        // no generator divides another
        for g1 in &gens {
            for g2 in &gens {
                if g1 != g2 {
                    assert!(!g1.divides(g2));
                }
            }
        }
    }

    #[test]
    fn lift_in_ideal_cases() {
        let gens = [p("x^2+y"), p("y^2")];
        let rec = lift_in_ideal(&p("x^2+y"), &gens, W11).unwrap().unwrap();
        assert!(rec.verify(&p("x^2+y"), &gens));
        assert!(lift_in_ideal(&p("1"), &gens, W11).unwrap().is_none());
    }
}
