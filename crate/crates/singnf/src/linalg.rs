//! Sparse exact Gaussian elimination over the rationals with monomial-indexed
//! coordinates. Shared by the regular-basis construction, the elimination
//! solver and several exactness checks.

use crate::poly::{Monomial, Poly, Rat};
use num_traits::Zero;
use std::collections::BTreeMap;

pub type SparseVec = BTreeMap<Monomial, Rat>;

pub fn poly_to_vec(p: &Poly) -> SparseVec {
    p.terms().map(|(m, c)| (*m, c.clone())).collect()
}

fn vec_axpy(v: &mut SparseVec, c: &Rat, w: &SparseVec) {
    // v += c * w
    for (m, a) in w {
        let entry = v.entry(*m).or_insert_with(Rat::zero);
        *entry = &*entry + &(c * a);
        if entry.is_zero() {
            v.remove(m);
        }
    }
}

struct Row {
    vec: SparseVec,
    /// Expression of `vec` as a combination of inserted columns.
    combo: BTreeMap<usize, Rat>,
}

/// Incremental row echelon form with optional lift certificates.
///
/// Rows are normalized to pivot coefficient 1, with the pivot at the
/// graded-lex-largest monomial of the row. Column insertion order is the
/// canonicalization knob: solving expresses the target over the earliest
/// inserted independent columns.
pub struct Echelon {
    rows: BTreeMap<Monomial, Row>,
    certificates: bool,
}

impl Echelon {
    pub fn new(certificates: bool) -> Self {
        Echelon {
            rows: BTreeMap::new(),
            certificates,
        }
    }

    #[allow(dead_code)]
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce_full(&self, mut v: SparseVec) -> (SparseVec, BTreeMap<usize, Rat>) {
        let mut combo = BTreeMap::new();
        loop {
            let hit = v
                .iter()
                .rev()
                .find(|(m, _)| self.rows.contains_key(m))
                .map(|(m, c)| (*m, c.clone()));
            let Some((m, c)) = hit else { break };
            let row = &self.rows[&m];
            let neg = -c;
            vec_axpy(&mut v, &neg, &row.vec);
            debug_assert!(!v.contains_key(&m));
            if self.certificates {
                for (j, a) in &row.combo {
                    let e = combo.entry(*j).or_insert_with(Rat::zero);
                    *e = &*e + &(&neg * a);
                    if e.is_zero() {
                        combo.remove(j);
                    }
                }
            }
        }
        (v, combo)
    }

    /// Inserts column `idx`; returns true when it enlarges the span.
    pub fn insert(&mut self, idx: usize, v: SparseVec) -> bool {
        let (mut v, mut combo) = self.reduce_full(v);
        let Some((pivot, lead)) = v.iter().next_back().map(|(m, c)| (*m, c.clone())) else {
            return false;
        };
        let inv = Rat::new(
            lead.denom().clone(),
            lead.numer().clone(),
        );
        for c in v.values_mut() {
            *c = &*c * &inv;
        }
        if self.certificates {
            for c in combo.values_mut() {
                *c = &*c * &inv;
            }
            let e = combo.entry(idx).or_insert_with(Rat::zero);
            *e = &*e + &inv;
            if e.is_zero() {
                combo.remove(&idx);
            }
        }
        self.rows.insert(pivot, Row { vec: v, combo });
        true
    }

    /// Membership test: does `v` lie in the current span?
    #[allow(dead_code)]
    pub fn contains(&self, v: SparseVec) -> bool {
        self.reduce_full(v).0.is_empty()
    }

    /// Solves `sum_j x_j * col_j = target` over the inserted columns.
    /// Returns the combination, or `None` when the target is outside the span.
    pub fn solve(&self, target: SparseVec) -> Option<BTreeMap<usize, Rat>> {
        assert!(self.certificates, "solver built without certificates");
        let (rem, combo) = self.reduce_full(target);
        if rem.is_empty() {
            // target = sum mu_k row_k and row_k = sum combo col_j, with signs
            // folded in by reduce_full (which subtracts); negate back.
            Some(combo.into_iter().map(|(j, c)| (j, -c)).collect())
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse, rat_int};

    fn v(s: &str) -> SparseVec {
        poly_to_vec(&parse(s).unwrap())
    }

    #[test]
    fn solve_small_system() {
        let mut e = Echelon::new(true);
        let cols = [v("x^2+y"), v("y"), v("x^2+x")];
        for (i, c) in cols.iter().enumerate() {
            e.insert(i, c.clone());
        }
        // target = 2*(x^2+y) - y  => x^2 terms must combine
        let sol = e.solve(v("2*x^2+y")).unwrap();
        let mut acc: SparseVec = SparseVec::new();
        for (j, c) in &sol {
            vec_axpy(&mut acc, c, &cols[*j]);
        }
        assert_eq!(acc, v("2*x^2+y"));
        assert!(e.solve(v("1")).is_none());
    }

    #[test]
    fn rank_and_membership() {
        let mut e = Echelon::new(false);
        assert!(e.insert(0, v("x+y")));
        assert!(e.insert(1, v("x-y")));
        assert!(!e.insert(2, v("2*x")));
        assert_eq!(e.rank(), 2);
        assert!(e.contains(v("5*y")));
        assert!(!e.contains(v("x^2")));
        let _ = rat_int(0);
    }
}
