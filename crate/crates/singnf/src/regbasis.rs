//! Regular bases of the local algebra with respect to the piecewise
//! filtration, and the moduli monomials that parametrize the normal form.

use crate::gb::{groebner, kbase, milnor_number, Milnor, MonOrder};
use crate::linalg::{poly_to_vec, Echelon};
use crate::newton::{NewtonPolygon, PiecewiseWeight};
use crate::poly::{Monomial, Poly, Rat, Var};
use num_traits::One;

/// A monomial basis of the local algebra, regular for the piecewise weight:
/// at every degree the chosen monomials stay independent modulo the Jacobian
/// ideal plus higher filtration.
#[derive(Clone, Debug)]
pub struct RegularBasis {
    /// All basis monomials with their piecewise degrees, ascending.
    pub all: Vec<(Monomial, i64)>,
    /// Basis monomials on or above the boundary, ordered by descending
    /// piecewise degree, then descending graded lex.
    pub moduli: Vec<Monomial>,
    /// Boundary degree the moduli cutoff refers to.
    pub d: i64,
}

impl RegularBasis {
    pub fn len(&self) -> usize {
        self.all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all.is_empty()
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.all.iter().any(|(b, _)| b == m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegBasisError {
    #[error("vertex sum has non-isolated singularity")]
    InfiniteMilnor,
    #[error("regular basis construction did not reach the local algebra dimension")]
    Incomplete,
}

/// Number of parameters in the normal form.
pub fn inner_modality(rb: &RegularBasis) -> usize {
    rb.moduli.len()
}

fn monomials_with_pw_at_most(pw: &PiecewiseWeight, bound: i64) -> Vec<Monomial> {
    let min_wx = pw.weights.iter().map(|w| w.wx).min().unwrap();
    let mut out = Vec::new();
    let mut a = 0u32;
    while (a as i64) * min_wx <= bound {
        if pw.deg(&Monomial::new(a, 0)) <= bound {
            let mut b = 0u32;
            while pw.deg(&Monomial::new(a, b)) <= bound {
                out.push(Monomial::new(a, b));
                b += 1;
            }
        }
        a += 1;
    }
    out
}

/// Degree-graded greedy construction of a regular monomial basis for the
/// local algebra of `f0`.
///
/// For each piecewise degree D ascending, candidate monomials of degree D are
/// tested for independence modulo (the degree-at-most-D part of the Jacobian
/// ideal) + (all monomials of degree above D), preferring candidates inside
/// the local staircase, ties by graded lex. The count reaches the Milnor
/// number exactly; anything else is an error.
pub fn regular_basis(f0: &Poly, pw: &PiecewiseWeight) -> Result<RegularBasis, RegBasisError> {
    let mu = match milnor_number(f0) {
        Milnor::Finite(mu) => mu as usize,
        Milnor::Infinite => return Err(RegBasisError::InfiniteMilnor),
    };
    let fx = f0.partial(Var::X);
    let fy = f0.partial(Var::Y);
    let staircase: Vec<Monomial> = {
        let g = groebner(&[fx.clone(), fy.clone()], MonOrder::LocalNegDegRevLex)
            .map_err(|_| RegBasisError::InfiniteMilnor)?;
        kbase(&g).map_err(|_| RegBasisError::InfiniteMilnor)?
    };
    let ord_x = pw.ord(&fx);
    let ord_y = pw.ord(&fy);

    let mut chosen: Vec<(Monomial, i64)> = Vec::new();
    let mut bound = staircase
        .iter()
        .map(|m| pw.deg(m))
        .max()
        .unwrap_or(pw.d)
        .max(pw.d);
    let hard_cap = bound * 16 + 16 * pw.d;
    loop {
        let mut candidates = monomials_with_pw_at_most(pw, bound);
        candidates.sort_by_key(|m| (pw.deg(m), !staircase.contains(m), *m));
        let mut degrees: Vec<i64> = candidates.iter().map(|m| pw.deg(m)).collect();
        degrees.dedup();

        chosen.clear();
        'outer: for &degree in &degrees {
            // span of the Jacobian parts of filtration <= degree, inside the
            // space of monomials of piecewise degree <= degree
            let mut ech = Echelon::new(false);
            let mut idx = 0usize;
            for (gen, ord) in [(&fx, ord_x), (&fy, ord_y)] {
                let Some(ord) = ord else { continue };
                for m in monomials_with_pw_at_most(pw, degree - ord) {
                    let col = pw.jet(&gen.mul_monomial(&m, &Rat::one()), degree);
                    if !col.is_zero() {
                        ech.insert(idx, poly_to_vec(&col));
                        idx += 1;
                    }
                }
            }
            for m in candidates.iter().filter(|m| pw.deg(m) == degree) {
                if ech.insert(idx, poly_to_vec(&Poly::monomial(*m, Rat::one()))) {
                    chosen.push((*m, degree));
                    idx += 1;
                    if chosen.len() == mu {
                        break 'outer;
                    }
                }
            }
        }
        if chosen.len() == mu {
            break;
        }
        bound *= 2;
        if bound > hard_cap {
            return Err(RegBasisError::Incomplete);
        }
    }

    let mut moduli: Vec<Monomial> = chosen
        .iter()
        .filter(|(_, deg)| *deg >= pw.d)
        .map(|(m, _)| *m)
        .collect();
    moduli.sort_by(|a, b| (pw.deg(b), *b).cmp(&(pw.deg(a), *a)));
    Ok(RegularBasis {
        all: chosen,
        moduli,
        d: pw.d,
    })
}

/// The symbolic family `f0 + sum alpha_i * b_i` over the moduli monomials.
#[derive(Clone, Debug)]
pub struct NormalFormFamily {
    pub base: Poly,
    pub moduli: Vec<Monomial>,
}

impl NormalFormFamily {
    /// Parameter names `a1..am`, in the moduli order.
    pub fn parameter_names(&self) -> Vec<String> {
        (1..=self.moduli.len()).map(|i| format!("a{i}")).collect()
    }

    pub fn render(&self) -> String {
        let mut s = self.base.to_string();
        for (i, m) in self.moduli.iter().enumerate() {
            s.push_str(&format!("+a{}*{}", i + 1, m));
        }
        s
    }
}

pub fn normal_form_family(f0: &Poly, rb: &RegularBasis) -> NormalFormFamily {
    NormalFormFamily {
        base: f0.clone(),
        moduli: rb.moduli.clone(),
    }
}

/// Explicit regularity re-check of a computed basis: at each degree the
/// basis monomials must stay independent modulo the Jacobian part of
/// filtration at most that degree.
pub fn verify_regularity(f0: &Poly, pw: &PiecewiseWeight, rb: &RegularBasis) -> bool {
    let fx = f0.partial(Var::X);
    let fy = f0.partial(Var::Y);
    let ord_x = pw.ord(&fx);
    let ord_y = pw.ord(&fy);
    let mut degrees: Vec<i64> = rb.all.iter().map(|(_, d)| *d).collect();
    degrees.dedup();
    for degree in degrees {
        let mut ech = Echelon::new(false);
        let mut idx = 0usize;
        for (gen, ord) in [(&fx, ord_x), (&fy, ord_y)] {
            let Some(ord) = ord else { continue };
            for m in monomials_with_pw_at_most(pw, degree - ord) {
                let col = pw.jet(&gen.mul_monomial(&m, &Rat::one()), degree);
                if !col.is_zero() {
                    ech.insert(idx, poly_to_vec(&col));
                    idx += 1;
                }
            }
        }
        for (m, dm) in rb.all.iter().filter(|(_, dm)| *dm == degree) {
            let _ = dm;
            if !ech.insert(idx, poly_to_vec(&Poly::monomial(*m, Rat::one()))) {
                return false;
            }
            idx += 1;
        }
    }
    true
}

/// Boundary lattice checks: (1) every lattice point of the boundary is a
/// vertex monomial or a basis member; (2) at most two vertex monomials of
/// standard degree within `dt_bound` are missing from the basis.
pub fn boundary_lattice_checks(
    np: &NewtonPolygon,
    rb: &RegularBasis,
    dt_bound: u32,
) -> (bool, bool) {
    let mut lattice_ok = true;
    for fc in &np.facets {
        for lp in &fc.lattice_points {
            if !np.vertices.contains(lp) && !rb.contains(lp) {
                lattice_ok = false;
            }
        }
    }
    let missing = np
        .vertices
        .iter()
        .filter(|v| v.total_deg() <= dt_bound && !rb.contains(v))
        .count();
    (lattice_ok, missing <= 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::polygon;
    use crate::poly::parse;

    fn p(s: &str) -> Poly {
        parse(s).unwrap()
    }

    fn moduli_of(f0: &str) -> (Vec<Monomial>, RegularBasis, crate::newton::NewtonPolygon) {
        let f0 = p(f0);
        let np = polygon(&f0).unwrap();
        let rb = regular_basis(&f0, &np.pw).unwrap();
        (rb.moduli.clone(), rb, np)
    }

    #[test]
    fn x9_basis() {
        let (moduli, rb, np) = moduli_of("x^4+y^4");
        assert_eq!(moduli, vec![Monomial::new(2, 2)]);
        assert_eq!(rb.len(), 9);
        assert_eq!(inner_modality(&rb), 1);
        assert!(verify_regularity(&p("x^4+y^4"), &np.pw, &rb));
    }

    #[test]
    fn example1_moduli() {
        // vertex sum of example 1
        let (moduli, rb, _) = moduli_of("y^28+x*y^7+x^2*y^3+x^22");
        let expected: Vec<Monomial> = vec![
            Monomial::new(22, 1),
            Monomial::new(21, 1),
            Monomial::new(20, 1),
            Monomial::new(19, 1),
            Monomial::new(18, 1),
            Monomial::new(17, 1),
            Monomial::new(16, 1),
            Monomial::new(2, 3),
        ];
        assert_eq!(moduli, expected);
        assert_eq!(inner_modality(&rb), 8);
        assert_eq!(rb.len(), 56);
    }

    #[test]
    fn example2_moduli() {
        let (moduli, rb, _) = moduli_of("x^2*y^4+x^4*y^2+x^20+y^40");
        let expected: Vec<Monomial> = vec![
            Monomial::new(4, 4),
            Monomial::new(4, 3),
            Monomial::new(3, 4),
            Monomial::new(4, 2),
            Monomial::new(3, 3),
            Monomial::new(2, 4),
        ];
        assert_eq!(moduli, expected);
        assert_eq!(inner_modality(&rb), 6);
        assert_eq!(rb.len(), 73);
    }

    #[test]
    fn family_rendering() {
        let f0 = p("x^4+y^4");
        let np = polygon(&f0).unwrap();
        let rb = regular_basis(&f0, &np.pw).unwrap();
        let fam = normal_form_family(&f0, &rb);
        assert_eq!(fam.render(), "x^4+y^4+a1*x^2*y^2");
    }
}
