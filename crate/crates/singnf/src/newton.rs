//! Newton polygon geometry: boundary facets, facet weights, the piecewise
//! weight with its common boundary degree, jets, non-degeneracy, smooth
//! facets, the normalization report, vertex sums and axis completion.

use crate::poly::{rat_int, Monomial, Poly, Rat, Var};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

/// A facet weight `(wx, wy)`, positive integers in lowest terms
/// (scaled weights inside a [`PiecewiseWeight`] relax the gcd condition).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct Weight {
    pub wx: i64,
    pub wy: i64,
}

impl Weight {
    pub fn new(wx: i64, wy: i64) -> Self {
        assert!(wx > 0 && wy > 0);
        Weight { wx, wy }
    }

    pub fn deg(&self, m: &Monomial) -> i64 {
        self.wx * m.ex as i64 + self.wy * m.ey as i64
    }

    pub fn scale(&self, k: i64) -> Weight {
        Weight::new(self.wx * k, self.wy * k)
    }
}

/// Scaled facet weights with the common boundary degree `d`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PiecewiseWeight {
    /// One scaled weight per facet, ordered by strictly increasing slope wy/wx.
    pub weights: Vec<Weight>,
    /// Common piecewise degree of every Newton boundary lattice point.
    pub d: i64,
}

impl PiecewiseWeight {
    /// Piecewise degree: minimum of the scaled weighted degrees.
    pub fn deg(&self, m: &Monomial) -> i64 {
        self.weights
            .iter()
            .map(|w| w.deg(m))
            .min()
            .expect("piecewise weight with no facets")
    }

    /// Minimal piecewise degree among the terms of `f`.
    pub fn ord(&self, f: &Poly) -> Option<i64> {
        f.support().map(|m| self.deg(m)).min()
    }

    /// Terms of `f` with piecewise degree at most `j`.
    pub fn jet(&self, f: &Poly, j: i64) -> Poly {
        f.filter(|m| self.deg(m) <= j)
    }
}

/// A compact segment of the Newton boundary.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Facet {
    /// Endpoint with the larger x-exponent.
    pub v0: Monomial,
    /// Endpoint with the smaller x-exponent.
    pub v1: Monomial,
    /// Facet weight in lowest terms.
    pub weight: Weight,
    /// Weighted degree of the facet's lattice points.
    pub degree: i64,
    /// All integer points on the segment, from `v0` to `v1`.
    pub lattice_points: Vec<Monomial>,
}

impl Facet {
    /// Number of lattice steps on the segment (lattice length).
    pub fn lattice_length(&self) -> usize {
        self.lattice_points.len() - 1
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.weight.deg(m) == self.degree && m.ex <= self.v0.ex && m.ex >= self.v1.ex
    }

    pub fn cuts_x_axis(&self) -> bool {
        self.v0.ey == 0
    }

    pub fn cuts_y_axis(&self) -> bool {
        self.v1.ex == 0
    }
}

/// The Newton boundary of a germ: facets ordered by increasing slope
/// wy/wx, the polygon vertices, and the induced piecewise weight.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NewtonPolygon {
    pub facets: Vec<Facet>,
    /// Vertices ordered by increasing x-exponent.
    pub vertices: Vec<Monomial>,
    pub pw: PiecewiseWeight,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NewtonError {
    #[error("zero polynomial has no Newton polygon")]
    ZeroPolynomial,
    #[error("Newton polygon has no compact facet (monomial germ)")]
    NoCompactFacet,
}

/// Computes the Newton polygon of `f`.
pub fn polygon(f: &Poly) -> Result<NewtonPolygon, NewtonError> {
    if f.is_zero() {
        return Err(NewtonError::ZeroPolynomial);
    }
    let pts: Vec<Monomial> = f.support().copied().collect();
    // Pareto-minimal support points, sorted by increasing ex.
    let mut minimal: Vec<Monomial> = pts
        .iter()
        .filter(|p| {
            !pts.iter()
                .any(|q| q != *p && q.ex <= p.ex && q.ey <= p.ey)
        })
        .copied()
        .collect();
    minimal.sort_by_key(|m| m.ex);
    if minimal.len() == 1 {
        return Err(NewtonError::NoCompactFacet);
    }
    // Convex chain from the y-axis side to the x-axis side. A middle point
    // survives only if the chain makes a strict convex turn there.
    let mut chain: Vec<Monomial> = Vec::new();
    for p in minimal {
        while chain.len() >= 2 {
            let a = chain[chain.len() - 2];
            let b = chain[chain.len() - 1];
            let cross = (b.ex as i64 - a.ex as i64) * (p.ey as i64 - b.ey as i64)
                - (b.ey as i64 - a.ey as i64) * (p.ex as i64 - b.ex as i64);
            if cross <= 0 {
                chain.pop();
            } else {
                break;
            }
        }
        chain.push(p);
    }
    let vertices = chain;
    let mut facets = Vec::new();
    for pair in vertices.windows(2) {
        let (lo, hi) = (pair[0], pair[1]); // lo has smaller ex
        let da = hi.ex as i64 - lo.ex as i64;
        let db = lo.ey as i64 - hi.ey as i64;
        debug_assert!(da > 0 && db > 0);
        let g = da.gcd(&db);
        let weight = Weight::new(db / g, da / g);
        let degree = weight.deg(&lo);
        debug_assert_eq!(degree, weight.deg(&hi));
        let mut lattice_points = Vec::new();
        for k in 0..=g {
            lattice_points.push(Monomial::new(
                (hi.ex as i64 - k * weight.wy) as u32,
                (hi.ey as i64 + k * weight.wx) as u32,
            ));
        }
        facets.push(Facet {
            v0: hi,
            v1: lo,
            weight,
            degree,
            lattice_points,
        });
    }
    // Minimal integer scalings that put the whole boundary at one degree.
    let lcm = facets.iter().fold(1i64, |acc, fc| acc.lcm(&fc.degree));
    let weights = facets
        .iter()
        .map(|fc| fc.weight.scale(lcm / fc.degree))
        .collect();
    Ok(NewtonPolygon {
        facets,
        vertices,
        pw: PiecewiseWeight { weights, d: lcm },
    })
}

/// Sum of the terms of `f` lying on the facet `fc`.
pub fn facet_jet(f: &Poly, fc: &Facet) -> Poly {
    f.filter(|m| fc.contains(m))
}

/// Sum of the terms of `f` at the polygon's vertices, coefficients as in `f`.
pub fn vertex_sum(f: &Poly, np: &NewtonPolygon) -> Poly {
    f.filter(|m| np.vertices.contains(m))
}

/// Terms of `f` strictly above the boundary, ascending by piecewise degree,
/// ties broken by graded lex.
pub fn monomials_above(f: &Poly, pw: &PiecewiseWeight) -> Vec<(Monomial, Rat)> {
    let mut out: Vec<(Monomial, Rat)> = f
        .terms()
        .filter(|(m, _)| pw.deg(m) > pw.d)
        .map(|(m, c)| (*m, c.clone()))
        .collect();
    out.sort_by_key(|(m, _)| (pw.deg(m), *m));
    out
}

/// Coefficients of the saturated facet jet as a univariate polynomial in the
/// lattice parameter along the facet, constant term at the `v0` end.
pub fn facet_univariate(f: &Poly, fc: &Facet) -> Vec<Rat> {
    let jet = facet_jet(f, fc);
    let (sat, factor) = jet.saturate();
    let g = fc.lattice_length() as i64;
    let mut coeffs = vec![Rat::zero(); g as usize + 1];
    for (m, c) in sat.terms() {
        let full = m.mul(&factor);
        // index along the segment from v0
        let k = (fc.v0.ex as i64 - full.ex as i64) / fc.weight.wy;
        coeffs[k as usize] = c.clone();
    }
    coeffs
}

fn univ_deg(u: &[Rat]) -> Option<usize> {
    u.iter().rposition(|c| !c.is_zero())
}

fn univ_derivative(u: &[Rat]) -> Vec<Rat> {
    u.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * rat_int(i as i64))
        .collect()
}

/// Monic gcd of two exact univariate rational polynomials.
pub fn univ_gcd(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    loop {
        let (da, db) = (univ_deg(&a), univ_deg(&b));
        match (da, db) {
            (_, None) => break,
            (None, _) => {
                std::mem::swap(&mut a, &mut b);
                break;
            }
            (Some(da), Some(db)) => {
                if da < db {
                    std::mem::swap(&mut a, &mut b);
                    continue;
                }
                // a -= lead(a)/lead(b) * x^(da-db) * b
                let q = &a[da] / &b[db];
                let shift = da - db;
                for i in 0..=db {
                    let t = &b[i] * &q;
                    a[i + shift] = &a[i + shift] - t;
                }
                a[da] = Rat::zero();
            }
        }
    }
    if let Some(d) = univ_deg(&a) {
        let lead = a[d].clone();
        a.truncate(d + 1);
        for c in &mut a {
            *c = &*c / &lead;
        }
    } else {
        a.clear();
    }
    a
}

/// Number of distinct complex roots: deg u − deg gcd(u, u′).
fn distinct_root_count(u: &[Rat]) -> usize {
    match univ_deg(u) {
        None | Some(0) => 0,
        Some(d) => {
            let g = univ_gcd(u, &univ_derivative(u));
            d - univ_deg(&g).unwrap_or(0)
        }
    }
}

/// Kouchnirenko non-degeneracy: every saturated facet jet is squarefree.
pub fn is_nondegenerate(f: &Poly, np: &NewtonPolygon) -> bool {
    np.facets.iter().all(|fc| {
        let u = facet_univariate(f, fc);
        let du = univ_derivative(&u);
        let g = univ_gcd(&u, &du);
        univ_deg(&g).unwrap_or(0) == 0
    })
}

/// A facet is smooth when the saturation of its jet defines a smooth germ,
/// i.e. contains the monomial `x` or `y` with nonzero coefficient.
pub fn is_smooth_facet(f: &Poly, fc: &Facet) -> bool {
    let (sat, _) = facet_jet(f, fc).saturate();
    !sat.coeff(&Monomial::new(1, 0)).is_zero() || !sat.coeff(&Monomial::new(0, 1)).is_zero()
}

/// Per-facet verdict of the normalization condition.
#[derive(Clone, Debug, Serialize)]
pub struct FacetNormReport {
    pub v0: (u32, u32),
    pub v1: (u32, u32),
    pub weight: Weight,
    /// Exponent of the x-power dividing the facet jet.
    pub a: u32,
    /// Exponent of the y-power dividing the facet jet.
    pub b: u32,
    /// Number of distinct linear factors not associated to x or y.
    pub n_linear: usize,
    pub smooth: bool,
    pub cuts_axis: bool,
    /// Standard degree at which the facet meets an axis, if it does.
    pub axis_degree: Option<u32>,
    /// Whether an axis-cutting smooth facet meets the axis at the standard
    /// determinacy degree.
    pub axis_degree_standard: Option<bool>,
    pub normalized: bool,
    /// Exempt from the facet condition (smooth and axis-cutting).
    pub exempt: bool,
}

/// Normalization report for the whole boundary.
#[derive(Clone, Debug, Serialize)]
pub struct NormReport {
    pub facets: Vec<FacetNormReport>,
    pub normalized: bool,
}

/// Evaluates the normalization condition facet by facet.
///
/// `mu` is used only to flag whether smooth axis-cutting facets meet the
/// axis at the standard degree; the overall verdict is diagnostic and the
/// pipeline does not reject on it.
pub fn check_normalized(f: &Poly, np: &NewtonPolygon, mu: Option<i64>) -> NormReport {
    let mut facets = Vec::new();
    let mut all_ok = true;
    for fc in &np.facets {
        let jet = facet_jet(f, fc);
        let (_, factor) = jet.saturate();
        let (a, b) = (factor.ex, factor.ey);
        let u = facet_univariate(f, fc);
        let w = fc.weight;
        let n_linear = if w.wx == 1 || w.wy == 1 {
            distinct_root_count(&u)
        } else {
            0
        };
        let normalized = if w.wx == w.wy {
            a != 0 && b != 0
        } else if w.wx > w.wy && a == 0 {
            n_linear == 0
        } else if w.wx < w.wy && b == 0 {
            n_linear == 0
        } else {
            true
        };
        let smooth = is_smooth_facet(f, fc);
        let cuts_axis = fc.cuts_x_axis() || fc.cuts_y_axis();
        let axis_degree = if fc.cuts_x_axis() {
            Some(fc.v0.ex)
        } else if fc.cuts_y_axis() {
            Some(fc.v1.ey)
        } else {
            None
        };
        let axis_degree_standard = match (axis_degree, mu) {
            (Some(deg), Some(mu)) => Some(deg as i64 == mu + 1),
            _ => None,
        };
        let exempt = smooth && cuts_axis;
        if !exempt && !normalized {
            all_ok = false;
        }
        facets.push(FacetNormReport {
            v0: (fc.v0.ex, fc.v0.ey),
            v1: (fc.v1.ex, fc.v1.ey),
            weight: w,
            a,
            b,
            n_linear,
            smooth,
            cuts_axis,
            axis_degree,
            axis_degree_standard,
            normalized,
            exempt,
        });
    }
    NormReport {
        facets,
        normalized: all_ok,
    }
}

/// Adds `x^(mu+2)` and/or `y^(mu+2)` when the boundary misses an axis.
/// Returns the completed polynomial and the monomials added.
pub fn ensure_convenient(f: &Poly, mu: i64) -> (Poly, Vec<Monomial>) {
    let touches_x = f.support().any(|m| m.ey == 0);
    let touches_y = f.support().any(|m| m.ex == 0);
    let mut out = f.clone();
    let mut added = Vec::new();
    let e = (mu + 2) as u32;
    if !touches_x {
        let m = Monomial::new(e, 0);
        out.add_term(m, Rat::one());
        added.push(m);
    }
    if !touches_y {
        let m = Monomial::new(0, e);
        out.add_term(m, Rat::one());
        added.push(m);
    }
    (out, added)
}

/// Standard degree 2-jet; nonzero means the germ is not in m^3.
pub fn quadratic_part(f: &Poly) -> Poly {
    f.filter(|m| m.total_deg() <= 2)
}

/// Partial derivatives as a convenience pair.
pub fn jacobian(f: &Poly) -> (Poly, Poly) {
    (f.partial(Var::X), f.partial(Var::Y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse;

    fn p(s: &str) -> Poly {
        parse(s).unwrap()
    }

    fn ex1() -> Poly {
        p("y^28+x*y^7+x^2*y^3+11*x^2*y^4+x^22")
    }

    fn ex2() -> Poly {
        p("x^2*y^4+x^4*y^2+x^20+y^40+60*x^21*y^14")
    }

    #[test]
    fn polygon_quadric() {
        let np = polygon(&p("x^2+y^2")).unwrap();
        assert_eq!(np.vertices, vec![Monomial::new(0, 2), Monomial::new(2, 0)]);
        assert_eq!(np.facets.len(), 1);
        assert_eq!(np.facets[0].weight, Weight::new(1, 1));
        assert_eq!(np.pw.d, 2);
        assert_eq!(np.pw.deg(&Monomial::new(1, 1)), 2);
    }

    #[test]
    fn polygon_example1() {
        let np = polygon(&ex1()).unwrap();
        let vs: Vec<(u32, u32)> = np.vertices.iter().map(|m| (m.ex, m.ey)).collect();
        assert_eq!(vs, vec![(0, 28), (1, 7), (2, 3), (22, 0)]);
        assert_eq!(np.pw.d, 924);
        assert_eq!(np.pw.deg(&Monomial::new(2, 4)), 1008);
        // every boundary lattice point sits at degree d
        for fc in &np.facets {
            for lp in &fc.lattice_points {
                assert_eq!(np.pw.deg(lp), np.pw.d);
            }
        }
    }

    #[test]
    fn polygon_example2() {
        let np = polygon(&ex2()).unwrap();
        let vs: Vec<(u32, u32)> = np.vertices.iter().map(|m| (m.ex, m.ey)).collect();
        assert_eq!(vs, vec![(0, 40), (2, 4), (4, 2), (20, 0)]);
        assert_eq!(np.pw.d, 120);
        assert_eq!(np.pw.deg(&Monomial::new(21, 14)), 700);
    }

    #[test]
    fn polygon_rejects_monomial_germ() {
        assert_eq!(polygon(&p("x^2*y^2")), Err(NewtonError::NoCompactFacet));
        assert_eq!(polygon(&p("0")), Err(NewtonError::ZeroPolynomial));
    }

    #[test]
    fn pw_jets() {
        let f = ex2();
        let np = polygon(&f).unwrap();
        assert_eq!(np.pw.jet(&f, 120), p("x^2*y^4+x^4*y^2+x^20+y^40"));
        assert_eq!(np.pw.jet(&f, 100_000), f);
        assert!(np.pw.jet(&f, 0).is_zero());
    }

    #[test]
    fn facet_jets() {
        let f = ex2();
        let np = polygon(&f).unwrap();
        // middle facet through (4,2) and (2,4)
        let fc = np
            .facets
            .iter()
            .find(|fc| fc.v0 == Monomial::new(4, 2))
            .unwrap();
        assert_eq!(facet_jet(&f, fc), p("x^2*y^4+x^4*y^2"));

        let g = p("x^2+y^2");
        let npg = polygon(&g).unwrap();
        assert_eq!(facet_jet(&g, &npg.facets[0]), g);

        let f1 = ex1();
        let np1 = polygon(&f1).unwrap();
        let fc1 = np1
            .facets
            .iter()
            .find(|fc| fc.v0 == Monomial::new(22, 0))
            .unwrap();
        assert_eq!(facet_jet(&f1, fc1), p("x^22+x^2*y^3"));
    }

    #[test]
    fn vertex_sums() {
        let f = ex1();
        let np = polygon(&f).unwrap();
        assert_eq!(vertex_sum(&f, &np), p("y^28+x*y^7+x^2*y^3+x^22"));

        let g = p("x^4+3*x^2*y^2+y^4");
        let npg = polygon(&g).unwrap();
        assert_eq!(vertex_sum(&g, &npg), p("x^4+y^4"));

        let h = ex2();
        let nph = polygon(&h).unwrap();
        assert_eq!(vertex_sum(&h, &nph), p("x^2*y^4+x^4*y^2+x^20+y^40"));
    }

    #[test]
    fn monomials_above_boundary() {
        let f = ex1();
        let np = polygon(&f).unwrap();
        let above = monomials_above(&f, &np.pw);
        assert_eq!(above.len(), 1);
        assert_eq!(above[0].0, Monomial::new(2, 4));
        assert_eq!(above[0].1, rat_int(11));

        let g = ex2();
        let npg = polygon(&g).unwrap();
        let above = monomials_above(&g, &npg.pw);
        assert_eq!(above, vec![(Monomial::new(21, 14), rat_int(60))]);

        let h = p("x^4+y^4");
        let nph = polygon(&h).unwrap();
        assert!(monomials_above(&h, &nph.pw).is_empty());
    }

    #[test]
    fn nondegeneracy() {
        let f = p("x^4+y^4");
        assert!(is_nondegenerate(&f, &polygon(&f).unwrap()));
        let g = p("x^3+2*x^2*y+x*y^2"); // (x+y)^2 * x
        assert!(!is_nondegenerate(&g, &polygon(&g).unwrap()));
        let f1 = ex1();
        assert!(is_nondegenerate(&f1, &polygon(&f1).unwrap()));
        let f2 = ex2();
        assert!(is_nondegenerate(&f2, &polygon(&f2).unwrap()));
        let d = p("x^4+2*x^2*y^2+y^4+x^9+y^9"); // (x^2+y^2)^2 + higher
        assert!(!is_nondegenerate(&d, &polygon(&d).unwrap()));
    }

    #[test]
    fn smooth_facets() {
        // x + y^21 after saturation
        let f = ex1();
        let np = polygon(&f).unwrap();
        let top = np
            .facets
            .iter()
            .find(|fc| fc.v1 == Monomial::new(0, 28))
            .unwrap();
        assert!(is_smooth_facet(&f, top));
        // y^3 + x^20 after saturation: a cusp-like germ, not smooth
        let bottom = np
            .facets
            .iter()
            .find(|fc| fc.v0 == Monomial::new(22, 0))
            .unwrap();
        assert!(!is_smooth_facet(&f, bottom));
        let g = p("x^4+y^4");
        let npg = polygon(&g).unwrap();
        assert!(!is_smooth_facet(&g, &npg.facets[0]));
    }

    #[test]
    fn normalization_report() {
        // equal weights, a = b = 0: violates the first row
        let f = p("x^4+x^2*y^2+y^4");
        let np = polygon(&f).unwrap();
        let rep = check_normalized(&f, &np, None);
        assert!(!rep.normalized);

        // xy germ: a = b = 1 on its facet
        let g = p("x*y+x^5+y^5");
        let npg = polygon(&g).unwrap();
        let rep = check_normalized(&g, &npg, None);
        let mid = rep
            .facets
            .iter()
            .find(|fr| fr.a == 1 && fr.b == 1)
            .unwrap();
        assert!(mid.normalized);
    }

    #[test]
    fn convenient_completion() {
        let f = p("x^2*y+x*y^3");
        let (g, added) = ensure_convenient(&f, 3);
        assert_eq!(added.len(), 2);
        assert_eq!(g, p("x^2*y+x*y^3+x^5+y^5"));
        let h = p("x^4+y^4");
        let (h2, added) = ensure_convenient(&h, 9);
        assert!(added.is_empty());
        assert_eq!(h2, h);
        let f2 = ex2();
        let (g2, added) = ensure_convenient(&f2, 73);
        assert!(added.is_empty());
        assert_eq!(g2, f2);
    }
}
