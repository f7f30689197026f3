//! Iterative elimination of the terms above the Newton boundary that are not
//! moduli monomials, with the residue-cancellation inner loop, final
//! two-coefficient normalization and axis completion.

use crate::gb::{milnor_number, Milnor};
use crate::linalg::{poly_to_vec, Echelon, SparseVec};
use crate::newton::{
    check_normalized, ensure_convenient, is_nondegenerate, polygon, quadratic_part, vertex_sum,
    NewtonPolygon, NormReport, PiecewiseWeight,
};
use crate::poly::{Monomial, Poly, Rat, Var};
use crate::regbasis::{inner_modality, normal_form_family, regular_basis, NormalFormFamily};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

/// Right equivalence `x -> x + gx`, `y -> y + gy` plus its filtration
/// (the minimal standard order among the nonzero increments).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RightEquivalence {
    pub gx: Poly,
    pub gy: Poly,
    pub filtration: u32,
}

impl RightEquivalence {
    pub fn new(gx: Poly, gy: Poly) -> Self {
        let filtration = gx
            .order()
            .into_iter()
            .chain(gy.order())
            .min()
            .unwrap_or(0);
        RightEquivalence { gx, gy, filtration }
    }

    /// Applies the substitution and truncates at standard degree `cap`.
    pub fn apply(&self, f: &Poly, cap: u32) -> Poly {
        let sx = Poly::var(Var::X).add(&self.gx);
        let sy = Poly::var(Var::Y).add(&self.gy);
        f.substitute_keep(&sx, &sy, |m| m.total_deg() <= cap)
    }

    /// Applies the substitution exactly (no truncation).
    pub fn apply_exact(&self, f: &Poly) -> Poly {
        let sx = Poly::var(Var::X).add(&self.gx);
        let sy = Poly::var(Var::Y).add(&self.gy);
        f.substitute(&sx, &sy)
    }
}

/// One replayable step of the pipeline.
#[derive(Clone, Debug)]
pub enum LogStep {
    Substitution(RightEquivalence),
    Scaling { cx: Rat, cy: Rat },
    AxisCompletion(Monomial),
}

#[derive(Clone, Debug, Default)]
pub struct TransformationLog {
    pub steps: Vec<LogStep>,
}

/// `coeff * c1^e1 * c3^e3 = 1`, the condition that a boundary term scales
/// to coefficient one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingConstraint {
    pub coeff: Rat,
    pub e1: u32,
    pub e3: u32,
}

/// Solved pure power of one scaling factor: `c^power = value`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolvedPower {
    pub var: Var,
    pub power: i64,
    pub value: Rat,
}

/// Scaling-invariant form of a parameter value under constrained scalings:
/// the `power`-th power of the scaled value equals `value`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModulusInvariant {
    pub monomial: Monomial,
    pub power: i64,
    pub value: Rat,
}

/// The concrete member of the normal form family produced by the run.
#[derive(Clone, Debug)]
pub struct NormalFormEquation {
    /// Final polynomial, axis-completion terms included.
    pub poly: Poly,
    /// Final polynomial before axis completion.
    pub pre_completion: Poly,
    /// Moduli coefficients read off `pre_completion`, in moduli order.
    pub values: Vec<(Monomial, Rat)>,
    /// Present only when the two-term normalization has no rational solution.
    pub constraints: Vec<ScalingConstraint>,
    pub solved_powers: Vec<SolvedPower>,
    pub invariants: Vec<ModulusInvariant>,
}

/// Statistics of one outer elimination pass.
#[derive(Clone, Debug)]
pub struct PassStats {
    /// Piecewise degree eliminated by this pass.
    pub level: i64,
    /// Measured residuals handled by the inner loop, in order.
    pub residuals: Vec<Poly>,
    /// Filtrations of the applied equivalences (outer first).
    pub filtrations: Vec<u32>,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum RunError {
    #[error("parse error: {0}")]
    Parse(#[from] crate::poly::ParseError),
    #[error("input is the zero polynomial")]
    Zero,
    #[error("germ is not of corank 2: the 2-jet {0} is nonzero")]
    NotCorank2(String),
    #[error("infinite Milnor number: non-isolated singularity")]
    InfiniteMilnor,
    #[error("Newton polygon has no compact facet")]
    NoCompactFacet,
    #[error("degenerate Newton boundary")]
    DegenerateBoundary,
    #[error("vertex sum is not an isolated singularity")]
    DegenerateVertexSum,
    #[error("lift failed at piecewise degree {level}: {detail}")]
    LiftFailure { level: i64, detail: String },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl RunError {
    /// Process exit code this error maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::LiftFailure { .. } | RunError::Internal(_) => 3,
            _ => 2,
        }
    }
}

/// Elimination context shared by the outer and inner lifts.
struct ElimCtx<'a> {
    fx: Poly,
    fy: Poly,
    pw: &'a PiecewiseWeight,
    d_prime: i64,
    /// Basis monomials: positions the lift may deposit on.
    escapes: &'a BTreeSet<Monomial>,
    /// Rows above this standard degree are outside the determinacy window
    /// and unconstrained.
    std_cap: Option<u32>,
}

impl<'a> ElimCtx<'a> {
    fn in_rows(&self, m: &Monomial) -> bool {
        self.pw.deg(m) <= self.d_prime
            && !self.escapes.contains(m)
            && self.std_cap.map_or(true, |cap| m.total_deg() <= cap)
    }

    fn project(&self, p: &Poly, level: i64) -> SparseVec {
        poly_to_vec(&p.filter(|m| self.pw.deg(m) <= level && self.in_rows(m)))
    }
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

/// Solves `target = g*fx + h*fy + deposit + (filtration above d_prime)` with
/// increments of standard order at least `omin`, level by level: the lowest
/// offending piecewise degree is cancelled by an exact linear solve over the
/// candidate multiplier monomials, candidates admitted in ascending standard
/// degree until the slice system becomes solvable.
fn eliminate_target(
    ctx: &ElimCtx,
    target: &Poly,
    omin: u32,
) -> Result<(Poly, Poly), RunError> {
    let mut g = Poly::zero();
    let mut h = Poly::zero();
    let mut r = target.clone();
    let gens = [&ctx.fx, &ctx.fy];
    let ords: Vec<Option<i64>> = gens.iter().map(|p| ctx.pw.ord(p)).collect();
    let mut guard = 0usize;
    loop {
        guard += 1;
        if guard > 10_000 {
            return Err(RunError::Internal(
                "elimination level loop exceeded its bound".into(),
            ));
        }
        let level = r
            .terms()
            .filter(|(m, _)| ctx.in_rows(m))
            .map(|(m, _)| ctx.pw.deg(m))
            .min();
        let Some(level) = level else { break };

        // candidate multipliers, grouped by ascending standard degree
        let mut cands: Vec<(u8, Monomial, SparseVec)> = Vec::new();
        for (gi, (gen, ord)) in gens.iter().zip(&ords).enumerate() {
            let Some(ord) = *ord else { continue };
            for m in monomials_with_pw_at_most(ctx.pw, level - ord) {
                if m.total_deg() < omin {
                    continue;
                }
                // bare variable on its own partial is a pure rescaling
                if (gi == 0 && m == Monomial::new(1, 0)) || (gi == 1 && m == Monomial::new(0, 1)) {
                    continue;
                }
                let col = ctx.project(&gen.mul_monomial(&m, &Rat::one()), level);
                if !col.is_empty() {
                    cands.push((gi as u8, m, col));
                }
            }
        }
        cands.sort_by_key(|(gi, m, _)| (m.total_deg(), ctx.pw.deg(m), *m, *gi));

        let slice_target = ctx.project(&r, level);
        let mut ech = Echelon::new(true);
        let mut solution = None;
        let mut k = 0usize;
        while k < cands.len() {
            // admit one standard-degree group at a time
            let deg = cands[k].1.total_deg();
            while k < cands.len() && cands[k].1.total_deg() == deg {
                ech.insert(k, cands[k].2.clone());
                k += 1;
            }
            if let Some(sol) = ech.solve(slice_target.clone()) {
                solution = Some(sol);
                break;
            }
        }
        let Some(sol) = solution else {
            return Err(RunError::LiftFailure {
                level,
                detail: format!("no cancelling combination at piecewise degree {level}"),
            });
        };
        // sol satisfies sum sol_j * col_j = slice(r); adding it to the
        // increments zeroes the slice of the new residual
        for (idx, c) in &sol {
            let (gi, m, _) = &cands[*idx];
            if *gi == 0 {
                g.add_term(*m, c.clone());
            } else {
                h.add_term(*m, c.clone());
            }
        }
        r = target.sub(&g.mul(&ctx.fx)).sub(&h.mul(&ctx.fy));
        let new_level = r
            .terms()
            .filter(|(m, _)| ctx.in_rows(m))
            .map(|(m, _)| ctx.pw.deg(m))
            .min();
        if let Some(nl) = new_level {
            if nl <= level {
                return Err(RunError::Internal(format!(
                    "no progress at piecewise degree {level}"
                )));
            }
        }
    }
    Ok((g, h))
}

/// Decomposition of a target slice against the Jacobian ideal with
/// basis-monomial escapes: `q = g*dfx + h*dfy + basis_part + higher`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub g: Poly,
    pub h: Poly,
    pub basis_part: Poly,
}

impl Decomposition {
    /// The exact remainder `q - g*fx - h*fy - basis_part`; every term has
    /// piecewise degree above the decomposition level.
    pub fn tail(&self, q: &Poly, f: &Poly) -> Poly {
        q.sub(&self.g.mul(&f.partial(Var::X)))
            .sub(&self.h.mul(&f.partial(Var::Y)))
            .sub(&self.basis_part)
    }
}

/// Writes `q` as `g*dfx + h*dfy + (terms on basis monomials of degree at most
/// d_prime) + (filtration above d_prime)`, exactly.
pub fn decompose(
    q: &Poly,
    f: &Poly,
    basis: &[Monomial],
    d_prime: i64,
    pw: &PiecewiseWeight,
) -> Result<Decomposition, RunError> {
    let escapes: BTreeSet<Monomial> = basis.iter().copied().collect();
    let ctx = ElimCtx {
        fx: f.partial(Var::X),
        fy: f.partial(Var::Y),
        pw,
        d_prime,
        escapes: &escapes,
        std_cap: None,
    };
    let (g, h) = eliminate_target(&ctx, q, 2)?;
    let rem = q.sub(&g.mul(&ctx.fx)).sub(&h.mul(&ctx.fy));
    let basis_part = rem.filter(|m| pw.deg(m) <= d_prime);
    debug_assert!(basis_part.support().all(|m| escapes.contains(m)));
    Ok(Decomposition { g, h, basis_part })
}

/// Piecewise jet at `d_prime` of the higher-order binomial contribution of
/// `phi` applied to `f`.
pub fn first_order_residual(
    f: &Poly,
    phi: &RightEquivalence,
    d_prime: i64,
    pw: &PiecewiseWeight,
) -> Poly {
    let keep = |m: &Monomial| pw.deg(m) <= d_prime;
    let sx = Poly::var(Var::X).add(&phi.gx);
    let sy = Poly::var(Var::Y).add(&phi.gy);
    let phif = f.substitute_keep(&sx, &sy, keep);
    let first = f
        .filter(keep)
        .add(&phi.gx.mul_keep(&f.partial(Var::X), keep))
        .add(&phi.gy.mul_keep(&f.partial(Var::Y), keep));
    pw.jet(&phif.sub(&first), d_prime)
}

/// Cancels a residual `q` whose terms all have piecewise degree at most
/// `d_prime`, with increments in standard order at least `l + 1`.
pub fn inner_cancel(
    f: &Poly,
    q: &Poly,
    l: u32,
    d_prime: i64,
    pw: &PiecewiseWeight,
    basis: &[Monomial],
) -> Result<RightEquivalence, RunError> {
    let escapes: BTreeSet<Monomial> = basis.iter().copied().collect();
    let ctx = ElimCtx {
        fx: f.partial(Var::X),
        fy: f.partial(Var::Y),
        pw,
        d_prime,
        escapes: &escapes,
        std_cap: None,
    };
    let (g, h) = eliminate_target(&ctx, &q.neg(), l + 1)?;
    Ok(RightEquivalence::new(g, h))
}

/// Offending terms: above the boundary, not a modulus monomial, inside the
/// determinacy window.
fn offenders(f: &Poly, pw: &PiecewiseWeight, escapes: &BTreeSet<Monomial>, cap: u32) -> Poly {
    f.filter(|m| pw.deg(m) > pw.d && !escapes.contains(m) && m.total_deg() <= cap)
}

/// Runs the outer/inner elimination loops; `f` enters and leaves truncated at
/// standard degree `cap`.
pub fn eliminate(
    f: &Poly,
    basis: &[Monomial],
    cap: u32,
    pw: &PiecewiseWeight,
    max_inner: usize,
    paranoid: bool,
    mu: u64,
) -> Result<(Poly, Vec<RightEquivalence>, Vec<PassStats>), RunError> {
    let escapes: BTreeSet<Monomial> = basis.iter().copied().collect();
    let mut f = f.clone();
    let mut steps: Vec<RightEquivalence> = Vec::new();
    let mut passes: Vec<PassStats> = Vec::new();
    let mut last_level: Option<i64> = None;
    let boundary_jet = pw.jet(&f, pw.d);

    loop {
        let off = offenders(&f, pw, &escapes, cap);
        if off.is_zero() {
            break;
        }
        let d_prime = pw.ord(&off).unwrap();
        if let Some(prev) = last_level {
            if d_prime <= prev {
                return Err(RunError::Internal(format!(
                    "outer elimination level regressed: {prev} -> {d_prime}"
                )));
            }
        }
        last_level = Some(d_prime);
        let slice = off.filter(|m| pw.deg(m) == d_prime);
        let ctx = ElimCtx {
            fx: f.partial(Var::X),
            fy: f.partial(Var::Y),
            pw,
            d_prime,
            escapes: &escapes,
            std_cap: Some(cap),
        };
        let (g, h) = eliminate_target(&ctx, &slice.neg(), 2)?;
        let phi = RightEquivalence::new(g, h);
        let mut filtrations = vec![phi.filtration];
        f = phi.apply(&f, cap);
        steps.push(phi);
        check_state(&f, pw, &boundary_jet, paranoid, mu)?;

        // inner loop: measured residuals at or below the current level
        let mut residuals: Vec<Poly> = Vec::new();
        let mut l = filtrations[0];
        let mut prev_ord: Option<u32> = None;
        loop {
            let q = offenders(&f, pw, &escapes, cap).filter(|m| pw.deg(m) <= d_prime);
            if q.is_zero() {
                break;
            }
            if residuals.len() >= max_inner {
                return Err(RunError::Internal(format!(
                    "inner cancellation did not converge within {max_inner} iterations at degree {d_prime}"
                )));
            }
            let q_ord = q.order().unwrap();
            if let Some(prev) = prev_ord {
                if q_ord <= prev {
                    return Err(RunError::Internal(format!(
                        "residual order did not grow: {prev} -> {q_ord}"
                    )));
                }
            }
            prev_ord = Some(q_ord);
            residuals.push(q.clone());
            let ctx = ElimCtx {
                fx: f.partial(Var::X),
                fy: f.partial(Var::Y),
                pw,
                d_prime,
                escapes: &escapes,
                std_cap: Some(cap),
            };
            let (g, h) = eliminate_target(&ctx, &q.neg(), l + 1)?;
            let phi = RightEquivalence::new(g, h);
            if phi.filtration <= l {
                return Err(RunError::Internal(format!(
                    "filtration did not grow: {l} -> {}",
                    phi.filtration
                )));
            }
            l = phi.filtration;
            filtrations.push(l);
            f = phi.apply(&f, cap);
            steps.push(phi);
            check_state(&f, pw, &boundary_jet, paranoid, mu)?;
        }
        passes.push(PassStats {
            level: d_prime,
            residuals,
            filtrations,
        });
    }
    Ok((f, steps, passes))
}

/// Boundary preservation (always) and Milnor invariance (paranoid mode).
fn check_state(
    f: &Poly,
    pw: &PiecewiseWeight,
    boundary_jet: &Poly,
    paranoid: bool,
    mu: u64,
) -> Result<(), RunError> {
    let jet = pw.jet(f, pw.d);
    if &jet != boundary_jet {
        return Err(RunError::Internal(format!(
            "boundary jet changed: expected {boundary_jet}, found {jet}"
        )));
    }
    if paranoid {
        if milnor_number(f) != Milnor::Finite(mu) {
            return Err(RunError::Internal(
                "Milnor number changed under an applied equivalence".into(),
            ));
        }
    }
    Ok(())
}

fn rat_pow(base: &Rat, exp: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..exp {
        acc = &acc * base;
    }
    acc
}

fn rat_pow_i(base: &Rat, exp: i64) -> Rat {
    if exp >= 0 {
        rat_pow(base, exp as u32)
    } else {
        Rat::one() / rat_pow(base, (-exp) as u32)
    }
}

/// Exact rational n-th root of `r`, when it exists (real root; for even n the
/// positive one).
fn rat_nth_root(r: &Rat, n: u32) -> Option<Rat> {
    if r.is_zero() {
        return Some(Rat::zero());
    }
    if n % 2 == 0 && r.is_negative() {
        return None;
    }
    let (num, den) = (r.numer(), r.denom());
    let (sign, num_abs) = if num.is_negative() {
        (-BigInt::one(), -num)
    } else {
        (BigInt::one(), num.clone())
    };
    let rn = num_abs.nth_root(n);
    let rd = den.nth_root(n);
    if num_abs == rn.clone().pow(n) && *den == rd.clone().pow(n) {
        Some(Rat::new(sign * rn, rd))
    } else {
        None
    }
}

/// Outcome of the two-term normalization.
#[derive(Clone, Debug, Default)]
pub struct Normalization {
    pub scaling: Option<(Rat, Rat)>,
    pub constraints: Vec<ScalingConstraint>,
    pub solved_powers: Vec<SolvedPower>,
    pub diagnostics: Vec<String>,
    /// The two normalized monomials, when the step ran.
    pub targets: Option<(Monomial, Monomial)>,
}

/// Rescales `x -> c1*x`, `y -> c3*y` so the two graded-lex-extremal boundary
/// terms outside the basis get coefficient one; emits exact constraint
/// equations instead when the exponent system forces irrational factors.
pub fn normalize_two(
    f: &Poly,
    basis: &[Monomial],
    cap: u32,
    pw: &PiecewiseWeight,
) -> (Poly, Normalization) {
    let mut out = Normalization::default();
    let eligible: Vec<(Monomial, Rat)> = f
        .terms()
        .filter(|(m, _)| {
            pw.deg(m) == pw.d && m.total_deg() <= cap && !basis.contains(m)
        })
        .map(|(m, c)| (*m, c.clone()))
        .collect();
    if eligible.len() < 2 {
        out.diagnostics
            .push("two-term normalization skipped: fewer than two eligible boundary terms".into());
        return (f.clone(), out);
    }
    let (m1, k1) = eligible.first().unwrap().clone();
    let (m2, k2) = eligible.last().unwrap().clone();
    out.targets = Some((m1, m2));
    if k1.is_one() && k2.is_one() {
        return (f.clone(), out);
    }
    let (a1, b1) = (m1.ex as i64, m1.ey as i64);
    let (a2, b2) = (m2.ex as i64, m2.ey as i64);
    let det = a1 * b2 - a2 * b1;
    if det == 0 {
        out.diagnostics
            .push("two-term normalization skipped: degenerate exponent system".into());
        return (f.clone(), out);
    }
    // c1^det = k1^(-b2) k2^(b1),  c3^det = k1^(a2) k2^(-a1)
    let rho1 = rat_pow_i(&k1, -b2) * rat_pow_i(&k2, b1);
    let rho3 = rat_pow_i(&k1, a2) * rat_pow_i(&k2, -a1);
    let (p1, p3) = if det >= 0 {
        (rho1.clone(), rho3.clone())
    } else {
        (Rat::one() / &rho1, Rat::one() / &rho3)
    };
    let n = det.unsigned_abs() as u32;
    let c1 = rat_nth_root(&p1, n);
    let c3 = rat_nth_root(&p3, n);
    match (c1, c3) {
        (Some(c1), Some(c3)) if !c1.is_zero() && !c3.is_zero() => {
            let scaled = rescale(f, &c1, &c3);
            debug_assert!(scaled.coeff(&m1).is_one() && scaled.coeff(&m2).is_one());
            out.scaling = Some((c1, c3));
            (scaled, out)
        }
        _ => {
            out.constraints = vec![
                ScalingConstraint {
                    coeff: k1,
                    e1: m1.ex,
                    e3: m1.ey,
                },
                ScalingConstraint {
                    coeff: k2,
                    e1: m2.ex,
                    e3: m2.ey,
                },
            ];
            out.solved_powers = vec![
                SolvedPower {
                    var: Var::X,
                    power: n as i64,
                    value: p1,
                },
                SolvedPower {
                    var: Var::Y,
                    power: n as i64,
                    value: p3,
                },
            ];
            out.diagnostics
                .push("two-term normalization has no rational solution; constraints emitted".into());
            (f.clone(), out)
        }
    }
}

/// `f(c1*x, c3*y)`.
pub fn rescale(f: &Poly, cx: &Rat, cy: &Rat) -> Poly {
    Poly::from_terms(
        f.terms()
            .map(|(m, c)| (*m, c * rat_pow(cx, m.ex) * rat_pow(cy, m.ey))),
    )
}

/// Run configuration.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub max_inner: Option<usize>,
    pub paranoid: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_inner: None,
            paranoid: false,
        }
    }
}

/// Full pipeline result.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub input: Poly,
    pub truncated_input: Poly,
    pub f0: Poly,
    pub family: NormalFormFamily,
    pub equation: NormalFormEquation,
    pub log: TransformationLog,
    pub polygon: NewtonPolygon,
    pub norm_report: NormReport,
    pub mu: u64,
    pub determinacy_bound: u32,
    pub inner_modality: usize,
    pub passes: Vec<PassStats>,
    pub diagnostics: Vec<String>,
}

/// Replays a transformation log against the raw input, mirroring the
/// pipeline's truncation discipline.
pub fn replay(f_raw: &Poly, cap: u32, log: &TransformationLog) -> Poly {
    let mut f = f_raw.jet(cap);
    for step in &log.steps {
        match step {
            LogStep::Substitution(phi) => f = phi.apply(&f, cap),
            LogStep::Scaling { cx, cy } => f = rescale(&f, cx, cy),
            LogStep::AxisCompletion(m) => f.add_term(*m, Rat::one()),
        }
    }
    f
}

/// The full pipeline: polygon, vertex sum, regular basis, family,
/// elimination, two-term normalization, axis completion, parameter readout.
pub fn run(f_raw: &Poly, opts: &RunOptions) -> Result<RunResult, RunError> {
    let mut diagnostics = Vec::new();
    if f_raw.is_zero() {
        return Err(RunError::Zero);
    }
    let quad = quadratic_part(f_raw);
    if !quad.is_zero() {
        return Err(RunError::NotCorank2(quad.to_string()));
    }
    let mu = match milnor_number(f_raw) {
        Milnor::Finite(mu) => mu,
        Milnor::Infinite => return Err(RunError::InfiniteMilnor),
    };
    let cap = u32::try_from(mu + 1).map_err(|_| RunError::Internal("mu overflow".into()))?;

    let np = match polygon(f_raw) {
        Ok(np) => np,
        Err(crate::newton::NewtonError::NoCompactFacet) => return Err(RunError::NoCompactFacet),
        Err(crate::newton::NewtonError::ZeroPolynomial) => return Err(RunError::Zero),
    };
    if !is_nondegenerate(f_raw, &np) {
        return Err(RunError::DegenerateBoundary);
    }
    let norm_report = check_normalized(f_raw, &np, Some(mu as i64));
    if !norm_report.normalized {
        diagnostics.push(
            "input does not satisfy the normalization condition; proceeding (diagnostic only)"
                .into(),
        );
    }

    let f = f_raw.jet(cap);
    {
        let np_trunc = polygon(&f).map_err(|_| {
            RunError::Internal("determinacy truncation removed the Newton polygon".into())
        })?;
        if np_trunc.vertices != np.vertices {
            return Err(RunError::Internal(
                "determinacy truncation changed the Newton polygon".into(),
            ));
        }
    }

    let f0 = vertex_sum(f_raw, &np);
    let rb = regular_basis(&f0, &np.pw).map_err(|e| match e {
        crate::regbasis::RegBasisError::InfiniteMilnor => RunError::DegenerateVertexSum,
        crate::regbasis::RegBasisError::Incomplete => {
            RunError::Internal("regular basis construction incomplete".into())
        }
    })?;
    let family = normal_form_family(&f0, &rb);
    let modality = inner_modality(&rb);

    // boundary terms outside the family support cannot be removed by the
    // strictly-above-boundary elimination; flag them
    for (m, _) in f.terms() {
        if np.pw.deg(m) == np.pw.d
            && !np.vertices.contains(m)
            && !rb.moduli.contains(m)
        {
            diagnostics.push(format!(
                "boundary term {m} is neither a vertex nor a modulus monomial and is left in place"
            ));
        }
    }

    let max_inner = opts.max_inner.unwrap_or(4 * cap as usize + 8);
    let (eliminated, steps, passes) =
        eliminate(&f, &rb.moduli, cap, &np.pw, max_inner, opts.paranoid, mu)?;
    let mut log = TransformationLog {
        steps: steps.into_iter().map(LogStep::Substitution).collect(),
    };

    let (normalized, norm) = normalize_two(&eliminated, &rb.moduli, cap, &np.pw);
    if let Some((cx, cy)) = &norm.scaling {
        log.steps.push(LogStep::Scaling {
            cx: cx.clone(),
            cy: cy.clone(),
        });
    }
    diagnostics.extend(norm.diagnostics.iter().cloned());

    let values: Vec<(Monomial, Rat)> = rb
        .moduli
        .iter()
        .map(|m| (*m, normalized.coeff(m)))
        .collect();
    let invariants = if norm.constraints.is_empty() {
        Vec::new()
    } else {
        let n = norm.solved_powers[0].power;
        let p1 = &norm.solved_powers[0].value;
        let p3 = &norm.solved_powers[1].value;
        values
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(m, v)| ModulusInvariant {
                monomial: *m,
                power: n,
                value: rat_pow_i(v, n) * rat_pow(p1, m.ex) * rat_pow(p3, m.ey),
            })
            .collect()
    };

    let (completed, added) = ensure_convenient(&normalized, mu as i64);
    for m in &added {
        log.steps.push(LogStep::AxisCompletion(*m));
    }
    if !added.is_empty() {
        diagnostics.push(format!(
            "axis completion added {} term(s) above the determinacy bound",
            added.len()
        ));
    }

    let equation = NormalFormEquation {
        poly: completed,
        pre_completion: normalized.clone(),
        values,
        constraints: norm.constraints.clone(),
        solved_powers: norm.solved_powers.clone(),
        invariants,
    };

    // replay soundness: the log must reproduce the output from the raw input
    let replayed = replay(f_raw, cap, &log);
    if replayed != equation.poly {
        return Err(RunError::Internal(
            "transformation log replay does not reproduce the output".into(),
        ));
    }
    // Milnor invariance of the final equation (before completion terms)
    if milnor_number(&normalized) != Milnor::Finite(mu) {
        return Err(RunError::Internal(
            "Milnor number changed across the pipeline".into(),
        ));
    }

    Ok(RunResult {
        input: f_raw.clone(),
        truncated_input: f,
        f0,
        family,
        equation,
        log,
        polygon: np,
        norm_report,
        mu,
        determinacy_bound: cap,
        inner_modality: modality,
        passes,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse, rat_int};

    fn p(s: &str) -> Poly {
        parse(s).unwrap()
    }

    fn ex1() -> Poly {
        p("y^28+x*y^7+x^2*y^3+11*x^2*y^4+x^22")
    }

    #[test]
    fn decompose_example1_term() {
        let f = ex1();
        let np = polygon(&f).unwrap();
        let rb = regular_basis(&vertex_sum(&f, &np), &np.pw).unwrap();
        let q = p("-11*x^2*y^4");
        let dec = decompose(&q, &f, &rb.moduli, 1008, &np.pw).unwrap();
        assert_eq!(dec.g, p("-7*x*y-28*y^22"));
        assert_eq!(dec.h, p("y^2"));
        assert!(dec.basis_part.is_zero());
        // the tail is pure filtration above 1008
        let tail = dec.tail(&q, &f);
        assert!(tail.support().all(|m| np.pw.deg(m) > 1008));
    }

    #[test]
    fn first_order_residual_example1() {
        let f = ex1();
        let np = polygon(&f).unwrap();
        let phi = RightEquivalence::new(p("-7*x*y-28*y^22"), p("y^2"));
        assert_eq!(phi.filtration, 2);
        let q = first_order_residual(&f, &phi, 1008, &np.pw);
        assert_eq!(q, p("-28*x*y^9+182*y^30"));
        // identity map has no higher-order contribution
        let id = RightEquivalence::new(Poly::zero(), Poly::zero());
        assert!(first_order_residual(&f, &id, 1008, &np.pw).is_zero());
    }

    #[test]
    fn normalize_two_cases() {
        let f = p("2*x^4+3*x^2*y^2+5*y^4");
        let np = polygon(&f).unwrap();
        let basis = [Monomial::new(2, 2)];
        let (out, norm) = normalize_two(&f, &basis, 10, &np.pw);
        assert!(norm.scaling.is_none());
        assert_eq!(out, f);
        assert_eq!(
            norm.constraints,
            vec![
                ScalingConstraint {
                    coeff: rat_int(5),
                    e1: 0,
                    e3: 4
                },
                ScalingConstraint {
                    coeff: rat_int(2),
                    e1: 4,
                    e3: 0
                },
            ]
        );

        // rational case: x^4 coefficient 16, y^4 coefficient 81
        let g = p("16*x^4+x^2*y^2+81*y^4");
        let npg = polygon(&g).unwrap();
        let (out, norm) = normalize_two(&g, &basis, 10, &npg.pw);
        let (cx, cy) = norm.scaling.unwrap();
        assert_eq!(rat_pow(&cx, 4), crate::poly::rat(1, 16));
        assert_eq!(rat_pow(&cy, 4), crate::poly::rat(1, 81));
        assert!(out.coeff(&Monomial::new(4, 0)).is_one());
        assert!(out.coeff(&Monomial::new(0, 4)).is_one());

        // both already one: identity
        let h = p("x^4+7*x^2*y^2+y^4");
        let nph = polygon(&h).unwrap();
        let (out, norm) = normalize_two(&h, &basis, 10, &nph.pw);
        assert!(norm.scaling.is_none() && norm.constraints.is_empty());
        assert_eq!(out, h);
    }

    #[test]
    fn nth_root_helper() {
        assert_eq!(rat_nth_root(&crate::poly::rat(1, 16), 4), Some(crate::poly::rat(1, 2)));
        assert_eq!(rat_nth_root(&crate::poly::rat(-8, 27), 3), Some(crate::poly::rat(-2, 3)));
        assert_eq!(rat_nth_root(&crate::poly::rat(1, 2), 4), None);
        assert_eq!(rat_nth_root(&crate::poly::rat(-1, 16), 4), None);
    }
}
