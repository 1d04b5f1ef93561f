//! The base curve: parameters, group law, local expansions, residues, and
//! Riemann–Roch spaces.
//!
//! The curve is a smooth plane cubic in long Weierstrass form
//!
//! ```text
//!   y² + a₁·t·y + a₃·y = t³ + a₂·t² + a₄·t + a₆
//! ```
//!
//! over a finite base field, with a single point at infinity. Everything
//! here is generic over the coefficient field through [`Coeffs`], so the
//! same group law and expansion code serves exact finite fields, Laurent
//! scalars, and (via the lattice layer) the exact function field.
//!
//! Local expansions use the canonical uniformizers: `π = t/y` at infinity,
//! `t − t₀` at ordinary affine points, and `y − y₀` where the vertical
//! coordinate ramifies (two-torsion). The invariant differential is carried
//! along as `λ = dt / (2y + a₁t + a₃)`, so residues can be read off any
//! expansion without re-deriving a chart.

use crate::coeffs::{
    nullspace, pv_deg, pv_mul, pv_trim, ser_add, ser_coeff, ser_const, ser_derivative, ser_div,
    ser_eval_poly, ser_inv, ser_mul, ser_scale, ser_shift, ser_sub, ser_valuation, ser_zero,
    Coeffs, Ser,
};
use crate::error::{Error, Result};
use crate::field::{Fq, FqRef, Gf};
use crate::series::{Scalar, ScalarCtx};

/// Curve parameters over their base field.
#[derive(Debug, Clone)]
pub struct Curve {
    /// The base field F_q.
    pub base: FqRef,
    /// Characteristic.
    pub p: u32,
    /// Field size q.
    pub q: u64,
    /// Coefficients `[a₁, a₂, a₃, a₄, a₆]` in the base field.
    pub a: [Gf; 5],
}

/// A point of the curve with coordinates in some coefficient field.
#[derive(Debug, Clone)]
pub enum Pt<El> {
    /// The unique point at infinity.
    Inf,
    /// An affine point `(t, y)`.
    Aff(El, El),
}

impl<El> Pt<El> {
    pub fn is_inf(&self) -> bool {
        matches!(self, Pt::Inf)
    }
}

/// Which local parameter an expansion is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniKind {
    /// `π = t/y` at infinity.
    Pi,
    /// `t − t₀` at an ordinary affine point.
    TShift,
    /// `y − y₀` at a point where `t − t₀` ramifies (two-torsion).
    YShift,
}

/// Local expansion of the coordinate functions at a point, together with
/// the invariant differential. `lam` is the coefficient series of
/// `λ = lam(u)·du` in the local parameter `u`.
#[derive(Debug, Clone)]
pub struct LocalExp<El> {
    pub uni: UniKind,
    pub t: Ser<El>,
    pub y: Ser<El>,
    pub lam: Ser<El>,
}

/// A function `u(t) + w(t)·y` on the curve (every function regular away
/// from infinity and poles of its `t`-denominator has this shape after
/// reducing `y²`). Coefficients are dense, low-to-high in `t`.
#[derive(Debug, Clone)]
pub struct Fn2<El> {
    pub ut: Vec<El>,
    pub wt: Vec<El>,
}

/// Basis of a Riemann–Roch space: numerators over a common `t`-denominator.
#[derive(Debug, Clone)]
pub struct RrBasis<El> {
    pub numerators: Vec<Fn2<El>>,
    pub den: Vec<El>,
}

impl Curve {
    /// Build and validate a curve over F_{p^k} with coefficients given as
    /// prime-field integers `[a₁, a₂, a₃, a₄, a₆]`.
    pub fn new(p: u32, k: u32, c: [i64; 5]) -> Result<Curve> {
        let base = Fq::new(p, k);
        let a: Vec<Gf> = c.iter().map(|ci| base.from_int(*ci)).collect();
        let curve =
            Curve { q: base.q, p, a: [a[0], a[1], a[2], a[3], a[4]], base };
        let disc = curve.discriminant();
        if disc == crate::field::GF_ZERO {
            return Err(Error::ConfigInvalid {
                reason: "curve is singular (discriminant vanishes)".into(),
            });
        }
        Ok(curve)
    }

    /// The discriminant of the Weierstrass model, in the base field.
    pub fn discriminant(&self) -> Gf {
        let f = &*self.base;
        let [a1, a2, a3, a4, a6] = self.a;
        let n = |c: i64| f.from_int(c);
        let b2 = f.add(f.mul(a1, a1), f.mul(n(4), a2));
        let b4 = f.add(f.mul(n(2), a4), f.mul(a1, a3));
        let b6 = f.add(f.mul(a3, a3), f.mul(n(4), a6));
        let b8 = {
            let t1 = f.mul(f.mul(a1, a1), a6);
            let t2 = f.mul(n(4), f.mul(a2, a6));
            let t3 = f.neg(f.mul(a1, f.mul(a3, a4)));
            let t4 = f.mul(a2, f.mul(a3, a3));
            let t5 = f.neg(f.mul(a4, a4));
            f.add(f.add(f.add(f.add(t1, t2), t3), t4), t5)
        };
        let d1 = f.neg(f.mul(f.mul(b2, b2), b8));
        let d2 = f.neg(f.mul(n(8), f.mul(b4, f.mul(b4, b4))));
        let d3 = f.neg(f.mul(n(27), f.mul(b6, b6)));
        let d4 = f.mul(n(9), f.mul(b2, f.mul(b4, b6)));
        f.add(f.add(f.add(d1, d2), d3), d4)
    }

    /// Group-law context over the base field itself.
    pub fn ops_base(&self) -> CurveOps<'_, Fq> {
        CurveOps { cf: &self.base, a: self.a }
    }

    /// Group-law context over an extension field of the base.
    pub fn ops_in<'f>(&self, ext: &'f Fq) -> CurveOps<'f, Fq> {
        let factor = ext.embedding_from(&self.base);
        let a = self.a.map(|c| ext.embed(c, factor));
        CurveOps { cf: ext, a }
    }

    /// Group-law context over a Laurent-scalar field whose residue field
    /// contains the base field.
    pub fn ops_scalar<'c>(&self, ctx: &'c ScalarCtx) -> CurveOps<'c, ScalarCtx> {
        let factor = ctx.fq.embedding_from(&self.base);
        let a = self.a.map(|c| ctx.from_gf(ctx.fq.embed(c, factor)));
        CurveOps { cf: ctx, a }
    }

    /// All points over an extension field, deterministically ordered:
    /// infinity first, then affine points by the base enumeration of `t`
    /// and packed order of `y`.
    pub fn points_over(&self, ext: &FqRef) -> Vec<Pt<Gf>> {
        let ops = self.ops_in(ext);
        let f = &**ext;
        let [_, a2, _, a4, a6] = ops.a;
        let mut pts = vec![Pt::Inf];
        for t in f.elements() {
            let b = f.add(f.mul(ops.a[0], t), ops.a[2]);
            let t2 = f.mul(t, t);
            let ct = f.add(
                f.add(f.mul(t2, t), f.mul(a2, t2)),
                f.add(f.mul(a4, t), a6),
            );
            let mut ys = f.solve_quadratic(b, f.neg(ct));
            ys.sort_by_key(|y| f.packed(*y));
            for y in ys {
                pts.push(Pt::Aff(t, y));
            }
        }
        pts
    }

    /// The class number `h = |X(F_q)|`.
    pub fn h(&self) -> u64 {
        self.points_over(&self.base).len() as u64
    }
}

/// Curve arithmetic over one coefficient field: the group law, function
/// algebra, local expansions, and Riemann–Roch solves.
pub struct CurveOps<'a, C: Coeffs> {
    pub cf: &'a C,
    /// `[a₁, a₂, a₃, a₄, a₆]` embedded into the coefficient field.
    pub a: [C::El; 5],
}

impl<'a, C: Coeffs> CurveOps<'a, C> {
    fn a1(&self) -> &C::El {
        &self.a[0]
    }
    fn a2(&self) -> &C::El {
        &self.a[1]
    }
    fn a3(&self) -> &C::El {
        &self.a[2]
    }
    fn a4(&self) -> &C::El {
        &self.a[3]
    }
    fn a6(&self) -> &C::El {
        &self.a[4]
    }

    /// `C(t) = t³ + a₂t² + a₄t + a₆` as a dense polynomial.
    pub fn rhs_poly(&self) -> Vec<C::El> {
        vec![self.a6().clone(), self.a4().clone(), self.a2().clone(), self.cf.one()]
    }

    /// `b(t) = a₁t + a₃` (the coefficient of `y` in the curve equation).
    pub fn ylin_poly(&self) -> Vec<C::El> {
        vec![self.a3().clone(), self.a1().clone()]
    }

    /// Curve-equation residual `y² + b(t)y − C(t)` at field-element
    /// coordinates; zero exactly on the curve.
    pub fn residual_at(&self, t: &C::El, y: &C::El) -> C::El {
        let cf = self.cf;
        let b = crate::coeffs::pv_eval(cf, &self.ylin_poly(), t);
        let c = crate::coeffs::pv_eval(cf, &self.rhs_poly(), t);
        cf.sub(&cf.add(&cf.mul(y, y), &cf.mul(&b, y)), &c)
    }

    /// Check membership; infinity is always on the curve.
    pub fn require_on_curve(&self, p: &Pt<C::El>) -> Result<()> {
        match p {
            Pt::Inf => Ok(()),
            Pt::Aff(t, y) => {
                if self.cf.is_zero(&self.residual_at(t, y)) {
                    Ok(())
                } else {
                    Err(Error::PointNotOnCurve { residual: 0 })
                }
            }
        }
    }

    /// `∂F/∂y = 2y + a₁t + a₃` at field-element coordinates.
    pub fn fy_at(&self, t: &C::El, y: &C::El) -> C::El {
        let cf = self.cf;
        let two_y = cf.mul(&cf.from_int(2), y);
        cf.add(&cf.add(&two_y, &cf.mul(self.a1(), t)), self.a3())
    }

    /// `∂F/∂t = a₁y − 3t² − 2a₂t − a₄` at field-element coordinates.
    pub fn ft_at(&self, t: &C::El, y: &C::El) -> C::El {
        let cf = self.cf;
        let s1 = cf.mul(self.a1(), y);
        let s2 = cf.mul(&cf.from_int(3), &cf.mul(t, t));
        let s3 = cf.mul(&cf.from_int(2), &cf.mul(self.a2(), t));
        cf.sub(&cf.sub(&cf.sub(&s1, &s2), &s3), self.a4())
    }

    // ---------------------------------------------------------------------
    // Group law.
    // ---------------------------------------------------------------------

    /// Point equality in the coefficient field's visible sense.
    pub fn pt_eq(&self, p: &Pt<C::El>, q: &Pt<C::El>) -> bool {
        match (p, q) {
            (Pt::Inf, Pt::Inf) => true,
            (Pt::Aff(t1, y1), Pt::Aff(t2, y2)) => {
                self.cf.eq(t1, t2) && self.cf.eq(y1, y2)
            }
            _ => false,
        }
    }

    /// Group negation `−(t, y) = (t, −y − a₁t − a₃)`; this is also the
    /// hyperelliptic conjugate.
    pub fn pt_neg(&self, p: &Pt<C::El>) -> Pt<C::El> {
        match p {
            Pt::Inf => Pt::Inf,
            Pt::Aff(t, y) => {
                let cf = self.cf;
                let b = cf.add(&cf.mul(self.a1(), t), self.a3());
                Pt::Aff(t.clone(), cf.neg(&cf.add(y, &b)))
            }
        }
    }

    /// Group addition with infinity as identity.
    pub fn pt_add(&self, p: &Pt<C::El>, q: &Pt<C::El>) -> Result<Pt<C::El>> {
        let cf = self.cf;
        let (t1, y1, t2, y2) = match (p, q) {
            (Pt::Inf, _) => return Ok(q.clone()),
            (_, Pt::Inf) => return Ok(p.clone()),
            (Pt::Aff(t1, y1), Pt::Aff(t2, y2)) => (t1, y1, t2, y2),
        };
        if cf.eq(t1, t2) {
            if self.pt_eq(&self.pt_neg(p), q) {
                return Ok(Pt::Inf);
            }
            return self.pt_dbl(p);
        }
        let lam = cf.div(&cf.sub(y2, y1), &cf.sub(t2, t1))?;
        self.chord_result(t1, y1, t2, &lam)
    }

    /// Doubling; two-torsion points double to infinity.
    pub fn pt_dbl(&self, p: &Pt<C::El>) -> Result<Pt<C::El>> {
        let cf = self.cf;
        let Pt::Aff(t1, y1) = p else { return Ok(Pt::Inf) };
        let den = self.fy_at(t1, y1);
        if cf.is_zero(&den) {
            return Ok(Pt::Inf);
        }
        let num = cf.neg(&self.ft_at(t1, y1));
        let lam = cf.div(&num, &den)?;
        self.chord_result(t1, y1, t1, &lam)
    }

    /// Shared tail of addition and doubling from the chord/tangent slope.
    fn chord_result(
        &self,
        t1: &C::El,
        y1: &C::El,
        t2: &C::El,
        lam: &C::El,
    ) -> Result<Pt<C::El>> {
        let cf = self.cf;
        // t₃ = λ² + a₁λ − a₂ − t₁ − t₂
        let mut t3 = cf.add(&cf.mul(lam, lam), &cf.mul(self.a1(), lam));
        t3 = cf.sub(&cf.sub(&cf.sub(&t3, self.a2()), t1), t2);
        // y₃ = λ(t₁ − t₃) − y₁ − a₁t₃ − a₃
        let mut y3 = cf.mul(lam, &cf.sub(t1, &t3));
        y3 = cf.sub(&cf.sub(&cf.sub(&y3, y1), &cf.mul(self.a1(), &t3)), self.a3());
        Ok(Pt::Aff(t3, y3))
    }

    /// Scalar multiple `n·p` (double-and-add; negative `n` allowed).
    pub fn pt_mul(&self, p: &Pt<C::El>, n: i64) -> Result<Pt<C::El>> {
        if n == 0 {
            return Ok(Pt::Inf);
        }
        let base = if n < 0 { self.pt_neg(p) } else { p.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = Pt::Inf;
        let mut run = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.pt_add(&acc, &run)?;
            }
            k >>= 1;
            if k > 0 {
                run = self.pt_dbl(&run)?;
            }
        }
        Ok(acc)
    }

    /// Sum of a sequence of points.
    pub fn pt_sum<I: IntoIterator<Item = Pt<C::El>>>(&self, pts: I) -> Result<Pt<C::El>> {
        let mut acc = Pt::Inf;
        for p in pts {
            acc = self.pt_add(&acc, &p)?;
        }
        Ok(acc)
    }

    // ---------------------------------------------------------------------
    // Function algebra.
    // ---------------------------------------------------------------------

    pub fn fn2_zero(&self) -> Fn2<C::El> {
        Fn2 { ut: vec![], wt: vec![] }
    }

    /// `t^i y^j` with `j ∈ {0, 1}`.
    pub fn fn2_monomial(&self, i: usize, j: usize) -> Fn2<C::El> {
        assert!(j <= 1, "y-degree must be reduced");
        let cf = self.cf;
        let mut coeffs = vec![cf.zero(); i + 1];
        coeffs[i] = cf.one();
        if j == 0 {
            Fn2 { ut: coeffs, wt: vec![] }
        } else {
            Fn2 { ut: vec![], wt: coeffs }
        }
    }

    pub fn fn2_is_zero(&self, f: &Fn2<C::El>) -> bool {
        pv_deg(self.cf, &f.ut).is_none() && pv_deg(self.cf, &f.wt).is_none()
    }

    pub fn fn2_add(&self, f: &Fn2<C::El>, g: &Fn2<C::El>) -> Fn2<C::El> {
        Fn2 {
            ut: crate::coeffs::pv_add(self.cf, &f.ut, &g.ut),
            wt: crate::coeffs::pv_add(self.cf, &f.wt, &g.wt),
        }
    }

    pub fn fn2_neg(&self, f: &Fn2<C::El>) -> Fn2<C::El> {
        Fn2 {
            ut: crate::coeffs::pv_neg(self.cf, &f.ut),
            wt: crate::coeffs::pv_neg(self.cf, &f.wt),
        }
    }

    pub fn fn2_sub(&self, f: &Fn2<C::El>, g: &Fn2<C::El>) -> Fn2<C::El> {
        self.fn2_add(f, &self.fn2_neg(g))
    }

    pub fn fn2_scale(&self, f: &Fn2<C::El>, x: &C::El) -> Fn2<C::El> {
        Fn2 {
            ut: crate::coeffs::pv_scale(self.cf, &f.ut, x),
            wt: crate::coeffs::pv_scale(self.cf, &f.wt, x),
        }
    }

    /// Product in the function algebra, reducing `y² = C(t) − b(t)y`.
    pub fn fn2_mul(&self, f: &Fn2<C::El>, g: &Fn2<C::El>) -> Fn2<C::El> {
        let cf = self.cf;
        let uu = pv_mul(cf, &f.ut, &g.ut);
        let ww = pv_mul(cf, &f.wt, &g.wt);
        let uw = crate::coeffs::pv_add(
            cf,
            &pv_mul(cf, &f.ut, &g.wt),
            &pv_mul(cf, &f.wt, &g.ut),
        );
        let mut ut = crate::coeffs::pv_add(cf, &uu, &pv_mul(cf, &ww, &self.rhs_poly()));
        let mut wt =
            crate::coeffs::pv_sub(cf, &uw, &pv_mul(cf, &ww, &self.ylin_poly()));
        pv_trim(cf, &mut ut);
        pv_trim(cf, &mut wt);
        Fn2 { ut, wt }
    }

    /// Hyperelliptic conjugate `y ↦ −y − a₁t − a₃`.
    pub fn fn2_conj(&self, f: &Fn2<C::El>) -> Fn2<C::El> {
        let cf = self.cf;
        let shift = pv_mul(cf, &f.wt, &self.ylin_poly());
        Fn2 {
            ut: crate::coeffs::pv_sub(cf, &f.ut, &shift),
            wt: crate::coeffs::pv_neg(cf, &f.wt),
        }
    }

    /// Norm `f · f̄`, a polynomial in `t` alone.
    pub fn fn2_norm(&self, f: &Fn2<C::El>) -> Vec<C::El> {
        let prod = self.fn2_mul(f, &self.fn2_conj(f));
        debug_assert!(pv_deg(self.cf, &prod.wt).is_none());
        prod.ut
    }

    /// Pole order at infinity: `max(2·deg ut, 3 + 2·deg wt)`; the two arms
    /// have opposite parities, so the max is always attained once.
    pub fn fn2_deg_inf(&self, f: &Fn2<C::El>) -> Option<i64> {
        let du = pv_deg(self.cf, &f.ut).map(|d| 2 * d as i64);
        let dw = pv_deg(self.cf, &f.wt).map(|d| 3 + 2 * d as i64);
        match (du, dw) {
            (None, None) => None,
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (Some(a), Some(b)) => Some(a.max(b)),
        }
    }

    /// Evaluate at affine coordinates.
    pub fn fn2_eval_pt(&self, f: &Fn2<C::El>, t: &C::El, y: &C::El) -> C::El {
        let cf = self.cf;
        let u = crate::coeffs::pv_eval(cf, &f.ut, t);
        let w = crate::coeffs::pv_eval(cf, &f.wt, t);
        cf.add(&u, &cf.mul(&w, y))
    }

    /// Evaluate along a local expansion.
    pub fn fn2_eval_ser(&self, f: &Fn2<C::El>, exp: &LocalExp<C::El>) -> Ser<C::El> {
        let cf = self.cf;
        let u = ser_eval_poly(cf, &f.ut, &exp.t);
        let w = ser_eval_poly(cf, &f.wt, &exp.t);
        ser_add(cf, &u, &ser_mul(cf, &w, &exp.y))
    }

    /// Evaluate a quotient `f / d(t)` along a local expansion.
    pub fn quot_eval_ser(
        &self,
        f: &Fn2<C::El>,
        den: &[C::El],
        exp: &LocalExp<C::El>,
    ) -> Result<Ser<C::El>> {
        let num = self.fn2_eval_ser(f, exp);
        let d = ser_eval_poly(self.cf, den, &exp.t);
        ser_div(self.cf, &num, &d)
    }

    // ---------------------------------------------------------------------
    // Local expansions.
    // ---------------------------------------------------------------------

    /// Curve-equation residual along a pair of coordinate series.
    pub fn residual_ser(&self, t: &Ser<C::El>, y: &Ser<C::El>) -> Ser<C::El> {
        let cf = self.cf;
        let c = ser_eval_poly(cf, &self.rhs_poly(), t);
        let b = ser_eval_poly(cf, &self.ylin_poly(), t);
        let y2 = ser_mul(cf, y, y);
        ser_sub(cf, &ser_add(cf, &y2, &ser_mul(cf, &b, y)), &c)
    }

    /// `∂F/∂y` along coordinate series, skipping terms whose curve constant
    /// is exactly zero (so characteristic-2 models keep full windows).
    fn fy_ser(&self, t: &Ser<C::El>, y: &Ser<C::El>) -> Option<Ser<C::El>> {
        let cf = self.cf;
        let mut terms: Vec<Ser<C::El>> = Vec::new();
        let two = cf.from_int(2);
        if !cf.is_zero(&two) {
            terms.push(ser_scale(cf, y, &two));
        }
        if !cf.is_zero(self.a1()) {
            terms.push(ser_scale(cf, t, self.a1()));
        }
        if !cf.is_zero(self.a3()) {
            let len = t.len().max(y.len());
            terms.push(ser_const(cf, self.a3().clone(), len));
        }
        let mut it = terms.into_iter();
        let first = it.next()?;
        Some(it.fold(first, |acc, s| ser_add(cf, &acc, &s)))
    }

    /// `∂F/∂t` along coordinate series, with the same exact-zero skipping.
    fn ft_ser(&self, t: &Ser<C::El>, y: &Ser<C::El>) -> Option<Ser<C::El>> {
        let cf = self.cf;
        let mut terms: Vec<Ser<C::El>> = Vec::new();
        if !cf.is_zero(self.a1()) {
            terms.push(ser_scale(cf, y, self.a1()));
        }
        let three = cf.from_int(3);
        if !cf.is_zero(&three) {
            terms.push(ser_scale(cf, &ser_mul(cf, t, t), &cf.neg(&three)));
        }
        let two_a2 = cf.mul(&cf.from_int(2), self.a2());
        if !cf.is_zero(&two_a2) {
            terms.push(ser_scale(cf, t, &cf.neg(&two_a2)));
        }
        if !cf.is_zero(self.a4()) {
            let len = t.len().max(y.len());
            terms.push(ser_const(cf, cf.neg(self.a4()), len));
        }
        let mut it = terms.into_iter();
        let first = it.next()?;
        Some(it.fold(first, |acc, s| ser_add(cf, &acc, &s)))
    }

    /// Expansion at infinity in `π = t/y`, to window length `len` (the
    /// individual series windows land a few orders below `len`; pass a
    /// margin). Leading terms: `t = π⁻² + …`, `y = π⁻³ + …`, both with
    /// leading coefficient 1.
    pub fn expand_infinity(&self, len: usize) -> Result<LocalExp<C::El>> {
        let cf = self.cf;
        let one = ser_const(cf, cf.one(), len);
        let mut s = one.clone();
        let iters = len / 3 + 3;
        for _ in 0..iters {
            s = self.infinity_step(&one, &s)?;
        }
        // Contractivity check: one more step must not change the window.
        let s2 = self.infinity_step(&one, &s)?;
        if let Some(v) = ser_valuation(cf, &ser_sub(cf, &s2, &s)) {
            return Err(Error::NewtonDivergence {
                context: "infinity expansion",
                defect: v,
            });
        }
        let t = ser_shift(&s, -2);
        let y = ser_shift(&s, -3);
        let lam = self.lam_from(&t, &y)?;
        Ok(LocalExp { uni: UniKind::Pi, t, y, lam })
    }

    /// One step of the fixed-point map for the infinity expansion:
    /// `s ← 1 + a₁π − a₂π² + a₃π³/s − a₄π⁴/s − a₆π⁶/s²`.
    fn infinity_step(&self, one: &Ser<C::El>, s: &Ser<C::El>) -> Result<Ser<C::El>> {
        let cf = self.cf;
        let inv = ser_inv(cf, s)?;
        let inv2 = ser_mul(cf, &inv, &inv);
        let mut acc = one.clone();
        let mut push = |acc: &Ser<C::El>, coef: C::El, k: i64, base: Option<&Ser<C::El>>| {
            if cf.is_zero(&coef) {
                return acc.clone();
            }
            let term = match base {
                None => ser_shift(&ser_const(cf, coef, one.len()), k),
                Some(b) => ser_shift(&ser_scale(cf, b, &coef), k),
            };
            ser_add(cf, acc, &term)
        };
        acc = push(&acc, self.a1().clone(), 1, None);
        acc = push(&acc, cf.neg(self.a2()), 2, None);
        acc = push(&acc, self.a3().clone(), 3, Some(&inv));
        acc = push(&acc, cf.neg(self.a4()), 4, Some(&inv));
        acc = push(&acc, cf.neg(self.a6()), 6, Some(&inv2));
        Ok(acc)
    }

    /// `λ/du = (dt/du) / (∂F/∂y)` along an expansion; valid at every point
    /// of a smooth model (the numerator and denominator valuations cancel).
    fn lam_from(&self, t: &Ser<C::El>, y: &Ser<C::El>) -> Result<Ser<C::El>> {
        let cf = self.cf;
        let tp = ser_derivative(cf, t);
        let fy = self.fy_ser(t, y).ok_or(Error::UniformizerUnavailable)?;
        if ser_valuation(cf, &fy).is_none() {
            return Err(Error::UniformizerUnavailable);
        }
        ser_div(cf, &tp, &fy)
    }

    /// Local expansion at a point, in the canonical uniformizer for that
    /// point (see module docs), to window length `len`.
    pub fn expand_at(&self, p: &Pt<C::El>, len: usize) -> Result<LocalExp<C::El>> {
        let cf = self.cf;
        let (t0, y0) = match p {
            Pt::Inf => return self.expand_infinity(len),
            Pt::Aff(t0, y0) => (t0, y0),
        };
        let fy0 = self.fy_at(t0, y0);
        let iters = (usize::BITS - len.leading_zeros()) as usize + 2;
        let (uni, t, y) = if !cf.is_zero(&fy0) {
            // Ordinary point: u = t − t₀, solve for the y-branch.
            let mut tc = vec![cf.zero(); len];
            tc[0] = t0.clone();
            if len > 1 {
                tc[1] = cf.one();
            }
            let t = Ser { v: 0, c: tc };
            let mut y = ser_const(cf, y0.clone(), len);
            for _ in 0..iters {
                let r = self.residual_ser(&t, &y);
                if ser_valuation(cf, &r).is_none() {
                    break;
                }
                let fy = self.fy_ser(&t, &y).ok_or(Error::UniformizerUnavailable)?;
                let dy = ser_div(cf, &r, &fy)?;
                y = ser_sub(cf, &y, &dy);
            }
            (UniKind::TShift, t, y)
        } else {
            // Vertical tangent: u = y − y₀, solve for the t-branch.
            let ft0 = self.ft_at(t0, y0);
            if cf.is_zero(&ft0) {
                return Err(Error::UniformizerUnavailable);
            }
            let mut yc = vec![cf.zero(); len];
            yc[0] = y0.clone();
            if len > 1 {
                yc[1] = cf.one();
            }
            let y = Ser { v: 0, c: yc };
            let mut t = ser_const(cf, t0.clone(), len);
            for _ in 0..iters {
                let r = self.residual_ser(&t, &y);
                if ser_valuation(cf, &r).is_none() {
                    break;
                }
                let ft = self.ft_ser(&t, &y).ok_or(Error::UniformizerUnavailable)?;
                let dt = ser_div(cf, &r, &ft)?;
                t = ser_sub(cf, &t, &dt);
            }
            (UniKind::YShift, t, y)
        };
        let r = self.residual_ser(&t, &y);
        if let Some(v) = ser_valuation(cf, &r) {
            return Err(Error::NewtonDivergence { context: "local expansion", defect: v });
        }
        let lam = self.lam_from(&t, &y)?;
        Ok(LocalExp { uni, t, y, lam })
    }

    // ---------------------------------------------------------------------
    // Riemann–Roch.
    // ---------------------------------------------------------------------

    /// Basis of `L(D) = {f : div f + D ≥ 0}` for a divisor given as point
    /// multiplicity pairs (repeated points merge; an `Inf` entry carries the
    /// infinity multiplicity). Functions are returned as numerators over a
    /// common `t`-denominator, in increasing order of pole at infinity.
    pub fn rr_space(&self, divisor: &[(Pt<C::El>, i64)]) -> Result<RrBasis<C::El>> {
        let cf = self.cf;
        let mut n_inf: i64 = 0;
        let mut aff: Vec<(C::El, C::El, i64)> = Vec::new();
        for (p, n) in divisor {
            match p {
                Pt::Inf => n_inf += n,
                Pt::Aff(t0, y0) => {
                    if let Some(slot) = aff
                        .iter_mut()
                        .find(|(t, y, _)| cf.eq(t, t0) && cf.eq(y, y0))
                    {
                        slot.2 += n;
                    } else {
                        aff.push((t0.clone(), y0.clone(), *n));
                    }
                }
            }
        }
        // Common denominator: ∏ (t − t₀)^n over poles demanded at affine
        // points.
        let mut den = vec![cf.one()];
        let mut deg_den: i64 = 0;
        for (t0, _, n) in &aff {
            for _ in 0..(*n).max(0) {
                den = pv_mul(cf, &den, &[cf.neg(t0), cf.one()]);
                deg_den += 1;
            }
        }
        let m_inf = n_inf + 2 * deg_den;
        if m_inf < 0 {
            return Ok(RrBasis { numerators: vec![], den });
        }
        // Candidate numerators t^i y^j by strictly increasing infinity pole
        // order 2i + 3j (even ↔ j = 0, odd ↔ j = 1; order 1 is impossible).
        let mut cands: Vec<(usize, usize)> = Vec::new();
        for d in 0..=m_inf {
            if d % 2 == 0 {
                cands.push(((d / 2) as usize, 0));
            } else if d >= 3 {
                cands.push((((d - 3) / 2) as usize, 1));
            }
        }
        // Constraint points: the affine support plus conjugates of pole
        // points (the denominator vanishes there too).
        let mut cpts: Vec<(C::El, C::El, i64)> = aff.clone();
        for (t0, y0, n) in &aff {
            if *n <= 0 {
                continue;
            }
            let Pt::Aff(tc, yc) = self.pt_neg(&Pt::Aff(t0.clone(), y0.clone())) else {
                unreachable!()
            };
            if !cpts.iter().any(|(t, y, _)| cf.eq(t, &tc) && cf.eq(y, &yc)) {
                cpts.push((tc, yc, 0));
            }
        }
        let len = (2 * deg_den + n_inf.abs() + 6) as usize;
        let mut rows: Vec<Vec<C::El>> = Vec::new();
        for (t0, y0, n_q) in &cpts {
            let exp = self.expand_at(&Pt::Aff(t0.clone(), y0.clone()), len)?;
            let dser = ser_eval_poly(cf, &den, &exp.t);
            let v_den = ser_valuation(cf, &dser).unwrap_or(len as i64);
            let r_q = v_den - n_q;
            if r_q <= 0 {
                continue;
            }
            // Each candidate must vanish to order r_q at this point.
            let mono_sers: Vec<Ser<C::El>> = cands
                .iter()
                .map(|(i, j)| self.fn2_eval_ser(&self.fn2_monomial(*i, *j), &exp))
                .collect();
            for k in 0..r_q {
                let row: Vec<C::El> = mono_sers
                    .iter()
                    .map(|s| ser_coeff(cf, s, k).unwrap_or_else(|| cf.zero()))
                    .collect();
                rows.push(row);
            }
        }
        let combos = nullspace(cf, rows, cands.len())?;
        let numerators = combos
            .into_iter()
            .map(|combo| {
                let mut acc = self.fn2_zero();
                for (c, (i, j)) in combo.iter().zip(cands.iter()) {
                    if cf.is_zero(c) {
                        continue;
                    }
                    acc = self.fn2_add(&acc, &self.fn2_scale(&self.fn2_monomial(*i, *j), c));
                }
                acc
            })
            .collect();
        Ok(RrBasis { numerators, den })
    }
}

/// Residue of `f·λ` at the expansion's point: the coefficient of `u⁻¹` in
/// `f(u)·lam(u)`. Errors if the window does not reach that coefficient.
pub fn residue<C: Coeffs>(cf: &C, f: &Ser<C::El>, lam: &Ser<C::El>) -> Result<C::El> {
    let prod = ser_mul(cf, f, lam);
    if prod.v > -1 {
        return Ok(cf.zero());
    }
    ser_coeff(cf, &prod, -1)
        .ok_or(Error::PrecisionExhausted { needed: -1, have: prod.end() })
}

/// Lift a series with exact-field coefficients into Laurent-scalar
/// constants (embedding the coefficient field into the scalar residue
/// field along the way).
pub fn lift_ser(ctx: &ScalarCtx, src: &Fq, s: &Ser<Gf>) -> Ser<Scalar> {
    let factor = ctx.fq.embedding_from(src);
    Ser {
        v: s.v,
        c: s.c.iter().map(|c| ctx.from_gf(ctx.fq.embed(*c, factor))).collect(),
    }
}

/// Lift a whole local expansion into Laurent-scalar coefficients.
pub fn lift_exp(ctx: &ScalarCtx, src: &Fq, e: &LocalExp<Gf>) -> LocalExp<Scalar> {
    LocalExp {
        uni: e.uni,
        t: lift_ser(ctx, src, &e.t),
        y: lift_ser(ctx, src, &e.y),
        lam: lift_ser(ctx, src, &e.lam),
    }
}

/// Total multiplicity-weighted degree of a divisor over the *visible*
/// support (affine points count 1 each, infinity counts 1).
pub fn divisor_degree<El>(divisor: &[(Pt<El>, i64)]) -> i64 {
    divisor.iter().map(|(_, n)| *n).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GF_ZERO;

    fn fixture() -> Curve {
        // y² = t³ − t + 1 over F₃
        Curve::new(3, 1, [0, 0, 0, -1, 1]).unwrap()
    }

    fn smoke() -> Curve {
        // y² + y = t³ + t + 1 over F₂
        Curve::new(2, 1, [0, 0, 1, 1, 1]).unwrap()
    }

    #[test]
    fn validation_rejects_singular_models() {
        assert!(Curve::new(3, 1, [0, 0, 0, 0, 0]).is_err()); // y² = t³
        assert!(fixture().discriminant() != GF_ZERO);
        assert!(smoke().discriminant() != GF_ZERO);
    }

    #[test]
    fn group_law_is_a_group_of_order_seven() {
        let curve = fixture();
        let pts = curve.points_over(&curve.base);
        assert_eq!(pts.len(), 7);
        let ops = curve.ops_base();
        for p in &pts {
            ops.require_on_curve(p).unwrap();
            // Inverse law.
            let s = ops.pt_add(p, &ops.pt_neg(p)).unwrap();
            assert!(s.is_inf());
            // Lagrange: 7·P = ∞.
            assert!(ops.pt_mul(p, 7).unwrap().is_inf());
        }
        // Full associativity over all triples.
        for p in &pts {
            for q in &pts {
                for r in &pts {
                    let lhs = ops.pt_add(&ops.pt_add(p, q).unwrap(), r).unwrap();
                    let rhs = ops.pt_add(p, &ops.pt_add(q, r).unwrap()).unwrap();
                    assert!(ops.pt_eq(&lhs, &rhs));
                }
            }
        }
    }

    #[test]
    fn point_counts_match_the_zeta_tower() {
        let curve = fixture();
        let expect = [7usize, 7, 28, 91, 217, 784];
        for (k, want) in expect.iter().enumerate() {
            let ext = Fq::new(3, (k + 1) as u32);
            assert_eq!(curve.points_over(&ext).len(), *want, "k = {}", k + 1);
        }
        let sm = smoke();
        assert_eq!(sm.points_over(&sm.base).len(), 1);
    }

    #[test]
    fn infinity_expansion_satisfies_the_curve() {
        for curve in [fixture(), smoke()] {
            let ops = curve.ops_base();
            let exp = ops.expand_infinity(40).unwrap();
            assert_eq!(exp.t.v, -2);
            assert_eq!(exp.y.v, -3);
            let f = &*curve.base;
            // Residual vanishes through the window.
            let r = ops.residual_ser(&exp.t, &exp.y);
            assert!(ser_valuation(f, &r).is_none(), "residual {:?}", r);
            // π = t/y exactly.
            let pi = ser_div(f, &exp.t, &exp.y).unwrap();
            assert_eq!(ser_valuation(f, &pi), Some(1));
            let one = ser_coeff(f, &pi, 1).unwrap();
            assert_eq!(one, 0);
            for k in 2..pi.end() {
                assert_eq!(ser_coeff(f, &pi, k), Some(GF_ZERO), "π tail at {k}");
            }
            // λ is holomorphic and non-vanishing at infinity.
            assert_eq!(ser_valuation(f, &exp.lam), Some(0));
            let lead = ser_coeff(f, &exp.lam, 0).unwrap();
            let want = if curve.p == 2 { f.from_int(1) } else { f.from_int(-1) };
            assert_eq!(lead, want);
        }
    }

    #[test]
    fn affine_expansions_and_residue_theorem() {
        let curve = fixture();
        let ops = curve.ops_base();
        let f = &*curve.base;
        let pts = curve.points_over(&curve.base);
        let Pt::Aff(t0, y0) = pts[1].clone() else { panic!() };
        let exp = ops.expand_at(&pts[1], 24).unwrap();
        assert_eq!(exp.uni, UniKind::TShift);
        assert_eq!(ser_valuation(f, &exp.lam), Some(0));

        // Residue theorem for 1/(t − t₀): poles at P and its conjugate only.
        let inv_t = |e: &LocalExp<Gf>| {
            let shifted = ser_sub(f, &e.t, &ser_const(f, t0, e.t.len()));
            ser_inv(f, &shifted).unwrap()
        };
        let conj = ops.pt_neg(&pts[1]);
        assert!(!ops.pt_eq(&conj, &pts[1]), "test point must not be 2-torsion");
        let exp_c = ops.expand_at(&conj, 24).unwrap();
        let r1 = residue(f, &inv_t(&exp), &exp.lam).unwrap();
        let r2 = residue(f, &inv_t(&exp_c), &exp_c.lam).unwrap();
        assert_eq!(f.add(r1, r2), GF_ZERO);
        assert!(r1 != GF_ZERO);

        // t·λ and y·λ only have poles at infinity, so their residues there
        // vanish.
        let inf = ops.expand_infinity(30).unwrap();
        let rt = residue(f, &inf.t, &inf.lam).unwrap();
        let ry = residue(f, &inf.y, &inf.lam).unwrap();
        assert_eq!(rt, GF_ZERO);
        assert_eq!(ry, GF_ZERO);
        let _ = y0;
    }

    #[test]
    fn two_torsion_expansion_uses_the_vertical_chart() {
        // Over F₂₇ the fixture acquires 2-torsion (y = 0, t³ − t + 1 = 0).
        let curve = fixture();
        let ext = Fq::new(3, 3);
        let ops = curve.ops_in(&ext);
        let pts = curve.points_over(&ext);
        let two_tor: Vec<_> = pts
            .iter()
            .filter(|p| match p {
                Pt::Aff(t, y) => ops.cf.is_zero(&ops.fy_at(t, y)) && *y == GF_ZERO,
                Pt::Inf => false,
            })
            .collect();
        assert_eq!(two_tor.len(), 3);
        for p in two_tor {
            let exp = ops.expand_at(p, 24).unwrap();
            assert_eq!(exp.uni, UniKind::YShift);
            let f = &*ext;
            assert!(ser_valuation(f, &ops.residual_ser(&exp.t, &exp.y)).is_none());
            // λ stays holomorphic and non-vanishing in the vertical chart.
            assert_eq!(ser_valuation(f, &exp.lam), Some(0));
            // t − t₀ vanishes to order exactly 2.
            let Pt::Aff(t0, _) = p else { unreachable!() };
            let shifted = ser_sub(f, &exp.t, &ser_const(f, *t0, exp.t.len()));
            assert_eq!(ser_valuation(f, &shifted), Some(2));
        }
    }

    #[test]
    fn riemann_roch_dimensions() {
        let curve = fixture();
        let ops = curve.ops_base();
        let f = &*curve.base;
        // L(n·∞) has dimension n for n ≥ 1 on a genus-1 curve.
        for n in 1..=6i64 {
            let basis = ops.rr_space(&[(Pt::Inf, n)]).unwrap();
            assert_eq!(basis.numerators.len(), n as usize, "dim L({n}∞)");
        }
        // deg-0 and negative divisors.
        assert_eq!(ops.rr_space(&[(Pt::Inf, 0)]).unwrap().numerators.len(), 1);
        assert_eq!(ops.rr_space(&[(Pt::Inf, -1)]).unwrap().numerators.len(), 0);

        let pts = curve.points_over(&curve.base);
        let p = pts[1].clone();
        // L(P + ∞): dimension 2.
        let b = ops.rr_space(&[(p.clone(), 1), (Pt::Inf, 1)]).unwrap();
        assert_eq!(b.numerators.len(), 2);
        // L(2P): dimension 2; members really do stay regular off P and ∞…
        let b2 = ops.rr_space(&[(p.clone(), 2)]).unwrap();
        assert_eq!(b2.numerators.len(), 2);
        for num in &b2.numerators {
            // …and have pole order ≤ 2 at P:
            let exp = ops.expand_at(&p, 16).unwrap();
            let q = ops.quot_eval_ser(num, &b2.den, &exp).unwrap();
            if let Some(v) = ser_valuation(f, &q) {
                assert!(v >= -2, "pole too deep: {v}");
            }
            // …and no pole at the conjugate beyond what D allows (coefficient
            // 0 there):
            let exp_c = ops.expand_at(&ops.pt_neg(&p), 16).unwrap();
            let qc = ops.quot_eval_ser(num, &b2.den, &exp_c).unwrap();
            if let Some(v) = ser_valuation(f, &qc) {
                assert!(v >= 0, "unexpected pole at conjugate: {v}");
            }
        }
    }

    #[test]
    fn scalar_coefficients_reproduce_the_exact_group_law() {
        use crate::series::ScalarCtx;
        let curve = fixture();
        let ctx = ScalarCtx::new(Fq::new(3, 1), 3, 1, 18, 64);
        let sops = curve.ops_scalar(&ctx);
        let ops = curve.ops_base();
        let pts = curve.points_over(&curve.base);
        let lift = |p: &Pt<Gf>| match p {
            Pt::Inf => Pt::Inf,
            Pt::Aff(t, y) => Pt::Aff(ctx.from_gf(*t), ctx.from_gf(*y)),
        };
        for p in &pts {
            for q in &pts {
                let exact = ops.pt_add(p, q).unwrap();
                let analytic = sops.pt_add(&lift(p), &lift(q)).unwrap();
                match (&exact, &analytic) {
                    (Pt::Inf, Pt::Inf) => {}
                    (Pt::Aff(t, y), Pt::Aff(ts, ys)) => {
                        assert!(ctx.is_apparent_zero(&ctx.sub(ts, &ctx.from_gf(*t))));
                        assert!(ctx.is_apparent_zero(&ctx.sub(ys, &ctx.from_gf(*y))));
                    }
                    _ => panic!("group law mismatch"),
                }
            }
        }
        // The infinity expansion over scalar coefficients matches the lifted
        // exact expansion.
        let exact_exp = ops.expand_infinity(20).unwrap();
        let lifted = lift_exp(&ctx, &curve.base, &exact_exp);
        let scalar_exp = sops.expand_infinity(20).unwrap();
        let d = ser_sub(&ctx, &scalar_exp.t, &lifted.t);
        assert!(ser_valuation(&ctx, &d).is_none());
    }
}
