//! The ideal lattice of the affine coordinate ring.
//!
//! Nonzero ideals of `A = F_q[t][y]/(curve)` are free rank-2 modules over
//! `F_q[t]`; each is kept in Hermite normal form
//!
//! ```text
//!   I = a(t)·F_q[t] ⊕ (b(t) + c(t)·y)·F_q[t]
//! ```
//!
//! with `a, c` monic, `c | a`, `c | b`, `deg b < deg a`, and the closure
//! condition `(a/c) | C − b′² + (a₁t + a₃)b′` (writing `b = c·b′`,
//! `C = t³ + a₂t² + a₄t + a₆`) that makes the module stable under
//! multiplication by `y`. The normal form is canonical, so ideal equality
//! is representation equality.
//!
//! Degree here is the F_q-codimension: `deg I = deg a + deg c`. Primes are
//! built from Frobenius orbits of affine points; class-group data flows
//! through the bijection between ideal classes and points of the curve,
//! with an independent principality test by bounded-degree generator
//! search.

use crate::curve::{Curve, Pt};
use crate::error::{Error, Result};
use crate::field::{Fq, FqRef, Gf, GF_ZERO};
use crate::kexact::{lift_poly, KCtx};
use crate::poly::{self, Poly};
use crate::series::{Scalar, ScalarCtx};

/// An ideal in Hermite normal form (see module docs).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ideal {
    pub a: Poly,
    pub b: Poly,
    pub c: Poly,
}

/// A prime ideal together with the closed point that defines it: an orbit
/// representative with coordinates in the degree-matching extension field.
#[derive(Debug, Clone)]
pub struct PrimeData {
    pub ideal: Ideal,
    pub deg: i64,
    /// Residue field `F_{q^deg}`.
    pub field: FqRef,
    /// Orbit representative `(t₀, y₀)` in `field`.
    pub point: (Gf, Gf),
}

/// All primes up to a degree cutoff, indexed by degree.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    pub cutoff: i64,
    /// `by_degree[d]` lists the primes of degree `d` (index 0 unused).
    pub by_degree: Vec<Vec<PrimeData>>,
}

/// Context for ideal arithmetic over a fixed curve.
#[derive(Debug, Clone)]
pub struct IdealCtx {
    pub kc: KCtx,
    /// `C(t) = t³ + a₂t² + a₄t + a₆`.
    pub rhs: Poly,
    /// `B(t) = a₁t + a₃`.
    pub ylin: Poly,
    /// Class number `h = |X(F_q)|`.
    pub h: u64,
}

impl IdealCtx {
    pub fn new(curve: Curve) -> Self {
        let [a1, a2, a3, a4, a6] = curve.a;
        let mut rhs = vec![a6, a4, a2, 0];
        poly::trim(&mut rhs);
        let mut ylin = vec![a3, a1];
        poly::trim(&mut ylin);
        let h = curve.h();
        IdealCtx { kc: KCtx::new(curve), rhs, ylin, h }
    }

    pub fn fq(&self) -> &Fq {
        &self.kc.curve.base
    }

    pub fn curve(&self) -> &Curve {
        &self.kc.curve
    }

    /// The unit ideal `A`.
    pub fn one(&self) -> Ideal {
        Ideal { a: poly::one(), b: vec![], c: poly::one() }
    }

    pub fn is_one(&self, i: &Ideal) -> bool {
        *i == self.one()
    }

    pub fn degree(&self, i: &Ideal) -> i64 {
        poly::degree(&i.a) + poly::degree(&i.c)
    }

    /// Check every normal-form invariant, including `y`-stability.
    pub fn is_valid(&self, i: &Ideal) -> bool {
        let f = self.fq();
        if poly::is_zero(&i.a) || poly::is_zero(&i.c) {
            return false;
        }
        if poly::lead(&i.a) != 0 || poly::lead(&i.c) != 0 {
            return false;
        }
        if !poly::divides(f, &i.c, &i.a) || !(poly::is_zero(&i.b) || poly::divides(f, &i.c, &i.b))
        {
            return false;
        }
        if poly::degree(&i.b) >= poly::degree(&i.a) && !poly::is_zero(&i.b) {
            return false;
        }
        let ap = poly::div_exact(f, &i.a, &i.c);
        let bp = if poly::is_zero(&i.b) { vec![] } else { poly::div_exact(f, &i.b, &i.c) };
        let crit = poly::add(
            f,
            &poly::sub(f, &self.rhs, &poly::mul(f, &bp, &bp)),
            &poly::mul(f, &self.ylin, &bp),
        );
        poly::divides(f, &ap, &crit)
    }

    // ------------------------------------------------------------------
    // Hermite normal form.
    // ------------------------------------------------------------------

    /// Canonical Hermite form of the `F_q[t]`-span of `(u, w)` pairs
    /// (meaning `u + w·y`). The span must be `y`-stable and of full rank;
    /// use [`IdealCtx::ideal_from_gens`] for spans that still need the
    /// `y`-closure added.
    fn module_hnf(&self, gens: &[(Poly, Poly)]) -> Result<Ideal> {
        let f = self.fq();
        let mut a_acc: Poly = vec![];
        let mut b: Poly = vec![];
        let mut c: Poly = vec![];
        for (u, w) in gens {
            if poly::is_zero(w) {
                a_acc = poly::gcd(f, &a_acc, u);
                continue;
            }
            if poly::is_zero(&c) {
                b = u.clone();
                c = poly::make_monic(f, w);
                let linv = f.inv(poly::lead(w));
                b = poly::scale(f, &b, linv);
                continue;
            }
            let (g, s, x) = poly::xgcd(f, &c, w);
            let nb = poly::add(f, &poly::mul(f, &s, &b), &poly::mul(f, &x, u));
            let c_over = poly::div_exact(f, &c, &g);
            let w_over = poly::div_exact(f, w, &g);
            // The two eliminated directions fold into the t-only part.
            let res_old = poly::sub(f, &b, &poly::mul(f, &c_over, &nb));
            let res_new = poly::sub(f, u, &poly::mul(f, &w_over, &nb));
            a_acc = poly::gcd(f, &a_acc, &res_old);
            a_acc = poly::gcd(f, &a_acc, &res_new);
            b = nb;
            c = g;
        }
        if poly::is_zero(&c) || poly::is_zero(&a_acc) {
            return Err(Error::ZeroIdeal);
        }
        let a = poly::make_monic(f, &a_acc);
        let b = poly::rem(f, &b, &a);
        let out = Ideal { a, b, c };
        debug_assert!(self.is_valid(&out), "HNF violated ideal invariants: {out:?}");
        Ok(out)
    }

    /// Ideal generated (over `A`) by elements `u + w·y`.
    pub fn ideal_from_gens(&self, gens: &[(Poly, Poly)]) -> Result<Ideal> {
        let f = self.fq();
        let mut ext: Vec<(Poly, Poly)> = Vec::with_capacity(2 * gens.len());
        for (u, w) in gens {
            ext.push((u.clone(), w.clone()));
            // y·(u + wy) = wC + (u − wB)·y
            ext.push((
                poly::mul(f, w, &self.rhs),
                poly::sub(f, u, &poly::mul(f, w, &self.ylin)),
            ));
        }
        self.module_hnf(&ext)
    }

    /// Principal ideal `(u + w·y)`.
    pub fn principal_from(&self, u: &[Gf], w: &[Gf]) -> Result<Ideal> {
        if poly::is_zero(u) && poly::is_zero(w) {
            return Err(Error::ZeroIdeal);
        }
        self.ideal_from_gens(&[(u.to_vec(), w.to_vec())])
    }

    // ------------------------------------------------------------------
    // Arithmetic.
    // ------------------------------------------------------------------

    /// Membership of `u + w·y`.
    pub fn member(&self, i: &Ideal, u: &[Gf], w: &[Gf]) -> bool {
        let f = self.fq();
        if !poly::divides(f, &i.c, w) {
            return false;
        }
        let wp = if poly::is_zero(w) { vec![] } else { poly::div_exact(f, w, &i.c) };
        let res = poly::sub(f, u, &poly::mul(f, &wp, &i.b));
        poly::divides(f, &i.a, &res)
    }

    /// Does `p` divide `i` (equivalently `i ⊆ p`)?
    pub fn divides_ideal(&self, p: &Ideal, i: &Ideal) -> bool {
        self.member(p, &i.a, &[]) && self.member(p, &i.b, &i.c)
    }

    pub fn mul(&self, i: &Ideal, j: &Ideal) -> Ideal {
        let f = self.fq();
        let mut gens: Vec<(Poly, Poly)> = Vec::with_capacity(4);
        gens.push((poly::mul(f, &i.a, &j.a), vec![]));
        gens.push((poly::mul(f, &i.a, &j.b), poly::mul(f, &i.a, &j.c)));
        gens.push((poly::mul(f, &i.b, &j.a), poly::mul(f, &i.c, &j.a)));
        // (b₁ + c₁y)(b₂ + c₂y) with y² = C − B·y.
        let cc = poly::mul(f, &i.c, &j.c);
        let u = poly::add(f, &poly::mul(f, &i.b, &j.b), &poly::mul(f, &cc, &self.rhs));
        let w = poly::sub(
            f,
            &poly::add(f, &poly::mul(f, &i.b, &j.c), &poly::mul(f, &i.c, &j.b)),
            &poly::mul(f, &cc, &self.ylin),
        );
        gens.push((u, w));
        // Products of ideals are y-stable as plain module spans.
        self.module_hnf(&gens).expect("product of nonzero ideals is nonzero")
    }

    pub fn pow(&self, i: &Ideal, n: u32) -> Ideal {
        let mut acc = self.one();
        for _ in 0..n {
            acc = self.mul(&acc, i);
        }
        acc
    }

    /// Hyperelliptic conjugate `Ī` (image under `y ↦ −y − a₁t − a₃`).
    pub fn conj(&self, i: &Ideal) -> Ideal {
        let f = self.fq();
        let shifted = poly::sub(f, &i.b, &poly::mul(f, &i.c, &self.ylin));
        self.module_hnf(&[
            (i.a.clone(), vec![]),
            (shifted, poly::neg(f, &i.c)),
        ])
        .expect("conjugate of nonzero ideal is nonzero")
    }

    /// Exact quotient `i / p` for a divisor `p` of `i`, via `i·p̄ = n·(i/p)`
    /// with `n = a_p·c_p` the norm polynomial.
    pub fn divide_exact(&self, i: &Ideal, p: &Ideal) -> Ideal {
        let f = self.fq();
        let prod = self.mul(i, &self.conj(p));
        let n = poly::mul(f, &p.a, &p.c);
        Ideal {
            a: poly::div_exact(f, &prod.a, &n),
            b: poly::div_exact(f, &prod.b, &n),
            c: poly::div_exact(f, &prod.c, &n),
        }
    }

    // ------------------------------------------------------------------
    // Enumeration.
    // ------------------------------------------------------------------

    /// All ideals of exact degree `d`, in a deterministic order.
    pub fn enumerate(&self, d: i64) -> Vec<Ideal> {
        let f = self.fq();
        let mut out = Vec::new();
        if d < 0 {
            return out;
        }
        if d == 0 {
            out.push(self.one());
            return out;
        }
        for k in 0..=(d / 2) {
            let ap_deg = (d - 2 * k) as usize;
            for c in monic_polys(f, k as usize) {
                for ap in monic_polys(f, ap_deg) {
                    for bp in polys_below(f, ap_deg) {
                        let crit = poly::add(
                            f,
                            &poly::sub(f, &self.rhs, &poly::mul(f, &bp, &bp)),
                            &poly::mul(f, &self.ylin, &bp),
                        );
                        if !poly::divides(f, &ap, &crit) {
                            continue;
                        }
                        let a = poly::mul(f, &c, &ap);
                        let b = poly::mul(f, &c, &bp);
                        let ideal = Ideal { a, b, c: c.clone() };
                        debug_assert!(self.is_valid(&ideal));
                        out.push(ideal);
                    }
                }
            }
        }
        out
    }

    /// Primes of all degrees `1..=cutoff`, from Frobenius orbits of affine
    /// points.
    pub fn primes_up_to(&self, cutoff: i64) -> Result<PrimeTable> {
        let base = self.fq();
        let mut by_degree: Vec<Vec<PrimeData>> = vec![vec![]];
        for d in 1..=cutoff {
            let ext = Fq::new(base.p, base.k * d as u32);
            let pts = self.curve().points_over(&ext);
            let mut reps: Vec<(Gf, Gf)> = Vec::new();
            for p in &pts {
                let Pt::Aff(t0, y0) = p else { continue };
                // Walk the q-power Frobenius orbit; keep degree-d minimal
                // representatives only.
                let (mut t, mut y) = (*t0, *y0);
                let mut size = 0usize;
                let mut min_key = (u64::MAX, u64::MAX);
                loop {
                    let key = (ext.packed(t), ext.packed(y));
                    min_key = min_key.min(key);
                    t = ext.frob(t, base.k);
                    y = ext.frob(y, base.k);
                    size += 1;
                    if (t, y) == (*t0, *y0) {
                        break;
                    }
                }
                if size != d as usize {
                    continue;
                }
                if (ext.packed(*t0), ext.packed(*y0)) == min_key {
                    reps.push((*t0, *y0));
                }
            }
            reps.sort_by_key(|(t, y)| (ext.packed(*t), ext.packed(*y)));
            let mut primes = Vec::with_capacity(reps.len());
            for (t0, y0) in reps {
                let ideal = self.prime_from_point(&ext, t0, y0, d)?;
                debug_assert_eq!(self.degree(&ideal), d);
                primes.push(PrimeData { ideal, deg: d, field: ext.clone(), point: (t0, y0) });
            }
            by_degree.push(primes);
        }
        Ok(PrimeTable { cutoff, by_degree })
    }

    /// The vanishing ideal of a closed point, by linear algebra on the
    /// evaluation map over candidate monomials `t^i, t^i·y` of `t`-degree
    /// at most `d`.
    fn prime_from_point(&self, ext: &FqRef, t0: Gf, y0: Gf, d: i64) -> Result<Ideal> {
        let base = self.fq();
        if base.k != 1 {
            return Err(Error::ConfigInvalid {
                reason: "prime construction requires a prime base field".into(),
            });
        }
        let n = d as usize + 1;
        // Column j < n: t^j; column n + j: t^j·y. Values in F_{q^d} split
        // into d base-field digits, one row each.
        let mut cols: Vec<Gf> = Vec::with_capacity(2 * n);
        let mut tp = 0; // 1
        for _ in 0..n {
            cols.push(tp);
            tp = ext.mul(tp, t0);
        }
        let mut ty = y0;
        for _ in 0..n {
            cols.push(ty);
            ty = ext.mul(ty, t0);
        }
        let digits = ext.k as usize;
        let p64 = base.p as u64;
        let mut rows = vec![vec![GF_ZERO; 2 * n]; digits];
        for (j, v) in cols.iter().enumerate() {
            if *v == GF_ZERO {
                continue;
            }
            let mut packed = ext.packed(*v);
            for row in rows.iter_mut() {
                let digit = (packed % p64) as i64;
                packed /= p64;
                row[j] = base.from_int(digit);
            }
        }
        let kernel = crate::coeffs::nullspace(base, rows, 2 * n)?;
        let gens: Vec<(Poly, Poly)> = kernel
            .into_iter()
            .map(|v| {
                let mut u = v[..n].to_vec();
                let mut w = v[n..].to_vec();
                poly::trim(&mut u);
                poly::trim(&mut w);
                (u, w)
            })
            .collect();
        self.ideal_from_gens(&gens)
    }

    /// Factor into primes from the table; errors with
    /// [`Error::FactorizationIncomplete`] if a cofactor survives past the
    /// cutoff.
    pub fn factor(&self, i: &Ideal, table: &PrimeTable) -> Result<Vec<(PrimeData, u32)>> {
        let mut rem = i.clone();
        let mut out = Vec::new();
        for d in 1..=table.cutoff {
            if self.is_one(&rem) {
                break;
            }
            for p in &table.by_degree[d as usize] {
                let mut mult = 0u32;
                while self.divides_ideal(&p.ideal, &rem) {
                    rem = self.divide_exact(&rem, &p.ideal);
                    mult += 1;
                }
                if mult > 0 {
                    out.push((p.clone(), mult));
                }
            }
        }
        if !self.is_one(&rem) {
            return Err(Error::FactorizationIncomplete { degree: self.degree(&rem) });
        }
        Ok(out)
    }

    // ------------------------------------------------------------------
    // Class group.
    // ------------------------------------------------------------------

    /// The point of `X(F_q)` classifying a prime: the group-law sum of its
    /// Frobenius orbit (Galois-stable, hence rational over the base).
    pub fn prime_class(&self, p: &PrimeData) -> Pt<Gf> {
        let ext = &p.field;
        let ops = self.curve().ops_in(ext);
        let base_k = self.fq().k;
        let mut acc = Pt::Inf;
        let (mut t, mut y) = p.point;
        for _ in 0..p.deg {
            acc = ops.pt_add(&acc, &Pt::Aff(t, y)).expect("orbit sum");
            t = ext.frob(t, base_k);
            y = ext.frob(y, base_k);
        }
        let factor = ext.embedding_from(self.fq());
        match acc {
            Pt::Inf => Pt::Inf,
            Pt::Aff(tt, yy) => {
                let tb = ext.unembed(tt, self.fq(), factor).expect("class is rational");
                let yb = ext.unembed(yy, self.fq(), factor).expect("class is rational");
                Pt::Aff(tb, yb)
            }
        }
    }

    /// Class of an arbitrary ideal (additive over factorization).
    pub fn class_of(&self, i: &Ideal, table: &PrimeTable) -> Result<Pt<Gf>> {
        let ops = self.curve().ops_base();
        let mut acc = Pt::Inf;
        for (p, mult) in self.factor(i, table)? {
            let cls = self.prime_class(&p);
            let scaled = ops.pt_mul(&cls, mult as i64).expect("class multiple");
            acc = ops.pt_add(&acc, &scaled).expect("class sum");
        }
        Ok(acc)
    }

    /// Independent principality check: search for a generator among the
    /// elements of `I` with infinity-degree at most `deg I`. The solution
    /// space has dimension 1 exactly when `I` is principal (the generator,
    /// up to constants), and 0 otherwise. Returns a sign-normalized
    /// generator `(u, w)` when one exists.
    pub fn principal_generator(&self, i: &Ideal) -> Option<(Poly, Poly)> {
        let f = self.fq();
        let dd = self.degree(i);
        let da = poly::degree(&i.a);
        let dc = poly::degree(&i.c);
        // x = f·a + g·(b + c·y); generous coefficient budgets, with linear
        // constraints killing every coefficient that would push the
        // infinity-degree past deg I.
        let fdeg = (dd + 2) as usize;
        let gdeg = (dd + 2) as usize;
        let ncols = fdeg + gdeg + 2;
        let u_cap = dd / 2; // max allowed t-degree of the t-part
        let w_cap = if dd >= 3 { (dd - 3) / 2 } else { -1 };
        let u_len = (fdeg as i64 + da + 2) as usize;
        let w_len = (gdeg as i64 + dc + 2) as usize;
        let mut rows: Vec<Vec<Gf>> = Vec::new();
        // Row per forbidden coefficient of u = f·a + g·b.
        for j in (u_cap + 1)..(u_len as i64) {
            let mut row = vec![GF_ZERO; ncols];
            for (fi, slot) in row.iter_mut().take(fdeg + 1).enumerate() {
                let need = j - fi as i64;
                if need >= 0 && (need as usize) < i.a.len() {
                    *slot = i.a[need as usize];
                }
            }
            for gi in 0..=gdeg {
                let need = j - gi as i64;
                if need >= 0 && (need as usize) < i.b.len() {
                    row[fdeg + 1 + gi] = i.b[need as usize];
                }
            }
            rows.push(row);
        }
        // Row per forbidden coefficient of w = g·c.
        for j in (w_cap + 1)..(w_len as i64) {
            let mut row = vec![GF_ZERO; ncols];
            for gi in 0..=gdeg {
                let need = j - gi as i64;
                if need >= 0 && (need as usize) < i.c.len() {
                    row[fdeg + 1 + gi] = i.c[need as usize];
                }
            }
            if row.iter().any(|x| *x != GF_ZERO) {
                rows.push(row);
            }
        }
        let kernel = crate::coeffs::nullspace(f, rows, ncols).ok()?;
        debug_assert!(kernel.len() <= 1, "generator space dimension {}", kernel.len());
        let combo = kernel.first()?;
        let fpol: Poly = {
            let mut v = combo[..=fdeg].to_vec();
            poly::trim(&mut v);
            v
        };
        let gpol: Poly = {
            let mut v = combo[fdeg + 1..].to_vec();
            poly::trim(&mut v);
            v
        };
        let mut u = poly::add(f, &poly::mul(f, &fpol, &i.a), &poly::mul(f, &gpol, &i.b));
        let mut w = poly::mul(f, &gpol, &i.c);
        // Sign-normalize: leading coefficient of the arm that attains the
        // infinity-degree becomes 1.
        let du = 2 * poly::degree(&u);
        let dw = 3 + 2 * poly::degree(&w);
        let lead = if du >= dw && !poly::is_zero(&u) { poly::lead(&u) } else { poly::lead(&w) };
        if lead != GF_ZERO && lead != 0 {
            let linv = f.inv(lead);
            u = poly::scale(f, &u, linv);
            w = poly::scale(f, &w, linv);
        }
        Some((u, w))
    }

    // ------------------------------------------------------------------
    // Goss brackets.
    // ------------------------------------------------------------------

    /// The one-unit part `⟨I⟩ ∈ F_q((π))` of an ideal: the `h`-th root of
    /// the sign-normalized generator of `I^h`, evaluated at infinity. The
    /// full bracket is `[I] = ⟨I⟩·π^{−deg I}`.
    pub fn goss_unit(
        &self,
        ctx: &ScalarCtx,
        theta: &Scalar,
        eta: &Scalar,
        i: &Ideal,
    ) -> Result<Scalar> {
        let ih = self.pow(i, self.h as u32);
        let (u, w) = self
            .principal_generator(&ih)
            .ok_or(Error::SingularLinearSystem { context: "goss bracket: I^h generator" })?;
        let lifted_u = lift_poly(ctx, self.fq(), &u);
        let lifted_w = lift_poly(ctx, self.fq(), &w);
        let uval = crate::coeffs::pv_eval(ctx, &lifted_u, theta);
        let wval = crate::coeffs::pv_eval(ctx, &lifted_w, theta);
        let val = ctx.add(&uval, &ctx.mul(&wval, eta));
        let want = -(self.h as i64) * self.degree(i);
        let Some((v, e)) = ctx.valuation(&val) else {
            return Err(Error::PrecisionExhausted { needed: want, have: 0 });
        };
        if e != 1 || v != want {
            return Err(Error::NotOneUnit { val: v, e });
        }
        let lead = ctx.lead(&val).expect("nonzero leading coefficient");
        let unit = ctx.shift_pi(&ctx.mul_gf(&val, ctx.fq.inv(lead)), -want);
        ctx.unit_root(&unit, self.h)
    }

    /// The bracket `[I] = ⟨I⟩·π^{−deg I}`.
    pub fn goss_bracket(
        &self,
        ctx: &ScalarCtx,
        theta: &Scalar,
        eta: &Scalar,
        i: &Ideal,
    ) -> Result<Scalar> {
        let unit = self.goss_unit(ctx, theta, eta, i)?;
        Ok(ctx.shift_pi(&unit, -self.degree(i)))
    }
}

/// All monic polynomials of exact degree `deg`, in a deterministic order.
pub fn monic_polys(f: &Fq, deg: usize) -> Vec<Poly> {
    let elems: Vec<Gf> = f.elements().collect();
    let q = elems.len();
    let mut out = Vec::with_capacity(q.pow(deg as u32));
    let mut idx = vec![0usize; deg];
    loop {
        let mut p: Poly = idx.iter().map(|i| elems[*i]).collect();
        p.push(0); // monic leading 1
        poly::trim(&mut p);
        out.push(p);
        // increment mixed-radix counter
        let mut pos = 0;
        loop {
            if pos == deg {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < q {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// All polynomials of degree `< len` (including zero), deterministically.
pub fn polys_below(f: &Fq, len: usize) -> Vec<Poly> {
    let elems: Vec<Gf> = f.elements().collect();
    let q = elems.len();
    let mut out = Vec::with_capacity(q.pow(len as u32));
    let mut idx = vec![0usize; len];
    loop {
        let mut p: Poly = idx.iter().map(|i| elems[*i]).collect();
        poly::trim(&mut p);
        out.push(p);
        let mut pos = 0;
        loop {
            if pos == len {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < q {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kexact::theta_eta;

    fn fixture() -> IdealCtx {
        IdealCtx::new(Curve::new(3, 1, [0, 0, 0, -1, 1]).unwrap())
    }

    fn smoke() -> IdealCtx {
        IdealCtx::new(Curve::new(2, 1, [0, 0, 1, 1, 1]).unwrap())
    }

    #[test]
    fn principal_ideals_have_expected_normal_forms() {
        let ic = fixture();
        let f = ic.fq();
        // (y): a = C(t), b = 0, c = 1, degree 3 = −v_∞(y).
        let iy = ic.principal_from(&[], &poly::one()).unwrap();
        assert_eq!(iy.a, ic.rhs);
        assert!(poly::is_zero(&iy.b));
        assert_eq!(iy.c, poly::one());
        assert_eq!(ic.degree(&iy), 3);
        // (t): a = t, c = t, b = 0, degree 2 = −v_∞(t).
        let it = ic.principal_from(&poly::x(), &[]).unwrap();
        assert_eq!(it.a, poly::x());
        assert_eq!(it.c, poly::x());
        assert_eq!(ic.degree(&it), 2);
        // Unit ideal from a constant.
        let one = ic.principal_from(&poly::constant(f.from_int(2)), &[]).unwrap();
        assert!(ic.is_one(&one));
    }

    #[test]
    fn enumeration_counts_match_the_zeta_function() {
        // #ideals of degree d = coefficient of u^d in P(u)/(1 − q·u).
        let ic = fixture();
        for (d, want) in [(1, 6usize), (2, 21), (3, 63), (4, 189)] {
            let ideals = ic.enumerate(d);
            assert_eq!(ideals.len(), want, "degree {d}");
            for i in &ideals {
                assert!(ic.is_valid(i));
                assert_eq!(ic.degree(i), d);
            }
        }
        let sm = smoke();
        for (d, want) in [(1, 0usize), (2, 2), (3, 4), (4, 8), (5, 16)] {
            assert_eq!(sm.enumerate(d).len(), want, "smoke degree {d}");
        }
    }

    #[test]
    fn prime_counts_follow_point_counts() {
        let ic = fixture();
        let table = ic.primes_up_to(6).unwrap();
        let got: Vec<usize> = (1..=6).map(|d| table.by_degree[d].len()).collect();
        assert_eq!(got, vec![6, 0, 7, 21, 42, 126]);
        for d in 1..=6 {
            for p in &table.by_degree[d] {
                assert!(ic.is_valid(&p.ideal));
                assert_eq!(ic.degree(&p.ideal), d as i64);
            }
        }
        let sm = smoke();
        let st = sm.primes_up_to(4).unwrap();
        let got: Vec<usize> = (1..=4).map(|d| st.by_degree[d].len()).collect();
        assert_eq!(got, vec![0, 2, 4, 5]);
    }

    #[test]
    fn norm_identity_and_degree_additivity() {
        let ic = fixture();
        let f = ic.fq();
        let mut all = Vec::new();
        for d in 1..=3 {
            all.extend(ic.enumerate(d));
        }
        for i in &all {
            // I·Ī = (a·c).
            let prod = ic.mul(i, &ic.conj(i));
            let n = poly::mul(f, &i.a, &i.c);
            let principal = ic.principal_from(&n, &[]).unwrap();
            assert_eq!(prod, principal, "norm identity for {i:?}");
        }
        // Degree additivity on a sample of products.
        for i in all.iter().take(8) {
            for j in all.iter().rev().take(8) {
                let p = ic.mul(i, j);
                assert_eq!(ic.degree(&p), ic.degree(i) + ic.degree(j));
                assert_eq!(p, ic.mul(j, i));
            }
        }
    }

    #[test]
    fn factorization_roundtrip() {
        let ic = fixture();
        let table = ic.primes_up_to(4).unwrap();
        let mut all = Vec::new();
        for d in 1..=4 {
            all.extend(ic.enumerate(d));
        }
        for i in &all {
            let factors = ic.factor(i, &table).unwrap();
            let mut back = ic.one();
            for (p, m) in &factors {
                back = ic.mul(&back, &ic.pow(&p.ideal, *m));
            }
            assert_eq!(&back, i, "refactor mismatch");
        }
        // A prime square factors with multiplicity 2.
        let p0 = &table.by_degree[1][0].ideal;
        let sq = ic.mul(p0, p0);
        let factors = ic.factor(&sq, &table).unwrap();
        assert_eq!(factors.len(), 1);
        assert_eq!(factors[0].1, 2);
    }

    #[test]
    fn class_map_matches_principality() {
        let ic = fixture();
        let table = ic.primes_up_to(3).unwrap();
        // Degree-1 primes hit each nontrivial class exactly once.
        let classes: Vec<Pt<Gf>> = table.by_degree[1]
            .iter()
            .map(|p| ic.prime_class(p))
            .collect();
        assert_eq!(classes.len(), 6);
        for c in &classes {
            assert!(!c.is_inf(), "degree-1 primes are never principal here");
        }
        let ops = ic.curve().ops_base();
        for i in 0..classes.len() {
            for j in (i + 1)..classes.len() {
                assert!(!ops.pt_eq(&classes[i], &classes[j]), "classes must be distinct");
            }
        }
        // The class map tells principality, and the independent
        // generator search agrees, across all ideals of degree ≤ 3.
        let mut checked_principal = 0;
        for d in 1..=3 {
            for i in ic.enumerate(d) {
                let cls = ic.class_of(&i, &table).unwrap();
                let gen = ic.principal_generator(&i);
                assert_eq!(cls.is_inf(), gen.is_some(), "ideal {i:?}");
                if let Some((u, w)) = gen {
                    checked_principal += 1;
                    let back = ic.principal_from(&u, &w).unwrap();
                    assert_eq!(back, i, "generator does not regenerate ideal");
                }
            }
        }
        assert!(checked_principal > 0);
        // Degree-2 ideals split evenly: 3 per class.
        let mut counts = std::collections::HashMap::<String, usize>::new();
        for i in ic.enumerate(2) {
            let cls = ic.class_of(&i, &table).unwrap();
            let key = format!("{cls:?}");
            *counts.entry(key).or_default() += 1;
        }
        assert_eq!(counts.len(), 7);
        assert!(counts.values().all(|v| *v == 3));
    }

    #[test]
    fn goss_brackets_are_multiplicative() {
        let ic = fixture();
        let ctx = ScalarCtx::new(Fq::new(3, 1), 3, 1, 18, 96);
        let (theta, eta) = theta_eta(&ctx, ic.curve(), 90).unwrap();
        let table = ic.primes_up_to(3).unwrap();
        let p = &table.by_degree[1][0].ideal;
        let q = &table.by_degree[1][3].ideal;
        let bp = ic.goss_unit(&ctx, &theta, &eta, p).unwrap();
        let bq = ic.goss_unit(&ctx, &theta, &eta, q).unwrap();
        let bpq = ic.goss_unit(&ctx, &theta, &eta, &ic.mul(p, q)).unwrap();
        let resid = ctx.sub(&ctx.mul(&bp, &bq), &bpq);
        let agree = ctx.certified_val(&resid);
        assert!(agree >= 40, "bracket multiplicativity only to π^{agree}");
        // ⟨I⟩ is a 1-unit.
        assert_eq!(ctx.valuation(&bp), Some((0, 1)));
        assert_eq!(ctx.lead(&bp), Some(0));
        // Brackets of principal ideals recover the sign-normalized
        // generator itself.
        let iy = ic.principal_from(&[], &poly::one()).unwrap();
        let by = ic.goss_unit(&ctx, &theta, &eta, &iy).unwrap();
        let (_, w) = ic.principal_generator(&iy).unwrap();
        assert_eq!(w, poly::one());
        let eta_unit = ctx.shift_pi(&eta, 3); // η is monic of degree 3
        let resid2 = ctx.sub(&by, &eta_unit);
        assert!(ctx.certified_val(&resid2) >= 40);
    }
}
