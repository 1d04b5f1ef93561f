//! Truncated Puiseux/Laurent series at the infinite place, with exact
//! precision tracking.
//!
//! A [`Scalar`] is a truncated expansion `Σ c_k π^{k/e}` with coefficients in
//! a Zech field `F_{q^s}`: the data is the ramification index `e`, the index
//! `v` of the first stored coefficient (in `1/e` units), the absolute
//! precision `prec` (the series is known modulo `O(π^{prec/e})`), and the
//! dense coefficient window `coeffs` covering exponents `v..prec`.
//!
//! Precision is part of the algebra, not an afterthought:
//! * products know `min(p₁+v₂, p₂+v₁)`;
//! * inverses preserve relative precision;
//! * a coefficient-Frobenius twist multiplies absolute precision by `q`
//!   exactly (char p), and an inverse twist divides it by `q` while
//!   multiplying the ramification index by `q`.
//!
//! The exact zero is a distinguished value with infinite precision. An
//! "apparent zero" — every known coefficient vanishes but `prec` is finite —
//! is *not* zero and refuses to be inverted.

use crate::error::{Error, Result};
use crate::field::{Fq, FqRef, Gf, GF_ONE, GF_ZERO};

/// Sentinel precision for the exact zero.
pub const PREC_EXACT: i64 = i64::MAX;

/// Truncated Puiseux series in `π^{1/e}` over a Zech field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scalar {
    /// Ramification index: stored exponents are `k/e` for `k ∈ v..prec`.
    pub e: u32,
    /// Index (in `1/e` units) of the first stored coefficient.
    pub v: i64,
    /// Absolute precision in `1/e` units; `PREC_EXACT` only for the exact zero.
    pub prec: i64,
    /// Coefficient window of length `prec - v` (empty for apparent/exact zero).
    pub coeffs: Vec<Gf>,
}

/// Context for scalar arithmetic: coefficient field, twist exponent,
/// ramification cap and working-precision policy.
#[derive(Debug, Clone)]
pub struct ScalarCtx {
    /// Coefficient field `F_{q^s}`.
    pub fq: FqRef,
    /// The base constant-field size `q` (the twisting exponent).
    pub q: u64,
    /// `s`: degree of the coefficient field over `F_q`.
    pub s: u32,
    /// Ramification cap `(q-1)·q^M`.
    pub e_max: u32,
    /// Default working precision in π-units for freshly minted constants.
    pub nw: i64,
    /// Maximum stored window length per unit of `e`, in π-units.
    pub cap_rel: i64,
}

fn sat_add(a: i64, b: i64) -> i64 {
    if a == PREC_EXACT || b == PREC_EXACT {
        PREC_EXACT
    } else {
        a.saturating_add(b)
    }
}

fn sat_mul(a: i64, f: i64) -> i64 {
    if a == PREC_EXACT {
        PREC_EXACT
    } else {
        a.saturating_mul(f)
    }
}

fn lcm_u32(a: u32, b: u32) -> u32 {
    let gcd = {
        let (mut x, mut y) = (a, b);
        while y != 0 {
            let t = x % y;
            x = y;
            y = t;
        }
        x
    };
    a / gcd * b
}

impl ScalarCtx {
    pub fn new(fq: FqRef, q: u64, s: u32, e_max: u32, nw: i64) -> Self {
        ScalarCtx { fq, q, s, e_max, nw, cap_rel: nw + 64 }
    }

    // ---- constructors ----

    /// The exact zero.
    pub fn zero(&self) -> Scalar {
        Scalar { e: 1, v: PREC_EXACT, prec: PREC_EXACT, coeffs: vec![] }
    }

    /// An apparent zero: nothing known below `prec` π-units.
    pub fn zero_to(&self, prec_pi: i64) -> Scalar {
        Scalar { e: 1, v: prec_pi, prec: prec_pi, coeffs: vec![] }
    }

    /// A field constant at default working precision.
    pub fn from_gf(&self, c: Gf) -> Scalar {
        if c == GF_ZERO {
            return self.zero();
        }
        let prec = self.cap_rel;
        let mut coeffs = vec![GF_ZERO; prec as usize];
        coeffs[0] = c;
        Scalar { e: 1, v: 0, prec, coeffs }
    }

    /// A prime-field integer constant.
    pub fn from_int(&self, c: i64) -> Scalar {
        self.from_gf(self.fq.from_int(c))
    }

    pub fn one(&self) -> Scalar {
        self.from_gf(GF_ONE)
    }

    /// `c · π^{k}` (integer π-power) at default working precision.
    pub fn pi_pow(&self, c: Gf, k: i64) -> Scalar {
        if c == GF_ZERO {
            return self.zero();
        }
        let prec = k + self.cap_rel;
        let mut coeffs = vec![GF_ZERO; (prec - k) as usize];
        coeffs[0] = c;
        Scalar { e: 1, v: k, prec, coeffs }
    }

    /// Build from an explicit window (coefficients for exponents `v..prec`
    /// in `1/e` units).
    pub fn from_window(&self, e: u32, v: i64, prec: i64, coeffs: Vec<Gf>) -> Scalar {
        debug_assert_eq!(coeffs.len() as i64, prec - v);
        let mut s = Scalar { e, v, prec, coeffs };
        self.normalize(&mut s);
        s
    }

    /// Build an unramified series from π-unit coefficients starting at `v`.
    pub fn from_pi_coeffs(&self, v: i64, coeffs: Vec<Gf>, prec: i64) -> Scalar {
        let mut c = coeffs;
        let len = (prec - v).max(0) as usize;
        c.resize(len, GF_ZERO);
        self.from_window(1, v, prec, c)
    }

    // ---- maintenance ----

    /// Strip leading zeros (bumping `v`), clamp the window to the cap, and
    /// canonicalize apparent zeros.
    pub fn normalize(&self, x: &mut Scalar) {
        if x.prec == PREC_EXACT && x.coeffs.is_empty() {
            x.v = PREC_EXACT;
            x.e = 1;
            return;
        }
        let mut lead = 0usize;
        while lead < x.coeffs.len() && x.coeffs[lead] == GF_ZERO {
            lead += 1;
        }
        if lead > 0 {
            x.coeffs.drain(..lead);
            x.v += lead as i64;
        }
        if x.coeffs.is_empty() {
            x.v = x.prec;
            return;
        }
        let cap = self.cap_rel.saturating_mul(x.e as i64);
        if (x.prec - x.v) > cap {
            x.prec = x.v + cap;
            x.coeffs.truncate(cap as usize);
        }
        // Reduce the ramification index when every datum lives on a coarser grid.
        if x.e > 1 {
            let mut g = x.e as i64;
            g = gcd_i64(g, x.v.rem_euclid(x.e as i64));
            g = gcd_i64(g, x.prec.rem_euclid(x.e as i64));
            for (i, &c) in x.coeffs.iter().enumerate() {
                if g == 1 {
                    break;
                }
                if c != GF_ZERO {
                    g = gcd_i64(g, (x.v + i as i64).rem_euclid(x.e as i64));
                }
            }
            if g > 1 {
                let g = g as i64;
                // Keep only every g-th slot; prec rounds down to the grid.
                let new_prec = x.prec.div_euclid(g);
                let new_v = x.v.div_euclid(g); // exact: g | v
                let len = (new_prec - new_v).max(0) as usize;
                let mut nc = vec![GF_ZERO; len];
                for (i, &c) in x.coeffs.iter().enumerate() {
                    if c != GF_ZERO {
                        let k = x.v + i as i64;
                        nc[(k.div_euclid(g) - new_v) as usize] = c;
                    }
                }
                x.e /= g as u32;
                x.v = new_v;
                x.prec = new_prec;
                x.coeffs = nc;
            }
        }
    }

    /// Is this the exact zero?
    pub fn is_exact_zero(&self, x: &Scalar) -> bool {
        x.prec == PREC_EXACT && x.coeffs.is_empty()
    }

    /// Every known coefficient vanishes (exact zero included).
    pub fn is_apparent_zero(&self, x: &Scalar) -> bool {
        x.coeffs.iter().all(|&c| c == GF_ZERO)
    }

    /// Valuation as (index, e): `π`-exponent `index/e` of the first nonzero
    /// known coefficient; `None` for (apparent) zeros.
    pub fn valuation(&self, x: &Scalar) -> Option<(i64, u32)> {
        x.coeffs.iter().position(|&c| c != GF_ZERO).map(|i| (x.v + i as i64, x.e))
    }

    /// Leading coefficient, if any is known.
    pub fn lead(&self, x: &Scalar) -> Option<Gf> {
        x.coeffs.iter().find(|&&c| c != GF_ZERO).copied()
    }

    /// Floor of the π-valuation certified for `x`: first nonzero exponent if
    /// any, otherwise the precision bound (`PREC_EXACT` for the exact zero).
    /// Used to report residual valuations.
    pub fn certified_val(&self, x: &Scalar) -> i64 {
        match self.valuation(x) {
            Some((k, e)) => k.div_euclid(e as i64),
            None => {
                if x.prec == PREC_EXACT {
                    PREC_EXACT
                } else {
                    x.prec.div_euclid(x.e as i64)
                }
            }
        }
    }

    /// Stretch to ramification index `e_new` (a multiple of `x.e`); lossless.
    pub fn stretch_to(&self, x: &Scalar, e_new: u32) -> Scalar {
        assert_eq!(e_new % x.e, 0);
        let f = (e_new / x.e) as i64;
        if f == 1 {
            return x.clone();
        }
        if self.is_exact_zero(x) {
            return x.clone();
        }
        let v = x.v.saturating_mul(f);
        let prec = sat_mul(x.prec, f);
        let len = (prec - v).max(0) as usize;
        let mut coeffs = vec![GF_ZERO; len];
        for (i, &c) in x.coeffs.iter().enumerate() {
            if c != GF_ZERO {
                coeffs[i * f as usize] = c;
            }
        }
        Scalar { e: e_new, v, prec, coeffs }
    }

    fn aligned(&self, a: &Scalar, b: &Scalar) -> Result<(Scalar, Scalar, u32)> {
        let e = lcm_u32(a.e, b.e);
        if e > self.e_max {
            return Err(Error::RamificationOverflow { required: e as u64, cap: self.e_max as u64 });
        }
        Ok((self.stretch_to(a, e), self.stretch_to(b, e), e))
    }

    // ---- ring operations ----

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        if self.is_exact_zero(a) {
            return b.clone();
        }
        if self.is_exact_zero(b) {
            return a.clone();
        }
        let (a, b, e) = self.aligned(a, b).expect("ramification cap hit in add");
        let v = a.v.min(b.v);
        let prec = a.prec.min(b.prec);
        let len = (prec - v).max(0) as usize;
        let mut coeffs = vec![GF_ZERO; len];
        for (part, v0) in [(&a, a.v), (&b, b.v)] {
            for (i, &c) in part.coeffs.iter().enumerate() {
                if c == GF_ZERO {
                    continue;
                }
                let k = v0 + i as i64;
                if k >= v && k < prec {
                    let slot = (k - v) as usize;
                    coeffs[slot] = self.fq.add(coeffs[slot], c);
                }
            }
        }
        let mut out = Scalar { e, v, prec, coeffs };
        self.normalize(&mut out);
        out
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        let mut out = a.clone();
        for c in out.coeffs.iter_mut() {
            *c = self.fq.neg(*c);
        }
        out
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        if self.is_exact_zero(a) || self.is_exact_zero(b) {
            return self.zero();
        }
        let (a, b, e) = self.aligned(a, b).expect("ramification cap hit in mul");
        let v = sat_add(a.v, b.v);
        let prec = sat_add(a.prec, b.v).min(sat_add(b.prec, a.v));
        let len = (prec - v).max(0) as usize;
        let mut coeffs = vec![GF_ZERO; len];
        for (i, &ai) in a.coeffs.iter().enumerate() {
            if ai == GF_ZERO {
                continue;
            }
            for (j, &bj) in b.coeffs.iter().enumerate() {
                let k = i + j;
                if k >= len {
                    break;
                }
                if bj == GF_ZERO {
                    continue;
                }
                coeffs[k] = self.fq.add(coeffs[k], self.fq.mul(ai, bj));
            }
        }
        let mut out = Scalar { e, v, prec, coeffs };
        self.normalize(&mut out);
        out
    }

    /// Multiply by a field constant (exact, precision-preserving).
    pub fn mul_gf(&self, a: &Scalar, c: Gf) -> Scalar {
        if c == GF_ZERO {
            return self.zero();
        }
        let mut out = a.clone();
        for x in out.coeffs.iter_mut() {
            *x = self.fq.mul(*x, c);
        }
        out
    }

    /// Multiply by `π^{k}` (integer π-power; exact shift).
    pub fn shift_pi(&self, a: &Scalar, k: i64) -> Scalar {
        if self.is_exact_zero(a) {
            return self.zero();
        }
        let f = a.e as i64;
        Scalar {
            e: a.e,
            v: a.v + k * f,
            prec: sat_add(a.prec, k * f),
            coeffs: a.coeffs.clone(),
        }
    }

    /// Inverse. Fails on apparent zeros.
    pub fn inv(&self, a: &Scalar) -> Result<Scalar> {
        let (val, _) = self.valuation(a).ok_or(Error::DivisionByApparentZero {
            prec: if a.prec == PREC_EXACT { -1 } else { a.prec },
        })?;
        // Normalize to u = lead·(1 + z), invert the unit part by long division.
        let lead_pos = (val - a.v) as usize;
        let lead = a.coeffs[lead_pos];
        let linv = self.fq.inv(lead);
        let n = a.coeffs.len() - lead_pos; // relative length
        let mut inv = vec![GF_ZERO; n];
        inv[0] = linv;
        // Solve (Σ a_{val+i} x^i)(Σ inv_j x^j) = 1 coefficient by coefficient.
        for m in 1..n {
            let mut acc = GF_ZERO;
            for i in 1..=m {
                let ai = a.coeffs[lead_pos + i];
                if ai == GF_ZERO {
                    continue;
                }
                acc = self.fq.add(acc, self.fq.mul(ai, inv[m - i]));
            }
            inv[m] = self.fq.neg(self.fq.mul(acc, linv));
        }
        // Relative precision is preserved: result window is [-val, prec - 2·val).
        let mut out = Scalar { e: a.e, v: -val, prec: a.prec - 2 * val, coeffs: inv };
        debug_assert_eq!(out.coeffs.len() as i64, out.prec - out.v);
        self.normalize(&mut out);
        Ok(out)
    }

    pub fn div(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Integer power (negative allowed; zero base needs positive exponent).
    pub fn powi(&self, a: &Scalar, n: i64) -> Result<Scalar> {
        if n == 0 {
            return Ok(self.one());
        }
        let base = if n < 0 { self.inv(a)? } else { a.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        Ok(acc)
    }

    // ---- Frobenius twists ----

    /// Coefficient Frobenius twist `x ↦ x^{(i)}` (q^i-th power for i ≥ 0,
    /// q^{-i}-th root for i < 0). Positive twists multiply absolute precision
    /// by q^i; negative twists divide it and multiply `e` by q^{|i|}.
    pub fn twist(&self, a: &Scalar, i: i64) -> Result<Scalar> {
        if i == 0 || self.is_exact_zero(a) {
            return Ok(a.clone());
        }
        let mut out = a.clone();
        if i > 0 {
            for _ in 0..i {
                out = self.twist_once_up(&out);
            }
        } else {
            for _ in 0..(-i) {
                out = self.twist_once_down(&out)?;
            }
        }
        Ok(out)
    }

    fn coeff_frob(&self, c: Gf, up: bool) -> Gf {
        // q = p^m; coefficients live in F_{p^{m·s}}.
        let m = self.fq.k / self.s;
        if up {
            self.fq.frob(c, m)
        } else {
            self.fq.frob_inv(c, m)
        }
    }

    fn twist_once_up(&self, a: &Scalar) -> Scalar {
        let q = self.q as i64;
        // If e is divisible by q, the exponent scaling is a grid coarsening.
        if a.e as i64 % q == 0 {
            let mut out = a.clone();
            out.e = (a.e as i64 / q) as u32;
            for c in out.coeffs.iter_mut() {
                *c = self.coeff_frob(*c, true);
            }
            self.normalize(&mut out);
            return out;
        }
        let v = a.v.saturating_mul(q);
        let prec_true = sat_mul(a.prec, q);
        let cap = self.cap_rel.saturating_mul(a.e as i64);
        let prec = prec_true.min(sat_add(v, cap));
        let len = (prec - v).max(0) as usize;
        let mut coeffs = vec![GF_ZERO; len];
        for (i, &c) in a.coeffs.iter().enumerate() {
            if c == GF_ZERO {
                continue;
            }
            let k = (i as i64) * q;
            if (k as usize) < len {
                coeffs[k as usize] = self.coeff_frob(c, true);
            }
        }
        let mut out = Scalar { e: a.e, v, prec, coeffs };
        self.normalize(&mut out);
        out
    }

    fn twist_once_down(&self, a: &Scalar) -> Result<Scalar> {
        let q = self.q as u32;
        let e_new = a.e.checked_mul(q).filter(|&e| e <= self.e_max).ok_or(
            Error::RamificationOverflow {
                required: a.e as u64 * self.q,
                cap: self.e_max as u64,
            },
        )?;
        // Indices are unchanged: π^{k/e} ↦ π^{k/(e·q)} is index-stable in the
        // finer grid; only coefficients take q-th roots.
        let mut out = a.clone();
        out.e = e_new;
        for c in out.coeffs.iter_mut() {
            *c = self.coeff_frob(*c, false);
        }
        self.normalize(&mut out);
        Ok(out)
    }

    // ---- roots ----

    /// m-th root of a one-unit (constant term exactly 1), `gcd(m, p) = 1`.
    pub fn unit_root(&self, a: &Scalar, m: u64) -> Result<Scalar> {
        match self.valuation(a) {
            Some((0, _)) if a.coeffs[0] == GF_ONE => {}
            Some((val, e)) => return Err(Error::NotOneUnit { val, e }),
            None => {
                return Err(Error::NotOneUnit {
                    val: if a.prec == PREC_EXACT { 0 } else { a.prec },
                    e: a.e,
                })
            }
        }
        if m % self.fq.p as u64 == 0 {
            return Err(Error::NotOneUnit { val: 0, e: a.e });
        }
        // Newton for f(z) = z^m - a, starting at z = 1; quadratic convergence
        // since f'(one-unit) is a unit.
        let m_scalar = self.from_int((m % self.fq.p as u64) as i64);
        let mut z = self.one();
        let target = a.prec.min(self.cap_rel.saturating_mul(a.e as i64));
        let mut known = 1i64; // z correct mod π^{known/e}
        while known < target {
            // z ← z - (z^m - a) / (m z^{m-1})
            let zm1 = self.powi(&z, m as i64 - 1)?;
            let zm = self.mul(&zm1, &z);
            let num = self.sub(&zm, a);
            let den = self.mul(&zm1, &m_scalar);
            let corr = self.div(&num, &den)?;
            z = self.sub(&z, &corr);
            known = known.saturating_mul(2);
            if self.is_apparent_zero(&corr) && corr.prec >= a.prec {
                break;
            }
        }
        // The root's precision cannot exceed the input's.
        Ok(self.truncate(&z, a.prec, a.e))
    }

    /// General scaled m-th root: `a = c·π^{j/e}·(1+z) ↦ canonical m-th root`,
    /// allowing a ramification bump when `m ∤ j`. Returns the root whose
    /// leading coefficient has the least Zech log, together with the number
    /// of root choices in the coefficient field (the branch-ambiguity order).
    pub fn root_scaled(&self, a: &Scalar, m: u64) -> Result<(Scalar, u64)> {
        let (val, e) = self.valuation(a).ok_or(Error::NotOneUnit {
            val: if a.prec == PREC_EXACT { 0 } else { a.prec },
            e: a.e,
        })?;
        let lead = self.lead(a).unwrap();
        let roots = self.fq.roots_m(lead, m);
        if roots.is_empty() {
            return Err(Error::NotOneUnit { val, e });
        }
        let ambiguity = roots.len() as u64;
        let lead_root = *roots.iter().min().unwrap();
        // Ramification: find the smallest stretch factor f with m | val·f.
        let need = (1..=m as i64)
            .find(|f| (val * f) % m as i64 == 0)
            .expect("f = m always works");
        let e_new = e as i64 * need;
        if e_new > self.e_max as i64 {
            return Err(Error::RamificationOverflow { required: e_new as u64, cap: self.e_max as u64 });
        }
        let a2 = self.stretch_to(a, e_new as u32);
        let val2 = val * need;
        // Unit part: a2 / (lead · π^{val2/e_new}).
        let unit = {
            let mut u = a2.clone();
            u.v -= val2;
            u.prec -= val2;
            self.mul_gf(&u, self.fq.inv(lead))
        };
        let unit_rt = self.unit_root(&unit, m)?;
        // Reattach the root of the monomial part on the e_new grid.
        let mut out = self.stretch_to(&self.mul_gf(&unit_rt, lead_root), e_new as u32);
        out.v += val2 / m as i64;
        out.prec = sat_add(out.prec, val2 / m as i64);
        self.normalize(&mut out);
        Ok((out, ambiguity))
    }

    // ---- precision plumbing ----

    /// Truncate to absolute precision `prec` given in `1/e_units` units.
    pub fn truncate(&self, a: &Scalar, prec: i64, e_units: u32) -> Scalar {
        if self.is_exact_zero(a) {
            // Downgrade the exact zero to an apparent zero at the bound.
            let p = prec.saturating_mul(a.e as i64) / e_units as i64;
            return Scalar { e: a.e, v: p, prec: p, coeffs: vec![] };
        }
        let p = if e_units == a.e {
            prec
        } else {
            // Convert the bound into a's grid (floor).
            (prec as i128 * a.e as i128).div_euclid(e_units as i128) as i64
        };
        if p >= a.prec {
            return a.clone();
        }
        let mut out = a.clone();
        out.prec = p;
        let len = (p - out.v).max(0) as usize;
        out.coeffs.truncate(len);
        if out.coeffs.is_empty() {
            out.v = p;
        }
        self.normalize(&mut out);
        out
    }

    /// Truncate to absolute π-precision (integer π-units).
    pub fn truncate_pi(&self, a: &Scalar, prec_pi: i64) -> Scalar {
        self.truncate(a, prec_pi, 1)
    }

    /// Demand at least `need` π-units of absolute precision.
    pub fn require_prec(&self, a: &Scalar, need_pi: i64) -> Result<()> {
        let have = if a.prec == PREC_EXACT { PREC_EXACT } else { a.prec.div_euclid(a.e as i64) };
        if have < need_pi {
            return Err(Error::PrecisionExhausted { needed: need_pi, have });
        }
        Ok(())
    }

    /// First π-exponent (floor, π-units) where `a` and `b` are known to
    /// disagree; `PREC_EXACT` if they agree within the joint precision.
    pub fn agreement(&self, a: &Scalar, b: &Scalar) -> i64 {
        self.certified_val(&self.sub(a, b))
    }

    /// Extract the coefficient at integer π-exponent `k` (0 if the slot is
    /// inside the window but empty; None if beyond precision or off-grid
    /// nonzero slots cannot occur by normalization).
    pub fn coeff_pi(&self, a: &Scalar, k: i64) -> Option<Gf> {
        if self.is_exact_zero(a) {
            return Some(GF_ZERO);
        }
        let idx = k.checked_mul(a.e as i64)?;
        if idx >= a.prec {
            return None;
        }
        if idx < a.v {
            return Some(GF_ZERO);
        }
        Some(a.coeffs[(idx - a.v) as usize])
    }
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fq;

    fn ctx() -> ScalarCtx {
        ScalarCtx::new(Fq::new(3, 2), 3, 2, 18, 40)
    }

    #[test]
    fn inverse_pairs() {
        let c = ctx();
        let mut a = c.pi_pow(GF_ONE, -2);
        a = c.add(&a, &c.one());
        a = c.add(&a, &c.pi_pow(c.fq.from_int(2), 3));
        let inv = c.inv(&a).unwrap();
        let prod = c.mul(&a, &inv);
        let diff = c.sub(&prod, &c.one());
        assert!(c.is_apparent_zero(&diff), "a·a⁻¹ ≠ 1: {:?}", diff);
        assert!(diff.prec >= 30);
    }

    #[test]
    fn twist_roundtrip_and_precision() {
        let c = ctx();
        let mut a = c.pi_pow(GF_ONE, 1);
        a = c.add(&a, &c.pi_pow(c.fq.from_int(2), 2));
        let up = c.twist(&a, 1).unwrap();
        // (π + 2π²)^(1) = π³ + 2^3 π⁶ = π³ + 2π⁶ over F_9 with q = 3.
        assert_eq!(c.valuation(&up), Some((3, 1)));
        let back = c.twist(&up, -1).unwrap();
        let diff = c.sub(&back, &a);
        assert!(c.is_apparent_zero(&diff));
        // Positive twist multiplies precision.
        assert!(up.prec >= a.prec); // window-capped but never smaller in practice here
    }

    #[test]
    fn unit_root_squares() {
        let c = ctx();
        let mut a = c.one();
        a = c.add(&a, &c.pi_pow(GF_ONE, 1));
        a = c.add(&a, &c.pi_pow(c.fq.from_int(2), 3));
        let r = c.unit_root(&a, 2).unwrap();
        let sq = c.mul(&r, &r);
        assert!(c.is_apparent_zero(&c.sub(&sq, &a)));
    }

    #[test]
    fn ramified_roots() {
        let c = ctx();
        // π has no square root without ramification; root_scaled bumps e.
        let a = c.pi_pow(GF_ONE, 1);
        let (r, amb) = c.root_scaled(&a, 2).unwrap();
        assert_eq!(amb, 2);
        let sq = c.mul(&r, &r);
        assert!(c.is_apparent_zero(&c.sub(&sq, &a)));
        assert_eq!(r.e, 2);
        assert_eq!(c.valuation(&r), Some((1, 2)));
    }

    #[test]
    fn apparent_zero_division_fails() {
        let c = ctx();
        let z = c.zero_to(10);
        assert!(matches!(c.inv(&z), Err(Error::DivisionByApparentZero { .. })));
    }
}
