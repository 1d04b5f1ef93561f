//! Exact arithmetic in the class field `H = K[w]/(m(w))`.
//!
//! The class field of the curve is generated over the function field `K`
//! by the leading isogeny coefficient `w = x₁` of any sign-normalized
//! rank-2 module; `m` is its monic minimal polynomial, of degree `h`.
//! Elements are dense polynomials in `w` of degree `< h` with exact
//! [`KElem`] coefficients, so every identity in the operator algebra can
//! be decided exactly — no precision floors, no thresholds.
//!
//! The `q`-power map (the coefficient twist `ξ ↦ ξ^{(1)}` of the analytic
//! layer restricted to `H`) is the literal `q`-th power here: on Laurent
//! series over `F_{q^s}` raising to the `q` is coefficient Frobenius plus
//! exponent scaling, so the embedding intertwines `(·)^q` with the twist.

use crate::coeffs::{pv_divrem, pv_mul, pv_trim, Coeffs};
use crate::error::{Error, Result};
use crate::kexact::{KCtx, KElem};

/// An element of `H` in the `w`-power basis: `Σ c[i]·wⁱ`, `deg < h`,
/// trailing zeros trimmed.
pub type HElem = Vec<KElem>;

/// Context for exact class-field arithmetic: the function field and the
/// monic minimal polynomial of the generator.
#[derive(Debug, Clone)]
pub struct HCtx {
    pub kc: KCtx,
    /// Monic modulus `m(w)`, length `h + 1`.
    pub m: Vec<KElem>,
}

impl HCtx {
    pub fn new(kc: KCtx, m: Vec<KElem>) -> Result<HCtx> {
        let h = m.len().saturating_sub(1);
        if h == 0 || !kc.keq(&m[h], &Coeffs::one(&kc)) {
            return Err(Error::ConfigInvalid {
                reason: "class field modulus must be monic of positive degree".into(),
            });
        }
        Ok(HCtx { kc, m })
    }

    /// Degree `[H : K]`.
    pub fn h(&self) -> usize {
        self.m.len() - 1
    }

    pub fn zero(&self) -> HElem {
        vec![]
    }

    pub fn one(&self) -> HElem {
        vec![Coeffs::one(&self.kc)]
    }

    pub fn from_k(&self, c: &KElem) -> HElem {
        if self.kc.kis_zero(c) {
            vec![]
        } else {
            vec![c.clone()]
        }
    }

    /// The generator `w` itself.
    pub fn w(&self) -> HElem {
        vec![Coeffs::zero(&self.kc), Coeffs::one(&self.kc)]
    }

    pub fn is_zero(&self, a: &HElem) -> bool {
        a.iter().all(|c| self.kc.kis_zero(c))
    }

    pub fn eq(&self, a: &HElem, b: &HElem) -> bool {
        self.is_zero(&self.sub(a, b))
    }

    pub fn add(&self, a: &HElem, b: &HElem) -> HElem {
        let mut out = crate::coeffs::pv_add(&self.kc, a, b);
        pv_trim(&self.kc, &mut out);
        out
    }

    pub fn neg(&self, a: &HElem) -> HElem {
        a.iter().map(|c| self.kc.kneg(c)).collect()
    }

    pub fn sub(&self, a: &HElem, b: &HElem) -> HElem {
        self.add(a, &self.neg(b))
    }

    /// Reduce an arbitrary `w`-polynomial modulo `m`.
    pub fn reduce(&self, a: &[KElem]) -> HElem {
        let (_, mut r) = pv_divrem(&self.kc, a, &self.m)
            .expect("monic modulus division cannot fail");
        pv_trim(&self.kc, &mut r);
        r
    }

    pub fn mul(&self, a: &HElem, b: &HElem) -> HElem {
        self.reduce(&pv_mul(&self.kc, a, b))
    }

    pub fn scale_k(&self, a: &HElem, c: &KElem) -> HElem {
        let mut out: HElem = a.iter().map(|x| self.kc.kmul(x, c)).collect();
        pv_trim(&self.kc, &mut out);
        out
    }

    /// Inverse modulo `m` by the extended Euclidean algorithm; `m` is
    /// irreducible, so every nonzero element is a unit.
    pub fn inv(&self, a: &HElem) -> Result<HElem> {
        if self.is_zero(a) {
            return Err(Error::NonInvertibleLeadingCoefficient);
        }
        let kc = &self.kc;
        // Invariants: r0 = s0·a (mod m), r1 = s1·a (mod m).
        let mut r0: Vec<KElem> = self.m.clone();
        let mut s0: Vec<KElem> = vec![];
        let mut r1: Vec<KElem> = a.clone();
        let mut s1: Vec<KElem> = vec![Coeffs::one(kc)];
        while crate::coeffs::pv_deg(kc, &r1).is_some() {
            let (q, r) = pv_divrem(kc, &r0, &r1)?;
            let snew = crate::coeffs::pv_sub(kc, &s0, &pv_mul(kc, &q, &s1));
            r0 = r1;
            s0 = s1;
            r1 = r;
            s1 = snew;
        }
        // r0 is a nonzero constant: gcd(a, m) up to a unit.
        let c = r0
            .first()
            .cloned()
            .ok_or(Error::NonInvertibleLeadingCoefficient)?;
        let cinv = kc.kinv(&c)?;
        let mut out: HElem = s0.iter().map(|x| kc.kmul(x, &cinv)).collect();
        pv_trim(kc, &mut out);
        Ok(self.reduce(&out))
    }

    pub fn div(&self, a: &HElem, b: &HElem) -> Result<HElem> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Integer power by square-and-multiply.
    pub fn pow(&self, a: &HElem, n: u64) -> HElem {
        let mut acc = self.one();
        let mut base = a.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            k >>= 1;
        }
        acc
    }

    /// The `q`-power map — the coefficient twist of the analytic layer.
    pub fn frobq(&self, a: &HElem) -> HElem {
        self.pow(a, self.kc.curve.q)
    }

    /// Iterated twist `a^{(k)} = a^{q^k}`.
    pub fn twist(&self, a: &HElem, k: u32) -> HElem {
        let mut out = a.clone();
        for _ in 0..k {
            out = self.frobq(&out);
        }
        out
    }

    /// Substitute `g` for `w` in `a` (Horner over `H`): the image of `a`
    /// under the `K`-endomorphism sending `w ↦ g`.
    pub fn subst(&self, a: &HElem, g: &HElem) -> HElem {
        let mut acc = self.zero();
        for c in a.iter().rev() {
            acc = self.mul(&acc, g);
            acc = self.add(&acc, &self.from_k(c));
        }
        acc
    }

    /// Preimage of the `q`-power map, when one exists (Frobenius descent).
    ///
    /// `H/K` is Galois, so `w^q` is again a generator and the `q`-power
    /// map sends `Σ x_j wʲ` to `Σ x_j^q (w^q)ʲ`. Expressing `a` in the
    /// `(w^q)`-power basis by a `K`-linear solve and taking coordinate
    /// roots with [`kroot_q`] inverts the map explicitly; the result is
    /// re-verified by powering back. Fails with `RecognitionFailure` if
    /// `a` is not a `q`-th power in `H`.
    pub fn root_frobq(&self, a: &HElem) -> Result<HElem> {
        let h = self.h();
        let kc = &self.kc;
        let wq = self.frobq(&self.w());
        // Column j holds the w-power coordinates of (w^q)^j.
        let mut cols: Vec<HElem> = Vec::with_capacity(h);
        let mut p = self.one();
        for _ in 0..h {
            cols.push(p.clone());
            p = self.mul(&p, &wq);
        }
        let coord = |v: &HElem, k: usize| v.get(k).cloned().unwrap_or_else(|| Coeffs::zero(kc));
        let rows: Vec<Vec<KElem>> =
            (0..h).map(|k| (0..h).map(|j| coord(&cols[j], k)).collect()).collect();
        let rhs: Vec<KElem> = (0..h).map(|k| coord(a, k)).collect();
        let xi = crate::coeffs::solve(kc, &rows, &rhs, "Frobenius descent")?;
        let mut root: Vec<KElem> = Vec::with_capacity(h);
        for c in &xi {
            root.push(crate::kexact::kroot_q(kc, c)?);
        }
        pv_trim(kc, &mut root);
        if !self.eq(&self.frobq(&root), a) {
            return Err(Error::RecognitionFailure { context: "Frobenius descent" });
        }
        Ok(root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Curve;
    use crate::poly;

    /// `H = K[w]/(w² − t)`: a toy quadratic extension exercising every
    /// ring operation against hand algebra.
    fn toy() -> HCtx {
        let curve = Curve::new(3, 1, [0, 0, 0, -1, 1]).unwrap();
        let kc = KCtx { curve };
        let m = vec![
            kc.kneg(&kc.gen_t()),
            Coeffs::zero(&kc),
            kc.from_tpoly(&poly::one()),
        ];
        HCtx::new(kc, m).unwrap()
    }

    #[test]
    fn field_axioms_modulo_the_modulus() {
        let hc = toy();
        let kc = &hc.kc;
        let w = hc.w();
        // w² = t.
        let w2 = hc.mul(&w, &w);
        assert!(hc.eq(&w2, &hc.from_k(&kc.gen_t())));
        // (1 + w)(1 − w) = 1 − t.
        let a = hc.add(&hc.one(), &w);
        let b = hc.sub(&hc.one(), &w);
        let prod = hc.mul(&a, &b);
        let want = hc.from_k(&kc.ksub(&kc.from_tpoly(&poly::one()), &kc.gen_t()));
        assert!(hc.eq(&prod, &want));
        // Inversion: a · a⁻¹ = 1 for a = w + y/t (a unit with a genuine
        // K-denominator).
        let yt = kc.kdiv(&kc.gen_y(), &kc.gen_t()).unwrap();
        let a = hc.add(&w, &hc.from_k(&yt));
        let ainv = hc.inv(&a).unwrap();
        assert!(hc.eq(&hc.mul(&a, &ainv), &hc.one()));
        // Substitution: f(w) = w² + w at g = 1 + w gives g² + g = t + 1 + (1+w) + 2w…
        let f = vec![Coeffs::zero(kc), Coeffs::one(kc), Coeffs::one(kc)];
        let g = hc.add(&hc.one(), &w);
        let sub = hc.subst(&f, &g);
        let direct = hc.add(&hc.mul(&g, &g), &g);
        assert!(hc.eq(&sub, &direct));
        // Frobenius is a ring map: (a+b)^q = a^q + b^q.
        let s = hc.add(&a, &g);
        let lhs = hc.frobq(&s);
        let rhs = hc.add(&hc.frobq(&a), &hc.frobq(&g));
        assert!(hc.eq(&lhs, &rhs));
    }

    #[test]
    fn frobenius_descent_roundtrip() {
        let hc = toy();
        let kc = &hc.kc;
        // Any q-th power descends back to its unique root.
        let a = hc.add(&hc.w(), &hc.from_k(&kc.kdiv(&kc.gen_y(), &kc.gen_t()).unwrap()));
        let root = hc.root_frobq(&hc.frobq(&a)).unwrap();
        assert!(hc.eq(&root, &a));
        // t is not a q-th power in H (t^{1/3} is inseparable of degree 3,
        // which does not divide [H : K] = 2).
        assert!(hc.root_frobq(&hc.from_k(&kc.gen_t())).is_err());
    }
}
