//! Dense univariate polynomials over a Zech-table field.
//!
//! Coefficients are stored low-to-high in a `Vec<Gf>`; the zero polynomial is
//! the empty vector. Everything is a free function taking the field handle,
//! which keeps the representation transparent to callers that need to build
//! F_q-linear systems out of coefficient slots.

use crate::field::{Fq, Gf, GF_ONE, GF_ZERO};

/// Polynomial: coefficient vector, low order first; empty = zero.
pub type Poly = Vec<Gf>;

/// Remove trailing zeros in place.
pub fn trim(p: &mut Poly) {
    while p.last() == Some(&GF_ZERO) {
        p.pop();
    }
}

/// Degree with the convention deg 0 = -1.
pub fn degree(p: &[Gf]) -> i64 {
    let mut d = p.len() as i64 - 1;
    while d >= 0 && p[d as usize] == GF_ZERO {
        d -= 1;
    }
    d
}

/// Leading coefficient (GF_ZERO for the zero polynomial).
pub fn lead(p: &[Gf]) -> Gf {
    match degree(p) {
        -1 => GF_ZERO,
        d => p[d as usize],
    }
}

pub fn is_zero(p: &[Gf]) -> bool {
    degree(p) == -1
}

pub fn constant(c: Gf) -> Poly {
    if c == GF_ZERO {
        vec![]
    } else {
        vec![c]
    }
}

pub fn one() -> Poly {
    vec![GF_ONE]
}

/// The monomial `x` (used as the coordinate `t` throughout the lattice layer).
pub fn x() -> Poly {
    vec![GF_ZERO, GF_ONE]
}

/// Build from prime-field integers, low order first.
pub fn from_ints(f: &Fq, cs: &[i64]) -> Poly {
    let mut p: Poly = cs.iter().map(|&c| f.from_int(c)).collect();
    trim(&mut p);
    p
}

pub fn add(f: &Fq, a: &[Gf], b: &[Gf]) -> Poly {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let ai = a.get(i).copied().unwrap_or(GF_ZERO);
        let bi = b.get(i).copied().unwrap_or(GF_ZERO);
        out.push(f.add(ai, bi));
    }
    trim(&mut out);
    out
}

pub fn neg(f: &Fq, a: &[Gf]) -> Poly {
    a.iter().map(|&c| f.neg(c)).collect()
}

pub fn sub(f: &Fq, a: &[Gf], b: &[Gf]) -> Poly {
    add(f, a, &neg(f, b))
}

pub fn scale(f: &Fq, a: &[Gf], c: Gf) -> Poly {
    if c == GF_ZERO {
        return vec![];
    }
    a.iter().map(|&ai| f.mul(ai, c)).collect()
}

/// Multiply by `x^k`.
pub fn shift(a: &[Gf], k: usize) -> Poly {
    if is_zero(a) {
        return vec![];
    }
    let mut out = vec![GF_ZERO; k];
    out.extend_from_slice(a);
    out
}

pub fn mul(f: &Fq, a: &[Gf], b: &[Gf]) -> Poly {
    if is_zero(a) || is_zero(b) {
        return vec![];
    }
    let mut out = vec![GF_ZERO; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == GF_ZERO {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            if bj == GF_ZERO {
                continue;
            }
            out[i + j] = f.add(out[i + j], f.mul(ai, bj));
        }
    }
    trim(&mut out);
    out
}

/// Quotient and remainder; divisor must be nonzero.
pub fn divrem(f: &Fq, a: &[Gf], b: &[Gf]) -> (Poly, Poly) {
    let db = degree(b);
    assert!(db >= 0, "division by zero polynomial");
    let linv = f.inv(lead(b));
    let mut rem: Poly = a.to_vec();
    trim(&mut rem);
    let mut quo = vec![GF_ZERO; rem.len().saturating_sub(db as usize)];
    while degree(&rem) >= db {
        let dr = degree(&rem);
        let c = f.mul(rem[dr as usize], linv);
        let sh = (dr - db) as usize;
        quo[sh] = c;
        for i in 0..=db as usize {
            let s = f.mul(c, b[i]);
            rem[sh + i] = f.sub(rem[sh + i], s);
        }
        trim(&mut rem);
    }
    trim(&mut quo);
    (quo, rem)
}

pub fn rem(f: &Fq, a: &[Gf], b: &[Gf]) -> Poly {
    divrem(f, a, b).1
}

pub fn divides(f: &Fq, b: &[Gf], a: &[Gf]) -> bool {
    is_zero(&rem(f, a, b))
}

pub fn make_monic(f: &Fq, a: &[Gf]) -> Poly {
    let l = lead(a);
    if l == GF_ZERO || l == GF_ONE {
        let mut v = a.to_vec();
        trim(&mut v);
        return v;
    }
    scale(f, a, f.inv(l))
}

/// Monic gcd.
pub fn gcd(f: &Fq, a: &[Gf], b: &[Gf]) -> Poly {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    trim(&mut a);
    trim(&mut b);
    while !is_zero(&b) {
        let r = rem(f, &a, &b);
        a = b;
        b = r;
    }
    make_monic(f, &a)
}

/// Extended gcd: returns monic `g` and cofactors with `s·a + u·b = g`.
pub fn xgcd(f: &Fq, a: &[Gf], b: &[Gf]) -> (Poly, Poly, Poly) {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    trim(&mut r0);
    trim(&mut r1);
    let (mut s0, mut s1) = (one(), Poly::new());
    let (mut u0, mut u1) = (Poly::new(), one());
    while !is_zero(&r1) {
        let (q, r) = divrem(f, &r0, &r1);
        let ns = sub(f, &s0, &mul(f, &q, &s1));
        let nu = sub(f, &u0, &mul(f, &q, &u1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, ns);
        u0 = std::mem::replace(&mut u1, nu);
    }
    let l = lead(&r0);
    if l == GF_ZERO || l == GF_ONE {
        return (r0, s0, u0);
    }
    let linv = f.inv(l);
    (scale(f, &r0, linv), scale(f, &s0, linv), scale(f, &u0, linv))
}

/// Quotient of an exact division (panics if the remainder is nonzero —
/// callers must hold a divisibility witness).
pub fn div_exact(f: &Fq, a: &[Gf], b: &[Gf]) -> Poly {
    let (q, r) = divrem(f, a, b);
    assert!(is_zero(&r), "division was not exact");
    q
}

pub fn eval(f: &Fq, a: &[Gf], x: Gf) -> Gf {
    let mut acc = GF_ZERO;
    for &c in a.iter().rev() {
        acc = f.add(f.mul(acc, x), c);
    }
    acc
}

/// Map coefficients through an embedding factor into a larger field `big`.
pub fn embed(big: &Fq, a: &[Gf], factor: u64) -> Poly {
    a.iter().map(|&c| big.embed(c, factor)).collect()
}

/// All roots in the given field (brute scan — fields here are tiny).
pub fn roots(f: &Fq, a: &[Gf]) -> Vec<Gf> {
    f.elements().filter(|&x| eval(f, a, x) == GF_ZERO).collect()
}

/// `base^e mod m`.
pub fn pow_mod(f: &Fq, base: &[Gf], e: u64, m: &[Gf]) -> Poly {
    let mut result = one();
    let mut acc = rem(f, base, m);
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = rem(f, &mul(f, &result, &acc), m);
        }
        acc = rem(f, &mul(f, &acc, &acc), m);
        e >>= 1;
    }
    result
}

/// Formal derivative.
pub fn derivative(f: &Fq, a: &[Gf]) -> Poly {
    let mut out = Vec::new();
    for (i, &c) in a.iter().enumerate().skip(1) {
        out.push(f.mul(c, f.from_int(i as i64)));
    }
    trim(&mut out);
    out
}

/// Irreducibility over the coefficient field (which must be the full field
/// the polynomial lives over), via distinct-degree gcds.
pub fn is_irreducible(f: &Fq, a: &[Gf]) -> bool {
    let d = degree(a);
    if d <= 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    let a = make_monic(f, a);
    // x^{q^i} mod a
    let mut xq = rem(f, &x(), &a);
    for i in 1..=(d as u64) {
        xq = pow_mod(f, &xq, f.q, &a);
        if i <= d as u64 / 2 {
            let diff = sub(f, &xq, &x());
            let g = gcd(f, &diff, &a);
            if degree(&g) > 0 {
                return false;
            }
        }
    }
    sub(f, &xq, &x()).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fq;

    #[test]
    fn divrem_roundtrip() {
        let f = Fq::new(3, 1);
        let a = from_ints(&f, &[1, 2, 0, 1, 1]);
        let b = from_ints(&f, &[2, 1, 1]);
        let (q, r) = divrem(&f, &a, &b);
        let back = add(&f, &mul(&f, &q, &b), &r);
        assert_eq!(back, a);
        assert!(degree(&r) < degree(&b));
    }

    #[test]
    fn gcd_of_products() {
        let f = Fq::new(3, 1);
        let a = from_ints(&f, &[1, 1]); // t + 1
        let b = from_ints(&f, &[2, 1]); // t + 2
        let c = from_ints(&f, &[1, 0, 1]); // t² + 1 (irreducible over F_3)
        let ab = mul(&f, &a, &b);
        let ac = mul(&f, &a, &c);
        assert_eq!(gcd(&f, &ab, &ac), make_monic(&f, &a));
        assert!(is_irreducible(&f, &c));
        assert!(!is_irreducible(&f, &ab));
    }

    #[test]
    fn root_scan() {
        let f = Fq::new(3, 2);
        // (x - g)(x - g^3) where g generates F_9: roots are the two conjugates.
        let g = 1u32;
        let conj = f.frob(g, 1);
        let p = mul(&f, &[f.neg(g), GF_ONE], &[f.neg(conj), GF_ONE]);
        let mut r = roots(&f, &p);
        r.sort_unstable();
        let mut want = vec![g, conj];
        want.sort_unstable();
        assert_eq!(r, want);
    }
}
