//! Finite fields `F_{p^k}` with Zech-logarithm tables.
//!
//! Every nonzero element is the discrete logarithm (a `u32`) of a fixed
//! multiplicative generator; zero is a sentinel. Multiplication is log
//! addition, and addition goes through the precomputed Zech table
//! `zech[i] = log(1 + g^i)`, so each field operation is a few integer
//! operations plus one lookup. Frobenius maps and m-th roots act on logs by
//! modular scaling, which is what makes coefficient-twisting cheap enough to
//! sit inside series convolutions.
//!
//! Tables are materialized eagerly, so field sizes are capped (far above what
//! the fixtures need). Construction is fully deterministic: the first monic
//! irreducible polynomial in lexicographic order defines the extension and
//! the first multiplicative generator in packed order defines the logs.

use std::sync::Arc;

/// A field element: the discrete log of the generator, or [`GF_ZERO`].
pub type Gf = u32;

/// Sentinel log value representing zero.
pub const GF_ZERO: Gf = u32::MAX;

/// The multiplicative identity (log 0).
pub const GF_ONE: Gf = 0;

/// Hard cap on field size; tables are O(|F|).
const MAX_FIELD_SIZE: u64 = 4_000_000;

/// A concrete finite field `F_{p^k}` with its Zech table.
#[derive(Debug)]
pub struct Fq {
    /// Characteristic.
    pub p: u32,
    /// Extension degree over the prime field.
    pub k: u32,
    /// Field size `p^k`.
    pub q: u64,
    /// Coefficients (low to high, integers mod p) of the monic minimal
    /// polynomial over `F_p` of the multiplicative generator; length `k + 1`.
    /// This pins the abstract isomorphism class of the log representation,
    /// so embeddings between fields are matched against it.
    pub minpoly: Vec<u32>,
    /// `zech[i] = log(1 + g^i)`, or `GF_ZERO` when `1 + g^i = 0`.
    zech: Vec<u32>,
    /// Log of `-1` (0 in characteristic 2).
    neg_log: u32,
    /// Log of each prime-field integer `0..p` (`int_log[0]` is `GF_ZERO`).
    int_log: Vec<Gf>,
    /// Packed polynomial representation of `g^i` (base-p digits).
    pow_packed: Vec<u64>,
    /// Inverse of `pow_packed`: packed value -> log (dense, size `q`).
    log_of_packed: Vec<u32>,
}

/// Shared handle to a field.
pub type FqRef = Arc<Fq>;

impl Fq {
    /// Build `F_{p^k}` deterministically.
    pub fn new(p: u32, k: u32) -> FqRef {
        assert!(k >= 1, "extension degree must be positive");
        let q = (p as u64)
            .checked_pow(k)
            .filter(|&q| q <= MAX_FIELD_SIZE)
            .unwrap_or_else(|| panic!("field F_{{{p}^{k}}} exceeds the table cap"));
        assert!(is_prime(p), "characteristic must be prime, got {p}");

        let modulus = first_irreducible(p, k);
        // Walk the powers of a multiplicative generator, recording packed
        // polynomial representations so that logs can be looked up densely.
        let gen = find_generator(p, k, q, &modulus);
        let q1 = (q - 1) as usize;
        let mut pow_packed = Vec::with_capacity(q1);
        let mut log_of_packed = vec![GF_ZERO; q as usize];
        let mut cur = vec![0u32; k as usize];
        cur[0] = 1; // g^0 = 1
        for i in 0..q1 {
            let packed = pack(&cur, p);
            debug_assert_eq!(log_of_packed[packed as usize], GF_ZERO, "generator order too small");
            log_of_packed[packed as usize] = i as u32;
            pow_packed.push(packed);
            cur = mul_mod(&cur, &gen, p, &modulus);
        }
        debug_assert_eq!(pack(&cur, p), 1, "generator order mismatch");

        // Zech table and integer logs.
        let mut zech = vec![GF_ZERO; q1];
        for i in 0..q1 {
            let mut v = pow_packed[i];
            let c0 = (v % p as u64) as u32;
            v = v - c0 as u64 + ((c0 + 1) % p) as u64;
            zech[i] = if v == 0 { GF_ZERO } else { log_of_packed[v as usize] };
        }
        let mut int_log = vec![GF_ZERO; p as usize];
        for c in 1..p {
            int_log[c as usize] = log_of_packed[c as usize];
        }
        let neg_log = if p == 2 { 0 } else { int_log[(p - 1) as usize] };

        let mut fq =
            Fq { p, k, q, minpoly: vec![], zech, neg_log, int_log, pow_packed, log_of_packed };
        fq.minpoly = fq.generator_minpoly();
        Arc::new(fq)
    }

    /// Minimal polynomial over `F_p` of the generator (log 1), as integers
    /// mod p, low order first: `∏_{i<k} (x - g^{p^i})`.
    fn generator_minpoly(&self) -> Vec<u32> {
        let k = self.k as usize;
        // Product with coefficients as logs in this field.
        let mut coeffs: Vec<Gf> = vec![GF_ONE];
        let mut conj_log = 1u64; // log of g^{p^0} = g
        for _ in 0..k {
            let conj = (conj_log % self.q1()) as u32;
            let mut next = vec![GF_ZERO; coeffs.len() + 1];
            for (j, &c) in coeffs.iter().enumerate() {
                next[j + 1] = self.add(next[j + 1], c);
                next[j] = self.sub(next[j], self.mul(conj, c));
            }
            coeffs = next;
            conj_log = conj_log * self.p as u64 % self.q1();
        }
        // Coefficients are Frobenius-stable, hence prime-field integers.
        coeffs
            .iter()
            .map(|&c| {
                (0..self.p)
                    .find(|&n| self.int_log[n as usize] == c)
                    .expect("generator minpoly has prime-field coefficients")
            })
            .collect()
    }

    /// `q - 1`, the order of the multiplicative group.
    #[inline]
    pub fn q1(&self) -> u64 {
        self.q - 1
    }

    #[inline]
    fn red(&self, x: u64) -> u32 {
        (x % self.q1()) as u32
    }

    /// Addition.
    #[inline]
    pub fn add(&self, a: Gf, b: Gf) -> Gf {
        if a == GF_ZERO {
            return b;
        }
        if b == GF_ZERO {
            return a;
        }
        let q1 = self.q1();
        let diff = self.red(b as u64 + q1 - a as u64);
        let z = self.zech[diff as usize];
        if z == GF_ZERO {
            GF_ZERO
        } else {
            self.red(a as u64 + z as u64)
        }
    }

    /// Negation.
    #[inline]
    pub fn neg(&self, a: Gf) -> Gf {
        if a == GF_ZERO {
            GF_ZERO
        } else {
            self.red(a as u64 + self.neg_log as u64)
        }
    }

    /// Subtraction.
    #[inline]
    pub fn sub(&self, a: Gf, b: Gf) -> Gf {
        self.add(a, self.neg(b))
    }

    /// Multiplication.
    #[inline]
    pub fn mul(&self, a: Gf, b: Gf) -> Gf {
        if a == GF_ZERO || b == GF_ZERO {
            GF_ZERO
        } else {
            self.red(a as u64 + b as u64)
        }
    }

    /// Multiplicative inverse. Panics on zero — callers pivot away from zero.
    #[inline]
    pub fn inv(&self, a: Gf) -> Gf {
        assert_ne!(a, GF_ZERO, "inverse of zero");
        if a == 0 {
            0
        } else {
            (self.q1() - a as u64) as u32
        }
    }

    /// Division.
    #[inline]
    pub fn div(&self, a: Gf, b: Gf) -> Gf {
        self.mul(a, self.inv(b))
    }

    /// Integer power (exponent may be negative).
    pub fn pow(&self, a: Gf, n: i64) -> Gf {
        if a == GF_ZERO {
            assert!(n > 0, "0^n needs n > 0");
            return GF_ZERO;
        }
        let q1 = self.q1() as i64;
        let e = (((n % q1) + q1) % q1) as u64;
        self.pow_u(a, e)
    }

    /// `x ↦ x^m` for a fixed exponent, as a log map (`m` may exceed u32).
    #[inline]
    pub fn pow_u(&self, a: Gf, m: u64) -> Gf {
        if a == GF_ZERO {
            return GF_ZERO;
        }
        self.red((a as u64) * (m % self.q1()) % self.q1())
    }

    /// Frobenius `x ↦ x^{p^j}`.
    #[inline]
    pub fn frob(&self, a: Gf, j: u32) -> Gf {
        if a == GF_ZERO {
            return GF_ZERO;
        }
        let mut m = 1u64;
        for _ in 0..(j % self.k) {
            m = m * self.p as u64 % self.q1();
        }
        self.pow_u(a, m)
    }

    /// Inverse Frobenius `x ↦ x^{p^{-j}}` (always exists; Frobenius is bijective).
    #[inline]
    pub fn frob_inv(&self, a: Gf, j: u32) -> Gf {
        // p^{-j} = p^{k - (j mod k)} on exponents.
        self.frob(a, self.k - (j % self.k))
    }

    /// The element `c · 1` for a prime-field integer `c`.
    #[inline]
    pub fn from_int(&self, c: i64) -> Gf {
        let c = ((c % self.p as i64) + self.p as i64) % self.p as i64;
        self.int_log[c as usize]
    }

    /// All m-th roots of `a` in this field (may be empty).
    pub fn roots_m(&self, a: Gf, m: u64) -> Vec<Gf> {
        if a == GF_ZERO {
            return vec![GF_ZERO];
        }
        let q1 = self.q1();
        let mr = m % q1;
        if mr == 0 {
            // x^m = x^0 = 1 for all x ≠ 0: roots exist only for a = 1.
            return if a == 0 { (0..q1).map(|y| y as u32).collect() } else { vec![] };
        }
        let d = gcd_u64(mr, q1);
        if (a as u64) % d != 0 {
            return vec![];
        }
        let step = q1 / d;
        let y0 = (a as u64 / d) % step * inv_mod(mr / d, step) % step;
        (0..d).map(|i| ((y0 + i * step) % q1) as u32).collect()
    }

    /// Canonical m-th root: the solution with the least log, if any.
    pub fn root_m(&self, a: Gf, m: u64) -> Option<Gf> {
        let mut r = self.roots_m(a, m);
        r.sort_unstable();
        r.into_iter().next()
    }

    /// Iterator over every element (zero first, then by log).
    pub fn elements(&self) -> impl Iterator<Item = Gf> + '_ {
        std::iter::once(GF_ZERO).chain((0..self.q1()).map(|i| i as u32))
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: Gf) -> u64 {
        assert_ne!(a, GF_ZERO);
        let q1 = self.q1();
        q1 / gcd_u64(a as u64, q1)
    }

    /// Log multiplier realizing the unique field embedding of `sub` into
    /// `self` that sends `sub`'s generator to the canonical conjugate: the
    /// image of an element with log `l` has log `l · factor mod (q-1)`.
    ///
    /// Requires `sub.p == self.p` and `sub.k | self.k`.
    pub fn embedding_from(&self, sub: &Fq) -> u64 {
        assert_eq!(self.p, sub.p, "embedding needs equal characteristic");
        assert_eq!(self.k % sub.k, 0, "no embedding F_{{p^{}}} -> F_{{p^{}}}", sub.k, self.k);
        if sub.k == self.k {
            // Same abstract field, possibly different construction; match minpolys.
            // (Construction is deterministic, so tables are identical.)
            debug_assert_eq!(self.minpoly, sub.minpoly);
            return 1;
        }
        let f0 = self.q1() / sub.q1();
        // Image of sub's generator must be a root of sub's minimal polynomial.
        'outer: for j in 0..sub.q1() {
            if gcd_u64(j, sub.q1()) != 1 && !(j == 1 && sub.q1() == 1) {
                continue;
            }
            let j = if sub.q1() == 1 { 0 } else { j };
            let h: Gf = self.red(f0 * j);
            // Evaluate sub.minpoly at h over self.
            let mut acc = GF_ZERO;
            for &c in sub.minpoly.iter().rev() {
                acc = self.mul(acc, h);
                acc = self.add(acc, self.from_int(c as i64));
            }
            if acc == GF_ZERO {
                // Found the canonical root; factor is f0 * j.
                return self.red(f0 * j) as u64;
            }
            if sub.q1() == 1 {
                break 'outer;
            }
        }
        unreachable!("subfield embedding must exist");
    }

    /// Apply an embedding factor from [`Fq::embedding_from`] to a log.
    #[inline]
    pub fn embed(&self, a: Gf, factor: u64) -> Gf {
        if a == GF_ZERO {
            GF_ZERO
        } else {
            self.red(a as u64 * (factor % self.q1()) % self.q1())
        }
    }

    /// Partial inverse of [`Fq::embed`]: the log in `sub` of an element of
    /// `self` that lies in the image of the embedding, or `None`.
    pub fn unembed(&self, a: Gf, sub: &Fq, factor: u64) -> Option<Gf> {
        if a == GF_ZERO {
            return Some(GF_ZERO);
        }
        let f0 = self.q1() / sub.q1();
        if a as u64 % f0 != 0 {
            return None;
        }
        let j = factor / f0; // factor = f0 * j with j invertible mod sub.q1()
        if sub.q1() == 1 {
            return Some(0);
        }
        let jinv = inv_mod(j % sub.q1(), sub.q1());
        Some(((a as u64 / f0) % sub.q1() * jinv % sub.q1()) as u32)
    }

    /// Square root for odd characteristic (both roots; empty if non-square).
    pub fn sqrts(&self, a: Gf) -> Vec<Gf> {
        self.roots_m(a, 2)
    }

    /// Solve `y² + b·y + c = 0` over this field; returns 0, 1 or 2 roots.
    pub fn solve_quadratic(&self, b: Gf, c: Gf) -> Vec<Gf> {
        if self.p != 2 {
            // Complete the square: y = z - b/2, z² = b²/4 - c.
            let half = self.inv(self.from_int(2));
            let hb = self.mul(b, half);
            let disc = self.sub(self.mul(hb, hb), c);
            if disc == GF_ZERO {
                return vec![self.neg(hb)];
            }
            self.sqrts(disc).into_iter().map(|r| self.sub(r, hb)).collect()
        } else {
            // Characteristic 2: fields here are tiny; scan.
            let mut out = Vec::new();
            for y in self.elements() {
                let v = self.add(self.add(self.mul(y, y), self.mul(b, y)), c);
                if v == GF_ZERO {
                    out.push(y);
                }
            }
            out
        }
    }

    /// Pretty-printer for diagnostics: the packed polynomial digits of `a`.
    pub fn packed(&self, a: Gf) -> u64 {
        if a == GF_ZERO {
            0
        } else {
            self.pow_packed[a as usize]
        }
    }
}

// ---- construction helpers (plain integer polynomials over F_p) ----

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of `a` modulo `m` (requires gcd(a, m) = 1).
fn inv_mod(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (mut t, mut new_t): (i128, i128) = (0, 1);
    let (mut r, mut new_r): (i128, i128) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let qq = r / new_r;
        (t, new_t) = (new_t, t - qq * new_t);
        (r, new_r) = (new_r, r - qq * new_r);
    }
    assert_eq!(r, 1, "inv_mod of non-unit");
    (((t % m as i128) + m as i128) % m as i128) as u64
}

fn pack(c: &[u32], p: u32) -> u64 {
    let mut v = 0u64;
    for &ci in c.iter().rev() {
        v = v * p as u64 + ci as u64;
    }
    v
}

/// Multiply two coefficient vectors mod p and the monic `minpoly`.
fn mul_mod(a: &[u32], b: &[u32], p: u32, minpoly: &[u32]) -> Vec<u32> {
    let k = minpoly.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai as u64 * bj as u64) % p as u64;
        }
    }
    // Reduce: x^k = -(minpoly[0..k]).
    for i in (k..prod.len()).rev() {
        let c = prod[i] % p as u64;
        if c == 0 {
            continue;
        }
        prod[i] = 0;
        for j in 0..k {
            let m = minpoly[j] as u64 % p as u64;
            // x^i = x^{i-k} * x^k = x^{i-k} * (-Σ m_j x^j)
            prod[i - k + j] = (prod[i - k + j] + c * (p as u64 - m) % p as u64) % p as u64;
        }
    }
    (0..k).map(|i| (prod[i] % p as u64) as u32).collect()
}

fn poly_pow_x_p(p: u32, minpoly: &[u32], base: &[u32]) -> Vec<u32> {
    // base^p mod minpoly by square-and-multiply.
    let k = minpoly.len() - 1;
    let mut result = vec![0u32; k];
    result[0] = 1;
    let mut acc = base.to_vec();
    let mut e = p;
    while e > 0 {
        if e & 1 == 1 {
            result = mul_mod(&result, &acc, p, minpoly);
        }
        acc = mul_mod(&acc, &acc, p, minpoly);
        e >>= 1;
    }
    result
}

fn poly_gcd_fp(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let trim = |v: &[u32]| {
        let mut v = v.to_vec();
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    };
    let (mut a, mut b) = (trim(a), trim(b));
    while !b.is_empty() {
        // a mod b
        let lead_inv = inv_mod(*b.last().unwrap() as u64, p as u64) as u32;
        while a.len() >= b.len() && !a.is_empty() {
            let shift = a.len() - b.len();
            let c = (*a.last().unwrap() as u64 * lead_inv as u64 % p as u64) as u32;
            for (i, &bi) in b.iter().enumerate() {
                let sub = c as u64 * bi as u64 % p as u64;
                a[shift + i] = ((a[shift + i] as u64 + p as u64 - sub) % p as u64) as u32;
            }
            a = trim(&a);
            if a.len() < b.len() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
        b = trim(&b);
    }
    a
}

/// Test irreducibility of a monic degree-k polynomial over F_p.
fn is_irreducible(p: u32, f: &[u32]) -> bool {
    let k = f.len() - 1;
    if k == 1 {
        return true;
    }
    if f[0] == 0 {
        return false; // divisible by x
    }
    // x^{p^i} mod f for i = 1..k; require gcd(x^{p^i} - x, f) = 1 for i <= k/2
    // and x^{p^k} = x.
    let mut xp = vec![0u32; k];
    if k > 1 {
        xp[1] = 1;
    }
    for i in 1..=k {
        xp = poly_pow_x_p(p, f, &xp);
        if i <= k / 2 {
            let mut diff = xp.clone();
            // subtract x
            if diff.len() > 1 {
                diff[1] = ((diff[1] as u64 + p as u64 - 1) % p as u64) as u32;
            }
            let g = poly_gcd_fp(&diff, f, p);
            if g.len() > 1 {
                return false;
            }
        }
    }
    // x^{p^k} == x
    let mut want = vec![0u32; k];
    if k > 1 {
        want[1] = 1;
    }
    xp == want
}

/// First monic irreducible polynomial of degree k over F_p, lexicographically
/// by packed low-order coefficients.
fn first_irreducible(p: u32, k: u32) -> Vec<u32> {
    if k == 1 {
        // x itself is fine as a placeholder; the generator search below picks
        // a primitive root and the minpoly is x - g.
        return vec![0, 1];
    }
    let k = k as usize;
    let total = (p as u64).pow(k as u32);
    for code in 0..total {
        let mut f = Vec::with_capacity(k + 1);
        let mut c = code;
        for _ in 0..k {
            f.push((c % p as u64) as u32);
            c /= p as u64;
        }
        f.push(1);
        if is_irreducible(p, &f) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree");
}

fn factor_u64(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Find a multiplicative generator; for k = 1 returns the least primitive
/// root (as a constant vector), and rewrites `minpoly` implicitly via caller.
fn find_generator(p: u32, k: u32, q: u64, minpoly: &[u32]) -> Vec<u32> {
    let k = k as usize;
    let primes = factor_u64(q - 1);
    let is_gen = |cand: &[u32]| -> bool {
        for &r in &primes {
            // cand^{(q-1)/r} == 1?
            let mut e = (q - 1) / r;
            let mut acc = vec![0u32; k.max(1)];
            acc[0] = 1;
            let mut base = cand.to_vec();
            while e > 0 {
                if e & 1 == 1 {
                    acc = mul_mod(&acc, &base, p, minpoly);
                }
                base = mul_mod(&base, &base, p, minpoly);
                e >>= 1;
            }
            let mut one = vec![0u32; k.max(1)];
            one[0] = 1;
            if acc == one {
                return false;
            }
        }
        true
    };
    for code in 1..q {
        let mut cand = Vec::with_capacity(k);
        let mut c = code;
        for _ in 0..k.max(1) {
            cand.push((c % p as u64) as u32);
            c /= p as u64;
        }
        if is_gen(&cand) {
            return cand;
        }
    }
    unreachable!("multiplicative group of a finite field is cyclic");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f3_basic() {
        let f = Fq::new(3, 1);
        assert_eq!(f.q, 3);
        let one = GF_ONE;
        let two = f.from_int(2);
        assert_eq!(f.add(one, one), two);
        assert_eq!(f.add(two, one), GF_ZERO);
        assert_eq!(f.mul(two, two), one);
        assert_eq!(f.neg(one), two);
    }

    #[test]
    fn f9_and_embeddings() {
        let f3 = Fq::new(3, 1);
        let f9 = Fq::new(3, 2);
        let f729 = Fq::new(3, 6);
        let e39 = f9.embedding_from(&f3);
        let e9_729 = f729.embedding_from(&f9);
        // Embedding is a ring hom on a sample of pairs.
        for a in f3.elements() {
            for b in f3.elements() {
                let s = f3.add(a, b);
                let m = f3.mul(a, b);
                assert_eq!(f9.embed(s, e39), f9.add(f9.embed(a, e39), f9.embed(b, e39)));
                assert_eq!(f9.embed(m, e39), f9.mul(f9.embed(a, e39), f9.embed(b, e39)));
            }
        }
        // Composition lands in the right subfield and is additive.
        for a in f9.elements().take(20) {
            for b in f9.elements().take(20) {
                let s = f9.add(a, b);
                assert_eq!(
                    f729.embed(s, e9_729),
                    f729.add(f729.embed(a, e9_729), f729.embed(b, e9_729))
                );
            }
        }
        // Unembed round-trips.
        for a in f9.elements() {
            let big = f729.embed(a, e9_729);
            assert_eq!(f729.unembed(big, &f9, e9_729), Some(a));
        }
    }

    #[test]
    fn roots_and_quadratics() {
        let f9 = Fq::new(3, 2);
        // -1 is a square in F_9.
        let minus1 = f9.from_int(-1);
        let r = f9.sqrts(minus1);
        assert_eq!(r.len(), 2);
        for root in r {
            assert_eq!(f9.mul(root, root), minus1);
        }
        // Quadratic solver agrees with direct scan.
        for b in f9.elements() {
            for c in f9.elements() {
                let mut want: Vec<Gf> = f9
                    .elements()
                    .filter(|&y| f9.add(f9.add(f9.mul(y, y), f9.mul(b, y)), c) == GF_ZERO)
                    .collect();
                let mut got = f9.solve_quadratic(b, c);
                want.sort_unstable();
                got.sort_unstable();
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn frobenius_scaling() {
        let f = Fq::new(3, 7);
        for a in f.elements().take(50) {
            let fr = f.frob(a, 1);
            assert_eq!(fr, f.pow_u(a, 3));
            assert_eq!(f.frob_inv(fr, 1), a);
        }
    }

    #[test]
    fn char2_field() {
        let f = Fq::new(2, 6);
        assert_eq!(f.q, 64);
        let a = 5u32;
        assert_eq!(f.add(a, a), GF_ZERO);
        let roots = f.solve_quadratic(GF_ONE, GF_ONE); // y² + y + 1 over F_64
        for y in &roots {
            let v = f.add(f.add(f.mul(*y, *y), *y), GF_ONE);
            assert_eq!(v, GF_ZERO);
        }
        assert_eq!(roots.len(), 2); // F_4 ⊂ F_64 contains both cube roots of 1
    }
}
