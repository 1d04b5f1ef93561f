//! Coefficient-field abstraction, generic truncated series, and small dense
//! linear algebra.
//!
//! The curve layer (group law, local expansions, Riemann–Roch solves) is
//! written once against the [`Coeffs`] trait and instantiated over
//! * exact Zech fields ([`crate::field::Fq`], elements [`Gf`]),
//! * analytic scalars ([`crate::series::ScalarCtx`], elements `Scalar`),
//! * the exact function field of the curve (added by the lattice layer).
//!
//! "Zero" for analytic scalars means *apparent* zero — every known
//! coefficient vanishes — so pivot searches only ever divide by elements
//! that are visibly nonzero.

use crate::error::{Error, Result};
use crate::field::{Fq, Gf, GF_ZERO};
use crate::series::{Scalar, ScalarCtx};

/// A coefficient field, addressed through a context handle.
pub trait Coeffs {
    type El: Clone + std::fmt::Debug;
    fn zero(&self) -> Self::El;
    fn one(&self) -> Self::El;
    fn from_int(&self, c: i64) -> Self::El;
    fn is_zero(&self, a: &Self::El) -> bool;
    fn add(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn neg(&self, a: &Self::El) -> Self::El;
    fn mul(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn inv(&self, a: &Self::El) -> Result<Self::El>;

    fn sub(&self, a: &Self::El, b: &Self::El) -> Self::El {
        self.add(a, &self.neg(b))
    }
    fn div(&self, a: &Self::El, b: &Self::El) -> Result<Self::El> {
        Ok(self.mul(a, &self.inv(b)?))
    }
    fn eq(&self, a: &Self::El, b: &Self::El) -> bool {
        self.is_zero(&self.sub(a, b))
    }
}

impl Coeffs for Fq {
    type El = Gf;
    fn zero(&self) -> Gf {
        GF_ZERO
    }
    fn one(&self) -> Gf {
        0
    }
    fn from_int(&self, c: i64) -> Gf {
        Fq::from_int(self, c)
    }
    fn is_zero(&self, a: &Gf) -> bool {
        *a == GF_ZERO
    }
    fn add(&self, a: &Gf, b: &Gf) -> Gf {
        Fq::add(self, *a, *b)
    }
    fn neg(&self, a: &Gf) -> Gf {
        Fq::neg(self, *a)
    }
    fn mul(&self, a: &Gf, b: &Gf) -> Gf {
        Fq::mul(self, *a, *b)
    }
    fn inv(&self, a: &Gf) -> Result<Gf> {
        if *a == GF_ZERO {
            return Err(Error::DivisionByApparentZero { prec: -1 });
        }
        Ok(Fq::inv(self, *a))
    }
}

impl Coeffs for ScalarCtx {
    type El = Scalar;
    fn zero(&self) -> Scalar {
        ScalarCtx::zero(self)
    }
    fn one(&self) -> Scalar {
        ScalarCtx::one(self)
    }
    fn from_int(&self, c: i64) -> Scalar {
        ScalarCtx::from_int(self, c)
    }
    fn is_zero(&self, a: &Scalar) -> bool {
        self.is_apparent_zero(a)
    }
    fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        ScalarCtx::add(self, a, b)
    }
    fn neg(&self, a: &Scalar) -> Scalar {
        ScalarCtx::neg(self, a)
    }
    fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        ScalarCtx::mul(self, a, b)
    }
    fn inv(&self, a: &Scalar) -> Result<Scalar> {
        ScalarCtx::inv(self, a)
    }
}

// ---------------------------------------------------------------------------
// Truncated Laurent series over a generic coefficient field.
// ---------------------------------------------------------------------------

/// Truncated Laurent series `Σ_{k≥v} c_{k-v} u^k`, known for exponents
/// `v .. v + c.len()`. Unlike [`Scalar`], this type tracks a plain window
/// length instead of an arithmetic precision model: it is the *geometric*
/// expansion tool, with all precision semantics delegated to its coefficients.
#[derive(Debug, Clone)]
pub struct Ser<El> {
    pub v: i64,
    pub c: Vec<El>,
}

impl<El> Ser<El> {
    /// Relative truncation length (number of known coefficients).
    pub fn len(&self) -> usize {
        self.c.len()
    }
    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }
    /// One-past-the-last known exponent.
    pub fn end(&self) -> i64 {
        self.v + self.c.len() as i64
    }
}

/// Constant series with the given window length.
pub fn ser_const<C: Coeffs>(cf: &C, x: C::El, len: usize) -> Ser<C::El> {
    let mut c = vec![cf.zero(); len];
    if len > 0 {
        c[0] = x;
    }
    Ser { v: 0, c }
}

/// The uniformizer `u` as a series of window length `len`.
pub fn ser_uni<C: Coeffs>(cf: &C, len: usize) -> Ser<C::El> {
    let mut c = vec![cf.zero(); len];
    if len > 0 {
        c[0] = cf.one();
    }
    Ser { v: 1, c }
}

pub fn ser_zero<C: Coeffs>(cf: &C, v: i64, len: usize) -> Ser<C::El> {
    Ser { v, c: vec![cf.zero(); len] }
}

/// Coefficient at absolute exponent `k` (zero inside the window's left pad,
/// `None` beyond the known end).
pub fn ser_coeff<'a, C: Coeffs>(cf: &C, a: &'a Ser<C::El>, k: i64) -> Option<C::El> {
    if k >= a.end() {
        return None;
    }
    if k < a.v {
        return Some(cf.zero());
    }
    Some(a.c[(k - a.v) as usize].clone())
}

/// Index of the first visibly nonzero coefficient, as an absolute exponent.
pub fn ser_valuation<C: Coeffs>(cf: &C, a: &Ser<C::El>) -> Option<i64> {
    a.c.iter().position(|x| !cf.is_zero(x)).map(|i| a.v + i as i64)
}

pub fn ser_add<C: Coeffs>(cf: &C, a: &Ser<C::El>, b: &Ser<C::El>) -> Ser<C::El> {
    if a.c.is_empty() {
        return b.clone();
    }
    if b.c.is_empty() {
        return a.clone();
    }
    let v = a.v.min(b.v);
    let end = a.end().min(b.end());
    let len = (end - v).max(0) as usize;
    let mut c = vec![cf.zero(); len];
    for (slot, x) in c.iter_mut().enumerate() {
        let k = v + slot as i64;
        let av = ser_coeff(cf, a, k).unwrap_or_else(|| cf.zero());
        let bv = ser_coeff(cf, b, k).unwrap_or_else(|| cf.zero());
        *x = cf.add(&av, &bv);
    }
    Ser { v, c }
}

pub fn ser_neg<C: Coeffs>(cf: &C, a: &Ser<C::El>) -> Ser<C::El> {
    Ser { v: a.v, c: a.c.iter().map(|x| cf.neg(x)).collect() }
}

pub fn ser_sub<C: Coeffs>(cf: &C, a: &Ser<C::El>, b: &Ser<C::El>) -> Ser<C::El> {
    ser_add(cf, a, &ser_neg(cf, b))
}

pub fn ser_scale<C: Coeffs>(cf: &C, a: &Ser<C::El>, x: &C::El) -> Ser<C::El> {
    Ser { v: a.v, c: a.c.iter().map(|ci| cf.mul(ci, x)).collect() }
}

/// Multiply by `u^k`.
pub fn ser_shift<El: Clone>(a: &Ser<El>, k: i64) -> Ser<El> {
    Ser { v: a.v + k, c: a.c.clone() }
}

pub fn ser_mul<C: Coeffs>(cf: &C, a: &Ser<C::El>, b: &Ser<C::El>) -> Ser<C::El> {
    if a.c.is_empty() || b.c.is_empty() {
        return Ser { v: a.v + b.v, c: vec![] };
    }
    // Knowing a to relative order la and b to lb bounds the product's known
    // relative order by min(la, lb) (tails start interfering there).
    let len = a.len().min(b.len());
    let v = a.v + b.v;
    let mut c = vec![cf.zero(); len];
    for (i, ai) in a.c.iter().enumerate() {
        if i >= len {
            break;
        }
        if cf.is_zero(ai) {
            continue;
        }
        for (j, bj) in b.c.iter().enumerate() {
            if i + j >= len {
                break;
            }
            let t = cf.mul(ai, bj);
            c[i + j] = cf.add(&c[i + j], &t);
        }
    }
    Ser { v, c }
}

/// Inverse; the first *known-nonzero* coefficient leads. Apparent-zero
/// prefixes are treated as exact zeros (they are, everywhere this is used on
/// analytic coefficients — leading terms of our expansions are exact units).
pub fn ser_inv<C: Coeffs>(cf: &C, a: &Ser<C::El>) -> Result<Ser<C::El>> {
    let val = ser_valuation(cf, a).ok_or(Error::DivisionByApparentZero { prec: -1 })?;
    let off = (val - a.v) as usize;
    let lead = &a.c[off];
    let linv = cf.inv(lead)?;
    let n = a.c.len() - off;
    let mut inv = vec![cf.zero(); n];
    inv[0] = linv.clone();
    for m in 1..n {
        let mut acc = cf.zero();
        for i in 1..=m {
            let ai = &a.c[off + i];
            if cf.is_zero(ai) {
                continue;
            }
            acc = cf.add(&acc, &cf.mul(ai, &inv[m - i]));
        }
        inv[m] = cf.neg(&cf.mul(&acc, &linv));
    }
    Ok(Ser { v: -val, c: inv })
}

pub fn ser_div<C: Coeffs>(cf: &C, a: &Ser<C::El>, b: &Ser<C::El>) -> Result<Ser<C::El>> {
    Ok(ser_mul(cf, a, &ser_inv(cf, b)?))
}

/// Truncate to relative length `len`.
pub fn ser_trunc<El: Clone>(a: &Ser<El>, len: usize) -> Ser<El> {
    let mut c = a.c.clone();
    c.truncate(len);
    Ser { v: a.v, c }
}

/// Formal derivative d/du.
pub fn ser_derivative<C: Coeffs>(cf: &C, a: &Ser<C::El>) -> Ser<C::El> {
    if a.c.is_empty() {
        return a.clone();
    }
    let mut c = Vec::with_capacity(a.c.len());
    for (i, ai) in a.c.iter().enumerate() {
        let k = a.v + i as i64;
        c.push(cf.mul(ai, &cf.from_int(k)));
    }
    // d/du(c_v u^v) = v c_v u^{v-1}: shift down by one.
    Ser { v: a.v - 1, c }
}

/// Evaluate a dense polynomial (low-to-high) at a series argument.
pub fn ser_eval_poly<C: Coeffs>(cf: &C, poly: &[C::El], at: &Ser<C::El>) -> Ser<C::El> {
    let len = at.len();
    let mut acc = ser_zero(cf, 0, len);
    for c in poly.iter().rev() {
        acc = ser_mul(cf, &acc, at);
        acc = ser_add(cf, &acc, &ser_const(cf, c.clone(), len));
    }
    acc
}

// ---------------------------------------------------------------------------
// Dense polynomials (low-to-high coefficient vectors) over a generic field.
// ---------------------------------------------------------------------------

/// Drop visibly-zero leading coefficients in place.
pub fn pv_trim<C: Coeffs>(cf: &C, a: &mut Vec<C::El>) {
    while let Some(last) = a.last() {
        if cf.is_zero(last) {
            a.pop();
        } else {
            break;
        }
    }
}

/// Degree, `None` for the (visible) zero polynomial.
pub fn pv_deg<C: Coeffs>(cf: &C, a: &[C::El]) -> Option<usize> {
    a.iter().rposition(|x| !cf.is_zero(x))
}

pub fn pv_add<C: Coeffs>(cf: &C, a: &[C::El], b: &[C::El]) -> Vec<C::El> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_else(|| cf.zero());
        let y = b.get(i).cloned().unwrap_or_else(|| cf.zero());
        out.push(cf.add(&x, &y));
    }
    pv_trim(cf, &mut out);
    out
}

pub fn pv_neg<C: Coeffs>(cf: &C, a: &[C::El]) -> Vec<C::El> {
    a.iter().map(|x| cf.neg(x)).collect()
}

pub fn pv_sub<C: Coeffs>(cf: &C, a: &[C::El], b: &[C::El]) -> Vec<C::El> {
    pv_add(cf, a, &pv_neg(cf, b))
}

pub fn pv_scale<C: Coeffs>(cf: &C, a: &[C::El], x: &C::El) -> Vec<C::El> {
    let mut out: Vec<C::El> = a.iter().map(|c| cf.mul(c, x)).collect();
    pv_trim(cf, &mut out);
    out
}

pub fn pv_mul<C: Coeffs>(cf: &C, a: &[C::El], b: &[C::El]) -> Vec<C::El> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![cf.zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if cf.is_zero(ai) {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            let t = cf.mul(ai, bj);
            out[i + j] = cf.add(&out[i + j], &t);
        }
    }
    pv_trim(cf, &mut out);
    out
}

/// Evaluate at a field element (Horner).
pub fn pv_eval<C: Coeffs>(cf: &C, a: &[C::El], x: &C::El) -> C::El {
    let mut acc = cf.zero();
    for c in a.iter().rev() {
        acc = cf.add(&cf.mul(&acc, x), c);
    }
    acc
}

/// Division with remainder: `a = q·b + r`, `deg r < deg b`. Fails only
/// when `b` is zero or its leading coefficient is not invertible.
pub fn pv_divrem<C: Coeffs>(
    cf: &C,
    a: &[C::El],
    b: &[C::El],
) -> Result<(Vec<C::El>, Vec<C::El>)> {
    let db = pv_deg(cf, b).ok_or(Error::DivisionByApparentZero { prec: -1 })?;
    let lead_inv = cf.inv(&b[db])?;
    let mut r: Vec<C::El> = a.to_vec();
    pv_trim(cf, &mut r);
    if r.len() <= db {
        return Ok((vec![], r));
    }
    let mut q = vec![cf.zero(); r.len() - db];
    while let Some(dr) = pv_deg(cf, &r) {
        if dr < db {
            break;
        }
        let c = cf.mul(&r[dr], &lead_inv);
        let k = dr - db;
        for (j, bj) in b.iter().enumerate().take(db) {
            let t = cf.mul(&c, bj);
            r[k + j] = cf.add(&r[k + j], &cf.neg(&t));
        }
        r[dr] = cf.zero();
        q[k] = cf.add(&q[k], &c);
    }
    pv_trim(cf, &mut r);
    pv_trim(cf, &mut q);
    Ok((q, r))
}

// ---------------------------------------------------------------------------
// Dense linear algebra over a generic coefficient field.
// ---------------------------------------------------------------------------

/// Basis of the right nullspace of the `rows × ncols` matrix, via Gaussian
/// elimination with visible-nonzero pivoting. Deterministic: pivots scan
/// columns left-to-right, rows top-down; free columns produce basis vectors
/// in column order, each normalized with a 1 in its free slot.
pub fn nullspace<C: Coeffs>(
    cf: &C,
    mut rows: Vec<Vec<C::El>>,
    ncols: usize,
) -> Result<Vec<Vec<C::El>>> {
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut r = 0usize;
    for col in 0..ncols {
        // find pivot
        let mut sel = None;
        for (i, row) in rows.iter().enumerate().skip(r) {
            if !cf.is_zero(&row[col]) {
                sel = Some(i);
                break;
            }
        }
        let Some(sel) = sel else { continue };
        rows.swap(r, sel);
        let pinv = cf.inv(&rows[r][col])?;
        for x in rows[r].iter_mut() {
            *x = cf.mul(x, &pinv);
        }
        let prow = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || cf.is_zero(&row[col]) {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(prow.iter()) {
                *x = cf.sub(x, &cf.mul(&f, p));
            }
        }
        pivot_of_col[col] = Some(r);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivot_of_col[free].is_some() {
            continue;
        }
        let mut vec_out = vec![cf.zero(); ncols];
        vec_out[free] = cf.one();
        for (col, piv) in pivot_of_col.iter().enumerate() {
            if let Some(pr) = piv {
                vec_out[col] = cf.neg(&rows[*pr][free]);
            }
        }
        basis.push(vec_out);
    }
    Ok(basis)
}

/// Solve `A x = b` (unique solution expected). Errors with
/// [`Error::SingularLinearSystem`] when the visible rank is deficient.
pub fn solve<C: Coeffs>(
    cf: &C,
    a: &[Vec<C::El>],
    b: &[C::El],
    context: &'static str,
) -> Result<Vec<C::El>> {
    let n = a.len();
    let ncols = if n == 0 { 0 } else { a[0].len() };
    let mut rows: Vec<Vec<C::El>> = a
        .iter()
        .zip(b.iter())
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for col in 0..ncols {
        let mut sel = None;
        for (i, row) in rows.iter().enumerate().skip(r) {
            if !cf.is_zero(&row[col]) {
                sel = Some(i);
                break;
            }
        }
        let Some(sel) = sel else { continue };
        rows.swap(r, sel);
        let pinv = cf.inv(&rows[r][col])?;
        for x in rows[r].iter_mut() {
            *x = cf.mul(x, &pinv);
        }
        let prow = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || cf.is_zero(&row[col]) {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(prow.iter()) {
                *x = cf.sub(x, &cf.mul(&f, p));
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    if pivots.len() < ncols {
        return Err(Error::SingularLinearSystem { context });
    }
    let mut x = vec![cf.zero(); ncols];
    for (rank_row, col) in pivots.iter().enumerate() {
        x[*col] = rows[rank_row][ncols].clone();
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fq;

    #[test]
    fn series_inverse_roundtrip() {
        let f = Fq::new(3, 1);
        let fq: &Fq = &f;
        // a = u^{-1}(1 + u + 2u³)
        let a = Ser { v: -1, c: vec![0u32, 0, GF_ZERO, f.from_int(2), GF_ZERO, GF_ZERO] };
        let inv = ser_inv(fq, &a).unwrap();
        let prod = ser_mul(fq, &a, &inv);
        assert_eq!(ser_valuation(fq, &prod), Some(0));
        assert_eq!(prod.c[0], 0); // leading 1
        for k in 1..prod.len() as i64 {
            assert_eq!(ser_coeff(fq, &prod, prod.v + k), Some(GF_ZERO));
        }
    }

    #[test]
    fn nullspace_small() {
        let f = Fq::new(3, 1);
        let fq: &Fq = &f;
        // x + y + z = 0, x + 2y + 0z = 0 over F_3 → one-dimensional kernel.
        let rows = vec![
            vec![f.from_int(1), f.from_int(1), f.from_int(1)],
            vec![f.from_int(1), f.from_int(2), GF_ZERO],
        ];
        let basis = nullspace(fq, rows.clone(), 3).unwrap();
        assert_eq!(basis.len(), 1);
        let v = &basis[0];
        for row in &rows {
            let mut acc = GF_ZERO;
            for (a, x) in row.iter().zip(v.iter()) {
                acc = f.add(acc, f.mul(*a, *x));
            }
            assert_eq!(acc, GF_ZERO);
        }
    }
}
