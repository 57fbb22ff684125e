//! Exact arithmetic in cyclotomic integer rings Z[w_N], Galois automorphisms,
//! Gauss periods, and high-precision complex embeddings.
//!
//! Elements are stored on the full power basis w_N^0 .. w_N^{N-1}, i.e. as
//! integer vectors in Z[x]/(x^N - 1). On this representation multiplication
//! is cyclic convolution and a Galois automorphism w -> w^k is a pure index
//! map j -> j*k mod N, which the code constructions use constantly. Equality
//! and subring projection reduce to the canonical phi(N)-dimensional basis by
//! taking the remainder modulo the N-th cyclotomic polynomial.
//!
//! Coefficients are i128 with checked arithmetic. Worst-case growth for the
//! determinant work done here (degree <= 6 products of coefficient-bounded
//! elements, conductors <= a few hundred) stays far below the i128 range.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numtheory::{euler_phi, gcd, lcm, EisensteinInt, GaussianInt};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CycError {
    #[error("galois exponent {k} is not a unit mod {n}")]
    NonUnitExponent { k: u64, n: u64 },
    #[error("n1 = {n1} does not divide phi({pe}) = {phi}")]
    BadSubgroupIndex { n1: u64, pe: u64, phi: u64 },
    #[error("matrix is not square or is empty")]
    BadMatrix,
}

fn checked_add(a: i128, b: i128) -> i128 {
    a.checked_add(b).expect("cyclotomic coefficient overflow (add)")
}

fn checked_mul(a: i128, b: i128) -> i128 {
    a.checked_mul(b).expect("cyclotomic coefficient overflow (mul)")
}

/// Coefficients of the N-th cyclotomic polynomial, ascending degree.
/// Computed as (x^N - 1) / prod_{d | N, d < N} Phi_d and memoized.
pub fn cyclotomic_polynomial(n: u32) -> Vec<i128> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Vec<i128>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    let poly = if n == 1 {
        vec![-1, 1]
    } else {
        // x^N - 1
        let mut num = vec![0i128; n as usize + 1];
        num[0] = -1;
        num[n as usize] = 1;
        for d in 1..n {
            if n % d == 0 {
                num = poly_div_exact(&num, &cyclotomic_polynomial(d));
            }
        }
        num
    };
    cache.lock().unwrap().insert(n, poly.clone());
    poly
}

/// Exact division of integer polynomials (ascending coefficients), panicking
/// if the division leaves a remainder. Divisors here are monic up to sign.
fn poly_div_exact(num: &[i128], den: &[i128]) -> Vec<i128> {
    let dd = den.len() - 1;
    let lead = den[dd];
    assert!(lead == 1 || lead == -1, "divisor must be monic up to sign");
    let mut rem = num.to_vec();
    let nd = rem.len() - 1;
    if nd < dd {
        assert!(rem.iter().all(|&c| c == 0));
        return vec![0];
    }
    let mut quot = vec![0i128; nd - dd + 1];
    for k in (0..=nd - dd).rev() {
        let c = rem[k + dd] / lead;
        quot[k] = c;
        if c != 0 {
            for j in 0..=dd {
                rem[k + j] = checked_add(rem[k + j], -checked_mul(c, den[j]));
            }
        }
    }
    assert!(rem.iter().all(|&c| c == 0), "inexact polynomial division");
    quot
}

/// Remainder of `poly` modulo the monic `modulus` (both ascending).
fn poly_rem(poly: &[i128], modulus: &[i128]) -> Vec<i128> {
    let dd = modulus.len() - 1;
    let mut rem = poly.to_vec();
    if rem.len() <= dd {
        rem.resize(dd, 0);
        return rem;
    }
    for k in (dd..rem.len()).rev() {
        let c = rem[k];
        if c != 0 {
            rem[k] = 0;
            for j in 0..dd {
                rem[k - dd + j] = checked_add(rem[k - dd + j], -checked_mul(c, modulus[j]));
            }
        }
    }
    rem.truncate(dd);
    rem
}

/// An exact element of Z[w_N] on the full power basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CyclotomicInt {
    pub conductor: u32,
    pub coeffs: Vec<i128>,
}

impl CyclotomicInt {
    pub fn zero(conductor: u32) -> Self {
        CyclotomicInt { conductor, coeffs: vec![0; conductor as usize] }
    }

    pub fn one(conductor: u32) -> Self {
        Self::integer(conductor, 1)
    }

    pub fn integer(conductor: u32, v: i128) -> Self {
        let mut x = Self::zero(conductor);
        x.coeffs[0] = v;
        x
    }

    /// w_N^j
    pub fn root_power(conductor: u32, j: u64) -> Self {
        let mut x = Self::zero(conductor);
        x.coeffs[(j % conductor as u64) as usize] = 1;
        x
    }

    pub fn from_coeffs(conductor: u32, coeffs: Vec<i128>) -> Self {
        assert_eq!(coeffs.len(), conductor as usize);
        CyclotomicInt { conductor, coeffs }
    }

    /// a + b*i as an element of Z[w_N]; requires 4 | N.
    pub fn from_gaussian(conductor: u32, g: GaussianInt) -> Self {
        assert_eq!(conductor % 4, 0, "Q(i) needs 4 | conductor");
        let mut x = Self::zero(conductor);
        x.coeffs[0] = g.re;
        x.coeffs[(conductor / 4) as usize] = checked_add(x.coeffs[(conductor / 4) as usize], g.im);
        x
    }

    /// a + c*w3 as an element of Z[w_N]; requires 3 | N.
    pub fn from_eisenstein(conductor: u32, e: EisensteinInt) -> Self {
        assert_eq!(conductor % 3, 0, "Q(w3) needs 3 | conductor");
        let mut x = Self::zero(conductor);
        x.coeffs[0] = e.a;
        x.coeffs[(conductor / 3) as usize] = checked_add(x.coeffs[(conductor / 3) as usize], e.c);
        x
    }

    /// Re-index into the larger conductor `target` (exact; needs N | target).
    pub fn lift_to(&self, target: u32) -> Self {
        assert_eq!(target % self.conductor, 0, "can only lift to a multiple conductor");
        let scale = (target / self.conductor) as usize;
        let mut out = Self::zero(target);
        for (j, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                out.coeffs[j * scale] = c;
            }
        }
        out
    }

    fn binop(a: &Self, b: &Self, f: impl Fn(i128, i128) -> i128) -> Self {
        let (a, b) = Self::coerce(a, b);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| f(x, y)).collect();
        CyclotomicInt { conductor: a.conductor, coeffs }
    }

    /// Lift both operands to the lcm conductor. The compositum fields used by
    /// the constructions all live inside Q(w_lcm), so this is exact.
    pub fn coerce(a: &Self, b: &Self) -> (Self, Self) {
        if a.conductor == b.conductor {
            return (a.clone(), b.clone());
        }
        let l = lcm(a.conductor as u64, b.conductor as u64) as u32;
        (a.lift_to(l), b.lift_to(l))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::binop(self, other, checked_add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::binop(self, other, |x, y| checked_add(x, -y))
    }

    pub fn neg(&self) -> Self {
        CyclotomicInt {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|&c| -c).collect(),
        }
    }

    pub fn scale(&self, k: i128) -> Self {
        CyclotomicInt {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|&c| checked_mul(c, k)).collect(),
        }
    }

    /// Cyclic convolution: exact multiplication in Z[x]/(x^N - 1).
    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = Self::coerce(self, other);
        let n = a.conductor as usize;
        let mut out = vec![0i128; n];
        for (i, &ai) in a.coeffs.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.coeffs.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                let k = i + j;
                let k = if k >= n { k - n } else { k };
                out[k] = checked_add(out[k], checked_mul(ai, bj));
            }
        }
        CyclotomicInt { conductor: a.conductor, coeffs: out }
    }

    /// Canonical coefficients on the degree < phi(N) basis (remainder mod
    /// Phi_N). Two representations are equal as algebraic numbers iff their
    /// canonical vectors agree; reduction is idempotent by construction.
    pub fn canonical(&self) -> Vec<i128> {
        poly_rem(&self.coeffs, &cyclotomic_polynomial(self.conductor))
    }

    pub fn is_zero(&self) -> bool {
        if self.coeffs.iter().all(|&c| c == 0) {
            return true;
        }
        self.canonical().iter().all(|&c| c == 0)
    }

    /// Complex embedding at w_N = exp(+2*pi*i/N), the fixed identity
    /// embedding used for all numeric code matrices.
    pub fn embed(&self) -> Complex64 {
        let n = self.conductor as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                let th = 2.0 * std::f64::consts::PI * j as f64 / n;
                acc += Complex64::new(th.cos(), th.sin()) * c as f64;
            }
        }
        acc
    }

    /// Exact recognition of elements of Z[i] inside Z[w_N].
    pub fn project_to_gaussian(&self) -> Option<GaussianInt> {
        if self.conductor % 4 != 0 {
            return self.project_to_integer().map(|v| GaussianInt::new(v, 0));
        }
        let i_rep = Self::root_power(self.conductor, self.conductor as u64 / 4);
        self.project_onto_pair(&i_rep).map(|(a, b)| GaussianInt::new(a, b))
    }

    /// Exact recognition of elements of Z[w3] inside Z[w_N].
    pub fn project_to_eisenstein(&self) -> Option<EisensteinInt> {
        if self.conductor % 3 != 0 {
            return self.project_to_integer().map(|v| EisensteinInt::new(v, 0));
        }
        let w3_rep = Self::root_power(self.conductor, self.conductor as u64 / 3);
        self.project_onto_pair(&w3_rep).map(|(a, c)| EisensteinInt::new(a, c))
    }

    pub fn project_to_integer(&self) -> Option<i128> {
        let c = self.canonical();
        if c[1..].iter().all(|&v| v == 0) {
            Some(c[0])
        } else {
            None
        }
    }

    /// Solve self = a * 1 + b * gen exactly over Z, if possible.
    fn project_onto_pair(&self, gen: &Self) -> Option<(i128, i128)> {
        let c = self.canonical();
        let cg = gen.canonical();
        // some coordinate >= 1 of the generator is nonzero (it is irrational)
        let j = (1..cg.len()).find(|&j| cg[j] != 0)?;
        let b_num = c[j];
        if b_num % cg[j] != 0 {
            return None;
        }
        let b = b_num / cg[j];
        let a = checked_add(c[0], -checked_mul(b, cg[0]));
        // verify the full vector equality
        for k in 0..c.len() {
            let want = if k == 0 { a } else { 0 } + checked_mul(b, cg[k]);
            if c[k] != want {
                return None;
            }
        }
        Some((a, b))
    }
}

impl PartialEq for CyclotomicInt {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = Self::coerce(self, other);
        a.canonical() == b.canonical()
    }
}

impl Eq for CyclotomicInt {}

/// The automorphism w_N -> w_N^k of Q(w_N), gcd(k, N) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaloisAuto {
    pub conductor: u32,
    pub exponent: u64,
}

impl GaloisAuto {
    pub fn new(conductor: u32, exponent: u64) -> Result<Self, CycError> {
        let k = exponent % conductor as u64;
        if gcd(k, conductor as u64) != 1 {
            return Err(CycError::NonUnitExponent { k, n: conductor as u64 });
        }
        Ok(GaloisAuto { conductor, exponent: k })
    }

    /// Composition: applying `self` after `other` multiplies exponents mod N.
    pub fn compose(self, other: GaloisAuto) -> Result<Self, CycError> {
        assert_eq!(self.conductor, other.conductor);
        GaloisAuto::new(
            self.conductor,
            (self.exponent as u128 * other.exponent as u128 % self.conductor as u128) as u64,
        )
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut acc = GaloisAuto::new(self.conductor, 1).unwrap();
        let mut base = self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(base).unwrap();
            }
            base = base.compose(base).unwrap();
            e >>= 1;
        }
        acc
    }

    /// Image of x under w -> w^k: a pure exponent permutation on the full
    /// power basis (x is lifted first if its conductor strictly divides ours).
    pub fn apply(&self, x: &CyclotomicInt) -> CyclotomicInt {
        let x = if x.conductor == self.conductor { x.clone() } else { x.lift_to(self.conductor) };
        let n = self.conductor as u64;
        let mut out = CyclotomicInt::zero(self.conductor);
        for (j, &c) in x.coeffs.iter().enumerate() {
            if c != 0 {
                let k = ((j as u64 * self.exponent) % n) as usize;
                out.coeffs[k] = checked_add(out.coeffs[k], c);
            }
        }
        out
    }
}

/// Convenience wrapper matching the operation name used elsewhere.
pub fn apply_galois(g: GaloisAuto, x: &CyclotomicInt) -> CyclotomicInt {
    g.apply(x)
}

/// The Gauss period sum_{h in H} w_{p^e}^{rep * h} over the unique subgroup H
/// of Z*_{p^e} of index n1. Fixed by every element of H, it generates the
/// degree-n1 subfield.
pub fn gauss_period(p: u64, e: u32, n1: u64, coset_rep: u64) -> Result<CyclotomicInt, CycError> {
    let pe = p.pow(e);
    let phi = euler_phi(pe);
    if phi % n1 != 0 {
        return Err(CycError::BadSubgroupIndex { n1, pe, phi });
    }
    let rho = crate::numtheory::primitive_root_mod_prime_power(p, e)
        .expect("odd prime power required");
    let h_size = phi / n1;
    let gen = crate::numtheory::pow_mod(rho, n1, pe); // generator of H
    let mut x = CyclotomicInt::zero(pe as u32);
    let mut h = 1u64;
    for _ in 0..h_size {
        let j = ((coset_rep as u128 * h as u128) % pe as u128) as usize;
        x.coeffs[j] = checked_add(x.coeffs[j], 1);
        h = (h as u128 * gen as u128 % pe as u128) as u64;
    }
    Ok(x)
}

/// A cyclotomic integer divided by a positive rational integer. Only the
/// unit-magnitude gamma of the 3x3 perfect code introduces denominators
/// (gamma = (2+i)/(1+2i) = (4-3i)/5), so a single integer denominator is all
/// the generality the determinant work needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycRat {
    pub num: CyclotomicInt,
    pub den: i128,
}

impl CycRat {
    pub fn from_int(x: CyclotomicInt) -> Self {
        CycRat { num: x, den: 1 }
    }

    pub fn zero(conductor: u32) -> Self {
        Self::from_int(CyclotomicInt::zero(conductor))
    }

    pub fn new(num: CyclotomicInt, den: i128) -> Self {
        assert!(den > 0, "denominator must be positive");
        CycRat { num, den }.normalized()
    }

    fn normalized(mut self) -> Self {
        if self.den == 1 {
            return self;
        }
        let mut g = self.den;
        for &c in &self.num.coeffs {
            if c != 0 {
                g = int_gcd(g, c.abs());
                if g == 1 {
                    return self;
                }
            }
        }
        if self.num.coeffs.iter().all(|&c| c == 0) {
            self.den = 1;
            return self;
        }
        if g > 1 {
            self.num.coeffs.iter_mut().for_each(|c| *c /= g);
            self.den /= g;
        }
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let num = self.num.scale(other.den).add(&other.num.scale(self.den));
        CycRat::new(num, checked_mul(self.den, other.den))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        CycRat { num: self.num.neg(), den: self.den }
    }

    pub fn mul(&self, other: &Self) -> Self {
        CycRat::new(self.num.mul(&other.num), checked_mul(self.den, other.den))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn embed(&self) -> Complex64 {
        self.num.embed() / self.den as f64
    }

    pub fn apply_galois(&self, g: GaloisAuto) -> Self {
        CycRat { num: g.apply(&self.num), den: self.den }
    }

    /// Exact projection to Q(i), returned as (re, im, den).
    pub fn project_to_gaussian_rational(&self) -> Option<(i128, i128, i128)> {
        let g = self.num.project_to_gaussian()?;
        Some((g.re, g.im, self.den))
    }
}

impl PartialEq for CycRat {
    fn eq(&self, other: &Self) -> bool {
        self.num.scale(other.den) == other.num.scale(self.den)
    }
}

fn int_gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.abs()
}

/// Exact determinant by division-free Laplace expansion with column-subset
/// memoization (n * 2^n element multiplications). Exactness needs no pivot
/// division, which matters because the full-power representation has zero
/// divisors and Bareiss-style exact division is only defined after canonical
/// reduction. Guaranteed scale n <= 6; accepts anything up to n = 12.
pub fn exact_det(m: &[Vec<CyclotomicInt>]) -> Result<CyclotomicInt, CycError> {
    let rows: Vec<Vec<CycRat>> =
        m.iter().map(|r| r.iter().map(|e| CycRat::from_int(e.clone())).collect()).collect();
    let d = exact_det_rat(&rows)?;
    assert_eq!(d.den, 1, "integer matrix must have integer determinant");
    Ok(d.num)
}

pub fn exact_det_rat(m: &[Vec<CycRat>]) -> Result<CycRat, CycError> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(CycError::BadMatrix);
    }
    assert!(n <= 12, "exact_det is sized for small code matrices");
    let conductor = m
        .iter()
        .flatten()
        .map(|e| e.num.conductor as u64)
        .fold(1u64, lcm) as u32;
    let lift = |e: &CycRat| CycRat {
        num: if e.num.conductor == conductor { e.num.clone() } else { e.num.lift_to(conductor) },
        den: e.den,
    };
    // dp[mask] = minor determinant using rows 0..popcount(mask) and the
    // column set `mask`, built one row at a time.
    let mut dp: HashMap<u32, CycRat> = HashMap::new();
    dp.insert(0, CycRat::from_int(CyclotomicInt::one(conductor)));
    for row in 0..n {
        let mut next: HashMap<u32, CycRat> = HashMap::new();
        for (mask, minor) in &dp {
            let mut sign_toggle = 0u32;
            for col in 0..n {
                let bit = 1u32 << col;
                if mask & bit != 0 {
                    sign_toggle += 1;
                    continue;
                }
                let e = lift(&m[row][col]);
                if e.is_zero() {
                    continue;
                }
                let term = minor.mul(&e);
                let term = if sign_toggle % 2 == 1 { term.neg() } else { term };
                next.entry(mask | bit)
                    .and_modify(|acc| *acc = acc.add(&term))
                    .or_insert(term);
            }
        }
        dp = next;
    }
    Ok(dp.remove(&((1u32 << n) - 1)).unwrap_or_else(|| CycRat::zero(conductor)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn w(n: u32, j: u64) -> CyclotomicInt {
        CyclotomicInt::root_power(n, j)
    }

    #[test]
    fn ring_examples() {
        // w4 * w4 = -1
        assert_eq!(w(4, 1).mul(&w(4, 1)), CyclotomicInt::integer(4, -1));
        // (1 + w3)(1 + w3^2) = 1 since 1 + w3 + w3^2 = 0
        let a = CyclotomicInt::one(3).add(&w(3, 1));
        let b = CyclotomicInt::one(3).add(&w(3, 2));
        assert_eq!(a.mul(&b), CyclotomicInt::one(3));
        // sum of all nontrivial 7th roots = -1
        let mut s = CyclotomicInt::zero(7);
        for j in 1..7 {
            s = s.add(&w(7, j));
        }
        assert_eq!(s, CyclotomicInt::integer(7, -1));
        assert!((s.embed() - num_complex::Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn reduction_idempotent() {
        let x = CyclotomicInt::from_coeffs(12, vec![3, -1, 4, 1, -5, 9, 2, -6, 5, 3, -5, 8]);
        let c1 = x.canonical();
        let mut padded = c1.clone();
        padded.resize(12, 0);
        let c2 = CyclotomicInt::from_coeffs(12, padded).canonical();
        assert_eq!(c1, c2);
    }

    #[test]
    fn galois_examples() {
        // identity automorphism
        let x = w(8, 3).add(&CyclotomicInt::integer(8, 2));
        assert_eq!(GaloisAuto::new(8, 1).unwrap().apply(&x), x);
        // sigma: w8 -> w8^5 fixes i = w8^2
        let i = w(8, 2);
        assert_eq!(GaloisAuto::new(8, 5).unwrap().apply(&i), i);
        // tau: w7 -> w7^3 applied twice sends w7 to w7^2
        let tau = GaloisAuto::new(7, 3).unwrap();
        assert_eq!(tau.apply(&tau.apply(&w(7, 1))), w(7, 2));
        assert!(GaloisAuto::new(8, 6).is_err());
    }

    #[test]
    fn galois_composition_is_exponent_multiplication() {
        let a = GaloisAuto::new(35, 2).unwrap();
        let b = GaloisAuto::new(35, 3).unwrap();
        let x = w(35, 1).add(&w(35, 13).scale(4));
        assert_eq!(
            a.compose(b).unwrap().apply(&x),
            a.apply(&b.apply(&x))
        );
        assert_eq!(a.compose(b).unwrap().exponent, 6);
    }

    #[test]
    fn gauss_period_examples() {
        // p = 7, n1 = 3, H = {1, 6}: eta = w7 + w7^6 = 2 cos(2 pi / 7)
        let eta = gauss_period(7, 1, 3, 1).unwrap();
        assert_eq!(eta, w(7, 1).add(&w(7, 6)));
        assert!((eta.embed().re - 1.2469796037174672).abs() < 1e-12);
        assert!(eta.embed().im.abs() < 1e-12);
        // n1 = 1: the full unit sum, -1 for e = 1
        let full = gauss_period(7, 1, 1, 1).unwrap();
        assert_eq!(full, CyclotomicInt::integer(7, -1));
        // p = 11, n1 = 5, H = {1, 10}; fixed by H, moved by a non-member
        let eta11 = gauss_period(11, 1, 5, 1).unwrap();
        assert_eq!(eta11, w(11, 1).add(&w(11, 10)));
        assert_eq!(GaloisAuto::new(11, 10).unwrap().apply(&eta11), eta11);
        assert_ne!(GaloisAuto::new(11, 2).unwrap().apply(&eta11), eta11);
        assert!(gauss_period(7, 1, 4, 1).is_err());
    }

    #[test]
    fn embed_examples() {
        assert!((w(4, 1).embed() - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((w(3, 1).embed() - Complex64::new(-0.5, 3f64.sqrt() / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn projection_examples() {
        // 3 w4 + 2 -> 2 + 3i
        let x = w(4, 1).scale(3).add(&CyclotomicInt::integer(4, 2));
        assert_eq!(x.project_to_gaussian(), Some(GaussianInt::new(2, 3)));
        // w7 is not in Q(i)
        assert_eq!(w(7, 1).lift_to(28).project_to_gaussian(), None);
        // i inside conductor 28 is w28^7
        assert_eq!(w(28, 7).project_to_gaussian(), Some(GaussianInt::new(0, 1)));
        // eisenstein: w12^4 = w3
        let y = w(12, 4).scale(5).add(&CyclotomicInt::integer(12, -2));
        assert_eq!(y.project_to_eisenstein(), Some(EisensteinInt::new(-2, 5)));
        assert_eq!(CyclotomicInt::integer(9, 4).project_to_integer(), Some(4));
        assert_eq!(w(9, 1).project_to_integer(), None);
    }

    #[test]
    fn det_examples() {
        let id = vec![
            vec![CyclotomicInt::one(8), CyclotomicInt::zero(8)],
            vec![CyclotomicInt::zero(8), CyclotomicInt::one(8)],
        ];
        assert_eq!(exact_det(&id).unwrap(), CyclotomicInt::one(8));
        let diag = vec![
            vec![w(8, 1), CyclotomicInt::zero(8)],
            vec![CyclotomicInt::zero(8), w(8, 7)],
        ];
        assert_eq!(exact_det(&diag).unwrap(), CyclotomicInt::one(8));
    }

    #[test]
    fn det_matches_float_path() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in 2..=4usize {
            for _ in 0..20 {
                let m: Vec<Vec<CyclotomicInt>> = (0..n)
                    .map(|_| {
                        (0..n)
                            .map(|_| {
                                let coeffs =
                                    (0..12).map(|_| rng.gen_range(-5..=5)).collect::<Vec<i128>>();
                                CyclotomicInt::from_coeffs(12, coeffs)
                            })
                            .collect()
                    })
                    .collect();
                let exact = exact_det(&m).unwrap().embed();
                let numeric = nalgebra::DMatrix::from_fn(n, n, |r, c| m[r][c].embed())
                    .lu()
                    .determinant();
                let scale = 1.0 + exact.norm();
                assert!((exact - numeric).norm() / scale < 1e-6, "n={n}");
            }
        }
    }

    #[test]
    fn det_rat_tracks_denominators() {
        // det [[1/5, 0], [0, 1/5]] = 1/25
        let e = CycRat::new(CyclotomicInt::one(4), 5);
        let z = CycRat::zero(4);
        let m = vec![vec![e.clone(), z.clone()], vec![z, e]];
        let d = exact_det_rat(&m).unwrap();
        assert_eq!(d.den, 25);
        assert_eq!(d.num, CyclotomicInt::one(4));
    }

    fn arb_cyc(conductor: u32, bound: i128) -> impl Strategy<Value = CyclotomicInt> {
        proptest::collection::vec(-bound..=bound, conductor as usize)
            .prop_map(move |coeffs| CyclotomicInt::from_coeffs(conductor, coeffs))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        // embedding is a ring homomorphism
        #[test]
        fn embed_is_multiplicative(
            a in arb_cyc(60, 100),
            b in arb_cyc(60, 100),
        ) {
            let lhs = a.mul(&b).embed();
            let rhs = a.embed() * b.embed();
            let scale = 1.0 + a.embed().norm() * b.embed().norm();
            prop_assert!((lhs - rhs).norm() < 1e-9 * scale);
        }

        #[test]
        fn mul_commutes_and_associates(
            a in arb_cyc(24, 50),
            b in arb_cyc(24, 50),
            c in arb_cyc(24, 50),
        ) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
        }

        // galois action is a ring homomorphism
        #[test]
        fn galois_is_ring_hom(
            a in arb_cyc(36, 50),
            b in arb_cyc(36, 50),
            k in prop::sample::select(vec![5u64, 7, 11, 13, 17, 19, 23, 25, 29, 31, 35]),
        ) {
            let g = GaloisAuto::new(36, k).unwrap();
            prop_assert_eq!(g.apply(&a.mul(&b)), g.apply(&a).mul(&g.apply(&b)));
            prop_assert_eq!(g.apply(&a.add(&b)), g.apply(&a).add(&g.apply(&b)));
        }

        // conductor coercion preserves value under the embedding
        #[test]
        fn lift_preserves_embedding(a in arb_cyc(20, 50)) {
            let lifted = a.lift_to(60);
            prop_assert!((a.embed() - lifted.embed()).norm() < 1e-9);
            prop_assert_eq!(a.lift_to(60), lifted);
        }
    }

    // every Gauss period is fixed by its subgroup and moved by a coset rep
    #[test]
    fn period_fixed_field_nondegenerate() {
        for (p, e, n1) in [(7u64, 1u32, 3u64), (11, 1, 5), (19, 1, 9), (13, 1, 3), (3, 2, 3)] {
            let pe = p.pow(e);
            let eta = gauss_period(p, e, n1, 1).unwrap();
            let rho = crate::numtheory::primitive_root_mod_prime_power(p, e).unwrap();
            let h_gen = crate::numtheory::pow_mod(rho, n1, pe);
            let g_h = GaloisAuto::new(pe as u32, h_gen).unwrap();
            assert_eq!(g_h.apply(&eta), eta, "period must be fixed by H ({p},{e},{n1})");
            let g_out = GaloisAuto::new(pe as u32, rho).unwrap();
            assert_ne!(g_out.apply(&eta), eta, "period must be moved outside H ({p},{e},{n1})");
        }
    }
}
