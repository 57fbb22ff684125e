//! Elementary and algebraic number theory used by the code constructions:
//! factorization, totients, multiplicative orders, primitive roots, CRT,
//! primes in arithmetic progressions, and the splitting of rational primes
//! in the Gaussian and Eisenstein integers.
//!
//! Everything here is exact integer arithmetic. Values are desk-scale
//! (factorization is guaranteed up to 10^12), so `u64`/`i128` with checked
//! widening is sufficient throughout.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NtError {
    #[error("n must be >= 1, got 0")]
    Zero,
    #[error("arguments must be coprime: gcd({a}, {m}) != 1")]
    NotCoprime { a: u64, m: u64 },
    #[error("modulus must be >= 2, got {0}")]
    BadModulus(u64),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("progression moduli must be pairwise coprime")]
    ModuliNotCoprime,
    #[error("no prime found within {0} candidates of the residue class")]
    ScanExhausted(u64),
    #[error("{q} is not a prime congruent to {want} mod {modulus}")]
    BadSplitPrime { q: u64, want: u64, modulus: u64 },
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin. The witness set is valid for all
/// n < 3.3 * 10^24, far beyond anything constructed here.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization with primes in strictly increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub value: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// The 2-adic valuation e0 and odd part n1 of the value, per n = 2^e0 * n1.
    pub fn two_part(&self) -> (u32, u64) {
        let mut e0 = 0;
        let mut n1 = self.value;
        while n1 % 2 == 0 {
            n1 /= 2;
            e0 += 1;
        }
        (e0, n1)
    }

    /// The odd prime-power factors (p, e) with p odd.
    pub fn odd_factors(&self) -> Vec<(u64, u32)> {
        self.factors.iter().copied().filter(|&(p, _)| p != 2).collect()
    }
}

/// Trial-division factorization. Supported scale is n <= 10^12; each reported
/// prime additionally passes the deterministic primality check.
pub fn factor(n: u64) -> Result<Factorization, NtError> {
    if n == 0 {
        return Err(NtError::Zero);
    }
    let mut factors = Vec::new();
    let mut rem = n;
    let mut push = |p: u64, e: u32| {
        debug_assert!(is_prime(p));
        factors.push((p, e));
    };
    for p in [2u64, 3, 5] {
        let mut e = 0;
        while rem % p == 0 {
            rem /= p;
            e += 1;
        }
        if e > 0 {
            push(p, e);
        }
    }
    // 2/3-coprime wheel
    let mut d = 7u64;
    let mut step = [4u64, 2, 4, 2, 4, 6, 2, 6].iter().cycle();
    while d * d <= rem {
        let mut e = 0;
        while rem % d == 0 {
            rem /= d;
            e += 1;
        }
        if e > 0 {
            push(d, e);
        }
        d += step.next().unwrap();
    }
    if rem > 1 {
        push(rem, 1);
    }
    Ok(Factorization { value: n, factors })
}

pub fn euler_phi(n: u64) -> u64 {
    let f = factor(n).expect("phi of 0");
    f.factors
        .iter()
        .fold(1u64, |acc, &(p, e)| acc * (p - 1) * p.pow(e - 1))
}

/// Least f >= 1 with a^f = 1 (mod m). Computed by reducing phi(m) prime by
/// prime, so it is fast even for large phi.
pub fn multiplicative_order(a: u64, m: u64) -> Result<u64, NtError> {
    if m < 2 {
        return Err(NtError::BadModulus(m));
    }
    let a = a % m;
    if gcd(a, m) != 1 {
        return Err(NtError::NotCoprime { a, m });
    }
    let mut order = euler_phi(m);
    for &(p, _) in &factor(order).unwrap().factors {
        while order % p == 0 && pow_mod(a, order / p, m) == 1 {
            order /= p;
        }
    }
    debug_assert_eq!(pow_mod(a, order, m), 1);
    Ok(order)
}

/// Smallest positive generator of the cyclic group Z*_{p^e}, p an odd prime.
pub fn primitive_root_mod_prime_power(p: u64, e: u32) -> Result<u64, NtError> {
    if p == 2 || !is_prime(p) {
        return Err(NtError::NotOddPrime(p));
    }
    let m = p.pow(e);
    let target = euler_phi(m);
    for rho in 2..m {
        if gcd(rho, m) != 1 {
            continue;
        }
        if multiplicative_order(rho, m)? == target {
            return Ok(rho);
        }
    }
    unreachable!("Z*_{{p^e}} is cyclic for odd p, a generator exists");
}

/// Smallest prime power p^e (ordered by value, p odd) with n1 | phi(p^e).
/// Returns None for n1 = 1: no odd-part field is needed there.
pub fn smallest_inert_prime_power(n1: u64) -> Option<(u64, u32)> {
    if n1 == 1 {
        return None;
    }
    assert!(n1 % 2 == 1, "n1 must be odd");
    let mut m = 3u64;
    loop {
        let f = factor(m).unwrap();
        if f.factors.len() == 1 && f.factors[0].0 != 2 {
            let (p, e) = f.factors[0];
            if euler_phi(m) % n1 == 0 {
                return Some((p, e));
            }
        }
        m += 2;
    }
}

/// Combined residue/modulus of a system x = a_j (mod m_j) with pairwise
/// coprime moduli.
pub fn crt(residues: &[(u64, u64)]) -> Result<(u64, u64), NtError> {
    let mut a = 0u128;
    let mut m = 1u128;
    for &(aj, mj) in residues {
        if mj < 2 {
            return Err(NtError::BadModulus(mj));
        }
        if gcd((m % mj as u128) as u64, mj) != 1 {
            return Err(NtError::ModuliNotCoprime);
        }
        // solve x = a (mod m), x = aj (mod mj)
        let mj128 = mj as u128;
        let diff = ((aj as u128 + mj128 - (a % mj128)) % mj128) as u64;
        let minv = inverse_mod((m % mj128) as u64, mj).unwrap();
        let t = mul_mod(diff, minv, mj);
        a += m * t as u128;
        m *= mj128;
        if m > u64::MAX as u128 {
            return Err(NtError::BadModulus(u64::MAX));
        }
    }
    Ok((a as u64, m as u64))
}

pub fn inverse_mod(a: u64, m: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(((t % m as i128 + m as i128) % m as i128) as u64)
}

/// Ascending-scan cap for [`prime_in_progression`]. Dirichlet guarantees a
/// prime exists in every admissible class; the cap only guards caller bugs.
const PROGRESSION_SCAN_CAP: u64 = 10_000_000;

/// Smallest prime q with q = a_j (mod m_j) for all j, found by scanning the
/// CRT residue class in ascending order.
pub fn prime_in_progression(residues: &[(u64, u64)]) -> Result<u64, NtError> {
    for &(aj, mj) in residues {
        if gcd(aj, mj) != 1 {
            return Err(NtError::NotCoprime { a: aj, m: mj });
        }
    }
    let (a, m) = crt(residues)?;
    let mut x = if a == 0 { m } else { a };
    for _ in 0..PROGRESSION_SCAN_CAP {
        if x > 1 && is_prime(x) {
            return Ok(x);
        }
        x = x.checked_add(m).ok_or(NtError::ScanExhausted(PROGRESSION_SCAN_CAP))?;
    }
    Err(NtError::ScanExhausted(PROGRESSION_SCAN_CAP))
}

/// An exact Gaussian integer a + b*i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaussianInt {
    pub re: i128,
    pub im: i128,
}

impl GaussianInt {
    pub const ZERO: GaussianInt = GaussianInt { re: 0, im: 0 };
    pub const ONE: GaussianInt = GaussianInt { re: 1, im: 0 };

    pub fn new(re: i128, im: i128) -> Self {
        GaussianInt { re, im }
    }

    pub fn norm(self) -> i128 {
        self.re
            .checked_mul(self.re)
            .and_then(|a| self.im.checked_mul(self.im).and_then(|b| a.checked_add(b)))
            .expect("Gaussian norm overflow")
    }

    pub fn conj(self) -> Self {
        GaussianInt::new(self.re, -self.im)
    }

    pub fn mul(self, other: Self) -> Self {
        GaussianInt::new(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )
    }

    pub fn add(self, other: Self) -> Self {
        GaussianInt::new(self.re + other.re, self.im + other.im)
    }

    pub fn sub(self, other: Self) -> Self {
        GaussianInt::new(self.re - other.re, self.im - other.im)
    }

    pub fn is_zero(self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn pow(self, e: u32) -> Self {
        let mut acc = GaussianInt::ONE;
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn abs(self) -> f64 {
        ((self.re as f64).powi(2) + (self.im as f64).powi(2)).sqrt()
    }

    /// The 8 elements {u*z, u*conj(z)} for units u in {1, i, -1, -i}.
    pub fn unit_conjugate_orbit(self) -> Vec<GaussianInt> {
        let mut out = Vec::with_capacity(8);
        for z in [self, self.conj()] {
            let mut w = z;
            for _ in 0..4 {
                out.push(w);
                w = w.mul(GaussianInt::new(0, 1));
            }
        }
        out
    }

    /// True if `other` is an associate of this element or of its conjugate.
    /// Unit factors do not change norm classes, so for non-norm purposes the
    /// whole orbit is interchangeable.
    pub fn equiv_up_to_units_and_conjugation(self, other: GaussianInt) -> bool {
        self.unit_conjugate_orbit().contains(&other)
    }
}

/// Gaussian prime above a rational prime q = 1 (mod 4), canonicalized so
/// that re > im > 0. Any associate works equally well as a non-norm element;
/// the canonical choice exists purely for reproducibility.
pub fn split_in_gaussian_integers(q: u64) -> Result<GaussianInt, NtError> {
    if !is_prime(q) || q % 4 != 1 {
        return Err(NtError::BadSplitPrime { q, want: 1, modulus: 4 });
    }
    let mut b = 1i128;
    loop {
        let rem = q as i128 - b * b;
        if rem <= b * b {
            unreachable!("every prime 1 mod 4 is a sum of two squares");
        }
        let a = (rem as f64).sqrt() as i128;
        for cand in [a - 1, a, a + 1] {
            if cand > b && cand * cand == rem {
                let g = GaussianInt::new(cand, b);
                debug_assert_eq!(g.norm(), q as i128);
                return Ok(g);
            }
        }
        b += 1;
    }
}

/// An exact Eisenstein integer a + c*w3, w3 = exp(2*pi*i/3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EisensteinInt {
    pub a: i128,
    pub c: i128,
}

impl EisensteinInt {
    pub fn new(a: i128, c: i128) -> Self {
        EisensteinInt { a, c }
    }

    /// N(a + c*w3) = a^2 - a*c + c^2; multiplicative and >= 0.
    pub fn norm(self) -> i128 {
        self.a * self.a - self.a * self.c + self.c * self.c
    }

    // (a + c w)(a' + c' w) = aa' + (ac' + ca')w + cc' w^2, w^2 = -1 - w
    pub fn mul(self, other: Self) -> Self {
        let w2 = self.c * other.c;
        EisensteinInt::new(
            self.a * other.a - w2,
            self.a * other.c + self.c * other.a - w2,
        )
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.c == 0
    }

    pub fn abs(self) -> f64 {
        (self.norm() as f64).sqrt()
    }
}

/// Eisenstein prime above a rational prime q = 1 (mod 3), canonicalized as
/// the solution with smallest c >= 1 and then smallest a > c.
pub fn split_in_eisenstein_integers(q: u64) -> Result<EisensteinInt, NtError> {
    if !is_prime(q) || q % 3 != 1 {
        return Err(NtError::BadSplitPrime { q, want: 1, modulus: 3 });
    }
    let q = q as i128;
    let mut c = 1i128;
    loop {
        let mut a = c + 1;
        while a * a - a * c + c * c <= q {
            let e = EisensteinInt::new(a, c);
            if e.norm() == q {
                return Ok(e);
            }
            a += 1;
        }
        c += 1;
    }
}
