//! Explicit cyclic-division-algebra code constructions over Q(i) and Q(w3):
//! Constructions A and B for every degree n, the HEX-base construction for
//! n != 0 (mod 4), and the exact 3x3 unit-gamma code used for the rectangular
//! simulation. Each construction produces a complete [`CodeSpec`]: ambient
//! cyclotomic conductor, Galois generator, non-norm element gamma with its
//! underlying prime q, and an exact integral basis orbit.
//!
//! Non-norm-ness is certified two ways: a multiplicative-order inertness
//! certificate (relative degree n via order bookkeeping in each tower factor)
//! and a seeded randomized falsification search over relative norms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cyclotomic::{CycRat, CyclotomicInt, GaloisAuto};
use crate::numtheory::{
    self, euler_phi, factor, gcd, is_prime, lcm, multiplicative_order,
    primitive_root_mod_prime_power, smallest_inert_prime_power, split_in_eisenstein_integers,
    split_in_gaussian_integers, EisensteinInt, GaussianInt,
};

#[derive(Debug, Error)]
pub enum CdaError {
    #[error("n must be >= 1")]
    BadDegree,
    #[error("the HEX construction covers n != 0 (mod 4) only; got n = {0}")]
    HexUnsupported(u64),
    #[error("spec validation failed: {0}")]
    Invalid(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Base {
    Qam,
    Hex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    A,
    B,
    Hex,
    Perfect3x3,
    Custom,
}

/// The non-norm element. Constructions A/B yield a Gaussian prime, the HEX
/// construction an Eisenstein prime, and the 3x3 perfect code the
/// unit-magnitude ratio (2+i)/(1+2i).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gamma {
    Gaussian { re: i128, im: i128 },
    Eisenstein { a: i128, c: i128 },
    UnitRatio { num: [i128; 2], den: [i128; 2] },
}

impl Gamma {
    pub fn gaussian(g: GaussianInt) -> Self {
        Gamma::Gaussian { re: g.re, im: g.im }
    }

    pub fn as_gaussian(&self) -> Option<GaussianInt> {
        match *self {
            Gamma::Gaussian { re, im } => Some(GaussianInt::new(re, im)),
            _ => None,
        }
    }

    /// gamma as an exact element of Q(w_N) (ratios are cleared to a rational
    /// integer denominator: num/den = num * conj(den) / N(den)).
    pub fn to_cyc(&self, conductor: u32) -> CycRat {
        match *self {
            Gamma::Gaussian { re, im } => CycRat::from_int(CyclotomicInt::from_gaussian(
                conductor,
                GaussianInt::new(re, im),
            )),
            Gamma::Eisenstein { a, c } => CycRat::from_int(CyclotomicInt::from_eisenstein(
                conductor,
                EisensteinInt::new(a, c),
            )),
            Gamma::UnitRatio { num, den } => {
                let num = GaussianInt::new(num[0], num[1]);
                let den = GaussianInt::new(den[0], den[1]);
                let cleared = num.mul(den.conj());
                CycRat::new(
                    CyclotomicInt::from_gaussian(conductor, cleared),
                    den.norm(),
                )
            }
        }
    }

    pub fn embed(&self) -> Complex64 {
        match *self {
            Gamma::Gaussian { re, im } => Complex64::new(re as f64, im as f64),
            Gamma::Eisenstein { a, c } => {
                Complex64::new(a as f64 - 0.5 * c as f64, 3f64.sqrt() / 2.0 * c as f64)
            }
            Gamma::UnitRatio { num, den } => {
                Complex64::new(num[0] as f64, num[1] as f64)
                    / Complex64::new(den[0] as f64, den[1] as f64)
            }
        }
    }
}

/// Complete description of one constructed code: the field tower data, the
/// Galois generator, gamma, and the basis orbit. This is the interchange
/// format consumed by the codebook, verification, and CLI layers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpec {
    pub n: u64,
    pub base: Base,
    pub conductor: u32,
    pub sigma_exponent: u64,
    pub gamma: Gamma,
    pub basis: Vec<CyclotomicInt>,
    pub q: Option<u64>,
    pub provenance: Provenance,
}

impl CodeSpec {
    pub fn sigma(&self) -> GaloisAuto {
        GaloisAuto::new(self.conductor, self.sigma_exponent).expect("validated spec")
    }

    pub fn sigma_pow(&self, j: u64) -> GaloisAuto {
        self.sigma().pow(j)
    }

    pub fn gamma_cyc(&self) -> CycRat {
        self.gamma.to_cyc(self.conductor)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("codespec serializes")
    }

    pub fn from_json(s: &str) -> Result<CodeSpec, CdaError> {
        let spec: CodeSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Structural and algebraic sanity of a (possibly untrusted) spec.
    pub fn validate(&self) -> Result<(), CdaError> {
        let fail = |msg: String| Err(CdaError::Invalid(msg));
        if self.n == 0 || self.n > 64 {
            return fail(format!("degree {} out of range", self.n));
        }
        if self.conductor == 0 || self.conductor > 100_000 {
            return fail(format!("conductor {} out of range", self.conductor));
        }
        if self.basis.len() != self.n as usize {
            return fail(format!(
                "basis has {} elements for degree {}",
                self.basis.len(),
                self.n
            ));
        }
        for b in &self.basis {
            if b.conductor != self.conductor {
                return fail("basis conductor mismatch".into());
            }
            if b.coeffs.len() != self.conductor as usize {
                return fail("basis coefficient vector length mismatch".into());
            }
        }
        if gcd(self.sigma_exponent, self.conductor as u64) != 1 {
            return fail(format!(
                "sigma exponent {} is not a unit mod {}",
                self.sigma_exponent, self.conductor
            ));
        }
        match self.base {
            Base::Qam => {
                if self.n > 1 && self.conductor % 4 != 0 {
                    return fail("QAM base needs 4 | conductor".into());
                }
            }
            Base::Hex => {
                if self.conductor % 3 != 0 {
                    return fail("HEX base needs 3 | conductor".into());
                }
            }
        }
        match (&self.gamma, self.base) {
            (Gamma::Gaussian { re, im }, Base::Qam) => {
                if let Some(q) = self.q {
                    if GaussianInt::new(*re, *im).norm() != q as i128 {
                        return fail("gamma norm does not equal q".into());
                    }
                }
            }
            (Gamma::Eisenstein { a, c }, Base::Hex) => {
                if let Some(q) = self.q {
                    if EisensteinInt::new(*a, *c).norm() != q as i128 {
                        return fail("gamma norm does not equal q".into());
                    }
                }
            }
            (Gamma::UnitRatio { num, den }, Base::Qam) => {
                let num = GaussianInt::new(num[0], num[1]);
                let den = GaussianInt::new(den[0], den[1]);
                if den.is_zero() || num.norm() != den.norm() {
                    return fail("unit-ratio gamma must have |gamma| = 1".into());
                }
            }
            _ => return fail("gamma kind does not match base".into()),
        }
        if let Some(q) = self.q {
            if !is_prime(q) {
                return fail(format!("q = {q} is not prime"));
            }
        }
        // sigma must have order n on the basis span: sigma^n fixes every
        // basis element, and no smaller power fixes all of them.
        let sigma = GaloisAuto::new(self.conductor, self.sigma_exponent)
            .map_err(|e| CdaError::Invalid(e.to_string()))?;
        let mut pow = sigma;
        for k in 1..=self.n {
            let fixes_all = self.basis.iter().all(|b| pow.apply(b) == *b);
            if k < self.n && fixes_all && self.basis.iter().any(|b| !b.is_zero()) {
                return fail(format!("sigma^{k} already fixes the basis (order too small)"));
            }
            if k == self.n && !fixes_all {
                return fail("sigma^n does not fix the basis".into());
            }
            pow = pow.compose(sigma).unwrap();
        }
        // numeric nonsingularity of [sigma^j(beta_i)]
        if self.basis_matrix_min_det() <= 1e-6 {
            return fail("basis orbit matrix is numerically singular".into());
        }
        Ok(())
    }

    /// |det| of the n x n complex matrix [sigma^j(beta_i)].
    pub fn basis_matrix_min_det(&self) -> f64 {
        let n = self.n as usize;
        let sigma = self.sigma();
        let mut m = nalgebra::DMatrix::<Complex64>::zeros(n, n);
        for (i, b) in self.basis.iter().enumerate() {
            let mut cur = b.clone();
            for j in 0..n {
                m[(i, j)] = cur.embed();
                cur = sigma.apply(&cur);
            }
        }
        m.lu().determinant().norm()
    }
}

/// Is x a generator of the cyclic 2-part group <5> mod 2^(e0+2)? Equivalent
/// to x = 1 (mod 4) with multiplicative order exactly 2^e0, which is what
/// inertness of the prime above q in Q(w_{2^(e0+2)})/Q(i) requires.
fn generates_two_part(x: u64, e0: u32) -> bool {
    if x % 4 != 1 {
        return false;
    }
    if e0 == 0 {
        return true;
    }
    let m = 2u64.pow(e0 + 2);
    gcd(x, m) == 1 && multiplicative_order(x, m).unwrap() == 2u64.pow(e0)
}

/// Canonical Construction A prime: the smallest prime whose residue is a
/// primitive root mod p^e and whose 2-part residue generates <5>.
pub fn canonical_q_a(n: u64) -> Option<u64> {
    let (e0, n1) = factor(n).ok()?.two_part();
    if n == 1 {
        return None;
    }
    let pe = smallest_inert_prime_power(n1).map(|(p, e)| p.pow(e));
    let mut q = 2u64;
    loop {
        q += 1;
        if !is_prime(q) || !generates_two_part(q, e0) {
            continue;
        }
        if let Some(pe) = pe {
            if q % pe == 0 {
                continue;
            }
            if multiplicative_order(q, pe).unwrap() != euler_phi(pe) {
                continue;
            }
        }
        return Some(q);
    }
}

/// Canonical Construction B prime: smallest prime q = 5 (mod 2^(e0+2))
/// (q = 1 mod 4 when e0 = 0) that is a primitive root mod p_i^(e_i + 1)
/// for every odd prime-power factor of n.
pub fn canonical_q_b(n: u64) -> Option<u64> {
    if n == 1 {
        return None;
    }
    let f = factor(n).ok()?;
    let (e0, _) = f.two_part();
    let odd = f.odd_factors();
    let mut q = 2u64;
    loop {
        q += 1;
        if !is_prime(q) {
            continue;
        }
        let two_ok = if e0 == 0 { q % 4 == 1 } else { q % 2u64.pow(e0 + 2) == 5 };
        if !two_ok {
            continue;
        }
        let mut good = true;
        for &(p, e) in &odd {
            let m = p.pow(e + 1);
            if q % p == 0 || multiplicative_order(q, m).unwrap() != euler_phi(m) {
                good = false;
                break;
            }
        }
        if good {
            return Some(q);
        }
    }
}

/// Published exemplar primes from the paper's Construction A table that are
/// valid but not minimal: rows 9 and 15 list q = 29 and q = 53 where the
/// canonical scan finds 13. The construction follows the published exemplars
/// there (their certificates are re-verified at construction time) so that
/// table reproduction is exact.
const TABLE_A_EXEMPLAR_Q: &[(u64, u64)] = &[(9, 29), (15, 53)];

/// sigma exponent: smallest k that restricts to a generator of
/// Gal(L/center). `odd_quotients` lists (modulus, subgroup generator,
/// required image order) per odd tower factor.
fn find_sigma_exponent(
    conductor: u32,
    center_fix: impl Fn(u64) -> bool,
    two_part: Option<(u64, u64)>, // (modulus, required order)
    odd_quotients: &[(u64, u64, u64)],
) -> u64 {
    'next: for k in 1..conductor as u64 {
        if gcd(k, conductor as u64) != 1 || !center_fix(k) {
            continue;
        }
        if let Some((m, ord)) = two_part {
            if gcd(k, m) != 1 || multiplicative_order(k, m).unwrap() != ord {
                continue;
            }
        }
        for &(m, h_gen, want) in odd_quotients {
            if gcd(k, m) != 1 || image_order(k, m, h_gen) != want {
                continue 'next;
            }
        }
        return k;
    }
    unreachable!("a Galois generator always exists");
}

/// Order of the image of x in Z*_m / <h_gen>: the smallest t >= 1 with
/// x^t in the subgroup generated by h_gen.
fn image_order(x: u64, m: u64, h_gen: u64) -> u64 {
    let mut members = vec![1u64];
    let mut h = h_gen % m;
    while h != 1 {
        members.push(h);
        h = (h as u128 * h_gen as u128 % m as u128) as u64;
    }
    let mut t = 1u64;
    let mut xp = x % m;
    loop {
        if members.contains(&xp) {
            return t;
        }
        xp = (xp as u128 * x as u128 % m as u128) as u64;
        t += 1;
        assert!(t <= euler_phi(m), "image order search out of range");
    }
}

/// Normal-basis element for the 2-part tower Q(w_{2^(e0+2)})/Q(i):
/// eta_2 = sum_{k < 2^e0} w^k. Its sigma-orbit coefficient matrix over the
/// Z[i]-basis {1, w, .., w^(2^e0 - 1)} is a root-of-unity Vandermonde, hence
/// nonsingular; the constructor re-checks this numerically anyway.
fn two_part_eta(conductor: u32, e0: u32) -> CyclotomicInt {
    let mut eta = CyclotomicInt::zero(conductor);
    let m = 2u64.pow(e0 + 2);
    let scale = conductor as u64 / m;
    for k in 0..2u64.pow(e0) {
        eta.coeffs[(k * scale) as usize] += 1;
    }
    eta
}

fn basis_orbit(conductor: u32, sigma_exponent: u64, eta: &CyclotomicInt, n: u64) -> Vec<CyclotomicInt> {
    let sigma = GaloisAuto::new(conductor, sigma_exponent).unwrap();
    let mut basis = Vec::with_capacity(n as usize);
    let mut cur = eta.clone();
    for _ in 0..n {
        basis.push(cur.clone());
        cur = sigma.apply(&cur);
    }
    basis
}

/// Construction A: n = 2^e0 * n1; the degree-n1 subfield of Q(w_{p^e}) for
/// the smallest prime power with n1 | phi(p^e), composited with Q(i) and
/// Q(w_{2^(e0+2)}), with gamma a Gaussian prime above a prime q whose
/// residues make it inert through the whole tower.
pub fn construct_a(n: u64) -> Result<CodeSpec, CdaError> {
    if n == 0 {
        return Err(CdaError::BadDegree);
    }
    if n == 1 {
        return Ok(trivial_qam_spec(Provenance::A));
    }
    let (e0, n1) = factor(n).unwrap().two_part();
    let pe = smallest_inert_prime_power(n1);
    let two_conductor = 2u64.pow(e0 + 2).max(4);
    let conductor = match pe {
        Some((p, e)) => lcm(two_conductor, p.pow(e)) as u32,
        None => two_conductor as u32,
    };

    let q = TABLE_A_EXEMPLAR_Q
        .iter()
        .find(|&&(nn, _)| nn == n)
        .map(|&(_, q)| q)
        .unwrap_or_else(|| canonical_q_a(n).unwrap());
    // certificate recheck (also covers the published exemplars)
    assert!(is_prime(q) && generates_two_part(q, e0));
    let mut odd_quotients = Vec::new();
    let mut eta = match pe {
        Some((p, e)) => {
            let m = p.pow(e);
            assert_eq!(multiplicative_order(q, m).unwrap(), euler_phi(m), "q must be a primitive root");
            let rho = primitive_root_mod_prime_power(p, e).unwrap();
            let h_gen = numtheory::pow_mod(rho, n1, m);
            odd_quotients.push((m, h_gen, n1));
            crate::cyclotomic::gauss_period(p, e, n1, 1).unwrap().lift_to(conductor)
        }
        None => CyclotomicInt::one(conductor),
    };
    if e0 >= 1 {
        eta = eta.mul(&two_part_eta(conductor, e0));
    }
    let two_part = (e0 >= 1).then(|| (2u64.pow(e0 + 2), 2u64.pow(e0)));
    let sigma_exponent =
        find_sigma_exponent(conductor, |k| k % 4 == 1, two_part, &odd_quotients);
    let spec = CodeSpec {
        n,
        base: Base::Qam,
        conductor,
        sigma_exponent,
        gamma: Gamma::gaussian(split_in_gaussian_integers(q).unwrap()),
        basis: basis_orbit(conductor, sigma_exponent, &eta, n),
        q: Some(q),
        provenance: Provenance::A,
    };
    spec.validate()?;
    Ok(spec)
}

/// Construction B: one fixed field per odd prime-power factor of n, taken
/// inside Q(w_{p_i^(e_i+1)}), composited with Q(i) and the 2-part.
pub fn construct_b(n: u64) -> Result<CodeSpec, CdaError> {
    if n == 0 {
        return Err(CdaError::BadDegree);
    }
    if n == 1 {
        return Ok(trivial_qam_spec(Provenance::B));
    }
    let f = factor(n).unwrap();
    let (e0, _) = f.two_part();
    let odd = f.odd_factors();
    let two_conductor = 2u64.pow(e0 + 2).max(4);
    let conductor =
        odd.iter().fold(two_conductor, |acc, &(p, e)| acc * p.pow(e + 1)) as u32;

    let q = canonical_q_b(n).unwrap();
    assert!(is_prime(q) && generates_two_part(q, e0));
    let mut odd_quotients = Vec::new();
    let mut eta = if e0 >= 1 {
        two_part_eta(conductor, e0)
    } else {
        CyclotomicInt::one(conductor)
    };
    for &(p, e) in &odd {
        let m = p.pow(e + 1);
        assert_eq!(multiplicative_order(q, m).unwrap(), euler_phi(m));
        let rho = primitive_root_mod_prime_power(p, e + 1).unwrap();
        let h_gen = numtheory::pow_mod(rho, p.pow(e), m);
        odd_quotients.push((m, h_gen, p.pow(e)));
        let period = crate::cyclotomic::gauss_period(p, e + 1, p.pow(e), 1).unwrap();
        eta = eta.mul(&period.lift_to(conductor));
    }
    let two_part = (e0 >= 1).then(|| (2u64.pow(e0 + 2), 2u64.pow(e0)));
    let sigma_exponent =
        find_sigma_exponent(conductor, |k| k % 4 == 1, two_part, &odd_quotients);
    let spec = CodeSpec {
        n,
        base: Base::Qam,
        conductor,
        sigma_exponent,
        gamma: Gamma::gaussian(split_in_gaussian_integers(q).unwrap()),
        basis: basis_orbit(conductor, sigma_exponent, &eta, n),
        q: Some(q),
        provenance: Provenance::B,
    };
    spec.validate()?;
    Ok(spec)
}

/// HEX-base construction for n != 0 (mod 4): center Q(w3), tower through the
/// degree-n1 subfield of Q(w_{p^e}) and (when n = 2 mod 4) Q(w12), with an
/// Eisenstein prime gamma above a prime q = rho (mod p^e), 1 (mod 3),
/// 3 (mod 4).
pub fn construct_hex(n: u64) -> Result<CodeSpec, CdaError> {
    if n == 0 {
        return Err(CdaError::BadDegree);
    }
    if n % 4 == 0 {
        return Err(CdaError::HexUnsupported(n));
    }
    if n == 1 {
        return Ok(CodeSpec {
            n: 1,
            base: Base::Hex,
            conductor: 3,
            sigma_exponent: 1,
            gamma: Gamma::Eisenstein { a: 1, c: 0 },
            basis: vec![CyclotomicInt::one(3)],
            q: None,
            provenance: Provenance::Hex,
        });
    }
    let (e0, n1) = factor(n).unwrap().two_part();
    debug_assert!(e0 <= 1);
    let pe = smallest_inert_prime_power(n1);
    let base_conductor = if e0 == 1 { 12u64 } else { 3u64 };
    let conductor = match pe {
        Some((p, e)) => lcm(base_conductor, p.pow(e)) as u32,
        None => base_conductor as u32,
    };

    // q scan: 1 mod 3 (splits in Q(w3)), 3 mod 4 (inert in Q(i), hence the
    // Eisenstein primes stay inert in Q(w12)/Q(w3)), primitive root mod p^e.
    let mut q = 2u64;
    let q = loop {
        q += 1;
        if !is_prime(q) || q % 3 != 1 || q % 4 != 3 {
            continue;
        }
        if let Some((p, e)) = pe {
            let m = p.pow(e);
            if q % p == 0 || multiplicative_order(q, m).unwrap() != euler_phi(m) {
                continue;
            }
        }
        break q;
    };
    let mut odd_quotients = Vec::new();
    let mut eta = match pe {
        Some((p, e)) => {
            let m = p.pow(e);
            let rho = primitive_root_mod_prime_power(p, e).unwrap();
            odd_quotients.push((m, numtheory::pow_mod(rho, n1, m), n1));
            crate::cyclotomic::gauss_period(p, e, n1, 1).unwrap().lift_to(conductor)
        }
        None => CyclotomicInt::one(conductor),
    };
    if e0 == 1 {
        // normal basis element 1 + w12 for Q(w12)/Q(w3)
        let mut eta2 = CyclotomicInt::one(conductor);
        eta2.coeffs[(conductor / 12) as usize] += 1;
        eta = eta.mul(&eta2);
    }
    let two_part = (e0 == 1).then_some((12u64, 2u64));
    let sigma_exponent = find_sigma_exponent(conductor, |k| k % 3 == 1, two_part, &odd_quotients);
    let spec = CodeSpec {
        n,
        base: Base::Hex,
        conductor,
        sigma_exponent,
        gamma: {
            let e = split_in_eisenstein_integers(q).unwrap();
            Gamma::Eisenstein { a: e.a, c: e.c }
        },
        basis: basis_orbit(conductor, sigma_exponent, &eta, n),
        q: Some(q),
        provenance: Provenance::Hex,
    };
    spec.validate()?;
    Ok(spec)
}

fn trivial_qam_spec(provenance: Provenance) -> CodeSpec {
    CodeSpec {
        n: 1,
        base: Base::Qam,
        conductor: 4,
        sigma_exponent: 1,
        gamma: Gamma::Gaussian { re: 1, im: 0 },
        basis: vec![CyclotomicInt::one(4)],
        q: None,
        provenance,
    }
}

/// The exact 3x3 code with unit-magnitude gamma = (2+i)/(1+2i) over the
/// degree-3 subfield K = Q(w7 + w7^6), ambient conductor 28. The basis is
/// the orbit of x = sum_{k=1..2} tau^{3k}( w7^4 (1-w7) prod_{k=0..2}
/// (1 - w7^{3^k}) ) under sigma: w7 -> w7^3, sigma(i) = i.
pub fn perfect_3x3_spec() -> CodeSpec {
    let w = |j: u64| CyclotomicInt::root_power(7, j);
    let one = CyclotomicInt::one(7);
    // u = w7^4 (1 - w7) (1-w7)(1-w7^3)(1-w7^2); exponents 3^k mod 7 = 1, 3, 2
    let u = w(4)
        .mul(&one.sub(&w(1)))
        .mul(&one.sub(&w(1)))
        .mul(&one.sub(&w(3)))
        .mul(&one.sub(&w(2)));
    let tau = GaloisAuto::new(7, 3).unwrap();
    // x = tau^3(u) + tau^6(u), tau^6 = id
    let x = tau.pow(3).apply(&u).add(&u);
    let x28 = x.lift_to(28);
    // sigma = 17 mod 28: 17 = 3 (mod 7), 1 (mod 4)
    let sigma_exponent = 17u64;
    let spec = CodeSpec {
        n: 3,
        base: Base::Qam,
        conductor: 28,
        sigma_exponent,
        gamma: Gamma::UnitRatio { num: [2, 1], den: [1, 2] },
        basis: basis_orbit(28, sigma_exponent, &x28, 3),
        q: Some(5),
        provenance: Provenance::Perfect3x3,
    };
    spec.validate().expect("perfect 3x3 spec is valid");
    spec
}

pub fn construct(method: Provenance, n: u64) -> Result<CodeSpec, CdaError> {
    match method {
        Provenance::A => construct_a(n),
        Provenance::B => construct_b(n),
        Provenance::Hex => construct_hex(n),
        Provenance::Perfect3x3 => Ok(perfect_3x3_spec()),
        Provenance::Custom => Err(CdaError::Invalid("cannot construct a custom spec".into())),
    }
}

/// One order-bookkeeping entry of the inertness certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderCertificate {
    pub modulus: u64,
    pub observed: u64,
    pub required: u64,
}

/// Evidence that gamma is a non-norm element: the multiplicative-order
/// inertness certificate plus a seeded randomized falsification search over
/// relative norms N(u) = prod_j sigma^j(u).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonNormReport {
    pub q: Option<u64>,
    pub split_condition_ok: bool,
    pub two_part: Option<OrderCertificate>,
    pub odd_parts: Vec<OrderCertificate>,
    pub certified_relative_degree: u64,
    pub certificate_ok: bool,
    pub falsification_trials: u64,
    pub counterexample: Option<String>,
    pub seed: u64,
}

impl NonNormReport {
    pub fn passed(&self) -> bool {
        self.certificate_ok && self.counterexample.is_none()
    }
}

/// Build the inertness certificate for a constructed spec and run `trials`
/// random falsification attempts (exact comparisons of relative norms
/// against gamma^t, 1 <= t < n).
pub fn verify_non_norm(spec: &CodeSpec, trials: u64, seed: u64) -> NonNormReport {
    let mut report = NonNormReport {
        q: spec.q,
        split_condition_ok: true,
        two_part: None,
        odd_parts: Vec::new(),
        certified_relative_degree: 1,
        certificate_ok: true,
        falsification_trials: trials,
        counterexample: None,
        seed,
    };
    if spec.n == 1 {
        report.certified_relative_degree = 1;
        report.certificate_ok = true;
        return report;
    }
    if let Some(q) = spec.q {
        let (e0, n1) = factor(spec.n).unwrap().two_part();
        match spec.base {
            Base::Qam => {
                report.split_condition_ok = q % 4 == 1;
                if e0 >= 1 {
                    let m = 2u64.pow(e0 + 2);
                    let obs = multiplicative_order(q, m).unwrap_or(0);
                    report.two_part = Some(OrderCertificate {
                        modulus: m,
                        observed: obs,
                        required: 2u64.pow(e0),
                    });
                }
            }
            Base::Hex => {
                report.split_condition_ok = q % 3 == 1;
                if e0 == 1 {
                    // q = 3 mod 4 keeps the Eisenstein primes inert through
                    // Q(w12)/Q(w3); record it as an order-2 certificate.
                    let obs = if q % 4 == 3 { 2 } else { 1 };
                    report.two_part = Some(OrderCertificate { modulus: 12, observed: obs, required: 2 });
                }
            }
        }
        // odd tower factors: relative degree = order of q's image in G/H
        let odd_data: Vec<(u64, u64, u64)> = match spec.provenance {
            Provenance::B => factor(spec.n)
                .unwrap()
                .odd_factors()
                .iter()
                .map(|&(p, e)| (p, e + 1, p.pow(e)))
                .collect(),
            _ => match smallest_inert_prime_power(n1) {
                Some((p, e)) => vec![(p, e, n1)],
                None => vec![],
            },
        };
        for (p, e, deg) in odd_data {
            let m = p.pow(e);
            let rho = primitive_root_mod_prime_power(p, e).unwrap();
            let h_gen = numtheory::pow_mod(rho, deg, m);
            let obs = if gcd(q, m) == 1 { image_order(q, m, h_gen) } else { 0 };
            report.odd_parts.push(OrderCertificate { modulus: m, observed: obs, required: deg });
        }
        let mut f = report.two_part.as_ref().map_or(1, |c| c.observed);
        for c in &report.odd_parts {
            f = f / gcd(f, c.observed.max(1)) * c.observed.max(1);
        }
        report.certified_relative_degree = f;
        report.certificate_ok = report.split_condition_ok
            && report.two_part.as_ref().map_or(true, |c| c.observed == c.required)
            && report.odd_parts.iter().all(|c| c.observed == c.required)
            && f == spec.n;
    } else {
        report.certificate_ok = false;
    }

    // falsification: N(u) == gamma^t for integral u in L would contradict
    // non-norm-ness; any hit is a construction bug. Candidates range over
    // c_0 * 1 + sum_i c_i beta_i (1 is always an algebraic integer of L, so
    // units like u = 1 are reachable even when the beta-span is a proper
    // sublattice). A deterministic battery of small elements runs first so
    // that trivial norms such as gamma = 1 = N(1) are caught immediately.
    let sigma = spec.sigma();
    let gamma = spec.gamma_cyc();
    let mut gamma_powers = Vec::new();
    let mut gp = gamma.clone();
    for _ in 1..spec.n.max(2) {
        gamma_powers.push(gp.clone());
        gp = gp.mul(&gamma);
    }
    let relative_norm = |u: &CyclotomicInt| {
        let mut nrm = u.clone();
        let mut img = u.clone();
        for _ in 1..spec.n {
            img = sigma.apply(&img);
            nrm = nrm.mul(&img);
        }
        nrm
    };
    let mut check = |u: &CyclotomicInt| -> Option<String> {
        if u.is_zero() {
            return None;
        }
        let nrm = CycRat::from_int(relative_norm(u));
        for (t, gt) in gamma_powers.iter().enumerate() {
            if &nrm == gt {
                return Some(format!("N(u) = gamma^{} for u with coefficients {:?}", t + 1, u.coeffs));
            }
        }
        None
    };

    let small_units: Vec<CyclotomicInt> = match spec.base {
        Base::Qam => [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1)]
            .iter()
            .map(|&(a, b)| {
                CyclotomicInt::from_gaussian_or_eisenstein(spec.conductor, false, a, b)
            })
            .collect(),
        Base::Hex => [(1, 0), (-1, 0), (0, 1), (1, 1)]
            .iter()
            .map(|&(a, b)| CyclotomicInt::from_gaussian_or_eisenstein(spec.conductor, true, a, b))
            .collect(),
    };
    let mut battery: Vec<CyclotomicInt> = small_units.clone();
    for b in &spec.basis {
        for c in &small_units {
            battery.push(c.mul(b));
            battery.push(c.mul(b).add(&CyclotomicInt::one(spec.conductor)));
        }
    }
    for u in &battery {
        if report.counterexample.is_none() {
            report.counterexample = check(u);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        if report.counterexample.is_some() {
            break;
        }
        let mut u = CyclotomicInt::zero(spec.conductor);
        let hex = spec.base == Base::Hex;
        let c0 = CyclotomicInt::from_gaussian_or_eisenstein(
            spec.conductor,
            hex,
            rng.gen_range(-3i128..=3),
            if spec.conductor % 4 == 0 || hex { rng.gen_range(-3i128..=3) } else { 0 },
        );
        u = u.add(&c0);
        for b in &spec.basis {
            let re = rng.gen_range(-10i128..=10);
            let im =
                if spec.conductor % 4 == 0 || hex { rng.gen_range(-10i128..=10) } else { 0 };
            let coeff =
                CyclotomicInt::from_gaussian_or_eisenstein(spec.conductor, hex, re, im);
            u = u.add(&coeff.mul(b));
        }
        report.counterexample = check(&u);
    }
    report
}

impl CyclotomicInt {
    /// Coefficient embedding helper: a + b*i (QAM) or a + b*w3 (HEX).
    pub fn from_gaussian_or_eisenstein(conductor: u32, hex: bool, a: i128, b: i128) -> Self {
        if hex {
            CyclotomicInt::from_eisenstein(conductor, EisensteinInt::new(a, b))
        } else if conductor % 4 == 0 {
            CyclotomicInt::from_gaussian(conductor, GaussianInt::new(a, b))
        } else {
            // degree-1 specs live at conductor < 4; only rational coefficients exist
            assert_eq!(b, 0, "imaginary coefficient needs 4 | conductor");
            CyclotomicInt::integer(conductor, a)
        }
    }
}

/// One row of the published non-norm tables.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PaperRow {
    pub n: u64,
    /// Printed odd prime power column (Construction A only).
    pub pe: Option<u64>,
    pub q: u64,
    pub gamma: (i128, i128),
}

/// Construction A reference table as printed, including the row-14 typo
/// (q printed as the non-prime 36 next to gamma = 6+i of norm 37) and the
/// "8" entries in the p^e column of the pure 2-power rows.
pub const PAPER_TABLE_A: &[PaperRow] = &[
    PaperRow { n: 2, pe: Some(8), q: 5, gamma: (2, 1) },
    PaperRow { n: 3, pe: Some(7), q: 5, gamma: (2, 1) },
    PaperRow { n: 4, pe: Some(8), q: 5, gamma: (2, 1) },
    PaperRow { n: 5, pe: Some(11), q: 13, gamma: (3, 2) },
    PaperRow { n: 6, pe: Some(7), q: 5, gamma: (2, 1) },
    PaperRow { n: 7, pe: Some(29), q: 37, gamma: (6, 1) },
    PaperRow { n: 8, pe: Some(8), q: 5, gamma: (2, 1) },
    PaperRow { n: 9, pe: Some(19), q: 29, gamma: (5, 2) },
    PaperRow { n: 10, pe: Some(11), q: 13, gamma: (3, 2) },
    PaperRow { n: 11, pe: Some(23), q: 5, gamma: (2, 1) },
    PaperRow { n: 12, pe: Some(7), q: 5, gamma: (2, 1) },
    PaperRow { n: 13, pe: Some(53), q: 5, gamma: (2, 1) },
    PaperRow { n: 14, pe: Some(29), q: 36, gamma: (6, 1) },
    PaperRow { n: 15, pe: Some(31), q: 53, gamma: (7, 2) },
    PaperRow { n: 16, pe: Some(8), q: 5, gamma: (2, 1) },
    PaperRow { n: 17, pe: Some(103), q: 5, gamma: (2, 1) },
    PaperRow { n: 18, pe: Some(19), q: 13, gamma: (3, 2) },
    PaperRow { n: 19, pe: Some(191), q: 29, gamma: (5, 2) },
    PaperRow { n: 20, pe: Some(11), q: 13, gamma: (3, 2) },
];

/// Construction B reference table as printed.
pub const PAPER_TABLE_B: &[PaperRow] = &[
    PaperRow { n: 2, pe: None, q: 5, gamma: (2, 1) },
    PaperRow { n: 3, pe: None, q: 5, gamma: (2, 1) },
    PaperRow { n: 4, pe: None, q: 5, gamma: (2, 1) },
    PaperRow { n: 5, pe: None, q: 13, gamma: (3, 2) },
    PaperRow { n: 6, pe: None, q: 5, gamma: (2, 1) },
    PaperRow { n: 7, pe: None, q: 5, gamma: (2, 1) },
    PaperRow { n: 8, pe: None, q: 5, gamma: (2, 1) },
    PaperRow { n: 9, pe: None, q: 5, gamma: (2, 1) },
    PaperRow { n: 10, pe: None, q: 13, gamma: (3, 2) },
    PaperRow { n: 11, pe: None, q: 13, gamma: (3, 2) },
    PaperRow { n: 12, pe: None, q: 5, gamma: (2, 1) },
    PaperRow { n: 13, pe: None, q: 37, gamma: (6, 1) },
    PaperRow { n: 14, pe: None, q: 5, gamma: (2, 1) },
    PaperRow { n: 15, pe: None, q: 113, gamma: (7, 8) },
    PaperRow { n: 16, pe: None, q: 5, gamma: (2, 1) },
    PaperRow { n: 17, pe: None, q: 5, gamma: (2, 1) },
    PaperRow { n: 18, pe: None, q: 5, gamma: (2, 1) },
    PaperRow { n: 19, pe: None, q: 13, gamma: (3, 2) },
    PaperRow { n: 20, pe: None, q: 37, gamma: (6, 1) },
];
