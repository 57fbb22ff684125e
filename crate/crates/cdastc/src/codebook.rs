//! From a [`CodeSpec`] to concrete space-time codebooks: QAM/HEX
//! constellations, left-regular-representation code matrices, the
//! linear-dispersion generator mapping coefficient vectors to vec(X),
//! peak-energy normalization, and the rectangular constructions
//! (row deletion and Cartesian products).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cda::{Base, CodeSpec, Gamma};
use crate::cyclotomic::{CycRat, CyclotomicInt};
use crate::numtheory::{EisensteinInt, GaussianInt};

#[derive(Debug, Error)]
pub enum BookError {
    #[error("constellation side M must be even and positive, got {0}")]
    OddM(u32),
    #[error("square build requires T = n (= {n}), got {t}")]
    BadT { n: u64, t: usize },
    #[error("wrong coefficient vector length: expected {expect}, got {got}")]
    BadLength { expect: usize, got: usize },
    #[error("cannot delete {0} rows from a {1}-row code")]
    BadRowSet(usize, usize),
    #[error("cartesian parts must share n_t")]
    MismatchedParts,
    #[error("codebook too large to enumerate: {0} codewords")]
    TooLarge(u128),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid codebook payload: {0}")]
    Invalid(String),
}

/// Odd-coordinate QAM or HEX constellation of M^2 points,
/// {a + i b} or {a + w3 b} with |a|, |b| <= M-1 odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constellation {
    pub kind: Base,
    pub m: u32,
}

impl Constellation {
    pub fn new(kind: Base, m: u32) -> Result<Self, BookError> {
        if m == 0 || m % 2 != 0 {
            return Err(BookError::OddM(m));
        }
        Ok(Constellation { kind, m })
    }

    /// Odd coordinates -(M-1), ..., -1, 1, ..., M-1 in ascending order.
    pub fn axis(&self) -> Vec<i64> {
        let m = self.m as i64;
        (-(m - 1)..=m - 1).step_by(2).collect()
    }

    /// All M^2 points as integer coefficient pairs, lexicographic in (a, b).
    pub fn points(&self) -> Vec<(i64, i64)> {
        let axis = self.axis();
        let mut out = Vec::with_capacity(axis.len() * axis.len());
        for &a in &axis {
            for &b in &axis {
                out.push((a, b));
            }
        }
        out
    }

    pub fn size(&self) -> u64 {
        (self.m as u64) * (self.m as u64)
    }

    pub fn to_complex(&self, p: (i64, i64)) -> Complex64 {
        match self.kind {
            Base::Qam => Complex64::new(p.0 as f64, p.1 as f64),
            Base::Hex => {
                // a + w3 b
                Complex64::new(p.0 as f64 - 0.5 * p.1 as f64, 3f64.sqrt() / 2.0 * p.1 as f64)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Square,
    RowDeleted { rows: Vec<usize> },
    Cartesian { part_times: Vec<usize> },
}

/// Linear-dispersion description of a code: a complex generator taking the
/// length-n_c coefficient vector f (entries from the constellation, index
/// c = thread * n + basis) to vec(X) in column-major order, plus the exact
/// spec needed to recompute difference matrices exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Codebook {
    pub spec: CodeSpec,
    pub constellation: Constellation,
    pub n_t: usize,
    pub t: usize,
    pub shape: Shape,
    /// Which rows of the square parent survive (identity for square books).
    pub rows_kept: Vec<usize>,
    #[serde(with = "cmatrix_serde")]
    pub generator: DMatrix<Complex64>,
    /// Certified peak energy max_f ||X(f)||_F^2 and whether it is exact
    /// (vertex enumeration) or a certified upper bound.
    pub e_max: f64,
    pub e_max_exact: bool,
}

mod cmatrix_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Rows {
        nrows: usize,
        ncols: usize,
        /// row-major [re, im] pairs
        data: Vec<[f64; 2]>,
    }

    pub fn serialize<S: Serializer>(m: &DMatrix<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                data.push([m[(r, c)].re, m[(r, c)].im]);
            }
        }
        Rows { nrows: m.nrows(), ncols: m.ncols(), data }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<Complex64>, D::Error> {
        let rows = Rows::deserialize(d)?;
        if rows.data.len() != rows.nrows * rows.ncols {
            return Err(serde::de::Error::custom("generator size mismatch"));
        }
        Ok(DMatrix::from_fn(rows.nrows, rows.ncols, |r, c| {
            let [re, im] = rows.data[r * rows.ncols + c];
            Complex64::new(re, im)
        }))
    }
}

/// The left regular representation of d = sum_i z^i l_i: entry (r, c) is
/// sigma^c(l_{(r-c) mod n}), multiplied by gamma when r < c.
pub fn left_regular_matrix(
    spec: &CodeSpec,
    ells: &[CyclotomicInt],
) -> Result<Vec<Vec<CycRat>>, BookError> {
    let n = spec.n as usize;
    if ells.len() != n {
        return Err(BookError::BadLength { expect: n, got: ells.len() });
    }
    let gamma = spec.gamma_cyc();
    let mut out = vec![vec![CycRat::zero(spec.conductor); n]; n];
    for c in 0..n {
        let sig = spec.sigma_pow(c as u64);
        for r in 0..n {
            let idx = (r + n - c) % n;
            let mut e = CycRat::from_int(sig.apply(&ells[idx]));
            if r < c {
                e = e.mul(&gamma);
            }
            out[r][c] = e;
        }
    }
    Ok(out)
}

/// Multiplication in the algebra D = sum z^i L: coefficient vectors of
/// d1 * d2 with z^n = gamma and l z = z sigma(l). Used as an independent
/// oracle for the matrix representation.
pub fn algebra_mul(spec: &CodeSpec, d1: &[CycRat], d2: &[CycRat]) -> Vec<CycRat> {
    let n = spec.n as usize;
    assert_eq!(d1.len(), n);
    assert_eq!(d2.len(), n);
    let gamma = spec.gamma_cyc();
    let mut out = vec![CycRat::zero(spec.conductor); n];
    for i in 0..n {
        if d1[i].is_zero() {
            continue;
        }
        for j in 0..n {
            if d2[j].is_zero() {
                continue;
            }
            // z^i a z^j b = z^{i+j} sigma^j(a) b
            let mut term = d1[i].apply_galois(spec.sigma_pow(j as u64)).mul(&d2[j]);
            let mut k = i + j;
            if k >= n {
                k -= n;
                term = term.mul(&gamma);
            }
            out[k] = out[k].add(&term);
        }
    }
    out
}

/// Exact cyclotomic code matrix for integer (Gaussian/Eisenstein) coefficient
/// pairs, one pair per (thread, basis) slot; used for exact NVD work where
/// the coefficients are codeword differences.
pub fn exact_code_matrix(
    spec: &CodeSpec,
    coeffs: &[(i64, i64)],
) -> Result<Vec<Vec<CycRat>>, BookError> {
    let n = spec.n as usize;
    if coeffs.len() != n * n {
        return Err(BookError::BadLength { expect: n * n, got: coeffs.len() });
    }
    let hex = spec.base == Base::Hex;
    let mut ells = Vec::with_capacity(n);
    for i in 0..n {
        let mut l = CyclotomicInt::zero(spec.conductor);
        for (j, b) in spec.basis.iter().enumerate() {
            let (a, bb) = coeffs[i * n + j];
            if a == 0 && bb == 0 {
                continue;
            }
            let c = CyclotomicInt::from_gaussian_or_eisenstein(
                spec.conductor,
                hex,
                a as i128,
                bb as i128,
            );
            l = l.add(&c.mul(b));
        }
        ells.push(l);
    }
    left_regular_matrix(spec, &ells)
}

impl Codebook {
    /// Square codebook: T = n, coefficient index c = thread * n + basis.
    pub fn build(spec: &CodeSpec, m: u32, t: usize) -> Result<Codebook, BookError> {
        let n = spec.n as usize;
        if t != n {
            return Err(BookError::BadT { n: spec.n, t });
        }
        let constellation = Constellation::new(spec.base, m)?;
        let gamma = spec.gamma.embed();
        // columns: vec of the basis matrix for (thread i, basis j)
        let mut generator = DMatrix::<Complex64>::zeros(n * n, n * n);
        // sigma^c(beta_j) embedded
        let mut sig_beta = vec![vec![Complex64::default(); n]; n];
        for (j, b) in spec.basis.iter().enumerate() {
            let mut cur = b.clone();
            for c in 0..n {
                sig_beta[j][c] = cur.embed();
                cur = spec.sigma().apply(&cur);
            }
        }
        for i in 0..n {
            for j in 0..n {
                let col = i * n + j;
                for c in 0..n {
                    let r = (i + c) % n; // row with (r - c) mod n == i
                    let mut v = sig_beta[j][c];
                    if r < c {
                        v *= gamma;
                    }
                    generator[(c * n + r, col)] = v;
                }
            }
        }
        let mut book = Codebook {
            spec: spec.clone(),
            constellation,
            n_t: n,
            t: n,
            shape: Shape::Square,
            rows_kept: (0..n).collect(),
            generator,
            e_max: 0.0,
            e_max_exact: false,
        };
        let (e_max, exact) = book.compute_e_max();
        book.e_max = e_max;
        book.e_max_exact = exact;
        Ok(book)
    }

    pub fn n_coeffs(&self) -> usize {
        self.generator.ncols()
    }

    pub fn codeword_count(&self) -> u128 {
        (self.constellation.size() as u128).pow(self.n_coeffs() as u32)
    }

    /// R = (1/T) log2 |X| in bits per channel use.
    pub fn rate_bpcu(&self) -> f64 {
        self.n_coeffs() as f64 * (self.constellation.size() as f64).log2() / self.t as f64
    }

    /// Stateless indexed codeword accessor: mixed-radix digits of k select
    /// one constellation point per coefficient.
    pub fn codeword_coeffs(&self, k: u128) -> Vec<(i64, i64)> {
        let pts = self.constellation.points();
        let base = pts.len() as u128;
        let mut k = k;
        let mut out = Vec::with_capacity(self.n_coeffs());
        for _ in 0..self.n_coeffs() {
            out.push(pts[(k % base) as usize]);
            k /= base;
        }
        out
    }

    pub fn coeffs_to_complex(&self, coeffs: &[(i64, i64)]) -> nalgebra::DVector<Complex64> {
        nalgebra::DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().map(|&p| self.constellation.to_complex(p)),
        )
    }

    /// The n_t x T matrix for a coefficient vector, reproducible from the
    /// generator to within floating-point error.
    pub fn matrix(&self, coeffs: &[(i64, i64)]) -> DMatrix<Complex64> {
        let v = self.generator.clone() * self.coeffs_to_complex(coeffs);
        DMatrix::from_fn(self.n_t, self.t, |r, c| v[c * self.n_t + r])
    }

    /// Peak energy over the coefficient box. Exact vertex enumeration when
    /// the real dimension 2 n_c <= 20 (the quadratic is convex, so the
    /// maximum sits at a +/-(M-1) vertex); otherwise a certified upper bound
    /// lambda_max(Q) * 2 (M-1)^2 * n_c, reported as inexact.
    fn compute_e_max(&self) -> (f64, bool) {
        let nc = self.n_coeffs();
        let d = 2 * nc;
        let q = self.real_gram();
        let peak = (self.constellation.m - 1) as f64;
        if d <= 20 {
            // Gray-code walk over sign vertices with incremental g = Q s
            let mut s = vec![1.0f64; d];
            let mut g = vec![0.0f64; d];
            for r in 0..d {
                g[r] = (0..d).map(|c| q[(r, c)]).sum();
            }
            let dot = |s: &[f64], g: &[f64]| s.iter().zip(g).map(|(a, b)| a * b).sum::<f64>();
            let mut best = dot(&s, &g);
            let total = 1u64 << (d - 1); // s and -s give the same energy
            let mut prev_gray = 0u64;
            for k in 1..total {
                let gray = k ^ (k >> 1);
                let flip = (gray ^ prev_gray).trailing_zeros() as usize;
                prev_gray = gray;
                let old = s[flip];
                for r in 0..d {
                    g[r] -= 2.0 * old * q[(r, flip)];
                }
                s[flip] = -old;
                let e = dot(&s, &g);
                if e > best {
                    best = e;
                }
            }
            (best * peak * peak, true)
        } else {
            let eig = q.symmetric_eigen();
            let lam = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
            (lam * 2.0 * peak * peak * nc as f64, false)
        }
    }

    /// Real symmetric form of Q = G^H G acting on [Re f; Im f]. HEX
    /// coefficients are a + w3 b, so the integer box maps through the
    /// lattice transform before the Gram.
    fn real_gram(&self) -> DMatrix<f64> {
        let nc = self.n_coeffs();
        // complex generator acting on integer coordinate pairs (a, b):
        // column for a is G_c * basis(a), for b is G_c * basis_b
        let unit_b = match self.constellation.kind {
            Base::Qam => Complex64::new(0.0, 1.0),
            Base::Hex => Complex64::new(-0.5, 3f64.sqrt() / 2.0),
        };
        let rows = self.generator.nrows();
        let mut gr = DMatrix::<f64>::zeros(2 * rows, 2 * nc);
        for c in 0..nc {
            for r in 0..rows {
                let g = self.generator[(r, c)];
                // coefficient a contributes g * a
                gr[(r, c)] = g.re;
                gr[(r + rows, c)] = g.im;
                // coefficient b contributes g * unit_b * b
                let gb = g * unit_b;
                gr[(r, nc + c)] = gb.re;
                gr[(r + rows, nc + c)] = gb.im;
            }
        }
        gr.transpose() * gr
    }

    /// theta = sqrt(T * snr / E_max), the peak-energy normalization making
    /// theta^2 ||X||_F^2 <= T * SNR for every codeword.
    pub fn theta(&self, snr: f64) -> f64 {
        assert!(snr > 0.0, "snr must be positive");
        (self.t as f64 * snr / self.e_max).sqrt()
    }

    /// Row-deletion construction: drop the given antenna rows from every
    /// code matrix. The codebook size is unchanged.
    pub fn row_delete(&self, rows: &[usize]) -> Result<Codebook, BookError> {
        let mut del: Vec<usize> = rows.to_vec();
        del.sort_unstable();
        del.dedup();
        if del.iter().any(|&r| r >= self.n_t) || del.len() >= self.n_t {
            return Err(BookError::BadRowSet(del.len(), self.n_t));
        }
        if del.is_empty() {
            return Ok(self.clone());
        }
        let kept: Vec<usize> = (0..self.n_t).filter(|r| !del.contains(r)).collect();
        let n_t = kept.len();
        let mut generator = DMatrix::<Complex64>::zeros(n_t * self.t, self.n_coeffs());
        for c in 0..self.t {
            for (new_r, &old_r) in kept.iter().enumerate() {
                for col in 0..self.n_coeffs() {
                    generator[(c * n_t + new_r, col)] =
                        self.generator[(c * self.n_t + old_r, col)];
                }
            }
        }
        let rows_kept = kept.iter().map(|&r| self.rows_kept[r]).collect();
        let mut book = Codebook {
            spec: self.spec.clone(),
            constellation: self.constellation,
            n_t,
            t: self.t,
            shape: Shape::RowDeleted { rows: del },
            rows_kept,
            generator,
            e_max: 0.0,
            e_max_exact: false,
        };
        let (e_max, exact) = book.compute_e_max();
        book.e_max = e_max;
        book.e_max_exact = exact;
        Ok(book)
    }

    /// Cartesian-product construction: horizontally stack codewords from
    /// books sharing n_t. Generator is block-diagonal; the coefficient
    /// vector is the concatenation of the parts'.
    pub fn cartesian_product(parts: &[Codebook]) -> Result<Codebook, BookError> {
        let first = parts.first().ok_or(BookError::MismatchedParts)?;
        if parts.len() == 1 {
            return Ok(first.clone());
        }
        if parts.iter().any(|b| {
            b.n_t != first.n_t
                || b.constellation != first.constellation
                || b.spec.base != first.spec.base
        }) {
            return Err(BookError::MismatchedParts);
        }
        let n_t = first.n_t;
        let t: usize = parts.iter().map(|b| b.t).sum();
        let nc: usize = parts.iter().map(|b| b.n_coeffs()).sum();
        let mut generator = DMatrix::<Complex64>::zeros(n_t * t, nc);
        let mut time_off = 0;
        let mut col_off = 0;
        for b in parts {
            for c in 0..b.t {
                for r in 0..n_t {
                    for col in 0..b.n_coeffs() {
                        generator[((time_off + c) * n_t + r, col_off + col)] =
                            b.generator[(c * n_t + r, col)];
                    }
                }
            }
            time_off += b.t;
            col_off += b.n_coeffs();
        }
        // E(f) = sum_k E_k(f_k), so the peak decomposes over the parts
        let e_max = parts.iter().map(|b| b.e_max).sum();
        let e_max_exact = parts.iter().all(|b| b.e_max_exact);
        Ok(Codebook {
            spec: first.spec.clone(),
            constellation: first.constellation,
            n_t,
            t,
            shape: Shape::Cartesian { part_times: parts.iter().map(|b| b.t).collect() },
            rows_kept: first.rows_kept.clone(),
            generator,
            e_max,
            e_max_exact,
        })
    }

    /// Exact cyclotomic matrix of the square parent for a coefficient
    /// (difference) vector, with the deleted rows dropped. Only the full
    /// square matrix supports exact determinants.
    pub fn exact_parent_matrix(&self, coeffs: &[(i64, i64)]) -> Result<Vec<Vec<CycRat>>, BookError> {
        match self.shape {
            Shape::Cartesian { .. } => Err(BookError::Invalid(
                "cartesian books have no single exact parent".into(),
            )),
            _ => exact_code_matrix(&self.spec, coeffs),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("codebook serializes")
    }

    pub fn from_json(s: &str) -> Result<Codebook, BookError> {
        let book: Codebook = serde_json::from_str(s)?;
        book.validate()?;
        Ok(book)
    }

    pub fn validate(&self) -> Result<(), BookError> {
        self.spec.validate().map_err(|e| BookError::Invalid(e.to_string()))?;
        Constellation::new(self.constellation.kind, self.constellation.m)?;
        if self.constellation.kind != self.spec.base {
            return Err(BookError::Invalid("constellation kind != spec base".into()));
        }
        if self.n_t == 0 || self.t == 0 || self.n_t > self.t {
            return Err(BookError::Invalid("bad dimensions".into()));
        }
        if self.generator.nrows() != self.n_t * self.t {
            return Err(BookError::Invalid("generator rows != n_t * T".into()));
        }
        if self.generator.ncols() == 0 || self.generator.ncols() > 4096 {
            return Err(BookError::Invalid("generator columns out of range".into()));
        }
        if self.rows_kept.len() != self.n_t {
            return Err(BookError::Invalid("rows_kept length mismatch".into()));
        }
        if !(self.e_max.is_finite() && self.e_max > 0.0) {
            return Err(BookError::Invalid("e_max must be positive".into()));
        }
        Ok(())
    }
}

/// Binary dump of enumerated codewords for small books: "CDBK", version,
/// n_t, T, count, then count * n_t * T little-endian f64 (re, im) pairs.
pub mod dump {
    use super::*;
    use std::io::Write;

    pub const MAGIC: [u8; 4] = *b"CDBK";
    pub const VERSION: u32 = 1;
    pub const MAX_DUMP_CODEWORDS: u128 = 1 << 20;

    pub fn write(book: &Codebook, out: &mut impl Write) -> std::io::Result<()> {
        let count = book.codeword_count();
        assert!(count <= MAX_DUMP_CODEWORDS, "dump is for small books only");
        out.write_all(&MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&(book.n_t as u32).to_le_bytes())?;
        out.write_all(&(book.t as u32).to_le_bytes())?;
        out.write_all(&(count as u64).to_le_bytes())?;
        for k in 0..count {
            let x = book.matrix(&book.codeword_coeffs(k));
            for c in 0..book.t {
                for r in 0..book.n_t {
                    out.write_all(&x[(r, c)].re.to_le_bytes())?;
                    out.write_all(&x[(r, c)].im.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    /// Parse and validate a codeword dump, returning (n_t, T, codewords).
    /// Rejects bad magic, version, absurd dimensions, and size mismatches.
    pub fn read(bytes: &[u8]) -> Result<(usize, usize, Vec<DMatrix<Complex64>>), String> {
        if bytes.len() < 20 {
            return Err("truncated header".into());
        }
        if bytes[0..4] != MAGIC {
            return Err("bad magic".into());
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        if u32_at(4) != VERSION {
            return Err("unsupported version".into());
        }
        let n_t = u32_at(8) as usize;
        let t = u32_at(12) as usize;
        let count = u64::from_le_bytes(bytes[16..24].try_into().map_err(|_| "truncated")?) as usize;
        if n_t == 0 || t == 0 || n_t > 64 || t > 64 || n_t > t {
            return Err("bad dimensions".into());
        }
        if count as u128 > MAX_DUMP_CODEWORDS {
            return Err("count exceeds cap".into());
        }
        let per = n_t * t * 16;
        let need = 24usize
            .checked_add(per.checked_mul(count).ok_or("overflow")?)
            .ok_or("overflow")?;
        if bytes.len() != need {
            return Err(format!("payload size {} != expected {}", bytes.len(), need));
        }
        let mut words = Vec::with_capacity(count);
        let mut off = 24;
        for _ in 0..count {
            let mut m = DMatrix::<Complex64>::zeros(n_t, t);
            for c in 0..t {
                for r in 0..n_t {
                    let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
                    let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
                    if !re.is_finite() || !im.is_finite() {
                        return Err("non-finite entry".into());
                    }
                    m[(r, c)] = Complex64::new(re, im);
                    off += 16;
                }
            }
            words.push(m);
        }
        Ok((n_t, t, words))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cda::{construct_a, perfect_3x3_spec};
    use crate::cyclotomic::exact_det_rat;

    #[test]
    fn constellation_shape_and_energy() {
        for kind in [Base::Qam, Base::Hex] {
            for m in [2u32, 4, 6] {
                let c = Constellation::new(kind, m).unwrap();
                let pts = c.points();
                assert_eq!(pts.len(), (m * m) as usize);
                for &p in &pts {
                    assert!(p.0 % 2 != 0 && p.1 % 2 != 0);
                    let e = c.to_complex(p).norm_sqr();
                    assert!(e <= 2.0 * (m as f64) * (m as f64) + 1e-9, "|x|^2 <= 2 M^2");
                }
            }
        }
        assert!(Constellation::new(Base::Qam, 3).is_err());
    }

    #[test]
    fn left_regular_layout_n2() {
        let spec = construct_a(2).unwrap();
        let l0 = CyclotomicInt::one(spec.conductor);
        let l1 = CyclotomicInt::root_power(spec.conductor, 1);
        let m = left_regular_matrix(&spec, &[l0.clone(), l1.clone()]).unwrap();
        let gamma = spec.gamma_cyc();
        let sigma = spec.sigma();
        assert_eq!(m[0][0], CycRat::from_int(l0.clone()));
        assert_eq!(m[1][0], CycRat::from_int(l1.clone()));
        assert_eq!(m[0][1], CycRat::from_int(sigma.apply(&l1)).mul(&gamma));
        assert_eq!(m[1][1], CycRat::from_int(sigma.apply(&l0)));
        // n = 1 degenerates to [l0]
        let spec1 = crate::cda::construct_a(1).unwrap();
        let m1 = left_regular_matrix(&spec1, &[CyclotomicInt::one(4)]).unwrap();
        assert_eq!(m1.len(), 1);
        assert!(left_regular_matrix(&spec, &[l0]).is_err());
    }

    // matrix of d1 * d2 equals matrix(d1) * matrix(d2), with the algebra
    // product computed independently from the relation l z = z sigma(l)
    #[test]
    fn left_regular_is_multiplicative() {
        use rand::{Rng, SeedableRng};
        let spec = construct_a(2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let rand_elem = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<CycRat> {
                (0..2)
                    .map(|_| {
                        let coeffs =
                            (0..spec.conductor).map(|_| rng.gen_range(-4i128..=4)).collect();
                        CycRat::from_int(CyclotomicInt::from_coeffs(spec.conductor, coeffs))
                    })
                    .collect()
            };
            let d1 = rand_elem(&mut rng);
            let d2 = rand_elem(&mut rng);
            let prod = algebra_mul(&spec, &d1, &d2);
            let m1 = left_regular_matrix(
                &spec,
                &d1.iter().map(|e| e.num.clone()).collect::<Vec<_>>(),
            )
            .unwrap();
            let m2 = left_regular_matrix(
                &spec,
                &d2.iter().map(|e| e.num.clone()).collect::<Vec<_>>(),
            )
            .unwrap();
            let mp = left_regular_matrix(
                &spec,
                &prod.iter().map(|e| e.num.clone()).collect::<Vec<_>>(),
            )
            .unwrap();
            // matrix product m1 * m2
            for r in 0..2 {
                for c in 0..2 {
                    let mut acc = CycRat::zero(spec.conductor);
                    for k in 0..2 {
                        acc = acc.add(&m1[r][k].mul(&m2[k][c]));
                    }
                    assert_eq!(acc, mp[r][c], "entry ({r},{c})");
                }
            }
        }
    }

    #[test]
    fn determinant_projects_to_base_ring() {
        let spec = construct_a(2).unwrap();
        let m = exact_code_matrix(&spec, &[(1, 0), (3, -1), (-1, 2), (1, 1)]).unwrap();
        let det = exact_det_rat(&m).unwrap();
        assert_eq!(det.den, 1);
        let g = det.num.project_to_gaussian().expect("det lies in Z[i]");
        // cross-check against the 2x2 closed form l0 s(l0) - gamma l1 s(l1)
        let numeric = {
            let a = m[0][0].embed() * m[1][1].embed() - m[0][1].embed() * m[1][0].embed();
            a
        };
        assert!((Complex64::new(g.re as f64, g.im as f64) - numeric).norm() < 1e-6);
    }

    #[test]
    fn codebook_sizes_and_rate() {
        let spec = construct_a(2).unwrap();
        let book = Codebook::build(&spec, 2, 2).unwrap();
        assert_eq!(book.codeword_count(), 256);
        assert_eq!(book.n_coeffs(), 4);
        assert!((book.rate_bpcu() - 4.0).abs() < 1e-12);
        assert!(Codebook::build(&spec, 3, 2).is_err());
        assert!(Codebook::build(&spec, 2, 3).is_err());
        // 3x3 at M=2: 4^9 codewords, 6 bpcu for the T=3 code
        let p = perfect_3x3_spec();
        let b3 = Codebook::build(&p, 2, 3).unwrap();
        assert_eq!(b3.codeword_count(), 1u128 << 18);
        assert!((b3.rate_bpcu() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn generator_is_linear() {
        use rand::{Rng, SeedableRng};
        let spec = construct_a(2).unwrap();
        let book = Codebook::build(&spec, 4, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let f1: Vec<(i64, i64)> =
                (0..4).map(|_| (rng.gen_range(-9..9), rng.gen_range(-9..9))).collect();
            let f2: Vec<(i64, i64)> =
                (0..4).map(|_| (rng.gen_range(-9..9), rng.gen_range(-9..9))).collect();
            let sum: Vec<(i64, i64)> =
                f1.iter().zip(&f2).map(|(a, b)| (a.0 + b.0, a.1 + b.1)).collect();
            let lhs = book.matrix(&f1) + book.matrix(&f2);
            let rhs = book.matrix(&sum);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    // Theorem 5's decodability observation, exhaustively at M = 2:
    // no two codewords agree in any single row or column.
    #[test]
    fn unique_rows_and_columns() {
        let spec = construct_a(2).unwrap();
        let book = Codebook::build(&spec, 2, 2).unwrap();
        let words: Vec<_> = (0..book.codeword_count())
            .map(|k| book.matrix(&book.codeword_coeffs(k)))
            .collect();
        let key = |v: &[Complex64]| -> Vec<(i64, i64)> {
            v.iter().map(|z| ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64)).collect()
        };
        for dim in 0..2 {
            for idx in 0..2 {
                let mut seen = std::collections::HashSet::new();
                for w in &words {
                    let slice: Vec<Complex64> = if dim == 0 {
                        w.row(idx).iter().cloned().collect()
                    } else {
                        w.column(idx).iter().cloned().collect()
                    };
                    assert!(seen.insert(key(&slice)), "collision in {} {}", if dim == 0 { "row" } else { "column" }, idx);
                }
            }
        }
    }

    #[test]
    fn energy_bound_certified() {
        let spec = construct_a(2).unwrap();
        for m in [2u32, 4] {
            let book = Codebook::build(&spec, m, 2).unwrap();
            assert!(book.e_max_exact);
            let snr = 100.0;
            let theta = book.theta(snr);
            let mut worst = 0.0f64;
            for k in 0..book.codeword_count() {
                let x = book.matrix(&book.codeword_coeffs(k));
                worst = worst.max(x.norm_squared());
            }
            assert!(worst <= book.e_max * (1.0 + 1e-9), "E_max covers all codewords");
            assert!((worst - book.e_max).abs() < 1e-6 * book.e_max, "vertex max is attained");
            assert!(theta * theta * worst <= book.t as f64 * snr * (1.0 + 1e-9));
        }
    }

    #[test]
    fn theta_homogeneity_and_degenerate_book() {
        let spec = construct_a(2).unwrap();
        let book = Codebook::build(&spec, 2, 2).unwrap();
        let mut doubled = book.clone();
        doubled.generator *= Complex64::new(2.0, 0.0);
        let (e, exact) = doubled.compute_e_max();
        doubled.e_max = e;
        doubled.e_max_exact = exact;
        let t1 = book.theta(10.0);
        let t2 = doubled.theta(10.0);
        // doubling all generator magnitudes quadruples E_max, halving theta^2
        assert!((t2 * t2 * 4.0 - t1 * t1).abs() < 1e-9 * t1 * t1);
        // degenerate single-codeword book: ||X||_F^2 = T snr gives theta = 1
        let mut degen = book.clone();
        degen.e_max = degen.t as f64 * 10.0;
        assert!((degen.theta(10.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn row_delete_bookkeeping() {
        let p = perfect_3x3_spec();
        let square = Codebook::build(&p, 2, 3).unwrap();
        let rect = square.row_delete(&[0]).unwrap();
        assert_eq!(rect.n_t, 2);
        assert_eq!(rect.t, 3);
        assert_eq!(rect.codeword_count(), square.codeword_count());
        assert_eq!(rect.rows_kept, vec![1, 2]);
        // deleting nothing is the identity
        let same = square.row_delete(&[]).unwrap();
        assert_eq!(same.generator, square.generator);
        assert!(square.row_delete(&[0, 1, 2]).is_err());
        assert!(square.row_delete(&[7]).is_err());
        // deleted generator rows match the parent's kept rows
        let f: Vec<(i64, i64)> = (0..9).map(|i| (1 + 2 * (i as i64 % 2), -1)).collect();
        let xs = square.matrix(&f);
        let xr = rect.matrix(&f);
        for c in 0..3 {
            for (new_r, &old_r) in [1usize, 2].iter().enumerate() {
                assert_eq!(xs[(old_r, c)], xr[(new_r, c)]);
            }
        }
    }

    #[test]
    fn cartesian_bookkeeping() {
        let spec = construct_a(2).unwrap();
        let b = Codebook::build(&spec, 2, 2).unwrap();
        let one = Codebook::cartesian_product(std::slice::from_ref(&b)).unwrap();
        assert_eq!(one.generator, b.generator);
        let two = Codebook::cartesian_product(&[b.clone(), b.clone()]).unwrap();
        assert_eq!(two.t, 4);
        assert_eq!(two.n_t, 2);
        assert_eq!(two.codeword_count(), b.codeword_count() * b.codeword_count());
        assert!((two.e_max - 2.0 * b.e_max).abs() < 1e-9);
        // stacked matrix equals the parts side by side
        let f: Vec<(i64, i64)> = (0..8).map(|i| ((i as i64 % 2) * 2 - 1, 1)).collect();
        let x = two.matrix(&f);
        let x1 = b.matrix(&f[0..4]);
        let x2 = b.matrix(&f[4..8]);
        for r in 0..2 {
            for c in 0..2 {
                assert_eq!(x[(r, c)], x1[(r, c)]);
                assert_eq!(x[(r, c + 2)], x2[(r, c)]);
            }
        }
    }

    #[test]
    fn perfect_code_generator_is_orthogonal_scaled() {
        let p = perfect_3x3_spec();
        let book = Codebook::build(&p, 2, 3).unwrap();
        let gram = book.generator.adjoint() * &book.generator;
        let scale = gram[(0, 0)].re;
        assert!((scale - 49.0).abs() < 1e-9);
        let mut max_off = 0.0f64;
        for r in 0..9 {
            for c in 0..9 {
                if r != c {
                    max_off = max_off.max(gram[(r, c)].norm());
                }
            }
        }
        // measured deviation from exact orthogonality (cubic shaping)
        assert!(max_off < 1e-9, "off-diagonal Gram leakage {max_off}");
    }

    #[test]
    fn codebook_json_roundtrip() {
        let spec = construct_a(2).unwrap();
        let book = Codebook::build(&spec, 2, 2).unwrap();
        let json = book.to_json();
        let back = Codebook::from_json(&json).unwrap();
        assert_eq!(back.generator, book.generator);
        assert_eq!(back.n_t, book.n_t);
        assert!((back.e_max - book.e_max).abs() < 1e-12);
    }

    #[test]
    fn dump_roundtrip_and_rejects_corruption() {
        let spec = construct_a(1).unwrap();
        let book = Codebook::build(&spec, 2, 1).unwrap();
        let mut buf = Vec::new();
        dump::write(&book, &mut buf).unwrap();
        let (n_t, t, words) = dump::read(&buf).unwrap();
        assert_eq!((n_t, t), (1, 1));
        assert_eq!(words.len() as u128, book.codeword_count());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(dump::read(&bad).is_err());
        let mut truncated = buf.clone();
        truncated.pop();
        assert!(dump::read(&truncated).is_err());
    }
}
