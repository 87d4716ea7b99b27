//! Exact integer linear algebra: arbitrary-precision square matrices acting
//! on lattices, characteristic polynomials, cyclotomic factor analysis, and
//! the elliptic / parabolic / loxodromic trichotomy for lattice isometries.
//!
//! Conventions, used everywhere in this crate:
//!
//! * **columns are images** — the image of the `j`-th basis vector under the
//!   matrix is its `j`-th column;
//! * characteristic polynomials are `det(tI - M)`, monic, with coefficients
//!   stored in ascending degree order;
//! * matrix JSON is an array of rows, each entry a decimal integer string
//!   (plain JSON integers are also accepted on input).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Errors from exact linear algebra operations.
#[derive(Debug, Clone, thiserror::Error)]
pub enum ExactLinError {
    /// Input rows do not form a nonempty square matrix.
    #[error("matrix must be square and nonempty")]
    NonSquare,
    /// Two operands have different dimensions.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    /// The matrix is quasi-unipotent but no exponent within the bound
    /// certifies finite order or unipotency.
    #[error("quasi-unipotent matrix order exceeds bound {bound}")]
    OrderBoundExceeded { bound: u64 },
    /// An iterative numeric routine exhausted its budget.
    #[error("iteration budget exhausted without convergence")]
    NonConvergence,
    /// Malformed matrix JSON.
    #[error("matrix parse error: {0}")]
    Parse(String),
}

// ---------------------------------------------------------------------------
// LatticeMatrix
// ---------------------------------------------------------------------------

/// Square integer matrix with arbitrary-precision entries, acting on a
/// lattice by the columns-are-images convention.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LatticeMatrix {
    dim: usize,
    /// Row-major entries, length `dim * dim`.
    entries: Vec<BigInt>,
}

impl fmt::Debug for LatticeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "LatticeMatrix {}x{} [", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| self.entry(r, c).to_string())
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl LatticeMatrix {
    /// Builds a matrix from row vectors; every row must have the same length
    /// as the number of rows.
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self, ExactLinError> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(ExactLinError::NonSquare);
        }
        Ok(Self {
            dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience constructor from machine integers.
    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self, ExactLinError> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = BigInt::one();
        }
        Self { dim, entries }
    }

    /// Diagonal matrix (used for Gram forms of orthogonal bases).
    pub fn diagonal(diag: &[i64]) -> Self {
        let dim = diag.len();
        let mut entries = vec![BigInt::zero(); dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * dim + i] = BigInt::from(d);
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> &BigInt {
        &self.entries[row * self.dim + col]
    }

    fn entry_mut(&mut self, row: usize, col: usize) -> &mut BigInt {
        &mut self.entries[row * self.dim + col]
    }

    /// Matrix product `self * other` (apply `other` first when composing
    /// column-action maps).
    pub fn mul(&self, other: &Self) -> Result<Self, ExactLinError> {
        if self.dim != other.dim {
            return Err(ExactLinError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let n = self.dim;
        let mut out = Self {
            dim: n,
            entries: vec![BigInt::zero(); n * n],
        };
        for i in 0..n {
            for k in 0..n {
                let a = self.entry(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.entry(k, j);
                    if !b.is_zero() {
                        *out.entry_mut(i, j) += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, ExactLinError> {
        if self.dim != other.dim {
            return Err(ExactLinError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ExactLinError> {
        if self.dim != other.dim {
            return Err(ExactLinError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn neg(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| -a).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for r in 0..n {
            for c in 0..n {
                out.entries[c * n + r] = self.entries[r * n + c].clone();
            }
        }
        out
    }

    /// Binary exponentiation; `pow(0)` is the identity.
    pub fn pow(&self, mut k: u64) -> Self {
        let mut result = Self::identity(self.dim);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base).expect("same dim");
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base).expect("same dim");
            }
        }
        result
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    fn trace(&self) -> BigInt {
        (0..self.dim).map(|i| self.entry(i, i).clone()).sum()
    }

    fn add_scalar_identity(&self, c: &BigInt) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            *out.entry_mut(i, i) += c;
        }
        out
    }

    fn scale(&self, c: &BigInt) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * c).collect(),
        }
    }

    /// Image of an integer vector (coefficients in the lattice basis).
    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.dim, "vector length must match dimension");
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.entry(r, c) * &v[c]).sum())
            .collect()
    }

    /// Largest row sum of absolute values; an upper bound for the spectral
    /// radius.
    pub fn max_abs_row_sum(&self) -> BigInt {
        (0..self.dim)
            .map(|r| -> BigInt { (0..self.dim).map(|c| self.entry(r, c).abs()).sum() })
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    /// Exact characteristic polynomial `det(tI - M)` by the
    /// Faddeev–LeVerrier recurrence. Every division is exact; this is
    /// asserted.
    pub fn char_poly(&self) -> IntPolynomial {
        let n = self.dim;
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[n] = BigInt::one();
        let mut m_k = Self::identity(n);
        for k in 1..=n {
            let n_k = self.mul(&m_k).expect("same dim");
            let tr = n_k.trace();
            let (c, rem) = (-tr).div_rem(&BigInt::from(k as u64));
            assert!(rem.is_zero(), "Faddeev-LeVerrier division must be exact");
            coeffs[n - k] = c.clone();
            if k < n {
                m_k = n_k.add_scalar_identity(&c);
            }
        }
        IntPolynomial::new(coeffs)
    }

    /// Exact inverse, defined when `det = ±1` (lattice automorphisms).
    /// Returns `None` otherwise.
    pub fn inverse(&self) -> Option<Self> {
        let p = self.char_poly();
        let c0 = p.coeff(0);
        let n = self.dim;
        if !(c0 == BigInt::one() || c0 == -BigInt::one()) {
            return None;
        }
        // B = M^(n-1) + c_{n-1} M^(n-2) + ... + c_1 I, so that M B = -c_0 I.
        let mut b = Self::identity(n);
        for k in (1..n).rev() {
            b = b.mul(self).expect("same dim");
            b = b.add_scalar_identity(&p.coeff(k));
        }
        Some(if c0 == BigInt::one() {
            b.scale(&BigInt::from(-1))
        } else {
            b
        })
    }

    /// Exact isometry test: `Mᵀ G M = G`.
    pub fn preserves_form(&self, gram: &Self) -> bool {
        if self.dim != gram.dim {
            return false;
        }
        let lhs = self
            .transpose()
            .mul(gram)
            .and_then(|t| t.mul(self))
            .expect("same dim");
        lhs == *gram
    }

    /// Serializes as a JSON array of rows of decimal integer strings
    /// (columns-are-images convention; see module docs).
    pub fn to_json_string(&self) -> String {
        let rows: Vec<Vec<String>> = (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.entry(r, c).to_string()).collect())
            .collect();
        serde_json::to_string(&rows).expect("string matrix serializes")
    }

    /// Parses the JSON matrix format; accepts decimal strings or plain JSON
    /// integers as entries.
    pub fn from_json_str(s: &str) -> Result<Self, ExactLinError> {
        let v: serde_json::Value =
            serde_json::from_str(s).map_err(|e| ExactLinError::Parse(e.to_string()))?;
        Self::from_json_value(&v)
    }

    /// Same as [`from_json_str`](Self::from_json_str) for already-parsed
    /// JSON values.
    pub fn from_json_value(v: &serde_json::Value) -> Result<Self, ExactLinError> {
        let rows_v = v
            .as_array()
            .ok_or_else(|| ExactLinError::Parse("expected an array of rows".into()))?;
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(rows_v.len());
        for row_v in rows_v {
            let row_arr = row_v
                .as_array()
                .ok_or_else(|| ExactLinError::Parse("expected each row to be an array".into()))?;
            let mut row = Vec::with_capacity(row_arr.len());
            for e in row_arr {
                let val = match e {
                    serde_json::Value::String(s) => s
                        .trim()
                        .parse::<BigInt>()
                        .map_err(|_| ExactLinError::Parse(format!("bad integer string {s:?}")))?,
                    serde_json::Value::Number(n) => match n.as_i64() {
                        Some(i) => BigInt::from(i),
                        None => {
                            return Err(ExactLinError::Parse(format!(
                                "entry {n} is not an integer"
                            )))
                        }
                    },
                    other => {
                        return Err(ExactLinError::Parse(format!(
                            "entry {other} is neither a string nor an integer"
                        )))
                    }
                };
                row.push(val);
            }
            rows.push(row);
        }
        Self::from_rows(rows)
    }
}

// ---------------------------------------------------------------------------
// IntPolynomial
// ---------------------------------------------------------------------------

/// Integer polynomial with arbitrary-precision coefficients in ascending
/// degree order. The zero polynomial is stored as a single zero coefficient.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPolynomial({self})")
    }
}

impl IntPolynomial {
    /// Builds from ascending coefficients, trimming trailing zeros.
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map(Zero::is_zero).unwrap_or(false) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigInt::zero());
        }
        Self { coeffs }
    }

    pub fn from_i64(ascending: &[i64]) -> Self {
        Self::new(ascending.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self::new(vec![])
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `t^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn leading(&self) -> &BigInt {
        self.coeffs.last().expect("nonempty by invariant")
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    pub fn eval_bigint(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c.to_f64().unwrap_or(f64::NAN);
        }
        acc
    }

    /// Exact sign of `p(num/den)` for `den > 0`, evaluated without rounding
    /// as the sign of `Σ c_k num^k den^(deg-k)`.
    pub fn sign_at_rational(&self, num: &BigInt, den: &BigInt) -> i32 {
        assert!(den.is_positive(), "denominator must be positive");
        let mut acc = self.coeffs.last().cloned().unwrap_or_else(BigInt::zero);
        let mut den_pow = BigInt::one();
        for c in self.coeffs.iter().rev().skip(1) {
            den_pow *= den;
            acc = acc * num + c * &den_pow;
        }
        match acc.sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero)
                        + other.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero)
                })
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Long division by a monic divisor; returns `(quotient, remainder)`.
    /// `None` if the divisor is zero or not monic.
    pub fn divrem(&self, divisor: &Self) -> Option<(Self, Self)> {
        if divisor.is_zero() || !divisor.is_monic() {
            return None;
        }
        let d = divisor.degree();
        if self.degree() < d || self.is_zero() {
            return Some((Self::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); self.degree() - d + 1];
        for k in (d..rem.len()).rev() {
            let factor = rem[k].clone();
            if factor.is_zero() {
                continue;
            }
            quot[k - d] = factor.clone();
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                let idx = k - d + j;
                rem[idx] -= &factor * dc;
            }
        }
        rem.truncate(d.max(1));
        Some((Self::new(quot), Self::new(rem)))
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for k in (0..self.coeffs.len()).rev() {
            let c = &self.coeffs[k];
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let unit = mag.is_one();
            match (k, unit) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "t")?,
                (1, false) => write!(f, "{mag}*t")?,
                (_, true) => write!(f, "t^{k}")?,
                (_, false) => write!(f, "{mag}*t^{k}")?,
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Cyclotomic polynomials
// ---------------------------------------------------------------------------

/// Euler's totient.
pub fn euler_phi(n: u64) -> u64 {
    assert!(n >= 1);
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

fn sorted_divisors(n: u64) -> Vec<u64> {
    let mut divs = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            divs.push(d);
            if d != n / d {
                divs.push(n / d);
            }
        }
        d += 1;
    }
    divs.sort_unstable();
    divs
}

/// The `n`-th cyclotomic polynomial, computed exactly as
/// `(x^n - 1) / Π_{d | n, d < n} Φ_d`.
pub fn cyclotomic(n: u64) -> IntPolynomial {
    assert!(n >= 1);
    let mut cache: BTreeMap<u64, IntPolynomial> = BTreeMap::new();
    for m in sorted_divisors(n) {
        let mut coeffs = vec![BigInt::zero(); (m + 1) as usize];
        coeffs[0] = BigInt::from(-1);
        coeffs[m as usize] = BigInt::one();
        let mut acc = IntPolynomial::new(coeffs);
        for d in sorted_divisors(m) {
            if d == m {
                continue;
            }
            let (q, r) = acc.divrem(&cache[&d]).expect("cyclotomics are monic");
            assert!(r.is_zero(), "cyclotomic division must be exact");
            acc = q;
        }
        cache.insert(m, acc);
    }
    cache.remove(&n).expect("computed above")
}

/// Divides out every cyclotomic factor of a monic integer polynomial,
/// iterating to full multiplicity. Returns the cyclotomic-free part and the
/// list of `(n, multiplicity)` factors found. By Kronecker's theorem, a
/// nontrivial cyclotomic-free part certifies an eigenvalue off the unit
/// circle (for reciprocal isometry spectra, a real eigenvalue > 1).
pub fn strip_cyclotomic(p: &IntPolynomial) -> (IntPolynomial, Vec<(u64, u32)>) {
    assert!(p.is_monic(), "cyclotomic stripping expects a monic polynomial");
    let mut current = p.clone();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let d0 = current.degree() as u64;
    if d0 == 0 {
        return (current, factors);
    }
    // phi(n) >= sqrt(n/2), so phi(n) <= d forces n <= 2 d^2.
    let n_max = 2 * d0 * d0 + 1;
    for n in 1..=n_max {
        if current.degree() == 0 {
            break;
        }
        if euler_phi(n) > current.degree() as u64 {
            continue;
        }
        let phi_n = cyclotomic(n);
        let mut mult = 0u32;
        loop {
            match current.divrem(&phi_n) {
                Some((q, r)) if r.is_zero() => {
                    current = q;
                    mult += 1;
                    if current.degree() == 0 {
                        break;
                    }
                }
                _ => break,
            }
        }
        if mult > 0 {
            factors.push((n, mult));
        }
    }
    (current, factors)
}

// ---------------------------------------------------------------------------
// Spectral radius and classification
// ---------------------------------------------------------------------------

/// Largest real root `>= 1` of `p` by exact-sign dyadic bisection on
/// `[1, hi]`, valid when `sign p(1) < 0 < sign p(hi)`. Returns `None` when
/// the premise fails (dominant root not real > 1 in this bracket).
fn largest_real_root_bisect(p: &IntPolynomial, hi_int: &BigInt, tol: f64) -> Option<f64> {
    let one = BigInt::one();
    if p.sign_at_rational(&one, &one) >= 0 {
        return None;
    }
    if p.sign_at_rational(hi_int, &one) <= 0 {
        return None;
    }
    // lo/2^e and hi/2^e with a shared exponent.
    let mut lo = BigInt::one();
    let mut hi = hi_int.clone();
    let mut e: i32 = 0;
    for _ in 0..300 {
        let width = (&hi - &lo).to_f64().unwrap_or(f64::INFINITY) * 0.5f64.powi(e);
        if width < tol {
            break;
        }
        // midpoint (lo + hi) / 2^(e+1)
        let mid = &lo + &hi;
        let new_denom_exp = e + 1;
        let den = BigInt::one() << (new_denom_exp as usize);
        match p.sign_at_rational(&mid, &den) {
            0 => {
                return mid.to_f64().map(|m| m * 0.5f64.powi(new_denom_exp));
            }
            s if s > 0 => {
                lo <<= 1;
                hi = mid;
            }
            _ => {
                hi <<= 1;
                lo = mid;
            }
        }
        e = new_denom_exp;
    }
    (&lo + &hi)
        .to_f64()
        .map(|m| m * 0.5f64.powi(e + 1))
}

/// Power-iteration fallback (averaged log-growth, robust to complex dominant
/// pairs). Used only when the bisection premise fails.
fn power_iteration_radius(m: &LatticeMatrix) -> Result<f64, ExactLinError> {
    let n = m.dim();
    let a: Vec<f64> = m
        .entries
        .iter()
        .map(|e| e.to_f64().unwrap_or(f64::NAN))
        .collect();
    if a.iter().any(|x| !x.is_finite()) {
        return Err(ExactLinError::NonConvergence);
    }
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) * 1e-3).collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = norm(&v);
    for x in v.iter_mut() {
        *x /= nv;
    }
    let iters = 20_000usize;
    let burn = iters / 2;
    let mut log_sum = 0.0;
    let mut counted = 0usize;
    for it in 0..iters {
        let mut w = vec![0.0; n];
        for r in 0..n {
            let mut s = 0.0;
            for c in 0..n {
                s += a[r * n + c] * v[c];
            }
            w[r] = s;
        }
        let nw = norm(&w);
        if !nw.is_finite() || nw == 0.0 {
            return Err(ExactLinError::NonConvergence);
        }
        if it >= burn {
            log_sum += nw.ln();
            counted += 1;
        }
        for x in w.iter_mut() {
            *x /= nw;
        }
        v = w;
    }
    Ok((log_sum / counted as f64).exp())
}

/// Spectral radius of a square integer matrix to absolute accuracy `tol`:
/// exact-sign bisection on the cyclotomic-free factor of the characteristic
/// polynomial over `[1, 1 + max-row-sum]`, with a power-iteration fallback.
pub fn spectral_radius(m: &LatticeMatrix, tol: f64) -> Result<f64, ExactLinError> {
    assert!(tol > 0.0);
    let p = m.char_poly();
    let (salem, _) = strip_cyclotomic(&p);
    if salem.degree() == 0 {
        return Ok(1.0);
    }
    let hi = m.max_abs_row_sum() + BigInt::one();
    match largest_real_root_bisect(&salem, &hi, tol) {
        Some(r) => Ok(r),
        None => power_iteration_radius(m),
    }
}

/// How an isometry of a hyperbolic lattice acts: finite order, quasi-unipotent
/// of infinite order, or with spectral radius above 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassKind {
    Elliptic,
    Parabolic,
    Loxodromic,
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassKind::Elliptic => "elliptic",
            ClassKind::Parabolic => "parabolic",
            ClassKind::Loxodromic => "loxodromic",
        };
        write!(f, "{s}")
    }
}

/// Outcome of [`classify_isometry`]: the trichotomy kind, the spectral
/// radius (`1` unless loxodromic), the exact finite order for elliptic
/// elements, and the cyclotomic-free characteristic factor for loxodromic
/// ones. `log(lambda)` is the topological entropy of the inducing
/// automorphism.
#[derive(Debug, Clone)]
pub struct Classification {
    pub kind: ClassKind,
    pub lambda: f64,
    pub order: Option<u64>,
    pub salem_factor: Option<IntPolynomial>,
}

/// Classifies a lattice isometry as elliptic, parabolic, or loxodromic.
///
/// Loxodromic: the characteristic polynomial has a nontrivial cyclotomic-free
/// factor (spectral radius > 1). Otherwise all eigenvalues are roots of
/// unity; with `k` the lcm of their orders (which must stay within
/// `order_bound`), the matrix is elliptic when `m^k = I` — the reported order
/// is the least divisor of `k` that works — and parabolic when `m^k` is
/// unipotent but not the identity.
pub fn classify_isometry(
    m: &LatticeMatrix,
    order_bound: u64,
) -> Result<Classification, ExactLinError> {
    let p = m.char_poly();
    let (salem, factors) = strip_cyclotomic(&p);
    if salem.degree() >= 1 {
        let tol = 1e-12;
        let hi = m.max_abs_row_sum() + BigInt::one();
        let lambda = match largest_real_root_bisect(&salem, &hi, tol) {
            Some(r) => r,
            None => power_iteration_radius(m)?,
        };
        return Ok(Classification {
            kind: ClassKind::Loxodromic,
            lambda,
            order: None,
            salem_factor: Some(salem),
        });
    }
    // Quasi-unipotent: every eigenvalue is a root of unity of order dividing k.
    let mut k: u64 = 1;
    for &(n, _) in &factors {
        k = num_integer::lcm(k, n);
        if k > order_bound {
            return Err(ExactLinError::OrderBoundExceeded { bound: order_bound });
        }
    }
    let mk = m.pow(k);
    if mk.is_identity() {
        let order = sorted_divisors(k)
            .into_iter()
            .find(|&d| m.pow(d).is_identity())
            .expect("k itself certifies");
        Ok(Classification {
            kind: ClassKind::Elliptic,
            lambda: 1.0,
            order: Some(order),
            salem_factor: None,
        })
    } else {
        // All eigenvalues of m^k equal 1, so m^k - I must be nilpotent.
        let nilpotent = mk
            .sub(&LatticeMatrix::identity(m.dim()))
            .expect("same dim")
            .pow(m.dim() as u64)
            .is_zero();
        assert!(
            nilpotent,
            "internal invariant: quasi-unipotent power must be unipotent"
        );
        Ok(Classification {
            kind: ClassKind::Parabolic,
            lambda: 1.0,
            order: None,
            salem_factor: None,
        })
    }
}
