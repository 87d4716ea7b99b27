//! The Darboux pentagon surface in `P^4`.
//!
//! A 5-tuple of side lengths `l` cuts out a complete-intersection surface
//! with defining polynomials
//!
//! ```text
//! F1 = l0 z0 + l1 z1 + l2 z2 + l3 z3 + l4 z4
//! F2 = sum_k l_k * prod_{m != k} z_m        (homogeneous form of sum_k l_k / z_k)
//! ```
//!
//! whose unit-modulus locus parametrizes closed planar pentagons with those
//! side lengths, up to rotation. This module provides the defining equations
//! (floating-point and exact rational), the ten nodes, the extra-singularity
//! test, the coordinate-pair folding involutions, the three real structures,
//! the invariant area density obtained as a Poincaré residue, and a
//! Gauss–Newton reprojection that controls floating-point drift over long
//! fold orbits.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

type C = Complex64;

/// Relative threshold below which a fold denominator (or a coordinate pair)
/// is treated as vanishing, i.e. the point is at an indeterminacy locus.
const INDET_THRESHOLD: f64 = 1e-10;
/// Tolerance used when a sign-combination sum must be compared against zero
/// with floating-point lengths.
const SMOOTHNESS_TOL: f64 = 1e-12;
/// Relative modulus spread above which a point is rejected as off the
/// unit-modulus real locus.
const TORUS_SPREAD_TOL: f64 = 1e-7;
/// Relative threshold below which a 2x2 residue-chart Jacobian minor is
/// considered degenerate.
const CHART_THRESHOLD: f64 = 1e-12;
/// Modulus spread below which Newton reprojection snaps to the unit torus
/// instead of treating the point as a general complex surface point.
const TORUS_MODE_SPREAD: f64 = 1e-3;

/// Errors produced by pentagon-surface operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PentError {
    /// Lengths were rejected at construction (zero, negative, or non-finite).
    #[error("invalid lengths: {0}")]
    InvalidLengths(String),
    /// The fold `sigma_ij` is undefined at this point: either its denominator
    /// vanishes or the image degenerates (the node blows up to a line).
    #[error("fold sigma_{i}{j} is indeterminate at this point")]
    Indeterminacy { i: usize, j: usize },
    /// Both selected coordinates vanish, so the fibration value `[z_l : z_m]`
    /// is undefined (the point lies on the common line).
    #[error("point lies on the line z_{l} = z_{m} = 0")]
    OnCommonLine { l: usize, m: usize },
    /// A map that needs all coordinates nonzero hit a coordinate hyperplane.
    #[error("coordinate z_{index} vanishes; the map is undefined there")]
    ZeroCoordinate { index: usize },
    /// Every admissible 2x2 Jacobian minor of the residue chart is degenerate.
    #[error("all residue chart minors are degenerate at this point")]
    ChartDegenerate,
    /// Gauss–Newton reprojection failed to reach the target residual.
    #[error("Newton reprojection failed to converge")]
    NonConvergence,
    /// The operation requires a unit-modulus (real-locus) point.
    #[error("point is not on the unit-modulus real locus")]
    NotRealLocus,
    /// Homogeneous coordinates must not all vanish.
    #[error("homogeneous coordinates must not be all zero")]
    ZeroPoint,
    /// A coordinate became non-finite.
    #[error("non-finite coordinate")]
    NonFinite,
}

// ---------------------------------------------------------------------------
// Lengths
// ---------------------------------------------------------------------------

/// A 5-tuple of side lengths. Real positive lengths give the geometric mode;
/// exact rationals additionally enable exact singularity decisions; nonzero
/// complex lengths give the algebraic mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Lengths {
    values: [C; 5],
    rationals: Option<[Rational64; 5]>,
    real: bool,
}

fn rat_to_f64(r: &Rational64) -> f64 {
    (*r.numer() as f64) / (*r.denom() as f64)
}

fn rat_to_big(r: &Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

impl Lengths {
    /// Positive real side lengths.
    pub fn from_reals(vals: [f64; 5]) -> Result<Self, PentError> {
        for v in vals {
            if !v.is_finite() || v <= 0.0 {
                return Err(PentError::InvalidLengths(format!(
                    "real lengths must be finite and positive, got {v}"
                )));
            }
        }
        Ok(Self {
            values: vals.map(|v| C::new(v, 0.0)),
            rationals: None,
            real: true,
        })
    }

    /// Positive exact rational side lengths; enables exact membership and
    /// singularity decisions.
    pub fn from_rationals(vals: [Rational64; 5]) -> Result<Self, PentError> {
        for v in &vals {
            if *v <= Rational64::from_integer(0) {
                return Err(PentError::InvalidLengths(format!(
                    "rational lengths must be positive, got {v}"
                )));
            }
        }
        Ok(Self {
            values: vals.map(|r| C::new(rat_to_f64(&r), 0.0)),
            rationals: Some(vals),
            real: true,
        })
    }

    /// Nonzero complex lengths (algebraic mode; no geometric predicates).
    pub fn from_complex(vals: [C; 5]) -> Result<Self, PentError> {
        for v in &vals {
            if !v.re.is_finite() || !v.im.is_finite() || v.norm() == 0.0 {
                return Err(PentError::InvalidLengths(
                    "complex lengths must be finite and nonzero".to_string(),
                ));
            }
        }
        let real = vals.iter().all(|v| v.im == 0.0 && v.re > 0.0);
        Ok(Self {
            values: vals,
            rationals: None,
            real,
        })
    }

    /// The unit equilateral 5-tuple, rational-backed.
    pub fn equilateral() -> Self {
        Self::from_rationals([Rational64::from_integer(1); 5]).expect("1 > 0")
    }

    /// The lengths as complex numbers (exact in real mode).
    pub fn values(&self) -> [C; 5] {
        self.values
    }

    /// The lengths as real numbers; fails in complex mode.
    pub fn real_values(&self) -> Result<[f64; 5], PentError> {
        if !self.real {
            return Err(PentError::InvalidLengths(
                "lengths are not real".to_string(),
            ));
        }
        Ok(self.values.map(|c| c.re))
    }

    /// Exact rational lengths, when constructed from rationals.
    pub fn rationals(&self) -> Option<&[Rational64; 5]> {
        self.rationals.as_ref()
    }

    /// Exact lengths as arbitrary-precision rationals, when available.
    pub fn big_rationals(&self) -> Option<[BigRational; 5]> {
        self.rationals
            .as_ref()
            .map(|r| [0, 1, 2, 3, 4].map(|k| rat_to_big(&r[k])))
    }

    /// Whether the lengths are real and positive.
    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Closed-pentagon criterion `2 * max l_i < sum l_i` (strict), decided
    /// exactly for rational lengths. Complex lengths are never admissible.
    pub fn is_admissible(&self) -> bool {
        if !self.real {
            return false;
        }
        if let Some(r) = &self.rationals {
            let sum = r
                .iter()
                .fold(Rational64::from_integer(0), |a, b| a + *b);
            let max = *r.iter().max().expect("nonempty");
            Rational64::from_integer(2) * max < sum
        } else {
            let v = self.values.map(|c| c.re);
            let sum: f64 = v.iter().sum();
            let max = v.iter().fold(0.0f64, |a, &b| a.max(b));
            2.0 * max < sum
        }
    }
}

impl Serialize for Lengths {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if let Some(r) = &self.rationals {
            let v: Vec<String> = r
                .iter()
                .map(|q| format!("{}/{}", q.numer(), q.denom()))
                .collect();
            v.serialize(s)
        } else if self.real {
            let v: Vec<f64> = self.values.iter().map(|c| c.re).collect();
            v.serialize(s)
        } else {
            let v: Vec<[f64; 2]> = self.values.iter().map(|c| [c.re, c.im]).collect();
            v.serialize(s)
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum LenEntry {
    Num(f64),
    Str(String),
    Pair([f64; 2]),
}

fn parse_rational_str(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        Some(Rational64::new(p, q))
    } else {
        let p: i64 = s.parse().ok()?;
        Some(Rational64::from_integer(p))
    }
}

impl<'de> Deserialize<'de> for Lengths {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: Vec<LenEntry> = Vec::deserialize(d)?;
        if raw.len() != 5 {
            return Err(D::Error::custom("lengths must have exactly 5 entries"));
        }
        let any_pair = raw.iter().any(|e| matches!(e, LenEntry::Pair(_)));
        if any_pair {
            let mut vals = [C::new(0.0, 0.0); 5];
            for (k, e) in raw.iter().enumerate() {
                vals[k] = match e {
                    LenEntry::Num(x) => C::new(*x, 0.0),
                    LenEntry::Pair(p) => C::new(p[0], p[1]),
                    LenEntry::Str(s) => match parse_rational_str(s) {
                        Some(q) => C::new(rat_to_f64(&q), 0.0),
                        None => C::new(
                            s.trim().parse::<f64>().map_err(D::Error::custom)?,
                            0.0,
                        ),
                    },
                };
            }
            return Lengths::from_complex(vals).map_err(D::Error::custom);
        }
        let rats: Option<Vec<Rational64>> = raw
            .iter()
            .map(|e| match e {
                LenEntry::Str(s) => parse_rational_str(s),
                _ => None,
            })
            .collect();
        if let Some(rv) = rats {
            let arr: [Rational64; 5] = [rv[0], rv[1], rv[2], rv[3], rv[4]];
            return Lengths::from_rationals(arr).map_err(D::Error::custom);
        }
        let mut vals = [0.0f64; 5];
        for (k, e) in raw.iter().enumerate() {
            vals[k] = match e {
                LenEntry::Num(x) => *x,
                LenEntry::Str(s) => match parse_rational_str(s) {
                    Some(q) => rat_to_f64(&q),
                    None => s.trim().parse::<f64>().map_err(D::Error::custom)?,
                },
                LenEntry::Pair(_) => unreachable!("handled above"),
            };
        }
        Lengths::from_reals(vals).map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// SurfacePoint
// ---------------------------------------------------------------------------

/// Returns a power of two `s` such that `m * s` lies in `[1, 2)`.
fn pow2_scale(m: f64) -> f64 {
    debug_assert!(m > 0.0 && m.is_finite());
    let mut s = (2.0f64).powi(-(m.log2().floor() as i32));
    while m * s >= 2.0 {
        s *= 0.5;
    }
    while m * s < 1.0 {
        s *= 2.0;
    }
    s
}

/// A point of `P^4` in homogeneous coordinates, stored rescaled by an exact
/// power of two so the maximum coordinate modulus lies in `[1, 2)`. The
/// power-of-two convention keeps all coordinate ratios bitwise exact across
/// renormalizations.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    z: [C; 5],
}

impl SurfacePoint {
    /// Builds a point from homogeneous coordinates, rejecting the zero vector
    /// and non-finite entries, and renormalizing by a power of two.
    pub fn new(z: [C; 5]) -> Result<Self, PentError> {
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(PentError::NonFinite);
        }
        let m = z.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        if m == 0.0 {
            return Err(PentError::ZeroPoint);
        }
        let s = pow2_scale(m);
        let scaled = z.map(|c| c * s);
        if scaled.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(PentError::NonFinite);
        }
        Ok(Self { z: scaled })
    }

    /// The stored homogeneous coordinates.
    pub fn coords(&self) -> &[C; 5] {
        &self.z
    }

    /// Maximum coordinate modulus (in `[1, 2)` by construction).
    pub fn max_modulus(&self) -> f64 {
        self.z.iter().map(|c| c.norm()).fold(0.0f64, f64::max)
    }

    /// Projective distance: both points are rescaled to maximum coordinate
    /// modulus 1, and the distance is the minimum over unit-phase rescalings
    /// of the maximum coordinate difference.
    pub fn proj_distance(&self, other: &SurfacePoint) -> f64 {
        let ma = self.max_modulus();
        let mb = other.max_modulus();
        let a: [C; 5] = self.z.map(|c| c / ma);
        let b: [C; 5] = other.z.map(|c| c / mb);
        let (a, b) = (&a, &b);
        let mut best = f64::INFINITY;
        for k in 0..5 {
            if a[k].norm().max(b[k].norm()) < 0.5 {
                continue;
            }
            let p = a[k] * b[k].conj();
            let lam = if p.norm() > 1e-30 {
                p / p.norm()
            } else {
                C::new(1.0, 0.0)
            };
            let d = (0..5)
                .map(|t| (a[t] - lam * b[t]).norm())
                .fold(0.0f64, f64::max);
            best = best.min(d);
        }
        if !best.is_finite() {
            best = (0..5)
                .map(|t| (a[t] - b[t]).norm())
                .fold(0.0f64, f64::max);
        }
        best
    }
}

impl Serialize for SurfacePoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.z.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SurfacePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let pairs = <[[f64; 2]; 5]>::deserialize(d)?;
        SurfacePoint::new(pairs.map(|p| C::new(p[0], p[1]))).map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Defining equations, nodes, smoothness
// ---------------------------------------------------------------------------

fn eval_equations(lv: &[C; 5], z: &[C; 5]) -> (C, C) {
    let mut f1 = C::new(0.0, 0.0);
    for k in 0..5 {
        f1 += lv[k] * z[k];
    }
    let mut f2 = C::new(0.0, 0.0);
    for k in 0..5 {
        let mut p = lv[k];
        for m in 0..5 {
            if m != k {
                p *= z[m];
            }
        }
        f2 += p;
    }
    (f1, f2)
}

/// Residual of the two defining polynomials at `z` (the degree-4 equation in
/// its homogenized form), as the maximum of the two moduli.
pub fn on_surface(l: &Lengths, z: &SurfacePoint) -> f64 {
    let (f1, f2) = eval_equations(&l.values(), &z.z);
    f1.norm().max(f2.norm())
}

/// Exact evaluation of the two defining polynomials at rational coordinates.
pub fn on_surface_exact(
    l: &[BigRational; 5],
    z: &[BigRational; 5],
) -> (BigRational, BigRational) {
    let zero = BigRational::from_integer(BigInt::from(0));
    let mut f1 = zero.clone();
    for k in 0..5 {
        f1 += &l[k] * &z[k];
    }
    let mut f2 = zero;
    for k in 0..5 {
        let mut p = l[k].clone();
        for m in 0..5 {
            if m != k {
                p *= &z[m];
            }
        }
        f2 += p;
    }
    (f1, f2)
}

/// The node `q_ij`: coordinate `i` is `l_j`, coordinate `j` is `-l_i`, all
/// others zero. These ten points lie on the surface for every length tuple.
pub fn node_point(l: &Lengths, i: usize, j: usize) -> Result<SurfacePoint, PentError> {
    assert!(i < j && j < 5, "node indices must satisfy i < j < 5");
    let lv = l.values();
    let mut z = [C::new(0.0, 0.0); 5];
    z[i] = lv[j];
    z[j] = -lv[i];
    SurfacePoint::new(z)
}

/// True when no signed sum `sum_k eps_k l_k` vanishes (16 sign patterns up to
/// global sign), i.e. the surface has no singularities beyond the ten nodes.
/// Decided exactly for rational lengths, to tolerance otherwise.
pub fn smoothness_check(l: &Lengths) -> bool {
    if let Some(r) = l.rationals() {
        let rb: Vec<BigRational> = r.iter().map(rat_to_big).collect();
        let zero = BigInt::from(0);
        for mask in 0..16u32 {
            let mut s = rb[0].clone();
            for k in 1..5 {
                if (mask >> (k - 1)) & 1 == 1 {
                    s -= &rb[k];
                } else {
                    s += &rb[k];
                }
            }
            if s.numer() == &zero {
                return false;
            }
        }
        true
    } else {
        let lv = l.values();
        for mask in 0..16u32 {
            let mut s = lv[0];
            for k in 1..5 {
                if (mask >> (k - 1)) & 1 == 1 {
                    s -= lv[k];
                } else {
                    s += lv[k];
                }
            }
            if s.norm() < SMOOTHNESS_TOL {
                return false;
            }
        }
        true
    }
}

/// Enumerates the sixteen candidate fixed points `z in {±1}^5` (first sign
/// fixed to `+1`) of the reciprocal involution and returns those lying on the
/// surface. The list is empty exactly when [`smoothness_check`] holds; the
/// membership decision is exact for rational lengths.
pub fn j_fixed_point_scan(l: &Lengths) -> Vec<SurfacePoint> {
    let mut out = Vec::new();
    for mask in 0..16u32 {
        let eps: [f64; 5] = std::array::from_fn(|k| {
            if k == 0 {
                1.0
            } else if (mask >> (k - 1)) & 1 == 1 {
                -1.0
            } else {
                1.0
            }
        });
        let vanishes = if let Some(r) = l.rationals() {
            let mut s = BigRational::from_integer(BigInt::from(0));
            for k in 0..5 {
                let q = rat_to_big(&r[k]);
                if eps[k] > 0.0 {
                    s += q;
                } else {
                    s -= q;
                }
            }
            s.numer() == &BigInt::from(0)
        } else {
            let lv = l.values();
            let mut s = C::new(0.0, 0.0);
            for k in 0..5 {
                s += lv[k] * eps[k];
            }
            s.norm() < SMOOTHNESS_TOL
        };
        if vanishes {
            out.push(
                SurfacePoint::new(eps.map(|e| C::new(e, 0.0))).expect("sign vector is nonzero"),
            );
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Folding involutions and the invariant fibration
// ---------------------------------------------------------------------------

/// The folding involution exchanging coordinates `i` and `j`:
/// `z_i' = v z_j`, `z_j' = v z_i` with `v = (l_i z_i + l_j z_j)/(l_i z_j + l_j z_i)`,
/// all other coordinates bitwise untouched (so fibration values over the
/// complementary coordinates stay exactly invariant).
pub fn fold_sigma(
    l: &Lengths,
    i: usize,
    j: usize,
    z: &SurfacePoint,
) -> Result<SurfacePoint, PentError> {
    assert!(i < 5 && j < 5 && i != j, "fold indices must be distinct in 0..5");
    let lv = l.values();
    let (zi, zj) = (z.z[i], z.z[j]);
    let n = lv[i] * zi + lv[j] * zj;
    let d = lv[i] * zj + lv[j] * zi;
    let scale = (lv[i].norm() + lv[j].norm()) * z.max_modulus();
    if d.norm() < INDET_THRESHOLD * scale {
        return Err(PentError::Indeterminacy { i, j });
    }
    let v = n / d;
    let mut out = z.z;
    out[i] = v * zj;
    out[j] = v * zi;
    let m = out.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if m < INDET_THRESHOLD * z.max_modulus() {
        // The image collapses to the zero vector: the point is (numerically)
        // the node q_ij, which the fold blows up to a line, not a point.
        return Err(PentError::Indeterminacy { i, j });
    }
    SurfacePoint::new(out)
}

/// The fibration value `[z_l : z_m]` as a pair rescaled by a power of two so
/// the larger modulus lies in `[1, 2)`. Because folds touching only the other
/// coordinates leave `z_l`, `z_m` bitwise intact (up to a shared power-of-two
/// renormalization), the returned pair is bitwise invariant under them.
pub fn proj_lm(l_idx: usize, m_idx: usize, z: &SurfacePoint) -> Result<(C, C), PentError> {
    assert!(
        l_idx < 5 && m_idx < 5 && l_idx != m_idx,
        "fibration indices must be distinct in 0..5"
    );
    let a = z.z[l_idx];
    let b = z.z[m_idx];
    let mx = a.norm().max(b.norm());
    if mx < INDET_THRESHOLD * z.max_modulus() {
        return Err(PentError::OnCommonLine { l: l_idx, m: m_idx });
    }
    let s = pow2_scale(mx);
    Ok((a * s, b * s))
}

// ---------------------------------------------------------------------------
// Real structures
// ---------------------------------------------------------------------------

/// Coordinatewise complex conjugation (the split real structure).
pub fn c_structure(z: &SurfacePoint) -> SurfacePoint {
    SurfacePoint::new(z.z.map(|c| c.conj())).expect("conjugation preserves nonzeroness")
}

fn require_nonzero_coords(z: &SurfacePoint) -> Result<(), PentError> {
    let m = z.max_modulus();
    for (k, c) in z.z.iter().enumerate() {
        if c.norm() < INDET_THRESHOLD * m {
            return Err(PentError::ZeroCoordinate { index: k });
        }
    }
    Ok(())
}

/// The holomorphic reciprocal involution `[z_k] -> [1/z_k]` (undefined on
/// coordinate hyperplanes).
pub fn j_structure(z: &SurfacePoint) -> Result<SurfacePoint, PentError> {
    require_nonzero_coords(z)?;
    SurfacePoint::new(z.z.map(|c| c.inv()))
}

/// The antiholomorphic involution `[z_k] -> [1/conj(z_k)]` whose fixed locus
/// is the unit-modulus pentagon torus.
pub fn s_structure(z: &SurfacePoint) -> Result<SurfacePoint, PentError> {
    require_nonzero_coords(z)?;
    SurfacePoint::new(z.z.map(|c| c.conj().inv()))
}

/// The images of a point under the three real structures.
#[derive(Debug, Clone)]
pub struct RealStructures {
    /// Coordinatewise conjugation.
    pub c: SurfacePoint,
    /// The antiholomorphic involution fixing the pentagon torus; `s = j ∘ c`.
    pub s: SurfacePoint,
    /// The holomorphic reciprocal involution.
    pub j: SurfacePoint,
}

/// Applies all three real structures at once.
pub fn real_structures(z: &SurfacePoint) -> Result<RealStructures, PentError> {
    Ok(RealStructures {
        c: c_structure(z),
        s: s_structure(z)?,
        j: j_structure(z)?,
    })
}

// ---------------------------------------------------------------------------
// Residue area density
// ---------------------------------------------------------------------------

fn check_torus(z: &SurfacePoint) -> Result<(), PentError> {
    let mut mx = 0.0f64;
    let mut mn = f64::INFINITY;
    for c in &z.z {
        let n = c.norm();
        mx = mx.max(n);
        mn = mn.min(n);
    }
    if mx - mn > TORUS_SPREAD_TOL * mx {
        return Err(PentError::NotRealLocus);
    }
    Ok(())
}

fn affine_indices(c: usize) -> [usize; 4] {
    let mut idx = [0usize; 4];
    let mut t = 0;
    for k in 0..5 {
        if k != c {
            idx[t] = k;
            t += 1;
        }
    }
    idx
}

/// Affine coordinates `w_k = z_k / z_c` with `w_c = 1`.
fn affine_w5(z: &SurfacePoint, c: usize) -> Result<[C; 5], PentError> {
    let zc = z.z[c];
    if zc.norm() < INDET_THRESHOLD * z.max_modulus() {
        return Err(PentError::ZeroCoordinate { index: c });
    }
    let mut w = [C::new(1.0, 0.0); 5];
    for k in 0..5 {
        if k != c {
            w[k] = z.z[k] / zc;
        }
    }
    Ok(w)
}

/// Partial derivative of `G2 = sum_k l_k prod_{m != k} w_m` (with `w_c = 1`)
/// with respect to `w_e`.
fn g2_partial(lv: &[C; 5], w5: &[C; 5], e: usize) -> C {
    let mut total = C::new(0.0, 0.0);
    for k in 0..5 {
        if k == e {
            continue;
        }
        let mut p = lv[k];
        for m in 0..5 {
            if m == k || m == e {
                continue;
            }
            p *= w5[m];
        }
        total += p;
    }
    total
}

fn all_splits(c: usize) -> [(usize, usize); 6] {
    let idx = affine_indices(c);
    [
        (idx[0], idx[1]),
        (idx[0], idx[2]),
        (idx[0], idx[3]),
        (idx[1], idx[2]),
        (idx[1], idx[3]),
        (idx[2], idx[3]),
    ]
}

fn split_complement(c: usize, a: usize, b: usize) -> (usize, usize) {
    let mut rest = [0usize; 2];
    let mut t = 0;
    for k in 0..5 {
        if k != c && k != a && k != b {
            rest[t] = k;
            t += 1;
        }
    }
    (rest[0], rest[1])
}

fn chart_jacobian(lv: &[C; 5], w5: &[C; 5], e: usize, f: usize) -> C {
    lv[e] * g2_partial(lv, w5, f) - lv[f] * g2_partial(lv, w5, e)
}

/// The residue 2-form evaluated on two tangent vectors (stored as 5-vectors
/// with zero entry at the chart index `c`), using the split `(a, b)` of
/// surviving differentials when given, otherwise the split with the largest
/// Jacobian minor.
fn omega_value(
    lv: &[C; 5],
    w5: &[C; 5],
    c: usize,
    split: Option<(usize, usize)>,
    u: &[C; 5],
    v: &[C; 5],
) -> Result<C, PentError> {
    let lscale: f64 = lv.iter().map(|x| x.norm()).sum();
    let (a, b, jd) = match split {
        Some((a, b)) => {
            let (e, f) = split_complement(c, a, b);
            (a, b, chart_jacobian(lv, w5, e, f))
        }
        None => {
            let mut best: Option<(usize, usize, C)> = None;
            for (a, b) in all_splits(c) {
                let (e, f) = split_complement(c, a, b);
                let jd = chart_jacobian(lv, w5, e, f);
                if best
                    .as_ref()
                    .map_or(true, |&(_, _, old)| jd.norm() > old.norm())
                {
                    best = Some((a, b, jd));
                }
            }
            best.expect("six splits examined")
        }
    };
    if jd.norm() < CHART_THRESHOLD * lscale {
        return Err(PentError::ChartDegenerate);
    }
    Ok((u[a] * v[b] - u[b] * v[a]) / jd)
}

fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy4(v: &mut [f64; 4], s: f64, d: &[f64; 4]) {
    for t in 0..4 {
        v[t] -= s * d[t];
    }
}

fn normalize4(v: [f64; 4]) -> Option<[f64; 4]> {
    let n = dot4(&v, &v).sqrt();
    if n < 1e-12 {
        return None;
    }
    Some(v.map(|x| x / n))
}

/// Orthonormal real tangent frame of the pentagon torus at `z` in the affine
/// chart `z_c = 1`, as angle-increment vectors over the four affine indices:
/// the tangent direction is `dw_k = i w_k dtheta_k` subject to
/// `sum_k l_k w_k dtheta_k = 0`.
fn frame_in_chart(
    l: &Lengths,
    z: &SurfacePoint,
    c: usize,
) -> Result<([usize; 4], [[f64; 4]; 2]), PentError> {
    let lr = l.real_values().map_err(|_| PentError::NotRealLocus)?;
    check_torus(z)?;
    let w5 = affine_w5(z, c)?;
    let idx = affine_indices(c);
    let mut r1 = [0.0f64; 4];
    let mut r2 = [0.0f64; 4];
    for t in 0..4 {
        let m = w5[idx[t]] * lr[idx[t]];
        r1[t] = m.re;
        r2[t] = m.im;
    }
    let q1 = normalize4(r1).ok_or(PentError::ChartDegenerate)?;
    let mut p2 = r2;
    axpy4(&mut p2, dot4(&r2, &q1), &q1);
    let q2 = normalize4(p2).ok_or(PentError::ChartDegenerate)?;
    // Pick the two standard basis vectors with the largest residuals after
    // projecting away the constraint rows, then orthonormalize.
    let residual = |dirs: &[[f64; 4]]| -> Option<[f64; 4]> {
        let mut best: Option<(f64, [f64; 4])> = None;
        for e in 0..4 {
            let mut v = [0.0f64; 4];
            v[e] = 1.0;
            for d in dirs {
                let s = dot4(&v, d);
                axpy4(&mut v, s, d);
            }
            let n = dot4(&v, &v).sqrt();
            if best.as_ref().map_or(true, |(bn, _)| n > *bn) {
                best = Some((n, v));
            }
        }
        best.and_then(|(_, v)| normalize4(v))
    };
    let u = residual(&[q1, q2]).ok_or(PentError::ChartDegenerate)?;
    let w = residual(&[q1, q2, u]).ok_or(PentError::ChartDegenerate)?;
    Ok((idx, [u, w]))
}

/// Orthonormal real tangent frame at a unit-modulus point in the chart
/// `z_0 = 1`, as two angle-increment vectors over coordinates 1..=4.
pub fn real_tangent_frame(
    l: &Lengths,
    z: &SurfacePoint,
) -> Result<([f64; 4], [f64; 4]), PentError> {
    let (_, f) = frame_in_chart(l, z, 0)?;
    Ok((f[0], f[1]))
}

fn tangent_pair(idx: &[usize; 4], w5: &[C; 5], frame: &[[f64; 4]; 2]) -> ([C; 5], [C; 5]) {
    let i_unit = C::new(0.0, 1.0);
    let mut u = [C::new(0.0, 0.0); 5];
    let mut v = [C::new(0.0, 0.0); 5];
    for t in 0..4 {
        let k = idx[t];
        let iw = i_unit * w5[k];
        u[k] = iw * frame[0][t];
        v[k] = iw * frame[1][t];
    }
    (u, v)
}

fn density_in_chart(
    l: &Lengths,
    z: &SurfacePoint,
    split: Option<(usize, usize)>,
) -> Result<f64, PentError> {
    let c = 0usize;
    let (idx, frame) = frame_in_chart(l, z, c)?;
    let w5 = affine_w5(z, c)?;
    let (u, v) = tangent_pair(&idx, &w5, &frame);
    let om = omega_value(&l.values(), &w5, c, split, &u, &v)?;
    Ok(om.norm())
}

/// Density of the fold-invariant area form at a unit-modulus point: the
/// Poincaré residue of the complete intersection evaluated on an orthonormal
/// real tangent frame, using the affine chart `z_0 = 1` and the coordinate
/// split with the largest Jacobian minor.
pub fn residue_area_density(l: &Lengths, z: &SurfacePoint) -> Result<f64, PentError> {
    density_in_chart(l, z, None)
}

/// Same density but forcing the split: the differentials of coordinates
/// `(a, b)` survive and the Jacobian minor is taken in the complementary
/// pair. Values agree across non-degenerate splits.
pub fn residue_area_density_via_chart(
    l: &Lengths,
    z: &SurfacePoint,
    ab: (usize, usize),
) -> Result<f64, PentError> {
    let (a, b) = ab;
    assert!(
        (1..5).contains(&a) && (1..5).contains(&b) && a != b,
        "split indices must be distinct in 1..=4"
    );
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    density_in_chart(l, z, Some((a, b)))
}

/// Modulus of the ratio `|omega(Dσ u, Dσ v)| / |omega(u, v)|` for the fold
/// `sigma_ij` at a unit-modulus point, computed with the analytic fold
/// Jacobian in an affine chart avoiding `i` and `j`. The invariance of the
/// residue form up to unimodular factor makes this identically 1.
pub fn fold_pullback_ratio(
    l: &Lengths,
    i: usize,
    j: usize,
    z: &SurfacePoint,
) -> Result<f64, PentError> {
    assert!(i < 5 && j < 5 && i != j, "fold indices must be distinct in 0..5");
    let c = (0..5).find(|k| *k != i && *k != j).expect("three indices remain");
    let lv = l.values();
    let (idx, frame) = frame_in_chart(l, z, c)?;
    let w5 = affine_w5(z, c)?;
    let (u, v) = tangent_pair(&idx, &w5, &frame);
    let om_z = omega_value(&lv, &w5, c, None, &u, &v)?;
    let zf = fold_sigma(l, i, j, z)?;
    let w5f = affine_w5(&zf, c)?;
    let n = lv[i] * w5[i] + lv[j] * w5[j];
    let d = lv[i] * w5[j] + lv[j] * w5[i];
    let vq = n / d;
    let dvi = (lv[i] - vq * lv[j]) / d;
    let dvj = (lv[j] - vq * lv[i]) / d;
    let push = |t: &[C; 5]| -> [C; 5] {
        let mut o = *t;
        o[i] = w5[j] * dvi * t[i] + (vq + w5[j] * dvj) * t[j];
        o[j] = (vq + w5[i] * dvi) * t[i] + w5[i] * dvj * t[j];
        o
    };
    let uf = push(&u);
    let vf = push(&v);
    let om_f = omega_value(&lv, &w5f, c, None, &uf, &vf)?;
    Ok(om_f.norm() / om_z.norm())
}

// ---------------------------------------------------------------------------
// Newton reprojection
// ---------------------------------------------------------------------------

/// Gauss–Newton correction of an approximate point back onto the surface.
/// When the lengths are real and the moduli are nearly equal, the point is
/// snapped to the unit torus and corrected along it (the degree-4 equation is
/// automatic there); otherwise a least-norm complex Newton step corrects both
/// defining equations. The result satisfies `on_surface < 1e-12` (scaled by
/// the length magnitude) or the call reports `NonConvergence`.
pub fn newton_reproject(l: &Lengths, z: &SurfacePoint) -> Result<SurfacePoint, PentError> {
    let lv = l.values();
    let lscale: f64 = lv.iter().map(|x| x.norm()).sum();
    let mut mx = 0.0f64;
    let mut mn = f64::INFINITY;
    for c in &z.z {
        let n = c.norm();
        mx = mx.max(n);
        mn = mn.min(n);
    }
    let torus_mode = l.is_real() && (mx - mn) <= TORUS_MODE_SPREAD * mx;

    let result = if torus_mode {
        let lr = l.real_values().expect("real mode checked");
        let mut zz = z.z;
        for c in zz.iter_mut() {
            let n = c.norm();
            if n == 0.0 {
                return Err(PentError::NonConvergence);
            }
            *c /= n;
        }
        for _ in 0..50 {
            let mut r = C::new(0.0, 0.0);
            for k in 0..5 {
                r += zz[k] * lr[k];
            }
            if r.norm() < 1e-15 * lscale {
                break;
            }
            // Linearized constraint: sum_k (i l_k z_k) dtheta_k = -r.
            let mut m1 = [0.0f64; 5];
            let mut m2 = [0.0f64; 5];
            for k in 0..5 {
                let mk = zz[k] * lr[k];
                m1[k] = -mk.im;
                m2[k] = mk.re;
            }
            let a11: f64 = m1.iter().map(|x| x * x).sum();
            let a12: f64 = m1.iter().zip(&m2).map(|(x, y)| x * y).sum();
            let a22: f64 = m2.iter().map(|x| x * x).sum();
            let det = a11 * a22 - a12 * a12;
            if det <= 0.0 {
                return Err(PentError::NonConvergence);
            }
            let (b1, b2) = (-r.re, -r.im);
            let y1 = (b1 * a22 - b2 * a12) / det;
            let y2 = (b2 * a11 - b1 * a12) / det;
            for k in 0..5 {
                let dth = m1[k] * y1 + m2[k] * y2;
                zz[k] *= C::new(dth.cos(), dth.sin());
            }
        }
        SurfacePoint::new(zz)?
    } else {
        let mut zz = z.z;
        for _ in 0..50 {
            let (f1, f2) = eval_equations(&lv, &zz);
            if f1.norm().max(f2.norm()) < 1e-14 * lscale {
                break;
            }
            let j1 = lv;
            let mut j2 = [C::new(0.0, 0.0); 5];
            for (k, slot) in j2.iter_mut().enumerate() {
                let mut tot = C::new(0.0, 0.0);
                for m in 0..5 {
                    if m == k {
                        continue;
                    }
                    let mut p = lv[m];
                    for q in 0..5 {
                        if q != m && q != k {
                            p *= zz[q];
                        }
                    }
                    tot += p;
                }
                *slot = tot;
            }
            // Least-norm step: delta = J^H (J J^H)^{-1} (-F).
            let a11: f64 = j1.iter().map(|x| x.norm_sqr()).sum();
            let a22: f64 = j2.iter().map(|x| x.norm_sqr()).sum();
            let a12: C = j1
                .iter()
                .zip(&j2)
                .map(|(x, y)| x * y.conj())
                .fold(C::new(0.0, 0.0), |a, b| a + b);
            let det = a11 * a22 - a12.norm_sqr();
            if det <= 0.0 {
                return Err(PentError::NonConvergence);
            }
            let (b1, b2) = (-f1, -f2);
            let y1 = (b1 * a22 - a12 * b2) / det;
            let y2 = (b2 * a11 - a12.conj() * b1) / det;
            for k in 0..5 {
                zz[k] += j1[k].conj() * y1 + j2[k].conj() * y2;
            }
        }
        SurfacePoint::new(zz)?
    };
    if on_surface(l, &result) > 1e-12 * lscale.max(1.0) {
        return Err(PentError::NonConvergence);
    }
    Ok(result)
}
