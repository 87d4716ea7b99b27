//! Plane-cubic geometry behind the quadratic involutions that fix a cubic
//! curve pointwise.
//!
//! Everything lives on a smooth real cubic `y² = g(x)` with
//! `g(x) = x³ + u x² + v x + w`. From a base point `q` on the curve there
//! are four lines through `q` tangent to the curve elsewhere, and the pencil
//! of lines through `q` carries a unique plane involution fixing the cubic
//! pointwise: on each line it is the Möbius involution fixing the two
//! residual intersections with the curve. This module provides
//!
//! * the four tangency points ([`tangency_points`]), with an exact-rational
//!   construction path for rational input data
//!   ([`tangency_points_from_spec`]);
//! * the involution as a numeric map of the projective plane
//!   ([`jonquieres_apply`]), with explicit errors on its base locus and on
//!   the tangent lines where the restriction degenerates;
//! * genericity predicates for a collection of base points
//!   ([`hypothesis_check`]);
//! * Euclidean distance from a plane point to the real locus
//!   ([`distance_to_curve`]);
//! * derivation of the combinatorial configuration — order along the
//!   branch, tangent-line sides, invariant-conic interiors — consumed by
//!   the lattice layer ([`derive_config`]), plus ready-made reference
//!   configurations ([`reference_configuration`]).

use crate::nsaction::{self, ConfigDescriptor, NsError, Pt};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

type C = Complex64;

/// Relative tolerance below which the cubic discriminant counts as zero.
const SINGULAR_TOL: f64 = 1e-12;
/// Relative tolerance for membership tests `y² = g(x)`.
const ON_CURVE_TOL: f64 = 1e-9;
/// Chordal distance below which a point counts as one of the five base
/// points of an involution.
const BASE_LOCUS_TOL: f64 = 1e-8;
/// Normalized residual-root separation below which a line through the base
/// point counts as tangent to the curve (the restricted involution has
/// collided fixed points there). Sits above the `sqrt(eps)` noise floor so
/// that genuinely tangent double-precision inputs are always caught.
const TANGENT_SEP_TOL: f64 = 2e-7;
/// Normalized triple-product tolerance for collinearity tests.
const COLLINEAR_TOL: f64 = 1e-10;
/// Tolerance for the direction-chart resonance test of the fourth
/// genericity predicate.
const HYP4_TOL: f64 = 1e-8;
/// Relative tolerance for the inflexion test `g'(x)² = 4 (3x+u) g(x)`.
const INFLEXION_TOL: f64 = 1e-8;
/// Relative imaginary-part threshold classifying a tangency point as real.
const REAL_CLASS_TOL: f64 = 1e-8;
/// Relative distance below which two marked points count as coincident.
const DISTINCT_TOL: f64 = 1e-8;

/// Errors from the geometric layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    /// The cubic has a vanishing (or numerically vanishing) discriminant.
    #[error("singular cubic: {0}")]
    SingularCurve(String),
    /// A point that must lie on the curve does not.
    #[error("point not on the curve: {0}")]
    NotOnCurve(String),
    /// The base point is an inflexion of the cubic, where one tangency
    /// point collides with the base point itself.
    #[error("inflexion base point: {0}")]
    InflexionPoint(String),
    /// The input point is one of the five base points of the involution,
    /// where the map is undefined.
    #[error("point in the base locus: {0}")]
    BaseLocus(String),
    /// The input point lies on a line through the base point tangent to the
    /// curve; the restricted involution degenerates there.
    #[error("point on a tangent line through the base point: {0}")]
    TangentLine(String),
    /// The supplied points do not form a consistent configuration.
    #[error("inconsistent configuration: {0}")]
    InconsistentConfig(String),
    /// Malformed input (non-finite coordinates, empty data, wrong ranges).
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl From<NsError> for GeomError {
    fn from(e: NsError) -> Self {
        match e {
            NsError::InconsistentConfig(m) => GeomError::InconsistentConfig(m),
            other => GeomError::Invalid(other.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// The curve
// ---------------------------------------------------------------------------

/// A smooth cubic `y² = x³ + u x² + v x + w` in Weierstrass-like form.
///
/// Constructed from floating coefficients ([`CubicCurve::new`]) or from
/// exact rationals ([`CubicCurve::from_rationals`]); the latter keeps the
/// exact values so that derived quantities (tangency quartics, membership
/// of rational points) can be set up without rounding. Serialized with the
/// exact coefficients as `"n/d"` strings; deserialization re-validates
/// smoothness.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "CurveRepr", into = "CurveRepr")]
pub struct CubicCurve {
    u: f64,
    v: f64,
    w: f64,
    exact: Option<[Rational64; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CurveRepr {
    u: f64,
    v: f64,
    w: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exact: Option<[String; 3]>,
}

impl From<CubicCurve> for CurveRepr {
    fn from(c: CubicCurve) -> Self {
        CurveRepr {
            u: c.u,
            v: c.v,
            w: c.w,
            exact: c.exact.map(|r| [r[0].to_string(), r[1].to_string(), r[2].to_string()]),
        }
    }
}

impl TryFrom<CurveRepr> for CubicCurve {
    type Error = String;

    fn try_from(r: CurveRepr) -> Result<Self, String> {
        match r.exact {
            Some(strs) => {
                let mut vals = [Rational64::default(); 3];
                for (slot, s) in vals.iter_mut().zip(strs.iter()) {
                    *slot = s
                        .parse()
                        .map_err(|e| format!("bad rational coefficient {s:?}: {e}"))?;
                }
                CubicCurve::from_rationals(vals[0], vals[1], vals[2]).map_err(|e| e.to_string())
            }
            None => CubicCurve::new(r.u, r.v, r.w).map_err(|e| e.to_string()),
        }
    }
}

fn cubic_discriminant(u: f64, v: f64, w: f64) -> f64 {
    18.0 * u * v * w - 4.0 * u.powi(3) * w + u.powi(2) * v.powi(2) - 4.0 * v.powi(3)
        - 27.0 * w.powi(2)
}

fn big_ratio(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

impl CubicCurve {
    /// Build the curve `y² = x³ + u x² + v x + w`, rejecting singular (or
    /// numerically near-singular) cubics.
    pub fn new(u: f64, v: f64, w: f64) -> Result<Self, GeomError> {
        if !(u.is_finite() && v.is_finite() && w.is_finite()) {
            return Err(GeomError::Invalid("curve coefficients must be finite".into()));
        }
        let disc = cubic_discriminant(u, v, w);
        let scale = 1.0f64.max(u.abs()).max(v.abs()).max(w.abs()).powi(4);
        if disc.abs() < SINGULAR_TOL * scale {
            return Err(GeomError::SingularCurve(format!(
                "discriminant {disc:e} vanishes for (u, v, w) = ({u}, {v}, {w})"
            )));
        }
        Ok(CubicCurve { u, v, w, exact: None })
    }

    /// Build the curve from exact rational coefficients. Smoothness is
    /// decided exactly; the exact values are kept for downstream exact
    /// constructions.
    pub fn from_rationals(u: Rational64, v: Rational64, w: Rational64) -> Result<Self, GeomError> {
        let (bu, bv, bw) = (big_ratio(u), big_ratio(v), big_ratio(w));
        let disc = BigRational::from_integer(BigInt::from(18)) * &bu * &bv * &bw
            - BigRational::from_integer(BigInt::from(4)) * &bu * &bu * &bu * &bw
            + &bu * &bu * &bv * &bv
            - BigRational::from_integer(BigInt::from(4)) * &bv * &bv * &bv
            - BigRational::from_integer(BigInt::from(27)) * &bw * &bw;
        if disc.is_zero() {
            return Err(GeomError::SingularCurve(format!(
                "discriminant is exactly zero for (u, v, w) = ({u}, {v}, {w})"
            )));
        }
        let mut curve = CubicCurve::new(
            u.to_f64().unwrap_or(f64::NAN),
            v.to_f64().unwrap_or(f64::NAN),
            w.to_f64().unwrap_or(f64::NAN),
        )?;
        curve.exact = Some([u, v, w]);
        Ok(curve)
    }

    /// The coefficients `(u, v, w)` of `g(x) = x³ + u x² + v x + w`.
    pub fn coefficients(&self) -> (f64, f64, f64) {
        (self.u, self.v, self.w)
    }

    /// The exact rational coefficients, when the curve was built from them.
    pub fn exact_coefficients(&self) -> Option<&[Rational64; 3]> {
        self.exact.as_ref()
    }

    /// Discriminant of `g`; negative exactly when the real locus is
    /// connected (one real root of `g`).
    pub fn discriminant(&self) -> f64 {
        cubic_discriminant(self.u, self.v, self.w)
    }

    /// Whether the real locus is a single connected branch.
    pub fn is_real_connected(&self) -> bool {
        self.discriminant() < 0.0
    }

    /// Evaluate `g`.
    pub fn g(&self, x: f64) -> f64 {
        ((x + self.u) * x + self.v) * x + self.w
    }

    /// Evaluate `g'`.
    pub fn g_prime(&self, x: f64) -> f64 {
        (3.0 * x + 2.0 * self.u) * x + self.v
    }

    /// Evaluate `g` at a complex argument.
    pub fn g_complex(&self, z: C) -> C {
        ((z + self.u) * z + self.v) * z + self.w
    }

    /// Evaluate `g'` at a complex argument.
    pub fn g_prime_complex(&self, z: C) -> C {
        (3.0 * z + 2.0 * self.u) * z + self.v
    }

    /// Whether `(x, y)` satisfies `y² = g(x)` within a relative tolerance.
    pub fn contains(&self, x: f64, y: f64, tol: f64) -> bool {
        let scale = 1.0f64.max(x.abs().powi(3)).max(y * y);
        (y * y - self.g(x)).abs() <= tol * scale
    }

    /// The real curve point with abscissa `x` on the branch chosen by
    /// `sign` (+1 upper, -1 lower). Fails when `g(x) < 0` (no real point)
    /// or `sign` is not `±1`.
    pub fn point_above(&self, x: f64, sign: i8) -> Result<(f64, f64), GeomError> {
        if sign != 1 && sign != -1 {
            return Err(GeomError::Invalid(format!(
                "branch sign must be +1 or -1, got {sign}"
            )));
        }
        let gx = self.g(x);
        if gx < 0.0 {
            return Err(GeomError::Invalid(format!(
                "the curve has no real point above x = {x} (g(x) = {gx})"
            )));
        }
        Ok((x, f64::from(sign) * gx.sqrt()))
    }

    /// Real roots of `g`, ascending: one root when the locus is connected,
    /// three when it has an oval plus an unbounded branch.
    pub fn real_roots_of_g(&self) -> Vec<f64> {
        let comp = nalgebra::Matrix3::new(
            0.0, 0.0, -self.w, //
            1.0, 0.0, -self.v, //
            0.0, 1.0, -self.u,
        );
        let eig = comp.complex_eigenvalues();
        let mut roots: Vec<f64> = if self.is_real_connected() {
            let z = eig
                .iter()
                .min_by(|a, b| a.im.abs().total_cmp(&b.im.abs()))
                .expect("cubic has three eigenvalues");
            vec![z.re]
        } else {
            eig.iter().map(|z| z.re).collect()
        };
        for r in roots.iter_mut() {
            for _ in 0..60 {
                let df = self.g_prime(*r);
                if df.abs() < 1e-300 {
                    break;
                }
                let step = self.g(*r) / df;
                *r -= step;
                if step.abs() < 1e-16 * (1.0 + r.abs()) {
                    break;
                }
            }
        }
        roots.sort_by(|a, b| a.total_cmp(b));
        roots
    }
}

/// Exact specification of a curve point: rational abscissa plus the branch
/// sign of the (generally irrational) ordinate. Serialized with the
/// abscissa as an `"n/d"` string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PointSpecRepr", into = "PointSpecRepr")]
pub struct RationalPointSpec {
    /// Abscissa of the point.
    pub x: Rational64,
    /// Sign of `y = ±sqrt(g(x))`: `+1` or `-1`.
    pub y_sign: i8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PointSpecRepr {
    x: String,
    y_sign: i8,
}

impl From<RationalPointSpec> for PointSpecRepr {
    fn from(s: RationalPointSpec) -> Self {
        PointSpecRepr {
            x: s.x.to_string(),
            y_sign: s.y_sign,
        }
    }
}

impl TryFrom<PointSpecRepr> for RationalPointSpec {
    type Error = String;

    fn try_from(r: PointSpecRepr) -> Result<Self, String> {
        let x = r
            .x
            .parse()
            .map_err(|e| format!("bad rational abscissa {:?}: {e}", r.x))?;
        if r.y_sign != 1 && r.y_sign != -1 {
            return Err(format!("branch sign must be +1 or -1, got {}", r.y_sign));
        }
        Ok(RationalPointSpec { x, y_sign: r.y_sign })
    }
}

/// Realize a rational point specification on the curve; `g(x)` is evaluated
/// exactly when the curve carries exact coefficients.
pub fn curve_point_from_spec(
    curve: &CubicCurve,
    spec: &RationalPointSpec,
) -> Result<(f64, f64), GeomError> {
    if spec.y_sign != 1 && spec.y_sign != -1 {
        return Err(GeomError::Invalid(format!(
            "branch sign must be +1 or -1, got {}",
            spec.y_sign
        )));
    }
    let gx = match &curve.exact {
        Some([u, v, w]) => {
            let x = big_ratio(spec.x);
            let val = ((&x + big_ratio(*u)) * &x + big_ratio(*v)) * &x + big_ratio(*w);
            if val.is_negative() {
                return Err(GeomError::Invalid(format!(
                    "the curve has no real point above x = {} (g(x) = {val} exactly)",
                    spec.x
                )));
            }
            val.to_f64().ok_or_else(|| {
                GeomError::Invalid("rational curve value does not fit in f64".into())
            })?
        }
        None => {
            let x = spec.x.to_f64().unwrap_or(f64::NAN);
            let gx = curve.g(x);
            if gx < 0.0 {
                return Err(GeomError::Invalid(format!(
                    "the curve has no real point above x = {x} (g(x) = {gx})"
                )));
            }
            gx
        }
    };
    let x = spec.x.to_f64().unwrap_or(f64::NAN);
    Ok((x, f64::from(spec.y_sign) * gx.sqrt()))
}

// ---------------------------------------------------------------------------
// Tangency points
// ---------------------------------------------------------------------------

/// One of the four points where a line through the base point touches the
/// cubic. Coordinates are complex: two of the four are real for the
/// configurations of interest, the other two form a conjugate pair.
#[derive(Debug, Clone, Copy)]
pub struct TangencyPoint {
    /// Abscissa.
    pub x: C,
    /// Ordinate.
    pub y: C,
}

impl TangencyPoint {
    /// Whether both coordinates are real within the classification
    /// threshold.
    pub fn is_real(&self) -> bool {
        self.x.im.abs() <= REAL_CLASS_TOL * (1.0 + self.x.re.abs())
            && self.y.im.abs() <= REAL_CLASS_TOL * (1.0 + self.y.re.abs())
    }
}

fn poly_eval_c(coeffs: &[C], z: C) -> C {
    let mut acc = C::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

fn poly_deriv_eval_c(coeffs: &[C], z: C) -> C {
    let mut acc = C::new(0.0, 0.0);
    for (i, &c) in coeffs.iter().enumerate().rev().take(coeffs.len() - 1) {
        acc = acc * z + c * (i as f64);
    }
    acc
}

/// Roots of a monic quartic via the companion matrix, polished by Newton.
fn monic_quartic_roots(c0: f64, c1: f64, c2: f64, c3: f64) -> [C; 4] {
    let comp = nalgebra::Matrix4::new(
        0.0, 0.0, 0.0, -c0, //
        1.0, 0.0, 0.0, -c1, //
        0.0, 1.0, 0.0, -c2, //
        0.0, 0.0, 1.0, -c3,
    );
    let eig = comp.complex_eigenvalues();
    let poly = [
        C::new(c0, 0.0),
        C::new(c1, 0.0),
        C::new(c2, 0.0),
        C::new(c3, 0.0),
        C::new(1.0, 0.0),
    ];
    let mut out = [C::new(0.0, 0.0); 4];
    for (slot, z0) in out.iter_mut().zip(eig.iter()) {
        let mut z = *z0;
        for _ in 0..15 {
            let df = poly_deriv_eval_c(&poly, z);
            if df.norm() < 1e-300 {
                break;
            }
            let step = poly_eval_c(&poly, z) / df;
            z -= step;
            if step.norm() < 1e-16 * (1.0 + z.norm()) {
                break;
            }
        }
        *slot = z;
    }
    out
}

/// Shared tail of the tangency computation: solve the slope quartic
/// `m⁴ - 2A m² + 8 y_q m + (A² - 4B) = 0` and convert each slope to its
/// double-contact point.
fn tangency_from_slope_quartic(
    curve: &CubicCurve,
    q: (f64, f64),
    a: f64,
    b: f64,
) -> [TangencyPoint; 4] {
    let _ = curve;
    let (xq, yq) = q;
    let ms = monic_quartic_roots(a * a - 4.0 * b, 8.0 * yq, -2.0 * a, 0.0);
    let mut pts: Vec<TangencyPoint> = ms
        .iter()
        .map(|&m| {
            let t = (m * m - a) / 2.0;
            TangencyPoint {
                x: xq + t,
                y: yq + m * t,
            }
        })
        .collect();
    pts.sort_by(|p, r| p.x.re.total_cmp(&r.x.re).then(p.x.im.total_cmp(&r.x.im)));
    [pts[0], pts[1], pts[2], pts[3]]
}

fn check_q_on_curve(curve: &CubicCurve, q: (f64, f64)) -> Result<(), GeomError> {
    let (x, y) = q;
    if !(x.is_finite() && y.is_finite()) {
        return Err(GeomError::Invalid("base point must be finite".into()));
    }
    if !curve.contains(x, y, ON_CURVE_TOL) {
        return Err(GeomError::NotOnCurve(format!(
            "({x}, {y}) with residual {:e}",
            (y * y - curve.g(x)).abs()
        )));
    }
    Ok(())
}

/// The four tangency points of lines through `q` touching the curve away
/// from `q`.
///
/// With `A = 3 x_q + u` and `B = g'(x_q)`, a line of slope `m` through `q`
/// meets the curve residually in a double point exactly when
/// `m⁴ - 2A m² + 8 y_q m + (A² - 4B) = 0`; the contact point is at
/// parameter `t = (m² - A)/2` along the line. Errors: `NotOnCurve` when
/// `q` misses the curve, `InflexionPoint` when `g'(x_q)² = 4 A y_q²`
/// (one tangency would collide with `q` itself).
pub fn tangency_points(
    curve: &CubicCurve,
    q: (f64, f64),
) -> Result<[TangencyPoint; 4], GeomError> {
    check_q_on_curve(curve, q)?;
    let (xq, yq) = q;
    let a = 3.0 * xq + curve.u;
    let b = curve.g_prime(xq);
    let inflexion_residual = b * b - 4.0 * a * yq * yq;
    let scale = 1.0f64.max(b * b).max((a * yq * yq).abs());
    if inflexion_residual.abs() < INFLEXION_TOL * scale {
        return Err(GeomError::InflexionPoint(format!(
            "({xq}, {yq}) is an inflexion of the cubic (residual {inflexion_residual:e})"
        )));
    }
    Ok(tangency_from_slope_quartic(curve, q, a, b))
}

/// Exact-construction variant of [`tangency_points`]: with rational curve
/// coefficients and a rational abscissa, the quartic coefficients
/// `A = 3x + u`, `B = g'(x)`, `A² - 4B` and the inflexion test are computed
/// in exact arithmetic before the (floating) root solve.
pub fn tangency_points_from_spec(
    curve: &CubicCurve,
    spec: &RationalPointSpec,
) -> Result<[TangencyPoint; 4], GeomError> {
    let Some([u, v, w]) = curve.exact else {
        let q = curve_point_from_spec(curve, spec)?;
        return tangency_points(curve, q);
    };
    let q = curve_point_from_spec(curve, spec)?;
    let x = big_ratio(spec.x);
    let (bu, bv, bw) = (big_ratio(u), big_ratio(v), big_ratio(w));
    let three = BigRational::from_integer(BigInt::from(3));
    let two = BigRational::from_integer(BigInt::from(2));
    let four = BigRational::from_integer(BigInt::from(4));
    let a_exact = &three * &x + &bu;
    let b_exact = (&three * &x + &two * &bu) * &x + &bv;
    let g_exact = ((&x + &bu) * &x + &bv) * &x + &bw;
    // inflexion exactly when B² = 4 A g(x_q) (y_q² = g(x_q) exactly)
    if &b_exact * &b_exact == &four * &a_exact * &g_exact {
        return Err(GeomError::InflexionPoint(format!(
            "x = {} is exactly an inflexion abscissa",
            spec.x
        )));
    }
    let a = a_exact
        .to_f64()
        .ok_or_else(|| GeomError::Invalid("quartic coefficient overflows f64".into()))?;
    let b = b_exact
        .to_f64()
        .ok_or_else(|| GeomError::Invalid("quartic coefficient overflows f64".into()))?;
    Ok(tangency_from_slope_quartic(curve, q, a, b))
}

// ---------------------------------------------------------------------------
// Projective points
// ---------------------------------------------------------------------------

/// A point of the real projective plane in homogeneous coordinates
/// `[x : y : z]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProjPoint {
    x: f64,
    y: f64,
    z: f64,
}

impl ProjPoint {
    /// Build from homogeneous coordinates; rejects non-finite entries and
    /// the zero triple.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, GeomError> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(GeomError::Invalid(
                "homogeneous coordinates must be finite".into(),
            ));
        }
        if x == 0.0 && y == 0.0 && z == 0.0 {
            return Err(GeomError::Invalid(
                "homogeneous coordinates must not all vanish".into(),
            ));
        }
        Ok(ProjPoint { x, y, z })
    }

    /// Embed an affine point as `[x : y : 1]`.
    pub fn from_affine(x: f64, y: f64) -> Self {
        ProjPoint::new(x, y, 1.0).expect("affine coordinates must be finite")
    }

    /// First homogeneous coordinate.
    pub fn x(&self) -> f64 {
        self.x
    }

    /// Second homogeneous coordinate.
    pub fn y(&self) -> f64 {
        self.y
    }

    /// Third homogeneous coordinate.
    pub fn z(&self) -> f64 {
        self.z
    }

    /// The same point scaled so its largest coordinate has absolute value 1.
    pub fn normalized(&self) -> Self {
        let m = self.x.abs().max(self.y.abs()).max(self.z.abs());
        ProjPoint {
            x: self.x / m,
            y: self.y / m,
            z: self.z / m,
        }
    }

    /// Affine coordinates, or `None` for points at (or numerically
    /// indistinguishable from) infinity.
    pub fn to_affine(&self) -> Option<(f64, f64)> {
        if self.z.abs() <= 1e-14 * self.x.abs().max(self.y.abs()) {
            return None;
        }
        Some((self.x / self.z, self.y / self.z))
    }

    /// Scale-invariant distance `|a × b| / (|a| |b|)` between the lines the
    /// two coordinate triples span; zero exactly for equal projective
    /// points.
    pub fn chordal_distance(&self, other: &ProjPoint) -> f64 {
        let cx = self.y * other.z - self.z * other.y;
        let cy = self.z * other.x - self.x * other.z;
        let cz = self.x * other.y - self.y * other.x;
        let cross = (cx * cx + cy * cy + cz * cz).sqrt();
        let na = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        let nb = (other.x * other.x + other.y * other.y + other.z * other.z).sqrt();
        cross / (na * nb)
    }
}

// ---------------------------------------------------------------------------
// The involution
// ---------------------------------------------------------------------------

/// A quadratic involution of the plane fixing the cubic pointwise,
/// determined by a base point `q` on the curve. Its base locus consists of
/// `q` and the four tangency points.
#[derive(Debug, Clone)]
pub struct JonquieresMap {
    curve: CubicCurve,
    q: (f64, f64),
    base: [TangencyPoint; 4],
    /// `3 x_q + u`.
    a_coef: f64,
    /// `g'(x_q)`.
    b_coef: f64,
}

impl JonquieresMap {
    /// Build the involution with base point `q`; validates curve
    /// membership and rejects inflexion base points.
    pub fn new(curve: &CubicCurve, q: (f64, f64)) -> Result<Self, GeomError> {
        let base = tangency_points(curve, q)?;
        Ok(JonquieresMap {
            curve: curve.clone(),
            q,
            base,
            a_coef: 3.0 * q.0 + curve.u,
            b_coef: curve.g_prime(q.0),
        })
    }

    /// The distinguished base point `q`.
    pub fn base_point(&self) -> (f64, f64) {
        self.q
    }

    /// The four tangency points completing the base locus.
    pub fn base_points(&self) -> &[TangencyPoint; 4] {
        &self.base
    }

    /// The underlying curve.
    pub fn curve(&self) -> &CubicCurve {
        &self.curve
    }
}

/// Apply the involution to a projective point.
///
/// The line through `q` and the input meets the cubic residually in the
/// roots of `α₃ s² + α₂ s + α₁` (parameter `s` along the line direction
/// `(dx, dy)`), with `α₃ = -dx³`, `α₂ = dy² - A dx²`,
/// `α₁ = 2 y_q dy - B dx`. The image is the Möbius involution fixing those
/// two roots, applied projectively:
/// `(τ', σ') = (-(α₂ τ + 2 α₁ σ), 2 α₃ τ + α₂ σ)` for the input written as
/// `σ·q̂ + τ·d̂`. Squaring the coefficient matrix gives
/// `(α₂² - 4 α₁ α₃)·I` exactly, so a double application returns the input
/// projectively.
///
/// Errors: [`GeomError::BaseLocus`] within chordal distance `1e-8` of `q`
/// or a real tangency point; [`GeomError::TangentLine`] when the residual
/// intersections collide (the input sits on one of the four tangent lines
/// through `q`), detected by normalized root separation below `2e-7`.
pub fn jonquieres_apply(map: &JonquieresMap, p: &ProjPoint) -> Result<ProjPoint, GeomError> {
    let n = p.normalized();
    let (xq, yq) = map.q;
    let qh = ProjPoint::from_affine(xq, yq);
    if n.chordal_distance(&qh) < BASE_LOCUS_TOL {
        return Err(GeomError::BaseLocus(format!(
            "input coincides with the base point ({xq}, {yq})"
        )));
    }
    for t in map.base.iter().filter(|t| t.is_real()) {
        let th = ProjPoint::from_affine(t.x.re, t.y.re);
        if n.chordal_distance(&th) < BASE_LOCUS_TOL {
            return Err(GeomError::BaseLocus(format!(
                "input coincides with the tangency point ({}, {})",
                t.x.re, t.y.re
            )));
        }
    }
    let dx = n.x - n.z * xq;
    let dy = n.y - n.z * yq;
    let lambda = dx.abs().max(dy.abs());
    if lambda == 0.0 {
        return Err(GeomError::BaseLocus(
            "input coincides with the base point".into(),
        ));
    }
    let (dxn, dyn_) = (dx / lambda, dy / lambda);
    let alpha3 = -dxn * dxn * dxn;
    let alpha2 = dyn_ * dyn_ - map.a_coef * dxn * dxn;
    let alpha1 = 2.0 * yq * dyn_ - map.b_coef * dxn;
    // compensated discriminant α₂² - 4 α₁ α₃ (relative accuracy ~ eps)
    let prod = 4.0 * alpha1 * alpha3;
    let err = (4.0 * alpha1).mul_add(alpha3, -prod);
    let disc = alpha2.mul_add(alpha2, -prod) + err;
    let alpha_scale = alpha1.abs().max(alpha2.abs()).max(alpha3.abs());
    if alpha_scale == 0.0 {
        return Err(GeomError::Invalid(
            "degenerate line through the base point".into(),
        ));
    }
    if disc.abs().sqrt() < TANGENT_SEP_TOL * alpha_scale {
        return Err(GeomError::TangentLine(format!(
            "residual intersections collide (separation {:e})",
            disc.abs().sqrt() / alpha_scale
        )));
    }
    let (tau, sigma) = (lambda, n.z);
    let tau_out = -(alpha2 * tau + 2.0 * alpha1 * sigma);
    let sigma_out = 2.0 * alpha3 * tau + alpha2 * sigma;
    let out = ProjPoint::new(
        sigma_out * xq + tau_out * dxn,
        sigma_out * yq + tau_out * dyn_,
        sigma_out,
    )
    .map_err(|_| GeomError::Invalid("image degenerated to the zero triple".into()))?;
    Ok(out.normalized())
}

// ---------------------------------------------------------------------------
// Invariant conic
// ---------------------------------------------------------------------------

struct Conic {
    cxx: f64,
    cx: f64,
    cy: f64,
    c0: f64,
}

/// The conic through `q` and all four tangency points: the polar conic
/// `x_q (-3x² - 2ux - v) + 2 y_q y + (y² - u x² - 2 v x - 3 w)` of `q` with
/// respect to the cubic. Five points in general position determine a conic
/// uniquely, so this is the invariant conic of the involution.
fn conic_for(curve: &CubicCurve, q: (f64, f64)) -> Conic {
    let (u, v, w) = (curve.u, curve.v, curve.w);
    let (xq, yq) = q;
    Conic {
        cxx: -3.0 * xq - u,
        cx: -2.0 * u * xq - 2.0 * v,
        cy: 2.0 * yq,
        c0: -v * xq - 3.0 * w,
    }
}

impl Conic {
    fn value_c(&self, x: C, y: C) -> C {
        self.cxx * x * x + y * y + self.cx * x + self.cy * y + self.c0
    }

    fn value(&self, x: f64, y: f64) -> f64 {
        self.cxx * x * x + y * y + self.cx * x + self.cy * y + self.c0
    }

    fn is_ellipse(&self) -> bool {
        self.cxx > 0.0
    }

    fn center(&self) -> (f64, f64) {
        (-self.cx / (2.0 * self.cxx), -self.cy / 2.0)
    }
}

/// Value of the invariant conic of the involution based at `q`, at a
/// (complex) plane point. The conic vanishes at `q` and at all four
/// tangency points.
pub fn invariant_conic_value(curve: &CubicCurve, q: (f64, f64), x: C, y: C) -> C {
    conic_for(curve, q).value_c(x, y)
}

/// Whether the invariant conic of the involution based at `q` is an
/// ellipse (equivalently `x_q < -u/3`).
pub fn invariant_conic_is_ellipse(curve: &CubicCurve, q: (f64, f64)) -> bool {
    conic_for(curve, q).is_ellipse()
}

// ---------------------------------------------------------------------------
// Distance to the real locus
// ---------------------------------------------------------------------------

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    if !(b > a) {
        return f(a);
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..90 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    f(0.5 * (a + b)).min(f1).min(f2)
}

/// Euclidean distance from a plane point to the real locus of the curve.
///
/// The valid abscissa set is read off the real roots of `g`; candidates
/// are the branch endpoints plus, per connected piece and per sign of `y`,
/// a golden-section refinement of a 4000-point scan over the window
/// `|x - p_x| ≤ d₀` certified by an initial clamp bound `d₀`.
pub fn distance_to_curve(curve: &CubicCurve, p: (f64, f64)) -> f64 {
    let (px, py) = p;
    let roots = curve.real_roots_of_g();
    let domains: Vec<(f64, Option<f64>)> = if roots.len() >= 3 {
        vec![(roots[0], Some(roots[1])), (roots[2], None)]
    } else {
        vec![(roots[0], None)]
    };
    let dist2 = |x: f64, sign: f64| {
        let gx = curve.g(x).max(0.0);
        let y = sign * gx.sqrt();
        (x - px) * (x - px) + (y - py) * (y - py)
    };
    let mut best = f64::INFINITY;
    for r in &roots {
        best = best.min((r - px) * (r - px) + py * py);
    }
    for &(lo, hi) in &domains {
        let x0 = match hi {
            Some(h) => px.clamp(lo, h),
            None => px.max(lo),
        };
        for s in [1.0, -1.0] {
            best = best.min(dist2(x0, s));
        }
    }
    let d0 = best.sqrt();
    for &(lo, hi) in &domains {
        let wlo = lo.max(px - d0);
        let whi = match hi {
            Some(h) => h.min(px + d0),
            None => px + d0,
        };
        if wlo > whi {
            continue;
        }
        let n = 4000usize;
        let step = (whi - wlo) / n as f64;
        for s in [1.0, -1.0] {
            let mut bi = 0usize;
            let mut bv = f64::INFINITY;
            for j in 0..=n {
                let x = wlo + step * j as f64;
                let v = dist2(x, s);
                if v < bv {
                    bv = v;
                    bi = j;
                }
            }
            let a = (wlo + step * bi.saturating_sub(2) as f64).max(wlo);
            let b = (wlo + step * (bi + 2) as f64).min(whi);
            best = best.min(golden_min(|x| dist2(x, s), a, b));
        }
    }
    best.sqrt()
}

// ---------------------------------------------------------------------------
// Genericity predicates
// ---------------------------------------------------------------------------

/// Outcome of the four genericity checks for a family of base points.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    /// No base point is an inflexion of the cubic.
    pub hyp1: bool,
    /// Base and tangency points are pairwise distinct.
    pub hyp2: bool,
    /// No line through two base points contains a third marked point.
    pub hyp3: bool,
    /// At each base point, the directions to the four tangency points and
    /// to every other base point avoid the midpoint resonance
    /// `a_j + a_{j'} = 2c` in the chart centered at the curve tangent.
    pub hyp4: bool,
    /// Human-readable witnesses for every failed predicate.
    pub witnesses: Vec<String>,
}

impl HypothesisReport {
    /// Whether all four predicates hold.
    pub fn all_hold(&self) -> bool {
        self.hyp1 && self.hyp2 && self.hyp3 && self.hyp4
    }
}

/// Run the four genericity predicates for base points `qs` on the curve.
///
/// Precondition (panics otherwise): every supplied point lies on the
/// curve; membership is the caller's contract, not a genericity question.
pub fn hypothesis_check(curve: &CubicCurve, qs: &[(f64, f64)]) -> HypothesisReport {
    for (i, &(x, y)) in qs.iter().enumerate() {
        let scale = 1.0f64.max(x.abs().powi(3)).max(y * y);
        assert!(
            (y * y - curve.g(x)).abs() <= 1e-8 * scale,
            "base point q{} = ({x}, {y}) must lie on the curve",
            i + 1
        );
    }
    let mut report = HypothesisReport {
        hyp1: true,
        hyp2: true,
        hyp3: true,
        hyp4: true,
        witnesses: Vec::new(),
    };
    let k = qs.len();
    let mut tangencies: Vec<Option<[TangencyPoint; 4]>> = Vec::with_capacity(k);
    for (i, &q) in qs.iter().enumerate() {
        match tangency_points(curve, q) {
            Ok(t) => tangencies.push(Some(t)),
            Err(GeomError::InflexionPoint(msg)) => {
                report.hyp1 = false;
                report
                    .witnesses
                    .push(format!("q{} is an inflexion point: {msg}", i + 1));
                tangencies.push(None);
            }
            Err(e) => {
                report.hyp1 = false;
                report
                    .witnesses
                    .push(format!("tangency solve failed at q{}: {e}", i + 1));
                tangencies.push(None);
            }
        }
    }
    // labeled marked points (complex) for the distinctness and line tests
    let mut labeled: Vec<(String, C, C)> = Vec::new();
    for (i, &(x, y)) in qs.iter().enumerate() {
        labeled.push((format!("q{}", i + 1), C::new(x, 0.0), C::new(y, 0.0)));
    }
    for (i, tps) in tangencies.iter().enumerate() {
        if let Some(tps) = tps {
            for (j, t) in tps.iter().enumerate() {
                labeled.push((format!("p{}.{}", i + 1, j + 1), t.x, t.y));
            }
        }
    }
    // Hyp 2: pairwise distinct
    for a in 0..labeled.len() {
        for b in a + 1..labeled.len() {
            let (la, xa, ya) = &labeled[a];
            let (lb, xb, yb) = &labeled[b];
            let dist = (xa - xb).norm() + (ya - yb).norm();
            let scale = 1.0 + xa.norm() + xb.norm() + ya.norm() + yb.norm();
            if dist < DISTINCT_TOL * scale {
                report.hyp2 = false;
                report.witnesses.push(format!("{la} and {lb} coincide"));
            }
        }
    }
    // Hyp 3: no line through two base points contains a third marked point
    for i in 0..k {
        for j in i + 1..k {
            let d = (qs[j].0 - qs[i].0, qs[j].1 - qs[i].1);
            let dn = (d.0 * d.0 + d.1 * d.1).sqrt();
            if dn < 1e-10 {
                continue; // coincident base points, already a Hyp 2 witness
            }
            for (label, zx, zy) in &labeled {
                if label == &format!("q{}", i + 1) || label == &format!("q{}", j + 1) {
                    continue;
                }
                let rx = zx - qs[i].0;
                let ry = zy - qs[i].1;
                let rn = (rx.norm_sqr() + ry.norm_sqr()).sqrt();
                if rn < 1e-10 {
                    continue; // coincides with an endpoint, Hyp 2 territory
                }
                let cross = (d.0 * ry - d.1 * rx).norm();
                if cross < COLLINEAR_TOL * dn * rn {
                    report.hyp3 = false;
                    report.witnesses.push(format!(
                        "{label} lies on the line through q{} and q{}",
                        i + 1,
                        j + 1
                    ));
                }
            }
        }
    }
    // Hyp 4: midpoint resonance of direction-chart coordinates
    for l in 0..k {
        let Some(tps) = &tangencies[l] else { continue };
        let (xl, yl) = qs[l];
        let b_l = curve.g_prime(xl);
        let chart = |dx: C, dy: C| -> Option<C> {
            if yl.abs() > 1e-12 {
                let mt = b_l / (2.0 * yl);
                let den = dy - mt * dx;
                if den.norm() < 1e-12 * (dy.norm() + (mt * dx).norm() + 1.0) {
                    None
                } else {
                    Some(dx / den)
                }
            } else {
                // vertical curve tangent: invert the roles of the axes
                if dx.norm() < 1e-12 * (dy.norm() + 1.0) {
                    None
                } else {
                    Some(dy / dx)
                }
            }
        };
        let mut charted: Vec<(usize, C)> = Vec::new();
        let mut degenerate = false;
        for (j, t) in tps.iter().enumerate() {
            match chart(t.x - xl, t.y - yl) {
                Some(a) => charted.push((j + 1, a)),
                None => {
                    report.hyp4 = false;
                    report.witnesses.push(format!(
                        "direction from q{} to p{}.{} is the curve tangent at q{}",
                        l + 1,
                        l + 1,
                        j + 1,
                        l + 1
                    ));
                    degenerate = true;
                }
            }
        }
        if degenerate {
            continue;
        }
        for i in 0..k {
            if i == l {
                continue;
            }
            let c = match chart(C::new(qs[i].0 - xl, 0.0), C::new(qs[i].1 - yl, 0.0)) {
                Some(c) => c,
                None => {
                    report.hyp4 = false;
                    report.witnesses.push(format!(
                        "direction from q{} to q{} is the curve tangent at q{}",
                        l + 1,
                        i + 1,
                        l + 1
                    ));
                    continue;
                }
            };
            for a in 0..charted.len() {
                for b in a..charted.len() {
                    let (ja, va) = charted[a];
                    let (jb, vb) = charted[b];
                    let resid = (va + vb - 2.0 * c).norm();
                    let scale = 1.0 + va.norm() + vb.norm() + 2.0 * c.norm();
                    if resid < HYP4_TOL * scale {
                        report.hyp4 = false;
                        report.witnesses.push(format!(
                            "directions from q{} to p{}.{ja} and p{}.{jb} average to the \
                             direction to q{}",
                            l + 1,
                            l + 1,
                            l + 1,
                            i + 1
                        ));
                    }
                }
            }
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Configuration derivation
// ---------------------------------------------------------------------------

/// Position key along the connected branch: walk down the lower half from
/// `x = +∞` to the endpoint, then up the upper half.
fn branch_key(x: f64, y: f64) -> (u8, f64) {
    if y < 0.0 {
        (0, -x)
    } else {
        (1, x)
    }
}

fn key_cmp(a: (u8, f64), b: (u8, f64)) -> std::cmp::Ordering {
    a.0.cmp(&b.0).then(a.1.total_cmp(&b.1))
}

/// Derive the combinatorial configuration of base points `qs` on a
/// connected real cubic: the order of all marked points along the branch,
/// the side of each tangent line every other point falls on, and the
/// points inside each invariant conic — all by direct geometric tests.
/// The result is cross-validated against the relations the curve order
/// forces; any mismatch is an inconsistent configuration.
pub fn derive_config(
    curve: &CubicCurve,
    qs: &[(f64, f64)],
) -> Result<ConfigDescriptor, GeomError> {
    let k = qs.len();
    if k == 0 {
        return Err(GeomError::Invalid("need at least one base point".into()));
    }
    if !curve.is_real_connected() {
        return Err(GeomError::Invalid(
            "the real locus has two components; configurations need a single connected branch"
                .into(),
        ));
    }
    for (i, &q) in qs.iter().enumerate() {
        check_q_on_curve(curve, q)
            .map_err(|e| GeomError::NotOnCurve(format!("q{}: {e}", i + 1)))?;
    }
    // real tangency pair per base point, split before/after along the branch
    let mut coords: Vec<(Pt, f64, f64)> = Vec::with_capacity(3 * k);
    for (i0, &q) in qs.iter().enumerate() {
        let i = i0 + 1;
        let tps = tangency_points(curve, q)?;
        let real: Vec<(f64, f64)> = tps
            .iter()
            .filter(|t| t.is_real())
            .map(|t| (t.x.re, t.y.re))
            .collect();
        if real.len() != 2 {
            return Err(GeomError::InconsistentConfig(format!(
                "q{i} has {} real tangency points; the configuration requires exactly two",
                real.len()
            )));
        }
        let kq = branch_key(q.0, q.1);
        let (ka, kb) = (branch_key(real[0].0, real[0].1), branch_key(real[1].0, real[1].1));
        let (p_after, p_before) = match (
            key_cmp(ka, kq) == std::cmp::Ordering::Greater,
            key_cmp(kb, kq) == std::cmp::Ordering::Greater,
        ) {
            (true, false) => (real[0], real[1]),
            (false, true) => (real[1], real[0]),
            _ => {
                return Err(GeomError::InconsistentConfig(format!(
                    "both real tangency points of q{i} lie on the same side of it along the branch"
                )))
            }
        };
        coords.push((Pt::Q(i), q.0, q.1));
        coords.push((Pt::P(i, 1), p_after.0, p_after.1));
        coords.push((Pt::P(i, 2), p_before.0, p_before.1));
    }
    // order along the branch
    let mut sorted = coords.clone();
    sorted.sort_by(|a, b| key_cmp(branch_key(a.1, a.2), branch_key(b.1, b.2)));
    for pair in sorted.windows(2) {
        let ka = branch_key(pair[0].1, pair[0].2);
        let kb = branch_key(pair[1].1, pair[1].2);
        if ka.0 == kb.0 && (ka.1 - kb.1).abs() < 1e-12 * (1.0 + ka.1.abs()) {
            return Err(GeomError::InconsistentConfig(format!(
                "marked points {} and {} coincide along the branch",
                pair[0].0, pair[1].0
            )));
        }
    }
    let order: Vec<Pt> = sorted.iter().map(|c| c.0).collect();
    let pos: HashMap<Pt, usize> = order.iter().copied().enumerate().map(|(i, p)| (p, i)).collect();
    let by_order = |set: &HashSet<Pt>| -> Vec<Pt> {
        order.iter().copied().filter(|p| set.contains(p)).collect()
    };
    let coord_of: HashMap<Pt, (f64, f64)> =
        coords.iter().map(|&(p, x, y)| (p, (x, y))).collect();

    let mut above = vec![Vec::new(); k];
    let mut below = vec![Vec::new(); k];
    let mut inside = vec![Vec::new(); k];
    let mut on_line = vec![Vec::new(); k];
    for i in 1..=k {
        let q = coord_of[&Pt::Q(i)];
        let p1 = coord_of[&Pt::P(i, 1)];
        // side of the tangent line through q touching at p_{i,1}
        let d = (p1.0 - q.0, p1.1 - q.1);
        let dn = (d.0 * d.0 + d.1 * d.1).sqrt();
        let mut plus: HashSet<Pt> = HashSet::new();
        let mut minus: HashSet<Pt> = HashSet::new();
        for &(pt, x, y) in &coords {
            if pt == Pt::Q(i) || pt == Pt::P(i, 1) {
                continue;
            }
            let r = (x - q.0, y - q.1);
            let rn = (r.0 * r.0 + r.1 * r.1).sqrt();
            let cross = d.0 * r.1 - d.1 * r.0;
            if cross.abs() < COLLINEAR_TOL * dn * rn.max(1e-300) {
                on_line[i - 1].push(pt);
            } else if cross > 0.0 {
                plus.insert(pt);
            } else {
                minus.insert(pt);
            }
        }
        // orient the two sides by the after/before segments of the branch
        let after: HashSet<Pt> = order[pos[&Pt::Q(i)] + 1..]
            .iter()
            .copied()
            .filter(|p| *p != Pt::P(i, 1))
            .collect();
        let (above_set, below_set) = if plus == after { (plus, minus) } else { (minus, plus) };
        above[i - 1] = by_order(&above_set);
        below[i - 1] = by_order(&below_set);
        // interior of the invariant conic
        let conic = conic_for(curve, q);
        if !conic.is_ellipse() {
            return Err(GeomError::InconsistentConfig(format!(
                "the invariant conic of q{i} is not an ellipse (base point too far right)"
            )));
        }
        let center = conic.center();
        let center_val = conic.value(center.0, center.1);
        let coef_scale = 1.0f64
            .max(conic.cxx.abs())
            .max(conic.cx.abs())
            .max(conic.cy.abs())
            .max(conic.c0.abs());
        let mut inside_set: HashSet<Pt> = HashSet::new();
        for &(pt, x, y) in &coords {
            if pt == Pt::Q(i) || pt == Pt::P(i, 1) || pt == Pt::P(i, 2) {
                continue; // these lie on the conic by construction
            }
            let val = conic.value(x, y);
            if val.abs() < 1e-9 * coef_scale * (1.0 + x * x + y * y) {
                return Err(GeomError::InconsistentConfig(format!(
                    "marked point {pt} lies on the invariant conic of q{i}"
                )));
            }
            if (val > 0.0) == (center_val > 0.0) {
                inside_set.insert(pt);
            }
        }
        inside[i - 1] = by_order(&inside_set);
    }
    let cfg = ConfigDescriptor {
        k,
        order,
        above,
        below,
        inside,
        on_line,
    };
    nsaction::validate_config(&cfg)?;
    Ok(cfg)
}

/// A ready-made family of `k ≤ 4` base points in general position on the
/// connected cubic `y² = x³ + x + 1`, with exact rational abscissas on the
/// upper branch. For `k = 4` the extra point sits between the first and
/// third.
pub fn reference_configuration(k: usize) -> Result<(CubicCurve, Vec<(f64, f64)>), GeomError> {
    if !(1..=4).contains(&k) {
        return Err(GeomError::Invalid(format!(
            "reference configurations exist for 1 ≤ k ≤ 4, got {k}"
        )));
    }
    let curve = CubicCurve::from_rationals(
        Rational64::new(0, 1),
        Rational64::new(1, 1),
        Rational64::new(1, 1),
    )?;
    let xs = [
        Rational64::new(-7, 20),
        Rational64::new(-19, 50),
        Rational64::new(-41, 100),
        Rational64::new(-73, 200),
    ];
    let mut qs = Vec::with_capacity(k);
    for x in xs.iter().take(k) {
        qs.push(curve_point_from_spec(
            &curve,
            &RationalPointSpec { x: *x, y_sign: 1 },
        )?);
    }
    Ok((curve, qs))
}
