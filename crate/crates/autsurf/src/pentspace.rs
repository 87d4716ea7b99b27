//! Pentagon configuration spaces and the folding action on them.
//!
//! Three closely related spaces appear here:
//!
//! * **`Pentagon`** — a closed pentagon in the plane with labelled vertices
//!   `a_0..a_4`, kept in absolute position.  Edge `k` runs from `a_k` to
//!   `a_{k+1 mod 5}` and has length `l_k`.
//! * **`NormalizedPentagon`** — a pentagon modulo orientation-preserving
//!   similarity normalisation: `a_0 = 0`, `a_1 = (l_0, 0)`, encoded by the
//!   unit turning directions `t_1..t_4` (with `t_0 = 1` implied) subject to
//!   the closure relation `sum_k l_k t_k = 0`.
//! * **`Pent1Point`** — a pentagon modulo translation only: a normalized
//!   base together with the global rotation `u` (the actual direction of
//!   edge 0).  The folding action becomes a skew product
//!   `(x, u) -> (sigma(x), h(sigma, x) u)` over the normalized space, and
//!   the unimodular factor `h` is computed by [`circle_cocycle`].
//!
//! Folds come in ten flavours, one per unordered pair of edges.  On
//! directions every fold reflects the two chosen edge vectors across the
//! line spanned by their sum, which preserves that sum and hence the closure
//! relation.  On absolute pentagons a translation lift must be chosen; the
//! conventions are:
//!
//! * `s_i` (consecutive pair `{i, i+1}`) moves only the vertex `a_{i+1}`,
//!   reflecting it across the line `(a_i, a_{i+2})`;
//! * `r_i` (pair `{i, i+2}`) keeps `a_i`, `a_{i+3}`, `a_{i+4}` fixed and
//!   moves `a_{i+1}`, `a_{i+2}`.
//!
//! With these lifts the tracked vertex `a_0` moves only under `s_4`, `r_3`
//! and `r_4`, and its displacement depends only on the pentagon modulo
//! translation — this is the drift cocycle evaluated by
//! [`drift_increment`].

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::pentsurf::{newton_reproject, Lengths, PentError, SurfacePoint};

type C = Complex64;

/// Relative threshold below which a fold axis counts as degenerate.
const AXIS_THRESHOLD: f64 = 1e-10;
/// Relative spread of coordinate moduli beyond which a surface point is not
/// accepted as a real (unit-torus) configuration.
const TORUS_SPREAD_TOL: f64 = 1e-7;
/// Unit-modulus tolerance for stored turning directions.
const UNIT_TOL: f64 = 1e-12;
/// Closure tolerance (relative to the total perimeter).
const CLOSURE_TOL: f64 = 1e-9;
/// Rejection budget for the pentagon sampler.
const SAMPLE_BUDGET: usize = 20_000;

/// Errors raised by configuration-space operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    /// The requested side lengths admit no closed pentagon, or the sampler
    /// exhausted its rejection budget without closing one.
    #[error("side lengths admit no closed pentagon (or sampling budget exhausted)")]
    AdmissibilityFailure,
    /// The two folded edge vectors are antiparallel, so the fold axis is
    /// undefined.
    #[error("fold axis degenerates: the chosen edge vectors cancel")]
    DegenerateAxis,
    /// The surface point does not lie on the real locus (unit torus).
    #[error("surface point is not on the real locus")]
    NotRealLocus,
    /// Malformed input data.
    #[error("invalid pentagon data: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> SpaceError {
    SpaceError::Invalid(msg.into())
}

// ---------------------------------------------------------------------------
// Pentagon: absolute position
// ---------------------------------------------------------------------------

/// A closed pentagon in the plane, stored by its five vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Pentagon {
    vertices: [C; 5],
}

impl Pentagon {
    /// Builds a pentagon from five vertices.  All coordinates must be finite
    /// and consecutive vertices distinct.
    pub fn from_vertices(vertices: [C; 5]) -> Result<Self, SpaceError> {
        for (k, v) in vertices.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(invalid(format!("vertex a_{k} is not finite")));
            }
        }
        for k in 0..5 {
            if (vertices[(k + 1) % 5] - vertices[k]).norm() == 0.0 {
                return Err(invalid(format!("edge {k} has zero length")));
            }
        }
        Ok(Pentagon { vertices })
    }

    /// The five vertices `a_0..a_4`.
    pub fn vertices(&self) -> &[C; 5] {
        &self.vertices
    }

    /// The edge vectors `v_k = a_{k+1} - a_k` (indices mod 5).
    pub fn edge_vectors(&self) -> [C; 5] {
        std::array::from_fn(|k| self.vertices[(k + 1) % 5] - self.vertices[k])
    }

    /// The measured side lengths `|v_k|`.
    pub fn side_lengths(&self) -> [f64; 5] {
        self.edge_vectors().map(|v| v.norm())
    }

    /// Residual of the edge-vector loop; zero up to rounding for any vertex
    /// pentagon (the loop telescopes).
    pub fn closure_residual(&self) -> f64 {
        self.edge_vectors().iter().sum::<C>().norm()
    }
}

impl Serialize for Pentagon {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let pairs: [[f64; 2]; 5] = std::array::from_fn(|k| {
            let v = self.vertices[k];
            [v.re, v.im]
        });
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pentagon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let pairs = <[[f64; 2]; 5]>::deserialize(d)?;
        Pentagon::from_vertices(pairs.map(|p| C::new(p[0], p[1])))
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// NormalizedPentagon: modulo similarity normalisation
// ---------------------------------------------------------------------------

/// A pentagon in the normalized frame `a_0 = 0`, `a_1 = (l_0, 0)`, encoded
/// by its side lengths and the four unit turning directions `t_1..t_4`
/// (`t_0 = 1` is implied).
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPentagon {
    lengths: [f64; 5],
    t: [C; 4],
}

impl NormalizedPentagon {
    /// Builds a normalized pentagon, checking that the lengths are positive,
    /// the directions are unit modulus (within `1e-12`) and the closure
    /// relation `sum l_k t_k = 0` holds within `1e-9` of the perimeter.
    pub fn new(lengths: [f64; 5], t: [C; 4]) -> Result<Self, SpaceError> {
        let mut perimeter = 0.0;
        for (k, &l) in lengths.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(invalid(format!("side length l_{k} must be positive")));
            }
            perimeter += l;
        }
        for (k, dir) in t.iter().enumerate() {
            if (dir.norm() - 1.0).abs() > UNIT_TOL {
                return Err(invalid(format!(
                    "direction t_{} has modulus {}, expected 1",
                    k + 1,
                    dir.norm()
                )));
            }
        }
        let x = NormalizedPentagon { lengths, t };
        let res = x.closure_residual();
        if res > CLOSURE_TOL * perimeter {
            return Err(invalid(format!("closure residual {res} too large")));
        }
        Ok(x)
    }

    /// All five turning directions, `t_0 = 1` first.
    pub fn directions(&self) -> [C; 5] {
        [C::new(1.0, 0.0), self.t[0], self.t[1], self.t[2], self.t[3]]
    }

    /// The prescribed side lengths.
    pub fn side_lengths(&self) -> [f64; 5] {
        self.lengths
    }

    /// Vertices in the normalized frame: `a_0 = 0`, `a_{k+1} = a_k + l_k t_k`.
    pub fn vertices(&self) -> [C; 5] {
        let d = self.directions();
        let mut v = [C::new(0.0, 0.0); 5];
        for k in 0..4 {
            v[k + 1] = v[k] + self.lengths[k] * d[k];
        }
        v
    }

    /// `|sum_k l_k t_k|`: how far the five edges are from closing up.
    pub fn closure_residual(&self) -> f64 {
        let d = self.directions();
        (0..5).map(|k| self.lengths[k] * d[k]).sum::<C>().norm()
    }
}

// ---------------------------------------------------------------------------
// Pent1Point: modulo translation
// ---------------------------------------------------------------------------

/// A pentagon modulo translation: normalized base plus the global rotation
/// `u` (the actual unit direction of edge 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Pent1Point {
    /// Pentagon shape in the normalized frame.
    pub base: NormalizedPentagon,
    /// Actual direction of edge 0 (unit modulus).
    pub u: C,
}

/// Extracts the translation class of an absolute pentagon: its normalized
/// base (with measured side lengths) and the rotation of edge 0.
pub fn to_pent1(p: &Pentagon) -> Result<Pent1Point, SpaceError> {
    let v = p.edge_vectors();
    let lens = v.map(|e| e.norm());
    let mut u = v[0] / v[0].norm();
    u /= u.norm();
    let t: [C; 4] = std::array::from_fn(|k| {
        let e = v[k + 1];
        (e / e.norm()) * u.conj()
    });
    let base = NormalizedPentagon::new(lens, t)?;
    Ok(Pent1Point { base, u })
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Samples a random closed pentagon with the given (real) side lengths by
/// chaining: `a_0 = 0`, `a_1 = (l_0, 0)`, then `a_2` uniform on the circle
/// around `a_1`, `a_3` uniform on the circle around `a_2`, and `a_4` a
/// uniformly chosen intersection point of the two remaining circles,
/// rejecting partial chains whose circles fail to meet.
pub fn sample_pentagon<R: Rng + ?Sized>(
    l: &Lengths,
    rng: &mut R,
) -> Result<Pentagon, SpaceError> {
    let lv = l
        .real_values()
        .map_err(|_| invalid("sampling needs real side lengths"))?;
    if !l.is_admissible() {
        return Err(SpaceError::AdmissibilityFailure);
    }
    let a0 = C::new(0.0, 0.0);
    let a1 = C::new(lv[0], 0.0);
    for _ in 0..SAMPLE_BUDGET {
        let t1 = C::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        let t2 = C::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        let a2 = a1 + lv[1] * t1;
        let a3 = a2 + lv[2] * t2;
        // intersect the circle of radius l_3 around a_3 with the circle of
        // radius l_4 around a_0
        let (r0, r1) = (lv[4], lv[3]);
        let d = a3.norm();
        if d < 1e-12 || d > r0 + r1 || d < (r0 - r1).abs() {
            continue;
        }
        let m = (d * d + r0 * r0 - r1 * r1) / (2.0 * d);
        let h2 = r0 * r0 - m * m;
        let h = h2.max(0.0).sqrt();
        let dir = a3 / d;
        let perp = C::new(-dir.im, dir.re);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let a4 = m * dir + sign * h * perp;
        if let Ok(p) = Pentagon::from_vertices([a0, a1, a2, a3, a4]) {
            return Ok(p);
        }
    }
    Err(SpaceError::AdmissibilityFailure)
}

// ---------------------------------------------------------------------------
// Folds
// ---------------------------------------------------------------------------

/// Reflects `z` across the line spanned by the unit vector `w`.
fn reflect(w: C, z: C) -> C {
    w * w * z.conj()
}

/// Classifies an unordered pair of edge indices: `(true, c)` for the
/// consecutive pair `{c, c+1}` (lift `s_c`), `(false, c)` for the pair
/// `{c, c+2}` (lift `r_c`).
fn pair_kind(i: usize, j: usize) -> Result<(bool, usize), SpaceError> {
    if i >= 5 || j >= 5 || i == j {
        return Err(invalid("fold indices must be distinct in 0..5"));
    }
    match (j + 5 - i) % 5 {
        1 => Ok((true, i)),
        4 => Ok((true, j)),
        2 => Ok((false, i)),
        3 => Ok((false, j)),
        _ => unreachable!(),
    }
}

/// Applies the fold exchanging edges `i` and `j` to an absolute pentagon,
/// using the canonical translation lift for the pair (`s_c` for consecutive
/// pairs, `r_c` otherwise).  Vertices not moved by the lift are returned
/// bitwise unchanged.
pub fn geom_fold(p: &Pentagon, i: usize, j: usize) -> Result<Pentagon, SpaceError> {
    let (consecutive, c) = pair_kind(i, j)?;
    let v = p.edge_vectors();
    let (ei, ej) = if consecutive { (c, (c + 1) % 5) } else { (c, (c + 2) % 5) };
    let s = v[ei] + v[ej];
    if s.norm() < AXIS_THRESHOLD * (v[ei].norm() + v[ej].norm()) {
        return Err(SpaceError::DegenerateAxis);
    }
    let w = s / s.norm();
    let mut verts = *p.vertices();
    if consecutive {
        verts[(c + 1) % 5] = p.vertices()[c] + reflect(w, v[c]);
    } else {
        let a1 = p.vertices()[c] + reflect(w, v[c]);
        verts[(c + 1) % 5] = a1;
        verts[(c + 2) % 5] = a1 + v[(c + 1) % 5];
    }
    Pentagon::from_vertices(verts)
}

/// Applies the fold exchanging edges `i` and `j` on the normalized space:
/// the two turning directions are reflected across the line spanned by
/// `l_i t_i + l_j t_j`, and the result is re-rotated so that `t_0 = 1`.
pub fn fold_normalized(
    x: &NormalizedPentagon,
    i: usize,
    j: usize,
) -> Result<NormalizedPentagon, SpaceError> {
    pair_kind(i, j)?;
    let lv = x.side_lengths();
    let mut d = x.directions();
    let s = lv[i] * d[i] + lv[j] * d[j];
    if s.norm() < AXIS_THRESHOLD * (lv[i] + lv[j]) {
        return Err(SpaceError::DegenerateAxis);
    }
    let w = s / s.norm();
    d[i] = reflect(w, d[i]);
    d[j] = reflect(w, d[j]);
    let phase = d[0] / d[0].norm();
    let t: [C; 4] = std::array::from_fn(|k| {
        let raw = d[k + 1] * phase.conj();
        raw / raw.norm()
    });
    NormalizedPentagon::new(lv, t)
}

// ---------------------------------------------------------------------------
// Bridge to the surface model
// ---------------------------------------------------------------------------

/// Sends a normalized pentagon to its surface point `[1 : t_1 : ... : t_4]`.
pub fn to_surface(x: &NormalizedPentagon) -> SurfacePoint {
    SurfacePoint::new(x.directions()).expect("unit directions are a valid point")
}

/// Reads a normalized pentagon back from a surface point on the real locus:
/// the coordinates must have equal moduli (relative spread below `1e-7`);
/// they are rotated so the zeroth becomes `1` and snapped to unit modulus.
pub fn from_surface(l: &Lengths, z: &SurfacePoint) -> Result<NormalizedPentagon, SpaceError> {
    let lv = l
        .real_values()
        .map_err(|_| invalid("real side lengths required"))?;
    let moduli = z.coords().map(|c| c.norm());
    let mx = moduli.iter().cloned().fold(0.0f64, f64::max);
    let mn = moduli.iter().cloned().fold(f64::INFINITY, f64::min);
    if mx - mn > TORUS_SPREAD_TOL * mx {
        return Err(SpaceError::NotRealLocus);
    }
    let z0 = z.coords()[0];
    let t: [C; 4] = std::array::from_fn(|k| {
        let raw = z.coords()[k + 1] / z0;
        raw / raw.norm()
    });
    NormalizedPentagon::new(lv, t)
}

// ---------------------------------------------------------------------------
// Circle extension
// ---------------------------------------------------------------------------

/// Direction of edge `m` of the actual pentagon represented by `q`.
pub fn theta_m(q: &Pent1Point, m: usize) -> C {
    assert!(m < 5, "edge index must be in 0..5");
    q.u * q.base.directions()[m]
}

/// The unimodular cocycle of the fold `(i, j)` in the edge-0 chart of the
/// circle extension: the lift acts as `(x, u) -> (sigma(x), h u)`.  Folds
/// not touching edge 0 return exactly `1`; folds touching it return `w^2`
/// where `w` is the unit fold axis computed from the normalized directions.
/// On a degenerate axis (measure zero) the value `1` is returned.
pub fn circle_cocycle(i: usize, j: usize, x: &NormalizedPentagon) -> C {
    assert!(i < 5 && j < 5 && i != j, "fold indices must be distinct in 0..5");
    if i != 0 && j != 0 {
        return C::new(1.0, 0.0);
    }
    let lv = x.side_lengths();
    let d = x.directions();
    let s = lv[i] * d[i] + lv[j] * d[j];
    if s.norm() < AXIS_THRESHOLD * (lv[i] + lv[j]) {
        return C::new(1.0, 0.0);
    }
    let w = s / s.norm();
    w * w
}

// ---------------------------------------------------------------------------
// Drift increments
// ---------------------------------------------------------------------------

/// A named fold lift: `S(i)` is the consecutive fold `{i, i+1}` moving only
/// vertex `a_{i+1}`; `R(i)` is the fold `{i, i+2}` anchoring `a_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FoldLabel {
    /// Consecutive fold `{i, i+1 mod 5}`, moving only `a_{i+1}`.
    S(usize),
    /// Skip fold `{i, i+2 mod 5}`, anchoring `a_i`, `a_{i+3}`, `a_{i+4}`.
    R(usize),
}

impl FoldLabel {
    /// The unordered edge pair this label folds.
    pub fn pair(&self) -> (usize, usize) {
        match *self {
            FoldLabel::S(i) => (i, (i + 1) % 5),
            FoldLabel::R(i) => (i, (i + 2) % 5),
        }
    }

    /// All ten labels in a fixed order.
    pub fn all() -> [FoldLabel; 10] {
        [
            FoldLabel::S(0),
            FoldLabel::S(1),
            FoldLabel::S(2),
            FoldLabel::S(3),
            FoldLabel::S(4),
            FoldLabel::R(0),
            FoldLabel::R(1),
            FoldLabel::R(2),
            FoldLabel::R(3),
            FoldLabel::R(4),
        ]
    }
}

impl fmt::Display for FoldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FoldLabel::S(i) => write!(f, "s{i}"),
            FoldLabel::R(i) => write!(f, "r{i}"),
        }
    }
}

impl FromStr for FoldLabel {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, SpaceError> {
        let s = s.trim();
        let idx: usize = s[1..]
            .parse()
            .map_err(|_| invalid(format!("cannot parse fold label `{s}`")))?;
        if idx >= 5 {
            return Err(invalid(format!("fold label index out of range in `{s}`")));
        }
        match &s[..1] {
            "s" | "S" => Ok(FoldLabel::S(idx)),
            "r" | "R" => Ok(FoldLabel::R(idx)),
            _ => Err(invalid(format!("cannot parse fold label `{s}`"))),
        }
    }
}

/// A word in the fold lifts, applied right-to-left like function
/// composition when interpreted as a map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldWord {
    labels: Vec<FoldLabel>,
}

impl FoldWord {
    /// Wraps a sequence of labels.
    pub fn new(labels: Vec<FoldLabel>) -> Self {
        FoldWord { labels }
    }

    /// The letters of the word.
    pub fn labels(&self) -> &[FoldLabel] {
        &self.labels
    }

    /// Number of letters.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Whether the word is empty.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Cancels adjacent equal letters (each lift is an involution),
    /// cascading until no such pair remains.
    pub fn reduced(&self) -> FoldWord {
        let mut stack: Vec<FoldLabel> = Vec::with_capacity(self.labels.len());
        for &lab in &self.labels {
            if stack.last() == Some(&lab) {
                stack.pop();
            } else {
                stack.push(lab);
            }
        }
        FoldWord { labels: stack }
    }
}

impl fmt::Display for FoldWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, lab) in self.labels.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{lab}")?;
        }
        Ok(())
    }
}

impl FromStr for FoldWord {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, SpaceError> {
        let labels = s
            .split(|c: char| c.is_whitespace() || c == ',' || c == '.')
            .filter(|tok| !tok.is_empty())
            .map(FoldLabel::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FoldWord { labels })
    }
}

/// Displacement of the tracked vertex `a_0` under the given fold lift, as a
/// function of the pentagon modulo translation.  Exactly zero for `s_0..s_3`
/// and `r_0..r_2`; for `s_4`, `r_3` and `r_4` it is the change of the edge
/// vector ending at (or starting from) `a_0`.  The modulus never exceeds
/// twice the perimeter.  A degenerate fold axis (measure zero) contributes
/// no displacement.
pub fn drift_increment(label: FoldLabel, q: &Pent1Point) -> [f64; 2] {
    // which edge's change moves a_0, if any
    let edge = match label {
        FoldLabel::S(4) | FoldLabel::R(4) => 4,
        FoldLabel::R(3) => 3,
        _ => return [0.0, 0.0],
    };
    let (i, j) = label.pair();
    let lv = q.base.side_lengths();
    let d = q.base.directions();
    let v: [C; 5] = std::array::from_fn(|k| lv[k] * q.u * d[k]);
    let s = v[i] + v[j];
    if s.norm() < AXIS_THRESHOLD * (lv[i] + lv[j]) {
        return [0.0, 0.0];
    }
    let w = s / s.norm();
    let delta = reflect(w, v[edge]) - v[edge];
    [delta.re, delta.im]
}

// ---------------------------------------------------------------------------
// Reprojection
// ---------------------------------------------------------------------------

/// Projects an absolute pentagon back onto the exact-side-length locus,
/// preserving the position of `a_0` and the direction of edge 0: the unit
/// turning directions are re-solved on the closure constraint by the
/// surface-model Newton step and the vertices rebuilt with the prescribed
/// lengths.
pub fn reproject_pentagon(l: &Lengths, p: &Pentagon) -> Result<Pentagon, SpaceError> {
    let lv = l
        .real_values()
        .map_err(|_| invalid("real side lengths required"))?;
    let q = to_pent1(p)?;
    let z = to_surface(&q.base);
    let z = newton_reproject(l, &z).map_err(|e: PentError| invalid(e.to_string()))?;
    let x = from_surface(l, &z)?;
    let d = x.directions();
    let mut verts = [p.vertices()[0]; 5];
    for k in 0..4 {
        verts[k + 1] = verts[k] + lv[k] * q.u * d[k];
    }
    Pentagon::from_vertices(verts)
}
