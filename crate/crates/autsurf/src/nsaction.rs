//! Exact integral actions on cohomology for groups generated by Jonquieres
//! involutions.
//!
//! Two representations are provided, both with exact `BigInt` arithmetic:
//!
//! * the Neron-Severi lattice of the plane blown up at the `k` base points
//!   `q_i` and the `4k` tangency points `p_{i,j}` — basis
//!   `(e_0, e_{q_1}, …, e_{q_k}, e_{p_{1,1}}, …, e_{p_{k,4}})` of dimension
//!   `1 + 5k`, intersection form `diag(1, -1, …, -1)`;
//! * the first homology of the real locus of the invariant curve's double
//!   cover — basis `(e_{q_i}, e_{p_{i,1}}, e_{p_{i,2}})` per involution
//!   (only the two real tangency points enter), dimension `3k`, built from a
//!   combinatorial [`ConfigDescriptor`] recording how the blown-up points sit
//!   along the connected real cubic.
//!
//! All matrices follow the columns-are-images convention: column `c` holds
//! the image of the `c`-th basis vector. Public involution indices are
//! 1-based (`1 ≤ i ≤ k`).

use crate::exactlin::{classify_isometry, Classification, ExactLinError, LatticeMatrix};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

/// Order bound used when classifying words: finite-order isometries of these
/// lattices have order dividing a small bound, and 66 comfortably exceeds the
/// largest order arising in rank ≤ 31.
const ORDER_BOUND: u64 = 66;

/// Errors for the cohomology-action layer.
#[derive(Debug, thiserror::Error)]
pub enum NsError {
    /// An involution index or word letter is outside `1..=k`.
    #[error("index out of range: {0}")]
    BadIndex(String),
    /// A vector or matrix has the wrong dimension for the requested lattice.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A configuration descriptor violates the combinatorial consistency
    /// rules forced by a connected real cubic.
    #[error("inconsistent configuration: {0}")]
    InconsistentConfig(String),
    /// The requested enumeration exceeds the configured word budget.
    #[error("word budget exceeded: {0}")]
    Budget(String),
    /// The quotient construction failed to intertwine exactly.
    #[error("quotient intertwining failure: {0}")]
    IntertwiningFailure(String),
    /// Integer overflow in the fixed-width enumeration fast path.
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    /// Error propagated from the exact linear algebra layer.
    #[error(transparent)]
    Lin(#[from] ExactLinError),
}

fn check_index(k: usize, i: usize) -> Result<(), NsError> {
    if k == 0 {
        return Err(NsError::BadIndex("k must be at least 1".into()));
    }
    if i == 0 || i > k {
        return Err(NsError::BadIndex(format!(
            "involution index {i} outside 1..={k}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Neron-Severi representation
// ---------------------------------------------------------------------------

/// Dimension of the Neron-Severi lattice for `k` involutions.
pub fn ns_dim(k: usize) -> usize {
    1 + 5 * k
}

/// Intersection form `diag(1, -1, …, -1)` on the blown-up plane.
pub fn ns_gram(k: usize) -> LatticeMatrix {
    let mut diag = vec![-1i64; ns_dim(k)];
    diag[0] = 1;
    LatticeMatrix::diagonal(&diag)
}

/// Description of the Neron-Severi basis for `k` involutions: dimension,
/// Gram form, and coordinate lookup for the named basis classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NsBasisSpec {
    pub k: usize,
}

impl NsBasisSpec {
    pub fn new(k: usize) -> Result<Self, NsError> {
        if k == 0 {
            return Err(NsError::BadIndex("k must be at least 1".into()));
        }
        Ok(Self { k })
    }

    pub fn dim(&self) -> usize {
        ns_dim(self.k)
    }

    pub fn gram(&self) -> LatticeMatrix {
        ns_gram(self.k)
    }

    /// Coordinate of `e_{q_i}` (1-based `i`).
    pub fn q_index(&self, i: usize) -> Result<usize, NsError> {
        check_index(self.k, i)?;
        Ok(ns_q_index(i))
    }

    /// Coordinate of `e_{p_{i,j}}` (1-based `i`, `j` in `1..=4`).
    pub fn p_index(&self, i: usize, j: usize) -> Result<usize, NsError> {
        check_index(self.k, i)?;
        if j == 0 || j > 4 {
            return Err(NsError::BadIndex(format!(
                "tangency index {j} outside 1..=4"
            )));
        }
        Ok(ns_p_index(self.k, i, j - 1))
    }
}

/// Index of `e_{q_i}` in the Neron-Severi basis (1-based `i`).
fn ns_q_index(i: usize) -> usize {
    i
}

/// Index of `e_{p_{i,j}}` in the Neron-Severi basis (1-based `i`, `j` in `0..4`).
fn ns_p_index(k: usize, i: usize, j: usize) -> usize {
    1 + k + 4 * (i - 1) + j
}

/// Action of the `i`-th Jonquieres involution on the Neron-Severi lattice of
/// the plane blown up at all `q`-points and tangency points.
///
/// The involution is the degree-3 birational map with base locus
/// `q_i, p_{i,1..4}`; its action is determined by the images
/// `e_0 ↦ 3e_0 - 2e_{q_i} - Σ_j e_{p_{i,j}}`,
/// `e_{q_i} ↦ 2e_0 - e_{q_i} - Σ_j e_{p_{i,j}}`,
/// `e_{p_{i,j}} ↦ e_0 - e_{q_i} - e_{p_{i,j}}`, all other basis classes fixed.
pub fn blanc_ns_matrix(k: usize, i: usize) -> Result<LatticeMatrix, NsError> {
    check_index(k, i)?;
    let n = ns_dim(k);
    let qi = ns_q_index(i);
    let ps: Vec<usize> = (0..4).map(|j| ns_p_index(k, i, j)).collect();
    let mut rows = vec![vec![0i64; n]; n];
    for c in 0..n {
        rows[c][c] = 1;
    }
    // column of e_0
    rows[0][0] = 3;
    rows[qi][0] = -2;
    for &p in &ps {
        rows[p][0] = -1;
    }
    // column of e_{q_i}
    rows[0][qi] = 2;
    rows[qi][qi] = -1;
    for &p in &ps {
        rows[p][qi] = -1;
    }
    // columns of e_{p_{i,j}}
    for &p in &ps {
        rows[0][p] = 1;
        rows[qi][p] = -1;
        rows[p][p] = -1;
    }
    Ok(LatticeMatrix::from_i64_rows(&rows).expect("square by construction"))
}

/// Intersection number `⟨a, b⟩` in the Neron-Severi lattice.
pub fn gram_value(k: usize, a: &[BigInt], b: &[BigInt]) -> BigInt {
    let n = ns_dim(k);
    assert_eq!(a.len(), n, "vector length must be 1 + 5k");
    assert_eq!(b.len(), n, "vector length must be 1 + 5k");
    let mut s = &a[0] * &b[0];
    for r in 1..n {
        s -= &a[r] * &b[r];
    }
    s
}

/// Class of the strict transform of the invariant cubic:
/// `3e_0 - Σ_i (e_{q_i} + Σ_j e_{p_{i,j}})`, self-intersection `9 - 5k`.
pub fn cx_class(k: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::ZERO; ns_dim(k)];
    v[0] = BigInt::from(3);
    for i in 1..=k {
        v[ns_q_index(i)] = BigInt::from(-1);
        for j in 0..4 {
            v[ns_p_index(k, i, j)] = BigInt::from(-1);
        }
    }
    v
}

/// Isotropic class fixed by both the `i`-th and `j`-th involutions:
/// `4e_0 - 2e_{q_i} - 2e_{q_j} - Σ_m e_{p_{i,m}} - Σ_m e_{p_{j,m}}`.
pub fn u_pair_class(k: usize, i: usize, j: usize) -> Vec<BigInt> {
    assert!(i >= 1 && i <= k && j >= 1 && j <= k && i != j, "need distinct 1-based indices");
    let mut v = vec![BigInt::ZERO; ns_dim(k)];
    v[0] = BigInt::from(4);
    for idx in [i, j] {
        v[ns_q_index(idx)] = BigInt::from(-2);
        for m in 0..4 {
            v[ns_p_index(k, idx, m)] = BigInt::from(-1);
        }
    }
    v
}

/// Member of the family of classes fixed by the `i`-th involution:
/// `d·e_0 - (d - 2m)·e_{q_i} - m·Σ_j e_{p_{i,j}}` (other coordinates zero).
pub fn fixed_family_vector(k: usize, i: usize, d: i64, m: i64) -> Vec<BigInt> {
    assert!(i >= 1 && i <= k, "1-based index");
    let mut v = vec![BigInt::ZERO; ns_dim(k)];
    v[0] = BigInt::from(d);
    v[ns_q_index(i)] = BigInt::from(-(d - 2 * m));
    for j in 0..4 {
        v[ns_p_index(k, i, j)] = BigInt::from(-m);
    }
    v
}

/// Whether the class `v` is fixed by the `i`-th Neron-Severi involution.
pub fn fixed_class_check(k: usize, i: usize, v: &[BigInt]) -> Result<bool, NsError> {
    let m = blanc_ns_matrix(k, i)?;
    if v.len() != ns_dim(k) {
        return Err(NsError::Dimension(format!(
            "expected vector of length {}, got {}",
            ns_dim(k),
            v.len()
        )));
    }
    Ok(m.apply(v) == v)
}

// ---------------------------------------------------------------------------
// Configuration descriptors for the real-locus H^1 action
// ---------------------------------------------------------------------------

/// A blown-up point on the real cubic: the base point `Q(i)` of the `i`-th
/// involution, or its real tangency point `P(i, r)` with `r = 1` (the one
/// after `q_i` in curve order) or `r = 2` (the one before).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pt {
    Q(usize),
    P(usize, usize),
}

impl fmt::Display for Pt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pt::Q(i) => write!(f, "q{i}"),
            Pt::P(i, r) => write!(f, "p{i}.{r}"),
        }
    }
}

impl FromStr for Pt {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let err = || format!("cannot parse point label {t:?} (expected e.g. \"q2\" or \"p2.1\")");
        let mut chars = t.chars();
        match chars.next() {
            Some('q') | Some('Q') => {
                let i: usize = chars.as_str().parse().map_err(|_| err())?;
                Ok(Pt::Q(i))
            }
            Some('p') | Some('P') => {
                let rest = chars.as_str();
                let (a, b) = rest.split_once('.').ok_or_else(err)?;
                let i: usize = a.parse().map_err(|_| err())?;
                let r: usize = b.parse().map_err(|_| err())?;
                Ok(Pt::P(i, r))
            }
            _ => Err(err()),
        }
    }
}

impl Serialize for Pt {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Pt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Combinatorial position data for `k` involutions whose base and real
/// tangency points all lie on one connected real cubic branch.
///
/// * `order` — all `3k` points listed along the branch (the curve is
///   homeomorphic to a line; the two ends are the asymptotic directions);
/// * `above[i-1]` / `below[i-1]` — the side of the tangent line through
///   `q_i` touching at `p_{i,1}` on which each other point lies (the line
///   meets the branch transversally only at `q_i`, so the sides are the
///   after/before segments);
/// * `inside[i-1]` — the points strictly inside the invariant conic through
///   `q_i` tangent at `p_{i,1}` and `p_{i,2}` (the branch crosses it exactly
///   at those two tangencies, so the inside is the open segment between
///   them, minus `q_i` which lies on the conic);
/// * `on_line[i-1]` — points found exactly on the tangent line; a line meets
///   the cubic in three points (here `q_i` once, `p_{i,1}` twice), so any
///   entry makes the configuration inconsistent.
///
/// The geometric layer computes the three relation families independently
/// (by actual side-of-line and inside-of-conic tests) and
/// [`h1_matrix_from_configuration`] re-derives them from `order`, rejecting
/// any mismatch as [`NsError::InconsistentConfig`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigDescriptor {
    pub k: usize,
    pub order: Vec<Pt>,
    pub above: Vec<Vec<Pt>>,
    pub below: Vec<Vec<Pt>>,
    pub inside: Vec<Vec<Pt>>,
    #[serde(default)]
    pub on_line: Vec<Vec<Pt>>,
}

impl ConfigDescriptor {
    /// Build a descriptor from the curve order alone, deriving the
    /// line-side and conic-inside relations combinatorially.
    pub fn from_curve_order(k: usize, order: Vec<Pt>) -> Result<Self, NsError> {
        let mut cfg = ConfigDescriptor {
            k,
            order,
            above: vec![Vec::new(); k],
            below: vec![Vec::new(); k],
            inside: vec![Vec::new(); k],
            on_line: vec![Vec::new(); k],
        };
        for i in 1..=k {
            let (above, below, inside) = derive_relations(&cfg.order, k, i)?;
            cfg.above[i - 1] = above;
            cfg.below[i - 1] = below;
            cfg.inside[i - 1] = inside;
        }
        Ok(cfg)
    }
}

/// The bottom-to-top curve order of the reference configuration with three
/// involutions (base points descending along the upper branch).
pub fn default_k3_config() -> ConfigDescriptor {
    ConfigDescriptor::from_curve_order(
        3,
        vec![
            Pt::P(1, 2),
            Pt::P(2, 2),
            Pt::P(3, 2),
            Pt::Q(3),
            Pt::Q(2),
            Pt::Q(1),
            Pt::P(1, 1),
            Pt::P(2, 1),
            Pt::P(3, 1),
        ],
    )
    .expect("reference configuration is consistent")
}

/// Index of a point in the H^1 basis `(e_{q_1}, e_{p_{1,1}}, e_{p_{1,2}}, …)`.
fn h1_index(k: usize, p: Pt) -> Result<usize, NsError> {
    match p {
        Pt::Q(i) => {
            check_index(k, i)?;
            Ok(3 * (i - 1))
        }
        Pt::P(i, r) => {
            check_index(k, i)?;
            if r != 1 && r != 2 {
                return Err(NsError::BadIndex(format!(
                    "tangency role must be 1 or 2, got {r}"
                )));
            }
            Ok(3 * (i - 1) + r)
        }
    }
}

/// Check `order` is a permutation of the `3k` points with
/// `p_{i,2} < q_i < p_{i,1}` for each `i`, and return positions.
fn order_positions(order: &[Pt], k: usize) -> Result<HashMap<Pt, usize>, NsError> {
    if order.len() != 3 * k {
        return Err(NsError::InconsistentConfig(format!(
            "curve order lists {} points, expected {}",
            order.len(),
            3 * k
        )));
    }
    let mut pos = HashMap::new();
    for (idx, &p) in order.iter().enumerate() {
        h1_index(k, p)?;
        if pos.insert(p, idx).is_some() {
            return Err(NsError::InconsistentConfig(format!(
                "point {p} repeated in curve order"
            )));
        }
    }
    for i in 1..=k {
        let pq = pos[&Pt::Q(i)];
        let p1 = pos[&Pt::P(i, 1)];
        let p2 = pos[&Pt::P(i, 2)];
        if !(p2 < pq && pq < p1) {
            return Err(NsError::InconsistentConfig(format!(
                "block {i} must satisfy p{i}.2 < q{i} < p{i}.1 along the curve"
            )));
        }
    }
    Ok(pos)
}

/// Derive the line-side and conic-inside relations for involution `i` from
/// the curve order.
fn derive_relations(
    order: &[Pt],
    k: usize,
    i: usize,
) -> Result<(Vec<Pt>, Vec<Pt>, Vec<Pt>), NsError> {
    check_index(k, i)?;
    let pos = order_positions(order, k)?;
    let pq = pos[&Pt::Q(i)];
    let p1 = pos[&Pt::P(i, 1)];
    let p2 = pos[&Pt::P(i, 2)];
    let mut above = Vec::new();
    let mut below = Vec::new();
    let mut inside = Vec::new();
    for (idx, &p) in order.iter().enumerate() {
        if idx > pq && p != Pt::P(i, 1) {
            above.push(p);
        }
        if idx < pq {
            below.push(p);
        }
        if idx > p2 && idx < p1 && p != Pt::Q(i) {
            inside.push(p);
        }
    }
    Ok((above, below, inside))
}

fn same_set(a: &[Pt], b: &[Pt]) -> bool {
    let sa: HashSet<Pt> = a.iter().copied().collect();
    let sb: HashSet<Pt> = b.iter().copied().collect();
    sa.len() == a.len() && sb.len() == b.len() && sa == sb
}

/// Validate a descriptor completely: curve-order sanity plus agreement of
/// the supplied relation families with the ones the order forces.
pub fn validate_config(cfg: &ConfigDescriptor) -> Result<(), NsError> {
    if cfg.k == 0 {
        return Err(NsError::InconsistentConfig("k must be at least 1".into()));
    }
    if cfg.above.len() != cfg.k || cfg.below.len() != cfg.k || cfg.inside.len() != cfg.k {
        return Err(NsError::InconsistentConfig(
            "need one above/below/inside family per involution".into(),
        ));
    }
    if !cfg.on_line.is_empty() {
        if cfg.on_line.len() != cfg.k {
            return Err(NsError::InconsistentConfig(
                "need one on-line family per involution when supplied".into(),
            ));
        }
        for (b, fam) in cfg.on_line.iter().enumerate() {
            if let Some(p) = fam.first() {
                return Err(NsError::InconsistentConfig(format!(
                    "point {p} lies on the tangent line of involution {}; a line meets \
                     the cubic only at q and the double contact",
                    b + 1
                )));
            }
        }
    }
    for i in 1..=cfg.k {
        let (above, below, inside) = derive_relations(&cfg.order, cfg.k, i)?;
        if !same_set(&cfg.above[i - 1], &above) {
            return Err(NsError::InconsistentConfig(format!(
                "line-side relation for involution {i} disagrees with the curve order: \
                 the tangent line through q{i} separates the branch exactly at q{i}"
            )));
        }
        if !same_set(&cfg.below[i - 1], &below) {
            return Err(NsError::InconsistentConfig(format!(
                "below-line relation for involution {i} disagrees with the curve order"
            )));
        }
        if !same_set(&cfg.inside[i - 1], &inside) {
            return Err(NsError::InconsistentConfig(format!(
                "conic-interior relation for involution {i} disagrees with the curve order: \
                 the invariant conic meets the branch exactly at p{i}.1 and p{i}.2"
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// H^1 of the real locus
// ---------------------------------------------------------------------------

/// Action of the `i`-th involution on `H^1` of the real locus, dimension
/// `3k`, from a validated configuration.
///
/// Columns (images of basis vectors) follow the loop-surgery rules:
///
/// * `e_{q_i} ↦ e_{q_i} + e_{p_{i,1}} + e_{p_{i,2}} + 2·Σ_{r inside} e_r`
///   (the invariant-conic class, with doubled loops for points it encloses);
/// * `e_{p_{i,1}} ↦ Σ_{above} e_r - Σ_{below} e_r` (the tangent-line class,
///   signs by side);
/// * `e_{p_{i,2}} ↦ -e_{p_{i,1}} + (mirror: negated line-class coefficients
///   for all other points)`;
/// * every other basis loop reverses orientation: `e_r ↦ -e_r`.
pub fn h1_matrix_from_configuration(
    cfg: &ConfigDescriptor,
    i: usize,
) -> Result<LatticeMatrix, NsError> {
    validate_config(cfg)?;
    check_index(cfg.k, i)?;
    let k = cfg.k;
    let n = 3 * k;
    let qi = h1_index(k, Pt::Q(i))?;
    let pi1 = h1_index(k, Pt::P(i, 1))?;
    let pi2 = h1_index(k, Pt::P(i, 2))?;
    let mut rows = vec![vec![0i64; n]; n];
    // default: all loops reverse orientation
    for c in 0..n {
        rows[c][c] = -1;
    }
    // column of e_{q_i}: class of the invariant conic
    rows[qi][qi] = 1;
    rows[pi1][qi] = 1;
    rows[pi2][qi] = 1;
    for &p in &cfg.inside[i - 1] {
        rows[h1_index(k, p)?][qi] = 2;
    }
    // column of e_{p_{i,1}}: class of the tangent line
    for r in 0..n {
        rows[r][pi1] = 0;
    }
    for &p in &cfg.above[i - 1] {
        rows[h1_index(k, p)?][pi1] = 1;
    }
    for &p in &cfg.below[i - 1] {
        rows[h1_index(k, p)?][pi1] = -1;
    }
    // column of e_{p_{i,2}}: mirrored tangent-line class
    for r in 0..n {
        rows[r][pi2] = 0;
    }
    rows[pi1][pi2] = -1;
    for &p in cfg.above[i - 1].iter().chain(cfg.below[i - 1].iter()) {
        if p == Pt::P(i, 2) {
            continue;
        }
        let r = h1_index(k, p)?;
        rows[r][pi2] = -rows[r][pi1];
    }
    let m = LatticeMatrix::from_i64_rows(&rows).expect("square by construction");
    if !m.mul(&m)?.is_identity() {
        return Err(NsError::InconsistentConfig(format!(
            "derived action for involution {i} is not an involution"
        )));
    }
    Ok(m)
}

/// Basis of the common invariant kernel of the quotient projection:
/// `e_{p_{i,1}} + e_{p_{i,2}}` for each block.
pub fn h1_kernel_basis(k: usize) -> Vec<Vec<BigInt>> {
    (0..k)
        .map(|b| {
            let mut v = vec![BigInt::ZERO; 3 * k];
            v[3 * b + 1] = BigInt::from(1);
            v[3 * b + 2] = BigInt::from(1);
            v
        })
        .collect()
}

/// Exact integer matrix of arbitrary shape (the lattice layer is
/// square-only); used for the quotient projection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RectMatrix {
    nrows: usize,
    ncols: usize,
    entries: Vec<BigInt>,
}

impl RectMatrix {
    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self, NsError> {
        let nrows = rows.len();
        if nrows == 0 {
            return Err(NsError::Dimension("matrix needs at least one row".into()));
        }
        let ncols = rows[0].len();
        if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
            return Err(NsError::Dimension("ragged or empty rows".into()));
        }
        Ok(Self {
            nrows,
            ncols,
            entries: rows.iter().flatten().map(|&x| BigInt::from(x)).collect(),
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn entry(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.ncols + c]
    }

    /// `self · m` for a square `m` acting on the source space.
    pub fn mul_right(&self, m: &LatticeMatrix) -> Result<RectMatrix, NsError> {
        if m.dim() != self.ncols {
            return Err(NsError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows,
                self.ncols,
                m.dim(),
                m.dim()
            )));
        }
        let mut out = RectMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            entries: vec![BigInt::ZERO; self.nrows * self.ncols],
        };
        for r in 0..self.nrows {
            for c in 0..self.ncols {
                let mut s = BigInt::ZERO;
                for t in 0..self.ncols {
                    s += self.entry(r, t) * m.entry(t, c);
                }
                out.entries[r * out.ncols + c] = s;
            }
        }
        Ok(out)
    }

    /// `m · self` for a square `m` acting on the target space.
    pub fn mul_left(&self, m: &LatticeMatrix) -> Result<RectMatrix, NsError> {
        if m.dim() != self.nrows {
            return Err(NsError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                m.dim(),
                m.dim(),
                self.nrows,
                self.ncols
            )));
        }
        let mut out = RectMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            entries: vec![BigInt::ZERO; self.nrows * self.ncols],
        };
        for r in 0..self.nrows {
            for c in 0..self.ncols {
                let mut s = BigInt::ZERO;
                for t in 0..self.nrows {
                    s += m.entry(r, t) * self.entry(t, c);
                }
                out.entries[r * out.ncols + c] = s;
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.ncols, "vector length must match column count");
        (0..self.nrows)
            .map(|r| (0..self.ncols).map(|c| self.entry(r, c) * &v[c]).sum())
            .collect()
    }
}

/// The projection from `H^1` (dimension `3k`) onto its quotient by the
/// invariant kernel, with block rows `(q, p_1, p_2) ↦ (q, p_1 - p_2)`.
pub fn h1_quotient_projection(k: usize) -> RectMatrix {
    let mut rows = vec![vec![0i64; 3 * k]; 2 * k];
    for b in 0..k {
        rows[2 * b][3 * b] = 1;
        rows[2 * b + 1][3 * b + 1] = 1;
        rows[2 * b + 1][3 * b + 2] = -1;
    }
    RectMatrix::from_i64_rows(&rows).expect("shape fixed by construction")
}

/// A full quotient representation: the projection `P` plus the induced
/// square matrices `A_i` with `P·S_i = A_i·P` verified exactly.
#[derive(Debug, Clone)]
pub struct QuotientRep {
    pub projection: RectMatrix,
    pub matrices: Vec<LatticeMatrix>,
}

/// Induce the `2k`-dimensional quotient action from a configuration's `H^1`
/// involutions.
///
/// The quotient matrix is computed through the section `(q, w) ↦ (q, w, 0)`
/// and then certified by the exact identity `P·S_i = A_i·P`; since `A_i` is
/// unique once the kernel is invariant, failure of the identity means the
/// kernel was not invariant and is reported as
/// [`NsError::IntertwiningFailure`].
pub fn quotient_rep(cfg: &ConfigDescriptor) -> Result<QuotientRep, NsError> {
    let k = cfg.k;
    let projection = h1_quotient_projection(k);
    let mut matrices = Vec::with_capacity(k);
    for i in 1..=k {
        let s = h1_matrix_from_configuration(cfg, i)?;
        // section: quotient basis vector b maps to a preferred preimage
        let mut rows = vec![vec![BigInt::ZERO; 2 * k]; 2 * k];
        for b in 0..2 * k {
            // preimage of quotient basis vector b under the section
            let mut pre = vec![BigInt::ZERO; 3 * k];
            let block = b / 2;
            if b % 2 == 0 {
                pre[3 * block] = BigInt::from(1);
            } else {
                pre[3 * block + 1] = BigInt::from(1);
            }
            let img = projection.apply(&s.apply(&pre));
            for (r, val) in img.into_iter().enumerate() {
                rows[r][b] = val;
            }
        }
        let a = LatticeMatrix::from_rows(rows)?;
        let ps = projection.mul_right(&s)?;
        let ap = projection.mul_left(&a)?;
        if ps != ap {
            return Err(NsError::IntertwiningFailure(format!(
                "kernel is not invariant under involution {i}"
            )));
        }
        matrices.push(a);
    }
    Ok(QuotientRep { projection, matrices })
}

// ---------------------------------------------------------------------------
// Words, classification, entropy
// ---------------------------------------------------------------------------

/// A word in the involution generators, letters 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    letters: Vec<usize>,
}

impl Word {
    pub fn new(letters: Vec<usize>) -> Result<Self, NsError> {
        if letters.iter().any(|&l| l == 0) {
            return Err(NsError::BadIndex("word letters are 1-based".into()));
        }
        Ok(Self { letters })
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// No two adjacent letters equal (each generator is an involution).
    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|w| w[0] != w[1])
    }

    /// Cancel adjacent equal letters until reduced.
    pub fn reduced(&self) -> Word {
        let mut stack: Vec<usize> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if stack.last() == Some(&l) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word { letters: stack }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl FromStr for Word {
    type Err = NsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut letters = Vec::new();
        for tok in s.split(|c: char| c.is_whitespace() || c == ',' || c == '.') {
            if tok.is_empty() {
                continue;
            }
            let l: usize = tok
                .parse()
                .map_err(|_| NsError::BadIndex(format!("bad word letter {tok:?}")))?;
            letters.push(l);
        }
        Word::new(letters)
    }
}

/// Matrix of a word: product of the generator matrices in reading order
/// (the empty word gives the identity).
pub fn word_matrix(gens: &[LatticeMatrix], w: &Word) -> Result<LatticeMatrix, NsError> {
    if gens.is_empty() {
        return Err(NsError::BadIndex("need at least one generator".into()));
    }
    let dim = gens[0].dim();
    if gens.iter().any(|g| g.dim() != dim) {
        return Err(NsError::Dimension("generators have mixed dimensions".into()));
    }
    let mut m = LatticeMatrix::identity(dim);
    for &l in w.letters() {
        let g = gens
            .get(l - 1)
            .ok_or_else(|| NsError::BadIndex(format!("letter {l} exceeds generator count")))?;
        m = m.mul(g)?;
    }
    Ok(m)
}

/// Classify the isometry given by a word: elliptic (finite order), parabolic
/// (infinite order, spectral radius 1), or loxodromic (leading eigenvalue a
/// Salem or quadratic unit `λ > 1`).
pub fn classify_word(gens: &[LatticeMatrix], w: &Word) -> Result<Classification, NsError> {
    let m = word_matrix(gens, w)?;
    Ok(classify_isometry(&m, ORDER_BOUND)?)
}

/// Topological entropy of the word's action: `log λ` for loxodromic words,
/// `0` otherwise.
pub fn entropy(gens: &[LatticeMatrix], w: &Word) -> Result<f64, NsError> {
    let c = classify_word(gens, w)?;
    Ok(if c.lambda > 1.0 { c.lambda.ln() } else { 0.0 })
}

// ---------------------------------------------------------------------------
// Degree counting
// ---------------------------------------------------------------------------

/// Result of enumerating all reduced words up to a length bound and
/// tabulating the degree-counting function.
#[derive(Debug, Clone, Serialize)]
pub struct DegreeCount {
    /// Length bound used for the enumeration.
    pub l_max: usize,
    /// Number of reduced words enumerated (identity included).
    pub word_count: u64,
    /// Number of distinct matrices among them.
    pub distinct_count: u64,
    /// Cumulative counting function: `(R, #{distinct f with deg f ≤ R})`
    /// at each distinct degree value, ascending.
    pub degrees: Vec<(i128, u64)>,
    /// Least-squares slope of `log N` against `log R` over the stable
    /// window, when one exists.
    pub slope: Option<f64>,
    /// The `[R_lo, R_hi]` window used for the regression.
    pub slope_window: Option<(i128, i128)>,
}

/// Fixed-width integer matrix used in the enumeration fast path.
#[derive(Clone)]
struct DenseI128 {
    n: usize,
    e: Vec<i128>,
}

impl DenseI128 {
    fn from_lattice(m: &LatticeMatrix) -> Result<Self, NsError> {
        let n = m.dim();
        let mut e = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let v = m.entry(r, c).to_i128().ok_or_else(|| {
                    NsError::Overflow("matrix entry exceeds 128 bits".into())
                })?;
                e.push(v);
            }
        }
        Ok(Self { n, e })
    }

    fn mul(&self, other: &DenseI128) -> Result<DenseI128, NsError> {
        let n = self.n;
        let mut out = vec![0i128; n * n];
        for r in 0..n {
            for c in 0..n {
                let mut s: i128 = 0;
                for t in 0..n {
                    let p = self.e[r * n + t]
                        .checked_mul(other.e[t * n + c])
                        .ok_or_else(|| NsError::Overflow("word product overflows".into()))?;
                    s = s
                        .checked_add(p)
                        .ok_or_else(|| NsError::Overflow("word product overflows".into()))?;
                }
                out[r * n + c] = s;
            }
        }
        Ok(DenseI128 { n, e: out })
    }

    fn apply(&self, v: &[i128]) -> Result<Vec<i128>, NsError> {
        let n = self.n;
        let mut out = vec![0i128; n];
        for r in 0..n {
            let mut s: i128 = 0;
            for c in 0..n {
                let p = self.e[r * n + c]
                    .checked_mul(v[c])
                    .ok_or_else(|| NsError::Overflow("degree evaluation overflows".into()))?;
                s = s
                    .checked_add(p)
                    .ok_or_else(|| NsError::Overflow("degree evaluation overflows".into()))?;
            }
            out[r] = s;
        }
        Ok(out)
    }

    /// 128-bit FNV-1a over the entries; used only to deduplicate matrices.
    fn fingerprint(&self) -> u128 {
        const OFFSET: u128 = 0x6c62272e07bb014262b821756295c58d;
        const PRIME: u128 = 0x0000000001000000000000000000013B;
        let mut h = OFFSET;
        for v in &self.e {
            for b in v.to_le_bytes() {
                h ^= b as u128;
                h = h.wrapping_mul(PRIME);
            }
        }
        h
    }
}

fn degree_of(
    m: &DenseI128,
    gram_diag_sign: &[i128],
    h: &[i128],
) -> Result<i128, NsError> {
    let w = m.apply(h)?;
    let mut d: i128 = 0;
    for r in 0..h.len() {
        let p = h[r]
            .checked_mul(gram_diag_sign[r].checked_mul(w[r]).ok_or_else(|| {
                NsError::Overflow("degree evaluation overflows".into())
            })?)
            .ok_or_else(|| NsError::Overflow("degree evaluation overflows".into()))?;
        d = d
            .checked_add(p)
            .ok_or_else(|| NsError::Overflow("degree evaluation overflows".into()))?;
    }
    Ok(d)
}

/// One enumerated word's payload: matrix fingerprint, degree, word length.
type WordRecord = (u128, i128, usize);

fn extend_serial(
    gens: &[DenseI128],
    gram: &[i128],
    h: &[i128],
    cur: &DenseI128,
    last: usize,
    depth: usize,
    l_max: usize,
    out: &mut Vec<WordRecord>,
) -> Result<(), NsError> {
    for (gi, g) in gens.iter().enumerate() {
        if gi + 1 == last {
            continue;
        }
        let next = cur.mul(g)?;
        out.push((next.fingerprint(), degree_of(&next, gram, h)?, depth + 1));
        if depth + 1 < l_max {
            extend_serial(gens, gram, h, &next, gi + 1, depth + 1, l_max, out)?;
        }
    }
    Ok(())
}

/// Number of reduced words of length `0..=l_max` over `k` involution
/// generators, saturating.
fn reduced_word_total(k: usize, l_max: usize) -> u128 {
    let mut total: u128 = 1;
    let mut at_len: u128 = k as u128;
    for _ in 1..=l_max {
        total = total.saturating_add(at_len);
        at_len = at_len.saturating_mul((k - 1).max(1) as u128);
    }
    total
}

/// Enumerate all reduced words of length at most `l_max`, compute the degree
/// `deg f = ⟨h, f^* h⟩` of each, deduplicate by matrix value, and tabulate
/// the counting function `N(R) = #{f : deg f ≤ R}` together with a
/// least-squares slope of `log N` vs `log R` over the stable window
/// (small degrees with `N ≥ 20` excluded below, degrees only reachable near
/// the length horizon excluded above). `r_max` truncates the reported table
/// (and the regression window) at a degree ceiling.
///
/// The enumeration runs in parallel over two-letter word prefixes; the merge
/// is a commutative set union, so the result is deterministic.
pub fn count_degrees(
    gens: &[LatticeMatrix],
    gram: &LatticeMatrix,
    h: &[BigInt],
    r_max: Option<i128>,
    l_max: usize,
    budget: u64,
) -> Result<DegreeCount, NsError> {
    if gens.is_empty() {
        return Err(NsError::BadIndex("need at least one generator".into()));
    }
    let dim = gens[0].dim();
    if gens.iter().any(|g| g.dim() != dim) || gram.dim() != dim || h.len() != dim {
        return Err(NsError::Dimension(
            "generators, Gram form and polarization must share one dimension".into(),
        ));
    }
    let k = gens.len();
    let total = reduced_word_total(k, l_max);
    if total > budget as u128 {
        return Err(NsError::Budget(format!(
            "enumerating {total} reduced words exceeds the budget of {budget}"
        )));
    }
    // gram must be diagonal ±1 for the fast path; fall back to a dense
    // symmetric form otherwise
    let mut gram_diag = Vec::with_capacity(dim);
    let mut diagonal = true;
    for r in 0..dim {
        for c in 0..dim {
            let v = gram
                .entry(r, c)
                .to_i128()
                .ok_or_else(|| NsError::Overflow("Gram entry exceeds 128 bits".into()))?;
            if r == c {
                gram_diag.push(v);
            } else if v != 0 {
                diagonal = false;
            }
        }
    }
    if !diagonal {
        return Err(NsError::Dimension(
            "degree counting expects a diagonal intersection form".into(),
        ));
    }
    let dense_gens: Vec<DenseI128> = gens
        .iter()
        .map(DenseI128::from_lattice)
        .collect::<Result<_, _>>()?;
    let hv: Vec<i128> = h
        .iter()
        .map(|x| {
            x.to_i128()
                .ok_or_else(|| NsError::Overflow("polarization entry exceeds 128 bits".into()))
        })
        .collect::<Result<_, _>>()?;

    let identity = {
        let mut e = vec![0i128; dim * dim];
        for r in 0..dim {
            e[r * dim + r] = 1;
        }
        DenseI128 { n: dim, e }
    };

    let mut records: Vec<WordRecord> = Vec::new();
    records.push((identity.fingerprint(), degree_of(&identity, &gram_diag, &hv)?, 0));

    // seeds: all reduced words of length exactly min(l_max, 2)
    let mut seeds: Vec<(DenseI128, usize, usize)> = Vec::new(); // (matrix, last letter, len)
    if l_max >= 1 {
        for (gi, g) in dense_gens.iter().enumerate() {
            records.push((g.fingerprint(), degree_of(g, &gram_diag, &hv)?, 1));
            if l_max >= 2 {
                for (gj, g2) in dense_gens.iter().enumerate() {
                    if gj == gi {
                        continue;
                    }
                    let m = g.mul(g2)?;
                    records.push((m.fingerprint(), degree_of(&m, &gram_diag, &hv)?, 2));
                    seeds.push((m, gj + 1, 2));
                }
            } else {
                seeds.push((g.clone(), gi + 1, 1));
            }
        }
    }

    let branches: Vec<Result<Vec<WordRecord>, NsError>> = seeds
        .par_iter()
        .map(|(m, last, len)| {
            let mut out = Vec::new();
            if *len < l_max {
                extend_serial(
                    &dense_gens,
                    &gram_diag,
                    &hv,
                    m,
                    *last,
                    *len,
                    l_max,
                    &mut out,
                )?;
            }
            Ok(out)
        })
        .collect();
    for b in branches {
        records.extend(b?);
    }

    let word_count = records.len() as u64;
    // deduplicate by matrix value; keep the minimal word length per matrix
    let mut by_matrix: HashMap<u128, (i128, usize)> = HashMap::with_capacity(records.len());
    for (fp, deg, len) in records {
        by_matrix
            .entry(fp)
            .and_modify(|e| {
                if len < e.1 {
                    e.1 = len;
                }
            })
            .or_insert((deg, len));
    }
    let distinct_count = by_matrix.len() as u64;

    // counting function at each distinct degree value
    let mut hist: BTreeMap<i128, u64> = BTreeMap::new();
    for &(deg, _) in by_matrix.values() {
        *hist.entry(deg).or_insert(0) += 1;
    }
    let mut degrees = Vec::with_capacity(hist.len());
    let mut cum = 0u64;
    for (&r, &c) in &hist {
        cum += c;
        if r_max.map_or(true, |cap| r <= cap) {
            degrees.push((r, cum));
        }
    }

    // stable window: R_lo = first degree with N >= 20; R_hi = largest degree
    // reached by a word short enough not to be truncated by the horizon
    let r_hi = by_matrix
        .values()
        .filter(|(_, len)| *len + 2 <= l_max)
        .map(|&(deg, _)| deg)
        .filter(|&deg| r_max.map_or(true, |cap| deg <= cap))
        .max();
    let r_lo = degrees.iter().find(|&&(_, n)| n >= 20).map(|&(r, _)| r);
    let (slope, slope_window) = match (r_lo, r_hi) {
        (Some(lo), Some(hi)) if hi > lo => {
            let pts: Vec<(f64, f64)> = degrees
                .iter()
                .filter(|&&(r, _)| r >= lo && r <= hi && r > 0)
                .map(|&(r, n)| ((r as f64).ln(), (n as f64).ln()))
                .collect();
            if pts.len() >= 2 {
                let m = pts.len() as f64;
                let sx: f64 = pts.iter().map(|p| p.0).sum();
                let sy: f64 = pts.iter().map(|p| p.1).sum();
                let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
                let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
                let denom = m * sxx - sx * sx;
                if denom.abs() > 1e-12 {
                    (Some((m * sxy - sx * sy) / denom), Some((lo, hi)))
                } else {
                    (None, None)
                }
            } else {
                (None, None)
            }
        }
        _ => (None, None),
    };

    Ok(DegreeCount {
        l_max,
        word_count,
        distinct_count,
        degrees,
        slope,
        slope_window,
    })
}
