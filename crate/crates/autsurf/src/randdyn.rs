//! Monte-Carlo experiments for the random dynamics of the involution groups.
//!
//! The module provides a deterministic, mergeable orbit engine over any
//! system exposing the [`OrbitSystem`] interface (the pentagon folds on the
//! normalized moduli space and the plane Jonquieres involutions both do),
//! plus the derived experiments: empirical invariance statistics, Lyapunov
//! exponents of random matrix products with bootstrap confidence intervals,
//! anchor-drift measurements for the unnormalized folds, the circle
//! extension driven in exact integer angle units, stiffness runs toward the
//! fixed cubic, exhaustive short-word sweeps, and a two-route expansion
//! probe whose fold Jacobians are computed both in closed form and by
//! finite differences.
//!
//! Reproducibility contract: every experiment consumes a single `u64` seed;
//! trial `t` draws from an independent, splittable stream derived from
//! `seed ^ t`, so identical inputs replay bit-identically and concurrent
//! trials merge into the same aggregates in any order.

use crate::blancgeom::{
    distance_to_curve, hypothesis_check, jonquieres_apply, CubicCurve, GeomError, JonquieresMap,
    ProjPoint,
};
use crate::exactlin::LatticeMatrix;
use crate::pentspace::{
    circle_cocycle, fold_normalized, from_surface, geom_fold, reproject_pentagon, sample_pentagon,
    to_pent1, to_surface, FoldLabel, NormalizedPentagon, SpaceError,
};
use crate::pentsurf::{
    fold_sigma, newton_reproject, real_tangent_frame, residue_area_density_via_chart, Lengths,
    PentError, SurfacePoint,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Errors of the Monte-Carlo layer.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum RandError {
    /// Malformed input: bad weights, empty generator lists, invalid grids.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// Two histograms (or aggregates containing them) live on different grids.
    #[error("histogram grids do not match: {0}")]
    GridMismatch(String),
    /// A requested exhaustive computation exceeds its hard budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// An orbit rejected more steps than the configured ceiling allows.
    #[error("rejection ceiling exceeded: {rejected} rejections against a ceiling of {ceiling}")]
    RejectionCeiling {
        /// Rejections counted when the run was abandoned.
        rejected: u64,
        /// The ceiling that was exceeded.
        ceiling: u64,
    },
    /// The genericity hypotheses of a configuration fail.
    #[error("hypothesis check failed: {0}")]
    Hypotheses(String),
    /// A numerical invariant degenerated (vanishing norms, route mismatch).
    #[error("numerical failure: {0}")]
    Numerics(String),
}

impl From<SpaceError> for RandError {
    fn from(e: SpaceError) -> Self {
        RandError::Invalid(e.to_string())
    }
}

impl From<PentError> for RandError {
    fn from(e: PentError) -> Self {
        RandError::Invalid(e.to_string())
    }
}

impl From<GeomError> for RandError {
    fn from(e: GeomError) -> Self {
        RandError::Invalid(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Seedable trial streams
// ---------------------------------------------------------------------------

/// RNG for trial `trial` of an experiment seeded with `seed`: a ChaCha8
/// generator keyed by the seed on the independent stream `seed ^ trial`.
/// Streams never overlap, so concurrent trials stay reproducible.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(seed ^ trial);
    rng
}

// ---------------------------------------------------------------------------
// Generator distributions
// ---------------------------------------------------------------------------

#[derive(Clone, Serialize, Deserialize)]
struct DistributionRepr {
    labels: Vec<String>,
    weights: Vec<f64>,
}

/// A probability distribution over a finite generator set.
///
/// Weights are strictly positive and normalized to sum to one at
/// construction; sampling walks the cumulative table. Whether the support
/// actually generates the intended group is the caller's contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub struct GeneratorDistribution {
    labels: Vec<String>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl From<GeneratorDistribution> for DistributionRepr {
    fn from(d: GeneratorDistribution) -> Self {
        DistributionRepr { labels: d.labels, weights: d.weights }
    }
}

impl TryFrom<DistributionRepr> for GeneratorDistribution {
    type Error = RandError;
    fn try_from(r: DistributionRepr) -> Result<Self, RandError> {
        GeneratorDistribution::new(r.labels, r.weights)
    }
}

impl GeneratorDistribution {
    /// Builds a distribution from labels and positive weights; the weights
    /// are normalized to sum to one.
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self, RandError> {
        if labels.is_empty() {
            return Err(RandError::Invalid("a distribution needs at least one generator".into()));
        }
        if labels.len() != weights.len() {
            return Err(RandError::Invalid(format!(
                "{} labels against {} weights",
                labels.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(RandError::Invalid("weights must be finite and strictly positive".into()));
        }
        let sum: f64 = weights.iter().sum();
        let weights: Vec<f64> = weights.iter().map(|w| w / sum).collect();
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        // the last block absorbs all rounding slack
        *cumulative.last_mut().expect("nonempty") = f64::INFINITY;
        Ok(Self { labels, weights, cumulative })
    }

    /// The uniform distribution over the given labels.
    pub fn uniform(labels: Vec<String>) -> Result<Self, RandError> {
        let n = labels.len();
        Self::new(labels, vec![1.0; n])
    }

    /// Number of generators.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Whether the distribution is empty (never true for a constructed one).
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The generator labels.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Label of generator `i`.
    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    /// The normalized weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Normalized weight of generator `i`.
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Samples a generator index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cumulative.partition_point(|&c| c <= u)
    }
}

/// The uniform distribution whose labels are the display names of the given
/// fold labels.
pub fn fold_labels_distribution(gens: &[FoldLabel]) -> Result<GeneratorDistribution, RandError> {
    GeneratorDistribution::uniform(gens.iter().map(|g| g.to_string()).collect())
}

// ---------------------------------------------------------------------------
// Histograms
// ---------------------------------------------------------------------------

/// How a chart's coordinates identify points at the grid boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridGeometry {
    /// Values outside the declared ranges are counted as out of range.
    Rectangle,
    /// Both axes wrap modulo the declared ranges.
    Torus,
}

/// Bins with fewer recorded counts than this are pooled into a single
/// super-bin before total-variation comparisons.
pub const POOL_CUTOFF: u64 = 5;

/// A mergeable two-dimensional counting grid over a named chart.
///
/// Bins are row-major (`iy * bins_x + ix`). Merging requires bitwise equal
/// grid declarations; counts are exact integers, so merges commute and
/// associate exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    chart: String,
    geometry: GridGeometry,
    bins_x: usize,
    bins_y: usize,
    x_range: (f64, f64),
    y_range: (f64, f64),
    counts: Vec<u64>,
    total: u64,
    out_of_range: u64,
}

impl Histogram {
    /// Square grid with `bins` bins per axis.
    pub fn new(
        chart: &str,
        geometry: GridGeometry,
        bins: usize,
        x_range: (f64, f64),
        y_range: (f64, f64),
    ) -> Result<Self, RandError> {
        Self::with_shape(chart, geometry, bins, bins, x_range, y_range)
    }

    /// General grid with independent bin counts per axis.
    pub fn with_shape(
        chart: &str,
        geometry: GridGeometry,
        bins_x: usize,
        bins_y: usize,
        x_range: (f64, f64),
        y_range: (f64, f64),
    ) -> Result<Self, RandError> {
        if bins_x == 0 || bins_y == 0 {
            return Err(RandError::Invalid("bin counts must be positive".into()));
        }
        for (lo, hi) in [x_range, y_range] {
            if !lo.is_finite() || !hi.is_finite() || hi <= lo {
                return Err(RandError::Invalid(format!("degenerate range ({lo}, {hi})")));
            }
        }
        Ok(Self {
            chart: chart.to_string(),
            geometry,
            bins_x,
            bins_y,
            x_range,
            y_range,
            counts: vec![0; bins_x * bins_y],
            total: 0,
            out_of_range: 0,
        })
    }

    /// Chart name the grid lives on.
    pub fn chart(&self) -> &str {
        &self.chart
    }

    /// Boundary identification of the chart.
    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    /// Bins along the x axis.
    pub fn bins_x(&self) -> usize {
        self.bins_x
    }

    /// Bins along the y axis.
    pub fn bins_y(&self) -> usize {
        self.bins_y
    }

    /// Declared x range.
    pub fn x_range(&self) -> (f64, f64) {
        self.x_range
    }

    /// Declared y range.
    pub fn y_range(&self) -> (f64, f64) {
        self.y_range
    }

    /// Row-major bin counts.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Total in-range observations.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Observations that fell outside the grid (rectangle geometry only).
    pub fn out_of_range(&self) -> u64 {
        self.out_of_range
    }

    fn axis_bin(geometry: GridGeometry, v: f64, range: (f64, f64), bins: usize) -> Option<usize> {
        if !v.is_finite() {
            return None;
        }
        let (lo, hi) = range;
        let width = hi - lo;
        let t = match geometry {
            GridGeometry::Rectangle => {
                if v < lo || v > hi {
                    return None;
                }
                v - lo
            }
            GridGeometry::Torus => (v - lo).rem_euclid(width),
        };
        let raw = (t / width * bins as f64).floor();
        Some((raw as usize).min(bins - 1))
    }

    /// Bin index of a point, if it falls on the grid.
    pub fn bin_of(&self, x: f64, y: f64) -> Option<usize> {
        let ix = Self::axis_bin(self.geometry, x, self.x_range, self.bins_x)?;
        let iy = Self::axis_bin(self.geometry, y, self.y_range, self.bins_y)?;
        Some(iy * self.bins_x + ix)
    }

    /// Records an observation; off-grid points count as out of range.
    pub fn record(&mut self, x: f64, y: f64) {
        match self.bin_of(x, y) {
            Some(b) => {
                self.counts[b] += 1;
                self.total += 1;
            }
            None => self.out_of_range += 1,
        }
    }

    /// Records directly into bin `(ix, iy)`.
    pub fn record_bin(&mut self, ix: usize, iy: usize) {
        assert!(ix < self.bins_x && iy < self.bins_y, "bin index out of bounds");
        self.counts[iy * self.bins_x + ix] += 1;
        self.total += 1;
    }

    /// Whether two histograms share the exact same grid declaration.
    pub fn same_grid(&self, other: &Histogram) -> bool {
        self.chart == other.chart
            && self.geometry == other.geometry
            && self.bins_x == other.bins_x
            && self.bins_y == other.bins_y
            && self.x_range == other.x_range
            && self.y_range == other.y_range
    }

    fn require_same_grid(&self, other: &Histogram) -> Result<(), RandError> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(RandError::GridMismatch(format!(
                "{} {:?} {}x{} vs {} {:?} {}x{}",
                self.chart,
                self.geometry,
                self.bins_x,
                self.bins_y,
                other.chart,
                other.geometry,
                other.bins_x,
                other.bins_y
            )))
        }
    }

    /// Pointwise sum of two histograms on the same grid.
    pub fn merge(&self, other: &Histogram) -> Result<Histogram, RandError> {
        self.require_same_grid(other)?;
        let mut out = self.clone();
        for (c, &o) in out.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        out.total += other.total;
        out.out_of_range += other.out_of_range;
        Ok(out)
    }

    /// Total-variation distance between the two empirical measures.
    ///
    /// Bins where both sides hold fewer than [`POOL_CUTOFF`] counts are
    /// pooled into one super-bin before comparison, so sparsely sampled
    /// tails do not inflate the distance.
    pub fn total_variation(&self, other: &Histogram) -> Result<f64, RandError> {
        self.require_same_grid(other)?;
        if self.total == 0 || other.total == 0 {
            return Err(RandError::Invalid("total variation needs nonempty histograms".into()));
        }
        let na = self.total as f64;
        let nb = other.total as f64;
        let mut tv = 0.0;
        let (mut pool_a, mut pool_b) = (0u64, 0u64);
        for (&a, &b) in self.counts.iter().zip(&other.counts) {
            if a >= POOL_CUTOFF || b >= POOL_CUTOFF {
                tv += (a as f64 / na - b as f64 / nb).abs();
            } else {
                pool_a += a;
                pool_b += b;
            }
        }
        tv += (pool_a as f64 / na - pool_b as f64 / nb).abs();
        Ok(tv / 2.0)
    }

    /// Total-variation distance to the uniform distribution on the grid.
    ///
    /// When the expected count per bin is below [`POOL_CUTOFF`], bins under
    /// the cutoff are pooled and compared against their pooled uniform mass.
    pub fn tv_to_uniform(&self) -> Result<f64, RandError> {
        if self.total == 0 {
            return Err(RandError::Invalid("total variation needs a nonempty histogram".into()));
        }
        let n = self.total as f64;
        let bins = self.counts.len() as f64;
        let u = 1.0 / bins;
        let keep_all = n / bins >= POOL_CUTOFF as f64;
        let mut tv = 0.0;
        let mut pool_count = 0u64;
        let mut pool_bins = 0u64;
        for &c in &self.counts {
            if keep_all || c >= POOL_CUTOFF {
                tv += (c as f64 / n - u).abs();
            } else {
                pool_count += c;
                pool_bins += 1;
            }
        }
        tv += (pool_count as f64 / n - pool_bins as f64 * u).abs();
        Ok(tv / 2.0)
    }
}

/// Per-generator total-variation distances between a base histogram and the
/// corresponding pushforward histograms.
pub fn invariance_statistic(
    base: &Histogram,
    pushforwards: &[Histogram],
) -> Result<Vec<f64>, RandError> {
    pushforwards.iter().map(|p| base.total_variation(p)).collect()
}

// ---------------------------------------------------------------------------
// Cocycle accumulator
// ---------------------------------------------------------------------------

/// Streaming accumulator for an orbit-driven cocycle: log-norm gains, a ring
/// buffer of recent positions, and position snapshots at chosen steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocycleAccumulator {
    ring_capacity: usize,
    snapshot_steps: Vec<u64>,
    ring: VecDeque<[f64; 2]>,
    snapshots: Vec<(u64, [f64; 2])>,
    steps: u64,
    renorms: u64,
    log_norm_sum: f64,
}

impl CocycleAccumulator {
    /// New accumulator keeping the last `ring_capacity` positions and
    /// snapshotting at the given step counts.
    pub fn new(ring_capacity: usize, mut snapshot_steps: Vec<u64>) -> Self {
        snapshot_steps.sort_unstable();
        snapshot_steps.dedup();
        Self {
            ring_capacity,
            snapshot_steps,
            ring: VecDeque::with_capacity(ring_capacity),
            snapshots: Vec::new(),
            steps: 0,
            renorms: 0,
            log_norm_sum: 0.0,
        }
    }

    /// Records the position after one step.
    pub fn record_position(&mut self, p: [f64; 2]) {
        self.steps += 1;
        if self.ring_capacity > 0 {
            if self.ring.len() == self.ring_capacity {
                self.ring.pop_front();
            }
            self.ring.push_back(p);
        }
        if self.snapshot_steps.binary_search(&self.steps).is_ok() {
            self.snapshots.push((self.steps, p));
        }
    }

    /// Adds one renormalization's log-norm gain.
    pub fn record_log_norm(&mut self, v: f64) {
        self.renorms += 1;
        self.log_norm_sum += v;
    }

    /// Steps recorded so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Renormalizations recorded so far.
    pub fn renorms(&self) -> u64 {
        self.renorms
    }

    /// Sum of recorded log-norm gains.
    pub fn log_norm_sum(&self) -> f64 {
        self.log_norm_sum
    }

    /// Exponent estimate `log_norm_sum / steps` (zero before any step).
    pub fn lambda_hat(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.log_norm_sum / self.steps as f64
        }
    }

    /// The retained recent positions, oldest first.
    pub fn recent(&self) -> Vec<[f64; 2]> {
        self.ring.iter().copied().collect()
    }

    /// Snapshots `(step, position)` in increasing step order.
    pub fn snapshots(&self) -> &[(u64, [f64; 2])] {
        &self.snapshots
    }
}

// ---------------------------------------------------------------------------
// Orbit systems
// ---------------------------------------------------------------------------

/// Failure of one generator application.
#[derive(Debug)]
pub enum StepError {
    /// The generator is undefined at this point (indeterminacy, base locus,
    /// degenerate axis); the orbit stays and the step counts as rejected.
    Reject,
    /// The run cannot continue.
    Fatal(RandError),
}

/// A state space with a finite generator set, observation charts, and
/// optional conserved residuals — everything [`run_orbit`] needs.
pub trait OrbitSystem {
    /// Orbit state.
    type Point: Clone;

    /// Number of generators.
    fn generator_count(&self) -> usize;

    /// Display label of generator `g`.
    fn generator_label(&self, g: usize) -> String;

    /// Applies generator `g`.
    fn apply(&self, x: &Self::Point, g: usize) -> Result<Self::Point, StepError>;

    /// Periodic numerical maintenance, called after every accepted step with
    /// the accepted-step count; implementations decide their own cadence.
    fn maintain(&self, _x: &mut Self::Point, _accepted: u64) {}

    /// Fresh, empty observation histograms, one per chart.
    fn charts(&self) -> Vec<Histogram>;

    /// Chart observables of a state, one pair per chart.
    fn observe(&self, x: &Self::Point) -> Vec<(f64, f64)>;

    /// Conserved residual of a state, when the system has one.
    fn residual(&self, _x: &Self::Point) -> Option<f64> {
        None
    }

    /// Per-chart density weights at a state (`None` entries carry none).
    fn chart_weights(&self, _x: &Self::Point) -> Vec<Option<f64>> {
        Vec::new()
    }
}

/// Fixed-point scale for exactly mergeable density-weight sums.
pub const WEIGHT_SCALE: u64 = 1 << 20;
const WEIGHT_CLAMP: f64 = 1e12;

/// Options of a single orbit run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitOptions {
    /// Attempted steps (each records one observation besides the start).
    pub steps: u64,
    /// Seed of the run's random stream.
    pub seed: u64,
    /// Also collect per-generator pushforward histograms.
    pub collect_pushforwards: bool,
    /// Also accumulate per-bin density-weight sums.
    pub collect_weights: bool,
    /// Abort once rejections exceed this many; default `max(100, steps/10)`.
    pub rejection_ceiling: Option<u64>,
}

impl OrbitOptions {
    /// Options with the given step count and seed and all extras off.
    pub fn new(steps: u64, seed: u64) -> Self {
        Self {
            steps,
            seed,
            collect_pushforwards: false,
            collect_weights: false,
            rejection_ceiling: None,
        }
    }

    /// The ceiling actually enforced.
    pub fn effective_ceiling(&self) -> u64 {
        self.rejection_ceiling.unwrap_or_else(|| (self.steps / 10).max(100))
    }
}

/// Aggregates of one orbit run (or an exact merge of several).
///
/// All counting fields are integers, so merging is associative and
/// commutative bit-for-bit; per-run diagnostics (residual trace, final
/// observables, seed) are dropped by [`RunStats::merge`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    /// Attempted steps.
    pub steps: u64,
    /// Seed of the run (zero on merged aggregates).
    pub seed: u64,
    /// Rejected steps (the orbit stayed in place).
    pub rejected: u64,
    /// Accepted applications per generator.
    pub generator_counts: Vec<u64>,
    /// Observation histograms, one per chart.
    pub histograms: Vec<Histogram>,
    /// Pushforward histograms indexed `[generator][chart]` (empty unless
    /// collected).
    pub pushforwards: Vec<Vec<Histogram>>,
    /// Fixed-point density-weight sums per chart and bin (empty unless
    /// collected); divide by [`WEIGHT_SCALE`] times the bin count for the
    /// mean density.
    pub weight_sums: Vec<Vec<u64>>,
    /// Largest conserved residual seen along the orbit.
    pub residual_max: f64,
    /// Residual samples `(step, residual)` on a 1-2-5 ladder.
    pub residual_trace: Vec<(u64, f64)>,
    /// Observables of the final state, one pair per chart.
    pub final_observables: Vec<(f64, f64)>,
}

impl RunStats {
    /// Exact pointwise merge of two runs over the same system configuration.
    pub fn merge(&self, other: &RunStats) -> Result<RunStats, RandError> {
        if self.generator_counts.len() != other.generator_counts.len() {
            return Err(RandError::GridMismatch("generator counts differ in length".into()));
        }
        if self.histograms.len() != other.histograms.len() {
            return Err(RandError::GridMismatch("chart counts differ".into()));
        }
        let histograms = self
            .histograms
            .iter()
            .zip(&other.histograms)
            .map(|(a, b)| a.merge(b))
            .collect::<Result<Vec<_>, _>>()?;
        let pushforwards = match (self.pushforwards.is_empty(), other.pushforwards.is_empty()) {
            (true, true) => Vec::new(),
            (false, false) => {
                if self.pushforwards.len() != other.pushforwards.len() {
                    return Err(RandError::GridMismatch("pushforward shapes differ".into()));
                }
                self.pushforwards
                    .iter()
                    .zip(&other.pushforwards)
                    .map(|(pa, pb)| {
                        if pa.len() != pb.len() {
                            return Err(RandError::GridMismatch(
                                "pushforward chart counts differ".into(),
                            ));
                        }
                        pa.iter().zip(pb).map(|(a, b)| a.merge(b)).collect()
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
            _ => {
                return Err(RandError::GridMismatch(
                    "pushforwards were collected on only one side".into(),
                ))
            }
        };
        let weight_sums = match (self.weight_sums.is_empty(), other.weight_sums.is_empty()) {
            (true, true) => Vec::new(),
            (false, false) => {
                if self.weight_sums.len() != other.weight_sums.len()
                    || self
                        .weight_sums
                        .iter()
                        .zip(&other.weight_sums)
                        .any(|(a, b)| a.len() != b.len())
                {
                    return Err(RandError::GridMismatch("weight sum shapes differ".into()));
                }
                self.weight_sums
                    .iter()
                    .zip(&other.weight_sums)
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.saturating_add(*y)).collect())
                    .collect()
            }
            _ => {
                return Err(RandError::GridMismatch(
                    "weights were collected on only one side".into(),
                ))
            }
        };
        Ok(RunStats {
            steps: self.steps + other.steps,
            seed: 0,
            rejected: self.rejected + other.rejected,
            generator_counts: self
                .generator_counts
                .iter()
                .zip(&other.generator_counts)
                .map(|(a, b)| a + b)
                .collect(),
            histograms,
            pushforwards,
            weight_sums,
            residual_max: self.residual_max.max(other.residual_max),
            residual_trace: Vec::new(),
            final_observables: Vec::new(),
        })
    }
}

/// Left fold of [`RunStats::merge`] over a nonempty slice of runs.
pub fn merge_all(runs: &[RunStats]) -> Result<RunStats, RandError> {
    let mut it = runs.iter();
    let first = it.next().ok_or_else(|| RandError::Invalid("nothing to merge".into()))?.clone();
    it.try_fold(first, |acc, r| acc.merge(r))
}

/// Steps `0, 1, 2, 5, 10, 20, 50, ..., n` (a 1-2-5 ladder capped at `n`).
fn checkpoint_ladder(n: u64) -> Vec<u64> {
    let mut cps = vec![0u64];
    let mut base: u64 = 1;
    'outer: loop {
        for m in [1u64, 2, 5] {
            match base.checked_mul(m) {
                Some(v) if v <= n => cps.push(v),
                _ => break 'outer,
            }
        }
        match base.checked_mul(10) {
            Some(b) if b <= n => base = b,
            _ => break,
        }
    }
    cps.push(n);
    cps.sort_unstable();
    cps.dedup();
    cps
}

/// About `count` geometrically spaced integers from `lo` to `hi`, strictly
/// increasing, always ending at `hi`.
fn geometric_checkpoints(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    let lo = lo.max(1);
    if hi <= lo {
        return vec![hi.max(1)];
    }
    let points = count.max(2);
    let ratio = hi as f64 / lo as f64;
    let denom = (points - 1) as f64;
    let mut v: Vec<u64> = (0..points)
        .map(|k| ((lo as f64 * ratio.powf(k as f64 / denom)).round() as u64).clamp(lo, hi))
        .collect();
    v.push(hi);
    v.sort_unstable();
    v.dedup();
    v
}

fn record_state<S: OrbitSystem>(
    sys: &S,
    x: &S::Point,
    histograms: &mut [Histogram],
    pushforwards: &mut [Vec<Histogram>],
    weight_sums: &mut [Vec<u64>],
    collect_weights: bool,
) {
    let obs = sys.observe(x);
    for (h, &(ox, oy)) in histograms.iter_mut().zip(&obs) {
        h.record(ox, oy);
    }
    if collect_weights {
        let ws = sys.chart_weights(x);
        for c in 0..ws.len().min(histograms.len()).min(weight_sums.len()) {
            if let Some(w) = ws[c] {
                if let Some(bin) = histograms[c].bin_of(obs[c].0, obs[c].1) {
                    let fixed = (w.clamp(0.0, WEIGHT_CLAMP) * WEIGHT_SCALE as f64).round() as u64;
                    weight_sums[c][bin] = weight_sums[c][bin].saturating_add(fixed);
                }
            }
        }
    }
    for (g, per_gen) in pushforwards.iter_mut().enumerate() {
        if let Ok(y) = sys.apply(x, g) {
            let oy = sys.observe(&y);
            for (h, &(ox, oyv)) in per_gen.iter_mut().zip(&oy) {
                h.record(ox, oyv);
            }
        }
    }
}

/// Runs one random orbit and returns its exact aggregates.
///
/// The start is recorded first; each of the `steps` attempts then records
/// the state it reaches (the unchanged state, on a rejected step), so the
/// histograms hold `steps + 1` observations per chart. A zero-step run is
/// the delta at the start. Rejections beyond the ceiling abort the run;
/// fatal generator errors propagate.
pub fn run_orbit<S: OrbitSystem>(
    sys: &S,
    x0: &S::Point,
    nu: &GeneratorDistribution,
    opts: &OrbitOptions,
) -> Result<RunStats, RandError> {
    let k = sys.generator_count();
    if k == 0 {
        return Err(RandError::Invalid("system has no generators".into()));
    }
    if nu.len() != k {
        return Err(RandError::Invalid(format!(
            "distribution has {} weights for {} generators",
            nu.len(),
            k
        )));
    }
    let mut histograms = sys.charts();
    if histograms.is_empty() {
        return Err(RandError::Invalid("system declares no charts".into()));
    }
    if sys.observe(x0).len() != histograms.len() {
        return Err(RandError::Invalid("observables do not match the chart count".into()));
    }
    let mut pushforwards: Vec<Vec<Histogram>> = if opts.collect_pushforwards {
        (0..k).map(|_| sys.charts()).collect()
    } else {
        Vec::new()
    };
    let mut weight_sums: Vec<Vec<u64>> = if opts.collect_weights {
        histograms.iter().map(|h| vec![0u64; h.counts().len()]).collect()
    } else {
        Vec::new()
    };
    let ceiling = opts.effective_ceiling();
    let trace_steps = checkpoint_ladder(opts.steps);
    let mut trace_cursor = 0usize;

    let mut rng = trial_rng(opts.seed, 0);
    let mut x = x0.clone();
    let mut generator_counts = vec![0u64; k];
    let mut rejected = 0u64;
    let mut accepted = 0u64;
    let mut residual_max = 0.0f64;
    let mut residual_trace: Vec<(u64, f64)> = Vec::new();

    record_state(sys, &x, &mut histograms, &mut pushforwards, &mut weight_sums, opts.collect_weights);
    if let Some(r) = sys.residual(&x) {
        residual_max = residual_max.max(r);
        if trace_steps[trace_cursor] == 0 {
            residual_trace.push((0, r));
        }
    }
    trace_cursor += 1;

    for step in 1..=opts.steps {
        let g = nu.sample(&mut rng);
        match sys.apply(&x, g) {
            Ok(y) => {
                x = y;
                generator_counts[g] += 1;
                accepted += 1;
                sys.maintain(&mut x, accepted);
            }
            Err(StepError::Reject) => {
                rejected += 1;
                if rejected > ceiling {
                    return Err(RandError::RejectionCeiling { rejected, ceiling });
                }
            }
            Err(StepError::Fatal(e)) => return Err(e),
        }
        record_state(
            sys,
            &x,
            &mut histograms,
            &mut pushforwards,
            &mut weight_sums,
            opts.collect_weights,
        );
        if let Some(r) = sys.residual(&x) {
            residual_max = residual_max.max(r);
            if trace_cursor < trace_steps.len() && trace_steps[trace_cursor] == step {
                residual_trace.push((step, r));
            }
        }
        if trace_cursor < trace_steps.len() && trace_steps[trace_cursor] == step {
            trace_cursor += 1;
        }
    }

    let final_observables = sys.observe(&x);
    Ok(RunStats {
        steps: opts.steps,
        seed: opts.seed,
        rejected,
        generator_counts,
        histograms,
        pushforwards,
        weight_sums,
        residual_max,
        residual_trace,
        final_observables,
    })
}

// ---------------------------------------------------------------------------
// Pentagon system
// ---------------------------------------------------------------------------

/// The normalized pentagon moduli space under a chosen set of folds.
///
/// Charts: the torus of turning angles `(arg t_1, arg t_3)` and the plane of
/// the vertex `a_3`. The closure residual is the conserved quantity; the
/// angle chart carries the invariant-area density as its weight.
#[derive(Debug, Clone)]
pub struct PentagonSystem {
    lengths: Lengths,
    lv: [f64; 5],
    labels: Vec<FoldLabel>,
    bins: usize,
    reproject_every: u64,
}

impl PentagonSystem {
    /// System over the given folds.
    pub fn new(lengths: Lengths, labels: Vec<FoldLabel>) -> Result<Self, RandError> {
        if labels.is_empty() {
            return Err(RandError::Invalid("at least one fold label is required".into()));
        }
        if !lengths.is_admissible() {
            return Err(RandError::Invalid("side lengths are not admissible".into()));
        }
        let lv = lengths.real_values()?;
        Ok(Self { lengths, lv, labels, bins: 50, reproject_every: 1024 })
    }

    /// System over all ten folds.
    pub fn all_folds(lengths: Lengths) -> Result<Self, RandError> {
        Self::new(lengths, FoldLabel::all().to_vec())
    }

    /// Sets the per-axis bin count of both charts.
    pub fn with_bins(mut self, bins: usize) -> Self {
        self.bins = bins;
        self
    }

    /// Sets the accepted-step cadence of Newton reprojection (0 disables).
    pub fn with_reproject_every(mut self, every: u64) -> Self {
        self.reproject_every = every;
        self
    }

    /// The side lengths.
    pub fn lengths(&self) -> &Lengths {
        &self.lengths
    }

    /// The fold labels in generator order.
    pub fn labels(&self) -> &[FoldLabel] {
        &self.labels
    }
}

impl OrbitSystem for PentagonSystem {
    type Point = NormalizedPentagon;

    fn generator_count(&self) -> usize {
        self.labels.len()
    }

    fn generator_label(&self, g: usize) -> String {
        self.labels[g].to_string()
    }

    fn apply(&self, x: &NormalizedPentagon, g: usize) -> Result<NormalizedPentagon, StepError> {
        let (i, j) = self.labels[g].pair();
        match fold_normalized(x, i, j) {
            Ok(y) => Ok(y),
            Err(SpaceError::DegenerateAxis) => Err(StepError::Reject),
            Err(e) => Err(StepError::Fatal(e.into())),
        }
    }

    fn maintain(&self, x: &mut NormalizedPentagon, accepted: u64) {
        if self.reproject_every > 0 && accepted % self.reproject_every == 0 {
            let z = to_surface(x);
            if let Ok(z2) = newton_reproject(&self.lengths, &z) {
                if let Ok(y) = from_surface(&self.lengths, &z2) {
                    *x = y;
                }
            }
        }
    }

    fn charts(&self) -> Vec<Histogram> {
        let s = self.lv[0] + self.lv[1] + self.lv[2];
        vec![
            Histogram::new("angles-t1-t3", GridGeometry::Torus, self.bins, (-PI, PI), (-PI, PI))
                .expect("angle grid is valid"),
            Histogram::new("plane-a3", GridGeometry::Rectangle, self.bins, (-s, s), (-s, s))
                .expect("plane grid is valid"),
        ]
    }

    fn observe(&self, x: &NormalizedPentagon) -> Vec<(f64, f64)> {
        let d = x.directions();
        let a3 = x.vertices()[3];
        vec![(d[1].arg(), d[3].arg()), (a3.re, a3.im)]
    }

    fn residual(&self, x: &NormalizedPentagon) -> Option<f64> {
        Some(x.closure_residual())
    }

    fn chart_weights(&self, x: &NormalizedPentagon) -> Vec<Option<f64>> {
        let z = to_surface(x);
        let w = residue_area_density_via_chart(&self.lengths, &z, (1, 3)).ok();
        vec![w, None]
    }
}

/// Samples a normalized start pentagon from the seed's dedicated stream.
pub fn sample_start(l: &Lengths, seed: u64) -> Result<NormalizedPentagon, RandError> {
    let mut rng = trial_rng(seed, 0);
    let p = sample_pentagon(l, &mut rng)?;
    Ok(to_pent1(&p)?.base)
}

// ---------------------------------------------------------------------------
// Plane involution system
// ---------------------------------------------------------------------------

/// Chart value standing in for points at (or numerically beyond) infinity;
/// kept finite so results stay serializable.
const FAR_COORD: f64 = f64::MAX;

/// The projective plane under Jonquieres involutions centered at base points
/// on a fixed cubic, observed in the affine `(x, y)` chart.
#[derive(Debug, Clone)]
pub struct BlancSystem {
    curve: CubicCurve,
    maps: Vec<JonquieresMap>,
    window: f64,
    bins: usize,
}

impl BlancSystem {
    /// Builds the involutions centered at the given on-curve base points.
    pub fn new(curve: &CubicCurve, qs: &[(f64, f64)]) -> Result<Self, RandError> {
        if qs.is_empty() {
            return Err(RandError::Invalid("at least one base point is required".into()));
        }
        let maps = qs
            .iter()
            .map(|&q| JonquieresMap::new(curve, q))
            .collect::<Result<Vec<_>, GeomError>>()?;
        Ok(Self { curve: curve.clone(), maps, window: 10.0, bins: 50 })
    }

    /// Sets the per-axis bin count of the plane chart.
    pub fn with_bins(mut self, bins: usize) -> Self {
        self.bins = bins;
        self
    }

    /// Sets the half-width of the observed plane window.
    pub fn with_window(mut self, window: f64) -> Self {
        self.window = window;
        self
    }

    /// The fixed cubic.
    pub fn curve(&self) -> &CubicCurve {
        &self.curve
    }

    /// The involutions in generator order.
    pub fn maps(&self) -> &[JonquieresMap] {
        &self.maps
    }
}

impl OrbitSystem for BlancSystem {
    type Point = ProjPoint;

    fn generator_count(&self) -> usize {
        self.maps.len()
    }

    fn generator_label(&self, g: usize) -> String {
        format!("sigma{}", g + 1)
    }

    fn apply(&self, x: &ProjPoint, g: usize) -> Result<ProjPoint, StepError> {
        match jonquieres_apply(&self.maps[g], x) {
            Ok(y) => Ok(y.normalized()),
            Err(GeomError::BaseLocus(_)) | Err(GeomError::TangentLine(_)) => Err(StepError::Reject),
            Err(e) => Err(StepError::Fatal(e.into())),
        }
    }

    fn charts(&self) -> Vec<Histogram> {
        vec![Histogram::new(
            "plane-xy",
            GridGeometry::Rectangle,
            self.bins,
            (-self.window, self.window),
            (-self.window, self.window),
        )
        .expect("plane grid is valid")]
    }

    fn observe(&self, x: &ProjPoint) -> Vec<(f64, f64)> {
        match x.to_affine() {
            Some((a, b)) => vec![(a, b)],
            None => vec![(FAR_COORD, FAR_COORD)],
        }
    }
}

// ---------------------------------------------------------------------------
// Lyapunov exponents of matrix products
// ---------------------------------------------------------------------------

/// Order in which generators are drawn along a product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Schedule {
    /// Independent draws from the generator distribution.
    Random,
    /// The deterministic cyclic schedule `g_0, g_1, ..., g_0, g_1, ...`.
    Cyclic,
}

/// Options of a Lyapunov estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovOptions {
    /// Steps per replica.
    pub steps: u64,
    /// Seed; replica `r` uses trial stream `r`.
    pub seed: u64,
    /// Independent replicas averaged into the estimate.
    pub replicas: usize,
    /// Renormalization cadence in steps.
    pub renorm_every: u64,
    /// Bootstrap resamples for the confidence interval.
    pub resamples: usize,
    /// Two-sided confidence level of the interval.
    pub confidence: f64,
    /// Generator schedule.
    pub schedule: Schedule,
}

impl LyapunovOptions {
    /// Defaults: 16 replicas, renormalize every 8 steps, 2000 bootstrap
    /// resamples at 99% confidence, random schedule.
    pub fn new(steps: u64, seed: u64) -> Self {
        Self {
            steps,
            seed,
            replicas: 16,
            renorm_every: 8,
            resamples: 2000,
            confidence: 0.99,
            schedule: Schedule::Random,
        }
    }
}

/// A top-Lyapunov-exponent estimate with its bootstrap interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    /// Mean exponent over the replicas.
    pub lambda: f64,
    /// Lower bootstrap percentile of the replica mean.
    pub ci_low: f64,
    /// Upper bootstrap percentile of the replica mean.
    pub ci_high: f64,
    /// Confidence level of the interval.
    pub confidence: f64,
    /// Steps per replica.
    pub steps: u64,
    /// Per-replica exponent estimates.
    pub per_replica: Vec<f64>,
}

fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 {
            return v / n;
        }
    }
}

fn bootstrap_ci(
    values: &[f64],
    resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<(f64, f64), RandError> {
    if values.is_empty() {
        return Err(RandError::Invalid("no replicas to bootstrap".into()));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(RandError::Invalid("confidence must be strictly between 0 and 1".into()));
    }
    if values.len() == 1 || resamples == 0 {
        return Ok((values[0], values[0]));
    }
    let mut rng = trial_rng(seed, u64::MAX);
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            let mut s = 0.0;
            for _ in 0..n {
                s += values[rng.random_range(0..n)];
            }
            s / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - confidence) / 2.0;
    let idx = |q: f64| (((means.len() - 1) as f64) * q).round() as usize;
    Ok((means[idx(alpha)], means[idx(1.0 - alpha)]))
}

/// Estimates the top Lyapunov exponent of products of the given matrices.
///
/// Each replica runs an independently seeded vector through `steps`
/// applications (random draws from `nu` or the cyclic schedule), summing
/// renormalization log-norms; the estimate is the replica mean and the
/// interval is a percentile bootstrap over the replica means.
pub fn lyapunov_matrix(
    gens: &[DMatrix<f64>],
    nu: &GeneratorDistribution,
    opts: &LyapunovOptions,
) -> Result<LyapunovEstimate, RandError> {
    if gens.is_empty() {
        return Err(RandError::Invalid("no generator matrices".into()));
    }
    let dim = gens[0].nrows();
    if dim == 0 {
        return Err(RandError::Invalid("zero-dimensional matrices".into()));
    }
    for g in gens {
        if g.nrows() != dim || g.ncols() != dim {
            return Err(RandError::Invalid("generators must be square of equal size".into()));
        }
    }
    if nu.len() != gens.len() {
        return Err(RandError::Invalid(format!(
            "distribution has {} weights for {} matrices",
            nu.len(),
            gens.len()
        )));
    }
    if opts.steps == 0 || opts.replicas == 0 {
        return Err(RandError::Invalid("steps and replicas must be positive".into()));
    }
    let renorm_every = opts.renorm_every.max(1);
    let per_replica: Vec<f64> = (0..opts.replicas as u64)
        .into_par_iter()
        .map(|r| -> Result<f64, RandError> {
            let mut rng = trial_rng(opts.seed, r);
            let mut v = random_unit_vector(dim, &mut rng);
            let mut sum = 0.0f64;
            let mut last_renorm = 0u64;
            for t in 0..opts.steps {
                let g = match opts.schedule {
                    Schedule::Random => nu.sample(&mut rng),
                    Schedule::Cyclic => (t % gens.len() as u64) as usize,
                };
                v = &gens[g] * &v;
                if (t + 1) % renorm_every == 0 {
                    let s = v.norm();
                    if !s.is_finite() || s <= 0.0 {
                        return Err(RandError::Numerics(format!(
                            "vector norm degenerated at step {}",
                            t + 1
                        )));
                    }
                    sum += s.ln();
                    v /= s;
                    last_renorm = t + 1;
                }
            }
            if last_renorm < opts.steps {
                let s = v.norm();
                if !s.is_finite() || s <= 0.0 {
                    return Err(RandError::Numerics("final vector norm degenerated".into()));
                }
                sum += s.ln();
            }
            Ok(sum / opts.steps as f64)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let lambda = per_replica.iter().sum::<f64>() / per_replica.len() as f64;
    let (ci_low, ci_high) = bootstrap_ci(&per_replica, opts.resamples, opts.confidence, opts.seed)?;
    Ok(LyapunovEstimate {
        lambda,
        ci_low,
        ci_high,
        confidence: opts.confidence,
        steps: opts.steps,
        per_replica,
    })
}

/// Dense floating view of an integer lattice matrix.
pub fn lattice_to_dense(m: &LatticeMatrix) -> DMatrix<f64> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |r, c| m.entry(r, c).to_f64().unwrap_or(f64::NAN))
}

// ---------------------------------------------------------------------------
// Anchor drift
// ---------------------------------------------------------------------------

/// Options of the anchor-drift experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftOptions {
    /// Fold steps per trial.
    pub steps: u64,
    /// Independent trials.
    pub trials: u64,
    /// Seed; trial `t` uses trial stream `t`.
    pub seed: u64,
    /// Accepted-step cadence of side-length reprojection (0 disables).
    pub reproject_every: u64,
    /// Approximate number of geometric checkpoints per trial.
    pub checkpoint_count: usize,
}

impl DriftOptions {
    /// Defaults: reproject every 1024 accepted steps, 25 checkpoints.
    pub fn new(steps: u64, trials: u64, seed: u64) -> Self {
        Self { steps, trials, seed, reproject_every: 1024, checkpoint_count: 25 }
    }
}

/// Aggregates of the anchor-drift experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftResult {
    /// Fold steps per trial.
    pub steps: u64,
    /// Trials run.
    pub trials: u64,
    /// Sum of the five side lengths (the per-step displacement scale).
    pub side_length_sum: f64,
    /// Mean final anchor displacement per step, `mean |a_0(N)| / N`.
    pub linear_drift: f64,
    /// `linear_drift` divided by the side-length sum.
    pub normalized_drift: f64,
    /// Least-squares slope of `log mean |a_0(n)|` against `log n` over the
    /// checkpoints (absent when no positive displacements exist).
    pub diffusive_exponent: Option<f64>,
    /// Checkpoint steps.
    pub checkpoints: Vec<u64>,
    /// Mean absolute anchor displacement at each checkpoint.
    pub mean_abs: Vec<f64>,
    /// Final absolute displacement of every trial.
    pub trial_final_abs: Vec<f64>,
    /// Anchor displacement path of trial zero, subsampled.
    pub sample_path: Vec<[f64; 2]>,
    /// Rejected steps summed over all trials.
    pub rejected: u64,
}

fn lsq_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 1e-12 {
        return None;
    }
    Some(sxy / sxx)
}

/// Measures how far the tracked vertex `a_0` wanders under random unfolded
/// fold words: ballistic drift would grow linearly, the observed motion is
/// expected diffusive. Trials run concurrently on independent streams.
pub fn drift_experiment(
    l: &Lengths,
    gens: &[FoldLabel],
    nu: &GeneratorDistribution,
    opts: &DriftOptions,
) -> Result<DriftResult, RandError> {
    if gens.is_empty() {
        return Err(RandError::Invalid("at least one fold label is required".into()));
    }
    if nu.len() != gens.len() {
        return Err(RandError::Invalid("distribution size must match the fold labels".into()));
    }
    if opts.steps == 0 || opts.trials == 0 {
        return Err(RandError::Invalid("steps and trials must be positive".into()));
    }
    let lv = l.real_values()?;
    let side_length_sum: f64 = lv.iter().sum();
    let cps = geometric_checkpoints((opts.steps / 100).max(1), opts.steps, opts.checkpoint_count);
    let ceiling = (opts.steps / 10).max(100);

    struct TrialOut {
        final_abs: f64,
        at_cp: Vec<f64>,
        path: Vec<[f64; 2]>,
        rejected: u64,
    }

    let outs: Vec<TrialOut> = (0..opts.trials)
        .into_par_iter()
        .map(|t| -> Result<TrialOut, RandError> {
            let mut rng = trial_rng(opts.seed, t);
            let mut p = sample_pentagon(l, &mut rng)?;
            let start = p.vertices()[0];
            let want_path = t == 0;
            let stride = (opts.steps / 256).max(1);
            let mut path = Vec::new();
            if want_path {
                path.push([0.0, 0.0]);
            }
            let mut at_cp = Vec::with_capacity(cps.len());
            let mut cursor = 0usize;
            let mut rejected = 0u64;
            let mut accepted = 0u64;
            for step in 1..=opts.steps {
                let lab = gens[nu.sample(&mut rng)];
                let (i, j) = lab.pair();
                match geom_fold(&p, i, j) {
                    Ok(next) => {
                        p = next;
                        accepted += 1;
                        if opts.reproject_every > 0 && accepted % opts.reproject_every == 0 {
                            if let Ok(q) = reproject_pentagon(l, &p) {
                                p = q;
                            }
                        }
                    }
                    Err(SpaceError::DegenerateAxis) => {
                        rejected += 1;
                        if rejected > ceiling {
                            return Err(RandError::RejectionCeiling { rejected, ceiling });
                        }
                    }
                    Err(e) => return Err(e.into()),
                }
                let d = p.vertices()[0] - start;
                if want_path && (step % stride == 0 || step == opts.steps) {
                    path.push([d.re, d.im]);
                }
                if cursor < cps.len() && cps[cursor] == step {
                    at_cp.push(d.norm());
                    cursor += 1;
                }
            }
            let final_abs = (p.vertices()[0] - start).norm();
            Ok(TrialOut { final_abs, at_cp, path, rejected })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let trial_final_abs: Vec<f64> = outs.iter().map(|o| o.final_abs).collect();
    let mean_abs: Vec<f64> = (0..cps.len())
        .map(|k| outs.iter().map(|o| o.at_cp[k]).sum::<f64>() / outs.len() as f64)
        .collect();
    let linear_drift =
        trial_final_abs.iter().sum::<f64>() / (opts.trials as f64 * opts.steps as f64);
    let normalized_drift = linear_drift / side_length_sum;
    let fit_pts: Vec<(f64, f64)> = cps
        .iter()
        .zip(&mean_abs)
        .filter(|&(_, &m)| m > 0.0)
        .map(|(&n, &m)| ((n as f64).ln(), m.ln()))
        .collect();
    let diffusive_exponent = lsq_slope(&fit_pts);
    let rejected = outs.iter().map(|o| o.rejected).sum();
    let sample_path = outs.into_iter().next().map(|o| o.path).unwrap_or_default();
    Ok(DriftResult {
        steps: opts.steps,
        trials: opts.trials,
        side_length_sum,
        linear_drift,
        normalized_drift,
        diffusive_exponent,
        checkpoints: cps,
        mean_abs,
        trial_final_abs,
        sample_path,
        rejected,
    })
}

// ---------------------------------------------------------------------------
// Circle extension
// ---------------------------------------------------------------------------

/// Subdivisions of one degree in the exact integer angle scale.
pub const ANGLE_SCALE: u64 = 1 << 54;
/// The full circle in integer angle units (`360 * ANGLE_SCALE`).
pub const ANGLE_MODULUS: u64 = 360 * ANGLE_SCALE;

/// Options of the circle-extension experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleOptions {
    /// Fold steps.
    pub steps: u64,
    /// Seed of the run.
    pub seed: u64,
    /// Circle bins; must divide [`ANGLE_MODULUS`] evenly.
    pub bins: usize,
    /// Starting fiber angle in integer units.
    pub start_units: u64,
    /// Accepted-step cadence of base reprojection (0 disables).
    pub reproject_every: u64,
    /// Abort once rejections exceed this many; default `max(100, steps/10)`.
    pub rejection_ceiling: Option<u64>,
}

impl CircleOptions {
    /// Defaults: 360 bins, fiber starting at angle zero.
    pub fn new(steps: u64, seed: u64) -> Self {
        Self {
            steps,
            seed,
            bins: 360,
            start_units: 0,
            reproject_every: 1024,
            rejection_ceiling: None,
        }
    }
}

/// Aggregates of the circle-extension experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleResult {
    /// Fold steps.
    pub steps: u64,
    /// Circle bins.
    pub bins: usize,
    /// Total-variation distance of the fiber marginal to uniform.
    pub tv_to_uniform: f64,
    /// The fiber-angle histogram (one row of `bins` circle bins).
    pub histogram: Histogram,
    /// Final fiber angle in integer units.
    pub final_units: u64,
    /// Rejected steps.
    pub rejected: u64,
}

fn units_of_angle(a: f64) -> u64 {
    let frac = a.rem_euclid(TAU) / TAU;
    let u = (frac * ANGLE_MODULUS as f64).round() as u64;
    if u >= ANGLE_MODULUS {
        0
    } else {
        u
    }
}

fn add_units(a: u64, b: u64) -> u64 {
    ((a as u128 + b as u128) % ANGLE_MODULUS as u128) as u64
}

/// Runs the circle extension of the fold action in the edge-0 chart.
///
/// The fiber angle lives in exact integer units modulo [`ANGLE_MODULUS`],
/// so rotating the start by a whole number of bins rotates every recorded
/// bin index exactly, and fold words avoiding edge 0 keep the fiber frozen
/// bit-exactly. Each step multiplies the fiber by the fold's unimodular
/// cocycle value evaluated at the pre-fold base point.
pub fn circle_extension_experiment(
    l: &Lengths,
    gens: &[FoldLabel],
    nu: &GeneratorDistribution,
    opts: &CircleOptions,
) -> Result<CircleResult, RandError> {
    if gens.is_empty() {
        return Err(RandError::Invalid("at least one fold label is required".into()));
    }
    if nu.len() != gens.len() {
        return Err(RandError::Invalid("distribution size must match the fold labels".into()));
    }
    if opts.bins == 0 || ANGLE_MODULUS % opts.bins as u64 != 0 {
        return Err(RandError::Invalid(format!(
            "{} bins do not divide the angle modulus evenly",
            opts.bins
        )));
    }
    if opts.start_units >= ANGLE_MODULUS {
        return Err(RandError::Invalid("start angle exceeds the modulus".into()));
    }
    let units_per_bin = ANGLE_MODULUS / opts.bins as u64;
    let mut rng = trial_rng(opts.seed, 0);
    let mut x = to_pent1(&sample_pentagon(l, &mut rng)?)?.base;
    let mut units = opts.start_units;
    let mut hist = Histogram::with_shape(
        "circle-theta0",
        GridGeometry::Torus,
        opts.bins,
        1,
        (0.0, 360.0),
        (0.0, 1.0),
    )?;
    let ceiling = opts.rejection_ceiling.unwrap_or((opts.steps / 10).max(100));
    let mut rejected = 0u64;
    let mut accepted = 0u64;
    hist.record_bin((units / units_per_bin) as usize, 0);
    for _ in 1..=opts.steps {
        let lab = gens[nu.sample(&mut rng)];
        let (i, j) = lab.pair();
        match fold_normalized(&x, i, j) {
            Ok(y) => {
                let h = circle_cocycle(i, j, &x);
                units = add_units(units, units_of_angle(h.arg()));
                x = y;
                accepted += 1;
                if opts.reproject_every > 0 && accepted % opts.reproject_every == 0 {
                    let z = to_surface(&x);
                    if let Ok(z2) = newton_reproject(l, &z) {
                        if let Ok(x2) = from_surface(l, &z2) {
                            x = x2;
                        }
                    }
                }
            }
            Err(SpaceError::DegenerateAxis) => {
                rejected += 1;
                if rejected > ceiling {
                    return Err(RandError::RejectionCeiling { rejected, ceiling });
                }
            }
            Err(e) => return Err(e.into()),
        }
        hist.record_bin((units / units_per_bin) as usize, 0);
    }
    let tv_to_uniform = hist.tv_to_uniform()?;
    Ok(CircleResult {
        steps: opts.steps,
        bins: opts.bins,
        tv_to_uniform,
        histogram: hist,
        final_units: units,
        rejected,
    })
}

// ---------------------------------------------------------------------------
// Stiffness runs
// ---------------------------------------------------------------------------

/// Sentinel distance for states at (or numerically beyond) infinity; kept
/// finite so aggregates stay serializable.
pub const DIST_FAR: f64 = 1e30;

/// How stiffness starting points are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StartMode {
    /// The given affine points.
    Explicit(Vec<[f64; 2]>),
    /// This many uniform draws from the inflated marked-point box.
    Random(usize),
}

/// Options of the stiffness experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StiffnessOptions {
    /// Steps per start.
    pub steps: u64,
    /// Starting-point selection.
    pub start_mode: StartMode,
    /// Seed; start `s` iterates on trial stream `s`.
    pub seed: u64,
    /// Tube radius as a fraction of the marked-point box diagonal.
    pub epsilon_fraction: f64,
    /// Abort once rejections exceed this many; default `max(100, steps/10)`.
    pub rejection_ceiling: Option<u64>,
}

impl StiffnessOptions {
    /// Defaults: tube radius 5% of the marked-point box diagonal.
    pub fn new(steps: u64, start_mode: StartMode, seed: u64) -> Self {
        Self { steps, start_mode, seed, epsilon_fraction: 0.05, rejection_ceiling: None }
    }
}

/// Orbit record of one stiffness start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    /// The starting affine point.
    pub start: [f64; 2],
    /// Fraction of all recorded states inside the tube.
    pub tube_fraction: f64,
    /// Curve distance of the final state.
    pub final_distance: f64,
    /// Checkpoint steps of the two curves below.
    pub checkpoints: Vec<u64>,
    /// Cesaro-averaged curve distance up to each checkpoint.
    pub cesaro_distance: Vec<f64>,
    /// Cumulative tube fraction up to each checkpoint.
    pub tube_curve: Vec<f64>,
    /// Rejected steps along this orbit.
    pub rejected: u64,
}

/// Aggregates of the stiffness experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StiffnessResult {
    /// Absolute tube radius used.
    pub epsilon: f64,
    /// Diagonal of the marked-point bounding box.
    pub bbox_diagonal: f64,
    /// Whether the run sits outside the proven regime (fewer than four
    /// involutions).
    pub exploratory: bool,
    /// Number of involutions.
    pub involutions: usize,
    /// Steps per start.
    pub steps: u64,
    /// One record per start.
    pub per_start: Vec<StartRecord>,
}

fn curve_distance(curve: &CubicCurve, p: &ProjPoint) -> f64 {
    match p.to_affine() {
        Some((x, y)) if x.abs() < 1e12 && y.abs() < 1e12 => {
            distance_to_curve(curve, (x, y)).min(DIST_FAR)
        }
        _ => DIST_FAR,
    }
}

fn on_curve_or_err(curve: &CubicCurve, qs: &[(f64, f64)]) -> Result<(), RandError> {
    for (idx, &(x, y)) in qs.iter().enumerate() {
        let scale = 1.0f64.max(x.abs().powi(3)).max(y * y);
        if (y * y - curve.g(x)).abs() > 1e-8 * scale {
            return Err(RandError::Hypotheses(format!(
                "base point {} = ({x}, {y}) does not lie on the curve",
                idx + 1
            )));
        }
    }
    Ok(())
}

fn marked_points(qs: &[(f64, f64)], maps: &[JonquieresMap]) -> Vec<[f64; 2]> {
    let mut marked: Vec<[f64; 2]> = qs.iter().map(|&(x, y)| [x, y]).collect();
    for m in maps {
        for t in m.base_points() {
            if t.is_real() {
                marked.push([t.x.re, t.y.re]);
            }
        }
    }
    marked
}

fn bbox(points: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for c in 0..2 {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    (lo, hi)
}

/// Runs random involution orbits and measures trapping near the fixed cubic.
///
/// The genericity hypotheses are checked first and failures abort with
/// [`RandError::Hypotheses`]. The tube radius is `epsilon_fraction` of the
/// diagonal of the bounding box of all real marked points (base points and
/// real tangency points). Starts iterate concurrently on independent
/// streams; rejected steps stay in place.
pub fn stiffness_experiment(
    curve: &CubicCurve,
    qs: &[(f64, f64)],
    nu: &GeneratorDistribution,
    opts: &StiffnessOptions,
) -> Result<StiffnessResult, RandError> {
    if qs.is_empty() {
        return Err(RandError::Invalid("at least one base point is required".into()));
    }
    if nu.len() != qs.len() {
        return Err(RandError::Invalid("distribution size must match the base points".into()));
    }
    if !(opts.epsilon_fraction > 0.0 && opts.epsilon_fraction.is_finite()) {
        return Err(RandError::Invalid("tube fraction must be positive".into()));
    }
    on_curve_or_err(curve, qs)?;
    let report = hypothesis_check(curve, qs);
    if !report.all_hold() {
        return Err(RandError::Hypotheses(report.witnesses.join("; ")));
    }
    let maps = qs
        .iter()
        .map(|&q| JonquieresMap::new(curve, q))
        .collect::<Result<Vec<_>, GeomError>>()?;
    let marked = marked_points(qs, &maps);
    let (lo, hi) = bbox(&marked);
    let bbox_diagonal =
        ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt().max(1e-9);
    let epsilon = opts.epsilon_fraction * bbox_diagonal;
    let starts: Vec<[f64; 2]> = match &opts.start_mode {
        StartMode::Explicit(v) => {
            if v.is_empty() {
                return Err(RandError::Invalid("no explicit starts given".into()));
            }
            v.clone()
        }
        StartMode::Random(n) => {
            if *n == 0 {
                return Err(RandError::Invalid("zero random starts requested".into()));
            }
            let mut rng = trial_rng(opts.seed, u64::MAX - 1);
            let cx = (lo[0] + hi[0]) / 2.0;
            let cy = (lo[1] + hi[1]) / 2.0;
            let ex = 1.5 * (hi[0] - lo[0]) / 2.0 + 1.0;
            let ey = 1.5 * (hi[1] - lo[1]) / 2.0 + 1.0;
            (0..*n)
                .map(|_| [cx + rng.random_range(-ex..ex), cy + rng.random_range(-ey..ey)])
                .collect()
        }
    };
    let cps = checkpoint_ladder(opts.steps);
    let ceiling = opts.rejection_ceiling.unwrap_or((opts.steps / 10).max(100));
    let per_start: Vec<StartRecord> = starts
        .par_iter()
        .enumerate()
        .map(|(s_idx, &start)| -> Result<StartRecord, RandError> {
            let mut rng = trial_rng(opts.seed, s_idx as u64);
            let mut p = ProjPoint::from_affine(start[0], start[1]);
            let mut d = curve_distance(curve, &p);
            let mut states = 1u64;
            let mut dist_sum = d;
            let mut in_tube = u64::from(d <= epsilon);
            let mut cesaro = Vec::with_capacity(cps.len());
            let mut tube_curve = Vec::with_capacity(cps.len());
            let mut cursor = 0usize;
            if cps[cursor] == 0 {
                cesaro.push(dist_sum / states as f64);
                tube_curve.push(in_tube as f64 / states as f64);
                cursor += 1;
            }
            let mut rejected = 0u64;
            for step in 1..=opts.steps {
                let g = nu.sample(&mut rng);
                match jonquieres_apply(&maps[g], &p) {
                    Ok(q) => {
                        p = q.normalized();
                        d = curve_distance(curve, &p);
                    }
                    Err(GeomError::BaseLocus(_)) | Err(GeomError::TangentLine(_)) => {
                        rejected += 1;
                        if rejected > ceiling {
                            return Err(RandError::RejectionCeiling { rejected, ceiling });
                        }
                    }
                    Err(e) => return Err(e.into()),
                }
                states += 1;
                dist_sum += d;
                if d <= epsilon {
                    in_tube += 1;
                }
                if cursor < cps.len() && cps[cursor] == step {
                    cesaro.push(dist_sum / states as f64);
                    tube_curve.push(in_tube as f64 / states as f64);
                    cursor += 1;
                }
            }
            Ok(StartRecord {
                start,
                tube_fraction: in_tube as f64 / states as f64,
                final_distance: d,
                checkpoints: cps.clone(),
                cesaro_distance: cesaro,
                tube_curve,
                rejected,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StiffnessResult {
        epsilon,
        bbox_diagonal,
        exploratory: qs.len() < 4,
        involutions: qs.len(),
        steps: opts.steps,
        per_start,
    })
}

// ---------------------------------------------------------------------------
// Exhaustive short-word sweeps
// ---------------------------------------------------------------------------

/// Hard cap on the number of reduced words a sweep may enumerate.
pub const SWEEP_BUDGET: u64 = 200_000;

/// Options of the short-word sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Exact reduced word length enumerated.
    pub max_len: usize,
    /// Bins per axis of the endpoint histogram.
    pub bins: usize,
    /// Tube radius as a fraction of the marked-point box diagonal.
    pub epsilon_fraction: f64,
    /// Half-width of the endpoint window.
    pub window: f64,
}

impl SweepOptions {
    /// Defaults: 40 bins over the window of half-width 10, 5% tube.
    pub fn new(max_len: usize) -> Self {
        Self { max_len, bins: 40, epsilon_fraction: 0.05, window: 10.0 }
    }
}

/// Aggregates of the short-word sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepProbe {
    /// Endpoints reached (all reduced words minus pruned branches).
    pub endpoints: u64,
    /// Branches pruned at an undefined application.
    pub pruned: u64,
    /// Occupied bins of the endpoint histogram.
    pub occupied_bins: usize,
    /// Largest absolute affine coordinate over all finite endpoints.
    pub max_abs_coordinate: f64,
    /// Fraction of endpoints inside the curve tube.
    pub endpoint_tube_fraction: f64,
    /// The endpoint histogram.
    pub histogram: Histogram,
}

#[allow(clippy::too_many_arguments)]
fn sweep_walk(
    maps: &[JonquieresMap],
    curve: &CubicCurve,
    p: &ProjPoint,
    depth: usize,
    last: Option<usize>,
    max_len: usize,
    epsilon: f64,
    hist: &mut Histogram,
    endpoints: &mut u64,
    pruned: &mut u64,
    max_abs: &mut f64,
    in_tube: &mut u64,
) {
    if depth == max_len {
        *endpoints += 1;
        match p.to_affine() {
            Some((x, y)) if x.is_finite() && y.is_finite() => {
                *max_abs = max_abs.max(x.abs()).max(y.abs());
                hist.record(x, y);
                if distance_to_curve(curve, (x, y)) <= epsilon {
                    *in_tube += 1;
                }
            }
            _ => hist.record(FAR_COORD, FAR_COORD),
        }
        return;
    }
    for g in 0..maps.len() {
        if Some(g) == last {
            continue;
        }
        match jonquieres_apply(&maps[g], p) {
            Ok(q) => sweep_walk(
                maps,
                curve,
                &q.normalized(),
                depth + 1,
                Some(g),
                max_len,
                epsilon,
                hist,
                endpoints,
                pruned,
                max_abs,
                in_tube,
            ),
            Err(_) => *pruned += 1,
        }
    }
}

/// Applies every reduced word of the exact given length to one start point
/// and reports where the images land: a deterministic escape probe
/// complementing the random orbits. Enumerations larger than
/// [`SWEEP_BUDGET`] words are refused.
pub fn short_word_sweep(
    curve: &CubicCurve,
    qs: &[(f64, f64)],
    start: [f64; 2],
    opts: &SweepOptions,
) -> Result<SweepProbe, RandError> {
    if qs.len() < 2 {
        return Err(RandError::Invalid("reduced words need at least two involutions".into()));
    }
    if opts.max_len == 0 {
        return Err(RandError::Invalid("word length must be positive".into()));
    }
    if opts.bins == 0 {
        return Err(RandError::Invalid("bin count must be positive".into()));
    }
    let k = qs.len() as u128;
    let words = k * (k - 1).pow(opts.max_len as u32 - 1);
    if words > SWEEP_BUDGET as u128 {
        return Err(RandError::Budget(format!(
            "{words} reduced words of length {} exceed the budget of {SWEEP_BUDGET}",
            opts.max_len
        )));
    }
    let maps = qs
        .iter()
        .map(|&q| JonquieresMap::new(curve, q))
        .collect::<Result<Vec<_>, GeomError>>()?;
    let marked = marked_points(qs, &maps);
    let (lo, hi) = bbox(&marked);
    let diagonal = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt().max(1e-9);
    let epsilon = opts.epsilon_fraction * diagonal;
    let mut hist = Histogram::new(
        "plane-xy",
        GridGeometry::Rectangle,
        opts.bins,
        (-opts.window, opts.window),
        (-opts.window, opts.window),
    )?;
    let p0 = ProjPoint::from_affine(start[0], start[1]);
    let mut endpoints = 0u64;
    let mut pruned = 0u64;
    let mut max_abs = 0.0f64;
    let mut in_tube = 0u64;
    sweep_walk(
        &maps,
        curve,
        &p0,
        0,
        None,
        opts.max_len,
        epsilon,
        &mut hist,
        &mut endpoints,
        &mut pruned,
        &mut max_abs,
        &mut in_tube,
    );
    let occupied_bins = hist.counts().iter().filter(|&&c| c > 0).count();
    let endpoint_tube_fraction =
        if endpoints > 0 { in_tube as f64 / endpoints as f64 } else { 0.0 };
    Ok(SweepProbe {
        endpoints,
        pruned,
        occupied_bins,
        max_abs_coordinate: max_abs,
        endpoint_tube_fraction,
        histogram: hist,
    })
}

// ---------------------------------------------------------------------------
// Fold Jacobians and the expansion probe
// ---------------------------------------------------------------------------

/// Derivative of a fold on the angle coordinates `(θ_1, ..., θ_4)` of the
/// real torus (chart `θ_0 = 0`), in closed form.
///
/// Writing `S = l_i e^{iθ_i} + l_j e^{iθ_j}` and `a_m = l_m e^{iθ_m} / S`,
/// the fold reflects the two turning angles across `arg S` and, when edge 0
/// is involved, re-rotates the whole frame back into the chart; both cases
/// differentiate to the sparse matrices below. Degenerate axes are refused.
pub fn fold_jacobian(
    lv: &[f64; 5],
    label: FoldLabel,
    x: &NormalizedPentagon,
) -> Result<[[f64; 4]; 4], RandError> {
    let (i, j) = label.pair();
    let d = x.directions();
    let s = lv[i] * d[i] + lv[j] * d[j];
    if s.norm() < 1e-9 * (lv[i] + lv[j]) {
        return Err(RandError::Numerics(format!("fold axis degenerates for {label}")));
    }
    let mut jac = [[0.0f64; 4]; 4];
    for (r, row) in jac.iter_mut().enumerate() {
        row[r] = 1.0;
    }
    if i != 0 && j != 0 {
        let ai = 2.0 * (lv[i] * d[i] / s).re;
        let aj = 2.0 * (lv[j] * d[j] / s).re;
        let (ri, rj) = (i - 1, j - 1);
        jac[ri][ri] = ai - 1.0;
        jac[ri][rj] = aj;
        jac[rj][ri] = ai;
        jac[rj][rj] = aj - 1.0;
    } else {
        let m = i + j;
        let am = 2.0 * (lv[m] * d[m] / s).re;
        let rm = m - 1;
        for (r, row) in jac.iter_mut().enumerate() {
            row[rm] = if r == rm { -1.0 } else { -am };
        }
    }
    Ok(jac)
}

fn wrap_angle(a: f64) -> f64 {
    a - TAU * (a / TAU).round()
}

/// The same fold derivative by central finite differences of the fold map
/// on the surface model, in the same angle coordinates.
pub fn fold_jacobian_fd(
    l: &Lengths,
    label: FoldLabel,
    x: &NormalizedPentagon,
    step: f64,
) -> Result<[[f64; 4]; 4], RandError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(RandError::Invalid("finite-difference step must be positive".into()));
    }
    let (i, j) = label.pair();
    let d = x.directions();
    let theta: [f64; 4] = std::array::from_fn(|k| d[k + 1].arg());
    let eval = |th: &[f64; 4]| -> Result<[f64; 4], RandError> {
        let coords: [C; 5] = [
            C::new(1.0, 0.0),
            C::from_polar(1.0, th[0]),
            C::from_polar(1.0, th[1]),
            C::from_polar(1.0, th[2]),
            C::from_polar(1.0, th[3]),
        ];
        let z = SurfacePoint::new(coords)?;
        let zf = fold_sigma(l, i, j, &z)?;
        let c = zf.coords();
        let c0 = c[0];
        if c0.norm() < 1e-12 {
            return Err(RandError::Numerics("chart coordinate vanished".into()));
        }
        Ok(std::array::from_fn(|k| (c[k + 1] / c0).arg()))
    };
    let mut jac = [[0.0f64; 4]; 4];
    for col in 0..4 {
        let mut tp = theta;
        tp[col] += step;
        let mut tm = theta;
        tm[col] -= step;
        let fp = eval(&tp)?;
        let fm = eval(&tm)?;
        for (row, jrow) in jac.iter_mut().enumerate() {
            jrow[col] = wrap_angle(fp[row] - fm[row]) / (2.0 * step);
        }
    }
    Ok(jac)
}

/// Depth limit for the exact word sum of the expansion probe.
pub const EXPANSION_MAX_DEPTH: usize = 4;
const RESAMPLE_LIMIT: u32 = 64;
const JACOBIAN_GATE: f64 = 1e-6;

/// Options of the expansion probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionOptions {
    /// Word length of the exact sum (at most [`EXPANSION_MAX_DEPTH`]).
    pub word_length: usize,
    /// Random sample points.
    pub samples: usize,
    /// Seed; sample `s` draws from trial stream `s`.
    pub seed: u64,
    /// Step of the finite-difference cross-check.
    pub fd_step: f64,
}

impl ExpansionOptions {
    /// Defaults: finite-difference step `1e-6`.
    pub fn new(word_length: usize, samples: usize, seed: u64) -> Self {
        Self { word_length, samples, seed, fd_step: 1e-6 }
    }
}

/// Result of the expansion probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionEstimate {
    /// Smallest per-sample averaged log-expansion (the probe's estimate of
    /// the uniform-expansion constant).
    pub c_hat: f64,
    /// Averaged log-expansion at every sample point.
    pub per_sample: Vec<f64>,
    /// Words summed in total (`samples * generators^word_length`).
    pub words: u64,
    /// Largest relative disagreement between the closed-form and
    /// finite-difference Jacobian routes over all samples.
    pub jacobian_cross_check: f64,
    /// Sample draws discarded for hitting degenerate folds.
    pub resampled: u64,
}

fn apply_jac(m: &[[f64; 4]; 4], v: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0f64; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r] += m[r][c] * v[c];
        }
    }
    out
}

fn vec4_norm(v: &[f64; 4]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn word_sum(
    lv: &[f64; 5],
    gens: &[FoldLabel],
    nu: &GeneratorDistribution,
    x: &NormalizedPentagon,
    v: &[f64; 4],
    log_acc: f64,
    depth: usize,
) -> Result<f64, RandError> {
    if depth == 0 {
        return Ok(log_acc);
    }
    let mut total = 0.0;
    for (g, &label) in gens.iter().enumerate() {
        let jac = fold_jacobian(lv, label, x)?;
        let mut w = apply_jac(&jac, v);
        let s = vec4_norm(&w);
        if !s.is_finite() || s <= 0.0 {
            return Err(RandError::Numerics("tangent norm collapsed".into()));
        }
        for entry in &mut w {
            *entry /= s;
        }
        let (i, j) = label.pair();
        let y = fold_normalized(x, i, j).map_err(|e| RandError::Invalid(e.to_string()))?;
        total += nu.weight(g) * word_sum(lv, gens, nu, &y, &w, log_acc + s.ln(), depth - 1)?;
    }
    Ok(total)
}

fn jacobian_routes_deviation(
    l: &Lengths,
    lv: &[f64; 5],
    label: FoldLabel,
    x: &NormalizedPentagon,
    fd_step: f64,
) -> Result<f64, RandError> {
    let closed = fold_jacobian(lv, label, x)?;
    let fd = fold_jacobian_fd(l, label, x, fd_step)?;
    let mut scale = 1.0f64;
    let mut dev = 0.0f64;
    for r in 0..4 {
        for c in 0..4 {
            scale = scale.max(closed[r][c].abs());
        }
    }
    for r in 0..4 {
        for c in 0..4 {
            dev = dev.max((closed[r][c] - fd[r][c]).abs());
        }
    }
    Ok(dev / scale)
}

/// Exact word sums of the derivative cocycle at random sample points.
///
/// At each sample the probe draws a point and a unit tangent direction,
/// then sums `ν(word) * log ||D(word) v||` over **all** words of the chosen
/// length, using the closed-form fold Jacobians; the per-sample values'
/// minimum is the expansion estimate. At every sample the closed form is
/// cross-checked against the finite-difference route; disagreement beyond
/// `1e-6` relative fails the probe. Samples hitting degenerate folds are
/// redrawn (up to a fixed limit) and counted.
pub fn uniform_expansion_probe(
    l: &Lengths,
    gens: &[FoldLabel],
    nu: &GeneratorDistribution,
    opts: &ExpansionOptions,
) -> Result<ExpansionEstimate, RandError> {
    if gens.is_empty() {
        return Err(RandError::Invalid("at least one fold label is required".into()));
    }
    if nu.len() != gens.len() {
        return Err(RandError::Invalid("distribution size must match the fold labels".into()));
    }
    if opts.word_length == 0 || opts.samples == 0 {
        return Err(RandError::Invalid("word length and samples must be positive".into()));
    }
    if opts.word_length > EXPANSION_MAX_DEPTH {
        return Err(RandError::Budget(format!(
            "word length {} exceeds the exact-sum depth limit {EXPANSION_MAX_DEPTH}",
            opts.word_length
        )));
    }
    let lv = l.real_values()?;
    let word_count = (gens.len() as u64).pow(opts.word_length as u32);

    struct SampleOut {
        value: f64,
        deviation: f64,
        resampled: u64,
    }

    let outs: Vec<SampleOut> = (0..opts.samples as u64)
        .into_par_iter()
        .map(|s| -> Result<SampleOut, RandError> {
            let mut rng = trial_rng(opts.seed, s);
            let mut resampled = 0u64;
            for _ in 0..RESAMPLE_LIMIT {
                let x = match sample_pentagon(l, &mut rng).and_then(|p| to_pent1(&p)) {
                    Ok(q) => q.base,
                    Err(_) => {
                        resampled += 1;
                        continue;
                    }
                };
                let z = to_surface(&x);
                let frame = match real_tangent_frame(l, &z) {
                    Ok(f) => f,
                    Err(_) => {
                        resampled += 1;
                        continue;
                    }
                };
                let phi: f64 = rng.random_range(0.0..TAU);
                let mut v = [0.0f64; 4];
                for t in 0..4 {
                    v[t] = phi.cos() * frame.0[t] + phi.sin() * frame.1[t];
                }
                let vn = vec4_norm(&v);
                if !vn.is_finite() || vn <= 1e-9 {
                    resampled += 1;
                    continue;
                }
                for entry in &mut v {
                    *entry /= vn;
                }
                let deviation =
                    match jacobian_routes_deviation(l, &lv, gens[0], &x, opts.fd_step) {
                        Ok(d) => d,
                        Err(_) => {
                            resampled += 1;
                            continue;
                        }
                    };
                match word_sum(&lv, gens, nu, &x, &v, 0.0, opts.word_length) {
                    Ok(value) => return Ok(SampleOut { value, deviation, resampled }),
                    Err(_) => {
                        resampled += 1;
                        continue;
                    }
                }
            }
            Err(RandError::Numerics("expansion sampling kept hitting degenerate folds".into()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let per_sample: Vec<f64> = outs.iter().map(|o| o.value).collect();
    let c_hat = per_sample.iter().copied().fold(f64::INFINITY, f64::min);
    let jacobian_cross_check = outs.iter().map(|o| o.deviation).fold(0.0f64, f64::max);
    if jacobian_cross_check > JACOBIAN_GATE {
        return Err(RandError::Numerics(format!(
            "jacobian routes disagree by {jacobian_cross_check} (relative)"
        )));
    }
    let resampled = outs.iter().map(|o| o.resampled).sum();
    Ok(ExpansionEstimate {
        c_hat,
        per_sample,
        words: opts.samples as u64 * word_count,
        jacobian_cross_check,
        resampled,
    })
}
