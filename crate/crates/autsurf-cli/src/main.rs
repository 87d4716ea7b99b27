//! Command-line interface for the surface-automorphism toolkit.
//!
//! Subcommand families: `pent` (pentagon moduli-space checks and random-fold
//! experiments), `blanc` (plane involution hypothesis checks and stiffness
//! runs), `ns` (exact lattice computations: classification, characteristic
//! polynomials, degree counting, cohomology matrices).
//!
//! Every run prints a self-describing JSON summary to stdout containing all
//! resolved options, so the run can be reproduced exactly. With `--out-dir`,
//! the summary plus CSV traces and SVG figures are also written as files.
//! Scalar inputs accept exact rational strings ("7/20") wherever decimals
//! are accepted. Errors print machine-readable JSON to stderr; exit code 1
//! signals invalid input, 2 an aborted experiment (rejection ceiling).

use autsurf::blancgeom::{
    hypothesis_check, reference_configuration, CubicCurve, GeomError, JonquieresMap,
};
use autsurf::exactlin::{ExactLinError, IntPolynomial, LatticeMatrix};
use autsurf::nsaction::{
    blanc_ns_matrix, classify_word, count_degrees, default_k3_config, entropy,
    h1_matrix_from_configuration, ns_dim, ns_gram, quotient_rep, word_matrix, ConfigDescriptor,
    NsError, Word,
};
use autsurf::pentspace::{FoldLabel, SpaceError};
use autsurf::pentsurf::{
    j_fixed_point_scan, node_point, smoothness_check, Lengths, PentError, SurfacePoint,
};
use autsurf::randdyn::{
    circle_extension_experiment, drift_experiment, merge_all, run_orbit,
    sample_start, stiffness_experiment, uniform_expansion_probe, CircleOptions, DriftOptions,
    ExpansionOptions, GeneratorDistribution, OrbitOptions, PentagonSystem, RandError, RunStats,
    StartMode, StiffnessOptions,
};
use autsurf::svg::{heatmap, line_plot, PlotOptions, Series, SvgError};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::Rational64;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

// ---------------------------------------------------------------------------
// Failure plumbing: machine-readable error JSON + exit codes
// ---------------------------------------------------------------------------

struct Failure {
    kind: &'static str,
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure { kind: "invalid-input", code: 1, message: message.into() }
    }
}

macro_rules! from_invalid {
    ($($t:ty => $kind:literal),* $(,)?) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure { kind: $kind, code: 1, message: e.to_string() }
            }
        }
    )*};
}

from_invalid!(
    PentError => "pentagon",
    SpaceError => "moduli-space",
    GeomError => "plane-geometry",
    NsError => "lattice",
    ExactLinError => "exact-linear",
    SvgError => "figure",
    std::io::Error => "io",
    serde_json::Error => "json",
);

impl From<RandError> for Failure {
    fn from(e: RandError) -> Self {
        let (kind, code) = match &e {
            RandError::RejectionCeiling { .. } => ("rejection-ceiling", 2),
            RandError::Hypotheses(_) => ("hypotheses", 1),
            RandError::Budget(_) => ("budget", 1),
            _ => ("experiment", 1),
        };
        Failure { kind, code, message: e.to_string() }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                std::process::exit(0);
            }
            // human-readable first, machine-readable JSON as the last line
            let _ = e.print();
            let first = e
                .render()
                .to_string()
                .lines()
                .next()
                .unwrap_or("usage error")
                .trim_start_matches("error: ")
                .to_string();
            let payload = json!({ "error": { "kind": "usage", "message": first } });
            eprintln!("{payload}");
            std::process::exit(1);
        }
    };
    if let Some(n) = cli.threads {
        // a second initialization (e.g. in tests) is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out_dir = cli.out_dir.clone();
    let result = match cli.cmd {
        Cmd::Pent(c) => run_pent(c, out_dir.as_deref()),
        Cmd::Blanc(c) => run_blanc(c, out_dir.as_deref()),
        Cmd::Ns(c) => run_ns(c, out_dir.as_deref()),
    };
    if let Err(f) = result {
        let payload = json!({ "error": { "kind": f.kind, "message": f.message } });
        eprintln!("{payload}");
        std::process::exit(f.code);
    }
}

// ---------------------------------------------------------------------------
// Command tree
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "autsurf",
    version,
    about = "Dynamics of fold and involution groups on projective surfaces"
)]
struct Cli {
    /// Worker threads for parallel trials (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for summary.json, CSV traces and SVG figures (stdout-only
    /// when omitted).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pentagon moduli spaces: checks and random-fold experiments.
    #[command(subcommand)]
    Pent(PentCmd),
    /// Plane Jonquieres involutions over a fixed cubic.
    #[command(subcommand)]
    Blanc(BlancCmd),
    /// Exact lattice actions: classification, polynomials, degree counts.
    #[command(subcommand)]
    Ns(NsCmd),
}

#[derive(Args, Clone)]
struct ExperimentIo {
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PentCmd {
    /// Check side lengths: admissibility, smoothness, nodes, real-structure
    /// fixed points.
    Check {
        /// Five side lengths (decimals or rationals like 7/20).
        #[arg(num_args = 5, allow_hyphen_values = true)]
        lengths: Vec<String>,
    },
    /// Random fold orbits with empirical measures and pushforwards.
    FoldRun {
        /// Comma-separated side lengths, e.g. "1,1.1,0.9,1.05,0.95".
        #[arg(long, allow_hyphen_values = true)]
        lengths: Option<String>,
        /// Attempted fold steps per trial.
        #[arg(long)]
        steps: Option<u64>,
        /// Base RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Independent trials, merged exactly.
        #[arg(long)]
        trials: Option<u64>,
        /// Bins per axis of the observation grids.
        #[arg(long)]
        bins: Option<usize>,
        /// Comma-separated fold labels (default: all ten), e.g. "s0,r1,r4".
        #[arg(long)]
        labels: Option<String>,
        /// Comma-separated generator weights (default: uniform).
        #[arg(long, allow_hyphen_values = true)]
        weights: Option<String>,
        /// Collect per-generator pushforward histograms.
        #[arg(long)]
        pushforwards: bool,
        /// Accumulate invariant-density weights per bin.
        #[arg(long)]
        density: bool,
        /// Abort after this many rejected steps (default steps/10, min 100).
        #[arg(long)]
        rejection_ceiling: Option<u64>,
        /// Sample trial starts from this seed (default: derived from --seed).
        #[arg(long)]
        start_seed: Option<u64>,
        #[command(flatten)]
        io: ExperimentIo,
    },
    /// Anchor-drift statistics of unfolded random fold words.
    Drift {
        #[arg(long, allow_hyphen_values = true)]
        lengths: Option<String>,
        /// Fold steps per trial.
        #[arg(long)]
        steps: Option<u64>,
        /// Independent trials.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        labels: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        weights: Option<String>,
        #[command(flatten)]
        io: ExperimentIo,
    },
    /// Circle-extension orbit: fiber-angle equidistribution.
    Circle {
        #[arg(long, allow_hyphen_values = true)]
        lengths: Option<String>,
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Circle bins (must divide the integer angle modulus).
        #[arg(long)]
        bins: Option<usize>,
        /// Starting fiber angle in integer units.
        #[arg(long)]
        start_units: Option<u64>,
        #[arg(long)]
        labels: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        weights: Option<String>,
        #[command(flatten)]
        io: ExperimentIo,
    },
    /// Exact word-sum expansion probe of the derivative cocycle.
    Expansion {
        #[arg(long, allow_hyphen_values = true)]
        lengths: Option<String>,
        /// Word length of the exact sum (at most 4).
        #[arg(long)]
        word_length: Option<usize>,
        /// Random sample points.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        labels: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        weights: Option<String>,
        #[command(flatten)]
        io: ExperimentIo,
    },
}

#[derive(Args, Clone)]
struct BlancConfigArgs {
    /// Use the built-in reference configuration with this many involutions.
    #[arg(long)]
    reference: Option<usize>,
    /// Cubic coefficients "u,v,w" for y^2 = x^3 + u x^2 + v x + w.
    #[arg(long, allow_hyphen_values = true)]
    curve: Option<String>,
    /// Base point: "x" or "x:+"/"x:-" (on-curve abscissa and branch) or
    /// explicit "x,y". Repeatable.
    #[arg(long = "q", allow_hyphen_values = true)]
    qs: Vec<String>,
}

#[derive(Subcommand)]
enum BlancCmd {
    /// Check the genericity hypotheses of a configuration.
    Check {
        #[command(flatten)]
        cfg: BlancConfigArgs,
        #[command(flatten)]
        io: ExperimentIo,
    },
    /// Random involution orbits: stiffness toward the fixed cubic.
    Run {
        #[command(flatten)]
        cfg: BlancConfigArgs,
        /// Steps per start.
        #[arg(long)]
        steps: Option<u64>,
        /// Number of random starts.
        #[arg(long)]
        starts: Option<usize>,
        /// Explicit start "x,y". Repeatable; overrides --starts.
        #[arg(long = "start", allow_hyphen_values = true)]
        explicit_starts: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Tube radius as a fraction of the marked-point box diagonal.
        #[arg(long)]
        epsilon_fraction: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        weights: Option<String>,
        #[command(flatten)]
        io: ExperimentIo,
    },
}

#[derive(Subcommand)]
enum NsCmd {
    /// Classify a word's lattice action (elliptic/parabolic/loxodromic).
    Classify {
        /// Generator family: "quotient-A", "h1", or "blanc-ns-<k>".
        #[arg(long, default_value = "quotient-A")]
        gens: String,
        /// Word letters, e.g. "123" or "1,2,3" (1-based generators).
        #[arg(long)]
        word: String,
        /// Configuration descriptor JSON (default: built-in k=3).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Characteristic polynomial of a word's lattice action.
    Charpoly {
        #[arg(long, default_value = "quotient-A")]
        gens: String,
        #[arg(long)]
        word: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Tabulate the degree-counting function over reduced words.
    CountDegrees {
        /// Number of involutions of the plane configuration.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Maximum reduced word length.
        #[arg(long)]
        l_max: usize,
        /// Optional degree ceiling for the table.
        #[arg(long)]
        r_max: Option<i128>,
        /// Enumeration budget in words.
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
    /// Emit the exact cohomology package of a configuration: involution
    /// matrices, quotient representation, projection.
    H1 {
        /// Configuration descriptor JSON (default: built-in k=3).
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

// ---------------------------------------------------------------------------
// Scalar, label, curve and config parsing
// ---------------------------------------------------------------------------

fn parse_scalar(s: &str) -> Result<f64, Failure> {
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n
            .trim()
            .parse()
            .map_err(|_| Failure::invalid(format!("bad rational numerator in '{t}'")))?;
        let d: i64 = d
            .trim()
            .parse()
            .map_err(|_| Failure::invalid(format!("bad rational denominator in '{t}'")))?;
        if d == 0 {
            return Err(Failure::invalid(format!("zero denominator in '{t}'")));
        }
        Ok(n as f64 / d as f64)
    } else {
        t.parse::<f64>().map_err(|_| Failure::invalid(format!("'{t}' is not a number")))
    }
}

fn parse_rational(s: &str) -> Option<Rational64> {
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            None
        } else {
            Some(Rational64::new(n, d))
        }
    } else {
        t.parse::<i64>().ok().map(Rational64::from_integer)
    }
}

fn parse_scalar_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',').map(parse_scalar).collect()
}

fn parse_lengths(s: &str) -> Result<Lengths, Failure> {
    let v = parse_scalar_list(s)?;
    let arr: [f64; 5] = v
        .try_into()
        .map_err(|v: Vec<f64>| Failure::invalid(format!("need 5 lengths, got {}", v.len())))?;
    Ok(Lengths::from_reals(arr)?)
}

fn parse_fold_labels(s: &str) -> Result<Vec<FoldLabel>, Failure> {
    s.split(',')
        .map(|tok| {
            let t = tok.trim();
            FoldLabel::all()
                .into_iter()
                .find(|l| l.to_string() == t)
                .ok_or_else(|| Failure::invalid(format!("unknown fold label '{t}'")))
        })
        .collect()
}

fn parse_word(s: &str) -> Result<Word, Failure> {
    let letters: Vec<usize> = if s.contains(',') {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Failure::invalid(format!("bad word letter '{t}'")))
            })
            .collect::<Result<_, _>>()?
    } else {
        s.trim()
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as usize)
                    .ok_or_else(|| Failure::invalid(format!("bad word letter '{c}'")))
            })
            .collect::<Result<_, _>>()?
    };
    Ok(Word::new(letters)?)
}

fn parse_curve(s: &str) -> Result<CubicCurve, Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Failure::invalid(format!("curve needs 3 coefficients, got {}", parts.len())));
    }
    let rationals: Vec<Option<Rational64>> = parts.iter().map(|p| parse_rational(p)).collect();
    if let (Some(u), Some(v), Some(w)) = (rationals[0], rationals[1], rationals[2]) {
        Ok(CubicCurve::from_rationals(u, v, w)?)
    } else {
        let u = parse_scalar(parts[0])?;
        let v = parse_scalar(parts[1])?;
        let w = parse_scalar(parts[2])?;
        Ok(CubicCurve::new(u, v, w)?)
    }
}

/// Resolves one `--q` argument against a curve: "x,y" explicit (validated
/// on-curve), or "x" / "x:+" / "x:-" for the point above/below `x`.
fn parse_base_point(curve: &CubicCurve, s: &str) -> Result<(f64, f64), Failure> {
    if s.contains(',') {
        let v = parse_scalar_list(s)?;
        if v.len() != 2 {
            return Err(Failure::invalid(format!("point '{s}' needs exactly x,y")));
        }
        let (x, y) = (v[0], v[1]);
        let scale = 1.0f64.max(x.abs().powi(3)).max(y * y);
        if (y * y - curve.g(x)).abs() > 1e-8 * scale {
            return Err(Failure::invalid(format!("point ({x}, {y}) does not lie on the curve")));
        }
        Ok((x, y))
    } else {
        let (xs, sign) = match s.split_once(':') {
            Some((x, "+")) | Some((x, "+1")) => (x, 1i8),
            Some((x, "-")) | Some((x, "-1")) => (x, -1i8),
            Some((_, other)) => {
                return Err(Failure::invalid(format!("branch sign '{other}' must be + or -")))
            }
            None => (s, 1i8),
        };
        let x = parse_scalar(xs)?;
        Ok(curve.point_above(x, sign)?)
    }
}

fn resolve_blanc_config(args: &BlancConfigArgs) -> Result<(CubicCurve, Vec<(f64, f64)>), Failure> {
    match (&args.reference, &args.curve) {
        (Some(k), None) => {
            if !args.qs.is_empty() {
                return Err(Failure::invalid("--reference and --q are mutually exclusive"));
            }
            Ok(reference_configuration(*k)?)
        }
        (None, Some(curve)) => {
            let curve = parse_curve(curve)?;
            if args.qs.is_empty() {
                return Err(Failure::invalid("--curve needs at least one --q base point"));
            }
            let qs = args
                .qs
                .iter()
                .map(|q| parse_base_point(&curve, q))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((curve, qs))
        }
        (Some(_), Some(_)) => {
            Err(Failure::invalid("--reference and --curve are mutually exclusive"))
        }
        (None, None) => Err(Failure::invalid("give either --reference <k> or --curve u,v,w")),
    }
}

/// A parsed experiment config file: flag values by name, scalars accepted
/// as numbers or rational strings.
struct ConfigFile(Value);

impl ConfigFile {
    fn load(path: Option<&Path>) -> Result<Self, Failure> {
        match path {
            None => Ok(ConfigFile(Value::Null)),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                let v: Value = serde_json::from_str(&text)?;
                if !v.is_object() {
                    return Err(Failure::invalid("config file must hold a JSON object"));
                }
                Ok(ConfigFile(v))
            }
        }
    }

    fn scalar(&self, key: &str) -> Result<Option<f64>, Failure> {
        match self.0.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Number(n)) => Ok(n.as_f64()),
            Some(Value::String(s)) => parse_scalar(s).map(Some),
            Some(other) => Err(Failure::invalid(format!("config key '{key}': {other} is not a scalar"))),
        }
    }

    fn integer<T: TryFrom<u64>>(&self, key: &str) -> Result<Option<T>, Failure> {
        match self.0.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Number(n)) => {
                let u = n
                    .as_u64()
                    .ok_or_else(|| Failure::invalid(format!("config key '{key}' must be a nonnegative integer")))?;
                T::try_from(u)
                    .map(Some)
                    .map_err(|_| Failure::invalid(format!("config key '{key}' out of range")))
            }
            Some(other) => Err(Failure::invalid(format!("config key '{key}': {other} is not an integer"))),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>, Failure> {
        match self.0.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(Failure::invalid(format!("config key '{key}': {other} is not a string"))),
        }
    }
}

fn resolve_lengths(flag: Option<&str>, cfg: &ConfigFile) -> Result<Lengths, Failure> {
    let spec = match flag {
        Some(s) => s.to_string(),
        None => cfg
            .string("lengths")?
            .ok_or_else(|| Failure::invalid("side lengths are required (--lengths or config)"))?,
    };
    parse_lengths(&spec)
}

fn resolve_labels(flag: Option<&str>, cfg: &ConfigFile) -> Result<Vec<FoldLabel>, Failure> {
    match flag.map(str::to_string).or(cfg.string("labels")?) {
        Some(s) => parse_fold_labels(&s),
        None => Ok(FoldLabel::all().to_vec()),
    }
}

fn resolve_distribution(
    flag: Option<&str>,
    cfg: &ConfigFile,
    labels: Vec<String>,
) -> Result<GeneratorDistribution, Failure> {
    match flag.map(str::to_string).or(cfg.string("weights")?) {
        Some(s) => {
            let w = parse_scalar_list(&s)?;
            Ok(GeneratorDistribution::new(labels, w)?)
        }
        None => Ok(GeneratorDistribution::uniform(labels)?),
    }
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

fn emit_summary(summary: &Value, out_dir: Option<&Path>) -> Result<(), Failure> {
    println!("{}", serde_json::to_string_pretty(summary)?);
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(summary)?)?;
    }
    Ok(())
}

fn write_file(out_dir: Option<&Path>, name: &str, content: &str) -> Result<(), Failure> {
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), content)?;
    }
    Ok(())
}

fn write_csv(
    out_dir: Option<&Path>,
    name: &str,
    header: &str,
    rows: impl IntoIterator<Item = String>,
) -> Result<(), Failure> {
    if out_dir.is_none() {
        return Ok(());
    }
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    write_file(out_dir, name, &text)
}

fn surface_point_json(z: &SurfacePoint) -> Value {
    Value::Array(z.coords().iter().map(|c| json!([c.re, c.im])).collect())
}

fn poly_json(p: &IntPolynomial) -> Value {
    json!({
        "ascending_coefficients": p.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "display": format_poly(p),
    })
}

/// Renders an integer polynomial like `t^6 - 2t^5 - 5t^4 - ... + 1`.
fn format_poly(p: &IntPolynomial) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for k in (0..=p.degree()).rev() {
        let c = p.coeff(k);
        if c == BigInt::ZERO {
            continue;
        }
        let mag = c.magnitude().to_string();
        let neg = c < BigInt::ZERO;
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let show_mag = mag != "1" || k == 0;
        if show_mag {
            out.push_str(&mag);
        }
        if k >= 1 {
            out.push('t');
            if k >= 2 {
                out.push_str(&format!("^{k}"));
            }
        }
    }
    out
}

fn histogram_csv_rows(h: &autsurf::randdyn::Histogram) -> Vec<String> {
    let mut rows = Vec::with_capacity(h.counts().len());
    for iy in 0..h.bins_y() {
        for ix in 0..h.bins_x() {
            rows.push(format!("{ix},{iy},{}", h.counts()[iy * h.bins_x() + ix]));
        }
    }
    rows
}

// ---------------------------------------------------------------------------
// pent subcommands
// ---------------------------------------------------------------------------

fn run_pent(cmd: PentCmd, out_dir: Option<&Path>) -> Result<(), Failure> {
    match cmd {
        PentCmd::Check { lengths } => pent_check(&lengths, out_dir),
        PentCmd::FoldRun {
            lengths,
            steps,
            seed,
            trials,
            bins,
            labels,
            weights,
            pushforwards,
            density,
            rejection_ceiling,
            start_seed,
            io,
        } => {
            let cfg = ConfigFile::load(io.config.as_deref())?;
            let l = resolve_lengths(lengths.as_deref(), &cfg)?;
            let labels = resolve_labels(labels.as_deref(), &cfg)?;
            let steps = steps.or(cfg.integer("steps")?).unwrap_or(10_000);
            let seed = seed.or(cfg.integer("seed")?).unwrap_or(0);
            let trials = trials.or(cfg.integer("trials")?).unwrap_or(1);
            let bins = bins.or(cfg.integer("bins")?).unwrap_or(50);
            let start_seed = start_seed.or(cfg.integer("start_seed")?);
            pent_fold_run(
                &l,
                labels,
                weights.as_deref(),
                &cfg,
                steps,
                seed,
                trials,
                bins,
                pushforwards,
                density,
                rejection_ceiling,
                start_seed,
                out_dir,
            )
        }
        PentCmd::Drift { lengths, steps, trials, seed, labels, weights, io } => {
            let cfg = ConfigFile::load(io.config.as_deref())?;
            let l = resolve_lengths(lengths.as_deref(), &cfg)?;
            let labels = resolve_labels(labels.as_deref(), &cfg)?;
            let steps = steps.or(cfg.integer("steps")?).unwrap_or(100_000);
            let trials = trials.or(cfg.integer("trials")?).unwrap_or(20);
            let seed = seed.or(cfg.integer("seed")?).unwrap_or(0);
            pent_drift(&l, labels, weights.as_deref(), &cfg, steps, trials, seed, out_dir)
        }
        PentCmd::Circle { lengths, steps, seed, bins, start_units, labels, weights, io } => {
            let cfg = ConfigFile::load(io.config.as_deref())?;
            let l = resolve_lengths(lengths.as_deref(), &cfg)?;
            let labels = resolve_labels(labels.as_deref(), &cfg)?;
            let steps = steps.or(cfg.integer("steps")?).unwrap_or(200_000);
            let seed = seed.or(cfg.integer("seed")?).unwrap_or(0);
            let bins = bins.or(cfg.integer("bins")?).unwrap_or(360);
            let start_units = start_units.or(cfg.integer("start_units")?).unwrap_or(0);
            pent_circle(&l, labels, weights.as_deref(), &cfg, steps, seed, bins, start_units, out_dir)
        }
        PentCmd::Expansion { lengths, word_length, samples, seed, labels, weights, io } => {
            let cfg = ConfigFile::load(io.config.as_deref())?;
            let l = resolve_lengths(lengths.as_deref(), &cfg)?;
            let labels = resolve_labels(labels.as_deref(), &cfg)?;
            let word_length = word_length.or(cfg.integer("word_length")?).unwrap_or(2);
            let samples = samples.or(cfg.integer("samples")?).unwrap_or(100);
            let seed = seed.or(cfg.integer("seed")?).unwrap_or(0);
            pent_expansion(&l, labels, weights.as_deref(), &cfg, word_length, samples, seed, out_dir)
        }
    }
}

fn pent_check(raw: &[String], out_dir: Option<&Path>) -> Result<(), Failure> {
    let vals: Vec<f64> = raw.iter().map(|s| parse_scalar(s)).collect::<Result<_, _>>()?;
    let arr: [f64; 5] = vals
        .try_into()
        .map_err(|v: Vec<f64>| Failure::invalid(format!("need 5 lengths, got {}", v.len())))?;
    let l = Lengths::from_reals(arr)?;
    let admissible = l.is_admissible();
    let smooth = smoothness_check(&l);
    let fixed = j_fixed_point_scan(&l);
    let mut nodes = Vec::new();
    for i in 0..5 {
        for j in (i + 1)..5 {
            if let Ok(z) = node_point(&l, i, j) {
                nodes.push(json!({ "i": i, "j": j, "point": surface_point_json(&z) }));
            }
        }
    }
    let summary = json!({
        "command": "pent check",
        "lengths": raw,
        "lengths_values": arr,
        "admissible": admissible,
        "smooth": smooth,
        "node_count": nodes.len(),
        "nodes": nodes,
        "real_structure_fixed_points": fixed.iter().map(surface_point_json).collect::<Vec<_>>(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    emit_summary(&summary, out_dir)
}

#[allow(clippy::too_many_arguments)]
fn pent_fold_run(
    l: &Lengths,
    labels: Vec<FoldLabel>,
    weights_flag: Option<&str>,
    cfg: &ConfigFile,
    steps: u64,
    seed: u64,
    trials: u64,
    bins: usize,
    pushforwards: bool,
    density: bool,
    rejection_ceiling: Option<u64>,
    start_seed: Option<u64>,
    out_dir: Option<&Path>,
) -> Result<(), Failure> {
    if trials == 0 {
        return Err(Failure::invalid("at least one trial is required"));
    }
    let nu = resolve_distribution(
        weights_flag,
        cfg,
        labels.iter().map(|l| l.to_string()).collect(),
    )?;
    let system = PentagonSystem::new(l.clone(), labels.clone())?.with_bins(bins);
    // start and orbit use disjoint seed streams so the orbit does not replay
    // the draws that chose its starting point
    let orbit_seed = |t: u64| seed.wrapping_add(2 * t);
    let start_of = |t: u64| match start_seed {
        Some(s0) => s0.wrapping_add(t),
        None => seed.wrapping_add(2 * t + 1),
    };
    use rayon::prelude::*;
    let runs: Vec<RunStats> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<RunStats, RandError> {
            let x0 = sample_start(l, start_of(t))?;
            let mut opts = OrbitOptions::new(steps, orbit_seed(t));
            opts.collect_pushforwards = pushforwards;
            opts.collect_weights = density;
            opts.rejection_ceiling = rejection_ceiling;
            run_orbit(&system, &x0, &nu, &opts)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let merged = merge_all(&runs)?;
    let invariance: Vec<Value> = if pushforwards {
        let mut rows = Vec::new();
        for (g, per_gen) in merged.pushforwards.iter().enumerate() {
            for (c, h) in per_gen.iter().enumerate() {
                let tv = merged.histograms[c].total_variation(h)?;
                rows.push(json!({
                    "generator": nu.label(g),
                    "chart": merged.histograms[c].chart(),
                    "tv": tv,
                }));
            }
        }
        rows
    } else {
        Vec::new()
    };
    let summary = json!({
        "command": "pent fold-run",
        "lengths": l.real_values()?,
        "labels": labels.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "weights": nu.weights(),
        "steps": steps,
        "trials": trials,
        "seed": seed,
        "start_seed": start_seed,
        "bins": bins,
        "collect_pushforwards": pushforwards,
        "collect_density": density,
        "rejection_ceiling": rejection_ceiling,
        "pushforward_tv": invariance,
        "stats": merged,
        "version": env!("CARGO_PKG_VERSION"),
    });
    emit_summary(&summary, out_dir)?;
    for h in &merged.histograms {
        let name = h.chart().to_string();
        write_csv(
            out_dir,
            &format!("hist-{name}.csv"),
            "ix,iy,count",
            histogram_csv_rows(h),
        )?;
        if h.total() > 0 {
            let fig = heatmap(h, &format!("empirical measure on {name}"))?;
            write_file(out_dir, &format!("heatmap-{name}.svg"), &fig)?;
        }
    }
    if pushforwards {
        let rows = invariance.iter().map(|row| {
            format!(
                "{},{},{}",
                row["generator"].as_str().unwrap_or(""),
                row["chart"].as_str().unwrap_or(""),
                row["tv"]
            )
        });
        write_csv(out_dir, "pushforward-tv.csv", "generator,chart,tv", rows)?;
    }
    Ok(())
}

fn pent_drift(
    l: &Lengths,
    labels: Vec<FoldLabel>,
    weights_flag: Option<&str>,
    cfg: &ConfigFile,
    steps: u64,
    trials: u64,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<(), Failure> {
    let nu = resolve_distribution(
        weights_flag,
        cfg,
        labels.iter().map(|l| l.to_string()).collect(),
    )?;
    let opts = DriftOptions::new(steps, trials, seed);
    let res = drift_experiment(l, &labels, &nu, &opts)?;
    let summary = json!({
        "command": "pent drift",
        "lengths": l.real_values()?,
        "labels": labels.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "weights": nu.weights(),
        "steps": steps,
        "trials": trials,
        "seed": seed,
        "result": res,
        "version": env!("CARGO_PKG_VERSION"),
    });
    emit_summary(&summary, out_dir)?;
    write_csv(
        out_dir,
        "drift-checkpoints.csv",
        "step,mean_abs",
        res.checkpoints.iter().zip(&res.mean_abs).map(|(c, m)| format!("{c},{m}")),
    )?;
    write_csv(
        out_dir,
        "drift-trials.csv",
        "trial,final_abs",
        res.trial_final_abs.iter().enumerate().map(|(t, a)| format!("{t},{a}")),
    )?;
    write_csv(
        out_dir,
        "drift-path.csv",
        "index,x,y",
        res.sample_path.iter().enumerate().map(|(i, p)| format!("{i},{},{}", p[0], p[1])),
    )?;
    if out_dir.is_some() {
        let pts: Vec<[f64; 2]> = res
            .checkpoints
            .iter()
            .zip(&res.mean_abs)
            .filter(|&(_, &m)| m > 0.0)
            .map(|(&c, &m)| [c as f64, m])
            .collect();
        if pts.len() >= 2 {
            let mut series = vec![Series::line_markers("mean |a0|", pts.clone())];
            if let Some(slope) = res.diffusive_exponent {
                // anchor the fitted power law at the last checkpoint
                let (xe, ye) = (pts[pts.len() - 1][0], pts[pts.len() - 1][1]);
                let fit: Vec<[f64; 2]> =
                    pts.iter().map(|p| [p[0], ye * (p[0] / xe).powf(slope)]).collect();
                series.push(Series::line(&format!("slope {slope:.3}"), fit));
            }
            let fig = line_plot(
                &series,
                &PlotOptions::new("anchor displacement vs steps")
                    .with_labels("steps", "mean |a0|")
                    .with_log_x()
                    .with_log_y(),
            )?;
            write_file(out_dir, "drift-loglog.svg", &fig)?;
        }
        if res.sample_path.len() >= 2 {
            let fig = line_plot(
                &[Series::line("trial 0", res.sample_path.clone())],
                &PlotOptions::new("anchor trajectory (trial 0)").with_labels("x", "y"),
            )?;
            write_file(out_dir, "drift-path.svg", &fig)?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn pent_circle(
    l: &Lengths,
    labels: Vec<FoldLabel>,
    weights_flag: Option<&str>,
    cfg: &ConfigFile,
    steps: u64,
    seed: u64,
    bins: usize,
    start_units: u64,
    out_dir: Option<&Path>,
) -> Result<(), Failure> {
    let nu = resolve_distribution(
        weights_flag,
        cfg,
        labels.iter().map(|l| l.to_string()).collect(),
    )?;
    let mut opts = CircleOptions::new(steps, seed);
    opts.bins = bins;
    opts.start_units = start_units;
    let res = circle_extension_experiment(l, &labels, &nu, &opts)?;
    let summary = json!({
        "command": "pent circle",
        "lengths": l.real_values()?,
        "labels": labels.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "weights": nu.weights(),
        "steps": steps,
        "seed": seed,
        "bins": bins,
        "start_units": start_units,
        "tv_to_uniform": res.tv_to_uniform,
        "final_units": res.final_units,
        "rejected": res.rejected,
        "histogram": res.histogram,
        "version": env!("CARGO_PKG_VERSION"),
    });
    emit_summary(&summary, out_dir)?;
    let width = 360.0 / bins as f64;
    write_csv(
        out_dir,
        "circle-hist.csv",
        "bin,angle_deg,count",
        res.histogram
            .counts()
            .iter()
            .enumerate()
            .map(|(b, c)| format!("{b},{},{c}", b as f64 * width)),
    )?;
    if out_dir.is_some() && res.histogram.total() > 0 {
        let total = res.histogram.total() as f64;
        let pts: Vec<[f64; 2]> = res
            .histogram
            .counts()
            .iter()
            .enumerate()
            .map(|(b, &c)| [b as f64 * width, c as f64 / total * bins as f64])
            .collect();
        let uniform = vec![[0.0, 1.0], [360.0, 1.0]];
        let fig = line_plot(
            &[Series::line("empirical", pts), Series::line("uniform", uniform)],
            &PlotOptions::new("fiber angle marginal")
                .with_labels("angle (degrees)", "density / uniform"),
        )?;
        write_file(out_dir, "circle-hist.svg", &fig)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn pent_expansion(
    l: &Lengths,
    labels: Vec<FoldLabel>,
    weights_flag: Option<&str>,
    cfg: &ConfigFile,
    word_length: usize,
    samples: usize,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<(), Failure> {
    let nu = resolve_distribution(
        weights_flag,
        cfg,
        labels.iter().map(|l| l.to_string()).collect(),
    )?;
    let opts = ExpansionOptions::new(word_length, samples, seed);
    let res = uniform_expansion_probe(l, &labels, &nu, &opts)?;
    let summary = json!({
        "command": "pent expansion",
        "lengths": l.real_values()?,
        "labels": labels.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "weights": nu.weights(),
        "word_length": word_length,
        "samples": samples,
        "seed": seed,
        "c_hat": res.c_hat,
        "words": res.words,
        "jacobian_cross_check": res.jacobian_cross_check,
        "resampled": res.resampled,
        "per_sample": res.per_sample,
        "version": env!("CARGO_PKG_VERSION"),
    });
    emit_summary(&summary, out_dir)?;
    write_csv(
        out_dir,
        "expansion-samples.csv",
        "sample,average_log_expansion",
        res.per_sample.iter().enumerate().map(|(i, v)| format!("{i},{v}")),
    )?;
    if out_dir.is_some() {
        let pts: Vec<[f64; 2]> =
            res.per_sample.iter().enumerate().map(|(i, &v)| [i as f64, v]).collect();
        let n = res.per_sample.len() as f64;
        let zero = vec![[0.0, 0.0], [(n - 1.0).max(1.0), 0.0]];
        let fig = line_plot(
            &[Series::scatter("samples", pts), Series::line("zero", zero)],
            &PlotOptions::new("averaged log-expansion per sample")
                .with_labels("sample", "average log expansion"),
        )?;
        write_file(out_dir, "expansion-samples.svg", &fig)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// blanc subcommands
// ---------------------------------------------------------------------------

fn run_blanc(cmd: BlancCmd, out_dir: Option<&Path>) -> Result<(), Failure> {
    match cmd {
        BlancCmd::Check { cfg, io } => {
            let file = ConfigFile::load(io.config.as_deref())?;
            let _ = &file;
            let (curve, qs) = resolve_blanc_config(&cfg)?;
            blanc_check(&curve, &qs, out_dir)
        }
        BlancCmd::Run {
            cfg,
            steps,
            starts,
            explicit_starts,
            seed,
            epsilon_fraction,
            weights,
            io,
        } => {
            let file = ConfigFile::load(io.config.as_deref())?;
            let (curve, qs) = resolve_blanc_config(&cfg)?;
            let steps = steps.or(file.integer("steps")?).unwrap_or(20_000);
            let seed = seed.or(file.integer("seed")?).unwrap_or(0);
            let starts = starts.or(file.integer("starts")?).unwrap_or(8);
            let epsilon_fraction =
                match epsilon_fraction {
                    Some(e) => Some(e),
                    None => file.scalar("epsilon_fraction")?,
                };
            blanc_run(
                &curve,
                &qs,
                steps,
                starts,
                &explicit_starts,
                seed,
                epsilon_fraction,
                weights.as_deref(),
                &file,
                out_dir,
            )
        }
    }
}

/// The on-curve precondition of the hypothesis checker, validated up front
/// so invalid points become clean errors instead of panics.
fn require_on_curve(curve: &CubicCurve, qs: &[(f64, f64)]) -> Result<(), Failure> {
    for (i, &(x, y)) in qs.iter().enumerate() {
        let scale = 1.0f64.max(x.abs().powi(3)).max(y * y);
        if (y * y - curve.g(x)).abs() > 1e-8 * scale {
            return Err(Failure::invalid(format!(
                "base point {} = ({x}, {y}) does not lie on the curve",
                i + 1
            )));
        }
    }
    Ok(())
}

fn blanc_check(curve: &CubicCurve, qs: &[(f64, f64)], out_dir: Option<&Path>) -> Result<(), Failure> {
    require_on_curve(curve, qs)?;
    let report = hypothesis_check(curve, qs);
    let (u, v, w) = curve.coefficients();
    let tangencies: Vec<Value> = qs
        .iter()
        .map(|&q| -> Result<Value, Failure> {
            let map = JonquieresMap::new(curve, q)?;
            Ok(Value::Array(
                map.base_points()
                    .iter()
                    .map(|t| {
                        json!({
                            "x": [t.x.re, t.x.im],
                            "y": [t.y.re, t.y.im],
                            "real": t.is_real(),
                        })
                    })
                    .collect(),
            ))
        })
        .collect::<Result<_, _>>()?;
    let summary = json!({
        "command": "blanc check",
        "curve": { "u": u, "v": v, "w": w },
        "base_points": qs,
        "hypotheses": {
            "hyp1": report.hyp1,
            "hyp2": report.hyp2,
            "hyp3": report.hyp3,
            "hyp4": report.hyp4,
            "all_hold": report.all_hold(),
        },
        "witnesses": report.witnesses,
        "tangency_points": tangencies,
        "version": env!("CARGO_PKG_VERSION"),
    });
    emit_summary(&summary, out_dir)
}

#[allow(clippy::too_many_arguments)]
fn blanc_run(
    curve: &CubicCurve,
    qs: &[(f64, f64)],
    steps: u64,
    starts: usize,
    explicit: &[String],
    seed: u64,
    epsilon_fraction: Option<f64>,
    weights_flag: Option<&str>,
    cfg: &ConfigFile,
    out_dir: Option<&Path>,
) -> Result<(), Failure> {
    let labels: Vec<String> = (1..=qs.len()).map(|i| format!("sigma{i}")).collect();
    let nu = resolve_distribution(weights_flag, cfg, labels)?;
    let start_mode = if explicit.is_empty() {
        StartMode::Random(starts)
    } else {
        let pts = explicit
            .iter()
            .map(|s| {
                let v = parse_scalar_list(s)?;
                if v.len() != 2 {
                    return Err(Failure::invalid(format!("start '{s}' needs exactly x,y")));
                }
                Ok([v[0], v[1]])
            })
            .collect::<Result<Vec<_>, _>>()?;
        StartMode::Explicit(pts)
    };
    let mut opts = StiffnessOptions::new(steps, start_mode.clone(), seed);
    if let Some(e) = epsilon_fraction {
        opts.epsilon_fraction = e;
    }
    let res = stiffness_experiment(curve, qs, &nu, &opts)?;
    let (u, v, w) = curve.coefficients();
    let summary = json!({
        "command": "blanc run",
        "curve": { "u": u, "v": v, "w": w },
        "base_points": qs,
        "weights": nu.weights(),
        "steps": steps,
        "seed": seed,
        "start_mode": start_mode,
        "epsilon_fraction": opts.epsilon_fraction,
        "result": res,
        "version": env!("CARGO_PKG_VERSION"),
    });
    emit_summary(&summary, out_dir)?;
    write_csv(
        out_dir,
        "starts.csv",
        "start_x,start_y,tube_fraction,final_distance,rejected",
        res.per_start.iter().map(|r| {
            format!(
                "{},{},{},{},{}",
                r.start[0], r.start[1], r.tube_fraction, r.final_distance, r.rejected
            )
        }),
    )?;
    if let Some(first) = res.per_start.first() {
        let cps = &first.checkpoints;
        let tube_rows = cps.iter().enumerate().map(|(k, cp)| {
            let mut row = format!("{cp}");
            for r in &res.per_start {
                row.push_str(&format!(",{}", r.tube_curve[k]));
            }
            row
        });
        let mut header = String::from("step");
        for s in 0..res.per_start.len() {
            header.push_str(&format!(",start{s}"));
        }
        write_csv(out_dir, "tube-curve.csv", &header, tube_rows)?;
        let cesaro_rows = cps.iter().enumerate().map(|(k, cp)| {
            let mut row = format!("{cp}");
            for r in &res.per_start {
                row.push_str(&format!(",{}", r.cesaro_distance[k]));
            }
            row
        });
        write_csv(out_dir, "cesaro-distance.csv", &header, cesaro_rows)?;
        if out_dir.is_some() {
            let n = res.per_start.len() as f64;
            let mean_tube: Vec<[f64; 2]> = cps
                .iter()
                .enumerate()
                .filter(|&(_, &cp)| cp > 0)
                .map(|(k, &cp)| {
                    let m = res.per_start.iter().map(|r| r.tube_curve[k]).sum::<f64>() / n;
                    [cp as f64, m]
                })
                .collect();
            let fig = line_plot(
                &[Series::line_markers("mean tube mass", mean_tube)],
                &PlotOptions::new("time fraction near the fixed cubic")
                    .with_labels("steps", "tube mass")
                    .with_log_x(),
            )?;
            write_file(out_dir, "tube-mass.svg", &fig)?;
            let mean_cesaro: Vec<[f64; 2]> = cps
                .iter()
                .enumerate()
                .filter(|&(_, &cp)| cp > 0)
                .map(|(k, &cp)| {
                    let m =
                        res.per_start.iter().map(|r| r.cesaro_distance[k]).sum::<f64>() / n;
                    [cp as f64, m]
                })
                .collect();
            let fig = line_plot(
                &[Series::line_markers("mean Cesaro distance", mean_cesaro)],
                &PlotOptions::new("Cesaro-averaged distance to the cubic")
                    .with_labels("steps", "distance")
                    .with_log_x(),
            )?;
            write_file(out_dir, "cesaro-distance.svg", &fig)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// ns subcommands
// ---------------------------------------------------------------------------

fn load_descriptor(path: Option<&Path>) -> Result<ConfigDescriptor, Failure> {
    match path {
        None => Ok(default_k3_config()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

/// Resolves a generator family name into matrices.
fn resolve_gens(name: &str, config: Option<&Path>) -> Result<Vec<LatticeMatrix>, Failure> {
    match name {
        "quotient-A" => Ok(quotient_rep(&load_descriptor(config)?)?.matrices),
        "h1" => {
            let cfg = load_descriptor(config)?;
            (1..=cfg.k)
                .map(|i| h1_matrix_from_configuration(&cfg, i).map_err(Failure::from))
                .collect()
        }
        other => {
            if let Some(k_str) = other.strip_prefix("blanc-ns-") {
                let k: usize = k_str
                    .parse()
                    .map_err(|_| Failure::invalid(format!("bad involution count '{k_str}'")))?;
                (1..=k).map(|i| blanc_ns_matrix(k, i).map_err(Failure::from)).collect()
            } else {
                Err(Failure::invalid(format!(
                    "unknown generator family '{other}' (use quotient-A, h1, or blanc-ns-<k>)"
                )))
            }
        }
    }
}

fn run_ns(cmd: NsCmd, out_dir: Option<&Path>) -> Result<(), Failure> {
    match cmd {
        NsCmd::Classify { gens, word, config } => {
            let matrices = resolve_gens(&gens, config.as_deref())?;
            let w = parse_word(&word)?;
            let c = classify_word(&matrices, &w)?;
            let ent = entropy(&matrices, &w)?;
            let summary = json!({
                "command": "ns classify",
                "gens": gens,
                "word": w.letters(),
                "kind": c.kind.to_string(),
                "lambda": c.lambda,
                "entropy": ent,
                "order": c.order,
                "salem_factor": c.salem_factor.as_ref().map(poly_json),
                "version": env!("CARGO_PKG_VERSION"),
            });
            emit_summary(&summary, out_dir)
        }
        NsCmd::Charpoly { gens, word, config } => {
            let matrices = resolve_gens(&gens, config.as_deref())?;
            let w = parse_word(&word)?;
            let m = word_matrix(&matrices, &w)?;
            let p = m.char_poly();
            let summary = json!({
                "command": "ns charpoly",
                "gens": gens,
                "word": w.letters(),
                "dim": m.dim(),
                "charpoly": poly_json(&p),
                "version": env!("CARGO_PKG_VERSION"),
            });
            emit_summary(&summary, out_dir)
        }
        NsCmd::CountDegrees { k, l_max, r_max, budget } => {
            let gens: Vec<LatticeMatrix> = (1..=k)
                .map(|i| blanc_ns_matrix(k, i).map_err(Failure::from))
                .collect::<Result<_, _>>()?;
            let mut h = vec![BigInt::ZERO; ns_dim(k)];
            h[0] = BigInt::from(1);
            let table = count_degrees(&gens, &ns_gram(k), &h, r_max, l_max, budget)?;
            let summary = json!({
                "command": "ns count-degrees",
                "k": k,
                "l_max": l_max,
                "r_max": r_max,
                "budget": budget,
                "result": table,
                "version": env!("CARGO_PKG_VERSION"),
            });
            emit_summary(&summary, out_dir)?;
            write_csv(
                out_dir,
                "degrees.csv",
                "degree,count",
                table.degrees.iter().map(|(r, n)| format!("{r},{n}")),
            )?;
            if out_dir.is_some() && table.degrees.len() >= 2 {
                let pts: Vec<[f64; 2]> =
                    table.degrees.iter().map(|&(r, n)| [r as f64, n as f64]).collect();
                let mut series = vec![Series::scatter("N(R)", pts.clone())];
                if let (Some(slope), Some((rlo, rhi))) = (table.slope, table.slope_window) {
                    let anchor = pts
                        .iter()
                        .rev()
                        .find(|p| p[0] <= rhi as f64 && p[0] >= rlo as f64)
                        .copied();
                    if let Some([xe, ye]) = anchor {
                        let fit: Vec<[f64; 2]> = pts
                            .iter()
                            .filter(|p| p[0] >= rlo as f64 && p[0] <= rhi as f64)
                            .map(|p| [p[0], ye * (p[0] / xe).powf(slope)])
                            .collect();
                        series.push(Series::line(&format!("slope {slope:.3}"), fit));
                    }
                }
                let fig = line_plot(
                    &series,
                    &PlotOptions::new("degree counting function")
                        .with_labels("degree R", "N(R)")
                        .with_log_x()
                        .with_log_y(),
                )?;
                write_file(out_dir, "degree-count.svg", &fig)?;
            }
            Ok(())
        }
        NsCmd::H1 { config } => {
            let cfg = load_descriptor(config.as_deref())?;
            let rep = quotient_rep(&cfg)?;
            let h1s: Vec<LatticeMatrix> = (1..=cfg.k)
                .map(|i| h1_matrix_from_configuration(&cfg, i).map_err(Failure::from))
                .collect::<Result<_, _>>()?;
            let proj = &rep.projection;
            let proj_rows: Vec<Vec<String>> = (0..proj.nrows())
                .map(|r| (0..proj.ncols()).map(|c| proj.entry(r, c).to_string()).collect())
                .collect();
            let summary = json!({
                "command": "ns h1",
                "k": cfg.k,
                "curve_order": cfg.order.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "h1_dim": 3 * cfg.k,
                "quotient_dim": 2 * cfg.k,
                "h1_matrices": h1s
                    .iter()
                    .map(|m| serde_json::from_str::<Value>(&m.to_json_string()))
                    .collect::<Result<Vec<_>, _>>()?,
                "quotient_matrices": rep
                    .matrices
                    .iter()
                    .map(|m| serde_json::from_str::<Value>(&m.to_json_string()))
                    .collect::<Result<Vec<_>, _>>()?,
                "projection": proj_rows,
                "version": env!("CARGO_PKG_VERSION"),
            });
            emit_summary(&summary, out_dir)?;
            if out_dir.is_some() {
                for (i, m) in h1s.iter().enumerate() {
                    write_file(out_dir, &format!("h1-{}.json", i + 1), &m.to_json_string())?;
                }
                for (i, m) in rep.matrices.iter().enumerate() {
                    write_file(out_dir, &format!("quotient-{}.json", i + 1), &m.to_json_string())?;
                }
                write_file(out_dir, "projection.json", &serde_json::to_string(&proj_rows)?)?;
            }
            Ok(())
        }
    }
}
