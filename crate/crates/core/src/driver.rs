//! JSON run configuration and the `solve` / `check` pipelines.
//!
//! A configuration selects one of the builtin benchmarks (`dirichlet`,
//! `linear`, `quadratic`) on the unit ball or a `custom` problem with constant
//! coefficients and constant exterior data:
//!
//! ```json
//! { "problem": "dirichlet", "d": 1, "alpha": 1.75, "k": 0,
//!   "samples": 100000, "seed": 7 }
//! ```
//!
//! Keys: `problem`, `d`, `alpha` or `s`, `radius`, `k`, `coefficients`
//! (degree → constant), `phi` (number or `"zero"`), `offspring_probs`
//! (degree → probability), `samples`, `h`, `refinement`, `seed`, `grid`,
//! `max_generation`, `max_particles`, `workers`, `output`, `delta_samples`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::branching::{benchmarks, radial_profile, Coefficient, Exterior, ModelParams, ProblemSpec, TreeLimits};
use crate::error::{Error, Result};
use crate::stable::RngStream;
use crate::walk::{WalkParams, DEFAULT_STEP};
use crate::wellposed::{check_existence, ExistenceReport};

/// Default boundary refinement `κ` (0 disables it).
pub const DEFAULT_REFINEMENT: f64 = 0.25;
/// Default number of profile radii, spread uniformly over `[0, 0.95 R]`.
pub const DEFAULT_GRID_POINTS: usize = 21;
/// Default walk-to-exit samples per radius when estimating `δ`.
pub const DEFAULT_DELTA_SAMPLES: u64 = 100_000;

pub const CSV_HEADER: &str = "radius,estimate,stderr,n,truncation_fraction,exact,abs_error";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Dirichlet,
    Linear,
    Quadratic,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum PhiValue {
    Number(f64),
    Named(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: ProblemKind,
    d: usize,
    alpha: Option<f64>,
    s: Option<f64>,
    radius: Option<f64>,
    k: Option<u32>,
    coefficients: Option<BTreeMap<String, f64>>,
    phi: Option<PhiValue>,
    offspring_probs: Option<BTreeMap<String, f64>>,
    samples: u64,
    h: Option<f64>,
    refinement: Option<f64>,
    seed: u64,
    grid: Option<Vec<f64>>,
    max_generation: Option<u32>,
    max_particles: Option<u64>,
    workers: Option<usize>,
    output: Option<PathBuf>,
    delta_samples: Option<u64>,
}

/// A validated run configuration with all defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub d: usize,
    pub s: f64,
    pub radius: f64,
    /// Benchmark index `k`; `None` for custom problems.
    pub k: Option<u32>,
    /// Constant coefficients `(degree, c_l)` of a custom problem.
    pub coefficients: Vec<(u32, f64)>,
    /// Constant exterior value of a custom problem.
    pub phi: f64,
    pub offspring_probs: Option<Vec<(u32, f64)>>,
    pub samples: u64,
    pub h: f64,
    pub refinement: f64,
    pub seed: u64,
    pub grid: Vec<f64>,
    pub limits: TreeLimits,
    pub workers: usize,
    pub output: Option<PathBuf>,
    pub delta_samples: u64,
}

fn parse_degree_map(key: &str, map: &BTreeMap<String, f64>) -> Result<Vec<(u32, f64)>> {
    map.iter()
        .map(|(deg, &v)| {
            let l = deg
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::config(format!("{key}.{deg}"), "degree must be a non-negative integer"))?;
            if !v.is_finite() {
                return Err(Error::config(format!("{key}.{deg}"), "value must be finite"));
            }
            Ok((l, v))
        })
        .collect()
}

fn available_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl RunConfig {
    /// Parses and validates a JSON document. Unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        Self::validate(raw)
    }

    fn validate(raw: RawConfig) -> Result<Self> {
        let benchmark = raw.problem != ProblemKind::Custom;
        if raw.d == 0 {
            return Err(Error::config("d", "dimension must be at least 1"));
        }
        let s = match (raw.alpha, raw.s) {
            (Some(_), Some(_)) => return Err(Error::config("alpha", "give either alpha or s, not both")),
            (None, None) => return Err(Error::config("alpha", "one of alpha or s is required")),
            (Some(a), None) => {
                let (lo, hi) = if benchmark { (1.0, 2.0) } else { (0.0, 2.0) };
                if !(a > lo && a < hi) {
                    return Err(Error::config("alpha", format!("alpha = {a} outside ({lo}, {hi})")));
                }
                a / 2.0
            }
            (None, Some(s)) => {
                let (lo, hi) = if benchmark { (0.5, 1.0) } else { (0.0, 1.0) };
                if !(s > lo && s < hi) {
                    return Err(Error::config("s", format!("s = {s} outside ({lo}, {hi})")));
                }
                s
            }
        };
        let radius = raw.radius.unwrap_or(1.0);
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::config("radius", "radius must be positive and finite"));
        }

        let (k, coefficients, phi) = if benchmark {
            if radius != 1.0 {
                return Err(Error::config("radius", "benchmarks are posed on the unit ball"));
            }
            if raw.coefficients.is_some() {
                return Err(Error::config("coefficients", "only custom problems take coefficients"));
            }
            if raw.phi.is_some() {
                return Err(Error::config("phi", "only custom problems take phi"));
            }
            let k = raw.k.ok_or_else(|| Error::config("k", "benchmarks require k"))?;
            (Some(k), Vec::new(), 0.0)
        } else {
            if raw.k.is_some() {
                return Err(Error::config("k", "only benchmarks take k"));
            }
            let coeffs = raw
                .coefficients
                .as_ref()
                .ok_or_else(|| Error::config("coefficients", "custom problems require coefficients"))?;
            let coeffs = parse_degree_map("coefficients", coeffs)?;
            let phi = match raw.phi {
                None => return Err(Error::config("phi", "custom problems require phi")),
                Some(PhiValue::Number(v)) if v.is_finite() => v,
                Some(PhiValue::Number(_)) => return Err(Error::config("phi", "phi must be finite")),
                Some(PhiValue::Named(name)) if name == "zero" => 0.0,
                Some(PhiValue::Named(name)) => {
                    return Err(Error::config("phi", format!("unknown builtin `{name}`, expected a number or \"zero\"")))
                }
            };
            (None, coeffs, phi)
        };

        let offspring_probs = raw
            .offspring_probs
            .as_ref()
            .map(|m| parse_degree_map("offspring_probs", m))
            .transpose()?;

        if raw.samples == 0 {
            return Err(Error::config("samples", "must be at least 1"));
        }
        let h = raw.h.unwrap_or(DEFAULT_STEP);
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::config("h", "step must be positive and finite"));
        }
        let refinement = raw.refinement.unwrap_or(DEFAULT_REFINEMENT);
        if !(refinement >= 0.0 && refinement.is_finite()) {
            return Err(Error::config("refinement", "must be a non-negative number"));
        }
        let grid = match raw.grid {
            Some(g) => {
                if g.is_empty() {
                    return Err(Error::config("grid", "needs at least one radius"));
                }
                if let Some(bad) = g.iter().find(|&&r| !(r >= 0.0 && r < radius)) {
                    return Err(Error::config("grid", format!("radius {bad} outside [0, {radius})")));
                }
                g
            }
            None => {
                let top = 0.95 * radius;
                (0..DEFAULT_GRID_POINTS)
                    .map(|i| (top * i as f64 / (DEFAULT_GRID_POINTS - 1) as f64 * 1e12).round() / 1e12)
                    .collect()
            }
        };
        let defaults = TreeLimits::default();
        let limits = TreeLimits {
            max_generation: raw.max_generation.unwrap_or(defaults.max_generation),
            max_particles: raw.max_particles.unwrap_or(defaults.max_particles),
        };
        if limits.max_particles == 0 {
            return Err(Error::config("max_particles", "must be at least 1"));
        }
        let workers = raw.workers.unwrap_or_else(available_workers);
        if workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        let delta_samples = raw.delta_samples.unwrap_or(DEFAULT_DELTA_SAMPLES);
        if delta_samples == 0 {
            return Err(Error::config("delta_samples", "must be at least 1"));
        }

        Ok(RunConfig {
            problem: raw.problem,
            d: raw.d,
            s,
            radius,
            k,
            coefficients,
            phi,
            offspring_probs,
            samples: raw.samples,
            h,
            refinement,
            seed: raw.seed,
            grid,
            limits,
            workers,
            output: raw.output,
            delta_samples,
        })
    }

    pub fn model(&self) -> Result<ModelParams> {
        ModelParams::new(self.d, self.s, self.radius)
    }

    pub fn walk_params(&self) -> Result<WalkParams> {
        let walk = self.model()?.walk_params(self.h)?;
        if self.refinement > 0.0 {
            walk.with_refinement(self.refinement)
        } else {
            Ok(walk)
        }
    }

    /// Builds the problem the configuration describes.
    pub fn build_spec(&self) -> Result<ProblemSpec> {
        let spec = match (self.problem, self.k) {
            (ProblemKind::Dirichlet, Some(k)) => benchmarks::dirichlet(self.d, self.s, k)?,
            (ProblemKind::Linear, Some(k)) => benchmarks::linear(self.d, self.s, k)?,
            (ProblemKind::Quadratic, Some(k)) => benchmarks::quadratic(self.d, self.s, k)?,
            _ => {
                let terms = self
                    .coefficients
                    .iter()
                    .map(|&(l, c)| (l, Coefficient::Constant(c)))
                    .collect();
                let exterior = if self.phi == 0.0 {
                    Exterior::Zero
                } else {
                    Exterior::Constant(self.phi)
                };
                ProblemSpec::new(self.model()?, terms, exterior)?
            }
        };
        match &self.offspring_probs {
            Some(q) => spec
                .with_offspring_probs(q)
                .map_err(|e| Error::config("offspring_probs", e.to_string())),
            None => Ok(spec),
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Io(format!("cannot start worker pool: {e}")))
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::config("<document>", format!("cannot read {}: {e}", path.display())))?;
    RunConfig::from_json(&text)
}

/// One line of the profile CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub radius: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub n: u64,
    pub truncation_fraction: f64,
    pub exact: Option<f64>,
    pub abs_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRun {
    pub rows: Vec<ProfileRow>,
    pub wall_time: Duration,
}

impl ProfileRun {
    pub fn max_abs_error(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.abs_error).reduce(f64::max)
    }

    pub fn max_truncation_fraction(&self) -> f64 {
        self.rows.iter().map(|r| r.truncation_fraction).fold(0.0, f64::max)
    }

    /// Writes the profile as CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the CSV to `path`, removing the file if writing fails.
    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let result = fs::File::create(path)
            .map_err(Error::from)
            .and_then(|f| self.write_csv(std::io::BufWriter::new(f)));
        if result.is_err() {
            let _ = fs::remove_file(path);
        }
        result
    }

    /// One-line summary: maximum error, wall time and degenerate-sample flags.
    pub fn summary(&self) -> String {
        let mut line = match self.max_abs_error() {
            Some(e) => format!("{} radii, max abs_error {e:.6}", self.rows.len()),
            None => format!("{} radii, no exact solution", self.rows.len()),
        };
        line.push_str(&format!(", wall time {:.2} s", self.wall_time.as_secs_f64()));
        let trunc = self.max_truncation_fraction();
        if trunc > 0.0 {
            line.push_str(&format!(", max truncation_fraction {trunc:.3e}"));
        }
        if self.rows.iter().any(|r| r.n < 2) {
            line.push_str(", single sample: stderr reported as 0");
        }
        line
    }
}

/// Estimates `u` on the configured radial grid.
pub fn run_profile(config: &RunConfig) -> Result<ProfileRun> {
    let start = Instant::now();
    let spec = config.build_spec()?;
    let walk = config.walk_params()?;
    let key = RngStream::new(config.seed, 0);
    let points = config
        .pool()?
        .install(|| radial_profile(&spec, &walk, config.limits, &config.grid, config.samples, &key))?;
    let rows = points
        .iter()
        .map(|p| ProfileRow {
            radius: p.radius,
            estimate: p.estimate.mean,
            stderr: p.estimate.stderr,
            n: p.estimate.n,
            truncation_fraction: p.estimate.truncation_fraction,
            exact: p.exact,
            abs_error: p.exact.map(|e| (p.estimate.mean - e).abs()),
        })
        .collect();
    Ok(ProfileRun {
        rows,
        wall_time: start.elapsed(),
    })
}

/// Runs the existence criteria for the configured problem.
pub fn run_check(config: &RunConfig) -> Result<ExistenceReport> {
    let spec = config.build_spec()?;
    let walk = config.walk_params()?;
    let key = RngStream::new(config.seed, 1);
    config
        .pool()?
        .install(|| check_existence(&spec, true, &walk, config.delta_samples, &key))
}

/// Process exit code for an error: 2 for configuration errors, 3 for
/// runtime limits, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => 2,
        Error::Limit(_) => 3,
        _ => 1,
    }
}
