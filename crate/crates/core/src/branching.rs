//! Branching stable particle system and the multiplicative tree functional
//! `H(T_x)` whose expectation represents the solution of
//!
//! ```text
//! Δ_s u(x) + Σ_{l∈L} c_l(x) u(x)^l = u(x),   x ∈ B(0, R),
//! u(x) = φ(x),                              x ∉ B(0, R).
//! ```
//!
//! Every particle lives for an `Exp(1)` clock or until it leaves the ball.
//! A particle leaving the ball contributes `φ(exit position)`. A particle whose
//! clock rings inside the ball picks a degree `l` with probability `q_l`,
//! contributes `c_l(position) / q_l` and is replaced by `l` children at that
//! position. With unit-exponential lifetimes all time weights equal one, so
//! `H` is the plain product of these factors.
//!
//! No tree is stored: the product is accumulated by depth-first recursion.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{phi_radial_sq, BenchmarkParams, PsiSource};
use crate::stable::{sample_exponential_clock, RngStream, StableLaw};
use crate::stats::{try_run_blocks, Accumulator, Estimate};
use crate::walk::{walk_in_place, ExitCause, WalkParams};

/// Number of deterministic points used to estimate `sup |c_l|` over the ball.
pub const SUP_GRID_POINTS: usize = 10_000;

/// Dimension, stability index and ball radius of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub d: usize,
    pub s: f64,
    pub radius: f64,
}

impl ModelParams {
    pub fn new(d: usize, s: f64, radius: f64) -> Result<Self> {
        StableLaw::new(s, d)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!("radius {radius} must be positive")));
        }
        Ok(ModelParams { d, s, radius })
    }

    pub fn law(&self) -> StableLaw {
        StableLaw::new(self.s, self.d).expect("validated in ModelParams::new")
    }

    pub fn walk_params(&self, step: f64) -> Result<WalkParams> {
        WalkParams::new(self.radius, step, self.law())
    }
}

type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A coefficient function `c_l` on the ball.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    /// `Ψ_{k,s}(x) − weight · (1 − |x|²)_+^{exponent}`.
    Benchmark {
        psi: PsiSource,
        weight: f64,
        exponent: f64,
    },
    Custom(PointFn),
}

impl Coefficient {
    pub fn custom(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Custom(Arc::new(f))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match self {
            Coefficient::Constant(c) => Ok(*c),
            Coefficient::Benchmark { psi, weight, exponent } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let mut v = psi.eval_radial_sq(r2)?;
                if *weight != 0.0 && r2 < 1.0 {
                    v -= weight * (1.0 - r2).powf(*exponent);
                }
                Ok(v)
            }
            Coefficient::Custom(f) => Ok(f(x)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coefficient::Constant(c) if *c == 0.0)
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Benchmark { psi, weight, exponent } => write!(
                f,
                "Benchmark(Ψ{:?} − {weight}·Φ^{exponent})",
                psi.params()
            ),
            Coefficient::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Exterior condition `φ` on `ℝ^d \ B(0, R)`.
#[derive(Clone)]
pub enum Exterior {
    Zero,
    Constant(f64),
    /// Arbitrary bounded function with a caller-supplied bound on `|φ|`.
    Custom { f: PointFn, sup: f64 },
}

impl Exterior {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Exterior::Zero => 0.0,
            Exterior::Constant(c) => *c,
            Exterior::Custom { f, .. } => f(x),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Exterior::Zero => 0.0,
            Exterior::Constant(c) => c.abs(),
            Exterior::Custom { sup, .. } => sup.abs(),
        }
    }
}

impl fmt::Debug for Exterior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exterior::Zero => write!(f, "Zero"),
            Exterior::Constant(c) => write!(f, "Constant({c})"),
            Exterior::Custom { sup, .. } => write!(f, "Custom(sup = {sup})"),
        }
    }
}

/// One term `c_l(x) u^l` of the nonlinearity with its offspring probability `q_l`.
#[derive(Debug, Clone)]
pub struct Term {
    pub degree: u32,
    pub coefficient: Coefficient,
    pub sup_norm: f64,
    pub prob: f64,
}

/// Problem data: model, nonlinearity terms with offspring law, exterior
/// condition, and (for builtin benchmarks) the exact solution.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    model: ModelParams,
    terms: Vec<Term>,
    exterior: Exterior,
    exact: Option<BenchmarkParams>,
    cumulative: Vec<f64>,
}

/// `sup |c|` over a deterministic grid of the closed ball: 100 radii
/// `R·i/99` times 100 fixed directions (the coordinate axes first, the rest
/// from a fixed-seed stream).
pub fn grid_sup_norm(c: &Coefficient, model: &ModelParams) -> Result<f64> {
    if let Coefficient::Constant(v) = c {
        return Ok(v.abs());
    }
    let d = model.d;
    let n_dirs = 100;
    let n_radii = SUP_GRID_POINTS / n_dirs;
    let mut dirs = Vec::with_capacity(n_dirs);
    for i in 0..d.min(n_dirs) {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        dirs.push(e);
    }
    let mut rng = RngStream::new(0x5eed, 0);
    while dirs.len() < n_dirs {
        let mut v: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        dirs.push(v);
    }
    let r2_max = model.radius * model.radius;
    let mut sup = 0.0f64;
    let mut x = vec![0.0; d];
    for i in 0..n_radii {
        let r = model.radius * i as f64 / (n_radii - 1) as f64;
        for dir in &dirs {
            for (xi, di) in x.iter_mut().zip(dir) {
                *xi = r * di;
            }
            // Rounding can push r·dir just past the sphere.
            let r2: f64 = x.iter().map(|v| v * v).sum();
            if r2 > r2_max {
                let shrink = model.radius / r2.sqrt();
                x.iter_mut().for_each(|v| *v *= shrink * (1.0 - f64::EPSILON));
            }
            sup = sup.max(c.eval(&x)?.abs());
        }
    }
    Ok(sup)
}

impl ProblemSpec {
    /// Builds a problem with offspring probabilities `q_l ∝ sup |c_l|`.
    /// Terms whose coefficient vanishes on the grid are dropped from `L`.
    pub fn new(model: ModelParams, terms: Vec<(u32, Coefficient)>, exterior: Exterior) -> Result<Self> {
        let mut built = Vec::with_capacity(terms.len());
        for (degree, coefficient) in terms {
            if built.iter().any(|t: &Term| t.degree == degree) {
                return Err(Error::domain(format!("degree {degree} listed twice")));
            }
            let sup_norm = grid_sup_norm(&coefficient, &model)?;
            if !sup_norm.is_finite() {
                return Err(Error::domain(format!("coefficient c_{degree} is unbounded")));
            }
            built.push(Term {
                degree,
                coefficient,
                sup_norm,
                prob: 0.0,
            });
        }
        built.retain(|t| t.sup_norm > 0.0);
        let total: f64 = built.iter().map(|t| t.sup_norm).sum();
        for t in &mut built {
            t.prob = t.sup_norm / total;
        }
        built.sort_by_key(|t| t.degree);
        let mut spec = ProblemSpec {
            model,
            terms: built,
            exterior,
            exact: None,
            cumulative: Vec::new(),
        };
        spec.rebuild_cumulative();
        Ok(spec)
    }

    /// Replaces the offspring law. Every listed degree must already be a term,
    /// every term must receive a positive probability, and the total must be 1.
    pub fn with_offspring_probs(mut self, probs: &[(u32, f64)]) -> Result<Self> {
        for &(deg, q) in probs {
            if !(q > 0.0 && q <= 1.0) {
                return Err(Error::domain(format!("q_{deg} = {q} must lie in (0, 1]")));
            }
            if !self.terms.iter().any(|t| t.degree == deg) {
                return Err(Error::domain(format!("q_{deg} given for a degree not in L")));
            }
        }
        for t in &mut self.terms {
            t.prob = probs
                .iter()
                .find(|(d, _)| *d == t.degree)
                .map(|&(_, q)| q)
                .ok_or_else(|| Error::domain(format!("missing q_{}", t.degree)))?;
        }
        let total: f64 = self.terms.iter().map(|t| t.prob).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("offspring probabilities sum to {total}, not 1")));
        }
        self.rebuild_cumulative();
        Ok(self)
    }

    /// Keeps every listed term in `L`, even when its coefficient vanishes,
    /// with the given offspring law.
    pub fn with_terms_and_probs(
        model: ModelParams,
        terms: Vec<(u32, Coefficient, f64)>,
        exterior: Exterior,
    ) -> Result<Self> {
        let mut built = Vec::with_capacity(terms.len());
        for (degree, coefficient, _) in &terms {
            built.push(Term {
                degree: *degree,
                sup_norm: grid_sup_norm(coefficient, &model)?,
                coefficient: coefficient.clone(),
                prob: 0.0,
            });
        }
        built.sort_by_key(|t| t.degree);
        let spec = ProblemSpec {
            model,
            terms: built,
            exterior,
            exact: None,
            cumulative: Vec::new(),
        };
        let probs: Vec<(u32, f64)> = terms.iter().map(|(d, _, q)| (*d, *q)).collect();
        spec.with_offspring_probs(&probs)
    }

    fn rebuild_cumulative(&mut self) {
        let mut acc = 0.0;
        self.cumulative = self
            .terms
            .iter()
            .map(|t| {
                acc += t.prob;
                acc
            })
            .collect();
    }

    pub fn model(&self) -> &ModelParams {
        &self.model
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn exterior(&self) -> &Exterior {
        &self.exterior
    }

    /// Exact solution parameters when this is a builtin benchmark.
    pub fn exact_solution(&self) -> Option<BenchmarkParams> {
        self.exact
    }

    pub fn exact_at(&self, x: &[f64]) -> Option<f64> {
        let r2 = x.iter().map(|v| v * v).sum();
        self.exact.map(|p| phi_radial_sq(r2, p))
    }

    pub fn offspring_probs(&self) -> Vec<(u32, f64)> {
        self.terms.iter().map(|t| (t.degree, t.prob)).collect()
    }
}

/// Builtin problems on the unit ball whose exact solution is `Φ_{k,s}`.
pub mod benchmarks {
    use super::*;

    fn setup(d: usize, s: f64, k: u32) -> Result<(ModelParams, PsiSource, BenchmarkParams)> {
        let model = ModelParams::new(d, s, 1.0)?;
        let params = BenchmarkParams::new(k, s, d);
        Ok((model, PsiSource::new(params)?, params))
    }

    fn finish(mut spec: ProblemSpec, params: BenchmarkParams) -> ProblemSpec {
        spec.exact = Some(params);
        spec
    }

    /// `Δ_s u + Ψ_{k,s} = 0` in the ball, `u = 0` outside:
    /// `c_0 = Ψ_{k,s}`, `c_1 = 1`.
    pub fn dirichlet(d: usize, s: f64, k: u32) -> Result<ProblemSpec> {
        let (model, psi, params) = setup(d, s, k)?;
        let terms = vec![
            (0, Coefficient::Benchmark { psi, weight: 0.0, exponent: 0.0 }),
            (1, Coefficient::Constant(1.0)),
        ];
        Ok(finish(ProblemSpec::new(model, terms, Exterior::Zero)?, params))
    }

    /// `Δ_s u + Ψ_{k,s} − Φ_{k,s} + u = 0` in the ball, `u = 0` outside:
    /// `c_0 = Ψ_{k,s} − Φ_{k,s}`, `c_1 = 2`.
    pub fn linear(d: usize, s: f64, k: u32) -> Result<ProblemSpec> {
        let (model, psi, params) = setup(d, s, k)?;
        let terms = vec![
            (
                0,
                Coefficient::Benchmark { psi, weight: 1.0, exponent: k as f64 + s },
            ),
            (1, Coefficient::Constant(2.0)),
        ];
        Ok(finish(ProblemSpec::new(model, terms, Exterior::Zero)?, params))
    }

    /// `Δ_s u + Ψ_{k,s} − Φ_{k,s}² + u² = 0` in the ball, `u = 0` outside:
    /// `c_0 = Ψ_{k,s} − Φ_{k,s}²`, `c_1 = 1`, `c_2 = 1`.
    pub fn quadratic(d: usize, s: f64, k: u32) -> Result<ProblemSpec> {
        let (model, psi, params) = setup(d, s, k)?;
        let terms = vec![
            (
                0,
                Coefficient::Benchmark { psi, weight: 1.0, exponent: 2.0 * (k as f64 + s) },
            ),
            (1, Coefficient::Constant(1.0)),
            (2, Coefficient::Constant(1.0)),
        ];
        Ok(finish(ProblemSpec::new(model, terms, Exterior::Zero)?, params))
    }
}

/// Size limits on a simulated tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TreeLimits {
    pub max_generation: u32,
    pub max_particles: u64,
}

impl Default for TreeLimits {
    fn default() -> Self {
        TreeLimits {
            max_generation: 50,
            max_particles: 1_000_000,
        }
    }
}

/// One realization of `H(T_x)` with tree statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreeSample {
    pub h_value: f64,
    pub particles: u64,
    pub max_generation: u32,
    pub truncated: bool,
}

/// Picks a degree `l ∈ L` with probability `q_l`. An empty `L` has no degree.
pub fn sample_offspring(spec: &ProblemSpec, rng: &mut RngStream) -> Option<u32> {
    sample_term_index(spec, rng).map(|i| spec.terms[i].degree)
}

fn sample_term_index(spec: &ProblemSpec, rng: &mut RngStream) -> Option<usize> {
    let last = spec.terms.len().checked_sub(1)?;
    let u = rng.uniform();
    Some(spec.cumulative.iter().position(|&c| u < c).unwrap_or(last))
}

/// Draws made by one particle. Abstracted so the product rule can be
/// checked against scripted trees.
pub trait ParticleDriver {
    /// Runs a particle from `pos` (updated in place to its end position).
    fn run(&mut self, pos: &mut [f64]) -> Result<ExitCause>;
    /// Index into the problem's term list chosen at a clock ring.
    fn choose_term(&mut self, spec: &ProblemSpec) -> Option<usize>;
}

struct StableDriver<'a> {
    walk: &'a WalkParams,
    rng: &'a mut RngStream,
}

impl ParticleDriver for StableDriver<'_> {
    fn run(&mut self, pos: &mut [f64]) -> Result<ExitCause> {
        let clock = sample_exponential_clock(self.rng);
        if clock <= 0.0 {
            return Ok(ExitCause::ClockRing);
        }
        Ok(walk_in_place(pos, clock, self.walk, self.rng)?.1)
    }

    fn choose_term(&mut self, spec: &ProblemSpec) -> Option<usize> {
        sample_term_index(spec, self.rng)
    }
}

struct TreeState {
    particles: u64,
    max_generation: u32,
    truncated: bool,
    limits: TreeLimits,
}

fn particle_value<D: ParticleDriver>(
    spec: &ProblemSpec,
    driver: &mut D,
    start: &[f64],
    generation: u32,
    state: &mut TreeState,
) -> Result<f64> {
    if generation > state.limits.max_generation || state.particles >= state.limits.max_particles {
        state.truncated = true;
        return Ok(0.0);
    }
    state.particles += 1;
    state.max_generation = state.max_generation.max(generation);

    let mut pos = start.to_vec();
    match driver.run(&mut pos)? {
        ExitCause::BallExit => Ok(spec.exterior.eval(&pos)),
        ExitCause::ClockRing => {
            let Some(idx) = driver.choose_term(spec) else {
                // f ≡ 0: the ring contributes a zero factor.
                return Ok(0.0);
            };
            let term = &spec.terms[idx];
            let mut product = term.coefficient.eval(&pos)? / term.prob;
            for _ in 0..term.degree {
                product *= particle_value(spec, driver, &pos, generation + 1, state)?;
            }
            Ok(product)
        }
    }
}

/// Evaluates `H(T_x)` on a tree whose draws come from `driver`.
pub fn evaluate_tree<D: ParticleDriver>(
    x: &[f64],
    spec: &ProblemSpec,
    limits: TreeLimits,
    driver: &mut D,
) -> Result<TreeSample> {
    let mut state = TreeState {
        particles: 0,
        max_generation: 0,
        truncated: false,
        limits,
    };
    let h = particle_value(spec, driver, x, 0, &mut state)?;
    Ok(TreeSample {
        h_value: if state.truncated { 0.0 } else { h },
        particles: state.particles,
        max_generation: state.max_generation,
        truncated: state.truncated,
    })
}

fn check_inside(x: &[f64], spec: &ProblemSpec) -> Result<()> {
    if x.len() != spec.model.d {
        return Err(Error::Precondition(format!(
            "point has dimension {}, problem has {}",
            x.len(),
            spec.model.d
        )));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 >= spec.model.radius * spec.model.radius {
        return Err(Error::Precondition("root must lie inside the ball".into()));
    }
    Ok(())
}

/// Simulates one random tree rooted at `x` and returns `H(T_x)`.
///
/// If a limit is hit the whole sample is flagged as truncated and its value
/// is set to 0.
pub fn simulate_tree(
    x: &[f64],
    spec: &ProblemSpec,
    walk: &WalkParams,
    limits: TreeLimits,
    rng: &mut RngStream,
) -> Result<TreeSample> {
    check_inside(x, spec)?;
    evaluate_tree(x, spec, limits, &mut StableDriver { walk, rng })
}

/// Monte-Carlo estimate of `u(x) = E[H(T_x)]` from `n` independent trees.
///
/// Outside the ball `u = φ` is returned exactly. Trees are simulated in fixed
/// blocks on derived streams of `key`, so the result does not depend on the
/// rayon pool size.
pub fn estimate_u(
    x: &[f64],
    spec: &ProblemSpec,
    walk: &WalkParams,
    limits: TreeLimits,
    n: u64,
    key: &RngStream,
) -> Result<Estimate> {
    if n == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    if x.len() != spec.model.d {
        return Err(Error::Precondition(format!(
            "point has dimension {}, problem has {}",
            x.len(),
            spec.model.d
        )));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 >= spec.model.radius * spec.model.radius {
        return Ok(Estimate::exact(spec.exterior.eval(x), n));
    }
    let acc = try_run_blocks(n, key, |rng, count| {
        let mut acc = Accumulator::new();
        for _ in 0..count {
            let t = evaluate_tree(x, spec, limits, &mut StableDriver { walk, rng: &mut *rng })?;
            acc.push_truncated(t.h_value, t.truncated);
        }
        Ok::<_, Error>(acc)
    })?;
    Ok(acc.estimate())
}

/// Estimate of `u` at one radius of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub radius: f64,
    pub estimate: Estimate,
    pub exact: Option<f64>,
}

/// Evaluates `u` at `x = (r, 0, ..., 0)` for each radius. Radius `i` uses
/// substream `i` of `key`.
pub fn radial_profile(
    spec: &ProblemSpec,
    walk: &WalkParams,
    limits: TreeLimits,
    radii: &[f64],
    n: u64,
    key: &RngStream,
) -> Result<Vec<ProfilePoint>> {
    let r_max = spec.model.radius;
    if let Some(&bad) = radii.iter().find(|&&r| !(0.0..r_max).contains(&r)) {
        return Err(Error::domain(format!("profile radius {bad} outside [0, {r_max})")));
    }
    radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let mut x = vec![0.0; spec.model.d];
            x[0] = r;
            let estimate = estimate_u(&x, spec, walk, limits, n, &key.substream(i as u64))?;
            Ok(ProfilePoint {
                radius: r,
                estimate,
                exact: spec.exact_at(&x),
            })
        })
        .collect()
}
