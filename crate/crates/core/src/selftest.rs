//! Fast statistical and algebraic self-checks, run by `fracbranch selftest`.
//!
//! Each check uses a fixed seed and takes at most a few seconds on one core.

use rand::Rng;

use crate::branching::{estimate_u, Coefficient, Exterior, ModelParams, ProblemSpec, TreeLimits};
use crate::error::Result;
use crate::special::{gamma, hyp2f1, HypergeometricArgs};
use crate::stable::{sample_stable_increment, sample_subordinator, RngStream, StableLaw};
use crate::stats::Accumulator;
use crate::walk::survival_factor;
use crate::wellposed::{gamma_star, DominatingPgf};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed, detail }
}

/// `Γ(x+1) = xΓ(x)` to `1e-12` relative error on 1000 points in `(0.1, 20)`.
pub fn gamma_recurrence() -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let x = 0.1 + 19.9 * (i as f64 + 0.5) / 1000.0;
        let lhs = gamma(x + 1.0)?;
        let rhs = x * gamma(x)?;
        worst = worst.max(((lhs - rhs) / rhs).abs());
    }
    Ok(outcome("gamma recurrence", worst < 1e-12, format!("max rel err {worst:.2e}")))
}

/// Terminating `₂F₁(a, −k; c; z)` against its `k+1`-term polynomial on 100
/// random `(a, c, z, k)`, to `1e-13` relative to the sum of absolute terms
/// (the polynomial is ill-conditioned where its terms cancel).
pub fn terminating_hyp2f1(seed: u64) -> Result<CheckOutcome> {
    let mut rng = RngStream::new(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = rng.random_range(-3.0..3.0);
        let c = rng.random_range(0.1..5.0);
        let z = rng.random_range(-1.0..1.0);
        let k: u32 = rng.random_range(0..=20);
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut scale = 1.0;
        for n in 0..k {
            let n = n as f64;
            term *= (a + n) * (n - k as f64) / ((c + n) * (n + 1.0)) * z;
            sum += term;
            scale += term.abs();
        }
        let got = hyp2f1(HypergeometricArgs::new(a, -(k as f64), c, z))?;
        worst = worst.max((got - sum).abs() / scale);
    }
    Ok(outcome("terminating 2F1", worst < 1e-13, format!("max rel err {worst:.2e}")))
}

/// `E[exp(−λ S_1)] = exp(−(2λ)^s)` within 4 standard errors.
pub fn subordinator_laplace(seed: u64) -> Result<CheckOutcome> {
    let n = 100_000;
    let law = StableLaw::new(0.875, 1)?;
    let lambdas = [0.5, 1.0, 2.0];
    let mut accs = [Accumulator::new(); 3];
    let mut rng = RngStream::new(seed, 1);
    for _ in 0..n {
        let v = sample_subordinator(1.0, &law, &mut rng)?;
        for (acc, &l) in accs.iter_mut().zip(&lambdas) {
            acc.push((-l * v).exp());
        }
    }
    let mut passed = true;
    let mut worst: f64 = 0.0;
    for (acc, &l) in accs.iter().zip(&lambdas) {
        let e = acc.estimate();
        let z = (e.mean - (-law.laplace_exponent(l)).exp()).abs() / e.stderr;
        worst = worst.max(z);
        passed &= z <= 4.0;
    }
    Ok(outcome("subordinator Laplace transform", passed, format!("max |z| {worst:.2}")))
}

/// `E[cos(ξ X_t)] = exp(−t |ξ|^{2s})` at `t = 0.5`, `ξ = 1`, within 4 standard errors.
pub fn increment_characteristic_function(seed: u64) -> Result<CheckOutcome> {
    let law = StableLaw::new(0.875, 1)?;
    let mut rng = RngStream::new(seed, 2);
    let mut acc = Accumulator::new();
    for _ in 0..100_000 {
        acc.push(sample_stable_increment(0.5, &law, &mut rng)?[0].cos());
    }
    let e = acc.estimate();
    let z = (e.mean - (-0.5f64).exp()).abs() / e.stderr;
    Ok(outcome("increment characteristic function", z <= 4.0, format!("|z| {z:.2}")))
}

/// With `L = {0}`, `c₀ ≡ 0`, `φ ≡ 1` the tree functional is the indicator of
/// exiting before the clock, whose mean is `E[exp(−τ^B)]`.
pub fn representation_consistency(seed: u64) -> Result<CheckOutcome> {
    let n = 10_000;
    let model = ModelParams::new(1, 0.875, 1.0)?;
    let walk = model.walk_params(1e-3)?;
    let spec = ProblemSpec::with_terms_and_probs(
        model,
        vec![(0, Coefficient::Constant(0.0), 1.0)],
        Exterior::Constant(1.0),
    )?;
    let tree = estimate_u(&[0.0], &spec, &walk, TreeLimits::default(), n, &RngStream::new(seed, 3))?;
    let exit = survival_factor(&[0.0], &walk, n, &RngStream::new(seed, 4))?;
    let joint = (tree.stderr.powi(2) + exit.stderr.powi(2)).sqrt();
    let z = (tree.mean - exit.mean).abs() / joint;
    Ok(outcome(
        "tree vs survival factor",
        z <= 4.0,
        format!("{:.4} vs {:.4}, |z| {z:.2}", tree.mean, exit.mean),
    ))
}

/// Closed-form tangency points of binary laws.
pub fn gamma_star_examples() -> Result<CheckOutcome> {
    let a = gamma_star(&DominatingPgf::new(vec![(0, 0.5), (2, 0.5)], 0.5)?);
    let b = gamma_star(&DominatingPgf::new(vec![(0, 0.9), (2, 0.1)], 0.5)?);
    let passed = matches!(a, Some(g) if (g.s_star - 1.0).abs() < 1e-12 && (g.gamma - 1.0).abs() < 1e-12)
        && matches!(b, Some(g) if (g.gamma - 5.0 / 3.0).abs() < 1e-12);
    Ok(outcome("gamma_star examples", passed, format!("{a:?}, {b:?}")))
}

/// Runs every check with the given seed.
pub fn run_all(seed: u64) -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        gamma_recurrence()?,
        terminating_hyp2f1(seed)?,
        subordinator_laplace(seed)?,
        increment_characteristic_function(seed)?,
        representation_consistency(seed)?,
        gamma_star_examples()?,
    ])
}
