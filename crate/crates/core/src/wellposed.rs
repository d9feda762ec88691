//! Sufficient conditions for the tree functional to be bounded in `L^p`,
//! which gives existence of a continuous viscosity solution.
//!
//! * Small data: `C₀ = max(|φ|_∞, Σ_l |c_l|_∞) ≤ 1` makes `|H| ≤ 1`.
//! * Otherwise the branching process is dominated by a Galton–Watson process
//!   with generating function `f̃(σ) = Σ q̃_l σ^l`, where a particle dies in
//!   the interior with probability at most
//!   `δ = 1 − inf_x E[exp(−τ^B(x))]`. With `s*` the root of `σ f̃′(σ) = f̃(σ)`
//!   and `γ = s*/f̃(s*)`, the bound holds for every `p > 1` with `C₀ < γ^{1/p}`.

use serde::{Serialize, Serializer};

use crate::branching::{ProblemSpec, Term};
use crate::error::{Error, Result};
use crate::stable::RngStream;
use crate::walk::{survival_factor, WalkParams};

/// Number of radii in the grid approximating the infimum defining `δ`.
pub const DELTA_GRID_POINTS: usize = 11;

/// `C₀ = max(|φ|_∞, Σ_l |c_l|_∞)`.
pub fn c0_constant(spec: &ProblemSpec) -> f64 {
    let coeff = spec.terms().iter().fold(0.0, |acc, t| acc + t.sup_norm);
    spec.exterior().sup_norm().max(coeff)
}

/// Estimate of `δ` and the survival factors it was taken from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaEstimate {
    pub delta: f64,
    pub stderr: f64,
    /// Radius at which `E[exp(−τ^B)]` was smallest.
    pub argmin_radius: f64,
    /// `(radius, E[exp(−τ^B)], stderr)` on the grid.
    pub survival: Vec<(f64, f64, f64)>,
}

/// `δ = 1 − min_r E[exp(−τ^B(r e₁))]` over the radii `R·i/11`, `i = 0..10`.
/// Every radius reuses the streams of `key`, so the walks from different
/// starting points are driven by the same increments and their comparison
/// is not swamped by independent noise.
pub fn estimate_delta(walk: &WalkParams, n: u64, key: &RngStream) -> Result<DeltaEstimate> {
    let d = walk.law().dim();
    let mut survival = Vec::with_capacity(DELTA_GRID_POINTS);
    for i in 0..DELTA_GRID_POINTS {
        let r = walk.radius() * i as f64 / DELTA_GRID_POINTS as f64;
        let mut x = vec![0.0; d];
        x[0] = r;
        let e = survival_factor(&x, walk, n, key)?;
        survival.push((r, e.mean, e.stderr));
    }
    let &(argmin_radius, min, stderr) = survival
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is non-empty");
    Ok(DeltaEstimate {
        delta: (1.0 - min).clamp(0.0, 1.0),
        stderr,
        argmin_radius,
        survival,
    })
}

/// Offspring law `q̃` of the dominating Galton–Watson process.
#[derive(Debug, Clone, PartialEq)]
pub struct DominatingPgf {
    probs: Vec<(u32, f64)>,
    delta: f64,
}

impl DominatingPgf {
    /// Takes `(degree, q̃_degree)` pairs directly.
    pub fn new(probs: Vec<(u32, f64)>, delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::domain(format!("delta = {delta} outside [0, 1]")));
        }
        if probs.iter().any(|&(_, q)| !(0.0..=1.0).contains(&q)) {
            return Err(Error::domain("pgf probabilities must lie in [0, 1]"));
        }
        let total: f64 = probs.iter().map(|p| p.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("pgf probabilities sum to {total}")));
        }
        let mut probs = probs;
        probs.sort_by_key(|p| p.0);
        Ok(DominatingPgf { probs, delta })
    }

    /// `q̃₀ = 1 − δ + δ|c₀|_∞/Σ|c_l|_∞` and `q̃_k = δ|c_k|_∞/Σ|c_l|_∞` for `k ≥ 1`.
    pub fn from_sup_norms(sups: &[(u32, f64)], delta: f64) -> Result<Self> {
        let total: f64 = sups.iter().map(|s| s.1).sum();
        if !(total > 0.0) {
            return Err(Error::domain("dominating pgf needs a nonzero coefficient"));
        }
        let mut probs: Vec<(u32, f64)> = sups
            .iter()
            .filter(|s| s.0 > 0)
            .map(|&(l, c)| (l, delta * c / total))
            .collect();
        let c_zero: f64 = sups.iter().filter(|s| s.0 == 0).map(|s| s.1).sum();
        probs.push((0, 1.0 - delta + delta * c_zero / total));
        let norm: f64 = probs.iter().map(|p| p.1).sum();
        probs.iter_mut().for_each(|p| p.1 /= norm);
        DominatingPgf::new(probs, delta)
    }

    pub fn from_terms(terms: &[Term], delta: f64) -> Result<Self> {
        let sups: Vec<(u32, f64)> = terms.iter().map(|t| (t.degree, t.sup_norm)).collect();
        Self::from_sup_norms(&sups, delta)
    }

    pub fn probs(&self) -> &[(u32, f64)] {
        &self.probs
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn prob_of(&self, degree: u32) -> f64 {
        self.probs.iter().filter(|p| p.0 == degree).map(|p| p.1).sum()
    }

    pub fn max_degree(&self) -> u32 {
        self.probs.iter().filter(|p| p.1 > 0.0).map(|p| p.0).max().unwrap_or(0)
    }

    /// `f̃(σ)`.
    pub fn eval(&self, sigma: f64) -> f64 {
        self.probs.iter().map(|&(l, q)| q * sigma.powi(l as i32)).sum()
    }

    /// `f̃′(σ)`.
    pub fn derivative(&self, sigma: f64) -> f64 {
        self.probs
            .iter()
            .filter(|p| p.0 > 0)
            .map(|&(l, q)| l as f64 * q * sigma.powi(l as i32 - 1))
            .sum()
    }

    /// `σ f̃′(σ) − f̃(σ) = Σ (l − 1) q̃_l σ^l`, summed without cancellation.
    pub fn tangency_gap(&self, sigma: f64) -> f64 {
        self.probs
            .iter()
            .map(|&(l, q)| (l as f64 - 1.0) * q * sigma.powi(l as i32))
            .sum()
    }
}

/// Tangency point `s*` and threshold `γ(s*) = s*/f̃(s*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaStar {
    /// `+∞` when `f̃` has degree at most 1.
    pub s_star: f64,
    pub gamma: f64,
}

/// Solves `σ f̃′(σ) = f̃(σ)` on `σ > 0` by bracketing and bisection to full
/// double precision. Returns `None` when the equation is degenerate
/// (`q̃₀ = 0`), which includes the pure degree-1 law where the gap vanishes
/// identically.
pub fn gamma_star(pgf: &DominatingPgf) -> Option<GammaStar> {
    let q0 = pgf.prob_of(0);
    if q0 <= 0.0 {
        return None;
    }
    if pgf.max_degree() <= 1 {
        let q1 = pgf.prob_of(1);
        let gamma = if q1 > 0.0 { 1.0 / q1 } else { f64::INFINITY };
        return Some(GammaStar {
            s_star: f64::INFINITY,
            gamma,
        });
    }
    // gap(0) = −q̃₀ < 0 and gap → +∞.
    let mut lo = 0.0;
    let mut hi = 1.0;
    while pgf.tangency_gap(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return None;
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pgf.tangency_gap(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s_star = if pgf.tangency_gap(hi).abs() < pgf.tangency_gap(lo).abs() { hi } else { lo };
    Some(GammaStar {
        s_star,
        gamma: s_star / pgf.eval(s_star),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// `C₀ ≤ 1`: `|H| ≤ 1` uniformly.
    SmallData,
    /// `1 < C₀ < γ(s*)`: `L^p` bound for every `1 < p < p*`.
    LpBound,
    /// Neither criterion applies.
    Inconclusive,
}

fn extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("nan")
    }
}

fn extended_opt<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => extended(v, s),
        None => s.serialize_none(),
    }
}

/// Outcome of the existence check. Infinite values serialize as `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceReport {
    pub c0: f64,
    pub delta: Option<f64>,
    pub delta_stderr: Option<f64>,
    /// `min(1, δ + 3·stderr)`, the value used to build `q̃`.
    pub delta_used: Option<f64>,
    #[serde(serialize_with = "extended_opt")]
    pub s_star: Option<f64>,
    #[serde(serialize_with = "extended_opt")]
    pub gamma: Option<f64>,
    #[serde(serialize_with = "extended_opt")]
    pub p_star: Option<f64>,
    pub verdict: Verdict,
}

/// Verdict from `C₀` and `γ(s*)`, with the supremal admissible exponent
/// `p* = ln γ / ln C₀` when `1 < C₀ < γ`.
pub fn classify(c0: f64, gamma: Option<f64>) -> (Verdict, Option<f64>) {
    if c0 <= 1.0 {
        return (Verdict::SmallData, None);
    }
    match gamma {
        Some(g) if c0 < g => (Verdict::LpBound, Some(g.ln() / c0.ln())),
        _ => (Verdict::Inconclusive, None),
    }
}

/// Runs the existence criteria for `spec`. `δ` is only estimated (with `n`
/// walk-to-exit samples per grid radius) when `C₀ > 1`; the `q̃` law is built
/// from the conservative `δ + 3·stderr`. `p_star` is reported when
/// `report_p` is set.
pub fn check_existence(
    spec: &ProblemSpec,
    report_p: bool,
    walk: &WalkParams,
    n: u64,
    key: &RngStream,
) -> Result<ExistenceReport> {
    let c0 = c0_constant(spec);
    if c0 <= 1.0 {
        return Ok(ExistenceReport {
            c0,
            delta: None,
            delta_stderr: None,
            delta_used: None,
            s_star: None,
            gamma: None,
            p_star: None,
            verdict: Verdict::SmallData,
        });
    }
    let est = estimate_delta(walk, n, key)?;
    let delta_used = (est.delta + 3.0 * est.stderr).min(1.0);
    let star = if spec.terms().is_empty() {
        // f ≡ 0 and |φ|_∞ > 1: H = φ(exit) or 0, bounded by C₀ in every L^p.
        Some(GammaStar {
            s_star: f64::INFINITY,
            gamma: f64::INFINITY,
        })
    } else {
        gamma_star(&DominatingPgf::from_terms(spec.terms(), delta_used)?)
    };
    let (verdict, p_star) = classify(c0, star.map(|g| g.gamma));
    Ok(ExistenceReport {
        c0,
        delta: Some(est.delta),
        delta_stderr: Some(est.stderr),
        delta_used: Some(delta_used),
        s_star: star.map(|g| g.s_star),
        gamma: star.map(|g| g.gamma),
        p_star: if report_p { p_star } else { None },
        verdict,
    })
}
