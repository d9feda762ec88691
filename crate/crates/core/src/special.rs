//! Gamma and Gauss hypergeometric functions, and the closed-form benchmark pair
//! `Φ_{k,s}(x) = (1 - |x|²)^{k+s}_+` with its fractional Laplacian `Δ_s Φ_{k,s} = -Ψ_{k,s}`.
//!
//! Everything here is self-contained `f64` arithmetic. The gamma function is a
//! Lanczos approximation (g = 607/128, 15 terms) with reflection for `x < 1/2`;
//! `₂F₁` is summed as a power series, switching to the `1 - z` connection formula
//! close to `z = 1` where the direct series converges too slowly.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;

const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_048_8e-4,
    2.174_396_181_152_126_5e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_275e-5,
    -2.619_083_840_158_140_7e-5,
    3.689_918_265_953_162e-6,
];

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Maximum number of series terms before `hyp2f1` gives up.
pub const HYP2F1_MAX_TERMS: usize = 10_000;

/// Argument threshold above which `hyp2f1` uses the `1 - z` connection formula.
const CONNECTION_THRESHOLD: f64 = 0.9;

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// `sin(πx)` with exact argument reduction, so zeros and extrema of
/// the reflection formula stay sharp for large `|x|`.
fn sin_pi(x: f64) -> f64 {
    let r = x % 2.0;
    let r = if r > 1.0 {
        r - 2.0
    } else if r < -1.0 {
        r + 2.0
    } else {
        r
    };
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    if r.abs() == 0.5 {
        return r.signum();
    }
    (PI * r).sin()
}

fn lanczos_gamma(x: f64) -> f64 {
    // Valid for x >= 1/2.
    let mut ser = LANCZOS_COEF[0];
    for (j, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        ser += c / (x + j as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    // Split the power to keep intermediate values finite near the f64 range.
    let half = t.powf(0.5 * (x + 0.5));
    SQRT_2PI * ser / x * half * (half * (-t).exp())
}

/// Gamma function `Γ(x)` for real `x` outside the poles `{0, -1, -2, ...}`.
///
/// Positive integers up to 170 are returned as exact factorial products.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("gamma: NaN argument"));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::domain(format!("gamma: pole at {x}")));
    }
    if x == x.round() && x <= 171.0 {
        let mut acc = 1.0;
        let mut i = 2.0;
        while i < x {
            acc *= i;
            i += 1.0;
        }
        return Ok(acc);
    }
    if x < 0.5 {
        let g = lanczos_gamma(1.0 - x);
        return Ok(PI / (sin_pi(x) * g));
    }
    Ok(lanczos_gamma(x))
}

/// `1/Γ(x)`, which is entire: zero at the poles of `Γ`.
pub fn recip_gamma(x: f64) -> f64 {
    match gamma(x) {
        Ok(g) => 1.0 / g,
        Err(_) => 0.0,
    }
}

/// Parameters of a Gauss hypergeometric evaluation `₂F₁(a, b; c; z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeometricArgs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub z: f64,
}

impl HypergeometricArgs {
    pub fn new(a: f64, b: f64, c: f64, z: f64) -> Self {
        HypergeometricArgs { a, b, c, z }
    }
}

/// Terminating sum when `b = -n`: the degree-`n` polynomial in `z`.
fn terminating_sum(a: f64, n: u64, c: f64, z: f64) -> f64 {
    let b = -(n as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 0..n {
        let jf = j as f64;
        term *= (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0)) * z;
        sum += term;
    }
    sum
}

fn power_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut small_run = 0;
    for j in 0..HYP2F1_MAX_TERMS {
        let jf = j as f64;
        term *= (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0)) * z;
        sum += term;
        if term.abs() <= 1e-16 * sum.abs() {
            small_run += 1;
            if small_run == 2 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::domain(format!(
        "hyp2f1({a}, {b}; {c}; {z}): series did not converge in {HYP2F1_MAX_TERMS} terms"
    )))
}

/// Gauss hypergeometric function `₂F₁(a, b; c; z)` for real arguments.
///
/// When `a` or `b` is a non-positive integer the series terminates and is
/// summed exactly for any `z`. Otherwise `|z| ≤ 1` is required; `z = 1` uses
/// Gauss's summation theorem (needs `c - a - b > 0`) and `z > 0.9` the `1 - z`
/// connection formula when `c - a - b` is not an integer.
pub fn hyp2f1(args: HypergeometricArgs) -> Result<f64> {
    let HypergeometricArgs { a, b, c, z } = args;
    if [a, b, c, z].iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("hyp2f1: non-finite argument"));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::domain(format!("hyp2f1: c = {c} is a pole")));
    }
    if is_nonpositive_integer(b) {
        return Ok(terminating_sum(a, (-b) as u64, c, z));
    }
    if is_nonpositive_integer(a) {
        return Ok(terminating_sum(b, (-a) as u64, c, z));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z.abs() > 1.0 {
        return Err(Error::domain(format!(
            "hyp2f1: |z| = {} > 1 outside the series domain",
            z.abs()
        )));
    }
    let excess = c - a - b;
    if z == 1.0 {
        if excess <= 0.0 {
            return Err(Error::domain(format!(
                "hyp2f1: divergent at z = 1 since c - a - b = {excess} <= 0"
            )));
        }
        return Ok(gamma(c)? * gamma(excess)? * recip_gamma(c - a) * recip_gamma(c - b));
    }
    if z > CONNECTION_THRESHOLD && excess != excess.round() {
        let w = 1.0 - z;
        let first = gamma(c)? * gamma(excess)? * recip_gamma(c - a) * recip_gamma(c - b);
        let second = gamma(c)? * gamma(-excess)? * recip_gamma(a) * recip_gamma(b);
        let f1 = if first != 0.0 {
            power_series(a, b, 1.0 - excess, w)?
        } else {
            0.0
        };
        let f2 = if second != 0.0 {
            power_series(c - a, c - b, 1.0 + excess, w)?
        } else {
            0.0
        };
        return Ok(first * f1 + w.powf(excess) * second * f2);
    }
    power_series(a, b, c, z)
}

/// Parameters of the benchmark pair `(Φ_{k,s}, Ψ_{k,s})`.
///
/// `Φ_{k,s}` is Lipschitz when `k + s > 1`; this is not enforced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkParams {
    pub k: u32,
    pub s: f64,
    pub d: usize,
}

impl BenchmarkParams {
    pub fn new(k: u32, s: f64, d: usize) -> Self {
        BenchmarkParams { k, s, d }
    }

    pub fn is_lipschitz(&self) -> bool {
        self.k as f64 + self.s > 1.0
    }
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `Φ_{k,s}` as a function of `|x|²`.
pub fn phi_radial_sq(r2: f64, params: BenchmarkParams) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (1.0 - r2).powf(params.k as f64 + params.s)
    }
}

/// `Φ_{k,s}(x) = (1 - |x|²)^{k+s}` inside the unit ball, 0 outside.
pub fn phi_exact(x: &[f64], params: BenchmarkParams) -> f64 {
    phi_radial_sq(norm_sq(x), params)
}

/// Precomputed evaluator for `Ψ_{k,s}`; the gamma prefactors of both branches
/// are computed once.
#[derive(Debug, Clone, Copy)]
pub struct PsiSource {
    params: BenchmarkParams,
    interior_prefactor: f64,
    exterior_prefactor: f64,
}

impl PsiSource {
    pub fn new(params: BenchmarkParams) -> Result<Self> {
        let BenchmarkParams { k, s, d } = params;
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::domain(format!("psi: s = {s} outside (0, 1)")));
        }
        if d == 0 {
            return Err(Error::domain("psi: dimension must be at least 1"));
        }
        let kf = k as f64;
        let half_d = d as f64 / 2.0;
        let interior_prefactor = 4f64.powf(s) * gamma(s + half_d)? * gamma(kf + 1.0 + s)?
            / (gamma(kf + 1.0)? * gamma(half_d)?);
        let exterior_prefactor = 4f64.powf(s) * gamma(s + half_d)? * gamma(kf + 1.0 + s)?
            / (gamma(kf + 1.0 + s + half_d)? * gamma(-s)?);
        Ok(PsiSource {
            params,
            interior_prefactor,
            exterior_prefactor,
        })
    }

    pub fn params(&self) -> BenchmarkParams {
        self.params
    }

    /// `Ψ_{k,s}` as a function of `|x|²`. The sphere `|x| = 1` takes the interior branch.
    pub fn eval_radial_sq(&self, r2: f64) -> Result<f64> {
        let BenchmarkParams { k, s, d } = self.params;
        let half_d = d as f64 / 2.0;
        if r2 <= 1.0 {
            let f = hyp2f1(HypergeometricArgs::new(half_d + s, -(k as f64), half_d, r2))?;
            Ok(self.interior_prefactor * f)
        } else {
            let kf = k as f64;
            let f = hyp2f1(HypergeometricArgs::new(
                half_d + s,
                1.0 + s,
                kf + 1.0 + half_d + s,
                1.0 / r2,
            ))?;
            Ok(self.exterior_prefactor * r2.powf(-(half_d + s)) * f)
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.eval_radial_sq(norm_sq(x))
    }

    /// `Ψ_{k,s}(0)`, where `₂F₁(·, ·; ·; 0) = 1`.
    pub fn at_origin(&self) -> f64 {
        self.interior_prefactor
    }
}

/// `Ψ_{k,s}(x)`, the source term with `Δ_s Φ_{k,s} = -Ψ_{k,s}` on `ℝ^d`.
pub fn psi_source(x: &[f64], params: BenchmarkParams) -> Result<f64> {
    PsiSource::new(params)?.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_classical_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        assert!(rel(gamma(0.5).unwrap(), PI.sqrt()) < 1e-14);
        assert!(rel(gamma(1.5).unwrap(), 0.5 * PI.sqrt()) < 1e-14);
    }

    #[test]
    fn gamma_rejects_poles() {
        for x in [0.0, -1.0, -2.0, -7.0] {
            assert!(matches!(gamma(x), Err(Error::Domain(_))));
        }
        assert!(gamma(f64::NAN).is_err());
    }

    #[test]
    fn recip_gamma_vanishes_at_poles() {
        assert_eq!(recip_gamma(-3.0), 0.0);
        assert!(rel(recip_gamma(0.5), 1.0 / PI.sqrt()) < 1e-14);
    }

    #[test]
    fn sin_pi_reduction() {
        assert_eq!(sin_pi(-9.5), 1.0);
        assert_eq!(sin_pi(2.5), 1.0);
        assert_eq!(sin_pi(-4.0), 0.0);
        assert!((sin_pi(0.25) - (PI / 4.0).sin()).abs() < 1e-16);
    }

    #[test]
    fn hyp2f1_trivial_cases() {
        assert_eq!(hyp2f1(HypergeometricArgs::new(1.3, 2.2, 0.7, 0.0)).unwrap(), 1.0);
        for z in [-3.0, 0.2, 0.99, 4.0] {
            assert_eq!(hyp2f1(HypergeometricArgs::new(1.375, 0.0, 0.5, z)).unwrap(), 1.0);
        }
    }

    #[test]
    fn hyp2f1_errors() {
        assert!(hyp2f1(HypergeometricArgs::new(1.0, 1.0, -2.0, 0.5)).is_err());
        assert!(hyp2f1(HypergeometricArgs::new(1.0, 1.5, 2.0, 1.5)).is_err());
        // c - a - b = -0.5 at z = 1.
        assert!(hyp2f1(HypergeometricArgs::new(1.0, 1.5, 2.0, 1.0)).is_err());
    }

    #[test]
    fn hyp2f1_gauss_summation() {
        // 2F1(a,b;c;1) = Γ(c)Γ(c-a-b)/(Γ(c-a)Γ(c-b)); with a=b=1/2, c=2: 4/π.
        let v = hyp2f1(HypergeometricArgs::new(0.5, 0.5, 2.0, 1.0)).unwrap();
        assert!(rel(v, 4.0 / PI) < 1e-13);
    }

    #[test]
    fn hyp2f1_log_identity() {
        // 2F1(1,1;2;z) = -ln(1-z)/z.
        for z in [-0.9, -0.3, 0.1, 0.5, 0.85] {
            let v = hyp2f1(HypergeometricArgs::new(1.0, 1.0, 2.0, z)).unwrap();
            let want = -(1.0 - z).ln() / z;
            assert!(rel(v, want) < 1e-12, "z={z} got {v} want {want}");
        }
    }

    #[test]
    fn hyp2f1_connection_matches_direct_series() {
        // c - a - b = 0.3, non-integer: both routes valid at z = 0.93.
        let (a, b, c, z) = (0.4, 0.7, 1.4, 0.93);
        let direct = power_series(a, b, c, z).unwrap();
        let via = hyp2f1(HypergeometricArgs::new(a, b, c, z)).unwrap();
        assert!(rel(via, direct) < 1e-12, "{via} vs {direct}");
    }

    #[test]
    fn phi_basic() {
        let p = BenchmarkParams::new(1, 0.875, 3);
        assert_eq!(phi_exact(&[0.0, 0.0, 0.0], p), 1.0);
        assert_eq!(phi_exact(&[1.0, 0.0, 0.0], p), 0.0);
        assert_eq!(phi_exact(&[0.8, 0.8, 0.0], p), 0.0);
        assert!(p.is_lipschitz());
        assert!(!BenchmarkParams::new(0, 0.875, 1).is_lipschitz());
    }

    #[test]
    fn psi_unit_sphere_uses_interior_branch() {
        let p = BenchmarkParams::new(1, 0.875, 1);
        let psi = PsiSource::new(p).unwrap();
        let on = psi.eval(&[1.0]).unwrap();
        let want = psi.at_origin() * (1.0 - (0.5 + 0.875) / 0.5);
        assert!(rel(on, want) < 1e-14);
    }

    #[test]
    fn psi_rejects_bad_params() {
        assert!(PsiSource::new(BenchmarkParams::new(0, 1.0, 1)).is_err());
        assert!(PsiSource::new(BenchmarkParams::new(0, 0.5, 0)).is_err());
    }
}
