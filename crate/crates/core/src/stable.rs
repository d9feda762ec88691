//! Sampling of the `s`-stable subordinator and of symmetric `(2s)`-stable increments.
//!
//! The subordinator `S_t` has Laplace exponent `η(λ) = (2λ)^s`, so that
//! `E[exp(-λ S_t)] = exp(-t (2λ)^s)`. It is sampled exactly with the
//! Chambers–Mallows–Stuck formula. The symmetric stable process is the
//! subordinated Brownian motion `X_t = B_{S_t}`, whose characteristic function
//! is `E[exp(i ξ·X_t)] = exp(-t |ξ|^{2s})`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Margin kept between the CMS uniform angle and `±π/2`.
const ANGLE_GUARD: f64 = 1e-12;

/// Index `s` of the subordinator together with the ambient dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableLaw {
    s: f64,
    d: usize,
    inv_s: f64,
    tail_exp: f64,
}

impl StableLaw {
    pub fn new(s: f64, d: usize) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::domain(format!("stable law: s = {s} outside (0, 1)")));
        }
        if d == 0 {
            return Err(Error::domain("stable law: dimension must be at least 1"));
        }
        Ok(StableLaw {
            s,
            d,
            inv_s: 1.0 / s,
            tail_exp: (1.0 - s) / s,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Stability index `α = 2s` of the driven process.
    pub fn alpha(&self) -> f64 {
        2.0 * self.s
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Laplace exponent `η(λ) = (2λ)^s`.
    pub fn laplace_exponent(&self, lambda: f64) -> f64 {
        (2.0 * lambda).powf(self.s)
    }

    /// Scale factor `t^{1/s}` such that `S_t` has the law of `t^{1/s} S_1`.
    pub fn time_scale(&self, t: f64) -> f64 {
        t.powf(self.inv_s)
    }
}

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8, whose 64-bit stream parameter gives independent
/// sequences for every `stream_id` under one seed.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream for child `index`, derived from `(seed, stream_id)` only,
    /// never from the current position of this stream.
    pub fn substream(&self, index: u64) -> RngStream {
        let id = splitmix64(splitmix64(self.stream_id) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03));
        RngStream::new(self.seed, id)
    }

    /// Uniform sample on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Standard normal sample (ziggurat).
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Inverse-CDF map of a uniform on `[0, 1)` to a unit exponential.
#[inline]
pub fn exp_from_uniform(u: f64) -> f64 {
    -(1.0 - u).ln()
}

/// Unit-exponential lifetime of a branching particle.
pub fn sample_exponential_clock(rng: &mut RngStream) -> f64 {
    exp_from_uniform(rng.uniform())
}

/// The CMS map `(U, E) ↦ S̃_t` for `U ∈ (-π/2, π/2)` and `E > 0`.
pub fn cms_transform(law: &StableLaw, t: f64, u: f64, e: f64) -> f64 {
    2.0 * law.time_scale(t) * cms_unit(law, u, e)
}

#[inline]
fn cms_unit(law: &StableLaw, u: f64, e: f64) -> f64 {
    let shifted = law.s * (u + FRAC_PI_2);
    let log_val = (u - shifted).cos().ln() - e.ln();
    shifted.sin() * (law.tail_exp * log_val - law.inv_s * u.cos().ln()).exp()
}

/// One draw of `S̃_1 / 2`, with the angle guard and `E > 0` enforced by redrawing.
#[inline]
fn draw_unit(law: &StableLaw, rng: &mut RngStream) -> f64 {
    loop {
        let u = PI * (rng.uniform() - 0.5);
        if FRAC_PI_2 - u.abs() < ANGLE_GUARD {
            continue;
        }
        let e = exp_from_uniform(rng.uniform());
        if e <= 0.0 {
            continue;
        }
        return cms_unit(law, u, e);
    }
}

/// Sample `S̃_t`, the `s`-stable subordinator at time `t > 0`.
pub fn sample_subordinator(t: f64, law: &StableLaw, rng: &mut RngStream) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("subordinator: t = {t} must be positive")));
    }
    Ok(2.0 * law.time_scale(t) * draw_unit(law, rng))
}

/// Sample the increment `X_dt = G √(S̃_dt)` of the symmetric `(2s)`-stable process.
pub fn sample_stable_increment(dt: f64, law: &StableLaw, rng: &mut RngStream) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::domain(format!("stable increment: dt = {dt} must be positive")));
    }
    let mut out = vec![0.0; law.d];
    let step = IncrementSampler::new(*law, dt);
    step.add_to(&mut out, rng);
    Ok(out)
}

/// Increment sampler for a fixed span `dt`, with `√(2 dt^{1/s})` precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct IncrementSampler {
    law: StableLaw,
    root_scale: f64,
}

impl IncrementSampler {
    pub(crate) fn new(law: StableLaw, dt: f64) -> Self {
        IncrementSampler {
            law,
            root_scale: (2.0 * law.time_scale(dt)).sqrt(),
        }
    }

    /// Adds an increment to `pos` in place and returns the new `|pos|²`.
    #[inline]
    pub(crate) fn add_to(&self, pos: &mut [f64], rng: &mut RngStream) -> f64 {
        let amp = self.root_scale * draw_unit(&self.law, rng).sqrt();
        let mut r2 = 0.0;
        for x in pos.iter_mut() {
            *x += amp * rng.normal();
            r2 += *x * *x;
        }
        r2
    }
}
