//! One particle's stable path inside the ball `B(0, R)`, run until its
//! exponential clock rings or it leaves the ball.
//!
//! The path is advanced on the grid `0, h, 2h, ...` with exact stable
//! increments, plus a final partial step up to the clock time. Exit is only
//! checked at sampled instants, so excursions outside the ball between grid
//! points are missed and `τ^B` is biased upward by an amount that vanishes
//! with `h`. The reported exit position is the first sampled point outside
//! the ball (stable paths leave a ball by a jump).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stable::{IncrementSampler, RngStream, StableLaw};
use crate::stats::{try_run_blocks, Accumulator, Estimate, BLOCK_SIZE};

/// Hard cap on grid steps per walk.
pub const MAX_WALK_STEPS: u64 = 10_000_000;

pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    radius: f64,
    step: f64,
    law: StableLaw,
    full_step: IncrementSampler,
    refinement: Option<f64>,
}

impl WalkParams {
    pub fn new(radius: f64, step: f64, law: StableLaw) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!("walk: radius {radius} must be positive")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::domain(format!("walk: step {step} must be positive")));
        }
        Ok(WalkParams {
            radius,
            step,
            law,
            full_step: IncrementSampler::new(law, step),
            refinement: None,
        })
    }

    /// Enables boundary-adaptive steps: from distance `δ` to the sphere the
    /// step becomes `min(h, (κ δ)^{2s})`, so the typical displacement per
    /// step stays below a fraction `κ` of the distance to the boundary.
    pub fn with_refinement(mut self, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::domain(format!("walk: refinement {kappa} must be positive")));
        }
        self.refinement = Some(kappa);
        Ok(self)
    }

    pub fn refinement(&self) -> Option<f64> {
        self.refinement
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn law(&self) -> &StableLaw {
        &self.law
    }

    /// Same radius and law with a different time step.
    pub fn with_step(&self, step: f64) -> Result<Self> {
        let mut p = WalkParams::new(self.radius, step, self.law)?;
        p.refinement = self.refinement;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExitCause {
    /// The exponential clock rang with the particle inside the ball.
    ClockRing,
    /// The particle was observed outside the ball before the clock rang.
    BallExit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkOutcome {
    pub duration: f64,
    pub end_position: Vec<f64>,
    pub cause: ExitCause,
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Runs one walk from `start` until `clock` or the first sampled exit.
///
/// `clock = f64::INFINITY` runs to exit. Returns [`Error::Precondition`] if
/// `start` is not strictly inside the ball and [`Error::Limit`] if
/// [`MAX_WALK_STEPS`] grid steps pass without a terminal event.
pub fn walk(start: &[f64], clock: f64, params: &WalkParams, rng: &mut RngStream) -> Result<WalkOutcome> {
    let mut pos = start.to_vec();
    let (duration, cause) = walk_in_place(&mut pos, clock, params, rng)?;
    Ok(WalkOutcome {
        duration,
        end_position: pos,
        cause,
    })
}

pub(crate) fn walk_in_place(
    pos: &mut [f64],
    clock: f64,
    params: &WalkParams,
    rng: &mut RngStream,
) -> Result<(f64, ExitCause)> {
    if pos.len() != params.law.dim() {
        return Err(Error::Precondition(format!(
            "walk: start has dimension {}, law has {}",
            pos.len(),
            params.law.dim()
        )));
    }
    let r2_max = params.radius * params.radius;
    if norm_sq(pos) >= r2_max {
        return Err(Error::Precondition(
            "walk: start must lie strictly inside the ball".into(),
        ));
    }
    if !(clock > 0.0) {
        return Err(Error::domain(format!("walk: clock {clock} must be positive")));
    }
    if let Some(kappa) = params.refinement {
        return adaptive_walk(pos, clock, params, kappa, rng);
    }
    let h = params.step;
    let full_steps = (clock / h).floor();
    let capped = full_steps >= MAX_WALK_STEPS as f64;
    let full_steps = if capped { MAX_WALK_STEPS } else { full_steps as u64 };

    for i in 1..=full_steps {
        if params.full_step.add_to(pos, rng) >= r2_max {
            return Ok((i as f64 * h, ExitCause::BallExit));
        }
    }
    if capped {
        return Err(Error::Limit(format!(
            "walk: no exit or clock ring within {MAX_WALK_STEPS} steps"
        )));
    }
    let rest = clock - full_steps as f64 * h;
    if rest > 0.0 {
        let partial = IncrementSampler::new(params.law, rest);
        if partial.add_to(pos, rng) >= r2_max {
            return Ok((clock, ExitCause::BallExit));
        }
    }
    Ok((clock, ExitCause::ClockRing))
}

/// Smallest adaptive step; keeps the walk finite when it creeps to the sphere.
const MIN_ADAPTIVE_STEP: f64 = 1e-12;

fn adaptive_walk(
    pos: &mut [f64],
    clock: f64,
    params: &WalkParams,
    kappa: f64,
    rng: &mut RngStream,
) -> Result<(f64, ExitCause)> {
    let h = params.step;
    let radius = params.radius;
    let r2_max = radius * radius;
    let alpha = params.law.alpha();
    let mut t = 0.0;
    let mut r2 = norm_sq(pos);
    for _ in 0..MAX_WALK_STEPS {
        let dist = radius - r2.sqrt();
        let local = (kappa * dist).powf(alpha).max(MIN_ADAPTIVE_STEP);
        let remaining = clock - t;
        let (dt, last) = if local >= h && remaining > h {
            (h, false)
        } else if local.min(h) < remaining {
            (local.min(h), false)
        } else {
            (remaining, true)
        };
        r2 = if dt == h {
            params.full_step.add_to(pos, rng)
        } else {
            IncrementSampler::new(params.law, dt).add_to(pos, rng)
        };
        t = if last { clock } else { t + dt };
        if r2 >= r2_max {
            return Ok((t, ExitCause::BallExit));
        }
        if last {
            return Ok((clock, ExitCause::ClockRing));
        }
    }
    Err(Error::Limit(format!(
        "walk: no exit or clock ring within {MAX_WALK_STEPS} steps"
    )))
}

/// Position at time `duration` on the same grid as [`walk`], without exit detection.
pub fn propagate(start: &[f64], duration: f64, params: &WalkParams, rng: &mut RngStream) -> Result<Vec<f64>> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::domain(format!("propagate: duration {duration} must be positive")));
    }
    let mut pos = start.to_vec();
    let h = params.step;
    let full_steps = (duration / h).floor() as u64;
    for _ in 0..full_steps {
        params.full_step.add_to(&mut pos, rng);
    }
    let rest = duration - full_steps as f64 * h;
    if rest > 0.0 {
        IncrementSampler::new(params.law, rest).add_to(&mut pos, rng);
    }
    Ok(pos)
}

/// Exit times `(τ_h, τ_{h/2})` observed on the grids of step `h` and `h/2`
/// along one common path: the coarse path is the fine path sampled at even
/// grid points. Since the coarse grid is a subset of the fine one, `τ_h ≥ τ_{h/2}`.
pub fn coupled_exit_times(start: &[f64], params: &WalkParams, rng: &mut RngStream) -> Result<(f64, f64)> {
    let fine = params.with_step(params.step / 2.0)?;
    let mut pos = start.to_vec();
    let r2_max = params.radius * params.radius;
    if norm_sq(&pos) >= r2_max || pos.len() != params.law.dim() {
        return Err(Error::Precondition(
            "coupled walk: start must be a point strictly inside the ball".into(),
        ));
    }
    let mut fine_exit = None;
    for i in 1..=2 * MAX_WALK_STEPS {
        let outside = fine.full_step.add_to(&mut pos, rng) >= r2_max;
        if outside && fine_exit.is_none() {
            fine_exit = Some(i as f64 * fine.step);
        }
        if outside && i % 2 == 0 {
            let coarse = (i / 2) as f64 * params.step;
            return Ok((coarse, fine_exit.unwrap_or(coarse)));
        }
    }
    Err(Error::Limit(format!(
        "coupled walk: no exit within {MAX_WALK_STEPS} coarse steps"
    )))
}

/// Paired step-size study of the mean exit time: estimates at `h` and `h/2`
/// and of their difference, all from the same `n` coupled paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPair {
    pub coarse: Estimate,
    pub fine: Estimate,
    pub difference: Estimate,
}

pub fn mean_exit_time_pair(start: &[f64], params: &WalkParams, n: u64, key: &RngStream) -> Result<StepPair> {
    if n == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    let accs = try_run_triples(n, key, |rng| coupled_exit_times(start, params, rng))?;
    Ok(StepPair {
        coarse: accs[0].estimate(),
        fine: accs[1].estimate(),
        difference: accs[2].estimate(),
    })
}

fn try_run_triples(
    n: u64,
    key: &RngStream,
    draw: impl Fn(&mut RngStream) -> Result<(f64, f64)> + Sync,
) -> Result<[Accumulator; 3]> {
    use rayon::prelude::*;
    let blocks = n.div_ceil(BLOCK_SIZE);
    let parts: Vec<Result<[Accumulator; 3]>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = BLOCK_SIZE.min(n - b * BLOCK_SIZE);
            let mut rng = key.substream(b);
            let mut acc = [Accumulator::new(); 3];
            for _ in 0..count {
                let (c, f) = draw(&mut rng)?;
                acc[0].push(c);
                acc[1].push(f);
                acc[2].push(c - f);
            }
            Ok(acc)
        })
        .collect();
    let mut total = [Accumulator::new(); 3];
    for part in parts {
        let part = part?;
        for (t, p) in total.iter_mut().zip(part.iter()) {
            t.merge(p);
        }
    }
    Ok(total)
}

/// Exit time `τ^B(start)` by walk-to-exit simulation.
pub fn exit_time(start: &[f64], params: &WalkParams, rng: &mut RngStream) -> Result<f64> {
    Ok(walk(start, f64::INFINITY, params, rng)?.duration)
}

/// Monte-Carlo mean of `τ^B(start)` over `n` walks.
pub fn mean_exit_time(start: &[f64], params: &WalkParams, n: u64, key: &RngStream) -> Result<Estimate> {
    sample_exit_functional(start, params, n, key, |t| t)
}

/// Monte-Carlo estimate of `E[exp(-τ^B(start))]` over `n` walk-to-exit samples.
pub fn survival_factor(start: &[f64], params: &WalkParams, n: u64, key: &RngStream) -> Result<Estimate> {
    sample_exit_functional(start, params, n, key, |t| (-t).exp())
}

fn sample_exit_functional(
    start: &[f64],
    params: &WalkParams,
    n: u64,
    key: &RngStream,
    f: impl Fn(f64) -> f64 + Sync,
) -> Result<Estimate> {
    if n == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    let acc = try_run_blocks(n, key, |rng, count| {
        let mut acc = Accumulator::new();
        let mut pos = vec![0.0; start.len()];
        for _ in 0..count {
            pos.copy_from_slice(start);
            let (t, _) = walk_in_place(&mut pos, f64::INFINITY, params, rng)?;
            acc.push(f(t));
        }
        Ok::<_, Error>(acc)
    })?;
    Ok(acc.estimate())
}

/// Closed-form `E[τ^B(x)]` for the `(2s)`-stable process in `B(0, R)`:
/// `Γ(d/2) / (4^s Γ(1+s) Γ(d/2+s)) · (R² − |x|²)^s`.
pub fn expected_exit_time(start: &[f64], params: &WalkParams) -> Result<f64> {
    use crate::special::gamma;
    let s = params.law.s();
    let half_d = params.law.dim() as f64 / 2.0;
    let c = gamma(half_d)? / (4f64.powf(s) * gamma(1.0 + s)? * gamma(half_d + s)?);
    let gap = params.radius * params.radius - norm_sq(start);
    Ok(if gap > 0.0 { c * gap.powf(s) } else { 0.0 })
}
