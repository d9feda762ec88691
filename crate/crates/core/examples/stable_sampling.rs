//! Exact draws of the `s`-stable subordinator and of `(2s)`-stable increments,
//! compared with their Laplace transform and characteristic function.
//!
//! `cargo run --release --example stable_sampling`

use fracbranch::stable::{sample_stable_increment, sample_subordinator, RngStream, StableLaw};
use fracbranch::stats::Accumulator;

fn main() -> fracbranch::Result<()> {
    let n = 200_000;
    let mut rng = RngStream::new(42, 0);
    for s in [0.6, 0.875] {
        let law = StableLaw::new(s, 1)?;
        let mut accs = [Accumulator::new(); 3];
        for _ in 0..n {
            let v = sample_subordinator(1.0, &law, &mut rng)?;
            for (acc, l) in accs.iter_mut().zip([0.5, 1.0, 2.0]) {
                acc.push((-l * v).exp());
            }
        }
        for (acc, l) in accs.iter().zip([0.5, 1.0, 2.0]) {
            let e = acc.estimate();
            let exact = (-law.laplace_exponent(l)).exp();
            println!("s = {s}: E[exp(-{l} S_1)] = {:.5} ± {:.5}, exact {exact:.5}", e.mean, e.stderr);
        }
    }

    let law = StableLaw::new(0.875, 3)?;
    let dt = 0.5;
    let mut cf = Accumulator::new();
    for _ in 0..n {
        let x = sample_stable_increment(dt, &law, &mut rng)?;
        cf.push(x[0].cos());
    }
    let e = cf.estimate();
    println!(
        "d = 3, dt = {dt}: E[cos(X_1)] = {:.5} ± {:.5}, exact {:.5}",
        e.mean,
        e.stderr,
        (-dt).exp()
    );
    Ok(())
}
