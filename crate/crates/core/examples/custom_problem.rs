//! A user-defined problem with a spatially varying coefficient and exterior
//! data: `Δ_s u + (1 − |x|²)/4 + u²/4 = u` in the disc, `u = cos(|x|)/2` outside.
//!
//! `cargo run --release --example custom_problem`

use std::sync::Arc;

use fracbranch::branching::{estimate_u, Coefficient, Exterior, ModelParams, ProblemSpec, TreeLimits};
use fracbranch::stable::RngStream;

fn main() -> fracbranch::Result<()> {
    let model = ModelParams::new(2, 0.8, 1.0)?;
    let spec = ProblemSpec::new(
        model,
        vec![
            (0, Coefficient::custom(|x| 0.25 * (1.0 - x[0] * x[0] - x[1] * x[1]))),
            (2, Coefficient::Constant(0.25)),
        ],
        Exterior::Custom {
            f: Arc::new(|x| 0.5 * x.iter().map(|v| v * v).sum::<f64>().sqrt().cos()),
            sup: 0.5,
        },
    )?;
    for (l, q) in spec.offspring_probs() {
        println!("q{l} = {q:.3}");
    }
    let walk = model.walk_params(1e-2)?.with_refinement(0.25)?;
    let key = RngStream::new(5, 0);
    for x in [[0.0, 0.0], [0.5, 0.0], [0.0, 0.9], [1.5, 0.0]] {
        let e = estimate_u(&x, &spec, &walk, TreeLimits::default(), 20_000, &key)?;
        println!("u({x:?}) = {:.4} ± {:.4}", e.mean, e.stderr);
    }
    Ok(())
}
