//! The linear and quadratic benchmarks in dimension 10 at the centre and at
//! `r = 1/2`, with the default offspring law `q_l ∝ sup |c_l|`.
//!
//! `cargo run --release --example nonlinear_benchmarks -- [samples]`

use fracbranch::branching::{benchmarks, radial_profile, TreeLimits};
use fracbranch::stable::RngStream;

fn main() -> fracbranch::Result<()> {
    let n: u64 = std::env::args().nth(1).map_or(20_000, |a| a.parse().expect("samples"));
    let problems = [
        ("linear, k = 1", benchmarks::linear(10, 0.875, 1)?),
        ("quadratic, k = 0", benchmarks::quadratic(10, 0.875, 0)?),
    ];
    for (name, spec) in problems {
        let q: Vec<String> = spec.offspring_probs().iter().map(|(l, q)| format!("q{l} = {q:.3}")).collect();
        println!("{name}: {}", q.join(", "));
        let walk = spec.model().walk_params(1e-2)?.with_refinement(0.25)?;
        let profile = radial_profile(&spec, &walk, TreeLimits::default(), &[0.0, 0.5], n, &RngStream::new(3, 0))?;
        for p in profile {
            println!(
                "  r = {:.1}: {:.4} ± {:.4} (exact {:.4}, truncated {:.1e}, E[H^2] = {:.1})",
                p.radius,
                p.estimate.mean,
                p.estimate.stderr,
                p.exact.unwrap_or(f64::NAN),
                p.estimate.truncation_fraction,
                p.estimate.second_moment()
            );
        }
    }
    Ok(())
}
