//! Radial profile of the one-dimensional Dirichlet benchmark, whose exact
//! solution is `(1 − r²)^{k+s}`.
//!
//! `cargo run --release --example dirichlet_profile -- [k] [samples]`

use fracbranch::branching::{benchmarks, radial_profile, TreeLimits};
use fracbranch::stable::RngStream;

fn main() -> fracbranch::Result<()> {
    let mut args = std::env::args().skip(1);
    let k: u32 = args.next().map_or(0, |a| a.parse().expect("k"));
    let n: u64 = args.next().map_or(50_000, |a| a.parse().expect("samples"));

    let spec = benchmarks::dirichlet(1, 0.875, k)?.with_offspring_probs(&[(0, 0.5), (1, 0.5)])?;
    let walk = spec.model().walk_params(1e-2)?.with_refinement(0.15)?;
    let radii = [0.0, 0.25, 0.5, 0.75, 0.9];
    let profile = radial_profile(&spec, &walk, TreeLimits::default(), &radii, n, &RngStream::new(7, 0))?;

    println!("{:>6} {:>10} {:>9} {:>10}", "r", "estimate", "stderr", "exact");
    for p in profile {
        println!(
            "{:>6.2} {:>10.5} {:>9.5} {:>10.5}",
            p.radius,
            p.estimate.mean,
            p.estimate.stderr,
            p.exact.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
