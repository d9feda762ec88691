//! Existence criteria for constant-coefficient problems: the small-data
//! bound and the `L^p` bound from the dominating Galton–Watson process.
//!
//! `cargo run --release --example existence_check`

use fracbranch::branching::{Coefficient, Exterior, ModelParams, ProblemSpec};
use fracbranch::stable::RngStream;
use fracbranch::wellposed::{c0_constant, check_existence, gamma_star, DominatingPgf};

fn main() -> fracbranch::Result<()> {
    // γ(s*) grows as the interior death probability δ shrinks.
    for delta in [0.5, 0.25, 0.1, 0.05] {
        let pgf = DominatingPgf::from_sup_norms(&[(0, 0.6), (2, 0.6)], delta)?;
        let g = gamma_star(&pgf).expect("q0 > 0");
        println!("delta = {delta:4}: s* = {:.4}, gamma = {:.4}", g.s_star, g.gamma);
    }

    let key = RngStream::new(9, 0);
    for radius in [1.0, 0.05] {
        let model = ModelParams::new(1, 0.875, radius)?;
        let spec = ProblemSpec::new(
            model,
            vec![(0, Coefficient::Constant(0.6)), (2, Coefficient::Constant(0.6))],
            Exterior::Constant(1.2),
        )?;
        let walk = model.walk_params(radius * radius * 1e-2)?;
        let report = check_existence(&spec, true, &walk, 5_000, &key)?;
        println!(
            "R = {radius}: C0 = {}, delta = {:.4}, gamma = {:.4}, verdict {:?}, p* = {:?}",
            c0_constant(&spec),
            report.delta.unwrap_or(0.0),
            report.gamma.unwrap_or(f64::NAN),
            report.verdict,
            report.p_star
        );
    }
    Ok(())
}
