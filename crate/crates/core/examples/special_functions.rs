//! Gamma, Gauss hypergeometric and the benchmark source term `Ψ_{k,s}`.
//!
//! `cargo run --release --example special_functions`

use fracbranch::special::{gamma, hyp2f1, phi_radial_sq, BenchmarkParams, HypergeometricArgs, PsiSource};

fn main() -> fracbranch::Result<()> {
    for x in [0.1, 1.875, 5.0, -0.875, -9.5] {
        println!("Gamma({x}) = {:.16e}", gamma(x)?);
    }
    let ln4 = hyp2f1(HypergeometricArgs::new(1.0, 1.0, 2.0, 0.5))?;
    println!("2F1(1, 1; 2; 1/2) = {ln4:.16} (2 ln 2 = {:.16})", 2.0 * std::f64::consts::LN_2);
    println!("2F1(0.5, -2; 1.5; 0.25) = {:.16}", hyp2f1(HypergeometricArgs::new(0.5, -2.0, 1.5, 0.25))?);

    // Ψ is the fractional Laplacian of Φ = (1 − |x|²)_+^{k+s}, up to sign.
    let s = 0.875;
    for (d, k) in [(1, 0), (1, 1), (10, 0), (10, 3)] {
        let params = BenchmarkParams::new(k, s, d);
        let psi = PsiSource::new(params)?;
        print!("d = {d:2}, k = {k}:");
        for r in [0.0, 0.5, 0.9, 1.1, 2.0] {
            let r2: f64 = r * r;
            print!("  Psi({r}) = {:+.5}", psi.eval_radial_sq(r2)?);
        }
        println!("   Phi(0.5) = {:.5}", phi_radial_sq(0.25, params));
    }
    Ok(())
}
