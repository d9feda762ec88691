//! Drives a JSON run configuration through the library, as `fracbranch solve`
//! does, and prints the CSV profile.
//!
//! `cargo run --release --example run_config -- examples/configs/quadratic_d10_k3.json`

use fracbranch::driver::{load_config, run_profile};

fn main() -> fracbranch::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/quadratic_d10_k3.json").into());
    let mut config = load_config(&path)?;
    config.samples = config.samples.min(5_000);
    let run = run_profile(&config)?;
    run.write_csv(std::io::stdout().lock())?;
    eprintln!("{}", run.summary());
    Ok(())
}
