//! Statistical checks of the tree functional.

use fracbranch::branching::{
    benchmarks, estimate_u, radial_profile, sample_offspring, simulate_tree, Coefficient, Exterior, ModelParams,
    ProblemSpec, TreeLimits,
};
use fracbranch::stable::RngStream;
use fracbranch::walk::survival_factor;

fn model() -> ModelParams {
    ModelParams::new(1, 0.875, 1.0).unwrap()
}

fn constants(degrees: &[(u32, f64, f64)], phi: Exterior) -> ProblemSpec {
    let terms = degrees.iter().map(|&(l, c, q)| (l, Coefficient::Constant(c), q)).collect();
    ProblemSpec::with_terms_and_probs(model(), terms, phi).unwrap()
}

#[test]
fn offspring_frequencies() {
    let mut rng = RngStream::new(31, 0);
    let only_two = constants(&[(2, 1.0, 1.0)], Exterior::Zero);
    assert!((0..1000).all(|_| sample_offspring(&only_two, &mut rng) == Some(2)));

    let n = 100_000;
    let binary = constants(&[(0, 1.0, 0.5), (2, 1.0, 0.5)], Exterior::Zero);
    let zeros = (0..n).filter(|_| sample_offspring(&binary, &mut rng) == Some(0)).count();
    let sigma = (0.25 / n as f64).sqrt();
    assert!((zeros as f64 / n as f64 - 0.5).abs() <= 3.0 * sigma);

    let probs = [0.2, 0.3, 0.5];
    let spec = constants(&[(0, 1.0, 0.2), (1, 1.0, 0.3), (2, 1.0, 0.5)], Exterior::Zero);
    let mut counts = [0u64; 3];
    for _ in 0..n {
        counts[sample_offspring(&spec, &mut rng).unwrap() as usize] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&o, p)| (o as f64 - p * n as f64).powi(2) / (p * n as f64))
        .sum();
    // 1% critical value with 2 degrees of freedom.
    assert!(chi2 < 9.210, "chi2 = {chi2}");
}

#[test]
fn indicator_problem_matches_survival_factor() {
    let spec = constants(&[(0, 0.0, 1.0)], Exterior::Constant(1.0));
    let walk = model().walk_params(1e-3).unwrap();
    let mut rng = RngStream::new(32, 0);
    for _ in 0..1000 {
        let t = simulate_tree(&[0.3], &spec, &walk, TreeLimits::default(), &mut rng).unwrap();
        assert!(t.h_value == 0.0 || t.h_value == 1.0);
        assert_eq!(t.particles, 1);
    }
    let n = 20_000;
    let tree = estimate_u(&[0.3], &spec, &walk, TreeLimits::default(), n, &RngStream::new(32, 1)).unwrap();
    let exit = survival_factor(&[0.3], &walk, n, &RngStream::new(32, 2)).unwrap();
    assert!(tree.agrees_with(&exit, 3.0), "{tree:?} vs {exit:?}");
}

#[test]
fn feynman_kac_constant_source() {
    let kappa = 0.7;
    let spec = constants(&[(0, kappa, 1.0)], Exterior::Zero);
    let walk = model().walk_params(1e-3).unwrap();
    let n = 20_000;
    let tree = estimate_u(&[0.0], &spec, &walk, TreeLimits::default(), n, &RngStream::new(33, 0)).unwrap();
    let exit = survival_factor(&[0.0], &walk, n, &RngStream::new(33, 1)).unwrap();
    let want = kappa * (1.0 - exit.mean);
    let joint = (tree.stderr.powi(2) + (kappa * exit.stderr).powi(2)).sqrt();
    assert!((tree.mean - want).abs() <= 3.0 * joint, "{} vs {want}", tree.mean);
}

#[test]
fn unit_chain_has_unit_functional() {
    let spec = constants(&[(1, 1.0, 1.0)], Exterior::Constant(1.0));
    let walk = model().walk_params(1e-2).unwrap();
    let e = estimate_u(&[0.2], &spec, &walk, TreeLimits::default(), 5_000, &RngStream::new(34, 0)).unwrap();
    assert_eq!(e.mean, 1.0);
    assert_eq!(e.stderr, 0.0);
    assert_eq!(e.truncation_fraction, 0.0);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let spec = benchmarks::quadratic(2, 0.875, 1).unwrap();
    let walk = spec.model().walk_params(1e-2).unwrap().with_refinement(0.25).unwrap();
    let key = RngStream::new(35, 0);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_u(&[0.1, 0.2], &spec, &walk, TreeLimits::default(), 5_000, &key).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.mean.to_bits(), four.mean.to_bits());
    assert_eq!(one.stderr.to_bits(), four.stderr.to_bits());
}

#[test]
fn dirichlet_profile_is_non_increasing() {
    let spec = benchmarks::dirichlet(1, 0.875, 1).unwrap().with_offspring_probs(&[(0, 0.5), (1, 0.5)]).unwrap();
    let walk = spec.model().walk_params(1e-2).unwrap().with_refinement(0.25).unwrap();
    let radii = [0.0, 0.25, 0.5, 0.75];
    let profile = radial_profile(&spec, &walk, TreeLimits::default(), &radii, 20_000, &RngStream::new(36, 0)).unwrap();
    for w in profile.windows(2) {
        let joint = (w[0].estimate.stderr.powi(2) + w[1].estimate.stderr.powi(2)).sqrt();
        assert!(w[1].estimate.mean - w[0].estimate.mean <= 3.0 * joint, "{profile:?}");
    }
    let single = radial_profile(&spec, &walk, TreeLimits::default(), &[0.0], 20_000, &RngStream::new(36, 0)).unwrap();
    assert_eq!(single[0], profile[0]);
}
