use rdens_core::analysis::{compare_marginal, DEFAULT_BINS};
use rdens_core::marginals::{marginal_lambda1, marginal_lambda2};
use rdens_core::mcmc::{run_chains, ChainConfig};
use rdens_core::quantum::purity;
use rdens_core::{ChartDensity, ChartMeasure, PeakModel, StaticEnsembleSpec};

#[test]
fn sampler_matches_marginals() {
    let (m, p) = (10, 0.6);
    let spec = StaticEnsembleSpec::purity(4, m, p).unwrap();
    let samples = run_chains(&ChainConfig::new(spec, 200_000, 17), 2).unwrap().samples;
    for curve in [marginal_lambda1(m, p, 512).unwrap(), marginal_lambda2(m, p, 512).unwrap()] {
        let r = compare_marginal(&curve, &samples, DEFAULT_BINS, 1).unwrap();
        assert!(r.kolmogorov_distance <= 0.01 + r.error_bar, "{r:?}");
    }
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let spec = StaticEnsembleSpec::purity(4, 8, 0.5).unwrap();
    let cfg = ChainConfig::new(spec, 2000, 23);
    let run_with = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_chains(&cfg, 3).unwrap().samples)
    };
    assert_eq!(run_with(1), run_with(3));
}

#[test]
fn entropy_chain_varies_purity() {
    let spec = StaticEnsembleSpec::entropy(4, 12, 0.6).unwrap();
    let samples = run_chains(&ChainConfig::new(spec, 5000, 3), 1).unwrap().samples;
    let purities: Vec<f64> = samples.rows().map(purity).collect();
    let lo = purities.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = purities.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(hi - lo > 1e-3);
}

#[test]
fn chart_density_is_symmetric_and_peaks_near_model_maxima() {
    let (m, p) = (24, 0.5);
    let density = ChartDensity::new(m, p, ChartMeasure::default()).unwrap();
    let grid = density.grid(81).unwrap();
    let k = grid.xs.len();
    for i in 0..k {
        for j in 0..i {
            let (a, b) = (grid.values[i * k + j], grid.values[j * k + i]);
            assert!((a - b).abs() <= 1e-9 * a.max(b).max(1e-300));
        }
    }
    let model = PeakModel::new(&StaticEnsembleSpec::purity(4, m, p).unwrap()).unwrap();
    // the peak model approximates the energy alone, without the tail Jacobian
    let plain = ChartDensity::new(m, p, ChartMeasure::Lebesgue).unwrap();
    let top = plain.grid(81).unwrap().values.iter().cloned().fold(0.0, f64::max);
    for [x, y] in model.maxima() {
        assert!(plain.value(x, y) > 0.8 * top, "{} vs {top}", plain.value(x, y));
    }
}
