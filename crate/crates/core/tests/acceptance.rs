//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::{E, FRAC_PI_4};
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rdens_core::analysis::{
    compare_chart, compare_marginal, entropy_distribution_at_fixed_purity, kolmogorov_distance, ComparisonReport,
    DEFAULT_BINS,
};
use rdens_core::conics::{boundary_conics, ConicLabel};
use rdens_core::dynamics::{run_dynamic_ensemble, DynamicRun, DynamicsSpec, HamiltonianModel, InitialStateSpec, ModelKind};
use rdens_core::ensemble::peak_locations;
use rdens_core::marginals::{marginal, Which, DEFAULT_RESOLUTION};
use rdens_core::mcmc::{run_chains, ChainConfig};
use rdens_core::quantum::{purity, von_neumann_entropy};
use rdens_core::rng::seeded;
use rdens_core::simplex::{face_normals, inradius, project_spectrum, rotation_matrix, sphere_radius, unrotate};
use rdens_core::{ChartDensity, ChartMeasure, SampleSet, StaticEnsembleSpec};

const CHAINS: usize = 4;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn mcmc(m: usize, p: f64, n: usize, seed: u64) -> SampleSet {
    let spec = StaticEnsembleSpec::purity(4, m, p).expect("valid spec");
    run_chains(&ChainConfig::new(spec, n, seed), CHAINS).expect("chain runs").samples
}

fn dynamic(kind: ModelKind, m: usize, eps: f64, theta: f64, p: f64, n: usize, seed: u64) -> DynamicRun {
    let model = HamiltonianModel::new(kind, m, eps).expect("valid model");
    let mut spec = DynamicsSpec::new(model, p, n, seed);
    spec.initial = InitialStateSpec::new(theta).expect("valid angle");
    run_dynamic_ensemble(&spec).expect("dynamics runs")
}

fn lambda1_report(run: &DynamicRun, m: usize, p: f64) -> ComparisonReport {
    let curve = marginal(Which::Lambda1, m, p, DEFAULT_RESOLUTION, ChartMeasure::default()).expect("marginal");
    compare_marginal(&curve, &run.samples(), DEFAULT_BINS, 1).expect("comparison")
}

fn fmt(r: &ComparisonReport) -> String {
    format!("K={:.4} (±{:.4})", r.kolmogorov_distance, r.error_bar)
}

fn constraint_exactness() -> Outcome {
    let mut worst_sum: f64 = 0.0;
    let mut worst_purity: f64 = 0.0;
    for (m, p) in [(8, 0.4), (16, 0.8), (4, 0.3)] {
        for row in mcmc(m, p, 20_000, 3).rows() {
            worst_sum = worst_sum.max((row.iter().sum::<f64>() - 1.0).abs());
            worst_purity = worst_purity.max((purity(row) - p).abs());
        }
    }
    let spec = StaticEnsembleSpec::entropy(4, 8, 1.0).expect("valid spec");
    let mut worst_entropy: f64 = 0.0;
    for row in run_chains(&ChainConfig::new(spec, 20_000, 4), CHAINS).expect("chain").samples.rows() {
        worst_sum = worst_sum.max((row.iter().sum::<f64>() - 1.0).abs());
        worst_entropy = worst_entropy.max((von_neumann_entropy(row, E) - 1.0).abs());
    }
    let mut worst_dyn_sum: f64 = 0.0;
    let mut worst_dyn_purity: f64 = 0.0;
    for kind in [ModelKind::Global, ModelKind::Coupling, ModelKind::Spectator, ModelKind::Common] {
        let run = dynamic(kind, 4, 1.0, 0.3, 0.6, 200, 5);
        for r in run.converged() {
            let v = r.spectrum.values();
            worst_dyn_sum = worst_dyn_sum.max((v.iter().sum::<f64>() - 1.0).abs());
            worst_dyn_purity = worst_dyn_purity.max((purity(v) - 0.6).abs());
        }
    }
    let pass = worst_sum <= 1e-10 && worst_purity <= 1e-10 && worst_entropy <= 1e-10
        && worst_dyn_sum <= 1e-10 && worst_dyn_purity <= 1e-8;
    outcome(
        pass,
        format!(
            "mcmc |Σ-1|={worst_sum:.1e} |P-P0|={worst_purity:.1e} |S-S0|={worst_entropy:.1e}; dynamics |Σ-1|={worst_dyn_sum:.1e} |P-P0|={worst_dyn_purity:.1e}"
        ),
    )
}

fn static_self_consistency() -> Outcome {
    let density = ChartDensity::new(16, 0.4, ChartMeasure::default()).expect("density");
    let samples = mcmc(16, 0.4, 100_000, 7);
    let r = compare_chart(&density, &samples, DEFAULT_BINS, 2).expect("comparison");
    outcome(r.kolmogorov_distance <= 0.02 + r.error_bar, format!("chart 50x50 {}", fmt(&r)))
}

fn marginal_equivalence() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (m, p, seed) in [(8, 0.4, 11), (16, 0.8, 12)] {
        let samples = mcmc(m, p, 1_000_000, seed);
        for which in [Which::Lambda1, Which::Lambda2] {
            let curve = marginal(which, m, p, DEFAULT_RESOLUTION, ChartMeasure::default()).expect("marginal");
            let r = compare_marginal(&curve, &samples, DEFAULT_BINS, 3).expect("comparison");
            pass &= r.kolmogorov_distance <= 0.01 + r.error_bar;
            parts.push(format!("({m},{p}) {} {}", which.name(), fmt(&r)));
        }
    }
    outcome(pass, parts.join("; "))
}

fn global_agreement() -> Outcome {
    let hi = lambda1_report(&dynamic(ModelKind::Global, 16, 0.0, 0.0, 0.8, 10_000, 21), 16, 0.8);
    let lo = lambda1_report(&dynamic(ModelKind::Global, 16, 0.0, 0.0, 0.4, 10_000, 22), 16, 0.4);
    outcome(
        hi.kolmogorov_distance <= 0.05 && lo.kolmogorov_distance > hi.kolmogorov_distance,
        format!("P=0.8 {}; P=0.4 {}", fmt(&hi), fmt(&lo)),
    )
}

fn coupling_ordering() -> Outcome {
    let k: Vec<ComparisonReport> = [0.01, 0.1, 1.0]
        .iter()
        .enumerate()
        .map(|(i, &eps)| lambda1_report(&dynamic(ModelKind::Coupling, 8, eps, 0.0, 0.8, 10_000, 31 + i as u64), 8, 0.8))
        .collect();
    let global = lambda1_report(&dynamic(ModelKind::Global, 8, 0.0, 0.0, 0.8, 10_000, 34), 8, 0.8);
    let (k001, k01, k1) = (k[0].kolmogorov_distance, k[1].kolmogorov_distance, k[2].kolmogorov_distance);
    let bar = k[2].error_bar.max(global.error_bar);
    let pass = k001 > k01 && k01 > k1 && (k1 - global.kolmogorov_distance).abs() <= 2.0 * bar;
    outcome(
        pass,
        format!(
            "ε=0.01 {}; ε=0.1 {}; ε=1 {}; global {}",
            fmt(&k[0]),
            fmt(&k[1]),
            fmt(&k[2]),
            fmt(&global)
        ),
    )
}

fn spectator_degeneracy() -> Outcome {
    let mut total = 0;
    let mut bad = 0;
    for (p, seed) in [(0.8, 41), (0.6, 42)] {
        let run = dynamic(ModelKind::Spectator, 8, 1.0, 0.0, p, 1000, seed);
        for r in run.converged() {
            total += 1;
            let v = r.spectrum.values();
            if v[0] > 1e-8 || v[1] > 1e-8 {
                bad += 1;
            }
        }
    }
    outcome(bad == 0 && total > 0, format!("{bad} of {total} converged realizations violate λ1, λ2 <= 1e-8"))
}

fn entanglement_dependence() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, kind) in [ModelKind::Spectator, ModelKind::Common].into_iter().enumerate() {
        let bell = lambda1_report(&dynamic(kind, 8, 1.0, FRAC_PI_4, 0.8, 10_000, 51 + 2 * i as u64), 8, 0.8);
        let weak = lambda1_report(&dynamic(kind, 8, 1.0, 0.2, 0.8, 10_000, 52 + 2 * i as u64), 8, 0.8);
        pass &= bell.kolmogorov_distance < 0.1 && weak.kolmogorov_distance >= 3.0 * bell.kolmogorov_distance;
        parts.push(format!("{} θ=π/4 {} θ=0.2 {}", kind.name(), fmt(&bell), fmt(&weak)));
    }
    outcome(pass, parts.join("; "))
}

fn entropy_width() -> Outcome {
    let p = 0.8;
    let s8 = entropy_distribution_at_fixed_purity(&mcmc(8, p, 100_000, 61), E).expect("entropy").std;
    let s16 = entropy_distribution_at_fixed_purity(&mcmc(16, p, 100_000, 62), E).expect("entropy").std;
    outcome(
        (1e-3..=1e-1).contains(&s8) && s16 < s8,
        format!("P={p}: std S (m=8) = {s8:.3e}, (m=16) = {s16:.3e}"),
    )
}

fn geometry() -> Outcome {
    let r = rotation_matrix();
    let mut ortho: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let dot: f64 = (0..4).map(|k| r[i][k] * r[j][k]).sum();
            ortho = ortho.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    let mut radius_err: f64 = 0.0;
    let mut rng = seeded(71);
    for _ in 0..1000 {
        let mut lam: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>());
        let s: f64 = lam.iter().sum();
        lam.iter_mut().for_each(|x| *x /= s);
        let y = rdens_core::simplex::rotate(&lam);
        let r2 = y.iter().map(|v| v * v).sum::<f64>();
        radius_err = radius_err.max((r2 - (purity(&lam) - 0.25)).abs());
    }
    // the face centroid is the tangency point at P = 1/3
    let tangency = (sphere_radius(1.0 / 3.0).expect("radius") - inradius()).abs();
    let mut face_err: f64 = 0.0;
    for c in face_normals() {
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        let touch = [-0.25 * c[0] / norm / norm, -0.25 * c[1] / norm / norm, -0.25 * c[2] / norm / norm];
        let lam = unrotate(&touch);
        face_err = face_err.max((purity(&lam) - 1.0 / 3.0).abs());
    }
    // equal-area: uniform points on the sphere fill equal-area annuli equally
    let annuli = 5;
    let n = 100_000;
    let mut counts = vec![0usize; annuli];
    let rad = sphere_radius(0.5).expect("radius");
    for _ in 0..n {
        let g: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let lam = unrotate(&[rad * g[0] / norm, rad * g[1] / norm, rad * g[2] / norm]);
        let q = project_spectrum(&lam);
        let r2 = q[0] * q[0] + q[1] * q[1];
        counts[((r2 * annuli as f64) as usize).min(annuli - 1)] += 1;
    }
    let expected = n as f64 / annuli as f64;
    let area_err = counts.iter().map(|&c| (c as f64 / expected - 1.0).abs()).fold(0.0, f64::max);
    let pass = ortho <= 1e-14 && radius_err <= 1e-12 && tangency <= 1e-12 && face_err <= 1e-12 && area_err <= 0.02;
    outcome(
        pass,
        format!(
            "orthogonality {ortho:.1e}, radius² {radius_err:.1e}, tangency {tangency:.1e}/{face_err:.1e}, worst annulus {:.2}%",
            100.0 * area_err
        ),
    )
}

fn metric_properties() -> Outcome {
    let mut rng = seeded(81);
    let mut random_masses = |k: usize| -> Vec<f64> {
        let v: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    };
    let f = random_masses(50);
    let mut pass = kolmogorov_distance(&f, &f).unwrap() == 0.0;
    let mut a = vec![0.0; 50];
    let mut b = vec![0.0; 50];
    a[..25].copy_from_slice(&random_masses(25));
    b[25..].copy_from_slice(&random_masses(25));
    pass &= (kolmogorov_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15;
    pass &= (kolmogorov_distance(&f, &[0.0; 50]).unwrap() - 0.5).abs() < 1e-15;
    let mut worst_asym: f64 = 0.0;
    let mut worst_triangle = f64::NEG_INFINITY;
    for _ in 0..100 {
        let (p, q, r) = (random_masses(50), random_masses(50), random_masses(50));
        let pq = kolmogorov_distance(&p, &q).unwrap();
        worst_asym = worst_asym.max((pq - kolmogorov_distance(&q, &p).unwrap()).abs());
        let excess = pq - kolmogorov_distance(&p, &r).unwrap() - kolmogorov_distance(&r, &q).unwrap();
        worst_triangle = worst_triangle.max(excess);
    }
    pass &= worst_asym == 0.0 && worst_triangle <= 1e-15;
    outcome(pass, format!("asymmetry {worst_asym:.1e}, worst triangle excess {worst_triangle:.2e}"))
}

fn analytic_spot_values() -> Outcome {
    let pk = peak_locations(4, 0.4).expect("peaks");
    let (minus, plus) = ((3.0 - 1.8f64.sqrt()) / 12.0, (3.0 + 1.8f64.sqrt()) / 12.0);
    let mut pass = (pk.minus - minus).abs() <= 1e-14 && (pk.plus - plus).abs() <= 1e-14 && !pk.plus_physical;
    let has_q3 = |p: f64| {
        boundary_conics(p).expect("conics").into_iter().find(|c| c.label == ConicLabel::Q3)
    };
    pass &= [0.26, 0.3, 0.33].iter().all(|&p| has_q3(p).is_none());
    pass &= has_q3(1.0 / 3.0).is_some_and(|c| c.is_degenerate());
    pass &= has_q3(0.4).is_some_and(|c| !c.is_degenerate());
    outcome(
        pass,
        format!("Λ- = {:.16}, Λ+ = {:.16} (physical: {})", pk.minus, pk.plus, pk.plus_physical),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1 constraint exactness", constraint_exactness),
        ("2 static self-consistency", static_self_consistency),
        ("3 marginal oracle equivalence", marginal_equivalence),
        ("4 global-model agreement", global_agreement),
        ("5 coupling-regime ordering", coupling_ordering),
        ("6 spectator degeneracy", spectator_degeneracy),
        ("7 entanglement dependence", entanglement_dependence),
        ("8 entropy width", entropy_width),
        ("9 simplex geometry", geometry),
        ("10 Kolmogorov metric properties", metric_properties),
        ("11 analytic spot values", analytic_spot_values),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.starts_with(&format!("{f} "))) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let status = if result.pass { "PASS" } else { "FAIL" };
        if !result.pass {
            failures += 1;
        }
        println!("{status} criterion {name}: {} [{:.1}s]", result.detail, start.elapsed().as_secs_f64());
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
