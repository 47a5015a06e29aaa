use proptest::prelude::*;

use rdens_core::analysis::{kolmogorov_distance, Histogram1D};
use rdens_core::ensemble::{jacobian_factor, log_density, recover_tail, ChartMeasure, ChartPoint};
use rdens_core::mcmc::{potential_energy, solve_tail_for_entropy};
use rdens_core::quantum::{haar_random_state, partial_trace_env, purity, von_neumann_entropy};
use rdens_core::rng::seeded;
use rdens_core::simplex::{inverse_projection, isometric_projection, rotate, unrotate, SphericalCoords};
use rdens_core::{EigenvalueVector, HilbertSpaceLayout};

fn spectrum4() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.001f64..1.0).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.map(|x| x / s)
    })
}

fn masses(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum::<f64>().max(1e-300);
        v.into_iter().map(|x| x / s).collect()
    })
}

proptest! {
    #[test]
    fn tail_recovery_restores_the_spectrum(lam in spectrum4()) {
        let p = purity(&lam);
        let (a, b) = recover_tail(&lam[..2], p).unwrap();
        let mut tail = [lam[2], lam[3]];
        tail.sort_by(f64::total_cmp);
        prop_assert!((a - tail[0]).abs() < 1e-7 && (b - tail[1]).abs() < 1e-7);
        let c = ChartPoint::new(&lam[..2], p).unwrap();
        let e = c.eigenvalues();
        prop_assert!((e.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((purity(&e) - p).abs() < 1e-12);
    }

    #[test]
    fn measures_differ_by_powers_of_the_jacobian(lam in spectrum4(), m in 4usize..20) {
        let gap = (0..4).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| (lam[i] - lam[j]).abs()).fold(1.0, f64::min);
        prop_assume!(gap > 1e-3);
        let p = purity(&lam);
        let e = (m - 4) as f64;
        let free = [lam[0], lam[1]];
        let ln_j = jacobian_factor(&free, p).unwrap().ln();
        let cond = log_density(&free, e, p, ChartMeasure::Conditional);
        let leb = log_density(&free, e, p, ChartMeasure::Lebesgue);
        let weighted = log_density(&free, e, p, ChartMeasure::JacobianWeighted);
        let tol = 1e-7 * leb.abs().max(1.0);
        prop_assert!((cond + ln_j - leb).abs() < tol);
        prop_assert!((weighted - ln_j - leb).abs() < tol);
        prop_assert!((leb + potential_energy(&lam, m)).abs() < tol);
    }

    #[test]
    fn energy_is_permutation_invariant(lam in spectrum4(), m in 4usize..40) {
        let e = potential_energy(&lam, m);
        let r = potential_energy(&[lam[3], lam[1], lam[0], lam[2]], m);
        prop_assert!((e - r).abs() <= 1e-12 * e.abs().max(1.0));
    }

    #[test]
    fn entropy_tail_hits_target(x in 0.0f64..0.3, y in 0.0f64..0.3, frac in 0.0f64..1.0) {
        let r = 1.0 - x - y;
        let xlnx = |v: f64| if v > 0.0 { v * v.ln() } else { 0.0 };
        let lo = -xlnx(x) - xlnx(y) - xlnx(r);
        let hi = -xlnx(x) - xlnx(y) - 2.0 * xlnx(r / 2.0);
        let target = lo + frac * (hi - lo);
        let (a, b) = solve_tail_for_entropy(&[x, y], target, std::f64::consts::E).unwrap();
        prop_assert!((von_neumann_entropy(&[x, y, a, b], std::f64::consts::E) - target).abs() < 1e-10);
        prop_assert!(a >= 0.0 && a <= b);
    }

    #[test]
    fn kolmogorov_is_a_bounded_metric(p in masses(20), q in masses(20), r in masses(20)) {
        let pq = kolmogorov_distance(&p, &q).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
        prop_assert_eq!(pq, kolmogorov_distance(&q, &p).unwrap());
        let via = kolmogorov_distance(&p, &r).unwrap() + kolmogorov_distance(&r, &q).unwrap();
        prop_assert!(pq <= via + 1e-12);
    }

    #[test]
    fn histogram_masses_sum_to_one(xs in prop::collection::vec(-0.5f64..1.5, 1..200)) {
        let h = Histogram1D::from_values(&xs, 0.0, 1.0, 17).unwrap();
        prop_assert!((h.masses().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_round_trip(lam in spectrum4()) {
        let back = unrotate(&rotate(&lam));
        for k in 0..4 {
            prop_assert!((back[k] - lam[k]).abs() < 1e-14);
        }
        let y = rotate(&lam);
        prop_assert!(((y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) - (purity(&lam) - 0.25)).abs() < 1e-12);
    }

    #[test]
    fn projection_round_trip(theta in 0.0f64..3.14, phi in -3.14f64..3.14) {
        let p = isometric_projection(SphericalCoords { theta, phi });
        prop_assert!(p[0].hypot(p[1]) <= 1.0 + 1e-15);
        let c = inverse_projection(p).unwrap();
        prop_assert!((c.theta - theta).abs() < 1e-9);
        if theta > 1e-6 {
            prop_assert!((c.phi - phi).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenvalue_vectors_are_sorted_and_bounded(lam in spectrum4()) {
        let v = EigenvalueVector::new(lam.to_vec()).unwrap();
        prop_assert!(v.values().windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(v.purity() >= 0.25 - 1e-12 && v.purity() <= 1.0 + 1e-12);
        prop_assert!(v.entropy() >= -1e-12 && v.entropy() <= 4f64.ln() + 1e-12);
    }

    #[test]
    fn reduced_states_are_valid(seed in any::<u64>(), env in 1usize..9) {
        let layout = HilbertSpaceLayout::two_qubits(env).unwrap();
        let psi = haar_random_state(layout.total_dim(), &mut seeded(seed)).unwrap();
        let rho = partial_trace_env(&psi, &layout).unwrap();
        let ev = rho.eigenvalues().unwrap();
        prop_assert!((ev.values().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(rho.purity() >= 0.25 - 1e-12 && rho.purity() <= 1.0 + 1e-12);
        // rank is at most the environment dimension
        prop_assert!(ev.values().iter().filter(|&&x| x > 1e-9).count() <= env);
    }
}
