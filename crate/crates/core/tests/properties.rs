use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use truncent::linalg::{max_abs_diff, CMatrix};
use truncent::measures::{
    entropy_of_entanglement, fannes_bound, free_energy, log_derivative_action, relative_entropy,
    schmidt_entropy, von_neumann_entropy,
};
use truncent::random;
use truncent::space::{gibbs_state, harmonic_space, mean_energy};
use truncent::states::{
    partial_trace_b, partial_transpose_matrix, schmidt_decompose, tensor_power_pure,
    trace_norm_distance, DEFAULT_VECTOR_CAP,
};
use truncent::DensityOperator;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix logarithm through the eigendecomposition.
fn logm(m: &CMatrix) -> CMatrix {
    DensityOperator::new(m.clone()).unwrap().eigen().map(f64::ln)
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=4, 2usize..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_contracts((da, db) in dims(), seed in any::<u64>()) {
        let s = harmonic_space(da, db).unwrap();
        let mut r = rng(seed);
        let x = random::density(s.dim(), &mut r);
        let y = random::density(s.dim(), &mut r);
        let before = trace_norm_distance(&x, &y).unwrap();
        let after = trace_norm_distance(
            &partial_trace_b(&x, &s).unwrap(),
            &partial_trace_b(&y, &s).unwrap(),
        ).unwrap();
        prop_assert!(after <= before + 1e-10);
    }

    #[test]
    fn partial_transpose_is_involution((da, db) in dims(), seed in any::<u64>()) {
        let s = harmonic_space(da, db).unwrap();
        let x = random::density(s.dim(), &mut rng(seed));
        let twice = partial_transpose_matrix(&partial_transpose_matrix(x.matrix(), &s).unwrap(), &s).unwrap();
        prop_assert!(max_abs_diff(&twice, x.matrix()) < 1e-12);
    }

    #[test]
    fn schmidt_coefficients_local_invariance((da, db) in dims(), seed in any::<u64>()) {
        let s = harmonic_space(da, db).unwrap();
        let mut r = rng(seed);
        let psi = random::pure_state(s.dim(), &mut r);
        let moved = psi.apply(&random::local_unitary(&s, &mut r)).unwrap();
        let a = schmidt_decompose(&psi, &s).unwrap().coefficients;
        let b = schmidt_decompose(&moved, &s).unwrap().coefficients;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        let e = entropy_of_entanglement(&psi, &s).unwrap();
        prop_assert!((e - entropy_of_entanglement(&moved, &s).unwrap()).abs() < 1e-9);
        prop_assert!((e - schmidt_entropy(&psi, &s).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn trace_distance_is_metric(seed in any::<u64>(), d in 2usize..=8) {
        let mut r = rng(seed);
        let x = random::density(d, &mut r);
        let y = random::density(d, &mut r);
        let z = random::density(d, &mut r);
        let xy = trace_norm_distance(&x, &y).unwrap();
        prop_assert!((xy - trace_norm_distance(&y, &x).unwrap()).abs() < 1e-10);
        prop_assert!(xy <= trace_norm_distance(&x, &z).unwrap() + trace_norm_distance(&z, &y).unwrap() + 1e-10);
        prop_assert!(trace_norm_distance(&x, &x).unwrap() < 1e-10);
    }

    #[test]
    fn entropy_is_additive(seed in any::<u64>(), d1 in 2usize..=4, d2 in 2usize..=4) {
        let mut r = rng(seed);
        let x = random::density(d1, &mut r);
        let y = random::density(d2, &mut r);
        let joint = von_neumann_entropy(&x.kron(&y)).unwrap();
        let sum = von_neumann_entropy(&x).unwrap() + von_neumann_entropy(&y).unwrap();
        prop_assert!((joint - sum).abs() < 1e-9);
    }

    #[test]
    fn entanglement_of_copies_is_additive(seed in any::<u64>(), n in 1usize..=3) {
        let s = harmonic_space(2, 3).unwrap();
        let psi = random::pure_state(6, &mut rng(seed));
        let (power, ps) = tensor_power_pure(&psi, &s, n, DEFAULT_VECTOR_CAP).unwrap();
        let e = entropy_of_entanglement(&psi, &s).unwrap();
        prop_assert!((schmidt_entropy(&power, &ps).unwrap() - n as f64 * e).abs() < 1e-8);
    }

    #[test]
    fn mean_energy_is_linear(seed in any::<u64>(), p in 0.0f64..=1.0) {
        let s = harmonic_space(3, 3).unwrap();
        let mut r = rng(seed);
        let x = random::density(9, &mut r);
        let y = random::density(9, &mut r);
        let mix = DensityOperator::mixture(&[(p, &x), (1.0 - p, &y)]).unwrap();
        let lhs = mean_energy(&s, &mix).unwrap();
        let rhs = p * mean_energy(&s, &x).unwrap() + (1.0 - p) * mean_energy(&s, &y).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn free_energy_identity_and_minimality(seed in any::<u64>(), beta in prop::sample::select(vec![0.5, 1.0, 2.0])) {
        let s = harmonic_space(3, 3).unwrap();
        let omega = random::density(9, &mut rng(seed));
        let g = gibbs_state(&s, beta).unwrap();
        let rel_nats = relative_entropy(&omega, &g).unwrap() * std::f64::consts::LN_2;
        let f_omega = free_energy(&omega, beta, &s).unwrap();
        let f_gibbs = free_energy(&g, beta, &s).unwrap();
        prop_assert!((rel_nats - beta * (f_omega - f_gibbs)).abs() < 1e-8);
        prop_assert!(f_gibbs <= f_omega + 1e-9);
    }

    #[test]
    fn fannes_holds_in_window(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random::density(4, &mut r);
        let y = random::density(4, &mut r);
        let mix = DensityOperator::mixture(&[(0.9, &x), (0.1, &y)]).unwrap();
        let t = trace_norm_distance(&x, &mix).unwrap();
        prop_assume!(t <= (-1.0f64).exp());
        let gap = (von_neumann_entropy(&x).unwrap() - von_neumann_entropy(&mix).unwrap()).abs();
        prop_assert!(gap <= fannes_bound(t, 4).unwrap() + 1e-12);
    }

    #[test]
    fn log_derivative_matches_finite_differences(seed in any::<u64>(), d in 2usize..=5) {
        let mut r = rng(seed);
        let rho = DensityOperator::mixture(&[
            (0.8, &random::density(d, &mut r)),
            (0.2, &DensityOperator::maximally_mixed(d)),
        ]).unwrap();
        let dir = random::density(d, &mut r).into_matrix() - CMatrix::identity(d, d).unscale(d as f64);
        let action = log_derivative_action(&rho, &dir).unwrap();
        let base = logm(rho.matrix());
        let err = |h: f64| {
            let moved = rho.matrix() + dir.scale(h);
            ((logm(&moved) - &base).unscale(h) - &action).norm()
        };
        let errs: Vec<f64> = [1e-3, 1e-4, 1e-5].iter().map(|&h| err(h)).collect();
        // First-order error: one decade of h buys roughly one decade of error.
        prop_assert!(errs[0] < 1e-1);
        prop_assert!(errs[1] < errs[0] * 0.2 + 1e-9);
        prop_assert!(errs[2] < errs[1] * 0.2 + 1e-8);
    }
}
