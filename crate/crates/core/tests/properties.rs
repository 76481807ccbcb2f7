mod common;

use proptest::prelude::*;

use common::{dense, random_ocp, random_positive_real, random_sparse, rel_err};
use skewsplit::optctl::{midpoint_step, reduced_apply, ReducedOperator};
use skewsplit::rng::SplitMix64;
use skewsplit::sparse::{read_matrix_market, write_matrix_market};
use skewsplit::vecops::dot;
use skewsplit::{split, LinearOperator, PrecondSpec, Preconditioner, SolverConfig};

fn seeds() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_parts_are_symmetric_and_skew(seed in seeds(), n in 1usize..60, per_row in 1usize..5) {
        let mut rng = SplitMix64::new(seed);
        let a = random_sparse(&mut rng, n, n, per_row);
        let sp = split(&a).unwrap();
        let (ad, hd, sd) = (dense(&a), dense(&sp.h), dense(&sp.s));
        prop_assert!((&hd - hd.transpose()).norm() <= 1e-15 * ad.norm().max(1.0));
        prop_assert!((&sd + sd.transpose()).norm() <= 1e-15 * ad.norm().max(1.0));
        prop_assert!((hd + sd - &ad).norm() <= 1e-15 * ad.norm().max(1.0));
    }

    #[test]
    fn skew_part_has_zero_quadratic_form(seed in seeds(), n in 1usize..80) {
        let mut rng = SplitMix64::new(seed);
        let sp = split(&random_sparse(&mut rng, n, n, 4)).unwrap();
        let x = rng.vector(n);
        let sx = sp.s.spmv(&x).unwrap();
        let scale = dot(&x, &x) * sp.s.frobenius_norm().max(1.0);
        prop_assert!(dot(&x, &sx).abs() <= 1e-13 * scale);
    }

    #[test]
    fn spmv_matches_dense(seed in seeds(), rows in 1usize..50, cols in 1usize..50) {
        let mut rng = SplitMix64::new(seed);
        let a = random_sparse(&mut rng, rows, cols, 3);
        let x = rng.vector(cols);
        let y = a.spmv(&x).unwrap();
        let yd = dense(&a) * nalgebra::DVector::from_column_slice(&x);
        prop_assert!(rel_err(&y, yd.as_slice()) <= 1e-14);
        let z = rng.vector(rows);
        let at = a.transpose().spmv(&z).unwrap();
        let atd = dense(&a).transpose() * nalgebra::DVector::from_column_slice(&z);
        prop_assert!(rel_err(&at, atd.as_slice()) <= 1e-14);
    }

    #[test]
    fn matrix_market_round_trip(seed in seeds(), rows in 1usize..30, cols in 1usize..30) {
        let mut rng = SplitMix64::new(seed);
        let a = random_sparse(&mut rng, rows, cols, 3);
        let path = std::env::temp_dir().join(format!("skewsplit-prop-{seed}-{rows}-{cols}.mtx"));
        write_matrix_market(&a, &path).unwrap();
        let b = read_matrix_market(&path).unwrap();
        std::fs::remove_file(&path).ok();
        prop_assert_eq!(a.shape(), b.shape());
        prop_assert!((dense(&a) - dense(&b)).norm() == 0.0);
    }

    #[test]
    fn sparse_adjoint_identity(seed in seeds(), rows in 1usize..40, cols in 1usize..40) {
        let mut rng = SplitMix64::new(seed);
        let a = random_sparse(&mut rng, rows, cols, 3);
        let (x, y) = (rng.vector(cols), rng.vector(rows));
        let lhs = dot(&y, &a.apply_vec(&x).unwrap());
        let rhs = dot(&a.apply_adjoint_vec(&y).unwrap(), &x);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn reduced_operator_is_symmetric(seed in seeds(), n in 3usize..30) {
        let mut rng = SplitMix64::new(seed);
        let m = 1 + rng.next_below(n);
        let q = 1 + rng.next_below(n);
        let ocp = random_ocp(&mut rng, n, m, q);
        let inner = SolverConfig::direct();
        let (u, v) = (rng.vector(m), rng.vector(m));
        let gu = reduced_apply(&ocp, &inner, &u).unwrap();
        let gv = reduced_apply(&ocp, &inner, &v).unwrap();
        let (a, b) = (dot(&v, &gu), dot(&u, &gv));
        prop_assert!((a - b).abs() <= 1e-10 * (a.abs() + b.abs() + 1.0));
        // Positive definite: the regularization alone gives u^T G u >= lambda |u|^2.
        prop_assert!(dot(&u, &gu) >= ocp.lambda_reg * dot(&u, &u) * (1.0 - 1e-10));
    }

    #[test]
    fn cost_is_consistent_with_gradient_direction(seed in seeds(), n in 3usize..25) {
        let mut rng = SplitMix64::new(seed);
        let m = 1 + rng.next_below(n);
        let q = 1 + rng.next_below(n);
        let ocp = random_ocp(&mut rng, n, m, q);
        let red = ReducedOperator::new(&ocp, &SolverConfig::direct()).unwrap();
        let u = rng.vector(m);
        let g = red.gradient(&u).unwrap();
        let gn = dot(&g, &g).sqrt();
        prop_assume!(gn > 1e-8);
        let step = 1e-4 / gn;
        let down: Vec<f64> = u.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        prop_assert!(red.cost(&down).unwrap() < red.cost(&u).unwrap());
    }

    #[test]
    fn preconditioners_are_symmetric(seed in seeds(), n in 2usize..60, which in 0usize..3) {
        let mut rng = SplitMix64::new(seed);
        let sp = random_positive_real(&mut rng, n, 1.0);
        let spec = [PrecondSpec::ExactSym, PrecondSpec::Jacobi, PrecondSpec::IncompleteCholesky { drop_tol: 0.01 }][which].clone();
        let p = Preconditioner::build(&spec, &sp.h, None).unwrap();
        prop_assert!(p.is_symmetric());
        let (x, y) = (rng.vector(n), rng.vector(n));
        let a = dot(&y, &p.apply_vec(&x).unwrap());
        let b = dot(&x, &p.apply_vec(&y).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * (a.abs() + b.abs() + 1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Implicit midpoint never increases the Euclidean norm when M has a
    /// positive semidefinite symmetric part.
    #[test]
    fn midpoint_is_dissipative(seed in seeds(), n in 2usize..40, dt in 1e-3f64..10.0) {
        let mut rng = SplitMix64::new(seed);
        let m = random_positive_real(&mut rng, n, 2.0);
        let mut x = rng.vector(n);
        let cfg = SolverConfig::direct();
        for _ in 0..100 {
            let next = midpoint_step(&m, dt, &x, &cfg).unwrap();
            prop_assert!(dot(&next, &next).sqrt() <= dot(&x, &x).sqrt() * (1.0 + 1e-12));
            x = next;
        }
    }
}
