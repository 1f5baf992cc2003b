use std::f64::consts::PI;

use proptest::prelude::*;
use xxz_ness::closedform::{correlator_bulk_term, scaled_correlator_sample};
use xxz_ness::density::pauli_string_expectation;
use xxz_ness::spin::{current_operator, pauli_on, Pauli};
use xxz_ness::*;

fn chain(delta: f64, eps: f64, n: usize) -> TransferSet64 {
    build_transfer(&chain_table(delta, eps, n).unwrap(), Balancing::On).unwrap()
}

#[test]
fn transfer_observables_match_dense_density() {
    let n = 6;
    for (delta, eps) in [(0.5, 1.0), (1.0, 0.3), (1.5, 2.0), (-0.4, 0.8)] {
        let ts = chain(delta, eps, n);
        let c = ChainContraction::new(&ts, n).unwrap();
        let rho = ness_density(delta, eps, n).unwrap();
        for j in 1..=n {
            let sz = rho.expectation(&pauli_on(n, j, Pauli::Z)).re;
            assert!((sz - c.sz(j).unwrap()).abs() < 1e-13);
            for k in j + 1..=n {
                let op = pauli_on::<f64>(n, j, Pauli::Z).matmul(&pauli_on(n, k, Pauli::Z));
                assert!((rho.expectation(&op).re - c.zz(j, k).unwrap()).abs() < 1e-13);
            }
            if j < n {
                let jj = rho.expectation(&current_operator(n, j)).re;
                assert!((jj - c.current().unwrap()).abs() < 1e-13);
                assert!((jj - c.current_at(j).unwrap()).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn oracle_agrees_beyond_the_acceptance_grid() {
    for (n, delta, eps) in [(3, -0.5, 0.7), (4, 2.5, 0.05), (5, 0.9, 1.3)] {
        let oracle = oracle_density(n, delta, eps).unwrap();
        let analytic = ness_density(delta, eps, n).unwrap();
        assert!(analytic.rho.max_abs_diff(&oracle.density.rho) < 1e-10, "n={n} Δ={delta}");
        let l = build_liouvillian(n, delta, eps).unwrap();
        assert!(l.fixed_point_residual(&analytic.rho) <= 1e-10 * l.norm());
    }
}

#[test]
fn isotropic_correlations_follow_the_bulk_term() {
    // Richardson extrapolation in 1/n from n = 801 and n = 1601
    let points = [(0.25, 0.75), (0.1, 0.3), (0.2, 0.4), (0.1, 0.9), (0.4, 0.6)];
    let sample = |n: usize| {
        let ts = chain(1.0, 1.0, n);
        let c = ChainContraction::new(&ts, n).unwrap();
        points.map(|(x, y)| scaled_correlator_sample(&c, x, y).unwrap())
    };
    let (a, b) = (sample(801), sample(1601));
    for (i, &(x, y)) in points.iter().enumerate() {
        let limit = 2.0 * b[i] - a[i];
        let expect = PI / 4.0 * correlator_bulk_term(x, y);
        assert!((limit - expect).abs() < 1e-3, "({x}, {y}): {limit} vs {expect}");
    }
}

#[test]
fn pauli_strings_through_doubled_matrices() {
    let n = 5;
    let m = build_mpo(&chain_table(0.7, 0.9, n).unwrap());
    let b = build_b_matrices(&m);
    let rho = build_density(&build_cholesky(&m, n).unwrap());
    for word in ["zzzzz", "+-0z0", "0+z-0", "z0000"] {
        let ops = xxz_ness::spin::parse_pauli_string(word).unwrap();
        let dense = ops
            .iter()
            .enumerate()
            .map(|(j, &p)| pauli_on::<f64>(n, j + 1, p))
            .reduce(|a, b| a.matmul(&b))
            .unwrap();
        let e = pauli_string_expectation(&b, &ops).unwrap();
        assert!((e - rho.expectation(&dense)).norm() < 1e-13, "{word}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn profile_is_antisymmetric_and_bounded(delta in -0.9f64..3.0, eps in 0.05f64..10.0, n in 2usize..60) {
        let ts = chain(delta, eps, n);
        let c = ChainContraction::new(&ts, n).unwrap();
        let p = c.profile().unwrap();
        for j in 0..n {
            prop_assert!(p[j].abs() <= 1.0 + 1e-12);
            prop_assert!((p[j] + p[n - 1 - j]).abs() <= 1e-10);
        }
        prop_assert!(c.current().unwrap() > 0.0);
    }

    #[test]
    fn balancing_is_invisible(delta in -0.9f64..3.0, eps in 0.05f64..10.0, n in 2usize..40) {
        let on = chain(delta, eps, n);
        let off = build_transfer(&chain_table(delta, eps, n).unwrap(), Balancing::Off).unwrap();
        let a = observables(&on, delta, n, false).unwrap();
        let b = observables(&off, delta, n, false).unwrap();
        prop_assert!((a.current / b.current - 1.0).abs() < 1e-10);
        for (x, y) in a.profile.iter().zip(&b.profile) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}
