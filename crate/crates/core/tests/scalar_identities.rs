mod common;

use bethe_core::context::DeformationContext;
use bethe_core::kernels::{
    beta_factor, bethe_rhs, partial_fraction_check, partition_factor_z, v_tilde, v_tilde_second_form, x_tilde,
    y_m_factor, z_m_factor,
};
use bethe_core::params::BetheParameterSet;
use bethe_core::qsym::{
    check_cyclic, check_decomposition, check_idempotence, check_q_symmetric, check_shift_to_end, check_shift_to_front,
    current_product_invariance, pi_coefficient, Permutation, Reading, ShiftForm, TypedFunction,
};
use bethe_core::rational::rel_diff;
use common::points;
use num_complex::Complex64;
use proptest::prelude::*;

fn ctx_for(seed: u64) -> DeformationContext {
    DeformationContext::random(seed).unwrap().with_seed(seed)
}

fn scale_factor() -> impl Strategy<Value = Complex64> {
    (0.2f64..5.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, phi)| Complex64::from_polar(r, phi))
}

/// Rational test function with poles away from the sampling annulus.
fn probe_function(n: usize) -> TypedFunction {
    TypedFunction::single(n, move |t| {
        let mut acc = Complex64::new(1.0, 0.0);
        for (k, &x) in t.iter().enumerate() {
            acc *= (x + 0.3 * (k as f64 + 1.0)) / (x - Complex64::new(3.5, 0.4 * k as f64));
        }
        Ok(acc + t[0] * t[n - 1])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    #[test]
    fn v_tilde_forms_agree(k in 1usize..=5, seed in any::<u64>()) {
        let ctx = ctx_for(seed);
        let p = points(seed, "v-tilde", 2 * k, &[]);
        let (upper, lower) = p.split_at(k);
        let a = v_tilde(upper, lower, &ctx).unwrap();
        let b = v_tilde_second_form(upper, lower, &ctx).unwrap();
        prop_assert!(rel_diff(a, b) <= 1e-10);
    }

    #[test]
    fn partial_fraction_identity(j in 3usize..=6, seed in any::<u64>()) {
        let ctx = ctx_for(seed);
        let p = points(seed, "partial-fraction", j, &[]);
        let res = partial_fraction_check(j, p[0], &p[1..], &ctx).unwrap();
        prop_assert!(res.relative() <= 1e-12, "{}", res.relative());
    }

    #[test]
    fn kernels_depend_on_ratios_only(seed in any::<u64>(), lambda in scale_factor()) {
        let ctx = ctx_for(seed);
        let p = points(seed, "homogeneity", 7, &[]);
        let tbar = BetheParameterSet::new(vec![p[0..3].to_vec(), p[3..5].to_vec(), p[5..7].to_vec()]).unwrap();
        let scaled = tbar.scaled(lambda);
        let pairs: Vec<(Complex64, Complex64)> = vec![
            (bethe_rhs(2, 1, &tbar, &ctx).unwrap(), bethe_rhs(2, 1, &scaled, &ctx).unwrap()),
            (beta_factor(&tbar, &ctx).unwrap(), beta_factor(&scaled, &ctx).unwrap()),
            (x_tilde(&tbar, &ctx).unwrap(), x_tilde(&scaled, &ctx).unwrap()),
            (z_m_factor(2, &tbar, &ctx).unwrap(), z_m_factor(2, &scaled, &ctx).unwrap()),
            (y_m_factor(1, 3, &tbar, &ctx).unwrap(), y_m_factor(1, 3, &scaled, &ctx).unwrap()),
            (
                partition_factor_z(&tbar, &[0, 0, 0], &[1, 1, 1], &[3, 2, 2], &ctx).unwrap(),
                partition_factor_z(&scaled, &[0, 0, 0], &[1, 1, 1], &[3, 2, 2], &ctx).unwrap(),
            ),
        ];
        for (a, b) in pairs {
            prop_assert!(rel_diff(a, b) <= 1e-10, "{a} vs {b}");
        }
        let v: Vec<Complex64> = p[..4].iter().map(|x| x * lambda).collect();
        prop_assert!(rel_diff(v_tilde(&p[..2], &p[2..4], &ctx).unwrap(), v_tilde(&v[..2], &v[2..], &ctx).unwrap()) <= 1e-10);
        for sigma in Permutation::all(3) {
            let a = pi_coefficient(&sigma, &p[..3], &ctx, Reading::Primary).unwrap();
            let b = pi_coefficient(&sigma, &v[..3], &ctx, Reading::Primary).unwrap();
            prop_assert!(rel_diff(a, b) <= 1e-10);
        }
    }

    #[test]
    fn action_preserves_current_products(n in 2usize..=4, seed in any::<u64>()) {
        let ctx = ctx_for(seed);
        let t = points(seed, "currents", n, &[]);
        prop_assert!(current_product_invariance(n, &t, &ctx, Reading::Primary).unwrap() <= 1e-10);
    }
}

#[test]
fn symmetrization_identities_for_small_counts() {
    for n in 1..=4 {
        let ctx = ctx_for(40 + n as u64);
        let g = probe_function(n);
        assert!(check_idempotence(&g, &ctx, Reading::Primary).unwrap().passed(), "idempotence n={n}");
        assert!(check_q_symmetric(&g, &ctx, Reading::Primary).unwrap().passed(), "q-symmetric n={n}");
        assert!(check_cyclic(&g, &ctx, Reading::Primary).unwrap().passed(), "cyclic n={n}");
        assert!(
            check_shift_to_end(&g, &ctx, Reading::Primary, ShiftForm::Derived).unwrap().passed(),
            "shift end n={n}"
        );
        assert!(
            check_shift_to_front(&g, &ctx, Reading::Primary, ShiftForm::Derived).unwrap().passed(),
            "shift front n={n}"
        );
        for s in 0..=n {
            assert!(check_decomposition(&g, s, &ctx, Reading::Primary).unwrap().passed(), "decomposition n={n} s={s}");
        }
    }
}

#[test]
fn identity_reports_use_twenty_five_points() {
    let ctx = ctx_for(3);
    let rep = check_idempotence(&probe_function(3), &ctx, Reading::Primary).unwrap();
    assert_eq!(rep.samples.len(), 25);
}
