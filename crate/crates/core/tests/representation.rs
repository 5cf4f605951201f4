mod common;

use bethe_core::context::DeformationContext;
use bethe_core::operator::{relative_residual, OperatorMatrix};
use bethe_core::rep::{
    monodromy, permutation_operator, r_matrix, rll_residual, transfer, vacuum_residual, yang_baxter_residual,
    zero_modes,
};
use common::{c, points, random_chain};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex_q() -> impl Strategy<Value = Complex64> {
    (1.1f64..2.5, -0.6f64..0.6).prop_map(|(r, phi)| Complex64::from_polar(r, phi))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn yang_baxter_holds(n in 2usize..=4, q in complex_q(), seed in any::<u64>()) {
        let ctx = DeformationContext::new(q).unwrap();
        let p = points(seed, "ybe", 3, &[]);
        prop_assert!(yang_baxter_residual(p[0], p[1], p[2], n, &ctx).unwrap() <= 1e-12);
    }

    #[test]
    fn r_at_equal_points_is_permutation(n in 2usize..=4, q in complex_q(), seed in any::<u64>()) {
        let ctx = DeformationContext::new(q).unwrap();
        let u = points(seed, "ruu", 1, &[])[0];
        let diff = r_matrix(u, u, n, &ctx).unwrap().matrix() - permutation_operator(n).matrix();
        prop_assert!(diff.camax() <= 1e-14);
    }

    #[test]
    fn rll_holds(n in 2usize..=3, l in 1usize..=3, seed in any::<u64>()) {
        let chain = random_chain(n, l, seed);
        let p = points(seed, "rll", 2, chain.z());
        prop_assert!(rll_residual(&chain, p[0], p[1]).unwrap() <= 1e-10);
    }

    #[test]
    fn transfer_matrices_commute(n in 2usize..=3, l in 1usize..=4, seed in any::<u64>()) {
        let chain = random_chain(n, l, seed);
        let p = points(seed, "commute", 2, chain.z());
        let (a, b) = (transfer(&chain, p[0]).unwrap(), transfer(&chain, p[1]).unwrap());
        let comm = a.commutator(&b);
        prop_assert!(comm.norm() <= 1e-10 * a.norm() * b.norm());
    }

    #[test]
    fn vacuum_is_triangular_with_lambda_diagonal(n in 2usize..=4, l in 1usize..=3, seed in any::<u64>()) {
        let chain = random_chain(n, l, seed);
        for t in points(seed, "vacuum", 5, chain.z()) {
            prop_assert!(vacuum_residual(&chain, t).unwrap() <= 1e-12);
        }
    }
}

#[test]
fn rll_on_longest_chains() {
    for (n, l) in [(2, 4), (3, 4)] {
        let chain = random_chain(n, l, 17);
        let p = points(17, "rll-long", 2, chain.z());
        assert!(rll_residual(&chain, p[0], p[1]).unwrap() <= 1e-10);
    }
}

#[test]
fn transfer_commutes_on_five_sites() {
    let chain = random_chain(3, 5, 23);
    let p = points(23, "commute-long", 2, chain.z());
    let (a, b) = (transfer(&chain, p[0]).unwrap(), transfer(&chain, p[1]).unwrap());
    assert!(a.commutator(&b).norm() <= 1e-10 * a.norm() * b.norm());
}

#[test]
fn r_degenerates_to_identity_near_q_one() {
    let ctx = DeformationContext::real(1.0 + 1e-8).unwrap();
    for n in 2..=4 {
        let r = r_matrix(c(0.7, 0.2), c(-1.1, 0.5), n, &ctx).unwrap();
        let diff = r.matrix() - OperatorMatrix::identity(n * n).matrix();
        assert!(diff.camax() <= 1e-6);
    }
}

#[test]
fn monodromy_tends_to_zero_modes() {
    let chain = random_chain(3, 2, 31);
    let (plus, minus) = zero_modes(&chain).unwrap();
    let far = monodromy(&chain, c(3e7, 4e7)).unwrap().to_full();
    let near = monodromy(&chain, c(3e-8, -4e-8)).unwrap().to_full();
    assert!(relative_residual(&far, &plus.to_full()) <= 1e-6);
    assert!(relative_residual(&near, &minus.to_full()) <= 1e-6);
    // and the approach is first order in 1/t
    let mid = monodromy(&chain, c(3e3, 4e3)).unwrap().to_full();
    let gap = relative_residual(&mid, &plus.to_full());
    assert!(gap > 1e-6 && gap < 1e-2, "{gap}");
}
