//! Off-shell nested Bethe vectors.
//!
//! The rank-`N` vector is `Σ c_{a_1..a_n} T_{1,a_1}(t_1^1) ⋯ T_{1,a_n}(t_n^1) Ω`
//! with `c` the rank-`N-1` vector of an auxiliary chain whose
//! inhomogeneities are the first-type roots and whose twist is `κ_2..κ_N`;
//! auxiliary color `b` stands for color `b+1`. Creation operators appear in
//! ascending root order from left to right.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{beta_factor, tau_eigenvalue};
use crate::operator::SiteLayout;
use crate::params::BetheParameterSet;
use crate::rep::{monodromy, transfer, vacuum_data, BlockLOperator, ChainSpec};

/// Norm below which a vector counts as degenerate.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Smallest accepted ratio of extreme singular values of the unwanted-term basis.
pub const ILL_POSED_RATIO: f64 = 1e-10;

/// Largest root count accepted by the unwanted-term decomposition.
pub const MAX_UNWANTED_ROOTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Product of creation operators as built by the recursion.
    Plain,
    /// Plain vector times `β · Π_{a≥2} Π_ℓ λ_a(t_ℓ^{a-1})`.
    Modified,
}

#[derive(Debug, Clone)]
pub struct BetheVector {
    pub params: BetheParameterSet,
    pub vector: DVector<Complex64>,
    pub normalization: Normalization,
}

/// Color occupancies `(L - n_1, n_1 - n_2, …, n_{N-1})` of a sector.
/// `None` when the sector is not admissible.
pub fn sector_occupancy(length: usize, nbar: &[usize]) -> Option<Vec<usize>> {
    let mut counts = vec![length];
    counts.extend_from_slice(nbar);
    counts.push(0);
    counts.windows(2).map(|w| w[0].checked_sub(w[1])).collect()
}

fn check_layout(chain: &ChainSpec, params: &BetheParameterSet) -> Result<()> {
    if params.num_types() + 1 != chain.rank() {
        return Err(Error::Dimension(format!("{} root types for rank {}", params.num_types(), chain.rank())));
    }
    params.validate(chain.ctx())
}

pub fn nested_vector(chain: &ChainSpec, params: &BetheParameterSet) -> Result<BetheVector> {
    check_layout(chain, params)?;
    let vector = if params.is_admissible(chain.len()) {
        nested_raw(chain, params)?
    } else {
        log::warn!("inadmissible counts {:?} on length {}: zero vector", params.nbar(), chain.len());
        DVector::zeros(chain.dim())
    };
    Ok(BetheVector { params: params.clone(), vector, normalization: Normalization::Plain })
}

fn vacuum(dim: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(dim);
    v[0] = Complex64::new(1.0, 0.0);
    v
}

fn nested_raw(chain: &ChainSpec, params: &BetheParameterSet) -> Result<DVector<Complex64>> {
    let roots = params.of_type(1);
    let n = roots.len();
    if n == 0 {
        return Ok(vacuum(chain.dim()));
    }
    let ctx = chain.ctx();
    for &t in roots {
        for &z in chain.z() {
            if ctx.too_close(t, z) {
                return Err(Error::pole(format!("root {t} collides with inhomogeneity {z}")));
            }
        }
    }
    let (aux_layout, aux_vec) = if chain.rank() == 2 {
        (SiteLayout { n: 1, len: n }, DVector::from_element(1, Complex64::new(1.0, 0.0)))
    } else {
        let aux = ChainSpec::new(chain.rank() - 1, roots.to_vec(), chain.kappa()[1..].to_vec(), ctx.clone())
            .map_err(|e| Error::pole(format!("auxiliary chain: {e}")))?;
        (aux.layout(), nested_raw(&aux, &params.tail())?)
    };
    let monos: Vec<BlockLOperator> = roots.iter().map(|&t| monodromy(chain, t)).collect::<Result<_>>()?;
    let omega = vacuum(chain.dim());
    let mut out = DVector::zeros(chain.dim());
    for (idx, &coef) in aux_vec.iter().enumerate() {
        if coef == Complex64::new(0.0, 0.0) {
            continue;
        }
        let colors = aux_layout.digits(idx);
        let mut v = omega.clone();
        for k in (0..n).rev() {
            v = monos[k].entry(1, colors[k] + 2).apply(&v);
        }
        out += v * coef;
    }
    Ok(out)
}

/// `β · Π_{a=2..N} Π_ℓ λ_a(t_ℓ^{a-1})`.
pub fn modified_factor(chain: &ChainSpec, params: &BetheParameterSet) -> Result<Complex64> {
    check_layout(chain, params)?;
    let lambdas = vacuum_data(chain).lambdas;
    let mut factor = beta_factor(params, chain.ctx())?;
    for a in 2..=chain.rank() {
        for &t in params.of_type(a - 1) {
            factor *= lambdas[a - 1].at(t);
        }
    }
    Ok(factor)
}

pub fn modified_vector(chain: &ChainSpec, params: &BetheParameterSet) -> Result<BetheVector> {
    let plain = nested_vector(chain, params)?;
    let factor = modified_factor(chain, params)?;
    Ok(BetheVector { vector: plain.vector * factor, normalization: Normalization::Modified, ..plain })
}

/// `(‖T(t)w − τ(t)w‖ / ‖w‖, τ(t))` for the modified vector `w`.
pub fn on_shell_residual(chain: &ChainSpec, params: &BetheParameterSet, t: Complex64) -> Result<(f64, Complex64)> {
    let w = modified_vector(chain, params)?.vector;
    on_shell_residual_of(chain, params, &w, t)
}

/// Same as [`on_shell_residual`] for a vector already built.
pub fn on_shell_residual_of(
    chain: &ChainSpec,
    params: &BetheParameterSet,
    w: &DVector<Complex64>,
    t: Complex64,
) -> Result<(f64, Complex64)> {
    let norm = w.norm();
    if !(norm >= DEGENERATE_NORM) {
        return Err(Error::DegenerateVector { norm });
    }
    let tau = tau_eigenvalue(&vacuum_data(chain).lambdas, params, t, chain.ctx())?;
    let tw = transfer(chain, t)?.apply(w);
    Ok(((tw - w * tau).norm() / norm, tau))
}

/// Norm of the components outside the sector's occupancy block, relative to `‖v‖`.
pub fn weight_support_residual(chain: &ChainSpec, nbar: &[usize], v: &DVector<Complex64>) -> f64 {
    let norm = v.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let lay = chain.layout();
    let target = sector_occupancy(chain.len(), nbar);
    let outside: f64 =
        v.iter().enumerate().filter(|(idx, _)| Some(lay.occupancy(*idx)) != target).map(|(_, c)| c.norm_sqr()).sum();
    outside.sqrt() / norm
}

/// `σ_min / σ_max` of the two-column matrix `[a b]`; zero means collinear.
pub fn collinearity(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    let m = DMatrix::from_columns(&[a.clone(), b.clone()]);
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

/// Decomposition of `T(t)w − τ(t)w` for rank 2 into the vectors
/// `Φ_m = T_{1,2}(t) Π_{j≠m} T_{1,2}(t_j) Ω`.
#[derive(Debug, Clone)]
pub struct UnwantedTerms {
    /// Least-squares coefficients.
    pub coefficients: Vec<Complex64>,
    /// `(q-q^{-1}) t_m/(t-t_m) [λ_1(t_m) Π_{j≠m} (q^{-1}t_m - q t_j)/(t_m - t_j)
    ///  - λ_2(t_m) Π_{j≠m} (q t_m - q^{-1} t_j)/(t_m - t_j)]`.
    pub closed_form: Vec<Complex64>,
    /// `|(q-q^{-1}) t_m/(t-t_m) λ_2(t_m) Π_{j≠m} (q^{-1}t_m - q t_j)/(t_m - t_j)|`:
    /// the factor relating `c_m` to the `m`-th Bethe residual.
    pub scales: Vec<f64>,
    /// `‖Σ c_m Φ_m − r‖` relative to `max(‖T(t)w‖, |τ|‖w‖)`.
    pub fit_residual: f64,
    /// `σ_min / σ_max` of the `Φ` basis.
    pub basis_conditioning: f64,
}

pub fn offshell_unwanted_n2(chain: &ChainSpec, params: &BetheParameterSet, t: Complex64) -> Result<UnwantedTerms> {
    if chain.rank() != 2 {
        return Err(Error::domain(format!("unwanted-term decomposition needs rank 2, got {}", chain.rank())));
    }
    check_layout(chain, params)?;
    let roots = params.of_type(1).to_vec();
    let n = roots.len();
    if n == 0 || n > MAX_UNWANTED_ROOTS {
        return Err(Error::Capacity { what: "unwanted-term root count", value: n, cap: MAX_UNWANTED_ROOTS });
    }
    let ctx = chain.ctx();
    for &tm in &roots {
        if ctx.too_close(t, tm) {
            return Err(Error::pole(format!("spectral point {t} at root {tm}")));
        }
    }
    let w = nested_vector(chain, params)?.vector;
    let lambdas = vacuum_data(chain).lambdas;
    let tau = tau_eigenvalue(&lambdas, params, t, ctx)?;
    let tw = transfer(chain, t)?.apply(&w);
    let r = &tw - &w * tau;

    let mono_t = monodromy(chain, t)?;
    let monos: Vec<BlockLOperator> = roots.iter().map(|&s| monodromy(chain, s)).collect::<Result<_>>()?;
    let omega = vacuum(chain.dim());
    let columns: Vec<DVector<Complex64>> = (0..n)
        .map(|m| {
            let mut v = omega.clone();
            for j in (0..n).rev().filter(|&j| j != m) {
                v = monos[j].entry(1, 2).apply(&v);
            }
            mono_t.entry(1, 2).apply(&v)
        })
        .collect();
    let basis = DMatrix::from_columns(&columns);
    let svd = basis.clone().svd(true, true);
    let sv = &svd.singular_values;
    let conditioning = if sv.max() == 0.0 { 0.0 } else { sv.min() / sv.max() };
    if conditioning < ILL_POSED_RATIO {
        return Err(Error::IllPosed(format!(
            "{n} unwanted-term vectors span a space of lower dimension (σ_min/σ_max = {conditioning:e})"
        )));
    }
    let coef = svd.solve(&r, 0.0).map_err(|e| Error::IllPosed(format!("least squares failed: {e}")))?;
    let scale = tw.norm().max(tau.norm() * w.norm()).max(f64::MIN_POSITIVE);
    let fit_residual = (&basis * &coef - &r).norm() / scale;

    let (q, qi) = (ctx.q, ctx.qinv());
    let mut closed_form = Vec::with_capacity(n);
    let mut scales = Vec::with_capacity(n);
    for m in 0..n {
        let tm = roots[m];
        let mut p1 = Complex64::new(1.0, 0.0);
        let mut p2 = Complex64::new(1.0, 0.0);
        for (j, &tj) in roots.iter().enumerate() {
            if j != m {
                p1 *= (qi * tm - q * tj) / (tm - tj);
                p2 *= (q * tm - qi * tj) / (tm - tj);
            }
        }
        let pre = ctx.qdiff() * tm / (t - tm);
        let (l1, l2) = (lambdas[0].at(tm), lambdas[1].at(tm));
        closed_form.push(pre * (l1 * p1 - l2 * p2));
        scales.push((pre * l2 * p1).norm());
    }
    Ok(UnwantedTerms {
        coefficients: coef.iter().copied().collect(),
        closed_form,
        scales,
        fit_residual,
        basis_conditioning: conditioning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{sample_distinct, stream, DeformationContext};
    use crate::kernels::bethe_residual;
    use crate::rep::r_matrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn chain(n: usize, l: usize, seed: u64) -> ChainSpec {
        let ctx = DeformationContext::random(seed).unwrap();
        let mut rng = stream(seed, "vector-chain");
        let z = sample_distinct(&mut rng, l, &[], 1e-2).unwrap();
        let kappa = sample_distinct(&mut rng, n, &[], 1e-2).unwrap();
        ChainSpec::new(n, z, kappa, ctx).unwrap()
    }

    fn roots(seed: u64, n: usize) -> Vec<Complex64> {
        sample_distinct(&mut stream(seed, "roots"), n, &[], 1e-2).unwrap()
    }

    #[test]
    fn occupancy_of_sectors() {
        assert_eq!(sector_occupancy(3, &[2, 1]), Some(vec![1, 1, 1]));
        assert_eq!(sector_occupancy(2, &[1, 2]), None);
        assert_eq!(sector_occupancy(2, &[3]), None);
    }

    #[test]
    fn empty_sector_is_vacuum() {
        let ch = chain(3, 2, 1);
        let v = modified_vector(&ch, &BetheParameterSet::empty(3)).unwrap();
        assert_eq!(v.vector, vacuum(9));
        let t = c(0.4, 0.8);
        let (res, tau) = on_shell_residual(&ch, &BetheParameterSet::empty(3), t).unwrap();
        let sum: Complex64 = vacuum_data(&ch).lambdas.iter().map(|l| l.at(t)).sum();
        assert!(res < 1e-14);
        assert!((tau - sum).norm() < 1e-14);
    }

    #[test]
    fn rank_two_is_plain_product() {
        let ch = chain(2, 3, 2);
        let ts = roots(2, 2);
        let p = BetheParameterSet::single(ts.clone()).unwrap();
        let v = nested_vector(&ch, &p).unwrap().vector;
        let mut w = vacuum(8);
        for &t in ts.iter().rev() {
            w = monodromy(&ch, t).unwrap().entry(1, 2).apply(&w);
        }
        assert!((v - w).norm() < 1e-14);
    }

    #[test]
    fn rank_three_single_excitations_against_direct_assembly() {
        // with one root of each type the auxiliary vector is κ_2 (q-q^{-1}) t²/(q t² - q^{-1} t¹) e_2
        let ch = chain(3, 2, 3);
        let (q, qi) = (ch.ctx().q, ch.ctx().qinv());
        let ts = roots(3, 2);
        let (t1, t2) = (ts[0], ts[1]);
        let p = BetheParameterSet::new(vec![vec![t1], vec![t2]]).unwrap();
        let v = nested_vector(&ch, &p).unwrap().vector;
        let coef = ch.kappa()[1] * (q - qi) * t2 / (q * t2 - qi * t1);
        // T_13(t1) Ω assembled from explicit R factors: K R_2 R_1 acting on e_1 ⊗ e_1
        let n = 3;
        let r1 = r_matrix(t1, ch.z()[0], n, ch.ctx()).unwrap();
        let r2 = r_matrix(t1, ch.z()[1], n, ch.ctx()).unwrap();
        let mut expected = DVector::zeros(9);
        // aux index 0 (row), aux index 2 (column): Σ_k R_2[(0,s2),(k,0)] R_1[(k,s1),(2,0)]
        for s1 in 0..n {
            for s2 in 0..n {
                let mut acc = c(0.0, 0.0);
                for k in 0..n {
                    acc += r2.matrix()[(s2, k * n)] * r1.matrix()[(k * n + s1, 2 * n)];
                }
                expected[s1 * n + s2] = ch.kappa()[0] * acc * coef;
            }
        }
        assert!((&v - &expected).norm() < 1e-13 * expected.norm());
        assert!(weight_support_residual(&ch, &[1, 1], &v) < 1e-14);
    }

    #[test]
    fn inadmissible_sector_gives_zero() {
        let ch = chain(3, 2, 4);
        let ts = roots(4, 3);
        let p = BetheParameterSet::new(vec![vec![ts[0]], vec![ts[1], ts[2]]]).unwrap();
        assert_eq!(nested_vector(&ch, &p).unwrap().vector.norm(), 0.0);
        assert!(matches!(on_shell_residual(&ch, &p, c(1.0, 1.0)), Err(Error::DegenerateVector { .. })));
    }

    #[test]
    fn one_magnon_eigenvector() {
        let ch = chain(2, 1, 5);
        let (q, qi) = (ch.ctx().q, ch.ctx().qinv());
        let (k1, k2, z) = (ch.kappa()[0], ch.kappa()[1], ch.z()[0]);
        let root = z * (k1 * qi - k2) / (k1 * q - k2);
        let p = BetheParameterSet::single(vec![root]).unwrap();
        let (res, _) = on_shell_residual(&ch, &p, c(0.3, -0.9)).unwrap();
        assert!(res < 1e-10, "{res}");
        let w = modified_vector(&ch, &p).unwrap().vector;
        let lam2 = vacuum_data(&ch).lambdas[1].at(root);
        let plain = monodromy(&ch, root).unwrap().entry(1, 2).apply(&vacuum(2));
        assert!((w - plain * lam2).norm() < 1e-14);
    }

    #[test]
    fn unwanted_coefficients_match_closed_form() {
        for (l, n) in [(1, 1), (2, 1), (3, 2), (4, 3)] {
            let ch = chain(2, l, 10 + l as u64);
            let p = BetheParameterSet::single(roots(20 + n as u64, n)).unwrap();
            let u = offshell_unwanted_n2(&ch, &p, c(0.9, 0.7)).unwrap();
            assert!(u.fit_residual < 1e-10, "L={l} n={n} fit {}", u.fit_residual);
            for m in 0..n {
                let diff = (u.coefficients[m] - u.closed_form[m]).norm();
                assert!(diff < 1e-9 * u.scales[m].max(1.0), "L={l} n={n} m={m}: {diff}");
                let res = bethe_residual(1, m + 1, &p, &vacuum_data(&ch).lambdas, ch.ctx()).unwrap();
                assert!((u.closed_form[m].norm() / u.scales[m] - res.norm()).abs() < 1e-10 * res.norm().max(1.0));
            }
        }
    }

    #[test]
    fn unwanted_basis_rank_deficiency() {
        let ch = chain(2, 2, 30);
        let p = BetheParameterSet::single(roots(31, 2)).unwrap();
        assert!(matches!(offshell_unwanted_n2(&ch, &p, c(0.9, 0.7)), Err(Error::IllPosed(_))));
    }

    #[test]
    fn swap_gives_collinear_vectors() {
        let ch = chain(2, 3, 40);
        let p = BetheParameterSet::single(roots(41, 2)).unwrap();
        let a = modified_vector(&ch, &p).unwrap().vector;
        let b = modified_vector(&ch, &p.swapped(1, 1, 2)).unwrap().vector;
        assert!(collinearity(&a, &b) < 1e-9);
    }
}
