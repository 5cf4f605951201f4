//! Scalar rational kernels of the nested Bethe ansatz.
//!
//! Every kernel here depends on the spectral variables through ratios only,
//! so all of them are invariant under a common rescaling of their arguments.
//! Denominators are checked against the context pole margin and reported as
//! [`Error::Pole`].

use num_complex::Complex64;

use crate::context::DeformationContext;
use crate::error::{Error, Result};
use crate::params::BetheParameterSet;
use crate::rational::RationalFunction;

/// Tags for the scalar kernels, each bound to the equation it evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelId {
    Tau,
    BetheRhs,
    Beta,
    Vtilde,
    Xtilde,
    ZPartition,
    Zm,
    Ym,
}

impl KernelId {
    pub const ALL: [KernelId; 8] = [
        KernelId::Tau,
        KernelId::BetheRhs,
        KernelId::Beta,
        KernelId::Vtilde,
        KernelId::Xtilde,
        KernelId::ZPartition,
        KernelId::Zm,
        KernelId::Ym,
    ];

    /// Equation tag the kernel implements.
    pub fn anchor(self) -> &'static str {
        match self {
            KernelId::Tau => "(2.33)",
            KernelId::BetheRhs => "(2.32)",
            KernelId::Beta => "(2.34)",
            KernelId::Vtilde => "(3.25)",
            KernelId::Xtilde => "(3.24)",
            KernelId::ZPartition => "(3.22)",
            KernelId::Zm => "(3.33)",
            KernelId::Ym => "(4.25)",
        }
    }
}

fn separated(ctx: &DeformationContext, a: Complex64, b: Complex64, what: &str) -> Result<()> {
    if ctx.too_close(a, b) {
        Err(Error::pole(format!("{what}: {a} ~ {b}")))
    } else {
        Ok(())
    }
}

/// `(q - q^{-1} x) / (1 - x)` with `x = num / den`.
fn crossing(ctx: &DeformationContext, num: Complex64, den: Complex64, what: &str) -> Result<Complex64> {
    separated(ctx, num, den, what)?;
    let x = num / den;
    Ok((ctx.q - ctx.qinv() * x) / (1.0 - x))
}

/// `1 / (1 - num/den)`
fn simple_pole(ctx: &DeformationContext, num: Complex64, den: Complex64, what: &str) -> Result<Complex64> {
    separated(ctx, num, den, what)?;
    Ok((1.0 - num / den).inv())
}

/// `(num/den) / (1 - num/den)`
fn shifted_pole(ctx: &DeformationContext, num: Complex64, den: Complex64, what: &str) -> Result<Complex64> {
    separated(ctx, num, den, what)?;
    let x = num / den;
    Ok(x / (1.0 - x))
}

fn eval_lambdas(lambdas: &[RationalFunction], t: Complex64) -> Vec<Complex64> {
    lambdas.iter().map(|l| l.at(t)).collect()
}

/// Transfer-matrix eigenvalue from the vacuum eigenvalues `λ_i(t)` and Bethe roots.
pub fn tau_eigenvalue(
    lambdas: &[RationalFunction],
    tbar: &BetheParameterSet,
    t: Complex64,
    ctx: &DeformationContext,
) -> Result<Complex64> {
    tau_from_values(&eval_lambdas(lambdas, t), tbar, t, ctx)
}

/// Same as [`tau_eigenvalue`] with the `λ_i(t)` already evaluated.
pub fn tau_from_values(
    lambda_at_t: &[Complex64],
    tbar: &BetheParameterSet,
    t: Complex64,
    ctx: &DeformationContext,
) -> Result<Complex64> {
    let n = lambda_at_t.len();
    if tbar.num_types() + 1 != n {
        return Err(Error::Dimension(format!("{n} eigenvalue functions for {} root types", tbar.num_types())));
    }
    let (q, qi) = (ctx.q, ctx.qinv());
    for a in 1..n {
        for &tj in tbar.of_type(a) {
            separated(ctx, t, tj, "spectral parameter at a Bethe root")?;
        }
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 1..=n {
        let mut term = lambda_at_t[i - 1];
        for &tj in tbar.of_type(i - 1) {
            term *= (q * t - qi * tj) / (t - tj);
        }
        for &tj in tbar.of_type(i) {
            term *= (qi * t - q * tj) / (t - tj);
        }
        sum += term;
    }
    Ok(sum)
}

/// Right-hand side of Bethe equation `(i, j)` in representation form.
pub fn bethe_rhs(i: usize, j: usize, tbar: &BetheParameterSet, ctx: &DeformationContext) -> Result<Complex64> {
    let ntypes = tbar.num_types();
    if i == 0 || i > ntypes || j == 0 || j > tbar.count(i) {
        return Err(Error::domain(format!("Bethe equation ({i}, {j}) out of range for counts {:?}", tbar.nbar())));
    }
    let (q, qi) = (ctx.q, ctx.qinv());
    let tij = tbar.of_type(i)[j - 1];
    let mut rhs = Complex64::new(1.0, 0.0);
    for (m, &tm) in tbar.of_type(i).iter().enumerate() {
        if m + 1 == j {
            continue;
        }
        separated(ctx, tij, tm, "same-type roots")?;
        let den = ctx.guard(qi * tij - q * tm, tij.norm().max(tm.norm()), "same-type denominator")?;
        rhs *= (q * tij - qi * tm) / den;
    }
    for &tm in tbar.of_type(i - 1) {
        let den = ctx.guard(q * tij - qi * tm, tij.norm().max(tm.norm()), "lower-type denominator")?;
        rhs *= (tij - tm) / den;
    }
    for &tm in tbar.of_type(i + 1) {
        separated(ctx, tij, tm, "adjacent-type roots")?;
        rhs *= (qi * tij - q * tm) / (tij - tm);
    }
    Ok(rhs)
}

/// `λ_i(t_j^i)/λ_{i+1}(t_j^i) - RHS`; zero exactly when equation `(i, j)` holds.
pub fn bethe_residual(
    i: usize,
    j: usize,
    tbar: &BetheParameterSet,
    lambdas: &[RationalFunction],
    ctx: &DeformationContext,
) -> Result<Complex64> {
    if lambdas.len() != tbar.num_types() + 1 {
        return Err(Error::Dimension(format!(
            "{} eigenvalue functions for {} root types",
            lambdas.len(),
            tbar.num_types()
        )));
    }
    let rhs = bethe_rhs(i, j, tbar, ctx)?;
    let t = tbar.of_type(i)[j - 1];
    let num = lambdas[i - 1].at(t);
    let den = lambdas[i].at(t);
    if !(den.norm() > 0.0) || !(num / den).is_finite() {
        return Err(Error::pole(format!("λ_{}({t}) vanishes", i + 1)));
    }
    Ok(num / den - rhs)
}

/// All Bethe residuals in type-major order.
pub fn bethe_residuals(
    tbar: &BetheParameterSet,
    lambdas: &[RationalFunction],
    ctx: &DeformationContext,
) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(tbar.total());
    for i in 1..=tbar.num_types() {
        for j in 1..=tbar.count(i) {
            out.push(bethe_residual(i, j, tbar, lambdas, ctx)?);
        }
    }
    Ok(out)
}

/// Normalization factor of the modified weight function.
pub fn beta_factor(tbar: &BetheParameterSet, ctx: &DeformationContext) -> Result<Complex64> {
    let mut beta = Complex64::new(1.0, 0.0);
    for vals in tbar.types() {
        for l in 0..vals.len() {
            for lp in l + 1..vals.len() {
                beta *= crossing(ctx, vals[l], vals[lp], "same-type roots in β")?;
            }
        }
    }
    Ok(beta)
}

/// First product form of `Ṽ(t²_k..t²_1; t¹_k..t¹_1)`.
///
/// `upper[m-1] = t²_m` and `lower[m-1] = t¹_m`, both in ascending index order.
pub fn v_tilde(upper: &[Complex64], lower: &[Complex64], ctx: &DeformationContext) -> Result<Complex64> {
    if upper.len() != lower.len() {
        return Err(Error::Dimension(format!("Ṽ needs equal lengths, got {} and {}", upper.len(), lower.len())));
    }
    let k = upper.len();
    let mut acc = Complex64::new(1.0, 0.0);
    for m in 0..k {
        acc *= simple_pole(ctx, lower[m], upper[m], "Ṽ diagonal pair")?;
        for &later in &lower[m + 1..] {
            acc *= crossing(ctx, later, upper[m], "Ṽ off-diagonal pair")?;
        }
    }
    Ok(acc)
}

/// Second printed product form of `Ṽ`; must agree with [`v_tilde`].
pub fn v_tilde_second_form(upper: &[Complex64], lower: &[Complex64], ctx: &DeformationContext) -> Result<Complex64> {
    if upper.len() != lower.len() {
        return Err(Error::Dimension(format!("Ṽ needs equal lengths, got {} and {}", upper.len(), lower.len())));
    }
    let k = upper.len();
    let mut acc = Complex64::new(1.0, 0.0);
    for m in 0..k {
        let mut inner = simple_pole(ctx, lower[m], upper[m], "Ṽ diagonal pair")?;
        for &earlier in &upper[..m] {
            inner *= crossing(ctx, lower[m], earlier, "Ṽ off-diagonal pair")?;
        }
        acc *= inner;
    }
    Ok(acc)
}

/// `X̃(t̄_[m̄])` with `m̄ = tbar.nbar()`, which must be non-increasing.
pub fn x_tilde(tbar: &BetheParameterSet, ctx: &DeformationContext) -> Result<Complex64> {
    let m = tbar.nbar();
    if m.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::domain(format!("counts {m:?} violate m_1 >= m_2 >= ...")));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for a in 1..m.len() {
        // a is the 0-based index of type a+1
        let k = m[a];
        let upper = &tbar.of_type(a + 1)[..k];
        let lower = &tbar.of_type(a)[m[a - 1] - k..m[a - 1]];
        acc *= v_tilde(upper, lower, ctx)?;
    }
    Ok(acc)
}

/// `Z_s̄(t̄_[l̄, r̄])`: the crossing factor between the split halves of
/// adjacent types. Index vectors hold one entry per type.
pub fn partition_factor_z(
    tbar: &BetheParameterSet,
    l: &[usize],
    s: &[usize],
    r: &[usize],
    ctx: &DeformationContext,
) -> Result<Complex64> {
    let ntypes = tbar.num_types();
    if l.len() != ntypes || s.len() != ntypes || r.len() != ntypes {
        return Err(Error::Dimension("split vectors must have one entry per type".into()));
    }
    for a in 0..ntypes {
        if !(l[a] <= s[a] && s[a] <= r[a] && r[a] <= tbar.count(a + 1)) {
            return Err(Error::domain(format!("need l <= s <= r <= n for type {}", a + 1)));
        }
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for a in 1..ntypes {
        let lower = tbar.of_type(a);
        let upper = tbar.of_type(a + 1);
        for &tl in &lower[s[a - 1]..r[a - 1]] {
            for &tu in &upper[l[a]..s[a]] {
                acc *= crossing(ctx, tl, tu, "Z cross-type pair")?;
            }
        }
    }
    Ok(acc)
}

/// `ℤ_m(t̄_[n̄])`, `1 <= m <= N-1`.
pub fn z_m_factor(m: usize, tbar: &BetheParameterSet, ctx: &DeformationContext) -> Result<Complex64> {
    let ntypes = tbar.num_types();
    if m == 0 || m > ntypes {
        return Err(Error::domain(format!("ℤ_m needs 1 <= m <= {ntypes}, got {m}")));
    }
    for a in 1..=m {
        if tbar.count(a) == 0 {
            return Err(Error::domain(format!("ℤ_{m} needs n_{a} >= 1")));
        }
    }
    let last = |a: usize| tbar.of_type(a)[tbar.count(a) - 1];
    let mut acc = Complex64::new(1.0, 0.0);
    for a in 1..m {
        acc *= simple_pole(ctx, last(a), last(a + 1), "ℤ_m chain pair")?;
        let upper = tbar.of_type(a + 1);
        for &tj in &upper[..upper.len() - 1] {
            acc *= crossing(ctx, last(a), tj, "ℤ_m crossing pair")?;
        }
    }
    for &tj in tbar.of_type(m + 1) {
        acc *= crossing(ctx, last(m), tj, "ℤ_m tail pair")?;
    }
    Ok(acc)
}

/// `𝕐_m(t̄_[n̄])` for the `j`-th unwanted term, `0 <= m <= j-2`.
pub fn y_m_factor(m: usize, j: usize, tbar: &BetheParameterSet, ctx: &DeformationContext) -> Result<Complex64> {
    if j < m + 2 {
        return Err(Error::domain(format!("𝕐_m needs m <= j-2, got m = {m}, j = {j}")));
    }
    let first = |a: usize| -> Result<Complex64> {
        tbar.get(a, 1).ok_or_else(|| Error::domain(format!("𝕐_{m} needs t_1^{a}")))
    };
    let mut acc = Complex64::new(1.0, 0.0);
    for a in m + 1..=j.saturating_sub(2) {
        let head = first(a + 1)?;
        acc *= shifted_pole(ctx, first(a)?, head, "𝕐_m chain pair")?;
        for &tk in tbar.of_type(a).iter().skip(1) {
            acc *= crossing(ctx, tk, head, "𝕐_m crossing pair")?;
        }
    }
    let nm = tbar.count(m);
    if nm > 1 {
        let head = first(m + 1)?;
        for &tk in &tbar.of_type(m)[..nm - 1] {
            acc *= crossing(ctx, tk, head, "𝕐_m tail pair")?;
        }
    }
    Ok(acc)
}

/// Residual of the three-group partial-fraction identity used to close the
/// induction. `chain[a-1]` is the point of type `a`, `a = 1..j-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialFractionResidual {
    pub absolute: f64,
    /// Largest magnitude among the three groups.
    pub scale: f64,
}

impl PartialFractionResidual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.absolute / self.scale
        }
    }
}

pub fn partial_fraction_check(
    j: usize,
    t: Complex64,
    chain: &[Complex64],
    ctx: &DeformationContext,
) -> Result<PartialFractionResidual> {
    if j < 3 {
        return Err(Error::domain(format!("partial-fraction identity needs j >= 3, got {j}")));
    }
    if chain.len() != j - 1 {
        return Err(Error::Dimension(format!("need {} chain points, got {}", j - 1, chain.len())));
    }
    for (a, &s) in chain.iter().enumerate() {
        separated(ctx, t, s, "spectral point on chain")?;
        for &s2 in &chain[a + 1..] {
            separated(ctx, s, s2, "coincident chain points")?;
        }
    }
    // gaps[a-1] = 1 / (s_{a+1} - s_a)
    let gaps: Vec<Complex64> = chain.windows(2).map(|w| (w[1] - w[0]).inv()).collect();
    let prod = |lo: usize, hi: usize| -> Complex64 {
        // product over a = lo..=hi of gaps, 1-based; empty when lo > hi
        (lo..=hi).fold(Complex64::new(1.0, 0.0), |acc, a| acc * gaps[a - 1])
    };
    let s_first = chain[0];
    let s_last = chain[j - 2];
    let all = prod(1, j - 2);
    let a_term = all / (t - s_last);
    let b_term = all / (t - s_first);
    let mut sum = Complex64::new(0.0, 0.0);
    for m in 1..=j - 2 {
        sum += prod(m + 1, j - 2) * prod(1, m - 1);
    }
    let c_term = sum / ((t - s_last) * (t - s_first));
    let residual = a_term - b_term - c_term;
    Ok(PartialFractionResidual {
        absolute: residual.norm(),
        scale: a_term.norm().max(b_term.norm()).max(c_term.norm()),
    })
}

/// Contour estimate of the residue of `τ` at a Bethe root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueEstimate {
    pub residue: Complex64,
    pub radius: f64,
    /// `radius · max |τ|` on the contour.
    pub local_scale: f64,
}

impl ResidueEstimate {
    pub fn relative(&self) -> f64 {
        if self.local_scale == 0.0 {
            0.0
        } else {
            self.residue.norm() / self.local_scale
        }
    }
}

/// Points on the contour.
pub const RESIDUE_POINTS: usize = 64;

/// Residue of `τ(t)` at `t = t_j^i` by averaging `τ(t)(t - t_j^i)` over a circle
/// of a quarter of the distance to the nearest other singularity.
pub fn tau_residue(
    lambdas: &[RationalFunction],
    tbar: &BetheParameterSet,
    i: usize,
    j: usize,
    ctx: &DeformationContext,
) -> Result<ResidueEstimate> {
    let center = tbar.get(i, j).ok_or_else(|| Error::domain(format!("no root t_{j}^{i}")))?;
    let mut singular: Vec<Complex64> = Vec::new();
    for (a, vals) in tbar.types().iter().enumerate() {
        for (k, &v) in vals.iter().enumerate() {
            if !(a + 1 == i && k + 1 == j) {
                singular.push(v);
            }
        }
    }
    for l in lambdas {
        for p in l.poles() {
            if let crate::rational::PoleCondition::Const { value, .. } = *p {
                singular.push(value);
            }
        }
    }
    singular.push(Complex64::new(0.0, 0.0));
    let nearest = singular.iter().map(|s| (s - center).norm()).fold(f64::INFINITY, f64::min);
    if !(nearest > 0.0) {
        return Err(Error::pole(format!("t_{j}^{i} sits on another singularity")));
    }
    let radius = 0.25 * nearest.min(center.norm());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut peak = 0.0_f64;
    for k in 0..RESIDUE_POINTS {
        let phase = Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / RESIDUE_POINTS as f64);
        let tau = tau_eigenvalue(lambdas, tbar, center + phase, ctx)?;
        peak = peak.max(tau.norm());
        acc += tau * phase;
    }
    Ok(ResidueEstimate { residue: acc / RESIDUE_POINTS as f64, radius, local_scale: radius * peak })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::RationalFunction;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ctx(q: f64) -> DeformationContext {
        DeformationContext::real(q).unwrap()
    }

    #[test]
    fn tau_without_roots_is_sum_of_lambdas() {
        let lambdas = vec![
            RationalFunction::univariate(|t| t * 2.0),
            RationalFunction::univariate(|t| t + 1.0),
            RationalFunction::constant(c(0.5, 0.5)),
        ];
        let t = c(0.7, 0.2);
        let tau = tau_eigenvalue(&lambdas, &BetheParameterSet::empty(3), t, &ctx(1.4)).unwrap();
        assert!((tau - (t * 2.0 + t + 1.0 + c(0.5, 0.5))).norm() < 1e-15);
    }

    #[test]
    fn tau_rank_two_matches_ratio_form() {
        // bracket form: Π (q^{-1} - q t_i/t)/(1 - t_i/t) λ_1 + Π (q - q^{-1} t_i/t)/(1 - t_i/t) λ_2
        let cx = ctx(1.3);
        let (q, qi) = (cx.q, cx.qinv());
        let roots = vec![c(0.6, 0.4), c(-1.1, 0.3)];
        let tbar = BetheParameterSet::single(roots.clone()).unwrap();
        let lambdas = vec![RationalFunction::constant(c(1.2, 0.0)), RationalFunction::univariate(|t| t * t)];
        let t = c(0.9, -0.5);
        let mut p1 = c(1.0, 0.0);
        let mut p2 = c(1.0, 0.0);
        for &ti in &roots {
            let x = ti / t;
            p1 *= (qi - q * x) / (1.0 - x);
            p2 *= (q - qi * x) / (1.0 - x);
        }
        let expected = p1 * 1.2 + p2 * t * t;
        let tau = tau_eigenvalue(&lambdas, &tbar, t, &cx).unwrap();
        assert!((tau - expected).norm() < 1e-13 * expected.norm());
    }

    #[test]
    fn tau_pole_error() {
        let tbar = BetheParameterSet::single(vec![c(1.0, 0.0)]).unwrap();
        let lambdas = vec![RationalFunction::constant(c(1.0, 0.0)), RationalFunction::constant(c(1.0, 0.0))];
        assert!(matches!(tau_eigenvalue(&lambdas, &tbar, c(1.0, 0.0), &ctx(1.5)), Err(Error::Pole(_))));
    }

    #[test]
    fn residual_trivial_when_products_empty() {
        let cx = ctx(1.5);
        let lambdas = vec![RationalFunction::constant(c(2.0, 0.0)), RationalFunction::constant(c(2.0, 0.0))];
        let tbar = BetheParameterSet::single(vec![c(0.3, 0.9)]).unwrap();
        assert!(bethe_residual(1, 1, &tbar, &lambdas, &cx).unwrap().norm() < 1e-15);
    }

    #[test]
    fn one_magnon_closed_form_root() {
        let cx = ctx(1.45);
        let (q, qi) = (cx.q, cx.qinv());
        let (k1, k2, z) = (c(1.1, 0.3), c(0.6, -0.4), c(0.8, 0.5));
        let lambdas = vec![
            RationalFunction::constant(k1),
            RationalFunction::univariate(move |t| k2 * (t - z) / (q * t - qi * z)),
        ];
        let root = z * (k1 * qi - k2) / (k1 * q - k2);
        let tbar = BetheParameterSet::single(vec![root]).unwrap();
        assert!(bethe_residual(1, 1, &tbar, &lambdas, &cx).unwrap().norm() < 1e-14);
        let off = BetheParameterSet::single(vec![root * 1.1]).unwrap();
        assert!(bethe_residual(1, 1, &off, &lambdas, &cx).unwrap().norm() > 1e-3);
    }

    #[test]
    fn residual_out_of_range() {
        let tbar = BetheParameterSet::single(vec![c(1.0, 0.0)]).unwrap();
        assert!(bethe_rhs(2, 1, &tbar, &ctx(1.5)).is_err());
        assert!(bethe_rhs(1, 2, &tbar, &ctx(1.5)).is_err());
    }

    #[test]
    fn beta_values() {
        let cx = ctx(1.5);
        let single = BetheParameterSet::new(vec![vec![c(0.4, 0.1)], vec![c(1.0, 1.0)]]).unwrap();
        assert_eq!(beta_factor(&single, &cx).unwrap(), c(1.0, 0.0));
        // (1.5 - (2/3)*0.5)/(1 - 0.5) = 7/3
        let two = BetheParameterSet::single(vec![c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert!((beta_factor(&two, &cx).unwrap() - c(7.0 / 3.0, 0.0)).norm() < 1e-14);
        let clash = BetheParameterSet::single(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(beta_factor(&clash, &cx).is_err());
    }

    #[test]
    fn v_tilde_small_cases() {
        let cx = ctx(1.5);
        assert_eq!(v_tilde(&[], &[], &cx).unwrap(), c(1.0, 0.0));
        let (u, l) = (c(1.3, 0.2), c(0.4, -0.7));
        assert!((v_tilde(&[u], &[l], &cx).unwrap() - (1.0 - l / u).inv()).norm() < 1e-15);
        assert!(v_tilde(&[u], &[u], &cx).is_err());
        assert!(v_tilde(&[u], &[], &cx).is_err());
    }

    #[test]
    fn x_tilde_cases() {
        let cx = ctx(1.5);
        assert_eq!(x_tilde(&BetheParameterSet::empty(4), &cx).unwrap(), c(1.0, 0.0));
        let (t1, t2) = (c(0.5, 0.5), c(1.2, -0.3));
        let p = BetheParameterSet::new(vec![vec![t1], vec![t2]]).unwrap();
        assert!((x_tilde(&p, &cx).unwrap() - (1.0 - t1 / t2).inv()).norm() < 1e-15);
        // m = (2,1): the single type-2 variable pairs with t_2^1
        let t1b = c(-0.8, 0.1);
        let p = BetheParameterSet::new(vec![vec![t1, t1b], vec![t2]]).unwrap();
        assert!((x_tilde(&p, &cx).unwrap() - (1.0 - t1b / t2).inv()).norm() < 1e-15);
        let bad = BetheParameterSet::new(vec![vec![t1], vec![t2, t1b]]).unwrap();
        assert!(matches!(x_tilde(&bad, &cx), Err(Error::Domain(_))));
    }

    #[test]
    fn z_partition_cases() {
        let cx = ctx(2.0);
        let p = BetheParameterSet::new(vec![vec![c(1.0, 0.0)], vec![c(4.0, 0.0)]]).unwrap();
        // s = r: empty first range
        assert_eq!(partition_factor_z(&p, &[0, 0], &[1, 1], &[1, 1], &cx).unwrap(), c(1.0, 0.0));
        // s = l: empty second range
        assert_eq!(partition_factor_z(&p, &[0, 0], &[0, 0], &[1, 1], &cx).unwrap(), c(1.0, 0.0));
        // one crossing pair: (2 - 0.5*0.25)/(1 - 0.25) = 2.5
        let z = partition_factor_z(&p, &[0, 0], &[0, 1], &[1, 1], &cx).unwrap();
        assert!((z - c(2.5, 0.0)).norm() < 1e-14);
        assert!(partition_factor_z(&p, &[1, 0], &[0, 1], &[1, 1], &cx).is_err());
    }

    #[test]
    fn z_m_and_y_m_edge_cases() {
        let cx = ctx(1.5);
        let p = BetheParameterSet::new(vec![vec![c(0.9, 0.1)], vec![]]).unwrap();
        assert_eq!(z_m_factor(1, &p, &cx).unwrap(), c(1.0, 0.0));
        assert!(z_m_factor(0, &p, &cx).is_err());
        // m = j-2: only the tail product survives
        let (a1, a2, b1) = (c(0.7, 0.2), c(-0.5, 0.9), c(1.4, -0.6));
        let p = BetheParameterSet::new(vec![vec![a1, a2], vec![b1]]).unwrap();
        let y = y_m_factor(1, 3, &p, &cx).unwrap();
        let g = (cx.q - cx.qinv() * a1 / b1) / (1.0 - a1 / b1);
        assert!((y - g).norm() < 1e-14);
        assert!(y_m_factor(2, 3, &p, &cx).is_err());
    }

    #[test]
    fn partial_fraction_three_points() {
        let cx = ctx(1.5);
        let (t, s1, s2) = (c(0.3, 1.1), c(-0.7, 0.2), c(1.2, 0.4));
        let r = partial_fraction_check(3, t, &[s1, s2], &cx).unwrap();
        assert!(r.absolute < 1e-14, "{r:?}");
        assert!(partial_fraction_check(2, t, &[s1], &cx).is_err());
        assert!(partial_fraction_check(3, t, &[s1, s1], &cx).is_err());
    }

    #[test]
    fn z1_times_y1_rank_three_expansion() {
        let cx = ctx(1.35);
        let (q, qi) = (cx.q, cx.qinv());
        let g = |a: Complex64, b: Complex64| (q - qi * a / b) / (1.0 - a / b);
        let (a1, a2, b1, b2) = (c(0.6, 0.8), c(-1.2, 0.3), c(1.5, -0.4), c(0.2, -1.1));
        let p = BetheParameterSet::new(vec![vec![a1, a2], vec![b1, b2]]).unwrap();
        let expected = g(a2, b1) * g(a2, b2) * g(a1, b1);
        let got = z_m_factor(1, &p, &cx).unwrap() * y_m_factor(1, 3, &p, &cx).unwrap();
        assert!((got - expected).norm() < 1e-14 * expected.norm());
    }

    #[test]
    fn residue_vanishes_only_at_root() {
        let cx = ctx(1.45);
        let (q, qi) = (cx.q, cx.qinv());
        let (k1, k2, z) = (c(1.1, 0.3), c(0.6, -0.4), c(0.8, 0.5));
        let lambdas = vec![
            RationalFunction::constant(k1),
            RationalFunction::univariate(move |t| k2 * (t - z) / (q * t - qi * z))
                .with_pole(crate::rational::PoleCondition::Const { slot: 0, value: z * qi * qi }),
        ];
        let root = z * (k1 * qi - k2) / (k1 * q - k2);
        let on = tau_residue(&lambdas, &BetheParameterSet::single(vec![root]).unwrap(), 1, 1, &cx).unwrap();
        assert!(on.relative() < 1e-12, "{on:?}");
        let off = tau_residue(&lambdas, &BetheParameterSet::single(vec![root + 0.01]).unwrap(), 1, 1, &cx).unwrap();
        assert!(off.relative() > 1e-4, "{off:?}");
    }

    #[test]
    fn anchors_distinct() {
        let mut tags: Vec<_> = KernelId::ALL.iter().map(|k| k.anchor()).collect();
        tags.sort();
        tags.dedup();
        assert_eq!(tags.len(), KernelId::ALL.len());
    }
}
