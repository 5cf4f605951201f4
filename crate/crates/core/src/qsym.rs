//! The deformed permutation action on typed functions and q-symmetrization.
//!
//! A permutation `σ` of one type acts by
//! `π(σ) G(t) = c_σ(t) G(σt)` with `(σt)_ℓ = t_{σ(ℓ)}` and a cocycle `c_σ`
//! built from the elementary exchange factor
//! `f(x) = (q^{-1} - q x)/(q - q^{-1} x)`, which satisfies `f(x) f(1/x) = 1`.
//! Two placements of the ratio inside `f` are in circulation; see [`Reading`].

use std::ops::Range;
use std::sync::Arc;

use itertools::Itertools;
use num_complex::Complex64;

use crate::context::DeformationContext;
use crate::error::{Error, Result};
use crate::params::BetheParameterSet;
use crate::rational::{check_identity, IdentityReport};

/// Largest per-type count the explicit group sum accepts.
pub const MAX_SYM_COUNT: usize = 7;

/// Placement of the ratio in the cocycle factor for an inverted pair
/// `ℓ < ℓ'`, `σ(ℓ) > σ(ℓ')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reading {
    /// `f(t_{σ(ℓ')}/t_{σ(ℓ)})`. Keeps `F(t_n)⋯F(t_1)` invariant.
    #[default]
    Primary,
    /// `f(t_{σ(ℓ)}/t_{σ(ℓ')})`, the same action with `q ↦ q^{-1}`.
    Mirrored,
}

/// `(q^{-1} - q x)/(q - q^{-1} x)`.
pub fn exchange_factor(x: Complex64, ctx: &DeformationContext) -> Result<Complex64> {
    let (q, qi) = (ctx.q, ctx.qinv());
    let den = ctx.guard(q - qi * x, q.norm().max((qi * x).norm()), "exchange factor")?;
    Ok((qi - q * x) / den)
}

/// Permutation of `0..n` stored by images: `σ(ℓ) = images[ℓ]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(Error::domain(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Permutation(images))
    }

    /// Adjacent transposition of positions `i` and `i+1` (0-based).
    pub fn transposition(n: usize, i: usize) -> Result<Self> {
        if i + 1 >= n {
            return Err(Error::domain(format!("transposition ({i}, {}) outside 0..{n}", i + 1)));
        }
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(i, i + 1);
        Ok(Permutation(images))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `(self ∘ other)(ℓ) = self(other(ℓ))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::Dimension("composing permutations of different size".into()));
        }
        Ok(Permutation(other.0.iter().map(|&i| self.0[i]).collect()))
    }

    /// `σt` with `(σt)_ℓ = t_{σ(ℓ)}`.
    pub fn apply<T: Copy>(&self, t: &[T]) -> Vec<T> {
        self.0.iter().map(|&i| t[i]).collect()
    }

    /// All of `S_n` in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        (0..n).permutations(n).map(Permutation)
    }

    /// The shuffle subset: permutations increasing on positions `0..s` and on `s..n`.
    pub fn shuffles(n: usize, s: usize) -> impl Iterator<Item = Permutation> {
        Self::all(n).filter(move |p| {
            let (head, tail) = p.0.split_at(s.min(n));
            head.windows(2).all(|w| w[0] < w[1]) && tail.windows(2).all(|w| w[0] < w[1])
        })
    }
}

/// Cocycle `c_σ(t)` of the action for one type.
pub fn pi_coefficient(
    sigma: &Permutation,
    t: &[Complex64],
    ctx: &DeformationContext,
    reading: Reading,
) -> Result<Complex64> {
    if sigma.len() != t.len() {
        return Err(Error::Dimension(format!("permutation of {} acting on {} variables", sigma.len(), t.len())));
    }
    let s = sigma.images();
    let mut c = Complex64::new(1.0, 0.0);
    for l in 0..s.len() {
        for lp in l + 1..s.len() {
            if s[l] > s[lp] {
                let x = match reading {
                    Reading::Primary => t[s[lp]] / t[s[l]],
                    Reading::Mirrored => t[s[l]] / t[s[lp]],
                };
                c *= exchange_factor(x, ctx)?;
            }
        }
    }
    Ok(c)
}

type Evaluator = dyn Fn(&BetheParameterSet) -> Result<Complex64> + Send + Sync;

/// Scalar function of typed variables with a fixed count per type.
#[derive(Clone)]
pub struct TypedFunction {
    layout: Vec<usize>,
    eval: Arc<Evaluator>,
}

impl std::fmt::Debug for TypedFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TypedFunction").field("layout", &self.layout).finish_non_exhaustive()
    }
}

impl TypedFunction {
    pub fn new<F>(layout: Vec<usize>, eval: F) -> Self
    where
        F: Fn(&BetheParameterSet) -> Result<Complex64> + Send + Sync + 'static,
    {
        TypedFunction { layout, eval: Arc::new(eval) }
    }

    /// Function of a single type with `n` variables.
    pub fn single<F>(n: usize, eval: F) -> Self
    where
        F: Fn(&[Complex64]) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self::new(vec![n], move |p| eval(p.of_type(1)))
    }

    pub fn layout(&self) -> &[usize] {
        &self.layout
    }

    pub fn eval(&self, p: &BetheParameterSet) -> Result<Complex64> {
        if p.nbar() != self.layout {
            return Err(Error::Dimension(format!("layout {:?} evaluated at counts {:?}", self.layout, p.nbar())));
        }
        (self.eval)(p)
    }

    /// Evaluates a single-type function at `t`.
    pub fn at(&self, t: &[Complex64]) -> Result<Complex64> {
        self.eval(&BetheParameterSet::single(t.to_vec())?)
    }
}

/// `π(σ)` acting on type `a` (1-based).
pub fn pi_action(a: usize, sigma: Permutation, g: &TypedFunction, ctx: &DeformationContext) -> Result<TypedFunction> {
    pi_action_with(a, sigma, g, ctx, Reading::Primary)
}

pub fn pi_action_with(
    a: usize,
    sigma: Permutation,
    g: &TypedFunction,
    ctx: &DeformationContext,
    reading: Reading,
) -> Result<TypedFunction> {
    if a == 0 || a > g.layout.len() {
        return Err(Error::domain(format!("type {a} not in layout {:?}", g.layout)));
    }
    if sigma.len() != g.layout[a - 1] {
        return Err(Error::domain(format!(
            "permutation of {} indices does not act within type {a} of size {}",
            sigma.len(),
            g.layout[a - 1]
        )));
    }
    let inner = g.clone();
    let ctx = ctx.clone();
    Ok(TypedFunction::new(g.layout.clone(), move |p| {
        let t = p.of_type(a);
        let c = pi_coefficient(&sigma, t, &ctx, reading)?;
        c.is_finite().then_some(()).ok_or_else(|| Error::pole("non-finite cocycle"))?;
        Ok(c * inner.eval(&p.with_type(a, sigma.apply(t))?)?)
    }))
}

/// q-symmetrization over all variables of every type.
pub fn qsym(g: &TypedFunction, ctx: &DeformationContext) -> Result<TypedFunction> {
    qsym_with(g, ctx, Reading::Primary)
}

pub fn qsym_with(g: &TypedFunction, ctx: &DeformationContext, reading: Reading) -> Result<TypedFunction> {
    let ranges = g.layout.iter().map(|&n| 0..n).collect::<Vec<_>>();
    qsym_segments(g, &ranges, ctx, reading)
}

/// q-symmetrization over the index segment `ranges[a-1]` of each type
/// (0-based, half-open); variables outside the segments stay in place.
pub fn qsym_segments(
    g: &TypedFunction,
    ranges: &[Range<usize>],
    ctx: &DeformationContext,
    reading: Reading,
) -> Result<TypedFunction> {
    if ranges.len() != g.layout.len() {
        return Err(Error::Dimension("one segment per type required".into()));
    }
    for (a, r) in ranges.iter().enumerate() {
        if r.start > r.end || r.end > g.layout[a] {
            return Err(Error::domain(format!("segment {r:?} outside type {} of size {}", a + 1, g.layout[a])));
        }
        if r.len() > MAX_SYM_COUNT {
            return Err(Error::Capacity { what: "q-symmetrization count", value: r.len(), cap: MAX_SYM_COUNT });
        }
    }
    let groups: Vec<Vec<Permutation>> = ranges.iter().map(|r| Permutation::all(r.len()).collect()).collect();
    let norm: f64 = ranges.iter().map(|r| (1..=r.len()).product::<usize>() as f64).product();
    let inner = g.clone();
    let ranges = ranges.to_vec();
    let ctx = ctx.clone();
    Ok(TypedFunction::new(g.layout.clone(), move |p| {
        let mut sum = Complex64::new(0.0, 0.0);
        for combo in groups.iter().map(|g| g.iter()).multi_cartesian_product() {
            let mut coeff = Complex64::new(1.0, 0.0);
            let mut types = p.types().to_vec();
            for (a, sigma) in combo.iter().enumerate() {
                let seg = &p.of_type(a + 1)[ranges[a].clone()];
                coeff *= pi_coefficient(sigma, seg, &ctx, reading)?;
                types[a].splice(ranges[a].clone(), sigma.apply(seg));
            }
            sum += coeff * inner.eval(&BetheParameterSet::new(types)?)?;
        }
        // multi_cartesian_product of zero iterators yields nothing
        if groups.is_empty() {
            sum = inner.eval(p)?;
        }
        Ok(sum / norm)
    }))
}

/// Weights for the shift expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftForm {
    /// The weights exactly as printed.
    AsPrinted,
    /// The weights that follow from the decomposition identity at `s = n-1`
    /// (shift to the end) or `s = 1` (shift to the front) under the primary
    /// reading; they are the reciprocals of the printed ones.
    Derived,
}

fn random_rejector(ctx: &DeformationContext) -> impl Fn(&[Complex64]) -> bool + '_ {
    let q2 = ctx.q * ctx.q;
    move |x: &[Complex64]| {
        x.iter().enumerate().any(|(i, &a)| {
            x[i + 1..].iter().any(|&b| ctx.too_close(a, b) || ctx.too_close(a, b * q2) || ctx.too_close(b, a * q2))
        })
    }
}

fn single_layout(g: &TypedFunction) -> Result<usize> {
    match g.layout() {
        [n] => Ok(*n),
        other => Err(Error::domain(format!("single-type function expected, layout {other:?}"))),
    }
}

/// `Sym(Sym(G)) = Sym(G)` at sampled points.
pub fn check_idempotence(g: &TypedFunction, ctx: &DeformationContext, reading: Reading) -> Result<IdentityReport> {
    let n = single_layout(g)?;
    let once = qsym_with(g, ctx, reading)?;
    let twice = qsym_with(&once, ctx, reading)?;
    check_identity(ctx, &format!("qsym idempotence n={n}"), n, random_rejector(ctx), |t| twice.at(t), |t| once.at(t))
}

/// Decomposition of `Sym` into shuffles of two partial symmetrizations split after position `s`.
pub fn check_decomposition(
    g: &TypedFunction,
    s: usize,
    ctx: &DeformationContext,
    reading: Reading,
) -> Result<IdentityReport> {
    let n = single_layout(g)?;
    if s > n {
        return Err(Error::domain(format!("split {s} beyond {n} variables")));
    }
    let full = qsym_with(g, ctx, reading)?;
    #[allow(clippy::single_range_in_vec_init)]
    let inner = qsym_segments(&qsym_segments(g, &[s..n], ctx, reading)?, &[0..s], ctx, reading)?;
    let shuffles: Vec<Permutation> = Permutation::shuffles(n, s).collect();
    let weight = factorial(s) * factorial(n - s) / factorial(n);
    let rhs = |t: &[Complex64]| -> Result<Complex64> {
        let mut sum = Complex64::new(0.0, 0.0);
        for sigma in &shuffles {
            sum += pi_coefficient(sigma, t, ctx, reading)? * inner.at(&sigma.apply(t))?;
        }
        Ok(sum * weight)
    };
    check_identity(ctx, &format!("qsym decomposition n={n} s={s}"), n, random_rejector(ctx), |t| full.at(t), rhs)
}

fn factorial(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

fn drop_index(t: &[Complex64], m: usize) -> Vec<Complex64> {
    t.iter().enumerate().filter(|&(j, _)| j != m).map(|(_, &x)| x).collect()
}

/// Expansion of `n·Sym G` with each variable in turn moved to the last slot.
pub fn check_shift_to_end(
    g: &TypedFunction,
    ctx: &DeformationContext,
    reading: Reading,
    form: ShiftForm,
) -> Result<IdentityReport> {
    shift_check(g, ctx, reading, form, true)
}

/// Expansion of `n·Sym G` with each variable in turn moved to the first slot.
pub fn check_shift_to_front(
    g: &TypedFunction,
    ctx: &DeformationContext,
    reading: Reading,
    form: ShiftForm,
) -> Result<IdentityReport> {
    shift_check(g, ctx, reading, form, false)
}

fn shift_check(
    g: &TypedFunction,
    ctx: &DeformationContext,
    reading: Reading,
    form: ShiftForm,
    to_end: bool,
) -> Result<IdentityReport> {
    let n = single_layout(g)?;
    if n == 0 {
        return Err(Error::domain("shift expansion needs n >= 1"));
    }
    let full = qsym_with(g, ctx, reading)?;
    let lhs = |t: &[Complex64]| Ok(full.at(t)? * n as f64);
    let rhs = |t: &[Complex64]| -> Result<Complex64> {
        let mut sum = Complex64::new(0.0, 0.0);
        for m in 0..n {
            let mut w = Complex64::new(1.0, 0.0);
            let partners: Vec<usize> = if to_end { (m + 1..n).collect() } else { (0..m).collect() };
            for j in partners {
                let x = if to_end { t[m] / t[j] } else { t[j] / t[m] };
                let f = exchange_factor(x, ctx)?;
                w *= match form {
                    ShiftForm::Derived => f,
                    ShiftForm::AsPrinted => f.inv(),
                };
            }
            let tm = t[m];
            let g = g.clone();
            let placed = TypedFunction::single(n - 1, move |rest| {
                let mut args = rest.to_vec();
                if to_end {
                    args.push(tm);
                } else {
                    args.insert(0, tm);
                }
                g.at(&args)
            });
            sum += w * qsym_with(&placed, ctx, reading)?.at(&drop_index(t, m))?;
        }
        Ok(sum)
    };
    let name = format!("qsym shift to {} n={n} {form:?}", if to_end { "end" } else { "front" });
    check_identity(ctx, &name, n, random_rejector(ctx), lhs, rhs)
}

/// `Sym(G(t) Π_{ℓ>1} f(t_1/t_ℓ)) = Sym(G(t_n, t_1, …, t_{n-1}))`.
pub fn check_cyclic(g: &TypedFunction, ctx: &DeformationContext, reading: Reading) -> Result<IdentityReport> {
    let n = single_layout(g)?;
    let gl = g.clone();
    let cx = ctx.clone();
    let weighted = TypedFunction::single(n, move |t| {
        let mut w = gl.at(t)?;
        for &tl in &t[1..] {
            w *= exchange_factor(t[0] / tl, &cx)?;
        }
        Ok(w)
    });
    let gr = g.clone();
    let rotated = TypedFunction::single(n, move |t| {
        let mut r = t.to_vec();
        r.rotate_right(1);
        gr.at(&r)
    });
    let lhs = qsym_with(&weighted, ctx, reading)?;
    let rhs = qsym_with(&rotated, ctx, reading)?;
    check_identity(ctx, &format!("qsym cyclic n={n}"), n, random_rejector(ctx), |t| lhs.at(t), |t| rhs.at(t))
}

/// Applying any `π(σ)` to `Sym G` returns `Sym G`.
pub fn check_q_symmetric(g: &TypedFunction, ctx: &DeformationContext, reading: Reading) -> Result<IdentityReport> {
    let n = single_layout(g)?;
    let sym = qsym_with(g, ctx, reading)?;
    let perms: Vec<Permutation> = Permutation::all(n).collect();
    let lhs = |t: &[Complex64]| -> Result<Complex64> {
        let mut worst = sym.at(t)?;
        let base = worst;
        for sigma in &perms {
            let v = pi_coefficient(sigma, t, ctx, reading)? * sym.at(&sigma.apply(t))?;
            if (v - base).norm() > (worst - base).norm() {
                worst = v;
            }
        }
        Ok(worst)
    };
    check_identity(ctx, &format!("qsym q-symmetric n={n}"), n, random_rejector(ctx), lhs, |t| sym.at(t))
}

/// Scalar `χ` with `F(t_{w_1})⋯F(t_{w_k}) = χ · F(t_n)⋯F(t_1)` for a word `w`
/// that is a permutation of `0..n`, using the exchange relation
/// `F(z)F(w) = (q^{-1}z - qw)/(qz - q^{-1}w) · F(w)F(z)` of one current type.
pub fn current_word_coefficient(word: &[usize], t: &[Complex64], ctx: &DeformationContext) -> Result<Complex64> {
    let (q, qi) = (ctx.q, ctx.qinv());
    let mut w = word.to_vec();
    let mut chi = Complex64::new(1.0, 0.0);
    // bubble sort into descending index order
    for pass in 0..w.len() {
        for i in 0..w.len().saturating_sub(1 + pass) {
            if w[i] < w[i + 1] {
                let (a, b) = (t[w[i]], t[w[i + 1]]);
                let den = ctx.guard(q * a - qi * b, a.norm().max(b.norm()), "current exchange")?;
                chi *= (qi * a - q * b) / den;
                w.swap(i, i + 1);
            }
        }
    }
    Ok(chi)
}

/// Largest relative deviation of `c_σ(t)·χ(σ)` from 1 over all `σ ∈ S_n` at `t`,
/// where `F(t_n)⋯F(t_1)` evaluated at `σt` equals `χ(σ)·F(t_n)⋯F(t_1)`.
/// Zero exactly when the action leaves the current product invariant.
pub fn current_product_invariance(
    n: usize,
    t: &[Complex64],
    ctx: &DeformationContext,
    reading: Reading,
) -> Result<f64> {
    if t.len() != n {
        return Err(Error::Dimension(format!("{n} currents with {} points", t.len())));
    }
    let mut worst = 0.0_f64;
    for sigma in Permutation::all(n) {
        // (σt)_ℓ = t_{σ(ℓ)}, so F((σt)_n)⋯F((σt)_1) is the word σ(n-1), …, σ(0)
        let word: Vec<usize> = sigma.images().iter().rev().copied().collect();
        let chi = current_word_coefficient(&word, t, ctx)?;
        let c = pi_coefficient(&sigma, t, ctx, reading)?;
        worst = worst.max((c * chi - 1.0).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::sample_distinct;
    use crate::context::stream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ctx() -> DeformationContext {
        DeformationContext::real(1.5).unwrap()
    }

    fn generic(n: usize) -> TypedFunction {
        TypedFunction::single(n, |t| {
            let mut v = c(1.0, 0.0);
            for (k, &x) in t.iter().enumerate() {
                v *= x.powi(k as i32 % 3 - 1) * (k as f64 + 1.3);
            }
            Ok(v + (t[0] - 2.5).inv())
        })
    }

    #[test]
    fn elementary_action_hand_value() {
        let cx = ctx();
        let one = TypedFunction::single(2, |_| Ok(c(1.0, 0.0)));
        let p = pi_action(1, Permutation::transposition(2, 0).unwrap(), &one, &cx).unwrap();
        let v = p.at(&[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert!((v - c(-1.0 / 14.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn two_term_symmetrization_hand_value() {
        let cx = ctx();
        let g = TypedFunction::single(2, |t| Ok(t[0]));
        let v = qsym(&g, &cx).unwrap().at(&[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert!((v - c(3.0 / 7.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn identity_and_involution() {
        let cx = ctx();
        let g = generic(3);
        let t = [c(0.7, 0.3), c(-1.1, 0.4), c(0.5, -1.2)];
        let id = pi_action(1, Permutation::identity(3), &g, &cx).unwrap();
        assert_eq!(id.at(&t).unwrap(), g.at(&t).unwrap());
        let s = Permutation::transposition(3, 1).unwrap();
        let twice = pi_action(1, s.clone(), &pi_action(1, s, &g, &cx).unwrap(), &cx).unwrap();
        assert!((twice.at(&t).unwrap() - g.at(&t).unwrap()).norm() < 1e-13);
    }

    #[test]
    fn action_is_a_homomorphism() {
        // π(σ)π(τ) = π(στ) for every pair in S_3, both readings
        let cx = ctx();
        let g = generic(3);
        let t = [c(0.7, 0.3), c(-1.1, 0.4), c(0.5, -1.2)];
        for reading in [Reading::Primary, Reading::Mirrored] {
            for s in Permutation::all(3) {
                for u in Permutation::all(3) {
                    let lhs = pi_action_with(
                        1,
                        s.clone(),
                        &pi_action_with(1, u.clone(), &g, &cx, reading).unwrap(),
                        &cx,
                        reading,
                    )
                    .unwrap()
                    .at(&t)
                    .unwrap();
                    let rhs = pi_action_with(1, s.compose(&u).unwrap(), &g, &cx, reading).unwrap().at(&t).unwrap();
                    assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0), "{s:?} {u:?}");
                }
            }
        }
    }

    #[test]
    fn wrong_type_rejected() {
        let cx = ctx();
        let g = TypedFunction::new(vec![2, 1], |_| Ok(c(1.0, 0.0)));
        assert!(pi_action(2, Permutation::identity(2), &g, &cx).is_err());
        assert!(pi_action(3, Permutation::identity(1), &g, &cx).is_err());
    }

    #[test]
    fn singleton_types_unchanged() {
        let cx = ctx();
        let g = TypedFunction::new(vec![1, 1], |p| Ok(p.of_type(1)[0] * 2.0 + p.of_type(2)[0]));
        let p = BetheParameterSet::new(vec![vec![c(0.3, 0.2)], vec![c(1.1, -0.7)]]).unwrap();
        assert_eq!(qsym(&g, &cx).unwrap().eval(&p).unwrap(), g.eval(&p).unwrap());
    }

    #[test]
    fn capacity_cap() {
        let cx = ctx();
        let g = TypedFunction::single(8, |_| Ok(c(1.0, 0.0)));
        assert!(matches!(qsym(&g, &cx), Err(Error::Capacity { .. })));
    }

    #[test]
    fn multi_type_sum_factorizes() {
        // Sym over two types of a product function is the product of the single-type Syms
        let cx = ctx();
        let g = TypedFunction::new(vec![2, 2], |p| Ok(p.of_type(1)[0] * p.of_type(2)[1].powi(2)));
        let g1 = TypedFunction::single(2, |t| Ok(t[0]));
        let g2 = TypedFunction::single(2, |t| Ok(t[1].powi(2)));
        let a = vec![c(0.6, 0.1), c(-1.3, 0.5)];
        let b = vec![c(1.7, -0.2), c(0.4, 0.9)];
        let p = BetheParameterSet::new(vec![a.clone(), b.clone()]).unwrap();
        let lhs = qsym(&g, &cx).unwrap().eval(&p).unwrap();
        let rhs = qsym(&g1, &cx).unwrap().at(&a).unwrap() * qsym(&g2, &cx).unwrap().at(&b).unwrap();
        assert!((lhs - rhs).norm() < 1e-13 * lhs.norm());
    }

    #[test]
    fn primary_reading_keeps_current_product_invariant() {
        let cx = ctx();
        let mut rng = stream(5, "currents");
        for n in 2..=4 {
            let t = sample_distinct(&mut rng, n, &[], 1e-2).unwrap();
            assert!(current_product_invariance(n, &t, &cx, Reading::Primary).unwrap() < 1e-12);
            assert!(current_product_invariance(n, &t, &cx, Reading::Mirrored).unwrap() > 1e-3);
        }
    }

    #[test]
    fn identities_under_primary_reading() {
        let cx = ctx().with_samples(6).unwrap();
        for n in 1..=3 {
            let g = generic(n);
            assert!(check_idempotence(&g, &cx, Reading::Primary).unwrap().passed());
            assert!(check_cyclic(&g, &cx, Reading::Primary).unwrap().passed());
            assert!(check_shift_to_end(&g, &cx, Reading::Primary, ShiftForm::Derived).unwrap().passed());
            assert!(check_shift_to_front(&g, &cx, Reading::Primary, ShiftForm::Derived).unwrap().passed());
            for s in 0..=n {
                assert!(check_decomposition(&g, s, &cx, Reading::Primary).unwrap().passed());
            }
        }
    }

    #[test]
    fn printed_shift_weights_need_mirrored_reading() {
        let cx = ctx().with_samples(6).unwrap();
        let g = generic(3);
        assert!(!check_shift_to_end(&g, &cx, Reading::Primary, ShiftForm::AsPrinted).unwrap().passed());
        assert!(!check_shift_to_front(&g, &cx, Reading::Primary, ShiftForm::AsPrinted).unwrap().passed());
        assert!(check_shift_to_end(&g, &cx, Reading::Mirrored, ShiftForm::AsPrinted).unwrap().passed());
        assert!(check_shift_to_front(&g, &cx, Reading::Mirrored, ShiftForm::AsPrinted).unwrap().passed());
        assert!(!check_cyclic(&g, &cx, Reading::Mirrored).unwrap().passed());
    }

    #[test]
    fn shuffle_counts() {
        assert_eq!(Permutation::shuffles(4, 2).count(), 6);
        assert_eq!(Permutation::shuffles(4, 0).count(), 1);
        assert_eq!(Permutation::shuffles(4, 4).count(), 1);
        assert_eq!(Permutation::all(4).count(), 24);
    }
}
