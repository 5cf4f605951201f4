//! Bethe-equation solver and reconciliation of Bethe eigenvalues with the
//! dense transfer-matrix spectrum.
//!
//! Two sources of starting points feed one damped Newton refinement:
//!
//! * twist continuation: with every ratio `κ_a/κ_{a+1}` scaled by `ε`, the
//!   solutions at `ε = 0` are exactly the configurations where type-1 roots
//!   sit on distinct inhomogeneities and type-`a` roots on distinct type-`a-1`
//!   roots, one per state of the sector. Each is tracked to `ε = 1` along a
//!   generic complex path;
//! * random starts on a log-uniform annulus around the inhomogeneity scale.

use std::collections::BTreeMap;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::context::stream;
use crate::error::{Error, Result};
use crate::kernels::{bethe_residuals, tau_eigenvalue};
use crate::params::BetheParameterSet;
use crate::rational::RationalFunction;
use crate::rep::{transfer, vacuum_data, ChainSpec};
use crate::vectors::sector_occupancy;

/// Largest total root count `Σ n_a`.
pub const MAX_ROOTS: usize = 8;

/// Largest `N^L` for dense spectrum reconciliation.
pub const MAX_SPECTRUM_DIM: usize = 256;

const MAX_PATH_STEPS: usize = 20_000;
const MIN_PATH_STEP: f64 = 1e-9;
const PATH_TOL: f64 = 1e-11;
/// Paths that fail are retried along this many differently bent paths in total.
const PATH_RETRIES: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Newton stops once every residual is below this.
    pub tol_root: f64,
    pub max_newton_iters: usize,
    /// Random starts per sector.
    pub n_restarts: usize,
    /// Track the `ε = 0` configurations as well as the random starts.
    pub continuation: bool,
    /// Relative canonical distance under which two solutions coincide.
    pub dedup_tol: f64,
    /// Residual bound a converged point must meet to be reported.
    pub accept_tol: f64,
    /// Minimum relative separation of same-type roots; `None` uses the pole margin.
    pub min_separation: Option<f64>,
    /// Minimum relative distance of first-type roots from inhomogeneities; `None` uses the pole margin.
    pub min_inhomogeneity_distance: Option<f64>,
    /// Minimum root modulus relative to the inhomogeneity scale.
    pub min_modulus: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_root: 1e-12,
            max_newton_iters: 100,
            n_restarts: 200,
            continuation: true,
            dedup_tol: 1e-8,
            accept_tol: 1e-10,
            min_separation: None,
            min_inhomogeneity_distance: None,
            min_modulus: 1e-6,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.tol_root, self.dedup_tol, self.accept_tol, self.min_modulus];
        if positive.iter().any(|x| !(*x > 0.0)) || self.max_newton_iters == 0 {
            return Err(Error::domain("solver tolerances and iteration counts must be positive"));
        }
        if self.min_separation.is_some_and(|x| !(x > 0.0))
            || self.min_inhomogeneity_distance.is_some_and(|x| !(x > 0.0))
        {
            return Err(Error::domain("admissibility margins must be positive"));
        }
        if self.n_restarts == 0 && !self.continuation {
            return Err(Error::domain("no random starts and continuation disabled"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetheSolution {
    pub params: BetheParameterSet,
    /// `|bethe_residual(i, j)|` in type-major order.
    pub residuals: Vec<f64>,
    pub jacobian_condition: f64,
    pub admissible: bool,
    /// Per-type sorted roots.
    pub multiplicity_key: BetheParameterSet,
}

impl BetheSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveReport {
    /// Distinct admissible solutions, sorted by canonical key.
    pub solutions: Vec<BetheSolution>,
    /// Distinct converged points that failed an admissibility margin.
    pub rejected: Vec<BetheSolution>,
    /// Random starts tried.
    pub attempts: usize,
    /// Random starts that reached `accept_tol`.
    pub converged: usize,
    /// Continuation paths tracked.
    pub paths: usize,
    /// Paths whose endpoint reached `accept_tol`.
    pub paths_converged: usize,
}

fn residual_vector(
    nbar: &[usize],
    x: &[Complex64],
    lambdas: &[RationalFunction],
    chain: &ChainSpec,
) -> Option<DVector<Complex64>> {
    if x.iter().any(|v| !v.is_finite() || v.norm() == 0.0) {
        return None;
    }
    let p = BetheParameterSet::from_flat(nbar, x).ok()?;
    let r = bethe_residuals(&p, lambdas, chain.ctx()).ok()?;
    r.iter().all(|v| v.is_finite()).then(|| DVector::from_vec(r))
}

/// Both sides of each equation with denominators cleared and the twist
/// ratio on the left scaled by `eps`; linear factors are divided by `scale`.
fn cleared_sides(
    nbar: &[usize],
    x: &[Complex64],
    chain: &ChainSpec,
    eps: Complex64,
    scale: f64,
) -> Option<Vec<(Complex64, Complex64)>> {
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let p = BetheParameterSet::from_flat(nbar, x).ok()?;
    let (q, qi) = (chain.ctx().q, chain.ctx().qinv());
    let s = Complex64::new(scale, 0.0);
    let kappa = chain.kappa();
    let mut out = Vec::with_capacity(x.len());
    for i in 1..=p.num_types() {
        for (j, &t) in p.of_type(i).iter().enumerate() {
            let (mut left, mut right) = (eps * kappa[i - 1], kappa[i]);
            if i == 1 {
                for &z in chain.z() {
                    left *= (q * t - qi * z) / s;
                    right *= (t - z) / s;
                }
            }
            for (m, &tm) in p.of_type(i).iter().enumerate() {
                if m != j {
                    left *= (qi * t - q * tm) / s;
                    right *= (q * t - qi * tm) / s;
                }
            }
            for &tm in p.of_type(i - 1) {
                left *= (q * t - qi * tm) / s;
                right *= (t - tm) / s;
            }
            for &tm in p.of_type(i + 1) {
                left *= (t - tm) / s;
                right *= (qi * t - q * tm) / s;
            }
            out.push((left, right));
        }
    }
    Some(out)
}

type Map<'a> = dyn Fn(&[Complex64]) -> Option<DVector<Complex64>> + 'a;

/// Central-difference Jacobian of a holomorphic map.
fn jacobian(map: &Map, x: &[Complex64]) -> Option<DMatrix<Complex64>> {
    let dim = x.len();
    let mut jac = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let h = 1e-7 * x[k].norm().max(1e-3);
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[k] += h;
        minus[k] -= h;
        let col = (map(&plus)? - map(&minus)?) / Complex64::new(2.0 * h, 0.0);
        jac.set_column(k, &col);
    }
    Some(jac)
}

fn sup_norm(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Damped Newton with backtracking on `‖map‖₂`, stopping once the sup norm
/// is below `tol` or no step decreases it.
fn newton(map: &Map, x0: Vec<Complex64>, tol: f64, max_iters: usize) -> Option<Vec<Complex64>> {
    let mut x = x0;
    let mut f = map(&x)?;
    let mut fnorm = f.norm();
    for _ in 0..max_iters {
        if sup_norm(&f) <= tol {
            break;
        }
        let step = jacobian(map, &x)?.lu().solve(&(-&f))?;
        let mut alpha = 1.0;
        let mut improved = false;
        while alpha > 1e-6 {
            let trial: Vec<Complex64> = x.iter().zip(step.iter()).map(|(xi, si)| xi + si * alpha).collect();
            if let Some(ft) = map(&trial) {
                let tn = ft.norm();
                if tn < fnorm {
                    x = trial;
                    f = ft;
                    fnorm = tn;
                    improved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Some(x)
}

/// Undamped Newton corrector for path tracking; `None` unless it settles
/// within a few iterations to relative accuracy `PATH_TOL`.
fn correct(
    nbar: &[usize],
    chain: &ChainSpec,
    eps: Complex64,
    scale: f64,
    x0: Vec<Complex64>,
) -> Option<Vec<Complex64>> {
    let map = |x: &[Complex64]| -> Option<DVector<Complex64>> {
        let sides = cleared_sides(nbar, x, chain, eps, scale)?;
        Some(DVector::from_iterator(sides.len(), sides.iter().map(|(l, r)| l - r)))
    };
    let size = x0.iter().map(|c| c.norm()).fold(0.0, f64::max).max(scale);
    let mut x = x0;
    for _ in 0..6 {
        let f = map(&x)?;
        let step = jacobian(&map, &x)?.lu().solve(&(-&f))?;
        x.iter_mut().zip(step.iter()).for_each(|(xi, si)| *xi += si);
        let rel = cleared_sides(nbar, &x, chain, eps, scale)?
            .iter()
            .map(|(l, r)| (l - r).norm() / (l.norm() + r.norm()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        if step.iter().map(|c| c.norm()).fold(0.0, f64::max) <= 1e-10 * size && rel <= PATH_TOL {
            return Some(x);
        }
        if !x.iter().all(|c| c.is_finite()) {
            return None;
        }
    }
    None
}

/// `ε(s) = sγ/(1 - s + sγ)`: runs from 0 to 1 off the real axis for complex `γ`.
fn path_eps(s: f64, gamma: Complex64) -> Complex64 {
    s * gamma / (1.0 - s + s * gamma)
}

/// Tracks an `ε = 0` configuration to `ε = 1`.
fn track(nbar: &[usize], chain: &ChainSpec, gamma: Complex64, start: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let scale = inhomogeneity_scale(chain);
    let mut s: f64 = 0.0;
    let mut x = start;
    let mut prev: Option<(f64, Vec<Complex64>)> = None;
    let mut h: f64 = 0.01;
    for _ in 0..MAX_PATH_STEPS {
        if s >= 1.0 {
            return Some(x);
        }
        let s1 = (s + h).min(1.0);
        let predicted: Vec<Complex64> = match &prev {
            Some((sp, xp)) => x.iter().zip(xp).map(|(a, b)| a + (a - b) * ((s1 - s) / (s - sp))).collect(),
            None => x.clone(),
        };
        let size = x.iter().map(|c| c.norm()).fold(0.0, f64::max).max(scale);
        match correct(nbar, chain, path_eps(s1, gamma), scale, predicted.clone()) {
            Some(x1) if x1.iter().zip(&predicted).all(|(a, b)| (a - b).norm() <= 0.05 * size) => {
                prev = Some((s, std::mem::replace(&mut x, x1)));
                s = s1;
                h = (h * 1.5).min(0.05);
            }
            _ => {
                h *= 0.5;
                if h < MIN_PATH_STEP {
                    return None;
                }
            }
        }
    }
    None
}

/// The `ε = 0` configurations: type-1 roots on distinct inhomogeneities,
/// type-`a` roots on distinct type-`a-1` roots.
fn continuation_starts(nbar: &[usize], z: &[Complex64]) -> Vec<Vec<Complex64>> {
    fn rec(nbar: &[usize], pool: Vec<Complex64>, prefix: Vec<Complex64>, out: &mut Vec<Vec<Complex64>>) {
        let Some((&n, rest)) = nbar.split_first() else {
            out.push(prefix);
            return;
        };
        for pick in pool.iter().copied().combinations(n) {
            let mut next = prefix.clone();
            next.extend(&pick);
            rec(rest, pick, next, out);
        }
    }
    let mut out = Vec::new();
    rec(nbar, z.to_vec(), Vec::new(), &mut out);
    out
}

fn inhomogeneity_scale(chain: &ChainSpec) -> f64 {
    if chain.is_empty() {
        1.0
    } else {
        (chain.z().iter().map(|z| z.norm().ln()).sum::<f64>() / chain.len() as f64).exp()
    }
}

fn classify(chain: &ChainSpec, p: &BetheParameterSet, opts: &SolverOptions) -> bool {
    let ctx = chain.ctx();
    let sep = opts.min_separation.unwrap_or(ctx.pole_margin);
    let zsep = opts.min_inhomogeneity_distance.unwrap_or(ctx.pole_margin);
    let scale = inhomogeneity_scale(chain);
    let close = |a: Complex64, b: Complex64, m: f64| (a - b).norm() < m * a.norm().max(b.norm());
    for vals in p.types() {
        for (i, &a) in vals.iter().enumerate() {
            if a.norm() < opts.min_modulus * scale {
                return false;
            }
            if vals[i + 1..].iter().any(|&b| close(a, b, sep)) {
                return false;
            }
        }
    }
    let qi2 = ctx.qinv() * ctx.qinv();
    !p.of_type(1).iter().any(|&t| chain.z().iter().any(|&z| close(t, z, zsep) || close(t, z * qi2, zsep)))
}

/// Polishes `x0` on the ratio form and packages it if it meets `accept_tol`.
fn refine(
    chain: &ChainSpec,
    nbar: &[usize],
    x0: Vec<Complex64>,
    lambdas: &[RationalFunction],
    opts: &SolverOptions,
) -> Option<BetheSolution> {
    let map = |x: &[Complex64]| residual_vector(nbar, x, lambdas, chain);
    let x = newton(&map, x0, opts.tol_root, opts.max_newton_iters)?;
    let r = map(&x)?;
    if sup_norm(&r) > opts.accept_tol {
        return None;
    }
    let p = BetheParameterSet::from_flat(nbar, &x).ok()?;
    let cond = jacobian(&map, &x)
        .map(|j| {
            let sv = j.singular_values();
            if sv.min() == 0.0 {
                f64::INFINITY
            } else {
                sv.max() / sv.min()
            }
        })
        .unwrap_or(f64::INFINITY);
    Some(BetheSolution {
        admissible: classify(chain, &p, opts),
        residuals: r.iter().map(|c| c.norm()).collect(),
        jacobian_condition: cond,
        multiplicity_key: p.canonical(),
        params: p,
    })
}

fn random_start<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let r = scale * (rng.random_range((1.0f64 / 20.0).ln()..20.0f64.ln())).exp();
            Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect()
}

fn key_order(a: &BetheSolution, b: &BetheSolution) -> std::cmp::Ordering {
    let (x, y) = (a.multiplicity_key.flatten(), b.multiplicity_key.flatten());
    for (u, v) in x.iter().zip(&y) {
        let o = u.re.total_cmp(&v.re).then(u.im.total_cmp(&v.im));
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

fn dedup(found: Vec<BetheSolution>, tol: f64) -> Vec<BetheSolution> {
    let mut out: Vec<BetheSolution> = Vec::new();
    for s in found {
        let dup = out
            .iter_mut()
            .find(|o| o.multiplicity_key.canonical_distance(&s.multiplicity_key).is_some_and(|d| d <= tol));
        match dup {
            Some(existing) => {
                if s.max_residual() < existing.max_residual() {
                    *existing = s;
                }
            }
            None => out.push(s),
        }
    }
    out.sort_by(key_order);
    out
}

/// Solves the Bethe equations of sector `nbar`.
pub fn solve_bethe(chain: &ChainSpec, nbar: &[usize], opts: &SolverOptions) -> Result<SolveReport> {
    opts.validate()?;
    if nbar.len() + 1 != chain.rank() {
        return Err(Error::Dimension(format!("{} counts for rank {}", nbar.len(), chain.rank())));
    }
    let total: usize = nbar.iter().sum();
    if total > MAX_ROOTS {
        return Err(Error::Capacity { what: "total root count", value: total, cap: MAX_ROOTS });
    }
    if sector_occupancy(chain.len(), nbar).is_none() {
        return Err(Error::domain(format!("sector {nbar:?} is not admissible on length {}", chain.len())));
    }
    if total == 0 {
        let empty = BetheParameterSet::empty(chain.rank());
        let sol = BetheSolution {
            multiplicity_key: empty.clone(),
            params: empty,
            residuals: Vec::new(),
            jacobian_condition: 1.0,
            admissible: true,
        };
        return Ok(SolveReport { solutions: vec![sol], ..Default::default() });
    }
    let lambdas = vacuum_data(chain).lambdas;
    let scale = inhomogeneity_scale(chain);
    let seed = chain.ctx().seed;

    let starts = if opts.continuation { continuation_starts(nbar, chain.z()) } else { Vec::new() };
    let gammas: Vec<Complex64> = {
        let mut rng = stream(seed, &format!("bethe-path/{nbar:?}"));
        (0..PATH_RETRIES)
            .map(|_| Complex64::from_polar(1.0, rng.random_range(0.3..std::f64::consts::TAU - 0.3)))
            .collect()
    };
    let tracked: Vec<BetheSolution> = starts
        .into_par_iter()
        .filter_map(|x0| {
            gammas.iter().find_map(|&g| refine(chain, nbar, track(nbar, chain, g, x0.clone())?, &lambdas, opts))
        })
        .collect();
    let paths_converged = tracked.len();

    let random: Vec<BetheSolution> = (0..opts.n_restarts)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = stream(seed, &format!("bethe-start/{nbar:?}/{k}"));
            refine(chain, nbar, random_start(&mut rng, total, scale), &lambdas, opts)
        })
        .collect();
    let converged = random.len();
    log::debug!("sector {nbar:?}: {paths_converged} paths and {converged} of {} starts converged", opts.n_restarts);

    let (good, bad): (Vec<_>, Vec<_>) = tracked.into_iter().chain(random).partition(|s| s.admissible);
    Ok(SolveReport {
        solutions: dedup(good, opts.dedup_tol),
        rejected: dedup(bad, opts.dedup_tol),
        attempts: opts.n_restarts,
        converged,
        paths: if opts.continuation { sector_dimension(chain.len(), nbar) } else { 0 },
        paths_converged,
    })
}

/// Number of basis states with the occupancy of sector `nbar`.
pub fn sector_dimension(length: usize, nbar: &[usize]) -> usize {
    fn binom(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    let mut prev = length;
    let mut dim = 1;
    for &n in nbar {
        dim *= binom(prev, n);
        prev = n;
    }
    dim
}

/// Eigenvalues of `m` from its complex Schur form.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur =
        m.clone().try_schur(1e-15, 10_000).ok_or_else(|| Error::IllPosed("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let below =
        (0..t.nrows()).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| t[(i, j)].norm()).fold(0.0, f64::max);
    if below > 1e-10 * t.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::IllPosed(format!("Schur factor not triangular: {below:e} below the diagonal")));
    }
    Ok(t.diagonal().iter().copied().collect())
}

/// Eigenvalues of the transfer matrix grouped by color occupancy.
pub fn block_spectrum(chain: &ChainSpec, t: Complex64) -> Result<BTreeMap<Vec<usize>, Vec<Complex64>>> {
    if chain.dim() > MAX_SPECTRUM_DIM {
        return Err(Error::Capacity { what: "N^L for dense spectrum", value: chain.dim(), cap: MAX_SPECTRUM_DIM });
    }
    let tm = transfer(chain, t)?;
    let lay = chain.layout();
    let mut blocks: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for idx in 0..chain.dim() {
        blocks.entry(lay.occupancy(idx)).or_default().push(idx);
    }
    let mut out = BTreeMap::new();
    for (occ, idx) in blocks {
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| tm.matrix()[(idx[i], idx[j])]);
        out.insert(occ, eigenvalues(&sub)?);
    }
    Ok(out)
}

/// One Bethe eigenvalue and where it landed.
#[derive(Debug, Clone, PartialEq)]
pub struct BetheMatch {
    pub nbar: Vec<usize>,
    pub params: BetheParameterSet,
    pub tau: Complex64,
    /// Index into the sector's eigenvalue list.
    pub matched: Option<usize>,
    pub rel_error: f64,
    /// More than one eigenvalue within tolerance.
    pub ambiguous: bool,
    /// Matched an eigenvalue already claimed by another solution.
    pub duplicate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorReconcile {
    pub nbar: Vec<usize>,
    pub occupancy: Vec<usize>,
    pub eigenvalues: Vec<Complex64>,
    pub matched_once: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub t_probe: Complex64,
    pub total_states: usize,
    pub sectors: Vec<SectorReconcile>,
    pub matches: Vec<BetheMatch>,
    /// Eigenvalues in supplied sectors that no solution claimed.
    pub unmatched_eigenvalues: usize,
    /// Occupancy blocks with no sector supplied.
    pub uncovered_states: usize,
    pub ambiguous: bool,
}

impl SpectrumReport {
    /// Every eigenvalue of the full space matched exactly once.
    pub fn complete(&self) -> bool {
        self.uncovered_states == 0
            && self.unmatched_eigenvalues == 0
            && self.matches.iter().all(|m| m.matched.is_some() && !m.duplicate)
    }

    pub fn matched_states(&self) -> usize {
        self.sectors.iter().map(|s| s.matched_once).sum()
    }
}

/// Matches each Bethe eigenvalue `τ(t_probe)` to the spectrum of its weight block.
pub fn spectrum_reconcile(
    chain: &ChainSpec,
    sectors: &[(Vec<usize>, Vec<BetheSolution>)],
    t_probe: Complex64,
    rel_tol: f64,
) -> Result<SpectrumReport> {
    let spectrum = block_spectrum(chain, t_probe)?;
    let lambdas = vacuum_data(chain).lambdas;
    let mut matches = Vec::new();
    let mut reconciled = Vec::new();
    let mut covered = 0;
    for (nbar, sols) in sectors {
        let Some(occ) = sector_occupancy(chain.len(), nbar) else {
            if !sols.is_empty() {
                return Err(Error::domain(format!("solutions supplied for inadmissible sector {nbar:?}")));
            }
            continue;
        };
        let evs = spectrum.get(&occ).cloned().unwrap_or_default();
        covered += evs.len();
        let mut claimed = vec![0usize; evs.len()];
        for sol in sols.iter().filter(|s| s.admissible) {
            let tau = tau_eigenvalue(&lambdas, &sol.params, t_probe, chain.ctx())?;
            let errs: Vec<f64> =
                evs.iter().map(|e| (e - tau).norm() / tau.norm().max(e.norm()).max(f64::MIN_POSITIVE)).collect();
            let best = errs.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, &e)| (i, e));
            let within = errs.iter().filter(|&&e| e <= rel_tol).count();
            let (matched, rel_error) = match best {
                Some((i, e)) if e <= rel_tol => (Some(i), e),
                Some((_, e)) => (None, e),
                None => (None, f64::INFINITY),
            };
            let duplicate = matched.is_some_and(|i| claimed[i] > 0);
            if let Some(i) = matched {
                claimed[i] += 1;
            }
            matches.push(BetheMatch {
                nbar: nbar.clone(),
                params: sol.params.clone(),
                tau,
                matched,
                rel_error,
                ambiguous: within > 1,
                duplicate,
            });
        }
        reconciled.push(SectorReconcile {
            nbar: nbar.clone(),
            occupancy: occ,
            matched_once: claimed.iter().filter(|&&c| c == 1).count(),
            eigenvalues: evs,
        });
    }
    let unmatched = reconciled.iter().map(|s| s.eigenvalues.len() - s.matched_once).sum();
    let ambiguous = matches.iter().any(|m| m.ambiguous);
    Ok(SpectrumReport {
        t_probe,
        total_states: chain.dim(),
        sectors: reconciled,
        matches,
        unmatched_eigenvalues: unmatched,
        uncovered_states: chain.dim() - covered,
        ambiguous,
    })
}

/// All admissible sectors `L ≥ n_1 ≥ … ≥ n_{N-1} ≥ 0` in lexicographic order.
pub fn admissible_sectors(rank: usize, length: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, bound: usize, left: usize, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(prefix.clone());
            return;
        }
        for n in 0..=bound {
            prefix.push(n);
            rec(prefix, n, left - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), length, rank - 1, &mut out);
    out
}
