//! Check suites run against the materialized chains.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use bethe_core::context::{sample_distinct, stream, DeformationContext};
use bethe_core::gauss::{
    coordinate_identity_residual, coordinate_vacuum_residual, gauss_decompose, normal_order_transfer_check,
    reconstruction_residual, CoordinateIdentity, Regime,
};
use bethe_core::kernels::{bethe_residual, partial_fraction_check, tau_eigenvalue, v_tilde, v_tilde_second_form};
use bethe_core::operator::OperatorMatrix;
use bethe_core::qsym::{
    check_cyclic, check_decomposition, check_idempotence, check_q_symmetric, check_shift_to_end, check_shift_to_front,
    current_product_invariance, Reading, ShiftForm, TypedFunction,
};
use bethe_core::rational::{check_identity, sample_points, IdentityReport};
use bethe_core::rep::{
    permutation_operator, r_matrix, rll_residual, transfer, vacuum_data, vacuum_residual, yang_baxter_residual,
    zero_modes, ChainSpec,
};
use bethe_core::solver::{
    admissible_sectors, block_spectrum, sector_dimension, solve_bethe, spectrum_reconcile, SolveReport, SolverOptions,
    MAX_ROOTS, MAX_SPECTRUM_DIM,
};
use bethe_core::vectors::{
    modified_vector, offshell_unwanted_n2, on_shell_residual, on_shell_residual_of, sector_occupancy,
    MAX_UNWANTED_ROOTS,
};
use bethe_core::{BetheParameterSet, Error};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::config::{ChainInputs, ConfigError, RunConfig};
use crate::report::{pair, Bound, CheckRecord, SectorRecord, SolutionRecord};

pub const YBE_TOL: f64 = 1e-12;
pub const PERMUTATION_TOL: f64 = 1e-14;
pub const CLASSICAL_TOL: f64 = 1e-6;
pub const CLASSICAL_Q_OFFSET: f64 = 1e-8;
pub const VACUUM_TOL: f64 = 1e-12;
pub const ON_SHELL_TOL: f64 = 1e-8;
pub const EIGEN_TOL: f64 = 1e-8;
pub const UNWANTED_TOL: f64 = 1e-8;
pub const OFF_SHELL_THRESHOLD: f64 = 1e-3;
pub const OFF_SHELL_TRIALS: usize = 50;
/// Fraction of trials that must come out off shell.
pub const OFF_SHELL_RATE: f64 = 0.95;

const PERMUTATION_SAMPLES: usize = 10;
const CLASSICAL_SAMPLES: usize = 5;
const RLL_PAIRS: usize = 5;
const COMMUTE_PAIRS: usize = 10;
const VACUUM_POINTS: usize = 20;
const GAUSS_POINTS: usize = 5;
const ON_SHELL_POINTS: usize = 20;
const MAX_IDENTITY_COUNT: usize = 4;
const MAX_V_TILDE: usize = 5;
const MAX_PARTIAL_FRACTION: usize = 6;
/// Relative separation of sampled points from each other and from poles.
const SAMPLE_MARGIN: f64 = 5e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    YangBaxter,
    Rll,
    Gauss,
    Identities,
    Solve,
    Verify,
    Offshell,
    Spectrum,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::YangBaxter,
        Suite::Rll,
        Suite::Gauss,
        Suite::Identities,
        Suite::Solve,
        Suite::Verify,
        Suite::Offshell,
        Suite::Spectrum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::YangBaxter => "yang-baxter",
            Suite::Rll => "rll",
            Suite::Gauss => "gauss",
            Suite::Identities => "identities",
            Suite::Solve => "solve",
            Suite::Verify => "verify",
            Suite::Offshell => "offshell",
            Suite::Spectrum => "spectrum",
        }
    }
}

type SolveKey = (usize, Vec<usize>);

/// Materialized chains plus a cache of solver runs shared between suites.
pub struct Lab {
    cfg: RunConfig,
    chains: Vec<(ChainInputs, ChainSpec)>,
    solved: Mutex<BTreeMap<SolveKey, Arc<Result<SolveReport, Error>>>>,
}

fn sector_label(nbar: &[usize]) -> String {
    let parts: Vec<String> = nbar.iter().map(usize::to_string).collect();
    format!("n{}", parts.join("-"))
}

fn chain_digest(inputs: &ChainInputs) -> String {
    format!("q={:?};z={:?};kappa={:?}", inputs.q, inputs.z, inputs.kappa)
}

/// Runs `f` and turns its residual or error into a timed record.
fn measure<F>(id: String, anchor: &str, tolerance: f64, bound: Bound, f: F) -> CheckRecord
where
    F: FnOnce() -> Result<(f64, String), Error>,
{
    let start = Instant::now();
    let rec = match f() {
        Ok((residual, inputs)) => CheckRecord::measured(id, anchor, &inputs, residual, tolerance, bound),
        Err(e) => {
            let inputs = id.clone();
            CheckRecord::errored(id, anchor, &inputs, tolerance, e)
        }
    };
    rec.timed(start.elapsed().as_secs_f64())
}

fn identity_record(id: String, anchor: &str, f: impl FnOnce() -> Result<IdentityReport, Error>) -> CheckRecord {
    let start = Instant::now();
    let rec = match f() {
        Ok(rep) => {
            let points: Vec<&Vec<Complex64>> = rep.samples.iter().map(|s| &s.point).collect();
            let inputs = format!("{}|{points:?}", rep.name);
            let worst = rep.samples.iter().map(|s| s.rel_diff).fold(0.0, f64::max);
            let mut rec = CheckRecord::measured(id, anchor, &inputs, worst, rep.tolerance, Bound::AtMost);
            // a NaN at any sample point fails even when the fold skips it
            rec.pass = rep.passed();
            rec.with_detail(format!("{} points", rep.samples.len()))
        }
        Err(e) => {
            let inputs = id.clone();
            CheckRecord::errored(id, anchor, &inputs, 0.0, e)
        }
    };
    rec.timed(start.elapsed().as_secs_f64())
}

fn to_config_error(e: Error) -> ConfigError {
    match e {
        Error::Capacity { what, value, cap } => ConfigError::Capacity { what: what.into(), value, cap },
        other => ConfigError::Invalid { field: "run".into(), message: other.to_string() },
    }
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

fn max_rel_over<F>(points: &[Vec<Complex64>], f: F) -> Result<f64, Error>
where
    F: Fn(&[Complex64]) -> Result<f64, Error>,
{
    points.iter().try_fold(0.0_f64, |acc, p| f(p).map(|r| if r.is_nan() { f64::NAN } else { acc.max(r) }))
}

fn pairwise_close(ctx: &DeformationContext) -> impl Fn(&[Complex64]) -> bool + '_ {
    move |x: &[Complex64]| x.iter().enumerate().any(|(i, &a)| x[i + 1..].iter().any(|&b| ctx.too_close(a, b)))
}

#[derive(Debug, Default)]
pub struct SuiteOutput {
    pub checks: Vec<CheckRecord>,
}

impl Lab {
    pub fn new(cfg: RunConfig) -> Result<Self, ConfigError> {
        let inputs = cfg.materialize()?;
        let chains = inputs
            .into_iter()
            .map(|i| {
                let spec = i.spec()?;
                Ok((i, spec))
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        Ok(Lab { cfg, chains, solved: Mutex::new(BTreeMap::new()) })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn chain_inputs(&self) -> impl Iterator<Item = &ChainInputs> {
        self.chains.iter().map(|(i, _)| i)
    }

    /// Sector and solution records for every solver run made so far.
    pub fn solver_records(&self) -> (Vec<SectorRecord>, Vec<SolutionRecord>) {
        let solved = self.solved.lock().expect("solver cache");
        let mut sectors = Vec::new();
        let mut solutions = Vec::new();
        for ((chain, nbar), rep) in solved.iter() {
            let Ok(rep) = rep.as_ref() else { continue };
            sectors.push(SectorRecord {
                chain: *chain,
                sector: nbar.clone(),
                dimension: sector_dimension(self.chains[*chain].1.len(), nbar),
                found: rep.solutions.len(),
                rejected: rep.rejected.len(),
                attempts: rep.attempts,
            });
            for sol in &rep.solutions {
                solutions.push(SolutionRecord {
                    chain: *chain,
                    sector: nbar.clone(),
                    roots: sol.params.types().iter().map(|v| v.iter().copied().map(pair).collect()).collect(),
                    max_residual: sol.max_residual(),
                    jacobian_condition: sol.jacobian_condition,
                });
            }
        }
        (sectors, solutions)
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions { n_restarts: self.cfg.restarts, ..SolverOptions::default() }
    }

    fn solve(&self, chain: usize, nbar: &[usize]) -> Arc<Result<SolveReport, Error>> {
        let key = (chain, nbar.to_vec());
        if let Some(hit) = self.solved.lock().expect("solver cache").get(&key) {
            return hit.clone();
        }
        let rep = Arc::new(solve_bethe(&self.chains[chain].1, nbar, &self.solver_options()));
        self.solved.lock().expect("solver cache").insert(key, rep.clone());
        rep
    }

    /// `count` annulus points from a named stream, kept away from `avoid`.
    fn points(&self, name: &str, count: usize, avoid: &[Complex64]) -> Result<Vec<Complex64>, Error> {
        let mut rng = stream(self.cfg.seed, name);
        sample_distinct(&mut rng, count, avoid, SAMPLE_MARGIN)
    }

    /// Inhomogeneities and the transfer-matrix poles `z q^{-2}`.
    fn chain_poles(chain: &ChainSpec) -> Vec<Complex64> {
        let qi2 = chain.ctx().qinv() * chain.ctx().qinv();
        chain.z().iter().flat_map(|&z| [z, z * qi2]).collect()
    }

    pub fn run(&self, suite: Suite) -> Result<SuiteOutput, ConfigError> {
        let checks = match suite {
            Suite::YangBaxter => self.yang_baxter(),
            Suite::Rll => self.rll(),
            Suite::Gauss => self.gauss(),
            Suite::Identities => self.identities(),
            Suite::Solve => self.solve_suite()?,
            Suite::Verify => self.verify()?,
            Suite::Offshell => self.offshell()?,
            Suite::Spectrum => self.spectrum()?,
        };
        Ok(SuiteOutput { checks })
    }

    fn yang_baxter(&self) -> Vec<CheckRecord> {
        let n = self.cfg.n;
        let seed = self.cfg.seed;
        let margin = self.cfg.pole_margin;
        let sample = move |name: String| -> Result<(DeformationContext, Vec<Complex64>), Error> {
            let mut rng = stream(seed, &name);
            let q = Complex64::from_polar(rng.random_range(1.1..2.5), rng.random_range(-0.6..0.6));
            let ctx = DeformationContext::new(q)?.with_pole_margin(margin)?;
            let p = sample_distinct(&mut rng, 3, &[], SAMPLE_MARGIN)?;
            Ok((ctx, p))
        };
        let mut checks: Vec<CheckRecord> = (0..self.cfg.ybe_samples)
            .into_par_iter()
            .map(|s| {
                let name = format!("yang-baxter/n{n}/ybe/{s:03}");
                measure(name.clone(), "(2.1)", YBE_TOL, Bound::AtMost, || {
                    let (ctx, p) = sample(name)?;
                    let r = yang_baxter_residual(p[0], p[1], p[2], n, &ctx)?;
                    Ok((r, format!("n={n};q={:?};uvw={p:?}", ctx.q)))
                })
            })
            .collect();
        checks.par_extend((0..PERMUTATION_SAMPLES).into_par_iter().map(|s| {
            let name = format!("yang-baxter/n{n}/equal-points/{s:02}");
            measure(name.clone(), "(2.1)", PERMUTATION_TOL, Bound::AtMost, || {
                let (ctx, p) = sample(name)?;
                let r = r_matrix(p[0], p[0], n, &ctx)?;
                let diff = r.matrix() - permutation_operator(n).matrix();
                Ok((diff.camax(), format!("n={n};q={:?};u={:?}", ctx.q, p[0])))
            })
        }));
        checks.par_extend((0..CLASSICAL_SAMPLES).into_par_iter().map(|s| {
            let name = format!("yang-baxter/n{n}/classical-limit/{s:02}");
            measure(name.clone(), "(2.1)", CLASSICAL_TOL, Bound::AtMost, || {
                let (_, p) = sample(name)?;
                let ctx = DeformationContext::real(1.0 + CLASSICAL_Q_OFFSET)?;
                let r = r_matrix(p[0], p[1], n, &ctx)?;
                let diff = r.matrix() - OperatorMatrix::identity(n * n).matrix();
                Ok((diff.camax(), format!("n={n};q={:?};uv={:?}", ctx.q, &p[..2])))
            })
        }));
        checks
    }

    fn rll(&self) -> Vec<CheckRecord> {
        self.chains
            .par_iter()
            .flat_map(|(inputs, chain)| {
                let c = inputs.index;
                let tag = chain_digest(inputs);
                let tol = chain.ctx().tol_operator;
                let poles = Self::chain_poles(chain);
                let mut checks = Vec::new();
                for k in 0..RLL_PAIRS {
                    let id = format!("rll/c{c:02}/rll/{k:02}");
                    checks.push(measure(id.clone(), "(2.2)", tol, Bound::AtMost, || {
                        let p = self.points(&id, 2, &poles)?;
                        Ok((rll_residual(chain, p[0], p[1])?, format!("{tag};uv={p:?}")))
                    }));
                }
                for k in 0..COMMUTE_PAIRS {
                    let id = format!("rll/c{c:02}/transfer-commute/{k:02}");
                    checks.push(measure(id.clone(), "(2.30)", tol, Bound::AtMost, || {
                        let p = self.points(&id, 2, &poles)?;
                        let (a, b) = (transfer(chain, p[0])?, transfer(chain, p[1])?);
                        let rel = a.commutator(&b).norm() / (a.norm() * b.norm());
                        Ok((rel, format!("{tag};uv={p:?}")))
                    }));
                }
                for k in 0..VACUUM_POINTS {
                    let id = format!("rll/c{c:02}/vacuum/{k:02}");
                    checks.push(measure(id.clone(), "(2.28)", VACUUM_TOL, Bound::AtMost, || {
                        let t = self.points(&id, 1, &poles)?[0];
                        Ok((vacuum_residual(chain, t)?, format!("{tag};t={t:?}")))
                    }));
                }
                let zm = zero_modes(chain);
                for (label, plus) in [("plus", true), ("minus", false)] {
                    let id = format!("rll/c{c:02}/zero-mode-triangular/{label}");
                    checks.push(measure(id, "(2.2)", 0.0, Bound::AtMost, || {
                        let (p, m) = zm.clone()?;
                        // L+[0] is upper triangular, L-[0] lower triangular
                        let r = if plus { p.off_triangle_ratio(true) } else { m.off_triangle_ratio(false) };
                        Ok((r, tag.clone()))
                    }));
                }
                checks
            })
            .collect()
    }

    fn gauss(&self) -> Vec<CheckRecord> {
        let mut checks: Vec<CheckRecord> = self
            .chains
            .par_iter()
            .flat_map(|(inputs, chain)| {
                let c = inputs.index;
                let tag = chain_digest(inputs);
                let poles = Self::chain_poles(chain);
                let tol = chain.ctx().tol_operator;
                let pts = self.points(&format!("gauss/c{c:02}/points"), GAUSS_POINTS, &poles);
                (0..GAUSS_POINTS)
                    .into_par_iter()
                    .flat_map(|k| {
                        let base = format!("gauss/c{c:02}/t{k}");
                        let t = pts.as_ref().map(|p| p[k]).map_err(Clone::clone);
                        let inputs = |t: Complex64| format!("{tag};t={t:?}");
                        let mut out = vec![
                            measure(format!("{base}/reconstruction"), "(2.6)", tol, Bound::AtMost, || {
                                let t = t.clone()?;
                                let lop = bethe_core::rep::monodromy(chain, t)?;
                                let data = gauss_decompose(&lop, Regime::Finite)?;
                                Ok((reconstruction_residual(&lop, &data), inputs(t)))
                            }),
                            measure(format!("{base}/normal-order"), "(2.30)", tol, Bound::AtMost, || {
                                let t = t.clone()?;
                                Ok((normal_order_transfer_check(chain, t)?, inputs(t)))
                            }),
                            measure(format!("{base}/coordinate-vacuum"), "(2.29)", tol, Bound::AtMost, || {
                                let t = t.clone()?;
                                Ok((coordinate_vacuum_residual(chain, t)?, inputs(t)))
                            }),
                        ];
                        for kind in CoordinateIdentity::all(chain.rank()) {
                            let label = match kind {
                                CoordinateIdentity::LowerScreening { j, i } => format!("lower-screening-{j}-{i}"),
                                CoordinateIdentity::UpperScreening { i, j } => format!("upper-screening-{i}-{j}"),
                                CoordinateIdentity::IteratedUpperScreening { i, j } => {
                                    format!("iterated-upper-{i}-{j}")
                                }
                                CoordinateIdentity::CartanScreening { i } => format!("cartan-screening-{i}"),
                            };
                            out.push(measure(
                                format!("{base}/{label}"),
                                kind.anchor(),
                                10.0 * tol,
                                Bound::AtMost,
                                || {
                                    let t = t.clone()?;
                                    Ok((coordinate_identity_residual(kind, t, chain)?, inputs(t)))
                                },
                            ));
                        }
                        out
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        for (inputs, chain) in &self.chains {
            let c = inputs.index;
            let tag = chain_digest(inputs);
            let zm = zero_modes(chain);
            let tol = chain.ctx().tol_operator;
            for (label, regime) in [("plus", Regime::PlusZeroMode), ("minus", Regime::MinusZeroMode)] {
                checks.push(measure(format!("gauss/c{c:02}/zero-mode/{label}"), "(2.6)", tol, Bound::AtMost, || {
                    let (p, m) = zm.clone()?;
                    let lop = if label == "plus" { p } else { m };
                    let data = gauss_decompose(&lop, regime)?;
                    Ok((reconstruction_residual(&lop, &data), tag.clone()))
                }));
            }
        }
        checks
    }

    fn identities(&self) -> Vec<CheckRecord> {
        let ctx = self.chains[0].1.ctx().clone();
        let tol = ctx.tol_identity;
        let reading = Reading::Primary;
        let mut jobs: Vec<Box<dyn Fn() -> CheckRecord + Send + Sync + '_>> = Vec::new();
        for k in 1..=MAX_V_TILDE {
            let id = format!("identities/v-tilde/k{k}");
            let ctx = &ctx;
            jobs.push(Box::new(move || {
                identity_record(id.clone(), "(3.25)", || {
                    check_identity(
                        ctx,
                        &id,
                        2 * k,
                        pairwise_close(ctx),
                        |t| v_tilde(&t[..k], &t[k..], ctx),
                        |t| v_tilde_second_form(&t[..k], &t[k..], ctx),
                    )
                })
            }));
        }
        for j in 3..=MAX_PARTIAL_FRACTION {
            let id = format!("identities/partial-fraction/j{j}");
            let ctx = &ctx;
            jobs.push(Box::new(move || {
                measure(id.clone(), "§4.3.2", tol, Bound::AtMost, || {
                    let pts = sample_points(ctx, &id, j, pairwise_close(ctx))?;
                    let worst = max_rel_over(&pts, |p| Ok(partial_fraction_check(j, p[0], &p[1..], ctx)?.relative()))?;
                    Ok((worst, format!("q={:?};points={pts:?}", ctx.q)))
                })
            }));
        }
        for n in 1..=MAX_IDENTITY_COUNT {
            let ctx = &ctx;
            let id = format!("identities/idempotence/n{n}");
            jobs.push(Box::new(move || {
                identity_record(id.clone(), "(3.16)", || check_idempotence(&probe_function(n), ctx, reading))
            }));
            let id = format!("identities/q-symmetric/n{n}");
            jobs.push(Box::new(move || {
                identity_record(id.clone(), "(3.20)", || check_q_symmetric(&probe_function(n), ctx, reading))
            }));
            for s in 0..=n {
                let id = format!("identities/decomposition/n{n}-s{s}");
                jobs.push(Box::new(move || {
                    identity_record(id.clone(), "(3.17)", || check_decomposition(&probe_function(n), s, ctx, reading))
                }));
            }
            if n >= 2 {
                let id = format!("identities/shift-to-end/n{n}");
                jobs.push(Box::new(move || {
                    identity_record(id.clone(), "(4.7)", || {
                        check_shift_to_end(&probe_function(n), ctx, reading, ShiftForm::Derived)
                    })
                }));
                let id = format!("identities/shift-to-front/n{n}");
                jobs.push(Box::new(move || {
                    identity_record(id.clone(), "(4.8)", || {
                        check_shift_to_front(&probe_function(n), ctx, reading, ShiftForm::Derived)
                    })
                }));
                let id = format!("identities/cyclic/n{n}");
                jobs.push(Box::new(move || {
                    identity_record(id.clone(), "(4.33)", || check_cyclic(&probe_function(n), ctx, reading))
                }));
                let id = format!("identities/current-product/n{n}");
                jobs.push(Box::new(move || {
                    measure(id.clone(), "(3.15)", tol, Bound::AtMost, || {
                        let pts = sample_points(ctx, &id, n, pairwise_close(ctx))?;
                        let worst = max_rel_over(&pts, |p| current_product_invariance(n, p, ctx, reading))?;
                        Ok((worst, format!("q={:?};points={pts:?}", ctx.q)))
                    })
                }));
            }
        }
        jobs.par_iter().map(|job| job()).collect()
    }

    /// Sectors selected by the configuration.
    fn sectors(&self) -> Vec<Vec<usize>> {
        self.cfg.sector_list()
    }

    fn solve_suite(&self) -> Result<Vec<CheckRecord>, ConfigError> {
        let sectors = self.sectors();
        let jobs: Vec<(usize, Vec<usize>)> =
            (0..self.chains.len()).flat_map(|c| sectors.iter().map(move |s| (c, s.clone()))).collect();
        let results: Vec<Result<Vec<CheckRecord>, ConfigError>> = jobs
            .par_iter()
            .map(|(c, nbar)| {
                let start = Instant::now();
                let base = format!("solve/c{c:02}/{}", sector_label(nbar));
                let tag = chain_digest(&self.chains[*c].0);
                let accept = self.solver_options().accept_tol;
                match self.solve(*c, nbar).as_ref() {
                    Ok(rep) => Ok(rep
                        .solutions
                        .iter()
                        .enumerate()
                        .map(|(k, sol)| {
                            let inputs = format!("{tag};nbar={nbar:?};roots={:?}", sol.params.types());
                            CheckRecord::measured(
                                format!("{base}/r{k:03}"),
                                "(2.32)",
                                &inputs,
                                sol.max_residual(),
                                accept,
                                Bound::AtMost,
                            )
                            .timed(start.elapsed().as_secs_f64())
                        })
                        .collect()),
                    Err(e @ Error::Capacity { .. }) => Err(to_config_error(e.clone())),
                    Err(e) => Ok(vec![CheckRecord::errored(format!("{base}/error"), "(2.32)", &tag, accept, e)]),
                }
            })
            .collect();
        Ok(results.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter().flatten().collect())
    }

    fn spectrum_cap(&self) -> Result<(), ConfigError> {
        let dim = self.chains[0].1.dim();
        if dim > MAX_SPECTRUM_DIM {
            return Err(ConfigError::Capacity {
                what: "N^L for dense spectrum".into(),
                value: dim,
                cap: MAX_SPECTRUM_DIM,
            });
        }
        Ok(())
    }

    fn verify(&self) -> Result<Vec<CheckRecord>, ConfigError> {
        self.spectrum_cap()?;
        let sectors = self.sectors();
        let mut checks = Vec::new();
        for (inputs, chain) in &self.chains {
            let c = inputs.index;
            let tag = chain_digest(inputs);
            let poles = Self::chain_poles(chain);
            let probe = self.points(&format!("verify/c{c:02}/probe"), 1, &poles).map(|p| p[0]);
            let spectrum = probe.clone().and_then(|t| block_spectrum(chain, t));
            let lambdas = vacuum_data(chain).lambdas;
            for nbar in &sectors {
                let base = format!("verify/c{c:02}/{}", sector_label(nbar));
                let rep = self.solve(c, nbar);
                let rep = match rep.as_ref() {
                    Ok(r) => r,
                    Err(e @ Error::Capacity { .. }) => return Err(to_config_error(e.clone())),
                    Err(e) => {
                        checks.push(CheckRecord::errored(format!("{base}/error"), "(2.32)", &tag, ON_SHELL_TOL, e));
                        continue;
                    }
                };
                let occupancy = sector_occupancy(chain.len(), nbar);
                let per_solution: Vec<Vec<CheckRecord>> = rep
                    .solutions
                    .par_iter()
                    .enumerate()
                    .map(|(k, sol)| {
                        let id = format!("{base}/r{k:03}");
                        let roots = format!("{tag};nbar={nbar:?};roots={:?}", sol.params.types());
                        let on_shell = measure(format!("{id}/on-shell"), "(2.31)", ON_SHELL_TOL, Bound::AtMost, || {
                            let mut avoid = poles.clone();
                            avoid.extend(sol.params.flatten());
                            let ts = self.points(&id, ON_SHELL_POINTS, &avoid)?;
                            let w = modified_vector(chain, &sol.params)?.vector;
                            let worst = max_rel_over(&ts.iter().map(|&t| vec![t]).collect::<Vec<_>>(), |t| {
                                Ok(on_shell_residual_of(chain, &sol.params, &w, t[0])?.0)
                            })?;
                            Ok((worst, format!("{roots};t={ts:?}")))
                        });
                        let eigen = measure(format!("{id}/eigenvalue"), "(2.33)", EIGEN_TOL, Bound::AtMost, || {
                            let t = probe.clone()?;
                            let spec = spectrum.as_ref().map_err(Clone::clone)?;
                            let block = occupancy
                                .as_ref()
                                .and_then(|o| spec.get(o))
                                .ok_or_else(|| Error::Domain(format!("no weight block for {nbar:?}")))?;
                            let tau = tau_eigenvalue(&lambdas, &sol.params, t, chain.ctx())?;
                            let best = block
                                .iter()
                                .map(|e| (e - tau).norm() / tau.norm().max(e.norm()).max(f64::MIN_POSITIVE))
                                .fold(f64::INFINITY, f64::min);
                            Ok((best, format!("{roots};t_probe={t:?}")))
                        });
                        vec![on_shell, eigen]
                    })
                    .collect();
                checks.extend(per_solution.into_iter().flatten());
            }
        }
        Ok(checks)
    }

    fn offshell(&self) -> Result<Vec<CheckRecord>, ConfigError> {
        let nonempty: Vec<Vec<usize>> = self.sectors().into_iter().filter(|s| s.iter().any(|&x| x > 0)).collect();
        let mut checks = Vec::new();
        for (inputs, chain) in &self.chains {
            let c = inputs.index;
            let tag = chain_digest(inputs);
            let poles = Self::chain_poles(chain);
            if !nonempty.is_empty() {
                checks.push(self.falsification(c, chain, &tag, &poles, &nonempty));
            }
            if chain.rank() == 2 {
                for nbar in nonempty.iter().filter(|s| s[0] <= MAX_UNWANTED_ROOTS) {
                    checks.extend(self.unwanted(c, chain, &tag, &poles, nbar[0])?);
                }
            }
        }
        Ok(checks)
    }

    fn falsification(
        &self,
        c: usize,
        chain: &ChainSpec,
        tag: &str,
        poles: &[Complex64],
        sectors: &[Vec<usize>],
    ) -> CheckRecord {
        let start = Instant::now();
        let id = format!("offshell/c{c:02}/falsification");
        let trials: Vec<(String, bool)> = (0..OFF_SHELL_TRIALS)
            .into_par_iter()
            .map(|k| {
                let nbar = &sectors[k % sectors.len()];
                let total: usize = nbar.iter().sum();
                let outcome = (|| -> Result<(f64, String), Error> {
                    let p = self.points(&format!("{id}/{k:02}"), total + 1, poles)?;
                    let mut types = Vec::new();
                    let mut at = 0;
                    for &count in nbar {
                        types.push(p[at..at + count].to_vec());
                        at += count;
                    }
                    let params = BetheParameterSet::new(types)?;
                    let (res, _) = on_shell_residual(chain, &params, p[total])?;
                    Ok((res, format!("{p:?}")))
                })();
                match outcome {
                    Ok((res, pts)) => (pts, res >= OFF_SHELL_THRESHOLD),
                    // an error is not evidence of being off shell
                    Err(e) => (format!("error {e}"), false),
                }
            })
            .collect();
        let off = trials.iter().filter(|t| t.1).count();
        let rate = off as f64 / OFF_SHELL_TRIALS as f64;
        let inputs = format!("{tag};{:?}", trials.iter().map(|t| &t.0).collect::<Vec<_>>());
        CheckRecord::measured(id, "(2.31)", &inputs, rate, OFF_SHELL_RATE, Bound::AtLeast)
            .with_detail(format!("{off}/{OFF_SHELL_TRIALS} trials off shell"))
            .timed(start.elapsed().as_secs_f64())
    }

    /// Span, closed-form and vanishing checks for the rank-2 unwanted terms with `n` roots.
    fn unwanted(
        &self,
        c: usize,
        chain: &ChainSpec,
        tag: &str,
        poles: &[Complex64],
        n: usize,
    ) -> Result<Vec<CheckRecord>, ConfigError> {
        let base = format!("offshell/c{c:02}/unwanted/n{n}");
        let expect_ill_posed = sector_dimension(chain.len(), &[n]) < n;
        let lambdas = vacuum_data(chain).lambdas;
        let mut checks = Vec::new();

        let start = Instant::now();
        let draw = self.points(&format!("{base}/off"), n + 1, poles);
        let off = draw.clone().and_then(|p| {
            let params = BetheParameterSet::single(p[..n].to_vec())?;
            Ok((offshell_unwanted_n2(chain, &params, p[n]), params, p))
        });
        let (terms, params, pts) = match off {
            Ok(x) => x,
            Err(e) => {
                checks.push(CheckRecord::errored(format!("{base}/off"), "(4.1)", tag, UNWANTED_TOL, e));
                return Ok(checks);
            }
        };
        let inputs = format!("{tag};points={pts:?}");
        if expect_ill_posed {
            let raised = matches!(terms, Err(Error::IllPosed(_)));
            let rec = CheckRecord::measured(
                format!("{base}/ill-posed"),
                "(4.1)",
                &inputs,
                if raised { 0.0 } else { 1.0 },
                0.0,
                Bound::AtMost,
            )
            .with_detail(format!("C({}, {n}) < {n}; decomposition must be refused", chain.len()))
            .timed(start.elapsed().as_secs_f64());
            checks.push(rec);
            return Ok(checks);
        }
        match terms {
            Ok(t) => {
                let elapsed = start.elapsed().as_secs_f64();
                checks.push(
                    CheckRecord::measured(
                        format!("{base}/off/span"),
                        "(4.1)",
                        &inputs,
                        t.fit_residual,
                        UNWANTED_TOL,
                        Bound::AtMost,
                    )
                    .timed(elapsed),
                );
                for m in 0..n {
                    let diff = (t.coefficients[m] - t.closed_form[m]).norm() / t.scales[m];
                    checks.push(
                        CheckRecord::measured(
                            format!("{base}/off/closed-form/m{}", m + 1),
                            "(4.9)",
                            &inputs,
                            diff,
                            UNWANTED_TOL,
                            Bound::AtMost,
                        )
                        .timed(elapsed),
                    );
                    checks.push(self.vanishing_record(
                        format!("{base}/off/iff/m{}", m + 1),
                        &inputs,
                        &t,
                        m,
                        &params,
                        &lambdas,
                        chain,
                        elapsed,
                    ));
                }
            }
            Err(e) => checks.push(CheckRecord::errored(format!("{base}/off/span"), "(4.1)", &inputs, UNWANTED_TOL, e)),
        }

        let rep = self.solve(c, &[n]);
        let rep = match rep.as_ref() {
            Ok(r) => r,
            Err(e @ Error::Capacity { .. }) => return Err(to_config_error(e.clone())),
            Err(e) => {
                checks.push(CheckRecord::errored(format!("{base}/on/error"), "(4.9)", tag, UNWANTED_TOL, e));
                return Ok(checks);
            }
        };
        for (k, sol) in rep.solutions.iter().enumerate() {
            let start = Instant::now();
            let id = format!("{base}/on/r{k:03}");
            let mut avoid = poles.to_vec();
            avoid.extend(sol.params.flatten());
            let res =
                self.points(&id, 1, &avoid).and_then(|t| Ok((offshell_unwanted_n2(chain, &sol.params, t[0])?, t[0])));
            let inputs = format!("{tag};roots={:?}", sol.params.types());
            match res {
                Ok((t, at)) => {
                    let inputs = format!("{inputs};t={at:?}");
                    let elapsed = start.elapsed().as_secs_f64();
                    for m in 0..n {
                        let ratio = t.coefficients[m].norm() / t.scales[m];
                        checks.push(
                            CheckRecord::measured(
                                format!("{id}/vanishes/m{}", m + 1),
                                "(4.9)",
                                &inputs,
                                ratio,
                                UNWANTED_TOL,
                                Bound::AtMost,
                            )
                            .timed(elapsed),
                        );
                        checks.push(self.vanishing_record(
                            format!("{id}/iff/m{}", m + 1),
                            &inputs,
                            &t,
                            m,
                            &sol.params,
                            &lambdas,
                            chain,
                            elapsed,
                        ));
                    }
                }
                Err(e) => checks.push(CheckRecord::errored(id, "(4.9)", &inputs, UNWANTED_TOL, e)),
            }
        }
        Ok(checks)
    }

    /// The scaled coefficient and the Bethe residual fall on the same side of
    /// both thresholds.
    #[allow(clippy::too_many_arguments)]
    fn vanishing_record(
        &self,
        id: String,
        inputs: &str,
        terms: &bethe_core::vectors::UnwantedTerms,
        m: usize,
        params: &BetheParameterSet,
        lambdas: &[bethe_core::RationalFunction],
        chain: &ChainSpec,
        elapsed: f64,
    ) -> CheckRecord {
        match bethe_residual(1, m + 1, params, lambdas, chain.ctx()) {
            Ok(res) => {
                let ratio = terms.coefficients[m].norm() / terms.scales[m];
                let res = res.norm();
                let agree = (ratio <= UNWANTED_TOL) == (res <= UNWANTED_TOL)
                    && (ratio >= OFF_SHELL_THRESHOLD) == (res >= OFF_SHELL_THRESHOLD);
                let mut rec =
                    CheckRecord::measured(id, "(4.9)", inputs, (ratio - res).abs(), OFF_SHELL_THRESHOLD, Bound::AtMost);
                rec.pass = agree;
                rec.with_detail(format!("scaled coefficient {ratio:.3e}, Bethe residual {res:.3e}")).timed(elapsed)
            }
            Err(e) => CheckRecord::errored(id, "(4.9)", inputs, OFF_SHELL_THRESHOLD, e).timed(elapsed),
        }
    }

    fn spectrum(&self) -> Result<Vec<CheckRecord>, ConfigError> {
        self.spectrum_cap()?;
        let (n, l) = (self.cfg.n, self.cfg.l);
        let sectors: Vec<Vec<usize>> =
            admissible_sectors(n, l).into_iter().filter(|nb| sector_occupancy(l, nb).is_some()).collect();
        if let Some(big) = sectors.iter().map(|s| s.iter().sum::<usize>()).find(|&t| t > MAX_ROOTS) {
            return Err(ConfigError::Capacity { what: "total Bethe roots".into(), value: big, cap: MAX_ROOTS });
        }
        let mut checks = Vec::new();
        for (inputs, chain) in &self.chains {
            let start = Instant::now();
            let c = inputs.index;
            let tag = chain_digest(inputs);
            let mut supplied = Vec::new();
            for nbar in &sectors {
                match self.solve(c, nbar).as_ref() {
                    Ok(rep) => supplied.push((nbar.clone(), rep.solutions.clone())),
                    Err(e @ Error::Capacity { .. }) => return Err(to_config_error(e.clone())),
                    Err(e) => {
                        checks.push(CheckRecord::errored(
                            format!("spectrum/c{c:02}/{}", sector_label(nbar)),
                            "(2.33)",
                            &tag,
                            0.0,
                            e,
                        ));
                        supplied.push((nbar.clone(), Vec::new()));
                    }
                }
            }
            let probe = self.points(&format!("spectrum/c{c:02}/probe"), 1, &Self::chain_poles(chain));
            let rep = probe.clone().and_then(|t| spectrum_reconcile(chain, &supplied, t[0], EIGEN_TOL));
            let elapsed = start.elapsed().as_secs_f64();
            let inputs = format!("{tag};t_probe={probe:?}");
            match rep {
                Ok(rep) => {
                    for sec in &rep.sectors {
                        let size = sec.eigenvalues.len().max(1);
                        let missing = (sec.eigenvalues.len() - sec.matched_once) as f64 / size as f64;
                        let surplus = rep
                            .matches
                            .iter()
                            .filter(|m| m.nbar == sec.nbar && (m.matched.is_none() || m.duplicate))
                            .count();
                        let mut rec = CheckRecord::measured(
                            format!("spectrum/c{c:02}/{}", sector_label(&sec.nbar)),
                            "(2.33)",
                            &inputs,
                            missing,
                            0.0,
                            Bound::AtMost,
                        )
                        .with_detail(format!(
                            "{} of {} eigenvalues matched once, {surplus} unmatched or duplicate solutions",
                            sec.matched_once,
                            sec.eigenvalues.len()
                        ))
                        .timed(elapsed);
                        rec.pass &= surplus == 0;
                        checks.push(rec);
                    }
                    let unmatched = (rep.total_states - rep.matched_states()) as f64 / rep.total_states as f64;
                    let mut rec = CheckRecord::measured(
                        format!("spectrum/c{c:02}/complete"),
                        "(2.33)",
                        &inputs,
                        unmatched,
                        0.0,
                        Bound::AtMost,
                    )
                    .with_detail(format!(
                        "{} of {} states matched exactly once",
                        rep.matched_states(),
                        rep.total_states
                    ))
                    .timed(elapsed);
                    rec.pass = rep.complete();
                    checks.push(rec);
                }
                Err(e) => {
                    checks.push(CheckRecord::errored(format!("spectrum/c{c:02}/complete"), "(2.33)", &inputs, 0.0, e))
                }
            }
        }
        Ok(checks)
    }
}
