//! Pointwise-evaluated rational functions and randomized identity testing.
//!
//! Two rational functions of bounded degree that agree at a handful of
//! random points away from their poles are equal as rational functions with
//! overwhelming probability, so identities between formal series are checked
//! by evaluation rather than symbolic simplification.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::context::{sample_annulus, DeformationContext};
use crate::error::{Error, Result};

/// Consecutive rejected samples before giving up.
pub const MAX_REJECTIONS: usize = 100;

/// One hyperplane of a pole locus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoleCondition {
    /// `x[slot] = value`
    Const { slot: usize, value: Complex64 },
    /// `x[a] = ratio * x[b]`
    Ratio { a: usize, b: usize, ratio: Complex64 },
}

impl PoleCondition {
    /// Relative distance of `x` from the hyperplane.
    pub fn distance(&self, x: &[Complex64]) -> f64 {
        match *self {
            PoleCondition::Const { slot, value } => {
                let scale = x[slot].norm().max(value.norm()).max(1e-300);
                (x[slot] - value).norm() / scale
            }
            PoleCondition::Ratio { a, b, ratio } => {
                let rhs = ratio * x[b];
                let scale = x[a].norm().max(rhs.norm()).max(1e-300);
                (x[a] - rhs).norm() / scale
            }
        }
    }
}

type Evaluator = dyn Fn(&[Complex64]) -> Complex64 + Send + Sync;

#[derive(Clone)]
pub struct RationalFunction {
    slots: Vec<String>,
    poles: Vec<PoleCondition>,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RationalFunction")
            .field("slots", &self.slots)
            .field("poles", &self.poles)
            .finish_non_exhaustive()
    }
}

impl RationalFunction {
    pub fn new<F>(slots: &[&str], eval: F) -> Self
    where
        F: Fn(&[Complex64]) -> Complex64 + Send + Sync + 'static,
    {
        RationalFunction {
            slots: slots.iter().map(|s| s.to_string()).collect(),
            poles: Vec::new(),
            eval: Arc::new(eval),
        }
    }

    /// One-variable function in slot `t`.
    pub fn univariate<F>(eval: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(&["t"], move |x| eval(x[0]))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::univariate(move |_| c)
    }

    pub fn with_pole(mut self, pole: PoleCondition) -> Self {
        self.poles.push(pole);
        self
    }

    pub fn with_poles(mut self, poles: impl IntoIterator<Item = PoleCondition>) -> Self {
        self.poles.extend(poles);
        self
    }

    pub fn slots(&self) -> &[String] {
        &self.slots
    }

    pub fn arity(&self) -> usize {
        self.slots.len()
    }

    pub fn poles(&self) -> &[PoleCondition] {
        &self.poles
    }

    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        (self.eval)(x)
    }

    /// Convenience for univariate functions.
    pub fn at(&self, t: Complex64) -> Complex64 {
        (self.eval)(&[t])
    }

    pub fn near_pole(&self, x: &[Complex64], margin: f64) -> bool {
        self.poles.iter().any(|p| p.distance(x) < margin)
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    pub point: Vec<Complex64>,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub name: String,
    pub tolerance: f64,
    pub samples: Vec<SamplePoint>,
}

impl IdentityReport {
    pub fn max_rel_diff(&self) -> f64 {
        self.samples.iter().map(|s| s.rel_diff).fold(0.0, f64::max)
    }

    /// All points pass; no majority voting.
    pub fn passed(&self) -> bool {
        self.samples.iter().all(|s| s.rel_diff <= self.tolerance)
    }
}

/// Draws `ctx.n_samples` points with `dim` coordinates on the sampling
/// annulus, redrawing any point `reject` flags. The stream is derived from
/// `(ctx.seed, name)`.
pub fn sample_points<F>(ctx: &DeformationContext, name: &str, dim: usize, reject: F) -> Result<Vec<Vec<Complex64>>>
where
    F: Fn(&[Complex64]) -> bool,
{
    let mut rng = ctx.rng_for(name);
    let mut out = Vec::with_capacity(ctx.n_samples);
    let mut misses = 0;
    while out.len() < ctx.n_samples {
        let x: Vec<Complex64> = (0..dim).map(|_| sample_annulus(&mut rng)).collect();
        if reject(&x) {
            misses += 1;
            if misses >= MAX_REJECTIONS {
                return Err(Error::SamplingExhausted { identity: name.to_string(), attempts: misses });
            }
            continue;
        }
        misses = 0;
        out.push(x);
    }
    Ok(out)
}

/// Compares two callables at sampled points; `reject` guards the pole locus.
pub fn check_identity<L, R, P>(
    ctx: &DeformationContext,
    name: &str,
    dim: usize,
    reject: P,
    lhs: L,
    rhs: R,
) -> Result<IdentityReport>
where
    L: Fn(&[Complex64]) -> Result<Complex64>,
    R: Fn(&[Complex64]) -> Result<Complex64>,
    P: Fn(&[Complex64]) -> bool,
{
    let points = sample_points(ctx, name, dim, reject)?;
    let mut samples = Vec::with_capacity(points.len());
    for point in points {
        let l = lhs(&point)?;
        let r = rhs(&point)?;
        samples.push(SamplePoint { rel_diff: rel_diff(l, r), point, lhs: l, rhs: r });
    }
    Ok(IdentityReport { name: name.to_string(), tolerance: ctx.tol_identity, samples })
}

/// Randomized equality test of two rational functions sharing slots.
pub fn rational_equal(
    name: &str,
    f: &RationalFunction,
    g: &RationalFunction,
    ctx: &DeformationContext,
) -> Result<IdentityReport> {
    if f.slots != g.slots {
        return Err(Error::domain(format!("slot mismatch: {:?} vs {:?}", f.slots, g.slots)));
    }
    let margin = ctx.pole_margin;
    check_identity(
        ctx,
        name,
        f.arity(),
        |x| f.near_pole(x, margin) || g.near_pole(x, margin),
        |x| Ok(f.eval(x)),
        |x| Ok(g.eval(x)),
    )
}
