//! Global numeric policy: the deformation parameter, tolerances and the
//! deterministic random streams every sampled check draws from.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest rank the genericity condition on `q` is checked against.
pub const MAX_RANK: usize = 8;

/// Inner and outer radius of the sampling annulus for spectral variables.
pub const ANNULUS: (f64, f64) = (0.5, 2.0);

/// Interval the default real deformation parameter is drawn from.
pub const Q_RANGE: (f64, f64) = (1.2, 1.8);

const GENERICITY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DeformationContext {
    pub q: Complex64,
    /// Relative tolerance for identities between rational functions.
    pub tol_identity: f64,
    /// Relative tolerance for operator equalities.
    pub tol_operator: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Minimum relative distance between a sample point and a declared pole.
    pub pole_margin: f64,
}

impl DeformationContext {
    pub fn new(q: Complex64) -> Result<Self> {
        let ctx = DeformationContext {
            q,
            tol_identity: 1e-10,
            tol_operator: 1e-10,
            n_samples: 25,
            seed: 0,
            pole_margin: 1e-3,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn real(q: f64) -> Result<Self> {
        Self::new(Complex64::new(q, 0.0))
    }

    /// Context with `q` drawn from [`Q_RANGE`] using the stream derived from `seed`.
    pub fn random(seed: u64) -> Result<Self> {
        let mut rng = stream(seed, "deformation-q");
        let q = rng.random_range(Q_RANGE.0..Q_RANGE.1);
        let mut ctx = Self::real(q)?;
        ctx.seed = seed;
        Ok(ctx)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tolerances(mut self, tol_identity: f64, tol_operator: f64) -> Result<Self> {
        self.tol_identity = tol_identity;
        self.tol_operator = tol_operator;
        self.validate()?;
        Ok(self)
    }

    pub fn with_samples(mut self, n_samples: usize) -> Result<Self> {
        self.n_samples = n_samples;
        self.validate()?;
        Ok(self)
    }

    pub fn with_pole_margin(mut self, pole_margin: f64) -> Result<Self> {
        self.pole_margin = pole_margin;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.q;
        if !(q.re.is_finite() && q.im.is_finite()) || q.norm() < GENERICITY_EPS {
            return Err(Error::InvalidContext(format!("q = {q} must be finite and nonzero")));
        }
        let q2 = q * q;
        let mut power = Complex64::new(1.0, 0.0);
        for k in 1..=2 * MAX_RANK {
            power *= q2;
            if (power - 1.0).norm() < GENERICITY_EPS {
                return Err(Error::InvalidContext(format!("q = {q} is not generic: q^{} = 1", 2 * k)));
            }
        }
        for (name, tol) in [("tol_identity", self.tol_identity), ("tol_operator", self.tol_operator)] {
            if !(tol > 0.0 && tol < 1e-3) {
                return Err(Error::InvalidContext(format!("{name} = {tol} must lie in (0, 1e-3)")));
            }
        }
        if !(self.pole_margin > 0.0) {
            return Err(Error::InvalidContext("pole_margin must be positive".into()));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidContext("n_samples must be positive".into()));
        }
        Ok(())
    }

    pub fn qinv(&self) -> Complex64 {
        self.q.inv()
    }

    /// `q - q^{-1}`.
    pub fn qdiff(&self) -> Complex64 {
        self.q - self.q.inv()
    }

    /// Random stream for a named check, independent of evaluation order.
    pub fn rng_for(&self, name: &str) -> ChaCha8Rng {
        stream(self.seed, name)
    }

    /// Fails with a pole error when `|den| < pole_margin * scale`.
    pub fn guard(&self, den: Complex64, scale: f64, what: &str) -> Result<Complex64> {
        if !(den.norm() >= self.pole_margin * scale) || !den.norm().is_finite() {
            return Err(Error::pole(format!("{what}: |{den}| below margin (scale {scale:e})")));
        }
        Ok(den)
    }

    /// True when `a` and `b` are closer than `pole_margin` relative to their size.
    pub fn too_close(&self, a: Complex64, b: Complex64) -> bool {
        let scale = a.norm().max(b.norm());
        (a - b).norm() < self.pole_margin * scale
    }
}

/// Derives a 64-bit seed from a global seed and a name (FNV-1a, then splitmix64).
pub fn derive_seed(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(name.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

pub fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, name))
}

/// Uniform point on the annulus `ANNULUS.0 <= |z| <= ANNULUS.1` (uniform in
/// radius and angle).
pub fn sample_annulus<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let r = rng.random_range(ANNULUS.0..=ANNULUS.1);
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, phi)
}

/// Samples `n` points on the annulus with pairwise relative separation above `margin`.
pub fn sample_distinct<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    avoid: &[Complex64],
    margin: f64,
) -> Result<Vec<Complex64>> {
    let mut out: Vec<Complex64> = Vec::with_capacity(n);
    let mut misses = 0;
    while out.len() < n {
        let z = sample_annulus(rng);
        let clash = out.iter().chain(avoid).any(|w| (z - w).norm() < margin * z.norm().max(w.norm()));
        if clash {
            misses += 1;
            if misses >= 100 {
                return Err(Error::SamplingExhausted { identity: "distinct annulus points".into(), attempts: misses });
            }
            continue;
        }
        misses = 0;
        out.push(z);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_roots_of_unity_and_zero() {
        assert!(DeformationContext::real(0.0).is_err());
        assert!(DeformationContext::real(1.0).is_err());
        assert!(DeformationContext::real(-1.0).is_err());
        assert!(DeformationContext::new(Complex64::from_polar(1.0, std::f64::consts::PI / 3.0)).is_err());
        assert!(DeformationContext::real(1.5).is_ok());
        // near-classical but still generic
        assert!(DeformationContext::real(1.0 + 1e-8).is_ok());
    }

    #[test]
    fn tolerance_bounds() {
        let ctx = DeformationContext::real(1.5).unwrap();
        assert!(ctx.clone().with_tolerances(1e-2, 1e-10).is_err());
        assert!(ctx.clone().with_tolerances(0.0, 1e-10).is_err());
        assert!(ctx.with_tolerances(1e-12, 1e-9).is_ok());
    }

    #[test]
    fn streams_depend_on_name_and_seed_only() {
        let a: u64 = stream(7, "alpha").random();
        let b: u64 = stream(7, "alpha").random();
        let c: u64 = stream(7, "beta").random();
        let d: u64 = stream(8, "alpha").random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn random_q_in_range() {
        for seed in 0..20 {
            let ctx = DeformationContext::random(seed).unwrap();
            assert!(ctx.q.re >= Q_RANGE.0 && ctx.q.re < Q_RANGE.1 && ctx.q.im == 0.0);
        }
    }

    #[test]
    fn annulus_samples() {
        let mut rng = stream(1, "annulus");
        for _ in 0..200 {
            let z = sample_annulus(&mut rng);
            assert!(z.norm() >= ANNULUS.0 - 1e-15 && z.norm() <= ANNULUS.1 + 1e-15);
        }
    }
}
