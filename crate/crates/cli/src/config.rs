//! Run configuration: a flat `key = value` text format.
//!
//! ```text
//! # comment
//! n = 3                  # rank, 2..=8
//! l = 2                  # number of sites
//! q = random             # or 1.4, or 1.3+0.2i
//! z = random             # or a comma list of complex numbers
//! kappa = random         # comma list of N complex numbers
//! sectors = all          # or `2,1; 1,0`
//! chains = 1
//! seed = 7
//! tol_identity = 1e-10
//! tol_operator = 1e-10
//! n_samples = 25
//! pole_margin = 1e-3
//! ybe_samples = 100
//! restarts = 200
//! out = report.json
//! ```

use std::path::PathBuf;
use std::str::FromStr;

use bethe_core::context::{sample_distinct, stream, DeformationContext, MAX_RANK, Q_RANGE};
use bethe_core::rep::{ChainSpec, MAX_DIM};
use bethe_core::solver::{admissible_sectors, MAX_ROOTS};
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

pub const MAX_CHAINS: usize = 64;
pub const DEFAULT_OUT: &str = "bethe-lab-report.json";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {field}: {message}")]
    Parse { line: usize, field: String, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("capacity exceeded: {what} = {value} (cap {cap})")]
    Capacity { what: String, value: usize, cap: usize },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl ConfigError {
    fn invalid(field: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid { field: field.into(), message: message.into() }
    }
}

/// A value that is either given or drawn from the seed.
#[derive(Debug, Clone, PartialEq)]
pub enum Given<T> {
    Random,
    Fixed(T),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SectorSelection {
    All,
    List(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub l: usize,
    pub q: Given<Complex64>,
    pub z: Given<Vec<Complex64>>,
    pub kappa: Given<Vec<Complex64>>,
    pub sectors: SectorSelection,
    pub chains: usize,
    pub seed: u64,
    pub tol_identity: f64,
    pub tol_operator: f64,
    pub n_samples: usize,
    pub pole_margin: f64,
    pub ybe_samples: usize,
    pub restarts: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 2,
            l: 2,
            q: Given::Random,
            z: Given::Random,
            kappa: Given::Random,
            sectors: SectorSelection::All,
            chains: 1,
            seed: 0,
            tol_identity: 1e-10,
            tol_operator: 1e-10,
            n_samples: 25,
            pole_margin: 1e-3,
            ybe_samples: 100,
            restarts: 200,
            out: PathBuf::from(DEFAULT_OUT),
        }
    }
}

/// Parses `a`, `a+bi`, `a-bi`, `bi` or `(a,b)`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty number".into());
    }
    let bad = || format!("`{s}` is not a complex number");
    let num = |x: &str| f64::from_str(x).map_err(|_| bad());
    let value = if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        Complex64::new(num(a)?, num(b)?)
    } else if let Some(body) = s.strip_suffix('i') {
        // split at the last sign that is not a leading sign or an exponent sign
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let imag = |x: &str| match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            x => num(x),
        };
        match split {
            Some(k) => Complex64::new(num(&body[..k])?, imag(&body[k..])?),
            None => Complex64::new(0.0, imag(body)?),
        }
    } else {
        Complex64::new(num(&s)?, 0.0)
    };
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(bad());
    }
    Ok(value)
}

/// Shortest text that parses back to the same number.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:?}", z.re)
    } else if z.im.is_sign_negative() {
        format!("{:?}{:?}i", z.re, z.im)
    } else {
        format!("{:?}+{:?}i", z.re, z.im)
    }
}

fn parse_complex_list(s: &str) -> Result<Given<Vec<Complex64>>, String> {
    if s.trim() == "random" {
        return Ok(Given::Random);
    }
    s.split(',').map(parse_complex).collect::<Result<Vec<_>, _>>().map(Given::Fixed)
}

pub fn parse_sector(s: &str) -> Result<Vec<usize>, String> {
    s.split(',').map(|x| x.trim().parse::<usize>().map_err(|_| format!("`{}` is not a count", x.trim()))).collect()
}

fn parse_sectors(s: &str) -> Result<SectorSelection, String> {
    if s.trim() == "all" {
        return Ok(SectorSelection::All);
    }
    s.split(';').map(parse_sector).collect::<Result<Vec<_>, _>>().map(SectorSelection::List)
}

fn parse_num<T: FromStr>(s: &str) -> Result<T, String> {
    s.trim().parse::<T>().map_err(|_| format!("cannot parse `{}`", s.trim()))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |field: &str, message: String| ConfigError::Parse { line: idx + 1, field: field.into(), message };
            let (key, value) = line.split_once('=').ok_or_else(|| err("syntax", "expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let r = cfg.set(key, value);
            r.map_err(|m| err(key, m))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "n" => self.n = parse_num(value)?,
            "l" => self.l = parse_num(value)?,
            "q" => self.q = if value == "random" { Given::Random } else { Given::Fixed(parse_complex(value)?) },
            "z" => self.z = parse_complex_list(value)?,
            "kappa" => self.kappa = parse_complex_list(value)?,
            "sectors" => self.sectors = parse_sectors(value)?,
            "chains" => self.chains = parse_num(value)?,
            "seed" => self.seed = parse_num(value)?,
            "tol" => {
                let tol = parse_num(value)?;
                self.tol_identity = tol;
                self.tol_operator = tol;
            }
            "tol_identity" => self.tol_identity = parse_num(value)?,
            "tol_operator" => self.tol_operator = parse_num(value)?,
            "n_samples" => self.n_samples = parse_num(value)?,
            "pole_margin" => self.pole_margin = parse_num(value)?,
            "ybe_samples" => self.ybe_samples = parse_num(value)?,
            "restarts" => self.restarts = parse_num(value)?,
            "out" => self.out = PathBuf::from(value),
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(2..=MAX_RANK).contains(&self.n) {
            return Err(ConfigError::invalid("n", format!("rank {} outside 2..={MAX_RANK}", self.n)));
        }
        if self.l == 0 {
            return Err(ConfigError::invalid("l", "at least one site is required"));
        }
        let dim = (self.n as u128).checked_pow(self.l as u32).unwrap_or(u128::MAX);
        if dim > MAX_DIM as u128 {
            return Err(ConfigError::Capacity {
                what: "N^L".into(),
                value: dim.min(usize::MAX as u128) as usize,
                cap: MAX_DIM,
            });
        }
        if self.chains == 0 || self.chains > MAX_CHAINS {
            return Err(ConfigError::invalid("chains", format!("{} outside 1..={MAX_CHAINS}", self.chains)));
        }
        if let Given::Fixed(z) = &self.z {
            if z.len() != self.l {
                return Err(ConfigError::invalid("z", format!("{} values for l = {}", z.len(), self.l)));
            }
        }
        if let Given::Fixed(k) = &self.kappa {
            if k.len() != self.n {
                return Err(ConfigError::invalid("kappa", format!("{} values for n = {}", k.len(), self.n)));
            }
        }
        if let SectorSelection::List(list) = &self.sectors {
            for nbar in list {
                if nbar.len() != self.n - 1 {
                    return Err(ConfigError::invalid("sectors", format!("{nbar:?} needs {} counts", self.n - 1)));
                }
                let total: usize = nbar.iter().sum();
                if total > MAX_ROOTS {
                    return Err(ConfigError::Capacity {
                        what: "total Bethe roots".into(),
                        value: total,
                        cap: MAX_ROOTS,
                    });
                }
                let admissible = nbar.first().is_some_and(|&n1| n1 <= self.l) && nbar.windows(2).all(|w| w[0] >= w[1]);
                if !admissible {
                    return Err(ConfigError::invalid(
                        "sectors",
                        format!("{nbar:?} is not admissible for l = {}", self.l),
                    ));
                }
            }
        }
        if self.ybe_samples == 0 {
            return Err(ConfigError::invalid("ybe_samples", "must be positive"));
        }
        self.base_context().map(|_| ()).map_err(|e| ConfigError::invalid("context", e.to_string()))
    }

    /// Context with the configured tolerances; `q` is filled in per chain.
    fn base_context(&self) -> bethe_core::Result<DeformationContext> {
        DeformationContext::real(Q_RANGE.0)?
            .with_seed(self.seed)
            .with_tolerances(self.tol_identity, self.tol_operator)?
            .with_samples(self.n_samples)?
            .with_pole_margin(self.pole_margin)
    }

    /// Sectors to run; `All` expands to every admissible sector within the root cap.
    pub fn sector_list(&self) -> Vec<Vec<usize>> {
        match &self.sectors {
            SectorSelection::All => admissible_sectors(self.n, self.l)
                .into_iter()
                .filter(|nb| nb.iter().sum::<usize>() <= MAX_ROOTS)
                .collect(),
            SectorSelection::List(list) => list.clone(),
        }
    }

    /// Draws every random value from the seed.
    pub fn materialize(&self) -> Result<Vec<ChainInputs>, ConfigError> {
        self.validate()?;
        let base = self.base_context().map_err(|e| ConfigError::invalid("context", e.to_string()))?;
        (0..self.chains)
            .map(|index| {
                let mut rng = stream(self.seed, &format!("chain-{index}"));
                let q = match &self.q {
                    Given::Fixed(q) => *q,
                    Given::Random => Complex64::new(rng.random_range(Q_RANGE.0..Q_RANGE.1), 0.0),
                };
                let draw = |rng: &mut rand_chacha::ChaCha8Rng, count: usize, field: &str| {
                    sample_distinct(rng, count, &[], 1e-2).map_err(|e| ConfigError::invalid(field, e.to_string()))
                };
                let z = match &self.z {
                    Given::Fixed(z) => z.clone(),
                    Given::Random => draw(&mut rng, self.l, "z")?,
                };
                let kappa = match &self.kappa {
                    Given::Fixed(k) => k.clone(),
                    Given::Random => draw(&mut rng, self.n, "kappa")?,
                };
                let inputs =
                    ChainInputs { index, n: self.n, q, z, kappa, ctx: DeformationContext { q, ..base.clone() } };
                inputs.spec()?;
                Ok(inputs)
            })
            .collect()
    }

    /// The configuration with every random value replaced by its draw for `chain`.
    pub fn replay_text(&self, chain: &ChainInputs) -> String {
        let list = |v: &[Complex64]| v.iter().map(|&x| format_complex(x)).collect::<Vec<_>>().join(", ");
        let sectors = match &self.sectors {
            SectorSelection::All => "all".to_string(),
            SectorSelection::List(l) => l
                .iter()
                .map(|nb| nb.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
                .collect::<Vec<_>>()
                .join("; "),
        };
        format!(
            "n = {}\nl = {}\nq = {}\nz = {}\nkappa = {}\nsectors = {}\nchains = 1\nseed = {}\ntol_identity = {:?}\n\
             tol_operator = {:?}\nn_samples = {}\npole_margin = {:?}\nybe_samples = {}\nrestarts = {}\n",
            self.n,
            self.l,
            format_complex(chain.q),
            list(&chain.z),
            list(&chain.kappa),
            sectors,
            self.seed,
            self.tol_identity,
            self.tol_operator,
            self.n_samples,
            self.pole_margin,
            self.ybe_samples,
            self.restarts,
        )
    }
}

/// Materialized parameters of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainInputs {
    pub index: usize,
    pub n: usize,
    pub q: Complex64,
    pub z: Vec<Complex64>,
    pub kappa: Vec<Complex64>,
    pub ctx: DeformationContext,
}

impl ChainInputs {
    pub fn spec(&self) -> Result<ChainSpec, ConfigError> {
        ChainSpec::new(self.n, self.z.clone(), self.kappa.clone(), self.ctx.clone()).map_err(|e| match e {
            bethe_core::Error::Capacity { what, value, cap } => ConfigError::Capacity { what: what.into(), value, cap },
            other => ConfigError::invalid("chain", other.to_string()),
        })
    }
}
