//! Check records and the JSON report.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ChainInputs, RunConfig};

pub const TOOL: &str = "bethe-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    pub inputs_digest: String,
    /// `None` when the computation failed or produced a non-finite value.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    /// Seconds.
    pub wall_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// How a residual is compared to its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
}

impl CheckRecord {
    /// Record for `residual` against `tolerance`; a NaN residual fails.
    pub fn measured(id: String, anchor: &str, inputs: &str, residual: f64, tolerance: f64, bound: Bound) -> Self {
        let pass = match bound {
            Bound::AtMost => residual <= tolerance,
            Bound::AtLeast => residual >= tolerance,
        };
        CheckRecord {
            inputs_digest: digest(inputs),
            id,
            anchor: anchor.into(),
            residual: residual.is_finite().then_some(residual),
            tolerance,
            pass,
            wall_time: 0.0,
            detail: None,
        }
    }

    /// Failed record for a computation that raised an error.
    pub fn errored(id: String, anchor: &str, inputs: &str, tolerance: f64, error: impl std::fmt::Display) -> Self {
        let mut rec = Self::measured(id, anchor, inputs, f64::NAN, tolerance, Bound::AtMost);
        rec.pass = false;
        rec.detail = Some(error.to_string());
        rec
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn timed(mut self, seconds: f64) -> Self {
        self.wall_time = seconds;
        self
    }
}

/// Hex SHA-256 of a canonical description of a check's inputs.
pub fn digest(inputs: &str) -> String {
    Sha256::digest(inputs.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub index: usize,
    pub n: usize,
    pub l: usize,
    pub q: [f64; 2],
    pub z: Vec<[f64; 2]>,
    pub kappa: Vec<[f64; 2]>,
    /// Configuration text that reproduces this chain.
    pub replay: String,
}

impl ChainRecord {
    pub fn new(cfg: &RunConfig, chain: &ChainInputs) -> Self {
        ChainRecord {
            index: chain.index,
            n: chain.n,
            l: chain.z.len(),
            q: pair(chain.q),
            z: chain.z.iter().copied().map(pair).collect(),
            kappa: chain.kappa.iter().copied().map(pair).collect(),
            replay: cfg.replay_text(chain),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub chain: usize,
    pub sector: Vec<usize>,
    /// Roots by type.
    pub roots: Vec<Vec<[f64; 2]>>,
    pub max_residual: f64,
    pub jacobian_condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorRecord {
    pub chain: usize,
    pub sector: Vec<usize>,
    pub dimension: usize,
    pub found: usize,
    pub rejected: usize,
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub seed: u64,
    pub version: String,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub chains: Vec<ChainRecord>,
    pub sectors: Vec<SectorRecord>,
    pub solutions: Vec<SolutionRecord>,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
    pub environment: Environment,
}

impl Report {
    /// Sorts the checks by id and fills in the summary.
    pub fn assemble(
        command: &str,
        seed: u64,
        workers: usize,
        chains: Vec<ChainRecord>,
        mut sectors: Vec<SectorRecord>,
        mut solutions: Vec<SolutionRecord>,
        mut checks: Vec<CheckRecord>,
    ) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        sectors.sort_by(|a, b| (a.chain, &a.sector).cmp(&(b.chain, &b.sector)));
        solutions.sort_by(|a, b| (a.chain, &a.sector).cmp(&(b.chain, &b.sector)));
        let passed = checks.iter().filter(|c| c.pass).count();
        let summary =
            Summary { total: checks.len(), passed, failed: checks.len() - passed, pass: passed == checks.len() };
        Report {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            seed,
            chains,
            sectors,
            solutions,
            checks,
            summary,
            environment: Environment { seed, version: VERSION.into(), workers },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report with every timing zeroed, for comparing runs.
    pub fn without_timings(&self) -> Report {
        let mut r = self.clone();
        for c in &mut r.checks {
            c.wall_time = 0.0;
        }
        r
    }

    /// Plain-text summary table.
    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.id.len()).max().unwrap_or(2).max(5);
        let mut out =
            format!("{:<width$}  {:<10}  {:>11}  {:>9}  {}\n", "check", "anchor", "residual", "tolerance", "status");
        for c in &self.checks {
            let residual = c.residual.map_or_else(|| "-".to_string(), |r| format!("{r:.3e}"));
            out.push_str(&format!(
                "{:<width$}  {:<10}  {:>11}  {:>9.1e}  {}\n",
                c.id,
                c.anchor,
                residual,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            ));
        }
        out.push_str(&format!(
            "{}: {} checks, {} passed, {} failed\n",
            self.command, self.summary.total, self.summary.passed, self.summary.failed
        ));
        out
    }
}
