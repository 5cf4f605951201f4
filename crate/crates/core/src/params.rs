use num_complex::Complex64;

use crate::context::DeformationContext;
use crate::error::{Error, Result};

/// Typed Bethe variables `t_j^a`, `a = 1..N-1`, `j = 1..n_a`.
///
/// Types and indices are 1-based in the accessors so that formulas read the
/// way they are usually written. Types `0` and `N` exist implicitly and are
/// always empty.
#[derive(Debug, Clone, PartialEq)]
pub struct BetheParameterSet {
    types: Vec<Vec<Complex64>>,
}

impl BetheParameterSet {
    pub fn new(types: Vec<Vec<Complex64>>) -> Result<Self> {
        for (a, vals) in types.iter().enumerate() {
            for (j, v) in vals.iter().enumerate() {
                if !(v.re.is_finite() && v.im.is_finite()) || v.norm() == 0.0 {
                    return Err(Error::domain(format!("t_{}^{} = {v} must be finite and nonzero", j + 1, a + 1)));
                }
            }
        }
        Ok(BetheParameterSet { types })
    }

    /// Parameter set for rank `n` with all counts zero.
    pub fn empty(rank: usize) -> Self {
        BetheParameterSet { types: vec![Vec::new(); rank.saturating_sub(1)] }
    }

    /// Single-type set.
    pub fn single(values: Vec<Complex64>) -> Result<Self> {
        Self::new(vec![values])
    }

    /// Number of types (`N - 1`).
    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    pub fn nbar(&self) -> Vec<usize> {
        self.types.iter().map(Vec::len).collect()
    }

    /// `n_a`, with `n_0 = n_N = 0`.
    pub fn count(&self, a: usize) -> usize {
        if a == 0 || a > self.types.len() {
            0
        } else {
            self.types[a - 1].len()
        }
    }

    pub fn total(&self) -> usize {
        self.types.iter().map(Vec::len).sum()
    }

    /// Variables of type `a` (empty for the boundary types).
    pub fn of_type(&self, a: usize) -> &[Complex64] {
        if a == 0 || a > self.types.len() {
            &[]
        } else {
            &self.types[a - 1]
        }
    }

    /// `t_j^a`, 1-based.
    pub fn get(&self, a: usize, j: usize) -> Option<Complex64> {
        self.of_type(a).get(j.checked_sub(1)?).copied()
    }

    pub fn types(&self) -> &[Vec<Complex64>] {
        &self.types
    }

    pub fn is_admissible(&self, length: usize) -> bool {
        let n = self.nbar();
        n.first().is_none_or(|&n1| n1 <= length) && n.windows(2).all(|w| w[0] >= w[1])
    }

    /// Drops type 1 and shifts the remaining types down by one.
    pub fn tail(&self) -> Self {
        BetheParameterSet { types: self.types.iter().skip(1).cloned().collect() }
    }

    pub fn with_type(&self, a: usize, values: Vec<Complex64>) -> Result<Self> {
        if a == 0 || a > self.types.len() {
            return Err(Error::domain(format!("type {a} out of range")));
        }
        let mut types = self.types.clone();
        types[a - 1] = values;
        Self::new(types)
    }

    /// Copy with `t_i^a` and `t_j^a` exchanged.
    pub fn swapped(&self, a: usize, i: usize, j: usize) -> Self {
        let mut types = self.types.clone();
        types[a - 1].swap(i - 1, j - 1);
        BetheParameterSet { types }
    }

    pub fn flatten(&self) -> Vec<Complex64> {
        self.types.iter().flatten().copied().collect()
    }

    pub fn from_flat(nbar: &[usize], flat: &[Complex64]) -> Result<Self> {
        if nbar.iter().sum::<usize>() != flat.len() {
            return Err(Error::Dimension(format!("{} values for counts {nbar:?}", flat.len())));
        }
        let mut it = flat.iter().copied();
        Self::new(nbar.iter().map(|&n| it.by_ref().take(n).collect()).collect())
    }

    /// Per-type sorted copy (real part, then imaginary part): a representative
    /// that does not depend on the order of same-type roots.
    pub fn canonical(&self) -> Self {
        let types = self
            .types
            .iter()
            .map(|vals| {
                let mut v = vals.clone();
                v.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
                v
            })
            .collect();
        BetheParameterSet { types }
    }

    /// Checks same-type separation against the context pole margin.
    pub fn validate(&self, ctx: &DeformationContext) -> Result<()> {
        for (a, vals) in self.types.iter().enumerate() {
            for i in 0..vals.len() {
                for j in i + 1..vals.len() {
                    if ctx.too_close(vals[i], vals[j]) {
                        return Err(Error::pole(format!(
                            "t_{}^{} and t_{}^{} coincide within margin",
                            i + 1,
                            a + 1,
                            j + 1,
                            a + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Multiplies every variable by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        BetheParameterSet { types: self.types.iter().map(|v| v.iter().map(|x| x * c).collect()).collect() }
    }

    /// Largest absolute difference to another set with the same layout,
    /// comparing canonical forms.
    pub fn canonical_distance(&self, other: &Self) -> Option<f64> {
        if self.nbar() != other.nbar() {
            return None;
        }
        let (a, b) = (self.canonical(), other.canonical());
        Some(
            a.flatten()
                .iter()
                .zip(b.flatten())
                .map(|(x, y)| (x - y).norm() / x.norm().max(y.norm()).max(1e-300))
                .fold(0.0, f64::max),
        )
    }
}
