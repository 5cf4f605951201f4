//! Operator-valued Gauss coordinates of the monodromy and the screening
//! relations between them.
//!
//! `L_{a,b} = Σ_{m ≥ max(a,b)} F_{m,a} k_m E_{b,m}` with `F_{a,a} = E_{a,a} = 1`,
//! obtained by eliminating from the bottom-right corner.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{relative_residual, OperatorMatrix};
use crate::rep::{monodromy, transfer, vacuum_data, zero_modes, BlockLOperator, ChainSpec};

/// Largest condition number accepted for a diagonal coordinate.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Finite,
    PlusZeroMode,
    MinusZeroMode,
}

#[derive(Debug, Clone)]
pub struct GaussData {
    n: usize,
    point: Option<Complex64>,
    source: Regime,
    k: Vec<OperatorMatrix>,
    k_inv: Vec<OperatorMatrix>,
    k_condition: Vec<f64>,
    f: BTreeMap<(usize, usize), OperatorMatrix>,
    e: BTreeMap<(usize, usize), OperatorMatrix>,
}

impl GaussData {
    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn point(&self) -> Option<Complex64> {
        self.point
    }

    pub fn source(&self) -> Regime {
        self.source
    }

    /// `k_a`, 1-based.
    pub fn k(&self, a: usize) -> &OperatorMatrix {
        &self.k[a - 1]
    }

    pub fn k_inverse(&self, a: usize) -> &OperatorMatrix {
        &self.k_inv[a - 1]
    }

    /// Condition numbers of `k_1..k_N`.
    pub fn k_conditions(&self) -> &[f64] {
        &self.k_condition
    }

    /// `F_{b,a}`, `a < b`.
    pub fn f(&self, b: usize, a: usize) -> &OperatorMatrix {
        &self.f[&(b, a)]
    }

    /// `E_{a,b}`, `a < b`.
    pub fn e(&self, a: usize, b: usize) -> &OperatorMatrix {
        &self.e[&(a, b)]
    }

    /// `ψ_i = k_i k_{i+1}^{-1}`.
    pub fn psi(&self, i: usize) -> OperatorMatrix {
        self.k(i) * self.k_inverse(i + 1)
    }

    /// Reassembles the L-operator from the coordinates.
    pub fn reconstruct(&self) -> BlockLOperator {
        let n = self.n;
        let d = self.k[0].dim();
        let one = OperatorMatrix::identity(d);
        let f_or_one = |m: usize, a: usize| if m == a { &one } else { self.f(m, a) };
        let e_or_one = |b: usize, m: usize| if m == b { &one } else { self.e(b, m) };
        let mut blocks = Vec::with_capacity(n * n);
        for a in 1..=n {
            for b in 1..=n {
                let mut acc = OperatorMatrix::zeros(d);
                for m in a.max(b)..=n {
                    acc = &acc + &(&(f_or_one(m, a) * self.k(m)) * e_or_one(b, m));
                }
                blocks.push(acc);
            }
        }
        BlockLOperator::new(n, self.point, blocks).expect("consistent grid")
    }
}

fn describe(point: Option<Complex64>, regime: Regime) -> String {
    match point {
        Some(t) => t.to_string(),
        None => format!("{regime:?}"),
    }
}

fn invert(k: &OperatorMatrix, index: usize, point: Option<Complex64>, regime: Regime) -> Result<(OperatorMatrix, f64)> {
    let cond = k.condition_number();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::SingularCoordinate { index, point: describe(point, regime) });
    }
    let inv = k.inverse().ok_or_else(|| Error::SingularCoordinate { index, point: describe(point, regime) })?;
    log::debug!("k_{index} condition number {cond:e}");
    Ok((inv, cond))
}

/// Non-commutative elimination from the bottom-right corner.
pub fn gauss_decompose(lop: &BlockLOperator, source: Regime) -> Result<GaussData> {
    let n = lop.rank();
    let d = lop.dim();
    // work[(a,b)] holds the current Schur complement, 1-based
    let mut work: Vec<Vec<OperatorMatrix>> =
        (1..=n).map(|a| (1..=n).map(|b| lop.entry(a, b).clone()).collect()).collect();
    let mut k = vec![OperatorMatrix::zeros(d); n];
    let mut k_inv = vec![OperatorMatrix::zeros(d); n];
    let mut k_condition = vec![0.0; n];
    let mut f = BTreeMap::new();
    let mut e = BTreeMap::new();
    for c in (1..=n).rev() {
        let kc = work[c - 1][c - 1].clone();
        let (kinv, cond) = invert(&kc, c, lop.point(), source)?;
        for a in 1..c {
            f.insert((c, a), &work[a - 1][c - 1] * &kinv);
            e.insert((a, c), &kinv * &work[c - 1][a - 1]);
        }
        for a in 1..c {
            for b in 1..c {
                let corr = &(&f[&(c, a)] * &kc) * &e[&(b, c)];
                work[a - 1][b - 1] = &work[a - 1][b - 1] - &corr;
            }
        }
        k[c - 1] = kc;
        k_inv[c - 1] = kinv;
        k_condition[c - 1] = cond;
    }
    Ok(GaussData { n, point: lop.point(), source, k, k_inv, k_condition, f, e })
}

/// Relative residual of the reassembled L-operator.
pub fn reconstruction_residual(lop: &BlockLOperator, data: &GaussData) -> f64 {
    relative_residual(&lop.to_full(), &data.reconstruct().to_full())
}

/// Zero modes `F_i[0]`, `E_i[0]` and the diagonal coordinates of both limits.
#[derive(Debug, Clone)]
pub struct ZeroModeSet {
    pub f_zero: Vec<OperatorMatrix>,
    pub e_zero: Vec<OperatorMatrix>,
    pub k_plus: Vec<OperatorMatrix>,
    pub k_minus: Vec<OperatorMatrix>,
}

impl ZeroModeSet {
    /// `F_i[0] = L⁺_{i,i+1}[0] (L⁺_{i+1,i+1}[0])^{-1}`,
    /// `E_i[0] = -(L⁻_{i+1,i+1}[0])^{-1} L⁻_{i+1,i}[0]`.
    pub fn from_chain(chain: &ChainSpec) -> Result<Self> {
        let (plus, minus) = zero_modes(chain)?;
        let n = chain.rank();
        let mut f_zero = Vec::with_capacity(n - 1);
        let mut e_zero = Vec::with_capacity(n - 1);
        for i in 1..n {
            let (pinv, _) = invert(plus.entry(i + 1, i + 1), i + 1, None, Regime::PlusZeroMode)?;
            let (minv, _) = invert(minus.entry(i + 1, i + 1), i + 1, None, Regime::MinusZeroMode)?;
            f_zero.push(plus.entry(i, i + 1) * &pinv);
            e_zero.push((&minv * minus.entry(i + 1, i)).scale(Complex64::new(-1.0, 0.0)));
        }
        Ok(ZeroModeSet {
            f_zero,
            e_zero,
            k_plus: (1..=n).map(|i| plus.entry(i, i).clone()).collect(),
            k_minus: (1..=n).map(|i| minus.entry(i, i).clone()).collect(),
        })
    }

    /// `F_i[0]`, 1-based.
    pub fn f(&self, i: usize) -> &OperatorMatrix {
        &self.f_zero[i - 1]
    }

    /// `E_i[0]`, 1-based.
    pub fn e(&self, i: usize) -> &OperatorMatrix {
        &self.e_zero[i - 1]
    }
}

/// `S_i(B) = B F_i[0] - q^{-1} F_i[0] B`.
pub fn screening_s(i: usize, b: &OperatorMatrix, zm: &ZeroModeSet, q: Complex64) -> OperatorMatrix {
    let a = zm.f(i);
    &(b * a) - &(a * b).scale(q.inv())
}

/// `Ŝ_i(B) = E_i[0] B - q B E_i[0]`.
pub fn screening_shat(i: usize, b: &OperatorMatrix, zm: &ZeroModeSet, q: Complex64) -> OperatorMatrix {
    let a = zm.e(i);
    &(a * b) - &(b * a).scale(q)
}

/// Relations between Gauss coordinates of different depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateIdentity {
    /// `(q - q^{-1}) F_{j,i} = S_i(F_{j,i+1})`, `i < j-1`.
    LowerScreening { j: usize, i: usize },
    /// `(q - q^{-1}) E_{i,j} = Ŝ_i(E_{i+1,j})`, `i < j-1`.
    UpperScreening { i: usize, j: usize },
    /// `E_{i,j} = (q - q^{-1})^{i+1-j} Ŝ_i ⋯ Ŝ_{j-2}(E_{j-1,j})`, `i < j-1`.
    IteratedUpperScreening { i: usize, j: usize },
    /// `Ŝ_i(ψ_{i+1}) = (q - q^{-1}) ψ_{i+1} E_{i,i+1}`, `1 <= i <= N-2`.
    CartanScreening { i: usize },
}

impl CoordinateIdentity {
    pub fn anchor(&self) -> &'static str {
        match self {
            CoordinateIdentity::LowerScreening { .. } => "(3.4)",
            CoordinateIdentity::UpperScreening { .. } => "(3.10)",
            CoordinateIdentity::IteratedUpperScreening { .. } => "(4.19)",
            CoordinateIdentity::CartanScreening { .. } => "(4.23)",
        }
    }

    /// Every instance with valid indices at rank `n`.
    pub fn all(n: usize) -> Vec<CoordinateIdentity> {
        let mut out = Vec::new();
        for j in 1..=n {
            for i in 1..j.saturating_sub(1) {
                out.push(CoordinateIdentity::LowerScreening { j, i });
                out.push(CoordinateIdentity::UpperScreening { i, j });
                out.push(CoordinateIdentity::IteratedUpperScreening { i, j });
            }
        }
        for i in 1..n.saturating_sub(1) {
            out.push(CoordinateIdentity::CartanScreening { i });
        }
        out
    }

    fn validate(&self, n: usize) -> Result<()> {
        let ok = match *self {
            CoordinateIdentity::LowerScreening { j, i }
            | CoordinateIdentity::UpperScreening { i, j }
            | CoordinateIdentity::IteratedUpperScreening { i, j } => i >= 1 && i + 1 < j && j <= n,
            CoordinateIdentity::CartanScreening { i } => i >= 1 && i + 2 <= n,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("{self:?} has no valid instance at rank {n}")))
        }
    }
}

/// Both sides of `kind` on the finite-point coordinates at `t`.
pub fn coordinate_identity_sides(
    kind: CoordinateIdentity,
    data: &GaussData,
    zm: &ZeroModeSet,
    q: Complex64,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    kind.validate(data.rank())?;
    let qd = q - q.inv();
    Ok(match kind {
        CoordinateIdentity::LowerScreening { j, i } => {
            (data.f(j, i).scale(qd), screening_s(i, data.f(j, i + 1), zm, q))
        }
        CoordinateIdentity::UpperScreening { i, j } => {
            (data.e(i, j).scale(qd), screening_shat(i, data.e(i + 1, j), zm, q))
        }
        CoordinateIdentity::IteratedUpperScreening { i, j } => {
            let mut acc = data.e(j - 1, j).clone();
            for s in (i..=j - 2).rev() {
                acc = screening_shat(s, &acc, zm, q);
            }
            (data.e(i, j).clone(), acc.scale(qd.powi(i as i32 + 1 - j as i32)))
        }
        CoordinateIdentity::CartanScreening { i } => {
            let psi = data.psi(i + 1);
            let rhs = (&psi * data.e(i, i + 1)).scale(qd);
            (screening_shat(i, &psi, zm, q), rhs)
        }
    })
}

/// Relative residual of a coordinate identity at spectral point `t`.
pub fn coordinate_identity_residual(kind: CoordinateIdentity, t: Complex64, chain: &ChainSpec) -> Result<f64> {
    kind.validate(chain.rank())?;
    let data = gauss_decompose(&monodromy(chain, t)?, Regime::Finite)?;
    let zm = ZeroModeSet::from_chain(chain)?;
    let (lhs, rhs) = coordinate_identity_sides(kind, &data, &zm, chain.ctx().q)?;
    Ok(relative_residual(&lhs, &rhs))
}

/// `transfer(t)` against `Σ_i (k_i + Σ_{j>i} F_{j,i} k_j E_{i,j})`.
pub fn normal_order_transfer_check(chain: &ChainSpec, t: Complex64) -> Result<f64> {
    let data = gauss_decompose(&monodromy(chain, t)?, Regime::Finite)?;
    let n = chain.rank();
    let mut acc = OperatorMatrix::zeros(chain.dim());
    for i in 1..=n {
        acc = &acc + data.k(i);
        for j in i + 1..=n {
            acc = &acc + &(&(data.f(j, i) * data.k(j)) * data.e(i, j));
        }
    }
    Ok(relative_residual(&transfer(chain, t)?, &acc))
}

/// Worst relative deviation from `E_{a,b}Ω = 0` and `k_aΩ = λ_a(t)Ω`.
pub fn coordinate_vacuum_residual(chain: &ChainSpec, t: Complex64) -> Result<f64> {
    let data = gauss_decompose(&monodromy(chain, t)?, Regime::Finite)?;
    let vac = vacuum_data(chain);
    let n = chain.rank();
    let lam: Vec<Complex64> = vac.lambdas.iter().map(|l| l.at(t)).collect();
    let scale = lam.iter().map(|l| l.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut worst = 0.0_f64;
    for a in 1..=n {
        let kv = data.k(a).apply(&vac.omega);
        worst = worst.max((kv - &vac.omega * lam[a - 1]).norm() / scale);
        for b in a + 1..=n {
            let ev: DVector<Complex64> = data.e(a, b).apply(&vac.omega);
            worst = worst.max(ev.norm());
        }
    }
    Ok(worst)
}
