//! Fundamental evaluation chains: the trigonometric R-matrix, twisted
//! inhomogeneous monodromy, transfer matrix and vacuum data.
//!
//! Site ordering: `T(t) = K · R_{a,L}(t, z_L) ⋯ R_{a,1}(t, z_1)` with the
//! auxiliary space as the first tensor leg of every R factor. This is the
//! ordering under which the RLL relation holds and for which the nested
//! recursion in [`crate::vectors`] produces eigenvectors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::context::DeformationContext;
use crate::error::{Error, Result};
use crate::operator::{relative_residual, LocalOp, OperatorMatrix, SiteLayout};
use crate::rational::{PoleCondition, RationalFunction};

/// Largest quantum-space dimension `N^L`.
pub const MAX_DIM: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    n: usize,
    z: Vec<Complex64>,
    kappa: Vec<Complex64>,
    ctx: DeformationContext,
}

impl ChainSpec {
    pub fn new(n: usize, z: Vec<Complex64>, kappa: Vec<Complex64>, ctx: DeformationContext) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidChain(format!("rank N = {n} must be at least 2")));
        }
        if kappa.len() != n {
            return Err(Error::InvalidChain(format!("{} twist values for rank {n}", kappa.len())));
        }
        let dim = (n as u128).checked_pow(z.len() as u32).unwrap_or(u128::MAX);
        if dim > MAX_DIM as u128 {
            return Err(Error::Capacity { what: "N^L", value: dim.min(usize::MAX as u128) as usize, cap: MAX_DIM });
        }
        for (i, k) in kappa.iter().enumerate() {
            if !k.is_finite() || k.norm() == 0.0 {
                return Err(Error::InvalidChain(format!("κ_{} = {k} must be finite and nonzero", i + 1)));
            }
        }
        for (i, zi) in z.iter().enumerate() {
            if !zi.is_finite() || zi.norm() == 0.0 {
                return Err(Error::InvalidChain(format!("z_{} = {zi} must be finite and nonzero", i + 1)));
            }
            for (j, zj) in z.iter().enumerate().skip(i + 1) {
                if ctx.too_close(*zi, *zj) {
                    return Err(Error::InvalidChain(format!("z_{} and z_{} coincide", i + 1, j + 1)));
                }
            }
        }
        ctx.validate()?;
        Ok(ChainSpec { n, z, kappa, ctx })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn z(&self) -> &[Complex64] {
        &self.z
    }

    pub fn kappa(&self) -> &[Complex64] {
        &self.kappa
    }

    pub fn ctx(&self) -> &DeformationContext {
        &self.ctx
    }

    pub fn layout(&self) -> SiteLayout {
        SiteLayout { n: self.n, len: self.z.len() }
    }

    pub fn dim(&self) -> usize {
        self.layout().dim()
    }
}

/// The trigonometric R-matrix on `ℂ^N ⊗ ℂ^N`, row index `a·N + s`.
pub fn r_matrix(u: Complex64, v: Complex64, n: usize, ctx: &DeformationContext) -> Result<OperatorMatrix> {
    let (b, cu, cv) = r_coefficients(u, v, ctx)?;
    Ok(assemble_r(n, b, cu, cv))
}

/// `(b, c·u, c·v)` with `b = (u-v)/(qu - q^{-1}v)`, `c = (q-q^{-1})/(qu - q^{-1}v)`.
fn r_coefficients(u: Complex64, v: Complex64, ctx: &DeformationContext) -> Result<(Complex64, Complex64, Complex64)> {
    let (q, qi) = (ctx.q, ctx.qinv());
    let den = ctx.guard(q * u - qi * v, (q * u).norm().max((qi * v).norm()), "R-matrix denominator")?;
    let c = ctx.qdiff() / den;
    Ok(((u - v) / den, c * u, c * v))
}

fn assemble_r(n: usize, b: Complex64, cu: Complex64, cv: Complex64) -> OperatorMatrix {
    let mut m = DMatrix::zeros(n * n, n * n);
    let one = Complex64::new(1.0, 0.0);
    for i in 0..n {
        m[(i * n + i, i * n + i)] = one;
        for j in i + 1..n {
            m[(i * n + j, i * n + j)] = b;
            m[(j * n + i, j * n + i)] = b;
            // E_ij ⊗ E_ji maps e_j ⊗ e_i to e_i ⊗ e_j
            m[(i * n + j, j * n + i)] = cu;
            m[(j * n + i, i * n + j)] = cv;
        }
    }
    OperatorMatrix::from_matrix(m).expect("square by construction")
}

/// Site operator sitting in auxiliary block `(k, j)` of an R factor.
fn aux_block(n: usize, k: usize, j: usize, b: Complex64, cu: Complex64, cv: Complex64) -> LocalOp {
    use std::cmp::Ordering;
    match k.cmp(&j) {
        Ordering::Equal => LocalOp((0..n).map(|m| (m, m, if m == k { Complex64::new(1.0, 0.0) } else { b })).collect()),
        Ordering::Less => LocalOp(vec![(j, k, cu)]),
        Ordering::Greater => LocalOp(vec![(j, k, cv)]),
    }
}

/// `N×N` grid of operators on the quantum space.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockLOperator {
    n: usize,
    point: Option<Complex64>,
    blocks: Vec<OperatorMatrix>,
}

impl BlockLOperator {
    pub fn new(n: usize, point: Option<Complex64>, blocks: Vec<OperatorMatrix>) -> Result<Self> {
        if blocks.len() != n * n {
            return Err(Error::Dimension(format!("{} blocks for an {n}x{n} grid", blocks.len())));
        }
        let d = blocks.first().map_or(0, OperatorMatrix::dim);
        if blocks.iter().any(|b| b.dim() != d) {
            return Err(Error::Dimension("blocks of unequal size".into()));
        }
        Ok(BlockLOperator { n, point, blocks })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    /// Spectral point; `None` for the zero-mode limits.
    pub fn point(&self) -> Option<Complex64> {
        self.point
    }

    pub fn dim(&self) -> usize {
        self.blocks[0].dim()
    }

    /// `T_{i,j}`, 1-based.
    pub fn entry(&self, i: usize, j: usize) -> &OperatorMatrix {
        &self.blocks[(i - 1) * self.n + (j - 1)]
    }

    pub fn trace(&self) -> OperatorMatrix {
        let mut acc = OperatorMatrix::zeros(self.dim());
        for i in 1..=self.n {
            acc = &acc + self.entry(i, i);
        }
        acc
    }

    /// Auxiliary-major dense matrix on `ℂ^N ⊗ H`.
    pub fn to_full(&self) -> OperatorMatrix {
        let d = self.dim();
        let mut m = DMatrix::zeros(self.n * d, self.n * d);
        for i in 0..self.n {
            for j in 0..self.n {
                m.view_mut((i * d, j * d), (d, d)).copy_from(self.blocks[i * self.n + j].matrix());
            }
        }
        OperatorMatrix::from_matrix(m).expect("square by construction")
    }

    /// Largest block norm strictly below (`lower = true`) or above the block diagonal,
    /// relative to the largest diagonal block norm.
    pub fn off_triangle_ratio(&self, lower: bool) -> f64 {
        let diag = (1..=self.n).map(|i| self.entry(i, i).norm()).fold(0.0, f64::max);
        let mut worst = 0.0_f64;
        for i in 1..=self.n {
            for j in 1..=self.n {
                if (lower && i > j) || (!lower && i < j) {
                    worst = worst.max(self.entry(i, j).norm());
                }
            }
        }
        if diag == 0.0 {
            worst
        } else {
            worst / diag
        }
    }
}

/// Product `K · R_L ⋯ R_1` with per-site aux blocks built from `coeffs(z_ℓ)`.
fn ordered_product<F>(chain: &ChainSpec, point: Option<Complex64>, coeffs: F) -> Result<BlockLOperator>
where
    F: Fn(Complex64) -> Result<(Complex64, Complex64, Complex64)>,
{
    let n = chain.n;
    let lay = chain.layout();
    let d = lay.dim();
    let mut grid: Vec<DMatrix<Complex64>> = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            if i == j {
                DMatrix::from_diagonal_element(d, d, chain.kappa[i])
            } else {
                DMatrix::zeros(d, d)
            }
        })
        .collect();
    let mut nonzero: Vec<bool> = (0..n * n).map(|idx| idx / n == idx % n).collect();
    for site in (0..lay.len).rev() {
        let (b, cu, cv) = coeffs(chain.z[site])?;
        let locals: Vec<LocalOp> = (0..n * n).map(|idx| aux_block(n, idx / n, idx % n, b, cu, cv)).collect();
        let mut next = vec![DMatrix::zeros(d, d); n * n];
        let mut next_nonzero = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let local = &locals[k * n + j];
                    if !nonzero[i * n + k] || local.0.iter().all(|e| e.2 == Complex64::new(0.0, 0.0)) {
                        continue;
                    }
                    next[i * n + j] += lay.right_mul_local(&grid[i * n + k], site, local);
                    next_nonzero[i * n + j] = true;
                }
            }
        }
        grid = next;
        nonzero = next_nonzero;
    }
    let blocks = grid.into_iter().map(|m| OperatorMatrix::from_matrix(m).expect("square")).collect();
    BlockLOperator::new(n, point, blocks)
}

pub fn monodromy(chain: &ChainSpec, t: Complex64) -> Result<BlockLOperator> {
    ordered_product(chain, Some(t), |z| r_coefficients(t, z, &chain.ctx))
}

pub fn transfer(chain: &ChainSpec, t: Complex64) -> Result<OperatorMatrix> {
    Ok(monodromy(chain, t)?.trace())
}

/// Zero-mode limits of the monodromy: `t → ∞` (upper triangular) and `t → 0`
/// (lower triangular), assembled from the limiting R coefficients.
pub fn zero_modes(chain: &ChainSpec) -> Result<(BlockLOperator, BlockLOperator)> {
    let (q, qi) = (chain.ctx.q, chain.ctx.qinv());
    let zero = Complex64::new(0.0, 0.0);
    let plus = ordered_product(chain, None, |_| Ok((qi, chain.ctx.qdiff() * qi, zero)))?;
    let minus = ordered_product(chain, None, |_| Ok((q, zero, 1.0 - q * q)))?;
    Ok((plus, minus))
}

/// `L⁺_{ii}[0] · L⁻_{ii}[0]` for each `i`. The chain does not impose any
/// relation between the two, so these are reported, never asserted.
pub fn zero_mode_products(chain: &ChainSpec) -> Result<Vec<OperatorMatrix>> {
    let (plus, minus) = zero_modes(chain)?;
    Ok((1..=chain.n).map(|i| plus.entry(i, i) * minus.entry(i, i)).collect())
}

/// Relative residual of `R(u,v) T₁(u) T₂(v) = T₂(v) T₁(u) R(u,v)`.
///
/// Works on the `(a₁a₂, b₁b₂)` blocks of both sides: the left side is
/// `Σ_c R[a,c] T_{c₁b₁}(u) T_{c₂b₂}(v)` and the right side
/// `Σ_c T_{a₂c₂}(v) T_{a₁c₁}(u) R[c,b]`.
pub fn rll_residual(chain: &ChainSpec, u: Complex64, v: Complex64) -> Result<f64> {
    let r = r_matrix(u, v, chain.n, &chain.ctx)?;
    Ok(exchange_residual(r.matrix(), &monodromy(chain, u)?, &monodromy(chain, v)?))
}

fn exchange_residual(r: &DMatrix<Complex64>, tu: &BlockLOperator, tv: &BlockLOperator) -> f64 {
    let n = tu.rank();
    let d = tu.dim();
    // uv[(a1*n+b1)*n*n + a2*n+b2] = T_{a1b1}(u) T_{a2b2}(v), vu likewise with v first
    let mut uv = Vec::with_capacity(n.pow(4));
    let mut vu = Vec::with_capacity(n.pow(4));
    for a1 in 1..=n {
        for b1 in 1..=n {
            for a2 in 1..=n {
                for b2 in 1..=n {
                    uv.push(tu.entry(a1, b1).matrix() * tv.entry(a2, b2).matrix());
                    vu.push(tv.entry(a2, b2).matrix() * tu.entry(a1, b1).matrix());
                }
            }
        }
    }
    let at = |a1: usize, b1: usize, a2: usize, b2: usize| ((a1 * n + b1) * n + a2) * n + b2;
    let zero = Complex64::new(0.0, 0.0);
    let (mut diff2, mut lhs2, mut rhs2) = (0.0, 0.0, 0.0);
    for a in 0..n * n {
        for b in 0..n * n {
            let (a1, a2, b1, b2) = (a / n, a % n, b / n, b % n);
            let mut lhs = DMatrix::zeros(d, d);
            let mut rhs = DMatrix::zeros(d, d);
            for c in 0..n * n {
                let (c1, c2) = (c / n, c % n);
                if r[(a, c)] != zero {
                    lhs += &uv[at(c1, b1, c2, b2)] * r[(a, c)];
                }
                if r[(c, b)] != zero {
                    rhs += &vu[at(a1, c1, a2, c2)] * r[(c, b)];
                }
            }
            diff2 += (&lhs - &rhs).norm_squared();
            lhs2 += lhs.norm_squared();
            rhs2 += rhs.norm_squared();
        }
    }
    let scale = f64::max(lhs2, rhs2).sqrt();
    if scale == 0.0 {
        0.0
    } else {
        diff2.sqrt() / scale
    }
}

/// Moves the second and third legs of an operator on `(ℂ^N)^{⊗3}`:
/// `R_{13}` from `R_{12}`.
fn swap_legs_23(m: &OperatorMatrix, n: usize) -> OperatorMatrix {
    let lay = SiteLayout { n, len: 3 };
    let perm = |idx: usize| {
        let d = lay.digits(idx);
        lay.index(&[d[0], d[2], d[1]])
    };
    let dim = lay.dim();
    let src = m.matrix();
    OperatorMatrix::from_matrix(DMatrix::from_fn(dim, dim, |i, j| src[(perm(i), perm(j))])).expect("square")
}

/// Relative residual of `R₁₂(u,v) R₁₃(u,w) R₂₃(v,w) = R₂₃(v,w) R₁₃(u,w) R₁₂(u,v)`.
pub fn yang_baxter_residual(
    u: Complex64,
    v: Complex64,
    w: Complex64,
    n: usize,
    ctx: &DeformationContext,
) -> Result<f64> {
    let id = OperatorMatrix::identity(n);
    let r12 = r_matrix(u, v, n, ctx)?.kron(&id);
    let r13 = swap_legs_23(&r_matrix(u, w, n, ctx)?.kron(&id), n);
    let r23 = id.kron(&r_matrix(v, w, n, ctx)?);
    let lhs = &(&r12 * &r13) * &r23;
    let rhs = &(&r23 * &r13) * &r12;
    Ok(relative_residual(&lhs, &rhs))
}

/// Permutation operator on `ℂ^N ⊗ ℂ^N`.
pub fn permutation_operator(n: usize) -> OperatorMatrix {
    let mut m = DMatrix::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            m[(a * n + b, b * n + a)] = Complex64::new(1.0, 0.0);
        }
    }
    OperatorMatrix::from_matrix(m).expect("square")
}

/// Reference state and its eigenvalue functions.
#[derive(Debug, Clone)]
pub struct VacuumData {
    pub omega: DVector<Complex64>,
    pub lambdas: Vec<RationalFunction>,
}

/// `Ω = e_1^{⊗L}`, `λ_1 = κ_1`, `λ_i(t) = κ_i Π_ℓ (t - z_ℓ)/(qt - q^{-1}z_ℓ)`.
pub fn vacuum_data(chain: &ChainSpec) -> VacuumData {
    let mut omega = DVector::zeros(chain.dim());
    omega[0] = Complex64::new(1.0, 0.0);
    let (q, qi) = (chain.ctx.q, chain.ctx.qinv());
    let mut lambdas = vec![RationalFunction::constant(chain.kappa[0])];
    for &k in &chain.kappa[1..] {
        let z = chain.z.clone();
        let poles: Vec<_> = z.iter().map(|&zl| PoleCondition::Const { slot: 0, value: zl * qi * qi }).collect();
        lambdas.push(
            RationalFunction::univariate(move |t| z.iter().fold(k, |acc, &zl| acc * (t - zl) / (q * t - qi * zl)))
                .with_poles(poles),
        );
    }
    VacuumData { omega, lambdas }
}

/// Worst relative deviation from `T_{ij}(t)Ω = 0` (`i > j`) and `T_{ii}(t)Ω = λ_i(t)Ω`.
pub fn vacuum_residual(chain: &ChainSpec, t: Complex64) -> Result<f64> {
    let vac = vacuum_data(chain);
    let mono = monodromy(chain, t)?;
    let n = chain.n;
    let lam: Vec<Complex64> = vac.lambdas.iter().map(|l| l.at(t)).collect();
    let scale = lam.iter().map(|l| l.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut worst = 0.0_f64;
    for i in 1..=n {
        for j in 1..=i {
            let image = mono.entry(i, j).apply(&vac.omega);
            let expected = if i == j { &vac.omega * lam[i - 1] } else { DVector::zeros(chain.dim()) };
            worst = worst.max((image - expected).norm() / scale);
        }
    }
    Ok(worst)
}
