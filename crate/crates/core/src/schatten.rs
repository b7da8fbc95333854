//! Finite-dimensional `p`-Schatten unitary groups with a weighted trace:
//! the metric `d(u, v) = ||u - v||_p`, the log sandwich, chain certificates
//! for maximality of the metric, the affine isometric action and its
//! cocycle, and positive definite witnesses.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::scalar::{c, creal, Scalar};

/// A diagonal block of the ambient algebra `M_{k_1} + ... + M_{k_r}` with
/// the trace weight it carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceBlock<T> {
    pub size: usize,
    pub weight: T,
}

/// Exponent `p` and the weighted trace `tau = sum_b w_b Tr_b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SchattenContext<T: Scalar> {
    p: T,
    blocks: Vec<TraceBlock<T>>,
}

impl<T: Scalar> SchattenContext<T> {
    /// Uniform trace on `M_dim`.
    pub fn new(dim: usize, p: T) -> Result<Self> {
        Self::with_blocks(
            vec![TraceBlock {
                size: dim,
                weight: T::one(),
            }],
            p,
        )
    }

    pub fn with_blocks(blocks: Vec<TraceBlock<T>>, p: T) -> Result<Self> {
        if !(p >= T::one()) || !p.is_finite() {
            return Err(Error::Precondition(format!("Schatten exponent {} must be finite and >= 1", p.to_f64_lossy())));
        }
        if blocks.is_empty() || blocks.iter().any(|b| b.size == 0 || !(b.weight > T::zero())) {
            return Err(Error::Precondition("trace blocks need positive sizes and weights".into()));
        }
        Ok(Self { p, blocks })
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    pub fn blocks(&self) -> &[TraceBlock<T>] {
        &self.blocks
    }

    fn check_shape(&self, a: &CMatrix<T>) -> Result<()> {
        let d = self.dim();
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::Shape(format!("expected {d}x{d}, got {}x{}", a.nrows(), a.ncols())));
        }
        if self.blocks.len() > 1 {
            let mut off = a.clone();
            let mut start = 0;
            for b in &self.blocks {
                off.view_mut((start, start), (b.size, b.size)).fill(creal(T::zero()));
                start += b.size;
            }
            let scale = T::one() + linalg::frobenius(a);
            if linalg::frobenius(&off) > T::lit(1e-12) * scale {
                return Err(Error::Precondition("matrix is not block diagonal for the trace blocks".into()));
            }
        }
        Ok(())
    }

    fn diagonal_blocks<'a>(&'a self, a: &'a CMatrix<T>) -> impl Iterator<Item = (T, CMatrix<T>)> + 'a {
        let mut start = 0;
        self.blocks.iter().map(move |b| {
            let block = a.view((start, start), (b.size, b.size)).into_owned();
            start += b.size;
            (b.weight, block)
        })
    }

    /// `(sum_b w_b sum_i |x_i|^p)^{1/p}` over per-block values.
    fn combine(&self, values: impl Iterator<Item = (T, Vec<T>)>) -> T {
        let p = self.p;
        let total = values.fold(T::zero(), |acc, (w, xs)| {
            acc + w * xs.into_iter().fold(T::zero(), |s, x| s + x.abs().powf(p))
        });
        total.powf(T::one() / p)
    }
}

/// Weighted Schatten `p`-norm `tau(|a|^p)^{1/p}`.
pub fn p_norm<T: Scalar>(a: &CMatrix<T>, ctx: &SchattenContext<T>) -> Result<T> {
    ctx.check_shape(a)?;
    Ok(ctx.combine(ctx.diagonal_blocks(a).map(|(w, b)| (w, linalg::singular_values(&b)))))
}

/// A unitary `u` with `u - 1` measured in the `p`-norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PUnitary<T: Scalar> {
    context: SchattenContext<T>,
    matrix: CMatrix<T>,
}

pub const UNITARY_TOLERANCE: f64 = 1e-9;

impl<T: Scalar> PUnitary<T> {
    pub fn new(context: SchattenContext<T>, matrix: CMatrix<T>) -> Result<Self> {
        context.check_shape(&matrix)?;
        let d = context.dim();
        let residual = linalg::spectral_norm(&(matrix.adjoint() * &matrix - CMatrix::identity(d, d)));
        if residual > T::lit(UNITARY_TOLERANCE) {
            return Err(Error::NotUnitary {
                residual: residual.to_f64_lossy(),
            });
        }
        Ok(Self { context, matrix })
    }

    pub fn identity(context: &SchattenContext<T>) -> Self {
        let d = context.dim();
        Self {
            context: context.clone(),
            matrix: CMatrix::identity(d, d),
        }
    }

    /// `e^{ia}` for self-adjoint `a`.
    pub fn exp_i(context: &SchattenContext<T>, a: &CMatrix<T>) -> Result<Self> {
        check_self_adjoint(a)?;
        Self::new(context.clone(), exp_i(a))
    }

    pub fn context(&self) -> &SchattenContext<T> {
        &self.context
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn inverse(&self) -> Self {
        Self {
            context: self.context.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            context: self.context.clone(),
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// `d(u, v) = ||u - v||_p`.
    pub fn distance(&self, other: &Self) -> Result<T> {
        p_norm(&(&self.matrix - &other.matrix), &self.context)
    }

    pub fn distance_to_identity(&self) -> Result<T> {
        p_norm(&cocycle(self), &self.context)
    }

    /// Self-adjoint `a` with `u = e^{ia}` and spectrum in `(-pi, pi]`.
    pub fn log(&self) -> Result<CMatrix<T>> {
        let l = linalg::principal_log(&self.matrix, T::lit(UNITARY_TOLERANCE))?;
        let a = l * c(T::zero(), -T::one());
        Ok((&a + a.adjoint()) * creal(T::lit(0.5)))
    }
}

fn check_self_adjoint<T: Scalar>(a: &CMatrix<T>) -> Result<()> {
    let scale = T::one() + linalg::spectral_norm(a);
    if linalg::frobenius(&(a - a.adjoint())) > T::lit(1e-10) * scale {
        return Err(Error::Precondition("matrix is not self-adjoint".into()));
    }
    Ok(())
}

fn exp_i<T: Scalar>(a: &CMatrix<T>) -> CMatrix<T> {
    linalg::hermitian_apply(&((a + a.adjoint()) * creal(T::lit(0.5))), |x| c(x.cos(), x.sin()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich<T> {
    /// `||a||_p / 2`
    pub lhs: T,
    /// `||e^{ia} - 1||_p`
    pub mid: T,
    /// `||a||_p`
    pub rhs: T,
    pub holds: bool,
}

pub const SANDWICH_SLACK: f64 = 1e-9;

/// `||a||_p / 2 <= ||e^{ia} - 1||_p <= ||a||_p` for self-adjoint `a` with
/// spectrum in `[-pi, pi]`, evaluated through the spectrum of each block.
pub fn sandwich_check<T: Scalar>(a: &CMatrix<T>, ctx: &SchattenContext<T>) -> Result<Sandwich<T>> {
    ctx.check_shape(a)?;
    check_self_adjoint(a)?;
    let h = (a + a.adjoint()) * creal(T::lit(0.5));
    let spectra: Vec<(T, Vec<T>)> = ctx
        .diagonal_blocks(&h)
        .map(|(w, b)| (w, linalg::hermitian_eigenvalues(&b)))
        .collect();
    let radius = spectra
        .iter()
        .flat_map(|(_, s)| s.iter().map(|x| x.abs()))
        .fold(T::zero(), |a, b| a.max(b));
    if radius > T::pi() * (T::one() + T::lit(1e-12)) {
        return Err(Error::SpectrumOutOfRange {
            norm: radius.to_f64_lossy(),
        });
    }
    let two = T::lit(2.0);
    let rhs = ctx.combine(spectra.iter().cloned());
    let mid = ctx.combine(
        spectra
            .iter()
            .map(|(w, s)| (*w, s.iter().map(|&x| two * (x / two).sin()).collect())),
    );
    let lhs = rhs / two;
    let slack = T::lit(SANDWICH_SLACK);
    Ok(Sandwich {
        lhs,
        mid,
        rhs,
        holds: lhs <= mid + slack && mid <= rhs + slack,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct Chain<T: Scalar> {
    /// `u_0 = 1, ..., u_k = u`.
    pub points: Vec<PUnitary<T>>,
    /// `d(u_j, u_{j+1})`.
    pub steps: Vec<T>,
}

impl<T: Scalar> Chain<T> {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn total(&self) -> T {
        self.steps.iter().fold(T::zero(), |a, &b| a + b)
    }

    pub fn max_step(&self) -> T {
        self.steps.iter().fold(T::zero(), |a, &b| a.max(b))
    }

    fn along(u: &PUnitary<T>, k: usize) -> Result<Self> {
        let ctx = u.context();
        let mut points = vec![PUnitary::identity(ctx)];
        let mut steps = Vec::with_capacity(k);
        if k > 0 {
            let a = u.log()?;
            for j in 1..=k {
                let next = if j == k {
                    u.clone()
                } else {
                    PUnitary::new(ctx.clone(), exp_i(&(&a * creal(T::lit(j as f64 / k as f64)))))?
                };
                steps.push(points[j - 1].distance(&next)?);
                points.push(next);
            }
        }
        Ok(Self { points, steps })
    }
}

/// Chain from `1` to `u` with every step shorter than `delta`, for
/// `d(u, 1) < big_delta`: `u_j = e^{ija/k}` with
/// `k = floor(max(pi/delta, 2 big_delta/delta)) + 1`, or a single step when
/// already `d(u, 1) < delta`.
pub fn coarse_proper_chain<T: Scalar>(u: &PUnitary<T>, big_delta: T, delta: T) -> Result<Chain<T>> {
    if !(delta > T::zero()) || !(big_delta > T::zero()) {
        return Err(Error::Precondition("radii must be positive".into()));
    }
    let d = u.distance_to_identity()?;
    if d >= big_delta {
        return Err(Error::Precondition(format!(
            "d(u, 1) = {} is not below {}",
            d.to_f64_lossy(),
            big_delta.to_f64_lossy()
        )));
    }
    let k = if d == T::zero() {
        0
    } else if d < delta {
        1
    } else {
        let bound = (T::pi() / delta).max(T::lit(2.0) * big_delta / delta);
        bound.floor().to_f64_lossy() as usize + 1
    };
    let chain = Chain::along(u, k)?;
    if chain.steps.iter().any(|&s| s >= delta) {
        return Err(Error::Numeric("chain step reached delta".into()));
    }
    Ok(chain)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct GeodesicChain<T: Scalar> {
    pub chain: Chain<T>,
    pub distance: T,
    /// The constant `K` both inequalities are checked with.
    pub constant: T,
    /// `max step <= K` and `sum of steps <= K d(u, 1)`.
    pub holds: bool,
}

/// Chain `u_j = e^{ija/n}` with `n = ceil(||a||_p / 2)`, so steps stay below
/// `2` and their sum below `2 d(u, 1)`; one step when `||a||_p <= 1`.
pub fn geodesic_chain<T: Scalar>(u: &PUnitary<T>) -> Result<GeodesicChain<T>> {
    let distance = u.distance_to_identity()?;
    let n = if distance == T::zero() {
        0
    } else {
        let size = p_norm(&u.log()?, u.context())?;
        if size <= T::one() {
            1
        } else {
            (size / T::lit(2.0)).ceil().to_f64_lossy() as usize
        }
    };
    let chain = Chain::along(u, n)?;
    let constant = T::lit(2.0);
    let slack = T::lit(1e-10) * (T::one() + distance);
    let holds = chain.max_step() <= constant + slack && chain.total() <= constant * distance + slack;
    Ok(GeodesicChain {
        chain,
        distance,
        constant,
        holds,
    })
}

/// `u . x = ux + (u - 1)`.
pub fn affine_action<T: Scalar>(u: &PUnitary<T>, x: &CMatrix<T>) -> CMatrix<T> {
    u.matrix() * x + cocycle(u)
}

/// `b(u) = u - 1`.
pub fn cocycle<T: Scalar>(u: &PUnitary<T>) -> CMatrix<T> {
    let d = u.matrix().nrows();
    u.matrix() - CMatrix::identity(d, d)
}

/// `||b(uv) - (u b(v) + b(u))||_p`.
pub fn cocycle_residual<T: Scalar>(u: &PUnitary<T>, v: &PUnitary<T>) -> Result<T> {
    let lhs = cocycle(&u.compose(v));
    let rhs = affine_action(u, &cocycle(v));
    p_norm(&(lhs - rhs), u.context())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HaagerupWitness<T: Scalar> {
    pub n: u32,
    /// `K_{ij} = exp(-||b(g_i^{-1} g_j)||_p^2 / n)`.
    pub gram: DMatrix<T>,
    pub min_eigenvalue: T,
}

/// Gram matrix of `phi_n(g) = exp(-||b(g)||^2 / n)` over the sample and its
/// smallest eigenvalue.
pub fn haagerup_witness<T: Scalar>(gs: &[PUnitary<T>], n: u32) -> Result<HaagerupWitness<T>> {
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    let m = gs.len();
    let scale = T::lit(n as f64);
    let rows: Vec<Vec<T>> = (0..m)
        .into_par_iter()
        .map(|i| {
            (0..m)
                .map(|j| {
                    let d = gs[i].distance(&gs[j])?;
                    Ok((-(d * d) / scale).exp())
                })
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let gram = DMatrix::from_fn(m, m, |i, j| (rows[i][j] + rows[j][i]) / T::lit(2.0));
    let min_eigenvalue = if m == 0 {
        T::zero()
    } else {
        SymmetricEigen::new(gram.clone())
            .eigenvalues
            .iter()
            .fold(T::max_value().unwrap_or(T::one()), |a, &b| a.min(b))
    };
    Ok(HaagerupWitness { n, gram, min_eigenvalue })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport<T> {
    /// `||e^{ia_m} - e^{ia}||_p / ||a_m - a||_p`, zero when both vanish.
    pub ratios: Vec<T>,
    pub max_ratio: T,
    /// `e^C` with `C` the largest operator norm in the family.
    pub bound: T,
    pub holds: bool,
}

/// Lipschitz ratios of `a -> e^{ia}` along a sequence, against the
/// telescoping bound `e^C`.
pub fn exp_p_continuity<T: Scalar>(a: &CMatrix<T>, seq: &[CMatrix<T>], ctx: &SchattenContext<T>) -> Result<ContinuityReport<T>> {
    check_self_adjoint(a)?;
    let ea = exp_i(a);
    let mut sup = linalg::spectral_norm(a);
    let mut ratios = Vec::with_capacity(seq.len());
    for am in seq {
        check_self_adjoint(am)?;
        sup = sup.max(linalg::spectral_norm(am));
        let num = p_norm(&(exp_i(am) - &ea), ctx)?;
        let den = p_norm(&(am - a), ctx)?;
        ratios.push(if den == T::zero() { T::zero() } else { num / den });
    }
    let max_ratio = ratios.iter().fold(T::zero(), |x, &y| x.max(y));
    let bound = sup.exp();
    Ok(ContinuityReport {
        holds: max_ratio <= bound * (T::one() + T::lit(1e-9)),
        ratios,
        max_ratio,
        bound,
    })
}
