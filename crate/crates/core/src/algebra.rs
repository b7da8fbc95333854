//! Finite-dimensional unital Banach algebras and their elements.
//!
//! Every algebra is realised as a direct sum of full complex matrix algebras:
//!
//! * `Complex` / `Real`: one `1x1` block,
//! * `Matrix { k }`: one `k x k` block carrying the operator norm,
//! * `Functions(space)`: one `1x1` block per vertex, with the sup norm.
//!
//! Elements are stored block by block, which keeps products, exponentials
//! and logarithms pointwise for function algebras.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{Complex, ComplexField};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, CMatrix};
use crate::scalar::{creal, Scalar};
use crate::space::DiscretizedSpace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Algebra {
    Complex,
    Real,
    Matrix { k: usize },
    Functions(Arc<DiscretizedSpace>),
}

impl Algebra {
    pub fn functions(space: DiscretizedSpace) -> Self {
        Algebra::Functions(Arc::new(space))
    }

    /// Number of direct summands in the block realisation.
    pub fn block_count(&self) -> usize {
        match self {
            Algebra::Functions(s) => s.vertices(),
            _ => 1,
        }
    }

    /// Side length of each summand.
    pub fn block_size(&self) -> usize {
        match self {
            Algebra::Matrix { k } => *k,
            _ => 1,
        }
    }

    pub fn is_commutative(&self) -> bool {
        !matches!(self, Algebra::Matrix { k } if *k > 1)
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Algebra::Real)
    }

    pub fn space(&self) -> Option<&DiscretizedSpace> {
        match self {
            Algebra::Functions(s) => Some(s),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Algebra::Complex => "C".into(),
            Algebra::Real => "R".into(),
            Algebra::Matrix { k } => format!("M_{k}(C)"),
            Algebra::Functions(s) => format!("C(X), |X| = {}", s.vertices()),
        }
    }

    pub(crate) fn check_same(&self, other: &Algebra) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch(format!(
                "{} vs {}",
                self.name(),
                other.name()
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement<T: Scalar> {
    algebra: Algebra,
    blocks: Vec<CMatrix<T>>,
}

impl<T: Scalar> AlgebraElement<T> {
    pub fn from_blocks(algebra: Algebra, blocks: Vec<CMatrix<T>>) -> Result<Self> {
        let (count, size) = (algebra.block_count(), algebra.block_size());
        if blocks.len() != count || blocks.iter().any(|b| b.shape() != (size, size)) {
            return Err(Error::Shape(format!(
                "{} expects {count} block(s) of size {size}",
                algebra.name()
            )));
        }
        let mut e = Self { algebra, blocks };
        e.enforce_real();
        Ok(e)
    }

    pub fn zero(algebra: &Algebra) -> Self {
        let size = algebra.block_size();
        Self {
            blocks: vec![CMatrix::zeros(size, size); algebra.block_count()],
            algebra: algebra.clone(),
        }
    }

    pub fn one(algebra: &Algebra) -> Self {
        Self::scalar(algebra, creal(T::one()))
    }

    /// `z * 1`.
    pub fn scalar(algebra: &Algebra, z: Complex<T>) -> Self {
        let size = algebra.block_size();
        let mut e = Self {
            blocks: vec![CMatrix::identity(size, size) * z; algebra.block_count()],
            algebra: algebra.clone(),
        };
        e.enforce_real();
        e
    }

    /// Function-algebra element from per-vertex samples.
    pub fn from_samples(algebra: &Algebra, samples: &[Complex<T>]) -> Result<Self> {
        if !matches!(algebra, Algebra::Functions(_)) || samples.len() != algebra.block_count() {
            return Err(Error::Shape(format!(
                "{} samples do not fit {}",
                samples.len(),
                algebra.name()
            )));
        }
        Ok(Self {
            algebra: algebra.clone(),
            blocks: samples.iter().map(|&z| CMatrix::from_element(1, 1, z)).collect(),
        })
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[CMatrix<T>] {
        &self.blocks
    }

    /// Per-vertex (or single) scalar value; only meaningful for `1x1` blocks.
    pub fn samples(&self) -> Vec<Complex<T>> {
        self.blocks.iter().map(|b| b[(0, 0)]).collect()
    }

    /// The algebra norm: operator norm on matrix blocks, sup over vertices.
    pub fn norm(&self) -> T {
        self.blocks
            .iter()
            .map(spectral_norm)
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn scale(&self, z: Complex<T>) -> Self {
        let mut e = Self {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().map(|b| b * z).collect(),
        };
        e.enforce_real();
        e
    }

    pub fn adjoint(&self) -> Self {
        Self {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    /// `ab - ba`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Inverse, if every block is invertible.
    pub fn inverse(&self) -> Option<Self> {
        let blocks: Option<Vec<_>> = self.blocks.iter().map(|b| b.clone().try_inverse()).collect();
        blocks.map(|blocks| Self {
            algebra: self.algebra.clone(),
            blocks,
        })
    }

    /// Smallest singular value over all blocks: zero iff not invertible.
    pub fn invertibility_margin(&self) -> T {
        self.blocks
            .iter()
            .map(|b| {
                crate::linalg::singular_values(b)
                    .into_iter()
                    .fold(T::max_value().unwrap_or(T::one()), |a, s| a.min(s))
            })
            .fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b))
    }

    pub fn is_approx_zero(&self, tol: T) -> bool {
        self.norm() <= tol
    }

    /// Membership in the closed span of commutators `[A, A]`: zero for
    /// commutative algebras, trace zero for matrix algebras.
    pub fn in_commutator_span(&self, tol: T) -> bool {
        if self.algebra.is_commutative() {
            self.is_approx_zero(tol)
        } else {
            self.blocks.iter().all(|b| b.trace().modulus() <= tol)
        }
    }

    fn enforce_real(&mut self) {
        if self.algebra.is_real() {
            for b in &mut self.blocks {
                b.apply(|z| z.im = T::zero());
            }
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&CMatrix<T>, &CMatrix<T>) -> CMatrix<T>) -> Self {
        assert_eq!(self.algebra, other.algebra, "algebra mismatch");
        Self {
            algebra: self.algebra.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }
}

impl<T: Scalar> Add for &AlgebraElement<T> {
    type Output = AlgebraElement<T>;
    fn add(self, rhs: Self) -> AlgebraElement<T> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<T: Scalar> Sub for &AlgebraElement<T> {
    type Output = AlgebraElement<T>;
    fn sub(self, rhs: Self) -> AlgebraElement<T> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<T: Scalar> Mul for &AlgebraElement<T> {
    type Output = AlgebraElement<T>;
    fn mul(self, rhs: Self) -> AlgebraElement<T> {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl<T: Scalar> Neg for &AlgebraElement<T> {
    type Output = AlgebraElement<T>;
    fn neg(self) -> AlgebraElement<T> {
        AlgebraElement {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().map(|b| -b).collect(),
        }
    }
}
