use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{GroupElement, LieNorm, MatrixOverAlgebra};
use crate::scalar::Scalar;

/// Factors `X_1, ..., X_k` with `exp(X_1) ... exp(X_k)` close to `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationCertificate<T: Scalar> {
    factors: Vec<MatrixOverAlgebra<T>>,
    target: GroupElement<T>,
    norm: LieNorm,
    residual: T,
    sum_of_norms: T,
    norm_of_sum: T,
}

impl<T: Scalar> FactorizationCertificate<T> {
    /// Builds the certificate and measures its residual in the operator norm.
    pub fn new(factors: Vec<MatrixOverAlgebra<T>>, target: GroupElement<T>, norm: LieNorm) -> Result<Self> {
        let alg = target.algebra().clone();
        let n = target.n();
        let mut prod = MatrixOverAlgebra::identity(&alg, n);
        let mut sum = MatrixOverAlgebra::zeros(&alg, n);
        let mut sum_of_norms = T::zero();
        for x in &factors {
            alg.check_same(x.algebra())?;
            if x.n() != n {
                return Err(Error::Shape(format!("factor of size {} for a target of size {n}", x.n())));
            }
            prod = &prod * &x.exp()?;
            sum = &sum + x;
            sum_of_norms += x.norm(norm);
        }
        let residual = (&prod - target.matrix()).op_norm();
        Ok(Self {
            norm_of_sum: sum.norm(norm),
            factors,
            target,
            norm,
            residual,
            sum_of_norms,
        })
    }

    pub fn factors(&self) -> &[MatrixOverAlgebra<T>] {
        &self.factors
    }

    pub fn target(&self) -> &GroupElement<T> {
        &self.target
    }

    pub fn norm(&self) -> LieNorm {
        self.norm
    }

    pub fn residual(&self) -> T {
        self.residual
    }

    pub fn sum_of_norms(&self) -> T {
        self.sum_of_norms
    }

    pub fn norm_of_sum(&self) -> T {
        self.norm_of_sum
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Same factors measured in another norm.
    pub fn renormed(&self, norm: LieNorm) -> Result<Self> {
        Self::new(self.factors.clone(), self.target.clone(), norm)
    }

    /// `g^{-1} = exp(-X_k) ... exp(-X_1)`.
    pub fn inverse(&self) -> Result<Self> {
        let factors = self.factors.iter().rev().map(|x| -x).collect();
        Self::new(factors, self.target.inverse(), self.norm)
    }

    /// Certificate for `g h` from certificates for `g` and `h`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let factors = self.factors.iter().chain(&other.factors).cloned().collect();
        Self::new(factors, self.target.compose(&other.target), self.norm)
    }

    /// Checks the residual against `tol` and the triangle inequality.
    pub fn verify(&self, tol: T) -> Result<()> {
        if self.residual > tol {
            return Err(Error::Numeric(format!(
                "certificate residual {} exceeds {}",
                self.residual.to_f64_lossy(),
                tol.to_f64_lossy()
            )));
        }
        let slack = T::lit(1e-12) * (T::one() + self.sum_of_norms);
        if self.norm_of_sum > self.sum_of_norms + slack {
            return Err(Error::Numeric("norm of sum exceeds sum of norms".into()));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct CertificateRepr<T: Scalar> {
    norm: LieNorm,
    factors: Vec<MatrixOverAlgebra<T>>,
    target: GroupElement<T>,
    residual: f64,
    sum_of_norms: f64,
    norm_of_sum: f64,
}

impl<T: Scalar> Serialize for FactorizationCertificate<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CertificateRepr {
            norm: self.norm,
            factors: self.factors.clone(),
            target: self.target.clone(),
            residual: self.residual.to_f64_lossy(),
            sum_of_norms: self.sum_of_norms.to_f64_lossy(),
            norm_of_sum: self.norm_of_sum.to_f64_lossy(),
        }
        .serialize(s)
    }
}

/// Derived fields are recomputed from the factors on load.
impl<'de, T: Scalar> Deserialize<'de> for FactorizationCertificate<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = CertificateRepr::<T>::deserialize(d)?;
        Self::new(r.factors, r.target, r.norm).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LowerMethod {
    LogOpNorm,
    ClosedForm,
}

/// `lower <= el(g) <= upper`, with the certificate that realises `upper`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElBracket<T: Scalar> {
    pub lower: T,
    pub upper: T,
    pub certificate: FactorizationCertificate<T>,
    pub lower_method: LowerMethod,
}

impl<T: Scalar> ElBracket<T> {
    /// A lower bound that exceeds the upper one by rounding only is clamped;
    /// a larger gap means one of the two is wrong.
    pub fn new(lower: T, certificate: FactorizationCertificate<T>, lower_method: LowerMethod) -> Result<Self> {
        let upper = certificate.sum_of_norms();
        let slack = T::lit(1e-9) * (T::one() + upper) + certificate.residual();
        if lower > upper + slack {
            return Err(Error::Numeric(format!(
                "lower bound {} exceeds upper bound {}",
                lower.to_f64_lossy(),
                upper.to_f64_lossy()
            )));
        }
        Ok(Self {
            lower: lower.min(upper),
            upper,
            certificate,
            lower_method,
        })
    }

    pub fn gap(&self) -> T {
        self.upper - self.lower
    }
}
