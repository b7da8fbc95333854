use serde::Serialize;

use crate::error::Result;
use crate::matrix::{mat_exp, GroupElement, LieNorm, MatrixOverAlgebra};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalityReport<T: Scalar> {
    /// Smallest `K` with `||X|| <= K l(exp X)` on the sample.
    pub k: T,
    /// Index of the sample attaining `K`.
    pub witness: Option<usize>,
    /// Samples with `l(exp X) > ||X||` beyond rounding.
    pub violations: usize,
    pub samples: usize,
}

/// Compares `||X||` with a length function `l` on `exp X` for samples `X`
/// from a small ball in the Lie algebra.
pub fn minimality_check<T: Scalar, F>(samples: &[MatrixOverAlgebra<T>], norm: LieNorm, mut length: F) -> Result<MinimalityReport<T>>
where
    F: FnMut(&GroupElement<T>) -> Result<T>,
{
    let mut k = T::one();
    let mut witness = None;
    let mut violations = 0;
    for (idx, x) in samples.iter().enumerate() {
        let size = x.norm(norm);
        let l = length(&mat_exp(x)?)?;
        if l > size + T::lit(1e-9) * (T::one() + size) {
            violations += 1;
        }
        if l > T::zero() {
            let ratio = size / l;
            if ratio > k {
                k = ratio;
                witness = Some(idx);
            }
        } else if size > T::lit(1e-12) {
            k = T::max_value().unwrap_or(k);
            witness = Some(idx);
        }
    }
    Ok(MinimalityReport {
        k,
        witness,
        violations,
        samples: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::explength::{el_estimate, el_exact_unitary, EstimateOptions};
    use crate::matrix::GroupTag;
    use crate::sample;

    #[test]
    fn unitary_ball_is_isometric() {
        let mut rng = sample::rng(4);
        let xs: Vec<_> = (0..50)
            .map(|_| sample::lie_element::<f64, _>(&mut rng, &Algebra::Complex, 2, GroupTag::U, 0.1))
            .collect();
        let r = minimality_check(&xs, LieNorm::Spectral, |g| el_exact_unitary(&g.clone().retag(GroupTag::U)?)).unwrap();
        assert!(r.k <= 1.0 + 1e-6);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn real_scalars_have_k_one() {
        let mut rng = sample::rng(5);
        let xs: Vec<_> = (0..20)
            .map(|_| sample::lie_element::<f64, _>(&mut rng, &Algebra::Real, 1, GroupTag::GL, 0.3))
            .collect();
        let r = minimality_check(&xs, LieNorm::OperatorL1, |g| {
            Ok(g.matrix().entry(0, 0).samples()[0].re.ln().abs())
        })
        .unwrap();
        assert!((r.k - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gl2_reports_finite_k() {
        let mut rng = sample::rng(6);
        let xs: Vec<_> = (0..10)
            .map(|_| sample::lie_element::<f64, _>(&mut rng, &Algebra::Complex, 2, GroupTag::GL, 0.5))
            .collect();
        let r = minimality_check(&xs, LieNorm::OperatorL1, |g| Ok(el_estimate(g, &EstimateOptions::default())?.upper))
            .unwrap();
        assert!(r.k.is_finite() && r.k >= 1.0);
        assert_eq!(r.violations, 0);
    }
}
