use serde::Serialize;

use crate::error::Result;
use crate::linalg;
use crate::matrix::MatrixOverAlgebra;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrotterErrors<T> {
    /// `||(exp(X/n) exp(Y/n))^n - exp(X + Y)||`
    pub product: T,
    /// `||(exp(X/n) exp(Y/n) exp(-X/n) exp(-Y/n))^{n^2} - exp([X, Y])||`
    pub commutator: T,
}

fn power<T: Scalar>(m: &MatrixOverAlgebra<T>, k: u64) -> MatrixOverAlgebra<T> {
    m.map_blocks(|b| linalg::matrix_power(b, k))
}

/// Errors of the Trotter product and commutator formulas at subdivision `n`,
/// in the operator norm.
pub fn trotter_check<T: Scalar>(x: &MatrixOverAlgebra<T>, y: &MatrixOverAlgebra<T>, n: u64) -> Result<TrotterErrors<T>> {
    x.check_compatible(y)?;
    let n = n.max(1);
    let inv_n = T::one() / T::lit(n as f64);
    let ex = x.scale_real(inv_n).exp()?;
    let ey = y.scale_real(inv_n).exp()?;
    let exi = x.scale_real(-inv_n).exp()?;
    let eyi = y.scale_real(-inv_n).exp()?;
    let prod = power(&(&ex * &ey), n);
    let product = (&prod - &(x + y).exp()?).op_norm();
    let comm = power(&(&(&(&ex * &ey) * &exi) * &eyi), n * n);
    let commutator = (&comm - &x.commutator(y).exp()?).op_norm();
    Ok(TrotterErrors { product, commutator })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::matrix::GroupTag;
    use crate::sample;

    #[test]
    fn commuting_pair_is_exact() {
        let mut rng = sample::rng(1);
        let x = sample::lie_element::<f64, _>(&mut rng, &Algebra::Complex, 1, GroupTag::GL, 0.8);
        let y = sample::lie_element::<f64, _>(&mut rng, &Algebra::Complex, 1, GroupTag::GL, 0.5);
        let e = trotter_check(&x, &y, 1).unwrap();
        assert!(e.product <= 1e-9 && e.commutator <= 1e-9);
        let e = trotter_check(&x, &x, 7).unwrap();
        assert!(e.commutator <= 1e-9);
    }

    #[test]
    fn first_order_convergence() {
        let mut rng = sample::rng(2);
        let x = sample::lie_element::<f64, _>(&mut rng, &Algebra::Complex, 3, GroupTag::GL, 1.0);
        let y = sample::lie_element::<f64, _>(&mut rng, &Algebra::Complex, 3, GroupTag::GL, 1.0);
        let a = trotter_check(&x, &y, 64).unwrap();
        let b = trotter_check(&x, &y, 128).unwrap();
        let ratio = a.product / b.product;
        assert!((1.5..=3.0).contains(&ratio), "{ratio}");
        let ratio = a.commutator / b.commutator;
        assert!((1.5..=3.0).contains(&ratio), "{ratio}");
    }
}
