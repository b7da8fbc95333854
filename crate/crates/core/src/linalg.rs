//! Dense complex matrix kernels: principal logarithm, square roots, norms.
//!
//! The logarithm follows two routes. Normal matrices (including every
//! unitary) are logged through their Schur form, which is diagonal up to
//! rounding. Everything else goes through inverse scaling and squaring on the
//! triangular Schur factor, which tolerates defective inputs such as
//! unipotent elementary matrices.

use nalgebra::{Complex, ComplexField, DMatrix, Schur, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{creal, Scalar};

pub type CMatrix<T> = DMatrix<Complex<T>>;

const MAX_SQRT_STEPS: usize = 64;
const MAX_SERIES_TERMS: usize = 200;

pub fn spectral_norm<T: Scalar>(m: &CMatrix<T>) -> T {
    if m.nrows() == 0 {
        return T::zero();
    }
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].modulus();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(T::zero(), |a, b| a.max(b))
}

pub fn singular_values<T: Scalar>(m: &CMatrix<T>) -> Vec<T> {
    if m.nrows() == 1 && m.ncols() == 1 {
        return vec![m[(0, 0)].modulus()];
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Max absolute column sum of a plain complex matrix.
pub fn l1_operator_norm<T: Scalar>(m: &CMatrix<T>) -> T {
    (0..m.ncols())
        .map(|j| m.column(j).iter().fold(T::zero(), |s, z| s + z.modulus()))
        .fold(T::zero(), |a, b| a.max(b))
}

pub fn frobenius<T: Scalar>(m: &CMatrix<T>) -> T {
    m.iter()
        .fold(T::zero(), |s, z| s + z.modulus_squared())
        .sqrt()
}

pub fn is_unitary<T: Scalar>(m: &CMatrix<T>, tol: T) -> bool {
    let n = m.nrows();
    let id = CMatrix::<T>::identity(n, n);
    spectral_norm(&(m.adjoint() * m - id)) <= tol
}

pub fn is_normal<T: Scalar>(m: &CMatrix<T>, tol: T) -> bool {
    let scale = spectral_norm(m).max(T::one());
    let comm = m * m.adjoint() - m.adjoint() * m;
    l1_operator_norm(&comm) <= tol * scale * scale
}

/// Principal branch scalar logarithm with argument in `(-pi, pi]`.
///
/// Values within `tie_tol` (relative) of the negative real axis get argument `+pi`.
pub fn principal_ln<T: Scalar>(z: Complex<T>, tie_tol: T) -> Complex<T> {
    let r = z.modulus();
    let mut arg = z.im.atan2(z.re);
    if z.re < T::zero() && z.im.abs() <= tie_tol * r {
        arg = T::pi();
    }
    Complex::new(r.ln(), arg)
}

fn on_cut<T: Scalar>(z: Complex<T>, tol: T) -> bool {
    z.re <= T::zero() && z.im.abs() <= tol * z.modulus().max(T::one())
}

/// Principal logarithm of an invertible matrix.
///
/// `tol` is used both to recognise normal/unitary inputs and as the guard
/// band around the branch cut.
pub fn principal_log<T: Scalar>(m: &CMatrix<T>, tol: T) -> Result<CMatrix<T>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Shape(format!("log of a {}x{} matrix", n, m.ncols())));
    }
    if n == 0 {
        return Ok(m.clone());
    }
    if n == 1 {
        let z = m[(0, 0)];
        if z.modulus() == T::zero() {
            return Err(Error::NotInvertible { residual: 1.0 });
        }
        let unit = (z.modulus() - T::one()).abs() <= tol;
        if !unit && on_cut(z, tol) {
            return Err(Error::SpectrumOnCut {
                re: z.re.to_f64_lossy(),
                im: z.im.to_f64_lossy(),
            });
        }
        return Ok(CMatrix::from_element(1, 1, principal_ln(z, tol)));
    }
    if is_normal(m, tol) {
        return normal_log(m, tol);
    }
    schur_log(m, tol)
}

fn normal_log<T: Scalar>(m: &CMatrix<T>, tol: T) -> Result<CMatrix<T>> {
    let (q, t) = Schur::new(m.clone()).unpack();
    let n = m.nrows();
    let mut d = CMatrix::<T>::zeros(n, n);
    for i in 0..n {
        let z = t[(i, i)];
        if z.modulus() <= tol {
            return Err(Error::NotInvertible {
                residual: z.modulus().to_f64_lossy(),
            });
        }
        let unit = (z.modulus() - T::one()).abs() <= tol;
        if !unit && on_cut(z, tol) {
            return Err(Error::SpectrumOnCut {
                re: z.re.to_f64_lossy(),
                im: z.im.to_f64_lossy(),
            });
        }
        d[(i, i)] = principal_ln(z, tol);
    }
    Ok(&q * d * q.adjoint())
}

fn schur_log<T: Scalar>(m: &CMatrix<T>, tol: T) -> Result<CMatrix<T>> {
    let n = m.nrows();
    let (q, mut t) = Schur::new(m.clone()).unpack();
    for i in 0..n {
        let z = t[(i, i)];
        if z.modulus() <= tol {
            return Err(Error::NotInvertible {
                residual: z.modulus().to_f64_lossy(),
            });
        }
        if on_cut(z, tol) {
            return Err(Error::SpectrumOnCut {
                re: z.re.to_f64_lossy(),
                im: z.im.to_f64_lossy(),
            });
        }
    }
    let id = CMatrix::<T>::identity(n, n);
    let threshold = T::lit(0.1);
    let mut steps = 0;
    while l1_operator_norm(&(&t - &id)) > threshold {
        if steps == MAX_SQRT_STEPS {
            return Err(Error::NonConvergence {
                what: "inverse scaling and squaring",
                iterations: steps,
            });
        }
        t = triangular_sqrt(&t)?;
        steps += 1;
    }
    let mut l = log_series(&(&t - &id))?;
    let scale = T::lit(2f64.powi(steps as i32));
    l *= creal(scale);
    Ok(&q * l * q.adjoint())
}

/// Principal square root of an upper triangular matrix.
pub fn triangular_sqrt<T: Scalar>(t: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = t.nrows();
    let mut r = CMatrix::<T>::zeros(n, n);
    for i in 0..n {
        r[(i, i)] = t[(i, i)].sqrt();
    }
    for d in 1..n {
        for i in 0..n - d {
            let j = i + d;
            let mut s = t[(i, j)];
            for k in i + 1..j {
                s -= r[(i, k)] * r[(k, j)];
            }
            let denom = r[(i, i)] + r[(j, j)];
            if denom.modulus() == T::zero() {
                return Err(Error::Numeric("singular triangular square root".into()));
            }
            r[(i, j)] = s / denom;
        }
    }
    Ok(r)
}

/// `log(I + x)` by its Taylor series; `x` must be small in norm.
fn log_series<T: Scalar>(x: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = x.nrows();
    let eps = T::default_epsilon();
    let mut acc = CMatrix::<T>::zeros(n, n);
    let mut power = x.clone();
    for k in 1..=MAX_SERIES_TERMS {
        let coeff = T::one() / T::from_usize_lossy(k);
        let term = &power * creal(if k % 2 == 1 { coeff } else { -coeff });
        let size = l1_operator_norm(&term);
        acc += term;
        if size <= eps * l1_operator_norm(&acc).max(eps) {
            return Ok(acc);
        }
        power = &power * x;
    }
    Err(Error::NonConvergence {
        what: "logarithm series",
        iterations: MAX_SERIES_TERMS,
    })
}

/// Applies a real function to a Hermitian matrix through its eigenbasis.
pub fn hermitian_apply<T: Scalar>(
    h: &CMatrix<T>,
    f: impl Fn(T) -> Complex<T>,
) -> CMatrix<T> {
    let eig = SymmetricEigen::new(h.clone());
    let n = h.nrows();
    let mut d = CMatrix::<T>::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = f(eig.eigenvalues[i]);
    }
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues<T: Scalar>(h: &CMatrix<T>) -> Vec<T> {
    let mut v: Vec<T> = SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// Matrix exponential by Pade scaling and squaring, with a finiteness check.
pub fn expm<T: Scalar>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    let e = m.clone().exp();
    if e.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(e)
    } else {
        Err(Error::NonConvergence {
            what: "matrix exponential",
            iterations: 0,
        })
    }
}

/// Integer power by repeated squaring.
pub fn matrix_power<T: Scalar>(m: &CMatrix<T>, mut k: u64) -> CMatrix<T> {
    let n = m.nrows();
    let mut result = CMatrix::<T>::identity(n, n);
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn max_abs(m: &CMatrix<f64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn log_of_unipotent_is_nilpotent() {
        let g = CMatrix::<f64>::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(5.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        );
        let l = principal_log(&g, 1e-9).unwrap();
        let expected = CMatrix::<f64>::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(5.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        );
        assert!(max_abs(&(l - expected)) < 1e-10);
    }

    #[test]
    fn minus_one_takes_plus_pi() {
        let g = -CMatrix::<f64>::identity(2, 2);
        let l = principal_log(&g, 1e-9).unwrap();
        assert!((l[(0, 0)].im - std::f64::consts::PI).abs() < 1e-12);
        assert!((l[(1, 1)].im - std::f64::consts::PI).abs() < 1e-12);
        let z = principal_ln(c(-1.0, -1e-14), 1e-9);
        assert!((z.im - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn cut_rejected_for_non_unitary() {
        let g = CMatrix::<f64>::from_row_slice(
            2,
            2,
            &[c(-2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)],
        );
        assert!(matches!(
            principal_log(&g, 1e-9),
            Err(Error::SpectrumOnCut { .. })
        ));
    }

    #[test]
    fn exp_log_round_trip_general() {
        let x = CMatrix::<f64>::from_row_slice(
            3,
            3,
            &[
                c(0.3, 0.1),
                c(-0.7, 0.2),
                c(0.5, 0.0),
                c(0.1, -0.4),
                c(0.2, 0.9),
                c(-0.3, 0.3),
                c(0.6, 0.0),
                c(0.0, 0.2),
                c(-0.5, -0.6),
            ],
        );
        let g = expm(&x).unwrap();
        let l = principal_log(&g, 1e-9).unwrap();
        assert!(max_abs(&(l - x)) < 1e-10);
    }

    #[test]
    fn power_matches_repeated_product() {
        let m = CMatrix::<f64>::from_row_slice(
            2,
            2,
            &[c(0.9, 0.1), c(0.2, 0.0), c(-0.1, 0.0), c(1.0, -0.05)],
        );
        let mut direct = CMatrix::<f64>::identity(2, 2);
        for _ in 0..13 {
            direct = &direct * &m;
        }
        assert!(max_abs(&(matrix_power(&m, 13) - direct)) < 1e-12);
    }
}
