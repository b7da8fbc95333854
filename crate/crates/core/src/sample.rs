//! Seeded random generators for matrices, unitaries and Lie algebra elements.

use nalgebra::{Complex, ComplexField};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::Algebra;
use crate::linalg::CMatrix;
use crate::matrix::{GroupElement, GroupTag, MatrixOverAlgebra};
use crate::scalar::{c, creal, Scalar};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> SeededRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn normal<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

pub fn uniform<T: Scalar, R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> T {
    T::lit(rng.random_range(lo..hi))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix<T> {
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    CMatrix::from_fn(n, n, |_, _| c(normal::<T, _>(rng) * s, normal::<T, _>(rng) * s))
}

/// Haar-distributed unitary via QR with the phase correction.
pub fn haar_unitary<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix<T> {
    let qr = gaussian::<T, R>(rng, n).qr();
    let (q, r) = qr.unpack();
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.modulus() > T::zero() { d / creal(d.modulus()) } else { creal(T::one()) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Hermitian matrix `V diag(spectrum) V*` with Haar `V`.
pub fn hermitian_with_spectrum<T: Scalar, R: Rng + ?Sized>(rng: &mut R, spectrum: &[T]) -> CMatrix<T> {
    let n = spectrum.len();
    let v = haar_unitary::<T, R>(rng, n);
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, spectrum.iter().map(|&x| creal(x))));
    let h = &v * d * v.adjoint();
    (&h + h.adjoint()) * creal(T::lit(0.5))
}

/// Hermitian matrix with eigenvalues uniform in `[-radius, radius]`.
pub fn hermitian<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> CMatrix<T> {
    let spectrum: Vec<T> = (0..n).map(|_| uniform(rng, -radius, radius)).collect();
    hermitian_with_spectrum(rng, &spectrum)
}

/// Random element of `M_n(A)` with i.i.d. Gaussian entries in every block.
pub fn matrix<T: Scalar, R: Rng + ?Sized>(rng: &mut R, algebra: &Algebra, n: usize) -> MatrixOverAlgebra<T> {
    let m = n * algebra.block_size();
    let blocks = (0..algebra.block_count()).map(|_| gaussian(rng, m)).collect();
    MatrixOverAlgebra::from_blocks(algebra.clone(), n, blocks).expect("block shapes")
}

/// Random element of the Lie algebra of `tag`, rescaled to norm `radius`
/// in the l1 operator norm.
pub fn lie_element<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    algebra: &Algebra,
    n: usize,
    tag: GroupTag,
    radius: T,
) -> MatrixOverAlgebra<T> {
    let x = tag.project(&matrix(rng, algebra, n));
    let norm = x.op_norm();
    if norm == T::zero() {
        return x;
    }
    x.scale_real(radius / norm)
}

/// Haar unitary in `U(n)` over `C`.
pub fn unitary<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> GroupElement<T> {
    let m = MatrixOverAlgebra::from_complex(&Algebra::Complex, haar_unitary(rng, n)).expect("square");
    GroupElement::new_unchecked(m, GroupTag::U)
}

/// Random element of `GL(n, C)_0` of the form `exp(X1) exp(X2)`.
pub fn gl_element<T: Scalar, R: Rng + ?Sized>(rng: &mut R, algebra: &Algebra, n: usize, radius: T) -> GroupElement<T> {
    let x1 = lie_element(rng, algebra, n, GroupTag::GL, radius);
    let x2 = lie_element(rng, algebra, n, GroupTag::GL, radius);
    let g = &x1.exp().expect("finite") * &x2.exp().expect("finite");
    GroupElement::new_unchecked(g, GroupTag::GL)
}

/// Positive diagonal `diag(d, d^{-1})` over a commutative algebra with
/// `log d` uniform in `[-radius, radius]` on every block.
pub fn positive_diagonal<T: Scalar, R: Rng + ?Sized>(rng: &mut R, algebra: &Algebra, radius: f64) -> GroupElement<T> {
    let blocks = (0..algebra.block_count())
        .map(|_| {
            let t: T = uniform(rng, -radius, radius);
            let mut b = CMatrix::zeros(2, 2);
            b[(0, 0)] = creal(t.exp());
            b[(1, 1)] = creal((-t).exp());
            b
        })
        .collect();
    let m = MatrixOverAlgebra::from_blocks(algebra.clone(), 2, blocks).expect("2x2 scalar blocks");
    GroupElement::new_unchecked(m, GroupTag::SL)
}

pub fn complex_uniform_disc<T: Scalar, R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Complex<T> {
    let r: f64 = radius * rng.random::<f64>().sqrt();
    let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    c(T::lit(r * t.cos()), T::lit(r * t.sin()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut r = rng(3);
        for n in [1, 2, 5, 8] {
            let u = haar_unitary::<f64, _>(&mut r, n);
            assert!(crate::linalg::is_unitary(&u, 1e-12));
        }
    }

    #[test]
    fn hermitian_spectrum_respected() {
        let mut r = rng(9);
        let h = hermitian_with_spectrum::<f64, _>(&mut r, &[-3.0, 0.5, 2.0]);
        let ev = crate::linalg::hermitian_eigenvalues(&h);
        for (a, b) in ev.iter().zip([-3.0, 0.5, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let a: f64 = normal(&mut rng_stream(5, 2));
        let b: f64 = normal(&mut rng_stream(5, 2));
        let d: f64 = normal(&mut rng_stream(5, 3));
        assert_eq!(a, b);
        assert_ne!(a, d);
    }
}
