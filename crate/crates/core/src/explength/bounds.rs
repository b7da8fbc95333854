use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::matrix::{mat_log, GroupElement, LieNorm};
use crate::scalar::Scalar;

/// `max(0, log ||g||, log ||g^{-1}||)` in the submultiplicative norm `norm`.
///
/// Sound because `||exp X_1 ... exp X_k|| <= e^{||X_1|| + ... + ||X_k||}`.
pub fn el_lower_bound<T: Scalar>(g: &GroupElement<T>, norm: LieNorm) -> T {
    let inv = g.inverse();
    let a = g.matrix().norm(norm).ln();
    let b = inv.matrix().norm(norm).ln();
    T::zero().max(a).max(b)
}

/// `||log u||` in the C*-norm, principal branch, pointwise over vertices for
/// function algebras.
pub fn el_exact_unitary<T: Scalar>(u: &GroupElement<T>) -> Result<T> {
    if u.algebra().is_real() {
        return Err(Error::Precondition("closed form needs a complex algebra".into()));
    }
    if matches!(u.algebra(), Algebra::Matrix { .. }) {
        return Err(Error::Precondition("closed form needs a scalar or commutative algebra".into()));
    }
    let unitary = if u.tag().is_unitary() {
        u.clone()
    } else {
        u.clone().retag(crate::matrix::GroupTag::U)?
    };
    Ok(mat_log(&unitary)?.norm(LieNorm::Spectral))
}

/// `||log a|| = sup |log d|` for `a = diag(d, d^{-1})` with `d > 0` over a
/// commutative algebra.
pub fn el_exact_positive_diagonal<T: Scalar>(a: &GroupElement<T>) -> Result<T> {
    if !a.algebra().is_commutative() {
        return Err(Error::Precondition("closed form needs a commutative algebra".into()));
    }
    if a.n() != 2 {
        return Err(Error::Shape("expected a 2x2 diagonal".into()));
    }
    let m = a.matrix();
    let scale = T::one() + m.op_norm();
    let tol = T::lit(1e-12) * scale;
    if m.entry(0, 1).norm() > tol || m.entry(1, 0).norm() > tol {
        return Err(Error::Precondition("expected a diagonal matrix".into()));
    }
    let d = m.entry(0, 0).samples();
    let e = m.entry(1, 1).samples();
    let mut sup = T::zero();
    for (x, y) in d.iter().zip(&e) {
        if x.re <= T::zero() || x.im.abs() > tol {
            return Err(Error::Precondition(format!(
                "diagonal entry {} is not positive",
                x.re.to_f64_lossy()
            )));
        }
        if (*x * *y - nalgebra::Complex::new(T::one(), T::zero())).norm_sqr().sqrt() > T::lit(1e-9) * scale {
            return Err(Error::Precondition("entries are not mutually inverse".into()));
        }
        sup = sup.max(x.re.ln().abs());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::matrix::{GroupTag, MatrixOverAlgebra};
    use crate::scalar::c;
    use crate::space::DiscretizedSpace;
    use nalgebra::Complex;
    use std::f64::consts::{E, FRAC_PI_2, PI};

    fn diag(alg: &Algebra, tag: GroupTag, entries: &[Complex<f64>]) -> GroupElement<f64> {
        let n = entries.len();
        let m = MatrixOverAlgebra::from_complex(alg, CMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(entries)))
            .unwrap();
        assert_eq!(m.n(), n);
        GroupElement::new(m, tag).unwrap()
    }

    #[test]
    fn unitary_examples() {
        let alg = Algebra::Complex;
        assert_eq!(el_exact_unitary(&GroupElement::<f64>::identity(&alg, 2, GroupTag::U)).unwrap(), 0.0);
        let minus = diag(&alg, GroupTag::U, &[c(-1., 0.), c(-1., 0.)]);
        assert!((el_exact_unitary(&minus).unwrap() - PI).abs() < 1e-12);
        let quarter = diag(&alg, GroupTag::U, &[c(0., 1.), c(1., 0.)]);
        assert!((el_exact_unitary(&quarter).unwrap() - FRAC_PI_2).abs() < 1e-12);
        let real = GroupElement::<f64>::identity(&Algebra::Real, 2, GroupTag::U);
        assert!(el_exact_unitary(&real).is_err());
    }

    #[test]
    fn positive_diagonal_examples() {
        let alg = Algebra::Complex;
        let a = diag(&alg, GroupTag::SL, &[c(E * E, 0.), c(1. / (E * E), 0.)]);
        assert!((el_exact_positive_diagonal(&a).unwrap() - 2.0).abs() < 1e-12);
        assert!((el_lower_bound(&a, LieNorm::OperatorL1) - 2.0).abs() < 1e-12);

        let two = Algebra::functions(DiscretizedSpace::discrete(2).unwrap());
        let blocks = vec![
            CMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[c(2., 0.), c(0.5, 0.)])),
            CMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[c(3., 0.), c(1. / 3., 0.)])),
        ];
        let g = GroupElement::new(MatrixOverAlgebra::from_blocks(two, 2, blocks).unwrap(), GroupTag::SL).unwrap();
        assert!((el_exact_positive_diagonal(&g).unwrap() - 3f64.ln()).abs() < 1e-12);

        let neg = diag(&alg, GroupTag::SL, &[c(-2., 0.), c(-0.5, 0.)]);
        assert!(el_exact_positive_diagonal(&neg).is_err());
    }

    #[test]
    fn lower_bound_of_elementary() {
        for m in [1.0, 10.0, 1e6] {
            let mut x = MatrixOverAlgebra::<f64>::identity(&Algebra::Complex, 2);
            x.set_entry(0, 1, &crate::algebra::AlgebraElement::scalar(&Algebra::Complex, c(m, 0.)))
                .unwrap();
            let g = GroupElement::new(x, GroupTag::En).unwrap();
            assert_eq!(el_lower_bound(&g, LieNorm::OperatorL1), (m + 1.0).ln());
        }
        let e3 = diag(&Algebra::Complex, GroupTag::SL, &[c(3f64.exp(), 0.), c((-3f64).exp(), 0.)]);
        assert!((el_lower_bound(&e3, LieNorm::OperatorL1) - 3.0).abs() < 1e-12);
        let id = GroupElement::<f64>::identity(&Algebra::Complex, 3, GroupTag::GL);
        assert_eq!(el_lower_bound(&id, LieNorm::OperatorL1), 0.0);
    }
}
