//! Exponential length on Banach–Lie groups of matrices over finite
//! dimensional Banach algebras.
//!
//! Everything is generic over the real scalar type (`f32` or `f64`);
//! the [`f64`] and [`f32`] modules fix it.

pub mod algebra;
pub mod circle;
pub mod coarse;
pub mod elementary;
pub mod error;
pub mod explength;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod sample;
pub mod scalar;
pub mod schatten;
pub mod space;

pub use algebra::{Algebra, AlgebraElement};
pub use error::{Error, Result};
pub use matrix::{mat_exp, mat_log, GroupElement, GroupTag, LieNorm, MatrixOverAlgebra};
pub use scalar::{Scalar, Tolerance};
pub use space::DiscretizedSpace;

macro_rules! concrete {
    ($name:ident, $t:ty) => {
        pub mod $name {
            //! Concrete aliases.
            pub type AlgebraElement = crate::algebra::AlgebraElement<$t>;
            pub type MatrixOverAlgebra = crate::matrix::MatrixOverAlgebra<$t>;
            pub type GroupElement = crate::matrix::GroupElement<$t>;
            pub type FactorizationCertificate = crate::explength::FactorizationCertificate<$t>;
            pub type ElBracket = crate::explength::ElBracket<$t>;
            pub type CircleFunction = crate::circle::CircleFunction<$t>;
            pub type SchattenContext = crate::schatten::SchattenContext<$t>;
            pub type PUnitary = crate::schatten::PUnitary<$t>;
            pub type SampledSpace = crate::coarse::SampledSpace<$t>;
            pub type HsDeterminantContext = crate::elementary::HsDeterminantContext<$t>;
        }
    };
}

concrete!(f64, f64);
concrete!(f32, f32);
