//! JSON document formats for algebra elements, matrices and group elements.
//!
//! ```json
//! {"algebra": {"kind": "complex"}, "n": 2, "entries": [[1,0], [0,0], [0,0], [1,0]]}
//! ```
//!
//! Entries are row-major. A complex scalar is `[re, im]` (a bare number is
//! read as real), a matrix-algebra entry is a `k x k` nested list of complex
//! scalars, and a function-algebra entry lists one complex scalar per vertex.

use nalgebra::Complex;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::algebra::{Algebra, AlgebraElement};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::matrix::{GroupElement, GroupTag, MatrixOverAlgebra};
use crate::scalar::{c, Scalar};

fn complex_to_json<T: Scalar>(z: Complex<T>) -> Value {
    json!([z.re.to_f64_lossy(), z.im.to_f64_lossy()])
}

fn complex_from_json<T: Scalar>(v: &Value) -> Result<Complex<T>> {
    match v {
        Value::Number(x) => Ok(c(T::lit(x.as_f64().unwrap_or(f64::NAN)), T::zero())),
        Value::Array(parts) if parts.len() == 2 => {
            let re = parts[0].as_f64().ok_or_else(|| Error::Format(format!("bad real part {}", parts[0])))?;
            let im = parts[1].as_f64().ok_or_else(|| Error::Format(format!("bad imaginary part {}", parts[1])))?;
            Ok(c(T::lit(re), T::lit(im)))
        }
        other => Err(Error::Format(format!("expected a number or [re, im], got {other}"))),
    }
}

pub fn element_to_json<T: Scalar>(e: &AlgebraElement<T>) -> Value {
    match e.algebra() {
        Algebra::Real => json!(e.samples()[0].re.to_f64_lossy()),
        Algebra::Complex => complex_to_json(e.samples()[0]),
        Algebra::Functions(_) => Value::Array(e.samples().into_iter().map(complex_to_json).collect()),
        Algebra::Matrix { k } => {
            let b = &e.blocks()[0];
            Value::Array(
                (0..*k)
                    .map(|i| Value::Array((0..*k).map(|j| complex_to_json(b[(i, j)])).collect()))
                    .collect(),
            )
        }
    }
}

pub fn element_from_json<T: Scalar>(algebra: &Algebra, v: &Value) -> Result<AlgebraElement<T>> {
    match algebra {
        Algebra::Real | Algebra::Complex => {
            let z = complex_from_json(v)?;
            Ok(AlgebraElement::scalar(algebra, z))
        }
        Algebra::Functions(space) => {
            let items = v
                .as_array()
                .ok_or_else(|| Error::Format("function entry must be a list of samples".into()))?;
            if items.len() != space.vertices() {
                return Err(Error::Format(format!(
                    "{} samples for {} vertices",
                    items.len(),
                    space.vertices()
                )));
            }
            let samples = items.iter().map(complex_from_json).collect::<Result<Vec<_>>>()?;
            AlgebraElement::from_samples(algebra, &samples)
        }
        Algebra::Matrix { k } => {
            let rows = v
                .as_array()
                .filter(|r| r.len() == *k)
                .ok_or_else(|| Error::Format(format!("matrix entry must have {k} rows")))?;
            let mut b = CMatrix::zeros(*k, *k);
            for (i, row) in rows.iter().enumerate() {
                let row = row
                    .as_array()
                    .filter(|r| r.len() == *k)
                    .ok_or_else(|| Error::Format(format!("matrix entry rows must have {k} columns")))?;
                for (j, z) in row.iter().enumerate() {
                    b[(i, j)] = complex_from_json(z)?;
                }
            }
            AlgebraElement::from_blocks(algebra.clone(), vec![b])
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    algebra: Algebra,
    n: usize,
    entries: Vec<Value>,
}

#[derive(Serialize, Deserialize)]
struct GroupRepr {
    group: GroupTag,
    algebra: Algebra,
    n: usize,
    entries: Vec<Value>,
}

#[derive(Serialize, Deserialize)]
struct ElementRepr {
    algebra: Algebra,
    value: Value,
}

fn matrix_entries<T: Scalar>(x: &MatrixOverAlgebra<T>) -> Vec<Value> {
    let n = x.n();
    (0..n * n).map(|idx| element_to_json(&x.entry(idx / n, idx % n))).collect()
}

fn matrix_from_parts<T: Scalar>(algebra: &Algebra, n: usize, entries: &[Value]) -> Result<MatrixOverAlgebra<T>> {
    if entries.len() != n * n {
        return Err(Error::Format(format!("{} entries for n = {n}", entries.len())));
    }
    let elements = entries
        .iter()
        .map(|v| element_from_json(algebra, v))
        .collect::<Result<Vec<_>>>()?;
    MatrixOverAlgebra::from_entries(algebra, n, &elements)
}

impl<T: Scalar> Serialize for MatrixOverAlgebra<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            algebra: self.algebra().clone(),
            n: self.n(),
            entries: matrix_entries(self),
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for MatrixOverAlgebra<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MatrixRepr::deserialize(d)?;
        matrix_from_parts(&r.algebra, r.n, &r.entries).map_err(D::Error::custom)
    }
}

impl<T: Scalar> Serialize for GroupElement<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupRepr {
            group: self.tag(),
            algebra: self.algebra().clone(),
            n: self.n(),
            entries: matrix_entries(self.matrix()),
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for GroupElement<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GroupRepr::deserialize(d)?;
        let m = matrix_from_parts(&r.algebra, r.n, &r.entries).map_err(D::Error::custom)?;
        GroupElement::new(m, r.group).map_err(D::Error::custom)
    }
}

impl<T: Scalar> Serialize for AlgebraElement<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ElementRepr {
            algebra: self.algebra().clone(),
            value: element_to_json(self),
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for AlgebraElement<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ElementRepr::deserialize(d)?;
        element_from_json(&r.algebra, &r.value).map_err(D::Error::custom)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use crate::space::DiscretizedSpace;
    use proptest::prelude::*;

    #[test]
    fn documented_layout() {
        let x: MatrixOverAlgebra<f64> = serde_json::from_str(
            r#"{"algebra":{"kind":"complex"},"n":2,"entries":[[1,0],3,[0,0],[0,-1]]}"#,
        )
        .unwrap();
        assert_eq!(x.entry(0, 1).samples()[0], c(3.0, 0.0));
        assert_eq!(x.entry(1, 1).samples()[0], c(0.0, -1.0));
        let g: GroupElement<f64> = serde_json::from_str(
            r#"{"group":"SL","algebra":{"kind":"real"},"n":2,"entries":[1,5,0,1]}"#,
        )
        .unwrap();
        assert_eq!(g.tag(), GroupTag::SL);
        let bad = serde_json::from_str::<GroupElement<f64>>(
            r#"{"group":"U","algebra":{"kind":"real"},"n":2,"entries":[1,5,0,1]}"#,
        );
        assert!(bad.is_err());
    }

    fn algebras() -> Vec<Algebra> {
        vec![
            Algebra::Complex,
            Algebra::Real,
            Algebra::Matrix { k: 2 },
            Algebra::functions(DiscretizedSpace::path(3).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn matrix_json_round_trip(seed in any::<u64>(), which in 0usize..4, n in 1usize..4) {
            let alg = algebras()[which].clone();
            let x: MatrixOverAlgebra<f64> = sample::matrix(&mut sample::rng(seed), &alg, n);
            let text = serde_json::to_string(&x).unwrap();
            let back: MatrixOverAlgebra<f64> = serde_json::from_str(&text).unwrap();
            prop_assert!(back.is_approx_eq(&x, 1e-12));
            let again = serde_json::to_string(&back).unwrap();
            prop_assert_eq!(text, again);
        }
    }
}
