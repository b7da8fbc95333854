//! Circle-valued functions on a graph discretization and their exponential
//! length in the abelian unitary group, computed through phase unwrapping
//! and the quotient norm modulo locally constant integer functions.

use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::matrix::{GroupElement, GroupTag, MatrixOverAlgebra};
use crate::scalar::{c, Scalar};
use crate::space::DiscretizedSpace;

/// Guard band below `1/2` for the adjacency sampling condition.
pub const SAMPLING_GUARD: f64 = 1e-12;

/// Phases in `[0, 1)` on the vertices of a graph, adequately sampled along
/// every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleFunction<T: Scalar> {
    space: Arc<DiscretizedSpace>,
    phase: Vec<T>,
}

fn circular_distance<T: Scalar>(a: T, b: T) -> T {
    let d = (a - b).abs();
    d.min(T::one() - d)
}

/// Representative of `b - a` in `(-1/2, 1/2]`.
fn increment<T: Scalar>(a: T, b: T) -> T {
    let d = b - a;
    d - d.round()
}

fn wrap<T: Scalar>(x: T) -> T {
    let r = x - x.floor();
    if r >= T::one() { T::zero() } else { r }
}

impl<T: Scalar> CircleFunction<T> {
    /// Phases are reduced modulo 1; edges violating the sampling condition
    /// are rejected.
    pub fn new(space: impl Into<Arc<DiscretizedSpace>>, phase: Vec<T>) -> Result<Self> {
        let space = space.into();
        if phase.len() != space.vertices() {
            return Err(Error::Shape(format!(
                "{} phases for {} vertices",
                phase.len(),
                space.vertices()
            )));
        }
        if let Some(p) = phase.iter().find(|p| !p.is_finite()) {
            return Err(Error::Format(format!("non-finite phase {}", p.to_f64_lossy())));
        }
        let phase: Vec<T> = phase.into_iter().map(wrap).collect();
        let limit = T::lit(0.5 - SAMPLING_GUARD);
        for &(a, b) in space.edges() {
            let d = circular_distance(phase[a], phase[b]);
            if d >= limit {
                return Err(Error::SamplingViolation {
                    edge: (a, b),
                    distance: d.to_f64_lossy(),
                });
            }
        }
        Ok(Self { space, phase })
    }

    pub fn constant(space: impl Into<Arc<DiscretizedSpace>>, value: T) -> Result<Self> {
        let space = space.into();
        let n = space.vertices();
        Self::new(space, vec![value; n])
    }

    pub fn space(&self) -> &DiscretizedSpace {
        &self.space
    }

    pub fn phase(&self) -> &[T] {
        &self.phase
    }

    /// Pointwise product: phases add modulo 1.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::AlgebraMismatch("circle functions on different spaces".into()));
        }
        let phase = self.phase.iter().zip(&other.phase).map(|(&a, &b)| a + b).collect();
        Self::new(self.space.clone(), phase)
    }

    pub fn inverse(&self) -> Self {
        Self {
            space: self.space.clone(),
            phase: self.phase.iter().map(|&p| wrap(-p)).collect(),
        }
    }

    /// `exp(2 pi i f)` as a 1x1 unitary over the function algebra.
    pub fn to_unitary(&self) -> GroupElement<T> {
        let alg = Algebra::Functions(self.space.clone());
        let blocks = self
            .phase
            .iter()
            .map(|&p| {
                let t = T::two_pi() * p;
                CMatrix::from_element(1, 1, c(t.cos(), t.sin()))
            })
            .collect();
        let m = MatrixOverAlgebra::from_blocks(alg, 1, blocks).expect("one block per vertex");
        GroupElement::new_unchecked(m, GroupTag::U)
    }

    /// `sup |f'|` for the pointwise-principal lift with values in `(-1/2, 1/2]`.
    pub fn principal_sup(&self) -> T {
        let half = T::lit(0.5);
        self.phase
            .iter()
            .map(|&p| if p > half { T::one() - p } else { p })
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// A real lift `f'` with `f' mod 1 = f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealLift<T: Scalar> {
    pub value: Vec<T>,
    #[serde(skip)]
    pub base: CircleFunction<T>,
}

impl<T: Scalar> RealLift<T> {
    /// Largest distance between `value mod 1` and the base phase.
    pub fn defect(&self) -> T {
        self.value
            .iter()
            .zip(self.base.phase())
            .map(|(&v, &p)| circular_distance(wrap(v), p))
            .fold(T::zero(), |a, b| a.max(b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindingReport {
    pub in_identity_component: bool,
    /// Integer winding around the fundamental cycle closed by each non-tree edge.
    pub windings: Vec<((usize, usize), i64)>,
}

fn propagate<T: Scalar>(f: &CircleFunction<T>) -> (Vec<T>, Vec<((usize, usize), i64)>) {
    let forest = f.space.spanning_forest();
    let mut lift = vec![T::zero(); f.phase.len()];
    for &r in &forest.roots {
        lift[r] = f.phase[r];
    }
    for &(parent, child) in &forest.tree_edges {
        lift[child] = lift[parent] + increment(f.phase[parent], f.phase[child]);
    }
    let windings = forest
        .cycle_edges
        .iter()
        .map(|&(a, b)| {
            let w = lift[a] + increment(f.phase[a], f.phase[b]) - lift[b];
            ((a, b), w.round().to_f64_lossy() as i64)
        })
        .collect();
    (lift, windings)
}

/// Windings of `f` around the fundamental cycles of a fixed spanning forest.
pub fn identity_component_check<T: Scalar>(f: &CircleFunction<T>) -> WindingReport {
    let (_, windings) = propagate(f);
    WindingReport {
        in_identity_component: windings.iter().all(|(_, w)| *w == 0),
        windings,
    }
}

/// Lift by nearest-increment propagation along a spanning forest, rooted at
/// the smallest vertex of each component.
pub fn unwrap<T: Scalar>(f: &CircleFunction<T>) -> Result<RealLift<T>> {
    let (value, windings) = propagate(f);
    if let Some(&(edge, winding)) = windings.iter().find(|(_, w)| *w != 0) {
        return Err(Error::NonzeroWinding { edge, winding });
    }
    Ok(RealLift { value, base: f.clone() })
}

/// `||f||_Q` together with the optimal integer offset per component.
pub fn quotient_norm_with_offsets<T: Scalar>(f: &CircleFunction<T>) -> Result<(T, Vec<i64>)> {
    let lift = unwrap(f)?;
    let comps = f.space.components();
    let mut lo = vec![T::max_value().unwrap_or(T::one()); comps];
    let mut hi = vec![T::min_value().unwrap_or(-T::one()); comps];
    for (v, &x) in lift.value.iter().enumerate() {
        let k = f.space.component_of(v);
        lo[k] = lo[k].min(x);
        hi[k] = hi[k].max(x);
    }
    let mut best = T::zero();
    let mut offsets = Vec::with_capacity(comps);
    for k in 0..comps {
        let centre = -(lo[k] + hi[k]) / T::lit(2.0);
        let cost = |m: T| (hi[k] + m).abs().max((lo[k] + m).abs());
        let (a, b) = (centre.floor(), centre.ceil());
        let m = if cost(b) < cost(a) { b } else { a };
        best = best.max(cost(m));
        offsets.push(m.to_f64_lossy() as i64);
    }
    Ok((best, offsets))
}

/// Minimal sup norm over real lifts of `f`.
pub fn quotient_norm<T: Scalar>(f: &CircleFunction<T>) -> Result<T> {
    Ok(quotient_norm_with_offsets(f)?.0)
}

/// `cel(f) = 2 pi ||f||_Q`.
pub fn cel<T: Scalar>(f: &CircleFunction<T>) -> Result<T> {
    Ok(T::two_pi() * quotient_norm(f)?)
}

#[derive(Serialize, Deserialize)]
struct CircleRepr<T> {
    vertices: usize,
    edges: Vec<[usize; 2]>,
    phase: Vec<T>,
}

impl<T: Scalar> Serialize for CircleFunction<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CircleRepr {
            vertices: self.space.vertices(),
            edges: self.space.edges().iter().map(|&(a, b)| [a, b]).collect(),
            phase: self.phase.clone(),
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for CircleFunction<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = CircleRepr::<T>::deserialize(d)?;
        let space = DiscretizedSpace::new(r.vertices, r.edges.into_iter().map(|[a, b]| (a, b)).collect())
            .map_err(D::Error::custom)?;
        Self::new(space, r.phase).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explength::el_exact_unitary;
    use std::f64::consts::PI;

    #[test]
    fn unwrap_examples() {
        let f = CircleFunction::constant(DiscretizedSpace::path(4).unwrap(), 0.0).unwrap();
        assert_eq!(unwrap(&f).unwrap().value, vec![0.0; 4]);
        let f = CircleFunction::<f64>::new(DiscretizedSpace::path(5).unwrap(), vec![0.0, 0.3, 0.6, 0.9, 0.2]).unwrap();
        let lift = unwrap(&f).unwrap();
        for (a, b) in lift.value.iter().zip([0.0, 0.3, 0.6, 0.9, 1.2]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(lift.defect() < 1e-12);
        let f = CircleFunction::new(DiscretizedSpace::discrete(2).unwrap(), vec![0.5, 0.5]).unwrap();
        assert_eq!(unwrap(&f).unwrap().value, vec![0.5, 0.5]);
    }

    #[test]
    fn sampling_condition_rejects_half_steps() {
        let e = CircleFunction::new(DiscretizedSpace::path(2).unwrap(), vec![0.0, 0.5]);
        assert!(matches!(e, Err(Error::SamplingViolation { .. })));
        assert!(CircleFunction::new(DiscretizedSpace::path(2).unwrap(), vec![0.0, 0.49]).is_ok());
    }

    #[test]
    fn winding_detection() {
        let m = 6;
        let phases: Vec<f64> = (0..m).map(|k| k as f64 / m as f64).collect();
        let f = CircleFunction::new(DiscretizedSpace::cycle(m).unwrap(), phases).unwrap();
        let r = identity_component_check(&f);
        assert!(!r.in_identity_component);
        assert_eq!(r.windings.len(), 1);
        assert_eq!(r.windings[0].1.abs(), 1);
        assert!(matches!(unwrap(&f), Err(Error::NonzeroWinding { .. })));
        let tree = CircleFunction::new(DiscretizedSpace::path(6).unwrap(), vec![0.0, 0.4, 0.8, 0.2, 0.6, 0.0]).unwrap();
        assert!(identity_component_check(&tree).in_identity_component);
        let k = CircleFunction::constant(DiscretizedSpace::cycle(5).unwrap(), 0.7).unwrap();
        assert!(identity_component_check(&k).in_identity_component);
    }

    #[test]
    fn quotient_norm_examples() {
        let zero = CircleFunction::constant(DiscretizedSpace::path(3).unwrap(), 0.0).unwrap();
        assert_eq!(quotient_norm(&zero).unwrap(), 0.0);
        let half = CircleFunction::new(DiscretizedSpace::discrete(1).unwrap(), vec![0.5]).unwrap();
        assert_eq!(quotient_norm(&half).unwrap(), 0.5);
        assert!((cel(&half).unwrap() - PI).abs() < 1e-15);
        let ramp = CircleFunction::<f64>::new(DiscretizedSpace::path(4).unwrap(), vec![0.0, 0.25, 0.5, 0.75]).unwrap();
        assert!((quotient_norm(&ramp).unwrap() - 0.75).abs() < 1e-15);
        assert!((cel(&ramp).unwrap() - 1.5 * PI).abs() < 1e-14);
    }

    #[test]
    fn symmetric_lift_range() {
        // Lift climbing from -R to R in steps of 0.1.
        for r in [0.5, 1.0, 2.3, 7.0] {
            let steps = (2.0 * r / 0.1_f64).round() as usize;
            let phases: Vec<f64> = (0..=steps).map(|i| -r + 0.1 * i as f64).collect();
            let f = CircleFunction::new(DiscretizedSpace::path(steps + 1).unwrap(), phases).unwrap();
            assert!((quotient_norm(&f).unwrap() - r).abs() < 1e-9);
        }
    }

    #[test]
    fn pointwise_log_never_exceeds_cel() {
        let f = CircleFunction::<f64>::new(DiscretizedSpace::path(5).unwrap(), vec![0.0, 0.3, 0.6, 0.9, 0.2]).unwrap();
        let exact = el_exact_unitary(&f.to_unitary()).unwrap();
        assert!((exact - 2.0 * PI * f.principal_sup()).abs() < 1e-12);
        assert!(exact <= cel(&f).unwrap() + 1e-12);
        // Without edges the continuity constraint disappears and both agree.
        let g = CircleFunction::<f64>::new(DiscretizedSpace::discrete(3).unwrap(), vec![0.1, 0.7, 0.45]).unwrap();
        assert!((el_exact_unitary(&g.to_unitary()).unwrap() - cel(&g).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn json_layout() {
        let f: CircleFunction<f64> = serde_json::from_str(r#"{"vertices":3,"edges":[[0,1]],"phase":[0.1,0.2,1.25]}"#).unwrap();
        assert_eq!(f.phase()[2], 0.25);
        assert_eq!(f.space().components(), 2);
        let back = serde_json::to_value(&f).unwrap();
        assert_eq!(back["edges"][0], serde_json::json!([0, 1]));
    }
}
