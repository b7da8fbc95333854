//! The estimators against the brute-force oracles on tiny instances.

use lielength::algebra::Algebra;
use lielength::circle::{quotient_norm, CircleFunction};
use lielength::explength::{el_estimate, EstimateOptions};
use lielength::linalg::CMatrix;
use lielength::matrix::{GroupElement, GroupTag, LieNorm, MatrixOverAlgebra};
use lielength::scalar::c;
use lielength::space::DiscretizedSpace;
use lielength_cli::oracles::{oracle_el_bruteforce, oracle_quotient_norm, GridSpec};

fn u1(theta: f64) -> GroupElement<f64> {
    let m = MatrixOverAlgebra::from_complex(&Algebra::Complex, CMatrix::from_element(1, 1, c(theta.cos(), theta.sin())))
        .unwrap();
    GroupElement::new(m, GroupTag::U).unwrap()
}

#[test]
fn el_estimate_agrees_with_oracle_on_grid_angles() {
    let grid = GridSpec::default();
    let step = 2.0 * grid.radius / (grid.points - 1) as f64;
    for k in (-20i32..=20).step_by(3) {
        let theta = k as f64 * step;
        let g = u1(theta);
        let oracle = oracle_el_bruteforce(&g, LieNorm::Spectral, &grid).unwrap().expect("grid hit");
        assert!((oracle - theta.abs()).abs() < 1e-12, "theta {theta}: oracle {oracle}");
        let b = el_estimate(&g, &EstimateOptions::with_seed(3)).unwrap();
        assert!((b.upper - oracle).abs() < 1e-9, "theta {theta}: {} vs {oracle}", b.upper);
        assert!(b.lower <= oracle + 1e-9);
    }
}

#[test]
fn quotient_norm_matches_oracle_on_grid_graphs() {
    for (n, edges) in [(4, vec![(0, 1), (2, 3)]), (5, vec![(0, 1), (1, 2), (2, 0)]), (3, vec![])] {
        let space = DiscretizedSpace::new(n, edges).unwrap();
        for shift in 0..16 {
            let phase = (0..n).map(|v| ((shift + 3 * v) % 16) as f64 / 64.0 + 0.25 * (v % 2) as f64).collect();
            let Ok(f) = CircleFunction::new(space.clone(), phase) else { continue };
            let Ok(q) = quotient_norm(&f) else { continue };
            assert_eq!(q, oracle_quotient_norm(&f, 4).unwrap());
        }
    }
}
