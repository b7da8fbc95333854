//! Brute-force oracles for validating the estimators on tiny instances.

use std::collections::VecDeque;

use lielength::algebra::Algebra;
use lielength::circle::CircleFunction;
use lielength::linalg::CMatrix;
use lielength::matrix::{GroupElement, GroupTag, LieNorm, MatrixOverAlgebra};
use lielength::scalar::c;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Grid for [`oracle_el_bruteforce`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Each real coordinate ranges over `[-radius, radius]`.
    pub radius: f64,
    /// Grid points per coordinate, endpoints included.
    pub points: usize,
    pub max_factors: usize,
    /// Largest accepted `||exp X_1 ... exp X_k - g||`.
    pub accept: f64,
    pub limit: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            radius: std::f64::consts::PI,
            points: 41,
            max_factors: 3,
            accept: 1e-9,
            limit: 100_000,
        }
    }
}

/// Real basis of the Lie algebra of `tag` inside `M_n(C)`.
fn lie_basis(n: usize, tag: GroupTag, real: bool) -> Vec<CMatrix<f64>> {
    let unit = |j: usize, k: usize, z| {
        let mut m = CMatrix::zeros(n, n);
        m[(j, k)] = z;
        m
    };
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let mut basis = Vec::new();
    if tag.is_unitary() {
        for j in 0..n {
            basis.push(unit(j, j, i));
            for k in j + 1..n {
                basis.push(unit(j, k, one) - unit(k, j, one));
                basis.push(unit(j, k, i) + unit(k, j, i));
            }
        }
        return basis;
    }
    let scalars: &[_] = if real { &[one] } else { &[one, i] };
    for j in 0..n {
        for k in 0..n {
            if j == k && tag.is_special() {
                continue;
            }
            for &z in scalars {
                basis.push(unit(j, k, z));
            }
        }
    }
    if tag.is_special() {
        for j in 0..n.saturating_sub(1) {
            for &z in scalars {
                basis.push(unit(j, j, z) - unit(n - 1, n - 1, z));
            }
        }
    }
    basis
}

/// Exhaustive search over gridded factorizations with up to
/// `grid.max_factors` factors; returns the smallest `sum ||X_i||` whose
/// product is within `grid.accept` of `g`, or `None` when the grid misses.
pub fn oracle_el_bruteforce(g: &GroupElement<f64>, norm: LieNorm, grid: &GridSpec) -> CliResult<Option<f64>> {
    let alg = g.algebra();
    if !matches!(alg, Algebra::Complex | Algebra::Real) || g.n() > 2 {
        return Err(CliError::Usage("brute-force oracle handles scalar algebras with n <= 2 only".into()));
    }
    let n = g.n();
    let basis = lie_basis(n, g.tag(), alg.is_real());
    let d = basis.len() as u32;
    let g_pts = grid.points.max(2);
    let mut total: usize = 0;
    for k in 1..=grid.max_factors {
        let count = (g_pts as f64).powi((d * k as u32) as i32);
        total = total.saturating_add(if count > usize::MAX as f64 { usize::MAX } else { count as usize });
    }
    if total > grid.limit {
        return Err(CliError::BudgetExceeded {
            candidates: total,
            limit: grid.limit,
        });
    }
    let step = 2.0 * grid.radius / (g_pts - 1) as f64;
    // All single factors on the grid with their exponentials and norms.
    let singles = g_pts.pow(d);
    let mut factors = Vec::with_capacity(singles);
    for idx in 0..singles {
        let mut x = CMatrix::zeros(n, n);
        let mut rest = idx;
        for b in &basis {
            let t = -grid.radius + step * (rest % g_pts) as f64;
            rest /= g_pts;
            x += b * c(t, 0.0);
        }
        let m = MatrixOverAlgebra::from_complex(alg, x).expect("square");
        let size = m.norm(norm);
        let e = m.exp().map_err(CliError::Core)?;
        factors.push((e.blocks()[0].clone(), size));
    }
    let target = g.matrix().blocks()[0].clone();
    let mut best: Option<f64> = None;
    let identity = CMatrix::<f64>::identity(n, n);
    if (&identity - &target).iter().all(|z| z.norm() <= grid.accept) {
        return Ok(Some(0.0));
    }
    let mut stack: Vec<(CMatrix<f64>, f64, usize)> = vec![(identity, 0.0, 0)];
    while let Some((prod, size, depth)) = stack.pop() {
        if depth == grid.max_factors {
            continue;
        }
        for (e, s) in &factors {
            let next_size = size + s;
            if best.is_some_and(|b| next_size >= b) {
                continue;
            }
            let next = &prod * e;
            let m = MatrixOverAlgebra::from_complex(alg, &next - &target).expect("square");
            if m.op_norm() <= grid.accept {
                best = Some(next_size);
            } else {
                stack.push((next, next_size, depth + 1));
            }
        }
    }
    Ok(best)
}

/// Exhaustive minimization of `max_v |f'(v) + k_{comp(v)}|` over integer
/// offset vectors in `[-k, k]^c`, with its own breadth-first lift.
pub fn oracle_quotient_norm(f: &CircleFunction<f64>, k: i64) -> CliResult<f64> {
    let space = f.space();
    let n = space.vertices();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in space.edges() {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut comp = vec![usize::MAX; n];
    let mut lift = vec![0.0; n];
    let mut comps = 0;
    for root in 0..n {
        if comp[root] != usize::MAX {
            continue;
        }
        comp[root] = comps;
        lift[root] = f.phase()[root];
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                let mut step = f.phase()[w] - f.phase()[v];
                step -= step.round();
                if comp[w] == usize::MAX {
                    comp[w] = comps;
                    lift[w] = lift[v] + step;
                    queue.push_back(w);
                } else if (lift[v] + step - lift[w]).abs() > 0.25 {
                    return Err(CliError::Usage("circle function has nonzero winding".into()));
                }
            }
        }
        comps += 1;
    }
    if comps > 6 {
        return Err(CliError::RangeExceeded(format!("{comps} components, at most 6 supported")));
    }
    let width = (2 * k + 1) as usize;
    let mut best = f64::INFINITY;
    let mut arg = vec![0i64; comps];
    for code in 0..width.pow(comps as u32) {
        let mut rest = code;
        let offsets: Vec<i64> = (0..comps)
            .map(|_| {
                let o = (rest % width) as i64 - k;
                rest /= width;
                o
            })
            .collect();
        let value = (0..n).map(|v| (lift[v] + offsets[comp[v]] as f64).abs()).fold(0.0, f64::max);
        if value < best {
            best = value;
            arg = offsets;
        }
    }
    if arg.iter().any(|o| o.abs() == k) {
        return Err(CliError::RangeExceeded(format!("optimal offset reaches the search bound {k}")));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lielength::space::DiscretizedSpace;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn u1(theta: f64) -> GroupElement<f64> {
        let m = MatrixOverAlgebra::from_complex(&Algebra::Complex, CMatrix::from_element(1, 1, c(theta.cos(), theta.sin()))).unwrap();
        GroupElement::new(m, GroupTag::U).unwrap()
    }

    #[test]
    fn el_oracle_examples() {
        let grid = GridSpec::default();
        let minus = oracle_el_bruteforce(&u1(PI), LieNorm::Spectral, &grid).unwrap().unwrap();
        assert!((minus - PI).abs() < 1e-12);
        let quarter = oracle_el_bruteforce(&u1(FRAC_PI_2), LieNorm::Spectral, &grid).unwrap().unwrap();
        assert!((quarter - FRAC_PI_2).abs() < 1e-12);
        assert_eq!(oracle_el_bruteforce(&u1(0.0), LieNorm::Spectral, &grid).unwrap(), Some(0.0));
        let big = GroupElement::identity(&Algebra::Complex, 2, GroupTag::GL);
        assert!(matches!(
            oracle_el_bruteforce(&big, LieNorm::OperatorL1, &grid),
            Err(CliError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn quotient_oracle_examples() {
        let zero = CircleFunction::constant(DiscretizedSpace::path(3).unwrap(), 0.0).unwrap();
        assert_eq!(oracle_quotient_norm(&zero, 5).unwrap(), 0.0);
        let half = CircleFunction::new(DiscretizedSpace::discrete(1).unwrap(), vec![0.5]).unwrap();
        assert_eq!(oracle_quotient_norm(&half, 5).unwrap(), 0.5);
        let many = CircleFunction::constant(DiscretizedSpace::discrete(7).unwrap(), 0.1).unwrap();
        assert!(matches!(oracle_quotient_norm(&many, 2), Err(CliError::RangeExceeded(_))));
    }
}
