//! The acceptance battery: one deterministic pass/fail result per criterion.

use std::f64::consts::PI;
use std::time::Instant;

use lielength::algebra::{Algebra, AlgebraElement};
use lielength::circle::{cel, quotient_norm, CircleFunction};
use lielength::coarse::{fit_quasi_isometry, CoarseMapSample, SampledSpace};
use lielength::elementary::{
    bracket_identities_check, hs_determinant, lie_factorization, traceless_decompose,
    unboundedness_witness, word_certificate, ElementaryGenerator, HsDeterminantContext,
};
use lielength::explength::{
    el_estimate, el_exact_positive_diagonal, el_exact_unitary, rel_estimate, trotter_check, EstimateOptions,
    FactorizationCertificate, SearchBudget,
};
use lielength::linalg::{self, CMatrix};
use lielength::matrix::{GroupElement, GroupTag, LieNorm};
use lielength::sample::{self, SeededRng};
use lielength::scalar::{c, Tolerance};
use lielength::schatten::{
    cocycle, cocycle_residual, coarse_proper_chain, geodesic_chain, haagerup_witness, p_norm, sandwich_check,
    PUnitary, SchattenContext,
};
use lielength::space::DiscretizedSpace;
use nalgebra::SymmetricEigen;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliResult;
use crate::oracles::oracle_quotient_norm;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Wall-clock seconds; excluded from result files.
    #[serde(skip)]
    pub seconds: f64,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<44} {} ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

fn run(id: u8, name: &'static str, limit: Option<f64>, f: impl FnOnce() -> CliResult<(bool, String)>) -> CriterionResult {
    let start = Instant::now();
    let outcome = f();
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match outcome {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = limit {
        if seconds >= limit {
            passed = false;
            detail = format!("{detail}; runtime {seconds:.2}s exceeds {limit}s");
        }
    }
    CriterionResult {
        id,
        name,
        passed,
        detail,
        seconds,
    }
}

/// Runs every criterion with streams derived from `seed`.
pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    vec![
        run(1, "sandwich inequality", Some(10.0), || sandwich(seed)),
        run(2, "abelian closed form", Some(5.0), || abelian(seed)),
        run(3, "el estimator soundness", Some(60.0), || el_soundness(seed)),
        run(4, "positive diagonal closed form", None, || positive_diagonal(seed)),
        run(5, "rel below el and below norm of sum", None, || rel_checks(seed)),
        run(6, "product formula convergence", None, || trotter(seed)),
        run(7, "maximal metric chains", None, || chains(seed)),
        run(8, "positive definite witnesses", None, || haagerup(seed)),
        run(9, "elementary identities", None, || identities(seed)),
        run(10, "determinant invariance", None, || determinant(seed)),
        run(11, "unboundedness witness", None, unbounded),
    ]
}

fn stream(seed: u64, criterion: u64, index: usize) -> SeededRng {
    sample::rng_stream(seed ^ (criterion << 32), index as u64)
}

fn light_budget() -> SearchBudget {
    SearchBudget {
        restarts: 1,
        sweeps: 2,
        directions: 2,
        factors: 2,
        ..SearchBudget::default()
    }
}

fn sandwich(seed: u64) -> CliResult<(bool, String)> {
    const SLACK: f64 = 1e-9;
    let dims = [2usize, 4, 8, 16];
    let ps = [1.0, 2.0, 4.0];
    let violations: Vec<usize> = (0..1000)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, 1, i);
            let d = dims[i % dims.len()];
            let a = sample::hermitian::<f64, _>(&mut rng, d, PI);
            // Independent middle term from the matrix exponential.
            let e = linalg::expm(&(&a * c(0.0, 1.0))).expect("finite") - CMatrix::identity(d, d);
            let mut bad = 0;
            for &p in &ps {
                let ctx = SchattenContext::new(d, p).expect("valid context");
                let s = sandwich_check(&a, &ctx).expect("bounded spectrum");
                let mid = p_norm(&e, &ctx).expect("shape");
                let direct = s.lhs <= mid + SLACK && mid <= s.rhs + SLACK;
                if !s.holds || !direct || (mid - s.mid).abs() > 1e-9 * (1.0 + mid) {
                    bad += 1;
                }
            }
            bad
        })
        .collect();
    let total: usize = violations.iter().sum();
    Ok((total == 0, format!("{total} violations in 3000 checks")))
}

fn small_circle(rng: &mut SeededRng) -> Option<CircleFunction<f64>> {
    let n = rng.random_range(1..=6usize);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(0.35) {
                edges.push((a, b));
            }
        }
    }
    let space = DiscretizedSpace::new(n, edges).ok()?;
    // Dyadic phases keep every lift exact in floating point.
    let base = rng.random_range(0..64i32);
    let width = rng.random_range(8..=40i32);
    let phase = (0..n)
        .map(|_| (base + rng.random_range(0..=width)) as f64 / 64.0)
        .collect();
    CircleFunction::new(space, phase).ok()
}

fn abelian(seed: u64) -> CliResult<(bool, String)> {
    let mut rng = stream(seed, 2, 0);
    let (mut matched, mut attempts, mut mismatches) = (0, 0, 0);
    while matched < 1000 && attempts < 100_000 {
        attempts += 1;
        let Some(f) = small_circle(&mut rng) else { continue };
        let Ok(q) = quotient_norm(&f) else { continue };
        let oracle = oracle_quotient_norm(&f, 4)?;
        if q != oracle {
            mismatches += 1;
        }
        matched += 1;
    }
    let mut sup = 0f64;
    let mut over = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=6usize);
        let phase = (0..n).map(|_| rng.random::<f64>()).collect();
        let f = CircleFunction::new(DiscretizedSpace::discrete(n)?, phase)?;
        let v = cel(&f)?;
        if v > PI {
            over += 1;
        }
        sup = sup.max(v);
    }
    let passed = matched == 1000 && mismatches == 0 && over == 0 && sup >= PI - 1e-3;
    Ok((
        passed,
        format!("{mismatches} mismatches in {matched} instances; edgeless sup cel {sup:.6}, {over} above pi"),
    ))
}

/// `max |arg lambda|` from the spectrum of the real part `(u + u*)/2`.
fn unitary_angle_oracle(u: &CMatrix<f64>) -> f64 {
    let h = (u + u.adjoint()) * c(0.5, 0.0);
    let min = linalg::hermitian_eigenvalues(&h)[0];
    min.clamp(-1.0, 1.0).acos()
}

fn el_soundness(seed: u64) -> CliResult<(bool, String)> {
    let opts = EstimateOptions::with_seed(seed);
    let unitary: Vec<CliResult<(bool, f64)>> = (0..100)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, 3, i);
            let u = sample::unitary::<f64, _>(&mut rng, 1 + i % 6);
            let exact = el_exact_unitary(&u)?;
            let oracle = unitary_angle_oracle(&u.matrix().blocks()[0]);
            let b = el_estimate(&u, &opts)?;
            let ok = b.upper >= exact && b.upper <= 1.05 * exact + 1e-6 && (oracle - exact).abs() <= 1e-6;
            Ok((ok, b.upper - exact))
        })
        .collect();
    let mut bad_u = 0;
    let mut worst_gap = 0f64;
    for r in unitary {
        let (ok, gap) = r?;
        bad_u += usize::from(!ok);
        worst_gap = worst_gap.max(gap);
    }
    let light = EstimateOptions {
        budget: light_budget(),
        ..EstimateOptions::with_seed(seed)
    };
    let bad_gl: usize = (0..1000)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, 3, 1000 + i);
            let g = sample::gl_element::<f64, _>(&mut rng, &Algebra::Complex, 2 + i % 3, 1.0);
            match el_estimate(&g, &light) {
                Ok(b) => usize::from(b.lower > b.upper),
                Err(_) => 1,
            }
        })
        .sum();
    Ok((
        bad_u == 0 && bad_gl == 0,
        format!("{bad_u}/100 unitaries outside [exact, 1.05 exact + 1e-6] (worst gap {worst_gap:.2e}); {bad_gl}/1000 GL with lower > upper"),
    ))
}

fn positive_diagonal(seed: u64) -> CliResult<(bool, String)> {
    let algebras = [
        Algebra::Complex,
        Algebra::Real,
        Algebra::functions(DiscretizedSpace::path(3)?),
    ];
    let opts = EstimateOptions {
        budget: light_budget(),
        ..EstimateOptions::with_seed(seed)
    };
    let mut worst = 0f64;
    for i in 0..100 {
        let mut rng = stream(seed, 4, i);
        let alg = &algebras[i % algebras.len()];
        let a = sample::positive_diagonal::<f64, _>(&mut rng, alg, 3.0);
        // sup over blocks of |log d|, read off the diagonal directly.
        let oracle = a.matrix().blocks().iter().map(|b| b[(0, 0)].re.ln().abs()).fold(0.0, f64::max);
        let single = FactorizationCertificate::new(vec![a.matrix().log(1e-12)?], a.clone(), LieNorm::OperatorL1)?;
        let b = el_estimate(&a, &opts)?;
        let exact = el_exact_positive_diagonal(&a)?;
        for v in [b.lower, b.upper, exact, single.sum_of_norms()] {
            worst = worst.max((v - oracle).abs());
        }
    }
    Ok((worst <= 1e-6, format!("max deviation from sup|log d| {worst:.2e} over 100 diagonals")))
}

fn rel_checks(seed: u64) -> CliResult<(bool, String)> {
    let base = EstimateOptions {
        budget: light_budget(),
        ..EstimateOptions::with_seed(seed)
    };
    let results: Vec<CliResult<(bool, bool)>> = (0..500)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, 5, i);
            let n = 2 + i % 3;
            let rx = sample::uniform::<f64, _>(&mut rng, 0.0, 1.0);
            let ry = sample::uniform::<f64, _>(&mut rng, 0.0, 1.0);
            let x = sample::lie_element(&mut rng, &Algebra::Complex, n, GroupTag::GL, rx);
            let y = sample::lie_element(&mut rng, &Algebra::Complex, n, GroupTag::GL, ry);
            let g = GroupElement::new_unchecked(&x.exp()? * &y.exp()?, GroupTag::GL);
            let sum = (&x + &y).op_norm();
            let pool = vec![FactorizationCertificate::new(vec![x, y], g.clone(), LieNorm::OperatorL1)?];
            let opts = EstimateOptions { pool, ..base.clone() };
            let r = rel_estimate(&g, &opts)?;
            Ok((r.value <= r.el_upper, r.value <= sum + 1e-9))
        })
        .collect();
    let (mut above_el, mut above_sum) = (0, 0);
    for r in results {
        let (a, b) = r?;
        above_el += usize::from(!a);
        above_sum += usize::from(!b);
    }
    Ok((
        above_el == 0 && above_sum == 0,
        format!("500 pairs: {above_el} with rel > el, {above_sum} with rel > ||X+Y|| + 1e-9"),
    ))
}

fn trotter(seed: u64) -> CliResult<(bool, String)> {
    let ns: Vec<u64> = (4..=9).map(|k| 1u64 << k).collect();
    let results: Vec<CliResult<(usize, usize, f64, f64)>> = (0..50)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, 6, i);
            let n = 2 + i % 3;
            let rx = sample::uniform::<f64, _>(&mut rng, 0.1, 1.0);
            let ry = sample::uniform::<f64, _>(&mut rng, 0.1, 1.0);
            let x = sample::lie_element(&mut rng, &Algebra::Complex, n, GroupTag::GL, rx);
            let y = sample::lie_element(&mut rng, &Algebra::Complex, n, GroupTag::GL, ry);
            // Telescoping bound n * err(n) <= ||[X,Y]|| e^{||X|| + ||Y||} / 2.
            let bound = 0.5 * x.commutator(&y).op_norm() * (x.op_norm() + y.op_norm()).exp();
            let errs = ns.iter().map(|&k| Ok(trotter_check(&x, &y, k)?.product)).collect::<CliResult<Vec<f64>>>()?;
            let unbounded = ns.iter().zip(&errs).filter(|(&k, &e)| k as f64 * e > bound).count();
            let mut bad_ratio = 0;
            let (mut lo, mut hi) = (f64::INFINITY, 0f64);
            for w in 0..ns.len() - 1 {
                if ns[w] >= 64 {
                    let r = errs[w] / errs[w + 1];
                    lo = lo.min(r);
                    hi = hi.max(r);
                    bad_ratio += usize::from(!(1.5..=3.0).contains(&r));
                }
            }
            Ok((unbounded, bad_ratio, lo, hi))
        })
        .collect();
    let (mut unbounded, mut bad_ratio, mut lo, mut hi) = (0, 0, f64::INFINITY, 0f64);
    for r in results {
        let (u, b, l, h) = r?;
        unbounded += u;
        bad_ratio += b;
        lo = lo.min(l);
        hi = hi.max(h);
    }
    Ok((
        unbounded == 0 && bad_ratio == 0,
        format!("50 pairs: {unbounded} bound violations, {bad_ratio} ratios outside [1.5, 3] (range {lo:.3}..{hi:.3})"),
    ))
}

fn random_p_unitary(rng: &mut SeededRng, ctx: &SchattenContext<f64>) -> CliResult<PUnitary<f64>> {
    let a = sample::hermitian::<f64, _>(rng, ctx.dim(), PI);
    Ok(PUnitary::exp_i(ctx, &a)?)
}

fn chains(seed: u64) -> CliResult<(bool, String)> {
    let deltas = [0.25, 0.5, 1.0];
    let results: Vec<CliResult<bool>> = (0..200)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, 7, i);
            let dim = [4, 8][i % 2];
            let p = [1.0, 2.0][(i / 2) % 2];
            let ctx = SchattenContext::new(dim, p)?;
            let u = random_p_unitary(&mut rng, &ctx)?;
            let d = u.distance_to_identity()?;
            let delta = deltas[i % deltas.len()];
            let big = d + sample::uniform::<f64, _>(&mut rng, 0.1, 2.0);
            let chain = coarse_proper_chain(&u, big, delta)?;
            let k_limit = (2.0 * big / delta).floor() as usize + (PI / delta).floor() as usize + 2;
            // Recompute every step and the endpoint from the raw matrices.
            let mut ok = chain.len() <= k_limit && chain.points.len() == chain.len() + 1;
            for w in chain.points.windows(2) {
                ok &= p_norm(&(w[1].matrix() - w[0].matrix()), &ctx)? < delta;
            }
            ok &= p_norm(&(chain.points.last().expect("endpoint").matrix() - u.matrix()), &ctx)? <= 1e-12;
            let geo = geodesic_chain(&u)?;
            let mut total = 0.0;
            let mut max_step = 0f64;
            for w in geo.chain.points.windows(2) {
                let s = p_norm(&(w[1].matrix() - w[0].matrix()), &ctx)?;
                total += s;
                max_step = max_step.max(s);
            }
            let slack = 1e-9 * (1.0 + d);
            ok &= geo.holds && geo.constant == 2.0 && max_step <= 2.0 + slack && total <= 2.0 * d + slack;
            Ok(ok)
        })
        .collect();
    let mut failed = 0;
    for r in results {
        failed += usize::from(!r?);
    }
    Ok((failed == 0, format!("{failed}/200 unitaries without both chains")))
}

fn haagerup(seed: u64) -> CliResult<(bool, String)> {
    let ctx = SchattenContext::new(6, 2.0)?;
    let mut rng = stream(seed, 8, 0);
    let mut gs = vec![PUnitary::identity(&ctx)];
    for _ in 0..50 {
        gs.push(random_p_unitary(&mut rng, &ctx)?);
    }
    let mut min_eig = f64::INFINITY;
    for n in [1, 10] {
        let w = haagerup_witness(&gs[1..], n)?;
        // Independent smallest eigenvalue of the same kernel.
        let gram = nalgebra::DMatrix::from_fn(50, 50, |i, j| {
            let d = p_norm(&(cocycle(&gs[i + 1].inverse().compose(&gs[j + 1]))), &ctx).expect("shape");
            (-(d * d) / n as f64).exp()
        });
        let gram = (&gram + gram.transpose()) * 0.5;
        let direct = SymmetricEigen::new(gram).eigenvalues.min();
        min_eig = min_eig.min(w.min_eigenvalue).min(direct);
    }
    let residual = (0..1000)
        .map(|i| {
            let mut r = stream(seed, 8, 1 + i);
            let u = random_p_unitary(&mut r, &ctx)?;
            let v = random_p_unitary(&mut r, &ctx)?;
            Ok(cocycle_residual(&u, &v)?)
        })
        .collect::<CliResult<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let m = gs.len();
    let domain = SampledSpace::indexed(m, 0, |i, j| gs[i].distance(&gs[j]).expect("shape"))?;
    let codomain = SampledSpace::indexed(m, 0, |i, j| p_norm(&(cocycle(&gs[i]) - cocycle(&gs[j])), &ctx).expect("shape"))?;
    let fit = fit_quasi_isometry(&CoarseMapSample::new(domain, codomain, (0..m).collect())?)?;
    let passed = min_eig >= -1e-8 && residual <= 1e-10 && fit.k == 1.0 && fit.l == 0.0;
    Ok((
        passed,
        format!("min eigenvalue {min_eig:.2e}; cocycle residual {residual:.2e}; fit (K, L) = ({}, {})", fit.k, fit.l),
    ))
}

fn unit_payload(rng: &mut SeededRng, alg: &Algebra) -> AlgebraElement<f64> {
    let m = sample::matrix::<f64, _>(rng, alg, 1);
    let a = m.entry(0, 0);
    let norm = a.norm();
    if norm > 0.0 {
        a.scale(c(1.0 / norm, 0.0))
    } else {
        a
    }
}

fn identities(seed: u64) -> CliResult<(bool, String)> {
    const TOL: f64 = 1e-12;
    let algebras = [
        Algebra::Complex,
        Algebra::Matrix { k: 2 },
        Algebra::functions(DiscretizedSpace::path(3)?),
    ];
    let n = 3;
    let mut worst = 0f64;
    for i in 0..500 {
        let mut rng = stream(seed, 9, i);
        let alg = &algebras[i % algebras.len()];
        let a = unit_payload(&mut rng, alg);
        let b = unit_payload(&mut rng, alg);
        let (p, q) = [(0, 1), (1, 2), (0, 2), (2, 0)][i % 4];
        let r = bracket_identities_check(&a, &b, n, p, q)?;
        let (diag, corner) = (r.diagonal, r.corner);
        worst = worst.max(diag).max(corner);
    }
    let mut worst_trip = 0f64;
    for i in 0..500 {
        let mut rng = stream(seed, 9, 500 + i);
        let alg = &algebras[i % algebras.len()];
        let x = GroupTag::SL.project(&sample::matrix::<f64, _>(&mut rng, alg, n));
        let x = x.scale_real(1.0 / x.op_norm().max(1e-300));
        let d = traceless_decompose(&x)?;
        worst_trip = worst_trip.max((&d.rebuild() - &x).op_norm());
    }
    Ok((
        worst <= TOL && worst_trip <= TOL,
        format!("bracket residual {worst:.2e}, decomposition round trip {worst_trip:.2e} over 500 payloads"),
    ))
}

fn determinant(seed: u64) -> CliResult<(bool, String)> {
    let alg = Algebra::Complex;
    let ctx = HsDeterminantContext::<f64>::new(&alg);
    let tol = Tolerance::new(1e-8, 1e-8);
    let mut worst_inv = 0f64;
    let mut worst_det = 0f64;
    for i in 0..100 {
        let mut rng = stream(seed, 10, i);
        let x1 = sample::lie_element(&mut rng, &alg, 2, GroupTag::GL, 1.5);
        let x2 = sample::lie_element(&mut rng, &alg, 2, GroupTag::GL, 1.5);
        let g = GroupElement::new_unchecked(&x1.exp()? * &x2.exp()?, GroupTag::GL);
        let a = FactorizationCertificate::new(vec![x1, x2], g.clone(), LieNorm::OperatorL1)?;
        let b = FactorizationCertificate::new(lie_factorization(&g, Tolerance::new(1e-10, 1e-10))?, g.clone(), LieNorm::OperatorL1)?;
        let da = hs_determinant(&a, &ctx, tol)?;
        let db = hs_determinant(&b, &ctx, tol)?;
        let diff: Vec<_> = da.raw.iter().zip(&db.raw).map(|(p, q)| p - q).collect();
        worst_inv = worst_inv.max(ctx.distance_to_lattice(&diff));
        // log det g agrees with the trace sum modulo 2 pi i.
        let det = g.matrix().blocks()[0].determinant();
        let off = vec![da.raw[0] - c(det.norm().ln(), det.arg())];
        worst_det = worst_det.max(ctx.distance_to_lattice(&off));
    }
    let mut worst_word = 0f64;
    for i in 0..100 {
        let mut rng = stream(seed, 10, 100 + i);
        let len = rng.random_range(1..=6usize);
        let word = (0..len)
            .map(|_| {
                let p = rng.random_range(0..2usize);
                let z = sample::complex_uniform_disc::<f64, _>(&mut rng, 2.0);
                ElementaryGenerator::elementary(2, p, 1 - p, AlgebraElement::scalar(&alg, z))
            })
            .collect::<lielength::Result<Vec<_>>>()?;
        let cert = word_certificate(&alg, 2, &word, LieNorm::OperatorL1)?;
        let d = hs_determinant(&cert, &ctx, tol)?;
        worst_word = worst_word.max(ctx.distance_to_lattice(&d.raw));
    }
    let passed = worst_inv <= 1e-8 && worst_det <= 1e-8 && worst_word <= 1e-8;
    Ok((
        passed,
        format!("invariance {worst_inv:.2e}, against log det {worst_det:.2e}, elementary words {worst_word:.2e}"),
    ))
}

fn unbounded() -> CliResult<(bool, String)> {
    let mut detail = Vec::new();
    let mut passed = true;
    for m in [1u64, 10, 100, 1_000_000] {
        let b = unboundedness_witness::<f64>(m, &Algebra::Complex, 2)?;
        let expected = (m as f64 + 1.0).ln();
        passed &= b.lower == expected && b.lower <= b.upper;
        if m == 1_000_000 {
            passed &= b.lower > 13.0;
        }
        detail.push(format!("m={m}: lower {:.6}", b.lower));
    }
    Ok((passed, detail.join(", ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_oracle_matches_simple_cases() {
        let u = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(-1.0, 0.0), c(0.0, 1.0)]));
        assert!((unitary_angle_oracle(&u) - PI).abs() < 1e-12);
        assert_eq!(unitary_angle_oracle(&CMatrix::identity(3, 3)), 0.0);
    }

    #[test]
    fn unbounded_is_exact() {
        assert!(unbounded().unwrap().0);
    }
}
