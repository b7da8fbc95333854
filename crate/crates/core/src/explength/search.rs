use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{el_exact_unitary, el_lower_bound};
use super::certificate::{ElBracket, FactorizationCertificate, LowerMethod};
use crate::algebra::Algebra;
use crate::elementary::lie_factorization;
use crate::error::{Error, Result};
use crate::matrix::{mat_log_with, GroupElement, GroupTag, LieNorm, MatrixOverAlgebra};
use crate::sample::{self, SeededRng};
use crate::scalar::{Scalar, Tolerance};

/// Iteration and factor caps for the factorization search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchBudget {
    pub restarts: usize,
    pub sweeps: usize,
    /// Random directions tried per interior point and sweep.
    pub directions: usize,
    /// Factor count the initial path is refined to.
    pub factors: usize,
    /// Largest number of halvings of a single factor.
    pub max_subdivision: u32,
    pub initial_step: f64,
    pub min_step: f64,
    /// Size of the random kick applied to interior points on restarts.
    pub perturbation: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            restarts: 3,
            sweeps: 20,
            directions: 4,
            factors: 4,
            max_subdivision: 16,
            initial_step: 0.25,
            min_step: 1e-4,
            perturbation: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EstimateOptions<T: Scalar> {
    pub budget: SearchBudget,
    pub seed: u64,
    /// Lie algebra norm; `None` takes the group's default.
    pub norm: Option<LieNorm>,
    /// Accepted residual of the returned certificate.
    pub tol: Tolerance<T>,
    /// Known certificates for the same target, used as extra starting points.
    pub pool: Vec<FactorizationCertificate<T>>,
}

impl<T: Scalar> Default for EstimateOptions<T> {
    fn default() -> Self {
        Self {
            budget: SearchBudget::default(),
            seed: 0,
            norm: None,
            tol: Tolerance::new(T::lit(1e-8), T::lit(1e-8)),
            pool: Vec::new(),
        }
    }
}

impl<T: Scalar> EstimateOptions<T> {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelEstimate<T: Scalar> {
    /// Smallest `||X_1 + ... + X_k||` found.
    pub value: T,
    pub certificate: FactorizationCertificate<T>,
    /// Upper end of the el bracket computed on the same pool.
    pub el_upper: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Objective {
    SumOfNorms,
    NormOfSum,
}

/// Bracket `[lower, upper]` for `el(g)`.
///
/// The upper end comes from a coordinate descent over the interior points
/// `h_1, ..., h_{k-1}` of a factorization path `1 = h_0, ..., h_k = g`,
/// with factors `X_i = log(h_{i-1}^{-1} h_i)`. Restarts run in parallel and
/// are reduced in a fixed order, so results depend only on the seed.
pub fn el_estimate<T: Scalar>(g: &GroupElement<T>, opts: &EstimateOptions<T>) -> Result<ElBracket<T>> {
    let norm = opts.norm.unwrap_or_else(|| g.tag().default_norm());
    let cert = search(g, opts, norm, Objective::SumOfNorms, &[])?;
    let closed = g.tag().is_unitary()
        && norm == LieNorm::Spectral
        && !matches!(g.algebra(), Algebra::Real | Algebra::Matrix { .. });
    if closed {
        ElBracket::new(el_exact_unitary(g)?, cert, LowerMethod::ClosedForm)
    } else {
        ElBracket::new(el_lower_bound(g, norm), cert, LowerMethod::LogOpNorm)
    }
}

/// Upper bound for `rel(g)`, never larger than the certificate behind the el
/// upper bound on the same pool.
pub fn rel_estimate<T: Scalar>(g: &GroupElement<T>, opts: &EstimateOptions<T>) -> Result<RelEstimate<T>> {
    let norm = opts.norm.unwrap_or_else(|| g.tag().default_norm());
    let el = search(g, opts, norm, Objective::SumOfNorms, &[])?;
    let rel = search(g, opts, norm, Objective::NormOfSum, std::slice::from_ref(&el))?;
    let el_upper = el.sum_of_norms();
    let certificate = if el.norm_of_sum() <= rel.norm_of_sum() { el } else { rel };
    Ok(RelEstimate {
        value: certificate.norm_of_sum(),
        certificate,
        el_upper,
    })
}

struct Start<T: Scalar> {
    factors: Vec<MatrixOverAlgebra<T>>,
    kick: Option<u64>,
}

fn search<T: Scalar>(
    g: &GroupElement<T>,
    opts: &EstimateOptions<T>,
    norm: LieNorm,
    objective: Objective,
    extra: &[FactorizationCertificate<T>],
) -> Result<FactorizationCertificate<T>> {
    let budget = &opts.budget;
    let scale = T::one() + g.op_norm();
    let accept = opts.tol.at(scale);
    let raw = initial_factors(g, opts.tol)?;
    let init = subdivide(raw.clone(), norm, budget)?;

    let mut starts = Vec::new();
    for r in 0..budget.restarts.max(1) {
        starts.push(Start {
            factors: init.clone(),
            kick: (r > 0).then_some(r as u64),
        });
    }
    for c in opts.pool.iter().chain(extra) {
        if (c.target().matrix() - g.matrix()).op_norm() > accept {
            return Err(Error::Precondition("pool certificate has a different target".into()));
        }
        starts.push(Start {
            factors: subdivide(c.factors().to_vec(), norm, budget)?,
            kick: None,
        });
    }

    let tag = g.tag();
    let results: Vec<Option<Vec<MatrixOverAlgebra<T>>>> = starts
        .par_iter()
        .enumerate()
        .map(|(idx, s)| {
            let mut rng = sample::rng_stream(opts.seed, idx as u64);
            let mut path = Path::new(&s.factors, tag, norm)?;
            if s.kick.is_some() {
                path.perturb(&mut rng, budget.perturbation);
            }
            path.descend(&mut rng, budget, objective);
            Some(path.factors)
        })
        .collect();

    // The unrefined start goes first so that rounding in the refined paths
    // cannot undercut it without a real improvement.
    let mut candidates = vec![FactorizationCertificate::new(raw, g.clone(), norm)?];
    candidates.extend(opts.pool.iter().chain(extra).cloned());
    for factors in results.into_iter().flatten() {
        candidates.push(FactorizationCertificate::new(factors, g.clone(), norm)?);
    }
    let value = |c: &FactorizationCertificate<T>| match objective {
        Objective::SumOfNorms => c.sum_of_norms(),
        Objective::NormOfSum => c.norm_of_sum(),
    };
    let mut best: Option<FactorizationCertificate<T>> = None;
    for c in candidates {
        let c = if c.norm() == norm { c } else { c.renormed(norm)? };
        if c.residual() > accept {
            continue;
        }
        if best.as_ref().is_none_or(|b| value(&c) < value(b) - T::lit(1e-12) * (T::one() + value(b))) {
            best = Some(c);
        }
    }
    best.ok_or_else(|| Error::NoFactorization("no candidate met the residual tolerance".into()))
}

fn initial_factors<T: Scalar>(g: &GroupElement<T>, tol: Tolerance<T>) -> Result<Vec<MatrixOverAlgebra<T>>> {
    match mat_log_with(g, tol) {
        Ok(x) if g.tag().contains_lie(&x, T::lit(1e-9)) => Ok(vec![x]),
        _ if g.tag().is_unitary() => Err(Error::NoFactorization("unitary without an admissible logarithm".into())),
        _ => lie_factorization(g, tol).map_err(|e| match e {
            Error::NoFactorization(m) => Error::NoFactorization(m),
            other => Error::NoFactorization(other.to_string()),
        }),
    }
}

/// Halves factors until every one is small enough for its exponential to
/// stay in the principal log domain, then splits the largest ones until the
/// factor budget is met.
fn subdivide<T: Scalar>(
    factors: Vec<MatrixOverAlgebra<T>>,
    norm: LieNorm,
    budget: &SearchBudget,
) -> Result<Vec<MatrixOverAlgebra<T>>> {
    let radius = T::lit(3.0);
    let mut out = Vec::new();
    for x in factors {
        let size = x.op_norm().max(x.norm(norm));
        let mut halvings = 0u32;
        while size / T::lit(2f64.powi(halvings as i32)) >= radius {
            halvings += 1;
            if halvings > budget.max_subdivision {
                return Err(Error::NoFactorization(format!(
                    "factor of norm {} needs more than {} halvings",
                    size.to_f64_lossy(),
                    budget.max_subdivision
                )));
            }
        }
        let m = 1usize << halvings;
        let piece = x.scale_real(T::lit(1.0 / m as f64));
        out.extend(std::iter::repeat_n(piece, m));
    }
    while out.len() < budget.factors {
        let (idx, size) = out
            .iter()
            .enumerate()
            .map(|(i, x)| (i, x.norm(norm)))
            .fold((0, T::zero()), |a, b| if b.1 > a.1 { b } else { a });
        if size == T::zero() {
            break;
        }
        let half = out[idx].scale_real(T::lit(0.5));
        out[idx] = half.clone();
        out.insert(idx + 1, half);
    }
    Ok(out)
}

struct Path<T: Scalar> {
    tag: GroupTag,
    norm: LieNorm,
    points: Vec<MatrixOverAlgebra<T>>,
    factors: Vec<MatrixOverAlgebra<T>>,
    norms: Vec<T>,
    sum: MatrixOverAlgebra<T>,
}

impl<T: Scalar> Path<T> {
    fn new(factors: &[MatrixOverAlgebra<T>], tag: GroupTag, norm: LieNorm) -> Option<Self> {
        let first = factors.first()?;
        let alg = first.algebra().clone();
        let n = first.n();
        let mut points = vec![MatrixOverAlgebra::identity(&alg, n)];
        let mut sum = MatrixOverAlgebra::zeros(&alg, n);
        for x in factors {
            let next = points.last().expect("nonempty") * &x.exp().ok()?;
            points.push(next);
            sum = &sum + x;
        }
        Some(Self {
            tag,
            norm,
            points,
            norms: factors.iter().map(|x| x.norm(norm)).collect(),
            factors: factors.to_vec(),
            sum,
        })
    }

    fn inverse(&self, m: &MatrixOverAlgebra<T>) -> Option<MatrixOverAlgebra<T>> {
        if self.tag.is_unitary() {
            Some(m.adjoint())
        } else {
            m.try_inverse()
        }
    }

    /// `log(a^{-1} b)`, provided it lies in the Lie algebra of the group.
    fn step_log(&self, a: &MatrixOverAlgebra<T>, b: &MatrixOverAlgebra<T>) -> Option<MatrixOverAlgebra<T>> {
        let q = &self.inverse(a)? * b;
        let l = q.log(T::lit(1e-9)).ok()?;
        let l = if self.tag.is_unitary() { self.tag.project(&l) } else { l };
        self.tag.contains_lie(&l, T::lit(1e-9)).then_some(l)
    }

    fn objective(&self, objective: Objective) -> T {
        match objective {
            Objective::SumOfNorms => self.norms.iter().fold(T::zero(), |a, &b| a + b),
            Objective::NormOfSum => self.sum.norm(self.norm),
        }
    }

    /// Proposal for moving interior point `i` to `h`: the two new factors.
    fn propose(&self, i: usize, h: &MatrixOverAlgebra<T>) -> Option<(MatrixOverAlgebra<T>, MatrixOverAlgebra<T>)> {
        let left = self.step_log(&self.points[i - 1], h)?;
        let right = self.step_log(h, &self.points[i + 1])?;
        Some((left, right))
    }

    fn accept(&mut self, i: usize, h: MatrixOverAlgebra<T>, left: MatrixOverAlgebra<T>, right: MatrixOverAlgebra<T>) {
        self.sum = &(&(&self.sum - &self.factors[i - 1]) - &self.factors[i]) + &(&left + &right);
        self.norms[i - 1] = left.norm(self.norm);
        self.norms[i] = right.norm(self.norm);
        self.factors[i - 1] = left;
        self.factors[i] = right;
        self.points[i] = h;
    }

    fn candidate_value(&self, objective: Objective, i: usize, left: &MatrixOverAlgebra<T>, right: &MatrixOverAlgebra<T>) -> T {
        match objective {
            Objective::SumOfNorms => {
                self.objective(objective) - self.norms[i - 1] - self.norms[i] + left.norm(self.norm) + right.norm(self.norm)
            }
            Objective::NormOfSum => {
                let s = &(&(&self.sum - &self.factors[i - 1]) - &self.factors[i]) + &(left + right);
                s.norm(self.norm)
            }
        }
    }

    fn direction(&self, rng: &mut SeededRng) -> MatrixOverAlgebra<T> {
        let p = &self.points[0];
        sample::lie_element(rng, p.algebra(), p.n(), self.tag, T::one())
    }

    fn perturb(&mut self, rng: &mut SeededRng, amount: f64) {
        let k = self.factors.len();
        let mean = self.norms.iter().fold(T::zero(), |a, &b| a + b) / T::from_usize_lossy(k.max(1));
        let size = T::lit(amount) * (T::one() + mean);
        for i in 1..k {
            let d = self.direction(rng).scale_real(size);
            let Ok(e) = d.exp() else { continue };
            let h = &self.points[i] * &e;
            if let Some((l, r)) = self.propose(i, &h) {
                self.accept(i, h, l, r);
            }
        }
    }

    fn descend(&mut self, rng: &mut SeededRng, budget: &SearchBudget, objective: Objective) {
        let k = self.factors.len();
        if k < 2 {
            return;
        }
        let mut step = T::lit(budget.initial_step);
        let min_step = T::lit(budget.min_step);
        for _ in 0..budget.sweeps {
            let mut improved = false;
            for i in 1..k {
                for _ in 0..budget.directions {
                    let d = self.direction(rng);
                    let current = self.objective(objective);
                    for sign in [T::one(), -T::one()] {
                        let Ok(e) = d.scale_real(sign * step).exp() else { continue };
                        let h = &self.points[i] * &e;
                        let Some((l, r)) = self.propose(i, &h) else { continue };
                        let value = self.candidate_value(objective, i, &l, &r);
                        if value < current - T::lit(1e-12) * (T::one() + current) {
                            self.accept(i, h, l, r);
                            improved = true;
                            break;
                        }
                    }
                }
            }
            if !improved {
                step *= T::lit(0.5);
                if step < min_step {
                    break;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::mat_exp;
    use crate::scalar::c;
    use crate::linalg::CMatrix;

    fn complex(n: usize, v: &[(f64, f64)]) -> MatrixOverAlgebra<f64> {
        let v: Vec<_> = v.iter().map(|&(a, b)| c(a, b)).collect();
        MatrixOverAlgebra::from_complex(&Algebra::Complex, CMatrix::from_row_slice(n, n, &v)).unwrap()
    }

    #[test]
    fn small_exponential_is_bounded_by_its_log() {
        let x = complex(2, &[(0.1, 0.05), (0.2, 0.0), (-0.1, 0.0), (0.0, -0.02)]);
        let g = mat_exp(&x).unwrap();
        let b = el_estimate(&g, &EstimateOptions::default()).unwrap();
        assert!(b.upper <= x.op_norm() + 1e-9);
        assert!(b.lower <= b.upper);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut rng = sample::rng(3);
        let g = sample::gl_element::<f64, _>(&mut rng, &Algebra::Complex, 3, 1.5);
        let a = el_estimate(&g, &EstimateOptions::with_seed(9)).unwrap();
        let b = el_estimate(&g, &EstimateOptions::with_seed(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unitary_upper_matches_closed_form() {
        let mut rng = sample::rng(5);
        for n in [2, 4] {
            let u = sample::unitary::<f64, _>(&mut rng, n);
            let b = el_estimate(&u, &EstimateOptions::default()).unwrap();
            assert_eq!(b.lower_method, LowerMethod::ClosedForm);
            assert!(b.upper >= b.lower && b.upper <= 1.05 * b.lower + 1e-6, "{} {}", b.lower, b.upper);
        }
    }

    #[test]
    fn diagonal_times_elementary_fixture() {
        let e = std::f64::consts::E;
        let g = &complex(2, &[(e, 0.), (0., 0.), (0., 0.), (1. / e, 0.)]) * &complex(2, &[(1., 0.), (1., 0.), (0., 0.), (1., 0.)]);
        let g = GroupElement::new(g, GroupTag::SL).unwrap();
        let b = el_estimate(&g, &EstimateOptions::default()).unwrap();
        assert!(b.lower.is_finite() && b.upper.is_finite() && b.lower <= b.upper);
        // g = [[e, e], [0, 1/e]] has column sums e, e + 1/e; g^{-1} = [[1/e, -e], [0, e]] has 1/e, 2e.
        assert!((b.lower - (2. * e).ln()).abs() < 1e-12);
        // Regression fixture for the default budget and seed.
        assert!((b.upper - 2.0659864441946816).abs() < 1e-9);
    }

    #[test]
    fn cut_spectrum_falls_back_to_elementary_path() {
        let g = GroupElement::new(complex(2, &[(-2., 0.), (1., 0.), (0., 0.), (-0.5, 0.)]), GroupTag::SL).unwrap();
        let b = el_estimate(&g, &EstimateOptions::default()).unwrap();
        assert!(b.certificate.residual() < 1e-8);
        assert!(b.lower <= b.upper);
        for x in b.certificate.factors() {
            assert!(GroupTag::SL.contains_lie(x, 1e-9));
        }
    }

    #[test]
    fn rel_of_commutator_word_vanishes_with_pool() {
        let x = complex(2, &[(0.3, 0.), (0.1, 0.), (0.0, 0.2), (-0.3, 0.)]);
        let y = complex(2, &[(0.0, 0.), (0.4, 0.1), (0.2, 0.), (0.0, 0.)]);
        let factors = vec![x.clone(), y.clone(), -&x, -&y];
        let g = factors
            .iter()
            .fold(MatrixOverAlgebra::identity(&Algebra::Complex, 2), |a, f| &a * &f.exp().unwrap());
        let g = GroupElement::new_unchecked(g, GroupTag::GL);
        let cert = FactorizationCertificate::new(factors, g.clone(), LieNorm::OperatorL1).unwrap();
        assert!(cert.norm_of_sum() <= 1e-15);
        let opts = EstimateOptions {
            pool: vec![cert],
            ..EstimateOptions::default()
        };
        let r = rel_estimate(&g, &opts).unwrap();
        assert!(r.value <= 1e-6);
        assert!(r.value <= r.el_upper);
    }

    #[test]
    fn rel_of_two_exponentials() {
        let mut rng = sample::rng(12);
        for _ in 0..5 {
            let x = sample::lie_element::<f64, _>(&mut rng, &Algebra::Complex, 3, GroupTag::GL, 0.7);
            let y = sample::lie_element::<f64, _>(&mut rng, &Algebra::Complex, 3, GroupTag::GL, 0.7);
            let g = mat_exp(&x).unwrap().compose(&mat_exp(&y).unwrap());
            let cert = FactorizationCertificate::new(vec![x.clone(), y.clone()], g.clone(), LieNorm::OperatorL1).unwrap();
            let opts = EstimateOptions {
                pool: vec![cert],
                ..EstimateOptions::default()
            };
            let r = rel_estimate(&g, &opts).unwrap();
            assert!(r.value <= (&x + &y).op_norm() + 1e-9);
            let el = el_estimate(&g, &opts).unwrap();
            assert!(r.value <= el.upper);
        }
    }

    #[test]
    fn certificate_inverse_and_concat() {
        let mut rng = sample::rng(21);
        let g = sample::gl_element::<f64, _>(&mut rng, &Algebra::Complex, 2, 0.8);
        let h = sample::gl_element::<f64, _>(&mut rng, &Algebra::Complex, 2, 0.8);
        let bg = el_estimate(&g, &EstimateOptions::default()).unwrap();
        let bh = el_estimate(&h, &EstimateOptions::default()).unwrap();
        let inv = bg.certificate.inverse().unwrap();
        assert!((inv.sum_of_norms() - bg.upper).abs() < 1e-12);
        assert!(inv.residual() < 1e-8);
        let gh = bg.certificate.concat(&bh.certificate).unwrap();
        assert!(gh.sum_of_norms() <= bg.upper + bh.upper + 1e-12);
        assert!(gh.residual() < 1e-8);
        let json = serde_json::to_string(&gh).unwrap();
        let back: FactorizationCertificate<f64> = serde_json::from_str(&json).unwrap();
        assert!((back.sum_of_norms() - gh.sum_of_norms()).abs() < 1e-12);
    }

    #[test]
    fn huge_factor_exceeds_subdivision_budget() {
        let x = complex(1, &[(1e9, 0.)]);
        let budget = SearchBudget {
            max_subdivision: 4,
            ..SearchBudget::default()
        };
        assert!(matches!(subdivide(vec![x], LieNorm::OperatorL1, &budget), Err(Error::NoFactorization(_))));
    }
}
