//! Elementary matrices over a Banach algebra and the structure around them:
//! Lie bracket identities, the trace-zero span decomposition, the
//! de la Harpe–Skandalis determinant, conjugation contractions, and
//! unboundedness witnesses for `E_n(A)`.
//!
//! Indices are zero-based in the API and one-based in the JSON word format.

use nalgebra::{Complex, ComplexField, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{Algebra, AlgebraElement};
use crate::error::{Error, Result};
use crate::explength::{ElBracket, FactorizationCertificate, LowerMethod};
use crate::io::{element_from_json, element_to_json};
use crate::linalg::{self, CMatrix};
use crate::matrix::{GroupElement, GroupTag, LieNorm, MatrixOverAlgebra};
use crate::scalar::{c, creal, Scalar, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// Group element `E_{i,j}(a) = 1 + a e_{ij}`.
    #[serde(rename = "E")]
    Elementary,
    /// Lie element `e_{i,j}(a)`: `a` at `(i, j)`.
    #[serde(rename = "e")]
    OffDiagonal,
    /// Lie element `f_{i,j}(a)`: `a` at `(i, i)`, `-a` at `(j, j)`.
    #[serde(rename = "f")]
    Diagonal,
    /// Lie element `g(a)`: `a` at `(n, n)`, with `a` in `[A, A]`.
    #[serde(rename = "g")]
    Corner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryGenerator<T: Scalar> {
    pub kind: GeneratorKind,
    pub n: usize,
    pub i: usize,
    pub j: usize,
    pub payload: AlgebraElement<T>,
}

/// `e_{i,j}(a)`.
pub fn e_lie<T: Scalar>(n: usize, i: usize, j: usize, a: &AlgebraElement<T>) -> MatrixOverAlgebra<T> {
    let mut x = MatrixOverAlgebra::zeros(a.algebra(), n);
    x.set_entry(i, j, a).expect("index in range");
    x
}

/// `E_{i,j}(a) = 1 + e_{i,j}(a)`.
pub fn elementary_matrix<T: Scalar>(n: usize, i: usize, j: usize, a: &AlgebraElement<T>) -> MatrixOverAlgebra<T> {
    &MatrixOverAlgebra::identity(a.algebra(), n) + &e_lie(n, i, j, a)
}

/// `f_{i,j}(a)`.
pub fn f_lie<T: Scalar>(n: usize, i: usize, j: usize, a: &AlgebraElement<T>) -> MatrixOverAlgebra<T> {
    let mut x = MatrixOverAlgebra::zeros(a.algebra(), n);
    x.set_entry(i, i, a).expect("index in range");
    x.set_entry(j, j, &-a).expect("index in range");
    x
}

/// `g(a)`: `a` in the bottom-right corner.
pub fn g_lie<T: Scalar>(n: usize, a: &AlgebraElement<T>) -> MatrixOverAlgebra<T> {
    let mut x = MatrixOverAlgebra::zeros(a.algebra(), n);
    x.set_entry(n - 1, n - 1, a).expect("index in range");
    x
}

impl<T: Scalar> ElementaryGenerator<T> {
    pub fn new(kind: GeneratorKind, n: usize, i: usize, j: usize, payload: AlgebraElement<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Shape("generators need n >= 1".into()));
        }
        match kind {
            GeneratorKind::Corner => {
                if !payload.in_commutator_span(T::lit(1e-10) * (T::one() + payload.norm())) {
                    return Err(Error::Precondition(
                        "corner generator payload must lie in the commutator span [A, A]".into(),
                    ));
                }
            }
            _ => {
                if i >= n || j >= n || i == j {
                    return Err(Error::Shape(format!("off-diagonal index ({i}, {j}) invalid for n = {n}")));
                }
            }
        }
        let (i, j) = if kind == GeneratorKind::Corner { (n - 1, n - 1) } else { (i, j) };
        Ok(Self { kind, n, i, j, payload })
    }

    pub fn elementary(n: usize, i: usize, j: usize, a: AlgebraElement<T>) -> Result<Self> {
        Self::new(GeneratorKind::Elementary, n, i, j, a)
    }

    /// The Lie algebra element whose exponential is this generator's matrix.
    pub fn lie_element(&self) -> MatrixOverAlgebra<T> {
        match self.kind {
            GeneratorKind::Elementary | GeneratorKind::OffDiagonal => e_lie(self.n, self.i, self.j, &self.payload),
            GeneratorKind::Diagonal => f_lie(self.n, self.i, self.j, &self.payload),
            GeneratorKind::Corner => g_lie(self.n, &self.payload),
        }
    }

    /// Group matrix: `E_{i,j}(a)` itself, or the exponential of a Lie generator.
    pub fn matrix(&self) -> Result<MatrixOverAlgebra<T>> {
        match self.kind {
            GeneratorKind::Elementary | GeneratorKind::OffDiagonal => {
                Ok(elementary_matrix(self.n, self.i, self.j, &self.payload))
            }
            _ => self.lie_element().exp(),
        }
    }
}

/// Product of the generator matrices, tagged `En`.
pub fn elementary_product<T: Scalar>(
    algebra: &Algebra,
    n: usize,
    word: &[ElementaryGenerator<T>],
) -> Result<GroupElement<T>> {
    let mut acc = MatrixOverAlgebra::identity(algebra, n);
    for g in word {
        algebra.check_same(g.payload.algebra())?;
        if g.n != n {
            return Err(Error::Shape(format!("generator of size {} in a word of size {n}", g.n)));
        }
        acc = &acc * &g.matrix()?;
    }
    Ok(GroupElement::new_unchecked(acc, GroupTag::En))
}

/// Certificate `exp(X_1) ... exp(X_k)` for a word, with `X_i` the Lie generators.
pub fn word_certificate<T: Scalar>(
    algebra: &Algebra,
    n: usize,
    word: &[ElementaryGenerator<T>],
    norm: LieNorm,
) -> Result<FactorizationCertificate<T>> {
    let target = elementary_product(algebra, n, word)?;
    let factors = word.iter().map(|g| g.lie_element()).collect();
    FactorizationCertificate::new(factors, target, norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketResiduals {
    /// `|| f_{i,j}(a) - [e_{i,j}(a), e_{j,i}(1)] ||`
    pub diagonal: f64,
    /// `|| g(ab - ba) - ([e_{n,1}(a), e_{1,n}(b)] + f_{1,n}(ba)) ||`
    pub corner: f64,
    pub passed: bool,
}

pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// Residuals of the two bracket identities that place `f_{i,j}(a)` and
/// `g([a, b])` in the Lie algebra generated by the `e_{i,j}`.
///
/// The corner identity is checked with `+ f_{1,n}(ba)`: expanding
/// `[e_{n,1}(a), e_{1,n}(b)] = ab e_{nn} - ba e_{11}` shows that adding
/// `f_{1,n}(ba)` leaves exactly `g(ab - ba)`.
pub fn bracket_identities_check<T: Scalar>(
    a: &AlgebraElement<T>,
    b: &AlgebraElement<T>,
    n: usize,
    i: usize,
    j: usize,
) -> Result<BracketResiduals> {
    a.algebra().check_same(b.algebra())?;
    if n < 2 || i >= n || j >= n || i == j {
        return Err(Error::Precondition(format!("need n >= 2 and distinct i, j < n; got n={n}, i={i}, j={j}")));
    }
    let one = AlgebraElement::one(a.algebra());
    let lhs1 = f_lie(n, i, j, a);
    let rhs1 = e_lie(n, i, j, a).commutator(&e_lie(n, j, i, &one));
    let diagonal = (&lhs1 - &rhs1).op_norm().to_f64_lossy();

    let comm = &(a * b) - &(b * a);
    let lhs2 = g_lie(n, &comm);
    let rhs2 = &e_lie(n, n - 1, 0, a).commutator(&e_lie(n, 0, n - 1, b)) + &f_lie(n, 0, n - 1, &(b * a));
    let corner = (&lhs2 - &rhs2).op_norm().to_f64_lossy();
    let scale = (1.0 + a.norm().to_f64_lossy()) * (1.0 + b.norm().to_f64_lossy());
    Ok(BracketResiduals {
        diagonal,
        corner,
        passed: diagonal <= IDENTITY_TOLERANCE * scale && corner <= IDENTITY_TOLERANCE * scale,
    })
}

/// Coefficients expressing a trace-zero matrix in the spanning set
/// `{e_{i,j}(a), f_{i,j}(a), g(c)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TracelessDecomposition<T: Scalar> {
    pub n: usize,
    pub off_diagonal: Vec<(usize, usize, AlgebraElement<T>)>,
    /// `f_{i,i+1}` coefficients of the diagonal cascade.
    pub diagonal: Vec<(usize, usize, AlgebraElement<T>)>,
    pub corner: AlgebraElement<T>,
}

impl<T: Scalar> TracelessDecomposition<T> {
    pub fn rebuild(&self) -> MatrixOverAlgebra<T> {
        let mut x = g_lie(self.n, &self.corner);
        for (i, j, a) in &self.off_diagonal {
            x = &x + &e_lie(self.n, *i, *j, a);
        }
        for (i, j, a) in &self.diagonal {
            x = &x + &f_lie(self.n, *i, *j, a);
        }
        x
    }

    pub fn generator_count(&self) -> usize {
        self.off_diagonal.len() + self.diagonal.len() + usize::from(self.corner.norm() > T::zero())
    }
}

/// Decomposes `X` with vanishing universal trace: off-diagonal entries first,
/// then the `f_{1,2}, f_{2,3}, ...` cascade, leaving the corner remainder.
pub fn traceless_decompose<T: Scalar>(x: &MatrixOverAlgebra<T>) -> Result<TracelessDecomposition<T>> {
    let n = x.n();
    let trace = x.diagonal_sum();
    let scale = T::one() + x.op_norm();
    if !trace.in_commutator_span(T::lit(1e-10) * scale) {
        let value = if x.algebra().is_commutative() {
            trace.norm()
        } else {
            trace.blocks()[0].trace().modulus()
        };
        return Err(Error::NonzeroTrace {
            trace: value.to_f64_lossy(),
        });
    }
    let negligible = |a: &AlgebraElement<T>| a.norm() <= T::lit(1e-15) * scale;
    let mut off_diagonal = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let a = x.entry(i, j);
                if !negligible(&a) {
                    off_diagonal.push((i, j, a));
                }
            }
        }
    }
    let mut diagonal = Vec::new();
    let mut carry = AlgebraElement::zero(x.algebra());
    for i in 0..n.saturating_sub(1) {
        carry = &carry + &x.entry(i, i);
        if !negligible(&carry) {
            diagonal.push((i, i + 1, carry.clone()));
        }
    }
    let corner = &carry + &x.entry(n - 1, n - 1);
    let corner = if negligible(&corner) { AlgebraElement::zero(x.algebra()) } else { corner };
    Ok(TracelessDecomposition {
        n,
        off_diagonal,
        diagonal,
        corner,
    })
}

/// Tracial map `tau: A -> E = C^d` and the lattice `2 pi i tau_*[K_0(A)]`
/// the de la Harpe–Skandalis determinant is reduced by.
#[derive(Debug, Clone, PartialEq)]
pub struct HsDeterminantContext<T: Scalar> {
    algebra: Algebra,
    /// Lattice generators in `E`, as complex vectors of length `d`.
    lattice: Vec<Vec<Complex<T>>>,
}

impl<T: Scalar> HsDeterminantContext<T> {
    /// Scalar trace for `C` and `M_k(C)` with lattice `2 pi i Z`; per-component
    /// mean for function algebras with lattice `2 pi i Z^c`.
    pub fn new(algebra: &Algebra) -> Self {
        let two_pi_i = c(T::zero(), T::two_pi());
        let d = Self::dimension_of(algebra);
        let lattice = (0..d)
            .map(|k| {
                let mut v = vec![creal(T::zero()); d];
                v[k] = two_pi_i;
                v
            })
            .collect();
        Self {
            algebra: algebra.clone(),
            lattice,
        }
    }

    /// Custom lattice generators.
    pub fn with_lattice(algebra: &Algebra, lattice: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let d = Self::dimension_of(algebra);
        if lattice.iter().any(|v| v.len() != d) {
            return Err(Error::Shape(format!("lattice generators must have length {d}")));
        }
        Ok(Self {
            algebra: algebra.clone(),
            lattice,
        })
    }

    fn dimension_of(algebra: &Algebra) -> usize {
        match algebra {
            Algebra::Functions(s) => s.components(),
            _ => 1,
        }
    }

    pub fn dimension(&self) -> usize {
        Self::dimension_of(&self.algebra)
    }

    pub fn lattice(&self) -> &[Vec<Complex<T>>] {
        &self.lattice
    }

    pub fn trace(&self, a: &AlgebraElement<T>) -> Vec<Complex<T>> {
        match &self.algebra {
            Algebra::Functions(space) => {
                let sizes = space.component_sizes();
                let mut sums = vec![creal(T::zero()); space.components()];
                for (v, z) in a.samples().into_iter().enumerate() {
                    sums[space.component_of(v)] += z;
                }
                sums.iter()
                    .zip(sizes)
                    .map(|(s, n)| *s / creal(T::from_usize_lossy(n)))
                    .collect()
            }
            _ => vec![a.blocks()[0].trace()],
        }
    }

    /// `tau_n(X) = tau(sum_i X_ii)`.
    pub fn trace_n(&self, x: &MatrixOverAlgebra<T>) -> Vec<Complex<T>> {
        self.trace(&x.diagonal_sum())
    }

    /// `max |tau(xy - yx)|` over the given pairs.
    pub fn commutator_defect(&self, pairs: &[(AlgebraElement<T>, AlgebraElement<T>)]) -> T {
        pairs
            .iter()
            .flat_map(|(x, y)| self.trace(&x.commutator(y)))
            .map(|z| z.modulus())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Babai rounding against the lattice (exact for orthogonal generators).
    pub fn reduce(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let m = self.lattice.len();
        if m == 0 {
            return v.to_vec();
        }
        let d = v.len();
        let basis = DMatrix::from_fn(2 * d, m, |r, k| {
            let z = self.lattice[k][r / 2];
            if r % 2 == 0 { z.re } else { z.im }
        });
        let target = DVector::from_fn(2 * d, |r, _| if r % 2 == 0 { v[r / 2].re } else { v[r / 2].im });
        let gram = basis.transpose() * &basis;
        let rhs = basis.transpose() * &target;
        let coeffs = match gram.lu().solve(&rhs) {
            Some(x) => x,
            None => return v.to_vec(),
        };
        let mut out = v.to_vec();
        for k in 0..m {
            let r = coeffs[k].round();
            for (o, g) in out.iter_mut().zip(&self.lattice[k]) {
                *o -= *g * creal(r);
            }
        }
        out
    }

    pub fn distance_to_lattice(&self, v: &[Complex<T>]) -> T {
        self.reduce(v)
            .iter()
            .fold(T::zero(), |s, z| s + z.modulus_squared())
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HsDeterminant<T: Scalar> {
    /// `sum_i tau_n(X_i)` before reduction.
    pub raw: Vec<Complex<T>>,
    /// Representative modulo the lattice.
    pub reduced: Vec<Complex<T>>,
}

/// `Delta_tau(g) = sum_i P(tau_n(X_i))` over a factorization of `g`.
pub fn hs_determinant<T: Scalar>(
    cert: &FactorizationCertificate<T>,
    ctx: &HsDeterminantContext<T>,
    tol: Tolerance<T>,
) -> Result<HsDeterminant<T>> {
    let scale = T::one() + cert.target().op_norm();
    if cert.residual() > tol.at(scale) {
        return Err(Error::Precondition(format!(
            "certificate residual {} exceeds tolerance",
            cert.residual().to_f64_lossy()
        )));
    }
    let mut raw = vec![creal(T::zero()); ctx.dimension()];
    for x in cert.factors() {
        for (acc, z) in raw.iter_mut().zip(ctx.trace_n(x)) {
            *acc += z;
        }
    }
    let reduced = ctx.reduce(&raw);
    Ok(HsDeterminant { raw, reduced })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContractionSlot {
    S13,
    S23,
    S31,
    S32,
}

impl ContractionSlot {
    pub fn index(&self) -> (usize, usize) {
        match self {
            ContractionSlot::S13 => (0, 2),
            ContractionSlot::S23 => (1, 2),
            ContractionSlot::S31 => (2, 0),
            ContractionSlot::S32 => (2, 1),
        }
    }

    pub fn all() -> [ContractionSlot; 4] {
        [ContractionSlot::S13, ContractionSlot::S23, ContractionSlot::S31, ContractionSlot::S32]
    }
}

#[derive(Debug, Clone)]
pub struct Contraction<T: Scalar> {
    pub conjugate: GroupElement<T>,
    /// `lambda^2 a`.
    pub payload: AlgebraElement<T>,
    /// `|| conjugate - E_slot(lambda^2 a) ||`
    pub identity_residual: T,
    /// `|| conjugate - 1 ||`
    pub distance_to_identity: T,
}

fn torus_element<T: Scalar>(algebra: &Algebra, first: usize, lambda: Complex<T>) -> MatrixOverAlgebra<T> {
    let mut d = MatrixOverAlgebra::identity(algebra, 3);
    d.set_entry(first, first, &AlgebraElement::scalar(algebra, lambda)).expect("3x3");
    d.set_entry(2, 2, &AlgebraElement::scalar(algebra, creal(T::one()) / lambda)).expect("3x3");
    d
}

/// Conjugates `E_slot(a)` by the diagonal torus so that the payload becomes
/// `lambda^2 a`: `a_1(l) E_13 a_1(1/l)`, `a_2(l) E_23 a_2(1/l)`,
/// `a_2(1/l) E_32 a_2(l)`, `a_1(1/l) E_31 a_1(l)`, where
/// `a_1(l) = diag(l, 1, 1/l)` and `a_2(l) = diag(1, l, 1/l)`.
pub fn conjugation_contraction<T: Scalar>(
    lambda: Complex<T>,
    a: &AlgebraElement<T>,
    slot: ContractionSlot,
) -> Result<Contraction<T>> {
    if lambda.modulus() == T::zero() {
        return Err(Error::Precondition("lambda must be nonzero".into()));
    }
    let alg = a.algebra();
    let inv = creal(T::one()) / lambda;
    let (i, j) = slot.index();
    let (torus, left, right) = match slot {
        ContractionSlot::S13 => (0, lambda, inv),
        ContractionSlot::S23 => (1, lambda, inv),
        ContractionSlot::S32 => (1, inv, lambda),
        ContractionSlot::S31 => (0, inv, lambda),
    };
    let conj = &(&torus_element(alg, torus, left) * &elementary_matrix(3, i, j, a)) * &torus_element(alg, torus, right);
    let payload = a.scale(lambda * lambda);
    let expected = elementary_matrix(3, i, j, &payload);
    let identity_residual = (&conj - &expected).op_norm();
    let distance_to_identity = (&conj - &MatrixOverAlgebra::identity(alg, 3)).op_norm();
    Ok(Contraction {
        conjugate: GroupElement::new_unchecked(conj, GroupTag::En),
        payload,
        identity_residual,
        distance_to_identity,
    })
}

/// El bracket for `E_{1,2}(m 1)` in `E_n(A)`: lower `log(m + 1)`, upper `m`
/// from the single factor `e_{1,2}(m 1)`.
pub fn unboundedness_witness<T: Scalar>(m: u64, algebra: &Algebra, n: usize) -> Result<ElBracket<T>> {
    if m == 0 {
        return Err(Error::Precondition("m must be at least 1".into()));
    }
    if n < 2 {
        return Err(Error::Precondition("E_n(A) needs n >= 2".into()));
    }
    let a = AlgebraElement::scalar(algebra, creal(T::lit(m as f64)));
    let g = GroupElement::new_unchecked(elementary_matrix(n, 0, 1, &a), GroupTag::En);
    let cert = FactorizationCertificate::new(vec![e_lie(n, 0, 1, &a)], g, LieNorm::OperatorL1)?;
    let lower = crate::explength::el_lower_bound(cert.target(), LieNorm::OperatorL1);
    ElBracket::new(lower, cert, LowerMethod::LogOpNorm)
}

/// Factors an element of `GL(n, A)_0` into elementary matrices and a diagonal
/// remainder, returning Lie algebra factors `X_1, ..., X_k` with
/// `exp(X_1) ... exp(X_k) = g`.
///
/// Row reduction brings `g` to diagonal form; the diagonal is folded into the
/// bottom-right corner with `diag(d, 1/d) = w(d) w(-1)`,
/// `w(d) = E_{i,i+1}(d) E_{i+1,i}(-1/d) E_{i,i+1}(d)`, and the corner is
/// logged only when it differs from the unit.
pub fn lie_factorization<T: Scalar>(g: &GroupElement<T>, tol: Tolerance<T>) -> Result<Vec<MatrixOverAlgebra<T>>> {
    let n = g.n();
    let alg = g.algebra().clone();
    let scale = T::one() + g.op_norm();
    let pivot_tol = T::lit(1e-8) * scale;
    let mut m = g.matrix().clone();
    // Row operations `E_{r,c}(a)` applied on the left, in order.
    let mut ops: Vec<(usize, usize, AlgebraElement<T>)> = Vec::new();
    let mut apply = |m: &mut MatrixOverAlgebra<T>, r: usize, c: usize, a: AlgebraElement<T>| {
        *m = &elementary_matrix(n, r, c, &a) * &*m;
        ops.push((r, c, a));
    };
    let shifts: Vec<Complex<T>> = if alg.is_real() {
        [1.0, -1.0, 2.0, -0.5, 3.0].iter().map(|&x| creal(T::lit(x))).collect()
    } else {
        [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.6, -0.8), (2.0, 0.5)]
            .iter()
            .map(|&(re, im)| c(T::lit(re), T::lit(im)))
            .collect()
    };
    for col in 0..n {
        if m.entry(col, col).invertibility_margin() <= pivot_tol {
            let mut fixed = false;
            'search: for r in col + 1..n {
                for &t in &shifts {
                    let cand = &m.entry(col, col) + &m.entry(r, col).scale(t);
                    if cand.invertibility_margin() > pivot_tol {
                        apply(&mut m, col, r, AlgebraElement::scalar(&alg, t));
                        fixed = true;
                        break 'search;
                    }
                }
            }
            if !fixed {
                return Err(Error::NoFactorization(format!("no invertible pivot in column {}", col + 1)));
            }
        }
        let pinv = m.entry(col, col).inverse().ok_or_else(|| Error::NoFactorization("singular pivot".into()))?;
        for r in col + 1..n {
            let a = -&(&m.entry(r, col) * &pinv);
            if a.norm() > T::zero() {
                apply(&mut m, r, col, a);
            }
        }
    }
    for col in (0..n).rev() {
        let pinv = m.entry(col, col).inverse().ok_or_else(|| Error::NoFactorization("singular pivot".into()))?;
        for r in 0..col {
            let a = -&(&m.entry(r, col) * &pinv);
            if a.norm() > T::zero() {
                apply(&mut m, r, col, a);
            }
        }
    }
    let mut factors: Vec<MatrixOverAlgebra<T>> = ops.iter().map(|(r, c, a)| e_lie(n, *r, *c, &-a)).collect();

    let one = AlgebraElement::one(&alg);
    let minus_one = -&one;
    let mut carry = m.entry(0, 0);
    for i in 0..n.saturating_sub(1) {
        if (&carry - &one).norm() > T::lit(1e-14) * scale {
            let inv = carry.inverse().ok_or_else(|| Error::NoFactorization("singular diagonal".into()))?;
            for (d, dinv) in [(&carry, &inv), (&minus_one, &minus_one)] {
                factors.push(e_lie(n, i, i + 1, d));
                factors.push(e_lie(n, i + 1, i, &-dinv));
                factors.push(e_lie(n, i, i + 1, d));
            }
        }
        carry = &carry * &m.entry(i + 1, i + 1);
    }
    if (&carry - &one).norm() > T::lit(1e-12) * scale {
        let log = corner_log(&carry, tol)?;
        factors.push(g_lie(n, &log));
    }

    let mut prod = MatrixOverAlgebra::identity(&alg, n);
    for x in &factors {
        prod = &prod * &x.exp()?;
    }
    let residual = (&prod - g.matrix()).op_norm();
    if residual > T::lit(1e-8) * scale {
        return Err(Error::NoFactorization(format!(
            "elementary factorization residual {}",
            residual.to_f64_lossy()
        )));
    }
    Ok(factors)
}

fn corner_log<T: Scalar>(a: &AlgebraElement<T>, tol: Tolerance<T>) -> Result<AlgebraElement<T>> {
    let alg = a.algebra();
    if alg.block_size() == 1 {
        let tie = tol.abs.max(tol.rel);
        let mut logs = Vec::new();
        for z in a.samples() {
            if alg.is_real() && z.re <= T::zero() {
                return Err(Error::NoFactorization("negative determinant over a real algebra".into()));
            }
            logs.push(linalg::principal_ln(z, tie));
        }
        let blocks = logs.into_iter().map(|z| CMatrix::from_element(1, 1, z)).collect();
        AlgebraElement::from_blocks(alg.clone(), blocks)
    } else {
        let block = linalg::principal_log(&a.blocks()[0], tol.abs.max(tol.rel))
            .map_err(|e| Error::NoFactorization(format!("corner logarithm: {e}")))?;
        AlgebraElement::from_blocks(alg.clone(), vec![block])
    }
}

#[derive(Serialize, Deserialize)]
struct GeneratorRepr {
    kind: GeneratorKind,
    #[serde(default)]
    i: usize,
    #[serde(default)]
    j: usize,
    a: Value,
}

/// Reads a word `[{"kind": "E", "i": 1, "j": 2, "a": ...}, ...]` with one-based indices.
pub fn word_from_json<T: Scalar>(algebra: &Algebra, n: usize, v: &Value) -> Result<Vec<ElementaryGenerator<T>>> {
    let reprs: Vec<GeneratorRepr> = serde_json::from_value(v.clone())?;
    reprs
        .into_iter()
        .map(|r| {
            let a = element_from_json(algebra, &r.a)?;
            if r.kind == GeneratorKind::Corner {
                return ElementaryGenerator::new(r.kind, n, n - 1, n - 1, a);
            }
            if r.i == 0 || r.j == 0 {
                return Err(Error::Format("word indices are one-based".into()));
            }
            ElementaryGenerator::new(r.kind, n, r.i - 1, r.j - 1, a)
        })
        .collect()
}

pub fn word_to_json<T: Scalar>(word: &[ElementaryGenerator<T>]) -> Value {
    Value::Array(
        word.iter()
            .map(|g| {
                serde_json::to_value(GeneratorRepr {
                    kind: g.kind,
                    i: g.i + 1,
                    j: g.j + 1,
                    a: element_to_json(&g.payload),
                })
                .expect("serializable")
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::mat_log;
    use crate::sample;
    use crate::space::DiscretizedSpace;

    fn scalar(z: f64) -> AlgebraElement<f64> {
        AlgebraElement::scalar(&Algebra::Complex, c(z, 0.0))
    }

    #[test]
    fn empty_word_is_identity() {
        let g = elementary_product::<f64>(&Algebra::Complex, 3, &[]).unwrap();
        assert!(g.matrix().is_approx_eq(&MatrixOverAlgebra::identity(&Algebra::Complex, 3), 0.0));
    }

    #[test]
    fn same_slot_is_additive() {
        let w = [
            ElementaryGenerator::elementary(2, 0, 1, scalar(1.5)).unwrap(),
            ElementaryGenerator::elementary(2, 0, 1, scalar(-0.25)).unwrap(),
        ];
        let g = elementary_product(&Algebra::Complex, 2, &w).unwrap();
        assert!(g.matrix().is_approx_eq(&elementary_matrix(2, 0, 1, &scalar(1.25)), 1e-15));
    }

    #[test]
    fn mixed_slots_fixture() {
        // E_12(2) E_21(3) = [[1 + 6, 2], [3, 1]]
        let w = [
            ElementaryGenerator::elementary(2, 0, 1, scalar(2.0)).unwrap(),
            ElementaryGenerator::elementary(2, 1, 0, scalar(3.0)).unwrap(),
        ];
        let g = elementary_product(&Algebra::Complex, 2, &w).unwrap();
        let expected = MatrixOverAlgebra::from_complex(
            &Algebra::Complex,
            CMatrix::from_row_slice(2, 2, &[c(7., 0.), c(2., 0.), c(3., 0.), c(1., 0.)]),
        )
        .unwrap();
        assert!(g.matrix().is_approx_eq(&expected, 1e-15));
    }

    #[test]
    fn bracket_identity_unit_payload() {
        let one = scalar(1.0);
        let f = f_lie(2, 0, 1, &one);
        let br = e_lie(2, 0, 1, &one).commutator(&e_lie(2, 1, 0, &one));
        assert!(f.is_approx_eq(&br, 0.0));
        let r = bracket_identities_check(&scalar(0.7), &scalar(-1.3), 2, 0, 1).unwrap();
        assert!(r.passed);
        assert_eq!(r.corner, 0.0);
    }

    #[test]
    fn bracket_identities_noncommutative() {
        let alg = Algebra::Matrix { k: 2 };
        let mut rng = sample::rng(11);
        for n in 2..5 {
            let a = AlgebraElement::from_blocks(alg.clone(), vec![sample::gaussian::<f64, _>(&mut rng, 2)]).unwrap();
            let b = AlgebraElement::from_blocks(alg.clone(), vec![sample::gaussian::<f64, _>(&mut rng, 2)]).unwrap();
            let r = bracket_identities_check(&a, &b, n, 0, n - 1).unwrap();
            assert!(r.passed, "{r:?}");
            // A genuinely noncommuting pair makes the corner identity nontrivial.
            assert!(a.commutator(&b).norm() > 1e-3);
        }
    }

    #[test]
    fn corner_requires_commutator_span() {
        assert!(ElementaryGenerator::new(GeneratorKind::Corner, 2, 1, 1, scalar(1.0)).is_err());
        assert!(ElementaryGenerator::new(GeneratorKind::Corner, 2, 1, 1, scalar(0.0)).is_ok());
        assert!(ElementaryGenerator::new(GeneratorKind::OffDiagonal, 2, 1, 1, scalar(1.0)).is_err());
    }

    #[test]
    fn decompose_examples() {
        let zero = MatrixOverAlgebra::<f64>::zeros(&Algebra::Complex, 3);
        assert_eq!(traceless_decompose(&zero).unwrap().generator_count(), 0);
        let d = f_lie(2, 0, 1, &scalar(2.5));
        let dec = traceless_decompose(&d).unwrap();
        assert!(dec.off_diagonal.is_empty());
        assert_eq!(dec.diagonal.len(), 1);
        assert_eq!(dec.diagonal[0].2, scalar(2.5));
        assert_eq!(dec.corner.norm(), 0.0);
        let id = MatrixOverAlgebra::<f64>::identity(&Algebra::Complex, 2);
        assert!(matches!(traceless_decompose(&id), Err(Error::NonzeroTrace { .. })));
    }

    #[test]
    fn decompose_random_traceless() {
        let mut rng = sample::rng(2);
        for _ in 0..20 {
            let x = sample::lie_element::<f64, _>(&mut rng, &Algebra::Complex, 3, GroupTag::SL, 2.0);
            let dec = traceless_decompose(&x).unwrap();
            assert!((&dec.rebuild() - &x).op_norm() <= 1e-12);
        }
        // Matrix algebra: the corner carries a nonzero commutator.
        let alg = Algebra::Matrix { k: 2 };
        let x = sample::lie_element::<f64, _>(&mut rng, &alg, 3, GroupTag::SL, 1.0);
        let dec = traceless_decompose(&x).unwrap();
        assert!(dec.corner.in_commutator_span(1e-12));
        assert!((&dec.rebuild() - &x).op_norm() <= 1e-12);
    }

    #[test]
    fn hs_determinant_of_traceless_log_vanishes() {
        let mut rng = sample::rng(4);
        let x = sample::lie_element::<f64, _>(&mut rng, &Algebra::Complex, 2, GroupTag::SL, 0.8);
        let g = crate::matrix::mat_exp(&x).unwrap();
        let cert = FactorizationCertificate::new(vec![x], g, LieNorm::OperatorL1).unwrap();
        let ctx = HsDeterminantContext::new(&Algebra::Complex);
        let d = hs_determinant(&cert, &ctx, Tolerance::default()).unwrap();
        assert!(d.reduced[0].norm() < 1e-12);
    }

    #[test]
    fn hs_determinant_reduces_full_turn() {
        // diag(e^{2 pi i}, 1) = I through X = diag(2 pi i, 0).
        let x = MatrixOverAlgebra::from_complex(
            &Algebra::Complex,
            CMatrix::from_row_slice(2, 2, &[c(0., std::f64::consts::TAU), c(0., 0.), c(0., 0.), c(0., 0.)]),
        )
        .unwrap();
        let g = GroupElement::identity(&Algebra::Complex, 2, GroupTag::GL);
        let cert = FactorizationCertificate::new(vec![x], g.clone(), LieNorm::OperatorL1).unwrap();
        let ctx = HsDeterminantContext::new(&Algebra::Complex);
        let d = hs_determinant(&cert, &ctx, Tolerance::default()).unwrap();
        assert!((d.raw[0] - c(0., std::f64::consts::TAU)).norm() < 1e-14);
        assert!(d.reduced[0].norm() < 1e-14);
        let empty = FactorizationCertificate::new(vec![], g, LieNorm::OperatorL1).unwrap();
        assert_eq!(hs_determinant(&empty, &ctx, Tolerance::default()).unwrap().reduced[0].norm(), 0.0);
    }

    #[test]
    fn function_trace_is_tracial_and_lattice_per_component() {
        let space = DiscretizedSpace::new(4, vec![(0, 1)]).unwrap();
        let alg = Algebra::functions(space);
        let ctx = HsDeterminantContext::<f64>::new(&alg);
        assert_eq!(ctx.dimension(), 3);
        let f = AlgebraElement::from_samples(&alg, &[c(1., 0.), c(3., 0.), c(0., 1.), c(5., 0.)]).unwrap();
        assert_eq!(ctx.trace(&f), vec![c(2., 0.), c(0., 1.), c(5., 0.)]);
        let v = vec![c(0.1, 3.0 * std::f64::consts::TAU), c(0.0, -std::f64::consts::TAU + 0.2), c(0., 0.)];
        let r = ctx.reduce(&v);
        assert!((r[0] - c(0.1, 0.0)).norm() < 1e-12);
        assert!((r[1] - c(0.0, 0.2)).norm() < 1e-12);
    }

    #[test]
    fn contraction_examples() {
        let a = scalar(3.0);
        let one = conjugation_contraction(c(1.0, 0.0), &a, ContractionSlot::S13).unwrap();
        assert!(one.conjugate.matrix().is_approx_eq(&elementary_matrix(3, 0, 2, &a), 1e-15));
        for slot in ContractionSlot::all() {
            let r = conjugation_contraction(c(0.1, 0.0), &a, slot).unwrap();
            assert!((r.payload.samples()[0] - c(0.03, 0.0)).norm() < 1e-15);
            assert!(r.identity_residual < 1e-14);
        }
    }

    #[test]
    fn contraction_is_geometric() {
        let alg = Algebra::Matrix { k: 2 };
        let a = AlgebraElement::from_blocks(alg, vec![sample::gaussian::<f64, _>(&mut sample::rng(8), 2)]).unwrap();
        let norms: Vec<f64> = (1..8)
            .map(|m| {
                conjugation_contraction(c(0.5f64.powi(m), 0.0), &a, ContractionSlot::S31)
                    .unwrap()
                    .distance_to_identity
            })
            .collect();
        for w in norms.windows(2) {
            assert!((w[1] / w[0] - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn witness_brackets() {
        for (m, lower, upper) in [(1u64, 2f64.ln(), 1.0), (10, 11f64.ln(), 10.0)] {
            let b = unboundedness_witness::<f64>(m, &Algebra::Complex, 2).unwrap();
            assert!((b.lower - lower).abs() < 1e-14);
            assert!((b.upper - upper).abs() < 1e-14);
        }
        let big = unboundedness_witness::<f64>(1_000_000, &Algebra::Complex, 2).unwrap();
        assert!(big.lower > 13.0);
    }

    #[test]
    fn lie_factorization_handles_cut_spectrum() {
        // diag(-2, -1/2): in SL(2, C)_0 but with no principal logarithm.
        let g = MatrixOverAlgebra::from_complex(
            &Algebra::Complex,
            CMatrix::from_row_slice(2, 2, &[c(-2., 0.), c(1., 0.), c(0., 0.), c(-0.5, 0.)]),
        )
        .unwrap();
        let g = GroupElement::new(g, GroupTag::SL).unwrap();
        assert!(mat_log(&g).is_err());
        let factors = lie_factorization(&g, Tolerance::default()).unwrap();
        for x in &factors {
            assert!(GroupTag::SL.contains_lie(x, 1e-12));
        }
        let prod = factors
            .iter()
            .fold(MatrixOverAlgebra::identity(&Algebra::Complex, 2), |acc, x| &acc * &x.exp().unwrap());
        assert!(prod.is_approx_eq(g.matrix(), 1e-10));
    }

    #[test]
    fn lie_factorization_function_algebra_with_zero_pivot() {
        let alg = Algebra::functions(DiscretizedSpace::discrete(2).unwrap());
        let blocks = vec![
            CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(-1., 0.), c(0., 0.)]),
            CMatrix::from_row_slice(2, 2, &[c(2., 0.), c(0., 0.), c(0., 0.), c(3., 1.)]),
        ];
        let g = GroupElement::new(MatrixOverAlgebra::from_blocks(alg.clone(), 2, blocks).unwrap(), GroupTag::GL).unwrap();
        let factors = lie_factorization(&g, Tolerance::default()).unwrap();
        let prod = factors
            .iter()
            .fold(MatrixOverAlgebra::identity(&alg, 2), |acc, x| &acc * &x.exp().unwrap());
        assert!(prod.is_approx_eq(g.matrix(), 1e-10));
    }

    #[test]
    fn word_json_is_one_based() {
        let v: Value = serde_json::from_str(r#"[{"kind":"E","i":1,"j":2,"a":[2,0]},{"kind":"f","i":2,"j":1,"a":0.5}]"#).unwrap();
        let w = word_from_json::<f64>(&Algebra::Complex, 2, &v).unwrap();
        assert_eq!((w[0].i, w[0].j), (0, 1));
        assert_eq!(w[1].kind, GeneratorKind::Diagonal);
        let back = word_to_json(&w);
        assert_eq!(back[0]["i"], 1);
        assert!(word_from_json::<f64>(&Algebra::Complex, 2, &serde_json::json!([{"kind":"E","i":0,"j":1,"a":1}])).is_err());
    }
}
