//! Coarse-geometry checks on finite samples of a metric space: coarse
//! properness, large-scale geodesicity, and fitted quasi-isometry and
//! coarse-embedding constants.
//!
//! A finite sample can refute a property or support it; it cannot prove it.
//! Every report carries a [`SampleLabel`] saying what it was computed on.

use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::fmt;
use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const TRIANGLE_SLACK: f64 = 1e-9;

/// Finitely many points with opaque ids, a distance table and an origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSpace<T: Scalar> {
    ids: Vec<String>,
    dist: Vec<Vec<T>>,
    origin: usize,
}

impl<T: Scalar> SampledSpace<T> {
    /// Validates symmetry, zero diagonal, nonnegativity and the triangle
    /// inequality on all triples.
    pub fn new(ids: Vec<String>, dist: Vec<Vec<T>>, origin: usize) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(Error::Precondition("empty sample".into()));
        }
        if origin >= n {
            return Err(Error::Precondition(format!("origin {origin} out of range")));
        }
        if dist.len() != n || dist.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!("distance table must be {n}x{n}")));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(Error::Format(format!("duplicate point id {dup}")));
        }
        let scale = dist.iter().flatten().fold(T::one(), |a, &b| a.max(b));
        let tol = T::lit(TRIANGLE_SLACK) * scale;
        for i in 0..n {
            if dist[i][i] != T::zero() {
                return Err(Error::Precondition(format!("d({0}, {0}) != 0", ids[i])));
            }
            for j in 0..n {
                let d = dist[i][j];
                if !d.is_finite() || d < T::zero() {
                    return Err(Error::Precondition(format!("invalid distance d({}, {})", ids[i], ids[j])));
                }
                if (d - dist[j][i]).abs() > tol {
                    return Err(Error::Precondition(format!("asymmetric distance d({}, {})", ids[i], ids[j])));
                }
            }
        }
        let violation = (0..n).into_par_iter().find_map_first(|i| {
            for j in 0..n {
                for k in 0..n {
                    if dist[i][k] > dist[i][j] + dist[j][k] + tol {
                        return Some((i, j, k));
                    }
                }
            }
            None
        });
        if let Some((i, j, k)) = violation {
            return Err(Error::Precondition(format!(
                "triangle inequality fails for ({}, {}, {})",
                ids[i], ids[j], ids[k]
            )));
        }
        Ok(Self { ids, dist, origin })
    }

    /// Distance table from points and a metric.
    pub fn from_points<P>(ids: Vec<String>, points: &[P], origin: usize, metric: impl Fn(&P, &P) -> T + Sync) -> Result<Self>
    where
        P: Sync,
    {
        if ids.len() != points.len() {
            return Err(Error::Shape("one id per point".into()));
        }
        let n = points.len();
        let dist: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| if i == j { T::zero() } else { metric(&points[i], &points[j]) }).collect())
            .collect();
        // Symmetrize rounding differences.
        let dist = (0..n)
            .map(|i| (0..n).map(|j| if i < j { dist[i][j] } else { dist[j][i] }).collect())
            .collect();
        Self::new(ids, dist, origin)
    }

    /// Points `0, ..., n - 1` named by their index.
    pub fn indexed(n: usize, origin: usize, metric: impl Fn(usize, usize) -> T + Sync) -> Result<Self> {
        let idx: Vec<usize> = (0..n).collect();
        Self::from_points((0..n).map(|i| i.to_string()).collect(), &idx, origin, |a, b| metric(*a, *b))
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn d(&self, i: usize, j: usize) -> T {
        self.dist[i][j]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Largest distance from the origin.
    pub fn radius(&self) -> T {
        self.dist[self.origin].iter().fold(T::zero(), |a, &b| a.max(b))
    }

    pub fn label(&self) -> SampleLabel {
        SampleLabel {
            points: self.len(),
            radius: self.radius().to_f64_lossy(),
        }
    }

    /// Reads `a,b,d` rows; missing pairs are an error, `d(a, a) = 0` is implied.
    pub fn from_csv<R: Read>(reader: R, origin: Option<&str>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut ids: Vec<String> = Vec::new();
        let mut index = BTreeMap::new();
        let mut entries = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
            if rec.len() != 3 {
                return Err(Error::Format(format!("expected 3 columns, got {}", rec.len())));
            }
            if rec[2].parse::<f64>().is_err() && entries.is_empty() && ids.is_empty() {
                continue; // header row
            }
            let d: f64 = rec[2].parse().map_err(|_| Error::Format(format!("bad distance {:?}", &rec[2])))?;
            let mut idx = |s: &str| {
                *index.entry(s.to_string()).or_insert_with(|| {
                    ids.push(s.to_string());
                    ids.len() - 1
                })
            };
            let (a, b) = (idx(&rec[0]), idx(&rec[1]));
            entries.push((a, b, d));
        }
        let n = ids.len();
        let mut dist: Vec<Vec<Option<T>>> = vec![vec![None; n]; n];
        for i in 0..n {
            dist[i][i] = Some(T::zero());
        }
        for (a, b, d) in entries {
            dist[a][b] = Some(T::lit(d));
            if dist[b][a].is_none() || a == b {
                dist[b][a] = Some(T::lit(d));
            }
        }
        let dist = dist
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(j, d)| d.ok_or_else(|| Error::Format(format!("missing distance for ({}, {})", ids[i], ids[j]))))
                    .collect::<Result<Vec<T>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let origin = match origin {
            Some(o) => ids.iter().position(|x| x == o).ok_or_else(|| Error::Format(format!("unknown origin {o}")))?,
            None => 0,
        };
        Self::new(ids, dist, origin)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                w.write_record([self.ids[i].clone(), self.ids[j].clone(), format!("{}", self.dist[i][j].to_f64_lossy())])
                    .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory")).expect("utf8")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct SpaceRepr<T: Scalar> {
    ids: Vec<String>,
    origin: String,
    dist: Vec<Vec<T>>,
}

impl<T: Scalar> Serialize for SampledSpace<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpaceRepr {
            ids: self.ids.clone(),
            origin: self.ids[self.origin].clone(),
            dist: self.dist.clone(),
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for SampledSpace<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = SpaceRepr::<T>::deserialize(d)?;
        let origin = r.ids.iter().position(|x| *x == r.origin).ok_or_else(|| D::Error::custom("unknown origin id"))?;
        Self::new(r.ids, r.dist, origin).map_err(D::Error::custom)
    }
}

/// What a report was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleLabel {
    pub points: usize,
    pub radius: f64,
}

impl fmt::Display for SampleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sampled at {} points, radius {}", self.points, self.radius)
    }
}

/// Produces chains between sample points.
pub trait ChainOracle<T: Scalar> {
    /// Step lengths of a chain from point `a` to point `b` whose steps are at
    /// most `max_step` (strictly below it when `strict`), or `None` when the
    /// oracle has none.
    fn chain(&self, space: &SampledSpace<T>, a: usize, b: usize, max_step: T, strict: bool) -> Result<Option<Vec<T>>>;
}

/// Chains through the sample itself: fewest hops for coarse properness
/// (`strict`), shortest total length otherwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct IntraSampleOracle;

impl<T: Scalar> ChainOracle<T> for IntraSampleOracle {
    fn chain(&self, space: &SampledSpace<T>, a: usize, b: usize, max_step: T, strict: bool) -> Result<Option<Vec<T>>> {
        let n = space.len();
        let ok = |i: usize, j: usize| {
            let d = space.d(i, j);
            if strict { d < max_step } else { d <= max_step }
        };
        let mut prev = vec![usize::MAX; n];
        if strict {
            let mut queue = VecDeque::from([a]);
            prev[a] = a;
            while let Some(i) = queue.pop_front() {
                if i == b {
                    break;
                }
                for j in 0..n {
                    if prev[j] == usize::MAX && ok(i, j) {
                        prev[j] = i;
                        queue.push_back(j);
                    }
                }
            }
        } else {
            #[derive(PartialEq)]
            struct Item(f64, usize);
            impl Eq for Item {}
            impl PartialOrd for Item {
                fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
                    Some(self.cmp(o))
                }
            }
            impl Ord for Item {
                fn cmp(&self, o: &Self) -> std::cmp::Ordering {
                    o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
                }
            }
            let mut best = vec![f64::INFINITY; n];
            best[a] = 0.0;
            prev[a] = a;
            let mut heap = BinaryHeap::from([Item(0.0, a)]);
            while let Some(Item(d, i)) = heap.pop() {
                if d > best[i] {
                    continue;
                }
                if i == b {
                    break;
                }
                for j in 0..n {
                    if j != i && ok(i, j) {
                        let nd = d + space.d(i, j).to_f64_lossy();
                        if nd < best[j] {
                            best[j] = nd;
                            prev[j] = i;
                            heap.push(Item(nd, j));
                        }
                    }
                }
            }
        }
        if prev[b] == usize::MAX {
            return Ok(None);
        }
        let mut steps = Vec::new();
        let mut cur = b;
        while cur != a {
            let p = prev[cur];
            steps.push(space.d(p, cur));
            cur = p;
        }
        steps.reverse();
        Ok(Some(steps))
    }
}

/// Wraps a closure `(space, a, b, max_step, strict) -> chain` as an oracle.
pub struct FnOracle<F>(pub F);

impl<T: Scalar, F> ChainOracle<T> for FnOracle<F>
where
    F: Fn(&SampledSpace<T>, usize, usize, T, bool) -> Result<Option<Vec<T>>>,
{
    fn chain(&self, space: &SampledSpace<T>, a: usize, b: usize, max_step: T, strict: bool) -> Result<Option<Vec<T>>> {
        (self.0)(space, a, b, max_step, strict)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoarseProperReport {
    pub holds: bool,
    /// Longest chain used.
    pub max_k: usize,
    /// Step count allowed per chain.
    pub k_limit: Option<usize>,
    /// First point (by index) without an admissible chain.
    pub counterexample: Option<String>,
    pub checked: usize,
    pub label: SampleLabel,
}

/// For every sample point within `big_delta` of the origin, asks the oracle
/// for a chain from the origin with steps below `delta` and at most
/// `k_limit` steps.
pub fn check_coarsely_proper<T: Scalar, O: ChainOracle<T>>(
    space: &SampledSpace<T>,
    big_delta: T,
    delta: T,
    k_limit: Option<usize>,
    oracle: &O,
) -> Result<CoarseProperReport> {
    let o = space.origin();
    let mut max_k = 0;
    let mut checked = 0;
    let mut counterexample = None;
    for x in 0..space.len() {
        if space.d(o, x) >= big_delta || x == o {
            continue;
        }
        checked += 1;
        let fine = match oracle.chain(space, o, x, delta, true)? {
            Some(steps) => {
                max_k = max_k.max(steps.len());
                steps.iter().all(|&s| s < delta) && k_limit.is_none_or(|k| steps.len() <= k)
            }
            None => false,
        };
        if !fine {
            counterexample = Some(space.ids()[x].clone());
            break;
        }
    }
    Ok(CoarseProperReport {
        holds: counterexample.is_none(),
        max_k,
        k_limit,
        counterexample,
        checked,
        label: space.label(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicReport {
    pub holds: bool,
    pub k: f64,
    /// Smallest `K` the produced chains certify: max of the largest step and
    /// of `sum / d` over all pairs.
    pub k_found: f64,
    pub counterexample: Option<(String, String)>,
    pub pairs: usize,
    pub label: SampleLabel,
}

/// Checks `d(g_i, g_{i+1}) <= K` and `sum_i d(g_i, g_{i+1}) <= K d(g, h)` on
/// every sampled pair.
pub fn check_large_scale_geodesic<T: Scalar, O: ChainOracle<T> + Sync>(
    space: &SampledSpace<T>,
    k: T,
    oracle: &O,
) -> Result<GeodesicReport> {
    let n = space.len();
    let slack = T::lit(1e-12);
    let per_row: Vec<Result<(f64, Option<usize>)>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut worst = 0f64;
            for b in a + 1..n {
                let d = space.d(a, b);
                let Some(steps) = oracle.chain(space, a, b, k, false)? else {
                    return Ok((f64::INFINITY, Some(b)));
                };
                let total = steps.iter().fold(T::zero(), |x, &y| x + y);
                let max_step = steps.iter().fold(T::zero(), |x, &y| x.max(y));
                let ratio = if d > T::zero() { total / d } else if total > T::zero() { T::lit(f64::INFINITY) } else { T::one() };
                let need = ratio.max(max_step).to_f64_lossy();
                if max_step > k + slack || total > k * d + slack * (T::one() + d) {
                    return Ok((need.max(worst), Some(b)));
                }
                worst = worst.max(need);
            }
            Ok((worst, None))
        })
        .collect();
    let mut k_found = 0f64;
    let mut counterexample = None;
    for (a, r) in per_row.into_iter().enumerate() {
        let (worst, bad) = r?;
        k_found = k_found.max(worst);
        if counterexample.is_none() {
            if let Some(b) = bad {
                counterexample = Some((space.ids()[a].clone(), space.ids()[b].clone()));
            }
        }
    }
    Ok(GeodesicReport {
        holds: counterexample.is_none(),
        k: k.to_f64_lossy(),
        k_found,
        counterexample,
        pairs: n * n.saturating_sub(1) / 2,
        label: space.label(),
    })
}

/// A map between samples: `image[i]` is the codomain index of domain point `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseMapSample<T: Scalar> {
    pub domain: SampledSpace<T>,
    pub codomain: SampledSpace<T>,
    image: Vec<usize>,
}

impl<T: Scalar> CoarseMapSample<T> {
    pub fn new(domain: SampledSpace<T>, codomain: SampledSpace<T>, image: Vec<usize>) -> Result<Self> {
        if image.len() != domain.len() {
            return Err(Error::Shape("every domain point must be mapped exactly once".into()));
        }
        if image.iter().any(|&j| j >= codomain.len()) {
            return Err(Error::Shape("image index out of range".into()));
        }
        Ok(Self { domain, codomain, image })
    }

    /// Map given by matching ids.
    pub fn by_id(domain: SampledSpace<T>, codomain: SampledSpace<T>, pairs: &[(String, String)]) -> Result<Self> {
        let mut image = vec![usize::MAX; domain.len()];
        for (x, y) in pairs {
            let i = domain.index_of(x).ok_or_else(|| Error::Format(format!("unknown domain id {x}")))?;
            let j = codomain.index_of(y).ok_or_else(|| Error::Format(format!("unknown codomain id {y}")))?;
            if image[i] != usize::MAX {
                return Err(Error::Format(format!("domain point {x} mapped twice")));
            }
            image[i] = j;
        }
        if image.contains(&usize::MAX) {
            return Err(Error::Format("some domain point is not mapped".into()));
        }
        Self::new(domain, codomain, image)
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// `(d_X(x, y), d_Y(f x, f y))` over unordered pairs among `points`.
    fn pairs(&self, points: &[usize]) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (ai, &i) in points.iter().enumerate() {
            for &j in &points[ai + 1..] {
                out.push((self.domain.d(i, j).to_f64_lossy(), self.codomain.d(self.image[i], self.image[j]).to_f64_lossy()));
            }
        }
        out
    }
}

/// `L` forced by `K`: `max(0, max over pairs of max(b - K a, a / K - b))`.
/// Relative rounding slack in the quasi-isometry fit: per-pair excesses
/// and ratios within `FIT_SLACK * (1 + a + b)` count as exact.
pub const FIT_SLACK: f64 = 1e-12;

pub fn required_l(pairs: &[(f64, f64)], k: f64) -> f64 {
    pairs.iter().fold(0f64, |l, &(a, b)| {
        let excess = (b - k * a).max(a / k - b);
        if excess <= FIT_SLACK * (1.0 + a + b) {
            l
        } else {
            l.max(excess)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiIsometryFit {
    pub k: f64,
    pub l: f64,
    /// Whether `L(K)` reaches its infimum at a finite `K`.
    pub attained: bool,
    /// Required `L` at the fitted `K` on growing prefixes `(radius, L)`.
    pub trend: Vec<(f64, f64)>,
    /// Required `L` keeps growing with the radius: evidence against a
    /// quasi-isometry, never a proof.
    pub refuted: bool,
    pub label: SampleLabel,
}

/// Fits `(1/K) d_X - L <= d_Y <= K d_X + L`.
///
/// `L(K)` is nonincreasing in `K`; the fit takes the smallest `K >= 1` at
/// which `L` reaches its infimum over `K`, and that `L`. When no finite `K`
/// reaches it, `K + L(K)` is minimized over a geometric grid.
pub fn fit_quasi_isometry<T: Scalar>(map: &CoarseMapSample<T>) -> Result<QuasiIsometryFit> {
    let n = map.domain.len();
    if n < 2 {
        return Err(Error::Precondition("need at least 2 points".into()));
    }
    let all: Vec<usize> = (0..n).collect();
    let pairs = map.pairs(&all);
    // Infimum over K: only coincident domain points keep L positive.
    let l_inf = pairs.iter().filter(|p| p.0 == 0.0).fold(0f64, |l, p| l.max(p.1));
    let mut k = 1f64;
    let mut attained = true;
    for &(a, b) in &pairs {
        if a == 0.0 {
            continue;
        }
        k = k.max((b - l_inf) / a);
        if b + l_inf > 0.0 {
            k = k.max(a / (b + l_inf));
        } else {
            attained = false;
        }
    }
    if !attained {
        // No finite K reaches the infimum; balance the two constants instead.
        k = (0..=400)
            .map(|i| 1.05f64.powi(i))
            .min_by(|&x, &y| (x + required_l(&pairs, x)).total_cmp(&(y + required_l(&pairs, y))))
            .expect("nonempty grid");
    }
    if k <= 1.0 + FIT_SLACK {
        k = 1.0;
    }
    let l = required_l(&pairs, k);

    let o = map.domain.origin();
    let mut order = all.clone();
    order.sort_by(|&x, &y| map.domain.d(o, x).partial_cmp(&map.domain.d(o, y)).unwrap_or(std::cmp::Ordering::Equal));
    let mut trend = Vec::new();
    for q in [0.25, 0.5, 0.75, 1.0] {
        let m = ((n as f64 * q).ceil() as usize).clamp(2, n);
        let sub = &order[..m];
        let r = map.domain.d(o, sub[m - 1]).to_f64_lossy();
        trend.push((r, required_l(&map.pairs(sub), k)));
    }
    let refuted = trend.windows(2).all(|w| w[1].1 > w[0].1 + 1e-12) && trend[3].1 > 0.1 * trend[3].0;
    Ok(QuasiIsometryFit {
        k,
        l,
        attained,
        trend,
        refuted,
        label: map.domain.label(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModuliBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub min_image: Option<f64>,
    pub max_image: Option<f64>,
    /// Monotone lower envelope `rho_1` at this bin.
    pub rho1: f64,
    /// Monotone upper envelope `rho_2` at this bin.
    pub rho2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoarseModuli {
    pub bin_width: f64,
    pub bins: Vec<ModuliBin>,
    /// The lower envelope keeps growing across the sampled range.
    pub expansive: bool,
    pub label: SampleLabel,
}

/// Slope of the lower envelope, relative to the bin position, above which
/// the top bin counts as expanding.
pub const EXPANSION_SLOPE: f64 = 0.1;

/// Empirical `rho_1 <= d_Y(f x, f y) <= rho_2` per domain-distance bin;
/// `bins` defaults to 20 bins over the largest sampled distance.
pub fn fit_coarse_moduli<T: Scalar>(map: &CoarseMapSample<T>, bins: Option<usize>) -> Result<CoarseModuli> {
    let n = map.domain.len();
    if n < 2 {
        return Err(Error::Precondition("need at least 2 points".into()));
    }
    let all: Vec<usize> = (0..n).collect();
    let pairs = map.pairs(&all);
    let r = pairs.iter().fold(0f64, |m, p| m.max(p.0));
    let count = bins.unwrap_or(20).max(1);
    let width = if r > 0.0 { r / count as f64 } else { 1.0 };
    let mut out: Vec<ModuliBin> = (0..count)
        .map(|i| ModuliBin {
            lo: i as f64 * width,
            hi: (i + 1) as f64 * width,
            count: 0,
            min_image: None,
            max_image: None,
            rho1: 0.0,
            rho2: 0.0,
        })
        .collect();
    for &(a, b) in &pairs {
        let i = ((a / width) as usize).min(count - 1);
        let bin = &mut out[i];
        bin.count += 1;
        bin.min_image = Some(bin.min_image.map_or(b, |m| m.min(b)));
        bin.max_image = Some(bin.max_image.map_or(b, |m| m.max(b)));
    }
    let mut running = f64::INFINITY;
    for bin in out.iter_mut().rev() {
        if let Some(m) = bin.min_image {
            running = running.min(m);
        }
        bin.rho1 = if running.is_finite() { running } else { 0.0 };
    }
    let mut running = 0f64;
    for bin in out.iter_mut() {
        if let Some(m) = bin.max_image {
            running = running.max(m);
        }
        bin.rho2 = running;
    }
    let top = out.iter().rev().find(|b| b.count > 0).expect("at least one pair");
    let expansive = top.rho1 >= EXPANSION_SLOPE * top.lo.max(width) && top.rho1 > 0.0;
    Ok(CoarseModuli {
        bin_width: width,
        bins: out,
        expansive,
        label: map.domain.label(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, spacing: f64) -> SampledSpace<f64> {
        SampledSpace::indexed(n, 0, |i, j| spacing * (i as f64 - j as f64).abs()).unwrap()
    }

    #[test]
    fn validation() {
        let ids = vec!["a".to_string(), "b".into(), "c".into()];
        let bad = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        assert!(SampledSpace::new(ids.clone(), bad, 0).is_err());
        let asym = vec![vec![0.0, 1.0, 1.0], vec![2.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        assert!(SampledSpace::new(ids, asym, 0).is_err());
    }

    #[test]
    fn csv_and_json_round_trip() {
        let s = line(4, 0.5);
        let back = SampledSpace::<f64>::from_csv(s.to_csv().as_bytes(), Some("0")).unwrap();
        assert_eq!(back, s);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<SampledSpace<f64>>(&json).unwrap(), s);
        let with_header = "from,to,distance\na,b,1\n";
        let two = SampledSpace::<f64>::from_csv(with_header.as_bytes(), None).unwrap();
        assert_eq!(two.d(0, 1), 1.0);
        assert!(SampledSpace::<f64>::from_csv("a,b,1\nb,c,1\n".as_bytes(), None).is_err());
    }

    #[test]
    fn coarse_properness_examples() {
        let near = line(5, 0.1);
        let r = check_coarsely_proper(&near, 1.0, 1.0, None, &IntraSampleOracle).unwrap();
        assert!(r.holds);
        assert_eq!(r.max_k, 1);
        let z = SampledSpace::indexed(6, 0, |i, j| if i == j { 0.0 } else { 10.0 }).unwrap();
        let r = check_coarsely_proper(&z, 100.0, 1.0, None, &IntraSampleOracle).unwrap();
        assert!(!r.holds && r.counterexample.is_some());
        assert_eq!(r.label.to_string(), "sampled at 6 points, radius 10");
    }

    #[test]
    fn geodesic_examples() {
        let fine = line(41, 0.05);
        let r = check_large_scale_geodesic(&fine, 1.01, &IntraSampleOracle).unwrap();
        assert!(r.holds && r.k_found <= 1.01);
        let two = SampledSpace::indexed(2, 0, |_, _| 10.0).unwrap();
        let r = check_large_scale_geodesic(&two, 1.0, &IntraSampleOracle).unwrap();
        assert!(!r.holds);
        // Monotone in K.
        for k in [2.0, 5.0, 10.0, 20.0] {
            let r = check_large_scale_geodesic(&two, k, &IntraSampleOracle).unwrap();
            assert_eq!(r.holds, k >= 10.0);
        }
    }

    #[test]
    fn quasi_isometry_examples() {
        let s = line(12, 0.7);
        let id = CoarseMapSample::new(s.clone(), s.clone(), (0..12).collect()).unwrap();
        let fit = fit_quasi_isometry(&id).unwrap();
        assert_eq!((fit.k, fit.l), (1.0, 0.0));
        let scaled = CoarseMapSample::new(s.clone(), line(12, 2.1), (0..12).collect()).unwrap();
        let fit = fit_quasi_isometry(&scaled).unwrap();
        assert!((fit.k - 3.0).abs() < 1e-12 && fit.l == 0.0);
        // Collapsing the line to a point: no quasi-isometry, L grows with R.
        let point = SampledSpace::indexed(1, 0, |_, _| 0.0).unwrap();
        let collapse = CoarseMapSample::new(s, point, vec![0; 12]).unwrap();
        let fit = fit_quasi_isometry(&collapse).unwrap();
        assert!(fit.refuted);
    }

    #[test]
    fn rounding_level_isometry_fits_exactly() {
        let a = SampledSpace::indexed(20, 0, |i, j| (0.1 * i as f64 - 0.1 * j as f64).abs()).unwrap();
        let b = SampledSpace::indexed(20, 0, |i, j| ((0.1 * i as f64 + 0.3) - (0.1 * j as f64 + 0.3)).abs()).unwrap();
        assert_ne!(a, b);
        let fit = fit_quasi_isometry(&CoarseMapSample::new(a, b, (0..20).collect()).unwrap()).unwrap();
        assert_eq!((fit.k, fit.l), (1.0, 0.0));
    }

    #[test]
    fn moduli_examples() {
        let s = line(30, 1.0);
        let id = CoarseMapSample::new(s.clone(), s.clone(), (0..30).collect()).unwrap();
        let m = fit_coarse_moduli(&id, None).unwrap();
        assert!(m.expansive);
        for b in m.bins.iter().filter(|b| b.count > 0) {
            assert!(b.rho1 >= b.lo - 1e-12 && b.rho2 <= b.hi + 1e-12);
        }
        let point = SampledSpace::indexed(1, 0, |_, _| 0.0).unwrap();
        let m = fit_coarse_moduli(&CoarseMapSample::new(s, point, vec![0; 30]).unwrap(), None).unwrap();
        assert!(!m.expansive);
        assert!(m.bins.iter().all(|b| b.rho2 == 0.0));
    }
}
