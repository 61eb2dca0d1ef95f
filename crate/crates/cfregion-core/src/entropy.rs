//! Entropy functionals: exact Shannon entropies of finite pmfs, algebraic
//! entropies of integer-matrix images of discrete and Gaussian sources,
//! conditional variants, and seeded Monte-Carlo quantized estimates.
//!
//! All values are in bits. Discrete computations are exact pushforwards with
//! deterministic (sorted) floating-point summation, so equal probability
//! multisets always produce bit-identical entropies — relabelling a source
//! bijectively cannot change the reported value even in the last ulp.

use crate::linalg::{smith_normal_form, IntMatrix, LinAlgError};
use crate::worker_count;
use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

pub const LOG2_2PIE: f64 = 4.094191289364193; // log2(2*pi*e)

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("probabilities must be nonnegative, found {p}")]
    NegativeProbability { p: f64 },
    #[error("probabilities sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("duplicate support point")]
    DuplicateSupportPoint,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("covariance matrix is not symmetric")]
    NotSymmetric,
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("covariance of the transformed source is numerically singular")]
    SingularCovariance,
    #[error("source carries no conditional covariance")]
    MissingConditional,
    #[error("estimator needs at least {min} samples, got {n}")]
    TooFewSamples { n: usize, min: usize },
    #[error(transparent)]
    Linalg(#[from] LinAlgError),
}

/// Whether an entropy is a discrete Shannon entropy or a differential one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EntropyKind {
    Discrete,
    Differential,
}

/// An entropy in bits, tagged with its kind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropyValue {
    pub bits: f64,
    pub kind: EntropyKind,
}

impl EntropyValue {
    pub fn discrete(bits: f64) -> Self {
        EntropyValue {
            bits,
            kind: EntropyKind::Discrete,
        }
    }

    pub fn differential(bits: f64) -> Self {
        EntropyValue {
            bits,
            kind: EntropyKind::Differential,
        }
    }
}

/// Deterministic entropy of a probability multiset: terms are sorted before
/// summation so the result depends only on the multiset of probabilities.
fn entropy_bits_of_probs(probs: &[f64]) -> f64 {
    let mut terms: Vec<f64> = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .collect();
    terms.sort_by(|a, b| a.total_cmp(b));
    terms.iter().sum()
}

/// Deterministic sum of a multiset of f64 values.
fn sorted_sum(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    v.iter().sum()
}

// ---------------------------------------------------------------------------
// Discrete sources
// ---------------------------------------------------------------------------

/// Finitely supported pmf on integer K-vectors, canonically sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretePmf {
    dim: usize,
    support: Vec<Vec<i64>>,
    probs: Vec<f64>,
}

impl DiscretePmf {
    /// Builds a pmf from (point, probability) pairs. Probabilities must be
    /// nonnegative and sum to 1 within 1e-9; support points must be distinct
    /// and of equal dimension.
    pub fn new(points: Vec<(Vec<i64>, f64)>) -> Result<Self, EntropyError> {
        let dim = points
            .first()
            .map(|(u, _)| u.len())
            .ok_or_else(|| EntropyError::DimensionMismatch("empty support".into()))?;
        let mut pairs = points;
        for (u, p) in &pairs {
            if u.len() != dim {
                return Err(EntropyError::DimensionMismatch(
                    "support points of unequal dimension".into(),
                ));
            }
            if *p < 0.0 {
                return Err(EntropyError::NegativeProbability { p: *p });
            }
        }
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(EntropyError::DuplicateSupportPoint);
        }
        let sum = sorted_sum(pairs.iter().map(|(_, p)| *p).collect());
        if (sum - 1.0).abs() > 1e-12 {
            return Err(EntropyError::NotNormalized { sum });
        }
        let (support, probs) = pairs.into_iter().unzip();
        Ok(DiscretePmf {
            dim,
            support,
            probs,
        })
    }

    /// Product pmf of independent per-user scalar pmfs (user k's pmf over its
    /// own symbol alphabet). The product is renormalised by its exact sum so
    /// accumulated rounding from the per-user inputs cannot violate the
    /// normalisation invariant.
    pub fn from_independent(users: &[Vec<(i64, f64)>]) -> Result<Self, EntropyError> {
        if users.is_empty() {
            return Err(EntropyError::DimensionMismatch("no users".into()));
        }
        let mut points: Vec<(Vec<i64>, f64)> = vec![(Vec::new(), 1.0)];
        for user in users {
            let mut next = Vec::with_capacity(points.len() * user.len());
            for (prefix, p) in &points {
                for (sym, q) in user {
                    if *q < 0.0 {
                        return Err(EntropyError::NegativeProbability { p: *q });
                    }
                    let mut v = prefix.clone();
                    v.push(*sym);
                    next.push((v, p * q));
                }
            }
            points = next;
        }
        let total = sorted_sum(points.iter().map(|(_, p)| *p).collect());
        if (total - 1.0).abs() > 1e-6 {
            return Err(EntropyError::NotNormalized { sum: total });
        }
        for (_, p) in points.iter_mut() {
            *p /= total;
        }
        DiscretePmf::new(points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i64], f64)> {
        self.support
            .iter()
            .map(|u| u.as_slice())
            .zip(self.probs.iter().copied())
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    /// Exact Shannon entropy in bits.
    pub fn entropy(&self) -> EntropyValue {
        EntropyValue::discrete(entropy_bits_of_probs(&self.probs))
    }
}

/// Joint distribution of an integer K-vector `u` and a finite observation
/// `Y`, stored as (u, y-index, probability) triples in canonical order.
#[derive(Clone, Debug)]
pub struct JointDiscreteSource {
    dim: usize,
    y_size: usize,
    entries: Vec<(Vec<i64>, usize, f64)>,
    y_probs: Vec<f64>,
}

impl JointDiscreteSource {
    pub fn new(
        dim: usize,
        y_size: usize,
        entries: Vec<(Vec<i64>, usize, f64)>,
    ) -> Result<Self, EntropyError> {
        let mut entries = entries;
        for (u, y, p) in &entries {
            if u.len() != dim {
                return Err(EntropyError::DimensionMismatch(
                    "joint entry of wrong dimension".into(),
                ));
            }
            if *y >= y_size {
                return Err(EntropyError::DimensionMismatch(format!(
                    "y index {y} outside alphabet of size {y_size}"
                )));
            }
            if *p < 0.0 {
                return Err(EntropyError::NegativeProbability { p: *p });
            }
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        if entries.windows(2).any(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
            return Err(EntropyError::DuplicateSupportPoint);
        }
        let sum = sorted_sum(entries.iter().map(|e| e.2).collect());
        if (sum - 1.0).abs() > 1e-9 {
            return Err(EntropyError::NotNormalized { sum });
        }
        // Marginal over y with deterministic per-cell summation.
        let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); y_size];
        for (_, y, p) in &entries {
            buckets[*y].push(*p);
        }
        let y_probs: Vec<f64> = buckets.into_iter().map(sorted_sum).collect();
        Ok(JointDiscreteSource {
            dim,
            y_size,
            entries,
            y_probs,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn y_probs(&self) -> &[f64] {
        &self.y_probs
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[i64], usize, f64)> {
        self.entries.iter().map(|(u, y, p)| (u.as_slice(), *y, *p))
    }

    /// Marginal pmf of `u`.
    pub fn marginal_u(&self) -> DiscretePmf {
        let mut map: BTreeMap<Vec<i64>, Vec<f64>> = BTreeMap::new();
        for (u, _, p) in &self.entries {
            map.entry(u.clone()).or_default().push(*p);
        }
        let points: Vec<(Vec<i64>, f64)> =
            map.into_iter().map(|(u, ps)| (u, sorted_sum(ps))).collect();
        DiscretePmf::new(points).expect("marginal of a valid joint source is valid")
    }

    /// Number of (u, y) atoms.
    pub fn state_count(&self) -> usize {
        self.entries.len()
    }
}

/// Exact Shannon entropy of a pmf.
pub fn shannon_entropy(p: &DiscretePmf) -> EntropyValue {
    p.entropy()
}

/// Exact Shannon entropy of a raw finite distribution.
pub fn shannon_entropy_of_probs(probs: &[f64]) -> Result<EntropyValue, EntropyError> {
    for &p in probs {
        if p < 0.0 {
            return Err(EntropyError::NegativeProbability { p });
        }
    }
    let sum = sorted_sum(probs.to_vec());
    if (sum - 1.0).abs() > 1e-9 {
        return Err(EntropyError::NotNormalized { sum });
    }
    Ok(EntropyValue::discrete(entropy_bits_of_probs(probs)))
}

/// Pushforward entropy H(map(u)) with deterministic, relabelling-invariant
/// summation. Internal building block shared by the exact entropy ops.
pub(crate) fn pushforward_entropy_bits(
    p: &DiscretePmf,
    mut map: impl FnMut(&[i64]) -> Vec<i64>,
) -> f64 {
    let mut cells: BTreeMap<Vec<i64>, Vec<f64>> = BTreeMap::new();
    for (u, prob) in p.iter() {
        cells.entry(map(u)).or_default().push(prob);
    }
    let probs: Vec<f64> = cells.into_values().map(sorted_sum).collect();
    entropy_bits_of_probs(&probs)
}

/// Conditional pushforward entropy H(map(u) | Y) with deterministic,
/// relabelling-invariant summation: each term p log2(p_y/p) is nonnegative,
/// and the whole sum is over a sorted multiset.
pub(crate) fn conditional_pushforward_entropy_bits(
    s: &JointDiscreteSource,
    mut map: impl FnMut(&[i64]) -> Vec<i64>,
) -> f64 {
    let mut cells: BTreeMap<(usize, Vec<i64>), Vec<f64>> = BTreeMap::new();
    for (u, y, p) in s.entries() {
        cells.entry((y, map(u))).or_default().push(p);
    }
    let mut terms: Vec<f64> = Vec::with_capacity(cells.len());
    for ((y, _), ps) in cells {
        let p = sorted_sum(ps);
        if p > 0.0 {
            terms.push(p * (s.y_probs[y] / p).log2());
        }
    }
    terms.sort_by(|a, b| a.total_cmp(b));
    terms.iter().sum()
}

fn apply_int_matrix(q: &[Vec<i64>], u: &[i64]) -> Vec<i64> {
    q.iter()
        .map(|row| row.iter().zip(u).map(|(a, b)| a * b).sum())
        .collect()
}

fn int_matrix_rows(q: &IntMatrix) -> Result<Vec<Vec<i64>>, EntropyError> {
    q.to_rows_i64().map_err(EntropyError::from)
}

/// Algebraic entropy of a discrete source: exactly H(Qu), by pushing the pmf
/// through `u -> Qu`.
pub fn algebraic_entropy_discrete(
    q: &IntMatrix,
    p: &DiscretePmf,
) -> Result<EntropyValue, EntropyError> {
    if q.cols() != p.dim() {
        return Err(EntropyError::DimensionMismatch(format!(
            "matrix has {} columns, source dimension is {}",
            q.cols(),
            p.dim()
        )));
    }
    let rows = int_matrix_rows(q)?;
    Ok(EntropyValue::discrete(pushforward_entropy_bits(p, |u| {
        apply_int_matrix(&rows, u)
    })))
}

/// Conditional algebraic entropy of a discrete source: exactly H(Qu | Y).
pub fn conditional_algebraic_entropy_discrete(
    q: &IntMatrix,
    s: &JointDiscreteSource,
) -> Result<EntropyValue, EntropyError> {
    if q.cols() != s.dim() {
        return Err(EntropyError::DimensionMismatch(format!(
            "matrix has {} columns, source dimension is {}",
            q.cols(),
            s.dim()
        )));
    }
    let rows = int_matrix_rows(q)?;
    Ok(EntropyValue::discrete(
        conditional_pushforward_entropy_bits(s, |u| apply_int_matrix(&rows, u)),
    ))
}

// ---------------------------------------------------------------------------
// Gaussian sources
// ---------------------------------------------------------------------------

/// A centred Gaussian vector source with a prior covariance and, optionally,
/// a conditional (posterior-given-Y) covariance.
#[derive(Clone, Debug)]
pub struct GaussianSource {
    dim: usize,
    covariance: DMatrix<f64>,
    conditional: Option<DMatrix<f64>>,
}

fn check_spd(m: &DMatrix<f64>) -> Result<(), EntropyError> {
    if m.nrows() != m.ncols() {
        return Err(EntropyError::DimensionMismatch(
            "covariance must be square".into(),
        ));
    }
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * (1.0 + m[(i, i)].abs() + m[(j, j)].abs()) {
                return Err(EntropyError::NotSymmetric);
            }
        }
    }
    if m.clone().cholesky().is_none() {
        return Err(EntropyError::NotPositiveDefinite);
    }
    Ok(())
}

impl GaussianSource {
    pub fn new(
        covariance: DMatrix<f64>,
        conditional: Option<DMatrix<f64>>,
    ) -> Result<Self, EntropyError> {
        check_spd(&covariance)?;
        if let Some(c) = &conditional {
            check_spd(c)?;
            if c.nrows() != covariance.nrows() {
                return Err(EntropyError::DimensionMismatch(
                    "conditional covariance dimension differs from prior".into(),
                ));
            }
        }
        Ok(GaussianSource {
            dim: covariance.nrows(),
            covariance,
            conditional,
        })
    }

    pub fn from_rows(
        covariance: &[Vec<f64>],
        conditional: Option<&[Vec<f64>]>,
    ) -> Result<Self, EntropyError> {
        let to_dm = |rows: &[Vec<f64>]| -> Result<DMatrix<f64>, EntropyError> {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(EntropyError::DimensionMismatch(
                    "covariance rows must form a square matrix".into(),
                ));
            }
            Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
        };
        let cov = to_dm(covariance)?;
        let cond = conditional.map(to_dm).transpose()?;
        GaussianSource::new(cov, cond)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn conditional(&self) -> Option<&DMatrix<f64>> {
        self.conditional.as_ref()
    }
}

/// Conditional covariance of scaled inputs given the channel output of a
/// Gaussian MAC `Y = H x + noise` with `u_k = beta_k x_k`, `x_k ~ N(0, P_k)`:
/// prior `diag(beta^2 P)` and posterior `diag(beta) (P^{-1} + H^T H)^{-1}
/// diag(beta)`.
pub fn gaussian_conditional_covariance(
    h: &[Vec<f64>],
    p: &[f64],
    beta: &[f64],
) -> Result<GaussianSource, EntropyError> {
    let k = p.len();
    if beta.len() != k || h.iter().any(|row| row.len() != k) {
        return Err(EntropyError::DimensionMismatch(
            "H columns, P, and beta must agree on the user count".into(),
        ));
    }
    if p.iter().any(|&x| x <= 0.0) || beta.iter().any(|&x| x <= 0.0) {
        return Err(EntropyError::NotPositiveDefinite);
    }
    let m = h.len();
    let hm = DMatrix::from_fn(m, k, |i, j| h[i][j]);
    let mut inner = hm.transpose() * &hm;
    for i in 0..k {
        inner[(i, i)] += 1.0 / p[i];
    }
    let inv = inner
        .try_inverse()
        .ok_or(EntropyError::SingularCovariance)?;
    let db = DMatrix::from_fn(k, k, |i, j| if i == j { beta[i] } else { 0.0 });
    let mut posterior = &db * inv * &db;
    // Symmetrise away inversion round-off.
    for i in 0..k {
        for j in 0..i {
            let avg = 0.5 * (posterior[(i, j)] + posterior[(j, i)]);
            posterior[(i, j)] = avg;
            posterior[(j, i)] = avg;
        }
    }
    let prior = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            beta[i] * beta[i] * p[i]
        } else {
            0.0
        }
    });
    GaussianSource::new(prior, Some(posterior))
}

/// log2-determinant of a symmetric positive-definite matrix, with a
/// symmetric-eigenvalue fallback when Cholesky fails or its conditioning
/// exceeds 1e12.
fn log2_det_spd(m: &DMatrix<f64>) -> Result<f64, EntropyError> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    if let Some(chol) = m.clone().cholesky() {
        let diag: Vec<f64> = (0..m.nrows()).map(|i| chol.l_dirty()[(i, i)]).collect();
        let max = diag.iter().cloned().fold(f64::MIN, f64::max);
        let min = diag.iter().cloned().fold(f64::MAX, f64::min);
        if min > 0.0 && (max / min) * (max / min) <= 1e12 {
            return Ok(2.0 * diag.iter().map(|d| d.log2()).sum::<f64>());
        }
    }
    let eig = m.clone().symmetric_eigen();
    let mut acc = 0.0;
    for &lambda in eig.eigenvalues.iter() {
        if lambda <= 0.0 {
            return Err(EntropyError::SingularCovariance);
        }
        acc += lambda.log2();
    }
    Ok(acc)
}

/// Gaussian algebraic entropy: (r/2) log2(2 pi e) + (1/2) log2 det(T S T^T)
/// where `T` is the right factor of the Smith form of `Q`, `r = rank(Q)`, and
/// `S` the prior (`conditional = false`) or posterior covariance. Always goes
/// through `T(Q)` so rank-deficient `Q` is handled correctly.
pub fn gaussian_algebraic_entropy(
    q: &IntMatrix,
    g: &GaussianSource,
    conditional: bool,
) -> Result<EntropyValue, EntropyError> {
    if q.cols() != g.dim() {
        return Err(EntropyError::DimensionMismatch(format!(
            "matrix has {} columns, source dimension is {}",
            q.cols(),
            g.dim()
        )));
    }
    let sigma = if conditional {
        g.conditional().ok_or(EntropyError::MissingConditional)?
    } else {
        g.covariance()
    };
    let sf = smith_normal_form(q);
    let r = sf.rank;
    if r == 0 {
        return Ok(EntropyValue::differential(0.0));
    }
    let t = DMatrix::from_fn(r, q.cols(), |i, j| {
        sf.t.get(i, j).to_f64().expect("Smith factor fits in f64")
    });
    let mid = &t * sigma * t.transpose();
    let logdet = log2_det_spd(&mid)?;
    Ok(EntropyValue::differential(
        0.5 * (r as f64) * LOG2_2PIE + 0.5 * logdet,
    ))
}

// ---------------------------------------------------------------------------
// Quantized Monte-Carlo estimation
// ---------------------------------------------------------------------------

/// Source of real K-vectors for the quantized estimator.
pub trait VectorSampler: Sync {
    fn dim(&self) -> usize;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
}

/// Result of a quantized plug-in entropy estimate.
#[derive(Clone, Debug, Serialize)]
pub struct QuantizedEstimate {
    /// Plug-in estimate of H(Q floor(nu u)) in bits.
    pub value: EntropyValue,
    /// Monte-Carlo standard error of the estimate, in bits.
    pub std_error: f64,
    /// Plug-in bias bound (support size - 1) / (2 n ln 2), in bits.
    pub bias_bound: f64,
    /// Number of occupied histogram cells.
    pub support_cells: usize,
    /// Sample count.
    pub samples: usize,
}

const ESTIMATE_SHARDS: usize = 16;
const MIN_SAMPLES: usize = 10_000;
const MAX_ESTIMATE_DIM: usize = 4;

/// Plug-in entropy estimate of the discrete variable `Q floor(nu * u)` from
/// `n_samples` draws of the sampler. Deterministic for a fixed seed: samples
/// are split across 16 fixed shards with per-shard derived seeds, and the
/// shard histograms are merged and summed in a canonical order, so the result
/// does not depend on the worker-thread count.
pub fn quantized_entropy_estimate(
    sampler: &dyn VectorSampler,
    q: &IntMatrix,
    nu: u64,
    n_samples: usize,
    seed: u64,
) -> Result<QuantizedEstimate, EntropyError> {
    if n_samples < MIN_SAMPLES {
        return Err(EntropyError::TooFewSamples {
            n: n_samples,
            min: MIN_SAMPLES,
        });
    }
    if q.cols() != sampler.dim() {
        return Err(EntropyError::DimensionMismatch(format!(
            "matrix has {} columns, sampler dimension is {}",
            q.cols(),
            sampler.dim()
        )));
    }
    if q.rows() > MAX_ESTIMATE_DIM {
        return Err(EntropyError::DimensionMismatch(format!(
            "estimator supports up to {MAX_ESTIMATE_DIM} output dimensions, got {}",
            q.rows()
        )));
    }
    let rows = int_matrix_rows(q)?;
    let in_dim = sampler.dim();
    let nu_f = nu as f64;

    let shard_sizes: Vec<usize> = (0..ESTIMATE_SHARDS)
        .map(|i| n_samples / ESTIMATE_SHARDS + usize::from(i < n_samples % ESTIMATE_SHARDS))
        .collect();

    let run_shard = |shard: usize| -> HashMap<[i64; MAX_ESTIMATE_DIM], u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed.wrapping_add((shard as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        let mut hist: HashMap<[i64; MAX_ESTIMATE_DIM], u64> = HashMap::new();
        let mut floor_buf = vec![0i64; in_dim];
        for _ in 0..shard_sizes[shard] {
            let u = sampler.sample(&mut rng);
            for (fb, x) in floor_buf.iter_mut().zip(&u) {
                *fb = (nu_f * x).floor() as i64;
            }
            let mut key = [0i64; MAX_ESTIMATE_DIM];
            for (ki, row) in key.iter_mut().zip(&rows) {
                *ki = row.iter().zip(&floor_buf).map(|(a, b)| a * b).sum();
            }
            *hist.entry(key).or_insert(0) += 1;
        }
        hist
    };

    let workers = worker_count().min(ESTIMATE_SHARDS);
    let shard_hists: Vec<HashMap<[i64; MAX_ESTIMATE_DIM], u64>> = if workers <= 1 {
        (0..ESTIMATE_SHARDS).map(run_shard).collect()
    } else {
        let mut results: Vec<Option<HashMap<[i64; MAX_ESTIMATE_DIM], u64>>> =
            (0..ESTIMATE_SHARDS).map(|_| None).collect();
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots = std::sync::Mutex::new(&mut results);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if i >= ESTIMATE_SHARDS {
                        break;
                    }
                    let h = run_shard(i);
                    slots.lock().expect("shard slot lock")[i] = Some(h);
                });
            }
        });
        results.into_iter().map(|h| h.expect("shard ran")).collect()
    };

    let mut merged: BTreeMap<[i64; MAX_ESTIMATE_DIM], u64> = BTreeMap::new();
    for hist in shard_hists {
        for (k, c) in hist {
            *merged.entry(k).or_insert(0) += c;
        }
    }

    let n = n_samples as f64;
    let mut counts: Vec<u64> = merged.values().copied().collect();
    counts.sort_unstable();
    let mut h_terms: Vec<f64> = counts
        .iter()
        .map(|&c| {
            let c = c as f64;
            c * (c).log2()
        })
        .collect();
    h_terms.sort_by(|a, b| a.total_cmp(b));
    let h = n.log2() - h_terms.iter().sum::<f64>() / n;
    // Variance of the information content, for the standard error.
    let mut v_terms: Vec<f64> = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * (p.log2()) * (p.log2())
        })
        .collect();
    v_terms.sort_by(|a, b| a.total_cmp(b));
    let var = (v_terms.iter().sum::<f64>() - h * h).max(0.0);
    let cells = counts.len();
    Ok(QuantizedEstimate {
        value: EntropyValue::discrete(h),
        std_error: (var / n).sqrt(),
        bias_bound: (cells.saturating_sub(1)) as f64 / (2.0 * n * std::f64::consts::LN_2),
        support_cells: cells,
        samples: n_samples,
    })
}

/// Sampler over a finite pmf (useful to cross-check the estimator against
/// exact entropies).
pub struct PmfSampler {
    pmf: DiscretePmf,
    cumulative: Vec<f64>,
}

impl PmfSampler {
    pub fn new(pmf: DiscretePmf) -> Self {
        let mut cumulative = Vec::with_capacity(pmf.support_size());
        let mut acc = 0.0;
        for (_, p) in pmf.iter() {
            acc += p;
            cumulative.push(acc);
        }
        PmfSampler { pmf, cumulative }
    }
}

impl VectorSampler for PmfSampler {
    fn dim(&self) -> usize {
        self.pmf.dim()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        use rand::Rng;
        let x: f64 = rng.gen();
        let idx = self
            .cumulative
            .iter()
            .position(|&c| x < c)
            .unwrap_or(self.cumulative.len() - 1);
        self.pmf.support[idx].iter().map(|&v| v as f64).collect()
    }
}

/// Multivariate Gaussian sampler with a fixed covariance (zero mean).
pub struct GaussianSampler {
    dim: usize,
    chol: DMatrix<f64>,
}

impl GaussianSampler {
    pub fn new(covariance: DMatrix<f64>) -> Result<Self, EntropyError> {
        let dim = covariance.nrows();
        let chol = covariance
            .cholesky()
            .ok_or(EntropyError::NotPositiveDefinite)?;
        Ok(GaussianSampler {
            dim,
            chol: chol.l(),
        })
    }

    pub fn standard(dim: usize) -> Self {
        GaussianSampler {
            dim,
            chol: DMatrix::identity(dim, dim),
        }
    }
}

impl VectorSampler for GaussianSampler {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        use rand::Rng;
        use rand_distr::StandardNormal;
        let z = DVector::from_fn(self.dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let v = &self.chol * z;
        v.iter().copied().collect()
    }
}
