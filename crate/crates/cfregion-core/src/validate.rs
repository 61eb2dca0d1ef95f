//! Randomized and exact self-checks for the entropy estimators and the
//! lattice bounds that the rate-region computations rest on.
//!
//! Each check returns a [`CheckReport`] carrying the smallest slack observed
//! across every inequality it tested (`worst_margin`, negative means a
//! violation). All checks are deterministic for a fixed seed: randomized
//! trials derive one RNG seed per trial index, so the outcome depends
//! neither on execution order nor on the worker count.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cf::{adjugate_i64, det_f64, det_i128, CfError, ChannelSpec, SpecContext};
use crate::entropy::{
    conditional_pushforward_entropy_bits, pushforward_entropy_bits, quantized_entropy_estimate,
    DiscretePmf, EntropyError, GaussianSampler, JointDiscreteSource, VectorSampler, LOG2_2PIE,
};
use crate::linalg::{
    rational_inverse, right_inverse, successive_minima, IntMatrix, LinAlgError, Norm,
};

/// Exact-equality tolerance for checks whose two sides are computed by
/// different groupings of the same exact probabilities.
const EXACT_TOL: f64 = 1e-12;

/// Tolerance for Gaussian closed-form identities evaluated in floating point.
const GAUSSIAN_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ValidateError {
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error(transparent)]
    Spec(#[from] CfError),
    #[error("invalid check configuration: {0}")]
    Config(String),
}

/// Outcome of one validation check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    /// Stable check name, matching the CLI suite names.
    pub name: String,
    /// Number of trials (or schedule points) the check examined.
    pub trials: usize,
    /// Smallest slack observed over all tested inequalities, in bits unless
    /// the notes say otherwise; negative means at least one violation.
    pub worst_margin: f64,
    pub pass: bool,
    /// Master seed the check ran under, recorded even for exact checks.
    pub seed: u64,
    /// Human-readable summary of the observed quantities.
    pub notes: String,
}

impl CheckReport {
    fn new(name: &str, trials: usize, worst_margin: f64, seed: u64, notes: String) -> Self {
        CheckReport {
            name: name.to_string(),
            trials,
            worst_margin,
            pass: worst_margin >= 0.0,
            seed,
            notes,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial RNG seed derived from the master seed; stable under resharding.
fn derived_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(1)))
}

// ---------------------------------------------------------------------------
// Reference continuous distributions with known entropies.
// ---------------------------------------------------------------------------

struct UniformBoxSampler {
    width: f64,
    dim: usize,
}

impl VectorSampler for UniformBoxSampler {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.dim).map(|_| rng.gen::<f64>() * self.width).collect()
    }
}

/// Pushes samples of an inner distribution through a fixed real matrix, so
/// that `H(floor(nu * T u))` can be estimated with the same machinery as
/// `H(T floor(nu * u))`. Consumes exactly the inner sampler's random draws,
/// so paired estimates under the same seed see identical `u` samples.
struct LinearImageSampler<'a> {
    rows: Vec<Vec<f64>>,
    inner: &'a dyn VectorSampler,
}

impl VectorSampler for LinearImageSampler<'_> {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let u = self.inner.sample(rng);
        self.rows
            .iter()
            .map(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum())
            .collect()
    }
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

/// Entropy of `floor(Z)` for a standard normal `Z`, from the cell masses
/// `Phi(k+1) - Phi(k)`. Cells beyond |k| = 12 carry less than 1e-30 mass and
/// cannot move the sum at f64 precision.
fn std_normal_floor_entropy_bits() -> f64 {
    let mut terms: Vec<f64> = (-12i64..12)
        .map(|k| std_normal_cdf((k + 1) as f64) - std_normal_cdf(k as f64))
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .collect();
    terms.sort_by(|a, b| a.total_cmp(b));
    terms.iter().sum()
}

/// An absolutely continuous test distribution with known differential entropy
/// `h(u)` and known entropy `H(floor(u))` of its integer quantization. These
/// two closed forms are the ground truth the Monte-Carlo checks compare
/// against.
pub struct ReferenceContinuous {
    name: String,
    h_bits: f64,
    floor_entropy_bits: f64,
    sampler: Box<dyn VectorSampler>,
}

impl ReferenceContinuous {
    /// `dim` iid standard normal coordinates.
    pub fn standard_gaussian(dim: usize) -> Self {
        let scalar_floor = std_normal_floor_entropy_bits();
        ReferenceContinuous {
            name: format!("gaussian(dim={dim})"),
            h_bits: dim as f64 * 0.5 * LOG2_2PIE,
            floor_entropy_bits: dim as f64 * scalar_floor,
            sampler: Box::new(GaussianSampler::standard(dim)),
        }
    }

    /// `dim` iid coordinates uniform on `[0, width)` for an integer width,
    /// so that both `h(u)` and `H(floor(u))` equal `dim * log2(width)`.
    pub fn uniform(width: u32, dim: usize) -> Self {
        assert!(width >= 1, "width must be a positive integer");
        let bits = dim as f64 * f64::from(width).log2();
        ReferenceContinuous {
            name: format!("uniform(width={width}, dim={dim})"),
            h_bits: bits,
            floor_entropy_bits: bits,
            sampler: Box::new(UniformBoxSampler {
                width: f64::from(width),
                dim,
            }),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn differential_entropy_bits(&self) -> f64 {
        self.h_bits
    }

    pub fn floor_entropy_bits(&self) -> f64 {
        self.floor_entropy_bits
    }

    pub fn sampler(&self) -> &dyn VectorSampler {
        self.sampler.as_ref()
    }
}

/// The scales 1, 2, 4, ..., `max` (inclusive when `max` is a power of two).
pub fn dyadic_schedule(max: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    while *out.last().unwrap() * 2 <= max {
        let next = out.last().unwrap() * 2;
        out.push(next);
    }
    out
}

// ---------------------------------------------------------------------------
// Quantized-entropy sandwich and scaling chain.
// ---------------------------------------------------------------------------

/// Monte-Carlo check of the quantized-entropy scaling chain for an
/// absolutely continuous `u`. With `S_nu = H(floor(nu u)) - dim log2(nu)`
/// (plug-in estimate), verifies on the schedule that
///
/// * `h(u) <= S_nu <= H(floor(u))` within Monte-Carlo slack,
/// * `S` is non-increasing across divisibility steps of the schedule (exact
///   for plug-in estimates built from one shared sample set), and
/// * the terminal `S` is within 0.02 bits of `h(u)`.
pub fn check_renyi(
    dist: &ReferenceContinuous,
    nu_schedule: &[u64],
    n_samples: usize,
    seed: u64,
) -> Result<CheckReport, ValidateError> {
    if nu_schedule.is_empty() || nu_schedule.iter().any(|&nu| nu == 0) {
        return Err(ValidateError::Config(
            "scale schedule must be nonempty and positive".into(),
        ));
    }
    let dim = dist.sampler.dim();
    let identity = IntMatrix::identity(dim);
    let mut s_values = Vec::with_capacity(nu_schedule.len());
    let mut slacks = Vec::with_capacity(nu_schedule.len());
    for &nu in nu_schedule {
        // One shared seed across scales: the same samples are quantized at
        // every scale, which makes the monotonicity comparison exact.
        let est = quantized_entropy_estimate(dist.sampler(), &identity, nu, n_samples, seed)?;
        s_values.push(est.value.bits - dim as f64 * (nu as f64).log2());
        slacks.push(3.0 * est.std_error + est.bias_bound + 1e-9);
    }
    let mut worst = f64::INFINITY;
    for i in 0..s_values.len() {
        let upper = dist.floor_entropy_bits + slacks[i] - s_values[i];
        let lower = s_values[i] - (dist.h_bits - slacks[i]);
        worst = worst.min(upper).min(lower);
        if i > 0 && nu_schedule[i] % nu_schedule[i - 1] == 0 {
            worst = worst.min(s_values[i - 1] - s_values[i] + 1e-9);
        }
    }
    let terminal_gap = (s_values[s_values.len() - 1] - dist.h_bits).abs();
    worst = worst.min(0.02 - terminal_gap);
    let notes = format!(
        "{}: S_1 = {:.4}, S_{} = {:.4}, h = {:.4}, H(floor u) = {:.4}, terminal gap {:.4}",
        dist.name,
        s_values[0],
        nu_schedule[nu_schedule.len() - 1],
        s_values[s_values.len() - 1],
        dist.h_bits,
        dist.floor_entropy_bits,
        terminal_gap
    );
    Ok(CheckReport::new("renyi", nu_schedule.len(), worst, seed, notes))
}

// ---------------------------------------------------------------------------
// Quantization-commutation trajectory for right-invertible maps.
// ---------------------------------------------------------------------------

/// Monte-Carlo check that quantization asymptotically commutes with a
/// right-invertible integer map: estimates the trajectory
/// `H(T floor(nu u)) - H(floor(nu T u))` on the schedule, verifies each point
/// against the uniform bound `m log2(l1(T)/m)` (plus Monte-Carlo slack), and
/// requires the terminal discrepancy to be below 0.05 bits.
pub fn check_makkuva_wu(
    dist: &ReferenceContinuous,
    t: &IntMatrix,
    nu_schedule: &[u64],
    n_samples: usize,
    seed: u64,
) -> Result<CheckReport, ValidateError> {
    if nu_schedule.is_empty() || nu_schedule.iter().any(|&nu| nu == 0) {
        return Err(ValidateError::Config(
            "scale schedule must be nonempty and positive".into(),
        ));
    }
    if t.cols() != dist.sampler.dim() {
        return Err(ValidateError::Config(format!(
            "map has {} columns, sampler dimension is {}",
            t.cols(),
            dist.sampler.dim()
        )));
    }
    if right_inverse(t).is_none() {
        return Err(ValidateError::Config(
            "the integer map must be right-invertible".into(),
        ));
    }
    let m = t.rows();
    let rows_i64 = t.to_rows_i64()?;
    let ell1: i64 = rows_i64.iter().flatten().map(|v| v.abs()).sum();
    let uniform_bound = m as f64 * (ell1 as f64 / m as f64).log2();
    let image = LinearImageSampler {
        rows: rows_i64
            .iter()
            .map(|row| row.iter().map(|&v| v as f64).collect())
            .collect(),
        inner: dist.sampler(),
    };
    let identity = IntMatrix::identity(m);
    let mut gaps = Vec::with_capacity(nu_schedule.len());
    let mut worst = f64::INFINITY;
    for &nu in nu_schedule {
        // Same seed on both sides: the estimates are paired on identical
        // samples, so the plug-in biases largely cancel in the difference.
        let quantize_then_map =
            quantized_entropy_estimate(dist.sampler(), t, nu, n_samples, seed)?;
        let map_then_quantize =
            quantized_entropy_estimate(&image, &identity, nu, n_samples, seed)?;
        let gap = quantize_then_map.value.bits - map_then_quantize.value.bits;
        let slack = 3.0 * (quantize_then_map.std_error + map_then_quantize.std_error)
            + quantize_then_map.bias_bound
            + map_then_quantize.bias_bound
            + 1e-9;
        worst = worst.min(uniform_bound + slack - gap.abs());
        gaps.push(gap);
    }
    let terminal = gaps[gaps.len() - 1].abs();
    worst = worst.min(0.05 - terminal);
    let notes = format!(
        "{} through {}x{} map: gap(nu=1) = {:.4}, gap(nu={}) = {:.4}, uniform bound {:.4}",
        dist.name,
        m,
        t.cols(),
        gaps[0],
        nu_schedule[nu_schedule.len() - 1],
        gaps[gaps.len() - 1],
        uniform_bound
    );
    Ok(CheckReport::new(
        "makkuva_wu",
        nu_schedule.len(),
        worst,
        seed,
        notes,
    ))
}

// ---------------------------------------------------------------------------
// Exact entropy-difference bound for integer maps of floored vectors.
// ---------------------------------------------------------------------------

/// `H = log2(N) - (1/N) sum w log2 w` for integer weights summing to `N`,
/// summed in sorted order for reproducibility.
fn entropy_of_weights(weights: &BTreeMap<Vec<i64>, u64>, total: u64) -> f64 {
    let n = total as f64;
    let mut terms: Vec<f64> = weights
        .values()
        .map(|&w| (w as f64) * (w as f64).log2())
        .collect();
    terms.sort_by(|a, b| a.total_cmp(b));
    let s: f64 = terms.iter().sum();
    n.log2() - s / n
}

/// Exact entropies `(H(T floor(v)), H(floor(T v)))` for a finite mixture `v`
/// on the half-integer grid. `doubled_points` holds `2v` so every coordinate
/// is an integer and both floors are exact integer divisions.
fn entropy_difference_pair(
    t: &[Vec<i64>],
    doubled_points: &[Vec<i64>],
    weights: &[u64],
) -> (f64, f64) {
    let total: u64 = weights.iter().sum();
    let apply = |x: &[i64]| -> Vec<i64> {
        t.iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    };
    let mut map_of_floor: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
    let mut floor_of_map: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
    for (g, &w) in doubled_points.iter().zip(weights) {
        let floor_v: Vec<i64> = g.iter().map(|&x| x.div_euclid(2)).collect();
        *map_of_floor.entry(apply(&floor_v)).or_default() += w;
        let tv2 = apply(g);
        let floor_tv: Vec<i64> = tv2.iter().map(|&x| x.div_euclid(2)).collect();
        *floor_of_map.entry(floor_tv).or_default() += w;
    }
    (
        entropy_of_weights(&map_of_floor, total),
        entropy_of_weights(&floor_of_map, total),
    )
}

/// Exact check of the bound `|H(T floor(v)) - H(floor(T v))| <= m log2(l1(T)/m)`
/// over random finite mixtures `v` on the half-integer grid and random
/// full-row-rank integer maps `T` (up to 3x4, entries up to 5 in magnitude),
/// where `l1(T)` sums the magnitudes of all entries. Both entropies are exact
/// finite sums, so any violation beyond float wobble fails the check.
pub fn check_entropy_difference_bound(trials: usize, seed: u64) -> Result<CheckReport, ValidateError> {
    let mut worst = f64::INFINITY;
    let mut violations = 0usize;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(seed, trial as u64));
        let n = rng.gen_range(2..=4usize);
        let m = rng.gen_range(1..=3usize.min(n));
        let t: Vec<Vec<i64>> = loop {
            let cand: Vec<Vec<i64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.gen_range(-5..=5i64)).collect())
                .collect();
            let mat = IntMatrix::from_rows_i64(&cand).expect("consistent shape");
            if mat.rank() == m {
                break cand;
            }
        };
        let support = rng.gen_range(2..=6usize);
        let mut pts: BTreeSet<Vec<i64>> = BTreeSet::new();
        while pts.len() < support {
            pts.insert((0..n).map(|_| rng.gen_range(-16..=16i64)).collect());
        }
        let points: Vec<Vec<i64>> = pts.into_iter().collect();
        let weights: Vec<u64> = (0..support).map(|_| rng.gen_range(1..=8u64)).collect();
        let (left, right) = entropy_difference_pair(&t, &points, &weights);
        let lhs = (left - right).abs();
        let ell1: i64 = t.iter().flatten().map(|v| v.abs()).sum();
        let rhs = m as f64 * (ell1 as f64 / m as f64).log2();
        let margin = rhs - lhs;
        if margin < -1e-9 {
            violations += 1;
        }
        worst = worst.min(margin);
    }
    let notes = format!("{violations} violations in {trials} exact trials");
    let mut report = CheckReport::new("entropy_diff", trials, worst, seed, notes);
    report.pass = violations == 0;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Exact scaling invariance for discrete sources.
// ---------------------------------------------------------------------------

/// Exact check that for an integer-supported `u` and integer `Q`, the
/// quantized entropy is scale-invariant: `H(Q floor(nu u)) = H(Q u)` for
/// every integer `nu` in the schedule (floors are trivial on integer
/// vectors, and scaling is a relabelling). Also records the information
/// dimension trajectory `H(floor(nu u)) / log2(nu) -> 0`.
pub fn check_discrete_lemma(
    pmf: &DiscretePmf,
    q: &IntMatrix,
    nu_values: &[u64],
    seed: u64,
) -> Result<CheckReport, ValidateError> {
    if q.cols() != pmf.dim() {
        return Err(ValidateError::Config(format!(
            "matrix has {} columns, pmf dimension is {}",
            q.cols(),
            pmf.dim()
        )));
    }
    if nu_values.is_empty() || nu_values.iter().any(|&nu| nu == 0) {
        return Err(ValidateError::Config(
            "scale schedule must be nonempty and positive".into(),
        ));
    }
    let q_rows = q.to_rows_i64()?;
    let apply = |u: &[i64], scale: i64| -> Vec<i64> {
        q_rows
            .iter()
            .map(|row| row.iter().zip(u).map(|(a, b)| a * b * scale).sum())
            .collect()
    };
    let base = pushforward_entropy_bits(pmf, |u| apply(u, 1));
    let mut worst = f64::INFINITY;
    for &nu in nu_values {
        let scaled = pushforward_entropy_bits(pmf, |u| apply(u, nu as i64));
        worst = worst.min(EXACT_TOL - (scaled - base).abs());
    }
    // Information dimension of a discrete source is zero: the quantized
    // entropy stays constant, so H / log2(nu) decays along the schedule.
    let h_u = pmf.entropy().bits;
    let nu_max = *nu_values.iter().max().unwrap();
    let final_ratio = if nu_max > 1 {
        h_u / (nu_max as f64).log2()
    } else {
        h_u
    };
    let notes = format!(
        "H(Qu) = {:.6} bits over {} scales; H(u)/log2({nu_max}) = {:.4}",
        base,
        nu_values.len(),
        final_ratio
    );
    Ok(CheckReport::new(
        "discrete",
        nu_values.len(),
        worst,
        seed,
        notes,
    ))
}

// ---------------------------------------------------------------------------
// Lattice point-counting certificates.
// ---------------------------------------------------------------------------

/// All integer points of the box `|x_i| <= half[i]`, in odometer order.
fn box_points(half: &[i64]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut x: Vec<i64> = half.iter().map(|&a| -a).collect();
    'odometer: loop {
        out.push(x.clone());
        for j in 0..half.len() {
            if x[j] < half[j] {
                x[j] += 1;
                continue 'odometer;
            }
            x[j] = -half[j];
        }
        break;
    }
    out
}

/// Number of points of the full-rank lattice generated by the columns of `g`
/// inside the box `|x_i| <= half[i]`: scans the integer points of the box and
/// tests membership with the adjugate (`x` is a lattice point iff
/// `adj(g) x = 0 mod det(g)`).
fn lattice_points_in_box(g: &[Vec<i64>], half: &[i64]) -> u64 {
    let n = g.len();
    let det = det_i128(
        &g.iter()
            .map(|row| row.iter().map(|&v| v as i128).collect())
            .collect::<Vec<_>>(),
    );
    assert!(det != 0, "lattice basis must be full rank");
    let adj = adjugate_i64(g);
    let mut count = 0u64;
    for x in box_points(half) {
        let member = (0..n).all(|r| {
            let s: i128 = (0..n).map(|c| adj[r][c] as i128 * x[c] as i128).sum();
            s.rem_euclid(det) == 0
        });
        if member {
            count += 1;
        }
    }
    count
}

/// Exact Gram-Schmidt bounds on the number of points of the column lattice
/// of an integer matrix inside a shifted closed sup-norm ball of radius
/// `rho`, resolved by comparing squares in rational arithmetic.
///
/// Returns the ceiling product `prod ceil(x_l)` with `x_l = 2 sqrt(K) rho /
/// ||g_l||_2`, the boundary-robust product `prod (floor(x_l) + 1)`, and
/// whether any `x_l` was an exact integer. The two products coincide except
/// in that degenerate case, where a closed box aligned with the lattice can
/// hold `x_l + 1` points per slice and only the robust form is a bound.
fn gram_schmidt_count_bound(f_rows: &[Vec<i64>], rho: &BigRational) -> (BigInt, BigInt, bool) {
    let kdim = f_rows.len();
    let l = f_rows[0].len();
    let col = |j: usize| -> Vec<BigRational> {
        (0..kdim)
            .map(|i| BigRational::from_integer(BigInt::from(f_rows[i][j])))
            .collect()
    };
    let dot = |a: &[BigRational], b: &[BigRational]| -> BigRational {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    };
    let mut basis: Vec<Vec<BigRational>> = Vec::new();
    let mut norms_sq: Vec<BigRational> = Vec::new();
    for j in 0..l {
        let c = col(j);
        let mut g = c.clone();
        for (b, q) in basis.iter().zip(&norms_sq) {
            let coeff = dot(&c, b) / q;
            for (gi, bi) in g.iter_mut().zip(b) {
                *gi -= &coeff * bi;
            }
        }
        let q = dot(&g, &g);
        assert!(q > BigRational::zero(), "columns must be independent");
        norms_sq.push(q);
        basis.push(g);
    }
    let four_k_rho_sq =
        BigRational::from_integer(BigInt::from(4 * kdim as i64)) * rho * rho;
    let mut ceil_product = BigInt::one();
    let mut robust_product = BigInt::one();
    let mut degenerate = false;
    for q in &norms_sq {
        let x_sq = &four_k_rho_sq / q;
        // Smallest integer c with c^2 >= x^2, seeded from a float estimate
        // and then corrected with exact comparisons; this is ceil(x).
        let approx = x_sq.to_f64().unwrap_or(0.0).max(0.0).sqrt().floor() as i64;
        let mut c = BigInt::from(approx.max(0));
        while BigRational::from_integer(&c * &c) < x_sq {
            c += BigInt::one();
        }
        while c > BigInt::zero() {
            let down = &c - BigInt::one();
            if BigRational::from_integer(&down * &down) >= x_sq {
                c = down;
            } else {
                break;
            }
        }
        let exact_integer = BigRational::from_integer(&c * &c) == x_sq;
        degenerate |= exact_integer;
        robust_product *= if exact_integer { &c + BigInt::one() } else { c.clone() };
        ceil_product *= c;
    }
    (ceil_product, robust_product, degenerate)
}

/// Exhaustive count of points of the column lattice of `f_rows` inside the
/// shifted box `|x_i - shift_i| <= rho`, by scanning the integer points of
/// the box and solving for exact integer preimages.
fn shifted_box_lattice_count(
    f_rows: &[Vec<i64>],
    shift: &[BigRational],
    rho: &BigRational,
) -> Result<u64, ValidateError> {
    let kdim = f_rows.len();
    let l = f_rows[0].len();
    let to_rat = |v: i64| BigRational::from_integer(BigInt::from(v));
    // Rational pseudo-inverse (F^T F)^{-1} F^T, computed once.
    let mut gram = vec![vec![BigRational::zero(); l]; l];
    for a in 0..l {
        for b in 0..l {
            gram[a][b] = (0..kdim)
                .map(|i| to_rat(f_rows[i][a]) * to_rat(f_rows[i][b]))
                .sum();
        }
    }
    let gram_inv = rational_inverse(&gram)
        .ok_or_else(|| ValidateError::Config("lattice columns must be independent".into()))?;
    let pinv: Vec<Vec<BigRational>> = (0..l)
        .map(|a| {
            (0..kdim)
                .map(|i| {
                    (0..l)
                        .map(|b| &gram_inv[a][b] * to_rat(f_rows[i][b]))
                        .sum()
                })
                .collect()
        })
        .collect();
    let lo: Vec<i64> = shift
        .iter()
        .map(|s| (s - rho).ceil().to_integer().to_i64().unwrap())
        .collect();
    let hi: Vec<i64> = shift
        .iter()
        .map(|s| (s + rho).floor().to_integer().to_i64().unwrap())
        .collect();
    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
        return Ok(0);
    }
    let mut count = 0u64;
    let mut y = lo.clone();
    'odometer: loop {
        let zr: Vec<BigRational> = (0..l)
            .map(|a| (0..kdim).map(|i| &pinv[a][i] * to_rat(y[i])).sum())
            .collect();
        if zr.iter().all(|z| z.is_integer()) {
            let z: Vec<i64> = zr.iter().map(|z| z.to_integer().to_i64().unwrap()).collect();
            let hit = (0..kdim).all(|i| {
                let s: i64 = (0..l).map(|a| f_rows[i][a] * z[a]).sum();
                s == y[i]
            });
            if hit {
                count += 1;
            }
        }
        for j in 0..kdim {
            if y[j] < hi[j] {
                y[j] += 1;
                continue 'odometer;
            }
            y[j] = lo[j];
        }
        break;
    }
    Ok(count)
}

fn lcm_i64(a: i64, b: i64) -> i64 {
    num_integer::lcm(a, b)
}

/// Randomized exact certificates for three classical lattice point-counting
/// bounds, on random integer lattices of dimension up to 3:
///
/// * the convex-body census bound
///   `vol(K) < (|lattice points in K| + 1) 2^(n-1) det`, with the census done
///   by exhaustive scan of a random box `K`;
/// * the two-sided successive-minima product bound
///   `2^n det / n! <= vol(K) prod lambda_i <= 2^n det`, with brute-force
///   certified minima and all comparisons in exact rational arithmetic;
/// * the Gram-Schmidt ceiling-product bound on the number of lattice points
///   in a randomly shifted box, against an exhaustive count.
pub fn check_lattice_counting(trials: usize, seed: u64) -> Result<CheckReport, ValidateError> {
    let mut worst = f64::INFINITY;
    let mut violations = 0usize;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(seed, trial as u64));

        // Census bound on a random full-rank lattice and a random box.
        let n = rng.gen_range(1..=3usize);
        let (g, det_abs) = loop {
            let cand: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-3..=3i64)).collect())
                .collect();
            let det = det_i128(
                &cand
                    .iter()
                    .map(|row| row.iter().map(|&v| v as i128).collect())
                    .collect::<Vec<_>>(),
            );
            if det != 0 {
                break (cand, det.unsigned_abs() as i64);
            }
        };
        let half: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=4i64)).collect();
        let count = lattice_points_in_box(&g, &half);
        let vol: i64 = half.iter().map(|&a| 2 * a).product();
        let census_rhs = (count as i64 + 1) * (1i64 << (n - 1)) * det_abs;
        let census_margin = (census_rhs - vol) as f64;
        if census_margin <= 0.0 {
            violations += 1;
        }
        worst = worst.min(census_margin);

        // Successive-minima product bound w.r.t. the same box, exactly in
        // rationals. Scaling row i by lcm/half_i turns the box norm into the
        // plain sup norm on an integer lattice.
        let a_lcm = half.iter().fold(1i64, |acc, &a| lcm_i64(acc, a));
        let scaled: Vec<Vec<i64>> = g
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().map(|&v| v * (a_lcm / half[i])).collect())
            .collect();
        let mat = IntMatrix::from_rows_i64(&scaled).expect("consistent shape");
        let mut minima = None;
        for radius in [4i64, 8, 16, 32, 64, 128] {
            match successive_minima(&mat, Norm::Infinity, radius) {
                Ok(v) => {
                    minima = Some(v);
                    break;
                }
                Err(LinAlgError::RadiusTooSmall { .. })
                | Err(LinAlgError::InconclusiveEnumeration { .. }) => continue,
                Err(e) => return Err(e.into()),
            }
        }
        let minima = minima.ok_or_else(|| {
            ValidateError::Config("successive minima enumeration did not certify".into())
        })?;
        let a_rat = BigRational::from_integer(BigInt::from(a_lcm));
        let prod_lambda = minima
            .iter()
            .fold(BigRational::one(), |acc, m| acc * (m / &a_rat));
        let vol_rat = BigRational::from_integer(BigInt::from(vol));
        let det_rat = BigRational::from_integer(BigInt::from(det_abs));
        let two_n = BigInt::from(1i64 << n);
        let factorial = BigInt::from((1..=n as i64).product::<i64>());
        let upper = BigRational::from_integer(two_n.clone()) * &det_rat;
        let lower = BigRational::new(two_n * det_rat.to_integer(), factorial);
        let vp = vol_rat * prod_lambda;
        if vp < lower || vp > upper {
            violations += 1;
        }
        let low_margin = (&vp - &lower).to_f64().unwrap_or(f64::NEG_INFINITY);
        let up_margin = (&upper - &vp).to_f64().unwrap_or(f64::NEG_INFINITY);
        worst = worst.min(low_margin).min(up_margin);

        // Gram-Schmidt ceiling bound against an exhaustive shifted-box count.
        let kdim = rng.gen_range(1..=3usize);
        let l = rng.gen_range(1..=kdim);
        let f_rows: Vec<Vec<i64>> = loop {
            let cand: Vec<Vec<i64>> = (0..kdim)
                .map(|_| (0..l).map(|_| rng.gen_range(-3..=3i64)).collect())
                .collect();
            let mat = IntMatrix::from_rows_i64(&cand).expect("consistent shape");
            if mat.rank() == l {
                break cand;
            }
        };
        let shift: Vec<BigRational> = (0..kdim)
            .map(|_| BigRational::new(BigInt::from(rng.gen_range(-6..=6i64)), BigInt::from(2)))
            .collect();
        let rho = BigRational::new(BigInt::from(rng.gen_range(2..=6i64)), BigInt::from(2));
        let exhaustive = shifted_box_lattice_count(&f_rows, &shift, &rho)?;
        let (ceil_bound, robust_bound, degenerate) = gram_schmidt_count_bound(&f_rows, &rho);
        // The ceiling product bounds generic instances; when a ceiling
        // argument is an exact integer the closed box can align with the
        // lattice and only the floor-plus-one form is a bound.
        let effective = if degenerate { robust_bound } else { ceil_bound };
        let gs_margin = (effective - BigInt::from(exhaustive))
            .to_f64()
            .unwrap_or(f64::NEG_INFINITY);
        if gs_margin < 0.0 {
            violations += 1;
        }
        worst = worst.min(gs_margin);
    }
    let notes = format!(
        "{violations} violations in {trials} trials (census, minima product, ceiling product)"
    );
    let mut report = CheckReport::new("lattice", trials, worst, seed, notes);
    report.pass = violations == 0;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Chain rule and mutual information identities on channel specifications.
// ---------------------------------------------------------------------------

/// Re-indexes the channel output so that the conditioning also carries the
/// first `prefix` user symbols: the new output enumerates observed pairs
/// `(y, u_1..u_prefix)`.
fn condition_on_prefix(
    joint: &JointDiscreteSource,
    prefix: usize,
) -> Result<JointDiscreteSource, EntropyError> {
    let mut labels: BTreeMap<(usize, Vec<i64>), usize> = BTreeMap::new();
    let mut raw: Vec<(Vec<i64>, (usize, Vec<i64>), f64)> = Vec::new();
    for (u, y, p) in joint.entries() {
        let key = (y, u[..prefix].to_vec());
        labels.entry(key.clone()).or_insert(0);
        raw.push((u.to_vec(), key, p));
    }
    for (i, v) in labels.values_mut().enumerate() {
        *v = i;
    }
    let entries = raw
        .into_iter()
        .map(|(u, key, p)| (u, labels[&key], p))
        .collect();
    JointDiscreteSource::new(joint.dim(), labels.len(), entries)
}

fn stable_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| a.total_cmp(b));
    terms.iter().sum()
}

/// Mutual information between the user vector and the channel output, from
/// the defining sum over the joint pmf.
fn mutual_information_direct_bits(joint: &JointDiscreteSource) -> f64 {
    let mut pu: BTreeMap<Vec<i64>, Vec<f64>> = BTreeMap::new();
    for (u, _, p) in joint.entries() {
        pu.entry(u.to_vec()).or_default().push(p);
    }
    let pu: BTreeMap<Vec<i64>, f64> = pu.into_iter().map(|(u, v)| (u, stable_sum(v))).collect();
    let py = joint.y_probs();
    let mut terms = Vec::new();
    for (u, y, p) in joint.entries() {
        if p > 0.0 {
            terms.push(p * (p / (pu[u] * py[y])).log2());
        }
    }
    stable_sum(terms)
}

/// Pivots of the symmetric elimination of a positive-definite matrix. Pivot
/// `j` is the conditional variance of coordinate `j` given coordinates
/// `0..j`, so the pivots tie the joint log-determinant to a chain of scalar
/// conditional entropies.
fn ldl_pivots(a: &[Vec<f64>]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut pivots = Vec::with_capacity(n);
    for j in 0..n {
        let d = m[j][j];
        if d <= 0.0 {
            return None;
        }
        pivots.push(d);
        for r in j + 1..n {
            let f = m[r][j] / d;
            for c in j..n {
                m[r][c] -= f * m[j][c];
            }
        }
    }
    Some(pivots)
}

/// Checks the conditional chain rule and the mutual-information identity on a
/// channel specification.
///
/// Discrete specifications are checked exactly:
/// `H(u|Y) = sum_j H(u_j | Y, u_1..u_{j-1})` with the conditionals computed
/// through independently re-indexed joints, and `H(u) - H(u|Y)` against the
/// defining mutual-information sum. Gaussian specifications compare the
/// posterior log-determinant against the chain of elimination pivots, and the
/// prior/posterior determinant ratio against the channel-side determinant
/// `det(I + H diag(P) H^T)`, within 1e-9 bits.
pub fn check_chain_and_mi(spec: &ChannelSpec, seed: u64) -> Result<CheckReport, ValidateError> {
    let ctx = SpecContext::new(spec)?;
    let (chain_diff, mi_diff, tol, detail) = if let Some(joint) = &ctx.joint {
        let full = conditional_pushforward_entropy_bits(joint, |u| u.to_vec());
        let mut chain_sum = 0.0;
        for j in 0..ctx.k {
            let cond = condition_on_prefix(joint, j)?;
            chain_sum += conditional_pushforward_entropy_bits(&cond, |u| vec![u[j]]);
        }
        let h_u = joint.marginal_u().entropy().bits;
        let mi_identity = h_u - full;
        let mi_direct = mutual_information_direct_bits(joint);
        (
            (full - chain_sum).abs(),
            (mi_identity - mi_direct).abs(),
            EXACT_TOL,
            format!("discrete: H(u|Y) = {full:.6}, I(u;Y) = {mi_direct:.6}"),
        )
    } else {
        let ChannelSpec::Gaussian { h, p, beta } = spec else {
            unreachable!("non-discrete specifications are Gaussian");
        };
        let kc = ctx.kc.as_ref().expect("gaussian context has a posterior");
        let pivots = ldl_pivots(kc).ok_or_else(|| {
            ValidateError::Config("posterior covariance must be positive definite".into())
        })?;
        let full = 0.5 * ctx.k as f64 * LOG2_2PIE + 0.5 * det_f64(kc).log2();
        let chain_sum: f64 = pivots
            .iter()
            .map(|d| 0.5 * (LOG2_2PIE + d.log2()))
            .sum();
        let prior_log_det: f64 = p
            .iter()
            .zip(beta)
            .map(|(&pk, &bk)| (bk * bk * pk).log2())
            .sum();
        let mi_identity = 0.5 * (prior_log_det - det_f64(kc).log2());
        let m = h.len();
        let mut gram = vec![vec![0.0f64; m]; m];
        for i in 0..m {
            for j in 0..m {
                let s: f64 = (0..ctx.k).map(|k| h[i][k] * p[k] * h[j][k]).sum();
                gram[i][j] = s + if i == j { 1.0 } else { 0.0 };
            }
        }
        let mi_direct = 0.5 * det_f64(&gram).log2();
        (
            (full - chain_sum).abs(),
            (mi_identity - mi_direct).abs(),
            GAUSSIAN_TOL,
            format!("gaussian: h(u|Y) = {full:.6}, I(u;Y) = {mi_direct:.6}"),
        )
    };
    let worst = (tol - chain_diff).min(tol - mi_diff);
    let notes = format!("{detail}; chain gap {chain_diff:.3e}, MI gap {mi_diff:.3e}");
    Ok(CheckReport::new("chain_mi", 2, worst, seed, notes))
}

// ---------------------------------------------------------------------------
// Aggregate suite.
// ---------------------------------------------------------------------------

fn merge_reports(name: &str, seed: u64, parts: Vec<CheckReport>) -> CheckReport {
    let trials = parts.iter().map(|r| r.trials).sum();
    let worst = parts
        .iter()
        .map(|r| r.worst_margin)
        .fold(f64::INFINITY, f64::min);
    let pass = parts.iter().all(|r| r.pass);
    let notes = parts
        .iter()
        .map(|r| r.notes.as_str())
        .collect::<Vec<_>>()
        .join(" | ");
    CheckReport {
        name: name.to_string(),
        trials,
        worst_margin: worst,
        pass,
        seed,
        notes,
    }
}

/// Number of Monte-Carlo samples the aggregate suite draws per estimate.
pub const SUITE_SAMPLES: usize = 1_000_000;

/// Runs all six validation checks with canonical instances and returns one
/// report per check, in a fixed order. `trials` drives the two trial-based
/// checks; the Monte-Carlo checks run a dyadic scale schedule up to 1024 at
/// [`SUITE_SAMPLES`] samples per estimate.
pub fn validation_suite(seed: u64, trials: usize) -> Result<Vec<CheckReport>, ValidateError> {
    SUITE_NAMES
        .iter()
        .map(|name| suite_check(name, seed, trials))
        .collect()
}

/// Names of the standard checks, in canonical suite order.
pub const SUITE_NAMES: [&str; 6] = [
    "renyi",
    "entropy_diff",
    "makkuva_wu",
    "discrete",
    "lattice",
    "chain_mi",
];

/// Runs one named standard check at its canonical configuration. Sampled
/// checks draw [`SUITE_SAMPLES`] points per scale; the randomized counting
/// checks run `trials` instances each. Unknown names are a configuration
/// error.
pub fn suite_check(name: &str, seed: u64, trials: usize) -> Result<CheckReport, ValidateError> {
    match name {
        "renyi" => check_renyi(
            &ReferenceContinuous::standard_gaussian(1),
            &dyadic_schedule(1024),
            SUITE_SAMPLES,
            seed,
        ),
        "entropy_diff" => check_entropy_difference_bound(trials, seed),
        "makkuva_wu" => {
            let sum_map = IntMatrix::from_rows_i64(&[vec![1, 1]]).expect("static shape");
            check_makkuva_wu(
                &ReferenceContinuous::standard_gaussian(2),
                &sum_map,
                &dyadic_schedule(1024),
                SUITE_SAMPLES,
                seed,
            )
        }
        "discrete" => {
            let sum_map = IntMatrix::from_rows_i64(&[vec![1, 1]]).expect("static shape");
            let bit_pair = DiscretePmf::from_independent(&[
                vec![(0, 0.5), (1, 0.5)],
                vec![(0, 0.5), (1, 0.5)],
            ])?;
            check_discrete_lemma(&bit_pair, &sum_map, &dyadic_schedule(64), seed)
        }
        "lattice" => check_lattice_counting(trials, seed),
        "chain_mi" => {
            let discrete_part = check_chain_and_mi(&crate::cf::noiseless_adder_spec(), seed)?;
            let gaussian_part = check_chain_and_mi(
                &ChannelSpec::gaussian(vec![vec![1.0, 0.5], vec![0.25, 1.0]], vec![4.0, 9.0], None)?,
                seed,
            )?;
            Ok(merge_reports(
                "chain_mi",
                seed,
                vec![discrete_part, gaussian_part],
            ))
        }
        other => Err(ValidateError::Config(format!("unknown check name: {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::{example_gmac3_spec, noiseless_adder_spec};
    use crate::entropy::algebraic_entropy_discrete;

    #[test]
    fn renyi_chain_for_uniform_sources() {
        // Uniform [0,1): every S_nu is zero in distribution, so the sandwich
        // endpoints coincide and the terminal gap is pure estimator noise.
        let unit = ReferenceContinuous::uniform(1, 1);
        let report = check_renyi(&unit, &dyadic_schedule(16), 30_000, 5).unwrap();
        assert!(report.pass, "{report:?}");

        // Uniform [0,2): S decreases from H(floor u) = 1 toward h = 1.
        let wide = ReferenceContinuous::uniform(2, 1);
        assert!((wide.differential_entropy_bits() - 1.0).abs() < 1e-12);
        assert!((wide.floor_entropy_bits() - 1.0).abs() < 1e-12);
        let report = check_renyi(&wide, &dyadic_schedule(16), 30_000, 5).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn renyi_standard_gaussian_sandwich() {
        let dist = ReferenceContinuous::standard_gaussian(1);
        // The scalar floor entropy is strictly above the differential
        // entropy (2.0471 bits) and below it plus one bit.
        assert!(dist.floor_entropy_bits() > dist.differential_entropy_bits());
        assert!(dist.floor_entropy_bits() < dist.differential_entropy_bits() + 1.0);
        let report = check_renyi(&dist, &dyadic_schedule(64), 120_000, 7).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.trials, 7);
    }

    #[test]
    fn makkuva_wu_identity_map_has_zero_gap() {
        let dist = ReferenceContinuous::standard_gaussian(2);
        let t = IntMatrix::identity(2);
        let report = check_makkuva_wu(&dist, &t, &[1, 4, 16], 20_000, 3).unwrap();
        // Both estimators see the same samples through the same map, so the
        // trajectory is identically zero and only the 0.05 terminal margin
        // and the Monte-Carlo slacks remain.
        assert!(report.pass, "{report:?}");
        assert!(report.worst_margin <= 0.05 + 1e-12);
    }

    #[test]
    fn makkuva_wu_sum_map_converges() {
        let dist = ReferenceContinuous::standard_gaussian(2);
        let t = IntMatrix::from_rows_i64(&[vec![1, 1]]).unwrap();
        let report = check_makkuva_wu(&dist, &t, &dyadic_schedule(256), 200_000, 7).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn makkuva_wu_rejects_maps_without_right_inverse() {
        let dist = ReferenceContinuous::standard_gaussian(2);
        let t = IntMatrix::from_rows_i64(&[vec![2, 0], vec![0, 1]]).unwrap();
        assert!(matches!(
            check_makkuva_wu(&dist, &t, &[1, 2], 20_000, 1),
            Err(ValidateError::Config(_))
        ));
    }

    #[test]
    fn entropy_difference_fixed_examples() {
        // Identity map: both sides coincide, and the bound is exactly zero.
        let points = vec![vec![1, 0], vec![0, 1], vec![3, -2]];
        let weights = vec![1, 2, 1];
        let eye = vec![vec![1, 0], vec![0, 1]];
        let (a, b) = entropy_difference_pair(&eye, &points, &weights);
        assert!((a - b).abs() < 1e-15);

        // Sum map on uniform {0, 1/2}^2: T floor(v) = 0 while floor(v1+v2)
        // splits 3:1, so the gap is H(1/4) = 0.8113 <= log2(2) = 1.
        let half_grid = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let uniform = vec![1, 1, 1, 1];
        let sum_map = vec![vec![1, 1]];
        let (a, b) = entropy_difference_pair(&sum_map, &half_grid, &uniform);
        assert!(a.abs() < 1e-15);
        let expected = 2.0 - 0.75 * 3f64.log2();
        assert!((b - expected).abs() < 1e-12);
        assert!((a - b).abs() <= 1.0);

        let report = check_entropy_difference_bound(200, 11).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.worst_margin >= 0.0);
    }

    #[test]
    fn discrete_lemma_examples() {
        let bit_pair = DiscretePmf::from_independent(&[
            vec![(0, 0.5), (1, 0.5)],
            vec![(0, 0.5), (1, 0.5)],
        ])
        .unwrap();
        let sum_map = IntMatrix::from_rows_i64(&[vec![1, 1]]).unwrap();
        assert!(
            (algebraic_entropy_discrete(&sum_map, &bit_pair).unwrap().bits - 1.5).abs() < 1e-12
        );
        let report = check_discrete_lemma(&bit_pair, &sum_map, &dyadic_schedule(64), 1).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.notes.contains("1.5"));

        // A point mass has zero entropy at every scale.
        let point = DiscretePmf::new(vec![(vec![3, -2], 1.0)]).unwrap();
        let report =
            check_discrete_lemma(&point, &IntMatrix::identity(2), &dyadic_schedule(64), 1)
                .unwrap();
        assert!(report.pass, "{report:?}");

        // The identity map reproduces H(u) itself.
        let report =
            check_discrete_lemma(&bit_pair, &IntMatrix::identity(2), &dyadic_schedule(16), 1)
                .unwrap();
        assert!(report.pass);
    }

    #[test]
    fn lattice_counting_unit_cases() {
        // Z^2 meets [-1,1]^2 in 9 points; the census bound gives 4 < 20.
        let eye = vec![vec![1, 0], vec![0, 1]];
        assert_eq!(lattice_points_in_box(&eye, &[1, 1]), 9);
        // 2Z^2 meets [-1,1]^2 only at the origin; the bound gives 4 < 16.
        let doubled = vec![vec![2, 0], vec![0, 2]];
        assert_eq!(lattice_points_in_box(&doubled, &[1, 1]), 1);

        // Gram-Schmidt ceiling bound dominates an exhaustive shifted count.
        let f_rows = vec![vec![1, 0], vec![0, 1]];
        let rho = BigRational::new(BigInt::from(3), BigInt::from(2));
        let shift = vec![
            BigRational::new(BigInt::from(1), BigInt::from(2)),
            BigRational::new(BigInt::from(1), BigInt::from(2)),
        ];
        let count = shifted_box_lattice_count(&f_rows, &shift, &rho).unwrap();
        assert_eq!(count, 16); // the 4x4 block {-1,...,2}^2
        let (ceil_bound, robust_bound, degenerate) = gram_schmidt_count_bound(&f_rows, &rho);
        assert!(!degenerate); // 2 sqrt(2) * 3/2 is irrational
        assert_eq!(ceil_bound, BigInt::from(25));
        assert_eq!(robust_bound, BigInt::from(25));
        assert!(ceil_bound >= BigInt::from(count));

        // Boundary-degenerate case: on the integer line with radius 3/2 the
        // closed interval [-1, 2] holds four lattice points while the
        // ceiling term is exactly 3; the robust form covers it.
        let line = vec![vec![1]];
        let half_shift = vec![BigRational::new(BigInt::from(1), BigInt::from(2))];
        let count = shifted_box_lattice_count(&line, &half_shift, &rho).unwrap();
        assert_eq!(count, 4);
        let (ceil_bound, robust_bound, degenerate) = gram_schmidt_count_bound(&line, &rho);
        assert!(degenerate);
        assert_eq!(ceil_bound, BigInt::from(3));
        assert_eq!(robust_bound, BigInt::from(4));

        let report = check_lattice_counting(60, 5).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn chain_and_mi_identities_hold() {
        // Adder: H(u) = 2, H(u|Y) = 0.5, so I(u;Y) = 1.5 bits exactly.
        let adder = noiseless_adder_spec();
        let report = check_chain_and_mi(&adder, 1).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.notes.contains("1.5"));

        let gaussian = example_gmac3_spec();
        let report = check_chain_and_mi(&gaussian, 1).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn reports_are_deterministic() {
        let a = check_entropy_difference_bound(50, 9).unwrap();
        let b = check_entropy_difference_bound(50, 9).unwrap();
        assert_eq!(a.worst_margin, b.worst_margin);
        assert_eq!(a.notes, b.notes);
        let a = check_lattice_counting(20, 3).unwrap();
        let b = check_lattice_counting(20, 3).unwrap();
        assert_eq!(a.worst_margin, b.worst_margin);
        assert_eq!(a.notes, b.notes);
    }
}
