//! Compute–forward achievable-rate-region assembly.
//!
//! Builds rate regions for finite-field, finitely supported integer, and
//! Gaussian multiple-access channels from three ingredients: conditional
//! algebraic entropies `H_Q(u|Y)`, minimum-entropy terms `J(B, M)` over
//! integer recombination matrices representing a matroid, and the polyhedral
//! algebra of [`crate::region`]. Both simultaneous decoding (matroid-indexed
//! intersections/unions of halfspaces) and sequential decoding (per-row
//! entropy differences) are supported, together with the two-user special
//! cases (MAC/LMAC regions, the single-equation dichotomy, and the classical
//! compute–forward closed form).

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use itertools::Itertools;
use serde::Serialize;

use crate::entropy::{
    conditional_pushforward_entropy_bits, gaussian_algebraic_entropy,
    gaussian_conditional_covariance, shannon_entropy_of_probs, EntropyError, EntropyKind,
    EntropyValue, GaussianSource, JointDiscreteSource, LOG2_2PIE,
};
use crate::linalg::{
    hermite_normal_form, is_small_prime, orthogonal_lattice_basis, rank_mod_q_i64,
    row_lattice_contains, smith_decompose, IntMatrix, LinAlgError, Ring,
};
use crate::matroid::{
    column_matroid_masks_i64, enumerate_matroids, rank_i128, Matroid, MatroidError,
};
use crate::region::{intersect, union, Polyhedron, RateBound, RateRegion, RegionError};
use crate::worker_count;
use num_traits::ToPrimitive;

/// Joint-state cap for exact discrete marginalization.
pub const STATE_CAP: u128 = 10_000_000;

#[derive(Debug, thiserror::Error)]
pub enum CfError {
    #[error("invalid channel specification: {0}")]
    Spec(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("joint state space has {states} states, exceeding the cap of {cap}")]
    StateBudget { states: u128, cap: u128 },
    #[error("modulus {q} is not an odd prime")]
    BadModulus { q: i64 },
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Linalg(#[from] LinAlgError),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error(transparent)]
    Region(#[from] RegionError),
}

/// Centered modulo-q representative of `x` in `[-(q-1)/2, (q-1)/2]`.
pub fn mod_q_centered(x: i64, q: i64) -> i64 {
    let r = ((x % q) + q) % q;
    if r > (q - 1) / 2 {
        r - q
    } else {
        r
    }
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime_above(n: i64) -> i64 {
    let mut c = n.max(1) + 1;
    while !is_small_prime(c) {
        c += 1;
    }
    c
}

// ---------------------------------------------------------------------------
// Channel specifications
// ---------------------------------------------------------------------------

/// One user's finitely supported input distribution over integer symbols.
#[derive(Clone, Debug)]
pub struct UserPmf {
    pub support: Vec<i64>,
    pub probs: Vec<f64>,
}

impl UserPmf {
    pub fn uniform(support: &[i64]) -> Self {
        let n = support.len();
        UserPmf {
            support: support.to_vec(),
            probs: vec![1.0 / n as f64; n],
        }
    }

    fn validate(&self) -> Result<(), CfError> {
        if self.support.is_empty() || self.support.len() != self.probs.len() {
            return Err(CfError::Spec("pmf support/probability mismatch".into()));
        }
        let mut sorted = self.support.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.support.len() {
            return Err(CfError::Spec("pmf support has repeated symbols".into()));
        }
        if self.probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(CfError::Spec("pmf has a negative probability".into()));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CfError::Spec(format!("pmf sums to {sum}, not 1")));
        }
        Ok(())
    }

    fn entropy_bits(&self) -> f64 {
        shannon_entropy_of_probs(&self.probs)
            .map(|e| e.bits)
            .unwrap_or(0.0)
    }
}

/// A finite memoryless channel: for every combination of per-user input
/// symbols (row-major over `input_sizes`), a pmf over the output alphabet.
#[derive(Clone, Debug)]
pub struct FiniteChannel {
    pub input_sizes: Vec<usize>,
    pub y_size: usize,
    pub rows: Vec<Vec<f64>>,
}

impl FiniteChannel {
    /// Deterministic channel `y = f(x_1, .., x_K)` given by an output index
    /// per input combination.
    pub fn deterministic(input_sizes: Vec<usize>, y_size: usize, f: impl Fn(&[usize]) -> usize) -> Self {
        let combos: usize = input_sizes.iter().product();
        let mut rows = Vec::with_capacity(combos);
        let mut idx = vec![0usize; input_sizes.len()];
        for _ in 0..combos {
            let y = f(&idx);
            let mut row = vec![0.0; y_size];
            row[y] = 1.0;
            rows.push(row);
            for j in (0..idx.len()).rev() {
                idx[j] += 1;
                if idx[j] < input_sizes[j] {
                    break;
                }
                idx[j] = 0;
            }
        }
        FiniteChannel {
            input_sizes,
            y_size,
            rows,
        }
    }

    fn validate(&self) -> Result<(), CfError> {
        let combos: usize = self.input_sizes.iter().product();
        if self.rows.len() != combos {
            return Err(CfError::Spec(format!(
                "channel table has {} rows, expected {combos}",
                self.rows.len()
            )));
        }
        for row in &self.rows {
            if row.len() != self.y_size {
                return Err(CfError::Spec("channel row of wrong output size".into()));
            }
            if row.iter().any(|&p| !(p >= 0.0)) {
                return Err(CfError::Spec("channel has a negative probability".into()));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(CfError::Spec(format!("channel row sums to {sum}, not 1")));
            }
        }
        Ok(())
    }
}

/// A multiple-access channel specification.
///
/// Discrete variants carry per-user pmfs over integer symbols, per-user
/// modulation tables mapping each support symbol to a channel-input index,
/// and a finite channel table. The finite-field variant additionally fixes an
/// odd prime `q`; its symbols are centered modulo-q representatives and all
/// matrix action on `u` is taken modulo `q`.
#[derive(Clone, Debug)]
pub enum ChannelSpec {
    FiniteField {
        q: i64,
        sources: Vec<UserPmf>,
        modulation: Vec<Vec<usize>>,
        channel: FiniteChannel,
    },
    IntegerLattice {
        sources: Vec<UserPmf>,
        modulation: Vec<Vec<usize>>,
        channel: FiniteChannel,
    },
    Gaussian {
        h: Vec<Vec<f64>>,
        p: Vec<f64>,
        beta: Vec<f64>,
    },
}

impl ChannelSpec {
    pub fn gaussian(h: Vec<Vec<f64>>, p: Vec<f64>, beta: Option<Vec<f64>>) -> Result<Self, CfError> {
        let k = p.len();
        let beta = beta.unwrap_or_else(|| vec![1.0; k]);
        let spec = ChannelSpec::Gaussian { h, p, beta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn integer_lattice(
        sources: Vec<UserPmf>,
        modulation: Vec<Vec<usize>>,
        channel: FiniteChannel,
    ) -> Result<Self, CfError> {
        let spec = ChannelSpec::IntegerLattice {
            sources,
            modulation,
            channel,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn finite_field(
        q: i64,
        sources: Vec<UserPmf>,
        modulation: Vec<Vec<usize>>,
        channel: FiniteChannel,
    ) -> Result<Self, CfError> {
        let spec = ChannelSpec::FiniteField {
            q,
            sources,
            modulation,
            channel,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn users(&self) -> usize {
        match self {
            ChannelSpec::FiniteField { sources, .. } => sources.len(),
            ChannelSpec::IntegerLattice { sources, .. } => sources.len(),
            ChannelSpec::Gaussian { p, .. } => p.len(),
        }
    }

    pub fn modulus(&self) -> Option<i64> {
        match self {
            ChannelSpec::FiniteField { q, .. } => Some(*q),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), CfError> {
        match self {
            ChannelSpec::Gaussian { h, p, beta } => {
                let k = p.len();
                if k == 0 {
                    return Err(CfError::Spec("no users".into()));
                }
                if beta.len() != k {
                    return Err(CfError::Spec("beta length differs from user count".into()));
                }
                if h.is_empty() || h.iter().any(|row| row.len() != k) {
                    return Err(CfError::Spec("channel matrix has wrong width".into()));
                }
                if p.iter().any(|&x| !(x > 0.0)) {
                    return Err(CfError::Spec("powers must be positive".into()));
                }
                if beta.iter().any(|&x| !(x != 0.0) || !x.is_finite()) {
                    return Err(CfError::Spec("scalings must be nonzero finite".into()));
                }
                Ok(())
            }
            ChannelSpec::IntegerLattice {
                sources,
                modulation,
                channel,
            } => validate_discrete(sources, modulation, channel, None),
            ChannelSpec::FiniteField {
                q,
                sources,
                modulation,
                channel,
            } => {
                if *q == 2 || !is_small_prime(*q) {
                    return Err(CfError::BadModulus { q: *q });
                }
                validate_discrete(sources, modulation, channel, Some(*q))
            }
        }
    }
}

fn validate_discrete(
    sources: &[UserPmf],
    modulation: &[Vec<usize>],
    channel: &FiniteChannel,
    q: Option<i64>,
) -> Result<(), CfError> {
    let k = sources.len();
    if k == 0 {
        return Err(CfError::Spec("no users".into()));
    }
    if modulation.len() != k || channel.input_sizes.len() != k {
        return Err(CfError::Spec("per-user table count mismatch".into()));
    }
    for (u, (pmf, m)) in sources.iter().zip(modulation).enumerate() {
        pmf.validate()?;
        if m.len() != pmf.support.len() {
            return Err(CfError::Spec(format!("user {u} modulation table length mismatch")));
        }
        if m.iter().any(|&x| x >= channel.input_sizes[u]) {
            return Err(CfError::Spec(format!("user {u} modulation symbol out of range")));
        }
        if let Some(q) = q {
            let half = (q - 1) / 2;
            if pmf.support.iter().any(|&v| v < -half || v > half) {
                return Err(CfError::Spec(format!(
                    "user {u} has symbols outside the centered modulo-{q} range"
                )));
            }
        }
    }
    channel.validate()
}

/// Two iid uniform binary users observed through the noiseless adder
/// `Y = U1 + U2`.
pub fn noiseless_adder_spec() -> ChannelSpec {
    let channel = FiniteChannel::deterministic(vec![2, 2], 3, |x| x[0] + x[1]);
    ChannelSpec::integer_lattice(
        vec![UserPmf::uniform(&[0, 1]), UserPmf::uniform(&[0, 1])],
        vec![vec![0, 1], vec![0, 1]],
        channel,
    )
    .expect("valid built-in spec")
}

/// Two iid uniform binary users observed losslessly: `Y = (U1, U2)`.
pub fn noiseless_pair_spec() -> ChannelSpec {
    let channel = FiniteChannel::deterministic(vec![2, 2], 4, |x| 2 * x[0] + x[1]);
    ChannelSpec::integer_lattice(
        vec![UserPmf::uniform(&[0, 1]), UserPmf::uniform(&[0, 1])],
        vec![vec![0, 1], vec![0, 1]],
        channel,
    )
    .expect("valid built-in spec")
}

/// Three-user scalar Gaussian channel with unit gains and symmetric power 3.
pub fn example_gmac3_spec() -> ChannelSpec {
    ChannelSpec::gaussian(vec![vec![1.0, 1.0, 1.0]], vec![3.0; 3], None).expect("valid built-in spec")
}

/// Three-user, three-antenna Gaussian channel with circulant gains and
/// symmetric power 2.
pub fn example_gmac3_mimo_spec() -> ChannelSpec {
    ChannelSpec::gaussian(
        vec![
            vec![1.0, 1.5, 0.75],
            vec![0.75, 1.0, 1.5],
            vec![1.5, 0.75, 1.0],
        ],
        vec![2.0; 3],
        None,
    )
    .expect("valid built-in spec")
}

// ---------------------------------------------------------------------------
// Search budget and reports
// ---------------------------------------------------------------------------

/// Finite enumeration bounds standing in for the unbounded unions and infima
/// in the region definitions.
#[derive(Clone, Debug)]
pub struct SearchBudget {
    /// Entry bound for enumerated combination matrices B.
    pub b_max: i64,
    /// Entry bound for enumerated recombination matrices C.
    pub c_max: i64,
    /// Restriction of the admissible row counts of B.
    pub lb_range: Option<(usize, usize)>,
    /// Optional cap on the maximal-minor magnitude of candidate C.
    pub det_cap: Option<i64>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            b_max: 3,
            c_max: 5,
            lb_range: None,
            det_cap: None,
        }
    }
}

impl SearchBudget {
    fn validate(&self) -> Result<(), CfError> {
        if self.b_max < 1 || self.c_max < 1 {
            return Err(CfError::Spec("search budget bounds must be positive".into()));
        }
        if let Some((lo, hi)) = self.lb_range {
            if lo < 1 || hi < lo {
                return Err(CfError::Spec("empty row-count range".into()));
            }
        }
        if let Some(d) = self.det_cap {
            if d < 1 {
                return Err(CfError::Spec("determinant cap must be positive".into()));
            }
        }
        Ok(())
    }
}

/// One achievable-bound derivation: which combination matrix, matroid branch,
/// and user subset produced a halfspace, with its entropy ingredients.
///
/// For sequential records, `matroid` is `"sequential row j"`, `h_b_bits` is
/// the decoded-prefix entropy through row `j`, and `j_bits` holds the
/// previous prefix's entropy.
#[derive(Clone, Debug, Serialize)]
pub struct BranchRecord {
    pub source_id: u32,
    pub b: Vec<Vec<i64>>,
    pub matroid: String,
    pub t: Vec<usize>,
    pub h_t_bits: f64,
    pub h_b_bits: f64,
    pub j_bits: f64,
    pub achieving_c: Option<Vec<Vec<i64>>>,
    pub truncated: bool,
}

/// An assembled region plus the ledger tracing every surviving bound and the
/// truncation flags for the two finite searches.
#[derive(Clone, Debug)]
pub struct RegionReport {
    pub region: RateRegion,
    pub ledger: Vec<BranchRecord>,
    /// The union over combination matrices B was cut off at the budget.
    pub b_truncated: bool,
    /// Some minimum-entropy search could not certify its minimum.
    pub c_truncated: bool,
}

// ---------------------------------------------------------------------------
// Small integer/float matrix helpers
// ---------------------------------------------------------------------------

fn gcd64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn gcd128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn content(v: &[i64]) -> i64 {
    v.iter().fold(0, |g, &x| gcd64(g, x))
}

fn rows_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|ar| {
            (0..cols)
                .map(|j| (0..inner).map(|t| ar[t] * b[t][j]).sum())
                .collect()
        })
        .collect()
}

pub(crate) fn det_f64(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let (piv, maxv) = (col..n)
            .map(|i| (i, a[i][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if maxv == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        det *= a[col][col];
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            for j in col..n {
                a[i][j] -= f * a[col][j];
            }
        }
    }
    det
}

fn inverse_f64(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let (piv, maxv) = (col..n)
            .map(|i| (i, a[i][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if maxv < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        let d = a[col][col];
        for j in 0..2 * n {
            a[col][j] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                if f != 0.0 {
                    for j in 0..2 * n {
                        a[i][j] -= f * a[col][j];
                    }
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Adjugate of a small integer matrix (cofactor transpose), exact in i64.
pub(crate) fn adjugate_i64(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![1]];
    }
    let minor_det = |skip_r: usize, skip_c: usize| -> i64 {
        let sub: Vec<Vec<i128>> = m
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip_r)
            .map(|(_, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != skip_c)
                    .map(|(_, &v)| v as i128)
                    .collect()
            })
            .collect();
        det_i128(&sub) as i64
    };
    let mut adj = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[j][i] = sign * minor_det(i, j);
        }
    }
    adj
}

pub(crate) fn det_i128(m: &[Vec<i128>]) -> i128 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        n => {
            // cofactor expansion along the first row; n <= 5 in practice
            let mut det = 0i128;
            for j in 0..n {
                if m[0][j] == 0 {
                    continue;
                }
                let sub: Vec<Vec<i128>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                det += sign * m[0][j] * det_i128(&sub);
            }
            det
        }
    }
}

/// gcd of all maximal (full-row-size) minors of an integer matrix; this is
/// the product of its elementary divisors when the matrix has full row rank.
fn gcd_max_minors(rows: &[Vec<i64>]) -> i128 {
    let l = rows.len();
    let k = rows.first().map_or(0, |r| r.len());
    if l == 0 {
        return 1;
    }
    let mut g: i128 = 0;
    for cols in (0..k).combinations(l) {
        let sub: Vec<Vec<i128>> = rows
            .iter()
            .map(|r| cols.iter().map(|&j| r[j] as i128).collect())
            .collect();
        g = gcd128(g, det_i128(&sub));
        if g == 1 {
            break;
        }
    }
    g
}

fn quad_form(q: &[Vec<f64>], v: &[i64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        if v[i] == 0 {
            continue;
        }
        for j in 0..n {
            s += (v[i] as f64) * q[i][j] * (v[j] as f64);
        }
    }
    s
}

/// Reduced row-echelon form over F_q with entries in [0, q); zero rows are
/// dropped. Canonical per row space, used as a cache key and as the
/// representative enumeration for recombination searches.
fn rref_mod_q(rows: &[Vec<i64>], q: i64) -> Vec<Vec<i64>> {
    let mut a: Vec<Vec<i64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x.rem_euclid(q)).collect())
        .collect();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivot_row = 0;
    for col in 0..cols {
        let Some(src) = (pivot_row..a.len()).find(|&i| a[i][col] % q != 0) else {
            continue;
        };
        a.swap(pivot_row, src);
        let inv = crate::linalg::mod_inverse(a[pivot_row][col], q);
        for x in a[pivot_row].iter_mut() {
            *x = (*x * inv).rem_euclid(q);
        }
        for i in 0..a.len() {
            if i != pivot_row && a[i][col] != 0 {
                let f = a[i][col];
                for j in 0..cols {
                    a[i][j] = (a[i][j] - f * a[pivot_row][j]).rem_euclid(q);
                }
            }
        }
        pivot_row += 1;
        if pivot_row == a.len() {
            break;
        }
    }
    a.truncate(pivot_row);
    a
}

fn rank_rows(rows: &[Vec<i64>], modulus: Option<i64>) -> usize {
    match modulus {
        Some(q) => {
            let mut a: Vec<Vec<i64>> = rows
                .iter()
                .map(|r| r.iter().map(|&x| x.rem_euclid(q)).collect())
                .collect();
            rank_mod_q_i64(&mut a, q)
        }
        None => rank_i128(
            &rows
                .iter()
                .map(|r| r.iter().map(|&x| x as i128).collect())
                .collect::<Vec<Vec<i128>>>(),
        ),
    }
}

fn to_int_matrix(rows: &[Vec<i64>]) -> IntMatrix {
    IntMatrix::from_rows_i64(rows).expect("consistent row shapes")
}

fn matrix_to_rows(m: &IntMatrix) -> Result<Vec<Vec<i64>>, CfError> {
    Ok(m.to_rows_i64()?)
}

// ---------------------------------------------------------------------------
// Entropy evaluator
// ---------------------------------------------------------------------------

/// Immutable, thread-shareable data derived from a channel specification.
pub(crate) struct SpecContext {
    pub(crate) k: usize,
    pub(crate) user_h: Vec<f64>,
    kind: EntropyKind,
    modulus: Option<i64>,
    pub(crate) joint: Option<Arc<JointDiscreteSource>>,
    /// Gaussian posterior covariance of `u` given `Y`.
    pub(crate) kc: Option<Vec<Vec<f64>>>,
}

impl SpecContext {
    pub(crate) fn new(spec: &ChannelSpec) -> Result<Self, CfError> {
        spec.validate()?;
        match spec {
            ChannelSpec::Gaussian { h, p, beta } => {
                let src = gaussian_conditional_covariance(h, p, beta)?;
                let kc_mat = src.conditional().expect("posterior present");
                let k = p.len();
                let kc: Vec<Vec<f64>> = (0..k)
                    .map(|i| (0..k).map(|j| kc_mat[(i, j)]).collect())
                    .collect();
                let user_h = p
                    .iter()
                    .zip(beta)
                    .map(|(&pk, &bk)| 0.5 * (LOG2_2PIE + (bk * bk * pk).log2()))
                    .collect();
                Ok(SpecContext {
                    k,
                    user_h,
                    kind: EntropyKind::Differential,
                    modulus: None,
                    joint: None,
                    kc: Some(kc),
                })
            }
            ChannelSpec::FiniteField {
                q,
                sources,
                modulation,
                channel,
            } => Self::discrete(sources, modulation, channel, Some(*q)),
            ChannelSpec::IntegerLattice {
                sources,
                modulation,
                channel,
            } => Self::discrete(sources, modulation, channel, None),
        }
    }

    fn discrete(
        sources: &[UserPmf],
        modulation: &[Vec<usize>],
        channel: &FiniteChannel,
        modulus: Option<i64>,
    ) -> Result<Self, CfError> {
        let k = sources.len();
        let mut states: u128 = channel.y_size as u128;
        for s in sources {
            states = states.saturating_mul(s.support.len() as u128);
        }
        if states > STATE_CAP {
            return Err(CfError::StateBudget {
                states,
                cap: STATE_CAP,
            });
        }
        let strides: Vec<usize> = {
            let mut st = vec![0usize; k];
            let mut acc = 1usize;
            for i in (0..k).rev() {
                st[i] = acc;
                acc *= channel.input_sizes[i];
            }
            st
        };
        let combos: usize = sources.iter().map(|s| s.support.len()).product();
        let mut entries = Vec::new();
        let mut idx = vec![0usize; k];
        for _ in 0..combos {
            let mut pu = 1.0;
            let mut u = Vec::with_capacity(k);
            let mut xflat = 0usize;
            for (t, &i) in idx.iter().enumerate() {
                pu *= sources[t].probs[i];
                u.push(sources[t].support[i]);
                xflat += modulation[t][i] * strides[t];
            }
            if pu > 0.0 {
                for (y, &py) in channel.rows[xflat].iter().enumerate() {
                    if py > 0.0 {
                        entries.push((u.clone(), y, pu * py));
                    }
                }
            }
            for j in (0..k).rev() {
                idx[j] += 1;
                if idx[j] < sources[j].support.len() {
                    break;
                }
                idx[j] = 0;
            }
        }
        let joint = JointDiscreteSource::new(k, channel.y_size, entries)?;
        let user_h = sources.iter().map(|s| s.entropy_bits()).collect();
        Ok(SpecContext {
            k,
            user_h,
            kind: EntropyKind::Discrete,
            modulus,
            joint: Some(Arc::new(joint)),
            kc: None,
        })
    }

    fn sum_user_h(&self, t: &[usize]) -> f64 {
        t.iter().map(|&k| self.user_h[k]).sum()
    }
}

/// Per-thread entropy evaluator with a cache keyed by the canonical row-space
/// representative of the coefficient matrix (row Hermite form over the
/// integers, reduced row echelon form over F_q); conditional algebraic
/// entropies are invariant under row-space-preserving changes of the matrix.
struct Evaluator<'a> {
    ctx: &'a SpecContext,
    cache: RefCell<HashMap<Vec<i64>, f64>>,
}

impl<'a> Evaluator<'a> {
    fn new(ctx: &'a SpecContext) -> Self {
        Evaluator {
            ctx,
            cache: RefCell::new(HashMap::new()),
        }
    }

    /// Conditional algebraic entropy `H_Q(u|Y)` in bits for integer rows `Q`.
    fn cond_entropy(&self, rows: &[Vec<i64>]) -> f64 {
        if rows.is_empty() {
            return 0.0;
        }
        match &self.ctx.kc {
            Some(kc) => self.gaussian_cond_entropy(rows, kc),
            None => self.discrete_cond_entropy(rows),
        }
    }

    fn discrete_cond_entropy(&self, rows: &[Vec<i64>]) -> f64 {
        let key: Vec<i64> = {
            let canon = match self.ctx.modulus {
                Some(q) => rref_mod_q(rows, q),
                None => hermite_normal_form(&to_int_matrix(rows))
                    .to_rows_i64()
                    .expect("small canonical rows"),
            };
            let mut k = vec![canon.len() as i64, self.ctx.k as i64];
            k.extend(canon.into_iter().flatten());
            k
        };
        if let Some(&v) = self.cache.borrow().get(&key) {
            return v;
        }
        let joint = self.ctx.joint.as_ref().expect("discrete context");
        let q = self.ctx.modulus;
        let v = conditional_pushforward_entropy_bits(joint, |u| {
            rows.iter()
                .map(|r| {
                    let s: i64 = r.iter().zip(u).map(|(a, b)| a * b).sum();
                    match q {
                        Some(q) => mod_q_centered(s, q),
                        None => s,
                    }
                })
                .collect()
        });
        self.cache.borrow_mut().insert(key, v);
        v
    }

    fn gaussian_cond_entropy(&self, rows: &[Vec<i64>], kc: &[Vec<f64>]) -> f64 {
        let l = rows.len();
        let r = rank_rows(rows, None);
        if r == 0 {
            return 0.0;
        }
        if r < l {
            // Rank-deficient coefficients: fall back to the Smith-form route.
            let g = GaussianSource::from_rows(kc, Some(kc));
            if let Ok(g) = g {
                if let Ok(v) = gaussian_algebraic_entropy(&to_int_matrix(rows), &g, true) {
                    return v.bits;
                }
            }
        }
        let frows: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| x as f64).collect())
            .collect();
        // G = Q Kc Q^T
        let n = kc.len();
        let mut g = vec![vec![0.0; l]; l];
        for i in 0..l {
            for j in 0..l {
                let mut s = 0.0;
                for a in 0..n {
                    if frows[i][a] == 0.0 {
                        continue;
                    }
                    for b in 0..n {
                        s += frows[i][a] * kc[a][b] * frows[j][b];
                    }
                }
                g[i][j] = s;
            }
        }
        let det = det_f64(&g);
        let sigma = gcd_max_minors(rows) as f64;
        0.5 * (l as f64) * LOG2_2PIE + 0.5 * det.log2() - sigma.abs().log2()
    }
}

// ---------------------------------------------------------------------------
// Ellipsoid enumeration (Fincke–Pohst)
// ---------------------------------------------------------------------------

/// Upper-triangular Cholesky factor of a small SPD matrix.
fn cholesky_upper(q: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = q.len();
    let mut u = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut d = q[i][i];
        for k in 0..i {
            d -= u[k][i] * u[k][i];
        }
        if d <= 0.0 {
            return None;
        }
        u[i][i] = d.sqrt();
        for j in i + 1..n {
            let mut s = q[i][j];
            for k in 0..i {
                s -= u[k][i] * u[k][j];
            }
            u[i][j] = s / u[i][i];
        }
    }
    Some(u)
}

/// All nonzero integer vectors v (one representative of each +-v pair) with
/// `v^T Q v <= radius`, for SPD `Q`. Returns `None` when the enumeration
/// exceeds `cap` points.
fn enumerate_ellipsoid(q: &[Vec<f64>], radius: f64, cap: usize) -> Option<Vec<Vec<i64>>> {
    let n = q.len();
    if radius < 0.0 {
        return Some(Vec::new());
    }
    let u = cholesky_upper(q)?;
    let radius = radius * (1.0 + 1e-9) + 1e-12;
    let mut out: Vec<Vec<i64>> = Vec::new();
    let mut v = vec![0i64; n];
    // Depth-first over coordinates n-1 .. 0 with partial sums:
    // sum_i (u_ii v_i + sum_{j>i} u_ij v_j)^2 <= radius
    fn descend(
        u: &[Vec<f64>],
        radius: f64,
        level: isize,
        v: &mut Vec<i64>,
        partial: f64,
        out: &mut Vec<Vec<i64>>,
        cap: usize,
    ) -> bool {
        if level < 0 {
            if v.iter().any(|&x| x != 0) {
                // keep one of +-v: first nonzero entry positive
                let first = v.iter().find(|&&x| x != 0).copied().unwrap_or(0);
                if first > 0 {
                    if out.len() >= cap {
                        return false;
                    }
                    out.push(v.clone());
                }
            }
            return true;
        }
        let i = level as usize;
        let rem = radius - partial;
        if rem < 0.0 {
            return true;
        }
        let mut offset = 0.0;
        for j in i + 1..u.len() {
            offset += u[i][j] * v[j] as f64;
        }
        // |u_ii v_i + offset| <= sqrt(rem)
        let half = rem.max(0.0).sqrt();
        let lo = ((-half - offset) / u[i][i]).floor() as i64;
        let hi = ((half - offset) / u[i][i]).ceil() as i64;
        for x in lo..=hi {
            let term = u[i][i] * x as f64 + offset;
            let add = term * term;
            if partial + add <= radius {
                v[i] = x;
                if !descend(u, radius, level - 1, v, partial + add, out, cap) {
                    return false;
                }
            }
        }
        v[i] = 0;
        true
    }
    let complete = descend(&u, radius, n as isize - 1, &mut v, 0.0, &mut out, cap);
    if !complete {
        return None;
    }
    out.sort();
    Some(out)
}

// ---------------------------------------------------------------------------
// Minimum-entropy searches (J terms)
// ---------------------------------------------------------------------------

const SWEEP_CAP: usize = 2_000_000;

struct JResult {
    bits: f64,
    achieving: Option<Vec<Vec<i64>>>,
    truncated: bool,
}

/// Per-combination-matrix data shared by the certified Gaussian searches:
/// Smith factors of `B` (saturation basis, divisor data, and `W` with
/// `B = W T`), plus the Gram matrices of `B` and of the saturation basis
/// under the posterior covariance.
struct GaussCtx {
    /// Saturation basis `T` of the row lattice (first `L` rows of `V^{-1}`).
    tb: Vec<Vec<i64>>,
    vmat: Vec<Vec<i64>>,
    umat: Vec<Vec<i64>>,
    sigma: Vec<i64>,
    /// `T Kc T^T`.
    gt: Vec<Vec<f64>>,
    /// Inverse and determinant of `G = B Kc B^T`.
    g_inv: Option<Vec<Vec<f64>>>,
    det_g: f64,
    /// `W = U^{-1} diag(sigma)`, its adjugate and determinant.
    adj_w: Vec<Vec<i64>>,
    det_w: i64,
}

impl GaussCtx {
    fn new(kc: &[Vec<f64>], b: &[Vec<i64>]) -> Self {
        let l = b.len();
        let kk = kc.len();
        let dec = smith_decompose(&to_int_matrix(b));
        let small = |x: &num_bigint::BigInt| x.to_i64().expect("small Smith factor");
        let tb: Vec<Vec<i64>> = (0..l)
            .map(|i| (0..kk).map(|j| small(dec.v_inv.get(i, j))).collect())
            .collect();
        let vmat: Vec<Vec<i64>> = (0..kk)
            .map(|i| (0..kk).map(|j| small(dec.v.get(i, j))).collect())
            .collect();
        let umat: Vec<Vec<i64>> = (0..l)
            .map(|i| (0..l).map(|j| small(dec.u.get(i, j))).collect())
            .collect();
        let sigma: Vec<i64> = dec.sigma.iter().map(small).collect();
        let gram = |rows: &[Vec<i64>]| -> Vec<Vec<f64>> {
            let n = rows.len();
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut s = 0.0;
                            for a in 0..kk {
                                if rows[i][a] == 0 {
                                    continue;
                                }
                                for bb in 0..kk {
                                    s += (rows[i][a] as f64) * kc[a][bb] * (rows[j][bb] as f64);
                                }
                            }
                            s
                        })
                        .collect()
                })
                .collect()
        };
        let gt = gram(&tb);
        let g = gram(b);
        let det_g = det_f64(&g);
        let g_inv = inverse_f64(&g);
        let w: Vec<Vec<i64>> = (0..l)
            .map(|i| (0..l).map(|j| small(dec.u_inv.get(i, j)) * sigma[j]).collect())
            .collect();
        let adj_w = adjugate_i64(&w);
        let det_w = {
            let wi: Vec<Vec<i128>> = w
                .iter()
                .map(|r| r.iter().map(|&x| x as i128).collect())
                .collect();
            det_i128(&wi) as i64
        };
        GaussCtx {
            tb,
            vmat,
            umat,
            sigma,
            gt,
            g_inv,
            det_g,
            adj_w,
            det_w,
        }
    }
}

/// All sign patterns over a fixed support with unit magnitudes and positive
/// leading entry: cheap, high-quality seeds for the certified sweeps.
fn sign_pattern_seeds(l: usize, support: &[usize]) -> Vec<Vec<i64>> {
    let d = support.len();
    let mut out = Vec::with_capacity(1 << (d.saturating_sub(1)));
    for bits in 0..(1u32 << (d.saturating_sub(1))) {
        let mut v = vec![0i64; l];
        v[support[0]] = 1;
        for (t, &pos) in support.iter().enumerate().skip(1) {
            v[pos] = if bits & (1 << (t - 1)) != 0 { -1 } else { 1 };
        }
        out.push(v);
    }
    out
}

/// Dispatches the `J(B, M)` search: the infimum of `H_{CB}(u|Y)` over integer
/// right-invertible matrices `C` whose column matroid is `M`.
fn j_search(
    ev: &Evaluator,
    b: &[Vec<i64>],
    m: &Matroid,
    budget: &SearchBudget,
    gctx: Option<&GaussCtx>,
) -> JResult {
    let l = b.len();
    let r = m.rank();
    if r == 0 {
        return JResult {
            bits: 0.0,
            achieving: Some(vec![]),
            truncated: false,
        };
    }
    if let Some(q) = ev.ctx.modulus {
        return j_search_ff(ev, b, m, q);
    }
    if let Some(kc) = &ev.ctx.kc {
        let owned;
        let ctx = match gctx {
            Some(c) => c,
            None => {
                owned = GaussCtx::new(kc, b);
                &owned
            }
        };
        if r == 1 {
            return j_search_gaussian_rank1(ev, b, m, budget, ctx);
        }
        if r == l - 1 {
            return j_search_gaussian_corank1(ev, b, m, budget, ctx);
        }
    }
    j_search_generic(ev, b, m, budget)
}

/// Complete finite-field search: one reduced-row-echelon representative per
/// row space of F_q^L carries the entropy value of every C with that row
/// space, so enumerating representatives is exhaustive. Never truncated.
fn j_search_ff(ev: &Evaluator, b: &[Vec<i64>], m: &Matroid, q: i64) -> JResult {
    let l = b.len();
    let r = m.rank();
    let mut best = f64::INFINITY;
    let mut best_c: Option<Vec<Vec<i64>>> = None;
    for pivots in (0..l).combinations(r) {
        // free entries: row i may have nonzero entries in columns after
        // pivots[i] that are not later pivots
        let mut free_pos: Vec<(usize, usize)> = Vec::new();
        for (i, &pc) in pivots.iter().enumerate() {
            for col in pc + 1..l {
                if !pivots[i + 1..].contains(&col) {
                    free_pos.push((i, col));
                }
            }
        }
        let nfree = free_pos.len();
        let mut counter = vec![0i64; nfree];
        loop {
            let mut c = vec![vec![0i64; l]; r];
            for (i, &pc) in pivots.iter().enumerate() {
                c[i][pc] = 1;
            }
            for (t, &(i, col)) in free_pos.iter().enumerate() {
                c[i][col] = counter[t];
            }
            let (rank, masks) = column_matroid_masks_i64(&c, Some(q));
            if rank == r && masks == *m.bases_masks() {
                let cb = rows_mul(&c, b);
                let v = ev.cond_entropy(&cb);
                if v < best {
                    best = v;
                    best_c = Some(
                        c.iter()
                            .map(|row| row.iter().map(|&x| mod_q_centered(x, q)).collect())
                            .collect(),
                    );
                }
            }
            // odometer over [0, q)^nfree
            let mut done = true;
            for t in (0..nfree).rev() {
                counter[t] += 1;
                if counter[t] < q {
                    done = false;
                    break;
                }
                counter[t] = 0;
            }
            if done {
                break;
            }
        }
    }
    JResult {
        bits: best,
        achieving: best_c,
        truncated: false,
    }
}

/// Certified Gaussian search for rank-1 matroids. Substituting `w = cB`
/// turns the objective into `w Kc w^T` over primitive `w` in the saturation
/// of the row lattice of `B`; parameterizing the saturation by its Smith
/// basis reduces the search to a finite ellipsoid sweep below a cheap seed
/// value, which certifies the minimum.
fn j_search_gaussian_rank1(
    ev: &Evaluator,
    b: &[Vec<i64>],
    m: &Matroid,
    budget: &SearchBudget,
    g: &GaussCtx,
) -> JResult {
    let l = b.len();
    let kc = ev.ctx.kc.as_ref().unwrap();
    let kk = ev.ctx.k;
    let loops: BTreeSet<usize> = m.loops().into_iter().collect();
    let support: Vec<usize> = (0..l).filter(|i| !loops.contains(i)).collect();
    let value_of = |c: &[i64]| -> f64 {
        let w: Vec<i64> = (0..kk)
            .map(|j| (0..l).map(|i| c[i] * b[i][j]).sum())
            .collect();
        let gg = content(&w);
        quad_form(kc, &w) / ((gg * gg) as f64)
    };
    // Seed with the unit-magnitude sign patterns on the support.
    let mut best_q = f64::INFINITY;
    let mut best_c: Option<Vec<i64>> = None;
    for c in sign_pattern_seeds(l, &support) {
        let v = value_of(&c);
        if v < best_q {
            best_q = v;
            best_c = Some(c);
        }
    }
    // Certified sweep below the seed: every direction in the saturation with
    // a smaller form value is visited, pulled back to its unique primitive
    // preimage, and kept when the support matches.
    let mut truncated = false;
    let improve = |points: Vec<Vec<i64>>, best_q: &mut f64, best_c: &mut Option<Vec<i64>>| {
        for t in points {
            if content(&t) != 1 {
                continue;
            }
            let w: Vec<i64> = (0..kk)
                .map(|j| (0..l).map(|i| t[i] * g.tb[i][j]).sum())
                .collect();
            // minimal multiple m with m*w in the row lattice of B
            let z: Vec<i64> = (0..kk)
                .map(|j| (0..kk).map(|i| w[i] * g.vmat[i][j]).sum())
                .collect();
            if z[l..].iter().any(|&x| x != 0) {
                continue;
            }
            let mut mult: i64 = 1;
            for j in 0..l {
                let gg = gcd64(g.sigma[j], z[j]);
                let need = g.sigma[j] / if gg == 0 { 1 } else { gg };
                mult = mult / gcd64(mult, need) * need;
            }
            let y: Vec<i64> = (0..l).map(|j| mult * z[j] / g.sigma[j]).collect();
            let mut c: Vec<i64> = (0..l)
                .map(|j| (0..l).map(|i| y[i] * g.umat[i][j]).sum())
                .collect();
            if c.iter().find(|&&x| x != 0).map_or(false, |&x| x < 0) {
                for x in c.iter_mut() {
                    *x = -*x;
                }
            }
            let support_ok = (0..l).all(|i| (c[i] != 0) == support.contains(&i));
            if !support_ok {
                continue;
            }
            let v = value_of(&c);
            if v < *best_q - 1e-15 || (v <= *best_q && Some(&c) < best_c.as_ref()) {
                *best_q = v;
                *best_c = Some(c);
            }
        }
    };
    match enumerate_ellipsoid(&g.gt, best_q, SWEEP_CAP) {
        None => truncated = true,
        Some(points) => improve(points, &mut best_q, &mut best_c),
    }
    if truncated {
        // Sweep overflow: fall back to an uncertified bounded box pass.
        let cm = budget.c_max;
        let mut counter = vec![-cm; support.len()];
        loop {
            let mut c = vec![0i64; l];
            for (t, &pos) in support.iter().enumerate() {
                c[pos] = counter[t];
            }
            if support.iter().all(|&p| c[p] != 0)
                && content(&c) == 1
                && c.iter().find(|&&x| x != 0).map_or(false, |&x| x > 0)
            {
                let v = value_of(&c);
                if v < best_q {
                    best_q = v;
                    best_c = Some(c.clone());
                }
            }
            let mut done = true;
            for t in (0..support.len()).rev() {
                counter[t] += 1;
                if counter[t] <= cm {
                    done = false;
                    break;
                }
                counter[t] = -cm;
            }
            if done {
                break;
            }
        }
    }
    JResult {
        bits: 0.5 * LOG2_2PIE + 0.5 * best_q.log2(),
        achieving: best_c.map(|c| vec![c]),
        truncated,
    }
}

/// Certified Gaussian search for corank-1 matroids (`rank(M) = L - 1`).
///
/// A right-invertible `C` of corank 1 is classified, up to value-preserving
/// left-unimodular changes, by the primitive kernel direction `n` with
/// `C n^T = 0`; the column matroid of `C` has bases exactly the complements
/// of nonzero coordinates of `n`. Writing `B = W T` with `T` the saturated
/// Smith basis and using `det(C_n G C_n^T) = det(G) (n G^{-1} n^T)` and
/// `Sigma(C_n B) = content(adj(W) n)`, the objective becomes
/// `det(G) (n G^{-1} n^T) / content(adj(W) n)^2`; since the content divides
/// `det(W)` the search is certified by sweeping the finite ellipsoid
/// `det(G) n G^{-1} n^T <= best * det(W)^2`.
fn j_search_gaussian_corank1(
    ev: &Evaluator,
    b: &[Vec<i64>],
    m: &Matroid,
    budget: &SearchBudget,
    g: &GaussCtx,
) -> JResult {
    let l = b.len();
    // Required nonzero pattern of n: complements of bases.
    let full_mask: u16 = (1u16 << l) - 1;
    let d_setmask: u16 = m
        .bases_masks()
        .iter()
        .fold(0u16, |acc, &bm| acc | (full_mask & !bm));
    // Each basis must be the complement of a single element; verify the
    // matroid really is of the corank-1 form, i.e. bases = { [L] \ {j} : j in D }.
    let expected: BTreeSet<u16> = (0..l)
        .filter(|j| d_setmask & (1 << j) != 0)
        .map(|j| full_mask & !(1 << j))
        .collect();
    if expected != *m.bases_masks() {
        return j_search_generic(ev, b, m, budget);
    }
    let Some(g_inv) = &g.g_inv else {
        return j_search_generic(ev, b, m, budget);
    };
    let dset: Vec<usize> = (0..l).filter(|j| d_setmask & (1 << j) != 0).collect();
    let value_of = |n: &[i64]| -> f64 {
        let mn: Vec<i64> = (0..l)
            .map(|i| (0..l).map(|j| g.adj_w[i][j] * n[j]).sum())
            .collect();
        let g2 = content(&mn).max(1);
        g.det_g * quad_form(g_inv, n) / ((g2 as f64) * (g2 as f64))
    };
    let support_ok =
        |n: &[i64]| -> bool { (0..l).all(|j| (n[j] != 0) == dset.contains(&j)) };
    // Seed with unit-magnitude sign patterns on the required support.
    let mut best_q = f64::INFINITY;
    let mut best_n: Option<Vec<i64>> = None;
    for n in sign_pattern_seeds(l, &dset) {
        let v = value_of(&n);
        if v < best_q {
            best_q = v;
            best_n = Some(n);
        }
    }
    // Certified sweep: the content of adj(W) n divides det(W), so any better
    // n satisfies det(G) n G^{-1} n^T <= best_q * det(W)^2.
    let mut form = vec![vec![0.0; l]; l];
    let scale = g.det_g / ((g.det_w as f64) * (g.det_w as f64));
    for i in 0..l {
        for j in 0..l {
            form[i][j] = scale * g_inv[i][j];
        }
    }
    let mut truncated = false;
    match enumerate_ellipsoid(&form, best_q, SWEEP_CAP) {
        None => truncated = true,
        Some(points) => {
            for n in points {
                if content(&n) != 1 || !support_ok(&n) {
                    continue;
                }
                let v = value_of(&n);
                if v < best_q - 1e-15 || (v <= best_q && Some(&n) < best_n.as_ref()) {
                    best_q = v;
                    best_n = Some(n);
                }
            }
        }
    }
    if truncated {
        // Sweep overflow: fall back to an uncertified bounded box pass.
        let cm = budget.c_max;
        let mut counter = vec![-cm; dset.len()];
        loop {
            let mut n = vec![0i64; l];
            for (t, &pos) in dset.iter().enumerate() {
                n[pos] = counter[t];
            }
            if dset.iter().all(|&p| n[p] != 0)
                && content(&n) == 1
                && n.iter().find(|&&x| x != 0).map_or(false, |&x| x > 0)
            {
                let v = value_of(&n);
                if v < best_q {
                    best_q = v;
                    best_n = Some(n.clone());
                }
            }
            let mut done = true;
            for t in (0..dset.len()).rev() {
                counter[t] += 1;
                if counter[t] <= cm {
                    done = false;
                    break;
                }
                counter[t] = -cm;
            }
            if done {
                break;
            }
        }
    }
    let n = best_n.unwrap();
    // Materialize an integer kernel basis as the achieving C.
    let nmat = to_int_matrix(&[n]);
    let kernel = orthogonal_lattice_basis(&nmat);
    let c_rows: Vec<Vec<i64>> = (0..kernel.cols())
        .map(|j| {
            (0..kernel.rows())
                .map(|i| kernel.get(i, j).to_i64().expect("small kernel entry"))
                .collect()
        })
        .collect();
    JResult {
        bits: 0.5 * ((l - 1) as f64) * LOG2_2PIE + 0.5 * best_q.log2(),
        achieving: Some(c_rows),
        truncated,
    }
}

/// Uncertified exhaustive search over right-invertible integer `C` with
/// entries bounded by `c_max` (deduplicated by row Hermite form, which
/// preserves the value). Marked truncated unless the minimum reaches an
/// unbeatable floor (zero, for discrete conditional entropies).
fn j_search_generic(ev: &Evaluator, b: &[Vec<i64>], m: &Matroid, budget: &SearchBudget) -> JResult {
    let l = b.len();
    let r = m.rank();
    let mut cm = budget.c_max;
    let mut capped = false;
    while cm > 1 && ((2 * cm + 1) as f64).powi((r * l) as i32) > 4_000_000.0 {
        cm -= 1;
        capped = true;
    }
    let mut best = f64::INFINITY;
    let mut best_c: Option<Vec<Vec<i64>>> = None;
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    let total = ((2 * cm + 1) as usize).pow((r * l) as u32);
    let mut flat = vec![-cm; r * l];
    for step in 0..total {
        if step > 0 {
            for t in (0..r * l).rev() {
                flat[t] += 1;
                if flat[t] <= cm {
                    break;
                }
                flat[t] = -cm;
            }
        }
        let c: Vec<Vec<i64>> = (0..r).map(|i| flat[i * l..(i + 1) * l].to_vec()).collect();
        // Per-row sign flips leave the value and the column matroid alone;
        // keep one representative per class.
        let sign_canonical = c
            .iter()
            .all(|row| row.iter().find(|&&x| x != 0).map_or(false, |&x| x > 0));
        if !sign_canonical {
            continue;
        }
        if rank_rows(&c, None) != r {
            continue;
        }
        let minors_gcd = gcd_max_minors(&c);
        if minors_gcd != 1 {
            continue;
        }
        if let Some(cap) = budget.det_cap {
            let max_minor_ok = (0..l).combinations(r).all(|cols| {
                let sub: Vec<Vec<i128>> = c
                    .iter()
                    .map(|row| cols.iter().map(|&j| row[j] as i128).collect())
                    .collect();
                det_i128(&sub).abs() <= cap as i128
            });
            if !max_minor_ok {
                continue;
            }
        }
        let (rank, masks) = column_matroid_masks_i64(&c, None);
        if rank != r || masks != *m.bases_masks() {
            continue;
        }
        let hkey: Vec<i64> = hermite_normal_form(&to_int_matrix(&c))
            .to_rows_i64()
            .map(|rows| rows.into_iter().flatten().collect())
            .unwrap_or_default();
        if !seen.insert(hkey) {
            continue;
        }
        let cb = rows_mul(&c, b);
        let v = ev.cond_entropy(&cb);
        if v < best {
            best = v;
            best_c = Some(c);
        }
    }
    let certified_floor = ev.ctx.kind == EntropyKind::Discrete && best <= 0.0;
    JResult {
        bits: best,
        achieving: best_c,
        truncated: capped || !certified_floor,
    }
}

// ---------------------------------------------------------------------------
// Public entropy/J operations
// ---------------------------------------------------------------------------

/// Conditional algebraic entropy `H_Q(u|Y)` of the specification's source
/// behind its channel: exact marginalization for discrete specs, closed-form
/// log-determinants for Gaussian specs. An empty `Q` gives 0.
pub fn conditional_entropy_term(spec: &ChannelSpec, q: &IntMatrix) -> Result<EntropyValue, CfError> {
    if q.cols() != spec.users() && q.rows() > 0 {
        return Err(CfError::Shape(format!(
            "coefficient matrix has {} columns for {} users",
            q.cols(),
            spec.users()
        )));
    }
    let ctx = SpecContext::new(spec)?;
    let ev = Evaluator::new(&ctx);
    let rows = matrix_to_rows(q)?;
    let bits = ev.cond_entropy(&rows);
    Ok(match ctx.kind {
        EntropyKind::Discrete => EntropyValue::discrete(bits),
        EntropyKind::Differential => EntropyValue::differential(bits),
    })
}

/// Minimum-entropy term `J(B, M)`: the infimum of `H_{CB}(u|Y)` over integer
/// right-invertible `C` whose column matroid is `M`. Returns the value, an
/// achieving `C` when one was found, and whether the search was truncated
/// (a truncated search can only overestimate the infimum).
pub fn j_term(
    spec: &ChannelSpec,
    b: &IntMatrix,
    m: &Matroid,
    budget: &SearchBudget,
) -> Result<(EntropyValue, Option<IntMatrix>, bool), CfError> {
    budget.validate()?;
    if m.ground_size() != b.rows() {
        return Err(CfError::Shape(format!(
            "matroid ground size {} differs from row count {}",
            m.ground_size(),
            b.rows()
        )));
    }
    if m.rank() >= b.rows() && b.rows() > 0 {
        return Err(CfError::Shape(
            "matroid rank must be smaller than the row count".into(),
        ));
    }
    let ctx = SpecContext::new(spec)?;
    let ev = Evaluator::new(&ctx);
    let rows = matrix_to_rows(b)?;
    let res = j_search(&ev, &rows, m, budget, None);
    let value = match ctx.kind {
        EntropyKind::Discrete => EntropyValue::discrete(res.bits),
        EntropyKind::Differential => EntropyValue::differential(res.bits),
    };
    let achieving = res.achieving.map(|c| {
        if c.is_empty() {
            IntMatrix::zeros(0, b.rows())
        } else {
            to_int_matrix(&c)
        }
    });
    Ok((value, achieving, res.truncated))
}

// ---------------------------------------------------------------------------
// Region assembly
// ---------------------------------------------------------------------------

struct QAssembly {
    members: Vec<Polyhedron>,
    records: Vec<BranchRecord>,
    c_truncated: bool,
}

/// Lightweight halfspace for the per-B distributive fold: user mask,
/// threshold, ledger source id.
type LiteBound = (u32, f64, u32);

/// Concatenates two bound lists into canonical form: per mask only the
/// tightest threshold survives, and a bound is dropped when a strict mask
/// superset has no larger threshold (rates are nonnegative, so the superset
/// sum dominates). Returns `None` when the member is empty (a nonnegative
/// sum cannot be below a negative threshold).
fn lite_merge(base: &[LiteBound], add: &[LiteBound]) -> Option<Vec<LiteBound>> {
    let mut all: Vec<LiteBound> = base.iter().chain(add).copied().collect();
    all.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    all.dedup_by(|next, first| next.0 == first.0);
    if all.iter().any(|&(_, r, _)| r < 0.0) {
        return None;
    }
    let out: Vec<LiteBound> = all
        .iter()
        .filter(|(m1, r1, _)| {
            !all
                .iter()
                .any(|(m2, r2, _)| m2 & m1 == *m1 && m2 != m1 && *r2 <= *r1)
        })
        .copied()
        .collect();
    Some(out)
}

/// Sufficient test for `region(x)` contained in `region(y)`: every constraint
/// of `y` is implied by a constraint of `x` with a superset mask and no
/// larger threshold.
fn lite_subset(x: &[LiteBound], y: &[LiteBound]) -> bool {
    y.iter()
        .all(|(my, ry, _)| x.iter().any(|(mx, rx, _)| mx & my == *my && *rx <= *ry))
}

/// Antichain insertion: skip candidates inside a kept member, evict kept
/// members inside the candidate.
fn lite_insert(list: &mut Vec<Vec<LiteBound>>, cand: Vec<LiteBound>) {
    if list.iter().any(|e| lite_subset(&cand, e)) {
        return;
    }
    list.retain(|e| !lite_subset(e, &cand));
    list.push(cand);
}

/// Assembles the simultaneous-decoding region attached to one combination
/// matrix `B`: an intersection over all non-full-rank matroids `M` on the
/// rows of `B` of unions over dual bases `S` of intersections over column
/// bases `T` of `[B]_S` of the halfspaces
/// `sum_{k in T} R_k <= H(u_T) - H_B(u|Y) + J(B, M)`.
/// Matroid census per ground size, computed once: every non-free matroid on
/// up to four elements.
fn cached_matroids(l: usize) -> &'static [Matroid] {
    use std::sync::OnceLock;
    static CACHE: OnceLock<Vec<Vec<Matroid>>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        (0..=4)
            .map(|n| {
                if n == 0 {
                    Vec::new()
                } else {
                    enumerate_matroids(n, true).expect("census for n <= 4")
                }
            })
            .collect()
    });
    &all[l]
}

fn assemble_q(
    ev: &Evaluator,
    b: &[Vec<i64>],
    budget: &SearchBudget,
    id_base: u32,
) -> Result<QAssembly, CfError> {
    let l = b.len();
    let k = ev.ctx.k;
    let h_b = ev.cond_entropy(b);
    let matroids = cached_matroids(l);
    let gctx = ev
        .ctx
        .kc
        .as_ref()
        .filter(|_| l >= 2)
        .map(|kc| GaussCtx::new(kc, b));
    let mut records = Vec::new();
    let mut c_truncated = false;
    let mut next_id = id_base;
    // One list of alternatives per matroid: each dual basis S contributes
    // the conjunction of its T-indexed halfspaces.
    let mut branch_lists: Vec<Vec<Vec<LiteBound>>> = Vec::new();
    for m in matroids {
        let jres = j_search(ev, b, m, budget, gctx.as_ref());
        c_truncated |= jres.truncated;
        let mut options: Vec<Vec<LiteBound>> = Vec::new();
        for s in m.dual().bases() {
            let sub: Vec<Vec<i64>> = s.iter().map(|&i| b[i].clone()).collect();
            let (_, t_masks) = column_matroid_masks_i64(&sub, ev.ctx.modulus);
            let mut bounds = Vec::new();
            for t_mask in &t_masks {
                let t: Vec<usize> = (0..k).filter(|&j| t_mask & (1 << j) != 0).collect();
                let h_t = ev.ctx.sum_user_h(&t);
                let rhs = h_t - h_b + jres.bits;
                records.push(BranchRecord {
                    source_id: next_id,
                    b: b.to_vec(),
                    matroid: m.to_string(),
                    t,
                    h_t_bits: h_t,
                    h_b_bits: h_b,
                    j_bits: jres.bits,
                    achieving_c: jres.achieving.clone(),
                    truncated: jres.truncated,
                });
                if rhs.is_finite() {
                    bounds.push((*t_mask as u32, rhs, next_id));
                }
                next_id += 1;
            }
            options.push(bounds);
        }
        branch_lists.push(options);
    }
    // Distribute the intersection of unions, keeping only maximal members
    // (stable sort by option count keeps the fold small and deterministic).
    branch_lists.sort_by_key(|o| o.len());
    let mut members: Vec<Vec<LiteBound>> = vec![Vec::new()];
    for options in &branch_lists {
        let mut next: Vec<Vec<LiteBound>> = Vec::new();
        for member in &members {
            for opt in options {
                if let Some(merged) = lite_merge(member, opt) {
                    lite_insert(&mut next, merged);
                }
            }
        }
        members = next;
        if members.is_empty() {
            break;
        }
    }
    let polys: Vec<Polyhedron> = members
        .into_iter()
        .map(|bl| {
            Polyhedron::new(
                k,
                bl.into_iter()
                    .map(|(m, r, s)| RateBound::from_mask(m, r, Some(s)))
                    .collect(),
            )
        })
        .collect();
    Ok(QAssembly {
        members: polys,
        records,
        c_truncated,
    })
}

fn check_full_row_rank(rows: &[Vec<i64>], modulus: Option<i64>) -> Result<(), CfError> {
    if rows.is_empty() {
        return Err(CfError::Shape("combination matrix has no rows".into()));
    }
    if rank_rows(rows, modulus) != rows.len() {
        return Err(CfError::Shape(
            "combination matrix must have full row rank".into(),
        ));
    }
    Ok(())
}

/// Simultaneous-decoding region for a single combination matrix `B`
/// (full row rank over the specification's ring, at most 4 rows).
pub fn simultaneous_q(
    spec: &ChannelSpec,
    b: &IntMatrix,
    budget: &SearchBudget,
) -> Result<RegionReport, CfError> {
    budget.validate()?;
    let k = spec.users();
    if b.cols() != k {
        return Err(CfError::Shape(format!(
            "combination matrix has {} columns for {k} users",
            b.cols()
        )));
    }
    if b.rows() > k || b.rows() > 4 || k > 4 {
        return Err(CfError::Shape(
            "supported shapes: rows <= users <= 4".into(),
        ));
    }
    let rows = matrix_to_rows(b)?;
    let ctx = SpecContext::new(spec)?;
    check_full_row_rank(&rows, ctx.modulus)?;
    let ev = Evaluator::new(&ctx);
    let qa = assemble_q(&ev, &rows, budget, 0)?;
    Ok(RegionReport {
        region: RateRegion::new(k, qa.members),
        ledger: qa.records,
        b_truncated: false,
        c_truncated: qa.c_truncated,
    })
}

/// All sign-canonical nonzero integer rows of width `k` with entries bounded
/// by `b_max` (first nonzero entry positive), in lexicographic order.
fn canonical_rows(k: usize, b_max: i64) -> Vec<Vec<i64>> {
    let mut rows = Vec::new();
    let total = ((2 * b_max + 1) as usize).pow(k as u32);
    let mut v = vec![-b_max; k];
    for step in 0..total {
        if step > 0 {
            for t in (0..k).rev() {
                v[t] += 1;
                if v[t] <= b_max {
                    break;
                }
                v[t] = -b_max;
            }
        }
        if v.iter().find(|&&x| x != 0).map_or(false, |&x| x > 0) {
            rows.push(v.clone());
        }
    }
    rows
}

fn lattice_contains_rows(
    b: &[Vec<i64>],
    a: &[Vec<i64>],
    modulus: Option<i64>,
) -> Result<bool, CfError> {
    match modulus {
        Some(q) => {
            let rb = rank_rows(b, Some(q));
            let mut stacked: Vec<Vec<i64>> = b.to_vec();
            stacked.extend(a.iter().cloned());
            Ok(rank_rows(&stacked, Some(q)) == rb)
        }
        None => Ok(row_lattice_contains(
            &to_int_matrix(b),
            &to_int_matrix(a),
            Ring::Integers,
        )?),
    }
}

/// Deterministic parallel map: workers pull indices from a shared counter and
/// each runs `f` with its own scratch state; results land at their input
/// index, so the output order is scheduling-independent.
fn par_map<T: Send, S>(
    n: usize,
    make_state: impl Fn() -> S + Sync,
    f: impl Fn(&mut S, usize) -> T + Sync,
) -> Vec<T> {
    let workers = worker_count().min(n.max(1));
    if workers <= 1 {
        let mut state = make_state();
        return (0..n).map(|i| f(&mut state, i)).collect();
    }
    let next = AtomicUsize::new(0);
    let results: Vec<Mutex<Option<T>>> = (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut state = make_state();
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= n {
                        break;
                    }
                    let v = f(&mut state, i);
                    *results[i].lock().expect("result slot") = Some(v);
                }
            });
        }
    });
    results
        .into_iter()
        .map(|m| m.into_inner().expect("result lock").expect("result set"))
        .collect()
}

fn admissible_row_counts(
    spec: &ChannelSpec,
    a_rows: &[Vec<i64>],
    budget: &SearchBudget,
) -> (usize, usize) {
    let k = spec.users();
    let ra = rank_rows(a_rows, spec.modulus()).max(1);
    let (mut lo, mut hi) = (ra, k);
    if let Some((blo, bhi)) = budget.lb_range {
        lo = lo.max(blo);
        hi = hi.min(bhi);
    }
    (lo, hi)
}

/// Candidate combination matrices for the target `A`: row multisets of
/// sign-canonical rows (the region is invariant under row permutation and
/// per-row sign flips), full row rank over the ring, whose row lattice
/// contains that of `A`.
fn enumerate_b_candidates(
    spec: &ChannelSpec,
    a_rows: &[Vec<i64>],
    budget: &SearchBudget,
) -> Result<Vec<Vec<Vec<i64>>>, CfError> {
    let k = spec.users();
    let modulus = spec.modulus();
    let rows = canonical_rows(k, budget.b_max);
    let (lo, hi) = admissible_row_counts(spec, a_rows, budget);
    let mut out = Vec::new();
    for l in lo..=hi.min(k) {
        for combo in rows.iter().combinations(l) {
            let b: Vec<Vec<i64>> = combo.into_iter().cloned().collect();
            if rank_rows(&b, modulus) != l {
                continue;
            }
            if !lattice_contains_rows(&b, a_rows, modulus)? {
                continue;
            }
            out.push(b);
        }
    }
    Ok(out)
}

fn collect_report(
    k: usize,
    per_b: Vec<Option<Result<QAssembly, CfError>>>,
    b_truncated: bool,
) -> Result<RegionReport, CfError> {
    let mut members = Vec::new();
    let mut records = Vec::new();
    let mut c_truncated = false;
    for qa in per_b.into_iter().flatten() {
        let qa = qa?;
        members.extend(qa.members);
        records.extend(qa.records);
        c_truncated |= qa.c_truncated;
    }
    let region = RateRegion::new(k, members);
    // Keep only ledger entries that still back a bound in the region.
    let surviving: BTreeSet<u32> = region
        .polyhedra()
        .iter()
        .flat_map(|p| p.bounds().iter().filter_map(|bd| bd.source()))
        .collect();
    records.retain(|r| surviving.contains(&r.source_id));
    Ok(RegionReport {
        region,
        ledger: records,
        b_truncated,
        c_truncated,
    })
}

/// Simultaneous-decoding region for a target full-row-rank matrix `A`:
/// the union of [`simultaneous_q`] over all budgeted combination matrices
/// whose row lattice contains that of `A`. The union is always truncated
/// (the untruncated union is infinite), which can only shrink the region.
pub fn simultaneous_r(
    spec: &ChannelSpec,
    a: &IntMatrix,
    budget: &SearchBudget,
) -> Result<RegionReport, CfError> {
    budget.validate()?;
    let k = spec.users();
    if a.cols() != k {
        return Err(CfError::Shape(format!(
            "target matrix has {} columns for {k} users",
            a.cols()
        )));
    }
    if k > 4 {
        return Err(CfError::Shape("supported user counts: K <= 4".into()));
    }
    let a_rows = matrix_to_rows(a)?;
    let ctx = SpecContext::new(spec)?;
    check_full_row_rank(&a_rows, ctx.modulus)?;
    let candidates = enumerate_b_candidates(spec, &a_rows, budget)?;
    let per_b = par_map(
        candidates.len(),
        || Evaluator::new(&ctx),
        |ev, i| {
            let id_base = (i as u32) << 12;
            Some(assemble_q(ev, &candidates[i], budget, id_base))
        },
    );
    collect_report(k, per_b, true)
}

/// Sequential-decoding bounds for one ordered combination matrix `B`: for
/// each row `j` and each user `k` with a nonzero coefficient in that row,
/// `R_k <= H(U_k) + H_{B_[j-1]}(u|Y) - H_{B_[j]}(u|Y)`, where `B_[j]` stacks
/// the first `j` rows.
fn assemble_sequential(
    ev: &Evaluator,
    b: &[Vec<i64>],
    id_base: u32,
) -> (Polyhedron, Vec<BranchRecord>) {
    let k = ev.ctx.k;
    let mut bounds = Vec::new();
    let mut records = Vec::new();
    let mut prev = 0.0;
    let mut next_id = id_base;
    for (j, row) in b.iter().enumerate() {
        let cur = ev.cond_entropy(&b[..=j]);
        for (user, &coef) in row.iter().enumerate() {
            if coef == 0 {
                continue;
            }
            let rhs = ev.ctx.user_h[user] + prev - cur;
            records.push(BranchRecord {
                source_id: next_id,
                b: b.to_vec(),
                matroid: format!("sequential row {}", j + 1),
                t: vec![user],
                h_t_bits: ev.ctx.user_h[user],
                h_b_bits: cur,
                j_bits: prev,
                achieving_c: None,
                truncated: false,
            });
            if rhs.is_finite() {
                bounds.push(RateBound::new(&[user], rhs).with_source(next_id));
            }
            next_id += 1;
        }
        prev = cur;
    }
    (Polyhedron::new(k, bounds), records)
}

/// The rate box achieved by decoding the rows of `B` in their given order.
pub fn sequential_box(spec: &ChannelSpec, b: &IntMatrix) -> Result<Polyhedron, CfError> {
    let k = spec.users();
    if b.cols() != k {
        return Err(CfError::Shape(format!(
            "combination matrix has {} columns for {k} users",
            b.cols()
        )));
    }
    let rows = matrix_to_rows(b)?;
    let ctx = SpecContext::new(spec)?;
    check_full_row_rank(&rows, ctx.modulus)?;
    let ev = Evaluator::new(&ctx);
    Ok(assemble_sequential(&ev, &rows, 0).0)
}

/// Sequential-decoding region for a target `A`: the union of the per-order
/// rate boxes over all budgeted combination matrices (row order matters, so
/// row permutations are enumerated rather than deduplicated).
pub fn sequential_region(
    spec: &ChannelSpec,
    a: &IntMatrix,
    budget: &SearchBudget,
) -> Result<RegionReport, CfError> {
    budget.validate()?;
    let k = spec.users();
    if a.cols() != k {
        return Err(CfError::Shape(format!(
            "target matrix has {} columns for {k} users",
            a.cols()
        )));
    }
    let a_rows = matrix_to_rows(a)?;
    let ctx = SpecContext::new(spec)?;
    check_full_row_rank(&a_rows, ctx.modulus)?;
    let unordered = enumerate_b_candidates(spec, &a_rows, budget)?;
    let mut ordered: Vec<Vec<Vec<i64>>> = Vec::new();
    for b in unordered {
        let l = b.len();
        for perm in b.into_iter().permutations(l) {
            ordered.push(perm);
        }
    }
    let per_b = par_map(
        ordered.len(),
        || Evaluator::new(&ctx),
        |ev, i| {
            let (poly, records) = assemble_sequential(ev, &ordered[i], (i as u32) << 12);
            Some(Ok(QAssembly {
                members: vec![poly],
                records,
                c_truncated: false,
            }))
        },
    );
    collect_report(k, per_b, true)
}

// ---------------------------------------------------------------------------
// Two-user special cases
// ---------------------------------------------------------------------------

fn require_two_users(spec: &ChannelSpec) -> Result<(), CfError> {
    if spec.users() != 2 {
        return Err(CfError::Shape("operation requires exactly 2 users".into()));
    }
    Ok(())
}

/// Classic two-user multiple-access pentagon: per-user and sum-rate mutual
/// information bounds.
pub fn mac_region(spec: &ChannelSpec) -> Result<RateRegion, CfError> {
    require_two_users(spec)?;
    let ctx = SpecContext::new(spec)?;
    let ev = Evaluator::new(&ctx);
    let h_full = ev.cond_entropy(&[vec![1, 0], vec![0, 1]]);
    let h_u2 = ev.cond_entropy(&[vec![0, 1]]);
    let h_u1 = ev.cond_entropy(&[vec![1, 0]]);
    let bounds = vec![
        RateBound::new(&[0], ctx.user_h[0] - h_full + h_u2),
        RateBound::new(&[1], ctx.user_h[1] - h_full + h_u1),
        RateBound::new(&[0, 1], ctx.user_h[0] + ctx.user_h[1] - h_full),
    ];
    Ok(RateRegion::new(2, vec![Polyhedron::new(2, bounds)]))
}

/// Two-user region achievable with two independent linear combinations under
/// nested linear codes: the MAC pentagon cut by the best both-nonzero
/// recombination, `min(R_1 - H(U_1), R_2 - H(U_2)) <= J* - H(u|Y)`.
pub fn lmac_region(spec: &ChannelSpec) -> Result<RateRegion, CfError> {
    require_two_users(spec)?;
    let mac = mac_region(spec)?;
    let ctx = SpecContext::new(spec)?;
    let ev = Evaluator::new(&ctx);
    let h_full = ev.cond_entropy(&[vec![1, 0], vec![0, 1]]);
    let m = Matroid::uniform(2, 1)?;
    let jres = j_search(&ev, &[vec![1, 0], vec![0, 1]], &m, &SearchBudget::default(), None);
    let notch = RateRegion::new(
        2,
        vec![
            Polyhedron::new(2, vec![RateBound::new(&[0], ctx.user_h[0] - h_full + jres.bits)]),
            Polyhedron::new(2, vec![RateBound::new(&[1], ctx.user_h[1] - h_full + jres.bits)]),
        ],
    );
    Ok(intersect(&mac, &notch)?)
}

/// Witness for the strict inclusion of the two-user linear region in the MAC
/// region: a recombination `c` with both entries nonzero satisfying
/// `2 H_c(u|Y) < H(u|Y)` (strictly, with a 1e-12 margin), if one exists
/// within the default search budget.
pub fn notch_condition(spec: &ChannelSpec) -> Result<Option<Vec<i64>>, CfError> {
    require_two_users(spec)?;
    let ctx = SpecContext::new(spec)?;
    let ev = Evaluator::new(&ctx);
    let h_full = ev.cond_entropy(&[vec![1, 0], vec![0, 1]]);
    let m = Matroid::uniform(2, 1)?;
    let jres = j_search(&ev, &[vec![1, 0], vec![0, 1]], &m, &SearchBudget::default(), None);
    if 2.0 * jres.bits < h_full - 1e-12 {
        Ok(jres.achieving.map(|c| c[0].clone()))
    } else {
        Ok(None)
    }
}

/// Two-user region when the receiver targets the single equation `a^T u`
/// (both coefficients nonzero): either the linear-MAC region, or — when the
/// equation's conditional entropy is small enough that its rate rectangle
/// pokes outside the MAC dominant face — the union of the MAC region and
/// that rectangle.
pub fn single_equation_region(spec: &ChannelSpec, a: &IntMatrix) -> Result<RateRegion, CfError> {
    require_two_users(spec)?;
    if a.rows() != 1 || a.cols() != 2 {
        return Err(CfError::Shape("expected a 1x2 coefficient matrix".into()));
    }
    let arows = matrix_to_rows(a)?;
    if arows[0].iter().any(|&x| x == 0) {
        return Err(CfError::Shape(
            "single-equation coefficients must both be nonzero".into(),
        ));
    }
    let ctx = SpecContext::new(spec)?;
    let ev = Evaluator::new(&ctx);
    let h_full = ev.cond_entropy(&[vec![1, 0], vec![0, 1]]);
    let h_a = ev.cond_entropy(&arows);
    if 2.0 * h_a < h_full - 1e-12 {
        let mac = mac_region(spec)?;
        let q_a = simultaneous_q(spec, a, &SearchBudget::default())?;
        Ok(union(&mac, &q_a.region)?)
    } else {
        lmac_region(spec)
    }
}

/// Classical two-user Gaussian compute–forward rate for decoding `a^T u`
/// under symmetric power `P`: `(1/2) log2( P g^2 / (a (P^{-1} I + h^T h)^{-1} a^T) )`
/// with `g = gcd(|a_1|, |a_2|)`, in bits. May be negative for poor equations.
pub fn naga11_rate(p: f64, h: &[f64], a: &[i64]) -> f64 {
    assert_eq!(h.len(), 2, "two-user closed form");
    assert_eq!(a.len(), 2, "two-user closed form");
    assert!(p > 0.0, "power must be positive");
    assert!(a.iter().any(|&x| x != 0), "equation must be nonzero");
    let m = [
        [1.0 / p + h[0] * h[0], h[0] * h[1]],
        [h[0] * h[1], 1.0 / p + h[1] * h[1]],
    ];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ];
    let af = [a[0] as f64, a[1] as f64];
    let quad = af[0] * af[0] * inv[0][0] + 2.0 * af[0] * af[1] * inv[0][1] + af[1] * af[1] * inv[1][1];
    let g = gcd64(a[0], a[1]) as f64;
    0.5 * (p * g * g / quad).log2()
}

// ---------------------------------------------------------------------------
// Finite-field embedding of integer specs
// ---------------------------------------------------------------------------

/// An integer spec pushed through centered modulo-q reduction, with the data
/// needed to decide which coefficient matrices have exactly preserved
/// entropies.
#[derive(Clone, Debug)]
pub struct FqEmbedding {
    pub spec: ChannelSpec,
    pub q: i64,
    /// Largest absolute source symbol of the original integer spec.
    pub tau: i64,
}

impl FqEmbedding {
    /// Entropy preservation threshold for a coefficient matrix: exact
    /// agreement is guaranteed when `q` exceeds `(2 tau + 1) * |B|_inf`
    /// (operator infinity norm: maximal absolute row sum).
    pub fn entropy_threshold(&self, b: &IntMatrix) -> i64 {
        let norm = b.op_norm_inf().to_i64().unwrap_or(i64::MAX);
        (2 * self.tau + 1) * norm
    }

    /// Whether entropies under `b` are exactly preserved by this embedding.
    pub fn preserves(&self, b: &IntMatrix) -> bool {
        self.q > self.entropy_threshold(b)
    }
}

/// Embeds a finitely supported integer spec into F_q by centered modulo-q
/// reduction of its source symbols. Rejects non-prime or even `q` and
/// symbol collisions under the reduction (which occur only far below any
/// preservation threshold).
pub fn fq_embed(spec: &ChannelSpec, q: i64) -> Result<FqEmbedding, CfError> {
    let ChannelSpec::IntegerLattice {
        sources,
        modulation,
        channel,
    } = spec
    else {
        return Err(CfError::Shape(
            "only integer-lattice specs can be embedded".into(),
        ));
    };
    if q == 2 || !is_small_prime(q) {
        return Err(CfError::BadModulus { q });
    }
    let tau = sources
        .iter()
        .flat_map(|s| s.support.iter())
        .map(|&v| v.abs())
        .max()
        .unwrap_or(0);
    let mut new_sources = Vec::with_capacity(sources.len());
    for (u, s) in sources.iter().enumerate() {
        let mapped: Vec<i64> = s.support.iter().map(|&v| mod_q_centered(v, q)).collect();
        let mut dedup = mapped.clone();
        dedup.sort_unstable();
        dedup.dedup();
        if dedup.len() != mapped.len() {
            return Err(CfError::Spec(format!(
                "user {u} support collides under centered modulo-{q} reduction"
            )));
        }
        new_sources.push(UserPmf {
            support: mapped,
            probs: s.probs.clone(),
        });
    }
    let embedded = ChannelSpec::finite_field(q, new_sources, modulation.clone(), channel.clone())?;
    Ok(FqEmbedding {
        spec: embedded,
        q,
        tau,
    })
}
