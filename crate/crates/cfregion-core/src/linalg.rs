//! Exact integer linear algebra: arbitrary-precision matrices, Smith and
//! Hermite normal forms, integer kernels, row-lattice membership, and
//! successive minima certified by bounded enumeration.
//!
//! Everything here is exact. Matrix entries are `BigInt`, minima are
//! `BigRational`, and the normal-form routines carry unimodular transform
//! pairs so callers can extract lattice bases, right inverses, and integer
//! solutions without ever rounding.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use thiserror::Error;

/// Coefficient ring for rank, membership, and representability questions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ring {
    /// Rational independence / integer-lattice membership.
    Integers,
    /// Arithmetic modulo a prime `q`.
    PrimeField(i64),
}

impl Ring {
    /// Rejects composite or out-of-range moduli. `Integers` always passes.
    pub fn validate(self) -> Result<(), LinAlgError> {
        match self {
            Ring::Integers => Ok(()),
            Ring::PrimeField(q) => {
                if q >= 2 && is_small_prime(q) {
                    Ok(())
                } else {
                    Err(LinAlgError::CompositeModulus { q })
                }
            }
        }
    }
}

/// Norm used when ordering lattice vectors for successive minima.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    /// Sup norm; minima are reported directly.
    Infinity,
    /// Euclidean norm; minima are reported **squared** so they stay rational.
    Euclidean,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinAlgError {
    #[error("operation requires a square matrix, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    ShapeMismatch(String),
    #[error("modulus {q} is not prime")]
    CompositeModulus { q: i64 },
    #[error("enumeration radius {radius} is inconclusive; coefficients up to {needed} may be required")]
    InconclusiveEnumeration { radius: i64, needed: i64 },
    #[error("enumeration radius {radius} found only {found} of {rank} independent lattice vectors")]
    RadiusTooSmall { radius: i64, found: usize, rank: usize },
    #[error("matrix entry does not fit in i64")]
    EntryOverflow,
}

/// Dense integer matrix with arbitrary-precision entries, row-major storage.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix({}x{}) {}", self.rows, self.cols, self)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self, LinAlgError> {
        if data.len() != rows * cols {
            return Err(LinAlgError::ShapeMismatch(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn from_rows_i64(rows: &[Vec<i64>]) -> Result<Self, LinAlgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinAlgError::ShapeMismatch(
                "ragged rows in matrix literal".into(),
            ));
        }
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&x| BigInt::from(x)))
            .collect();
        IntMatrix::new(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Largest absolute entry.
    pub fn max_abs_entry(&self) -> BigInt {
        self.data
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    /// Operator sup norm: the maximum absolute row sum.
    pub fn op_norm_inf(&self) -> BigInt {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<BigInt>())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].clone();
            }
        }
        out
    }

    pub fn matmul(&self, other: &IntMatrix) -> Result<IntMatrix, LinAlgError> {
        if self.cols != other.rows {
            return Err(LinAlgError::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.data[k * other.cols + j];
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn select_rows(&self, idx: &[usize]) -> IntMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        IntMatrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (jj, &j) in idx.iter().enumerate() {
                out.data[i * idx.len() + jj] = self.data[i * self.cols + j].clone();
            }
        }
        out
    }

    pub fn vstack(&self, other: &IntMatrix) -> Result<IntMatrix, LinAlgError> {
        if self.cols != other.cols && self.rows != 0 && other.rows != 0 {
            return Err(LinAlgError::ShapeMismatch(
                "vstack requires equal column counts".into(),
            ));
        }
        let cols = if self.rows == 0 { other.cols } else { self.cols };
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        IntMatrix::new(self.rows + other.rows, cols, data)
    }

    pub fn to_rows_i64(&self) -> Result<Vec<Vec<i64>>, LinAlgError> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|x| x.to_i64().ok_or(LinAlgError::EntryOverflow))
                    .collect()
            })
            .collect()
    }

    /// Determinant by the Bareiss fraction-free algorithm. The 0x0 matrix has
    /// determinant 1.
    pub fn determinant(&self) -> Result<BigInt, LinAlgError> {
        if self.rows != self.cols {
            return Err(LinAlgError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = num / &prev;
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        Ok(&a[n - 1][n - 1] * sign)
    }

    /// Rank over the rationals (fraction-free elimination with row gcd
    /// normalisation to keep entries small).
    pub fn rank(&self) -> usize {
        let mut a: Vec<Vec<BigInt>> = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        let mut r = 0usize;
        for col in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !a[i][col].is_zero()) else {
                continue;
            };
            a.swap(r, p);
            for i in r + 1..self.rows {
                if a[i][col].is_zero() {
                    continue;
                }
                for j in col + 1..self.cols {
                    let num = &a[i][j] * &a[r][col] - &a[i][col] * &a[r][j];
                    a[i][j] = num;
                }
                a[i][col] = BigInt::zero();
                let g = a[i]
                    .iter()
                    .fold(BigInt::zero(), |acc, x| acc.gcd(x));
                if g > BigInt::one() {
                    for x in a[i].iter_mut() {
                        *x = &*x / &g;
                    }
                }
            }
            r += 1;
        }
        r
    }

    /// Rank over the prime field `F_q`.
    pub fn rank_mod_q(&self, q: i64) -> Result<usize, LinAlgError> {
        Ring::PrimeField(q).validate()?;
        let mut a: Vec<Vec<i64>> = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|x| {
                        let m = x.mod_floor(&BigInt::from(q));
                        m.to_i64().expect("residue fits in i64")
                    })
                    .collect()
            })
            .collect();
        Ok(rank_mod_q_i64(&mut a, q))
    }
}

/// Primality by trial division; intended for small moduli.
pub fn is_small_prime(q: i64) -> bool {
    if q < 2 {
        return false;
    }
    if q % 2 == 0 {
        return q == 2;
    }
    let mut d = 3i64;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// In-place row reduction of an i64 matrix mod prime q; returns the rank.
pub(crate) fn rank_mod_q_i64(a: &mut [Vec<i64>], q: i64) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut r = 0usize;
    for col in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| a[i][col].rem_euclid(q) != 0) else {
            continue;
        };
        a.swap(r, p);
        let inv = mod_inverse(a[r][col].rem_euclid(q), q);
        for j in col..cols {
            a[r][j] = (a[r][j].rem_euclid(q) * inv).rem_euclid(q);
        }
        for i in 0..rows {
            if i != r && a[i][col].rem_euclid(q) != 0 {
                let f = a[i][col].rem_euclid(q);
                for j in col..cols {
                    a[i][j] = (a[i][j].rem_euclid(q) - f * a[r][j]).rem_euclid(q);
                }
            }
        }
        r += 1;
    }
    r
}

/// Modular inverse of `a` mod prime `q` (a not divisible by q).
pub(crate) fn mod_inverse(a: i64, q: i64) -> i64 {
    // extended Euclid
    let (mut old_r, mut r) = (a.rem_euclid(q), q);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let quot = old_r / r;
        let tmp_r = old_r - quot * r;
        old_r = r;
        r = tmp_r;
        let tmp_s = old_s - quot * s;
        old_s = s;
        s = tmp_s;
    }
    old_s.rem_euclid(q)
}

// ---------------------------------------------------------------------------
// Smith normal form
// ---------------------------------------------------------------------------

/// Rank-revealing Smith decomposition `Q = S * diag(sigma) * T` with
/// `S` (m x r) left-invertible over the integers, `sigma` the positive
/// elementary divisors in divisibility order, and `T` (r x n)
/// right-invertible over the integers.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub s: IntMatrix,
    pub sigma: Vec<BigInt>,
    pub t: IntMatrix,
    pub rank: usize,
}

/// Full transform data: `u * Q * v = diag(sigma)` with `u, v` unimodular and
/// `u_inv = u^{-1}`, `v_inv = v^{-1}`.
#[derive(Clone, Debug)]
pub(crate) struct SmithDecomp {
    pub sigma: Vec<BigInt>,
    pub rank: usize,
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

fn row_add(m: &mut Vec<Vec<BigInt>>, i: usize, j: usize, k: &BigInt) {
    if k.is_zero() {
        return;
    }
    let rj = m[j].clone();
    for (a, b) in m[i].iter_mut().zip(rj.iter()) {
        *a += k * b;
    }
}

fn col_add(m: &mut Vec<Vec<BigInt>>, j: usize, i: usize, k: &BigInt) {
    if k.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        let add = k * &row[i];
        row[j] += add;
    }
}

fn col_swap(m: &mut Vec<Vec<BigInt>>, i: usize, j: usize) {
    for row in m.iter_mut() {
        row.swap(i, j);
    }
}

fn row_neg(m: &mut Vec<Vec<BigInt>>, i: usize) {
    for x in m[i].iter_mut() {
        *x = -std::mem::take(x);
    }
}

fn col_neg(m: &mut Vec<Vec<BigInt>>, j: usize) {
    for row in m.iter_mut() {
        row[j] = -std::mem::take(&mut row[j]);
    }
}

fn to_matrix(v: Vec<Vec<BigInt>>, cols: usize) -> IntMatrix {
    let rows = v.len();
    let data: Vec<BigInt> = v.into_iter().flatten().collect();
    IntMatrix::new(rows, cols, data).expect("internal matrix shape")
}

pub(crate) fn smith_decompose(q: &IntMatrix) -> SmithDecomp {
    let m = q.rows();
    let n = q.cols();
    let mut d: Vec<Vec<BigInt>> = (0..m).map(|i| q.row(i).to_vec()).collect();
    let mut u: Vec<Vec<BigInt>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut u_inv = u.clone();
    let mut v: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut v_inv = v.clone();

    // Row op row_i += k*row_j on D; mirrored on U, inverted on u_inv columns.
    macro_rules! rop_add {
        ($i:expr, $j:expr, $k:expr) => {{
            let k = $k;
            row_add(&mut d, $i, $j, &k);
            row_add(&mut u, $i, $j, &k);
            col_add(&mut u_inv, $j, $i, &(-k));
        }};
    }
    macro_rules! rop_swap {
        ($i:expr, $j:expr) => {{
            d.swap($i, $j);
            u.swap($i, $j);
            col_swap(&mut u_inv, $i, $j);
        }};
    }
    macro_rules! rop_neg {
        ($i:expr) => {{
            row_neg(&mut d, $i);
            row_neg(&mut u, $i);
            col_neg(&mut u_inv, $i);
        }};
    }
    macro_rules! cop_add {
        ($j:expr, $i:expr, $k:expr) => {{
            let k = $k;
            col_add(&mut d, $j, $i, &k);
            col_add(&mut v, $j, $i, &k);
            row_add(&mut v_inv, $i, $j, &(-k));
        }};
    }
    macro_rules! cop_swap {
        ($i:expr, $j:expr) => {{
            col_swap(&mut d, $i, $j);
            col_swap(&mut v, $i, $j);
            v_inv.swap($i, $j);
        }};
    }

    let mut t = 0usize;
    'outer: while t < m.min(n) {
        // Move the smallest-magnitude nonzero entry of the trailing block to
        // the pivot seat; if the block is zero we are done.
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if !d[i][j].is_zero()
                    && best
                        .map(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs())
                        .unwrap_or(true)
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else {
            break 'outer;
        };
        if pi != t {
            rop_swap!(t, pi);
        }
        if pj != t {
            cop_swap!(t, pj);
        }

        'reduce: loop {
            // Clear the pivot column with row operations. Truncated division
            // leaves remainders strictly smaller than the pivot, so swapping a
            // nonzero remainder into the pivot seat makes strict progress.
            for i in t + 1..m {
                if d[i][t].is_zero() {
                    continue;
                }
                let quot = &d[i][t] / &d[t][t];
                rop_add!(i, t, -quot);
                if !d[i][t].is_zero() {
                    rop_swap!(i, t);
                    continue 'reduce;
                }
            }
            // Clear the pivot row with column operations; the pivot column
            // below stays zero because those rows are zero in column t.
            for j in t + 1..n {
                if d[t][j].is_zero() {
                    continue;
                }
                let quot = &d[t][j] / &d[t][t];
                cop_add!(j, t, -quot);
                if !d[t][j].is_zero() {
                    cop_swap!(j, t);
                    continue 'reduce;
                }
            }
            // Enforce divisibility of the trailing block by the pivot: fold an
            // offending row into the pivot row and reduce again.
            let pivot = d[t][t].clone();
            for i in t + 1..m {
                if let Some(_) = (t + 1..n).find(|&j| !(&d[i][j] % &pivot).is_zero()) {
                    rop_add!(t, i, BigInt::one());
                    continue 'reduce;
                }
            }
            break 'reduce;
        }
        if d[t][t].is_negative() {
            rop_neg!(t);
        }
        t += 1;
    }

    let rank = t;
    let sigma: Vec<BigInt> = (0..rank).map(|i| d[i][i].clone()).collect();
    SmithDecomp {
        sigma,
        rank,
        u: to_matrix(u, m),
        u_inv: to_matrix(u_inv, m),
        v: to_matrix(v, n),
        v_inv: to_matrix(v_inv, n),
    }
}

/// Smith normal form `Q = S * diag(sigma) * T`.
pub fn smith_normal_form(q: &IntMatrix) -> SmithForm {
    let dec = smith_decompose(q);
    let r = dec.rank;
    let s = dec.u_inv.select_cols(&(0..r).collect::<Vec<_>>());
    let t = dec.v_inv.select_rows(&(0..r).collect::<Vec<_>>());
    SmithForm {
        s,
        sigma: dec.sigma,
        t,
        rank: r,
    }
}

/// True iff `Q` is square with determinant +-1. Non-square input is an error.
pub fn is_unimodular(q: &IntMatrix) -> Result<bool, LinAlgError> {
    if q.rows() != q.cols() {
        return Err(LinAlgError::NonSquare {
            rows: q.rows(),
            cols: q.cols(),
        });
    }
    Ok(q.determinant()?.abs().is_one())
}

/// Exact integer right inverse `R` with `Q R = I`, when one exists. A right
/// inverse exists iff `Q` has full row rank and all elementary divisors are 1
/// (equivalently the maximal minors are coprime). Returns `None` otherwise;
/// matrices with more rows than columns never qualify.
pub fn right_inverse(q: &IntMatrix) -> Option<IntMatrix> {
    let m = q.rows();
    if m == 0 {
        return Some(IntMatrix::zeros(q.cols(), 0));
    }
    if m > q.cols() {
        return None;
    }
    let dec = smith_decompose(q);
    if dec.rank != m || dec.sigma.iter().any(|s| !s.is_one()) {
        return None;
    }
    let v_left = dec.v.select_cols(&(0..m).collect::<Vec<_>>());
    Some(v_left.matmul(&dec.u).expect("shape"))
}

/// Basis for the integer kernel `{v : Q v = 0}` as columns of an
/// n x (n - rank) matrix, Hermite-reduced for a canonical answer. The basis
/// generates the kernel lattice exactly (saturated by construction). A
/// full-column-rank `Q` yields an n x 0 matrix.
pub fn orthogonal_lattice_basis(q: &IntMatrix) -> IntMatrix {
    let n = q.cols();
    let dec = smith_decompose(q);
    let idx: Vec<usize> = (dec.rank..n).collect();
    if idx.is_empty() {
        return IntMatrix::zeros(n, 0);
    }
    let cols = dec.v.select_cols(&idx);
    // Canonicalise: Hermite-reduce the transposed generator set, then put the
    // basis back in columns.
    let h = hermite_normal_form(&cols.transpose());
    h.transpose()
}

/// Row-style Hermite normal form: returns an r x n matrix whose rows span the
/// same integer row lattice, in echelon shape with positive pivots and the
/// entries above each pivot reduced into `[0, pivot)`. Zero rows are dropped.
pub fn hermite_normal_form(a: &IntMatrix) -> IntMatrix {
    let m = a.rows();
    let n = a.cols();
    let mut rows: Vec<Vec<BigInt>> = (0..m).map(|i| a.row(i).to_vec()).collect();
    let mut r = 0usize;
    for col in 0..n {
        if r == m {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in r..m {
                if !rows[i][col].is_zero()
                    && best
                        .map(|b| rows[i][col].abs() < rows[b][col].abs())
                        .unwrap_or(true)
                {
                    best = Some(i);
                }
            }
            let Some(p) = best else {
                break;
            };
            rows.swap(r, p);
            let mut dirty = false;
            let pivot = rows[r][col].clone();
            for i in r + 1..m {
                if rows[i][col].is_zero() {
                    continue;
                }
                let quot = &rows[i][col] / &pivot;
                row_add(&mut rows, i, r, &-quot);
                if !rows[i][col].is_zero() {
                    dirty = true;
                }
            }
            if !dirty {
                if rows[r][col].is_negative() {
                    row_neg(&mut rows, r);
                }
                // Reduce entries above the pivot into [0, pivot).
                let pivot = rows[r][col].clone();
                for i in 0..r {
                    let quot = rows[i][col].div_floor(&pivot);
                    row_add(&mut rows, i, r, &-quot);
                }
                r += 1;
                break;
            }
        }
    }
    let data: Vec<BigInt> = rows.into_iter().take(r).flatten().collect();
    IntMatrix::new(r, n, data).expect("hermite shape")
}

/// True iff every row of `A` lies in the row lattice (integers) or the row
/// space (prime field) generated by the rows of `B`.
pub fn row_lattice_contains(b: &IntMatrix, a: &IntMatrix, ring: Ring) -> Result<bool, LinAlgError> {
    ring.validate()?;
    if b.cols() != a.cols() {
        return Err(LinAlgError::ShapeMismatch(
            "row-lattice comparison requires equal column counts".into(),
        ));
    }
    match ring {
        Ring::Integers => {
            let h = hermite_normal_form(b);
            // Locate each pivot column of the echelon basis.
            let pivots: Vec<usize> = (0..h.rows())
                .map(|i| (0..h.cols()).find(|&j| !h.get(i, j).is_zero()).expect("pivot"))
                .collect();
            for i in 0..a.rows() {
                let mut v: Vec<BigInt> = a.row(i).to_vec();
                for (ri, &pc) in pivots.iter().enumerate() {
                    if v[pc].is_zero() {
                        continue;
                    }
                    let (quot, rem) = v[pc].div_rem(h.get(ri, pc));
                    if !rem.is_zero() {
                        return Ok(false);
                    }
                    for j in 0..h.cols() {
                        let sub = &quot * h.get(ri, j);
                        v[j] -= sub;
                    }
                }
                if v.iter().any(|x| !x.is_zero()) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Ring::PrimeField(q) => {
            let rb = b.rank_mod_q(q)?;
            let stacked = b.vstack(a)?;
            Ok(stacked.rank_mod_q(q)? == rb)
        }
    }
}

/// Integer solutions of `x^T B = a^T`: returns one solution if any exists,
/// i.e. a witness that `a` lies in the row lattice of `B`.
pub fn solve_left(b: &IntMatrix, a: &[BigInt]) -> Option<Vec<BigInt>> {
    let dec = smith_decompose(b);
    let n = b.cols();
    assert_eq!(a.len(), n, "solve_left dimension");
    // z = a^T V ; need y_j sigma_j = z_j for j < r, z_j = 0 beyond.
    let mut z = vec![BigInt::zero(); n];
    for j in 0..n {
        for i in 0..n {
            z[j] += &a[i] * dec.v.get(i, j);
        }
    }
    let r = dec.rank;
    for j in r..n {
        if !z[j].is_zero() {
            return None;
        }
    }
    let mut y = vec![BigInt::zero(); b.rows()];
    for j in 0..r {
        let (quot, rem) = z[j].div_rem(&dec.sigma[j]);
        if !rem.is_zero() {
            return None;
        }
        y[j] = quot;
    }
    // x^T = y^T U
    let m = b.rows();
    let mut x = vec![BigInt::zero(); m];
    for j in 0..m {
        for i in 0..m {
            x[j] += &y[i] * dec.u.get(i, j);
        }
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// Successive minima
// ---------------------------------------------------------------------------

pub(crate) fn rational_inverse(m: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, p);
        inv.swap(col, p);
        let pivot = a[col][col].clone();
        for j in 0..n {
            a[col][j] /= pivot.clone();
            inv[col][j] /= pivot.clone();
        }
        for i in 0..n {
            if i != col && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..n {
                    let s = &f * &a[col][j];
                    a[i][j] -= s;
                    let s = &f * &inv[col][j];
                    inv[i][j] -= s;
                }
            }
        }
    }
    Some(inv)
}

/// Successive minima of the lattice generated by the columns of `Q`, by
/// exhaustive enumeration of coefficient vectors with sup norm at most
/// `radius`, with an exact certificate that the radius was large enough.
///
/// Returns one value per lattice dimension: the sup-norm minima directly, or
/// the euclidean minima **squared** (so the result stays rational and the
/// certificate stays exact). If the radius cannot be certified the call fails
/// with [`LinAlgError::InconclusiveEnumeration`]; growing the radius resolves
/// it. When the columns of `Q` are dependent the enumeration runs over a
/// canonical (Hermite) basis of the column lattice instead, with the same
/// radius.
pub fn successive_minima(
    q: &IntMatrix,
    norm: Norm,
    radius: i64,
) -> Result<Vec<BigRational>, LinAlgError> {
    if radius < 1 {
        return Err(LinAlgError::InconclusiveEnumeration { radius, needed: 1 });
    }
    let rank = q.rank();
    if rank == 0 {
        return Ok(Vec::new());
    }
    // Reduce to a full-column-rank generator matrix.
    let basis: IntMatrix = if rank == q.cols() {
        q.clone()
    } else {
        hermite_normal_form(&q.transpose()).transpose()
    };
    let n = basis.rows();
    let d = basis.cols();

    let value_of = |v: &[BigInt]| -> BigRational {
        match norm {
            Norm::Infinity => {
                let m = v.iter().map(|x| x.abs()).max().unwrap_or_else(BigInt::zero);
                BigRational::from_integer(m)
            }
            Norm::Euclidean => {
                let s: BigInt = v.iter().map(|x| x * x).sum();
                BigRational::from_integer(s)
            }
        }
    };

    // Enumerate coefficient vectors (skipping negations) and sort by value.
    let mut candidates: Vec<(BigRational, Vec<i64>, Vec<BigInt>)> = Vec::new();
    let mut c = vec![-radius; d];
    'enumerate: loop {
        if c.iter().any(|&x| x != 0) {
            // One representative per +-c pair: first nonzero coefficient > 0.
            let first = c.iter().find(|&&x| x != 0).copied().unwrap();
            if first > 0 {
                let mut v = vec![BigInt::zero(); n];
                for (j, &cj) in c.iter().enumerate() {
                    if cj != 0 {
                        let cj = BigInt::from(cj);
                        for i in 0..n {
                            v[i] += basis.get(i, j) * &cj;
                        }
                    }
                }
                if v.iter().any(|x| !x.is_zero()) {
                    candidates.push((value_of(&v), c.clone(), v));
                }
            }
        }
        for j in 0..d {
            if c[j] < radius {
                c[j] += 1;
                continue 'enumerate;
            }
            c[j] = -radius;
        }
        break;
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    // Greedy independent selection in value order.
    let mut chosen_vectors: Vec<Vec<BigInt>> = Vec::new();
    let mut minima: Vec<BigRational> = Vec::new();
    for (val, _, v) in &candidates {
        if chosen_vectors.len() == d {
            break;
        }
        let mut stack = chosen_vectors.clone();
        stack.push(v.clone());
        let mat = IntMatrix::new(
            stack.len(),
            n,
            stack.iter().flat_map(|r| r.iter().cloned()).collect(),
        )
        .expect("stack shape");
        if mat.rank() == stack.len() {
            chosen_vectors.push(v.clone());
            minima.push(val.clone());
        }
    }
    if minima.len() < d {
        return Err(LinAlgError::RadiusTooSmall {
            radius,
            found: minima.len(),
            rank: d,
        });
    }

    // Certificate: every lattice vector with value <= lambda_d has bounded
    // coefficients. c = P v with P the exact pseudo-inverse, so
    // |c_i| <= rowbound_i(P) * ||v||. All comparisons exact in rationals.
    let to_rat = |x: &BigInt| BigRational::from_integer(x.clone());
    let bt: Vec<Vec<BigRational>> = (0..d)
        .map(|j| (0..n).map(|i| to_rat(basis.get(i, j))).collect())
        .collect();
    // Gram matrix B^T B (d x d) and its inverse.
    let mut gram = vec![vec![BigRational::zero(); d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut s = BigRational::zero();
            for k in 0..n {
                s += &bt[i][k] * &bt[j][k];
            }
            gram[i][j] = s;
        }
    }
    let gram_inv = rational_inverse(&gram).expect("full-column-rank gram is invertible");
    // P = gram_inv * B^T, rows indexed by coefficient.
    let lambda_last = minima.last().cloned().expect("nonempty minima");
    let radius_rat = BigRational::from_integer(BigInt::from(radius));
    for i in 0..d {
        let p_row: Vec<BigRational> = (0..n)
            .map(|k| {
                let mut s = BigRational::zero();
                for j in 0..d {
                    s += &gram_inv[i][j] * &bt[j][k];
                }
                s
            })
            .collect();
        let certified = match norm {
            Norm::Infinity => {
                let rowsum: BigRational = p_row.iter().map(|x| x.abs()).sum();
                rowsum * &lambda_last <= radius_rat
            }
            Norm::Euclidean => {
                let rownorm_sq: BigRational = p_row.iter().map(|x| x * x).sum();
                // lambda_last already stores the squared minimum.
                rownorm_sq * &lambda_last <= &radius_rat * &radius_rat
            }
        };
        if !certified {
            return Err(LinAlgError::InconclusiveEnumeration {
                radius,
                needed: radius.saturating_mul(2),
            });
        }
    }
    Ok(minima)
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows_i64(rows).unwrap()
    }

    /// Independent oracle: the product sigma_1..sigma_i equals the gcd of all
    /// i x i minors, so sigma_i = d_i / d_{i-1}.
    fn sigma_by_minor_gcd(a: &IntMatrix) -> Vec<BigInt> {
        let mut out = Vec::new();
        let mut prev = BigInt::one();
        for k in 1..=a.rows().min(a.cols()) {
            let mut g = BigInt::zero();
            for ri in (0..a.rows()).combinations(k) {
                for ci in (0..a.cols()).combinations(k) {
                    let sub = a.select_rows(&ri).select_cols(&ci);
                    g = g.gcd(&sub.determinant().unwrap());
                }
            }
            if g.is_zero() {
                break;
            }
            out.push(&g / &prev);
            prev = g;
        }
        out
    }

    fn random_matrix(rng: &mut ChaCha8Rng) -> IntMatrix {
        let r = rng.gen_range(1..=5);
        let c = rng.gen_range(1..=5);
        let rows: Vec<Vec<i64>> = (0..r)
            .map(|_| (0..c).map(|_| rng.gen_range(-9..=9)).collect())
            .collect();
        m(&rows)
    }

    fn check_smith(a: &IntMatrix) {
        let sf = smith_normal_form(a);
        // Reconstruction: S * diag(sigma) * T == A.
        let mut mid = IntMatrix::zeros(sf.rank, sf.rank);
        for i in 0..sf.rank {
            mid.set(i, i, sf.sigma[i].clone());
        }
        let recon = sf.s.matmul(&mid).unwrap().matmul(&sf.t).unwrap();
        let recon = if sf.rank == 0 {
            IntMatrix::zeros(a.rows(), a.cols())
        } else {
            recon
        };
        assert_eq!(recon, *a, "S Sigma T must reconstruct the input");
        // Divisibility chain and positivity.
        for w in sf.sigma.windows(2) {
            assert!((&w[1] % &w[0]).is_zero(), "divisibility chain");
        }
        assert!(sf.sigma.iter().all(|s| s.is_positive()));
        // Rank agreement and oracle agreement.
        assert_eq!(sf.rank, a.rank());
        assert_eq!(sf.sigma, sigma_by_minor_gcd(a));
        // S has a left inverse, T has a right inverse (unimodular factors).
        let dec = smith_decompose(a);
        assert!(is_unimodular(&dec.u).unwrap());
        assert!(is_unimodular(&dec.v).unwrap());
        assert_eq!(
            dec.u.matmul(&dec.u_inv).unwrap(),
            IntMatrix::identity(a.rows())
        );
        assert_eq!(
            dec.v.matmul(&dec.v_inv).unwrap(),
            IntMatrix::identity(a.cols())
        );
    }

    #[test]
    fn smith_known_values() {
        let a = m(&[vec![2, 4], vec![6, 8]]);
        let sf = smith_normal_form(&a);
        assert_eq!(sf.sigma, vec![bi(2), bi(4)]);
        let b = m(&[vec![1, 0, 1, 1], vec![0, 1, 1, -1]]);
        let sf = smith_normal_form(&b);
        assert_eq!(sf.sigma, vec![bi(1), bi(1)]);
        let z = IntMatrix::zeros(2, 3);
        let sf = smith_normal_form(&z);
        assert_eq!(sf.rank, 0);
        assert!(sf.sigma.is_empty());
    }

    #[test]
    fn smith_random_against_minor_gcd_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..300 {
            check_smith(&random_matrix(&mut rng));
        }
    }

    #[test]
    fn right_inverse_iff_unit_divisors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let a = random_matrix(&mut rng);
            let dec = smith_decompose(&a);
            let expect = a.rows() <= a.cols()
                && dec.rank == a.rows()
                && dec.sigma.iter().all(|s| s.is_one());
            match right_inverse(&a) {
                Some(r) => {
                    assert!(expect, "right inverse must not exist here");
                    assert_eq!(a.matmul(&r).unwrap(), IntMatrix::identity(a.rows()));
                }
                None => assert!(!expect, "right inverse should exist"),
            }
        }
    }

    #[test]
    fn kernel_basis_is_exact_and_canonical() {
        let a = m(&[vec![1, 1, 1]]);
        let k = orthogonal_lattice_basis(&a);
        assert_eq!((k.rows(), k.cols()), (3, 2));
        assert!(a.matmul(&k).unwrap().is_zero());
        // 2x 1x2: [2, -2] has kernel generated by (1,1), not (2,2) or similar.
        let a = m(&[vec![2, -2]]);
        let k = orthogonal_lattice_basis(&a);
        assert_eq!(k, m(&[vec![1], vec![1]]));
        // Full-rank square matrices have empty kernels.
        let a = m(&[vec![2, 1], vec![1, 1]]);
        assert_eq!(orthogonal_lattice_basis(&a).cols(), 0);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = random_matrix(&mut rng);
            let k = orthogonal_lattice_basis(&a);
            assert_eq!(k.cols(), a.cols() - a.rank());
            if k.cols() > 0 {
                assert!(a.matmul(&k).unwrap().is_zero());
                assert_eq!(k.rank(), k.cols());
            }
        }
    }

    #[test]
    fn kernel_generates_all_integer_solutions() {
        // Every small integer kernel vector must be an integer combination of
        // the basis (saturation).
        let a = m(&[vec![2, 4, 6], vec![0, 3, 3]]);
        let k = orthogonal_lattice_basis(&a);
        for x in -6i64..=6 {
            for y in -6i64..=6 {
                for z in -6i64..=6 {
                    let v = m(&[vec![x], vec![y], vec![z]]);
                    if a.matmul(&v).unwrap().is_zero() {
                        let kt = k.transpose();
                        let vt = vec![bi(x), bi(y), bi(z)];
                        assert!(
                            solve_left(&kt, &vt).is_some(),
                            "kernel vector ({x},{y},{z}) outside basis lattice"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn hermite_form_is_canonical() {
        let a = m(&[vec![2, 3, 5], vec![4, 6, 10], vec![0, 1, 7]]);
        let h = hermite_normal_form(&a);
        assert_eq!(h.rows(), 2);
        // Any row-equivalent generating set gives the same Hermite form.
        let b = m(&[vec![0, 1, 7], vec![2, 4, 12], vec![2, 3, 5]]);
        assert_eq!(hermite_normal_form(&b), h);
    }

    #[test]
    fn row_lattice_membership_integers_and_mod_q() {
        let b = m(&[vec![2, 0], vec![0, 1]]);
        let inside = m(&[vec![4, 3]]);
        let outside = m(&[vec![1, 0]]);
        assert!(row_lattice_contains(&b, &inside, Ring::Integers).unwrap());
        assert!(!row_lattice_contains(&b, &outside, Ring::Integers).unwrap());
        // Mod 3 the row [1,0] becomes reachable: 2 is invertible.
        assert!(row_lattice_contains(&b, &outside, Ring::PrimeField(3)).unwrap());
        assert!(matches!(
            row_lattice_contains(&b, &outside, Ring::PrimeField(6)),
            Err(LinAlgError::CompositeModulus { q: 6 })
        ));
    }

    #[test]
    fn solve_left_finds_integer_combinations() {
        let b = m(&[vec![2, 1, 0], vec![1, 1, 1]]);
        let target = vec![bi(3), bi(2), bi(1)]; // row0 + row1
        let x = solve_left(&b, &target).unwrap();
        assert_eq!(x, vec![bi(1), bi(1)]);
        let unreachable = vec![bi(1), bi(0), bi(0)];
        // 1*e1: x1*2+x2 = 1, x1+x2 = 0 => x1 = 1, x2 = -1; third: x2 = 0. No.
        assert!(solve_left(&b, &unreachable).is_none());
    }

    #[test]
    fn unimodularity_checks() {
        assert!(is_unimodular(&m(&[vec![2, 1], vec![1, 1]])).unwrap());
        assert!(!is_unimodular(&m(&[vec![2, 0], vec![0, 1]])).unwrap());
        assert!(matches!(
            is_unimodular(&m(&[vec![1, 0]])),
            Err(LinAlgError::NonSquare { rows: 1, cols: 2 })
        ));
    }

    #[test]
    fn successive_minima_known_lattices() {
        let id = IntMatrix::identity(2);
        assert_eq!(
            successive_minima(&id, Norm::Infinity, 3).unwrap(),
            vec![
                BigRational::from_integer(bi(1)),
                BigRational::from_integer(bi(1))
            ]
        );
        let diag = m(&[vec![2, 0], vec![0, 3]]);
        assert_eq!(
            successive_minima(&diag, Norm::Euclidean, 4).unwrap(),
            vec![
                BigRational::from_integer(bi(4)),
                BigRational::from_integer(bi(9))
            ]
        );
        assert_eq!(
            successive_minima(&diag, Norm::Infinity, 4).unwrap(),
            vec![
                BigRational::from_integer(bi(2)),
                BigRational::from_integer(bi(3))
            ]
        );
        // A lattice where the shortest vector needs a nontrivial combination:
        // columns (5,1), (4,1) -> difference (1,0).
        let skew = m(&[vec![5, 4], vec![1, 1]]);
        let minima = successive_minima(&skew, Norm::Euclidean, 12).unwrap();
        assert_eq!(minima[0], BigRational::from_integer(bi(1)));
    }

    #[test]
    fn successive_minima_reports_inconclusive_radius() {
        // Basis (1,0), (100,1): the second minimum (0,1) needs coefficient
        // -100 on the first generator, far outside a radius-1 box.
        let tight = m(&[vec![1, 100], vec![0, 1]]);
        match successive_minima(&tight, Norm::Euclidean, 1) {
            Err(LinAlgError::InconclusiveEnumeration { .. })
            | Err(LinAlgError::RadiusTooSmall { .. }) => {}
            other => panic!("expected inconclusive result, got {other:?}"),
        }
        // A certified radius resolves both minima to 1.
        let minima = successive_minima(&tight, Norm::Euclidean, 120).unwrap();
        assert_eq!(
            minima,
            vec![
                BigRational::from_integer(bi(1)),
                BigRational::from_integer(bi(1))
            ]
        );
    }

    #[test]
    fn dependent_generators_fall_back_to_lattice_basis() {
        // Three generators of a rank-2 lattice.
        let a = m(&[vec![1, 0, 1], vec![0, 2, 2]]);
        let minima = successive_minima(&a, Norm::Euclidean, 6).unwrap();
        assert_eq!(minima.len(), 2);
        assert_eq!(minima[0], BigRational::from_integer(bi(1)));
        assert_eq!(minima[1], BigRational::from_integer(bi(4)));
    }

    #[test]
    fn empty_matrix_conventions() {
        let e = IntMatrix::zeros(0, 3);
        let sf = smith_normal_form(&e);
        assert_eq!(sf.rank, 0);
        let r = right_inverse(&e).unwrap();
        assert_eq!((r.rows(), r.cols()), (3, 0));
        let k = orthogonal_lattice_basis(&e);
        assert_eq!((k.rows(), k.cols()), (3, 3));
        assert_eq!(e.determinant().unwrap_err(), LinAlgError::NonSquare { rows: 0, cols: 3 });
        assert_eq!(IntMatrix::zeros(0, 0).determinant().unwrap(), bi(1));
    }
}
