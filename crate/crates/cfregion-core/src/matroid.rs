//! Matroids on small ground sets: basis-set representation with the exchange
//! axiom enforced, vector matroids of integer matrices over the rationals or
//! a prime field, duality, exhaustive enumeration for ground sizes up to
//! four, and representation tests.

use crate::linalg::{rank_mod_q_i64, IntMatrix, LinAlgError, Ring};
use itertools::Itertools;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatroidError {
    #[error("matroid must have at least one basis")]
    NoBases,
    #[error("bases must all have the same cardinality")]
    MixedCardinality,
    #[error("basis exchange axiom fails for bases {b1:?} and {b2:?} at element {x}")]
    ExchangeAxiom { b1: Vec<usize>, b2: Vec<usize>, x: usize },
    #[error("ground set of size {n} exceeds the supported maximum of {max}")]
    GroundTooLarge { n: usize, max: usize },
    #[error("exhaustive enumeration is only implemented for ground sizes up to 4, got {n}")]
    UnsupportedGroundSize { n: usize },
    #[error("basis element {element} outside ground set of size {n}")]
    ElementOutOfRange { element: usize, n: usize },
    #[error(transparent)]
    Linalg(#[from] LinAlgError),
}

/// A matroid stored by its set of bases (bitmasks over the ground set,
/// element `i` at bit `i`). Equality is structural, so two matroids compare
/// equal iff they have the same ground size and basis family.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Matroid {
    ground_size: usize,
    rank: usize,
    bases: BTreeSet<u16>,
}

const MAX_GROUND: usize = 16;

impl Matroid {
    /// Builds a matroid from explicit bases (element index sets), verifying
    /// the nonempty / equal-cardinality / exchange axioms.
    pub fn new(
        ground_size: usize,
        bases: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<Self, MatroidError> {
        if ground_size > MAX_GROUND {
            return Err(MatroidError::GroundTooLarge {
                n: ground_size,
                max: MAX_GROUND,
            });
        }
        let mut masks = BTreeSet::new();
        for b in bases {
            let mut mask = 0u16;
            for &e in &b {
                if e >= ground_size {
                    return Err(MatroidError::ElementOutOfRange {
                        element: e,
                        n: ground_size,
                    });
                }
                mask |= 1 << e;
            }
            masks.insert(mask);
        }
        Self::from_masks(ground_size, masks)
    }

    /// Same as [`Matroid::new`] but from bitmasks.
    pub fn from_masks(ground_size: usize, bases: BTreeSet<u16>) -> Result<Self, MatroidError> {
        if ground_size > MAX_GROUND {
            return Err(MatroidError::GroundTooLarge {
                n: ground_size,
                max: MAX_GROUND,
            });
        }
        let Some(first) = bases.iter().next() else {
            return Err(MatroidError::NoBases);
        };
        let rank = first.count_ones() as usize;
        if bases.iter().any(|b| b.count_ones() as usize != rank) {
            return Err(MatroidError::MixedCardinality);
        }
        let m = Matroid {
            ground_size,
            rank,
            bases,
        };
        m.check_exchange()?;
        Ok(m)
    }

    fn check_exchange(&self) -> Result<(), MatroidError> {
        for &b1 in &self.bases {
            for &b2 in &self.bases {
                let only_b1 = b1 & !b2;
                if only_b1 == 0 {
                    continue;
                }
                for x in 0..self.ground_size {
                    if only_b1 & (1 << x) == 0 {
                        continue;
                    }
                    let stripped = b1 & !(1 << x);
                    let mut found = false;
                    for y in 0..self.ground_size {
                        if b2 & !b1 & (1 << y) != 0 && self.bases.contains(&(stripped | (1 << y)))
                        {
                            found = true;
                            break;
                        }
                    }
                    if !found {
                        return Err(MatroidError::ExchangeAxiom {
                            b1: mask_to_set(b1),
                            b2: mask_to_set(b2),
                            x,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn bases_masks(&self) -> &BTreeSet<u16> {
        &self.bases
    }

    /// Bases as sorted element-index sets, in canonical order.
    pub fn bases(&self) -> Vec<Vec<usize>> {
        self.bases.iter().map(|&m| mask_to_set(m)).collect()
    }

    pub fn is_basis(&self, elements: &[usize]) -> bool {
        let mut mask = 0u16;
        for &e in elements {
            if e >= self.ground_size {
                return false;
            }
            mask |= 1 << e;
        }
        if mask.count_ones() as usize != elements.len() {
            return false;
        }
        self.bases.contains(&mask)
    }

    /// The uniform matroid U_{r,n}: every r-subset is a basis.
    pub fn uniform(n: usize, r: usize) -> Result<Self, MatroidError> {
        if n > MAX_GROUND {
            return Err(MatroidError::GroundTooLarge { n, max: MAX_GROUND });
        }
        if r > n {
            return Err(MatroidError::NoBases);
        }
        let bases: BTreeSet<u16> = (0..n)
            .combinations(r)
            .map(|c| c.iter().fold(0u16, |m, &e| m | (1 << e)))
            .collect();
        Ok(Matroid {
            ground_size: n,
            rank: r,
            bases,
        })
    }

    /// Dual matroid: bases are the complements of the bases.
    pub fn dual(&self) -> Matroid {
        let full: u16 = if self.ground_size == 16 {
            u16::MAX
        } else {
            (1u16 << self.ground_size) - 1
        };
        let bases: BTreeSet<u16> = self.bases.iter().map(|&b| full & !b).collect();
        Matroid {
            ground_size: self.ground_size,
            rank: self.ground_size - self.rank,
            bases,
        }
    }

    /// Elements contained in no basis (loops of the matroid).
    pub fn loops(&self) -> Vec<usize> {
        let union = self.bases.iter().fold(0u16, |acc, &b| acc | b);
        (0..self.ground_size)
            .filter(|&e| union & (1 << e) == 0)
            .collect()
    }
}

fn mask_to_set(mask: u16) -> Vec<usize> {
    (0..16).filter(|&i| mask & (1 << i) != 0).collect()
}

impl fmt::Display for Matroid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rank {} on [{}]; bases", self.rank, self.ground_size)?;
        if self.rank == 0 {
            return write!(f, " {{}}");
        }
        for b in self.bases() {
            write!(f, " {}", b.iter().map(|e| (e + 1).to_string()).join(""))?;
        }
        Ok(())
    }
}

/// The column matroid of an integer matrix: independence of column subsets
/// over the rationals (`Ring::Integers`) or over `F_q` (`Ring::PrimeField`).
/// Composite moduli are rejected. Intended for small ground sets (the column
/// count must not exceed 16).
pub fn vector_matroid(q: &IntMatrix, ring: Ring) -> Result<Matroid, MatroidError> {
    ring.validate()?;
    let n = q.cols();
    if n > MAX_GROUND {
        return Err(MatroidError::GroundTooLarge { n, max: MAX_GROUND });
    }
    let rank_of = |cols: &[usize]| -> usize {
        let sub = q.select_cols(cols);
        match ring {
            Ring::Integers => sub.rank(),
            Ring::PrimeField(p) => sub.rank_mod_q(p).expect("modulus validated"),
        }
    };
    let full_rank = rank_of(&(0..n).collect::<Vec<_>>());
    let bases: BTreeSet<u16> = (0..n)
        .combinations(full_rank)
        .filter(|c| rank_of(c) == full_rank)
        .map(|c| c.iter().fold(0u16, |m, &e| m | (1 << e)))
        .collect();
    Ok(Matroid {
        ground_size: n,
        rank: full_rank,
        bases,
    })
}

/// Fast path for search loops: column matroid of a small i64 matrix, as
/// (rank, basis masks). `modulus` switches between rational and prime-field
/// independence. Entries and dimensions must be small enough that i128
/// fraction-free elimination cannot overflow (always true for the search
/// spaces in this crate).
pub(crate) fn column_matroid_masks_i64(
    rows: &[Vec<i64>],
    modulus: Option<i64>,
) -> (usize, BTreeSet<u16>) {
    let n = rows.first().map_or(0, |r| r.len());
    let rank_of = |cols: &[usize]| -> usize {
        match modulus {
            Some(q) => {
                let mut a: Vec<Vec<i64>> = rows
                    .iter()
                    .map(|r| cols.iter().map(|&j| r[j].rem_euclid(q)).collect())
                    .collect();
                rank_mod_q_i64(&mut a, q)
            }
            None => rank_i128(
                &rows
                    .iter()
                    .map(|r| cols.iter().map(|&j| r[j] as i128).collect())
                    .collect::<Vec<Vec<i128>>>(),
            ),
        }
    };
    let full = rank_of(&(0..n).collect::<Vec<_>>());
    let bases: BTreeSet<u16> = (0..n)
        .combinations(full)
        .filter(|c| rank_of(c) == full)
        .map(|c| c.iter().fold(0u16, |m, &e| m | (1 << e)))
        .collect();
    (full, bases)
}

/// Fraction-free rank of a small i128 matrix.
pub(crate) fn rank_i128(a: &[Vec<i128>]) -> usize {
    let mut a: Vec<Vec<i128>> = a.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut r = 0usize;
    for col in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            if a[i][col] == 0 {
                continue;
            }
            for j in col + 1..cols {
                a[i][j] = a[i][j] * a[r][col] - a[i][col] * a[r][j];
            }
            a[i][col] = 0;
            let g = a[i].iter().fold(0i128, |acc, &x| gcd_i128(acc, x));
            if g > 1 {
                for x in a[i].iter_mut() {
                    *x /= g;
                }
            }
        }
        r += 1;
    }
    r
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// All matroids on a ground set of `n <= 4` elements, in canonical order
/// (by rank, then by basis family). `exclude_full_rank` drops the free
/// matroid, whose unique basis is the whole ground set.
pub fn enumerate_matroids(n: usize, exclude_full_rank: bool) -> Result<Vec<Matroid>, MatroidError> {
    if n > 4 {
        return Err(MatroidError::UnsupportedGroundSize { n });
    }
    let mut out = Vec::new();
    for r in 0..=n {
        if exclude_full_rank && r == n {
            continue;
        }
        let subsets: Vec<u16> = (0..n)
            .combinations(r)
            .map(|c| c.iter().fold(0u16, |m, &e| m | (1 << e)))
            .collect();
        let families = 1u32 << subsets.len();
        for f in 1..families {
            let bases: BTreeSet<u16> = subsets
                .iter()
                .enumerate()
                .filter(|(i, _)| f & (1 << i) != 0)
                .map(|(_, &s)| s)
                .collect();
            let cand = Matroid {
                ground_size: n,
                rank: r,
                bases,
            };
            if cand.check_exchange().is_ok() {
                out.push(cand);
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// True iff the column matroid of `C` over `ring` equals `M`. A column-count
/// mismatch is simply `false`.
pub fn is_representation(c: &IntMatrix, m: &Matroid, ring: Ring) -> Result<bool, MatroidError> {
    ring.validate()?;
    if c.cols() != m.ground_size() {
        return Ok(false);
    }
    Ok(vector_matroid(c, ring)? == *m)
}
