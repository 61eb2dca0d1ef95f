//! Polyhedral algebra for rate regions: halfspaces `sum_{k in T} R_k <= r`
//! over the nonnegative orthant, unions in disjunctive normal form,
//! emptiness, vertex enumeration, and exact containment/equality tests for
//! up to three users.
//!
//! Regions built from strict information inequalities are stored as their
//! closures; membership tests accept boundary points, and all equality or
//! containment statements are statements about closures.
//!
//! Containment of one union in another is decided by an exact polyhedral
//! difference (subtract every tolerance-enlarged member of the cover from
//! each member of the covered union and test the remaining pieces for
//! emptiness), not by vertex sampling: a union can contain every vertex of a
//! polytope and still miss its interior.

use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegionError {
    #[error("regions have different user counts ({a} vs {b})")]
    KMismatch { a: usize, b: usize },
    #[error("operation supports at most {max} users, got {k}")]
    UnsupportedDimension { k: usize, max: usize },
    #[error("polyhedron is unbounded along user axes {axes:?}")]
    Unbounded { axes: Vec<usize> },
    #[error("polyhedral difference exceeded the complexity budget")]
    TooComplex,
}

const MAX_EXACT_K: usize = 3;

/// One halfspace `sum_{k in T} R_k <= r`, with an optional provenance id
/// linking the bound to a search-ledger entry.
#[derive(Clone, Debug)]
pub struct RateBound {
    mask: u32,
    r: f64,
    source: Option<u32>,
}

impl RateBound {
    /// `users` are 0-based user indices; duplicates collapse.
    pub fn new(users: &[usize], r: f64) -> Self {
        let mask = users.iter().fold(0u32, |m, &u| m | (1 << u));
        assert!(mask != 0, "rate bound needs a nonempty user subset");
        assert!(!r.is_nan(), "rate bound must not be NaN");
        RateBound {
            mask,
            r,
            source: None,
        }
    }

    pub fn with_source(mut self, source: u32) -> Self {
        self.source = Some(source);
        self
    }

    pub fn from_mask(mask: u32, r: f64, source: Option<u32>) -> Self {
        assert!(mask != 0, "rate bound needs a nonempty user subset");
        assert!(!r.is_nan(), "rate bound must not be NaN");
        RateBound { mask, r, source }
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn users(&self) -> Vec<usize> {
        (0..32).filter(|&i| self.mask & (1 << i) != 0).collect()
    }

    pub fn bound(&self) -> f64 {
        self.r
    }

    pub fn source(&self) -> Option<u32> {
        self.source
    }

    fn key(&self) -> (Vec<usize>, f64, Option<u32>) {
        (self.users(), self.r, self.source)
    }
}

fn cmp_bound_key(a: &(Vec<usize>, f64, Option<u32>), b: &(Vec<usize>, f64, Option<u32>)) -> std::cmp::Ordering {
    a.0.cmp(&b.0)
        .then_with(|| a.1.total_cmp(&b.1))
        .then_with(|| a.2.cmp(&b.2))
}

/// Intersection of rate bounds with the nonnegative orthant, in canonical
/// form: bounds sorted, and for each user subset only the tightest bound
/// kept. Infinite (non-constraining) bounds are dropped on construction.
#[derive(Clone, Debug)]
pub struct Polyhedron {
    k: usize,
    bounds: Vec<RateBound>,
}

impl Polyhedron {
    pub fn new(k: usize, bounds: Vec<RateBound>) -> Self {
        assert!(k >= 1 && k <= 32, "user count out of range");
        let mut bounds: Vec<RateBound> = bounds
            .into_iter()
            .filter(|b| b.r != f64::INFINITY)
            .collect();
        for b in &bounds {
            assert!(
                b.mask < (1u32 << k),
                "bound references a user outside [K]"
            );
        }
        bounds.sort_by(|a, b| cmp_bound_key(&a.key(), &b.key()));
        // Same subset: keep only the smallest bound (it sorts first).
        let mut seen = BTreeSet::new();
        bounds.retain(|b| seen.insert(b.mask));
        Polyhedron { k, bounds }
    }

    /// The whole nonnegative orthant.
    pub fn universe(k: usize) -> Self {
        Polyhedron::new(k, Vec::new())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bounds(&self) -> &[RateBound] {
        &self.bounds
    }

    /// Exact emptiness: every constraint is an upper bound on a nonnegative
    /// sum, so the polyhedron is empty iff some bound is negative (the origin
    /// is feasible otherwise).
    pub fn is_empty(&self) -> bool {
        self.bounds.iter().any(|b| b.r < 0.0)
    }

    pub fn contains_point(&self, x: &[f64], tol: f64) -> bool {
        assert_eq!(x.len(), self.k);
        if x.iter().any(|&v| v < -tol) {
            return false;
        }
        self.bounds.iter().all(|b| {
            let s: f64 = (0..self.k)
                .filter(|&i| b.mask & (1 << i) != 0)
                .map(|i| x[i])
                .sum();
            s <= b.r + tol
        })
    }

    /// User axes along which the polyhedron is unbounded (no bound covers
    /// the user).
    pub fn unbounded_axes(&self) -> Vec<usize> {
        (0..self.k)
            .filter(|&i| !self.bounds.iter().any(|b| b.mask & (1 << i) != 0))
            .collect()
    }

    /// All extreme points, for K <= 3. Each vertex solves K active
    /// constraints (bounds or axes) and satisfies all others; duplicates
    /// within 1e-9 are merged. Unbounded polyhedra are reported as errors
    /// with the offending axes.
    pub fn vertices(&self) -> Result<Vec<Vec<f64>>, RegionError> {
        if self.k > MAX_EXACT_K {
            return Err(RegionError::UnsupportedDimension {
                k: self.k,
                max: MAX_EXACT_K,
            });
        }
        if self.is_empty() {
            return Ok(Vec::new());
        }
        let axes = self.unbounded_axes();
        if !axes.is_empty() {
            return Err(RegionError::Unbounded { axes });
        }
        let rows = constraint_rows(self, 0.0, None);
        Ok(vertices_of_rows(&rows, self.k))
    }
}

fn cmp_poly_key(a: &Polyhedron, b: &Polyhedron) -> std::cmp::Ordering {
    let ka: Vec<_> = a.bounds.iter().map(|x| x.key()).collect();
    let kb: Vec<_> = b.bounds.iter().map(|x| x.key()).collect();
    for (x, y) in ka.iter().zip(kb.iter()) {
        let c = cmp_bound_key(x, y);
        if c != std::cmp::Ordering::Equal {
            return c;
        }
    }
    ka.len().cmp(&kb.len())
}

fn poly_same_repr(a: &Polyhedron, b: &Polyhedron) -> bool {
    a.bounds.len() == b.bounds.len()
        && a.bounds
            .iter()
            .zip(&b.bounds)
            .all(|(x, y)| x.mask == y.mask && x.r == y.r)
}

/// A finite union of [`Polyhedron`] values over the same user count, with
/// empty members pruned, members canonically ordered, and (for K <= 3)
/// members contained in another single member removed.
#[derive(Clone, Debug)]
pub struct RateRegion {
    k: usize,
    polyhedra: Vec<Polyhedron>,
}

impl RateRegion {
    pub fn new(k: usize, polyhedra: Vec<Polyhedron>) -> Self {
        assert!(k >= 1 && k <= 32);
        let mut members: Vec<Polyhedron> = polyhedra
            .into_iter()
            .filter(|p| {
                assert_eq!(p.k, k, "member polyhedron with wrong user count");
                !p.is_empty()
            })
            .collect();
        members.sort_by(cmp_poly_key);
        members.dedup_by(|a, b| poly_same_repr(a, b));
        if k <= MAX_EXACT_K && members.len() > 1 {
            members = prune_contained_members(k, members);
        }
        RateRegion { k, polyhedra: members }
    }

    pub fn empty(k: usize) -> Self {
        RateRegion {
            k,
            polyhedra: Vec::new(),
        }
    }

    pub fn universe(k: usize) -> Self {
        RateRegion::new(k, vec![Polyhedron::universe(k)])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn polyhedra(&self) -> &[Polyhedron] {
        &self.polyhedra
    }

    pub fn is_empty(&self) -> bool {
        self.polyhedra.is_empty()
    }

    pub fn contains_point(&self, x: &[f64], tol: f64) -> bool {
        self.polyhedra.iter().any(|p| p.contains_point(x, tol))
    }

    /// Vertices of all members, deduplicated and sorted. Same preconditions
    /// as [`Polyhedron::vertices`].
    pub fn vertices(&self) -> Result<Vec<Vec<f64>>, RegionError> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for p in &self.polyhedra {
            out.extend(p.vertices()?);
        }
        dedup_points(&mut out, 1e-9);
        Ok(out)
    }
}

/// Pairwise intersection of member polyhedra (DNF distribution).
pub fn intersect(a: &RateRegion, b: &RateRegion) -> Result<RateRegion, RegionError> {
    if a.k != b.k {
        return Err(RegionError::KMismatch { a: a.k, b: b.k });
    }
    let mut members = Vec::with_capacity(a.polyhedra.len() * b.polyhedra.len());
    for pa in &a.polyhedra {
        for pb in &b.polyhedra {
            let mut bounds = pa.bounds.clone();
            bounds.extend(pb.bounds.iter().cloned());
            members.push(Polyhedron::new(a.k, bounds));
        }
    }
    Ok(RateRegion::new(a.k, members))
}

/// Union of two regions: concatenation with canonical ordering and
/// containment pruning (K <= 3).
pub fn union(a: &RateRegion, b: &RateRegion) -> Result<RateRegion, RegionError> {
    if a.k != b.k {
        return Err(RegionError::KMismatch { a: a.k, b: b.k });
    }
    let mut members = a.polyhedra.clone();
    members.extend(b.polyhedra.iter().cloned());
    Ok(RateRegion::new(a.k, members))
}

// ---------------------------------------------------------------------------
// Exact geometry on bounded H-polyhedra
// ---------------------------------------------------------------------------

/// Constraint rows `coeffs . x <= rhs` of a polyhedron: its rate bounds, the
/// axis constraints `-x_k <= relax`, and (optionally) box faces
/// `x_k <= box_m`.
fn constraint_rows(p: &Polyhedron, relax: f64, box_m: Option<f64>) -> Vec<(Vec<f64>, f64)> {
    let k = p.k;
    let mut rows = Vec::with_capacity(p.bounds.len() + 2 * k);
    for b in &p.bounds {
        let coeffs: Vec<f64> = (0..k)
            .map(|i| if b.mask & (1 << i) != 0 { 1.0 } else { 0.0 })
            .collect();
        rows.push((coeffs, b.r + relax));
    }
    for i in 0..k {
        let mut coeffs = vec![0.0; k];
        coeffs[i] = -1.0;
        rows.push((coeffs, relax));
    }
    if let Some(m) = box_m {
        for i in 0..k {
            let mut coeffs = vec![0.0; k];
            coeffs[i] = 1.0;
            rows.push((coeffs, m + relax));
        }
    }
    rows
}

/// Solves a k x k linear system by Gaussian elimination with partial
/// pivoting; `None` when numerically singular.
fn solve_square(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let k = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..k {
        let (pivot, maxval) = (col..k)
            .map(|i| (i, m[i][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if maxval < 1e-9 {
            return None;
        }
        m.swap(col, pivot);
        for i in 0..k {
            if i != col && m[i][col] != 0.0 {
                let f = m[i][col] / m[col][col];
                for j in col..=k {
                    m[i][j] -= f * m[col][j];
                }
            }
        }
    }
    Some((0..k).map(|i| m[i][k] / m[i][i]).collect())
}

fn rows_feasible_at(rows: &[(Vec<f64>, f64)], x: &[f64], slack: f64) -> bool {
    rows.iter().all(|(c, rhs)| {
        let s: f64 = c.iter().zip(x).map(|(a, b)| a * b).sum();
        s <= rhs + slack * (1.0 + rhs.abs())
    })
}

/// All vertices of the (bounded) polyhedron given by `rows`, for k <= 3.
fn vertices_of_rows(rows: &[(Vec<f64>, f64)], k: usize) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let a: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&i| rows[i].1).collect();
        if let Some(x) = solve_square(&a, &b) {
            if rows_feasible_at(rows, &x, 1e-9) {
                out.push(x);
            }
        }
        // next k-combination of (0..n)
        let mut pos = k;
        loop {
            if pos == 0 {
                dedup_points(&mut out, 1e-9);
                return out;
            }
            pos -= 1;
            if idx[pos] + 1 <= n - (k - pos) {
                idx[pos] += 1;
                for j in pos + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn dedup_points(points: &mut Vec<Vec<f64>>, tol: f64) {
    let mut kept: Vec<Vec<f64>> = Vec::new();
    points.sort_by(|a, b| {
        for (x, y) in a.iter().zip(b.iter()) {
            let c = x.total_cmp(y);
            if c != std::cmp::Ordering::Equal {
                return c;
            }
        }
        std::cmp::Ordering::Equal
    });
    'next: for p in points.iter() {
        for q in &kept {
            if p.iter().zip(q.iter()).all(|(a, b)| (a - b).abs() <= tol) {
                continue 'next;
            }
        }
        kept.push(p.clone());
    }
    *points = kept;
}

/// Nonemptiness of a bounded H-polyhedron: a bounded nonempty polyhedron has
/// an extreme point, which solves k linearly independent active constraints.
fn rows_nonempty(rows: &[(Vec<f64>, f64)], k: usize) -> bool {
    let n = rows.len();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let a: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&i| rows[i].1).collect();
        if let Some(x) = solve_square(&a, &b) {
            if rows_feasible_at(rows, &x, 1e-12) {
                return true;
            }
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                return false;
            }
            pos -= 1;
            if idx[pos] + 1 <= n - (k - pos) {
                idx[pos] += 1;
                for j in pos + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

const MAX_PIECES: usize = 100_000;

/// Decides `b subseteq a` (within `tol`) for regions over K <= 3 users.
///
/// Both unions are first intersected with a box strictly larger than every
/// finite bound; because all members are downward closed this changes neither
/// side's containment status. Each member of `b` is then reduced by the
/// tolerance-enlarged members of `a` via a disjoint facet decomposition; `b`
/// is contained iff every remaining piece is empty.
pub fn region_contains(a: &RateRegion, b: &RateRegion, tol: f64) -> Result<bool, RegionError> {
    if a.k != b.k {
        return Err(RegionError::KMismatch { a: a.k, b: b.k });
    }
    let k = a.k;
    if k > MAX_EXACT_K {
        return Err(RegionError::UnsupportedDimension {
            k,
            max: MAX_EXACT_K,
        });
    }
    if b.is_empty() {
        return Ok(true);
    }
    if a.is_empty() {
        return Ok(false);
    }
    let max_bound = a
        .polyhedra
        .iter()
        .chain(&b.polyhedra)
        .flat_map(|p| p.bounds.iter())
        .map(|bd| bd.r.abs())
        .fold(1.0f64, f64::max);
    let box_m = max_bound + 10.0;

    for pb in &b.polyhedra {
        // Seed piece: the member of b, boxed.
        let mut pieces: Vec<Vec<(Vec<f64>, f64)>> = vec![constraint_rows(pb, 0.0, Some(box_m))];
        for pa in &a.polyhedra {
            // Subtracting pa with every constraint (bounds and axis rows)
            // relaxed by tol: flipped boundary branches then sit a genuine
            // tol-gap outside the piece and vanish, instead of surviving as
            // measure-zero slabs shared by both sides.
            let pa_rows = constraint_rows(pa, tol, None);
            let mut next: Vec<Vec<(Vec<f64>, f64)>> = Vec::new();
            for piece in &pieces {
                for (i, (coeffs, rhs)) in pa_rows.iter().enumerate() {
                    let mut branch = piece.clone();
                    // previous facets kept on the inside for disjointness
                    for (c2, r2) in pa_rows.iter().take(i) {
                        branch.push((c2.clone(), *r2));
                    }
                    let flipped: Vec<f64> = coeffs.iter().map(|c| -c).collect();
                    branch.push((flipped, -*rhs));
                    if rows_nonempty(&branch, k) {
                        next.push(branch);
                    }
                    if next.len() > MAX_PIECES {
                        return Err(RegionError::TooComplex);
                    }
                }
            }
            pieces = next;
            if pieces.is_empty() {
                break;
            }
        }
        if !pieces.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Mutual containment within `tol`.
pub fn region_equal(a: &RateRegion, b: &RateRegion, tol: f64) -> Result<bool, RegionError> {
    Ok(region_contains(a, b, tol)? && region_contains(b, a, tol)?)
}

/// Removes members contained in a single other member (exact for K <= 3:
/// a polytope is inside a convex set iff its vertices are).
/// Sufficient syntactic containment test: the region of `inner` is contained
/// in that of `outer` when every bound of `outer` is implied by some bound of
/// `inner` with a superset mask and no larger threshold (rates are
/// nonnegative, so a sum over more users dominates a sum over fewer).
fn bounds_imply_containment(inner: &Polyhedron, outer: &Polyhedron) -> bool {
    outer.bounds.iter().all(|ob| {
        inner
            .bounds
            .iter()
            .any(|ib| ib.mask & ob.mask == ob.mask && ib.r <= ob.r)
    })
}

/// Incremental antichain of maximal members: each candidate is skipped when
/// contained in a kept member and evicts kept members it contains. A cheap
/// bound-implication test screens most cases before the exact boxed-vertex
/// containment test; kept vertex sets are computed once and cached. The
/// result depends only on the (canonical) input order.
fn prune_contained_members(k: usize, members: Vec<Polyhedron>) -> Vec<Polyhedron> {
    let box_m = members
        .iter()
        .flat_map(|p| p.bounds.iter())
        .map(|bd| bd.r.abs())
        .fold(1.0f64, f64::max)
        + 10.0;
    let mut kept: Vec<(Polyhedron, Vec<Vec<f64>>)> = Vec::new();
    'candidates: for p in members {
        for (q, _) in &kept {
            if bounds_imply_containment(&p, q) {
                continue 'candidates;
            }
        }
        let verts = vertices_of_rows(&constraint_rows(&p, 0.0, Some(box_m)), k);
        for (q, _) in &kept {
            if verts.iter().all(|v| q.contains_point(v, 1e-12)) {
                continue 'candidates;
            }
        }
        kept.retain(|(q, qv)| {
            !(bounds_imply_containment(q, &p)
                || qv.iter().all(|v| p.contains_point(v, 1e-12)))
        });
        kept.push((p, verts));
    }
    kept.into_iter().map(|(p, _)| p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn poly(k: usize, bounds: &[(&[usize], f64)]) -> Polyhedron {
        Polyhedron::new(
            k,
            bounds.iter().map(|(t, r)| RateBound::new(t, *r)).collect(),
        )
    }

    fn sorted(mut v: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        v.sort_by(|a, b| {
            for (x, y) in a.iter().zip(b.iter()) {
                let c = x.total_cmp(y);
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            std::cmp::Ordering::Equal
        });
        v
    }

    #[test]
    fn canonicalisation_prunes_dominated_bounds() {
        let p = poly(2, &[(&[0], 2.0), (&[0], 1.0), (&[0, 1], 3.0)]);
        assert_eq!(p.bounds().len(), 2);
        assert_eq!(p.bounds()[0].bound(), 1.0);
        assert_eq!(p.bounds()[0].users(), vec![0]);
    }

    #[test]
    fn emptiness_is_a_sign_test() {
        assert!(poly(2, &[(&[0], -1.0)]).is_empty());
        assert!(!poly(2, &[(&[0, 1], 0.0)]).is_empty());
        assert!(!Polyhedron::universe(2).is_empty());
        assert!(poly(2, &[(&[1], f64::NEG_INFINITY)]).is_empty());
    }

    #[test]
    fn intersect_distributes_and_prunes() {
        let x = RateRegion::new(2, vec![poly(2, &[(&[0], 1.0)])]);
        let full = RateRegion::universe(2);
        let both = intersect(&x, &full).unwrap();
        assert_eq!(both.polyhedra().len(), 1);
        assert_eq!(both.polyhedra()[0].bounds().len(), 1);
        // Intersection with an empty-making bound kills the region.
        let neg = RateRegion::new(2, vec![poly(2, &[(&[0, 1], -0.1)])]);
        assert!(neg.is_empty());
        let dead = intersect(&x, &neg).unwrap();
        assert!(dead.is_empty());
    }

    #[test]
    fn union_prunes_contained_boxes() {
        let big = RateRegion::new(2, vec![poly(2, &[(&[0], 2.0), (&[1], 2.0)])]);
        let small = RateRegion::new(2, vec![poly(2, &[(&[0], 1.0), (&[1], 1.0)])]);
        let u = union(&big, &small).unwrap();
        assert_eq!(u.polyhedra().len(), 1);
        assert_eq!(u.polyhedra()[0].bounds()[0].bound(), 2.0);
        // Incomparable rectangles stay separate.
        let r1 = RateRegion::new(2, vec![poly(2, &[(&[0], 1.0), (&[1], 3.0)])]);
        let r2 = RateRegion::new(2, vec![poly(2, &[(&[0], 3.0), (&[1], 1.0)])]);
        assert_eq!(union(&r1, &r2).unwrap().polyhedra().len(), 2);
        // Union with empty is identity.
        let ue = union(&big, &RateRegion::empty(2)).unwrap();
        assert_eq!(ue.polyhedra().len(), 1);
    }

    #[test]
    fn pentagon_vertices() {
        let p = poly(2, &[(&[0], 1.0), (&[1], 1.0), (&[0, 1], 1.5)]);
        let v = sorted(p.vertices().unwrap());
        let expect = sorted(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.5],
            vec![0.5, 1.0],
        ]);
        assert_eq!(v.len(), 5);
        for (a, b) in v.iter().zip(expect.iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() < 1e-9, "{v:?}");
            }
        }
        // Unit box: 4 vertices.
        let b = poly(2, &[(&[0], 1.0), (&[1], 1.0)]);
        assert_eq!(b.vertices().unwrap().len(), 4);
        // Empty: no vertices.
        assert!(poly(2, &[(&[0], -1.0)]).vertices().unwrap().is_empty());
    }

    #[test]
    fn unbounded_axes_are_reported() {
        let p = poly(2, &[(&[0], 1.0)]);
        match p.vertices() {
            Err(RegionError::Unbounded { axes }) => assert_eq!(axes, vec![1]),
            other => panic!("expected unbounded report, got {other:?}"),
        }
    }

    #[test]
    fn containment_box_cases() {
        let big = RateRegion::new(2, vec![poly(2, &[(&[0], 2.0), (&[1], 2.0)])]);
        let half = RateRegion::new(2, vec![poly(2, &[(&[0], 1.0), (&[1], 2.0)])]);
        assert!(region_contains(&big, &half, 1e-9).unwrap());
        assert!(!region_contains(&half, &big, 1e-9).unwrap());
        assert!(!region_equal(&big, &half, 1e-9).unwrap());
        assert!(region_equal(&big, &big, 1e-9).unwrap());
        // Everything contains the empty region.
        assert!(region_contains(&half, &RateRegion::empty(2), 1e-9).unwrap());
    }

    #[test]
    fn union_interior_gaps_are_detected() {
        // Two rectangles whose union covers every vertex of the triangle
        // x1 + x2 <= 3 (boxed at 2) but misses its middle near (1.5, 1.5):
        // vertex sampling would wrongly report containment here.
        let rects = RateRegion::new(
            2,
            vec![
                poly(2, &[(&[0], 1.0), (&[1], 2.0)]),
                poly(2, &[(&[0], 2.0), (&[1], 1.0)]),
            ],
        );
        let tri = RateRegion::new(
            2,
            vec![poly(2, &[(&[0], 2.0), (&[1], 2.0), (&[0, 1], 3.0)])],
        );
        assert!(!region_contains(&rects, &tri, 1e-9).unwrap());
        assert!(region_contains(&tri, &rects, 1e-9).unwrap());
        // And the triangle with the sum bound tightened to 2 does fit.
        let tri_small = RateRegion::new(
            2,
            vec![poly(2, &[(&[0], 2.0), (&[1], 2.0), (&[0, 1], 2.0)])],
        );
        assert!(region_contains(&rects, &tri_small, 1e-9).unwrap());
    }

    #[test]
    fn notched_pentagon_is_strictly_inside() {
        // MAC pentagon vs the pentagon intersected with min(R1,R2) <= 0.5
        // (the union of two half-planes).
        let pentagon = RateRegion::new(2, vec![poly(2, &[(&[0], 1.0), (&[1], 1.0), (&[0, 1], 1.5)])]);
        let notch = RateRegion::new(
            2,
            vec![
                poly(2, &[(&[0], 0.5), (&[1], 1.0), (&[0, 1], 1.5)]),
                poly(2, &[(&[0], 1.0), (&[1], 0.5), (&[0, 1], 1.5)]),
            ],
        );
        assert!(region_contains(&pentagon, &notch, 1e-9).unwrap());
        assert!(!region_contains(&notch, &pentagon, 1e-9).unwrap());
        assert!(!region_equal(&pentagon, &notch, 1e-9).unwrap());
        // The notched region agrees pointwise with the min-form constraint.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let x: [f64; 2] = [rng.gen_range(0.0..1.2), rng.gen_range(0.0..1.2)];
            let direct = x[0].min(x[1]) <= 0.5
                && x[0] <= 1.0
                && x[1] <= 1.0
                && x[0] + x[1] <= 1.5;
            assert_eq!(notch.contains_point(&x, 0.0), direct, "at {x:?}");
        }
    }

    #[test]
    fn set_operations_agree_with_pointwise_semantics() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = RateRegion::new(
            2,
            vec![
                poly(2, &[(&[0], 1.0), (&[1], 2.0)]),
                poly(2, &[(&[0], 2.0), (&[1], 0.7), (&[0, 1], 2.2)]),
            ],
        );
        let b = RateRegion::new(
            2,
            vec![poly(2, &[(&[0], 1.5), (&[1], 1.5), (&[0, 1], 2.0)])],
        );
        let i1 = intersect(&a, &b).unwrap();
        let i2 = intersect(&b, &a).unwrap();
        let u1 = union(&a, &b).unwrap();
        let u2 = union(&b, &a).unwrap();
        for _ in 0..10_000 {
            let x = [rng.gen_range(0.0..2.5), rng.gen_range(0.0..2.5)];
            let in_a = a.contains_point(&x, 0.0);
            let in_b = b.contains_point(&x, 0.0);
            assert_eq!(i1.contains_point(&x, 0.0), in_a && in_b);
            assert_eq!(i2.contains_point(&x, 0.0), in_a && in_b);
            assert_eq!(u1.contains_point(&x, 0.0), in_a || in_b);
            assert_eq!(u2.contains_point(&x, 0.0), in_a || in_b);
        }
    }

    #[test]
    fn three_user_containment() {
        let cube = RateRegion::new(
            3,
            vec![poly(3, &[(&[0], 1.0), (&[1], 1.0), (&[2], 1.0)])],
        );
        let simplex = RateRegion::new(
            3,
            vec![poly(
                3,
                &[(&[0], 1.0), (&[1], 1.0), (&[2], 1.0), (&[0, 1, 2], 1.5)],
            )],
        );
        assert!(region_contains(&cube, &simplex, 1e-9).unwrap());
        assert!(!region_contains(&simplex, &cube, 1e-9).unwrap());
        let k4 = RateRegion::universe(4);
        assert!(matches!(
            region_contains(&k4, &k4, 1e-9),
            Err(RegionError::UnsupportedDimension { k: 4, .. })
        ));
    }
}
