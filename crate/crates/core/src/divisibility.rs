//! Zero-divisor decisions on explicit models.
//!
//! A ring has good divisibility up to degree `r` when `x * y = 0` with
//! `x` in degree `i`, `y` in degree `j`, `i + j <= r` forces `x = 0` or
//! `y = 0`. For a single degree pair the question is whether the bilinear
//! map `CH^i x CH^j -> CH^(i+j)` has a nontrivial zero, which we decide
//! exactly when one side has rank at most two and by a bounded search
//! otherwise. Zero divisors over the rationals give integer ones after
//! clearing denominators, so all exact steps work over `Q`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::families::FamilyError;
use crate::linalg::{self, canonical_cmp};
use crate::poly::{interpolate, Poly};
use crate::ring::{unit_vector, Element, GradedRingModel, RingError};

/// Default coefficient height for the bounded search.
pub const DEFAULT_HEIGHT: u32 = 3;

/// Above this many candidate vectors the bounded search is not attempted.
pub const SEARCH_CANDIDATE_CAP: u128 = 500_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DivError {
    #[error("degree {degree} out of range (cutoff {cutoff})")]
    DegreeOutOfRange { degree: usize, cutoff: usize },
    #[error("search height must be at least 1")]
    InvalidHeight,
    #[error("model too large: {0}")]
    TooLarge(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

pub type Result<T, E = DivError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatus {
    Certified,
    Refuted,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// One side is the zero module.
    Vacuous,
    /// The target degree is the zero module.
    Rank0Target,
    /// Both sides have rank one.
    Rank1Exact,
    /// Kernel of a single integer multiplication matrix.
    MatrixRankExact,
    /// GCD and rational roots of the maximal minors as binary forms.
    BinaryFormExact,
    BoundedSearch,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Vacuous => "vacuous",
            Method::Rank0Target => "rank0-target",
            Method::Rank1Exact => "rank1-exact",
            Method::MatrixRankExact => "matrix-rank-exact",
            Method::BinaryFormExact => "binary-form-exact",
            Method::BoundedSearch => "bounded-search",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub x: Element,
    pub y: Element,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairVerdict {
    pub i: usize,
    pub j: usize,
    pub status: PairStatus,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl PairVerdict {
    fn certified(i: usize, j: usize, method: Method) -> Self {
        PairVerdict { i, j, status: PairStatus::Certified, method, witness: None }
    }

    fn unknown(i: usize, j: usize) -> Self {
        PairVerdict { i, j, status: PairStatus::Unknown, method: Method::BoundedSearch, witness: None }
    }

    /// Builds a refutation after re-verifying it through the ring.
    fn refuted(ring: &GradedRingModel, i: usize, j: usize, method: Method, x: Vec<BigInt>, y: Vec<BigInt>) -> Result<Self> {
        let x = ring.element(i, x)?;
        let y = ring.element(j, y)?;
        verify_witness(ring, &x, &y)?;
        Ok(PairVerdict { i, j, status: PairStatus::Refuted, method, witness: Some(Witness { x, y }) })
    }

    pub fn total_degree(&self) -> usize {
        self.i + self.j
    }
}

/// Checks `x != 0`, `y != 0`, `x * y = 0` and the normalization of both.
pub fn verify_witness(ring: &GradedRingModel, x: &Element, y: &Element) -> Result<()> {
    if x.is_zero() || y.is_zero() {
        return Err(DivError::Internal("witness has a zero factor".into()));
    }
    if !linalg::is_normalized(x.coeffs()) || !linalg::is_normalized(y.coeffs()) {
        return Err(DivError::Internal("witness is not normalized".into()));
    }
    if !ring.mul(x, y)?.is_zero() {
        return Err(DivError::Internal("witness product is nonzero".into()));
    }
    Ok(())
}

/// Canonical nonzero `y` with `x * y = 0` in degree `dy`, if any.
fn annihilated(ring: &GradedRingModel, dx: usize, x: &[BigInt], dy: usize) -> Option<Vec<BigInt>> {
    let cols = ring.rank(dy);
    let m = ring.multiplication_matrix(dx, x, dy);
    if linalg::rank(&m) == cols {
        return None;
    }
    linalg::kernel(&m, cols).into_iter().min_by(|a, b| canonical_cmp(a, b))
}

/// Decides whether a nonzero pair in degrees `(i, j)` multiplies to zero.
pub fn check_pair(ring: &GradedRingModel, i: usize, j: usize, height: u32) -> Result<PairVerdict> {
    let cutoff = ring.cutoff();
    for degree in [i, j] {
        if degree > cutoff {
            return Err(DivError::DegreeOutOfRange { degree, cutoff });
        }
    }
    if height == 0 {
        return Err(DivError::InvalidHeight);
    }
    let (ri, rj) = (ring.rank(i), ring.rank(j));
    if ri == 0 || rj == 0 {
        return Ok(PairVerdict::certified(i, j, Method::Vacuous));
    }
    if ring.rank(i + j) == 0 {
        return PairVerdict::refuted(ring, i, j, Method::Rank0Target, unit_vector(ri, 0), unit_vector(rj, 0));
    }
    // the smaller side is parametrized; ties keep degree i in that role
    let swapped = rj < ri;
    let (dx, dy) = if swapped { (j, i) } else { (i, j) };
    let (rx, ry) = (ring.rank(dx), ring.rank(dy));
    let (method, found) = match rx {
        1 if ry == 1 => (Method::Rank1Exact, annihilated(ring, dx, &[BigInt::one()], dy).map(|y| (vec![BigInt::one()], y))),
        1 => (Method::MatrixRankExact, annihilated(ring, dx, &[BigInt::one()], dy).map(|y| (vec![BigInt::one()], y))),
        2 => (Method::BinaryFormExact, binary_form_witness(ring, dx, dy)),
        _ if ring.rank(dx + dy) < ry => {
            let x = unit_vector(rx, 0);
            let y = annihilated(ring, dx, &x, dy).expect("dimension count forces a kernel");
            (Method::MatrixRankExact, Some((x, y)))
        }
        _ => match bounded_search(ring, dx, dy, height) {
            Some(found) => (Method::BoundedSearch, Some(found)),
            None => return Ok(PairVerdict::unknown(i, j)),
        },
    };
    match found {
        None => Ok(PairVerdict::certified(i, j, method)),
        Some((x, y)) => {
            let (a, b) = if swapped { (y, x) } else { (x, y) };
            PairVerdict::refuted(ring, i, j, method, a, b)
        }
    }
}

/// Exhaustive search over normalized `x` of height at most `h`, in canonical
/// order. Each candidate is screened by a rank computation mod a prime (full
/// rank there implies full rank over `Q`) before the exact kernel test.
fn bounded_search(ring: &GradedRingModel, dx: usize, dy: usize, h: u32) -> Option<(Vec<BigInt>, Vec<BigInt>)> {
    let rx = ring.rank(dx);
    let space = u128::from(2 * h + 1).checked_pow(rx as u32)?;
    if space > SEARCH_CANDIDATE_CAP {
        return None;
    }
    let (ry, rt) = (ring.rank(dy), ring.rank(dx + dy));
    let slices: Vec<Vec<Vec<u64>>> = (0..rx)
        .map(|k| {
            ring.multiplication_matrix(dx, &unit_vector(rx, k), dy)
                .iter()
                .map(|row| row.iter().map(linalg::reduce_mod_p).collect())
                .collect()
        })
        .collect();
    let p = linalg::FILTER_PRIME;
    small_candidates(rx, h).par_iter().find_map_first(|x| {
        let mut m = vec![vec![0u64; ry]; rt];
        for (k, &xk) in x.iter().enumerate() {
            if xk == 0 {
                continue;
            }
            let c = xk.rem_euclid(p as i64) as u64;
            for (row, srow) in m.iter_mut().zip(&slices[k]) {
                for (e, s) in row.iter_mut().zip(srow) {
                    *e = (*e + c * s) % p;
                }
            }
        }
        if linalg::rank_mod_p(&mut m) == ry {
            return None;
        }
        let x: Vec<BigInt> = x.iter().map(|&c| BigInt::from(c)).collect();
        annihilated(ring, dx, &x, dy).map(|y| (x, y))
    })
}

/// Same set and order as [`linalg::normalized_vectors`], as machine integers.
fn small_candidates(len: usize, h: u32) -> Vec<Vec<i64>> {
    let h = i64::from(h);
    let base = 2 * h + 1;
    let total = base.pow(len as u32);
    let mut out: Vec<Vec<i64>> = (0..total)
        .map(|mut index| {
            (0..len)
                .map(|_| {
                    let d = index % base - h;
                    index /= base;
                    d
                })
                .collect::<Vec<i64>>()
        })
        .filter(|v| {
            v.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0) && v.iter().fold(0i64, |g, &c| g.gcd(&c)) == 1
        })
        .collect();
    let key = |v: &[i64]| (v.iter().map(|c| c.abs()).max().unwrap_or(0), v.iter().filter(|&&c| c != 0).count());
    out.sort_unstable_by(|a, b| key(a).cmp(&key(b)).then_with(|| b.cmp(a)));
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..k).rev().find(|&p| cur[p] < n - k + p) else {
            return out;
        };
        cur[pos] += 1;
        for p in pos + 1..k {
            cur[p] = cur[p - 1] + 1;
        }
    }
}

/// Rank-two side: `M(x) = x_1 M_1 + x_2 M_2`. `M(x)` fails to be injective
/// exactly at the common zeros of its maximal minors, which are binary
/// forms in `(x_1, x_2)`; rational zeros come from the linear factors of
/// their GCD (dehomogenized at `x_2 = 1`, plus the point `(1, 0)`).
fn binary_form_witness(ring: &GradedRingModel, dx: usize, dy: usize) -> Option<(Vec<BigInt>, Vec<BigInt>)> {
    let ry = ring.rank(dy);
    let rt = ring.rank(dx + dy);
    let m1 = ring.multiplication_matrix(dx, &unit_vector(2, 0), dy);
    let m2 = ring.multiplication_matrix(dx, &unit_vector(2, 1), dy);
    let at = |t: &BigInt, rows: &[usize]| -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|&r| m1[r].iter().zip(&m2[r]).map(|(a, b)| t * a + b).collect())
            .collect()
    };

    let mut gcd = Poly::zero();
    if rt >= ry {
        for rows in combinations(rt, ry) {
            let points: Vec<(BigInt, BigInt)> = (0..=ry)
                .map(|t| {
                    let t = BigInt::from(t);
                    let det = linalg::determinant(&at(&t, &rows));
                    (t, det)
                })
                .collect();
            gcd = gcd.gcd(&interpolate(&points));
            if gcd.degree() == Some(0) {
                break;
            }
        }
    }
    if gcd.is_zero() {
        // every x is a zero divisor
        let x = unit_vector(2, 0);
        let y = annihilated(ring, dx, &x, dy)?;
        return Some((x, y));
    }

    let mut candidates = Vec::new();
    if linalg::rank(&m1) < ry {
        candidates.push(unit_vector(2, 0));
    }
    if gcd.degree().unwrap_or(0) > 0 {
        for root in gcd.rational_roots() {
            candidates.push(linalg::normalize(&[root.numer().clone(), root.denom().clone()]));
        }
    }
    candidates
        .into_iter()
        .filter_map(|x| annihilated(ring, dx, &x, dy).map(|y| (x, y)))
        .min_by(|a, b| canonical_cmp(&a.0, &b.0))
}

/// Degree pairs `(i, j)` with `i <= j`, `i + j <= max_degree`, both within
/// the cutoff, ordered by total degree and then `i`.
pub fn degree_pairs(ring: &GradedRingModel, max_degree: usize) -> Vec<(usize, usize)> {
    let cutoff = ring.cutoff();
    let mut out = Vec::new();
    for d in 0..=max_degree {
        for i in 0..=d / 2 {
            let j = d - i;
            if j <= cutoff {
                out.push((i, j));
            }
        }
    }
    out
}

/// First refuted pair scanning total degree ascending, then `i` ascending.
/// `max_degree` may exceed the cutoff (up to twice the cutoff), where
/// products land in the zero module.
pub fn find_witness(ring: &GradedRingModel, max_degree: usize, height: u32) -> Result<Option<PairVerdict>> {
    if max_degree > 2 * ring.cutoff() {
        return Err(DivError::DegreeOutOfRange { degree: max_degree, cutoff: 2 * ring.cutoff() });
    }
    for (i, j) in degree_pairs(ring, max_degree) {
        let v = check_pair(ring, i, j, height)?;
        if v.status == PairStatus::Refuted {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "degree", rename_all = "snake_case")]
pub enum AggregateStatus {
    CertifiedUpTo(usize),
    RefutedAt(usize),
    UnknownFrom(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivisibilityVerdict {
    pub max_degree: usize,
    pub height: u32,
    /// Largest `r` such that every pair with `i + j <= r` is certified.
    pub certified_up_to: usize,
    pub status: AggregateStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refutation: Option<PairVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unknown_from: Option<usize>,
    pub pairs: Vec<PairVerdict>,
}

impl DivisibilityVerdict {
    pub fn refuted_at(&self) -> Option<usize> {
        self.refutation.as_ref().map(PairVerdict::total_degree)
    }

    /// True when the certified bound is sharp: the first failing degree is a
    /// refutation rather than an undecided pair.
    pub fn is_exact(&self) -> bool {
        match (self.refuted_at(), self.unknown_from) {
            (Some(r), Some(u)) => r < u,
            (Some(_), None) => true,
            (None, _) => false,
        }
    }

    /// Summary with the pair list dropped.
    pub fn summary(&self) -> CheckerSummary {
        CheckerSummary {
            certified_up_to: self.certified_up_to,
            exact: self.is_exact(),
            refuted_at: self.refuted_at(),
            unknown_from: self.unknown_from,
            witness: self.refutation.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckerSummary {
    pub certified_up_to: usize,
    pub exact: bool,
    pub refuted_at: Option<usize>,
    pub unknown_from: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<PairVerdict>,
}

/// Runs [`check_pair`] on every pair up to one past the cutoff, so a
/// refutation just beyond the certified range is always exhibited.
pub fn gd_bound_checked(ring: &GradedRingModel, height: u32) -> Result<DivisibilityVerdict> {
    gd_bound_checked_to(ring, ring.cutoff() + 1, height)
}

pub fn gd_bound_checked_to(ring: &GradedRingModel, max_degree: usize, height: u32) -> Result<DivisibilityVerdict> {
    if max_degree > 2 * ring.cutoff() + 1 {
        return Err(DivError::DegreeOutOfRange { degree: max_degree, cutoff: 2 * ring.cutoff() + 1 });
    }
    if height == 0 {
        return Err(DivError::InvalidHeight);
    }
    let pairs = degree_pairs(ring, max_degree);
    let verdicts: Vec<PairVerdict> = pairs
        .par_iter()
        .map(|&(i, j)| check_pair(ring, i, j, height))
        .collect::<Result<_>>()?;
    let refutation = verdicts.iter().find(|v| v.status == PairStatus::Refuted).cloned();
    let unknown_from = verdicts.iter().find(|v| v.status == PairStatus::Unknown).map(PairVerdict::total_degree);
    let first_failure = [refutation.as_ref().map(PairVerdict::total_degree), unknown_from]
        .into_iter()
        .flatten()
        .min();
    let certified_up_to = first_failure.map_or(max_degree, |d| d - 1);
    let status = match (refutation.as_ref().map(PairVerdict::total_degree), unknown_from) {
        (Some(r), Some(u)) if u <= r => AggregateStatus::UnknownFrom(u),
        (Some(r), _) => AggregateStatus::RefutedAt(r),
        (None, Some(u)) => AggregateStatus::UnknownFrom(u),
        (None, None) => AggregateStatus::CertifiedUpTo(max_degree),
    };
    Ok(DivisibilityVerdict { max_degree, height, certified_up_to, status, refutation, unknown_from, pairs: verdicts })
}

/// Orders witnesses canonically: by `x`, then by `y`.
pub fn witness_cmp(a: &Witness, b: &Witness) -> Ordering {
    canonical_cmp(a.x.coeffs(), b.x.coeffs()).then_with(|| canonical_cmp(a.y.coeffs(), b.y.coeffs()))
}

/// Height of a witness: the largest absolute coordinate of either factor.
pub fn witness_height(w: &Witness) -> BigInt {
    w.x.coeffs().iter().chain(w.y.coeffs()).map(|c| c.abs()).max().unwrap_or_else(BigInt::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{build_product, build_proj, build_quadric_even, build_quadric_odd};

    fn coords(e: &Element) -> Vec<i64> {
        e.coeffs().iter().map(|c| i64::try_from(c).unwrap()).collect()
    }

    #[test]
    fn proj_pairs() {
        let p3 = build_proj(3).unwrap();
        let v = check_pair(&p3, 1, 2, 3).unwrap();
        assert_eq!(v.status, PairStatus::Certified);
        assert_eq!(v.method, Method::Rank1Exact);
        let v = check_pair(&p3, 2, 2, 3).unwrap();
        assert_eq!(v.status, PairStatus::Refuted);
        assert_eq!(v.method, Method::Rank0Target);
        let w = v.witness.unwrap();
        assert_eq!((w.x.degree(), w.y.degree()), (2, 2));
        assert_eq!(p3.describe(&w.x), "u^2");
        assert!(check_pair(&p3, 4, 0, 3).is_err());
        assert_eq!(check_pair(&p3, 1, 1, 0), Err(DivError::InvalidHeight));
    }

    #[test]
    fn even_quadric_pair_oriented() {
        let q4 = build_quadric_even(4).unwrap();
        let v = check_pair(&q4, 2, 1, 3).unwrap();
        assert_eq!(v.status, PairStatus::Refuted);
        assert_eq!(v.method, Method::MatrixRankExact);
        let w = v.witness.unwrap();
        assert_eq!(coords(&w.x), vec![1, -1]);
        assert_eq!(coords(&w.y), vec![1]);
        assert_eq!(q4.describe(&w.x), "a - b");
        assert_eq!(q4.describe(&w.y), "c");
    }

    #[test]
    fn middle_degree_pair_of_q4_is_binary_form() {
        // a*a = [pt], b*b = [pt], a*b = 0: (x1 a + x2 b)(y1 a + y2 b) = x1 y1 + x2 y2
        // has the zero x = a, y = b.
        let q4 = build_quadric_even(4).unwrap();
        let v = check_pair(&q4, 2, 2, 3).unwrap();
        assert_eq!(v.status, PairStatus::Refuted);
        assert_eq!(v.method, Method::BinaryFormExact);
        let w = v.witness.unwrap();
        assert_eq!(coords(&w.x), vec![1, 0]);
        assert_eq!(coords(&w.y), vec![0, 1]);
    }

    #[test]
    fn binary_form_certifies_definite_form() {
        // P^1 x P^1 in degree (1,1): (x1 U + x2 V)(y1 U + y2 V) = (x1 y2 + x2 y1) UV
        // which has rational zeros (x = U, y = U).
        let p1 = build_proj(1).unwrap();
        let pp = build_product(&p1, &p1).unwrap();
        let v = check_pair(&pp, 1, 1, 3).unwrap();
        assert_eq!(v.status, PairStatus::Refuted);
        let w = v.witness.unwrap();
        assert_eq!(coords(&w.x), vec![1, 0]);
        assert_eq!(coords(&w.y), vec![1, 0]);
    }

    #[test]
    fn find_witness_on_p2_times_p2() {
        let p2 = build_proj(2).unwrap();
        let r = build_product(&p2, &p2).unwrap();
        let v = find_witness(&r, 3, 3).unwrap().unwrap();
        assert_eq!((v.i, v.j), (1, 2));
        let w = v.witness.unwrap();
        assert_eq!(r.describe(&w.x), "u⊗1");
        assert_eq!(r.describe(&w.y), "u^2⊗1");
    }

    #[test]
    fn odd_quadric_has_no_witness() {
        let q5 = build_quadric_odd(5).unwrap();
        assert_eq!(find_witness(&q5, 5, 3).unwrap(), None);
    }

    #[test]
    fn even_quadric_six_witness() {
        let q6 = build_quadric_even(6).unwrap();
        let v = find_witness(&q6, 4, 3).unwrap().unwrap();
        assert_eq!((v.i, v.j), (1, 3));
        let w = v.witness.unwrap();
        assert_eq!(q6.describe(&w.x), "c");
        assert_eq!(q6.describe(&w.y), "a - b");
    }

    #[test]
    fn aggregate_bounds() {
        let p4 = build_proj(4).unwrap();
        let v = gd_bound_checked(&p4, 3).unwrap();
        assert_eq!(v.certified_up_to, 4);
        assert_eq!(v.status, AggregateStatus::RefutedAt(5));
        assert!(v.is_exact());

        let p2 = build_proj(2).unwrap();
        let p3 = build_proj(3).unwrap();
        let v = gd_bound_checked(&build_product(&p2, &p3).unwrap(), 3).unwrap();
        assert_eq!(v.certified_up_to, 2);
        assert_eq!(v.refuted_at(), Some(3));

        let v = gd_bound_checked(&build_quadric_even(4).unwrap(), 3).unwrap();
        assert_eq!(v.certified_up_to, 2);
        assert_eq!(v.status, AggregateStatus::RefutedAt(3));
    }

    #[test]
    fn monotone_in_requested_degree() {
        let q6 = build_quadric_even(6).unwrap();
        let full = gd_bound_checked(&q6, 3).unwrap();
        for r in 0..=full.certified_up_to {
            let sub = gd_bound_checked_to(&q6, r, 3).unwrap();
            assert_eq!(sub.status, AggregateStatus::CertifiedUpTo(r));
        }
    }

    #[test]
    fn small_candidates_match_normalized_vectors() {
        for (len, h) in [(1, 3), (2, 2), (3, 2), (4, 1)] {
            let big: Vec<Vec<BigInt>> = small_candidates(len, h)
                .into_iter()
                .map(|v| v.into_iter().map(BigInt::from).collect())
                .collect();
            assert_eq!(big, linalg::normalized_vectors(len, h));
        }
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert!(combinations(2, 3).is_empty());
    }
}
