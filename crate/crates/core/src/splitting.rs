//! Chern-class side of the splitting criterion: normalized splitting types,
//! truncated factorizations `(1 + c_1 + ... + c_k)(1 + c'_1 + ... + c'_l) = 1`
//! in a ring model, and per-space verdicts.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::certify::{certify_structural, AxiomSet, StructuralCertificate};
use crate::divisibility::DivError;
use crate::families::{FamilyError, FamilyExpr, SpaceSpec};
use crate::linalg::canonical_cmp;
use crate::ring::{Element, GradedRingModel, RingError};

/// Default cap on the number of enumerated candidates.
pub const SEARCH_LIMIT: u128 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SplitError {
    #[error("splitting type must be nonempty")]
    EmptyType,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("search space of {size} candidates exceeds the limit {limit}; lower the height or the ranks")]
    SearchTooLarge { size: String, limit: u128 },
    #[error("component c_{index} has degree {degree}")]
    DegreeMismatch { index: usize, degree: usize },
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Div(#[from] DivError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

pub type Result<T, E = SplitError> = std::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplittingType {
    /// Weakly decreasing, first entry zero.
    pub entries: Vec<i64>,
    /// Amount added to every input entry.
    pub twist: i64,
    /// Number of zero entries.
    pub k: usize,
}

/// Sorts decreasingly and twists so the largest entry becomes zero.
pub fn normalize_splitting_type(raw: &[i64]) -> Result<SplittingType> {
    let max = *raw.iter().max().ok_or(SplitError::EmptyType)?;
    let mut entries: Vec<i64> = raw.iter().map(|a| a - max).collect();
    entries.sort_unstable_by(|a, b| b.cmp(a));
    let k = entries.iter().take_while(|&&a| a == 0).count();
    Ok(SplittingType { entries, twist: -max, k })
}

/// Components of the two factors; `first[i - 1]` has degree `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WhitneyPair {
    pub first: Vec<Element>,
    pub second: Vec<Element>,
}

impl WhitneyPair {
    pub fn is_trivial(&self) -> bool {
        self.first.iter().chain(&self.second).all(Element::is_zero)
    }

    pub fn swapped(&self) -> WhitneyPair {
        WhitneyPair { first: self.second.clone(), second: self.first.clone() }
    }

    fn flat(&self) -> Vec<BigInt> {
        self.first.iter().chain(&self.second).flat_map(|e| e.coeffs().iter().cloned()).collect()
    }
}

/// Canonical order on pairs of equal shape.
pub fn pair_cmp(a: &WhitneyPair, b: &WhitneyPair) -> Ordering {
    canonical_cmp(&a.flat(), &b.flat())
}

fn check_components(ring: &GradedRingModel, comps: &[Element]) -> Result<()> {
    for (idx, c) in comps.iter().enumerate() {
        if c.degree() != idx + 1 {
            return Err(SplitError::DegreeMismatch { index: idx + 1, degree: c.degree() });
        }
        ring.check(c)?;
    }
    Ok(())
}

/// Degree-`d` part of the product for `d = 1..=cutoff`.
pub fn whitney_product(ring: &GradedRingModel, pair: &WhitneyPair) -> Result<Vec<Element>> {
    check_components(ring, &pair.first)?;
    check_components(ring, &pair.second)?;
    let a: Vec<Vec<BigInt>> = pair.first.iter().map(|e| e.coeffs().to_vec()).collect();
    let b: Vec<Vec<BigInt>> = pair.second.iter().map(|e| e.coeffs().to_vec()).collect();
    (1..=ring.cutoff()).map(|d| Ok(ring.element(d, degree_part(ring, &a, &b, d))?)).collect()
}

fn component(side: &[Vec<BigInt>], d: usize) -> Option<&Vec<BigInt>> {
    if d == 0 {
        return None;
    }
    side.get(d - 1)
}

/// `a_d + b_d + sum_{0<i<d} a_i b_(d-i)` as coordinates in degree `d`.
fn degree_part(ring: &GradedRingModel, a: &[Vec<BigInt>], b: &[Vec<BigInt>], d: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); ring.rank(d)];
    for v in [component(a, d), component(b, d)].into_iter().flatten() {
        for (o, c) in out.iter_mut().zip(v) {
            *o += c;
        }
    }
    for i in 1..d {
        if let (Some(x), Some(y)) = (component(a, i), component(b, d - i)) {
            for (o, c) in out.iter_mut().zip(ring.mul_coords(i, x, d - i, y)) {
                *o += c;
            }
        }
    }
    out
}

/// Decodes `index` as a vector of `dims` digits in `[-h, h]`.
fn decode(mut index: u128, dims: usize, h: u32) -> Vec<BigInt> {
    let base = u128::from(2 * h + 1);
    let mut v = Vec::with_capacity(dims);
    for _ in 0..dims {
        v.push(BigInt::from((index % base) as i64 - i64::from(h)));
        index /= base;
    }
    v
}

fn split_by_degree(ring: &GradedRingModel, flat: Vec<BigInt>, len: usize) -> Vec<Vec<BigInt>> {
    let mut it = flat.into_iter();
    (1..=len).map(|d| it.by_ref().take(ring.rank(d)).collect()).collect()
}

/// All nontrivial pairs with components of height at most `h` whose product
/// is `1` in every degree up to the cutoff, in canonical order.
///
/// The side with the smaller coefficient space is enumerated; the other side
/// is then determined degree by degree and kept only if within height.
pub fn find_unit_factorizations(ring: &GradedRingModel, k: usize, l: usize, h: u32) -> Result<Vec<WhitneyPair>> {
    find_unit_factorizations_with_limit(ring, k, l, h, SEARCH_LIMIT)
}

pub fn find_unit_factorizations_with_limit(
    ring: &GradedRingModel,
    k: usize,
    l: usize,
    h: u32,
    limit: u128,
) -> Result<Vec<WhitneyPair>> {
    let cutoff = ring.cutoff();
    if k + l > cutoff {
        return Err(SplitError::Precondition(format!("k + l = {} exceeds the cutoff {cutoff}", k + l)));
    }
    let dims = |len: usize| (1..=len).map(|d| ring.rank(d)).sum::<usize>();
    let (enum_len, solve_len, swapped) = if dims(k) <= dims(l) { (k, l, false) } else { (l, k, true) };
    let enum_dims = dims(enum_len);
    let size = u128::from(2 * h + 1).checked_pow(enum_dims as u32);
    let size = match size {
        Some(s) if s <= limit => s,
        _ => {
            let size = BigInt::from(2 * h + 1).pow(enum_dims as u32);
            return Err(SplitError::SearchTooLarge { size: size.to_string(), limit });
        }
    };
    let bound = BigInt::from(h);
    let solve = |index: u128| -> Option<(Vec<Vec<BigInt>>, Vec<Vec<BigInt>>)> {
        let a = split_by_degree(ring, decode(index, enum_dims, h), enum_len);
        if a.iter().flatten().all(Zero::is_zero) {
            return None;
        }
        let mut b: Vec<Vec<BigInt>> = Vec::with_capacity(solve_len);
        for d in 1..=solve_len {
            // b_d is forced: the degree-d part vanishes iff b_d = -(a_d + sum a_i b_(d-i))
            let rest = degree_part(ring, &a, &b, d);
            let bd: Vec<BigInt> = rest.into_iter().map(|c| -c).collect();
            if bd.iter().any(|c| c.abs() > bound) {
                return None;
            }
            b.push(bd);
        }
        for d in solve_len + 1..=cutoff {
            if degree_part(ring, &a, &b, d).iter().any(|c| !c.is_zero()) {
                return None;
            }
        }
        Some((a, b))
    };
    let found: Vec<(Vec<Vec<BigInt>>, Vec<Vec<BigInt>>)> = (0..size).into_par_iter().filter_map(solve).collect();
    let mut pairs = found
        .into_iter()
        .map(|(a, b)| {
            let (first, second) = if swapped { (b, a) } else { (a, b) };
            Ok(WhitneyPair { first: to_elements(ring, first)?, second: to_elements(ring, second)? })
        })
        .collect::<Result<Vec<_>>>()?;
    pairs.sort_by(pair_cmp);
    Ok(pairs)
}

fn to_elements(ring: &GradedRingModel, comps: Vec<Vec<BigInt>>) -> Result<Vec<Element>> {
    comps
        .into_iter()
        .enumerate()
        .map(|(i, c)| Ok(ring.element(i + 1, c)?))
        .collect()
}

/// Drops pairs that are the factor swap of an earlier pair. Only meaningful
/// when both factors have the same length.
pub fn collapse_swaps(pairs: Vec<WhitneyPair>) -> Vec<WhitneyPair> {
    let mut kept: Vec<WhitneyPair> = Vec::new();
    for p in pairs {
        if !kept.iter().any(|q| *q == p.swapped()) {
            kept.push(p);
        }
    }
    kept
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForcedVanishing {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evidence: Option<WhitneyPair>,
}

/// Whether `(1 + c_1 + ... + c_k)(1 + c'_1 + ... + c'_(r-k)) = 1` forces all
/// components to vanish, among components of height at most `h`.
pub fn forced_vanishing_holds(ring: &GradedRingModel, r: usize, k: usize, h: u32) -> Result<ForcedVanishing> {
    if r > ring.cutoff() {
        return Err(SplitError::Precondition(format!("r = {r} exceeds the cutoff {}", ring.cutoff())));
    }
    if k < 1 || k >= r {
        return Err(SplitError::Precondition(format!("need 1 <= k < r, got k = {k}, r = {r}")));
    }
    let found = find_unit_factorizations(ring, k, r - k, h)?;
    Ok(ForcedVanishing { holds: found.is_empty(), evidence: found.into_iter().next() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitStatus {
    Splits,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitVerdict {
    pub space: SpaceSpec,
    pub rank: usize,
    pub status: SplitStatus,
    pub bound: usize,
    pub axioms: AxiomSet,
    pub provenance: StructuralCertificate,
}

/// Uniform bundles of rank at most the VMRT bound split; above it nothing
/// is concluded.
pub fn splitting_verdict(space: &SpaceSpec, rank: usize, axioms: AxiomSet) -> Result<SplitVerdict> {
    if rank < 1 {
        return Err(SplitError::Precondition("rank must be at least 1".into()));
    }
    space.validate()?;
    let provenance = certify_structural(&FamilyExpr::Vmrt { space: *space }, axioms)?;
    let bound = provenance.bound;
    let status = if rank <= bound { SplitStatus::Splits } else { SplitStatus::Unknown };
    Ok(SplitVerdict { space: *space, rank, status, bound, axioms, provenance })
}
