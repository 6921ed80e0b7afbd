//! Constructors for the Chow rings of projective spaces, quadrics, products
//! and projective bundles, plus the VMRT presets of the classical
//! homogeneous spaces.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ring::{unit_vector, Element, GradedRingModel, RingError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("chern data: {0}")]
    Chern(String),
    #[error("cannot parse space spec `{0}`")]
    SpaceSyntax(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

pub type Result<T, E = FamilyError> = std::result::Result<T, E>;

fn invalid(msg: impl Into<String>) -> FamilyError {
    FamilyError::InvalidParameter(msg.into())
}

/// Expression naming a ring family. Serialized with a `type` tag, e.g.
/// `{"type":"product","left":{"type":"proj","m":2},"right":{"type":"quadric_odd","m":3}}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyExpr {
    Proj {
        m: usize,
    },
    QuadricOdd {
        m: usize,
    },
    QuadricEven {
        m: usize,
    },
    Product {
        left: Box<FamilyExpr>,
        right: Box<FamilyExpr>,
    },
    /// `chern[i-1]` holds the coordinates of `c_i` in the base's degree-`i`
    /// basis (an empty list when `i` exceeds the base cutoff).
    ProjBundle {
        base: Box<FamilyExpr>,
        rank: usize,
        chern: Vec<Vec<i64>>,
    },
    Veronese2 {
        m: usize,
    },
    Vmrt {
        space: SpaceSpec,
    },
}

impl FamilyExpr {
    pub fn proj(m: usize) -> Self {
        FamilyExpr::Proj { m }
    }

    pub fn quadric(m: usize) -> Self {
        if m % 2 == 1 {
            FamilyExpr::QuadricOdd { m }
        } else {
            FamilyExpr::QuadricEven { m }
        }
    }

    pub fn product(left: FamilyExpr, right: FamilyExpr) -> Self {
        FamilyExpr::Product { left: Box::new(left), right: Box::new(right) }
    }

    pub fn bundle(base: FamilyExpr, rank: usize, chern: Vec<Vec<i64>>) -> Self {
        FamilyExpr::ProjBundle { base: Box::new(base), rank, chern }
    }

    /// `P(O(a_1) + ... + O(a_N))` over `P^m`, with Chern classes the
    /// elementary symmetric functions of the `a_i h`.
    pub fn split_bundle_over_proj(m: usize, twists: &[i64]) -> Self {
        let n = twists.len();
        let mut chern = Vec::with_capacity(n);
        for i in 1..=n {
            if i > m {
                chern.push(Vec::new());
            } else {
                chern.push(vec![elementary_symmetric(twists, i)]);
            }
        }
        FamilyExpr::bundle(FamilyExpr::proj(m), n, chern)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let e: FamilyExpr = serde_json::from_str(text).map_err(|e| invalid(format!("family expression: {e}")))?;
        e.validate()?;
        Ok(e)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("family expressions always serialize")
    }

    /// Checks parameter ranges throughout the tree.
    pub fn validate(&self) -> Result<()> {
        match self {
            FamilyExpr::Proj { m } | FamilyExpr::Veronese2 { m } if *m < 1 => Err(invalid("dimension must be at least 1")),
            FamilyExpr::Veronese2 { m } if *m < 2 => Err(invalid("veronese2 needs m >= 2")),
            FamilyExpr::Proj { .. } | FamilyExpr::Veronese2 { .. } => Ok(()),
            FamilyExpr::QuadricOdd { m } if m % 2 == 0 => Err(invalid(format!("quadric_odd needs odd m, got {m}"))),
            FamilyExpr::QuadricOdd { .. } => Ok(()),
            FamilyExpr::QuadricEven { m } if m % 2 == 1 || *m < 2 => {
                Err(invalid(format!("quadric_even needs even m >= 2, got {m}")))
            }
            FamilyExpr::QuadricEven { .. } => Ok(()),
            FamilyExpr::Product { left, right } => {
                left.validate()?;
                right.validate()
            }
            FamilyExpr::ProjBundle { base, rank, chern } => {
                base.validate()?;
                if *rank < 2 {
                    return Err(invalid(format!("bundle rank must be at least 2, got {rank}")));
                }
                if chern.len() != *rank {
                    return Err(FamilyError::Chern(format!("{} classes given for rank {rank}", chern.len())));
                }
                let ranks = base.ranks();
                for (k, c) in chern.iter().enumerate() {
                    let expected = ranks.get(k + 1).copied().unwrap_or(0);
                    if c.len() != expected {
                        return Err(FamilyError::Chern(format!(
                            "c_{} has {} coordinates, base degree-{} rank is {expected}",
                            k + 1,
                            c.len(),
                            k + 1
                        )));
                    }
                }
                Ok(())
            }
            FamilyExpr::Vmrt { space } => space.validate(),
        }
    }

    /// Rank vector of the model, computed without building any tables.
    pub fn ranks(&self) -> Vec<usize> {
        match self {
            FamilyExpr::Proj { m } => vec![1; m + 1],
            FamilyExpr::Veronese2 { m } => vec![1; *m],
            FamilyExpr::QuadricOdd { m } => vec![1; m + 1],
            FamilyExpr::QuadricEven { m } => {
                let mut r = vec![1; m + 1];
                r[m / 2] = 2;
                r
            }
            FamilyExpr::Product { left, right } => kunneth_ranks(&left.ranks(), &right.ranks()),
            FamilyExpr::ProjBundle { base, rank, .. } => bundle_ranks(&base.ranks(), *rank),
            FamilyExpr::Vmrt { space } => match space.vmrt() {
                Ok(e) => e.ranks(),
                Err(_) => Vec::new(),
            },
        }
    }

    /// Number of structure constants a built model would store.
    pub fn table_entries(&self) -> usize {
        let r = self.ranks();
        let d = r.len().saturating_sub(1);
        let mut total = 0usize;
        for i in 0..=d {
            for j in 0..=d - i {
                total = total.saturating_add(r[i] * r[j] * r[i + j]);
            }
        }
        total
    }
}

impl fmt::Display for FamilyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyExpr::Proj { m } => write!(f, "P^{m}"),
            FamilyExpr::QuadricOdd { m } | FamilyExpr::QuadricEven { m } => write!(f, "Q^{m}"),
            FamilyExpr::Product { left, right } => write!(f, "{left} x {right}"),
            FamilyExpr::ProjBundle { base, rank, .. } => write!(f, "P(rank {rank} over {base})"),
            FamilyExpr::Veronese2 { m } => write!(f, "v2(P^{})", m - 1),
            FamilyExpr::Vmrt { space } => write!(f, "VMRT[{space}]"),
        }
    }
}

/// Rank-per-degree of a tensor product of graded free modules.
pub fn kunneth_ranks(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, ra) in a.iter().enumerate() {
        for (j, rb) in b.iter().enumerate() {
            out[i + j] += ra * rb;
        }
    }
    out
}

/// Rank-per-degree of `base[u]/(degree-n monic relation)`.
pub fn bundle_ranks(base: &[usize], n: usize) -> Vec<usize> {
    let cutoff = base.len() - 1 + n - 1;
    (0..=cutoff)
        .map(|d| (0..n).filter(|&t| t <= d && d - t < base.len()).map(|t| base[d - t]).sum())
        .collect()
}

fn elementary_symmetric(xs: &[i64], k: usize) -> i64 {
    // e_k via the usual DP over prefixes
    let mut e = vec![0i64; k + 1];
    e[0] = 1;
    for &x in xs {
        for j in (1..=k).rev() {
            e[j] += e[j - 1] * x;
        }
    }
    e[k]
}

fn power_label(var: &str, e: usize) -> String {
    match e {
        0 => "1".to_string(),
        1 => var.to_string(),
        _ => format!("{var}^{e}"),
    }
}

fn scalar_vec(len: usize, index: usize, k: i64) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); len];
    v[index] = BigInt::from(k);
    v
}

/// `Z[u]/(u^(m+1))`.
pub fn build_proj(m: usize) -> Result<GradedRingModel> {
    if m < 1 {
        return Err(invalid("projective space needs m >= 1"));
    }
    let labels = (0..=m).map(|e| vec![power_label("u", e)]).collect();
    Ok(GradedRingModel::tabulate(m, vec![1; m + 1], labels, |_, _, _, _| vec![BigInt::one()])?)
}

/// Odd-dimensional quadric `Q^(2n+1)` in the integral basis `g_d`, where
/// `g_d = h^d` for `d <= n` and `g_d = h^d / 2` for `d >= n + 1`. The factor 2
/// appears exactly when two classes of degree at most `n` multiply into the
/// upper half.
pub fn build_quadric_odd(m: usize) -> Result<GradedRingModel> {
    if m.is_multiple_of(2) {
        return Err(invalid(format!("odd quadric needs odd dimension, got {m}")));
    }
    let n = (m - 1) / 2;
    let labels = (0..=m).map(|d| vec![if d == 0 { "1".to_string() } else { format!("g{d}") }]).collect();
    Ok(GradedRingModel::tabulate(m, vec![1; m + 1], labels, |i, _, j, _| {
        let kappa = if i <= n && j <= n && i + j > n { 2 } else { 1 };
        vec![BigInt::from(kappa)]
    })?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EvenQuadricBasis {
    /// `c^i`, `0 <= i < n`
    Power(usize),
    A,
    B,
    /// `f_d = c^(d-n) a`, `n < d <= 2n`
    Upper(usize),
}

/// Even-dimensional quadric `Q^(2n)`: `c^i` below the middle, the two ruling
/// classes `a, b` in degree `n`, and `f_(n+j) = c^j a` above, with
/// `c a = c b`, `c^n = a + b`, and `a^2 = b^2 = f_2n, ab = 0` for even `n`
/// (`a^2 = b^2 = 0, ab = f_2n` for odd `n`).
pub fn build_quadric_even(m: usize) -> Result<GradedRingModel> {
    if m % 2 == 1 || m < 2 {
        return Err(invalid(format!("even quadric needs even dimension >= 2, got {m}")));
    }
    let n = m / 2;
    let mut ranks = vec![1; m + 1];
    ranks[n] = 2;
    let labels: Vec<Vec<String>> = (0..=m)
        .map(|d| match d.cmp(&n) {
            std::cmp::Ordering::Less => vec![power_label("c", d)],
            std::cmp::Ordering::Equal => vec!["a".to_string(), "b".to_string()],
            std::cmp::Ordering::Greater => vec![format!("{}*a", power_label("c", d - n))],
        })
        .collect();
    let basis = |d: usize, p: usize| match d.cmp(&n) {
        std::cmp::Ordering::Less => EvenQuadricBasis::Power(d),
        std::cmp::Ordering::Equal if p == 0 => EvenQuadricBasis::A,
        std::cmp::Ordering::Equal => EvenQuadricBasis::B,
        std::cmp::Ordering::Greater => EvenQuadricBasis::Upper(d),
    };
    let eps = i64::from(n.is_multiple_of(2));
    let ranks_for_rule = ranks.clone();
    let rule = move |i: usize, p: usize, j: usize, q: usize| -> Vec<BigInt> {
        use EvenQuadricBasis::*;
        let d = i + j;
        let out = ranks_for_rule[d];
        match (basis(i, p), basis(j, q)) {
            (Power(0), _) => unit_vector(out, q),
            (_, Power(0)) => unit_vector(out, p),
            (Power(_), Power(_)) => match d.cmp(&n) {
                std::cmp::Ordering::Less => unit_vector(out, 0),
                std::cmp::Ordering::Equal => vec![BigInt::one(), BigInt::one()],
                std::cmp::Ordering::Greater => scalar_vec(out, 0, 2),
            },
            (Power(_), A | B) | (A | B, Power(_)) => unit_vector(out, 0),
            (Power(_), Upper(_)) | (Upper(_), Power(_)) => unit_vector(out, 0),
            (A, A) | (B, B) => scalar_vec(out, 0, eps),
            (A, B) | (B, A) => scalar_vec(out, 0, 1 - eps),
            // everything else lands above the cutoff and is never asked for
            _ => vec![BigInt::zero(); out],
        }
    };
    Ok(GradedRingModel::tabulate(m, ranks, labels, rule)?)
}

/// Basis of degree `d` in a product: pairs `(left, right)` ordered by
/// descending left degree, then left index, then right index.
fn product_basis(a: &[usize], b: &[usize], d: usize) -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::new();
    for da in (0..=d.min(a.len() - 1)).rev() {
        let db = d - da;
        if db >= b.len() {
            continue;
        }
        for p in 0..a[da] {
            for q in 0..b[db] {
                out.push((da, p, db, q));
            }
        }
    }
    out
}

fn tensor_label(l: &str, r: &str) -> String {
    if l == "1" && r == "1" {
        "1".to_string()
    } else {
        format!("{l}⊗{r}")
    }
}

/// `CH*(A) ⊗ CH*(B)` with `(α⊗β)(α'⊗β') = (αα')⊗(ββ')`.
pub fn build_product(a: &GradedRingModel, b: &GradedRingModel) -> Result<GradedRingModel> {
    let cutoff = a.cutoff() + b.cutoff();
    let bases: Vec<_> = (0..=cutoff).map(|d| product_basis(a.ranks(), b.ranks(), d)).collect();
    let ranks: Vec<usize> = bases.iter().map(Vec::len).collect();
    let labels = bases
        .iter()
        .map(|basis| {
            basis
                .iter()
                .map(|&(da, p, db, q)| tensor_label(a.label(da, p), b.label(db, q)))
                .collect()
        })
        .collect();
    let rule = |i: usize, p: usize, j: usize, q: usize| -> Vec<BigInt> {
        let (da, pa, db, pb) = bases[i][p];
        let (ea, qa, eb, qb) = bases[j][q];
        let mut out = vec![BigInt::zero(); bases[i + j].len()];
        let left = a.mul_coords(da, &unit_vector(a.rank(da), pa), ea, &unit_vector(a.rank(ea), qa));
        let right = b.mul_coords(db, &unit_vector(b.rank(db), pb), eb, &unit_vector(b.rank(eb), qb));
        if left.is_empty() || right.is_empty() {
            return out;
        }
        for (r, (fa, ra, fb, rb)) in bases[i + j].iter().enumerate() {
            if *fa == da + ea && *fb == db + eb {
                out[r] = &left[*ra] * &right[*rb];
            }
        }
        out
    };
    Ok(GradedRingModel::tabulate(cutoff, ranks, labels, rule)?)
}

/// Chern classes `c_1..c_N` of a rank-`N` bundle over a base model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChernSpec {
    classes: Vec<Element>,
}

impl ChernSpec {
    pub fn new(base: &GradedRingModel, classes: Vec<Element>) -> Result<Self> {
        if classes.len() < 2 {
            return Err(invalid(format!("bundle rank must be at least 2, got {}", classes.len())));
        }
        for (k, c) in classes.iter().enumerate() {
            if c.degree() != k + 1 {
                return Err(FamilyError::Chern(format!("c_{} has degree {}", k + 1, c.degree())));
            }
            base.check(c).map_err(|e| FamilyError::Chern(format!("c_{}: {e}", k + 1)))?;
        }
        Ok(ChernSpec { classes })
    }

    pub fn from_coords(base: &GradedRingModel, coords: &[Vec<i64>]) -> Result<Self> {
        let classes = coords
            .iter()
            .enumerate()
            .map(|(k, c)| base.element_i64(k + 1, c).map_err(|e| FamilyError::Chern(format!("c_{}: {e}", k + 1))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(base, classes)
    }

    pub fn rank(&self) -> usize {
        self.classes.len()
    }

    /// `c_i` for `1 <= i <= rank`.
    pub fn class(&self, i: usize) -> &Element {
        &self.classes[i - 1]
    }
}

/// Label of the tautological class of a projective bundle.
pub const BUNDLE_VAR: &str = "z";

/// `CH*(X)[z] / (z^N + c_1 z^(N-1) + ... + c_N)`.
///
/// Degree-`d` basis: `β z^t` for `t = 0..N-1` ascending, then the base basis
/// of degree `d - t` in order.
pub fn build_proj_bundle(base: &GradedRingModel, chern: &ChernSpec) -> Result<GradedRingModel> {
    let n = chern.rank();
    let db = base.cutoff();
    let cutoff = db + n - 1;
    let bases: Vec<Vec<(usize, usize)>> = (0..=cutoff)
        .map(|d| {
            (0..n)
                .filter(|&t| t <= d && d - t <= db)
                .flat_map(|t| (0..base.rank(d - t)).map(move |p| (t, p)))
                .collect()
        })
        .collect();
    let ranks: Vec<usize> = bases.iter().map(Vec::len).collect();
    let labels = bases
        .iter()
        .enumerate()
        .map(|(d, basis)| {
            basis
                .iter()
                .map(|&(t, p)| {
                    let beta = base.label(d - t, p);
                    match (t, beta) {
                        (0, _) => beta.to_string(),
                        (_, "1") => power_label(BUNDLE_VAR, t),
                        _ => format!("{beta}*{}", power_label(BUNDLE_VAR, t)),
                    }
                })
                .collect()
        })
        .collect();

    // red[p][k]: coordinates (base degree p - k) of the z^k coefficient of z^p
    let max_power = 2 * (n - 1);
    let coeff_rank = |p: usize, k: usize| if k <= p { base.rank(p - k) } else { 0 };
    let mut red: Vec<Vec<Vec<BigInt>>> = Vec::with_capacity(max_power + 1);
    for p in 0..n.min(max_power + 1) {
        red.push((0..n).map(|k| if k == p { vec![BigInt::one()] } else { vec![BigInt::zero(); coeff_rank(p, k)] }).collect());
    }
    for p in n..=max_power {
        let prev = &red[p - 1];
        let mut next: Vec<Vec<BigInt>> = (0..n).map(|k| vec![BigInt::zero(); coeff_rank(p, k)]).collect();
        for k in 0..n - 1 {
            for (dst, src) in next[k + 1].iter_mut().zip(&prev[k]) {
                *dst += src;
            }
        }
        // z^(N-1) coefficient times z^N = -(c_1 z^(N-1) + ... + c_N)
        let top = &prev[n - 1];
        let top_degree = p - n;
        for i in 1..=n {
            let c = chern.class(i);
            let prod = base.mul_coords(top_degree, top, i, c.coeffs());
            for (dst, src) in next[n - i].iter_mut().zip(prod) {
                *dst -= src;
            }
        }
        red.push(next);
    }

    let rule = |i: usize, p: usize, j: usize, q: usize| -> Vec<BigInt> {
        let d = i + j;
        let (s, bp) = bases[i][p];
        let (t, bq) = bases[j][q];
        let (ai, aj) = (i - s, j - t);
        let gamma = base.mul_coords(ai, &unit_vector(base.rank(ai), bp), aj, &unit_vector(base.rank(aj), bq));
        let mut out = vec![BigInt::zero(); bases[d].len()];
        if gamma.is_empty() {
            return out;
        }
        let power = s + t;
        for k in 0..n {
            if k > d {
                break;
            }
            let coeff = &red[power][k];
            if coeff.is_empty() || coeff.iter().all(Zero::is_zero) {
                continue;
            }
            let prod = base.mul_coords(ai + aj, &gamma, power - k, coeff);
            for (r, c) in prod.into_iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let idx = bases[d].iter().position(|&(tt, pp)| tt == k && pp == r).expect("basis element present");
                out[idx] += c;
            }
        }
        out
    };
    Ok(GradedRingModel::tabulate(cutoff, ranks, labels, rule)?)
}

/// Builds the model named by an expression. Equal expressions give identical
/// models; `veronese2(m)` is the `P^(m-1)` model.
pub fn build_family(expr: &FamilyExpr) -> Result<GradedRingModel> {
    expr.validate()?;
    build_unchecked(expr)
}

fn build_unchecked(expr: &FamilyExpr) -> Result<GradedRingModel> {
    match expr {
        FamilyExpr::Proj { m } => build_proj(*m),
        FamilyExpr::QuadricOdd { m } => build_quadric_odd(*m),
        FamilyExpr::QuadricEven { m } => build_quadric_even(*m),
        FamilyExpr::Product { left, right } => build_product(&build_unchecked(left)?, &build_unchecked(right)?),
        FamilyExpr::ProjBundle { base, chern, .. } => {
            let base = build_unchecked(base)?;
            let spec = ChernSpec::from_coords(&base, chern)?;
            build_proj_bundle(&base, &spec)
        }
        FamilyExpr::Veronese2 { m } => build_proj(m - 1),
        FamilyExpr::Vmrt { space } => build_unchecked(&space.vmrt()?),
    }
}

/// The classical homogeneous spaces of Picard number one whose VMRTs are
/// modeled. `OG` and `SG` carry `n = 2m - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum SpaceSpec {
    #[serde(rename = "P")]
    Projective { n: usize },
    #[serde(rename = "Q")]
    Quadric { n: usize },
    #[serde(rename = "G")]
    Grassmannian { k: usize, n: usize },
    #[serde(rename = "OG")]
    OrthogonalGrassmannian { k: usize, n: usize },
    #[serde(rename = "SG")]
    SymplecticGrassmannian { k: usize, n: usize },
    /// `SG(m-1, 2m-1)`.
    #[serde(rename = "SGmax")]
    SymplecticMaximal { m: usize },
}

impl SpaceSpec {
    fn half(n: usize) -> Result<usize> {
        if n.is_multiple_of(2) {
            return Err(invalid(format!("n = 2m - 1 must be odd, got {n}")));
        }
        Ok(n.div_ceil(2))
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SpaceSpec::Projective { n } if n < 2 => Err(invalid(format!("P^n needs n >= 2, got {n}"))),
            SpaceSpec::Quadric { n } if n < 3 => Err(invalid(format!("Q^n needs n >= 3, got {n}"))),
            SpaceSpec::Grassmannian { k, n } if k < 1 || k + 2 > n => {
                Err(invalid(format!("G(k,n) needs 1 <= k <= n-2, got k={k}, n={n}")))
            }
            SpaceSpec::OrthogonalGrassmannian { k, n } | SpaceSpec::SymplecticGrassmannian { k, n } => {
                let m = Self::half(n)?;
                if k < 1 || k + 2 > m {
                    return Err(invalid(format!("needs 1 <= k <= m-2 with n = 2m-1, got k={k}, m={m}")));
                }
                Ok(())
            }
            SpaceSpec::SymplecticMaximal { m } if m < 2 => Err(invalid(format!("SG(m-1,2m-1) needs m >= 2, got {m}"))),
            _ => Ok(()),
        }
    }

    /// The VMRT column of the classification table.
    pub fn vmrt(&self) -> Result<FamilyExpr> {
        self.validate()?;
        Ok(match *self {
            SpaceSpec::Projective { n } => FamilyExpr::proj(n - 1),
            SpaceSpec::Quadric { n } => FamilyExpr::quadric(n - 2),
            SpaceSpec::Grassmannian { k, n } => FamilyExpr::product(FamilyExpr::proj(k), FamilyExpr::proj(n - k - 1)),
            SpaceSpec::OrthogonalGrassmannian { k, n } => {
                let m = Self::half(n)?;
                FamilyExpr::product(FamilyExpr::proj(k), FamilyExpr::QuadricOdd { m: 2 * m - 2 * k - 3 })
            }
            SpaceSpec::SymplecticGrassmannian { k, n } => {
                let m = Self::half(n)?;
                let mut twists = vec![2];
                twists.extend(std::iter::repeat_n(1, 2 * m - 2 * k - 2));
                FamilyExpr::split_bundle_over_proj(m, &twists)
            }
            SpaceSpec::SymplecticMaximal { m } => FamilyExpr::Veronese2 { m },
        })
    }

    /// `s(X)` from the closed-form column of the classification table.
    pub fn table_bound(&self) -> Result<usize> {
        self.validate()?;
        Ok(match *self {
            SpaceSpec::Projective { n } => n - 1,
            SpaceSpec::Quadric { n } if n % 2 == 1 => n - 2,
            SpaceSpec::Quadric { n } => n - 3,
            SpaceSpec::Grassmannian { k, n } => k.min(n - k - 1),
            SpaceSpec::OrthogonalGrassmannian { k, n } => {
                let m = Self::half(n)?;
                k.min(2 * m - 2 * k - 3)
            }
            SpaceSpec::SymplecticGrassmannian { k, n } => {
                let m = Self::half(n)?;
                m.min(2 * m - 2 * k - 2)
            }
            SpaceSpec::SymplecticMaximal { m } => m - 1,
        })
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSpec::Projective { n } => write!(f, "P^{n}"),
            SpaceSpec::Quadric { n } => write!(f, "Q^{n}"),
            SpaceSpec::Grassmannian { k, n } => write!(f, "G({k},{n})"),
            SpaceSpec::OrthogonalGrassmannian { k, n } => write!(f, "OG({k},{n})"),
            SpaceSpec::SymplecticGrassmannian { k, n } => write!(f, "SG({k},{n})"),
            SpaceSpec::SymplecticMaximal { m } => write!(f, "SGmax({m})"),
        }
    }
}

/// Parses the comma form used on the command line: `P,5`, `Q,7`, `G,2,5`,
/// `OG,2,9`, `SG,2,9`, `SGmax,4`.
impl FromStr for SpaceSpec {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let num = |k: usize| -> Result<usize> {
            parts.get(k).and_then(|p| p.parse().ok()).ok_or_else(|| FamilyError::SpaceSyntax(s.to_string()))
        };
        let arity = |n: usize| -> Result<()> {
            if parts.len() == n { Ok(()) } else { Err(FamilyError::SpaceSyntax(s.to_string())) }
        };
        let spec = match parts[0] {
            "P" => {
                arity(2)?;
                SpaceSpec::Projective { n: num(1)? }
            }
            "Q" => {
                arity(2)?;
                SpaceSpec::Quadric { n: num(1)? }
            }
            "G" => {
                arity(3)?;
                SpaceSpec::Grassmannian { k: num(1)?, n: num(2)? }
            }
            "OG" => {
                arity(3)?;
                SpaceSpec::OrthogonalGrassmannian { k: num(1)?, n: num(2)? }
            }
            "SG" => {
                arity(3)?;
                SpaceSpec::SymplecticGrassmannian { k: num(1)?, n: num(2)? }
            }
            "SGmax" => {
                arity(2)?;
                SpaceSpec::SymplecticMaximal { m: num(1)? }
            }
            _ => return Err(FamilyError::SpaceSyntax(s.to_string())),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::verify_ring_axioms;

    fn scalar(r: &GradedRingModel, d: usize, k: i64) -> Element {
        r.element_i64(d, &[k]).unwrap()
    }

    #[test]
    fn projective_space() {
        let p3 = build_proj(3).unwrap();
        assert_eq!(p3.ranks(), &[1, 1, 1, 1]);
        let u = p3.basis(1, 0).unwrap();
        let u2 = p3.basis(2, 0).unwrap();
        assert_eq!(p3.mul(&u, &u2).unwrap(), p3.basis(3, 0).unwrap());
        let p1 = build_proj(1).unwrap();
        let v = p1.basis(1, 0).unwrap();
        assert!(p1.mul(&v, &v).unwrap().is_zero());
        let p4 = build_proj(4).unwrap();
        let w = p4.basis(2, 0).unwrap();
        assert!(!p4.mul(&w, &w).unwrap().is_zero());
        assert!(build_proj(0).is_err());
    }

    #[test]
    fn odd_quadric_products() {
        let q3 = build_quadric_odd(3).unwrap();
        let g1 = q3.basis(1, 0).unwrap();
        let g2 = q3.basis(2, 0).unwrap();
        assert_eq!(q3.mul(&g1, &g1).unwrap(), scalar(&q3, 2, 2));
        assert_eq!(q3.mul(&g1, &g2).unwrap(), scalar(&q3, 3, 1));
        let q5 = build_quadric_odd(5).unwrap();
        let g1 = q5.basis(1, 0).unwrap();
        let g2 = q5.basis(2, 0).unwrap();
        assert_eq!(q5.mul(&g1, &g2).unwrap(), scalar(&q5, 3, 2));
        assert!(build_quadric_odd(4).is_err());
    }

    #[test]
    fn even_quadric_relations() {
        let q4 = build_quadric_even(4).unwrap();
        let a = q4.basis(2, 0).unwrap();
        let b = q4.basis(2, 1).unwrap();
        let c = q4.basis(1, 0).unwrap();
        assert_eq!(q4.mul(&a, &a).unwrap(), q4.basis(4, 0).unwrap());
        assert!(q4.mul(&a, &b).unwrap().is_zero());
        assert_eq!(q4.mul(&c, &a).unwrap(), q4.mul(&c, &b).unwrap());
        let a_minus_b = a.checked_sub(&b).unwrap();
        assert!(!a_minus_b.is_zero());
        assert!(q4.mul(&a_minus_b, &c).unwrap().is_zero());
        assert_eq!(q4.describe(&a_minus_b), "a - b");
        // c^n = a + b
        assert_eq!(q4.pow(&c, 2).unwrap(), a.checked_add(&b).unwrap());

        let q6 = build_quadric_even(6).unwrap();
        let a = q6.basis(3, 0).unwrap();
        let b = q6.basis(3, 1).unwrap();
        assert!(q6.mul(&a, &a).unwrap().is_zero());
        assert_eq!(q6.mul(&a, &b).unwrap(), q6.basis(6, 0).unwrap());
        assert!(build_quadric_even(5).is_err());
    }

    #[test]
    fn product_ranks_and_mixed_term() {
        let p1 = build_proj(1).unwrap();
        let pp = build_product(&p1, &p1).unwrap();
        assert_eq!(pp.ranks(), &[1, 2, 1]);
        assert_eq!(pp.basis_labels()[1], vec!["u⊗1".to_string(), "1⊗u".to_string()]);
        let x = pp.basis(1, 0).unwrap();
        let y = pp.basis(1, 1).unwrap();
        assert_eq!(pp.mul(&x, &y).unwrap(), pp.basis(2, 0).unwrap());
        let p2 = build_proj(2).unwrap();
        assert_eq!(build_product(&p2, &p2).unwrap().rank(2), 3);
    }

    #[test]
    fn bundle_over_p2_square_zero() {
        let expr = FamilyExpr::split_bundle_over_proj(2, &[1, 1]);
        let r = build_family(&expr).unwrap();
        assert_eq!(r.ranks(), &[1, 2, 2, 1]);
        assert_eq!(r.basis_labels()[1], vec!["u".to_string(), "z".to_string()]);
        assert_eq!(r.basis_labels()[2], vec!["u^2".to_string(), "u*z".to_string()]);
        let u_plus_h = r.element_i64(1, &[1, 1]).unwrap();
        assert!(r.mul(&u_plus_h, &u_plus_h).unwrap().is_zero());
        assert!(verify_ring_axioms(&r).is_empty());
    }

    #[test]
    fn bundle_keeps_base_relation() {
        let r = build_family(&FamilyExpr::split_bundle_over_proj(1, &[2, 1])).unwrap();
        let h = r.basis(1, 0).unwrap();
        assert_eq!(r.label(1, 0), "u");
        assert!(r.mul(&h, &h).unwrap().is_zero());
    }

    #[test]
    fn sg_row_chern_classes() {
        // O(2) + O(1)^4 over P^5: c_i = C(4,i) + 2 C(4,i-1)
        let FamilyExpr::ProjBundle { rank, chern, .. } = SpaceSpec::SymplecticGrassmannian { k: 2, n: 9 }.vmrt().unwrap()
        else {
            panic!("expected bundle")
        };
        assert_eq!(rank, 5);
        assert_eq!(chern, vec![vec![6], vec![14], vec![16], vec![9], vec![2]]);
    }

    #[test]
    fn vmrt_presets() {
        let g25 = SpaceSpec::Grassmannian { k: 2, n: 5 }.vmrt().unwrap();
        assert_eq!(g25, FamilyExpr::product(FamilyExpr::proj(2), FamilyExpr::proj(2)));
        let og = SpaceSpec::OrthogonalGrassmannian { k: 2, n: 9 }.vmrt().unwrap();
        assert_eq!(og, FamilyExpr::product(FamilyExpr::proj(2), FamilyExpr::QuadricOdd { m: 3 }));
        assert_eq!(SpaceSpec::Quadric { n: 7 }.vmrt().unwrap(), FamilyExpr::QuadricOdd { m: 5 });
        assert_eq!(SpaceSpec::Quadric { n: 6 }.vmrt().unwrap(), FamilyExpr::QuadricEven { m: 4 });
        assert_eq!(SpaceSpec::Projective { n: 7 }.vmrt().unwrap(), FamilyExpr::proj(6));
        assert!(SpaceSpec::OrthogonalGrassmannian { k: 4, n: 9 }.vmrt().is_err());
        assert!(SpaceSpec::SymplecticGrassmannian { k: 1, n: 8 }.vmrt().is_err());
    }

    #[test]
    fn veronese_is_projective_alias() {
        let v = build_family(&FamilyExpr::Veronese2 { m: 4 }).unwrap();
        assert_eq!(v, build_proj(3).unwrap());
    }

    #[test]
    fn space_spec_parsing() {
        assert_eq!("G,2,5".parse::<SpaceSpec>().unwrap(), SpaceSpec::Grassmannian { k: 2, n: 5 });
        assert_eq!("SGmax,4".parse::<SpaceSpec>().unwrap(), SpaceSpec::SymplecticMaximal { m: 4 });
        assert!("G,2".parse::<SpaceSpec>().is_err());
        assert!("OG,4,9".parse::<SpaceSpec>().is_err());
        assert!("X,1".parse::<SpaceSpec>().is_err());
    }

    #[test]
    fn expression_json() {
        let e = FamilyExpr::from_json(r#"{"type":"product","left":{"type":"proj","m":2},"right":{"type":"quadric_odd","m":3}}"#)
            .unwrap();
        assert_eq!(e, FamilyExpr::product(FamilyExpr::proj(2), FamilyExpr::QuadricOdd { m: 3 }));
        let v = FamilyExpr::from_json(r#"{"type":"vmrt","space":{"type":"G","k":2,"n":5}}"#).unwrap();
        assert_eq!(v.ranks(), vec![1, 2, 3, 2, 1]);
        assert!(FamilyExpr::from_json(r#"{"type":"quadric_odd","m":4}"#).is_err());
        assert!(FamilyExpr::from_json(r#"{"type":"proj_bundle","base":{"type":"proj","m":2},"rank":2,"chern":[[2]]}"#).is_err());
        assert!(FamilyExpr::from_json(r#"{"type":"proj","m":2,"extra":1}"#).is_err());
    }

    #[test]
    fn rank_formulas() {
        assert_eq!(kunneth_ranks(&[1, 1, 1], &[1, 1, 1, 1]), vec![1, 2, 3, 3, 2, 1]);
        assert_eq!(bundle_ranks(&[1, 1, 1, 1, 1], 5), vec![1, 2, 3, 4, 5, 4, 3, 2, 1]);
        assert_eq!(elementary_symmetric(&[2, 1, 1], 2), 5);
    }
}
