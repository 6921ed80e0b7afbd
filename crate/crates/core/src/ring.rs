//! Explicit graded rings with integer structure constants.
//!
//! A [`GradedRingModel`] stores, for every degree `d <= cutoff`, the rank of
//! the free degree-`d` piece together with a basis, and for every ordered
//! pair `(i, j)` with `i + j <= cutoff` a table of structure constants
//! `e_p * e_q = sum_r T[p][q][r] e_r`. Pieces above the cutoff are the zero
//! module. Multiplication is strictly commutative (everything lives in even
//! cohomological degree, graded by codimension).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use serde_json::{Map, Number, Value};
use thiserror::Error;

/// Version tag written into ring-model files.
pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("degree-0 piece must have rank 1, found rank {0}")]
    DegreeZeroRank(usize),
    #[error("missing structure-constant table for degree pair ({0},{1})")]
    MissingTable(usize, usize),
    #[error("table for degree pair ({0},{1}) lies above the cutoff")]
    UnexpectedTable(usize, usize),
    #[error("degree-0 basis element does not act as the identity on degree {0}")]
    NotUnital(usize),
    #[error("element of degree {degree} has {found} coordinates, expected {expected}")]
    ElementShape { degree: usize, found: usize, expected: usize },
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("degree {degree} out of range (cutoff {cutoff})")]
    DegreeOutOfRange { degree: usize, cutoff: usize },
    #[error("basis index {index} out of range in degree {degree}")]
    BasisIndex { degree: usize, index: usize },
    #[error("malformed ring file: {0}")]
    Malformed(String),
    #[error("unsupported ring file version {0} (expected {FORMAT_VERSION})")]
    Version(u64),
}

pub type Result<T, E = RingError> = std::result::Result<T, E>;

/// Structure constants for one ordered degree pair, shape `rows x cols x out`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    rows: usize,
    cols: usize,
    out: usize,
    data: Vec<BigInt>,
}

impl Table {
    pub fn zeros(rows: usize, cols: usize, out: usize) -> Self {
        Table { rows, cols, out, data: vec![BigInt::zero(); rows * cols * out] }
    }

    pub fn from_nested(nested: Vec<Vec<Vec<BigInt>>>, cols: usize, out: usize) -> Result<Self> {
        let rows = nested.len();
        let mut data = Vec::with_capacity(rows * cols * out);
        for (p, row) in nested.into_iter().enumerate() {
            if row.len() != cols {
                return Err(RingError::Shape(format!("table row {p} has {} columns, expected {cols}", row.len())));
            }
            for (q, v) in row.into_iter().enumerate() {
                if v.len() != out {
                    return Err(RingError::Shape(format!(
                        "table entry [{p}][{q}] has length {}, expected {out}",
                        v.len()
                    )));
                }
                data.extend(v);
            }
        }
        Ok(Table { rows, cols, out, data })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.out)
    }

    /// Coordinates of `e_p * e_q`.
    pub fn product(&self, p: usize, q: usize) -> &[BigInt] {
        let start = (p * self.cols + q) * self.out;
        &self.data[start..start + self.out]
    }

    pub fn get(&self, p: usize, q: usize, r: usize) -> &BigInt {
        &self.data[(p * self.cols + q) * self.out + r]
    }

    pub fn set(&mut self, p: usize, q: usize, r: usize, value: BigInt) {
        self.data[(p * self.cols + q) * self.out + r] = value;
    }

    fn nested(&self) -> Vec<Vec<Vec<BigInt>>> {
        (0..self.rows)
            .map(|p| (0..self.cols).map(|q| self.product(p, q).to_vec()).collect())
            .collect()
    }
}

/// A homogeneous class: a degree and coordinates in that degree's basis.
///
/// Degrees above the ring's cutoff are allowed and carry no coordinates;
/// such an element is the zero of the zero module.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    degree: usize,
    coeffs: Vec<BigInt>,
}

impl Element {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn checked_add(&self, other: &Element) -> Result<Element> {
        self.same_degree(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Element { degree: self.degree, coeffs })
    }

    pub fn checked_sub(&self, other: &Element) -> Result<Element> {
        self.checked_add(&-other)
    }

    pub fn scale(&self, k: &BigInt) -> Element {
        Element { degree: self.degree, coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    /// Exact equality; elements of different degrees are an error rather
    /// than simply unequal.
    pub fn equals(&self, other: &Element) -> Result<bool> {
        self.same_degree(other)?;
        Ok(self.coeffs == other.coeffs)
    }

    fn same_degree(&self, other: &Element) -> Result<()> {
        if self.degree != other.degree || self.coeffs.len() != other.coeffs.len() {
            return Err(RingError::DegreeMismatch(self.degree, other.degree));
        }
        Ok(())
    }
}

impl std::ops::Neg for &Element {
    type Output = Element;

    fn neg(self) -> Element {
        Element { degree: self.degree, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl std::ops::Neg for Element {
    type Output = Element;

    fn neg(self) -> Element {
        -&self
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Element", 2)?;
        s.serialize_field("degree", &self.degree)?;
        s.serialize_field("coeffs", &self.coeffs.iter().map(int_to_number).collect::<Vec<_>>())?;
        s.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedRingModel {
    cutoff: usize,
    ranks: Vec<usize>,
    basis_labels: Vec<Vec<String>>,
    tables: BTreeMap<(usize, usize), Table>,
}

impl GradedRingModel {
    /// Validates shapes and the unit axiom. Commutativity and associativity
    /// are left to [`GradedRingModel::verify_axioms`].
    pub fn new(
        cutoff: usize,
        ranks: Vec<usize>,
        basis_labels: Vec<Vec<String>>,
        tables: BTreeMap<(usize, usize), Table>,
    ) -> Result<Self> {
        if ranks.len() != cutoff + 1 {
            return Err(RingError::Shape(format!("{} ranks given for cutoff {cutoff}", ranks.len())));
        }
        if ranks[0] != 1 {
            return Err(RingError::DegreeZeroRank(ranks[0]));
        }
        if basis_labels.len() != cutoff + 1 {
            return Err(RingError::Shape(format!("{} label lists given for cutoff {cutoff}", basis_labels.len())));
        }
        for (d, labels) in basis_labels.iter().enumerate() {
            if labels.len() != ranks[d] {
                return Err(RingError::Shape(format!(
                    "degree {d} has {} labels but rank {}",
                    labels.len(),
                    ranks[d]
                )));
            }
        }
        for &(i, j) in tables.keys() {
            if i + j > cutoff {
                return Err(RingError::UnexpectedTable(i, j));
            }
        }
        for i in 0..=cutoff {
            for j in 0..=cutoff - i {
                let t = tables.get(&(i, j)).ok_or(RingError::MissingTable(i, j))?;
                let expected = (ranks[i], ranks[j], ranks[i + j]);
                if t.shape() != expected {
                    return Err(RingError::Shape(format!(
                        "table ({i},{j}) has shape {:?}, expected {expected:?}",
                        t.shape()
                    )));
                }
            }
        }
        let ring = GradedRingModel { cutoff, ranks, basis_labels, tables };
        for d in 0..=cutoff {
            for q in 0..ring.ranks[d] {
                let unit = unit_vector(ring.ranks[d], q);
                if ring.tables[&(0, d)].product(0, q) != unit.as_slice()
                    || ring.tables[&(d, 0)].product(q, 0) != unit.as_slice()
                {
                    return Err(RingError::NotUnital(d));
                }
            }
        }
        Ok(ring)
    }

    /// Builds every table from a basis-product rule `f(i, p, j, q)` returning
    /// the coordinates of `e_(i,p) * e_(j,q)` in degree `i + j`. Only called
    /// for `i + j <= cutoff`.
    pub fn tabulate<F>(cutoff: usize, ranks: Vec<usize>, basis_labels: Vec<Vec<String>>, f: F) -> Result<Self>
    where
        F: Fn(usize, usize, usize, usize) -> Vec<BigInt>,
    {
        if ranks.len() != cutoff + 1 {
            return Err(RingError::Shape(format!("{} ranks given for cutoff {cutoff}", ranks.len())));
        }
        let mut tables = BTreeMap::new();
        for i in 0..=cutoff {
            for j in 0..=cutoff - i {
                let out = ranks[i + j];
                let mut t = Table::zeros(ranks[i], ranks[j], out);
                for p in 0..ranks[i] {
                    for q in 0..ranks[j] {
                        let v = f(i, p, j, q);
                        debug_assert_eq!(v.len(), out);
                        for (r, c) in v.into_iter().enumerate() {
                            t.set(p, q, r, c);
                        }
                    }
                }
                tables.insert((i, j), t);
            }
        }
        Self::new(cutoff, ranks, basis_labels, tables)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Rank of the degree-`d` piece; zero above the cutoff.
    pub fn rank(&self, d: usize) -> usize {
        self.ranks.get(d).copied().unwrap_or(0)
    }

    pub fn basis_labels(&self) -> &[Vec<String>] {
        &self.basis_labels
    }

    pub fn label(&self, degree: usize, index: usize) -> &str {
        &self.basis_labels[degree][index]
    }

    pub fn tables(&self) -> &BTreeMap<(usize, usize), Table> {
        &self.tables
    }

    pub fn table(&self, i: usize, j: usize) -> Option<&Table> {
        self.tables.get(&(i, j))
    }

    pub fn into_parts(self) -> (usize, Vec<usize>, Vec<Vec<String>>, BTreeMap<(usize, usize), Table>) {
        (self.cutoff, self.ranks, self.basis_labels, self.tables)
    }

    /// Quotient by everything above degree `cutoff`.
    pub fn truncate(&self, cutoff: usize) -> Result<Self> {
        if cutoff > self.cutoff {
            return Err(RingError::DegreeOutOfRange { degree: cutoff, cutoff: self.cutoff });
        }
        let tables = self
            .tables
            .iter()
            .filter(|((i, j), _)| i + j <= cutoff)
            .map(|(k, t)| (*k, t.clone()))
            .collect();
        Self::new(
            cutoff,
            self.ranks[..=cutoff].to_vec(),
            self.basis_labels[..=cutoff].to_vec(),
            tables,
        )
    }

    pub fn element(&self, degree: usize, coeffs: Vec<BigInt>) -> Result<Element> {
        let expected = self.rank(degree);
        if coeffs.len() != expected {
            return Err(RingError::ElementShape { degree, found: coeffs.len(), expected });
        }
        Ok(Element { degree, coeffs })
    }

    pub fn element_i64(&self, degree: usize, coeffs: &[i64]) -> Result<Element> {
        self.element(degree, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(&self, degree: usize) -> Element {
        Element { degree, coeffs: vec![BigInt::zero(); self.rank(degree)] }
    }

    pub fn one(&self) -> Element {
        Element { degree: 0, coeffs: vec![BigInt::one()] }
    }

    pub fn basis(&self, degree: usize, index: usize) -> Result<Element> {
        let rank = self.rank(degree);
        if index >= rank {
            return Err(RingError::BasisIndex { degree, index });
        }
        Ok(Element { degree, coeffs: unit_vector(rank, index) })
    }

    /// Checks that an element was built for this ring.
    pub fn check(&self, x: &Element) -> Result<()> {
        let expected = self.rank(x.degree);
        if x.coeffs.len() != expected {
            return Err(RingError::ElementShape { degree: x.degree, found: x.coeffs.len(), expected });
        }
        Ok(())
    }

    /// Product of homogeneous elements. When `x.degree + y.degree` exceeds
    /// the cutoff the result is the (coordinate-free) zero of that degree.
    pub fn mul(&self, x: &Element, y: &Element) -> Result<Element> {
        self.check(x)?;
        self.check(y)?;
        let degree = x.degree + y.degree;
        Ok(Element { degree, coeffs: self.mul_coords(x.degree, &x.coeffs, y.degree, &y.coeffs) })
    }

    /// Raw product of coordinate vectors in degrees `i` and `j`; empty when
    /// `i + j` is above the cutoff.
    pub fn mul_coords(&self, i: usize, x: &[BigInt], j: usize, y: &[BigInt]) -> Vec<BigInt> {
        let Some(t) = self.tables.get(&(i, j)) else {
            return Vec::new();
        };
        let mut out = vec![BigInt::zero(); t.out];
        for (p, xp) in x.iter().enumerate() {
            if xp.is_zero() {
                continue;
            }
            for (q, yq) in y.iter().enumerate() {
                if yq.is_zero() {
                    continue;
                }
                let s = xp * yq;
                for (o, c) in out.iter_mut().zip(t.product(p, q)) {
                    if !c.is_zero() {
                        *o += &s * c;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, x: &Element, y: &Element) -> Result<Element> {
        self.check(x)?;
        self.check(y)?;
        x.checked_add(y)
    }

    pub fn pow(&self, x: &Element, e: usize) -> Result<Element> {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, x)?;
        }
        Ok(acc)
    }

    /// Matrix of `y -> x * y` from degree `j` to degree `x.degree + j`,
    /// rows indexed by the target basis.
    pub fn multiplication_matrix(&self, x_degree: usize, x: &[BigInt], j: usize) -> Vec<Vec<BigInt>> {
        let target = self.rank(x_degree + j);
        let cols = self.rank(j);
        let mut m = vec![vec![BigInt::zero(); cols]; target];
        for q in 0..cols {
            let col = self.mul_coords(x_degree, x, j, &unit_vector(cols, q));
            for (r, c) in col.into_iter().enumerate() {
                m[r][q] = c;
            }
        }
        m
    }

    /// Human-readable linear combination of basis labels, e.g. `a - b`.
    pub fn describe(&self, x: &Element) -> String {
        if x.degree > self.cutoff {
            return format!("0 (degree {} above cutoff)", x.degree);
        }
        let mut out = String::new();
        for (k, c) in x.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let label = &self.basis_labels[x.degree][k];
            let mag = c.abs();
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
            }
            if mag.is_one() {
                out.push_str(label);
            } else if label == "1" {
                out.push_str(&mag.to_string());
            } else {
                out.push_str(&format!("{mag}*{label}"));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    pub fn verify_axioms(&self) -> AxiomReport {
        verify_ring_axioms(self)
    }

    /// Canonical JSON: sorted keys, no insignificant whitespace.
    pub fn to_json(&self) -> String {
        let mut root = Map::new();
        root.insert("version".into(), Value::from(FORMAT_VERSION));
        root.insert("cutoff".into(), Value::from(self.cutoff));
        root.insert("ranks".into(), Value::from(self.ranks.clone()));
        root.insert("basis_labels".into(), Value::from(self.basis_labels.clone()));
        let mut tables = Map::new();
        for ((i, j), t) in &self.tables {
            let nested: Vec<Value> = t
                .nested()
                .into_iter()
                .map(|row| {
                    Value::Array(
                        row.into_iter()
                            .map(|v| Value::Array(v.iter().map(|c| Value::Number(int_to_number(c))).collect()))
                            .collect(),
                    )
                })
                .collect();
            tables.insert(format!("{i},{j}"), Value::Array(nested));
        }
        root.insert("tables".into(), Value::Object(tables));
        Value::Object(root).to_string()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| RingError::Malformed(e.to_string()))?;
        let obj = v.as_object().ok_or_else(|| malformed("top level is not an object"))?;
        let version = obj
            .get("version")
            .and_then(Value::as_u64)
            .ok_or_else(|| malformed("missing or non-integer `version`"))?;
        if version != FORMAT_VERSION {
            return Err(RingError::Version(version));
        }
        let cutoff = obj
            .get("cutoff")
            .and_then(Value::as_u64)
            .ok_or_else(|| malformed("missing or non-integer `cutoff`"))? as usize;
        let ranks: Vec<usize> = obj
            .get("ranks")
            .and_then(Value::as_array)
            .ok_or_else(|| malformed("missing `ranks` array"))?
            .iter()
            .map(|r| r.as_u64().map(|r| r as usize).ok_or_else(|| malformed("rank is not a non-negative integer")))
            .collect::<Result<_>>()?;
        let basis_labels: Vec<Vec<String>> = serde_json::from_value(
            obj.get("basis_labels").cloned().ok_or_else(|| malformed("missing `basis_labels`"))?,
        )
        .map_err(|e| malformed(&format!("basis_labels: {e}")))?;
        if ranks.len() != cutoff + 1 {
            return Err(RingError::Shape(format!("{} ranks given for cutoff {cutoff}", ranks.len())));
        }
        if ranks[0] != 1 {
            return Err(RingError::DegreeZeroRank(ranks[0]));
        }
        let raw_tables = obj
            .get("tables")
            .and_then(Value::as_object)
            .ok_or_else(|| malformed("missing `tables` object"))?;
        let mut tables = BTreeMap::new();
        for (key, value) in raw_tables {
            let (i, j) = parse_pair_key(key)?;
            if i + j > cutoff {
                return Err(RingError::UnexpectedTable(i, j));
            }
            let nested = parse_nested(value)?;
            tables.insert((i, j), Table::from_nested(nested, ranks[j], ranks[i + j])?);
        }
        if let Some(extra) = obj.keys().find(|k| !["version", "cutoff", "ranks", "basis_labels", "tables"].contains(&k.as_str())) {
            return Err(malformed(&format!("unknown field `{extra}`")));
        }
        Self::new(cutoff, ranks, basis_labels, tables)
    }
}

fn malformed(msg: &str) -> RingError {
    RingError::Malformed(msg.to_string())
}

fn parse_pair_key(key: &str) -> Result<(usize, usize)> {
    let (a, b) = key.split_once(',').ok_or_else(|| malformed(&format!("bad table key `{key}`")))?;
    let i = a.parse().map_err(|_| malformed(&format!("bad table key `{key}`")))?;
    let j = b.parse().map_err(|_| malformed(&format!("bad table key `{key}`")))?;
    Ok((i, j))
}

fn parse_nested(value: &Value) -> Result<Vec<Vec<Vec<BigInt>>>> {
    let arr = |v: &Value| v.as_array().cloned().ok_or_else(|| malformed("table entry is not an array"));
    arr(value)?
        .iter()
        .map(|row| {
            arr(row)?
                .iter()
                .map(|cell| arr(cell)?.iter().map(parse_int).collect::<Result<Vec<_>>>())
                .collect()
        })
        .collect()
}

fn parse_int(v: &Value) -> Result<BigInt> {
    let Value::Number(n) = v else {
        return Err(malformed("structure constant is not a number"));
    };
    let s = n.to_string();
    if !s.bytes().enumerate().all(|(k, b)| b.is_ascii_digit() || (k == 0 && b == b'-')) {
        return Err(malformed(&format!("structure constant `{s}` is not an integer")));
    }
    BigInt::from_str(&s).map_err(|_| malformed(&format!("structure constant `{s}` is not an integer")))
}

pub(crate) fn int_to_number(c: &BigInt) -> Number {
    Number::from_str(&c.to_string()).expect("decimal integer is a valid JSON number")
}

pub(crate) fn unit_vector(len: usize, index: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); len];
    v[index] = BigInt::one();
    v
}

/// One violated instance of a ring axiom among basis elements, written as
/// `(degree, index)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum Violation {
    Identity { degree: usize, index: usize },
    Commutativity { left: (usize, usize), right: (usize, usize) },
    Associativity { first: (usize, usize), second: (usize, usize), third: (usize, usize) },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Identity { degree, index } => write!(f, "identity fails on e{degree}_{index}"),
            Violation::Commutativity { left, right } => {
                write!(f, "e{}_{} * e{}_{} != e{}_{} * e{}_{}", left.0, left.1, right.0, right.1, right.0, right.1, left.0, left.1)
            }
            Violation::Associativity { first, second, third } => write!(
                f,
                "(e{}_{} * e{}_{}) * e{}_{} != e{}_{} * (e{}_{} * e{}_{})",
                first.0, first.1, second.0, second.1, third.0, third.1, first.0, first.1, second.0, second.1, third.0, third.1
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks identity, commutativity and associativity on every basis triple
/// of total degree at most the cutoff.
pub fn verify_ring_axioms(ring: &GradedRingModel) -> AxiomReport {
    let mut violations = Vec::new();
    let d = ring.cutoff;
    for deg in 0..=d {
        for q in 0..ring.rank(deg) {
            let e = unit_vector(ring.rank(deg), q);
            if ring.mul_coords(0, &[BigInt::one()], deg, &e) != e || ring.mul_coords(deg, &e, 0, &[BigInt::one()]) != e {
                violations.push(Violation::Identity { degree: deg, index: q });
            }
        }
    }
    for i in 0..=d {
        for j in i..=d - i {
            let (tij, tji) = (&ring.tables[&(i, j)], &ring.tables[&(j, i)]);
            for p in 0..ring.rank(i) {
                let first_q = if i == j { p + 1 } else { 0 };
                for q in first_q..ring.rank(j) {
                    if tij.product(p, q) != tji.product(q, p) {
                        violations.push(Violation::Commutativity { left: (i, p), right: (j, q) });
                    }
                }
            }
        }
    }
    for i in 0..=d {
        for j in 0..=d - i {
            for k in 0..=d - i - j {
                for p in 0..ring.rank(i) {
                    let ep = unit_vector(ring.rank(i), p);
                    for q in 0..ring.rank(j) {
                        let eq = unit_vector(ring.rank(j), q);
                        let pq = ring.mul_coords(i, &ep, j, &eq);
                        for s in 0..ring.rank(k) {
                            let es = unit_vector(ring.rank(k), s);
                            let left = ring.mul_coords(i + j, &pq, k, &es);
                            let qs = ring.mul_coords(j, &eq, k, &es);
                            let right = ring.mul_coords(i, &ep, j + k, &qs);
                            if left != right {
                                violations.push(Violation::Associativity { first: (i, p), second: (j, q), third: (k, s) });
                            }
                        }
                    }
                }
            }
        }
    }
    AxiomReport { violations }
}
