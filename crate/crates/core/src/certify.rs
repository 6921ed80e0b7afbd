//! Structural divisibility bounds computed by recursion over a family
//! expression, and their comparison with the model checker.

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::divisibility::{gd_bound_checked, CheckerSummary, DivError, PairVerdict, Result};
use crate::families::{build_family, FamilyExpr};

/// Which bound to use for even-dimensional quadrics. The two sets agree on
/// every other leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxiomSet {
    /// `Q^m`, `m` even: bound `m - 1` as stated in the literature.
    Paper,
    /// `Q^m`, `m` even: bound `m / 2`, the largest value the model supports.
    Checked,
}

impl AxiomSet {
    pub fn as_str(&self) -> &'static str {
        match self {
            AxiomSet::Paper => "paper",
            AxiomSet::Checked => "checked",
        }
    }
}

impl fmt::Display for AxiomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// `P^m`: bound `m`.
    ProjectiveSpace,
    /// `Q^m`, `m` odd: bound `m`.
    OddQuadric,
    /// `Q^m`, `m` even: depends on the axiom set.
    EvenQuadric,
    /// `v2(P^(m-1))`: bound `m - 1`.
    VeroneseAlias,
    /// `A x B`: minimum of the factor bounds.
    ProductMin,
    /// `P(E)` with `E` of rank `N` over `B`: `min(bound(B), N - 1)`.
    BundleMin,
    /// Named VMRT: the bound of its expansion.
    VmrtPreset,
}

impl Rule {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rule::ProjectiveSpace => "projective-space",
            Rule::OddQuadric => "odd-quadric",
            Rule::EvenQuadric => "even-quadric",
            Rule::VeroneseAlias => "veronese-alias",
            Rule::ProductMin => "product-min",
            Rule::BundleMin => "bundle-min",
            Rule::VmrtPreset => "vmrt-preset",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertNode {
    pub rule: Rule,
    pub subject: String,
    pub bound: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<CertNode>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructuralCertificate {
    pub expr: FamilyExpr,
    pub axioms: AxiomSet,
    pub bound: usize,
    pub derivation: CertNode,
}

impl StructuralCertificate {
    /// Indented derivation tree, one node per line.
    pub fn render_tree(&self) -> String {
        let mut out = String::new();
        render(&self.derivation, 0, &mut out);
        out
    }
}

fn render(node: &CertNode, depth: usize, out: &mut String) {
    let _ = writeln!(out, "{}{} [{}] bound {}", "  ".repeat(depth), node.subject, node.rule.as_str(), node.bound);
    for c in &node.children {
        render(c, depth + 1, out);
    }
}

fn leaf(rule: Rule, expr: &FamilyExpr, bound: usize) -> CertNode {
    CertNode { rule, subject: expr.to_string(), bound, children: Vec::new() }
}

fn derive(expr: &FamilyExpr, axioms: AxiomSet) -> Result<CertNode> {
    Ok(match expr {
        FamilyExpr::Proj { m } => leaf(Rule::ProjectiveSpace, expr, *m),
        FamilyExpr::QuadricOdd { m } => leaf(Rule::OddQuadric, expr, *m),
        FamilyExpr::QuadricEven { m } => {
            let bound = match axioms {
                AxiomSet::Paper => m - 1,
                AxiomSet::Checked => m / 2,
            };
            leaf(Rule::EvenQuadric, expr, bound)
        }
        FamilyExpr::Veronese2 { m } => leaf(Rule::VeroneseAlias, expr, m - 1),
        FamilyExpr::Product { left, right } => {
            let children = vec![derive(left, axioms)?, derive(right, axioms)?];
            let bound = children[0].bound.min(children[1].bound);
            CertNode { rule: Rule::ProductMin, subject: expr.to_string(), bound, children }
        }
        FamilyExpr::ProjBundle { base, rank, .. } => {
            let child = derive(base, axioms)?;
            let bound = child.bound.min(rank - 1);
            CertNode { rule: Rule::BundleMin, subject: expr.to_string(), bound, children: vec![child] }
        }
        FamilyExpr::Vmrt { space } => {
            let child = derive(&space.vmrt()?, axioms)?;
            CertNode { rule: Rule::VmrtPreset, subject: expr.to_string(), bound: child.bound, children: vec![child] }
        }
    })
}

pub fn certify_structural(expr: &FamilyExpr, axioms: AxiomSet) -> Result<StructuralCertificate> {
    expr.validate()?;
    let derivation = derive(expr, axioms)?;
    Ok(StructuralCertificate { expr: expr.clone(), axioms, bound: derivation.bound, derivation })
}

/// Size limits for building models in bulk runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_cutoff: usize,
    pub max_table_entries: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_cutoff: 24, max_table_entries: 2_000_000 }
    }
}

impl Limits {
    /// Rejects expressions whose model would exceed the limits, without
    /// building it.
    pub fn check(&self, expr: &FamilyExpr) -> Result<()> {
        let cutoff = expr.ranks().len().saturating_sub(1);
        if cutoff > self.max_cutoff {
            return Err(DivError::TooLarge(format!("cutoff {cutoff} exceeds limit {}", self.max_cutoff)));
        }
        let entries = expr.table_entries();
        if entries > self.max_table_entries {
            return Err(DivError::TooLarge(format!(
                "{entries} structure constants exceed limit {}",
                self.max_table_entries
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    /// The checker's bound is exact and equals the certified bound.
    Agree,
    /// No refutation at or below the certified bound, but the checker's
    /// bound is not sharp or is larger.
    Consistent,
    /// The checker refutes at a degree the certificate covers.
    Conflict,
}

/// Compares a checker run with a certified bound.
pub fn agreement(checker: &CheckerSummary, certified: usize) -> Agreement {
    match checker.refuted_at {
        Some(d) if d <= certified => Agreement::Conflict,
        _ if checker.exact && checker.certified_up_to == certified => Agreement::Agree,
        _ => Agreement::Consistent,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossValidation {
    pub expr: FamilyExpr,
    pub paper: usize,
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checker: Option<CheckerSummary>,
    /// Reason the model was not checked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paper_agreement: Option<Agreement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checked_agreement: Option<Agreement>,
    /// Set when the two axiom sets differ or the checker contradicts either.
    pub discrepancy: bool,
    /// Refutation at or below a certified bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<PairVerdict>,
}

pub fn cross_validate(expr: &FamilyExpr, height: u32, limits: &Limits) -> Result<CrossValidation> {
    let paper = certify_structural(expr, AxiomSet::Paper)?.bound;
    let checked = certify_structural(expr, AxiomSet::Checked)?.bound;
    let (checker, skipped) = match limits.check(expr) {
        Ok(()) => {
            let ring = build_family(expr)?;
            (Some(gd_bound_checked(&ring, height)?.summary()), None)
        }
        Err(DivError::TooLarge(why)) => (None, Some(why)),
        Err(e) => return Err(e),
    };
    let paper_agreement = checker.as_ref().map(|c| agreement(c, paper));
    let checked_agreement = checker.as_ref().map(|c| agreement(c, checked));
    let conflict = [paper_agreement, checked_agreement].contains(&Some(Agreement::Conflict));
    let witness = checker
        .as_ref()
        .filter(|c| c.certified_up_to < paper.max(checked))
        .and_then(|c| c.witness.clone())
        .filter(|w| w.total_degree() <= paper.max(checked));
    Ok(CrossValidation {
        expr: expr.clone(),
        paper,
        checked,
        checker,
        skipped,
        paper_agreement,
        checked_agreement,
        discrepancy: conflict || paper != checked,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::SpaceSpec;

    #[test]
    fn leaf_and_closure_bounds() {
        let g25 = FamilyExpr::product(FamilyExpr::proj(2), FamilyExpr::proj(2));
        assert_eq!(certify_structural(&g25, AxiomSet::Paper).unwrap().bound, 2);
        let sg = FamilyExpr::split_bundle_over_proj(5, &[2, 1, 1, 1, 1]);
        assert_eq!(certify_structural(&sg, AxiomSet::Paper).unwrap().bound, 4);
        let q6 = FamilyExpr::quadric(6);
        assert_eq!(certify_structural(&q6, AxiomSet::Paper).unwrap().bound, 5);
        assert_eq!(certify_structural(&q6, AxiomSet::Checked).unwrap().bound, 3);
    }

    #[test]
    fn preset_tree() {
        let og: SpaceSpec = "OG,2,9".parse().unwrap();
        let cert = certify_structural(&FamilyExpr::Vmrt { space: og }, AxiomSet::Paper).unwrap();
        assert_eq!(cert.bound, 2);
        let product = &cert.derivation.children[0];
        assert_eq!(product.rule, Rule::ProductMin);
        let rules: Vec<Rule> = product.children.iter().map(|c| c.rule).collect();
        assert_eq!(rules, vec![Rule::ProjectiveSpace, Rule::OddQuadric]);
        assert_eq!(
            cert.render_tree(),
            "VMRT[OG(2,9)] [vmrt-preset] bound 2\n  P^2 x Q^3 [product-min] bound 2\n    P^2 [projective-space] bound 2\n    Q^3 [odd-quadric] bound 3\n"
        );

        let sgmax: SpaceSpec = "SGmax,4".parse().unwrap();
        let cert = certify_structural(&FamilyExpr::Vmrt { space: sgmax }, AxiomSet::Checked).unwrap();
        assert_eq!(cert.bound, 3);
        assert_eq!(cert.derivation.children[0].rule, Rule::VeroneseAlias);
    }

    #[test]
    fn cross_validation_flags_even_quadric() {
        let lim = Limits::default();
        let cv = cross_validate(&FamilyExpr::proj(6), 3, &lim).unwrap();
        assert_eq!((cv.paper, cv.checked), (6, 6));
        assert_eq!(cv.checker.as_ref().unwrap().certified_up_to, 6);
        assert_eq!(cv.paper_agreement, Some(Agreement::Agree));
        assert!(!cv.discrepancy);
        assert!(cv.witness.is_none());

        let pq = FamilyExpr::product(FamilyExpr::proj(2), FamilyExpr::quadric(3));
        let cv = cross_validate(&pq, 3, &lim).unwrap();
        assert_eq!((cv.paper, cv.checked, cv.checker.unwrap().certified_up_to), (2, 2, 2));

        let cv = cross_validate(&FamilyExpr::quadric(4), 3, &lim).unwrap();
        assert_eq!((cv.paper, cv.checked), (3, 2));
        assert_eq!(cv.paper_agreement, Some(Agreement::Conflict));
        assert_eq!(cv.checked_agreement, Some(Agreement::Agree));
        assert!(cv.discrepancy);
        assert_eq!(cv.witness.unwrap().total_degree(), 3);
    }

    #[test]
    fn oversized_models_are_skipped() {
        let lim = Limits { max_cutoff: 3, max_table_entries: 10 };
        let cv = cross_validate(&FamilyExpr::proj(6), 3, &lim).unwrap();
        assert!(cv.checker.is_none());
        assert!(cv.skipped.unwrap().contains("cutoff"));
        assert_eq!(cv.paper, 6);
    }
}
