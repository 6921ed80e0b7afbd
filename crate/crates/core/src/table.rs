//! Per-space rows comparing the closed-form bound, both certified bounds and
//! the model checker.

use rayon::prelude::*;
use serde::Serialize;

use crate::certify::{agreement, cross_validate, Agreement, Limits};
use crate::divisibility::{CheckerSummary, Result};
use crate::families::{FamilyError, FamilyExpr, SpaceSpec};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub space: SpaceSpec,
    pub vmrt: String,
    pub paper_s: usize,
    pub certified_paper: usize,
    pub certified_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checker: Option<CheckerSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    /// Paper-axiom certificate equals the closed form.
    pub paper_reproduced: bool,
    /// Checked-axiom certificate is below the closed form.
    pub contested: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checker_vs_paper: Option<Agreement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checker_vs_checked: Option<Agreement>,
}

pub fn table_row(space: &SpaceSpec, height: u32, limits: &Limits) -> Result<TableRow> {
    let paper_s = space.table_bound()?;
    let vmrt = space.vmrt()?;
    let cv = cross_validate(&FamilyExpr::Vmrt { space: *space }, height, limits)?;
    Ok(TableRow {
        space: *space,
        vmrt: vmrt.to_string(),
        paper_s,
        certified_paper: cv.paper,
        certified_checked: cv.checked,
        paper_reproduced: cv.paper == paper_s,
        contested: cv.checked < paper_s,
        checker_vs_paper: cv.checker.as_ref().map(|c| agreement(c, cv.paper)),
        checker_vs_checked: cv.checker.as_ref().map(|c| agreement(c, cv.checked)),
        checker: cv.checker,
        skipped: cv.skipped,
    })
}

/// Rows in input order; checker runs are independent and run in parallel.
pub fn compute_table(spaces: &[SpaceSpec], height: u32, limits: &Limits) -> Result<Vec<TableRow>> {
    spaces.par_iter().map(|s| table_row(s, height, limits)).collect()
}

/// One instance per classification row family, odd quadrics only.
pub fn acceptance_rows() -> Vec<SpaceSpec> {
    let mut rows = Vec::new();
    rows.extend((2..=8).map(|n| SpaceSpec::Projective { n }));
    rows.extend([3, 5, 7, 9].map(|n| SpaceSpec::Quadric { n }));
    rows.extend([(1, 3), (2, 5), (2, 6), (3, 7)].map(|(k, n)| SpaceSpec::Grassmannian { k, n }));
    rows.extend([(1, 7), (2, 9), (3, 11)].map(|(k, n)| SpaceSpec::OrthogonalGrassmannian { k, n }));
    rows.extend([(1, 7), (2, 9)].map(|(k, n)| SpaceSpec::SymplecticGrassmannian { k, n }));
    rows.extend((3..=5).map(|m| SpaceSpec::SymplecticMaximal { m }));
    rows
}

/// The acceptance rows followed by the even quadrics `Q^4`, `Q^6`, `Q^8`.
pub fn default_rows() -> Vec<SpaceSpec> {
    let mut rows = acceptance_rows();
    rows.extend([4, 6, 8].map(|n| SpaceSpec::Quadric { n }));
    rows
}

/// Parses `P,5;Q,7;G,2,5`.
pub fn parse_rows(spec: &str) -> std::result::Result<Vec<SpaceSpec>, FamilyError> {
    spec.split(';').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}

pub const TSV_HEADER: [&str; 12] = [
    "space",
    "vmrt",
    "paper_s",
    "certified_paper",
    "certified_checked",
    "checker_bound",
    "checker_kind",
    "refuted_at",
    "paper_reproduced",
    "contested",
    "checker_vs_paper",
    "checker_vs_checked",
];

fn agreement_str(a: Option<Agreement>) -> &'static str {
    match a {
        Some(Agreement::Agree) => "agree",
        Some(Agreement::Consistent) => "consistent",
        Some(Agreement::Conflict) => "conflict",
        None => "-",
    }
}

fn cells(row: &TableRow) -> Vec<String> {
    let (bound, kind, refuted) = match &row.checker {
        Some(c) => (
            c.certified_up_to.to_string(),
            if c.exact { "exact" } else { "lower" }.to_string(),
            c.refuted_at.map_or("-".to_string(), |d| d.to_string()),
        ),
        None => ("-".to_string(), "skipped".to_string(), "-".to_string()),
    };
    vec![
        row.space.to_string(),
        row.vmrt.clone(),
        row.paper_s.to_string(),
        row.certified_paper.to_string(),
        row.certified_checked.to_string(),
        bound,
        kind,
        refuted,
        row.paper_reproduced.to_string(),
        row.contested.to_string(),
        agreement_str(row.checker_vs_paper).to_string(),
        agreement_str(row.checker_vs_checked).to_string(),
    ]
}

pub fn render_tsv(rows: &[TableRow]) -> String {
    let mut out = TSV_HEADER.join("\t");
    out.push('\n');
    for row in rows {
        out.push_str(&cells(row).join("\t"));
        out.push('\n');
    }
    out
}

/// Aligned columns for terminals.
pub fn render_text(rows: &[TableRow]) -> String {
    let mut grid: Vec<Vec<String>> = vec![TSV_HEADER.iter().map(|s| s.to_string()).collect()];
    grid.extend(rows.iter().map(cells));
    let widths: Vec<usize> = (0..TSV_HEADER.len())
        .map(|c| grid.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in &grid {
        let line: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
