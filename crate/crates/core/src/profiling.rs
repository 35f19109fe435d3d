//! Survey profile tests: chi-square independence on contingency tables and
//! one-way ANOVA from group summaries.

use serde::Serialize;

use crate::distributions::{chi2_sf, f_sf};
use crate::error::{Error, Result};

/// Cross-tabulation with groups as rows and categories as columns. Cells
/// may be fractional when reconstructed from published percentages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContingencyTable {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub counts: Vec<Vec<f64>>,
}

impl ContingencyTable {
    pub fn new(row_labels: Vec<String>, col_labels: Vec<String>, counts: Vec<Vec<f64>>) -> Result<Self> {
        let rows = counts.len();
        let cols = counts.first().map_or(0, Vec::len);
        if rows < 2 || cols < 2 {
            return Err(Error::TableShape { rows, cols });
        }
        if counts.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged contingency table".into()));
        }
        if row_labels.len() != rows || col_labels.len() != cols {
            return Err(Error::DimensionMismatch(format!(
                "{} row labels and {} column labels for a {rows}x{cols} table",
                row_labels.len(),
                col_labels.len()
            )));
        }
        if counts.iter().flatten().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(Error::invalid("contingency cells must be finite and nonnegative"));
        }
        if counts.iter().flatten().sum::<f64>() <= 0.0 {
            return Err(Error::invalid("contingency table total is zero"));
        }
        Ok(Self {
            row_labels,
            col_labels,
            counts,
        })
    }

    /// Builds a table with generic labels (`r0`, `c0`, ...).
    pub fn from_counts(counts: Vec<Vec<f64>>) -> Result<Self> {
        let rows = counts.len();
        let cols = counts.first().map_or(0, Vec::len);
        Self::new(
            (0..rows).map(|i| format!("r{i}")).collect(),
            (0..cols).map(|j| format!("c{j}")).collect(),
            counts,
        )
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_totals(&self) -> Vec<f64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_totals(&self) -> Vec<f64> {
        let cols = self.col_labels.len();
        (0..cols).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }

    /// Expected counts under independence, `row_i * col_j / total`.
    pub fn expected(&self) -> Vec<Vec<f64>> {
        let total = self.total();
        let cols = self.col_totals();
        self.row_totals()
            .iter()
            .map(|r| cols.iter().map(|c| r * c / total).collect())
            .collect()
    }
}

/// One group's size and its percentage breakdown over the categories.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupShares {
    pub label: String,
    pub size: f64,
    pub percentages: Vec<f64>,
}

/// How reconstructed cells are rounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellRounding {
    /// `size * pct / 100` with no rounding.
    Exact,
    /// Round each cell to the nearest multiple of the given count (1.0 for whole respondents).
    Resolution(f64),
}

/// Rebuilds a contingency table (groups as rows) from group sizes and
/// per-group category percentages.
pub fn contingency_from_shares(
    categories: &[String],
    groups: &[GroupShares],
    rounding: CellRounding,
) -> Result<ContingencyTable> {
    if groups.len() < 2 || categories.len() < 2 {
        return Err(Error::TableShape {
            rows: groups.len(),
            cols: categories.len(),
        });
    }
    let mut counts = Vec::with_capacity(groups.len());
    for (g, grp) in groups.iter().enumerate() {
        if grp.percentages.len() != categories.len() {
            return Err(Error::DimensionMismatch(format!(
                "group `{}` has {} percentages for {} categories",
                grp.label,
                grp.percentages.len(),
                categories.len()
            )));
        }
        let sum: f64 = grp.percentages.iter().sum();
        if (sum - 100.0).abs() > 0.5 {
            return Err(Error::PercentageSum { group: g, sum });
        }
        if !(grp.size > 0.0) {
            return Err(Error::invalid(format!("group `{}` has nonpositive size", grp.label)));
        }
        counts.push(
            grp.percentages
                .iter()
                .map(|p| {
                    let cell = grp.size * p / 100.0;
                    match rounding {
                        CellRounding::Exact => cell,
                        CellRounding::Resolution(step) => (cell / step).round() * step,
                    }
                })
                .collect(),
        );
    }
    ContingencyTable::new(
        groups.iter().map(|g| g.label.clone()).collect(),
        categories.to_vec(),
        counts,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Df {
    One(u32),
    Pair(u32, u32),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df: Df,
    pub p: f64,
    /// Within-group variation is zero, so the statistic is infinite or undefined.
    pub degenerate: bool,
}

/// Pearson chi-square test of independence, without continuity correction.
pub fn chi_square_independence(table: &ContingencyTable) -> Result<TestResult> {
    if table.row_totals().iter().any(|t| *t <= 0.0) {
        return Err(Error::ZeroMargin("row"));
    }
    if table.col_totals().iter().any(|t| *t <= 0.0) {
        return Err(Error::ZeroMargin("column"));
    }
    let expected = table.expected();
    let statistic: f64 = table
        .counts
        .iter()
        .flatten()
        .zip(expected.iter().flatten())
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let df = ((table.row_labels.len() - 1) * (table.col_labels.len() - 1)) as u32;
    Ok(TestResult {
        statistic,
        df: Df::One(df),
        p: chi2_sf(statistic, df)?.value(),
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub label: String,
    pub n: u32,
    pub mean: f64,
    pub sd: f64,
}

impl GroupSummary {
    /// Summary of raw observations using the `n - 1` standard deviation.
    pub fn from_values(label: &str, values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::invalid(format!("group `{label}` needs at least 2 values")));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        Ok(Self {
            label: label.to_string(),
            n: n as u32,
            mean,
            sd: var.sqrt(),
        })
    }
}

/// One-way ANOVA from `(n, mean, sd)` summaries.
pub fn one_way_anova(groups: &[GroupSummary]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::invalid("ANOVA needs at least 2 groups"));
    }
    for g in groups {
        if g.n < 2 {
            return Err(Error::invalid(format!("group `{}` has n < 2", g.label)));
        }
        if !(g.sd >= 0.0) || !g.mean.is_finite() {
            return Err(Error::invalid(format!("group `{}` has an invalid mean or sd", g.label)));
        }
    }
    let k = groups.len() as u32;
    let big_n: u32 = groups.iter().map(|g| g.n).sum();
    let grand = groups.iter().map(|g| f64::from(g.n) * g.mean).sum::<f64>() / f64::from(big_n);
    let ssb: f64 = groups
        .iter()
        .map(|g| f64::from(g.n) * (g.mean - grand).powi(2))
        .sum();
    let ssw: f64 = groups.iter().map(|g| f64::from(g.n - 1) * g.sd * g.sd).sum();
    let (df1, df2) = (k - 1, big_n - k);
    let df = Df::Pair(df1, df2);
    if ssw == 0.0 {
        let (statistic, p) = if ssb > 0.0 { (f64::INFINITY, 0.0) } else { (0.0, 1.0) };
        return Ok(TestResult {
            statistic,
            df,
            p,
            degenerate: true,
        });
    }
    let statistic = (ssb / f64::from(df1)) / (ssw / f64::from(df2));
    Ok(TestResult {
        statistic,
        df,
        p: f_sf(statistic, df1, df2)?.value(),
        degenerate: false,
    })
}

/// Convenience wrapper over raw observations per group.
pub fn one_way_anova_raw(groups: &[(&str, &[f64])]) -> Result<TestResult> {
    let summaries = groups
        .iter()
        .map(|(label, values)| GroupSummary::from_values(label, values))
        .collect::<Result<Vec<_>>>()?;
    one_way_anova(&summaries)
}
