//! Least squares with robust covariance, and the panel designs built on it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::params::ParentalGroup;

/// Relative tolerance for declaring a column linearly dependent.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("design is rank deficient; collinear column(s): {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },
    #[error("design has {rows} rows but outcome has {outcomes}")]
    DimensionMismatch { rows: usize, outcomes: usize },
    #[error("fewer observations ({n}) than regressors ({k})")]
    TooFewObservations { n: usize, k: usize },
    #[error("panel is missing {group} in {year}")]
    IncompletePanel { year: i32, group: ParentalGroup },
    #[error("panel has more than one observation for {group} in {year}")]
    DuplicateObservation { year: i32, group: ParentalGroup },
    #[error("{0}")]
    InvalidPanel(String),
}

/// Heteroskedasticity-consistent covariance flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum CovarianceKind {
    HC0,
    /// HC0 scaled by n / (n - k).
    #[default]
    HC1,
}

impl FromStr for CovarianceKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hc0" => Ok(CovarianceKind::HC0),
            "hc1" => Ok(CovarianceKind::HC1),
            _ => Err(format!("unknown covariance `{s}` (expected hc0 or hc1)")),
        }
    }
}

impl fmt::Display for CovarianceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CovarianceKind::HC0 => "hc0",
            CovarianceKind::HC1 => "hc1",
        })
    }
}

/// Named regressor columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    rows: usize,
}

impl Design {
    pub fn new(rows: usize) -> Self {
        Design {
            names: Vec::new(),
            columns: Vec::new(),
            rows,
        }
    }

    pub fn column(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        assert_eq!(
            values.len(),
            self.rows,
            "column length must match design rows"
        );
        self.names.push(name.into());
        self.columns.push(values);
        self
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.columns.len(), |i, j| self.columns[j][i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEstimate {
    pub term: String,
    pub estimate: f64,
    pub robust_se: f64,
    pub p_value: f64,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub names: Vec<String>,
    pub coefficients: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub kind: CovarianceKind,
    pub fitted: DVector<f64>,
    pub residuals: DVector<f64>,
    pub r_squared: f64,
    pub n: usize,
}

impl RegressionResult {
    pub fn k(&self) -> usize {
        self.names.len()
    }

    fn index(&self, term: &str) -> Option<usize> {
        self.names.iter().position(|n| n == term)
    }

    pub fn coef(&self, term: &str) -> Option<f64> {
        self.index(term).map(|i| self.coefficients[i])
    }

    pub fn std_error(&self, term: &str) -> Option<f64> {
        self.index(term).map(|i| self.covariance[(i, i)].sqrt())
    }

    /// Two-sided p-value from Student's t with n - k degrees of freedom.
    /// NaN when there are no residual degrees of freedom.
    pub fn p_value(&self, term: &str) -> Option<f64> {
        let i = self.index(term)?;
        Some(p_value(
            self.coefficients[i],
            self.covariance[(i, i)].sqrt(),
            self.n - self.k(),
        ))
    }

    pub fn terms(&self) -> Vec<TermEstimate> {
        let df = self.n - self.k();
        self.names
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let se = self.covariance[(i, i)].sqrt();
                let p = p_value(self.coefficients[i], se, df);
                TermEstimate {
                    term: name.clone(),
                    estimate: self.coefficients[i],
                    robust_se: se,
                    p_value: p,
                    stars: stars(p).to_string(),
                }
            })
            .collect()
    }
}

fn p_value(estimate: f64, se: f64, df: usize) -> f64 {
    if df == 0 || !se.is_finite() || se <= 0.0 {
        return f64::NAN;
    }
    match StudentsT::new(0.0, 1.0, df as f64) {
        Ok(t) => 2.0 * t.sf((estimate / se).abs()),
        Err(_) => f64::NAN,
    }
}

/// Conventional significance markers: *** p<0.01, ** p<0.05, * p<0.1.
pub fn stars(p: f64) -> &'static str {
    if p.is_nan() {
        ""
    } else if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

/// Least squares through a QR factorization of the design.
pub fn ols(
    design: &Design,
    y: &[f64],
    kind: CovarianceKind,
) -> Result<RegressionResult, StatsError> {
    let n = design.rows();
    let k = design.names().len();
    if y.len() != n {
        return Err(StatsError::DimensionMismatch {
            rows: n,
            outcomes: y.len(),
        });
    }
    if n < k || k == 0 {
        return Err(StatsError::TooFewObservations { n, k });
    }
    let x = design.matrix();
    let yv = DVector::from_column_slice(y);
    let qr = x.clone().qr();
    let r = qr.r();
    let q = qr.q();

    let collinear: Vec<String> = (0..k)
        .filter(|&j| r[(j, j)].abs() <= RANK_TOL * x.column(j).norm().max(f64::MIN_POSITIVE))
        .map(|j| design.names()[j].clone())
        .collect();
    if !collinear.is_empty() {
        return Err(StatsError::RankDeficient { columns: collinear });
    }

    let qty = q.transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| StatsError::RankDeficient {
            columns: design.names().to_vec(),
        })?;
    let fitted = &x * &beta;
    let residuals = &yv - &fitted;

    // (X'X)^-1 = R^-1 R^-T
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| StatsError::RankDeficient {
            columns: design.names().to_vec(),
        })?;
    let bread = &r_inv * r_inv.transpose();
    let mut meat = DMatrix::zeros(k, k);
    for i in 0..n {
        let xi = x.row(i).transpose();
        meat += (&xi * xi.transpose()) * residuals[i].powi(2);
    }
    let mut covariance = &bread * meat * &bread;
    if kind == CovarianceKind::HC1 {
        // Saturated designs leave no degrees of freedom; the scaled
        // estimator is undefined there.
        let scale = if n > k {
            n as f64 / (n - k) as f64
        } else {
            f64::NAN
        };
        covariance *= scale;
    }

    let mean = yv.mean();
    let sst: f64 = yv.iter().map(|v| (v - mean).powi(2)).sum();
    let ssr = residuals.norm_squared();
    let r_squared = if sst > 0.0 {
        1.0 - ssr / sst
    } else if ssr == 0.0 {
        1.0
    } else {
        f64::NAN
    };

    Ok(RegressionResult {
        names: design.names().to_vec(),
        coefficients: beta,
        covariance,
        kind,
        fitted,
        residuals,
        r_squared,
        n,
    })
}

/// One group's outcome in one year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelObservation {
    pub year: i32,
    pub group: ParentalGroup,
    pub outcome: f64,
}

fn index_panel(
    panel: &[PanelObservation],
) -> Result<BTreeMap<(i32, ParentalGroup), f64>, StatsError> {
    let mut cells = BTreeMap::new();
    for o in panel {
        if cells.insert((o.year, o.group), o.outcome).is_some() {
            return Err(StatsError::DuplicateObservation {
                year: o.year,
                group: o.group,
            });
        }
    }
    Ok(cells)
}

fn indicator(hit: impl Iterator<Item = bool>) -> Vec<f64> {
    hit.map(|b| if b { 1.0 } else { 0.0 }).collect()
}

/// Group, year and group-by-year dummies with the given baselines omitted.
pub fn fixed_effects(
    panel: &[PanelObservation],
    baseline_year: i32,
    baseline_group: ParentalGroup,
    kind: CovarianceKind,
) -> Result<RegressionResult, StatsError> {
    let cells = index_panel(panel)?;
    let years: BTreeSet<i32> = cells.keys().map(|k| k.0).collect();
    let groups: BTreeSet<ParentalGroup> = cells.keys().map(|k| k.1).collect();
    if !years.contains(&baseline_year) {
        return Err(StatsError::InvalidPanel(format!(
            "baseline year {baseline_year} not in panel"
        )));
    }
    if !groups.contains(&baseline_group) {
        return Err(StatsError::InvalidPanel(format!(
            "baseline group {baseline_group} not in panel"
        )));
    }
    for &y in &years {
        for &g in &groups {
            if !cells.contains_key(&(y, g)) {
                return Err(StatsError::IncompletePanel { year: y, group: g });
            }
        }
    }
    let obs: Vec<(i32, ParentalGroup, f64)> = cells.iter().map(|(&(y, g), &v)| (y, g, v)).collect();
    let n = obs.len();
    let other_groups: Vec<ParentalGroup> = groups
        .iter()
        .copied()
        .filter(|g| *g != baseline_group)
        .collect();
    let other_years: Vec<i32> = years
        .iter()
        .copied()
        .filter(|y| *y != baseline_year)
        .collect();

    let mut design = Design::new(n).column("Constant", vec![1.0; n]);
    for &g in &other_groups {
        design = design.column(g.dummy_name(), indicator(obs.iter().map(|o| o.1 == g)));
    }
    for &y in &other_years {
        design = design.column(format!("Year{y}"), indicator(obs.iter().map(|o| o.0 == y)));
    }
    for &y in &other_years {
        for &g in &other_groups {
            design = design.column(
                format!("Year{y}*{}", g.dummy_name()),
                indicator(obs.iter().map(|o| o.0 == y && o.1 == g)),
            );
        }
    }
    let outcomes: Vec<f64> = obs.iter().map(|o| o.2).collect();
    ols(&design, &outcomes, kind)
}

pub const DID_TREATED: &str = "Treated";
pub const DID_POST: &str = "Post";
pub const DID_INTERACTION: &str = "Treated*Post";

/// Treated-versus-control difference in differences around `post_year`.
pub fn did(
    panel: &[PanelObservation],
    treated: ParentalGroup,
    control: ParentalGroup,
    post_year: i32,
    kind: CovarianceKind,
) -> Result<RegressionResult, StatsError> {
    if treated == control {
        return Err(StatsError::InvalidPanel(
            "treated and control groups must differ".into(),
        ));
    }
    let cells = index_panel(panel)?;
    let years: BTreeSet<i32> = cells.keys().map(|k| k.0).collect();
    for &y in &years {
        for g in [treated, control] {
            if !cells.contains_key(&(y, g)) {
                return Err(StatsError::IncompletePanel { year: y, group: g });
            }
        }
    }
    let obs: Vec<(i32, ParentalGroup, f64)> = cells
        .iter()
        .filter(|(k, _)| k.1 == treated || k.1 == control)
        .map(|(&(y, g), &v)| (y, g, v))
        .collect();
    let n = obs.len();
    let design = Design::new(n)
        .column("Constant", vec![1.0; n])
        .column(DID_TREATED, indicator(obs.iter().map(|o| o.1 == treated)))
        .column(DID_POST, indicator(obs.iter().map(|o| o.0 >= post_year)))
        .column(
            DID_INTERACTION,
            indicator(obs.iter().map(|o| o.1 == treated && o.0 >= post_year)),
        );
    let outcomes: Vec<f64> = obs.iter().map(|o| o.2).collect();
    ols(&design, &outcomes, kind)
}
