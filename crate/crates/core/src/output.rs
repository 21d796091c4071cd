//! Flat, round-trippable report rows and their CSV/JSON encodings.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::classifier::{EligibilityEstimate, GeneralizabilityFlag, ReliefCategory, Scenario};
use crate::counterfactual::{DependentGap, ParityAnalysis, RefundabilityAnalysis};
use crate::money::{Headcount, Money};
use crate::params::ParentalGroup;
use crate::stats::RegressionResult;
use crate::taxmath::{LiabilityMode, ThresholdSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Writes `rows` as a CSV table with a header, or as a pretty JSON array.
pub fn emit<T: Serialize, W: Write>(
    rows: &[T],
    format: Format,
    mut w: W,
) -> Result<(), OutputError> {
    match format {
        Format::Csv => {
            let mut wr = csv::Writer::from_writer(w);
            for r in rows {
                wr.serialize(r)?;
            }
            wr.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, rows)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn parse<T: DeserializeOwned>(text: &str, format: Format) -> Result<Vec<T>, OutputError> {
    match format {
        Format::Csv => {
            let mut rd = csv::Reader::from_reader(text.as_bytes());
            Ok(rd.deserialize().collect::<Result<_, _>>()?)
        }
        Format::Json => Ok(serde_json::from_str(text)?),
    }
}

/// NaN has no JSON encoding, so undefined statistics travel as empty cells.
fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub year: i32,
    pub group: ParentalGroup,
    pub scenario: Scenario,
    pub liability: LiabilityMode,
    pub children: Headcount,
    pub t_refund_floor: Money,
    pub t_full_actc: Money,
    pub t_full_ctc: Money,
    pub t_full_combined: Money,
    pub t_phaseout_start: Money,
    pub t_total_phaseout: Money,
}

impl ThresholdRow {
    pub fn new(t: &ThresholdSet, scenario: Scenario, liability: LiabilityMode) -> Self {
        ThresholdRow {
            year: t.year,
            group: t.profile.group,
            scenario,
            liability,
            children: t.profile.children,
            t_refund_floor: t.t_refund_floor,
            t_full_actc: t.t_full_actc,
            t_full_ctc: t.t_full_ctc,
            t_full_combined: t.t_full_combined,
            t_phaseout_start: t.t_phaseout_start,
            t_total_phaseout: t.t_total_phaseout,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyRow {
    pub year: i32,
    pub law_year: i32,
    pub group: ParentalGroup,
    pub scenario: Scenario,
    pub category: ReliefCategory,
    pub count: u64,
    pub total: u64,
    pub proportion: f64,
    pub flag: GeneralizabilityFlag,
}

impl ClassifyRow {
    pub fn from_estimate(est: &EligibilityEstimate) -> Vec<Self> {
        ReliefCategory::ALL
            .iter()
            .map(|&c| {
                let s = est.share(c);
                ClassifyRow {
                    year: est.year,
                    law_year: est.law_year,
                    group: est.group,
                    scenario: est.scenario,
                    category: c,
                    count: s.count,
                    total: est.total,
                    proportion: s.proportion,
                    flag: s.flag,
                }
            })
            .collect()
    }
}

/// `subject` is a group name, or `gap` for fathers minus mothers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityOutRow {
    pub year: i32,
    pub scenario: Scenario,
    pub subject: String,
    pub before_single: f64,
    pub before_combined: f64,
    pub after: f64,
}

pub const GAP_SUBJECT: &str = "gap";
pub const ALL_GROUPS: &str = "all";

impl ParityOutRow {
    pub fn rows(a: &ParityAnalysis) -> Vec<Self> {
        let mut rows: Vec<Self> = a
            .rows
            .iter()
            .map(|r| ParityOutRow {
                year: a.year,
                scenario: a.scenario,
                subject: r.group.to_string(),
                before_single: r.before_single,
                before_combined: r.before_combined,
                after: r.after,
            })
            .collect();
        rows.push(ParityOutRow {
            year: a.year,
            scenario: a.scenario,
            subject: GAP_SUBJECT.into(),
            before_single: a.gap_before_single,
            before_combined: a.gap_before_combined,
            after: a.gap_after,
        });
        rows
    }
}

/// One row per group plus an `all` row carrying the aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefundOutRow {
    pub year: i32,
    pub scenario: Scenario,
    pub subject: String,
    pub gained: u64,
    pub total: u64,
    pub delta: f64,
}

impl RefundOutRow {
    pub fn rows(a: &RefundabilityAnalysis) -> Vec<Self> {
        let mut rows: Vec<Self> = a
            .rows
            .iter()
            .map(|r| RefundOutRow {
                year: a.year,
                scenario: a.scenario,
                subject: r.group.to_string(),
                gained: r.gained,
                total: r.total,
                delta: r.delta,
            })
            .collect();
        let total: u64 = a.rows.iter().map(|r| r.total).sum();
        rows.push(RefundOutRow {
            year: a.year,
            scenario: a.scenario,
            subject: ALL_GROUPS.into(),
            gained: a.aggregate,
            total,
            delta: if total == 0 {
                0.0
            } else {
                a.aggregate as f64 / total as f64
            },
        });
        rows
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependentGapRow {
    pub first_year: i32,
    pub last_year: i32,
    pub children: String,
    pub fathers: f64,
    pub mothers: f64,
    pub gap: f64,
}

impl DependentGapRow {
    pub fn rows(g: &DependentGap) -> Vec<Self> {
        [
            ("fixed_one", g.fixed_one),
            ("group_average", g.group_average),
        ]
        .into_iter()
        .map(|(name, m)| DependentGapRow {
            first_year: g.first_year,
            last_year: g.last_year,
            children: name.into(),
            fathers: m.fathers,
            mothers: m.mothers,
            gap: m.gap,
        })
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionRow {
    pub model: String,
    pub term: String,
    pub estimate: f64,
    pub robust_se: Option<f64>,
    pub p_value: Option<f64>,
    pub stars: String,
    pub n: usize,
    pub r_squared: Option<f64>,
}

impl RegressionRow {
    pub fn rows(model: &str, r: &RegressionResult) -> Vec<Self> {
        r.terms()
            .into_iter()
            .map(|t| RegressionRow {
                model: model.into(),
                term: t.term,
                estimate: t.estimate,
                robust_se: finite(t.robust_se),
                p_value: finite(t.p_value),
                stars: t.stars,
                n: r.n,
                r_squared: finite(r.r_squared),
            })
            .collect()
    }
}
