//! What-if analyses over program parameters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifier::{
    bin_category, bin_crosses, count_between, BoundRule, ReliefCategory, Scenario,
};
use crate::engine::{ChildrenMode, Engine, EngineError};
use crate::money::Money;
use crate::params::{
    apply_counterfactual_overrides, apply_overrides, Override, OverrideSet, ParamField,
    ParentalGroup, ProgramParameters,
};
use crate::population::IncomeBin;
use crate::taxmath::ThresholdSet;

/// Which income threshold opens full relief.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pathway {
    /// One instrument alone: the refundable credit under parity, otherwise
    /// the nonrefundable credit against tax.
    Single,
    /// Tax credit and refund together.
    Combined,
}

/// What a counterfactual table reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Measure {
    Category(ReliefCategory),
    /// Bins that reach the full benefit and are not yet phasing out.
    FullRelief(Pathway),
}

impl Measure {
    /// Parents in `bins` counted by this measure.
    pub fn count(
        self,
        bins: &[IncomeBin],
        params: &ProgramParameters,
        thresholds: &ThresholdSet,
        rule: BoundRule,
    ) -> u64 {
        match self {
            Measure::Category(c) => bins
                .iter()
                .filter(|bin| bin_category(bin, thresholds, rule) == c)
                .map(|bin| bin.count)
                .sum(),
            Measure::FullRelief(path) => {
                let lower = full_relief_threshold(params, thresholds, path);
                count_between(bins, lower, thresholds.t_phaseout_start, rule)
            }
        }
    }
}

pub fn full_relief_threshold(params: &ProgramParameters, t: &ThresholdSet, path: Pathway) -> Money {
    match path {
        Pathway::Single if params.is_parity() => t.t_full_actc,
        Pathway::Single => t.t_full_ctc,
        Pathway::Combined => t.t_full_combined,
    }
}

/// One row of a step table.
#[derive(Debug, Clone)]
pub struct PiecemealStep {
    pub label: String,
    /// Cumulative replacements applied to the base parameters.
    pub overrides: OverrideSet,
    /// Year whose children histogram supplies group averages.
    pub children_year: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecemealRow {
    pub step: usize,
    pub label: String,
    pub group: ParentalGroup,
    pub scenario: Scenario,
    pub count: u64,
    pub total: u64,
    pub proportion: f64,
}

/// Classifies the `pop_year` distribution under each step's parameters.
pub fn piecemeal(
    engine: &Engine,
    pop_year: i32,
    base: &ProgramParameters,
    steps: &[PiecemealStep],
    measure: Measure,
    scenario: Scenario,
) -> Result<Vec<PiecemealRow>, EngineError> {
    let mut rows = Vec::new();
    for (i, step) in steps.iter().enumerate() {
        let params = apply_counterfactual_overrides(base, &step.overrides)?;
        for group in ParentalGroup::ALL {
            let mode = Engine::scenario_children(scenario, step.children_year);
            let t = engine.thresholds_with(&params, group, mode)?;
            let bins = engine.population().bins(pop_year, group)?;
            let count = measure.count(bins, &params, &t, scenario.rule());
            let total: u64 = bins.iter().map(|b| b.count).sum();
            rows.push(PiecemealRow {
                step: i + 1,
                label: step.label.clone(),
                group,
                scenario,
                count,
                total,
                proportion: ratio(count, total),
            });
        }
    }
    Ok(rows)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// The three step-by-step reform tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PiecemealTable {
    /// Full-credit eligibility, credit raised first.
    #[serde(rename = "1a")]
    T1a,
    /// Full-refund eligibility, refund cap raised first.
    #[serde(rename = "1b")]
    T1b,
    /// Full relief by either instrument, then parity, then no refund floor.
    #[serde(rename = "1c")]
    T1c,
}

impl FromStr for PiecemealTable {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "1a" => Ok(PiecemealTable::T1a),
            "1b" => Ok(PiecemealTable::T1b),
            "1c" => Ok(PiecemealTable::T1c),
            other => Err(format!("unknown table `{other}` (expected 1a, 1b or 1c)")),
        }
    }
}

impl fmt::Display for PiecemealTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PiecemealTable::T1a => "1a",
            PiecemealTable::T1b => "1b",
            PiecemealTable::T1c => "1c",
        })
    }
}

/// A fully specified step table: base rules, steps and the reported measure.
#[derive(Debug, Clone)]
pub struct PiecemealPlan {
    pub base: ProgramParameters,
    pub pop_year: i32,
    pub steps: Vec<PiecemealStep>,
    pub measure: Measure,
}

/// Builds a step table moving from `from` year rules to `to` year rules,
/// classified on the `to` year distribution.
pub fn plan(
    table: PiecemealTable,
    from: &ProgramParameters,
    to: &ProgramParameters,
) -> PiecemealPlan {
    use ParamField as F;
    let (fy, ty) = (from.year, to.year);
    let full = from.diff(to);
    let reference = |label: String| PiecemealStep {
        label,
        overrides: full.clone(),
        children_year: ty,
    };
    match table {
        PiecemealTable::T1a | PiecemealTable::T1b => {
            let credit = [F::CtcPerChild];
            let refund_cap = [F::ActcPerChild];
            let deductions: Vec<F> = [
                F::both(F::StandardDeduction),
                F::both(F::ExemptionPerPerson),
            ]
            .concat();
            let floor = [F::RefundThreshold];
            let phaseout = F::both(F::PhaseoutStart);
            let (first, first_label, fifth, fifth_label, measure) = if table == PiecemealTable::T1a
            {
                (
                    &credit[..],
                    "credit maximum",
                    &refund_cap[..],
                    "refund cap",
                    Measure::Category(ReliefCategory::FullCtc),
                )
            } else {
                (
                    &refund_cap[..],
                    "refund cap",
                    &credit[..],
                    "credit maximum",
                    Measure::Category(ReliefCategory::FullActc),
                )
            };
            let sequence: [(&str, &[F]); 5] = [
                (first_label, first),
                ("standard deduction and exemptions", &deductions),
                ("refund floor", &floor),
                ("phaseout start", &phaseout),
                (fifth_label, fifth),
            ];
            let mut steps = vec![
                reference(format!("{ty} distribution, {ty} rules")),
                PiecemealStep {
                    label: format!("{ty} distribution, {fy} rules"),
                    overrides: OverrideSet::new(),
                    children_year: fy,
                },
            ];
            let mut acc = OverrideSet::new();
            for (label, fields) in sequence {
                acc = acc.adopt(fields, to);
                steps.push(PiecemealStep {
                    label: format!("+ {label} at {ty} level"),
                    overrides: acc.clone(),
                    children_year: fy,
                });
            }
            // Brackets, any remaining differences, and the children averages.
            steps.push(PiecemealStep {
                label: format!("+ {ty} brackets and dependents"),
                overrides: acc.merged(&full),
                children_year: ty,
            });
            PiecemealPlan {
                base: from.clone(),
                pop_year: ty,
                steps,
                measure,
            }
        }
        PiecemealTable::T1c => {
            let parity = OverrideSet::new().with(Override::ActcPerChild(to.ctc_per_child));
            let no_floor = parity.clone().with(Override::RefundThreshold(Money::ZERO));
            let step = |label: &str, overrides| PiecemealStep {
                label: label.to_string(),
                overrides,
                children_year: ty,
            };
            PiecemealPlan {
                base: to.clone(),
                pop_year: ty,
                steps: vec![
                    step(
                        &format!("{ty} distribution, {ty} rules"),
                        OverrideSet::new(),
                    ),
                    step("+ refund cap raised to credit maximum", parity),
                    step("+ refund floor removed", no_floor),
                ],
                measure: Measure::FullRelief(Pathway::Single),
            }
        }
    }
}

pub fn run_plan(
    engine: &Engine,
    plan: &PiecemealPlan,
    scenario: Scenario,
) -> Result<Vec<PiecemealRow>, EngineError> {
    piecemeal(
        engine,
        plan.pop_year,
        &plan.base,
        &plan.steps,
        plan.measure,
        scenario,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricedOutResult {
    pub year: i32,
    pub group: ParentalGroup,
    pub scenario: Scenario,
    pub new_ctc: Money,
    pub full_relief_old: u64,
    pub priced_out: u64,
    pub proportion_priced_out: f64,
}

/// Share of parents in the full-refund or full-credit categories under parity
/// who fall short of full relief once only the credit maximum rises to `new_ctc`.
pub fn priced_out(
    engine: &Engine,
    year: i32,
    group: ParentalGroup,
    params_parity: &ProgramParameters,
    new_ctc: Money,
    scenario: Scenario,
) -> Result<PricedOutResult, EngineError> {
    if !params_parity.is_parity() {
        return Err(EngineError::InvalidInput(format!(
            "priced-out analysis needs parity rules; {} has credit {} and refund cap {}",
            params_parity.year, params_parity.ctc_per_child, params_parity.actc_per_child
        )));
    }
    if new_ctc <= params_parity.ctc_per_child {
        return Err(EngineError::InvalidInput(format!(
            "new credit {new_ctc} must exceed {}",
            params_parity.ctc_per_child
        )));
    }
    let raised = apply_overrides(
        params_parity,
        &OverrideSet::new().with(Override::CtcPerChild(new_ctc)),
    )?;
    let mode = Engine::scenario_children(scenario, year);
    let old_t = engine.thresholds_with(params_parity, group, mode)?;
    let new_t = engine.thresholds_with(&raised, group, mode)?;
    let rule = scenario.rule();
    let bins = engine.population().bins(year, group)?;
    let mut full_relief_old = 0;
    let mut lost = 0;
    for bin in bins {
        let cat = bin_category(bin, &old_t, rule);
        if cat == ReliefCategory::FullActc || cat == ReliefCategory::FullCtc {
            full_relief_old += bin.count;
            if !bin_crosses(bin, new_t.t_full_combined, rule) {
                lost += bin.count;
            }
        }
    }
    if full_relief_old == 0 {
        return Err(EngineError::DivisionByZero(format!(
            "no {group} parents with full relief in {year}"
        )));
    }
    Ok(PricedOutResult {
        year,
        group,
        scenario,
        new_ctc,
        full_relief_old,
        priced_out: lost,
        proportion_priced_out: lost as f64 / full_relief_old as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub year: i32,
    pub group: ParentalGroup,
    pub scenario: Scenario,
    pub credit: Money,
    pub full_relief: u64,
    pub total: u64,
    pub proportion: f64,
}

/// Full-relief share as the credit maximum varies. With `parity` the refund
/// cap moves with it; otherwise the cap keeps its `year` value.
pub fn credit_size_sweep(
    engine: &Engine,
    year: i32,
    credits: &[Money],
    scenario: Scenario,
    parity: bool,
) -> Result<Vec<SweepRow>, EngineError> {
    if credits.is_empty() || credits.iter().any(|c| *c <= Money::ZERO) {
        return Err(EngineError::InvalidInput(
            "credit values must be nonempty and positive".into(),
        ));
    }
    let base = engine.year_params(year)?;
    let mut rows = Vec::new();
    for group in ParentalGroup::ALL {
        let bins = engine.population().bins(year, group)?;
        let total: u64 = bins.iter().map(|b| b.count).sum();
        for &credit in credits {
            let mut o = OverrideSet::new().with(Override::CtcPerChild(credit));
            if parity {
                o.insert(Override::ActcPerChild(credit));
            }
            let params = apply_overrides(base, &o)?;
            let t = engine.thresholds_with(
                &params,
                group,
                Engine::scenario_children(scenario, year),
            )?;
            let n =
                Measure::FullRelief(Pathway::Combined).count(bins, &params, &t, scenario.rule());
            rows.push(SweepRow {
                year,
                group,
                scenario,
                credit,
                full_relief: n,
                total,
                proportion: ratio(n, total),
            });
        }
    }
    Ok(rows)
}

/// Full-relief shares for one group before and after parity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityRow {
    pub group: ParentalGroup,
    /// Credit pathway alone, current rules.
    pub before_single: f64,
    /// Credit and refund combined, current rules.
    pub before_combined: f64,
    /// Refund cap raised to the credit maximum.
    pub after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityAnalysis {
    pub year: i32,
    pub scenario: Scenario,
    pub rows: Vec<ParityRow>,
    /// Single fathers minus single mothers, in proportion units.
    pub gap_before_single: f64,
    pub gap_before_combined: f64,
    pub gap_after: f64,
}

pub fn restore_parity(
    engine: &Engine,
    year: i32,
    params: &ProgramParameters,
    scenario: Scenario,
) -> Result<ParityAnalysis, EngineError> {
    let parity = apply_overrides(
        params,
        &OverrideSet::new().with(Override::ActcPerChild(params.ctc_per_child)),
    )?;
    let mode = Engine::scenario_children(scenario, year);
    let rule = scenario.rule();
    let mut rows = Vec::new();
    for group in ParentalGroup::ALL {
        let bins = engine.population().bins(year, group)?;
        let total: u64 = bins.iter().map(|b| b.count).sum();
        let share = |p: &ProgramParameters, path: Pathway| -> Result<f64, EngineError> {
            let t = engine.thresholds_with(p, group, mode)?;
            Ok(ratio(
                Measure::FullRelief(path).count(bins, p, &t, rule),
                total,
            ))
        };
        rows.push(ParityRow {
            group,
            before_single: share(params, Pathway::Single)?,
            before_combined: share(params, Pathway::Combined)?,
            after: share(&parity, Pathway::Single)?,
        });
    }
    let gap = |f: fn(&ParityRow) -> f64| f(&rows[1]) - f(&rows[2]);
    Ok(ParityAnalysis {
        year,
        scenario,
        gap_before_single: gap(|r| r.before_single),
        gap_before_combined: gap(|r| r.before_combined),
        gap_after: gap(|r| r.after),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefundabilityRow {
    pub group: ParentalGroup,
    /// Parents below the refund floor who would gain access.
    pub gained: u64,
    pub total: u64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefundabilityAnalysis {
    pub year: i32,
    pub scenario: Scenario,
    pub rows: Vec<RefundabilityRow>,
    pub aggregate: u64,
}

/// Effect of dropping the earned-income floor: everyone now in the lowest
/// category gains access.
pub fn eliminate_refundability(
    engine: &Engine,
    year: i32,
    params: &ProgramParameters,
    scenario: Scenario,
) -> Result<RefundabilityAnalysis, EngineError> {
    let mode = Engine::scenario_children(scenario, year);
    let mut rows = Vec::new();
    for group in ParentalGroup::ALL {
        let t = engine.thresholds_with(params, group, mode)?;
        let counts = engine.counts(year, &t, scenario.rule())?;
        let gained = counts[ReliefCategory::IneligibleLow.index()];
        let total: u64 = counts.iter().sum();
        rows.push(RefundabilityRow {
            group,
            gained,
            total,
            delta: ratio(gained, total),
        });
    }
    let aggregate = rows.iter().map(|r| r.gained).sum();
    Ok(RefundabilityAnalysis {
        year,
        scenario,
        rows,
        aggregate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependentGapMode {
    pub fathers: f64,
    pub mothers: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependentGap {
    pub first_year: i32,
    pub last_year: i32,
    pub rule: BoundRule,
    pub fixed_one: DependentGapMode,
    pub group_average: DependentGapMode,
    /// Change in the father-mother gap once average children are used.
    pub gap_change: f64,
}

/// Mean full-credit share for single fathers and mothers over `years`, with
/// one child versus each group's average children, under `rule`.
pub fn dependent_gap(
    engine: &Engine,
    years: std::ops::RangeInclusive<i32>,
    rule: BoundRule,
) -> Result<DependentGap, EngineError> {
    let (first, last) = (*years.start(), *years.end());
    if first > last {
        return Err(EngineError::InvalidInput(format!(
            "empty year range {first}:{last}"
        )));
    }
    let mean_share = |group: ParentalGroup, average: bool| -> Result<f64, EngineError> {
        let mut sum = 0.0;
        for y in years.clone() {
            let mode = if average {
                ChildrenMode::GroupAverage { year: y }
            } else {
                ChildrenMode::FixedOne
            };
            let t = engine.thresholds_with(engine.year_params(y)?, group, mode)?;
            let counts = engine.counts(y, &t, rule)?;
            sum += ratio(counts[ReliefCategory::FullCtc.index()], counts.iter().sum());
        }
        Ok(sum / (last - first + 1) as f64)
    };
    let mode = |average| -> Result<DependentGapMode, EngineError> {
        let fathers = mean_share(ParentalGroup::SingleFather, average)?;
        let mothers = mean_share(ParentalGroup::SingleMother, average)?;
        Ok(DependentGapMode {
            fathers,
            mothers,
            gap: fathers - mothers,
        })
    };
    let fixed_one = mode(false)?;
    let group_average = mode(true)?;
    Ok(DependentGap {
        first_year: first,
        last_year: last,
        rule,
        gap_change: group_average.gap - fixed_one.gap,
        fixed_one,
        group_average,
    })
}
