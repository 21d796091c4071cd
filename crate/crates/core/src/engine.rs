//! Ties parameters, population data and scenario choices together.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::classifier::{
    classify_bins, combine_categories, BoundRule, ClassifyError, EligibilityEstimate,
    ReliefCategory, Scenario,
};
use crate::money::Headcount;
use crate::params::{ParamSet, ParamsError, ParentalGroup, ProgramParameters};
use crate::population::{PopulationError, PopulationTable};
use crate::stats::PanelObservation;
use crate::taxmath::{HouseholdProfile, LiabilityMode, TaxMathError, TaxModel, ThresholdSet};

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Population(#[from] PopulationError),
    #[error(transparent)]
    TaxMath(#[from] TaxMathError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
    #[error("{0}: denominator is zero")]
    DivisionByZero(String),
    #[error("{0}")]
    InvalidInput(String),
}

impl EngineError {
    /// True for failures reading files, as opposed to bad values.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            EngineError::Params(ParamsError::Io { .. })
                | EngineError::Population(PopulationError::Io { .. })
        )
    }
}

/// Where the per-household children count comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChildrenMode {
    FixedOne,
    /// Average of the group's children histogram for the given year.
    GroupAverage {
        year: i32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineOptions {
    pub liability: LiabilityMode,
    /// Round group averages to hundredths before use.
    pub round_children: bool,
    /// Pool children histograms over this range instead of using one year.
    pub period_average: Option<RangeInclusive<i32>>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            liability: LiabilityMode::Exact,
            round_children: true,
            period_average: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Engine {
    params: ParamSet,
    population: PopulationTable,
    options: EngineOptions,
}

impl Engine {
    pub fn new(params: ParamSet, population: PopulationTable, options: EngineOptions) -> Self {
        Engine {
            params,
            population,
            options,
        }
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn population(&self) -> &PopulationTable {
        &self.population
    }

    pub fn options(&self) -> &EngineOptions {
        &self.options
    }

    pub fn year_params(&self, year: i32) -> Result<&ProgramParameters, EngineError> {
        Ok(self.params.get(year)?)
    }

    pub fn children(
        &self,
        mode: ChildrenMode,
        group: ParentalGroup,
    ) -> Result<Headcount, EngineError> {
        let avg = match mode {
            ChildrenMode::FixedOne => return Ok(Headcount::whole(1)),
            ChildrenMode::GroupAverage { year } => match &self.options.period_average {
                Some(range) => self
                    .population
                    .pooled_average_children(range.clone(), group)?,
                None => self.population.average_children(year, group)?,
            },
        };
        Ok(if self.options.round_children {
            avg.rounded_to_hundredths()
        } else {
            avg
        })
    }

    /// The children mode a scenario uses for a given year.
    pub fn scenario_children(scenario: Scenario, year: i32) -> ChildrenMode {
        match scenario {
            Scenario::S1 => ChildrenMode::FixedOne,
            Scenario::S2 => ChildrenMode::GroupAverage { year },
        }
    }

    pub fn profile(
        &self,
        group: ParentalGroup,
        mode: ChildrenMode,
    ) -> Result<HouseholdProfile, EngineError> {
        Ok(HouseholdProfile::new(group, self.children(mode, group)?))
    }

    pub fn model<'a>(
        &self,
        params: &'a ProgramParameters,
        profile: HouseholdProfile,
    ) -> TaxModel<'a> {
        TaxModel::new(params, profile, self.options.liability)
    }

    pub fn thresholds_with(
        &self,
        params: &ProgramParameters,
        group: ParentalGroup,
        mode: ChildrenMode,
    ) -> Result<ThresholdSet, EngineError> {
        let profile = self.profile(group, mode)?;
        Ok(self.model(params, profile).thresholds()?)
    }

    /// Thresholds for a year's own rules under a scenario.
    pub fn thresholds(
        &self,
        year: i32,
        group: ParentalGroup,
        scenario: Scenario,
    ) -> Result<ThresholdSet, EngineError> {
        let params = self.year_params(year)?;
        self.thresholds_with(params, group, Self::scenario_children(scenario, year))
    }

    /// Category counts for `pop_year` bins under arbitrary thresholds.
    pub fn counts(
        &self,
        pop_year: i32,
        thresholds: &ThresholdSet,
        rule: BoundRule,
    ) -> Result<[u64; 6], EngineError> {
        let bins = self.population.bins(pop_year, thresholds.profile.group)?;
        Ok(classify_bins(bins, thresholds, rule)?)
    }

    pub fn estimate(
        &self,
        pop_year: i32,
        thresholds: &ThresholdSet,
        scenario: Scenario,
        rule: BoundRule,
    ) -> Result<EligibilityEstimate, EngineError> {
        let counts = self.counts(pop_year, thresholds, rule)?;
        Ok(EligibilityEstimate::new(
            pop_year,
            thresholds.year,
            thresholds.profile.group,
            scenario,
            counts,
        ))
    }

    /// A year's population classified under that year's rules.
    pub fn classify(
        &self,
        year: i32,
        group: ParentalGroup,
        scenario: Scenario,
    ) -> Result<EligibilityEstimate, EngineError> {
        let t = self.thresholds(year, group, scenario)?;
        self.estimate(year, &t, scenario, scenario.rule())
    }

    /// Group-year panel of the combined share of `outcome` categories.
    pub fn panel(
        &self,
        years: &[i32],
        groups: &[ParentalGroup],
        scenario: Scenario,
        outcome: &BTreeSet<ReliefCategory>,
    ) -> Result<Vec<PanelObservation>, EngineError> {
        let mut panel = Vec::with_capacity(years.len() * groups.len());
        for &year in years {
            for &group in groups {
                let est = self.classify(year, group, scenario)?;
                panel.push(PanelObservation {
                    year,
                    group,
                    outcome: combine_categories(&est, outcome)?,
                });
            }
        }
        Ok(panel)
    }

    /// Years with both parameters and population data.
    pub fn years(&self) -> Vec<i32> {
        self.population
            .years()
            .into_iter()
            .filter(|y| self.params.get(*y).is_ok())
            .collect()
    }
}
