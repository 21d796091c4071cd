//! Assigns income bins to the six relief categories.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::money::{Amount, Money};
use crate::params::{FilingStatus, ParentalGroup};
use crate::population::IncomeBin;
use crate::taxmath::{TaxModel, ThresholdSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error("threshold {0} is negative")]
    ThresholdOutOfRange(Money),
    #[error("category {0} is unavailable for this estimate")]
    UnavailableCategory(ReliefCategory),
}

/// Relief categories in ascending order of income.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReliefCategory {
    /// (a) Income too low for any credit or refund.
    IneligibleLow,
    /// (b) Part of the refundable credit.
    SomeActc,
    /// (c) The full refundable credit, but not the full credit via tax.
    FullActc,
    /// (d) The full credit.
    FullCtc,
    /// (e) A phased-out credit.
    SomeCtc,
    /// (f) Income too high for any credit.
    IneligibleHigh,
}

impl ReliefCategory {
    pub const ALL: [ReliefCategory; 6] = [
        ReliefCategory::IneligibleLow,
        ReliefCategory::SomeActc,
        ReliefCategory::FullActc,
        ReliefCategory::FullCtc,
        ReliefCategory::SomeCtc,
        ReliefCategory::IneligibleHigh,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn letter(self) -> char {
        (b'a' + self as u8) as char
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReliefCategory::IneligibleLow => "ineligible_low",
            ReliefCategory::SomeActc => "some_actc",
            ReliefCategory::FullActc => "full_actc",
            ReliefCategory::FullCtc => "full_ctc",
            ReliefCategory::SomeCtc => "some_ctc",
            ReliefCategory::IneligibleHigh => "ineligible_high",
        }
    }
}

impl fmt::Display for ReliefCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReliefCategory {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s || s.len() == 1 && s.starts_with(c.letter()))
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

/// How a bin that straddles a threshold is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundRule {
    /// The straddling bin stays below the threshold.
    Upper,
    /// The straddling bin crosses only if the threshold lies below its midpoint.
    Middle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Upper-bound bins, one child per household.
    S1,
    /// Midpoint bins, group-year average children.
    S2,
}

impl Scenario {
    pub const ALL: [Scenario; 2] = [Scenario::S1, Scenario::S2];

    pub fn rule(self) -> BoundRule {
        match self {
            Scenario::S1 => BoundRule::Upper,
            Scenario::S2 => BoundRule::Middle,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::S1 => "s1",
            Scenario::S2 => "s2",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Scenario::S1),
            "s2" => Ok(Scenario::S2),
            _ => Err(format!("unknown scenario `{s}` (expected s1 or s2)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneralizabilityFlag {
    Accurate,
    /// Part of the category lies above the binned income range.
    Underestimate,
    /// The category lies wholly above the binned income range.
    Unavailable,
}

impl fmt::Display for GeneralizabilityFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneralizabilityFlag::Accurate => "accurate",
            GeneralizabilityFlag::Underestimate => "underestimate",
            GeneralizabilityFlag::Unavailable => "unavailable",
        })
    }
}

/// How well each category's share generalizes beyond the $100,000 bin ceiling.
pub fn flag_categories(
    group: ParentalGroup,
    year: i32,
    scenario: Scenario,
) -> [GeneralizabilityFlag; 6] {
    use GeneralizabilityFlag::{Accurate as Ac, Unavailable as Na, Underestimate as Un};
    let post_2017 = year >= 2018;
    let tail = match (group.filing_status(), post_2017, scenario) {
        (FilingStatus::MarriedJoint, false, _) => [Un, Na, Na],
        (FilingStatus::MarriedJoint, true, _) => [Na, Na, Na],
        (FilingStatus::HeadOfHousehold, false, Scenario::S1) => [Ac, Ac, Un],
        (FilingStatus::HeadOfHousehold, false, Scenario::S2) => [Ac, Un, Na],
        (FilingStatus::HeadOfHousehold, true, _) => [Un, Na, Na],
    };
    [Ac, Ac, Ac, tail[0], tail[1], tail[2]]
}

/// Whether the bin, as a whole, has crossed `boundary` under `rule`.
pub fn bin_crosses(bin: &IncomeBin, boundary: Money, rule: BoundRule) -> bool {
    match rule {
        BoundRule::Upper => boundary <= bin.lower,
        // A threshold exactly at the midpoint keeps the bin below it.
        BoundRule::Middle => boundary < bin.midpoint(),
    }
}

pub fn bin_category(bin: &IncomeBin, thresholds: &ThresholdSet, rule: BoundRule) -> ReliefCategory {
    let crossed = thresholds
        .boundaries()
        .iter()
        .filter(|b| bin_crosses(bin, b.value, rule))
        .count();
    ReliefCategory::ALL[crossed]
}

/// Category counts, indexed by [`ReliefCategory::index`].
pub fn classify_bins(
    bins: &[IncomeBin],
    thresholds: &ThresholdSet,
    rule: BoundRule,
) -> Result<[u64; 6], ClassifyError> {
    if let Some(b) = thresholds
        .boundaries()
        .iter()
        .find(|b| b.value.is_negative())
    {
        return Err(ClassifyError::ThresholdOutOfRange(b.value));
    }
    let mut counts = [0u64; 6];
    for bin in bins {
        counts[bin_category(bin, thresholds, rule).index()] += bin.count;
    }
    Ok(counts)
}

/// Parents in bins that have crossed `lower` but not `upper`.
pub fn count_between(bins: &[IncomeBin], lower: Money, upper: Money, rule: BoundRule) -> u64 {
    bins.iter()
        .filter(|b| bin_crosses(b, lower, rule) && !bin_crosses(b, upper, rule))
        .map(|b| b.count)
        .sum()
}

/// Category of a single income, read straight off the thresholds.
pub fn category_of_income(thresholds: &ThresholdSet, income: Amount) -> ReliefCategory {
    ReliefCategory::ALL[thresholds.category_index(income)]
}

/// Category of a single income by evaluating the benefit schedule directly.
pub fn direct_category(model: &TaxModel<'_>, income: Amount) -> ReliefCategory {
    let b = model.benefit(income);
    if b.allowed.is_zero() {
        ReliefCategory::IneligibleHigh
    } else if income > model.phaseout_start().to_amount() {
        ReliefCategory::SomeCtc
    } else if b.tax >= model.max_credit() {
        ReliefCategory::FullCtc
    } else if b.total >= model.max_refund() {
        ReliefCategory::FullActc
    } else if b.total.is_positive() {
        ReliefCategory::SomeActc
    } else {
        ReliefCategory::IneligibleLow
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryShare {
    pub category: ReliefCategory,
    pub count: u64,
    pub proportion: f64,
    pub flag: GeneralizabilityFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EligibilityEstimate {
    /// Year of the population data.
    pub year: i32,
    /// Year of the program rules behind the thresholds.
    pub law_year: i32,
    pub group: ParentalGroup,
    pub scenario: Scenario,
    pub total: u64,
    pub shares: [CategoryShare; 6],
}

impl EligibilityEstimate {
    pub fn new(
        year: i32,
        law_year: i32,
        group: ParentalGroup,
        scenario: Scenario,
        counts: [u64; 6],
    ) -> Self {
        let total: u64 = counts.iter().sum();
        let flags = flag_categories(group, law_year, scenario);
        let shares = std::array::from_fn(|i| CategoryShare {
            category: ReliefCategory::ALL[i],
            count: counts[i],
            proportion: if total == 0 {
                0.0
            } else {
                counts[i] as f64 / total as f64
            },
            flag: flags[i],
        });
        EligibilityEstimate {
            year,
            law_year,
            group,
            scenario,
            total,
            shares,
        }
    }

    pub fn share(&self, c: ReliefCategory) -> &CategoryShare {
        &self.shares[c.index()]
    }

    pub fn proportion(&self, c: ReliefCategory) -> f64 {
        self.share(c).proportion
    }

    pub fn count(&self, c: ReliefCategory) -> u64 {
        self.share(c).count
    }
}

/// Classifies one group's bins; flags follow the law year of `thresholds`.
pub fn classify(
    bins: &[IncomeBin],
    population_year: i32,
    thresholds: &ThresholdSet,
    scenario: Scenario,
) -> Result<EligibilityEstimate, ClassifyError> {
    let counts = classify_bins(bins, thresholds, scenario.rule())?;
    Ok(EligibilityEstimate::new(
        population_year,
        thresholds.year,
        thresholds.profile.group,
        scenario,
        counts,
    ))
}

/// Sum of the proportions of `cats`.
pub fn combine_categories(
    est: &EligibilityEstimate,
    cats: &BTreeSet<ReliefCategory>,
) -> Result<f64, ClassifyError> {
    let mut sum = 0.0;
    for &c in cats {
        let share = est.share(c);
        if share.flag == GeneralizabilityFlag::Unavailable {
            return Err(ClassifyError::UnavailableCategory(c));
        }
        sum += share.proportion;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::money::Headcount;
    use crate::params::ParamSet;
    use crate::taxmath::{HouseholdProfile, LiabilityMode};

    fn bin(lower: i64, count: u64) -> IncomeBin {
        IncomeBin {
            lower: Money::from_dollars(lower),
            upper: Money::from_dollars(lower + 2_500),
            count,
        }
    }

    fn bins(count: impl Fn(usize) -> u64) -> Vec<IncomeBin> {
        (0..40).map(|i| bin(i as i64 * 2_500, count(i))).collect()
    }

    fn fixtures() -> ParamSet {
        ParamSet::from_json_str(include_str!("../data/params.json")).unwrap()
    }

    fn thresholds_2009_single() -> ThresholdSet {
        let ps = fixtures();
        let p = ps.get(2009).unwrap();
        TaxModel::new(
            p,
            HouseholdProfile::one_child(ParentalGroup::SingleFather),
            LiabilityMode::Exact,
        )
        .thresholds()
        .unwrap()
    }

    #[test]
    fn straddling_bin_rules() {
        let t = thresholds_2009_single();
        assert_eq!(t.t_full_ctc, Money::from_dollars(25_650));
        let b = bin(25_000, 1);
        assert_eq!(
            bin_category(&b, &t, BoundRule::Upper),
            ReliefCategory::FullActc
        );
        assert_eq!(
            bin_category(&b, &t, BoundRule::Middle),
            ReliefCategory::FullCtc
        );
        let mut shifted = t;
        shifted.t_full_ctc = Money::from_dollars(27_000);
        assert_eq!(
            bin_category(&b, &shifted, BoundRule::Middle),
            ReliefCategory::FullActc
        );
        shifted.t_full_ctc = Money::from_dollars(26_250);
        assert_eq!(
            bin_category(&b, &shifted, BoundRule::Middle),
            ReliefCategory::FullActc
        );
    }

    #[test]
    fn edge_threshold_splits_cleanly() {
        let t = thresholds_2009_single();
        let mut edge = t;
        edge.t_full_ctc = Money::from_dollars(25_000);
        for rule in [BoundRule::Upper, BoundRule::Middle] {
            assert_eq!(
                bin_category(&bin(25_000, 1), &edge, rule),
                ReliefCategory::FullCtc
            );
            assert_eq!(
                bin_category(&bin(22_500, 1), &edge, rule),
                ReliefCategory::FullActc
            );
        }
    }

    #[test]
    fn all_low_income_is_category_a() {
        let t = thresholds_2009_single();
        let b = [bin(0, 50)];
        let counts = classify_bins(&b, &t, BoundRule::Upper).unwrap();
        assert_eq!(counts, [50, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn conservation_and_dominance() {
        let t = thresholds_2009_single();
        let b = bins(|i| (i as u64 * 37) % 11 + 1);
        let total: u64 = b.iter().map(|x| x.count).sum();
        let up = classify_bins(&b, &t, BoundRule::Upper).unwrap();
        let mid = classify_bins(&b, &t, BoundRule::Middle).unwrap();
        assert_eq!(up.iter().sum::<u64>(), total);
        assert_eq!(mid.iter().sum::<u64>(), total);
        let at_or_above_d = |c: &[u64; 6]| c[3..].iter().sum::<u64>();
        assert!(at_or_above_d(&up) <= at_or_above_d(&mid));
    }

    #[test]
    fn flag_examples() {
        use GeneralizabilityFlag::*;
        let d = ReliefCategory::FullCtc.index();
        let e = ReliefCategory::SomeCtc.index();
        assert_eq!(
            flag_categories(ParentalGroup::Married, 2010, Scenario::S1)[d],
            Underestimate
        );
        assert_eq!(
            flag_categories(ParentalGroup::SingleFather, 2010, Scenario::S1)[d],
            Accurate
        );
        assert_eq!(
            flag_categories(ParentalGroup::SingleMother, 2018, Scenario::S1)[e],
            Unavailable
        );
        let m = flag_categories(ParentalGroup::Married, 2005, Scenario::S2);
        assert_eq!(&m[3..], &[Underestimate, Unavailable, Unavailable]);
        let s = flag_categories(ParentalGroup::SingleMother, 2005, Scenario::S1);
        assert_eq!(&s[..5], &[Accurate; 5]);
        assert_eq!(s[5], Underestimate);
    }

    #[test]
    fn combining() {
        let est = EligibilityEstimate::new(
            2017,
            2017,
            ParentalGroup::SingleMother,
            Scenario::S1,
            [1, 0, 3, 4, 2, 0],
        );
        let set = |cs: &[ReliefCategory]| cs.iter().copied().collect::<BTreeSet<_>>();
        use ReliefCategory::*;
        let bc = combine_categories(&est, &set(&[SomeActc, FullActc])).unwrap();
        assert_eq!(bc, est.proportion(FullActc));
        let all = combine_categories(&est, &set(&ReliefCategory::ALL)).unwrap();
        assert!((all - 1.0).abs() < 1e-12);
        let married = EligibilityEstimate::new(
            2017,
            2017,
            ParentalGroup::Married,
            Scenario::S1,
            [1, 0, 3, 4, 0, 0],
        );
        assert_eq!(
            combine_categories(&married, &set(&[FullCtc, SomeCtc])),
            Err(ClassifyError::UnavailableCategory(SomeCtc))
        );
    }

    #[test]
    fn direct_matches_thresholds_on_dollar_grid() {
        let ps = fixtures();
        for year in [2003, 2008, 2012, 2018] {
            let p = ps.get(year).unwrap();
            for g in ParentalGroup::ALL {
                for kids in [100, 189, 175] {
                    let m = TaxModel::new(
                        p,
                        HouseholdProfile::new(g, Headcount::from_hundredths(kids)),
                        LiabilityMode::Exact,
                    );
                    let t = m.thresholds().unwrap();
                    for d in (0..=120_000).step_by(7) {
                        let y = Money::from_dollars(d).to_amount();
                        assert_eq!(
                            category_of_income(&t, y),
                            direct_category(&m, y),
                            "{year} {g} {kids} {d}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn parsing() {
        assert_eq!(
            "c".parse::<ReliefCategory>().unwrap(),
            ReliefCategory::FullActc
        );
        assert_eq!(
            "some_ctc".parse::<ReliefCategory>().unwrap(),
            ReliefCategory::SomeCtc
        );
        assert!("z".parse::<ReliefCategory>().is_err());
        assert_eq!("S2".parse::<Scenario>().unwrap(), Scenario::S2);
    }
}
