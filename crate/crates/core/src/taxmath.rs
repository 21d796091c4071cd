//! Tax liability, the realizable credit/refund at any income, and exact
//! inversion of the benefit schedule into income thresholds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::money::{Amount, Headcount, Money};
use crate::params::{FilingStatus, ParentalGroup, ProgramParameters};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaxMathError {
    #[error("benefit target {target} is not reachable at any income")]
    Unreachable { target: Amount },
    #[error("benefit target {target} must be positive")]
    InvalidTarget { target: Amount },
    #[error("thresholds out of order for {year} {group}: {detail}")]
    OrderingViolation {
        year: i32,
        group: ParentalGroup,
        detail: String,
    },
}

/// A filing unit: parental group plus (possibly fractional) children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HouseholdProfile {
    pub group: ParentalGroup,
    pub children: Headcount,
}

impl HouseholdProfile {
    pub fn new(group: ParentalGroup, children: Headcount) -> Self {
        HouseholdProfile { group, children }
    }

    pub fn one_child(group: ParentalGroup) -> Self {
        Self::new(group, Headcount::whole(1))
    }

    pub fn adults(&self) -> u32 {
        self.group.adults()
    }

    pub fn filing_status(&self) -> FilingStatus {
        self.group.filing_status()
    }

    /// Headcount for personal exemptions: adults plus children.
    pub fn persons(&self) -> Headcount {
        self.children.plus_whole(self.adults())
    }
}

/// How bracket tax is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiabilityMode {
    /// Continuous bracket schedule.
    #[default]
    Exact,
    /// $50 rows of taxable income, each taxed at its midpoint.
    Table,
}

impl FromStr for LiabilityMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(LiabilityMode::Exact),
            "table" => Ok(LiabilityMode::Table),
            other => Err(format!(
                "unknown liability mode `{other}` (expected exact or table)"
            )),
        }
    }
}

impl fmt::Display for LiabilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LiabilityMode::Exact => "exact",
            LiabilityMode::Table => "table",
        })
    }
}

/// Width of one tax-table row, in cents.
const TABLE_ROW: i64 = 50_00;

/// The realized benefit at one income, with the quantities it derives from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenefitSplit {
    pub tax: Amount,
    /// Post-phaseout maximum benefit.
    pub allowed: Amount,
    pub credit: Amount,
    pub refund: Amount,
    pub total: Amount,
}

/// Tax and benefit rules bound to one household and one parameter year.
#[derive(Debug, Clone, Copy)]
pub struct TaxModel<'a> {
    params: &'a ProgramParameters,
    profile: HouseholdProfile,
    mode: LiabilityMode,
}

impl<'a> TaxModel<'a> {
    pub fn new(
        params: &'a ProgramParameters,
        profile: HouseholdProfile,
        mode: LiabilityMode,
    ) -> Self {
        TaxModel {
            params,
            profile,
            mode,
        }
    }

    pub fn params(&self) -> &'a ProgramParameters {
        self.params
    }

    pub fn profile(&self) -> HouseholdProfile {
        self.profile
    }

    pub fn mode(&self) -> LiabilityMode {
        self.mode
    }

    /// Standard deduction plus personal exemptions.
    pub fn tax_free_amount(&self) -> Amount {
        let s = self.params.status(self.profile.filing_status());
        s.standard_deduction.to_amount() + s.exemption_per_person * self.profile.persons()
    }

    /// Envisioned (pre-phaseout) benefit: credit per child times children.
    pub fn max_credit(&self) -> Amount {
        self.params.ctc_per_child * self.profile.children
    }

    /// Cap on the refundable portion.
    pub fn max_refund(&self) -> Amount {
        self.params.actc_per_child * self.profile.children
    }

    pub fn phaseout_start(&self) -> Money {
        self.params
            .status(self.profile.filing_status())
            .phaseout_start
    }

    /// Largest benefit before phaseout. Equals the credit maximum unless a
    /// counterfactual raises the refund cap above it.
    pub fn max_benefit(&self) -> Amount {
        self.max_credit().max(self.max_refund())
    }

    /// Income at which the phaseout has consumed the whole benefit.
    pub fn total_phaseout(&self) -> Amount {
        let m = self.max_benefit();
        self.phaseout_start().to_amount() + m.scale(self.params.phaseout_rate.as_ratio().recip())
    }

    pub fn tax(&self, income: Amount) -> Amount {
        let taxable = income - self.tax_free_amount();
        if !taxable.is_positive() {
            return Amount::zero();
        }
        let schedule = &self.params.status(self.profile.filing_status()).brackets;
        match self.mode {
            LiabilityMode::Exact => schedule.tax(taxable),
            LiabilityMode::Table => schedule.tax(table_row_midpoint(taxable)),
        }
    }

    /// Refund before the cap and before the credit is netted out.
    fn refund_potential(&self, income: Amount) -> Amount {
        let over = income - self.params.refund_threshold.to_amount();
        over.max(Amount::zero()) * self.params.refund_rate
    }

    fn allowed(&self, income: Amount) -> Amount {
        let over = (income - self.phaseout_start().to_amount()).max(Amount::zero());
        (self.max_benefit() - over * self.params.phaseout_rate).max(Amount::zero())
    }

    pub fn benefit(&self, income: Amount) -> BenefitSplit {
        let tax = self.tax(income);
        let allowed = self.allowed(income);
        let credit = tax.min(allowed).min(self.max_credit());
        let refund = self
            .refund_potential(income)
            .min(self.max_refund())
            .min(allowed - credit);
        BenefitSplit {
            tax,
            allowed,
            credit,
            refund,
            total: credit + refund,
        }
    }

    /// Minimal whole-cent income whose total benefit reaches `target`.
    pub fn invert_benefit(&self, target: Amount) -> Result<Money, TaxMathError> {
        if !target.is_positive() {
            return Err(TaxMathError::InvalidTarget { target });
        }
        if target > self.max_benefit() {
            return Err(TaxMathError::Unreachable { target });
        }
        let y = self
            .solve(target, Some(self.max_credit()), self.max_refund())
            .ok_or(TaxMathError::Unreachable { target })?;
        // Ignoring the phaseout, tax plus capped refund first reaches the target
        // at `y`; past the phaseout start the allowance only shrinks.
        if self.allowed(y.to_amount()) < target {
            return Err(TaxMathError::Unreachable { target });
        }
        Ok(y)
    }

    /// Minimal whole-cent income whose tax liability reaches `target`.
    pub fn invert_tax(&self, target: Amount) -> Result<Money, TaxMathError> {
        if !target.is_positive() {
            return Err(TaxMathError::InvalidTarget { target });
        }
        self.solve(target, None, Amount::zero())
            .ok_or(TaxMathError::Unreachable { target })
    }

    /// Minimal cent income with
    /// `min(tax, tax_cap) + min(refund_potential, cap) >= target`.
    fn solve(&self, target: Amount, tax_cap: Option<Amount>, cap: Amount) -> Option<Money> {
        // The tax cap only binds when the refund cap exceeds it; otherwise
        // the crossing happens no later than where tax alone meets the cap.
        let tax_cap = tax_cap.filter(|c| cap > *c);
        match self.mode {
            LiabilityMode::Exact => self
                .solve_exact(target, tax_cap, cap)
                .map(Amount::ceil_cents),
            LiabilityMode::Table => self.solve_table(target, tax_cap, cap),
        }
    }

    fn capped_tax(&self, income: Amount, tax_cap: Option<Amount>) -> Amount {
        let t = self.tax(income);
        tax_cap.map_or(t, |c| t.min(c))
    }

    fn reach(&self, income: Amount, tax_cap: Option<Amount>, cap: Amount) -> Amount {
        self.capped_tax(income, tax_cap) + self.refund_potential(income).min(cap)
    }

    /// The reach function is continuous and linear between breakpoints, so
    /// the crossing is found by interpolation on the bracketing segment.
    fn solve_exact(&self, target: Amount, tax_cap: Option<Amount>, cap: Amount) -> Option<Amount> {
        let tf = self.tax_free_amount();
        let schedule = &self.params.status(self.profile.filing_status()).brackets;
        let r = self.params.refund_threshold.to_amount();
        let mut points = vec![Amount::zero(), r, tf];
        if !cap.is_zero() {
            points.push(r + cap.scale(self.params.refund_rate.as_ratio().recip()));
        }
        points.extend(schedule.edges().map(|e| tf + e.to_amount()));
        if let Some(c) = tax_cap {
            if c.is_positive() {
                points.extend(self.solve_exact(c, None, Amount::zero()));
            }
        }
        points.sort();
        points.dedup();

        let mut prev = (points[0], self.reach(points[0], tax_cap, cap));
        if prev.1 >= target {
            return Some(prev.0);
        }
        for &x in &points[1..] {
            let g = self.reach(x, tax_cap, cap);
            if g >= target {
                let (x0, g0) = prev;
                let frac = (target - g0).ratio(g - g0);
                return Some(x0 + (x - x0).scale(frac));
            }
            prev = (x, g);
        }
        // Past the last breakpoint only the top bracket rate applies.
        let slope = schedule.top_rate();
        if slope.is_zero() || tax_cap.is_some() {
            return None;
        }
        let (x0, g0) = prev;
        Some(x0 + (target - g0).scale(slope.as_ratio().recip()))
    }

    /// In table mode tax is a step function; within each step the refund
    /// term is inverted directly.
    fn solve_table(&self, target: Amount, tax_cap: Option<Amount>, cap: Amount) -> Option<Money> {
        let tf = self.tax_free_amount();
        let refund_hit = |tax: Amount, lo: Money, hi: Option<Amount>| -> Option<Money> {
            let need = target - tax;
            let y = if !need.is_positive() {
                lo
            } else if need > cap {
                return None;
            } else {
                let r = self.params.refund_threshold.to_amount();
                (r + need.scale(self.params.refund_rate.as_ratio().recip()))
                    .ceil_cents()
                    .max(lo)
            };
            match hi {
                Some(h) if y.to_amount() >= h => None,
                _ => Some(y),
            }
        };

        // Zero-tax region up to and including the tax-free amount.
        let below_end = tf.floor_cents().max(Money::ZERO);
        if let Some(y) = refund_hit(Amount::zero(), Money::ZERO, None) {
            if y <= below_end {
                return Some(y);
            }
        }

        let schedule = &self.params.status(self.profile.filing_status()).brackets;
        if schedule.top_rate().is_zero() && cap.is_zero() {
            return None;
        }
        // Rows whose tax cannot reach `target - cap` are skipped wholesale.
        let floor_tax = target - cap;
        let mut row: i64 = 0;
        if floor_tax.is_positive() {
            let probe = TaxModel {
                mode: LiabilityMode::Exact,
                ..*self
            };
            if let Some(y) = probe.solve_exact(floor_tax, None, Amount::zero()) {
                let taxable = y - tf;
                row = (taxable.floor_cents().cents() / TABLE_ROW - 1).max(0);
            }
        }
        loop {
            let lo_exact = tf + Money::from_cents(row * TABLE_ROW).to_amount();
            let hi = lo_exact + Money::from_cents(TABLE_ROW).to_amount();
            // The first row is open at the tax-free amount itself.
            let mut lo = lo_exact.ceil_cents();
            if lo.to_amount() <= tf {
                lo = lo + Money::from_cents(1);
            }
            let tax = self.capped_tax(lo.to_amount(), tax_cap);
            if let Some(y) = refund_hit(tax, lo, Some(hi)) {
                return Some(y);
            }
            if tax_cap.is_some_and(|c| tax >= c) {
                // Capped tax is flat from here on; only the refund can help.
                return refund_hit(tax, lo, None);
            }
            row += 1;
            if row > 100_000_000 {
                return None;
            }
        }
    }

    /// All category-boundary incomes for this household.
    pub fn thresholds(&self) -> Result<ThresholdSet, TaxMathError> {
        let p = self.params;
        let t = ThresholdSet {
            year: p.year,
            profile: self.profile,
            t_refund_floor: p.refund_threshold,
            t_full_actc: self.invert_benefit(self.max_refund())?,
            t_full_ctc: self.invert_tax(self.max_credit())?,
            t_full_combined: self.invert_benefit(self.max_credit())?,
            t_phaseout_start: self.phaseout_start(),
            t_total_phaseout: self.total_phaseout().ceil_cents(),
        };
        t.check_order()?;
        Ok(t)
    }
}

/// Taxable income snapped to the middle of its $50 row.
fn table_row_midpoint(taxable: Amount) -> Amount {
    let row = taxable.floor_cents().cents().div_euclid(TABLE_ROW);
    Money::from_cents(row * TABLE_ROW + TABLE_ROW / 2).to_amount()
}

/// Category boundaries for one household and year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub year: i32,
    pub profile: HouseholdProfile,
    pub t_refund_floor: Money,
    pub t_full_actc: Money,
    pub t_full_ctc: Money,
    pub t_full_combined: Money,
    pub t_phaseout_start: Money,
    pub t_total_phaseout: Money,
}

/// Whether an income exactly at the boundary has crossed it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    /// Crossed once income reaches the value.
    AtOrAbove,
    /// Crossed only when income strictly exceeds the value.
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Boundary {
    pub value: Money,
    pub crossing: Crossing,
}

impl Boundary {
    pub fn crossed_by(&self, income: Amount) -> bool {
        match self.crossing {
            Crossing::AtOrAbove => income >= self.value.to_amount(),
            Crossing::Above => income > self.value.to_amount(),
        }
    }
}

impl ThresholdSet {
    /// The five boundaries between the six relief categories, ascending.
    pub fn boundaries(&self) -> [Boundary; 5] {
        let b = |value, crossing| Boundary { value, crossing };
        [
            b(self.t_refund_floor, Crossing::Above),
            b(self.t_full_actc, Crossing::AtOrAbove),
            b(self.t_full_ctc, Crossing::AtOrAbove),
            b(self.t_phaseout_start, Crossing::Above),
            b(self.t_total_phaseout, Crossing::AtOrAbove),
        ]
    }

    /// Number of boundaries an income has crossed (0 through 5).
    pub fn category_index(&self, income: Amount) -> usize {
        self.boundaries()
            .iter()
            .filter(|b| b.crossed_by(income))
            .count()
    }

    fn check_order(&self) -> Result<(), TaxMathError> {
        let seq = [
            ("refund floor", self.t_refund_floor),
            ("full ACTC", self.t_full_actc),
            ("full CTC", self.t_full_ctc),
            ("phaseout start", self.t_phaseout_start),
        ];
        for pair in seq.windows(2) {
            if pair[0].1 > pair[1].1 {
                return Err(self.violation(format!(
                    "{} {} above {} {}",
                    pair[0].0, pair[0].1, pair[1].0, pair[1].1
                )));
            }
        }
        if self.t_phaseout_start >= self.t_total_phaseout {
            return Err(self.violation(format!(
                "total phaseout {} not above phaseout start {}",
                self.t_total_phaseout, self.t_phaseout_start
            )));
        }
        Ok(())
    }

    fn violation(&self, detail: String) -> TaxMathError {
        TaxMathError::OrderingViolation {
            year: self.year,
            group: self.profile.group,
            detail,
        }
    }
}

pub fn tax_liability(
    income: Money,
    profile: HouseholdProfile,
    params: &ProgramParameters,
) -> Amount {
    TaxModel::new(params, profile, LiabilityMode::Exact).tax(income.to_amount())
}

/// Liability under $50 tax-table rows.
pub fn tax_table_liability(
    income: Money,
    profile: HouseholdProfile,
    params: &ProgramParameters,
) -> Amount {
    TaxModel::new(params, profile, LiabilityMode::Table).tax(income.to_amount())
}

pub fn benefit_at_income(
    income: Money,
    profile: HouseholdProfile,
    params: &ProgramParameters,
) -> BenefitSplit {
    TaxModel::new(params, profile, LiabilityMode::Exact).benefit(income.to_amount())
}

pub fn invert_benefit(
    target: Amount,
    profile: HouseholdProfile,
    params: &ProgramParameters,
) -> Result<Money, TaxMathError> {
    TaxModel::new(params, profile, LiabilityMode::Exact).invert_benefit(target)
}

pub fn thresholds(
    profile: HouseholdProfile,
    params: &ProgramParameters,
) -> Result<ThresholdSet, TaxMathError> {
    TaxModel::new(params, profile, LiabilityMode::Exact).thresholds()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamSet;

    fn fixtures() -> ParamSet {
        ParamSet::from_json_str(include_str!("../data/params.json")).unwrap()
    }

    fn dollars(d: i64) -> Money {
        Money::from_dollars(d)
    }

    fn single(children_hundredths: u32) -> HouseholdProfile {
        HouseholdProfile::new(
            ParentalGroup::SingleFather,
            Headcount::from_hundredths(children_hundredths),
        )
    }

    fn married(children_hundredths: u32) -> HouseholdProfile {
        HouseholdProfile::new(
            ParentalGroup::Married,
            Headcount::from_hundredths(children_hundredths),
        )
    }

    fn near(actual: Money, expected: i64, tol: i64) -> bool {
        (actual.cents() - expected * 100).abs() <= tol * 100
    }

    #[test]
    fn liability_examples() {
        let ps = fixtures();
        let p03 = ps.get(2003).unwrap();
        assert_eq!(
            tax_liability(dollars(23_100), single(100), p03),
            dollars(1_000)
        );
        assert_eq!(
            tax_liability(dollars(13_100), single(100), p03),
            Money::ZERO
        );
        let t = tax_liability(dollars(43_850), married(100), ps.get(2018).unwrap());
        assert!((t.dollars_f64() - 2_000.0).abs() <= 10.0, "{t}");
    }

    #[test]
    fn benefit_examples() {
        let ps = fixtures();
        let b = benefit_at_income(dollars(16_795), single(100), ps.get(2003).unwrap());
        assert!(
            (b.credit.dollars_f64() - 370.0).abs() <= 10.0,
            "{}",
            b.credit
        );
        assert!(
            (b.refund.dollars_f64() - 630.0).abs() <= 10.0,
            "{}",
            b.refund
        );
        let zero = benefit_at_income(Money::ZERO, married(100), ps.get(2003).unwrap());
        assert!(zero.credit.is_zero() && zero.refund.is_zero());
        let p09 = ps.get(2009).unwrap();
        let b = benefit_at_income(dollars(9_667), single(100), p09);
        assert!(b.credit.is_zero());
        assert!((b.refund.dollars_f64() - 1_000.0).abs() <= 1.0);
        let b = benefit_at_income(dollars(85_000), single(100), p09);
        assert_eq!(b.total, dollars(500));
    }

    #[test]
    fn refund_is_zero_at_the_floor() {
        let ps = fixtures();
        let b = benefit_at_income(dollars(3_000), single(100), ps.get(2009).unwrap());
        assert!(b.refund.is_zero());
    }

    #[test]
    fn inversion_examples() {
        let ps = fixtures();
        let y = invert_benefit(dollars(1_000).into(), single(100), ps.get(2009).unwrap()).unwrap();
        assert_eq!(y, Money::from_cents(966_667));
        assert_eq!(y.round_dollars(), 9_667);
        let y = invert_benefit(dollars(2_000).into(), single(100), ps.get(2018).unwrap()).unwrap();
        assert_eq!(y, dollars(24_000));
        let y = invert_benefit(dollars(1_000).into(), married(100), ps.get(2004).unwrap()).unwrap();
        assert!(near(y, 17_417, 10), "{y}");
        let p18 = ps.get(2018).unwrap();
        let sf = single(169);
        let c = TaxModel::new(p18, sf, LiabilityMode::Exact).max_credit();
        let y = invert_benefit(c, sf, p18).unwrap();
        assert!(near(y, 28_140, 50), "{y}");
    }

    #[test]
    fn inversion_errors() {
        let ps = fixtures();
        let p = ps.get(2009).unwrap();
        assert!(matches!(
            invert_benefit(Amount::zero(), single(100), p),
            Err(TaxMathError::InvalidTarget { .. })
        ));
        assert!(matches!(
            invert_benefit(dollars(1_001).into(), single(100), p),
            Err(TaxMathError::Unreachable { .. })
        ));
    }

    #[test]
    fn threshold_examples() {
        let ps = fixtures();
        let t = thresholds(single(100), ps.get(2009).unwrap()).unwrap();
        assert!(near(t.t_full_actc, 9_667, 1));
        assert_eq!(t.t_full_ctc, dollars(25_650));
        assert_eq!(t.t_phaseout_start, dollars(75_000));
        assert_eq!(t.t_total_phaseout, dollars(95_000));

        let t = thresholds(married(189), ps.get(2003).unwrap()).unwrap();
        assert!(near(t.t_full_ctc, 38_631, 50), "{}", t.t_full_ctc);
        assert_eq!(t.t_total_phaseout, dollars(147_800));

        let t = thresholds(single(100), ps.get(2018).unwrap()).unwrap();
        assert!(near(t.t_full_actc, 11_833, 5));
        assert!(near(t.t_full_ctc, 36_950, 50));
    }

    #[test]
    fn table_mode_snaps_to_rows() {
        let ps = fixtures();
        let p = ps.get(2018).unwrap();
        let exact = TaxModel::new(p, single(100), LiabilityMode::Exact);
        let table = TaxModel::new(p, single(100), LiabilityMode::Table);
        let y = exact.invert_tax(dollars(2_000).into()).unwrap();
        assert_eq!(y, Money::from_cents(3_693_334));
        assert_eq!(
            table.invert_tax(dollars(2_000).into()).unwrap(),
            dollars(36_950)
        );
        // Row boundary: taxable 50.00 belongs to the row [50, 100).
        let tf = table.tax_free_amount();
        assert_eq!(table.tax(tf + dollars(50).into()), Money::from_cents(7_50));
        assert_eq!(
            table.tax(tf + Money::from_cents(4_999).into()),
            Money::from_cents(2_50)
        );
        assert!(table.tax(tf).is_zero());
        // Within the 10% and 12% brackets.
        for d in (0..69_800).step_by(37) {
            let y = dollars(d).to_amount();
            let gap = (exact.tax(y) - table.tax(y)).dollars_f64().abs();
            assert!(gap < 0.12 * 50.0, "{d}: {gap}");
        }
    }

    #[test]
    fn table_mode_inversion_is_minimal() {
        let ps = fixtures();
        for year in [2003, 2009, 2018] {
            let p = ps.get(year).unwrap();
            for profile in [single(100), married(189), single(175)] {
                let m = TaxModel::new(p, profile, LiabilityMode::Table);
                for target in [m.max_refund(), m.max_credit()] {
                    let y = m.invert_benefit(target).unwrap();
                    assert!(m.benefit(y.to_amount()).total >= target);
                    let before = y - Money::from_cents(1);
                    assert!(m.benefit(before.to_amount()).total < target, "{year} {y}");
                }
            }
        }
    }

    #[test]
    fn refund_cap_above_credit() {
        let ps = fixtures();
        let mut p = ps.get(2017).unwrap().clone();
        p.actc_per_child = dollars(1_400);
        let m = TaxModel::new(&p, single(100), LiabilityMode::Exact);
        let t = m.thresholds().unwrap();
        // 3,000 + 1,400 / 0.15
        assert_eq!(t.t_full_actc, Money::from_cents(1_233_334));
        assert_eq!(
            t.t_full_ctc,
            thresholds(single(100), ps.get(2017).unwrap())
                .unwrap()
                .t_full_ctc
        );
        assert_eq!(t.t_total_phaseout, dollars(75_000 + 28_000));
        let b = m.benefit(dollars(60_000).into());
        assert_eq!(b.credit, dollars(1_000));
        assert_eq!(b.total, dollars(1_400));
        let table = TaxModel::new(&p, single(100), LiabilityMode::Table);
        assert_eq!(
            table.invert_benefit(dollars(1_400).into()).unwrap(),
            t.t_full_actc
        );
    }

    #[test]
    fn parity_identity() {
        let ps = fixtures();
        for p in ps.iter().filter(|p| p.is_parity()) {
            for g in ParentalGroup::ALL {
                let t = thresholds(HouseholdProfile::one_child(g), p).unwrap();
                assert_eq!(t.t_full_combined, t.t_full_actc);
            }
        }
    }

    #[test]
    fn shipped_fixtures_are_ordered() {
        let ps = fixtures();
        for p in ps.iter() {
            for g in ParentalGroup::ALL {
                for h in [100, 166, 189, 176] {
                    let profile = HouseholdProfile::new(g, Headcount::from_hundredths(h));
                    for mode in [LiabilityMode::Exact, LiabilityMode::Table] {
                        TaxModel::new(p, profile, mode).thresholds().unwrap();
                    }
                }
            }
        }
    }
}
