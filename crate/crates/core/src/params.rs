//! Program parameters: one snapshot of every tax and credit rule per year.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::money::{Amount, Money, Rate};

#[derive(Debug, thiserror::Error)]
pub enum ParamsError {
    #[error("cannot read parameter file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed parameter file: {0}")]
    Parse(String),
    #[error("invalid parameters for {year}: {field}: {message}")]
    Validation {
        year: i32,
        field: String,
        message: String,
    },
    #[error("no parameters for year {0}")]
    MissingYear(i32),
    #[error("bad override `{0}`")]
    BadOverride(String),
}

impl ParamsError {
    fn invalid(year: i32, field: impl Into<String>, message: impl Into<String>) -> Self {
        ParamsError::Validation {
            year,
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilingStatus {
    MarriedJoint,
    HeadOfHousehold,
}

impl FilingStatus {
    pub const ALL: [FilingStatus; 2] = [FilingStatus::MarriedJoint, FilingStatus::HeadOfHousehold];

    pub fn as_str(self) -> &'static str {
        match self {
            FilingStatus::MarriedJoint => "married_joint",
            FilingStatus::HeadOfHousehold => "head_of_household",
        }
    }
}

impl fmt::Display for FilingStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FilingStatus {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "married_joint" | "mfj" => Ok(FilingStatus::MarriedJoint),
            "head_of_household" | "hoh" => Ok(FilingStatus::HeadOfHousehold),
            other => Err(format!("unknown filing status `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParentalGroup {
    Married,
    SingleFather,
    SingleMother,
}

impl ParentalGroup {
    pub const ALL: [ParentalGroup; 3] = [
        ParentalGroup::Married,
        ParentalGroup::SingleFather,
        ParentalGroup::SingleMother,
    ];

    pub fn filing_status(self) -> FilingStatus {
        match self {
            ParentalGroup::Married => FilingStatus::MarriedJoint,
            ParentalGroup::SingleFather | ParentalGroup::SingleMother => {
                FilingStatus::HeadOfHousehold
            }
        }
    }

    /// Adults counted toward personal exemptions.
    pub fn adults(self) -> u32 {
        match self {
            ParentalGroup::Married => 2,
            ParentalGroup::SingleFather | ParentalGroup::SingleMother => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ParentalGroup::Married => "married",
            ParentalGroup::SingleFather => "single_father",
            ParentalGroup::SingleMother => "single_mother",
        }
    }

    /// Regressor name used for the group dummy.
    pub fn dummy_name(self) -> &'static str {
        match self {
            ParentalGroup::Married => "Married",
            ParentalGroup::SingleFather => "SingleMen",
            ParentalGroup::SingleMother => "SingleWomen",
        }
    }
}

impl fmt::Display for ParentalGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParentalGroup {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "married" => Ok(ParentalGroup::Married),
            "single_father" => Ok(ParentalGroup::SingleFather),
            "single_mother" => Ok(ParentalGroup::SingleMother),
            other => Err(format!("unknown parental group `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bracket {
    /// Top of the bracket in taxable income; `None` for the last, open bracket.
    pub upper: Option<Money>,
    pub rate: Rate,
}

/// Marginal rate schedule applied to taxable income.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BracketSchedule {
    brackets: Vec<Bracket>,
}

impl BracketSchedule {
    pub fn new(brackets: Vec<Bracket>) -> Result<Self, String> {
        if brackets.is_empty() {
            return Err("bracket schedule is empty".into());
        }
        let zero = Rate::percent(0);
        let one = Rate::percent(100);
        let last = brackets.len() - 1;
        let mut prev_upper = Money::ZERO;
        let mut prev_rate = zero;
        for (i, b) in brackets.iter().enumerate() {
            if b.rate < zero || b.rate > one {
                return Err(format!("bracket {i}: rate {} outside [0, 1]", b.rate));
            }
            if b.rate < prev_rate {
                return Err(format!(
                    "bracket {i}: rate {} below the previous bracket's",
                    b.rate
                ));
            }
            prev_rate = b.rate;
            match (i == last, b.upper) {
                (true, None) => {}
                (true, Some(_)) => return Err("last bracket must be open-ended".into()),
                (false, None) => {
                    return Err(format!(
                        "bracket {i}: only the last bracket may be open-ended"
                    ))
                }
                (false, Some(u)) => {
                    if u <= prev_upper {
                        return Err(format!(
                            "bracket {i}: upper bound {u} not above {prev_upper}"
                        ));
                    }
                    prev_upper = u;
                }
            }
        }
        Ok(BracketSchedule { brackets })
    }

    pub fn brackets(&self) -> &[Bracket] {
        &self.brackets
    }

    /// Finite bracket edges, ascending.
    pub fn edges(&self) -> impl Iterator<Item = Money> + '_ {
        self.brackets.iter().filter_map(|b| b.upper)
    }

    pub fn top_rate(&self) -> Rate {
        self.brackets[self.brackets.len() - 1].rate
    }

    /// Tax on `taxable` income; zero for nonpositive input.
    pub fn tax(&self, taxable: Amount) -> Amount {
        let mut owed = Amount::zero();
        let mut lower = Amount::zero();
        for b in &self.brackets {
            if taxable <= lower {
                break;
            }
            let top = match b.upper {
                Some(u) => taxable.min(u.to_amount()),
                None => taxable,
            };
            owed = owed + (top - lower) * b.rate;
            match b.upper {
                Some(u) => lower = u.to_amount(),
                None => break,
            }
        }
        owed
    }
}

/// Rules that differ by filing status.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StatusParams {
    pub standard_deduction: Money,
    pub exemption_per_person: Money,
    pub brackets: BracketSchedule,
    pub phaseout_start: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProgramParameters {
    pub year: i32,
    pub married_joint: StatusParams,
    pub head_of_household: StatusParams,
    pub ctc_per_child: Money,
    pub actc_per_child: Money,
    pub refund_threshold: Money,
    pub refund_rate: Rate,
    pub phaseout_rate: Rate,
}

impl ProgramParameters {
    pub fn status(&self, status: FilingStatus) -> &StatusParams {
        match status {
            FilingStatus::MarriedJoint => &self.married_joint,
            FilingStatus::HeadOfHousehold => &self.head_of_household,
        }
    }

    fn status_mut(&mut self, status: FilingStatus) -> &mut StatusParams {
        match status {
            FilingStatus::MarriedJoint => &mut self.married_joint,
            FilingStatus::HeadOfHousehold => &mut self.head_of_household,
        }
    }

    pub fn is_parity(&self) -> bool {
        self.ctc_per_child == self.actc_per_child
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        self.check(false)
    }

    fn check(&self, allow_actc_above_ctc: bool) -> Result<(), ParamsError> {
        let y = self.year;
        if self.actc_per_child <= Money::ZERO {
            return Err(ParamsError::invalid(
                y,
                "actc_per_child",
                "must be positive",
            ));
        }
        if self.actc_per_child > self.ctc_per_child && !allow_actc_above_ctc {
            return Err(ParamsError::invalid(
                y,
                "actc_per_child",
                format!(
                    "{} exceeds ctc_per_child {}",
                    self.actc_per_child, self.ctc_per_child
                ),
            ));
        }
        if self.refund_threshold.is_negative() {
            return Err(ParamsError::invalid(
                y,
                "refund_threshold",
                "must be nonnegative",
            ));
        }
        if self.refund_rate <= Rate::percent(0) || self.refund_rate > Rate::percent(100) {
            return Err(ParamsError::invalid(y, "refund_rate", "must lie in (0, 1]"));
        }
        if self.phaseout_rate <= Rate::percent(0) || self.phaseout_rate >= Rate::percent(100) {
            return Err(ParamsError::invalid(
                y,
                "phaseout_rate",
                "must lie in (0, 1)",
            ));
        }
        for status in FilingStatus::ALL {
            let s = self.status(status);
            for (name, v) in [
                ("standard_deduction", s.standard_deduction),
                ("exemption_per_person", s.exemption_per_person),
                ("phaseout_start", s.phaseout_start),
            ] {
                if v.is_negative() {
                    return Err(ParamsError::invalid(
                        y,
                        format!("{name}.{status}"),
                        "must be nonnegative",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Every field that differs from `other`, as overrides that turn `self`
    /// into `other` (year excluded).
    pub fn diff(&self, other: &ProgramParameters) -> OverrideSet {
        let mut set = OverrideSet::new();
        for field in ParamField::all() {
            let target = field.read(other);
            if field.read(self) != target {
                set.insert(target);
            }
        }
        set
    }
}

/// Loaded, validated parameter sets keyed by year.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParamSet {
    years: BTreeMap<i32, ProgramParameters>,
}

impl ParamSet {
    pub fn from_params(
        params: impl IntoIterator<Item = ProgramParameters>,
    ) -> Result<Self, ParamsError> {
        let mut years = BTreeMap::new();
        for p in params {
            p.validate()?;
            if years.insert(p.year, p.clone()).is_some() {
                return Err(ParamsError::invalid(p.year, "year", "duplicated"));
            }
        }
        Ok(ParamSet { years })
    }

    pub fn get(&self, year: i32) -> Result<&ProgramParameters, ParamsError> {
        self.years.get(&year).ok_or(ParamsError::MissingYear(year))
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        self.years.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ProgramParameters> {
        self.years.values()
    }

    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    pub fn from_json_str(text: &str) -> Result<Self, ParamsError> {
        let records: Vec<ParamRecord> =
            serde_json::from_str(text).map_err(|e| ParamsError::Parse(e.to_string()))?;
        assemble(records)
    }

    pub fn to_json_string(&self) -> String {
        let mut records = Vec::new();
        for p in self.years.values() {
            for status in FilingStatus::ALL {
                records.push(ParamRecord::from_params(p, status));
            }
        }
        serde_json::to_string_pretty(&records).expect("parameter records always serialize")
    }
}

/// Reads and validates a parameter file.
pub fn load_params(path: impl AsRef<Path>) -> Result<ParamSet, ParamsError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ParamsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ParamSet::from_json_str(&text)
}

// On-disk layout: one record per (year, filing status), money in whole dollars.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamRecord {
    year: i32,
    filing_status: FilingStatus,
    standard_deduction: i64,
    exemption_per_person: i64,
    brackets: Vec<BracketRecord>,
    ctc_per_child: i64,
    actc_per_child: i64,
    refund_threshold: i64,
    refund_rate: serde_json::Number,
    phaseout_start: i64,
    phaseout_rate: serde_json::Number,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BracketRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    upper: Option<i64>,
    rate: serde_json::Number,
}

fn number_to_rate(year: i32, field: &str, n: &serde_json::Number) -> Result<Rate, ParamsError> {
    n.to_string()
        .parse::<Rate>()
        .map_err(|e| ParamsError::invalid(year, field, e.to_string()))
}

fn rate_to_number(r: Rate) -> serde_json::Number {
    r.to_string()
        .parse()
        .expect("decimal rate is a valid JSON number")
}

impl ParamRecord {
    fn from_params(p: &ProgramParameters, status: FilingStatus) -> Self {
        let s = p.status(status);
        ParamRecord {
            year: p.year,
            filing_status: status,
            standard_deduction: s.standard_deduction.cents() / 100,
            exemption_per_person: s.exemption_per_person.cents() / 100,
            brackets: s
                .brackets
                .brackets()
                .iter()
                .map(|b| BracketRecord {
                    upper: b.upper.map(|u| u.cents() / 100),
                    rate: rate_to_number(b.rate),
                })
                .collect(),
            ctc_per_child: p.ctc_per_child.cents() / 100,
            actc_per_child: p.actc_per_child.cents() / 100,
            refund_threshold: p.refund_threshold.cents() / 100,
            refund_rate: rate_to_number(p.refund_rate),
            phaseout_start: s.phaseout_start.cents() / 100,
            phaseout_rate: rate_to_number(p.phaseout_rate),
        }
    }

    fn status_params(&self) -> Result<StatusParams, ParamsError> {
        let y = self.year;
        let mut brackets = Vec::with_capacity(self.brackets.len());
        for b in &self.brackets {
            brackets.push(Bracket {
                upper: b.upper.map(Money::from_dollars),
                rate: number_to_rate(y, "brackets.rate", &b.rate)?,
            });
        }
        let brackets = BracketSchedule::new(brackets)
            .map_err(|m| ParamsError::invalid(y, format!("brackets.{}", self.filing_status), m))?;
        Ok(StatusParams {
            standard_deduction: Money::from_dollars(self.standard_deduction),
            exemption_per_person: Money::from_dollars(self.exemption_per_person),
            brackets,
            phaseout_start: Money::from_dollars(self.phaseout_start),
        })
    }
}

fn assemble(records: Vec<ParamRecord>) -> Result<ParamSet, ParamsError> {
    let mut by_year: BTreeMap<i32, BTreeMap<FilingStatus, ParamRecord>> = BTreeMap::new();
    for r in records {
        let slot = by_year.entry(r.year).or_default();
        let (year, status) = (r.year, r.filing_status);
        if slot.insert(status, r).is_some() {
            return Err(ParamsError::invalid(
                year,
                "filing_status",
                format!("duplicate record for {status}"),
            ));
        }
    }
    let mut out = Vec::new();
    for (year, mut statuses) in by_year {
        let mut take = |status: FilingStatus| {
            statuses.remove(&status).ok_or_else(|| {
                ParamsError::invalid(
                    year,
                    "filing_status",
                    format!("missing record for {status}"),
                )
            })
        };
        let mfj = take(FilingStatus::MarriedJoint)?;
        let hoh = take(FilingStatus::HeadOfHousehold)?;
        let shared = |name: &str, a: String, b: String| {
            if a == b {
                Ok(())
            } else {
                Err(ParamsError::invalid(
                    year,
                    name,
                    format!("differs between filing statuses ({a} vs {b})"),
                ))
            }
        };
        shared(
            "ctc_per_child",
            mfj.ctc_per_child.to_string(),
            hoh.ctc_per_child.to_string(),
        )?;
        shared(
            "actc_per_child",
            mfj.actc_per_child.to_string(),
            hoh.actc_per_child.to_string(),
        )?;
        shared(
            "refund_threshold",
            mfj.refund_threshold.to_string(),
            hoh.refund_threshold.to_string(),
        )?;
        let refund_rate = number_to_rate(year, "refund_rate", &mfj.refund_rate)?;
        let phaseout_rate = number_to_rate(year, "phaseout_rate", &mfj.phaseout_rate)?;
        shared(
            "refund_rate",
            refund_rate.to_string(),
            number_to_rate(year, "refund_rate", &hoh.refund_rate)?.to_string(),
        )?;
        shared(
            "phaseout_rate",
            phaseout_rate.to_string(),
            number_to_rate(year, "phaseout_rate", &hoh.phaseout_rate)?.to_string(),
        )?;
        out.push(ProgramParameters {
            year,
            married_joint: mfj.status_params()?,
            head_of_household: hoh.status_params()?,
            ctc_per_child: Money::from_dollars(mfj.ctc_per_child),
            actc_per_child: Money::from_dollars(mfj.actc_per_child),
            refund_threshold: Money::from_dollars(mfj.refund_threshold),
            refund_rate,
            phaseout_rate,
        });
    }
    ParamSet::from_params(out)
}

/// A replaceable field of [`ProgramParameters`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamField {
    StandardDeduction(FilingStatus),
    ExemptionPerPerson(FilingStatus),
    Brackets(FilingStatus),
    PhaseoutStart(FilingStatus),
    CtcPerChild,
    ActcPerChild,
    RefundThreshold,
    RefundRate,
    PhaseoutRate,
}

impl ParamField {
    pub fn all() -> Vec<ParamField> {
        let mut v = Vec::new();
        for s in FilingStatus::ALL {
            v.extend([
                ParamField::StandardDeduction(s),
                ParamField::ExemptionPerPerson(s),
                ParamField::Brackets(s),
                ParamField::PhaseoutStart(s),
            ]);
        }
        v.extend([
            ParamField::CtcPerChild,
            ParamField::ActcPerChild,
            ParamField::RefundThreshold,
            ParamField::RefundRate,
            ParamField::PhaseoutRate,
        ]);
        v
    }

    /// Both filing-status variants of a per-status field constructor.
    pub fn both(make: fn(FilingStatus) -> ParamField) -> [ParamField; 2] {
        [
            make(FilingStatus::MarriedJoint),
            make(FilingStatus::HeadOfHousehold),
        ]
    }

    /// The current value of this field in `p`, as an override.
    pub fn read(self, p: &ProgramParameters) -> Override {
        match self {
            ParamField::StandardDeduction(s) => {
                Override::StandardDeduction(s, p.status(s).standard_deduction)
            }
            ParamField::ExemptionPerPerson(s) => {
                Override::ExemptionPerPerson(s, p.status(s).exemption_per_person)
            }
            ParamField::Brackets(s) => Override::Brackets(s, p.status(s).brackets.clone()),
            ParamField::PhaseoutStart(s) => Override::PhaseoutStart(s, p.status(s).phaseout_start),
            ParamField::CtcPerChild => Override::CtcPerChild(p.ctc_per_child),
            ParamField::ActcPerChild => Override::ActcPerChild(p.actc_per_child),
            ParamField::RefundThreshold => Override::RefundThreshold(p.refund_threshold),
            ParamField::RefundRate => Override::RefundRate(p.refund_rate),
            ParamField::PhaseoutRate => Override::PhaseoutRate(p.phaseout_rate),
        }
    }
}

/// Replacement value for one parameter field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Override {
    StandardDeduction(FilingStatus, Money),
    ExemptionPerPerson(FilingStatus, Money),
    Brackets(FilingStatus, BracketSchedule),
    PhaseoutStart(FilingStatus, Money),
    CtcPerChild(Money),
    ActcPerChild(Money),
    RefundThreshold(Money),
    RefundRate(Rate),
    PhaseoutRate(Rate),
}

impl Override {
    pub fn field(&self) -> ParamField {
        match self {
            Override::StandardDeduction(s, _) => ParamField::StandardDeduction(*s),
            Override::ExemptionPerPerson(s, _) => ParamField::ExemptionPerPerson(*s),
            Override::Brackets(s, _) => ParamField::Brackets(*s),
            Override::PhaseoutStart(s, _) => ParamField::PhaseoutStart(*s),
            Override::CtcPerChild(_) => ParamField::CtcPerChild,
            Override::ActcPerChild(_) => ParamField::ActcPerChild,
            Override::RefundThreshold(_) => ParamField::RefundThreshold,
            Override::RefundRate(_) => ParamField::RefundRate,
            Override::PhaseoutRate(_) => ParamField::PhaseoutRate,
        }
    }

    fn write(&self, p: &mut ProgramParameters) {
        match self {
            Override::StandardDeduction(s, v) => p.status_mut(*s).standard_deduction = *v,
            Override::ExemptionPerPerson(s, v) => p.status_mut(*s).exemption_per_person = *v,
            Override::Brackets(s, v) => p.status_mut(*s).brackets = v.clone(),
            Override::PhaseoutStart(s, v) => p.status_mut(*s).phaseout_start = *v,
            Override::CtcPerChild(v) => p.ctc_per_child = *v,
            Override::ActcPerChild(v) => p.actc_per_child = *v,
            Override::RefundThreshold(v) => p.refund_threshold = *v,
            Override::RefundRate(v) => p.refund_rate = *v,
            Override::PhaseoutRate(v) => p.phaseout_rate = *v,
        }
    }
}

/// Parses `name=value` or `name.filing_status=value`; a per-status name
/// without a status applies to both statuses.
///
/// Money values are dollars (`2000`, `2500.50`); brackets are written
/// `upper:rate,...,:rate` with the last bracket open.
impl FromStr for OverrideSet {
    type Err = ParamsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut set = OverrideSet::new();
        for item in s.split(';').map(str::trim).filter(|i| !i.is_empty()) {
            set.extend(parse_override(item)?);
        }
        Ok(set)
    }
}

fn parse_override(item: &str) -> Result<Vec<Override>, ParamsError> {
    let bad = || ParamsError::BadOverride(item.to_string());
    let (key, value) = item.split_once('=').ok_or_else(bad)?;
    let (name, status) = match key.trim().split_once('.') {
        Some((n, s)) => (n, Some(s.parse::<FilingStatus>().map_err(|_| bad())?)),
        None => (key.trim(), None),
    };
    let value = value.trim();
    let money = || value.parse::<Money>().map_err(|_| bad());
    let rate = || value.parse::<Rate>().map_err(|_| bad());
    let statuses: Vec<FilingStatus> = match status {
        Some(s) => vec![s],
        None => FilingStatus::ALL.to_vec(),
    };
    let per_status = |make: &dyn Fn(FilingStatus) -> Result<Override, ParamsError>| {
        statuses
            .iter()
            .map(|s| make(*s))
            .collect::<Result<Vec<_>, _>>()
    };
    let shared = |o: Override| {
        if status.is_some() {
            Err(bad())
        } else {
            Ok(vec![o])
        }
    };
    match name {
        "standard_deduction" => per_status(&|s| Ok(Override::StandardDeduction(s, money()?))),
        "exemption_per_person" => per_status(&|s| Ok(Override::ExemptionPerPerson(s, money()?))),
        "phaseout_start" => per_status(&|s| Ok(Override::PhaseoutStart(s, money()?))),
        "brackets" => {
            let schedule = parse_brackets(value).ok_or_else(bad)?;
            per_status(&|s| Ok(Override::Brackets(s, schedule.clone())))
        }
        "ctc_per_child" => shared(Override::CtcPerChild(money()?)),
        "actc_per_child" => shared(Override::ActcPerChild(money()?)),
        "refund_threshold" => shared(Override::RefundThreshold(money()?)),
        "refund_rate" => shared(Override::RefundRate(rate()?)),
        "phaseout_rate" => shared(Override::PhaseoutRate(rate()?)),
        _ => Err(bad()),
    }
}

fn parse_brackets(value: &str) -> Option<BracketSchedule> {
    let mut brackets = Vec::new();
    for part in value.split(',') {
        let (upper, rate) = part.trim().split_once(':')?;
        let upper = if upper.trim().is_empty() {
            None
        } else {
            Some(upper.trim().parse::<Money>().ok()?)
        };
        brackets.push(Bracket {
            upper,
            rate: rate.trim().parse().ok()?,
        });
    }
    BracketSchedule::new(brackets).ok()
}

/// A set of field replacements, at most one per field.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OverrideSet {
    values: BTreeMap<ParamField, Override>,
}

impl OverrideSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Later inserts replace earlier ones for the same field.
    pub fn insert(&mut self, o: Override) -> &mut Self {
        self.values.insert(o.field(), o);
        self
    }

    pub fn with(mut self, o: Override) -> Self {
        self.insert(o);
        self
    }

    /// Copies the listed fields' values out of `source`.
    pub fn adopt(mut self, fields: &[ParamField], source: &ProgramParameters) -> Self {
        for f in fields {
            self.insert(f.read(source));
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Override> {
        self.values.values()
    }

    pub fn fields(&self) -> impl Iterator<Item = ParamField> + '_ {
        self.values.keys().copied()
    }

    /// Union with `other`; `other` wins on shared fields.
    pub fn merged(&self, other: &OverrideSet) -> OverrideSet {
        let mut out = self.clone();
        out.extend(other.values.values().cloned());
        out
    }
}

impl Extend<Override> for OverrideSet {
    fn extend<T: IntoIterator<Item = Override>>(&mut self, iter: T) {
        for o in iter {
            self.insert(o);
        }
    }
}

impl FromIterator<Override> for OverrideSet {
    fn from_iter<T: IntoIterator<Item = Override>>(iter: T) -> Self {
        let mut s = OverrideSet::new();
        s.extend(iter);
        s
    }
}

/// Returns a copy of `base` with the overrides applied and re-validated.
pub fn apply_overrides(
    base: &ProgramParameters,
    overrides: &OverrideSet,
) -> Result<ProgramParameters, ParamsError> {
    let p = overwrite(base, overrides);
    p.validate()?;
    Ok(p)
}

/// Like [`apply_overrides`], but tolerates a refund cap above the credit
/// maximum. Piecemeal walks pass through such states (raising the refund cap
/// before the credit) and the benefit model handles them.
pub fn apply_counterfactual_overrides(
    base: &ProgramParameters,
    overrides: &OverrideSet,
) -> Result<ProgramParameters, ParamsError> {
    let p = overwrite(base, overrides);
    p.check(true)?;
    Ok(p)
}

fn overwrite(base: &ProgramParameters, overrides: &OverrideSet) -> ProgramParameters {
    let mut p = base.clone();
    for o in overrides.iter() {
        o.write(&mut p);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedule(edges: &[(Option<i64>, i64)]) -> BracketSchedule {
        BracketSchedule::new(
            edges
                .iter()
                .map(|(u, r)| Bracket {
                    upper: u.map(Money::from_dollars),
                    rate: Rate::percent(*r),
                })
                .collect(),
        )
        .unwrap()
    }

    fn sample(year: i32) -> ProgramParameters {
        let status = |std: i64, ex: i64, po: i64| StatusParams {
            standard_deduction: Money::from_dollars(std),
            exemption_per_person: Money::from_dollars(ex),
            brackets: schedule(&[(Some(10_000), 10), (None, 15)]),
            phaseout_start: Money::from_dollars(po),
        };
        ProgramParameters {
            year,
            married_joint: status(9_500, 3_050, 110_000),
            head_of_household: status(7_000, 3_050, 75_000),
            ctc_per_child: Money::from_dollars(1_000),
            actc_per_child: Money::from_dollars(1_000),
            refund_threshold: Money::from_dollars(10_500),
            refund_rate: Rate::percent(10),
            phaseout_rate: Rate::percent(5),
        }
    }

    #[test]
    fn bracket_tax() {
        let s = schedule(&[(Some(10_000), 10), (Some(20_000), 15), (None, 25)]);
        assert_eq!(
            s.tax(Money::from_dollars(5_000).into()),
            Money::from_dollars(500)
        );
        assert_eq!(
            s.tax(Money::from_dollars(15_000).into()),
            Money::from_dollars(1_750)
        );
        assert_eq!(
            s.tax(Money::from_dollars(30_000).into()),
            Money::from_dollars(5_000)
        );
        assert_eq!(s.tax(Money::from_dollars(-5).into()), Money::ZERO);
    }

    #[test]
    fn bracket_validation() {
        let b = |u: Option<i64>, r: i64| Bracket {
            upper: u.map(Money::from_dollars),
            rate: Rate::percent(r),
        };
        assert!(BracketSchedule::new(vec![]).is_err());
        assert!(BracketSchedule::new(vec![b(Some(10), 10)]).is_err());
        assert!(BracketSchedule::new(vec![b(None, 10), b(None, 15)]).is_err());
        assert!(BracketSchedule::new(vec![b(Some(10), 10), b(Some(5), 15), b(None, 20)]).is_err());
        assert!(BracketSchedule::new(vec![b(Some(10), 20), b(None, 10)]).is_err());
        assert!(BracketSchedule::new(vec![b(Some(10), 10), b(None, 120)]).is_err());
    }

    #[test]
    fn empty_override_is_identity() {
        let p = sample(2003);
        assert_eq!(apply_overrides(&p, &OverrideSet::new()).unwrap(), p);
    }

    #[test]
    fn override_rejects_actc_above_ctc() {
        let p = sample(2003);
        let o = OverrideSet::new().with(Override::ActcPerChild(Money::from_dollars(1_400)));
        match apply_overrides(&p, &o) {
            Err(ParamsError::Validation { field, year, .. }) => {
                assert_eq!(field, "actc_per_child");
                assert_eq!(year, 2003);
            }
            other => panic!("expected validation error, got {other:?}"),
        }
        assert_eq!(p.actc_per_child, Money::from_dollars(1_000));
        let relaxed = apply_counterfactual_overrides(&p, &o).unwrap();
        assert_eq!(relaxed.actc_per_child, Money::from_dollars(1_400));
    }

    #[test]
    fn parse_override_strings() {
        let set: OverrideSet =
            "ctc_per_child=2000; standard_deduction.married_joint=24000; refund_rate=0.15"
                .parse()
                .unwrap();
        assert_eq!(set.len(), 3);
        let both: OverrideSet = "phaseout_start=200000".parse().unwrap();
        assert_eq!(both.len(), 2);
        let br: OverrideSet = "brackets.head_of_household=13600:0.10,51800:0.12,:0.22"
            .parse()
            .unwrap();
        assert_eq!(br.len(), 1);
        assert!("ctc_per_child.married_joint=5"
            .parse::<OverrideSet>()
            .is_err());
        assert!("bogus=1".parse::<OverrideSet>().is_err());
        assert!("ctc_per_child".parse::<OverrideSet>().is_err());
    }

    #[test]
    fn diff_then_apply_reaches_target() {
        let a = sample(2017);
        let mut b = sample(2017);
        b.ctc_per_child = Money::from_dollars(2_000);
        b.head_of_household.standard_deduction = Money::from_dollars(18_000);
        let d = a.diff(&b);
        assert_eq!(d.len(), 2);
        assert_eq!(apply_overrides(&a, &d).unwrap(), b);
    }

    #[test]
    fn json_rejects_inconsistent_shared_fields() {
        let mut set = ParamSet::from_params([sample(2005)]).unwrap();
        let json =
            set.to_json_string()
                .replacen("\"ctc_per_child\": 1000", "\"ctc_per_child\": 900", 1);
        match ParamSet::from_json_str(&json) {
            Err(ParamsError::Validation { field, .. }) => assert_eq!(field, "ctc_per_child"),
            other => panic!("unexpected {other:?}"),
        }
        set = ParamSet::from_json_str(&set.to_json_string()).unwrap();
        assert!(matches!(set.get(1999), Err(ParamsError::MissingYear(1999))));
    }

    #[test]
    fn json_rejects_garbage() {
        assert!(matches!(
            ParamSet::from_json_str("{"),
            Err(ParamsError::Parse(_))
        ));
        assert!(matches!(
            ParamSet::from_json_str("[{\"year\": 1}]"),
            Err(ParamsError::Parse(_))
        ));
    }
}
