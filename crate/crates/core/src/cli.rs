//! Command-line front end.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::classifier::{ReliefCategory, Scenario};
use crate::counterfactual::{
    credit_size_sweep, dependent_gap, eliminate_refundability, plan, priced_out, restore_parity,
    run_plan, PiecemealRow, PiecemealTable, PricedOutResult, SweepRow,
};
use crate::engine::{Engine, EngineError, EngineOptions};
use crate::money::Money;
use crate::output::{
    emit, ClassifyRow, DependentGapRow, Format, OutputError, ParityOutRow, RefundOutRow,
    RegressionRow, ThresholdRow,
};
use crate::params::{apply_overrides, load_params, OverrideSet, ParamSet, ParentalGroup};
use crate::population::{load_children, load_population};
use crate::stats::{did, fixed_effects, CovarianceKind};
use crate::taxmath::LiabilityMode;

pub const DATA_DIR_ENV: &str = "CTCSIM_DATA_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "ctcsim",
    version,
    about = "Child tax credit eligibility microsimulation"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// TOML run configuration; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Yearly parameter file (JSON).
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    /// Binned income counts (CSV).
    #[arg(long, global = true)]
    pub population: Option<PathBuf>,
    /// Children-per-household histograms (CSV), needed for s2.
    #[arg(long, global = true)]
    pub children: Option<PathBuf>,
    /// `s1` (one child, upper-bound rule) or `s2` (group average, midpoint rule).
    #[arg(long, global = true)]
    pub scenario: Option<Scenario>,
    /// Year range `A:B` or a single year.
    #[arg(long, global = true)]
    pub years: Option<YearRange>,
    /// Shorthand for a single-year `--years`.
    #[arg(long, global = true)]
    pub year: Option<i32>,
    /// Comma-separated parental groups.
    #[arg(long, global = true, value_delimiter = ',')]
    pub group: Option<Vec<ParentalGroup>>,
    /// `csv` or `json`.
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// `exact` bracket schedule or `table` ($50 rows).
    #[arg(long, global = true)]
    pub liability: Option<LiabilityMode>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Parameter overrides applied to every year, e.g. `ctc_per_child=2000`.
    #[arg(long = "set", global = true)]
    pub overrides: Option<String>,
    /// Use unrounded average children.
    #[arg(long, global = true)]
    pub exact_children: bool,
    /// Pool children histograms over `A:B` for every year.
    #[arg(long, global = true)]
    pub period_average: Option<YearRange>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Income thresholds per year and group.
    Thresholds,
    /// Relief category shares per year and group.
    Classify,
    /// Step-by-step move between two years' rules.
    Piecemeal {
        #[arg(long, default_value = "1a")]
        table: PiecemealTable,
        #[arg(long, default_value_t = 2017)]
        from: i32,
        #[arg(long, default_value_t = 2018)]
        to: i32,
    },
    /// Full-relief shares across credit sizes.
    Sweep {
        /// Inclusive dollar range `START:END:STEP`.
        #[arg(long, default_value = "500:3600:100")]
        credits: CreditRange,
        /// Keep the refund cap at its current value instead of matching the credit.
        #[arg(long)]
        no_parity: bool,
    },
    /// Parents losing full relief when only the credit maximum rises.
    PricedOut {
        /// New credit maximum; defaults to twice the current one.
        #[arg(long)]
        new_ctc: Option<Money>,
    },
    /// Full-relief gap before and after matching the refund cap to the credit.
    Parity,
    /// Access gained by removing the refund income floor.
    EliminateRefund,
    /// Group-by-year fixed effects regression.
    Regress {
        /// Categories (names or letters, comma-separated) forming the outcome share.
        #[arg(long, default_value = "d", value_delimiter = ',')]
        outcome: Vec<ReliefCategory>,
        #[arg(long, default_value_t = 2017)]
        baseline_year: i32,
        #[arg(long, default_value = "married")]
        baseline_group: ParentalGroup,
        #[arg(long, default_value = "hc1")]
        covariance: CovarianceKind,
    },
    /// Difference in differences between two groups.
    Did {
        #[arg(long, default_value = "d", value_delimiter = ',')]
        outcome: Vec<ReliefCategory>,
        #[arg(long, default_value = "single_mother")]
        treated: ParentalGroup,
        #[arg(long, default_value = "single_father")]
        control: ParentalGroup,
        #[arg(long, default_value_t = 2018)]
        post_year: i32,
        #[arg(long, default_value = "hc1")]
        covariance: CovarianceKind,
    },
    /// Every analysis in one document.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct YearRange {
    pub first: i32,
    pub last: i32,
}

impl YearRange {
    pub fn range(self) -> RangeInclusive<i32> {
        self.first..=self.last
    }
}

impl FromStr for YearRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("bad year range `{s}` (expected YEAR or FIRST:LAST)");
        let (a, b) = s.split_once(':').unwrap_or((s, s));
        let first: i32 = a.trim().parse().map_err(|_| bad())?;
        let last: i32 = b.trim().parse().map_err(|_| bad())?;
        if first > last {
            return Err(bad());
        }
        Ok(YearRange { first, last })
    }
}

impl TryFrom<String> for YearRange {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<YearRange> for String {
    fn from(r: YearRange) -> String {
        format!("{}:{}", r.first, r.last)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CreditRange(pub Vec<Money>);

impl FromStr for CreditRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("bad credit range `{s}` (expected START:END:STEP in dollars)");
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts.as_slice() else {
            return Err(bad());
        };
        let a: Money = a.parse().map_err(|_| bad())?;
        let b: Money = b.parse().map_err(|_| bad())?;
        let step: Money = step.parse().map_err(|_| bad())?;
        if step <= Money::ZERO || a > b {
            return Err(bad());
        }
        let mut v = Vec::new();
        let mut c = a;
        while c <= b {
            v.push(c);
            c = c + step;
        }
        Ok(CreditRange(v))
    }
}

/// Settings read from `--config`. Relative paths resolve against the file's directory.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub params: Option<PathBuf>,
    pub population: Option<PathBuf>,
    pub children: Option<PathBuf>,
    pub scenario: Option<Scenario>,
    pub years: Option<YearRange>,
    pub groups: Option<Vec<ParentalGroup>>,
    pub format: Option<Format>,
    pub liability: Option<LiabilityMode>,
    pub out: Option<PathBuf>,
    pub overrides: Option<String>,
    pub exact_children: Option<bool>,
    pub period_average: Option<YearRange>,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: PathBuf,
    pub population: PathBuf,
    /// None when no children file was named and the default is absent.
    pub children: Option<PathBuf>,
    pub scenario: Scenario,
    /// Whether the scenario was chosen explicitly rather than defaulted.
    pub scenario_explicit: bool,
    pub years: Option<YearRange>,
    pub groups: Vec<ParentalGroup>,
    pub format: Format,
    pub liability: LiabilityMode,
    pub out: Option<PathBuf>,
    pub overrides: Option<OverrideSet>,
    pub round_children: bool,
    pub period_average: Option<YearRange>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<OutputError> for CliError {
    fn from(e: OutputError) -> Self {
        match e {
            OutputError::Io(e) => CliError::Io(e.to_string()),
            OutputError::Csv(e) if e.is_io_error() => CliError::Io(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<crate::params::ParamsError> for CliError {
    fn from(e: crate::params::ParamsError) -> Self {
        EngineError::from(e).into()
    }
}

impl From<crate::population::PopulationError> for CliError {
    fn from(e: crate::population::PopulationError) -> Self {
        EngineError::from(e).into()
    }
}

fn default_data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data")))
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut cfg: ConfigFile = toml::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    for p in [
        &mut cfg.params,
        &mut cfg.population,
        &mut cfg.children,
        &mut cfg.out,
    ]
    .into_iter()
    .flatten()
    {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    Ok(cfg)
}

impl RunConfig {
    /// Merges flags over the config file over defaults.
    pub fn resolve(g: &GlobalArgs) -> Result<RunConfig, CliError> {
        let cfg = match &g.config {
            Some(p) => read_config(p)?,
            None => ConfigFile::default(),
        };
        let data = default_data_dir();
        let children_given = g.children.clone().or(cfg.children);
        let children = match children_given {
            Some(p) => Some(p),
            None => Some(data.join("children.csv")).filter(|p| p.exists()),
        };
        let scenario_given = g.scenario.or(cfg.scenario);
        let years = match (g.year, g.years) {
            (Some(y), _) => Some(YearRange { first: y, last: y }),
            (None, Some(r)) => Some(r),
            (None, None) => cfg.years,
        };
        let overrides = match g.overrides.as_ref().or(cfg.overrides.as_ref()) {
            Some(s) => Some(s.parse::<OverrideSet>()?),
            None => None,
        };
        let groups = g
            .group
            .clone()
            .or(cfg.groups)
            .unwrap_or_else(|| ParentalGroup::ALL.to_vec());
        if groups.is_empty() {
            return Err(CliError::Validation("no groups selected".into()));
        }
        let groups: Vec<ParentalGroup> = groups
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Ok(RunConfig {
            params: g
                .params
                .clone()
                .or(cfg.params)
                .unwrap_or_else(|| data.join("params.json")),
            population: g
                .population
                .clone()
                .or(cfg.population)
                .unwrap_or_else(|| data.join("population.csv")),
            children,
            scenario: scenario_given.unwrap_or(Scenario::S1),
            scenario_explicit: scenario_given.is_some(),
            years,
            groups,
            format: g.format.or(cfg.format).unwrap_or_default(),
            liability: g.liability.or(cfg.liability).unwrap_or_default(),
            out: g.out.clone().or(cfg.out),
            overrides,
            round_children: !(g.exact_children || cfg.exact_children.unwrap_or(false)),
            period_average: g.period_average.or(cfg.period_average),
        })
    }

    pub fn engine(&self) -> Result<Engine, CliError> {
        let mut params = load_params(&self.params)?;
        if let Some(o) = &self.overrides {
            let adjusted = params
                .iter()
                .map(|p| apply_overrides(p, o))
                .collect::<Result<Vec<_>, _>>()?;
            params = ParamSet::from_params(adjusted)?;
        }
        let mut population = load_population(&self.population)?;
        if let Some(c) = &self.children {
            population = population.with_children(load_children(c)?)?;
        }
        let options = EngineOptions {
            liability: self.liability,
            round_children: self.round_children,
            period_average: self.period_average.map(YearRange::range),
        };
        Ok(Engine::new(params, population, options))
    }

    /// Requested years, each checked against both parameters and data.
    fn years(&self, engine: &Engine) -> Result<Vec<i32>, CliError> {
        let years: Vec<i32> = match self.years {
            Some(r) => r.range().collect(),
            None => engine.years(),
        };
        if years.is_empty() {
            return Err(CliError::Validation(
                "no years with both parameters and population data".into(),
            ));
        }
        for &y in &years {
            engine.year_params(y)?;
            engine.population().bins(y, ParentalGroup::Married)?;
        }
        Ok(years)
    }

    /// The single year an analysis runs on, defaulting to `fallback`.
    fn one_year(&self, engine: &Engine, fallback: i32) -> Result<i32, CliError> {
        let year = match self.years {
            Some(r) if r.first == r.last => r.first,
            Some(r) => {
                return Err(CliError::Validation(format!(
                    "this analysis takes one year, got {}:{}",
                    r.first, r.last
                )))
            }
            None => fallback,
        };
        engine.year_params(year)?;
        engine.population().bins(year, ParentalGroup::Married)?;
        Ok(year)
    }

    /// Requested years, defaulting to those where the credit and refund caps match.
    fn parity_years(&self, engine: &Engine) -> Result<Vec<i32>, CliError> {
        if self.years.is_some() {
            return self.years(engine);
        }
        let years: Vec<i32> = engine
            .years()
            .into_iter()
            .filter(|&y| {
                engine
                    .year_params(y)
                    .map(|p| p.is_parity())
                    .unwrap_or(false)
            })
            .collect();
        if years.is_empty() {
            return Err(CliError::Validation(
                "no parity years in the data; pass --years".into(),
            ));
        }
        Ok(years)
    }

    fn scenarios(&self) -> Vec<Scenario> {
        if self.scenario_explicit {
            vec![self.scenario]
        } else {
            Scenario::ALL.to_vec()
        }
    }
}

fn thresholds_rows(
    engine: &Engine,
    cfg: &RunConfig,
    years: &[i32],
    scenario: Scenario,
) -> Result<Vec<ThresholdRow>, CliError> {
    let mut rows = Vec::new();
    for &y in years {
        for &g in &cfg.groups {
            let t = engine.thresholds(y, g, scenario)?;
            rows.push(ThresholdRow::new(&t, scenario, cfg.liability));
        }
    }
    Ok(rows)
}

fn classify_rows(
    engine: &Engine,
    cfg: &RunConfig,
    years: &[i32],
    scenario: Scenario,
) -> Result<Vec<ClassifyRow>, CliError> {
    let mut rows = Vec::new();
    for &y in years {
        for &g in &cfg.groups {
            rows.extend(ClassifyRow::from_estimate(
                &engine.classify(y, g, scenario)?,
            ));
        }
    }
    Ok(rows)
}

fn piecemeal_rows(
    engine: &Engine,
    cfg: &RunConfig,
    table: PiecemealTable,
    from: i32,
    to: i32,
    scenario: Scenario,
) -> Result<Vec<PiecemealRow>, CliError> {
    let p = plan(table, engine.year_params(from)?, engine.year_params(to)?);
    let mut rows = run_plan(engine, &p, scenario)?;
    rows.retain(|r| cfg.groups.contains(&r.group));
    Ok(rows)
}

fn sweep_rows(
    engine: &Engine,
    cfg: &RunConfig,
    year: i32,
    credits: &[Money],
    scenario: Scenario,
    parity: bool,
) -> Result<Vec<SweepRow>, CliError> {
    let mut rows = credit_size_sweep(engine, year, credits, scenario, parity)?;
    rows.retain(|r| cfg.groups.contains(&r.group));
    Ok(rows)
}

fn priced_out_rows(
    engine: &Engine,
    cfg: &RunConfig,
    year: i32,
    new_ctc: Option<Money>,
    scenario: Scenario,
) -> Result<Vec<PricedOutResult>, CliError> {
    let params = engine.year_params(year)?;
    let new_ctc = new_ctc.unwrap_or(Money::from_cents(params.ctc_per_child.cents() * 2));
    cfg.groups
        .iter()
        .map(|&g| Ok(priced_out(engine, year, g, params, new_ctc, scenario)?))
        .collect()
}

fn outcome_set(outcome: &[ReliefCategory]) -> Result<BTreeSet<ReliefCategory>, CliError> {
    if outcome.is_empty() {
        return Err(CliError::Validation(
            "outcome needs at least one category".into(),
        ));
    }
    Ok(outcome.iter().copied().collect())
}

fn regress_rows(
    engine: &Engine,
    years: &[i32],
    scenario: Scenario,
    outcome: &BTreeSet<ReliefCategory>,
    baseline_year: i32,
    baseline_group: ParentalGroup,
    kind: CovarianceKind,
) -> Result<Vec<RegressionRow>, CliError> {
    let panel = engine.panel(years, &ParentalGroup::ALL, scenario, outcome)?;
    let r =
        fixed_effects(&panel, baseline_year, baseline_group, kind).map_err(EngineError::from)?;
    Ok(RegressionRow::rows(
        &format!("fixed_effects_{scenario}"),
        &r,
    ))
}

#[allow(clippy::too_many_arguments)]
fn did_rows(
    engine: &Engine,
    years: &[i32],
    scenario: Scenario,
    outcome: &BTreeSet<ReliefCategory>,
    treated: ParentalGroup,
    control: ParentalGroup,
    post_year: i32,
    kind: CovarianceKind,
) -> Result<Vec<RegressionRow>, CliError> {
    let panel = engine.panel(years, &[treated, control], scenario, outcome)?;
    let r = did(&panel, treated, control, post_year, kind).map_err(EngineError::from)?;
    Ok(RegressionRow::rows(&format!("did_{scenario}"), &r))
}

fn write_table<T: Serialize>(
    w: &mut dyn Write,
    rows: &[T],
    format: Format,
) -> Result<(), CliError> {
    emit(rows, format, w)?;
    Ok(())
}

/// Sections of `report`, in output order.
#[derive(Debug, Serialize)]
struct Report {
    thresholds: Vec<ThresholdRow>,
    classify: Vec<ClassifyRow>,
    piecemeal: Vec<PiecemealRow>,
    sweep: Vec<SweepRow>,
    priced_out: Vec<PricedOutResult>,
    parity: Vec<ParityOutRow>,
    eliminate_refund: Vec<RefundOutRow>,
    dependent_gap: Vec<DependentGapRow>,
    regress: Vec<RegressionRow>,
    did: Vec<RegressionRow>,
}

impl Report {
    fn build(engine: &Engine, cfg: &RunConfig) -> Result<Report, CliError> {
        let years = cfg.years(engine)?;
        let last = *years.last().expect("years are nonempty");
        let mut r = Report {
            thresholds: Vec::new(),
            classify: Vec::new(),
            piecemeal: Vec::new(),
            sweep: Vec::new(),
            priced_out: Vec::new(),
            parity: Vec::new(),
            eliminate_refund: Vec::new(),
            dependent_gap: Vec::new(),
            regress: Vec::new(),
            did: Vec::new(),
        };
        let outcome = BTreeSet::from([ReliefCategory::FullCtc]);
        let parity_years: Vec<i32> = years
            .iter()
            .copied()
            .filter(|&y| {
                engine
                    .year_params(y)
                    .map(|p| p.is_parity())
                    .unwrap_or(false)
            })
            .collect();
        let credits = "500:3600:100"
            .parse::<CreditRange>()
            .expect("valid literal")
            .0;
        for scenario in cfg.scenarios() {
            r.thresholds
                .extend(thresholds_rows(engine, cfg, &years, scenario)?);
            r.classify
                .extend(classify_rows(engine, cfg, &years, scenario)?);
            if years.len() > 1 {
                let prev = years[years.len() - 2];
                for table in [
                    PiecemealTable::T1a,
                    PiecemealTable::T1b,
                    PiecemealTable::T1c,
                ] {
                    r.piecemeal
                        .extend(piecemeal_rows(engine, cfg, table, prev, last, scenario)?);
                }
            }
            r.sweep
                .extend(sweep_rows(engine, cfg, last, &credits, scenario, true)?);
            if let Some(&py) = parity_years.last() {
                r.priced_out
                    .extend(priced_out_rows(engine, cfg, py, None, scenario)?);
            }
            r.parity.extend(ParityOutRow::rows(&restore_parity(
                engine,
                last,
                engine.year_params(last)?,
                scenario,
            )?));
            r.eliminate_refund
                .extend(RefundOutRow::rows(&eliminate_refundability(
                    engine,
                    last,
                    engine.year_params(last)?,
                    scenario,
                )?));
            if parity_years.len() > 1 && ParentalGroup::ALL.iter().all(|g| cfg.groups.contains(g)) {
                r.regress.extend(regress_rows(
                    engine,
                    &parity_years,
                    scenario,
                    &outcome,
                    *parity_years.last().expect("checked nonempty"),
                    ParentalGroup::Married,
                    CovarianceKind::HC1,
                )?);
            }
            if years[0] < last {
                r.did.extend(did_rows(
                    engine,
                    &years,
                    scenario,
                    &outcome,
                    ParentalGroup::SingleMother,
                    ParentalGroup::SingleFather,
                    last,
                    CovarianceKind::HC1,
                )?);
            }
        }
        if let (Some(&first), Some(&end)) = (parity_years.first(), parity_years.last()) {
            for rule in [
                crate::classifier::BoundRule::Upper,
                crate::classifier::BoundRule::Middle,
            ] {
                r.dependent_gap.extend(DependentGapRow::rows(&dependent_gap(
                    engine,
                    first..=end,
                    rule,
                )?));
            }
        }
        Ok(r)
    }

    fn write(&self, w: &mut dyn Write, format: Format) -> Result<(), CliError> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, self)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                w.write_all(b"\n")
                    .map_err(|e| CliError::Io(e.to_string()))?;
            }
            Format::Csv => {
                let mut section =
                    |name: &str, f: &dyn Fn(&mut dyn Write) -> Result<(), CliError>| {
                        writeln!(w, "# {name}").map_err(|e| CliError::Io(e.to_string()))?;
                        f(w)?;
                        writeln!(w).map_err(|e| CliError::Io(e.to_string()))
                    };
                section("thresholds", &|w| write_table(w, &self.thresholds, format))?;
                section("classify", &|w| write_table(w, &self.classify, format))?;
                section("piecemeal", &|w| write_table(w, &self.piecemeal, format))?;
                section("sweep", &|w| write_table(w, &self.sweep, format))?;
                section("priced_out", &|w| write_table(w, &self.priced_out, format))?;
                section("parity", &|w| write_table(w, &self.parity, format))?;
                section("eliminate_refund", &|w| {
                    write_table(w, &self.eliminate_refund, format)
                })?;
                section("dependent_gap", &|w| {
                    write_table(w, &self.dependent_gap, format)
                })?;
                section("regress", &|w| write_table(w, &self.regress, format))?;
                section("did", &|w| write_table(w, &self.did, format))?;
            }
        }
        Ok(())
    }
}

/// Runs one parsed invocation, writing to `--out` or `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.global)?;
    let engine = cfg.engine()?;
    let mut buf: Vec<u8> = Vec::new();
    let format = cfg.format;
    match &cli.command {
        Command::Thresholds => {
            let years = cfg.years(&engine)?;
            write_table(
                &mut buf,
                &thresholds_rows(&engine, &cfg, &years, cfg.scenario)?,
                format,
            )?;
        }
        Command::Classify => {
            let years = cfg.years(&engine)?;
            write_table(
                &mut buf,
                &classify_rows(&engine, &cfg, &years, cfg.scenario)?,
                format,
            )?;
        }
        Command::Piecemeal { table, from, to } => {
            let rows = piecemeal_rows(&engine, &cfg, *table, *from, *to, cfg.scenario)?;
            write_table(&mut buf, &rows, format)?;
        }
        Command::Sweep { credits, no_parity } => {
            let year = cfg.one_year(&engine, 2018)?;
            let rows = sweep_rows(&engine, &cfg, year, &credits.0, cfg.scenario, !no_parity)?;
            write_table(&mut buf, &rows, format)?;
        }
        Command::PricedOut { new_ctc } => {
            let year = cfg.one_year(&engine, 2017)?;
            write_table(
                &mut buf,
                &priced_out_rows(&engine, &cfg, year, *new_ctc, cfg.scenario)?,
                format,
            )?;
        }
        Command::Parity => {
            let year = cfg.one_year(&engine, 2018)?;
            let a = restore_parity(&engine, year, engine.year_params(year)?, cfg.scenario)?;
            write_table(&mut buf, &ParityOutRow::rows(&a), format)?;
        }
        Command::EliminateRefund => {
            let year = cfg.one_year(&engine, 2018)?;
            let a =
                eliminate_refundability(&engine, year, engine.year_params(year)?, cfg.scenario)?;
            write_table(&mut buf, &RefundOutRow::rows(&a), format)?;
        }
        Command::Regress {
            outcome,
            baseline_year,
            baseline_group,
            covariance,
        } => {
            let years = cfg.parity_years(&engine)?;
            let rows = regress_rows(
                &engine,
                &years,
                cfg.scenario,
                &outcome_set(outcome)?,
                *baseline_year,
                *baseline_group,
                *covariance,
            )?;
            write_table(&mut buf, &rows, format)?;
        }
        Command::Did {
            outcome,
            treated,
            control,
            post_year,
            covariance,
        } => {
            let years = cfg.years(&engine)?;
            let rows = did_rows(
                &engine,
                &years,
                cfg.scenario,
                &outcome_set(outcome)?,
                *treated,
                *control,
                *post_year,
                *covariance,
            )?;
            write_table(&mut buf, &rows, format)?;
        }
        Command::Report => Report::build(&engine, &cfg)?.write(&mut buf, format)?,
    }
    match &cfg.out {
        Some(path) => {
            let file =
                File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            w.write_all(&buf)
                .and_then(|_| w.flush())
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => match stdout.write_all(&buf).and_then(|_| stdout.flush()) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
            Err(e) => Err(CliError::Io(e.to_string())),
        },
    }
}

/// Entry point for the binary: usage errors and validation failures exit 1,
/// I/O failures exit 2.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli, &mut io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_parse() {
        assert_eq!(
            "2003:2018".parse::<YearRange>().unwrap(),
            YearRange {
                first: 2003,
                last: 2018
            }
        );
        assert_eq!(
            "2009".parse::<YearRange>().unwrap(),
            YearRange {
                first: 2009,
                last: 2009
            }
        );
        assert!("2018:2003".parse::<YearRange>().is_err());
        let c = "500:3600:100".parse::<CreditRange>().unwrap();
        assert_eq!(c.0.len(), 32);
        assert_eq!(c.0[31], Money::from_dollars(3600));
        assert!("500:3600:0".parse::<CreditRange>().is_err());
        assert!("500:3600".parse::<CreditRange>().is_err());
    }

    #[test]
    fn flags_override_config_which_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "scenario = \"s2\"\nformat = \"json\"\nyears = \"2010:2012\"\nparams = \"p.json\"\n",
        )
        .unwrap();
        let g = GlobalArgs {
            config: Some(path.clone()),
            format: Some(Format::Csv),
            ..GlobalArgs::default()
        };
        let cfg = RunConfig::resolve(&g).unwrap();
        assert_eq!(cfg.scenario, Scenario::S2);
        assert!(cfg.scenario_explicit);
        assert_eq!(cfg.format, Format::Csv);
        assert_eq!(
            cfg.years,
            Some(YearRange {
                first: 2010,
                last: 2012
            })
        );
        assert_eq!(cfg.params, dir.path().join("p.json"));
        assert_eq!(cfg.liability, LiabilityMode::Exact);

        let defaults = RunConfig::resolve(&GlobalArgs::default()).unwrap();
        assert_eq!(defaults.scenario, Scenario::S1);
        assert!(!defaults.scenario_explicit);
        assert_eq!(defaults.groups, ParentalGroup::ALL.to_vec());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "senario = \"s2\"\n").unwrap();
        let g = GlobalArgs {
            config: Some(path),
            ..GlobalArgs::default()
        };
        assert!(matches!(
            RunConfig::resolve(&g),
            Err(CliError::Validation(_))
        ));
    }
}
