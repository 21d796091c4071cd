//! Binned income counts and children histograms per year and parental group.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::money::{Exact, Headcount, Money};
use crate::params::ParentalGroup;

/// Width of a classification bin, in dollars.
pub const BIN_WIDTH: i64 = 2_500;
/// Exclusive top of the binned income range, in dollars.
pub const INCOME_CEILING: i64 = 100_000;

#[derive(Debug, thiserror::Error)]
pub enum PopulationError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("malformed row {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("negative count {count} on row {line}")]
    NegativeCount { line: u64, count: i64 },
    #[error("{year} {group}: bins not contiguous, expected a bin starting at {expected} but found {found}")]
    Gap {
        year: i32,
        group: ParentalGroup,
        expected: Money,
        found: Money,
    },
    #[error("{year} {group}: bin [{lower}, {upper}) is not {BIN_WIDTH} wide")]
    BinWidth {
        year: i32,
        group: ParentalGroup,
        lower: Money,
        upper: Money,
    },
    #[error("{year} {group}: bins must cover [0, {INCOME_CEILING}); found one ending at {upper}")]
    AboveCeiling {
        year: i32,
        group: ParentalGroup,
        upper: Money,
    },
    #[error("{year} {group}: bins stop at {end}, short of {INCOME_CEILING}")]
    Incomplete {
        year: i32,
        group: ParentalGroup,
        end: Money,
    },
    #[error("{year} {group}: duplicate entry")]
    Duplicate { year: i32, group: ParentalGroup },
    #[error("years are not contiguous: {0} is missing")]
    MissingYearInRange(i32),
    #[error("no population data for {year} {group}")]
    MissingGroup { year: i32, group: ParentalGroup },
    #[error("no children histogram for {year} {group}")]
    MissingChildren { year: i32, group: ParentalGroup },
    #[error("children histogram has no respondents")]
    EmptyHistogram,
    #[error("{year} {group}: no parents in any bin")]
    EmptyGroup { year: i32, group: ParentalGroup },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IncomeBin {
    /// Inclusive.
    pub lower: Money,
    /// Exclusive.
    pub upper: Money,
    pub count: u64,
}

impl IncomeBin {
    pub fn midpoint(&self) -> Money {
        Money::from_cents((self.lower.cents() + self.upper.cents()) / 2)
    }
}

/// Number of children a respondent reports, capped at "8 or more".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChildrenBucket(u8);

impl ChildrenBucket {
    pub const EIGHT_PLUS: ChildrenBucket = ChildrenBucket(8);

    pub fn new(k: u8) -> Option<Self> {
        (k <= 8).then_some(ChildrenBucket(k))
    }

    /// Children counted for this bucket; "8 or more" counts as 8.
    pub fn children(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = ChildrenBucket> {
        (0..=8).map(ChildrenBucket)
    }
}

impl fmt::Display for ChildrenBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 8 {
            f.write_str("8plus")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for ChildrenBucket {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "8plus" | "8+" => Ok(ChildrenBucket::EIGHT_PLUS),
            _ => s
                .parse::<u8>()
                .ok()
                .filter(|k| *k < 8)
                .map(ChildrenBucket)
                .ok_or_else(|| format!("children must be 0-7 or 8plus, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ChildrenHistogram {
    counts: [u64; 9],
}

impl ChildrenHistogram {
    pub fn from_counts(counts: [u64; 9]) -> Self {
        ChildrenHistogram { counts }
    }

    pub fn count(&self, bucket: ChildrenBucket) -> u64 {
        self.counts[bucket.0 as usize]
    }

    pub fn set(&mut self, bucket: ChildrenBucket, count: u64) {
        self.counts[bucket.0 as usize] = count;
    }

    pub fn respondents(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn children_total(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(k, c)| k as u64 * c)
            .sum()
    }

    pub fn merged(&self, other: &ChildrenHistogram) -> ChildrenHistogram {
        let mut out = *self;
        for (a, b) in out.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        out
    }
}

/// Mean children per respondent, exact; "8 or more" counts as 8.
pub fn average_children(h: &ChildrenHistogram) -> Result<Headcount, PopulationError> {
    let n = h.respondents();
    if n == 0 {
        return Err(PopulationError::EmptyHistogram);
    }
    let avg = Exact::new(h.children_total() as i128, n as i128);
    Ok(Headcount::new(avg).expect("counts are nonnegative"))
}

type Key = (i32, ParentalGroup);

/// Validated bin and children data.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PopulationTable {
    bins: BTreeMap<Key, Vec<IncomeBin>>,
    children: BTreeMap<Key, ChildrenHistogram>,
}

impl PopulationTable {
    pub fn new(
        bins: BTreeMap<Key, Vec<IncomeBin>>,
        children: BTreeMap<Key, ChildrenHistogram>,
    ) -> Result<Self, PopulationError> {
        let mut sorted = BTreeMap::new();
        for ((year, group), mut v) in bins {
            v.sort_by_key(|b| b.lower);
            validate_bins(year, group, &v)?;
            sorted.insert((year, group), v);
        }
        check_contiguous_years(sorted.keys().map(|k| k.0))?;
        check_contiguous_years(children.keys().map(|k| k.0))?;
        Ok(PopulationTable {
            bins: sorted,
            children,
        })
    }

    pub fn with_children(
        mut self,
        children: BTreeMap<Key, ChildrenHistogram>,
    ) -> Result<Self, PopulationError> {
        check_contiguous_years(children.keys().map(|k| k.0))?;
        self.children = children;
        Ok(self)
    }

    pub fn bins(&self, year: i32, group: ParentalGroup) -> Result<&[IncomeBin], PopulationError> {
        self.bins
            .get(&(year, group))
            .map(Vec::as_slice)
            .ok_or(PopulationError::MissingGroup { year, group })
    }

    pub fn children(
        &self,
        year: i32,
        group: ParentalGroup,
    ) -> Result<&ChildrenHistogram, PopulationError> {
        self.children
            .get(&(year, group))
            .ok_or(PopulationError::MissingChildren { year, group })
    }

    pub fn has_children(&self) -> bool {
        !self.children.is_empty()
    }

    pub fn years(&self) -> Vec<i32> {
        let mut ys: Vec<i32> = self.bins.keys().map(|k| k.0).collect();
        ys.dedup();
        ys
    }

    pub fn keys(&self) -> impl Iterator<Item = (i32, ParentalGroup)> + '_ {
        self.bins.keys().copied()
    }

    pub fn total(&self, year: i32, group: ParentalGroup) -> Result<u64, PopulationError> {
        Ok(self.bins(year, group)?.iter().map(|b| b.count).sum())
    }

    /// Average children for one year.
    pub fn average_children(
        &self,
        year: i32,
        group: ParentalGroup,
    ) -> Result<Headcount, PopulationError> {
        average_children(self.children(year, group)?)
    }

    /// Average children pooled over every year in `years`.
    pub fn pooled_average_children(
        &self,
        years: impl IntoIterator<Item = i32>,
        group: ParentalGroup,
    ) -> Result<Headcount, PopulationError> {
        let mut pooled = ChildrenHistogram::default();
        for y in years {
            pooled = pooled.merged(self.children(y, group)?);
        }
        average_children(&pooled)
    }

    /// Every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> PopulationTable {
        let bins = self
            .bins
            .iter()
            .map(|(k, v)| {
                let v = v
                    .iter()
                    .map(|b| IncomeBin {
                        count: b.count * factor,
                        ..*b
                    })
                    .collect();
                (*k, v)
            })
            .collect();
        let children = self
            .children
            .iter()
            .map(|(k, h)| {
                let mut counts = h.counts;
                counts.iter_mut().for_each(|c| *c *= factor);
                (*k, ChildrenHistogram { counts })
            })
            .collect();
        PopulationTable { bins, children }
    }

    /// Share of the group's parents in each bin, in bin order.
    pub fn distribution_proportions(
        &self,
        year: i32,
        group: ParentalGroup,
    ) -> Result<Vec<(IncomeBin, f64)>, PopulationError> {
        distribution_proportions(year, group, self.bins(year, group)?)
    }

    pub fn write_population<W: io::Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        for ((year, group), bins) in &self.bins {
            for b in bins {
                out.serialize(PopulationRow {
                    year: *year,
                    group: *group,
                    bin_lower: b.lower.cents() / 100,
                    bin_upper: b.upper.cents() / 100,
                    count: b.count as i64,
                })?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_children<W: io::Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        for ((year, group), h) in &self.children {
            for bucket in ChildrenBucket::all() {
                out.serialize(ChildrenRow {
                    year: *year,
                    group: *group,
                    children: bucket.to_string(),
                    count: h.count(bucket) as i64,
                })?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

pub fn distribution_proportions(
    year: i32,
    group: ParentalGroup,
    bins: &[IncomeBin],
) -> Result<Vec<(IncomeBin, f64)>, PopulationError> {
    let total: u64 = bins.iter().map(|b| b.count).sum();
    if total == 0 {
        return Err(PopulationError::EmptyGroup { year, group });
    }
    Ok(bins
        .iter()
        .map(|b| (*b, b.count as f64 / total as f64))
        .collect())
}

/// Merges runs of adjacent bins so each output bin spans `width_dollars`.
pub fn reaggregate(bins: &[IncomeBin], width_dollars: i64) -> Vec<IncomeBin> {
    let width = Money::from_dollars(width_dollars).cents();
    let mut out: Vec<IncomeBin> = Vec::new();
    for b in bins {
        let start = Money::from_cents(b.lower.cents().div_euclid(width) * width);
        match out.last_mut() {
            Some(last) if last.lower == start => {
                last.count += b.count;
                last.upper = b.upper;
            }
            _ => out.push(IncomeBin {
                lower: start,
                upper: b.upper,
                count: b.count,
            }),
        }
    }
    out
}

fn validate_bins(
    year: i32,
    group: ParentalGroup,
    bins: &[IncomeBin],
) -> Result<(), PopulationError> {
    let mut expected = Money::ZERO;
    for b in bins {
        if b.lower != expected {
            if b.lower < expected {
                return Err(PopulationError::Duplicate { year, group });
            }
            return Err(PopulationError::Gap {
                year,
                group,
                expected,
                found: b.lower,
            });
        }
        if b.upper - b.lower != Money::from_dollars(BIN_WIDTH) {
            return Err(PopulationError::BinWidth {
                year,
                group,
                lower: b.lower,
                upper: b.upper,
            });
        }
        if b.upper > Money::from_dollars(INCOME_CEILING) {
            return Err(PopulationError::AboveCeiling {
                year,
                group,
                upper: b.upper,
            });
        }
        expected = b.upper;
    }
    if expected != Money::from_dollars(INCOME_CEILING) {
        return Err(PopulationError::Incomplete {
            year,
            group,
            end: expected,
        });
    }
    Ok(())
}

fn check_contiguous_years(years: impl Iterator<Item = i32>) -> Result<(), PopulationError> {
    let mut ys: Vec<i32> = years.collect();
    ys.dedup();
    for pair in ys.windows(2) {
        if pair[1] != pair[0] + 1 {
            return Err(PopulationError::MissingYearInRange(pair[0] + 1));
        }
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct PopulationRow {
    year: i32,
    group: ParentalGroup,
    bin_lower: i64,
    bin_upper: i64,
    count: i64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ChildrenRow {
    year: i32,
    group: ParentalGroup,
    children: String,
    count: i64,
}

fn read_rows<T, R>(reader: R) -> Result<Vec<(u64, T)>, PopulationError>
where
    T: for<'de> Deserialize<'de>,
    R: io::Read,
{
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.deserialize::<T>() {
        let rec = rec.map_err(|e| PopulationError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        // Header is line 1; data rows follow.
        rows.push((rows.len() as u64 + 2, rec));
    }
    Ok(rows)
}

fn nonnegative(line: u64, count: i64) -> Result<u64, PopulationError> {
    u64::try_from(count).map_err(|_| PopulationError::NegativeCount { line, count })
}

pub fn parse_population<R: io::Read>(
    reader: R,
) -> Result<BTreeMap<Key, Vec<IncomeBin>>, PopulationError> {
    let mut bins: BTreeMap<Key, Vec<IncomeBin>> = BTreeMap::new();
    for (line, row) in read_rows::<PopulationRow, _>(reader)? {
        let count = nonnegative(line, row.count)?;
        if row.bin_upper > INCOME_CEILING || row.bin_lower >= INCOME_CEILING {
            return Err(PopulationError::AboveCeiling {
                year: row.year,
                group: row.group,
                upper: Money::from_dollars(row.bin_upper),
            });
        }
        bins.entry((row.year, row.group))
            .or_default()
            .push(IncomeBin {
                lower: Money::from_dollars(row.bin_lower),
                upper: Money::from_dollars(row.bin_upper),
                count,
            });
    }
    Ok(bins)
}

pub fn parse_children<R: io::Read>(
    reader: R,
) -> Result<BTreeMap<Key, ChildrenHistogram>, PopulationError> {
    let mut out: BTreeMap<Key, (ChildrenHistogram, [bool; 9])> = BTreeMap::new();
    for (line, row) in read_rows::<ChildrenRow, _>(reader)? {
        let count = nonnegative(line, row.count)?;
        let bucket: ChildrenBucket = row
            .children
            .parse()
            .map_err(|message| PopulationError::Parse { line, message })?;
        let (h, seen) = out.entry((row.year, row.group)).or_default();
        if std::mem::replace(&mut seen[bucket.0 as usize], true) {
            return Err(PopulationError::Duplicate {
                year: row.year,
                group: row.group,
            });
        }
        h.set(bucket, count);
    }
    out.into_iter()
        .map(|(k, (h, _))| {
            if h.respondents() == 0 {
                Err(PopulationError::EmptyHistogram)
            } else {
                Ok((k, h))
            }
        })
        .collect()
}

fn open(path: &Path) -> Result<std::fs::File, PopulationError> {
    std::fs::File::open(path).map_err(|source| PopulationError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads the binned population file.
pub fn load_population(path: impl AsRef<Path>) -> Result<PopulationTable, PopulationError> {
    let bins = parse_population(open(path.as_ref())?)?;
    PopulationTable::new(bins, BTreeMap::new())
}

pub fn load_children(
    path: impl AsRef<Path>,
) -> Result<BTreeMap<Key, ChildrenHistogram>, PopulationError> {
    parse_children(open(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "year,group,bin_lower,bin_upper,count\n";

    fn full_file(count: impl Fn(i64) -> i64) -> String {
        let mut s = HEADER.to_string();
        for i in 0..40 {
            let lo = i * BIN_WIDTH;
            s += &format!("2010,married,{lo},{},{}\n", lo + BIN_WIDTH, count(i));
        }
        s
    }

    fn table(text: &str) -> Result<PopulationTable, PopulationError> {
        PopulationTable::new(parse_population(text.as_bytes())?, BTreeMap::new())
    }

    #[test]
    fn loads_complete_sequence() {
        let t = table(&full_file(|i| i * 10)).unwrap();
        let bins = t.bins(2010, ParentalGroup::Married).unwrap();
        assert_eq!(bins.len(), 40);
        assert_eq!(
            t.total(2010, ParentalGroup::Married).unwrap(),
            (0..40).map(|i| i * 10).sum::<i64>() as u64
        );
    }

    #[test]
    fn detects_gap() {
        let text = format!("{HEADER}2010,married,0,2500,1\n2010,married,5000,7500,1\n");
        assert!(matches!(table(&text), Err(PopulationError::Gap { .. })));
    }

    #[test]
    fn detects_negative_count() {
        let text = full_file(|i| if i == 3 { -3 } else { 1 });
        match table(&text) {
            Err(PopulationError::NegativeCount { count, line }) => {
                assert_eq!(count, -3);
                assert_eq!(line, 5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bins_above_ceiling_and_wrong_width() {
        let text = format!("{HEADER}2010,married,100000,102500,1\n");
        assert!(matches!(
            table(&text),
            Err(PopulationError::AboveCeiling { .. })
        ));
        let text = format!("{HEADER}2010,married,0,5000,1\n");
        assert!(matches!(
            table(&text),
            Err(PopulationError::BinWidth { .. })
        ));
        let text = format!("{HEADER}2010,married,0,2500,1\n");
        assert!(matches!(
            table(&text),
            Err(PopulationError::Incomplete { .. })
        ));
        assert!(matches!(
            table("year,group\n2010,x\n"),
            Err(PopulationError::Parse { .. })
        ));
    }

    #[test]
    fn children_averages() {
        let mut h = ChildrenHistogram::default();
        h.set(ChildrenBucket::new(1).unwrap(), 7);
        assert_eq!(average_children(&h).unwrap(), Headcount::whole(1));
        let mut h = ChildrenHistogram::default();
        h.set(ChildrenBucket::EIGHT_PLUS, 10);
        assert_eq!(average_children(&h).unwrap(), Headcount::whole(8));
        assert!(matches!(
            average_children(&ChildrenHistogram::default()),
            Err(PopulationError::EmptyHistogram)
        ));
        let h = ChildrenHistogram::from_counts([0, 30, 50, 15, 5, 0, 0, 0, 0]);
        assert_eq!(average_children(&h).unwrap().to_string(), "1.95");
    }

    #[test]
    fn parses_children_csv() {
        let text = "year,group,children,count\n2003,married,1,5\n2003,married,8plus,5\n";
        let m = parse_children(text.as_bytes()).unwrap();
        let avg = average_children(&m[&(2003, ParentalGroup::Married)]).unwrap();
        assert_eq!(avg.to_string(), "4.5");
        let bad = "year,group,children,count\n2003,married,9,5\n";
        assert!(matches!(
            parse_children(bad.as_bytes()),
            Err(PopulationError::Parse { .. })
        ));
        let dup = "year,group,children,count\n2003,married,1,5\n2003,married,1,5\n";
        assert!(matches!(
            parse_children(dup.as_bytes()),
            Err(PopulationError::Duplicate { .. })
        ));
    }

    #[test]
    fn proportions() {
        let t = table(&full_file(|i| if i == 7 { 42 } else { 0 })).unwrap();
        let p = t
            .distribution_proportions(2010, ParentalGroup::Married)
            .unwrap();
        assert_eq!(p[7].1, 1.0);
        assert!(p.iter().enumerate().all(|(i, (_, f))| i == 7 || *f == 0.0));

        let t = table(&full_file(|_| 9)).unwrap();
        let p = t
            .distribution_proportions(2010, ParentalGroup::Married)
            .unwrap();
        assert!(p.iter().all(|(_, f)| *f == 0.025));

        let t = table(&full_file(|_| 0)).unwrap();
        assert!(matches!(
            t.distribution_proportions(2010, ParentalGroup::Married),
            Err(PopulationError::EmptyGroup { .. })
        ));
    }

    #[test]
    fn reaggregates_to_wider_bins() {
        let t = table(&full_file(|i| i)).unwrap();
        let wide = reaggregate(t.bins(2010, ParentalGroup::Married).unwrap(), 5_000);
        assert_eq!(wide.len(), 20);
        assert_eq!(wide[0].count, 1);
        assert_eq!(wide[1].count, 5);
        assert_eq!(wide[19].upper, Money::from_dollars(100_000));
    }

    #[test]
    fn csv_round_trip() {
        let t = table(&full_file(|i| i * 3)).unwrap();
        let mut buf = Vec::new();
        t.write_population(&mut buf).unwrap();
        assert_eq!(table(std::str::from_utf8(&buf).unwrap()).unwrap(), t);
    }
}
