//! Regenerates the synthetic population and children fixtures.
//!
//! ```text
//! cargo run -p ctcsim --example gen_fixtures -- crates/core/data
//! ```
//!
//! Counts are in whole parents but always multiples of 1,000, the unit of
//! survey table exports. Children histograms are tuned so each group-year
//! average rounds to the reference value.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::PathBuf;

use ctcsim::money::Money;
use ctcsim::params::ParentalGroup;
use ctcsim::population::{
    ChildrenHistogram, IncomeBin, PopulationTable, BIN_WIDTH, INCOME_CEILING,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, LogNormal};

const UNIT: u64 = 1_000;
const FIRST_YEAR: i32 = 2003;

/// Average children in hundredths, 2003 through 2018.
const MARRIED: [u32; 16] = [
    189, 190, 190, 189, 189, 190, 189, 189, 188, 189, 189, 188, 190, 189, 189, 189,
];
const FATHERS: [u32; 16] = [
    168, 171, 171, 168, 168, 169, 167, 168, 167, 167, 169, 171, 169, 170, 166, 169,
];
const MOTHERS: [u32; 16] = [
    172, 175, 176, 174, 173, 175, 174, 174, 171, 173, 174, 173, 173, 174, 174, 175,
];

struct Shape {
    /// Median income in 2003 dollars.
    median: f64,
    sigma: f64,
    /// Parents in thousands, all incomes.
    size: f64,
    /// Extra share reporting no earnings at all.
    zero_share: f64,
}

fn shape(group: ParentalGroup) -> Shape {
    match group {
        ParentalGroup::Married => Shape {
            median: 62_000.0,
            sigma: 0.75,
            size: 24_000.0,
            zero_share: 0.005,
        },
        ParentalGroup::SingleFather => Shape {
            median: 38_000.0,
            sigma: 0.8,
            size: 1_900.0,
            zero_share: 0.008,
        },
        ParentalGroup::SingleMother => Shape {
            median: 26_000.0,
            sigma: 0.85,
            size: 8_500.0,
            zero_share: 0.02,
        },
    }
}

fn bins_for(rng: &mut ChaCha8Rng, group: ParentalGroup, year: i32) -> Vec<IncomeBin> {
    let s = shape(group);
    let growth = 1.025f64.powi(year - FIRST_YEAR);
    let dist = LogNormal::new((s.median * growth).ln(), s.sigma).expect("valid lognormal");
    (0..INCOME_CEILING / BIN_WIDTH)
        .map(|i| {
            let lo = i * BIN_WIDTH;
            let mut mass = dist.cdf((lo + BIN_WIDTH) as f64) - dist.cdf(lo as f64);
            if lo == 0 {
                mass += s.zero_share;
            }
            let noise: f64 = rng.random_range(0.9..1.1);
            let thousands = (s.size * mass * noise).round() as u64;
            IncomeBin {
                lower: Money::from_dollars(lo),
                upper: Money::from_dollars(lo + BIN_WIDTH),
                count: thousands * UNIT,
            }
        })
        .collect()
}

/// Histogram in units whose mean is exactly `hundredths / 100`.
fn children_for(rng: &mut ChaCha8Rng, hundredths: u32) -> ChildrenHistogram {
    let total_units: u64 = 10_000;
    let weights = [0.0, 0.40, 0.36, 0.15, 0.06, 0.02, 0.007, 0.002, 0.001];
    let mut units: Vec<u64> = weights
        .iter()
        .map(|w| (w * total_units as f64 * rng.random_range(0.95..1.05)).round() as u64)
        .collect();
    let placed: u64 = units.iter().sum();
    units[1] = (units[1] + total_units).saturating_sub(placed);
    // Each unit moved from one child to two raises the child total by one.
    let target = hundredths as u64 * total_units / 100;
    let current: u64 = units.iter().enumerate().map(|(k, c)| k as u64 * c).sum();
    if current < target {
        let d = target - current;
        units[1] -= d;
        units[2] += d;
    } else {
        let d = current - target;
        units[2] -= d;
        units[1] += d;
    }
    let mut counts = [0u64; 9];
    for (c, u) in counts.iter_mut().zip(units) {
        *c = u * UNIT;
    }
    ChildrenHistogram::from_counts(counts)
}

fn main() {
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "crates/core/data".into())
        .into();
    let mut rng = ChaCha8Rng::seed_from_u64(20_031_018);
    let mut bins = BTreeMap::new();
    let mut children = BTreeMap::new();
    for (i, year) in (FIRST_YEAR..=2018).enumerate() {
        for (group, table) in [
            (ParentalGroup::Married, &MARRIED),
            (ParentalGroup::SingleFather, &FATHERS),
            (ParentalGroup::SingleMother, &MOTHERS),
        ] {
            bins.insert((year, group), bins_for(&mut rng, group, year));
            children.insert((year, group), children_for(&mut rng, table[i]));
        }
    }
    let table = PopulationTable::new(bins, children).expect("generated data is valid");
    table
        .write_population(File::create(out.join("population.csv")).expect("create population.csv"))
        .expect("write population.csv");
    table
        .write_children(File::create(out.join("children.csv")).expect("create children.csv"))
        .expect("write children.csv");
    eprintln!("wrote fixtures to {}", out.display());
}
