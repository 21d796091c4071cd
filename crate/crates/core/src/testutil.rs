//! Shared loaders for the bundled fixtures.

use crate::engine::{Engine, EngineOptions};
use crate::params::ParamSet;
use crate::population::{parse_children, parse_population, PopulationTable};

pub fn params() -> ParamSet {
    ParamSet::from_json_str(include_str!("../data/params.json")).unwrap()
}

pub fn population() -> PopulationTable {
    let bins = parse_population(include_str!("../data/population.csv").as_bytes()).unwrap();
    let children = parse_children(include_str!("../data/children.csv").as_bytes()).unwrap();
    PopulationTable::new(bins, children).unwrap()
}

pub fn engine() -> Engine {
    Engine::new(params(), population(), EngineOptions::default())
}
