#![allow(dead_code)]

pub mod tables;

use std::path::PathBuf;

use ctcsim::engine::{Engine, EngineOptions};
use ctcsim::params::{load_params, ParamSet};
use ctcsim::population::{load_children, load_population};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn params() -> ParamSet {
    load_params(data_dir().join("params.json")).unwrap()
}

pub fn engine() -> Engine {
    engine_with(EngineOptions::default())
}

pub fn engine_with(options: EngineOptions) -> Engine {
    let pop = load_population(data_dir().join("population.csv"))
        .unwrap()
        .with_children(load_children(data_dir().join("children.csv")).unwrap())
        .unwrap();
    Engine::new(params(), pop, options)
}

pub const YEARS: std::ops::RangeInclusive<i32> = 2003..=2018;
