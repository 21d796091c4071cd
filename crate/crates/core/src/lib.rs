pub mod classifier;
pub mod cli;
pub mod counterfactual;
pub mod engine;
pub mod money;
pub mod output;
pub mod params;
pub mod population;
pub mod stats;
pub mod taxmath;

#[cfg(test)]
pub(crate) mod testutil;
