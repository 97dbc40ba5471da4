pub mod aggregators;
pub mod cli;
pub mod error;
pub mod io;
pub mod metrics;
pub mod numerics;
pub mod preprocess;
pub mod seed;
pub mod simulator;
pub mod supervised;
pub mod types;
