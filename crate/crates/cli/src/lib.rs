//! Configuration, workflows and output formats of the `tsagg` command.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{analyze, asymptotic, compare, simulate, sweep, Engine, Table};
pub use config::{Format, Regime, RunConfig, SweepAxis, SweepSpec};
pub use error::{CliError, Result};
pub use output::{ProbeOutput, ResultRow};

use tsagg_core::simulator::Variant;

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub variant: Option<Variant>,
    pub sweep: Option<SweepSpec>,
    pub out: Option<std::path::PathBuf>,
    pub format: Option<Format>,
}

impl Overrides {
    pub fn apply(self, config: &mut RunConfig) {
        let sim = &mut config.simulation;
        sim.trials = self.trials.unwrap_or(sim.trials);
        sim.master_seed = self.seed.unwrap_or(sim.master_seed);
        sim.threads = self.threads.or(sim.threads);
        sim.variant = self.variant.unwrap_or(sim.variant);
        config.sweep = self.sweep.or(config.sweep.take());
        config.output.path = self.out.or(config.output.path.take());
        config.output.format = self.format.unwrap_or(config.output.format);
    }
}
