//! `leafkit` command-line driver: configs, pipeline orchestration, caching
//! and figure-data emission on top of `leafkit-core`.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod presets;

pub use cache::SpectrumCache;
pub use commands::{execute, Cli, Command, RunReport};
pub use config::{parse_config, parse_config_str, ExperimentConfig};
pub use error::{CliError, CliResult};
pub use manifest::RunManifest;

pub const THREADS_ENV: &str = "LEAFKIT_THREADS";

/// Sizes the worker pool. Dense kernels stay sequential so that outputs do
/// not depend on the thread count.
pub fn configure_threads(requested: Option<usize>) -> CliResult<usize> {
    let threads = match requested {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => {
                v.trim().parse().map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v:?} is not a thread count")))?
            }
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if threads == 0 {
        return Err(CliError::Usage("thread count must be positive".into()));
    }
    leafkit_core::set_dense_threads(1);
    // Fails only if the pool already exists, which is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(threads)
}
