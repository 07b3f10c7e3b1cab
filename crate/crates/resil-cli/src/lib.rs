//! Command-line front end of `resil-core`: compilation loading, noise presets, report
//! formats and the reproduction checks behind `resil repro`.

pub mod analyze;
pub mod compare;
pub mod criteria;
pub mod error;
pub mod input;
pub mod output;
pub mod repro;
pub mod sweep;

pub use error::{CliError, CliResult};

/// Runs `f` on a dedicated rayon pool of `workers` threads (the global pool when `None`).
/// Results never depend on the worker count: parallel maps are order-preserving and every
/// random stream is keyed by (seed, sample index).
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> CliResult<R> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(CliError::input("--workers must be at least 1")),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| CliError::input(format!("cannot start {k} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
