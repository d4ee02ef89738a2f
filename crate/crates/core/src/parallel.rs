//! Worker pool sized by the `RSCED_THREADS` environment variable.

use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "RSCED_THREADS";

/// Worker cap from `RSCED_THREADS`; `None` when unset or empty.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Validation {
                path: THREADS_ENV.into(),
                message: format!("expected a positive integer, got {v:?}"),
            }),
        },
        _ => Ok(None),
    }
}

pub fn pool() -> Result<ThreadPool> {
    let mut builder = ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::NumericalFailure(format!("cannot start worker pool: {e}")))
}
