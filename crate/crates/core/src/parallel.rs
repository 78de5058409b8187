//! Replica fan-out.
//!
//! Each replica owns its random stream, so results do not depend on how replicas
//! are scheduled; outputs are always returned in replica order. With the
//! `parallel` feature replicas run on the rayon pool, otherwise (or with
//! [`Execution::Sequential`]) on the calling thread.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// What actually runs: `Parallel` degrades to `Sequential` without the feature.
    pub fn effective(self) -> Execution {
        if cfg!(feature = "parallel") {
            self
        } else {
            Execution::Sequential
        }
    }
}

impl fmt::Display for Execution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.effective() {
            Execution::Sequential => "sequential",
            Execution::Parallel => "parallel",
        })
    }
}

/// `f(0), …, f(replicas − 1)`, in order.
pub fn map_replicas<T, F>(replicas: u64, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..replicas).into_par_iter().map(f).collect()
        }
        _ => (0..replicas).map(f).collect(),
    }
}

/// Like [`map_replicas`], stopping at the first error in replica order.
pub fn try_map_replicas<T, E, F>(replicas: u64, exec: Execution, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    map_replicas(replicas, exec, f).into_iter().collect()
}
