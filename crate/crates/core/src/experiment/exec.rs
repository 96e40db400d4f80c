//! Trial-level parallelism. Results always come back in trial order, so the
//! output of a battery does not depend on how it was scheduled.

use serde::{Deserialize, Serialize};

use crate::rng::mix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Execution {
    Sequential,
    /// `jobs = 0` lets the thread pool pick its own size.
    Parallel { jobs: usize },
}

impl Execution {
    /// `jobs <= 1` means sequential.
    pub fn from_jobs(jobs: usize) -> Self {
        if jobs <= 1 {
            Self::Sequential
        } else {
            Self::Parallel { jobs }
        }
    }
}

/// Runs `f(index, seed)` for every trial, with per-trial seeds derived from
/// `seed`, and collects the results by index.
pub fn run_trials<T, F>(trials: u64, seed: u64, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => sequential(trials, seed, f),
        Execution::Parallel { jobs } => parallel(trials, seed, jobs, f),
    }
}

fn sequential<T, F: Fn(u64, u64) -> T>(trials: u64, seed: u64, f: F) -> Vec<T> {
    (0..trials).map(|i| f(i, mix64(seed, i))).collect()
}

#[cfg(feature = "parallel")]
fn parallel<T, F>(trials: u64, seed: u64, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(p) => p,
        Err(e) => {
            log::warn!("could not build a {jobs}-thread pool ({e}); running sequentially");
            return sequential(trials, seed, f);
        }
    };
    pool.install(|| (0..trials).into_par_iter().map(|i| f(i, mix64(seed, i))).collect())
}

#[cfg(not(feature = "parallel"))]
fn parallel<T, F>(trials: u64, seed: u64, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync + Send,
{
    log::debug!("built without the `parallel` feature; ignoring jobs = {jobs}");
    sequential(trials, seed, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_seeds_do_not_depend_on_scheduling() {
        let f = |i: u64, s: u64| (i, s.wrapping_mul(3));
        let a = run_trials(1000, 42, Execution::Sequential, f);
        let b = run_trials(1000, 42, Execution::Parallel { jobs: 4 }, f);
        assert_eq!(a, b);
        assert_eq!(a[17].0, 17);
    }

    #[test]
    fn jobs_mapping() {
        assert_eq!(Execution::from_jobs(0), Execution::Sequential);
        assert_eq!(Execution::from_jobs(1), Execution::Sequential);
        assert_eq!(Execution::from_jobs(8), Execution::Parallel { jobs: 8 });
    }
}
