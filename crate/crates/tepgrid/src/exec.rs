//! Thread-pool executor for outage sweeps.

use rayon::prelude::*;
use rayon::ThreadPool;
use tepgrid_core::Executor;

/// Runs `map` on a dedicated rayon pool. Output order matches input order
/// regardless of the thread count.
pub struct Parallel {
    pool: ThreadPool,
}

impl Parallel {
    /// `jobs == 0` lets rayon pick the thread count.
    pub fn new(jobs: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        Ok(Parallel { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Parallel {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        self.pool.install(|| items.par_iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u32> = (0..1000).collect();
        let out = Parallel::new(4).unwrap().map(&items, |x| x * 2);
        assert_eq!(out, items.iter().map(|x| x * 2).collect::<Vec<_>>());
    }
}
