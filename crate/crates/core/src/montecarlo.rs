//! Seeded Monte-Carlo harness for size and power experiments.
//!
//! Replication `i` draws from its own generator seeded with
//! `base_seed + i`, so rates are reproducible and independent of the
//! execution backend.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::exec::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarlo {
    pub replications: usize,
    pub base_seed: u64,
    pub execution: Execution,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub hits: usize,
    pub replications: usize,
    pub rate: f64,
    /// Binomial standard error of `rate`.
    pub std_error: f64,
}

impl RateEstimate {
    fn from_hits(hits: usize, replications: usize) -> Self {
        let rate = hits as f64 / replications as f64;
        Self {
            hits,
            replications,
            rate,
            std_error: (rate * (1.0 - rate) / replications as f64).sqrt(),
        }
    }
}

impl MonteCarlo {
    pub fn new(replications: usize, base_seed: u64) -> Self {
        Self {
            replications,
            base_seed,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn rng(&self, replication: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.base_seed.wrapping_add(replication as u64))
    }

    /// Runs `f` once per replication, results in replication order.
    pub fn run<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut ChaCha8Rng, usize) -> T + Sync + Send,
    {
        exec::map_indexed(self.execution, self.replications, |i| {
            let mut rng = self.rng(i);
            f(&mut rng, i)
        })
    }

    /// Fraction of replications for which `event` returns `true`.
    /// The first error (by replication index) aborts the experiment.
    pub fn rate<F>(&self, event: F) -> Result<RateEstimate>
    where
        F: Fn(&mut ChaCha8Rng) -> Result<bool> + Sync + Send,
    {
        let outcomes = self.run(|rng, _| event(rng));
        let mut hits = 0;
        for o in outcomes {
            hits += usize::from(o?);
        }
        Ok(RateEstimate::from_hits(hits, self.replications))
    }
}
