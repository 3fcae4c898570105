//! Thread-pool drivers for the embarrassingly parallel experiments.

use rayon::prelude::*;

use critsense_core::domain::Domain;
use critsense_core::error::CritError;
use critsense_core::gallery::GalleryEntry;
use critsense_core::rand_field::{aggregate, run_trial, MonteCarloSpec, MonteCarloTable};
use critsense_core::sequence::{assemble_report, limit_row, sequence_row, SequenceOptions, SequenceReport};

/// Worker count from `CRITSENSE_THREADS`, if set to a positive integer.
pub fn env_threads() -> Option<usize> {
    std::env::var("CRITSENSE_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
}

fn pool(threads: Option<usize>) -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads.or_else(env_threads) {
        b = b.num_threads(n);
    }
    b.build().expect("thread pool")
}

/// Monte Carlo trials on a pool; the table does not depend on the thread count.
pub fn monte_carlo(spec: &MonteCarloSpec, threads: Option<usize>) -> MonteCarloTable {
    assert!(spec.trials >= 1, "need at least one trial");
    let records = pool(threads).install(|| (0..spec.trials).into_par_iter().map(|t| run_trial(spec, t)).collect());
    aggregate(spec, records)
}

/// Convergence report with the family members analysed concurrently.
pub fn convergence(
    entry: &GalleryEntry,
    n_list: &[u32],
    domain: &Domain,
    opts: &SequenceOptions,
    threads: Option<usize>,
) -> Result<SequenceReport, CritError> {
    pool(threads).install(|| {
        let limit = limit_row(entry, domain, opts)?;
        let rows = n_list
            .par_iter()
            .map(|&n| sequence_row(entry, n, domain, &limit, opts))
            .collect();
        Ok(assemble_report(entry, domain, limit, rows, opts))
    })
}
