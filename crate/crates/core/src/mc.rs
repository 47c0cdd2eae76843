//! Chunked Monte Carlo engine.
//!
//! Sample `i` lives in chunk `i / CHUNK`, and chunk `c` draws from substream `c`
//! of the caller's seed. Chunks run in parallel and reduce in index order, so
//! results do not depend on the worker count.

use rayon::prelude::*;

use crate::rng::{LabRng, SeedSpec};
use crate::stats::{McEstimate, DEFAULT_CONFIDENCE};

pub const CHUNK: u64 = 4096;

fn chunks(budget: u64) -> Vec<(u64, u64)> {
    let k = budget.div_ceil(CHUNK);
    (0..k).map(|c| (c, CHUNK.min(budget - c * CHUNK))).collect()
}

/// Folds per-chunk accumulators, then merges them in chunk order.
pub fn mc_fold<A, I, S, M>(seed: &SeedSpec, budget: u64, init: I, step: S, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut LabRng, &mut A) + Sync,
    M: Fn(&mut A, A),
{
    let parts: Vec<A> = chunks(budget)
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = seed.rng(c);
            let mut acc = init();
            for _ in 0..len {
                step(&mut rng, &mut acc);
            }
            acc
        })
        .collect();
    let mut it = parts.into_iter();
    let mut out = it.next().unwrap_or_else(&init);
    for p in it {
        merge(&mut out, p);
    }
    out
}

/// Number of samples for which `event` holds. `scratch` is created once per chunk.
pub fn mc_count<T, I, F>(seed: &SeedSpec, budget: u64, scratch: I, event: F) -> u64
where
    I: Fn() -> T + Sync,
    F: Fn(&mut LabRng, &mut T) -> bool + Sync,
{
    chunks(budget)
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = seed.rng(c);
            let mut s = scratch();
            (0..len).filter(|_| event(&mut rng, &mut s)).count() as u64
        })
        .collect::<Vec<u64>>()
        .into_iter()
        .sum()
}

/// All sample values, in sample order.
pub fn mc_collect<T, I, S, F>(seed: &SeedSpec, budget: u64, scratch: I, draw: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync,
    F: Fn(&mut LabRng, &mut S) -> T + Sync,
{
    chunks(budget)
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = seed.rng(c);
            let mut s = scratch();
            (0..len).map(|_| draw(&mut rng, &mut s)).collect::<Vec<T>>()
        })
        .collect::<Vec<Vec<T>>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Probability estimate with a Clopper–Pearson interval at the default confidence.
pub fn mc_probability<T, I, F>(seed: &SeedSpec, budget: u64, scratch: I, event: F) -> McEstimate
where
    I: Fn() -> T + Sync,
    F: Fn(&mut LabRng, &mut T) -> bool + Sync,
{
    let k = mc_count(seed, budget, scratch, event);
    McEstimate::binomial(k, budget, Some(seed.clone()), DEFAULT_CONFIDENCE)
}

/// Mean of a `[0, range]`-valued statistic with an empirical-Bernstein interval.
pub fn mc_bounded_mean<T, I, F>(seed: &SeedSpec, budget: u64, range: f64, scratch: I, value: F) -> McEstimate
where
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut LabRng, &mut T) -> f64 + Sync,
{
    let (s, s2, _) = mc_fold(
        seed,
        budget,
        || (0.0f64, 0.0f64, scratch()),
        |rng, acc| {
            let x = value(rng, &mut acc.2);
            acc.0 += x;
            acc.1 += x * x;
        },
        |a, b| {
            a.0 += b.0;
            a.1 += b.1;
        },
    );
    McEstimate::bounded_mean(s, s2, budget, range, Some(seed.clone()), DEFAULT_CONFIDENCE)
}

/// Runs `f` on a dedicated pool with `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
