use std::collections::HashSet;

use rand::Rng;

use super::{Digraph, MultiDigraphSeq};
use crate::error::{domain, Result};
use crate::rng::rng_from_seed;

/// Maps `key in [0, n(n-1))` to the ordered pair it indexes.
fn pair_of(key: u64, n: u64) -> (u32, u32) {
    let t = key / (n - 1);
    let r = key % (n - 1);
    let h = if r >= t { r + 1 } else { r };
    (t as u32, h as u32)
}

/// Draws `count` distinct keys from `[0, total)` by rejection, keeping the
/// order in which they were first drawn.
fn distinct_keys<R: Rng>(rng: &mut R, total: u64, count: usize) -> (Vec<u64>, HashSet<u64>) {
    let mut seen = HashSet::with_capacity(count);
    let mut keys = Vec::with_capacity(count);
    while keys.len() < count {
        let k = rng.random_range(0..total);
        if seen.insert(k) {
            keys.push(k);
        }
    }
    (keys, seen)
}

/// A digraph drawn uniformly from all simple digraphs on `n` labelled
/// vertices with exactly `m` arcs.
pub fn sample_digraph(n: usize, m: usize, seed: u64) -> Result<Digraph> {
    let total = (n as u64) * (n as u64).saturating_sub(1);
    if m as u64 > total {
        return Err(domain(format!("m = {m} exceeds n(n-1) = {total}")));
    }
    if n > u32::MAX as usize {
        return Err(domain("too many vertices"));
    }
    let mut rng = rng_from_seed(seed);
    let nn = n as u64;
    let arcs = if 2 * m as u64 <= total {
        let (keys, _) = distinct_keys(&mut rng, total, m);
        keys.into_iter().map(|k| pair_of(k, nn)).collect()
    } else {
        let (_, excluded) = distinct_keys(&mut rng, total, (total - m as u64) as usize);
        (0..total).filter(|k| !excluded.contains(k)).map(|k| pair_of(k, nn)).collect()
    };
    Ok(Digraph::from_arcs_unchecked(n, arcs))
}

/// `2m` labels drawn independently and uniformly from `[0, n)`.
pub fn sample_sequence_model(n: usize, m: usize, seed: u64) -> Result<MultiDigraphSeq> {
    if n == 0 {
        return Err(domain("sequence model needs n >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    let x = (0..2 * m).map(|_| rng.random_range(0..n as u32)).collect();
    MultiDigraphSeq::new(n, x)
}
