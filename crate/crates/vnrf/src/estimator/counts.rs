//! Overlapping pattern counts over the security region.

use crate::lattice::{key_at, punctured_offsets, Alphabet, Configuration, PatternKey, SecurityRegion};
use crate::{Result, Sym};
use rayon::prelude::*;
use std::collections::HashMap;

/// Counts for one outer pattern: how often it occurs, split by the symbol
/// observed at the center.
#[derive(Clone, Debug, Default)]
pub struct Counts {
    pub total: u64,
    pub per_symbol: Vec<u64>,
}

/// Occurrence counts of all punctured-ball patterns of one radius,
/// accumulated over every site of the security region (overlapping).
#[derive(Clone, Debug)]
pub struct CountTable {
    pub d: usize,
    pub radius: usize,
    pub alphabet: Alphabet,
    /// Number of region sites the counts were accumulated over.
    pub region_len: usize,
    pub map: HashMap<PatternKey, Counts>,
}

impl CountTable {
    pub fn count(&self, key: &PatternKey) -> u64 {
        self.map.get(key).map_or(0, |c| c.total)
    }

    pub fn count_with_symbol(&self, key: &PatternKey, a: Sym) -> u64 {
        self.map.get(key).map_or(0, |c| c.per_symbol[a as usize])
    }

    /// Empirical conditional probability of symbol `a` at the center given
    /// the outer pattern; exactly zero when the pattern never occurs.
    pub fn conditional(&self, key: &PatternKey, a: Sym) -> f64 {
        match self.map.get(key) {
            None => 0.0,
            Some(c) if c.total == 0 => 0.0,
            Some(c) => c.per_symbol[a as usize] as f64 / c.total as f64,
        }
    }

    /// Full empirical conditional law at the center given the pattern.
    pub fn conditional_law(&self, key: &PatternKey) -> Vec<f64> {
        (0..self.alphabet.size()).map(|a| self.conditional(key, a as Sym)).collect()
    }

    /// Keys in deterministic (sorted) order, for reproducible iteration.
    pub fn sorted_keys(&self) -> Vec<PatternKey> {
        let mut keys: Vec<PatternKey> = self.map.keys().cloned().collect();
        keys.sort_unstable();
        keys
    }
}

/// Counts every punctured-ball pattern of the given radius across the
/// region. Patterns are read through the boundary rule; a free-boundary
/// region guarantees readability by its margin, which must be at least the
/// radius.
pub fn count_patterns(
    config: &Configuration,
    region: &SecurityRegion,
    radius: usize,
) -> Result<CountTable> {
    let d = config.window().d();
    let offsets = punctured_offsets(d, radius);
    let alphabet = config.alphabet();
    let chunks = region.site_chunks(rayon::current_num_threads().max(1) * 4);
    let partials: Vec<Result<HashMap<PatternKey, Counts>>> = chunks
        .par_iter()
        .map(|chunk| {
            let mut local: HashMap<PatternKey, Counts> = HashMap::new();
            for &site in chunk {
                let key = key_at(config, site, &offsets, &alphabet)?;
                let entry = local.entry(key).or_insert_with(|| Counts {
                    total: 0,
                    per_symbol: vec![0; alphabet.size()],
                });
                entry.total += 1;
                entry.per_symbol[config.get(site) as usize] += 1;
            }
            Ok(local)
        })
        .collect();
    // Merge in chunk order; sums commute, so the content is deterministic.
    let mut map: HashMap<PatternKey, Counts> = HashMap::new();
    for partial in partials {
        for (k, v) in partial? {
            let entry = map.entry(k).or_insert_with(|| Counts {
                total: 0,
                per_symbol: vec![0; alphabet.size()],
            });
            entry.total += v.total;
            for (a, b) in entry.per_symbol.iter_mut().zip(&v.per_symbol) {
                *a += b;
            }
        }
    }
    Ok(CountTable { d, radius, alphabet, region_len: region.len(), map })
}
