use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use dashmap::DashMap;
use smallvec::SmallVec;

use super::WeightEnumerator;

/// Memo key: block length plus the exact prefix bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CacheKey {
    n: u32,
    len: u32,
    words: SmallVec<[u64; 4]>,
}

impl CacheKey {
    pub fn new(n: usize, bits: &[u8]) -> Self {
        let mut words: SmallVec<[u64; 4]> = SmallVec::from_elem(0, bits.len().div_ceil(64));
        for (i, &b) in bits.iter().enumerate() {
            words[i / 64] |= (b as u64) << (i % 64);
        }
        CacheKey {
            n: n as u32,
            len: bits.len() as u32,
            words,
        }
    }

    pub fn code_length(&self) -> usize {
        self.n as usize
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len as usize)
            .map(|i| ((self.words[i / 64] >> (i % 64)) & 1) as u8)
            .collect()
    }
}

/// Concurrent memo table for coset enumerators.
///
/// An optional limit on the total number of stored coefficients turns further
/// inserts into no-ops once reached; lookups keep working. Values stored under
/// a key never change, so concurrent inserts of the same key are harmless.
#[derive(Debug, Default)]
pub struct WefCache {
    map: DashMap<CacheKey, Arc<WeightEnumerator>>,
    limit: Option<usize>,
    stored: AtomicUsize,
}

impl WefCache {
    pub fn new() -> Self {
        WefCache::default()
    }

    /// Cache that stops growing after `max_coeffs` coefficients are stored.
    pub fn with_limit(max_coeffs: usize) -> Self {
        WefCache {
            limit: Some(max_coeffs),
            ..WefCache::default()
        }
    }

    pub fn limit(&self) -> Option<usize> {
        self.limit
    }

    pub fn get(&self, key: &CacheKey) -> Option<Arc<WeightEnumerator>> {
        self.map.get(key).map(|v| Arc::clone(v.value()))
    }

    pub fn insert(&self, key: CacheKey, value: Arc<WeightEnumerator>) {
        let size = value.max_degree() + 1;
        if let Some(limit) = self.limit {
            if self.stored.load(Ordering::Relaxed) + size > limit {
                return;
            }
        }
        if self.map.insert(key, value).is_none() {
            self.stored.fetch_add(size, Ordering::Relaxed);
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn clear(&self) {
        self.map.clear();
        self.stored.store(0, Ordering::Relaxed);
    }

    /// Snapshot of all entries, sorted by key for stable output.
    pub fn entries(&self) -> Vec<(CacheKey, Arc<WeightEnumerator>)> {
        let mut out: Vec<_> = self
            .map
            .iter()
            .map(|e| (e.key().clone(), Arc::clone(e.value())))
            .collect();
        out.sort_by(|a, b| {
            (a.0.n, a.0.len, &a.0.words[..]).cmp(&(b.0.n, b.0.len, &b.0.words[..]))
        });
        out
    }
}
