//! Canonical (non-decreasing) multi-index tables.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::numeric::{binomial, factorial};

/// All non-decreasing index tuples of a given order over `0..dim`, in
/// lexicographic order, with their permutation counts.
#[derive(Debug)]
pub struct IndexTable {
    pub dim: usize,
    pub order: usize,
    /// Flattened tuples, `order` entries each.
    pub indices: Vec<usize>,
    /// Number of distinct permutations of each tuple, `d! / prod m_j!`.
    pub multiplicity: Vec<f64>,
}

impl IndexTable {
    fn build(dim: usize, order: usize) -> Self {
        let count = canonical_count(dim, order);
        let mut indices = Vec::with_capacity(count * order);
        let mut multiplicity = Vec::with_capacity(count);
        let mut current = vec![0usize; order];
        if dim > 0 {
            loop {
                indices.extend_from_slice(&current);
                multiplicity.push(permutation_count(&current));
                // advance to the next non-decreasing tuple
                let mut pos = order;
                while pos > 0 && current[pos - 1] == dim - 1 {
                    pos -= 1;
                }
                if pos == 0 {
                    break;
                }
                let next = current[pos - 1] + 1;
                for slot in current[pos - 1..].iter_mut() {
                    *slot = next;
                }
            }
        }
        Self {
            dim,
            order,
            indices,
            multiplicity,
        }
    }

    pub fn len(&self) -> usize {
        self.multiplicity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multiplicity.is_empty()
    }

    pub fn tuple(&self, k: usize) -> &[usize] {
        &self.indices[k * self.order..(k + 1) * self.order]
    }

    pub fn tuples(&self) -> impl Iterator<Item = &[usize]> {
        self.indices.chunks_exact(self.order.max(1)).take(self.len())
    }

    /// Owned copies of every canonical tuple for `(dim, order)`.
    pub fn clone_tuples(dim: usize, order: usize) -> Vec<Vec<usize>> {
        table(dim, order).tuples().map(<[usize]>::to_vec).collect()
    }
}

type TableCache = Mutex<HashMap<(usize, usize), Arc<IndexTable>>>;

/// Shared table for `(dim, order)`; built once per process.
pub fn table(dim: usize, order: usize) -> Arc<IndexTable> {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry((dim, order))
        .or_insert_with(|| Arc::new(IndexTable::build(dim, order)))
        .clone()
}

/// Number of non-decreasing tuples of length `order` over `dim` values.
pub fn canonical_count(dim: usize, order: usize) -> usize {
    if dim == 0 {
        return usize::from(order == 0);
    }
    binomial((dim + order - 1) as u64, order as u64) as usize
}

/// `d! / prod_j m_j!` for a sorted tuple.
pub fn permutation_count(sorted: &[usize]) -> f64 {
    let mut denom = 1.0;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            denom *= factorial(run);
            run = 1;
        }
    }
    denom *= factorial(run);
    factorial(sorted.len() as u64) / denom
}

/// Position of a sorted tuple in the lexicographic enumeration.
pub fn rank(dim: usize, sorted: &[usize]) -> usize {
    let order = sorted.len();
    let mut r = 0;
    let mut lo = 0;
    for (k, &i) in sorted.iter().enumerate() {
        let rest = order - k - 1;
        for v in lo..i {
            r += canonical_count(dim - v, rest);
        }
        lo = i;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_sizes_and_multiplicities() {
        for dim in 1..=5 {
            for order in 1..=4 {
                let t = table(dim, order);
                assert_eq!(t.len(), canonical_count(dim, order));
                let total: f64 = t.multiplicity.iter().sum();
                assert_eq!(total, (dim as f64).powi(order as i32));
            }
        }
    }

    #[test]
    fn rank_matches_enumeration() {
        let t = table(4, 3);
        for (k, tuple) in t.tuples().enumerate() {
            assert_eq!(rank(4, tuple), k);
        }
    }

    #[test]
    fn permutation_counts() {
        assert_eq!(permutation_count(&[0, 1, 2]), 6.0);
        assert_eq!(permutation_count(&[0, 0, 1]), 3.0);
        assert_eq!(permutation_count(&[2, 2, 2, 2]), 1.0);
        assert_eq!(permutation_count(&[0, 0, 1, 1]), 6.0);
    }
}
