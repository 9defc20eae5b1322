//! Dense symmetric tensors (symmetric multilinear forms on R^n).
//!
//! A [`SymTensor`] of order `d` stores one value per non-decreasing index
//! tuple; the full `n^d` array is implied by symmetry. Every lookup sorts
//! its index, so `T[i, j, k] == T[k, i, j]` holds by construction.

mod index;
mod opnorm;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use index::{canonical_count, permutation_count, IndexTable};
pub use opnorm::{certified_op_norm, iterative_op_norm, op_norm_auto, OpNormMode, OpNormOptions};

#[derive(Clone, Debug)]
pub struct SymTensor {
    order: usize,
    dim: usize,
    entries: Vec<f64>,
    table: Arc<IndexTable>,
}

impl PartialEq for SymTensor {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.dim == other.dim && self.entries == other.entries
    }
}

impl SymTensor {
    pub fn zeros(dim: usize, order: usize) -> Result<Self> {
        if dim == 0 || order == 0 {
            return Err(Error::InvalidInput(format!(
                "tensor needs positive dim and order, got dim = {dim}, order = {order}"
            )));
        }
        let table = index::table(dim, order);
        Ok(Self {
            order,
            dim,
            entries: vec![0.0; table.len()],
            table,
        })
    }

    /// Builds a tensor by evaluating `f` on every canonical (sorted) index.
    pub fn from_fn(dim: usize, order: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let mut t = Self::zeros(dim, order)?;
        let table = t.table.clone();
        for (slot, idx) in t.entries.iter_mut().zip(table.tuples()) {
            *slot = f(idx);
        }
        Ok(t)
    }

    /// Builds a tensor from `(index, value)` pairs. Indices may be given in
    /// any order; a later pair for the same symmetric slot overwrites.
    pub fn from_entries<'a>(
        dim: usize,
        order: usize,
        entries: impl IntoIterator<Item = (&'a [usize], f64)>,
    ) -> Result<Self> {
        let mut t = Self::zeros(dim, order)?;
        for (idx, value) in entries {
            t.set(idx, value)?;
        }
        Ok(t)
    }

    /// Symmetrizes a full row-major `n^d` array by averaging over index
    /// permutations.
    pub fn from_full_symmetrized(dim: usize, order: usize, full: &[f64]) -> Result<Self> {
        let expected = dim.pow(order as u32);
        if full.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: full.len(),
            });
        }
        let mut t = Self::zeros(dim, order)?;
        let mut sums = vec![0.0; t.entries.len()];
        let mut idx = vec![0usize; order];
        let mut sorted = vec![0usize; order];
        for &value in full {
            sorted.copy_from_slice(&idx);
            sorted.sort_unstable();
            sums[index::rank(dim, &sorted)] += value;
            odometer(&mut idx, dim);
        }
        for (k, slot) in t.entries.iter_mut().enumerate() {
            *slot = sums[k] / t.table.multiplicity[k];
        }
        Ok(t)
    }

    /// Symmetric matrix as an order-2 tensor; the upper triangle is used.
    pub fn from_matrix(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: rows.len(),
            });
        }
        Self::from_fn(dim, 2, |ij| rows[ij[0] * dim + ij[1]])
    }

    /// `v ⊗ v ⊗ ... ⊗ v` (`order` factors).
    pub fn rank_one(v: &[f64], order: usize) -> Result<Self> {
        Self::from_fn(v.len(), order, |idx| idx.iter().map(|&i| v[i]).product())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Canonical entries in lexicographic order of sorted indices.
    pub fn canonical_entries(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.table.tuples().zip(self.entries.iter().copied())
    }

    pub fn multiplicities(&self) -> &[f64] {
        &self.table.multiplicity
    }

    fn slot(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.order {
            return Err(Error::ArityMismatch {
                order: self.order,
                got: idx.len(),
            });
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.dim) {
            return Err(Error::InvalidInput(format!(
                "index {bad} out of range for dim {}",
                self.dim
            )));
        }
        let mut sorted = idx.to_vec();
        sorted.sort_unstable();
        Ok(index::rank(self.dim, &sorted))
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.entries[self.slot(idx)?])
    }

    pub fn set(&mut self, idx: &[usize], value: f64) -> Result<()> {
        let k = self.slot(idx)?;
        self.entries[k] = value;
        Ok(())
    }

    /// The multilinear form `T[v_1, ..., v_d]`.
    pub fn contract(&self, vectors: &[&[f64]]) -> Result<f64> {
        if vectors.len() != self.order {
            return Err(Error::ArityMismatch {
                order: self.order,
                got: vectors.len(),
            });
        }
        for v in vectors {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: v.len(),
                });
            }
        }
        let mut idx = vec![0usize; self.order];
        let mut sorted = vec![0usize; self.order];
        let total = self.dim.pow(self.order as u32);
        let mut acc = 0.0;
        for _ in 0..total {
            let weight: f64 = idx.iter().zip(vectors).map(|(&i, v)| v[i]).product();
            if weight != 0.0 {
                sorted.copy_from_slice(&idx);
                sorted.sort_unstable();
                acc += self.entries[index::rank(self.dim, &sorted)] * weight;
            }
            odometer(&mut idx, self.dim);
        }
        Ok(acc)
    }

    /// `T[v, ..., v]`. `v` must have length `dim`.
    pub fn form(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.dim);
        self.canonical_entries()
            .zip(self.table.multiplicity.iter())
            .map(|((idx, t), &m)| {
                if t == 0.0 {
                    0.0
                } else {
                    t * m * idx.iter().map(|&i| v[i]).product::<f64>()
                }
            })
            .sum()
    }

    /// The vector `T[v, ..., v, ·]` (one free slot), i.e. `∇ form(v) / d`.
    pub fn partial_form(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        let d = self.order as f64;
        let mut out = vec![0.0; self.dim];
        for ((idx, t), &m) in self.canonical_entries().zip(self.table.multiplicity.iter()) {
            if t == 0.0 {
                continue;
            }
            let mut q = 0;
            while q < idx.len() {
                let i = idx[q];
                let run = idx[q..].iter().take_while(|&&j| j == i).count();
                let rest: f64 = idx
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != q)
                    .map(|(_, &j)| v[j])
                    .product();
                out[i] += t * m * (run as f64 / d) * rest;
                q += run;
            }
        }
        out
    }

    /// Euclidean norm of the implied `n^d` array.
    pub fn hs_norm(&self) -> f64 {
        self.entries
            .iter()
            .zip(self.table.multiplicity.iter())
            .map(|(t, m)| m * t * t)
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc: f64, t| acc.max(t.abs()))
    }

    /// `sup_{|v| = 1} |T[v, ..., v]|`.
    pub fn op_norm(&self, mode: OpNormMode) -> Result<f64> {
        match mode {
            OpNormMode::Iterative => Ok(iterative_op_norm(self, &OpNormOptions::default())),
            OpNormMode::Certified => certified_op_norm(self),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut t = self.clone();
        for x in &mut t.entries {
            *x *= c;
        }
        t
    }

    /// Entrywise `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.order != other.order || self.dim != other.dim {
            return Err(Error::InvalidInput(
                "tensors of different shape cannot be combined".into(),
            ));
        }
        let mut t = self.clone();
        for (x, y) in t.entries.iter_mut().zip(&other.entries) {
            *x = a * *x + b * y;
        }
        Ok(t)
    }

    /// Row-major dense matrix for order-2 tensors.
    pub fn to_matrix(&self) -> Option<Vec<f64>> {
        if self.order != 2 {
            return None;
        }
        let n = self.dim;
        let mut m = vec![0.0; n * n];
        for (idx, t) in self.canonical_entries() {
            m[idx[0] * n + idx[1]] = t;
            m[idx[1] * n + idx[0]] = t;
        }
        Some(m)
    }

    pub fn to_json_value(&self) -> TensorJson {
        TensorJson {
            order: self.order,
            dim: self.dim,
            entries: self
                .canonical_entries()
                .filter(|(_, v)| *v != 0.0)
                .map(|(idx, value)| EntryJson {
                    index: idx.to_vec(),
                    value,
                })
                .collect(),
        }
    }

    pub fn from_json_value(json: &TensorJson) -> Result<Self> {
        let mut t = Self::zeros(json.dim, json.order)?;
        for entry in &json.entries {
            if entry.index.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::InvalidInput(format!(
                    "tensor index {:?} is not non-decreasing",
                    entry.index
                )));
            }
            t.set(&entry.index, entry.value)?;
        }
        Ok(t)
    }
}

/// Fixture format: `{order, dim, entries: [{index: [i1..id], value}]}` with
/// non-decreasing index tuples.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TensorJson {
    pub order: usize,
    pub dim: usize,
    pub entries: Vec<EntryJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EntryJson {
    pub index: Vec<usize>,
    pub value: f64,
}

impl Serialize for SymTensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymTensor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = TensorJson::deserialize(d)?;
        Self::from_json_value(&json).map_err(serde::de::Error::custom)
    }
}

fn odometer(idx: &mut [usize], dim: usize) {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < dim {
            return;
        }
        *slot = 0;
    }
}
