//! Inputs shared by the benchmarks.

use hoc_core::SymTensor;

/// Dense deterministic symmetric tensor with entries of order one.
pub fn dense_tensor(dim: usize, order: usize) -> SymTensor {
    SymTensor::from_fn(dim, order, |idx| {
        let s: usize = idx.iter().enumerate().map(|(k, i)| (k + 1) * (i + 1)).sum();
        (s as f64).sin()
    })
    .expect("valid shape")
}
