//! Concentration bounds for polynomials and smooth functions under measures
//! satisfying a Poincaré inequality, with Monte Carlo verification.

// `!(x >= a)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod linalg;
pub mod measures;
pub mod numeric;
pub mod poly;
pub mod rmt;
pub mod rng;
pub mod tensor;
pub mod verify;

pub use bounds::{Certificate, CertificateKind, Route};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, Outcome, Table};
pub use measures::{Distribution, MeasureSpec, SampleMatrix, WeightSpec};
pub use poly::{MultilinearSpec, PolyFunction};
pub use tensor::{OpNormMode, OpNormOptions, SymTensor};
pub use verify::{EmpiricalReport, Ledger};
