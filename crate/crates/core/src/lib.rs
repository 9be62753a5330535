//! Adaptive affinity matrix metric learning.
//!
//! The crate learns a low-rank, signed affinity matrix jointly with a linear
//! projection using only spectral decompositions, and derives a Mahalanobis
//! metric from the projection. It also carries the k-means evaluation protocol
//! used to score learned metrics.
//!
//! Everything here is `no_std` and needs only `alloc`; file formats, timing and
//! the command line live in the companion `adaam` crate.
//!
//! ```
//! use adaam_core::{adaam::{adaam_fit, AdaamConfig}, DenseMatrix};
//!
//! let x = DenseMatrix::from_fn(12, 3, |i, j| ((i / 6) * 10) as f64 + ((i * 7 + j * 3) % 5) as f64 * 0.1);
//! let model = adaam_fit(&x, &AdaamConfig::new(2)).unwrap();
//! assert_eq!(model.projection.matrix.shape(), (3, 2));
//! ```
#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod adaam;
pub mod error;
pub mod eval;
pub mod graph;
pub mod linalg;
pub mod lpp;
pub mod matrix;

pub use error::{Error, Result, Warning};
pub use matrix::DenseMatrix;
