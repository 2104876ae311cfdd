//! Strong maximal functions and strong Muckenhoupt weights on discrete grids.
//!
//! * [`grid`]: grids, rectangles, masks, summed-area tables and the slice,
//!   projection and dilation geometry of rectangles.
//! * [`operators`]: exact strong, weighted, directional, composed and cube
//!   maximal transforms and superlevel measures.
//! * [`weights`]: `A_p*` and `A_1*` constants, doubling fits and weight generators.
//! * [`covering`]: greedy sparse rectangle selection, sparseness checks, the
//!   operators `T`, `T*` and the functionals built on them.
//! * [`verify`]: inequality harnesses and reports.
//!
//! The `parallel` feature (on by default) spreads band sweeps, rectangle scans
//! and slice checks over a rayon pool; without it the same code runs sequentially.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod covering;
pub mod error;
pub mod generators;
pub mod grid;
pub mod io;
pub mod operators;
pub mod oracle;
pub mod par;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{Grid, Mask, PrefixSum, Rect};
