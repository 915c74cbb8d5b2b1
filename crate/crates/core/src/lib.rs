//! Full-order integral-terminal sliding mode control (FOITSMC).
//!
//! This crate holds the algorithmic core: the integral-terminal sliding
//! manifold, the equivalent/discontinuous/super-twisting control laws, the
//! adaptive disturbance observer with non-monotone gain adaptation, an
//! adaptive super-twisting baseline, a quaternion rigid-spacecraft model, the
//! augmented-state simulation engine and the trajectory metrics used to check
//! the Lyapunov bounds numerically.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! golden regression live in the `itsmc-sim` companion crate.
//!
//! ```
//! use itsmc_core::manifold::ManifoldSpec;
//!
//! let spec = ManifoldSpec::default();
//! let st = spec.init(&[1.0, -1.0, 0.5]).unwrap();
//! assert_eq!(st.s, 0.0);
//! ```
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod astw;
pub mod controllers;
pub mod engine;
mod error;
pub mod linalg;
pub mod manifold;
pub mod metrics;
pub mod numerics;
pub mod observer;
pub mod plants;
pub mod scenario;
pub mod spacecraft;

pub use error::{Error, Result};
