//! Wavelet coefficient calculus for traces of Besov functions on the torus.
//!
//! The crate is organised bottom-up:
//!
//! * [`wavelet`] generates Daubechies filters, runs the cascade, builds the
//!   periodised mother wavelet `G` and certifies that its zeros are simple.
//! * [`field`] holds multiscale coefficient fields, Besov quasinorms and the
//!   BCF1 file format.
//! * [`trace`] restricts a `D`-variate coefficient field to the slice
//!   `x' = a`, keeping the mixed wavelet/scaling representation.
//! * [`probe`] builds the saturating function `g`, its probe family and the
//!   closed-form trace of each probe.
//! * [`regularity`] estimates pointwise Hölder exponents and coarse-grained
//!   singularity spectra from trace coefficients.
//! * [`harness`] wires everything into reproducible experiments.

// `!(x > 0.0)` is used on purpose so NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod harness;
pub mod probe;
pub mod regularity;
pub mod stats;
pub mod trace;
pub mod wavelet;

pub use error::{Error, Result};
