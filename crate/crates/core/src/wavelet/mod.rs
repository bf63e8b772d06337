//! Compactly supported orthogonal wavelets and the periodised function `G`.

mod filter;
mod hn;
mod io;
mod periodized;
mod system;

pub use filter::{generate_filter, orthonormality_residual};
pub use hn::{check_hypothesis_hn, HnReport, HnVerdict, ZeroBracket};
pub use io::{read_system, write_system};
pub use periodized::{build_g, PeriodizedG};
pub use system::{cascade_evaluate, DerivativeMethod, WaveletSystem};

/// Tolerance on orthonormality residuals accepted by [`cascade_evaluate`].
pub const FILTER_TOLERANCE: f64 = 1e-10;
