//! Pointwise regularity from trace coefficients.
//!
//! Everything here reads coefficients through [`TraceCoefficients`], so the
//! estimators run on computed traces and on procedural test fields alike.

mod cone;
mod dyadic;
mod spectrum;
mod synthetic;

pub use cone::{
    cone_leaders, estimate_holder, holder_candidate_test, scaled_distance, ConeLeaders,
    HolderEstimate, HolderMethod, H_CAP,
};
pub use dyadic::{
    a1_membership, classify_dyadic, lacunary_point, A1Membership, DyadicHit, DyadicWitness,
};
pub use spectrum::{
    estimate_spectrum, estimate_spectrum_with, write_spectrum_csv, SpectrumBin, SpectrumEstimate,
    SpectrumOptions,
};
pub use synthetic::{cone_field, cusp_coefficients, SaturatedField};

use crate::field::encode_position;
use crate::trace::TraceField;

/// Point access to `max_l |d_{(j,k,l)}|` over both bands.
pub trait TraceCoefficients: Sync {
    fn d(&self) -> usize;

    fn j_max(&self) -> u32;

    fn magnitude(&self, j: u32, k: &[u64]) -> f64;
}

impl TraceCoefficients for TraceField {
    fn d(&self) -> usize {
        self.d
    }

    fn j_max(&self) -> u32 {
        self.j_max
    }

    fn magnitude(&self, j: u32, k: &[u64]) -> f64 {
        if j == 0 || j > self.j_max {
            return 0.0;
        }
        let base = (encode_position(j, k) as usize) << self.d;
        self.scale(j)[base..base + self.bands()]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}
