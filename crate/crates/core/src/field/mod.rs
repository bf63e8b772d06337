//! Multiscale coefficient fields on the torus and Besov quasinorms.
//!
//! A coefficient is addressed by scale `j ≥ 1`, position `k ∈ {0..2^j−1}^dim`
//! and type bitmask `l ∈ {0,1}^dim` (bit `i` selects `Ψ¹` in coordinate
//! `i`). Fields are exposed through the [`CoeffSource`] trait so that large
//! procedural fields (random, probe) never need to be materialised.

mod besov;
mod index;
pub(crate) mod io;
mod random;
mod reconstruct;
mod source;
mod stored;

pub use besov::{
    besov_quasinorm, embedding_check, per_scale_energy, quasinorm_from_energies, BesovParams,
    EmbeddingCheck,
};
pub use index::{
    decode_position, encode_position, irreducible, irreducible_level, CoeffIndex, IrreducibleIndex,
};
pub use io::{read_field, write_energy_csv, write_field};
pub use random::{synthesize_random_field, RandomField, DEFAULT_DELTA};
pub use reconstruct::reconstruct_at;
pub use source::{CoeffSource, Combination};
pub use stored::{CoeffField, MAX_MATERIALIZED};
