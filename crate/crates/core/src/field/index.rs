use serde::{Deserialize, Serialize};

/// Address of one wavelet coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoeffIndex {
    pub j: u32,
    pub k: Vec<u64>,
    pub l: u32,
}

/// Reduced dyadic form `(J, K)` of `k·2^{-j}` with some odd `K_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrreducibleIndex {
    pub level: u32,
    pub k: Vec<u64>,
    /// `k = 0`: no component is odd at any level; `level = 0` by convention.
    pub origin: bool,
}

/// Strips the common factors of two from `k` at scale `j`.
pub fn irreducible(j: u32, k: &[u64]) -> IrreducibleIndex {
    let shift = k
        .iter()
        .filter(|&&c| c != 0)
        .map(|c| c.trailing_zeros())
        .min();
    match shift {
        None => IrreducibleIndex {
            level: 0,
            k: vec![0; k.len()],
            origin: true,
        },
        Some(v) => IrreducibleIndex {
            level: j - v.min(j),
            k: k.iter().map(|c| c >> v).collect(),
            origin: false,
        },
    }
}

/// Level `J` of [`irreducible`] without building `K`; `None` for `k = 0`.
#[inline]
pub fn irreducible_level(j: u32, k: &[u64]) -> Option<u32> {
    let shift = k
        .iter()
        .filter(|&&c| c != 0)
        .map(|c| c.trailing_zeros())
        .min()?;
    Some(j - shift.min(j))
}

/// Linear position `Σ_i k_i·2^{j·i}`.
#[inline]
pub fn encode_position(j: u32, k: &[u64]) -> u64 {
    k.iter()
        .enumerate()
        .fold(0u64, |acc, (i, &c)| acc | (c << (j as usize * i)))
}

/// Inverse of [`encode_position`].
pub fn decode_position(j: u32, pos: u64, dim: usize) -> Vec<u64> {
    let mask = (1u64 << j) - 1;
    (0..dim).map(|i| (pos >> (j as usize * i)) & mask).collect()
}
