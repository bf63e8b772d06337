use super::source::CoeffSource;
use crate::wavelet::WaveletSystem;

/// `Σ_λ c_λ Ψ_λ(x)` over the truncated field, `Ψ_λ` periodised on the torus.
///
/// Per scale, each coordinate touches at most `support_length` positions, so
/// the cost is `j_max·(support·2)^dim` coefficient lookups.
pub fn reconstruct_at(field: &dyn CoeffSource, system: &WaveletSystem, point: &[f64]) -> f64 {
    let dim = field.dim();
    assert_eq!(point.len(), dim, "point dimension must match the field");
    let mut total = 0.0;
    for j in 1..=field.j_max() {
        let weights: Vec<_> = point
            .iter()
            .map(|&x| system.periodized_weights(j, x))
            .collect();
        if weights.iter().any(|w| w.is_empty()) {
            continue;
        }
        let mut idx = vec![0usize; dim];
        let mut k = vec![0u64; dim];
        loop {
            for i in 0..dim {
                k[i] = weights[i][idx[i]].0;
            }
            for l in 1..(1u32 << dim) {
                let c = field.coeff(j, &k, l);
                if c != 0.0 {
                    let w: f64 = (0..dim)
                        .map(|i| weights[i][idx[i]].1[((l >> i) & 1) as usize])
                        .product();
                    total += c * w;
                }
            }
            // Odometer over the per-coordinate weight lists.
            let mut i = 0;
            while i < dim {
                idx[i] += 1;
                if idx[i] < weights[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == dim {
                break;
            }
        }
    }
    total
}
