use besov_trace::field::{
    synthesize_random_field, BesovParams, CoeffField, CoeffSource, Combination,
};
use besov_trace::trace::{
    consistency_with, mixed_besov_norm, pointwise_consistency, read_trace, trace, trace_scale,
    wavelet_band_norm, write_trace,
};
use besov_trace::wavelet::{build_g, cascade_evaluate, generate_filter, WaveletSystem};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn db(n: usize, r: u32) -> WaveletSystem {
    cascade_evaluate(&generate_filter(n).unwrap(), r).unwrap()
}

fn params(dim: usize) -> BesovParams {
    BesovParams::new(2.0, 2.0, 2.0, dim).unwrap()
}

#[test]
fn random_field_identity_at_fifty_points() {
    let sys = db(8, 12);
    let f = synthesize_random_field(params(2), 12, 2024).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let a = [rng.random::<f64>()];
        let x = [rng.random::<f64>()];
        worst = worst.max(pointwise_consistency(&f, &sys, &a, &x).unwrap());
    }
    assert!(worst <= 1e-8, "worst residual {worst:e}");
}

#[test]
fn single_coefficient_identity() {
    let sys = db(4, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..20 {
        let mut f = CoeffField::new(params(3), 6).unwrap();
        let j = rng.random_range(1..=6);
        let k: Vec<u64> = (0..3).map(|_| rng.random_range(0..1u64 << j)).collect();
        f.insert(j, &k, rng.random_range(1..8), 1.0).unwrap();
        let d = 1 + trial % 2;
        let a: Vec<f64> = (0..3 - d).map(|_| rng.random()).collect();
        let x: Vec<f64> = (0..d).map(|_| rng.random()).collect();
        let r = pointwise_consistency(&f, &sys, &a, &x).unwrap();
        assert!(r <= 1e-10, "{r:e}");
    }
}

#[test]
fn zero_field_traces_to_zero() {
    let sys = db(3, 9);
    let f = CoeffField::new(params(2), 5).unwrap();
    let tf = trace(&f, &sys, &[0.3], 1).unwrap();
    let mut any = false;
    tf.for_each_nonzero(|_, _, _, _| any = true);
    assert!(!any);
    assert_eq!(consistency_with(&tf, &f, &sys, &[0.7]), 0.0);
}

#[test]
fn dyadic_offsets_use_grid_samples() {
    let sys = db(4, 10);
    let f = synthesize_random_field(params(2), 8, 5).unwrap();
    for a in [0.0, 0.5, 0.125, 0.9921875] {
        let r = pointwise_consistency(&f, &sys, &[a], &[0.41]).unwrap();
        assert!(r <= 1e-10, "a = {a}: {r:e}");
    }
}

#[test]
fn support_locality() {
    // Coefficients with |2^j a − k'| beyond the support do not reach the trace.
    let sys = db(3, 9);
    let j = 6;
    let a = 0.25;
    let mut f = CoeffField::new(params(2), j).unwrap();
    let far = ((a * 64.0) as u64 + 32) % 64;
    f.insert(j, &[10, far], 0b11, 1.0).unwrap();
    let tf = trace(&f, &sys, &[a], 1).unwrap();
    assert_eq!(tf.get(j, &[10], 1), 0.0);
    let near = (a * 64.0) as u64 - 1;
    f.insert(j, &[10, near], 0b11, 1.0).unwrap();
    let tf = trace(&f, &sys, &[a], 1).unwrap();
    assert!(tf.get(j, &[10], 1) != 0.0);
}

#[test]
fn constant_slices_factor_through_g() {
    // c = u(j,k,l) on l' = 1^{d'} for every k' gives d_λ(a) = u·G_{d'}(2^j a).
    let sys = db(4, 10);
    let g = build_g(&sys, 2).unwrap();
    let mut f = CoeffField::new(params(3), 4).unwrap();
    let u = |j: u32, k: u64| 1.0 + j as f64 + 0.1 * k as f64;
    for j in 1..=4u32 {
        for k in 0..1u64 << j {
            for k1 in 0..1u64 << j {
                for k2 in 0..1u64 << j {
                    f.insert(j, &[k, k1, k2], 0b111, u(j, k)).unwrap();
                }
            }
        }
    }
    let a = [0.3, 0.77];
    let tf = trace(&f, &sys, &a, 1).unwrap();
    for j in 1..=4u32 {
        for k in 0..1u64 << j {
            let expected = u(j, k) * g.eval_tensor_at_scale(j, &a);
            assert!(
                (tf.get(j, &[k], 1) - expected).abs() <= 1e-12,
                "j={j} k={k}"
            );
            assert_eq!(tf.get(j, &[k], 0), 0.0);
        }
    }
}

#[test]
fn mixed_norm_stable_in_depth() {
    let sys = db(8, 12);
    let p = params(2);
    let f = synthesize_random_field(p, 14, 77).unwrap();
    let eps = 0.2;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..3 {
        let a = [rng.random::<f64>()];
        let tf = trace(&f, &sys, &a, 1).unwrap();
        let n10 = mixed_besov_norm(&tf.truncated(10), p.s - eps, p.p, p.q);
        let n14 = mixed_besov_norm(&tf, p.s - eps, p.p, p.q);
        assert!(n10.is_finite() && n10 > 0.0);
        assert!(n14 / n10 <= 1.05, "growth {}", n14 / n10);
        assert!(n14 >= wavelet_band_norm(&tf, p.s - eps, p.p, p.q));
    }
}

#[test]
fn wavelet_band_norm_equals_field_formula() {
    let mut tf = besov_trace::trace::TraceField::zeros(1, 6, vec![0.1]).unwrap();
    let mut field = CoeffField::new(BesovParams::new(1.5, 1.5, 3.0, 1).unwrap(), 6).unwrap();
    for (j, k, v) in [(2u32, 1u64, 0.5), (5, 17, -0.03), (6, 60, 0.01)] {
        tf.set(j, &[k], 1, v).unwrap();
        field.insert(j, &[k], 1, v).unwrap();
    }
    let a = wavelet_band_norm(&tf, 1.5, 1.5, 3.0);
    let b = besov_trace::field::besov_quasinorm(&field, &field.params).unwrap();
    assert!((a - b).abs() <= 1e-14 * b);
}

#[test]
fn trace_file_round_trip() {
    let sys = db(3, 9);
    let f = synthesize_random_field(params(2), 6, 1).unwrap();
    let tf = trace(&f, &sys, &[0.6], 1).unwrap();
    let mut buf = Vec::new();
    write_trace(&mut buf, &tf).unwrap();
    assert_eq!(read_trace(&mut buf.as_slice()).unwrap(), tf);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_is_linear(seed_a in any::<u64>(), seed_b in any::<u64>(), t in -4.0f64..4.0,
                       a in 0.0f64..1.0, j in 1u32..=6) {
        let sys = db(3, 8);
        let f = synthesize_random_field(params(2), 6, seed_a).unwrap();
        let g = synthesize_random_field(params(2), 6, seed_b).unwrap();
        let sum = Combination::new(vec![(1.0, &f as &dyn CoeffSource), (t, &g)]);
        let lhs = trace_scale(&sum, &sys, &[a], 1, j).unwrap();
        let tf = trace_scale(&f, &sys, &[a], 1, j).unwrap();
        let tg = trace_scale(&g, &sys, &[a], 1, j).unwrap();
        for ((l, x), y) in lhs.iter().zip(&tf).zip(&tg) {
            prop_assert!((l - (x + t * y)).abs() <= 1e-12);
        }
    }
}
