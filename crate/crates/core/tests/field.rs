use besov_trace::field::{
    besov_quasinorm, embedding_check, per_scale_energy, read_field, reconstruct_at,
    synthesize_random_field, write_energy_csv, write_field, BesovParams, CoeffField, CoeffSource,
    Combination,
};
use besov_trace::wavelet::{cascade_evaluate, generate_filter, WaveletSystem};
use proptest::prelude::*;

fn params(s: f64, p: f64, q: f64, dim: usize) -> BesovParams {
    BesovParams::new(s, p, q, dim).unwrap()
}

fn db(n: usize, r: u32) -> WaveletSystem {
    cascade_evaluate(&generate_filter(n).unwrap(), r).unwrap()
}

fn arb_field() -> impl Strategy<Value = CoeffField> {
    (
        1usize..=2,
        prop::collection::vec((1u32..=4, any::<u64>(), 1u32..4, -5.0f64..5.0), 0..30),
    )
        .prop_map(|(dim, raw)| {
            let mut f = CoeffField::new(params(1.5, 1.5, 2.0, dim), 4).unwrap();
            for (j, bits, l, v) in raw {
                let mask = (1u64 << j) - 1;
                let k: Vec<u64> = (0..dim).map(|i| (bits >> (8 * i)) & mask).collect();
                let l = (l & ((1 << dim) - 1)).max(1);
                f.insert(j, &k, l, v).unwrap();
            }
            f
        })
}

#[test]
fn single_coefficient_norm() {
    for (dim, j, c) in [(1usize, 3u32, 0.5f64), (2, 5, -2.0), (3, 2, 1e-3)] {
        let p = params(1.7, 1.3, 2.5, dim);
        let mut f = CoeffField::new(p, 6).unwrap();
        f.insert(j, &vec![1; dim], 1, c).unwrap();
        let expected = ((p.s - dim as f64 / p.p) * j as f64).exp2() * c.abs();
        let got = besov_quasinorm(&f, &p).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected);
    }
}

#[test]
fn empty_field_and_dimension_mismatch() {
    let p = params(2.0, 2.0, 2.0, 2);
    let f = CoeffField::new(p, 4).unwrap();
    assert_eq!(besov_quasinorm(&f, &p).unwrap(), 0.0);
    assert!(per_scale_energy(&f, 2.0, 2.0).iter().all(|&a| a == 0.0));
    assert!(besov_quasinorm(&f, &params(2.0, 2.0, 2.0, 1)).is_err());
}

#[test]
fn random_field_energies_are_summable() {
    let p = params(2.0, 2.0, 2.0, 2);
    let f = synthesize_random_field(p, 12, 11).unwrap();
    let a = per_scale_energy(&f, p.s, p.p);
    for (i, &aj) in a.iter().enumerate() {
        let j = (i + 1) as f64;
        let expected = 3.0 * j.powf(-p.p * (2.0 / p.q + 0.01));
        assert!((aj - expected).abs() <= 1e-12 * expected);
    }
    let norm = besov_quasinorm(&f, &p).unwrap();
    assert!(norm.is_finite() && norm > 0.0);
}

#[test]
fn random_field_is_seed_deterministic() {
    let p = params(1.5, 2.0, 2.0, 2);
    let a = synthesize_random_field(p, 5, 42)
        .unwrap()
        .materialize()
        .unwrap();
    let b = synthesize_random_field(p, 5, 42)
        .unwrap()
        .materialize()
        .unwrap();
    let c = synthesize_random_field(p, 5, 43)
        .unwrap()
        .materialize()
        .unwrap();
    let bytes = |f: &CoeffField| {
        let mut v = Vec::new();
        write_field(&mut v, f).unwrap();
        v
    };
    assert_eq!(bytes(&a), bytes(&b));
    assert_ne!(bytes(&a), bytes(&c));
}

#[test]
fn sign_flip_leaves_norm_unchanged() {
    let p = params(2.5, 1.2, 3.0, 2);
    let f = synthesize_random_field(p, 6, 5).unwrap();
    let g = f.negated();
    assert_eq!(f.coeff(3, &[1, 2], 3), -g.coeff(3, &[1, 2], 3));
    let nf = besov_quasinorm(&f.materialize().unwrap(), &p).unwrap();
    let ng = besov_quasinorm(&g.materialize().unwrap(), &p).unwrap();
    assert!((nf - ng).abs() <= 1e-14 * nf);
}

#[test]
fn embeddings_hold_on_random_fields() {
    for trial in 0..100u64 {
        let s = 1.2 + 0.01 * trial as f64;
        let p_ = 1.0 + 0.02 * (trial % 50) as f64;
        let q = 0.5 + 0.05 * (trial % 30) as f64;
        let dim = 1 + (trial % 2) as usize;
        if s - dim as f64 / p_ <= 0.0 {
            continue;
        }
        let f = synthesize_random_field(params(s, p_, q, dim), 10, trial).unwrap();
        for q_prime in [q * 1.5, f64::INFINITY] {
            let e = embedding_check(&f, s, p_, q, q_prime, 0.1).unwrap();
            assert!(e.holds(), "trial {trial}: {e:?}");
        }
    }
}

#[test]
fn single_coefficient_embedding_norms_agree() {
    let p = params(2.0, 2.0, 1.0, 1);
    let mut f = CoeffField::new(p, 5).unwrap();
    f.insert(3, &[5], 1, 0.25).unwrap();
    let e = embedding_check(&f, 2.0, 2.0, 1.0, 3.0, 0.2).unwrap();
    assert!((e.norm_s_q - e.norm_s_qprime).abs() <= 1e-15 * e.norm_s_q);
}

#[test]
fn energy_csv_format() {
    let mut out = Vec::new();
    write_energy_csv(&mut out, &[0.5, 0.25]).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "j,A_j");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,"));
}

/// Direct periodised evaluation `Σ_n Ψ^l(2^j(x+n) − k)`.
fn periodic_direct(sys: &WaveletSystem, j: u32, l: u32, k: u64, x: f64) -> f64 {
    let s = sys.support_length as i64 + 1;
    (-s..=s)
        .map(|n| sys.eval(l, (1u64 << j) as f64 * (x + n as f64) - k as f64))
        .sum()
}

fn dense_oracle(field: &CoeffField, sys: &WaveletSystem, x: &[f64]) -> f64 {
    field
        .entries()
        .into_iter()
        .map(|(idx, c)| {
            c * (0..x.len())
                .map(|i| periodic_direct(sys, idx.j, (idx.l >> i) & 1, idx.k[i], x[i]))
                .product::<f64>()
        })
        .sum()
}

#[test]
fn reconstruct_single_coefficient_is_tensor_sample() {
    let sys = db(3, 10);
    let mut f = CoeffField::new(params(2.0, 2.0, 2.0, 2), 4).unwrap();
    f.insert(4, &[3, 9], 2, 1.0).unwrap();
    let x = [0.3, 0.6];
    let expected = periodic_direct(&sys, 4, 0, 3, x[0]) * periodic_direct(&sys, 4, 1, 9, x[1]);
    assert!((reconstruct_at(&f, &sys, &x) - expected).abs() < 1e-14);
    let empty = CoeffField::new(params(2.0, 2.0, 2.0, 2), 4).unwrap();
    assert_eq!(reconstruct_at(&empty, &sys, &x), 0.0);
}

#[test]
fn reconstruct_random_field_matches_dense_sum() {
    let sys = db(4, 10);
    let f = synthesize_random_field(params(2.0, 2.0, 2.0, 2), 6, 9)
        .unwrap()
        .materialize()
        .unwrap();
    for (i, x) in [[0.1, 0.9], [0.37, 0.52], [0.0, 0.5], [0.999, 0.0013]]
        .iter()
        .enumerate()
    {
        let fast = reconstruct_at(&f, &sys, x);
        let slow = dense_oracle(&f, &sys, x);
        assert!((fast - slow).abs() <= 1e-8, "point {i}: {fast} vs {slow}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quasinorm_is_homogeneous(f in arb_field(), t in -10.0f64..10.0) {
        let p = f.params;
        let n = besov_quasinorm(&f, &p).unwrap();
        let nt = besov_quasinorm(&f.scaled(t), &p).unwrap();
        prop_assert!((nt - t.abs() * n).abs() <= 1e-10 * (1.0 + t.abs() * n));
    }

    #[test]
    fn quasinorm_nonincreasing_in_q(f in arb_field(), q1 in 0.3f64..5.0, dq in 0.0f64..5.0) {
        let p = f.params;
        let lo = besov_quasinorm(&f, &BesovParams { q: q1, ..p }).unwrap();
        let hi = besov_quasinorm(&f, &BesovParams { q: q1 + dq, ..p }).unwrap();
        let inf = besov_quasinorm(&f, &BesovParams { q: f64::INFINITY, ..p }).unwrap();
        prop_assert!(hi <= lo * (1.0 + 1e-12));
        prop_assert!(inf <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn energy_is_permutation_invariant(f in arb_field(), shift in any::<u64>(), lrot in 0u32..3) {
        let dim = f.params.dim;
        let mut g = CoeffField::new(f.params, 4).unwrap();
        for (idx, v) in f.entries() {
            let mask = (1u64 << idx.j) - 1;
            let k: Vec<u64> = idx.k.iter().rev().map(|c| (c ^ shift) & mask).collect();
            let mut l = idx.l;
            for _ in 0..lrot {
                l = ((l << 1) | (l >> (dim - 1))) & ((1 << dim) - 1);
            }
            // Reversing k also reverses the coordinate order of l.
            let l = (0..dim).fold(0, |acc, i| acc | (((l >> i) & 1) << (dim - 1 - i)));
            g.insert(idx.j, &k, l, v).unwrap();
        }
        let a = per_scale_energy(&f, 1.5, 1.5);
        let b = per_scale_energy(&g, 1.5, 1.5);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x));
        }
    }

    #[test]
    fn serialization_round_trips(f in arb_field()) {
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        let g = read_field(&mut buf.as_slice()).unwrap();
        prop_assert_eq!(&f, &g);
        prop_assert!(f.entries().iter().all(|(_, v)| *v != 0.0));
    }

    #[test]
    fn reconstruct_is_linear(f in arb_field(), g in arb_field(), t in -3.0f64..3.0,
                             x in prop::collection::vec(0.0f64..1.0, 2)) {
        prop_assume!(f.params.dim == g.params.dim);
        let sys = db(3, 8);
        let x = &x[..f.params.dim];
        let combo = Combination::new(vec![(1.0, &f as &dyn CoeffSource), (t, &g)]);
        let lhs = reconstruct_at(&combo, &sys, x);
        let rhs = reconstruct_at(&f, &sys, x) + t * reconstruct_at(&g, &sys, x);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }
}
