use besov_trace::field::{besov_quasinorm, read_field, BesovParams, CoeffSource};
use besov_trace::probe::{
    choose_j0, probe_trace_closed_form, verify_lower_bound, write_family, HAlpha, ProbeFamily,
    ProbeField, ProbeManifest,
};
use besov_trace::regularity::{a1_membership, classify_dyadic, lacunary_point};
use besov_trace::stats::compensated_sum;
use besov_trace::trace::trace_scale;
use besov_trace::wavelet::{
    build_g, cascade_evaluate, generate_filter, PeriodizedG, WaveletSystem,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn db(n: usize, r: u32) -> WaveletSystem {
    cascade_evaluate(&generate_filter(n).unwrap(), r).unwrap()
}

fn default_params() -> BesovParams {
    BesovParams::new(2.0, 2.0, 2.0, 2).unwrap()
}

/// Brute force over every `(k, k', l, l')` at scale `j`, compensated summation.
fn brute_force_a_j(g: &dyn CoeffSource, s: f64, p: f64, j: u32) -> f64 {
    let dim = g.dim();
    let terms = (0..1u64 << (j as usize * dim)).flat_map(|pos| {
        let k: Vec<u64> = (0..dim)
            .map(|i| (pos >> (j as usize * i)) & ((1 << j) - 1))
            .collect();
        (1..1u32 << dim).map(move |l| g.coeff(j, &k, l).abs().powf(p))
    });
    (j as f64 * (s * p - dim as f64)).exp2() * compensated_sum(terms)
}

#[test]
fn energy_matches_enumeration_and_bound() {
    let p = default_params();
    let g = ProbeField::new(p, 1, 9).unwrap();
    for j in 1..=9 {
        let brute = brute_force_a_j(&g, p.s, p.p, j);
        let closed = g.a_j(j);
        assert!(
            (brute - closed).abs() <= 1e-12 * closed,
            "j={j}: {brute} vs {closed}"
        );
        assert!(closed <= (j as f64).powf(-2.0 / p.q));
    }
}

#[test]
fn higher_trace_dimension_exceeds_the_bound() {
    // (2^d − 1)^2/2^d = 9/4 for d = 2: the bound fails by that constant.
    let p = BesovParams::new(2.0, 2.0, 2.0, 3).unwrap();
    let g = ProbeField::new(p, 2, 5).unwrap();
    for j in 1..=5 {
        let ratio = g.a_j(j) / (j as f64).powf(-1.0);
        assert!((ratio - 2.25).abs() < 1e-12, "j={j}: {ratio}");
        assert!((brute_force_a_j(&g, p.s, p.p, j) - g.a_j(j)).abs() <= 1e-12 * g.a_j(j));
    }
}

#[test]
fn members_are_disjoint_and_cover_placements() {
    let fam = ProbeFamily::new(default_params(), 1, 2, 7).unwrap();
    for j in 1..=7u32 {
        let mut owners = std::collections::HashMap::new();
        let mut total = 0usize;
        for i in 0..fam.size() {
            fam.member(i).for_each_nonzero(j, &mut |k, l, _| {
                total += 1;
                assert!(owners.insert((k.to_vec(), l), i).is_none(), "index shared");
            });
        }
        let mut g_count = 0usize;
        if j > fam.j0 {
            fam.g
                .for_each_nonzero(j - fam.j0, &mut |_, _, _| g_count += 1);
        }
        // Each cube of g has d₁ placements, and k' ranges over 2^{J₀} times more slices.
        assert_eq!(total, (g_count * fam.size()) << fam.j0);
    }
}

#[test]
fn member_energies_shift_g() {
    let fam = ProbeFamily::new(default_params(), 1, 2, 10).unwrap();
    for j in 3..=10u32 {
        let sum: f64 = (0..fam.size())
            .map(|i| fam.member(i).energy_at_scale(j, 2.0))
            .sum();
        let expected =
            fam.size() as f64 * (fam.j0 as f64).exp2() * fam.g.energy_at_scale(j - 2, 2.0);
        assert!((sum - expected).abs() <= 1e-12 * expected);
    }
    for i in 0..fam.size() {
        let n = besov_quasinorm(&fam.member(i), &default_params()).unwrap();
        assert!(n.is_finite() && n > 0.0);
    }
}

#[test]
fn closed_form_matches_generic_trace() {
    let sys = db(8, 12);
    let g = build_g(&sys, 1).unwrap();
    let fam = ProbeFamily::new(default_params(), 1, 2, 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let i = rng.random_range(0..fam.size());
        let j = rng.random_range(3..=12u32);
        let a = [rng.random::<f64>()];
        let generic = trace_scale(&fam.member(i), &sys, &a, 1, j).unwrap();
        let k = rng.random_range(0..1u64 << j);
        let closed = probe_trace_closed_form(&fam, i, j, &[k], &a, &g);
        worst = worst.max((generic[(k as usize) << 1 | 1] - closed).abs());
        assert_eq!(generic[(k as usize) << 1], 0.0, "scaling band must vanish");
        for other in 0..fam.size() {
            if other != fam.member_of(&[k]) {
                assert_eq!(probe_trace_closed_form(&fam, other, j, &[k], &a, &g), 0.0);
            }
        }
    }
    assert!(worst <= 1e-10, "{worst:e}");
}

#[test]
fn zero_of_g_kills_the_coefficient() {
    let n = 256;
    let sine: Vec<f64> = (0..n)
        .map(|m| (std::f64::consts::TAU * m as f64 / n as f64).sin())
        .collect();
    let dsine: Vec<f64> = (0..n)
        .map(|m| std::f64::consts::TAU * (std::f64::consts::TAU * m as f64 / n as f64).cos())
        .collect();
    let g = PeriodizedG::from_samples(sine, dsine, 1).unwrap();
    let fam = ProbeFamily::new(default_params(), 1, 1, 6).unwrap();
    assert!(fam.coefficient(0, 4, &[2]) != 0.0);
    assert_eq!(probe_trace_closed_form(&fam, 0, 4, &[2], &[0.0], &g), 0.0);
}

#[test]
fn lower_bound_on_a_lacunary_point() {
    let sys = db(8, 12);
    let g = build_g(&sys, 1).unwrap();
    let p = default_params();
    let alpha = 2.0;
    let h = HAlpha::new(p.s, p.p, 1, alpha).unwrap();
    let j0 = choose_j0(1, h.value() + 0.3, h).unwrap();
    assert_eq!(j0, 2);
    let fam = ProbeFamily::new(p, 1, j0, 14).unwrap();
    let (x, levels) = lacunary_point(alpha, 1, 0.0, 48);
    let witness = classify_dyadic(&[x], alpha, levels.last().unwrap() - 1);
    assert!(witness.accepted && !witness.dyadic);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (a, m) = (0..200)
        .map(|_| {
            let a = [rng.random::<f64>()];
            let m = a1_membership(&g, &a, 3..=14);
            (a, m)
        })
        .find(|(_, m)| m.accepted && m.j_a.unwrap() <= 6)
        .expect("some offset is in A1 early");
    let report = verify_lower_bound(&fam, &g, &a, &m, &witness).unwrap();
    assert!(report.all_in_cone);
    assert!(report.constant > 0.0);
    assert!(report.rows.iter().all(|r| r.coefficient != 0.0));
}

#[test]
fn family_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let fam = ProbeFamily::new(default_params(), 1, 1, 5).unwrap();
    let manifest = write_family(dir.path(), &fam).unwrap();
    assert_eq!(manifest.d1, 2);
    let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let back: ProbeManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(back, manifest);
    let field =
        read_field(&mut std::fs::File::open(dir.path().join("probe_1.bcf")).unwrap()).unwrap();
    assert_eq!(
        field.coeff(3, &[3, 5], 0b11),
        fam.member(1).coeff(3, &[3, 5], 0b11)
    );
    assert!(field.coeff(3, &[3, 5], 0b11) != 0.0);
}
