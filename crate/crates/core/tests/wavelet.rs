use besov_trace::wavelet::{
    build_g, cascade_evaluate, check_hypothesis_hn, generate_filter, HnVerdict, WaveletSystem,
};
use besov_trace::Error;

fn system(n: usize, r: u32) -> WaveletSystem {
    cascade_evaluate(&generate_filter(n).unwrap(), r).unwrap()
}

#[test]
fn db2_refinement_residual_at_r12() {
    let w = system(2, 12);
    assert!(w.refinement_residual() <= 1e-8);
}

#[test]
fn cascade_residual_decreases_over_final_iterations() {
    for n in [2, 4, 8] {
        let w = system(n, 12);
        let res = &w.cascade_residuals;
        assert!(res.len() >= 6, "N={n}");
        let tail = &res[res.len() - 6..];
        assert!(tail.windows(2).all(|p| p[1] < p[0]), "N={n}: {tail:?}");
        assert!(*res.last().unwrap() <= 1e-8);
    }
}

#[test]
fn db8_vanishing_moments() {
    let w = system(8, 12);
    for n in 0..8 {
        assert!(w.moment(n).abs() <= 1e-6, "n={n}: {:e}", w.moment(n));
    }
    // Daubechies-8 has exactly eight vanishing moments.
    assert!(w.moment(8).abs() > 1.0);
}

#[test]
fn samples_vanish_outside_support() {
    let w = system(4, 8);
    assert_eq!(w.phi_at(-0.01), 0.0);
    assert_eq!(w.psi_at(7.0), 0.0);
    assert_eq!(*w.phi.last().unwrap(), 0.0);
    assert!(w.phi[0].abs() < 1e-12);
}

#[test]
fn g_has_zero_mean() {
    for n in [2, 4, 8] {
        let g = build_g(&system(n, 12), 1).unwrap();
        assert!(g.mean().abs() <= 1e-8, "N={n}: {}", g.mean());
    }
}

#[test]
fn g_is_consistent_across_resolutions() {
    let coarse = build_g(&system(8, 11), 1).unwrap();
    let fine = build_g(&system(8, 12), 1).unwrap();
    for m in 0..coarse.len() {
        assert!((coarse.g[m] - fine.g[2 * m]).abs() < 1e-10);
    }
}

#[test]
fn hn_holds_for_db8_and_is_monotone_in_resolution() {
    let mut last_count = None;
    for r in [12, 13, 14] {
        let g = build_g(&system(8, r), 1).unwrap();
        let rep = check_hypothesis_hn(&g, 1e-3).unwrap();
        assert_eq!(rep.verdict, HnVerdict::Holds, "r={r}");
        assert!(rep.margin > 0.0);
        if let Some(c) = last_count {
            assert_eq!(rep.zero_count, c);
        }
        last_count = Some(rep.zero_count);
    }
}

#[test]
fn haar_is_rejected() {
    let g = build_g(&system(1, 10), 1).unwrap();
    assert!(matches!(
        check_hypothesis_hn(&g, 1e-3),
        Err(Error::UnsupportedWavelet(_))
    ));
}
