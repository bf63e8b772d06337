use rand::Rng;

use super::{Check, Context, Experiment, ExperimentResult, Table};
use crate::error::{Error, Result};
use crate::probe::{choose_j0, verify_lower_bound, HAlpha, ProbeFamily};
use crate::regularity::{a1_membership, classify_dyadic, lacunary_point, DyadicWitness};

struct Triple {
    a: Vec<f64>,
    witness: DyadicWitness,
}

/// Lower bound on the probe traces in the cone above rate-α points.
pub fn exp_lower_bound(ctx: &Context) -> Result<ExperimentResult> {
    let c = &ctx.config;
    let params = c.params()?;
    let mut rng = ctx.rng(Experiment::LowerBound);
    let mut out = ExperimentResult::new("lower-bound");
    let gap = c.gamma_gaps[0];

    // Rejection sampling over lacunary points: start level, dyadic offset
    // below it, and the membership test at the deepest scale f64 resolves.
    let mut triples = Vec::new();
    let mut drawn = 0usize;
    for t in 0..c.lower_bound_triples {
        let alpha = c.lower_bound_alphas[t % c.lower_bound_alphas.len()];
        let witness = (0..1000)
            .map(|_| {
                drawn += 1;
                let m_start = rng.random_range(1..=3u32);
                let (_, levels) = lacunary_point(alpha, m_start, 0.0, 52);
                let depth = levels.last().copied().unwrap_or(2) - 1;
                let x: Vec<f64> = (0..c.d)
                    .map(|_| {
                        let denom = 1u64 << (m_start - 1);
                        let offset = rng.random_range(0..denom) as f64 / denom as f64;
                        lacunary_point(alpha, m_start, offset, 52).0
                    })
                    .collect();
                classify_dyadic(&x, alpha, depth)
            })
            .find(|w| w.accepted && !w.dyadic)
            .ok_or_else(|| {
                Error::InsufficientData(format!("no lacunary point passed at α = {alpha}"))
            })?;
        let (a, _) = ctx.best_offset(&mut rng, c.spectrum_candidates);
        if !a1_membership(&ctx.g, &a, 3..=c.j_max).accepted {
            return Err(Error::InsufficientData(
                "no offset passed the A1 test".into(),
            ));
        }
        triples.push(Triple { a, witness });
    }
    out.value("points_drawn", drawn);

    let mut table = Table::new("constants", &["j_max", "constant", "rows"]);
    let mut constants = Vec::new();
    let mut all_in_cone = true;
    for &jm in &c.lower_bound_j_max {
        let mut constant = f64::INFINITY;
        let mut rows = 0usize;
        for t in &triples {
            let alpha = t.witness.alpha;
            let h = HAlpha::new(c.s, c.p, c.d, alpha)?;
            let j0 = choose_j0(c.d, h.value() + gap, h)?;
            let family = ProbeFamily::new(params, c.d, j0, jm)?;
            let m = a1_membership(&ctx.g, &t.a, 3..=jm);
            match verify_lower_bound(&family, &ctx.g, &t.a, &m, &t.witness) {
                Ok(r) => {
                    all_in_cone &= r.all_in_cone;
                    constant = constant.min(r.constant);
                    rows += r.rows.len();
                }
                // No witness level lands in [j_a, jm] for this triple.
                Err(Error::InsufficientData(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if rows == 0 {
            constant = 0.0;
        }
        table.push(vec![jm as f64, constant, rows as f64]);
        constants.push(constant);
    }
    out.tables.push(table);
    out.require("all tested subcubes in the cone", all_in_cone);
    let lo = constants.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = constants.iter().copied().fold(0.0, f64::max);
    out.check(Check::at_least("min constant", lo, f64::MIN_POSITIVE));
    out.check(Check::at_most(
        "constant spread across j_max",
        if lo > 0.0 { hi / lo } else { f64::INFINITY },
        c.lower_bound_stability,
    ));
    out.value("constants", &constants);
    Ok(out)
}
