use super::{Check, Context, ExperimentResult, Table};
use crate::error::Result;
use crate::probe::HAlpha;
use crate::regularity::{
    classify_dyadic, cone_field, estimate_holder, lacunary_point, SaturatedField,
};

/// Off-grid point for the cone calibration.
const CONE_POINT: f64 = 0.3141;

/// Cone-field calibration of the Hölder estimator and the `H(α)` check on
/// the saturating envelope.
pub fn exp_holder_calibration(ctx: &Context) -> Result<ExperimentResult> {
    let c = &ctx.config;
    let mut out = ExperimentResult::new("holder-calibration");
    let x = vec![CONE_POINT; c.d];
    let mut table = Table::new("cones", &["h0", "h_hat", "residual"]);
    for &h0 in &c.holder_exponents {
        let tf = cone_field(&x, h0, c.j_max)?;
        let est = estimate_holder(&tf, &x, 2.0, 1..=c.j_max)?;
        out.check(Check::at_most(
            format!("|h_hat − {h0}|"),
            (est.h - h0).abs(),
            c.holder_tolerance,
        ));
        table.push(vec![h0, est.h, est.residual]);
    }
    out.tables.push(table);

    let mut table = Table::new("h_alpha", &["alpha", "H_alpha", "h_liminf", "h_slope"]);
    for &alpha in &c.alpha_grid {
        // Rate-1 approximants exist everywhere; 1/3 is a generic non-dyadic point.
        let (x0, depth) = if alpha == 1.0 {
            (1.0 / 3.0, 48)
        } else {
            let (x0, levels) = lacunary_point(alpha, 1, 0.0, 52);
            (x0, levels.last().copied().unwrap_or(2) - 1)
        };
        let x = vec![x0; c.d];
        let witness = classify_dyadic(&x, alpha, depth);
        out.require(
            &format!("x in X^{alpha}"),
            witness.accepted && !witness.dyadic,
        );
        let field = SaturatedField {
            s: c.s,
            p: c.p,
            d: c.d,
            j_max: depth,
        };
        let est = estimate_holder(&field, &x, 2.0, 1..=depth)?;
        let h = HAlpha::new(c.s, c.p, c.d, alpha)?.value();
        out.check(Check::at_most(
            format!("h_liminf at α = {alpha}"),
            est.h_liminf,
            h + c.h_alpha_slack,
        ));
        table.push(vec![alpha, h, est.h_liminf, est.h]);
    }
    out.tables.push(table);
    Ok(out)
}
