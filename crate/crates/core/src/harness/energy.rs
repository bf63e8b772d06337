use super::{Context, ExperimentResult, Table};
use crate::error::Result;
use crate::probe::ProbeField;

/// Per-scale energies `A_j(g)` against `j^{−2/q}`.
pub fn exp_g_energy(ctx: &Context) -> Result<ExperimentResult> {
    let c = &ctx.config;
    let g = ProbeField::new(c.params()?, c.d, c.j_max)?;
    let mut out = ExperimentResult::new("g-energy");
    let mut table = Table::new("energy", &["j", "A_j"]);
    let mut worst: f64 = 0.0;
    for j in 1..=c.j_max {
        let a = g.a_j(j);
        worst = worst.max(a / (j as f64).powf(-2.0 / c.q));
        table.push(vec![j as f64, a]);
    }
    out.check(super::Check::at_most("max A_j·j^{2/q}", worst, 1.0));
    out.tables.push(table);
    Ok(out)
}
