//! Three routes to μ: q-sweep extrapolation, direct minimization, singular problem.
use std::sync::Arc;

use singmin::experiments::reconcile_mu;
use singmin::io::mu_markdown;
use singmin::solver::SolverConfig;
use singmin::{make_domain, ShapeSpec};

fn main() -> singmin::Result<()> {
    let d = Arc::new(make_domain(&ShapeSpec::lshape(1.0, 1.0, 0.5, 32.0))?);
    let report = reconcile_mu(&d, 2.0, &SolverConfig::default())?;
    print!("{}", mu_markdown(&report));
    Ok(())
}
