//! μ(Ω) by direct minimization of the log quotient.
use std::sync::Arc;

use singmin::analysis::mu_lower_bound;
use singmin::field_ops::log_mean;
use singmin::radial::radial_singular;
use singmin::solver::{minimize_mu, SolverConfig};
use singmin::{make_domain, ShapeSpec};

fn main() -> singmin::Result<()> {
    let cfg = SolverConfig::default();
    for (name, spec) in [("unit disk", ShapeSpec::disk(1.0, 48.0)), ("unit square", ShapeSpec::square(1.0, 48.0))] {
        let d = Arc::new(make_domain(&spec)?);
        let r = minimize_mu(&d, 2.0, &cfg)?;
        println!(
            "{name}: μ = {:.5}, log-mean of minimizer {:.1e}, lower bound {:.5}",
            r.objective,
            log_mean(&r.field).log_value,
            mu_lower_bound(2, 2.0, d.volume)?
        );
    }
    let radial = radial_singular(2, 2.0, 1.0, 1e-10)?;
    println!("radial μ(B1) = {:.8}", radial.derived.mu.unwrap());
    Ok(())
}
