//! The singular problem −Δ_p u = λ/u by fixed-point iteration, with its brackets.
use std::sync::Arc;

use singmin::field_ops::sup_norm;
use singmin::solver::{mu_from_singular, solve_singular, SolverConfig};
use singmin::{make_domain, ShapeSpec};

fn main() -> singmin::Result<()> {
    let d = Arc::new(make_domain(&ShapeSpec::square(1.0, 48.0))?);
    for lam in [0.5, 1.0, 4.0] {
        let s = solve_singular(&d, 2.0, lam, &SolverConfig::default())?;
        println!(
            "λ={lam}: {} iterations, sup {:.5}, μ {:.5}, lower c {:.3e} ok={}, upper {:.4} ok={}",
            s.iterations,
            sup_norm(&s.field),
            mu_from_singular(&s.field, lam, 2.0, d.volume)?,
            s.lower_coefficient,
            s.lower_ok,
            s.upper_bound,
            s.upper_ok
        );
    }
    Ok(())
}
