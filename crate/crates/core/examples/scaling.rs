//! How μ(tΩ) scales with the volume of tΩ.
use std::sync::Arc;

use singmin::experiments::scaling_exponent_fit;
use singmin::solver::SolverConfig;
use singmin::{make_domain, ShapeSpec};

fn main() -> singmin::Result<()> {
    let d = Arc::new(make_domain(&ShapeSpec::square(1.0, 24.0))?);
    for p in [1.5, 2.0, 3.0] {
        let fit = scaling_exponent_fit(&d, p, &[0.5, 1.0, 2.0], &SolverConfig::default())?;
        println!("p={p}: fitted slope {:.6}, 1−p/N = {:.4}, 1−N/p = {:.4}", fit.slope, fit.exponent_implemented, fit.exponent_swapped);
        for (v, mu) in &fit.points {
            println!("    |tΩ| = {v:.4}  μ = {mu:.6}");
        }
    }
    Ok(())
}
