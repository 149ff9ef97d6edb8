//! λ_q on the unit disk against the radial shooting solver.
use std::sync::Arc;

use singmin::experiments::richardson;
use singmin::radial::radial_lambda_q;
use singmin::solver::{minimize_lambda_q, SolverConfig};
use singmin::{make_domain, ShapeSpec};

fn main() -> singmin::Result<()> {
    let cfg = SolverConfig::default();
    let (p, q) = (2.0, 0.5);
    let mut vals = Vec::new();
    for res in [16.0, 32.0, 64.0] {
        let d = Arc::new(make_domain(&ShapeSpec::disk(1.0, res))?);
        let r = minimize_lambda_q(&d, p, q, &cfg)?;
        let lam = r.log_lambda_q.unwrap().exp();
        println!("h=1/{res}: λ_q = {lam:.6}, {} iterations, {}/{} restarts agree", r.iterations, r.restarts_agreeing, r.restarts.len());
        vals.push(lam);
    }
    let rich = richardson(vals[0], vals[1], vals[2]);
    let radial = radial_lambda_q(2, p, q, 1e-10)?.derived.lambda;
    println!("extrapolated {:.6} (observed order {:.2}), radial {radial:.6}", rich.value, rich.observed_order);
    Ok(())
}
