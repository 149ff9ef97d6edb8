//! Small-q behaviour of λ_q and ‖u_q‖∞ for domains below, at and above unit volume.
use std::f64::consts::PI;
use std::sync::Arc;

use singmin::experiments::{classify_asymptotics, default_q_grid, q_sweep};
use singmin::solver::SolverConfig;
use singmin::{make_domain, normalize_volume, ShapeSpec};

fn main() -> singmin::Result<()> {
    let cfg = SolverConfig::default();
    let grid = default_q_grid();
    let domains = [
        ("r = 1/2", make_domain(&ShapeSpec::disk(0.5, 64.0))?),
        ("|Ω| = 1", normalize_volume(&make_domain(&ShapeSpec::disk(1.0 / PI.sqrt(), 48.0))?)?),
        ("r = 1", make_domain(&ShapeSpec::disk(1.0, 32.0))?),
    ];
    for (name, d) in domains {
        let d = Arc::new(d);
        let recs = q_sweep(&d, 2.0, &grid, &cfg)?;
        let c = classify_asymptotics(&d, 2.0, &recs)?;
        println!(
            "{name:<8} volume {:.4}: λ_q {} (predicted {}), sup {} (predicted {}), match {}",
            c.volume, c.lambda_observed, c.lambda_predicted, c.sup_observed, c.sup_predicted, c.matches
        );
        for r in &recs {
            println!("    q={:<8.5} log λ_q {:>10.4}  log sup {:>10.4}", r.q, r.log_lambda_q, r.log_sup_norm_uq);
        }
    }
    Ok(())
}
