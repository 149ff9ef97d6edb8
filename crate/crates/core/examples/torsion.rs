//! Torsion functions on the unit disk against the closed form.
use std::sync::Arc;

use singmin::analysis::ball_torsion;
use singmin::field_ops::sup_norm;
use singmin::solver::{solve_torsion, SolverConfig};
use singmin::{make_domain, ShapeSpec};

fn main() -> singmin::Result<()> {
    let cfg = SolverConfig::default();
    for p in [1.5, 2.0, 3.0] {
        let exact = ball_torsion(2, p, 1.0, 0.0)?;
        let mut prev = None;
        for res in [16.0, 32.0, 64.0] {
            let d = Arc::new(make_domain(&ShapeSpec::disk(1.0, res))?);
            let s = sup_norm(&solve_torsion(&d, p, &cfg)?);
            let extra = prev.map(|c: f64| format!(", extrapolated {:.6}", 2.0 * s - c)).unwrap_or_default();
            println!("p={p} h=1/{res}: centre {s:.6} (exact {exact:.6}{extra})");
            prev = Some(s);
        }
    }
    Ok(())
}
