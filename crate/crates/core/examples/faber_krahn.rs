//! λ_q of non-round domains against the disk of equal area.
use std::sync::Arc;

use singmin::experiments::faber_krahn_check;
use singmin::solver::SolverConfig;
use singmin::{make_domain, ShapeSpec};

fn main() -> singmin::Result<()> {
    let cfg = SolverConfig::default();
    let shapes = [
        ("square", ShapeSpec::square(1.0, 48.0)),
        ("rect 3x1", ShapeSpec::rect(3.0, 1.0, 32.0)),
        ("L-shape", ShapeSpec::lshape(1.0, 1.0, 0.5, 48.0)),
    ];
    for (name, spec) in shapes {
        let d = Arc::new(make_domain(&spec)?);
        for q in [0.25, 0.5, 1.0] {
            let fk = faber_krahn_check(&d, 2.0, q, &cfg)?;
            println!(
                "{name:<9} q={q:<4}: domain {:.5}, ball {:.5}, gap {:+.2}%",
                fk.lambda_domain,
                fk.lambda_ball,
                100.0 * fk.gap
            );
        }
    }
    Ok(())
}
