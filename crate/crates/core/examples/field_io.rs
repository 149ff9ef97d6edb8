//! Write a minimizer as CSV and SVG, then read the CSV back.
use std::sync::Arc;

use singmin::io::{read_field_csv, write_field_csv, write_field_svg};
use singmin::solver::{minimize_lambda_q, SolverConfig};
use singmin::{make_domain, ShapeSpec};

fn main() -> singmin::Result<()> {
    let d = Arc::new(make_domain(&ShapeSpec::lshape(1.0, 1.0, 0.5, 48.0))?);
    let u = minimize_lambda_q(&d, 2.0, 0.5, &SolverConfig::default())?.field;
    let dir = std::env::temp_dir().join("singmin-field-io");
    std::fs::create_dir_all(&dir)?;
    let (csv, svg) = (dir.join("u.csv"), dir.join("u.svg"));
    write_field_csv(&u, &csv)?;
    write_field_svg(&u, "λ_q minimizer, q = 1/2", &svg)?;
    let back = read_field_csv(&csv)?;
    println!("wrote {} and {}", csv.display(), svg.display());
    println!("round trip exact: {}", back.values == u.values);
    Ok(())
}
