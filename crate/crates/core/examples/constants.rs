//! Closed-form constants for N = 2 and a few values of p.
use singmin::analysis::constants_report;
use singmin::radial::radial_eigen_p;

fn main() -> singmin::Result<()> {
    for p in [1.5, 2.0, 3.0] {
        let lambda_p = radial_eigen_p(2, p, 1e-10)?;
        println!("p = {p}");
        for c in constants_report(2, p, lambda_p, 1.0)? {
            println!("  {:<16} {:>14.8}   {}", c.name, c.value, c.formula);
        }
    }
    Ok(())
}
