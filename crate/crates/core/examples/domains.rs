//! Build each domain shape and print its mesh statistics.
use singmin::{make_domain, normalize_volume, ShapeSpec};

fn main() -> singmin::Result<()> {
    let specs = [
        ("disk r=1", ShapeSpec::disk(1.0, 32.0)),
        ("rect 2x1", ShapeSpec::rect(2.0, 1.0, 32.0)),
        ("unit square", ShapeSpec::square(1.0, 32.0)),
        ("L-shape", ShapeSpec::lshape(1.0, 1.0, 0.5, 32.0)),
    ];
    println!("{:<12} {:>6} {:>9} {:>10} {:>10}", "shape", "nodes", "interior", "volume", "exact");
    for (name, spec) in &specs {
        let d = make_domain(spec)?;
        let exact = match name {
            n if n.starts_with("disk") => std::f64::consts::PI,
            n if n.starts_with("rect") => 2.0,
            n if n.starts_with("unit") => 1.0,
            _ => 0.75,
        };
        println!("{name:<12} {:>6} {:>9} {:>10.6} {:>10.6}", d.n_nodes(), d.n_interior(), d.volume, exact);
    }
    // the lattice disk is an inscribed polygon; rescaling fixes its volume exactly
    let unit = normalize_volume(&make_domain(&ShapeSpec::disk(1.0 / std::f64::consts::PI.sqrt(), 32.0))?)?;
    println!("normalized disk volume {:.15}", unit.volume);
    Ok(())
}
