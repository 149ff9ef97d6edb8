//! The identity and inequality checks behind `singmin verify`.
use singmin::experiments::{verify_identities, VerifyConfig};
use singmin::io::identity_markdown;

fn main() -> singmin::Result<()> {
    let cfg = VerifyConfig { resolution: 32.0, samples: 30, ..VerifyConfig::default() };
    let report = verify_identities(&cfg)?;
    print!("{}", identity_markdown(&report));
    println!("{} checks, {} failed", report.checks.len(), report.failures().count());
    Ok(())
}
