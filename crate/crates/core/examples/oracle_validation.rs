//! Every analytical layer against its Monte Carlo counterpart for one
//! configuration. Pass a trial count as the first argument (default 1e5).

use fdrelay::scenario::{validate, ScenarioConfig};

fn main() -> fdrelay::Result<()> {
    let trials = std::env::args().nth(1).map_or(100_000, |s| s.parse().expect("integer trial count"));
    let report = validate(&ScenarioConfig::default(), trials)?;
    println!("{:<22} {:>12} {:>12} {:>10} {:>8}", "check", "analytical", "empirical", "error", "tol");
    for c in &report.checks {
        println!(
            "{:<22} {:>12.5e} {:>12.5e} {:>10.2e} {:>8.0e}  {}",
            c.name,
            c.analytical,
            c.empirical,
            c.error,
            c.tolerance,
            if c.passed { "ok" } else { "MISS" }
        );
    }
    println!("all passed: {}", report.passed);
    Ok(())
}
