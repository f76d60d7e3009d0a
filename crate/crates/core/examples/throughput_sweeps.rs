//! The three throughput sweeps: source-destination distance, source power
//! and self-interference cancellation. CSV files go to the directory given
//! as the first argument, or to the system temp directory.

use std::path::PathBuf;

use fdrelay::config::render_sweep_csv;
use fdrelay::scenario::{sweep, ScenarioConfig, SweepParam, SweepRow};

fn print_table(rows: &[SweepRow]) {
    println!("{:>8}  {:>9} {:>9} {:>9} {:>9}", rows[0].sweep_param.as_str(), "hd fixed", "hd react", "fd fixed", "fd react");
    for point in rows.chunks(4) {
        print!("{:>8.1} ", point[0].value);
        for r in point {
            print!(" {:>9.4}", r.eta);
        }
        println!();
    }
}

fn main() -> fdrelay::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let cfg = ScenarioConfig::default();
    for param in [SweepParam::SdDistance, SweepParam::SourcePower, SweepParam::SiAttenuation] {
        let rows = sweep(&cfg, param, &param.default_grid())?;
        print_table(&rows);
        let path = dir.join(format!("sweep_{}.csv", param.as_str()));
        std::fs::write(&path, render_sweep_csv(&rows)).expect("writable output directory");
        println!("-> {}\n", path.display());
    }
    Ok(())
}
