//! A run file resolved against the reference deployment, then evaluated.

use fdrelay::config::{parse_config_str, render_pgf, run_analyze, run_sweep};

const RUN: &str = r#"
duplex = "fd"
strategy = "reactive"
si_attenuation_db = 90.0
si_nakagami_m = 2.0
sweep_param = "source_power"
sweep_from = 10.0
sweep_to = 40.0
sweep_steps = 4
"#;

fn main() -> fdrelay::Result<()> {
    let run = parse_config_str(RUN)?.resolve()?;
    println!("{}\n", run_analyze(&run)?);
    print!("{}", run_sweep(&run)?);
    println!();
    for line in render_pgf(run.scenario.contenders, run.scenario.l_max)?.lines().filter(|l| l.starts_with('#')) {
        println!("{line}");
    }
    Ok(())
}
