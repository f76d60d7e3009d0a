//! Single-lognormal stand-in for Nakagami-m x lognormal fading, against
//! log-domain moments of sampled channels.

use fdrelay::fading::{composite_to_lognormal, CompositeFadingParams, XI};
use fdrelay::stream_rng;
use rand_distr::Distribution;

fn main() -> fdrelay::Result<()> {
    let draws = 1_000_000;
    println!("{:>5} {:>8} | {:>9} {:>9} | {:>9} {:>9}", "m", "shadow", "mu_dB", "sigma_dB", "sampled", "sampled");
    for (m, shadow) in [(1.0, 0.0), (2.0, 0.0), (16.0, 0.0), (1.0, 6.0), (16.0, 10.0)] {
        let fading = CompositeFadingParams::new(m, 0.0, shadow)?;
        let approx = composite_to_lognormal(&fading)?;

        let sampler = fading.sampler();
        let mut rng = stream_rng(7, 0);
        let db: Vec<f64> = (0..draws).map(|_| XI * sampler.sample(&mut rng).ln()).collect();
        let mean = db.iter().sum::<f64>() / draws as f64;
        let sd = (db.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / draws as f64).sqrt();

        println!(
            "{m:>5} {shadow:>8} | {:>9.4} {:>9.4} | {mean:>9.4} {sd:>9.4}",
            approx.mu_db, approx.sigma_db
        );
    }
    Ok(())
}
