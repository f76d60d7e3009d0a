//! Outage of the source-destination link: the lognormal SIR model against
//! SIR sampled from explicit deployments.

use fdrelay::link::outage_probability;
use fdrelay::montecarlo::{outage_curve, sample_sir_db, Link};
use fdrelay::scenario::{evaluate_point, linspace, ScenarioConfig};
use fdrelay::semimarkov::{Duplex, RelayStrategy};
use fdrelay::stream_rng;

fn main() -> fdrelay::Result<()> {
    let gammas = linspace(-10.0, 20.0, 7);
    for duplex in Duplex::ALL {
        let cfg = ScenarioConfig::default().with(duplex, RelayStrategy::Fixed);
        let sir = evaluate_point(&cfg)?.diagnostics.sd_sir.expect("interference present");
        let sampled = sample_sir_db(&cfg, Link::SourceDestination, 100_000, &mut stream_rng(3, 0))?;
        let empirical = outage_curve(&sampled, &gammas);
        println!("{} (SIR ~ N({:.2}, {:.2}^2) dB)", duplex.as_str(), sir.mu_db, sir.sigma_db);
        println!("  gamma_th   analytical   sampled");
        for (g, e) in gammas.iter().zip(&empirical) {
            println!("  {g:>6.1}     {:>8.4}   {e:>8.4}", outage_probability(&sir, *g));
        }
    }
    Ok(())
}
