//! Aggregate interference at a full-duplex receiver: per-tier cumulants,
//! their sum, the matched lognormal and a Monte Carlo check of the BS tier.

use fdrelay::interference::{add_cumulants, ppp_field_cumulants, self_interference_cumulants, cumulants_to_lognormal};
use fdrelay::montecarlo::{conditional_interference, empirical_interference};
use fdrelay::scenario::ScenarioConfig;
use fdrelay::semimarkov::{Duplex, RelayStrategy};
use fdrelay::stream_rng;

fn main() -> fdrelay::Result<()> {
    let cfg = ScenarioConfig::default().with(Duplex::Fd, RelayStrategy::Fixed);
    let bs = cfg.bs_field();
    println!("mean interferer count: {:.2}", bs.mean_count());

    let bs_k = ppp_field_cumulants(&bs, 2)?;
    let ue_k = ppp_field_cumulants(&cfg.ue_field().expect("fd has a UE tier"), 2)?;
    let si_k = self_interference_cumulants(&cfg.self_interference().expect("fd has SI"), 2)?;
    for (name, k) in [("bs tier", &bs_k), ("ue tier", &ue_k), ("self-int", &si_k)] {
        println!("{name:>9}: kappa_1 {:.4e} W  kappa_2 {:.4e} W^2", k.mean(), k.variance());
    }
    let total = add_cumulants(&add_cumulants(&bs_k, &ue_k)?, &si_k)?;
    let ln = cumulants_to_lognormal(&total)?;
    println!("aggregate: mu {:.2} dBW, sigma {:.2} dB", ln.mu_db, ln.sigma_db);

    let trials = 100_000;
    let cond = conditional_interference(&bs, trials, &mut stream_rng(1, 0))?;
    let plain = empirical_interference(&bs, trials, &mut stream_rng(1, 1))?;
    println!("\nbs tier over {trials} deployments      mean          variance");
    println!("  analytical                   {:.4e}    {:.4e}", bs_k.mean(), bs_k.variance());
    println!("  fading integrated exactly    {:.4e}    {:.4e}", cond.mean, cond.variance);
    println!("  fading drawn per node        {:.4e}    {:.4e}", plain.mean, plain.variance());
    println!("(10 dB shadowing makes the per-node variance estimate converge very slowly)");
    Ok(())
}
