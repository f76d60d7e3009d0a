//! The transmit / relay / retransmit chain: stationary law, renewal-reward
//! throughput and a simulated walk with random selection delays.

use fdrelay::contention::tagged_pgf;
use fdrelay::semimarkov::{
    analytical_throughput, build_reward, build_transition, holding_with_extra, simulate_chain,
    stationary_distribution, Duplex, SemiMarkovModel,
};
use fdrelay::stream_rng;

fn main() -> fdrelay::Result<()> {
    let (p_sd, p_sr) = (0.47, 0.64);
    let selection = tagged_pgf(3, 512)?;
    let extra = selection.mean()?;
    let transition = build_transition(p_sd, p_sr)?;
    let pi = stationary_distribution(&transition)?;
    println!("P = {transition:.3?}");
    println!("pi = {:.4?} (residual {:.1e})", pi.pi, pi.residual(&transition));

    for duplex in Duplex::ALL {
        let model = SemiMarkovModel::new(transition, holding_with_extra(extra)?, build_reward(duplex))?;
        let eta = analytical_throughput(&model)?;
        let walk = simulate_chain(&model, Some(&selection), 1_000_000, &mut stream_rng(11, 0))?;
        println!(
            "{}: eta {eta:.5}, simulated {:.5}, per reference state {:.5?}",
            duplex.as_str(),
            walk.eta,
            walk.per_state_eta
        );
    }
    Ok(())
}
