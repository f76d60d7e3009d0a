//! Delay distributions of the binary splitting tree, from the generating
//! functions and from slot-level simulation.

use fdrelay::contention::{simulate_tree, PgfTable};
use fdrelay::stream_rng;

fn main() -> fdrelay::Result<()> {
    let table = PgfTable::new(8, 512)?;
    println!(" n   E[interval]  Var[interval]  E[tagged]  Var[tagged]  tail mass");
    for n in 1..=8 {
        let (q, g) = (table.cri(n)?, table.tagged(n)?);
        println!(
            "{n:>2}   {:>11.6}  {:>13.6}  {:>9.6}  {:>11.6}  {:.1e}",
            q.mean()?,
            q.variance()?,
            g.mean()?,
            g.variance()?,
            q.tail_mass().max(g.tail_mass())
        );
    }

    let n = 3;
    let runs = 200_000;
    let mut rng = stream_rng(5, 0);
    let mut counts = [0u64; 12];
    for _ in 0..runs {
        let t = simulate_tree(n, &mut rng)?.tagged_delay as usize;
        if t < counts.len() {
            counts[t] += 1;
        }
    }
    println!("\ntagged delay, {n} contenders: slot, PGF coefficient, simulated frequency");
    for (slot, c) in counts.iter().enumerate().skip(1) {
        println!("{slot:>4}  {:.5}  {:.5}", table.tagged(n)?.pmf(slot)?, *c as f64 / runs as f64);
    }
    Ok(())
}
