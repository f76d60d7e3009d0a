//! Transmit / relay / retransmit semi-Markov chain and its renewal-reward
//! throughput.
//!
//! State order is `s1` (source transmits), `s2` (relay forwards), `s3`
//! (source retransmits). A message is delivered whenever the chain enters
//! `s1`; a full-duplex relay forwards one message while receiving the next,
//! so its delivery is worth two.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::contention::TruncatedPgf;
use crate::{Error, Result};

pub type Matrix3 = [[f64; 3]; 3];

const ROW_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Duplex {
    #[serde(alias = "half")]
    Hd,
    #[serde(alias = "full")]
    Fd,
}

impl Duplex {
    pub const ALL: [Duplex; 2] = [Duplex::Hd, Duplex::Fd];

    pub fn as_str(&self) -> &'static str {
        match self {
            Duplex::Hd => "hd",
            Duplex::Fd => "fd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelayStrategy {
    Fixed,
    Reactive,
}

impl RelayStrategy {
    pub const ALL: [RelayStrategy; 2] = [RelayStrategy::Fixed, RelayStrategy::Reactive];

    pub fn as_str(&self) -> &'static str {
        match self {
            RelayStrategy::Fixed => "fixed",
            RelayStrategy::Reactive => "reactive",
        }
    }
}

/// Transitions whose holding time includes a relay selection round:
/// leaving `s1` or `s3` for anything but a direct delivery.
pub const SELECTION_TRANSITIONS: [(usize, usize); 4] = [(0, 1), (0, 2), (2, 1), (2, 2)];

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter {
            name,
            reason: format!("probability must lie in [0, 1], got {p}"),
        });
    }
    Ok(())
}

/// Embedded chain: rows `s1` and `s3` go to `[sd, (1-sd) sr, (1-sd)(1-sr)]`,
/// the relay always delivers.
pub fn build_transition(p_sd: f64, p_sr: f64) -> Result<Matrix3> {
    check_probability("p_sd", p_sd)?;
    check_probability("p_sr", p_sr)?;
    let attempt = [p_sd, (1.0 - p_sd) * p_sr, (1.0 - p_sd) * (1.0 - p_sr)];
    Ok([attempt, [1.0, 0.0, 0.0], attempt])
}

/// Mean holding times with `extra_slots` added to every transition in
/// [`SELECTION_TRANSITIONS`].
pub fn holding_with_extra(extra_slots: f64) -> Result<Matrix3> {
    if !(extra_slots >= 0.0) || !extra_slots.is_finite() {
        return Err(Error::InvalidParameter {
            name: "mean_selection",
            reason: format!("must be finite and >= 0, got {extra_slots}"),
        });
    }
    let row = [1.0, 1.0 + extra_slots, 1.0 + extra_slots];
    Ok([row, [1.0; 3], row])
}

/// Mean holding times; a fixed relay needs no selection round.
pub fn build_holding(mean_selection: f64, strategy: RelayStrategy) -> Result<Matrix3> {
    match strategy {
        RelayStrategy::Fixed => holding_with_extra(0.0),
        RelayStrategy::Reactive => holding_with_extra(mean_selection),
    }
}

/// Deliveries per transition. Only transitions into `s1` deliver.
pub fn build_reward(duplex: Duplex) -> Matrix3 {
    let relay = match duplex {
        Duplex::Hd => 1.0,
        Duplex::Fd => 2.0,
    };
    [[1.0, 0.0, 0.0], [relay, 0.0, 0.0], [1.0, 0.0, 0.0]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiMarkovModel {
    pub transition: Matrix3,
    pub holding: Matrix3,
    pub reward: Matrix3,
}

impl SemiMarkovModel {
    pub fn new(transition: Matrix3, holding: Matrix3, reward: Matrix3) -> Result<Self> {
        let model = Self {
            transition,
            holding,
            reward,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        check_stochastic(&self.transition)?;
        if self.holding.iter().flatten().any(|&h| !(h >= 1.0)) {
            return Err(Error::InvalidParameter {
                name: "holding",
                reason: "holding times must be at least one slot".into(),
            });
        }
        if self.reward.iter().flatten().any(|&r| !(r >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "reward",
                reason: "rewards must be nonnegative".into(),
            });
        }
        Ok(())
    }

    /// `sum_j P_ij R_ij`.
    pub fn mean_reward(&self, i: usize) -> f64 {
        (0..3).map(|j| self.transition[i][j] * self.reward[i][j]).sum()
    }

    /// `sum_j P_ij H_ij`.
    pub fn mean_holding(&self, i: usize) -> f64 {
        (0..3).map(|j| self.transition[i][j] * self.holding[i][j]).sum()
    }
}

fn check_stochastic(p: &Matrix3) -> Result<()> {
    for (i, row) in p.iter().enumerate() {
        if row.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidParameter {
                name: "transition",
                reason: format!("row {i} has an entry outside [0, 1]"),
            });
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_TOLERANCE {
            return Err(Error::InvalidParameter {
                name: "transition",
                reason: format!("row {i} sums to {sum}"),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub pi: [f64; 3],
}

impl StationaryDistribution {
    /// `max_j |(pi P)_j - pi_j|`.
    pub fn residual(&self, p: &Matrix3) -> f64 {
        (0..3)
            .map(|j| ((0..3).map(|i| self.pi[i] * p[i][j]).sum::<f64>() - self.pi[j]).abs())
            .fold(0.0, f64::max)
    }
}

/// Solves `pi (P - I) = 0` together with `sum pi = 1` in the least-squares
/// sense, which also covers chains with transient states.
pub fn stationary_distribution(p: &Matrix3) -> Result<StationaryDistribution> {
    check_stochastic(p)?;
    let mut a = DMatrix::<f64>::zeros(4, 3);
    for i in 0..3 {
        for j in 0..3 {
            a[(j, i)] = p[i][j] - if i == j { 1.0 } else { 0.0 };
        }
        a[(3, i)] = 1.0;
    }
    let b = DVector::from_column_slice(&[0.0, 0.0, 0.0, 1.0]);
    let x = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Domain(format!("stationary solve failed: {e}")))?;
    let mut pi = [x[0].max(0.0), x[1].max(0.0), x[2].max(0.0)];
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= total);
    Ok(StationaryDistribution { pi })
}

/// Long-run reward per slot, `sum pi_i R_i / sum pi_i H_i`.
pub fn throughput(model: &SemiMarkovModel, pi: &StationaryDistribution) -> f64 {
    let (num, den) = (0..3).fold((0.0, 0.0), |(n, d), i| {
        (n + pi.pi[i] * model.mean_reward(i), d + pi.pi[i] * model.mean_holding(i))
    });
    num / den
}

/// Convenience: stationary vector and throughput of a model.
pub fn analytical_throughput(model: &SemiMarkovModel) -> Result<f64> {
    Ok(throughput(model, &stationary_distribution(&model.transition)?))
}

/// Result of a simulated walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainEstimate {
    pub eta: f64,
    pub transitions: u64,
    pub total_reward: f64,
    pub total_time: f64,
    /// Throughput over the complete regeneration cycles of each reference
    /// state; `None` when the state was entered fewer than twice.
    pub per_state_eta: [Option<f64>; 3],
}

fn pick<R: Rng + ?Sized>(row: &[f64; 3], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    if u < row[0] {
        0
    } else if u < row[0] + row[1] {
        1
    } else if row[2] > 0.0 {
        2
    } else if row[1] > 0.0 {
        1
    } else {
        0
    }
}

/// Walks the embedded chain for `steps` transitions starting in `s1`.
///
/// With `selection` present, transitions in [`SELECTION_TRANSITIONS`] hold
/// for `1 + L` slots with `L` drawn from the PGF; all others use the mean
/// holding matrix.
pub fn simulate_chain<R: Rng + ?Sized>(
    model: &SemiMarkovModel,
    selection: Option<&TruncatedPgf>,
    steps: u64,
    rng: &mut R,
) -> Result<ChainEstimate> {
    model.validate()?;
    if steps == 0 {
        return Err(Error::InvalidParameter {
            name: "steps",
            reason: "need at least one transition".into(),
        });
    }
    let sampler = selection.map(TruncatedPgf::sampler);
    let mut state = 0usize;
    let (mut reward, mut time) = (0.0, 0.0);
    // first and latest (reward, time) at which each state was entered
    let mut first: [Option<(f64, f64)>; 3] = [Some((0.0, 0.0)), None, None];
    let mut last: [Option<(f64, f64)>; 3] = first;
    let mut entries = [1u64, 0, 0];

    for _ in 0..steps {
        let next = pick(&model.transition[state], rng);
        let hold = match &sampler {
            Some(s) if SELECTION_TRANSITIONS.contains(&(state, next)) => 1.0 + s.sample(rng) as f64,
            _ => model.holding[state][next],
        };
        reward += model.reward[state][next];
        time += hold;
        state = next;
        entries[state] += 1;
        first[state].get_or_insert((reward, time));
        last[state] = Some((reward, time));
    }

    let per_state_eta = std::array::from_fn(|i| match (first[i], last[i]) {
        (Some((r0, t0)), Some((r1, t1))) if entries[i] >= 2 && t1 > t0 => Some((r1 - r0) / (t1 - t0)),
        _ => None,
    });
    Ok(ChainEstimate {
        eta: reward / time,
        transitions: steps,
        total_reward: reward,
        total_time: time,
        per_state_eta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contention::tagged_pgf;
    use crate::stream_rng;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn model(p_sd: f64, p_sr: f64, extra: f64, duplex: Duplex) -> SemiMarkovModel {
        SemiMarkovModel::new(
            build_transition(p_sd, p_sr).unwrap(),
            holding_with_extra(extra).unwrap(),
            build_reward(duplex),
        )
        .unwrap()
    }

    #[test]
    fn transition_rows() {
        let p = build_transition(1.0, 0.3).unwrap();
        assert_eq!(p[0], [1.0, 0.0, 0.0]);
        let p = build_transition(0.5, 0.5).unwrap();
        assert_eq!(p[0], [0.5, 0.25, 0.25]);
        assert_eq!(p[2], [0.5, 0.25, 0.25]);
        assert_eq!(p[1], [1.0, 0.0, 0.0]);
        for i in 0..=10 {
            for j in 0..=10 {
                let p = build_transition(i as f64 / 10.0, j as f64 / 10.0).unwrap();
                for row in p {
                    assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
                }
            }
        }
        assert!(build_transition(1.1, 0.0).is_err());
        assert!(build_transition(0.5, -0.1).is_err());
    }

    #[test]
    fn holding_shapes() {
        let fixed = build_holding(7.0, RelayStrategy::Fixed).unwrap();
        assert!(fixed.iter().flatten().all(|&h| h == 1.0));
        let reactive = build_holding(4.0, RelayStrategy::Reactive).unwrap();
        assert_eq!(reactive[0], [1.0, 5.0, 5.0]);
        assert_eq!(reactive[1], [1.0, 1.0, 1.0]);
        assert_eq!(reactive[2], [1.0, 5.0, 5.0]);
        let g3 = tagged_pgf(3, 512).unwrap().mean().unwrap();
        let h = build_holding(g3, RelayStrategy::Reactive).unwrap();
        assert_abs_diff_eq!(h[0][1], 1.0 + 17.0 / 3.0, epsilon = 1e-9);
        assert!(build_holding(-1.0, RelayStrategy::Reactive).is_err());
    }

    #[test]
    fn reward_shapes() {
        let hd = build_reward(Duplex::Hd);
        assert_eq!(hd.iter().flatten().sum::<f64>(), 3.0);
        assert_eq!(build_reward(Duplex::Fd)[1][0], 2.0);
        for r in [hd, build_reward(Duplex::Fd)] {
            for row in r {
                assert_eq!(row[1], 0.0);
                assert_eq!(row[2], 0.0);
            }
        }
    }

    #[test]
    fn stationary_special_cases() {
        let pi = stationary_distribution(&build_transition(1.0, 0.4).unwrap()).unwrap();
        assert_abs_diff_eq!(pi.pi[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pi.pi[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pi.pi[2], 0.0, epsilon = 1e-12);
        let pi = stationary_distribution(&build_transition(0.0, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(pi.pi[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pi.pi[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pi.pi[2], 0.0, epsilon = 1e-12);
        let pi = stationary_distribution(&build_transition(0.0, 0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(pi.pi[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn throughput_goldens() {
        for strategy_extra in [0.0, 9.0] {
            let m = model(1.0, 0.2, strategy_extra, Duplex::Hd);
            assert_abs_diff_eq!(analytical_throughput(&m).unwrap(), 1.0, epsilon = 1e-12);
        }
        // pi = (1/2, 1/2, 0): eta = 1 / (2 + E[G_3]) with E[G_3] = 17/3
        let g3 = tagged_pgf(3, 512).unwrap().mean().unwrap();
        let hd = analytical_throughput(&model(0.0, 1.0, g3, Duplex::Hd)).unwrap();
        assert_abs_diff_eq!(hd, 3.0 / 23.0, epsilon = 1e-9);
        let fd = analytical_throughput(&model(0.0, 1.0, g3, Duplex::Fd)).unwrap();
        assert_abs_diff_eq!(fd, 2.0 * hd, epsilon = 1e-12);
    }

    #[test]
    fn simulated_chain_edges() {
        let mut rng = stream_rng(9, 0);
        let m = model(1.0, 0.5, 3.0, Duplex::Fd);
        assert_eq!(simulate_chain(&m, None, 1000, &mut rng).unwrap().eta, 1.0);
        let mut zero = model(0.4, 0.5, 3.0, Duplex::Hd);
        zero.reward = [[0.0; 3]; 3];
        assert_eq!(simulate_chain(&zero, None, 1000, &mut rng).unwrap().eta, 0.0);
        assert!(simulate_chain(&m, None, 0, &mut rng).is_err());
    }

    #[test]
    fn simulated_chain_matches_renewal_reward() {
        let g = tagged_pgf(3, 512).unwrap();
        let mean = g.mean().unwrap();
        let m = model(0.3, 0.6, mean, Duplex::Fd);
        let analytical = analytical_throughput(&m).unwrap();
        let est = simulate_chain(&m, Some(&g), 1_000_000, &mut stream_rng(10, 0)).unwrap();
        assert!((est.eta / analytical - 1.0).abs() < 0.01);
        for eta in est.per_state_eta {
            assert!((eta.unwrap() / analytical - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn invalid_models_rejected() {
        let p = build_transition(0.5, 0.5).unwrap();
        let mut h = holding_with_extra(0.0).unwrap();
        h[1][1] = 0.5;
        assert!(SemiMarkovModel::new(p, h, build_reward(Duplex::Hd)).is_err());
        let mut bad = p;
        bad[0][0] = 0.9;
        assert!(stationary_distribution(&bad).is_err());
    }

    fn row_stochastic() -> impl Strategy<Value = Matrix3> {
        prop::array::uniform3(prop::array::uniform3(0.01f64..1.0)).prop_map(|rows| {
            rows.map(|r| {
                let s: f64 = r.iter().sum();
                let mut row = r.map(|x| x / s);
                row[2] = 1.0 - row[0] - row[1];
                row
            })
        })
    }

    proptest! {
        #[test]
        fn stationary_is_fixed_point(p in row_stochastic()) {
            let pi = stationary_distribution(&p).unwrap();
            prop_assert!(pi.residual(&p) < 1e-10);
            prop_assert!((pi.pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(pi.pi.iter().all(|&x| x >= 0.0));
        }

        #[test]
        fn throughput_bounds_and_monotonicity(
            p_sd in 0.0f64..1.0, dp in 0.0f64..0.5, p_sr in 0.0f64..=1.0, extra in 0.0f64..20.0,
        ) {
            let hi = (p_sd + dp).min(1.0);
            for duplex in Duplex::ALL {
                let lo_eta = analytical_throughput(&model(p_sd, p_sr, extra, duplex)).unwrap();
                let hi_eta = analytical_throughput(&model(hi, p_sr, extra, duplex)).unwrap();
                prop_assert!(hi_eta >= lo_eta - 1e-12);
                let cap = if duplex == Duplex::Hd { 1.0 } else { 2.0 };
                prop_assert!((0.0..=cap + 1e-12).contains(&lo_eta));
            }
        }
    }
}
