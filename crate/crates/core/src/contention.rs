//! Binary splitting-tree contention resolution.
//!
//! `N` contenders collide in the first slot. Every collided node flips a fair
//! coin; the group that flipped 0 is resolved completely (depth first) before
//! the group that flipped 1 gets the channel. Idle and success slots cost one
//! slot each. New arrivals never join an interval already in progress.
//!
//! Two generating functions describe the interval, both as power series in
//! `z` truncated at `l_max` slots:
//!
//! - `Q_n(z)`: total length of the resolution interval started by `n` nodes;
//! - `G_n(z)`: slots until one tagged node among `n` transmits alone.
//!
//! Both recursions contain the unknown on the right-hand side (the branch
//! where every node lands in the same group). Those terms are collected on
//! the left and removed by truncated series division, so every coefficient
//! up to `l_max` is exact; the mass beyond `l_max` is reported as
//! `tail_mass`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::{Error, Result};

pub const DEFAULT_L_MAX: usize = 512;

/// Largest tail mass tolerated before moments are refused.
pub const DEFAULT_TAIL_BOUND: f64 = 1e-6;

const SLOT_GUARD: u64 = 1_000_000;

/// `Pr[k of n fair coins show 0] = C(n, k) 2^-n`.
pub fn binomial_split(n: usize, k: usize) -> Result<f64> {
    if k > n {
        return Err(Error::OutOfRange { index: k, max: n });
    }
    if n <= 60 {
        let k = k.min(n - k);
        let mut c: u64 = 1;
        for i in 0..k {
            c = c * (n - i) as u64 / (i + 1) as u64;
        }
        return Ok(c as f64 * 0.5f64.powi(n as i32));
    }
    Ok((ln_binomial(n as u64, k as u64) - n as f64 * std::f64::consts::LN_2).exp())
}

/// Outcome distribution of one collision split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitDistribution {
    pub q_sides: u32,
}

impl SplitDistribution {
    pub fn new(q_sides: u32) -> Result<Self> {
        if q_sides != 2 {
            return Err(Error::Unsupported(format!(
                "only binary splitting is implemented, got q = {q_sides}"
            )));
        }
        Ok(Self { q_sides })
    }

    pub fn binary() -> Self {
        Self { q_sides: 2 }
    }

    /// Probability that `k` of `n` nodes pick the first group.
    pub fn prob(&self, n: usize, k: usize) -> Result<f64> {
        binomial_split(n, k)
    }
}

/// Probability generating function of a slot count, truncated at `l_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedPgf {
    /// `coeffs[x] = Pr[X = x]` for `x = 0..=l_max`.
    pub coeffs: Vec<f64>,
}

impl TruncatedPgf {
    /// The PGF `z`: exactly one slot.
    pub fn single_slot(l_max: usize) -> Self {
        let mut coeffs = vec![0.0; l_max + 1];
        coeffs[1] = 1.0;
        Self { coeffs }
    }

    pub fn l_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Probability beyond `l_max`.
    pub fn tail_mass(&self) -> f64 {
        1.0 - self.coeffs.iter().sum::<f64>()
    }

    fn check_tail(&self, bound: f64) -> Result<()> {
        let tail = self.tail_mass();
        if tail > bound {
            return Err(Error::TailMassExceeded { tail, bound });
        }
        Ok(())
    }

    /// `G'(1)`, refusing when the truncated tail exceeds `bound`.
    pub fn mean_with_bound(&self, bound: f64) -> Result<f64> {
        self.check_tail(bound)?;
        Ok(self.factorial_moment(1))
    }

    /// `G''(1) + G'(1) - G'(1)^2`.
    pub fn variance_with_bound(&self, bound: f64) -> Result<f64> {
        self.check_tail(bound)?;
        let mean = self.factorial_moment(1);
        Ok((self.factorial_moment(2) + mean - mean * mean).max(0.0))
    }

    pub fn mean(&self) -> Result<f64> {
        self.mean_with_bound(DEFAULT_TAIL_BOUND)
    }

    pub fn variance(&self) -> Result<f64> {
        self.variance_with_bound(DEFAULT_TAIL_BOUND)
    }

    /// `E[X (X-1) ... (X-k+1)]` over the retained coefficients.
    pub fn factorial_moment(&self, k: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(k)
            .map(|(x, p)| p * (0..k).map(|i| (x - i) as f64).product::<f64>())
            .sum()
    }

    /// `Pr[X = x]`, the coefficient `G^(x)(0) / x!`.
    pub fn pmf(&self, x: usize) -> Result<f64> {
        self.coeffs.get(x).copied().ok_or(Error::OutOfRange {
            index: x,
            max: self.l_max(),
        })
    }

    pub fn sampler(&self) -> PgfSampler {
        let mut acc = 0.0;
        let cdf = self
            .coeffs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        PgfSampler { cdf }
    }
}

pub fn pgf_mean(p: &TruncatedPgf) -> Result<f64> {
    p.mean()
}

pub fn pgf_variance(p: &TruncatedPgf) -> Result<f64> {
    p.variance()
}

pub fn pgf_pmf(p: &TruncatedPgf, x: usize) -> Result<f64> {
    p.pmf(x)
}

/// Inverse-CDF draws from a truncated PGF. Draws landing in the tail return
/// `l_max`.
#[derive(Debug, Clone)]
pub struct PgfSampler {
    cdf: Vec<f64>,
}

impl PgfSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

fn series_mul(a: &[f64], b: &[f64], out: &mut [f64], weight: f64) {
    let len = out.len();
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        let wa = weight * ai;
        for (j, &bj) in b.iter().take(len - i).enumerate() {
            out[i + j] += wa * bj;
        }
    }
}

/// Multiply by `z`, dropping the coefficient pushed past the truncation.
fn shift_one(series: &mut [f64]) {
    series.rotate_right(1);
    series[0] = 0.0;
}

/// Divide a series by a polynomial with unit constant term.
fn series_div_unit(rhs: &[f64], divisor: &[f64]) -> Vec<f64> {
    debug_assert_eq!(divisor[0], 1.0);
    let mut out = vec![0.0; rhs.len()];
    for i in 0..rhs.len() {
        let mut acc = rhs[i];
        for (j, d) in divisor.iter().enumerate().skip(1).take(i) {
            acc -= d * out[i - j];
        }
        out[i] = acc;
    }
    out
}

/// Divisor `1 - 2^{1-n} z^2` of the `Q_n` recursion.
fn cri_divisor(n: usize) -> [f64; 3] {
    [1.0, 0.0, -(0.5f64.powi(n as i32 - 1))]
}

/// Divisor `1 - 2^{-N-1} (z + z^2)` of the `G_{N+1}` recursion.
fn tagged_divisor(others: usize) -> [f64; 3] {
    let c = 0.5f64.powi(others as i32 + 1);
    [1.0, -c, -c]
}

/// Right-hand side of the `Q_n` recursion without the self-referential terms.
fn cri_rhs(n: usize, cri: &[TruncatedPgf], len: usize) -> Result<Vec<f64>> {
    let mut rhs = vec![0.0; len];
    for k in 1..n {
        series_mul(&cri[k].coeffs, &cri[n - k].coeffs, &mut rhs, binomial_split(n, k)?);
    }
    shift_one(&mut rhs);
    Ok(rhs)
}

/// Right-hand side of the `G_{N+1}` recursion without the self-referential terms.
fn tagged_rhs(others: usize, cri: &[TruncatedPgf], tagged: &[TruncatedPgf], len: usize) -> Result<Vec<f64>> {
    let n = others;
    let mut rhs = vec![0.0; len];
    // tagged flipped 0 and shares its group with k others, k < N
    for k in 0..n {
        let w = 0.5 * binomial_split(n, k)?;
        for (r, g) in rhs.iter_mut().zip(&tagged[k + 1].coeffs) {
            *r += w * g;
        }
    }
    // tagged flipped 1: k >= 1 others resolve first, then N - k join the tagged
    for k in 1..=n {
        series_mul(
            &cri[k].coeffs,
            &tagged[n - k + 1].coeffs,
            &mut rhs,
            0.5 * binomial_split(n, k)?,
        );
    }
    shift_one(&mut rhs);
    Ok(rhs)
}

/// `Q_0 ..= Q_{n_max}` and `G_1 ..= G_{n_max}` for one truncation length.
///
/// Built eagerly and immutable afterwards, so it can be shared between
/// threads.
#[derive(Debug, Clone)]
pub struct PgfTable {
    l_max: usize,
    cri: Vec<TruncatedPgf>,
    /// `tagged[n]` is `G_n`; index 0 is unused.
    tagged: Vec<TruncatedPgf>,
}

impl PgfTable {
    pub fn new(n_max: usize, l_max: usize) -> Result<Self> {
        if l_max < 1 {
            return Err(Error::InvalidParameter {
                name: "l_max",
                reason: "must be at least 1".into(),
            });
        }
        let len = l_max + 1;
        let n_max = n_max.max(1);

        let mut cri = vec![TruncatedPgf::single_slot(l_max), TruncatedPgf::single_slot(l_max)];
        for n in 2..=n_max {
            let rhs = cri_rhs(n, &cri, len)?;
            cri.push(TruncatedPgf {
                coeffs: series_div_unit(&rhs, &cri_divisor(n)),
            });
        }

        let mut tagged = vec![TruncatedPgf { coeffs: vec![0.0; len] }, TruncatedPgf::single_slot(l_max)];
        for n_total in 2..=n_max {
            let others = n_total - 1;
            let rhs = tagged_rhs(others, &cri, &tagged, len)?;
            tagged.push(TruncatedPgf {
                coeffs: series_div_unit(&rhs, &tagged_divisor(others)),
            });
        }

        Ok(Self { l_max, cri, tagged })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn n_max(&self) -> usize {
        self.tagged.len() - 1
    }

    /// `Q_n`, the full resolution interval of `n` contenders.
    pub fn cri(&self, n: usize) -> Result<&TruncatedPgf> {
        self.cri.get(n).ok_or(Error::OutOfRange {
            index: n,
            max: self.cri.len() - 1,
        })
    }

    /// `G_n`, the delay of a tagged node among `n_total` contenders.
    pub fn tagged(&self, n_total: usize) -> Result<&TruncatedPgf> {
        if n_total == 0 {
            return Err(Error::InvalidParameter {
                name: "n_total",
                reason: "the tagged node must be among the contenders".into(),
            });
        }
        self.tagged.get(n_total).ok_or(Error::OutOfRange {
            index: n_total,
            max: self.n_max(),
        })
    }
}

/// PGF of the resolution interval length started by `n` colliding nodes.
pub fn cri_pgf(n: usize, l_max: usize) -> Result<TruncatedPgf> {
    Ok(PgfTable::new(n, l_max)?.cri(n)?.clone())
}

/// PGF of the slot in which a tagged node among `n_total` contenders succeeds.
pub fn tagged_pgf(n_total: usize, l_max: usize) -> Result<TruncatedPgf> {
    Ok(PgfTable::new(n_total, l_max)?.tagged(n_total)?.clone())
}

/// One simulated resolution interval. Slots are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeRun {
    pub cri_length: u64,
    /// Slot in which contender 0 transmitted alone.
    pub tagged_delay: u64,
    /// Slot of the first success by any contender.
    pub first_success: u64,
}

/// Slot-level simulation of the blocked-access binary tree.
pub fn simulate_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<TreeRun> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "at least one contender required".into(),
        });
    }
    // (group size, whether contender 0 is in the group); top of stack goes next
    let mut stack: Vec<(usize, bool)> = vec![(n, true)];
    let mut slot = 0u64;
    let mut tagged_delay = 0;
    let mut first_success = 0;

    while let Some((size, has_tagged)) = stack.pop() {
        slot += 1;
        if slot > SLOT_GUARD {
            return Err(Error::SlotGuard(SLOT_GUARD));
        }
        match size {
            0 => {}
            1 => {
                if first_success == 0 {
                    first_success = slot;
                }
                if has_tagged {
                    tagged_delay = slot;
                }
            }
            _ => {
                let tagged_zero = has_tagged && rng.random::<bool>();
                let others = size - usize::from(has_tagged);
                let mut zeros = usize::from(tagged_zero);
                for _ in 0..others {
                    zeros += usize::from(rng.random::<bool>());
                }
                stack.push((size - zeros, has_tagged && !tagged_zero));
                stack.push((zeros, tagged_zero));
            }
        }
    }

    Ok(TreeRun {
        cri_length: slot,
        tagged_delay,
        first_success,
    })
}
