//! Sampling oracles for the analytical layers.
//!
//! Everything here draws the true Gamma x lognormal channel, never the
//! single-lognormal stand-in, so a gap between these estimates and the
//! analytical ones measures the approximation error.
//!
//! Trials are cut into fixed-size chunks; chunk `k` draws from stream `k` of a
//! seed taken from the caller's generator. Results are therefore identical
//! for any thread count.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fading::CompositeFadingParams;
use crate::interference::AnnulusField;
use crate::link::dbm_to_watts;
use crate::scenario::ScenarioConfig;
use crate::semimarkov::{Duplex, RelayStrategy};
use crate::{stream_rng, Error, Result};

const CHUNK: u64 = 4096;

/// Transmitter positions around a receiver at the origin.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub points: Vec<(f64, f64)>,
}

impl Deployment {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|&(x, y)| x.hypot(y))
    }
}

/// Running mean and second central moment; chunks merge exactly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleMoments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl SampleMoments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64,
        }
    }

    /// Unbiased sample variance; zero below two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n.max(1) as f64).sqrt()
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter {
            name: "trials",
            reason: "need at least one trial".into(),
        });
    }
    Ok(())
}

/// Runs `trials` independent trials in parallel chunks and collects the
/// per-chunk outputs in chunk order. `body(rng, n)` performs `n` trials.
pub fn par_chunks<T, F>(trials: u64, seed: u64, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut rand_chacha::ChaCha8Rng, u64) -> T + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let n = CHUNK.min(trials - k * CHUNK);
            body(&mut stream_rng(seed, k), n)
        })
        .collect()
}

fn uniform_radius<R: Rng + ?Sized>(r_min: f64, r_max: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    (r_min * r_min + u * (r_max * r_max - r_min * r_min)).sqrt()
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean == 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("validated intensity").sample(rng) as usize
}

/// One realization of the Poisson field restricted to the annulus.
pub fn sample_ppp<R: Rng + ?Sized>(field: &AnnulusField, rng: &mut R) -> Result<Deployment> {
    field.validate()?;
    let count = poisson_count(field.mean_count(), rng);
    let points = (0..count)
        .map(|_| {
            let r = uniform_radius(field.r_min, field.r_max, rng);
            let theta = rng.random::<f64>() * 2.0 * PI;
            (r * theta.cos(), r * theta.sin())
        })
        .collect();
    Ok(Deployment { points })
}

/// Aggregate received power of one deployment with freshly drawn fading.
pub fn aggregate_power<R: Rng + ?Sized>(field: &AnnulusField, deployment: &Deployment, rng: &mut R) -> f64 {
    let fading = field.fading.sampler();
    deployment
        .radii()
        .map(|r| field.tx_power * r.powf(-field.alpha) * fading.sample(rng))
        .sum()
}

/// Sample mean and variance of the aggregate power, fading drawn per node.
pub fn empirical_interference<R: Rng + ?Sized>(
    field: &AnnulusField,
    trials: u64,
    rng: &mut R,
) -> Result<SampleMoments> {
    check_trials(trials)?;
    field.validate()?;
    let seed = rng.random();
    let parts = par_chunks(trials, seed, |rng, n| {
        let mut acc = SampleMoments::default();
        for _ in 0..n {
            let d = sample_ppp(field, rng).expect("validated field");
            acc.push(aggregate_power(field, &d, rng));
        }
        acc
    });
    Ok(parts.into_iter().fold(SampleMoments::default(), SampleMoments::merge))
}

/// Aggregate-power moments with the fading integrated out exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalEstimate {
    pub mean: f64,
    pub variance: f64,
    /// Standard errors of the two estimates.
    pub mean_se: f64,
    pub variance_se: f64,
    pub trials: u64,
}

/// Positions are sampled; the fading enters through its exact moments.
///
/// Given a deployment the aggregate has mean `E[X] S1` and variance
/// `Var[X] S2`, with `S1 = sum p r^-a` and `S2 = sum p^2 r^-2a`. The law of
/// total variance then gives `Var I = Var[X] E[S2] + E[X]^2 Var[S1]`.
/// With 10 dB shadowing the plain sample variance has a standard error in
/// the hundreds of percent at 1e5 trials, since it rides on the fourth
/// moment of the fading; this estimator gets to about 1%.
pub fn conditional_interference<R: Rng + ?Sized>(
    field: &AnnulusField,
    trials: u64,
    rng: &mut R,
) -> Result<ConditionalEstimate> {
    check_trials(trials)?;
    field.validate()?;
    let ex = field.fading.exact_moment(1);
    let var_x = field.fading.exact_moment(2) - ex * ex;
    let seed = rng.random();
    let parts = par_chunks(trials, seed, |rng, n| {
        let (mut s1, mut s2) = (SampleMoments::default(), SampleMoments::default());
        for _ in 0..n {
            let d = sample_ppp(field, rng).expect("validated field");
            let (a, b) = d.radii().fold((0.0, 0.0), |(a, b), r| {
                let g = field.tx_power * r.powf(-field.alpha);
                (a + g, b + g * g)
            });
            s1.push(a);
            s2.push(b);
        }
        (s1, s2)
    });
    let (s1, s2) = parts.into_iter().fold(
        (SampleMoments::default(), SampleMoments::default()),
        |(a, b), (c, d)| (a.merge(c), b.merge(d)),
    );
    Ok(ConditionalEstimate {
        mean: ex * s1.mean,
        variance: var_x * s2.mean + ex * ex * s1.variance(),
        mean_se: ex * s1.std_error(),
        // the E[S2] term dominates whenever Var[X] >> E[X]^2
        variance_se: var_x * s2.std_error(),
        trials,
    })
}

/// Which desired link an outage trial measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    SourceDestination,
    SourceRelay,
}

/// Draws everything one SIR trial needs for a configuration.
#[derive(Debug, Clone)]
pub struct SirSampler {
    link: Link,
    strategy: RelayStrategy,
    tx_power: f64,
    alpha: f64,
    sd_distance: f64,
    sr_distance: f64,
    relay_annulus: (f64, f64),
    fading: CompositeFadingParams,
    fields: Vec<AnnulusField>,
    si: Option<(f64, Option<Gamma<f64>>)>,
}

impl SirSampler {
    pub fn new(cfg: &ScenarioConfig, link: Link) -> Result<Self> {
        cfg.validate()?;
        let fields = std::iter::once(cfg.bs_field())
            .chain(cfg.ue_field())
            .filter(|f| f.lambda > 0.0)
            .collect();
        let si = cfg.self_interference().map(|si| {
            let gamma = si
                .fading
                .m
                .is_finite()
                .then(|| Gamma::new(si.fading.m, 1.0 / si.fading.m).expect("validated shape"));
            (si.tx_power * si.delta(), gamma)
        });
        Ok(Self {
            link,
            strategy: cfg.strategy,
            tx_power: dbm_to_watts(cfg.source_power_dbm),
            alpha: cfg.alpha,
            sd_distance: cfg.sd_distance_m,
            sr_distance: cfg.sr_distance(),
            relay_annulus: (cfg.relay_annulus_min_m, cfg.relay_annulus_max()),
            fading: cfg.fading,
            fields,
            si,
        })
    }

    fn desired_distance<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match (self.link, self.strategy) {
            (Link::SourceDestination, _) => self.sd_distance,
            (Link::SourceRelay, RelayStrategy::Fixed) => self.sr_distance,
            (Link::SourceRelay, RelayStrategy::Reactive) => {
                uniform_radius(self.relay_annulus.0, self.relay_annulus.1, rng)
            }
        }
    }

    /// Interference power of one trial.
    pub fn interference<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut total = 0.0;
        for f in &self.fields {
            let d = sample_ppp(f, rng).expect("validated field");
            total += aggregate_power(f, &d, rng);
        }
        if let Some((scale, gamma)) = &self.si {
            total += scale * gamma.as_ref().map_or(1.0, |g| g.sample(rng));
        }
        total
    }

    /// SIR of one trial in dB; `+inf` when nothing interferes.
    pub fn sample_db<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let r = self.desired_distance(rng);
        let desired = self.tx_power * r.powf(-self.alpha) * self.fading.sampler().sample(rng);
        let interference = self.interference(rng);
        10.0 * (desired / interference).log10()
    }
}

/// `trials` SIR draws in dB, in a thread-count-independent order.
pub fn sample_sir_db<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    link: Link,
    trials: u64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_trials(trials)?;
    let sampler = SirSampler::new(cfg, link)?;
    let seed = rng.random();
    let parts = par_chunks(trials, seed, |rng, n| {
        (0..n).map(|_| sampler.sample_db(rng)).collect::<Vec<_>>()
    });
    Ok(parts.concat())
}

/// Fraction of draws below each threshold, all thresholds sharing the draws.
pub fn outage_curve(sir_db: &[f64], gammas_db: &[f64]) -> Vec<f64> {
    let mut sorted = sir_db.to_vec();
    sorted.sort_by(f64::total_cmp);
    gammas_db
        .iter()
        .map(|&g| sorted.partition_point(|&s| s < g) as f64 / sorted.len() as f64)
        .collect()
}

/// Empirical `Pr[SIR < gamma_th]` on the source-destination link.
pub fn empirical_outage<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    gamma_th_db: f64,
    trials: u64,
    rng: &mut R,
) -> Result<f64> {
    empirical_link_outage(cfg, Link::SourceDestination, gamma_th_db, trials, rng)
}

pub fn empirical_link_outage<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    link: Link,
    gamma_th_db: f64,
    trials: u64,
    rng: &mut R,
) -> Result<f64> {
    let sir = sample_sir_db(cfg, link, trials, rng)?;
    Ok(outage_curve(&sir, &[gamma_th_db])[0])
}

/// Median of the sampled SIR in dB.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Whether a configuration has any interference at all.
pub fn interference_free(cfg: &ScenarioConfig) -> bool {
    let fd = cfg.duplex == Duplex::Fd;
    cfg.lambda == 0.0
        && (!fd || cfg.ue_lambda.unwrap_or(cfg.lambda) == 0.0)
        && (!fd || cfg.si_attenuation_db.is_infinite())
}
