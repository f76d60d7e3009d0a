//! Composite Nakagami-m x lognormal fading.
//!
//! The squared envelope of every link is the product of a unit-mean Gamma
//! variate (Nakagami-m power) and a lognormal shadowing term. Analytical code
//! works with the single lognormal that matches the composite in log domain;
//! the sampler draws the true product so Monte Carlo checks measure the
//! quality of that approximation.

use std::f64::consts::{LN_10, PI};

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// dB-to-neper scale: `10 / ln 10`.
pub const XI: f64 = 10.0 / LN_10;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest integer argument evaluated with an exact partial sum.
const EXACT_INTEGER_LIMIT: f64 = 1000.0;

/// Shift point for the asymptotic expansions.
const ASYMPTOTIC_FROM: f64 = 10.0;

const SERIES_EPS: f64 = 1e-14;

/// B_2, B_4, ... B_16.
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

fn exact_integer(m: f64) -> Option<usize> {
    (m.fract() == 0.0 && m <= EXACT_INTEGER_LIMIT).then_some(m as usize)
}

/// Digamma function, with a domain check in front of the statrs one.
pub fn digamma(m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::Domain(format!("digamma requires m > 0, got {m}")));
    }
    if m.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(statrs::function::gamma::digamma(m))
}

/// Hurwitz zeta function at order two, `sum_k 1 / (m + k)^2`.
pub fn hurwitz_zeta2(m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::Domain(format!("hurwitz_zeta2 requires m > 0, got {m}")));
    }
    if m.is_infinite() {
        return Ok(0.0);
    }
    if let Some(n) = exact_integer(m) {
        let partial: f64 = (1..n).map(|k| 1.0 / (k * k) as f64).sum();
        return Ok(PI * PI / 6.0 - partial);
    }

    // Euler-Maclaurin: explicit head, integral plus Bernoulli corrections for the tail.
    let mut head = 0.0;
    let mut a = m;
    while a < ASYMPTOTIC_FROM {
        head += 1.0 / (a * a);
        a += 1.0;
    }
    let inv2 = 1.0 / (a * a);
    let mut tail = 1.0 / a + 0.5 * inv2;
    let mut pow = inv2 / a;
    for b in BERNOULLI_EVEN {
        let term = b * pow;
        tail += term;
        if term.abs() < SERIES_EPS {
            break;
        }
        pow *= inv2;
    }
    Ok(head + tail)
}

/// Log-domain parameters of a lognormal power quantity, in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalParams {
    pub mu_db: f64,
    pub sigma_db: f64,
}

impl LognormalParams {
    pub fn new(mu_db: f64, sigma_db: f64) -> Result<Self> {
        if !(sigma_db >= 0.0) || !mu_db.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sigma_db",
                reason: format!("need finite mu and sigma >= 0, got ({mu_db}, {sigma_db})"),
            });
        }
        Ok(Self { mu_db, sigma_db })
    }

    /// Build from natural-log parameters.
    pub fn from_ln(mu_ln: f64, sigma_ln: f64) -> Self {
        Self {
            mu_db: XI * mu_ln,
            sigma_db: XI * sigma_ln,
        }
    }

    /// Unit power with no spread.
    pub fn deterministic_unit() -> Self {
        Self {
            mu_db: 0.0,
            sigma_db: 0.0,
        }
    }

    pub fn mu_ln(&self) -> f64 {
        self.mu_db / XI
    }

    pub fn sigma_ln(&self) -> f64 {
        self.sigma_db / XI
    }

    /// `E[X^n]`.
    pub fn moment(&self, n: u32) -> f64 {
        lognormal_moment(self, n)
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let s2 = self.sigma_ln().powi(2);
        (s2.exp() - 1.0) * (2.0 * self.mu_ln() + s2).exp()
    }
}

/// Raw moment `E[X^n] = exp(n mu + n^2 sigma^2 / 2)` in natural-log units.
pub fn lognormal_moment(p: &LognormalParams, n: u32) -> f64 {
    let n = n as f64;
    (n * p.mu_ln() + 0.5 * n * n * p.sigma_ln().powi(2)).exp()
}

/// Nakagami shape and shadowing statistics of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeFadingParams {
    /// Nakagami shape; `f64::INFINITY` disables multipath fading.
    pub m: f64,
    pub mu_omega_db: f64,
    pub sigma_omega_db: f64,
}

impl CompositeFadingParams {
    pub fn new(m: f64, mu_omega_db: f64, sigma_omega_db: f64) -> Result<Self> {
        let params = Self {
            m,
            mu_omega_db,
            sigma_omega_db,
        };
        params.validate()?;
        Ok(params)
    }

    /// Pure Nakagami-m without shadowing.
    pub fn nakagami(m: f64) -> Result<Self> {
        Self::new(m, 0.0, 0.0)
    }

    /// A channel that always has unit gain.
    pub fn none() -> Self {
        Self {
            m: f64::INFINITY,
            mu_omega_db: 0.0,
            sigma_omega_db: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m >= 0.5) {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("Nakagami shape must be >= 0.5, got {}", self.m),
            });
        }
        if !(self.sigma_omega_db >= 0.0) || !self.sigma_omega_db.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sigma_omega_db",
                reason: format!("must be finite and >= 0, got {}", self.sigma_omega_db),
            });
        }
        if !self.mu_omega_db.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mu_omega_db",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }

    /// Exact `E[X^n]` of the Gamma x lognormal product.
    pub fn exact_moment(&self, n: u32) -> f64 {
        let gamma_part = if self.m.is_infinite() {
            1.0
        } else {
            (0..n).map(|i| (self.m + i as f64) / self.m).product()
        };
        let shadow = LognormalParams {
            mu_db: self.mu_omega_db,
            sigma_db: self.sigma_omega_db,
        };
        gamma_part * shadow.moment(n)
    }

    pub fn sampler(&self) -> CompositeSampler {
        let gamma = self
            .m
            .is_finite()
            .then(|| Gamma::new(self.m, 1.0 / self.m).expect("validated shape"));
        let shadow = (self.sigma_omega_db > 0.0).then(|| {
            Normal::new(self.mu_omega_db / XI, self.sigma_omega_db / XI).expect("validated sigma")
        });
        CompositeSampler {
            gamma,
            shadow,
            shadow_const: (self.mu_omega_db / XI).exp(),
        }
    }
}

/// Log-domain moment matching of the composite channel.
pub fn composite_to_lognormal(f: &CompositeFadingParams) -> Result<LognormalParams> {
    f.validate()?;
    let (mu_fading, var_fading) = if f.m.is_infinite() {
        (0.0, 0.0)
    } else {
        (
            XI * (digamma(f.m)? - f.m.ln()),
            XI * XI * hurwitz_zeta2(f.m)?,
        )
    };
    Ok(LognormalParams {
        mu_db: mu_fading + f.mu_omega_db,
        sigma_db: (var_fading + f.sigma_omega_db.powi(2)).sqrt(),
    })
}

/// Draws of the composite squared envelope.
#[derive(Debug, Clone)]
pub struct CompositeSampler {
    gamma: Option<Gamma<f64>>,
    shadow: Option<Normal<f64>>,
    shadow_const: f64,
}

impl Distribution<f64> for CompositeSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let fast = self.gamma.as_ref().map_or(1.0, |g| g.sample(rng));
        let slow = self
            .shadow
            .as_ref()
            .map_or(self.shadow_const, |n| n.sample(rng).exp());
        fast * slow
    }
}

/// One draw of the composite squared envelope.
pub fn sample_composite<R: Rng + ?Sized>(f: &CompositeFadingParams, rng: &mut R) -> f64 {
    f.sampler().sample(rng)
}
