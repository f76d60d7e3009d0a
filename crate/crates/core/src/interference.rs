//! Cumulants of received and aggregate interference power.
//!
//! Three sources feed the receiver of interest:
//!
//! - one transmitter placed uniformly at random in an annulus around the
//!   receiver ([`single_tx_cumulants`]),
//! - a homogeneous Poisson field of transmitters restricted to the same
//!   annulus ([`ppp_field_cumulants`], by Campbell's theorem),
//! - the receiver's own attenuated transmit signal when it runs full duplex
//!   ([`self_interference_cumulants`]).
//!
//! Independent sources combine through [`add_cumulants`], and the total is
//! mapped onto a lognormal by matching its first two cumulants.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::fading::{composite_to_lognormal, CompositeFadingParams, LognormalParams};
use crate::{Error, Result};

/// Default number of cumulants; lognormal matching only needs two.
pub const DEFAULT_ORDER: usize = 2;

/// `kappa[0]` holds the first cumulant (mean), `kappa[1]` the variance, etc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantVector {
    pub kappa: Vec<f64>,
}

impl CumulantVector {
    pub fn new(kappa: Vec<f64>) -> Result<Self> {
        if kappa.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: format!("need at least two cumulants, got {}", kappa.len()),
            });
        }
        Ok(Self { kappa })
    }

    pub fn zeros(n_max: usize) -> Self {
        Self {
            kappa: vec![0.0; n_max.max(2)],
        }
    }

    /// Cumulant of order `n` (1-based).
    pub fn order(&self, n: usize) -> f64 {
        self.kappa[n - 1]
    }

    pub fn mean(&self) -> f64 {
        self.kappa[0]
    }

    pub fn variance(&self) -> f64 {
        self.kappa[1]
    }

    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }
}

/// Transmitters of one tier around a receiver at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusField {
    /// Intensity in nodes per square meter.
    pub lambda: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub alpha: f64,
    /// Transmit power in watts.
    pub tx_power: f64,
    pub fading: CompositeFadingParams,
}

impl AnnulusField {
    pub fn validate(&self) -> Result<()> {
        if self.r_min == self.r_max {
            return Err(Error::DegenerateAnnulus(self.r_min));
        }
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "r_min/r_max",
                reason: format!("need 0 < r_min < r_max, got ({}, {})", self.r_min, self.r_max),
            });
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("must be finite and >= 0, got {}", self.lambda),
            });
        }
        if !(self.tx_power > 0.0) || !self.tx_power.is_finite() {
            return Err(Error::InvalidParameter {
                name: "tx_power",
                reason: format!("must be positive, got {}", self.tx_power),
            });
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("must be positive, got {}", self.alpha),
            });
        }
        self.fading.validate()
    }

    pub fn area(&self) -> f64 {
        PI * (self.r_max * self.r_max - self.r_min * self.r_min)
    }

    /// Mean number of transmitters in the annulus.
    pub fn mean_count(&self) -> f64 {
        self.lambda * self.area()
    }

    /// `int_{r_min}^{r_max} r^{1 - n alpha} dr`.
    fn radial_integral(&self, n: usize) -> Result<f64> {
        let exponent = 2.0 - n as f64 * self.alpha;
        if exponent == 0.0 {
            return Err(Error::Singularity { order: n });
        }
        Ok((self.r_min.powf(exponent) - self.r_max.powf(exponent)) / -exponent)
    }

    /// `E[X^n]` of the lognormal that stands in for the fading.
    fn fading_moment(&self, n: usize) -> Result<f64> {
        Ok(composite_to_lognormal(&self.fading)?.moment(n as u32))
    }
}

/// Residual self-interference of a full-duplex node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfInterference {
    /// Own transmit power in watts.
    pub tx_power: f64,
    /// Cancellation depth in dB; `f64::INFINITY` means perfect cancellation.
    pub attenuation_db: f64,
    pub fading: CompositeFadingParams,
}

impl SelfInterference {
    /// Line-of-sight leakage channel: Nakagami m = 16, no shadowing.
    pub fn with_default_channel(tx_power: f64, attenuation_db: f64) -> Self {
        Self {
            tx_power,
            attenuation_db,
            fading: CompositeFadingParams {
                m: 16.0,
                mu_omega_db: 0.0,
                sigma_omega_db: 0.0,
            },
        }
    }

    /// Linear attenuation factor.
    pub fn delta(&self) -> f64 {
        10f64.powf(-self.attenuation_db / 10.0)
    }

    fn validate(&self) -> Result<()> {
        if !(self.attenuation_db >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "attenuation_db",
                reason: format!("must be >= 0, got {}", self.attenuation_db),
            });
        }
        if !(self.tx_power > 0.0) || !self.tx_power.is_finite() {
            return Err(Error::InvalidParameter {
                name: "tx_power",
                reason: format!("must be positive, got {}", self.tx_power),
            });
        }
        self.fading.validate()
    }
}

/// Moment-to-cumulant recursion
/// `k_n = m_n - sum_{k=1}^{n-1} C(n-1, k-1) k_k m_{n-k}`.
pub fn moments_to_cumulants(moments: &[f64]) -> Result<CumulantVector> {
    if moments.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "moments",
            reason: format!("need at least two moments, got {}", moments.len()),
        });
    }
    let mut kappa = Vec::with_capacity(moments.len());
    for n in 1..=moments.len() {
        let mut binom = 1.0; // C(n-1, k-1), starting at k = 1
        let mut acc = moments[n - 1];
        for k in 1..n {
            acc -= binom * kappa[k - 1] * moments[n - k - 1];
            binom *= (n - k) as f64 / k as f64;
        }
        kappa.push(acc);
    }
    Ok(CumulantVector { kappa })
}

/// Raw moments `E[Y^n]` of the power received from one uniformly placed
/// transmitter, `Y = p R^-alpha X`.
pub fn single_tx_moments(field: &AnnulusField, n_max: usize) -> Result<Vec<f64>> {
    field.validate()?;
    let norm = 2.0 / (field.r_max * field.r_max - field.r_min * field.r_min);
    (1..=n_max.max(2))
        .map(|n| {
            Ok(field.tx_power.powi(n as i32)
                * norm
                * field.radial_integral(n)?
                * field.fading_moment(n)?)
        })
        .collect()
}

/// Cumulants of the power from one transmitter at a uniform random position
/// in the annulus. The field intensity is ignored.
pub fn single_tx_cumulants(field: &AnnulusField, n_max: usize) -> Result<CumulantVector> {
    moments_to_cumulants(&single_tx_moments(field, n_max)?)
}

/// Cumulants of the aggregate power of a Poisson field of transmitters.
pub fn ppp_field_cumulants(field: &AnnulusField, n_max: usize) -> Result<CumulantVector> {
    field.validate()?;
    let kappa = (1..=n_max.max(2))
        .map(|n| {
            Ok(2.0
                * PI
                * field.lambda
                * field.tx_power.powi(n as i32)
                * field.radial_integral(n)?
                * field.fading_moment(n)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CumulantVector { kappa })
}

/// Cumulants of `delta * p * x` for the self-interference leakage.
pub fn self_interference_cumulants(si: &SelfInterference, n_max: usize) -> Result<CumulantVector> {
    si.validate()?;
    let scale = si.delta() * si.tx_power;
    if scale == 0.0 {
        return Ok(CumulantVector::zeros(n_max));
    }
    let x = composite_to_lognormal(&si.fading)?;
    let moments: Vec<f64> = (1..=n_max.max(2))
        .map(|n| scale.powi(n as i32) * x.moment(n as u32))
        .collect();
    moments_to_cumulants(&moments)
}

/// Cumulants of a sum of independent power terms.
pub fn add_cumulants(a: &CumulantVector, b: &CumulantVector) -> Result<CumulantVector> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(CumulantVector {
        kappa: a.kappa.iter().zip(&b.kappa).map(|(x, y)| x + y).collect(),
    })
}

/// Lognormal with the same mean and variance as the cumulant vector.
pub fn cumulants_to_lognormal(kappa: &CumulantVector) -> Result<LognormalParams> {
    let (k1, k2) = (kappa.mean(), kappa.variance());
    if !(k1 > 0.0) {
        return Err(Error::MatchingUndefined(k1));
    }
    if !(k2 >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "kappa_2",
            reason: format!("variance must be >= 0, got {k2}"),
        });
    }
    let ratio = k2 / (k1 * k1);
    let sigma2 = ratio.ln_1p();
    let mu = k1.ln() - 0.5 * sigma2;
    Ok(LognormalParams::from_ln(mu, sigma2.sqrt()))
}
