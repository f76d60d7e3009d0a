//! Desired-link power, SIR law and outage.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::fading::{composite_to_lognormal, CompositeFadingParams, LognormalParams};
use crate::interference::{cumulants_to_lognormal, single_tx_cumulants, AnnulusField};
use crate::Result;

/// Convert a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Transmitter at a known distance from the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub distance_m: f64,
    pub alpha: f64,
    pub fading: CompositeFadingParams,
}

/// SIR in dB, normally distributed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirDistribution {
    pub mu_db: f64,
    pub sigma_db: f64,
}

/// Received power law (dBW) of a link with deterministic distance.
pub fn fixed_link_power(lb: &LinkBudget) -> Result<LognormalParams> {
    if !(lb.distance_m > 0.0) {
        return Err(crate::Error::InvalidParameter {
            name: "distance_m",
            reason: format!("must be positive, got {}", lb.distance_m),
        });
    }
    if !(lb.alpha > 0.0) {
        return Err(crate::Error::InvalidParameter {
            name: "alpha",
            reason: format!("must be positive, got {}", lb.alpha),
        });
    }
    let fading = composite_to_lognormal(&lb.fading)?;
    Ok(LognormalParams {
        mu_db: lb.tx_power_dbm - 30.0 - 10.0 * lb.alpha * lb.distance_m.log10() + fading.mu_db,
        sigma_db: fading.sigma_db,
    })
}

/// Received power law (dBW) from a transmitter placed uniformly in the annulus.
pub fn random_link_power(field: &AnnulusField) -> Result<LognormalParams> {
    cumulants_to_lognormal(&single_tx_cumulants(field, 2)?)
}

/// Standard normal tail `Pr[Z > x]`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Ratio of two independent lognormals, in dB.
pub fn sir_distribution(desired: &LognormalParams, interference: &LognormalParams) -> SirDistribution {
    SirDistribution {
        mu_db: desired.mu_db - interference.mu_db,
        sigma_db: desired.sigma_db.hypot(interference.sigma_db),
    }
}

/// `Pr[SIR < gamma_th]`.
pub fn outage_probability(sir: &SirDistribution, gamma_th_db: f64) -> f64 {
    let margin = sir.mu_db - gamma_th_db;
    if sir.sigma_db == 0.0 {
        return match margin.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => 0.0,
            Some(std::cmp::Ordering::Less) => 1.0,
            _ => 0.5,
        };
    }
    q_function(margin / sir.sigma_db)
}

/// `1 - outage`, computed from the same tail so the two sum to one exactly.
pub fn success_probability(sir: &SirDistribution, gamma_th_db: f64) -> f64 {
    1.0 - outage_probability(sir, gamma_th_db)
}
