//! Evaluation scenarios: half- or full-duplex nodes, fixed or reactive relay.
//!
//! A point evaluation builds the interference law at the receivers, turns it
//! into success probabilities of the source-destination and source-relay
//! links, prices relay selection with the splitting-tree delay, and feeds all
//! of it to the semi-Markov throughput model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contention::{PgfTable, DEFAULT_L_MAX};
use crate::fading::{CompositeFadingParams, LognormalParams};
use crate::interference::{
    add_cumulants, cumulants_to_lognormal, ppp_field_cumulants, self_interference_cumulants,
    AnnulusField, CumulantVector, SelfInterference, DEFAULT_ORDER,
};
use crate::link::{
    dbm_to_watts, fixed_link_power, outage_probability, random_link_power, sir_distribution, LinkBudget,
    SirDistribution,
};
use crate::semimarkov::{
    analytical_throughput, build_reward, build_transition, holding_with_extra, Duplex, RelayStrategy,
    SemiMarkovModel,
};
use crate::{Error, Result};

mod validation;
pub use validation::{validate, validate_with, Check, Tolerances, ValidationPlan, ValidationReport};

/// Full description of one evaluation point. `Default` gives the reference
/// deployment: 5e-5 nodes/m^2 between 25 and 500 m, path-loss exponent 3,
/// Nakagami m = 16 with 10 dB shadowing, 30 dBm everywhere, 50 m between
/// source and destination and three contending relays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub duplex: Duplex,
    pub strategy: RelayStrategy,
    pub sd_distance_m: f64,
    /// Fixed relay position; `None` puts it halfway to the destination.
    pub sr_distance_m: Option<f64>,
    /// Inner radius of the region where reactive relays are drawn.
    pub relay_annulus_min_m: f64,
    /// Outer radius; `None` uses the source-destination distance.
    pub relay_annulus_max_m: Option<f64>,
    pub source_power_dbm: f64,
    pub interferer_power_dbm: f64,
    /// UE-tier transmit power in full duplex; `None` uses the source power.
    pub ue_power_dbm: Option<f64>,
    /// UE-tier intensity in full duplex; `None` uses `lambda`.
    pub ue_lambda: Option<f64>,
    pub si_attenuation_db: f64,
    pub si_nakagami_m: f64,
    pub gamma_th_db: f64,
    /// Relays taking part in a selection round.
    pub contenders: usize,
    pub lambda: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub alpha: f64,
    /// Fading of every link except self-interference.
    pub fading: CompositeFadingParams,
    pub l_max: usize,
    /// Extra slots charged when a fixed relay is used.
    pub fixed_relay_overhead_slots: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            duplex: Duplex::Hd,
            strategy: RelayStrategy::Fixed,
            sd_distance_m: 50.0,
            sr_distance_m: None,
            relay_annulus_min_m: 1.0,
            relay_annulus_max_m: None,
            source_power_dbm: 30.0,
            interferer_power_dbm: 30.0,
            ue_power_dbm: None,
            ue_lambda: None,
            si_attenuation_db: 100.0,
            si_nakagami_m: 16.0,
            gamma_th_db: 0.0,
            contenders: 3,
            lambda: 5e-5,
            r_min: 25.0,
            r_max: 500.0,
            alpha: 3.0,
            fading: CompositeFadingParams {
                m: 16.0,
                mu_omega_db: 0.0,
                sigma_omega_db: 10.0,
            },
            l_max: DEFAULT_L_MAX,
            fixed_relay_overhead_slots: 0.0,
            seed: 1,
        }
    }
}

fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

impl ScenarioConfig {
    pub fn with(mut self, duplex: Duplex, strategy: RelayStrategy) -> Self {
        self.duplex = duplex;
        self.strategy = strategy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sd_distance_m > 0.0) {
            return Err(invalid("sd_distance_m", "must be positive"));
        }
        if let Some(d) = self.sr_distance_m {
            if !(d > 0.0) {
                return Err(invalid("sr_distance_m", "must be positive"));
            }
        }
        if !(self.relay_annulus_min_m > 0.0 && self.relay_annulus_min_m < self.relay_annulus_max()) {
            return Err(invalid(
                "relay_annulus_min_m",
                "need 0 < relay_annulus_min_m < relay_annulus_max_m",
            ));
        }
        if self.contenders < 1 {
            return Err(invalid("contenders", "at least one relay must contend"));
        }
        if !(self.alpha > 2.0) {
            return Err(invalid("alpha", format!("must exceed 2, got {}", self.alpha)));
        }
        if !(self.si_attenuation_db >= 0.0) {
            return Err(invalid("si_attenuation_db", "must be >= 0"));
        }
        if !(self.fixed_relay_overhead_slots >= 0.0) {
            return Err(invalid("fixed_relay_overhead_slots", "must be >= 0"));
        }
        if self.ue_lambda.is_some_and(|l| !(l >= 0.0)) {
            return Err(invalid("ue_lambda", "must be >= 0"));
        }
        self.fading.validate()?;
        CompositeFadingParams::nakagami(self.si_nakagami_m)?;
        self.bs_field().validate()
    }

    pub fn sr_distance(&self) -> f64 {
        self.sr_distance_m.unwrap_or(self.sd_distance_m / 2.0)
    }

    pub fn relay_annulus_max(&self) -> f64 {
        self.relay_annulus_max_m.unwrap_or(self.sd_distance_m)
    }

    /// Interfering base stations.
    pub fn bs_field(&self) -> AnnulusField {
        AnnulusField {
            lambda: self.lambda,
            r_min: self.r_min,
            r_max: self.r_max,
            alpha: self.alpha,
            tx_power: dbm_to_watts(self.interferer_power_dbm),
            fading: self.fading,
        }
    }

    /// Interfering user terminals, present only in full duplex.
    pub fn ue_field(&self) -> Option<AnnulusField> {
        (self.duplex == Duplex::Fd).then(|| AnnulusField {
            lambda: self.ue_lambda.unwrap_or(self.lambda),
            tx_power: dbm_to_watts(self.ue_power_dbm.unwrap_or(self.source_power_dbm)),
            ..self.bs_field()
        })
    }

    /// Residual leakage of a full-duplex receiver's own transmission.
    pub fn self_interference(&self) -> Option<SelfInterference> {
        (self.duplex == Duplex::Fd).then(|| SelfInterference {
            tx_power: dbm_to_watts(self.source_power_dbm),
            attenuation_db: self.si_attenuation_db,
            fading: CompositeFadingParams {
                m: self.si_nakagami_m,
                mu_omega_db: 0.0,
                sigma_omega_db: 0.0,
            },
        })
    }

    /// Region where a reactive relay is drawn, as a single-transmitter field.
    pub fn relay_field(&self) -> AnnulusField {
        AnnulusField {
            lambda: 0.0,
            r_min: self.relay_annulus_min_m,
            r_max: self.relay_annulus_max(),
            alpha: self.alpha,
            tx_power: dbm_to_watts(self.source_power_dbm),
            fading: self.fading,
        }
    }

    pub fn link_budget(&self, distance_m: f64) -> LinkBudget {
        LinkBudget {
            tx_power_dbm: self.source_power_dbm,
            distance_m,
            alpha: self.alpha,
            fading: self.fading,
        }
    }

    pub fn sd_power(&self) -> Result<LognormalParams> {
        fixed_link_power(&self.link_budget(self.sd_distance_m))
    }

    pub fn sr_power(&self) -> Result<LognormalParams> {
        match self.strategy {
            RelayStrategy::Fixed => fixed_link_power(&self.link_budget(self.sr_distance())),
            RelayStrategy::Reactive => random_link_power(&self.relay_field()),
        }
    }

    /// Cumulants of each interference source at a receiver.
    pub fn interference_terms(&self) -> Result<InterferenceTerms> {
        let bs_tier = ppp_field_cumulants(&self.bs_field(), DEFAULT_ORDER)?;
        let ue_tier = self
            .ue_field()
            .map(|f| ppp_field_cumulants(&f, DEFAULT_ORDER))
            .transpose()?;
        let self_interference = self
            .self_interference()
            .map(|si| self_interference_cumulants(&si, DEFAULT_ORDER))
            .transpose()?;
        let mut aggregate = bs_tier.clone();
        for term in ue_tier.iter().chain(&self_interference) {
            aggregate = add_cumulants(&aggregate, term)?;
        }
        Ok(InterferenceTerms {
            bs_tier,
            ue_tier,
            self_interference,
            aggregate,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceTerms {
    pub bs_tier: CumulantVector,
    pub ue_tier: Option<CumulantVector>,
    pub self_interference: Option<CumulantVector>,
    pub aggregate: CumulantVector,
}

impl InterferenceTerms {
    /// Matched lognormal, `None` when nothing interferes.
    pub fn lognormal(&self) -> Result<Option<LognormalParams>> {
        if self.aggregate.mean() == 0.0 {
            return Ok(None);
        }
        cumulants_to_lognormal(&self.aggregate).map(Some)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub interference: InterferenceTerms,
    pub interference_lognormal: Option<LognormalParams>,
    pub sd_power: LognormalParams,
    pub sr_power: LognormalParams,
    pub sd_sir: Option<SirDistribution>,
    pub sr_sir: Option<SirDistribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub duplex: Duplex,
    pub strategy: RelayStrategy,
    pub p_sd: f64,
    pub p_sr: f64,
    pub mean_selection_slots: f64,
    pub eta: f64,
    pub diagnostics: Diagnostics,
}

fn link_success(
    desired: &LognormalParams,
    interference: Option<&LognormalParams>,
    gamma_th_db: f64,
) -> (f64, Option<SirDistribution>) {
    match interference {
        None => (1.0, None),
        Some(i) => {
            let sir = sir_distribution(desired, i);
            (1.0 - outage_probability(&sir, gamma_th_db), Some(sir))
        }
    }
}

/// Mean tagged-node delay of a selection round among `cfg.contenders`.
pub fn mean_selection_slots(cfg: &ScenarioConfig) -> Result<f64> {
    PgfTable::new(cfg.contenders, cfg.l_max)?
        .tagged(cfg.contenders)?
        .mean()
}

/// Semi-Markov model of the configuration given link success probabilities.
pub fn build_model(cfg: &ScenarioConfig, p_sd: f64, p_sr: f64, mean_selection: f64) -> Result<SemiMarkovModel> {
    let extra = match cfg.strategy {
        RelayStrategy::Fixed => cfg.fixed_relay_overhead_slots,
        RelayStrategy::Reactive => mean_selection,
    };
    SemiMarkovModel::new(
        build_transition(p_sd, p_sr)?,
        holding_with_extra(extra)?,
        build_reward(cfg.duplex),
    )
}

fn evaluate_with(cfg: &ScenarioConfig, reactive_selection: f64) -> Result<ScenarioResult> {
    cfg.validate()?;
    let interference = cfg.interference_terms()?;
    let interference_lognormal = interference.lognormal()?;
    let sd_power = cfg.sd_power()?;
    let sr_power = cfg.sr_power()?;
    let (p_sd, sd_sir) = link_success(&sd_power, interference_lognormal.as_ref(), cfg.gamma_th_db);
    let (p_sr, sr_sir) = link_success(&sr_power, interference_lognormal.as_ref(), cfg.gamma_th_db);
    let mean_selection = match cfg.strategy {
        RelayStrategy::Fixed => 0.0,
        RelayStrategy::Reactive => reactive_selection,
    };
    let eta = analytical_throughput(&build_model(cfg, p_sd, p_sr, mean_selection)?)?;
    Ok(ScenarioResult {
        duplex: cfg.duplex,
        strategy: cfg.strategy,
        p_sd,
        p_sr,
        mean_selection_slots: mean_selection,
        eta,
        diagnostics: Diagnostics {
            interference,
            interference_lognormal,
            sd_power,
            sr_power,
            sd_sir,
            sr_sir,
        },
    })
}

/// Analytical throughput of one configuration.
pub fn evaluate_point(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    let selection = match cfg.strategy {
        RelayStrategy::Fixed => 0.0,
        RelayStrategy::Reactive => mean_selection_slots(cfg)?,
    };
    evaluate_with(cfg, selection)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    SdDistance,
    SourcePower,
    SiAttenuation,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::SdDistance => "sd_distance",
            SweepParam::SourcePower => "source_power",
            SweepParam::SiAttenuation => "si_attenuation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sd_distance" => Some(SweepParam::SdDistance),
            "source_power" => Some(SweepParam::SourcePower),
            "si_attenuation" => Some(SweepParam::SiAttenuation),
            _ => None,
        }
    }

    pub fn apply(&self, cfg: &mut ScenarioConfig, value: f64) {
        match self {
            SweepParam::SdDistance => cfg.sd_distance_m = value,
            SweepParam::SourcePower => cfg.source_power_dbm = value,
            SweepParam::SiAttenuation => cfg.si_attenuation_db = value,
        }
    }

    /// Default grid: 10-100 m, 0-40 dBm, 120 down to 40 dB.
    pub fn default_grid(&self) -> Vec<f64> {
        match self {
            SweepParam::SdDistance => linspace(10.0, 100.0, 10),
            SweepParam::SourcePower => linspace(0.0, 40.0, 9),
            SweepParam::SiAttenuation => linspace(120.0, 40.0, 17),
        }
    }
}

/// `steps` evenly spaced values from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_param: SweepParam,
    pub value: f64,
    pub duplex: Duplex,
    pub strategy: RelayStrategy,
    pub p_sd: f64,
    pub p_sr: f64,
    pub mean_cri: f64,
    pub eta: f64,
}

/// Evaluates every (duplex, strategy) combination at each grid value.
///
/// Rows come out in grid order, then HD before FD, fixed before reactive.
pub fn sweep(cfg: &ScenarioConfig, param: SweepParam, grid: &[f64]) -> Result<Vec<SweepRow>> {
    sweep_combinations(cfg, param, grid, &Duplex::ALL, &RelayStrategy::ALL)
}

pub fn sweep_combinations(
    cfg: &ScenarioConfig,
    param: SweepParam,
    grid: &[f64],
    duplexes: &[Duplex],
    strategies: &[RelayStrategy],
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(invalid("grid", "sweep grid is empty"));
    }
    let ascending = grid.windows(2).all(|w| w[0] < w[1]);
    let descending = grid.windows(2).all(|w| w[0] > w[1]);
    if !(ascending || descending) {
        return Err(invalid("grid", "sweep grid must be strictly monotone"));
    }
    let selection = mean_selection_slots(cfg)?;
    let per_point: Vec<Vec<SweepRow>> = grid
        .par_iter()
        .map(|&value| {
            let mut rows = Vec::with_capacity(duplexes.len() * strategies.len());
            for &duplex in duplexes {
                for &strategy in strategies {
                    let mut point = cfg.clone().with(duplex, strategy);
                    param.apply(&mut point, value);
                    let r = evaluate_with(&point, selection)?;
                    rows.push(SweepRow {
                        sweep_param: param,
                        value,
                        duplex,
                        strategy,
                        p_sd: r.p_sd,
                        p_sr: r.p_sr,
                        mean_cri: r.mean_selection_slots,
                        eta: r.eta,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contention::tagged_pgf;
    use crate::interference::single_tx_cumulants;
    use approx::assert_abs_diff_eq;

    #[test]
    fn defaults_are_the_reference_deployment() {
        let cfg = ScenarioConfig::default();
        cfg.validate().unwrap();
        assert_abs_diff_eq!(cfg.bs_field().mean_count(), 39.17, epsilon = 0.01);
        assert_eq!(cfg.bs_field().tx_power, 1.0);
        assert_eq!(cfg.sr_distance(), 25.0);
        assert_eq!(cfg.relay_annulus_max(), 50.0);
    }

    #[test]
    fn empty_field_delivers_every_slot() {
        for strategy in RelayStrategy::ALL {
            for d in [10.0, 200.0] {
                let cfg = ScenarioConfig {
                    lambda: 0.0,
                    sd_distance_m: d,
                    ..ScenarioConfig::default().with(Duplex::Hd, strategy)
                };
                let r = evaluate_point(&cfg).unwrap();
                assert_eq!(r.p_sd, 1.0);
                assert_abs_diff_eq!(r.eta, 1.0, epsilon = 1e-12);
                assert!(r.diagnostics.sd_sir.is_none());
            }
        }
    }

    #[test]
    fn diagnostics_reproducible_from_modules() {
        let cfg = ScenarioConfig::default().with(Duplex::Fd, RelayStrategy::Reactive);
        let r = evaluate_point(&cfg).unwrap();
        let d = &r.diagnostics;
        assert_eq!(d.interference.bs_tier, ppp_field_cumulants(&cfg.bs_field(), 2).unwrap());
        assert_eq!(
            d.interference.self_interference.as_ref().unwrap(),
            &self_interference_cumulants(&cfg.self_interference().unwrap(), 2).unwrap()
        );
        assert_eq!(d.sr_power, random_link_power(&cfg.relay_field()).unwrap());
        assert_eq!(
            d.sr_power,
            cumulants_to_lognormal(&single_tx_cumulants(&cfg.relay_field(), 2).unwrap()).unwrap()
        );
        assert_eq!(d.sd_power, fixed_link_power(&cfg.link_budget(50.0)).unwrap());
        assert_eq!(
            r.mean_selection_slots,
            tagged_pgf(3, DEFAULT_L_MAX).unwrap().mean().unwrap()
        );
        let sir = sir_distribution(&d.sd_power, d.interference_lognormal.as_ref().unwrap());
        assert_eq!(r.p_sd, 1.0 - outage_probability(&sir, cfg.gamma_th_db));
    }

    #[test]
    fn perfect_cancellation_without_ue_tier_doubles_relay_reward_only() {
        for strategy in RelayStrategy::ALL {
            let base = ScenarioConfig {
                si_attenuation_db: f64::INFINITY,
                ue_lambda: Some(0.0),
                ..ScenarioConfig::default().with(Duplex::Hd, strategy)
            };
            let hd = evaluate_point(&base).unwrap();
            let fd = evaluate_point(&base.clone().with(Duplex::Fd, strategy)).unwrap();
            assert_eq!(hd.p_sd, fd.p_sd);
            assert_eq!(hd.p_sr, fd.p_sr);
            let mut model = build_model(&base, hd.p_sd, hd.p_sr, hd.mean_selection_slots).unwrap();
            model.reward[1][0] = 2.0;
            assert_abs_diff_eq!(fd.eta, analytical_throughput(&model).unwrap(), epsilon = 1e-15);
        }
    }

    #[test]
    fn fixed_overhead_is_charged() {
        let cfg = ScenarioConfig::default();
        let plain = evaluate_point(&cfg).unwrap();
        let charged = evaluate_point(&ScenarioConfig {
            fixed_relay_overhead_slots: 1.0,
            ..cfg
        })
        .unwrap();
        assert!(charged.eta < plain.eta);
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            ScenarioConfig { alpha: 1.5, ..Default::default() },
            ScenarioConfig { contenders: 0, ..Default::default() },
            ScenarioConfig { sd_distance_m: 0.0, ..Default::default() },
            ScenarioConfig { relay_annulus_min_m: 60.0, ..Default::default() },
            ScenarioConfig { si_attenuation_db: -1.0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(evaluate_point(&cfg).is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn sweep_shapes() {
        let cfg = ScenarioConfig::default();
        let rows = sweep(&cfg, SweepParam::SourcePower, &[20.0]).unwrap();
        assert_eq!(rows.len(), 4);
        let rows = sweep(&cfg, SweepParam::SdDistance, &SweepParam::SdDistance.default_grid()).unwrap();
        assert_eq!(rows.len(), 40);
        assert!(rows.windows(2).all(|w| w[0].value <= w[1].value));
        assert!(sweep(&cfg, SweepParam::SdDistance, &[]).is_err());
        assert!(sweep(&cfg, SweepParam::SdDistance, &[10.0, 30.0, 20.0]).is_err());
        assert!(sweep(&cfg, SweepParam::SiAttenuation, &[120.0, 80.0]).is_ok());
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 40.0, 9)[8], 40.0);
        assert_eq!(linspace(120.0, 40.0, 17)[1], 115.0);
        assert_eq!(linspace(5.0, 9.0, 1), vec![5.0]);
    }
}
