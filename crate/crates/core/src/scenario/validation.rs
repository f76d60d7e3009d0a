//! Analytical results against their sampling counterparts.

use serde::{Deserialize, Serialize};

use super::{build_model, evaluate_point, linspace, ScenarioConfig};
use crate::contention::PgfTable;
use crate::interference::{ppp_field_cumulants, DEFAULT_ORDER};
use crate::link::outage_probability;
use crate::montecarlo::{conditional_interference, outage_curve, sample_sir_db, Link, SampleMoments};
use crate::semimarkov::{simulate_chain, RelayStrategy};
use crate::{stream_rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative error of the aggregate-interference mean and variance.
    pub cumulant: f64,
    /// Absolute error of outage probabilities.
    pub outage: f64,
    /// Relative error of the simulated throughput.
    pub eta: f64,
    /// Relative error of the simulated selection delays.
    pub cri: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cumulant: 0.02,
            outage: 0.02,
            eta: 0.01,
            cri: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationPlan {
    /// Deployments drawn for the interference and outage checks.
    pub trials: u64,
    pub tree_runs: u64,
    pub chain_steps: u64,
    pub gammas_db: Vec<f64>,
    pub tolerances: Tolerances,
}

impl ValidationPlan {
    pub fn new(trials: u64) -> Self {
        Self {
            trials,
            tree_runs: 1_000_000,
            chain_steps: 1_000_000,
            gammas_db: linspace(-10.0, 20.0, 31),
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub analytical: f64,
    pub empirical: f64,
    /// Relative or absolute, as the tolerance it is compared with.
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn relative(name: impl Into<String>, analytical: f64, empirical: f64, tolerance: f64) -> Self {
        let error = (empirical / analytical - 1.0).abs();
        Self::new(name, analytical, empirical, error, tolerance)
    }

    fn new(name: impl Into<String>, analytical: f64, empirical: f64, error: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            analytical,
            empirical,
            error,
            tolerance,
            passed: error < tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Runs every oracle with the default plan and `trials` deployments.
pub fn validate(cfg: &ScenarioConfig, trials: u64) -> Result<ValidationReport> {
    validate_with(cfg, &ValidationPlan::new(trials))
}

pub fn validate_with(cfg: &ScenarioConfig, plan: &ValidationPlan) -> Result<ValidationReport> {
    for (name, v) in [
        ("trials", plan.trials),
        ("tree_runs", plan.tree_runs),
        ("chain_steps", plan.chain_steps),
    ] {
        if v == 0 {
            return Err(Error::InvalidParameter {
                name,
                reason: "must be at least 1".into(),
            });
        }
    }
    let tol = plan.tolerances;
    let result = evaluate_point(cfg)?;
    let mut checks = Vec::new();

    let field = cfg.bs_field();
    if field.lambda > 0.0 {
        let kappa = ppp_field_cumulants(&field, DEFAULT_ORDER)?;
        let est = conditional_interference(&field, plan.trials, &mut stream_rng(cfg.seed, 1))?;
        checks.push(Check::relative("interference_mean", kappa.mean(), est.mean, tol.cumulant));
        checks.push(Check::relative(
            "interference_variance",
            kappa.variance(),
            est.variance,
            tol.cumulant,
        ));
    }

    let links = [
        (Link::SourceDestination, "outage_sd", &result.diagnostics.sd_sir, 2),
        (Link::SourceRelay, "outage_sr", &result.diagnostics.sr_sir, 3),
    ];
    for (link, name, sir, stream) in links {
        let sampled = sample_sir_db(cfg, link, plan.trials, &mut stream_rng(cfg.seed, stream))?;
        let empirical = outage_curve(&sampled, &plan.gammas_db);
        let (mut worst, mut at) = (0.0, (0.0, 0.0));
        for (&g, &e) in plan.gammas_db.iter().zip(&empirical) {
            let a = sir.as_ref().map_or(0.0, |s| outage_probability(s, g));
            if (a - e).abs() >= worst {
                worst = (a - e).abs();
                at = (a, e);
            }
        }
        checks.push(Check::new(name, at.0, at.1, worst, tol.outage));
    }

    let table = PgfTable::new(cfg.contenders, cfg.l_max)?;
    let (mut cri, mut tagged) = (SampleMoments::default(), SampleMoments::default());
    let mut rng = stream_rng(cfg.seed, 4);
    for _ in 0..plan.tree_runs {
        let run = crate::contention::simulate_tree(cfg.contenders, &mut rng)?;
        cri.push(run.cri_length as f64);
        tagged.push(run.tagged_delay as f64);
    }
    checks.push(Check::relative(
        "cri_mean",
        table.cri(cfg.contenders)?.mean()?,
        cri.mean,
        tol.cri,
    ));
    checks.push(Check::relative(
        "tagged_delay_mean",
        table.tagged(cfg.contenders)?.mean()?,
        tagged.mean,
        tol.cri,
    ));

    let model = build_model(cfg, result.p_sd, result.p_sr, result.mean_selection_slots)?;
    let selection = (cfg.strategy == RelayStrategy::Reactive).then(|| table.tagged(cfg.contenders)).transpose()?;
    let chain = simulate_chain(&model, selection, plan.chain_steps, &mut stream_rng(cfg.seed, 5))?;
    checks.push(Check::relative("chain_eta", result.eta, chain.eta, tol.eta));

    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport {
        seed: cfg.seed,
        checks,
        passed,
    })
}
