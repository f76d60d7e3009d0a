//! Run files and the text outputs of the `fdrelay` binary.
//!
//! A run file is flat TOML. Every key is optional and falls back to the
//! reference deployment:
//!
//! ```toml
//! duplex = "fd"
//! strategy = "fixed"
//! sweep_param = "si_attenuation"
//! sweep_from = 120.0
//! sweep_to = 40.0
//! sweep_steps = 17
//! ```
//!
//! Sweep CSV columns are `sweep_param,value,duplex,strategy,p_sd,p_sr,mean_cri,eta`,
//! one row per grid value, duplex mode and relay strategy. Floats carry 12
//! significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::contention::PgfTable;
use crate::fading::CompositeFadingParams;
use crate::scenario::{
    evaluate_point, linspace, sweep, validate_with, ScenarioConfig, ScenarioResult, SweepParam, SweepRow,
    ValidationPlan, ValidationReport,
};
use crate::semimarkov::{Duplex, RelayStrategy};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "sweep_param,value,duplex,strategy,p_sd,p_sr,mean_cri,eta";

/// Keys accepted in a run file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub duplex: Option<Duplex>,
    pub strategy: Option<RelayStrategy>,
    pub sd_distance_m: Option<f64>,
    pub sr_distance_m: Option<f64>,
    pub relay_annulus_min_m: Option<f64>,
    pub relay_annulus_max_m: Option<f64>,
    pub source_power_dbm: Option<f64>,
    pub interferer_power_dbm: Option<f64>,
    pub ue_power_dbm: Option<f64>,
    pub ue_lambda: Option<f64>,
    pub si_attenuation_db: Option<f64>,
    pub si_nakagami_m: Option<f64>,
    pub gamma_th_db: Option<f64>,
    pub contenders: Option<usize>,
    pub lambda: Option<f64>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub alpha: Option<f64>,
    pub nakagami_m: Option<f64>,
    pub shadow_mu_db: Option<f64>,
    pub shadow_sigma_db: Option<f64>,
    pub l_max: Option<usize>,
    pub fixed_relay_overhead_slots: Option<f64>,
    pub seed: Option<u64>,

    pub sweep_param: Option<String>,
    pub sweep_from: Option<f64>,
    pub sweep_to: Option<f64>,
    pub sweep_steps: Option<usize>,
    pub out: Option<PathBuf>,

    pub trials: Option<u64>,
    pub tree_runs: Option<u64>,
    pub chain_steps: Option<u64>,
    pub tol_cumulant: Option<f64>,
    pub tol_outage: Option<f64>,
    pub tol_eta: Option<f64>,
    pub tol_cri: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub grid: Vec<f64>,
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub sweep: SweepSpec,
    pub out: Option<PathBuf>,
    pub plan: ValidationPlan,
}

impl Default for RunConfig {
    fn default() -> Self {
        ConfigFile::default().resolve().expect("defaults are valid")
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub param: Option<String>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub steps: Option<usize>,
    pub trials: Option<u64>,
}

impl ConfigFile {
    pub fn apply(&mut self, o: &Overrides) {
        self.seed = o.seed.or(self.seed);
        self.out = o.out.clone().or(self.out.take());
        self.sweep_param = o.param.clone().or(self.sweep_param.take());
        self.sweep_from = o.from.or(self.sweep_from);
        self.sweep_to = o.to.or(self.sweep_to);
        self.sweep_steps = o.steps.or(self.sweep_steps);
        self.trials = o.trials.or(self.trials);
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let d = ScenarioConfig::default();
        if let Some(alpha) = self.alpha {
            if !(alpha > 2.0) {
                return Err(Error::Config(format!("alpha must exceed 2, got {alpha}")));
            }
        }
        let fading = CompositeFadingParams::new(
            self.nakagami_m.unwrap_or(d.fading.m),
            self.shadow_mu_db.unwrap_or(d.fading.mu_omega_db),
            self.shadow_sigma_db.unwrap_or(d.fading.sigma_omega_db),
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        let scenario = ScenarioConfig {
            duplex: self.duplex.unwrap_or(d.duplex),
            strategy: self.strategy.unwrap_or(d.strategy),
            sd_distance_m: self.sd_distance_m.unwrap_or(d.sd_distance_m),
            sr_distance_m: self.sr_distance_m.or(d.sr_distance_m),
            relay_annulus_min_m: self.relay_annulus_min_m.unwrap_or(d.relay_annulus_min_m),
            relay_annulus_max_m: self.relay_annulus_max_m.or(d.relay_annulus_max_m),
            source_power_dbm: self.source_power_dbm.unwrap_or(d.source_power_dbm),
            interferer_power_dbm: self.interferer_power_dbm.unwrap_or(d.interferer_power_dbm),
            ue_power_dbm: self.ue_power_dbm.or(d.ue_power_dbm),
            ue_lambda: self.ue_lambda.or(d.ue_lambda),
            si_attenuation_db: self.si_attenuation_db.unwrap_or(d.si_attenuation_db),
            si_nakagami_m: self.si_nakagami_m.unwrap_or(d.si_nakagami_m),
            gamma_th_db: self.gamma_th_db.unwrap_or(d.gamma_th_db),
            contenders: self.contenders.unwrap_or(d.contenders),
            lambda: self.lambda.unwrap_or(d.lambda),
            r_min: self.r_min.unwrap_or(d.r_min),
            r_max: self.r_max.unwrap_or(d.r_max),
            alpha: self.alpha.unwrap_or(d.alpha),
            fading,
            l_max: self.l_max.unwrap_or(d.l_max),
            fixed_relay_overhead_slots: self.fixed_relay_overhead_slots.unwrap_or(d.fixed_relay_overhead_slots),
            seed: self.seed.unwrap_or(d.seed),
        };
        scenario.validate().map_err(|e| Error::Config(e.to_string()))?;

        let param = match self.sweep_param.as_deref() {
            None => SweepParam::SdDistance,
            Some(s) => SweepParam::parse(s).ok_or_else(|| {
                Error::Config(format!(
                    "sweep_param must be sd_distance, source_power or si_attenuation, got `{s}`"
                ))
            })?,
        };
        let default_grid = param.default_grid();
        let grid = if self.sweep_from.is_none() && self.sweep_to.is_none() && self.sweep_steps.is_none() {
            default_grid
        } else {
            let from = self.sweep_from.unwrap_or(default_grid[0]);
            let to = self.sweep_to.unwrap_or(*default_grid.last().expect("nonempty"));
            let steps = self.sweep_steps.unwrap_or(default_grid.len());
            if steps == 0 {
                return Err(Error::Config("sweep_steps must be at least 1".into()));
            }
            if steps > 1 && from == to {
                return Err(Error::Config("sweep_from equals sweep_to with several steps".into()));
            }
            linspace(from, to, steps)
        };

        let mut plan = ValidationPlan::new(self.trials.unwrap_or(100_000));
        plan.tree_runs = self.tree_runs.unwrap_or(plan.tree_runs);
        plan.chain_steps = self.chain_steps.unwrap_or(plan.chain_steps);
        let t = &mut plan.tolerances;
        t.cumulant = self.tol_cumulant.unwrap_or(t.cumulant);
        t.outage = self.tol_outage.unwrap_or(t.outage);
        t.eta = self.tol_eta.unwrap_or(t.eta);
        t.cri = self.tol_cri.unwrap_or(t.cri);
        for (name, v) in [
            ("trials", plan.trials),
            ("tree_runs", plan.tree_runs),
            ("chain_steps", plan.chain_steps),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }

        Ok(RunConfig {
            scenario,
            sweep: SweepSpec { param, grid },
            out: self.out,
            plan,
        })
    }
}

/// Parses run-file text. TOML syntax errors carry their line and column.
pub fn parse_config_str(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn read_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_config_str(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    read_config_file(path)?.resolve()
}

/// `%.12g`: 12 significant digits, trailing zeros dropped.
pub fn fmt_g(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn render_sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.sweep_param.as_str(),
            fmt_g(r.value),
            r.duplex.as_str(),
            r.strategy.as_str(),
            fmt_g(r.p_sd),
            fmt_g(r.p_sr),
            fmt_g(r.mean_cri),
            fmt_g(r.eta),
        );
    }
    out
}

pub fn run_sweep(run: &RunConfig) -> Result<String> {
    Ok(render_sweep_csv(&sweep(&run.scenario, run.sweep.param, &run.sweep.grid)?))
}

/// PMF rows of the tagged-delay and full-interval PGFs, each followed by
/// `#` footer lines with mean, variance and tail mass.
pub fn render_pgf(n_total: usize, l_max: usize) -> Result<String> {
    let table = PgfTable::new(n_total, l_max)?;
    let mut out = String::new();
    for (name, pgf) in [("tagged", table.tagged(n_total)?), ("cri", table.cri(n_total)?)] {
        let _ = writeln!(out, "# {name} n_total={n_total} l_max={l_max}");
        out.push_str("slots,prob\n");
        for (slots, &p) in pgf.coeffs.iter().enumerate() {
            if p > 0.0 {
                let _ = writeln!(out, "{slots},{}", fmt_g(p));
            }
        }
        let _ = writeln!(out, "# {name} mean={}", fmt_g(pgf.mean()?));
        let _ = writeln!(out, "# {name} variance={}", fmt_g(pgf.variance()?));
        let _ = writeln!(out, "# {name} tail_mass={}", fmt_g(pgf.tail_mass()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct Analysis<'a> {
    pub config: &'a ScenarioConfig,
    pub result: ScenarioResult,
}

pub fn run_analyze(run: &RunConfig) -> Result<String> {
    let analysis = Analysis {
        config: &run.scenario,
        result: evaluate_point(&run.scenario)?,
    };
    serde_json::to_string_pretty(&analysis).map_err(|e| Error::Config(e.to_string()))
}

pub fn run_validate(run: &RunConfig) -> Result<ValidationReport> {
    validate_with(&run.scenario, &run.plan)
}

pub fn render_report(report: &ValidationReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// Writes `text` to `path`, or to stdout when there is no path.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.display().to_string(),
            reason: e.to_string(),
        }),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}
