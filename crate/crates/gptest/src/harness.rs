//! Monte Carlo rejection-rate grids over the two simulation designs.
//!
//! Grid configurations are TOML:
//!
//! ```toml
//! panel = "A"                      # or "B"
//! sample_sizes = [250, 500, 1000]
//! scenarios = [[0.0, 0.0], [0.2, 0.0]]
//! jstar = [3]
//! methods = ["gp_standardized", "wald_projection"]
//! replications = 500
//! base_seed = 20260101
//! folds = 5
//! nuisance_mode = "crossfit"       # or "oracle"
//! mc_draws = 10000
//! alpha = 0.05
//! arm = 0                          # treatment arm tested in panel A
//! u_param = "var"                  # panel B confounder law: "var" or "sd"
//! family = "legendre"
//! combination = "additive"
//! ```
//!
//! Every replication draws its own seed from `(base_seed, panel, n,
//! scenario, r)`; the dataset, fold split and Monte Carlo calibration use
//! separate substreams of it. One dataset and one cross-fit serve all
//! methods and `J*` values of a replication, so methods are compared on
//! identical data. Results do not depend on the number of threads.

use std::path::Path;
use std::time::Instant;

use gptest_core::basis::BasisSpec;
use gptest_core::dataset::Dataset;
use gptest_core::dgp::{
    gen_panel_a, gen_panel_b, oracle_nuisances_panel_a, oracle_nuisances_panel_b, panel_a_score, panel_b_score,
    PanelAConfig, PanelBConfig, PANEL_A_SCENARIOS, PANEL_B_SCENARIOS,
};
use gptest_core::engine::{test_pseudo_outcomes, Method, TestConfig};
use gptest_core::nuisance::crossfit;
use gptest_core::numerics::{mix_seed, RngStream};
use gptest_core::scores::ScoreSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{parse_combination, parse_family, parse_method, parse_u_param};
use crate::error::{AppError, AppResult};

const DATA_STREAM: u64 = 0;
const FOLD_STREAM: u64 = 1;
const CALIBRATION_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize, Serialize)]
pub enum Panel {
    A,
    B,
}

impl Panel {
    fn code(self) -> u64 {
        match self {
            Panel::A => 0xA,
            Panel::B => 0xB,
        }
    }

    fn named_scenarios(self) -> &'static [(f64, f64); 4] {
        match self {
            Panel::A => &PANEL_A_SCENARIOS,
            Panel::B => &PANEL_B_SCENARIOS,
        }
    }

    /// `I`–`IV` for the standard scenarios, otherwise the parameter pair.
    pub fn scenario_label(self, params: (f64, f64)) -> String {
        match self.named_scenarios().iter().position(|&p| p == params) {
            Some(i) => ["I", "II", "III", "IV"][i].to_string(),
            None => format!("({},{})", params.0, params.1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NuisanceSetting {
    #[default]
    Crossfit,
    Oracle,
}

fn d_base_seed() -> u64 {
    20260101
}
fn d_folds() -> usize {
    5
}
fn d_mc_draws() -> usize {
    10_000
}
fn d_alpha() -> f64 {
    0.05
}
fn d_u_param() -> String {
    "var".into()
}
fn d_family() -> String {
    "legendre".into()
}
fn d_combination() -> String {
    "additive".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimGridConfig {
    pub panel: Panel,
    pub sample_sizes: Vec<usize>,
    pub scenarios: Vec<(f64, f64)>,
    pub jstar: Vec<usize>,
    pub methods: Vec<String>,
    pub replications: usize,
    #[serde(default = "d_base_seed")]
    pub base_seed: u64,
    #[serde(default = "d_folds")]
    pub folds: usize,
    #[serde(default)]
    pub nuisance_mode: NuisanceSetting,
    #[serde(default = "d_mc_draws")]
    pub mc_draws: usize,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub arm: u8,
    #[serde(default = "d_u_param")]
    pub u_param: String,
    #[serde(default = "d_family")]
    pub family: String,
    #[serde(default = "d_combination")]
    pub combination: String,
}

impl SimGridConfig {
    pub fn load(path: &Path) -> AppResult<Self> {
        crate::config::load_toml(path)
    }

    /// A single-cell grid with desk defaults.
    pub fn single(
        panel: Panel,
        n: usize,
        scenario: (f64, f64),
        jstar: usize,
        method: Method,
        replications: usize,
    ) -> Self {
        SimGridConfig {
            panel,
            sample_sizes: vec![n],
            scenarios: vec![scenario],
            jstar: vec![jstar],
            methods: vec![method.as_str().to_string()],
            replications,
            base_seed: d_base_seed(),
            folds: d_folds(),
            nuisance_mode: NuisanceSetting::Crossfit,
            mc_draws: d_mc_draws(),
            alpha: d_alpha(),
            arm: 0,
            u_param: d_u_param(),
            family: d_family(),
            combination: d_combination(),
        }
    }

    pub fn validate(&self) -> AppResult<()> {
        let bad = |m: &str| Err(AppError::InvalidConfig(m.to_string()));
        if self.replications == 0 {
            return bad("replications must be at least 1");
        }
        if self.sample_sizes.is_empty() || self.scenarios.is_empty() || self.jstar.is_empty() || self.methods.is_empty()
        {
            return bad("sample_sizes, scenarios, jstar and methods must be nonempty");
        }
        if self.folds < 2 {
            return bad("folds must be at least 2");
        }
        if self.sample_sizes.iter().any(|&n| n < 2 * self.folds) {
            return bad("every sample size must be at least twice the number of folds");
        }
        if self.jstar.contains(&0) {
            return bad("jstar values must be at least 1");
        }
        if self.scenarios.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return bad("scenario parameters must be finite");
        }
        if self.arm > 1 {
            return bad("arm must be 0 or 1");
        }
        self.parsed_methods()?;
        parse_u_param(&self.u_param)?;
        parse_family(&self.family)?;
        parse_combination(&self.combination)?;
        self.test_config(0)
            .validate()
            .map_err(|e| AppError::InvalidConfig(e.to_string()))
    }

    fn parsed_methods(&self) -> AppResult<Vec<Method>> {
        self.methods.iter().map(|m| parse_method(m)).collect()
    }

    fn test_config(&self, seed: u64) -> TestConfig {
        TestConfig {
            alpha: self.alpha,
            mc_draws: self.mc_draws,
            seed,
            ..TestConfig::default()
        }
    }

    fn basis(&self, jstar: usize) -> AppResult<BasisSpec> {
        // Both designs draw covariates uniformly on [-1, 1]^2.
        BasisSpec::new(
            parse_family(&self.family)?,
            jstar,
            parse_combination(&self.combination)?,
            vec![(-1.0, 1.0); 2],
        )
        .map_err(|e| AppError::InvalidConfig(e.to_string()))
    }

    fn score(&self, scenario: (f64, f64)) -> ScoreSpec {
        let (p1, p2) = scenario;
        match (self.panel, self.nuisance_mode) {
            (Panel::A, NuisanceSetting::Crossfit) => panel_a_score(self.arm),
            (Panel::A, NuisanceSetting::Oracle) => {
                panel_a_score(self.arm).with_oracle(oracle_nuisances_panel_a(p1, p2, self.arm))
            }
            (Panel::B, NuisanceSetting::Crossfit) => panel_b_score(),
            (Panel::B, NuisanceSetting::Oracle) => panel_b_score().with_oracle(oracle_nuisances_panel_b(p1, p2)),
        }
    }

    fn generate(&self, n: usize, scenario: (f64, f64), seed: u64) -> AppResult<Dataset> {
        Ok(match self.panel {
            Panel::A => gen_panel_a(&PanelAConfig {
                n,
                alpha1: scenario.0,
                alpha2: scenario.1,
                seed,
            }),
            Panel::B => gen_panel_b(&PanelBConfig {
                n,
                beta1: scenario.0,
                beta2: scenario.1,
                seed,
                u_param: parse_u_param(&self.u_param)?,
            }),
        })
    }

    pub fn replication_seed(&self, n: usize, scenario: (f64, f64), r: usize) -> u64 {
        mix_seed(&[
            self.base_seed,
            self.panel.code(),
            n as u64,
            scenario.0.to_bits(),
            scenario.1.to_bits(),
            r as u64,
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectionRow {
    pub panel: Panel,
    pub n: usize,
    pub scenario: String,
    pub param1: f64,
    pub param2: f64,
    pub method: String,
    pub jstar: usize,
    pub rejection_rate: f64,
    pub replications: usize,
    pub mc_stderr: f64,
    pub two_stderr: f64,
    pub mean_runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RejectionTable {
    pub rows: Vec<RejectionRow>,
}

impl RejectionTable {
    pub fn find(&self, n: usize, scenario: (f64, f64), method: Method, jstar: usize) -> Option<&RejectionRow> {
        self.rows
            .iter()
            .find(|r| r.n == n && (r.param1, r.param2) == scenario && r.method == method.as_str() && r.jstar == jstar)
    }

    pub fn write_csv(&self, path: &Path) -> AppResult<()> {
        let csv_err = |source| AppError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        for row in &self.rows {
            w.serialize(row).map_err(csv_err)?;
        }
        w.flush().map_err(|source| AppError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Per-replication decisions, one entry per (method, J*) pair of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub rejects: Vec<bool>,
    pub runtime_ms: Vec<f64>,
}

struct Unit {
    n: usize,
    scenario: (f64, f64),
    r: usize,
}

fn run_replication(
    cfg: &SimGridConfig,
    methods: &[Method],
    bases: &[BasisSpec],
    unit: &Unit,
) -> AppResult<ReplicationOutcome> {
    let context = || {
        format!(
            "panel {:?}, n={}, scenario {}, replication {}",
            cfg.panel,
            unit.n,
            cfg.panel.scenario_label(unit.scenario),
            unit.r
        )
    };
    let core = |e| AppError::core(context(), e);
    let root = RngStream::new(cfg.replication_seed(unit.n, unit.scenario, unit.r));
    let data = cfg.generate(unit.n, unit.scenario, root.substream(DATA_STREAM).seed())?;
    let score = cfg.score(unit.scenario);
    let start = Instant::now();
    let fitted = crossfit(&data, &score, cfg.folds, &mut root.substream(FOLD_STREAM)).map_err(core)?;
    let fit_ms = start.elapsed().as_secs_f64() * 1e3;
    let x = data.matrix(&score.roles.covariates).map_err(|e| core(e.into()))?;
    let test_cfg = cfg.test_config(root.substream(CALIBRATION_STREAM).seed());
    let mut out = ReplicationOutcome {
        rejects: Vec::with_capacity(methods.len() * bases.len()),
        runtime_ms: Vec::with_capacity(methods.len() * bases.len()),
    };
    for &method in methods {
        for basis in bases {
            let start = Instant::now();
            let result = test_pseudo_outcomes(&x, &fitted.pseudo_outcomes, basis, &test_cfg, method).map_err(core)?;
            out.rejects.push(result.reject);
            out.runtime_ms.push(fit_ms + start.elapsed().as_secs_f64() * 1e3);
        }
    }
    Ok(out)
}

fn build_pool(threads: Option<usize>) -> AppResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(AppError::InvalidConfig("threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    builder
        .build()
        .map_err(|e| AppError::Internal(format!("thread pool: {e}")))
}

/// Runs every replication of every (n, scenario) pair and returns the raw
/// decisions in grid order: sizes outermost, then scenarios, then `r`.
pub fn run_replications(cfg: &SimGridConfig, threads: Option<usize>) -> AppResult<Vec<ReplicationOutcome>> {
    cfg.validate()?;
    let methods = cfg.parsed_methods()?;
    let bases = cfg.jstar.iter().map(|&j| cfg.basis(j)).collect::<AppResult<Vec<_>>>()?;
    let mut units = Vec::new();
    for &n in &cfg.sample_sizes {
        for &scenario in &cfg.scenarios {
            units.extend((0..cfg.replications).map(|r| Unit { n, scenario, r }));
        }
    }
    let pool = build_pool(threads)?;
    pool.install(|| {
        units
            .par_iter()
            .map(|u| run_replication(cfg, &methods, &bases, u))
            .collect::<AppResult<Vec<_>>>()
    })
}

/// Rejection rates for every (n, scenario, method, J*) cell.
pub fn run_grid(cfg: &SimGridConfig, threads: Option<usize>) -> AppResult<RejectionTable> {
    let outcomes = run_replications(cfg, threads)?;
    let methods = cfg.parsed_methods()?;
    let reps = cfg.replications;
    let mut table = RejectionTable::default();
    let mut chunks = outcomes.chunks(reps);
    for &n in &cfg.sample_sizes {
        for &scenario in &cfg.scenarios {
            let cell = chunks
                .next()
                .ok_or_else(|| AppError::Internal("missing replications".into()))?;
            for (mi, method) in methods.iter().enumerate() {
                for (ji, &jstar) in cfg.jstar.iter().enumerate() {
                    let k = mi * cfg.jstar.len() + ji;
                    let hits = cell.iter().filter(|o| o.rejects[k]).count();
                    let rate = hits as f64 / reps as f64;
                    let stderr = (rate * (1.0 - rate) / reps as f64).sqrt();
                    let runtime = cell.iter().map(|o| o.runtime_ms[k]).sum::<f64>() / reps as f64;
                    table.rows.push(RejectionRow {
                        panel: cfg.panel,
                        n,
                        scenario: cfg.panel.scenario_label(scenario),
                        param1: scenario.0,
                        param2: scenario.1,
                        method: method.as_str().to_string(),
                        jstar,
                        rejection_rate: rate,
                        replications: reps,
                        mc_stderr: stderr,
                        two_stderr: 2.0 * stderr,
                        mean_runtime_ms: runtime,
                    });
                }
            }
        }
    }
    Ok(table)
}

/// A single grid cell.
pub fn run_cell(
    cfg: &SimGridConfig,
    n: usize,
    scenario: (f64, f64),
    method: Method,
    jstar: usize,
    threads: Option<usize>,
) -> AppResult<RejectionRow> {
    let cell = SimGridConfig {
        sample_sizes: vec![n],
        scenarios: vec![scenario],
        jstar: vec![jstar],
        methods: vec![method.as_str().to_string()],
        ..cfg.clone()
    };
    let mut table = run_grid(&cell, threads)?;
    table.rows.pop().ok_or_else(|| AppError::Internal("empty cell".into()))
}
