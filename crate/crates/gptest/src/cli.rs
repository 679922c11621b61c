//! Command-line interface.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gptest_core::basis::{basis_bound_diagnostics, BasisSpec};
use gptest_core::dgp::{
    gen_panel_a, gen_panel_b, PanelAConfig, PanelBConfig, UParam, PANEL_A_SCENARIOS, PANEL_B_SCENARIOS,
};
use gptest_core::engine::{run_gp_test, TestConfig};
use gptest_core::numerics::RngStream;

use crate::config::{load_toml, parse_combination, parse_family, parse_method, TestFile};
use crate::csvio::{read_csv, write_csv};
use crate::error::{AppError, AppResult};
use crate::harness::{run_grid, Panel, SimGridConfig};
use crate::report::{to_json, BasisReport, TestReport};

#[derive(Debug, Parser)]
#[command(
    name = "gptest",
    version,
    about = "Generalized projection tests for conditional moment restrictions"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Overrides the seed of the config (base seed for `simulate`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "GPTEST_THREADS")]
    pub threads: Option<usize>,
    /// Overrides the test level.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one test on a CSV dataset and print the result as JSON.
    Test {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a simulation grid and write the rejection table as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print sup-norm bounds of a basis as JSON.
    BasisCheck {
        #[arg(long, default_value = "legendre")]
        family: String,
        #[arg(long, default_value_t = 3)]
        jstar: usize,
        #[arg(long, default_value_t = 2)]
        dims: usize,
        #[arg(long, default_value = "additive")]
        combination: String,
    },
    /// Write a simulated dataset to CSV.
    Generate {
        #[arg(long, value_enum)]
        panel: PanelArg,
        #[arg(long)]
        n: usize,
        /// Standard scenario I-IV.
        #[arg(long, conflicts_with = "params", default_value = "I")]
        scenario: String,
        /// Explicit parameter pair, e.g. `0.2,0.4`.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        params: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "var")]
        u_param: UParamArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PanelArg {
    A,
    B,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UParamArg {
    Var,
    Sd,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> AppResult<()> {
    let g = &cli.global;
    match cli.command {
        Command::Test { data, config } => cmd_test(&data, &config, g, out),
        Command::Simulate { config, out: path } => {
            let mut grid = SimGridConfig::load(&config)?;
            if let Some(seed) = g.seed {
                grid.base_seed = seed;
            }
            if let Some(alpha) = g.alpha {
                grid.alpha = alpha;
            }
            let table = run_grid(&grid, g.threads)?;
            table.write_csv(&path)?;
            writeln!(out, "wrote {} rows to {}", table.rows.len(), path.display()).map_err(stdout_err)
        }
        Command::BasisCheck {
            family,
            jstar,
            dims,
            combination,
        } => {
            if dims == 0 {
                return Err(AppError::InvalidConfig("dims must be at least 1".into()));
            }
            let spec = BasisSpec::new(
                parse_family(&family)?,
                jstar,
                parse_combination(&combination)?,
                vec![(-1.0, 1.0); dims],
            )
            .map_err(|e| AppError::InvalidConfig(e.to_string()))?;
            let bounds = basis_bound_diagnostics(&spec).map_err(|e| AppError::core("basis-check", e))?;
            let report = BasisReport::new(&family, jstar, dims, &combination, spec.num_functions(), bounds);
            writeln!(out, "{}", to_json(&report)).map_err(stdout_err)
        }
        Command::Generate {
            panel,
            n,
            scenario,
            params,
            out: path,
            u_param,
        } => {
            let panel = match panel {
                PanelArg::A => Panel::A,
                PanelArg::B => Panel::B,
            };
            let (p1, p2) = match params {
                Some(p) => (p[0], p[1]),
                None => standard_scenario(panel, &scenario)?,
            };
            let seed = g.seed.unwrap_or(0);
            let data = match panel {
                Panel::A => gen_panel_a(&PanelAConfig {
                    n,
                    alpha1: p1,
                    alpha2: p2,
                    seed,
                }),
                Panel::B => gen_panel_b(&PanelBConfig {
                    n,
                    beta1: p1,
                    beta2: p2,
                    seed,
                    u_param: match u_param {
                        UParamArg::Var => UParam::Variance,
                        UParamArg::Sd => UParam::StdDev,
                    },
                }),
            };
            write_csv(&data, &path)?;
            writeln!(out, "wrote {n} rows to {}", path.display()).map_err(stdout_err)
        }
    }
}

fn stdout_err(source: std::io::Error) -> AppError {
    AppError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn standard_scenario(panel: Panel, label: &str) -> AppResult<(f64, f64)> {
    let table = match panel {
        Panel::A => &PANEL_A_SCENARIOS,
        Panel::B => &PANEL_B_SCENARIOS,
    };
    ["I", "II", "III", "IV"]
        .iter()
        .position(|s| s.eq_ignore_ascii_case(label))
        .map(|i| table[i])
        .ok_or_else(|| AppError::InvalidConfig(format!("unknown scenario `{label}` (expected I-IV)")))
}

fn cmd_test(data: &std::path::Path, config: &std::path::Path, g: &GlobalOpts, out: &mut dyn Write) -> AppResult<()> {
    let file: TestFile = load_toml(config)?;
    let mut section = file.test.clone();
    if let Some(seed) = g.seed {
        section.seed = seed;
    }
    if let Some(alpha) = g.alpha {
        section.alpha = alpha;
    }
    let method = parse_method(&section.method)?;
    let base: TestConfig = section.test_config()?;
    let score = file.score.score_spec()?;
    score.validate().map_err(|e| AppError::core("score", e))?;
    let dataset = read_csv(data, &file.score.schema()?)?;
    let basis = file.basis.basis_spec(Some(&dataset), &file.score.covariates)?;
    let root = RngStream::new(section.seed);
    let cfg = TestConfig {
        seed: root.substream(2).seed(),
        ..base
    };
    let result = run_gp_test(
        &dataset,
        &score,
        &basis,
        &cfg,
        method,
        section.folds,
        &mut root.substream(1),
    )
    .map_err(|e| AppError::core(format!("{}", data.display()), e))?;
    writeln!(out, "{}", to_json(&TestReport::new(&result, cfg.alpha, dataset.n()))).map_err(stdout_err)
}
