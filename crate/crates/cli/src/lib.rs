//! Scenario runner: reads a scenario file, runs it, writes CSV results.

pub mod config;
pub mod output;

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use eonjam::metrics::{blocking_probability, mean_and_stderr, utilization_ranking};
use eonjam::phy::Physics;
use eonjam::sim::{pre_run, run_scenario, ScenarioResult, SimSetup};

pub use config::{ScenarioConfig, SlotScope, Violation};

/// Overrides the scenario's output directory when set.
pub const OUTPUT_DIR_ENV: &str = "EONJAM_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid scenario:\n{}", list(.0))]
    Config(Vec<Violation>),
    #[error("{0}")]
    Runtime(String),
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|x| format!("  {x}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub fn validate(config: &Path) -> Result<ScenarioConfig, CliError> {
    ScenarioConfig::load(config).map_err(CliError::Config)
}

fn setup(config: &ScenarioConfig) -> Result<SimSetup, CliError> {
    SimSetup::new(config.topology.clone(), Physics::table1(), config.tolerance_db)
        .map_err(CliError::runtime)
}

fn output_dir(config: &ScenarioConfig, over: Option<&Path>) -> Result<PathBuf, CliError> {
    let dir = over.map_or_else(|| config.output_dir.clone(), Path::to_path_buf);
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

pub struct SimulateReport {
    pub config: ScenarioConfig,
    pub result: ScenarioResult,
    pub blocking_csv: PathBuf,
    pub slots_csv: PathBuf,
}

/// Runs every point of the scenario and writes `blocking.csv` and
/// `slots.csv` into the output directory (`over` wins over the file).
pub fn simulate(config_path: &Path, over: Option<&Path>) -> Result<SimulateReport, CliError> {
    let config = validate(config_path)?;
    let setup = setup(&config)?;
    let ranking = match &config.ranking_path {
        Some(p) => Some(output::read_ranking(p, &config.topology).map_err(|e| {
            CliError::Config(vec![Violation {
                field: "ranking".into(),
                message: format!("{}: {e}", p.display()),
            }])
        })?),
        None => None,
    };
    let result = run_scenario(&setup, &config.spec, ranking).map_err(CliError::runtime)?;

    let dir = output_dir(&config, over)?;
    let blocking_csv = dir.join("blocking.csv");
    let slots_csv = dir.join("slots.csv");
    output::write_blocking(create(&blocking_csv)?, &result, &config.topology)
        .map_err(CliError::runtime)?;
    output::write_slots(create(&slots_csv)?, &result, &config.topology, config.slot_scope)
        .map_err(CliError::runtime)?;
    Ok(SimulateReport {
        config,
        result,
        blocking_csv,
        slots_csv,
    })
}

/// Runs the jammer-free pre-run and writes `ranking.csv`.
pub fn rank_links(
    config_path: &Path,
    over: Option<&Path>,
) -> Result<(PathBuf, Vec<(String, f64)>), CliError> {
    let config = validate(config_path)?;
    let setup = setup(&config)?;
    let runs = pre_run(&setup, &config.spec).map_err(CliError::runtime)?;
    let ranking = utilization_ranking(&runs);
    let path = output_dir(&config, over)?.join("ranking.csv");
    output::write_ranking(create(&path)?, &ranking, &config.topology).map_err(CliError::runtime)?;
    let named = ranking
        .iter()
        .map(|(l, u)| (config.topology.link_name(*l), *u))
        .collect();
    Ok((path, named))
}

/// One line per (mode, ε) point: mean blocking and its standard error.
pub fn summary(report: &SimulateReport) -> String {
    let topo = &report.config.topology;
    let mut s = String::new();
    if let Some(t) = report.result.target {
        let _ = writeln!(s, "attacked link: {}", topo.link_name(t));
    }
    for p in &report.result.points {
        let b: Vec<f64> = p
            .replications
            .iter()
            .filter_map(blocking_probability)
            .collect();
        let (mean, se) = mean_and_stderr(&b);
        let eps = p.epsilon_db.map_or("-".to_string(), |e| format!("{e:.2} dB"));
        let _ = writeln!(
            s,
            "{:<11} {:>8}  blocking {:.5} ± {:.5}",
            p.mode.as_str(),
            eps,
            mean,
            se
        );
    }
    let _ = writeln!(s, "wrote {}", report.blocking_csv.display());
    let _ = write!(s, "wrote {}", report.slots_csv.display());
    s
}
