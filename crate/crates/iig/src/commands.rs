//! Subcommand bodies. Each returns the files it would write, so runs can be
//! compared byte for byte without touching the disk.

use std::fmt::Write as _;
use std::path::Path;

use iig_core::belief::{cell_entropy, BeliefState};
use iig_core::geometry::{GridWorld, SeededRng};
use iig_core::info::GridInformation;
use iig_core::mission::{run_exploration, run_monitoring, MonitoringField, WssDataset};
use iig_core::path::select_path;
use iig_core::planner::{iig_tree, rig_tree, Plan};
use iig_core::pose::PoseBelief;

use crate::config::{Algorithm, RunConfig, Sweep};
use crate::emit::{self, JsonObject};
use crate::error::{CliError, Result};
use crate::formats;

pub type Files = Vec<(&'static str, String)>;

fn world(config: &RunConfig, base: &Path) -> Result<GridWorld> {
    if config.world.file.is_empty() {
        Ok(iig_core::worlds::desk_world())
    } else {
        formats::load_world(&base.join(&config.world.file))
    }
}

/// Grow one planner tree on the configured world from its true map.
pub fn grow(config: &RunConfig, world: &GridWorld) -> Result<Plan> {
    let belief = BeliefState::from_world(world, config.world.p_occ, config.world.p_free, config.world.prior_variance)?;
    let source = GridInformation {
        belief: &belief,
        params: config.info_params()?,
    };
    let start = PoseBelief::with_std(config.start(), config.world.heading, config.motion.init_std);
    let planner = config.planner_config();
    Ok(match config.planner.algorithm {
        Algorithm::Iig => iig_tree(world, &source, start, &planner)?,
        Algorithm::Rig => rig_tree(world, &source, start, &planner, config.planner.samples)?,
    })
}

fn total_increment(plan: &Plan) -> f64 {
    plan.tree.nodes()[1..]
        .iter()
        .map(|n| n.info - plan.tree.node(n.parent.expect("non-root")).info)
        .sum()
}

/// `plan`: tree, selected path, convergence trace and summary.
pub fn plan(config: &RunConfig, base: &Path) -> Result<Files> {
    let world = world(config, base)?;
    let plan = grow(config, &world)?;
    let path = select_path(&plan.tree, &config.selection_params()?)?;
    let summary = JsonObject::new()
        .str("command", "plan")
        .str(
            "algorithm",
            match config.planner.algorithm {
                Algorithm::Iig => "iig",
                Algorithm::Rig => "rig",
            },
        )
        .str("function", config.info.function.name())
        .int("seed", config.run.seed)
        .int("nodes", plan.tree.len() as u64)
        .int("samples", plan.samples as u64)
        .bool("converged", plan.converged)
        .num("final_mean", plan.final_mean())
        .num("delta_ric", config.planner.delta_ric)
        .num("total_info", total_increment(&plan))
        .int("path_nodes", path.len() as u64)
        .num("path_cost", path.cost)
        .num("path_info", path.info);
    Ok(vec![
        ("tree.json", emit::tree_json(&plan.tree)),
        ("path.json", emit::path_json(&plan.tree, &path)),
        ("convergence.csv", emit::convergence_csv(&plan.trace)),
        ("summary.json", summary.pretty()),
    ])
}

/// `explore`: a full exploration mission.
pub fn explore(config: &RunConfig, base: &Path) -> Result<Files> {
    let world = world(config, base)?;
    let run = run_exploration(&world, &config.exploration_config()?)?;
    let log = &run.log;
    let summary = JsonObject::new()
        .str("command", "explore")
        .int("seed", config.run.seed)
        .int("steps", log.steps.len() as u64)
        .bool("terminated", log.terminated)
        .num("final_entropy", log.final_entropy)
        .num("entropy_bound", cell_entropy(config.mission.p_sat_term)?)
        .opt_num("auc", log.auc)
        .num("total_distance", log.total_distance);
    Ok(vec![
        ("log.jsonl", emit::log_jsonl(log)),
        ("entropy.csv", emit::entropy_csv(log)),
        ("summary.json", summary.pretty()),
    ])
}

fn dataset(config: &RunConfig, base: &Path) -> Result<WssDataset> {
    if config.monitor.dataset.is_empty() {
        Ok(config.synthetic_wss().generate(&mut SeededRng::new(config.run.seed))?)
    } else {
        formats::load_dataset(&base.join(&config.monitor.dataset))
    }
}

/// `monitor`: plan over a regressed signal surface and score the reconstruction.
pub fn monitor(config: &RunConfig, base: &Path) -> Result<Files> {
    let data = dataset(config, base)?;
    let mc = config.monitoring_config()?;
    let field = MonitoringField::build(&data, &mc)?;
    let run = run_monitoring(&field, &mc)?;
    let log = &run.log;
    let summary = JsonObject::new()
        .str("command", "monitor")
        .str("function", mc.kind.name())
        .int("seed", config.run.seed)
        .num("radius", mc.radius)
        .int("records", data.records().len() as u64)
        .int("query_points", field.queries.len() as u64)
        .int("nodes", run.plan.tree.len() as u64)
        .int("samples", run.plan.samples as u64)
        .bool("converged", run.plan.converged)
        .num("final_mean", run.plan.final_mean())
        .opt_num("rmse", log.rmse)
        .opt_num("total_info", log.total_info)
        .num("total_distance", log.total_distance)
        .int("path_nodes", run.path.len() as u64);
    Ok(vec![
        ("tree.json", emit::tree_json(&run.plan.tree)),
        ("path.json", emit::path_json(&run.plan.tree, &run.path)),
        ("convergence.csv", emit::convergence_csv(&run.plan.trace)),
        ("log.jsonl", emit::log_jsonl(log)),
        ("summary.json", summary.pretty()),
    ])
}

/// One `bench.csv` row.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub setting: f64,
    pub seed: u64,
    pub nodes: usize,
    pub samples: usize,
    pub converged: bool,
    pub final_mean: f64,
    pub total_info: f64,
}

/// Planner runs over the configured sweep, one per (setting, seed).
pub fn bench_rows(config: &RunConfig, base: &Path, mut each: impl FnMut(&BenchRow)) -> Result<Vec<BenchRow>> {
    let world = world(config, base)?;
    if config.bench.values.is_empty() {
        return Err(CliError::Config("bench.values is empty".into()));
    }
    let mut rows = Vec::new();
    for &setting in &config.bench.values {
        let mut c = config.clone();
        match config.bench.sweep {
            Sweep::Beams => {
                if !(setting >= 1.0 && setting.fract() == 0.0) {
                    return Err(CliError::Config(format!("beam count {setting} is not a positive integer")));
                }
                c.sensor.beams = setting as usize;
            }
            Sweep::Range => c.sensor.r_max = setting,
        }
        for seed in 0..config.bench.seeds as u64 {
            c.run.seed = config.run.seed + seed;
            let plan = grow(&c, &world)?;
            let row = BenchRow {
                setting,
                seed: c.run.seed,
                nodes: plan.tree.len(),
                samples: plan.samples,
                converged: plan.converged,
                final_mean: plan.final_mean(),
                total_info: total_increment(&plan),
            };
            each(&row);
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn bench_csv(config: &RunConfig, rows: &[BenchRow]) -> String {
    let sweep = match config.bench.sweep {
        Sweep::Beams => "beams",
        Sweep::Range => "range",
    };
    let mut out = String::from("sweep,setting,seed,nodes,samples,converged,final_mean,total_info\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{sweep},{},{},{},{},{},{},{}",
            r.setting,
            r.seed,
            r.nodes,
            r.samples,
            r.converged,
            emit::num_csv(r.final_mean),
            emit::num_csv(r.total_info)
        );
    }
    out
}

/// `bench`: `bench.csv` with one row per (setting, seed).
pub fn bench(config: &RunConfig, base: &Path) -> Result<Files> {
    let rows = bench_rows(config, base, |_| {})?;
    Ok(vec![("bench.csv", bench_csv(config, &rows))])
}
