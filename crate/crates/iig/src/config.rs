//! `key = value` run configuration with `[section]` headers.
//!
//! Every key has a default; parsing starts from the defaults and overwrites
//! the keys present in the text. Unknown sections and keys are rejected.

use std::fmt::Write as _;
use std::path::Path;

use iig_core::belief::{InverseModelParams, SensorModel};
use iig_core::geometry::Point2;
use iig_core::gp::{FitOptions, GaussHermite, KernelSpec};
use iig_core::info::{InfoKind, InfoParams};
use iig_core::mission::{ExplorationConfig, MonitoringConfig, SyntheticWss};
use iig_core::path::SelectionParams;
use iig_core::planner::PlannerConfig;
use iig_core::pose::MotionNoise;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Iig,
    Rig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    Beams,
    Range,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub seed: u64,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldSection {
    /// Grid world file; empty selects the built-in desk world.
    pub file: String,
    pub start: [f64; 2],
    pub heading: f64,
    pub p_occ: f64,
    pub p_free: f64,
    pub prior_variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerSection {
    pub algorithm: Algorithm,
    /// Sample budget for the fixed-budget planner.
    pub samples: usize,
    pub delta: f64,
    pub r_near: f64,
    pub budget: f64,
    pub delta_ric: f64,
    pub n_ric: usize,
    pub max_samples: usize,
    pub max_nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionSection {
    /// Standard deviations of the per-step motion noise.
    pub q_std: [f64; 3],
    /// Standard deviations of the initial pose.
    pub init_std: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorSection {
    pub beams: usize,
    pub r_max: f64,
    pub field_of_view: f64,
    pub z_hit: f64,
    pub z_short: f64,
    pub z_max: f64,
    pub z_rand: f64,
    pub sigma_hit: f64,
    pub lambda_short: f64,
    pub s_z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseSection {
    pub b_occ: f64,
    pub b_free: f64,
    pub p_sat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfoSection {
    pub function: InfoKind,
    pub lengthscale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
    pub gh_order: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionSection {
    pub kappa: f64,
    pub s_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionSection {
    pub delta_ric: f64,
    pub p_sat: f64,
    pub p_sat_term: f64,
    pub max_steps: usize,
    pub scan_beams: usize,
    pub scan_z_hit: f64,
    pub scan_z_short: f64,
    pub scan_z_max: f64,
    pub scan_z_rand: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorSection {
    /// `lat,lon,rssi_dbm` CSV; empty selects the synthetic generator.
    pub dataset: String,
    pub function: InfoKind,
    pub radius: f64,
    pub training_points: usize,
    pub query_points: usize,
    pub delta: f64,
    pub r_near: f64,
    pub delta_ric: f64,
    pub max_samples: usize,
    pub grid_resolution: f64,
    pub fit_restarts: usize,
    pub fit_iterations: usize,
    pub synthetic_records: usize,
    pub synthetic_width: f64,
    pub synthetic_height: f64,
    pub shadowing_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSection {
    pub sweep: Sweep,
    pub seeds: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub run: RunSection,
    pub world: WorldSection,
    pub planner: PlannerSection,
    pub motion: MotionSection,
    pub sensor: SensorSection,
    pub inverse: InverseSection,
    pub info: InfoSection,
    pub selection: SelectionSection,
    pub mission: MissionSection,
    pub monitor: MonitorSection,
    pub bench: BenchSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sensor = SensorModel::default();
        let inverse = InverseModelParams::default();
        let planner = PlannerConfig::default();
        let selection = SelectionParams::default();
        let exploration = ExplorationConfig::default();
        let monitoring = MonitoringConfig::default();
        let synthetic = SyntheticWss::default();
        Self {
            run: RunSection {
                seed: 0,
                output: "out".into(),
            },
            world: WorldSection {
                file: String::new(),
                start: [iig_core::worlds::DESK_START.x, iig_core::worlds::DESK_START.y],
                heading: 0.0,
                p_occ: 0.65,
                p_free: 0.35,
                prior_variance: 1.0,
            },
            planner: PlannerSection {
                algorithm: Algorithm::Iig,
                samples: 1000,
                delta: planner.delta,
                r_near: planner.r_near,
                budget: planner.budget,
                delta_ric: planner.delta_ric,
                n_ric: planner.n_ric,
                max_samples: planner.max_samples,
                max_nodes: 20_000,
            },
            motion: MotionSection {
                q_std: [0.1, 0.1, 0.0026],
                init_std: [0.4, 0.1, 0.0],
            },
            sensor: SensorSection {
                beams: sensor.beams,
                r_max: sensor.r_max,
                field_of_view: sensor.field_of_view,
                z_hit: sensor.z_hit,
                z_short: sensor.z_short,
                z_max: sensor.z_max,
                z_rand: sensor.z_rand,
                sigma_hit: sensor.sigma_hit,
                lambda_short: sensor.lambda_short,
                s_z: sensor.s_z,
            },
            inverse: InverseSection {
                b_occ: inverse.b_occ,
                b_free: inverse.b_free,
                p_sat: inverse.p_sat,
            },
            info: InfoSection {
                function: InfoKind::Miub,
                lengthscale: iig_core::info::DEFAULT_LENGTHSCALE,
                signal_variance: iig_core::info::DEFAULT_SIGNAL_VARIANCE,
                noise_variance: iig_core::info::DEFAULT_NOISE_VARIANCE,
                gh_order: GaussHermite::DEFAULT_ORDER,
            },
            selection: SelectionSection {
                kappa: selection.kappa,
                s_ratio: selection.s_ratio,
            },
            mission: MissionSection {
                delta_ric: exploration.planner.delta_ric,
                p_sat: exploration.info.inverse.p_sat,
                p_sat_term: exploration.p_sat_term,
                max_steps: exploration.max_steps,
                scan_beams: exploration.scan_sensor.beams,
                scan_z_hit: exploration.scan_sensor.z_hit,
                scan_z_short: exploration.scan_sensor.z_short,
                scan_z_max: exploration.scan_sensor.z_max,
                scan_z_rand: exploration.scan_sensor.z_rand,
            },
            monitor: MonitorSection {
                dataset: String::new(),
                function: monitoring.kind,
                radius: monitoring.radius,
                training_points: monitoring.training_points,
                query_points: monitoring.query_points,
                delta: monitoring.planner.delta,
                r_near: monitoring.planner.r_near,
                delta_ric: monitoring.planner.delta_ric,
                max_samples: monitoring.planner.max_samples,
                grid_resolution: monitoring.grid_resolution,
                fit_restarts: monitoring.fit.random_restarts,
                fit_iterations: monitoring.fit.max_iterations,
                synthetic_records: synthetic.records,
                synthetic_width: synthetic.width,
                synthetic_height: synthetic.height,
                shadowing_std: synthetic.shadowing_std,
            },
            bench: BenchSection {
                sweep: Sweep::Beams,
                seeds: 30,
                values: vec![10.0, 20.0, 50.0],
            },
        }
    }
}

/// A configurable value: parsed from and rendered to config text.
trait Field {
    fn parse(&mut self, text: &str) -> std::result::Result<(), String>;
    fn render(&self) -> String;
}

fn parse_num<T: std::str::FromStr>(text: &str) -> std::result::Result<T, String> {
    text.parse().map_err(|_| format!("cannot parse {text:?}"))
}

impl Field for f64 {
    fn parse(&mut self, text: &str) -> std::result::Result<(), String> {
        let v: f64 = parse_num(text)?;
        if v.is_nan() {
            return Err("NaN is not allowed".into());
        }
        *self = v;
        Ok(())
    }
    fn render(&self) -> String {
        format!("{self:?}")
    }
}

impl Field for usize {
    fn parse(&mut self, text: &str) -> std::result::Result<(), String> {
        *self = parse_num(text)?;
        Ok(())
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Field for u64 {
    fn parse(&mut self, text: &str) -> std::result::Result<(), String> {
        *self = parse_num(text)?;
        Ok(())
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Field for String {
    fn parse(&mut self, text: &str) -> std::result::Result<(), String> {
        *self = text.to_string();
        Ok(())
    }
    fn render(&self) -> String {
        self.clone()
    }
}

fn parse_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            let mut v = 0.0;
            Field::parse(&mut v, t.trim())?;
            Ok(v)
        })
        .collect()
}

fn render_list(values: &[f64]) -> String {
    values.iter().map(Field::render).collect::<Vec<_>>().join(", ")
}

impl<const N: usize> Field for [f64; N] {
    fn parse(&mut self, text: &str) -> std::result::Result<(), String> {
        let v = parse_list(text)?;
        *self = v.try_into().map_err(|v: Vec<f64>| format!("expected {N} values, found {}", v.len()))?;
        Ok(())
    }
    fn render(&self) -> String {
        render_list(self)
    }
}

impl Field for Vec<f64> {
    fn parse(&mut self, text: &str) -> std::result::Result<(), String> {
        *self = parse_list(text)?;
        Ok(())
    }
    fn render(&self) -> String {
        render_list(self)
    }
}

impl Field for InfoKind {
    fn parse(&mut self, text: &str) -> std::result::Result<(), String> {
        *self = InfoKind::from_name(text).ok_or_else(|| format!("unknown information function {text:?}"))?;
        Ok(())
    }
    fn render(&self) -> String {
        self.name().into()
    }
}

impl Field for Algorithm {
    fn parse(&mut self, text: &str) -> std::result::Result<(), String> {
        *self = match text {
            "iig" => Algorithm::Iig,
            "rig" => Algorithm::Rig,
            _ => return Err(format!("unknown algorithm {text:?}")),
        };
        Ok(())
    }
    fn render(&self) -> String {
        match self {
            Algorithm::Iig => "iig",
            Algorithm::Rig => "rig",
        }
        .into()
    }
}

impl Field for Sweep {
    fn parse(&mut self, text: &str) -> std::result::Result<(), String> {
        *self = match text {
            "beams" => Sweep::Beams,
            "range" => Sweep::Range,
            _ => return Err(format!("unknown sweep {text:?}")),
        };
        Ok(())
    }
    fn render(&self) -> String {
        match self {
            Sweep::Beams => "beams",
            Sweep::Range => "range",
        }
        .into()
    }
}

type Entry<'a> = (&'static str, &'static str, &'a mut dyn Field);

impl RunConfig {
    fn entries(&mut self) -> Vec<Entry<'_>> {
        let RunConfig {
            run,
            world,
            planner,
            motion,
            sensor,
            inverse,
            info,
            selection,
            mission,
            monitor,
            bench,
        } = self;
        vec![
            ("run", "seed", &mut run.seed),
            ("run", "output", &mut run.output),
            ("world", "file", &mut world.file),
            ("world", "start", &mut world.start),
            ("world", "heading", &mut world.heading),
            ("world", "p_occ", &mut world.p_occ),
            ("world", "p_free", &mut world.p_free),
            ("world", "prior_variance", &mut world.prior_variance),
            ("planner", "algorithm", &mut planner.algorithm),
            ("planner", "samples", &mut planner.samples),
            ("planner", "delta", &mut planner.delta),
            ("planner", "r_near", &mut planner.r_near),
            ("planner", "budget", &mut planner.budget),
            ("planner", "delta_ric", &mut planner.delta_ric),
            ("planner", "n_ric", &mut planner.n_ric),
            ("planner", "max_samples", &mut planner.max_samples),
            ("planner", "max_nodes", &mut planner.max_nodes),
            ("motion", "q_std", &mut motion.q_std),
            ("motion", "init_std", &mut motion.init_std),
            ("sensor", "beams", &mut sensor.beams),
            ("sensor", "r_max", &mut sensor.r_max),
            ("sensor", "field_of_view", &mut sensor.field_of_view),
            ("sensor", "z_hit", &mut sensor.z_hit),
            ("sensor", "z_short", &mut sensor.z_short),
            ("sensor", "z_max", &mut sensor.z_max),
            ("sensor", "z_rand", &mut sensor.z_rand),
            ("sensor", "sigma_hit", &mut sensor.sigma_hit),
            ("sensor", "lambda_short", &mut sensor.lambda_short),
            ("sensor", "s_z", &mut sensor.s_z),
            ("inverse", "b_occ", &mut inverse.b_occ),
            ("inverse", "b_free", &mut inverse.b_free),
            ("inverse", "p_sat", &mut inverse.p_sat),
            ("info", "function", &mut info.function),
            ("info", "lengthscale", &mut info.lengthscale),
            ("info", "signal_variance", &mut info.signal_variance),
            ("info", "noise_variance", &mut info.noise_variance),
            ("info", "gh_order", &mut info.gh_order),
            ("selection", "kappa", &mut selection.kappa),
            ("selection", "s_ratio", &mut selection.s_ratio),
            ("mission", "delta_ric", &mut mission.delta_ric),
            ("mission", "p_sat", &mut mission.p_sat),
            ("mission", "p_sat_term", &mut mission.p_sat_term),
            ("mission", "max_steps", &mut mission.max_steps),
            ("mission", "scan_beams", &mut mission.scan_beams),
            ("mission", "scan_z_hit", &mut mission.scan_z_hit),
            ("mission", "scan_z_short", &mut mission.scan_z_short),
            ("mission", "scan_z_max", &mut mission.scan_z_max),
            ("mission", "scan_z_rand", &mut mission.scan_z_rand),
            ("monitor", "dataset", &mut monitor.dataset),
            ("monitor", "function", &mut monitor.function),
            ("monitor", "radius", &mut monitor.radius),
            ("monitor", "training_points", &mut monitor.training_points),
            ("monitor", "query_points", &mut monitor.query_points),
            ("monitor", "delta", &mut monitor.delta),
            ("monitor", "r_near", &mut monitor.r_near),
            ("monitor", "delta_ric", &mut monitor.delta_ric),
            ("monitor", "max_samples", &mut monitor.max_samples),
            ("monitor", "grid_resolution", &mut monitor.grid_resolution),
            ("monitor", "fit_restarts", &mut monitor.fit_restarts),
            ("monitor", "fit_iterations", &mut monitor.fit_iterations),
            ("monitor", "synthetic_records", &mut monitor.synthetic_records),
            ("monitor", "synthetic_width", &mut monitor.synthetic_width),
            ("monitor", "synthetic_height", &mut monitor.synthetic_height),
            ("monitor", "shadowing_std", &mut monitor.shadowing_std),
            ("bench", "sweep", &mut bench.sweep),
            ("bench", "seeds", &mut bench.seeds),
            ("bench", "values", &mut bench.values),
        ]
    }

    /// Set one key, as `section.key`.
    pub fn set(&mut self, dotted: &str, value: &str) -> Result<()> {
        let (section, key) = dotted
            .split_once('.')
            .ok_or_else(|| CliError::Config(format!("expected section.key, found {dotted:?}")))?;
        self.set_in(section, key, value)
    }

    fn set_in(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let mut known_section = false;
        for (s, k, field) in self.entries() {
            if s != section {
                continue;
            }
            known_section = true;
            if k == key {
                return field
                    .parse(value)
                    .map_err(|e| CliError::Config(format!("{section}.{key}: {e}")));
            }
        }
        Err(CliError::Config(if known_section {
            format!("unknown key {section}.{key}")
        } else {
            format!("unknown section [{section}]")
        }))
    }

    /// Parse config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        let mut section: Option<String> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::Config(format!("line {}: malformed section header", n + 1)))?;
                section = Some(name.trim().to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            let section = section
                .as_deref()
                .ok_or_else(|| CliError::Config(format!("line {}: key outside any section", n + 1)))?;
            config
                .set_in(section, key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("line {}: {}", n + 1, e.to_string().trim_start_matches("config: "))))?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e.to_string()))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::input(path, m),
            other => other,
        })
    }

    /// Render every key; `parse(render())` reproduces the config exactly.
    pub fn render(&self) -> String {
        let mut copy = self.clone();
        let mut out = String::new();
        let mut current = "";
        for (section, key, field) in copy.entries() {
            if section != current {
                if !current.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{section}]");
                current = section;
            }
            let _ = writeln!(out, "{key} = {}", field.render());
        }
        out
    }

    pub fn motion_noise(&self) -> MotionNoise {
        MotionNoise::from_std(self.motion.q_std)
    }

    pub fn sensor_model(&self) -> SensorModel {
        let s = &self.sensor;
        SensorModel {
            beams: s.beams,
            r_max: s.r_max,
            field_of_view: s.field_of_view,
            z_hit: s.z_hit,
            z_short: s.z_short,
            z_max: s.z_max,
            z_rand: s.z_rand,
            sigma_hit: s.sigma_hit,
            lambda_short: s.lambda_short,
            s_z: s.s_z,
        }
    }

    fn inverse_with(&self, p_sat: f64) -> Result<InverseModelParams> {
        Ok(InverseModelParams::new(self.inverse.b_free, self.inverse.b_occ, p_sat)?)
    }

    pub fn planner_config(&self) -> PlannerConfig {
        let p = &self.planner;
        PlannerConfig {
            delta: p.delta,
            r_near: p.r_near,
            budget: p.budget,
            delta_ric: p.delta_ric,
            n_ric: p.n_ric,
            seed: self.run.seed,
            max_samples: p.max_samples,
            max_nodes: p.max_nodes,
            motion_noise: self.motion_noise(),
        }
    }

    pub fn selection_params(&self) -> Result<SelectionParams> {
        Ok(SelectionParams::new(self.selection.kappa, self.selection.s_ratio)?)
    }

    fn kernel(&self) -> Result<KernelSpec> {
        Ok(KernelSpec::matern52(self.info.lengthscale, self.info.signal_variance)?)
    }

    /// Information-function parameters for offline planning.
    pub fn info_params(&self) -> Result<InfoParams> {
        Ok(InfoParams {
            kind: self.info.function,
            sensor: self.sensor_model(),
            inverse: self.inverse_with(self.inverse.p_sat)?,
            kernel: self.kernel()?,
            noise_variance: self.info.noise_variance,
            scheme: GaussHermite::new(self.info.gh_order)?,
        })
    }

    pub fn start(&self) -> Point2 {
        Point2::new(self.world.start[0], self.world.start[1])
    }

    pub fn exploration_config(&self) -> Result<ExplorationConfig> {
        let m = &self.mission;
        let mut info = self.info_params()?;
        info.inverse = self.inverse_with(m.p_sat)?;
        let scan_sensor = SensorModel {
            beams: m.scan_beams,
            z_hit: m.scan_z_hit,
            z_short: m.scan_z_short,
            z_max: m.scan_z_max,
            z_rand: m.scan_z_rand,
            ..self.sensor_model()
        };
        Ok(ExplorationConfig {
            start: self.start(),
            heading: self.world.heading,
            scan_sensor,
            mapping: self.inverse_with(self.inverse.p_sat)?,
            info,
            planner: PlannerConfig {
                delta_ric: m.delta_ric,
                max_nodes: usize::MAX,
                ..self.planner_config()
            },
            selection: self.selection_params()?,
            p_sat_term: m.p_sat_term,
            max_steps: m.max_steps,
            pose_std: self.motion.init_std,
            seed: self.run.seed,
        })
    }

    pub fn monitoring_config(&self) -> Result<MonitoringConfig> {
        let m = &self.monitor;
        Ok(MonitoringConfig {
            training_points: m.training_points,
            query_points: m.query_points,
            radius: m.radius,
            kind: m.function,
            planner: PlannerConfig {
                delta: m.delta,
                r_near: m.r_near,
                delta_ric: m.delta_ric,
                max_samples: m.max_samples,
                max_nodes: usize::MAX,
                ..self.planner_config()
            },
            selection: self.selection_params()?,
            grid_resolution: m.grid_resolution,
            pose_std: self.motion.init_std,
            fit: FitOptions {
                random_restarts: m.fit_restarts,
                max_iterations: m.fit_iterations,
                fit_noise: true,
                seed: self.run.seed,
            },
            scheme: GaussHermite::new(self.info.gh_order)?,
        })
    }

    pub fn synthetic_wss(&self) -> SyntheticWss {
        let m = &self.monitor;
        SyntheticWss {
            width: m.synthetic_width,
            height: m.synthetic_height,
            shadowing_std: m.shadowing_std,
            records: m.synthetic_records,
            ..SyntheticWss::default()
        }
    }
}
