//! Closed-loop harnesses: occupancy exploration with entropy-based
//! termination, and wireless signal monitoring over a regressed surface.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::belief::{
    average_map_entropy, cell_entropy, inverse_update, BeliefOverlay, BeliefState, CellPrediction,
    InverseModelParams, Observation, SensorModel,
};
use crate::error::{Error, Result};
use crate::geometry::{no_collision, GridGeometry, GridWorld, Point2, SeededRng};
use crate::gp::{
    fit_hyperparameters, noisy_gram, FitOptions, GaussHermite, GpModel, KernelSpec, Stencil, TrainingSet,
};
use crate::info::{GridInformation, InfoKind, InfoParams, InfoResult, InformationSource, MIN_VARIANCE};
use crate::linalg::Cholesky;
use crate::path::{select_path, Path, SelectionParams};
use crate::planner::{iig_tree, Plan, PlannerConfig};
use crate::pose::PoseBelief;
use crate::spatial::SpatialIndex;

/// Mean Earth radius used by [`haversine_distance`].
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Number of thresholds swept by [`occupancy_auc`].
pub const AUC_THRESHOLDS: usize = 200;

/// One planning step of a mission.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub position: Point2,
    pub heading: f64,
    /// Average map entropy before planning.
    pub entropy: f64,
    pub samples: usize,
    pub nodes: usize,
    pub converged: bool,
    pub final_mean: f64,
    /// Positions actually visited, starting at the pose planned from.
    pub path: Vec<Point2>,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MissionLog {
    pub steps: Vec<StepRecord>,
    pub total_distance: f64,
    pub final_entropy: f64,
    /// The entropy bound was reached.
    pub terminated: bool,
    pub auc: Option<f64>,
    pub rmse: Option<f64>,
    /// Sum of per-edge information increments over the planner tree.
    pub total_info: Option<f64>,
}

/// Draw one noisy range per beam from the beam mixture around the true range.
pub fn simulate_scan(
    truth: &GridWorld,
    position: Point2,
    heading: f64,
    sensor: &SensorModel,
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    sensor.validate()?;
    let total = sensor.z_hit + sensor.z_short + sensor.z_max + sensor.z_rand;
    let mut out = Vec::with_capacity(sensor.beams);
    for k in 0..sensor.beams {
        let z_true = truth.ray_cast(position, sensor.beam_angle(heading, k), sensor.r_max)?.range;
        let u = rng.uniform(0.0, total);
        let z = if u < sensor.z_hit {
            sample_hit(z_true, sensor, rng)
        } else if u < sensor.z_hit + sensor.z_short {
            let l = sensor.lambda_short;
            let mass = 1.0 - libm::exp(-l * z_true);
            -libm::log(1.0 - rng.unit() * mass) / l
        } else if u < sensor.z_hit + sensor.z_short + sensor.z_max {
            sensor.r_max
        } else {
            rng.uniform(0.0, sensor.r_max)
        };
        out.push(z.clamp(0.0, sensor.r_max));
    }
    Ok(out)
}

fn sample_hit(z_true: f64, sensor: &SensorModel, rng: &mut SeededRng) -> f64 {
    for _ in 0..32 {
        let z = rng.normal(z_true, sensor.sigma_hit);
        if (0.0..=sensor.r_max).contains(&z) {
            return z;
        }
    }
    z_true
}

/// Fold a scan into the occupancy grid with the inverse sensor model.
///
/// Cells the beam leaves before `z - 2σ_hit` are observed free and cells
/// overlapping `[z - 2σ_hit, z + 2σ_hit]` are observed occupied. Readings at
/// maximum range carry no return and are discarded.
pub fn integrate_scan(
    belief: &mut BeliefState,
    position: Point2,
    heading: f64,
    ranges: &[f64],
    sensor: &SensorModel,
    params: &InverseModelParams,
) -> Result<()> {
    if ranges.len() != sensor.beams {
        return Err(Error::DimensionMismatch {
            expected: sensor.beams,
            found: ranges.len(),
        });
    }
    if let Some(&z) = ranges.iter().find(|z| !(**z >= 0.0)) {
        return Err(Error::RangeOutOfBounds(z));
    }
    let geom = *belief.geometry();
    if !geom.contains(position) {
        return Err(Error::PointInObstacle {
            x: position.x,
            y: position.y,
        });
    }
    let band = 2.0 * sensor.sigma_hit;
    let mut cells: Vec<(usize, f64)> = Vec::new();
    for (k, &z) in ranges.iter().enumerate() {
        if z >= sensor.r_max {
            continue;
        }
        let angle = sensor.beam_angle(heading, k);
        let dir = Point2::new(libm::cos(angle), libm::sin(angle));
        cells.clear();
        geom.traverse(position, dir, z + band, |idx, t| {
            cells.push((idx, t));
            true
        });
        for (i, &(idx, _)) in cells.iter().enumerate() {
            let t_exit = cells.get(i + 1).map_or(f64::INFINITY, |c| c.1);
            let obs = if t_exit <= z - band {
                Observation::Free
            } else {
                Observation::Occupied
            };
            belief.set_occupancy(idx, inverse_update(belief.occupancy(idx), obs, params));
        }
    }
    Ok(())
}

/// Binary world for planning: cells believed occupied (> 0.5) are obstacles.
pub fn planning_world(belief: &BeliefState) -> Result<GridWorld> {
    let cells = belief.occupancies().iter().map(|&p| p > 0.5).collect();
    GridWorld::new(*belief.geometry(), cells)
}

/// Area under the ROC curve of occupancy probabilities against the true map,
/// by the trapezoid rule over evenly spaced thresholds in `[0, 1]`.
pub fn occupancy_auc(belief: &BeliefState, truth: &GridWorld) -> Result<f64> {
    if belief.geometry() != truth.geometry() {
        return Err(Error::DimensionMismatch {
            expected: truth.cells().len(),
            found: belief.len(),
        });
    }
    let positives = truth.cells().iter().filter(|&&c| c).count();
    let negatives = truth.cells().len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::EmptySet);
    }
    let mut roc = Vec::with_capacity(AUC_THRESHOLDS);
    for k in 0..AUC_THRESHOLDS {
        let t = k as f64 / (AUC_THRESHOLDS - 1) as f64;
        let (mut tp, mut fp) = (0usize, 0usize);
        for (&p, &occ) in belief.occupancies().iter().zip(truth.cells()) {
            if p >= t {
                if occ {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
        }
        roc.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
    }
    // thresholds ascend, so the curve runs from (1, 1) toward (0, 0)
    let mut area = 0.0;
    for w in roc.windows(2) {
        area += (w[0].0 - w[1].0) * 0.5 * (w[0].1 + w[1].1);
    }
    let last = roc[roc.len() - 1];
    area += last.0 * 0.5 * last.1;
    Ok(area)
}

#[derive(Debug, Clone)]
pub struct ExplorationConfig {
    pub start: Point2,
    pub heading: f64,
    /// Simulated range finder used for mapping.
    pub scan_sensor: SensorModel,
    /// Inverse model used to update the map from real scans.
    pub mapping: InverseModelParams,
    /// Information function used while planning.
    pub info: InfoParams,
    pub planner: PlannerConfig,
    pub selection: SelectionParams,
    /// Termination fires once the average map entropy is at most `H(p_sat_term)`.
    pub p_sat_term: f64,
    pub max_steps: usize,
    /// Standard deviations of the pose at the start of every planning step.
    pub pose_std: [f64; 3],
    pub seed: u64,
}

impl Default for ExplorationConfig {
    fn default() -> Self {
        let mut info = InfoParams::new(InfoKind::Miub);
        info.inverse = InverseModelParams::new(0.6, 1.66, 0.3).expect("valid online parameters");
        Self {
            start: crate::worlds::DESK_START,
            heading: 0.0,
            scan_sensor: SensorModel {
                beams: 180,
                z_hit: 0.97,
                z_short: 0.01,
                z_max: 0.01,
                z_rand: 0.01,
                ..SensorModel::default()
            },
            mapping: InverseModelParams::default(),
            info,
            planner: PlannerConfig {
                delta_ric: 1e-2,
                ..PlannerConfig::default()
            },
            selection: SelectionParams::default(),
            p_sat_term: 0.1,
            max_steps: 100,
            pose_std: [0.4, 0.1, 0.0],
            seed: 0,
        }
    }
}

/// Outcome of an exploration mission.
#[derive(Debug, Clone)]
pub struct ExplorationRun {
    pub log: MissionLog,
    pub belief: BeliefState,
}

/// Sense, plan, select and execute until the map entropy bound is met.
pub fn run_exploration(truth: &GridWorld, config: &ExplorationConfig) -> Result<ExplorationRun> {
    if !truth.is_free(config.start) {
        return Err(Error::PointInObstacle {
            x: config.start.x,
            y: config.start.y,
        });
    }
    let belief = BeliefState::uniform(*truth.geometry(), 0.5, 1.0)?;
    explore_from(truth, belief, config)
}

/// Exploration starting from an existing belief.
pub fn explore_from(truth: &GridWorld, mut belief: BeliefState, config: &ExplorationConfig) -> Result<ExplorationRun> {
    let h_term = cell_entropy(config.p_sat_term)?;
    let mut rng = SeededRng::new(config.seed);
    let mut scan_rng = rng.fork();
    let mut position = config.start;
    let mut heading = config.heading;
    let scan = simulate_scan(truth, position, heading, &config.scan_sensor, &mut scan_rng)?;
    integrate_scan(&mut belief, position, heading, &scan, &config.scan_sensor, &config.mapping)?;

    let mut log = MissionLog::default();
    let mut stalls = 0;
    let mut step = 0;
    loop {
        let entropy = average_map_entropy(&belief)?;
        log.final_entropy = entropy;
        if entropy <= h_term {
            log.terminated = true;
            break;
        }
        if step >= config.max_steps {
            break;
        }
        let mut world = planning_world(&belief)?;
        if let Some(cell) = world.geometry().cell_of(position) {
            let (c, r) = world.geometry().col_row(cell);
            world.set_obstacle(c, r, false);
        }
        let source = GridInformation {
            belief: &belief,
            params: config.info.clone(),
        };
        let planner = PlannerConfig {
            seed: rng.fork().seed(),
            ..config.planner
        };
        let start = PoseBelief::with_std(position, heading, config.pose_std);
        let plan = iig_tree(&world, &source, start, &planner)?;
        let mut record = StepRecord {
            step,
            position,
            heading,
            entropy,
            samples: plan.samples,
            nodes: plan.tree.len(),
            converged: plan.converged,
            final_mean: plan.final_mean(),
            path: alloc::vec![position],
            distance: 0.0,
        };
        if plan.tree.len() == 1 {
            stalls += 1;
            log.steps.push(record);
            if stalls >= 2 {
                return Err(Error::Stalled { step });
            }
            step += 1;
            continue;
        }
        stalls = 0;
        let path = select_path(&plan.tree, &config.selection)?;
        for w in path.nodes.windows(2) {
            let (a, b) = (plan.tree.node(w[0]).position, plan.tree.node(w[1]).position);
            if !no_collision(a, b, truth) {
                break;
            }
            let d = b - a;
            record.distance += d.norm();
            heading = libm::atan2(d.y, d.x);
            position = b;
            record.path.push(b);
            let scan = simulate_scan(truth, position, heading, &config.scan_sensor, &mut scan_rng)?;
            integrate_scan(&mut belief, position, heading, &scan, &config.scan_sensor, &config.mapping)?;
        }
        log.total_distance += record.distance;
        log.steps.push(record);
        step += 1;
    }
    log.auc = Some(occupancy_auc(&belief, truth)?);
    Ok(ExplorationRun { log, belief })
}

/// Great-circle distance between `(lat, lon)` pairs in degrees.
pub fn haversine_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lat2) = (a.0.to_radians(), b.0.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.1 - a.1).to_radians();
    let s = libm::sin(dlat / 2.0);
    let t = libm::sin(dlon / 2.0);
    let h = s * s + libm::cos(lat1) * libm::cos(lat2) * t * t;
    2.0 * EARTH_RADIUS_M * libm::asin(libm::sqrt(h.clamp(0.0, 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WssRecord {
    pub lat: f64,
    pub lon: f64,
    pub rssi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WssDataset {
    records: Vec<WssRecord>,
}

impl WssDataset {
    pub fn new(records: Vec<WssRecord>) -> Result<Self> {
        if records.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                found: records.len(),
            });
        }
        for r in &records {
            if !(r.lat.is_finite() && r.lon.is_finite() && r.rssi.is_finite()) {
                return Err(Error::InvalidParameter("dataset values must be finite"));
            }
            if r.lat.abs() > 90.0 || r.lon.abs() > 180.0 {
                return Err(Error::InvalidParameter("coordinates out of range"));
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[WssRecord] {
        &self.records
    }

    /// South-west corner of the records, the origin of the metric frame.
    pub fn anchor(&self) -> (f64, f64) {
        let lat = self.records.iter().map(|r| r.lat).fold(f64::INFINITY, f64::min);
        let lon = self.records.iter().map(|r| r.lon).fold(f64::INFINITY, f64::min);
        (lat, lon)
    }

    /// Records in meters east and north of the anchor, by haversine distance
    /// along the anchor's parallel and meridian.
    pub fn to_metric(&self) -> Vec<(Point2, f64)> {
        let (lat0, lon0) = self.anchor();
        self.records
            .iter()
            .map(|r| {
                let x = haversine_distance((lat0, lon0), (lat0, r.lon));
                let y = haversine_distance((lat0, lon0), (r.lat, lon0));
                (Point2::new(x, y), r.rssi)
            })
            .collect()
    }
}

/// Log-distance path-loss field with Gaussian shadowing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticWss {
    pub anchor: (f64, f64),
    /// Survey area in meters.
    pub width: f64,
    pub height: f64,
    pub transmitter: Point2,
    /// Received power at 1 m, dBm.
    pub power_at_1m: f64,
    pub exponent: f64,
    pub shadowing_std: f64,
    pub records: usize,
}

impl Default for SyntheticWss {
    fn default() -> Self {
        Self {
            anchor: (34.088854, -117.810667),
            width: 300.0,
            height: 200.0,
            transmitter: Point2::new(-20.0, 100.0),
            power_at_1m: -30.0,
            exponent: 2.2,
            shadowing_std: 2.0,
            records: 2700,
        }
    }
}

impl SyntheticWss {
    /// Noise-free received power at `p`.
    pub fn mean_at(&self, p: Point2) -> f64 {
        let d = p.distance(self.transmitter).max(1.0);
        self.power_at_1m - 10.0 * self.exponent * libm::log10(d)
    }

    /// Survey records on evenly spaced east-west passes with jittered spacing.
    pub fn generate(&self, rng: &mut SeededRng) -> Result<WssDataset> {
        if !(self.width > 0.0 && self.height > 0.0) || self.records < 2 {
            return Err(Error::InvalidParameter("synthetic survey needs an area and 2+ records"));
        }
        let (lat0, lon0) = self.anchor;
        let m_per_deg_lat = EARTH_RADIUS_M * core::f64::consts::PI / 180.0;
        let m_per_deg_lon = m_per_deg_lat * libm::cos(lat0.to_radians());
        let records = (0..self.records)
            .map(|_| {
                let p = Point2::new(rng.uniform(0.0, self.width), rng.uniform(0.0, self.height));
                WssRecord {
                    lat: lat0 + p.y / m_per_deg_lat,
                    lon: lon0 + p.x / m_per_deg_lon,
                    rssi: self.mean_at(p) + rng.normal(0.0, self.shadowing_std),
                }
            })
            .collect();
        WssDataset::new(records)
    }
}

#[derive(Debug, Clone)]
pub struct MonitoringConfig {
    pub training_points: usize,
    /// Approximate number of query points on the surface grid.
    pub query_points: usize,
    pub radius: f64,
    pub kind: InfoKind,
    pub planner: PlannerConfig,
    pub selection: SelectionParams,
    /// Resolution of the free-space grid used for sampling and pruning.
    pub grid_resolution: f64,
    pub pose_std: [f64; 3],
    pub fit: FitOptions,
    pub scheme: GaussHermite,
}

impl Default for MonitoringConfig {
    fn default() -> Self {
        Self {
            training_points: 267,
            query_points: 3648,
            radius: 10.0,
            kind: InfoKind::Gpvr,
            planner: PlannerConfig {
                delta: 5.0,
                r_near: 5.0,
                max_samples: 1000,
                ..PlannerConfig::default()
            },
            selection: SelectionParams::default(),
            grid_resolution: 1.0,
            pose_std: [0.4, 0.1, 0.0],
            fit: FitOptions {
                random_restarts: 1,
                max_iterations: 200,
                fit_noise: true,
                seed: 0,
            },
            scheme: GaussHermite::default(),
        }
    }
}

/// Signed `ln(1 + |d|)` per axis, relative to a centre point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogTransform {
    pub centre: Point2,
}

impl LogTransform {
    pub fn apply(&self, p: Point2) -> [f64; 2] {
        let f = |d: f64| libm::copysign(libm::log1p(libm::fabs(d)), d);
        [f(p.x - self.centre.x), f(p.y - self.centre.y)]
    }
}

/// Regressed signal surface used as ground truth and as the planner's map.
#[derive(Debug, Clone)]
pub struct MonitoringField {
    pub transform: LogTransform,
    pub kernel: KernelSpec,
    pub noise_variance: f64,
    pub offset: f64,
    pub queries: Vec<Point2>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub index: SpatialIndex,
    pub geometry: GridGeometry,
}

impl MonitoringField {
    /// Fit an ARD squared-exponential GP on a uniform-stride subset of the
    /// records and evaluate it on a regular grid of query points.
    pub fn build(dataset: &WssDataset, config: &MonitoringConfig) -> Result<Self> {
        let metric = dataset.to_metric();
        let n_train = config.training_points.min(metric.len());
        if n_train < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                found: n_train,
            });
        }
        let stride = metric.len() as f64 / n_train as f64;
        let train: Vec<(Point2, f64)> = (0..n_train).map(|i| metric[(i as f64 * stride) as usize]).collect();
        let strongest = train
            .iter()
            .fold(train[0], |best, r| if r.1 > best.1 { *r } else { best });
        let transform = LogTransform { centre: strongest.0 };
        let offset = train.iter().map(|r| r.1).sum::<f64>() / n_train as f64;
        let inputs: Vec<f64> = train.iter().flat_map(|r| transform.apply(r.0)).collect();
        let targets: Vec<f64> = train.iter().map(|r| r.1 - offset).collect();
        let spread = targets.iter().map(|t| t * t).sum::<f64>() / n_train as f64;
        let data = TrainingSet::new(2, inputs, targets, 0.1 * spread.max(1e-6))?;
        let guess = KernelSpec::squared_exponential_ard(alloc::vec![1.0, 1.0], spread.max(1e-6))?;
        let fitted = fit_hyperparameters(&data, &[guess], &config.fit)?;
        let data = data.with_noise_variance(fitted.noise_variance)?;
        let model = GpModel::fit(&data, &fitted.kernel)?;

        let (mut lo, mut hi) = (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for (p, _) in &metric {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let (w, h) = (hi.x - lo.x, hi.y - lo.y);
        if !(w > 0.0 && h > 0.0) {
            return Err(Error::InvalidParameter("records must span an area"));
        }
        let spacing = libm::sqrt(w * h / config.query_points.max(1) as f64);
        let (nx, ny) = (libm::floor(w / spacing) as usize + 1, libm::floor(h / spacing) as usize + 1);
        let mut queries = Vec::with_capacity(nx * ny);
        let (mut mean, mut variance) = (Vec::new(), Vec::new());
        for j in 0..ny {
            for i in 0..nx {
                let q = Point2::new(lo.x + i as f64 * spacing, lo.y + j as f64 * spacing);
                let (m, v) = model.predict(&transform.apply(q))?;
                queries.push(q);
                mean.push(m + offset);
                variance.push(v.max(MIN_VARIANCE));
            }
        }
        let index = SpatialIndex::from_points(queries.iter().copied());
        let res = config.grid_resolution;
        let geometry = GridGeometry::new(
            libm::ceil(w / res) as usize + 1,
            libm::ceil(h / res) as usize + 1,
            res,
            lo,
        )?;
        Ok(Self {
            transform,
            kernel: fitted.kernel,
            noise_variance: fitted.noise_variance,
            offset,
            queries,
            mean,
            variance,
            index,
            geometry,
        })
    }

    fn k(&self, a: Point2, b: Point2) -> f64 {
        self.kernel.eval(&self.transform.apply(a), &self.transform.apply(b))
    }

    /// Query points inside the sensing disc.
    pub fn sense(&self, position: Point2, radius: f64) -> Result<Vec<usize>> {
        self.index.near(position, radius)
    }

    /// Start of the survey: the query point with the strongest signal.
    pub fn strongest(&self) -> Point2 {
        let mut best = 0;
        for (i, m) in self.mean.iter().enumerate() {
            if *m > self.mean[best] {
                best = i;
            }
        }
        self.queries[best]
    }

    /// GP reconstruction of the whole surface from measurements at `cells`.
    pub fn reconstruct(&self, cells: &[usize]) -> Result<Vec<f64>> {
        if cells.is_empty() {
            return Ok(alloc::vec![self.offset; self.queries.len()]);
        }
        let local = cells.iter().map(|&c| self.mean[c]).sum::<f64>() / cells.len() as f64;
        let inputs: Vec<f64> = cells.iter().flat_map(|&c| self.transform.apply(self.queries[c])).collect();
        let targets: Vec<f64> = cells.iter().map(|&c| self.mean[c] - local).collect();
        let data = TrainingSet::new(2, inputs, targets, self.noise_variance)?;
        let model = GpModel::fit(&data, &self.kernel)?;
        self.queries
            .iter()
            .map(|q| model.predict(&self.transform.apply(*q)).map(|(m, _)| m + local))
            .collect()
    }
}

/// Variance reduction over the regressed surface, sensing by radius query.
#[derive(Debug, Clone)]
pub struct SurfaceInformation<'a> {
    pub field: &'a MonitoringField,
    pub radius: f64,
    pub kind: InfoKind,
    pub scheme: GaussHermite,
}

impl InformationSource for SurfaceInformation<'_> {
    fn evaluate(&self, pose: &PoseBelief, parent: &BeliefOverlay, i_near: Option<f64>) -> Result<InfoResult> {
        let stencil = match self.kind {
            InfoKind::Gpvr => None,
            InfoKind::Ugpvr => Some(Stencil::new(pose.position_covariance(), &self.scheme)?),
            _ => return Err(Error::InvalidParameter("monitoring supports gpvr and ugpvr only")),
        };
        let f = self.field;
        let mut info = i_near.unwrap_or(0.0);
        let cells = f.sense(pose.position, self.radius)?;
        let mut delta = BTreeMap::new();
        if !cells.is_empty() {
            let x: Vec<Point2> = cells.iter().map(|&c| f.queries[c]).collect();
            let k = |a: Point2, b: Point2| match &stencil {
                Some(s) => s.expect_fn(a, |u| f.k(u, b)),
                None => f.k(a, b),
            };
            let k0 = f.kernel.prior_variance();
            let gram = noisy_gram(x.len(), f.noise_variance, |i, j| if i == j { k0 } else { k(x[i], x[j]) });
            let chol = Cholesky::new(&gram)?;
            for (col, &cell) in cells.iter().enumerate() {
                let c_star: Vec<f64> = x
                    .iter()
                    .enumerate()
                    .map(|(i, xi)| if i == col { k0 } else { k(*xi, x[col]) })
                    .collect();
                let v_col = chol.solve_lower(&c_star);
                let v = (k0 - v_col.iter().map(|a| a * a).sum::<f64>()).max(MIN_VARIANCE);
                let sigma = parent.get(cell).map_or(f.variance[cell], |c| c.variance);
                if !(sigma > 0.0) {
                    continue;
                }
                let fused = 1.0 / (1.0 / sigma + 1.0 / v);
                info += libm::log(sigma) - libm::log(fused);
                delta.insert(
                    cell,
                    CellPrediction {
                        occupancy: 0.5,
                        variance: fused,
                    },
                );
            }
        }
        Ok(InfoResult {
            info,
            overlay: parent.child(delta),
        })
    }
}

/// Root-mean-square difference.
pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(libm::sqrt(s / a.len() as f64))
}

/// Outcome of one monitoring run.
#[derive(Debug, Clone)]
pub struct MonitoringRun {
    pub plan: Plan,
    pub path: Path,
    pub log: MissionLog,
}

/// Plan once over the field, measure at every node of the selected path,
/// reconstruct the surface and score it.
pub fn run_monitoring(field: &MonitoringField, config: &MonitoringConfig) -> Result<MonitoringRun> {
    if !(config.radius > 0.0) {
        return Err(Error::NonPositive("sensing radius"));
    }
    let world = GridWorld::new(field.geometry, alloc::vec![false; field.geometry.len()])?;
    let source = SurfaceInformation {
        field,
        radius: config.radius,
        kind: config.kind,
        scheme: config.scheme.clone(),
    };
    let start_position = field.strongest();
    let start = PoseBelief::with_std(start_position, 0.0, config.pose_std);
    let plan = iig_tree(&world, &source, start, &config.planner)?;
    let path = select_path(&plan.tree, &config.selection)?;

    let mut measured = alloc::collections::BTreeSet::new();
    let mut positions = Vec::with_capacity(path.len());
    let mut distance = 0.0;
    for (i, &id) in path.nodes.iter().enumerate() {
        let p = plan.tree.node(id).position;
        if i > 0 {
            distance += p.distance(positions[i - 1]);
        }
        positions.push(p);
        measured.extend(field.sense(p, config.radius)?);
    }
    let cells: Vec<usize> = measured.into_iter().collect();
    let estimate = field.reconstruct(&cells)?;
    let total_info = plan.tree.nodes()[1..]
        .iter()
        .map(|n| n.info - plan.tree.node(n.parent.expect("non-root")).info)
        .sum();
    let log = MissionLog {
        steps: alloc::vec![StepRecord {
            step: 0,
            position: start_position,
            heading: 0.0,
            entropy: f64::NAN,
            samples: plan.samples,
            nodes: plan.tree.len(),
            converged: plan.converged,
            final_mean: plan.final_mean(),
            path: positions,
            distance,
        }],
        total_distance: distance,
        final_entropy: f64::NAN,
        terminated: plan.converged,
        auc: None,
        rmse: Some(rmse(&estimate, &field.mean)?),
        total_info: Some(total_info),
    };
    Ok(MonitoringRun { plan, path, log })
}
