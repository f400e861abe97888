//! RIG-tree and IIG-tree construction.
//!
//! Both planners share one growth loop. RIG stops after a fixed number of
//! samples; IIG stops once the windowed mean of the penalized relative
//! information contribution drops below a threshold.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use crate::belief::BeliefOverlay;
use crate::error::{Error, Result};
use crate::geometry::{no_collision, sample_uniform, steer, GridGeometry, GridWorld, Point2, SeededRng};
use crate::info::InformationSource;
use crate::pose::{propagate, MotionNoise, PoseBelief};
use crate::spatial::SpatialIndex;

/// Lower bound on the neighbour information used as RIC denominator.
pub const MIN_NEAR_INFO: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct NodeRecord {
    pub id: usize,
    pub position: Point2,
    pub cost: f64,
    pub info: f64,
    pub parent: Option<usize>,
    pub overlay: BeliefOverlay,
    pub pose: PoseBelief,
    pub closed: bool,
}

/// Planner tree. Node ids are insertion order, so parents are always older
/// than their children.
#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<NodeRecord>,
    children: Vec<Vec<usize>>,
    index: SpatialIndex,
    cells: BTreeMap<usize, Vec<usize>>,
    geometry: GridGeometry,
}

impl Tree {
    fn new(geometry: GridGeometry) -> Self {
        Self {
            nodes: Vec::new(),
            children: Vec::new(),
            index: SpatialIndex::new(),
            cells: BTreeMap::new(),
            geometry,
        }
    }

    /// Rebuild a tree from `(position, cost, info, parent)` rows, e.g. after
    /// loading from disk. Poses and overlays are not restored.
    pub fn from_rows(geometry: GridGeometry, rows: &[(Point2, f64, f64, Option<usize>)]) -> Result<Self> {
        let mut tree = Self::new(geometry);
        for (id, &(position, cost, info, parent)) in rows.iter().enumerate() {
            match parent {
                Some(p) if p >= id => return Err(Error::InvalidParameter("parent must precede child")),
                None if id > 0 => return Err(Error::InvalidParameter("only the root may lack a parent")),
                _ => {}
            }
            tree.push(NodeRecord {
                id,
                position,
                cost,
                info,
                parent,
                overlay: BeliefOverlay::new(),
                pose: PoseBelief::certain(position, 0.0),
                closed: false,
            });
        }
        Ok(tree)
    }

    fn push(&mut self, node: NodeRecord) -> usize {
        let id = self.nodes.len();
        let idx = self.index.insert(node.position);
        debug_assert_eq!(idx, id);
        if node.closed {
            self.index.remove(idx);
        }
        if let Some(cell) = self.geometry.cell_of(node.position) {
            self.cells.entry(cell).or_default().push(id);
        }
        if let Some(p) = node.parent {
            self.children[p].push(id);
        }
        self.children.push(Vec::new());
        self.nodes.push(node);
        id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &NodeRecord {
        &self.nodes[id]
    }

    pub fn children(&self, id: usize) -> &[usize] {
        &self.children[id]
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn open_count(&self) -> usize {
        self.index.len()
    }

    /// Closest open node.
    pub fn nearest_open(&self, p: Point2) -> Option<usize> {
        self.index.nearest(p).ok()
    }

    /// Open nodes within `r` of `p`, by id.
    pub fn near_open(&self, p: Point2, r: f64) -> Result<Vec<usize>> {
        if self.index.is_empty() {
            return Ok(Vec::new());
        }
        self.index.near(p, r)
    }

    /// All nodes, open or closed, in the grid cell containing `p`.
    pub fn co_located(&self, p: Point2) -> impl Iterator<Item = &NodeRecord> {
        let ids: &[usize] = match self.geometry.cell_of(p).and_then(|c| self.cells.get(&c)) {
            Some(v) => v,
            None => &[],
        };
        ids.iter().map(move |&i| &self.nodes[i])
    }
}

/// Ring buffer of penalized RIC values plus the samples-since-insertion counter.
#[derive(Debug, Clone)]
pub struct RicWindow {
    capacity: usize,
    values: VecDeque<f64>,
    pub samples_since_insert: usize,
}

impl RicWindow {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::NonPositive("RIC window size"));
        }
        Ok(Self {
            capacity,
            values: VecDeque::with_capacity(capacity),
            samples_since_insert: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.values.len() == self.capacity
    }

    pub fn push(&mut self, value: f64) {
        if self.values.len() == self.capacity {
            self.values.pop_front();
        }
        self.values.push_back(value);
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied()
    }
}

/// Penalized relative information contribution.
pub fn compute_ric(i_new: f64, i_near: f64, n_samples: usize) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::NonPositive("sample count"));
    }
    let denom = i_near.max(MIN_NEAR_INFO);
    Ok((i_new / denom - 1.0) / n_samples as f64)
}

/// Mean of the window, or `+∞` until it is full.
pub fn average_ric(window: &RicWindow) -> f64 {
    if !window.is_full() {
        return f64::INFINITY;
    }
    window.values().sum::<f64>() / window.len() as f64
}

/// `true` when some co-located node is at least as cheap and at least as informative.
pub fn prune<'a, I>(cost: f64, info: f64, co_located: I) -> bool
where
    I: IntoIterator<Item = &'a NodeRecord>,
{
    co_located.into_iter().any(|n| n.cost <= cost && n.info >= info)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    /// Steer step in meters.
    pub delta: f64,
    pub r_near: f64,
    /// Path-length budget; nodes beyond it are closed.
    pub budget: f64,
    pub delta_ric: f64,
    pub n_ric: usize,
    pub seed: u64,
    pub max_samples: usize,
    /// Memory guard: stop growing once the tree holds this many nodes.
    pub max_nodes: usize,
    pub motion_noise: MotionNoise,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            delta: 1.0,
            r_near: 1.0,
            budget: f64::INFINITY,
            delta_ric: 5e-4,
            n_ric: 30,
            seed: 0,
            max_samples: 200_000,
            max_nodes: usize::MAX,
            motion_noise: MotionNoise::default(),
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::NonPositive("delta"));
        }
        if !(self.r_near > 0.0) || !self.r_near.is_finite() {
            return Err(Error::NonPositive("r_near"));
        }
        if !(self.budget >= 0.0) {
            return Err(Error::InvalidParameter("budget must be nonnegative"));
        }
        if !(self.delta_ric >= 0.0) {
            return Err(Error::InvalidParameter("delta_ric must be nonnegative"));
        }
        if self.n_ric == 0 {
            return Err(Error::NonPositive("n_ric"));
        }
        if self.max_samples == 0 {
            return Err(Error::NonPositive("max_samples"));
        }
        if self.max_nodes == 0 {
            return Err(Error::NonPositive("max_nodes"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    /// Total samples drawn when the node was inserted.
    pub samples: usize,
    pub iric: f64,
    /// Windowed mean after this insertion.
    pub mean: f64,
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub tree: Tree,
    pub trace: Vec<TraceEntry>,
    pub samples: usize,
    /// IIG only: the windowed mean fell below the threshold.
    pub converged: bool,
}

impl Plan {
    pub fn final_mean(&self) -> f64 {
        self.trace.last().map_or(f64::INFINITY, |t| t.mean)
    }
}

enum Stop {
    Samples(usize),
    Converged,
}

/// Tree grown without the convergence test, for exactly `samples` samples.
pub fn rig_tree<S: InformationSource>(
    world: &GridWorld,
    source: &S,
    start: PoseBelief,
    config: &PlannerConfig,
    samples: usize,
) -> Result<Plan> {
    grow(world, source, start, config, Stop::Samples(samples))
}

/// Tree grown until the windowed RIC mean drops below `config.delta_ric`.
pub fn iig_tree<S: InformationSource>(
    world: &GridWorld,
    source: &S,
    start: PoseBelief,
    config: &PlannerConfig,
) -> Result<Plan> {
    if !(config.delta_ric > 0.0) {
        return Err(Error::NonPositive("delta_ric"));
    }
    grow(world, source, start, config, Stop::Converged)
}

fn grow<S: InformationSource>(
    world: &GridWorld,
    source: &S,
    start: PoseBelief,
    config: &PlannerConfig,
    stop: Stop,
) -> Result<Plan> {
    config.validate()?;
    if !world.is_free(start.position) {
        return Err(Error::PointInObstacle {
            x: start.position.x,
            y: start.position.y,
        });
    }
    let mut rng = SeededRng::new(config.seed);
    let mut tree = Tree::new(*world.geometry());
    let root = source.evaluate(&start, &BeliefOverlay::new(), None)?;
    tree.push(NodeRecord {
        id: 0,
        position: start.position,
        cost: 0.0,
        info: root.info,
        parent: None,
        overlay: root.overlay,
        pose: start,
        closed: 0.0 > config.budget,
    });

    let mut window = RicWindow::new(config.n_ric)?;
    let mut trace = Vec::new();
    let mut samples = 0usize;
    let mut converged = false;
    loop {
        match stop {
            Stop::Samples(n) if samples >= n => break,
            Stop::Converged => {
                if average_ric(&window) < config.delta_ric {
                    converged = true;
                    break;
                }
                if samples >= config.max_samples {
                    break;
                }
            }
            _ => {}
        }
        if tree.open_count() == 0 || tree.len() >= config.max_nodes {
            break;
        }
        samples += 1;
        window.samples_since_insert += 1;

        let x_sample = sample_uniform(world, &mut rng)?;
        let nearest = match tree.nearest_open(x_sample) {
            Some(n) => n,
            None => break,
        };
        let x_feasible = steer(tree.node(nearest).position, x_sample, config.delta)?;
        let near = tree.near_open(x_feasible, config.r_near)?;
        for n_near in near {
            let near_node = tree.node(n_near);
            let from = near_node.position;
            let x_new = steer(from, x_feasible, config.delta)?;
            let length = from.distance(x_new);
            if length == 0.0 || !no_collision(from, x_new, world) {
                continue;
            }
            let pose = propagate(&near_node.pose, from, x_new, &config.motion_noise);
            let result = source.evaluate(&pose, &near_node.overlay, Some(near_node.info))?;
            let cost = near_node.cost + length;
            if prune(cost, result.info, tree.co_located(x_new)) {
                continue;
            }
            let iric = compute_ric(result.info, near_node.info, window.samples_since_insert.max(1))?;
            window.push(iric);
            window.samples_since_insert = 0;
            trace.push(TraceEntry {
                samples,
                iric,
                mean: average_ric(&window),
            });
            let id = tree.len();
            tree.push(NodeRecord {
                id,
                position: x_new,
                cost,
                info: result.info,
                parent: Some(n_near),
                overlay: result.overlay,
                pose,
                closed: cost > config.budget,
            });
        }
    }
    Ok(Plan {
        tree,
        trace,
        samples,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::BeliefState;
    use crate::info::{GridInformation, InfoKind, InfoParams};
    use crate::worlds::{desk_world, DESK_START};
    use proptest::prelude::*;

    fn node(cost: f64, info: f64) -> NodeRecord {
        NodeRecord {
            id: 0,
            position: Point2::new(0.0, 0.0),
            cost,
            info,
            parent: None,
            overlay: BeliefOverlay::new(),
            pose: PoseBelief::certain(Point2::new(0.0, 0.0), 0.0),
            closed: false,
        }
    }

    fn miub(belief: &BeliefState) -> GridInformation<'_> {
        GridInformation {
            belief,
            params: InfoParams::new(InfoKind::Miub),
        }
    }

    #[test]
    fn ric_arithmetic() {
        assert!((compute_ric(110.0, 100.0, 1).unwrap() - 0.1).abs() < 1e-15);
        assert!((compute_ric(110.0, 100.0, 5).unwrap() - 0.02).abs() < 1e-15);
        assert_eq!(compute_ric(42.0, 42.0, 3).unwrap(), 0.0);
        assert!(compute_ric(1.0, 1.0, 0).is_err());
        assert_eq!(compute_ric(1e-9, 0.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn window_mean_waits_for_full_window() {
        let mut w = RicWindow::new(3).unwrap();
        assert_eq!(average_ric(&w), f64::INFINITY);
        w.push(0.1);
        w.push(0.2);
        assert_eq!(average_ric(&w), f64::INFINITY);
        w.push(0.3);
        assert!((average_ric(&w) - 0.2).abs() < 1e-15);
        w.push(0.4);
        assert!((average_ric(&w) - 0.3).abs() < 1e-15);
        assert!(RicWindow::new(0).is_err());
    }

    #[test]
    fn prune_partial_order() {
        let existing = [node(5.0, 10.0)];
        assert!(prune(6.0, 9.0, &existing));
        assert!(!prune(6.0, 12.0, &existing));
        assert!(prune(5.0, 10.0, &existing));
        assert!(!prune(4.0, 9.0, &existing));
        assert!(!prune(1.0, 1.0, &[]));
    }

    #[test]
    fn zero_samples_gives_root_only() {
        let world = GridWorld::empty(50, 50, 0.2).unwrap();
        let belief = BeliefState::from_world(&world, 0.65, 0.35, 1.0).unwrap();
        let start = PoseBelief::certain(Point2::new(5.0, 5.0), 0.0);
        let plan = rig_tree(&world, &miub(&belief), start, &PlannerConfig::default(), 0).unwrap();
        assert_eq!(plan.tree.len(), 1);
        assert!(plan.tree.node(0).info > 0.0);
    }

    #[test]
    fn zero_budget_closes_everything() {
        let world = GridWorld::empty(50, 50, 0.2).unwrap();
        let belief = BeliefState::from_world(&world, 0.65, 0.35, 1.0).unwrap();
        let start = PoseBelief::certain(Point2::new(5.0, 5.0), 0.0);
        let config = PlannerConfig {
            budget: 0.0,
            ..PlannerConfig::default()
        };
        let plan = rig_tree(&world, &miub(&belief), start, &config, 200).unwrap();
        assert!(plan.tree.len() > 1);
        assert!(!plan.tree.node(0).closed);
        for n in &plan.tree.nodes()[1..] {
            assert!(n.closed);
            assert_eq!(n.parent, Some(0));
        }
        assert_eq!(plan.tree.open_count(), 1);
    }

    #[test]
    fn start_in_obstacle_is_rejected() {
        let world = desk_world();
        let belief = BeliefState::from_world(&world, 0.65, 0.35, 1.0).unwrap();
        let start = PoseBelief::certain(Point2::new(10.0, 10.0), 0.0);
        let err = iig_tree(&world, &miub(&belief), start, &PlannerConfig::default()).unwrap_err();
        assert!(matches!(err, Error::PointInObstacle { .. }));
    }

    #[test]
    fn huge_threshold_stops_at_first_full_window() {
        let world = desk_world();
        let belief = BeliefState::from_world(&world, 0.65, 0.35, 1.0).unwrap();
        let start = PoseBelief::certain(DESK_START, 0.0);
        let config = PlannerConfig {
            delta_ric: 1e300,
            ..PlannerConfig::default()
        };
        let plan = iig_tree(&world, &miub(&belief), start, &config).unwrap();
        assert!(plan.converged);
        // one sample can insert several nodes; the window fills during the last one
        assert!(plan.trace.len() >= config.n_ric);
        let before_last = plan.trace.iter().filter(|t| t.samples < plan.samples).count();
        assert!(before_last < config.n_ric);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn tree_structure_invariants(seed in any::<u64>(), samples in 1usize..150) {
            let world = desk_world();
            let belief = BeliefState::from_world(&world, 0.65, 0.35, 1.0).unwrap();
            let start = PoseBelief::certain(DESK_START, 0.0);
            let config = PlannerConfig { seed, budget: 8.0, ..PlannerConfig::default() };
            let plan = rig_tree(&world, &miub(&belief), start, &config, samples).unwrap();
            let t = &plan.tree;
            prop_assert_eq!(t.node(0).cost, 0.0);
            for n in &t.nodes()[1..] {
                let p = t.node(n.parent.unwrap());
                prop_assert!(p.id < n.id);
                prop_assert!(!p.closed);
                let edge = p.position.distance(n.position);
                prop_assert!(edge > 0.0);
                prop_assert_eq!(n.cost, p.cost + edge);
                prop_assert!(n.info >= p.info);
                prop_assert!(no_collision(p.position, n.position, &world));
                prop_assert_eq!(n.closed, n.cost > config.budget);
            }
            let probe = Point2::new(10.0, 3.0);
            for id in t.near_open(probe, 50.0).unwrap() {
                prop_assert!(!t.node(id).closed);
            }
            if let Some(id) = t.nearest_open(probe) {
                prop_assert!(!t.node(id).closed);
            }
        }
    }
}
