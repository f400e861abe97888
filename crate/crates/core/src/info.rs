//! Information functions evaluated at candidate planner nodes.
//!
//! Each function starts from the information of the neighbouring node,
//! adds the gain of sensing from the new pose, and returns the predicted
//! belief as an overlay on top of the parent's overlay.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::belief::{
    beam_density, entropy, inverse_update, BeliefOverlay, BeliefState, BeliefView, CellPrediction,
    InverseModelParams, Observation, SensorModel,
};
use crate::error::Result;
use crate::geometry::{ray_cast_with, Point2, RayCast};
use crate::gp::{noisy_gram, GaussHermite, KernelSpec, Stencil};
use crate::linalg::Cholesky;
use crate::pose::PoseBelief;

/// Floor on GP predictive variances before fusion.
pub const MIN_VARIANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct InfoResult {
    /// Accumulated information of the node.
    pub info: f64,
    pub overlay: BeliefOverlay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfoKind {
    Mi,
    Miub,
    Gpvr,
    Ugpvr,
}

impl InfoKind {
    pub fn name(self) -> &'static str {
        match self {
            InfoKind::Mi => "mi",
            InfoKind::Miub => "miub",
            InfoKind::Gpvr => "gpvr",
            InfoKind::Ugpvr => "ugpvr",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "mi" => Some(InfoKind::Mi),
            "miub" => Some(InfoKind::Miub),
            "gpvr" => Some(InfoKind::Gpvr),
            "ugpvr" => Some(InfoKind::Ugpvr),
            _ => None,
        }
    }
}

/// Everything the four information functions need.
#[derive(Debug, Clone)]
pub struct InfoParams {
    pub kind: InfoKind,
    pub sensor: SensorModel,
    pub inverse: InverseModelParams,
    pub kernel: KernelSpec,
    pub noise_variance: f64,
    pub scheme: GaussHermite,
}

impl InfoParams {
    /// Defaults for `kind`: Matérn 5/2 kernel with l = 3.2623 m and σ_f² = 0.1879.
    pub fn new(kind: InfoKind) -> Self {
        Self {
            kind,
            sensor: SensorModel::default(),
            inverse: InverseModelParams::default(),
            kernel: KernelSpec::matern52(DEFAULT_LENGTHSCALE, DEFAULT_SIGNAL_VARIANCE).expect("positive defaults"),
            noise_variance: DEFAULT_NOISE_VARIANCE,
            scheme: GaussHermite::default(),
        }
    }
}

pub const DEFAULT_LENGTHSCALE: f64 = 3.2623;
pub const DEFAULT_SIGNAL_VARIANCE: f64 = 0.1879;
pub const DEFAULT_NOISE_VARIANCE: f64 = 0.01;

/// Something that scores a pose given the parent's predicted belief.
pub trait InformationSource {
    fn evaluate(&self, pose: &PoseBelief, parent: &BeliefOverlay, i_near: Option<f64>) -> Result<InfoResult>;
}

/// Information functions over an occupancy/variance grid.
#[derive(Debug, Clone)]
pub struct GridInformation<'a> {
    pub belief: &'a BeliefState,
    pub params: InfoParams,
}

impl InformationSource for GridInformation<'_> {
    fn evaluate(&self, pose: &PoseBelief, parent: &BeliefOverlay, i_near: Option<f64>) -> Result<InfoResult> {
        let view = self.belief.view(parent);
        let p = &self.params;
        match p.kind {
            InfoKind::Mi => information_mi(pose.position, pose.heading, view, i_near, &p.sensor, &p.inverse),
            InfoKind::Miub => information_miub(pose.position, pose.heading, view, i_near, &p.sensor, &p.inverse),
            InfoKind::Gpvr => information_gpvr(
                pose.position,
                pose.heading,
                view,
                i_near,
                &p.kernel,
                &p.sensor,
                p.noise_variance,
            ),
            InfoKind::Ugpvr => information_ugpvr(
                pose,
                view,
                i_near,
                &p.kernel,
                &p.scheme,
                &p.sensor,
                p.noise_variance,
            ),
        }
    }
}

fn cast(view: &BeliefView<'_>, position: Point2, angle: f64, r_max: f64) -> Result<RayCast> {
    ray_cast_with(view.geometry(), position, angle, r_max, |c| view.occupancy(c) > 0.5)
}

/// Cells of one beam with the distance at which the beam enters each.
fn perception(rc: &RayCast) -> Vec<(usize, f64)> {
    let mut cells: Vec<(usize, f64)> = rc.cells.iter().copied().zip(rc.entries.iter().copied()).collect();
    if let Some(hit) = rc.hit {
        cells.push((hit, rc.range));
    }
    cells
}

fn observation_for(cell: usize, rc: &RayCast) -> Observation {
    if rc.hit == Some(cell) {
        Observation::Occupied
    } else {
        Observation::Free
    }
}

struct Scratch<'v, 'a> {
    view: &'v BeliefView<'a>,
    cells: BTreeMap<usize, CellPrediction>,
}

impl<'v, 'a> Scratch<'v, 'a> {
    fn new(view: &'v BeliefView<'a>) -> Self {
        Self {
            view,
            cells: BTreeMap::new(),
        }
    }

    fn get(&self, cell: usize) -> CellPrediction {
        self.cells.get(&cell).copied().unwrap_or_else(|| self.view.cell(cell))
    }

    fn set_occupancy(&mut self, cell: usize, p: f64) {
        let mut c = self.get(cell);
        c.occupancy = p;
        self.cells.insert(cell, c);
    }

    fn set_variance(&mut self, cell: usize, v: f64) {
        let mut c = self.get(cell);
        c.variance = v;
        self.cells.insert(cell, c);
    }

    fn finish(self, info: f64) -> InfoResult {
        InfoResult {
            info,
            overlay: self.view.overlay.child(self.cells),
        }
    }
}

/// Mutual information with measurement integration along each beam.
pub fn information_mi(
    position: Point2,
    heading: f64,
    view: BeliefView<'_>,
    i_near: Option<f64>,
    sensor: &SensorModel,
    inverse: &InverseModelParams,
) -> Result<InfoResult> {
    sensor.validate()?;
    inverse.validate()?;
    let mut info = i_near.unwrap_or(0.0);
    let h_sat = inverse.saturation_entropy();
    let step = 1.0 / sensor.s_z;
    let mut scratch = Scratch::new(&view);
    for k in 0..sensor.beams {
        let rc = cast(&view, position, sensor.beam_angle(heading, k), sensor.r_max)?;
        let cells = perception(&rc);
        let z_hat = rc.range;
        // p_z depends only on the beam, not on the cell being predicted
        let mut p_z = Vec::new();
        let mut z = step;
        while z <= z_hat + 1e-12 {
            let mut p1 = beam_density(z, sensor.r_max, sensor);
            let mut p2 = 0.0;
            let mut free_so_far = 1.0;
            for &(j, z_j) in &cells {
                let m_j = view.occupancy(j);
                p1 *= 1.0 - m_j;
                p2 += beam_density(z, z_j, sensor) * m_j * free_so_far;
                free_so_far *= 1.0 - m_j;
            }
            p_z.push(p1 + p2);
            z += step;
        }
        let mut beam_gain = 0.0;
        for &(i, _) in &cells {
            let mut m_bar = scratch.get(i).occupancy;
            let h_i = entropy(m_bar);
            if h_i <= h_sat {
                continue;
            }
            beam_gain += h_i;
            let obs = observation_for(i, &rc);
            let mut h_bar = 0.0;
            for p in &p_z {
                m_bar = inverse_update(m_bar, obs, inverse);
                h_bar -= p * entropy(m_bar);
            }
            scratch.set_occupancy(i, m_bar);
            beam_gain += h_bar * step;
        }
        info += beam_gain.max(0.0);
    }
    Ok(scratch.finish(info))
}

/// Entropy of the unsaturated perceived cells, an upper bound on [`information_mi`].
pub fn information_miub(
    position: Point2,
    heading: f64,
    view: BeliefView<'_>,
    i_near: Option<f64>,
    sensor: &SensorModel,
    inverse: &InverseModelParams,
) -> Result<InfoResult> {
    sensor.validate()?;
    inverse.validate()?;
    let mut info = i_near.unwrap_or(0.0);
    let h_sat = inverse.saturation_entropy();
    let mut scratch = Scratch::new(&view);
    for k in 0..sensor.beams {
        let rc = cast(&view, position, sensor.beam_angle(heading, k), sensor.r_max)?;
        for (i, _) in perception(&rc) {
            let m_bar = scratch.get(i).occupancy;
            let h_i = entropy(m_bar);
            if h_i <= h_sat {
                continue;
            }
            info += h_i;
            scratch.set_occupancy(i, inverse_update(m_bar, observation_for(i, &rc), inverse));
        }
    }
    Ok(scratch.finish(info))
}

/// Predicted training points: the hit point of every blocked beam (+1) and
/// one free sample per meter before it (-1), each tagged with its nearest cell.
pub fn predicted_training_points(
    position: Point2,
    heading: f64,
    view: &BeliefView<'_>,
    sensor: &SensorModel,
) -> Result<Vec<(Point2, f64, usize)>> {
    let geom = *view.geometry();
    let mut out = Vec::new();
    for k in 0..sensor.beams {
        let angle = sensor.beam_angle(heading, k);
        let rc = cast(view, position, angle, sensor.r_max)?;
        let dir = Point2::new(libm::cos(angle), libm::sin(angle));
        let mut t = 1.0;
        while t < rc.range {
            let p = position + dir * t;
            if let Some(cell) = geom.cell_of(p) {
                out.push((p, -1.0, cell));
            }
            t += 1.0;
        }
        if let Some(hit) = rc.hit {
            out.push((position + dir * rc.range, 1.0, hit));
        }
    }
    Ok(out)
}

fn variance_reduction(
    position: Point2,
    heading: f64,
    view: BeliefView<'_>,
    i_near: Option<f64>,
    kernel: &KernelSpec,
    sensor: &SensorModel,
    noise_variance: f64,
    stencil: Option<&Stencil>,
) -> Result<InfoResult> {
    sensor.validate()?;
    let mut info = i_near.unwrap_or(0.0);
    let mut scratch = Scratch::new(&view);
    let data = predicted_training_points(position, heading, &view, sensor)?;
    if data.is_empty() {
        return Ok(scratch.finish(info));
    }
    let mut sub_map: Vec<usize> = Vec::new();
    for &(_, _, cell) in &data {
        if !sub_map.contains(&cell) {
            sub_map.push(cell);
        }
    }
    let k = |a: Point2, b: Point2| match stencil {
        Some(s) => s.expect(kernel, a, b),
        None => kernel.eval_points(a, b),
    };
    let x: Vec<Point2> = data.iter().map(|d| d.0).collect();
    let k0 = kernel.prior_variance();
    let gram = noisy_gram(x.len(), noise_variance, |i, j| if i == j { k0 } else { k(x[i], x[j]) });
    let chol = Cholesky::new(&gram)?;
    for &cell in &sub_map {
        let centre = view.geometry().cell_center(cell);
        let c_star: Vec<f64> = x.iter().map(|xi| k(*xi, centre)).collect();
        let v_col = chol.solve_lower(&c_star);
        let v = (k0 - v_col.iter().map(|a| a * a).sum::<f64>()).max(MIN_VARIANCE);
        let sigma = scratch.get(cell).variance;
        if !(sigma > 0.0) {
            continue;
        }
        let fused = 1.0 / (1.0 / sigma + 1.0 / v);
        info += libm::log(sigma) - libm::log(fused);
        scratch.set_variance(cell, fused);
    }
    Ok(scratch.finish(info))
}

/// GP variance reduction fused into the variance map.
pub fn information_gpvr(
    position: Point2,
    heading: f64,
    view: BeliefView<'_>,
    i_near: Option<f64>,
    kernel: &KernelSpec,
    sensor: &SensorModel,
    noise_variance: f64,
) -> Result<InfoResult> {
    variance_reduction(position, heading, view, i_near, kernel, sensor, noise_variance, None)
}

/// Variance reduction with the kernel averaged over the uncertain position.
pub fn information_ugpvr(
    pose: &PoseBelief,
    view: BeliefView<'_>,
    i_near: Option<f64>,
    kernel: &KernelSpec,
    scheme: &GaussHermite,
    sensor: &SensorModel,
    noise_variance: f64,
) -> Result<InfoResult> {
    let stencil = Stencil::new(pose.position_covariance(), scheme)?;
    variance_reduction(
        pose.position,
        pose.heading,
        view,
        i_near,
        kernel,
        sensor,
        noise_variance,
        Some(&stencil),
    )
}

/// Information gained by one call: the result minus the incoming value.
pub fn increment(result: &InfoResult, i_near: Option<f64>) -> f64 {
    result.info - i_near.unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::geometry::{GridGeometry, GridWorld, SeededRng};
    use core::f64::consts::LN_2;

    fn corridor() -> (GridWorld, BeliefState) {
        // 1 m wide corridor along x, walls above and below
        let mut world = GridWorld::empty(50, 7, 0.2).unwrap();
        for c in 0..50 {
            world.set_obstacle(c, 0, true);
            world.set_obstacle(c, 6, true);
        }
        world.set_obstacle(30, 3, true);
        let belief = BeliefState::from_world(&world, 0.65, 0.35, 1.0).unwrap();
        (world, belief)
    }

    fn one_beam() -> SensorModel {
        SensorModel {
            beams: 1,
            field_of_view: 0.0001,
            ..SensorModel::default()
        }
    }

    #[test]
    fn saturated_belief_gives_nothing() {
        let g = GridGeometry::new(20, 20, 0.2, Point2::default()).unwrap();
        let belief = BeliefState::uniform(g, 0.05, 1.0).unwrap();
        let overlay = BeliefOverlay::new();
        let inv = InverseModelParams::default();
        let sensor = SensorModel::default();
        let p = Point2::new(2.0, 2.0);
        let mi = information_mi(p, 0.0, belief.view(&overlay), Some(3.5), &sensor, &inv).unwrap();
        assert_eq!(mi.info, 3.5);
        assert!(mi.overlay.is_empty());
        let ub = information_miub(p, 0.0, belief.view(&overlay), Some(3.5), &sensor, &inv).unwrap();
        assert_eq!(ub.info, 3.5);
        assert!(ub.overlay.is_empty());
    }

    #[test]
    fn miub_counts_each_unsaturated_cell_once() {
        let g = GridGeometry::new(20, 20, 0.2, Point2::default()).unwrap();
        let belief = BeliefState::uniform(g, 0.5, 1.0).unwrap();
        let overlay = BeliefOverlay::new();
        let sensor = one_beam();
        let p = Point2::new(0.1, 2.1);
        let ub = information_miub(p, 0.0, belief.view(&overlay), None, &sensor, &InverseModelParams::default()).unwrap();
        // open 4 m of grid along the beam: 20 cells of entropy ln 2
        assert!((ub.info - 20.0 * LN_2).abs() < 1e-12);
        assert_eq!(ub.overlay.len(), 20);
        assert_eq!(belief.occupancy(belief.geometry().cell_of(p).unwrap()), 0.5);
    }

    #[test]
    fn mi_bounded_by_miub_in_corridor() {
        let (_, belief) = corridor();
        let overlay = BeliefOverlay::new();
        let inv = InverseModelParams::default();
        let p = Point2::new(1.1, 0.7);
        for sensor in [one_beam(), SensorModel::default()] {
            let mi = information_mi(p, 0.0, belief.view(&overlay), None, &sensor, &inv).unwrap();
            let ub = information_miub(p, 0.0, belief.view(&overlay), None, &sensor, &inv).unwrap();
            assert!(mi.info >= 0.0);
            assert!(mi.info <= ub.info, "{} > {}", mi.info, ub.info);
        }
    }

    #[test]
    fn mi_rejects_pose_in_obstacle() {
        let (_, belief) = corridor();
        let overlay = BeliefOverlay::new();
        let r = information_mi(
            Point2::new(6.1, 0.7),
            0.0,
            belief.view(&overlay),
            None,
            &SensorModel::default(),
            &InverseModelParams::default(),
        );
        assert!(matches!(r, Err(Error::PointInObstacle { .. })));
    }

    #[test]
    fn gpvr_single_cell_fusion() {
        // σ = 1 and a GP variance of 1 fuse to 0.5: a gain of ln 2
        let g = GridGeometry::new(10, 10, 1.0, Point2::default()).unwrap();
        let belief = BeliefState::uniform(g, 0.5, 1.0).unwrap();
        let kernel = KernelSpec::matern52(3.2623, 1.0).unwrap();
        let fused = crate::belief::bcm_fuse(1.0, 1.0).unwrap();
        assert_eq!(fused, 0.5);
        assert!((libm::log(1.0) - libm::log(fused) - LN_2).abs() < 1e-15);
        // a beam too short to hit or sample perceives nothing
        let sensor = SensorModel {
            r_max: 0.5,
            ..one_beam()
        };
        let overlay = BeliefOverlay::new();
        let r = information_gpvr(Point2::new(5.5, 5.5), 0.0, belief.view(&overlay), Some(1.25), &kernel, &sensor, 0.01)
            .unwrap();
        assert_eq!(r.info, 1.25);
    }

    #[test]
    fn gpvr_increments_nonnegative_and_ugpvr_degenerates() {
        let (_, belief) = corridor();
        let overlay = BeliefOverlay::new();
        let kernel = KernelSpec::matern52(3.2623, 0.1879).unwrap();
        let sensor = SensorModel::default();
        let mut rng = SeededRng::new(4);
        for _ in 0..20 {
            let p = Point2::new(rng.uniform(0.3, 5.8), rng.uniform(0.3, 1.1));
            let h = rng.uniform(-3.0, 3.0);
            let a = information_gpvr(p, h, belief.view(&overlay), None, &kernel, &sensor, 0.01).unwrap();
            for (cell, pred) in a.overlay.flatten() {
                assert!(pred.variance <= belief.variance(cell));
            }
            assert!(a.info >= 0.0);
            let pose = PoseBelief::certain(p, h);
            let b = information_ugpvr(&pose, belief.view(&overlay), None, &kernel, &GaussHermite::default(), &sensor, 0.01)
                .unwrap();
            assert_eq!(a.info.to_bits(), b.info.to_bits());
        }
    }
}
