//! Occupancy and variance belief grids, the beam measurement model, the
//! inverse sensor model and Bayesian committee machine fusion.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, SQRT_2};

use crate::error::{Error, Result};
use crate::geometry::{GridGeometry, GridWorld};

/// Occupancy probabilities are kept inside `[EPS_M, 1 - EPS_M]`.
pub const EPS_M: f64 = 1e-4;

/// Bernoulli entropy in nats.
pub fn cell_entropy(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(entropy(p))
}

pub(crate) fn entropy(p: f64) -> f64 {
    -(p * libm::log(p) + (1.0 - p) * libm::log(1.0 - p))
}

pub fn clamp_probability(p: f64) -> f64 {
    p.clamp(EPS_M, 1.0 - EPS_M)
}

/// Occupancy probability and GP variance per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    geometry: GridGeometry,
    occupancy: Vec<f64>,
    variance: Vec<f64>,
}

impl BeliefState {
    pub fn uniform(geometry: GridGeometry, occupancy: f64, variance: f64) -> Result<Self> {
        if !(occupancy > 0.0 && occupancy < 1.0) {
            return Err(Error::InvalidProbability(occupancy));
        }
        if !(variance >= 0.0) {
            return Err(Error::InvalidParameter("variance must be >= 0"));
        }
        Ok(Self {
            geometry,
            occupancy: vec![clamp_probability(occupancy); geometry.len()],
            variance: vec![variance; geometry.len()],
        })
    }

    /// Prior belief built from a known map: `p_occ` on obstacles, `p_free` elsewhere.
    pub fn from_world(world: &GridWorld, p_occ: f64, p_free: f64, variance: f64) -> Result<Self> {
        let mut belief = Self::uniform(*world.geometry(), p_free, variance)?;
        if !(p_occ > 0.0 && p_occ < 1.0) {
            return Err(Error::InvalidProbability(p_occ));
        }
        for (i, &occupied) in world.cells().iter().enumerate() {
            if occupied {
                belief.occupancy[i] = clamp_probability(p_occ);
            }
        }
        Ok(belief)
    }

    pub fn from_parts(geometry: GridGeometry, occupancy: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        if occupancy.len() != geometry.len() || variance.len() != geometry.len() {
            return Err(Error::DimensionMismatch {
                expected: geometry.len(),
                found: occupancy.len().min(variance.len()),
            });
        }
        if let Some(p) = occupancy.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(Error::InvalidProbability(*p));
        }
        if variance.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidParameter("variance must be >= 0"));
        }
        Ok(Self {
            geometry,
            occupancy: occupancy.into_iter().map(clamp_probability).collect(),
            variance,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn len(&self) -> usize {
        self.occupancy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupancy.is_empty()
    }

    pub fn occupancy(&self, cell: usize) -> f64 {
        self.occupancy[cell]
    }

    pub fn variance(&self, cell: usize) -> f64 {
        self.variance[cell]
    }

    pub fn occupancies(&self) -> &[f64] {
        &self.occupancy
    }

    pub fn variances(&self) -> &[f64] {
        &self.variance
    }

    pub fn set_occupancy(&mut self, cell: usize, p: f64) {
        self.occupancy[cell] = clamp_probability(p);
    }

    pub fn set_variance(&mut self, cell: usize, v: f64) {
        self.variance[cell] = v.max(0.0);
    }

    pub fn view<'a>(&'a self, overlay: &'a BeliefOverlay) -> BeliefView<'a> {
        BeliefView { base: self, overlay }
    }
}

/// Mean cell entropy of the grid.
pub fn average_map_entropy(belief: &BeliefState) -> Result<f64> {
    if belief.is_empty() {
        return Err(Error::EmptySet);
    }
    let total: f64 = belief.occupancy.iter().map(|p| entropy(*p)).sum();
    Ok(total / belief.len() as f64)
}

/// Predicted state of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellPrediction {
    pub occupancy: f64,
    pub variance: f64,
}

#[derive(Debug)]
struct Layer {
    cells: BTreeMap<usize, CellPrediction>,
    parent: Option<Arc<Layer>>,
}

/// Sparse predicted cells layered over a base belief.
///
/// Overlays are persistent: deriving a child shares the parent's layers, so
/// a planner tree stores one small delta per node.
#[derive(Debug, Clone, Default)]
pub struct BeliefOverlay {
    head: Option<Arc<Layer>>,
    depth: usize,
}

impl BeliefOverlay {
    const MAX_DEPTH: usize = 16;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.head.is_none()
    }

    pub fn get(&self, cell: usize) -> Option<CellPrediction> {
        let mut layer = self.head.as_deref();
        while let Some(l) = layer {
            if let Some(c) = l.cells.get(&cell) {
                return Some(*c);
            }
            layer = l.parent.as_deref();
        }
        None
    }

    /// New overlay with `delta` on top of this one.
    pub fn child(&self, delta: BTreeMap<usize, CellPrediction>) -> BeliefOverlay {
        if delta.is_empty() {
            return self.clone();
        }
        if self.depth >= Self::MAX_DEPTH {
            let mut merged = self.flatten();
            merged.extend(delta);
            return BeliefOverlay {
                head: Some(Arc::new(Layer {
                    cells: merged,
                    parent: None,
                })),
                depth: 1,
            };
        }
        BeliefOverlay {
            head: Some(Arc::new(Layer {
                cells: delta,
                parent: self.head.clone(),
            })),
            depth: self.depth + 1,
        }
    }

    /// All predicted cells, newest prediction per cell.
    pub fn flatten(&self) -> BTreeMap<usize, CellPrediction> {
        let mut layers = Vec::new();
        let mut layer = self.head.as_deref();
        while let Some(l) = layer {
            layers.push(l);
            layer = l.parent.as_deref();
        }
        let mut out = BTreeMap::new();
        for l in layers.into_iter().rev() {
            out.extend(l.cells.iter().map(|(k, v)| (*k, *v)));
        }
        out
    }

    /// Number of distinct predicted cells.
    pub fn len(&self) -> usize {
        self.flatten().len()
    }
}

/// Base belief seen through an overlay.
#[derive(Debug, Clone, Copy)]
pub struct BeliefView<'a> {
    pub base: &'a BeliefState,
    pub overlay: &'a BeliefOverlay,
}

impl BeliefView<'_> {
    pub fn geometry(&self) -> &GridGeometry {
        self.base.geometry()
    }

    pub fn cell(&self, cell: usize) -> CellPrediction {
        self.overlay.get(cell).unwrap_or(CellPrediction {
            occupancy: self.base.occupancy(cell),
            variance: self.base.variance(cell),
        })
    }

    pub fn occupancy(&self, cell: usize) -> f64 {
        self.cell(cell).occupancy
    }

    pub fn variance(&self, cell: usize) -> f64 {
        self.cell(cell).variance
    }

    /// Mean cell entropy with the overlay applied.
    pub fn average_entropy(&self) -> f64 {
        let flat = self.overlay.flatten();
        let mut total: f64 = self.base.occupancies().iter().map(|p| entropy(*p)).sum();
        for (cell, pred) in flat {
            total += entropy(pred.occupancy) - entropy(self.base.occupancy(cell));
        }
        total / self.base.len() as f64
    }
}

/// Beam-based mixture measurement model of a range finder.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorModel {
    pub beams: usize,
    pub r_max: f64,
    /// Angular span covered by the beams, centred on the heading.
    pub field_of_view: f64,
    pub z_hit: f64,
    pub z_short: f64,
    pub z_max: f64,
    pub z_rand: f64,
    pub sigma_hit: f64,
    pub lambda_short: f64,
    /// Integration resolution in 1/m.
    pub s_z: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            beams: 10,
            r_max: 5.0,
            field_of_view: core::f64::consts::TAU,
            z_hit: 0.7,
            z_short: 0.1,
            z_max: 0.1,
            z_rand: 0.1,
            sigma_hit: 0.05,
            lambda_short: 0.2,
            s_z: 2.0,
        }
    }
}

impl SensorModel {
    pub fn validate(&self) -> Result<()> {
        if self.beams == 0 {
            return Err(Error::NonPositive("beam count"));
        }
        for (v, what) in [
            (self.r_max, "r_max"),
            (self.field_of_view, "field of view"),
            (self.sigma_hit, "sigma_hit"),
            (self.lambda_short, "lambda_short"),
            (self.s_z, "s_z"),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositive(what));
            }
        }
        let w = [self.z_hit, self.z_short, self.z_max, self.z_rand];
        if w.iter().any(|x| !(*x >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter("mixture weights must be >= 0 and sum to 1"));
        }
        Ok(())
    }

    /// Beam angle `k` for a robot heading.
    pub fn beam_angle(&self, heading: f64, k: usize) -> f64 {
        heading - 0.5 * self.field_of_view + self.field_of_view * (k as f64 + 0.5) / self.beams as f64
    }

    /// Width of the bin that carries the max-range reading.
    pub fn max_bin(&self) -> f64 {
        (1.0 / self.s_z).min(self.r_max)
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / SQRT_2))
}

/// Density of reading `z` when the expected range is `z_hat`.
pub fn beam_likelihood(z: f64, z_hat: f64, model: &SensorModel) -> Result<f64> {
    if !(0.0..=model.r_max).contains(&z) {
        return Err(Error::RangeOutOfBounds(z));
    }
    Ok(beam_density(z, z_hat, model))
}

pub(crate) fn beam_density(z: f64, z_hat: f64, model: &SensorModel) -> f64 {
    let s = model.sigma_hit;
    let mass = normal_cdf((model.r_max - z_hat) / s) - normal_cdf(-z_hat / s);
    let d = (z - z_hat) / s;
    let hit = if mass > 0.0 {
        libm::exp(-0.5 * d * d) / (s * libm::sqrt(core::f64::consts::TAU)) / mass
    } else {
        0.0
    };
    let l = model.lambda_short;
    let short = if z <= z_hat && z_hat > 0.0 {
        l * libm::exp(-l * z) / (1.0 - libm::exp(-l * z_hat))
    } else {
        0.0
    };
    let bin = model.max_bin();
    let max = if z >= model.r_max - bin { 1.0 / bin } else { 0.0 };
    model.z_hit * hit + model.z_short * short + model.z_max * max + model.z_rand / model.r_max
}

/// Outcome fed to the inverse sensor model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observation {
    Free,
    Occupied,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseModelParams {
    pub b_free: f64,
    pub b_occ: f64,
    pub p_sat: f64,
    pub epsilon: f64,
}

impl InverseModelParams {
    /// Parameters with the clamp slack set to one percent of `p_sat`.
    pub fn new(b_free: f64, b_occ: f64, p_sat: f64) -> Result<Self> {
        let p = Self {
            b_free,
            b_occ,
            p_sat,
            epsilon: 0.01 * p_sat,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_sat > 0.0 && self.p_sat < 0.5) {
            return Err(Error::InvalidProbability(self.p_sat));
        }
        if !(self.b_free > 0.0 && self.b_free < 1.0 && self.b_occ > 1.0) {
            return Err(Error::InvalidParameter("need 0 < b_free < 1 < b_occ"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < self.p_sat) {
            return Err(Error::InvalidParameter("need 0 < epsilon < p_sat"));
        }
        Ok(())
    }

    /// `H(p_sat)`.
    pub fn saturation_entropy(&self) -> f64 {
        entropy(self.p_sat)
    }
}

impl Default for InverseModelParams {
    fn default() -> Self {
        Self {
            b_free: 0.6,
            b_occ: 1.66,
            p_sat: 0.05,
            epsilon: 0.0005,
        }
    }
}

pub fn inverse_update(m: f64, observation: Observation, params: &InverseModelParams) -> f64 {
    match observation {
        Observation::Free => (params.b_free * m).max(params.p_sat - params.epsilon),
        Observation::Occupied => (params.b_occ * m).min(1.0 - params.p_sat + params.epsilon),
    }
}

/// Bayesian committee machine fusion of two variances.
pub fn bcm_fuse(sigma_a: f64, sigma_b: f64) -> Result<f64> {
    if !(sigma_a > 0.0) || !(sigma_b > 0.0) {
        return Err(Error::NonPositive("fused variance"));
    }
    Ok(1.0 / (1.0 / sigma_a + 1.0 / sigma_b))
}

/// `ln 2`, the entropy of a cell at probability one half.
pub const MAX_CELL_ENTROPY: f64 = LN_2;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SeededRng;
    use proptest::prelude::*;

    #[test]
    fn entropy_examples() {
        assert!((cell_entropy(0.5).unwrap() - LN_2).abs() < 1e-15);
        assert!((cell_entropy(0.1).unwrap() - 0.3251).abs() < 1e-4);
        assert!(cell_entropy(0.0).is_err());
        assert!(cell_entropy(1.0).is_err());
        let mut rng = SeededRng::new(1);
        for _ in 0..100 {
            let p = rng.uniform(1e-6, 1.0 - 1e-6);
            assert!((cell_entropy(p).unwrap() - cell_entropy(1.0 - p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn average_entropy_examples() {
        let g = GridGeometry::new(4, 3, 0.2, Default::default()).unwrap();
        let half = BeliefState::uniform(g, 0.5, 1.0).unwrap();
        assert!((average_map_entropy(&half).unwrap() - LN_2).abs() < 1e-15);
        let tenth = BeliefState::uniform(g, 0.1, 1.0).unwrap();
        assert!((average_map_entropy(&tenth).unwrap() - 0.3251).abs() < 1e-4);

        let mut rng = SeededRng::new(2);
        let occ: Vec<f64> = (0..12).map(|_| rng.uniform(0.01, 0.99)).collect();
        let mixed = BeliefState::from_parts(g, occ.clone(), vec![1.0; 12]).unwrap();
        let mut sum = 0.0;
        for p in &occ {
            sum += -(p * p.ln() + (1.0 - p) * (1.0 - p).ln());
        }
        assert!((average_map_entropy(&mixed).unwrap() - sum / 12.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_update_examples() {
        let params = InverseModelParams::new(0.6, 1.66, 0.05).unwrap();
        assert_eq!(params.epsilon, 0.0005);
        assert!((inverse_update(0.5, Observation::Free, &params) - 0.30).abs() < 1e-15);
        assert!((inverse_update(0.05, Observation::Free, &params) - 0.0495).abs() < 1e-15);
        assert!((inverse_update(0.5, Observation::Occupied, &params) - 0.83).abs() < 1e-15);
        assert!((inverse_update(0.9, Observation::Occupied, &params) - 0.9505).abs() < 1e-15);
        assert!(InverseModelParams::new(0.6, 1.66, 0.6).is_err());
        assert!(InverseModelParams::new(1.2, 1.66, 0.05).is_err());
    }

    #[test]
    fn bcm_examples() {
        assert_eq!(bcm_fuse(1.0, 1.0).unwrap(), 0.5);
        let s = 0.37;
        assert!((bcm_fuse(s, 1e12).unwrap() - s).abs() < 1e-10 * s);
        assert!((bcm_fuse(0.2, 0.3).unwrap() - 0.12).abs() < 1e-15);
        assert!(bcm_fuse(0.0, 1.0).is_err());
        assert!(bcm_fuse(1.0, -1.0).is_err());
    }

    #[test]
    fn beam_model_examples() {
        let model = SensorModel::default();
        model.validate().unwrap();
        assert!((model.z_hit + model.z_short + model.z_max + model.z_rand - 1.0).abs() < 1e-15);
        let z_hat = 2.3;
        let peak = beam_likelihood(z_hat, z_hat, &model).unwrap();
        for dz in [-0.2, -0.05, 0.01, 0.05, 0.3] {
            assert!(beam_likelihood(z_hat + dz, z_hat, &model).unwrap() < peak);
        }
        assert!(beam_likelihood(-0.1, z_hat, &model).is_err());
        assert!(beam_likelihood(5.1, z_hat, &model).is_err());
    }

    fn trapezoid(z_hat: f64, model: &SensorModel, step: f64) -> f64 {
        let n = libm::round(model.r_max / step) as usize;
        let f = |z: f64| beam_density(z, z_hat, model);
        let mut total = 0.5 * (f(0.0) + f(model.r_max));
        for i in 1..n {
            total += f(i as f64 * step);
        }
        total * step
    }

    #[test]
    fn beam_density_integrates_to_one() {
        let model = SensorModel::default();
        for z_hat in [0.3, 1.0, 2.37, 4.0, 4.9, 5.0] {
            // the max bin's edges sit on the grid, so the trapezoid errs there by step/bin/2
            let step = 1e-4;
            let total = trapezoid(z_hat, &model, step);
            assert!((0.95..=1.05).contains(&total), "z_hat {z_hat}: {total}");
            assert!((total - 1.0).abs() < 1e-3, "z_hat {z_hat}: {total}");
        }
    }

    #[test]
    fn overlay_layers_fall_through() {
        let g = GridGeometry::new(5, 5, 1.0, Default::default()).unwrap();
        let base = BeliefState::uniform(g, 0.5, 1.0).unwrap();
        let root = BeliefOverlay::new();
        let pred = |p| CellPrediction {
            occupancy: p,
            variance: 0.5,
        };
        let a = root.child(BTreeMap::from([(3, pred(0.3)), (4, pred(0.2))]));
        let b = a.child(BTreeMap::from([(3, pred(0.1))]));
        assert_eq!(base.view(&root).occupancy(3), 0.5);
        assert_eq!(base.view(&a).occupancy(3), 0.3);
        assert_eq!(base.view(&b).occupancy(3), 0.1);
        assert_eq!(base.view(&b).occupancy(4), 0.2);
        assert_eq!(base.view(&b).occupancy(5), 0.5);
        assert_eq!(b.len(), 2);
        assert_eq!(base.occupancy(3), 0.5);

        // deep chains flatten without changing lookups
        let mut deep = BeliefOverlay::new();
        for i in 0..50 {
            deep = deep.child(BTreeMap::from([(i % 25, pred(0.01 + i as f64 / 100.0))]));
        }
        for cell in 0..25 {
            let newest = (0..50).rev().find(|i| i % 25 == cell).unwrap();
            assert_eq!(deep.get(cell).unwrap().occupancy, 0.01 + newest as f64 / 100.0);
        }
    }

    proptest! {
        #[test]
        fn fusion_shrinks_both(a in 1e-6f64..1e6, b in 1e-6f64..1e6) {
            let f = bcm_fuse(a, b).unwrap();
            prop_assert!(f < a.min(b));
        }

        #[test]
        fn inverse_update_monotone_and_bounded(m1 in 1e-4f64..0.9999, m2 in 1e-4f64..0.9999, p_sat in 0.01f64..0.45) {
            let params = InverseModelParams::new(0.6, 1.66, p_sat).unwrap();
            let (lo, hi) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
            for obs in [Observation::Free, Observation::Occupied] {
                let (a, b) = (inverse_update(lo, obs, &params), inverse_update(hi, obs, &params));
                prop_assert!(a <= b);
                prop_assert!(a > 0.0 && b < 1.0);
            }
        }

        #[test]
        fn entropy_is_concave(a in 0.001f64..0.999, b in 0.001f64..0.999, t in 0.0f64..1.0) {
            let mid = t * a + (1.0 - t) * b;
            prop_assert!(entropy(mid) >= t * entropy(a) + (1.0 - t) * entropy(b) - 1e-12);
        }

        #[test]
        fn overlaid_entropy_bounded(seed in any::<u64>()) {
            let mut rng = SeededRng::new(seed);
            let g = GridGeometry::new(6, 4, 0.2, Default::default()).unwrap();
            let occ = (0..24).map(|_| rng.uniform(0.001, 0.999)).collect();
            let base = BeliefState::from_parts(g, occ, vec![1.0; 24]).unwrap();
            let delta = (0..10).map(|_| (rng.below(24), CellPrediction {
                occupancy: rng.uniform(0.001, 0.999),
                variance: 1.0,
            })).collect();
            let overlay = BeliefOverlay::new().child(delta);
            let view = base.view(&overlay);
            prop_assert!(view.average_entropy() <= LN_2 + 1e-12);
            let direct: f64 = (0..24).map(|i| entropy(view.occupancy(i))).sum::<f64>() / 24.0;
            prop_assert!((view.average_entropy() - direct).abs() < 1e-12);
        }
    }
}
