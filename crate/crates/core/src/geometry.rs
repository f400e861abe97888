//! Planar workspace: points, occupancy grids, sampling, steering, collision
//! checking and ray casting.
//!
//! All grid walks use an exact voxel traversal (Amanatides & Woo), so the set
//! of cells touched by a segment or a beam depends only on the geometry and
//! the map resolution.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (other - self).norm()
    }

    pub fn distance_squared(self, other: Point2) -> f64 {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        dx * dx + dy * dy
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Deterministic random source. Identical seeds give identical streams.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform integer on `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn normal(&mut self, mean: f64, std_dev: f64) -> f64 {
        if std_dev <= 0.0 {
            return mean;
        }
        Normal::new(mean, std_dev)
            .map(|d| d.sample(&mut self.inner))
            .unwrap_or(mean)
    }

    pub fn exponential(&mut self, rate: f64) -> f64 {
        // inverse CDF; 1 - u keeps the argument of ln away from zero
        -libm::log(1.0 - self.unit()) / rate
    }

    /// Derive an independent stream, e.g. for a sub-task of a seeded run.
    pub fn fork(&mut self) -> SeededRng {
        SeededRng::new(self.inner.random::<u64>())
    }
}

/// Dimensions and placement of a regular grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub width: usize,
    pub height: usize,
    /// Cell edge length in meters.
    pub resolution: f64,
    /// World coordinates of the lower-left corner of cell (0, 0).
    pub origin: Point2,
}

impl GridGeometry {
    pub fn new(width: usize, height: usize, resolution: f64, origin: Point2) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("grid dimensions must be at least 1"));
        }
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::NonPositive("resolution"));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidParameter("grid origin must be finite"));
        }
        Ok(Self {
            width,
            height,
            resolution,
            origin,
        })
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    pub fn col_row(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    pub fn extent(&self) -> (Point2, Point2) {
        let max = Point2::new(
            self.origin.x + self.width as f64 * self.resolution,
            self.origin.y + self.height as f64 * self.resolution,
        );
        (self.origin, max)
    }

    /// Signed cell coordinates of `p`, possibly out of bounds.
    fn cell_coords(&self, p: Point2) -> (i64, i64) {
        (
            libm::floor((p.x - self.origin.x) / self.resolution) as i64,
            libm::floor((p.y - self.origin.y) / self.resolution) as i64,
        )
    }

    fn checked(&self, c: i64, r: i64) -> Option<usize> {
        if c >= 0 && r >= 0 && (c as usize) < self.width && (r as usize) < self.height {
            Some(self.index(c as usize, r as usize))
        } else {
            None
        }
    }

    /// Index of the cell containing `p`.
    pub fn cell_of(&self, p: Point2) -> Option<usize> {
        if !p.is_finite() {
            return None;
        }
        let (c, r) = self.cell_coords(p);
        self.checked(c, r)
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.cell_of(p).is_some()
    }

    pub fn cell_center(&self, index: usize) -> Point2 {
        let (c, r) = self.col_row(index);
        Point2::new(
            self.origin.x + (c as f64 + 0.5) * self.resolution,
            self.origin.y + (r as f64 + 0.5) * self.resolution,
        )
    }

    /// Walk the cells crossed by the ray `start + t * dir`, `0 <= t <= t_max`,
    /// in visiting order. `visit(cell, t_enter)` returns `false` to stop.
    /// The walk also stops when the ray leaves the grid. `dir` must be a unit
    /// vector.
    pub fn traverse<F>(&self, start: Point2, dir: Point2, t_max: f64, mut visit: F)
    where
        F: FnMut(usize, f64) -> bool,
    {
        let (mut c, mut r) = self.cell_coords(start);
        let Some(first) = self.checked(c, r) else {
            return;
        };
        if !visit(first, 0.0) {
            return;
        }
        let res = self.resolution;
        let (step_c, mut next_t_c, delta_t_c) = axis_setup(start.x - self.origin.x, dir.x, c, res);
        let (step_r, mut next_t_r, delta_t_r) = axis_setup(start.y - self.origin.y, dir.y, r, res);
        loop {
            let t_enter;
            if next_t_c < next_t_r {
                c += step_c;
                t_enter = next_t_c;
                next_t_c += delta_t_c;
            } else {
                r += step_r;
                t_enter = next_t_r;
                next_t_r += delta_t_r;
            }
            if !(t_enter <= t_max) {
                return;
            }
            let Some(idx) = self.checked(c, r) else {
                return;
            };
            if !visit(idx, t_enter) {
                return;
            }
        }
    }
}

fn axis_setup(offset: f64, d: f64, cell: i64, res: f64) -> (i64, f64, f64) {
    if d > 0.0 {
        let boundary = (cell + 1) as f64 * res;
        (1, (boundary - offset) / d, res / d)
    } else if d < 0.0 {
        let boundary = cell as f64 * res;
        (-1, (boundary - offset) / d, -res / d)
    } else {
        (0, f64::INFINITY, f64::INFINITY)
    }
}

/// Binary occupancy world (`true` = obstacle).
#[derive(Debug, Clone, PartialEq)]
pub struct GridWorld {
    geometry: GridGeometry,
    cells: Vec<bool>,
    free_count: usize,
}

impl GridWorld {
    pub fn new(geometry: GridGeometry, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != geometry.len() {
            return Err(Error::DimensionMismatch {
                expected: geometry.len(),
                found: cells.len(),
            });
        }
        let free_count = cells.iter().filter(|&&o| !o).count();
        Ok(Self {
            geometry,
            cells,
            free_count,
        })
    }

    /// An obstacle-free world with its origin at (0, 0).
    pub fn empty(width: usize, height: usize, resolution: f64) -> Result<Self> {
        let geometry = GridGeometry::new(width, height, resolution, Point2::default())?;
        Self::new(geometry, vec![false; width * height])
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn width(&self) -> usize {
        self.geometry.width
    }

    pub fn height(&self) -> usize {
        self.geometry.height
    }

    pub fn resolution(&self) -> f64 {
        self.geometry.resolution
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn free_count(&self) -> usize {
        self.free_count
    }

    pub fn is_obstacle(&self, index: usize) -> bool {
        self.cells[index]
    }

    pub fn set_obstacle(&mut self, col: usize, row: usize, occupied: bool) {
        let idx = self.geometry.index(col, row);
        if self.cells[idx] != occupied {
            if occupied {
                self.free_count -= 1;
            } else {
                self.free_count += 1;
            }
            self.cells[idx] = occupied;
        }
    }

    /// Mark every cell whose center lies in the axis-aligned box as obstacle.
    pub fn fill_rect(&mut self, min: Point2, max: Point2) {
        for idx in 0..self.geometry.len() {
            let c = self.geometry.cell_center(idx);
            if c.x >= min.x && c.x <= max.x && c.y >= min.y && c.y <= max.y {
                let (col, row) = self.geometry.col_row(idx);
                self.set_obstacle(col, row, true);
            }
        }
    }

    /// `true` iff `p` is inside the world and in a free cell.
    pub fn is_free(&self, p: Point2) -> bool {
        self.geometry
            .cell_of(p)
            .is_some_and(|idx| !self.cells[idx])
    }

    pub fn ray_cast(&self, origin: Point2, angle: f64, r_max: f64) -> Result<RayCast> {
        ray_cast_with(&self.geometry, origin, angle, r_max, |idx| self.cells[idx])
    }
}

/// Uniform sample over free space by rejection over the bounding box.
pub fn sample_uniform(world: &GridWorld, rng: &mut SeededRng) -> Result<Point2> {
    if world.free_count() == 0 {
        return Err(Error::NoFreeSpace);
    }
    let (lo, hi) = world.geometry().extent();
    loop {
        let p = Point2::new(rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y));
        if world.is_free(p) {
            return Ok(p);
        }
    }
}

/// Move from `from` toward `toward` by at most `delta`.
pub fn steer(from: Point2, toward: Point2, delta: f64) -> Result<Point2> {
    if !(delta > 0.0) {
        return Err(Error::NonPositive("steer step"));
    }
    let d = toward - from;
    let dist = d.norm();
    if dist <= delta {
        return Ok(toward);
    }
    Ok(from + d * (delta / dist))
}

/// `true` iff every cell touched by the segment `a`-`b` is free.
///
/// Endpoints are put in a canonical order before walking so the result is
/// symmetric in its arguments.
pub fn no_collision(a: Point2, b: Point2, world: &GridWorld) -> bool {
    let geom = world.geometry();
    if !geom.contains(a) || !geom.contains(b) {
        return false;
    }
    let (start, end) = if (a.x, a.y) <= (b.x, b.y) { (a, b) } else { (b, a) };
    let len = start.distance(end);
    if len == 0.0 {
        return world.is_free(start);
    }
    let dir = (end - start) * (1.0 / len);
    let mut clear = true;
    geom.traverse(start, dir, len, |idx, _| {
        if world.cells[idx] {
            clear = false;
        }
        clear
    });
    clear
}

/// Result of casting one beam.
#[derive(Debug, Clone, PartialEq)]
pub struct RayCast {
    /// Distance to the first blocking cell, or `r_max` when none is met.
    pub range: f64,
    /// Free cells traversed before the hit, in order (starts with the origin cell).
    pub cells: Vec<usize>,
    /// Distance at which the beam enters each entry of `cells`.
    pub entries: Vec<f64>,
    /// The blocking cell, if the beam was stopped before `r_max`.
    pub hit: Option<usize>,
}

/// Cast a beam through any grid given a blocking predicate.
pub fn ray_cast_with<F>(
    geom: &GridGeometry,
    origin: Point2,
    angle: f64,
    r_max: f64,
    blocked: F,
) -> Result<RayCast>
where
    F: Fn(usize) -> bool,
{
    if !(r_max > 0.0) {
        return Err(Error::NonPositive("r_max"));
    }
    match geom.cell_of(origin) {
        Some(idx) if !blocked(idx) => {}
        _ => {
            return Err(Error::PointInObstacle {
                x: origin.x,
                y: origin.y,
            })
        }
    }
    let dir = Point2::new(libm::cos(angle), libm::sin(angle));
    let mut out = RayCast {
        range: r_max,
        cells: Vec::new(),
        entries: Vec::new(),
        hit: None,
    };
    geom.traverse(origin, dir, r_max, |idx, t| {
        if t >= r_max {
            return false;
        }
        if blocked(idx) {
            out.range = t;
            out.hit = Some(idx);
            return false;
        }
        out.cells.push(idx);
        out.entries.push(t);
        true
    });
    Ok(out)
}
