//! Built-in test environments.

use crate::error::Result;
use crate::geometry::{GridWorld, Point2, SeededRng};

/// Mark the one-cell border of the grid as obstacle.
pub fn add_border(world: &mut GridWorld) {
    let (w, h) = (world.width(), world.height());
    for c in 0..w {
        world.set_obstacle(c, 0, true);
        world.set_obstacle(c, h - 1, true);
    }
    for r in 0..h {
        world.set_obstacle(0, r, true);
        world.set_obstacle(w - 1, r, true);
    }
}

/// A walled 20 m × 20 m office room with desks and two partition walls,
/// at 0.2 m resolution. The start pose (10, 2) is free.
pub fn desk_world() -> GridWorld {
    let mut world = GridWorld::empty(100, 100, 0.2).expect("fixed dimensions are valid");
    add_border(&mut world);
    let rects = [
        // desks
        ((3.0, 5.0), (7.0, 6.2)),
        ((13.0, 5.0), (17.0, 6.2)),
        ((3.0, 13.0), (7.0, 14.2)),
        ((13.0, 13.0), (17.0, 14.2)),
        ((8.6, 16.4), (11.4, 17.6)),
        // partitions
        ((0.0, 9.4), (6.0, 10.0)),
        ((14.0, 9.4), (20.0, 10.0)),
        // pillar
        ((9.4, 9.4), (10.6, 10.6)),
    ];
    for ((x0, y0), (x1, y1)) in rects {
        world.fill_rect(Point2::new(x0, y0), Point2::new(x1, y1));
    }
    world
}

pub const DESK_START: Point2 = Point2::new(10.0, 2.0);

/// Bordered room with `obstacles` random axis-aligned boxes.
pub fn random_room(width: usize, height: usize, resolution: f64, obstacles: usize, rng: &mut SeededRng) -> Result<GridWorld> {
    let mut world = GridWorld::empty(width, height, resolution)?;
    add_border(&mut world);
    let (w, h) = (width as f64 * resolution, height as f64 * resolution);
    for _ in 0..obstacles {
        let (x, y) = (rng.uniform(0.0, w), rng.uniform(0.0, h));
        let (sx, sy) = (rng.uniform(0.2, 0.25 * w), rng.uniform(0.2, 0.25 * h));
        world.fill_rect(Point2::new(x, y), Point2::new(x + sx, y + sy));
    }
    Ok(world)
}
