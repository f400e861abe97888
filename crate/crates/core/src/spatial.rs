//! 2-d tree over planar points with nearest and radius queries.
//!
//! Points keep their insertion index for life. Removal only deactivates a
//! point; deactivated points are dropped from the tree at the next rebuild.
//! The tree is rebuilt balanced (median splits) whenever it has doubled in
//! size since the last build.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Point2;

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    point: u32,
    left: u32,
    right: u32,
    split_x: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SpatialIndex {
    points: Vec<Point2>,
    active: Vec<bool>,
    nodes: Vec<Node>,
    root: u32,
    active_count: usize,
    built_size: usize,
}

impl SpatialIndex {
    pub fn new() -> Self {
        Self {
            root: NIL,
            ..Default::default()
        }
    }

    pub fn from_points<I: IntoIterator<Item = Point2>>(points: I) -> Self {
        let mut index = Self::new();
        index.points = points.into_iter().collect();
        index.active = alloc::vec![true; index.points.len()];
        index.active_count = index.points.len();
        index.rebuild();
        index
    }

    /// Number of active points.
    pub fn len(&self) -> usize {
        self.active_count
    }

    pub fn is_empty(&self) -> bool {
        self.active_count == 0
    }

    pub fn point(&self, index: usize) -> Point2 {
        self.points[index]
    }

    pub fn is_active(&self, index: usize) -> bool {
        self.active[index]
    }

    /// Insert a point; returns its insertion index.
    pub fn insert(&mut self, p: Point2) -> usize {
        let id = self.points.len();
        self.points.push(p);
        self.active.push(true);
        self.active_count += 1;
        if self.nodes.len() + 1 > 2 * self.built_size.max(8) {
            self.rebuild();
        } else {
            self.attach(id as u32);
        }
        id
    }

    /// Deactivate a point so it is never returned again.
    pub fn remove(&mut self, index: usize) {
        if self.active[index] {
            self.active[index] = false;
            self.active_count -= 1;
        }
    }

    fn attach(&mut self, id: u32) {
        let p = self.points[id as usize];
        let node_idx = self.nodes.len() as u32;
        if self.root == NIL {
            self.nodes.push(Node {
                point: id,
                left: NIL,
                right: NIL,
                split_x: true,
            });
            self.root = node_idx;
            return;
        }
        let mut cur = self.root;
        loop {
            let node = &self.nodes[cur as usize];
            let q = self.points[node.point as usize];
            let go_left = if node.split_x { p.x < q.x } else { p.y < q.y };
            let child = if go_left { node.left } else { node.right };
            if child == NIL {
                let split_x = !node.split_x;
                if go_left {
                    self.nodes[cur as usize].left = node_idx;
                } else {
                    self.nodes[cur as usize].right = node_idx;
                }
                self.nodes.push(Node {
                    point: id,
                    left: NIL,
                    right: NIL,
                    split_x,
                });
                return;
            }
            cur = child;
        }
    }

    fn rebuild(&mut self) {
        let mut ids: Vec<u32> = (0..self.points.len() as u32)
            .filter(|&i| self.active[i as usize])
            .collect();
        self.nodes.clear();
        self.nodes.reserve(ids.len());
        self.root = self.build(&mut ids, true);
        self.built_size = self.nodes.len();
    }

    fn build(&mut self, ids: &mut [u32], split_x: bool) -> u32 {
        if ids.is_empty() {
            return NIL;
        }
        let points = &self.points;
        let key = |i: &u32| {
            let p = points[*i as usize];
            if split_x {
                p.x
            } else {
                p.y
            }
        };
        ids.sort_by(|a, b| key(a).total_cmp(&key(b)));
        let mut mid = ids.len() / 2;
        // equal keys go right, matching `attach`
        while mid > 0 && key(&ids[mid - 1]) == key(&ids[mid]) {
            mid -= 1;
        }
        let node_idx = self.nodes.len() as u32;
        self.nodes.push(Node {
            point: ids[mid],
            left: NIL,
            right: NIL,
            split_x,
        });
        let (lo, rest) = ids.split_at_mut(mid);
        let left = self.build(lo, !split_x);
        let right = self.build(&mut rest[1..], !split_x);
        self.nodes[node_idx as usize].left = left;
        self.nodes[node_idx as usize].right = right;
        node_idx
    }

    /// Active point closest to `query`; ties go to the lowest insertion index.
    pub fn nearest(&self, query: Point2) -> Result<usize> {
        if self.active_count == 0 {
            return Err(Error::EmptySet);
        }
        let mut best = (f64::INFINITY, usize::MAX);
        self.nearest_rec(self.root, query, &mut best);
        Ok(best.1)
    }

    fn nearest_rec(&self, node: u32, q: Point2, best: &mut (f64, usize)) {
        if node == NIL {
            return;
        }
        let n = &self.nodes[node as usize];
        let id = n.point as usize;
        let p = self.points[id];
        if self.active[id] {
            let d2 = p.distance_squared(q);
            if d2 < best.0 || (d2 == best.0 && id < best.1) {
                *best = (d2, id);
            }
        }
        let diff = if n.split_x { q.x - p.x } else { q.y - p.y };
        let (first, second) = if diff < 0.0 {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        self.nearest_rec(first, q, best);
        if diff * diff <= best.0 {
            self.nearest_rec(second, q, best);
        }
    }

    /// Active points within distance `r` of `query` (inclusive), in insertion order.
    pub fn near(&self, query: Point2, r: f64) -> Result<Vec<usize>> {
        if !(r > 0.0) {
            return Err(Error::NonPositive("near radius"));
        }
        let mut out = Vec::new();
        self.near_rec(self.root, query, r * r, &mut out);
        out.sort_unstable();
        Ok(out)
    }

    fn near_rec(&self, node: u32, q: Point2, r2: f64, out: &mut Vec<usize>) {
        if node == NIL {
            return;
        }
        let n = &self.nodes[node as usize];
        let id = n.point as usize;
        let p = self.points[id];
        if self.active[id] && p.distance_squared(q) <= r2 {
            out.push(id);
        }
        let diff = if n.split_x { q.x - p.x } else { q.y - p.y };
        if diff < 0.0 || diff * diff <= r2 {
            self.near_rec(n.left, q, r2, out);
        }
        if diff >= 0.0 || diff * diff <= r2 {
            self.near_rec(n.right, q, r2, out);
        }
    }
}
