//! Choosing one executable path from a finished planner tree.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::planner::Tree;

/// Root-to-leaf chain of node ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub cost: f64,
    pub info: f64,
}

impl Path {
    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaf(&self) -> usize {
        *self.nodes.last().expect("paths are never empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionParams {
    pub kappa: f64,
    pub s_ratio: f64,
}

impl SelectionParams {
    pub fn new(kappa: f64, s_ratio: f64) -> Result<Self> {
        let p = Self { kappa, s_ratio };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::InvalidParameter("kappa must lie in (0, 1)"));
        }
        if !(self.s_ratio > 0.0 && self.s_ratio < 1.0) {
            return Err(Error::InvalidParameter("s_ratio must lie in (0, 1)"));
        }
        Ok(())
    }
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self {
            kappa: 0.4,
            s_ratio: 0.6,
        }
    }
}

/// One path per leaf, leaves in depth-first preorder.
pub fn enumerate_paths(tree: &Tree) -> Vec<Path> {
    let mut out = Vec::new();
    if tree.is_empty() {
        return out;
    }
    let mut stack = alloc::vec![0usize];
    while let Some(id) = stack.pop() {
        let children = tree.children(id);
        if children.is_empty() {
            out.push(path_to_root(tree, id));
        }
        stack.extend(children.iter().rev());
    }
    out
}

fn path_to_root(tree: &Tree, leaf: usize) -> Path {
    let mut nodes = Vec::new();
    let mut cur = Some(leaf);
    while let Some(id) = cur {
        nodes.push(id);
        cur = tree.node(id).parent;
    }
    nodes.reverse();
    let n = tree.node(leaf);
    Path {
        nodes,
        cost: n.cost,
        info: n.info,
    }
}

/// Number of node ids the two paths share.
pub fn similar_nodes(a: &Path, b: &Path) -> usize {
    // ids along a path increase from root to leaf
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.nodes.len() && j < b.nodes.len() {
        match a.nodes[i].cmp(&b.nodes[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Length filter, similarity voting, then the most informative max-vote path.
pub fn select_path(tree: &Tree, params: &SelectionParams) -> Result<Path> {
    if tree.is_empty() {
        return Err(Error::EmptySet);
    }
    select_from(enumerate_paths(tree), params)
}

/// Selection over an explicit candidate list.
pub fn select_from(paths: Vec<Path>, params: &SelectionParams) -> Result<Path> {
    params.validate()?;
    let l_max = paths.iter().map(Path::len).max().ok_or(Error::EmptySet)?;
    let l_min = libm::ceil(params.kappa * l_max as f64) as usize;
    let (kept, dropped): (Vec<Path>, Vec<Path>) = paths.into_iter().partition(|p| p.len() > l_min);
    if kept.is_empty() {
        return dropped
            .into_iter()
            .max_by(|a, b| a.len().cmp(&b.len()).then(b.leaf().cmp(&a.leaf())))
            .ok_or(Error::EmptySet);
    }

    let mut vote = alloc::vec![0i64; kept.len()];
    for i in 0..kept.len() {
        for j in (i + 1)..kept.len() {
            let (li, lj) = (kept[i].len(), kept[j].len());
            let ratio = similar_nodes(&kept[i], &kept[j]) as f64 / li.min(lj) as f64;
            if ratio > params.s_ratio {
                let i_wins = li > lj || (li == lj && kept[i].leaf() > kept[j].leaf());
                if i_wins {
                    vote[i] += 1;
                    vote[j] -= 1;
                } else {
                    vote[i] -= 1;
                    vote[j] += 1;
                }
            } else {
                vote[i] += 1;
                vote[j] += 1;
            }
        }
    }
    let best_vote = *vote.iter().max().expect("kept is nonempty");
    let mut best: Option<&Path> = None;
    for (p, &v) in kept.iter().zip(&vote) {
        if v != best_vote {
            continue;
        }
        best = match best {
            Some(b) if b.info > p.info || (b.info == p.info && b.leaf() < p.leaf()) => Some(b),
            _ => Some(p),
        };
    }
    Ok(best.expect("some path has the maximum vote").clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GridGeometry, Point2, SeededRng};
    use proptest::prelude::*;

    fn geom() -> GridGeometry {
        GridGeometry::new(100, 100, 0.2, Point2::new(0.0, 0.0)).unwrap()
    }

    /// Tree from `(parent, info)` rows; node 0 is the root.
    fn tree(rows: &[(Option<usize>, f64)]) -> Tree {
        let rows: Vec<_> = rows
            .iter()
            .enumerate()
            .map(|(i, &(p, info))| (Point2::new(i as f64 * 0.1, 0.0), i as f64, info, p))
            .collect();
        Tree::from_rows(geom(), &rows).unwrap()
    }

    fn random_tree(rng: &mut SeededRng, n: usize) -> Tree {
        let mut rows = alloc::vec![(None, 1.0)];
        for i in 1..n {
            let p = rng.below(i);
            rows.push((Some(p), rows[p].1 + rng.unit()));
        }
        tree(&rows)
    }

    fn path(nodes: &[usize], info: f64) -> Path {
        Path {
            nodes: nodes.to_vec(),
            cost: 0.0,
            info,
        }
    }

    #[test]
    fn root_only_and_chain() {
        let t = tree(&[(None, 1.0)]);
        let paths = enumerate_paths(&t);
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].nodes, [0]);
        assert_eq!(select_path(&t, &SelectionParams::default()).unwrap().nodes, [0]);

        let t = tree(&[(None, 1.0), (Some(0), 2.0), (Some(1), 3.0), (Some(2), 4.0)]);
        let paths = enumerate_paths(&t);
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].len(), 4);
        assert_eq!(select_path(&t, &SelectionParams::default()).unwrap().nodes, [0, 1, 2, 3]);
    }

    #[test]
    fn similarity_counts() {
        let a = path(&[0, 1, 2], 0.0);
        assert_eq!(similar_nodes(&a, &a), 3);
        assert_eq!(similar_nodes(&a, &path(&[3, 4], 0.0)), 0);
        assert_eq!(similar_nodes(&a, &path(&[0, 5, 6], 0.0)), 1);
        assert_eq!(similar_nodes(&a, &path(&[0, 1], 0.0)), 2);
    }

    #[test]
    fn disjoint_branches_pick_more_informative() {
        // two branches off the root, four nodes each; they share only the root
        let t = tree(&[
            (None, 0.0),
            (Some(0), 1.0),
            (Some(1), 2.0),
            (Some(2), 10.0),
            (Some(0), 1.0),
            (Some(4), 2.0),
            (Some(5), 12.0),
        ]);
        // votes: both +1 (ratio 1/4 ≤ 0.6), tie broken by info
        let best = select_path(&t, &SelectionParams::default()).unwrap();
        assert_eq!(best.nodes, [0, 4, 5, 6]);
        assert_eq!(best.info, 12.0);
    }

    #[test]
    fn short_spurs_are_filtered() {
        // long chain 0..=9 plus spurs of length 2 hanging off the root with huge info
        let mut rows = alloc::vec![(None, 0.0)];
        for i in 1..10 {
            rows.push((Some(i - 1), i as f64));
        }
        for _ in 0..5 {
            rows.push((Some(0), 100.0));
        }
        let best = select_path(&tree(&rows), &SelectionParams::default()).unwrap();
        assert_eq!(best.nodes, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn similar_paths_favour_the_longer() {
        // 0-1-2-3-4 and 0-1-2-3-5-6 share four nodes: ratio 4/5 > 0.6
        let paths = alloc::vec![path(&[0, 1, 2, 3, 4], 50.0), path(&[0, 1, 2, 3, 5, 6], 1.0)];
        let best = select_from(paths, &SelectionParams::default()).unwrap();
        assert_eq!(best.leaf(), 6);
        // equal length: the higher leaf id wins the pairwise vote
        let paths = alloc::vec![path(&[0, 1, 2, 3, 4], 50.0), path(&[0, 1, 2, 3, 5], 1.0)];
        assert_eq!(select_from(paths, &SelectionParams::default()).unwrap().leaf(), 5);
    }

    #[test]
    fn everything_filtered_falls_back_to_longest() {
        // every candidate has length 1, l_min = ceil(0.4) = 1
        let paths = alloc::vec![path(&[3], 1.0), path(&[2], 5.0)];
        assert_eq!(select_from(paths, &SelectionParams::default()).unwrap().leaf(), 2);
    }

    #[test]
    fn params_validated() {
        assert!(SelectionParams::new(0.0, 0.5).is_err());
        assert!(SelectionParams::new(0.5, 1.0).is_err());
        assert!(SelectionParams::new(0.4, 0.6).is_ok());
    }

    proptest! {
        #[test]
        fn paths_follow_parent_links(seed in any::<u64>(), n in 1usize..80) {
            let mut rng = SeededRng::new(seed);
            let t = random_tree(&mut rng, n);
            let paths = enumerate_paths(&t);
            let leaves = (0..t.len()).filter(|&i| t.children(i).is_empty()).count();
            prop_assert_eq!(paths.len(), leaves);
            for p in &paths {
                prop_assert_eq!(p.nodes[0], 0);
                prop_assert!(t.children(p.leaf()).is_empty());
                for w in p.nodes.windows(2) {
                    prop_assert_eq!(t.node(w[1]).parent, Some(w[0]));
                }
            }
            let best = select_path(&t, &SelectionParams::default()).unwrap();
            prop_assert!(paths.contains(&best));
        }

        #[test]
        fn selection_ignores_info_scale_and_order(seed in any::<u64>(), n in 1usize..60, scale in 0.01f64..100.0) {
            let mut rng = SeededRng::new(seed);
            let t = random_tree(&mut rng, n);
            let params = SelectionParams::default();
            let paths = enumerate_paths(&t);
            let best = select_from(paths.clone(), &params).unwrap();

            let scaled: Vec<Path> = paths.iter().map(|p| Path { info: p.info * scale, ..p.clone() }).collect();
            prop_assert_eq!(&select_from(scaled, &params).unwrap().nodes, &best.nodes);

            let mut shuffled = paths.clone();
            for i in (1..shuffled.len()).rev() {
                shuffled.swap(i, rng.below(i + 1));
            }
            prop_assert_eq!(&select_from(shuffled, &params).unwrap().nodes, &best.nodes);
        }
    }
}
