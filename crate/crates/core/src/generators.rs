//! Metric families with known properties.
//!
//! * the star leaf space `L(b,k)` whose generalized roundness has a closed
//!   form, and its inverse design for a target value,
//! * random dendrogram ultrametrics,
//! * path metrics of weighted trees restricted to a vertex subset.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::space::FiniteMetricSpace;

/// Default merge height range for random dendrograms.
pub const DEFAULT_HEIGHT_RANGE: (f64, f64) = (1.0, 2.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("target generalized roundness must lie in (1, inf), got {0}")]
    TargetOutOfRange(f64),
    #[error("tree is disconnected")]
    DisconnectedTree,
    #[error("tree contains a cycle")]
    CycleDetected,
    #[error("edge ({u},{v}) has nonpositive length {len}")]
    EdgeLengthNotPositive { u: usize, v: usize, len: f64 },
    #[error("vertex index {0} out of range")]
    VertexOutOfRange(usize),
    #[error("dendrogram heights must be strictly increasing (merge {index})")]
    HeightsNotIncreasing { index: usize },
    #[error("dendrogram merge {index} references invalid or consumed cluster {id}")]
    InvalidMergeId { index: usize, id: usize },
    #[error("dendrogram has {merges} merges for {leaves} leaves")]
    IncompleteMerge { merges: usize, leaves: usize },
}

/// Parameters of the star leaf space `L(b,k)`: `k+1` leaves of a star in
/// which one edge has length `1/(b+1)` and the other `k` edges have length
/// `b/(b+1)`. The nonzero distances are `1` and `z = 2b/(b+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbkParams {
    pub b: f64,
    pub k: usize,
    /// `2b/(b+1)`, always in `(1, 2)`.
    pub z: f64,
    /// `log_z(2k/(k-1))`, the generalized roundness of `L(b,k)`.
    pub closed_form_gr: f64,
}

/// Derives `z` and the closed-form generalized roundness for `(b, k)`.
pub fn lbk_params(b: f64, k: usize) -> Result<LbkParams, GeneratorError> {
    if !(b > 1.0 && b.is_finite()) {
        return Err(GeneratorError::ParamOutOfRange(format!(
            "b must be a finite real > 1, got {b}"
        )));
    }
    if k < 2 {
        return Err(GeneratorError::ParamOutOfRange(format!(
            "k must be an integer >= 2, got {k}"
        )));
    }
    let z = 2.0 * b / (b + 1.0);
    let ratio = 2.0 * k as f64 / (k as f64 - 1.0);
    Ok(LbkParams {
        b,
        k,
        z,
        closed_form_gr: ratio.ln() / z.ln(),
    })
}

/// Builds the `k+1` point star leaf space `L(b,k)`: point 0 at distance 1
/// from every other point, points `1..=k` mutually at distance `2b/(b+1)`.
pub fn make_lbk(b: f64, k: usize) -> Result<FiniteMetricSpace, GeneratorError> {
    let params = lbk_params(b, k)?;
    let n = k + 1;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else if i == 0 || j == 0 {
                        1.0
                    } else {
                        params.z
                    }
                })
                .collect()
        })
        .collect();
    Ok(FiniteMetricSpace::validate(rows, None, None)
        .expect("star leaf distances always form a metric"))
}

/// Inverse design: picks `(b, k)` such that `L(b,k)` has generalized
/// roundness exactly `target`.
///
/// Uses the smallest `k >= 2` with `log2(2k/(k-1)) < target`, then solves
/// `z^target = 2k/(k-1)` and `b = z/(2-z)`.
pub fn lbk_for_target(target: f64) -> Result<LbkParams, GeneratorError> {
    if !(target > 1.0 && target.is_finite()) {
        return Err(GeneratorError::TargetOutOfRange(target));
    }
    let mut k = 2usize;
    while (2.0 * k as f64 / (k as f64 - 1.0)).log2() >= target {
        k += 1;
    }
    let ratio = 2.0 * k as f64 / (k as f64 - 1.0);
    let z = ratio.powf(1.0 / target);
    let b = z / (2.0 - z);
    Ok(LbkParams {
        b,
        k,
        z,
        closed_form_gr: ratio.ln() / z.ln(),
    })
}

/// A nested merge hierarchy with strictly increasing positive heights.
///
/// Clusters `0..n_leaves` are the singletons; merge `i` produces cluster
/// `n_leaves + i`. The distance between two leaves is the height of their
/// lowest common merge, which is an ultrametric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n_leaves: usize,
    merges: Vec<Merge>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

impl Dendrogram {
    pub fn new(n_leaves: usize, merges: Vec<Merge>) -> Result<Self, GeneratorError> {
        if n_leaves < 2 {
            return Err(GeneratorError::ParamOutOfRange(format!(
                "a dendrogram needs at least 2 leaves, got {n_leaves}"
            )));
        }
        if merges.len() != n_leaves - 1 {
            return Err(GeneratorError::IncompleteMerge {
                merges: merges.len(),
                leaves: n_leaves,
            });
        }
        let mut prev = 0.0;
        let mut consumed = vec![false; n_leaves + merges.len()];
        for (index, merge) in merges.iter().enumerate() {
            if !(merge.height > prev && merge.height.is_finite()) {
                return Err(GeneratorError::HeightsNotIncreasing { index });
            }
            prev = merge.height;
            let available = n_leaves + index;
            for id in [merge.left, merge.right] {
                if id >= available || consumed[id] {
                    return Err(GeneratorError::InvalidMergeId { index, id });
                }
            }
            if merge.left == merge.right {
                return Err(GeneratorError::InvalidMergeId {
                    index,
                    id: merge.right,
                });
            }
            consumed[merge.left] = true;
            consumed[merge.right] = true;
        }
        Ok(Dendrogram { n_leaves, merges })
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Random binary dendrogram on `n` leaves. Heights are sorted uniform
    /// draws from `height_range` with a strict separation of `1e-6` times
    /// the range width enforced between consecutive merges.
    pub fn random(n: usize, seed: u64, height_range: (f64, f64)) -> Dendrogram {
        assert!(n >= 2, "need at least 2 leaves, got {n}");
        let (lo, hi) = height_range;
        assert!(
            lo > 0.0 && hi > lo,
            "height range must satisfy 0 < lo < hi, got ({lo}, {hi})"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut heights: Vec<f64> = (0..n - 1).map(|_| rng.random_range(lo..hi)).collect();
        heights.sort_by(f64::total_cmp);
        let min_sep = 1e-6 * (hi - lo);
        for i in 1..heights.len() {
            if heights[i] <= heights[i - 1] + min_sep {
                heights[i] = heights[i - 1] + min_sep;
            }
        }
        let mut active: Vec<usize> = (0..n).collect();
        let mut merges = Vec::with_capacity(n - 1);
        for (i, &height) in heights.iter().enumerate() {
            let a = active.swap_remove(rng.random_range(0..active.len()));
            let b = active.swap_remove(rng.random_range(0..active.len()));
            merges.push(Merge {
                left: a.min(b),
                right: a.max(b),
                height,
            });
            active.push(n + i);
        }
        Dendrogram { n_leaves: n, merges }
    }

    /// The leaf metric `d(x,y) = height of the lowest common merge`.
    pub fn to_metric(&self) -> FiniteMetricSpace {
        let n = self.n_leaves;
        let mut members: Vec<Option<Vec<usize>>> =
            (0..n).map(|i| Some(vec![i])).collect();
        members.resize(n + self.merges.len(), None);
        let mut dist = DMatrix::zeros(n, n);
        for (i, merge) in self.merges.iter().enumerate() {
            let left = members[merge.left].take().expect("validated merge id");
            let right = members[merge.right].take().expect("validated merge id");
            for &a in &left {
                for &b in &right {
                    dist[(a, b)] = merge.height;
                    dist[(b, a)] = merge.height;
                }
            }
            let mut combined = left;
            combined.extend(right);
            members[n + i] = Some(combined);
        }
        let labels = (0..n).map(|i| i.to_string()).collect();
        FiniteMetricSpace::from_parts_unchecked(labels, dist)
    }
}

/// Random dendrogram ultrametric on `n` points; `height_range` defaults to
/// [`DEFAULT_HEIGHT_RANGE`]. Deterministic in `(n, seed, height_range)`.
pub fn random_ultrametric(
    n: usize,
    seed: u64,
    height_range: Option<(f64, f64)>,
) -> FiniteMetricSpace {
    Dendrogram::random(n, seed, height_range.unwrap_or(DEFAULT_HEIGHT_RANGE)).to_metric()
}

/// A weighted tree given by an edge list; `subset` selects the vertices the
/// path metric is restricted to (all leaves when absent).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTree {
    pub n_vertices: usize,
    /// `(u, v, length)` with `length > 0`.
    pub edges: Vec<(usize, usize, f64)>,
    pub subset: Option<Vec<usize>>,
}

/// All-pairs path distances of `tree` restricted to its subset.
pub fn tree_path_metric(tree: &WeightedTree) -> Result<FiniteMetricSpace, GeneratorError> {
    let n = tree.n_vertices;
    if n < 2 {
        return Err(GeneratorError::ParamOutOfRange(format!(
            "a tree needs at least 2 vertices, got {n}"
        )));
    }

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(u, v, len) in &tree.edges {
        for id in [u, v] {
            if id >= n {
                return Err(GeneratorError::VertexOutOfRange(id));
            }
        }
        if !(len > 0.0 && len.is_finite()) {
            return Err(GeneratorError::EdgeLengthNotPositive { u, v, len });
        }
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru == rv {
            return Err(GeneratorError::CycleDetected);
        }
        parent[ru] = rv;
        adjacency[u].push((v, len));
        adjacency[v].push((u, len));
    }
    let root = find(&mut parent, 0);
    if (0..n).any(|v| find(&mut parent, v) != root) {
        return Err(GeneratorError::DisconnectedTree);
    }

    let subset: Vec<usize> = match &tree.subset {
        Some(s) => {
            let mut seen = vec![false; n];
            for &v in s {
                if v >= n {
                    return Err(GeneratorError::VertexOutOfRange(v));
                }
                if seen[v] {
                    return Err(GeneratorError::ParamOutOfRange(format!(
                        "duplicate subset vertex {v}"
                    )));
                }
                seen[v] = true;
            }
            s.clone()
        }
        None => (0..n).filter(|&v| adjacency[v].len() == 1).collect(),
    };
    if subset.len() < 2 {
        return Err(GeneratorError::ParamOutOfRange(format!(
            "subset must contain at least 2 vertices, got {}",
            subset.len()
        )));
    }

    // path sums from each subset vertex by depth-first traversal
    let mut all_dist = vec![vec![0.0_f64; n]; subset.len()];
    for (row, &source) in subset.iter().enumerate() {
        let dist = &mut all_dist[row];
        let mut visited = vec![false; n];
        let mut stack = vec![source];
        visited[source] = true;
        while let Some(u) = stack.pop() {
            for &(v, len) in &adjacency[u] {
                if !visited[v] {
                    visited[v] = true;
                    dist[v] = dist[u] + len;
                    stack.push(v);
                }
            }
        }
    }
    let rows: Vec<Vec<f64>> = subset
        .iter()
        .enumerate()
        .map(|(r, _)| subset.iter().map(|&t| all_dist[r][t]).collect())
        .collect();
    let labels = subset.iter().map(|v| v.to_string()).collect();
    Ok(FiniteMetricSpace::validate(rows, Some(labels), None)
        .expect("tree path distances always form a metric"))
}

/// Random tree on `n_vertices` by uniform attachment, edge lengths uniform
/// in `[0.5, 1.5]`. Deterministic in `(n_vertices, seed)`.
pub fn random_weighted_tree(n_vertices: usize, seed: u64) -> WeightedTree {
    assert!(n_vertices >= 2, "need at least 2 vertices, got {n_vertices}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (1..n_vertices)
        .map(|v| {
            let u = rng.random_range(0..v);
            (u, v, rng.random_range(0.5..1.5))
        })
        .collect();
    WeightedTree {
        n_vertices,
        edges,
        subset: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn star_leaf_space_matches_closed_matrix() {
        let x = make_lbk(3.0, 2).unwrap();
        assert_eq!(
            x.rows(),
            vec![
                vec![0.0, 1.0, 1.0],
                vec![1.0, 0.0, 1.5],
                vec![1.0, 1.5, 0.0],
            ]
        );
        let report = x.classify(None);
        assert!(report.is_additive && !report.is_ultrametric);
    }

    #[test]
    fn star_leaf_space_has_two_distance_values() {
        for (b, k) in [(3.0, 2usize), (2.0, 3), (1.5, 5), (9.0, 2), (100.0, 4)] {
            let params = lbk_params(b, k).unwrap();
            assert!(params.z > 1.0 && params.z < 2.0);
            let x = make_lbk(b, k).unwrap();
            let mut values: Vec<f64> = x
                .rows()
                .iter()
                .flatten()
                .copied()
                .filter(|&v| v > 0.0)
                .collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            assert_eq!(values, vec![1.0, params.z]);
        }
    }

    #[test]
    fn near_one_b_tends_to_equilateral() {
        let params = lbk_params(1.0 + 1e-9, 3).unwrap();
        assert!((params.z - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lbk_param_validation() {
        assert!(matches!(
            make_lbk(1.0, 2),
            Err(GeneratorError::ParamOutOfRange(_))
        ));
        assert!(matches!(
            make_lbk(3.0, 1),
            Err(GeneratorError::ParamOutOfRange(_))
        ));
    }

    #[test]
    fn target_two_needs_three_leaves() {
        let params = lbk_for_target(2.0).unwrap();
        assert_eq!(params.k, 3);
        assert_relative_eq!(params.z, 3.0_f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(params.b, 6.464_101_615_137_752, max_relative = 1e-12);
        assert_relative_eq!(params.closed_form_gr, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn target_inverts_the_l32_value() {
        let target = 4.0_f64.ln() / 1.5_f64.ln();
        let params = lbk_for_target(target).unwrap();
        assert_eq!(params.k, 2);
        assert_relative_eq!(params.z, 1.5, max_relative = 1e-9);
        assert_relative_eq!(params.b, 3.0, max_relative = 1e-7);
    }

    #[test]
    fn target_close_to_one_uses_large_k() {
        let params = lbk_for_target(1.01).unwrap();
        assert_eq!(params.k, 145);
        assert!(params.b > 1.0);
        assert!(params.z > 1.0 && params.z < 2.0);
        assert_relative_eq!(params.closed_form_gr, 1.01, max_relative = 1e-12);
    }

    #[test]
    fn target_out_of_range() {
        assert!(matches!(
            lbk_for_target(1.0),
            Err(GeneratorError::TargetOutOfRange(_))
        ));
        assert!(matches!(
            lbk_for_target(f64::INFINITY),
            Err(GeneratorError::TargetOutOfRange(_))
        ));
    }

    #[test]
    fn two_point_ultrametric() {
        let x = random_ultrametric(2, 3, None);
        assert_eq!(x.n_points(), 2);
        assert!(x.dist(0, 1) > 0.0);
        assert!(x.classify(None).is_ultrametric);
    }

    #[test]
    fn random_ultrametric_is_deterministic_and_exact() {
        let x = random_ultrametric(8, 7, None);
        let y = random_ultrametric(8, 7, None);
        assert_eq!(x, y);
        // zero-slack ultrametric check
        let report = x.classify(Some(0.0));
        assert!(report.is_ultrametric);
        assert!(report.is_additive);
    }

    #[test]
    fn equal_heights_are_rejected() {
        let merges = vec![
            Merge { left: 0, right: 1, height: 1.0 },
            Merge { left: 2, right: 3, height: 1.0 },
            Merge { left: 4, right: 5, height: 2.0 },
        ];
        let err = Dendrogram::new(4, merges).unwrap_err();
        assert!(matches!(err, GeneratorError::HeightsNotIncreasing { index: 1 }));
    }

    #[test]
    fn dendrogram_structural_validation() {
        assert!(matches!(
            Dendrogram::new(3, vec![Merge { left: 0, right: 1, height: 1.0 }]),
            Err(GeneratorError::IncompleteMerge { .. })
        ));
        let merges = vec![
            Merge { left: 0, right: 1, height: 1.0 },
            Merge { left: 1, right: 2, height: 2.0 },
        ];
        assert!(matches!(
            Dendrogram::new(3, merges),
            Err(GeneratorError::InvalidMergeId { .. })
        ));
        // merging the second leaf into the first cluster is valid
        let merges = vec![
            Merge { left: 0, right: 1, height: 1.0 },
            Merge { left: 2, right: 3, height: 2.0 },
        ];
        let metric = Dendrogram::new(3, merges).unwrap().to_metric();
        assert_eq!(metric.dist(0, 1), 1.0);
        assert_eq!(metric.dist(0, 2), 2.0);
        assert_eq!(metric.dist(1, 2), 2.0);
    }

    #[test]
    fn star_tree_reproduces_star_leaf_space() {
        let b = 3.0;
        let k = 2;
        // vertex 0 = hub, leaves 1..=k+1; leaf 1 on the short edge
        let mut edges = vec![(0, 1, 1.0 / (b + 1.0))];
        for leaf in 2..=(k + 1) {
            edges.push((0, leaf, b / (b + 1.0)));
        }
        let tree = WeightedTree {
            n_vertices: k + 2,
            edges,
            subset: None,
        };
        let from_tree = tree_path_metric(&tree).unwrap();
        let direct = make_lbk(b, k).unwrap();
        for i in 0..direct.n_points() {
            for j in 0..direct.n_points() {
                assert_relative_eq!(
                    from_tree.dist(i, j),
                    direct.dist(i, j),
                    max_relative = 1e-15
                );
            }
        }
    }

    #[test]
    fn path_graph_metric() {
        let tree = WeightedTree {
            n_vertices: 3,
            edges: vec![(0, 1, 1.0), (1, 2, 1.0)],
            subset: Some(vec![0, 1, 2]),
        };
        let x = tree_path_metric(&tree).unwrap();
        assert_eq!(x.rows(), vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ]);
        let report = x.classify(None);
        assert!(report.is_additive && !report.is_ultrametric);
    }

    #[test]
    fn tree_errors() {
        let disconnected = WeightedTree {
            n_vertices: 4,
            edges: vec![(0, 1, 1.0), (2, 3, 1.0)],
            subset: None,
        };
        assert!(matches!(
            tree_path_metric(&disconnected),
            Err(GeneratorError::DisconnectedTree)
        ));
        let cyclic = WeightedTree {
            n_vertices: 3,
            edges: vec![(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)],
            subset: None,
        };
        assert!(matches!(
            tree_path_metric(&cyclic),
            Err(GeneratorError::CycleDetected)
        ));
        let bad_len = WeightedTree {
            n_vertices: 2,
            edges: vec![(0, 1, 0.0)],
            subset: None,
        };
        assert!(matches!(
            tree_path_metric(&bad_len),
            Err(GeneratorError::EdgeLengthNotPositive { .. })
        ));
        let bad_vertex = WeightedTree {
            n_vertices: 2,
            edges: vec![(0, 5, 1.0)],
            subset: None,
        };
        assert!(matches!(
            tree_path_metric(&bad_vertex),
            Err(GeneratorError::VertexOutOfRange(5))
        ));
    }

    #[test]
    fn random_tree_leaf_metric_is_additive() {
        for seed in 0..5 {
            let tree = random_weighted_tree(10, seed);
            let x = tree_path_metric(&tree).unwrap();
            assert!(x.n_points() >= 2);
            let report = x.classify(Some(1e-12));
            assert!(report.is_additive, "seed {seed}");
        }
    }
}
