//! Plain (Enflo) roundness: quadruple checks and critical-exponent profiles.
//!
//! An exponent `p >= 1` is a roundness exponent when for every quadruple
//! `(x00, x01, x11, x10)` the two diagonals satisfy
//!
//! ```text
//! d(x00,x11)^p + d(x01,x10)^p <= d(x00,x01)^p + d(x01,x11)^p + d(x11,x10)^p + d(x10,x00)^p
//! ```
//!
//! The triangle inequality makes `p = 1` always hold. The set of roundness
//! exponents of a general space need not be an interval, so the profile only
//! certifies the contiguous interval attached to `p = 1` and makes no claim
//! about exponents above it.

use std::collections::HashMap;

use crate::space::{distance_power, FiniteMetricSpace};

/// Outcome of a single-exponent roundness check.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundnessCheck {
    pub p: f64,
    pub holds: bool,
    /// Worst violating quadruple, present exactly when `holds` is false.
    pub witness: Option<RoundnessWitness>,
}

/// An ordered quadruple `(x00, x01, x11, x10)` whose diagonal power sum
/// exceeds its edge power sum by `margin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundnessWitness {
    pub quadruple: (usize, usize, usize, usize),
    pub margin: f64,
}

/// Largest `p` such that the quadruple inequality holds on `[1, p]` for one
/// quadruple shape, detected by grid scan and sign-change refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrupleRecord {
    pub quadruple: (usize, usize, usize, usize),
    pub sup_contiguous: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub step: f64,
    pub max: f64,
}

/// Per-shape critical exponents and their minimum.
///
/// Every `p` in `[1, global_lower]` is a certified roundness exponent; no
/// claim is made beyond `global_lower`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundnessProfile {
    /// One record per distinct quadruple shape, sorted by `sup_contiguous`
    /// then representative quadruple.
    pub records: Vec<QuadrupleRecord>,
    pub global_lower: f64,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    pub p_grid_max: f64,
    pub grid_step: f64,
    pub refine_tol: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            p_grid_max: 32.0,
            grid_step: 0.01,
            refine_tol: 1e-9,
        }
    }
}

/// The 8 relabelings that leave the quadruple inequality unchanged: the
/// dihedral symmetries of the 4-cycle `x00 - x01 - x11 - x10`.
fn orbit(t: (usize, usize, usize, usize)) -> [(usize, usize, usize, usize); 8] {
    let (a, b, c, d) = t;
    [
        (a, b, c, d),
        (b, c, d, a),
        (c, d, a, b),
        (d, a, b, c),
        (d, c, b, a),
        (c, b, a, d),
        (b, a, d, c),
        (a, d, c, b),
    ]
}

fn is_canonical(t: (usize, usize, usize, usize)) -> bool {
    orbit(t).iter().all(|&u| t <= u)
}

struct QuadrupleShapes {
    /// Distance multiset signature -> representative quadruple.
    /// Signature: both diagonals (sorted) then the four edges (sorted).
    by_signature: HashMap<[u64; 6], (usize, usize, usize, usize)>,
}

impl QuadrupleShapes {
    fn collect(x: &FiniteMetricSpace) -> Self {
        let n = x.n_points();
        let mut by_signature = HashMap::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let t = (a, b, c, d);
                        if !is_canonical(t) {
                            continue;
                        }
                        let mut diagonals = [x.dist(a, c), x.dist(b, d)];
                        diagonals.sort_by(f64::total_cmp);
                        let mut edges =
                            [x.dist(a, b), x.dist(b, c), x.dist(c, d), x.dist(d, a)];
                        edges.sort_by(f64::total_cmp);
                        let signature = [
                            diagonals[0].to_bits(),
                            diagonals[1].to_bits(),
                            edges[0].to_bits(),
                            edges[1].to_bits(),
                            edges[2].to_bits(),
                            edges[3].to_bits(),
                        ];
                        by_signature.entry(signature).or_insert(t);
                    }
                }
            }
        }
        QuadrupleShapes { by_signature }
    }
}

/// Evaluates the quadruple inequality at `p` over all ordered quadruples
/// with repetition, deduplicated by the symmetry group of the inequality.
///
/// `tol` defaults to `1e-9 * (max distance)^p`; the check holds when no
/// margin exceeds it. The witness is the worst margin with lexicographic
/// tie-break.
pub fn roundness_exponent_check(
    x: &FiniteMetricSpace,
    p: f64,
    tol: Option<f64>,
) -> RoundnessCheck {
    assert!(p >= 1.0, "roundness exponents start at 1, got {p}");
    let tol = tol.unwrap_or(1e-9 * distance_power(x.max_distance(), p));
    let n = x.n_points();
    let powers: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| distance_power(x.dist(i, j), p)).collect())
        .collect();
    let dp = |i: usize, j: usize| powers[i][j];
    let mut witness: Option<RoundnessWitness> = None;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let t = (a, b, c, d);
                    if !is_canonical(t) {
                        continue;
                    }
                    let lhs = dp(a, c) + dp(b, d);
                    let rhs = dp(a, b) + dp(b, c) + dp(c, d) + dp(d, a);
                    let margin = lhs - rhs;
                    if margin > tol && witness.is_none_or(|w| margin > w.margin) {
                        witness = Some(RoundnessWitness {
                            quadruple: t,
                            margin,
                        });
                    }
                }
            }
        }
    }
    RoundnessCheck {
        p,
        holds: witness.is_none(),
        witness,
    }
}

/// Scans every distinct quadruple shape for the first exponent where its
/// inequality fails, refining the sign change by bisection.
pub fn roundness_profile(x: &FiniteMetricSpace, opts: &ProfileOptions) -> RoundnessProfile {
    assert!(opts.p_grid_max > 1.0 && opts.grid_step > 0.0 && opts.refine_tol > 0.0);
    let shapes = QuadrupleShapes::collect(x);
    let mut representatives: Vec<(usize, usize, usize, usize)> =
        shapes.by_signature.values().copied().collect();
    representatives.sort_unstable();

    let mut records: Vec<QuadrupleRecord> = representatives
        .into_iter()
        .map(|t| {
            let (a, b, c, d) = t;
            let diagonals = [x.dist(a, c), x.dist(b, d)];
            let edges = [x.dist(a, b), x.dist(b, c), x.dist(c, d), x.dist(d, a)];
            // edge power sum minus diagonal power sum; negative = violation
            let f = |p: f64| {
                let rhs: f64 = edges.iter().map(|&e| distance_power(e, p)).sum();
                let lhs: f64 = diagonals.iter().map(|&e| distance_power(e, p)).sum();
                (rhs - lhs, rhs + lhs)
            };
            let mut sup = opts.p_grid_max;
            let mut prev = 1.0;
            let mut p = 1.0;
            while p < opts.p_grid_max {
                p = (p + opts.grid_step).min(opts.p_grid_max);
                let (value, scale) = f(p);
                if value < -1e-12 * scale {
                    let (mut lo, mut hi) = (prev, p);
                    while hi - lo > opts.refine_tol {
                        let mid = 0.5 * (lo + hi);
                        if f(mid).0 < 0.0 {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    sup = 0.5 * (lo + hi);
                    break;
                }
                prev = p;
            }
            QuadrupleRecord {
                quadruple: t,
                sup_contiguous: sup,
            }
        })
        .collect();

    records.sort_by(|a, b| {
        a.sup_contiguous
            .total_cmp(&b.sup_contiguous)
            .then(a.quadruple.cmp(&b.quadruple))
    });
    let global_lower = records
        .first()
        .map(|r| r.sup_contiguous)
        .unwrap_or(opts.p_grid_max);
    RoundnessProfile {
        records,
        global_lower,
        grid: GridSpec {
            start: 1.0,
            step: opts.grid_step,
            max: opts.p_grid_max,
        },
    }
}

/// A space has infinite roundness exactly when it is ultrametric.
pub fn is_infinite_roundness(x: &FiniteMetricSpace) -> bool {
    x.classify(None).is_ultrametric
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{make_lbk, random_ultrametric, tree_path_metric, WeightedTree};
    use crate::space::FiniteMetricSpace;

    fn space(rows: Vec<Vec<f64>>) -> FiniteMetricSpace {
        FiniteMetricSpace::validate(rows, None, None).unwrap()
    }

    fn unit_four_cycle() -> FiniteMetricSpace {
        space(vec![
            vec![0.0, 1.0, 2.0, 1.0],
            vec![1.0, 0.0, 1.0, 2.0],
            vec![2.0, 1.0, 0.0, 1.0],
            vec![1.0, 2.0, 1.0, 0.0],
        ])
    }

    /// Complete binary tree of the given depth with unit edges, all vertices.
    fn binary_tree_metric(depth: u32) -> FiniteMetricSpace {
        let n = 2usize.pow(depth + 1) - 1;
        let edges = (1..n).map(|v| ((v - 1) / 2, v, 1.0)).collect();
        tree_path_metric(&WeightedTree {
            n_vertices: n,
            edges,
            subset: Some((0..n).collect()),
        })
        .unwrap()
    }

    /// No symmetry dedup, for cross-checking the canonical enumeration.
    fn naive_check(x: &FiniteMetricSpace, p: f64) -> (bool, f64) {
        let n = x.n_points();
        let dp = |i: usize, j: usize| distance_power(x.dist(i, j), p);
        let tol = 1e-9 * distance_power(x.max_distance(), p);
        let mut worst = f64::NEG_INFINITY;
        let mut any = false;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let margin = dp(a, c) + dp(b, d)
                            - (dp(a, b) + dp(b, c) + dp(c, d) + dp(d, a));
                        if margin > tol {
                            any = true;
                            worst = worst.max(margin);
                        }
                    }
                }
            }
        }
        (!any, worst)
    }

    #[test]
    fn p_one_always_holds() {
        for x in [
            unit_four_cycle(),
            make_lbk(3.0, 2).unwrap(),
            random_ultrametric(6, 11, None),
        ] {
            assert!(roundness_exponent_check(&x, 1.0, None).holds);
        }
    }

    #[test]
    fn ultrametric_holds_at_large_exponents() {
        let x = random_ultrametric(7, 5, None);
        assert!(roundness_exponent_check(&x, 10.0, None).holds);
        assert!(roundness_exponent_check(&x, 25.0, None).holds);
    }

    #[test]
    fn isosceles_triple_with_long_base_fails_at_p_three() {
        // x00 = 0, x11 = 1 at distance 1; x01 = x10 = 2 at distance 0.6 from both
        let x = space(vec![
            vec![0.0, 1.0, 0.6],
            vec![1.0, 0.0, 0.6],
            vec![0.6, 0.6, 0.0],
        ]);
        let check = roundness_exponent_check(&x, 3.0, None);
        assert!(!check.holds);
        let witness = check.witness.unwrap();
        // margin of the (0, 2, 1, 2) embedding: 1 - 2 * (0.6^3 + 0.6^3)
        assert!((witness.margin - (1.0 - 4.0 * 0.216)).abs() < 1e-12);
        assert_eq!(witness.quadruple, (0, 2, 1, 2));
    }

    #[test]
    fn canonical_enumeration_agrees_with_naive() {
        let spaces = [
            unit_four_cycle(),
            make_lbk(3.0, 2).unwrap(),
            make_lbk(2.0, 3).unwrap(),
            random_ultrametric(5, 3, None),
            binary_tree_metric(1),
        ];
        for x in &spaces {
            for p in [1.0, 1.5, 2.0, 3.0, 8.0] {
                let fast = roundness_exponent_check(x, p, None);
                let (holds, worst) = naive_check(x, p);
                assert_eq!(fast.holds, holds, "p = {p}");
                if let Some(w) = fast.witness {
                    assert!((w.margin - worst).abs() <= 1e-12 * worst.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn four_cycle_profile_binds_at_one() {
        let x = unit_four_cycle();
        let profile = roundness_profile(&x, &ProfileOptions::default());
        // the cycle quadruple (0,1,2,3) has 2 * 2^p vs 4: fails beyond p = 1
        assert!((profile.global_lower - 1.0).abs() < 1e-6);
        assert!(profile.records.iter().any(|r| r.quadruple == (0, 1, 2, 3)));
    }

    #[test]
    fn equilateral_profile_never_binds() {
        let x = space(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ]);
        let opts = ProfileOptions::default();
        let profile = roundness_profile(&x, &opts);
        assert_eq!(profile.global_lower, opts.p_grid_max);
        assert!(profile
            .records
            .iter()
            .all(|r| r.sup_contiguous == opts.p_grid_max));
    }

    #[test]
    fn binary_tree_profile_binds_at_two() {
        let x = binary_tree_metric(3);
        assert_eq!(x.n_points(), 15);
        let profile = roundness_profile(&x, &ProfileOptions::default());
        // midpoint segments force exactly 2
        assert!((profile.global_lower - 2.0).abs() < 1e-3);
    }

    #[test]
    fn profile_grid_is_reported() {
        let x = unit_four_cycle();
        let opts = ProfileOptions {
            p_grid_max: 4.0,
            grid_step: 0.05,
            refine_tol: 1e-7,
        };
        let profile = roundness_profile(&x, &opts);
        assert_eq!(profile.grid.start, 1.0);
        assert_eq!(profile.grid.step, 0.05);
        assert_eq!(profile.grid.max, 4.0);
        assert!((profile.global_lower - 1.0).abs() < 1e-4);
    }

    #[test]
    fn infinite_roundness_iff_ultrametric() {
        assert!(is_infinite_roundness(&random_ultrametric(8, 2, None)));
        assert!(is_infinite_roundness(&space(vec![
            vec![0.0, 5.0],
            vec![5.0, 0.0]
        ])));
        assert!(!is_infinite_roundness(&make_lbk(3.0, 2).unwrap()));
    }
}
