//! Finite metric spaces: validation, classification and metric transforms.
//!
//! A [`FiniteMetricSpace`] is a labeled point set together with a validated
//! symmetric distance matrix. Classification decides whether the space is
//! ultrametric (every triangle is isosceles with the two longest sides equal)
//! and/or additive (the four-point condition that characterizes tree metrics).

use nalgebra::DMatrix;
use thiserror::Error;

/// Relative tolerance factor applied to the maximum distance when no explicit
/// tolerance is supplied. All inequality checks use `<= rhs + tol` slack.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// `d^p` with the convention `0^0 := 0`.
///
/// Distances of zero stay zero for every exponent, so zero diagonals never
/// contribute to power sums even at `p = 0`.
#[inline]
pub fn distance_power(d: f64, p: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        d.powf(p)
    }
}

/// Validation and transform failures for candidate distance matrices.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("matrix is not square: {rows} rows but row {row} has {cols} entries")]
    NotSquare { rows: usize, row: usize, cols: usize },
    #[error("a metric space needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("{labels} labels supplied for {points} points")]
    LabelCountMismatch { labels: usize, points: usize },
    #[error("entry ({i},{j}) is not a finite number")]
    NonFiniteEntry { i: usize, j: usize },
    #[error("asymmetric entry at ({i},{j}): {forward} vs {backward}")]
    AsymmetricEntry {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },
    #[error("nonzero diagonal at index {i}: {value}")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("off-diagonal entry ({i},{j}) must be positive, got {value}")]
    NonpositiveOffDiagonal { i: usize, j: usize, value: f64 },
    #[error("triangle violation: d({i},{k}) > d({i},{j}) + d({j},{k}) by {slack}")]
    TriangleViolation {
        i: usize,
        j: usize,
        k: usize,
        slack: f64,
    },
    #[error("metric transform with p = {p} breaks the triangle inequality at {witness:?}")]
    TransformNotMetric { p: f64, witness: (usize, usize, usize) },
}

/// A labeled point set with a validated symmetric distance matrix.
///
/// Invariants established at construction: zero diagonal, symmetry, strictly
/// positive off-diagonal entries and the triangle inequality (within the
/// validation tolerance). Values are immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: DMatrix<f64>,
}

/// Outcome of the ultrametric / additive classification of a space.
///
/// A witness is present exactly when the corresponding flag is false, and
/// re-evaluating the defining inequality on the witness reproduces the
/// violation.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub is_ultrametric: bool,
    pub is_additive: bool,
    /// Lexicographically smallest `(i,j,k)` with `d(i,j) > max(d(i,k), d(j,k)) + tol`.
    pub ultra_witness: Option<(usize, usize, usize)>,
    /// Lexicographically smallest `(i,j,k,l)` with
    /// `d(i,j) + d(k,l) > max(d(i,k)+d(j,l), d(i,l)+d(j,k)) + tol`.
    pub additive_witness: Option<(usize, usize, usize, usize)>,
    pub tol: f64,
}

impl FiniteMetricSpace {
    /// Validates `matrix` as a finite metric and wraps it.
    ///
    /// `labels` defaults to `"0".."n"`. `tol` defaults to
    /// [`DEFAULT_REL_TOL`] times the largest distance. The stored matrix is
    /// the upper triangle mirrored, so exact symmetry holds afterwards even
    /// when the input was only symmetric within tolerance.
    pub fn validate(
        matrix: Vec<Vec<f64>>,
        labels: Option<Vec<String>>,
        tol: Option<f64>,
    ) -> Result<Self, MetricError> {
        let n = matrix.len();
        for (row, r) in matrix.iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NotSquare {
                    rows: n,
                    row,
                    cols: r.len(),
                });
            }
        }
        if n < 2 {
            return Err(MetricError::TooFewPoints(n));
        }
        for (i, row) in matrix.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(MetricError::NonFiniteEntry { i, j });
                }
            }
        }
        let max_abs = matrix
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let tol = tol.unwrap_or(DEFAULT_REL_TOL * max_abs);

        for (i, row) in matrix.iter().enumerate() {
            if row[i].abs() > tol {
                return Err(MetricError::NonzeroDiagonal { i, value: row[i] });
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let (forward, backward) = (matrix[i][j], matrix[j][i]);
                if (forward - backward).abs() > tol {
                    return Err(MetricError::AsymmetricEntry {
                        i,
                        j,
                        forward,
                        backward,
                    });
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if matrix[i][j] <= 0.0 {
                    return Err(MetricError::NonpositiveOffDiagonal {
                        i,
                        j,
                        value: matrix[i][j],
                    });
                }
            }
        }

        let dist = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else if i < j {
                matrix[i][j]
            } else {
                matrix[j][i]
            }
        });

        // Lexicographically smallest violating (i,j,k) with d(i,k) > d(i,j) + d(j,k).
        for i in 0..n {
            for j in 0..n {
                if j == i {
                    continue;
                }
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    let slack = dist[(i, k)] - dist[(i, j)] - dist[(j, k)];
                    if slack > tol {
                        return Err(MetricError::TriangleViolation { i, j, k, slack });
                    }
                }
            }
        }

        let labels = match labels {
            Some(l) => {
                if l.len() != n {
                    return Err(MetricError::LabelCountMismatch {
                        labels: l.len(),
                        points: n,
                    });
                }
                l
            }
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        Ok(FiniteMetricSpace { labels, dist })
    }

    pub fn n_points(&self) -> usize {
        self.dist.nrows()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[(i, j)]
    }

    pub fn max_distance(&self) -> f64 {
        self.dist.iter().fold(0.0_f64, |acc, &v| acc.max(v))
    }

    /// Default tolerance for this space: [`DEFAULT_REL_TOL`] times the
    /// largest distance.
    pub fn default_tolerance(&self) -> f64 {
        DEFAULT_REL_TOL * self.max_distance()
    }

    /// Distance matrix as row-major nested vectors.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        let n = self.n_points();
        (0..n)
            .map(|i| (0..n).map(|j| self.dist[(i, j)]).collect())
            .collect()
    }

    /// Uniformly rescaled copy. Scaling a metric by a positive constant
    /// preserves every property this crate computes up to the same scale.
    pub(crate) fn scaled(&self, factor: f64) -> FiniteMetricSpace {
        debug_assert!(factor > 0.0);
        FiniteMetricSpace {
            labels: self.labels.clone(),
            dist: self.dist.map(|v| v * factor),
        }
    }

    pub(crate) fn from_parts_unchecked(labels: Vec<String>, dist: DMatrix<f64>) -> Self {
        FiniteMetricSpace { labels, dist }
    }

    /// Decides the ultrametric and four-point (additive) inequalities over
    /// all triples and quadruples.
    ///
    /// Only the max-form inequalities are tested; witnesses are the
    /// lexicographically smallest violating tuples.
    pub fn classify(&self, tol: Option<f64>) -> ClassificationReport {
        let tol = tol.unwrap_or(self.default_tolerance());
        let n = self.n_points();
        let d = |i: usize, j: usize| self.dist[(i, j)];

        let mut ultra_witness: Option<(usize, usize, usize)> = None;
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    if d(i, j) > d(i, k).max(d(j, k)) + tol {
                        let cand = (i, j, k);
                        if ultra_witness.is_none_or(|w| cand < w) {
                            ultra_witness = Some(cand);
                        }
                    }
                }
            }
        }

        let mut additive_witness: Option<(usize, usize, usize, usize)> = None;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    for l in k + 1..n {
                        let s_ij_kl = d(i, j) + d(k, l);
                        let s_ik_jl = d(i, k) + d(j, l);
                        let s_il_jk = d(i, l) + d(j, k);
                        let checks = [
                            (s_ij_kl, s_ik_jl.max(s_il_jk), (i, j, k, l)),
                            (s_ik_jl, s_ij_kl.max(s_il_jk), (i, k, j, l)),
                            (s_il_jk, s_ij_kl.max(s_ik_jl), (i, l, j, k)),
                        ];
                        for (lhs, rhs, cand) in checks {
                            if lhs > rhs + tol && additive_witness.is_none_or(|w| cand < w) {
                                additive_witness = Some(cand);
                            }
                        }
                    }
                }
            }
        }

        ClassificationReport {
            is_ultrametric: ultra_witness.is_none(),
            is_additive: additive_witness.is_none(),
            ultra_witness,
            additive_witness,
            tol,
        }
    }

    /// The metric transform `(X, d^p)`.
    ///
    /// For `p <= 1` the transform of a metric is always a metric. For
    /// `p > 1` the triangle inequality is re-validated and a failure is
    /// reported as [`MetricError::TransformNotMetric`].
    ///
    /// Panics if `p <= 0`.
    pub fn transform(&self, p: f64) -> Result<FiniteMetricSpace, MetricError> {
        assert!(p > 0.0, "transform exponent must be positive, got {p}");
        if p == 1.0 {
            return Ok(self.clone());
        }
        if p <= 1.0 {
            return Ok(FiniteMetricSpace {
                labels: self.labels.clone(),
                dist: self.dist.map(|v| distance_power(v, p)),
            });
        }
        let rows = self
            .rows()
            .into_iter()
            .map(|r| r.into_iter().map(|v| distance_power(v, p)).collect())
            .collect();
        FiniteMetricSpace::validate(rows, Some(self.labels.clone()), None).map_err(|e| match e {
            MetricError::TriangleViolation { i, j, k, .. } => MetricError::TransformNotMetric {
                p,
                witness: (i, j, k),
            },
            other => other,
        })
    }
}
