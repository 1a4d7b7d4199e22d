//! Isometric Euclidean embeddings of minimal dimension.
//!
//! When `A_p` is positive semi-definite its spectral factorization
//! `A_p = U L U'` yields coordinates `U L^(1/2)` whose pairwise Euclidean
//! distances realize `d^(p/2)` exactly, with the base point at the origin.
//! The achieved rank is the number of eigenvalues kept, and it equals the
//! full dimension `n` exactly when the space has strict p-negative type.

use thiserror::Error;

use crate::negtype::{gram_matrix, DEFAULT_SPECTRAL_REL_TOL};
use crate::space::{distance_power, FiniteMetricSpace};

/// Default relative eigenvalue cutoff for the achieved rank.
pub const DEFAULT_RANK_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbedError {
    #[error("space is not of {p}-negative type (min eigenvalue {min_eigenvalue:e})")]
    NotNegativeType { p: f64, min_eigenvalue: f64 },
    #[error("embedding exponent must lie in [0, 2], got {0}; transform the metric first")]
    ExponentOutOfRange(f64),
    #[error("embedding has {rows} coordinate rows for a space of {points} points")]
    DimensionMismatch { rows: usize, points: usize },
}

/// Coordinates realizing `(X, d^(p/2))` in Euclidean space of the minimal
/// dimension `rank`.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanEmbedding {
    /// Negative-type exponent used; the embedding realizes `d^(p/2)`.
    pub p: f64,
    pub base: usize,
    /// `n+1` rows by `rank` columns; the base row is the zero vector.
    pub coords: Vec<Vec<f64>>,
    /// Number of eigenvalues above the rank cutoff.
    pub rank: usize,
    /// Max over pairs of `| ||row_i - row_j|| - d(x_i,x_j)^(p/2) |`.
    pub residual: f64,
}

/// Result of re-checking an embedding against its space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsometryCheck {
    pub max_error: f64,
    pub pair: (usize, usize),
}

/// Embed `(X, d^(p/2))` isometrically with the base point at the origin.
///
/// Requires `A_p` positive semi-definite; eigenvalues below
/// `rank_tol * max eigenvalue` are treated as zero and dropped, which is what
/// lets boundary spaces embed in dimension below `n`. For `p > 2` transform
/// the metric first and embed the result at `p = 2`.
///
/// Coordinate signs and orientation are unspecified; compare distance
/// matrices, not raw coordinates.
pub fn embed_euclidean(
    x: &FiniteMetricSpace,
    p: f64,
    base: usize,
    rank_tol: Option<f64>,
) -> Result<EuclideanEmbedding, EmbedError> {
    if !(0.0..=2.0).contains(&p) {
        return Err(EmbedError::ExponentOutOfRange(p));
    }
    let n = x.n_points();
    assert!(base < n, "base index {base} out of range for {n} points");
    let gram = gram_matrix(x, p, base);
    let tau = DEFAULT_SPECTRAL_REL_TOL * gram.max_abs_eigenvalue();
    if gram.min_eigenvalue() < -tau {
        return Err(EmbedError::NotNegativeType {
            p,
            min_eigenvalue: gram.min_eigenvalue(),
        });
    }

    let eigenvalues = gram.eigenvalues();
    let max_eigenvalue = eigenvalues[eigenvalues.len() - 1].max(0.0);
    let cutoff = rank_tol.unwrap_or(DEFAULT_RANK_REL_TOL) * max_eigenvalue;
    // descending order of kept eigenvalues
    let kept: Vec<usize> = (0..eigenvalues.len())
        .rev()
        .filter(|&i| eigenvalues[i] > cutoff)
        .collect();
    let rank = kept.len();

    let mut coords = vec![vec![0.0; rank]; n];
    for (row, point) in (0..n).filter(|&i| i != base).enumerate() {
        let coordinates = &mut coords[point];
        for (col, &e) in kept.iter().enumerate() {
            let scale = eigenvalues[e].sqrt();
            coordinates[col] = gram.eigenvector(e)[row] * scale;
        }
    }

    let mut residual = 0.0_f64;
    for i in 0..n {
        for j in i + 1..n {
            let norm: f64 = coords[i]
                .iter()
                .zip(&coords[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            residual = residual.max((norm - distance_power(x.dist(i, j), 0.5 * p)).abs());
        }
    }

    Ok(EuclideanEmbedding {
        p,
        base,
        coords,
        rank,
        residual,
    })
}

/// Recomputes all pairwise norms of `embedding` against `d^(p/2)` and
/// returns the worst error with its pair.
pub fn verify_isometry(
    embedding: &EuclideanEmbedding,
    x: &FiniteMetricSpace,
) -> Result<IsometryCheck, EmbedError> {
    let n = x.n_points();
    if embedding.coords.len() != n
        || embedding
            .coords
            .iter()
            .any(|row| row.len() != embedding.rank)
    {
        return Err(EmbedError::DimensionMismatch {
            rows: embedding.coords.len(),
            points: n,
        });
    }
    let mut max_error = 0.0_f64;
    let mut pair = (0, 0);
    for i in 0..n {
        for j in i + 1..n {
            let norm: f64 = embedding.coords[i]
                .iter()
                .zip(&embedding.coords[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let error = (norm - distance_power(x.dist(i, j), 0.5 * embedding.p)).abs();
            if error > max_error {
                max_error = error;
                pair = (i, j);
            }
        }
    }
    Ok(IsometryCheck { max_error, pair })
}
