//! Weighted polygonal equalities at the supremal negative-type exponent.
//!
//! A p-polygonal equality is a configuration of two disjoint point lists
//! with positive weights summing to one on each side for which the weighted
//! generalized roundness inequality holds with equality. A finite
//! non-ultrametric space admits one exactly at its supremal exponent; it is
//! read off the kernel of the Gram-form matrix there. Ultrametric spaces
//! admit none at any exponent.

use thiserror::Error;

use crate::negtype::{
    generalized_roundness, gram_matrix, GrOptions, NegTypeError, DEFAULT_SPECTRAL_REL_TOL,
};
use crate::space::{distance_power, FiniteMetricSpace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolygonalError {
    /// The minimal eigenvalue at the computed supremum is not within the
    /// boundary tolerance, indicating a bisection/tolerance mismatch.
    #[error(
        "no kernel vector at p = {p}: min eigenvalue {min_eigenvalue:e} exceeds tolerance {tol:e}"
    )]
    NoKernelVector {
        p: f64,
        min_eigenvalue: f64,
        tol: f64,
    },
    #[error("weights on the {side} side sum to {sum}, expected 1")]
    WeightSumInvalid { side: &'static str, sum: f64 },
    #[error("weight {weight} at point {index} must be strictly positive")]
    NonpositiveWeight { index: usize, weight: f64 },
    #[error("point {0} appears on both sides or twice within a side")]
    IndexOverlap(usize),
    #[error("point index {index} out of range for {points} points")]
    IndexOutOfRange { index: usize, points: usize },
    #[error(transparent)]
    Roundness(#[from] NegTypeError),
}

/// Two disjoint weighted point lists witnessing equality in the weighted
/// generalized roundness inequality at exponent `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalEquality {
    pub p: f64,
    /// `(point index, weight)` with weights summing to 1.
    pub a_side: Vec<(usize, f64)>,
    pub b_side: Vec<(usize, f64)>,
    /// `|LHS - RHS|` of the weighted inequality at `p`.
    pub residual: f64,
}

/// Residual scale for an equality: `n^2 * maxd^p * eps * 1e4`, accounting
/// for the accumulation of O(n^2) rounded terms.
pub fn polygonal_tolerance(x: &FiniteMetricSpace, p: f64) -> f64 {
    let n = x.n_points() as f64;
    n * n * distance_power(x.max_distance(), p) * f64::EPSILON * 1e4
}

fn weighted_margin(
    x: &FiniteMetricSpace,
    p: f64,
    a_side: &[(usize, f64)],
    b_side: &[(usize, f64)],
) -> f64 {
    let dp = |i: usize, j: usize| distance_power(x.dist(i, j), p);
    let mut lhs = 0.0;
    for (pos, &(i1, w1)) in a_side.iter().enumerate() {
        for &(i2, w2) in &a_side[pos + 1..] {
            lhs += w1 * w2 * dp(i1, i2);
        }
    }
    for (pos, &(i1, w1)) in b_side.iter().enumerate() {
        for &(i2, w2) in &b_side[pos + 1..] {
            lhs += w1 * w2 * dp(i1, i2);
        }
    }
    let mut rhs = 0.0;
    for &(j, m) in a_side {
        for &(i, w) in b_side {
            rhs += m * w * dp(j, i);
        }
    }
    lhs - rhs
}

/// Finds the polygonal equality of a finite non-ultrametric space at its
/// supremal exponent; `None` for ultrametric spaces.
///
/// The supremum from [`generalized_roundness`] is sharpened to the sign
/// change of the minimal eigenvalue, the kernel eigenvector is augmented by
/// the base entry `-(sum)`, entries below `1e-12` of its norm are dropped,
/// and the sign split yields the two sides, each normalized to total weight
/// one. The eigenvector sign is fixed so that the first retained entry is
/// positive.
pub fn find_polygonal_equality(
    x: &FiniteMetricSpace,
    tol: Option<f64>,
) -> Result<Option<PolygonalEquality>, PolygonalError> {
    if x.classify(None).is_ultrametric {
        return Ok(None);
    }
    let gr = generalized_roundness(x, &GrOptions::default())?;
    let (bracket_lo, bracket_hi) = gr.bracket.expect("finite value has a bracket");

    // Sharpen the crossover of the minimal eigenvalue to machine precision;
    // the bisection bracket is only bis_tol wide and its PSD endpoint may sit
    // past the true crossover by the spectral tolerance.
    let min_eig = |p: f64| gram_matrix(x, p, 0).min_eigenvalue();
    let mut lo = bracket_lo;
    let mut step = (bracket_hi - bracket_lo).max(1e-12);
    for _ in 0..40 {
        if min_eig(lo) >= 0.0 {
            break;
        }
        lo = (lo - step).max(0.5 * lo);
        step *= 2.0;
    }
    let p = if min_eig(lo) >= 0.0 {
        // the failing endpoint has a strictly negative minimal eigenvalue
        let mut hi = bracket_hi;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if min_eig(mid) < 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    } else {
        0.5 * (bracket_lo + bracket_hi)
    };

    let gram = gram_matrix(x, p, 0);
    let min_eigenvalue = gram.min_eigenvalue();
    let tau = tol.unwrap_or(DEFAULT_SPECTRAL_REL_TOL * gram.max_abs_eigenvalue());
    if min_eigenvalue.abs() > tau {
        return Err(PolygonalError::NoKernelVector {
            p,
            min_eigenvalue,
            tol: tau,
        });
    }

    let mut eta_star = gram.augmented(&gram.eigenvector(0));
    let norm = eta_star.iter().map(|v| v * v).sum::<f64>().sqrt();
    let drop_threshold = 1e-12 * norm;
    if let Some(first) = eta_star.iter().find(|v| v.abs() > drop_threshold) {
        if *first < 0.0 {
            eta_star.iter_mut().for_each(|v| *v = -*v);
        }
    }

    let mut a_side: Vec<(usize, f64)> = Vec::new();
    let mut b_side: Vec<(usize, f64)> = Vec::new();
    for (index, &value) in eta_star.iter().enumerate() {
        if value > drop_threshold {
            a_side.push((index, value));
        } else if value < -drop_threshold {
            b_side.push((index, -value));
        }
    }
    if a_side.is_empty() || b_side.is_empty() {
        return Err(PolygonalError::NoKernelVector {
            p,
            min_eigenvalue,
            tol: tau,
        });
    }
    let a_total: f64 = a_side.iter().map(|&(_, w)| w).sum();
    let b_total: f64 = b_side.iter().map(|&(_, w)| w).sum();
    a_side.iter_mut().for_each(|(_, w)| *w /= a_total);
    b_side.iter_mut().for_each(|(_, w)| *w /= b_total);

    let residual = weighted_margin(x, p, &a_side, &b_side).abs();
    Ok(Some(PolygonalEquality {
        p,
        a_side,
        b_side,
        residual,
    }))
}

/// Recomputes both sides of the weighted inequality for `equality` and
/// returns `|LHS - RHS|`, after checking indices, disjointness and weight
/// sums.
pub fn verify_polygonal_equality(
    x: &FiniteMetricSpace,
    equality: &PolygonalEquality,
) -> Result<f64, PolygonalError> {
    let n = x.n_points();
    let mut seen = vec![false; n];
    for &(index, weight) in equality.a_side.iter().chain(&equality.b_side) {
        if index >= n {
            return Err(PolygonalError::IndexOutOfRange { index, points: n });
        }
        if seen[index] {
            return Err(PolygonalError::IndexOverlap(index));
        }
        seen[index] = true;
        if weight <= 0.0 {
            return Err(PolygonalError::NonpositiveWeight { index, weight });
        }
    }
    for (side, list) in [("a", &equality.a_side), ("b", &equality.b_side)] {
        let sum: f64 = list.iter().map(|&(_, w)| w).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(PolygonalError::WeightSumInvalid { side, sum });
        }
    }
    Ok(weighted_margin(x, equality.p, &equality.a_side, &equality.b_side).abs())
}
