//! Negative type and generalized roundness.
//!
//! For an `n+1` point space with base point `x_0`, the matrix `A_p` with
//! entries `a_jk = (d^p(x_0,x_j) + d^p(x_0,x_k) - d^p(x_j,x_k)) / 2` is
//! positive definite exactly when the space has strict p-negative type, and
//! positive semi-definite exactly when it has p-negative type. The identity
//! `2 (eta' A_p eta) = -(eta*' D_p eta*)` ties the reduced quadratic form to
//! the full p-distance matrix `D_p`, where `eta*` prepends
//! `eta_0 = -(eta_1 + ... + eta_n)`.
//!
//! Generalized roundness is the supremum of the exponents with p-negative
//! type. The exponent set is a closed interval starting at 0, so the supremum
//! is found by doubling until positive semi-definiteness is lost and then
//! bisecting on the crossover.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::space::{distance_power, FiniteMetricSpace};

/// Relative spectral tolerance: eigenvalues within `1e-9 * max |eigenvalue|`
/// of zero are treated as zero.
pub const DEFAULT_SPECTRAL_REL_TOL: f64 = 1e-9;

/// The matrix of p-th powers of distances, `(n+1) x (n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PDistanceMatrix {
    p: f64,
    entries: DMatrix<f64>,
}

impl PDistanceMatrix {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// `v' D_p v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.size(), "vector length must match matrix size");
        let mut acc = 0.0;
        for i in 0..v.len() {
            for j in 0..v.len() {
                acc += self.entries[(i, j)] * v[i] * v[j];
            }
        }
        acc
    }
}

/// The base-point-centered Gram-form matrix `A_p`, `n x n` for an `n+1`
/// point space, with its eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    p: f64,
    base: usize,
    entries: DMatrix<f64>,
    /// Ascending.
    eigenvalues: Vec<f64>,
    /// Columns match `eigenvalues`.
    eigenvectors: DMatrix<f64>,
}

impl GramMatrix {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Eigenvalues sorted ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Eigenvector column for the i-th (ascending) eigenvalue.
    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i).iter().copied().collect()
    }

    /// `eta' A_p eta` over the reduced (non-base) coordinates.
    pub fn quadratic_form(&self, eta: &[f64]) -> f64 {
        assert_eq!(eta.len(), self.size(), "vector length must match matrix size");
        let mut acc = 0.0;
        for i in 0..eta.len() {
            for j in 0..eta.len() {
                acc += self.entries[(i, j)] * eta[i] * eta[j];
            }
        }
        acc
    }

    /// Lifts a reduced vector to the full point set by inserting
    /// `-(sum of entries)` at the base index, so the result sums to zero.
    pub fn augmented(&self, eta: &[f64]) -> Vec<f64> {
        assert_eq!(eta.len(), self.size(), "vector length must match matrix size");
        let sum: f64 = eta.iter().sum();
        let mut full = Vec::with_capacity(eta.len() + 1);
        full.extend_from_slice(&eta[..self.base]);
        full.push(-sum);
        full.extend_from_slice(&eta[self.base..]);
        full
    }
}

/// Tri-state outcome of the spectral p-negative type test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegTypeStatus {
    /// `A_p` positive definite: strict p-negative type.
    Strict,
    /// Minimal eigenvalue of `A_p` within tolerance of zero.
    Boundary,
    /// `A_p` has a clearly negative eigenvalue: no p-negative type.
    Fails,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegTypeResult {
    pub p: f64,
    pub status: NegTypeStatus,
    pub min_eigenvalue: f64,
    /// Eigenvector for the minimal eigenvalue, present for
    /// `Boundary` and `Fails`.
    pub certificate: Option<Vec<f64>>,
}

impl NegTypeResult {
    pub fn is_psd(&self) -> bool {
        self.status != NegTypeStatus::Fails
    }
}

/// `D_p` is numerically singular; carries the reciprocal condition estimate.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("p-distance matrix is numerically singular (rcond = {rcond:e})")]
pub struct SingularDistanceMatrix {
    pub rcond: f64,
}

/// How a generalized roundness value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrMethod {
    SpectralBisection,
    SanchezRoot,
    UltrametricShortcut,
}

impl GrMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            GrMethod::SpectralBisection => "spectral-bisection",
            GrMethod::SanchezRoot => "sanchez-root",
            GrMethod::UltrametricShortcut => "ultrametric-shortcut",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrValue {
    Finite(f64),
    Infinite,
}

impl GrValue {
    pub fn finite(&self) -> Option<f64> {
        match self {
            GrValue::Finite(v) => Some(*v),
            GrValue::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, GrValue::Infinite)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedRoundnessResult {
    pub value: GrValue,
    /// `[lo, hi]` with the positive semi-definite side at `lo` and the
    /// failing side at `hi`; absent when the value is infinite.
    pub bracket: Option<(f64, f64)>,
    pub methods: Vec<GrMethod>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrOptions {
    /// Cap for the doubling search.
    pub p_max: f64,
    /// Final bracket width.
    pub bis_tol: f64,
    /// Spectral tolerance override; relative default when `None`.
    pub spectral_tol: Option<f64>,
}

impl Default for GrOptions {
    fn default() -> Self {
        GrOptions {
            p_max: 64.0,
            bis_tol: 1e-9,
            spectral_tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NegTypeError {
    /// The doubling search hit the cap while the space still had p-negative
    /// type. Either the space is ultrametric beyond numeric resolution or a
    /// tolerance is off; the classification witnesses and the minimal
    /// eigenvalue at the cap are attached for diagnosis.
    #[error(
        "p-negative type persists at the cap p = {p_max} on a space not classified ultrametric \
         (min eigenvalue at cap = {min_eigenvalue_at_cap:e})"
    )]
    CapReachedNonUltrametric {
        p_max: f64,
        min_eigenvalue_at_cap: f64,
        ultra_witness: Option<(usize, usize, usize)>,
        additive_witness: Option<(usize, usize, usize, usize)>,
    },
}

/// A violating configuration of the generalized roundness inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct GrViolation {
    /// `(point index, weight)`; unweighted configurations carry weight 1 per
    /// occurrence.
    pub a_side: Vec<(usize, f64)>,
    pub b_side: Vec<(usize, f64)>,
    /// Left side minus right side of the violated inequality.
    pub margin: f64,
    /// True when the violation comes from the normalized weighted form.
    pub weighted: bool,
}

/// `D_p` for the whole point set, with the `0^0 := 0` convention on the
/// diagonal (so `D_0` is zero on the diagonal and one elsewhere).
pub fn p_distance_matrix(x: &FiniteMetricSpace, p: f64) -> PDistanceMatrix {
    assert!(p >= 0.0, "exponent must be nonnegative, got {p}");
    let n = x.n_points();
    PDistanceMatrix {
        p,
        entries: DMatrix::from_fn(n, n, |i, j| distance_power(x.dist(i, j), p)),
    }
}

/// `A_p` centered at `base`, eigendecomposed by a symmetric solver.
pub fn gram_matrix(x: &FiniteMetricSpace, p: f64, base: usize) -> GramMatrix {
    assert!(p >= 0.0, "exponent must be nonnegative, got {p}");
    let n = x.n_points();
    assert!(base < n, "base index {base} out of range for {n} points");
    let points: Vec<usize> = (0..n).filter(|&i| i != base).collect();
    let dp = |i: usize, j: usize| distance_power(x.dist(i, j), p);
    let entries = DMatrix::from_fn(n - 1, n - 1, |r, c| {
        let (j, k) = (points[r], points[c]);
        0.5 * (dp(base, j) + dp(base, k) - dp(j, k))
    });
    let decomp = entries.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n - 1).collect();
    order.sort_by(|&a, &b| decomp.eigenvalues[a].total_cmp(&decomp.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| decomp.eigenvalues[i]).collect();
    let eigenvectors =
        DMatrix::from_fn(n - 1, n - 1, |r, c| decomp.eigenvectors[(r, order[c])]);
    GramMatrix {
        p,
        base,
        entries,
        eigenvalues,
        eigenvectors,
    }
}

/// Spectral decision of (strict) p-negative type.
///
/// `Strict` iff `A_p` is positive definite, `Strict` or `Boundary` iff the
/// space has p-negative type. The status does not depend on the base point;
/// base 0 is used internally.
pub fn negative_type_status(x: &FiniteMetricSpace, p: f64, tol: Option<f64>) -> NegTypeResult {
    let gram = gram_matrix(x, p, 0);
    let tau = tol.unwrap_or(DEFAULT_SPECTRAL_REL_TOL * gram.max_abs_eigenvalue());
    let min_eigenvalue = gram.min_eigenvalue();
    let status = if min_eigenvalue > tau {
        NegTypeStatus::Strict
    } else if min_eigenvalue < -tau {
        NegTypeStatus::Fails
    } else {
        NegTypeStatus::Boundary
    };
    let certificate = (status != NegTypeStatus::Strict).then(|| gram.eigenvector(0));
    NegTypeResult {
        p,
        status,
        min_eigenvalue,
        certificate,
    }
}

/// Solves `D_p b = 1` and returns `<b, 1>`.
///
/// The solve goes through the spectral factorization of the symmetric
/// indefinite matrix `D_p`; the reciprocal condition is the ratio of extreme
/// absolute eigenvalues and values below `1e-12` are reported as singular.
pub fn sanchez_invariant(
    x: &FiniteMetricSpace,
    p: f64,
) -> Result<f64, SingularDistanceMatrix> {
    let dp = p_distance_matrix(x, p);
    let decomp = dp.entries.clone().symmetric_eigen();
    let max_abs = decomp.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let min_abs = decomp
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, v| a.min(v.abs()));
    let rcond = if max_abs > 0.0 { min_abs / max_abs } else { 0.0 };
    if rcond < 1e-12 {
        return Err(SingularDistanceMatrix { rcond });
    }
    let ones = DVector::from_element(dp.size(), 1.0);
    let value = (0..dp.size())
        .map(|i| {
            let proj = decomp.eigenvectors.column(i).dot(&ones);
            proj * proj / decomp.eigenvalues[i]
        })
        .sum();
    Ok(value)
}

/// Generalized roundness by classification shortcut or bracketed bisection.
///
/// Ultrametric spaces are reported infinite directly. Otherwise distances
/// are normalized by the maximum (which changes no status), p doubles from 1
/// until positive semi-definiteness is lost, and the crossover is bisected to
/// `bis_tol`. Where `D_p` is well conditioned near the root, a sign change of
/// the Sanchez invariant across the root is recorded as an extra method tag.
pub fn generalized_roundness(
    x: &FiniteMetricSpace,
    opts: &GrOptions,
) -> Result<GeneralizedRoundnessResult, NegTypeError> {
    let report = x.classify(None);
    if report.is_ultrametric {
        return Ok(GeneralizedRoundnessResult {
            value: GrValue::Infinite,
            bracket: None,
            methods: vec![GrMethod::UltrametricShortcut],
        });
    }

    let normalized = x.scaled(1.0 / x.max_distance());
    let probe = |p: f64| negative_type_status(&normalized, p, opts.spectral_tol);

    let (mut lo, mut hi);
    if probe(1.0).is_psd() {
        lo = 1.0;
        hi = 2.0;
        loop {
            if hi >= opts.p_max {
                let cap = probe(opts.p_max);
                if cap.is_psd() {
                    return Err(NegTypeError::CapReachedNonUltrametric {
                        p_max: opts.p_max,
                        min_eigenvalue_at_cap: cap.min_eigenvalue,
                        ultra_witness: report.ultra_witness,
                        additive_witness: report.additive_witness,
                    });
                }
                hi = opts.p_max;
                break;
            }
            if !probe(hi).is_psd() {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
    } else {
        // Below-1 supremum: halve down to a PSD exponent, which exists for
        // every finite metric space by the dimension floor.
        hi = 1.0;
        lo = 0.5;
        while !probe(lo).is_psd() {
            hi = lo;
            lo *= 0.5;
            assert!(
                lo > f64::MIN_POSITIVE,
                "no positive semi-definite exponent found above {lo:e}"
            );
        }
    }

    while hi - lo > opts.bis_tol {
        let mid = 0.5 * (lo + hi);
        if probe(mid).is_psd() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let value = 0.5 * (lo + hi);

    let mut methods = vec![GrMethod::SpectralBisection];
    let delta = 10.0 * opts.bis_tol;
    if let (Ok(before), Ok(after)) = (
        sanchez_invariant(&normalized, value - delta),
        sanchez_invariant(&normalized, value + delta),
    ) {
        if before != 0.0 && after != 0.0 && before.signum() != after.signum() {
            methods.push(GrMethod::SanchezRoot);
        }
    }

    Ok(GeneralizedRoundnessResult {
        value: GrValue::Finite(value),
        bracket: Some((lo, hi)),
        methods,
    })
}

/// Searches for a violation of the generalized roundness inequality at `p`.
///
/// Exhausts unweighted configurations of up to `max_size` points per side
/// drawn with repetition (configurations sharing a point across sides cancel
/// and are skipped), then tries `trials` random weighted configurations over
/// distinct points. Returns the worst margin found, or `None`; absence of a
/// violation is evidence, not proof.
pub fn gr_violation_search(
    x: &FiniteMetricSpace,
    p: f64,
    max_size: usize,
    trials: usize,
    seed: u64,
) -> Option<GrViolation> {
    assert!(p >= 0.0, "exponent must be nonnegative, got {p}");
    assert!(max_size >= 1, "max_size must be at least 1");
    let n = x.n_points();
    let dp = |i: usize, j: usize| distance_power(x.dist(i, j), p);
    let mut worst: Option<GrViolation> = None;

    let mut consider = |cand: GrViolation| {
        if worst.as_ref().is_none_or(|w| cand.margin > w.margin) {
            worst = Some(cand);
        }
    };

    for m in 1..=max_size {
        for a in (0..n).combinations_with_replacement(m) {
            for b in (0..n).combinations_with_replacement(m) {
                if a.iter().any(|i| b.contains(i)) {
                    continue;
                }
                let mut lhs = 0.0;
                for k in 0..m {
                    for l in k + 1..m {
                        lhs += dp(a[k], a[l]) + dp(b[k], b[l]);
                    }
                }
                let mut rhs = 0.0;
                for &aj in &a {
                    for &bi in &b {
                        rhs += dp(aj, bi);
                    }
                }
                let margin = lhs - rhs;
                if margin > 1e-12 * (lhs.abs() + rhs.abs() + 1.0) {
                    consider(GrViolation {
                        a_side: a.iter().map(|&i| (i, 1.0)).collect(),
                        b_side: b.iter().map(|&i| (i, 1.0)).collect(),
                        margin,
                        weighted: false,
                    });
                }
            }
        }
    }

    // Weighted trials: random disjoint supports with random weights, each
    // improved by mirror ascent on the two weight simplices. Ascent keeps
    // weights strictly positive and the sums at one.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side_cap = max_size.min(n.saturating_sub(1)).max(1);
    let gain = 1.0 / distance_power(x.max_distance(), p).max(f64::MIN_POSITIVE);
    for _ in 0..trials {
        let s = rng.random_range(1..=side_cap);
        let t = rng.random_range(1..=side_cap.min(n - s));
        let mut indices: Vec<usize> = (0..n).collect();
        for i in 0..(s + t) {
            let j = rng.random_range(i..n);
            indices.swap(i, j);
        }
        let a = &indices[..s];
        let b = &indices[s..s + t];
        let mut wa: Vec<f64> = (0..s).map(|_| rng.random_range(0.05..1.0)).collect();
        let mut wb: Vec<f64> = (0..t).map(|_| rng.random_range(0.05..1.0)).collect();
        normalize(&mut wa);
        normalize(&mut wb);

        for _ in 0..60 {
            let grad_a: Vec<f64> = (0..s)
                .map(|j| {
                    let within: f64 = (0..s)
                        .filter(|&j2| j2 != j)
                        .map(|j2| wa[j2] * dp(a[j], a[j2]))
                        .sum();
                    let across: f64 = (0..t).map(|i| wb[i] * dp(a[j], b[i])).sum();
                    within - across
                })
                .collect();
            let grad_b: Vec<f64> = (0..t)
                .map(|i| {
                    let within: f64 = (0..t)
                        .filter(|&i2| i2 != i)
                        .map(|i2| wb[i2] * dp(b[i], b[i2]))
                        .sum();
                    let across: f64 = (0..s).map(|j| wa[j] * dp(a[j], b[i])).sum();
                    within - across
                })
                .collect();
            for (w, g) in wa.iter_mut().zip(&grad_a) {
                *w *= (gain * g).clamp(-30.0, 30.0).exp();
            }
            for (w, g) in wb.iter_mut().zip(&grad_b) {
                *w *= (gain * g).clamp(-30.0, 30.0).exp();
            }
            normalize(&mut wa);
            normalize(&mut wb);
        }

        let mut lhs = 0.0;
        for j1 in 0..s {
            for j2 in j1 + 1..s {
                lhs += wa[j1] * wa[j2] * dp(a[j1], a[j2]);
            }
        }
        for i1 in 0..t {
            for i2 in i1 + 1..t {
                lhs += wb[i1] * wb[i2] * dp(b[i1], b[i2]);
            }
        }
        let mut rhs = 0.0;
        for j in 0..s {
            for i in 0..t {
                rhs += wa[j] * wb[i] * dp(a[j], b[i]);
            }
        }
        let margin = lhs - rhs;
        if margin > 1e-12 * (lhs.abs() + rhs.abs() + 1.0) {
            consider(GrViolation {
                a_side: a.iter().copied().zip(wa.iter().copied()).collect(),
                b_side: b.iter().copied().zip(wb.iter().copied()).collect(),
                margin,
                weighted: true,
            });
        }
    }

    worst
}

fn normalize(weights: &mut [f64]) {
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
}

/// Dimension floor `log2(1 + 1/n)`: every `n+1` point metric space has
/// p-negative type for every `p` up to this value.
pub fn deza_maehara_floor(n: usize) -> f64 {
    assert!(n >= 2, "floor defined for n >= 2, got {n}");
    (1.0 + 1.0 / n as f64).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{make_lbk, random_ultrametric};
    use approx::assert_relative_eq;

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

    #[test]
    fn two_point_p_distance_matrix() {
        let x = space(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let d = p_distance_matrix(&x, 3.0);
        assert_eq!(d.entries()[(0, 1)], 1.0);
        assert_eq!(d.entries()[(0, 0)], 0.0);
    }

    #[test]
    fn p_zero_distance_matrix_is_ones_off_diagonal() {
        let x = space(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.5],
            vec![1.0, 1.5, 0.0],
        ]);
        let d = p_distance_matrix(&x, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d.entries()[(i, j)], if i == j { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn star_leaf_squared_distances() {
        let x = make_lbk(3.0, 2).unwrap();
        let d = p_distance_matrix(&x, 2.0);
        assert_eq!(d.entries()[(0, 1)], 1.0);
        assert_eq!(d.entries()[(0, 2)], 1.0);
        assert_relative_eq!(d.entries()[(1, 2)], 2.25, max_relative = 1e-15);
    }

    #[test]
    fn equilateral_gram_at_p_two() {
        let x = space(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ]);
        let g = gram_matrix(&x, 2.0, 0);
        assert_relative_eq!(g.entries()[(0, 0)], 1.0);
        assert_relative_eq!(g.entries()[(0, 1)], 0.5);
        assert_relative_eq!(g.eigenvalues()[0], 0.5, max_relative = 1e-12);
        assert_relative_eq!(g.eigenvalues()[1], 1.5, max_relative = 1e-12);
    }

    #[test]
    fn collinear_gram_is_rank_one() {
        let x = space(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ]);
        let g = gram_matrix(&x, 2.0, 0);
        assert_relative_eq!(g.entries()[(0, 1)], 2.0);
        assert_relative_eq!(g.entries()[(1, 1)], 4.0);
        assert!(g.eigenvalues()[0].abs() < 1e-12);
        assert_relative_eq!(g.eigenvalues()[1], 5.0, max_relative = 1e-12);
    }

    #[test]
    fn gram_at_p_zero_is_half_plus_half_identity() {
        let x = unit_four_cycle();
        let g = gram_matrix(&x, 0.0, 0);
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(g.entries()[(r, c)], if r == c { 1.0 } else { 0.5 });
            }
        }
    }

    #[test]
    fn gram_trace_matches_base_distances() {
        let x = make_lbk(3.0, 2).unwrap();
        for p in [0.0, 0.7, 2.0, 3.3] {
            let g = gram_matrix(&x, p, 1);
            let trace: f64 = (0..g.size()).map(|i| g.entries()[(i, i)]).sum();
            let expected: f64 = (0..x.n_points())
                .filter(|&j| j != 1)
                .map(|j| distance_power(x.dist(1, j), p))
                .sum();
            assert_relative_eq!(trace, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn four_cycle_status_by_exponent() {
        let x = unit_four_cycle();
        let at_one = negative_type_status(&x, 1.0, None);
        assert_eq!(at_one.status, NegTypeStatus::Boundary);
        assert!(at_one.min_eigenvalue.abs() < 1e-12);
        // kernel vector is the difference of the two diagonals
        let cert = at_one.certificate.unwrap();
        let scaled: Vec<f64> = cert.iter().map(|v| v / cert[0]).collect();
        assert_relative_eq!(scaled[0], 1.0, max_relative = 1e-9);
        assert_relative_eq!(scaled[1], -1.0, max_relative = 1e-9);
        assert_relative_eq!(scaled[2], 1.0, max_relative = 1e-9);

        let at_two = negative_type_status(&x, 2.0, None);
        assert_eq!(at_two.status, NegTypeStatus::Fails);
        // oracle eigenvalue of A_2: 2 - 2*sqrt(3)
        assert_relative_eq!(
            at_two.min_eigenvalue,
            2.0 - 2.0 * 3.0_f64.sqrt(),
            max_relative = 1e-12
        );

        assert_eq!(
            negative_type_status(&x, 1.1, None).status,
            NegTypeStatus::Fails
        );
    }

    #[test]
    fn ultrametrics_are_strict_across_exponents() {
        let x = random_ultrametric(10, 42, None);
        for p in [0.5, 1.0, 2.0, 4.0, 8.0] {
            assert_eq!(
                negative_type_status(&x, p, None).status,
                NegTypeStatus::Strict,
                "p = {p}"
            );
        }
    }

    #[test]
    fn sanchez_invariant_on_star_leaf_family() {
        // closed form 2 - ((k-1)/k) z^p
        for (b, k) in [(3.0, 2usize), (2.0, 3), (1.5, 5), (9.0, 2)] {
            let x = make_lbk(b, k).unwrap();
            let z = 2.0 * b / (b + 1.0);
            for p in [0.0, 1.0, 2.0, 3.0] {
                let expected = 2.0 - ((k - 1) as f64 / k as f64) * z.powf(p);
                let got = sanchez_invariant(&x, p).unwrap();
                assert!(
                    (got - expected).abs() <= 1e-9,
                    "b={b} k={k} p={p}: {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn sanchez_invariant_of_two_point_space() {
        let x = space(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        for p in [0.0, 1.0, 2.5, 7.0] {
            assert_relative_eq!(sanchez_invariant(&x, p).unwrap(), 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn sanchez_root_of_l32_matches_closed_form() {
        let x = make_lbk(3.0, 2).unwrap();
        // root of 2 - z^p/2 at z = 1.5: p = log_1.5(4)
        let root = 4.0_f64.ln() / 1.5_f64.ln();
        let below = sanchez_invariant(&x, root - 1e-3).unwrap();
        let above = sanchez_invariant(&x, root + 1e-3).unwrap();
        assert!(below > 0.0 && above < 0.0);
    }

    #[test]
    fn four_cycle_distance_matrix_is_singular_at_the_crossover() {
        let x = unit_four_cycle();
        let err = sanchez_invariant(&x, 1.0).unwrap_err();
        assert!(err.rcond < 1e-12);
    }

    #[test]
    fn generalized_roundness_of_star_leaf_space() {
        let x = make_lbk(3.0, 2).unwrap();
        let result = generalized_roundness(&x, &GrOptions::default()).unwrap();
        let value = result.value.finite().unwrap();
        // closed form log_1.5(4), oracle 3.4190225827029095
        assert!((value - 3.419_022_582_702_909_5).abs() < 1e-6);
        let (lo, hi) = result.bracket.unwrap();
        assert!(hi - lo <= 1e-9);
        assert!(negative_type_status(&x, lo, None).is_psd());
        assert_eq!(
            negative_type_status(&x, hi, None).status,
            NegTypeStatus::Fails
        );
        assert!(result.methods.contains(&GrMethod::SpectralBisection));
    }

    #[test]
    fn generalized_roundness_of_four_cycle_is_one() {
        let x = unit_four_cycle();
        let result = generalized_roundness(&x, &GrOptions::default()).unwrap();
        assert!((result.value.finite().unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn generalized_roundness_of_ultrametric_is_infinite() {
        let x = random_ultrametric(9, 7, None);
        let result = generalized_roundness(&x, &GrOptions::default()).unwrap();
        assert!(result.value.is_infinite());
        assert_eq!(result.bracket, None);
        assert_eq!(result.methods, vec![GrMethod::UltrametricShortcut]);
    }

    #[test]
    fn violation_search_on_four_cycle() {
        let x = unit_four_cycle();
        // diagonals against diagonals, margin 2 * 2^1.05 - 4
        let hit = gr_violation_search(&x, 1.05, 2, 0, 1).unwrap();
        assert_relative_eq!(
            hit.margin,
            2.0 * 2.0_f64.powf(1.05) - 4.0,
            max_relative = 1e-12
        );
        let points = |side: &[(usize, f64)]| side.iter().map(|&(i, _)| i).collect::<Vec<_>>();
        assert_eq!(points(&hit.a_side), vec![0, 2]);
        assert_eq!(points(&hit.b_side), vec![1, 3]);

        // with repetition allowed the doubled configuration is worse
        let worst = gr_violation_search(&x, 1.05, 4, 0, 1).unwrap();
        assert_relative_eq!(
            worst.margin,
            8.0 * 2.0_f64.powf(1.05) - 16.0,
            max_relative = 1e-12
        );

        assert!(gr_violation_search(&x, 0.95, 4, 200, 1).is_none());
    }

    #[test]
    fn no_violation_at_p_zero() {
        let x = make_lbk(2.0, 3).unwrap();
        assert!(gr_violation_search(&x, 0.0, 3, 200, 5).is_none());
    }

    #[test]
    fn dimension_floor_values() {
        assert_relative_eq!(deza_maehara_floor(2), 0.584_962_500_721_156_2);
        assert_relative_eq!(deza_maehara_floor(3), 0.415_037_499_278_843_76);
        assert!(deza_maehara_floor(10) < deza_maehara_floor(9));
        assert!(deza_maehara_floor(1000) > 0.0);
    }

    #[test]
    fn quadratic_form_identity_on_a_sample() {
        let x = make_lbk(3.0, 2).unwrap();
        let p = 1.7;
        let gram = gram_matrix(&x, p, 0);
        let dist = p_distance_matrix(&x, p);
        let eta = [0.3, -1.2];
        let lhs = 2.0 * gram.quadratic_form(&eta);
        let rhs = -dist.quadratic_form(&gram.augmented(&eta));
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }
}
