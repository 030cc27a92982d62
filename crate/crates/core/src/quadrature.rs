//! Composite Gauss–Legendre quadrature on `[0, t_max]` for matrix-valued
//! integrands that decay exponentially, with a panel-doubling convergence test.
//!
//! Panels are graded geometrically towards `t = 0`: boundaries are
//! `0, t_max·2^{-G}, …, t_max` with `P - 1` equal ratios, so integrands
//! `e^{-ct}` are resolved for every rate `c` up to `2^G / t_max` at once.
//! Doubling `P` halves the log-width of every panel.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Points per panel.
pub const RULE_ORDER: usize = 32;

/// log2 of `t_max` over the width of the first panel.
const GRADING_OCTAVES: f64 = 44.0;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let n = order;
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        for i in 0..n.div_ceil(2) {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = T::of(guess);
            let mut deriv = T::one();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                deriv = dp;
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= T::epsilon() * T::of(4.0) {
                    let (_, dp) = legendre(n, x);
                    deriv = dp;
                    break;
                }
            }
            let w = T::of(2.0) / ((T::one() - x * x) * deriv * deriv);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p_prev = T::one();
    let mut p = x;
    for k in 2..=n {
        let kf = T::from_usize(k);
        let next = (T::from_usize(2 * k - 1) * x * p - T::from_usize(k - 1) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let dp = T::from_usize(n) * (x * p - p_prev) / (x * x - T::one());
    (p, dp)
}

/// Panel boundaries for `panels >= 2` graded panels on `[0, t_max]`.
pub fn graded_boundaries<T: Scalar>(t_max: T, panels: usize) -> Vec<T> {
    assert!(panels >= 2, "graded mesh needs at least two panels");
    let mut b = Vec::with_capacity(panels + 1);
    b.push(T::zero());
    let steps = (panels - 1) as f64;
    for i in 1..=panels {
        let octaves = GRADING_OCTAVES * (panels - i) as f64 / steps;
        if i == panels {
            b.push(t_max);
        } else {
            b.push(t_max * T::of((-octaves).exp2()));
        }
    }
    b
}

/// Integrates `f` over `[0, t_max]` with the given number of graded panels.
pub fn integrate_matrix<T: Scalar>(
    rule: &GaussLegendre<T>,
    t_max: T,
    panels: usize,
    f: &mut impl FnMut(T) -> Matrix<T>,
) -> Matrix<T> {
    let bounds = graded_boundaries(t_max, panels);
    let half = T::of(0.5);
    let mut acc: Option<Matrix<T>> = None;
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = (lo + hi) * half;
        let radius = (hi - lo) * half;
        for (&x, &wt) in rule.nodes().iter().zip(rule.weights()) {
            let value = f(mid + radius * x).scale(wt * radius);
            acc = Some(match acc {
                Some(a) => a.add(&value),
                None => value,
            });
        }
    }
    acc.expect("at least one panel")
}

/// Result of a converged doubling run.
#[derive(Clone, Debug)]
pub struct QuadratureResult<T> {
    pub value: Matrix<T>,
    /// Max-abs change between the last two panel counts.
    pub change: T,
    /// Panel count of `value`.
    pub panels: usize,
}

/// Evaluates with `panels`, `2·panels`, … up to `max_panels` until the
/// max-abs change drops to `rel_tol · max|value|`. Fails if the change never
/// does, or if `truncation_bound` (the neglected tail beyond `t_max`)
/// already exceeds that tolerance.
pub fn integrate_doubling<T: Scalar>(
    t_max: T,
    panels: usize,
    max_panels: usize,
    rel_tol: T,
    truncation_bound: T,
    mut f: impl FnMut(T) -> Matrix<T>,
) -> Result<QuadratureResult<T>> {
    if !t_max.is_positive() || !t_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "t_max must be positive, got {}",
            t_max.to_decimal()
        )));
    }
    if panels < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 panels, got {panels}"
        )));
    }
    let rule = GaussLegendre::new(RULE_ORDER);
    let mut p = panels;
    let mut coarse = integrate_matrix(&rule, t_max, p, &mut f);
    loop {
        let fine = integrate_matrix(&rule, t_max, 2 * p, &mut f);
        let change = fine.max_abs_diff(&coarse);
        let tol = rel_tol * fine.max_abs();
        if truncation_bound > tol {
            return Err(Error::QuadratureNotConverged {
                change: change.as_f64(),
                truncation_bound: truncation_bound.as_f64(),
                panels: 2 * p,
            });
        }
        if change <= tol {
            return Ok(QuadratureResult {
                value: fine,
                change,
                panels: 2 * p,
            });
        }
        if 4 * p > max_panels {
            return Err(Error::QuadratureNotConverged {
                change: change.as_f64(),
                truncation_bound: truncation_bound.as_f64(),
                panels: 2 * p,
            });
        }
        p *= 2;
        coarse = fine;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::<f64>::new(RULE_ORDER);
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // ∫ x^62 over [-1, 1] = 2/63
        let m: f64 = rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .map(|(x, w)| w * x.powi(62))
            .sum();
        assert!((m - 2.0 / 63.0).abs() < 1e-15);
    }

    #[test]
    fn dd_rule_weights_sum_to_two() {
        let rule = GaussLegendre::<DoubleDouble>::new(RULE_ORDER);
        let total: DoubleDouble = rule.weights().iter().copied().sum();
        assert!((total - DoubleDouble::from_f64(2.0)).abs().to_f64() < 1e-29);
    }

    #[test]
    fn boundaries_are_graded_and_end_at_t_max() {
        let b = graded_boundaries(50.0f64, 64);
        assert_eq!(b.len(), 65);
        assert_eq!(b[0], 0.0);
        assert_eq!(b[64], 50.0);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert!((b[1] / 50.0 - (-44f64).exp2()).abs() < 1e-20);
    }

    #[test]
    fn scalar_exponential_integral() {
        let r = integrate_doubling(50.0f64, 64, 4096, 1e-13, 0.0, |t| {
            Matrix::from_diagonal(&[(-2.0 * t).exp()])
        })
        .unwrap();
        assert!((r.value[(0, 0)] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_arguments() {
        let f = |_t: f64| Matrix::identity(1);
        assert!(integrate_doubling(0.0, 64, 128, 1e-12, 0.0, f).is_err());
        assert!(integrate_doubling(1.0, 1, 128, 1e-12, 0.0, f).is_err());
    }
}
