//! The displacement equation `XY + YX = K` for symmetric positive definite
//! `X`: a closed-form solver in the eigenbasis of `X`, and the integral
//! `Y = ∫₀^∞ e^{−tX} K e^{−tX} dt` evaluated by quadrature as an independent
//! oracle.

use crate::cauchy::cholesky_check;
use crate::eig::jacobi;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::quadrature::integrate_doubling;
use crate::scalar::Scalar;

/// Panel count the integral oracle starts doubling from.
pub const DEFAULT_PANELS: usize = 64;
/// Panel count at which the integral oracle gives up.
pub const MAX_PANELS: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovProblem<T> {
    x: Matrix<T>,
    k: Matrix<T>,
}

impl<T: Scalar> LyapunovProblem<T> {
    /// Checks that `x` is square, symmetric to `4ε` relative to its largest
    /// entry and positive definite (by Cholesky), and that `k` matches it.
    /// `x` is stored exactly symmetrized.
    pub fn new(x: Matrix<T>, k: Matrix<T>) -> Result<Self> {
        let n = x.rows();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if x.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.cols(),
            });
        }
        if k.rows() != n || k.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if k.rows() != n { k.rows() } else { k.cols() },
            });
        }
        for (m, offset) in [(&x, 0), (&k, n * n)] {
            if let Some(i) = (0..n * n).find(|&i| !m[(i / n, i % n)].is_finite()) {
                return Err(Error::NonFiniteValue { index: offset + i });
            }
        }
        let limit = T::of(4.0) * T::epsilon() * x.max_abs();
        if x.max_asymmetry() > limit {
            return Err(Error::InvalidArgument(format!(
                "X is not symmetric (asymmetry {})",
                x.max_asymmetry().to_decimal()
            )));
        }
        let x = x.symmetrized();
        cholesky_check(&x)?;
        Ok(Self { x, k })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn x(&self) -> &Matrix<T> {
        &self.x
    }

    pub fn k(&self) -> &Matrix<T> {
        &self.k
    }

    /// `40 / λ_min(X)`, enough for the neglected tail `e^{−80}` to sit far
    /// below double-double precision.
    pub fn default_t_max(&self) -> Result<T> {
        let (values, _) = eigen(&self.x)?;
        Ok(T::of(40.0) / values[0])
    }
}

fn eigen<T: Scalar>(x: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    let out = jacobi(x)?;
    Ok((out.values, out.vectors))
}

/// `XY + YX − K`.
pub fn residual_matrix<T: Scalar>(prob: &LyapunovProblem<T>, y: &Matrix<T>) -> Matrix<T> {
    let x = &prob.x;
    x.matmul(y).add(&y.matmul(x)).sub(&prob.k)
}

/// `‖XY + YX − K‖_maxabs`.
pub fn residual<T: Scalar>(prob: &LyapunovProblem<T>, y: &Matrix<T>) -> T {
    residual_matrix(prob, y).max_abs()
}

/// Residual bound for a solution computed in working precision:
/// `32·N·ε·(2‖X‖_F‖Y‖_F + ‖K‖_F)`.
pub fn residual_tolerance<T: Scalar>(prob: &LyapunovProblem<T>, y: &Matrix<T>) -> T {
    let n = T::from_usize(prob.n());
    let scale = T::of(2.0) * prob.x.frobenius() * y.frobenius() + prob.k.frobenius();
    T::of(32.0) * n * T::epsilon() * scale
}

/// `Ok(residual)` if `y` meets [`residual_tolerance`], `ResidualTooLarge`
/// otherwise.
pub fn check_residual<T: Scalar>(prob: &LyapunovProblem<T>, y: &Matrix<T>) -> Result<T> {
    let r = residual(prob, y);
    let tol = residual_tolerance(prob, y);
    if r <= tol {
        Ok(r)
    } else {
        Err(Error::ResidualTooLarge {
            residual: r.as_f64(),
            tolerance: tol.as_f64(),
        })
    }
}

/// Solves with `X = VΛVᵀ`: `Ỹ_jk = (VᵀKV)_jk / (λ_j + λ_k)`, `Y = VỸVᵀ`.
///
/// Aborts with `ResidualTooLarge` instead of dividing when some
/// `λ_j + λ_k < ε·λ_max`, and when the computed `Y` misses the residual
/// tolerance. `Y` is exactly symmetric whenever `K` is.
pub fn solve_eigenbasis<T: Scalar>(prob: &LyapunovProblem<T>) -> Result<Matrix<T>> {
    let n = prob.n();
    let (lambda, v) = eigen(&prob.x)?;
    let floor = T::epsilon() * lambda[n - 1];
    let kt = v.transpose().matmul(&prob.k).matmul(&v);
    let mut yt = Matrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let d = lambda[j] + lambda[k];
            if d < floor {
                return Err(Error::ResidualTooLarge {
                    residual: f64::INFINITY,
                    tolerance: floor.as_f64(),
                });
            }
            yt[(j, k)] = kt[(j, k)] / d;
        }
    }
    let mut y = v.matmul(&yt).matmul(&v.transpose());
    if prob.k.is_exactly_symmetric() {
        y = y.symmetrized();
    }
    check_residual(prob, &y)?;
    Ok(y)
}

/// Output of the integral oracle.
#[derive(Clone, Debug)]
pub struct IntegralSolution<T> {
    pub y: Matrix<T>,
    /// `‖K‖_F·e^{−2λ_min t_max}/(2λ_min)`, a bound on the neglected tail.
    pub truncation_bound: T,
    /// Panel count of the accepted evaluation.
    pub panels: usize,
    /// Max-abs change over the last doubling.
    pub change: T,
}

/// Evaluates `∫₀^{t_max} e^{−tX} K e^{−tX} dt` by graded composite
/// Gauss–Legendre, doubling from `panels` up to [`MAX_PANELS`].
///
/// `e^{−tX}` is formed from the eigendecomposition of `X`. Fails with
/// `QuadratureNotConverged` if the doubling test does not pass at `1e3·ε`
/// relative or if the truncation bound alone exceeds that.
pub fn solve_integral<T: Scalar>(
    prob: &LyapunovProblem<T>,
    t_max: T,
    panels: usize,
) -> Result<IntegralSolution<T>> {
    let n = prob.n();
    let (lambda, v) = eigen(&prob.x)?;
    let lambda_min = lambda[0];
    let two = T::of(2.0);
    let truncation_bound =
        prob.k.frobenius() * (-two * lambda_min * t_max).exp() / (two * lambda_min);
    let symmetric = prob.k.is_exactly_symmetric();
    let vt = v.transpose();
    let rel_tol = T::of(1e3) * T::epsilon();
    let max_panels = MAX_PANELS.max(panels);
    let result = integrate_doubling(t_max, panels, max_panels, rel_tol, truncation_bound, |t| {
        let decay: Vec<T> = lambda.iter().map(|&l| (-l * t).exp()).collect();
        let scaled = Matrix::from_fn(n, n, |r, c| v[(r, c)] * decay[c]);
        let e = scaled.matmul(&vt).symmetrized();
        let m = e.matmul(&prob.k).matmul(&e);
        if symmetric {
            m.symmetrized()
        } else {
            m
        }
    })?;
    Ok(IntegralSolution {
        y: result.value,
        truncation_bound,
        panels: result.panels,
        change: result.change,
    })
}

/// `‖y1 − y2‖_maxabs`. The solution is unique, so this is at rounding level
/// whenever both inputs solve the problem.
pub fn uniqueness_probe<T: Scalar>(
    _prob: &LyapunovProblem<T>,
    y1: &Matrix<T>,
    y2: &Matrix<T>,
) -> T {
    y1.max_abs_diff(y2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy::build_cauchy;
    use crate::dd::DoubleDouble;
    use crate::pair::{weight_vector, SpectralPair};
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> Matrix<f64> {
        Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn diag12_ones() -> LyapunovProblem<f64> {
        LyapunovProblem::new(
            Matrix::from_diagonal(&[1.0, 2.0]),
            m(&[&[1.0, 1.0], &[1.0, 1.0]]),
        )
        .unwrap()
    }

    #[test]
    fn identity_halves_k() {
        let k = m(&[&[3.0, -1.0, 2.0], &[0.5, 4.0, 1.0], &[7.0, 0.0, -2.0]]);
        let prob = LyapunovProblem::new(Matrix::identity(3), k.clone()).unwrap();
        let y = solve_eigenbasis(&prob).unwrap();
        assert_eq!(y, k.scale(0.5));
    }

    #[test]
    fn diagonal_ones_gives_cauchy() {
        let y = solve_eigenbasis(&diag12_ones()).unwrap();
        assert_eq!(
            y.to_rows(),
            vec![vec![0.5, 1.0 / 3.0], vec![1.0 / 3.0, 0.25]]
        );
    }

    #[test]
    fn recovers_forward_solution() {
        let x = Matrix::from_diagonal(&[1.0, 2.0]);
        let mm = m(&[&[1.0, 2.0], &[2.0, 5.0]]);
        let k = x.matmul(&mm).add(&mm.matmul(&x));
        let y = solve_eigenbasis(&LyapunovProblem::new(x, k).unwrap()).unwrap();
        assert!(y.max_abs_diff(&mm) < 1e-15);
    }

    #[test]
    fn integral_examples() {
        let prob = LyapunovProblem::new(Matrix::identity(2), Matrix::identity(2)).unwrap();
        let s = solve_integral(&prob, 40.0, DEFAULT_PANELS).unwrap();
        assert!(s.y.max_abs_diff(&Matrix::identity(2).scale(0.5)) < 1e-12);

        let prob = diag12_ones();
        let s = solve_integral(&prob, 40.0, DEFAULT_PANELS).unwrap();
        let y = solve_eigenbasis(&prob).unwrap();
        assert!(uniqueness_probe(&prob, &y, &s.y) < 1e-10);
        assert!(uniqueness_probe(&prob, &y, &y) == 0.0);
    }

    #[test]
    fn short_horizon_fails_with_bound() {
        let err = solve_integral(&diag12_ones(), 1.0, DEFAULT_PANELS).unwrap_err();
        match err {
            Error::QuadratureNotConverged {
                truncation_bound, ..
            } => {
                // ‖ones‖_F·e^{−2}/2
                let want = 2.0 * (-2.0f64).exp() / 2.0;
                assert!((truncation_bound - want).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn perturbed_solution_breaks_residual() {
        let prob = diag12_ones();
        let y1 = solve_eigenbasis(&prob).unwrap();
        let p = m(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let y2 = y1.add(&p.scale(1e-3));
        assert!((uniqueness_probe(&prob, &y1, &y2) - 1e-3).abs() < 1e-15);
        // X·P + P·X = diag(2, 0)
        assert!((residual(&prob, &y2) - 2e-3).abs() < 1e-15);
        assert!(matches!(
            check_residual(&prob, &y2),
            Err(Error::ResidualTooLarge { .. })
        ));
    }

    #[test]
    fn validation() {
        let k = Matrix::identity(2);
        let singular = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(
            LyapunovProblem::new(singular, k.clone()),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let zero_eig = Matrix::from_diagonal(&[1.0, 0.0]);
        assert!(matches!(
            LyapunovProblem::new(zero_eig, k.clone()),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let asym = m(&[&[2.0, 1.0], &[0.0, 2.0]]);
        assert!(LyapunovProblem::new(asym, k.clone()).is_err());
        assert!(matches!(
            LyapunovProblem::new(Matrix::identity(3), k),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rank_one_reproduces_cauchy() {
        let p =
            SpectralPair::<f64>::from_f64(&[0.5, 1.3, 2.0, 7.5], &[2.0, 0.1, 1.0, 3.0]).unwrap();
        let v = weight_vector(&p).into_inner();
        let prob =
            LyapunovProblem::new(Matrix::from_diagonal(p.nodes()), Matrix::outer(&v, &v)).unwrap();
        let y = solve_eigenbasis(&prob).unwrap();
        let c = build_cauchy(&p).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                let want = c.matrix()[(j, k)];
                assert!(((y[(j, k)] - want) / want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn double_double_integral() {
        let x = Matrix::from_diagonal(&[1.0, 2.0]).convert::<DoubleDouble>();
        let k = Matrix::from_fn(2, 2, |_, _| DoubleDouble::ONE);
        let prob = LyapunovProblem::new(x, k).unwrap();
        let t_max = prob.default_t_max().unwrap();
        let s = solve_integral(&prob, t_max, DEFAULT_PANELS).unwrap();
        let y = solve_eigenbasis(&prob).unwrap();
        assert!(uniqueness_probe(&prob, &y, &s.y).to_f64() < 1e-26);
        let third = DoubleDouble::ONE / DoubleDouble::from_f64(3.0);
        assert!((y[(0, 1)] - third).abs().to_f64() < 1e-31);
    }

    fn spd(n: usize, seed: &[f64]) -> Matrix<f64> {
        // Q diag(λ) Qᵀ with Q from Gram–Schmidt of a seeded matrix
        let raw = Matrix::from_fn(n, n, |i, j| {
            seed[(i * n + j) % seed.len()] + (i == j) as u8 as f64
        });
        let mut q: Vec<Vec<f64>> = Vec::new();
        for j in 0..n {
            let mut c = raw.column(j);
            for b in &q {
                let h: f64 = b.iter().zip(&c).map(|(x, y)| x * y).sum();
                c.iter_mut().zip(b).for_each(|(ci, bi)| *ci -= h * bi);
            }
            let nrm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            q.push(c.iter().map(|x| x / nrm).collect());
        }
        let qm = Matrix::from_fn(n, n, |i, j| q[j][i]);
        let lambda: Vec<f64> = (0..n)
            .map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / n as f64))
            .collect();
        qm.matmul(&Matrix::from_diagonal(&lambda))
            .matmul(&qm.transpose())
            .symmetrized()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn linear_in_k(
            n in 1usize..6,
            seed in proptest::collection::vec(-1.0f64..1.0, 36),
            k1 in proptest::collection::vec(-1.0f64..1.0, 36),
            k2 in proptest::collection::vec(-1.0f64..1.0, 36),
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
        ) {
            let x = spd(n, &seed);
            let km1 = Matrix::from_fn(n, n, |i, j| k1[i * 6 + j]);
            let km2 = Matrix::from_fn(n, n, |i, j| k2[i * 6 + j]);
            let combo = km1.scale(alpha).add(&km2.scale(beta));
            let y1 = solve_eigenbasis(&LyapunovProblem::new(x.clone(), km1).unwrap()).unwrap();
            let y2 = solve_eigenbasis(&LyapunovProblem::new(x.clone(), km2).unwrap()).unwrap();
            let y = solve_eigenbasis(&LyapunovProblem::new(x, combo).unwrap()).unwrap();
            let want = y1.scale(alpha).add(&y2.scale(beta));
            let scale = y1.max_abs() * alpha.abs() + y2.max_abs() * beta.abs();
            prop_assert!(y.max_abs_diff(&want) <= (n * 32) as f64 * f64::EPSILON * scale.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn symmetric_k_gives_symmetric_y(
            n in 1usize..7,
            seed in proptest::collection::vec(-1.0f64..1.0, 49),
            k in proptest::collection::vec(-1.0f64..1.0, 49),
        ) {
            let x = spd(n, &seed);
            let km = Matrix::from_fn(n, n, |i, j| k[i * 7 + j]).symmetrized();
            let prob = LyapunovProblem::new(x, km).unwrap();
            let y = solve_eigenbasis(&prob).unwrap();
            prop_assert!(y.is_exactly_symmetric());
            let s = solve_integral(&prob, prob.default_t_max().unwrap(), DEFAULT_PANELS).unwrap();
            prop_assert!(s.y.is_exactly_symmetric());
        }

        #[test]
        fn displacement_run_backwards(
            raw in proptest::collection::vec((0.01f64..100.0, 0.01f64..100.0), 1..8),
        ) {
            let mut raw = raw;
            raw.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            raw.dedup_by(|x, y| (x.0 - y.0).abs() < 1e-6 * y.0);
            let (a, w): (Vec<f64>, Vec<f64>) = raw.into_iter().unzip();
            let p = SpectralPair::from_f64(&a, &w).unwrap();
            let v = weight_vector(&p).into_inner();
            let prob = LyapunovProblem::new(Matrix::from_diagonal(&a), Matrix::outer(&v, &v)).unwrap();
            let y = solve_eigenbasis(&prob).unwrap();
            let c = build_cauchy(&p).unwrap();
            for j in 0..a.len() {
                for k in 0..a.len() {
                    let want = c.matrix()[(j, k)];
                    prop_assert!(((y[(j, k)] - want) / want).abs() <= 1e-12);
                }
            }
        }
    }
}
