//! Weighted Cauchy matrices `C_jk = √(A_j A_k) / (a_j + a_k)` and the
//! structural facts about them: the displacement identity, positive
//! definiteness, and the Laplace-integral representation of each entry.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::pair::{weight_vector, SpectralPair};
use crate::quadrature::integrate_doubling;
use crate::scalar::Scalar;

/// A dense weighted Cauchy matrix together with the pair it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyMatrix<T> {
    entries: Matrix<T>,
    source: SpectralPair<T>,
}

impl<T: Scalar> CauchyMatrix<T> {
    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn source(&self) -> &SpectralPair<T> {
        &self.source
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.entries
    }
}

/// Builds `C_{a,A}`. Diagonal entries are `A_j/(2a_j)`; off the diagonal
/// `√(A_jA_k)` is taken in one square root unless the product leaves the
/// normal range. Only the upper triangle is evaluated and the lower one is
/// mirrored, so the result is exactly symmetric.
pub fn build_cauchy<T: Scalar>(p: &SpectralPair<T>) -> Result<CauchyMatrix<T>> {
    let n = p.len();
    let roots = weight_vector(p).into_inner();
    let (a, w) = (p.nodes(), p.weights());
    let tiny = T::of(f64::MIN_POSITIVE);
    let mut m = Matrix::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let product = w[j] * w[k];
            let numerator = if j == k {
                w[j]
            } else if product.is_finite() && product > tiny {
                product.sqrt()
            } else {
                roots[j] * roots[k]
            };
            let c = numerator / (a[j] + a[k]);
            if !c.is_finite() {
                return Err(Error::Overflow { row: j, col: k });
            }
            m[(j, k)] = c;
            m[(k, j)] = c;
        }
    }
    Ok(CauchyMatrix {
        entries: m,
        source: p.clone(),
    })
}

/// `R = C·D_a + D_a·C − v_A v_Aᵀ` for an arbitrary square `c`.
///
/// Zero in exact arithmetic when `c` is the Cauchy matrix of `p`.
pub fn displacement_residual<T: Scalar>(c: &Matrix<T>, p: &SpectralPair<T>) -> Result<Matrix<T>> {
    let n = p.len();
    check_square(c, n)?;
    let v = weight_vector(p).into_inner();
    let a = p.nodes();
    Ok(Matrix::from_fn(n, n, |j, k| {
        c[(j, k)] * a[k] + a[j] * c[(j, k)] - v[j] * v[k]
    }))
}

/// Magnitude of the largest intermediate in [`displacement_residual`]; the
/// residual of an exactly built Cauchy matrix is a small multiple of
/// `epsilon · scale`.
pub fn displacement_scale<T: Scalar>(c: &Matrix<T>, p: &SpectralPair<T>) -> Result<T> {
    let n = p.len();
    check_square(c, n)?;
    let v = weight_vector(p).into_inner();
    let a = p.nodes();
    let mut scale = T::zero();
    for j in 0..n {
        for k in 0..n {
            scale = scale
                .max((c[(j, k)] * a[k]).abs())
                .max((a[j] * c[(j, k)]).abs())
                .max((v[j] * v[k]).abs());
        }
    }
    Ok(scale)
}

/// Cholesky factorization; returns the smallest diagonal entry of the factor.
///
/// Success certifies positive definiteness in the working precision.
pub fn cholesky_check<T: Scalar>(c: &Matrix<T>) -> Result<T> {
    let n = c.rows();
    check_square(c, n)?;
    let mut l = Matrix::<T>::zeros(n, n);
    let mut smallest: Option<T> = None;
    for j in 0..n {
        let mut d = c[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !d.is_positive() || !d.is_finite() {
            return Err(Error::NotPositiveDefinite {
                index: j,
                pivot: d.as_f64(),
            });
        }
        let pivot = d.sqrt();
        l[(j, j)] = pivot;
        smallest = Some(smallest.map_or(pivot, |s: T| s.min(pivot)));
        for i in j + 1..n {
            let mut s = c[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / pivot;
        }
    }
    smallest.ok_or(Error::EmptyInput)
}

/// Approximates `C_{a,A}` by integrating `√(A_jA_k)·e^{−(a_j+a_k)t}` over
/// `[0, t_max]` with composite Gauss–Legendre on `panels` and `2·panels`
/// graded panels.
///
/// Fails with `QuadratureNotConverged` when the two disagree by more than
/// `1e3·epsilon` relative to the largest entry, or when the neglected tail
/// beyond `t_max` is that large.
pub fn quadrature_gram_oracle<T: Scalar>(
    p: &SpectralPair<T>,
    t_max: T,
    panels: usize,
) -> Result<Matrix<T>> {
    let n = p.len();
    let roots = weight_vector(p).into_inner();
    let a = p.nodes().to_vec();
    let mut tail = T::zero();
    for j in 0..n {
        for k in 0..n {
            let rate = a[j] + a[k];
            tail = tail.max(roots[j] * roots[k] * (-rate * t_max).exp() / rate);
        }
    }
    let rel_tol = T::of(1e3) * T::epsilon();
    let result = integrate_doubling(t_max, panels, 2 * panels, rel_tol, tail, |t| {
        let e: Vec<T> = roots
            .iter()
            .zip(&a)
            .map(|(&r, &x)| r * (-x * t).exp())
            .collect();
        Matrix::outer(&e, &e)
    })?;
    Ok(result.value)
}

fn check_square<T: Scalar>(c: &Matrix<T>, n: usize) -> Result<()> {
    if c.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c.rows(),
        });
    }
    if c.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c.cols(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;
    use proptest::prelude::*;

    fn pair(a: &[f64], w: &[f64]) -> SpectralPair<f64> {
        SpectralPair::from_f64(a, w).unwrap()
    }

    #[test]
    fn small_examples() {
        let c = build_cauchy(&pair(&[1.0, 2.0], &[1.0, 1.0])).unwrap();
        assert_eq!(
            c.matrix().to_rows(),
            vec![vec![0.5, 1.0 / 3.0], vec![1.0 / 3.0, 0.25]]
        );
        let c = build_cauchy(&pair(&[1.0], &[4.0])).unwrap();
        assert_eq!(c.matrix().to_rows(), vec![vec![2.0]]);
        let c = build_cauchy(&pair(&[1.0, 2.0, 3.0], &[1.0; 3])).unwrap();
        assert_eq!(c.matrix()[(0, 2)], 0.25);
        assert!(c.matrix().is_exactly_symmetric());
    }

    #[test]
    fn overflow_is_reported() {
        let p = pair(&[1e-300, 1.0], &[1e300, 1.0]);
        assert_eq!(
            build_cauchy(&p).unwrap_err(),
            Error::Overflow { row: 0, col: 0 }
        );
    }

    #[test]
    fn displacement_vanishes_for_small_pair() {
        let p = pair(&[1.0, 2.0], &[1.0, 1.0]);
        let c = build_cauchy(&p).unwrap();
        let r = displacement_residual(c.matrix(), &p).unwrap();
        assert!(r.max_abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn displacement_of_perturbed_matrix() {
        let p = pair(&[1.0, 2.0], &[1.0, 1.0]);
        let eps = 1e-3;
        let c = build_cauchy(&p)
            .unwrap()
            .matrix()
            .add(&Matrix::identity(2).scale(eps));
        let r = displacement_residual(&c, &p).unwrap();
        // Residual of εI is ε(D_a + D_a) = diag(2ε, 4ε).
        assert!((r.max_abs() - 2.0 * eps * 2.0).abs() < 1e-15);
    }

    #[test]
    fn displacement_dimension_mismatch() {
        let p = pair(&[1.0, 2.0], &[1.0, 1.0]);
        let err = displacement_residual(&Matrix::identity(3), &p).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                found: 3
            }
        );
    }

    #[test]
    fn cholesky_examples() {
        let c = build_cauchy(&pair(&[1.0], &[4.0])).unwrap();
        assert_eq!(cholesky_check(c.matrix()).unwrap(), 2f64.sqrt());

        // det = 1/2·1/4 − 1/9 = 1/72, so the pivots are √(1/2) and √(1/72 / (1/2)).
        let c = build_cauchy(&pair(&[1.0, 2.0], &[1.0, 1.0])).unwrap();
        let smallest = cholesky_check(c.matrix()).unwrap();
        assert!((smallest - (1.0f64 / 36.0).sqrt()).abs() < 1e-15);

        let bad = Matrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            cholesky_check(&bad),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
    }

    #[test]
    fn cholesky_needs_double_double_at_twelve() {
        let nodes: Vec<f64> = (1..=12).map(f64::from).collect();
        let p = SpectralPair::<DoubleDouble>::from_f64(&nodes, &[1.0; 12]).unwrap();
        let c = build_cauchy(&p).unwrap();
        let pivot = cholesky_check(c.matrix()).unwrap();
        assert!(pivot > DoubleDouble::ZERO);
        assert!(pivot.to_f64() < 1e-6);
    }

    #[test]
    fn quadrature_oracle_examples() {
        let p = pair(&[1.0, 2.0], &[1.0, 1.0]);
        let g = quadrature_gram_oracle(&p, 50.0, 64).unwrap();
        assert!((g[(0, 0)] - 0.5).abs() < 1e-12);
        assert!((g[(0, 1)] - 1.0 / 3.0).abs() < 1e-12);

        let g = quadrature_gram_oracle(&pair(&[1.0], &[1.0]), 50.0, 64).unwrap();
        assert!((g[(0, 0)] - 0.5).abs() < 1e-14);

        assert!(matches!(
            quadrature_gram_oracle(&p, 50.0, 2),
            Err(Error::QuadratureNotConverged { .. })
        ));
    }

    #[test]
    fn quadrature_oracle_in_double_double() {
        let p = SpectralPair::<DoubleDouble>::from_f64(&[1.0, 2.0], &[1.0, 1.0]).unwrap();
        let g = quadrature_gram_oracle(&p, DoubleDouble::from_f64(50.0), 64).unwrap();
        let third = DoubleDouble::ONE / DoubleDouble::from_f64(3.0);
        assert!((g[(0, 1)] - third).abs().to_f64() < 1e-28);
    }

    fn node_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..=6).prop_flat_map(|n| {
            (
                proptest::collection::vec(0.1f64..10.0, n),
                proptest::collection::vec(0.1f64..10.0, n),
            )
        })
    }

    fn sorted_distinct(mut a: Vec<f64>) -> Option<Vec<f64>> {
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        a.windows(2)
            .all(|w| w[1] > w[0] * (1.0 + 1e-3))
            .then_some(a)
    }

    proptest! {
        #[test]
        fn displacement_is_rounding_level((a, w) in node_strategy()) {
            let Some(a) = sorted_distinct(a) else { return Ok(()) };
            let p = pair(&a, &w);
            let c = build_cauchy(&p).unwrap();
            let r = displacement_residual(c.matrix(), &p).unwrap().max_abs();
            let scale = displacement_scale(c.matrix(), &p).unwrap();
            prop_assert!(r <= 64.0 * f64::EPSILON * scale);

            let pd = p.convert::<DoubleDouble>().unwrap();
            let cd = build_cauchy(&pd).unwrap();
            let r = displacement_residual(cd.matrix(), &pd).unwrap().max_abs();
            let scale = displacement_scale(cd.matrix(), &pd).unwrap();
            prop_assert!(r <= DoubleDouble::from_f64(64.0) * DoubleDouble::epsilon() * scale);
        }

        #[test]
        fn dd_cholesky_certifies_definiteness((a, w) in node_strategy()) {
            let Some(a) = sorted_distinct(a) else { return Ok(()) };
            let p = SpectralPair::<DoubleDouble>::from_f64(&a, &w).unwrap();
            let c = build_cauchy(&p).unwrap();
            prop_assert!(cholesky_check(c.matrix()).is_ok());
        }

        #[test]
        fn scale_covariance(
            (a, w) in node_strategy(),
            t in 0.01f64..100.0,
            s in 0.01f64..100.0,
        ) {
            let Some(a) = sorted_distinct(a) else { return Ok(()) };
            let p = pair(&a, &w);
            let base = build_cauchy(&p).unwrap();
            let scaled = build_cauchy(&p.scaled(t, s).unwrap()).unwrap();
            let factor = s / t;
            for j in 0..a.len() {
                for k in 0..a.len() {
                    let want = factor * base.matrix()[(j, k)];
                    let got = scaled.matrix()[(j, k)];
                    prop_assert!((got - want).abs() <= 4.0 * f64::EPSILON * want.abs());
                }
            }
        }

        #[test]
        fn quadrature_matches_closed_form((a, w) in node_strategy()) {
            let Some(a) = sorted_distinct(a) else { return Ok(()) };
            let p = pair(&a, &w);
            let c = build_cauchy(&p).unwrap();
            let g = quadrature_gram_oracle(&p, 40.0 / a[0], 64).unwrap();
            for j in 0..a.len() {
                for k in 0..a.len() {
                    let want = c.matrix()[(j, k)];
                    prop_assert!((g[(j, k)] - want).abs() <= 1e-10 * want);
                }
            }
        }
    }
}
