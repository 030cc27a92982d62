//! Symmetric eigendecomposition by Jacobi rotations, with the sign convention
//! `⟨anchor, f_k⟩ > 0` on every eigenvector: a general two-sided solver, and
//! a one-sided solver specialized to weighted Cauchy matrices.

use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, Matrix};
use crate::pair::{weight_vector, SpectralPair, WeightVector};
use crate::scalar::Scalar;

pub const MAX_SWEEPS: usize = 50;

/// Projections `|⟨anchor, f_k⟩|` below this many ulps of `‖anchor‖` are
/// treated as numerically zero.
const ANCHOR_ULPS: f64 = 1e3;

/// Krylov breakdown threshold, in ulps per dimension.
const KRYLOV_ULPS: f64 = 1e3;

/// Ascending eigenvalues with unit eigenvectors stored as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSystem<T> {
    values: Vec<T>,
    vectors: Matrix<T>,
    anchor: WeightVector<T>,
    sweeps: usize,
}

impl<T: Scalar> EigenSystem<T> {
    /// Assembles a system from externally supplied parts without checking
    /// ordering or orthogonality. Downstream consumers (such as the spectral
    /// image assembly) revalidate what they rely on.
    pub fn from_parts(values: Vec<T>, vectors: Matrix<T>, anchor: WeightVector<T>) -> Result<Self> {
        let n = values.len();
        if vectors.rows() != n || vectors.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: vectors.rows(),
            });
        }
        if anchor.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: anchor.len(),
            });
        }
        Ok(Self {
            values,
            vectors,
            anchor,
            sweeps: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn vectors(&self) -> &Matrix<T> {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> Vec<T> {
        self.vectors.column(k)
    }

    pub fn anchor(&self) -> &WeightVector<T> {
        &self.anchor
    }

    /// Jacobi sweeps used (0 for assembled systems).
    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// `⟨anchor, f_k⟩` for every k.
    pub fn projections(&self) -> Vec<T> {
        (0..self.n())
            .map(|k| dot(self.anchor.as_slice(), &self.vector(k)))
            .collect()
    }
}

/// Raw Jacobi output: eigenvalues ascending (stable on ties by original index)
/// with matching eigenvector columns, signs as they fall.
#[derive(Clone, Debug)]
pub(crate) struct JacobiOutput<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
    pub sweeps: usize,
}

/// Cyclic (row-by-row) Jacobi.
///
/// A rotation for `(p, q)` is skipped once `|a_pq| <= ε·√|a_pp·a_qq|`, the
/// relative criterion that lets small eigenvalues of positive definite
/// matrices converge to high relative accuracy; the iteration stops after the
/// first sweep without rotations.
pub(crate) fn jacobi<T: Scalar>(c: &Matrix<T>) -> Result<JacobiOutput<T>> {
    let n = c.rows();
    if !c.is_square() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c.cols(),
        });
    }
    let mut a = c.clone();
    let mut v = Matrix::<T>::identity(n);
    let eps = T::epsilon();
    // Anything this far below the norm is noise even for the absolute criterion.
    let floor = eps * eps * c.frobenius();
    let one = T::one();
    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                if apq.abs() <= eps * (app * aqq).abs().sqrt() || apq.abs() <= floor {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (T::of(2.0) * apq);
                let t = if theta.abs().as_f64() > 1e150 {
                    one / (T::of(2.0) * theta)
                } else {
                    let t = one / (theta.abs() + (theta * theta + one).sqrt());
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let cs = one / (t * t + one).sqrt();
                let sn = t * cs;
                let tau = sn / (one + cs);
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        let new_rp = arp - sn * (arq + tau * arp);
                        let new_rq = arq + sn * (arp - tau * arq);
                        a[(r, p)] = new_rp;
                        a[(p, r)] = new_rp;
                        a[(r, q)] = new_rq;
                        a[(q, r)] = new_rq;
                    }
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp - sn * (vrq + tau * vrp);
                    v[(r, q)] = vrq + sn * (vrp - tau * vrq);
                }
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
    }

    let diag = a.diagonal();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        diag[i]
            .partial_cmp(&diag[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    Ok(JacobiOutput {
        values,
        vectors,
        sweeps,
    })
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues ascending, each
/// eigenvector's sign chosen so that `⟨anchor, f_k⟩ > 0`.
///
/// Fails with `SignAnchorDegenerate` when some projection is numerically zero;
/// for a Cauchy matrix with anchor `v_A` that only happens when precision has
/// run out.
pub fn eigh<T: Scalar>(c: &Matrix<T>, anchor: &WeightVector<T>) -> Result<EigenSystem<T>> {
    let n = c.rows();
    if anchor.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: anchor.len(),
        });
    }
    let JacobiOutput {
        values,
        vectors,
        sweeps,
    } = jacobi(c)?;
    orient(values, vectors, anchor, sweeps)
}

/// Flips each eigenvector so that `⟨anchor, f_k⟩ > 0`.
fn orient<T: Scalar>(
    values: Vec<T>,
    mut vectors: Matrix<T>,
    anchor: &WeightVector<T>,
    sweeps: usize,
) -> Result<EigenSystem<T>> {
    let n = values.len();
    let threshold = T::of(ANCHOR_ULPS) * T::epsilon() * norm2(anchor.as_slice());
    for k in 0..n {
        let proj = dot(anchor.as_slice(), &vectors.column(k));
        if proj.abs() <= threshold {
            return Err(Error::SignAnchorDegenerate {
                index: k,
                projection: proj.as_f64(),
            });
        }
        if proj < T::zero() {
            for r in 0..n {
                vectors[(r, k)] = -vectors[(r, k)];
            }
        }
    }
    Ok(EigenSystem {
        values,
        vectors,
        anchor: anchor.clone(),
        sweeps,
    })
}

/// Factor `G` with `C_{a,A} = G Gᵀ`, from the Cauchy-structured `LDLᵀ`
/// factorization with diagonal pivoting.
///
/// Eliminating pivot `i` from `C_jk = r_j r_k/(a_j + a_k)` leaves a matrix of
/// the same form with `r_j ← r_j (a_j − a_i)/(a_j + a_i)`, so every entry of
/// `G` is a short product of quantities known to full relative accuracy.
/// Column `k` of `G` is `√(2a_i)·r_j/(a_j + a_i)` on the rows not yet
/// eliminated, `i` being the `k`-th pivot (largest remaining diagonal).
pub fn cauchy_factor<T: Scalar>(p: &SpectralPair<T>) -> Matrix<T> {
    let n = p.len();
    let a = p.nodes();
    let mut r = weight_vector(p).into_inner();
    let mut active = vec![true; n];
    let mut g = Matrix::zeros(n, n);
    let two = T::of(2.0);
    for k in 0..n {
        let mut pivot = None;
        let mut best = T::zero();
        for j in (0..n).filter(|&j| active[j]) {
            let d = r[j] * r[j] / (two * a[j]);
            if pivot.is_none() || d > best {
                pivot = Some(j);
                best = d;
            }
        }
        let i = pivot.expect("one active row per step");
        active[i] = false;
        let root = (two * a[i]).sqrt();
        g[(i, k)] = r[i] / root;
        for j in (0..n).filter(|&j| active[j]) {
            let sum = a[j] + a[i];
            g[(j, k)] = root * r[j] / sum;
            r[j] = r[j] * (a[j] - a[i]) / sum;
        }
    }
    g
}

/// Eigendecomposition of `C_{a,A}` to high relative accuracy in every
/// eigenvalue, including the tiny ones.
///
/// One-sided Jacobi orthogonalizes the columns of [`cauchy_factor`]; the
/// squared column norms are the eigenvalues and the normalized columns the
/// eigenvectors. Rotations stop once every column pair satisfies
/// `|⟨g_p, g_q⟩| <= N·ε·‖g_p‖‖g_q‖`, the rounding level of the inner product
/// itself. Signs follow `⟨v_A, f_k⟩ > 0`.
pub fn eigh_cauchy<T: Scalar>(p: &SpectralPair<T>) -> Result<EigenSystem<T>> {
    let n = p.len();
    let anchor = weight_vector(p);
    if n == 1 {
        let value = p.weights()[0] / (T::of(2.0) * p.nodes()[0]);
        return orient(vec![value], Matrix::identity(1), &anchor, 0);
    }
    let mut g = cauchy_factor(p);
    let eps = T::from_usize(n) * T::epsilon();
    let one = T::one();
    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for col_p in 0..n - 1 {
            for col_q in col_p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for r in 0..n {
                    let (x, y) = (g[(r, col_p)], g[(r, col_q)]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::of(2.0) * gamma);
                let t = if zeta.abs().as_f64() > 1e150 {
                    one / (T::of(2.0) * zeta)
                } else {
                    let t = one / (zeta.abs() + (one + zeta * zeta).sqrt());
                    if zeta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let cs = one / (one + t * t).sqrt();
                let sn = cs * t;
                for r in 0..n {
                    let (x, y) = (g[(r, col_p)], g[(r, col_q)]);
                    g[(r, col_p)] = cs * x - sn * y;
                    g[(r, col_q)] = sn * x + cs * y;
                }
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
    }
    let norms: Vec<T> = (0..n).map(|k| norm2(&g.column(k))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        norms[i]
            .partial_cmp(&norms[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| norms[k] * norms[k]).collect();
    let vectors = Matrix::from_fn(n, n, |r, k| g[(r, order[k])] / norms[order[k]]);
    orient(values, vectors, &anchor, sweeps)
}

/// Residuals of an eigendecomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenResiduals<T> {
    /// `max |VᵀV − I|`
    pub orthogonality: T,
    /// `max_k ‖C f_k − b_k f_k‖_∞ / |b_k|`
    pub eigen: T,
}

pub fn eigen_residuals<T: Scalar>(c: &Matrix<T>, e: &EigenSystem<T>) -> Result<EigenResiduals<T>> {
    let n = e.n();
    if c.rows() != n || c.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c.rows(),
        });
    }
    let v = e.vectors();
    let gram = v.transpose().matmul(v);
    let orthogonality = gram.max_abs_diff(&Matrix::identity(n));
    let mut eigen = T::zero();
    for k in 0..n {
        let f = v.column(k);
        let cf = c.mul_vec(&f);
        let b = e.values()[k];
        let worst = cf
            .iter()
            .zip(&f)
            .fold(T::zero(), |m, (&x, &y)| m.max((x - b * y).abs()));
        eigen = eigen.max(worst / b.abs());
    }
    Ok(EigenResiduals {
        orthogonality,
        eigen,
    })
}

/// Dimension of the Krylov space `span{v, Cv, …, C^{N−1}v}`.
///
/// The space is built with an orthonormal (Arnoldi) basis, reorthogonalized
/// twice per step; it stops growing when the new direction's norm falls below
/// `N·1e3·ε·‖C‖_F`. Returns `N` iff `v` is numerically cyclic for `C`.
pub fn krylov_rank<T: Scalar>(c: &Matrix<T>, v: &WeightVector<T>) -> Result<usize> {
    let n = c.rows();
    if !c.is_square() || v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    let norm_v = norm2(v.as_slice());
    if norm_v == T::zero() {
        return Ok(0);
    }
    let threshold = T::from_usize(n) * T::of(KRYLOV_ULPS) * T::epsilon() * c.frobenius();
    let mut basis: Vec<Vec<T>> = vec![v.as_slice().iter().map(|&x| x / norm_v).collect()];
    while basis.len() < n {
        let mut w = c.mul_vec(basis.last().unwrap());
        for _ in 0..2 {
            for q in &basis {
                let h = dot(q, &w);
                for (wi, &qi) in w.iter_mut().zip(q) {
                    *wi -= h * qi;
                }
            }
        }
        let beta = norm2(&w);
        if beta <= threshold {
            break;
        }
        basis.push(w.into_iter().map(|x| x / beta).collect());
    }
    Ok(basis.len())
}
