//! Finite point measures `α = Σ m_k δ_{x_k}` on `(0, ∞)`: the operator
//! `G_α f(x) = ∫ f(y)/(x+y) dα(y)`, the moments of its spectral measure with
//! respect to `𝟙`, and the Hankel kernel `h(t) = ∫ e^{−tx} dα(x)`.

use crate::cauchy::{build_cauchy, quadrature_gram_oracle};
use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::pair::{weight_vector, SpectralPair};
use crate::report::{Check, Tolerances, VerificationReport};
use crate::scalar::{Scalar, ScalarMode};
use crate::specmap::spectral_map;

/// Highest moment `moment_check` evaluates in double precision.
pub const MAX_POWER_F64: usize = 12;
/// Highest moment `moment_check` evaluates in double-double.
pub const MAX_POWER_DD: usize = 24;

/// Relative error per unit of `κ` allowed in each moment (binary64 value,
/// rescaled to the working precision).
pub const MOMENT_TOL: f64 = 1e-8;

/// Relative error (in units of roundoff) allowed per entry of the Gram
/// identity.
const GRAM_ULPS: f64 = 1e5;

/// A finite atomic measure with strictly increasing positive locations and
/// positive masses; the same data as a [`SpectralPair`].
#[derive(Clone, Debug, PartialEq)]
pub struct PointMeasure<T> {
    pair: SpectralPair<T>,
}

impl<T: Scalar> PointMeasure<T> {
    /// Atoms as `(location, mass)`.
    pub fn new(atoms: Vec<(T, T)>) -> Result<Self> {
        let (x, m) = atoms.into_iter().unzip();
        Ok(Self {
            pair: SpectralPair::new(x, m)?,
        })
    }

    pub fn from_pair(pair: SpectralPair<T>) -> Self {
        Self { pair }
    }

    pub fn as_pair(&self) -> &SpectralPair<T> {
        &self.pair
    }

    pub fn into_pair(self) -> SpectralPair<T> {
        self.pair
    }

    pub fn len(&self) -> usize {
        self.pair.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pair.is_empty()
    }

    pub fn locations(&self) -> &[T] {
        self.pair.nodes()
    }

    pub fn masses(&self) -> &[T] {
        self.pair.weights()
    }

    pub fn atoms(&self) -> Vec<(T, T)> {
        self.locations()
            .iter()
            .copied()
            .zip(self.masses().iter().copied())
            .collect()
    }

    /// `α((0, ∞)) = Σ m_k`, also the limit of `h(t)` as `t → 0⁺`.
    pub fn total_mass(&self) -> T {
        self.masses().iter().copied().sum()
    }
}

impl<T> From<SpectralPair<T>> for PointMeasure<T> {
    fn from(pair: SpectralPair<T>) -> Self {
        Self { pair }
    }
}

impl<T> From<PointMeasure<T>> for SpectralPair<T> {
    fn from(m: PointMeasure<T>) -> Self {
        m.pair
    }
}

/// Matrix of `G_α` in the orthonormal basis `δ_{x_k}/√m_k`: the weighted
/// Cauchy matrix of the same data.
pub fn g_alpha_matrix<T: Scalar>(m: &PointMeasure<T>) -> Result<Matrix<T>> {
    Ok(build_cauchy(&m.pair)?.into_matrix())
}

/// `h(t) = Σ m_k e^{−x_k t}` for `t > 0`.
pub fn hankel_kernel<T: Scalar>(m: &PointMeasure<T>, t: T) -> Result<T> {
    if !t.is_positive() || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "kernel argument must be positive, got {}",
            t.to_decimal()
        )));
    }
    Ok(m.locations()
        .iter()
        .zip(m.masses())
        .map(|(&x, &w)| w * (-x * t).exp())
        .sum())
}

fn power_cap(mode: ScalarMode) -> usize {
    match mode {
        ScalarMode::F64 => MAX_POWER_F64,
        ScalarMode::Dd => MAX_POWER_DD,
    }
}

/// Compares `⟨C^p v_A, v_A⟩` with `Σ_k b_k^p B_k` for `p = 0..=max_power`,
/// one check per power (named `moment_p`), each relative to the matrix side
/// under the condition-scaled tolerance. `max_power` is capped at 12 in f64
/// and 24 in double-double.
pub fn moment_check<T: Scalar>(
    m: &PointMeasure<T>,
    max_power: usize,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    if max_power == 0 {
        return Err(Error::InvalidArgument(
            "max_power must be at least 1".into(),
        ));
    }
    let cap = power_cap(T::MODE);
    let top = max_power.min(cap);
    let c = build_cauchy(&m.pair)?;
    let image = spectral_map(&m.pair)?;
    let limit = tol.conditioned::<T>(MOMENT_TOL, image.kappa());
    let v = weight_vector(&m.pair).into_inner();
    let (b, bw) = (image.image().nodes(), image.image().weights());

    let mut report = VerificationReport::new();
    let mut cv = v.clone();
    let mut bp: Vec<T> = vec![T::one(); b.len()];
    for p in 0..=top {
        if p > 0 {
            cv = c.matrix().mul_vec(&cv);
            for (x, &bk) in bp.iter_mut().zip(b) {
                *x *= bk;
            }
        }
        let lhs = dot(&cv, &v);
        let rhs: T = bp.iter().zip(bw).map(|(&x, &w)| x * w).sum();
        let rel = ((lhs - rhs) / lhs).abs().as_f64();
        let mut check = Check::compare(format!("moment_{p}"), rel, limit);
        if p == top && top < max_power {
            check = check.with_detail(format!("powers above {cap} skipped in {}", T::MODE));
        }
        report.push(check);
    }
    Ok(report)
}

/// Quadrature check of `G_α = L_α* L_α`: each entry
/// `√(m_j m_k) ∫₀^{t_max} e^{−(x_j+x_k)t} dt` against [`g_alpha_matrix`],
/// relative per entry. Propagates `QuadratureNotConverged` when `t_max`
/// leaves too much of the tail out.
pub fn gram_identity_check<T: Scalar>(
    m: &PointMeasure<T>,
    t_max: T,
    panels: usize,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let g = g_alpha_matrix(m)?;
    let q = quadrature_gram_oracle(&m.pair, t_max, panels)?;
    let n = m.len();
    let mut worst = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            worst = worst.max(((q[(j, k)] - g[(j, k)]) / g[(j, k)]).abs().as_f64());
        }
    }
    let mut report = VerificationReport::new();
    report.push(Check::compare(
        "gram_identity",
        worst,
        tol.ulps::<T>(GRAM_ULPS),
    ));
    Ok(report)
}
