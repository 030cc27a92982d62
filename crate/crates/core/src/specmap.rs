//! The spectral map `(a, A) ↦ (b, B)`: `b` are the ascending eigenvalues of
//! `C_{a,A}` and `B_k = ⟨v_A, f_k⟩²` with every `f_k` oriented so that the
//! projection is positive. Also the orthogonal matrix `U` whose rows are the
//! `f_k`, and verifiers for the structural identities the map satisfies.

use crate::cauchy::{build_cauchy, cholesky_check, displacement_residual, displacement_scale};
use crate::eig::{eigen_residuals, eigh_cauchy, krylov_rank, EigenSystem};
use crate::error::{Error, Result};
use crate::matrix::{norm2, Matrix};
use crate::measure::{moment_check, PointMeasure};
use crate::pair::{inverse_weight_vector, validate_pair, weight_vector, SpectralPair};
use crate::report::{Check, Tolerances, VerificationReport};
use crate::scalar::Scalar;

/// Numerical diagnostics carried with every image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapDiagnostics {
    /// `max |UUᵀ − I|`
    pub orthogonality: f64,
    /// `max_k ‖C f_k − b_k f_k‖_∞ / b_k`
    pub eigen_residual: f64,
    /// `b_N / b_1`
    pub kappa: f64,
    pub sweeps: usize,
    /// `min_k ⟨v_A, f_k⟩ / ‖v_A‖`
    pub min_projection: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMapOutput<T> {
    image: SpectralPair<T>,
    u: Matrix<T>,
    diagnostics: MapDiagnostics,
}

impl<T: Scalar> SpectralMapOutput<T> {
    /// `(b, B)`
    pub fn image(&self) -> &SpectralPair<T> {
        &self.image
    }

    /// Orthogonal matrix with `f_kᵀ` as row `k`.
    pub fn u_matrix(&self) -> &Matrix<T> {
        &self.u
    }

    pub fn diagnostics(&self) -> &MapDiagnostics {
        &self.diagnostics
    }

    pub fn kappa(&self) -> f64 {
        self.diagnostics.kappa
    }

    pub fn into_image(self) -> SpectralPair<T> {
        self.image
    }
}

/// Assembles `(b, B, U)` from an eigensystem of `C_{a,A}` anchored at `v_A`.
///
/// `B_k` is evaluated as `2·b_k·Σ_j a_j f_jk²`, the diagonal of
/// `U D_a Uᵀ = C_{b,B}`. It equals `⟨v_A, f_k⟩²` exactly, but is a sum of
/// positive terms and so keeps full relative accuracy when the projection
/// is small. The projections still have to be positive.
///
/// The result must itself be a valid pair (strictly increasing positive `b`,
/// positive `B`); anything else means the eigensystem is unusable (wrong
/// order, lost precision) and is reported as `ImageValidationFailed`.
pub fn spectral_image<T: Scalar>(
    p: &SpectralPair<T>,
    e: &EigenSystem<T>,
) -> Result<(SpectralPair<T>, Matrix<T>)> {
    if e.n() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: e.n(),
        });
    }
    let projections = e.projections();
    if let Some(k) = projections.iter().position(|&s| !s.is_positive()) {
        return Err(Error::ImageValidationFailed {
            reason: format!("projection onto eigenvector {k} is not positive"),
        });
    }
    let b = e.values().to_vec();
    let f = e.vectors();
    let a = p.nodes();
    let weights = (0..p.len())
        .map(|k| {
            let quad: T = (0..p.len()).map(|j| a[j] * f[(j, k)] * f[(j, k)]).sum();
            T::of(2.0) * b[k] * quad
        })
        .collect();
    let image = validate_pair(b, weights).map_err(|err| Error::ImageValidationFailed {
        reason: err.to_string(),
    })?;
    Ok((image, f.transpose()))
}

/// Computes `Ω(a, A)`.
pub fn spectral_map<T: Scalar>(p: &SpectralPair<T>) -> Result<SpectralMapOutput<T>> {
    let c = build_cauchy(p)?;
    let v = weight_vector(p);
    let e = eigh_cauchy(p)?;
    let (image, u) = spectral_image(p, &e)?;
    let residuals = eigen_residuals(c.matrix(), &e)?;
    let b = image.nodes();
    let norm_v = norm2(v.as_slice());
    let min_projection = e
        .projections()
        .into_iter()
        .fold(f64::INFINITY, |m, s| m.min((s / norm_v).as_f64()));
    let diagnostics = MapDiagnostics {
        orthogonality: residuals.orthogonality.as_f64(),
        eigen_residual: residuals.eigen.as_f64(),
        kappa: (b[b.len() - 1] / b[0]).as_f64(),
        sweeps: e.sweeps(),
        min_projection,
    };
    Ok(SpectralMapOutput {
        image,
        u,
        diagnostics,
    })
}

/// Componentwise relative error allowed for `Ω∘Ω = id` (binary64 value,
/// rescaled to the working precision).
pub const INVOLUTION_TOL: f64 = 1e-8;
/// Componentwise relative error allowed for the scaling covariance.
pub const SCALING_TOL: f64 = 1e-10;
/// Per unit of `κ`, for the trace identities, the conjugation relations and
/// the eigen-equation residual.
pub const IDENTITY_TOL: f64 = 1e-10;

fn max_rel_error<T: Scalar>(got: &[T], want: &[T]) -> f64 {
    got.iter()
        .zip(want)
        .map(|(&g, &w)| ((g - w) / w).abs().as_f64())
        .fold(0.0, f64::max)
}

fn propagate<F>(report: &mut VerificationReport, name: &str, f: F) -> Result<()>
where
    F: FnOnce(&mut VerificationReport) -> Result<()>,
{
    match f(report) {
        Err(e) if e.is_precision_exhaustion() => {
            report.push(Check::inconclusive(name, e.to_string()));
            Ok(())
        }
        other => other,
    }
}

/// `Ω(Ω(p)) = p`, compared componentwise on the ordered tuples.
pub fn verify_involution<T: Scalar>(
    p: &SpectralPair<T>,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let first = spectral_map(p)?;
    let second = spectral_map(first.image())?;
    let back = second.image();
    let limit = tol.relative::<T>(INVOLUTION_TOL);
    let mut report = VerificationReport::new();
    report.push(Check::compare(
        "involution_nodes",
        max_rel_error(back.nodes(), p.nodes()),
        limit,
    ));
    report.push(Check::compare(
        "involution_weights",
        max_rel_error(back.weights(), p.weights()),
        limit,
    ));
    Ok(report)
}

/// `Ω(t·a, s·A) = ((s/t)·b, s·B)`.
pub fn verify_scaling<T: Scalar>(
    p: &SpectralPair<T>,
    node_scale: T,
    weight_scale: T,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    if !node_scale.is_positive() || !weight_scale.is_positive() {
        return Err(Error::InvalidArgument(
            "scaling factors must be positive".into(),
        ));
    }
    let base = spectral_map(p)?;
    let scaled = spectral_map(&p.scaled(node_scale, weight_scale)?)?;
    let factor = weight_scale / node_scale;
    let want_b: Vec<T> = base.image().nodes().iter().map(|&b| factor * b).collect();
    let want_w: Vec<T> = base
        .image()
        .weights()
        .iter()
        .map(|&w| weight_scale * w)
        .collect();
    let limit = tol.relative::<T>(SCALING_TOL);
    let mut report = VerificationReport::new();
    report.push(Check::compare(
        "scaling_nodes",
        max_rel_error(scaled.image().nodes(), &want_b),
        limit,
    ));
    report.push(Check::compare(
        "scaling_weights",
        max_rel_error(scaled.image().weights(), &want_w),
        limit,
    ));
    Ok(report)
}

/// The three sum identities between `(a, A)` and `(b, B)`, plus their exact
/// counterparts: `ΣB = ‖v_A‖²` (orthogonal invariance) and `Σb = tr C`
/// (Jacobi trace preservation).
pub fn verify_trace_identities<T: Scalar>(
    p: &SpectralPair<T>,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let out = spectral_map(p)?;
    let c = build_cauchy(p)?;
    let (a, w) = (p.nodes(), p.weights());
    let (b, bw) = (out.image().nodes(), out.image().weights());
    let n = p.len();
    let limit = tol.conditioned::<T>(IDENTITY_TOL, out.kappa());
    let rel = |lhs: T, rhs: T| ((lhs - rhs) / lhs).abs().as_f64();

    let sum_a: T = w.iter().copied().sum();
    let sum_b: T = bw.iter().copied().sum();
    let half_trace: T = w.iter().zip(a).map(|(&x, &y)| x / y).sum::<T>() * T::of(0.5);
    let sum_nodes: T = b.iter().copied().sum();
    let mut square = T::zero();
    for j in 0..n {
        for k in 0..n {
            let d = a[j] + a[k];
            square += w[j] * w[k] / (d * d);
        }
    }
    let sum_sq: T = b.iter().map(|&x| x * x).sum();
    let v = weight_vector(p);
    let norm_sq: T = v.as_slice().iter().map(|&x| x * x).sum();
    let exact = tol.ulps::<T>(32.0 * n as f64);

    let mut report = VerificationReport::new();
    report.push(Check::compare("weight_sum", rel(sum_a, sum_b), limit));
    report.push(Check::compare(
        "node_trace",
        rel(half_trace, sum_nodes),
        limit,
    ));
    report.push(Check::compare("trace_square", rel(square, sum_sq), limit));
    report.push(Check::compare(
        "norm_preservation",
        rel(norm_sq, sum_b),
        exact,
    ));
    report.push(Check::compare(
        "eigen_trace",
        rel(c.matrix().trace(), sum_nodes),
        exact,
    ));
    Ok(report)
}

/// Residuals of `U v_A = v_B`, `U C_{a,A} Uᵀ = D_b` and `U D_a Uᵀ = C_{b,B}`,
/// each relative to the norm of its right-hand side; `C_{b,B}` is built
/// independently from the image pair.
pub fn conjugation_residuals<T: Scalar>(
    out: &SpectralMapOutput<T>,
    p: &SpectralPair<T>,
) -> Result<[f64; 3]> {
    let u = out.u_matrix();
    let image = out.image();
    let v_a = weight_vector(p);
    let v_b = weight_vector(image);
    let uv = u.mul_vec(v_a.as_slice());
    let vec_res = uv
        .iter()
        .zip(v_b.as_slice())
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
        / norm2(v_b.as_slice());

    let c = build_cauchy(p)?;
    let d_b = Matrix::from_diagonal(image.nodes());
    let ucu = u.matmul(c.matrix()).matmul(&u.transpose());
    let b_max = image.nodes()[image.len() - 1];
    let diag_res = ucu.max_abs_diff(&d_b) / b_max;

    let c_b = build_cauchy(image)?;
    let d_a = Matrix::from_diagonal(p.nodes());
    let uau = u.matmul(&d_a).matmul(&u.transpose());
    let a_max = p.nodes()[p.len() - 1];
    let cauchy_res = uau.max_abs_diff(c_b.matrix()) / a_max;
    Ok([vec_res.as_f64(), diag_res.as_f64(), cauchy_res.as_f64()])
}

pub fn verify_conjugation<T: Scalar>(
    p: &SpectralPair<T>,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let out = spectral_map(p)?;
    let [vec_res, diag_res, cauchy_res] = conjugation_residuals(&out, p)?;
    let limit = tol.conditioned::<T>(IDENTITY_TOL, out.kappa());
    let mut report = VerificationReport::new();
    report.push(Check::compare("conjugation_vector", vec_res, limit));
    report.push(Check::compare("conjugation_diagonal", diag_res, limit));
    report.push(Check::compare("conjugation_cauchy", cauchy_res, limit));
    Ok(report)
}

/// Displacement identity at rounding level (`64·ε` of the largest
/// intermediate).
pub fn verify_displacement<T: Scalar>(
    p: &SpectralPair<T>,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let c = build_cauchy(p)?;
    let r = displacement_residual(c.matrix(), p)?.max_abs();
    let scale = displacement_scale(c.matrix(), p)?;
    let mut report = VerificationReport::new();
    report.push(Check::compare(
        "displacement",
        r.as_f64(),
        tol.ulps::<T>(64.0) * scale.as_f64(),
    ));
    Ok(report)
}

/// Cholesky certification of positive definiteness. Residual is the smallest
/// Cholesky pivot; failure for a valid pair means precision ran out.
pub fn verify_definiteness<T: Scalar>(p: &SpectralPair<T>) -> Result<VerificationReport> {
    let c = build_cauchy(p)?;
    let mut report = VerificationReport::new();
    match cholesky_check(c.matrix()) {
        Ok(pivot) => {
            let mut check = Check::compare("cholesky", pivot.as_f64(), 0.0);
            check.status = crate::report::CheckStatus::Pass;
            report.push(check.with_detail("residual is the smallest Cholesky pivot"));
        }
        Err(e) => report.push(Check::inconclusive("cholesky", e.to_string())),
    }
    Ok(report)
}

/// Krylov dimension of `v_A` and `w_A`; both are cyclic, so a deficit can
/// only come from lost precision and is reported as inconclusive.
pub fn verify_cyclicity<T: Scalar>(p: &SpectralPair<T>) -> Result<VerificationReport> {
    let c = build_cauchy(p)?;
    let n = p.len();
    let mut report = VerificationReport::new();
    for (name, v) in [
        ("cyclicity_v", weight_vector(p)),
        ("cyclicity_w", inverse_weight_vector(p)),
    ] {
        let rank = krylov_rank(c.matrix(), &v)?;
        let deficit = (n - rank) as f64;
        let mut check = Check::compare(name, deficit, 0.0);
        if rank < n {
            check.status = crate::report::CheckStatus::Inconclusive;
            check = check.with_detail(format!("numerical Krylov rank {rank} < {n}"));
        }
        report.push(check);
    }
    Ok(report)
}

/// Eigendecomposition quality: orthogonality at `32·N` ulps, eigen-equation
/// residual relative to each eigenvalue under the conditioned tolerance.
pub fn verify_eigensystem<T: Scalar>(
    p: &SpectralPair<T>,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let out = spectral_map(p)?;
    let d = out.diagnostics();
    let mut report = VerificationReport::new();
    report.push(Check::compare(
        "eigen_orthogonality",
        d.orthogonality,
        tol.ulps::<T>(32.0 * p.len() as f64),
    ));
    report.push(Check::compare(
        "eigen_residual",
        d.eigen_residual,
        tol.conditioned::<T>(IDENTITY_TOL, d.kappa),
    ));
    Ok(report)
}

/// Which checks `verify_selected` runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckGroup {
    Involution,
    Scaling,
    Identities,
    Conjugation,
    Displacement,
    Cyclicity,
    Moments,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 7] = [
        CheckGroup::Displacement,
        CheckGroup::Cyclicity,
        CheckGroup::Involution,
        CheckGroup::Scaling,
        CheckGroup::Identities,
        CheckGroup::Conjugation,
        CheckGroup::Moments,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckGroup::Involution => "involution",
            CheckGroup::Scaling => "scaling",
            CheckGroup::Identities => "identities",
            CheckGroup::Conjugation => "conjugation",
            CheckGroup::Displacement => "displacement",
            CheckGroup::Cyclicity => "cyclicity",
            CheckGroup::Moments => "moments",
        }
    }
}

impl std::str::FromStr for CheckGroup {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        CheckGroup::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown check `{s}`"))
    }
}

/// Runs the requested groups. Precision exhaustion inside a group becomes an
/// inconclusive check instead of an error; invalid input still errors.
///
/// The displacement group also carries the Cholesky certificate, and the
/// identities group the eigendecomposition quality checks.
pub fn verify_selected<T: Scalar>(
    p: &SpectralPair<T>,
    groups: &[CheckGroup],
    node_scale: T,
    weight_scale: T,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new();
    let mut groups = groups.to_vec();
    groups.sort();
    groups.dedup();
    for group in groups {
        match group {
            CheckGroup::Displacement => {
                propagate(&mut report, "displacement", |r| {
                    r.extend(verify_displacement(p, tol)?);
                    r.extend(verify_definiteness(p)?);
                    Ok(())
                })?;
            }
            CheckGroup::Cyclicity => propagate(&mut report, "cyclicity", |r| {
                r.extend(verify_cyclicity(p)?);
                Ok(())
            })?,
            CheckGroup::Involution => propagate(&mut report, "involution", |r| {
                r.extend(verify_involution(p, tol)?);
                Ok(())
            })?,
            CheckGroup::Scaling => propagate(&mut report, "scaling", |r| {
                r.extend(verify_scaling(p, node_scale, weight_scale, tol)?);
                Ok(())
            })?,
            CheckGroup::Identities => propagate(&mut report, "identities", |r| {
                r.extend(verify_eigensystem(p, tol)?);
                r.extend(verify_trace_identities(p, tol)?);
                Ok(())
            })?,
            CheckGroup::Conjugation => propagate(&mut report, "conjugation", |r| {
                r.extend(verify_conjugation(p, tol)?);
                Ok(())
            })?,
            CheckGroup::Moments => propagate(&mut report, "moments", |r| {
                let m = PointMeasure::from_pair(p.clone());
                r.extend(moment_check(&m, 2 * p.len(), tol)?);
                Ok(())
            })?,
        }
    }
    Ok(report)
}

/// Every check: displacement and Cholesky, cyclicity of `v_A` and `w_A`,
/// eigendecomposition quality, involution, scaling by `(t, s)`, the trace
/// identities, the conjugation relations and the spectral-measure moments.
pub fn verify_all<T: Scalar>(
    p: &SpectralPair<T>,
    node_scale: T,
    weight_scale: T,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    verify_selected(p, &CheckGroup::ALL, node_scale, weight_scale, tol)
}
