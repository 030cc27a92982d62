//! Precision envelope: how ill-conditioned an instance may get before the
//! full verification suite stops passing in each scalar mode.
//!
//! The family is `a_k = (1 + δ)^k`, `A_k = 1` for `k = 0..N`. Shrinking `δ`
//! clusters the nodes and drives `κ = b_N/b_1` up without bound.

use cauchy_omega::{
    spectral_map, verify_all, DoubleDouble, Result, Scalar, SpectralPair, Tolerances,
};

/// `δ` halves every `STEPS_PER_OCTAVE` points of the sweep.
pub const STEPS_PER_OCTAVE: u32 = 4;
/// Sweep ends once double-double has failed this many points in a row.
pub const STOP_AFTER: usize = 3;
/// Hard limit on sweep length (`δ` down to `2^{-100}`).
pub const MAX_STEPS: u32 = 100 * STEPS_PER_OCTAVE;

pub fn family<T: Scalar>(n: usize, delta: f64) -> Result<SpectralPair<T>> {
    let ratio = T::one() + T::of(delta);
    let mut node = T::one();
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        nodes.push(node);
        node *= ratio;
    }
    SpectralPair::new(nodes, vec![T::one(); n])
}

/// `None` when the suite passes, otherwise the first reason it did not.
fn suite_failure<T: Scalar>(n: usize, delta: f64, tol: &Tolerances) -> Option<String> {
    let p = match family::<T>(n, delta) {
        Ok(p) => p,
        Err(e) => return Some(e.to_string()),
    };
    match verify_all(&p, T::of(2.0), T::of(5.0), tol) {
        Ok(r) => r
            .checks
            .iter()
            .find(|c| !c.passed())
            .map(|c| format!("{} ({:?})", c.name, c.status).to_lowercase()),
        Err(e) => Some(e.to_string()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopePoint {
    pub delta: f64,
    /// `b_N/b_1` from the double-double map; `None` if even that failed.
    pub kappa: Option<f64>,
    pub f64_failure: Option<String>,
    pub dd_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeRow {
    pub n: usize,
    pub points: Vec<EnvelopePoint>,
}

/// Largest `κ` reached before the first failure. Isolated passes further
/// out are rounding luck and do not count.
fn max_passing(points: &[EnvelopePoint], failure: impl Fn(&EnvelopePoint) -> bool) -> Option<f64> {
    points
        .iter()
        .take_while(|p| !failure(p))
        .filter_map(|p| p.kappa)
        .fold(None, |m, k| Some(m.map_or(k, |m: f64| m.max(k))))
}

impl EnvelopeRow {
    pub fn f64_max_kappa(&self) -> Option<f64> {
        max_passing(&self.points, |p| p.f64_failure.is_some())
    }

    pub fn dd_max_kappa(&self) -> Option<f64> {
        max_passing(&self.points, |p| p.dd_failure.is_some())
    }

    /// The check that ended the f64 envelope.
    pub fn f64_limit(&self) -> Option<&str> {
        self.points.iter().find_map(|p| p.f64_failure.as_deref())
    }

    /// The check that ended the double-double envelope.
    pub fn dd_limit(&self) -> Option<&str> {
        self.points.iter().find_map(|p| p.dd_failure.as_deref())
    }

    pub fn dd_strictly_further(&self) -> bool {
        match (self.f64_max_kappa(), self.dd_max_kappa()) {
            (Some(f), Some(d)) => d > f,
            (None, Some(_)) => true,
            _ => false,
        }
    }
}

/// Sweeps `δ = 2^{-j/STEPS_PER_OCTAVE}` for `j = 0, 1, …` until double-double
/// fails [`STOP_AFTER`] times in a row.
pub fn sweep(n: usize, tol: &Tolerances) -> EnvelopeRow {
    let mut points = Vec::new();
    let mut dd_misses = 0;
    for j in 0..=MAX_STEPS {
        let delta = (-(j as f64) / STEPS_PER_OCTAVE as f64).exp2();
        let kappa = family::<DoubleDouble>(n, delta)
            .and_then(|p| spectral_map(&p))
            .ok()
            .map(|out| out.kappa());
        let point = EnvelopePoint {
            delta,
            kappa,
            f64_failure: suite_failure::<f64>(n, delta, tol),
            dd_failure: suite_failure::<DoubleDouble>(n, delta, tol),
        };
        dd_misses = if point.dd_failure.is_some() {
            dd_misses + 1
        } else {
            0
        };
        points.push(point);
        if dd_misses >= STOP_AFTER {
            break;
        }
    }
    EnvelopeRow { n, points }
}

fn sci(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), |k| format!("{k:.2e}"))
}

/// Markdown table with one line per `N`.
pub fn render_markdown(rows: &[EnvelopeRow]) -> String {
    let mut s = String::from(
        "# Precision envelope\n\n\
         Family: nodes `a_k = (1 + δ)^k`, weights `A_k = 1`, k = 0..N-1, with \
         `δ = 2^(-j/4)` for j = 0, 1, ... . Each point runs the full suite \
         (`verify --checks all`, default tolerances, scaling factors t = 2, \
         s = 5) in both modes; κ = b_N/b_1 comes from the double-double map. \
         The envelope of a mode is the largest κ reached before its first \
         failure; the sweep stops after three consecutive double-double \
         failures.\n\n\
         | N | f64 envelope κ | dd envelope κ | dd further | f64 limited by | dd limited by |\n\
         |---|---|---|---|---|---|\n",
    );
    for r in rows {
        s.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} |\n",
            r.n,
            sci(r.f64_max_kappa()),
            sci(r.dd_max_kappa()),
            if r.dd_strictly_further() { "yes" } else { "no" },
            r.f64_limit().unwrap_or("none"),
            r.dd_limit().unwrap_or("none"),
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_is_geometric() {
        let p = family::<f64>(3, 0.5).unwrap();
        assert_eq!(p.nodes(), &[1.0, 1.5, 2.25]);
        assert_eq!(p.weights(), &[1.0, 1.0, 1.0]);
        assert!(family::<f64>(2, 1e-17).is_err());
    }

    #[test]
    fn pair_envelope_extends_in_double_double() {
        let row = sweep(2, &Tolerances::default());
        assert!(row.f64_max_kappa().unwrap() > 10.0);
        assert!(row.dd_strictly_further());
        assert!(render_markdown(&[row]).contains("| 2 |"));
    }
}
