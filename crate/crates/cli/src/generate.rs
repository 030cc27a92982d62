//! Seeded random instances. This is the only place in the workspace that
//! draws random numbers.

use std::fmt;
use std::str::FromStr;

use cauchy_omega::SpectralPair;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exit::CliError;

/// Attempts at a node vector before the constraints are declared infeasible.
pub const MAX_DRAWS: usize = 10_000;

/// A closed interval `[lo, hi]` with `0 < lo ≤ hi`, written `lo,hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Result<Self, String> {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(format!("range {lo},{hi} must satisfy 0 < lo <= hi"));
        }
        Ok(Self { lo, hi })
    }

    /// Log-uniform draw, clamped so rounding in `exp` cannot leave the range.
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        rng.gen_range(self.lo.ln()..=self.hi.ln())
            .exp()
            .clamp(self.lo, self.hi)
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s
            .split_once(',')
            .ok_or_else(|| format!("expected lo,hi but got `{s}`"))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number"))
        };
        Range::new(parse(lo)?, parse(hi)?)
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.lo, self.hi)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub n: usize,
    pub node_range: Range,
    pub weight_range: Range,
    /// Minimum relative gap `(a_{k+1} − a_k)/a_k` between sorted nodes.
    pub min_gap: f64,
}

impl GenParams {
    /// Nodes in `[1, 10]` with relative gap at least `0.05`, weights in
    /// `[0.1, 10]`.
    pub fn standard(n: usize) -> Self {
        Self {
            n,
            node_range: Range { lo: 1.0, hi: 10.0 },
            weight_range: Range { lo: 0.1, hi: 10.0 },
            min_gap: 0.05,
        }
    }
}

fn gaps_ok(nodes: &[f64], min_gap: f64) -> bool {
    nodes
        .windows(2)
        .all(|w| w[1] > w[0] && (w[1] - w[0]) / w[0] >= min_gap)
}

/// Draws an instance from `seed`: sorted log-uniform nodes, redrawn as a
/// whole until every relative gap reaches `min_gap` and the pair validates,
/// then log-uniform weights. The same seed always gives the same pair.
pub fn generate(params: &GenParams, seed: u64) -> Result<SpectralPair<f64>, CliError> {
    if params.n == 0 {
        return Err(CliError::validation("--n must be at least 1"));
    }
    if !(params.min_gap.is_finite() && params.min_gap >= 0.0) {
        return Err(CliError::validation(format!(
            "--min-gap must be non-negative, got {}",
            params.min_gap
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_DRAWS {
        let mut nodes: Vec<f64> = (0..params.n)
            .map(|_| params.node_range.sample(&mut rng))
            .collect();
        nodes.sort_by(f64::total_cmp);
        if !gaps_ok(&nodes, params.min_gap) {
            continue;
        }
        let weights: Vec<f64> = (0..params.n)
            .map(|_| params.weight_range.sample(&mut rng))
            .collect();
        if let Ok(p) = SpectralPair::new(nodes, weights) {
            return Ok(p);
        }
    }
    Err(CliError::validation(format!(
        "no instance with n={} and relative gap {} in [{}] after {MAX_DRAWS} draws",
        params.n, params.min_gap, params.node_range
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_atom() {
        let p = generate(&GenParams::standard(1), 0).unwrap();
        assert_eq!(p.len(), 1);
        assert!((1.0..=10.0).contains(&p.nodes()[0]));
        assert!((0.1..=10.0).contains(&p.weights()[0]));
    }

    #[test]
    fn deterministic_per_seed() {
        let params = GenParams::standard(6);
        assert_eq!(
            generate(&params, 42).unwrap(),
            generate(&params, 42).unwrap()
        );
        assert_ne!(
            generate(&params, 42).unwrap(),
            generate(&params, 43).unwrap()
        );
    }

    #[test]
    fn respects_constraints() {
        for seed in 0..50 {
            let p = generate(&GenParams::standard(8), seed).unwrap();
            assert!(gaps_ok(p.nodes(), 0.05));
            assert!(p.nodes().iter().all(|x| (1.0..=10.0).contains(x)));
            assert!(p.weights().iter().all(|x| (0.1..=10.0).contains(x)));
        }
    }

    #[test]
    fn pigeonhole_is_infeasible() {
        let params = GenParams {
            n: 50,
            node_range: Range::new(1.0, 2.0).unwrap(),
            min_gap: 0.5,
            ..GenParams::standard(50)
        };
        assert_eq!(generate(&params, 0).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn degenerate_ranges() {
        let params = GenParams {
            weight_range: Range::new(3.0, 3.0).unwrap(),
            ..GenParams::standard(3)
        };
        assert!(generate(&params, 1)
            .unwrap()
            .weights()
            .iter()
            .all(|&w| w == 3.0));
        let params = GenParams {
            node_range: Range::new(2.0, 2.0).unwrap(),
            ..GenParams::standard(2)
        };
        assert_eq!(generate(&params, 1).unwrap_err().exit_code(), 2);
        assert_eq!(
            generate(&GenParams::standard(0), 1)
                .unwrap_err()
                .exit_code(),
            2
        );
    }

    #[test]
    fn range_parsing() {
        assert_eq!(
            "1,10".parse::<Range>().unwrap(),
            Range { lo: 1.0, hi: 10.0 }
        );
        assert_eq!(
            " 0.5 , 2".parse::<Range>().unwrap(),
            Range { lo: 0.5, hi: 2.0 }
        );
        for bad in ["1", "0,1", "2,1", "a,b", "-1,1", "1,inf"] {
            assert!(bad.parse::<Range>().is_err(), "{bad}");
        }
    }
}
