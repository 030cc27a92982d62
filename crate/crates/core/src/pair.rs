//! Node/weight pairs: the domain (and range) of the spectral map.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Nodes closer than this many ulps (relative) count as coincident.
const NODE_SEPARATION_ULPS: f64 = 1e3;

/// A validated pair `(a, A)`: strictly increasing positive nodes and positive
/// weights of equal length `N >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPair<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

/// Checks the node/weight conditions and builds a [`SpectralPair`].
///
/// Nodes whose relative spacing is within `1e3` ulps are reported as
/// `NodesNotStrictlyIncreasing`; the map is meaningless for coincident nodes.
pub fn validate_pair<T: Scalar>(nodes: Vec<T>, weights: Vec<T>) -> Result<SpectralPair<T>> {
    if nodes.is_empty() && weights.is_empty() {
        return Err(Error::EmptyInput);
    }
    if nodes.len() != weights.len() {
        return Err(Error::LengthMismatch {
            nodes: nodes.len(),
            weights: weights.len(),
        });
    }
    for (index, (&a, &w)) in nodes.iter().zip(&weights).enumerate() {
        if !a.is_finite() || !w.is_finite() {
            return Err(Error::NonFiniteValue { index });
        }
        if !a.is_positive() {
            return Err(Error::NonPositiveNode { index });
        }
        if !w.is_positive() {
            return Err(Error::NonPositiveWeight { index });
        }
    }
    let min_gap = T::of(NODE_SEPARATION_ULPS) * T::epsilon();
    for index in 1..nodes.len() {
        let (prev, next) = (nodes[index - 1], nodes[index]);
        if !(next - prev).is_positive() || next - prev <= min_gap * next {
            return Err(Error::NodesNotStrictlyIncreasing { index });
        }
    }
    Ok(SpectralPair { nodes, weights })
}

impl<T: Scalar> SpectralPair<T> {
    pub fn new(nodes: Vec<T>, weights: Vec<T>) -> Result<Self> {
        validate_pair(nodes, weights)
    }

    /// Convenience constructor from `f64` slices.
    pub fn from_f64(nodes: &[f64], weights: &[f64]) -> Result<Self> {
        validate_pair(
            nodes.iter().map(|&x| T::of(x)).collect(),
            weights.iter().map(|&x| T::of(x)).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn into_parts(self) -> (Vec<T>, Vec<T>) {
        (self.nodes, self.weights)
    }

    /// `(t·a, s·A)`; revalidated because scaling can collapse node gaps.
    pub fn scaled(&self, node_scale: T, weight_scale: T) -> Result<Self> {
        validate_pair(
            self.nodes.iter().map(|&a| a * node_scale).collect(),
            self.weights.iter().map(|&w| w * weight_scale).collect(),
        )
    }

    /// Converts to another scalar mode through `f64`.
    pub fn convert<U: Scalar>(&self) -> Result<SpectralPair<U>> {
        validate_pair(
            self.nodes.iter().map(|x| U::of(x.as_f64())).collect(),
            self.weights.iter().map(|x| U::of(x.as_f64())).collect(),
        )
    }
}

/// Coefficient vector `v_A = (√A_k)` or `w_A = (√A_k / a_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector<T>(Vec<T>);

impl<T: Scalar> WeightVector<T> {
    pub fn new(v: Vec<T>) -> Self {
        Self(v)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

/// `v_A = (√A_1, …, √A_N)`.
pub fn weight_vector<T: Scalar>(p: &SpectralPair<T>) -> WeightVector<T> {
    WeightVector(p.weights.iter().map(|w| w.sqrt()).collect())
}

/// `w_A = (√A_1/a_1, …, √A_N/a_N)`.
pub fn inverse_weight_vector<T: Scalar>(p: &SpectralPair<T>) -> WeightVector<T> {
    WeightVector(
        p.weights
            .iter()
            .zip(&p.nodes)
            .map(|(w, &a)| w.sqrt() / a)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;

    #[test]
    fn accepts_valid_pair() {
        let p = SpectralPair::<f64>::from_f64(&[1.0, 2.0], &[1.0, 1.0]).unwrap();
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn reports_first_offending_index() {
        let err = SpectralPair::<f64>::from_f64(&[2.0, 1.0], &[1.0, 1.0]).unwrap_err();
        assert_eq!(err, Error::NodesNotStrictlyIncreasing { index: 1 });
        assert_eq!(err.to_string(), "NodesNotStrictlyIncreasing at index 1");

        let err = SpectralPair::<f64>::from_f64(&[1.0, 2.0, 2.0, 1.0], &[1.0; 4]).unwrap_err();
        assert_eq!(err, Error::NodesNotStrictlyIncreasing { index: 2 });

        let err = SpectralPair::<f64>::from_f64(&[1.0, 2.0], &[1.0, 0.0]).unwrap_err();
        assert_eq!(err, Error::NonPositiveWeight { index: 1 });

        let err = SpectralPair::<f64>::from_f64(&[0.0, 2.0], &[1.0, 1.0]).unwrap_err();
        assert_eq!(err, Error::NonPositiveNode { index: 0 });

        let err = SpectralPair::<f64>::from_f64(&[1.0, f64::NAN], &[1.0, 1.0]).unwrap_err();
        assert_eq!(err, Error::NonFiniteValue { index: 1 });
    }

    #[test]
    fn shape_errors() {
        assert_eq!(
            SpectralPair::<f64>::from_f64(&[], &[]).unwrap_err(),
            Error::EmptyInput
        );
        assert_eq!(
            SpectralPair::<f64>::from_f64(&[1.0], &[1.0, 2.0]).unwrap_err(),
            Error::LengthMismatch {
                nodes: 1,
                weights: 2
            }
        );
    }

    #[test]
    fn near_coincident_nodes_rejected() {
        let a = 1.0 + 100.0 * f64::EPSILON;
        let err = SpectralPair::<f64>::from_f64(&[1.0, a], &[1.0, 1.0]).unwrap_err();
        assert_eq!(err, Error::NodesNotStrictlyIncreasing { index: 1 });
        // The same gap is comfortably resolved in double-double.
        assert!(SpectralPair::<DoubleDouble>::from_f64(&[1.0, a], &[1.0, 1.0]).is_ok());
    }

    #[test]
    fn weight_vectors() {
        let p = SpectralPair::<f64>::from_f64(&[1.0, 2.0], &[4.0, 9.0]).unwrap();
        assert_eq!(weight_vector(&p).as_slice(), &[2.0, 3.0]);
        assert_eq!(inverse_weight_vector(&p).as_slice(), &[2.0, 1.5]);
        let p = SpectralPair::<f64>::from_f64(&[5.0], &[1.0]).unwrap();
        assert_eq!(weight_vector(&p).as_slice(), &[1.0]);
    }
}
