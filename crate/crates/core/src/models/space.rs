use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::cutoff::norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpaceKind {
    AllOfRd,
    OpenInterval { a: f64, b: f64 },
    OpenBox { lo: Vec<f64>, hi: Vec<f64> },
    PositiveHalfline,
}

/// Open state space `U ⊆ R^d` together with its compact exhaustion
/// `K_n = {x ∈ U : dist(x, U^c) ≥ 1/n, |x| ≤ n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpace {
    dim: usize,
    kind: SpaceKind,
}

impl StateSpace {
    pub fn all(dim: usize) -> Self {
        Self { dim, kind: SpaceKind::AllOfRd }
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::arg(format!("empty interval ({a}, {b})")));
        }
        Ok(Self { dim: 1, kind: SpaceKind::OpenInterval { a, b } })
    }

    pub fn open_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(Error::arg("open box needs matching, nonempty, ordered bounds"));
        }
        Ok(Self { dim: lo.len(), kind: SpaceKind::OpenBox { lo, hi } })
    }

    pub fn positive_halfline() -> Self {
        Self { dim: 1, kind: SpaceKind::PositiveHalfline }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    /// Euclidean distance to the complement; `+∞` for the whole space, `≤ 0` outside.
    pub fn dist_to_complement(&self, x: &[f64]) -> f64 {
        match &self.kind {
            SpaceKind::AllOfRd => f64::INFINITY,
            SpaceKind::OpenInterval { a, b } => (x[0] - a).min(b - x[0]),
            SpaceKind::OpenBox { lo, hi } => {
                x.iter().zip(lo.iter().zip(hi)).map(|(v, (l, h))| (v - l).min(h - v)).fold(f64::INFINITY, f64::min)
            }
            SpaceKind::PositiveHalfline => x[0],
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && x.iter().all(|v| v.is_finite()) && self.dist_to_complement(x) > 0.0
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain { point: x.to_vec(), space: self.label() })
        }
    }

    /// Smallest `n ≥ 1` with `x ∈ K_n`, as a float (`+∞` outside `U`).
    pub fn exhaustion_index(&self, x: &[f64]) -> f64 {
        if !self.contains(x) {
            return f64::INFINITY;
        }
        let inv_dist = 1.0 / self.dist_to_complement(x);
        norm(x).max(inv_dist).ceil().max(1.0)
    }

    pub fn in_exhaustion(&self, x: &[f64], n: f64) -> bool {
        self.exhaustion_index(x) <= n
    }

    pub fn label(&self) -> String {
        match &self.kind {
            SpaceKind::AllOfRd => format!("R^{}", self.dim),
            SpaceKind::OpenInterval { a, b } => format!("({a}, {b})"),
            SpaceKind::OpenBox { lo, hi } => format!("open box {lo:?} x {hi:?}"),
            SpaceKind::PositiveHalfline => "(0, inf)".to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn halfline_exhaustion() {
        let u = StateSpace::positive_halfline();
        assert!(!u.contains(&[0.0]));
        assert_eq!(u.exhaustion_index(&[1.0]), 1.0);
        assert_eq!(u.exhaustion_index(&[0.25]), 4.0);
        assert_eq!(u.exhaustion_index(&[7.5]), 8.0);
        assert!(u.in_exhaustion(&[0.5], 2.0));
        assert!(!u.in_exhaustion(&[0.49], 2.0));
    }

    #[test]
    fn domain_error_carries_point() {
        let u = StateSpace::interval(0.0, 1.0).unwrap();
        match u.check(&[2.0]) {
            Err(Error::Domain { point, .. }) => assert_eq!(point, vec![2.0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn box_distance() {
        let u = StateSpace::open_box(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap();
        assert!((u.dist_to_complement(&[1.0, 0.75]) - 0.25).abs() < 1e-15);
        assert!(!u.contains(&[1.0, 1.0]));
    }

    proptest! {
        #[test]
        fn exhaustion_is_nested(x in -50.0f64..50.0, n in 1u32..60) {
            for u in [StateSpace::all(1), StateSpace::positive_halfline(), StateSpace::interval(-3.0, 10.0).unwrap()] {
                if u.in_exhaustion(&[x], n as f64) {
                    prop_assert!(u.in_exhaustion(&[x], n as f64 + 1.0));
                    prop_assert!(u.dist_to_complement(&[x]) >= 1.0 / n as f64 && x.abs() <= n as f64);
                }
                if u.contains(&[x]) {
                    prop_assert!(u.exhaustion_index(&[x]).is_finite());
                }
            }
        }
    }
}
