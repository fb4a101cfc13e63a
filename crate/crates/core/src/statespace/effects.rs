use serde::{Deserialize, Serialize};

use super::StateSpace;
use crate::geometry::linalg::{dot, sub, zeros, Vector};
use crate::geometry::scalar::Scalar;

/// A functional `a` with `0 <= a <= u_A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Effect<S: Scalar>(pub Vector<S>);

impl<S: Scalar> Effect<S> {
    pub fn prob(&self, state: &[S]) -> S {
        dot(&self.0, state)
    }

    pub fn complement(&self, space: &StateSpace<S>) -> Effect<S> {
        Effect(sub(space.unit(), &self.0))
    }
}

/// A finite list of effects summing to the unit.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable<S: Scalar> {
    pub effects: Vec<Effect<S>>,
}

impl<S: Scalar> Observable<S> {
    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }
}

/// Outcome of [`validate_observable`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableVerdict<S> {
    pub valid: bool,
    /// `u_A - sum_i a_i`
    pub residual: Vector<S>,
    /// indices of entries that are not effects
    pub invalid_effects: Vec<usize>,
}

/// `0 <= a(rho) <= 1` on every vertex of the state polytope.
pub fn is_effect<S: Scalar>(space: &StateSpace<S>, a: &[S]) -> bool {
    a.len() == space.dim()
        && space.omega_vertices().iter().all(|v| {
            let p = dot(a, v);
            p.is_nonneg() && (S::one() - p).is_nonneg()
        })
}

pub fn validate_observable<S: Scalar>(space: &StateSpace<S>, effects: &[Vector<S>]) -> ObservableVerdict<S> {
    let mut total = zeros(space.dim());
    let mut invalid = Vec::new();
    for (i, a) in effects.iter().enumerate() {
        if !is_effect(space, a) {
            invalid.push(i);
        }
        if a.len() == space.dim() {
            for (t, x) in total.iter_mut().zip(a) {
                *t += x.clone();
            }
        }
    }
    let residual = sub(space.unit(), &total);
    let valid = !effects.is_empty() && invalid.is_empty() && residual.iter().all(Scalar::is_zero);
    ObservableVerdict {
        valid,
        residual,
        invalid_effects: invalid,
    }
}
