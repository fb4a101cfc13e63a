use super::StateSpace;
use crate::error::{GptError, Result};
use crate::geometry::linalg::{dot, Matrix};
use crate::geometry::scalar::Scalar;
use crate::geometry::Cone;

/// A linear map carrying one cone into another. The matrix acts on column
/// vectors: `target = matrix * source`.
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveMap<S: Scalar> {
    pub matrix: Matrix<S>,
}

impl<S: Scalar> PositiveMap<S> {
    /// Wraps `matrix` after checking it maps `from` into `to`.
    pub fn checked(matrix: Matrix<S>, from: &Cone<S>, to: &Cone<S>) -> Result<Self> {
        if matrix.cols() != from.dim() || matrix.rows() != to.dim() {
            return Err(GptError::DimensionMismatch {
                expected: from.dim(),
                got: matrix.cols(),
            });
        }
        if !maps_cone_into(&matrix, from, to) {
            return Err(GptError::InvalidInput("map is not positive".into()));
        }
        Ok(PositiveMap { matrix })
    }

    pub fn identity(n: usize) -> Self {
        PositiveMap {
            matrix: Matrix::identity(n),
        }
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        self.matrix.apply(v)
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &PositiveMap<S>) -> PositiveMap<S> {
        PositiveMap {
            matrix: self.matrix.mul(&first.matrix),
        }
    }
}

/// Every extreme ray of `from` lands in `to` (sufficient by convexity).
pub fn maps_cone_into<S: Scalar>(t: &Matrix<S>, from: &Cone<S>, to: &Cone<S>) -> bool {
    t.cols() == from.dim() && t.rows() == to.dim() && from.rays().iter().all(|r| to.contains_fast(&t.apply(r)))
}

pub fn is_positive_map<S: Scalar>(t: &Matrix<S>, a: &StateSpace<S>, b: &StateSpace<S>) -> bool {
    maps_cone_into(t, a.cone(), b.cone())
}

/// `u_B(T rho) <= 1` on every vertex of the state polytope of `a`.
pub fn is_norm_contractive<S: Scalar>(t: &Matrix<S>, a: &StateSpace<S>, b: &StateSpace<S>) -> bool {
    t.cols() == a.dim()
        && t.rows() == b.dim()
        && a.omega_vertices()
            .iter()
            .all(|v| (S::one() - dot(b.unit(), &t.apply(v))).is_nonneg())
}
