use super::CompositeSpace;
use crate::error::{GptError, Result};
use crate::geometry::linalg::{dot, kron, scale, zeros, Matrix, Vector};
use crate::geometry::lp::{Feasibility, LinearProgram};
use crate::geometry::scalar::Scalar;
use crate::statespace::{PositiveMap, StateSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// A bilinear form `omega(a, b) = a^T M b` on `A* x B*`, with `M` of shape
/// `dim(A) x dim(B)`.
#[derive(Clone, Debug)]
pub struct BipartiteState<S: Scalar> {
    matrix: Matrix<S>,
    a: StateSpace<S>,
    b: StateSpace<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Separability<S> {
    /// `omega = sum w * alpha_i (x) beta_j` over vertex pairs `(i, j, w)`.
    Separable { weights: Vec<(usize, usize, S)> },
    /// A functional on `A (x) B`, nonnegative on every product state and
    /// negative on `omega`.
    Entangled { witness: Vector<S> },
}

impl<S> Separability<S> {
    pub fn is_separable(&self) -> bool {
        matches!(self, Separability::Separable { .. })
    }
}

impl<S: Scalar> BipartiteState<S> {
    pub fn new(matrix: Matrix<S>, a: &StateSpace<S>, b: &StateSpace<S>) -> Result<Self> {
        if matrix.rows() != a.dim() {
            return Err(GptError::DimensionMismatch {
                expected: a.dim(),
                got: matrix.rows(),
            });
        }
        if matrix.cols() != b.dim() {
            return Err(GptError::DimensionMismatch {
                expected: b.dim(),
                got: matrix.cols(),
            });
        }
        Ok(BipartiteState {
            matrix,
            a: a.clone(),
            b: b.clone(),
        })
    }

    /// Reads a vector in tensor coordinates of `A (x) B`.
    pub fn from_vector(v: &[S], a: &StateSpace<S>, b: &StateSpace<S>) -> Result<Self> {
        if v.len() != a.dim() * b.dim() {
            return Err(GptError::DimensionMismatch {
                expected: a.dim() * b.dim(),
                got: v.len(),
            });
        }
        Self::new(Matrix::from_flat(a.dim(), b.dim(), v.to_vec())?, a, b)
    }

    pub fn in_composite(v: &[S], c: &CompositeSpace<S>) -> Result<Self> {
        Self::from_vector(v, c.left(), c.right())
    }

    pub fn product(alpha: &[S], beta: &[S], a: &StateSpace<S>, b: &StateSpace<S>) -> Result<Self> {
        Self::from_vector(&kron(alpha, beta), a, b)
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.matrix
    }

    pub fn factors(&self) -> (&StateSpace<S>, &StateSpace<S>) {
        (&self.a, &self.b)
    }

    pub fn to_vector(&self) -> Vector<S> {
        self.matrix.as_slice().to_vec()
    }

    /// `omega(a, b)`.
    pub fn value(&self, ea: &[S], eb: &[S]) -> S {
        dot(ea, &self.matrix.apply(eb))
    }

    pub fn is_normalized(&self) -> bool {
        (self.value(self.a.unit(), self.b.unit()) - S::one()).is_zero()
    }

    /// Nonnegative on all pairs of extreme effects.
    pub fn is_positive_on_products(&self) -> bool {
        self.a
            .cone()
            .facets()
            .iter()
            .all(|f| self.b.cone().facets().iter().all(|g| self.value(f, g).is_nonneg()))
    }

    pub fn marginal(&self, side: Side) -> Vector<S> {
        match side {
            Side::A => self.matrix.apply(self.b.unit()),
            Side::B => self.matrix.apply_left(self.a.unit()),
        }
    }

    /// Conditions on the effect `e` of the `side` factor; returns the
    /// normalized conditional state of the other factor and the probability
    /// of `e`. A zero-probability effect yields the zero vector and 0.
    pub fn conditional(&self, e: &[S], side: Side) -> (Vector<S>, S) {
        let (raw, other) = match side {
            Side::A => (self.matrix.apply_left(e), &self.b),
            Side::B => (self.matrix.apply(e), &self.a),
        };
        let p = dot(other.unit(), &raw);
        if p.is_zero() {
            return (zeros(other.dim()), S::zero());
        }
        (scale(&(S::one() / p.clone()), &raw), p)
    }

    /// `omega_hat : A* -> B`, `omega_hat(a)(b) = omega(a, b)`.
    pub fn omega_hat(&self) -> PositiveMap<S> {
        PositiveMap {
            matrix: self.matrix.transpose(),
        }
    }

    /// Decides membership in the minimal tensor cone by an LP over products
    /// of state-polytope vertices.
    pub fn separability(&self) -> Result<Separability<S>> {
        let va = self.a.omega_vertices();
        let vb = self.b.omega_vertices();
        let pairs: Vec<(usize, usize)> = (0..va.len()).flat_map(|i| (0..vb.len()).map(move |j| (i, j))).collect();
        let cols: Vec<Vector<S>> = pairs.iter().map(|&(i, j)| kron(&va[i], &vb[j])).collect();
        let target = self.to_vector();
        let mut lp = LinearProgram::nonneg(cols.len());
        for (k, t) in target.iter().enumerate() {
            lp.eq(cols.iter().map(|c| c[k].clone()).collect(), t.clone());
        }
        Ok(match lp.feasibility()? {
            Feasibility::Feasible(x) => Separability::Separable {
                weights: pairs
                    .into_iter()
                    .zip(x)
                    .filter(|(_, w)| !w.is_zero())
                    .map(|((i, j), w)| (i, j, w))
                    .collect(),
            },
            Feasibility::Infeasible(cert) => Separability::Entangled {
                witness: cert.multipliers,
            },
        })
    }
}

/// `f_hat : A -> B*`, `f_hat(alpha)(beta) = f(alpha (x) beta)`, for a
/// functional `f` on `A (x) B` in tensor coordinates.
pub fn f_hat<S: Scalar>(f: &[S], a: &StateSpace<S>, b: &StateSpace<S>) -> Result<PositiveMap<S>> {
    if f.len() != a.dim() * b.dim() {
        return Err(GptError::DimensionMismatch {
            expected: a.dim() * b.dim(),
            got: f.len(),
        });
    }
    Ok(PositiveMap {
        matrix: Matrix::from_flat(a.dim(), b.dim(), f.to_vec())?.transpose(),
    })
}

/// Separability of `omega` relative to the factors of `c`.
pub fn is_separable<S: Scalar>(c: &CompositeSpace<S>, omega: &BipartiteState<S>) -> Result<Separability<S>> {
    let (a, b) = omega.factors();
    if a.dim() != c.left().dim() || b.dim() != c.right().dim() {
        return Err(GptError::DimensionMismatch {
            expected: c.dim(),
            got: a.dim() * b.dim(),
        });
    }
    omega.separability()
}
