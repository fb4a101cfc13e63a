//! Non-signaling composites of state spaces on the full tensor product
//! space, bipartite states as bilinear forms, and the conditional-state
//! operators built from them.
//!
//! Tensor coordinates are row-major: the basis vector `e_i (x) e_j` of
//! `A (x) B` has index `i * dim(B) + j`. Iterated composites flatten the
//! same way, so the order of association does not change coordinates.

mod state;

pub use state::{f_hat, is_separable, BipartiteState, Separability, Side};

use crate::error::{GptError, Result};
use crate::geometry::linalg::{dot, kron, Matrix, Vector};
use crate::geometry::scalar::Scalar;
use crate::geometry::Cone;
use crate::statespace::StateSpace;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompositeKind {
    Min,
    Max,
    Custom,
}

/// A composite `AB` of two factors, remembering the atomic parts it was
/// built from (more than two when a factor is itself a composite).
#[derive(Clone, Debug)]
pub struct CompositeSpace<S: Scalar> {
    space: StateSpace<S>,
    left: StateSpace<S>,
    right: StateSpace<S>,
    parts: Vec<StateSpace<S>>,
    kind: CompositeKind,
}

/// Either an atomic state space or an existing composite, as one side of a
/// new composite.
#[derive(Clone, Copy, Debug)]
pub enum Factor<'a, S: Scalar> {
    Atomic(&'a StateSpace<S>),
    Composite(&'a CompositeSpace<S>),
}

impl<'a, S: Scalar> From<&'a StateSpace<S>> for Factor<'a, S> {
    fn from(s: &'a StateSpace<S>) -> Self {
        Factor::Atomic(s)
    }
}

impl<'a, S: Scalar> From<&'a CompositeSpace<S>> for Factor<'a, S> {
    fn from(c: &'a CompositeSpace<S>) -> Self {
        Factor::Composite(c)
    }
}

impl<'a, S: Scalar> Factor<'a, S> {
    fn space(&self) -> &'a StateSpace<S> {
        match self {
            Factor::Atomic(s) => s,
            Factor::Composite(c) => &c.space,
        }
    }

    fn parts(&self) -> Vec<StateSpace<S>> {
        match self {
            Factor::Atomic(s) => vec![(*s).clone()],
            Factor::Composite(c) => c.parts.clone(),
        }
    }
}

fn products<S: Scalar>(xs: &[Vector<S>], ys: &[Vector<S>]) -> Vec<Vector<S>> {
    xs.iter().flat_map(|x| ys.iter().map(move |y| kron(x, y))).collect()
}

fn assemble<'a, S: Scalar>(
    kind: CompositeKind,
    label: String,
    cone: Cone<S>,
    a: Factor<'a, S>,
    b: Factor<'a, S>,
) -> Result<CompositeSpace<S>> {
    let (sa, sb) = (a.space(), b.space());
    let unit = kron(sa.unit(), sb.unit());
    let space = StateSpace::new(label, cone, unit)?;
    let mut parts = a.parts();
    parts.extend(b.parts());
    Ok(CompositeSpace {
        space,
        left: sa.clone(),
        right: sb.clone(),
        parts,
        kind,
    })
}

/// `A (x)min B`: generated by products of extreme rays.
pub fn min_tensor<'a, S: Scalar>(
    a: impl Into<Factor<'a, S>>,
    b: impl Into<Factor<'a, S>>,
) -> Result<CompositeSpace<S>> {
    let (a, b) = (a.into(), b.into());
    let (sa, sb) = (a.space(), b.space());
    let cone = Cone::from_extreme_rays(sa.dim() * sb.dim(), &products(sa.cone().rays(), sb.cone().rays()))?;
    assemble(
        CompositeKind::Min,
        format!("min({},{})", sa.label(), sb.label()),
        cone,
        a,
        b,
    )
}

/// `A (x)max B`: all bilinear forms positive on products of effects.
pub fn max_tensor<'a, S: Scalar>(
    a: impl Into<Factor<'a, S>>,
    b: impl Into<Factor<'a, S>>,
) -> Result<CompositeSpace<S>> {
    let (a, b) = (a.into(), b.into());
    let (sa, sb) = (a.space(), b.space());
    let facets = products(sa.cone().facets(), sb.cone().facets());
    let cone = Cone::from_facets(sa.dim() * sb.dim(), &facets)?;
    assemble(
        CompositeKind::Max,
        format!("max({},{})", sa.label(), sb.label()),
        cone,
        a,
        b,
    )
}

/// A caller-supplied composite cone; rejected unless it sits between the
/// minimal and maximal tensor cones.
pub fn custom_composite<'a, S: Scalar>(
    label: impl Into<String>,
    cone: Cone<S>,
    a: impl Into<Factor<'a, S>>,
    b: impl Into<Factor<'a, S>>,
) -> Result<CompositeSpace<S>> {
    let (a, b) = (a.into(), b.into());
    let (sa, sb) = (a.space(), b.space());
    if cone.dim() != sa.dim() * sb.dim() {
        return Err(GptError::DimensionMismatch {
            expected: sa.dim() * sb.dim(),
            got: cone.dim(),
        });
    }
    if !is_composite(&cone, sa, sb) {
        return Err(GptError::InvalidInput(
            "cone is not between the minimal and maximal tensor cones".into(),
        ));
    }
    assemble(CompositeKind::Custom, label.into(), cone, a, b)
}

/// `A (x)min B <= C <= A (x)max B`.
pub fn is_composite<S: Scalar>(c: &Cone<S>, a: &StateSpace<S>, b: &StateSpace<S>) -> bool {
    if c.dim() != a.dim() * b.dim() {
        return false;
    }
    let contains_min = products(a.cone().rays(), b.cone().rays())
        .iter()
        .all(|p| c.contains_fast(p));
    let within_max = c.rays().iter().all(|r| {
        a.cone()
            .facets()
            .iter()
            .all(|f| b.cone().facets().iter().all(|g| dot(&kron(f, g), r).is_nonneg()))
    });
    contains_min && within_max
}

impl<S: Scalar> CompositeSpace<S> {
    pub fn space(&self) -> &StateSpace<S> {
        &self.space
    }

    pub fn left(&self) -> &StateSpace<S> {
        &self.left
    }

    pub fn right(&self) -> &StateSpace<S> {
        &self.right
    }

    /// Atomic parts in tensor order.
    pub fn parts(&self) -> &[StateSpace<S>] {
        &self.parts
    }

    pub fn kind(&self) -> CompositeKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// The composite cone contracted with every product of extreme effects
    /// of the parts outside `keep`; the result lives on the tensor product
    /// of the kept parts (in their original order).
    pub fn conditional_state_space(&self, keep: &[usize]) -> Result<StateSpace<S>> {
        let n = self.parts.len();
        if keep.is_empty() || keep.iter().any(|&k| k >= n) {
            return Err(GptError::InvalidInput(format!(
                "part indices must be nonempty and < {n}"
            )));
        }
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        // all products of extreme effects on the traced-out parts, as contraction matrices
        let mut contractions: Vec<Matrix<S>> = vec![Matrix::identity(1)];
        for (k, part) in self.parts.iter().enumerate() {
            let pieces: Vec<Matrix<S>> = if kept.contains(&k) {
                vec![Matrix::identity(part.dim())]
            } else {
                part.cone()
                    .facets()
                    .iter()
                    .map(|f| Matrix::from_rows(std::slice::from_ref(f)))
                    .collect::<Result<_>>()?
            };
            contractions = contractions
                .iter()
                .flat_map(|m| pieces.iter().map(move |p| m.kron(p)))
                .collect();
        }
        let dim: usize = kept.iter().map(|&k| self.parts[k].dim()).product();
        let mut gens = Vec::new();
        for m in &contractions {
            for r in self.space.cone().rays() {
                let v = m.apply(r);
                if !v.iter().all(Scalar::is_zero) {
                    gens.push(v);
                }
            }
        }
        let cone = Cone::from_rays(dim, &gens)?;
        let unit = kept
            .iter()
            .fold(vec![S::one()], |acc, &k| kron(&acc, self.parts[k].unit()));
        let label = format!(
            "cond({};{})",
            self.space.label(),
            kept.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
        );
        StateSpace::new(label, cone, unit)
    }
}
