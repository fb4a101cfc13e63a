//! Abstract state spaces `(A, u_A)`: an ordered vector space with a
//! generating cone of unnormalized states and a strictly positive order unit.

mod effects;
mod iso;
mod maps;

pub use effects::{is_effect, validate_observable, Effect, Observable, ObservableVerdict};
pub use iso::{
    cone_isomorphisms, find_cone_isomorphism, find_order_isomorphism, is_weakly_self_dual, WeakSelfDuality,
    DEFAULT_ISO_BUDGET,
};
pub use maps::{is_norm_contractive, is_positive_map, maps_cone_into, PositiveMap};

use std::f64::consts::PI;

use crate::error::{GptError, Result};
use crate::geometry::linalg::{dot, rank_of, scale, unit_vector, zeros, Vector};
use crate::geometry::lp::{LinearProgram, LpOutcome};
use crate::geometry::scalar::{frac, s, Scalar};
use crate::geometry::Cone;

#[derive(Clone, Debug)]
pub struct StateSpace<S: Scalar> {
    cone: Cone<S>,
    unit: Vector<S>,
    omega_vertices: Vec<Vector<S>>,
    label: String,
}

impl<S: Scalar> StateSpace<S> {
    /// Validates strict positivity of `unit` on every extreme ray and
    /// normalizes the rays into the vertices of the state polytope.
    pub fn new(label: impl Into<String>, cone: Cone<S>, unit: Vector<S>) -> Result<Self> {
        if unit.len() != cone.dim() {
            return Err(GptError::DimensionMismatch {
                expected: cone.dim(),
                got: unit.len(),
            });
        }
        let mut omega_vertices = Vec::with_capacity(cone.num_rays());
        for (i, r) in cone.rays().iter().enumerate() {
            let u = dot(&unit, r);
            if !u.is_pos() {
                return Err(GptError::UnitNotStrictlyPositive(i));
            }
            omega_vertices.push(scale(&(S::one() / u), r));
        }
        Ok(StateSpace {
            cone,
            unit,
            omega_vertices,
            label: label.into(),
        })
    }

    pub fn from_rays(label: impl Into<String>, rays: &[Vector<S>], unit: Vector<S>) -> Result<Self> {
        let cone = Cone::from_rays(unit.len(), rays)?;
        Self::new(label, cone, unit)
    }

    pub fn dim(&self) -> usize {
        self.cone.dim()
    }

    pub fn cone(&self) -> &Cone<S> {
        &self.cone
    }

    pub fn unit(&self) -> &[S] {
        &self.unit
    }

    /// Extreme points of the normalized-state polytope, aligned with `cone().rays()`.
    pub fn omega_vertices(&self) -> &[Vector<S>] {
        &self.omega_vertices
    }

    pub fn vertex(&self, i: usize) -> &[S] {
        &self.omega_vertices[i]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Average of the state-polytope vertices; an interior normalized state.
    pub fn barycenter(&self) -> Vector<S> {
        let k = self.omega_vertices.len() as i64;
        let mut acc = zeros(self.dim());
        for v in &self.omega_vertices {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x.clone();
            }
        }
        scale(&frac(1, k), &acc)
    }

    pub fn evaluate(&self, v: &[S]) -> S {
        dot(&self.unit, v)
    }

    pub fn is_normalized(&self, v: &[S]) -> bool {
        (self.evaluate(v) - S::one()).is_zero()
    }

    pub fn contains_state(&self, v: &[S]) -> bool {
        v.len() == self.dim() && self.is_normalized(v) && self.cone.contains_fast(v)
    }

    /// A state polytope is a simplex iff its vertices are linearly independent.
    pub fn is_simplex(&self) -> bool {
        self.omega_vertices.len() == rank_of(self.dim(), &self.omega_vertices)
    }

    /// The dual space `A*` with the dual cone; its unit is the barycenter
    /// of the state polytope, viewed as a functional on `A*`.
    pub fn dual_space(&self) -> StateSpace<S> {
        let unit = self.barycenter();
        StateSpace::new(format!("{}*", self.label), self.cone.dual(), unit)
            .expect("barycenter is interior, hence strictly positive on the dual cone")
    }

    /// The dual space with a caller-chosen interior unit.
    pub fn dual_space_with_unit(&self, unit: Vector<S>) -> Result<StateSpace<S>> {
        StateSpace::new(format!("{}*", self.label), self.cone.dual(), unit)
    }

    /// Direct sum: block cone, unit `u_A (+) u_B`.
    pub fn direct_sum(&self, other: &StateSpace<S>) -> Result<StateSpace<S>> {
        let (da, db) = (self.dim(), other.dim());
        let pad = |v: &[S], left: bool| -> Vector<S> {
            let mut out = zeros(da + db);
            let off = if left { 0 } else { da };
            for (i, x) in v.iter().enumerate() {
                out[off + i] = x.clone();
            }
            out
        };
        let mut rays: Vec<Vector<S>> = self.cone.rays().iter().map(|r| pad(r, true)).collect();
        rays.extend(other.cone.rays().iter().map(|r| pad(r, false)));
        let mut facets: Vec<Vector<S>> = self.cone.facets().iter().map(|f| pad(f, true)).collect();
        facets.extend(other.cone.facets().iter().map(|f| pad(f, false)));
        let cone = Cone::from_extreme_rays(da + db, &rays)?;
        debug_assert!(facets.iter().all(|f| rays.iter().all(|r| dot(f, r).is_nonneg())));
        let mut unit = self.unit.clone();
        unit.extend(other.unit.iter().cloned());
        StateSpace::new(format!("{}+{}", self.label, other.label), cone, unit)
    }
}

/// The classical system with `n` outcomes: orthant cone, unit = coordinate sum.
pub fn make_classical<S: Scalar>(n: usize) -> Result<StateSpace<S>> {
    if n == 0 {
        return Err(GptError::InvalidInput("classical system needs n >= 1".into()));
    }
    StateSpace::new(format!("classical({n})"), Cone::orthant(n)?, vec![S::one(); n])
}

/// Vertices of the regular `n`-gon, in angular order.
///
/// For `n` in {3, 4, 6} the vertices are given in a linearly equivalent frame
/// with rational coordinates (the square as `(±1, ±1)`, the triangle and
/// hexagon with the y axis rescaled by `2/sqrt(3)`), so the construction is
/// available in exact mode. Other `n` need floating mode.
pub fn polygon_vertices<S: Scalar>(n: usize) -> Result<Vec<[S; 2]>> {
    if n < 3 {
        return Err(GptError::InvalidInput(format!("polygon needs n >= 3, got {n}")));
    }
    let q = |a: i64, b: i64| -> S { frac(a, b) };
    let out = match n {
        3 => vec![[s(1), s(0)], [q(-1, 2), s(1)], [q(-1, 2), s(-1)]],
        4 => vec![[s(1), s(1)], [s(-1), s(1)], [s(-1), s(-1)], [s(1), s(-1)]],
        6 => vec![
            [s(1), s(0)],
            [q(1, 2), s(1)],
            [q(-1, 2), s(1)],
            [s(-1), s(0)],
            [q(-1, 2), s(-1)],
            [q(1, 2), s(-1)],
        ],
        _ => {
            let mut v = Vec::with_capacity(n);
            for k in 0..n {
                let t = 2.0 * PI * k as f64 / n as f64;
                let (x, y) = (S::from_f64(t.cos()), S::from_f64(t.sin()));
                match (x, y) {
                    (Some(x), Some(y)) => v.push([x, y]),
                    _ => return Err(GptError::NotRational(format!("polygon({n})"))),
                }
            }
            v
        }
    };
    Ok(out)
}

/// The regular-polygon state space: the cone over the `n`-gon at height 1,
/// unit = last coordinate.
pub fn make_polygon<S: Scalar>(n: usize) -> Result<StateSpace<S>> {
    let rays: Vec<Vector<S>> = polygon_vertices::<S>(n)?
        .into_iter()
        .map(|[x, y]| vec![x, y, S::one()])
        .collect();
    let cone = Cone::from_extreme_rays(3, &rays)?;
    StateSpace::new(format!("polygon({n})"), cone, unit_vector(3, 2))
}

/// Polygon state space from planar vertices in cyclic order, embedded at
/// height one.
pub fn polygon_from_vertices<S: Scalar>(label: impl Into<String>, vertices: &[[S; 2]]) -> Result<StateSpace<S>> {
    let rays: Vec<Vector<S>> = vertices
        .iter()
        .map(|[x, y]| vec![x.clone(), y.clone(), S::one()])
        .collect();
    let cone = Cone::from_extreme_rays(3, &rays)?;
    StateSpace::new(label, cone, unit_vector(3, 2))
}

/// The base norm `min { u(x) + u(y) : v = x - y, x, y in A_+ }`.
pub fn base_norm<S: Scalar>(space: &StateSpace<S>, v: &[S]) -> Result<S> {
    let d = space.dim();
    if v.len() != d {
        return Err(GptError::DimensionMismatch {
            expected: d,
            got: v.len(),
        });
    }
    let verts = space.omega_vertices();
    let k = verts.len();
    let mut lp = LinearProgram::nonneg(2 * k);
    for i in 0..d {
        let mut row: Vector<S> = verts.iter().map(|w| w[i].clone()).collect();
        row.extend(verts.iter().map(|w| -w[i].clone()));
        lp.eq(row, v[i].clone());
    }
    lp.minimize(vec![S::one(); 2 * k]);
    match lp.solve()? {
        LpOutcome::Optimal { value, .. } => Ok(value),
        // vertices span the space, so the program is feasible and bounded below by zero
        other => Err(GptError::Degenerate(format!("base norm program: {other:?}"))),
    }
}
