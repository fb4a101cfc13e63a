//! Distinguishability, cloning and broadcasting, and the direct-sum
//! structure of cones that governs nondisturbing maps.

mod decomposition;

pub use decomposition::{
    irreducible_decomposition, is_nondisturbing, nondisturbing_basis, Decomposition, Nondisturbance, Summand,
};

use crate::error::{GptError, Result};
use crate::geometry::dd::rays_of_section;
use crate::geometry::linalg::{dot, kron, rank_of, scale, Matrix, Vector};
use crate::geometry::lp::{FarkasCertificate, Feasibility, LinearProgram};
use crate::geometry::scalar::Scalar;
use crate::statespace::{validate_observable, Effect, Observable, PositiveMap, StateSpace};

/// Default maximum size of a candidate simplex in the broadcast search.
pub const DEFAULT_SUBSET_BUDGET: usize = 8;

const MAX_SUBSETS: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Distinguishability<S: Scalar> {
    /// `effects[i](states[j]) = delta_ij`, summing to the unit.
    Distinguishable(Observable<S>),
    /// Infeasibility certificate of the distinguishing system built by
    /// [`distinguishing_program`].
    NotDistinguishable(FarkasCertificate<S>),
}

impl<S: Scalar> Distinguishability<S> {
    pub fn observable(&self) -> Option<&Observable<S>> {
        match self {
            Distinguishability::Distinguishable(o) => Some(o),
            Distinguishability::NotDistinguishable(_) => None,
        }
    }
}

fn check_states<S: Scalar>(space: &StateSpace<S>, states: &[Vector<S>]) -> Result<()> {
    for (i, s) in states.iter().enumerate() {
        if s.len() != space.dim() {
            return Err(GptError::DimensionMismatch {
                expected: space.dim(),
                got: s.len(),
            });
        }
        if !space.contains_state(s) {
            return Err(GptError::InvalidState(format!("state {i} is not a normalized state")));
        }
    }
    Ok(())
}

/// Variables: the `n` effects stacked (`n * dim` free entries). Rows:
/// nonnegativity on every state-polytope vertex, `sum a_i = u`, and
/// `a_i(states[j]) = delta_ij`.
pub fn distinguishing_program<S: Scalar>(space: &StateSpace<S>, states: &[Vector<S>]) -> LinearProgram<S> {
    let d = space.dim();
    let n = states.len();
    let mut lp = LinearProgram::free(n * d);
    let place = |i: usize, v: &[S]| -> Vector<S> {
        let mut row = vec![S::zero(); n * d];
        row[i * d..(i + 1) * d].clone_from_slice(v);
        row
    };
    for i in 0..n {
        for v in space.omega_vertices() {
            lp.ge(place(i, v), S::zero());
        }
    }
    for k in 0..d {
        let mut row = vec![S::zero(); n * d];
        for i in 0..n {
            row[i * d + k] = S::one();
        }
        lp.eq(row, space.unit()[k].clone());
    }
    for i in 0..n {
        for (j, s) in states.iter().enumerate() {
            lp.eq(place(i, s), if i == j { S::one() } else { S::zero() });
        }
    }
    lp
}

pub fn jointly_distinguishable<S: Scalar>(
    space: &StateSpace<S>,
    states: &[Vector<S>],
) -> Result<Distinguishability<S>> {
    check_states(space, states)?;
    if states.is_empty() {
        return Err(GptError::InvalidInput("no states given".into()));
    }
    let d = space.dim();
    Ok(match distinguishing_program(space, states).feasibility()? {
        Feasibility::Feasible(x) => Distinguishability::Distinguishable(Observable {
            effects: x.chunks(d).map(|c| Effect(c.to_vec())).collect(),
        }),
        Feasibility::Infeasible(cert) => Distinguishability::NotDistinguishable(cert),
    })
}

/// `phi(alpha) = sum_i a_i(alpha) states[i] (x) states[i]`, a map into
/// `A (x)min A` (tensor coordinates) that clones every listed state.
pub fn build_cloner<S: Scalar>(
    space: &StateSpace<S>,
    states: &[Vector<S>],
    obs: &Observable<S>,
) -> Result<PositiveMap<S>> {
    check_states(space, states)?;
    let effects: Vec<Vector<S>> = obs.effects.iter().map(|e| e.0.clone()).collect();
    if effects.len() != states.len() {
        return Err(GptError::ObservableMismatch(format!(
            "{} effects for {} states",
            effects.len(),
            states.len()
        )));
    }
    let verdict = validate_observable(space, &effects);
    if !verdict.valid {
        return Err(GptError::ObservableMismatch("effects do not form an observable".into()));
    }
    for (i, a) in effects.iter().enumerate() {
        for (j, s) in states.iter().enumerate() {
            let expected = if i == j { S::one() } else { S::zero() };
            if !(dot(a, s) - expected).is_zero() {
                return Err(GptError::ObservableMismatch(format!("effect {i} on state {j}")));
            }
        }
    }
    Ok(PositiveMap {
        matrix: sum_of_outers(space.dim(), states, &effects),
    })
}

fn sum_of_outers<S: Scalar>(d: usize, states: &[Vector<S>], effects: &[Vector<S>]) -> Matrix<S> {
    let mut m = Matrix::zeros(d * d, d);
    for (s, a) in states.iter().zip(effects) {
        m = m.add(&Matrix::outer(&kron(s, s), a));
    }
    m
}

#[derive(Clone, Debug, PartialEq)]
pub enum Broadcast<S: Scalar> {
    Broadcastable {
        /// Jointly distinguishable states whose hull contains every target.
        simplex: Vec<Vector<S>>,
        observable: Observable<S>,
        broadcaster: PositiveMap<S>,
    },
    NotBroadcastable {
        /// Number of candidate vertices considered.
        candidates: usize,
        /// Largest simplex size tried.
        max_size: usize,
    },
}

impl<S: Scalar> Broadcast<S> {
    pub fn is_broadcastable(&self) -> bool {
        matches!(self, Broadcast::Broadcastable { .. })
    }
}

/// Barycentric coordinates of `x` over linearly independent normalized
/// `pts`, if `x` is in their hull.
fn hull_coords<S: Scalar>(pts: &[Vector<S>], x: &[S]) -> Option<Vector<S>> {
    let m = Matrix::from_cols(x.len(), pts).ok()?;
    let aug: Vec<Vector<S>> = pts.iter().cloned().chain(std::iter::once(x.to_vec())).collect();
    if rank_of(x.len(), &aug) > pts.len() {
        return None;
    }
    // the system has a unique solution; recover it through the normal equations
    let mt = m.transpose();
    let lam = mt.mul(&m).solve(&mt.apply(x))?;
    lam.iter().all(Scalar::is_nonneg).then_some(lam)
}

fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) -> bool {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return false;
    }
    loop {
        if f(&idx) {
            return true;
        }
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Searches for jointly distinguishable states `S` with `gamma` inside
/// `conv(S)`. Candidates are the vertices of the state polytope (all of
/// them exposed, the polytope being finite), the targets themselves, and
/// `extra` (in that order); subsets are tried by increasing size, then
/// lexicographically, so the result is deterministic.
pub fn is_broadcastable<S: Scalar>(
    space: &StateSpace<S>,
    gamma: &[Vector<S>],
    extra: &[Vector<S>],
    budget: usize,
) -> Result<Broadcast<S>> {
    check_states(space, gamma)?;
    check_states(space, extra)?;
    let mut cands: Vec<Vector<S>> = Vec::new();
    for v in space.omega_vertices().iter().chain(gamma).chain(extra) {
        if !cands.iter().any(|c| crate::geometry::linalg::vec_eq(c, v)) {
            cands.push(v.clone());
        }
    }
    // distinguishable states are linearly independent
    let max_size = space.dim().min(cands.len());
    let limit = max_size.min(budget);
    let mut found = None;
    let mut visited = 0usize;
    for k in 1..=limit {
        visited = visited.saturating_add(binomial(cands.len(), k));
        if visited > MAX_SUBSETS {
            return Err(GptError::SearchBudgetExceeded(format!(
                "more than {MAX_SUBSETS} candidate subsets"
            )));
        }
        let mut err = None;
        let hit = combinations(cands.len(), k, |idx| {
            let pts: Vec<Vector<S>> = idx.iter().map(|&i| cands[i].clone()).collect();
            if rank_of(space.dim(), &pts) < k || !gamma.iter().all(|g| hull_coords(&pts, g).is_some()) {
                return false;
            }
            match jointly_distinguishable(space, &pts) {
                Ok(Distinguishability::Distinguishable(obs)) => {
                    found = Some((pts, obs));
                    true
                }
                Ok(_) => false,
                Err(e) => {
                    err = Some(e);
                    true
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if hit {
            break;
        }
    }
    match found {
        Some((simplex, observable)) => {
            let broadcaster = build_cloner(space, &simplex, &observable)?;
            Ok(Broadcast::Broadcastable {
                simplex,
                observable,
                broadcaster,
            })
        }
        None if limit < max_size => Err(GptError::SearchBudgetExceeded(format!(
            "simplices of up to {max_size} vertices possible, budget allows {limit}"
        ))),
        None => Ok(Broadcast::NotBroadcastable {
            candidates: cands.len(),
            max_size: limit,
        }),
    }
}

/// The states broadcast by `phi`, described by the vertices of the polytope.
#[derive(Clone, Debug, PartialEq)]
pub struct BroadcastSet<S: Scalar> {
    pub vertices: Vec<Vector<S>>,
    /// The vertices are linearly independent (vacuously true when empty).
    pub is_simplex: bool,
    /// The vertices are jointly distinguishable (vacuously true when empty).
    pub distinguishable: bool,
}

/// Marginal maps `A (x) A -> A` of `phi`, as matrices acting on `A`.
pub fn marginal_maps<S: Scalar>(space: &StateSpace<S>, phi: &Matrix<S>) -> (Matrix<S>, Matrix<S>) {
    let d = space.dim();
    let eye = Matrix::identity(d);
    let u = Matrix::from_rows(&[space.unit().to_vec()]).expect("unit row");
    (eye.kron(&u).mul(phi), u.kron(&eye).mul(phi))
}

/// `{alpha in Omega : both marginals of phi(alpha) equal alpha}`.
pub fn broadcast_set_of_map<S: Scalar>(space: &StateSpace<S>, phi: &PositiveMap<S>) -> Result<BroadcastSet<S>> {
    let d = space.dim();
    if phi.matrix.rows() != d * d || phi.matrix.cols() != d {
        return Err(GptError::DimensionMismatch {
            expected: d * d,
            got: phi.matrix.rows(),
        });
    }
    let (ma, mb) = marginal_maps(space, &phi.matrix);
    let eye = Matrix::identity(d);
    let mut eqs = ma.sub(&eye).row_vectors();
    eqs.extend(mb.sub(&eye).row_vectors());
    let rays = rays_of_section(d, space.cone().facets(), &eqs)?;
    let vertices: Vec<Vector<S>> = rays
        .iter()
        .map(|r| scale(&(S::one() / dot(space.unit(), r)), r))
        .collect();
    let is_simplex = rank_of(d, &vertices) == vertices.len();
    let distinguishable = vertices.is_empty()
        || matches!(
            jointly_distinguishable(space, &vertices)?,
            Distinguishability::Distinguishable(_)
        );
    Ok(BroadcastSet {
        vertices,
        is_simplex,
        distinguishable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::linalg::add;
    use crate::geometry::scalar::{frac, s, Flt, Rat};
    use crate::statespace::{make_classical, make_polygon};

    fn mid(a: &[Rat], b: &[Rat]) -> Vector<Rat> {
        scale(&frac(1, 2), &add(a, b))
    }

    #[test]
    fn classical_vertices_are_distinguishable() {
        let c3 = make_classical::<Rat>(3).unwrap();
        let verts = c3.omega_vertices().to_vec();
        let obs = jointly_distinguishable(&c3, &verts).unwrap();
        let obs = obs.observable().unwrap();
        for (i, a) in obs.effects.iter().enumerate() {
            for (j, v) in verts.iter().enumerate() {
                assert_eq!(a.prob(v), if i == j { s(1) } else { s(0) });
            }
        }
    }

    #[test]
    fn square_pairs_but_not_all_four() {
        let sq = make_polygon::<Rat>(4).unwrap();
        let v = sq.omega_vertices().to_vec();
        assert!(jointly_distinguishable(&sq, &[v[0].clone(), v[2].clone()])
            .unwrap()
            .observable()
            .is_some());
        assert!(jointly_distinguishable(&sq, &[v[0].clone(), v[1].clone()])
            .unwrap()
            .observable()
            .is_some());
        let lp = distinguishing_program(&sq, &v);
        match jointly_distinguishable(&sq, &v).unwrap() {
            Distinguishability::NotDistinguishable(cert) => assert!(cert.verify(&lp)),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn pentagon_adjacent_vertices_are_not_distinguishable() {
        let p = make_polygon::<Flt>(5).unwrap();
        let v = p.omega_vertices().to_vec();
        assert!(jointly_distinguishable(&p, &[v[0].clone(), v[1].clone()])
            .unwrap()
            .observable()
            .is_none());
        assert!(jointly_distinguishable(&p, &[v[0].clone(), v[2].clone()])
            .unwrap()
            .observable()
            .is_some());
    }

    #[test]
    fn cloner_on_opposite_square_vertices() {
        let sq = make_polygon::<Rat>(4).unwrap();
        let pair = vec![sq.vertex(0).to_vec(), sq.vertex(2).to_vec()];
        let obs = jointly_distinguishable(&sq, &pair)
            .unwrap()
            .observable()
            .unwrap()
            .clone();
        let phi = build_cloner(&sq, &pair, &obs).unwrap();
        for p in &pair {
            assert_eq!(phi.apply(p), kron(p, p));
        }
        let m = mid(&pair[0], &pair[1]);
        let expected = mid(&kron(&pair[0], &pair[0]), &kron(&pair[1], &pair[1]));
        assert_eq!(phi.apply(&m), expected);
        assert_ne!(phi.apply(&m), kron(&m, &m));
        let wrong = Observable {
            effects: vec![Effect(sq.unit().to_vec())],
        };
        assert!(matches!(
            build_cloner(&sq, &pair, &wrong),
            Err(GptError::ObservableMismatch(_))
        ));
    }

    #[test]
    fn broadcast_search_examples() {
        let sq = make_polygon::<Rat>(4).unwrap();
        let (v0, v1, v2) = (sq.vertex(0).to_vec(), sq.vertex(1).to_vec(), sq.vertex(2).to_vec());
        let seg = vec![v0.clone(), mid(&v0, &v2), v2.clone()];
        match is_broadcastable(&sq, &seg, &[], DEFAULT_SUBSET_BUDGET).unwrap() {
            Broadcast::Broadcastable { simplex, .. } => assert_eq!(simplex, vec![v0.clone(), v2.clone()]),
            other => panic!("{other:?}"),
        }
        let tri = vec![v0.clone(), v1, v2];
        assert!(!is_broadcastable(&sq, &tri, &[], DEFAULT_SUBSET_BUDGET)
            .unwrap()
            .is_broadcastable());
        let centre = vec![s(0), s(0), s(1)];
        match is_broadcastable(&sq, std::slice::from_ref(&centre), &[], DEFAULT_SUBSET_BUDGET).unwrap() {
            Broadcast::Broadcastable {
                simplex, broadcaster, ..
            } => {
                assert_eq!(simplex, vec![centre.clone()]);
                assert_eq!(broadcaster.apply(&v0), kron(&centre, &centre));
            }
            other => panic!("{other:?}"),
        }
        let c4 = make_classical::<Rat>(4).unwrap();
        let all = c4.omega_vertices().to_vec();
        assert!(is_broadcastable(&c4, &all, &[], DEFAULT_SUBSET_BUDGET)
            .unwrap()
            .is_broadcastable());
        assert!(matches!(
            is_broadcastable(&c4, &all, &[], 2),
            Err(GptError::SearchBudgetExceeded(_))
        ));
    }

    #[test]
    fn broadcast_sets_of_maps() {
        let sq = make_polygon::<Rat>(4).unwrap();
        let pair = vec![sq.vertex(0).to_vec(), sq.vertex(2).to_vec()];
        let obs = jointly_distinguishable(&sq, &pair)
            .unwrap()
            .observable()
            .unwrap()
            .clone();
        let phi = build_cloner(&sq, &pair, &obs).unwrap();
        let set = broadcast_set_of_map(&sq, &phi).unwrap();
        assert!(crate::geometry::same_ray_set(&set.vertices, &pair));
        assert!(set.is_simplex && set.distinguishable);

        let rho = sq.vertex(1).to_vec();
        // alpha -> alpha (x) rho
        let mut m = Matrix::zeros(9, 3);
        for i in 0..3 {
            for j in 0..3 {
                m[(i * 3 + j, i)] = rho[j].clone();
            }
        }
        let set = broadcast_set_of_map(&sq, &PositiveMap { matrix: m }).unwrap();
        assert_eq!(set.vertices, vec![rho]);

        let c3 = make_classical::<Rat>(3).unwrap();
        let verts = c3.omega_vertices().to_vec();
        let obs = jointly_distinguishable(&c3, &verts)
            .unwrap()
            .observable()
            .unwrap()
            .clone();
        let phi = build_cloner(&c3, &verts, &obs).unwrap();
        let set = broadcast_set_of_map(&c3, &phi).unwrap();
        assert!(crate::geometry::same_ray_set(&set.vertices, &verts));
    }
}
