//! Teleportation through `A (x)min (B (x)max A)`: Alice holds the input
//! system `A` and the `B` half of a shared state `omega`; Bob holds the
//! output copy of `A`. Conditioning `alpha (x) omega` on an effect `f` of
//! `A (x) B` leaves Bob with the unnormalized state `mu(alpha)`, where
//! `mu = omega_hat . f_hat`.

mod groups;

pub use groups::{check_group, close_group, cyclic_group, dihedral_group, vertex_permutation_map};

use crate::composite::{f_hat, BipartiteState};
use crate::error::{GptError, Result};
use crate::geometry::linalg::{dot, kron, Matrix, Vector};
use crate::geometry::scalar::Scalar;
use crate::geometry::Cone;
use crate::statespace::{
    cone_isomorphisms, find_cone_isomorphism, is_norm_contractive, is_positive_map, is_weakly_self_dual,
    maps_cone_into, StateSpace,
};

/// `0 <= f(alpha (x) beta) <= 1` on all vertex pairs: an effect on `A (x)min B`.
pub fn is_min_effect<S: Scalar>(f: &[S], a: &StateSpace<S>, b: &StateSpace<S>) -> bool {
    f.len() == a.dim() * b.dim()
        && a.omega_vertices().iter().all(|x| {
            b.omega_vertices().iter().all(|y| {
                let p = dot(f, &kron(x, y));
                p.is_nonneg() && (S::one() - p).is_nonneg()
            })
        })
}

/// `mu = omega_hat . f_hat : A -> A` for `f` on `A (x) B` and `omega` on `B (x) A`.
pub fn mu_map<S: Scalar>(
    a: &StateSpace<S>,
    b: &StateSpace<S>,
    f: &[S],
    omega: &BipartiteState<S>,
) -> Result<Matrix<S>> {
    let fh = f_hat(f, a, b)?;
    Ok(omega.omega_hat().matrix.mul(&fh.matrix))
}

fn check_shared_state<S: Scalar>(omega: &BipartiteState<S>) -> Result<()> {
    if !omega.is_normalized() {
        return Err(GptError::InvalidState("shared state is not normalized".into()));
    }
    if !omega.is_positive_on_products() {
        return Err(GptError::InvalidState(
            "shared state is negative on a product effect".into(),
        ));
    }
    Ok(())
}

/// Outcome of [`verify_conclusive`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConclusiveVerdict<S: Scalar> {
    pub verified: bool,
    /// first vertex where `tau(mu(alpha)) != |mu(alpha)| eta(alpha)`
    pub failing_vertex: Option<usize>,
    /// success probability `u(mu(alpha))` per vertex
    pub success: Vec<S>,
    pub min_success: S,
    pub max_success: S,
    pub mu: Matrix<S>,
}

/// Checks `(tau . mu)(alpha) = |mu(alpha)| eta(alpha)` on every vertex of
/// the input state polytope, with one strictly positive success
/// probability shared by all vertices. The right side is quadratic in
/// `alpha` unless `u . mu` is constant on states, and a vertex-dependent
/// success probability breaks the identity at mixtures, so the two checks
/// together cover every state.
pub fn verify_conclusive<S: Scalar>(
    a: &StateSpace<S>,
    b: &StateSpace<S>,
    f: &[S],
    omega: &BipartiteState<S>,
    tau: &Matrix<S>,
    eta: &Matrix<S>,
) -> Result<ConclusiveVerdict<S>> {
    if !is_min_effect(f, a, b) {
        return Err(GptError::InvalidEffect("f is not an effect on A (x)min B".into()));
    }
    check_shared_state(omega)?;
    if !is_positive_map(tau, a, a) || !is_norm_contractive(tau, a, a) {
        return Err(GptError::CorrectionNotContractive("conclusive correction".into()));
    }
    let mu = mu_map(a, b, f, omega)?;
    let mut success = Vec::new();
    let mut failing_vertex = None;
    for (k, alpha) in a.omega_vertices().iter().enumerate() {
        let out = mu.apply(alpha);
        let p = a.evaluate(&out);
        let lhs = tau.apply(&out);
        let rhs: Vector<S> = eta.apply(alpha).into_iter().map(|x| x * p.clone()).collect();
        let same = success.first().is_none_or(|p0: &S| *p0 == p);
        if failing_vertex.is_none() && (!p.is_pos() || !same || lhs != rhs) {
            failing_vertex = Some(k);
        }
        success.push(p);
    }
    let min_success = success.iter().cloned().fold(S::one(), |m, p| m.min_tol(p));
    let max_success = success.iter().cloned().fold(S::zero(), |m, p| m.max_tol(p));
    Ok(ConclusiveVerdict {
        verified: failing_vertex.is_none(),
        failing_vertex,
        success,
        min_success,
        max_success,
        mu,
    })
}

/// A conclusive protocol from an order isomorphism `omega_hat : B* -> A`:
/// `f_hat` is the largest multiple of `omega_hat^{-1}` that is an effect,
/// so `mu` is a multiple of the identity and the correction is the identity.
pub fn conclusive_from_isomorphism<S: Scalar>(
    a: &StateSpace<S>,
    b: &StateSpace<S>,
    omega_hat: &Matrix<S>,
) -> Result<(Vector<S>, BipartiteState<S>)> {
    let omega = BipartiteState::new(omega_hat.transpose(), b, a)?;
    let inv = omega_hat
        .inverse()
        .ok_or_else(|| GptError::InvalidState("omega_hat is not invertible".into()))?;
    // f_hat = c * inv : A -> B*, so f = vec((c * inv)^T)
    let raw: Vector<S> = inv.transpose().as_slice().to_vec();
    let mut top = S::zero();
    for x in a.omega_vertices() {
        for y in b.omega_vertices() {
            top = top.max_tol(dot(&raw, &kron(x, y)));
        }
    }
    if !top.is_pos() {
        return Err(GptError::InvalidEffect("inverse of omega_hat is not positive".into()));
    }
    let f = raw.into_iter().map(|x| x / top.clone()).collect();
    Ok((f, omega))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompressionVerdict {
    pub idempotent: bool,
    pub positive: bool,
}

impl CompressionVerdict {
    pub fn is_compression(&self) -> bool {
        self.idempotent && self.positive
    }
}

/// `P . P = P` and `P` maps the dual cone of `b` into itself.
pub fn compression_check<S: Scalar>(b: &StateSpace<S>, p: &Matrix<S>) -> Result<CompressionVerdict> {
    let d = b.dim();
    if p.rows() != d || p.cols() != d {
        return Err(GptError::DimensionMismatch {
            expected: d,
            got: p.rows(),
        });
    }
    let dual = b.cone().dual();
    Ok(CompressionVerdict {
        idempotent: p.mul(p) == *p,
        positive: maps_cone_into(p, &dual, &dual),
    })
}

/// An order isomorphism from `A` onto the range of the compression `P`
/// (with the cone `P(B*_+)`), returned as a map `A -> B*`.
pub fn range_iso_check<S: Scalar>(
    a: &StateSpace<S>,
    b: &StateSpace<S>,
    p: &Matrix<S>,
    budget: usize,
) -> Result<Option<Matrix<S>>> {
    let d = b.dim();
    let cols: Vec<Vector<S>> = (0..d).map(|c| p.col(c)).collect();
    let basis_idx = crate::geometry::linalg::greedy_basis(d, &cols);
    let r = basis_idx.len();
    if r != a.dim() {
        return Ok(None);
    }
    let basis: Vec<Vector<S>> = basis_idx.iter().map(|&i| cols[i].clone()).collect();
    let rm = Matrix::from_cols(d, &basis)?;
    let gram = rm.transpose().mul(&rm);
    let coords: Vec<Vector<S>> = b
        .cone()
        .dual()
        .rays()
        .iter()
        .filter_map(|ray| {
            let img = p.apply(ray);
            gram.solve(&rm.transpose().apply(&img))
        })
        .collect();
    let range_cone = Cone::from_rays(r, &coords)?;
    Ok(find_cone_isomorphism(a.cone(), &range_cone, budget)?.map(|t| rm.mul(&t)))
}

/// A deterministic protocol: one effect on `A (x) B` and one correction
/// on `A` per outcome, plus the shared state on `B (x) A`.
#[derive(Clone, Debug)]
pub struct TeleportScheme<S: Scalar> {
    pub a: StateSpace<S>,
    pub b: StateSpace<S>,
    pub effects: Vec<Vector<S>>,
    pub omega: BipartiteState<S>,
    pub corrections: Vec<Matrix<S>>,
    /// identification of the input system with Bob's copy
    pub eta: Matrix<S>,
    /// group elements the scheme was built from (empty otherwise)
    pub group: Vec<Matrix<S>>,
}

/// Outcome of [`verify_deterministic`].
#[derive(Clone, Debug, PartialEq)]
pub struct DeterministicVerdict<S> {
    pub verified: bool,
    /// first failing outcome and the reason
    pub failure: Option<(usize, String)>,
    /// `probabilities[k][i]`: probability of outcome `i` on vertex `k`
    pub probabilities: Vec<Vec<S>>,
}

/// Checks that the effects form an observable on `A (x)min B`, the shared
/// state is valid, and for every outcome `i` the map `mu_i` is invertible
/// with `tau_i` positive, norm-contractive and satisfying
/// `tau_i(mu_i(alpha)) = |mu_i(alpha)| eta(alpha)` on all vertices, with
/// the outcome probability independent of the vertex.
pub fn verify_deterministic<S: Scalar>(scheme: &TeleportScheme<S>) -> Result<DeterministicVerdict<S>> {
    let (a, b) = (&scheme.a, &scheme.b);
    check_shared_state(&scheme.omega)?;
    let n = scheme.effects.len();
    let mut total = vec![S::zero(); a.dim() * b.dim()];
    for (i, f) in scheme.effects.iter().enumerate() {
        if !is_min_effect(f, a, b) {
            return Err(GptError::InvalidEffect(format!("outcome {i}")));
        }
        for (t, x) in total.iter_mut().zip(f) {
            *t += x.clone();
        }
    }
    if total != kron(a.unit(), b.unit()) {
        return Err(GptError::NotObservable(
            "effects do not sum to the composite unit".into(),
        ));
    }
    if scheme.corrections.len() != n {
        return Err(GptError::InvalidInput(format!(
            "{} corrections for {n} outcomes",
            scheme.corrections.len()
        )));
    }
    let verts = a.omega_vertices();
    let mut probabilities = vec![Vec::with_capacity(n); verts.len()];
    let mut failure = None;
    for (i, (f, tau)) in scheme.effects.iter().zip(&scheme.corrections).enumerate() {
        let mu = mu_map(a, b, f, &scheme.omega)?;
        let fail = |why: &str| Some((i, why.to_string()));
        let mut why = None;
        if mu.inverse().is_none() {
            why = fail("f_hat . omega_hat is not invertible");
        } else if !is_positive_map(tau, a, a) {
            why = fail("correction is not positive");
        } else if !is_norm_contractive(tau, a, a) {
            why = fail("correction is not norm-contractive");
        }
        for (k, alpha) in verts.iter().enumerate() {
            let out = mu.apply(alpha);
            let p = a.evaluate(&out);
            let rhs: Vector<S> = scheme.eta.apply(alpha).into_iter().map(|x| x * p.clone()).collect();
            if why.is_none() && tau.apply(&out) != rhs {
                why = Some((i, format!("vertex {k} is not recovered")));
            }
            if why.is_none() && probabilities[0].get(i).is_some_and(|p0| *p0 != p) {
                why = Some((i, format!("probability on vertex {k} differs from vertex 0")));
            }
            probabilities[k].push(p);
        }
        if failure.is_none() {
            failure = why;
        }
    }
    if failure.is_none() {
        for (k, row) in probabilities.iter().enumerate() {
            let sum = row.iter().cloned().fold(S::zero(), |acc, p| acc + p);
            if !(sum - S::one()).is_zero() {
                failure = Some((0, format!("outcome probabilities on vertex {k} do not sum to 1")));
                break;
            }
        }
    }
    Ok(DeterministicVerdict {
        verified: failure.is_none(),
        failure,
        probabilities,
    })
}

/// `g omega_hat g^T = omega_hat` for every group element (the dual action
/// on `A*` being `g^{-T}`).
pub fn is_equivariant<S: Scalar>(omega_hat: &Matrix<S>, group: &[Matrix<S>]) -> bool {
    group.iter().all(|g| g.mul(omega_hat).mul(&g.transpose()) == *omega_hat)
}

/// Searches the order isomorphisms `A* -> A` for a `G`-equivariant one
/// with `omega_hat(u_A)` the barycenter. Each candidate is averaged over the
/// group, which keeps it inside its ray bijection when one exists there.
pub fn find_equivariant_omega_hat<S: Scalar>(
    space: &StateSpace<S>,
    group: &[Matrix<S>],
    budget: usize,
) -> Result<Option<Matrix<S>>> {
    let dual = space.cone().dual();
    let bary = space.barycenter();
    let d = space.dim();
    let order = S::from_i64(group.len() as i64);
    for t in cone_isomorphisms(&dual, space.cone(), budget, 10_000)? {
        let avg = group
            .iter()
            .fold(Matrix::zeros(d, d), |acc, g| acc.add(&g.mul(&t).mul(&g.transpose())))
            .scaled(&(S::one() / order.clone()));
        let norm = dot(space.unit(), &avg.apply(space.unit()));
        if !norm.is_pos() {
            continue;
        }
        let cand = avg.scaled(&(S::one() / norm));
        if cand.apply(space.unit()) != bary || !is_equivariant(&cand, group) {
            continue;
        }
        if let Some(inv) = cand.inverse() {
            if maps_cone_into(&cand, &dual, space.cone()) && maps_cone_into(&inv, space.cone(), &dual) {
                return Ok(Some(cand));
            }
        }
    }
    Ok(None)
}

/// `f_hat_g = (1/|G|) omega_hat^{-1} . g` with corrections `g^{-1}`.
/// Verifies the group, the equivariant isomorphism and the resulting
/// protocol before returning it.
pub fn build_deterministic_from_group<S: Scalar>(
    space: &StateSpace<S>,
    group: &[Matrix<S>],
    omega_hat: &Matrix<S>,
) -> Result<TeleportScheme<S>> {
    check_group(space, group)?;
    let d = space.dim();
    let dual = space.cone().dual();
    let inv = omega_hat
        .inverse()
        .ok_or_else(|| GptError::NotEquivariant("omega_hat is singular".into()))?;
    if !maps_cone_into(omega_hat, &dual, space.cone()) || !maps_cone_into(&inv, space.cone(), &dual) {
        return Err(GptError::NotEquivariant(
            "omega_hat is not an order isomorphism A* -> A".into(),
        ));
    }
    if !is_equivariant(omega_hat, group) {
        return Err(GptError::NotEquivariant("g omega_hat g^T != omega_hat".into()));
    }
    let omega = BipartiteState::new(omega_hat.transpose(), space, space)?;
    if !omega.is_normalized() {
        return Err(GptError::NotEquivariant("omega(u, u) != 1".into()));
    }
    let scale = S::one() / S::from_i64(group.len() as i64);
    let mut effects = Vec::with_capacity(group.len());
    let mut corrections = Vec::with_capacity(group.len());
    for g in group {
        let fh = inv.mul(g).scaled(&scale);
        effects.push(fh.transpose().as_slice().to_vec());
        corrections.push(g.inverse().expect("group elements were checked invertible"));
    }
    let total = effects.iter().fold(vec![S::zero(); d * d], |acc: Vector<S>, f| {
        acc.iter().zip(f).map(|(x, y)| x.clone() + y.clone()).collect()
    });
    if total != kron(space.unit(), space.unit()) {
        return Err(GptError::NotObservable(
            "sum of f_g differs from the composite unit".into(),
        ));
    }
    let scheme = TeleportScheme {
        a: space.clone(),
        b: space.clone(),
        effects,
        omega,
        corrections,
        eta: Matrix::identity(d),
        group: group.to_vec(),
    };
    let verdict = verify_deterministic(&scheme)?;
    if let Some((i, why)) = verdict.failure {
        return Err(GptError::CorrectionNotContractive(format!("outcome {i}: {why}")));
    }
    Ok(scheme)
}

/// Consistency of "teleportable through a copy of itself implies weakly
/// self-dual" on one space.
#[derive(Clone, Debug, PartialEq)]
pub struct NecessityReport<S: Scalar> {
    pub weakly_self_dual: bool,
    pub protocol_found: bool,
    /// `omega_hat` of the first verified protocol
    pub witness: Option<Matrix<S>>,
    /// order isomorphisms `A* -> A` tried as `omega_hat`
    pub candidates: usize,
}

impl<S: Scalar> NecessityReport<S> {
    pub fn consistent(&self) -> bool {
        self.weakly_self_dual || !self.protocol_found
    }
}

/// Exhaustive search for a conclusive protocol through a copy of `A`
/// (`B = A`), alongside the weak self-duality verdict.
///
/// If `mu = omega_hat . f_hat` has a positive inverse then `omega_hat`
/// maps `A*_+` onto `A_+`, so it is an order isomorphism and permutes
/// extreme rays; `f_hat` is then a positive multiple of its inverse up to
/// an automorphism. Every ray bijection admitting such a map is therefore
/// tried, each candidate is turned into `(f, omega)` and checked with
/// [`verify_conclusive`].
pub fn weak_self_duality_necessity<S: Scalar>(space: &StateSpace<S>, budget: usize) -> Result<NecessityReport<S>> {
    let weakly_self_dual = is_weakly_self_dual(space, budget)?.weakly_self_dual;
    let d = space.dim();
    let isos = cone_isomorphisms(&space.cone().dual(), space.cone(), budget, 10_000)?;
    let mut witness = None;
    for t in &isos {
        let norm = dot(space.unit(), &t.apply(space.unit()));
        if !norm.is_pos() {
            continue;
        }
        let wh = t.scaled(&(S::one() / norm));
        let Ok((f, omega)) = conclusive_from_isomorphism(space, space, &wh) else {
            continue;
        };
        let id = Matrix::identity(d);
        if verify_conclusive(space, space, &f, &omega, &id, &id).is_ok_and(|v| v.verified) {
            witness = Some(wh);
            break;
        }
    }
    Ok(NecessityReport {
        weakly_self_dual,
        protocol_found: witness.is_some(),
        witness,
        candidates: isos.len(),
    })
}
