//! Order-isomorphism search between polyhedral cones.
//!
//! Any order isomorphism of polyhedral cones permutes extreme rays, so the
//! search enumerates ray bijections that preserve ray/facet incidence
//! counts and, for each, solves for a linear map sending every ray to a
//! positive multiple of its partner.

use super::{PositiveMap, StateSpace};
use crate::error::{GptError, Result};
use crate::geometry::linalg::{dot, greedy_basis, same_ray, Matrix, Vector};
use crate::geometry::lp::{Feasibility, LinearProgram};
use crate::geometry::scalar::Scalar;
use crate::geometry::Cone;

/// Default limit on the number of extreme rays for the bijection search.
pub const DEFAULT_ISO_BUDGET: usize = 12;

const NODE_BUDGET: usize = 5_000_000;

fn incidence<S: Scalar>(cone: &Cone<S>) -> Vec<Vec<bool>> {
    let facets = cone.facets();
    cone.rays()
        .iter()
        .map(|r| facets.iter().map(|f| dot(f, r).is_zero()).collect())
        .collect()
}

fn shared_counts(inc: &[Vec<bool>]) -> Vec<Vec<usize>> {
    inc.iter()
        .map(|a| {
            inc.iter()
                .map(|b| a.iter().zip(b).filter(|(x, y)| **x && **y).count())
                .collect()
        })
        .collect()
}

struct Search<'a, S> {
    dim: usize,
    src: &'a [Vector<S>],
    dst: &'a [Vector<S>],
    order: Vec<usize>,
    basis: Vec<usize>,
    /// coordinates of every source ray in the chosen source basis
    coords: Vec<Vector<S>>,
    basis_inv: Matrix<S>,
    ca: Vec<Vec<usize>>,
    cb: Vec<Vec<usize>>,
    sigma: Vec<usize>,
    used: Vec<bool>,
    nodes: usize,
    found: Vec<Matrix<S>>,
    max_results: usize,
}

impl<S: Scalar> Search<'_, S> {
    fn run(&mut self, depth: usize) -> Result<()> {
        if self.found.len() >= self.max_results {
            return Ok(());
        }
        self.nodes += 1;
        if self.nodes > NODE_BUDGET {
            return Err(GptError::SearchBudgetExceeded(format!(
                "more than {NODE_BUDGET} partial ray bijections"
            )));
        }
        let k = self.src.len();
        if depth == k {
            if let Some(t) = self.solve_leaf()? {
                self.found.push(t);
            }
            return Ok(());
        }
        let i = self.order[depth];
        for cand in 0..k {
            if self.used[cand] || self.ca[i][i] != self.cb[cand][cand] {
                continue;
            }
            let consistent = self.order[..depth]
                .iter()
                .all(|&j| self.ca[i][j] == self.cb[cand][self.sigma[j]]);
            if !consistent {
                continue;
            }
            self.sigma[i] = cand;
            self.used[cand] = true;
            self.run(depth + 1)?;
            self.used[cand] = false;
            if self.found.len() >= self.max_results {
                break;
            }
        }
        Ok(())
    }

    /// Unknowns: scale `lambda_j` of each basis image and `kappa_m` of every
    /// other image; all must be strictly positive.
    fn solve_leaf(&self) -> Result<Option<Matrix<S>>> {
        let d = self.dim;
        let k = self.src.len();
        let others: Vec<usize> = (0..k).filter(|m| !self.basis.contains(m)).collect();
        let nvar = d + others.len();
        let mut rows = Vec::new();
        for (oi, &m) in others.iter().enumerate() {
            for coord in 0..d {
                let mut row = vec![S::zero(); nvar];
                for (j, &b) in self.basis.iter().enumerate() {
                    row[j] = self.coords[m][j].clone() * self.dst[self.sigma[b]][coord].clone();
                }
                row[d + oi] = -self.dst[self.sigma[m]][coord].clone();
                rows.push(row);
            }
        }
        let null: Vec<Vector<S>> = if rows.is_empty() {
            (0..nvar)
                .map(|i| crate::geometry::linalg::unit_vector(nvar, i))
                .collect()
        } else {
            Matrix::from_rows(&rows)?.nullspace()
        };
        if null.is_empty() {
            return Ok(None);
        }
        let basis_m = Matrix::from_cols(nvar, &null)?;
        let mut lp = LinearProgram::free(null.len());
        for r in 0..nvar {
            lp.ge(basis_m.row(r), S::one());
        }
        let Feasibility::Feasible(t) = lp.feasibility()? else {
            return Ok(None);
        };
        let z = basis_m.apply(&t);
        let images: Vec<Vector<S>> = self
            .basis
            .iter()
            .enumerate()
            .map(|(j, &b)| {
                self.dst[self.sigma[b]]
                    .iter()
                    .map(|x| x.clone() * z[j].clone())
                    .collect()
            })
            .collect();
        let t_map = Matrix::from_cols(d, &images)?.mul(&self.basis_inv);
        let ok = (0..k).all(|m| same_ray(&t_map.apply(&self.src[m]), &self.dst[self.sigma[m]]));
        Ok((ok && t_map.inverse().is_some()).then_some(t_map))
    }
}

/// Up to `max_results` linear order isomorphisms from `a` onto `b`
/// (distinct ray bijections; each map is determined up to the solver's scaling).
pub fn cone_isomorphisms<S: Scalar>(
    a: &Cone<S>,
    b: &Cone<S>,
    budget: usize,
    max_results: usize,
) -> Result<Vec<Matrix<S>>> {
    if a.dim() != b.dim() || a.num_rays() != b.num_rays() || a.facets().len() != b.facets().len() {
        return Ok(Vec::new());
    }
    let k = a.num_rays();
    if k > budget {
        return Err(GptError::SearchBudgetExceeded(format!(
            "{k} extreme rays exceeds the isomorphism-search limit of {budget}"
        )));
    }
    let d = a.dim();
    let src = a.rays();
    let basis = greedy_basis(d, src);
    let bm = Matrix::from_cols(d, &basis.iter().map(|&i| src[i].clone()).collect::<Vec<_>>())?;
    let basis_inv = bm.inverse().ok_or(GptError::NotGenerating)?;
    let coords: Vec<Vector<S>> = src.iter().map(|r| basis_inv.apply(r)).collect();
    let mut order = basis.clone();
    order.extend((0..k).filter(|i| !basis.contains(i)));
    let ca = shared_counts(&incidence(a));
    let cb = shared_counts(&incidence(b));
    let mut search = Search {
        dim: d,
        src,
        dst: b.rays(),
        order,
        basis,
        coords,
        basis_inv,
        ca,
        cb,
        sigma: vec![0; k],
        used: vec![false; k],
        nodes: 0,
        found: Vec::new(),
        max_results,
    };
    search.run(0)?;
    Ok(search.found)
}

pub fn find_cone_isomorphism<S: Scalar>(a: &Cone<S>, b: &Cone<S>, budget: usize) -> Result<Option<Matrix<S>>> {
    Ok(cone_isomorphisms(a, b, budget, 1)?.into_iter().next())
}

/// An invertible positive map `A -> B` with positive inverse, if one exists.
pub fn find_order_isomorphism<S: Scalar>(
    a: &StateSpace<S>,
    b: &StateSpace<S>,
    budget: usize,
) -> Result<Option<PositiveMap<S>>> {
    Ok(find_cone_isomorphism(a.cone(), b.cone(), budget)?.map(|matrix| PositiveMap { matrix }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakSelfDuality<S: Scalar> {
    pub weakly_self_dual: bool,
    /// An order isomorphism `A -> A*` when one was found.
    pub isomorphism: Option<Matrix<S>>,
}

pub fn is_weakly_self_dual<S: Scalar>(a: &StateSpace<S>, budget: usize) -> Result<WeakSelfDuality<S>> {
    let dual = a.dual_space();
    let iso = find_order_isomorphism(a, &dual, budget)?;
    Ok(WeakSelfDuality {
        weakly_self_dual: iso.is_some(),
        isomorphism: iso.map(|m| m.matrix),
    })
}
