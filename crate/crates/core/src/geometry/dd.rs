//! Incremental double description: extreme rays of `{x : a_i . x >= 0}`.

use std::cmp::Ordering;

use super::linalg::{dot, greedy_basis, rank_of, Matrix, Vector};
use super::lp::{Feasibility, LinearProgram};
use super::scalar::Scalar;
use crate::error::{GptError, Result};

/// Fixed-width bitset over constraint indices.
#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn contains(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & b == *b)
    }
}

struct Ray<S> {
    v: Vector<S>,
    zeros: Bits,
}

/// Extreme rays of the pointed, full-dimensional cone `{x : a . x >= 0 for a in constraints}`,
/// one canonical generator per ray, in a deterministic order.
///
/// Fails with [`GptError::Degenerate`] when the cone contains a line or has empty interior.
pub fn extreme_rays<S: Scalar>(constraints: &[Vector<S>], dim: usize) -> Result<Vec<Vector<S>>> {
    if dim == 0 {
        return Err(GptError::Degenerate("zero-dimensional space".into()));
    }
    if let Some(bad) = constraints.iter().find(|c| c.len() != dim) {
        return Err(GptError::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    let basis = greedy_basis(dim, constraints);
    if basis.len() < dim {
        return Err(GptError::Degenerate(
            "constraint system does not define a pointed cone".into(),
        ));
    }
    let n = constraints.len();
    let rows: Vec<Vector<S>> = basis.iter().map(|&i| constraints[i].clone()).collect();
    let inv = Matrix::from_rows(&rows)?
        .inverse()
        .ok_or_else(|| GptError::Degenerate("singular basis".into()))?;

    let mut rays: Vec<Ray<S>> = (0..dim)
        .map(|k| {
            let mut v = inv.col(k);
            S::canonicalize_ray(&mut v);
            let mut zeros = Bits::new(n);
            for (j, &b) in basis.iter().enumerate() {
                if j != k {
                    zeros.set(b);
                }
            }
            Ray { v, zeros }
        })
        .collect();

    for (idx, a) in constraints.iter().enumerate() {
        if basis.contains(&idx) {
            continue;
        }
        let vals: Vec<S> = rays.iter().map(|r| dot(a, &r.v)).collect();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (i, v) in vals.iter().enumerate() {
            if v.is_pos() {
                pos.push(i);
            } else if v.is_neg() {
                neg.push(i);
            } else {
                rays[i].zeros.set(idx);
            }
        }
        if neg.is_empty() {
            continue;
        }
        let mut fresh = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common = rays[p].zeros.and(&rays[q].zeros);
                if common.count() + 2 < dim {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(k, r)| k != p && k != q && r.zeros.contains(&common));
                if blocked {
                    continue;
                }
                let mut v: Vector<S> = rays[q]
                    .v
                    .iter()
                    .zip(&rays[p].v)
                    .map(|(xq, xp)| vals[p].clone() * xq.clone() - vals[q].clone() * xp.clone())
                    .collect();
                S::canonicalize_ray(&mut v);
                let mut zeros = common;
                zeros.set(idx);
                fresh.push(Ray { v, zeros });
            }
        }
        let mut keep = vec![true; rays.len()];
        for &q in &neg {
            keep[q] = false;
        }
        let mut next: Vec<Ray<S>> = rays.into_iter().zip(keep).filter_map(|(r, k)| k.then_some(r)).collect();
        next.extend(fresh);
        rays = next;
    }

    let mut out: Vec<Vector<S>> = rays.into_iter().map(|r| r.v).collect();
    if rank_of(dim, &out) < dim {
        return Err(GptError::Degenerate("constraint system has empty interior".into()));
    }
    sort_rays(&mut out);
    Ok(out)
}

/// Lexicographic descending order, tolerance-aware.
pub fn sort_rays<S: Scalar>(rays: &mut [Vector<S>]) {
    rays.sort_by(|a, b| lex_cmp(b, a));
}

pub fn lex_cmp<S: Scalar>(a: &[S], b: &[S]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp_tol(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Extreme rays of `{x : g . x >= 0, e . x = 0}` for a pointed cone of any
/// dimension, including `{0}` (returns no rays). Implicit equalities among
/// the inequalities are detected by LP and folded into the subspace.
pub fn rays_of_section<S: Scalar>(
    dim: usize,
    inequalities: &[Vector<S>],
    equalities: &[Vector<S>],
) -> Result<Vec<Vector<S>>> {
    // subspace basis W (dim x k)
    let w = subspace_basis(dim, equalities)?;
    let k = w.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let wm = Matrix::from_cols(dim, &w)?;
    let reduced: Vec<Vector<S>> = inequalities.iter().map(|g| wm.apply_left(g)).collect();

    // implicit equalities: g . t >= 1 infeasible together with G t >= 0
    let mut implicit = Vec::new();
    let mut strict = Vec::new();
    for g in &reduced {
        if g.iter().all(Scalar::is_zero) {
            continue;
        }
        let mut lp = LinearProgram::free(k);
        for h in &reduced {
            lp.ge(h.clone(), S::zero());
        }
        lp.ge(g.clone(), S::one());
        match lp.feasibility()? {
            Feasibility::Feasible(_) => strict.push(g.clone()),
            Feasibility::Infeasible(_) => implicit.push(g.clone()),
        }
    }
    let w2 = subspace_basis(k, &implicit)?;
    let k2 = w2.len();
    if k2 == 0 {
        return Ok(Vec::new());
    }
    let w2m = Matrix::from_cols(k, &w2)?;
    let inner: Vec<Vector<S>> = strict.iter().map(|g| w2m.apply_left(g)).collect();
    if rank_of(k2, &inner) < k2 {
        return Err(GptError::Degenerate("section contains a line".into()));
    }
    let lifted = wm.mul(&w2m);
    let mut out: Vec<Vector<S>> = extreme_rays(&inner, k2)?
        .into_iter()
        .map(|s| {
            let mut v = lifted.apply(&s);
            S::canonicalize_ray(&mut v);
            v
        })
        .collect();
    sort_rays(&mut out);
    Ok(out)
}

/// Basis of `{x : e . x = 0 for all e}`.
pub fn subspace_basis<S: Scalar>(dim: usize, equalities: &[Vector<S>]) -> Result<Vec<Vector<S>>> {
    if equalities.is_empty() {
        return Ok((0..dim).map(|i| super::linalg::unit_vector(dim, i)).collect());
    }
    Ok(Matrix::from_rows(equalities)?.nullspace())
}
