use crate::error::{GptError, Result};
use crate::geometry::linalg::{map_from_images, Matrix, Vector};
use crate::geometry::scalar::Scalar;
use crate::statespace::{is_positive_map, StateSpace};

/// The linear map sending vertex `k` of the state polytope to vertex `perm[k]`.
pub fn vertex_permutation_map<S: Scalar>(space: &StateSpace<S>, perm: &[usize]) -> Result<Matrix<S>> {
    let verts = space.omega_vertices();
    if perm.len() != verts.len() || perm.iter().any(|&p| p >= verts.len()) {
        return Err(GptError::InvalidInput("not a permutation of the vertices".into()));
    }
    let dst: Vec<Vector<S>> = perm.iter().map(|&p| verts[p].clone()).collect();
    map_from_images(space.dim(), space.dim(), verts, &dst)
        .ok_or_else(|| GptError::InvalidInput("vertex permutation is not induced by a linear map".into()))
}

/// All products of the generators, up to `limit` elements.
pub fn close_group<S: Scalar>(generators: &[Matrix<S>], limit: usize) -> Result<Vec<Matrix<S>>> {
    let Some(first) = generators.first() else {
        return Err(GptError::NotAGroup("no generators".into()));
    };
    let mut group = vec![Matrix::identity(first.rows())];
    let mut frontier = group.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for h in &frontier {
            for g in generators {
                let p = g.mul(h);
                if !group.contains(&p) {
                    if group.len() >= limit {
                        return Err(GptError::SearchBudgetExceeded(format!("group larger than {limit}")));
                    }
                    group.push(p.clone());
                    next.push(p);
                }
            }
        }
        frontier = next;
    }
    Ok(group)
}

/// Rotations of a polygon whose vertices are listed in cyclic order
/// (classical(2) gets the swap).
pub fn cyclic_group<S: Scalar>(space: &StateSpace<S>) -> Result<Vec<Matrix<S>>> {
    let n = space.omega_vertices().len();
    let shift: Vec<usize> = (0..n).map(|k| (k + 1) % n).collect();
    close_group(&[vertex_permutation_map(space, &shift)?], n)
}

/// Rotations and reflections of a polygon with cyclically ordered vertices.
pub fn dihedral_group<S: Scalar>(space: &StateSpace<S>) -> Result<Vec<Matrix<S>>> {
    let n = space.omega_vertices().len();
    let shift: Vec<usize> = (0..n).map(|k| (k + 1) % n).collect();
    let flip: Vec<usize> = (0..n).map(|k| (n - k) % n).collect();
    close_group(
        &[
            vertex_permutation_map(space, &shift)?,
            vertex_permutation_map(space, &flip)?,
        ],
        2 * n,
    )
}

/// Checks closure, inverses, positivity of every element and of its
/// inverse, and transitivity on the vertices of the state polytope.
pub fn check_group<S: Scalar>(space: &StateSpace<S>, group: &[Matrix<S>]) -> Result<()> {
    let d = space.dim();
    if group.is_empty() {
        return Err(GptError::NotAGroup("empty".into()));
    }
    for (i, g) in group.iter().enumerate() {
        if g.rows() != d || g.cols() != d {
            return Err(GptError::DimensionMismatch {
                expected: d,
                got: g.rows(),
            });
        }
        let inv = g
            .inverse()
            .ok_or_else(|| GptError::NotAGroup(format!("element {i} is singular")))?;
        if !is_positive_map(g, space, space) || !is_positive_map(&inv, space, space) {
            return Err(GptError::NotAGroup(format!("element {i} is not an order automorphism")));
        }
        if !group.contains(&inv) {
            return Err(GptError::NotAGroup(format!("inverse of element {i} missing")));
        }
        for (j, h) in group.iter().enumerate() {
            if !group.contains(&g.mul(h)) {
                return Err(GptError::NotAGroup(format!("product of elements {i} and {j} missing")));
            }
        }
    }
    let verts = space.omega_vertices();
    let reached = verts.iter().all(|v| group.iter().any(|g| g.apply(&verts[0]) == *v));
    if !reached {
        return Err(GptError::NotTransitive);
    }
    Ok(())
}
