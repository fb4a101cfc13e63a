use crate::error::{GptError, Result};
use crate::geometry::linalg::{greedy_basis, nonneg_multiple, Matrix, Vector};
use crate::geometry::scalar::Scalar;
use crate::geometry::Cone;
use crate::statespace::PositiveMap;

/// One irreducible summand: the extreme rays it contains (indices into the
/// parent cone's rays) and a basis of its span drawn from those rays.
#[derive(Clone, Debug, PartialEq)]
pub struct Summand<S: Scalar> {
    pub rays: Vec<usize>,
    pub basis: Vec<Vector<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition<S: Scalar> {
    pub dim: usize,
    pub summands: Vec<Summand<S>>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// The finest splitting `V = V_1 (+) ... (+) V_k` with the cone the direct
/// sum of its slices. The summands are the connected components of the
/// linear matroid on the extreme rays: every non-basis ray is merged with
/// the basis rays in its expansion (its fundamental circuit).
pub fn irreducible_decomposition<S: Scalar>(cone: &Cone<S>) -> Result<Decomposition<S>> {
    let d = cone.dim();
    let rays = cone.rays();
    let basis = greedy_basis(d, rays);
    if basis.len() < d {
        return Err(GptError::NotGenerating);
    }
    let bm = Matrix::from_cols(d, &basis.iter().map(|&i| rays[i].clone()).collect::<Vec<_>>())?;
    let inv = bm.inverse().ok_or(GptError::NotGenerating)?;
    let mut parent: Vec<usize> = (0..rays.len()).collect();
    for (i, r) in rays.iter().enumerate() {
        if basis.contains(&i) {
            continue;
        }
        for (k, c) in inv.apply(r).iter().enumerate() {
            if !c.is_zero() {
                let (x, y) = (find(&mut parent, i), find(&mut parent, basis[k]));
                parent[x] = y;
            }
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut summands: Vec<Summand<S>> = Vec::new();
    for i in 0..rays.len() {
        let root = find(&mut parent, i);
        match roots.iter().position(|&r| r == root) {
            Some(k) => summands[k].rays.push(i),
            None => {
                roots.push(root);
                summands.push(Summand {
                    rays: vec![i],
                    basis: Vec::new(),
                });
            }
        }
    }
    for s in &mut summands {
        s.basis = s
            .rays
            .iter()
            .filter(|i| basis.contains(i))
            .map(|&i| rays[i].clone())
            .collect();
    }
    Ok(Decomposition { dim: d, summands })
}

/// The projections `id_i` onto each summand along the others.
pub fn nondisturbing_basis<S: Scalar>(cone: &Cone<S>) -> Result<Vec<PositiveMap<S>>> {
    let dec = irreducible_decomposition(cone)?;
    let d = dec.dim;
    let all: Vec<Vector<S>> = dec.summands.iter().flat_map(|s| s.basis.iter().cloned()).collect();
    let p = Matrix::from_cols(d, &all)?;
    let p_inv = p.inverse().ok_or(GptError::NotGenerating)?;
    let mut out = Vec::with_capacity(dec.summands.len());
    let mut offset = 0;
    for s in &dec.summands {
        let mut sel = Matrix::zeros(d, d);
        for k in offset..offset + s.basis.len() {
            sel[(k, k)] = S::one();
        }
        offset += s.basis.len();
        out.push(PositiveMap {
            matrix: p.mul(&sel).mul(&p_inv),
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Nondisturbance<S> {
    /// `T = sum_i constants[i] id_i`.
    Nondisturbing { constants: Vec<S> },
    /// An extreme ray not mapped to a nonnegative multiple of itself.
    MovesRay { ray: usize },
    /// Two rays of one summand scaled by different constants.
    UnequalScaling { summand: usize, rays: (usize, usize) },
}

impl<S> Nondisturbance<S> {
    pub fn is_nondisturbing(&self) -> bool {
        matches!(self, Nondisturbance::Nondisturbing { .. })
    }
}

/// Whether `t` leaves every pure state undisturbed: `T r = c r`, `c >= 0`,
/// for each extreme ray, with one constant per irreducible summand.
pub fn is_nondisturbing<S: Scalar>(cone: &Cone<S>, t: &Matrix<S>) -> Result<Nondisturbance<S>> {
    let d = cone.dim();
    if t.rows() != d || t.cols() != d {
        return Err(GptError::DimensionMismatch {
            expected: d,
            got: t.rows(),
        });
    }
    let rays = cone.rays();
    let mut scales = Vec::with_capacity(rays.len());
    for (i, r) in rays.iter().enumerate() {
        match nonneg_multiple(&t.apply(r), r) {
            Some(c) => scales.push(c),
            None => return Ok(Nondisturbance::MovesRay { ray: i }),
        }
    }
    let dec = irreducible_decomposition(cone)?;
    let mut constants = Vec::with_capacity(dec.summands.len());
    for (k, s) in dec.summands.iter().enumerate() {
        let first = s.rays[0];
        if let Some(&other) = s.rays.iter().find(|&&i| scales[i] != scales[first]) {
            return Ok(Nondisturbance::UnequalScaling {
                summand: k,
                rays: (first, other),
            });
        }
        constants.push(scales[first].clone());
    }
    Ok(Nondisturbance::Nondisturbing { constants })
}
