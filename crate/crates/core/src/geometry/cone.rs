//! Polyhedral cones with paired V- and H-representations.

use std::fmt;
use std::sync::OnceLock;

use super::dd::{extreme_rays, sort_rays};
use super::linalg::{dot, rank_of, same_ray, unit_vector, Vector};
use super::lp::{Feasibility, LinearProgram};
use super::scalar::Scalar;
use crate::error::{GptError, Result};

/// A pointed, generating polyhedral cone in `R^dim`.
///
/// At least one representation is present after construction; the other is
/// derived on first use by double description and then cached. Rays are
/// canonical generators of the extreme rays; facets are canonical
/// functionals `f` with `f . x >= 0` on the cone, one per facet.
#[derive(Clone)]
pub struct Cone<S> {
    dim: usize,
    rays: OnceLock<Vec<Vector<S>>>,
    facets: OnceLock<Vec<Vector<S>>>,
}

impl<S: Scalar> fmt::Debug for Cone<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Cone")
            .field("dim", &self.dim)
            .field("rays", &self.rays.get())
            .field("facets", &self.facets.get())
            .finish()
    }
}

/// Result of a membership query, with a certificate either way.
#[derive(Clone, Debug, PartialEq)]
pub enum Membership<S> {
    /// `v = sum_i coeffs[i] * rays[i]`, all coefficients nonnegative.
    Inside(Vector<S>),
    /// `witness . v < 0` while `witness . r >= 0` for every ray `r`.
    Outside(Vector<S>),
}

impl<S> Membership<S> {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside(_))
    }
}

fn canonical_dedup<S: Scalar>(dim: usize, vectors: &[Vector<S>]) -> Result<Vec<Vector<S>>> {
    let mut out: Vec<Vector<S>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        if v.len() != dim {
            return Err(GptError::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        if v.iter().all(Scalar::is_zero) {
            continue;
        }
        let mut c = v.clone();
        S::canonicalize_ray(&mut c);
        if !out.iter().any(|o| same_ray(o, &c)) {
            out.push(c);
        }
    }
    Ok(out)
}

/// Is there a functional strictly positive on every vector? (Pointedness for generators.)
fn has_strictly_positive_functional<S: Scalar>(dim: usize, vectors: &[Vector<S>]) -> Result<bool> {
    let mut lp = LinearProgram::free(dim);
    for v in vectors {
        lp.ge(v.clone(), S::one());
    }
    Ok(lp.feasibility()?.is_feasible())
}

/// Is `target` a nonnegative combination of `gens`?
fn in_conic_hull<S: Scalar>(dim: usize, gens: &[Vector<S>], target: &[S]) -> Result<bool> {
    let mut lp = LinearProgram::nonneg(gens.len());
    for i in 0..dim {
        lp.eq(gens.iter().map(|g| g[i].clone()).collect(), target[i].clone());
    }
    Ok(lp.feasibility()?.is_feasible())
}

impl<S: Scalar> Cone<S> {
    /// Cone generated by `rays`. Zero, duplicate and non-extreme generators
    /// are dropped; the survivors keep their input order.
    pub fn from_rays(dim: usize, rays: &[Vector<S>]) -> Result<Self> {
        let gens = canonical_dedup(dim, rays)?;
        Self::check_generators(dim, &gens)?;
        let mut extreme = Vec::with_capacity(gens.len());
        for (i, g) in gens.iter().enumerate() {
            let others: Vec<Vector<S>> = gens
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, x)| x.clone())
                .collect();
            if others.is_empty() || !in_conic_hull(dim, &others, g)? {
                extreme.push(g.clone());
            }
        }
        Ok(Cone {
            dim,
            rays: OnceLock::from(extreme),
            facets: OnceLock::new(),
        })
    }

    /// Cone generated by vectors already known to be pairwise distinct extreme
    /// rays (e.g. products of extreme rays). Only spanning and pointedness are checked.
    pub fn from_extreme_rays(dim: usize, rays: &[Vector<S>]) -> Result<Self> {
        let gens = canonical_dedup(dim, rays)?;
        Self::check_generators(dim, &gens)?;
        Ok(Cone {
            dim,
            rays: OnceLock::from(gens),
            facets: OnceLock::new(),
        })
    }

    fn check_generators(dim: usize, gens: &[Vector<S>]) -> Result<()> {
        if rank_of(dim, gens) < dim {
            return Err(GptError::NotGenerating);
        }
        if !has_strictly_positive_functional(dim, gens)? {
            return Err(GptError::NotPointed);
        }
        Ok(())
    }

    /// Cone `{x : f . x >= 0}`. Redundant inequalities are removed.
    pub fn from_facets(dim: usize, facets: &[Vector<S>]) -> Result<Self> {
        let fs = canonical_dedup(dim, facets)?;
        if rank_of(dim, &fs) < dim {
            return Err(GptError::NotPointed);
        }
        let rays = extreme_rays(&fs, dim).map_err(|e| match e {
            GptError::Degenerate(_) => GptError::NotGenerating,
            other => other,
        })?;
        let irredundant: Vec<Vector<S>> = fs
            .into_iter()
            .filter(|f| {
                let tight: Vec<Vector<S>> = rays.iter().filter(|r| dot(f, r).is_zero()).cloned().collect();
                rank_of(dim, &tight) + 1 == dim
            })
            .collect();
        Ok(Cone {
            dim,
            rays: OnceLock::from(rays),
            facets: OnceLock::from(irredundant),
        })
    }

    /// The nonnegative orthant of `R^n`.
    pub fn orthant(n: usize) -> Result<Self> {
        let basis: Vec<Vector<S>> = (0..n).map(|i| unit_vector(n, i)).collect();
        Ok(Cone {
            dim: n,
            rays: OnceLock::from(basis.clone()),
            facets: OnceLock::from(basis),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[Vector<S>] {
        self.rays.get_or_init(|| {
            let f = self.facets.get().expect("cone has a representation");
            extreme_rays(f, self.dim).expect("validated cone has extreme rays")
        })
    }

    pub fn facets(&self) -> &[Vector<S>] {
        self.facets.get_or_init(|| {
            let r = self.rays.get().expect("cone has a representation");
            let mut f = extreme_rays(r, self.dim).expect("validated cone has facets");
            sort_rays(&mut f);
            f
        })
    }

    pub fn num_rays(&self) -> usize {
        self.rays().len()
    }

    /// The dual cone `{f : f . x >= 0 for all x in self}`.
    pub fn dual(&self) -> Cone<S> {
        Cone {
            dim: self.dim,
            rays: OnceLock::from(self.facets().to_vec()),
            facets: OnceLock::from(self.rays().to_vec()),
        }
    }

    /// Membership by facet inequalities, no certificate.
    pub fn contains_fast(&self, v: &[S]) -> bool {
        self.facets().iter().all(|f| dot(f, v).is_nonneg())
    }

    /// Membership with a certificate in both directions.
    pub fn contains(&self, v: &[S]) -> Result<Membership<S>> {
        if v.len() != self.dim {
            return Err(GptError::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        let rays = self.rays();
        let mut lp = LinearProgram::nonneg(rays.len());
        for i in 0..self.dim {
            lp.eq(rays.iter().map(|r| r[i].clone()).collect(), v[i].clone());
        }
        match lp.feasibility()? {
            Feasibility::Feasible(x) => Ok(Membership::Inside(x)),
            Feasibility::Infeasible(cert) => Ok(Membership::Outside(cert.multipliers)),
        }
    }

    /// Same set of extreme rays up to positive scaling.
    pub fn same_rays(&self, other: &Cone<S>) -> bool {
        same_ray_set(self.rays(), other.rays())
    }

    /// Every ray of `self` lies in `other`.
    pub fn is_subcone_of(&self, other: &Cone<S>) -> bool {
        self.dim == other.dim && self.rays().iter().all(|r| other.contains_fast(r))
    }

    /// Pointed and generating, re-derived from the rays.
    pub fn is_pointed_and_generating(&self) -> Result<bool> {
        let r = self.rays();
        Ok(rank_of(self.dim, r) == self.dim && has_strictly_positive_functional(self.dim, r)?)
    }
}

/// Convenience wrapper matching the operation name used in reports.
pub fn dual_cone<S: Scalar>(c: &Cone<S>) -> Cone<S> {
    c.dual()
}

/// Equality of two finite ray sets up to positive scaling.
pub fn same_ray_set<S: Scalar>(a: &[Vector<S>], b: &[Vector<S>]) -> bool {
    a.len() == b.len()
        && a.iter().all(|x| b.iter().any(|y| same_ray(x, y)))
        && b.iter().all(|y| a.iter().any(|x| same_ray(x, y)))
}

/// Checks a membership certificate by substitution.
pub fn verify_membership<S: Scalar>(cone: &Cone<S>, v: &[S], m: &Membership<S>) -> bool {
    let rays = cone.rays();
    match m {
        Membership::Inside(c) => {
            c.len() == rays.len()
                && c.iter().all(Scalar::is_nonneg)
                && (0..cone.dim()).all(|i| {
                    let s: S = c.iter().zip(rays).map(|(ci, r)| ci.clone() * r[i].clone()).sum();
                    (s - v[i].clone()).is_zero()
                })
        }
        Membership::Outside(f) => {
            f.len() == cone.dim() && dot(f, v).is_neg() && rays.iter().all(|r| dot(f, r).is_nonneg())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::scalar::{s, Rat};

    fn v(xs: &[i64]) -> Vector<Rat> {
        xs.iter().map(|&x| s(x)).collect()
    }

    fn square() -> Cone<Rat> {
        Cone::from_rays(3, &[v(&[1, 1, 1]), v(&[-1, 1, 1]), v(&[-1, -1, 1]), v(&[1, -1, 1])]).unwrap()
    }

    #[test]
    fn square_dual_is_rotated_square() {
        let d = square().dual();
        let expected = vec![v(&[1, 0, 1]), v(&[0, 1, 1]), v(&[-1, 0, 1]), v(&[0, -1, 1])];
        assert!(same_ray_set(d.rays(), &expected));
        assert!(d.dual().same_rays(&square()));
    }

    #[test]
    fn orthant_is_self_dual() {
        let o = Cone::<Rat>::orthant(3).unwrap();
        assert!(o.dual().same_rays(&o));
    }

    #[test]
    fn membership_certificates() {
        let o = Cone::<Rat>::orthant(3).unwrap();
        let m = o.contains(&v(&[1, 2, 3])).unwrap();
        assert_eq!(m, Membership::Inside(v(&[1, 2, 3])));

        let sq = square();
        let out = sq.contains(&v(&[2, 0, 1])).unwrap();
        assert!(!out.is_inside());
        assert!(verify_membership(&sq, &v(&[2, 0, 1]), &out));

        let on_ray = sq.contains(&v(&[1, 1, 1])).unwrap();
        assert_eq!(on_ray, Membership::Inside(v(&[1, 0, 0, 0])));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(matches!(
            square().contains(&v(&[1, 1])),
            Err(GptError::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn non_extreme_generators_dropped() {
        let c = Cone::from_rays(2, &[v(&[1, 0]), v(&[1, 1]), v(&[0, 1]), v(&[2, 0])]).unwrap();
        assert_eq!(c.rays(), &[v(&[1, 0]), v(&[0, 1])]);
    }

    #[test]
    fn constructor_preconditions() {
        assert_eq!(
            Cone::from_rays(2, &[v(&[1, 0]), v(&[-1, 0]), v(&[0, 1])]).unwrap_err(),
            GptError::NotPointed
        );
        assert_eq!(
            Cone::from_rays(3, &[v(&[1, 0, 0]), v(&[0, 1, 0])]).unwrap_err(),
            GptError::NotGenerating
        );
        assert_eq!(
            Cone::<Rat>::from_facets(2, &[v(&[1, 0])]).unwrap_err(),
            GptError::NotPointed
        );
    }

    #[test]
    fn from_facets_drops_redundant_inequalities() {
        let c = Cone::from_facets(2, &[v(&[1, 0]), v(&[0, 1]), v(&[1, 1])]).unwrap();
        assert_eq!(c.facets().len(), 2);
    }
}
