//! Exact/approximate kernel for polyhedral cones: scalars, dense linear
//! algebra, LP feasibility, double description and membership.

pub mod cone;
pub mod dd;
pub mod linalg;
pub mod lp;
pub mod scalar;

pub use cone::{dual_cone, same_ray_set, verify_membership, Cone, Membership};
pub use dd::{extreme_rays, rays_of_section};
pub use linalg::{Matrix, Vector};
pub use lp::{lp_feasible, FarkasCertificate, Feasibility, LinearProgram, LpOutcome, RowKind, VarKind};
pub use scalar::{eps, frac, s, set_eps, with_eps, Flt, Rat, Scalar, ScalarMode, DEFAULT_EPS};
