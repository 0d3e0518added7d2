//! Isotropic measures on the sphere and the volume inequalities for the
//! bodies they span: construction, polytope geometry, transport maps and
//! verification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod generators;
pub mod measure;
pub mod nnls;
pub mod polytope;
pub mod rng;
pub mod special;
pub mod transport;
pub mod verifier;

pub use error::{Error, Result};
pub use generators::{cross_polytope_measure, perturb_and_repair, random_isotropic_measure, regular_simplex_measure};
pub use measure::{lift_point, Atom, DiscreteMeasure, LiftVerification, LiftedMeasure, MomentReport};
pub use polytope::{body_of, mc_volume, polar_of, volume, ConvexPolytope, FacetPolytope, McVolume, VertexPolytope};
pub use transport::{
    ball_barthe_check, chain_verify_thm1, chain_verify_thm2, in_cone_thm1, in_cone_thm2, transport1, transport2,
    BallBarthe, ChainReport, Rearrangement, TransportMap, TransportProbe,
};
pub use verifier::{theorem1_bound, theorem2_bound, verify_theorem1, verify_theorem2, Theorem, VerificationReport};
