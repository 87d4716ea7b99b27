//! Dynamics of automorphism groups of projective surfaces.
//!
//! The crate bundles two explicit families of surface automorphism groups and
//! the tooling needed to experiment with them:
//!
//! * pentagon folding groups acting on the Darboux surface in P^4 and on the
//!   planar pentagon configuration spaces ([`pentsurf`], [`pentspace`]),
//! * groups generated by Jonquieres involutions fixing a plane cubic
//!   pointwise ([`blancgeom`]), with their exact actions on cohomology
//!   lattices ([`nsaction`], [`exactlin`]),
//! * a deterministic, mergeable Monte-Carlo engine for the associated random
//!   dynamical systems ([`randdyn`]) and small SVG plot writers ([`svg`]).
//!
//! The primary interface is the `examples/` directory: each major capability
//! has one runnable example. See the crate README for the list.

pub mod blancgeom;
pub mod exactlin;
pub mod nsaction;
pub mod pentspace;
pub mod pentsurf;
pub mod randdyn;
pub mod svg;
