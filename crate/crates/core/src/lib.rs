// Validation guards are written `!(x > 0.0)` on purpose: the negation rejects
// NaN, which `x <= 0.0` would silently accept. Reference tables and Lanczos
// coefficients keep their frozen full-precision digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

//! Numerical toolkit for locating sign-changing (nodal) critical points of
//! p-Laplacian energy functionals with critical-growth nonlinearities under
//! finite symmetry constraints.
//!
//! The library is organised bottom-up:
//!
//! * [`constants`] — Gamma-function machinery: beta-type integrals, the ratios
//!   entering bubble energy expansions, sphere areas, the bubble normalisation
//!   constant and the sharp Sobolev constant power `K^{-n}`.
//! * [`quad`] — adaptive Simpson quadrature used for radial integrals and as an
//!   independent cross-check of every closed-form constant.
//! * [`problem`] — problem descriptions (dimension, exponents, coefficient
//!   fields, pointwise data at the concentration point), the sign-condition
//!   checker, mountain-pass thresholds, exponent windows and a coercivity
//!   estimator.
//! * [`mesh`] — P1 meshes (interval, doubled radial ball, disc, flat torus)
//!   together with symmetry data realised as exact node permutations, orbit
//!   machinery and the invariant/antisymmetric projections.
//! * [`bubble`] — truncated concentration profiles, their superpositions along
//!   group orbits, closed-form energy expansions with quadrature validation,
//!   the F/H remainder assemblies and the sup-over-t scan.
//! * [`solver`] — the discrete energy, its weak gradient, rim (mountain-ridge)
//!   estimates, the path-deformation mountain-pass iteration, nodal rebuild by
//!   sign surgery, continuation in the subcritical parameter and the
//!   concentration diagnostic.
//! * [`pohozaev`] — the domain-scaling identity on star-shaped flat domains and
//!   the sign-condition nonexistence checker built on it.

pub mod bubble;
pub mod constants;
mod error;
mod fem;
pub mod mesh;
pub mod pohozaev;
pub mod problem;
pub mod quad;
pub mod solver;

pub use error::{Error, Result};
