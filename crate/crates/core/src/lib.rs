//! Numerical Finsler geometry on a single chart.
//!
//! The crate computes the pointwise objects of a (pseudo-)Finsler metric from
//! its Lagrangian `L = F²` (fundamental tensor, Cartan and Landsberg tensors,
//! spray, Chern connection, Ricci scalar, the mean-Landsberg combination `𝔓`
//! and its dynamical derivative), integrates them over the projectivised
//! fibers against the Sasaki volume form, and checks the diffeomorphism
//! invariance identities and Schur-type theorems that tie them together.
//!
//! All derivatives come from truncated Taylor jets ([`jet`]), so every
//! identity is verified to roundoff rather than to a finite-difference step.
//!
//! The crate is `no_std` (it needs `alloc`); file formats, the CLI and
//! parallel execution live in the companion `finsler-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod geometry;
pub mod identity;
pub mod jet;
pub mod linalg;
pub mod math;
pub mod metric;
pub mod quadrature;
pub mod tolerance;

pub use geometry::{Geometry, GeometryError, TangentSample, TensorValue};
pub use jet::{Jet, JetContext, JetError, Scalar};
pub use metric::{BaseDomain, Builtin, MetricError, MetricExpr, MetricModel, ModelFlags};
pub use quadrature::SphereRule;

/// Default maximal jet order. Seven derivatives of `L` reach the dynamical
/// derivative of `𝔓` and the Schur-corollary scalar.
pub const DEFAULT_JET_ORDER: usize = 7;
