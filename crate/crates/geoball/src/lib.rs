//! Numerical differential geometry on analytic 4-manifold charts.
//!
//! The crate answers one family of questions: given an explicit Riemannian
//! metric on a coordinate chart of a 4-manifold, what do the volumes of
//! small geodesic balls say about the space? It provides
//!
//! * a catalog of model metrics ([`metric`]),
//! * curvature tensors and invariants from exact derivatives ([`curvature`]),
//! * the two-term small-ball volume expansion and the closed-form volumes of
//!   the constant-curvature models ([`gray`]),
//! * measured ball volumes by geodesic shooting and Jacobi-field volume
//!   density ([`ballvol`]),
//! * Euler characteristics by curvature quadrature ([`gaussbonnet`]),
//! * and a verifier that ties these together: a closed 4-manifold whose
//!   small-ball volumes match a constant-curvature model through fourth
//!   order, and whose Euler characteristic fits, is that space form
//!   ([`spaceform`]).
//!
//! The [`manifest`], [`report`], and [`runner`] modules drive the above from
//! a plain-text manifest, for the `geoball` command line tool.

pub mod ballvol;
pub mod curvature;
pub mod error;
pub mod gaussbonnet;
pub mod gray;
pub mod jet;
pub mod linalg;
pub mod metric;
pub mod ode;
pub mod quadrature;
pub mod spaceform;

pub use error::{Error, Result};
