//! The book's chapters, compiled as doc-tests.
//!
//! Each module below inlines one chapter of `book/` verbatim, so `cargo
//! test` executes every Rust snippet the book shows. If a snippet rots,
//! the build breaks; the rendered book and the running library cannot
//! disagree silently.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics {}

#[doc = include_str!("../../../book/src/curvature.md")]
pub mod curvature {}

#[doc = include_str!("../../../book/src/expansion.md")]
pub mod expansion {}

#[doc = include_str!("../../../book/src/measuring.md")]
pub mod measuring {}

#[doc = include_str!("../../../book/src/gaussbonnet.md")]
pub mod gaussbonnet {}

#[doc = include_str!("../../../book/src/spaceform.md")]
pub mod spaceform {}

#[doc = include_str!("../../../book/src/manifest.md")]
pub mod manifest {}
