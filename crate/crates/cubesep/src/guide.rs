//! The book chapters, compiled as doctests.
//!
//! The narrative guide lives in `book/` and renders with `mdbook build
//! book`. Each chapter is included here as module documentation so that
//! `cargo test --doc` compiles and runs every code snippet in the book,
//! keeping the prose and the library in lockstep.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/complexes.md")]
pub mod complexes {}

#[doc = include_str!("../../../book/src/hyperplanes.md")]
pub mod hyperplanes {}

#[doc = include_str!("../../../book/src/covers.md")]
pub mod covers {}

#[doc = include_str!("../../../book/src/development.md")]
pub mod development {}

#[doc = include_str!("../../../book/src/walker.md")]
pub mod walker {}

#[doc = include_str!("../../../book/src/routes.md")]
pub mod routes {}

#[doc = include_str!("../../../book/src/separability.md")]
pub mod separability {}

#[doc = include_str!("../../../book/src/contact.md")]
pub mod contact {}

#[doc = include_str!("../../../book/src/formats.md")]
pub mod formats {}
