//! Runs the code blocks of the guide in `book/` as doc-tests.
//!
//! mdbook cannot link external crates when testing, so each chapter is
//! included here as the docs of an empty module.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/finite-fields.md")]
pub mod finite_fields {}
#[doc = include_str!("../../../book/src/tori.md")]
pub mod tori {}
#[doc = include_str!("../../../book/src/weil.md")]
pub mod weil {}
#[doc = include_str!("../../../book/src/eigenspaces.md")]
pub mod eigenspaces {}
#[doc = include_str!("../../../book/src/sums.md")]
pub mod sums {}
#[doc = include_str!("../../../book/src/cat-maps.md")]
pub mod cat_maps {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
