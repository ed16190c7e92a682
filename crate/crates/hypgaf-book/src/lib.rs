//! The guide in `book/` rendered as rustdoc, one module per chapter.
//!
//! This crate exists so that `cargo test` compiles and runs every Rust
//! snippet in the book: a chapter that drifts out of sync with the
//! library fails the build instead of quietly rotting. It has no
//! runtime contents.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/variance-integral.md")]
pub mod variance_integral {}

#[doc = include_str!("../../../book/src/closed-forms.md")]
pub mod closed_forms {}

#[doc = include_str!("../../../book/src/asymptotics.md")]
pub mod asymptotics {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
