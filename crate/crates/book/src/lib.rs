//! The guide's code listings, compiled and run by `cargo test --doc`.
//!
//! mdbook cannot run listings that depend on external crates, so every
//! chapter is included here as the documentation of an empty module.

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/parsing.md")]
mod parsing {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/fa-ast.md")]
mod fa_ast {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/encoding.md")]
mod encoding {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/networks.md")]
mod networks {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/training.md")]
mod training {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/protocols.md")]
mod protocols {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/mining.md")]
mod mining {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
