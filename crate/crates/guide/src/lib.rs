//! Doc-test mirror of the mdbook guide in `book/`.
//!
//! mdbook itself cannot run snippets against crate dependencies, so each
//! chapter is included here as module documentation and `cargo test --doc`
//! executes every Rust code block. A snippet that drifts out of sync with
//! the library fails this crate's doc tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/wedges.md")]
pub mod wedges {}

#[doc = include_str!("../../../book/src/shooting.md")]
pub mod shooting {}

#[doc = include_str!("../../../book/src/truncation.md")]
pub mod truncation {}

#[doc = include_str!("../../../book/src/diagnostics.md")]
pub mod diagnostics {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
