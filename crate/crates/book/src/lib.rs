//! The guide in `book/src` is plain mdbook Markdown. Each chapter is pulled
//! in here as module docs so `cargo test` runs its listings as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/gaussian-model.md")]
pub mod gaussian_model {}
#[doc = include_str!("../../../book/src/water-filling.md")]
pub mod water_filling {}
#[doc = include_str!("../../../book/src/test-channels.md")]
pub mod test_channels {}
#[doc = include_str!("../../../book/src/decoder-only.md")]
pub mod decoder_only {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../../book/src/audit.md")]
pub mod audit {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
