//! The guide in `book/` as doctests: `cargo test -p mpbandit-book` runs
//! every code listing, one module per chapter so failures point at a file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}
#[doc = include_str!("../../../book/src/simulator.md")]
pub mod simulator {}
#[doc = include_str!("../../../book/src/protocol.md")]
pub mod protocol {}
#[doc = include_str!("../../../book/src/metc_elim.md")]
pub mod metc_elim {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
