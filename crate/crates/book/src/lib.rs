//! Compiles every chapter of the guide in `book/` so its code blocks run
//! under `cargo test`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/channel.md")]
pub mod channel {}

#[doc = include_str!("../../../book/src/spectral-efficiency.md")]
pub mod spectral_efficiency {}

#[doc = include_str!("../../../book/src/norm-maximization.md")]
pub mod norm_maximization {}

#[doc = include_str!("../../../book/src/qr-design.md")]
pub mod qr_design {}

#[doc = include_str!("../../../book/src/connectivity.md")]
pub mod connectivity {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}
