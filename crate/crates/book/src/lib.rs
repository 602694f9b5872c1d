//! Compiles the guide's code blocks as doc-tests, one module per chapter.

#![doc = include_str!("../../../book/src/introduction.md")]

#[doc = include_str!("../../../book/src/potential.md")]
pub mod potential {}
#[doc = include_str!("../../../book/src/propagation.md")]
pub mod propagation {}
#[doc = include_str!("../../../book/src/boundary.md")]
pub mod boundary {}
#[doc = include_str!("../../../book/src/scattering.md")]
pub mod scattering {}
#[doc = include_str!("../../../book/src/spectrum.md")]
pub mod spectrum {}
#[doc = include_str!("../../../book/src/wavepackets.md")]
pub mod wavepackets {}
#[doc = include_str!("../../../book/src/limits.md")]
pub mod limits {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
