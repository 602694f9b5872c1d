//! Spectral analysis of the self-similar "bungee" cliff on the half-line.
//!
//! The potential diverges to `-inf` at `x = 0` through an infinite sequence
//! of piecewise-constant blocks, yet still confines a particle to `x > 0`.
//! This crate propagates energy eigenfunctions exactly across those blocks,
//! extracts the boundary vector that selects admissible solutions, computes
//! phase shifts and the discrete negative spectrum, and evolves wave packets
//! through their generalized-eigenfunction expansion.
//!
//! All computations use the dimensionless variables `sigma = x / x0` and
//! `lambda = 2 m E x0^2 / hbar^2`; [`PhysicalParams`] converts at the edges.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod error;
pub mod integrals;
pub mod potential;
pub mod propagator;
pub mod reference;
pub mod solution;
pub mod spectral;
pub mod wavepacket;

pub use boundary::{asymptotic_profile, boundary_vector, probability_current, BoundaryVector, ProfileKind, ProfileSamples};
pub use error::{Error, Result};
pub use potential::{physical_potential, PhysicalParams, PotentialSpec, Segment, DEFAULT_BLOCKS, KAPPA0};
pub use propagator::{propagate_state, segment_matrix, transfer, StateVector, TransferResult};
