//! Reference values used as regression fixtures.
//!
//! Stored exactly as quoted, at the quoted precision.

/// The first eleven bound-state energies, in units where `E = lambda`, as quoted.
pub const SPECTRUM: [f64; 11] =
    [-72.6416, -210.342, -715.831, -841.391, -2863.33, -3365.56, -11453.3, -13462.3, -45813.2, -53849.0, -183253.0];

/// Relative precision of the quoted spectrum.
pub const SPECTRUM_REL_TOL: f64 = 1e-4;

/// Probability outside the cliff for the bound state at `lambda ~ -841.391`.
pub const TAIL_PROBABILITY: f64 = 3.174e-16;

/// Relative tolerance for the tail probability comparison.
pub const TAIL_REL_TOL: f64 = 0.05;

/// The worked scaling pair `(-841.391) / 4 = -210.348 ~ -210.342`.
pub const SCALING_PAIR: (f64, f64) = (-210.342, -841.391);

/// Ratio error of the worked scaling pair, `|lambda_j / (4 lambda_i) - 1|`.
pub const SCALING_PAIR_ERROR: f64 = 2.7e-5;

/// Energies of the two scattering states drawn with `m = 1`, `hbar = 1`, `x0 = 1`.
pub const SCATTERING_ENERGIES: [f64; 2] = [10.0, 20.0];
