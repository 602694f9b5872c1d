//! The boundary vector and the zero-energy asymptotic solutions.
//!
//! Near `sigma = 0` the energy is negligible against `kappa^2` and each block
//! acts as `diag(1/4, 4)` on `(psi, psi')`. Of the two zero-energy solutions,
//! `zeta` (zero value at every block edge) gains a factor 4 in slope per block
//! and has divergent norm, while `phi` (zero slope at every block edge) loses
//! a factor 4 per block. Admissible states are the ones that look like `phi`
//! at the bottom of the cliff; the boundary vector is the `(psi, psi')`
//! direction at `sigma` that achieves this.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::{block_edge, PotentialSpec};
use crate::propagator::{segment_matrix, transfer, StateVector, TransferResult};
use crate::solution::Solution;

/// Default relative change between successive truncations.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default deepest block used for the limit.
pub const DEFAULT_N_MAX: usize = 40;
/// The energy must be this many times smaller than the local `kappa^2` before
/// successive truncations are compared.
pub const ENERGY_NEGLIGIBLE: f64 = 100.0;

/// Unit vector `(w1, w2)` proportional to admissible `(psi, psi')` data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryVector {
    pub w1: f64,
    pub w2: f64,
    /// Deepest block edge `2^-n_used` used in the final truncation.
    pub n_used: usize,
    pub converged: bool,
    /// Euclidean change between the last two truncations.
    pub residual: f64,
}

impl BoundaryVector {
    pub fn as_state(&self) -> StateVector {
        StateVector::new(self.w1, self.w2)
    }

    /// Flips to `w1 > 0` (or `w2 > 0` when `w1 == 0`).
    pub fn canonical(mut self) -> Self {
        if self.w1 < 0.0 || (self.w1 == 0.0 && self.w2 < 0.0) {
            self.w1 = -self.w1;
            self.w2 = -self.w2;
        }
        self
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.w1 * other.w1 + self.w2 * other.w2
    }
}

/// Boundary vector at `sigma` in canonical sign.
pub fn boundary_vector(spec: &PotentialSpec, sigma: f64, lambda: f64, tol: f64, n_max: usize) -> Result<BoundaryVector> {
    oriented_boundary_vector(spec, sigma, lambda, tol, n_max).map(BoundaryVector::canonical)
}

/// Boundary vector with its natural orientation.
///
/// The truncations `(W22, -W21)` are only ever rescaled by positive factors,
/// so the result is a continuous function of `lambda`. Scans over `lambda`
/// rely on this: a sign convention like `w1 > 0` would introduce jumps
/// wherever `w1` crosses zero.
pub fn oriented_boundary_vector(spec: &PotentialSpec, sigma: f64, lambda: f64, tol: f64, n_max: usize) -> Result<BoundaryVector> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite("lambda"));
    }
    if n_max > spec.n_blocks {
        return Err(Error::TooManyBlocks { requested: n_max, available: spec.n_blocks });
    }
    let mut n = 1;
    while block_edge(n) >= sigma {
        n += 1;
    }
    if n > n_max {
        return Err(Error::OutOfRange { sigma, lower: block_edge(n_max) });
    }
    let mut w = transfer(spec, sigma, block_edge(n), lambda)?;
    let mut prev: Option<(f64, f64)> = None;
    let mut residual = f64::INFINITY;
    loop {
        let v = admissible_direction(&w);
        if let Some(p) = prev {
            residual = (v.0 - p.0).hypot(v.1 - p.1);
        }
        let negligible = block_edge(n).powi(-2) * spec.kappa0 * spec.kappa0 >= ENERGY_NEGLIGIBLE * lambda.abs();
        let converged = negligible && residual < tol;
        if converged || n == n_max {
            return Ok(BoundaryVector { w1: v.0, w2: v.1, n_used: n, converged, residual });
        }
        prev = Some(v);
        let (a, b) = spec.block(n + 1).expect("n < n_max <= n_blocks");
        w = w.then(&segment_matrix(a.kappa_sq, lambda, -a.width())?)?.then(&segment_matrix(b.kappa_sq, lambda, -b.width())?)?;
        n += 1;
    }
}

fn admissible_direction(w: &TransferResult) -> (f64, f64) {
    let (a, b) = (w.m22, -w.m21);
    let n = a.hypot(b);
    (a / n, b / n)
}

/// Boundary vectors along a `lambda` grid with sign continuity between neighbours.
///
/// Each vector is flipped when its dot product with the previous one is
/// negative, so the sequence never jumps by a pure sign change.
pub fn continuous_scan(spec: &PotentialSpec, sigma: f64, lambdas: &[f64], tol: f64, n_max: usize) -> Result<Vec<BoundaryVector>> {
    let mut out: Vec<BoundaryVector> = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let mut v = oriented_boundary_vector(spec, sigma, lambda, tol, n_max)?;
        if let Some(prev) = out.last() {
            if v.dot(prev) < 0.0 {
                v.w1 = -v.w1;
                v.w2 = -v.w2;
            }
        }
        out.push(v);
    }
    Ok(out)
}

/// The two zero-energy solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// `zeta(1) = 0`, `zeta'(1) = 1`.
    Zeta,
    /// `phi(1) = 1`, `phi'(1) = 0`.
    Phi,
}

impl std::str::FromStr for ProfileKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zeta" => Ok(Self::Zeta),
            "phi" => Ok(Self::Phi),
            other => Err(format!("unknown profile kind `{other}` (expected zeta or phi)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSamples {
    pub kind: ProfileKind,
    /// Strictly decreasing.
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    /// `max |psi|` over block `n`, index `n - 1`.
    pub block_peaks: Vec<f64>,
    /// `max |psi'|` over block `n`, index `n - 1`.
    pub block_deriv_peaks: Vec<f64>,
    /// `\int_{2^-n}^1 psi^2`, index `n - 1`.
    pub partial_norms: Vec<f64>,
}

/// Samples `zeta` or `phi` over the first `n_blocks_out` blocks.
///
/// `zeta` is propagated inward from `sigma = 1`, the direction in which it
/// dominates. `phi` is propagated outward from the bottom of the constructed
/// cliff with zero slope and rescaled to `phi(1) = 1`; inward propagation of
/// `phi` would pick up `zeta` at a relative rate of 16 per block.
pub fn asymptotic_profile(
    spec: &PotentialSpec,
    kind: ProfileKind,
    n_blocks_out: usize,
    samples_per_segment: usize,
) -> Result<ProfileSamples> {
    if n_blocks_out == 0 {
        return Err(Error::NoBlocks);
    }
    if n_blocks_out > spec.n_blocks {
        return Err(Error::TooManyBlocks { requested: n_blocks_out, available: spec.n_blocks });
    }
    let samples_per_segment = samples_per_segment.max(1);
    let bottom = block_edge(n_blocks_out);
    let solution = match kind {
        ProfileKind::Zeta => Solution::propagate(spec, 0.0, 1.0, StateVector::new(0.0, 1.0), bottom)?,
        ProfileKind::Phi => {
            let mut s = Solution::propagate(spec, 0.0, spec.lower_limit(), StateVector::new(1.0, 0.0), 1.0)?;
            let (top, log) = s.state_at(1.0).expect("covers sigma = 1");
            s.rescale(-(top.psi.abs().ln() + log), top.psi);
            s
        }
    };

    let mut grid = Vec::with_capacity(2 * n_blocks_out * samples_per_segment + 1);
    for seg in &spec.segments[..2 * n_blocks_out] {
        for i in 0..samples_per_segment {
            let t = i as f64 / samples_per_segment as f64;
            grid.push(seg.sigma_right - t * seg.width());
        }
    }
    grid.push(bottom);
    let (values, derivs) = grid
        .iter()
        .map(|&x| {
            let s = solution.eval(x).expect("grid inside solution range");
            (s.psi, s.dpsi)
        })
        .unzip();

    let mut block_peaks = Vec::with_capacity(n_blocks_out);
    let mut block_deriv_peaks = Vec::with_capacity(n_blocks_out);
    let mut partial_norms = Vec::with_capacity(n_blocks_out);
    let mut acc = crate::integrals::Scaled::ZERO;
    for n in 1..=n_blocks_out {
        let (lo, hi) = (block_edge(n), block_edge(n - 1));
        let (peak, dpeak) = solution.peaks(lo, hi);
        block_peaks.push(peak);
        block_deriv_peaks.push(dpeak);
        acc = acc + solution.square_integral(lo, hi);
        partial_norms.push(acc.to_f64());
    }

    Ok(ProfileSamples { kind, grid, values, derivs, block_peaks, block_deriv_peaks, partial_norms })
}

/// `Im(conj(psi) psi')`, the current in units of `hbar / m`.
pub fn probability_current(psi: Complex64, dpsi: Complex64) -> f64 {
    (psi.conj() * dpsi).im
}
