//! Energy eigenfunctions, phase shifts and the negative spectrum.

mod bound;
mod scan;

pub use bound::{
    bound_condition, bound_state_norm_and_tail, first_block_overlap, matching_point, perturbation_expectation, root_blocks,
    BoundState, NormAndTail, Perturbation, ROOT_MATCH_TOL,
};
pub use scan::{find_negative_spectrum, scaling_check, scan_grid, FailedBracket, Pair, ScanGrid, SpectrumReport, MIN_BRACKET};

use serde::Serialize;
use std::f64::consts::PI;

use crate::boundary::{oriented_boundary_vector, BoundaryVector, DEFAULT_N_MAX, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::propagator::StateVector;
use crate::solution::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Scattering,
    Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenstateRecord {
    pub lambda: f64,
    pub kind: StateKind,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Scattering states with `lambda > 0` only.
    pub phase_shift: Option<f64>,
    /// Bound states only: `\int psi^2` before normalization, with `psi(1) = 1`.
    pub norm: Option<f64>,
    pub tail_probability: Option<f64>,
    /// Bound states only: relative log-derivative mismatch between the exterior
    /// decay and the admissible solution. Large away from a root.
    pub mismatch: Option<f64>,
}

fn uniform_grid(spec: &PotentialSpec, sigma_max: f64, samples: usize) -> Result<Vec<f64>> {
    if samples == 0 || !(sigma_max > 0.0) || !sigma_max.is_finite() {
        return Err(Error::InvalidGrid(format!("sigma_max = {sigma_max}, samples = {samples}")));
    }
    let grid: Vec<f64> = (1..=samples).map(|i| sigma_max * i as f64 / samples as f64).collect();
    if grid[0] < spec.lower_limit() {
        return Err(Error::OutOfRange { sigma: grid[0], lower: spec.lower_limit() });
    }
    Ok(grid)
}

/// Oriented boundary vector at `sigma = 1`; an unconverged limit is an error.
fn limit_at_edge(spec: &PotentialSpec, lambda: f64) -> Result<BoundaryVector> {
    let w = oriented_boundary_vector(spec, 1.0, lambda, DEFAULT_TOL, DEFAULT_N_MAX.min(spec.n_blocks))?;
    if !w.converged {
        return Err(Error::NotConverged { n_used: w.n_used, residual: w.residual });
    }
    Ok(w)
}

/// `delta` with `psi(sigma >= 1) ~ sin(k (sigma - 1) + delta)` for boundary data `w` at `sigma = 1`.
pub fn phase_from_boundary(w: &BoundaryVector, k: f64) -> f64 {
    (k * w.w1).atan2(w.w2)
}

/// Scattering phase shift in `(-pi, pi]`.
pub fn phase_shift(spec: &PotentialSpec, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::WrongSign { lambda, expected: "positive" });
    }
    let w = limit_at_edge(spec, lambda)?.canonical();
    Ok(phase_from_boundary(&w, lambda.sqrt()))
}

/// Phase shifts along an increasing grid of positive energies, unwrapped.
///
/// The naturally oriented boundary vector is continuous in `lambda`, so the
/// raw phase only jumps by `2 pi` at the branch cut of `atan2`.
pub fn phase_scan(spec: &PotentialSpec, lambdas: &[f64]) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !(lambda > 0.0) {
            return Err(Error::WrongSign { lambda, expected: "positive" });
        }
        let w = limit_at_edge(spec, lambda)?;
        let mut d = phase_from_boundary(&w, lambda.sqrt());
        if let Some(&prev) = out.last() {
            d += 2.0 * PI * ((prev - d) / (2.0 * PI)).round();
        }
        out.push(d);
    }
    Ok(out)
}

/// Admissible solution from the bottom of the cliff up to `sigma = 1`.
pub fn admissible_solution(spec: &PotentialSpec, lambda: f64) -> Result<Solution> {
    Solution::propagate(spec, lambda, spec.lower_limit(), StateVector::new(1.0, 0.0), 1.0)
}

/// Samples the eigenfunction at energy `lambda` on `sigma_max * i / samples`, `i = 1..=samples`.
///
/// For `lambda > 0` the exterior is `sin(k (sigma - 1) + delta)`. For
/// `lambda < 0` the state decays as `e^(-mu (sigma - 1))` outside and is
/// normalized to one; away from a root that shape is inconsistent with the
/// admissible interior and `mismatch` says by how much. Interior samples come
/// from the admissible solution carried outward from the bottom of the cliff,
/// which lies on the boundary-vector ray at `sigma = 1`.
pub fn eigenfunction(spec: &PotentialSpec, lambda: f64, sigma_max: f64, samples: usize) -> Result<EigenstateRecord> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite("lambda"));
    }
    let grid = uniform_grid(spec, sigma_max, samples)?;
    if lambda < 0.0 {
        let b = BoundState::build(spec, lambda)?;
        let nt = bound::norm_and_tail(&b);
        let values = grid.iter().map(|&x| b.normalized_value(x).expect("grid inside range")).collect();
        return Ok(EigenstateRecord {
            lambda,
            kind: StateKind::Bound,
            grid,
            values,
            phase_shift: None,
            norm: Some(nt.norm),
            tail_probability: Some(nt.tail_probability),
            mismatch: Some(b.mismatch),
        });
    }

    let (interior, top, delta) = scattering_solution(spec, lambda)?;
    let values = grid
        .iter()
        .map(|&x| if x <= 1.0 { interior.eval(x).expect("grid inside range").psi } else { exterior_value(lambda, top, x) })
        .collect();
    Ok(EigenstateRecord {
        lambda,
        kind: StateKind::Scattering,
        grid,
        values,
        phase_shift: delta,
        norm: None,
        tail_probability: None,
        mismatch: None,
    })
}

/// Admissible solution for `lambda >= 0` normalized to `sin(k (sigma - 1) + delta)`
/// outside (`psi(1) = 1` at `lambda = 0`), with its data at `sigma = 1` and `delta`.
pub fn scattering_solution(spec: &PotentialSpec, lambda: f64) -> Result<(Solution, StateVector, Option<f64>)> {
    if !(lambda >= 0.0) {
        return Err(Error::WrongSign { lambda, expected: "non-negative" });
    }
    let w = limit_at_edge(spec, lambda)?.canonical();
    let (amp, delta) = if lambda > 0.0 {
        ((w.w1 * w.w1 + w.w2 * w.w2 / lambda).sqrt().recip(), Some(phase_from_boundary(&w, lambda.sqrt())))
    } else {
        (w.w1.recip(), None)
    };
    let mut interior = admissible_solution(spec, lambda)?;
    let (u, log) = interior.state_at(1.0).expect("covers sigma = 1");
    interior.rescale(amp.ln() - log, u.psi * w.w1 + u.dpsi * w.w2);
    Ok((interior, StateVector::new(amp * w.w1, amp * w.w2), delta))
}

/// Free solution beyond the cliff with data `top` at `sigma = 1`.
pub fn exterior_value(lambda: f64, top: StateVector, sigma: f64) -> f64 {
    let t = sigma - 1.0;
    if lambda > 0.0 {
        let k = lambda.sqrt();
        top.psi * (k * t).cos() + top.dpsi * (k * t).sin() / k
    } else if lambda == 0.0 {
        top.psi + top.dpsi * t
    } else {
        let mu = (-lambda).sqrt();
        top.psi * (mu * t).cosh() + top.dpsi * (mu * t).sinh() / mu
    }
}
