//! Bound states: the root function, matched eigenfunctions, norms and the
//! perturbation estimate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrals::Scaled;
use crate::potential::{block_edge, PotentialSpec, STAGE_SPLIT};
use crate::propagator::{propagate_state, StateVector};
use crate::solution::Solution;

/// Largest relative log-derivative mismatch accepted for a bound-state root.
pub const ROOT_MATCH_TOL: f64 = 1e-6;

/// Deepest block used by the root function: the whole constructed cliff.
pub fn root_blocks(spec: &PotentialSpec) -> usize {
    spec.n_blocks
}

/// `F(lambda) = w2 + w1 sqrt(-lambda)` for the naturally oriented unit
/// boundary vector `w` at `sigma = 1`. Zero exactly at bound-state energies.
///
/// `F` is the Wronskian of `w` with the exterior decay data `(1, -mu)`, and a
/// Wronskian can be read off anywhere. It is evaluated at the matching point,
/// with each solution carried in its stable direction; near deep roots the
/// small component of `w` itself is lost to rounding after a long forbidden
/// run, which would shift the sign changes of a direct evaluation.
pub fn bound_condition(spec: &PotentialSpec, lambda: f64) -> Result<f64> {
    if !(lambda < 0.0) {
        return Err(Error::WrongSign { lambda, expected: "negative" });
    }
    let mu = (-lambda).sqrt();
    let sigma_m = matching_point(spec, lambda);
    let bottom = block_edge(root_blocks(spec));
    let (ue, le) = propagate_state(spec, StateVector::new(1.0, -mu), 1.0, sigma_m, lambda)?;
    let (uu, _) = propagate_state(spec, StateVector::new(1.0, 0.0), bottom, sigma_m, lambda)?;
    let (_, lt) = propagate_state(spec, uu, sigma_m, 1.0, lambda)?;
    Ok(ue.wronskian(&uu) * (le - lt).exp())
}

/// Bottom of the run of classically forbidden segments adjacent to `sigma = 1`.
///
/// The exterior decay data `(1, -mu)` is stable when carried inward across
/// that run and the admissible solution is stable when carried outward from
/// the bottom of the cliff, so the two are matched here.
pub fn matching_point(spec: &PotentialSpec, lambda: f64) -> f64 {
    spec.segments.iter().take_while(|s| s.kappa_sq + lambda < 0.0).last().map_or(1.0, |s| s.sigma_left)
}

/// A bound-state candidate built from both stable directions.
#[derive(Debug, Clone)]
pub struct BoundState {
    pub lambda: f64,
    /// Covers `[lower_limit, 1]`, scaled so that `psi(1) = 1`.
    pub solution: Solution,
    pub matching_point: f64,
    /// `psi'/psi` at the matching point from the exterior side.
    pub log_derivative_outer: f64,
    /// `psi'/psi` at the matching point from the admissible side.
    pub log_derivative_inner: f64,
    /// Relative difference of the two log derivatives.
    pub mismatch: f64,
    /// `\int psi^2` over the cliff.
    pub interior: Scaled,
    /// `\int_1^inf psi^2 = 1 / (2 mu)`.
    pub tail: Scaled,
}

impl BoundState {
    pub fn build(spec: &PotentialSpec, lambda: f64) -> Result<Self> {
        if !(lambda < 0.0) || !lambda.is_finite() {
            return Err(Error::WrongSign { lambda, expected: "negative" });
        }
        let mu = (-lambda).sqrt();
        let sigma_m = matching_point(spec, lambda);
        let outer = Solution::propagate(spec, lambda, 1.0, StateVector::new(1.0, -mu), sigma_m)?;
        let mut inner = Solution::propagate(spec, lambda, spec.lower_limit(), StateVector::new(1.0, 0.0), sigma_m)?;
        let (uo, lo) = outer.state_at(sigma_m).expect("outer covers matching point");
        let (ui, li) = inner.state_at(sigma_m).expect("inner covers matching point");
        let ld_outer = uo.dpsi / uo.psi;
        let ld_inner = ui.dpsi / ui.psi;
        let mismatch = (ld_outer - ld_inner).abs() / ld_outer.abs().max(ld_inner.abs());
        inner.rescale(lo + uo.psi.abs().ln() - li - ui.psi.abs().ln(), uo.psi * ui.psi);
        let solution = Solution::join(outer, inner);
        let interior = solution.square_integral(spec.lower_limit(), 1.0);
        let tail = Scaled::new(0.5 / mu, 0.0);
        Ok(Self {
            lambda,
            solution,
            matching_point: sigma_m,
            log_derivative_outer: ld_outer,
            log_derivative_inner: ld_inner,
            mismatch: if mismatch.is_nan() { f64::INFINITY } else { mismatch },
            interior,
            tail,
        })
    }

    /// Builds the state and rejects energies whose two halves do not match.
    pub fn at_root(spec: &PotentialSpec, lambda: f64) -> Result<Self> {
        let s = Self::build(spec, lambda)?;
        if !(s.mismatch <= ROOT_MATCH_TOL) {
            return Err(Error::NotARoot { lambda, residual: s.mismatch });
        }
        Ok(s)
    }

    pub fn total(&self) -> Scaled {
        self.interior + self.tail
    }

    /// Normalized value at `sigma`, including the exterior decay.
    pub fn normalized_value(&self, sigma: f64) -> Option<f64> {
        let half_log = 0.5 * self.total().ln();
        if sigma > 1.0 {
            let mu = (-self.lambda).sqrt();
            return Some((-mu * (sigma - 1.0) - half_log).exp());
        }
        self.solution.state_at(sigma).map(|(u, l)| u.psi * (l - half_log).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormAndTail {
    /// `\int_0^inf psi^2` with `psi(1) = 1`; may overflow for deep states.
    pub norm: f64,
    /// Natural log of `norm`.
    pub log_norm: f64,
    pub tail_probability: f64,
    /// Natural log of `tail_probability`.
    pub log_tail_probability: f64,
}

/// Norm of the bound state with `psi(1) = 1` and the probability beyond `sigma = 1`.
pub fn bound_state_norm_and_tail(spec: &PotentialSpec, lambda_root: f64) -> Result<NormAndTail> {
    let s = BoundState::at_root(spec, lambda_root)?;
    Ok(norm_and_tail(&s))
}

pub(crate) fn norm_and_tail(s: &BoundState) -> NormAndTail {
    let total = s.total();
    let p = s.tail / total;
    NormAndTail { norm: total.to_f64(), log_norm: total.ln(), tail_probability: p.to_f64(), log_tail_probability: p.ln() }
}

/// `\int Delta psi^2` for the unnormalized solution, where `Delta` removes the first block.
pub fn first_block_overlap(spec: &PotentialSpec, solution: &Solution) -> Scaled {
    let (a, b) = spec.block(1).expect("at least one block");
    let ia = solution.square_integral(STAGE_SPLIT, 1.0);
    let ib = solution.square_integral(0.5, STAGE_SPLIT);
    let va = Scaled::new(-a.kappa_sq, 0.0) * ia;
    let vb = Scaled::new(-b.kappa_sq, 0.0) * ib;
    va + vb
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Perturbation {
    /// `<psi|Delta|psi>` for the normalized state.
    pub delta_expect: f64,
    pub log_abs_delta_expect: f64,
    /// `|<Delta>| / (|lambda| e^-sqrt(-lambda))`.
    pub bound_ratio: f64,
    pub log_bound_ratio: f64,
    /// Where `kappa^2` first reaches `-lambda` moving into the cliff.
    pub x_star: f64,
}

/// Expectation of the first-block perturbation in a normalized bound state.
pub fn perturbation_expectation(spec: &PotentialSpec, lambda_root: f64) -> Result<Perturbation> {
    let s = BoundState::at_root(spec, lambda_root)?;
    let expect = first_block_overlap(spec, &s.solution) / s.total();
    let mu = (-lambda_root).sqrt();
    let log_abs = expect.ln();
    let log_ratio = log_abs - (lambda_root.abs().ln() - mu);
    Ok(Perturbation {
        delta_expect: expect.to_f64(),
        log_abs_delta_expect: log_abs,
        bound_ratio: log_ratio.exp(),
        log_bound_ratio: log_ratio,
        x_star: s.matching_point,
    })
}
