//! Exact transfer matrices for `psi'' = -(kappa^2 + lambda) psi`.
//!
//! On a constant-strength piece the solution is a rotation (`q^2 > 0`), a
//! boost (`q^2 < 0`) or a shear (`q^2 = 0`). A path through the cliff is the
//! ordered product of those pieces, later pieces multiplying from the left.
//!
//! Products grow like `4^n` across blocks and like `e^(mu |s|)` across
//! classically forbidden pieces, so every [`TransferResult`] keeps its entries
//! `O(1)` and carries the magnitude separately in `log_scale`.

use serde::Serialize;
use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

/// Below this `|q^2|` a piece is treated with the series form.
const SERIES_THRESHOLD: f64 = 1e-12;

/// Value and `sigma`-derivative of a solution at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateVector {
    pub psi: f64,
    pub dpsi: f64,
}

impl StateVector {
    pub const fn new(psi: f64, dpsi: f64) -> Self {
        Self { psi, dpsi }
    }

    pub fn norm(&self) -> f64 {
        self.psi.hypot(self.dpsi)
    }

    pub fn is_finite(&self) -> bool {
        self.psi.is_finite() && self.dpsi.is_finite()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(self.psi * factor, self.dpsi * factor)
    }

    /// Unit vector along `self` and the log of the removed length.
    pub fn normalized(&self) -> (Self, f64) {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return (*self, 0.0);
        }
        (self.scale(n.recip()), n.ln())
    }

    /// `psi_a dpsi_b - dpsi_a psi_b`.
    pub fn wronskian(&self, other: &Self) -> f64 {
        self.psi * other.dpsi - self.dpsi * other.psi
    }
}

/// A 2x2 transfer matrix `W = e^log_scale * M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferResult {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
    pub log_scale: f64,
}

impl TransferResult {
    pub const fn identity() -> Self {
        Self { m11: 1.0, m12: 0.0, m21: 0.0, m22: 1.0, log_scale: 0.0 }
    }

    /// Normalizes raw entries so that the largest magnitude lies in `[1, 2)`.
    ///
    /// The scale is a power of two, so the rescaling itself is exact.
    pub fn from_raw(m: [f64; 4], log_scale: f64) -> Result<Self> {
        let max = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if !(max.is_finite() && log_scale.is_finite()) || max == 0.0 {
            return Err(Error::NonFinite("transfer matrix"));
        }
        let exp = max.log2().floor() as i32;
        let factor = 2f64.powi(-exp);
        let [m11, m12, m21, m22] = m.map(|v| v * factor);
        Ok(Self { m11, m12, m21, m22, log_scale: log_scale + exp as f64 * LN_2 })
    }

    /// `det(M) e^(2 log_scale)`, which is one for every true transfer matrix.
    pub fn det_restored(&self) -> f64 {
        let det = self.m11 * self.m22 - self.m12 * self.m21;
        det * (2.0 * self.log_scale).exp()
    }

    /// The unscaled matrix. Overflows for long forbidden paths.
    pub fn true_matrix(&self) -> [[f64; 2]; 2] {
        let s = self.log_scale.exp();
        [[self.m11 * s, self.m12 * s], [self.m21 * s, self.m22 * s]]
    }

    /// Path `self` followed by `next`: `next.M * self.M`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        let m = [
            next.m11 * self.m11 + next.m12 * self.m21,
            next.m11 * self.m12 + next.m12 * self.m22,
            next.m21 * self.m11 + next.m22 * self.m21,
            next.m21 * self.m12 + next.m22 * self.m22,
        ];
        Self::from_raw(m, self.log_scale + next.log_scale)
    }

    /// Applies the matrix to a state; the result is a unit vector plus its log length.
    pub fn apply(&self, state: StateVector) -> (StateVector, f64) {
        let raw = StateVector::new(self.m11 * state.psi + self.m12 * state.dpsi, self.m21 * state.psi + self.m22 * state.dpsi);
        let (unit, log_len) = raw.normalized();
        (unit, log_len + self.log_scale)
    }

    /// Entries rescaled to a common `log_scale`, for comparing two results.
    pub fn entries_at_scale(&self, log_scale: f64) -> [f64; 4] {
        let f = (self.log_scale - log_scale).exp();
        [self.m11 * f, self.m12 * f, self.m21 * f, self.m22 * f]
    }
}

/// Closed-form propagator over a signed displacement `length` at fixed `kappa_sq`.
pub fn segment_matrix(kappa_sq: f64, lambda: f64, length: f64) -> Result<TransferResult> {
    if !kappa_sq.is_finite() {
        return Err(Error::NonFinite("kappa_sq"));
    }
    if !lambda.is_finite() {
        return Err(Error::NonFinite("lambda"));
    }
    if !length.is_finite() {
        return Err(Error::NonFinite("length"));
    }
    if length == 0.0 {
        return Ok(TransferResult::identity());
    }
    let (m, log) = raw_segment(kappa_sq + lambda, length);
    TransferResult::from_raw(m, log)
}

/// Unnormalized segment entries with the hyperbolic growth factored into the log.
pub(crate) fn raw_segment(q_sq: f64, s: f64) -> ([f64; 4], f64) {
    if q_sq.abs() < SERIES_THRESHOLD {
        let x = q_sq * s * s;
        let c = 1.0 - x / 2.0 + x * x / 24.0;
        let sn = s * (1.0 - x / 6.0 + x * x / 120.0);
        return ([c, sn, -q_sq * sn, c], 0.0);
    }
    if q_sq > 0.0 {
        let q = q_sq.sqrt();
        let (sin, cos) = (q * s).sin_cos();
        ([cos, sin / q, -q * sin, cos], 0.0)
    } else {
        let mu = (-q_sq).sqrt();
        let a = mu * s.abs();
        let e = (-2.0 * a).exp();
        let ch = 0.5 * (1.0 + e);
        let sh = 0.5 * (1.0 - e) * s.signum();
        ([ch, sh / mu, mu * sh, ch], a)
    }
}

/// One constant-strength leg of a path, in travel order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Leg {
    pub start: f64,
    pub end: f64,
    pub kappa_sq: f64,
}

impl Leg {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

fn check_position(spec: &PotentialSpec, sigma: f64) -> Result<()> {
    if !sigma.is_finite() {
        return Err(Error::NonFinite("sigma"));
    }
    if sigma < spec.lower_limit() {
        return Err(Error::OutOfRange { sigma, lower: spec.lower_limit() });
    }
    Ok(())
}

/// Splits the path `from -> to` at every breakpoint. The exterior `sigma > 1` is one free leg.
pub(crate) fn path_legs(spec: &PotentialSpec, from: f64, to: f64) -> Result<Vec<Leg>> {
    check_position(spec, from)?;
    check_position(spec, to)?;
    let mut legs = Vec::new();
    let mut cur = from;
    if to < from {
        while cur > to {
            let (end, kappa_sq) = if cur > 1.0 {
                (to.max(1.0), 0.0)
            } else {
                // segment immediately to the left of `cur`
                let idx = spec.segments.partition_point(|s| s.sigma_left >= cur);
                let seg = spec.segments[idx];
                (to.max(seg.sigma_left), seg.kappa_sq)
            };
            legs.push(Leg { start: cur, end, kappa_sq });
            cur = end;
        }
    } else {
        while cur < to {
            let (end, kappa_sq) = if cur >= 1.0 {
                (to, 0.0)
            } else {
                let seg = spec.segments[spec.segment_index(cur)];
                (to.min(seg.sigma_right), seg.kappa_sq)
            };
            legs.push(Leg { start: cur, end, kappa_sq });
            cur = end;
        }
    }
    Ok(legs)
}

/// Path-ordered transfer matrix mapping `(psi, psi')` at `sigma_from` to `sigma_to`.
pub fn transfer(spec: &PotentialSpec, sigma_from: f64, sigma_to: f64, lambda: f64) -> Result<TransferResult> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite("lambda"));
    }
    path_legs(spec, sigma_from, sigma_to)?
        .iter()
        .try_fold(TransferResult::identity(), |acc, leg| acc.then(&segment_matrix(leg.kappa_sq, lambda, leg.length())?))
}

/// Carries `state` from `sigma_from` to `sigma_to`; the true state is `e^log * unit`.
pub fn propagate_state(
    spec: &PotentialSpec,
    state: StateVector,
    sigma_from: f64,
    sigma_to: f64,
    lambda: f64,
) -> Result<(StateVector, f64)> {
    if !state.is_finite() {
        return Err(Error::NonFinite("state"));
    }
    let mut log = 0.0;
    let mut cur = state;
    for leg in path_legs(spec, sigma_from, sigma_to)? {
        let (next, l) = step(cur, leg.kappa_sq + lambda, leg.length());
        cur = next;
        log += l;
    }
    let (unit, l) = cur.normalized();
    Ok((unit, log + l))
}

/// Vector step over one constant piece, renormalized. Returns the log growth.
pub(crate) fn step(state: StateVector, q_sq: f64, s: f64) -> (StateVector, f64) {
    if s == 0.0 {
        return (state, 0.0);
    }
    let ([a, b, c, d], log) = raw_segment(q_sq, s);
    let raw = StateVector::new(a * state.psi + b * state.dpsi, c * state.psi + d * state.dpsi);
    let (unit, l) = raw.normalized();
    (unit, l + log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::KAPPA0;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn close(a: [f64; 4], b: [f64; 4], tol: f64) -> bool {
        let scale = a.iter().chain(b.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol * scale)
    }

    #[test]
    fn zero_length_is_identity() {
        for (k, l) in [(0.0, 0.0), (100.0, -3.0), (5.0, -1e5)] {
            assert_eq!(segment_matrix(k, l, 0.0).unwrap(), TransferResult::identity());
        }
    }

    #[test]
    fn non_finite_inputs_are_rejected() {
        assert!(segment_matrix(f64::NAN, 0.0, 1.0).is_err());
        assert!(segment_matrix(1.0, f64::INFINITY, 1.0).is_err());
        assert!(segment_matrix(1.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn zeta_first_block_by_hand() {
        // stage A backwards takes (0, 1) to the peak (1/kappa0, 0)
        let a = segment_matrix(KAPPA0 * KAPPA0, 0.0, -6.0 / 13.0).unwrap();
        let (s, log) = a.apply(StateVector::new(0.0, 1.0));
        let s = s.scale(log.exp());
        assert_abs_diff_eq!(s.psi, 1.0 / KAPPA0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.dpsi, 0.0, epsilon = 1e-14);
        // stage B backwards turns the peak into velocity 4
        let b = segment_matrix(16.0 * KAPPA0 * KAPPA0, 0.0, -1.0 / 26.0).unwrap();
        let (s, log) = b.apply(StateVector::new(1.0 / KAPPA0, 0.0));
        let s = s.scale(log.exp());
        assert_abs_diff_eq!(s.psi, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.dpsi, 4.0, epsilon = 1e-14);
    }

    #[test]
    fn block_limit_is_diagonal() {
        let spec = PotentialSpec::new(6).unwrap();
        let w = transfer(&spec, 1.0, 0.5, 0.0).unwrap().true_matrix();
        assert_abs_diff_eq!(w[0][0], 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(w[1][1], 4.0, epsilon = 1e-13);
        assert_abs_diff_eq!(w[0][1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w[1][0], 0.0, epsilon = 1e-13);
    }

    #[test]
    fn zeta_velocity_grows_by_four_per_block() {
        let spec = PotentialSpec::new(12).unwrap();
        for n in 1..=10 {
            let w = transfer(&spec, 1.0, 0.5f64.powi(n), 0.0).unwrap();
            let (s, log) = w.apply(StateVector::new(0.0, 1.0));
            assert!((log - n as f64 * 4f64.ln()).abs() < 1e-12, "n={n}");
            assert!(s.psi.abs() < 1e-12 && (s.dpsi - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn propagate_examples() {
        let spec = PotentialSpec::new(8).unwrap();
        let s0 = StateVector::new(0.3, -0.7);
        let (same, log) = propagate_state(&spec, s0, 0.8, 0.8, 12.0).unwrap();
        assert_eq!(same.scale(log.exp()), s0.scale(1.0 / s0.norm()).scale(s0.norm()));

        let (z, log) = propagate_state(&spec, StateVector::new(0.0, 1.0), 1.0, 0.25, 0.0).unwrap();
        assert!((log - 16f64.ln()).abs() < 1e-12);
        assert!(z.psi.abs() < 1e-12 && (z.dpsi - 1.0).abs() < 1e-12);

        let (p, log) = propagate_state(&spec, StateVector::new(1.0, 0.0), 1.0, 0.25, 0.0).unwrap();
        assert!((log + 16f64.ln()).abs() < 1e-12);
        assert!((p.psi - 1.0).abs() < 1e-12 && p.dpsi.abs() < 1e-10);
    }

    #[test]
    fn free_region_is_a_rotation() {
        let spec = PotentialSpec::new(4).unwrap();
        let lambda = std::f64::consts::PI.powi(2) / 4.0;
        let q = lambda.sqrt();
        let w = transfer(&spec, 2.0, 1.0, lambda).unwrap();
        let expect = [q.cos(), -q.sin() / q, q * q.sin(), q.cos()];
        assert!(close(w.entries_at_scale(0.0), expect, 1e-14));
    }

    #[test]
    fn out_of_range_positions() {
        let spec = PotentialSpec::new(3).unwrap();
        assert!(matches!(transfer(&spec, 1.0, 0.1, 0.0), Err(Error::OutOfRange { .. })));
        assert!(transfer(&spec, 1.0, 0.125, 0.0).is_ok());
    }

    #[test]
    fn series_branch_is_continuous() {
        let s = 0.37;
        let near = segment_matrix(1.0, -1.0 + 1e-13, s).unwrap().entries_at_scale(0.0);
        let pos = segment_matrix(1.0, -1.0 + 1e-11, s).unwrap().entries_at_scale(0.0);
        let neg = segment_matrix(1.0, -1.0 - 1e-11, s).unwrap().entries_at_scale(0.0);
        assert!(close(near, [1.0, s, 0.0, 1.0], 1e-12));
        assert!(close(near, pos, 1e-11) && close(near, neg, 1e-11));
    }

    proptest! {
        #[test]
        fn single_segment_normalization(k in 0.0f64..1e4, lambda in -2e5f64..1e3, s in -1.0f64..1.0) {
            let w = segment_matrix(k, lambda, s).unwrap();
            let max = [w.m11, w.m12, w.m21, w.m22].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!((0.5..=2.0).contains(&max));
        }

        #[test]
        fn single_segment_determinant_resolvable(k in 0.0f64..1e4, lambda in -2e5f64..1e3, s in -1.0f64..1.0) {
            // det M = e^(-2 log_scale) is only representable while mu |s| is moderate
            let mu = (-(k + lambda)).max(0.0).sqrt();
            let s = s * (5.0 / (mu * s.abs())).min(1.0);
            let w = segment_matrix(k, lambda, s).unwrap();
            prop_assert!((w.det_restored() - 1.0).abs() <= 1e-10);
        }

        #[test]
        fn composition(a in 0.3f64..2.0, b in 0.13f64..2.0, c in 0.13f64..2.0, lambda in -300.0f64..300.0) {
            let spec = PotentialSpec::new(3).unwrap();
            let direct = transfer(&spec, a, c, lambda).unwrap();
            let (ab, bc) = (transfer(&spec, a, b, lambda).unwrap(), transfer(&spec, b, c, lambda).unwrap());
            // a detour through a forbidden piece cancels e^(log_ab + log_bc - log_ac) of growth
            prop_assume!(ab.log_scale + bc.log_scale - direct.log_scale < 10.0);
            let composed = ab.then(&bc).unwrap();
            let ls = direct.log_scale;
            prop_assert!(close(direct.entries_at_scale(ls), composed.entries_at_scale(ls), 1e-9));
        }

        #[test]
        fn reversibility(a in 0.13f64..2.0, b in 0.13f64..2.0, lambda in -100.0f64..300.0) {
            let spec = PotentialSpec::new(3).unwrap();
            let there = transfer(&spec, a, b, lambda).unwrap();
            let back = transfer(&spec, b, a, lambda).unwrap();
            prop_assume!(there.log_scale + back.log_scale < 12.0);
            let round = there.then(&back).unwrap();
            prop_assert!(close(round.entries_at_scale(0.0), [1.0, 0.0, 0.0, 1.0], 1e-9));
        }

        #[test]
        fn determinant_on_resolvable_paths(from in 0.3f64..3.0, to in 0.13f64..3.0, lambda in -100.0f64..1e3) {
            // |det M| = e^(-2 log_scale) must stay well above rounding for the check to mean anything
            let spec = PotentialSpec::new(3).unwrap();
            let w = transfer(&spec, from, to, lambda).unwrap();
            prop_assume!(w.log_scale < 6.0);
            prop_assert!((w.det_restored() - 1.0).abs() <= 1e-10);
        }
    }
}
