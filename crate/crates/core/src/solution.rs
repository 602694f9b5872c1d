//! Piecewise-exact solutions sampled at arbitrary points.
//!
//! A [`Solution`] remembers, for every constant-strength piece it crosses,
//! the state at the end the propagation came from. Evaluating or integrating
//! inside a piece always starts from that anchor.

use crate::error::{Error, Result};
use crate::integrals::{square_integral, Scaled};
use crate::potential::PotentialSpec;
use crate::propagator::{path_legs, step, StateVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub kappa_sq: f64,
    /// Either `lo` or `hi`.
    pub anchor: f64,
    /// Unit state at the anchor; the true state is `e^log * state`.
    pub state: StateVector,
    pub log: f64,
}

impl Piece {
    fn contains(&self, sigma: f64) -> bool {
        self.lo <= sigma && sigma <= self.hi
    }
}

/// Solution of `psi'' = -(kappa^2 + lambda) psi` over a contiguous range.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub lambda: f64,
    /// Sorted by decreasing `hi`, contiguous.
    pieces: Vec<Piece>,
}

impl Solution {
    /// Propagates `state` from `from` to `to` and records every leg.
    pub fn propagate(spec: &PotentialSpec, lambda: f64, from: f64, state: StateVector, to: f64) -> Result<Self> {
        if !state.is_finite() {
            return Err(Error::NonFinite("state"));
        }
        let (mut cur, mut log) = state.normalized();
        let mut pieces = Vec::new();
        for leg in path_legs(spec, from, to)? {
            let (lo, hi) = if leg.start < leg.end { (leg.start, leg.end) } else { (leg.end, leg.start) };
            pieces.push(Piece { lo, hi, kappa_sq: leg.kappa_sq, anchor: leg.start, state: cur, log });
            let (next, l) = step(cur, leg.kappa_sq + lambda, leg.length());
            cur = next;
            log += l;
        }
        if pieces.is_empty() {
            pieces.push(Piece { lo: from, hi: from, kappa_sq: 0.0, anchor: from, state: cur, log });
        } else if from < to {
            pieces.reverse();
        }
        Ok(Self { lambda, pieces })
    }

    /// Joins two solutions covering adjacent ranges; `upper` must sit above `lower`.
    pub fn join(upper: Self, lower: Self) -> Self {
        let lambda = upper.lambda;
        let mut pieces: Vec<Piece> = upper.pieces.into_iter().chain(lower.pieces).filter(|p| p.hi > p.lo).collect();
        if pieces.is_empty() {
            pieces.push(Piece { lo: 1.0, hi: 1.0, kappa_sq: 0.0, anchor: 1.0, state: StateVector::new(0.0, 0.0), log: 0.0 });
        }
        Self { lambda, pieces }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn lower(&self) -> f64 {
        self.pieces.last().map_or(f64::NAN, |p| p.lo)
    }

    pub fn upper(&self) -> f64 {
        self.pieces.first().map_or(f64::NAN, |p| p.hi)
    }

    /// Multiplies the whole solution by `sign * e^dlog`.
    pub fn rescale(&mut self, dlog: f64, sign: f64) {
        for p in &mut self.pieces {
            p.log += dlog;
            p.state = p.state.scale(sign.signum());
        }
    }

    fn piece_at(&self, sigma: f64) -> Option<&Piece> {
        let idx = self.pieces.partition_point(|p| p.lo > sigma);
        self.pieces.get(idx).filter(|p| p.contains(sigma))
    }

    /// Unit state and log magnitude at `sigma`.
    pub fn state_at(&self, sigma: f64) -> Option<(StateVector, f64)> {
        let p = self.piece_at(sigma)?;
        let (u, l) = step(p.state, p.kappa_sq + self.lambda, sigma - p.anchor);
        Some((u, l + p.log))
    }

    /// State at `sigma` as plain numbers (may underflow to zero or overflow).
    pub fn eval(&self, sigma: f64) -> Option<StateVector> {
        self.state_at(sigma).map(|(u, l)| u.scale(l.exp()))
    }

    /// `\int_lo^hi psi^2` in scaled form, clipped to the covered range.
    pub fn square_integral(&self, lo: f64, hi: f64) -> Scaled {
        let mut total = Scaled::ZERO;
        for p in &self.pieces {
            let a = lo.max(p.lo);
            let b = hi.min(p.hi);
            if b <= a {
                continue;
            }
            let q_sq = p.kappa_sq + self.lambda;
            // start from the anchor-side end of the sub-interval
            let (start, end) = if p.anchor == p.lo { (a, b) } else { (b, a) };
            let (u, l) = step(p.state, q_sq, start - p.anchor);
            total = total + square_integral(q_sq, u, end - start).scale_log(2.0 * (l + p.log));
        }
        total
    }

    /// Largest `|psi|` and `|psi'|` over `[lo, hi]`, located analytically.
    pub fn peaks(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut best = (0.0f64, 0.0f64);
        for p in &self.pieces {
            let a = lo.max(p.lo);
            let b = hi.min(p.hi);
            if b < a {
                continue;
            }
            let q_sq = p.kappa_sq + self.lambda;
            let at = |t: f64| {
                let (u, l) = step(p.state, q_sq, t - p.anchor);
                u.scale((l + p.log).exp())
            };
            let (sa, sb) = (at(a), at(b));
            best.0 = best.0.max(sa.psi.abs()).max(sb.psi.abs());
            best.1 = best.1.max(sa.dpsi.abs()).max(sb.dpsi.abs());
            if q_sq > 0.0 {
                // psi = amp cos(q (t - a) - theta)
                let q = q_sq.sqrt();
                let amp = sa.psi.hypot(sa.dpsi / q);
                let theta = (sa.dpsi / q).atan2(sa.psi);
                let span = q * (b - a);
                // psi extrema at phase theta + m pi, psi' extrema at theta + pi/2 + m pi
                let reached = |offset: f64| (theta + offset).rem_euclid(std::f64::consts::PI) <= span;
                if reached(0.0) {
                    best.0 = best.0.max(amp);
                }
                if reached(std::f64::consts::FRAC_PI_2) {
                    best.1 = best.1.max(q * amp);
                }
            }
        }
        best
    }
}
