//! Closed-form `\int psi^2` over one constant-strength piece.
//!
//! Bound states at `lambda ~ -2e5` carry growth factors near `e^400` across a
//! single forbidden piece, so results come back as [`Scaled`] numbers and are
//! only collapsed to `f64` once normalized.

use std::ops::{Add, Div, Mul};

use serde::Serialize;

use crate::propagator::{step, StateVector};

/// `value * e^log`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scaled {
    pub value: f64,
    pub log: f64,
}

impl Scaled {
    pub const ZERO: Self = Self { value: 0.0, log: 0.0 };

    pub fn new(value: f64, log: f64) -> Self {
        Self { value, log }.tidy()
    }

    /// Moves the magnitude of `value` into `log`.
    fn tidy(self) -> Self {
        if self.value == 0.0 || !self.value.is_finite() {
            return Self { value: self.value, log: if self.value == 0.0 { 0.0 } else { self.log } };
        }
        let l = self.value.abs().ln();
        Self { value: self.value.signum(), log: self.log + l }
    }

    pub fn to_f64(self) -> f64 {
        self.value * self.log.exp()
    }

    /// Natural log of the magnitude.
    pub fn ln(self) -> f64 {
        self.value.abs().ln() + self.log
    }

    pub fn scale_log(self, dlog: f64) -> Self {
        Self { value: self.value, log: self.log + dlog }
    }
}

impl Mul for Scaled {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        Self::new(self.value * other.value, self.log + other.log)
    }
}

impl Div for Scaled {
    type Output = Self;

    fn div(self, other: Self) -> Self {
        Self::new(self.value / other.value, self.log - other.log)
    }
}

impl Add for Scaled {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        if self.value == 0.0 {
            return other;
        }
        if other.value == 0.0 {
            return self;
        }
        let top = self.log.max(other.log);
        let v = self.value * (self.log - top).exp() + other.value * (other.log - top).exp();
        Self::new(v, top)
    }
}

impl std::iter::Sum for Scaled {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, Self::add)
    }
}

/// `\int psi^2` over the interval between `anchor` and `anchor + s`, where
/// `psi` solves `psi'' = -q_sq psi` with `state` at the anchor. The result is
/// a positive measure regardless of the sign of `s`.
///
/// Integrate from the end the solution was propagated *from*: the mode that
/// grows away from that end is then fixed by the data, and rounding in the
/// other mode contributes only at the scale of the anchor value itself.
pub fn square_integral(q_sq: f64, state: StateVector, s: f64) -> Scaled {
    if s == 0.0 {
        return Scaled::ZERO;
    }
    let (a, d) = (state.psi, state.dpsi);
    let y = q_sq * s * s;
    if y.abs() < 0.01 {
        // series in y = q^2 s^2; valid for either sign of q_sq
        let cc = s * (1.0 - y / 3.0 + y * y / 15.0 - 2.0 * y * y * y / 315.0);
        let cs = 0.5 * s * s * (1.0 - y / 3.0 + 2.0 * y * y / 45.0 - y * y * y / 315.0);
        let ss = s * s * s * (1.0 / 3.0 - y / 15.0 + 2.0 * y * y / 315.0 - y * y * y / 2835.0);
        return Scaled::new((a * a * cc + 2.0 * a * d * cs + d * d * ss) * s.signum(), 0.0);
    }
    if q_sq > 0.0 {
        let q = q_sq.sqrt();
        let x = q * s;
        let (sin, cos) = x.sin_cos();
        let sin2 = 2.0 * sin * cos;
        let cc = s * (0.5 + sin2 / (4.0 * x));
        let cs = 0.5 * s * s * (sin / x).powi(2);
        let ss = (0.5 * s - sin2 / (4.0 * q)) / q_sq;
        return Scaled::new((a * a * cc + 2.0 * a * d * cs + d * d * ss) * s.signum(), 0.0);
    }
    let mu = (-q_sq).sqrt();
    let len = s.abs();
    let b = d * s.signum() / mu;
    let x = mu * len;
    if x < 1.0 {
        let (sh, ch) = (x.sinh(), x.cosh());
        let cc = 0.5 * len + sh * ch / (2.0 * mu);
        let cs = sh * sh / (2.0 * mu);
        let ss = sh * ch / (2.0 * mu) - 0.5 * len;
        return Scaled::new(a * a * cc + 2.0 * a * b * cs + b * b * ss, 0.0);
    }
    // psi = alpha e^(mu t) + beta e^(-mu t), t in [0, len], with e^(2 mu len) factored out
    let alpha = 0.5 * (a + b);
    let beta = 0.5 * (a - b);
    let e = (-2.0 * x).exp();
    let grow = -(-2.0 * x).exp_m1() / (2.0 * mu);
    let v = alpha * alpha * grow + beta * beta * e * grow + 2.0 * alpha * beta * len * e;
    Scaled::new(v, 2.0 * x)
}

/// Composite Simpson rule for the same integral, stepping the exact solution.
pub fn square_integral_quadrature(q_sq: f64, state: StateVector, s: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) + intervals % 2;
    let h = s / n as f64;
    let value = |t: f64| {
        let (u, log) = step(state, q_sq, t);
        (u.psi * log.exp()).powi(2)
    };
    let mut acc = value(0.0) + value(s);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * value(i as f64 * h);
    }
    acc * h.abs() / 3.0
}

/// Trapezoid rule on a sorted grid.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}
