//! Geometry of the self-similar cliff.
//!
//! Everything here is dimensionless: positions are `sigma = x / x0` and the
//! potential is described by `kappa_sq(sigma) = -v(sigma)`, with `v` the
//! potential in units of `hbar^2 / (2 m x0^2)`. The cliff occupies `(0, 1)`
//! and the potential vanishes for `sigma > 1`.
//!
//! Block `n` (1-indexed) occupies `(2^-n, 2^(1-n))` and is made of two stages
//! of constant strength:
//!
//! * stage A on `(2^(1-n) * 7/13, 2^(1-n))` with `kappa = 2^(n-1) * kappa0`,
//!   three quarters of a local period wide;
//! * stage B on `(2^-n, 2^(1-n) * 7/13)` with `kappa = 2^(n+1) * kappa0`,
//!   a quarter of the quadrupled-strength period wide.
//!
//! The constraint that block 1 ends exactly at `1/2` fixes
//! `kappa0 = 13 pi / 4`.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Dimensionless wavenumber of the first stage, `k0 * x0`.
pub const KAPPA0: f64 = 13.0 * PI / 4.0;

/// Stage boundary inside block 1, as a fraction of the block's right edge.
pub const STAGE_SPLIT: f64 = 7.0 / 13.0;

/// Block count used when nothing else is requested. Reaches `sigma ~ 9e-13`.
pub const DEFAULT_BLOCKS: usize = 40;

/// Physical constants needed to convert between `(x, E)` and `(sigma, lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub mass: f64,
    pub x0: f64,
}

impl PhysicalParams {
    pub fn new(hbar: f64, mass: f64, x0: f64) -> Result<Self> {
        for (name, value) in [("hbar", hbar), ("mass", mass), ("x0", x0)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(Self { hbar, mass, x0 })
    }

    /// `hbar = 1`, `m = 1/2`, `x0 = 1`, for which `E = lambda`.
    pub fn natural() -> Self {
        Self { hbar: 1.0, mass: 0.5, x0: 1.0 }
    }

    /// Energy unit `hbar^2 / (2 m x0^2)`.
    pub fn energy_scale(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass * self.x0 * self.x0)
    }

    pub fn energy_from_lambda(&self, lambda: f64) -> f64 {
        lambda * self.energy_scale()
    }

    pub fn lambda_from_energy(&self, energy: f64) -> f64 {
        energy / self.energy_scale()
    }

    /// Depth of the first plateau, `V0 = -hbar^2 k0^2 / (2m)` with `k0 = kappa0 / x0`.
    pub fn v0(&self) -> f64 {
        -self.energy_scale() * KAPPA0 * KAPPA0
    }

    /// Converts a dimensionless time into physical time, `t = 2 m x0^2 tau / hbar`.
    pub fn time_from_tau(&self, tau: f64) -> f64 {
        tau * self.hbar / self.energy_scale()
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::natural()
    }
}

/// One constant-strength piece of the cliff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub sigma_left: f64,
    pub sigma_right: f64,
    pub kappa_sq: f64,
}

impl Segment {
    pub fn width(&self) -> f64 {
        self.sigma_right - self.sigma_left
    }

    pub fn kappa(&self) -> f64 {
        self.kappa_sq.sqrt()
    }

    /// Right-continuous membership: `[sigma_left, sigma_right)`.
    pub fn contains(&self, sigma: f64) -> bool {
        self.sigma_left <= sigma && sigma < self.sigma_right
    }
}

/// Exact segment decomposition of the cliff down to `2^-n_blocks`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialSpec {
    pub kappa0: f64,
    pub n_blocks: usize,
    /// Rightmost first. Entries `2(n-1)` and `2(n-1)+1` are stages A and B of block `n`.
    pub segments: Vec<Segment>,
}

impl PotentialSpec {
    /// Builds the first `n_blocks` blocks of the cliff.
    ///
    /// Breakpoints come straight from the closed forms `7/13 * 2^(1-n)` and
    /// `2^-n`; scaling by a power of two is exact, so neighbouring segments
    /// share bit-identical endpoints at any depth.
    pub fn new(n_blocks: usize) -> Result<Self> {
        if n_blocks == 0 {
            return Err(Error::NoBlocks);
        }
        let mut segments = Vec::with_capacity(2 * n_blocks);
        for n in 1..=n_blocks {
            let right = block_edge(n - 1);
            let split = STAGE_SPLIT * right;
            let left = block_edge(n);
            let kappa_a = KAPPA0 * block_edge(n - 1).recip();
            let kappa_b = 4.0 * kappa_a;
            segments.push(Segment { sigma_left: split, sigma_right: right, kappa_sq: kappa_a * kappa_a });
            segments.push(Segment { sigma_left: left, sigma_right: split, kappa_sq: kappa_b * kappa_b });
        }
        Ok(Self { kappa0: KAPPA0, n_blocks, segments })
    }

    /// Left end of the constructed range, `2^-n_blocks`.
    pub fn lower_limit(&self) -> f64 {
        block_edge(self.n_blocks)
    }

    /// `kappa^2` at `sigma`, zero outside the cliff, right-continuous at breakpoints.
    pub fn kappa_sq_at(&self, sigma: f64) -> Result<f64> {
        if !sigma.is_finite() {
            return Err(Error::NonFinite("sigma"));
        }
        if sigma <= self.lower_limit() {
            return Err(Error::OutOfRange { sigma, lower: self.lower_limit() });
        }
        if sigma >= 1.0 {
            return Ok(0.0);
        }
        Ok(self.segments[self.segment_index(sigma)].kappa_sq)
    }

    /// Index of the segment with `sigma` in `[left, right)`. Caller guarantees range.
    pub(crate) fn segment_index(&self, sigma: f64) -> usize {
        // segments are sorted by decreasing sigma_left
        let idx = self.segments.partition_point(|s| s.sigma_left > sigma);
        idx.min(self.segments.len() - 1)
    }

    /// Block containing `sigma` (1-indexed), or `None` outside the cliff.
    pub fn block_of(&self, sigma: f64) -> Option<usize> {
        if !(sigma > self.lower_limit() && sigma < 1.0) {
            return None;
        }
        Some(self.segment_index(sigma) / 2 + 1)
    }

    /// Segments of block `n` as `(stage A, stage B)`.
    pub fn block(&self, n: usize) -> Option<(Segment, Segment)> {
        if n == 0 || n > self.n_blocks {
            return None;
        }
        Some((self.segments[2 * n - 2], self.segments[2 * n - 1]))
    }

    /// Samples `v = -kappa^2` on `(lower, sigma_max]`.
    ///
    /// Every segment receives the same number of points so that the deep,
    /// narrow blocks are resolved; each breakpoint appears twice (once per side)
    /// so the steps render as vertical jumps.
    pub fn sample_curve(&self, blocks: usize, samples: usize, sigma_max: f64) -> Vec<(f64, f64)> {
        let blocks = blocks.clamp(1, self.n_blocks);
        let per_segment = (samples / (2 * blocks + 1)).max(2);
        let mut out = Vec::with_capacity(per_segment * (2 * blocks + 1));
        let push_piece = |lo: f64, hi: f64, v: f64, out: &mut Vec<(f64, f64)>| {
            for i in 0..per_segment {
                let t = i as f64 / (per_segment - 1) as f64;
                out.push((lo + (hi - lo) * t, v));
            }
        };
        for seg in self.segments[..2 * blocks].iter().rev() {
            push_piece(seg.sigma_left, seg.sigma_right, -seg.kappa_sq, &mut out);
        }
        if sigma_max > 1.0 {
            push_piece(1.0, sigma_max, 0.0, &mut out);
        }
        out
    }
}

/// `2^-n`, exact.
pub(crate) fn block_edge(n: usize) -> f64 {
    0.5f64.powi(n as i32)
}

/// Physical potential `V(x)` in energy units of `params`.
pub fn physical_potential(params: &PhysicalParams, spec: &PotentialSpec, x: f64) -> Result<f64> {
    let kappa_sq = spec.kappa_sq_at(x / params.x0)?;
    if kappa_sq == 0.0 {
        return Ok(0.0);
    }
    Ok(-params.energy_scale() * kappa_sq)
}
