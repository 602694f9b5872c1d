//! Wave-packet evolution through the generalized-eigenfunction expansion.
//!
//! Continuum states are normalized to `sin(k (sigma - 1) + delta(k))` beyond
//! the cliff, which makes `(2 / pi) dk` the completeness measure on the half
//! line. A packet is projected onto a uniform `k` grid plus the bound states,
//! each coefficient picks up its phase `e^(-i lambda tau)`, and the sum is
//! re-synthesized on the `sigma` grid.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::integrals::trapezoid;
use crate::potential::PotentialSpec;
use crate::spectral::{find_negative_spectrum, scattering_solution, BoundState};

/// `k` values handled per parallel task; partial sums are reduced in this order.
const CHUNK: usize = 64;
/// Steps between exact re-seeds of the phasor recurrence.
const RESEED: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WavepacketState {
    /// Uniform, increasing.
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub tau: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    pub norm: f64,
    pub mean_position: f64,
    pub mean_momentum: f64,
    pub momentum_sign: i8,
    /// Probability on `sigma > 1`.
    pub exterior_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralCoefficients {
    /// Midpoints of a uniform grid, `lambda = k^2`.
    pub k_grid: Vec<f64>,
    pub dk: f64,
    pub c_k: Vec<Complex64>,
    pub bound_lambdas: Vec<f64>,
    pub c_bound: Vec<Complex64>,
    pub tau: f64,
}

impl SpectralCoefficients {
    /// `sum |c_k|^2 (pi / 2) dk + sum |c_b|^2`, the norm carried by the expansion.
    pub fn spectral_norm(&self) -> f64 {
        let cont: f64 = self.c_k.iter().map(|c| c.norm_sqr()).sum::<f64>() * 0.5 * PI * self.dk;
        cont + self.c_bound.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Coefficients at `tau`, advanced from `self.tau`.
    pub fn at(&self, tau: f64) -> Self {
        let dt = tau - self.tau;
        let phase = |lambda: f64| Complex64::from_polar(1.0, -lambda * dt);
        Self {
            k_grid: self.k_grid.clone(),
            dk: self.dk,
            c_k: self.c_k.iter().zip(&self.k_grid).map(|(c, k)| c * phase(k * k)).collect(),
            bound_lambdas: self.bound_lambdas.clone(),
            c_bound: self.c_bound.iter().zip(&self.bound_lambdas).map(|(c, &l)| c * phase(l)).collect(),
            tau,
        }
    }
}

/// Eigenfunctions the expansion is built from.
pub trait Model: Sync {
    /// Phase shift `delta` and values at `interior` points (all `< 1`) of the
    /// continuum state normalized to `sin(k (sigma - 1) + delta)` on `sigma >= 1`.
    fn continuum(&self, k: f64, interior: &[f64]) -> Result<(f64, Vec<f64>)>;

    /// Normalized bound states as `(lambda, samples on grid)`.
    fn bound_states(&self, grid: &[f64]) -> Result<Vec<(f64, Vec<f64>)>>;
}

/// The cliff itself, with the bound states found on `[bound_min, -10]`.
#[derive(Debug, Clone)]
pub struct BungeeModel {
    pub spec: PotentialSpec,
    pub bound_roots: Vec<f64>,
}

impl BungeeModel {
    pub fn new(spec: PotentialSpec, bound_min: Option<f64>) -> Result<Self> {
        let bound_roots = match bound_min {
            Some(lmin) => find_negative_spectrum(&spec, lmin, -10.0, 64, 1e-12)?.roots,
            None => Vec::new(),
        };
        Ok(Self { spec, bound_roots })
    }
}

impl Model for BungeeModel {
    fn continuum(&self, k: f64, interior: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (sol, _, delta) = scattering_solution(&self.spec, k * k)?;
        let delta = delta.ok_or(Error::WrongSign { lambda: k * k, expected: "positive" })?;
        let values = interior.iter().map(|&x| sol.eval(x).map_or(0.0, |s| s.psi)).collect();
        Ok((delta, values))
    }

    fn bound_states(&self, grid: &[f64]) -> Result<Vec<(f64, Vec<f64>)>> {
        self.bound_roots
            .iter()
            .map(|&l| {
                let b = BoundState::at_root(&self.spec, l)?;
                Ok((l, grid.iter().map(|&x| b.normalized_value(x).unwrap_or(0.0)).collect()))
            })
            .collect()
    }
}

/// Dirichlet wall at `sigma = 1`: `sin(k (sigma - 1))` outside, zero inside.
#[derive(Debug, Clone, Copy, Default)]
pub struct HardWall;

impl Model for HardWall {
    fn continuum(&self, _k: f64, interior: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((0.0, vec![0.0; interior.len()]))
    }

    fn bound_states(&self, _grid: &[f64]) -> Result<Vec<(f64, Vec<f64>)>> {
        Ok(Vec::new())
    }
}

/// `n` equally spaced points on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidGrid(format!("[{lo}, {hi}] with {n} points")));
    }
    let h = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|i| if i == n - 1 { hi } else { lo + h * i as f64 }).collect())
}

/// Default grids: `sigma` in `[2^-10, 8]` with `2^14` points.
pub fn default_sigma_grid() -> Vec<f64> {
    uniform_grid(2f64.powi(-10), 8.0, 1 << 14).expect("valid constants")
}

/// Normalized `e^(-(sigma - c)^2 / (4 w^2)) e^(i k sigma)`.
pub fn gaussian_packet(center: f64, width: f64, momentum: f64, grid: &[f64]) -> Result<WavepacketState> {
    if !(width > 0.0) || !width.is_finite() || !center.is_finite() || !momentum.is_finite() {
        return Err(Error::Support(format!("width {width} must be positive and finite")));
    }
    if center - 4.0 * width <= 1.0 {
        return Err(Error::Support(format!("center - 4 width = {} must exceed 1", center - 4.0 * width)));
    }
    let (&lo, &hi) = (grid.first().ok_or_else(|| Error::InvalidGrid("empty grid".into()))?, grid.last().unwrap());
    let mut warnings = Vec::new();
    if center + 6.0 * width > hi || center - 6.0 * width < lo {
        warnings.push(format!("packet truncated by grid [{lo}, {hi}]"));
    }
    let norm = (2.0 * PI * width * width).powf(-0.25);
    let values = grid
        .iter()
        .map(|&x| Complex64::from_polar(norm * (-(x - center).powi(2) / (4.0 * width * width)).exp(), momentum * x))
        .collect();
    Ok(WavepacketState { grid: grid.to_vec(), values, tau: 0.0, warnings })
}

/// Closed-form free evolution of [`gaussian_packet`] on the full line.
pub fn free_gaussian(center: f64, width: f64, momentum: f64, tau: f64, x: f64) -> Complex64 {
    let i = Complex64::i();
    let spread = Complex64::new(width * width, tau);
    let y = x - center - 2.0 * momentum * tau;
    let pre = (2.0 * PI * width * width).powf(-0.25) * (Complex64::new(1.0, 0.0) + i * tau / (width * width)).powf(-0.5);
    pre * (-y * y / (4.0 * spread) + i * (momentum * x - momentum * momentum * tau)).exp()
}

pub fn observables(state: &WavepacketState) -> Observables {
    let g = &state.grid;
    let density: Vec<f64> = state.values.iter().map(|v| v.norm_sqr()).collect();
    let norm = trapezoid(g, &density);
    let xs: Vec<f64> = g.iter().zip(&density).map(|(x, d)| x * d).collect();
    let n = g.len();
    let current: Vec<f64> = (0..n)
        .map(|j| {
            let (a, b) = (j.saturating_sub(1), (j + 1).min(n - 1));
            let d = (state.values[b] - state.values[a]) / (g[b] - g[a]);
            (state.values[j].conj() * d).im
        })
        .collect();
    let mean_momentum = trapezoid(g, &current) / norm;
    let first_out = g.partition_point(|&x| x <= 1.0);
    let exterior_probability =
        if first_out < n { trapezoid(&g[first_out.saturating_sub(1)..], &density[first_out.saturating_sub(1)..]) } else { 0.0 };
    Observables {
        norm,
        mean_position: trapezoid(g, &xs) / norm,
        mean_momentum,
        momentum_sign: if mean_momentum > 0.0 {
            1
        } else if mean_momentum < 0.0 {
            -1
        } else {
            0
        },
        exterior_probability,
    }
}

/// `sqrt(\int |a - b|^2)` on the shared grid.
pub fn l2_distance(a: &WavepacketState, b: &WavepacketState) -> f64 {
    let d: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm_sqr()).collect();
    trapezoid(&a.grid, &d).sqrt()
}

/// Eigenfunctions tabulated on one `sigma` grid and one `k` grid.
#[derive(Debug, Clone)]
pub struct Expansion {
    grid: Vec<f64>,
    weights: Vec<f64>,
    /// Grid points `< 1`.
    n_inside: usize,
    k_grid: Vec<f64>,
    dk: f64,
    deltas: Vec<f64>,
    /// Row `i` holds the continuum state `k_grid[i]` at the interior points.
    inside: Vec<Vec<f64>>,
    bound: Vec<(f64, Vec<f64>)>,
}

impl Expansion {
    /// `n_k` midpoints on `[0, k_max]`; `grid` must be uniform.
    pub fn new<M: Model>(model: &M, grid: Vec<f64>, k_max: f64, n_k: usize) -> Result<Self> {
        if grid.len() < 3 || n_k == 0 || !(k_max > 0.0) {
            return Err(Error::InvalidGrid(format!("{} sigma points, {n_k} k points up to {k_max}", grid.len())));
        }
        let h = grid[1] - grid[0];
        if grid.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
            return Err(Error::InvalidGrid("sigma grid must be uniform".into()));
        }
        let n = grid.len();
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        let n_inside = grid.partition_point(|&x| x < 1.0);
        let dk = k_max / n_k as f64;
        let k_grid: Vec<f64> = (0..n_k).map(|i| (i as f64 + 0.5) * dk).collect();
        let modes: Vec<(f64, Vec<f64>)> =
            k_grid.par_iter().map(|&k| model.continuum(k, &grid[..n_inside])).collect::<Result<_>>()?;
        let (deltas, inside) = modes.into_iter().unzip();
        let bound = model.bound_states(&grid)?;
        Ok(Self { grid, weights, n_inside, k_grid, dk, deltas, inside, bound })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn k_grid(&self) -> &[f64] {
        &self.k_grid
    }

    /// Continuum state `i` on the whole grid.
    pub fn mode(&self, i: usize) -> Vec<f64> {
        let mut out = self.inside[i].clone();
        out.extend(self.exterior_sines(i));
        out
    }

    /// `sin(k (sigma - 1) + delta)` for the exterior points by phasor recurrence.
    fn exterior_sines(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        let k = self.k_grid[i];
        let delta = self.deltas[i];
        let pts = &self.grid[self.n_inside..];
        let h = self.grid[1] - self.grid[0];
        let step = Complex64::from_polar(1.0, k * h);
        let mut z = Complex64::new(0.0, 0.0);
        pts.iter().enumerate().map(move |(j, &x)| {
            if j % RESEED == 0 {
                z = Complex64::from_polar(1.0, k * (x - 1.0) + delta);
            } else {
                z *= step;
            }
            z.im
        })
    }

    pub fn project(&self, packet: &WavepacketState) -> Result<SpectralCoefficients> {
        if packet.grid.len() != self.grid.len()
            || packet.grid.first() != self.grid.first()
            || packet.grid.last() != self.grid.last()
        {
            return Err(Error::InvalidGrid("packet grid differs from expansion grid".into()));
        }
        let fw: Vec<Complex64> = packet.values.iter().zip(&self.weights).map(|(v, w)| v * w).collect();
        let c_k = (0..self.k_grid.len())
            .into_par_iter()
            .map(|i| {
                let inside: Complex64 = self.inside[i].iter().zip(&fw).map(|(m, f)| f * m).sum();
                let outside: Complex64 = self.exterior_sines(i).zip(&fw[self.n_inside..]).map(|(m, f)| f * m).sum();
                (inside + outside) * (2.0 / PI)
            })
            .collect();
        let c_bound = self.bound.iter().map(|(_, b)| b.iter().zip(&fw).map(|(m, f)| f * m).sum()).collect();
        Ok(SpectralCoefficients {
            k_grid: self.k_grid.clone(),
            dk: self.dk,
            c_k,
            bound_lambdas: self.bound.iter().map(|b| b.0).collect(),
            c_bound,
            tau: packet.tau,
        })
    }

    /// Re-synthesizes the packet at `tau`.
    ///
    /// The `k` sum runs over fixed chunks whose partial sums are added in
    /// chunk order, so the result does not depend on scheduling.
    pub fn evolve(&self, coefficients: &SpectralCoefficients, tau: f64) -> WavepacketState {
        let c = coefficients.at(tau);
        let n = self.grid.len();
        let partials: Vec<Vec<Complex64>> = (0..self.k_grid.len())
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = vec![Complex64::new(0.0, 0.0); n];
                for &i in chunk {
                    let ci = c.c_k[i] * self.dk;
                    for (a, m) in acc.iter_mut().zip(&self.inside[i]) {
                        *a += ci * m;
                    }
                    for (a, m) in acc[self.n_inside..].iter_mut().zip(self.exterior_sines(i)) {
                        *a += ci * m;
                    }
                }
                acc
            })
            .collect();
        let mut values = vec![Complex64::new(0.0, 0.0); n];
        for p in partials {
            for (v, x) in values.iter_mut().zip(p) {
                *v += x;
            }
        }
        for ((_, b), cb) in self.bound.iter().zip(&c.c_bound) {
            for (v, m) in values.iter_mut().zip(b) {
                *v += cb * m;
            }
        }
        WavepacketState { grid: self.grid.clone(), values, tau, warnings: Vec::new() }
    }
}
