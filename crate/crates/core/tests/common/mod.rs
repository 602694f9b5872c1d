#![allow(dead_code)]

use bungee_core::PotentialSpec;

/// Classical RK4 on `(psi, psi')` with step at most `h_max`, stepping exactly
/// onto every breakpoint so each step sees a constant `kappa^2`.
pub fn rk4_transfer(spec: &PotentialSpec, from: f64, to: f64, lambda: f64, h_max: f64) -> [[f64; 2]; 2] {
    let mut cols = [[1.0, 0.0], [0.0, 1.0]];
    let mut breaks: Vec<f64> = spec.segments.iter().flat_map(|s| [s.sigma_left, s.sigma_right]).collect();
    breaks.push(from);
    breaks.push(to);
    let (lo, hi) = if from < to { (from, to) } else { (to, from) };
    breaks.retain(|&b| b >= lo && b <= hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    if from > to {
        breaks.reverse();
    }
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let q_sq = spec.kappa_sq_at(mid).unwrap() + lambda;
        let n = ((b - a).abs() / h_max).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        for c in cols.iter_mut() {
            for _ in 0..n {
                *c = rk4_step(*c, q_sq, h);
            }
        }
    }
    [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]
}

fn rk4_step(y: [f64; 2], q_sq: f64, h: f64) -> [f64; 2] {
    let f = |y: [f64; 2]| [y[1], -q_sq * y[0]];
    let k1 = f(y);
    let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
    let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
    let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]]);
    [y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]), y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])]
}

/// Largest entry difference relative to the largest entry.
pub fn matrix_rel_err(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> f64 {
    let scale = a.iter().flatten().chain(b.iter().flatten()).fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// A path of length at most three blocks ending at `2^-n`.
pub fn oracle_paths() -> Vec<(f64, f64)> {
    vec![(1.0, 0.5), (1.0, 0.125), (0.9, 0.3), (1.5, 0.2), (0.5, 0.0625), (0.125, 0.6)]
}
