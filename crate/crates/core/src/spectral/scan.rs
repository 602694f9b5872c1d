//! Scanning for the negative spectrum and checking the `x4` scaling.

use rayon::prelude::*;
use serde::Serialize;

use super::bound::{bound_condition, BoundState};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

/// Smallest bracket width, relative to `|lambda|`.
pub const MIN_BRACKET: f64 = 1e-12;
/// Points inspected inside every bracket for hidden pairs of sign changes.
const SUBDIVISIONS: usize = 8;
const MAX_SPLIT_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanGrid {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points_per_decade: usize,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pair {
    pub i: usize,
    pub j: usize,
    pub lambda_i: f64,
    pub lambda_j: f64,
    /// `lambda_j / (4 lambda_i)`.
    pub ratio: f64,
    /// `|ratio - 1|`.
    pub error: f64,
}

/// A bracket whose root function could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedBracket {
    pub lo: f64,
    pub hi: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    /// Strictly decreasing.
    pub roots: Vec<f64>,
    pub bracketing_grid: ScanGrid,
    /// `|F|` at each root.
    pub residuals: Vec<f64>,
    /// Relative log-derivative mismatch of the matched eigenfunction at each root.
    pub matching_residuals: Vec<f64>,
    /// For every root whose quadruple lies in range, the nearest root to `4 lambda`.
    pub pairing: Vec<Pair>,
    pub failed: Vec<FailedBracket>,
}

/// Geometric grid from `lambda_max` down to `lambda_min`, both negative.
pub fn scan_grid(lambda_min: f64, lambda_max: f64, points_per_decade: usize) -> Result<Vec<f64>> {
    if !(lambda_min < lambda_max && lambda_max < 0.0) || !lambda_min.is_finite() || points_per_decade == 0 {
        return Err(Error::InvalidRange { min: lambda_min, max: lambda_max });
    }
    let decades = (lambda_min / lambda_max).log10();
    let n = ((decades * points_per_decade as f64).ceil() as usize).max(1);
    let mut grid: Vec<f64> = (0..=n).map(|i| lambda_max * (lambda_min / lambda_max).powf(i as f64 / n as f64)).collect();
    grid[0] = lambda_max;
    grid[n] = lambda_min;
    Ok(grid)
}

fn eval(spec: &PotentialSpec, lambda: f64) -> std::result::Result<f64, String> {
    match bound_condition(spec, lambda) {
        Ok(f) if f.is_finite() => Ok(f),
        Ok(f) => Err(format!("root function not finite ({f})")),
        Err(e) => Err(e.to_string()),
    }
}

/// Bisection on a sign change of `F`.
fn bisect(spec: &PotentialSpec, (mut lo, mut f_lo, mut hi, mut f_hi): (f64, f64, f64, f64), root_tol: f64) -> Result<(f64, f64)> {
    let tol = root_tol.max(MIN_BRACKET);
    loop {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol * mid.abs() || mid == lo || mid == hi {
            return Ok(if f_lo.abs() <= f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) });
        }
        let f_mid = bound_condition(spec, mid)?;
        if f_mid == 0.0 {
            return Ok((mid, 0.0));
        }
        if f_mid.signum() == f_lo.signum() {
            (lo, f_lo) = (mid, f_mid);
        } else {
            (hi, f_hi) = (mid, f_mid);
        }
    }
}

/// Splits `[a, b]` (values `fa`, `fb`) into sub-brackets with one sign change each.
fn isolate(
    spec: &PotentialSpec,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    depth: usize,
    out: &mut Vec<(f64, f64, f64, f64)>,
) -> Result<()> {
    if depth == MAX_SPLIT_DEPTH {
        if fa.signum() != fb.signum() {
            out.push((a, fa, b, fb));
        }
        return Ok(());
    }
    let mut xs = vec![(a, fa)];
    for i in 1..SUBDIVISIONS {
        let x = a + (b - a) * i as f64 / SUBDIVISIONS as f64;
        xs.push((x, bound_condition(spec, x)?));
    }
    xs.push((b, fb));
    let changes: Vec<usize> = (0..SUBDIVISIONS).filter(|&i| xs[i].1.signum() != xs[i + 1].1.signum()).collect();
    if changes.len() <= 1 {
        if fa.signum() != fb.signum() {
            out.push((a, fa, b, fb));
        }
        return Ok(());
    }
    for i in changes {
        isolate(spec, xs[i].0, xs[i].1, xs[i + 1].0, xs[i + 1].1, depth + 1, out)?;
    }
    Ok(())
}

/// Finds every bound state with `lambda_min <= lambda <= lambda_max < 0`.
///
/// `F` is sampled on a geometric grid (evaluated in parallel, collected in
/// grid order) and every sign change is refined by bisection to relative
/// width `root_tol`. Grid points where `F` cannot be evaluated are reported
/// with their neighbouring bracket instead of being skipped silently.
pub fn find_negative_spectrum(
    spec: &PotentialSpec,
    lambda_min: f64,
    lambda_max: f64,
    points_per_decade: usize,
    root_tol: f64,
) -> Result<SpectrumReport> {
    let grid = scan_grid(lambda_min, lambda_max, points_per_decade)?;
    let values: Vec<std::result::Result<f64, String>> = grid.par_iter().map(|&l| eval(spec, l)).collect();

    let mut failed = Vec::new();
    let mut brackets = Vec::new();
    for i in 0..grid.len() - 1 {
        match (&values[i], &values[i + 1]) {
            (Ok(fa), Ok(fb)) => {
                if fa.signum() != fb.signum() || *fa == 0.0 {
                    brackets.push((grid[i], *fa, grid[i + 1], *fb));
                }
            }
            (Err(e), _) | (_, Err(e)) => failed.push(FailedBracket { lo: grid[i + 1], hi: grid[i], reason: e.clone() }),
        }
    }

    let mut isolated = Vec::new();
    for &(a, fa, b, fb) in &brackets {
        if fa == 0.0 {
            isolated.push((a, fa, a, fa));
            continue;
        }
        isolate(spec, a, fa, b, fb, 0, &mut isolated)?;
    }
    let refined: Vec<Result<(f64, f64)>> =
        isolated.par_iter().map(|&br| if br.0 == br.2 { Ok((br.0, br.1)) } else { bisect(spec, br, root_tol) }).collect();

    let mut roots = Vec::new();
    let mut residuals = Vec::new();
    let mut matching_residuals = Vec::new();
    for (r, &(a, _, b, _)) in refined.into_iter().zip(&isolated) {
        match r.and_then(|(x, f)| BoundState::build(spec, x).map(|s| (x, f, s.mismatch))) {
            Ok((x, f, m)) => {
                if roots.last().is_some_and(|&prev: &f64| (prev - x).abs() <= MIN_BRACKET * x.abs()) {
                    continue;
                }
                roots.push(x);
                residuals.push(f.abs());
                matching_residuals.push(m);
            }
            Err(e) => failed.push(FailedBracket { lo: a.min(b), hi: a.max(b), reason: e.to_string() }),
        }
    }

    let pairing = nearest_partners(&roots, lambda_min);
    Ok(SpectrumReport {
        roots,
        bracketing_grid: ScanGrid { lambda_min, lambda_max, points_per_decade, points: grid.len() },
        residuals,
        matching_residuals,
        pairing,
        failed,
    })
}

fn nearest_partners(roots: &[f64], lambda_min: f64) -> Vec<Pair> {
    let mut out = Vec::new();
    for (i, &li) in roots.iter().enumerate() {
        let target = 4.0 * li;
        if target < lambda_min {
            continue;
        }
        let nearest = roots
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()));
        if let Some((j, &lj)) = nearest {
            let ratio = lj / target;
            out.push(Pair { i, j, lambda_i: li, lambda_j: lj, ratio, error: (ratio - 1.0).abs() });
        }
    }
    out
}

/// Checks that every root deeper than `depth_threshold` whose quadruple was
/// scanned has a partner within `rel_tol` of `4 lambda`.
pub fn scaling_check(report: &SpectrumReport, depth_threshold: f64, rel_tol: f64) -> Result<Vec<Pair>> {
    if report.roots.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut out = Vec::new();
    for pair in nearest_partners(&report.roots, report.bracketing_grid.lambda_min) {
        if pair.lambda_i.abs() < depth_threshold {
            continue;
        }
        if pair.error > rel_tol {
            return Err(Error::MissingPartner { lambda: pair.lambda_i, rel_tol });
        }
        out.push(pair);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_geometric_and_closed() {
        let g = scan_grid(-1000.0, -10.0, 4).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!((g[0], g[8]), (-10.0, -1000.0));
        for w in g.windows(2) {
            assert!((w[1] / w[0] - 10f64.powf(0.25)).abs() < 1e-12);
        }
        assert!(scan_grid(-1.0, -5.0, 4).is_err());
        assert!(scan_grid(-5.0, 1.0, 4).is_err());
    }

    fn report(roots: Vec<f64>, lambda_min: f64) -> SpectrumReport {
        let n = roots.len();
        SpectrumReport {
            roots,
            bracketing_grid: ScanGrid { lambda_min, lambda_max: -10.0, points_per_decade: 64, points: 0 },
            residuals: vec![0.0; n],
            matching_residuals: vec![0.0; n],
            pairing: Vec::new(),
            failed: Vec::new(),
        }
    }

    #[test]
    fn scaling_check_thresholds() {
        let r = report(vec![-72.6416, -210.342, -715.831, -841.391, -2863.33], -3000.0);
        let pairs = scaling_check(&r, 200.0, 1e-3).unwrap();
        // -72.6 is exempt, -841.391 has its quadruple outside the range
        assert_eq!(pairs.iter().map(|p| p.i).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(pairs[0].j, 3);
        assert!((pairs[0].error - 2.7e-5).abs() < 2e-6);
        assert!(matches!(scaling_check(&r, 50.0, 1e-3), Err(Error::MissingPartner { .. })));
        assert!(matches!(scaling_check(&report(vec![], -1e3), 200.0, 1e-3), Err(Error::EmptyReport)));
    }
}
