use std::path::{Path, PathBuf};

use bungee_core::reference::{SCALING_PAIR, SCALING_PAIR_ERROR, SPECTRUM, SPECTRUM_REL_TOL, TAIL_PROBABILITY, TAIL_REL_TOL};
use bungee_core::spectral::{
    bound_state_norm_and_tail, eigenfunction, find_negative_spectrum, phase_scan, scaling_check, EigenstateRecord, Pair,
    SpectrumReport, StateKind, ROOT_MATCH_TOL,
};
use bungee_core::wavepacket::{gaussian_packet, l2_distance, observables, uniform_grid, BungeeModel, Expansion};
use bungee_core::{asymptotic_profile, PhysicalParams, PotentialSpec, ProfileKind, DEFAULT_BLOCKS};
use serde::Serialize;

use crate::args::{Cli, Command, LambdaGrid, PhysicalArgs, ScanArgs};
use crate::config::EvolveConfig;
use crate::error::{CliError, CliResult};
use crate::output::{csv, json, write};

/// The reference pair error is quoted to two digits.
const PAIR_ERROR_REL_TOL: f64 = 0.1;

pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let dir = cli.output_dir.as_path();
    let physical = physical(&cli.physical)?;
    match &cli.command {
        Command::Potential { blocks, samples, sigma_max } => potential(dir, *blocks, *samples, *sigma_max, physical),
        Command::Profiles { kind, blocks, samples } => profiles(dir, *kind, *blocks, *samples),
        Command::Eigen { lambda, sigma_max, samples, blocks } => eigen(dir, *lambda, *sigma_max, *samples, *blocks, physical),
        Command::Phase { lgrid, blocks } => phase(dir, *lgrid, *blocks),
        Command::Spectrum(scan) => spectrum(dir, scan, physical),
        Command::Evolve { config } => evolve(dir, config),
        Command::ScalingCheck { scan, threshold, rel_tol } => scaling(dir, scan, *threshold, *rel_tol),
        Command::Report { blocks } => report(dir, *blocks),
    }
}

fn physical(args: &PhysicalArgs) -> CliResult<Option<PhysicalParams>> {
    if args.hbar.is_none() && args.mass.is_none() && args.x0.is_none() {
        return Ok(None);
    }
    let d = PhysicalParams::natural();
    Ok(Some(PhysicalParams::new(args.hbar.unwrap_or(d.hbar), args.mass.unwrap_or(d.mass), args.x0.unwrap_or(d.x0))?))
}

fn spec(blocks: usize) -> CliResult<PotentialSpec> {
    Ok(PotentialSpec::new(blocks)?)
}

fn potential(
    dir: &Path,
    blocks: usize,
    samples: usize,
    sigma_max: f64,
    physical: Option<PhysicalParams>,
) -> CliResult<Vec<PathBuf>> {
    if blocks == 0 || samples == 0 || !(sigma_max > 0.0) {
        return Err(CliError::Usage("potential needs blocks >= 1, samples >= 1 and sigma-max > 0".into()));
    }
    let s = spec(blocks)?;
    let curve = s.sample_curve(blocks, samples, sigma_max);
    let text = match physical {
        None => csv(&["sigma", "v"], curve.iter().map(|&(x, v)| vec![x, v])),
        Some(p) => {
            csv(&["sigma", "v", "x", "potential"], curve.iter().map(|&(x, v)| vec![x, v, x * p.x0, p.energy_from_lambda(v)]))
        }
    };
    Ok(vec![write(dir, "potential.csv", &text)?])
}

#[derive(Serialize)]
struct ProfileSidecar<'a> {
    kind: ProfileKind,
    blocks: usize,
    block_peaks: &'a [f64],
    block_deriv_peaks: &'a [f64],
    partial_norms: &'a [f64],
}

fn profiles(dir: &Path, kind: ProfileKind, blocks: usize, samples: usize) -> CliResult<Vec<PathBuf>> {
    let s = spec(blocks.max(DEFAULT_BLOCKS))?;
    let p = asymptotic_profile(&s, kind, blocks, samples)?;
    let rows = (0..p.grid.len()).rev().map(|i| vec![p.grid[i], p.values[i], p.derivs[i]]);
    let name = match kind {
        ProfileKind::Zeta => "zeta",
        ProfileKind::Phi => "phi",
    };
    let sidecar = ProfileSidecar {
        kind,
        blocks,
        block_peaks: &p.block_peaks,
        block_deriv_peaks: &p.block_deriv_peaks,
        partial_norms: &p.partial_norms,
    };
    Ok(vec![
        write(dir, &format!("profile_{name}.csv"), &csv(&["sigma", "value", "deriv"], rows))?,
        write(dir, &format!("profile_{name}.json"), &json(&sidecar))?,
    ])
}

#[derive(Serialize)]
struct EigenSidecar {
    lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy: Option<f64>,
    kind: StateKind,
    blocks: usize,
    phase_shift: Option<f64>,
    norm: Option<f64>,
    tail_probability: Option<f64>,
    mismatch: Option<f64>,
}

fn eigen_files(
    dir: &Path,
    stem: &str,
    rec: &EigenstateRecord,
    blocks: usize,
    physical: Option<PhysicalParams>,
) -> CliResult<Vec<PathBuf>> {
    let rows = rec.grid.iter().zip(&rec.values).map(|(&x, &v)| vec![x, v]);
    let sidecar = EigenSidecar {
        lambda: rec.lambda,
        energy: physical.map(|p| p.energy_from_lambda(rec.lambda)),
        kind: rec.kind,
        blocks,
        phase_shift: rec.phase_shift,
        norm: rec.norm,
        tail_probability: rec.tail_probability,
        mismatch: rec.mismatch,
    };
    Ok(vec![
        write(dir, &format!("{stem}.csv"), &csv(&["sigma", "psi"], rows))?,
        write(dir, &format!("{stem}.json"), &json(&sidecar))?,
    ])
}

fn eigen(
    dir: &Path,
    lambda: f64,
    sigma_max: f64,
    samples: usize,
    blocks: usize,
    physical: Option<PhysicalParams>,
) -> CliResult<Vec<PathBuf>> {
    let rec = eigenfunction(&spec(blocks)?, lambda, sigma_max, samples)?;
    if let Some(m) = rec.mismatch.filter(|&m| !(m <= ROOT_MATCH_TOL)) {
        eprintln!("warning: lambda = {lambda} is not a bound-state root (matching residual {m:e})");
    }
    eigen_files(dir, "eigen", &rec, blocks, physical)
}

fn phase(dir: &Path, lgrid: LambdaGrid, blocks: usize) -> CliResult<Vec<PathBuf>> {
    let lambdas = lgrid.points();
    let deltas = phase_scan(&spec(blocks)?, &lambdas)?;
    let rows = lambdas.iter().zip(&deltas).map(|(&l, &d)| vec![l, d]);
    Ok(vec![write(dir, "phase.csv", &csv(&["lambda", "delta"], rows))?])
}

fn scan(s: &PotentialSpec, a: &ScanArgs) -> CliResult<SpectrumReport> {
    Ok(find_negative_spectrum(s, a.lmin, a.lmax, a.ppd, a.tol)?)
}

fn unresolved(report: &SpectrumReport) -> Option<CliError> {
    let f = report.failed.first()?;
    Some(CliError::NotConverged(format!(
        "{} bracket(s) unresolved, first [{}, {}]: {}",
        report.failed.len(),
        f.lo,
        f.hi,
        f.reason
    )))
}

#[derive(Serialize)]
struct SpectrumOut<'a> {
    #[serde(flatten)]
    report: &'a SpectrumReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    energies: Option<Vec<f64>>,
}

fn spectrum(dir: &Path, a: &ScanArgs, physical: Option<PhysicalParams>) -> CliResult<Vec<PathBuf>> {
    let report = scan(&spec(a.blocks)?, a)?;
    let out = SpectrumOut {
        report: &report,
        energies: physical.map(|p| report.roots.iter().map(|&l| p.energy_from_lambda(l)).collect()),
    };
    let path = write(dir, "spectrum.json", &json(&out))?;
    match unresolved(&report) {
        Some(e) => Err(e),
        None => Ok(vec![path]),
    }
}

#[derive(Serialize)]
struct Snapshot {
    tau: f64,
    norm: f64,
    mean_position: f64,
    momentum_sign: i8,
    mean_momentum: f64,
    exterior_probability: f64,
    file: String,
}

#[derive(Serialize)]
struct EvolveSummary<'a> {
    config: &'a EvolveConfig,
    bound_lambdas: Vec<f64>,
    spectral_norm: f64,
    reconstruction_error: f64,
    warnings: Vec<String>,
    states: Vec<Snapshot>,
}

fn evolve(dir: &Path, path: &Path) -> CliResult<Vec<PathBuf>> {
    let c = EvolveConfig::load(path)?;
    let g = &c.grids;
    let model = BungeeModel::new(spec(c.blocks)?, c.bound_min)?;
    let grid = uniform_grid(g.sigma_min, g.sigma_max, g.sigma_points)?;
    let expansion = Expansion::new(&model, grid, g.k_max, g.k_points)?;
    let packet = gaussian_packet(c.center, c.width, c.momentum, expansion.grid())?;
    let coefficients = expansion.project(&packet)?;
    let reconstruction_error = l2_distance(&expansion.evolve(&coefficients, 0.0), &packet);

    let mut written = Vec::new();
    let mut states = Vec::new();
    for (i, &tau) in c.tau_list.iter().enumerate() {
        let state = expansion.evolve(&coefficients, tau);
        let rows = state.grid.iter().zip(&state.values).map(|(&x, v)| vec![x, v.re, v.im, v.norm_sqr()]);
        let file = format!("evolve_{i:03}.csv");
        written.push(write(dir, &file, &csv(&["sigma", "re", "im", "abs2"], rows))?);
        let o = observables(&state);
        states.push(Snapshot {
            tau,
            norm: o.norm,
            mean_position: o.mean_position,
            momentum_sign: o.momentum_sign,
            mean_momentum: o.mean_momentum,
            exterior_probability: o.exterior_probability,
            file,
        });
    }
    let summary = EvolveSummary {
        config: &c,
        bound_lambdas: coefficients.bound_lambdas.clone(),
        spectral_norm: coefficients.spectral_norm(),
        reconstruction_error,
        warnings: packet.warnings,
        states,
    };
    written.push(write(dir, "evolve_summary.json", &json(&summary))?);
    Ok(written)
}

#[derive(Serialize)]
struct WorkedPair {
    lambda_i: f64,
    lambda_j: f64,
    error: f64,
    reference_error: f64,
    pass: bool,
}

fn worked_pair(pairs: &[Pair]) -> Option<WorkedPair> {
    let (a, b) = SCALING_PAIR;
    let close = |x: f64, y: f64| (x / y - 1.0).abs() <= SPECTRUM_REL_TOL;
    pairs.iter().find(|p| close(p.lambda_i, a) && close(p.lambda_j, b)).map(|p| WorkedPair {
        lambda_i: p.lambda_i,
        lambda_j: p.lambda_j,
        error: p.error,
        reference_error: SCALING_PAIR_ERROR,
        pass: (p.error / SCALING_PAIR_ERROR - 1.0).abs() <= PAIR_ERROR_REL_TOL,
    })
}

#[derive(Serialize)]
struct ScalingOut<'a> {
    threshold: f64,
    rel_tol: f64,
    pairs: &'a [Pair],
    worked_pair: Option<WorkedPair>,
}

fn scaling(dir: &Path, a: &ScanArgs, threshold: f64, rel_tol: f64) -> CliResult<Vec<PathBuf>> {
    let report = scan(&spec(a.blocks)?, a)?;
    if let Some(e) = unresolved(&report) {
        return Err(e);
    }
    let pairs = match scaling_check(&report, threshold, rel_tol) {
        Ok(p) => p,
        Err(e @ bungee_core::Error::MissingPartner { .. }) => return Err(CliError::FixtureMismatch(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let out = ScalingOut { threshold, rel_tol, worked_pair: worked_pair(&pairs), pairs: &pairs };
    Ok(vec![write(dir, "scaling.json", &json(&out))?])
}

#[derive(Serialize)]
struct SpectrumComparison {
    computed: Vec<f64>,
    reference: Vec<f64>,
    rel_errors: Vec<f64>,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct TailComparison {
    lambda: f64,
    computed: f64,
    reference: f64,
    rel_error: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct ScalingComparison {
    pairs: Vec<Pair>,
    all_partnered: bool,
    worked_pair: Option<WorkedPair>,
}

#[derive(Serialize)]
struct Report {
    blocks: usize,
    spectrum: SpectrumComparison,
    tail: Option<TailComparison>,
    scaling: ScalingComparison,
    files: Vec<String>,
    pass: bool,
}

fn report(dir: &Path, blocks: usize) -> CliResult<Vec<PathBuf>> {
    let s = spec(blocks)?;
    let mut written = potential(dir, 6, 4000, 1.5, None)?;
    for (stem, lambda) in [("scattering_20", 20.0), ("scattering_40", 40.0)] {
        written.extend(eigen_files(dir, stem, &eigenfunction(&s, lambda, 2.0, 2000)?, blocks, None)?);
    }

    let scan_args = ScanArgs { lmin: -2e5, lmax: -10.0, ppd: 64, tol: 1e-12, blocks };
    let r = scan(&s, &scan_args)?;
    if let Some(e) = unresolved(&r) {
        return Err(e);
    }
    written.push(write(dir, "spectrum.json", &json(&SpectrumOut { report: &r, energies: None }))?);
    for i in [1, 4] {
        if let Some(&l) = r.roots.get(i - 1) {
            written.extend(eigen_files(dir, &format!("bound_{i}"), &eigenfunction(&s, l, 2.0, 2000)?, blocks, None)?);
        }
    }

    let rel_errors: Vec<f64> = r.roots.iter().zip(SPECTRUM).map(|(a, b)| (a / b - 1.0).abs()).collect();
    let spectrum = SpectrumComparison {
        pass: r.roots.len() == SPECTRUM.len() && rel_errors.iter().all(|&e| e <= SPECTRUM_REL_TOL),
        computed: r.roots.clone(),
        reference: SPECTRUM.to_vec(),
        rel_errors,
        tolerance: SPECTRUM_REL_TOL,
    };

    let target = SCALING_PAIR.1;
    let nearest = r.roots.iter().copied().min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()));
    let tail = match nearest {
        Some(l) => {
            let t = bound_state_norm_and_tail(&s, l)?.tail_probability;
            let rel_error = (t / TAIL_PROBABILITY - 1.0).abs();
            Some(TailComparison {
                lambda: l,
                computed: t,
                reference: TAIL_PROBABILITY,
                rel_error,
                tolerance: TAIL_REL_TOL,
                pass: rel_error <= TAIL_REL_TOL,
            })
        }
        None => None,
    };

    let (pairs, all_partnered) = match scaling_check(&r, 200.0, 1e-3) {
        Ok(p) => (p, true),
        Err(_) => (r.pairing.clone(), false),
    };
    let scaling = ScalingComparison { worked_pair: worked_pair(&pairs), pairs, all_partnered };

    let mut failures = Vec::new();
    if !spectrum.pass {
        failures.push("spectrum");
    }
    if !tail.as_ref().is_some_and(|t| t.pass) {
        failures.push("tail probability");
    }
    if !scaling.all_partnered || !scaling.worked_pair.as_ref().is_some_and(|w| w.pass) {
        failures.push("scaling pairs");
    }
    let files = written.iter().filter_map(|p| p.file_name()).map(|f| f.to_string_lossy().into_owned()).collect();
    let summary = Report { blocks, spectrum, tail, scaling, files, pass: failures.is_empty() };
    let path = write(dir, "report.json", &json(&summary))?;
    written.push(path.clone());
    if failures.is_empty() {
        Ok(written)
    } else {
        Err(CliError::FixtureMismatch(format!(
            "{} differ from the reference values (see {})",
            failures.join(", "),
            path.display()
        )))
    }
}
