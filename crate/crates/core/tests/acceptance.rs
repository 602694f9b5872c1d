//! One line per acceptance criterion; exits non-zero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::time::Instant;

use bungee_core::boundary::{asymptotic_profile, ProfileKind};
use bungee_core::reference::{SCALING_PAIR, SCALING_PAIR_ERROR, SPECTRUM, SPECTRUM_REL_TOL, TAIL_PROBABILITY, TAIL_REL_TOL};
use bungee_core::spectral::{
    bound_state_norm_and_tail, eigenfunction, find_negative_spectrum, perturbation_expectation, scaling_check, BoundState,
    SpectrumReport,
};
use bungee_core::wavepacket::{default_sigma_grid, gaussian_packet, l2_distance, observables, BungeeModel, Expansion};
use bungee_core::{transfer, PotentialSpec, DEFAULT_BLOCKS, KAPPA0};
use common::{matrix_rel_err, oracle_paths, rk4_transfer};

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn spec() -> PotentialSpec {
    PotentialSpec::new(DEFAULT_BLOCKS).unwrap()
}

fn spectrum() -> SpectrumReport {
    find_negative_spectrum(&spec(), -2e5, -10.0, 64, 1e-12).unwrap()
}

fn nearest(report: &SpectrumReport, target: f64) -> f64 {
    *report.roots.iter().min_by(|a, b| (*a - target).abs().total_cmp(&(*b - target).abs())).unwrap()
}

fn spectrum_reproduction() -> Outcome {
    let start = Instant::now();
    let r = spectrum();
    let secs = start.elapsed().as_secs_f64();
    let worst = r.roots.iter().zip(SPECTRUM).map(|(a, b)| (a / b - 1.0).abs()).fold(0.0, f64::max);
    let ok = r.roots.len() == SPECTRUM.len() && worst <= SPECTRUM_REL_TOL && secs < 30.0;
    (ok, format!("{} roots, worst relative error {worst:.2e}, {secs:.2} s", r.roots.len()))
}

fn scaling_law() -> Outcome {
    let r = spectrum();
    let pairs = match scaling_check(&r, 200.0, 1e-3) {
        Ok(p) => p,
        Err(e) => return (false, e.to_string()),
    };
    let (a, b) = SCALING_PAIR;
    let pair = pairs.iter().find(|p| (p.lambda_i / a - 1.0).abs() < 1e-4 && (p.lambda_j / b - 1.0).abs() < 1e-4);
    match pair {
        Some(p) => {
            let ok = (p.error / SCALING_PAIR_ERROR - 1.0).abs() < 0.1;
            let worst = pairs.iter().map(|p| p.error).fold(0.0, f64::max);
            (ok, format!("{} pairs, worst {worst:.2e}; ({a}, {b}) ratio error {:.3e}", pairs.len(), p.error))
        }
        None => (false, "worked pair not found".into()),
    }
}

fn tail_probability() -> Outcome {
    let r = spectrum();
    let l = nearest(&r, -841.391);
    match bound_state_norm_and_tail(&spec(), l) {
        Ok(t) => {
            let rel = (t.tail_probability / TAIL_PROBABILITY - 1.0).abs();
            (
                rel <= TAIL_REL_TOL,
                format!("lambda {l:.6}: tail {:.4e} vs {TAIL_PROBABILITY:.4e} ({:.1}% off)", t.tail_probability, 100.0 * rel),
            )
        }
        Err(e) => (false, e.to_string()),
    }
}

fn recursions() -> Outcome {
    let s = spec();
    let z = asymptotic_profile(&s, ProfileKind::Zeta, 20, 8).unwrap();
    let p = asymptotic_profile(&s, ProfileKind::Phi, 20, 8).unwrap();
    let mut worst = [0.0f64; 5];
    for n in 1..=20usize {
        let edge = 2f64.powi(-(n as i32));
        let four_n = 4f64.powi(n as i32);
        let iz = z.grid.iter().position(|&g| g == edge).unwrap();
        let ip = p.grid.iter().position(|&g| g == edge).unwrap();
        worst[0] = worst[0].max(z.values[iz].abs() / four_n);
        worst[1] = worst[1].max((z.derivs[iz] / four_n - 1.0).abs());
        let norm = (2f64.powi(n as i32) - 1.0) * 13.0 * std::f64::consts::PI / (16.0 * KAPPA0.powi(3));
        worst[2] = worst[2].max((z.partial_norms[n - 1] / norm - 1.0).abs());
        worst[3] = worst[3].max((p.values[ip] * four_n - 1.0).abs());
        // a solution's slope scales as kappa times its size
        let kappa = 2f64.powi(n as i32 + 1) * KAPPA0;
        worst[4] = worst[4].max(p.derivs[ip].abs() / (kappa * p.values[ip].abs()));
    }
    let ok = worst[0] <= 1e-9 && worst[1] <= 1e-10 && worst[2] <= 1e-10 && worst[3] <= 1e-10 && worst[4] <= 1e-10;
    (
        ok,
        format!(
            "zeta value {:.1e}, slope {:.1e}, norm {:.1e}; phi value {:.1e}, slope {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn determinant() -> Outcome {
    let s = spec();
    let mut tested = 0;
    let mut failed = 0;
    let mut worst = (0.0f64, String::new());
    for lambda in [-2e5, -841.391, -100.0, 0.0, 20.0, 1e3] {
        for from in [2.0, 1.0, 0.7] {
            for n in [1, 3, 5, 10, 20, 40] {
                let to = 2f64.powi(-n);
                let w = transfer(&s, from, to, lambda).unwrap();
                let err = (w.det_restored() - 1.0).abs();
                tested += 1;
                if !(err <= 1e-10) {
                    failed += 1;
                }
                if !(err <= worst.0) {
                    worst = (err, format!("lambda {lambda}, {from} -> 2^-{n}, log scale {:.1}", w.log_scale));
                }
            }
        }
    }
    (failed == 0, format!("{failed} of {tested} transfers off by more than 1e-10; worst {:.1e} at {}", worst.0, worst.1))
}

fn oracle() -> Outcome {
    let s = PotentialSpec::new(8).unwrap();
    let mut worst = 0.0f64;
    for lambda in [0.0, 20.0, -100.0] {
        for (from, to) in oracle_paths() {
            let exact = transfer(&s, from, to, lambda).unwrap().true_matrix();
            worst = worst.max(matrix_rel_err(exact, rk4_transfer(&s, from, to, lambda, 1e-6)));
        }
    }
    (worst <= 1e-5, format!("worst relative difference {worst:.2e} over {} paths", 3 * oracle_paths().len()))
}

fn exterior_form() -> Outcome {
    let s = spec();
    let mut worst_ext = 0.0f64;
    for lambda in [20.0f64, 40.0] {
        let rec = eigenfunction(&s, lambda, 2.0, 2000).unwrap();
        let (k, delta) = (lambda.sqrt(), rec.phase_shift.unwrap());
        for (x, v) in rec.grid.iter().zip(&rec.values).filter(|(x, _)| **x >= 1.0) {
            worst_ext = worst_ext.max((v - (k * (x - 1.0) + delta).sin()).abs());
        }
    }
    let r = spectrum();
    let worst_match = r.roots.iter().map(|&l| BoundState::build(&s, l).unwrap().mismatch).fold(0.0, f64::max);
    (
        worst_ext <= 1e-12 && worst_match <= 1e-8,
        format!("exterior residual {worst_ext:.1e}; bound log-derivative mismatch {worst_match:.1e}"),
    )
}

fn wavepacket() -> Outcome {
    let start = Instant::now();
    let model = BungeeModel::new(spec(), Some(-2e5)).unwrap();
    let e = Expansion::new(&model, default_sigma_grid(), 28.0, 4096).unwrap();
    let p = gaussian_packet(3.0, 0.3, -8.0, e.grid()).unwrap();
    let c = e.project(&p).unwrap();
    let recon = l2_distance(&e.evolve(&c, 0.0), &p);
    let mut norm_drift = 0.0f64;
    let mut bounce = None;
    for tau in [0.05, 0.1, 0.125, 0.15, 0.175, 0.2, 0.25, 0.3] {
        let o = observables(&e.evolve(&c, tau));
        norm_drift = norm_drift.max((o.norm - 1.0).abs());
        if bounce.is_none() && o.momentum_sign > 0 && o.exterior_probability >= 0.9 {
            bounce = Some((tau, o.exterior_probability));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = recon <= 1e-3 && norm_drift <= 1e-3 && bounce.is_some() && secs < 120.0;
    let b = bounce.map_or("no bounce".to_string(), |(t, p)| format!("outgoing at tau {t} with P(sigma > 1) = {p:.3}"));
    (ok, format!("reconstruction {recon:.1e}, norm drift {norm_drift:.1e}, {b}, {secs:.1} s"))
}

fn perturbation() -> Outcome {
    let s = spec();
    let r = spectrum();
    let mut worst = (0.0f64, 0.0f64);
    let mut failed = 0;
    let mut tested = 0;
    for &l in r.roots.iter().filter(|l| l.abs() >= 500.0) {
        let p = perturbation_expectation(&s, l).unwrap();
        tested += 1;
        if !(p.bound_ratio <= 10.0) {
            failed += 1;
        }
        if p.bound_ratio > worst.0 {
            worst = (p.bound_ratio, l);
        }
    }
    (failed == 0, format!("{failed} of {tested} roots exceed ratio 10; worst {:.2e} at lambda {:.6}", worst.0, worst.1))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("spectrum reproduction", spectrum_reproduction),
        ("scaling law", scaling_law),
        ("tail probability", tail_probability),
        ("zeta/phi recursions", recursions),
        ("determinant invariant", determinant),
        ("oracle equivalence", oracle),
        ("eigenfunction exterior form", exterior_form),
        ("wave-packet unitarity and bounce", wavepacket),
        ("perturbation bound", perturbation),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = check();
        if !ok {
            failures += 1;
        }
        println!("criterion {}: {} {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
