use bungee_core::boundary::{asymptotic_profile, ProfileKind};
use bungee_core::spectral::{eigenfunction, scattering_solution, StateKind};
use bungee_core::{PhysicalParams, PotentialSpec, DEFAULT_BLOCKS};

fn spec() -> PotentialSpec {
    PotentialSpec::new(DEFAULT_BLOCKS).unwrap()
}

#[test]
fn scattering_energies_map_to_lambda_twenty_and_forty() {
    let p = PhysicalParams::new(1.0, 1.0, 1.0).unwrap();
    assert_eq!(p.lambda_from_energy(10.0), 20.0);
    assert_eq!(p.lambda_from_energy(20.0), 40.0);
}

#[test]
fn scattering_exterior_is_a_shifted_sine() {
    for lambda in [20.0f64, 40.0] {
        let rec = eigenfunction(&spec(), lambda, 2.0, 4000).unwrap();
        assert_eq!(rec.kind, StateKind::Scattering);
        let k = lambda.sqrt();
        let delta = rec.phase_shift.unwrap();
        for (x, v) in rec.grid.iter().zip(&rec.values).filter(|(x, _)| **x >= 1.0) {
            assert!((v - (k * (x - 1.0) + delta).sin()).abs() <= 1e-12, "lambda={lambda} x={x}");
        }
    }
}

#[test]
fn scattering_interior_approaches_phi() {
    // deep inside the cliff the energy is negligible and successive block edges
    // see the value drop by four with a vanishing slope
    for lambda in [20.0, 40.0] {
        let (sol, _, _) = scattering_solution(&spec(), lambda).unwrap();
        let at = |n: i32| sol.eval(2f64.powi(-n)).unwrap();
        for n in 10..20 {
            let (a, b) = (at(n), at(n + 1));
            assert!((b.psi / a.psi - 0.25).abs() < 1e-3, "lambda={lambda} n={n}");
            assert!(b.dpsi.abs() * 2f64.powi(-n - 1) < 1e-3 * b.psi.abs());
        }
    }
}

#[test]
fn first_bound_state_decays_outside() {
    let lambda = -72.64159082321197;
    let rec = eigenfunction(&spec(), lambda, 3.0, 3000).unwrap();
    assert_eq!(rec.kind, StateKind::Bound);
    assert!(rec.mismatch.unwrap() < 1e-8);
    let mu = (-lambda).sqrt();
    let ext: Vec<(f64, f64)> = rec.grid.iter().zip(&rec.values).filter(|(x, _)| **x >= 1.0).map(|(&x, &v)| (x, v)).collect();
    for w in ext.windows(2) {
        let rate = (w[1].1 / w[0].1).ln() / (w[1].0 - w[0].0);
        assert!((rate + mu).abs() < 1e-9 * mu);
    }
    let t = rec.tail_probability.unwrap();
    assert!(t > 0.0 && t < 1.0);
}

#[test]
fn profile_partial_norms_diverge_for_zeta_only() {
    let s = spec();
    let z = asymptotic_profile(&s, ProfileKind::Zeta, 20, 4).unwrap();
    let p = asymptotic_profile(&s, ProfileKind::Phi, 20, 4).unwrap();
    assert!(z.partial_norms[19] / z.partial_norms[9] > 1000.0);
    assert!(p.partial_norms[19] / p.partial_norms[9] - 1.0 < 1e-9);
    assert!(p.values.iter().chain(&z.values).all(|v| v.is_finite()));
}
