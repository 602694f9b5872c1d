use bungee_core::spectral::bound_state_norm_and_tail;
use bungee_core::wavepacket::{default_sigma_grid, gaussian_packet, l2_distance, observables, BungeeModel, Expansion};
use bungee_core::{PotentialSpec, DEFAULT_BLOCKS};

const TAUS: [f64; 8] = [0.05, 0.1, 0.125, 0.15, 0.175, 0.2, 0.25, 0.3];

fn setup() -> (BungeeModel, Expansion) {
    let model = BungeeModel::new(PotentialSpec::new(DEFAULT_BLOCKS).unwrap(), Some(-2e5)).unwrap();
    let e = Expansion::new(&model, default_sigma_grid(), 28.0, 4096).unwrap();
    (model, e)
}

#[test]
fn bounce_on_the_cliff() {
    let (model, e) = setup();
    let p = gaussian_packet(3.0, 0.3, -8.0, e.grid()).unwrap();
    let c = e.project(&p).unwrap();
    let recon = e.evolve(&c, 0.0);
    let recon_err = l2_distance(&recon, &p);
    assert!(recon_err <= 1e-3, "{recon_err}");
    assert!((c.spectral_norm() - 1.0).abs() <= 1e-3);

    // deep bound states barely touch an exterior packet
    for (l, cb) in c.bound_lambdas.iter().zip(&c.c_bound) {
        let tail = bound_state_norm_and_tail(&model.spec, *l).unwrap().tail_probability;
        if tail < 1e-10 {
            assert!(cb.norm() <= 1e-7, "lambda={l}: {}", cb.norm());
        }
    }

    let grid = e.grid();
    let deep = grid.partition_point(|&x| x < 1.0 / 16.0);
    let mut bounced = false;
    for tau in TAUS {
        let s = e.evolve(&c, tau);
        let o = observables(&s);
        assert!((o.norm - 1.0).abs() <= 1e-3, "tau={tau}: {}", o.norm);
        let d: Vec<f64> = s.values[..deep].iter().map(|v| v.norm_sqr()).collect();
        let below = bungee_core::integrals::trapezoid(&grid[..deep], &d);
        assert!(below <= 1e-3, "tau={tau}: {below:e}");
        bounced |= o.momentum_sign > 0 && o.exterior_probability >= 0.9;
    }
    assert!(bounced);
}

#[test]
fn synthesis_is_deterministic() {
    let (_, e) = setup();
    let p = gaussian_packet(3.0, 0.3, -8.0, e.grid()).unwrap();
    let c = e.project(&p).unwrap();
    let a = e.evolve(&c, 0.15);
    let b = e.evolve(&c, 0.15);
    assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
}
