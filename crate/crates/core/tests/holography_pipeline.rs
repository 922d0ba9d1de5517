use std::f64::consts::PI;

use matterwave::holography::{
    aperture_field, compose_hologram, de_broglie_wavelength, gp_ground_state, harmonic_tf_mu_1d,
    phase_imprint, propagate, reconstruct, sodium_mass, tf_energy, thomas_fermi_density,
    GpSettings, Grid, ImprintModel, PotentialMap, ReconstructionTarget, ScalarField, SearchRange,
    Spectral, HBAR,
};
use nalgebra::Complex;

#[test]
fn gp_approaches_thomas_fermi_at_strong_coupling() {
    let grid = Grid::<f64>::new_1d(1024, 0.05).unwrap();
    let v = PotentialMap::harmonic(grid, [1.0, 0.0], 1.0).unwrap();
    let (g, n) = (1.0, 667.0);
    let closed = harmonic_tf_mu_1d(1.0, 1.0, g, n);
    // the sampled edge of the profile limits the agreement to about (dx / R)^2
    let fine = Grid::<f64>::new_1d(4096, 0.01).unwrap();
    let mu = thomas_fermi_density(
        &PotentialMap::harmonic(fine, [1.0, 0.0], 1.0).unwrap(),
        g,
        n,
    )
    .unwrap()
    .mu;
    assert!((mu - closed).abs() < 1e-6 * closed);

    let tf = thomas_fermi_density(&v, g, n).unwrap();

    let gs = gp_ground_state(&v, g, n, 1.0, &GpSettings::default()).unwrap();
    let rho = gs.density();
    let peak = tf.max_density();
    for (r, t) in rho.iter().zip(&tf.density) {
        if *t > 0.5 * peak {
            assert!((r - t).abs() < 0.05 * t, "{r} vs {t}");
        }
    }
    assert!(gs.energy <= tf_energy(&tf, &v, 1.0));
    assert!(gs.energy_history.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn phase_rectangle_far_field_is_a_dirichlet_envelope() {
    // depth u inside |x| < w: density steps by u/g, eta chosen for a pi step
    let n = 1024;
    let grid = Grid::<f64>::new_1d(n, 1.0).unwrap();
    let (u, g) = (2.0, 0.5);
    let values = grid
        .coordinates(0)
        .iter()
        .map(|&x| if x.abs() < 40.0 { -u } else { 0.0 })
        .collect();
    let v = PotentialMap::new(grid, values).unwrap();
    let tf = thomas_fermi_density(&v, g, 5e3).unwrap();
    let beam = ScalarField::from_fn(grid, 1e-2, |_, _| Complex::new(1.0, 0.0)).unwrap();
    let model = ImprintModel {
        eta: PI * g / u,
        incidence_angle: 0.0,
        thickness: 0.0,
    };
    let mut spec = phase_imprint(&beam, &tf, &model).unwrap().field.amplitudes;
    Spectral::new(&grid).forward(&mut spec);

    let width = grid
        .coordinates(0)
        .iter()
        .filter(|x| x.abs() < 40.0)
        .count() as f64;
    for (k, c) in spec.iter().enumerate().skip(1) {
        let s = PI * k as f64 / n as f64;
        let expect = 2.0 * ((s * width).sin() / s.sin()).abs();
        assert!((c.norm() - expect).abs() < 1e-9 * (n as f64), "bin {k}");
    }
}

#[test]
fn fringes_carry_the_reference_tilt() {
    let grid = Grid::<f64>::new_1d(4096, 0.25e-6).unwrap();
    let lam = 0.589e-6;
    let object = aperture_field(grid, lam, 20e-6, 1e-6).unwrap();
    let tilt = 0.2f64;
    let reference = ScalarField::tilted_plane_wave(grid, lam, tilt).unwrap();
    let trap = PotentialMap::constant(grid, 0.0).unwrap();

    let bare = compose_hologram(&object, &reference, &trap, 0.0, 1.0, 1.0).unwrap();
    let flat = thomas_fermi_density(&trap, 1.0, 1.0).unwrap();
    assert_eq!(bare.profile.density, flat.density);

    let h = compose_hologram(&object, &reference, &trap, 0.1, 1.0, 1e3).unwrap();
    assert!(!h.fragmented);
    let mut spec: Vec<Complex<f64>> = h
        .profile
        .density
        .iter()
        .map(|&r| Complex::new(r, 0.0))
        .collect();
    Spectral::new(&grid).forward(&mut spec);
    let f = grid.frequencies(0);
    let carrier = tilt.sin() / lam;
    let peak = (0..spec.len())
        .filter(|&k| f[k].abs() > 0.5 * carrier)
        .max_by(|&a, &b| spec[a].norm().partial_cmp(&spec[b].norm()).unwrap())
        .unwrap();
    assert!(
        (f[peak].abs() - carrier).abs() <= 1.0 / grid.extent(0),
        "{} vs {carrier}",
        f[peak]
    );
}

#[test]
fn line_hologram_refocuses_the_object() {
    let grid = Grid::<f64>::new_1d(4096, 0.25e-6).unwrap();
    let lam_l = 0.589e-6f64;
    let mass = sodium_mass::<f64>();
    let lam = de_broglie_wavelength(mass, 0.1, HBAR).unwrap();
    let z_o = 300e-6;
    let original = aperture_field(grid, lam_l, 10e-6, 1e-6).unwrap();
    let object = propagate(&original, z_o).unwrap();
    let reference = ScalarField::tilted_plane_wave(grid, lam_l, -(lam_l / 1.25e-6).asin()).unwrap();
    let omega = 2.0 * PI * 20.0;
    let hm = HBAR / mass;
    let mu = omega * omega * 400e-6 * 400e-6 / (2.0 * hm);
    let n = 1e5;
    let g = 4.0 / 3.0 * mu * 400e-6 / n;
    let trap = PotentialMap::harmonic(grid, [omega, 0.0], hm).unwrap();
    let s = 0.075 * mu;
    let holo = compose_hologram(&object, &reference, &trap, s, g, n).unwrap();
    let model = ImprintModel {
        eta: 0.5 * g / s,
        incidence_angle: 0.0,
        thickness: 1e-6,
    };
    let reading = ScalarField::from_fn(grid, lam, |x, _| {
        Complex::new((-(x / 40e-6).powi(8)).exp(), 0.0)
    })
    .unwrap();
    let focus = z_o * lam_l / lam;
    let target = ReconstructionTarget {
        object_intensity: original.intensity(),
        window: (-400e-6, -60e-6),
    };
    let search = SearchRange {
        start: 0.7 * focus,
        end: 1.3 * focus,
        steps: 61,
    };
    let rec = reconstruct(&holo.profile, &model, &reading, &search, &target).unwrap();
    assert!(rec.score >= 0.8, "score {}", rec.score);
    assert!((rec.best_distance / focus - 1.0).abs() < 0.05);
    assert!(rec.image_position.unwrap() < 0.0);
}
