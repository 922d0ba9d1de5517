use matterwave::fock::{build_matrix, FockSector};
use matterwave::paramp::{
    correlations, drift_matrix, mode_set, propagate, run_series, spontaneous_g2,
    three_mode_hamiltonian, FockOracle, GaussianState, ThreeModeParams, MINUS, PLUS, PROBE,
};
use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;

type C = Complex<f64>;

fn lowering(sector: &FockSector, mode: usize) -> DMatrix<C> {
    let mut m = DMatrix::zeros(sector.dim(), sector.dim());
    for (col, occ) in sector.states().iter().enumerate() {
        if occ[mode] > 0 {
            let mut down = occ.clone();
            down[mode] -= 1;
            let row = sector.position(&down).unwrap();
            m[(row, col)] = C::new((occ[mode] as f64).sqrt(), 0.0);
        }
    }
    m
}

/// Reads `M` off `[v_i, H] = sum_j M_ij v_j`, `v = (a, c+, c-^dagger)`, using
/// only columns far enough from the cutoff that truncation cannot enter.
fn drift_from_commutators(p: &ThreeModeParams<f64>, cutoff: u32) -> (DMatrix<f64>, f64) {
    let sector = FockSector::enumerate_truncated(mode_set(), vec![], vec![cutoff; 3]).unwrap();
    let h = build_matrix(&three_mode_hamiltonian(p), &sector)
        .unwrap()
        .to_dense();
    let v = [
        lowering(&sector, PROBE),
        lowering(&sector, PLUS),
        lowering(&sector, MINUS).adjoint(),
    ];
    let cols: Vec<usize> = (0..sector.dim())
        .filter(|&c| sector.state(c).iter().all(|&n| n + 2 <= cutoff))
        .collect();
    let inner = |a: &DMatrix<C>, b: &DMatrix<C>| -> C {
        cols.iter()
            .map(|&c| {
                (0..a.nrows())
                    .map(|r| a[(r, c)].conj() * b[(r, c)])
                    .sum::<C>()
            })
            .sum()
    };
    let mut m = DMatrix::zeros(3, 3);
    let mut residual = 0.0f64;
    for i in 0..3 {
        let comm = &v[i] * &h - &h * &v[i];
        let mut rest = comm.clone();
        for j in 0..3 {
            let coeff = inner(&v[j], &comm) / inner(&v[j], &v[j]);
            assert!(coeff.im.abs() < 1e-12);
            m[(i, j)] = coeff.re;
            rest -= &v[j] * coeff;
        }
        for &c in &cols {
            for r in 0..rest.nrows() {
                residual = residual.max(rest[(r, c)].norm());
            }
        }
    }
    (m, residual)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn drift_matrix_matches_commutators(chi in 0.05..2.0f64, delta in -3.0..3.0f64) {
        let p = ThreeModeParams::new(chi, delta, 1.0).unwrap();
        let (m, residual) = drift_from_commutators(&p, 5);
        let expect = drift_matrix(&p);
        prop_assert!(residual < 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((m[(i, j)] - expect[(i, j)].re).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn spontaneous_run_follows_closed_forms() {
    let p = ThreeModeParams::new(1.0, 0.0, 1.0).unwrap();
    let grid: Vec<f64> = (1..=200).map(|k| k as f64 * 0.01).collect();
    for (s, c) in run_series(&GaussianState::vacuum(), &p, &grid).unwrap() {
        let (ap, am) = spontaneous_g2(s.intensities());
        assert!((c.g2_pair(PROBE, PLUS).unwrap() - ap).abs() < 1e-9);
        assert!((c.g2_pair(PROBE, MINUS).unwrap() - am).abs() < 1e-9);
        assert!((c.g2_pair(MINUS, PLUS).unwrap() - am).abs() < 1e-9 * am);
    }
}

#[test]
fn gaussian_matches_fock_at_early_times() {
    let p = ThreeModeParams::new(1.0, 0.0, 1.0).unwrap();
    let oracle = FockOracle::new(&p, [0, 0, 0], 30).unwrap();
    for k in 1..=7 {
        let t = 0.1 * k as f64;
        let exact = oracle.moments(t).unwrap();
        let gauss = propagate(&GaussianState::vacuum(), &p, t).unwrap();
        let (a, b) = (exact.correlations(), correlations(&gauss));
        for i in 0..3 {
            let (x, y) = (a.intensities()[i], b.intensities()[i]);
            assert!((x - y).abs() <= 1e-9 * y, "t={t} I{i}: {x} vs {y}");
            for j in i + 1..3 {
                let (x, y) = (a.g2_pair(i, j).unwrap(), b.g2_pair(i, j).unwrap());
                assert!((x - y).abs() <= 1e-8 * y, "t={t} g2 {i}{j}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn fock_oracle_conserves_charge() {
    let p = ThreeModeParams::<f64>::new(0.5, -1.0, 1.0).unwrap();
    let oracle = FockOracle::new(&p, [1, 0, 0], 30).unwrap();
    let m = oracle.moments(0.8).unwrap();
    let charge = m.intensities[PROBE] + m.intensities[PLUS] - m.intensities[MINUS];
    assert!((charge - 1.0).abs() < 1e-10);
}
