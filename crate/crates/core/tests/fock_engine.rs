//! Sector dynamics against a dense tensor-product oracle.

use std::sync::Arc;

use matterwave::fock::{
    build_matrix, ChargeRule, FockSector, Ladder, ModeSet, OperatorExpression,
    SpectralDecomposition, StateVector, Tolerances,
};
use matterwave::Error;
use nalgebra::{Complex, DMatrix, DVector};
use proptest::prelude::*;

type C = Complex<f64>;
type Op = OperatorExpression<f64>;

/// Ladder operators on `(cutoff + 1)^modes`, mode 0 most significant.
struct Dense {
    modes: usize,
    levels: usize,
}

impl Dense {
    fn dim(&self) -> usize {
        self.levels.pow(self.modes as u32)
    }

    fn lower(&self, mode: usize) -> DMatrix<C> {
        let single = DMatrix::from_fn(self.levels, self.levels, |r, c| {
            if c == r + 1 {
                C::new((c as f64).sqrt(), 0.0)
            } else {
                C::new(0.0, 0.0)
            }
        });
        let id = DMatrix::<C>::identity(self.levels, self.levels);
        (0..self.modes).fold(DMatrix::identity(1, 1), |acc, k| {
            acc.kronecker(if k == mode { &single } else { &id })
        })
    }

    fn raise(&self, mode: usize) -> DMatrix<C> {
        self.lower(mode).adjoint()
    }

    fn index(&self, occ: &[u32]) -> usize {
        occ.iter().fold(0, |acc, &n| acc * self.levels + n as usize)
    }

    fn monomial(&self, coefficient: C, factors: &[Ladder]) -> DMatrix<C> {
        let mut m = DMatrix::<C>::identity(self.dim(), self.dim()) * coefficient;
        for f in factors {
            let op = match f.kind {
                matterwave::fock::LadderKind::Raise => self.raise(f.mode),
                matterwave::fock::LadderKind::Lower => self.lower(f.mode),
            };
            m *= op;
        }
        m
    }

    fn express(&self, expr: &Op) -> DMatrix<C> {
        expr.terms
            .iter()
            .fold(DMatrix::zeros(self.dim(), self.dim()), |acc, t| {
                acc + self.monomial(t.coefficient, &t.factors)
            })
    }

    fn evolve(&self, h: &DMatrix<C>, psi: &DVector<C>, t: f64) -> DVector<C> {
        (h * C::new(0.0, -t)).exp() * psi
    }
}

fn labels(n: usize) -> ModeSet {
    ModeSet::new((0..n).map(|i| format!("m{i}"))).unwrap()
}

/// Random number-conserving Hermitian Hamiltonian on three modes.
fn hamiltonian(hop: &[(usize, usize, f64, f64)], pair: &[(usize, usize, usize, usize, f64)]) -> Op {
    let (r, l) = (Ladder::raise, Ladder::lower);
    let mut h = Op::zero();
    for &(i, j, re, im) in hop {
        let t = Op::monomial(C::new(re, im), vec![r(i), l(j)]);
        h = h + t.adjoint() + t;
    }
    for &(i, j, k, m, u) in pair {
        let t = Op::monomial(C::new(u, 0.0), vec![r(i), r(j), l(k), l(m)]);
        h = h + t.adjoint() + t;
    }
    h
}

fn hop() -> impl Strategy<Value = (usize, usize, f64, f64)> {
    (0..3usize, 0..3usize, -1.0..1.0f64, -1.0..1.0f64)
}

fn pair() -> impl Strategy<Value = (usize, usize, usize, usize, f64)> {
    (0..3usize, 0..3usize, 0..3usize, 0..3usize, -0.5..0.5f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sector_evolution_matches_full_space(
        hops in prop::collection::vec(hop(), 1..4),
        pairs in prop::collection::vec(pair(), 0..3),
        total in 1u32..5,
        t in 0.0..3.0f64,
    ) {
        let h = hamiltonian(&hops, &pairs);
        let sector = Arc::new(FockSector::enumerate(labels(3), vec![ChargeRule::total(3, total as i64)]).unwrap());
        let spectrum = SpectralDecomposition::from_sparse(&build_matrix(&h, &sector).unwrap(), &Tolerances::default()).unwrap();
        let start = [total, 0, 0];
        let psi0 = StateVector::basis(sector.clone(), &start).unwrap();
        let psi = spectrum.project(&psi0).unwrap().at(t, 1.0);

        let dense = Dense { modes: 3, levels: total as usize + 1 };
        let mut v0 = DVector::<C>::zeros(dense.dim());
        v0[dense.index(&start)] = C::new(1.0, 0.0);
        let full = dense.evolve(&dense.express(&h), &v0, t);
        let mut inside = 0.0;
        for (k, occ) in sector.states().iter().enumerate() {
            let a = full[dense.index(occ)];
            prop_assert!((psi.amplitudes()[k] - a).norm() < 1e-10);
            inside += a.norm_sqr();
        }
        prop_assert!((inside - 1.0).abs() < 1e-10);
        prop_assert!((psi.norm() - 1.0).abs() < 1e-10);

        let back = spectrum.project(&psi).unwrap().at(-t, 1.0);
        prop_assert!((back.amplitudes() - psi0.amplitudes()).norm() < 1e-10);
    }

    #[test]
    fn canonical_form_represents_the_same_operator(
        factors in prop::collection::vec((0..2usize, any::<bool>()), 1..5),
        re in -1.0..1.0f64,
    ) {
        let ladders: Vec<Ladder> = factors
            .iter()
            .map(|&(m, up)| if up { Ladder::raise(m) } else { Ladder::lower(m) })
            .collect();
        let expr = Op::monomial(C::new(re, 0.5), ladders);
        let canon = expr.canonicalize();
        prop_assert!(canon.is_normal_ordered());
        prop_assert_eq!(canon.canonicalize(), canon.clone());

        // deep enough that no product of up to four factors reaches the top level
        let dense = Dense { modes: 2, levels: 9 };
        let a = dense.express(&expr);
        let b = dense.express(&canon);
        let keep: Vec<usize> = (0..dense.dim()).filter(|&k| k / 9 < 4 && k % 9 < 4).collect();
        for &c in &keep {
            for r in 0..dense.dim() {
                prop_assert!((a[(r, c)] - b[(r, c)]).norm() < 1e-9);
            }
        }
    }
}

#[test]
fn hamiltonian_commutes_with_its_charges() {
    let (r, l) = (Ladder::raise, Ladder::lower);
    let h = Op::monomial(C::new(0.7, 0.0), vec![r(0), r(1), l(2), l(3)]);
    let h = h.adjoint() + h + Op::number(0) * Op::number(2);
    let dense = Dense {
        modes: 4,
        levels: 4,
    };
    let hm = dense.express(&h);
    for q in [
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
        [1.0, -1.0, 0.0, 0.0],
    ] {
        let qm = (0..4).fold(DMatrix::<C>::zeros(dense.dim(), dense.dim()), |acc, i| {
            acc + dense.express(&Op::number(i)) * C::new(q[i], 0.0)
        });
        let comm = &hm * &qm - &qm * &hm;
        assert!(comm.iter().all(|v| v.norm() < 1e-12));
    }
    // a sector whose rules this Hamiltonian breaks is refused
    let sector = FockSector::enumerate(
        labels(4),
        vec![
            ChargeRule::new(vec![1, 1, 0, 0], 2),
            ChargeRule::total(4, 2),
        ],
    )
    .unwrap();
    assert!(matches!(
        build_matrix(&h, &sector),
        Err(Error::ChargeViolation { .. })
    ));
}

#[test]
fn truncated_sector_matches_truncated_dense_space() {
    let (r, l) = (Ladder::raise, Ladder::lower);
    let t = Op::monomial(C::new(0.4, 0.0), vec![r(0), r(1), l(2)]);
    let h = t.adjoint() + t + Op::number(2).scale_real(0.3);
    let cutoff = 5;
    let sector = Arc::new(
        FockSector::enumerate_truncated(
            labels(3),
            vec![ChargeRule::new(vec![1, 0, 1], 2)],
            vec![cutoff; 3],
        )
        .unwrap(),
    );
    let hm = build_matrix(&h, &sector).unwrap().to_dense();
    let dense = Dense {
        modes: 3,
        levels: cutoff as usize + 1,
    };
    let full = dense.express(&h);
    for (i, a) in sector.states().iter().enumerate() {
        for (j, b) in sector.states().iter().enumerate() {
            assert!((hm[(i, j)] - full[(dense.index(a), dense.index(b))]).norm() < 1e-12);
        }
    }
}
