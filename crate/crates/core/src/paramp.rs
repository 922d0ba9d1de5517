//! Three-mode atom-photon parametric amplifier.
//!
//! Modes: the probe field `a` and the two condensate side modes `c+`, `c-`
//! with momenta `+K` and `-K`. In units of `hbar omega_r`
//!
//! ```text
//! H = c+^dagger c+ + c-^dagger c- - delta a^dagger a
//!     + chi (a^dagger c-^dagger + a^dagger c+ + c+^dagger a + c- a)
//! ```
//!
//! The Hamiltonian is quadratic, so Gaussian states stay Gaussian and
//! `v = (a, c+, c-^dagger)` obeys the linear equation `i dv/dt = omega_r M v`.

use nalgebra::{Complex, Matrix3, Matrix6, SymmetricEigen, Vector3, Vector6};

use crate::correlation::CorrelationSnapshot;
use crate::error::{invalid, Error, Result};
use crate::fock::{
    build_matrix, compile_observable, ChargeRule, FockSector, Ladder, ModeSet, OperatorExpression,
    SpectralDecomposition, StateVector, Tolerances,
};
use crate::scalar::{cexp, lit, modulus, to_f64, Real};

pub const MODE_LABELS: [&str; 3] = ["a", "cp", "cm"];
/// Probe photon mode.
pub const PROBE: usize = 0;
/// Side mode with momentum `+K`.
pub const PLUS: usize = 1;
/// Side mode with momentum `-K`.
pub const MINUS: usize = 2;

/// Intensity threshold below which correlations are reported as undefined.
pub const INTENSITY_THRESHOLD: f64 = 1e-12;

/// Microscopic pump-probe parameters (SI units unless `hbar` is set otherwise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpProbeInput<T: Real> {
    /// Atomic dipole moment `d`.
    pub dipole: T,
    /// Ring-cavity length `L`.
    pub cavity_length: T,
    /// Probe-mode cross-section `S` at the sample.
    pub cross_section: T,
    /// Probe wavenumber `k`.
    pub probe_wavenumber: T,
    /// Pump detuning `Delta` from the nearest electronic resonance (angular frequency).
    pub detuning: T,
    /// Pump Rabi frequency `Omega0`.
    pub pump_rabi: Complex<T>,
    /// Mean condensate atom number `N`.
    pub atom_number: T,
    /// Recoil wavenumber `K = |k - k0|`.
    pub recoil_wavenumber: T,
    pub mass: T,
    /// Pump-probe frequency difference `omega0 - omega`.
    pub pump_probe_detuning: T,
    pub hbar: T,
    pub speed_of_light: T,
    pub epsilon0: T,
}

impl<T: Real> PumpProbeInput<T> {
    /// Atom-probe coupling `g = d sqrt(c k / (2 hbar eps0 L S))`.
    pub fn coupling(&self) -> T {
        let two = lit::<T>(2.0);
        self.dipole
            * (self.speed_of_light * self.probe_wavenumber
                / (two * self.hbar * self.epsilon0 * self.cavity_length * self.cross_section))
                .sqrt()
    }

    /// Recoil frequency `omega_r = hbar K^2 / 2M`.
    pub fn recoil_frequency(&self) -> T {
        self.hbar * self.recoil_wavenumber * self.recoil_wavenumber / (lit::<T>(2.0) * self.mass)
    }
}

/// Dimensionless amplifier parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeModeParams<T: Real> {
    pub chi: T,
    pub delta: T,
    pub omega_r: T,
}

impl<T: Real> ThreeModeParams<T> {
    pub fn new(chi: T, delta: T, omega_r: T) -> Result<Self> {
        let p = ThreeModeParams {
            chi,
            delta,
            omega_r,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.chi >= T::zero()) || !self.chi.is_finite() {
            return Err(invalid("chi", "must be finite and non-negative"));
        }
        if !self.delta.is_finite() {
            return Err(invalid("delta", "must be finite"));
        }
        if !(self.omega_r > T::zero()) || !self.omega_r.is_finite() {
            return Err(invalid("omega_r", "must be finite and positive"));
        }
        Ok(())
    }
}

/// `chi = |g| |Omega0| sqrt(N) / (2 omega_r |Delta|)` and
/// `delta = (omega0 - omega) / omega_r`.
///
/// The sign of `Delta` is absorbed into the phase of the probe mode, so `chi`
/// is reported non-negative.
pub fn derive_params<T: Real>(input: &PumpProbeInput<T>) -> Result<ThreeModeParams<T>> {
    if input.detuning == T::zero() || !input.detuning.is_finite() {
        return Err(invalid("detuning", "must be finite and nonzero"));
    }
    if !(input.atom_number >= T::zero()) {
        return Err(invalid("atom_number", "must be non-negative"));
    }
    for (name, v) in [
        ("mass", input.mass),
        ("hbar", input.hbar),
        ("recoil_wavenumber", input.recoil_wavenumber),
        ("cavity_length", input.cavity_length),
        ("cross_section", input.cross_section),
        ("probe_wavenumber", input.probe_wavenumber),
        ("speed_of_light", input.speed_of_light),
        ("epsilon0", input.epsilon0),
    ] {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(invalid(name, "must be finite and positive"));
        }
    }
    let omega_r = input.recoil_frequency();
    let chi = input.coupling().abs() * modulus(input.pump_rabi) * input.atom_number.sqrt()
        / (lit::<T>(2.0) * omega_r * input.detuning.abs());
    ThreeModeParams::new(chi, input.pump_probe_detuning / omega_r, omega_r)
}

/// Drift matrix `M` of `i dv/dt = omega_r M v`, `v = (a, c+, c-^dagger)`.
pub fn drift_matrix<T: Real>(p: &ThreeModeParams<T>) -> Matrix3<Complex<T>> {
    let (x, d) = (p.chi, p.delta);
    let o = T::zero();
    let one = T::one();
    Matrix3::new(-d, x, x, x, one, o, -x, o, -one).map(|v| Complex::new(v, o))
}

/// Eigenvalues of `M`. Complex pairs signal exponential instability with rate
/// `omega_r * Im(lambda)` in the amplitudes.
pub fn drift_eigenvalues<T: Real>(p: &ThreeModeParams<T>) -> Vector3<Complex<T>> {
    drift_matrix(p).map(|v| v.re).complex_eigenvalues()
}

pub fn mode_set() -> ModeSet {
    ModeSet::new(MODE_LABELS).expect("static labels are valid")
}

/// The Hamiltonian in units of `hbar omega_r` as a ladder-operator expression.
pub fn three_mode_hamiltonian<T: Real>(p: &ThreeModeParams<T>) -> OperatorExpression<T> {
    type Op<T> = OperatorExpression<T>;
    let (r, l) = (Ladder::raise, Ladder::lower);
    let chi = Complex::new(p.chi, T::zero());
    let h = Op::number(PLUS)
        + Op::number(MINUS)
        + Op::number(PROBE).scale_real(-p.delta)
        + Op::monomial(chi, vec![r(PROBE), r(MINUS)])
        + Op::monomial(chi, vec![r(PROBE), l(PLUS)])
        + Op::monomial(chi, vec![r(PLUS), l(PROBE)])
        + Op::monomial(chi, vec![l(MINUS), l(PROBE)]);
    h.canonicalize()
}

/// Propagator `U(t) = exp(-i omega_r M t)` for `v = (a, c+, c-^dagger)`.
///
/// Uses the eigen-decomposition of `M`; near eigenvalue collisions (eigenvector
/// matrix condition number above `1e8`) falls back to scaling and squaring.
pub fn propagator<T: Real>(p: &ThreeModeParams<T>, t: T) -> Matrix3<Complex<T>> {
    let m = drift_matrix(p);
    let scale = Complex::new(T::zero(), -p.omega_r * t);
    if let Some(u) = eigen_propagator(&m, scale) {
        return u;
    }
    (m * scale).exp()
}

fn cross<T: Real>(a: &Vector3<Complex<T>>, b: &Vector3<Complex<T>>) -> Vector3<Complex<T>> {
    Vector3::new(
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
}

fn eigen_propagator<T: Real>(
    m: &Matrix3<Complex<T>>,
    scale: Complex<T>,
) -> Option<Matrix3<Complex<T>>> {
    let lambdas = m.map(|v| v.re).complex_eigenvalues();
    let mut v = Matrix3::<Complex<T>>::zeros();
    for k in 0..3 {
        let shifted = m - Matrix3::from_diagonal_element(lambdas[k]);
        let rows: Vec<Vector3<Complex<T>>> = (0..3).map(|i| shifted.row(i).transpose()).collect();
        let best = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(i, j)| cross(&rows[i], &rows[j]))
            .max_by(|a, b| {
                a.norm()
                    .partial_cmp(&b.norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
        let n = best.norm();
        if !(n > lit::<T>(1e-12) * shifted.norm().max(T::one()).powi(2)) {
            return None;
        }
        v.set_column(k, &best.unscale(n));
    }
    let inv = v.try_inverse()?;
    let cond = v.norm() * inv.norm();
    if !(cond <= lit::<T>(1e8)) {
        return None;
    }
    let phases = Matrix3::from_diagonal(&lambdas.map(|l| cexp(l * scale)));
    Some(v * phases * inv)
}

/// Allowed `|U eta U^dagger - eta|` per unit `omega_r t`, relative to `max(1, |U|^2)`.
pub const SYMPLECTIC_TOLERANCE: f64 = 1e-9;

/// `max |U eta U^dagger - eta|` with `eta = diag(1, 1, -1)`.
pub fn symplectic_drift<T: Real>(u: &Matrix3<Complex<T>>) -> T {
    let o = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let eta = Matrix3::from_diagonal(&Vector3::new(one, one, o - one));
    (u * eta * u.adjoint() - eta)
        .iter()
        .fold(T::zero(), |acc, z| acc.max(modulus(*z)))
}

/// Gaussian state of `(a, c+, c-)` given by its first and second moments.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState<T: Real> {
    /// `<b_i>`.
    pub means: Vector3<Complex<T>>,
    /// `N_ij = <b_i^dagger b_j>`.
    pub normal: Matrix3<Complex<T>>,
    /// `A_ij = <b_i b_j>`.
    pub anomalous: Matrix3<Complex<T>>,
}

/// Positivity tolerance on the smallest eigenvalue of the moment matrix.
pub const POSITIVITY_TOLERANCE: f64 = 1e-9;

impl<T: Real> GaussianState<T> {
    pub fn vacuum() -> Self {
        GaussianState {
            means: Vector3::zeros(),
            normal: Matrix3::zeros(),
            anomalous: Matrix3::zeros(),
        }
    }

    /// Product of coherent states with amplitudes `alpha`.
    pub fn coherent(alpha: [Complex<T>; 3]) -> Self {
        let means = Vector3::from(alpha);
        GaussianState {
            means,
            normal: Matrix3::from_fn(|i, j| means[i].conj() * means[j]),
            anomalous: means * means.transpose(),
        }
    }

    /// Intensities `<b_i^dagger b_i>`.
    pub fn intensities(&self) -> [T; 3] {
        [
            self.normal[(0, 0)].re,
            self.normal[(1, 1)].re,
            self.normal[(2, 2)].re,
        ]
    }

    /// `<n+ - n- + n_a>`.
    pub fn charge(&self) -> T {
        let [a, p, m] = self.intensities();
        p - m + a
    }

    fn centered(&self) -> (Matrix3<Complex<T>>, Matrix3<Complex<T>>) {
        let mu = &self.means;
        (
            self.normal - Matrix3::from_fn(|i, j| mu[i].conj() * mu[j]),
            self.anomalous - mu * mu.transpose(),
        )
    }

    /// Smallest eigenvalue of the Hermitian matrix
    /// `[[N, A*], [A, N^T + 1]]` built from centered moments; a physical state
    /// has it non-negative.
    pub fn min_moment_eigenvalue(&self) -> T {
        let (n, a) = self.centered();
        let id = Matrix3::<Complex<T>>::identity();
        let mut g = Matrix6::<Complex<T>>::zeros();
        g.fixed_view_mut::<3, 3>(0, 0).copy_from(&n);
        g.fixed_view_mut::<3, 3>(0, 3)
            .copy_from(&a.map(|z| z.conj()));
        g.fixed_view_mut::<3, 3>(3, 0).copy_from(&a);
        g.fixed_view_mut::<3, 3>(3, 3)
            .copy_from(&(n.transpose() + id));
        let g = (g + g.adjoint()).map(|z| z * Complex::new(lit::<T>(0.5), T::zero()));
        SymmetricEigen::new(g).eigenvalues.min()
    }

    /// Checks finiteness, Hermiticity of `N`, symmetry of `A`, and bosonic positivity.
    pub fn validate(&self) -> Result<()> {
        let finite = |z: &Complex<T>| z.re.is_finite() && z.im.is_finite();
        if !(self.means.iter().all(finite)
            && self.normal.iter().all(finite)
            && self.anomalous.iter().all(finite))
        {
            return Err(invalid("gaussian state", "moments must be finite"));
        }
        let scale = self.normal.norm().max(self.anomalous.norm()).max(T::one());
        let tol = lit::<T>(1e-10) * scale;
        let herm = (self.normal - self.normal.adjoint())
            .iter()
            .fold(T::zero(), |m, z| m.max(modulus(*z)));
        if herm > tol {
            return Err(Error::NotHermitian {
                deviation: to_f64(herm),
            });
        }
        let sym = (self.anomalous - self.anomalous.transpose())
            .iter()
            .fold(T::zero(), |m, z| m.max(modulus(*z)));
        if sym > tol {
            return Err(invalid("anomalous", "moment matrix must be symmetric"));
        }
        let min = self.min_moment_eigenvalue();
        if min < -lit::<T>(POSITIVITY_TOLERANCE) * scale {
            return Err(Error::Unphysical {
                min_eigenvalue: to_f64(min),
            });
        }
        Ok(())
    }

    /// Means of `xi = (b, b^dagger)`.
    fn raw_means(&self) -> Vector6<Complex<T>> {
        Vector6::from_fn(|k, _| {
            if k < 3 {
                self.means[k]
            } else {
                self.means[k - 3].conj()
            }
        })
    }

    /// `Sigma_kl = <xi_k xi_l>` for `xi = (b, b^dagger)`.
    fn raw_moments(&self) -> Matrix6<Complex<T>> {
        let one = Complex::new(T::one(), T::zero());
        Matrix6::from_fn(|k, l| match (k < 3, l < 3) {
            (true, true) => self.anomalous[(k, l)],
            (true, false) => {
                let (i, j) = (k, l - 3);
                self.normal[(j, i)] + if i == j { one } else { Complex::default() }
            }
            (false, true) => self.normal[(k - 3, l)],
            (false, false) => self.anomalous[(k - 3, l - 3)].conj(),
        })
    }

    fn from_raw(means: Vector6<Complex<T>>, sigma: Matrix6<Complex<T>>) -> Self {
        let normal = Matrix3::from_fn(|i, j| sigma[(i + 3, j)]);
        let anomalous = Matrix3::from_fn(|i, j| sigma[(i, j)]);
        let half = Complex::new(lit::<T>(0.5), T::zero());
        GaussianState {
            means: Vector3::from_fn(|i, _| means[i]),
            normal: (normal + normal.adjoint()) * half,
            anomalous: (anomalous + anomalous.transpose()) * half,
        }
    }

    /// Normally ordered or arbitrary-ordered fourth moment
    /// `<x1 x2 x3 x4>` by Wick's theorem, with `x = (mode, dagger)`.
    pub fn fourth_moment(&self, ops: [(usize, bool); 4]) -> Complex<T> {
        let mu = self.raw_means();
        let sigma = self.raw_moments();
        let idx: Vec<usize> = ops
            .iter()
            .map(|&(m, dag)| if dag { m + 3 } else { m })
            .collect();
        let c = |p: usize, q: usize| sigma[(idx[p], idx[q])] - mu[idx[p]] * mu[idx[q]];
        let m = |p: usize| mu[idx[p]];
        let mut acc = m(0) * m(1) * m(2) * m(3);
        // one contraction, the other two factors replaced by their means
        for (p, q, r, s) in [
            (0, 1, 2, 3),
            (0, 2, 1, 3),
            (0, 3, 1, 2),
            (1, 2, 0, 3),
            (1, 3, 0, 2),
            (2, 3, 0, 1),
        ] {
            acc += c(p, q) * m(r) * m(s);
        }
        acc + c(0, 1) * c(2, 3) + c(0, 2) * c(1, 3) + c(0, 3) * c(1, 2)
    }

    /// `<b_i^dagger b_j^dagger b_j b_i>`.
    pub fn pair_moment(&self, i: usize, j: usize) -> T {
        self.fourth_moment([(i, true), (j, true), (j, false), (i, false)])
            .re
    }
}

/// Evolves a Gaussian state for physical time `t`.
pub fn propagate<T: Real>(
    state0: &GaussianState<T>,
    p: &ThreeModeParams<T>,
    t: T,
) -> Result<GaussianState<T>> {
    p.validate()?;
    let u = propagator(p, t);
    let drift = symplectic_drift(&u);
    let span = (p.omega_r * t).abs().max(T::one());
    let norm2 = u.norm() * u.norm();
    let tolerance = lit::<T>(SYMPLECTIC_TOLERANCE) * span * norm2.max(T::one());
    if !(drift <= tolerance) {
        return Err(Error::PropagatorInconsistent {
            drift: to_f64(drift),
            tolerance: to_f64(tolerance),
        });
    }
    // xi(t) = W xi(0) for xi = (a, c+, c-, a^dagger, c+^dagger, c-^dagger)
    let z = Complex::default();
    let w = Matrix6::from_fn(|r, c| {
        let row = |k: usize| -> [Complex<T>; 6] {
            match k {
                0 | 1 => [u[(k, 0)], u[(k, 1)], z, z, z, u[(k, 2)]],
                _ => [
                    z,
                    z,
                    u[(2, 2)].conj(),
                    u[(2, 0)].conj(),
                    u[(2, 1)].conj(),
                    z,
                ],
            }
        };
        if r < 3 {
            row(r)[c]
        } else {
            // conjugate of row r-3 with creation and annihilation swapped
            let base = row(r - 3);
            base[(c + 3) % 6].conj()
        }
    });
    let means = w * state0.raw_means();
    let sigma = w * state0.raw_moments() * w.transpose();
    Ok(GaussianState::from_raw(means, sigma))
}

/// Correlations of the three modes, ordered `(a, c+, c-)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeModeCorrelations<T: Real> {
    pub snapshot: CorrelationSnapshot<T>,
}

impl<T: Real> ThreeModeCorrelations<T> {
    pub fn intensities(&self) -> &[T] {
        &self.snapshot.intensities
    }

    pub fn g2(&self, mode: usize) -> Option<T> {
        self.snapshot.g2[mode]
    }

    pub fn g2_pair(&self, i: usize, j: usize) -> Option<T> {
        self.snapshot.pair(i, j)?.g2
    }

    pub fn classical_margin(&self, i: usize, j: usize) -> Option<T> {
        self.snapshot.pair(i, j)?.classical
    }

    pub fn quantum_margin(&self, i: usize, j: usize) -> Option<T> {
        self.snapshot.pair(i, j)?.quantum
    }
}

/// Equal-time correlations of a Gaussian state.
pub fn correlations<T: Real>(state: &GaussianState<T>) -> ThreeModeCorrelations<T> {
    ThreeModeCorrelations {
        snapshot: CorrelationSnapshot::from_moments(
            state.intensities().to_vec(),
            |i| state.pair_moment(i, i),
            |i, j| state.pair_moment(i, j),
            lit(INTENSITY_THRESHOLD),
        ),
    }
}

/// Closed forms for vacuum input: `g2_{a+} = 2` and
/// `g2_{a-} = sqrt(2 + 1/(I_a + I_+)) sqrt(2 + 1/I_-)`.
pub fn spontaneous_g2<T: Real>(intensities: [T; 3]) -> (T, T) {
    let two = lit::<T>(2.0);
    let [a, p, m] = intensities;
    (
        two,
        (two + T::one() / (a + p)).sqrt() * (two + T::one() / m).sqrt(),
    )
}

/// Correlations along a time grid given in units of `omega_r t`.
pub fn run_series<T: Real>(
    state0: &GaussianState<T>,
    p: &ThreeModeParams<T>,
    omega_r_t: &[T],
) -> Result<Vec<(GaussianState<T>, ThreeModeCorrelations<T>)>> {
    state0.validate()?;
    omega_r_t
        .iter()
        .map(|&tau| {
            let s = propagate(state0, p, tau / p.omega_r)?;
            let c = correlations(&s);
            Ok((s, c))
        })
        .collect()
}

/// One row of a probe-amplitude scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverRow<T: Real> {
    pub alpha: Complex<T>,
    pub g2_am: T,
    pub classical_bound: T,
    pub quantum_bound: T,
    /// `|g2_{a-} - sqrt(g2_a g2_-)|`.
    pub gap: T,
    pub classical_margin: Option<T>,
    pub quantum_margin: Option<T>,
}

/// Seeds the probe with a coherent amplitude (side modes in vacuum) and
/// reports `g2_{a-}` against both bounds at time `t`.
pub fn crossover_scan<T: Real>(
    p: &ThreeModeParams<T>,
    probe_amplitudes: &[Complex<T>],
    t: T,
) -> Result<Vec<CrossoverRow<T>>> {
    if probe_amplitudes
        .windows(2)
        .any(|w| modulus(w[1]) < modulus(w[0]))
    {
        return Err(invalid("probe_amplitudes", "must be sorted by modulus"));
    }
    let z = Complex::default();
    probe_amplitudes
        .iter()
        .map(|&alpha| {
            let s = propagate(&GaussianState::coherent([alpha, z, z]), p, t)?;
            let c = correlations(&s);
            let undefined =
                || Error::Unsupported("intensities below threshold in crossover scan".into());
            let g2_am = c.g2_pair(PROBE, MINUS).ok_or_else(undefined)?;
            let classical_bound = c
                .snapshot
                .classical_bound(PROBE, MINUS)
                .ok_or_else(undefined)?;
            let quantum_bound = c
                .snapshot
                .quantum_bound(PROBE, MINUS)
                .ok_or_else(undefined)?;
            Ok(CrossoverRow {
                alpha,
                g2_am,
                classical_bound,
                quantum_bound,
                gap: (g2_am - classical_bound).abs(),
                classical_margin: c.classical_margin(PROBE, MINUS),
                quantum_margin: c.quantum_margin(PROBE, MINUS),
            })
        })
        .collect()
}

/// Exact dynamics of Fock-state inputs on a truncated space (`n_i <= cutoff`)
/// in the conserved sector `n_a + n+ - n- = const`, as an independent check of
/// the Gaussian propagation.
pub struct FockOracle<T: Real> {
    params: ThreeModeParams<T>,
    cutoff: u32,
    spectrum: SpectralDecomposition<T>,
    psi0: StateVector<T>,
    observables: Vec<(ObservableKey, crate::fock::SparseMatrix<T>)>,
}

/// Moments evaluated by the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservableKey {
    Number(usize),
    Pair(usize, usize),
}

/// Intensities and normally ordered pair moments from the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleMoments<T: Real> {
    pub intensities: [T; 3],
    /// `<b_i^dagger b_j^dagger b_j b_i>` indexed `[i][j]`.
    pub pairs: [[T; 3]; 3],
}

impl<T: Real> OracleMoments<T> {
    pub fn correlations(&self) -> ThreeModeCorrelations<T> {
        ThreeModeCorrelations {
            snapshot: CorrelationSnapshot::from_moments(
                self.intensities.to_vec(),
                |i| self.pairs[i][i],
                |i, j| self.pairs[i][j],
                lit(INTENSITY_THRESHOLD),
            ),
        }
    }
}

impl<T: Real> FockOracle<T> {
    pub fn new(p: &ThreeModeParams<T>, initial: [u32; 3], cutoff: u32) -> Result<Self> {
        p.validate()?;
        if initial.iter().any(|&n| n > cutoff) {
            return Err(invalid("initial", "occupation exceeds cutoff"));
        }
        let charge = initial[PROBE] as i64 + initial[PLUS] as i64 - initial[MINUS] as i64;
        let sector = std::sync::Arc::new(FockSector::enumerate_truncated(
            mode_set(),
            vec![ChargeRule::new(vec![1, 1, -1], charge)],
            vec![cutoff; 3],
        )?);
        let h = build_matrix(&three_mode_hamiltonian(p).scale_real(p.omega_r), &sector)?;
        let spectrum = SpectralDecomposition::from_sparse(&h, &Tolerances::default())?;
        let psi0 = StateVector::basis(sector.clone(), &initial)?;
        type Op<T> = OperatorExpression<T>;
        let mut observables = Vec::new();
        for i in 0..3 {
            observables.push((
                ObservableKey::Number(i),
                compile_observable(&Op::<T>::number(i), &sector)?,
            ));
            for j in i..3 {
                let e = Op::create(i) * Op::create(j) * Op::annihilate(j) * Op::annihilate(i);
                observables.push((ObservableKey::Pair(i, j), compile_observable(&e, &sector)?));
            }
        }
        Ok(FockOracle {
            params: *p,
            cutoff,
            spectrum,
            psi0,
            observables,
        })
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    /// Moments at physical time `t`; refuses when any mean occupation exceeds
    /// `cutoff / 10`, where truncation would bias the result.
    pub fn moments(&self, t: T) -> Result<OracleMoments<T>> {
        let psi = self.spectrum.project(&self.psi0)?.at(t, T::one());
        let mut out = OracleMoments {
            intensities: [T::zero(); 3],
            pairs: [[T::zero(); 3]; 3],
        };
        for (key, op) in &self.observables {
            let v = op.quadratic_form(psi.amplitudes()).re;
            match *key {
                ObservableKey::Number(i) => out.intensities[i] = v,
                ObservableKey::Pair(i, j) => {
                    out.pairs[i][j] = v;
                    out.pairs[j][i] = v;
                }
            }
        }
        let limit = lit::<T>(self.cutoff as f64 / 10.0);
        if let Some(&n) = out.intensities.iter().find(|&&n| n > limit) {
            return Err(Error::CutoffExceeded {
                occupation: to_f64(n),
                limit: to_f64(limit),
            });
        }
        Ok(out)
    }

    pub fn params(&self) -> &ThreeModeParams<T> {
        &self.params
    }
}
