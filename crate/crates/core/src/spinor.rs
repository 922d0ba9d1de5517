//! Spin-1 condensate four-wave mixing.
//!
//! Four modes: the `m_F = +1` and `m_F = -1` side modes (`a1`, `am1`) and the
//! two counter-propagating `m_F = 0` modes (`a01`, `a02`). The spin-exchange
//! Hamiltonian conserves `N1 = n1 + n01`, `N2 = nm1 + n02` and `d = n1 - nm1`,
//! so each initial Fock product state evolves in a sector of dimension at most
//! `min(N1 - m, N2) + 1`, where it is tridiagonal.
//!
//! Times are expressed in the dimensionless variable `2 c2 t` (with `hbar = 1`).

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Complex;

use crate::correlation::CorrelationSnapshot;
use crate::error::{invalid, Error, Result};
use crate::fock::{
    compile_observable, ChargeRule, FockSector, Ladder, ModeSet, OperatorExpression, SparseMatrix,
    SpectralDecomposition, StateVector, Tolerances,
};
use crate::scalar::{count, lit, to_f64, Real};

/// Mode labels in occupation-tuple order `(n1, nm1, n01, n02)`.
pub const MODE_LABELS: [&str; 4] = ["a1", "am1", "a01", "a02"];
pub const A1: usize = 0;
pub const AM1: usize = 1;
pub const A01: usize = 2;
pub const A02: usize = 3;

/// Intensity threshold below which correlations are reported as undefined.
pub const INTENSITY_THRESHOLD: f64 = 1e-8;

/// s-wave scattering lengths of the total-spin 0 and 2 channels and the atomic mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringInput<T: Real> {
    pub a0: T,
    pub a2: T,
    pub mass: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorCouplings<T: Real> {
    pub g0: T,
    pub g2: T,
    pub c0: T,
    pub c2: T,
}

/// `g_f = 4 pi a_f / M` (hbar = 1), `c0 = (g0 + 2 g2)/3`, `c2 = (g2 - g0)/3`.
pub fn couplings_from_scattering<T: Real>(
    input: &ScatteringInput<T>,
) -> Result<SpinorCouplings<T>> {
    if !(input.mass > T::zero()) {
        return Err(invalid("mass", "must be positive"));
    }
    if !input.a0.is_finite() || !input.a2.is_finite() {
        return Err(invalid("scattering length", "must be finite"));
    }
    let four_pi = lit::<T>(4.0) * T::pi();
    let g0 = four_pi * input.a0 / input.mass;
    let g2 = four_pi * input.a2 / input.mass;
    let three = lit::<T>(3.0);
    Ok(SpinorCouplings {
        g0,
        g2,
        c0: (g0 + g2 + g2) / three,
        c2: (g2 - g0) / three,
    })
}

/// Treatment of the charge-functional terms `kinetic * N + (c0/2) N (N - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gauge {
    /// Keep the constant terms (global phase only).
    #[default]
    KeepConstants,
    /// Drop them.
    DropConstants,
}

/// A four-wave-mixing run: initial Fock product `(m, 0, N1 - m, N2)` evolved
/// over `time_grid` (in units of `2 c2 t`).
#[derive(Debug, Clone, PartialEq)]
pub struct FwmScenario<T: Real> {
    pub n1: u32,
    pub n2: u32,
    pub m: u32,
    pub c2: T,
    /// Kinetic energy per atom `hbar k0^2 / 2M` (angular frequency).
    pub kinetic: T,
    pub c0: T,
    pub gauge: Gauge,
    pub time_grid: Vec<T>,
}

impl<T: Real> FwmScenario<T> {
    /// Scenario with `c2 = 1`, no constant terms, and a uniform grid of
    /// `steps + 1` points on `[0, end]`.
    pub fn new(n1: u32, n2: u32, m: u32, end: T, steps: usize) -> Self {
        let time_grid = (0..=steps)
            .map(|k| end * count::<T>(k) / count::<T>(steps))
            .collect();
        FwmScenario {
            n1,
            n2,
            m,
            c2: T::one(),
            kinetic: T::zero(),
            c0: T::zero(),
            gauge: Gauge::default(),
            time_grid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m > self.n1 {
            return Err(invalid(
                "m",
                format!("m = {} exceeds N1 = {}", self.m, self.n1),
            ));
        }
        if !self.c2.is_finite() || !self.kinetic.is_finite() || !self.c0.is_finite() {
            return Err(invalid("c2", "couplings must be finite"));
        }
        if self.time_grid.is_empty() {
            return Err(invalid("time_grid", "must not be empty"));
        }
        if self.time_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("time_grid", "must be strictly increasing"));
        }
        Ok(())
    }

    pub fn total_atoms(&self) -> u32 {
        self.n1 + self.n2
    }

    pub fn initial_occupation(&self) -> [u32; 4] {
        [self.m, 0, self.n1 - self.m, self.n2]
    }

    /// Physical time for a grid value `2 c2 t`. With `c2 = 0` the grid is
    /// read directly as time; the Hamiltonian is then constant on the sector.
    pub fn physical_time(&self, two_c2_t: T) -> T {
        if self.c2 == T::zero() {
            two_c2_t
        } else {
            two_c2_t / (lit::<T>(2.0) * self.c2)
        }
    }
}

pub fn mode_set() -> ModeSet {
    ModeSet::new(MODE_LABELS).expect("static labels are valid")
}

/// The conserved sector `{N1, N2, d = m}` of a scenario.
pub fn fwm_sector<T: Real>(scn: &FwmScenario<T>) -> Result<FockSector> {
    scn.validate()?;
    FockSector::enumerate(
        mode_set(),
        vec![
            ChargeRule::new(vec![1, 0, 1, 0], scn.n1 as i64),
            ChargeRule::new(vec![0, 1, 0, 1], scn.n2 as i64),
            ChargeRule::new(vec![1, -1, 0, 0], scn.m as i64),
        ],
    )
}

/// The four-wave-mixing Hamiltonian as a ladder-operator expression (the
/// generic route, used to cross-check [`build_fwm_hamiltonian`]).
pub fn fwm_hamiltonian_expr<T: Real>(scn: &FwmScenario<T>) -> OperatorExpression<T> {
    type Op<T> = OperatorExpression<T>;
    let mono = |c: T, f: Vec<Ladder>| Op::monomial(Complex::new(c, T::zero()), f);
    let (r, l) = (Ladder::raise, Ladder::lower);
    let half_c2 = scn.c2 / lit::<T>(2.0);
    let two = lit::<T>(2.0);

    let side = Op::number(A1) + Op::number(AM1);
    let central = Op::number(A01) + Op::number(A02);

    let mut h = mono(half_c2, vec![r(A1), r(A1), l(A1), l(A1)])
        + mono(half_c2, vec![r(AM1), r(AM1), l(AM1), l(AM1)])
        + (Op::number(A1) * Op::number(AM1)).scale_real(-two * half_c2)
        + (side * central).scale_real(two * half_c2)
        + mono(lit::<T>(4.0) * half_c2, vec![r(A1), r(AM1), l(A01), l(A02)])
        + mono(lit::<T>(4.0) * half_c2, vec![r(A01), r(A02), l(A1), l(AM1)]);

    if scn.gauge == Gauge::KeepConstants {
        let total = (0..4).fold(Op::zero(), |acc, i| acc + Op::number(i));
        let pairs = total.clone() * total.clone() - total.clone();
        h = h + total.scale_real(scn.kinetic) + pairs.scale_real(scn.c0 / two);
    }
    h.canonicalize()
}

/// Tridiagonal sector Hamiltonian built directly from the closed-form matrix
/// elements, indexed by `k = nm1`.
pub fn build_fwm_hamiltonian<T: Real>(
    scn: &FwmScenario<T>,
) -> Result<(Arc<FockSector>, SparseMatrix<T>)> {
    let sector = Arc::new(fwm_sector(scn)?);
    let half_c2 = scn.c2 / lit::<T>(2.0);
    let total = count::<T>(scn.total_atoms() as usize);
    let constant = match scn.gauge {
        Gauge::KeepConstants => {
            scn.kinetic * total + scn.c0 / lit::<T>(2.0) * total * (total - T::one())
        }
        Gauge::DropConstants => T::zero(),
    };
    let f = |n: u32| count::<T>(n as usize);
    let mut triplets = Vec::with_capacity(3 * sector.dim());
    for (k, occ) in sector.states().iter().enumerate() {
        let (n1, nm1, n01, n02) = (f(occ[0]), f(occ[1]), f(occ[2]), f(occ[3]));
        let two = lit::<T>(2.0);
        let diag = half_c2
            * (n1 * (n1 - T::one()) + nm1 * (nm1 - T::one()) - two * n1 * nm1
                + two * (n1 + nm1) * (n01 + n02))
            + constant;
        triplets.push((k, k, Complex::new(diag, T::zero())));
        if k + 1 < sector.dim() {
            let off = two * scn.c2 * ((n1 + T::one()) * (nm1 + T::one()) * n01 * n02).sqrt();
            triplets.push((k + 1, k, Complex::new(off, T::zero())));
            triplets.push((k, k + 1, Complex::new(off, T::zero())));
        }
    }
    Ok((
        sector.clone(),
        SparseMatrix::from_triplets(sector.dim(), triplets),
    ))
}

/// Mean populations and survival probability over the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSeries<T: Real> {
    pub two_c2_t: Vec<T>,
    pub n1: Vec<T>,
    pub nm1: Vec<T>,
    pub n01: Vec<T>,
    pub n02: Vec<T>,
    /// `|<psi0|psi(t)>|^2`.
    pub return_probability: Vec<T>,
}

impl<T: Real> PopulationSeries<T> {
    pub fn len(&self) -> usize {
        self.two_c2_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.two_c2_t.is_empty()
    }
}

struct Evolution<T: Real> {
    sector: Arc<FockSector>,
    spectrum: SpectralDecomposition<T>,
    psi0: StateVector<T>,
}

fn prepare<T: Real>(scn: &FwmScenario<T>) -> Result<Evolution<T>> {
    let (sector, h) = build_fwm_hamiltonian(scn)?;
    let spectrum = SpectralDecomposition::from_sparse(&h, &Tolerances::default())?;
    let psi0 = StateVector::basis(sector.clone(), &scn.initial_occupation())?;
    Ok(Evolution {
        sector,
        spectrum,
        psi0,
    })
}

fn number_observables<T: Real>(sector: &FockSector) -> Result<Vec<SparseMatrix<T>>> {
    (0..4)
        .map(|i| compile_observable(&OperatorExpression::<T>::number(i), sector))
        .collect()
}

/// Populations `<n_i>(2 c2 t)` for all four modes.
pub fn run_population_series<T: Real>(scn: &FwmScenario<T>) -> Result<PopulationSeries<T>> {
    let ev = prepare(scn)?;
    let numbers = number_observables::<T>(&ev.sector)?;
    let prop = ev.spectrum.project(&ev.psi0)?;
    let mut out = PopulationSeries {
        two_c2_t: scn.time_grid.clone(),
        n1: Vec::with_capacity(scn.time_grid.len()),
        nm1: Vec::with_capacity(scn.time_grid.len()),
        n01: Vec::with_capacity(scn.time_grid.len()),
        n02: Vec::with_capacity(scn.time_grid.len()),
        return_probability: Vec::with_capacity(scn.time_grid.len()),
    };
    for &tau in &scn.time_grid {
        let t = scn.physical_time(tau);
        let psi = prop.at(t, T::one());
        let pops: Vec<T> = numbers
            .iter()
            .map(|n| n.quadratic_form(psi.amplitudes()).re)
            .collect();
        out.n1.push(pops[A1]);
        out.nm1.push(pops[AM1]);
        out.n01.push(pops[A01]);
        out.n02.push(pops[A02]);
        out.return_probability
            .push(prop.return_amplitude(t, T::one()).norm_sqr());
    }
    Ok(out)
}

/// A local maximum located by a parabola through three grid points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<T: Real> {
    pub time: T,
    pub value: T,
}

fn interpolate_peak<T: Real>(x: &[T], y: &[T], i: usize) -> Peak<T> {
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    // Lagrange parabola through the three points
    let d01 = x0 - x1;
    let d02 = x0 - x2;
    let d12 = x1 - x2;
    let a = y0 / (d01 * d02) - y1 / (d01 * d12) + y2 / (d02 * d12);
    let b =
        -y0 * (x1 + x2) / (d01 * d02) + y1 * (x0 + x2) / (d01 * d12) - y2 * (x0 + x1) / (d02 * d12);
    if a >= T::zero() {
        return Peak {
            time: x1,
            value: y1,
        };
    }
    let xv = -b / (lit::<T>(2.0) * a);
    let xv = xv.max(x0).min(x2);
    let c = y1 - a * x1 * x1 - b * x1;
    Peak {
        time: xv,
        value: a * xv * xv + b * xv + c,
    }
}

/// Interior local maxima of `y(x)`, refined by quadratic interpolation.
pub fn local_maxima<T: Real>(x: &[T], y: &[T]) -> Vec<Peak<T>> {
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] >= y[i - 1] && y[i] > y[i + 1])
        .map(|i| interpolate_peak(x, y, i))
        .collect()
}

/// First local maximum of the `m_F = +1` population.
pub fn first_population_maximum<T: Real>(series: &PopulationSeries<T>) -> Option<Peak<T>> {
    local_maxima(&series.two_c2_t, &series.n1)
        .into_iter()
        .next()
}

/// Window of the collapse plateau, in units of `2 c2 t`.
pub const PLATEAU_WINDOW: (f64, f64) = (0.4 * PI, 0.8 * PI);
/// Coarsest accepted grid spacing for revival detection.
pub const MAX_REVIVAL_SPACING: f64 = PI / 100.0;

fn plateau_stats<T: Real>(x: &[T], y: &[T]) -> Result<(T, T)> {
    let (lo, hi) = (lit::<T>(PLATEAU_WINDOW.0), lit::<T>(PLATEAU_WINDOW.1));
    let window: Vec<T> = x
        .iter()
        .zip(y)
        .filter(|(&t, _)| t >= lo && t <= hi)
        .map(|(_, &v)| v)
        .collect();
    if window.len() < 2 {
        return Err(Error::SeriesTooShort(
            "plateau window has fewer than two samples".into(),
        ));
    }
    let n = count::<T>(window.len());
    let mean = window.iter().fold(T::zero(), |a, &v| a + v) / n;
    let var = window
        .iter()
        .fold(T::zero(), |a, &v| a + (v - mean) * (v - mean))
        / n;
    Ok((mean, var.sqrt()))
}

fn check_revival_grid<T: Real>(x: &[T]) -> Result<()> {
    if x.len() < 3 || x[0] > T::zero() || x[x.len() - 1] < lit::<T>(2.0 * PI) {
        return Err(Error::SeriesTooShort(
            "series must cover 2 c2 t in [0, 2 pi]".into(),
        ));
    }
    let spacing = x.windows(2).fold(T::zero(), |m, w| m.max(w[1] - w[0]));
    if spacing > lit::<T>(MAX_REVIVAL_SPACING) {
        return Err(Error::GridTooCoarse {
            spacing: to_f64(spacing),
            limit: MAX_REVIVAL_SPACING,
        });
    }
    Ok(())
}

/// Peaks of `y` after the plateau that exceed its mean by three standard
/// deviations; peaks closer than `pi/2` are merged, keeping the tallest.
fn qualifying_peaks<T: Real>(x: &[T], y: &[T]) -> Result<Vec<Peak<T>>> {
    check_revival_grid(x)?;
    let (mean, sd) = plateau_stats(x, y)?;
    let threshold = mean + lit::<T>(3.0) * sd;
    let after = lit::<T>(PLATEAU_WINDOW.1);
    let mut events: Vec<Peak<T>> = Vec::new();
    for p in local_maxima(x, y) {
        if p.time <= after || p.value <= threshold {
            continue;
        }
        match events.last_mut() {
            Some(last) if p.time - last.time < lit::<T>(PI / 2.0) => {
                if p.value > last.value {
                    *last = p;
                }
            }
            _ => events.push(p),
        }
    }
    Ok(events)
}

/// Revival times in units of `2 c2 t`.
///
/// A revival is a rephasing of the sector dynamics, detected on the survival
/// probability `|<psi0|psi(t)>|^2`: local maxima after the collapse plateau
/// (`2 c2 t` in `[0.4 pi, 0.8 pi]`) that exceed the plateau mean by three
/// plateau standard deviations, located by quadratic interpolation. Grids
/// coarser than `pi/100` are refused; a constant series has no revivals.
pub fn detect_revivals<T: Real>(series: &PopulationSeries<T>) -> Result<Vec<T>> {
    Ok(
        qualifying_peaks(&series.two_c2_t, &series.return_probability)?
            .into_iter()
            .map(|p| p.time)
            .collect(),
    )
}

/// Maxima of the `m_F = +1` population after the collapse plateau, under the
/// same qualification rule as [`detect_revivals`]. In the build-up-from-noise
/// case these flank the rephasing instant rather than coincide with it.
pub fn population_revival_peaks<T: Real>(series: &PopulationSeries<T>) -> Result<Vec<Peak<T>>> {
    qualifying_peaks(&series.two_c2_t, &series.n1)
}

/// Correlations of the four modes over the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport<T: Real> {
    pub two_c2_t: Vec<T>,
    pub snapshots: Vec<CorrelationSnapshot<T>>,
}

/// Intensities, single-mode and pairwise `g2`, and both Cauchy-Schwartz
/// margins for every mode pair, evaluated on the exact state.
pub fn correlation_report<T: Real>(scn: &FwmScenario<T>) -> Result<CorrelationReport<T>> {
    type Op<T> = OperatorExpression<T>;
    let ev = prepare(scn)?;
    let sector = &ev.sector;
    let numbers = number_observables::<T>(sector)?;
    let pair_self: Vec<SparseMatrix<T>> = (0..4)
        .map(|i| {
            compile_observable(
                &(Op::create(i) * Op::create(i) * Op::annihilate(i) * Op::annihilate(i)),
                sector,
            )
        })
        .collect::<Result<_>>()?;
    let mut cross = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let e = Op::create(i) * Op::create(j) * Op::annihilate(j) * Op::annihilate(i);
            cross.push(((i, j), compile_observable(&e, sector)?));
        }
    }
    let threshold = lit::<T>(INTENSITY_THRESHOLD);
    let prop = ev.spectrum.project(&ev.psi0)?;
    let mut snapshots = Vec::with_capacity(scn.time_grid.len());
    for &tau in &scn.time_grid {
        let psi = prop.at(scn.physical_time(tau), T::one());
        let amps = psi.amplitudes();
        let intensities: Vec<T> = numbers.iter().map(|n| n.quadratic_form(amps).re).collect();
        let selfs: Vec<T> = pair_self
            .iter()
            .map(|o| o.quadratic_form(amps).re)
            .collect();
        let crosses: Vec<((usize, usize), T)> = cross
            .iter()
            .map(|(k, o)| (*k, o.quadratic_form(amps).re))
            .collect();
        snapshots.push(CorrelationSnapshot::from_moments(
            intensities,
            |i| selfs[i],
            |i, j| {
                crosses
                    .iter()
                    .find(|(k, _)| *k == (i, j))
                    .map(|(_, v)| *v)
                    .unwrap_or_default()
            },
            threshold,
        ));
    }
    Ok(CorrelationReport {
        two_c2_t: scn.time_grid.clone(),
        snapshots,
    })
}
