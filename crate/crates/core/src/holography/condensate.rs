use nalgebra::Complex;

use super::grid::{Grid, Spectral};
use crate::error::{invalid, Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// External potential sampled on a grid, as an angular frequency (`hbar = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialMap<T: Real> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> PotentialMap<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("potential", "must be finite everywhere"));
        }
        Ok(PotentialMap { grid, values })
    }

    pub fn constant(grid: Grid<T>, value: T) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    /// `V = (omega_x^2 x^2 + omega_y^2 y^2) / (2 hbar/M)`.
    pub fn harmonic(grid: Grid<T>, omega: [T; 2], hbar_over_mass: T) -> Result<Self> {
        if !(hbar_over_mass > T::zero()) {
            return Err(invalid("hbar_over_mass", "must be positive"));
        }
        let two = lit::<T>(2.0);
        let values = grid
            .points()
            .into_iter()
            .map(|(x, y)| {
                (omega[0] * omega[0] * x * x + omega[1] * omega[1] * y * y) / (two * hbar_over_mass)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn min(&self) -> T {
        self.values
            .iter()
            .copied()
            .fold(T::max_value().unwrap(), |a, b| a.min(b))
    }

    /// Pointwise sum with another potential on the same grid.
    pub fn add(&self, other: &PotentialMap<T>) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a + b)
            .collect();
        Self::new(self.grid, values)
    }
}

fn tf_atoms<T: Real>(v: &PotentialMap<T>, g: T, mu: T) -> T {
    v.grid
        .integrate(v.values.iter().map(|&x| (mu - x).max(T::zero()) / g))
}

fn check_tf_inputs<T: Real>(g: T, n: T) -> Result<()> {
    if !(g > T::zero()) || !g.is_finite() {
        return Err(invalid("g", "must be finite and positive"));
    }
    if !(n > T::zero()) || !n.is_finite() {
        return Err(invalid("atom_number", "must be finite and positive"));
    }
    Ok(())
}

/// Relative accuracy of the normalization in the chemical-potential solve.
pub const MU_TOLERANCE: f64 = 1e-8;

/// Chemical potential fixing `sum max(mu - V, 0)/g dV = N`, by bisection on
/// `[min V, min V + g N / cell volume]`.
pub fn solve_chemical_potential<T: Real>(v: &PotentialMap<T>, g: T, n: T) -> Result<T> {
    check_tf_inputs(g, n)?;
    let lo0 = v.min();
    let mut lo = lo0;
    let mut hi = lo0 + g * n / v.grid.cell_volume();
    let mut expansions = 0;
    while tf_atoms(v, g, hi) < n {
        expansions += 1;
        if expansions > 64 || !hi.is_finite() {
            return Err(Error::NoBracket(format!(
                "normalization not reached for mu up to {:e}",
                to_f64(hi)
            )));
        }
        hi = lo0 + (hi - lo0) * lit::<T>(2.0);
    }
    let tol = lit::<T>(MU_TOLERANCE) * n;
    for _ in 0..400 {
        let mid = (lo + hi) / lit::<T>(2.0);
        let atoms = tf_atoms(v, g, mid);
        if (atoms - n).abs() <= tol {
            return Ok(mid);
        }
        if atoms < n {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::default_epsilon() * hi.abs().max(T::one()) {
            break;
        }
    }
    let mid = (lo + hi) / lit::<T>(2.0);
    if (tf_atoms(v, g, mid) - n).abs() <= tol {
        Ok(mid)
    } else {
        Err(Error::NoBracket(
            "bisection stalled before reaching the normalization tolerance".into(),
        ))
    }
}

/// Thomas-Fermi density `rho = max(mu - V, 0)/g`.
#[derive(Debug, Clone, PartialEq)]
pub struct TFProfile<T: Real> {
    pub grid: Grid<T>,
    pub density: Vec<T>,
    pub mu: T,
    pub g: T,
    pub atom_number: T,
}

impl<T: Real> TFProfile<T> {
    pub fn total(&self) -> T {
        self.grid.integrate(self.density.iter().copied())
    }

    pub fn max_density(&self) -> T {
        self.density
            .iter()
            .copied()
            .fold(T::zero(), |a, b| a.max(b))
    }
}

pub fn thomas_fermi_density<T: Real>(v: &PotentialMap<T>, g: T, n: T) -> Result<TFProfile<T>> {
    let mu = solve_chemical_potential(v, g, n)?;
    let density = v
        .values
        .iter()
        .map(|&x| (mu - x).max(T::zero()) / g)
        .collect();
    Ok(TFProfile {
        grid: v.grid,
        density,
        mu,
        g,
        atom_number: n,
    })
}

/// Closed-form 1D harmonic Thomas-Fermi chemical potential:
/// `mu = omega^2 R^2 / (2 hbar/M)` with `R = (3 (hbar/M) g N / (2 omega^2))^(1/3)`.
pub fn harmonic_tf_mu_1d<T: Real>(omega: T, hbar_over_mass: T, g: T, n: T) -> T {
    let r = (lit::<T>(3.0) * hbar_over_mass * g * n / (lit::<T>(2.0) * omega * omega)).cbrt();
    omega * omega * r * r / (lit::<T>(2.0) * hbar_over_mass)
}

/// Settings of the imaginary-time ground-state search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpSettings<T: Real> {
    /// Imaginary time step; `None` picks `0.01 / (mu_TF - min V)`. Larger steps
    /// bias the fixed point of the splitting and break energy monotonicity.
    pub time_step: Option<T>,
    pub max_steps: usize,
    /// Converged when the relative energy change per step falls below this.
    pub tolerance: T,
}

impl<T: Real> Default for GpSettings<T> {
    fn default() -> Self {
        GpSettings {
            time_step: None,
            max_steps: 400_000,
            tolerance: lit(1e-10),
        }
    }
}

/// Real, non-negative ground-state wave function with `sum |phi|^2 dV = N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundState<T: Real> {
    pub grid: Grid<T>,
    pub phi: Vec<T>,
    /// Energy functional (angular-frequency units, total over all atoms).
    pub energy: T,
    pub steps: usize,
    /// Energy after each step.
    pub energy_history: Vec<T>,
}

impl<T: Real> GroundState<T> {
    pub fn density(&self) -> Vec<T> {
        self.phi.iter().map(|&p| p * p).collect()
    }
}

/// `E[phi] = sum [ (hbar/2M) |grad phi|^2 + V |phi|^2 + (g/2) |phi|^4 ] dV`,
/// with the gradient taken spectrally.
pub fn gp_energy<T: Real>(
    spectral: &Spectral<T>,
    v: &PotentialMap<T>,
    g: T,
    hbar_over_mass: T,
    phi: &[Complex<T>],
) -> T {
    let grid = spectral.grid();
    let four_pi2 = lit::<T>(4.0) * T::pi() * T::pi();
    let mut spec = phi.to_vec();
    spectral.forward(&mut spec);
    // Parseval: sum |grad phi|^2 = (1/n) sum k^2 |phi_k|^2
    let kinetic_sum = spec
        .iter()
        .zip(grid.frequency_squared())
        .fold(T::zero(), |a, (c, f2)| a + c.norm_sqr() * four_pi2 * f2)
        / lit::<T>(grid.len() as f64);
    let half = lit::<T>(0.5);
    let local = phi.iter().zip(v.values()).fold(T::zero(), |a, (p, &pot)| {
        let n = p.norm_sqr();
        a + pot * n + half * g * n * n
    });
    (half * hbar_over_mass * kinetic_sum + local) * grid.cell_volume()
}

/// Ground state of `i dPhi/dt = -(hbar/2M) lap Phi + V Phi + g |Phi|^2 Phi` by
/// imaginary-time Strang splitting, renormalized to `N` after every step and
/// started from the Thomas-Fermi profile.
pub fn gp_ground_state<T: Real>(
    v: &PotentialMap<T>,
    g: T,
    n: T,
    hbar_over_mass: T,
    settings: &GpSettings<T>,
) -> Result<GroundState<T>> {
    if !(g >= T::zero()) || !g.is_finite() {
        return Err(invalid("g", "must be finite and non-negative"));
    }
    if !(n > T::zero()) {
        return Err(invalid("atom_number", "must be positive"));
    }
    if !(hbar_over_mass > T::zero()) {
        return Err(invalid("hbar_over_mass", "must be positive"));
    }
    let grid = *v.grid();
    let spectral = Spectral::new(&grid);
    let half = lit::<T>(0.5);

    // start from Thomas-Fermi (or a broad Gaussian when g = 0)
    let mut phi: Vec<Complex<T>> = if g > T::zero() {
        let tf = thomas_fermi_density(v, g, n)?;
        let floor = tf.max_density() * lit::<T>(1e-6);
        tf.density
            .iter()
            .map(|&r| Complex::new((r + floor).sqrt(), T::zero()))
            .collect()
    } else {
        let w = grid.extent(0) / lit::<T>(8.0);
        grid.points()
            .into_iter()
            .map(|(x, y)| {
                Complex::new(
                    (-(x * x + y * y) / (lit::<T>(2.0) * w * w)).exp(),
                    T::zero(),
                )
            })
            .collect()
    };
    renormalize(&grid, &mut phi, n);

    let scale_rate = if g > T::zero() {
        solve_chemical_potential(v, g, n)? - v.min()
    } else {
        let fmax = grid
            .frequency_squared()
            .into_iter()
            .fold(T::zero(), |a, b| a.max(b));
        (half * hbar_over_mass * lit::<T>(4.0) * T::pi() * T::pi() * fmax).sqrt()
    };
    let dt = settings
        .time_step
        .unwrap_or_else(|| lit::<T>(0.01) / scale_rate.max(T::default_epsilon()));
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(invalid("time_step", "must be finite and positive"));
    }

    let kinetic: Vec<T> = grid
        .frequency_squared()
        .into_iter()
        .map(|f2| (-half * hbar_over_mass * lit::<T>(4.0) * T::pi() * T::pi() * f2 * dt).exp())
        .collect();

    let mut energy = gp_energy(&spectral, v, g, hbar_over_mass, &phi);
    let mut history = Vec::new();
    let mut residual = T::max_value().unwrap();
    for step in 1..=settings.max_steps {
        half_potential_step(&mut phi, v.values(), g, dt * half);
        spectral.forward(&mut phi);
        for (p, &k) in phi.iter_mut().zip(&kinetic) {
            *p *= k;
        }
        spectral.inverse(&mut phi);
        half_potential_step(&mut phi, v.values(), g, dt * half);
        renormalize(&grid, &mut phi, n);

        let e = gp_energy(&spectral, v, g, hbar_over_mass, &phi);
        history.push(e);
        residual = ((e - energy) / e.abs().max(T::default_epsilon())).abs();
        energy = e;
        if residual < settings.tolerance {
            return Ok(GroundState {
                grid,
                phi: phi.iter().map(|c| c.re.abs()).collect(),
                energy,
                steps: step,
                energy_history: history,
            });
        }
    }
    Err(Error::NotConverged {
        steps: settings.max_steps,
        residual: to_f64(residual),
    })
}

fn half_potential_step<T: Real>(phi: &mut [Complex<T>], v: &[T], g: T, tau: T) {
    for (p, &pot) in phi.iter_mut().zip(v) {
        let e = pot + g * p.norm_sqr();
        *p *= (-e * tau).exp();
    }
}

fn renormalize<T: Real>(grid: &Grid<T>, phi: &mut [Complex<T>], n: T) {
    let total = grid.integrate(phi.iter().map(|p| p.norm_sqr()));
    let s = (n / total).sqrt();
    for p in phi.iter_mut() {
        *p *= s;
    }
}

/// The GP energy of a Thomas-Fermi profile (`phi = sqrt(rho)`).
pub fn tf_energy<T: Real>(profile: &TFProfile<T>, v: &PotentialMap<T>, hbar_over_mass: T) -> T {
    let spectral = Spectral::new(&profile.grid);
    let phi: Vec<Complex<T>> = profile
        .density
        .iter()
        .map(|&r| Complex::new(r.sqrt(), T::zero()))
        .collect();
    gp_energy(&spectral, v, profile.g, hbar_over_mass, &phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_box() {
        let grid = Grid::<f64>::new_1d(128, 0.5).unwrap();
        let v = PotentialMap::constant(grid, 0.0).unwrap();
        let (g, n) = (2.0, 300.0);
        let mu = solve_chemical_potential(&v, g, n).unwrap();
        assert!((mu - g * n / grid.extent(0)).abs() < 1e-7 * mu);
        let tf = thomas_fermi_density(&v, g, n).unwrap();
        assert!(tf.density.iter().all(|&r| (r - n / 64.0).abs() < 1e-6 * r));
    }

    #[test]
    fn harmonic_mu_matches_closed_form() {
        let grid = Grid::<f64>::new_1d(4096, 0.01).unwrap();
        let v = PotentialMap::harmonic(grid, [1.0, 0.0], 1.0).unwrap();
        let mu = solve_chemical_potential(&v, 1.0, 1000.0).unwrap();
        let exact = harmonic_tf_mu_1d(1.0, 1.0, 1.0, 1000.0);
        assert!((mu - exact).abs() < 1e-4 * exact, "{mu} {exact}");
    }

    #[test]
    fn few_atoms_sit_at_the_minimum() {
        let grid = Grid::<f64>::new_1d(256, 0.1).unwrap();
        let v = PotentialMap::harmonic(grid, [1.0, 0.0], 1.0).unwrap();
        let mu = solve_chemical_potential(&v, 1.0, 1e-9).unwrap();
        assert!(mu - v.min() < 1e-6);
    }

    #[test]
    fn rectangular_well_steps_density() {
        let grid = Grid::<f64>::new_1d(256, 0.1).unwrap();
        let (g, u) = (0.5, 0.3);
        let values = grid
            .coordinates(0)
            .iter()
            .map(|&x| if x.abs() < 2.0 { -u } else { 0.0 })
            .collect();
        let v = PotentialMap::new(grid, values).unwrap();
        let tf = thomas_fermi_density(&v, g, 500.0).unwrap();
        assert!((tf.density[128] - tf.density[0] - u / g).abs() < 1e-9);
        for (r, &pot) in tf.density.iter().zip(v.values()) {
            assert!((g * r + pot - tf.mu).abs() < 1e-9 || *r == 0.0);
        }
        assert!((tf.total() - 500.0).abs() < 1e-6 * 500.0);
    }

    #[test]
    fn free_oscillator_ground_state() {
        let grid = Grid::<f64>::new_1d(256, 0.1).unwrap();
        let v = PotentialMap::harmonic(grid, [1.0, 0.0], 1.0).unwrap();
        let gs = gp_ground_state(
            &v,
            0.0,
            1.0,
            1.0,
            &GpSettings {
                time_step: Some(0.01),
                ..Default::default()
            },
        )
        .unwrap();
        // sqrt(hbar/(M omega)) = 1 width, energy omega/2
        for (&x, &p) in grid.coordinates(0).iter().zip(&gs.phi) {
            let exact = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
            assert!((p - exact).abs() < 1e-3, "{x} {p} {exact}");
        }
        assert!((gs.energy - 0.5).abs() < 1e-4);
        assert!(gs.energy_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn no_bracket_for_nonpositive_inputs() {
        let grid = Grid::<f64>::new_1d(64, 1.0).unwrap();
        let v = PotentialMap::constant(grid, 0.0).unwrap();
        assert!(solve_chemical_potential(&v, 0.0, 1.0).is_err());
        assert!(solve_chemical_potential(&v, 1.0, -1.0).is_err());
    }
}
