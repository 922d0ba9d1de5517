use nalgebra::Complex;

use super::condensate::TFProfile;
use super::grid::{Grid, Spectral};
use crate::error::{invalid, Error, Result};
use crate::scalar::{count, lit, to_f64, Real};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const SODIUM_MASS_U: f64 = 22.989_769_28;

pub fn sodium_mass<T: Real>() -> T {
    lit(SODIUM_MASS_U * ATOMIC_MASS_UNIT)
}

/// `lambda = 2 pi hbar / (M v)`.
pub fn de_broglie_wavelength<T: Real>(mass: T, velocity: T, hbar: T) -> Result<T> {
    if !(mass > T::zero()) || !(velocity.abs() > T::zero()) {
        return Err(invalid("velocity", "mass and speed must be positive"));
    }
    Ok(T::two_pi() * hbar / (mass * velocity.abs()))
}

/// Complex amplitude on a grid together with its wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T: Real> {
    pub grid: Grid<T>,
    pub amplitudes: Vec<Complex<T>>,
    pub wavelength: T,
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: Grid<T>, amplitudes: Vec<Complex<T>>, wavelength: T) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: amplitudes.len(),
            });
        }
        if !(wavelength > T::zero()) || !wavelength.is_finite() {
            return Err(invalid("wavelength", "must be finite and positive"));
        }
        Ok(ScalarField {
            grid,
            amplitudes,
            wavelength,
        })
    }

    /// Field defined by a function of `(x, y)`.
    pub fn from_fn(grid: Grid<T>, wavelength: T, f: impl Fn(T, T) -> Complex<T>) -> Result<Self> {
        let amplitudes = grid.points().into_iter().map(|(x, y)| f(x, y)).collect();
        Self::new(grid, amplitudes, wavelength)
    }

    /// Unit plane wave tilted by `angle` from the propagation axis in the `x-z` plane.
    pub fn tilted_plane_wave(grid: Grid<T>, wavelength: T, angle: T) -> Result<Self> {
        let kx = T::two_pi() * angle.sin() / wavelength;
        Self::from_fn(grid, wavelength, |x, _| {
            Complex::new((kx * x).cos(), (kx * x).sin())
        })
    }

    pub fn intensity(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `sum |psi|^2 dV`.
    pub fn total_intensity(&self) -> T {
        self.grid
            .integrate(self.amplitudes.iter().map(|a| a.norm_sqr()))
    }
}

/// Phase imprinted by the condensate column density on a crossing beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprintModel<T: Real> {
    /// Phase per unit column density.
    pub eta: T,
    /// Angle `beta_A` of the reading beam from the slab normal.
    pub incidence_angle: T,
    /// Thickness of the condensate slab along the beam.
    pub thickness: T,
}

/// Raman-Nath parameter above which the thin-hologram approximation is flagged.
pub const RAMAN_NATH_LIMIT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprintReport<T: Real> {
    /// `|eta| max(column density)`.
    pub max_phase: T,
    /// `2 pi lambda T / Lambda^2`, `Lambda` the finest significant modulation period.
    pub raman_nath_parameter: T,
    pub raman_nath_valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImprintOutput<T: Real> {
    pub field: ScalarField<T>,
    pub report: ImprintReport<T>,
    pub warnings: Vec<String>,
}

/// Frequency below which 99% of the power of the mean-free signal lies.
fn modulation_bandwidth<T: Real>(grid: &Grid<T>, values: &[T]) -> T {
    let mean = values.iter().fold(T::zero(), |a, &b| a + b) / count::<T>(values.len());
    let mut spec: Vec<Complex<T>> = values
        .iter()
        .map(|&v| Complex::new(v - mean, T::zero()))
        .collect();
    Spectral::new(grid).forward(&mut spec);
    let f2 = grid.frequency_squared();
    let mut bins: Vec<(T, T)> = spec
        .iter()
        .zip(f2)
        .map(|(c, f2)| (f2.sqrt(), c.norm_sqr()))
        .collect();
    let total = bins.iter().fold(T::zero(), |a, b| a + b.1);
    if total == T::zero() {
        return T::zero();
    }
    bins.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let target = lit::<T>(0.99) * total;
    let mut acc = T::zero();
    for (f, p) in bins {
        acc += p;
        if acc >= target {
            return f;
        }
    }
    T::zero()
}

/// Multiplies the field by `exp(i eta rho / cos(beta_A))`.
pub fn phase_imprint<T: Real>(
    field_in: &ScalarField<T>,
    profile: &TFProfile<T>,
    model: &ImprintModel<T>,
) -> Result<ImprintOutput<T>> {
    field_in.grid.ensure_same(&profile.grid)?;
    let cos = model.incidence_angle.cos();
    if !(cos > T::zero()) {
        return Err(invalid("incidence_angle", "must be below pi/2"));
    }
    if !(model.thickness >= T::zero()) || !model.eta.is_finite() {
        return Err(invalid(
            "thickness",
            "imprint parameters must be finite and non-negative",
        ));
    }
    let column: Vec<T> = profile.density.iter().map(|&r| r / cos).collect();
    let amplitudes = field_in
        .amplitudes
        .iter()
        .zip(&column)
        .map(|(a, &c)| {
            let phase = model.eta * c;
            *a * Complex::new(phase.cos(), phase.sin())
        })
        .collect();

    let max_col = column.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let band = modulation_bandwidth(&profile.grid, &column);
    let q = if band > T::zero() && model.eta != T::zero() {
        T::two_pi() * field_in.wavelength * model.thickness * band * band
    } else {
        T::zero()
    };
    let valid = q < lit::<T>(RAMAN_NATH_LIMIT);
    let mut warnings = Vec::new();
    if !valid {
        warnings.push(format!(
            "thin-hologram approximation questionable: Raman-Nath parameter {:.3}",
            to_f64(q)
        ));
    }
    Ok(ImprintOutput {
        field: ScalarField {
            grid: field_in.grid,
            amplitudes,
            wavelength: field_in.wavelength,
        },
        report: ImprintReport {
            max_phase: model.eta.abs() * max_col,
            raman_nath_parameter: q,
            raman_nath_valid: valid,
        },
        warnings,
    })
}

/// Largest tolerated fraction of the propagating power beyond the
/// angular-spectrum band limit.
pub const ALIASING_TOLERANCE: f64 = 1e-8;

/// Band limit `1 / (lambda sqrt((2 d / L)^2 + 1))` of the sampled transfer function.
pub fn band_limit<T: Real>(wavelength: T, distance: T, extent: T) -> T {
    let r = lit::<T>(2.0) * distance / extent;
    T::one() / (wavelength * (r * r + T::one()).sqrt())
}

/// Angular-spectrum propagation over `distance` (either sign) with the exact
/// kernel `exp(i d sqrt(k^2 - k_perp^2))`; evanescent components decay as
/// `exp(-|d| sqrt(k_perp^2 - k^2))`. The field is treated as periodic on the grid.
pub fn propagate<T: Real>(field: &ScalarField<T>, distance: T) -> Result<ScalarField<T>> {
    let spectral = Spectral::new(&field.grid);
    propagate_with(&spectral, field, distance)
}

/// As [`propagate`], reusing FFT plans.
pub fn propagate_with<T: Real>(
    spectral: &Spectral<T>,
    field: &ScalarField<T>,
    distance: T,
) -> Result<ScalarField<T>> {
    field.grid.ensure_same(spectral.grid())?;
    if !distance.is_finite() {
        return Err(invalid("distance", "must be finite"));
    }
    let grid = field.grid;
    let mut spec = field.amplitudes.clone();
    spectral.forward(&mut spec);
    if distance == T::zero() {
        return Ok(field.clone());
    }
    check_aliasing(&grid, &spec, field.wavelength, distance)?;

    let inv_l2 = T::one() / (field.wavelength * field.wavelength);
    for (c, f2) in spec.iter_mut().zip(grid.frequency_squared()) {
        let arg = inv_l2 - f2;
        let h = if arg >= T::zero() {
            let phase = T::two_pi() * distance * arg.sqrt();
            Complex::new(phase.cos(), phase.sin())
        } else {
            Complex::new(
                (-T::two_pi() * distance.abs() * (-arg).sqrt()).exp(),
                T::zero(),
            )
        };
        *c *= h;
    }
    spectral.inverse(&mut spec);
    Ok(ScalarField {
        grid,
        amplitudes: spec,
        wavelength: field.wavelength,
    })
}

fn check_aliasing<T: Real>(
    grid: &Grid<T>,
    spec: &[Complex<T>],
    wavelength: T,
    distance: T,
) -> Result<()> {
    let inv_l = T::one() / wavelength;
    let limits: Vec<T> = (0..grid.dim())
        .map(|a| band_limit(wavelength, distance, grid.extent(a)))
        .collect();
    let fx = grid.frequencies(0);
    let fy = if grid.dim() == 2 {
        grid.frequencies(1)
    } else {
        vec![T::zero()]
    };
    let nx = grid.samples(0);
    let mut total = T::zero();
    let mut beyond = T::zero();
    // highest offending frequency per axis, to size the required padding
    let mut worst = vec![T::zero(); grid.dim()];
    for (k, c) in spec.iter().enumerate() {
        let (x, y) = (fx[k % nx], fy[k / nx]);
        if x * x + y * y >= inv_l * inv_l {
            continue;
        }
        let p = c.norm_sqr();
        total += p;
        let over = [x.abs() > limits[0], grid.dim() == 2 && y.abs() > limits[1]];
        if over[0] || over[1] {
            beyond += p;
            if over[0] {
                worst[0] = worst[0].max(x.abs());
            }
            if over[1] {
                worst[1] = worst[1].max(y.abs());
            }
        }
    }
    if total == T::zero() {
        return Ok(());
    }
    let fraction = beyond / total;
    if fraction > lit::<T>(ALIASING_TOLERANCE) {
        let required = (0..grid.dim())
            .map(|a| {
                required_samples(worst[a], wavelength, distance, grid.spacing(a))
                    .max(grid.samples(a))
            })
            .max()
            .unwrap_or(usize::MAX);
        return Err(Error::Aliasing {
            distance: to_f64(distance),
            fraction: to_f64(fraction),
            required,
        });
    }
    Ok(())
}

/// Smallest power of two `N'` with `N' dx >= 2 |d| / sqrt(1/(lambda f)^2 - 1)`.
fn required_samples<T: Real>(f: T, wavelength: T, distance: T, dx: T) -> usize {
    let s = T::one() / (wavelength * f);
    let s = s * s - T::one();
    if !(s > T::zero()) {
        return usize::MAX;
    }
    let length = lit::<T>(2.0) * distance.abs() / s.sqrt();
    let n = to_f64(length / dx).ceil();
    if !(n < (1u64 << 62) as f64) {
        return usize::MAX;
    }
    (n as usize).max(1).next_power_of_two()
}
