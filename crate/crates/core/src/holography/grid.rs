use std::sync::Arc;

use nalgebra::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::scalar::{count, lit, Real};

/// Smallest accepted number of samples per axis.
pub const MIN_SAMPLES: usize = 64;

/// Uniform centered grid in one or two transverse dimensions.
///
/// Coordinates are `x_i = (i - n/2) dx`; samples are stored with `x` fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T: Real> {
    dim: usize,
    samples: [usize; 2],
    spacing: [T; 2],
}

fn check_axis<T: Real>(n: usize, d: T) -> Result<()> {
    if n < MIN_SAMPLES || !n.is_power_of_two() {
        return Err(invalid(
            "samples",
            format!("{n} is not a power of two >= {MIN_SAMPLES}"),
        ));
    }
    if !(d > T::zero()) || !d.is_finite() {
        return Err(invalid("spacing", "must be finite and positive"));
    }
    Ok(())
}

impl<T: Real> Grid<T> {
    pub fn new_1d(samples: usize, spacing: T) -> Result<Self> {
        check_axis(samples, spacing)?;
        Ok(Grid {
            dim: 1,
            samples: [samples, 1],
            spacing: [spacing, T::one()],
        })
    }

    pub fn new_2d(nx: usize, ny: usize, dx: T, dy: T) -> Result<Self> {
        check_axis(nx, dx)?;
        check_axis(ny, dy)?;
        Ok(Grid {
            dim: 2,
            samples: [nx, ny],
            spacing: [dx, dy],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self, axis: usize) -> usize {
        self.samples[axis]
    }

    pub fn spacing(&self, axis: usize) -> T {
        self.spacing[axis]
    }

    /// Total number of samples.
    pub fn len(&self) -> usize {
        self.samples[0] * self.samples[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Length `dx` (1D) or area `dx dy` (2D) of one cell.
    pub fn cell_volume(&self) -> T {
        if self.dim == 1 {
            self.spacing[0]
        } else {
            self.spacing[0] * self.spacing[1]
        }
    }

    /// Period `n dx` along an axis.
    pub fn extent(&self, axis: usize) -> T {
        count::<T>(self.samples[axis]) * self.spacing[axis]
    }

    pub fn coordinates(&self, axis: usize) -> Vec<T> {
        let n = self.samples[axis];
        let half = (n / 2) as isize;
        (0..n)
            .map(|i| lit::<T>((i as isize - half) as f64) * self.spacing[axis])
            .collect()
    }

    /// Spatial frequencies (cycles per length) in FFT order.
    pub fn frequencies(&self, axis: usize) -> Vec<T> {
        let n = self.samples[axis];
        let l = self.extent(axis);
        (0..n)
            .map(|k| {
                let k = if k < n / 2 {
                    k as f64
                } else {
                    k as f64 - n as f64
                };
                lit::<T>(k) / l
            })
            .collect()
    }

    /// Squared spatial frequency `f_x^2 + f_y^2` per sample, in FFT order.
    pub fn frequency_squared(&self) -> Vec<T> {
        let fx = self.frequencies(0);
        if self.dim == 1 {
            return fx.iter().map(|&f| f * f).collect();
        }
        let fy = self.frequencies(1);
        let mut out = Vec::with_capacity(self.len());
        for &y in &fy {
            for &x in &fx {
                out.push(x * x + y * y);
            }
        }
        out
    }

    /// `(x, y)` of each sample (`y = 0` in 1D).
    pub fn points(&self) -> Vec<(T, T)> {
        let xs = self.coordinates(0);
        if self.dim == 1 {
            return xs.into_iter().map(|x| (x, T::zero())).collect();
        }
        let ys = self.coordinates(1);
        let mut out = Vec::with_capacity(self.len());
        for &y in &ys {
            for &x in &xs {
                out.push((x, y));
            }
        }
        out
    }

    /// Sum of `values` times the cell volume.
    pub fn integrate(&self, values: impl IntoIterator<Item = T>) -> T {
        values.into_iter().fold(T::zero(), |a, v| a + v) * self.cell_volume()
    }

    pub fn ensure_same(&self, other: &Grid<T>) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Forward and inverse FFTs over a grid; the inverse is normalized.
#[derive(Clone)]
pub struct Spectral<T: Real> {
    grid: Grid<T>,
    forward: [Arc<dyn Fft<T>>; 2],
    inverse: [Arc<dyn Fft<T>>; 2],
}

impl<T: Real> std::fmt::Debug for Spectral<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .finish()
    }
}

impl<T: Real> Spectral<T> {
    pub fn new(grid: &Grid<T>) -> Self {
        let mut planner = FftPlanner::<T>::new();
        let (nx, ny) = (grid.samples(0), grid.samples(1).max(1));
        Spectral {
            grid: *grid,
            forward: [planner.plan_fft_forward(nx), planner.plan_fft_forward(ny)],
            inverse: [planner.plan_fft_inverse(nx), planner.plan_fft_inverse(ny)],
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    fn run(&self, data: &mut [Complex<T>], plans: &[Arc<dyn Fft<T>>; 2]) {
        let (nx, ny) = (self.grid.samples(0), self.grid.samples(1));
        plans[0].process(data);
        if self.grid.dim() == 2 {
            let mut column = vec![Complex::default(); ny];
            for ix in 0..nx {
                for iy in 0..ny {
                    column[iy] = data[iy * nx + ix];
                }
                plans[1].process(&mut column);
                for iy in 0..ny {
                    data[iy * nx + ix] = column[iy];
                }
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.inverse);
        let scale = T::one() / count::<T>(self.grid.len());
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::<f64>::new_1d(100, 1.0).is_err());
        assert!(Grid::<f64>::new_1d(32, 1.0).is_err());
        assert!(Grid::<f64>::new_1d(64, 0.0).is_err());
        let g = Grid::<f64>::new_1d(64, 0.5).unwrap();
        let x = g.coordinates(0);
        assert_eq!(x[32], 0.0);
        assert_eq!(x[0], -16.0);
        assert_eq!(g.extent(0), 32.0);
    }

    #[test]
    fn fft_round_trip_2d() {
        let g = Grid::<f64>::new_2d(64, 128, 1.0, 0.5).unwrap();
        let s = Spectral::new(&g);
        let orig: Vec<Complex<f64>> = (0..g.len())
            .map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut data = orig.clone();
        s.forward(&mut data);
        s.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn plane_wave_lands_on_its_bin() {
        let g = Grid::<f64>::new_1d(64, 0.25).unwrap();
        let f = g.frequencies(0);
        let x = g.coordinates(0);
        let mut data: Vec<Complex<f64>> = x
            .iter()
            .map(|&x| Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * f[5] * x))
            .collect();
        Spectral::new(&g).forward(&mut data);
        let peak = (0..64)
            .max_by(|&a, &b| data[a].norm().partial_cmp(&data[b].norm()).unwrap())
            .unwrap();
        assert_eq!(peak, 5);
    }
}
