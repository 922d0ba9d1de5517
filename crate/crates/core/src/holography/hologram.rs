use nalgebra::Complex;
use rayon::prelude::*;

use super::condensate::{thomas_fermi_density, PotentialMap, TFProfile};
use super::field::{phase_imprint, propagate_with, ImprintModel, ScalarField};
use super::grid::{Grid, Spectral};
use crate::error::{invalid, Error, Result};
use crate::scalar::{count, lit, to_f64, Real};

/// Density hologram written by `trap + s |object + reference|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hologram<T: Real> {
    pub profile: TFProfile<T>,
    pub potential: PotentialMap<T>,
    /// `|object + reference|^2`.
    pub writing_intensity: Vec<T>,
    /// Fraction of the trap core (`mu > V_trap`) where the writing light empties the condensate.
    pub clipping_fraction: T,
    /// Whether the density support splits into disconnected pieces.
    pub fragmented: bool,
    pub warnings: Vec<String>,
}

fn support_components<T: Real>(grid: &Grid<T>, density: &[T]) -> usize {
    let occupied: Vec<bool> = density.iter().map(|&r| r > T::zero()).collect();
    if grid.dim() == 1 {
        return occupied.windows(2).filter(|w| !w[0] && w[1]).count() + usize::from(occupied[0]);
    }
    let (nx, ny) = (grid.samples(0), grid.samples(1));
    let mut seen = vec![false; occupied.len()];
    let mut components = 0;
    let mut stack = Vec::new();
    for start in 0..occupied.len() {
        if !occupied[start] || seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(k) = stack.pop() {
            let (ix, iy) = (k % nx, k / nx);
            let mut visit = |j: usize| {
                if occupied[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if ix > 0 {
                visit(k - 1);
            }
            if ix + 1 < nx {
                visit(k + 1);
            }
            if iy > 0 {
                visit(k - nx);
            }
            if iy + 1 < ny {
                visit(k + nx);
            }
        }
    }
    components
}

/// Writes the interference of `object_field` and `reference` into the condensate.
pub fn compose_hologram<T: Real>(
    object_field: &ScalarField<T>,
    reference: &ScalarField<T>,
    trap: &PotentialMap<T>,
    writing_strength: T,
    g: T,
    n: T,
) -> Result<Hologram<T>> {
    object_field.grid.ensure_same(&reference.grid)?;
    object_field.grid.ensure_same(trap.grid())?;
    if !writing_strength.is_finite() {
        return Err(invalid("writing_strength", "must be finite"));
    }
    let writing_intensity: Vec<T> = object_field
        .amplitudes
        .iter()
        .zip(&reference.amplitudes)
        .map(|(o, r)| (o + r).norm_sqr())
        .collect();
    let values = trap
        .values()
        .iter()
        .zip(&writing_intensity)
        .map(|(&v, &i)| v + writing_strength * i)
        .collect();
    let potential = PotentialMap::new(*trap.grid(), values)?;
    let profile = thomas_fermi_density(&potential, g, n)?;

    let mut core = 0usize;
    let mut clipped = 0usize;
    for (&vt, &r) in trap.values().iter().zip(&profile.density) {
        if profile.mu > vt {
            core += 1;
            if r == T::zero() {
                clipped += 1;
            }
        }
    }
    let clipping_fraction = if core == 0 {
        T::zero()
    } else {
        count::<T>(clipped) / count::<T>(core)
    };
    let fragmented = support_components(&profile.grid, &profile.density) > 1;
    let mut warnings = Vec::new();
    if fragmented {
        warnings.push(format!(
            "writing strength fragments the condensate (clipping fraction {:.3})",
            to_f64(clipping_fraction)
        ));
    }
    Ok(Hologram {
        profile,
        potential,
        writing_intensity,
        clipping_fraction,
        fragmented,
        warnings,
    })
}

/// Uniformly spaced propagation distances `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRange<T: Real> {
    pub start: T,
    pub end: T,
    pub steps: usize,
}

impl<T: Real> SearchRange<T> {
    pub fn distances(&self) -> Result<Vec<T>> {
        if self.steps == 0
            || !self.start.is_finite()
            || !self.end.is_finite()
            || self.end < self.start
        {
            return Err(Error::EmptySearchRange);
        }
        if self.steps == 1 {
            return Ok(vec![self.start]);
        }
        let span = self.end - self.start;
        let last = count::<T>(self.steps - 1);
        Ok((0..self.steps)
            .map(|k| self.start + span * count::<T>(k) / last)
            .collect())
    }
}

/// Original object intensity and the transverse window of the conjugate order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionTarget<T: Real> {
    pub object_intensity: Vec<T>,
    /// `(x_min, x_max)`.
    pub window: (T, T),
}

/// A window whose intensity spread is below this fraction of the image peak counts as flat.
pub const FLAT_LEVEL: f64 = 1e-3;

/// Best normalized correlation of the object against the image inside the
/// window, over lateral shifts that keep the object template inside it.
/// Returns `(score, x of the template center)`; a flat window scores zero.
pub fn correlation_score<T: Real>(
    grid: &Grid<T>,
    image_intensity: &[T],
    target: &ReconstructionTarget<T>,
) -> Result<(T, Option<T>)> {
    let template = object_template(&target.object_intensity)?;
    let xs = grid.coordinates(0);
    let idx: Vec<usize> = (0..xs.len())
        .filter(|&i| xs[i] >= target.window.0 && xs[i] <= target.window.1)
        .collect();
    let len = template.len();
    if idx.len() < len {
        return Err(invalid("window", "narrower than the object template"));
    }
    let (lo, hi) = (idx[0], idx[idx.len() - 1]);

    let peak = image_intensity
        .iter()
        .copied()
        .fold(T::zero(), |a, b| a.max(b));
    let window = &image_intensity[lo..=hi];
    let wmean = window.iter().fold(T::zero(), |a, &b| a + b) / count::<T>(window.len());
    let wvar = window
        .iter()
        .fold(T::zero(), |a, &b| a + (b - wmean) * (b - wmean))
        / count::<T>(window.len());
    if !(wvar.sqrt() > lit::<T>(FLAT_LEVEL) * peak) {
        return Ok((T::zero(), None));
    }

    let n = count::<T>(len);
    let tmean = template.iter().fold(T::zero(), |a, &b| a + b) / n;
    let tdev: Vec<T> = template.iter().map(|&t| t - tmean).collect();
    let tnorm = tdev.iter().fold(T::zero(), |a, &b| a + b * b).sqrt();
    let mut best = (T::zero(), None);
    for s in lo..=hi + 1 - len {
        let seg = &image_intensity[s..s + len];
        let mean = seg.iter().fold(T::zero(), |a, &b| a + b) / n;
        let mut num = T::zero();
        let mut den = T::zero();
        for (&v, &t) in seg.iter().zip(&tdev) {
            num += (v - mean) * t;
            den += (v - mean) * (v - mean);
        }
        if den > T::zero() {
            let r = num / (den.sqrt() * tnorm);
            if r > best.0 {
                best = (r, Some(xs[s + len / 2]));
            }
        }
    }
    Ok(best)
}

/// Object intensity cropped to where it exceeds 1e-3 of its peak, padded by a
/// quarter of that width on each side.
fn object_template<T: Real>(object: &[T]) -> Result<Vec<T>> {
    let peak = object.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let floor = object.iter().copied().fold(peak, |a, b| a.min(b));
    if !(peak > floor) {
        return Err(Error::DegenerateObject);
    }
    let cut = floor + (peak - floor) * lit::<T>(1e-3);
    let first = object
        .iter()
        .position(|&v| v > cut)
        .ok_or(Error::DegenerateObject)?;
    let last = object
        .iter()
        .rposition(|&v| v > cut)
        .ok_or(Error::DegenerateObject)?;
    let margin = (last - first + 1) / 4;
    let a = first.saturating_sub(margin);
    let b = (last + margin).min(object.len() - 1);
    let t = object[a..=b].to_vec();
    let mean = t.iter().fold(T::zero(), |s, &v| s + v) / count::<T>(t.len());
    if t.iter().all(|&v| v == mean) {
        return Err(Error::DegenerateObject);
    }
    Ok(t)
}

/// Result of a focal-plane search.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction<T: Real> {
    pub best_distance: T,
    pub image: ScalarField<T>,
    pub score: T,
    /// Transverse position of the matched object in the window.
    pub image_position: Option<T>,
    /// `(distance, score)` for every evaluated plane, coarse scan then refinement.
    pub scan: Vec<(T, T)>,
    pub warnings: Vec<String>,
}

fn scan_planes<T: Real>(
    spectral: &Spectral<T>,
    imprinted: &ScalarField<T>,
    target: &ReconstructionTarget<T>,
    distances: &[T],
) -> Result<Vec<(T, T)>> {
    distances
        .par_iter()
        .map(|&d| {
            let image = propagate_with(spectral, imprinted, d)?;
            let (score, _) = correlation_score(&image.grid, &image.intensity(), target)?;
            Ok((d, score))
        })
        .collect()
}

/// Highest score; ties go to the smaller distance.
fn best_of<T: Real>(scan: &[(T, T)]) -> (T, T) {
    let mut best = scan[0];
    for &(d, s) in &scan[1..] {
        if s > best.1 || (s == best.1 && d < best.0) {
            best = (d, s);
        }
    }
    best
}

/// Reads the hologram with `reading`, scans the propagation distance and
/// returns the plane where the conjugate order best matches the object.
///
/// The coarse scan is followed by an equally dense scan over one coarse step
/// on either side of the best plane. Planes are evaluated in parallel and
/// reduced in a fixed order, so the result does not depend on thread count.
pub fn reconstruct<T: Real>(
    hologram_profile: &TFProfile<T>,
    model: &ImprintModel<T>,
    reading: &ScalarField<T>,
    search_range: &SearchRange<T>,
    target: &ReconstructionTarget<T>,
) -> Result<Reconstruction<T>> {
    let grid = reading.grid;
    if grid.dim() != 1 {
        return Err(Error::Unsupported(
            "reconstruction scans one transverse dimension only".into(),
        ));
    }
    if target.object_intensity.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: target.object_intensity.len(),
        });
    }
    object_template(&target.object_intensity)?;
    let distances = search_range.distances()?;
    let imprint = phase_imprint(reading, hologram_profile, model)?;
    let spectral = Spectral::new(&grid);

    let mut scan = scan_planes(&spectral, &imprint.field, target, &distances)?;
    let (coarse_best, _) = best_of(&scan);
    if distances.len() > 2 {
        let step = distances[1] - distances[0];
        let fine = SearchRange {
            start: coarse_best - step,
            end: coarse_best + step,
            steps: distances.len(),
        };
        scan.extend(scan_planes(
            &spectral,
            &imprint.field,
            target,
            &fine.distances()?,
        )?);
    }
    let (best_distance, _) = best_of(&scan);
    let image = propagate_with(&spectral, &imprint.field, best_distance)?;
    let (score, image_position) = correlation_score(&grid, &image.intensity(), target)?;
    Ok(Reconstruction {
        best_distance,
        image,
        score,
        image_position,
        scan,
        warnings: imprint.warnings,
    })
}

/// Soft-edged rectangle `0.5 [tanh((x + w/2)/e) - tanh((x - w/2)/e)]`, centered at `x0`.
pub fn soft_rectangle<T: Real>(x: T, x0: T, width: T, edge: T) -> T {
    let half = width / lit::<T>(2.0);
    lit::<T>(0.5) * (((x - x0 + half) / edge).tanh() - ((x - x0 - half) / edge).tanh())
}

/// Unit-amplitude object of a soft-edged aperture.
pub fn aperture_field<T: Real>(
    grid: Grid<T>,
    wavelength: T,
    width: T,
    edge: T,
) -> Result<ScalarField<T>> {
    ScalarField::from_fn(grid, wavelength, |x, _| {
        Complex::new(soft_rectangle(x, T::zero(), width, edge), T::zero())
    })
}
