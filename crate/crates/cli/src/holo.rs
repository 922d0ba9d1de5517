//! The line-hologram scenario: write a rectangular aperture into a harmonic
//! Thomas-Fermi condensate with an off-axis reference, read it with an atomic
//! beam and search for the conjugate focus.

use std::f64::consts::PI;

use matterwave::holography::{
    aperture_field, compose_hologram, de_broglie_wavelength, propagate, reconstruct, Grid,
    Hologram, ImprintModel, PotentialMap, Reconstruction, ReconstructionTarget, ScalarField,
    SearchRange, ATOMIC_MASS_UNIT, HBAR, SODIUM_MASS_U,
};
use nalgebra::Complex;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// SI units throughout; frequencies in Hz.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoloParams {
    pub samples: usize,
    pub spacing: f64,
    pub writing_wavelength: f64,
    pub object_width: f64,
    pub object_edge: f64,
    /// Distance from the aperture to the condensate.
    pub object_distance: f64,
    /// Fringe period of the reference against normal incidence; the tilt puts
    /// the conjugate image at negative x.
    pub reference_period: f64,
    pub trap_frequency: f64,
    pub tf_radius: f64,
    pub atom_number: f64,
    /// Writing potential strength over the bare chemical potential.
    pub writing_fraction: f64,
    /// Imprinted phase per unit of writing intensity; sets `eta`.
    pub phase_depth: f64,
    pub reading_velocity: f64,
    #[serde(default = "sodium")]
    pub mass_u: f64,
    pub reading_half_width: f64,
    #[serde(default = "super_gauss")]
    pub reading_order: i32,
    /// Transverse window `[min, max]` of the conjugate image.
    pub window: [f64; 2],
    /// Search interval in units of the paraxial focus estimate.
    pub search: [f64; 2],
    pub search_steps: usize,
    pub thickness: f64,
    #[serde(default)]
    pub incidence_angle: f64,
}

fn sodium() -> f64 {
    SODIUM_MASS_U
}

fn super_gauss() -> i32 {
    8
}

fn positive(key: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(
            format!("holo.{key}"),
            "must be finite and positive",
        ))
    }
}

impl HoloParams {
    pub fn validate(&self) -> CliResult<()> {
        Grid::<f64>::new_1d(self.samples, self.spacing).map_err(|e| match e {
            matterwave::Error::InvalidParameter { name, reason } => {
                CliError::config(format!("holo.{name}"), reason)
            }
            other => CliError::config("holo.samples", other.to_string()),
        })?;
        for (k, v) in [
            ("writing_wavelength", self.writing_wavelength),
            ("object_width", self.object_width),
            ("object_edge", self.object_edge),
            ("object_distance", self.object_distance),
            ("reference_period", self.reference_period),
            ("trap_frequency", self.trap_frequency),
            ("tf_radius", self.tf_radius),
            ("atom_number", self.atom_number),
            ("writing_fraction", self.writing_fraction),
            ("reading_velocity", self.reading_velocity),
            ("mass_u", self.mass_u),
            ("reading_half_width", self.reading_half_width),
        ] {
            positive(k, v)?;
        }
        if !(self.writing_wavelength < self.reference_period) {
            return Err(CliError::config(
                "holo.reference_period",
                "must exceed the writing wavelength",
            ));
        }
        if !self.phase_depth.is_finite() {
            return Err(CliError::config("holo.phase_depth", "must be finite"));
        }
        if !(self.thickness >= 0.0) || !self.thickness.is_finite() {
            return Err(CliError::config(
                "holo.thickness",
                "must be finite and non-negative",
            ));
        }
        if !(self.incidence_angle.abs() < PI / 2.0) {
            return Err(CliError::config(
                "holo.incidence_angle",
                "must lie in (-pi/2, pi/2)",
            ));
        }
        if self.reading_order < 2 || self.reading_order % 2 != 0 {
            return Err(CliError::config(
                "holo.reading_order",
                "must be an even integer >= 2",
            ));
        }
        let half = self.samples as f64 * self.spacing / 2.0;
        if !(self.window[0] < self.window[1]) || self.window[0] < -half || self.window[1] > half {
            return Err(CliError::config(
                "holo.window",
                "must be an increasing pair inside the grid",
            ));
        }
        if !(self.window[1] - self.window[0] > 1.5 * self.object_width) {
            return Err(CliError::config(
                "holo.window",
                "must be wider than the object",
            ));
        }
        if !(self.search[0] > 0.0 && self.search[0] <= self.search[1])
            || !self.search[1].is_finite()
        {
            return Err(CliError::config(
                "holo.search",
                "must be an increasing pair of positive factors",
            ));
        }
        if self.search_steps == 0 {
            return Err(CliError::config("holo.search_steps", "must be at least 1"));
        }
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        self.mass_u * ATOMIC_MASS_UNIT
    }

    pub fn de_broglie(&self) -> f64 {
        de_broglie_wavelength(self.mass(), self.reading_velocity, HBAR).expect("validated inputs")
    }

    /// Paraxial focus of the conjugate order, `z_o lambda_L / lambda_dB`.
    pub fn focus_estimate(&self) -> f64 {
        self.object_distance * self.writing_wavelength / self.de_broglie()
    }
}

/// Everything produced by one holography run.
#[derive(Debug, Clone)]
pub struct HoloRun {
    pub grid: Grid<f64>,
    pub original: ScalarField<f64>,
    pub hologram: Hologram<f64>,
    pub trap: PotentialMap<f64>,
    pub eta: f64,
    pub de_broglie: f64,
    pub focus_estimate: f64,
    pub reconstruction: Reconstruction<f64>,
}

pub fn run(p: &HoloParams) -> matterwave::Result<HoloRun> {
    let grid = Grid::new_1d(p.samples, p.spacing)?;
    let original = aperture_field(grid, p.writing_wavelength, p.object_width, p.object_edge)?;
    let object = propagate(&original, p.object_distance)?;
    let tilt = -(p.writing_wavelength / p.reference_period).asin();
    let reference = ScalarField::tilted_plane_wave(grid, p.writing_wavelength, tilt)?;

    let omega = 2.0 * PI * p.trap_frequency;
    let hbar_over_mass = HBAR / p.mass();
    let mu = omega * omega * p.tf_radius * p.tf_radius / (2.0 * hbar_over_mass);
    // 1D harmonic Thomas-Fermi normalization N = 4 mu R / (3 g)
    let g = 4.0 * mu * p.tf_radius / (3.0 * p.atom_number);
    let trap = PotentialMap::harmonic(grid, [omega, 0.0], hbar_over_mass)?;
    let strength = p.writing_fraction * mu;
    let hologram = compose_hologram(&object, &reference, &trap, strength, g, p.atom_number)?;

    let eta = p.phase_depth * g / strength;
    let model = ImprintModel {
        eta,
        incidence_angle: p.incidence_angle,
        thickness: p.thickness,
    };
    let de_broglie = p.de_broglie();
    let (w, order) = (p.reading_half_width, p.reading_order);
    let reading = ScalarField::from_fn(grid, de_broglie, |x, _| {
        Complex::new((-(x / w).powi(order)).exp(), 0.0)
    })?;
    let focus_estimate = p.focus_estimate();
    let search = SearchRange {
        start: p.search[0] * focus_estimate,
        end: p.search[1] * focus_estimate,
        steps: p.search_steps,
    };
    let target = ReconstructionTarget {
        object_intensity: original.intensity(),
        window: (p.window[0], p.window[1]),
    };
    let reconstruction = reconstruct(&hologram.profile, &model, &reading, &search, &target)?;
    Ok(HoloRun {
        grid,
        original,
        hologram,
        trap,
        eta,
        de_broglie,
        focus_estimate,
        reconstruction,
    })
}

impl HoloRun {
    /// Original and reconstructed intensities, each scaled to unit peak, on a
    /// span of twice the object width centered on the original and on the
    /// matched image position.
    pub fn inset(&self, object_width: f64) -> Vec<(f64, f64, f64)> {
        let Some(center) = self.reconstruction.image_position else {
            return Vec::new();
        };
        let xs = self.grid.coordinates(0);
        let dx = self.grid.spacing(0);
        let half = (object_width / dx).round() as isize;
        let zero = (self.grid.samples(0) / 2) as isize;
        let shift = (center / dx).round() as isize;
        let original = self.original.intensity();
        let image = self.reconstruction.image.intensity();
        let span = (-half..=half).filter(|k| {
            let (a, b) = (zero + k, zero + shift + k);
            a >= 0 && b >= 0 && (a as usize) < xs.len() && (b as usize) < xs.len()
        });
        let rows: Vec<(f64, f64, f64)> = span
            .map(|k| {
                (
                    k as f64 * dx,
                    original[(zero + k) as usize],
                    image[(zero + shift + k) as usize],
                )
            })
            .collect();
        let peak_o = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        let peak_i = rows.iter().map(|r| r.2).fold(0.0, f64::max);
        let scale = |v: f64, p: f64| if p > 0.0 { v / p } else { 0.0 };
        rows.into_iter()
            .map(|(x, o, i)| (x, scale(o, peak_o), scale(i, peak_i)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> HoloParams {
        HoloParams {
            samples: 1024,
            spacing: 0.25e-6,
            writing_wavelength: 0.589e-6,
            object_width: 10e-6,
            object_edge: 1e-6,
            object_distance: 30e-6,
            reference_period: 1.25e-6,
            trap_frequency: 20.0,
            tf_radius: 100e-6,
            atom_number: 1e4,
            writing_fraction: 0.075,
            phase_depth: 0.5,
            reading_velocity: 0.1,
            mass_u: SODIUM_MASS_U,
            reading_half_width: 40e-6,
            reading_order: 8,
            window: [-100e-6, -20e-6],
            search: [0.8, 1.2],
            search_steps: 5,
            thickness: 0.0,
            incidence_angle: 0.0,
        }
    }

    fn key(p: HoloParams) -> String {
        match p.validate().unwrap_err() {
            CliError::Config { key, .. } => key,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sodium_at_a_tenth_of_a_meter_per_second() {
        let p = params();
        assert!((p.de_broglie() - 1.7357e-7).abs() < 1e-10);
        assert!((p.focus_estimate() - 30e-6 * 0.589e-6 / p.de_broglie()).abs() < 1e-18);
    }

    #[test]
    fn validation_names_the_field() {
        assert!(params().validate().is_ok());
        assert_eq!(
            key(HoloParams {
                reference_period: 0.5e-6,
                ..params()
            }),
            "holo.reference_period"
        );
        assert_eq!(
            key(HoloParams {
                window: [-10e-6, -5e-6],
                ..params()
            }),
            "holo.window"
        );
        assert_eq!(
            key(HoloParams {
                window: [-1.0, 0.0],
                ..params()
            }),
            "holo.window"
        );
        assert_eq!(
            key(HoloParams {
                reading_order: 3,
                ..params()
            }),
            "holo.reading_order"
        );
        assert_eq!(
            key(HoloParams {
                search: [1.2, 0.8],
                ..params()
            }),
            "holo.search"
        );
        assert_eq!(
            key(HoloParams {
                atom_number: f64::NAN,
                ..params()
            }),
            "holo.atom_number"
        );
        assert_eq!(
            key(HoloParams {
                samples: 0,
                ..params()
            }),
            "holo.samples"
        );
    }
}
