//! Atom holography with a Thomas-Fermi condensate.
//!
//! Writing: an optical potential `trap + s |object + reference|^2` shapes the
//! condensate density. Reading: an atomic beam crossing the condensate picks
//! up a phase proportional to the column density and is propagated by the
//! angular-spectrum method; the conjugate order refocuses into a replica of the
//! object. Quantities are SI with `hbar = 1` for energies, so potentials and
//! chemical potentials are angular frequencies.

mod condensate;
mod field;
mod grid;
mod hologram;
pub mod io;

pub use condensate::{
    gp_energy, gp_ground_state, harmonic_tf_mu_1d, solve_chemical_potential, tf_energy,
    thomas_fermi_density, GpSettings, GroundState, PotentialMap, TFProfile, MU_TOLERANCE,
};
pub use field::{
    band_limit, de_broglie_wavelength, phase_imprint, propagate, propagate_with, sodium_mass,
    ImprintModel, ImprintOutput, ImprintReport, ScalarField, ALIASING_TOLERANCE, ATOMIC_MASS_UNIT,
    HBAR, RAMAN_NATH_LIMIT, SODIUM_MASS_U,
};
pub use grid::{Grid, Spectral, MIN_SAMPLES};
pub use hologram::{
    aperture_field, compose_hologram, correlation_score, reconstruct, soft_rectangle, Hologram,
    Reconstruction, ReconstructionTarget, SearchRange,
};
