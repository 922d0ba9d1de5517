use std::sync::Arc;

use nalgebra::{Complex, DVector};

use super::matrix::apply_term;
use super::operator::OperatorExpression;
use super::sector::FockSector;
use crate::error::{Error, Result};
use crate::scalar::{to_f64, Real};

/// Normalized complex amplitudes over a [`FockSector`].
#[derive(Debug, Clone)]
pub struct StateVector<T: Real> {
    sector: Arc<FockSector>,
    amplitudes: DVector<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub(crate) fn from_raw(sector: Arc<FockSector>, amplitudes: DVector<Complex<T>>) -> Self {
        StateVector { sector, amplitudes }
    }

    /// Fock product state `|occupation>`; must belong to the sector.
    pub fn basis(sector: Arc<FockSector>, occupation: &[u32]) -> Result<Self> {
        let i = sector.position(occupation).ok_or_else(|| {
            crate::error::invalid(
                "occupation",
                format!("{occupation:?} is not a state of the sector"),
            )
        })?;
        let mut amplitudes = DVector::zeros(sector.dim());
        amplitudes[i] = Complex::new(T::one(), T::zero());
        Ok(StateVector { sector, amplitudes })
    }

    /// Wraps `amplitudes`, which must already have unit norm within `tolerance`.
    pub fn from_amplitudes(
        sector: Arc<FockSector>,
        amplitudes: DVector<Complex<T>>,
        tolerance: T,
    ) -> Result<Self> {
        if amplitudes.len() != sector.dim() {
            return Err(Error::DimensionMismatch {
                expected: sector.dim(),
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - T::one()).abs() > tolerance {
            return Err(Error::NotNormalized { norm: to_f64(norm) });
        }
        Ok(StateVector { sector, amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(sector: Arc<FockSector>, amplitudes: DVector<Complex<T>>) -> Result<Self> {
        if amplitudes.len() != sector.dim() {
            return Err(Error::DimensionMismatch {
                expected: sector.dim(),
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if norm == T::zero() {
            return Err(Error::NotNormalized { norm: 0.0 });
        }
        Ok(StateVector {
            sector,
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn sector(&self) -> &Arc<FockSector> {
        &self.sector
    }

    pub fn amplitudes(&self) -> &DVector<Complex<T>> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> T {
        self.amplitudes.norm()
    }

    /// Amplitude of the basis state `occupation` (zero when it is not in the sector).
    pub fn amplitude(&self, occupation: &[u32]) -> Complex<T> {
        self.sector
            .position(occupation)
            .map(|i| self.amplitudes[i])
            .unwrap_or_default()
    }

    /// Probability of each basis state.
    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn overlap(&self, other: &StateVector<T>) -> Result<Complex<T>> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

/// `<psi|expr|psi>`. Parts of `expr` that leave the sector contribute zero.
pub fn expectation<T: Real>(psi: &StateVector<T>, expr: &OperatorExpression<T>) -> Complex<T> {
    let sector = psi.sector();
    let modes = sector.modes().len();
    let mut acc = Complex::default();
    for (col, occ) in sector.states().iter().enumerate() {
        let a = psi.amplitudes[col];
        if a.re == T::zero() && a.im == T::zero() {
            continue;
        }
        for t in &expr.terms {
            if t.factors.iter().any(|f| f.mode >= modes) {
                continue;
            }
            if let Some((image, amp)) = apply_term(t, occ) {
                if let Some(row) = sector.position(&image) {
                    acc += psi.amplitudes[row].conj() * amp * a;
                }
            }
        }
    }
    acc
}
