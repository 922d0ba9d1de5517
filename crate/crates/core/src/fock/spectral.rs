use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use super::matrix::SparseMatrix;
use super::sector::FockSector;
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::scalar::{lit, modulus, to_f64, Real};

/// Numerical tolerances for the exact-dynamics engine.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances<T: Real> {
    /// Allowed `max |H - H^dagger|`, relative to `max(1, max |H|)`.
    pub hermiticity: T,
    /// Allowed deviation of `|psi|` from one.
    pub norm_drift: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            hermiticity: lit(1e-10),
            norm_drift: lit(1e-10),
        }
    }
}

/// Eigen-decomposition `H = U diag(E) U^dagger` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition<T: Real> {
    pub eigenvalues: DVector<T>,
    pub eigenvectors: DMatrix<Complex<T>>,
}

pub fn max_abs<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.iter().fold(T::zero(), |acc, v| acc.max(modulus(*v)))
}

/// Diagonalizes a Hermitian matrix. Real-symmetric input takes the real path.
pub fn diagonalize<T: Real>(
    h: &DMatrix<Complex<T>>,
    tol: &Tolerances<T>,
) -> Result<SpectralDecomposition<T>> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: h.ncols(),
        });
    }
    let deviation = max_abs(&(h - h.adjoint()));
    let scale = max_abs(h).max(T::one());
    if deviation > tol.hermiticity * scale {
        return Err(Error::NotHermitian {
            deviation: to_f64(deviation),
        });
    }

    let is_real = h.iter().all(|v| v.im == T::zero());
    let (values, vectors): (DVector<T>, DMatrix<Complex<T>>) = if is_real {
        let re = h.map(|v| v.re);
        let re = (&re + re.transpose()) * lit::<T>(0.5);
        let eig = SymmetricEigen::new(re);
        (
            eig.eigenvalues,
            eig.eigenvectors.map(|v| Complex::new(v, T::zero())),
        )
    } else {
        let herm = (h + h.adjoint()).map(|v| v * Complex::new(lit::<T>(0.5), T::zero()));
        let eig = SymmetricEigen::new(herm);
        (eig.eigenvalues, eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| values[i]));
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

impl<T: Real> SpectralDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn from_sparse(h: &SparseMatrix<T>, tol: &Tolerances<T>) -> Result<Self> {
        diagonalize(&h.to_dense(), tol)
    }

    /// `U diag(E) U^dagger`.
    pub fn reconstruct(&self) -> DMatrix<Complex<T>> {
        let u = &self.eigenvectors;
        let d = DMatrix::from_diagonal(&self.eigenvalues.map(|e| Complex::new(e, T::zero())));
        u * d * u.adjoint()
    }

    /// Expands `psi0` in the eigenbasis once so that many times can be evaluated cheaply.
    pub fn project(&self, psi0: &StateVector<T>) -> Result<Propagator<'_, T>> {
        if psi0.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi0.dim(),
            });
        }
        let coefficients = self.eigenvectors.adjoint() * psi0.amplitudes();
        Ok(Propagator {
            spectrum: self,
            sector: psi0.sector().clone(),
            coefficients,
        })
    }
}

/// Initial state expanded in an eigenbasis.
#[derive(Debug, Clone)]
pub struct Propagator<'a, T: Real> {
    spectrum: &'a SpectralDecomposition<T>,
    sector: Arc<FockSector>,
    coefficients: DVector<Complex<T>>,
}

impl<T: Real> Propagator<'_, T> {
    /// `psi(t) = U exp(-i E t / hbar) U^dagger psi0`.
    pub fn at(&self, t: T, hbar: T) -> StateVector<T> {
        let phased = DVector::from_fn(self.coefficients.len(), |k, _| {
            let phase = -self.spectrum.eigenvalues[k] * t / hbar;
            self.coefficients[k] * Complex::new(phase.cos(), phase.sin())
        });
        StateVector::from_raw(self.sector.clone(), &self.spectrum.eigenvectors * phased)
    }

    /// Survival amplitude `<psi0|psi(t)>`, evaluated in the eigenbasis.
    pub fn return_amplitude(&self, t: T, hbar: T) -> Complex<T> {
        self.coefficients
            .iter()
            .zip(self.spectrum.eigenvalues.iter())
            .fold(Complex::default(), |acc, (c, &e)| {
                let phase = -e * t / hbar;
                acc + Complex::new(c.norm_sqr(), T::zero()) * Complex::new(phase.cos(), phase.sin())
            })
    }
}

/// Evolves `psi0` for time `t` under the decomposed Hamiltonian.
pub fn evolve<T: Real>(
    psi0: &StateVector<T>,
    spectrum: &SpectralDecomposition<T>,
    t: T,
    hbar: T,
) -> Result<StateVector<T>> {
    Ok(spectrum.project(psi0)?.at(t, hbar))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    #[test]
    fn diagonal_matrix() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0), c(0.0), c(1.0)]));
        let d = diagonalize(&h, &Tolerances::default()).unwrap();
        assert_eq!(d.eigenvalues.as_slice(), &[0.0, 1.0, 2.0]);
        for r in 0..3 {
            for col in 0..3 {
                let v = d.eigenvectors[(r, col)].norm();
                let expect = if (r, col) == (1, 0) || (r, col) == (2, 1) || (r, col) == (0, 2) {
                    1.0
                } else {
                    0.0
                };
                assert!((v - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pauli_x() {
        let chi = 0.7;
        let h = DMatrix::from_row_slice(2, 2, &[c(0.0), c(chi), c(chi), c(0.0)]);
        let d = diagonalize(&h, &Tolerances::default()).unwrap();
        assert!((d.eigenvalues[0] + chi).abs() < 1e-14);
        assert!((d.eigenvalues[1] - chi).abs() < 1e-14);
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let h = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(1.0),
                Complex::new(0.5, 0.25),
                Complex::new(0.0, -1.0),
                Complex::new(0.5, -0.25),
                c(-2.0),
                c(0.3),
                Complex::new(0.0, 1.0),
                c(0.3),
                c(0.5),
            ],
        );
        let d = diagonalize(&h, &Tolerances::default()).unwrap();
        let err = max_abs(&(d.reconstruct() - &h));
        assert!(err <= 1e-10 * max_abs(&h));
        let u = &d.eigenvectors;
        assert!(max_abs(&(u.adjoint() * u - DMatrix::identity(3, 3))) <= 1e-10);
        assert!(d.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(
            diagonalize(&h, &Tolerances::default()),
            Err(Error::NotHermitian { .. })
        ));
    }
}
