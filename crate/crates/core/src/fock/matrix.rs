use nalgebra::{Complex, DMatrix, DVector};

use super::operator::{LadderKind, OperatorExpression, Term};
use super::sector::FockSector;
use crate::error::{Error, Result};
use crate::scalar::{modulus, Real};

/// Square complex matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T: Real> {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex<T>>,
}

impl<T: Real> SparseMatrix<T> {
    /// Builds from (row, col, value) triplets; duplicates are summed and
    /// explicit zeros removed.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex<T>)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, Complex<T>)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(_, _, v)| v.re != T::zero() || v.im != T::zero());

        let mut row_ptr = vec![0usize; dim + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix {
            dim,
            row_ptr,
            cols: merged.iter().map(|t| t.1).collect(),
            values: merged.iter().map(|t| t.2).collect(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_triplets(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.cols[range.clone()]
            .binary_search(&col)
            .map(|k| self.values[range.start + k])
            .unwrap_or_default()
    }

    /// Iterates over stored `(row, col, value)` entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex<T>)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.values[k]))
        })
    }

    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn mul_vec(&self, x: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        DVector::from_fn(self.dim, |r, _| {
            let mut acc = Complex::default();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            acc
        })
    }

    /// `<x|A|x>`.
    pub fn quadratic_form(&self, x: &DVector<Complex<T>>) -> Complex<T> {
        let mut acc = Complex::default();
        for (r, c, v) in self.iter() {
            acc += x[r].conj() * v * x[c];
        }
        acc
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, v| m.max(modulus(*v)))
    }

    /// `max |A - A^dagger|`.
    pub fn hermiticity_deviation(&self) -> T {
        self.iter()
            .map(|(r, c, v)| modulus(v - self.get(c, r).conj()))
            .fold(T::zero(), |m, d| m.max(d))
    }

    /// Whether no entry lies outside the main and first off-diagonals.
    pub fn is_tridiagonal(&self) -> bool {
        self.iter().all(|(r, c, _)| r.abs_diff(c) <= 1)
    }
}

/// Applies the ordered monomial to basis state `occ`; returns the image state
/// and its amplitude, or `None` when the product annihilates the state.
pub(crate) fn apply_term<T: Real>(term: &Term<T>, occ: &[u32]) -> Option<(Vec<u32>, Complex<T>)> {
    let mut out = occ.to_vec();
    // product of the integer factors under the square root, exact while it fits
    let mut exact: Option<u128> = Some(1);
    let mut amp = T::one();
    for f in term.factors.iter().rev() {
        let n = out[f.mode];
        let factor = match f.kind {
            LadderKind::Raise => {
                out[f.mode] = n + 1;
                n + 1
            }
            LadderKind::Lower => {
                if n == 0 {
                    return None;
                }
                out[f.mode] = n - 1;
                n
            }
        };
        exact = exact.and_then(|p| p.checked_mul(factor as u128));
        amp *= T::from_u32(factor).unwrap().sqrt();
    }
    if let Some(p) = exact.and_then(T::from_u128) {
        amp = p.sqrt();
    }
    Some((out, term.coefficient * Complex::new(amp, T::zero())))
}

fn check_modes<T: Real>(expr: &OperatorExpression<T>, sector: &FockSector) -> Result<()> {
    let modes = sector.modes().len();
    for t in &expr.terms {
        if let Some(f) = t.factors.iter().find(|f| f.mode >= modes) {
            return Err(Error::UnknownMode {
                index: f.mode,
                modes,
            });
        }
    }
    Ok(())
}

/// Represents `expr` on `sector` using `a^dagger|n> = sqrt(n+1)|n+1>` and
/// `a|n> = sqrt(n)|n-1>`.
///
/// Every term must conserve every charge rule of the sector; otherwise a
/// [`Error::ChargeViolation`] naming the term is returned. On truncated
/// sectors, elements that would exceed a cutoff are dropped.
pub fn build_matrix<T: Real>(
    expr: &OperatorExpression<T>,
    sector: &FockSector,
) -> Result<SparseMatrix<T>> {
    check_modes(expr, sector)?;
    let modes = sector.modes().len();
    for t in &expr.terms {
        let shift = t.occupation_shift(modes);
        for (k, rule) in sector.rules().iter().enumerate() {
            let delta: i64 = rule
                .coefficients
                .iter()
                .zip(&shift)
                .map(|(c, s)| c * s)
                .sum();
            if delta != 0 {
                return Err(Error::ChargeViolation {
                    term: t.format(Some(sector.modes())),
                    rule: k,
                    delta,
                });
            }
        }
    }

    let mut triplets = Vec::new();
    for (col, occ) in sector.states().iter().enumerate() {
        for t in &expr.terms {
            if let Some((image, amp)) = apply_term(t, occ) {
                if let Some(row) = sector.position(&image) {
                    triplets.push((row, col, amp));
                }
            }
        }
    }
    Ok(SparseMatrix::from_triplets(sector.dim(), triplets))
}

/// Represents `expr` on `sector`, silently dropping every matrix element that
/// leaves the sector. Used for observables, where charge-violating parts have
/// zero expectation in any sector state.
pub fn compile_observable<T: Real>(
    expr: &OperatorExpression<T>,
    sector: &FockSector,
) -> Result<SparseMatrix<T>> {
    check_modes(expr, sector)?;
    let mut triplets = Vec::new();
    for (col, occ) in sector.states().iter().enumerate() {
        for t in &expr.terms {
            if let Some((image, amp)) = apply_term(t, occ) {
                if let Some(row) = sector.position(&image) {
                    triplets.push((row, col, amp));
                }
            }
        }
    }
    Ok(SparseMatrix::from_triplets(sector.dim(), triplets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::sector::{ChargeRule, ModeSet};

    type Op = OperatorExpression<f64>;

    fn fwm_sector(n1: i64, n2: i64, d: i64) -> FockSector {
        FockSector::enumerate(
            ModeSet::new(["a1", "am1", "a01", "a02"]).unwrap(),
            vec![
                ChargeRule::new(vec![1, 0, 1, 0], n1),
                ChargeRule::new(vec![0, 1, 0, 1], n2),
                ChargeRule::new(vec![1, -1, 0, 0], d),
            ],
        )
        .unwrap()
    }

    fn pair_term() -> Op {
        use super::super::operator::Ladder;
        Op::monomial(
            Complex::new(4.0, 0.0),
            vec![
                Ladder::raise(0),
                Ladder::raise(1),
                Ladder::lower(2),
                Ladder::lower(3),
            ],
        )
    }

    #[test]
    fn number_operator_is_diagonal() {
        let s = FockSector::enumerate(ModeSet::new(["a"]).unwrap(), vec![])
            .err()
            .unwrap();
        assert!(matches!(s, Error::SectorNotFinite(_)));
        let sector =
            FockSector::enumerate_truncated(ModeSet::new(["a"]).unwrap(), vec![], vec![3]).unwrap();
        let m = build_matrix(&Op::number(0), &sector).unwrap().to_dense();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { i as f64 } else { 0.0 };
                assert_eq!(m[(i, j)], Complex::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn pair_term_elements() {
        let (n1, n2) = (2i64, 2i64);
        let sector = fwm_sector(n1, n2, 0);
        let m = build_matrix(&(pair_term() + pair_term().adjoint()), &sector).unwrap();
        for k in 0..sector.dim() - 1 {
            let kf = k as f64;
            let expect = 4.0 * ((kf + 1.0).powi(2) * (n1 as f64 - kf) * (n2 as f64 - kf)).sqrt();
            assert!((m.get(k + 1, k).re - expect).abs() < 1e-12);
            assert!((m.get(k, k + 1).re - expect).abs() < 1e-12);
        }
        assert!(m.hermiticity_deviation() <= 1e-12);
        assert!(m.is_tridiagonal());
    }

    #[test]
    fn charge_violation_names_term() {
        let sector = fwm_sector(2, 2, 0);
        let err = build_matrix(&Op::create(0), &sector).unwrap_err();
        match err {
            Error::ChargeViolation { term, .. } => assert!(term.contains("a1")),
            other => panic!("unexpected {other:?}"),
        }
        let err = build_matrix(&Op::number(7), &sector).unwrap_err();
        assert_eq!(err, Error::UnknownMode { index: 7, modes: 4 });
    }

    #[test]
    fn triplets_merge_and_drop_zeros() {
        let c = |x: f64| Complex::new(x, 0.0);
        let m = SparseMatrix::from_triplets(
            2,
            vec![
                (0, 1, c(1.0)),
                (0, 1, c(2.0)),
                (1, 0, c(1.0)),
                (1, 0, c(-1.0)),
            ],
        );
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), c(3.0));
        assert_eq!(m.get(1, 0), c(0.0));
    }
}
