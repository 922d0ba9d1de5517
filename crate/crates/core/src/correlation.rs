//! Equal-time intensity correlations and Cauchy-Schwartz margins.
//!
//! For modes `i`, `j` with intensities `I_i = <a_i^dagger a_i>`:
//!
//! * `g2_i  = <a_i^dagger a_i^dagger a_i a_i> / I_i^2`
//! * `g2_ij = <a_i^dagger a_j^dagger a_j a_i> / (I_i I_j)`
//! * classical margin `r_ij = g2_ij / sqrt(g2_i g2_j)` (classical fields have `r <= 1`)
//! * quantum margin `q_ij = g2_ij / sqrt((g2_i + 1/I_i)(g2_j + 1/I_j))` (always `q <= 1`)
//!
//! Entries whose intensities fall below the threshold are `None` rather than
//! a fabricated number.

use crate::scalar::Real;

/// Correlation of one ordered mode pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCorrelation<T: Real> {
    pub modes: (usize, usize),
    pub g2: Option<T>,
    pub classical: Option<T>,
    pub quantum: Option<T>,
}

/// Correlations of a set of modes at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSnapshot<T: Real> {
    pub intensities: Vec<T>,
    pub g2: Vec<Option<T>>,
    pub pairs: Vec<PairCorrelation<T>>,
}

impl<T: Real> CorrelationSnapshot<T> {
    /// Builds the snapshot from raw moments.
    ///
    /// `self_moment(i)` returns `<a_i^dagger a_i^dagger a_i a_i>` and
    /// `pair_moment(i, j)` returns `<a_i^dagger a_j^dagger a_j a_i>`. All
    /// unordered pairs `i < j` are evaluated in lexicographic order.
    pub fn from_moments(
        intensities: Vec<T>,
        self_moment: impl Fn(usize) -> T,
        pair_moment: impl Fn(usize, usize) -> T,
        threshold: T,
    ) -> Self {
        let n = intensities.len();
        let defined: Vec<bool> = intensities.iter().map(|&i| i >= threshold).collect();
        let g2: Vec<Option<T>> = (0..n)
            .map(|i| defined[i].then(|| self_moment(i) / (intensities[i] * intensities[i])))
            .collect();
        let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                let mut p = PairCorrelation {
                    modes: (i, j),
                    g2: None,
                    classical: None,
                    quantum: None,
                };
                if defined[i] && defined[j] {
                    let gij = pair_moment(i, j) / (intensities[i] * intensities[j]);
                    p.g2 = Some(gij);
                    let (gi, gj) = (g2[i].unwrap(), g2[j].unwrap());
                    let classical = gi * gj;
                    if classical > T::zero() {
                        p.classical = Some(gij / classical.sqrt());
                    }
                    let quantum =
                        (gi + T::one() / intensities[i]) * (gj + T::one() / intensities[j]);
                    if quantum > T::zero() {
                        p.quantum = Some(gij / quantum.sqrt());
                    }
                }
                pairs.push(p);
            }
        }
        CorrelationSnapshot {
            intensities,
            g2,
            pairs,
        }
    }

    pub fn pair(&self, i: usize, j: usize) -> Option<&PairCorrelation<T>> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.pairs.iter().find(|p| p.modes == key)
    }

    /// Classical Cauchy-Schwartz bound `sqrt(g2_i g2_j)` for a pair.
    pub fn classical_bound(&self, i: usize, j: usize) -> Option<T> {
        Some((self.g2[i]? * self.g2[j]?).sqrt())
    }

    /// Quantum bound `sqrt((g2_i + 1/I_i)(g2_j + 1/I_j))` for a pair.
    pub fn quantum_bound(&self, i: usize, j: usize) -> Option<T> {
        let bi = self.g2[i]? + T::one() / self.intensities[i];
        let bj = self.g2[j]? + T::one() / self.intensities[j];
        Some((bi * bj).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_state_values() {
        // |5> in mode 0, |0> in mode 1
        let s = CorrelationSnapshot::from_moments(
            vec![5.0, 0.0],
            |i| if i == 0 { 20.0 } else { 0.0 },
            |_, _| 0.0,
            1e-8,
        );
        assert!((s.g2[0].unwrap() - 0.8_f64).abs() < 1e-15);
        assert_eq!(s.g2[1], None);
        assert_eq!(s.pair(1, 0).unwrap().g2, None);
    }

    #[test]
    fn coherent_product_is_uncorrelated() {
        let s = CorrelationSnapshot::from_moments(
            vec![4.0, 9.0],
            |i| [16.0, 81.0][i],
            |_, _| 36.0,
            1e-8,
        );
        let p = s.pair(0, 1).unwrap();
        assert_eq!(p.g2, Some(1.0));
        assert_eq!(p.classical, Some(1.0));
        assert!(p.quantum.unwrap() < 1.0);
    }
}
