use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Complex;

use super::sector::ModeSet;
use crate::scalar::Real;

/// Creation (`Raise`) or annihilation (`Lower`) operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LadderKind {
    Raise,
    Lower,
}

/// One ladder operator acting on mode `mode`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ladder {
    pub kind: LadderKind,
    pub mode: usize,
}

impl Ladder {
    pub fn raise(mode: usize) -> Self {
        Ladder {
            kind: LadderKind::Raise,
            mode,
        }
    }

    pub fn lower(mode: usize) -> Self {
        Ladder {
            kind: LadderKind::Lower,
            mode,
        }
    }

    pub fn adjoint(self) -> Self {
        match self.kind {
            LadderKind::Raise => Ladder::lower(self.mode),
            LadderKind::Lower => Ladder::raise(self.mode),
        }
    }
}

/// Coefficient times an ordered product of ladder operators (leftmost acts last).
#[derive(Debug, Clone, PartialEq)]
pub struct Term<T: Real> {
    pub coefficient: Complex<T>,
    pub factors: Vec<Ladder>,
}

impl<T: Real> Term<T> {
    pub fn is_normal_ordered(&self) -> bool {
        let first_lower = self
            .factors
            .iter()
            .position(|f| f.kind == LadderKind::Lower)
            .unwrap_or(self.factors.len());
        self.factors[first_lower..]
            .iter()
            .all(|f| f.kind == LadderKind::Lower)
    }

    /// Net change of each mode's occupation produced by this term.
    pub fn occupation_shift(&self, modes: usize) -> Vec<i64> {
        let mut shift = vec![0i64; modes];
        for f in &self.factors {
            if f.mode < modes {
                shift[f.mode] += match f.kind {
                    LadderKind::Raise => 1,
                    LadderKind::Lower => -1,
                };
            }
        }
        shift
    }

    pub fn format(&self, modes: Option<&ModeSet>) -> String {
        let mut s = String::new();
        let c = self.coefficient;
        if c.im == T::zero() {
            let _ = write!(s, "{}", c.re);
        } else {
            let _ = write!(s, "({}{:+}i)", c.re, c.im);
        }
        for f in &self.factors {
            let name = match modes {
                Some(m) if f.mode < m.len() => m.label(f.mode).to_string(),
                _ => format!("m{}", f.mode),
            };
            s.push(' ');
            s.push_str(&name);
            if f.kind == LadderKind::Raise {
                s.push('\u{2020}');
            }
        }
        s
    }
}

/// Sum of bosonic ladder monomials with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorExpression<T: Real> {
    pub terms: Vec<Term<T>>,
}

impl<T: Real> Default for OperatorExpression<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Real> OperatorExpression<T> {
    pub fn zero() -> Self {
        OperatorExpression { terms: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::monomial(Complex::new(c, T::zero()), vec![])
    }

    pub fn monomial(coefficient: Complex<T>, factors: Vec<Ladder>) -> Self {
        OperatorExpression {
            terms: vec![Term {
                coefficient,
                factors,
            }],
        }
    }

    pub fn create(mode: usize) -> Self {
        Self::monomial(Complex::new(T::one(), T::zero()), vec![Ladder::raise(mode)])
    }

    pub fn annihilate(mode: usize) -> Self {
        Self::monomial(Complex::new(T::one(), T::zero()), vec![Ladder::lower(mode)])
    }

    /// `a_i^dagger a_i`
    pub fn number(mode: usize) -> Self {
        Self::monomial(
            Complex::new(T::one(), T::zero()),
            vec![Ladder::raise(mode), Ladder::lower(mode)],
        )
    }

    pub fn scale(mut self, c: Complex<T>) -> Self {
        for t in &mut self.terms {
            t.coefficient *= c;
        }
        self
    }

    pub fn scale_real(self, c: T) -> Self {
        self.scale(Complex::new(c, T::zero()))
    }

    /// Hermitian adjoint: conjugate coefficients and reverse-adjoint factors.
    pub fn adjoint(&self) -> Self {
        OperatorExpression {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coefficient: t.coefficient.conj(),
                    factors: t.factors.iter().rev().map(|f| f.adjoint()).collect(),
                })
                .collect(),
        }
    }

    /// Largest mode index referenced plus one.
    pub fn mode_extent(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|t| t.factors.iter().map(|f| f.mode + 1))
            .max()
            .unwrap_or(0)
    }

    pub fn is_normal_ordered(&self) -> bool {
        self.terms.iter().all(Term::is_normal_ordered)
    }

    /// Normal-ordered equivalent using `[a_i, a_j^dagger] = delta_ij`.
    ///
    /// Creation operators are sorted by mode and precede annihilation
    /// operators, also sorted by mode; equal monomials are merged and zero
    /// coefficients dropped. The output is idempotent under this map.
    pub fn canonicalize(&self) -> Self {
        let mut done: BTreeMap<Vec<Ladder>, Complex<T>> = BTreeMap::new();
        let mut work: Vec<(Complex<T>, Vec<Ladder>)> = self
            .terms
            .iter()
            .map(|t| (t.coefficient, t.factors.clone()))
            .collect();

        while let Some((c, mut f)) = work.pop() {
            // first adjacent (Lower, Raise) pair
            let swap_at = (0..f.len().saturating_sub(1))
                .find(|&i| f[i].kind == LadderKind::Lower && f[i + 1].kind == LadderKind::Raise);
            match swap_at {
                None => {
                    // within each block the operators commute, so sort by mode
                    f.sort();
                    *done.entry(f).or_default() += c;
                }
                Some(i) => {
                    if f[i].mode == f[i + 1].mode {
                        // a a^dagger = a^dagger a + 1
                        let mut contracted = f.clone();
                        contracted.drain(i..i + 2);
                        work.push((c, contracted));
                    }
                    f.swap(i, i + 1);
                    work.push((c, f));
                }
            }
        }

        OperatorExpression {
            terms: done
                .into_iter()
                .filter(|(_, c)| c.re != T::zero() || c.im != T::zero())
                .map(|(factors, coefficient)| Term {
                    coefficient,
                    factors,
                })
                .collect(),
        }
    }

    pub fn format(&self, modes: Option<&ModeSet>) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|t| t.format(modes))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl<T: Real> Add for OperatorExpression<T> {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self.terms.extend(rhs.terms);
        self
    }
}

impl<T: Real> Neg for OperatorExpression<T> {
    type Output = Self;

    fn neg(self) -> Self {
        self.scale_real(-T::one())
    }
}

impl<T: Real> Sub for OperatorExpression<T> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

/// Operator product (not normal-ordered; call `canonicalize`).
impl<T: Real> Mul for OperatorExpression<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for l in &self.terms {
            for r in &rhs.terms {
                let mut factors = l.factors.clone();
                factors.extend_from_slice(&r.factors);
                terms.push(Term {
                    coefficient: l.coefficient * r.coefficient,
                    factors,
                });
            }
        }
        OperatorExpression { terms }
    }
}

impl<T: Real> Mul<&OperatorExpression<T>> for &OperatorExpression<T> {
    type Output = OperatorExpression<T>;

    fn mul(self, rhs: &OperatorExpression<T>) -> OperatorExpression<T> {
        self.clone() * rhs.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Op = OperatorExpression<f64>;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    fn coeff_of(e: &Op, factors: &[Ladder]) -> Complex<f64> {
        e.terms
            .iter()
            .find(|t| t.factors == factors)
            .map(|t| t.coefficient)
            .unwrap_or_default()
    }

    #[test]
    fn single_commutator() {
        let e = (Op::annihilate(0) * Op::create(0)).canonicalize();
        assert_eq!(e.terms.len(), 2);
        assert_eq!(coeff_of(&e, &[Ladder::raise(0), Ladder::lower(0)]), c(1.0));
        assert_eq!(coeff_of(&e, &[]), c(1.0));
    }

    #[test]
    fn already_ordered_is_unchanged() {
        let e = Op::number(0);
        assert_eq!(e.canonicalize(), e);
    }

    #[test]
    fn four_factor_product() {
        // a a† a a† = a†a†aa + 3 a†a + 1
        let a = Op::annihilate(0);
        let ad = Op::create(0);
        let e = (a.clone() * ad.clone() * a * ad).canonicalize();
        let (r, l) = (Ladder::raise(0), Ladder::lower(0));
        assert_eq!(e.terms.len(), 3);
        assert_eq!(coeff_of(&e, &[r, r, l, l]), c(1.0));
        assert_eq!(coeff_of(&e, &[r, l]), c(3.0));
        assert_eq!(coeff_of(&e, &[]), c(1.0));
    }

    #[test]
    fn distinct_modes_commute_and_cancel() {
        let ab = Op::annihilate(0) * Op::create(1);
        let ba = Op::create(1) * Op::annihilate(0);
        assert!((ab - ba).canonicalize().terms.is_empty());
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let e = Op::annihilate(1) * Op::create(0) * Op::create(1) * Op::annihilate(0)
            + Op::annihilate(0).scale(Complex::new(0.5, -2.0)) * Op::create(0);
        let once = e.canonicalize();
        assert!(once.is_normal_ordered());
        assert_eq!(once.canonicalize(), once);
    }

    #[test]
    fn adjoint_reverses() {
        let e = Op::monomial(
            Complex::new(1.0, 2.0),
            vec![Ladder::raise(0), Ladder::lower(1)],
        );
        let d = e.adjoint();
        assert_eq!(d.terms[0].coefficient, Complex::new(1.0, -2.0));
        assert_eq!(d.terms[0].factors, vec![Ladder::raise(1), Ladder::lower(0)]);
    }

    #[test]
    fn format_uses_labels() {
        let modes = ModeSet::new(["a", "b"]).unwrap();
        let e = Op::monomial(c(4.0), vec![Ladder::raise(0), Ladder::lower(1)]);
        assert_eq!(e.format(Some(&modes)), "4 a\u{2020} b");
    }
}
