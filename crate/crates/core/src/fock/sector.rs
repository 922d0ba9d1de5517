use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Occupation numbers, one per mode.
pub type Occupation = Vec<u32>;

/// Labeled bosonic modes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSet {
    labels: Vec<String>,
}

impl ModeSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::ModeSet("at least one mode is required".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() {
                return Err(Error::ModeSet(format!("mode {i} has an empty label")));
            }
            if labels[..i].contains(l) {
                return Err(Error::ModeSet(format!("duplicate label `{l}`")));
            }
        }
        Ok(ModeSet { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::ModeSet(format!("unknown mode `{label}`")))
    }
}

/// Linear conserved charge: a tuple is admitted iff `sum(coefficients[i] * n[i]) == value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChargeRule {
    pub coefficients: Vec<i64>,
    pub value: i64,
}

impl ChargeRule {
    pub fn new(coefficients: Vec<i64>, value: i64) -> Self {
        ChargeRule {
            coefficients,
            value,
        }
    }

    /// Total number of quanta equals `value`.
    pub fn total(modes: usize, value: i64) -> Self {
        ChargeRule::new(vec![1; modes], value)
    }

    pub fn charge(&self, occupation: &[u32]) -> i64 {
        self.coefficients
            .iter()
            .zip(occupation)
            .map(|(&c, &n)| c * n as i64)
            .sum()
    }

    pub fn admits(&self, occupation: &[u32]) -> bool {
        self.charge(occupation) == self.value
    }
}

impl fmt::Display for ChargeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}.n = {}", self.coefficients, self.value)
    }
}

/// Occupation-number basis restricted by conserved charges (and optional
/// per-mode cutoffs), in lexicographic order.
#[derive(Debug, Clone)]
pub struct FockSector {
    modes: ModeSet,
    rules: Vec<ChargeRule>,
    cutoffs: Option<Vec<u32>>,
    states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
}

impl FockSector {
    /// Enumerates every tuple admitted by `rules`. The rules alone must bound
    /// every mode.
    pub fn enumerate(modes: ModeSet, rules: Vec<ChargeRule>) -> Result<Self> {
        Self::build(modes, rules, None)
    }

    /// Like [`FockSector::enumerate`] but additionally caps each mode at
    /// `cutoffs[i]` quanta. Matrix elements leading past a cutoff are dropped
    /// when operators are represented on a truncated sector.
    pub fn enumerate_truncated(
        modes: ModeSet,
        rules: Vec<ChargeRule>,
        cutoffs: Vec<u32>,
    ) -> Result<Self> {
        if cutoffs.len() != modes.len() {
            return Err(Error::DimensionMismatch {
                expected: modes.len(),
                found: cutoffs.len(),
            });
        }
        Self::build(modes, rules, Some(cutoffs))
    }

    fn build(modes: ModeSet, rules: Vec<ChargeRule>, cutoffs: Option<Vec<u32>>) -> Result<Self> {
        let m = modes.len();
        for r in &rules {
            if r.coefficients.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: r.coefficients.len(),
                });
            }
        }
        let bounds = occupation_bounds(&modes, &rules, cutoffs.as_deref())?;

        let mut states = Vec::new();
        let mut current = vec![0u32; m];
        let mut partial = vec![0i64; rules.len()];
        enumerate_rec(&rules, &bounds, 0, &mut current, &mut partial, &mut states);
        if states.is_empty() {
            return Err(Error::EmptySector);
        }
        let index = states
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        Ok(FockSector {
            modes,
            rules,
            cutoffs,
            states,
            index,
        })
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn rules(&self) -> &[ChargeRule] {
        &self.rules
    }

    pub fn cutoffs(&self) -> Option<&[u32]> {
        self.cutoffs.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &[u32] {
        &self.states[i]
    }

    pub fn position(&self, occupation: &[u32]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// Whether `occupation` satisfies every charge rule (cutoffs ignored).
    pub fn satisfies_charges(&self, occupation: &[u32]) -> bool {
        self.rules.iter().all(|r| r.admits(occupation))
    }
}

fn occupation_bounds(
    modes: &ModeSet,
    rules: &[ChargeRule],
    cutoffs: Option<&[u32]>,
) -> Result<Vec<i64>> {
    let m = modes.len();
    let mut upper: Vec<Option<i64>> = match cutoffs {
        Some(c) => c.iter().map(|&c| Some(c as i64)).collect(),
        None => vec![None; m],
    };
    // Propagate bounds to a fixed point. With c_i > 0, n_i <= (value - min rest)/c_i
    // where the minimum of the rest needs only its negative-coefficient modes
    // bounded; symmetrically for c_i < 0.
    loop {
        let mut changed = false;
        for r in rules {
            for i in 0..m {
                let ci = r.coefficients[i];
                if ci == 0 {
                    continue;
                }
                let mut extreme = 0i64;
                let mut ok = true;
                for (j, &cj) in r.coefficients.iter().enumerate() {
                    if j == i || cj == 0 || (cj > 0) == (ci > 0) {
                        continue;
                    }
                    match upper[j] {
                        Some(u) => extreme += cj.abs() * u,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let bound = if ci > 0 {
                    (r.value + extreme).div_euclid(ci)
                } else {
                    (extreme - r.value).div_euclid(-ci)
                };
                let bound = bound.max(-1);
                if upper[i].is_none_or(|u| bound < u) {
                    upper[i] = Some(bound);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    upper
        .iter()
        .enumerate()
        .map(|(i, u)| u.ok_or_else(|| Error::SectorNotFinite(modes.label(i).to_string())))
        .collect::<Result<Vec<_>>>()
        .and_then(|b| {
            if b.iter().any(|&u| u < 0) {
                Err(Error::EmptySector)
            } else {
                Ok(b)
            }
        })
}

fn enumerate_rec(
    rules: &[ChargeRule],
    bounds: &[i64],
    mode: usize,
    current: &mut Vec<u32>,
    partial: &mut Vec<i64>,
    out: &mut Vec<Occupation>,
) {
    let m = bounds.len();
    if mode == m {
        if rules.iter().zip(partial.iter()).all(|(r, &p)| p == r.value) {
            out.push(current.clone());
        }
        return;
    }
    for n in 0..=bounds[mode] {
        current[mode] = n as u32;
        for (r, p) in rules.iter().zip(partial.iter_mut()) {
            *p += r.coefficients[mode] * n;
        }
        let feasible = rules.iter().zip(partial.iter()).all(|(r, &p)| {
            let (mut lo, mut hi) = (p, p);
            for (&cj, &bj) in r.coefficients[mode + 1..m].iter().zip(&bounds[mode + 1..m]) {
                let c = cj * bj;
                if c > 0 {
                    hi += c;
                } else {
                    lo += c;
                }
            }
            lo <= r.value && r.value <= hi
        });
        if feasible {
            enumerate_rec(rules, bounds, mode + 1, current, partial, out);
        }
        for (r, p) in rules.iter().zip(partial.iter_mut()) {
            *p -= r.coefficients[mode] * n;
        }
    }
    current[mode] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fwm_modes() -> ModeSet {
        ModeSet::new(["a1", "am1", "a01", "a02"]).unwrap()
    }

    fn fwm_rules(n1: i64, n2: i64, d: i64) -> Vec<ChargeRule> {
        vec![
            ChargeRule::new(vec![1, 0, 1, 0], n1),
            ChargeRule::new(vec![0, 1, 0, 1], n2),
            ChargeRule::new(vec![1, -1, 0, 0], d),
        ]
    }

    #[test]
    fn small_fwm_sector_matches_brute_force() {
        let s = FockSector::enumerate(fwm_modes(), fwm_rules(2, 2, 0)).unwrap();
        assert_eq!(
            s.states(),
            &[vec![0, 0, 2, 2], vec![1, 1, 1, 1], vec![2, 2, 0, 0]]
        );
        // brute force over all tuples with entries <= 2
        let mut brute = Vec::new();
        for a in 0..=2u32 {
            for b in 0..=2 {
                for c in 0..=2 {
                    for d in 0..=2 {
                        let t = vec![a, b, c, d];
                        if fwm_rules(2, 2, 0).iter().all(|r| r.admits(&t)) {
                            brute.push(t);
                        }
                    }
                }
            }
        }
        assert_eq!(s.states(), brute.as_slice());
    }

    #[test]
    fn zero_total_is_vacuum() {
        let modes = ModeSet::new(["x", "y", "z"]).unwrap();
        let s = FockSector::enumerate(modes, vec![ChargeRule::total(3, 0)]).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.state(0), &[0, 0, 0]);
    }

    #[test]
    fn large_sector_dimension() {
        let s = FockSector::enumerate(fwm_modes(), fwm_rules(50, 50, 5)).unwrap();
        assert_eq!(s.dim(), 46);
        for (i, st) in s.states().iter().enumerate() {
            assert_eq!(s.position(st), Some(i));
        }
    }

    #[test]
    fn unbounded_and_contradictory_rules() {
        let modes = ModeSet::new(["a", "b"]).unwrap();
        let err = FockSector::enumerate(modes.clone(), vec![ChargeRule::new(vec![1, -1], 0)])
            .unwrap_err();
        assert!(matches!(err, Error::SectorNotFinite(_)));
        let err = FockSector::enumerate(
            modes.clone(),
            vec![ChargeRule::total(2, 2), ChargeRule::total(2, 3)],
        )
        .unwrap_err();
        assert_eq!(err, Error::EmptySector);
        let err = FockSector::enumerate(modes, vec![ChargeRule::new(vec![1, 1], -1)]).unwrap_err();
        assert_eq!(err, Error::EmptySector);
    }

    #[test]
    fn truncation_bounds_open_rules() {
        let modes = ModeSet::new(["a", "cp", "cm"]).unwrap();
        let s = FockSector::enumerate_truncated(
            modes,
            vec![ChargeRule::new(vec![1, 1, -1], 0)],
            vec![3, 3, 3],
        )
        .unwrap();
        // n_a + n_p = n_m <= 3
        assert_eq!(s.dim(), 1 + 2 + 3 + 4);
        let mut sorted = s.states().to_vec();
        sorted.sort();
        assert_eq!(sorted, s.states());
    }

    #[test]
    fn mode_set_validation() {
        assert!(ModeSet::new(Vec::<String>::new()).is_err());
        assert!(ModeSet::new(["a", "a"]).is_err());
        let m = ModeSet::new(["a", "b"]).unwrap();
        assert_eq!(m.index_of("b").unwrap(), 1);
        assert!(m.index_of("c").is_err());
    }
}
