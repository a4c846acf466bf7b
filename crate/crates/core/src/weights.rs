//! Bayesian multiplicative weights over a finite search space.
//!
//! Weights are stored normalized, with the log2 of the true (unnormalized)
//! total mass tracked on the side. Raw weights underflow a double after a
//! few thousand updates, while every bound on absolute mass can be checked
//! through [`WeightState::absolute_log2_weight`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::{Distribution, NoiseParams};

/// Floor applied to zero (or vanishing) prior masses so that no element is
/// permanently excluded by multiplicative updates.
pub const MASS_FLOOR: f64 = 1e-12;

/// Slack of the heavy test: a weight this close below the threshold is a tie
/// lost to renormalization rounding and counts as reaching it.
pub const HEAVY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightState {
    relative: Vec<f64>,
    log2_total: f64,
    step: u64,
}

/// Elements whose weight is scaled by `1 - p` after an answer; every other
/// element is scaled by `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibleSet {
    mask: Vec<bool>,
    len: usize,
}

impl CompatibleSet {
    pub fn empty(universe: usize) -> Self {
        CompatibleSet {
            mask: vec![false; universe],
            len: 0,
        }
    }

    pub fn full(universe: usize) -> Self {
        CompatibleSet {
            mask: vec![true; universe],
            len: universe,
        }
    }

    pub fn singleton(universe: usize, v: usize) -> Self {
        let mut set = Self::empty(universe);
        set.insert(v);
        set
    }

    /// Everything except `v`.
    pub fn all_but(universe: usize, v: usize) -> Self {
        let mut set = Self::full(universe);
        set.mask[v] = false;
        set.len -= 1;
        set
    }

    pub fn from_members(universe: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = Self::empty(universe);
        for v in members {
            if v >= universe {
                return Err(Error::domain(format!(
                    "element {v} outside a universe of {universe}"
                )));
            }
            set.insert(v);
        }
        Ok(set)
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        let len = mask.iter().filter(|&&m| m).count();
        CompatibleSet { mask, len }
    }

    fn insert(&mut self, v: usize) {
        if !self.mask[v] {
            self.mask[v] = true;
            self.len += 1;
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.mask[v]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(v, _)| v)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
}

impl WeightState {
    /// Uniform weights `1/n` with total mass one.
    pub fn init_uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("cannot weight an empty search space"));
        }
        Ok(WeightState {
            relative: vec![1.0 / n as f64; n],
            log2_total: 0.0,
            step: 0,
        })
    }

    /// Prior weights from `mu`, with masses below [`MASS_FLOOR`] raised to it.
    pub fn init_from_distribution(mu: &Distribution) -> Result<Self> {
        if mu.masses().iter().all(|&m| m <= 0.0) {
            return Err(Error::domain("distribution has no positive mass"));
        }
        let floored: Vec<f64> = mu.masses().iter().map(|&m| m.max(MASS_FLOOR)).collect();
        let total: f64 = floored.iter().sum();
        Ok(WeightState {
            relative: floored.into_iter().map(|m| m / total).collect(),
            log2_total: 0.0,
            step: 0,
        })
    }

    /// Builds a state from arbitrary positive weights; the total mass becomes
    /// `2^log2_total`.
    pub fn from_relative(weights: Vec<f64>, log2_total: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::domain("cannot weight an empty search space"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::domain("weights must be positive and finite"));
        }
        let total: f64 = weights.iter().sum();
        Ok(WeightState {
            relative: weights.into_iter().map(|w| w / total).collect(),
            log2_total,
            step: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.relative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relative.is_empty()
    }

    pub fn relative(&self) -> &[f64] {
        &self.relative
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.relative[v]
    }

    pub fn log2_total(&self) -> f64 {
        self.log2_total
    }

    /// Number of answers applied so far.
    pub fn step(&self) -> u64 {
        self.step
    }

    /// Multiplies each weight by its likelihood `factor(v)`, renormalizes, and
    /// advances the step counter. Factors must be positive.
    pub fn apply_likelihoods(&mut self, mut factor: impl FnMut(usize) -> f64) {
        let mut total = 0.0;
        for (v, w) in self.relative.iter_mut().enumerate() {
            *w *= factor(v);
            total += *w;
        }
        debug_assert!(total > 0.0 && total.is_finite());
        for w in self.relative.iter_mut() {
            *w = (*w / total).max(f64::MIN_POSITIVE);
        }
        self.log2_total += total.log2();
        self.step += 1;
    }

    /// One Bayesian update: members of `compatible` are scaled by `1 - p`,
    /// all other elements by `p`.
    pub fn bayesian_update(&mut self, compatible: &CompatibleSet, noise: &NoiseParams) {
        assert_eq!(compatible.universe(), self.len(), "compatible set over a different universe");
        let (hit, miss) = (1.0 - noise.p(), noise.p());
        let mask = compatible.mask();
        self.apply_likelihoods(|v| if mask[v] { hit } else { miss });
    }

    /// Element of maximal weight; ties go to the smallest id.
    pub fn heaviest(&self) -> usize {
        let mut best = 0;
        for (v, &w) in self.relative.iter().enumerate().skip(1) {
            if w > self.relative[best] {
                best = v;
            }
        }
        best
    }

    /// Whether `v` holds at least a `c` fraction of the total weight, up to
    /// [`HEAVY_TOLERANCE`].
    pub fn is_heavy(&self, v: usize, c: f64) -> bool {
        self.relative[v] >= c - HEAVY_TOLERANCE
    }

    /// Relative mass of a subset.
    pub fn mass<I: IntoIterator<Item = usize>>(&self, subset: I) -> f64 {
        subset.into_iter().map(|v| self.relative[v]).sum()
    }

    /// Relative mass of everything except `v`, summed directly so that it
    /// stays accurate when `v` holds almost all of the weight.
    pub fn mass_excluding(&self, v: usize) -> f64 {
        self.relative
            .iter()
            .enumerate()
            .filter(|&(u, _)| u != v)
            .map(|(_, w)| w)
            .sum()
    }

    /// log2 of the absolute (unnormalized) weight of `subset`.
    pub fn absolute_log2_weight<I: IntoIterator<Item = usize>>(&self, subset: I) -> Result<f64> {
        let mut any = false;
        let mut mass = 0.0;
        for v in subset {
            any = true;
            mass += self.relative[v];
        }
        if !any {
            return Err(Error::domain("absolute weight of an empty subset"));
        }
        Ok(mass.log2() + self.log2_total)
    }

    /// log2 of the absolute weight of everything except `v` (negative
    /// infinity when `v` is the only element).
    pub fn absolute_log2_weight_excluding(&self, v: usize) -> f64 {
        self.mass_excluding(v).log2() + self.log2_total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn noise(p: f64) -> NoiseParams {
        NoiseParams::new(p).unwrap()
    }

    #[test]
    fn uniform_initialization() {
        let s = WeightState::init_uniform(4).unwrap();
        assert_eq!(s.relative(), &[0.25; 4]);
        assert_eq!(s.log2_total(), 0.0);
        assert_eq!(s.step(), 0);
        assert_eq!(WeightState::init_uniform(1).unwrap().relative(), &[1.0]);
        let s = WeightState::init_uniform(3).unwrap();
        assert!(s.relative().iter().all(|w| (w - 1.0 / 3.0).abs() < 1e-12));
        assert!(WeightState::init_uniform(0).is_err());
    }

    #[test]
    fn distribution_initialization() {
        let d = Distribution::new(vec![0.5, 0.25, 0.25]).unwrap();
        let s = WeightState::init_from_distribution(&d).unwrap();
        assert_eq!(s.relative(), &[0.5, 0.25, 0.25]);

        let point = Distribution::new(vec![1.0, 0.0]).unwrap();
        let s = WeightState::init_from_distribution(&point).unwrap();
        let eta = MASS_FLOOR;
        assert!((s.weight(0) - (1.0 - eta)).abs() < 1e-15);
        assert!((s.weight(1) - eta).abs() < 1e-20);
        assert!((s.relative().iter().sum::<f64>() - 1.0).abs() < 1e-15);

        let u = Distribution::uniform(5).unwrap();
        assert_eq!(
            WeightState::init_from_distribution(&u).unwrap(),
            WeightState::init_uniform(5).unwrap()
        );
    }

    #[test]
    fn bayesian_update_examples() {
        let n = noise(0.25);
        let mut s = WeightState::init_uniform(4).unwrap();
        s.bayesian_update(&CompatibleSet::from_members(4, [0, 1]).unwrap(), &n);
        let expect = [0.375, 0.375, 0.125, 0.125];
        for (w, e) in s.relative().iter().zip(expect) {
            assert!((w - e).abs() < 1e-15);
        }
        assert_eq!(s.step(), 1);

        let mut s = WeightState::init_uniform(4).unwrap();
        s.bayesian_update(&CompatibleSet::full(4), &n);
        assert_eq!(s.relative(), &[0.25; 4]);
        assert!((s.log2_total() - 0.75f64.log2()).abs() < 1e-15);

        let mut s = WeightState::init_uniform(4).unwrap();
        s.bayesian_update(&CompatibleSet::empty(4), &n);
        assert_eq!(s.relative(), &[0.25; 4]);
        assert!((s.log2_total() - 0.25f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn heaviest_and_heavy() {
        let s = WeightState::from_relative(vec![0.1, 0.7, 0.2], 0.0).unwrap();
        assert_eq!(s.heaviest(), 1);
        assert_eq!(WeightState::init_uniform(5).unwrap().heaviest(), 0);
        let s = WeightState::from_relative(vec![0.4, 0.4, 0.2], 0.0).unwrap();
        assert_eq!(s.heaviest(), 0);

        let s = WeightState::from_relative(vec![0.6, 0.4], 0.0).unwrap();
        assert!(s.is_heavy(0, 0.5));
        let s = WeightState::from_relative(vec![0.5, 0.5], 0.0).unwrap();
        assert!(s.is_heavy(0, 0.5));
        let s = WeightState::from_relative(vec![0.3, 0.7], 0.0).unwrap();
        assert!(!s.is_heavy(0, 0.5));
        // renormalization can leave an exact tie one ulp short
        let s = WeightState::from_relative(vec![0.49999999999999994, 0.5], 0.0).unwrap();
        assert!(s.is_heavy(0, 0.5) && s.is_heavy(1, 0.5));
    }

    #[test]
    fn absolute_weights() {
        let n = noise(0.3);
        let mut s = WeightState::init_uniform(6).unwrap();
        assert!(s.absolute_log2_weight(0..6).unwrap().abs() < 1e-12);
        s.bayesian_update(&CompatibleSet::full(6), &n);
        assert!((s.absolute_log2_weight(0..6).unwrap() - 0.7f64.log2()).abs() < 1e-12);
        let single = s.absolute_log2_weight([2]).unwrap();
        assert!((single - (s.weight(2).log2() + s.log2_total())).abs() < 1e-15);
        assert!(s.absolute_log2_weight(std::iter::empty()).is_err());
        assert_eq!(
            WeightState::init_uniform(1).unwrap().absolute_log2_weight_excluding(0),
            f64::NEG_INFINITY
        );
    }

    /// Exact posterior by enumerating every target and every error pattern.
    fn brute_posterior(prior: &[f64], answers: &[CompatibleSet], p: f64) -> Vec<f64> {
        let k = answers.len();
        let mut post = vec![0.0; prior.len()];
        for (v, &mass) in prior.iter().enumerate() {
            for pattern in 0u32..(1 << k) {
                let mut prob = 1.0;
                let mut consistent = true;
                for (i, ans) in answers.iter().enumerate() {
                    let lie = pattern >> i & 1 == 1;
                    prob *= if lie { p } else { 1.0 - p };
                    // a truthful answer must be compatible with the target, a lie must not
                    if ans.contains(v) == lie {
                        consistent = false;
                        break;
                    }
                }
                if consistent {
                    post[v] += mass * prob;
                }
            }
        }
        let total: f64 = post.iter().sum();
        post.iter().map(|x| x / total).collect()
    }

    proptest! {
        #[test]
        fn matches_brute_force_posterior(
            prior in prop::collection::vec(0.05f64..1.0, 2..=6),
            answers in prop::collection::vec(prop::collection::vec(any::<bool>(), 6), 0..=8),
            p in 0.01f64..0.49,
        ) {
            let n = prior.len();
            let sets: Vec<_> = answers
                .iter()
                .map(|mask| CompatibleSet::from_mask(mask[..n].to_vec()))
                .collect();
            let noise = NoiseParams::new(p).unwrap();
            let mut s = WeightState::from_relative(prior.clone(), 0.0).unwrap();
            for set in &sets {
                s.bayesian_update(set, &noise);
            }
            let total: f64 = prior.iter().sum();
            let normalized: Vec<f64> = prior.iter().map(|x| x / total).collect();
            let exact = brute_posterior(&normalized, &sets, p);
            for (a, b) in s.relative().iter().zip(&exact) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn update_preserves_ratios_and_mass_bounds(
            weights in prop::collection::vec(0.01f64..1.0, 2..40),
            mask_seed in prop::collection::vec(any::<bool>(), 40),
            p in 0.01f64..0.49,
        ) {
            let n = weights.len();
            let set = CompatibleSet::from_mask(mask_seed[..n].to_vec());
            let noise = NoiseParams::new(p).unwrap();
            let mut s = WeightState::from_relative(weights, 0.0).unwrap();
            let before = s.clone();
            s.bayesian_update(&set, &noise);
            prop_assert!((s.relative().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(s.relative().iter().all(|&w| w > 0.0));
            let delta = s.log2_total() - before.log2_total();
            prop_assert!(delta >= p.log2() - 1e-12 && delta <= (1.0 - p).log2() + 1e-12);
            for u in 0..n {
                for v in 0..n {
                    if set.contains(u) == set.contains(v) {
                        let r0 = before.weight(u) / before.weight(v);
                        let r1 = s.weight(u) / s.weight(v);
                        prop_assert!((r1 / r0 - 1.0).abs() < 1e-9);
                    }
                }
            }
        }
    }
}
