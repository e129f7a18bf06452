//! Synthetic dueling-bandit environments: instance generation, preference
//! feedback under the Bradley-Terry-Luce model, and regret accounting.

use std::collections::HashSet;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primitives::{
    preference_probability, reward, ArmSet, FeatureVector, ParamVector, Preference,
};
use crate::rng::seeded;

/// How arm features are scaled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureConvention {
    /// Entries in {−1, +1}, norm √d.
    RawPm1,
    /// The same sign vectors divided by √d, so ‖φ‖₂ = 1.
    UnitNormalized,
}

/// Whether the action set stays fixed for the whole run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArmSchedule {
    #[default]
    Fixed,
    ResamplePerRound,
}

/// Draws `k` pairwise-distinct sign vectors of length `d`.
///
/// Rejection sampling with a seen-set, except when `k` is at least half of
/// `2^d`; then all sign vectors are enumerated and shuffled.
pub fn sample_arm_set<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    k: usize,
    convention: FeatureConvention,
) -> Result<ArmSet> {
    if d == 0 || k == 0 {
        return Err(Error::InvalidConfig("d and K must be positive".into()));
    }
    let capacity = if d < 64 { Some(1u64 << d) } else { None };
    if let Some(cap) = capacity {
        if k as u64 > cap {
            return Err(Error::InvalidConfig(format!(
                "cannot draw {k} distinct sign vectors in dimension {d} (only {cap} exist)"
            )));
        }
    }
    let signs: Vec<Vec<f64>> = match capacity {
        Some(cap) if 2 * (k as u64) >= cap => {
            let mut masks: Vec<u64> = (0..cap).collect();
            masks.shuffle(rng);
            masks
                .into_iter()
                .take(k)
                .map(|m| {
                    (0..d)
                        .map(|i| if m >> i & 1 == 1 { 1.0 } else { -1.0 })
                        .collect()
                })
                .collect()
        }
        _ => {
            let mut seen: HashSet<Vec<bool>> = HashSet::with_capacity(k);
            let mut out = Vec::with_capacity(k);
            while out.len() < k {
                let bits: Vec<bool> = (0..d).map(|_| rng.random::<bool>()).collect();
                if seen.insert(bits.clone()) {
                    out.push(bits.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect());
                }
            }
            out
        }
    };
    let scale = match convention {
        FeatureConvention::RawPm1 => 1.0,
        FeatureConvention::UnitNormalized => 1.0 / (d as f64).sqrt(),
    };
    Ok(ArmSet::new(
        signs
            .into_iter()
            .map(|v| FeatureVector::new(v.into_iter().map(|x| x * scale).collect()))
            .collect(),
    ))
}

/// Hidden reward parameter plus the arm set it is played against.
#[derive(Clone, Debug, PartialEq)]
pub struct BanditInstance {
    theta_star: ParamVector,
    arms: Arc<ArmSet>,
    convention: FeatureConvention,
}

/// Builds an instance from its seed: θ* is isotropic Gaussian normalized to
/// unit length, arms are distinct sign vectors.
pub fn generate_instance(
    seed: u64,
    d: usize,
    k: usize,
    convention: FeatureConvention,
) -> Result<BanditInstance> {
    BanditInstance::generate(&mut seeded(seed), d, k, convention)
}

impl BanditInstance {
    pub fn generate<R: Rng + ?Sized>(
        rng: &mut R,
        d: usize,
        k: usize,
        convention: FeatureConvention,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidConfig("d must be positive".into()));
        }
        let theta_star = loop {
            let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let theta = ParamVector::new(v);
            let n = theta.norm();
            if n > 1e-12 {
                break ParamVector(theta.0 / n);
            }
        };
        let arms = sample_arm_set(rng, d, k, convention)?;
        Ok(Self {
            theta_star,
            arms: Arc::new(arms),
            convention,
        })
    }

    /// Wraps a hand-built instance. Panics if dimensions disagree.
    pub fn from_parts(
        theta_star: ParamVector,
        arms: ArmSet,
        convention: FeatureConvention,
    ) -> Self {
        assert_eq!(theta_star.dim(), arms.dim(), "dimension mismatch");
        Self {
            theta_star,
            arms: Arc::new(arms),
            convention,
        }
    }

    pub fn theta_star(&self) -> &ParamVector {
        &self.theta_star
    }

    pub fn arms(&self) -> &Arc<ArmSet> {
        &self.arms
    }

    pub fn dim(&self) -> usize {
        self.theta_star.dim()
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn convention(&self) -> FeatureConvention {
        self.convention
    }

    /// A fresh arm set of the same shape, for the per-round resampling mode.
    pub fn resample_arms<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Arc<ArmSet>> {
        sample_arm_set(rng, self.dim(), self.num_arms(), self.convention).map(Arc::new)
    }

    /// r*(a) on the given action set.
    pub fn true_reward(&self, arms: &ArmSet, arm: usize) -> f64 {
        reward(&self.theta_star, arms.feature(arm))
    }

    /// max_a r*(a).
    pub fn best_reward(&self, arms: &ArmSet) -> f64 {
        arms.scores(&self.theta_star)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn best_arm(&self, arms: &ArmSet) -> usize {
        arms.argmax(&self.theta_star)
    }

    /// Draws y: `First` with probability P(a1 ≻ a2).
    pub fn sample_preference<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        arms: &ArmSet,
        a1: usize,
        a2: usize,
    ) -> Preference {
        let p = preference_probability(self.true_reward(arms, a1), self.true_reward(arms, a2));
        if rng.random::<f64>() < p {
            Preference::First
        } else {
            Preference::Second
        }
    }

    /// r*(a*) − (r*(a1) + r*(a2)) / 2. Never negative.
    pub fn per_round_regret(&self, arms: &ArmSet, a1: usize, a2: usize) -> f64 {
        let best = self.best_reward(arms);
        let avg = (self.true_reward(arms, a1) + self.true_reward(arms, a2)) / 2.0;
        (best - avg).max(0.0)
    }

    /// Residual of the Bellman-error / Feel-Good split of the per-round regret:
    ///
    /// regret = ½ (BE¹ + BE² − FG¹(θ¹) − FG²(θ²))
    ///
    /// with BEʲ = ⟨θʲ − θ*, φ(aʲ) − φ(a³⁻ʲ)⟩ and
    /// FGʲ(θ) = max_a ⟨θ, φ(a) − φ(a³⁻ʲ)⟩ − ⟨θ*, φ(a*) − φ(a³⁻ʲ)⟩.
    ///
    /// The identity is exact when each aʲ maximizes ⟨θʲ, φ⟩; otherwise the
    /// residual is reported as is.
    pub fn regret_decomposition_residual(
        &self,
        arms: &ArmSet,
        theta1: &ParamVector,
        theta2: &ParamVector,
        a1: usize,
        a2: usize,
    ) -> f64 {
        let star = arms.scores(&self.theta_star);
        let s1 = arms.scores(theta1);
        let s2 = arms.scores(theta2);
        let max = |s: &[f64]| s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let best_star = max(&star);

        let be1 = (s1[a1] - s1[a2]) - (star[a1] - star[a2]);
        let be2 = (s2[a2] - s2[a1]) - (star[a2] - star[a1]);
        let fg1 = (max(&s1) - s1[a2]) - (best_star - star[a2]);
        let fg2 = (max(&s2) - s2[a1]) - (best_star - star[a1]);

        let regret = best_star - (star[a1] + star[a2]) / 2.0;
        (regret - 0.5 * (be1 + be2 - fg1 - fg2)).abs()
    }

    /// Hash of θ* and the arm features, bit-exact.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for x in self.theta_star.as_slice() {
            x.to_bits().hash(&mut h);
        }
        for f in self.arms.features() {
            for x in f.as_slice() {
                x.to_bits().hash(&mut h);
            }
        }
        h.finish()
    }
}

/// Per-round and running regret of one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RegretTrace {
    instantaneous: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RegretTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            instantaneous: Vec::with_capacity(n),
            cumulative: Vec::with_capacity(n),
        }
    }

    /// Appends one round. Panics on negative or non-finite regret.
    pub fn push(&mut self, regret: f64) {
        assert!(
            regret.is_finite() && regret >= 0.0,
            "per-round regret must be finite and nonnegative, got {regret}"
        );
        let prev = self.cumulative.last().copied().unwrap_or(0.0);
        self.instantaneous.push(regret);
        self.cumulative.push(prev + regret);
    }

    pub fn instantaneous(&self) -> &[f64] {
        &self.instantaneous
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.instantaneous.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instantaneous.is_empty()
    }

    pub fn final_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn theta_star_is_unit() {
        for seed in 0..20 {
            let inst = generate_instance(seed, 10, 32, FeatureConvention::RawPm1).unwrap();
            assert!((inst.theta_star().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exhausts_cube_at_full_capacity() {
        let inst = generate_instance(3, 5, 32, FeatureConvention::RawPm1).unwrap();
        let mut masks: Vec<u32> = inst
            .arms()
            .features()
            .iter()
            .map(|f| {
                f.as_slice()
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| if x > 0.0 { 1 << i } else { 0 })
                    .sum()
            })
            .collect();
        masks.sort_unstable();
        assert_eq!(masks, (0..32).collect::<Vec<_>>());
    }

    #[test]
    fn same_seed_same_instance() {
        let a = generate_instance(11, 10, 32, FeatureConvention::RawPm1).unwrap();
        let b = generate_instance(11, 10, 32, FeatureConvention::RawPm1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = generate_instance(12, 10, 32, FeatureConvention::RawPm1).unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn too_many_arms_rejected() {
        let err = generate_instance(0, 3, 9, FeatureConvention::RawPm1).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn arms_distinct_under_rejection() {
        let inst = generate_instance(5, 12, 200, FeatureConvention::RawPm1).unwrap();
        let set: HashSet<Vec<u64>> = inst
            .arms()
            .features()
            .iter()
            .map(|f| f.as_slice().iter().map(|x| x.to_bits()).collect())
            .collect();
        assert_eq!(set.len(), 200);
    }

    #[test]
    fn unit_convention_has_unit_norm_features() {
        let inst = generate_instance(5, 6, 10, FeatureConvention::UnitNormalized).unwrap();
        for f in inst.arms().features() {
            assert!((f.0.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_arms_are_coin_flips() {
        let inst = generate_instance(1, 4, 8, FeatureConvention::RawPm1).unwrap();
        let mut rng = seeded(99);
        let n = 100_000;
        let wins = (0..n)
            .filter(|_| inst.sample_preference(&mut rng, inst.arms(), 2, 2) == Preference::First)
            .count();
        let freq = wins as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.01, "{freq}");
    }

    #[test]
    fn log_three_gap_gives_three_quarters() {
        let g = 3f64.ln();
        let inst = BanditInstance::from_parts(
            ParamVector::basis(2, 0),
            ArmSet::from_rows(vec![vec![g, 0.0], vec![0.0, 0.0]]),
            FeatureConvention::RawPm1,
        );
        let mut rng = seeded(5);
        let n = 100_000;
        let wins = (0..n)
            .filter(|_| inst.sample_preference(&mut rng, inst.arms(), 0, 1) == Preference::First)
            .count();
        assert!((wins as f64 / n as f64 - 0.75).abs() < 0.01);
    }

    #[test]
    fn preference_stream_is_reproducible() {
        let inst = generate_instance(1, 4, 8, FeatureConvention::RawPm1).unwrap();
        let draw = |seed| {
            let mut rng = seeded(seed);
            (0..50)
                .map(|_| inst.sample_preference(&mut rng, inst.arms(), 0, 1))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
    }

    #[test]
    fn regret_examples() {
        let inst = BanditInstance::from_parts(
            ParamVector::basis(3, 0),
            ArmSet::from_rows(vec![vec![1.0, 1.0, -1.0], vec![-1.0, 1.0, -1.0]]),
            FeatureConvention::RawPm1,
        );
        let arms = inst.arms();
        assert_eq!(inst.per_round_regret(arms, 0, 0), 0.0);
        // Full gap is 2, the average pulls it down by half.
        assert_eq!(inst.per_round_regret(arms, 0, 1), 1.0);
        assert_eq!(inst.per_round_regret(arms, 1, 1), 2.0);
    }

    #[test]
    fn regret_nonnegative_exhaustive() {
        let inst = generate_instance(8, 3, 8, FeatureConvention::RawPm1).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                assert!(inst.per_round_regret(inst.arms(), a, b) >= 0.0);
            }
        }
    }

    #[test]
    fn decomposition_vanishes_at_truth() {
        let inst = generate_instance(2, 5, 32, FeatureConvention::RawPm1).unwrap();
        let t = inst.theta_star().clone();
        let a = inst.best_arm(inst.arms());
        let r = inst.regret_decomposition_residual(inst.arms(), &t, &t, a, a);
        assert!(r < 1e-12);
    }

    #[test]
    fn decomposition_holds_for_argmax_arms() {
        let inst = generate_instance(4, 5, 32, FeatureConvention::RawPm1).unwrap();
        let mut rng = seeded(17);
        for _ in 0..200 {
            let t1 = ParamVector::new((0..5).map(|_| rng.sample(StandardNormal)).collect());
            let t2 = ParamVector::new((0..5).map(|_| rng.sample(StandardNormal)).collect());
            let a1 = inst.arms().argmax(&t1);
            let a2 = inst.arms().argmax(&t2);
            let r = inst.regret_decomposition_residual(inst.arms(), &t1, &t2, a1, a2);
            assert!(r < 1e-10, "residual {r}");
        }
    }

    #[test]
    fn trace_accumulates() {
        let mut t = RegretTrace::new();
        for r in [0.5, 0.0, 1.25] {
            t.push(r);
        }
        assert_eq!(t.cumulative(), &[0.5, 0.5, 1.75]);
        assert_eq!(t.final_regret(), 1.75);
    }

    #[test]
    #[should_panic]
    fn trace_rejects_negative() {
        RegretTrace::new().push(-1e-3);
    }
}
