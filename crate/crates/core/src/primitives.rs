//! Domain types shared by every other module: parameter and feature vectors,
//! the logistic link, preference records, and the arm set an agent sees.

use std::fmt;

use nalgebra::DVector;

/// Relative tolerance under which two scores count as tied.
///
/// Every argmax in the crate resolves ties toward the lowest index, and
/// scores within this relative distance of the maximum are ties. Selectors
/// and their brute-force checks compute the same quantity along different
/// floating-point routes, so exact equality is too brittle.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// σ(z) = log(1 + exp(−z)), the negative log-probability of the preferred
/// outcome under the logistic preference model.
///
/// Evaluated in branch form so nothing overflows for large |z|.
pub fn link_sigma(z: f64) -> f64 {
    if z >= 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// σ′(z) = −1 / (1 + exp(z)).
pub fn link_sigma_prime(z: f64) -> f64 {
    if z >= 0.0 {
        let e = (-z).exp();
        -e / (1.0 + e)
    } else {
        -1.0 / (1.0 + z.exp())
    }
}

/// σ″(z) = exp(z) / (1 + exp(z))², always in (0, 1/4].
pub fn link_sigma_second(z: f64) -> f64 {
    let p = logistic(z);
    p * (1.0 - p)
}

/// Standard logistic function 1 / (1 + exp(−z)).
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Probability that an arm with reward `r1` beats one with reward `r2`
/// under the Bradley-Terry-Luce model.
pub fn preference_probability(r1: f64, r2: f64) -> f64 {
    logistic(r1 - r2)
}

/// A reward-model parameter θ ∈ R^d.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector(pub DVector<f64>);

impl ParamVector {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(DVector::from_vec(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    /// Unit vector along coordinate `axis`.
    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[axis] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

/// A feature vector φ(x, a) ∈ R^d.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector(pub DVector<f64>);

impl FeatureVector {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(DVector::from_vec(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(
        a.len(),
        b.len(),
        "dimension mismatch: {} vs {}",
        a.len(),
        b.len()
    );
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// r_θ = ⟨θ, φ⟩.
pub fn reward(theta: &ParamVector, phi: &FeatureVector) -> f64 {
    dot(theta.as_slice(), phi.as_slice())
}

/// Δr_θ = ⟨θ, φ1⟩ − ⟨θ, φ2⟩.
pub fn reward_gap(theta: &ParamVector, phi1: &FeatureVector, phi2: &FeatureVector) -> f64 {
    reward(theta, phi1) - reward(theta, phi2)
}

/// Binary duel outcome. `First` is y = +1: the first arm was preferred.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preference {
    First,
    Second,
}

impl Preference {
    pub fn sign(self) -> f64 {
        match self {
            Preference::First => 1.0,
            Preference::Second => -1.0,
        }
    }

    pub fn from_sign(y: i8) -> Option<Self> {
        match y {
            1 => Some(Preference::First),
            -1 => Some(Preference::Second),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Preference::First => Preference::Second,
            Preference::Second => Preference::First,
        }
    }
}

/// One interaction: the two arms played in `round` and the observed preference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DuelingRecord {
    pub round: u64,
    pub arm1: usize,
    pub arm2: usize,
    pub preference: Preference,
}

impl DuelingRecord {
    pub fn new(round: u64, arm1: usize, arm2: usize, preference: Preference) -> Self {
        Self {
            round,
            arm1,
            arm2,
            preference,
        }
    }

    /// The same observation with the arms listed in the other order.
    pub fn swapped(&self) -> Self {
        Self {
            round: self.round,
            arm1: self.arm2,
            arm2: self.arm1,
            preference: self.preference.flipped(),
        }
    }

    /// (winner, loser) arm indices.
    pub fn winner_loser(&self) -> (usize, usize) {
        match self.preference {
            Preference::First => (self.arm1, self.arm2),
            Preference::Second => (self.arm2, self.arm1),
        }
    }
}

impl fmt::Display for DuelingRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={} ({}, {}) y={:+}",
            self.round,
            self.arm1,
            self.arm2,
            self.preference.sign()
        )
    }
}

/// The finite action set of one round, as seen by an agent: feature
/// vectors only, never the hidden reward parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct ArmSet {
    dim: usize,
    features: Vec<FeatureVector>,
}

impl ArmSet {
    /// Panics on an empty set or on mixed dimensions.
    pub fn new(features: Vec<FeatureVector>) -> Self {
        assert!(!features.is_empty(), "an arm set needs at least one arm");
        let dim = features[0].dim();
        assert!(
            features.iter().all(|f| f.dim() == dim),
            "arm features must share one dimension"
        );
        Self { dim, features }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        Self::new(rows.into_iter().map(FeatureVector::new).collect())
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feature(&self, arm: usize) -> &FeatureVector {
        &self.features[arm]
    }

    pub fn features(&self) -> &[FeatureVector] {
        &self.features
    }

    /// φ(a1) − φ(a2).
    pub fn difference(&self, a1: usize, a2: usize) -> DVector<f64> {
        &self.features[a1].0 - &self.features[a2].0
    }

    /// ⟨θ, φ(a)⟩ for every arm, written into `out`.
    pub fn scores_into(&self, theta: &[f64], out: &mut Vec<f64>) {
        assert_eq!(theta.len(), self.dim, "dimension mismatch");
        out.clear();
        out.extend(self.features.iter().map(|f| dot(theta, f.as_slice())));
    }

    pub fn scores(&self, theta: &ParamVector) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        self.scores_into(theta.as_slice(), &mut out);
        out
    }

    /// Arm maximizing ⟨θ, φ(a)⟩, lowest index on ties.
    pub fn argmax(&self, theta: &ParamVector) -> usize {
        argmax_lowest(&self.scores(theta))
    }
}

fn tie_floor(best: f64) -> f64 {
    best - TIE_TOLERANCE * best.abs().max(1.0)
}

/// Index of the maximum, resolving ties (see [`TIE_TOLERANCE`]) toward the
/// lowest index. Panics on an empty slice.
pub fn argmax_lowest(values: &[f64]) -> usize {
    assert!(!values.is_empty(), "argmax of an empty slice");
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = tie_floor(best);
    values
        .iter()
        .position(|&v| v >= floor)
        .expect("maximum is attained")
}

/// Ordered pair maximizing `score(a, b)` over `candidates × candidates`,
/// lowest lexicographic pair on ties.
pub fn argmax_pair<F>(candidates: &[usize], mut score: F) -> (usize, usize)
where
    F: FnMut(usize, usize) -> f64,
{
    assert!(!candidates.is_empty(), "pair argmax over an empty set");
    let n = candidates.len();
    let mut values = Vec::with_capacity(n * n);
    for &a in candidates {
        for &b in candidates {
            values.push(score(a, b));
        }
    }
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = tie_floor(best);
    // Candidates may arrive unsorted, so scan for the lexicographically
    // smallest pair among the tied ones.
    let mut chosen: Option<(usize, usize)> = None;
    for (i, &a) in candidates.iter().enumerate() {
        for (j, &b) in candidates.iter().enumerate() {
            if values[i * n + j] >= floor && chosen.is_none_or(|c| (a, b) < c) {
                chosen = Some((a, b));
            }
        }
    }
    chosen.expect("maximum is attained")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sigma_at_zero_is_ln2() {
        assert!((link_sigma(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn sigma_reflection_identity() {
        assert!((link_sigma(-3.0) - link_sigma(3.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_large_argument() {
        // log1p(exp(-50)) = exp(-50) - exp(-100)/2 + ..., and exp(-100) is
        // far below double precision at this magnitude.
        let expected = 1.928_749_847_963_917_8e-22;
        assert!((link_sigma(50.0) - expected).abs() < 1e-36);
    }

    #[test]
    fn sigma_does_not_overflow() {
        for z in [-745.0, -700.0, 700.0, 745.0] {
            let s = link_sigma(z);
            assert!(s.is_finite(), "σ({z}) = {s}");
        }
        assert!((link_sigma(-700.0) - 700.0).abs() < 1e-9);
    }

    #[test]
    fn sigma_prime_matches_finite_difference() {
        for z in [-5.0, -0.3, 0.0, 0.7, 4.0] {
            let h = 1e-6;
            let fd = (link_sigma(z + h) - link_sigma(z - h)) / (2.0 * h);
            assert!((fd - link_sigma_prime(z)).abs() < 1e-8);
        }
    }

    #[test]
    fn reward_examples() {
        let zero = ParamVector::zeros(3);
        let phi = FeatureVector::new(vec![1.0, -1.0, 1.0]);
        assert_eq!(reward(&zero, &phi), 0.0);
        assert_eq!(reward(&ParamVector::basis(3, 0), &phi), 1.0);
    }

    #[test]
    fn reward_matches_loop() {
        let theta = ParamVector::new(vec![0.3, -1.2, 2.5, 0.01]);
        let phi = FeatureVector::new(vec![-0.7, 0.4, 1.1, 9.0]);
        let mut acc = 0.0;
        for i in 0..4 {
            acc += theta.0[i] * phi.0[i];
        }
        assert!((reward(&theta, &phi) - acc).abs() < 1e-14);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn reward_dimension_mismatch_panics() {
        reward(&ParamVector::zeros(2), &FeatureVector::new(vec![1.0; 3]));
    }

    #[test]
    fn reward_gap_examples() {
        let theta = ParamVector::basis(3, 0);
        let p1 = FeatureVector::new(vec![1.0, 1.0, -1.0]);
        let p2 = FeatureVector::new(vec![-1.0, 1.0, -1.0]);
        assert_eq!(reward_gap(&theta, &p1, &p1), 0.0);
        assert_eq!(reward_gap(&theta, &p1, &p2), 2.0);
    }

    #[test]
    fn preference_probability_examples() {
        assert_eq!(preference_probability(1.3, 1.3), 0.5);
        assert!((preference_probability(3f64.ln(), 0.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax_lowest(&[0.0, 0.0, 0.0]), 0);
        assert_eq!(argmax_lowest(&[1.0, 3.0, 3.0]), 1);
        let (a, b) = argmax_pair(&[2, 0, 1], |_, _| 1.0);
        assert_eq!((a, b), (0, 0));
    }

    #[test]
    fn record_swap_preserves_winner() {
        let r = DuelingRecord::new(4, 1, 7, Preference::Second);
        assert_eq!(r.winner_loser(), (7, 1));
        assert_eq!(r.swapped().winner_loser(), (7, 1));
    }

    proptest! {
        #[test]
        fn sigma_convex_decreasing_positive(a in -30.0f64..30.0, b in -30.0f64..30.0, c in -30.0f64..30.0) {
            let mut z = [a, b, c];
            z.sort_by(|x, y| x.partial_cmp(y).unwrap());
            prop_assume!(z[1] - z[0] > 1e-9 && z[2] - z[1] > 1e-9);
            let (s1, s2, s3) = (link_sigma(z[0]), link_sigma(z[1]), link_sigma(z[2]));
            prop_assert!(s1 > s2 && s2 > s3 && s3 > 0.0);
            // Convexity at the midpoint.
            let mid = 0.5 * (z[0] + z[2]);
            prop_assert!(link_sigma(mid) <= 0.5 * (s1 + s3) + 1e-12);
        }

        #[test]
        fn sigma_difference_identity(z in -200.0f64..200.0) {
            let lhs = link_sigma(z) - link_sigma(-z);
            prop_assert!((lhs + z).abs() <= 1e-12 * z.abs().max(1.0));
        }

        #[test]
        fn preference_complementary(r1 in -20.0f64..20.0, r2 in -20.0f64..20.0) {
            let p = preference_probability(r1, r2);
            prop_assert!((0.0..=1.0).contains(&p));
            // Strictly inside (0, 1) wherever 1 − p is representable.
            if (r1 - r2).abs() < 36.0 {
                prop_assert!(p > 0.0 && p < 1.0);
            }
            prop_assert!((p + preference_probability(r2, r1) - 1.0).abs() < 1e-14);
            prop_assert!((p - (-link_sigma(r1 - r2)).exp()).abs() < 1e-12);
        }

        #[test]
        fn reward_gap_antisymmetric(v in proptest::collection::vec(-5.0f64..5.0, 9)) {
            let theta = ParamVector::new(v[0..3].to_vec());
            let p1 = FeatureVector::new(v[3..6].to_vec());
            let p2 = FeatureVector::new(v[6..9].to_vec());
            prop_assert_eq!(reward_gap(&theta, &p1, &p2), -reward_gap(&theta, &p2, &p1));
        }
    }
}
