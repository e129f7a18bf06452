//! MaxInP, MaxPairUCB and CoLSTIM selection rules over a shared estimator.

use std::sync::Arc;

use rand::Rng;
use rand_distr::Gumbel;

use crate::agents::covariance::{EstimatorState, LinearEstimator};
use crate::agents::{DuelingAgent, RoundCounter};
use crate::error::{Error, Result};
use crate::primitives::{argmax_lowest, argmax_pair, ArmSet, DuelingRecord};
use crate::rng::SimRng;

/// Maximum informative pair.
///
/// Active set: arms a with ⟨θ̂, φ(a) − φ(b)⟩ + β‖φ(a) − φ(b)‖_{Σ⁻¹} ≥ 0 for
/// every b. Returns the active pair with the largest ‖φ(a) − φ(b)‖_{Σ⁻¹}.
pub fn maxinp_select(state: &EstimatorState, arms: &ArmSet, beta: f64) -> Result<(usize, usize)> {
    let scores = arms.scores(&state.theta_hat);
    let bonus = state.bonuses(arms);
    let k = arms.len();
    let active: Vec<usize> = (0..k)
        .filter(|&a| (0..k).all(|b| scores[a] - scores[b] + beta * bonus.get(a, b) >= 0.0))
        .collect();
    if active.is_empty() {
        return Err(Error::Internal("MaxInP active set is empty".into()));
    }
    Ok(argmax_pair(&active, |a, b| bonus.get(a, b)))
}

/// argmax over ordered pairs of ⟨θ̂, φ(x) + φ(y)⟩ + β‖φ(x) − φ(y)‖_{Σ⁻¹}.
pub fn maxpairucb_select(state: &EstimatorState, arms: &ArmSet, beta: f64) -> (usize, usize) {
    let scores = arms.scores(&state.theta_hat);
    let bonus = state.bonuses(arms);
    let all: Vec<usize> = (0..arms.len()).collect();
    argmax_pair(&all, |a, b| scores[a] + scores[b] + beta * bonus.get(a, b))
}

/// First arm maximizes the Gumbel-perturbed estimate ⟨θ̂, φ(a)⟩ + c·ε_a; the
/// second maximizes ⟨θ̂, φ(b)⟩ + β‖φ(b) − φ(a¹)‖_{Σ⁻¹}.
pub fn colstim_select<R: Rng + ?Sized>(
    rng: &mut R,
    state: &EstimatorState,
    arms: &ArmSet,
    beta: f64,
    perturbation: f64,
) -> (usize, usize) {
    let scores = arms.scores(&state.theta_hat);
    let gumbel = Gumbel::new(0.0, 1.0).expect("unit Gumbel");
    let perturbed: Vec<f64> = scores
        .iter()
        .map(|s| s + perturbation * rng.sample(gumbel))
        .collect();
    let first = argmax_lowest(&perturbed);
    let bonus = state.bonuses(arms);
    let second_scores: Vec<f64> = (0..arms.len())
        .map(|b| scores[b] + beta * bonus.get(b, first))
        .collect();
    (first, argmax_lowest(&second_scores))
}

fn check_radius(beta: f64) -> Result<()> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("confidence radius must be nonnegative, got {beta}")))
    }
}

pub struct MaxInP {
    estimator: LinearEstimator,
    beta: f64,
    rounds: RoundCounter,
}

impl MaxInP {
    pub fn new(dim: usize, lambda: f64, beta: f64) -> Result<Self> {
        check_radius(beta)?;
        Ok(Self {
            estimator: LinearEstimator::new(dim, lambda)?,
            beta,
            rounds: RoundCounter::default(),
        })
    }

    pub fn state(&self) -> &EstimatorState {
        self.estimator.state()
    }
}

impl DuelingAgent for MaxInP {
    fn name(&self) -> &'static str {
        "maxinp"
    }

    fn select(&mut self, arms: &Arc<ArmSet>, _round: u64) -> Result<(usize, usize)> {
        maxinp_select(self.estimator.state(), arms, self.beta)
    }

    fn update(&mut self, record: DuelingRecord, arms: &Arc<ArmSet>) -> Result<()> {
        self.rounds.advance(&record)?;
        self.estimator.absorb(&record, arms, 1.0)
    }
}

pub struct MaxPairUcb {
    estimator: LinearEstimator,
    beta: f64,
    rounds: RoundCounter,
}

impl MaxPairUcb {
    pub fn new(dim: usize, lambda: f64, beta: f64) -> Result<Self> {
        check_radius(beta)?;
        Ok(Self {
            estimator: LinearEstimator::new(dim, lambda)?,
            beta,
            rounds: RoundCounter::default(),
        })
    }

    pub fn state(&self) -> &EstimatorState {
        self.estimator.state()
    }
}

impl DuelingAgent for MaxPairUcb {
    fn name(&self) -> &'static str {
        "maxpairucb"
    }

    fn select(&mut self, arms: &Arc<ArmSet>, _round: u64) -> Result<(usize, usize)> {
        Ok(maxpairucb_select(self.estimator.state(), arms, self.beta))
    }

    fn update(&mut self, record: DuelingRecord, arms: &Arc<ArmSet>) -> Result<()> {
        self.rounds.advance(&record)?;
        self.estimator.absorb(&record, arms, 1.0)
    }
}

pub struct CoLstim {
    estimator: LinearEstimator,
    beta: f64,
    perturbation: f64,
    rng: SimRng,
    rounds: RoundCounter,
}

impl CoLstim {
    pub fn new(dim: usize, lambda: f64, beta: f64, perturbation: f64, rng: SimRng) -> Result<Self> {
        check_radius(beta)?;
        if !(perturbation >= 0.0 && perturbation.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "perturbation scale must be nonnegative, got {perturbation}"
            )));
        }
        Ok(Self {
            estimator: LinearEstimator::new(dim, lambda)?,
            beta,
            perturbation,
            rng,
            rounds: RoundCounter::default(),
        })
    }

    pub fn state(&self) -> &EstimatorState {
        self.estimator.state()
    }
}

impl DuelingAgent for CoLstim {
    fn name(&self) -> &'static str {
        "colstim"
    }

    fn select(&mut self, arms: &Arc<ArmSet>, _round: u64) -> Result<(usize, usize)> {
        Ok(colstim_select(
            &mut self.rng,
            self.estimator.state(),
            arms,
            self.beta,
            self.perturbation,
        ))
    }

    fn update(&mut self, record: DuelingRecord, arms: &Arc<ArmSet>) -> Result<()> {
        self.rounds.advance(&record)?;
        self.estimator.absorb(&record, arms, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::ParamVector;
    use crate::rng::seeded;
    use nalgebra::DMatrix;

    fn square() -> ArmSet {
        ArmSet::from_rows(vec![
            vec![1.0, 1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
        ])
    }

    fn state(theta: Vec<f64>) -> EstimatorState {
        EstimatorState::new(ParamVector::new(theta), DMatrix::identity(2, 2)).unwrap()
    }

    #[test]
    fn maxinp_two_arms_returns_the_pair() {
        let arms = ArmSet::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let s = state(vec![0.1, 0.0]);
        assert_eq!(maxinp_select(&s, &arms, 10.0).unwrap(), (0, 1));
    }

    #[test]
    fn maxinp_large_radius_picks_farthest_pair() {
        // Σ = I: antipodal corners are the farthest pairs; (0, 3) is lowest.
        let s = state(vec![0.3, -0.2]);
        assert_eq!(maxinp_select(&s, &square(), 1e3).unwrap(), (0, 3));
    }

    #[test]
    fn maxinp_zero_radius_collapses_to_best() {
        let s = state(vec![0.3, -0.2]);
        assert_eq!(maxinp_select(&s, &square(), 0.0).unwrap(), (1, 1));
    }

    #[test]
    fn maxpair_zero_radius_is_greedy() {
        let s = state(vec![-0.5, 0.2]);
        assert_eq!(maxpairucb_select(&s, &square(), 0.0), (2, 2));
    }

    #[test]
    fn maxpair_score_symmetric() {
        let s = state(vec![0.4, 0.1]);
        let arms = square();
        let sc = arms.scores(&s.theta_hat);
        let b = s.bonuses(&arms);
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(sc[x] + sc[y] + b.get(x, y), sc[y] + sc[x] + b.get(y, x));
            }
        }
    }

    #[test]
    fn colstim_degenerate_settings() {
        let s = state(vec![0.4, 0.1]);
        let arms = square();
        let mut rng = seeded(1);
        for _ in 0..20 {
            assert_eq!(colstim_select(&mut rng, &s, &arms, 0.0, 0.0), (0, 0));
            let (_, second) = colstim_select(&mut rng, &s, &arms, 0.0, 5.0);
            assert_eq!(second, 0);
        }
    }

    #[test]
    fn constructors_validate() {
        assert!(MaxInP::new(2, 0.0, 1.0).is_err());
        assert!(MaxPairUcb::new(2, 1.0, -1.0).is_err());
        assert!(CoLstim::new(2, 1.0, 1.0, f64::NAN, seeded(0)).is_err());
    }
}
