//! Design matrix Σ = λI + Σ w Δφ Δφᵀ, the Mahalanobis bonus ‖Δφ‖_{Σ⁻¹},
//! and the estimator state (θ̂, Σ) the UCB baselines select from.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::agents::mle::mle_solve;
use crate::error::{Error, Result};
use crate::history::DuelStats;
use crate::primitives::{ArmSet, DuelingRecord, FeatureVector, ParamVector};

/// Σ + (φ1 − φ2)(φ1 − φ2)ᵀ.
pub fn covariance_update(sigma: &DMatrix<f64>, phi1: &FeatureVector, phi2: &FeatureVector) -> DMatrix<f64> {
    let diff = &phi1.0 - &phi2.0;
    sigma + &diff * diff.transpose()
}

/// Pairwise bonuses ‖φ(a) − φ(b)‖_{Σ⁻¹} for one action set, via the Gram
/// matrix G = Φ Σ⁻¹ Φᵀ.
#[derive(Clone, Debug)]
pub struct BonusTable {
    k: usize,
    values: Vec<f64>,
}

impl BonusTable {
    pub fn new(arms: &ArmSet, sigma_inv: &DMatrix<f64>) -> Self {
        let k = arms.len();
        let d = arms.dim();
        let phi = DMatrix::from_fn(k, d, |a, i| arms.feature(a).0[i]);
        let gram = &phi * sigma_inv * phi.transpose();
        let mut values = vec![0.0; k * k];
        for a in 0..k {
            for b in (a + 1)..k {
                let q = (gram[(a, a)] + gram[(b, b)]) - (gram[(a, b)] + gram[(b, a)]);
                let v = q.max(0.0).sqrt();
                values[a * k + b] = v;
                values[b * k + a] = v;
            }
        }
        Self { k, values }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.k + b]
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Estimator state of a UCB-style baseline: θ̂, Σ and Σ⁻¹.
#[derive(Clone, Debug)]
pub struct EstimatorState {
    pub theta_hat: ParamVector,
    pub sigma: DMatrix<f64>,
    pub sigma_inv: DMatrix<f64>,
}

impl EstimatorState {
    pub fn new(theta_hat: ParamVector, sigma: DMatrix<f64>) -> Result<Self> {
        let sigma_inv = sigma
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Internal("design matrix lost positive definiteness".into()))?
            .inverse();
        Ok(Self {
            theta_hat,
            sigma,
            sigma_inv,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta_hat.dim()
    }

    pub fn bonuses(&self, arms: &ArmSet) -> BonusTable {
        BonusTable::new(arms, &self.sigma_inv)
    }
}

/// Incrementally maintained logistic MLE plus design matrix.
#[derive(Clone, Debug)]
pub struct LinearEstimator {
    lambda: f64,
    stats: DuelStats,
    state: EstimatorState,
}

impl LinearEstimator {
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda must be positive, got {lambda}")));
        }
        let state = EstimatorState::new(ParamVector::zeros(dim), DMatrix::identity(dim, dim) * lambda)?;
        Ok(Self {
            lambda,
            stats: DuelStats::new(),
            state,
        })
    }

    pub fn state(&self) -> &EstimatorState {
        &self.state
    }

    pub fn stats(&self) -> &DuelStats {
        &self.stats
    }

    /// Absorbs a record with weight `weight` and refits θ̂ (warm-started).
    pub fn absorb(&mut self, record: &DuelingRecord, arms: &Arc<ArmSet>, weight: f64) -> Result<()> {
        self.stats.push(record, arms, weight);
        let diff: DVector<f64> = arms.difference(record.arm1, record.arm2);
        let sigma = &self.state.sigma + (&diff * diff.transpose()) * weight;
        let report = mle_solve(&self.stats, self.lambda, self.state.dim(), Some(&self.state.theta_hat))?;
        self.state = EstimatorState::new(report.theta, sigma)?;
        Ok(())
    }
}
