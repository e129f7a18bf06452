//! Ridge-regularized logistic MLE shared by the UCB-style baselines.
//!
//! Minimizes Σ_i w_i σ(y_i⟨θ, Δφ_i⟩) + (λ/2)‖θ‖² with damped Newton steps.
//! Gradient and Hessian are assembled in arm space from the grouped
//! statistics and then projected through the feature matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::history::{DuelStats, History};
use crate::primitives::{link_sigma, link_sigma_prime, link_sigma_second, ParamVector};

pub const MAX_NEWTON_ITERS: usize = 100;
pub const GRADIENT_TOLERANCE: f64 = 1e-8;
const MAX_HALVINGS: usize = 60;
const ARMIJO: f64 = 1e-4;
const ROUNDING_LEVEL: f64 = 1e-12;

/// Output of [`mle_solve`], including the objective after each accepted step.
#[derive(Clone, Debug)]
pub struct MleReport {
    pub theta: ParamVector,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
}

pub fn objective(theta: &ParamVector, stats: &DuelStats, lambda: f64) -> f64 {
    let mut total = 0.5 * lambda * theta.0.norm_squared();
    let mut scores = Vec::new();
    for ctx in stats.contexts() {
        ctx.arms().scores_into(theta.as_slice(), &mut scores);
        for p in ctx.pairs() {
            total += p.weight * link_sigma(scores[p.winner] - scores[p.loser]);
        }
    }
    total
}

/// Gradient and Hessian of the objective at θ.
fn derivatives(theta: &DVector<f64>, stats: &DuelStats, lambda: f64) -> (DVector<f64>, DMatrix<f64>) {
    let d = theta.len();
    let mut grad = theta * lambda;
    let mut hess = DMatrix::identity(d, d) * lambda;
    let mut scores = Vec::new();
    for ctx in stats.contexts() {
        let arms = ctx.arms();
        let k = arms.len();
        arms.scores_into(theta.as_slice(), &mut scores);
        let mut coef = DVector::zeros(k);
        let mut w = DMatrix::zeros(k, k);
        for p in ctx.pairs() {
            if p.winner == p.loser {
                continue;
            }
            let z = scores[p.winner] - scores[p.loser];
            let g = p.weight * link_sigma_prime(z);
            coef[p.winner] += g;
            coef[p.loser] -= g;
            let h = p.weight * link_sigma_second(z);
            w[(p.winner, p.winner)] += h;
            w[(p.loser, p.loser)] += h;
            w[(p.winner, p.loser)] -= h;
            w[(p.loser, p.winner)] -= h;
        }
        let phi = DMatrix::from_fn(k, d, |a, i| arms.feature(a).0[i]);
        grad += phi.transpose() * &coef;
        hess += phi.transpose() * w * &phi;
    }
    (grad, hess)
}

/// Damped Newton from `init` (zero when absent).
pub fn mle_solve(stats: &DuelStats, lambda: f64, dim: usize, init: Option<&ParamVector>) -> Result<MleReport> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidConfig(format!("lambda must be positive, got {lambda}")));
    }
    let mut theta = init.map(|t| t.0.clone()).unwrap_or_else(|| DVector::zeros(dim));
    assert_eq!(theta.len(), dim, "dimension mismatch");
    let mut f = objective(&ParamVector(theta.clone()), stats, lambda);
    let mut trace = vec![f];
    for iter in 0..MAX_NEWTON_ITERS {
        let (grad, hess) = derivatives(&theta, stats, lambda);
        let gnorm = grad.norm();
        if gnorm < GRADIENT_TOLERANCE {
            return Ok(MleReport {
                theta: ParamVector(theta),
                gradient_norm: gnorm,
                iterations: iter,
                objective_trace: trace,
            });
        }
        let step = match hess.cholesky() {
            Some(ch) => -ch.solve(&grad),
            None => -&grad,
        };
        let slope = grad.dot(&step);
        // Predicted decrease below the objective's rounding level: Armijo
        // cannot discriminate, so take the full step if it shrinks the gradient.
        if -slope <= ROUNDING_LEVEL * (1.0 + f.abs()) {
            let cand = &theta + &step;
            let (cand_grad, _) = derivatives(&cand, stats, lambda);
            if cand_grad.norm() < gnorm {
                f = objective(&ParamVector(cand.clone()), stats, lambda);
                theta = cand;
                trace.push(f);
                continue;
            }
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cand = &theta + &step * t;
            let fc = objective(&ParamVector(cand.clone()), stats, lambda);
            if fc <= f + ARMIJO * t * slope {
                theta = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // No representable decrease left along the Newton direction.
            let (grad, _) = derivatives(&theta, stats, lambda);
            return Err(Error::Estimation {
                residual: grad.norm(),
            });
        }
        trace.push(f);
    }
    let (grad, _) = derivatives(&theta, stats, lambda);
    let gnorm = grad.norm();
    if gnorm < GRADIENT_TOLERANCE {
        Ok(MleReport {
            theta: ParamVector(theta),
            gradient_norm: gnorm,
            iterations: MAX_NEWTON_ITERS,
            objective_trace: trace,
        })
    } else {
        Err(Error::Estimation { residual: gnorm })
    }
}

/// Regularized logistic MLE of θ from a history of duels.
pub fn mle_estimate(history: &History, dim: usize, lambda: f64) -> Result<ParamVector> {
    mle_solve(&DuelStats::from_history(history), lambda, dim, None).map(|r| r.theta)
}

/// ∇ of the objective, exposed for optimality checks.
pub fn objective_gradient(theta: &ParamVector, stats: &DuelStats, lambda: f64) -> ParamVector {
    ParamVector(derivatives(&theta.0, stats, lambda).0)
}
