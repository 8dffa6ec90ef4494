//! EXP3.P adversarial bandit with a non-uniform prior on the initial weights.
//!
//! Weights are kept in log space, `ln w_i = ln π_i + η Ĝ_i`, and turned into
//! probabilities with a max-shifted softmax, so large cumulative gain
//! estimates cannot overflow.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ π_i = 1`.
pub const SIMPLEX_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exp3pConfig {
    pub num_arms: usize,
    /// `η`.
    pub learning_rate: f64,
    /// `γ`, weight of the uniform exploration mixture.
    pub exploration: f64,
    /// `β`, optimism added to every gain estimate.
    pub bias: f64,
    /// `π`, the prior the weights start from.
    pub initial_dist: Vec<f64>,
}

impl Exp3pConfig {
    /// Uniform prior over `num_arms` arms.
    pub fn uniform(num_arms: usize, learning_rate: f64, exploration: f64, bias: f64) -> Self {
        Self {
            num_arms,
            learning_rate,
            exploration,
            bias,
            initial_dist: vec![1.0 / num_arms as f64; num_arms],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.num_arms;
        if k == 0 {
            return Err(Error::invalid("num_arms", "must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::invalid(
                "eta",
                format!(
                    "learning rate must be finite and >= 0, got {}",
                    self.learning_rate
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.exploration) {
            return Err(Error::invalid(
                "gamma",
                format!("exploration must lie in [0, 1], got {}", self.exploration),
            ));
        }
        if !(0.0..=1.0).contains(&self.bias) {
            return Err(Error::invalid(
                "beta_bias",
                format!("bias must lie in [0, 1], got {}", self.bias),
            ));
        }
        if self.bias > 0.0 && self.exploration == 0.0 {
            // Without exploration p_i can underflow and β/p_i blows up.
            return Err(Error::invalid(
                "beta_bias",
                "a positive bias requires gamma > 0",
            ));
        }
        if self.initial_dist.len() != k {
            return Err(Error::DimensionMismatch {
                left: self.initial_dist.len(),
                right: k,
            });
        }
        if let Some(bad) = self
            .initial_dist
            .iter()
            .find(|&&p| !(p.is_finite() && p > 0.0))
        {
            return Err(Error::invalid(
                "initial_dist",
                format!("entries must be positive, got {bad}"),
            ));
        }
        let total: f64 = self.initial_dist.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::invalid(
                "initial_dist",
                format!("must sum to 1, sums to {total}"),
            ));
        }
        Ok(())
    }

    /// Extra preconditions of the high-probability analysis:
    /// `γ ≤ 1/2` and `(1 + β) K η ≤ γ`.
    pub fn validate_theory(&self) -> Result<()> {
        self.validate()?;
        if self.exploration > 0.5 {
            return Err(Error::TheoryInfeasible(format!(
                "gamma = {} exceeds 1/2",
                self.exploration
            )));
        }
        let need = (1.0 + self.bias) * self.num_arms as f64 * self.learning_rate;
        if need > self.exploration * (1.0 + 1e-12) {
            return Err(Error::TheoryInfeasible(format!(
                "(1 + beta) K eta = {need} exceeds gamma = {}",
                self.exploration
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerState {
    /// `ln w_i`.
    pub log_weights: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// `Ĝ_i`.
    pub cum_gains: Vec<f64>,
    pub round: u64,
}

impl LearnerState {
    /// Weights rescaled so the largest equals 1.
    pub fn weights(&self) -> Vec<f64> {
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        self.log_weights.iter().map(|l| (l - max).exp()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Exp3p {
    config: Exp3pConfig,
    log_prior: Vec<f64>,
    state: LearnerState,
}

impl Exp3p {
    pub fn new(config: Exp3pConfig) -> Result<Self> {
        config.validate()?;
        let k = config.num_arms as f64;
        let g = config.exploration;
        let log_prior: Vec<f64> = config.initial_dist.iter().map(|p| p.ln()).collect();
        let state = LearnerState {
            log_weights: log_prior.clone(),
            probabilities: config
                .initial_dist
                .iter()
                .map(|p| (1.0 - g) * p + g / k)
                .collect(),
            cum_gains: vec![0.0; config.num_arms],
            round: 0,
        };
        Ok(Self {
            config,
            log_prior,
            state,
        })
    }

    pub fn config(&self) -> &Exp3pConfig {
        &self.config
    }

    pub fn state(&self) -> &LearnerState {
        &self.state
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.state.probabilities
    }

    /// Draws an arm from the current distribution with one uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.state.probabilities, rng.gen::<f64>())
    }

    /// Importance-weighted estimates `ĝ_i = (g 1{i = chosen} + β) / p_i`.
    pub fn estimated_gains(&self, chosen: usize, gain: f64) -> Result<Vec<f64>> {
        let k = self.config.num_arms;
        if chosen >= k {
            return Err(Error::ArmOutOfRange {
                arm: chosen,
                arms: k,
            });
        }
        if !(0.0..=1.0).contains(&gain) {
            return Err(Error::GainOutOfRange(gain));
        }
        if self.state.probabilities[chosen] == 0.0 {
            return Err(Error::ZeroProbabilityArm(chosen));
        }
        let beta = self.config.bias;
        Ok(self
            .state
            .probabilities
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let numerator = if i == chosen { gain + beta } else { beta };
                if numerator == 0.0 {
                    0.0
                } else {
                    numerator / p
                }
            })
            .collect())
    }

    /// Feeds back the gain of the arm that was played.
    pub fn update(&mut self, chosen: usize, gain: f64) -> Result<()> {
        let estimates = self.estimated_gains(chosen, gain)?;
        let eta = self.config.learning_rate;
        for (i, g_hat) in estimates.into_iter().enumerate() {
            self.state.cum_gains[i] += g_hat;
            let l = self.log_prior[i] + eta * self.state.cum_gains[i];
            if !l.is_finite() {
                return Err(Error::invalid(
                    "learner",
                    format!("log-weight of arm {i} is no longer finite"),
                ));
            }
            self.state.log_weights[i] = l;
        }
        self.refresh_probabilities();
        self.state.round += 1;
        Ok(())
    }

    fn refresh_probabilities(&mut self) {
        let k = self.config.num_arms as f64;
        let g = self.config.exploration;
        let shifted = self.state.weights();
        let total: f64 = shifted.iter().sum();
        for (p, w) in self.state.probabilities.iter_mut().zip(shifted) {
            *p = (1.0 - g) * (w / total) + g / k;
        }
    }
}

/// First index whose cumulative probability exceeds `u ∈ [0, 1)`; falls back
/// to the last arm with positive mass when rounding leaves `u` uncovered.
pub fn sample_index(probabilities: &[f64], u: f64) -> usize {
    let mut cumulative = 0.0;
    for (i, &p) in probabilities.iter().enumerate() {
        cumulative += p;
        if cumulative > u {
            return i;
        }
    }
    probabilities
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probabilities.len() - 1)
}

/// Affine map of `v ∈ [v_min, v_max]` onto `[0, 1]`.
pub fn normalize_gain(v: f64, v_min: f64, v_max: f64) -> Result<f64> {
    if !(v_max > v_min) {
        return Err(Error::invalid(
            "gain bounds",
            format!("need v_max > v_min, got [{v_min}, {v_max}]"),
        ));
    }
    if !(v >= v_min && v <= v_max) {
        return Err(Error::OutOfBounds {
            value: v,
            min: v_min,
            max: v_max,
        });
    }
    Ok((v - v_min) / (v_max - v_min))
}

/// Tuned constants of the high-probability analysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub bias: f64,
    pub learning_rate: f64,
    pub exploration: f64,
    /// `π* = 1`: nothing to learn, `η = γ = 0`.
    pub degenerate: bool,
}

fn check_theory_inputs(horizon: u64, k: usize, delta: f64, pi_star: f64) -> Result<()> {
    if horizon < 1 {
        return Err(Error::invalid("horizon", "must be >= 1"));
    }
    if k < 2 {
        return Err(Error::invalid("num_arms", format!("must be >= 2, got {k}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(
            "delta",
            format!("must lie in (0, 1), got {delta}"),
        ));
    }
    if !(pi_star > 0.0 && pi_star <= 1.0) {
        return Err(Error::invalid(
            "pi_star",
            format!("must lie in (0, 1], got {pi_star}"),
        ));
    }
    Ok(())
}

/// `β = √(ln(K/δ)/(KT))`, `η = √(ln(1/π*)/(KT))`, `γ = (1 + β) K η`.
pub fn theory_params(horizon: u64, k: usize, delta: f64, pi_star: f64) -> Result<TheoryParams> {
    check_theory_inputs(horizon, k, delta, pi_star)?;
    let kt = k as f64 * horizon as f64;
    let bias = ((k as f64 / delta).ln() / kt).sqrt();
    let learning_rate = ((1.0 / pi_star).ln() / kt).sqrt();
    let exploration = (1.0 + bias) * k as f64 * learning_rate;
    if bias > 1.0 {
        return Err(Error::TheoryInfeasible(format!(
            "beta = {bias} > 1; horizon {horizon} is too short"
        )));
    }
    if exploration > 0.5 {
        return Err(Error::TheoryInfeasible(format!(
            "gamma = {exploration} > 1/2; horizon {horizon} is too short"
        )));
    }
    let degenerate = learning_rate == 0.0;
    if degenerate {
        log::warn!("pi_star = 1: theory tuning gives eta = gamma = 0, the learner never moves");
    }
    Ok(TheoryParams {
        bias,
        learning_rate,
        exploration,
        degenerate,
    })
}

/// Leading-order high-probability regret bound
/// `√(TK) (4 √ln(1/π*) + 2 √ln(K/δ))`.
pub fn regret_bound(horizon: u64, k: usize, delta: f64, pi_star: f64) -> f64 {
    let t = horizon as f64;
    let k = k as f64;
    (t * k).sqrt() * (4.0 * (1.0 / pi_star).ln().sqrt() + 2.0 * (k / delta).ln().sqrt())
}
