//! JSON experiment configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{LearnerTemplate, Tuning};
use crate::error::{Error, Result};
use crate::game::{
    ActionProfile, Externality, FollowerStrategy, GameParams, IncentiveScheme, MonotoneMap,
    StageGame,
};
use crate::stackelberg::{SignalingPolicy, SolverOptions, SubThresholdSelection};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    /// Uniformly initialized learners.
    Regular,
    /// Learners initialized at the Stackelberg follower marginals.
    Se,
}

impl Arm {
    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Regular => "regular",
            Arm::Se => "se",
        }
    }

    pub fn parse(s: &str) -> Result<Arm> {
        match s.trim() {
            "regular" => Ok(Arm::Regular),
            "se" => Ok(Arm::Se),
            other => Err(Error::invalid("arms", format!("unknown arm `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyChoice {
    Explicit(SignalingPolicy),
    DeriveFromSe,
}

/// Follower profile supplied by hand instead of solved for.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinnedEquilibrium {
    pub policy: SignalingPolicy,
    pub follower: FollowerStrategy,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSettings {
    pub delta: f64,
    /// Overrides the measured default for the SE arm.
    pub gamma_frac: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub params: GameParams,
    pub scheme: IncentiveScheme,
    pub policy: PolicyChoice,
    pub learner: LearnerTemplate,
    pub horizon: u64,
    pub runs: usize,
    pub floor: f64,
    pub seed: u64,
    pub arms: Vec<Arm>,
    pub out: PathBuf,
    pub stride: u64,
    pub solver: SolverOptions,
    pub pinned_se: Option<PinnedEquilibrium>,
    pub bound: BoundSettings,
}

impl ExperimentConfig {
    pub fn game(&self) -> Result<StageGame> {
        self.params.resolve()
    }

    /// Re-checks everything that command-line overrides can break.
    pub fn validate(&self) -> Result<()> {
        self.game()?;
        self.scheme.validate()?;
        if self.scheme.target != ActionProfile::INVEST_BOTH {
            return Err(Error::invalid("target", "only \"II\" is supported"));
        }
        if let PolicyChoice::Explicit(p) = self.policy {
            p.validate()?;
        }
        if self.horizon < 1 {
            return Err(Error::invalid("horizon", "must be >= 1"));
        }
        if self.runs < 1 {
            return Err(Error::invalid("runs", "must be >= 1"));
        }
        if !(self.floor > 0.0 && self.floor < 0.5) {
            return Err(Error::invalid(
                "floor",
                format!("must lie in (0, 0.5), got {}", self.floor),
            ));
        }
        if self.arms.is_empty() {
            return Err(Error::invalid("arms", "must name at least one arm"));
        }
        if self.stride < 1 || self.stride > self.horizon {
            return Err(Error::invalid(
                "stride",
                format!("must lie in [1, horizon], got {}", self.stride),
            ));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::invalid("name", "must be a non-empty file-name stem"));
        }
        if !(self.bound.delta > 0.0 && self.bound.delta < 1.0) {
            return Err(Error::invalid("bound.delta", "must lie in (0, 1)"));
        }
        if let Some(pinned) = &self.pinned_se {
            pinned.policy.validate()?;
            pinned.follower.check_feasible()?;
        }
        if let Tuning::Theory { delta } = self.learner.tuning {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::invalid("learner.delta", "must lie in (0, 1)"));
            }
        }
        crate::bandit::Exp3pConfig::uniform(
            2,
            self.learner.learning_rate,
            self.learner.exploration,
            self.learner.bias,
        )
        .validate()?;
        Ok(())
    }

    /// SHA-256 over every field that affects results (not `name` or `out`).
    pub fn hash(&self) -> String {
        let mut semantic = self.clone();
        semantic.name.clear();
        semantic.out = PathBuf::new();
        let bytes = serde_json::to_vec(&semantic).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFeatures {
    f1: Vec<f64>,
    f2: Vec<f64>,
    #[serde(default)]
    phi: Option<MonotoneMap>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    alpha: f64,
    beta: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawPolicyChoice {
    Explicit(RawPolicy),
    Named(String),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawLearner {
    eta: Option<f64>,
    gamma: Option<f64>,
    beta_bias: Option<f64>,
    mode: Option<String>,
    delta: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    eta: Option<f64>,
    select: Option<SubThresholdSelection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPinned {
    alpha: f64,
    beta: f64,
    follower: [f64; 4],
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawBound {
    delta: Option<f64>,
    gamma_frac: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    psi: f64,
    z: Option<f64>,
    features: Option<RawFeatures>,
    #[serde(rename = "y_G")]
    y_good: f64,
    #[serde(rename = "y_B")]
    y_bad: f64,
    #[serde(rename = "M")]
    payment: f64,
    target: Option<String>,
    policy: Option<RawPolicyChoice>,
    #[serde(default)]
    learner: RawLearner,
    horizon: Option<u64>,
    runs: Option<usize>,
    floor: Option<f64>,
    seed: Option<u64>,
    arms: Option<Vec<String>>,
    out: Option<PathBuf>,
    stride: Option<u64>,
    #[serde(default)]
    se: RawSolver,
    pinned_se: Option<RawPinned>,
    #[serde(default)]
    bound: RawBound,
}

pub const DEFAULT_HORIZON: u64 = 100_000;
pub const DEFAULT_RUNS: usize = 50;
pub const DEFAULT_SEED: u64 = 1;

/// Parses and validates a JSON experiment document, applying defaults.
pub fn parse_config(document: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig =
        serde_json::from_str(document).map_err(|e| Error::Config(e.to_string()))?;

    let externality = match (raw.z, raw.features) {
        (Some(z), None) => Externality::Direct(z),
        (None, Some(f)) => Externality::Features {
            f1: f.f1,
            f2: f.f2,
            phi: f.phi.unwrap_or(MonotoneMap::Identity),
        },
        (Some(_), Some(_)) => {
            return Err(Error::invalid(
                "z",
                "give either `z` or `features`, not both",
            ))
        }
        (None, None) => return Err(Error::invalid("z", "missing; give `z` or `features`")),
    };
    let params = GameParams {
        psi: raw.psi,
        y_good: raw.y_good,
        y_bad: raw.y_bad,
        externality,
    };

    let target: ActionProfile = match raw.target.as_deref() {
        None => ActionProfile::INVEST_BOTH,
        Some(t) => t.parse().map_err(|_| {
            Error::invalid(
                "target",
                format!("expected a profile like \"II\", got {t:?}"),
            )
        })?,
    };

    let policy = match raw.policy {
        None => PolicyChoice::DeriveFromSe,
        Some(RawPolicyChoice::Explicit(p)) => {
            PolicyChoice::Explicit(SignalingPolicy::new(p.alpha, p.beta))
        }
        Some(RawPolicyChoice::Named(s)) if s == "derive_from_se" => PolicyChoice::DeriveFromSe,
        Some(RawPolicyChoice::Named(s)) => {
            return Err(Error::invalid(
                "policy",
                format!("expected {{\"alpha\", \"beta\"}} or \"derive_from_se\", got {s:?}"),
            ))
        }
    };

    let defaults = LearnerTemplate::default();
    let tuning = match raw.learner.mode.as_deref() {
        None | Some("fixed") => {
            if raw.learner.delta.is_some() {
                return Err(Error::invalid(
                    "learner.delta",
                    "only used with mode \"theory\"",
                ));
            }
            Tuning::Fixed
        }
        Some("theory") => Tuning::Theory {
            delta: raw.learner.delta.unwrap_or(0.05),
        },
        Some(other) => {
            return Err(Error::invalid(
                "learner.mode",
                format!("expected \"fixed\" or \"theory\", got {other:?}"),
            ))
        }
    };
    let learner = LearnerTemplate {
        learning_rate: raw.learner.eta.unwrap_or(defaults.learning_rate),
        exploration: raw.learner.gamma.unwrap_or(defaults.exploration),
        bias: raw.learner.beta_bias.unwrap_or(defaults.bias),
        tuning,
    };

    let arms = match raw.arms {
        None => vec![Arm::Regular, Arm::Se],
        Some(list) => normalize_arms(list.iter().map(|s| Arm::parse(s)).collect::<Result<_>>()?),
    };

    let solver_defaults = SolverOptions::default();
    let solver = SolverOptions {
        case4_eta: raw.se.eta.unwrap_or(solver_defaults.case4_eta),
        selection: raw.se.select.unwrap_or(solver_defaults.selection),
    };

    let pinned_se = raw.pinned_se.map(|p| PinnedEquilibrium {
        policy: SignalingPolicy::new(p.alpha, p.beta),
        follower: FollowerStrategy::new(p.follower[0], p.follower[1], p.follower[2], p.follower[3]),
    });

    let horizon = raw.horizon.unwrap_or(DEFAULT_HORIZON);
    let config = ExperimentConfig {
        name: raw.name.unwrap_or_else(|| "experiment".to_string()),
        params,
        scheme: IncentiveScheme::new(raw.payment, target),
        policy,
        learner,
        horizon,
        runs: raw.runs.unwrap_or(DEFAULT_RUNS),
        floor: raw.floor.unwrap_or(0.01),
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        arms,
        out: raw.out.unwrap_or_else(|| PathBuf::from("out")),
        stride: raw.stride.unwrap_or(1),
        solver,
        pinned_se,
        bound: BoundSettings {
            delta: raw.bound.delta.unwrap_or(0.05),
            gamma_frac: raw.bound.gamma_frac,
        },
    };
    config.validate()?;
    Ok(config)
}

/// Sorted, de-duplicated arm list.
pub fn normalize_arms(mut arms: Vec<Arm>) -> Vec<Arm> {
    arms.sort();
    arms.dedup();
    arms
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAYMENT_GAME: &str = r#"{
        "name": "payment_game",
        "psi": 0.7, "z": 0.2, "y_G": 1.0, "y_B": -0.05, "M": 0.24,
        "policy": {"alpha": 0.7, "beta": 0.7},
        "learner": {"eta": 0.05}
    }"#;

    #[test]
    fn minimal_document_gets_defaults() {
        let c =
            parse_config(r#"{"psi": 0.7, "z": 0.2, "y_G": 1, "y_B": -0.05, "M": 0.24}"#).unwrap();
        assert_eq!(c.horizon, 100_000);
        assert_eq!(c.runs, 50);
        assert_eq!(c.learner.learning_rate, 0.05);
        assert_eq!(c.floor, 0.01);
        assert_eq!(c.arms, vec![Arm::Regular, Arm::Se]);
        assert_eq!(c.policy, PolicyChoice::DeriveFromSe);
        assert_eq!(c.stride, 1);
    }

    #[test]
    fn payment_game_document_echoes() {
        let c = parse_config(PAYMENT_GAME).unwrap();
        let g = c.game().unwrap();
        assert_eq!((g.psi, g.z, g.y_good, g.y_bad), (0.7, 0.2, 1.0, -0.05));
        assert_eq!(
            c.policy,
            PolicyChoice::Explicit(SignalingPolicy::new(0.7, 0.7))
        );
        assert_eq!(c.scheme.payment_m, 0.24);
        assert_eq!(c.learner.learning_rate, 0.05);
    }

    #[test]
    fn rejections_name_the_field() {
        let err = parse_config(r#"{"psi": 1.2, "z": 0.2, "y_G": 1, "y_B": -0.05, "M": 0.24}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("psi"), "{err}");

        let err = parse_config(
            r#"{"psi": 0.5, "z": 0.2, "y_G": 1, "y_B": -0.05, "M": 0.24, "colour": 1}"#,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("colour"), "{err}");

        let err = parse_config(
            r#"{"psi": 0.5, "z": 0.2, "y_G": 1, "y_B": -0.05, "M": 0.24, "learner": {"etaa": 1}}"#,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("etaa"), "{err}");

        for (doc, field) in [
            (
                r#"{"psi": 0.5, "z": 0.2, "y_G": 1, "y_B": -0.05, "M": -1}"#,
                "M",
            ),
            (
                r#"{"psi": 0.5, "z": 0.2, "y_G": 1, "y_B": 0.05, "M": 0}"#,
                "y_B",
            ),
            (r#"{"psi": 0.5, "y_G": 1, "y_B": -0.05, "M": 0}"#, "z"),
            (
                r#"{"psi": 0.5, "z": 0.2, "y_G": 1, "y_B": -0.05, "M": 0, "arms": []}"#,
                "arms",
            ),
            (
                r#"{"psi": 0.5, "z": 0.2, "y_G": 1, "y_B": -0.05, "M": 0, "arms": ["fast"]}"#,
                "arms",
            ),
            (
                r#"{"psi": 0.5, "z": 0.2, "y_G": 1, "y_B": -0.05, "M": 0, "floor": 0.6}"#,
                "floor",
            ),
            (
                r#"{"psi": 0.5, "z": 0.2, "y_G": 1, "y_B": -0.05, "M": 0, "policy": "best"}"#,
                "policy",
            ),
            (
                r#"{"psi": 0.5, "z": 0.2, "y_G": 1, "y_B": -0.05, "M": 0, "policy": {"alpha": 2, "beta": 0}}"#,
                "alpha",
            ),
            (
                r#"{"psi": 0.5, "z": 0.2, "y_G": 1, "y_B": -0.05, "M": 0, "horizon": 10, "stride": 11}"#,
                "stride",
            ),
            (
                r#"{"psi": 0.5, "z": 0.2, "y_G": 1, "y_B": -0.05, "M": 0, "learner": {"mode": "smart"}}"#,
                "learner.mode",
            ),
        ] {
            let err = parse_config(doc).unwrap_err().to_string();
            assert!(err.contains(field), "{doc}: {err}");
        }
    }

    #[test]
    fn features_and_pinned() {
        let c = parse_config(
            r#"{"psi": 0.7, "features": {"f1": [0.1, 0.2], "f2": [1.0, 0.5],
                 "phi": {"kind": "affine", "slope": 1.0, "intercept": 0.0}},
                "y_G": 0.1, "y_B": -0.56, "M": 0.6,
                "policy": {"alpha": 0.0, "beta": 0.0},
                "pinned_se": {"alpha": 0.0, "beta": 0.0, "follower": [0.5, 0.0, 1.0, 1.0]},
                "learner": {"mode": "theory", "delta": 0.1}}"#,
        )
        .unwrap();
        assert!((c.game().unwrap().z - 0.2).abs() < 1e-15);
        assert_eq!(
            c.pinned_se.unwrap().follower,
            FollowerStrategy::new(0.5, 0.0, 1.0, 1.0)
        );
        assert_eq!(c.learner.tuning, Tuning::Theory { delta: 0.1 });

        let err = parse_config(
            r#"{"psi": 0.7, "z": 0.2, "y_G": 0.1, "y_B": -0.56, "M": 0.6,
                "pinned_se": {"alpha": 0.0, "beta": 0.0, "follower": [0.2, 0.5, 1.0, 1.0]}}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn hash_tracks_semantic_fields() {
        let a = parse_config(PAYMENT_GAME).unwrap();
        let mut b = a.clone();
        b.out = PathBuf::from("elsewhere");
        b.name = "other".into();
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
        let mut c = a.clone();
        c.learner.learning_rate = 0.06;
        assert_ne!(a.hash(), c.hash());
    }
}
