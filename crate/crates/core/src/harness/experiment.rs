//! Batch experiments: both arms, many seeded runs, per-round statistics.

use serde::{Deserialize, Serialize};

use crate::analysis::{gap_bound_at, kappa, metric_series, BoundMode, UtilityKind};
use crate::engine::{build_initial_distributions, run_batch_map, InitMode, RunConfig};
use crate::error::{Error, Result};
use crate::game::{check_payment_rule, Action, Player, Signal};
use crate::harness::config::{Arm, ExperimentConfig, PolicyChoice};
use crate::stackelberg::{
    mediator_utility, solve_stackelberg, CaseLabel, SignalingPolicy, StackelbergSolution,
};

/// Runs are simulated in parallel chunks of this size and folded into the
/// statistics in run order, which keeps results independent of thread count.
pub const CHUNK: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub t: u64,
    pub delta_mean: f64,
    pub delta_std: f64,
    pub regret_mean: f64,
    pub regret_std: f64,
    pub payment_avg: f64,
    pub bound: f64,
}

/// End-of-run figures for one seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub final_gap: f64,
    pub final_regret: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmTable {
    pub arm: Arm,
    /// Rows at `t = stride, 2·stride, …`.
    pub rows: Vec<StatsRow>,
    pub runs: Vec<RunSummary>,
    /// `γ_frac` used by the bound column (SE arm only).
    pub gamma_frac: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub policy: SignalingPolicy,
    pub equilibrium: Option<StackelbergSolution>,
    pub kappa: f64,
    pub warnings: Vec<String>,
    pub arms: Vec<ArmTable>,
}

impl ExperimentResult {
    pub fn arm(&self, arm: Arm) -> Option<&ArmTable> {
        self.arms.iter().find(|a| a.arm == arm)
    }
}

/// Stackelberg solution the experiment uses: the pinned one if present,
/// otherwise solved when some part of the config needs it.
pub fn resolve_equilibrium(config: &ExperimentConfig) -> Result<Option<StackelbergSolution>> {
    let game = config.game()?;
    if let Some(pinned) = &config.pinned_se {
        pinned.follower.check_feasible()?;
        let case_label = CaseLabel::of(&pinned.follower).ok_or_else(|| {
            Error::invalid(
                "pinned_se.follower",
                "must use the vertices (1, 1) and (1/2, 0)",
            )
        })?;
        return Ok(Some(StackelbergSolution {
            policy: pinned.policy,
            follower: pinned.follower,
            case_label,
            mediator_utility: mediator_utility(&pinned.policy, &pinned.follower, game.psi),
            alternates: Vec::new(),
            warnings: Vec::new(),
        }));
    }
    let needed = config.arms.contains(&Arm::Se) || config.policy == PolicyChoice::DeriveFromSe;
    if !needed {
        return Ok(None);
    }
    solve_stackelberg(&game, &config.solver).map(Some)
}

/// Welford accumulator over a fixed-length series.
struct SeriesStats {
    n: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl SeriesStats {
    fn new(len: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, xs: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(xs) {
            let d = x - *m;
            *m += d / n;
            *s += d * (x - *m);
        }
    }

    /// Population standard deviation at index `i`.
    fn std(&self, i: usize) -> f64 {
        (self.m2[i] / self.n as f64).max(0.0).sqrt()
    }
}

/// Series kept from one run; everything else is dropped right away.
struct RunSeries {
    summary: RunSummary,
    gap: Vec<f64>,
    regret: Vec<f64>,
    payment: Vec<f64>,
    bad_fraction: f64,
}

fn run_config_for(
    config: &ExperimentConfig,
    arm: Arm,
    policy: SignalingPolicy,
    se: Option<&StackelbergSolution>,
) -> RunConfig {
    let mut rc = RunConfig::new(config.params.clone(), config.scheme, policy);
    rc.horizon = config.horizon;
    rc.floor = config.floor;
    rc.learner = config.learner;
    rc.seed = config.seed;
    if arm == Arm::Se {
        rc.init_mode = InitMode::Stackelberg;
        rc.se = se.cloned();
    }
    rc
}

fn run_arm(
    config: &ExperimentConfig,
    arm: Arm,
    policy: SignalingPolicy,
    se: Option<&StackelbergSolution>,
    kap: f64,
) -> Result<ArmTable> {
    let game = config.game()?;
    let rc = run_config_for(config, arm, policy, se);
    let horizon = config.horizon as usize;
    let mut gap = SeriesStats::new(horizon);
    let mut regret = SeriesStats::new(horizon);
    let mut payment = SeriesStats::new(horizon);
    let mut summaries = Vec::with_capacity(config.runs);
    let mut bad_fraction_sum = 0.0;

    let mut start = 0;
    while start < config.runs {
        let end = (start + CHUNK).min(config.runs);
        let chunk = run_batch_map(&rc, start..end, |run, trace| {
            let series = metric_series(
                &trace.records,
                &game,
                &config.scheme,
                Player::One,
                UtilityKind::Modified,
            );
            let bad = trace
                .records
                .iter()
                .filter(|r| r.signal == Signal::Bad)
                .count();
            RunSeries {
                summary: RunSummary {
                    run,
                    seed: trace.meta.seed,
                    final_gap: *series.directness_gap.last().expect("horizon >= 1"),
                    final_regret: *series.overall_regret.last().expect("horizon >= 1"),
                },
                gap: series.directness_gap,
                regret: series.overall_regret,
                payment: series.avg_payment,
                bad_fraction: bad as f64 / trace.records.len() as f64,
            }
        })?;
        for rs in chunk {
            gap.push(&rs.gap);
            regret.push(&rs.regret);
            payment.push(&rs.payment);
            bad_fraction_sum += rs.bad_fraction;
            summaries.push(rs.summary);
        }
        start = end;
    }

    let (mode, gamma_frac) = match arm {
        Arm::Regular => (BoundMode::Regular, None),
        Arm::Se => {
            let gf = match config.bound.gamma_frac {
                Some(gf) => gf,
                None => {
                    let se = se.ok_or(Error::MissingEquilibrium)?;
                    let pi_star =
                        build_initial_distributions(InitMode::Stackelberg, Some(se), config.floor)?
                            .get(Player::One, Signal::Bad)[Action::Invest.index()];
                    // Mean over runs of the per-run default.
                    let frac = bad_fraction_sum / config.runs as f64;
                    frac * (1.0 / pi_star).ln()
                }
            };
            (BoundMode::Se { gamma_frac: gf }, Some(gf))
        }
    };

    let stride = config.stride as usize;
    let rows = (stride..=horizon)
        .step_by(stride)
        .map(|t| {
            let i = t - 1;
            StatsRow {
                t: t as u64,
                delta_mean: gap.mean[i],
                delta_std: gap.std(i),
                regret_mean: regret.mean[i],
                regret_std: regret.std(i),
                payment_avg: payment.mean[i],
                bound: gap_bound_at(t as u64, 2, config.bound.delta, kap, mode),
            }
        })
        .collect();

    Ok(ArmTable {
        arm,
        rows,
        runs: summaries,
        gamma_frac,
    })
}

/// Runs every configured arm. Both arms share the signaling policy and the
/// per-run seeds, so results are paired run by run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let game = config.game()?;
    let warnings = check_payment_rule(&game, &config.scheme)?;
    let kap = kappa(&game, &config.scheme);
    let equilibrium = resolve_equilibrium(config)?;
    let policy = match config.policy {
        PolicyChoice::Explicit(p) => p,
        PolicyChoice::DeriveFromSe => {
            equilibrium
                .as_ref()
                .ok_or(Error::MissingEquilibrium)?
                .policy
        }
    };
    let arms = config
        .arms
        .iter()
        .map(|&arm| run_arm(config, arm, policy, equilibrium.as_ref(), kap))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        config: config.clone(),
        config_hash: config.hash(),
        policy,
        equilibrium,
        kappa: kap,
        warnings,
        arms,
    })
}
