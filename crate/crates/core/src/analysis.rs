//! Metrics over finished traces: directness gap, regret, empirical
//! distribution checks, regime classification and payment accounting.

use serde::{Deserialize, Serialize};

use crate::engine::RoundRecord;
use crate::error::{Error, Result};
use crate::game::{
    modified_utility, payoff, Action, ActionProfile, FollowerStrategy, IncentiveScheme, Player,
    Signal, StageGame, State,
};
use crate::stackelberg::{follower_coefficients, SignalingPolicy};

/// Running fraction of rounds whose joint action differs from `target`.
pub fn directness_gap(records: &[RoundRecord], target: ActionProfile) -> Vec<f64> {
    let mut misses = 0u64;
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if ActionProfile::new(r.a1, r.a2) != target {
                misses += 1;
            }
            misses as f64 / (i + 1) as f64
        })
        .collect()
}

/// Frequencies of the 16 `(θ, s, a1, a2)` tuples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub mass: [f64; 16],
}

fn tuple_index(state: State, signal: Signal, a1: Action, a2: Action) -> usize {
    state.index() * 8 + signal.index() * 4 + a1.index() * 2 + a2.index()
}

impl EmpiricalDistribution {
    pub fn from_records(records: &[RoundRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::invalid(
                "trace",
                "empirical distribution of an empty trace",
            ));
        }
        let mut counts = [0u64; 16];
        for r in records {
            counts[tuple_index(r.state, r.signal, r.a1, r.a2)] += 1;
        }
        let n = records.len() as f64;
        Ok(Self {
            mass: counts.map(|c| c as f64 / n),
        })
    }

    /// Builds a distribution from explicit masses, which must form a simplex.
    pub fn from_mass(mass: [f64; 16]) -> Result<Self> {
        if mass.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::invalid("mass", "entries must be non-negative"));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "mass",
                format!("must sum to 1, sums to {total}"),
            ));
        }
        Ok(Self { mass })
    }

    pub fn get(&self, state: State, signal: Signal, a1: Action, a2: Action) -> f64 {
        self.mass[tuple_index(state, signal, a1, a2)]
    }

    /// Every tuple with its mass.
    pub fn iter(&self) -> impl Iterator<Item = (State, Signal, Action, Action, f64)> + '_ {
        State::ALL.into_iter().flat_map(move |th| {
            Signal::ALL.into_iter().flat_map(move |s| {
                Action::ALL.into_iter().flat_map(move |a1| {
                    Action::ALL
                        .into_iter()
                        .map(move |a2| (th, s, a1, a2, self.get(th, s, a1, a2)))
                })
            })
        })
    }

    /// Mass of `(θ, s)` summed over actions.
    pub fn state_signal_marginal(&self, state: State, signal: Signal) -> f64 {
        Action::ALL
            .iter()
            .flat_map(|&a1| Action::ALL.map(|a2| self.get(state, signal, a1, a2)))
            .sum()
    }

    pub fn profile_mass(&self, profile: ActionProfile) -> f64 {
        State::ALL
            .iter()
            .flat_map(|&th| Signal::ALL.map(|s| self.get(th, s, profile.a1, profile.a2)))
            .sum()
    }
}

/// Which utilities a check or regret figure is evaluated with.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityKind {
    /// `u + ν`, what the learners observe.
    #[default]
    Modified,
    /// Stage payoff `u` only.
    Raw,
}

fn utility(
    kind: UtilityKind,
    player: Player,
    a_self: Action,
    a_other: Action,
    state: State,
    game: &StageGame,
    scheme: &IncentiveScheme,
) -> f64 {
    match kind {
        UtilityKind::Modified => modified_utility(player, a_self, a_other, state, game, scheme),
        UtilityKind::Raw => payoff(a_self, a_other, state, game),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationKind {
    /// Remap `a → a′` on every tuple where `a` is played, regardless of the
    /// signal. With two actions this is the same as deviating to a fixed action.
    Coarse,
    /// Remap `a → a′` only on tuples carrying one particular signal.
    SignalConditional,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationMargin {
    pub player: Player,
    /// `None` for coarse deviations.
    pub signal: Option<Signal>,
    pub from: Action,
    pub to: Action,
    /// Expected utility of obeying minus that of deviating.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub kind: DeviationKind,
    pub epsilon: f64,
    pub pass: bool,
    pub worst_margin: f64,
    pub margins: Vec<DeviationMargin>,
}

/// Deviation check of an empirical distribution.
///
/// `scheme = None` evaluates stage payoffs; `Some` evaluates modified utilities.
pub fn deviation_check(
    dist: &EmpiricalDistribution,
    game: &StageGame,
    scheme: Option<&IncentiveScheme>,
    epsilon: f64,
    kind: DeviationKind,
) -> EquilibriumReport {
    let (ukind, scheme) = match scheme {
        Some(s) => (UtilityKind::Modified, *s),
        None => (
            UtilityKind::Raw,
            IncentiveScheme::none(ActionProfile::INVEST_BOTH),
        ),
    };
    let signals: Vec<Option<Signal>> = match kind {
        DeviationKind::Coarse => vec![None],
        DeviationKind::SignalConditional => Signal::ALL.map(Some).to_vec(),
    };
    let mut margins = Vec::new();
    for player in Player::BOTH {
        for &only in &signals {
            for from in Action::ALL {
                let to = from.other();
                let mut margin = 0.0;
                for (th, s, a1, a2, m) in dist.iter() {
                    let (own, other) = match player {
                        Player::One => (a1, a2),
                        Player::Two => (a2, a1),
                    };
                    if own != from || only.is_some_and(|o| o != s) {
                        continue;
                    }
                    let keep = utility(ukind, player, from, other, th, game, &scheme);
                    let dev = utility(ukind, player, to, other, th, game, &scheme);
                    margin += m * (keep - dev);
                }
                margins.push(DeviationMargin {
                    player,
                    signal: only,
                    from,
                    to,
                    margin,
                });
            }
        }
    }
    let worst_margin = margins
        .iter()
        .map(|m| m.margin)
        .fold(f64::INFINITY, f64::min);
    EquilibriumReport {
        kind,
        epsilon,
        pass: worst_margin >= -epsilon,
        worst_margin,
        margins,
    }
}

/// ε-coarse correlated equilibrium check.
pub fn bcce_check(
    dist: &EmpiricalDistribution,
    game: &StageGame,
    scheme: Option<&IncentiveScheme>,
    epsilon: f64,
) -> EquilibriumReport {
    deviation_check(dist, game, scheme, epsilon, DeviationKind::Coarse)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BceReport {
    pub pass: bool,
    /// `A_j α_j + B_j γ_j` for `[g, b]`.
    pub margins: [f64; 2],
}

/// Per-signal obedience `A_j α_j + B_j γ_j ≥ −ε` of a symmetric strategy.
pub fn bce_check(
    strategy: &FollowerStrategy,
    policy: &SignalingPolicy,
    game: &StageGame,
    epsilon: f64,
) -> Result<BceReport> {
    strategy.check_feasible()?;
    policy.validate()?;
    let c = follower_coefficients(policy, game);
    let margins = Signal::ALL.map(|s| {
        let (a, b) = c.for_signal(s);
        let r = strategy.for_signal(s);
        a * r.alpha + b * r.gamma
    });
    Ok(BceReport {
        pass: margins.iter().all(|&m| m >= -epsilon),
        margins,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `z + y_B > 0`: investing is strictly dominant.
    StrictlyDominant,
    NeedsDesign,
}

pub fn dominance_classify(game: &StageGame) -> Regime {
    if game.z + game.y_bad > 0.0 {
        Regime::StrictlyDominant
    } else {
        Regime::NeedsDesign
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Mechanism {
    InfoOnly,
    InfoPlusSublinear,
    LinearPayments { payment: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Steerable {
    Yes,
    No,
    NotGuaranteed,
}

impl Steerable {
    pub fn mark(self) -> &'static str {
        match self {
            Steerable::Yes => "✓",
            Steerable::No => "✗",
            Steerable::NotGuaranteed => "?",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteerabilityVerdict {
    pub mechanism: Mechanism,
    pub regime: Regime,
    pub verdict: Steerable,
    /// The inequality value that decided the verdict, when one did.
    pub condition_value: Option<f64>,
}

/// Value of `ψ(z + y_G) + (1 − ψ)(z + y_B)`, the expected gain of investing
/// against an investing opponent under the prior alone.
pub fn info_only_condition(game: &StageGame) -> f64 {
    game.psi * (game.z + game.y_good) + (1.0 - game.psi) * (game.z + game.y_bad)
}

/// Whether `(I, I)` can be reached by the given mechanism.
pub fn steerability_classify(game: &StageGame, mechanism: Mechanism) -> SteerabilityVerdict {
    let regime = dominance_classify(game);
    let (verdict, condition_value) = match (regime, mechanism) {
        (Regime::StrictlyDominant, Mechanism::LinearPayments { payment }) => {
            (Steerable::Yes, Some(payment_kappa(game, payment)))
        }
        (Regime::StrictlyDominant, _) => (Steerable::Yes, Some(game.z + game.y_bad)),
        (Regime::NeedsDesign, Mechanism::InfoOnly) => {
            let v = info_only_condition(game);
            (
                if v >= 0.0 {
                    Steerable::Yes
                } else {
                    Steerable::No
                },
                Some(v),
            )
        }
        (Regime::NeedsDesign, Mechanism::InfoPlusSublinear) => (Steerable::NotGuaranteed, None),
        (Regime::NeedsDesign, Mechanism::LinearPayments { payment }) => {
            let k = payment_kappa(game, payment);
            (
                if k > 0.0 {
                    Steerable::Yes
                } else {
                    Steerable::No
                },
                Some(k),
            )
        }
    };
    SteerabilityVerdict {
        mechanism,
        regime,
        verdict,
        condition_value,
    }
}

fn payment_kappa(game: &StageGame, m: f64) -> f64 {
    (m + game.z + game.y_good).min(m + game.z + game.y_bad)
}

/// `κ = min(M + z + y_G, M + z + y_B)`, the least per-round cost of leaving
/// `(I, I)`. Non-positive values are logged.
pub fn kappa(game: &StageGame, scheme: &IncentiveScheme) -> f64 {
    let k = payment_kappa(game, scheme.payment_m);
    if k <= 0.0 {
        log::warn!("kappa = {k} <= 0: the gap bound is void for this configuration");
    }
    k
}

/// Running counterfactual sums for one player, split by signal.
struct RegretAccumulator {
    /// `[signal][fixed action]` sums of `v(a, a_-i, θ) − v(a_i, a_-i, θ)`.
    sums: [[f64; 2]; 2],
}

impl RegretAccumulator {
    fn new() -> Self {
        Self {
            sums: [[0.0; 2]; 2],
        }
    }

    fn push(
        &mut self,
        r: &RoundRecord,
        player: Player,
        game: &StageGame,
        scheme: &IncentiveScheme,
        kind: UtilityKind,
    ) {
        let own = r.action(player);
        let other = r.opponent_action(player);
        let played = utility(kind, player, own, other, r.state, game, scheme);
        for a in Action::ALL {
            let cf = utility(kind, player, a, other, r.state, game, scheme);
            self.sums[r.signal.index()][a.index()] += cf - played;
        }
    }

    fn signal_regret(&self, signal: Signal) -> f64 {
        let s = self.sums[signal.index()];
        s[0].max(s[1])
    }

    fn overall(&self) -> f64 {
        self.signal_regret(Signal::Good) + self.signal_regret(Signal::Bad)
    }
}

/// Regret of `player`'s signal-`signal` learner against the best fixed action.
pub fn external_regret(
    records: &[RoundRecord],
    game: &StageGame,
    scheme: &IncentiveScheme,
    player: Player,
    signal: Signal,
    kind: UtilityKind,
) -> f64 {
    let mut acc = RegretAccumulator::new();
    for r in records.iter().filter(|r| r.signal == signal) {
        acc.push(r, player, game, scheme, kind);
    }
    acc.signal_regret(signal)
}

/// Sum of the two per-signal external regrets.
pub fn overall_regret(
    records: &[RoundRecord],
    game: &StageGame,
    scheme: &IncentiveScheme,
    player: Player,
    kind: UtilityKind,
) -> f64 {
    external_regret(records, game, scheme, player, Signal::Good, kind)
        + external_regret(records, game, scheme, player, Signal::Bad, kind)
}

/// Per-round series for one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub directness_gap: Vec<f64>,
    /// `[g, b]`.
    pub per_signal_regret: [Vec<f64>; 2],
    pub overall_regret: Vec<f64>,
    /// Running mean of `pay1 + pay2`.
    pub avg_payment: Vec<f64>,
}

/// Computes every per-round series of one trace; regrets are `player`'s.
pub fn metric_series(
    records: &[RoundRecord],
    game: &StageGame,
    scheme: &IncentiveScheme,
    player: Player,
    kind: UtilityKind,
) -> MetricSeries {
    let n = records.len();
    let mut good = Vec::with_capacity(n);
    let mut bad = Vec::with_capacity(n);
    let mut overall = Vec::with_capacity(n);
    let mut acc = RegretAccumulator::new();
    for r in records {
        acc.push(r, player, game, scheme, kind);
        good.push(acc.signal_regret(Signal::Good));
        bad.push(acc.signal_regret(Signal::Bad));
        overall.push(acc.overall());
    }
    MetricSeries {
        directness_gap: directness_gap(records, scheme.target),
        per_signal_regret: [good, bad],
        overall_regret: overall,
        avg_payment: payment_accounting(records).average_joint,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaymentSummary {
    /// Total paid to each player.
    pub total: [f64; 2],
    /// Running mean of `pay1 + pay2` over rounds `1..=t`.
    pub average_joint: Vec<f64>,
}

pub fn payment_accounting(records: &[RoundRecord]) -> PaymentSummary {
    let mut total = [0.0; 2];
    let mut joint = 0.0;
    let average_joint = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            total[0] += r.pay1;
            total[1] += r.pay2;
            joint += r.pay1 + r.pay2;
            joint / (i + 1) as f64
        })
        .collect();
    PaymentSummary {
        total,
        average_joint,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum BoundMode {
    /// Uniformly initialized learners.
    Regular,
    /// Learners initialized at the Stackelberg marginals.
    Se { gamma_frac: f64 },
}

/// Default `γ_frac` for the SE bound: the fraction of bad-signal rounds times
/// `ln(1/π*)`, with `π*` the initial probability of the target action under
/// the bad signal.
pub fn default_gamma_frac(records: &[RoundRecord], pi_star_bad: f64) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let bad = records.iter().filter(|r| r.signal == Signal::Bad).count() as f64;
    bad / records.len() as f64 * (1.0 / pi_star_bad).ln()
}

/// Directness-gap bound at round `t`.
pub fn gap_bound_at(t: u64, k: usize, delta: f64, kappa: f64, mode: BoundMode) -> f64 {
    let kf = k as f64;
    let lead = 2.0 * (2.0 * kf * (2.0 * kf / delta).ln()).sqrt();
    let second = match mode {
        BoundMode::Regular => 4.0 * (2.0 * kf * kf.ln()).sqrt(),
        BoundMode::Se { gamma_frac } => 4.0 * (gamma_frac * kf).sqrt(),
    };
    (lead + second) / (kappa * (t as f64).sqrt())
}

/// Bound series for `t = 1..=horizon`.
pub fn gap_bound_curve(
    horizon: u64,
    k: usize,
    delta: f64,
    game: &StageGame,
    scheme: &IncentiveScheme,
    mode: BoundMode,
) -> Result<Vec<f64>> {
    let kap = payment_kappa(game, scheme.payment_m);
    if kap <= 0.0 {
        return Err(Error::NonPositiveKappa(kap));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(
            "delta",
            format!("must lie in (0, 1), got {delta}"),
        ));
    }
    if let BoundMode::Se { gamma_frac } = mode {
        if !(gamma_frac >= 0.0) {
            return Err(Error::invalid(
                "gamma_frac",
                format!("must be >= 0, got {gamma_frac}"),
            ));
        }
    }
    Ok((1..=horizon)
        .map(|t| gap_bound_at(t, k, delta, kap, mode))
        .collect())
}
