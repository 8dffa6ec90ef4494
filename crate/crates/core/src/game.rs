//! Stage game of the two-player investment game.
//!
//! Payoffs (row player first):
//!
//! ```text
//!            I               N
//!   I   (z+y_θ, z+y_θ)    (z, 0)
//!   N   (0, z)            (0, 0)
//! ```
//!
//! The mediator may add a per-round payment `ν_i = M·1{a_i = d_i}` that rewards
//! a player for playing its component of the target profile `d`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stackelberg::SignalingPolicy;

/// Slack used when checking the joint-action feasibility constraints.
pub const FEASIBILITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    #[serde(rename = "I")]
    Invest,
    #[serde(rename = "N")]
    NotInvest,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Invest, Action::NotInvest];

    /// Arm index used by the learners: `I` is arm 0, `N` is arm 1.
    pub fn index(self) -> usize {
        match self {
            Action::Invest => 0,
            Action::NotInvest => 1,
        }
    }

    pub fn from_index(i: usize) -> Action {
        if i == 0 {
            Action::Invest
        } else {
            Action::NotInvest
        }
    }

    pub fn other(self) -> Action {
        match self {
            Action::Invest => Action::NotInvest,
            Action::NotInvest => Action::Invest,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Action::Invest => 'I',
            Action::NotInvest => 'N',
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Hidden state of the world.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum State {
    #[serde(rename = "G")]
    Good,
    #[serde(rename = "B")]
    Bad,
}

impl State {
    pub const ALL: [State; 2] = [State::Good, State::Bad];

    pub fn index(self) -> usize {
        match self {
            State::Good => 0,
            State::Bad => 1,
        }
    }

    pub fn letter(self) -> char {
        match self {
            State::Good => 'G',
            State::Bad => 'B',
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Public signal sent by the mediator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Signal {
    #[serde(rename = "g")]
    Good,
    #[serde(rename = "b")]
    Bad,
}

impl Signal {
    pub const ALL: [Signal; 2] = [Signal::Good, Signal::Bad];

    pub fn index(self) -> usize {
        match self {
            Signal::Good => 0,
            Signal::Bad => 1,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Signal::Good => 'g',
            Signal::Bad => 'b',
        }
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }
}

/// Joint action `(a1, a2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionProfile {
    pub a1: Action,
    pub a2: Action,
}

impl ActionProfile {
    pub const INVEST_BOTH: ActionProfile = ActionProfile {
        a1: Action::Invest,
        a2: Action::Invest,
    };

    pub fn new(a1: Action, a2: Action) -> Self {
        Self { a1, a2 }
    }

    pub fn of(&self, player: Player) -> Action {
        match player {
            Player::One => self.a1,
            Player::Two => self.a2,
        }
    }
}

impl fmt::Display for ActionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.a1, self.a2)
    }
}

impl std::str::FromStr for ActionProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |c: char| match c {
            'I' => Ok(Action::Invest),
            'N' => Ok(Action::NotInvest),
            _ => Err(Error::invalid("target", format!("unknown action `{c}`"))),
        };
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 2 {
            return Err(Error::invalid("target", "expected two letters from {I, N}"));
        }
        Ok(ActionProfile::new(parse(chars[0])?, parse(chars[1])?))
    }
}

/// Named monotone maps `φ` turning feature alignment into the externality `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MonotoneMap {
    /// `φ(x) = x`; the result must still be non-negative.
    Identity,
    /// `φ(x) = max(x, 0) + offset`.
    Rectified { offset: f64 },
    /// `φ(x) = slope·x + intercept`, `slope > 0`.
    Affine { slope: f64, intercept: f64 },
    /// `φ(x) = scale / (1 + exp(-steepness·x))`.
    Logistic { scale: f64, steepness: f64 },
}

impl MonotoneMap {
    fn check(&self) -> Result<()> {
        match *self {
            MonotoneMap::Identity => Ok(()),
            MonotoneMap::Rectified { offset } if offset.is_finite() && offset >= 0.0 => Ok(()),
            MonotoneMap::Rectified { offset } => Err(Error::invalid(
                "phi.offset",
                format!("must be finite and >= 0, got {offset}"),
            )),
            MonotoneMap::Affine { slope, intercept } => {
                if !(slope.is_finite() && intercept.is_finite()) {
                    Err(Error::invalid("phi", "affine coefficients must be finite"))
                } else if slope <= 0.0 {
                    Err(Error::NonMonotoneMap(format!("affine slope {slope} <= 0")))
                } else {
                    Ok(())
                }
            }
            MonotoneMap::Logistic { scale, steepness } => {
                if !(scale.is_finite() && steepness.is_finite()) {
                    Err(Error::invalid(
                        "phi",
                        "logistic coefficients must be finite",
                    ))
                } else if scale <= 0.0 || steepness <= 0.0 {
                    Err(Error::NonMonotoneMap(format!(
                        "logistic scale {scale} and steepness {steepness} must both be > 0"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            MonotoneMap::Identity => x,
            MonotoneMap::Rectified { offset } => x.max(0.0) + offset,
            MonotoneMap::Affine { slope, intercept } => slope * x + intercept,
            MonotoneMap::Logistic { scale, steepness } => scale / (1.0 + (-steepness * x).exp()),
        }
    }
}

/// How the externality `z` is specified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Externality {
    Direct(f64),
    Features {
        f1: Vec<f64>,
        f2: Vec<f64>,
        phi: MonotoneMap,
    },
}

/// Raw stage-game parameters as supplied by a user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    /// Prior probability of the good state.
    pub psi: f64,
    pub y_good: f64,
    pub y_bad: f64,
    pub externality: Externality,
}

impl GameParams {
    pub fn direct(psi: f64, z: f64, y_good: f64, y_bad: f64) -> Self {
        Self {
            psi,
            y_good,
            y_bad,
            externality: Externality::Direct(z),
        }
    }

    /// Validates every invariant and returns the resolved stage game.
    pub fn resolve(&self) -> Result<StageGame> {
        if !(self.psi > 0.0 && self.psi < 1.0) {
            return Err(Error::invalid(
                "psi",
                format!("must lie in (0, 1), got {}", self.psi),
            ));
        }
        if !(self.y_good.is_finite() && self.y_good > 0.0) {
            return Err(Error::invalid(
                "y_G",
                format!("must be > 0, got {}", self.y_good),
            ));
        }
        if !(self.y_bad.is_finite() && self.y_bad < 0.0) {
            return Err(Error::invalid(
                "y_B",
                format!("must be < 0, got {}", self.y_bad),
            ));
        }
        let z = resolve_externality(self)?;
        Ok(StageGame {
            psi: self.psi,
            z,
            y_good: self.y_good,
            y_bad: self.y_bad,
        })
    }
}

/// Resolves `z`, either the direct value or `φ(⟨f1, f2⟩)`.
pub fn resolve_externality(params: &GameParams) -> Result<f64> {
    let z = match &params.externality {
        Externality::Direct(z) => *z,
        Externality::Features { f1, f2, phi } => {
            if f1.len() != f2.len() {
                return Err(Error::DimensionMismatch {
                    left: f1.len(),
                    right: f2.len(),
                });
            }
            phi.check()?;
            let inner: f64 = f1.iter().zip(f2).map(|(a, b)| a * b).sum();
            phi.apply(inner)
        }
    };
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::invalid(
            "z",
            format!("externality must be >= 0, got {z}"),
        ));
    }
    Ok(z)
}

/// A validated stage game with the externality resolved to a number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageGame {
    pub psi: f64,
    pub z: f64,
    pub y_good: f64,
    pub y_bad: f64,
}

impl StageGame {
    pub fn y(&self, state: State) -> f64 {
        match state {
            State::Good => self.y_good,
            State::Bad => self.y_bad,
        }
    }

    pub fn prior(&self, state: State) -> f64 {
        match state {
            State::Good => self.psi,
            State::Bad => 1.0 - self.psi,
        }
    }
}

/// Constant per-round payment `M` for playing toward `target`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncentiveScheme {
    pub payment_m: f64,
    pub target: ActionProfile,
}

impl IncentiveScheme {
    pub fn new(payment_m: f64, target: ActionProfile) -> Self {
        Self { payment_m, target }
    }

    pub fn none(target: ActionProfile) -> Self {
        Self::new(0.0, target)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.payment_m.is_finite() && self.payment_m >= 0.0) {
            return Err(Error::invalid(
                "M",
                format!("must be >= 0, got {}", self.payment_m),
            ));
        }
        Ok(())
    }

    /// Payment cap `P`; the payment function maps into `[0, P]`.
    pub fn cap(&self) -> f64 {
        self.payment_m
    }
}

/// Checks `M + z + y_B > 0` for steering toward `(I, I)`.
///
/// Returns human-readable warnings; currently one is emitted when the literal
/// inequality `M > z + y_B` fails even though the working rule holds.
pub fn check_payment_rule(game: &StageGame, scheme: &IncentiveScheme) -> Result<Vec<String>> {
    scheme.validate()?;
    let m = scheme.payment_m;
    let low = game.z + game.y_bad;
    if m + low <= 0.0 {
        return Err(Error::NonPositiveKappa(
            (m + game.z + game.y_good).min(m + low),
        ));
    }
    let mut warnings = Vec::new();
    if m <= low {
        let w =
            format!("M = {m} does not exceed z + y_B = {low}; steering relies on M + z + y_B > 0");
        log::warn!("{w}");
        warnings.push(w);
    }
    Ok(warnings)
}

/// Stage payoff `u(a_self, a_other, θ)`; identical for both players.
pub fn payoff(a_self: Action, a_other: Action, state: State, game: &StageGame) -> f64 {
    match (a_self, a_other) {
        (Action::Invest, Action::Invest) => game.z + game.y(state),
        (Action::Invest, Action::NotInvest) => game.z,
        (Action::NotInvest, _) => 0.0,
    }
}

/// `ν_i = M` when player `i` plays its component of the target, else 0.
pub fn payment(player: Player, a_self: Action, _a_other: Action, scheme: &IncentiveScheme) -> f64 {
    if a_self == scheme.target.of(player) {
        scheme.payment_m
    } else {
        0.0
    }
}

/// `v_i = u_i + ν_i`.
pub fn modified_utility(
    player: Player,
    a_self: Action,
    a_other: Action,
    state: State,
    game: &StageGame,
    scheme: &IncentiveScheme,
) -> f64 {
    payoff(a_self, a_other, state, game) + payment(player, a_self, a_other, scheme)
}

/// Per-signal joint-action summary: `alpha` = P(a player invests | s),
/// `gamma` = P(both invest | s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalResponse {
    pub alpha: f64,
    pub gamma: f64,
}

impl SignalResponse {
    pub const VERTEX_A: SignalResponse = SignalResponse {
        alpha: 1.0,
        gamma: 1.0,
    };
    pub const VERTEX_B: SignalResponse = SignalResponse {
        alpha: 0.5,
        gamma: 0.0,
    };
    pub const VERTEX_C: SignalResponse = SignalResponse {
        alpha: 0.0,
        gamma: 0.0,
    };

    pub fn new(alpha: f64, gamma: f64) -> Self {
        Self { alpha, gamma }
    }

    /// Probability of `(a1, a2)` under the symmetric joint matrix
    /// `[[γ, α−γ], [α−γ, 1−2α+γ]]`.
    pub fn joint(&self, a1: Action, a2: Action) -> f64 {
        match (a1, a2) {
            (Action::Invest, Action::Invest) => self.gamma,
            (Action::Invest, Action::NotInvest) | (Action::NotInvest, Action::Invest) => {
                self.alpha - self.gamma
            }
            (Action::NotInvest, Action::NotInvest) => 1.0 - 2.0 * self.alpha + self.gamma,
        }
    }

    pub fn check_feasible(&self, signal: Signal) -> Result<()> {
        let SignalResponse { alpha, gamma } = *self;
        let tol = FEASIBILITY_TOL;
        let fail = |reason: String| {
            Err(Error::Infeasible {
                signal: signal.letter(),
                reason,
            })
        };
        if !(alpha.is_finite() && gamma.is_finite()) {
            return fail("non-finite probability".into());
        }
        if gamma < -tol || gamma > alpha + tol || alpha > 1.0 + tol {
            return fail(format!(
                "need 0 <= gamma <= alpha <= 1, got alpha={alpha}, gamma={gamma}"
            ));
        }
        if 1.0 - 2.0 * alpha + gamma < -tol {
            return fail(format!(
                "need 1 - 2 alpha + gamma >= 0, got alpha={alpha}, gamma={gamma}"
            ));
        }
        Ok(())
    }
}

/// Symmetric follower strategy `(α_g, γ_g, α_b, γ_b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FollowerStrategy {
    pub good: SignalResponse,
    pub bad: SignalResponse,
}

impl FollowerStrategy {
    pub fn new(alpha_g: f64, gamma_g: f64, alpha_b: f64, gamma_b: f64) -> Self {
        Self {
            good: SignalResponse::new(alpha_g, gamma_g),
            bad: SignalResponse::new(alpha_b, gamma_b),
        }
    }

    pub fn for_signal(&self, signal: Signal) -> SignalResponse {
        match signal {
            Signal::Good => self.good,
            Signal::Bad => self.bad,
        }
    }

    pub fn as_tuple(&self) -> (f64, f64, f64, f64) {
        (
            self.good.alpha,
            self.good.gamma,
            self.bad.alpha,
            self.bad.gamma,
        )
    }

    pub fn check_feasible(&self) -> Result<()> {
        self.good.check_feasible(Signal::Good)?;
        self.bad.check_feasible(Signal::Bad)
    }
}

/// Closed-form expected stage utility of either player.
pub fn expected_utility(
    strategy: &FollowerStrategy,
    policy: &SignalingPolicy,
    game: &StageGame,
) -> Result<f64> {
    strategy.check_feasible()?;
    policy.validate()?;
    let StageGame {
        psi,
        z,
        y_good,
        y_bad,
    } = *game;
    let (ag, gg, ab, gb) = strategy.as_tuple();
    let (alpha, beta) = (policy.alpha, policy.beta);
    Ok(psi * alpha * (gg * y_good + ag * z)
        + psi * (1.0 - alpha) * (gb * y_good + ab * z)
        + (1.0 - psi) * beta * (gg * y_bad + ag * z)
        + (1.0 - psi) * (1.0 - beta) * (gb * y_bad + ab * z))
}
