//! The repeated game: each round a state is drawn, the mediator emits a
//! public signal, and each player's learner for that signal picks an action
//! and is paid its (normalized) modified utility.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bandit::{normalize_gain, theory_params, Exp3p, Exp3pConfig, LearnerState};
use crate::error::{Error, Result};
use crate::game::{
    modified_utility, payment, Action, GameParams, IncentiveScheme, Player, Signal, StageGame,
    State,
};
use crate::stackelberg::{SignalingPolicy, StackelbergSolution};

/// Odd 64-bit golden-ratio constant used to split run seeds.
pub const SEED_SPLIT: u64 = 0x9E37_79B9_7F4A_7C15;

const STREAM_STATE: u64 = 0;
const STREAM_SIGNAL: u64 = 1;
const STREAM_PLAYER_1: u64 = 2;
const STREAM_PLAYER_2: u64 = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// `(1/2, 1/2)` under every signal.
    #[default]
    Uniform,
    /// Marginals of the Stackelberg follower strategy, floored.
    Stackelberg,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Tuning {
    /// Use the template's `η`, `γ`, `β` as given.
    #[default]
    Fixed,
    /// Derive `η`, `γ`, `β` per learner from the horizon and its prior on `I`.
    Theory { delta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerTemplate {
    pub learning_rate: f64,
    pub exploration: f64,
    pub bias: f64,
    pub tuning: Tuning,
}

impl Default for LearnerTemplate {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            exploration: 0.0,
            bias: 0.0,
            tuning: Tuning::Fixed,
        }
    }
}

impl LearnerTemplate {
    fn instantiate(&self, initial_dist: [f64; 2], horizon: u64) -> Result<Exp3pConfig> {
        let (learning_rate, exploration, bias) = match self.tuning {
            Tuning::Fixed => (self.learning_rate, self.exploration, self.bias),
            Tuning::Theory { delta } => {
                let pi_star = initial_dist[Action::Invest.index()];
                let t = theory_params(horizon, 2, delta, pi_star)?;
                (t.learning_rate, t.exploration, t.bias)
            }
        };
        let config = Exp3pConfig {
            num_arms: 2,
            learning_rate,
            exploration,
            bias,
            initial_dist: initial_dist.to_vec(),
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: GameParams,
    pub scheme: IncentiveScheme,
    pub policy: SignalingPolicy,
    pub horizon: u64,
    pub init_mode: InitMode,
    /// Required when `init_mode` is `Stackelberg`.
    pub se: Option<StackelbergSolution>,
    pub floor: f64,
    pub learner: LearnerTemplate,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(params: GameParams, scheme: IncentiveScheme, policy: SignalingPolicy) -> Self {
        Self {
            params,
            scheme,
            policy,
            horizon: 100_000,
            init_mode: InitMode::Uniform,
            se: None,
            floor: 0.01,
            learner: LearnerTemplate::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<StageGame> {
        let game = self.params.resolve()?;
        self.scheme.validate()?;
        self.policy.validate()?;
        if self.horizon < 1 {
            return Err(Error::invalid("horizon", "must be >= 1"));
        }
        if !(self.floor > 0.0 && self.floor < 0.5) {
            return Err(Error::invalid(
                "floor",
                format!("must lie in (0, 0.5), got {}", self.floor),
            ));
        }
        if self.init_mode == InitMode::Stackelberg && self.se.is_none() {
            return Err(Error::MissingEquilibrium);
        }
        Ok(game)
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("run config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

/// Seed of run `r` in a batch.
pub fn run_seed(base: u64, run: usize) -> u64 {
    base ^ (run as u64).wrapping_mul(SEED_SPLIT)
}

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Static range of every modified utility, `[min(0, z + y_B), z + y_G + M]`.
pub fn gain_bounds(game: &StageGame, scheme: &IncentiveScheme) -> (f64, f64) {
    (
        (game.z + game.y_bad).min(0.0),
        game.z + game.y_good + scheme.payment_m,
    )
}

pub fn sample_state<R: Rng + ?Sized>(psi: f64, rng: &mut R) -> State {
    if rng.gen::<f64>() < psi {
        State::Good
    } else {
        State::Bad
    }
}

pub fn sample_signal<R: Rng + ?Sized>(
    state: State,
    policy: &SignalingPolicy,
    rng: &mut R,
) -> Signal {
    if rng.gen::<f64>() < policy.prob(Signal::Good, state) {
        Signal::Good
    } else {
        Signal::Bad
    }
}

/// Initial action distributions `[P(I), P(N)]`, indexed `[player][signal]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialDistributions(pub [[[f64; 2]; 2]; 2]);

impl InitialDistributions {
    /// Same distribution for both players.
    pub fn symmetric(good: [f64; 2], bad: [f64; 2]) -> Self {
        Self([[good, bad], [good, bad]])
    }

    pub fn get(&self, player: Player, signal: Signal) -> [f64; 2] {
        self.0[player.index()][signal.index()]
    }
}

pub fn build_initial_distributions(
    mode: InitMode,
    se: Option<&StackelbergSolution>,
    floor: f64,
) -> Result<InitialDistributions> {
    match mode {
        InitMode::Uniform => Ok(InitialDistributions::symmetric([0.5, 0.5], [0.5, 0.5])),
        InitMode::Stackelberg => {
            let se = se.ok_or(Error::MissingEquilibrium)?;
            if !(floor > 0.0 && floor < 0.5) {
                return Err(Error::invalid(
                    "floor",
                    format!("must lie in (0, 0.5), got {floor}"),
                ));
            }
            let marginal = |s: Signal| {
                let p = se.follower.for_signal(s).alpha.clamp(floor, 1.0 - floor);
                [p, 1.0 - p]
            };
            Ok(InitialDistributions::symmetric(
                marginal(Signal::Good),
                marginal(Signal::Bad),
            ))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based round index.
    pub t: u64,
    pub state: State,
    pub signal: Signal,
    pub a1: Action,
    pub a2: Action,
    /// Modified utilities `v_i`.
    pub r1: f64,
    pub r2: f64,
    pub pay1: f64,
    pub pay2: f64,
}

impl RoundRecord {
    pub fn action(&self, player: Player) -> Action {
        match player {
            Player::One => self.a1,
            Player::Two => self.a2,
        }
    }

    pub fn opponent_action(&self, player: Player) -> Action {
        match player {
            Player::One => self.a2,
            Player::Two => self.a1,
        }
    }

    pub fn reward(&self, player: Player) -> f64 {
        match player {
            Player::One => self.r1,
            Player::Two => self.r2,
        }
    }

    pub fn payment(&self, player: Player) -> f64 {
        match player {
            Player::One => self.pay1,
            Player::Two => self.pay2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub config_hash: String,
    pub run: usize,
    pub seed: u64,
    pub game: StageGame,
    pub scheme: IncentiveScheme,
    pub policy: SignalingPolicy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<RoundRecord>,
    /// Final learner states, indexed `[player][signal]`.
    pub final_learners: [[LearnerState; 2]; 2],
    pub meta: TraceMeta,
}

/// Everything needed to drive an episode, with no range checks on the game.
#[derive(Clone, Debug)]
pub struct EpisodeSetup {
    pub game: StageGame,
    pub scheme: IncentiveScheme,
    pub policy: SignalingPolicy,
    pub horizon: u64,
    pub initial: InitialDistributions,
    pub learner: LearnerTemplate,
    pub seed: u64,
}

/// A single run advanced one round at a time.
pub struct Episode {
    game: StageGame,
    scheme: IncentiveScheme,
    policy: SignalingPolicy,
    horizon: u64,
    bounds: (f64, f64),
    learners: [[Exp3p; 2]; 2],
    state_rng: ChaCha8Rng,
    signal_rng: ChaCha8Rng,
    player_rngs: [ChaCha8Rng; 2],
    t: u64,
}

impl Episode {
    pub fn new(config: &RunConfig) -> Result<Self> {
        let game = config.validate()?;
        let initial =
            build_initial_distributions(config.init_mode, config.se.as_ref(), config.floor)?;
        Self::from_setup(EpisodeSetup {
            game,
            scheme: config.scheme,
            policy: config.policy,
            horizon: config.horizon,
            initial,
            learner: config.learner,
            seed: config.seed,
        })
    }

    /// Builds an episode from explicit parts. The stage game and initial
    /// distributions are used as given, which allows degenerate priors and
    /// boundary values of `ψ` in tests.
    pub fn from_setup(setup: EpisodeSetup) -> Result<Self> {
        let learner = |player, signal| -> Result<Exp3p> {
            let dist = setup.initial.get(player, signal);
            Exp3p::new(setup.learner.instantiate(dist, setup.horizon)?)
        };
        let learners = [
            [
                learner(Player::One, Signal::Good)?,
                learner(Player::One, Signal::Bad)?,
            ],
            [
                learner(Player::Two, Signal::Good)?,
                learner(Player::Two, Signal::Bad)?,
            ],
        ];
        Ok(Self {
            game: setup.game,
            scheme: setup.scheme,
            policy: setup.policy,
            horizon: setup.horizon,
            bounds: gain_bounds(&setup.game, &setup.scheme),
            learners,
            state_rng: substream(setup.seed, STREAM_STATE),
            signal_rng: substream(setup.seed, STREAM_SIGNAL),
            player_rngs: [
                substream(setup.seed, STREAM_PLAYER_1),
                substream(setup.seed, STREAM_PLAYER_2),
            ],
            t: 0,
        })
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Rounds played so far.
    pub fn round(&self) -> u64 {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.t >= self.horizon
    }

    pub fn learner(&self, player: Player, signal: Signal) -> &Exp3p {
        &self.learners[player.index()][signal.index()]
    }

    pub fn step(&mut self) -> Result<RoundRecord> {
        let state = sample_state(self.game.psi, &mut self.state_rng);
        let signal = sample_signal(state, &self.policy, &mut self.signal_rng);
        let s = signal.index();
        let arm1 = self.learners[0][s].sample(&mut self.player_rngs[0]);
        let arm2 = self.learners[1][s].sample(&mut self.player_rngs[1]);
        let (a1, a2) = (Action::from_index(arm1), Action::from_index(arm2));

        let r1 = modified_utility(Player::One, a1, a2, state, &self.game, &self.scheme);
        let r2 = modified_utility(Player::Two, a2, a1, state, &self.game, &self.scheme);
        let pay1 = payment(Player::One, a1, a2, &self.scheme);
        let pay2 = payment(Player::Two, a2, a1, &self.scheme);

        let (lo, hi) = self.bounds;
        self.learners[0][s].update(arm1, normalize_gain(r1, lo, hi)?)?;
        self.learners[1][s].update(arm2, normalize_gain(r2, lo, hi)?)?;

        self.t += 1;
        Ok(RoundRecord {
            t: self.t,
            state,
            signal,
            a1,
            a2,
            r1,
            r2,
            pay1,
            pay2,
        })
    }

    pub fn final_learners(&self) -> [[LearnerState; 2]; 2] {
        let st = |p: usize, s: usize| self.learners[p][s].state().clone();
        [[st(0, 0), st(0, 1)], [st(1, 0), st(1, 1)]]
    }
}

/// Plays one run to the horizon.
pub fn run_episode(config: &RunConfig) -> Result<RunTrace> {
    run_indexed(config, 0, config.hash())
}

fn run_indexed(config: &RunConfig, run: usize, config_hash: String) -> Result<RunTrace> {
    let seed = run_seed(config.seed, run);
    let mut cfg = config.clone();
    cfg.seed = seed;
    let game = cfg.validate()?;
    let mut episode = Episode::new(&cfg)?;
    let mut records = Vec::with_capacity(cfg.horizon as usize);
    while !episode.is_done() {
        records.push(episode.step()?);
    }
    Ok(RunTrace {
        records,
        final_learners: episode.final_learners(),
        meta: TraceMeta {
            config_hash,
            run,
            seed,
            game,
            scheme: cfg.scheme,
            policy: cfg.policy,
        },
    })
}

/// Runs `runs` independent episodes in parallel; output is in run order.
pub fn run_batch(config: &RunConfig, runs: usize) -> Result<Vec<RunTrace>> {
    run_batch_map(config, 0..runs, |_, trace| trace)
}

/// Like [`run_batch`] but reduces each trace with `f` as soon as it is
/// produced, so full traces never need to be held together.
pub fn run_batch_map<T, F>(
    config: &RunConfig,
    runs: impl IntoIterator<Item = usize>,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, RunTrace) -> T + Sync,
{
    config.validate()?;
    let hash = config.hash();
    let runs: Vec<usize> = runs.into_iter().collect();
    runs.into_par_iter()
        .map(|r| run_indexed(config, r, hash.clone()).map(|trace| f(r, trace)))
        .collect()
}

pub const TRACE_HEADER: &str = "run,t,state,signal,a1,a2,r1,r2,pay1,pay2";

/// Appends the rows of one trace in long format (no header).
pub fn write_trace_rows<W: Write>(out: &mut W, trace: &RunTrace) -> std::io::Result<()> {
    for r in &trace.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            trace.meta.run, r.t, r.state, r.signal, r.a1, r.a2, r.r1, r.r2, r.pay1, r.pay2
        )?;
    }
    Ok(())
}

pub fn write_traces_csv<W: Write>(out: &mut W, traces: &[RunTrace]) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for trace in traces {
        write_trace_rows(out, trace)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{payoff, ActionProfile, FollowerStrategy};
    use crate::stackelberg::{solve_stackelberg, CaseLabel, SolverOptions};

    fn payment_game() -> RunConfig {
        let mut c = RunConfig::new(
            GameParams::direct(0.7, 0.2, 1.0, -0.05),
            IncentiveScheme::new(0.24, ActionProfile::INVEST_BOTH),
            SignalingPolicy::new(0.7, 0.7),
        );
        c.horizon = 2_000;
        c.seed = 42;
        c
    }

    fn se_with(follower: FollowerStrategy) -> StackelbergSolution {
        let mut se = solve_stackelberg(
            &payment_game().params.resolve().unwrap(),
            &SolverOptions::default(),
        )
        .unwrap();
        se.follower = follower;
        se.case_label = CaseLabel::of(&follower).unwrap();
        se
    }

    #[test]
    fn state_sampling() {
        let mut rng = substream(9, 0);
        assert!((0..1000).all(|_| sample_state(1.0, &mut rng) == State::Good));
        assert!((0..1000).all(|_| sample_state(0.0, &mut rng) == State::Bad));
        let n = 1_000_000;
        let good = (0..n)
            .filter(|_| sample_state(0.7, &mut rng) == State::Good)
            .count();
        let freq = good as f64 / n as f64;
        assert!((0.6986..=0.7014).contains(&freq), "{freq}");
    }

    #[test]
    fn signal_sampling() {
        let mut rng = substream(9, 1);
        let always = SignalingPolicy::new(1.0, 0.0);
        assert!((0..1000).all(|_| sample_signal(State::Good, &always, &mut rng) == Signal::Good));
        assert!((0..1000).all(|_| sample_signal(State::Bad, &always, &mut rng) == Signal::Bad));

        let policy = SignalingPolicy::new(0.7, 0.7);
        let n = 1_000_000;
        for psi in [0.2, 0.9] {
            let mut state_rng = substream(3, 0);
            let g = (0..n)
                .filter(|_| {
                    let s = sample_state(psi, &mut state_rng);
                    sample_signal(s, &policy, &mut rng) == Signal::Good
                })
                .count();
            let freq = g as f64 / n as f64;
            let sd = (0.7f64 * 0.3 / n as f64).sqrt();
            assert!((freq - 0.7).abs() <= 3.0 * sd, "{freq}");
        }
    }

    #[test]
    fn initial_distributions() {
        let u = build_initial_distributions(InitMode::Uniform, None, 0.01).unwrap();
        for p in Player::BOTH {
            for s in Signal::ALL {
                assert_eq!(u.get(p, s), [0.5, 0.5]);
            }
        }
        let se = se_with(FollowerStrategy::new(1.0, 1.0, 1.0, 1.0));
        let d = build_initial_distributions(InitMode::Stackelberg, Some(&se), 0.01).unwrap();
        assert_eq!(d.get(Player::One, Signal::Good), [0.99, 1.0 - 0.99]);
        assert_eq!(d.get(Player::Two, Signal::Bad), [0.99, 1.0 - 0.99]);

        let se = se_with(FollowerStrategy::new(0.5, 0.0, 1.0, 1.0));
        let d = build_initial_distributions(InitMode::Stackelberg, Some(&se), 0.01).unwrap();
        assert_eq!(d.get(Player::One, Signal::Good), [0.5, 0.5]);
        assert_eq!(d.get(Player::One, Signal::Bad)[0], 0.99);

        assert!(matches!(
            build_initial_distributions(InitMode::Stackelberg, None, 0.01),
            Err(Error::MissingEquilibrium)
        ));
    }

    #[test]
    fn forced_round() {
        let setup = EpisodeSetup {
            game: StageGame {
                psi: 1.0,
                z: 0.2,
                y_good: 1.0,
                y_bad: -0.05,
            },
            scheme: IncentiveScheme::new(0.24, ActionProfile::INVEST_BOTH),
            policy: SignalingPolicy::new(1.0, 0.0),
            horizon: 1,
            initial: InitialDistributions::symmetric([1.0, 1e-300], [1.0, 1e-300]),
            learner: LearnerTemplate::default(),
            seed: 5,
        };
        let mut ep = Episode::from_setup(setup).unwrap();
        let r = ep.step().unwrap();
        assert!(ep.is_done());
        assert_eq!(
            (r.t, r.state, r.signal, r.a1, r.a2),
            (1, State::Good, Signal::Good, Action::Invest, Action::Invest)
        );
        assert_eq!(r.r1, 0.2 + 1.0 + 0.24);
        assert_eq!((r.pay1, r.pay2), (0.24, 0.24));
    }

    #[test]
    fn traces_are_deterministic_and_consistent() {
        let c = payment_game();
        let a = run_episode(&c).unwrap();
        let b = run_episode(&c).unwrap();
        assert_eq!(a, b);
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        write_traces_csv(&mut buf_a, std::slice::from_ref(&a)).unwrap();
        write_traces_csv(&mut buf_b, &[b]).unwrap();
        assert_eq!(buf_a, buf_b);
        let text = String::from_utf8(buf_a).unwrap();
        assert!(text.starts_with(TRACE_HEADER));
        assert_eq!(text.lines().count(), c.horizon as usize + 1);

        let game = c.params.resolve().unwrap();
        assert_eq!(a.records.len(), c.horizon as usize);
        for (i, r) in a.records.iter().enumerate() {
            assert_eq!(r.t, i as u64 + 1);
            assert_eq!(
                r.r1,
                modified_utility(Player::One, r.a1, r.a2, r.state, &game, &c.scheme)
            );
            assert_eq!(
                r.r2,
                modified_utility(Player::Two, r.a2, r.a1, r.state, &game, &c.scheme)
            );
            assert_eq!(r.r1, payoff(r.a1, r.a2, r.state, &game) + r.pay1);
        }
        assert_eq!(a.meta.policy, c.policy);
        assert_eq!(a.meta.scheme, c.scheme);
        assert_eq!(a.meta.config_hash, c.hash());
    }

    #[test]
    fn per_signal_isolation() {
        let mut ep = Episode::new(&payment_game()).unwrap();
        for _ in 0..2_000 {
            let before: Vec<_> = Player::BOTH
                .iter()
                .flat_map(|&p| Signal::ALL.map(|s| ep.learner(p, s).state().clone()))
                .collect();
            let r = ep.step().unwrap();
            let mut i = 0;
            for p in Player::BOTH {
                for s in Signal::ALL {
                    let after = ep.learner(p, s).state();
                    if s == r.signal {
                        assert_eq!(after.round, before[i].round + 1);
                    } else {
                        assert_eq!(after, &before[i]);
                    }
                    i += 1;
                }
            }
        }
    }

    #[test]
    fn batches() {
        let c = payment_game();
        let one = run_batch(&c, 1).unwrap();
        assert_eq!(one[0], run_episode(&c).unwrap());

        let mut small = c.clone();
        small.horizon = 300;
        let a = run_batch(&small, 50).unwrap();
        let b = run_batch(&small, 50).unwrap();
        assert_eq!(a, b);
        let actions: std::collections::HashSet<Vec<(Action, Action)>> = a
            .iter()
            .map(|t| t.records.iter().map(|r| (r.a1, r.a2)).collect())
            .collect();
        assert_eq!(actions.len(), 50);
        for (r, t) in a.iter().enumerate() {
            assert_eq!(t.meta.run, r);
            assert_eq!(t.meta.seed, run_seed(c.seed, r));
        }
    }

    #[test]
    fn state_frequency_tracks_prior() {
        let mut c = payment_game();
        c.horizon = 100_000;
        let freqs = run_batch_map(&c, 0..20, |_, t| {
            t.records.iter().filter(|r| r.state == State::Good).count() as f64 / 1e5
        })
        .unwrap();
        let close = freqs.iter().filter(|f| (*f - 0.7).abs() <= 0.005).count();
        assert!(close >= 19, "{freqs:?}");
    }

    #[test]
    fn stackelberg_mode_requires_equilibrium() {
        let mut c = payment_game();
        c.init_mode = InitMode::Stackelberg;
        assert!(matches!(run_episode(&c), Err(Error::MissingEquilibrium)));
        c.se = Some(se_with(FollowerStrategy::new(1.0, 1.0, 1.0, 1.0)));
        let t = run_episode(&c).unwrap();
        assert_eq!(t.records.len(), c.horizon as usize);
    }

    #[test]
    fn theory_tuning_runs() {
        let mut c = payment_game();
        c.learner.tuning = Tuning::Theory { delta: 0.05 };
        let t = run_episode(&c).unwrap();
        assert_eq!(t.records.len(), c.horizon as usize);
    }

    #[test]
    fn config_validation() {
        let mut c = payment_game();
        c.floor = 0.5;
        assert!(run_episode(&c).is_err());
        let mut c = payment_game();
        c.horizon = 0;
        assert!(run_episode(&c).is_err());
        let mut c = payment_game();
        c.params.psi = 1.0;
        assert!(run_episode(&c).is_err());
    }

    #[test]
    fn hash_tracks_fields() {
        let a = payment_game();
        let mut b = payment_game();
        assert_eq!(a.hash(), b.hash());
        b.scheme.payment_m = 0.25;
        assert_ne!(a.hash(), b.hash());
    }
}
