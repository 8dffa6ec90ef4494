//! Mediator information design as a Stackelberg game.
//!
//! The mediator (leader) commits to a signaling policy `(α, β)`; the two
//! symmetric players (followers) then pick a per-signal joint-action summary
//! `(α_j, γ_j)` maximizing `A_j α_j + B_j γ_j` over the triangle with vertices
//! `(1, 1)`, `(1/2, 0)` and `(0, 0)`. Each follower subproblem has a closed
//! form, so the leader's problem reduces to a four-way case analysis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{FollowerStrategy, Signal, SignalResponse, StageGame, State};

/// Slack used to resolve follower ties toward the mediator-preferred vertex `(1, 1)`.
///
/// The equilibrium policies sit exactly on the tie `B_j = −A_j/2`, so a strict
/// floating-point comparison would flip the follower on rounding noise.
pub const TIE_TOL: f64 = 1e-12;

/// `α = π(g|G)`, `β = π(g|B)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalingPolicy {
    pub alpha: f64,
    pub beta: f64,
}

impl SignalingPolicy {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(name, format!("must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    /// `π(s | θ)`.
    pub fn prob(&self, signal: Signal, state: State) -> f64 {
        let good = match state {
            State::Good => self.alpha,
            State::Bad => self.beta,
        };
        match signal {
            Signal::Good => good,
            Signal::Bad => 1.0 - good,
        }
    }
}

/// Linear objective coefficients of the two follower subproblems.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FollowerCoefficients {
    pub a_good: f64,
    pub b_good: f64,
    pub a_bad: f64,
    pub b_bad: f64,
}

impl FollowerCoefficients {
    pub fn for_signal(&self, signal: Signal) -> (f64, f64) {
        match signal {
            Signal::Good => (self.a_good, self.b_good),
            Signal::Bad => (self.a_bad, self.b_bad),
        }
    }
}

pub fn follower_coefficients(policy: &SignalingPolicy, game: &StageGame) -> FollowerCoefficients {
    let StageGame {
        psi,
        z,
        y_good,
        y_bad,
    } = *game;
    let (alpha, beta) = (policy.alpha, policy.beta);
    FollowerCoefficients {
        a_good: psi * alpha * z + (1.0 - psi) * beta * z,
        b_good: psi * alpha * y_good + (1.0 - psi) * beta * y_bad,
        a_bad: psi * (1.0 - alpha) * z + (1.0 - psi) * (1.0 - beta) * z,
        b_bad: psi * (1.0 - alpha) * y_good + (1.0 - psi) * (1.0 - beta) * y_bad,
    }
}

/// Closed-form follower best response for one signal.
///
/// `(1, 1)` when `b ≥ −a/2` (ties go to the mediator-preferred vertex),
/// otherwise `(1/2, 0)`.
pub fn solve_follower_subproblem(a: f64, b: f64) -> Result<SignalResponse> {
    if a < 0.0 || a.is_nan() {
        return Err(Error::NegativeCoefficient(a));
    }
    if b + a / 2.0 >= -TIE_TOL {
        Ok(SignalResponse::VERTEX_A)
    } else {
        Ok(SignalResponse::VERTEX_B)
    }
}

fn follower_at(policy: &SignalingPolicy, game: &StageGame) -> Result<FollowerStrategy> {
    let c = follower_coefficients(policy, game);
    Ok(FollowerStrategy {
        good: solve_follower_subproblem(c.a_good, c.b_good)?,
        bad: solve_follower_subproblem(c.a_bad, c.b_bad)?,
    })
}

/// Mediator objective: probability that a player invests, averaged over the
/// signal distribution induced by `policy`.
pub fn mediator_utility(policy: &SignalingPolicy, follower: &FollowerStrategy, psi: f64) -> f64 {
    let (alpha, beta) = (policy.alpha, policy.beta);
    follower.good.alpha * (psi * alpha + (1.0 - psi) * beta)
        + follower.bad.alpha * (psi * (1.0 - alpha) + (1.0 - psi) * (1.0 - beta))
}

/// `−(ψ y_G + z/2) / (1 − ψ)`: the smallest `y_B` for which full investment is
/// an equilibrium under some policy.
pub fn stackelberg_threshold(game: &StageGame) -> f64 {
    -(game.psi * game.y_good + game.z / 2.0) / (1.0 - game.psi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    /// `(1/2, 0)` under both signals.
    Case1,
    /// `(1/2, 0)` under `g`, `(1, 1)` under `b`.
    Case2,
    /// `(1, 1)` under `g`, `(1/2, 0)` under `b`.
    Case3,
    /// `(1, 1)` under both signals.
    Case4,
}

impl CaseLabel {
    /// Label of a follower strategy built from the two non-trivial vertices.
    pub fn of(follower: &FollowerStrategy) -> Option<CaseLabel> {
        let a = |r: SignalResponse| r == SignalResponse::VERTEX_A;
        let b = |r: SignalResponse| r == SignalResponse::VERTEX_B;
        let (g, bd) = (follower.good, follower.bad);
        match () {
            _ if b(g) && b(bd) => Some(CaseLabel::Case1),
            _ if b(g) && a(bd) => Some(CaseLabel::Case2),
            _ if a(g) && b(bd) => Some(CaseLabel::Case3),
            _ if a(g) && a(bd) => Some(CaseLabel::Case4),
            _ => None,
        }
    }
}

/// One Stackelberg outcome: policy, induced follower response and its value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub policy: SignalingPolicy,
    pub follower: FollowerStrategy,
    pub case_label: CaseLabel,
    pub mediator_utility: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackelbergSolution {
    pub policy: SignalingPolicy,
    pub follower: FollowerStrategy,
    pub case_label: CaseLabel,
    pub mediator_utility: f64,
    /// Other equilibria achieving the same mediator utility.
    pub alternates: Vec<Equilibrium>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl StackelbergSolution {
    fn from_selected(
        selected: Equilibrium,
        alternates: Vec<Equilibrium>,
        warnings: Vec<String>,
    ) -> Self {
        Self {
            policy: selected.policy,
            follower: selected.follower,
            case_label: selected.case_label,
            mediator_utility: selected.mediator_utility,
            alternates,
            warnings,
        }
    }

    pub fn selected(&self) -> Equilibrium {
        Equilibrium {
            policy: self.policy,
            follower: self.follower,
            case_label: self.case_label,
            mediator_utility: self.mediator_utility,
        }
    }
}

/// Which of the two sub-threshold equilibria is reported as selected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubThresholdSelection {
    /// `α = 0`: pool the bad signal, mix under the good one.
    #[default]
    Case2,
    /// `α = 1`: always send `g` in the good state.
    Case3,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Free parameter `η` of the full-investment policy `(η, η)`.
    pub case4_eta: f64,
    pub selection: SubThresholdSelection,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            case4_eta: 0.5,
            selection: SubThresholdSelection::Case2,
        }
    }
}

/// The two equilibria of the sub-threshold regime, `[Case 2, Case 3]`.
///
/// The signaling formula is evaluated as-is; components leaving `[0, 1]` are
/// clamped and reported in the returned warnings.
pub fn sub_threshold_equilibria(game: &StageGame) -> Result<([Equilibrium; 2], Vec<String>)> {
    let denom = (1.0 - game.psi) * (-game.y_bad - game.z / 2.0);
    if denom == 0.0 {
        return Err(Error::ThresholdDegenerate);
    }
    let ratio = game.psi * (game.y_good + game.z / 2.0) / denom;
    let mut warnings = Vec::new();
    let mut clamp = |label: &str, v: f64| {
        let c = v.clamp(0.0, 1.0);
        if c != v {
            let w = format!("{label} signaling probability {v} clamped to {c}");
            log::warn!("{w}");
            warnings.push(w);
        }
        c
    };
    let case2_beta = clamp("case 2 beta", 1.0 - ratio);
    let case3_beta = clamp("case 3 beta", ratio);

    let case2 = SignalingPolicy::new(0.0, case2_beta);
    let case3 = SignalingPolicy::new(1.0, case3_beta);
    let f2 = FollowerStrategy::new(0.5, 0.0, 1.0, 1.0);
    let f3 = FollowerStrategy::new(1.0, 1.0, 0.5, 0.0);
    let eq = |policy: SignalingPolicy, follower: FollowerStrategy, case_label| Equilibrium {
        policy,
        follower,
        case_label,
        mediator_utility: mediator_utility(&policy, &follower, game.psi),
    };
    Ok((
        [
            eq(case2, f2, CaseLabel::Case2),
            eq(case3, f3, CaseLabel::Case3),
        ],
        warnings,
    ))
}

/// Stackelberg equilibrium of the information-design game.
pub fn solve_stackelberg(game: &StageGame, options: &SolverOptions) -> Result<StackelbergSolution> {
    if !(0.0..=1.0).contains(&options.case4_eta) {
        return Err(Error::invalid(
            "case4_eta",
            format!("must lie in [0, 1], got {}", options.case4_eta),
        ));
    }
    if game.y_bad >= stackelberg_threshold(game) {
        let policy = SignalingPolicy::new(options.case4_eta, options.case4_eta);
        let follower = follower_at(&policy, game)?;
        let case_label = CaseLabel::of(&follower).expect("closed form returns a vertex pair");
        let selected = Equilibrium {
            policy,
            follower,
            case_label,
            mediator_utility: mediator_utility(&policy, &follower, game.psi),
        };
        return Ok(StackelbergSolution::from_selected(
            selected,
            Vec::new(),
            Vec::new(),
        ));
    }

    let ([case2, case3], warnings) = sub_threshold_equilibria(game)?;
    // Re-derive each follower at its policy so the reported profile is exactly
    // what the closed-form best response returns there.
    let reconcile = |mut eq: Equilibrium| -> Result<Equilibrium> {
        eq.follower = follower_at(&eq.policy, game)?;
        eq.case_label = CaseLabel::of(&eq.follower).expect("closed form returns a vertex pair");
        eq.mediator_utility = mediator_utility(&eq.policy, &eq.follower, game.psi);
        Ok(eq)
    };
    let (case2, case3) = (reconcile(case2)?, reconcile(case3)?);
    let (selected, other) = match options.selection {
        SubThresholdSelection::Case2 => (case2, case3),
        SubThresholdSelection::Case3 => (case3, case2),
    };
    Ok(StackelbergSolution::from_selected(
        selected,
        vec![other],
        warnings,
    ))
}

/// Follower best response by explicit comparison of the three polygon vertices,
/// ties resolved in the order A, B, C.
pub fn enumerate_vertices(a: f64, b: f64) -> SignalResponse {
    let value = |v: SignalResponse| a * v.alpha + b * v.gamma;
    let (va, vb, vc) = (
        value(SignalResponse::VERTEX_A),
        value(SignalResponse::VERTEX_B),
        value(SignalResponse::VERTEX_C),
    );
    if va >= vb - TIE_TOL && va >= vc - TIE_TOL {
        SignalResponse::VERTEX_A
    } else if vb >= vc - TIE_TOL {
        SignalResponse::VERTEX_B
    } else {
        SignalResponse::VERTEX_C
    }
}

/// Exhaustive search over an `(α, β)` grid with followers solved by vertex
/// enumeration. Independent of the closed-form path; used for verification.
pub fn grid_oracle(game: &StageGame, resolution: usize) -> Result<StackelbergSolution> {
    if resolution < 11 {
        return Err(Error::invalid(
            "resolution",
            format!("must be >= 11, got {resolution}"),
        ));
    }
    let step = 1.0 / (resolution - 1) as f64;
    let mut best: Option<Equilibrium> = None;
    for i in 0..resolution {
        for j in 0..resolution {
            let policy = SignalingPolicy::new(i as f64 * step, j as f64 * step);
            let c = follower_coefficients(&policy, game);
            let follower = FollowerStrategy {
                good: enumerate_vertices(c.a_good, c.b_good),
                bad: enumerate_vertices(c.a_bad, c.b_bad),
            };
            let u = mediator_utility(&policy, &follower, game.psi);
            if best.as_ref().is_none_or(|b| u > b.mediator_utility) {
                best = Some(Equilibrium {
                    policy,
                    follower,
                    // Vertex C can only appear when some A_j = 0; label it Case1
                    // in that degenerate corner.
                    case_label: CaseLabel::of(&follower).unwrap_or(CaseLabel::Case1),
                    mediator_utility: u,
                });
            }
        }
    }
    let best = best.expect("grid is non-empty");
    Ok(StackelbergSolution::from_selected(
        best,
        Vec::new(),
        Vec::new(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameParams;
    use proptest::prelude::*;

    fn game(psi: f64, z: f64, yg: f64, yb: f64) -> StageGame {
        GameParams::direct(psi, z, yg, yb).resolve().unwrap()
    }

    fn payment_game() -> StageGame {
        game(0.7, 0.2, 1.0, -0.05)
    }

    fn mixing_game() -> StageGame {
        game(0.7, 0.2, 0.1, -0.56)
    }

    #[test]
    fn coefficient_examples() {
        let c = follower_coefficients(&SignalingPolicy::new(0.7, 0.7), &payment_game());
        assert!((c.a_good - 0.14).abs() < 1e-12);
        assert!((c.b_good - 0.4795).abs() < 1e-12);

        let c = follower_coefficients(&SignalingPolicy::new(0.0, 0.0), &payment_game());
        assert_eq!((c.a_good, c.b_good), (0.0, 0.0));
        let c = follower_coefficients(&SignalingPolicy::new(1.0, 1.0), &payment_game());
        assert_eq!((c.a_bad, c.b_bad), (0.0, 0.0));
    }

    #[test]
    fn subproblem_examples() {
        assert_eq!(
            solve_follower_subproblem(0.14, 0.4795).unwrap(),
            SignalResponse::VERTEX_A
        );
        assert_eq!(
            solve_follower_subproblem(0.1, -1.0).unwrap(),
            SignalResponse::VERTEX_B
        );
        assert_eq!(
            solve_follower_subproblem(0.2, -0.1).unwrap(),
            SignalResponse::VERTEX_A
        );
        assert!(matches!(
            solve_follower_subproblem(-0.1, 0.0),
            Err(Error::NegativeCoefficient(_))
        ));
    }

    #[test]
    fn mediator_utility_examples() {
        for (a, b) in [(0.0, 0.0), (0.3, 0.9), (1.0, 1.0)] {
            let p = SignalingPolicy::new(a, b);
            let all = FollowerStrategy::new(1.0, 1.0, 1.0, 1.0);
            assert!((mediator_utility(&p, &all, 0.7) - 1.0).abs() < 1e-12);
            let mixed = FollowerStrategy::new(0.5, 0.0, 0.5, 0.0);
            assert!((mediator_utility(&p, &mixed, 0.7) - 0.5).abs() < 1e-12);
        }
        let p = SignalingPolicy::new(1.0, 1.0);
        let f = FollowerStrategy::new(1.0, 1.0, 0.5, 0.0);
        assert_eq!(mediator_utility(&p, &f, 0.4), 1.0);
    }

    #[test]
    fn threshold_examples() {
        assert!((stackelberg_threshold(&payment_game()) + 8.0 / 3.0).abs() < 1e-12);
        assert!((stackelberg_threshold(&mixing_game()) + 0.17 / 0.3).abs() < 1e-12);
        // Limit ψ → 0 with z = 0: numerator vanishes.
        let g = StageGame {
            psi: 0.0,
            z: 0.0,
            y_good: 1.0,
            y_bad: -1.0,
        };
        assert_eq!(stackelberg_threshold(&g), 0.0);
    }

    #[test]
    fn solve_payment_game_is_case4() {
        let sol = solve_stackelberg(&payment_game(), &SolverOptions::default()).unwrap();
        assert_eq!(sol.case_label, CaseLabel::Case4);
        assert_eq!(sol.policy, SignalingPolicy::new(0.5, 0.5));
        assert_eq!(sol.follower, FollowerStrategy::new(1.0, 1.0, 1.0, 1.0));
        assert_eq!(sol.mediator_utility, 1.0);
        assert!(sol.alternates.is_empty());

        let eta = SolverOptions {
            case4_eta: 0.7,
            ..Default::default()
        };
        let sol = solve_stackelberg(&payment_game(), &eta).unwrap();
        assert_eq!(sol.policy, SignalingPolicy::new(0.7, 0.7));
        let c = follower_coefficients(&sol.policy, &payment_game());
        assert!(c.b_good >= -c.a_good / 2.0 && c.b_bad >= -c.a_bad / 2.0);
    }

    #[test]
    fn solve_sub_threshold() {
        let g = game(0.5, 0.2, 1.0, -2.0);
        let opts = SolverOptions {
            selection: SubThresholdSelection::Case3,
            ..Default::default()
        };
        let sol = solve_stackelberg(&g, &opts).unwrap();
        assert_eq!(sol.case_label, CaseLabel::Case3);
        assert_eq!(sol.policy.alpha, 1.0);
        assert!((sol.policy.beta - 0.55 / 0.95).abs() < 1e-12);
        assert_eq!(sol.follower, FollowerStrategy::new(1.0, 1.0, 0.5, 0.0));
        assert_eq!(sol.alternates.len(), 1);
        let alt = &sol.alternates[0];
        assert_eq!(alt.case_label, CaseLabel::Case2);
        assert_eq!(alt.policy.alpha, 0.0);
        assert!((alt.policy.beta - (1.0 - 0.55 / 0.95)).abs() < 1e-12);
        assert!((alt.mediator_utility - sol.mediator_utility).abs() < 1e-12);

        let oracle = grid_oracle(&g, 201).unwrap();
        assert!(sol.mediator_utility >= oracle.mediator_utility - 2.0 / 201.0);

        // Default selection reports Case 2 first.
        let sol = solve_stackelberg(&g, &SolverOptions::default()).unwrap();
        assert_eq!(sol.case_label, CaseLabel::Case2);
    }

    #[test]
    fn mixing_game_sub_threshold_formula_clamps() {
        // Fig. 3 parameters sit just above the threshold, so the solver
        // returns full investment.
        let sol = solve_stackelberg(&mixing_game(), &SolverOptions::default()).unwrap();
        assert_eq!(sol.case_label, CaseLabel::Case4);

        // The sub-threshold formula evaluated anyway gives β = 1 − 0.14/0.138 < 0.
        let ([case2, case3], warnings) = sub_threshold_equilibria(&mixing_game()).unwrap();
        assert_eq!(case2.policy, SignalingPolicy::new(0.0, 0.0));
        assert_eq!(case2.follower, FollowerStrategy::new(0.5, 0.0, 1.0, 1.0));
        assert_eq!(case3.policy, SignalingPolicy::new(1.0, 1.0));
        assert_eq!(warnings.len(), 2);
        let raw: f64 = 1.0 - 0.14 / 0.138;
        assert!(raw < 0.0 && (raw + 0.0145).abs() < 1e-4);
    }

    #[test]
    fn degenerate_threshold() {
        let g = game(0.5, 0.4, 1.0, -0.2);
        assert!(matches!(
            sub_threshold_equilibria(&g),
            Err(Error::ThresholdDegenerate)
        ));
        // The full-investment branch is still well defined there.
        assert_eq!(
            solve_stackelberg(&g, &SolverOptions::default())
                .unwrap()
                .case_label,
            CaseLabel::Case4
        );
    }

    #[test]
    fn oracle_examples() {
        assert!((grid_oracle(&payment_game(), 101).unwrap().mediator_utility - 1.0).abs() < 1e-12);
        let dominant = game(0.5, 0.5, 1.0, -0.1);
        assert!((grid_oracle(&dominant, 101).unwrap().mediator_utility - 1.0).abs() < 1e-12);

        let deep = game(0.5, 0.2, 1.0, -10.0);
        let oracle = grid_oracle(&deep, 101).unwrap();
        let p = oracle.policy;
        let psi = deep.psi;
        let case23 = 0.5 * (psi * p.alpha + (1.0 - psi) * p.beta)
            + (psi * (1.0 - p.alpha) + (1.0 - psi) * (1.0 - p.beta));
        let case32 = (psi * p.alpha + (1.0 - psi) * p.beta)
            + 0.5 * (psi * (1.0 - p.alpha) + (1.0 - psi) * (1.0 - p.beta));
        assert!(
            (oracle.mediator_utility - case23).abs() < 1e-12
                || (oracle.mediator_utility - case32).abs() < 1e-12
        );
        let sol = solve_stackelberg(&deep, &SolverOptions::default()).unwrap();
        assert!(sol.mediator_utility >= oracle.mediator_utility - 2.0 / 101.0);
        assert!(grid_oracle(&deep, 10).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100_000))]

        #[test]
        fn closed_form_matches_vertex_enumeration(a in 0.0..5.0f64, b in -5.0..5.0f64) {
            let closed = solve_follower_subproblem(a, b).unwrap();
            prop_assert_eq!(closed, enumerate_vertices(a, b));
            if a > 0.0 {
                prop_assert_ne!(closed, SignalResponse::VERTEX_C);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn solver_dominates_grid(
            psi in 0.05..0.95f64,
            z in 0.0..1.0f64,
            yg in 0.001..1.0f64,
            yb in -2.0..-0.001f64,
        ) {
            let g = game(psi, z, yg, yb);
            let sol = solve_stackelberg(&g, &SolverOptions::default()).unwrap();
            let oracle = grid_oracle(&g, 51).unwrap();
            prop_assert!(sol.mediator_utility >= oracle.mediator_utility - 2.0 / 51.0);
            prop_assert!((0.0..=1.0).contains(&sol.mediator_utility));
            sol.follower.check_feasible().unwrap();
            prop_assert_eq!(Some(sol.case_label), CaseLabel::of(&sol.follower));
            if sol.case_label == CaseLabel::Case4 {
                prop_assert!((sol.mediator_utility - 1.0).abs() <= 1e-12);
            } else {
                let ([c2, c3], _) = sub_threshold_equilibria(&g).unwrap();
                prop_assert!((c2.mediator_utility - c3.mediator_utility).abs() <= 1e-12);
                prop_assert!((sol.alternates[0].mediator_utility - sol.mediator_utility).abs() <= 1e-12);
            }
        }
    }
}
