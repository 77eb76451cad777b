//! The Ways/Phases duality game.
//!
//! Each round the House flips a fair coin for the sub-game and draws a group
//! element `k` uniformly, then prepares `(U(a^k) ⊗ I)|Ψ⟩`.
//!
//! - **Phases**: Alice measures her path factor with `alice_phase_povm` and
//!   names the answer set for her outcome; the round is won if `k` is in it.
//! - **Ways**: Alice measures the path in the computational basis, getting
//!   `j`; Bob measures the conditional detector state with `bob_povm` and
//!   names his answer set; the round is won if `j` is in it.
//!
//! Answer sets are explicit per-outcome tables. Size-1 sets give the original
//! exact-answer game; larger sets give the relaxed games that can be won with
//! certainty.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{born_distribution, sample_index, Povm, SeedStream};
use crate::qcore::{ComplexMatrix, DensityMatrix, ProbDist, PureState, DEFAULT_MAX_DIM};
use crate::states::{interferometer_state, reduced_path_state, DetectorFamily, PhaseGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subgame {
    Ways,
    Phases,
}

/// Outcome index → the set of indices the player names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerMap {
    sets: Vec<Vec<usize>>,
    size: usize,
}

impl AnswerMap {
    /// Every set must be non-empty, duplicate-free and of the same size.
    pub fn new(sets: Vec<Vec<usize>>) -> Result<Self> {
        let size = sets
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Scenario("answer map has no outcomes".into()))?;
        if size == 0 {
            return Err(Error::Scenario("answer sets must be non-empty".into()));
        }
        let mut sorted = Vec::with_capacity(sets.len());
        for (i, mut s) in sets.into_iter().enumerate() {
            if s.len() != size {
                return Err(Error::Scenario(format!(
                    "answer set for outcome {i} has {} entries, expected {size}",
                    s.len()
                )));
            }
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Scenario(format!(
                    "answer set for outcome {i} repeats an index"
                )));
            }
            sorted.push(s);
        }
        Ok(Self { sets: sorted, size })
    }

    /// Outcome `i` names every index except `i`: the player lists what was not ruled out.
    pub fn complements(n: usize) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|i| (0..n).filter(|&j| j != i).collect())
                .collect(),
        )
    }

    /// Each outcome names exactly the indices in its POVM label.
    pub fn from_labels(povm: &Povm) -> Result<Self> {
        Self::new(povm.elements().iter().map(|e| e.label.indices()).collect())
    }

    pub fn answer(&self, outcome: usize) -> &[usize] {
        &self.sets[outcome]
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    fn max_index(&self) -> Option<usize> {
        self.sets.iter().flatten().copied().max()
    }
}

/// Raw ingredients of a scenario, validated by [`GameScenario::new`].
#[derive(Debug, Clone)]
pub struct ScenarioParts {
    pub weights: ProbDist,
    pub detectors: DetectorFamily,
    pub bob_povm: Povm,
    pub alice_phase_povm: Povm,
    pub ways_answers: AnswerMap,
    pub phases_answers: AnswerMap,
}

/// One fully specified duality game over `Z_N` with `N` paths.
#[derive(Debug, Clone)]
pub struct GameScenario {
    weights: ProbDist,
    detectors: DetectorFamily,
    group: PhaseGroup,
    bob_povm: Povm,
    alice_phase_povm: Povm,
    ways_answers: AnswerMap,
    phases_answers: AnswerMap,
    state: PureState,
}

impl GameScenario {
    pub fn new(parts: ScenarioParts) -> Result<Self> {
        Self::with_max_dim(parts, DEFAULT_MAX_DIM)
    }

    pub fn with_max_dim(parts: ScenarioParts, max_dim: usize) -> Result<Self> {
        let ScenarioParts {
            weights,
            detectors,
            bob_povm,
            alice_phase_povm,
            ways_answers,
            phases_answers,
        } = parts;
        let n = weights.len();
        let d = detectors.detector_dim();
        if detectors.n_states() != n {
            return Err(Error::Scenario(format!(
                "{n} path weights but {} detector states",
                detectors.n_states()
            )));
        }
        if n.saturating_mul(d) > max_dim {
            return Err(Error::Scenario(format!(
                "path ⊗ detector dimension {n}x{d} exceeds the cap of {max_dim}"
            )));
        }
        if bob_povm.dim() != d {
            return Err(Error::Scenario(format!(
                "Bob's POVM acts on dimension {}, detectors have dimension {d}",
                bob_povm.dim()
            )));
        }
        if alice_phase_povm.dim() != n {
            return Err(Error::Scenario(format!(
                "Alice's phase POVM acts on dimension {}, expected {n}",
                alice_phase_povm.dim()
            )));
        }
        for (name, answers, povm) in [
            ("ways", &ways_answers, &bob_povm),
            ("phases", &phases_answers, &alice_phase_povm),
        ] {
            if answers.len() != povm.len() {
                return Err(Error::Scenario(format!(
                    "{name} answer map has {} entries for {} outcomes",
                    answers.len(),
                    povm.len()
                )));
            }
            if let Some(m) = answers.max_index().filter(|&m| m >= n) {
                return Err(Error::Scenario(format!(
                    "{name} answer names index {m}, N = {n}"
                )));
            }
        }
        let group = PhaseGroup::new(n)?;
        let state = interferometer_state(&weights, &detectors)?;
        Ok(Self {
            weights,
            detectors,
            group,
            bob_povm,
            alice_phase_povm,
            ways_answers,
            phases_answers,
            state,
        })
    }

    pub fn paths(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &ProbDist {
        &self.weights
    }

    pub fn detectors(&self) -> &DetectorFamily {
        &self.detectors
    }

    pub fn group(&self) -> &PhaseGroup {
        &self.group
    }

    pub fn bob_povm(&self) -> &Povm {
        &self.bob_povm
    }

    pub fn alice_phase_povm(&self) -> &Povm {
        &self.alice_phase_povm
    }

    pub fn ways_answers(&self) -> &AnswerMap {
        &self.ways_answers
    }

    pub fn phases_answers(&self) -> &AnswerMap {
        &self.phases_answers
    }

    /// `|Ψ⟩ = Σ_j √p_j |j⟩|η_j⟩`.
    pub fn state(&self) -> &PureState {
        &self.state
    }

    /// `ρ_p^{(k)}` for every `k` in `Z_N`.
    pub fn reduced_path_states(&self) -> Result<Vec<DensityMatrix>> {
        self.group
            .elements()
            .map(|k| reduced_path_state(&self.state, k, &self.group))
            .collect()
    }

    /// Copy with different answer tables (re-validated).
    pub fn with_answers(&self, ways: AnswerMap, phases: AnswerMap) -> Result<Self> {
        Self::new(ScenarioParts {
            weights: self.weights.clone(),
            detectors: self.detectors.clone(),
            bob_povm: self.bob_povm.clone(),
            alice_phase_povm: self.alice_phase_povm.clone(),
            ways_answers: ways,
            phases_answers: phases,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundResult {
    pub subgame: Subgame,
    /// Group element the House applied.
    pub phase: usize,
    /// What the players must cover: the path Alice found (Ways) or `phase` (Phases).
    pub hidden: usize,
    /// POVM outcome index of the answering player.
    pub outcome: usize,
    pub answer: Vec<usize>,
    pub win: bool,
}

/// Per-scenario precomputation shared by all rounds.
///
/// Every distribution a round samples from depends only on the applied group
/// element `k` (and, in Ways, on Alice's path `j`), so all of them are built
/// once from the prepared states `(U(a^k) ⊗ I)|Ψ⟩`.
#[derive(Debug)]
pub struct GameEngine<'s> {
    scenario: &'s GameScenario,
    /// Alice's computational-basis path distribution, per `k`.
    path_outcomes: Vec<ProbDist>,
    /// Bob's outcome distribution on the detector state conditioned on path
    /// `j`, per `k` then `j`; `None` where the path has probability zero.
    detector_outcomes: Vec<Vec<Option<ProbDist>>>,
    /// Born distribution of Alice's phase POVM on `ρ_p^{(k)}`.
    phase_outcomes: Vec<ProbDist>,
}

impl<'s> GameEngine<'s> {
    pub fn new(scenario: &'s GameScenario) -> Result<Self> {
        let d = scenario.detectors.detector_dim();
        let mut path_outcomes = Vec::with_capacity(scenario.paths());
        let mut detector_outcomes = Vec::with_capacity(scenario.paths());
        for k in scenario.group.elements() {
            let local = scenario
                .group
                .unitary(k)?
                .kron_capped(&ComplexMatrix::identity(d), usize::MAX)?;
            let prepared = scenario.state.evolve(&local)?;
            let blocks: Vec<&[_]> = prepared.amplitudes().chunks(d).collect();
            let probs: Vec<f64> = blocks
                .iter()
                .map(|b| b.iter().map(|a| a.norm_sqr()).sum())
                .collect();
            let conditional = blocks
                .iter()
                .zip(&probs)
                .map(|(block, &p)| {
                    if p <= 0.0 {
                        return Ok(None);
                    }
                    // Bob holds the detector state conditioned on Alice's result.
                    let detector = PureState::normalized(vec![d], block.to_vec())?;
                    born_distribution(&detector, &scenario.bob_povm).map(Some)
                })
                .collect::<Result<Vec<_>>>()?;
            path_outcomes.push(ProbDist::new(probs)?);
            detector_outcomes.push(conditional);
        }
        let phase_outcomes = scenario
            .reduced_path_states()?
            .iter()
            .map(|rho| born_distribution(rho, &scenario.alice_phase_povm))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            scenario,
            path_outcomes,
            detector_outcomes,
            phase_outcomes,
        })
    }

    pub fn scenario(&self) -> &GameScenario {
        self.scenario
    }

    pub fn play<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<RoundResult> {
        let s = self.scenario;
        let subgame = if rng.random_bool(0.5) {
            Subgame::Ways
        } else {
            Subgame::Phases
        };
        let phase = rng.random_range(0..s.paths());
        match subgame {
            Subgame::Phases => {
                let outcome = sample_index(&self.phase_outcomes[phase], rng);
                Ok(finish(
                    subgame,
                    phase,
                    phase,
                    outcome,
                    s.phases_answers.answer(outcome),
                ))
            }
            Subgame::Ways => {
                let path = sample_index(&self.path_outcomes[phase], rng);
                let bob = self.detector_outcomes[phase][path]
                    .as_ref()
                    .ok_or_else(|| {
                        Error::State(format!("sampled path {path} has probability zero"))
                    })?;
                let outcome = sample_index(bob, rng);
                Ok(finish(
                    subgame,
                    phase,
                    path,
                    outcome,
                    s.ways_answers.answer(outcome),
                ))
            }
        }
    }
}

fn finish(
    subgame: Subgame,
    phase: usize,
    hidden: usize,
    outcome: usize,
    answer: &[usize],
) -> RoundResult {
    RoundResult {
        subgame,
        phase,
        hidden,
        outcome,
        answer: answer.to_vec(),
        win: answer.contains(&hidden),
    }
}

/// Plays one round on its own seed stream.
pub fn play_round(scenario: &GameScenario, stream: SeedStream) -> Result<RoundResult> {
    GameEngine::new(scenario)?.play(&mut stream.rng())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinProbabilities {
    pub ways: f64,
    pub phases: f64,
    /// `(ways + phases) / 2`
    pub overall: f64,
}

/// Exact win probabilities by summing over hidden values and outcomes.
pub fn exact_win_probability(s: &GameScenario) -> Result<WinProbabilities> {
    let mut ways = 0.0;
    for (j, (&p, eta)) in s
        .weights
        .probs()
        .iter()
        .zip(s.detectors.states())
        .enumerate()
    {
        let dist = born_distribution(eta, &s.bob_povm)?;
        ways += p * covered_mass(&dist, &s.ways_answers, j);
    }
    let n = s.paths() as f64;
    let mut phases = 0.0;
    for (k, rho) in s.reduced_path_states()?.iter().enumerate() {
        let dist = born_distribution(rho, &s.alice_phase_povm)?;
        phases += covered_mass(&dist, &s.phases_answers, k) / n;
    }
    Ok(WinProbabilities {
        ways,
        phases,
        overall: 0.5 * (ways + phases),
    })
}

fn covered_mass(dist: &ProbDist, answers: &AnswerMap, hidden: usize) -> f64 {
    dist.probs()
        .iter()
        .enumerate()
        .filter(|(i, _)| answers.answer(*i).contains(&hidden))
        .map(|(_, p)| p)
        .sum()
}

/// Upper bound `½ + 1/(2√N)` on winning the exact-answer game.
pub fn original_game_bound(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Arg("the game needs at least one path".into()));
    }
    Ok(0.5 + 0.5 / (n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub wins: u64,
    pub trials: u64,
    pub rate: f64,
    /// Binomial standard error `√(r(1−r)/n)`.
    pub stderr: f64,
}

/// Win rate over `trials` rounds; round `i` draws from stream `i` of `seed`,
/// so the result does not depend on how rounds are spread over threads.
pub fn monte_carlo_win_rate(
    s: &GameScenario,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if trials == 0 {
        return Err(Error::Arg("at least one trial is required".into()));
    }
    let engine = GameEngine::new(s)?;
    let base = SeedStream::new(seed);
    let wins = (0..trials)
        .into_par_iter()
        .map(|i| {
            engine
                .play(&mut base.with_stream(i).rng())
                .map(|r| u64::from(r.win))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let rate = wins as f64 / trials as f64;
    let stderr = (rate * (1.0 - rate) / trials as f64).sqrt();
    Ok(MonteCarloEstimate {
        wins,
        trials,
        rate,
        stderr,
    })
}

/// The three canonical scenarios.
pub mod presets {
    use super::*;
    use crate::measure::{
        anti_trine_povm, computational_povm, projective_povm, six_pair_povm, OutcomeLabel,
    };
    use crate::states::{
        fourier_basis, parity_pair_detectors, simplex4_detectors, trine_detectors, PhaseSign,
    };

    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
    pub enum Preset {
        /// Three paths, trine detectors; both players exclude one of three.
        Trine3,
        /// Four paths, simplex detectors; Bob names a pair, Alice a triple.
        SixPair4,
        /// Four paths, parity qubit detector; both players name a pair.
        TwoPair4,
    }

    impl Preset {
        pub const ALL: [Preset; 3] = [Preset::Trine3, Preset::SixPair4, Preset::TwoPair4];

        pub fn name(self) -> &'static str {
            match self {
                Preset::Trine3 => "trine3",
                Preset::SixPair4 => "sixpair4",
                Preset::TwoPair4 => "twopair4",
            }
        }

        pub fn from_name(name: &str) -> Option<Self> {
            Self::ALL.into_iter().find(|p| p.name() == name)
        }

        pub fn scenario(self) -> GameScenario {
            match self {
                Preset::Trine3 => trine3(),
                Preset::SixPair4 => sixpair4(),
                Preset::TwoPair4 => twopair4(),
            }
        }
    }

    fn fourier_povm(n: usize) -> Povm {
        let basis = fourier_basis(n, PhaseSign::Positive).expect("n >= 1");
        projective_povm(&basis, (0..n).map(OutcomeLabel::Single).collect())
            .expect("Fourier basis is orthonormal")
    }

    pub fn trine3() -> GameScenario {
        GameScenario::new(ScenarioParts {
            weights: ProbDist::uniform(3).expect("n > 0"),
            detectors: trine_detectors(),
            bob_povm: anti_trine_povm(),
            alice_phase_povm: fourier_povm(3),
            ways_answers: AnswerMap::complements(3).expect("n > 0"),
            phases_answers: AnswerMap::complements(3).expect("n > 0"),
        })
        .expect("trine scenario is consistent")
    }

    pub fn sixpair4() -> GameScenario {
        let bob = six_pair_povm();
        let ways_answers = AnswerMap::from_labels(&bob).expect("pair labels");
        GameScenario::new(ScenarioParts {
            weights: ProbDist::uniform(4).expect("n > 0"),
            detectors: simplex4_detectors(),
            bob_povm: bob,
            alice_phase_povm: fourier_povm(4),
            ways_answers,
            phases_answers: AnswerMap::complements(4).expect("n > 0"),
        })
        .expect("six-pair scenario is consistent")
    }

    pub fn twopair4() -> GameScenario {
        // Detector |0⟩ flags paths {1,3}, |1⟩ flags {0,2}.
        let mut elements = computational_povm(2).expect("dim 2").elements().to_vec();
        elements[0].label = OutcomeLabel::pair(1, 3);
        elements[1].label = OutcomeLabel::pair(0, 2);
        let bob = Povm::new(elements).expect("relabelled projectors");
        let ways_answers = AnswerMap::from_labels(&bob).expect("pair labels");
        let phases_answers = AnswerMap::new(
            (0..4)
                .map(|j| if j % 2 == 0 { vec![0, 2] } else { vec![1, 3] })
                .collect(),
        )
        .expect("pairs");
        GameScenario::new(ScenarioParts {
            weights: ProbDist::uniform(4).expect("n > 0"),
            detectors: parity_pair_detectors(),
            bob_povm: bob,
            alice_phase_povm: fourier_povm(4),
            ways_answers,
            phases_answers,
        })
        .expect("two-pair scenario is consistent")
    }
}
