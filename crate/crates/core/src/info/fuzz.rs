//! Randomized scenarios for checking the duality relation and Holevo dominance.
//!
//! Detector states are normalized standard complex normals (uniform on the
//! complex sphere); path weights are flat-Dirichlet; POVMs are
//! `S^{-1/2} M_i† M_i S^{-1/2}` with `S = Σ M_i† M_i` for Gaussian `M_i`.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use super::analyze_scenario;
use crate::error::{Error, Result};
use crate::game::{AnswerMap, GameScenario, ScenarioParts};
use crate::measure::{OutcomeLabel, Povm, PovmElement, SeedStream};
use crate::qcore::{eig_hermitian, ComplexMatrix, ProbDist, PureState, C64};
use crate::states::DetectorFamily;

/// Allowed detector dimensions for the fuzz suite.
pub const DIM_RANGE: std::ops::RangeInclusive<usize> = 2..=8;
pub const MAX_OUTCOMES: usize = 8;
/// Tolerance for both checked inequalities.
pub const VIOLATION_TOL: f64 = 1e-9;

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> Result<PureState> {
    let dim = dims.iter().product();
    PureState::normalized(
        dims.to_vec(),
        (0..dim).map(|_| complex_normal(rng)).collect(),
    )
}

pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<ProbDist> {
    let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    ProbDist::new(raw.into_iter().map(|x| x / total).collect())
}

pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> Result<Povm> {
    if outcomes == 0 {
        return Err(Error::Arg("a POVM needs at least one outcome".into()));
    }
    let grams = (0..outcomes)
        .map(|_| {
            let m = ComplexMatrix::from_fn(dim, dim, |_, _| complex_normal(rng))?;
            m.adjoint().matmul(&m)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = grams
        .iter()
        .try_fold(ComplexMatrix::zeros(dim, dim), |acc, g| acc.add(g))?;
    let eig = eig_hermitian(&total.hermitian_part())?;
    let inv_sqrt: Vec<C64> = eig
        .values
        .iter()
        .map(|&l| C64::new(1.0 / l.sqrt(), 0.0))
        .collect();
    let v = &eig.vectors;
    let t = v
        .matmul(&ComplexMatrix::from_diagonal(&inv_sqrt))?
        .matmul(&v.adjoint())?;
    let elements = grams
        .iter()
        .enumerate()
        .map(|(i, g)| {
            Ok(PovmElement {
                label: OutcomeLabel::Single(i),
                operator: t.matmul(g)?.matmul(&t)?.hermitian_part(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::new(elements)
}

/// Random scenario with `paths` paths and `detector_dim`-dimensional detectors.
/// Answer maps name the single index `outcome mod N`; they do not affect the
/// information quantities.
pub fn random_scenario<R: Rng + ?Sized>(
    rng: &mut R,
    paths: usize,
    detector_dim: usize,
) -> Result<GameScenario> {
    let weights = random_weights(rng, paths)?;
    let detectors = DetectorFamily::new(
        (0..paths)
            .map(|_| random_pure_state(rng, &[detector_dim]))
            .collect::<Result<_>>()?,
    )?;
    let bob_outcomes = rng.random_range(2..=MAX_OUTCOMES);
    let alice_outcomes = rng.random_range(2..=MAX_OUTCOMES);
    let bob_povm = random_povm(rng, detector_dim, bob_outcomes)?;
    let alice_phase_povm = random_povm(rng, paths, alice_outcomes)?;
    let singletons = |m: usize| AnswerMap::new((0..m).map(|i| vec![i % paths]).collect());
    GameScenario::new(ScenarioParts {
        weights,
        detectors,
        bob_povm,
        alice_phase_povm,
        ways_answers: singletons(bob_outcomes)?,
        phases_answers: singletons(alice_outcomes)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzConfig {
    pub count: u64,
    pub seed: u64,
    pub min_dim: usize,
    pub max_dim: usize,
    pub path_counts: Vec<usize>,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            count: 1000,
            seed: 1,
            min_dim: 2,
            max_dim: 4,
            path_counts: vec![2, 3, 4],
        }
    }
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Arg("count must be at least 1".into()));
        }
        if self.min_dim > self.max_dim
            || !DIM_RANGE.contains(&self.min_dim)
            || !DIM_RANGE.contains(&self.max_dim)
        {
            return Err(Error::Arg(format!(
                "detector dims {}-{} must lie within {}-{}",
                self.min_dim,
                self.max_dim,
                DIM_RANGE.start(),
                DIM_RANGE.end()
            )));
        }
        if self.path_counts.is_empty() || self.path_counts.contains(&0) {
            return Err(Error::Arg("path counts must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one random scenario; `index` is its seed-stream id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzCase {
    pub index: u64,
    pub paths: usize,
    pub detector_dim: usize,
    pub slack: f64,
    /// `χ_phase − I(X₁:X₂)`
    pub phase_holevo_gap: f64,
    /// `χ_path − I(Y₁:Y₂)`
    pub path_holevo_gap: f64,
}

pub fn run_case(config: &FuzzConfig, index: u64) -> Result<FuzzCase> {
    let mut rng = SeedStream::new(config.seed).with_stream(index).rng();
    let paths = config.path_counts[rng.random_range(0..config.path_counts.len())];
    let detector_dim = rng.random_range(config.min_dim..=config.max_dim);
    let scenario = random_scenario(&mut rng, paths, detector_dim)?;
    let info = analyze_scenario(&scenario)?;
    Ok(FuzzCase {
        index,
        paths,
        detector_dim,
        slack: info.duality.slack,
        phase_holevo_gap: info.phase_holevo - info.duality.phase_information,
        path_holevo_gap: info.path_holevo - info.duality.path_information,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzReport {
    pub config: FuzzConfig,
    pub min_slack: f64,
    pub min_slack_case: u64,
    pub min_holevo_gap: f64,
    /// Stream ids of scenarios with slack below `-VIOLATION_TOL`.
    pub duality_violations: Vec<u64>,
    /// Stream ids of scenarios where some `I` exceeds its `χ` by more than `VIOLATION_TOL`.
    pub holevo_violations: Vec<u64>,
}

impl FuzzReport {
    pub fn violations(&self) -> usize {
        self.duality_violations.len() + self.holevo_violations.len()
    }
}

/// Runs every case on its own stream; the report is independent of thread count.
pub fn run_fuzz(config: &FuzzConfig) -> Result<FuzzReport> {
    config.validate()?;
    let cases = (0..config.count)
        .into_par_iter()
        .map(|i| run_case(config, i))
        .collect::<Result<Vec<_>>>()?;
    let mut report = FuzzReport {
        config: config.clone(),
        min_slack: f64::INFINITY,
        min_slack_case: 0,
        min_holevo_gap: f64::INFINITY,
        duality_violations: Vec::new(),
        holevo_violations: Vec::new(),
    };
    for c in &cases {
        if c.slack < report.min_slack {
            report.min_slack = c.slack;
            report.min_slack_case = c.index;
        }
        let gap = c.phase_holevo_gap.min(c.path_holevo_gap);
        report.min_holevo_gap = report.min_holevo_gap.min(gap);
        if c.slack < -VIOLATION_TOL {
            report.duality_violations.push(c.index);
        }
        if gap < -VIOLATION_TOL {
            report.holevo_violations.push(c.index);
        }
    }
    Ok(report)
}
