//! Mutual information, Holevo quantities and the information duality relation
//! `I(X₁:X₂) + I(Y₁:Y₂) ≤ H({p_j})`.
//!
//! `X₁` is the applied group element and `X₂` Alice's phase-measurement result;
//! `Y₁` is the path Alice finds and `Y₂` Bob's detector result. All logarithms
//! are base 2, and zero-probability cells contribute nothing.

use crate::error::{Error, Result};
use crate::game::GameScenario;
use crate::measure::born_distribution;
use crate::qcore::{
    shannon_entropy, von_neumann_entropy, DensityMatrix, ProbDist, PureState, TAU_EIG, TAU_NORM,
};

pub mod fuzz;

/// Finite joint distribution `p(x, y)`, rows indexed by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    table: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self> {
        let rows = table.len();
        let cols = table.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::Dist("joint table is empty".into()));
        }
        if table.iter().any(|r| r.len() != cols) {
            return Err(Error::Dist("joint table is ragged".into()));
        }
        let mut total = 0.0;
        let mut clean = table;
        for row in &mut clean {
            for p in row.iter_mut() {
                if !p.is_finite() || *p < -TAU_NORM {
                    return Err(Error::Dist(format!("invalid joint probability {p}")));
                }
                *p = p.max(0.0);
                total += *p;
            }
        }
        if (total - 1.0).abs() > TAU_NORM {
            return Err(Error::Dist(format!("joint table sums to {total}")));
        }
        Ok(Self {
            x_labels: (0..rows).map(|i| i.to_string()).collect(),
            y_labels: (0..cols).map(|i| i.to_string()).collect(),
            table: clean,
        })
    }

    /// `p(x, y) = p(x) p(y|x)`.
    pub fn from_conditionals(prior: &ProbDist, conditionals: &[ProbDist]) -> Result<Self> {
        if prior.len() != conditionals.len() {
            return Err(Error::Dist(format!(
                "{} prior entries but {} conditionals",
                prior.len(),
                conditionals.len()
            )));
        }
        let table = prior
            .probs()
            .iter()
            .zip(conditionals)
            .map(|(&px, cond)| cond.probs().iter().map(|&q| px * q).collect())
            .collect();
        Self::new(table)
    }

    pub fn with_labels(mut self, x_labels: Vec<String>, y_labels: Vec<String>) -> Result<Self> {
        if x_labels.len() != self.table.len() || y_labels.len() != self.table[0].len() {
            return Err(Error::Dist("label count does not match table shape".into()));
        }
        self.x_labels = x_labels;
        self.y_labels = y_labels;
        Ok(self)
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }

    pub fn y_labels(&self) -> &[String] {
        &self.y_labels
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.table[x][y]
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        self.table.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.table[0].len())
            .map(|y| self.table.iter().map(|r| r[y]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let cols = self.table[0].len();
        Self {
            x_labels: self.y_labels.clone(),
            y_labels: self.x_labels.clone(),
            table: (0..cols)
                .map(|y| self.table.iter().map(|r| r[y]).collect())
                .collect(),
        }
    }
}

/// `I(X:Y) = Σ p(x,y) log₂[p(x,y) / (p(x) p(y))]`.
pub fn mutual_information(joint: &JointDistribution) -> f64 {
    let px = joint.marginal_x();
    let py = joint.marginal_y();
    let mut info = 0.0;
    for (x, row) in joint.table().iter().enumerate() {
        for (y, &p) in row.iter().enumerate() {
            if p > 0.0 {
                info += p * (p / (px[x] * py[y])).log2();
            }
        }
    }
    info.max(0.0)
}

/// Prior-weighted family of states.
#[derive(Debug, Clone)]
pub struct Ensemble {
    priors: ProbDist,
    states: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(priors: ProbDist, states: Vec<DensityMatrix>) -> Result<Self> {
        if priors.len() != states.len() {
            return Err(Error::Dimension(format!(
                "{} priors for {} states",
                priors.len(),
                states.len()
            )));
        }
        if states.iter().any(|s| s.dim() != states[0].dim()) {
            return Err(Error::Dimension(
                "ensemble states differ in dimension".into(),
            ));
        }
        Ok(Self { priors, states })
    }

    pub fn priors(&self) -> &ProbDist {
        &self.priors
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn average(&self) -> Result<DensityMatrix> {
        DensityMatrix::mixture(&self.priors, &self.states)
    }
}

/// `χ = S(Σ p_i ρ_i) − Σ p_i S(ρ_i)`.
pub fn holevo_quantity(e: &Ensemble) -> Result<f64> {
    let mut chi = von_neumann_entropy(&e.average()?)?;
    for (p, rho) in e.priors.probs().iter().zip(&e.states) {
        if *p > 0.0 {
            chi -= p * von_neumann_entropy(rho)?;
        }
    }
    Ok(chi)
}

/// Relative-entropy coherence `H(diag ρ) − S(ρ)`; `weights` must equal the diagonal.
pub fn coherence_rel_entropy(rho: &DensityMatrix, weights: &ProbDist) -> Result<f64> {
    let diag = rho.diagonal();
    if diag.len() != weights.len()
        || diag
            .iter()
            .zip(weights.probs())
            .any(|(d, w)| (d - w).abs() > TAU_EIG)
    {
        return Err(Error::Arg(
            "weights do not match the diagonal of the state".into(),
        ));
    }
    Ok(shannon_entropy(weights) - von_neumann_entropy(rho)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityReport {
    /// `I(X₁:X₂)`
    pub phase_information: f64,
    /// `I(Y₁:Y₂)`
    pub path_information: f64,
    /// `H({p_j})`
    pub path_entropy: f64,
    /// `H − I₁ − I₂`
    pub slack: f64,
    pub passes: bool,
    pub saturated: bool,
}

pub fn duality_check(
    phase_joint: &JointDistribution,
    path_joint: &JointDistribution,
    weights: &ProbDist,
) -> DualityReport {
    let phase_information = mutual_information(phase_joint);
    let path_information = mutual_information(path_joint);
    let path_entropy = shannon_entropy(weights);
    let slack = path_entropy - phase_information - path_information;
    DualityReport {
        phase_information,
        path_information,
        path_entropy,
        slack,
        passes: slack >= -TAU_EIG,
        saturated: slack.abs() <= TAU_EIG,
    }
}

/// Exact `(X₁, X₂)` and `(Y₁, Y₂)` joints of a scenario.
pub fn scenario_joints(s: &GameScenario) -> Result<(JointDistribution, JointDistribution)> {
    let phase_cond = s
        .reduced_path_states()?
        .iter()
        .map(|rho| born_distribution(rho, s.alice_phase_povm()))
        .collect::<Result<Vec<_>>>()?;
    let phase = JointDistribution::from_conditionals(&ProbDist::uniform(s.paths())?, &phase_cond)?;
    let path_cond = s
        .detectors()
        .states()
        .iter()
        .map(|eta| born_distribution(eta, s.bob_povm()))
        .collect::<Result<Vec<_>>>()?;
    let path = JointDistribution::from_conditionals(s.weights(), &path_cond)?;
    Ok((phase, path))
}

/// `{(1/N, ρ_p^{(k)})}` and `{(p_j, |η_j⟩⟨η_j|)}`.
pub fn scenario_ensembles(s: &GameScenario) -> Result<(Ensemble, Ensemble)> {
    let phase = Ensemble::new(ProbDist::uniform(s.paths())?, s.reduced_path_states()?)?;
    let detector = Ensemble::new(
        s.weights().clone(),
        s.detectors()
            .states()
            .iter()
            .map(PureState::density)
            .collect(),
    )?;
    Ok((phase, detector))
}

/// Everything the duality checker reports for one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioInformation {
    pub duality: DualityReport,
    /// Holevo quantity of Alice's phase ensemble.
    pub phase_holevo: f64,
    /// Holevo quantity of Bob's detector ensemble.
    pub path_holevo: f64,
    /// `H({p_j}) − S(ρ_p^{(0)})`
    pub coherence: f64,
}

impl ScenarioInformation {
    /// Both mutual informations stay below their Holevo quantities.
    pub fn holevo_dominated(&self, tol: f64) -> bool {
        self.duality.phase_information <= self.phase_holevo + tol
            && self.duality.path_information <= self.path_holevo + tol
    }
}

pub fn analyze_scenario(s: &GameScenario) -> Result<ScenarioInformation> {
    let (phase_joint, path_joint) = scenario_joints(s)?;
    let duality = duality_check(&phase_joint, &path_joint, s.weights());
    let (phase_ens, det_ens) = scenario_ensembles(s)?;
    let rho0 = &phase_ens.states()[0];
    Ok(ScenarioInformation {
        duality,
        phase_holevo: holevo_quantity(&phase_ens)?,
        path_holevo: holevo_quantity(&det_ens)?,
        coherence: shannon_entropy(s.weights()) - von_neumann_entropy(rho0)?,
    })
}

/// `N` indices split into `n` disjoint sets of equal size `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    total: usize,
    sets: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(total: usize, mut sets: Vec<Vec<usize>>) -> Result<Self> {
        let m = sets.first().map_or(0, Vec::len);
        if total == 0 || m == 0 {
            return Err(Error::Arg(
                "partition needs a non-empty index range and sets".into(),
            ));
        }
        let mut seen = vec![false; total];
        for s in &mut sets {
            if s.len() != m {
                return Err(Error::Arg("partition sets differ in size".into()));
            }
            s.sort_unstable();
            for &i in s.iter() {
                if i >= total || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Arg(format!("index {i} out of range or repeated")));
                }
            }
        }
        if seen.iter().any(|&b| !b) {
            return Err(Error::Arg("partition does not cover every index".into()));
        }
        Ok(Self { total, sets })
    }

    /// Consecutive blocks `{0..m}, {m..2m}, ...`.
    pub fn contiguous(total: usize, count: usize) -> Result<Self> {
        if count == 0 || !total.is_multiple_of(count) {
            return Err(Error::Arg(format!("{count} does not divide {total}")));
        }
        let m = total / count;
        Self::new(
            total,
            (0..count).map(|y| (y * m..(y + 1) * m).collect()).collect(),
        )
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn count(&self) -> usize {
        self.sets.len()
    }

    pub fn set_size(&self) -> usize {
        self.sets[0].len()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// Uniform `X` with `Y` the set containing it.
    pub fn joint(&self) -> JointDistribution {
        let p = 1.0 / self.total as f64;
        let mut table = vec![vec![0.0; self.count()]; self.total];
        for (y, s) in self.sets.iter().enumerate() {
            for &x in s {
                table[x][y] = p;
            }
        }
        JointDistribution::new(table).expect("partition joint is normalized")
    }
}

/// Information gained by learning which set holds a uniform index; equals `log₂ n`.
pub fn partition_mi(p: &Partition) -> f64 {
    mutual_information(&p.joint())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    /// Allowed, with the duality relation met with equality.
    Saturated,
    Infeasible,
}

impl Feasibility {
    pub fn allowed(self) -> bool {
        !matches!(self, Feasibility::Infeasible)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Feasibility::Feasible => "feasible",
            Feasibility::Saturated => "feasible-with-equality",
            Feasibility::Infeasible => "infeasible",
        }
    }
}

/// Necessary condition `log₂ n_ways + log₂ n_phases ≤ log₂ N` for a partition
/// game to be always winnable. It does not construct the measurements.
pub fn partition_feasible(total: usize, n_ways: usize, n_phases: usize) -> Result<Feasibility> {
    for n in [n_ways, n_phases] {
        if n == 0 || total == 0 || !total.is_multiple_of(n) {
            return Err(Error::Arg(format!(
                "{n} sets do not divide {total} indices"
            )));
        }
    }
    let lhs = (n_ways as f64).log2() + (n_phases as f64).log2();
    let rhs = (total as f64).log2();
    Ok(if (lhs - rhs).abs() <= TAU_EIG {
        Feasibility::Saturated
    } else if lhs < rhs {
        Feasibility::Feasible
    } else {
        Feasibility::Infeasible
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionRow {
    pub total: usize,
    pub n_ways: usize,
    pub n_phases: usize,
    pub ways_information: f64,
    pub phases_information: f64,
    pub verdict: Feasibility,
}

impl PartitionRow {
    pub fn symmetric(&self) -> bool {
        self.n_ways == self.n_phases
    }
}

/// Every `N ≤ n_max` and every pair of divisors of `N`.
pub fn scan_partitions(n_max: usize, cap: usize) -> Result<Vec<PartitionRow>> {
    if n_max == 0 || n_max > cap {
        return Err(Error::Arg(format!(
            "n_max must be in 1..={cap}, got {n_max}"
        )));
    }
    let mut rows = Vec::new();
    for total in 1..=n_max {
        let divisors: Vec<usize> = (1..=total).filter(|d| total % d == 0).collect();
        for &n_ways in &divisors {
            for &n_phases in &divisors {
                rows.push(PartitionRow {
                    total,
                    n_ways,
                    n_phases,
                    ways_information: partition_mi(&Partition::contiguous(total, n_ways)?),
                    phases_information: partition_mi(&Partition::contiguous(total, n_phases)?),
                    verdict: partition_feasible(total, n_ways, n_phases)?,
                });
            }
        }
    }
    Ok(rows)
}
