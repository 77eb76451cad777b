//! POVMs, the Born rule, seeded sampling and exclusion checks.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qcore::{
    eig_hermitian, ComplexMatrix, DensityMatrix, ProbDist, PureState, C64, TAU_EIG, TAU_HERM,
    TAU_PSD,
};
use crate::states::anti_trine_states;

/// Upper edge of the "near miss" band reported by [`verify_exclusion`].
pub const NEAR_MISS: f64 = 1e-6;

/// Name of a measurement outcome: a path or group element, or a set of them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutcomeLabel {
    Single(usize),
    Pair(usize, usize),
    Set(Vec<usize>),
}

impl OutcomeLabel {
    /// Sorts and deduplicates-checks `indices`, picking the narrowest variant.
    pub fn from_indices(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Arg(format!(
                "repeated index in outcome label {indices:?}"
            )));
        }
        Ok(match indices[..] {
            [] => Self::Set(Vec::new()),
            [a] => Self::Single(a),
            [a, b] => Self::Pair(a, b),
            _ => Self::Set(indices),
        })
    }

    pub fn pair(a: usize, b: usize) -> Self {
        Self::Pair(a.min(b), a.max(b))
    }

    pub fn indices(&self) -> Vec<usize> {
        match self {
            Self::Single(a) => vec![*a],
            Self::Pair(a, b) => vec![*a, *b],
            Self::Set(v) => v.clone(),
        }
    }
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Single(a) => write!(f, "{a}"),
            other => {
                let parts: Vec<String> = other.indices().iter().map(ToString::to_string).collect();
                write!(f, "{{{}}}", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    pub label: OutcomeLabel,
    pub operator: ComplexMatrix,
}

/// Positive operators summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<PovmElement>,
}

impl Povm {
    pub fn new(elements: Vec<PovmElement>) -> Result<Self> {
        let dim = elements
            .first()
            .ok_or_else(|| Error::Arg("POVM needs at least one element".into()))?
            .operator
            .rows();
        let mut total = ComplexMatrix::zeros(dim, dim);
        for (i, e) in elements.iter().enumerate() {
            let op = &e.operator;
            if op.rows() != dim || op.cols() != dim {
                return Err(Error::Dimension(format!(
                    "POVM element {i} is {}x{}, expected {dim}x{dim}",
                    op.rows(),
                    op.cols()
                )));
            }
            if !op.is_hermitian(TAU_HERM) {
                return Err(Error::Arg(format!("POVM element {i} is not Hermitian")));
            }
            let min = eig_hermitian(op)?.values.last().copied().unwrap_or(0.0);
            if min < -TAU_PSD {
                return Err(Error::Arg(format!(
                    "POVM element {i} has negative eigenvalue {min:e}"
                )));
            }
            total = total.add(op)?;
        }
        let defect = total.max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > TAU_EIG {
            return Err(Error::Arg(format!(
                "POVM elements sum to I only within {defect:e}"
            )));
        }
        Ok(Self { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn label(&self, i: usize) -> &OutcomeLabel {
        &self.elements[i].label
    }

    pub fn operator(&self, i: usize) -> &ComplexMatrix {
        &self.elements[i].operator
    }

    /// `‖Σ Π_i − I‖∞` (largest entry).
    pub fn completeness_defect(&self) -> f64 {
        let total = self
            .elements
            .iter()
            .try_fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, e| {
                acc.add(&e.operator)
            })
            .expect("elements share a dimension");
        total.max_abs_diff(&ComplexMatrix::identity(self.dim))
    }
}

/// Bob's trine-exclusion measurement: `Π_j = (2/3)|η̄_j⟩⟨η̄_j|`.
///
/// Outcome `j` never fires on trine state `|η_j⟩`.
pub fn anti_trine_povm() -> Povm {
    let elements = anti_trine_states()
        .states()
        .iter()
        .enumerate()
        .map(|(j, s)| PovmElement {
            label: OutcomeLabel::Single(j),
            operator: s.projector().scale(C64::new(2.0 / 3.0, 0.0)),
        })
        .collect();
    Povm::new(elements).expect("anti-trine POVM is complete")
}

/// All pairs `{j, k}` of `0..4`, lexicographic.
pub fn four_path_pairs() -> [(usize, usize); 6] {
    [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
}

/// Qutrit vectors orthogonal to both simplex states of each pair, keyed by
/// the pair they are orthogonal to.
pub fn pair_orthogonal_states() -> Vec<((usize, usize), PureState)> {
    let h = 3f64.sqrt() / 2.0;
    let r2 = 2f64.sqrt();
    let r3 = 3f64.sqrt();
    let rows: [[f64; 3]; 6] = [
        [0.0, 1.0, 0.0],
        [-h, -0.5, 0.0],
        [h, -0.5, 0.0],
        [h / 3.0, h / r3, h * 2.0 * r2 / 3.0],
        [h / 3.0, -h / r3, h * 2.0 * r2 / 3.0],
        [h * 2.0 / 3.0, 0.0, -h * 2.0 * r2 / 3.0],
    ];
    four_path_pairs()
        .into_iter()
        .zip(rows)
        .map(|(pair, row)| (pair, PureState::from_real(&row).expect("unit vector")))
        .collect()
}

/// Bob's four-path pair measurement on the simplex detectors.
///
/// The element labelled `{j, k}` is `½|ξ⊥⟩⟨ξ⊥|` for the vector orthogonal to
/// the complementary pair, so a click certifies the path lies in `{j, k}`.
pub fn six_pair_povm() -> Povm {
    let perps = pair_orthogonal_states();
    let elements = four_path_pairs()
        .into_iter()
        .map(|(j, k)| {
            let complement: Vec<usize> = (0..4).filter(|&i| i != j && i != k).collect();
            let (_, xi) = perps
                .iter()
                .find(|((a, b), _)| *a == complement[0] && *b == complement[1])
                .expect("every pair has a complement");
            PovmElement {
                label: OutcomeLabel::pair(j, k),
                operator: xi.projector().scale(C64::new(0.5, 0.0)),
            }
        })
        .collect();
    Povm::new(elements).expect("six-pair POVM is complete")
}

/// Rank-one projectors onto an orthonormal basis.
pub fn projective_povm(basis: &[PureState], labels: Vec<OutcomeLabel>) -> Result<Povm> {
    if basis.len() != labels.len() {
        return Err(Error::Arg(format!(
            "{} basis vectors but {} labels",
            basis.len(),
            labels.len()
        )));
    }
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            let got = a.inner(b)?;
            if (got - C64::new(want, 0.0)).norm() > TAU_EIG {
                return Err(Error::Arg(format!(
                    "basis is not orthonormal at ({i}, {j})"
                )));
            }
        }
    }
    let elements = basis
        .iter()
        .zip(labels)
        .map(|(s, label)| PovmElement {
            label,
            operator: s.projector(),
        })
        .collect();
    Povm::new(elements)
}

/// Projective measurement in the computational basis, outcome `j` labelled `j`.
pub fn computational_povm(dim: usize) -> Result<Povm> {
    let basis = (0..dim)
        .map(|j| PureState::basis(dim, j))
        .collect::<Result<Vec<_>>>()?;
    projective_povm(&basis, (0..dim).map(OutcomeLabel::Single).collect())
}

/// Anything the Born rule can be evaluated on.
pub trait BornState {
    fn dim(&self) -> usize;
    /// `Tr(ρ op)` for a Hermitian `op`.
    fn expectation_real(&self, op: &ComplexMatrix) -> Result<f64>;
}

impl BornState for PureState {
    fn dim(&self) -> usize {
        PureState::dim(self)
    }

    fn expectation_real(&self, op: &ComplexMatrix) -> Result<f64> {
        Ok(self.expectation(op)?.re)
    }
}

impl BornState for DensityMatrix {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }

    fn expectation_real(&self, op: &ComplexMatrix) -> Result<f64> {
        Ok(self.expectation(op)?.re)
    }
}

/// `p_i = Tr(ρ Π_i)`.
pub fn born_distribution<S: BornState + ?Sized>(state: &S, povm: &Povm) -> Result<ProbDist> {
    if state.dim() != povm.dim() {
        return Err(Error::Dimension(format!(
            "state of dimension {} measured with a POVM on dimension {}",
            state.dim(),
            povm.dim()
        )));
    }
    let probs = povm
        .elements()
        .iter()
        .map(|e| state.expectation_real(&e.operator))
        .collect::<Result<Vec<_>>>()?;
    ProbDist::new(probs)
}

/// Deterministic random stream: a ChaCha8 generator keyed by `seed` and
/// positioned on stream `stream`. Distinct stream ids never overlap, so
/// independent samplers (rounds, workers, fuzz cases) each take their own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    pub seed: u64,
    pub stream: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Inverse-CDF draw over outcomes in label order.
pub fn sample_index<R: Rng + ?Sized>(dist: &ProbDist, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_supported = 0;
    for (i, &p) in dist.probs().iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_supported = i;
            if u < acc {
                return i;
            }
        }
    }
    // u landed in the round-off gap above the cumulative total
    last_supported
}

/// Samples one POVM outcome on `state`, returning its position and label.
pub fn sample_outcome<'p, S, R>(
    state: &S,
    povm: &'p Povm,
    rng: &mut R,
) -> Result<(usize, &'p OutcomeLabel)>
where
    S: BornState + ?Sized,
    R: Rng + ?Sized,
{
    let dist = born_distribution(state, povm)?;
    let i = sample_index(&dist, rng);
    Ok((i, povm.label(i)))
}

/// A candidate state plus the POVM outcomes expected to rule it out.
pub struct Hypothesis<'a> {
    pub excluded_by: Vec<usize>,
    pub state: &'a dyn BornState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeExclusion {
    pub outcome: usize,
    pub label: OutcomeLabel,
    /// Hypotheses on which this outcome has probability ≤ `TAU_EIG`.
    pub excluded: Vec<usize>,
    /// `(hypothesis, probability)` with probability in `(TAU_EIG, NEAR_MISS]`.
    pub near_misses: Vec<(usize, f64)>,
    /// Hypotheses this outcome should exclude but does not.
    pub failures: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionReport {
    pub outcomes: Vec<OutcomeExclusion>,
    /// Largest probability any outcome assigns to a hypothesis it should exclude.
    pub max_excluded_probability: f64,
    pub passed: bool,
}

/// Checks which hypotheses each outcome rules out.
pub fn verify_exclusion(povm: &Povm, hypotheses: &[Hypothesis<'_>]) -> Result<ExclusionReport> {
    let dists = hypotheses
        .iter()
        .map(|h| born_distribution(h.state, povm))
        .collect::<Result<Vec<_>>>()?;
    let mut max_excluded_probability: f64 = 0.0;
    let mut outcomes = Vec::with_capacity(povm.len());
    for i in 0..povm.len() {
        let mut row = OutcomeExclusion {
            outcome: i,
            label: povm.label(i).clone(),
            excluded: Vec::new(),
            near_misses: Vec::new(),
            failures: Vec::new(),
        };
        for (h, (hyp, dist)) in hypotheses.iter().zip(&dists).enumerate() {
            let p = dist.get(i);
            let intended = hyp.excluded_by.contains(&i);
            if intended {
                max_excluded_probability = max_excluded_probability.max(p);
            }
            if p <= TAU_EIG {
                row.excluded.push(h);
            } else {
                if p <= NEAR_MISS {
                    row.near_misses.push((h, p));
                }
                if intended {
                    row.failures.push((h, p));
                }
            }
        }
        outcomes.push(row);
    }
    let passed = outcomes.iter().all(|o| o.failures.is_empty());
    Ok(ExclusionReport {
        outcomes,
        max_excluded_probability,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::ProbDist;
    use crate::states::{
        fourier_basis, interferometer_state, reduced_path_state, simplex4_detectors,
        trine_detectors, PhaseGroup, PhaseSign,
    };

    #[test]
    fn anti_trine_excludes_matching_trine() {
        let povm = anti_trine_povm();
        assert!(povm.completeness_defect() < 1e-15);
        let t = trine_detectors();
        let p = born_distribution(t.state(0), &povm).unwrap();
        assert!(p.get(0).abs() < 1e-15);
        let p1 = born_distribution(t.state(1), &povm).unwrap();
        let p2 = born_distribution(t.state(2), &povm).unwrap();
        assert!((p1.get(0) - 0.5).abs() < 1e-15);
        assert!((p1.get(0) - p2.get(0)).abs() < 1e-15);
        for (got, want) in p1.probs().iter().zip([0.5, 0.0, 0.5]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn anti_trine_completeness_by_hand() {
        // Σ_j (2/3)|η̄_j⟩⟨η̄_j| from raw amplitudes.
        let h = 3f64.sqrt() / 2.0;
        let rows = [[0.0, 1.0], [-h, -0.5], [h, -0.5]];
        let mut sum = [[0.0; 2]; 2];
        for r in rows {
            for a in 0..2 {
                for b in 0..2 {
                    sum[a][b] += 2.0 / 3.0 * r[a] * r[b];
                }
            }
        }
        assert!((sum[0][0] - 1.0).abs() < 1e-15 && (sum[1][1] - 1.0).abs() < 1e-15);
        assert!(sum[0][1].abs() < 1e-15);
    }

    #[test]
    fn pair_orthogonal_vectors_are_orthogonal_to_their_pair() {
        let eta = simplex4_detectors();
        for ((a, b), xi) in pair_orthogonal_states() {
            assert!(xi.inner(eta.state(a)).unwrap().norm() < 1e-15, "({a},{b})");
            assert!(xi.inner(eta.state(b)).unwrap().norm() < 1e-15, "({a},{b})");
        }
    }

    #[test]
    fn six_pair_statistics() {
        let povm = six_pair_povm();
        assert!(povm.completeness_defect() <= 1e-9);
        let eta = simplex4_detectors();
        for (i, e) in povm.elements().iter().enumerate() {
            let members = e.label.indices();
            for x in 0..4 {
                let p = born_distribution(eta.state(x), &povm).unwrap().get(i);
                if members.contains(&x) {
                    assert!((p - 1.0 / 3.0).abs() < 1e-14, "{} on {x}: {p}", e.label);
                } else {
                    assert!(p.abs() < 1e-15, "{} on {x}: {p}", e.label);
                }
            }
        }
        assert_eq!(povm.label(0), &OutcomeLabel::Pair(0, 1));
    }

    #[test]
    fn projective_rejects_non_orthonormal() {
        let a = PureState::from_real(&[1.0, 0.0]).unwrap();
        let b = PureState::from_real(&[0.6, 0.8]).unwrap();
        let labels = vec![OutcomeLabel::Single(0), OutcomeLabel::Single(1)];
        assert!(matches!(
            projective_povm(&[a, b], labels),
            Err(Error::Arg(_))
        ));
    }

    #[test]
    fn povm_rejects_incomplete_or_negative() {
        let half = PovmElement {
            label: OutcomeLabel::Single(0),
            operator: ComplexMatrix::identity(2).scale(C64::new(0.5, 0.0)),
        };
        assert!(Povm::new(vec![half.clone()]).is_err());
        let neg = PovmElement {
            label: OutcomeLabel::Single(1),
            operator: ComplexMatrix::from_diagonal(&[C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]),
        };
        assert!(matches!(
            Povm::new(vec![
                neg,
                PovmElement {
                    label: OutcomeLabel::Single(2),
                    ..half.clone()
                }
            ]),
            Err(Error::Arg(_))
        ));
        let wrong = PovmElement {
            label: OutcomeLabel::Single(3),
            operator: ComplexMatrix::identity(3),
        };
        assert!(matches!(
            Povm::new(vec![half, wrong]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn trine_path_state_under_fourier_measurement() {
        let psi = interferometer_state(&ProbDist::uniform(3).unwrap(), &trine_detectors()).unwrap();
        let rho = reduced_path_state(&psi, 0, &PhaseGroup::new(3).unwrap()).unwrap();
        let u = fourier_basis(3, PhaseSign::Positive).unwrap();
        let povm = projective_povm(&u, (0..3).map(OutcomeLabel::Single).collect()).unwrap();
        let p = born_distribution(&rho, &povm).unwrap();
        for (got, want) in p.probs().iter().zip([0.0, 0.5, 0.5]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn trivial_povm_and_dim_mismatch() {
        let id = Povm::new(vec![PovmElement {
            label: OutcomeLabel::Set(vec![0, 1, 2]),
            operator: ComplexMatrix::identity(3),
        }])
        .unwrap();
        let s = PureState::from_real(&[0.0, 0.6, 0.8]).unwrap();
        assert_eq!(born_distribution(&s, &id).unwrap().probs(), &[1.0]);
        assert!(matches!(
            born_distribution(&s, &anti_trine_povm()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn point_mass_always_sampled() {
        let d = ProbDist::point_mass(4, 2).unwrap();
        for seed in 0..50 {
            let mut rng = SeedStream::new(seed).rng();
            assert_eq!(sample_index(&d, &mut rng), 2);
        }
    }

    #[test]
    fn sampling_is_reproducible_and_respects_exclusion() {
        let povm = anti_trine_povm();
        let eta1 = trine_detectors().state(1).clone();
        let draw = |seed| {
            let mut rng = SeedStream::new(seed).rng();
            (0..1000)
                .map(|_| sample_outcome(&eta1, &povm, &mut rng).unwrap().0)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
        assert_ne!(draw(42), draw(43));

        let n = 100_000;
        let dist = born_distribution(&eta1, &povm).unwrap();
        let mut rng = SeedStream::new(42).rng();
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[sample_index(&dist, &mut rng)] += 1;
        }
        assert_eq!(counts[1], 0);
        for (i, &cnt) in counts.iter().enumerate() {
            let p = dist.get(i);
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((cnt as f64 / n as f64 - p).abs() <= 5.0 * sigma + 1e-12);
        }
    }

    #[test]
    fn streams_are_independent() {
        let a: Vec<u64> = {
            let mut r = SeedStream::new(7).with_stream(0).rng();
            (0..4).map(|_| r.random()).collect()
        };
        let b: Vec<u64> = {
            let mut r = SeedStream::new(7).with_stream(1).rng();
            (0..4).map(|_| r.random()).collect()
        };
        assert_ne!(a, b);
    }

    #[test]
    fn exclusion_reports() {
        let t = trine_detectors();
        let hyps: Vec<Hypothesis> = (0..3)
            .map(|j| Hypothesis {
                excluded_by: vec![j],
                state: t.state(j) as &dyn BornState,
            })
            .collect();
        let rep = verify_exclusion(&anti_trine_povm(), &hyps).unwrap();
        assert!(rep.passed);
        for o in &rep.outcomes {
            assert_eq!(o.excluded, vec![o.outcome]);
        }

        let eta = simplex4_detectors();
        let povm = six_pair_povm();
        let hyps: Vec<Hypothesis> = (0..4)
            .map(|x| Hypothesis {
                excluded_by: (0..6)
                    .filter(|&i| !povm.label(i).indices().contains(&x))
                    .collect(),
                state: eta.state(x) as &dyn BornState,
            })
            .collect();
        let rep = verify_exclusion(&povm, &hyps).unwrap();
        assert!(rep.passed);
        assert!(rep.max_excluded_probability <= 1e-12);
        assert_eq!(rep.outcomes[0].excluded, vec![2, 3]);

        // A wrong expectation is surfaced as a failure.
        let bad = [Hypothesis {
            excluded_by: vec![1],
            state: t.state(0),
        }];
        let rep = verify_exclusion(&anti_trine_povm(), &bad).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.outcomes[1].failures.len(), 1);
    }

    #[test]
    fn fourier_measurement_excludes_applied_phase() {
        let psi = interferometer_state(&ProbDist::uniform(3).unwrap(), &trine_detectors()).unwrap();
        let g = PhaseGroup::new(3).unwrap();
        let rhos: Vec<_> = (0..3)
            .map(|k| reduced_path_state(&psi, k, &g).unwrap())
            .collect();
        let u = fourier_basis(3, PhaseSign::Positive).unwrap();
        let povm = projective_povm(&u, (0..3).map(OutcomeLabel::Single).collect()).unwrap();
        let hyps: Vec<Hypothesis> = rhos
            .iter()
            .enumerate()
            .map(|(k, r)| Hypothesis {
                excluded_by: vec![k],
                state: r as &dyn BornState,
            })
            .collect();
        let rep = verify_exclusion(&povm, &hyps).unwrap();
        assert!(rep.passed);
        for o in &rep.outcomes {
            assert_eq!(o.excluded, vec![o.outcome]);
        }
    }

    #[test]
    fn outcome_labels() {
        assert_eq!(
            OutcomeLabel::from_indices(vec![3]).unwrap(),
            OutcomeLabel::Single(3)
        );
        assert_eq!(
            OutcomeLabel::from_indices(vec![3, 1]).unwrap(),
            OutcomeLabel::Pair(1, 3)
        );
        assert_eq!(
            OutcomeLabel::from_indices(vec![2, 0, 1]).unwrap(),
            OutcomeLabel::Set(vec![0, 1, 2])
        );
        assert!(OutcomeLabel::from_indices(vec![1, 1]).is_err());
        assert_eq!(OutcomeLabel::pair(3, 0).to_string(), "{0,3}");
    }
}
