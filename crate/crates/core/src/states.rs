//! Detector families, `Z_N` phase unitaries and Fourier bases.
//!
//! Named constructors return the literal amplitudes of the standard
//! three- and four-path examples, with no rephasing.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qcore::{partial_trace, ComplexMatrix, DensityMatrix, ProbDist, PureState, C64};

/// The detector states `|η_j⟩`, one per path, all in a common space.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorFamily {
    detector_dim: usize,
    states: Vec<PureState>,
}

impl DetectorFamily {
    pub fn new(states: Vec<PureState>) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::Arg("detector family needs at least one state".into()))?;
        let detector_dim = first.dim();
        for (j, s) in states.iter().enumerate() {
            if s.dims().len() != 1 || s.dim() != detector_dim {
                return Err(Error::Dimension(format!(
                    "detector state {j} has dims {:?}, expected [{detector_dim}]",
                    s.dims()
                )));
            }
        }
        Ok(Self {
            detector_dim,
            states,
        })
    }

    fn from_real_rows(rows: &[&[f64]]) -> Self {
        let states = rows
            .iter()
            .map(|r| PureState::from_real(r).expect("literal detector state is normalized"))
            .collect();
        Self::new(states).expect("literal detector states share a dimension")
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn detector_dim(&self) -> usize {
        self.detector_dim
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn state(&self, j: usize) -> &PureState {
        &self.states[j]
    }

    /// `G[j][k] = ⟨η_j|η_k⟩`.
    pub fn gram(&self) -> ComplexMatrix {
        let n = self.n_states();
        ComplexMatrix::from_fn(n, n, |j, k| {
            self.states[j]
                .inner(&self.states[k])
                .expect("common dimension")
        })
        .expect("finite overlaps")
    }

    /// `Σ_j w_j |η_j⟩⟨η_j|`.
    pub fn weighted_frame(&self, weights: &ProbDist) -> Result<DensityMatrix> {
        let projectors: Vec<_> = self.states.iter().map(PureState::density).collect();
        DensityMatrix::mixture(weights, &projectors)
    }
}

/// Trine qubit states at 120° separation.
pub fn trine_detectors() -> DetectorFamily {
    let h = 3f64.sqrt() / 2.0;
    DetectorFamily::from_real_rows(&[&[1.0, 0.0], &[-0.5, h], &[-0.5, -h]])
}

/// The anti-trine: `|η̄_j⟩` orthogonal to trine state `|η_j⟩`.
pub fn anti_trine_states() -> DetectorFamily {
    let h = 3f64.sqrt() / 2.0;
    DetectorFamily::from_real_rows(&[&[0.0, 1.0], &[-h, -0.5], &[h, -0.5]])
}

/// Four qutrit states with pairwise overlap `-1/3` (a regular simplex).
pub fn simplex4_detectors() -> DetectorFamily {
    let r2 = 2f64.sqrt();
    let r23 = (2.0f64 / 3.0).sqrt();
    DetectorFamily::from_real_rows(&[
        &[0.0, 0.0, 1.0],
        &[2.0 * r2 / 3.0, 0.0, -1.0 / 3.0],
        &[-r2 / 3.0, r23, -1.0 / 3.0],
        &[-r2 / 3.0, -r23, -1.0 / 3.0],
    ])
}

/// Orthogonal qubit detectors flagging path parity over four paths:
/// paths `{1, 3}` leave the detector in `|0⟩`, paths `{0, 2}` in `|1⟩`.
pub fn parity_pair_detectors() -> DetectorFamily {
    DetectorFamily::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]])
}

/// `Σ_j √p_j |j⟩_p |η_j⟩_d` on the path ⊗ detector space.
pub fn interferometer_state(weights: &ProbDist, detectors: &DetectorFamily) -> Result<PureState> {
    let n = weights.len();
    if detectors.n_states() != n {
        return Err(Error::Dimension(format!(
            "{n} path weights but {} detector states",
            detectors.n_states()
        )));
    }
    let d = detectors.detector_dim();
    let mut amps = Vec::with_capacity(n * d);
    for (p, eta) in weights.probs().iter().zip(detectors.states()) {
        let s = p.sqrt();
        amps.extend(eta.amplitudes().iter().map(|a| a * s));
    }
    PureState::normalized(vec![n, d], amps)
}

/// `U(a^k) = diag(exp(2πi jk/N))`.
pub fn phase_unitary(n: usize, k: usize) -> Result<ComplexMatrix> {
    if k >= n {
        return Err(Error::Arg(format!(
            "group element {k} out of range for Z_{n}"
        )));
    }
    let diag: Vec<C64> = (0..n).map(|j| root_of_unity(n, j * k)).collect();
    Ok(ComplexMatrix::from_diagonal(&diag))
}

/// `exp(2πi m/N)`, reduced mod N first so the angle stays exact for large products.
fn root_of_unity(n: usize, m: usize) -> C64 {
    let m = m % n;
    // Quarter turns exactly, so Z_4 phases come out as 1, i, -1, -i.
    if (4 * m).is_multiple_of(n) {
        return match 4 * m / n {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    C64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64)
}

/// The cyclic group `Z_N` acting on the paths by phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseGroup {
    order: usize,
}

impl PhaseGroup {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Arg("Z_0 is not a group".into()));
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn unitary(&self, k: usize) -> Result<ComplexMatrix> {
        phase_unitary(self.order, k)
    }

    pub fn compose(&self, j: usize, k: usize) -> usize {
        (j + k) % self.order
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseSign {
    Positive,
    Negative,
}

impl PhaseSign {
    fn apply(self, m: usize, n: usize) -> usize {
        match self {
            Self::Positive => m % n,
            Self::Negative => (n - m % n) % n,
        }
    }
}

/// `|w_j⟩ = N^{-1/2} Σ_k exp(±2πi jk/N) |k⟩` for `j = 0..N`.
pub fn fourier_basis(n: usize, sign: PhaseSign) -> Result<Vec<PureState>> {
    if n == 0 {
        return Err(Error::Arg("Fourier basis of dimension 0".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|j| {
            let amps = (0..n)
                .map(|k| root_of_unity(n, sign.apply(j * k, n)) * scale)
                .collect();
            PureState::from_amplitudes(amps)
        })
        .collect()
}

/// Alice's state after the House applies `U(a^k)`: `U(a^k) Tr_d(|Ψ⟩⟨Ψ|) U(a^k)†`.
pub fn reduced_path_state(psi: &PureState, k: usize, group: &PhaseGroup) -> Result<DensityMatrix> {
    let dims = psi.dims();
    if dims.len() != 2 || dims[0] != group.order() {
        return Err(Error::Dimension(format!(
            "expected path ⊗ detector state with {} paths, got dims {dims:?}",
            group.order()
        )));
    }
    let rho0 = partial_trace(&psi.density(), dims, 0)?;
    rho0.conjugate_by(&group.unitary(k)?)
}
