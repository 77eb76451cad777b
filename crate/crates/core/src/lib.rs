//! Simulator and verifier for N-path wave–particle duality games.
//!
//! The House prepares `(U(a^k) ⊗ I)|Ψ⟩` with `|Ψ⟩ = Σ_j √p_j |j⟩_p |η_j⟩_d`,
//! hands the path factor to Alice and the detector factor to Bob, and asks
//! them to play either *Ways* (name a set of paths containing the one Alice
//! found) or *Phases* (name a set of group elements containing `k`).
//!
//! - [`qcore`]: dense complex linear algebra, partial trace, entropies.
//! - [`states`]: detector families, `Z_N` phase unitaries, Fourier bases.
//! - [`measure`]: POVMs, Born rule, seeded sampling, exclusion checks.
//! - [`game`]: scenarios, exact and Monte Carlo win probabilities, presets.
//! - [`info`]: mutual information, Holevo quantities, the duality relation,
//!   partition feasibility and the randomized property suite.

pub mod error;
pub mod game;
pub mod info;
pub mod measure;
pub mod qcore;
pub mod states;

pub use error::{Error, Result};
pub use qcore::{ComplexMatrix, DensityMatrix, ProbDist, PureState, C64};
