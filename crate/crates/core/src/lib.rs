//! Fidelity and affinity based partial coherence, minimum-error state
//! discrimination, and correlated coherence for finite-dimensional states.
//!
//! All routines are generic over [`Real`] (`f32` or `f64`). The `*64` and
//! `*32` aliases at the crate root fix the scalar. Tolerances are tuned for
//! `f64`; under `f32` they are raised to the floor given by `Real::tol`.

pub mod correlations;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod partialcoh;
pub mod qsd;
pub mod qsdstate;
pub mod scalar;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Party, Spectrum};
pub use metrics::Kind;
pub use partialcoh::{CoherenceMethod, CoherenceReport, Exactness};
pub use qsd::{Certificate, DiscriminationResult, Method, Povm, VnOptions};
pub use scalar::Real;
pub use states::{BipartiteState, DensityMatrix, Ensemble, KrausChannel, SchmidtForm};

pub type ComplexMatrix64 = ComplexMatrix<f64>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type BipartiteState64 = BipartiteState<f64>;
pub type Ensemble64 = Ensemble<f64>;
pub type KrausChannel64 = KrausChannel<f64>;
pub type Povm64 = Povm<f64>;
pub type CoherenceReport64 = CoherenceReport<f64>;

pub type ComplexMatrix32 = ComplexMatrix<f32>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type BipartiteState32 = BipartiteState<f32>;
pub type Ensemble32 = Ensemble<f32>;
pub type KrausChannel32 = KrausChannel<f32>;
pub type Povm32 = Povm<f32>;
