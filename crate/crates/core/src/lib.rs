//! Survival probabilities for the Demkov-Kunike two-level model with a
//! noisy coupling.
//!
//! The crate pairs closed-form results (hypergeometric solutions for a
//! single telegraph flip, a rotated-frame solution for the Gaussian
//! coupling family) with an adaptive Schrödinger integrator that serves as
//! the numerical reference, noise samplers, and quadrature / Monte-Carlo
//! averaging.

pub mod analytic;
pub mod averaging;
pub mod model;
pub mod noise;
pub mod propagator;
pub mod specfun;

pub use analytic::{
    AnalyticError, AsymptoticGaps, DiscrepancyEntry, MatchedCoefficients, Provenance,
    SurvivalResult, TransformedParams, Variant,
};
pub use averaging::{AverageSpec, AveragingError, T0Measure};
pub use model::{AmplitudePair, DKParams, HamiltonianMatrix, HypergeomParams, ModelError};
pub use noise::{NoiseError, NoiseKind, NoisePath, NoiseSpec};
pub use propagator::{CouplingProfile, GaussianOracle, PropagatorError, StepControl};
pub use specfun::{Complex, Hyp2F1Args, SpecFunError};
