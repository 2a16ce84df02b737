//! Limited penetrable horizontal visibility graphs (LPHVG).
//!
//! Two samples `x_i`, `x_j` of a series are linked when at most `rho` of the
//! samples strictly between them are `>= min(x_i, x_j)`. With `rho = 0` this
//! is the ordinary horizontal visibility graph.
//!
//! The crate is organised by concern:
//!
//! * [`series`]: the shared [`TimeSeries`], [`Penetrability`] and [`RngConfig`]
//!   types plus CSV ingestion.
//! * [`construct`]: graph construction, with an optimized builder and a
//!   brute-force oracle.
//! * [`theory`]: closed-form predictions for i.i.d. input.
//! * [`metrics`]: empirical statistics, finite-size diagnostics, tail fitting
//!   and the randomness-vs-chaos verdict.
//! * [`generators`]: seeded signal sources (i.i.d., periodic, chaotic maps and
//!   flows).
//! * [`evolution`]: the sliding-window distance / recurrence pipeline.
//! * [`verify`]: ensemble checks of the empirical graphs against the theory.

pub mod construct;
pub mod error;
pub mod evolution;
pub mod generators;
pub mod matrix;
pub mod metrics;
pub mod series;
pub mod theory;
pub mod verify;

pub use construct::{build_lphvg, build_lphvg_naive, penetrable_visible, VisibilityGraph};
pub use error::{Error, Result};
pub use evolution::{evolve, EvolutionResult, WindowConfig};
pub use matrix::SquareMatrix;
pub use metrics::{discriminate, DegreeDistribution, FiniteSizeReport, TailFit, Verdict};
pub use series::{affine_transform, load_series, Penetrability, RngConfig, TimeSeries};
pub use theory::TheoryModel;
