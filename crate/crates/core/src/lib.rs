//! Pseudo-spectral exponential time differencing for the Landau–de Gennes
//! Q-tensor gradient flow of chiral liquid crystals.

#![allow(clippy::needless_range_loop)]

pub mod cmat;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod etd;
pub mod grid;
pub mod hstf;
pub mod initial;
pub mod oracle;
pub mod params;
pub mod qtensor;
pub mod reduce;
pub mod runner;
pub mod snapshot;
pub mod spectral;
pub mod stepper;

pub use config::{ParamSpec, RunConfig};
pub use diagnostics::{Diagnostics, StepDiagnostics};
pub use error::{Error, Result};
pub use grid::{Grid, SpectralField, TensorField};
pub use hstf::FrameTable;
pub use initial::{initial_condition, IcKind};
pub use params::{DimensionlessParams, ModelParams, Overrides, StabilizedParams, ValidationReport};
pub use qtensor::{Full3x3, QTensor5};
pub use runner::{convergence_study, run_simulation, ConvergenceTable, RunSummary};
pub use spectral::Fft3;
pub use stepper::{Scheme, Stepper};
