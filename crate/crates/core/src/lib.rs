//! Fixed-purity ensembles of reduced density-matrix spectra, random-Hamiltonian
//! decoherence models, and tools to compare the two.

pub mod analysis;
pub mod conics;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod marginals;
pub mod mcmc;
pub mod quadrature;
pub mod quantum;
pub mod rng;
pub mod samples;
pub mod simplex;

pub use ensemble::{
    ChartDensity, ChartMeasure, ChartPoint, Constraint, PeakModel, StaticEnsembleSpec,
};
pub use error::{Error, Result};
pub use samples::SampleSet;
pub use quantum::{DensityMatrix, EigenvalueVector, HilbertSpaceLayout, StateVector};
