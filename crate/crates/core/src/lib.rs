//! Simulation and optimization of a Rydberg microwave sensor whose response
//! band is extended by an RF-driven AC-Stark quantum mixer.
//!
//! Frequencies are plain MHz numerals: a value `x` stands for an angular
//! frequency `2*pi*x` rad/us. Times are in microseconds.

pub mod hamiltonian;
pub mod heterodyne;
pub mod lindblad;
pub mod optimizer;
pub mod search;
pub mod special_functions;
pub mod spectroscopy;
pub mod system;

pub use hamiltonian::{
    build_effective, build_original, build_rotated, HamiltonianError, HamiltonianMatrix, Matrix4c,
    ModelVariant, OriginalModel, RotatedModel, StaticHamiltonian, TimeDependentHamiltonian,
};
pub use heterodyne::{amplitude, synthesize, HeterodyneError, HeterodyneSettings, HeterodyneTrace};
pub use lindblad::{propagate, steady_state, DensityMatrix, LindbladError, Trajectory};
pub use optimizer::{
    optimize, sensitivity_in_field_units, sensitivity_map, ConstraintBox, OptimizationResult,
    OptimizeError,
};
pub use special_functions::{bessel_j, bessel_j_argmax, BesselError};
pub use spectroscopy::{
    extract_at_splitting, sweep_spectrum, AtSplitting, SpectrumError, SpectrumTrace, SweepSettings,
};
pub use system::{
    second_order_bound, second_order_shift, solve_rf_resonance, DecayRates, EffectiveDetunings,
    ParamError, RfTuning, SystemParams, TuningError,
};

use thiserror::Error;

/// Any error raised by the library, tagged with the module it came from.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("special_functions: {0}")]
    Bessel(#[from] BesselError),
    #[error("system_model: {0}")]
    Params(#[from] ParamError),
    #[error("system_model: {0}")]
    Tuning(#[from] TuningError),
    #[error("hamiltonian: {0}")]
    Hamiltonian(#[from] HamiltonianError),
    #[error("lindblad: {0}")]
    Lindblad(#[from] LindbladError),
    #[error("spectroscopy: {0}")]
    Spectrum(#[from] SpectrumError),
    #[error("heterodyne: {0}")]
    Heterodyne(#[from] HeterodyneError),
    #[error("optimizer: {0}")]
    Optimize(#[from] OptimizeError),
}
