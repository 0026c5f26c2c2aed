//! Quantum efficiency of cavity-QED single-photon sources.
//!
//! A two-level emitter coupled to one leaky cavity mode, with both the
//! emitter and the cavity field damped into broadband reservoirs. Starting
//! from the excited emitter, the crate evaluates:
//!
//! * [`analytic`]: resonant closed forms for the amplitudes, the emission
//!   probability and rate, the quantum efficiency and the output spectrum;
//! * [`numeric`]: an RK4 integrator for arbitrary detuning that doubles as
//!   an independent oracle for the closed forms;
//! * [`analysis`]: pulse-shape metrics, optimization of the cavity decay
//!   rate, parameter sweeps and the Law-Kimble comparison;
//! * [`cli`]: configuration and deterministic CSV/JSON output used by the
//!   `cavity-qe` binary.
//!
//! All rates are angular rates in rad/ns; times are in ns.

pub mod analysis;
pub mod analytic;
pub mod cli;

pub mod error;
pub mod model;
pub mod numeric;
pub mod search;
pub mod spectrum;

pub use analysis::{
    compare_law_kimble, optimize_kappa, pulse_metrics, pulse_metrics_from_trajectory, sweep,
    EmissionMetrics, OptimizationReport, OptimumKind, Route, SweepAxis, SweepResult,
};
pub use analytic::{
    amplitudes_at, efficiency, efficiency_via_purcell, emission_probability_at, emission_rate_at,
    output_spectrum_analytic, AmplitudePair, EfficiencyBreakdown,
};
pub use error::{Error, Result};
pub use model::{classify_regime, derive_rates, DerivedRates, RegimeLabel, SystemParams};
pub use numeric::{
    efficiency_numeric, integrate, integrate_to_long_time, output_spectrum_numeric,
    AmplitudeTrajectory, IntegrationConfig,
};
pub use spectrum::SpectrumGrid;
