//! The computational experiments: spectral analysis, parameter sweeps,
//! phase diagrams, scaling fits and spectral-gap studies.

pub mod fits;
pub mod fourier;
pub mod gap;
pub mod phase_diagram;
pub mod sweep;

pub use fits::{
    analytic_delta_n, critical_exponent_fit, entanglement_growth_fit, linear_fit,
    stationary_delta_n, ExponentFit, GrowthFit, LinearFit,
};
pub use fourier::{fourier_peaks, FourierOptions, FourierPeaks, Peak};
pub use gap::{gap_scaling, GapEntry, GapScaling};
pub use phase_diagram::{phase_diagram, CellProtocol, PhaseCell, PhaseDiagram, PhaseDiagramOptions};
pub use sweep::{
    hysteresis_loop_area, hysteresis_sweep, hysteresis_sweep_with, transition_omega,
    SweepDirection, SweepOptions, SweepRecord, SweepStep,
};
