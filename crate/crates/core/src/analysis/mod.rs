//! Heating times and fits, stroboscopic spectra, rigidity extents and
//! phase-diagram sweeps.

mod heating;
mod spectrum;
mod sweep;

pub use heating::{
    default_threshold, first_crossing, fit_combined_heating, fit_power_law, heating_time, HeatingFit, Lifetime,
    PowerLawFit, Rectify,
};
pub use spectrum::{phase_estimate, rigidity_extent, rigidity_extent_from_peaks, stroboscopic_spectrum, Spectrum};
pub use sweep::{phase_diagram, run_cell, run_partitioned, CellData, CellResult, PhaseDiagram, SweepSpec};
