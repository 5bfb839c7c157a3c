use std::io::Write;

use super::heating::{default_threshold, heating_time, Lifetime, Rectify};
use super::spectrum::{stroboscopic_spectrum, Spectrum};
use crate::engine::{
    prepare_state, run_protocol_from, DriveProtocol, HamiltonianChoice, InitialState, KrylovOptions, TimeSeries,
};
use crate::error::Result;
use crate::lattice::CouplingSet;

/// Maps `f` over `items` on `workers` threads. Item `i` always runs on
/// worker `i mod workers` and results are returned in item order, so the
/// output does not depend on the worker count.
pub fn run_partitioned<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
{
    let workers = workers.clamp(1, items.len().max(1));
    if workers == 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let f = &f;
                scope.spawn(move || {
                    (w..items.len()).step_by(workers).map(|i| (i, f(i, &items[i]))).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("sweep worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every cell assigned")).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub gammas: Vec<f64>,
    /// Protocol shared by all cells; its `gamma` is replaced per cell.
    pub template: DriveProtocol,
    pub hamiltonian: HamiltonianChoice,
    pub initial: InitialState,
    pub krylov: KrylovOptions,
    pub workers: usize,
    pub threshold: f64,
    pub rectify: Rectify,
}

impl SweepSpec {
    pub fn new(gammas: Vec<f64>, template: DriveProtocol) -> Self {
        Self {
            gammas,
            template,
            hamiltonian: HamiltonianChoice::Full,
            initial: InitialState::Polarized(crate::engine::Direction::PlusX),
            krylov: KrylovOptions::default(),
            workers: 1,
            threshold: default_threshold(),
            rectify: Rectify::Absolute,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellData {
    pub series: TimeSeries,
    /// Spectrum of the per-cycle means of ⟨x⟩.
    pub spectrum: Spectrum,
    /// Heating time, or the reason none was extracted.
    pub lifetime: std::result::Result<Lifetime, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub gamma: f64,
    pub outcome: std::result::Result<CellData, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseDiagram {
    pub gammas: Vec<f64>,
    pub cells: Vec<CellResult>,
}

/// Runs a single cell of a sweep; exposed so callers can reproduce any cell.
pub fn run_cell(couplings: &CouplingSet, spec: &SweepSpec, gamma: f64) -> Result<CellData> {
    let protocol = DriveProtocol { gamma, ..spec.template };
    let initial = prepare_state(couplings, spec.initial, spec.krylov)?;
    let series = run_protocol_from(initial, couplings, &protocol, spec.hamiltonian, spec.krylov)?;
    let means: Vec<f64> = series.cycle_means.iter().map(|m| m.x).collect();
    let spectrum = stroboscopic_spectrum(&means, protocol.period())?;
    let lifetime = heating_time(&series, spec.threshold, spec.rectify).map_err(|e| e.to_string());
    Ok(CellData { series, spectrum, lifetime })
}

/// One protocol run per γ, executed on `spec.workers` threads. Failed
/// cells are recorded, not propagated.
pub fn phase_diagram(couplings: &CouplingSet, spec: &SweepSpec) -> PhaseDiagram {
    let cells = run_partitioned(&spec.gammas, spec.workers, |_, &gamma| CellResult {
        gamma,
        outcome: run_cell(couplings, spec, gamma).map_err(|e| e.to_string()),
    });
    PhaseDiagram { gammas: spec.gammas.clone(), cells }
}

impl PhaseDiagram {
    /// `|⟨x⟩|` sampled before each slow kick: rows are cycles `0..=M`,
    /// columns follow the γ list; failed cells hold NaN.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let rows = self
            .cells
            .iter()
            .filter_map(|c| c.outcome.as_ref().ok())
            .map(|d| d.series.cycle_samples().len())
            .max()
            .unwrap_or(0);
        (0..rows)
            .map(|m| {
                self.cells
                    .iter()
                    .map(|c| match &c.outcome {
                        Ok(d) => d.series.cycle_samples().get(m).map_or(f64::NAN, |r| r.x.abs()),
                        Err(_) => f64::NAN,
                    })
                    .collect()
            })
            .collect()
    }

    pub fn spectra(&self) -> Vec<Option<&Spectrum>> {
        self.cells.iter().map(|c| c.outcome.as_ref().ok().map(|d| &d.spectrum)).collect()
    }

    pub fn failed_cells(&self) -> Vec<(usize, &str)> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.outcome.as_ref().err().map(|e| (i, e.as_str())))
            .collect()
    }

    /// Heatmap CSV: a header row `cycle,γ_0,γ_1,…` then one row per cycle.
    pub fn write_heatmap_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "cycle")?;
        for g in &self.gammas {
            write!(w, ",{g:e}")?;
        }
        writeln!(w)?;
        for (m, row) in self.grid().iter().enumerate() {
            write!(w, "{m}")?;
            for v in row {
                write!(w, ",{v:e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Spectral magnitudes CSV: header `bin,omega,γ_0,…`, one row per bin.
    pub fn write_spectra_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let spectra = self.spectra();
        let reference = spectra.iter().flatten().next();
        write!(w, "bin,omega")?;
        for g in &self.gammas {
            write!(w, ",{g:e}")?;
        }
        writeln!(w)?;
        let Some(reference) = reference else { return Ok(()) };
        for k in 0..reference.len() {
            write!(w, "{k},{:e}", reference.frequencies[k])?;
            for s in &spectra {
                match s.and_then(|s| s.amplitudes.get(k)) {
                    Some(a) => write!(w, ",{:e}", a.norm())?,
                    None => write!(w, ",NaN")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
