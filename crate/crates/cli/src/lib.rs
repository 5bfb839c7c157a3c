//! Configuration-driven front end: graph generation, single runs, γ sweeps,
//! re-analysis of stored outputs and the verification battery.
//!
//! Output layout under the output directory:
//!
//! ```text
//! graph.txt                   spin graph and coupling table
//! series/cell_NNNN.csv        per-cell records
//! series/cell_NNNN_means.csv  per-cell cycle means
//! lifetimes.csv               per-cell heating times and spectral peaks
//! heatmap.csv, spectra.csv    per sweep group (suffixed _gK with several groups)
//! fits.txt                    fitted parameters and SHA-256 of every data file
//! manifest.txt                config echo, versions, wall time, cell status
//! ```

pub mod config;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use pdtc::analysis::{
    fit_combined_heating, fit_power_law, rigidity_extent_from_peaks, run_cell, run_partitioned, stroboscopic_spectrum,
    heating_time, CellData, CellResult, PhaseDiagram, Rectify, SweepSpec,
};
use pdtc::engine::{
    Direction, DriveProtocol, HamiltonianChoice, InitialState, KrylovOptions, MeasureSchedule, TimeSeries, CODE_VERSION,
};
use pdtc::lattice::{compute_couplings, coupling_scale, read_graph, write_graph, CouplingSet, SpinGraph};
use pdtc::operators::SlowAxis;
use sha2::{Digest, Sha256};

pub use config::Config;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] pdtc::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// Process exit status for errors that abort before any cell runs.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(io_err(path))
}

/// The graph, couplings and characteristic scale a config resolves to.
#[derive(Clone, Debug)]
pub struct Setup {
    pub graph: SpinGraph,
    pub couplings: CouplingSet,
    /// `J`, computed only when the config uses units of 1/J.
    pub scale: Option<f64>,
}

impl Setup {
    pub fn new(config: &Config) -> Result<Self, CliError> {
        let (graph, mut couplings) = match &config.graph.file {
            Some(path) => {
                let f = fs::File::open(path).map_err(io_err(path))?;
                read_graph(BufReader::new(f))?
            }
            None => {
                let sites = config.graph.sites.expect("validated");
                let seed = config.graph.seed.expect("validated");
                let graph = SpinGraph::generate(sites, config.graph.r_min, config.graph.r_max, seed)?;
                let couplings = compute_couplings(&graph, config.graph.field_axis)?;
                (graph, couplings)
            }
        };
        if let Some(d) = &config.disorder {
            let b = couplings.median();
            couplings = couplings.with_disorder(d.mean_factor * b, d.sigma_factor * b, d.seed)?;
        }
        let needs_scale = config.protocol.tau_j.is_some() || config.initial.t_d_j.is_some();
        let scale = if needs_scale { Some(coupling_scale(&couplings)?) } else { None };
        Ok(Self { graph, couplings, scale })
    }

    fn from_parts(graph: SpinGraph, couplings: CouplingSet, scale: Option<f64>) -> Self {
        Self { graph, couplings, scale }
    }
}

/// One point of the sweep grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSpec {
    pub index: usize,
    pub group: usize,
    pub protocol: DriveProtocol,
    /// τ in units of 1/J when the config gives it that way.
    pub tau_j: Option<f64>,
}

/// The cells of a run (`sweep = false`: the single `[protocol]` point) or
/// of the Cartesian sweep grid, γ varying fastest.
pub fn plan_cells(config: &Config, scale: Option<f64>, sweep: bool) -> Result<Vec<CellSpec>, CliError> {
    let p = &config.protocol;
    let s = if sweep { config.sweep.clone() } else { config::SweepConfig::default() };
    let gammas = match (&s.gamma_pi, &s.gamma_pi_range) {
        (Some(list), _) => list.clone(),
        (None, Some(range)) => range.values(),
        (None, None) => vec![p.gamma_pi],
    };
    let thetas = s.theta_pi.unwrap_or_else(|| vec![p.theta_pi]);
    let pulses = s.fast_pulses.unwrap_or_else(|| vec![p.fast_pulses]);
    let seeds = s.noise_seeds.unwrap_or_else(|| vec![p.noise_seed]);
    let taus: Vec<(f64, Option<f64>)> = match (p.tau, s.tau_j.or_else(|| p.tau_j.map(|t| vec![t]))) {
        (Some(tau), _) => vec![(tau, None)],
        (None, Some(list)) => {
            let j = scale.ok_or_else(|| CliError::Config("tau_j needs the coupling scale".into()))?;
            list.into_iter().map(|t| (t / j, Some(t))).collect()
        }
        (None, None) => return Err(CliError::Config("no fast period given".into())),
    };
    if gammas.is_empty() || thetas.is_empty() || pulses.is_empty() || seeds.is_empty() || taus.is_empty() {
        return Err(CliError::Config("sweep axes must be nonempty".into()));
    }
    let slow_axis = SlowAxis::from_name(&p.slow_axis).expect("validated");
    let measure = MeasureSchedule::from_name(&p.measure).expect("validated");
    let mut cells = Vec::new();
    let mut group = 0;
    for &seed in &seeds {
        for &(tau, tau_j) in &taus {
            for &n in &pulses {
                for &theta in &thetas {
                    for &gamma in &gammas {
                        let protocol = DriveProtocol {
                            theta: theta * PI,
                            gamma: gamma * PI,
                            tau,
                            fast_pulses: n,
                            cycles: p.cycles,
                            slow_axis,
                            noise_fraction: p.noise_fraction,
                            noise_seed: seed,
                            measure,
                        };
                        protocol.validate()?;
                        cells.push(CellSpec { index: cells.len(), group, protocol, tau_j });
                    }
                    group += 1;
                }
            }
        }
    }
    Ok(cells)
}

pub fn initial_state(config: &Config, scale: Option<f64>) -> InitialState {
    match config.initial.kind.as_str() {
        "evolved" => InitialState::Evolved {
            t_d: config.initial.t_d_j.expect("validated") / scale.expect("scale resolved for t_d_j"),
        },
        "cat" => InitialState::Cat { plus: config.initial.plus },
        _ => InitialState::Polarized(Direction::from_name(&config.initial.direction).expect("validated")),
    }
}

fn rectify(config: &Config) -> Rectify {
    if config.analysis.rectify == "none" {
        Rectify::None
    } else {
        Rectify::Absolute
    }
}

fn krylov(config: &Config) -> KrylovOptions {
    KrylovOptions { tol: config.krylov.tol, max_dim: config.krylov.max_dim }
}

fn hamiltonian(config: &Config) -> HamiltonianChoice {
    HamiltonianChoice::from_name(&config.protocol.hamiltonian).expect("validated")
}

/// Summary of a finished `run`/`sweep`.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub cells: usize,
    pub failed: Vec<(usize, String)>,
}

impl Outcome {
    /// 0 when every cell succeeded, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failed.is_empty() {
            0
        } else {
            1
        }
    }
}

/// Writes `graph.txt` for the configured graph.
pub fn generate_graph(config: &Config, out_dir: &Path) -> Result<Setup, CliError> {
    let setup = Setup::new(config)?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut buf = Vec::new();
    write_graph(&mut buf, &setup.graph, &setup.couplings)?;
    write_file(&out_dir.join("graph.txt"), &buf)?;
    Ok(setup)
}

/// Executes a single run (`sweep = false`) or the full sweep and writes the
/// complete artifact set to `out_dir`.
pub fn execute(config: &Config, out_dir: &Path, sweep: bool) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let setup = generate_graph(config, out_dir)?;
    let cells = plan_cells(config, setup.scale, sweep)?;
    let initial = initial_state(config, setup.scale);
    log::info!("{} cells on {} workers", cells.len(), config.output.workers);

    let results = run_partitioned(&cells, config.output.workers, |_, cell| {
        let spec = SweepSpec {
            gammas: vec![cell.protocol.gamma],
            template: cell.protocol,
            hamiltonian: hamiltonian(config),
            initial,
            krylov: krylov(config),
            workers: 1,
            threshold: config.analysis.threshold,
            rectify: rectify(config),
        };
        let outcome = run_cell(&setup.couplings, &spec, cell.protocol.gamma).map(|mut data| {
            annotate(&mut data.series, config, &setup, cell);
            data
        });
        match &outcome {
            Ok(_) => log::info!("cell {} done", cell.index),
            Err(e) => log::warn!("cell {} failed: {e}", cell.index),
        }
        outcome.map_err(|e| e.to_string())
    });

    let series_dir = out_dir.join("series");
    fs::create_dir_all(&series_dir).map_err(io_err(&series_dir))?;
    for (cell, result) in cells.iter().zip(&results) {
        if let Ok(data) = result {
            let (mut records, mut means) = (Vec::new(), Vec::new());
            data.series.write_csv(&mut records)?;
            data.series.write_cycle_means_csv(&mut means)?;
            write_file(&series_dir.join(series_name(cell.index)), &records)?;
            write_file(&series_dir.join(means_name(cell.index)), &means)?;
        }
    }

    write_analysis(config, &setup, &cells, &results, out_dir)?;
    let failed: Vec<(usize, String)> =
        results.iter().enumerate().filter_map(|(i, r)| r.as_ref().err().map(|e| (i, e.clone()))).collect();
    write_manifest(config, &setup, &cells, &results, out_dir, sweep, start.elapsed().as_secs_f64())?;
    Ok(Outcome { out_dir: out_dir.to_path_buf(), cells: cells.len(), failed })
}

fn annotate(series: &mut TimeSeries, config: &Config, setup: &Setup, cell: &CellSpec) {
    let p = &mut series.provenance;
    p.push(("cell".into(), cell.index.to_string()));
    p.push(("graph_seed".into(), config.graph.seed.map_or("file".into(), |s| s.to_string())));
    p.push(("initial".into(), config.initial.kind.clone()));
    if let Some(j) = setup.scale {
        p.push(("coupling_scale".into(), format!("{j:e}")));
    }
    if let Some(t) = cell.tau_j {
        p.push(("tau_j".into(), format!("{t:e}")));
    }
}

pub fn series_name(index: usize) -> String {
    format!("cell_{index:04}.csv")
}

pub fn means_name(index: usize) -> String {
    format!("cell_{index:04}_means.csv")
}

fn group_suffix(group: usize, groups: usize) -> String {
    if groups == 1 {
        String::new()
    } else {
        format!("_g{group}")
    }
}

/// Re-reads the stored series of a finished run and rewrites every derived
/// file (lifetimes, heatmaps, spectra, fits) from them.
pub fn analyze(out_dir: &Path, analysis_override: Option<&Config>) -> Result<Outcome, CliError> {
    let manifest_path = out_dir.join("manifest.txt");
    let manifest = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
    let (stored, sweep, scale) = parse_manifest(&manifest)?;
    let mut config = stored;
    if let Some(o) = analysis_override {
        config.analysis = o.analysis.clone();
    }
    let graph_path = out_dir.join("graph.txt");
    let f = fs::File::open(&graph_path).map_err(io_err(&graph_path))?;
    let (graph, couplings) = read_graph(BufReader::new(f))?;
    let setup = Setup::from_parts(graph, couplings, scale);
    let cells = plan_cells(&config, scale, sweep)?;
    let series_dir = out_dir.join("series");
    let results: Vec<Result<CellData, String>> = cells
        .iter()
        .map(|cell| {
            let path = series_dir.join(series_name(cell.index));
            let means = series_dir.join(means_name(cell.index));
            let (Ok(r), Ok(m)) = (fs::File::open(&path), fs::File::open(&means)) else {
                return Err(format!("no stored series for cell {}", cell.index));
            };
            let series =
                TimeSeries::read_csv(BufReader::new(r), Some(BufReader::new(m))).map_err(|e| e.to_string())?;
            reanalyze(series, &config)
        })
        .collect();
    write_analysis(&config, &setup, &cells, &results, out_dir)?;
    let failed = results.iter().enumerate().filter_map(|(i, r)| r.as_ref().err().map(|e| (i, e.clone()))).collect();
    Ok(Outcome { out_dir: out_dir.to_path_buf(), cells: cells.len(), failed })
}

fn reanalyze(series: TimeSeries, config: &Config) -> Result<CellData, String> {
    let means: Vec<f64> = series.cycle_means.iter().map(|m| m.x).collect();
    let spectrum = stroboscopic_spectrum(&means, series.protocol.period()).map_err(|e| e.to_string())?;
    let lifetime = heating_time(&series, config.analysis.threshold, rectify(config)).map_err(|e| e.to_string());
    Ok(CellData { series, spectrum, lifetime })
}

fn write_analysis(
    config: &Config,
    setup: &Setup,
    cells: &[CellSpec],
    results: &[Result<CellData, String>],
    out_dir: &Path,
) -> Result<(), CliError> {
    let mut written = vec![PathBuf::from("graph.txt")];
    for (cell, r) in cells.iter().zip(results) {
        if r.is_ok() {
            written.push(Path::new("series").join(series_name(cell.index)));
            written.push(Path::new("series").join(means_name(cell.index)));
        }
    }

    write_file(&out_dir.join("lifetimes.csv"), lifetimes_csv(cells, results).as_bytes())?;
    written.push("lifetimes.csv".into());

    let groups = cells.iter().map(|c| c.group + 1).max().unwrap_or(0);
    let mut fits = String::new();
    writeln!(fits, "# pdtc fits v1").unwrap();
    writeln!(fits, "code_version={CODE_VERSION}").unwrap();
    writeln!(fits, "sites={}", setup.couplings.spins()).unwrap();
    writeln!(fits, "median_coupling={:e}", setup.couplings.median()).unwrap();
    if let Some(j) = setup.scale {
        writeln!(fits, "coupling_scale={j:e}").unwrap();
    }
    writeln!(fits, "threshold={:e}", config.analysis.threshold).unwrap();
    writeln!(fits, "rectify={}", config.analysis.rectify).unwrap();
    writeln!(fits, "groups={groups}").unwrap();

    for g in 0..groups {
        let members: Vec<usize> = cells.iter().filter(|c| c.group == g).map(|c| c.index).collect();
        let first = &cells[members[0]].protocol;
        let diagram = PhaseDiagram {
            gammas: members.iter().map(|&i| cells[i].protocol.gamma).collect(),
            cells: members
                .iter()
                .map(|&i| CellResult { gamma: cells[i].protocol.gamma, outcome: results[i].clone() })
                .collect(),
        };
        let suffix = group_suffix(g, groups);
        for (name, spectra) in [("heatmap", false), ("spectra", true)] {
            let mut buf = Vec::new();
            if spectra {
                diagram.write_spectra_csv(&mut buf)?;
            } else {
                diagram.write_heatmap_csv(&mut buf)?;
            }
            let file = format!("{name}{suffix}.csv");
            write_file(&out_dir.join(&file), &buf)?;
            written.push(file.into());
        }

        let key = format!("group.{g}");
        writeln!(
            fits,
            "{key}.params=theta_pi={:e} fast_pulses={} tau={:e} noise_seed={} cells={}",
            first.theta / PI,
            first.fast_pulses,
            first.tau,
            first.noise_seed,
            members.len()
        )
        .unwrap();
        write_rigidity(&mut fits, &key, &diagram, config.analysis.rigidity_threshold);
        write_combined_fits(&mut fits, &key, &diagram, first.fast_pulses, config);
    }
    write_tau_fits(&mut fits, cells, results);

    for rel in &written {
        let bytes = fs::read(out_dir.join(rel)).map_err(io_err(&out_dir.join(rel)))?;
        writeln!(fits, "sha256.{}={}", rel.display(), hex::encode(Sha256::digest(&bytes))).unwrap();
    }
    write_file(&out_dir.join("fits.txt"), fits.as_bytes())
}

fn lifetimes_csv(cells: &[CellSpec], results: &[Result<CellData, String>]) -> String {
    let mut s = String::from(
        "cell,group,theta_pi,gamma_pi,fast_pulses,tau,noise_seed,status,lifetime_kicks,lifetime_time,lifetime_cycles,half_peak,zero_peak\n",
    );
    for (c, r) in cells.iter().zip(results) {
        let p = &c.protocol;
        write!(
            s,
            "{},{},{:e},{:e},{},{:e},{}",
            c.index,
            c.group,
            p.theta / PI,
            p.gamma / PI,
            p.fast_pulses,
            p.tau,
            p.noise_seed
        )
        .unwrap();
        match r {
            Ok(d) => {
                let (status, k, t, m) = match &d.lifetime {
                    Ok(l) => ("ok", l.kicks, l.time, l.cycles),
                    Err(_) => ("not_reached", f64::NAN, f64::NAN, f64::NAN),
                };
                writeln!(
                    s,
                    ",{status},{k:e},{t:e},{m:e},{:e},{:e}",
                    d.spectrum.half_frequency_magnitude(),
                    d.spectrum.zero_frequency_magnitude()
                )
                .unwrap();
            }
            Err(_) => writeln!(s, ",failed,NaN,NaN,NaN,NaN,NaN").unwrap(),
        }
    }
    s
}

fn write_rigidity(fits: &mut String, key: &str, diagram: &PhaseDiagram, threshold: f64) {
    let gammas = &diagram.gammas;
    if gammas.windows(2).any(|w| !(w[1] > w[0])) {
        return;
    }
    let peaks: Vec<f64> = diagram
        .cells
        .iter()
        .map(|c| c.outcome.as_ref().map_or(0.0, |d| d.spectrum.half_frequency_magnitude()))
        .collect();
    for (name, center) in [("plus_pi", PI), ("minus_pi", -PI)] {
        // needs grid points on both sides of the centre
        if gammas.first().is_some_and(|&g| g < center) && gammas.last().is_some_and(|&g| g > center) {
            if let Ok(extent) = rigidity_extent_from_peaks(gammas, &peaks, center, threshold) {
                writeln!(fits, "{key}.rigidity.{name}_pi_units={:e}", extent / PI).unwrap();
            }
        }
    }
}

fn write_combined_fits(fits: &mut String, key: &str, diagram: &PhaseDiagram, fast_pulses: usize, config: &Config) {
    for (k, &center_pi) in config.analysis.fit_centers_pi.iter().enumerate() {
        let center = center_pi * PI;
        let window = config.analysis.fit_window_pi * PI;
        let (mut eps, mut life) = (Vec::new(), Vec::new());
        for c in &diagram.cells {
            let e = (c.gamma - center).abs();
            if e > 1e-12 && e <= window + 1e-12 {
                if let Ok(Ok(l)) = c.outcome.as_ref().map(|d| d.lifetime.as_ref()) {
                    eps.push(e);
                    life.push(l.kicks);
                }
            }
        }
        let fk = format!("{key}.fit.{k}");
        writeln!(fits, "{fk}.center_pi={center_pi:e}").unwrap();
        if eps.len() < 4 {
            writeln!(fits, "{fk}.status=skipped ({} resolved points)", eps.len()).unwrap();
            continue;
        }
        match fit_combined_heating(&eps, &life, fast_pulses) {
            Ok(f) => {
                writeln!(fits, "{fk}.g={:e}", f.g).unwrap();
                writeln!(fits, "{fk}.lambda={:e}", f.lambda).unwrap();
                writeln!(fits, "{fk}.gamma_min={:e}", f.gamma_min).unwrap();
                writeln!(fits, "{fk}.residual_norm={:e}", f.residual_norm).unwrap();
                writeln!(fits, "{fk}.points={}", f.points).unwrap();
            }
            Err(e) => writeln!(fits, "{fk}.status=failed ({e})").unwrap(),
        }
    }
}

/// Power-law exponent of lifetime (cycles) against τ for every
/// (ϑ, γ, N, seed) combination swept over at least two τ values.
fn write_tau_fits(fits: &mut String, cells: &[CellSpec], results: &[Result<CellData, String>]) {
    let mut combos: BTreeMap<(u64, u64, usize, u64), Vec<(f64, f64)>> = BTreeMap::new();
    for (c, r) in cells.iter().zip(results) {
        let p = &c.protocol;
        let entry = combos.entry((p.theta.to_bits(), p.gamma.to_bits(), p.fast_pulses, p.noise_seed)).or_default();
        if let Ok(Ok(l)) = r.as_ref().map(|d| d.lifetime.as_ref()) {
            entry.push((c.tau_j.unwrap_or(p.tau), l.cycles));
        }
    }
    for (k, ((theta, gamma, n, seed), points)) in combos.iter().filter(|(_, v)| v.len() >= 2).enumerate() {
        let key = format!("tau_fit.{k}");
        writeln!(
            fits,
            "{key}.params=theta_pi={:e} gamma_pi={:e} fast_pulses={n} noise_seed={seed}",
            f64::from_bits(*theta) / PI,
            f64::from_bits(*gamma) / PI
        )
        .unwrap();
        let (x, y): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        match fit_power_law(&x, &y) {
            Ok(f) => writeln!(fits, "{key}.exponent={:e}\n{key}.stderr={:e}", f.exponent, f.stderr).unwrap(),
            Err(e) => writeln!(fits, "{key}.status=failed ({e})").unwrap(),
        }
    }
}

const CONFIG_MARKER: &str = "--- config ---";

#[allow(clippy::too_many_arguments)]
fn write_manifest(
    config: &Config,
    setup: &Setup,
    cells: &[CellSpec],
    results: &[Result<CellData, String>],
    out_dir: &Path,
    sweep: bool,
    wall_time: f64,
) -> Result<(), CliError> {
    let path = out_dir.join("manifest.txt");
    let f = fs::File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(f);
    let mut body = String::new();
    writeln!(body, "# pdtc run manifest").unwrap();
    writeln!(body, "command={}", if sweep { "sweep" } else { "run" }).unwrap();
    writeln!(body, "code_version={CODE_VERSION}").unwrap();
    writeln!(body, "schema_version={}", config::SCHEMA_VERSION).unwrap();
    writeln!(body, "sites={}", setup.couplings.spins()).unwrap();
    writeln!(body, "median_coupling={:e}", setup.couplings.median()).unwrap();
    if let Some(j) = setup.scale {
        writeln!(body, "coupling_scale={j:e}").unwrap();
    }
    writeln!(body, "workers={}", config.output.workers).unwrap();
    writeln!(body, "wall_time_s={wall_time:.3}").unwrap();
    writeln!(body, "cells={}", cells.len()).unwrap();
    writeln!(body, "failed={}", results.iter().filter(|r| r.is_err()).count()).unwrap();
    for (c, r) in cells.iter().zip(results) {
        let p = &c.protocol;
        let status = match r {
            Ok(_) => format!("ok file=series/{}", series_name(c.index)),
            Err(e) => format!("failed reason={e}"),
        };
        writeln!(
            body,
            "cell.{:04}=gamma_pi={:e} theta_pi={:e} fast_pulses={} tau={:e} noise_seed={} {status}",
            c.index,
            p.gamma / PI,
            p.theta / PI,
            p.fast_pulses,
            p.tau,
            p.noise_seed
        )
        .unwrap();
    }
    writeln!(body, "{CONFIG_MARKER}").unwrap();
    body.push_str(&config.to_toml());
    w.write_all(body.as_bytes()).map_err(io_err(&path))?;
    w.flush().map_err(io_err(&path))
}

/// Recovers the echoed config, the command kind and the recorded coupling
/// scale from a manifest.
pub fn parse_manifest(text: &str) -> Result<(Config, bool, Option<f64>), CliError> {
    let (head, echo) = text
        .split_once(&format!("{CONFIG_MARKER}\n"))
        .ok_or_else(|| CliError::Config("manifest has no config echo".into()))?;
    let config = Config::parse(echo)?;
    let value = |key: &str| head.lines().find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')));
    let sweep = value("command") == Some("sweep");
    let scale = match value("coupling_scale") {
        Some(v) => Some(v.parse().map_err(|_| CliError::Config(format!("bad coupling_scale {v:?}")))?),
        None => None,
    };
    Ok((config, sweep, scale))
}

/// Runs the verification battery, returning the printable report and
/// whether every check passed.
pub fn verify() -> (String, bool) {
    let report = pdtc::verify::verify();
    let mut text = report.to_string();
    for line in pdtc::verify::informational() {
        text.push('\n');
        text.push_str(&line);
    }
    (text, report.all_passed())
}
