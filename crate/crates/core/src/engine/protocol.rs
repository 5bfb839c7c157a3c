//! The two-frequency drive: per Floquet cycle, `N` fast periods of
//! (x̂ pulse ϑ, free evolution τ + δτ) followed by one slow γ kick.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kernel::CompiledOperator;
use super::krylov::{KrylovOptions, Propagator};
use super::state::{apply_collective_rotation, measure_magnetization, Direction, StateVector};
use crate::error::{parse_err, Error, Result};
use crate::lattice::CouplingSet;
use crate::operators::{leading_effective_hamiltonian, system_hamiltonian, RotationSpec, SlowAxis};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasureSchedule {
    /// After every fast period.
    FastKick,
    /// Once per cycle, immediately before the slow kick.
    FloquetCycle,
}

impl MeasureSchedule {
    pub fn name(self) -> &'static str {
        match self {
            MeasureSchedule::FastKick => "fast_kick",
            MeasureSchedule::FloquetCycle => "floquet_cycle",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "fast_kick" => Some(MeasureSchedule::FastKick),
            "floquet_cycle" => Some(MeasureSchedule::FloquetCycle),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HamiltonianChoice {
    /// Full dipolar + on-site Hamiltonian with explicit fast pulses.
    Full,
    /// Slow-drive-only evolution under the leading effective Hamiltonian;
    /// fast pulses are omitted.
    Idealized,
}

impl HamiltonianChoice {
    pub fn name(self) -> &'static str {
        match self {
            HamiltonianChoice::Full => "full",
            HamiltonianChoice::Idealized => "idealized",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "full" => Some(HamiltonianChoice::Full),
            "idealized" => Some(HamiltonianChoice::Idealized),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveProtocol {
    /// Fast pulse angle about x̂ (rad).
    pub theta: f64,
    /// Slow kick angle (rad).
    pub gamma: f64,
    /// Fast period.
    pub tau: f64,
    /// Fast pulses per Floquet cycle.
    pub fast_pulses: usize,
    /// Number of Floquet cycles.
    pub cycles: usize,
    pub slow_axis: SlowAxis,
    /// Half-width of the uniform period jitter, as a fraction of τ.
    pub noise_fraction: f64,
    pub noise_seed: u64,
    pub measure: MeasureSchedule,
}

impl DriveProtocol {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.fast_pulses == 0 || self.cycles == 0 {
            return bad("fast_pulses and cycles must be at least 1".into());
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if !(0.0..1.0).contains(&self.noise_fraction) {
            return bad(format!("noise fraction must lie in [0, 1), got {}", self.noise_fraction));
        }
        if !self.theta.is_finite() || !self.gamma.is_finite() {
            return bad("angles must be finite".into());
        }
        Ok(())
    }

    /// Nominal Floquet period `T = Nτ`.
    pub fn period(&self) -> f64 {
        self.fast_pulses as f64 * self.tau
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    /// Fast pulses applied so far.
    pub kick_index: u64,
    /// Floquet cycle the sample belongs to (0 for the initial state).
    pub cycle_index: u64,
    pub time: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub norm: f64,
}

/// Mean of the fast-period samples within one Floquet cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleMean {
    pub cycle_index: u64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub sites: usize,
    pub protocol: DriveProtocol,
    pub hamiltonian: HamiltonianChoice,
    /// Ordered `key=value` provenance lines written into the CSV header.
    pub provenance: Vec<(String, String)>,
    pub records: Vec<Record>,
    pub cycle_means: Vec<CycleMean>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialState {
    Polarized(Direction),
    /// The +x̂ product state evolved for `t_d` under the undriven system Hamiltonian.
    Evolved { t_d: f64 },
    Cat { plus: bool },
}

pub fn prepare_state(couplings: &CouplingSet, kind: InitialState, options: KrylovOptions) -> Result<StateVector> {
    let l = couplings.spins();
    match kind {
        InitialState::Polarized(d) => Ok(StateVector::polarized(l, d)),
        InitialState::Cat { plus } => Ok(StateVector::cat(l, plus)),
        InitialState::Evolved { t_d } => {
            let mut s = StateVector::polarized(l, Direction::PlusX);
            if t_d > 0.0 {
                let h = CompiledOperator::new(&system_hamiltonian(couplings));
                Propagator::new(&h, options).evolve_long(&mut s, t_d)?;
            } else if t_d < 0.0 || !t_d.is_finite() {
                return Err(Error::InvalidParameter(format!("t_d must be nonnegative, got {t_d}")));
            }
            Ok(s)
        }
    }
}

/// Runs the protocol from the +x̂ product state with default Krylov options.
pub fn run_protocol(couplings: &CouplingSet, protocol: &DriveProtocol, choice: HamiltonianChoice) -> Result<TimeSeries> {
    let initial = StateVector::polarized(couplings.spins(), Direction::PlusX);
    run_protocol_from(initial, couplings, protocol, choice, KrylovOptions::default())
}

pub fn run_protocol_from(
    state: StateVector,
    couplings: &CouplingSet,
    protocol: &DriveProtocol,
    choice: HamiltonianChoice,
    options: KrylovOptions,
) -> Result<TimeSeries> {
    run_protocol_until(state, couplings, protocol, choice, options, |_, _| false)
}

/// [`run_protocol_from`] that ends early once `stop(initial, last)` holds,
/// where `last` is the sample taken just before a slow kick. An early end is
/// noted in the provenance as `stopped_after_cycle`.
pub fn run_protocol_until(
    mut state: StateVector,
    couplings: &CouplingSet,
    protocol: &DriveProtocol,
    choice: HamiltonianChoice,
    options: KrylovOptions,
    mut stop: impl FnMut(&Record, &Record) -> bool,
) -> Result<TimeSeries> {
    protocol.validate()?;
    let l = couplings.spins();
    if state.sites() != l {
        return Err(Error::SiteMismatch { expected: l, found: state.sites() });
    }
    let hamiltonian = CompiledOperator::new(&match choice {
        HamiltonianChoice::Full => system_hamiltonian(couplings),
        HamiltonianChoice::Idealized => leading_effective_hamiltonian(couplings),
    });
    let mut propagator = Propagator::new(&hamiltonian, options);
    let fast = RotationSpec::about_x(protocol.theta);
    let slow = protocol.slow_axis.rotation(protocol.gamma);
    let mut rng = ChaCha8Rng::seed_from_u64(protocol.noise_seed);
    let jitter = |rng: &mut ChaCha8Rng| {
        if protocol.noise_fraction > 0.0 {
            protocol.tau * protocol.noise_fraction * rng.random_range(-1.0..=1.0)
        } else {
            0.0
        }
    };

    let sample = |state: &StateVector, kick: u64, cycle: u64, time: f64| {
        let (x, y, z) = measure_magnetization(state);
        Record { kick_index: kick, cycle_index: cycle, time, x, y, z, norm: state.norm() }
    };
    let mut records = vec![sample(&state, 0, 0, 0.0)];
    let mut cycle_means = Vec::with_capacity(protocol.cycles);
    let (mut kick, mut time) = (0u64, 0.0f64);
    let mut stopped = None;
    let inv_n = 1.0 / protocol.fast_pulses as f64;

    for cycle in 1..=protocol.cycles as u64 {
        let cycle_jitter = match choice {
            HamiltonianChoice::Idealized => jitter(&mut rng),
            HamiltonianChoice::Full => 0.0,
        };
        let mut sum = (0.0, 0.0, 0.0);
        let mut last = records[0];
        for _ in 0..protocol.fast_pulses {
            let dt = match choice {
                HamiltonianChoice::Full => {
                    apply_collective_rotation(&mut state, &fast);
                    protocol.tau + jitter(&mut rng)
                }
                HamiltonianChoice::Idealized => protocol.tau + cycle_jitter,
            };
            propagator.evolve(&mut state, dt)?;
            kick += 1;
            time += dt;
            last = sample(&state, kick, cycle, time);
            sum = (sum.0 + last.x, sum.1 + last.y, sum.2 + last.z);
            if protocol.measure == MeasureSchedule::FastKick {
                records.push(last);
            }
        }
        if protocol.measure == MeasureSchedule::FloquetCycle {
            records.push(last);
        }
        cycle_means.push(CycleMean { cycle_index: cycle, x: sum.0 * inv_n, y: sum.1 * inv_n, z: sum.2 * inv_n });
        if cycle < protocol.cycles as u64 && stop(&records[0], &last) {
            stopped = Some(cycle);
            break;
        }
        apply_collective_rotation(&mut state, &slow);
    }

    let mut provenance = vec![
        ("code_version".to_string(), CODE_VERSION.to_string()),
        ("sites".to_string(), l.to_string()),
        ("hamiltonian".to_string(), choice.name().to_string()),
    ];
    provenance.extend(protocol_fields(protocol));
    provenance.push(("krylov_tol".into(), format!("{:e}", options.tol)));
    provenance.push(("krylov_max_dim".into(), options.max_dim.to_string()));
    if let Some(c) = stopped {
        provenance.push(("stopped_after_cycle".into(), c.to_string()));
    }
    if let Some(d) = couplings.disorder() {
        provenance.push(("disorder_mean".into(), format!("{:e}", d.mean)));
        provenance.push(("disorder_sigma".into(), format!("{:e}", d.sigma)));
        provenance.push(("disorder_seed".into(), d.seed.to_string()));
    }
    Ok(TimeSeries { sites: l, protocol: *protocol, hamiltonian: choice, provenance, records, cycle_means })
}

fn protocol_fields(p: &DriveProtocol) -> Vec<(String, String)> {
    vec![
        ("theta".into(), format!("{:e}", p.theta)),
        ("gamma".into(), format!("{:e}", p.gamma)),
        ("tau".into(), format!("{:e}", p.tau)),
        ("fast_pulses".into(), p.fast_pulses.to_string()),
        ("cycles".into(), p.cycles.to_string()),
        ("slow_axis".into(), p.slow_axis.name().into()),
        ("noise_fraction".into(), format!("{:e}", p.noise_fraction)),
        ("noise_seed".into(), p.noise_seed.to_string()),
        ("measure".into(), p.measure.name().into()),
    ]
}

const SERIES_COLUMNS: &str = "kick_index,cycle_index,time,x,y,z,norm";
const MEANS_COLUMNS: &str = "cycle_index,x_mean,y_mean,z_mean";

impl TimeSeries {
    /// Samples taken immediately before each slow kick, plus the initial record.
    pub fn cycle_samples(&self) -> Vec<Record> {
        let n = self.protocol.fast_pulses as u64;
        self.records.iter().filter(|r| r.kick_index % n == 0).copied().collect()
    }

    pub fn value(&self, key: &str) -> Option<&str> {
        self.provenance.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn write_header<W: Write>(&self, w: &mut W) -> Result<()> {
        for (k, v) in &self.provenance {
            writeln!(w, "# {k}={v}")?;
        }
        Ok(())
    }

    /// Writes the record CSV. Floats use Rust's shortest round-trip
    /// exponent form (`{:e}`), so identical runs produce identical bytes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        self.write_header(&mut w)?;
        writeln!(w, "{SERIES_COLUMNS}")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{:e},{:e},{:e},{:e},{:e}",
                r.kick_index, r.cycle_index, r.time, r.x, r.y, r.z, r.norm
            )?;
        }
        Ok(())
    }

    pub fn write_cycle_means_csv<W: Write>(&self, mut w: W) -> Result<()> {
        self.write_header(&mut w)?;
        writeln!(w, "{MEANS_COLUMNS}")?;
        for m in &self.cycle_means {
            writeln!(w, "{},{:e},{:e},{:e}", m.cycle_index, m.x, m.y, m.z)?;
        }
        Ok(())
    }

    /// Reads a record CSV and, optionally, its cycle-means companion.
    pub fn read_csv<R: BufRead, M: BufRead>(records: R, means: Option<M>) -> Result<Self> {
        let (provenance, rows) = read_table(records, SERIES_COLUMNS)?;
        let mut parsed = Vec::with_capacity(rows.len());
        for (n, cols) in rows {
            if cols.len() != 7 {
                return Err(parse_err(n, "expected 7 columns"));
            }
            let f = |i: usize| cols[i].parse::<f64>().map_err(|_| parse_err(n, format!("bad number `{}`", cols[i])));
            let u = |i: usize| cols[i].parse::<u64>().map_err(|_| parse_err(n, format!("bad index `{}`", cols[i])));
            parsed.push(Record {
                kick_index: u(0)?,
                cycle_index: u(1)?,
                time: f(2)?,
                x: f(3)?,
                y: f(4)?,
                z: f(5)?,
                norm: f(6)?,
            });
        }
        let mut cycle_means = Vec::new();
        if let Some(m) = means {
            let (_, rows) = read_table(m, MEANS_COLUMNS)?;
            for (n, cols) in rows {
                if cols.len() != 4 {
                    return Err(parse_err(n, "expected 4 columns"));
                }
                let f = |i: usize| cols[i].parse::<f64>().map_err(|_| parse_err(n, format!("bad number `{}`", cols[i])));
                cycle_means.push(CycleMean {
                    cycle_index: cols[0].parse().map_err(|_| parse_err(n, "bad cycle index"))?,
                    x: f(1)?,
                    y: f(2)?,
                    z: f(3)?,
                });
            }
        }
        let get = |key: &str| -> Result<&str> {
            provenance
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| parse_err(0, format!("missing provenance key `{key}`")))
        };
        let num = |key: &str| -> Result<f64> { get(key)?.parse().map_err(|_| parse_err(0, format!("bad `{key}`"))) };
        let int = |key: &str| -> Result<u64> { get(key)?.parse().map_err(|_| parse_err(0, format!("bad `{key}`"))) };
        let protocol = DriveProtocol {
            theta: num("theta")?,
            gamma: num("gamma")?,
            tau: num("tau")?,
            fast_pulses: int("fast_pulses")? as usize,
            cycles: int("cycles")? as usize,
            slow_axis: match get("slow_axis")? {
                "y" => SlowAxis::Y,
                "z" => SlowAxis::Z,
                other => return Err(parse_err(0, format!("bad slow_axis `{other}`"))),
            },
            noise_fraction: num("noise_fraction")?,
            noise_seed: int("noise_seed")?,
            measure: MeasureSchedule::from_name(get("measure")?).ok_or_else(|| parse_err(0, "bad measure"))?,
        };
        let hamiltonian =
            HamiltonianChoice::from_name(get("hamiltonian")?).ok_or_else(|| parse_err(0, "bad hamiltonian"))?;
        let sites = int("sites")? as usize;
        Ok(Self { sites, protocol, hamiltonian, provenance, records: parsed, cycle_means })
    }
}

type Table = (Vec<(String, String)>, Vec<(usize, Vec<String>)>);

fn read_table<R: BufRead>(r: R, columns: &str) -> Result<Table> {
    let mut provenance = Vec::new();
    let mut rows = Vec::new();
    let mut seen_columns = false;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest.split_once('=').ok_or_else(|| parse_err(n, "provenance line needs key=value"))?;
            provenance.push((k.to_string(), v.to_string()));
        } else if !seen_columns {
            if line.trim() != columns {
                return Err(parse_err(n, format!("expected column header `{columns}`")));
            }
            seen_columns = true;
        } else if !line.trim().is_empty() {
            rows.push((n, line.split(',').map(|s| s.trim().to_string()).collect()));
        }
    }
    if !seen_columns {
        return Err(parse_err(0, "missing column header"));
    }
    Ok((provenance, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn pair(b: f64) -> CouplingSet {
        CouplingSet::from_table(2, vec![0.0, b, b, 0.0], vec![0.3, -0.2]).unwrap()
    }

    fn protocol() -> DriveProtocol {
        DriveProtocol {
            theta: FRAC_PI_2,
            gamma: PI,
            tau: 0.1,
            fast_pulses: 4,
            cycles: 5,
            slow_axis: SlowAxis::Z,
            noise_fraction: 0.05,
            noise_seed: 3,
            measure: MeasureSchedule::FastKick,
        }
    }

    #[test]
    fn schedule_counts() {
        let p = protocol();
        let s = run_protocol(&pair(0.4), &p, HamiltonianChoice::Full).unwrap();
        assert_eq!(s.records.len(), 1 + 4 * 5);
        assert_eq!(s.cycle_means.len(), 5);
        assert!(s.records.windows(2).all(|w| w[1].time > w[0].time));
        let c = run_protocol(&pair(0.4), &DriveProtocol { measure: MeasureSchedule::FloquetCycle, ..p }, HamiltonianChoice::Full)
            .unwrap();
        assert_eq!(c.records.len(), 6);
        assert_eq!(c.cycle_samples(), s.cycle_samples());
        assert_eq!(c.cycle_means, s.cycle_means);
    }

    #[test]
    fn early_stop_truncates_a_prefix() {
        let p = DriveProtocol { cycles: 8, ..protocol() };
        let full = run_protocol(&pair(0.4), &p, HamiltonianChoice::Full).unwrap();
        let initial = StateVector::polarized(2, Direction::PlusX);
        let cut = run_protocol_until(initial.clone(), &pair(0.4), &p, HamiltonianChoice::Full, KrylovOptions::default(), |_, r| {
            r.cycle_index == 3
        })
        .unwrap();
        assert_eq!(cut.value("stopped_after_cycle"), Some("3"));
        assert_eq!(cut.records[..], full.records[..1 + 4 * 3]);
        assert_eq!(cut.cycle_means[..], full.cycle_means[..3]);
        // a predicate that holds only at the last cycle changes nothing
        let last = run_protocol_until(initial, &pair(0.4), &p, HamiltonianChoice::Full, KrylovOptions::default(), |_, r| {
            r.cycle_index == 8
        })
        .unwrap();
        assert_eq!(last, full);
    }

    #[test]
    fn noise_free_times_are_multiples_of_tau() {
        let p = DriveProtocol { noise_fraction: 0.0, ..protocol() };
        let s = run_protocol(&pair(0.4), &p, HamiltonianChoice::Full).unwrap();
        let last = s.records.last().unwrap();
        assert!((last.time - 20.0 * 0.1).abs() < 1e-12);
    }

    #[test]
    fn invalid_protocols_rejected() {
        let p = protocol();
        for bad in [
            DriveProtocol { fast_pulses: 0, ..p },
            DriveProtocol { cycles: 0, ..p },
            DriveProtocol { tau: 0.0, ..p },
            DriveProtocol { noise_fraction: 1.0, ..p },
        ] {
            assert!(run_protocol(&pair(0.4), &bad, HamiltonianChoice::Full).is_err());
        }
    }

    #[test]
    fn evolved_zero_is_polarized() {
        let s = prepare_state(&pair(0.4), InitialState::Evolved { t_d: 0.0 }, KrylovOptions::default()).unwrap();
        assert_eq!(s, StateVector::polarized(2, Direction::PlusX));
    }

    #[test]
    fn csv_roundtrip() {
        let s = run_protocol(&pair(0.4), &protocol(), HamiltonianChoice::Full).unwrap();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        s.write_csv(&mut a).unwrap();
        s.write_cycle_means_csv(&mut b).unwrap();
        let back = TimeSeries::read_csv(a.as_slice(), Some(b.as_slice())).unwrap();
        assert_eq!(back, s);
    }
}
