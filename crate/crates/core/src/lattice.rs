//! Pseudo-random 3D spin graphs and their dipolar couplings.
//!
//! Units: ħ = 1 and lengths are measured in ∛(μ₀ħγₙ²). In those units the
//! secular dipolar coupling is `b_jk = (3cos²α_jk − 1) / (4π |r_jk|³)` where
//! `α_jk` is the angle between the interspin vector and the field axis.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::engine::{measure_magnetization, CompiledOperator, KrylovOptions, Propagator, StateVector};
use crate::error::{parse_err, Error, Result};
use crate::operators::system_hamiltonian;

pub type Vec3 = [f64; 3];

/// Rejected proposals tolerated before graph generation gives up.
pub const DEFAULT_PROPOSAL_BUDGET: u64 = 1_000_000;

fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinGraph {
    positions: Vec<Vec3>,
    r_min: f64,
    r_max: f64,
    seed: u64,
}

impl SpinGraph {
    /// Incrementally grows a graph: the first spin sits at the origin, every
    /// further proposal is drawn uniformly from a cube of side
    /// `2·r_max·⌈L^{1/3}⌉` centred on it and accepted iff it keeps at least
    /// `r_min` from every spin and lies within `r_max` of at least one.
    pub fn generate(spins: usize, r_min: f64, r_max: f64, seed: u64) -> Result<Self> {
        Self::generate_with_budget(spins, r_min, r_max, seed, DEFAULT_PROPOSAL_BUDGET)
    }

    pub fn generate_with_budget(
        spins: usize,
        r_min: f64,
        r_max: f64,
        seed: u64,
        budget: u64,
    ) -> Result<Self> {
        if spins == 0 {
            return Err(Error::InvalidParameter("spin count must be positive".into()));
        }
        if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < r_min < r_max, got r_min={r_min}, r_max={r_max}"
            )));
        }
        let side = 2.0 * r_max * (spins as f64).cbrt().ceil();
        let half = 0.5 * side;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut positions: Vec<Vec3> = Vec::with_capacity(spins);
        positions.push([0.0; 3]);
        let mut rejected = 0u64;
        while positions.len() < spins {
            let candidate: Vec3 = [
                rng.random_range(-half..half),
                rng.random_range(-half..half),
                rng.random_range(-half..half),
            ];
            let mut too_close = false;
            let mut connected = false;
            for p in &positions {
                let d = norm(&sub(&candidate, p));
                if d < r_min {
                    too_close = true;
                    break;
                }
                if d < r_max {
                    connected = true;
                }
            }
            if too_close || !connected {
                rejected += 1;
                if rejected >= budget {
                    return Err(Error::GraphInfeasible { rejected });
                }
                continue;
            }
            positions.push(candidate);
        }
        Ok(Self { positions, r_min, r_max, seed })
    }

    /// Wraps externally supplied positions, checking both acceptance rules.
    pub fn from_positions(positions: Vec<Vec3>, r_min: f64, r_max: f64, seed: u64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidParameter("spin count must be positive".into()));
        }
        let graph = Self { positions, r_min, r_max, seed };
        graph.validate()?;
        Ok(graph)
    }

    /// Direct scan of all pairs against the minimum-distance and
    /// no-isolated-spin rules.
    pub fn validate(&self) -> Result<()> {
        let l = self.positions.len();
        for j in 0..l {
            let mut connected = l < 2;
            for k in 0..l {
                if j == k {
                    continue;
                }
                let d = norm(&sub(&self.positions[j], &self.positions[k]));
                if d < self.r_min {
                    return Err(Error::GraphRule(format!(
                        "spins {j} and {k} are {d} apart (r_min = {})",
                        self.r_min
                    )));
                }
                if d < self.r_max {
                    connected = true;
                }
            }
            if !connected {
                return Err(Error::GraphRule(format!("spin {j} has no partner within r_max")));
            }
        }
        Ok(())
    }

    pub fn spins(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniformly dilated copy (positions and both radii multiplied by `s`).
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            positions: self.positions.iter().map(|p| [p[0] * s, p[1] * s, p[2] * s]).collect(),
            r_min: self.r_min * s,
            r_max: self.r_max * s,
            seed: self.seed,
        }
    }
}

/// Parameters the on-site fields were drawn with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisorderSpec {
    pub mean: f64,
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSet {
    spins: usize,
    couplings: Vec<f64>,
    field_axis: Vec3,
    median: f64,
    fields: Vec<f64>,
    disorder: Option<DisorderSpec>,
}

/// Dipolar couplings of every pair relative to `field_axis`; fields start at zero.
pub fn compute_couplings(graph: &SpinGraph, field_axis: Vec3) -> Result<CouplingSet> {
    let axis_norm = norm(&field_axis);
    if !(axis_norm > 0.0) || !axis_norm.is_finite() {
        return Err(Error::InvalidParameter("field axis must be a nonzero vector".into()));
    }
    let axis = [field_axis[0] / axis_norm, field_axis[1] / axis_norm, field_axis[2] / axis_norm];
    let l = graph.spins();
    let mut couplings = vec![0.0; l * l];
    let mut connected = Vec::new();
    for j in 0..l {
        for k in (j + 1)..l {
            let r = sub(&graph.positions[k], &graph.positions[j]);
            let dist = norm(&r);
            if dist == 0.0 {
                return Err(Error::CoincidentPositions(j, k));
            }
            let cos = dot(&r, &axis) / dist;
            let b = (3.0 * cos * cos - 1.0) / (4.0 * PI * dist * dist * dist);
            couplings[j * l + k] = b;
            couplings[k * l + j] = b;
            if dist < graph.r_max {
                connected.push(b.abs());
            }
        }
    }
    Ok(CouplingSet {
        spins: l,
        couplings,
        field_axis: axis,
        median: median(&mut connected),
        fields: vec![0.0; l],
        disorder: None,
    })
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

impl CouplingSet {
    /// Builds a coupling set from an explicit symmetric table (row-major, `L×L`).
    pub fn from_table(spins: usize, couplings: Vec<f64>, fields: Vec<f64>) -> Result<Self> {
        if couplings.len() != spins * spins || fields.len() != spins {
            return Err(Error::InvalidParameter("coupling table / field length mismatch".into()));
        }
        for j in 0..spins {
            if couplings[j * spins + j] != 0.0 {
                return Err(Error::InvalidParameter(format!("b_{j}{j} must vanish")));
            }
            for k in 0..j {
                if couplings[j * spins + k] != couplings[k * spins + j] {
                    return Err(Error::InvalidParameter(format!("b_{j}{k} != b_{k}{j}")));
                }
            }
        }
        let mut all: Vec<f64> = (0..spins)
            .flat_map(|j| ((j + 1)..spins).map(move |k| (j, k)))
            .map(|(j, k)| couplings[j * spins + k].abs())
            .collect();
        Ok(Self {
            spins,
            median: median(&mut all),
            couplings,
            field_axis: [0.0, 0.0, 1.0],
            fields,
            disorder: None,
        })
    }

    /// Draws `c_j ~ Normal(mean, sigma)` i.i.d. from `seed`, replacing any previous fields.
    pub fn with_disorder(mut self, mean: f64, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0) || !mean.is_finite() || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("disorder needs sigma >= 0, got {sigma}")));
        }
        let normal = Normal::new(mean, sigma)
            .map_err(|e| Error::InvalidParameter(format!("normal distribution: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.fields = (0..self.spins).map(|_| normal.sample(&mut rng)).collect();
        self.disorder = Some(DisorderSpec { mean, sigma, seed });
        Ok(self)
    }

    pub fn spins(&self) -> usize {
        self.spins
    }

    pub fn coupling(&self, j: usize, k: usize) -> f64 {
        self.couplings[j * self.spins + k]
    }

    pub fn table(&self) -> &[f64] {
        &self.couplings
    }

    /// Pairs `(j, k, b_jk)` with `j < k`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let l = self.spins;
        (0..l).flat_map(move |j| ((j + 1)..l).map(move |k| (j, k, self.couplings[j * l + k])))
    }

    pub fn field_axis(&self) -> Vec3 {
        self.field_axis
    }

    /// Median |b_jk| over pairs closer than `r_max`.
    pub fn median(&self) -> f64 {
        self.median
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn disorder(&self) -> Option<DisorderSpec> {
        self.disorder
    }

    /// Copy with every `b_jk` set to zero (fields kept).
    pub fn without_couplings(&self) -> Self {
        let mut out = self.clone();
        out.couplings.iter_mut().for_each(|b| *b = 0.0);
        out
    }

    /// Copy with all on-site fields set to zero.
    pub fn without_fields(&self) -> Self {
        let mut out = self.clone();
        out.fields.iter_mut().for_each(|c| *c = 0.0);
        out.disorder = None;
        out
    }
}

/// The characteristic energy `J = 1/τ_d`: `τ_d` is the first time the
/// x̂-magnetization of the x̂-polarized state, evolving under the bare
/// system Hamiltonian, falls to 1/e. Samples are taken every `dt` and the
/// crossing is interpolated linearly.
pub fn estimate_coupling_scale(couplings: &CouplingSet, dt: f64, t_max: f64) -> Result<f64> {
    if couplings.spins() < 2 {
        return Err(Error::InvalidParameter("coupling scale needs at least two spins".into()));
    }
    if !(dt > 0.0 && t_max > 0.0) {
        return Err(Error::InvalidParameter("dt and t_max must be positive".into()));
    }
    let hamiltonian = CompiledOperator::new(&system_hamiltonian(couplings));
    let mut propagator = Propagator::new(&hamiltonian, KrylovOptions::default());
    let mut state = StateVector::polarized(couplings.spins(), crate::engine::Direction::PlusX);
    let threshold = (-1.0f64).exp();
    let mut prev = (0.0, measure_magnetization(&state).0);
    let steps = (t_max / dt).ceil() as usize;
    for step in 1..=steps {
        propagator.evolve(&mut state, dt)?;
        let t = step as f64 * dt;
        let x = measure_magnetization(&state).0;
        if x <= threshold {
            let frac = (prev.1 - threshold) / (prev.1 - x);
            let tau_d = prev.0 + frac * (t - prev.0);
            return Ok(1.0 / tau_d);
        }
        prev = (t, x);
    }
    Err(Error::ScaleNotResolved)
}

/// [`estimate_coupling_scale`] sampled at `0.002/b̄` up to `200/b̄`, which
/// resolves the crossing for the dipolar graphs generated here.
pub fn coupling_scale(couplings: &CouplingSet) -> Result<f64> {
    let b = couplings.median();
    if !(b > 0.0) {
        return Err(Error::ScaleNotResolved);
    }
    estimate_coupling_scale(couplings, 0.002 / b, 200.0 / b)
}

const GRAPH_HEADER: &str = "# pdtc spin graph";
const GRAPH_VERSION: u32 = 1;

/// Writes the versioned plain-text graph record. Floats use the shortest
/// representation that parses back to the identical bits.
pub fn write_graph<W: Write>(mut w: W, graph: &SpinGraph, couplings: &CouplingSet) -> Result<()> {
    let l = graph.spins();
    if couplings.spins() != l {
        return Err(Error::SiteMismatch { expected: l, found: couplings.spins() });
    }
    writeln!(w, "{GRAPH_HEADER}")?;
    writeln!(w, "version {GRAPH_VERSION}")?;
    writeln!(w, "spins {l}")?;
    writeln!(w, "r_min {:e}", graph.r_min)?;
    writeln!(w, "r_max {:e}", graph.r_max)?;
    writeln!(w, "seed {}", graph.seed)?;
    writeln!(w, "units length=cbrt(mu0*hbar*gamma_n^2) energy=angular-frequency hbar=1")?;
    let a = couplings.field_axis;
    writeln!(w, "field_axis {:e} {:e} {:e}", a[0], a[1], a[2])?;
    writeln!(w, "median {:e}", couplings.median)?;
    match couplings.disorder {
        Some(d) => writeln!(w, "disorder {:e} {:e} {}", d.mean, d.sigma, d.seed)?,
        None => writeln!(w, "disorder none")?,
    }
    writeln!(w, "positions")?;
    for p in &graph.positions {
        writeln!(w, "{:e} {:e} {:e}", p[0], p[1], p[2])?;
    }
    writeln!(w, "couplings")?;
    for j in 0..l {
        let row: Vec<String> = (0..l).map(|k| format!("{:e}", couplings.coupling(j, k))).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    writeln!(w, "fields")?;
    for c in &couplings.fields {
        writeln!(w, "{c:e}")?;
    }
    Ok(())
}

/// Reads a graph record and checks that the stored coupling table matches
/// the one recomputed from the positions bit for bit.
pub fn read_graph<R: BufRead>(r: R) -> Result<(SpinGraph, CouplingSet)> {
    let lines: Vec<String> = r.lines().collect::<std::io::Result<_>>()?;
    let mut it = lines.iter().enumerate().map(|(i, s)| (i + 1, s.trim()));
    let mut next = |what: &str| -> Result<(usize, &str)> {
        it.next().ok_or_else(|| parse_err(lines.len(), format!("unexpected end of file, expected {what}")))
    };
    let (n, head) = next("header")?;
    if head != GRAPH_HEADER {
        return Err(parse_err(n, "missing graph header"));
    }
    let version: u32 = keyed(next("version")?, "version")?;
    if version != GRAPH_VERSION {
        return Err(parse_err(2, format!("unsupported graph version {version}")));
    }
    let spins: usize = keyed(next("spins")?, "spins")?;
    let r_min: f64 = keyed(next("r_min")?, "r_min")?;
    let r_max: f64 = keyed(next("r_max")?, "r_max")?;
    let seed: u64 = keyed(next("seed")?, "seed")?;
    let (n, units) = next("units")?;
    if !units.starts_with("units ") {
        return Err(parse_err(n, "expected units line"));
    }
    let (n, axis_line) = next("field_axis")?;
    let axis = floats(n, axis_line.strip_prefix("field_axis ").ok_or_else(|| parse_err(n, "expected field_axis"))?)?;
    if axis.len() != 3 {
        return Err(parse_err(n, "field_axis needs three components"));
    }
    let (n, median_line) = next("median")?;
    let stored_median: f64 = keyed((n, median_line), "median")?;
    let (n, dis_line) = next("disorder")?;
    let dis = dis_line.strip_prefix("disorder ").ok_or_else(|| parse_err(n, "expected disorder"))?;
    let disorder = if dis == "none" {
        None
    } else {
        let parts: Vec<&str> = dis.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(n, "disorder needs mean, sigma and seed"));
        }
        Some(DisorderSpec {
            mean: parts[0].parse().map_err(|_| parse_err(n, "bad disorder mean"))?,
            sigma: parts[1].parse().map_err(|_| parse_err(n, "bad disorder sigma"))?,
            seed: parts[2].parse().map_err(|_| parse_err(n, "bad disorder seed"))?,
        })
    };
    section(next("positions")?, "positions")?;
    let mut positions = Vec::with_capacity(spins);
    for _ in 0..spins {
        let (n, line) = next("position")?;
        let v = floats(n, line)?;
        if v.len() != 3 {
            return Err(parse_err(n, "position needs three components"));
        }
        positions.push([v[0], v[1], v[2]]);
    }
    section(next("couplings")?, "couplings")?;
    let mut table = Vec::with_capacity(spins * spins);
    for _ in 0..spins {
        let (n, line) = next("coupling row")?;
        let row = floats(n, line)?;
        if row.len() != spins {
            return Err(parse_err(n, "coupling row has wrong length"));
        }
        table.extend(row);
    }
    section(next("fields")?, "fields")?;
    let mut fields = Vec::with_capacity(spins);
    for _ in 0..spins {
        let (n, line) = next("field")?;
        fields.push(line.parse().map_err(|_| parse_err(n, "bad field value"))?);
    }

    let graph = SpinGraph::from_positions(positions, r_min, r_max, seed)?;
    let mut couplings = compute_couplings(&graph, [axis[0], axis[1], axis[2]])?;
    let identical = couplings
        .couplings
        .iter()
        .zip(&table)
        .all(|(a, b)| a.to_bits() == b.to_bits());
    if !identical || couplings.median.to_bits() != stored_median.to_bits() {
        return Err(Error::GraphRule("stored coupling table differs from the positions".into()));
    }
    couplings.fields = fields;
    couplings.disorder = disorder;
    Ok((graph, couplings))
}

fn keyed<T: std::str::FromStr>((n, line): (usize, &str), key: &str) -> Result<T> {
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| parse_err(n, format!("expected `{key}`")))?
        .trim()
        .parse()
        .map_err(|_| parse_err(n, format!("bad value for `{key}`")))
}

fn section((n, line): (usize, &str), name: &str) -> Result<()> {
    if line == name {
        Ok(())
    } else {
        Err(parse_err(n, format!("expected section `{name}`")))
    }
}

fn floats(n: usize, line: &str) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| parse_err(n, format!("bad number `{t}`"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_spin_sits_at_origin() {
        let g = SpinGraph::generate(1, 0.3, 0.4, 9).unwrap();
        assert_eq!(g.positions(), &[[0.0, 0.0, 0.0]]);
        g.validate().unwrap();
    }

    #[test]
    fn paper_radii_graph_passes_both_rules() {
        let g = SpinGraph::generate(14, 0.7, 0.8, 2021).unwrap();
        assert_eq!(g.spins(), 14);
        g.validate().unwrap();
    }

    #[test]
    fn generation_is_deterministic() {
        let a = SpinGraph::generate(6, 0.7, 0.8, 77).unwrap();
        let b = SpinGraph::generate(6, 0.7, 0.8, 77).unwrap();
        assert_eq!(a, b);
        let c = SpinGraph::generate(6, 0.7, 0.8, 78).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn infeasible_budget_fails() {
        let err = SpinGraph::generate_with_budget(40, 0.7, 0.8, 1, 50).unwrap_err();
        assert!(matches!(err, Error::GraphInfeasible { .. }));
        assert!(err.to_string().contains("graph infeasible for given parameters"));
    }

    #[test]
    fn bad_radii_rejected() {
        assert!(SpinGraph::generate(3, 0.8, 0.7, 1).is_err());
        assert!(SpinGraph::generate(3, 0.0, 0.7, 1).is_err());
        assert!(SpinGraph::generate(0, 0.5, 0.7, 1).is_err());
    }

    #[test]
    fn axial_pair_coupling() {
        let g = SpinGraph::from_positions(vec![[0.0; 3], [0.0, 0.0, 1.0]], 0.5, 1.5, 0).unwrap();
        let cs = compute_couplings(&g, [0.0, 0.0, 1.0]).unwrap();
        let expected = 2.0 / (4.0 * PI);
        assert!((cs.coupling(0, 1) - expected).abs() < 1e-15);
        assert!((cs.coupling(0, 1) - 0.1592).abs() < 1e-4);
        assert_eq!(cs.coupling(1, 0), cs.coupling(0, 1));
        assert_eq!(cs.coupling(0, 0), 0.0);
        assert_eq!(cs.median(), expected);
    }

    #[test]
    fn magic_angle_pair_decouples() {
        // cos²α = 1/3 along the cube diagonal
        let s = 1.0 / 3f64.sqrt();
        let g = SpinGraph::from_positions(vec![[0.0; 3], [s, s, s]], 0.5, 1.5, 0).unwrap();
        let cs = compute_couplings(&g, [0.0, 0.0, 1.0]).unwrap();
        assert!(cs.coupling(0, 1).abs() < 1e-16);
    }

    #[test]
    fn coincident_positions_fail() {
        let g = SpinGraph { positions: vec![[0.0; 3], [0.0; 3]], r_min: 0.1, r_max: 1.0, seed: 0 };
        assert!(matches!(compute_couplings(&g, [0.0, 0.0, 1.0]), Err(Error::CoincidentPositions(0, 1))));
        assert!(compute_couplings(&g, [0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn zero_sigma_fields_equal_mean() {
        let g = SpinGraph::generate(5, 0.7, 0.8, 3).unwrap();
        let cs = compute_couplings(&g, [0.0, 0.0, 1.0]).unwrap().with_disorder(0.25, 0.0, 11).unwrap();
        assert!(cs.fields().iter().all(|&c| c == 0.25));
    }

    #[test]
    fn disorder_sample_mean_within_standard_error() {
        let l = 10_000;
        let cs = CouplingSet::from_table(l, vec![0.0; 0], vec![]).err();
        assert!(cs.is_some());
        // a coupling-free set with 10⁴ sites exercises only the sampler
        let mut base = CouplingSet {
            spins: l,
            couplings: Vec::new(),
            field_axis: [0.0, 0.0, 1.0],
            median: 0.0,
            fields: vec![0.0; l],
            disorder: None,
        };
        base = base.with_disorder(1.3, 2.0, 5).unwrap();
        let mean = base.fields().iter().sum::<f64>() / l as f64;
        assert!((mean - 1.3).abs() < 5.0 * 2.0 / (l as f64).sqrt());
        let again = base.clone().with_disorder(1.3, 2.0, 5).unwrap();
        assert_eq!(again.fields(), base.fields());
    }

    #[test]
    fn graph_record_roundtrip_is_bit_exact() {
        let g = SpinGraph::generate(7, 0.7, 0.8, 99).unwrap();
        let cs = compute_couplings(&g, [0.0, 0.0, 1.0]).unwrap();
        let cs = cs.clone().with_disorder(cs.median(), 10.0 * cs.median(), 4).unwrap();
        let mut buf = Vec::new();
        write_graph(&mut buf, &g, &cs).unwrap();
        let (g2, cs2) = read_graph(buf.as_slice()).unwrap();
        assert_eq!(g, g2);
        assert_eq!(cs, cs2);
        let mut buf2 = Vec::new();
        write_graph(&mut buf2, &g2, &cs2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn tampered_record_rejected() {
        let g = SpinGraph::generate(3, 0.7, 0.8, 1).unwrap();
        let cs = compute_couplings(&g, [0.0, 0.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_graph(&mut buf, &g, &cs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let idx = text.find("couplings\n").unwrap() + "couplings\n".len();
        let mut tampered = text.clone();
        tampered.replace_range(idx..idx + 1, "1");
        assert!(read_graph(tampered.as_bytes()).is_err());
    }

    #[test]
    fn coupling_scale_needs_two_spins() {
        let g = SpinGraph::generate(1, 0.7, 0.8, 1).unwrap();
        let cs = compute_couplings(&g, [0.0, 0.0, 1.0]).unwrap();
        assert!(estimate_coupling_scale(&cs, 0.1, 10.0).is_err());
    }

    #[test]
    fn two_spin_coupling_scale_matches_closed_form() {
        // ⟨x⟩(t) = cos(3bt/2) for two spins with coupling b and no fields
        let b = 0.37;
        let cs = CouplingSet::from_table(2, vec![0.0, b, b, 0.0], vec![0.0, 0.0]).unwrap();
        let dt = 1e-3;
        let j = estimate_coupling_scale(&cs, dt, 20.0).unwrap();
        let t_star = (2.0 / (3.0 * b)) * (-1.0f64).exp().acos();
        // linear interpolation of a cosine over one sample: error O(dt²)
        assert!((1.0 / j - t_star).abs() < 1e-5, "{} vs {}", 1.0 / j, t_star);
    }

    #[test]
    fn uncoupled_unresolved_scale_errors() {
        let cs = CouplingSet::from_table(2, vec![0.0; 4], vec![0.0, 0.0]).unwrap();
        assert!(matches!(estimate_coupling_scale(&cs, 0.1, 1.0), Err(Error::ScaleNotResolved)));
    }
}
