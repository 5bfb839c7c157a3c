use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::RotationSpec;

/// Largest supported spin count for state vectors.
pub const MAX_SITES: usize = 26;

/// Product-state polarization directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    PlusX,
    MinusX,
    PlusY,
    MinusY,
    PlusZ,
    MinusZ,
}

impl Direction {
    const NAMES: [(Direction, &'static str); 6] = [
        (Direction::PlusX, "+x"),
        (Direction::MinusX, "-x"),
        (Direction::PlusY, "+y"),
        (Direction::MinusY, "-y"),
        (Direction::PlusZ, "+z"),
        (Direction::MinusZ, "-z"),
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES.iter().find(|(d, _)| *d == self).map(|(_, n)| *n).expect("every direction named")
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::NAMES.iter().find(|(_, n)| *n == s).map(|(d, _)| *d)
    }

    /// Single-spin amplitudes in the (↑, ↓) basis.
    fn spinor(self) -> [Complex64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        match self {
            Direction::PlusX => [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            Direction::MinusX => [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
            Direction::PlusY => [Complex64::new(h, 0.0), Complex64::new(0.0, h)],
            Direction::MinusY => [Complex64::new(h, 0.0), Complex64::new(0.0, -h)],
            Direction::PlusZ => [one, zero],
            Direction::MinusZ => [zero, one],
        }
    }
}

/// Pure state of `L` spins. Amplitude index bit `j` is site `j`, with bit
/// value 0 meaning `I_jz = +1/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    sites: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(sites: usize, amps: Vec<Complex64>) -> Result<Self> {
        if sites > MAX_SITES {
            return Err(Error::TooLarge { sites, max: MAX_SITES });
        }
        if amps.len() != 1 << sites {
            return Err(Error::InvalidParameter(format!(
                "expected {} amplitudes for L = {sites}, got {}",
                1usize << sites,
                amps.len()
            )));
        }
        Ok(Self { sites, amps })
    }

    pub fn polarized(sites: usize, direction: Direction) -> Self {
        assert!(sites <= MAX_SITES, "L = {sites} exceeds {MAX_SITES}");
        let spinor = direction.spinor();
        let amps = (0..1usize << sites)
            .map(|idx| (0..sites).fold(Complex64::new(1.0, 0.0), |acc, j| acc * spinor[(idx >> j) & 1]))
            .collect();
        Self { sites, amps }
    }

    /// `(|+x…⟩ ± |−x…⟩)/√2`; the two branches are orthogonal for `L ≥ 1`.
    pub fn cat(sites: usize, plus: bool) -> Self {
        let a = Self::polarized(sites, Direction::PlusX);
        let b = Self::polarized(sites, Direction::MinusX);
        let sign = if plus { 1.0 } else { -1.0 };
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = a.amps.iter().zip(&b.amps).map(|(u, v)| (u + v * sign) * h).collect();
        Self { sites, amps }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }
}

/// SU(2) matrix of `exp(−iθ n·σ/2)` in the (↑, ↓) basis.
pub fn rotation_gate(rotation: &RotationSpec) -> [[Complex64; 2]; 2] {
    let [nx, ny, nz] = rotation.axis();
    let (s, c) = (0.5 * rotation.angle()).sin_cos();
    [
        [Complex64::new(c, -s * nz), Complex64::new(-s * ny, -s * nx)],
        [Complex64::new(s * ny, -s * nx), Complex64::new(c, s * nz)],
    ]
}

/// Applies the same single-spin rotation to every site.
pub fn apply_collective_rotation(state: &mut StateVector, rotation: &RotationSpec) {
    if rotation.angle() == 0.0 {
        return;
    }
    let g = rotation_gate(rotation);
    let amps = &mut state.amps;
    for j in 0..state.sites {
        let bit = 1usize << j;
        for base in (0..amps.len()).step_by(bit << 1) {
            for idx in base..base + bit {
                let (u, d) = (amps[idx], amps[idx | bit]);
                amps[idx] = g[0][0] * u + g[0][1] * d;
                amps[idx | bit] = g[1][0] * u + g[1][1] * d;
            }
        }
    }
}

/// Collective magnetization `(2/L)⟨𝓘⟩`, i.e. the site-averaged Pauli
/// expectation values `(⟨x⟩, ⟨y⟩, ⟨z⟩)`.
pub fn measure_magnetization(state: &StateVector) -> (f64, f64, f64) {
    let amps = &state.amps;
    let (mut sx, mut sy, mut sz) = (0.0, 0.0, 0.0);
    for j in 0..state.sites {
        let bit = 1usize << j;
        for base in (0..amps.len()).step_by(bit << 1) {
            for idx in base..base + bit {
                let (u, d) = (amps[idx], amps[idx | bit]);
                let cross = u.conj() * d;
                sx += 2.0 * cross.re;
                sy += 2.0 * cross.im;
                sz += u.norm_sqr() - d.norm_sqr();
            }
        }
    }
    let l = state.sites.max(1) as f64;
    (sx / l, sy / l, sz / l)
}
