//! Dense reference computations for small systems: Kronecker-product
//! assembly, eigendecomposition propagators, toggling-frame sums and
//! Floquet quasi-energy pairing.
//!
//! Everything here is deliberately independent of the matrix-free engine:
//! single-spin rotations come from diagonalizing `n·σ/2`, not from the
//! engine's closed-form gate.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::engine::StateVector;
use crate::error::{Error, Result};
use crate::operators::{Axis, RotationSpec, TermOperator};

/// Largest spin count accepted by dense paths.
pub const MAX_DENSE_SITES: usize = 10;
/// Largest spin count accepted by the toggling-frame sum.
pub const MAX_TOGGLING_SITES: usize = 8;

type CMatrix = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_sites(sites: usize, max: usize) -> Result<()> {
    if sites > max {
        Err(Error::TooLarge { sites, max })
    } else {
        Ok(())
    }
}

/// A `2^L × 2^L` complex matrix in the engine's basis ordering (bit `j` of
/// the row index is site `j`, 0 meaning spin up).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    sites: usize,
    matrix: CMatrix,
}

impl DenseOperator {
    pub fn from_matrix(sites: usize, matrix: CMatrix) -> Result<Self> {
        check_sites(sites, MAX_DENSE_SITES)?;
        let dim = 1usize << sites;
        if matrix.shape() != (dim, dim) {
            return Err(Error::InvalidParameter(format!("expected {dim}x{dim} matrix, got {:?}", matrix.shape())));
        }
        Ok(Self { sites, matrix })
    }

    pub fn identity(sites: usize) -> Result<Self> {
        check_sites(sites, MAX_DENSE_SITES)?;
        let dim = 1usize << sites;
        Ok(Self { sites, matrix: CMatrix::identity(dim, dim) })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self { sites: self.sites, matrix: self.matrix.adjoint() }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self { sites: self.sites, matrix: &self.matrix * &rhs.matrix }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self { sites: self.sites, matrix: &self.matrix + &rhs.matrix }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self { sites: self.sites, matrix: &self.matrix - &rhs.matrix }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { sites: self.sites, matrix: self.matrix.map(|z| z * s) }
    }

    /// `self·rhs − rhs·self`.
    pub fn commutator(&self, rhs: &Self) -> Self {
        Self { sites: self.sites, matrix: &self.matrix * &rhs.matrix - &rhs.matrix * &self.matrix }
    }

    /// Frobenius norm (an upper bound on the spectral norm).
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    /// `‖U†U − 1‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.matrix.nrows();
        (self.matrix.adjoint() * &self.matrix - CMatrix::identity(dim, dim)).norm()
    }

    /// `min_φ ‖self − e^{iφ} other‖_F`.
    pub fn distance_up_to_phase(&self, other: &Self) -> f64 {
        let overlap: Complex64 = other.matrix.iter().zip(self.matrix.iter()).map(|(b, a)| b.conj() * a).sum();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
        (&self.matrix - other.matrix.map(|z| z * phase)).norm()
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.sites() != self.sites {
            return Err(Error::SiteMismatch { expected: self.sites, found: state.sites() });
        }
        let v = DVector::from_column_slice(state.amplitudes());
        let out = &self.matrix * v;
        StateVector::from_amplitudes(self.sites, out.as_slice().to_vec())
    }
}

fn spin_matrix(axis: Axis) -> CMatrix {
    let z = c(0.0, 0.0);
    match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[z, c(0.5, 0.0), c(0.5, 0.0), z]),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[z, c(0.0, -0.5), c(0.0, 0.5), z]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), z, z, c(-0.5, 0.0)]),
    }
}

/// `op_{L−1} ⊗ … ⊗ op_0`, so that site 0 is the least significant bit.
fn kron_sites(sites: usize, site_op: impl Fn(usize) -> CMatrix) -> CMatrix {
    let mut m = CMatrix::from_element(1, 1, c(1.0, 0.0));
    for j in (0..sites).rev() {
        m = m.kronecker(&site_op(j));
    }
    m
}

/// Exact Kronecker-product assembly of a term operator.
pub fn dense_assemble(op: &TermOperator) -> Result<DenseOperator> {
    let l = op.sites();
    check_sites(l, MAX_DENSE_SITES)?;
    let dim = 1usize << l;
    let mut total = CMatrix::zeros(dim, dim);
    for term in op.terms() {
        let m = kron_sites(l, |j| match term.factors.iter().find(|f| f.0 == j) {
            Some(&(_, axis)) => spin_matrix(axis),
            None => CMatrix::identity(2, 2),
        });
        total += m * c(term.coeff, 0.0);
    }
    Ok(DenseOperator { sites: l, matrix: total })
}

/// Eigendecomposition of a Hermitian operator, reusable across durations.
#[derive(Clone, Debug)]
pub struct DenseSpectrum {
    sites: usize,
    values: Vec<f64>,
    vectors: CMatrix,
}

impl DenseSpectrum {
    pub fn new(h: &DenseOperator) -> Self {
        let eig = SymmetricEigen::new(h.matrix.clone());
        Self { sites: h.sites, values: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// `exp(−i·duration·H)`.
    pub fn propagator(&self, duration: f64) -> DenseOperator {
        let phases = DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&e| Complex64::new(0.0, -duration * e).exp()),
        );
        let scaled = CMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, k| self.vectors[(i, k)] * phases[k]);
        DenseOperator { sites: self.sites, matrix: scaled * self.vectors.adjoint() }
    }
}

pub fn dense_propagator(h: &DenseOperator, duration: f64) -> DenseOperator {
    DenseSpectrum::new(h).propagator(duration)
}

/// `exp(−iθ n·σ/2)` from the eigendecomposition of `n·σ/2`.
fn single_spin_rotation(rotation: &RotationSpec) -> CMatrix {
    let [nx, ny, nz] = rotation.axis();
    let gen = spin_matrix(Axis::X) * c(nx, 0.0) + spin_matrix(Axis::Y) * c(ny, 0.0) + spin_matrix(Axis::Z) * c(nz, 0.0);
    let eig = SymmetricEigen::new(gen);
    let d = CMatrix::from_diagonal(&DVector::from_iterator(
        2,
        eig.eigenvalues.iter().map(|&e| Complex64::new(0.0, -rotation.angle() * e).exp()),
    ));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Dense 2×2 single-spin rotation matrix (basis ↑, ↓).
pub fn dense_single_spin_rotation(rotation: &RotationSpec) -> DenseOperator {
    DenseOperator { sites: 1, matrix: single_spin_rotation(rotation) }
}

/// The collective rotation `exp(−iθ n·𝓘)` as a dense operator.
pub fn dense_collective_rotation(sites: usize, rotation: &RotationSpec) -> Result<DenseOperator> {
    check_sites(sites, MAX_DENSE_SITES)?;
    let single = single_spin_rotation(rotation);
    Ok(DenseOperator { sites, matrix: kron_sites(sites, |_| single.clone()) })
}

/// Brute-force toggling-frame average `(1/N) Σ_{n=1..N} Uₓⁿ H Uₓ⁻ⁿ`
/// with `Uₓ = exp(−iϑ𝓘ₓ)`.
pub fn toggling_sum(h: &TermOperator, fast_pulses: usize, theta: f64) -> Result<DenseOperator> {
    check_sites(h.sites(), MAX_TOGGLING_SITES)?;
    if fast_pulses == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let dense = dense_assemble(h)?;
    let u = dense_collective_rotation(h.sites(), &RotationSpec::about_x(theta))?;
    let ud = u.adjoint();
    let mut current = dense;
    let mut acc = CMatrix::zeros(current.matrix.nrows(), current.matrix.ncols());
    for _ in 0..fast_pulses {
        current = u.mul(&current).mul(&ud);
        acc += &current.matrix;
    }
    Ok(DenseOperator { sites: h.sites(), matrix: acc / c(fast_pulses as f64, 0.0) })
}

/// Idealized period-doubling Floquet unitary `exp(−iT H̄) · exp(−iπ𝓘_z)`.
pub fn pdtc_unitary(leading: &DenseOperator, period: f64) -> Result<DenseOperator> {
    let parity = dense_collective_rotation(leading.sites, &RotationSpec::about_z(PI))?;
    Ok(dense_propagator(leading, period).mul(&parity))
}

/// `|⟨C±|U|C±⟩|` for the cat states `(|+x…⟩ ± |−x…⟩)/√2`.
pub fn cat_state_fidelity(u: &DenseOperator, plus: bool) -> Result<f64> {
    let cat = StateVector::cat(u.sites, plus);
    let image = u.apply(&cat)?;
    Ok(cat.inner(&image).norm())
}

/// Quasi-energy pairing diagnostics of a Floquet unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct PairingReport {
    pub sites: usize,
    pub period: f64,
    /// Eigenphases in `(−π, π]`, ascending.
    pub phases: Vec<f64>,
    /// Largest distance (rad, on the circle) from an eigenphase shifted by
    /// π to its nearest eigenphase.
    pub max_phase_defect: f64,
    /// The same defect in quasi-energy units (`max_phase_defect / period`).
    pub max_quasi_energy_defect: f64,
    /// Phase defect restricted to the sectors with nonzero `𝓘ₓ`, where the
    /// parity maps each sector onto a distinct partner. The `𝓘ₓ = 0` sector
    /// is mapped onto itself and carries no pairing guarantee.
    pub broken_sector_phase_defect: f64,
}

impl fmt::Display for PairingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pairing L={} T={:e}", self.sites, self.period)?;
        writeln!(f, "eigenphases {}", self.phases.len())?;
        writeln!(f, "max_phase_defect {:e}", self.max_phase_defect)?;
        writeln!(f, "max_quasi_energy_defect {:e}", self.max_quasi_energy_defect)?;
        write!(f, "broken_sector_phase_defect {:e}", self.broken_sector_phase_defect)
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Checks that every eigenphase has a partner shifted by exactly π, i.e.
/// quasi-energies pair up at separation π/T.
pub fn floquet_spectrum_pairing(u: &DenseOperator, period: f64) -> Result<PairingReport> {
    if u.sites % 2 == 1 {
        return Err(Error::OddSiteCount(u.sites));
    }
    if !(period > 0.0) {
        return Err(Error::InvalidParameter(format!("period must be positive, got {period}")));
    }
    let phases = eigenphases(u.matrix.clone());
    let max_phase_defect = max_pairing_defect(&phases);

    let ix = SymmetricEigen::new(dense_assemble(&TermOperator::collective(u.sites, Axis::X))?.matrix.clone());
    let columns: Vec<_> =
        (0..ix.eigenvalues.len()).filter(|&i| ix.eigenvalues[i].abs() > 0.25).map(|i| ix.eigenvectors.column(i)).collect();
    let basis = CMatrix::from_columns(&columns);
    let restricted = basis.adjoint() * &u.matrix * &basis;
    let broken_sector_phase_defect = max_pairing_defect(&eigenphases(restricted));

    Ok(PairingReport {
        sites: u.sites,
        period,
        phases,
        max_phase_defect,
        max_quasi_energy_defect: max_phase_defect / period,
        broken_sector_phase_defect,
    })
}

fn eigenphases(m: CMatrix) -> Vec<f64> {
    let (_, t) = Schur::new(m).unpack();
    let mut phases: Vec<f64> = (0..t.nrows())
        .map(|i| {
            let p = t[(i, i)].arg();
            if p <= -PI { p + 2.0 * PI } else { p }
        })
        .collect();
    phases.sort_by(f64::total_cmp);
    phases
}

fn max_pairing_defect(phases: &[f64]) -> f64 {
    phases
        .iter()
        .map(|&p| phases.iter().map(|&q| circular_distance(p + PI, q)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::CouplingSet;
    use crate::operators::{leading_effective_hamiltonian, system_hamiltonian};

    #[test]
    fn single_spin_x_is_half_pauli() {
        let op = TermOperator::collective(1, Axis::X);
        let d = dense_assemble(&op).unwrap();
        assert_eq!(d.matrix()[(0, 1)], c(0.5, 0.0));
        assert_eq!(d.matrix()[(1, 0)], c(0.5, 0.0));
        assert_eq!(d.matrix()[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn too_large_rejected() {
        assert!(matches!(dense_assemble(&TermOperator::zero(11)), Err(Error::TooLarge { .. })));
        assert!(toggling_sum(&TermOperator::zero(9), 2, 1.0).is_err());
    }

    #[test]
    fn zero_duration_propagator_is_identity() {
        let cs = CouplingSet::from_table(2, vec![0.0, 0.4, 0.4, 0.0], vec![0.2, 0.1]).unwrap();
        let h = dense_assemble(&system_hamiltonian(&cs)).unwrap();
        let u = dense_propagator(&h, 0.0);
        assert!(u.sub(&DenseOperator::identity(2).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn diagonal_hamiltonian_gives_phases() {
        let op = TermOperator::from_terms(2, vec![(0.7, vec![(0, Axis::Z)]), (-0.3, vec![(1, Axis::Z)])]).unwrap();
        let u = dense_propagator(&dense_assemble(&op).unwrap(), 1.3);
        for idx in 0..4usize {
            let e = 0.7 * if idx & 1 == 0 { 0.5 } else { -0.5 } - 0.3 * if idx & 2 == 0 { 0.5 } else { -0.5 };
            assert!((u.matrix()[(idx, idx)] - Complex64::new(0.0, -1.3 * e).exp()).norm() < 1e-14);
        }
    }

    #[test]
    fn two_spin_leading_spectrum_by_hand() {
        // b(½ZZ + ½YY − XX)/4 in Pauli form has Bell-state eigenvalues b·{−1/4, −1/4, 1/2, 0}
        let b = 0.8;
        let cs = CouplingSet::from_table(2, vec![0.0, b, b, 0.0], vec![0.0, 0.0]).unwrap();
        let spec = DenseSpectrum::new(&dense_assemble(&leading_effective_hamiltonian(&cs)).unwrap());
        let mut ev = spec.eigenvalues().to_vec();
        ev.sort_by(f64::total_cmp);
        let mut expected = [-b / 4.0, -b / 4.0, b / 2.0, 0.0];
        expected.sort_by(f64::total_cmp);
        for (a, e) in ev.iter().zip(expected) {
            assert!((a - e).abs() < 1e-14, "{ev:?}");
        }
    }

    #[test]
    fn toggling_limits() {
        let cs = CouplingSet::from_table(2, vec![0.0, 0.4, 0.4, 0.0], vec![0.2, -0.6]).unwrap();
        let h = system_hamiltonian(&cs);
        let dense = dense_assemble(&h).unwrap();
        let full = toggling_sum(&h, 3, 2.0 * PI).unwrap();
        assert!(full.sub(&dense).norm() < 1e-13);
        let one = toggling_sum(&h, 1, 0.7).unwrap();
        let u = dense_collective_rotation(2, &RotationSpec::about_x(0.7)).unwrap();
        assert!(one.sub(&u.mul(&dense).mul(&u.adjoint())).norm() < 1e-14);
    }

    #[test]
    fn free_pdtc_spectrum_is_paired() {
        let u = pdtc_unitary(&DenseOperator::from_matrix(2, CMatrix::zeros(4, 4)).unwrap(), 1.0).unwrap();
        let report = floquet_spectrum_pairing(&u, 1.0).unwrap();
        assert!(report.max_phase_defect < 1e-12);
        assert!(report.broken_sector_phase_defect < 1e-12);
        assert!(floquet_spectrum_pairing(&dense_collective_rotation(3, &RotationSpec::about_z(PI)).unwrap(), 1.0).is_err());
    }

    #[test]
    fn two_spin_pairing_holds_only_off_the_zero_sector() {
        // the x-singlet (energy 0) and the m=0 x-triplet (energy b/2) sit
        // in opposite parity sectors and are not partners
        let b = 0.8;
        let cs = CouplingSet::from_table(2, vec![0.0, b, b, 0.0], vec![0.0, 0.0]).unwrap();
        let h = dense_assemble(&leading_effective_hamiltonian(&cs)).unwrap();
        let t = 1.3;
        let report = floquet_spectrum_pairing(&pdtc_unitary(&h, t).unwrap(), t).unwrap();
        assert!(report.broken_sector_phase_defect < 1e-10);
        let split = 0.5 * b * t;
        assert!((report.max_phase_defect - split).abs() < 1e-10, "{report}");
    }
}
