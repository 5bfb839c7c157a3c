//! Lanczos approximation of `exp(−itH)ψ` for Hermitian `H`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::kernel::CompiledOperator;
use super::state::StateVector;
use crate::error::{Error, Result};

/// Largest norm change a step may introduce before it is reported instead
/// of silently renormalized.
pub const NORM_DRIFT_LIMIT: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOptions {
    /// Target 2-norm error per step.
    pub tol: f64,
    /// Maximum Krylov subspace dimension.
    pub max_dim: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_dim: 64 }
    }
}

/// Reusable propagator for a fixed Hamiltonian; owns its Krylov workspace.
pub struct Propagator<'a> {
    hamiltonian: &'a CompiledOperator,
    options: KrylovOptions,
    basis: Vec<Vec<Complex64>>,
    work: Vec<Complex64>,
}

impl<'a> Propagator<'a> {
    pub fn new(hamiltonian: &'a CompiledOperator, options: KrylovOptions) -> Self {
        Self { hamiltonian, options, basis: Vec::new(), work: vec![Complex64::new(0.0, 0.0); hamiltonian.dim()] }
    }

    pub fn options(&self) -> KrylovOptions {
        self.options
    }

    /// Replaces `state` by `exp(−i·duration·H)·state` in one Krylov step.
    pub fn evolve(&mut self, state: &mut StateVector, duration: f64) -> Result<()> {
        if state.sites() != self.hamiltonian.sites() {
            return Err(Error::SiteMismatch { expected: self.hamiltonian.sites(), found: state.sites() });
        }
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(Error::InvalidParameter(format!("duration must be nonnegative, got {duration}")));
        }
        if duration == 0.0 {
            return Ok(());
        }
        let norm_in = state.norm();
        if norm_in == 0.0 {
            return Ok(());
        }
        let dim = self.hamiltonian.dim();
        let max_dim = self.options.max_dim.clamp(1, dim);
        while self.basis.len() < max_dim {
            self.basis.push(vec![Complex64::new(0.0, 0.0); dim]);
        }
        let inv = 1.0 / norm_in;
        for (b, a) in self.basis[0].iter_mut().zip(state.amplitudes()) {
            *b = a * inv;
        }

        let mut alpha: Vec<f64> = Vec::with_capacity(max_dim);
        let mut beta: Vec<f64> = Vec::with_capacity(max_dim);
        let mut estimate = f64::INFINITY;
        let mut coeffs: Vec<Complex64> = Vec::new();
        let scale = self.hamiltonian.norm_bound().max(f64::MIN_POSITIVE);

        for j in 0..max_dim {
            self.hamiltonian.apply(&self.basis[j], &mut self.work);
            let a: f64 = self.basis[j].iter().zip(&self.work).map(|(v, w)| (v.conj() * w).re).sum();
            alpha.push(a);
            // three-term recurrence, then one full reorthogonalization sweep
            for (w, v) in self.work.iter_mut().zip(&self.basis[j]) {
                *w -= v * a;
            }
            if j > 0 {
                let b_prev = beta[j - 1];
                for (w, v) in self.work.iter_mut().zip(&self.basis[j - 1]) {
                    *w -= v * b_prev;
                }
            }
            for i in 0..=j {
                let proj: Complex64 = self.basis[i].iter().zip(&self.work).map(|(v, w)| v.conj() * w).sum();
                for (w, v) in self.work.iter_mut().zip(&self.basis[i]) {
                    *w -= proj * v;
                }
            }
            let b = self.work.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();

            let small = tridiagonal_exp(&alpha, &beta, duration);
            let breakdown = b <= 1e-13 * scale;
            estimate = if breakdown { 0.0 } else { b * small[j].norm() };
            coeffs = small;
            if breakdown || estimate < self.options.tol {
                break;
            }
            if j + 1 == max_dim {
                break;
            }
            beta.push(b);
            let inv_b = 1.0 / b;
            for (v, w) in self.basis[j + 1].iter_mut().zip(&self.work) {
                *v = w * inv_b;
            }
        }
        if estimate >= self.options.tol {
            return Err(Error::KrylovNotConverged { estimate, dim: coeffs.len() });
        }

        let amps = state.amplitudes_mut();
        amps.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        for (c, v) in coeffs.iter().zip(&self.basis) {
            let c = c * norm_in;
            for (a, b) in amps.iter_mut().zip(v) {
                *a += c * b;
            }
        }
        let norm_out = state.norm();
        let drift = (norm_out - norm_in).abs();
        if drift >= NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift(drift));
        }
        let fix = 1.0 / norm_out;
        state.amplitudes_mut().iter_mut().for_each(|a| *a *= fix);
        Ok(())
    }

    /// Evolves over a possibly long `duration` in equal substeps, each small
    /// enough that one Krylov step converges comfortably.
    pub fn evolve_long(&mut self, state: &mut StateVector, duration: f64) -> Result<()> {
        const MAX_PHASE_PER_STEP: f64 = 8.0;
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(Error::InvalidParameter(format!("duration must be nonnegative, got {duration}")));
        }
        let steps = ((duration * self.hamiltonian.norm_bound()) / MAX_PHASE_PER_STEP).ceil().max(1.0) as usize;
        let dt = duration / steps as f64;
        for _ in 0..steps {
            self.evolve(state, dt)?;
        }
        Ok(())
    }
}

/// First column of `exp(−itT)` for the symmetric tridiagonal `T` with
/// diagonal `alpha` and off-diagonal `beta`.
fn tridiagonal_exp(alpha: &[f64], beta: &[f64], t: f64) -> Vec<Complex64> {
    let m = alpha.len();
    let mut tri = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        tri[(i, i)] = alpha[i];
        if i + 1 < m {
            tri[(i, i + 1)] = beta[i];
            tri[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(tri);
    (0..m)
        .map(|i| {
            (0..m)
                .map(|k| {
                    let phase = Complex64::new(0.0, -t * eig.eigenvalues[k]).exp();
                    phase * (eig.eigenvectors[(i, k)] * eig.eigenvectors[(0, k)])
                })
                .sum()
        })
        .collect()
}

/// One-shot `exp(−i·duration·H)·state` with a fresh workspace.
pub fn evolve_step(
    state: &mut StateVector,
    hamiltonian: &CompiledOperator,
    duration: f64,
    options: KrylovOptions,
) -> Result<()> {
    Propagator::new(hamiltonian, options).evolve(state, duration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{measure_magnetization, Direction};
    use crate::operators::{Axis, TermOperator};

    #[test]
    fn zero_duration_is_identity() {
        let op = TermOperator::from_terms(2, vec![(1.0, vec![(0, Axis::X), (1, Axis::Y)])]).unwrap();
        let h = CompiledOperator::new(&op);
        let mut s = StateVector::polarized(2, Direction::PlusZ);
        let before = s.clone();
        evolve_step(&mut s, &h, 0.0, KrylovOptions::default()).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn ising_pair_follows_cosine_law() {
        // H = b I_1z I_2z: each spin precesses at ±b/2, so ⟨x⟩(t) = cos(bt/2)
        let b = 0.9;
        let op = TermOperator::from_terms(2, vec![(b, vec![(0, Axis::Z), (1, Axis::Z)])]).unwrap();
        let h = CompiledOperator::new(&op);
        let mut prop = Propagator::new(&h, KrylovOptions::default());
        let mut s = StateVector::polarized(2, Direction::PlusX);
        for step in 1..=40 {
            prop.evolve(&mut s, 0.25).unwrap();
            let t = 0.25 * step as f64;
            let (x, _, _) = measure_magnetization(&s);
            assert!((x - (b * t / 2.0).cos()).abs() < 1e-10, "t={t}: {x}");
        }
    }

    #[test]
    fn oversized_step_reports_budget() {
        let op = TermOperator::collective(8, Axis::X).plus(&TermOperator::collective(8, Axis::Z)).unwrap();
        let h = CompiledOperator::new(&op);
        let mut s = StateVector::polarized(8, Direction::PlusY);
        let err = evolve_step(&mut s, &h, 1e3, KrylovOptions { tol: 1e-10, max_dim: 8 }).unwrap_err();
        assert!(err.to_string().starts_with("step too large; reduce duration or raise budget"));
    }

    #[test]
    fn long_evolution_splits() {
        let op = TermOperator::collective(3, Axis::Z);
        let h = CompiledOperator::new(&op);
        let mut prop = Propagator::new(&h, KrylovOptions::default());
        let mut s = StateVector::polarized(3, Direction::PlusX);
        prop.evolve_long(&mut s, 100.0).unwrap();
        let (x, y, _) = measure_magnetization(&s);
        assert!((x - 100f64.cos()).abs() < 1e-9 && (y - 100f64.sin()).abs() < 1e-9);
    }
}
