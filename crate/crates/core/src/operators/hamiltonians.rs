use std::f64::consts::{FRAC_PI_2, PI};

use super::{Axis, Factor, TermOperator};
use crate::error::{Error, Result};
use crate::lattice::CouplingSet;

use Axis::{X, Y, Z};

/// Below this |sin ϑ| the lattice sums are evaluated term by term.
const SINGULAR_SIN: f64 = 1e-9;

/// Tolerance for recognising the special angles of the closed forms.
const ANGLE_MATCH: f64 = 1e-12;

/// The only pulse count with a worked two-cycle closed form.
pub const SMALL_N_FAST_PULSES: usize = 9;

fn pair(j: usize, a: Axis, k: usize, b: Axis) -> Vec<Factor> {
    vec![(j, a), (k, b)]
}

fn build(sites: usize, terms: Vec<(f64, Vec<Factor>)>) -> TermOperator {
    TermOperator::from_terms(sites, terms).expect("sites come from the coupling set")
}

/// `H = Σ_{j<k} b_jk (2 I_jz I_kz − I_jx I_kx − I_jy I_ky) + Σ_j c_j I_jz`.
pub fn system_hamiltonian(couplings: &CouplingSet) -> TermOperator {
    let mut terms = Vec::new();
    for (j, k, b) in couplings.pairs() {
        terms.push((2.0 * b, pair(j, Z, k, Z)));
        terms.push((-b, pair(j, X, k, X)));
        terms.push((-b, pair(j, Y, k, Y)));
    }
    for (j, &c) in couplings.fields().iter().enumerate() {
        terms.push((c, vec![(j, Z)]));
    }
    build(couplings.spins(), terms)
}

/// Leading slow-drive Hamiltonian `Σ b_jk (3/2 (I_jz I_kz + I_jy I_ky) − I_j·I_k)`.
pub fn leading_effective_hamiltonian(couplings: &CouplingSet) -> TermOperator {
    let mut terms = Vec::new();
    for (j, k, b) in couplings.pairs() {
        terms.push((0.5 * b, pair(j, Z, k, Z)));
        terms.push((0.5 * b, pair(j, Y, k, Y)));
        terms.push((-b, pair(j, X, k, X)));
    }
    build(couplings.spins(), terms)
}

/// `(G_c, G_s) = (1/N) Σ_{n=1..N} (cos 2nϑ, sin 2nϑ)`, in closed form away
/// from sin ϑ = 0.
pub fn lattice_sum_factors(fast_pulses: usize, theta: f64) -> (f64, f64) {
    let n = fast_pulses.max(1) as f64;
    let s = theta.sin();
    if s.abs() < SINGULAR_SIN {
        let (mut gc, mut gs) = (0.0, 0.0);
        for k in 1..=fast_pulses {
            let (sn, cs) = (2.0 * k as f64 * theta).sin_cos();
            gc += cs;
            gs += sn;
        }
        return (gc / n, gs / n);
    }
    let ratio = (n * theta).sin() / s / n;
    let (sn, cs) = ((n + 1.0) * theta).sin_cos();
    (ratio * cs, ratio * sn)
}

/// Toggling-frame average of `H` over `N` fast x̂ pulses of angle ϑ.
pub fn toggling_effective_hamiltonian(couplings: &CouplingSet, fast_pulses: usize, theta: f64) -> Result<TermOperator> {
    toggling_effective_hamiltonian_with(couplings, fast_pulses, theta, lattice_sum_factors)
}

/// As [`toggling_effective_hamiltonian`], with the lattice sums supplied by
/// the caller (used to exercise the verification battery against faulty
/// closed forms).
pub fn toggling_effective_hamiltonian_with<F>(
    couplings: &CouplingSet,
    fast_pulses: usize,
    theta: f64,
    factors: F,
) -> Result<TermOperator>
where
    F: Fn(usize, f64) -> (f64, f64),
{
    if fast_pulses == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if !theta.is_finite() {
        return Err(Error::InvalidParameter(format!("bad flip angle {theta}")));
    }
    let (gc, gs) = factors(fast_pulses, theta);
    let (hc, hs) = factors(fast_pulses, 0.5 * theta);
    let mut terms = Vec::new();
    for (j, k, b) in couplings.pairs() {
        // 3/2 [H_ff + G_c H_dq − G_s H̃_ff] − I_j·I_k
        terms.push((b * (1.5 * (1.0 + gc) - 1.0), pair(j, Z, k, Z)));
        terms.push((b * (1.5 * (1.0 - gc) - 1.0), pair(j, Y, k, Y)));
        terms.push((-b, pair(j, X, k, X)));
        terms.push((-1.5 * b * gs, pair(j, Z, k, Y)));
        terms.push((-1.5 * b * gs, pair(j, Y, k, Z)));
    }
    for (j, &c) in couplings.fields().iter().enumerate() {
        terms.push((c * hc, vec![(j, Z)]));
        terms.push((-c * hs, vec![(j, Y)]));
    }
    Ok(build(couplings.spins(), terms))
}

/// First-order generator of one fast period `Uₓ U_H` at ϑ = π/2, resummed in
/// the kick angle:
/// `(π/2 + τ) H_F = π/2 𝓘ₓ + τ H̄ − τ (3π/4 Σ b_jk H̃_ff + π/4 Σ c_j (I_jy − I_jz))`.
pub fn replica_floquet_hamiltonian(couplings: &CouplingSet, theta: f64, tau: f64) -> Result<TermOperator> {
    if (theta - FRAC_PI_2).abs() > ANGLE_MATCH {
        return Err(Error::ReplicaAngle);
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    let l = couplings.spins();
    let mut terms: Vec<(f64, Vec<Factor>)> = (0..l).map(|j| (FRAC_PI_2, vec![(j, X)])).collect();
    for t in leading_effective_hamiltonian(couplings).terms() {
        terms.push((tau * t.coeff, t.factors.clone()));
    }
    for (j, k, b) in couplings.pairs() {
        terms.push((-tau * 0.75 * PI * b, pair(j, Z, k, Y)));
        terms.push((-tau * 0.75 * PI * b, pair(j, Y, k, Z)));
    }
    for (j, &c) in couplings.fields().iter().enumerate() {
        terms.push((-tau * 0.25 * PI * c, vec![(j, Y)]));
        terms.push((tau * 0.25 * PI * c, vec![(j, Z)]));
    }
    Ok(build(l, terms).scaled(1.0 / (FRAC_PI_2 + tau)))
}

/// Two-cycle Hamiltonian at N = 9, ϑ = π/2, γ = π:
/// `H̄ + 1/(2N) Σ c_j (I_jz − I_jy)`.
pub fn small_n_two_cycle_hamiltonian(
    couplings: &CouplingSet,
    fast_pulses: usize,
    theta: f64,
    gamma: f64,
) -> Result<TermOperator> {
    if fast_pulses != SMALL_N_FAST_PULSES
        || (theta - FRAC_PI_2).abs() > ANGLE_MATCH
        || (gamma - PI).abs() > ANGLE_MATCH
    {
        return Err(Error::ClosedFormUnavailable { n: fast_pulses, theta, gamma });
    }
    let scale = 1.0 / (2.0 * fast_pulses as f64);
    let mut terms: Vec<(f64, Vec<Factor>)> =
        leading_effective_hamiltonian(couplings).terms().iter().map(|t| (t.coeff, t.factors.clone())).collect();
    for (j, &c) in couplings.fields().iter().enumerate() {
        terms.push((scale * c, vec![(j, Z)]));
        terms.push((-scale * c, vec![(j, Y)]));
    }
    Ok(build(couplings.spins(), terms))
}

/// Residual x̂-rotation angle accumulated after `cycles` Floquet cycles of
/// `N` π/2 pulses and a slow kick `γ = l·π`:
/// `π((−1)^M − 1)(N mod 8)/4` for odd `l`, and 0 for even `l`.
pub fn boundary_phase(cycles: i64, l: i64, fast_pulses: i64) -> f64 {
    if l.rem_euclid(2) == 0 || cycles.rem_euclid(2) == 0 {
        return 0.0;
    }
    -PI * fast_pulses.rem_euclid(8) as f64 / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_spin(b: f64, c: [f64; 2]) -> CouplingSet {
        CouplingSet::from_table(2, vec![0.0, b, b, 0.0], c.to_vec()).unwrap()
    }

    #[test]
    fn two_spin_system_terms() {
        let h = system_hamiltonian(&two_spin(0.3, [0.0, 0.0]));
        assert_eq!(h.terms().len(), 3);
        assert_eq!(h.coeff_of(&[(0, Z), (1, Z)]), 0.6);
        assert_eq!(h.coeff_of(&[(0, X), (1, X)]), -0.3);
        assert_eq!(h.coeff_of(&[(0, Y), (1, Y)]), -0.3);
    }

    #[test]
    fn uncoupled_system_is_zeeman() {
        let h = system_hamiltonian(&two_spin(0.0, [0.4, -1.2]));
        let expected = TermOperator::from_terms(2, vec![(0.4, vec![(0, Z)]), (-1.2, vec![(1, Z)])]).unwrap();
        assert_eq!(h, expected);
    }

    #[test]
    fn single_pulse_factors() {
        let (c, s) = lattice_sum_factors(1, 0.3);
        assert!((c - 0.6f64.cos()).abs() < 1e-15 && (s - 0.6f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn eight_quarter_turns_cancel() {
        let (c, s) = lattice_sum_factors(8, FRAC_PI_2);
        assert!(c.abs() < 1e-15 && s.abs() < 1e-15);
    }

    #[test]
    fn singular_branch_at_pi() {
        let (c, s) = lattice_sum_factors(6, PI);
        assert!((c - 1.0).abs() < 1e-14 && s.abs() < 1e-14);
    }

    #[test]
    fn large_n_approaches_leading_form() {
        let cs = two_spin(0.3, [0.8, -0.5]);
        let tog = toggling_effective_hamiltonian(&cs, 10_000, FRAC_PI_2).unwrap();
        let lead = leading_effective_hamiltonian(&cs);
        let mut dipolar_gap: f64 = 0.0;
        let mut field_max: f64 = 0.0;
        for t in tog.terms() {
            if t.factors.len() == 1 {
                field_max = field_max.max(t.coeff.abs());
            } else {
                dipolar_gap = dipolar_gap.max((t.coeff - lead.coeff_of(&t.factors)).abs());
            }
        }
        assert!(dipolar_gap < 1e-3);
        assert!(field_max < 1e-3 * 0.8);
    }

    #[test]
    fn full_turns_restore_system_hamiltonian() {
        let cs = two_spin(0.3, [0.8, -0.5]);
        let tog = toggling_effective_hamiltonian(&cs, 5, 2.0 * PI).unwrap();
        assert!(tog.max_coeff_distance(&system_hamiltonian(&cs)).unwrap() < 1e-14);
    }

    #[test]
    fn free_kicked_spin_replica() {
        let cs = two_spin(0.0, [0.0, 0.0]);
        let tau = 0.1;
        let hf = replica_floquet_hamiltonian(&cs, FRAC_PI_2, tau).unwrap();
        let expected = TermOperator::collective(2, X).scaled(FRAC_PI_2 / (FRAC_PI_2 + tau));
        assert!(hf.max_coeff_distance(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn replica_rejects_other_angles() {
        let cs = two_spin(0.1, [0.0, 0.0]);
        let err = replica_floquet_hamiltonian(&cs, 1.0, 0.1).unwrap_err();
        assert_eq!(err.to_string(), "replica form available only at theta=pi/2");
    }

    #[test]
    fn small_n_closed_form_scope() {
        let cs = two_spin(0.2, [0.0, 0.0]);
        let h = small_n_two_cycle_hamiltonian(&cs, 9, FRAC_PI_2, PI).unwrap();
        assert_eq!(h, leading_effective_hamiltonian(&cs));
        assert!(matches!(
            small_n_two_cycle_hamiltonian(&cs, 8, FRAC_PI_2, PI),
            Err(Error::ClosedFormUnavailable { .. })
        ));
        assert!(small_n_two_cycle_hamiltonian(&cs, 9, FRAC_PI_2, 0.9 * PI).is_err());
    }

    #[test]
    fn boundary_phase_values() {
        assert_eq!(boundary_phase(1, 1, 301), -2.5 * PI);
        for n in 0..20 {
            assert_eq!(boundary_phase(4, 1, n), 0.0);
            assert_eq!(boundary_phase(3, 2, n), 0.0);
            assert_eq!(boundary_phase(5, -4, n), 0.0);
        }
        assert_eq!(boundary_phase(3, 3, 10), -PI);
    }
}
