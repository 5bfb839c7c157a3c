use std::f64::consts::{FRAC_PI_2, PI};

use pdtc::operators::{
    composite_rotation, leading_effective_hamiltonian, replica_floquet_hamiltonian, small_n_two_cycle_hamiltonian,
    system_hamiltonian, toggling_effective_hamiltonian, RotationSpec, SlowAxis, TermOperator,
};
use pdtc::oracle::{dense_assemble, dense_collective_rotation, dense_propagator, toggling_sum, DenseOperator};
use pdtc::verify::{self, random_instance, ClosedForms};

fn kick_train(h: &DenseOperator, sites: usize, theta: f64, tau: f64, n: usize) -> DenseOperator {
    let step = dense_collective_rotation(sites, &RotationSpec::about_x(theta)).unwrap().mul(&dense_propagator(h, tau));
    let mut acc = DenseOperator::identity(sites).unwrap();
    for _ in 0..n {
        acc = step.mul(&acc);
    }
    acc
}

#[test]
fn toggling_hamiltonian_generates_the_kick_train() {
    // N·ϑ = 2π: N kicked periods approach exp(−iNτ H̄) with an O(τ²) error
    let cs = random_instance(4, 21).unwrap();
    let h = dense_assemble(&system_hamiltonian(&cs)).unwrap();
    let n = 4;
    let tog = dense_assemble(&toggling_effective_hamiltonian(&cs, n, FRAC_PI_2).unwrap()).unwrap();
    let err = |tau: f64| {
        let exact = kick_train(&h, 4, FRAC_PI_2, tau, n);
        exact.sub(&dense_propagator(&tog, n as f64 * tau)).norm()
    };
    let tau = 0.002 / cs.median();
    let (e1, e2) = (err(tau), err(0.5 * tau));
    assert!((e1 / e2 - 4.0).abs() < 0.3, "{e1:e} {e2:e}");
}

#[test]
fn leading_form_is_the_large_n_limit_without_fields() {
    let cs = random_instance(4, 22).unwrap().without_fields();
    let lead = leading_effective_hamiltonian(&cs);
    let tog = toggling_effective_hamiltonian(&cs, 400, FRAC_PI_2).unwrap();
    assert!(lead.max_coeff_distance(&tog).unwrap() < 1e-12);
    // odd N leaves a 1/N remainder of 1.5·b on the ZZ and YY coefficients
    let b_max = cs.table().iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let tog_odd = toggling_effective_hamiltonian(&cs, 401, FRAC_PI_2).unwrap();
    let d = lead.max_coeff_distance(&tog_odd).unwrap();
    assert!((d - 1.5 * b_max / 401.0).abs() < 1e-12, "{d:e}");
}

#[test]
fn replica_generator_error_shrinks_quadratically() {
    let cs = random_instance(3, 23).unwrap();
    let h = dense_assemble(&system_hamiltonian(&cs)).unwrap();
    let kick = dense_collective_rotation(3, &RotationSpec::about_x(FRAC_PI_2)).unwrap();
    let err = |tau: f64| {
        let hf = dense_assemble(&replica_floquet_hamiltonian(&cs, FRAC_PI_2, tau).unwrap()).unwrap();
        dense_propagator(&hf, FRAC_PI_2 + tau).sub(&kick.mul(&dense_propagator(&h, tau))).norm()
    };
    let scale = cs.fields().iter().fold(cs.median(), |m, c| m.max(c.abs()));
    let errs: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|f| err(f / scale)).collect();
    for w in errs.windows(2) {
        assert!((w[0] / w[1] - 4.0).abs() < 0.5, "{errs:?}");
    }
    assert!(replica_floquet_hamiltonian(&cs, 1.0, 0.1).is_err());
}

#[test]
fn small_n_form_matches_conjugated_toggling_average() {
    let cs = random_instance(4, 24).unwrap();
    let h0 = toggling_sum(&system_hamiltonian(&cs), 9, FRAC_PI_2).unwrap();
    let u = dense_collective_rotation(4, &composite_rotation(9, FRAC_PI_2, PI, SlowAxis::Z)).unwrap();
    let one = u.adjoint().mul(&h0).mul(&u);
    let two = u.adjoint().mul(&one).mul(&u);
    let avg = one.add(&two).scale(0.5);
    let closed = dense_assemble(&small_n_two_cycle_hamiltonian(&cs, 9, FRAC_PI_2, PI).unwrap()).unwrap();
    assert!(closed.sub(&avg).norm() < 1e-12);
    assert!(small_n_two_cycle_hamiltonian(&cs, 8, FRAC_PI_2, PI).is_err());
}

#[test]
fn operator_text_round_trip() {
    let cs = random_instance(5, 25).unwrap();
    let op = toggling_effective_hamiltonian(&cs, 7, 1.1).unwrap();
    let mut buf = Vec::new();
    op.write_text(&mut buf).unwrap();
    let back = TermOperator::read_text(&buf[..]).unwrap();
    assert_eq!(back, op);
}

#[test]
fn battery_detects_corrupted_cosine_factor() {
    fn shifted(n: usize, theta: f64) -> (f64, f64) {
        let (c, s) = pdtc::operators::lattice_sum_factors(n, theta);
        (c + 1e-6, s)
    }
    let forms = ClosedForms { lattice_sums: shifted };
    assert!(!verify::check_lattice_sums(&forms, 100).passed);
    assert!(!verify::check_toggling(&forms, 20).passed);
    assert!(verify::check_toggling(&ClosedForms::default(), 20).passed);
}
