use std::f64::consts::{FRAC_PI_2, PI};

use pdtc::engine::{
    apply_collective_rotation, measure_magnetization, prepare_state, run_protocol, run_protocol_from, Direction,
    DriveProtocol, HamiltonianChoice, InitialState, KrylovOptions, MeasureSchedule, StateVector, TimeSeries,
};
use pdtc::lattice::CouplingSet;
use pdtc::operators::{
    boundary_phase, composite_rotation, leading_effective_hamiltonian, system_hamiltonian, RotationSpec, SlowAxis,
};
use pdtc::oracle::{dense_assemble, dense_collective_rotation, DenseSpectrum};
use pdtc::verify::random_instance;

const TIGHT: KrylovOptions = KrylovOptions { tol: 1e-12, max_dim: 64 };

fn protocol(theta: f64, gamma: f64, tau: f64, fast_pulses: usize, cycles: usize) -> DriveProtocol {
    DriveProtocol {
        theta,
        gamma,
        tau,
        fast_pulses,
        cycles,
        slow_axis: SlowAxis::Z,
        noise_fraction: 0.0,
        noise_seed: 0,
        measure: MeasureSchedule::FastKick,
    }
}

/// Replays a noiseless protocol with dense matrices and returns the
/// magnetization after every fast period.
fn dense_replay(cs: &CouplingSet, p: &DriveProtocol, choice: HamiltonianChoice) -> Vec<(f64, f64, f64)> {
    let l = cs.spins();
    let op = match choice {
        HamiltonianChoice::Full => system_hamiltonian(cs),
        HamiltonianChoice::Idealized => leading_effective_hamiltonian(cs),
    };
    let u = DenseSpectrum::new(&dense_assemble(&op).unwrap()).propagator(p.tau);
    let fast = dense_collective_rotation(l, &RotationSpec::about_x(p.theta)).unwrap();
    let slow = dense_collective_rotation(l, &p.slow_axis.rotation(p.gamma)).unwrap();
    let mut s = StateVector::polarized(l, Direction::PlusX);
    let mut out = vec![measure_magnetization(&s)];
    for _ in 0..p.cycles {
        for _ in 0..p.fast_pulses {
            if choice == HamiltonianChoice::Full {
                s = fast.apply(&s).unwrap();
            }
            s = u.apply(&s).unwrap();
            out.push(measure_magnetization(&s));
        }
        s = slow.apply(&s).unwrap();
    }
    out
}

fn assert_matches_dense(series: &TimeSeries, dense: &[(f64, f64, f64)], tol: f64) {
    assert_eq!(series.records.len(), dense.len());
    for (r, d) in series.records.iter().zip(dense) {
        let err = (r.x - d.0).abs().max((r.y - d.1).abs()).max((r.z - d.2).abs());
        assert!(err < tol, "kick {}: {err:e}", r.kick_index);
    }
}

#[test]
fn full_protocol_matches_dense_replay() {
    let cs = random_instance(6, 11).unwrap();
    let p = protocol(FRAC_PI_2 + 0.03, 0.93 * PI, 0.07 / cs.median(), 7, 6);
    let series = run_protocol_from(StateVector::polarized(6, Direction::PlusX), &cs, &p, HamiltonianChoice::Full, TIGHT)
        .unwrap();
    assert_matches_dense(&series, &dense_replay(&cs, &p, HamiltonianChoice::Full), 1e-10);
}

#[test]
fn idealized_protocol_matches_dense_replay() {
    let cs = random_instance(5, 12).unwrap();
    let mut p = protocol(FRAC_PI_2, 1.1, 0.1 / cs.median(), 5, 5);
    p.slow_axis = SlowAxis::Y;
    let series =
        run_protocol_from(StateVector::polarized(5, Direction::PlusX), &cs, &p, HamiltonianChoice::Idealized, TIGHT)
            .unwrap();
    assert_matches_dense(&series, &dense_replay(&cs, &p, HamiltonianChoice::Idealized), 1e-10);
}

#[test]
fn composite_rotation_equals_kick_sequence() {
    // operator product U_x^N U_slow: the slow kick acts on the state first
    let mut s = StateVector::polarized(4, Direction::PlusY);
    let amps = s.amplitudes_mut();
    for (i, a) in amps.iter_mut().enumerate() {
        *a *= num_complex::Complex64::from_polar(1.0, 0.37 * i as f64);
    }
    for (n, theta, gamma, axis) in [(9, FRAC_PI_2, PI, SlowAxis::Z), (13, 1.234, -2.1, SlowAxis::Y), (300, 0.5, 0.4, SlowAxis::Z)] {
        let mut seq = s.clone();
        apply_collective_rotation(&mut seq, &axis.rotation(gamma));
        for _ in 0..n {
            apply_collective_rotation(&mut seq, &RotationSpec::about_x(theta));
        }
        let mut once = s.clone();
        apply_collective_rotation(&mut once, &composite_rotation(n, theta, gamma, axis));
        assert!((1.0 - once.fidelity(&seq)).abs() < 1e-12, "N={n}");
    }
}

#[test]
fn idealized_drive_without_slow_kick_conserves_x() {
    let cs = random_instance(8, 13).unwrap();
    let p = protocol(FRAC_PI_2, 0.0, 0.07 / cs.median(), 20, 10);
    let series = run_protocol_from(StateVector::polarized(8, Direction::PlusX), &cs, &p, HamiltonianChoice::Idealized, TIGHT)
        .unwrap();
    for r in &series.records {
        assert!((r.x - 1.0).abs() < 1e-10, "kick {}: {}", r.kick_index, r.x);
    }
}

#[test]
fn pdtc_alternates_with_constant_magnitude() {
    // N·ϑ = 2π, γ = π, idealized drive from the +x product state
    let cs = random_instance(6, 14).unwrap();
    let mut p = protocol(FRAC_PI_2, PI, 0.07 / cs.median(), 4, 30);
    p.measure = MeasureSchedule::FloquetCycle;
    let series = run_protocol_from(StateVector::polarized(6, Direction::PlusX), &cs, &p, HamiltonianChoice::Idealized, TIGHT)
        .unwrap();
    let samples = series.cycle_samples();
    for (m, r) in samples.iter().enumerate().skip(1) {
        let expected = if m % 2 == 1 { 1.0 } else { -1.0 };
        assert!((r.x - expected).abs() < 1e-10, "cycle {m}: {}", r.x);
    }
}

#[test]
fn boundary_phase_predicts_single_spin_dynamics() {
    // without interactions every spin follows [U_x^N U_z(lπ)]^M exactly
    let l_sites = 3;
    for l in [1i64, -1, 3] {
        for n in [1usize, 2, 5, 8, 11] {
            for m in 1..=5i64 {
                let mut s = StateVector::polarized(l_sites, Direction::PlusY);
                for _ in 0..m {
                    apply_collective_rotation(&mut s, &RotationSpec::about_z(l as f64 * PI));
                    for _ in 0..n {
                        apply_collective_rotation(&mut s, &RotationSpec::about_x(FRAC_PI_2));
                    }
                }
                let d = boundary_phase(m, l, n as i64);
                let sign = if (l * m) % 2 == 0 { 1.0 } else { -1.0 };
                let (x, y, z) = measure_magnetization(&s);
                assert!(x.abs() < 1e-12);
                assert!((y - sign * d.cos()).abs() < 1e-12, "l={l} N={n} M={m}: y={y}");
                assert!((z - d.sin()).abs() < 1e-12, "l={l} N={n} M={m}: z={z}");
            }
        }
    }
}

#[test]
fn runs_are_deterministic_and_seeded() {
    let cs = random_instance(6, 15).unwrap();
    let mut p = protocol(FRAC_PI_2, PI, 0.07 / cs.median(), 8, 4);
    p.noise_fraction = 0.05;
    p.noise_seed = 99;
    let a = run_protocol(&cs, &p, HamiltonianChoice::Full).unwrap();
    let b = run_protocol(&cs, &p, HamiltonianChoice::Full).unwrap();
    assert_eq!(a, b);
    p.noise_seed = 100;
    let c = run_protocol(&cs, &p, HamiltonianChoice::Full).unwrap();
    assert_ne!(a.records, c.records);
}

#[test]
fn csv_round_trip_is_exact() {
    let cs = random_instance(5, 16).unwrap();
    let mut p = protocol(FRAC_PI_2, 0.97 * PI, 0.07 / cs.median(), 6, 5);
    p.noise_fraction = 0.05;
    p.noise_seed = 3;
    let series = run_protocol(&cs, &p, HamiltonianChoice::Full).unwrap();
    let (mut records, mut means) = (Vec::new(), Vec::new());
    series.write_csv(&mut records).unwrap();
    series.write_cycle_means_csv(&mut means).unwrap();
    let back = TimeSeries::read_csv(&records[..], Some(&means[..])).unwrap();
    assert_eq!(back, series);
}

#[test]
fn evolved_initial_state_matches_dense() {
    let cs = random_instance(6, 17).unwrap();
    let t_d = 3.0 / cs.median();
    let krylov = prepare_state(&cs, InitialState::Evolved { t_d }, TIGHT).unwrap();
    let u = DenseSpectrum::new(&dense_assemble(&system_hamiltonian(&cs)).unwrap()).propagator(t_d);
    let dense = u.apply(&StateVector::polarized(6, Direction::PlusX)).unwrap();
    assert!(krylov.distance(&dense) < 1e-9);
}
