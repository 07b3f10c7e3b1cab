use num_complex::Complex;
use resil_core::linalg::expm_hermitian;
use resil_core::random::{random_circuit, RandomCircuitSpec, RandomNoise};
use resil_core::{
    circuit_to_json, parse_circuit, sample_angles, AngleDistribution, Circuit, Error, Gate, HermitianOperator, Matrix,
    NoiseRealization, NoiseSite, StateVector,
};
use std::f64::consts::FRAC_1_SQRT_2;

type C64 = Complex<f64>;

fn m(rows: &[&[(f64, f64)]]) -> Matrix<f64> {
    Matrix::from_rows(&rows.iter().map(|r| r.iter().map(|&(a, b)| C64::new(a, b)).collect()).collect::<Vec<_>>())
        .unwrap()
}

fn amps(s: &StateVector<f64>) -> Vec<C64> {
    s.amplitudes().to_vec()
}

fn assert_amps(actual: &[C64], expected: &[C64], tol: f64) {
    assert_eq!(actual.len(), expected.len());
    for (a, e) in actual.iter().zip(expected) {
        assert!((a - e).norm() < tol, "{actual:?} vs {expected:?}");
    }
}

fn bell() -> Circuit<f64> {
    let mut c = Circuit::new(2);
    c.push_gates(vec![Gate::named(2, "h", &[0], None).unwrap()]).unwrap();
    c.push_gates(vec![Gate::named(2, "cx", &[0, 1], None).unwrap()]).unwrap();
    c
}

#[test]
fn empty_circuit_trajectory_is_the_input() {
    let psi = StateVector::<f64>::plus(2).unwrap();
    let traj = Circuit::new(2).simulate_trajectory(&psi).unwrap();
    assert_eq!(traj.len(), 1);
    assert_eq!(traj[0], psi);
}

#[test]
fn bell_trajectory() {
    let traj = bell().simulate_trajectory(&StateVector::zero(2).unwrap()).unwrap();
    let r = FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let a = C64::new(r, 0.0);
    assert_eq!(traj.len(), 3);
    assert_amps(&amps(&traj[0]), &[C64::new(1.0, 0.0), z, z, z], 1e-15);
    // Qubit 0 is the least significant bit: (|00⟩ + |10⟩)/√2 has amplitude on index 1.
    assert_amps(&amps(&traj[1]), &[a, a, z, z], 1e-15);
    assert_amps(&amps(&traj[2]), &[a, z, z, a], 1e-15);
}

#[test]
fn named_gates_match_canonical_matrices() {
    let r = FRAC_1_SQRT_2;
    let cases: Vec<(&str, Vec<usize>, Matrix<f64>)> = vec![
        ("x", vec![0], m(&[&[(0., 0.), (1., 0.)], &[(1., 0.), (0., 0.)]])),
        ("y", vec![0], m(&[&[(0., 0.), (0., -1.)], &[(0., 1.), (0., 0.)]])),
        ("z", vec![0], m(&[&[(1., 0.), (0., 0.)], &[(0., 0.), (-1., 0.)]])),
        ("h", vec![0], m(&[&[(r, 0.), (r, 0.)], &[(r, 0.), (-r, 0.)]])),
        ("s", vec![0], m(&[&[(1., 0.), (0., 0.)], &[(0., 0.), (0., 1.)]])),
        (
            "cx",
            vec![0, 1],
            m(&[
                &[(1., 0.), (0., 0.), (0., 0.), (0., 0.)],
                &[(0., 0.), (1., 0.), (0., 0.), (0., 0.)],
                &[(0., 0.), (0., 0.), (0., 0.), (1., 0.)],
                &[(0., 0.), (0., 0.), (1., 0.), (0., 0.)],
            ]),
        ),
        (
            "cz",
            vec![0, 1],
            m(&[
                &[(1., 0.), (0., 0.), (0., 0.), (0., 0.)],
                &[(0., 0.), (1., 0.), (0., 0.), (0., 0.)],
                &[(0., 0.), (0., 0.), (1., 0.), (0., 0.)],
                &[(0., 0.), (0., 0.), (0., 0.), (-1., 0.)],
            ]),
        ),
    ];
    for (name, qubits, expected) in cases {
        let g = Gate::<f64>::named(2, name, &qubits, None).unwrap();
        let err = g.local_matrix().max_abs_diff(&expected);
        assert!(err < 1e-12, "{name}: {err}");
    }
}

#[test]
fn cx_acts_with_first_qubit_as_control() {
    let mut c = Circuit::new(2);
    c.push_gates(vec![Gate::named(2, "cx", &[1, 0], None).unwrap()]).unwrap();
    // |q1 = 1, q0 = 0⟩ = index 2 → |11⟩ = index 3.
    let out = c.final_state(&StateVector::basis(2, 2).unwrap()).unwrap();
    assert!((out.fidelity(&StateVector::<f64>::basis(2, 3).unwrap()).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn overlapping_gates_in_a_layer_are_rejected() {
    let mut c = Circuit::<f64>::new(3);
    let err = c
        .push_gates(vec![Gate::named(3, "cx", &[0, 1], None).unwrap(), Gate::named(3, "h", &[1], None).unwrap()])
        .unwrap_err();
    assert!(matches!(err.root(), Error::OverlappingSupports { qubit: 1, .. }), "{err}");
}

#[test]
fn gate_count_counts_gate_sites() {
    let c: Circuit<f64> = random_circuit(&RandomCircuitSpec::new(4, 5, RandomNoise::None, 0.0), 3).unwrap();
    let sites: usize = c.layers().iter().map(|l| l.gates.len()).sum();
    assert_eq!(c.gate_count(), sites);
    assert_eq!(c.depth(), 5);
}

#[test]
fn zero_realization_reproduces_ideal_state_bitwise() {
    let spec = RandomCircuitSpec::new(3, 4, RandomNoise::PauliPerQubit, 0.1);
    let c: Circuit<f64> = random_circuit(&spec, 8).unwrap();
    let psi = StateVector::plus(3).unwrap();
    let noisy = c.simulate_noisy(&psi, &NoiseRealization::zeros(&c)).unwrap();
    assert_eq!(noisy, c.final_state(&psi).unwrap());
}

#[test]
fn single_z_noise_site_on_plus() {
    let mut c = Circuit::<f64>::new(1);
    let z = HermitianOperator::pauli(1, "Z", &[0], 1.0).unwrap();
    c.push_layer(vec![], vec![NoiseSite::new(z, AngleDistribution::two_point(0.1).unwrap(), None).unwrap()]).unwrap();
    let out = c.simulate_noisy(&StateVector::plus(1).unwrap(), &NoiseRealization::from_angles(vec![0.1])).unwrap();
    let e = C64::from_polar(FRAC_1_SQRT_2, -0.1);
    assert_amps(&amps(&out), &[e, e.conj()], 1e-15);
}

#[test]
fn missing_realization_entries_are_rejected() {
    let spec = RandomCircuitSpec::new(2, 2, RandomNoise::PauliPerQubit, 0.1);
    let c: Circuit<f64> = random_circuit(&spec, 1).unwrap();
    let err = c.simulate_noisy(&StateVector::zero(2).unwrap(), &NoiseRealization::from_angles(vec![0.1])).unwrap_err();
    assert!(matches!(err, Error::MissingRealization { expected: 4, found: 1 }), "{err}");
}

/// Dense product of exponentials of every gate and noise generator, built independently of
/// the simulator's propagators.
fn brute_force(c: &Circuit<f64>, psi0: &StateVector<f64>, angles: &[f64]) -> Vec<C64> {
    let n = c.n_qubits();
    let mut u = Matrix::identity(1 << n);
    let mut k = 0;
    for layer in c.layers() {
        for g in &layer.gates {
            u = expm_hermitian(&g.generator().full_matrix().unwrap(), g.angle()).matmul(&u);
        }
        for s in &layer.noise {
            u = expm_hermitian(&s.operator().full_matrix().unwrap(), angles[k]).matmul(&u);
            k += 1;
        }
    }
    u.matvec(psi0.amplitudes())
}

#[test]
fn noisy_simulation_matches_dense_matrix_chain() {
    for seed in 0..5 {
        let spec = RandomCircuitSpec::new(3, 4, RandomNoise::PauliPerQubit, 0.2);
        let c: Circuit<f64> = random_circuit(&spec, seed).unwrap();
        let psi = StateVector::plus(3).unwrap();
        let r = sample_angles(&c, seed, 0);
        let out = c.simulate_noisy(&psi, &r).unwrap();
        assert_amps(&amps(&out), &brute_force(&c, &psi, r.angles()), 1e-12);
    }
}

#[test]
fn minimal_document_parses() {
    let c: Circuit<f64> =
        parse_circuit(r#"{"version": 1, "qubits": 1, "layers": [{"gates": [{"kind": "h", "qubits": [0]}]}]}"#).unwrap();
    assert_eq!((c.depth(), c.gate_count()), (1, 1));
}

#[test]
fn document_cx_is_canonical_cnot() {
    let c: Circuit<f64> =
        parse_circuit(r#"{"version": 1, "qubits": 2, "layers": [{"gates": [{"kind": "cx", "qubits": [0, 1]}]}]}"#)
            .unwrap();
    let g = &c.layers()[0].gates[0];
    let cnot = Gate::<f64>::named(2, "cx", &[0, 1], None).unwrap().local_matrix();
    assert!(g.local_matrix().max_abs_diff(&cnot) < 1e-12);
    assert!(g.angle() != 0.0);
}

#[test]
fn malformed_document_names_the_offending_path() {
    let text = r#"{"version": 1, "qubits": 2, "layers": [{"gates": [{"kind": "h", "qubits": [0], "angel": 1.0}]}]}"#;
    let err = parse_circuit::<f64>(text).unwrap_err();
    match err {
        Error::Schema { path, .. } => assert!(path.contains("layers[0].gates[0]"), "{path}"),
        other => panic!("unexpected {other}"),
    }
    let text = r#"{"version": 1, "qubits": 2, "layers": [{}, {"gates": [{"kind": "h", "qubits": [5]}]}]}"#;
    let err = parse_circuit::<f64>(text).unwrap_err();
    assert!(err.to_string().contains("layers[1].gates[0]"), "{err}");
    assert!(matches!(err.root(), Error::QubitOutOfRange { index: 5, .. }));
    let text = r#"{"version": 1, "qubits": 2, "layers": [{"gates": [{"kind": "frob", "qubits": [0]}]}]}"#;
    assert!(matches!(parse_circuit::<f64>(text).unwrap_err().root(), Error::UnknownGate(_)));
}

#[test]
fn document_round_trip_preserves_semantics() {
    for (seed, noise) in [(1, RandomNoise::OverRotation), (2, RandomNoise::PauliPerGate), (3, RandomNoise::PauliPerQubit)] {
        let spec = RandomCircuitSpec::new(3, 3, noise, 0.05);
        let c: Circuit<f64> = random_circuit(&spec, seed).unwrap();
        let back: Circuit<f64> = parse_circuit(&circuit_to_json(&c).unwrap()).unwrap();
        assert_eq!(back.depth(), c.depth());
        assert_eq!(back.gate_count(), c.gate_count());
        assert_eq!(back.noise_site_count(), c.noise_site_count());
        for (a, b) in c.layers().iter().zip(back.layers()) {
            for (ga, gb) in a.gates.iter().zip(&b.gates) {
                assert_eq!(ga.qubits(), gb.qubits());
                assert!((ga.angle() - gb.angle()).abs() <= 1e-15);
                let (ma, mb) = (ga.generator().full_matrix().unwrap(), gb.generator().full_matrix().unwrap());
                assert!(ma.max_abs_diff(&mb) <= 1e-15);
            }
            for (sa, sb) in a.noise.iter().zip(&b.noise) {
                assert_eq!(sa.paired_gate(), sb.paired_gate());
                assert_eq!(sa.distribution(), sb.distribution());
                let (ma, mb) = (sa.operator().full_matrix().unwrap(), sb.operator().full_matrix().unwrap());
                assert!(ma.max_abs_diff(&mb) <= 1e-15);
            }
        }
        // A second round trip is textually stable.
        assert_eq!(circuit_to_json(&back).unwrap(), circuit_to_json(&c).unwrap());
    }
}

#[test]
fn unitary_gates_round_trip_through_documents() {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let u = Matrix::from_rows(&[vec![s, s], vec![s, -s]]).unwrap();
    let mut c = Circuit::<f64>::new(1);
    c.push_gates(vec![Gate::from_unitary(1, &[0], u.clone()).unwrap()]).unwrap();
    let back: Circuit<f64> = parse_circuit(&circuit_to_json(&c).unwrap()).unwrap();
    assert!(back.layers()[0].gates[0].local_matrix().max_abs_diff(&u) < 1e-15);
}
