use num_complex::Complex;
use resil_core::models::{code_logical_basis, code_stabilizers, pspin_moment_exact};
use resil_core::{
    biased_pauli_sites, build_code_circuit, build_pspin, check_tradeoff_analog, evolve_schedule, fragility_avg,
    path_length_continuous, path_length_digital, pspin_bangbang, pspin_bangbang_schedule, pspin_path_length_closed,
    AnalogNoise, BiasedNoiseSpec, CodeCircuitSpec, CodeKind, HermitianOperator, NoiseOperator, PathMode, StateVector,
};

fn code_fragility(kind: CodeKind, eta: f64, alpha: Complex<f64>, beta: Complex<f64>) -> f64 {
    let (c, psi) = build_code_circuit(&CodeCircuitSpec { kind, alpha, beta }).unwrap();
    let spec = BiasedNoiseSpec::new(1e-4, eta).unwrap();
    let noisy = biased_pauli_sites(&spec, &c).unwrap();
    fragility_avg(&noisy, &psi).unwrap().value / spec.sigma_sq()
}

fn r(x: f64) -> Complex<f64> {
    Complex::new(x, 0.0)
}

#[test]
fn pspin_initial_state_is_ground_state_of_h0() {
    let m = build_pspin::<f64>(3, 3).unwrap();
    let e = m.h0.full_matrix().unwrap().eigh();
    let ground = StateVector::from_amplitudes(e.vector(0)).unwrap();
    assert!((ground.fidelity(&m.initial_state().unwrap()).unwrap() - 1.0).abs() < 1e-12);
    // Odd parity: ⟨+|M_z^p|+⟩ = 0.
    assert!(m.initial_state().unwrap().expectation(&m.h1).unwrap().abs() < 1e-14);
}

#[test]
fn pspin_first_variance_matches_binomial_sum() {
    let m = build_pspin::<f64>(3, 3).unwrap();
    let v = m.initial_state().unwrap().variance(&m.h1).unwrap();
    assert!((v - 183.0 / 324.0).abs() < 1e-12, "{v}");
}

#[test]
fn pspin_rejects_even_parameters() {
    assert!(build_pspin::<f64>(4, 3).is_err());
    assert!(build_pspin::<f64>(3, 2).is_err());
}

#[test]
fn bangbang_transfers_perfectly() {
    for n in [3, 5] {
        let m = build_pspin::<f64>(n, 3).unwrap();
        let c = pspin_bangbang(&m).unwrap();
        let out = c.final_state(&m.initial_state().unwrap()).unwrap();
        let f = out.fidelity(&m.target_state().unwrap()).unwrap();
        assert!((f - 1.0).abs() < 1e-10, "n = {n}: {f}");
    }
}

#[test]
fn closed_form_path_length_matches_circuit() {
    for n in [3, 5, 7] {
        let m = build_pspin::<f64>(n, 3).unwrap();
        let c = pspin_bangbang(&m).unwrap();
        let digital = path_length_digital(&c, &m.initial_state().unwrap(), PathMode::OverRotation).unwrap();
        let closed = pspin_path_length_closed(n, 3).unwrap();
        assert!((digital - closed).abs() < 1e-9, "n = {n}: {digital} vs {closed}");
    }
    let pi4 = std::f64::consts::FRAC_PI_4;
    assert!((pspin_path_length_closed(1, 1).unwrap() - 2.0 * pi4).abs() < 1e-15);
}

#[test]
fn closed_form_moment_is_exact() {
    let s = pspin_moment_exact(3, 3).unwrap();
    assert_eq!(s.to_string(), "1464/5832".parse::<num_rational::BigRational>().unwrap().to_string());
}

#[test]
fn code_input_lies_in_codespace() {
    for kind in [CodeKind::Planar, CodeKind::Xzzx] {
        let (zero, one) = code_logical_basis::<f64>(kind).unwrap();
        for s in code_stabilizers(kind).unwrap() {
            for v in [&zero, &one] {
                let e = s.expectation(v);
                assert!((e.re - 1.0).abs() < 1e-12, "{kind:?}");
            }
        }
    }
}

#[test]
fn ideal_parity_checks_leave_ancillas_trivial() {
    for kind in [CodeKind::Planar, CodeKind::Xzzx] {
        let (c, psi) = build_code_circuit(&CodeCircuitSpec { kind, alpha: r(0.6), beta: Complex::new(0.0, 0.8) }).unwrap();
        let out = c.final_state(&psi).unwrap();
        for a in 4..7 {
            let z = HermitianOperator::pauli(7, "Z", &[a], 1.0).unwrap();
            assert!((out.expectation(&z).unwrap() - 1.0).abs() < 1e-12, "{kind:?} ancilla {a}");
        }
        assert!((out.fidelity(&psi).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn code_fragility_is_independent_of_logical_amplitudes() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for kind in [CodeKind::Planar, CodeKind::Xzzx] {
        for eta in [0.0, 0.3, 1.0] {
            let base = code_fragility(kind, eta, r(1.0), r(0.0));
            for (a, b) in [(r(0.0), r(1.0)), (r(s), r(s)), (r(0.6), Complex::new(0.0, 0.8))] {
                let f = code_fragility(kind, eta, a, b);
                assert!((f - base).abs() < 1e-9, "{kind:?} η={eta}: {f} vs {base}");
            }
        }
    }
}

#[test]
fn planar_and_xzzx_mirror_each_other() {
    for eta in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let p = code_fragility(CodeKind::Planar, eta, r(1.0), r(0.0));
        let x = code_fragility(CodeKind::Xzzx, 1.0 - eta, r(1.0), r(0.0));
        assert!((p - x).abs() < 1e-9, "η={eta}: {p} vs {x}");
    }
    let p0 = code_fragility(CodeKind::Planar, 0.0, r(1.0), r(0.0));
    let x0 = code_fragility(CodeKind::Xzzx, 0.0, r(1.0), r(0.0));
    let p1 = code_fragility(CodeKind::Planar, 1.0, r(1.0), r(0.0));
    let x1 = code_fragility(CodeKind::Xzzx, 1.0, r(1.0), r(0.0));
    assert!(p0 < x0 && p1 > x1, "({p0}, {x0}) / ({p1}, {x1})");
}

#[test]
fn non_normalized_logical_amplitudes_are_rejected() {
    assert!(build_code_circuit(&CodeCircuitSpec { kind: CodeKind::Planar, alpha: r(1.0), beta: r(1.0) }).is_err());
}

#[test]
fn bangbang_schedule_agrees_with_the_circuit() {
    for n in [3, 5] {
        let m = build_pspin::<f64>(n, 3).unwrap();
        let s = pspin_bangbang_schedule(&m).unwrap();
        let psi0 = m.initial_state().unwrap();
        let traj = evolve_schedule(&s, &psi0).unwrap();
        let out = StateVector::from_amplitudes(traj.final_state().to_vec()).unwrap();
        assert!((out.fidelity(&m.target_state().unwrap()).unwrap() - 1.0).abs() < 1e-8, "n = {n}");
        let l = path_length_continuous(&s, &NoiseOperator::Hamiltonian, &psi0).unwrap();
        let closed = pspin_path_length_closed(n, 3).unwrap();
        assert!((l - closed).abs() < 1e-6 * closed, "n = {n}: {l} vs {closed}");
        let v = check_tradeoff_analog(&s, &AnalogNoise::hamiltonian(1.0).unwrap(), &psi0).unwrap();
        assert!(v.holds && v.ratio() <= 2.0, "n = {n}: {v:?}");
    }
}
