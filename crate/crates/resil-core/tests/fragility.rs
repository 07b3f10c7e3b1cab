use num_complex::Complex;
use resil_core::linalg::expm_hermitian;
use resil_core::random::{random_brickwork, random_circuit, random_state, RandomCircuitSpec, RandomNoise, RandomSource};
use resil_core::report::loglog_slope;
use resil_core::{
    biased_pauli_sites, fragility_avg, fragility_exact, fragility_mc_average, fragility_perturbative,
    overlap_incoherent, sample_angles, site_covariance_matrix, AngleDistribution, BiasedNoiseSpec, Circuit,
    CodeCircuitSpec, CodeKind, Gate, HermitianOperator, Matrix, NoiseRealization, NoiseSite, StateVector, Statistic,
};

type C64 = Complex<f64>;

fn single_z(sigma: f64) -> Circuit<f64> {
    let mut c = Circuit::new(1);
    let z = HermitianOperator::pauli(1, "Z", &[0], 1.0).unwrap();
    c.push_layer(vec![], vec![NoiseSite::new(z, AngleDistribution::two_point(sigma).unwrap(), None).unwrap()])
        .unwrap();
    c
}

fn plus1() -> StateVector<f64> {
    StateVector::plus(1).unwrap()
}

fn random_instance(n: usize, depth: usize, noise: RandomNoise, sigma: f64, seed: u64) -> (Circuit<f64>, StateVector<f64>) {
    let c = random_circuit(&RandomCircuitSpec::new(n, depth, noise, sigma), seed).unwrap();
    let psi = random_state(n, &mut RandomSource::new(seed, 9)).unwrap();
    (c, psi)
}

#[test]
fn zero_realization_has_zero_fragility() {
    let (c, psi) = random_instance(3, 3, RandomNoise::PauliPerQubit, 0.1, 1);
    let zero = NoiseRealization::zeros(&c);
    assert_eq!(fragility_exact(&c, &psi, &zero).unwrap().value, 0.0);
    assert_eq!(fragility_perturbative(&c, &psi, &zero).unwrap().value, 0.0);
}

#[test]
fn single_qubit_dephasing_closed_forms() {
    let c = single_z(0.1);
    let r = NoiseRealization::from_angles(vec![0.1]);
    let exact = fragility_exact(&c, &plus1(), &r).unwrap().value;
    assert!((exact - 2.0 * (1.0 - 0.1f64.cos())).abs() < 1e-15);
    let pert = fragility_perturbative(&c, &plus1(), &r).unwrap().value;
    assert!((pert - 0.01).abs() < 1e-15);
    assert!((pert - exact).abs() < 0.1f64.powi(4));
}

#[test]
fn eigenstate_site_has_no_perturbative_fragility() {
    let c = single_z(0.1);
    let zero = StateVector::<f64>::zero(1).unwrap();
    let r = NoiseRealization::from_angles(vec![0.3]);
    assert_eq!(fragility_perturbative(&c, &zero, &r).unwrap().value, 0.0);
    assert_eq!(fragility_avg(&c, &zero).unwrap().value, 0.0);
}

#[test]
fn exact_fragility_matches_dense_chain() {
    for seed in 0..4 {
        let (c, psi) = random_instance(4, 4, RandomNoise::PauliPerQubit, 0.2, seed);
        let r = sample_angles(&c, seed, 3);
        let n = 4;
        let (mut u_ideal, mut u_noisy) = (Matrix::identity(1 << n), Matrix::identity(1 << n));
        let mut k = 0;
        for layer in c.layers() {
            for g in &layer.gates {
                let v = expm_hermitian(&g.generator().full_matrix().unwrap(), g.angle());
                u_ideal = v.matmul(&u_ideal);
                u_noisy = v.matmul(&u_noisy);
            }
            for s in &layer.noise {
                u_noisy = expm_hermitian(&s.operator().full_matrix().unwrap(), r.angles()[k]).matmul(&u_noisy);
                k += 1;
            }
        }
        let (a, b) = (u_ideal.matvec(psi.amplitudes()), u_noisy.matvec(psi.amplitudes()));
        let ov: C64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
        let expected = 2.0 * (1.0 - ov.norm());
        let got = fragility_exact(&c, &psi, &r).unwrap().value;
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }
}

#[test]
fn perturbative_form_equals_covariance_quadratic_form() {
    let (c, psi) = random_instance(3, 4, RandomNoise::PauliPerGate, 0.05, 4);
    let r = sample_angles(&c, 1, 1);
    let cov = site_covariance_matrix(&c, &psi).unwrap();
    let a = r.angles();
    let mut q = 0.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            q += cov[i][j] * a[i] * a[j];
        }
    }
    let v = fragility_perturbative(&c, &psi, &r).unwrap().value;
    assert!((v - q).abs() < 1e-12 * q.max(1e-3), "{v} vs {q}");
}

#[test]
fn perturbative_form_is_positive_semidefinite() {
    for seed in 0..30 {
        let (c, psi) = random_instance(3, 3, RandomNoise::PauliPerQubit, 0.3, seed);
        let r = sample_angles(&c, seed, 0);
        assert!(fragility_perturbative(&c, &psi, &r).unwrap().value >= -1e-10);
    }
}

#[test]
fn averaging_over_sign_patterns_gives_the_averaged_value() {
    let (c, psi) = random_instance(3, 2, RandomNoise::PauliPerQubit, 0.02, 6);
    let s = c.noise_site_count();
    assert_eq!(s, 6);
    let sigmas: Vec<f64> = c.sites().map(|(_, site)| site.sigma()).collect();
    let mut total = 0.0;
    for mask in 0u32..1 << s {
        let angles = (0..s).map(|k| if mask >> k & 1 == 1 { sigmas[k] } else { -sigmas[k] }).collect();
        total += fragility_perturbative(&c, &psi, &NoiseRealization::from_angles(angles)).unwrap().value;
    }
    let mean = total / (1u32 << s) as f64;
    let avg = fragility_avg(&c, &psi).unwrap().value;
    assert!((mean - avg).abs() < 1e-12, "{mean} vs {avg}");
}

#[test]
fn averaged_examples() {
    let c = single_z(0.01);
    let r = fragility_avg(&c, &plus1()).unwrap();
    assert!((r.value - 1e-4).abs() < 1e-18);
    assert_eq!(r.contributions.len(), 1);
    assert!((r.contributions[0].variance - 1.0).abs() < 1e-15);
    let ov = overlap_incoherent(&c, &plus1()).unwrap().value;
    assert!((ov - (1.0 - 1e-4)).abs() < 1e-15);
    assert_eq!(overlap_incoherent(&Circuit::<f64>::new(1), &plus1()).unwrap().value, 1.0);
}

#[test]
fn brickwork_scaling_estimate() {
    let spec = RandomCircuitSpec::new(6, 10, RandomNoise::PauliPerQubit, 0.01);
    let mut ratios = Vec::new();
    for seed in 0..3 {
        let c: Circuit<f64> = random_brickwork(&spec, seed).unwrap();
        let f = fragility_avg(&c, &StateVector::zero(6).unwrap()).unwrap().value;
        ratios.push(f / (10.0 * 6.0 * 1e-4));
    }
    // Each site contributes σ²(1 - ⟨P⟩²) ≤ σ², and scrambled states have ⟨P⟩ ≈ 0.
    for r in &ratios {
        assert!(*r <= 1.0 && *r >= 0.9, "{ratios:?}");
    }
}

#[test]
fn monte_carlo_edge_cases() {
    let zero_sigma = single_z(0.0);
    let r = fragility_mc_average(&zero_sigma, &plus1(), 100, 1, Statistic::Bures).unwrap();
    assert_eq!((r.value, r.stderr), (0.0, Some(0.0)));

    let c = single_z(0.01);
    let r = fragility_mc_average(&c, &plus1(), 1000, 1, Statistic::Bures).unwrap();
    assert!((r.value - 2.0 * (1.0 - 0.01f64.cos())).abs() < 1e-15);
    assert!(r.stderr.unwrap() < 1e-15);
    assert!(fragility_mc_average(&c, &plus1(), 1, 1, Statistic::Bures).is_err());
}

#[test]
fn monte_carlo_is_reproducible_across_thread_counts() {
    let (c, psi) = random_instance(3, 3, RandomNoise::PauliPerQubit, 0.05, 2);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| fragility_mc_average(&c, &psi, 500, 42, Statistic::Overlap).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.stderr.unwrap().to_bits(), b.stderr.unwrap().to_bits());
}

#[test]
fn two_qubit_overlap_matches_trajectory_average() {
    let mut c = Circuit::<f64>::new(2);
    c.push_gates(vec![Gate::named(2, "h", &[0], None).unwrap()]).unwrap();
    c.push_gates(vec![Gate::named(2, "cx", &[0, 1], None).unwrap()]).unwrap();
    let spec = BiasedNoiseSpec::new(2e-4, 0.3).unwrap();
    let noisy = biased_pauli_sites(&spec, &c).unwrap();
    let psi = StateVector::zero(2).unwrap();
    let mc = fragility_mc_average(&noisy, &psi, 100_000, 3, Statistic::Overlap).unwrap();
    let ov = overlap_incoherent(&noisy, &psi).unwrap().value;
    assert!((mc.value - ov).abs() <= 3.0 * mc.stderr.unwrap(), "{} ± {} vs {ov}", mc.value, mc.stderr.unwrap());
}

#[test]
fn planar_code_monte_carlo_matches_average() {
    let spec = CodeCircuitSpec { kind: CodeKind::Planar, alpha: C64::new(1.0, 0.0), beta: C64::new(0.0, 0.0) };
    let (c, psi) = resil_core::build_code_circuit::<f64>(&spec).unwrap();
    let noisy = biased_pauli_sites(&BiasedNoiseSpec::new(1e-4, 0.5).unwrap(), &c).unwrap();
    let mc = fragility_mc_average(&noisy, &psi, 20_000, 5, Statistic::Bures).unwrap();
    let avg = fragility_avg(&noisy, &psi).unwrap().value;
    assert!((mc.value - avg).abs() <= 3.0 * mc.stderr.unwrap(), "{} ± {} vs {avg}", mc.value, mc.stderr.unwrap());
}

#[test]
fn remainder_is_cubic_in_the_total_angle() {
    let totals = [0.04, 0.02, 0.01, 0.005];
    for seed in 0..5 {
        let (c, psi) = random_instance(4, 6, RandomNoise::PauliPerQubit, 0.1, 100 + seed);
        let dir = sample_angles(&c, seed, 0);
        let gaps: Vec<f64> = totals
            .iter()
            .map(|&s| {
                let r = dir.scaled(s / dir.total_angle());
                let e = fragility_exact(&c, &psi, &r).unwrap().value;
                let p = fragility_perturbative(&c, &psi, &r).unwrap().value;
                (e - p).abs()
            })
            .collect();
        let slope = loglog_slope(&totals, &gaps);
        assert!(slope >= 2.7, "seed {seed}: slope {slope}, gaps {gaps:?}");
    }
}

#[test]
fn large_angles_are_flagged() {
    let c = single_z(0.5);
    let r = fragility_perturbative(&c, &plus1(), &NoiseRealization::from_angles(vec![0.5])).unwrap();
    assert_eq!(r.warnings.len(), 1);
}

#[test]
fn global_phases_do_not_change_fragility() {
    let (c, psi) = random_instance(3, 3, RandomNoise::PauliPerQubit, 0.05, 12);
    // Rebuild the circuit with every gate given as an explicit unitary times a phase.
    let mut phased = Circuit::new(3);
    for (l, layer) in c.layers().iter().enumerate() {
        let gates = layer
            .gates
            .iter()
            .enumerate()
            .map(|(k, g)| {
                let phase = C64::from_polar(1.0, 0.3 + l as f64 + 0.7 * k as f64);
                Gate::from_unitary(3, g.qubits(), g.local_matrix().scale(phase)).unwrap()
            })
            .collect();
        phased.push_layer(gates, layer.noise.clone()).unwrap();
    }
    let r = sample_angles(&c, 8, 8);
    let pairs = [
        (fragility_exact(&c, &psi, &r).unwrap().value, fragility_exact(&phased, &psi, &r).unwrap().value),
        (fragility_perturbative(&c, &psi, &r).unwrap().value, fragility_perturbative(&phased, &psi, &r).unwrap().value),
        (fragility_avg(&c, &psi).unwrap().value, fragility_avg(&phased, &psi).unwrap().value),
    ];
    for (a, b) in pairs {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}
