use num_complex::Complex;
use resil_core::random::{random_circuit, random_state, RandomCircuitSpec, RandomNoise, RandomSource};
use resil_core::{
    biased_pauli_sites, channel_apply, coherent_average_oracle, sample_angles, AngleDistribution, AverageMode,
    BiasedNoiseSpec, Channel, Circuit, CounterRng, DensityMatrix, DistributionKind, Gate, HermitianOperator, Matrix,
    NoiseSite, StateVector,
};

type C64 = Complex<f64>;

fn single_site_circuit(kind: DistributionKind, sigma: f64) -> Circuit<f64> {
    let mut c = Circuit::new(1);
    let z = HermitianOperator::pauli(1, "Z", &[0], 1.0).unwrap();
    c.push_layer(vec![], vec![NoiseSite::new(z, AngleDistribution::new(kind, sigma).unwrap(), None).unwrap()])
        .unwrap();
    c
}

fn random_rho(n: usize, seed: u64) -> DensityMatrix<f64> {
    let mut src = RandomSource::new(seed, 0);
    let a = DensityMatrix::from_pure(&random_state(n, &mut src).unwrap()).unwrap();
    let b = DensityMatrix::from_pure(&random_state(n, &mut src).unwrap()).unwrap();
    a.mix(&b, 0.3)
}

fn max_diff(a: &DensityMatrix<f64>, b: &DensityMatrix<f64>) -> f64 {
    a.matrix().max_abs_diff(b.matrix())
}

#[test]
fn two_point_angles_take_only_plus_minus_sigma() {
    let c = single_site_circuit(DistributionKind::TwoPoint, 0.01);
    let mut plus = 0;
    for i in 0..1000 {
        let a = sample_angles(&c, 5, i).angles()[0];
        assert!(a == 0.01 || a == -0.01);
        plus += (a > 0.0) as usize;
    }
    assert!((400..600).contains(&plus), "{plus}");
}

#[test]
fn gaussian_sample_mean_obeys_the_clt() {
    let c = single_site_circuit(DistributionKind::Gaussian, 0.01);
    let n = 100_000u64;
    let (mut s, mut s2) = (0.0, 0.0);
    for i in 0..n {
        let a = sample_angles(&c, 17, i).angles()[0];
        s += a;
        s2 += a * a;
    }
    let mean = s / n as f64;
    assert!(mean.abs() < 3.0 * 0.01 / (n as f64).sqrt(), "{mean}");
    let var = s2 / n as f64;
    assert!((var / 1e-4 - 1.0).abs() < 0.02, "{var}");
}

#[test]
fn uniform_angles_stay_within_the_half_width() {
    let d = AngleDistribution::<f64>::uniform_half_width(0.02).unwrap();
    let mut rng = CounterRng::new(1, 2);
    for k in 0..10_000 {
        assert!(rng.sample(&d, k).abs() <= 0.02);
    }
}

#[test]
fn sampling_is_deterministic_and_keyed() {
    let spec = RandomCircuitSpec { kind: DistributionKind::Gaussian, ..RandomCircuitSpec::new(4, 5, RandomNoise::PauliPerQubit, 0.1) };
    let c: Circuit<f64> = random_circuit(&spec, 2).unwrap();
    let a = sample_angles(&c, 99, 7);
    assert_eq!(a, sample_angles(&c, 99, 7));
    assert_eq!((a.seed(), a.sample_index()), (Some(99), Some(7)));
    assert_ne!(a.angles(), sample_angles(&c, 99, 8).angles());
    assert_ne!(a.angles(), sample_angles(&c, 100, 7).angles());
}

#[test]
fn zero_sigma_sites_get_zero_angles() {
    let mut c = single_site_circuit(DistributionKind::Gaussian, 0.0);
    let x = HermitianOperator::pauli(1, "X", &[0], 1.0).unwrap();
    c.add_noise(0, NoiseSite::new(x, AngleDistribution::gaussian(0.3).unwrap(), None).unwrap()).unwrap();
    let r = sample_angles(&c, 1, 1);
    assert_eq!(r.angles()[0], 0.0);
    assert_ne!(r.angles()[1], 0.0);
}

#[test]
fn symmetric_distributions_have_vanishing_sin_cos_mean() {
    for kind in [DistributionKind::TwoPoint, DistributionKind::Gaussian, DistributionKind::Uniform] {
        let d = AngleDistribution::<f64>::new(kind, 0.2).unwrap();
        let n = 200_000u64;
        let mut rng = CounterRng::new(3, 0);
        let vals: Vec<f64> = (0..n).map(|k| {
            let a = rng.sample(&d, k);
            a.sin() * a.cos()
        }).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!(mean.abs() < 4.0 * sd / (n as f64).sqrt() + 1e-15, "{kind:?}: {mean}");
    }
}

fn layered(n: usize) -> Circuit<f64> {
    let mut c = Circuit::new(n);
    c.push_gates(vec![Gate::named(n, "h", &[0], None).unwrap()]).unwrap();
    c.push_gates(vec![Gate::named(n, "cx", &[0, 1], None).unwrap()]).unwrap();
    c
}

#[test]
fn biased_sites_follow_the_bias() {
    let c = layered(3);
    let count = |eta: f64, letter: char| {
        let spec = BiasedNoiseSpec::new(1e-3, eta).unwrap();
        let noisy = biased_pauli_sites(&spec, &c).unwrap();
        noisy
            .sites()
            .filter(|(_, s)| s.operator().as_pauli_string().unwrap().letter(s.operator().support()[0]) == letter)
            .count()
    };
    assert_eq!((count(0.0, 'X'), count(0.0, 'Z')), (0, 6));
    assert_eq!((count(1.0, 'X'), count(1.0, 'Z')), (6, 0));
    assert_eq!((count(0.5, 'X'), count(0.5, 'Z')), (6, 6));

    let half = BiasedNoiseSpec::new(1e-3, 0.5).unwrap();
    assert_eq!(half.sigma_x(), half.sigma_z());
    for eta in [0.0, 0.3, 1.0] {
        let s = BiasedNoiseSpec::<f64>::new(0.02, eta).unwrap();
        assert!((2.0 * (s.sigma_x().powi(2) + s.sigma_z().powi(2)) - 0.02).abs() < 1e-15);
    }
}

#[test]
fn biased_spec_rejects_out_of_range_parameters_and_warns() {
    assert!(BiasedNoiseSpec::new(1.0, 0.5).is_err());
    assert!(BiasedNoiseSpec::new(-0.1, 0.5).is_err());
    assert!(BiasedNoiseSpec::new(0.01, 1.5).is_err());
    assert!(BiasedNoiseSpec::new(0.01, 0.5).unwrap().warnings().is_empty());
    assert_eq!(BiasedNoiseSpec::new(0.1, 0.5).unwrap().warnings().len(), 1);
}

#[test]
fn dephasing_scales_coherences() {
    let plus = DensityMatrix::from_pure(&StateVector::<f64>::plus(1).unwrap()).unwrap();
    for p in [0.0, 0.1, 0.5, 1.0] {
        let out = channel_apply(&plus, Channel::Dephasing(p), 0).unwrap();
        let d = out.matrix().data();
        assert!((d[1] - C64::new(0.5 * (1.0 - p), 0.0)).norm() < 1e-15);
        assert!((d[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
    }
}

#[test]
fn depolarizing_three_quarters_is_fully_mixing() {
    for seed in 0..5 {
        let rho = random_rho(1, seed);
        let out = channel_apply(&rho, Channel::Depolarizing(0.75), 0).unwrap();
        let half = Matrix::identity(2).scale(C64::new(0.5, 0.0));
        assert!(out.matrix().max_abs_diff(&half) < 1e-12);
    }
}

#[test]
fn biased_channel_is_the_composition_of_flips() {
    let rho = random_rho(2, 4);
    let (p, eta) = (0.08, 0.3);
    let out = channel_apply(&rho, Channel::Biased { p, eta_x: eta }, 1).unwrap();
    // Kraus maps written out explicitly.
    let x = resil_core::pauli::PauliString::single('X', 1).unwrap();
    let z = resil_core::pauli::PauliString::single('Z', 1).unwrap();
    let (px, pz) = (eta * p / 2.0, (1.0 - eta) * p / 2.0);
    let after_x = rho.mix(&rho.conjugate_pauli(&x), px);
    let expected = after_x.mix(&after_x.conjugate_pauli(&z), pz);
    assert!(max_diff(&out, &expected) < 1e-15);
    // Bitflip at the same rate is the eta = 1 case.
    let bf = channel_apply(&rho, Channel::Bitflip(p), 1).unwrap();
    assert!(max_diff(&bf, &channel_apply(&rho, Channel::Biased { p, eta_x: 1.0 }, 1).unwrap()) < 1e-15);
}

#[test]
fn channels_preserve_trace_and_positivity() {
    let rho = random_rho(3, 9);
    for ch in [Channel::Dephasing(0.3), Channel::Bitflip(0.7), Channel::Depolarizing(0.9), Channel::Biased { p: 0.5, eta_x: 0.6 }] {
        for q in 0..3 {
            let out = channel_apply(&rho, ch, q).unwrap();
            assert!((out.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
            assert!(out.min_eigenvalue() >= -1e-10);
        }
    }
    assert!(channel_apply(&rho, Channel::Dephasing(1.5), 0).is_err());
    assert!(channel_apply(&rho, Channel::Dephasing(0.1), 3).is_err());
}

#[test]
fn identity_noise_leaves_the_state_unchanged() {
    let rho = random_rho(2, 1);
    let id = HermitianOperator::identity(2).unwrap();
    let out = coherent_average_oracle(&rho, &id, &AngleDistribution::gaussian(0.3).unwrap(), AverageMode::Analytic)
        .unwrap();
    assert!(max_diff(&out.rho, &rho) < 1e-15);
}

#[test]
fn two_point_coherent_average_is_exactly_dephasing() {
    for sigma in [0.01, 0.1, 0.7] {
        let rho = random_rho(1, 3);
        let z = HermitianOperator::pauli(1, "Z", &[0], 1.0).unwrap();
        let d = AngleDistribution::two_point(sigma).unwrap();
        let coherent = coherent_average_oracle(&rho, &z, &d, AverageMode::Analytic).unwrap().rho;
        let p = 2.0 * sigma.sin().powi(2);
        let channel = channel_apply(&rho, Channel::Dephasing(p), 0).unwrap();
        assert!(max_diff(&coherent, &channel) < 1e-12);
    }
}

#[test]
fn analytic_and_monte_carlo_averages_agree() {
    let rho = random_rho(2, 6);
    let q = HermitianOperator::pauli(2, "XY", &[0, 1], 1.0).unwrap();
    for (kind, samples) in [(DistributionKind::Gaussian, 1_000_000), (DistributionKind::Uniform, 200_000), (DistributionKind::TwoPoint, 10_000)] {
        let sigma = if kind == DistributionKind::Gaussian { 0.01 } else { 0.3 };
        let d = AngleDistribution::new(kind, sigma).unwrap();
        let a = coherent_average_oracle(&rho, &q, &d, AverageMode::Analytic).unwrap().rho;
        let mc = coherent_average_oracle(&rho, &q, &d, AverageMode::MonteCarlo { samples, seed: 5 }).unwrap();
        let (se_re, se_im) = (mc.stderr_re.unwrap(), mc.stderr_im.unwrap());
        for (k, (x, y)) in a.matrix().data().iter().zip(mc.rho.matrix().data()).enumerate() {
            assert!((x.re - y.re).abs() <= 3.0 * se_re[k] + 1e-12, "{kind:?} re[{k}]");
            assert!((x.im - y.im).abs() <= 3.0 * se_im[k] + 1e-12, "{kind:?} im[{k}] {} {}", (x.im - y.im), se_im[k]);
        }
    }
}

#[test]
fn analytic_mode_requires_a_pauli_string() {
    let rho = random_rho(1, 0);
    let q = HermitianOperator::from_dense_labels(1, &[(1.0, "X"), (1.0, "Z")]).unwrap();
    assert!(coherent_average_oracle(&rho, &q, &AngleDistribution::two_point(0.1).unwrap(), AverageMode::Analytic)
        .is_err());
}

#[test]
fn flip_probability_is_sigma_squared_to_fourth_order() {
    for kind in [DistributionKind::TwoPoint, DistributionKind::Gaussian, DistributionKind::Uniform] {
        for sigma in [0.001f64, 0.01, 0.05, 0.1, 0.3] {
            let s = AngleDistribution::new(kind, sigma).unwrap().mean_sin_sq();
            assert!((s - sigma * sigma).abs() <= sigma.powi(4), "{kind:?} σ = {sigma}");
        }
    }
}
