use num_complex::Complex;
use proptest::prelude::*;
use resil_core::random::{random_hermitian_matrix, random_pauli_sum, random_state, RandomSource};
use resil_core::{build_flip_example, build_pspin, HermitianOperator, StateVector};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

type C64 = Complex<f64>;

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() < tol
}

fn z1() -> HermitianOperator<f64> {
    HermitianOperator::pauli(1, "Z", &[0], 1.0).unwrap()
}

fn x1() -> HermitianOperator<f64> {
    HermitianOperator::pauli(1, "X", &[0], 1.0).unwrap()
}

#[test]
fn x_rotation_by_half_pi_flips_with_phase() {
    let out = StateVector::<f64>::zero(1).unwrap().apply_gate(&x1(), FRAC_PI_2).unwrap();
    let a = out.amplitudes();
    assert!(close(a[0], C64::new(0.0, 0.0), 1e-15));
    assert!(close(a[1], C64::new(0.0, -1.0), 1e-15));
}

#[test]
fn z_rotation_on_plus_produces_opposite_phases() {
    let out = StateVector::<f64>::plus(1).unwrap().apply_gate(&z1(), FRAC_PI_4).unwrap();
    let a = out.amplitudes();
    let e = C64::from_polar(FRAC_1_SQRT_2, -FRAC_PI_4);
    assert!(close(a[0], e, 1e-15));
    assert!(close(a[1], e.conj(), 1e-15));
}

#[test]
fn flip_generator_maps_00_to_11() {
    let s = build_flip_example::<f64>(resil_core::FlipKind::A).unwrap();
    let h = &s.terms()[0].operator;
    let out = StateVector::<f64>::zero(2).unwrap().apply_gate(h, FRAC_PI_2).unwrap();
    let target = StateVector::<f64>::basis(2, 3).unwrap();
    assert!((out.fidelity(&target).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn expectation_examples() {
    let plus = StateVector::<f64>::plus(1).unwrap();
    let zero = StateVector::<f64>::zero(1).unwrap();
    assert!((plus.expectation(&x1()).unwrap() - 1.0).abs() < 1e-15);
    assert!(zero.expectation(&x1()).unwrap().abs() < 1e-15);

    let m = build_pspin::<f64>(3, 3).unwrap();
    let mz3 = m.h1.scaled(-2.0 * 9.0);
    assert!(StateVector::<f64>::plus(3).unwrap().expectation(&mz3).unwrap().abs() < 1e-13);
}

#[test]
fn variance_examples() {
    assert!((StateVector::<f64>::plus(1).unwrap().variance(&z1()).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(StateVector::<f64>::zero(1).unwrap().variance(&z1()).unwrap(), 0.0);
    let m = build_pspin::<f64>(3, 3).unwrap();
    let v = StateVector::<f64>::plus(3).unwrap().variance(&m.h1).unwrap();
    assert!((v - 183.0 / 324.0).abs() < 1e-12);
}

#[test]
fn covariance_examples() {
    let y1 = HermitianOperator::pauli(1, "Y", &[0], 1.0).unwrap();
    let plus = StateVector::<f64>::plus(1).unwrap();
    let zero = StateVector::<f64>::zero(1).unwrap();
    assert!((plus.covariance(&z1(), &z1()).unwrap() - 1.0).abs() < 1e-15);
    assert!(zero.covariance(&x1(), &z1()).unwrap().abs() < 1e-15);
    assert!(zero.covariance(&x1(), &y1).unwrap().abs() < 1e-15);
}

#[test]
fn dimension_mismatch_is_rejected() {
    let two = StateVector::<f64>::plus(2).unwrap();
    assert!(two.expectation(&z1()).is_err());
    assert!(two.apply_gate(&z1(), 0.3).is_err());
    assert!(two.covariance(&z1(), &z1()).is_err());
}

#[test]
fn non_hermitian_dense_input_is_rejected() {
    let m = resil_core::Matrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
    ])
    .unwrap();
    assert!(HermitianOperator::from_full_matrix(1, m).is_err());
}

#[test]
fn norm_is_preserved_over_many_random_gates() {
    let mut src = RandomSource::new(11, 0);
    for k in 0..1000 {
        let n = 1 + k % 4;
        let psi = random_state::<f64>(n, &mut src).unwrap();
        let gen = if k % 2 == 0 {
            random_pauli_sum(n, 3, n.min(3), &mut src).unwrap()
        } else {
            let support: Vec<usize> = src.permutation(n).into_iter().take(n.min(3)).collect();
            HermitianOperator::from_matrix(n, support.clone(), random_hermitian_matrix(1 << support.len(), &mut src))
                .unwrap()
        };
        let out = psi.apply_gate(&gen, src.range(-4.0, 4.0)).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-10, "case {k}");
    }
}

#[test]
fn raw_expectation_is_real() {
    let mut src = RandomSource::new(12, 0);
    for _ in 0..200 {
        let psi = random_state::<f64>(3, &mut src).unwrap();
        let op = random_pauli_sum(3, 5, 3, &mut src).unwrap();
        assert!(psi.expectation_raw(&op).unwrap().im.abs() < 1e-12);
        let dense = HermitianOperator::from_full_matrix(3, op.full_matrix().unwrap()).unwrap();
        assert!(psi.expectation_raw(&dense).unwrap().im.abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pauli_and_dense_forms_agree(seed in any::<u64>(), n in 1usize..=4) {
        let mut src = RandomSource::new(seed, 0);
        let psi = random_state::<f64>(n, &mut src).unwrap();
        let op = random_pauli_sum(n, 4, n, &mut src).unwrap();
        let dense = HermitianOperator::from_full_matrix(n, op.full_matrix().unwrap()).unwrap();
        let (e1, e2) = (psi.expectation(&op).unwrap(), psi.expectation(&dense).unwrap());
        let (v1, v2) = (psi.variance(&op).unwrap(), psi.variance(&dense).unwrap());
        prop_assert!((e1 - e2).abs() < 1e-12);
        prop_assert!((v1 - v2).abs() < 1e-12);
    }

    #[test]
    fn variance_is_self_covariance(seed in any::<u64>(), n in 1usize..=4) {
        let mut src = RandomSource::new(seed, 0);
        let psi = random_state::<f64>(n, &mut src).unwrap();
        let op = random_pauli_sum(n, 4, n, &mut src).unwrap();
        let v = psi.variance(&op).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert_eq!(v, psi.covariance(&op, &op).unwrap());
    }

    #[test]
    fn covariance_is_symmetric(seed in any::<u64>()) {
        let mut src = RandomSource::new(seed, 0);
        let psi = random_state::<f64>(3, &mut src).unwrap();
        let a = random_pauli_sum(3, 3, 2, &mut src).unwrap();
        let b = random_pauli_sum(3, 3, 2, &mut src).unwrap();
        prop_assert_eq!(psi.covariance(&a, &b).unwrap(), psi.covariance(&b, &a).unwrap());
    }

    #[test]
    fn expectation_is_bounded_by_coefficient_sum(seed in any::<u64>()) {
        let mut src = RandomSource::new(seed, 0);
        let psi = random_state::<f64>(3, &mut src).unwrap();
        let op = random_pauli_sum::<f64>(3, 4, 3, &mut src).unwrap();
        let bound: f64 = op.pauli_terms().unwrap().iter().map(|t| t.coeff.abs()).sum();
        prop_assert!(psi.expectation(&op).unwrap().abs() <= bound + 1e-12);
    }
}

#[test]
fn single_precision_alias_works() {
    let psi = resil_core::StateVectorF32::plus(1).unwrap();
    let z = resil_core::HermitianOperatorF32::pauli(1, "Z", &[0], 1.0).unwrap();
    assert!((psi.variance(&z).unwrap() - 1.0).abs() < 1e-6);
    let out = psi.apply_gate(&z, 0.3).unwrap();
    assert!((out.norm() - 1.0).abs() < 1e-6);
}
