use resil_cli::analyze::{evaluate, parse_cost, MethodChoice, Sampling};
use resil_cli::input::{InitialState, ModelKind, ModelSpec, NoiseModel, Noisy, Overrides, Source};
use resil_cli::output::{format_float, Cell, Table};
use resil_cli::sweep::{parse_values, SweepParam};
use resil_cli::{with_workers, CliError};
use std::f64::consts::FRAC_PI_4;

#[test]
fn model_specs_parse_and_print_canonically() {
    let m = ModelSpec::parse("PSpin: runtime=4, n=5").unwrap();
    assert_eq!(m.kind, ModelKind::PSpin);
    assert_eq!(m.to_string(), "pspin:n=5,runtime=4");
    assert_eq!(ModelSpec::parse(&m.to_string()).unwrap(), m);
    assert_eq!(ModelSpec::named(ModelKind::FlipB).to_string(), "flip-b");
}

#[test]
fn model_specs_reject_unknown_names_and_keys() {
    for bad in ["nope", "flip-a:n=3", "pspin:depth=2", "pspin:n=3,n=4", "pspin:n"] {
        assert!(matches!(ModelSpec::parse(bad), Err(CliError::Input(_))), "{bad}");
    }
    let bad_variant = ModelSpec::parse("pspin:variant=fast").unwrap();
    assert!(matches!(bad_variant.build(), Err(CliError::Input(_))));
}

#[test]
fn pspin_variants_build_the_expected_program_kinds() {
    for (spec, kind) in
        [("pspin:n=3", "schedule"), ("pspin:n=3,variant=bangbang", "circuit"), ("pspin:n=3,variant=bangbang-steps", "schedule")]
    {
        let (program, psi0) = ModelSpec::parse(spec).unwrap().build().unwrap();
        assert_eq!(program.kind(), kind, "{spec}");
        assert_eq!(program.n_qubits(), 3);
        assert_eq!(psi0.n_qubits(), 3);
    }
}

#[test]
fn overrides_change_size_and_runtime() {
    let src = Source::model("pspin:n=3").unwrap();
    let comp = src.load(&Overrides { n: Some(5), runtime: Some(2.0) }).unwrap();
    assert_eq!(comp.program.n_qubits(), 5);
    let noisy = NoiseModel::parse("hamiltonian").unwrap().apply(&comp).unwrap();
    match noisy.noisy {
        Noisy::Analog { schedule, .. } => assert!((schedule.runtime() - 2.0).abs() < 1e-15),
        Noisy::Digital { .. } => panic!("expected a schedule"),
    }
}

#[test]
fn initial_states_parse() {
    assert_eq!(InitialState::parse("zero").unwrap(), InitialState::Zero);
    assert_eq!(InitialState::parse("plus").unwrap(), InitialState::Plus);
    assert_eq!(InitialState::parse("basis:3").unwrap(), InitialState::Basis(3));
    assert!(InitialState::parse("basis:x").is_err());
    assert!(InitialState::parse("one").is_err());
    assert!(InitialState::Basis(4).build(2).is_err());
}

#[test]
fn noise_presets_parse_and_validate() {
    assert!(NoiseModel::parse("none").unwrap().analog.is_none());
    assert!(NoiseModel::parse("qi:gamma=0.5").unwrap().analog.is_some());
    let b = NoiseModel::parse("biased:p=0.002,eta_x=0.25").unwrap().biased.unwrap();
    assert_eq!((b.p, b.eta_x), (0.002, 0.25));
    for bad in ["biased:eta_x=0.3", "biased:p=0.1,eta_x=2", "qi:sigma=1", "none:gamma=1", "/no/such/noise.json"] {
        assert!(matches!(NoiseModel::parse(bad), Err(CliError::Input(_))), "{bad}");
    }
}

#[test]
fn sigma_override_maps_to_biased_probability() {
    let n = NoiseModel::parse("biased:p=0.001,eta_x=0").unwrap().with_sigma(0.1).unwrap();
    assert!((n.biased.unwrap().p - 0.02).abs() < 1e-15);
    assert!(NoiseModel::parse("none").unwrap().with_eta_x(0.5).is_err());
    assert!(NoiseModel::parse("qi").unwrap().with_gamma_scale(-1.0).is_err());
}

#[test]
fn flip_model_fragility_matches_its_closed_form() {
    let comp = Source::model("flip-a").unwrap().load(&Overrides::default()).unwrap();
    let noisy = NoiseModel::parse("qi").unwrap().apply(&comp).unwrap();
    let r = evaluate(&noisy, MethodChoice::Analog, Sampling::default(), None).unwrap();
    assert!((r.value - FRAC_PI_4).abs() < 1e-6 * FRAC_PI_4);
    assert!(matches!(evaluate(&noisy, MethodChoice::Avg, Sampling::default(), None), Err(CliError::Input(_))));
}

#[test]
fn cost_labels_and_documents_parse() {
    assert_eq!(parse_cost("ZZ", 2).unwrap().n_qubits(), 2);
    let doc = parse_cost(r#"[{"coeff": 0.5, "label": "XI"}, {"coeff": 1.0, "label": "ZZ"}]"#, 2);
    assert!(doc.is_ok(), "{doc:?}");
    assert!(parse_cost("ZZZ", 2).is_err());
}

#[test]
fn sweep_values_and_parameters_parse() {
    assert_eq!(parse_values("1,2,4").unwrap(), vec![1.0, 2.0, 4.0]);
    assert_eq!(parse_values("0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    assert_eq!(parse_values("3:9:1").unwrap(), vec![3.0]);
    for bad in ["", "a,b", "0:1", "0:1:x", "0:1:0"] {
        assert!(parse_values(bad).is_err(), "{bad}");
    }
    assert_eq!("runtime".parse::<SweepParam>().unwrap(), SweepParam::T);
    assert_eq!("eta_x".parse::<SweepParam>().unwrap().name(), "eta_x");
    assert!("depth".parse::<SweepParam>().is_err());
}

#[test]
fn floats_render_with_round_trip_precision() {
    for x in [0.1, -2.5e-12, 1.0 / 3.0, 6.02e23] {
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }
    assert_eq!(format_float(f64::NAN), "NaN");
    let mut t = Table::new(vec!["x".into(), "label".into()]);
    t.push(vec![Cell::Int(3), "a,b".into()]);
    assert_eq!(t.to_csv().unwrap(), "x,label\n3,\"a,b\"\n");
}

#[test]
fn worker_pools_run_the_closure() {
    assert_eq!(with_workers(Some(2), rayon::current_num_threads).unwrap(), 2);
    assert_eq!(with_workers(None, || 7).unwrap(), 7);
    assert!(with_workers(Some(0), || ()).is_err());
}
