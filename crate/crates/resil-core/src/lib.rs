//! Noise-resilience analysis of quantum-algorithm compilations.
//!
//! Digital circuits and analog schedules are simulated as dense pure states; the
//! fragility of a compilation — the squared Bures distance between ideal and
//! noise-perturbed final states — is evaluated exactly, to leading order, averaged
//! over uncorrelated noise, and by Monte Carlo. Path lengths and the
//! resilience–runtime tradeoff inequalities are checked on top of these.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*F64` aliases
//! below are the usual entry points.

pub mod analog;
pub mod circuit;
pub mod cost;
pub mod density;
pub mod document;
pub mod error;
pub mod fragility;
pub mod geometry;
pub mod linalg;
pub mod models;
pub mod noise;
pub mod operator;
pub mod pauli;
pub mod random;
pub mod report;
pub mod scalar;
pub mod state;

pub use analog::{
    cost_fragility_analog, evolve_schedule, fragility_analog, trajectory_mc, AnalogNoise, Integrator,
    IntegratorConfig, Interpolation, NoiseOperator, Ramp, Schedule, ScheduleTerm, Trajectory, TrajectoryOptions,
};
pub use circuit::{
    simulate_noisy, simulate_trajectory, AngleDistribution, Circuit, DistributionKind, Gate, Layer, NoiseSite, SiteId,
};
pub use cost::{
    cost_fragility_avg, cost_fragility_exact, cost_fragility_perturbative, cost_site_terms, cphi_relation_check,
    CostSiteTerm, CphiRelation,
};
pub use density::DensityMatrix;
pub use document::{circuit_to_json, parse_circuit, parse_noise_spec, parse_schedule, schedule_to_json};
pub use error::{Error, Result};
pub use fragility::{
    fragility_avg, fragility_exact, fragility_mc_average, fragility_perturbative, overlap_incoherent,
    site_covariance_matrix, Statistic,
};
pub use geometry::{
    check_tradeoff_analog, check_tradeoff_cost, check_tradeoff_digital, path_length_continuous, path_length_digital,
    PathMode, TradeoffVerdict,
};
pub use linalg::Matrix;
pub use models::{
    build_code_circuit, build_flip_example, build_pspin, flip_noise_ops, pspin_adiabatic_schedule, pspin_bangbang,
    pspin_bangbang_schedule,
    pspin_path_length_closed, CodeCircuitSpec, CodeKind, FlipKind, PSpinModel,
};
pub use noise::{
    biased_pauli_sites, channel_apply, coherent_average_oracle, sample_angles, AverageMode, BiasedNoiseSpec, Channel,
    CoherentAverage, CounterRng, NoiseRealization, Placement,
};
pub use operator::HermitianOperator;
pub use pauli::PauliString;
pub use report::{FragilityReport, Method, SiteContribution};
pub use scalar::{Real, C};
pub use state::{apply_gate, covariance, expectation, variance, StateVector};

pub type StateVectorF64 = StateVector<f64>;
pub type StateVectorF32 = StateVector<f32>;
pub type HermitianOperatorF64 = HermitianOperator<f64>;
pub type HermitianOperatorF32 = HermitianOperator<f32>;
pub type DensityMatrixF64 = DensityMatrix<f64>;
pub type CircuitF64 = Circuit<f64>;
pub type CircuitF32 = Circuit<f32>;
pub type GateF64 = Gate<f64>;
pub type NoiseSiteF64 = NoiseSite<f64>;
pub type NoiseRealizationF64 = NoiseRealization<f64>;
pub type ScheduleF64 = Schedule<f64>;
pub type AnalogNoiseF64 = AnalogNoise<f64>;
pub type FragilityReportF64 = FragilityReport<f64>;
pub type TradeoffVerdictF64 = TradeoffVerdict<f64>;
pub type PSpinModelF64 = PSpinModel<f64>;
