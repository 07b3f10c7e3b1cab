//! Path lengths and the resilience–runtime tradeoff checks.

use crate::analog::{analog_tradeoff_terms, continuous_path_length, AnalogNoise, NoiseOperator, Schedule};
use crate::circuit::Circuit;
use crate::cost::cost_site_terms;
use crate::error::{Error, Result};
use crate::fragility::fragility_avg;
use crate::scalar::Real;
use crate::state::StateVector;
use serde::Serialize;

/// Relative slack below which a tradeoff inequality is reported as violated.
pub const TRADEOFF_SLACK_TOLERANCE: f64 = 1e-9;

/// Which operator's variance enters a digital path length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    /// `Σ_sites |θ_paired| √var(Q_site)` over the circuit's noise sites.
    NoiseOps,
    /// `Σ_gates |θ| √var(H_gate)`: the Fubini–Study length of the ideal evolution.
    OverRotation,
}

/// Outcome of a tradeoff check `lhs ≥ rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct TradeoffVerdict<T: Real> {
    pub lhs: T,
    pub rhs: T,
    pub slack: T,
    pub holds: bool,
}

impl<T: Real> TradeoffVerdict<T> {
    pub fn new(lhs: T, rhs: T) -> Self {
        let slack = lhs - rhs;
        let holds = slack >= -T::lit(TRADEOFF_SLACK_TOLERANCE) * lhs.max(T::one());
        Self { lhs, rhs, slack, holds }
    }

    /// `lhs / rhs` (infinite when `rhs = 0 < lhs`, one when both vanish).
    pub fn ratio(&self) -> T {
        if self.rhs == T::zero() {
            if self.lhs == T::zero() {
                T::one()
            } else {
                T::infinity()
            }
        } else {
            self.lhs / self.rhs
        }
    }
}

/// Digital path length `ℒ_Q = Σ |θ| √var_{ψ_l}(·)` with `ψ_l` the state after layer `l`.
pub fn path_length_digital<T: Real>(circuit: &Circuit<T>, psi0: &StateVector<T>, mode: PathMode) -> Result<T> {
    let traj = circuit.simulate_trajectory(psi0)?;
    let mut total = T::zero();
    match mode {
        PathMode::OverRotation => {
            for (l, layer) in circuit.layers().iter().enumerate() {
                for g in &layer.gates {
                    if g.angle() != T::zero() {
                        total += g.angle().abs() * traj[l + 1].variance(g.generator())?.sqrt();
                    }
                }
            }
        }
        PathMode::NoiseOps => {
            for (id, site) in circuit.sites() {
                let gate = circuit.paired_gate(id).ok_or(Error::UnpairedSite { layer: id.layer, position: id.position })?;
                if gate.angle() != T::zero() {
                    total += gate.angle().abs() * traj[id.layer + 1].variance(site.operator())?.sqrt();
                }
            }
        }
    }
    Ok(total)
}

/// Continuous path length `∫₀ᵀ √var_{ψ_t}(Q) dt`; `NoiseOperator::Hamiltonian` gives the
/// Fubini–Study length of the schedule's trajectory.
pub fn path_length_continuous<T: Real>(
    schedule: &Schedule<T>,
    q: &NoiseOperator<T>,
    psi0: &StateVector<T>,
) -> Result<T> {
    continuous_path_length(schedule, q, psi0)
}

/// Effective gate count: the larger of the number of gates and of active (σ > 0) noise sites.
pub fn effective_gate_count<T: Real>(circuit: &Circuit<T>) -> usize {
    let active = circuit.sites().filter(|(_, s)| s.sigma() > T::zero()).count();
    circuit.gate_count().max(active)
}

/// `N_G ℱ̄ ≥ min_{lq} (σ_lq/θ_lq)² ℒ_Q²`, with `ℒ_Q` summed over the active sites.
pub fn check_tradeoff_digital<T: Real>(circuit: &Circuit<T>, psi0: &StateVector<T>) -> Result<TradeoffVerdict<T>> {
    let avg = fragility_avg(circuit, psi0)?;
    let mut min_ratio = T::infinity();
    let mut path = T::zero();
    let mut active = 0usize;
    for (k, (id, site)) in circuit.sites().enumerate() {
        let sigma = site.sigma();
        if sigma == T::zero() {
            continue;
        }
        active += 1;
        let gate = circuit.paired_gate(id).ok_or(Error::UnpairedSite { layer: id.layer, position: id.position })?;
        let theta = gate.angle().abs();
        if theta == T::zero() {
            continue;
        }
        let r = sigma / theta;
        min_ratio = min_ratio.min(r * r);
        path += theta * avg.contributions[k].variance.sqrt();
    }
    if active == 0 {
        return Ok(TradeoffVerdict::new(T::zero(), T::zero()));
    }
    if !min_ratio.is_finite() {
        return Err(Error::NoFiniteRatio);
    }
    let lhs = T::from_count(effective_gate_count(circuit)) * avg.value;
    Ok(TradeoffVerdict::new(lhs, min_ratio * path * path))
}

/// `T ℱ̄ ≥ min_t γ_t ℒ_Q²`, with both integrals and the minimum taken on one quadrature grid.
pub fn check_tradeoff_analog<T: Real>(
    schedule: &Schedule<T>,
    noise: &AnalogNoise<T>,
    psi0: &StateVector<T>,
) -> Result<TradeoffVerdict<T>> {
    let (f, l, min_gamma) = analog_tradeoff_terms(schedule, noise, psi0)?;
    Ok(TradeoffVerdict::new(schedule.runtime() * f, min_gamma * l * l))
}

/// `N_G ℱ̄^C ≥ (Σ_{lq} σ_lq |⟨ψ₀|[Q_l(t_l), C(t_D)]|ψ₀⟩|)²`.
pub fn check_tradeoff_cost<T: Real>(
    circuit: &Circuit<T>,
    psi0: &StateVector<T>,
    cost: &crate::operator::HermitianOperator<T>,
) -> Result<TradeoffVerdict<T>> {
    let terms = cost_site_terms(circuit, psi0, cost)?;
    let mut f = T::zero();
    let mut path = T::zero();
    for t in &terms {
        f += t.sigma * t.sigma * t.commutator * t.commutator;
        path += t.sigma * t.commutator;
    }
    let lhs = T::from_count(effective_gate_count(circuit)) * f;
    Ok(TradeoffVerdict::new(lhs, path * path))
}
