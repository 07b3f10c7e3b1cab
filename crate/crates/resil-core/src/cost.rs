//! Fragility of expectation values of a cost observable `C`.

use crate::circuit::{Circuit, SiteId};
use crate::error::{Error, Result};
use crate::fragility::first_order_displacement;
use crate::linalg::inner;
use crate::noise::NoiseRealization;
use crate::operator::HermitianOperator;
use crate::report::{FragilityReport, Method, SiteContribution};
use crate::scalar::{Real, C};
use crate::state::StateVector;
use serde::Serialize;

fn check_cost<T: Real>(circuit: &Circuit<T>, cost: &HermitianOperator<T>) -> Result<()> {
    if cost.n_qubits() != circuit.n_qubits() {
        return Err(Error::DimensionMismatch { expected: circuit.n_qubits(), found: cost.n_qubits() });
    }
    Ok(())
}

/// Applies the inverse of layer `l`'s gates in place.
fn apply_layer_adjoint<T: Real>(circuit: &Circuit<T>, l: usize, psi: &mut [C<T>]) {
    for g in &circuit.layers()[l].gates {
        g.unitary().adjoint().apply(psi);
    }
}

/// `(⟨δψ_D|C|δψ_D⟩ - ⟨ψ_D|C|ψ_D⟩)²`.
pub fn cost_fragility_exact<T: Real>(
    circuit: &Circuit<T>,
    psi0: &StateVector<T>,
    cost: &HermitianOperator<T>,
    realization: &NoiseRealization<T>,
) -> Result<FragilityReport<T>> {
    check_cost(circuit, cost)?;
    let ideal = circuit.final_state(psi0)?;
    let noisy = circuit.simulate_noisy(psi0, realization)?;
    let d = noisy.expectation(cost)? - ideal.expectation(cost)?;
    Ok(FragilityReport::new(Method::CostExact, d * d))
}

/// Leading-order cost fragility: the square of the first-order shift
/// `δ⟨C⟩ = Σ_s δθ_s ⟨ψ₀|i[Q_s(t_s), C(t_D)]|ψ₀⟩ = 2 Im⟨Cψ_D|w⟩`.
pub fn cost_fragility_perturbative<T: Real>(
    circuit: &Circuit<T>,
    psi0: &StateVector<T>,
    cost: &HermitianOperator<T>,
    realization: &NoiseRealization<T>,
) -> Result<FragilityReport<T>> {
    check_cost(circuit, cost)?;
    let (psi_d, w) = first_order_displacement(circuit, psi0, realization)?;
    let c_psi = cost.apply(&psi_d);
    let shift = T::lit(2.0) * inner(&c_psi, &w).im;
    Ok(FragilityReport::new(Method::CostPerturbative, shift * shift))
}

/// Per-site data of the averaged cost fragility.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct CostSiteTerm<T: Real> {
    pub site: SiteId,
    pub sigma: T,
    /// `|⟨ψ₀|[Q_l(t_l), C(t_D)]|ψ₀⟩|`.
    pub commutator: T,
}

/// Commutator magnitudes `|⟨ψ₀|[Q_s(t_s), C(t_D)]|ψ₀⟩| = 2|Im⟨Q_sψ_l|U_{l+1:D}† C ψ_D⟩|` for every
/// site, with `C|ψ_D⟩` propagated backwards once through the circuit.
pub fn cost_site_terms<T: Real>(
    circuit: &Circuit<T>,
    psi0: &StateVector<T>,
    cost: &HermitianOperator<T>,
) -> Result<Vec<CostSiteTerm<T>>> {
    check_cost(circuit, cost)?;
    let traj = circuit.simulate_trajectory(psi0)?;
    let depth = circuit.depth();
    let mut chi = cost.apply(traj[depth].amplitudes());
    let mut per_layer: Vec<Vec<CostSiteTerm<T>>> = vec![Vec::new(); depth];
    for l in (0..depth).rev() {
        let psi = traj[l + 1].amplitudes();
        for (position, site) in circuit.layers()[l].noise.iter().enumerate() {
            let q_psi = site.operator().apply(psi);
            let z = inner(&q_psi, &chi);
            per_layer[l].push(CostSiteTerm {
                site: SiteId { layer: l, position },
                sigma: site.sigma(),
                commutator: (T::lit(2.0) * z.im).abs(),
            });
        }
        apply_layer_adjoint(circuit, l, &mut chi);
    }
    Ok(per_layer.into_iter().flatten().collect())
}

/// Noise-averaged cost fragility `Σ_{lq} σ_lq² |⟨ψ₀|[Q_l(t_l), C(t_D)]|ψ₀⟩|²`. Contributions
/// carry the squared commutator in their `variance` field.
pub fn cost_fragility_avg<T: Real>(
    circuit: &Circuit<T>,
    psi0: &StateVector<T>,
    cost: &HermitianOperator<T>,
) -> Result<FragilityReport<T>> {
    let terms = cost_site_terms(circuit, psi0, cost)?;
    let mut total = T::zero();
    let mut contributions = Vec::with_capacity(terms.len());
    for t in terms {
        let sigma_sq = t.sigma * t.sigma;
        let variance = t.commutator * t.commutator;
        total += sigma_sq * variance;
        contributions.push(SiteContribution { site: t.site, sigma_sq, variance });
    }
    let mut r = FragilityReport::new(Method::CostAveraged, total);
    r.contributions = contributions;
    Ok(r)
}

/// Both sides of the identity linking state fragility to the cost `C_φ = I - |ψ_D⟩⟨ψ_D|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct CphiRelation<T: Real> {
    pub lhs: T,
    pub rhs: T,
    pub residual: T,
}

/// `lhs = (⟨δψ_D|C_φ|δψ_D⟩ - ⟨ψ_D|C_φ|ψ_D⟩)²`, `rhs = (1 + |⟨δψ_D|ψ_D⟩|)² (ℱ_Q/2)²`.
pub fn cphi_relation_check<T: Real>(
    circuit: &Circuit<T>,
    psi0: &StateVector<T>,
    realization: &NoiseRealization<T>,
) -> Result<CphiRelation<T>> {
    let ideal = circuit.final_state(psi0)?;
    let noisy = circuit.simulate_noisy(psi0, realization)?;
    // ⟨χ|C_φ|χ⟩ = ⟨χ|χ⟩ - |⟨ψ_D|χ⟩|² for the projector complement onto the ideal final state.
    let cphi = |s: &StateVector<T>| -> Result<T> { Ok(s.inner(s)?.re - ideal.inner(s)?.norm_sqr()) };
    let d = cphi(&noisy)? - cphi(&ideal)?;
    let lhs = d * d;
    let ov = ideal.overlap_modulus(&noisy)?;
    let f = T::lit(2.0) * (T::one() - ov);
    let half = f / T::lit(2.0);
    let rhs = (T::one() + ov) * (T::one() + ov) * half * half;
    Ok(CphiRelation { lhs, rhs, residual: (lhs - rhs).abs() })
}
