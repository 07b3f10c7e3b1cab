//! Digital fragility: exact Bures form, the perturbative quadratic form, the
//! noise-averaged value, the incoherent overlap and a Monte Carlo oracle.

use crate::circuit::{Circuit, SiteId};
use crate::error::Result;
use crate::linalg::{inner, norm_sqr};
use crate::noise::{sample_angles, NoiseRealization};
use crate::report::{mean_stderr, FragilityReport, Method, SiteContribution};
use crate::scalar::{Real, C};
use crate::state::StateVector;
use num_traits::Zero;
use rayon::prelude::*;

/// Total-angle threshold above which perturbative results are flagged.
pub const PERTURBATIVE_ANGLE_WARNING: f64 = 0.3;

/// `2(1 - |⟨ψ_D|δψ_D⟩|)`.
pub fn fragility_exact<T: Real>(
    circuit: &Circuit<T>,
    psi0: &StateVector<T>,
    realization: &NoiseRealization<T>,
) -> Result<FragilityReport<T>> {
    let ideal = circuit.final_state(psi0)?;
    let noisy = circuit.simulate_noisy(psi0, realization)?;
    let ov = ideal.overlap_modulus(&noisy)?;
    Ok(FragilityReport::new(Method::Exact, T::lit(2.0) * (T::one() - ov)))
}

fn angle_warnings<T: Real>(realization: &NoiseRealization<T>) -> Vec<String> {
    let total = realization.total_angle();
    if total > T::lit(PERTURBATIVE_ANGLE_WARNING) {
        vec![format!("total noise angle {total} exceeds {PERTURBATIVE_ANGLE_WARNING}; outside the perturbative regime")]
    } else {
        Vec::new()
    }
}

/// First-order displacement `w = Σ_s δθ_s (U_{l+1:D} Q_s|ψ_l⟩ - m_s|ψ_D⟩)` together with `ψ_D`,
/// accumulated in a single forward sweep.
pub(crate) fn first_order_displacement<T: Real>(
    circuit: &Circuit<T>,
    psi0: &StateVector<T>,
    realization: &NoiseRealization<T>,
) -> Result<(Vec<C<T>>, Vec<C<T>>)> {
    let expected = circuit.noise_site_count();
    let angles = realization.angles();
    if angles.len() != expected {
        return Err(crate::error::Error::MissingRealization { expected, found: angles.len() });
    }
    psi0.check_dim(circuit.n_qubits())?;
    let mut psi = psi0.amplitudes().to_vec();
    let mut acc = vec![C::zero(); psi.len()];
    let mut k = 0;
    for (l, layer) in circuit.layers().iter().enumerate() {
        circuit.apply_layer(l, &mut psi);
        circuit.apply_layer(l, &mut acc);
        for site in &layer.noise {
            let a = angles[k];
            k += 1;
            if a == T::zero() {
                continue;
            }
            let qpsi = site.operator().apply(&psi);
            let m = inner(&psi, &qpsi).re;
            for ((w, q), p) in acc.iter_mut().zip(&qpsi).zip(&psi) {
                *w += (q - p.scale(m)).scale(a);
            }
        }
    }
    Ok((psi, acc))
}

/// Leading-order fragility `Σ_{s,s'} cov(Q_s(t_s), Q_{s'}(t_{s'})) δθ_s δθ_{s'}`.
pub fn fragility_perturbative<T: Real>(
    circuit: &Circuit<T>,
    psi0: &StateVector<T>,
    realization: &NoiseRealization<T>,
) -> Result<FragilityReport<T>> {
    let (_, w) = first_order_displacement(circuit, psi0, realization)?;
    Ok(FragilityReport::new(Method::Perturbative, norm_sqr(&w)).with_warnings(angle_warnings(realization)))
}

/// Forward-propagated site vector `|φ_s⟩ = U_{l+1:D} Q_s |ψ_l⟩` and mean `m_s = ⟨ψ_l|Q_s|ψ_l⟩`.
#[derive(Clone, Debug)]
pub struct SiteVector<T: Real> {
    pub site: SiteId,
    pub phi: Vec<C<T>>,
    pub mean: T,
}

/// One propagated vector per noise site.
pub fn site_vectors<T: Real>(circuit: &Circuit<T>, psi0: &StateVector<T>) -> Result<Vec<SiteVector<T>>> {
    let traj = circuit.simulate_trajectory(psi0)?;
    let mut out = Vec::with_capacity(circuit.noise_site_count());
    for (id, site) in circuit.sites() {
        let psi = traj[id.layer + 1].amplitudes();
        let mut phi = site.operator().apply(psi);
        let mean = inner(psi, &phi).re;
        for l in id.layer + 1..circuit.depth() {
            circuit.apply_layer(l, &mut phi);
        }
        out.push(SiteVector { site: id, phi, mean });
    }
    Ok(out)
}

/// Covariance matrix `cov_{ψ_0}(Q_s(t_s), Q_{s'}(t_{s'})) = Re⟨φ_s|φ_{s'}⟩ - m_s m_{s'}` over all sites.
pub fn site_covariance_matrix<T: Real>(circuit: &Circuit<T>, psi0: &StateVector<T>) -> Result<Vec<Vec<T>>> {
    let v = site_vectors(circuit, psi0)?;
    Ok(v.iter()
        .map(|a| v.iter().map(|b| inner(&a.phi, &b.phi).re - a.mean * b.mean).collect())
        .collect())
}

/// Noise-averaged fragility `Σ_{lq} σ_{lq}² var_{ψ_l}(Q_l^q)` with per-site contributions.
pub fn fragility_avg<T: Real>(circuit: &Circuit<T>, psi0: &StateVector<T>) -> Result<FragilityReport<T>> {
    let traj = circuit.simulate_trajectory(psi0)?;
    let mut contributions = Vec::with_capacity(circuit.noise_site_count());
    let mut total = T::zero();
    for (id, site) in circuit.sites() {
        let sigma_sq = site.distribution().variance();
        let variance = traj[id.layer + 1].variance(site.operator())?;
        total += sigma_sq * variance;
        contributions.push(SiteContribution { site: id, sigma_sq, variance });
    }
    let mut r = FragilityReport::new(Method::Averaged, total);
    r.contributions = contributions;
    Ok(r)
}

/// Leading-order incoherent overlap `tr(ρ_D |ψ_D⟩⟨ψ_D|) ≈ 1 - ℱ̄`.
pub fn overlap_incoherent<T: Real>(circuit: &Circuit<T>, psi0: &StateVector<T>) -> Result<FragilityReport<T>> {
    let avg = fragility_avg(circuit, psi0)?;
    let mut r = FragilityReport::new(Method::Overlap, T::one() - avg.value);
    r.contributions = avg.contributions;
    Ok(r)
}

/// Statistic averaged by [`fragility_mc_average`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistic {
    /// `2(1 - |⟨ψ_D|δψ_D⟩|)`.
    Bures,
    /// `|⟨ψ_D|δψ_D⟩|²`.
    Overlap,
}

/// Mean ± standard error of a per-realization statistic over `samples` sampled realizations.
/// Samples are evaluated in parallel and reduced in sample-index order.
pub fn fragility_mc_average<T: Real>(
    circuit: &Circuit<T>,
    psi0: &StateVector<T>,
    samples: u64,
    seed: u64,
    statistic: Statistic,
) -> Result<FragilityReport<T>> {
    if samples < 2 {
        return Err(crate::error::Error::InvalidParameter("Monte Carlo needs at least 2 samples".into()));
    }
    let ideal = circuit.final_state(psi0)?;
    let values: Vec<T> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let r = sample_angles(circuit, seed, i);
            let noisy = circuit.simulate_noisy(psi0, &r)?;
            let ov = ideal.overlap_modulus(&noisy)?;
            Ok(match statistic {
                Statistic::Bures => T::lit(2.0) * (T::one() - ov),
                Statistic::Overlap => ov * ov,
            })
        })
        .collect::<Result<Vec<T>>>()?;
    let (mean, stderr) = mean_stderr(&values);
    let mut r = FragilityReport::new(Method::MonteCarlo, mean);
    r.stderr = Some(stderr);
    r.seed = Some(seed);
    r.samples = Some(samples);
    Ok(r)
}
