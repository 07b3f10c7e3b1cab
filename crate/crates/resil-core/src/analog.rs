//! Time-continuous evolution under `H_t = Σ_i f_i(t/T) H_i`, the analog fragility
//! integral and a stochastic-trajectory oracle.

use crate::error::{Error, Result};
use crate::linalg::{inner, norm_sqr, Eigh, Matrix};
use crate::noise::CounterRng;
use crate::operator::HermitianOperator;
use crate::report::{mean_stderr, FragilityReport, Method};
use crate::scalar::{c, cis, cr, Real, C};
use crate::state::StateVector;
use num_traits::Zero;
use rayon::prelude::*;

/// Registers up to this size are propagated with dense exponentials; larger ones use RK4.
pub const DENSE_EXP_LIMIT: usize = 8;

/// Interpolation of a tabulated ramp.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    /// Piecewise linear between knots.
    Linear,
    /// Piecewise constant: knot value held until the next knot.
    Step,
}

/// Scalar profile on the normalized time `u = t/T ∈ [0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Ramp<T: Real> {
    Constant(T),
    /// `from + (to - from)·u`.
    Linear { from: T, to: T },
    /// Knots `(u_k, v_k)` with increasing `u_k`, the first at 0.
    Table { points: Vec<(T, T)>, interpolation: Interpolation },
}

impl<T: Real> Ramp<T> {
    pub fn constant(v: T) -> Self {
        Ramp::Constant(v)
    }

    pub fn linear(from: T, to: T) -> Self {
        Ramp::Linear { from, to }
    }

    /// Piecewise-constant ramp holding `values[k]` on `[breaks[k], breaks[k+1])` with
    /// `breaks[0] = 0`.
    pub fn steps(breaks: &[T], values: &[T]) -> Result<Self> {
        if breaks.len() != values.len() {
            return Err(Error::InvalidParameter("step ramp needs one value per break".into()));
        }
        let r = Ramp::Table {
            points: breaks.iter().copied().zip(values.iter().copied()).collect(),
            interpolation: Interpolation::Step,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: T| v.is_finite();
        match self {
            Ramp::Constant(v) if finite(*v) => Ok(()),
            Ramp::Linear { from, to } if finite(*from) && finite(*to) => Ok(()),
            Ramp::Table { points, .. } => {
                if points.is_empty() || points[0].0 != T::zero() {
                    return Err(Error::InvalidParameter("ramp table must start at u = 0".into()));
                }
                for w in points.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::InvalidParameter("ramp table knots must increase".into()));
                    }
                }
                if points.iter().any(|(u, v)| !finite(*u) || !finite(*v) || *u > T::one()) {
                    return Err(Error::InvalidParameter("ramp table knots must be finite and within [0, 1]".into()));
                }
                Ok(())
            }
            _ => Err(Error::InvalidParameter("ramp values must be finite".into())),
        }
    }

    /// Value at `u`; inside a step ramp the right-continuous value is used.
    pub fn value(&self, u: T) -> T {
        match self {
            Ramp::Constant(v) => *v,
            Ramp::Linear { from, to } => *from + (*to - *from) * u,
            Ramp::Table { points, interpolation } => {
                let k = points.iter().rposition(|(x, _)| *x <= u).unwrap_or(0);
                match interpolation {
                    Interpolation::Step => points[k].1,
                    Interpolation::Linear => {
                        if k + 1 >= points.len() {
                            points[k].1
                        } else {
                            let (u0, v0) = points[k];
                            let (u1, v1) = points[k + 1];
                            v0 + (v1 - v0) * (u - u0) / (u1 - u0)
                        }
                    }
                }
            }
        }
    }

    /// Value at `u`, or its limit from the left when `left` is set (differs only at the
    /// knots of a step ramp).
    pub fn value_sided(&self, u: T, left: bool) -> T {
        match self {
            Ramp::Table { points, interpolation: Interpolation::Step } if left => {
                let k = points.iter().rposition(|(x, _)| *x < u).unwrap_or(0);
                points[k].1
            }
            _ => self.value(u),
        }
    }

    /// Interior points of `(0, 1)` where the ramp or its slope may jump.
    pub fn breakpoints(&self) -> Vec<T> {
        match self {
            Ramp::Table { points, .. } => {
                points.iter().map(|p| p.0).filter(|u| *u > T::zero() && *u < T::one()).collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn is_piecewise_constant(&self) -> bool {
        matches!(self, Ramp::Constant(_) | Ramp::Table { interpolation: Interpolation::Step, .. })
    }

    /// Smallest value attained on `[0, 1]` (exact for every ramp kind).
    pub fn min_value(&self) -> T {
        match self {
            Ramp::Constant(v) => *v,
            Ramp::Linear { from, to } => from.min(*to),
            Ramp::Table { points, .. } => points.iter().fold(T::infinity(), |m, p| m.min(p.1)),
        }
    }

    fn scaled(&self, a: T) -> Self {
        match self {
            Ramp::Constant(v) => Ramp::Constant(*v * a),
            Ramp::Linear { from, to } => Ramp::Linear { from: *from * a, to: *to * a },
            Ramp::Table { points, interpolation } => Ramp::Table {
                points: points.iter().map(|(u, v)| (*u, *v * a)).collect(),
                interpolation: *interpolation,
            },
        }
    }
}

/// Time-stepping scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    /// Fourth-order commutator-free Magnus step (two exponentials at Gauss points).
    Magnus4,
    /// `exp(-i H(t + dt/2) dt)`.
    Midpoint,
    /// Classical Runge–Kutta with renormalization.
    Rk4,
}

/// Integrator settings. Step counts refer to the whole runtime and double until converged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig<T: Real> {
    pub method: Integrator,
    pub initial_steps: usize,
    pub max_steps: usize,
    /// Relative convergence target of integrated quantities.
    pub tolerance: T,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self { method: Integrator::Magnus4, initial_steps: 128, max_steps: 1 << 19, tolerance: T::lit(1e-7) }
    }
}

/// One term `f(t/T)·H` of a schedule.
#[derive(Clone, Debug)]
pub struct ScheduleTerm<T: Real> {
    pub operator: HermitianOperator<T>,
    pub ramp: Ramp<T>,
}

/// `H_t = Σ_i f_i(t/T) H_i` over `[0, T]`.
#[derive(Clone, Debug)]
pub struct Schedule<T: Real> {
    n_qubits: usize,
    terms: Vec<ScheduleTerm<T>>,
    runtime: T,
    pub integrator: IntegratorConfig<T>,
}

impl<T: Real> Schedule<T> {
    pub fn new(n_qubits: usize, terms: Vec<ScheduleTerm<T>>, runtime: T) -> Result<Self> {
        if !(runtime > T::zero()) || !runtime.is_finite() {
            return Err(Error::InvalidParameter(format!("runtime must be positive, got {runtime}")));
        }
        for t in &terms {
            if t.operator.n_qubits() != n_qubits {
                return Err(Error::DimensionMismatch { expected: n_qubits, found: t.operator.n_qubits() });
            }
            t.ramp.validate()?;
        }
        Ok(Self { n_qubits, terms, runtime, integrator: IntegratorConfig::default() })
    }

    /// Single constant Hamiltonian over `[0, T]`.
    pub fn constant(h: HermitianOperator<T>, runtime: T) -> Result<Self> {
        let n = h.n_qubits();
        Self::new(n, vec![ScheduleTerm { operator: h, ramp: Ramp::Constant(T::one()) }], runtime)
    }

    pub fn with_integrator(mut self, cfg: IntegratorConfig<T>) -> Self {
        self.integrator = cfg;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[ScheduleTerm<T>] {
        &self.terms
    }

    pub fn runtime(&self) -> T {
        self.runtime
    }

    /// The schedule `(a·H, T/a)`.
    pub fn rescaled(&self, a: T) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| ScheduleTerm { operator: t.operator.clone(), ramp: t.ramp.scaled(a) })
            .collect();
        let mut s = Self::new(self.n_qubits, terms, self.runtime / a)?;
        s.integrator = self.integrator;
        Ok(s)
    }

    /// `H(t)` as an operator, at `t = u·T`.
    pub fn hamiltonian_at(&self, u: T) -> Result<HermitianOperator<T>> {
        let mut h = HermitianOperator::zero(self.n_qubits)?;
        for t in &self.terms {
            h = h.add(&t.operator.scaled(t.ramp.value(u)))?;
        }
        Ok(h)
    }
}

/// Noise operator of the continuous model.
#[derive(Clone, Debug)]
pub enum NoiseOperator<T: Real> {
    /// A fixed `Q`.
    Fixed(HermitianOperator<T>),
    /// `Q_t = H_t` (over/under-rotation of the schedule itself).
    Hamiltonian,
    /// `Q_t = Σ_j g_j(t/T) Q_j`.
    TimeDependent(Vec<ScheduleTerm<T>>),
}

/// White-noise perturbation `ξ_t Q_t` with `E[ξ_t ξ_t'] = γ_t δ(t - t')`.
#[derive(Clone, Debug)]
pub struct AnalogNoise<T: Real> {
    pub operator: NoiseOperator<T>,
    pub gamma: Ramp<T>,
}

impl<T: Real> AnalogNoise<T> {
    pub fn new(operator: NoiseOperator<T>, gamma: Ramp<T>) -> Result<Self> {
        gamma.validate()?;
        if gamma.min_value() < T::zero() {
            return Err(Error::InvalidParameter("noise intensity gamma must be ≥ 0".into()));
        }
        if let NoiseOperator::TimeDependent(terms) = &operator {
            for t in terms {
                t.ramp.validate()?;
            }
        }
        Ok(Self { operator, gamma })
    }

    /// Constant-intensity noise with a fixed operator.
    pub fn fixed(q: HermitianOperator<T>, gamma: T) -> Result<Self> {
        Self::new(NoiseOperator::Fixed(q), Ramp::Constant(gamma))
    }

    /// Constant-intensity over-rotation noise `Q_t = H_t`.
    pub fn hamiltonian(gamma: T) -> Result<Self> {
        Self::new(NoiseOperator::Hamiltonian, Ramp::Constant(gamma))
    }

    /// Copy with the intensity multiplied by `s`.
    pub fn scaled_gamma(&self, s: T) -> Self {
        Self { operator: self.operator.clone(), gamma: self.gamma.scaled(s) }
    }
}

/// A sum of ramped operators, with dense matrices cached for small registers.
#[derive(Clone, Debug)]
struct TermSet<T: Real> {
    n_qubits: usize,
    ops: Vec<HermitianOperator<T>>,
    ramps: Vec<Ramp<T>>,
    dense: Option<Vec<Matrix<T>>>,
}

impl<T: Real> TermSet<T> {
    fn new(n_qubits: usize, terms: &[ScheduleTerm<T>]) -> Result<Self> {
        let ops: Vec<_> = terms.iter().map(|t| t.operator.clone()).collect();
        let ramps = terms.iter().map(|t| t.ramp.clone()).collect();
        let dense = if n_qubits <= DENSE_EXP_LIMIT {
            Some(ops.iter().map(|o| o.full_matrix()).collect::<Result<Vec<_>>>()?)
        } else {
            None
        };
        Ok(Self { n_qubits, ops, ramps, dense })
    }

    fn coefficients(&self, u: T) -> Vec<T> {
        self.ramps.iter().map(|r| r.value(u)).collect()
    }

    fn coefficients_sided(&self, u: T, left: bool) -> Vec<T> {
        self.ramps.iter().map(|r| r.value_sided(u, left)).collect()
    }

    fn matrix(&self, coeffs: &[T]) -> Matrix<T> {
        let dense = self.dense.as_ref().expect("dense terms available");
        let mut m = Matrix::zeros(1 << self.n_qubits);
        for (a, t) in coeffs.iter().zip(dense) {
            if *a != T::zero() {
                m.axpy(cr(*a), t);
            }
        }
        m
    }

    fn apply(&self, coeffs: &[T], psi: &[C<T>]) -> Vec<C<T>> {
        let mut out = vec![C::zero(); psi.len()];
        match &self.dense {
            Some(d) => {
                for (a, m) in coeffs.iter().zip(d) {
                    if *a == T::zero() {
                        continue;
                    }
                    let v = m.matvec(psi);
                    for (o, x) in out.iter_mut().zip(v) {
                        *o += x.scale(*a);
                    }
                }
            }
            None => {
                for (a, op) in coeffs.iter().zip(&self.ops) {
                    if *a != T::zero() {
                        op.apply_add(cr(*a), psi, &mut out);
                    }
                }
            }
        }
        out
    }

    fn is_piecewise_constant(&self) -> bool {
        self.ramps.iter().all(|r| r.is_piecewise_constant())
    }
}

/// Time grid (normalized fractions) with composite-Simpson weights in time units.
///
/// Segment boundaries appear twice, once closing the left segment and once opening the
/// right one, so integrands with jumps at breakpoints are sampled from the correct side;
/// `left[k]` marks nodes whose ramps must be evaluated as left limits.
#[derive(Clone, Debug)]
pub struct Grid<T: Real> {
    pub u: Vec<T>,
    pub weights: Vec<T>,
    pub left: Vec<bool>,
}

impl<T: Real> Grid<T> {
    /// `(u, left)` for every node.
    pub fn nodes(&self) -> impl Iterator<Item = (T, bool)> + '_ {
        self.u.iter().copied().zip(self.left.iter().copied())
    }
}

/// Splits `[0, 1]` at `breaks` and gives each segment an even number of intervals
/// (≈ `steps` in total), so every segment is integrated by its own Simpson rule.
pub fn build_grid<T: Real>(breaks: &[T], steps: usize, runtime: T) -> Grid<T> {
    let mut cuts: Vec<T> = breaks.iter().copied().filter(|u| *u > T::zero() && *u < T::one()).collect();
    cuts.push(T::zero());
    cuts.push(T::one());
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    cuts.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon());
    let mut u = Vec::new();
    let mut weights = Vec::new();
    let mut left = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        let raw = (len * T::from_count(steps)).ceil().to_usize().unwrap_or(2).max(2);
        let m = raw + raw % 2;
        let h = len / T::from_count(m);
        let hw = h * runtime / T::lit(3.0);
        for k in 0..=m {
            let x = if k == m { b } else { a + h * T::from_count(k) };
            u.push(x);
            let f = if k == 0 || k == m { T::one() } else if k % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
            weights.push(hw * f);
            left.push(k == m);
        }
    }
    Grid { u, weights, left }
}

/// States of an evolution sampled on a grid.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub runtime: T,
    pub grid: Grid<T>,
    pub states: Vec<Vec<C<T>>>,
}

impl<T: Real> Trajectory<T> {
    /// Sample times `t_k = u_k T`.
    pub fn times(&self) -> Vec<T> {
        self.grid.u.iter().map(|u| *u * self.runtime).collect()
    }

    /// Composite-Simpson integral of per-sample values.
    pub fn integrate(&self, values: &[T]) -> T {
        self.grid.weights.iter().zip(values).map(|(w, v)| *w * *v).sum()
    }

    pub fn final_state(&self) -> &[C<T>] {
        self.states.last().expect("non-empty trajectory")
    }

    pub fn state(&self, k: usize, n_qubits: usize) -> StateVector<T> {
        StateVector::from_raw(n_qubits, self.states[k].clone())
    }
}

/// Precomputed propagation machinery for a schedule.
struct Dynamics<'a, T: Real> {
    schedule: &'a Schedule<T>,
    h: TermSet<T>,
    method: Integrator,
}

impl<'a, T: Real> Dynamics<'a, T> {
    fn new(schedule: &'a Schedule<T>) -> Result<Self> {
        let h = TermSet::new(schedule.n_qubits, &schedule.terms)?;
        let method = if h.dense.is_none() { Integrator::Rk4 } else { schedule.integrator.method };
        Ok(Self { schedule, h, method })
    }

    /// Step unitary from `ua` to `ub` for the dense schemes.
    fn step_matrix(&self, ua: T, ub: T) -> Matrix<T> {
        let du = ub - ua;
        let dt = du * self.schedule.runtime;
        match self.method {
            Integrator::Midpoint | Integrator::Rk4 => {
                let h = self.h.matrix(&self.h.coefficients(ua + du * T::lit(0.5)));
                h.eigh().exp_minus_i(dt)
            }
            Integrator::Magnus4 => {
                let s3 = T::lit(3.0).sqrt();
                let half = T::lit(0.5);
                let c1 = half - s3 / T::lit(6.0);
                let c2 = half + s3 / T::lit(6.0);
                let a1 = (T::lit(3.0) - s3 * T::lit(2.0)) / T::lit(12.0);
                let a2 = (T::lit(3.0) + s3 * T::lit(2.0)) / T::lit(12.0);
                let f1 = self.h.coefficients(ua + du * c1);
                let f2 = self.h.coefficients(ua + du * c2);
                if f1 == f2 {
                    return self.h.matrix(&f1).eigh().exp_minus_i(dt);
                }
                let first: Vec<T> = f1.iter().zip(&f2).map(|(x, y)| a2 * *x + a1 * *y).collect();
                let second: Vec<T> = f1.iter().zip(&f2).map(|(x, y)| a1 * *x + a2 * *y).collect();
                let u1 = self.h.matrix(&first).eigh().exp_minus_i(dt);
                let u2 = self.h.matrix(&second).eigh().exp_minus_i(dt);
                u2.matmul(&u1)
            }
        }
    }

    fn rk4_step(&self, ua: T, ub: T, psi: &mut Vec<C<T>>) {
        let dt = (ub - ua) * self.schedule.runtime;
        let mi = c(T::zero(), -T::one());
        let deriv = |u: T, v: &[C<T>]| -> Vec<C<T>> {
            self.h.apply(&self.h.coefficients(u), v).into_iter().map(|x| x * mi).collect()
        };
        let half = T::lit(0.5);
        let um = ua + (ub - ua) * half;
        let add = |a: &[C<T>], b: &[C<T>], s: T| -> Vec<C<T>> {
            a.iter().zip(b).map(|(x, y)| x + y.scale(s)).collect()
        };
        let k1 = deriv(ua, psi);
        let k2 = deriv(um, &add(psi, &k1, dt * half));
        let k3 = deriv(um, &add(psi, &k2, dt * half));
        let k4 = deriv(ub, &add(psi, &k3, dt));
        let s = dt / T::lit(6.0);
        for i in 0..psi.len() {
            psi[i] += (k1[i] + k2[i].scale(T::lit(2.0)) + k3[i].scale(T::lit(2.0)) + k4[i]).scale(s);
        }
        let nrm = norm_sqr(psi).sqrt();
        psi.iter_mut().for_each(|x| *x = x.scale(T::one() / nrm));
    }

    /// Evolves `psi0` across the grid, returning the state at every grid point.
    fn evolve(&self, grid: &Grid<T>, psi0: &[C<T>]) -> Vec<Vec<C<T>>> {
        let mut states = Vec::with_capacity(grid.u.len());
        let mut psi = psi0.to_vec();
        states.push(psi.clone());
        let cacheable = self.h.is_piecewise_constant();
        let mut cache: Option<(Vec<T>, T, Matrix<T>)> = None;
        for w in grid.u.windows(2) {
            let (ua, ub) = (w[0], w[1]);
            if ub == ua {
                // Duplicated breakpoint node.
            } else if self.method == Integrator::Rk4 {
                self.rk4_step(ua, ub, &mut psi);
            } else {
                let du = ub - ua;
                let key = self.h.coefficients(ua + du * T::lit(0.5));
                let reuse = cacheable
                    && matches!(&cache, Some((k, d, _)) if *k == key && (*d - du).abs() <= T::epsilon() * T::lit(4.0));
                if !reuse {
                    cache = Some((key, du, self.step_matrix(ua, ub)));
                }
                let m = &cache.as_ref().expect("step matrix cached").2;
                psi = m.matvec(&psi);
            }
            states.push(psi.clone());
        }
        states
    }

    /// `U(t_k, T)† v` for every grid point `k`, starting from `v` at the final time.
    fn back_propagate(&self, grid: &Grid<T>, v: &[C<T>]) -> Vec<Vec<C<T>>> {
        let n = grid.u.len();
        let mut out = vec![Vec::new(); n];
        let mut cur = v.to_vec();
        out[n - 1] = cur.clone();
        for k in (0..n - 1).rev() {
            let (ua, ub) = (grid.u[k], grid.u[k + 1]);
            if ub == ua {
                // Duplicated breakpoint node.
            } else if self.method == Integrator::Rk4 {
                // Integrate backwards in time.
                let mut tmp = cur.clone();
                let rev = Dynamics { schedule: self.schedule, h: self.h.clone(), method: Integrator::Rk4 };
                rev.rk4_step(ub, ua, &mut tmp);
                cur = tmp;
            } else {
                cur = self.step_matrix(ua, ub).adjoint().matvec(&cur);
            }
            out[k] = cur.clone();
        }
        out
    }
}

fn check_state<T: Real>(schedule: &Schedule<T>, psi0: &StateVector<T>) -> Result<()> {
    if psi0.n_qubits() != schedule.n_qubits {
        return Err(Error::DimensionMismatch { expected: schedule.n_qubits, found: psi0.n_qubits() });
    }
    Ok(())
}

fn schedule_breaks<T: Real>(schedule: &Schedule<T>, noise: Option<&AnalogNoise<T>>) -> Vec<T> {
    let mut b: Vec<T> = schedule.terms.iter().flat_map(|t| t.ramp.breakpoints()).collect();
    if let Some(n) = noise {
        b.extend(n.gamma.breakpoints());
        if let NoiseOperator::TimeDependent(terms) = &n.operator {
            b.extend(terms.iter().flat_map(|t| t.ramp.breakpoints()));
        }
    }
    b
}

/// Evolves on a grid of about `steps` intervals.
pub fn evolve_with_steps<T: Real>(
    schedule: &Schedule<T>,
    psi0: &StateVector<T>,
    breaks: &[T],
    steps: usize,
) -> Result<Trajectory<T>> {
    check_state(schedule, psi0)?;
    let dyn_ = Dynamics::new(schedule)?;
    let grid = build_grid(breaks, steps, schedule.runtime);
    let states = dyn_.evolve(&grid, psi0.amplitudes());
    let drift = (norm_sqr(states.last().expect("grid has points")).sqrt() - T::one()).abs();
    if drift > T::lit(1e-8).max(T::tiny() * T::lit(1e3)) {
        return Err(Error::Numerical(format!("norm drift {drift} exceeds 1e-8")));
    }
    Ok(Trajectory { runtime: schedule.runtime, grid, states })
}

/// Doubles the step count until every quantity returned by `eval` changes by less than
/// its relative tolerance (with an absolute floor), returning the final trajectory and values.
pub fn converge<T: Real, F>(
    schedule: &Schedule<T>,
    psi0: &StateVector<T>,
    breaks: &[T],
    tolerances: &[T],
    mut eval: F,
) -> Result<(Trajectory<T>, Vec<T>)>
where
    F: FnMut(&Trajectory<T>) -> Result<Vec<T>>,
{
    let cfg = schedule.integrator;
    let mut steps = cfg.initial_steps.max(2);
    let mut prev: Option<Vec<T>> = None;
    let floor = T::tiny() * T::lit(10.0);
    loop {
        let traj = evolve_with_steps(schedule, psi0, breaks, steps)?;
        let vals = eval(&traj)?;
        if let Some(p) = &prev {
            let ok = vals.iter().zip(p).zip(tolerances).all(|((v, q), tol)| {
                (*v - *q).abs() <= *tol * v.abs().max(q.abs()) + floor
            });
            if ok {
                return Ok((traj, vals));
            }
        }
        if steps * 2 > cfg.max_steps {
            return Err(Error::Numerical(format!(
                "quadrature did not converge within {} steps",
                cfg.max_steps
            )));
        }
        prev = Some(vals);
        steps *= 2;
    }
}

/// Ideal evolution, with the grid refined until the final state is stable to `1e-9`.
pub fn evolve_schedule<T: Real>(schedule: &Schedule<T>, psi0: &StateVector<T>) -> Result<Trajectory<T>> {
    let breaks = schedule_breaks(schedule, None);
    let mut prev: Option<Vec<C<T>>> = None;
    let mut steps = schedule.integrator.initial_steps.max(2);
    let target = T::lit(1e-9).max(T::tiny() * T::lit(100.0));
    loop {
        let traj = evolve_with_steps(schedule, psi0, &breaks, steps)?;
        if let Some(p) = &prev {
            let diff: T = p.iter().zip(traj.final_state()).map(|(a, b)| (a - b).norm_sqr()).sum::<T>().sqrt();
            if diff <= target {
                return Ok(traj);
            }
        }
        if steps * 2 > schedule.integrator.max_steps {
            return Err(Error::Numerical("evolution did not converge".into()));
        }
        prev = Some(traj.final_state().to_vec());
        steps *= 2;
    }
}

/// Per-grid-point noise data: `γ(u_k)` and `Q(u_k)|ψ_k⟩`.
pub(crate) struct NoiseSampler<T: Real> {
    gamma: Ramp<T>,
    q: QSource<T>,
}

enum QSource<T: Real> {
    Fixed(HermitianOperator<T>),
    Terms(TermSet<T>),
}

impl<T: Real> NoiseSampler<T> {
    pub(crate) fn new(schedule: &Schedule<T>, noise: &AnalogNoise<T>) -> Result<Self> {
        let q = match &noise.operator {
            NoiseOperator::Fixed(op) => {
                if op.n_qubits() != schedule.n_qubits {
                    return Err(Error::DimensionMismatch { expected: schedule.n_qubits, found: op.n_qubits() });
                }
                QSource::Fixed(op.clone())
            }
            NoiseOperator::Hamiltonian => QSource::Terms(TermSet::new(schedule.n_qubits, &schedule.terms)?),
            NoiseOperator::TimeDependent(terms) => {
                for t in terms {
                    if t.operator.n_qubits() != schedule.n_qubits {
                        return Err(Error::DimensionMismatch { expected: schedule.n_qubits, found: t.operator.n_qubits() });
                    }
                }
                QSource::Terms(TermSet::new(schedule.n_qubits, terms)?)
            }
        };
        Ok(Self { gamma: noise.gamma.clone(), q })
    }

    pub(crate) fn gamma(&self, u: T, left: bool) -> T {
        self.gamma.value_sided(u, left)
    }

    pub(crate) fn apply_q(&self, u: T, left: bool, psi: &[C<T>]) -> Vec<C<T>> {
        match &self.q {
            QSource::Fixed(op) => op.apply(psi),
            QSource::Terms(ts) => ts.apply(&ts.coefficients_sided(u, left), psi),
        }
    }

    /// `var_ψ(Q(u)) = ‖(Q - ⟨Q⟩)ψ‖²`, exactly zero on eigenstates.
    pub(crate) fn variance(&self, u: T, left: bool, psi: &[C<T>]) -> T {
        let qpsi = self.apply_q(u, left, psi);
        // Normalizing by ‖ψ‖² keeps eigenstates at exactly zero despite integrator norm drift.
        let n = norm_sqr(psi);
        let m = inner(psi, &qpsi).re / n;
        qpsi.iter().zip(psi).map(|(q, p)| (q - p.scale(m)).norm_sqr()).sum::<T>() / n
    }

    /// Hermitian matrix of `Q(u)` (dense registers only).
    fn matrix(&self, u: T) -> Result<Matrix<T>> {
        match &self.q {
            QSource::Fixed(op) => op.full_matrix(),
            QSource::Terms(ts) => Ok(ts.matrix(&ts.coefficients(u))),
        }
    }

    fn is_fixed(&self) -> bool {
        matches!(self.q, QSource::Fixed(_))
    }
}

/// `∫₀ᵀ γ_t var_{ψ_t}(Q_t) dt`, refined until successive estimates agree to the schedule tolerance.
pub fn fragility_analog<T: Real>(
    schedule: &Schedule<T>,
    noise: &AnalogNoise<T>,
    psi0: &StateVector<T>,
) -> Result<FragilityReport<T>> {
    let sampler = NoiseSampler::new(schedule, noise)?;
    let breaks = schedule_breaks(schedule, Some(noise));
    let tol = schedule.integrator.tolerance;
    let (_, vals) = converge(schedule, psi0, &breaks, &[tol], |traj| {
        let f: Vec<T> = traj
            .grid
            .nodes()
            .zip(&traj.states)
            .map(|((u, left), psi)| sampler.gamma(u, left) * sampler.variance(u, left, psi))
            .collect();
        Ok(vec![traj.integrate(&f)])
    })?;
    Ok(FragilityReport::new(Method::Analog, vals[0]))
}

/// Grid quantities needed by the analog tradeoff: `(∫γ var, ∫√var, min γ)` on one grid.
pub(crate) fn analog_tradeoff_terms<T: Real>(
    schedule: &Schedule<T>,
    noise: &AnalogNoise<T>,
    psi0: &StateVector<T>,
) -> Result<(T, T, T)> {
    let sampler = NoiseSampler::new(schedule, noise)?;
    let breaks = schedule_breaks(schedule, Some(noise));
    let tol = schedule.integrator.tolerance;
    let mut min_gamma = T::infinity();
    let (traj, vals) = converge(schedule, psi0, &breaks, &[tol, tol.max(T::lit(1e-7))], |traj| {
        let var: Vec<T> = traj.grid.nodes().zip(&traj.states).map(|((u, l), p)| sampler.variance(u, l, p)).collect();
        let f: Vec<T> = traj.grid.nodes().zip(&var).map(|((u, l), v)| sampler.gamma(u, l) * *v).collect();
        let l: Vec<T> = var.iter().map(|v| v.sqrt()).collect();
        Ok(vec![traj.integrate(&f), traj.integrate(&l)])
    })?;
    for (u, l) in traj.grid.nodes() {
        min_gamma = min_gamma.min(sampler.gamma(u, l));
    }
    Ok((vals[0], vals[1], min_gamma))
}

/// `∫₀ᵀ √var_{ψ_t}(Q_t) dt` for the given noise operator (tolerance `1e-7` relative).
pub(crate) fn continuous_path_length<T: Real>(
    schedule: &Schedule<T>,
    q: &NoiseOperator<T>,
    psi0: &StateVector<T>,
) -> Result<T> {
    let noise = AnalogNoise::new(q.clone(), Ramp::Constant(T::one()))?;
    let sampler = NoiseSampler::new(schedule, &noise)?;
    let breaks = schedule_breaks(schedule, Some(&noise));
    let tol = schedule.integrator.tolerance.max(T::lit(1e-7));
    let (_, vals) = converge(schedule, psi0, &breaks, &[tol], |traj| {
        let l: Vec<T> =
            traj.grid.nodes().zip(&traj.states).map(|((u, l), p)| sampler.variance(u, l, p).sqrt()).collect();
        Ok(vec![traj.integrate(&l)])
    })?;
    Ok(vals[0])
}

/// `∫₀ᵀ γ_t |⟨ψ_0|[Q(t), C(T)]|ψ_0⟩|² dt` with all operators in the Heisenberg frame of
/// the ideal evolution, evaluated by co-propagating `C|ψ_T⟩` backwards.
pub fn cost_fragility_analog<T: Real>(
    schedule: &Schedule<T>,
    noise: &AnalogNoise<T>,
    psi0: &StateVector<T>,
    cost: &HermitianOperator<T>,
) -> Result<FragilityReport<T>> {
    if cost.n_qubits() != schedule.n_qubits {
        return Err(Error::DimensionMismatch { expected: schedule.n_qubits, found: cost.n_qubits() });
    }
    let sampler = NoiseSampler::new(schedule, noise)?;
    let breaks = schedule_breaks(schedule, Some(noise));
    let dyn_ = Dynamics::new(schedule)?;
    let tol = schedule.integrator.tolerance;
    let (_, vals) = converge(schedule, psi0, &breaks, &[tol], |traj| {
        let chi = cost.apply(traj.final_state());
        let back = dyn_.back_propagate(&traj.grid, &chi);
        let f: Vec<T> = traj
            .grid
            .nodes()
            .zip(&traj.states)
            .zip(&back)
            .map(|(((u, left), psi), ct)| {
                let qpsi = sampler.apply_q(u, left, psi);
                let im = inner(&qpsi, ct).im;
                sampler.gamma(u, left) * T::lit(4.0) * im * im
            })
            .collect();
        Ok(vec![traj.integrate(&f)])
    })?;
    Ok(FragilityReport::new(Method::CostAnalog, vals[0]))
}

/// Options of [`trajectory_mc`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrajectoryOptions {
    /// Approximate number of time steps over the runtime.
    pub steps: usize,
    /// Re-run with half the step size and fail if the mean moves by more than one standard error.
    pub stability_check: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self { steps: 400, stability_check: false }
    }
}

/// Per-step data shared by every stochastic trajectory.
struct StochasticStep<T: Real> {
    half: Matrix<T>,
    q_eig: Eigh<T>,
    q_vecs_adj: Matrix<T>,
    scale: T,
}

fn stochastic_steps<T: Real>(
    schedule: &Schedule<T>,
    sampler: &NoiseSampler<T>,
    grid: &Grid<T>,
) -> Result<Vec<StochasticStep<T>>> {
    let h = TermSet::new(schedule.n_qubits, &schedule.terms)?;
    let fixed_eig = if sampler.is_fixed() { Some(sampler.matrix(T::zero())?.eigh()) } else { None };
    let mut steps = Vec::with_capacity(grid.u.len() - 1);
    for w in grid.u.windows(2) {
        let (ua, ub) = (w[0], w[1]);
        if ub == ua {
            continue;
        }
        let um = (ua + ub) * T::lit(0.5);
        let dt = (ub - ua) * schedule.runtime;
        let half = h.matrix(&h.coefficients(um)).eigh().exp_minus_i(dt * T::lit(0.5));
        let q_eig = match &fixed_eig {
            Some(e) => e.clone(),
            None => sampler.matrix(um)?.eigh(),
        };
        let q_vecs_adj = q_eig.vectors.adjoint();
        let scale = (sampler.gamma(um, false) * dt).sqrt();
        steps.push(StochasticStep { half, q_eig, q_vecs_adj, scale });
    }
    Ok(steps)
}

fn run_trajectories<T: Real>(
    steps: &[StochasticStep<T>],
    psi0: &[C<T>],
    samples: u64,
    seed: u64,
    combine: usize,
) -> Vec<T> {
    // Ideal evolution with the same splitting (noise increments zero).
    let mut ideal = psi0.to_vec();
    for s in steps {
        ideal = s.half.matvec(&s.half.matvec(&ideal));
    }
    let inv = T::one() / T::from_count(combine).sqrt();
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = CounterRng::new(seed, i);
            let mut psi = psi0.to_vec();
            let mut kicked = false;
            for (k, s) in steps.iter().enumerate() {
                psi = s.half.matvec(&psi);
                if s.scale > T::zero() {
                    kicked = true;
                    let xi = (0..combine).map(|j| rng.normal((k * combine + j) as u64)).sum::<f64>();
                    let amp = s.scale * T::lit(xi) * inv;
                    let mut y = s.q_vecs_adj.matvec(&psi);
                    for (yj, l) in y.iter_mut().zip(&s.q_eig.values) {
                        *yj *= cis(-amp * *l);
                    }
                    psi = s.q_eig.vectors.matvec(&y);
                }
                psi = s.half.matvec(&psi);
            }
            if !kicked {
                return T::zero();
            }
            let ov = inner(&ideal, &psi).norm().min(T::one());
            T::lit(2.0) * (T::one() - ov)
        })
        .collect()
}

/// Stochastic-Schrödinger oracle: mean ± stderr of `2(1 - |⟨ψ_T|ψ_T^ξ⟩|)` over trajectories
/// driven by `H_t + ξ_t Q_t`, each step split as `e^{-iH dt/2} e^{-iQ√(γ dt) ξ} e^{-iH dt/2}`.
pub fn trajectory_mc<T: Real>(
    schedule: &Schedule<T>,
    noise: &AnalogNoise<T>,
    psi0: &StateVector<T>,
    samples: u64,
    seed: u64,
    options: TrajectoryOptions,
) -> Result<FragilityReport<T>> {
    check_state(schedule, psi0)?;
    if samples < 2 {
        return Err(Error::InvalidParameter("Monte Carlo needs at least 2 samples".into()));
    }
    if schedule.n_qubits > DENSE_EXP_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "trajectory sampling supports at most {DENSE_EXP_LIMIT} qubits"
        )));
    }
    let sampler = NoiseSampler::new(schedule, noise)?;
    let breaks = schedule_breaks(schedule, Some(noise));
    let coarse = build_grid(&breaks, options.steps.max(2), schedule.runtime);
    let steps = stochastic_steps(schedule, &sampler, &coarse)?;
    // Increments are drawn on the half-step grid and summed, so the stability re-run at
    // half the step size sees the same Brownian path.
    let values = run_trajectories(&steps, psi0.amplitudes(), samples, seed, 2);
    let (mean, stderr) = mean_stderr(&values);
    if options.stability_check {
        let fine_grid = refine(&coarse);
        let fine = stochastic_steps(schedule, &sampler, &fine_grid)?;
        let fv = run_trajectories(&fine, psi0.amplitudes(), samples, seed, 1);
        let (fmean, _) = mean_stderr(&fv);
        if (fmean - mean).abs() > stderr {
            return Err(Error::Numerical(format!(
                "time step too large: halving dt moved the mean from {mean} to {fmean} (stderr {stderr})"
            )));
        }
    }
    let mut r = FragilityReport::new(Method::TrajectoryMc, mean);
    r.stderr = Some(stderr);
    r.seed = Some(seed);
    r.samples = Some(samples);
    Ok(r)
}

/// Splits every interval of a grid in two (weights are not needed for stepping).
fn refine<T: Real>(g: &Grid<T>) -> Grid<T> {
    let mut u = Vec::with_capacity(g.u.len() * 2);
    for w in g.u.windows(2) {
        u.push(w[0]);
        u.push((w[0] + w[1]) * T::lit(0.5));
    }
    u.push(*g.u.last().expect("non-empty grid"));
    let weights = vec![T::zero(); u.len()];
    let left = vec![false; u.len()];
    Grid { u, weights, left }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_weights_sum_to_runtime_and_honor_breaks() {
        let g = build_grid(&[0.3_f64, 0.7], 50, 2.0);
        let total: f64 = g.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        assert!(g.u.iter().any(|u| (*u - 0.3).abs() < 1e-15));
        assert!(g.u.iter().any(|u| (*u - 0.7).abs() < 1e-15));
        assert!(g.weights.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let g = build_grid::<f64>(&[], 10, 1.0);
        let v: Vec<f64> = g.u.iter().map(|u| u * u * u).collect();
        let s: f64 = g.weights.iter().zip(&v).map(|(w, x)| w * x).sum();
        assert!((s - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ramps_evaluate() {
        let l = Ramp::linear(0.0_f64, 1.0);
        assert_eq!(l.value(0.25), 0.25);
        let s = Ramp::steps(&[0.0_f64, 0.5], &[1.0, 3.0]).unwrap();
        assert_eq!(s.value(0.49), 1.0);
        assert_eq!(s.value(0.5), 3.0);
        assert_eq!(s.breakpoints(), vec![0.5]);
        assert_eq!(s.min_value(), 1.0);
        assert!(Ramp::steps(&[0.1_f64], &[1.0]).is_err());
    }
}
