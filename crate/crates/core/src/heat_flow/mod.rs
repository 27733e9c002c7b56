//! Hermitian Yang–Mills heat flow `H⁻¹∂_tH = −2iF̂` with Dirichlet slices.
//!
//! The update is multiplicative, `H ← H^{1/2} exp(S) H^{1/2}` with the
//! Hermitian exponent `S = −2iΔt H^{1/2}F̂H^{−1/2}`, which equals
//! `H exp(−2iF̂Δt)` and keeps `H` positive definite exactly. Both `s`-end
//! slices are pinned to `H₀`. The operator `F̂` is the gradient-defined
//! [`LatticeFunctional::fhat`], so the flow is the downward gradient flow of
//! the lattice Donaldson functional.

mod monitors;

pub use monitors::{
    decay_profile, laplacian_bound_check, laplacian_bound_ratios, monitor_max_principles, richardson_ratio,
    twin_run, DecayReport, LaplacianBoundReport, MaxPrincipleReport,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmat::{CMat, C64};
use crate::donaldson::LatticeFunctional;
use crate::lattice_model::{
    curvature, curvature_norm_sq, lambda_contract, EndoField, HolomorphicTwist, LatticeChart, LatticeError,
};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("time step {dt} exceeds the stability limit; use Δt ≤ {suggested}")]
    Cfl { dt: f64, suggested: f64 },
    #[error("non-finite metric at site {site} (t = {t})")]
    NonFinite { site: usize, t: f64 },
    #[error("sup ê grew from {initial} to {current} at t = {t}; time step or model is unstable")]
    Diverged { initial: f64, current: f64, t: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Flow parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Fraction of the explicit stability limit that `dt` may use, in `(0, 1]`.
    pub cfl_safety: f64,
    /// Project the update exponent to trace zero (keeps `det H` fixed).
    pub det_one: bool,
    /// Record a trace sample every this many steps.
    pub monitor_every: usize,
    /// Stop once `sup ê` falls below this.
    pub target: f64,
    /// Abort when `sup ê` exceeds this multiple of its initial value.
    pub divergence_factor: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            dt: 1e-3,
            t_end: 1.0,
            cfl_safety: 0.9,
            det_one: false,
            monitor_every: 10,
            target: 1e-10,
            divergence_factor: 10.0,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self, chart: &LatticeChart) -> Result<(), FlowError> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(FlowError::Config(format!("cfl_safety = {} not in (0, 1]", self.cfl_safety)));
        }
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) || self.monitor_every == 0 {
            return Err(FlowError::Config("need dt > 0, t_end ≥ 0, monitor_every ≥ 1".into()));
        }
        let limit = self.cfl_safety * chart.cfl_limit();
        if self.dt > limit {
            return Err(FlowError::Cfl { dt: self.dt, suggested: limit });
        }
        Ok(())
    }
}

/// Geometry, holomorphic structure and reference metric of one flow.
#[derive(Clone, Debug)]
pub struct FlowProblem {
    pub chart: LatticeChart,
    pub twist: HolomorphicTwist,
    pub h0: EndoField,
    pub functional: LatticeFunctional,
    /// `|ΛF_{H₀}|²` from the finite-difference curvature, used on the
    /// Dirichlet slices at `t = 0`.
    boundary_e0: Vec<f64>,
}

impl FlowProblem {
    pub fn new(chart: LatticeChart, twist: HolomorphicTwist, h0: EndoField) -> Result<Self, FlowError> {
        h0.check_len(&chart)?;
        h0.validate_metric()?;
        let functional = LatticeFunctional::new(&chart, &h0, &twist)?;
        let fhat0 = lambda_contract(&curvature(&chart, &h0, &twist)?);
        let boundary_e0 = (0..chart.len())
            .map(|x| {
                if chart.is_boundary(x) {
                    fhat0[x].norm_sq_in(&h0[x], &h0[x].inverse().expect("validated"))
                } else {
                    0.0
                }
            })
            .collect();
        Ok(FlowProblem { chart, twist, h0, functional, boundary_e0 })
    }

    /// `F̂` on interior sites, zero on Dirichlet slices.
    pub fn fhat(&self, h: &EndoField) -> Result<EndoField, FlowError> {
        let mut f = self.functional.fhat(h)?;
        for x in 0..self.chart.len() {
            if self.chart.is_boundary(x) {
                f[x] = CMat::zeros(h.rank());
            }
        }
        Ok(f)
    }
}

/// Current metric with cached `F̂` and `ê = |F̂|²_H`.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub h: EndoField,
    pub t: f64,
    pub fhat: EndoField,
    pub e_hat: Vec<f64>,
}

fn e_hat_of(h: &EndoField, f: &EndoField) -> Vec<f64> {
    (0..h.len())
        .into_par_iter()
        .map(|x| f[x].norm_sq_in(&h[x], &h[x].inverse().expect("metric must be invertible")))
        .collect()
}

impl FlowState {
    /// State at `t = 0` from initial data `h` (which must agree with `H₀` on
    /// the Dirichlet slices). On those slices `ê` is taken from the
    /// finite-difference curvature of `H₀`; for `t > 0` it is zero there,
    /// since the metric is stationary.
    pub fn initial(problem: &FlowProblem, h: EndoField) -> Result<Self, FlowError> {
        h.validate_metric()?;
        let fhat = problem.fhat(&h)?;
        let mut e_hat = e_hat_of(&h, &fhat);
        for (x, e) in e_hat.iter_mut().enumerate() {
            if problem.chart.is_boundary(x) {
                *e = problem.boundary_e0[x];
            }
        }
        Ok(FlowState { h, t: 0.0, fhat, e_hat })
    }

    pub fn sup_e(&self) -> f64 {
        self.e_hat.iter().copied().fold(0.0, f64::max)
    }
}

/// One exponential-integrator step.
pub fn step(problem: &FlowProblem, state: &FlowState, dt: f64, det_one: bool) -> Result<FlowState, FlowError> {
    let r = state.h.rank();
    let ch = &problem.chart;
    let h = &state.h;
    let f = &state.fhat;
    let next: Vec<CMat> = (0..h.len())
        .into_par_iter()
        .map(|x| {
            if ch.is_boundary(x) {
                return problem.h0[x];
            }
            let e = h[x].eigh();
            let sq = e.apply(f64::sqrt);
            let isq = e.apply(|v| 1.0 / v.sqrt());
            let mut s = (sq * f[x] * isq).scale_c(C64::new(0.0, -2.0 * dt)).hermitian_part();
            if det_one {
                let tr = s.trace().re / r as f64;
                s -= CMat::identity(r).scale(tr);
            }
            (sq * s.eigh().apply(f64::exp) * sq).hermitian_part()
        })
        .collect();
    let t = state.t + dt;
    if let Some(site) = next.iter().position(|m| !m.is_finite()) {
        return Err(FlowError::NonFinite { site, t });
    }
    let h = EndoField::from_vec(r, next);
    let fhat = problem.fhat(&h)?;
    let e_hat = e_hat_of(&h, &fhat);
    Ok(FlowState { h, t, fhat, e_hat })
}

/// `σ(H,K) = tr(H⁻¹K) + tr(K⁻¹H) − 2r` per site.
pub fn sigma(h: &EndoField, k: &EndoField) -> Result<Vec<f64>, LatticeError> {
    if h.rank() != k.rank() {
        return Err(LatticeError::RankMismatch { expected: h.rank(), found: k.rank() });
    }
    (0..h.len())
        .into_par_iter()
        .map(|x| {
            let hi = h[x].inverse().ok_or(LatticeError::SingularMetric { site: x })?;
            let ki = k[x].inverse().ok_or(LatticeError::SingularMetric { site: x })?;
            Ok(((hi * k[x]).trace() + (ki * h[x]).trace()).re - 2.0 * h.rank() as f64)
        })
        .collect()
}

/// `λ̄ = max(0, largest eigenvalue of log(H₀⁻¹H))` per site, via the
/// congruent matrix `H₀^{−1/2} H H₀^{−1/2}`.
pub fn lambda_bar(h: &EndoField, h0: &EndoField) -> Vec<f64> {
    (0..h.len())
        .into_par_iter()
        .map(|x| {
            let isq = h0[x].eigh().apply(|v| 1.0 / v.sqrt());
            (isq * h[x] * isq).hermitian_part().eigh().max().ln().max(0.0)
        })
        .collect()
}

/// One sample of a [`FlowTrace`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub step: usize,
    /// `sup ê` (interior sites for `t > 0`).
    pub sup_e: f64,
    /// `Σ_x w_x ê_x`.
    pub fhat_l2_sq: f64,
    /// `sup σ(H_t, H₀)`.
    pub sup_sigma: f64,
    /// `sup σ(H_prev, H_t)` against the previous sample, if any.
    pub sigma_step: Option<f64>,
    /// `L_t = sup λ̄`.
    pub l: f64,
    /// `E(t) = Σ_x w_x (|F_{H_t}|² − |F_{H₀}|²)`.
    pub energy: f64,
    /// `𝒩_W(H_t)`.
    pub n_value: f64,
    /// `ℓ_t(s) = sup λ̄` per `s` slice.
    pub lambda_profile: Vec<f64>,
    /// `sup ê` per `s` slice.
    pub e_profile: Vec<f64>,
}

/// Time series of monitors plus the final state.
#[derive(Clone, Debug)]
pub struct FlowTrace {
    pub samples: Vec<TraceSample>,
    pub dt: f64,
    pub converged: bool,
    pub final_state: FlowState,
    /// Metrics at the sample times, when requested.
    pub snapshots: Vec<EndoField>,
}

/// Per-slice suprema of a site field.
pub fn slice_sup(chart: &LatticeChart, v: &[f64]) -> Vec<f64> {
    (0..chart.n_slices())
        .map(|i| chart.slice_sites(i).map(|x| v[x]).fold(0.0, f64::max))
        .collect()
}

fn sample(
    problem: &FlowProblem,
    state: &FlowState,
    step: usize,
    prev: Option<&EndoField>,
    ym0: &[f64],
) -> Result<TraceSample, FlowError> {
    let ch = &problem.chart;
    let sig = sigma(&state.h, &problem.h0)?;
    let lb = lambda_bar(&state.h, &problem.h0);
    let f = curvature(ch, &state.h, &problem.twist)?;
    let ym = curvature_norm_sq(&state.h, &f);
    let energy = (0..ch.len()).map(|x| ch.weight(x) * (ym[x] - ym0[x])).sum();
    let sigma_step = match prev {
        Some(p) => Some(sigma(p, &state.h)?.into_iter().fold(0.0, f64::max)),
        None => None,
    };
    Ok(TraceSample {
        t: state.t,
        step,
        sup_e: state.sup_e(),
        fhat_l2_sq: (0..ch.len()).map(|x| ch.weight(x) * state.e_hat[x]).sum(),
        sup_sigma: sig.iter().copied().fold(0.0, f64::max),
        sigma_step,
        l: lb.iter().copied().fold(0.0, f64::max),
        energy,
        n_value: problem.functional.value(&state.h)?,
        lambda_profile: slice_sup(ch, &lb),
        e_profile: slice_sup(ch, &state.e_hat),
    })
}

/// Integrates from `h_init` (usually `H₀`) to `t_end`, sampling every
/// `monitor_every` steps and at the end. Stops early once `sup ê < target`.
pub fn run_from(
    problem: &FlowProblem,
    config: &FlowConfig,
    h_init: EndoField,
    keep_snapshots: bool,
) -> Result<FlowTrace, FlowError> {
    config.validate(&problem.chart)?;
    let ch = &problem.chart;
    let f0 = curvature(ch, &problem.h0, &problem.twist)?;
    let ym0 = curvature_norm_sq(&problem.h0, &f0);
    let mut state = FlowState::initial(problem, h_init)?;
    let initial = state.sup_e();
    let mut samples = vec![sample(problem, &state, 0, None, &ym0)?];
    let mut snapshots = Vec::new();
    if keep_snapshots {
        snapshots.push(state.h.clone());
    }
    let mut last_sampled = state.h.clone();
    let n_steps = (config.t_end / config.dt - 1e-9).ceil().max(0.0) as usize;
    let mut converged = initial < config.target;
    let mut k = 0;
    while k < n_steps && !converged {
        state = step(problem, &state, config.dt, config.det_one)?;
        k += 1;
        let sup = state.sup_e();
        if sup > config.divergence_factor * initial.max(config.target) {
            return Err(FlowError::Diverged { initial, current: sup, t: state.t });
        }
        converged = sup < config.target;
        if k % config.monitor_every == 0 || k == n_steps || converged {
            samples.push(sample(problem, &state, k, Some(&last_sampled), &ym0)?);
            last_sampled = state.h.clone();
            if keep_snapshots {
                snapshots.push(state.h.clone());
            }
        }
    }
    Ok(FlowTrace { samples, dt: config.dt, converged, final_state: state, snapshots })
}

/// [`run_from`] starting at `H₀`.
pub fn run(problem: &FlowProblem, config: &FlowConfig) -> Result<FlowTrace, FlowError> {
    run_from(problem, config, problem.h0.clone(), false)
}

#[cfg(test)]
mod tests;
