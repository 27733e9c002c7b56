use rayon::prelude::*;
use serde::Serialize;

use super::{run_from, sigma, step, FlowConfig, FlowError, FlowProblem, FlowState, FlowTrace};
use crate::cmat::CMat;
use crate::lattice_model::{
    curvature, dz, dzbar, lambda_contract, EndoField, HolomorphicTwist, LatticeChart, LatticeError,
};
use crate::numerics::least_squares;

/// Outcome of [`monitor_max_principles`].
#[derive(Clone, Debug, Serialize)]
pub struct MaxPrincipleReport {
    /// Allowed increase of `sup ê` between samples: `1e−8 + Δt·sup ê₀`.
    pub e_tolerance: f64,
    pub worst_e_increase: f64,
    pub e_violations: usize,
    /// Allowed increase of `sup σ(H_t, H_{t+τ})`: `1e−8 + Δt·σ_first`.
    pub sigma_tolerance: f64,
    pub worst_sigma_increase: f64,
    pub sigma_violations: usize,
    pub passed: bool,
}

/// Checks that `sup ê_t` and `sup σ(H_t, H_{t+τ})` (τ the sampling
/// interval) are non-increasing along the trace.
pub fn monitor_max_principles(trace: &FlowTrace) -> MaxPrincipleReport {
    let s = &trace.samples;
    let e0 = s.first().map_or(0.0, |x| x.sup_e);
    let e_tol = 1e-8 + trace.dt * e0;
    let mut worst_e = f64::NEG_INFINITY;
    let mut e_viol = 0;
    for w in s.windows(2) {
        let inc = w[1].sup_e - w[0].sup_e;
        worst_e = worst_e.max(inc);
        if inc > e_tol {
            e_viol += 1;
        }
    }
    // σ steps are comparable only across equal sampling intervals.
    let steps: Vec<(usize, f64)> = s
        .windows(2)
        .filter_map(|w| w[1].sigma_step.map(|v| (w[1].step - w[0].step, v)))
        .collect();
    let tau = steps.first().map(|p| p.0);
    let regular: Vec<f64> = steps.iter().filter(|p| Some(p.0) == tau).map(|p| p.1).collect();
    let sig_tol = 1e-8 + trace.dt * regular.first().copied().unwrap_or(0.0);
    let mut worst_s = f64::NEG_INFINITY;
    let mut s_viol = 0;
    for w in regular.windows(2) {
        let inc = w[1] - w[0];
        worst_s = worst_s.max(inc);
        if inc > sig_tol {
            s_viol += 1;
        }
    }
    MaxPrincipleReport {
        e_tolerance: e_tol,
        worst_e_increase: worst_e,
        e_violations: e_viol,
        sigma_tolerance: sig_tol,
        worst_sigma_increase: worst_s,
        sigma_violations: s_viol,
        passed: e_viol == 0 && s_viol == 0,
    }
}

/// Runs two flows from `h_a` and `h_b` in lock-step and returns
/// `(t, sup σ(H_t, H′_t))` every `monitor_every` steps.
pub fn twin_run(
    problem: &FlowProblem,
    config: &FlowConfig,
    h_a: EndoField,
    h_b: EndoField,
) -> Result<Vec<(f64, f64)>, FlowError> {
    config.validate(&problem.chart)?;
    let mut a = FlowState::initial(problem, h_a)?;
    let mut b = FlowState::initial(problem, h_b)?;
    let sup = |a: &FlowState, b: &FlowState| -> Result<f64, FlowError> {
        Ok(sigma(&a.h, &b.h)?.into_iter().fold(0.0, f64::max))
    };
    let mut out = vec![(0.0, sup(&a, &b)?)];
    let n_steps = (config.t_end / config.dt - 1e-9).ceil() as usize;
    for k in 1..=n_steps {
        a = step(problem, &a, config.dt, config.det_one)?;
        b = step(problem, &b, config.dt, config.det_one)?;
        if k % config.monitor_every == 0 {
            out.push((a.t, sup(&a, &b)?));
        }
    }
    Ok(out)
}

/// Outcome of [`decay_profile`].
#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub t: f64,
    /// Least-squares slope of `log sup_{slice} ê` against `s` over interior
    /// slices; `None` when the profile vanishes.
    pub slope: Option<f64>,
    /// `(s, sup ê)` per interior slice.
    pub profile: Vec<(f64, f64)>,
    /// `B = sup ê₀` used in the comparison.
    pub b: f64,
    /// Interior sites with `ê_t > B e^{t−s}`.
    pub violations: usize,
}

/// Fits the decay of `ê` down the tube and checks `ê_t ≤ B e^{t−s}` at every
/// interior site.
pub fn decay_profile(chart: &LatticeChart, e_hat: &[f64], t: f64, b: f64) -> DecayReport {
    let n = chart.n_slices();
    let profile: Vec<(f64, f64)> = (1..n.saturating_sub(1))
        .map(|i| {
            let sup = chart.slice_sites(i).map(|x| e_hat[x]).fold(0.0, f64::max);
            (i as f64 * chart.axis(0).h, sup)
        })
        .collect();
    let pos: Vec<&(f64, f64)> = profile.iter().filter(|p| p.1 > 0.0).collect();
    let slope = if pos.len() >= 2 {
        let xs: Vec<f64> = pos.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pos.iter().map(|p| p.1.ln()).collect();
        Some(least_squares(&xs, &ys).0)
    } else {
        None
    };
    let violations = (0..chart.len())
        .filter(|&x| !chart.is_boundary(x))
        .filter(|&x| e_hat[x] > b * (t - chart.s_of(x)).exp() * (1.0 + 1e-12))
        .count();
    DecayReport { t, slope, profile, b, violations }
}

/// Per interior site, `|Δ_K h| / [(|F̂_H| + 1)|h| + |∇_K h|²|h⁻¹|]` with
/// `h = K⁻¹H`, `Δ_K = 2iΛ∂̄∂_K` and norms taken with `K`.
pub fn laplacian_bound_ratios(
    chart: &LatticeChart,
    twist: &HolomorphicTwist,
    h: &EndoField,
    k: &EndoField,
) -> Result<Vec<f64>, LatticeError> {
    let r = h.rank();
    let n = chart.complex_dim();
    let kinv = k.map(|m| m.inverse().expect("metric must be invertible"));
    let end = EndoField::from_fn(r, h.len(), |x| kinv[x] * h[x]);
    let a = &twist.a.comps;
    let fhat = lambda_contract(&curvature(chart, h, twist)?);
    let mut lap = EndoField::zeros(r, h.len());
    let mut grad_sq = vec![0.0; h.len()];
    for j in 0..n {
        let dk = dz(chart, k, j);
        let dh = dz(chart, &end, j);
        let dbh = dzbar(chart, &end, j);
        let d_k = EndoField::from_fn(r, h.len(), |x| {
            let b = kinv[x] * dk[x] - kinv[x] * a[j][x].adjoint() * k[x];
            dh[x] + b.commutator(&end[x])
        });
        let dbd = dzbar(chart, &d_k, j);
        lap = EndoField::from_fn(r, h.len(), |x| lap[x] - (dbd[x] + a[j][x].commutator(&d_k[x])).scale(4.0));
        for x in 0..h.len() {
            let dbar = dbh[x] + a[j][x].commutator(&end[x]);
            grad_sq[x] += d_k[x].norm_sq_in(&k[x], &kinv[x]) + dbar.norm_sq_in(&k[x], &kinv[x]);
        }
    }
    Ok((0..h.len())
        .into_par_iter()
        .filter(|&x| !chart.is_boundary(x))
        .map(|x| {
            let norm = |m: &CMat| m.norm_sq_in(&k[x], &kinv[x]).max(0.0).sqrt();
            let hinv = h[x].inverse().expect("metric must be invertible");
            let fnorm = fhat[x].norm_sq_in(&h[x], &hinv).max(0.0).sqrt();
            let inv_end = end[x].inverse().expect("metric must be invertible");
            let rhs = (fnorm + 1.0) * norm(&end[x]) + grad_sq[x] * norm(&inv_end);
            norm(&lap[x]) / rhs
        })
        .collect())
}

/// Outcome of [`laplacian_bound_check`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LaplacianBoundReport {
    pub max_ratio: f64,
    pub constant: f64,
    pub passed: bool,
}

/// The bound `|Δ_K H| ≤ C[(|F̂_H| + 1)|H| + |∇_K H|²|H⁻¹|]` with a constant
/// calibrated beforehand.
pub fn laplacian_bound_check(
    chart: &LatticeChart,
    twist: &HolomorphicTwist,
    h: &EndoField,
    k: &EndoField,
    constant: f64,
) -> Result<LaplacianBoundReport, LatticeError> {
    let max_ratio = laplacian_bound_ratios(chart, twist, h, k)?.into_iter().fold(0.0, f64::max);
    Ok(LaplacianBoundReport { max_ratio, constant, passed: max_ratio <= constant })
}

/// Step-halving check: final metrics at `Δt`, `Δt/2`, `Δt/4`; returns the
/// two successive differences (sup entry) and their ratio, which is 2 for a
/// first-order integrator. `Δt` is shrunk so that `t_end` is a multiple of it.
pub fn richardson_ratio(problem: &FlowProblem, config: &FlowConfig) -> Result<(f64, f64, f64), FlowError> {
    let base = config.t_end / (config.t_end / config.dt).ceil().max(1.0);
    let finals: Vec<EndoField> = [1.0, 0.5, 0.25]
        .iter()
        .map(|f| {
            let mut c = config.clone();
            c.dt = base * f;
            c.monitor_every = usize::MAX / 2;
            c.target = 0.0;
            run_from(problem, &c, problem.h0.clone(), false).map(|t| t.final_state.h)
        })
        .collect::<Result<_, _>>()?;
    let d1 = finals[0].max_abs_diff(&finals[1]);
    let d2 = finals[1].max_abs_diff(&finals[2]);
    Ok((d1, d2, d1 / d2))
}
