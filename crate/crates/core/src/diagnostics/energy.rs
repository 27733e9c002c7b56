use rayon::prelude::*;
use serde::Serialize;

use super::forms::{chern_weil_density, hodge_riemann, MatTwoForm, MAX_KAHLER_DIM};
use crate::cmat::CMat;
use crate::heat_flow::{FlowProblem, FlowTrace};
use crate::lattice_model::{curvature, curvature_norm_sq, CurvatureField, EndoField, LatticeChart, LatticeError};

/// Integrated Chern–Weil quantities of one curvature field.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct EnergyReport {
    /// `κ = ∫ tr(F²)∧φ` in the orientation of φ.
    pub kappa: f64,
    pub f_plus_sq: f64,
    pub f_minus_sq: f64,
    pub ym: f64,
    /// `E(t)` when the report belongs to a flow snapshot.
    pub energy: Option<f64>,
    /// `|YM − 3‖F⁺‖² − κ| / YM`.
    pub split_residual: f64,
    /// Largest pointwise relative residual of the Hodge–Riemann identity.
    pub hodge_riemann_residual: f64,
    /// `sup |F_{jk̄} − F_{kj̄}†|` in the unitary frame before symmetrisation;
    /// zero for an exactly metric-compatible curvature.
    pub compatibility_defect: f64,
}

impl EnergyReport {
    /// `YM = ‖F⁺‖² + ‖F⁻‖²` relative defect.
    pub fn orthogonality_residual(&self) -> f64 {
        (self.ym - self.f_plus_sq - self.f_minus_sq).abs() / self.ym.max(1e-300)
    }
}

/// Chern–Weil report of lifted curvature samples with quadrature weights.
/// Each sample is `n×n` row-major `F_{jk̄}` in a unitary frame.
pub fn chern_weil_report(n: usize, samples: &[(Vec<CMat>, f64)]) -> EnergyReport {
    let rank = samples.first().map_or(1, |s| s.0.first().map_or(1, |m| m.dim()));
    let parts: Vec<(EnergyReport, f64)> = samples
        .par_iter()
        .map(|(f, w)| {
            let lifted = MatTwoForm::from_kahler(n, rank, f, true);
            let d = chern_weil_density(&lifted);
            let hr = if n >= 2 {
                hodge_riemann(n, &MatTwoForm::from_kahler(n, rank, f, false)).relative_residual()
            } else {
                0.0
            };
            let rep = EnergyReport {
                kappa: w * d.kappa,
                f_plus_sq: w * d.f_plus_sq,
                f_minus_sq: w * d.f_minus_sq,
                ym: w * d.ym,
                ..EnergyReport::default()
            };
            (rep, hr)
        })
        .collect();
    let mut out = EnergyReport::default();
    for (p, hr) in parts {
        out.kappa += p.kappa;
        out.f_plus_sq += p.f_plus_sq;
        out.f_minus_sq += p.f_minus_sq;
        out.ym += p.ym;
        out.hodge_riemann_residual = out.hodge_riemann_residual.max(hr);
    }
    out.split_residual = (out.ym - 3.0 * out.f_plus_sq - out.kappa).abs() / out.ym.max(1e-300);
    out
}

/// Moves the Chern curvature of `h` to the unitary frame `H^{1/2}`,
/// symmetrises it and evaluates [`chern_weil_report`] with lattice weights.
pub fn lattice_chern_weil(chart: &LatticeChart, h: &EndoField, f: &CurvatureField) -> Result<EnergyReport, LatticeError> {
    let n = f.n;
    if n > MAX_KAHLER_DIM {
        return Err(LatticeError::InvalidChart(format!("complex dimension {n} does not lift to seven dimensions")));
    }
    let per_site: Vec<((Vec<CMat>, f64), f64)> = (0..chart.len())
        .into_par_iter()
        .map(|x| {
            let e = h[x].eigh();
            let g = e.apply(f64::sqrt);
            let gi = e.apply(|v| 1.0 / v.sqrt());
            let raw: Vec<CMat> = f.at(x).iter().map(|m| g * *m * gi).collect();
            let mut defect: f64 = 0.0;
            let sym: Vec<CMat> = (0..n * n)
                .map(|i| {
                    let (j, k) = (i / n, i % n);
                    let other = raw[k * n + j].adjoint();
                    defect = defect.max((raw[i] - other).max_abs());
                    (raw[i] + other).scale(0.5)
                })
                .collect();
            ((sym, chart.weight(x)), defect)
        })
        .collect();
    let defect = per_site.iter().map(|p| p.1).fold(0.0, f64::max);
    let samples: Vec<(Vec<CMat>, f64)> = per_site.into_iter().map(|p| p.0).collect();
    let mut rep = chern_weil_report(n, &samples);
    rep.compatibility_defect = defect;
    Ok(rep)
}

/// `E(t) = ∫(|F_{H_t}|² − |F_{H₀}|²)` along a trace.
#[derive(Clone, Debug, Serialize)]
pub struct EnergySeries {
    pub t: Vec<f64>,
    pub e: Vec<f64>,
    /// `‖F_{H₀}‖²`.
    pub f0_sq: f64,
    /// `1e−6·‖F_{H₀}‖²`.
    pub tolerance: f64,
    pub max_e: f64,
    pub max_increase: f64,
    pub non_positive: bool,
    pub non_increasing: bool,
}

pub fn energy_e(problem: &FlowProblem, trace: &FlowTrace) -> Result<EnergySeries, LatticeError> {
    let ch = &problem.chart;
    let f0 = curvature(ch, &problem.h0, &problem.twist)?;
    let ym0 = curvature_norm_sq(&problem.h0, &f0);
    let f0_sq: f64 = (0..ch.len()).map(|x| ch.weight(x) * ym0[x]).sum();
    let tolerance = 1e-6 * f0_sq;
    let t: Vec<f64> = trace.samples.iter().map(|s| s.t).collect();
    let e: Vec<f64> = trace.samples.iter().map(|s| s.energy).collect();
    let max_e = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_increase = e.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    Ok(EnergySeries {
        non_positive: max_e <= tolerance,
        non_increasing: max_increase <= tolerance,
        t,
        e,
        f0_sq,
        tolerance,
        max_e,
        max_increase,
    })
}
