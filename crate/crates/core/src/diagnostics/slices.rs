use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::heat_flow::{slice_sup, FlowTrace, TraceSample};
use crate::lattice_model::{kahler_laplacian, slice_lambda, CurvatureField, EndoField, LatticeChart};

/// `β = 2(sup_t sup|F̂_{H_t}| + sup|F̂_{H₀}|)` from the `sup ê` samples of a
/// trace, with `ê = |F̂|²`. Returns `(β, sup_t, sup_0)`.
pub fn beta_from_trace(trace: &FlowTrace) -> (f64, f64, f64) {
    beta_from_samples(&trace.samples)
}

/// [`beta_from_trace`] on the sample list alone.
pub fn beta_from_samples(samples: &[TraceSample]) -> (f64, f64, f64) {
    let s0 = samples.first().map_or(0.0, |s| s.sup_e.sqrt());
    let st = samples.iter().skip(1).map(|s| s.sup_e.sqrt()).fold(0.0, f64::max);
    (2.0 * (st + s0), st, s0)
}

/// A non-negative `cos²` bump supported in the interior.
#[derive(Clone, Debug, Serialize)]
pub struct Bump {
    /// Centre per axis.
    pub center: Vec<f64>,
    /// Half-width per axis (ignored on inactive axes).
    pub radius: f64,
}

impl Bump {
    pub fn eval(&self, chart: &LatticeChart) -> Vec<f64> {
        (0..chart.len())
            .map(|x| {
                let mut v = 1.0;
                for (mu, ax) in chart.axes().iter().enumerate() {
                    if !ax.is_active() {
                        continue;
                    }
                    let mut d = chart.position(x, mu) - self.center[mu];
                    if ax.periodic {
                        let period = ax.n as f64 * ax.h;
                        d -= period * (d / period).round();
                    }
                    if d.abs() >= self.radius {
                        return 0.0;
                    }
                    v *= (0.5 * PI * d / self.radius).cos().powi(2);
                }
                v
            })
            .collect()
    }
}

/// Bumps centred at `count` points along the tube (and at two torus
/// positions), with radii `radii`, all supported away from the Dirichlet
/// slices.
pub fn bump_bank(chart: &LatticeChart, count: usize, radii: &[f64]) -> Vec<Bump> {
    let mut out = Vec::new();
    let s_len = if chart.has_cylinder() { chart.axis(0).h * (chart.n_slices() - 1) as f64 } else { 0.0 };
    let torus_len = chart.spec().torus_len;
    for &r in radii {
        for i in 0..count {
            for tshift in [0.0, 0.5] {
                let center: Vec<f64> = chart
                    .axes()
                    .iter()
                    .enumerate()
                    .map(|(mu, ax)| {
                        if chart.has_cylinder() && mu == 0 {
                            let lo = r + ax.h;
                            let hi = s_len - r - ax.h;
                            lo + (hi - lo) * (i as f64 + 0.5) / count as f64
                        } else if chart.has_cylinder() && mu == 1 {
                            0.0
                        } else {
                            torus_len * (tshift + 0.37 * i as f64 / count as f64)
                        }
                    })
                    .collect();
                if !chart.has_cylinder() || 2.0 * (r + chart.axis(0).h) < s_len {
                    out.push(Bump { center, radius: r });
                }
            }
        }
    }
    out
}

/// One bank entry of [`weak_laplacian_beta`].
#[derive(Clone, Debug, Serialize)]
pub struct BumpResult {
    pub bump: Bump,
    /// `∫ f Δφ` with `Δ = −Σ∂²`.
    pub lhs: f64,
    pub phi_l1: f64,
    pub phi_c0: f64,
}

/// Weak-bound verification over a bump bank.
#[derive(Clone, Debug, Serialize)]
pub struct WeakBoundReport {
    pub beta: f64,
    pub fields: usize,
    pub bumps: usize,
    /// `max ∫fΔφ / (β‖φ‖_{L¹})`; the check passes when this is ≤ 1.
    pub worst_ratio_l1: f64,
    /// `max ∫fΔφ / (β‖φ‖_{C⁰})`, reported only.
    pub worst_ratio_c0: f64,
    /// Offending bumps (field index, result).
    pub violations: Vec<(usize, BumpResult)>,
    pub passed: bool,
}

/// Checks `∫ f Δφ ≤ β ‖φ‖_{L¹}` for every field and bump.
pub fn weak_laplacian_beta(chart: &LatticeChart, fields: &[Vec<f64>], beta: f64, bank: &[Bump]) -> WeakBoundReport {
    let w: Vec<f64> = (0..chart.len()).map(|x| chart.weight(x)).collect();
    let prepared: Vec<(Vec<f64>, f64, f64)> = bank
        .par_iter()
        .map(|b| {
            let phi = b.eval(chart);
            let lap = kahler_laplacian(chart, &EndoField::from_fn(1, chart.len(), |x| crate::cmat::CMat::scalar(1, phi[x].into())));
            let lap: Vec<f64> = lap.as_slice().iter().map(|m| m.trace().re).collect();
            let l1 = phi.iter().zip(&w).map(|(p, w)| p * w).sum();
            let c0 = phi.iter().copied().fold(0.0, f64::max);
            (lap, l1, c0)
        })
        .collect();
    let mut worst_l1 = f64::NEG_INFINITY;
    let mut worst_c0 = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for (fi, f) in fields.iter().enumerate() {
        for (b, (lap, l1, c0)) in bank.iter().zip(&prepared) {
            let lhs: f64 = (0..chart.len()).map(|x| w[x] * f[x] * lap[x]).sum();
            let r1 = if beta > 0.0 { lhs / (beta * l1) } else if lhs > 0.0 { f64::INFINITY } else { 0.0 };
            let r0 = if beta > 0.0 { lhs / (beta * c0) } else if lhs > 0.0 { f64::INFINITY } else { 0.0 };
            worst_l1 = worst_l1.max(r1);
            worst_c0 = worst_c0.max(r0);
            if lhs > beta * l1 + 1e-12 {
                violations.push((fi, BumpResult { bump: b.clone(), lhs, phi_l1: *l1, phi_c0: *c0 }));
            }
        }
    }
    WeakBoundReport {
        beta,
        fields: fields.len(),
        bumps: bank.len(),
        worst_ratio_l1: worst_l1,
        worst_ratio_c0: worst_c0,
        passed: violations.is_empty(),
        violations,
    }
}

/// `δ⁺_ε = ½(√(1 + (8/β)(1−ε)L) − 1)`.
pub fn delta_plus(beta: f64, epsilon: f64, l: f64) -> f64 {
    0.5 * ((1.0 + 8.0 / beta * (1.0 - epsilon) * l).sqrt() - 1.0)
}

/// `P(u) = L − (β/2)u(u+1)` with `u = s − S`.
pub fn parabola(l: f64, beta: f64, u: f64) -> f64 {
    l - 0.5 * beta * u * (u + 1.0)
}

/// Largest `s` at which the profile attains its maximum; `(S, L)`.
pub fn furthest_max(s: &[f64], profile: &[f64]) -> (f64, f64) {
    let l = profile.iter().copied().fold(0.0, f64::max);
    let idx = profile.iter().rposition(|&v| v >= l * (1.0 - 1e-12)).unwrap_or(0);
    (s[idx], l)
}

/// Parabola lower bound on `I = [S, S + δ⁺]` for one slice profile.
#[derive(Clone, Debug, Serialize)]
pub struct ParabolaReport {
    pub s_star: f64,
    pub l: f64,
    pub beta: f64,
    pub delta_plus: f64,
    pub checked: usize,
    pub violations: usize,
    /// `min(ℓ(s) − P(s))` over checked slices.
    pub min_margin: f64,
}

/// Counts slices `s ∈ I` with `ℓ(s) < P(s − S) − 1e−8`.
pub fn parabola_check(s: &[f64], profile: &[f64], beta: f64) -> ParabolaReport {
    let (s_star, l) = furthest_max(s, profile);
    let dp = if l > 0.0 { delta_plus(beta, 0.0, l) } else { 0.0 };
    let mut checked = 0;
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for (si, &li) in s.iter().zip(profile) {
        let u = si - s_star;
        if l > 0.0 && (0.0..=dp).contains(&u) {
            checked += 1;
            let m = li - parabola(l, beta, u);
            min_margin = min_margin.min(m);
            if m < -1e-8 {
                violations += 1;
            }
        }
    }
    ParabolaReport { s_star, l, beta, delta_plus: dp, checked, violations, min_margin }
}

/// `s` coordinate of every slice.
pub fn slice_positions(chart: &LatticeChart) -> Vec<f64> {
    (0..chart.n_slices()).map(|i| i as f64 * if chart.has_cylinder() { chart.axis(0).h } else { 0.0 }).collect()
}

/// Average and maximum of `λ̄^{1+x}` over one unit cylinder.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct UnitCylinder {
    pub s_start: f64,
    pub volume: f64,
    pub average: f64,
    pub max: f64,
    /// `average / max^{1+x}`.
    pub ratio: f64,
}

/// The unit cylinder starting at slice `i`: slices with `s ∈ [s_i, s_i + 1/2π)`,
/// all of the circle and a half-torus box (first torus coordinate within a
/// quarter period) centred on the slice maximum of `f`.
pub fn unit_cylinder(chart: &LatticeChart, f: &[f64], i: usize, x: f64) -> UnitCylinder {
    let hs = chart.axis(0).h;
    let s0 = i as f64 * hs;
    let p = chart.slice_sites(i).max_by(|&a, &b| f[a].total_cmp(&f[b])).expect("non-empty slice");
    let t_axis = 2;
    let period = chart.spec().torus_len;
    let c = chart.position(p, t_axis);
    let mut vol = 0.0;
    let mut acc = 0.0;
    let mut mx: f64 = 0.0;
    let mut j = i;
    while j < chart.n_slices() && (j as f64 * hs - s0) < 1.0 / TAU - 1e-12 {
        for y in chart.slice_sites(j) {
            let mut d = chart.position(y, t_axis) - c;
            d -= period * (d / period).round();
            if d.abs() < 0.25 * period - 1e-12 || (d.abs() - 0.25 * period).abs() <= 1e-12 && d < 0.0 {
                let w = chart.cell_volume();
                vol += w;
                acc += w * f[y].max(0.0).powf(1.0 + x);
                mx = mx.max(f[y]);
            }
        }
        j += 1;
    }
    let average = acc / vol;
    let ratio = if mx > 0.0 { average / mx.powf(1.0 + x) } else { f64::INFINITY };
    UnitCylinder { s_start: s0, volume: vol, average, max: mx, ratio }
}

/// Moser-type estimates on the slab `Σ(ε) = I_ε × S¹ × D`.
#[derive(Clone, Debug, Serialize)]
pub struct MoserReport {
    pub epsilon: f64,
    pub x: f64,
    /// Frozen per-cylinder constant.
    pub k_prime: f64,
    pub l: f64,
    pub s_star: f64,
    pub delta_plus: f64,
    /// Unit cylinders starting in `I_ε`.
    pub cylinders: Vec<UnitCylinder>,
    pub cylinder_violations: usize,
    /// `∫_{Σ(ε)} λ̄^{1+x}`.
    pub slab_integral: f64,
    /// `⌊2πδ⁺⌋ · ½vol D · k′(εL)^{1+x}`.
    pub slab_bound: f64,
    pub vacuous: bool,
    pub passed: bool,
}

/// Evaluates the per-cylinder average bound with constant `k_prime` on every
/// unit cylinder starting in `I_ε`, and the slab bound built from `⌊2πδ⁺⌋`
/// disjoint cylinders.
pub fn moser_slab_check(chart: &LatticeChart, lambda: &[f64], beta: f64, epsilon: f64, x: f64, k_prime: f64) -> MoserReport {
    let s = slice_positions(chart);
    let profile = slice_sup(chart, lambda);
    let (s_star, l) = furthest_max(&s, &profile);
    let vacuous = l <= 1e-12 || !chart.has_cylinder();
    let dp = if vacuous { 0.0 } else { delta_plus(beta, epsilon, l) };
    let mut cylinders = Vec::new();
    let mut slab_integral = 0.0;
    if !vacuous {
        for (i, &si) in s.iter().enumerate() {
            let u = si - s_star;
            if (0.0..=dp).contains(&u) {
                cylinders.push(unit_cylinder(chart, lambda, i, x));
                slab_integral += chart
                    .slice_sites(i)
                    .map(|y| chart.weight(y) * lambda[y].max(0.0).powf(1.0 + x))
                    .sum::<f64>();
            }
        }
    }
    let cylinder_violations = cylinders.iter().filter(|c| c.ratio < k_prime).count();
    let half_vol = 0.5 * chart.torus_volume();
    let n_cyl = (TAU * dp).floor();
    let slab_bound = n_cyl * half_vol * k_prime * (epsilon * l).powf(1.0 + x);
    let passed = vacuous || (cylinder_violations == 0 && slab_integral >= slab_bound);
    MoserReport {
        epsilon,
        x,
        k_prime,
        l,
        s_star,
        delta_plus: dp,
        cylinders,
        cylinder_violations,
        slab_integral,
        slab_bound,
        vacuous,
        passed,
    }
}

/// Smallest per-cylinder ratio over all unit cylinders of a field: the
/// calibration of `k′_x`.
pub fn calibrate_k_prime(chart: &LatticeChart, lambda: &[f64], x: f64) -> f64 {
    (0..chart.n_slices())
        .map(|i| unit_cylinder(chart, lambda, i, x).ratio)
        .fold(f64::INFINITY, f64::min)
}

/// `‖f‖_p ≥ (k_p / F^x) ‖f^{1+x}‖₁` with `k_p = Vol^{1/p − 1}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LpReport {
    pub lhs: f64,
    pub rhs: f64,
    pub k_p: f64,
    pub holds: bool,
}

pub fn lp_interpolation_check(f: &[f64], weights: &[f64], p: f64, x: f64) -> LpReport {
    let vol: f64 = weights.iter().sum();
    let big_f = f.iter().copied().fold(0.0, f64::max);
    let lhs = f.iter().zip(weights).map(|(v, w)| w * v.powf(p)).sum::<f64>().powf(1.0 / p);
    let l1: f64 = f.iter().zip(weights).map(|(v, w)| w * v.powf(1.0 + x)).sum();
    let k_p = vol.powf(1.0 / p - 1.0);
    let rhs = if big_f > 0.0 { k_p / big_f.powf(x) * l1 } else { 0.0 };
    LpReport { lhs, rhs, k_p, holds: lhs >= rhs * (1.0 - 1e-12) }
}

/// Outcome of [`weak_max_principle_check`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WeakMaxReport {
    /// Whether `Δf ≤ 0` on every interior site of the box.
    pub applicable: bool,
    pub interior_max: f64,
    pub boundary_max: f64,
    pub holds: bool,
}

/// On the box `lo[μ] ≤ coord < hi[μ]` (active axes), if `Δf ≤ 0` at all
/// interior sites then `max_interior f ≤ max_boundary f + 1e−10`.
pub fn weak_max_principle_check(chart: &LatticeChart, f: &[f64], lo: &[usize], hi: &[usize]) -> WeakMaxReport {
    let lap = kahler_laplacian(chart, &EndoField::from_fn(1, chart.len(), |x| crate::cmat::CMat::scalar(1, f[x].into())));
    let mut applicable = true;
    let mut imax = f64::NEG_INFINITY;
    let mut bmax = f64::NEG_INFINITY;
    for x in 0..chart.len() {
        let mut inside = true;
        let mut on_edge = false;
        for (mu, ax) in chart.axes().iter().enumerate() {
            if !ax.is_active() {
                continue;
            }
            let c = chart.coord(x, mu);
            if c < lo[mu] || c >= hi[mu] {
                inside = false;
            } else if c == lo[mu] || c + 1 == hi[mu] {
                on_edge = true;
            }
        }
        if !inside {
            continue;
        }
        if on_edge {
            bmax = bmax.max(f[x]);
        } else {
            imax = imax.max(f[x]);
            if lap[x].trace().re > 1e-12 {
                applicable = false;
            }
        }
    }
    WeakMaxReport { applicable, interior_max: imax, boundary_max: bmax, holds: !applicable || imax <= bmax + 1e-10 }
}

/// `‖F̂_{|z}‖²_{L²(D_z)}` per `(s, α)` cross-section, from the slice contraction
/// over torus directions with `H`-norms.
pub fn slice_fhat_l2(chart: &LatticeChart, h: &EndoField, f: &CurvatureField) -> Vec<Vec<f64>> {
    let fs = slice_lambda(f, chart.torus_directions());
    let na = if chart.has_cylinder() { chart.axis(1).n } else { 1 };
    let cell = chart.torus_cell_volume();
    (0..chart.n_slices())
        .map(|i| {
            (0..na)
                .map(|a| {
                    chart
                        .cross_section_sites(i, a)
                        .map(|x| {
                            let hinv = h[x].inverse().expect("metric must be invertible");
                            cell * fs[x].norm_sq_in(&h[x], &hinv)
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Integrated lower bound over `A = I_ε × S¹`, with every constant measured.
#[derive(Clone, Debug, Serialize)]
pub struct ClaimReport {
    pub t: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub x: f64,
    pub s_t: f64,
    pub l_t: f64,
    pub delta_plus: f64,
    pub interval: (f64, f64),
    /// `∫_A ‖F̂_{|z}‖²_{L²(D_z)} ds∧dα` (rectangle rule in `s`).
    pub slab_energy: f64,
    /// `μ∞(A)` with the same quadrature.
    pub mu: f64,
    pub parabola_violations: usize,
    /// Frozen Moser constant `k′_x`.
    pub k_moser: f64,
    /// `min_z L‖F̂_{|z}‖₂ / (‖λ̄‖_{4/3,D_z} − 1)` over slices with `‖λ̄‖_{4/3} > 1`.
    pub k_slice: Option<f64>,
    pub c: Option<f64>,
    pub c_prime: Option<f64>,
    pub c_dprime: f64,
    pub rhs: Option<f64>,
    pub ratio: Option<f64>,
    /// `μ∞(A) / √L`.
    pub mu_over_sqrt_l: Option<f64>,
}

/// Claim diagnostics for one snapshot: `lambda` is `λ̄` of the snapshot and
/// `slices` is [`slice_fhat_l2`] of it.
pub fn claim_lower_bound(
    chart: &LatticeChart,
    t: f64,
    lambda: &[f64],
    slices: &[Vec<f64>],
    beta: f64,
    k_moser: f64,
) -> ClaimReport {
    let (epsilon, x) = (0.5, 1.0);
    let s = slice_positions(chart);
    let profile = slice_sup(chart, lambda);
    let (s_t, l_t) = furthest_max(&s, &profile);
    let par = parabola_check(&s, &profile, beta);
    let dp = if l_t > 0.0 { delta_plus(beta, epsilon, l_t) } else { 0.0 };
    let hs = if chart.has_cylinder() { chart.axis(0).h } else { 1.0 };
    let ha = if chart.has_cylinder() { chart.axis(1).h } else { TAU };
    let vol_d = chart.torus_volume();
    let cell = chart.torus_cell_volume();
    let mut slab_energy = 0.0;
    let mut mu = 0.0;
    let mut k_slice: Option<f64> = None;
    for (i, &si) in s.iter().enumerate() {
        let u = si - s_t;
        if l_t <= 0.0 || !(0.0..=dp).contains(&u) {
            continue;
        }
        for (a, &e) in slices[i].iter().enumerate() {
            slab_energy += hs * ha * e;
            mu += hs * ha;
            let norm43 = chart
                .cross_section_sites(i, a)
                .map(|y| cell * lambda[y].max(0.0).powf(4.0 / 3.0))
                .sum::<f64>()
                .powf(0.75);
            if norm43 > 1.0 {
                let k = l_t * e.sqrt() / (norm43 - 1.0);
                k_slice = Some(k_slice.map_or(k, |v: f64| v.min(k)));
            }
        }
    }
    let k43 = vol_d.powf(-0.25);
    let k_eps_x = PI * k_moser * epsilon.powf(1.0 + x) * vol_d;
    let c = k_slice.map(|k| (k * k43 * k_eps_x / (2f64.sqrt() * PI)).powi(2));
    let c_prime = k_slice.map(|k| k / (k * k43 * k_eps_x));
    let c_dprime = TAU / beta.sqrt();
    let rhs = match (c, c_prime) {
        (Some(c), Some(cp)) => Some(0.5 * c * mu * (1.0 - cp / l_t).powi(2)),
        _ => None,
    };
    let ratio = rhs.filter(|r| *r > 0.0).map(|r| slab_energy / r);
    ClaimReport {
        t,
        beta,
        epsilon,
        x,
        s_t,
        l_t,
        delta_plus: dp,
        interval: (s_t, s_t + dp),
        slab_energy,
        mu,
        parabola_violations: par.violations,
        k_moser,
        k_slice,
        c,
        c_prime,
        c_dprime,
        rhs,
        ratio,
        mu_over_sqrt_l: (l_t > 0.0).then(|| mu / l_t.sqrt()),
    }
}
