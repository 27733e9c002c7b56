//! The lattice Donaldson functional.
//!
//! In the unitary frame `g₀ = H₀^{1/2}` of the reference metric, with
//! `H̃ = g₀⁻¹Hg₀⁻¹ = e^ξ`, the functional is
//!
//! ```text
//! M(H) = 2i(n−1)! Σ_x w_x tr(ξ F̃₀)
//!      + (n−1)! Σ_edges W Σ_ab Ψe(λ_b − λ_a) |X'_ab|²
//!      + 2(n−1)! Σ_plaq W Im Σ_ab Ψo(λ_b − λ_a) conj(X'_ab) Z'_ab
//! ```
//!
//! where `X` (and `Z`) are covariant differences of ξ along the real axes of
//! one complex direction, primes denote the eigenbasis of the averaged ξ and
//! `λ` its eigenvalues. Its differential is the discrete `ρ`, and the
//! discrete HYM operator `F̂_h` is defined by
//! `dM(H)[k] = Σ_x w_x 2i(n−1)! tr(H⁻¹ k F̂_h)`.

use rayon::prelude::*;

use super::psi::Psi;
use crate::cmat::{CMat, Eigh, C64, I};
use crate::lattice_model::{
    curvature, dzbar, factorial, slice_lambda, EndoField, HolomorphicTwist, LatticeChart, LatticeError,
};

/// Frame data of a reference metric and the functional built on it.
#[derive(Clone, Debug)]
pub struct LatticeFunctional {
    chart: LatticeChart,
    rank: usize,
    /// `(n−1)!` for the complex dimension of `chart`.
    factor: f64,
    g0: EndoField,
    g0_inv: EndoField,
    /// Anti-Hermitian connection coefficient per real axis, unitary frame.
    conn: Vec<EndoField>,
    /// `F̃₀`, anti-Hermitian.
    f0: EndoField,
    site_weight: Vec<f64>,
    /// Site indices of the parent chart when this is a cross-section.
    parent_sites: Option<std::ops::Range<usize>>,
}

/// Value of `M` and, optionally, its gradient with respect to `H`.
struct Evaluation {
    value: f64,
    grad: Option<EndoField>,
}

fn frame(chart: &LatticeChart, h0: &EndoField, twist: &HolomorphicTwist) -> (EndoField, EndoField, Vec<EndoField>) {
    let g0 = h0.map(|m| m.eigh().apply(f64::sqrt));
    let g0_inv = h0.map(|m| m.eigh().apply(|x| 1.0 / x.sqrt()));
    let mut conn = Vec::with_capacity(2 * chart.complex_dim());
    for j in 0..chart.complex_dim() {
        let dg = dzbar(chart, &g0, j);
        let a = &twist.a.comps[j];
        let at = EndoField::from_fn(h0.rank(), h0.len(), |x| g0[x] * a[x] * g0_inv[x] - dg[x] * g0_inv[x]);
        conn.push(at.map(|m| *m - m.adjoint()));
        conn.push(at.map(|m| (*m + m.adjoint()).scale_c(-I)));
    }
    (g0, g0_inv, conn)
}

impl LatticeFunctional {
    /// The functional on the whole chart relative to `h0`.
    pub fn new(chart: &LatticeChart, h0: &EndoField, twist: &HolomorphicTwist) -> Result<Self, LatticeError> {
        h0.validate_metric()?;
        let f = curvature(chart, h0, twist)?;
        let fhat0 = slice_lambda(&f, 0..chart.complex_dim());
        let (g0, g0_inv, conn) = frame(chart, h0, twist);
        let f0 = EndoField::from_fn(h0.rank(), h0.len(), |x| (g0[x] * fhat0[x] * g0_inv[x]).antihermitian_part());
        let site_weight = (0..chart.len()).map(|x| chart.weight(x)).collect();
        Ok(LatticeFunctional {
            chart: chart.clone(),
            rank: h0.rank(),
            factor: factorial(chart.complex_dim() - 1),
            g0,
            g0_inv,
            conn,
            f0,
            site_weight,
            parent_sites: None,
        })
    }

    /// The slice functional on the torus cross-section `{s = s_idx, α = a_idx}`:
    /// only torus directions enter, with `(m−1)!` and the slice contraction
    /// `−2i Σ_{torus j} F_{jj̄}` of the curvature of `h0`.
    pub fn slice(
        chart: &LatticeChart,
        h0: &EndoField,
        twist: &HolomorphicTwist,
        s_idx: usize,
        a_idx: usize,
    ) -> Result<Self, LatticeError> {
        h0.validate_metric()?;
        let f = curvature(chart, h0, twist)?;
        let fhat0 = slice_lambda(&f, chart.torus_directions());
        let (g0, g0_inv, conn) = frame(chart, h0, twist);
        let sites = chart.cross_section_sites(s_idx, a_idx);
        let cs = chart.cross_section_chart();
        let first_axis = 2 * chart.torus_directions().start;
        let conn = conn[first_axis..].iter().map(|c| c.restrict(sites.clone())).collect();
        let g0 = g0.restrict(sites.clone());
        let g0_inv = g0_inv.restrict(sites.clone());
        let f0 = EndoField::from_fn(h0.rank(), cs.len(), |x| {
            (g0[x] * fhat0[sites.start + x] * g0_inv[x]).antihermitian_part()
        });
        let site_weight = vec![cs.torus_cell_volume(); cs.len()];
        Ok(LatticeFunctional {
            factor: factorial(cs.complex_dim() - 1),
            chart: cs,
            rank: h0.rank(),
            g0,
            g0_inv,
            conn,
            f0,
            site_weight,
            parent_sites: Some(sites),
        })
    }

    pub fn chart(&self) -> &LatticeChart {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `(n−1)!` of the chart this functional lives on.
    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn site_weight(&self, x: usize) -> f64 {
        self.site_weight[x]
    }

    /// The reference metric `H₀ = g₀²`.
    pub fn reference(&self) -> EndoField {
        self.g0.map(|g| *g * *g)
    }

    /// Restricts a field on the parent chart to this functional's sites
    /// (identity for a whole-chart functional).
    pub fn restrict(&self, f: &EndoField) -> EndoField {
        match &self.parent_sites {
            Some(r) => f.restrict(r.clone()),
            None => f.clone(),
        }
    }

    /// `ξ = log(g₀⁻¹Hg₀⁻¹)` in the unitary frame.
    pub fn xi_unitary(&self, h: &EndoField) -> EndoField {
        EndoField::from_fn(self.rank, h.len(), |x| {
            (self.g0_inv[x] * h[x] * self.g0_inv[x]).hermitian_part().eigh().apply(f64::ln)
        })
    }

    /// `log(H₀⁻¹H)`, the endomorphism ξ of the original frame.
    pub fn xi(&self, h: &EndoField) -> EndoField {
        let xt = self.xi_unitary(h);
        EndoField::from_fn(self.rank, h.len(), |x| self.g0_inv[x] * xt[x] * self.g0[x])
    }

    /// `M(H)`. Zero at the reference metric.
    pub fn value(&self, h: &EndoField) -> Result<f64, LatticeError> {
        Ok(self.evaluate(h, false)?.value)
    }

    /// Hermitian gradient `G` with `dM(H)[k] = Σ_x tr(G_x k_x)`.
    pub fn gradient(&self, h: &EndoField) -> Result<EndoField, LatticeError> {
        Ok(self.evaluate(h, true)?.grad.expect("gradient requested"))
    }

    /// `dM(H)[k]`, the discrete `ρ_H(k)`.
    pub fn rho(&self, h: &EndoField, k: &EndoField) -> Result<f64, LatticeError> {
        let g = self.gradient(h)?;
        Ok(g.as_slice().par_iter().zip(k.as_slice()).map(|(a, b)| (*a * *b).trace().re).sum())
    }

    /// The discrete HYM operator `F̂_h = G H / (2i(n−1)! w_x)`.
    ///
    /// On Dirichlet slices the gradient is one-sided and the result has no
    /// meaning as a curvature; callers pin those sites.
    pub fn fhat(&self, h: &EndoField) -> Result<EndoField, LatticeError> {
        let g = self.gradient(h)?;
        let f = self.factor;
        Ok(EndoField::from_fn(self.rank, h.len(), |x| {
            (g[x] * h[x]).scale_c(C64::new(0.0, -0.5 / (f * self.site_weight[x])))
        }))
    }

    fn edge_weight(&self, x: usize, mu: usize) -> f64 {
        let w = self.chart.cell_volume();
        if mu != 0 && self.chart.is_boundary(x) {
            0.5 * w
        } else {
            w
        }
    }

    fn plaquette_weight(&self, x: usize, j: usize) -> f64 {
        let w = self.chart.cell_volume();
        if j != 0 && self.chart.is_boundary(x) {
            0.5 * w
        } else {
            w
        }
    }

    fn evaluate(&self, h: &EndoField, want_grad: bool) -> Result<Evaluation, LatticeError> {
        h.check_len(&self.chart)?;
        if h.rank() != self.rank {
            return Err(LatticeError::RankMismatch { expected: self.rank, found: h.rank() });
        }
        let ch = &self.chart;
        let fac = self.factor;
        let eig: Vec<Eigh> = (0..h.len())
            .into_par_iter()
            .map(|x| {
                let m = self.g0_inv[x] * h[x] * self.g0_inv[x];
                if !m.is_finite() {
                    return Err(LatticeError::NonFinite { site: x });
                }
                let e = m.hermitian_part().eigh();
                if e.min() <= 0.0 {
                    return Err(LatticeError::SingularMetric { site: x });
                }
                Ok(e)
            })
            .collect::<Result<_, _>>()?;
        let xi = EndoField::from_fn(self.rank, h.len(), |x| eig[x].apply(f64::ln));

        let linear: Vec<(f64, CMat)> = (0..h.len())
            .into_par_iter()
            .map(|x| {
                let w = self.site_weight[x];
                let g = self.f0[x].scale_c(C64::new(0.0, 2.0 * fac * w));
                ((g * xi[x]).trace().re, g)
            })
            .collect();
        let mut value: f64 = linear.iter().map(|p| p.0).sum();
        let mut grad: Vec<CMat> = linear.into_iter().map(|p| p.1).collect();

        for mu in 0..ch.axes().len() {
            let terms: Vec<Option<(f64, CMat, CMat)>> = (0..h.len())
                .into_par_iter()
                .map(|x| {
                    let y = ch.shift(x, mu, 1)?;
                    let w = fac * self.edge_weight(x, mu);
                    Some(edge_term(
                        [&xi[x], &xi[y]],
                        [&self.conn[mu][x], &self.conn[mu][y]],
                        ch.axis(mu).h,
                        w,
                        want_grad,
                    ))
                })
                .collect();
            value += terms.iter().flatten().map(|t| t.0).sum::<f64>();
            if want_grad {
                grad.par_iter_mut().enumerate().for_each(|(x, g)| {
                    if let Some((_, gx, _)) = &terms[x] {
                        *g += *gx;
                    }
                    if let Some(p) = ch.shift(x, mu, -1) {
                        if let Some((_, _, gy)) = &terms[p] {
                            *g += *gy;
                        }
                    }
                });
            }
        }

        for j in 0..ch.complex_dim() {
            let (ma, mb) = (2 * j, 2 * j + 1);
            let terms: Vec<Option<(f64, [CMat; 4])>> = (0..h.len())
                .into_par_iter()
                .map(|x| {
                    let x10 = ch.shift(x, ma, 1)?;
                    let x01 = ch.shift(x, mb, 1)?;
                    let x11 = ch.shift(x10, mb, 1)?;
                    let c = [x, x10, x01, x11];
                    let w = 2.0 * fac * self.plaquette_weight(x, j);
                    Some(plaquette_term(
                        c.map(|s| &xi[s]),
                        c.map(|s| &self.conn[ma][s]),
                        c.map(|s| &self.conn[mb][s]),
                        [ch.axis(ma).h, ch.axis(mb).h],
                        w,
                        want_grad,
                    ))
                })
                .collect();
            value += terms.iter().flatten().map(|t| t.0).sum::<f64>();
            if want_grad {
                grad.par_iter_mut().enumerate().for_each(|(x, g)| {
                    let back_a = ch.shift(x, ma, -1);
                    let back_b = ch.shift(x, mb, -1);
                    let back_ab = back_a.and_then(|p| ch.shift(p, mb, -1));
                    for (corner, base) in [(0, Some(x)), (1, back_a), (2, back_b), (3, back_ab)] {
                        if let Some(p) = base {
                            if let Some((_, gs)) = &terms[p] {
                                *g += gs[corner];
                            }
                        }
                    }
                });
            }
        }

        if !want_grad {
            return Ok(Evaluation { value, grad: None });
        }
        let out = EndoField::from_fn(self.rank, h.len(), |x| {
            let e = &eig[x];
            let gp = e.to_eigenbasis(&grad[x]);
            let lam: Vec<f64> = e.values().iter().map(|m| m.ln()).collect();
            let r = self.rank;
            let chained = CMat::from_fn(r, |a, b| {
                let d = lam[a] - lam[b];
                let m = 0.5 * (lam[a] + lam[b]);
                let l = if d.abs() < 1e-8 { 1.0 } else { d / (2.0 * (0.5 * d).sinh()) };
                gp[(a, b)] * ((-m).exp() * l)
            });
            let gt = e.from_eigenbasis(&chained);
            (self.g0_inv[x] * gt * self.g0_inv[x]).hermitian_part()
        });
        Ok(Evaluation { value, grad: Some(out) })
    }
}

/// `K'` with `df = tr(K' E')` for `f(ξ) = Σ_ab Ψ(λ_b − λ_a) conj(X'_ab) Y'_ab`
/// at fixed `X`, `Y`, all in the eigenbasis of ξ.
fn spectral_gradient(lam: &[f64], xp: &CMat, yp: &CMat, psi: Psi) -> CMat {
    let r = lam.len();
    let mut k = CMat::zeros(r);
    for a in 0..r {
        for b in 0..r {
            let xab = xp[(a, b)].conj();
            if xab == C64::new(0.0, 0.0) {
                continue;
            }
            for c in 0..r {
                let f1 = -psi.divided(lam[b] - lam[a], lam[b] - lam[c]);
                k[(c, a)] += xab * f1 * yp[(c, b)];
                let f2 = psi.divided(lam[c] - lam[a], lam[b] - lam[a]);
                k[(b, c)] += xab * f2 * yp[(a, c)];
            }
        }
    }
    k
}

/// `φ ∘ M` with `φ_ab = Ψ(λ_b − λ_a)`.
fn weighted(lam: &[f64], m: &CMat, psi: Psi) -> CMat {
    CMat::from_fn(lam.len(), |a, b| m[(a, b)] * psi.value(lam[b] - lam[a]))
}

/// One edge: value and the gradient contributions to its two endpoints.
fn edge_term(xi: [&CMat; 2], conn: [&CMat; 2], h: f64, w: f64, want_grad: bool) -> (f64, CMat, CMat) {
    let xe = (*xi[0] + *xi[1]).scale(0.5);
    let ae = (*conn[0] + *conn[1]).scale(0.5);
    let xd = (*xi[1] - *xi[0]).scale(1.0 / h) + ae.commutator(&xe);
    let e = xe.hermitian_part().eigh();
    let lam = e.values();
    let xp = e.to_eigenbasis(&xd);
    let r = lam.len();
    let mut value = 0.0;
    for a in 0..r {
        for b in 0..r {
            value += Psi::Even.value(lam[b] - lam[a]) * xp[(a, b)].norm_sqr();
        }
    }
    value *= w;
    if !want_grad {
        let z = CMat::zeros(r);
        return (value, z, z);
    }
    let gx = e.from_eigenbasis(&weighted(lam, &xp, Psi::Even)).scale(2.0 * w);
    let gxi = e.from_eigenbasis(&spectral_gradient(lam, &xp, &xp, Psi::Even)).hermitian_part().scale(w);
    let t = (gxi + gx.commutator(&ae)).scale(0.5);
    let gh = gx.scale(1.0 / h);
    (value, t - gh, t + gh)
}

/// One plaquette with corners `[x, x+a, x+b, x+a+b]`.
fn plaquette_term(
    xi: [&CMat; 4],
    conn_a: [&CMat; 4],
    conn_b: [&CMat; 4],
    h: [f64; 2],
    w: f64,
    want_grad: bool,
) -> (f64, [CMat; 4]) {
    let avg = |v: [&CMat; 4]| (*v[0] + *v[1] + *v[2] + *v[3]).scale(0.25);
    let xm = avg(xi);
    let aa = avg(conn_a);
    let ab = avg(conn_b);
    let xd = (*xi[1] - *xi[0] + *xi[3] - *xi[2]).scale(0.5 / h[0]) + aa.commutator(&xm);
    let zd = (*xi[2] - *xi[0] + *xi[3] - *xi[1]).scale(0.5 / h[1]) + ab.commutator(&xm);
    let e = xm.hermitian_part().eigh();
    let lam = e.values();
    let xp = e.to_eigenbasis(&xd);
    let zp = e.to_eigenbasis(&zd);
    let r = lam.len();
    let mut value = 0.0;
    for a in 0..r {
        for b in 0..r {
            value += Psi::Odd.value(lam[b] - lam[a]) * (xp[(a, b)].conj() * zp[(a, b)]).im;
        }
    }
    value *= w;
    let z = CMat::zeros(r);
    if !want_grad {
        return (value, [z; 4]);
    }
    let gx = e.from_eigenbasis(&weighted(lam, &zp, Psi::Odd)).scale_c(C64::new(0.0, -w));
    let gz = e.from_eigenbasis(&weighted(lam, &xp, Psi::Odd)).scale_c(C64::new(0.0, w));
    let b = e.from_eigenbasis(&spectral_gradient(lam, &xp, &zp, Psi::Odd));
    let gxi = (b - b.adjoint()).scale_c(C64::new(0.0, -0.5 * w));
    let t = (gxi + gx.commutator(&aa) + gz.commutator(&ab)).scale(0.25);
    let ga = gx.scale(0.5 / h[0]);
    let gb = gz.scale(0.5 / h[1]);
    (value, [t - ga - gb, t + ga - gb, t - ga + gb, t + ga + gb])
}
