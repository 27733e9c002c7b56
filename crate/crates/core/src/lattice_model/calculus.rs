//! Finite-difference Dolbeault calculus and Chern curvature.
//!
//! First derivatives are central differences; second derivatives along one
//! axis use the compact three-point stencil. On the open ends of the `s` axis
//! both switch to one-sided second-order stencils.

use rayon::prelude::*;

use super::{EndoField, HolomorphicTwist, LatticeChart, LatticeError, OneFormField};
use crate::cmat::{CMat, C64, I};

/// First derivative along axis μ.
pub fn d1(chart: &LatticeChart, f: &EndoField, mu: usize) -> EndoField {
    let ax = chart.axis(mu);
    let r = f.rank();
    if !ax.is_active() {
        return EndoField::zeros(r, f.len());
    }
    let inv2h = 0.5 / ax.h;
    EndoField::from_fn(r, f.len(), |x| {
        match (chart.shift(x, mu, -1), chart.shift(x, mu, 1)) {
            (Some(m), Some(p)) => (f[p] - f[m]).scale(inv2h),
            (None, Some(p)) => {
                let pp = chart.shift(x, mu, 2).unwrap();
                (f[p].scale(4.0) - f[x].scale(3.0) - f[pp]).scale(inv2h)
            }
            (Some(m), None) => {
                let mm = chart.shift(x, mu, -2).unwrap();
                (f[x].scale(3.0) - f[m].scale(4.0) + f[mm]).scale(inv2h)
            }
            (None, None) => CMat::zeros(r),
        }
    })
}

/// Second derivative along axis μ.
pub fn d2(chart: &LatticeChart, f: &EndoField, mu: usize) -> EndoField {
    let ax = chart.axis(mu);
    let r = f.rank();
    if !ax.is_active() {
        return EndoField::zeros(r, f.len());
    }
    let inv = ax.h.powi(-2);
    EndoField::from_fn(r, f.len(), |x| {
        match (chart.shift(x, mu, -1), chart.shift(x, mu, 1)) {
            (Some(m), Some(p)) => (f[p] + f[m] - f[x].scale(2.0)).scale(inv),
            (None, Some(p)) => {
                let p2 = chart.shift(x, mu, 2).unwrap();
                let p3 = chart.shift(x, mu, 3).unwrap();
                (f[x].scale(2.0) - f[p].scale(5.0) + f[p2].scale(4.0) - f[p3]).scale(inv)
            }
            (Some(m), None) => {
                let m2 = chart.shift(x, mu, -2).unwrap();
                let m3 = chart.shift(x, mu, -3).unwrap();
                (f[x].scale(2.0) - f[m].scale(5.0) + f[m2].scale(4.0) - f[m3]).scale(inv)
            }
            (None, None) => CMat::zeros(r),
        }
    })
}

/// Mixed second derivative `∂_μ∂_ν` for `μ ≠ ν`.
pub fn mixed_d2(chart: &LatticeChart, f: &EndoField, mu: usize, nu: usize) -> EndoField {
    d1(chart, &d1(chart, f, nu), mu)
}

/// `∂_{zʲ} f = ½(∂_x − i∂_y) f`.
pub fn dz(chart: &LatticeChart, f: &EndoField, j: usize) -> EndoField {
    let dx = d1(chart, f, 2 * j);
    let dy = d1(chart, f, 2 * j + 1);
    dx.zip_map(&dy, |a, b| (*a - *b * I).scale(0.5))
}

/// `∂_{z̄ʲ} f = ½(∂_x + i∂_y) f`.
pub fn dzbar(chart: &LatticeChart, f: &EndoField, j: usize) -> EndoField {
    let dx = d1(chart, f, 2 * j);
    let dy = d1(chart, f, 2 * j + 1);
    dx.zip_map(&dy, |a, b| (*a + *b * I).scale(0.5))
}

/// `∂_{z̄ᵏ}∂_{zʲ} f`, compact on the diagonal.
pub fn dzbar_dz(chart: &LatticeChart, f: &EndoField, k: usize, j: usize) -> EndoField {
    if j == k {
        let a = d2(chart, f, 2 * j);
        let b = d2(chart, f, 2 * j + 1);
        return a.zip_map(&b, |x, y| (*x + *y).scale(0.25));
    }
    let (xk, yk, xj, yj) = (2 * k, 2 * k + 1, 2 * j, 2 * j + 1);
    let a = mixed_d2(chart, f, xk, xj);
    let b = mixed_d2(chart, f, xk, yj);
    let c = mixed_d2(chart, f, yk, xj);
    let d = mixed_d2(chart, f, yk, yj);
    EndoField::from_fn(f.rank(), f.len(), |x| (a[x] - b[x] * I + c[x] * I + d[x]).scale(0.25))
}

/// `∂̄_a f = ∂̄f + [a, f]` on endomorphisms, one component per direction.
pub fn dolbeault(chart: &LatticeChart, f: &EndoField, twist: &HolomorphicTwist) -> OneFormField {
    let comps = (0..chart.complex_dim())
        .map(|k| {
            let d = dzbar(chart, f, k);
            let a = &twist.a.comps[k];
            EndoField::from_fn(f.rank(), f.len(), |x| d[x] + a[x].commutator(&f[x]))
        })
        .collect();
    OneFormField { comps }
}

/// The conjugate operator `∂f − [a†, f]` for the identity metric.
pub fn dolbeault_conj(chart: &LatticeChart, f: &EndoField, twist: &HolomorphicTwist) -> OneFormField {
    let comps = (0..chart.complex_dim())
        .map(|k| {
            let d = dz(chart, f, k);
            let a = &twist.a.comps[k];
            EndoField::from_fn(f.rank(), f.len(), |x| d[x] - a[x].adjoint().commutator(&f[x]))
        })
        .collect();
    OneFormField { comps }
}

/// Flat Kähler Laplacian `Δ = −Σ_μ ∂²_μ` (non-negative spectrum).
pub fn kahler_laplacian(chart: &LatticeChart, f: &EndoField) -> EndoField {
    let mut out = EndoField::zeros(f.rank(), f.len());
    for mu in 0..chart.axes().len() {
        out = out.sub(&d2(chart, f, mu));
    }
    out
}

/// `(1,1)` curvature components `F_{jk̄}` (coefficient of `dzʲ∧dz̄ᵏ`),
/// stored row-major in `(j, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureField {
    pub n: usize,
    pub comps: Vec<EndoField>,
}

/// Alias kept for readability at call sites that only need the components.
pub type Curvature = CurvatureField;

impl CurvatureField {
    pub fn get(&self, j: usize, k: usize) -> &EndoField {
        &self.comps[j * self.n + k]
    }

    /// The components at one site.
    pub fn at(&self, site: usize) -> Vec<CMat> {
        self.comps.iter().map(|c| c[site]).collect()
    }
}

/// Chern curvature of `(∂̄ + a, H)`:
/// `F_{jk̄} = ∂_j a_k − ∂_{k̄} b_j + [b_j, a_k]` with
/// `b_j = H⁻¹∂_jH − H⁻¹a_j†H`.
pub fn curvature(chart: &LatticeChart, h: &EndoField, twist: &HolomorphicTwist) -> Result<CurvatureField, LatticeError> {
    h.check_len(chart)?;
    let n = chart.complex_dim();
    let r = h.rank();
    let hinv: Vec<CMat> = h
        .as_slice()
        .par_iter()
        .enumerate()
        .map(|(site, m)| m.inverse().ok_or(LatticeError::SingularMetric { site }))
        .collect::<Result<_, _>>()?;
    let hinv = EndoField::from_vec(r, hinv);
    let a = &twist.a.comps;
    let dh: Vec<EndoField> = (0..n).map(|j| dz(chart, h, j)).collect();
    let dbh: Vec<EndoField> = (0..n).map(|k| dzbar(chart, h, k)).collect();
    // B_j = H⁻¹ a_j† H
    let bfield: Vec<EndoField> = (0..n)
        .map(|j| EndoField::from_fn(r, h.len(), |x| hinv[x] * a[j][x].adjoint() * h[x]))
        .collect();
    let mut comps = Vec::with_capacity(n * n);
    for j in 0..n {
        let da: Vec<EndoField> = (0..n).map(|k| dz(chart, &a[k], j)).collect();
        for k in 0..n {
            let ddh = dzbar_dz(chart, h, k, j);
            let dbb = dzbar(chart, &bfield[j], k);
            let f = EndoField::from_fn(r, h.len(), |x| {
                let hi = hinv[x];
                let bj = hi * dh[j][x] - bfield[j][x];
                let dbar_b = -(hi * dbh[k][x] * hi * dh[j][x]) + hi * ddh[x] - dbb[x];
                da[k][x] - dbar_b + bj.commutator(&a[k][x])
            });
            comps.push(f);
        }
    }
    Ok(CurvatureField { n, comps })
}

/// `|F|²_H = 4 Σ_{jk} tr(F_{jk̄} H⁻¹ F_{jk̄}† H)` per site (`|dzʲ∧dz̄ᵏ|² = 4`).
pub fn curvature_norm_sq(h: &EndoField, f: &CurvatureField) -> Vec<f64> {
    (0..h.len())
        .into_par_iter()
        .map(|x| {
            let hinv = h[x].inverse().expect("metric must be invertible");
            4.0 * f.comps.iter().map(|c| c[x].norm_sq_in(&h[x], &hinv)).sum::<f64>()
        })
        .collect()
}

/// `ΛF = −2i Σ_j F_{jj̄}`.
pub fn lambda_contract(f: &CurvatureField) -> EndoField {
    slice_lambda(f, 0..f.n)
}

/// `−2i Σ_{j∈dirs} F_{jj̄}`: the contraction with the Kähler form of the
/// directions in `dirs` only.
pub fn slice_lambda(f: &CurvatureField, dirs: std::ops::Range<usize>) -> EndoField {
    let c = f.comps[0].clone();
    let mut out = EndoField::zeros(c.rank(), c.len());
    for j in dirs {
        out = out.add(f.get(j, j));
    }
    out.scale_c(C64::new(0.0, -2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_model::LatticeChart;

    fn scalar_field(chart: &LatticeChart, f: impl Fn(&[f64]) -> f64 + Sync) -> EndoField {
        EndoField::from_fn(1, chart.len(), |x| {
            let p: Vec<f64> = (0..chart.axes().len()).map(|mu| chart.position(x, mu)).collect();
            CMat::scalar(1, C64::new(f(&p), 0.0))
        })
    }

    #[test]
    fn one_sided_stencils_are_exact_on_quadratics() {
        let ch = LatticeChart::cylinder(1, 4, 8, 2.0, 1).unwrap();
        let f = scalar_field(&ch, |p| 1.0 + 2.0 * p[0] - 0.7 * p[0] * p[0]);
        let d = d1(&ch, &f, 0);
        let dd = d2(&ch, &f, 0);
        for x in 0..ch.len() {
            let s = ch.position(x, 0);
            assert!((d[x][(0, 0)].re - (2.0 - 1.4 * s)).abs() < 1e-12);
            assert!((dd[x][(0, 0)].re + 1.4).abs() < 1e-11);
        }
    }

    #[test]
    fn identity_metric_without_twist_is_flat() {
        let ch = LatticeChart::cylinder(1, 6, 6, 1.0, 1).unwrap();
        let tw = HolomorphicTwist::zero(&ch, 2);
        let f = curvature(&ch, &EndoField::identity(2, ch.len()), &tw).unwrap();
        assert!(f.comps.iter().all(|c| c.sup_norm() == 0.0));
    }
}
