//! Discrete asymptotically cylindrical geometry.
//!
//! A [`LatticeChart`] is a product of a truncated cylinder `[0,S] × S¹`
//! (coordinates `s`, `α`, holomorphic coordinate `w = s + iα`) with a flat
//! torus of complex dimension `m`. Real axes are ordered
//! `[s, α, x¹, y¹, x², y², …]` and sites are stored row-major with `s`
//! slowest. Complex direction `j` uses axes `2j` and `2j+1`, so direction 0
//! is the cylinder when it is present. A torus-only chart drops the first two
//! axes.
//!
//! Kähler data is the constant standard form `ω = Σ dxʲ∧dyʲ` (which includes
//! `ds∧dα` on the cylinder), `Λω = n` and `dvol = ωⁿ/n!`. On the lattice this
//! means `Λ(dzʲ∧dz̄ᵏ) = −2iδʲᵏ` and a cell volume equal to the product of the
//! spacings.

mod calculus;
mod fields;
mod heat_kernel;
mod io;
mod twist;

pub use calculus::{
    curvature, curvature_norm_sq, d1, d2, dolbeault, dolbeault_conj, dz, dzbar, dzbar_dz, kahler_laplacian,
    lambda_contract, mixed_d2, slice_lambda, Curvature, CurvatureField,
};
pub use fields::{EndoField, MetricField, OneFormField};
pub use heat_kernel::{heat_kernel_diag_check, HeatKernelReport};
pub use io::{read_field, write_field, FieldHeader};
pub use twist::{smooth_hermitian, smooth_metric, Envelope, HolomorphicTwist, TwistSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by lattice operations.
#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("metric is singular or not positive definite at site {site}")]
    SingularMetric { site: usize },
    #[error("non-finite entry at site {site}")]
    NonFinite { site: usize },
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("field has {found} sites, chart has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed field file: {0}")]
    Format(String),
}

/// One real lattice axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    /// Number of sites.
    pub n: usize,
    /// Spacing.
    pub h: f64,
    pub periodic: bool,
}

impl Axis {
    /// Whether derivatives along this axis can be non-zero.
    pub fn is_active(&self) -> bool {
        self.n > 1
    }
}

/// Geometry parameters of a lattice chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    /// Complex dimension `m` of the torus cross-section.
    pub torus_dim: usize,
    /// Sites per real torus direction.
    pub torus_n: usize,
    /// Period of each real torus direction.
    pub torus_len: f64,
    /// `Some((N_s, S, N_α))` for a cylinder with `N_s` intervals in `s`
    /// (so `N_s + 1` slices) of total length `S` and `N_α` sites around the
    /// circle of length 2π. `None` gives a torus-only chart.
    pub cylinder: Option<(usize, f64, usize)>,
}

/// Product lattice (cylinder ×) flat torus.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeChart {
    spec: ChartSpec,
    axes: Vec<Axis>,
    strides: Vec<usize>,
    len: usize,
}

impl LatticeChart {
    pub fn new(spec: ChartSpec) -> Result<Self, LatticeError> {
        if !(1..=2).contains(&spec.torus_dim) && !(spec.cylinder.is_none() && spec.torus_dim == 3) {
            return Err(LatticeError::InvalidChart(format!("torus dimension {}", spec.torus_dim)));
        }
        if spec.torus_n < 3 || !(spec.torus_len > 0.0) {
            return Err(LatticeError::InvalidChart("torus needs n ≥ 3 and positive period".into()));
        }
        let mut axes = Vec::new();
        if let Some((ns, s_len, na)) = spec.cylinder {
            if ns < 3 || !(s_len > 0.0) || na == 0 {
                return Err(LatticeError::InvalidChart("cylinder needs N_s ≥ 3, S > 0, N_α ≥ 1".into()));
            }
            axes.push(Axis { n: ns + 1, h: s_len / ns as f64, periodic: false });
            axes.push(Axis { n: na, h: std::f64::consts::TAU / na as f64, periodic: true });
        }
        let ht = spec.torus_len / spec.torus_n as f64;
        for _ in 0..2 * spec.torus_dim {
            axes.push(Axis { n: spec.torus_n, h: ht, periodic: true });
        }
        let mut strides = vec![1; axes.len()];
        for k in (0..axes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * axes[k + 1].n;
        }
        let len = axes.iter().map(|a| a.n).product();
        Ok(LatticeChart { spec, axes, strides, len })
    }

    /// Torus-only chart with `n` sites of spacing `2π/n` per real direction.
    pub fn torus(torus_dim: usize, n: usize) -> Result<Self, LatticeError> {
        Self::new(ChartSpec {
            torus_dim,
            torus_n: n,
            torus_len: std::f64::consts::TAU,
            cylinder: None,
        })
    }

    /// Cylinder × torus with the torus period fixed to 2π.
    pub fn cylinder(torus_dim: usize, torus_n: usize, ns: usize, s_len: f64, na: usize) -> Result<Self, LatticeError> {
        Self::new(ChartSpec {
            torus_dim,
            torus_n,
            torus_len: std::f64::consts::TAU,
            cylinder: Some((ns, s_len, na)),
        })
    }

    pub fn spec(&self) -> &ChartSpec {
        &self.spec
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, mu: usize) -> Axis {
        self.axes[mu]
    }

    /// Number of sites.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn has_cylinder(&self) -> bool {
        self.spec.cylinder.is_some()
    }

    /// Total complex dimension `n`.
    pub fn complex_dim(&self) -> usize {
        self.axes.len() / 2
    }

    /// Complex directions belonging to the torus cross-section.
    pub fn torus_directions(&self) -> std::ops::Range<usize> {
        let first = usize::from(self.has_cylinder());
        first..self.complex_dim()
    }

    /// Volume of one lattice cell.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.h).product()
    }

    /// Volume of the torus cross-section.
    pub fn torus_volume(&self) -> f64 {
        self.spec.torus_len.powi(2 * self.spec.torus_dim as i32)
    }

    /// Cell volume of one torus slice.
    pub fn torus_cell_volume(&self) -> f64 {
        (self.spec.torus_len / self.spec.torus_n as f64).powi(2 * self.spec.torus_dim as i32)
    }

    /// Multi-index of a site.
    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut rest = site;
        self.strides
            .iter()
            .map(|&st| {
                let c = rest / st;
                rest %= st;
                c
            })
            .collect()
    }

    pub fn coord(&self, site: usize, mu: usize) -> usize {
        (site / self.strides[mu]) % self.axes[mu].n
    }

    pub fn site(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    /// Neighbour `site + step·e_μ`; wraps on periodic axes, `None` past an
    /// open end.
    pub fn shift(&self, site: usize, mu: usize, step: isize) -> Option<usize> {
        let ax = self.axes[mu];
        let c = self.coord(site, mu) as isize;
        let mut t = c + step;
        if ax.periodic {
            t = t.rem_euclid(ax.n as isize);
        } else if t < 0 || t >= ax.n as isize {
            return None;
        }
        Some((site as isize + (t - c) * self.strides[mu] as isize) as usize)
    }

    /// Real coordinate of a site along axis μ.
    pub fn position(&self, site: usize, mu: usize) -> f64 {
        self.coord(site, mu) as f64 * self.axes[mu].h
    }

    /// `s` coordinate (0 on torus-only charts).
    pub fn s_of(&self, site: usize) -> f64 {
        if self.has_cylinder() {
            self.position(site, 0)
        } else {
            0.0
        }
    }

    /// Index of the `s` slice containing the site.
    pub fn s_index(&self, site: usize) -> usize {
        if self.has_cylinder() {
            self.coord(site, 0)
        } else {
            0
        }
    }

    /// Number of `s` slices (1 on torus-only charts).
    pub fn n_slices(&self) -> usize {
        if self.has_cylinder() {
            self.axes[0].n
        } else {
            1
        }
    }

    /// Whether the site lies on a Dirichlet slice `s = 0` or `s = S`.
    pub fn is_boundary(&self, site: usize) -> bool {
        self.has_cylinder() && {
            let c = self.coord(site, 0);
            c == 0 || c + 1 == self.axes[0].n
        }
    }

    /// Quadrature weight of a site: the cell volume, halved on the Dirichlet
    /// slices (trapezoid rule in `s`).
    pub fn weight(&self, site: usize) -> f64 {
        let w = self.cell_volume();
        if self.is_boundary(site) {
            0.5 * w
        } else {
            w
        }
    }

    /// Sites of the `s` slice with the given index.
    pub fn slice_sites(&self, s_idx: usize) -> std::ops::Range<usize> {
        if !self.has_cylinder() {
            return 0..self.len;
        }
        let st = self.strides[0];
        s_idx * st..(s_idx + 1) * st
    }

    /// Sites of the torus cross-section `{s = s_idx, α = a_idx}`.
    pub fn cross_section_sites(&self, s_idx: usize, a_idx: usize) -> std::ops::Range<usize> {
        if !self.has_cylinder() {
            return 0..self.len;
        }
        let base = s_idx * self.strides[0] + a_idx * self.strides[1];
        base..base + self.strides[1]
    }

    /// Torus-only chart matching one cross-section.
    pub fn cross_section_chart(&self) -> LatticeChart {
        LatticeChart::new(ChartSpec {
            torus_dim: self.spec.torus_dim,
            torus_n: self.spec.torus_n,
            torus_len: self.spec.torus_len,
            cylinder: None,
        })
        .expect("cross-section of a valid chart")
    }

    /// Largest stable explicit step of the linearised flow,
    /// `1 / (2 Σ_μ h_μ⁻²)` over active axes.
    pub fn cfl_limit(&self) -> f64 {
        let s: f64 = self.axes.iter().filter(|a| a.is_active()).map(|a| a.h.powi(-2)).sum();
        0.5 / s
    }

    /// Smallest active spacing.
    pub fn min_spacing(&self) -> f64 {
        self.axes
            .iter()
            .filter(|a| a.is_active())
            .map(|a| a.h)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `(n−1)!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}
