//! The Donaldson functional on lattice metrics.
//!
//! [`LatticeFunctional`] is a closed-form discrete functional whose exact
//! differential is the discrete `ρ`; its gradient defines the HYM operator
//! `F̂_h` used by the flow. Path integrals of `ρ` are computed by composite
//! Simpson quadrature and compared against the closed form.

mod functional;
mod psi;

pub use functional::LatticeFunctional;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cmat::{CMat, C64};
use crate::lattice_model::{CurvatureField, EndoField, LatticeError};
use crate::numerics::simpson;

/// Default number of quadrature nodes along a path.
pub const DEFAULT_SAMPLES: usize = 33;
/// Largest node count tried before quadrature is reported as unconverged.
const MAX_SAMPLES: usize = 1025;

#[derive(Debug, Error)]
pub enum DonaldsonError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("metric is outside the domain where log(H₀⁻¹H) is defined by a convergent series (sup ‖H₀⁻¹H − 1‖ = {0})")]
    NotNearby(f64),
    #[error("quadrature did not converge: last change {change} with {samples} nodes")]
    QuadratureNotConverged { change: f64, samples: usize },
    #[error("path needs at least {0} samples")]
    TooFewSamples(usize),
}

/// `θ_H(k) = 2i tr(H⁻¹ k F_H)`, a scalar `(1,1)`-form per site.
pub fn theta_eval(h: &EndoField, k: &EndoField, f: &CurvatureField) -> CurvatureField {
    let comps = f
        .comps
        .iter()
        .map(|fc| {
            EndoField::from_fn(1, h.len(), |x| {
                let hinv = h[x].inverse().expect("metric must be invertible");
                CMat::scalar(1, (hinv * k[x] * fc[x]).trace() * C64::new(0.0, 2.0))
            })
        })
        .collect();
    CurvatureField { n: f.n, comps }
}

/// A path of metrics starting at some `H`.
#[derive(Clone, Debug)]
pub enum MetricPath {
    /// `ℓ ↦ K e^{ℓη}` with `e^η = K⁻¹H`.
    Geodesic { start: EndoField, end: EndoField },
    /// Geodesic legs through the listed metrics in order.
    Polygon(Vec<EndoField>),
    /// Metrics recorded at equally spaced parameter values (for instance a
    /// flow trajectory); derivatives are taken by finite differences.
    Recorded(Vec<EndoField>),
}

/// Point and velocity of the geodesic `K e^{ℓη}` at `ℓ`.
fn geodesic_point(start: &EndoField, end: &EndoField, l: f64) -> (EndoField, EndoField) {
    let r = start.rank();
    let pairs: Vec<(CMat, CMat)> = (0..start.len())
        .into_par_iter()
        .map(|x| {
            let k = start[x].eigh();
            let kh = k.apply(f64::sqrt);
            let kmh = k.apply(|v| 1.0 / v.sqrt());
            let q = (kmh * end[x] * kmh).hermitian_part().eigh();
            let eta = q.apply(f64::ln);
            let pt = q.apply(|v| v.powf(l));
            let h = (kh * pt * kh).hermitian_part();
            let dh = (kh * eta * pt * kh).hermitian_part();
            (h, dh)
        })
        .collect();
    let (h, dh): (Vec<CMat>, Vec<CMat>) = pairs.into_iter().unzip();
    (EndoField::from_vec(r, h), EndoField::from_vec(r, dh))
}

impl MetricPath {
    /// Composite Simpson integral of `ρ` along one geodesic with `samples` nodes.
    fn geodesic_integral(f: &LatticeFunctional, a: &EndoField, b: &EndoField, samples: usize) -> Result<f64, LatticeError> {
        let vals: Vec<f64> = (0..samples)
            .map(|i| {
                let l = i as f64 / (samples - 1) as f64;
                let (h, dh) = geodesic_point(a, b, l);
                f.rho(&h, &dh)
            })
            .collect::<Result<_, _>>()?;
        Ok(simpson(&vals, 1.0))
    }

    fn integral(&self, f: &LatticeFunctional, samples: usize) -> Result<f64, DonaldsonError> {
        match self {
            MetricPath::Geodesic { start, end } => Ok(Self::geodesic_integral(f, start, end, samples)?),
            MetricPath::Polygon(pts) => {
                let mut s = 0.0;
                for w in pts.windows(2) {
                    s += Self::geodesic_integral(f, &w[0], &w[1], samples)?;
                }
                Ok(s)
            }
            MetricPath::Recorded(pts) => {
                let m = pts.len();
                if m < 3 {
                    return Err(DonaldsonError::TooFewSamples(3));
                }
                let dl = 1.0 / (m - 1) as f64;
                let vals: Vec<f64> = (0..m)
                    .map(|i| {
                        let v = if i == 0 {
                            pts[1].scale(4.0).sub(&pts[0].scale(3.0)).sub(&pts[2])
                        } else if i == m - 1 {
                            pts[m - 1].scale(3.0).sub(&pts[m - 2].scale(4.0)).add(&pts[m - 3])
                        } else {
                            pts[i + 1].sub(&pts[i - 1])
                        };
                        f.rho(&pts[i], &v.scale(0.5 / dl))
                    })
                    .collect::<Result<_, _>>()?;
                if m % 2 == 1 {
                    Ok(simpson(&vals, 1.0))
                } else {
                    let trap: f64 = vals.windows(2).map(|w| 0.5 * (w[0] + w[1]) * dl).sum();
                    Ok(trap)
                }
            }
        }
    }
}

/// Result of [`n_functional`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NValue {
    pub value: f64,
    /// Nodes per geodesic leg in the accepted evaluation.
    pub samples: usize,
    /// Change from the previous (half as fine) evaluation.
    pub change: f64,
}

/// `𝒩 = ∫_γ ρ` by composite Simpson quadrature, doubling the node count until
/// successive values agree to `1e−6·(1 + |𝒩|)`. Recorded paths are integrated
/// once at their own resolution.
pub fn n_functional(f: &LatticeFunctional, path: &MetricPath, samples: usize) -> Result<NValue, DonaldsonError> {
    if samples < 3 || samples % 2 == 0 {
        return Err(DonaldsonError::TooFewSamples(3));
    }
    if let MetricPath::Recorded(p) = path {
        let v = path.integral(f, p.len())?;
        return Ok(NValue { value: v, samples: p.len(), change: f64::NAN });
    }
    let mut n = samples;
    let mut prev = path.integral(f, n)?;
    loop {
        let next_n = 2 * n - 1;
        let next = path.integral(f, next_n)?;
        let change = (next - prev).abs();
        if change <= 1e-6 * (1.0 + next.abs()) {
            return Ok(NValue { value: prev, samples: n, change });
        }
        if next_n >= MAX_SAMPLES {
            return Err(DonaldsonError::QuadratureNotConverged { change, samples: next_n });
        }
        n = next_n;
        prev = next;
    }
}

/// `sup_x ‖H₀⁻¹H − 1‖` (operator norm), the guard for "nearby" metrics.
pub fn distance_guard(h0: &EndoField, h: &EndoField) -> f64 {
    h0.as_slice()
        .par_iter()
        .zip(h.as_slice())
        .map(|(k, m)| {
            let e = k.eigh();
            let kmh = e.apply(|v| 1.0 / v.sqrt());
            let q = (kmh * *m * kmh).hermitian_part().eigh();
            q.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Path-independence report.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PathIndependence {
    /// `𝒩` along the geodesic `H₀ → H`.
    pub geodesic: f64,
    /// `𝒩` along `H₀ → K → H`.
    pub two_leg: f64,
    /// Closed-form value `M(H)`.
    pub closed_form: f64,
    pub discrepancy: f64,
}

/// Compares `𝒩(H)` along the geodesic from `H₀` and along two geodesic legs
/// through `via`. Both `H` and `via` must satisfy `sup‖H₀⁻¹H − 1‖ < 1`.
pub fn path_independence_check(
    f: &LatticeFunctional,
    h: &EndoField,
    via: &EndoField,
    samples: usize,
) -> Result<PathIndependence, DonaldsonError> {
    let h0 = f.reference();
    for m in [h, via] {
        let d = distance_guard(&h0, m);
        if d >= 1.0 {
            return Err(DonaldsonError::NotNearby(d));
        }
    }
    let geodesic = n_functional(f, &MetricPath::Geodesic { start: h0.clone(), end: h.clone() }, samples)?.value;
    let two_leg = n_functional(f, &MetricPath::Polygon(vec![h0, via.clone(), h.clone()]), samples)?.value;
    Ok(PathIndependence { geodesic, two_leg, closed_form: f.value(h)?, discrepancy: (geodesic - two_leg).abs() })
}

/// One sample of `m(ℓ) = 𝒩(H₀e^{ℓξ})` and its derivatives.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvexitySample {
    pub l: f64,
    pub m: f64,
    pub dm: f64,
    pub d2m: f64,
}

/// Samples `m`, `m′ = ρ(γ′)` and `m″` (central difference of `m′`) along the
/// geodesic from the reference metric of `f` to `h`, at `samples` equally
/// spaced `ℓ ∈ [0, 1]`.
pub fn m_convexity(f: &LatticeFunctional, h: &EndoField, samples: usize) -> Result<Vec<ConvexitySample>, LatticeError> {
    let h0 = f.reference();
    let dm = |l: f64| -> Result<f64, LatticeError> {
        let (p, v) = geodesic_point(&h0, h, l);
        f.rho(&p, &v)
    };
    let step = 1e-4;
    (0..samples)
        .map(|i| {
            let l = i as f64 / (samples.max(2) - 1) as f64;
            let (p, _) = geodesic_point(&h0, h, l);
            let d2m = (dm(l + step)? - dm(l - step)?) / (2.0 * step);
            Ok(ConvexitySample { l, m: f.value(&p)?, dm: dm(l)?, d2m })
        })
        .collect()
}

/// `𝒩_{D_z}(H)` for the slice functional `f`, with `h` given on the parent
/// chart. Since `ρ` is the exact differential of the closed form, the line
/// integral from `H₀` equals `M(H)` on any path.
pub fn n_slice(f: &LatticeFunctional, h: &EndoField) -> Result<f64, LatticeError> {
    f.value(&f.restrict(h))
}

/// `c_n = 4(n−1)!`: along the flow `H⁻¹Ḣ = −2iF̂`,
/// `d𝒩/dt = −c_n ‖F̂‖²_{L²}`.
pub fn flow_constant(n: usize) -> f64 {
    4.0 * crate::lattice_model::factorial(n - 1)
}
