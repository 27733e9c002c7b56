use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{calculus::dzbar, EndoField, LatticeChart, OneFormField};
use crate::cmat::{CMat, C64};

/// Profile in `s` multiplying the twist generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Envelope {
    /// `e^{−rate·s}`.
    Exp { rate: f64 },
    /// `exp(−((s − center)/width)²)`.
    Bump { center: f64, width: f64 },
    Uniform,
}

impl Envelope {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            Envelope::Exp { rate } => (-rate * s).exp(),
            Envelope::Bump { center, width } => (-((s - center) / width).powi(2)).exp(),
            Envelope::Uniform => 1.0,
        }
    }
}

/// Parameters of a random integrable twist `a = g⁻¹∂̄g`, `g = exp(env(s)·X)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistSpec {
    pub rank: usize,
    /// Scale of the generator `X`.
    pub amplitude: f64,
    /// Number of Fourier modes in `X`.
    pub modes: usize,
    pub envelope: Envelope,
    pub seed: u64,
}

/// A `(0,1)`-form `a` defining `∂̄_a = ∂̄ + a` on the trivial bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct HolomorphicTwist {
    /// `a.comps[k]` is the coefficient of `dz̄ᵏ`.
    pub a: OneFormField,
    /// The complex gauge `g` when the twist was built as `g⁻¹∂̄g`.
    pub gauge: Option<EndoField>,
}

impl HolomorphicTwist {
    pub fn zero(chart: &LatticeChart, rank: usize) -> Self {
        HolomorphicTwist { a: OneFormField::zeros(chart.complex_dim(), rank, chart.len()), gauge: None }
    }

    /// `a_k = g⁻¹ ∂̄_k g` for a given complex gauge field.
    pub fn from_gauge(chart: &LatticeChart, g: EndoField) -> Self {
        let ginv = g.map(|m| m.inverse().expect("gauge must be invertible"));
        let comps = (0..chart.complex_dim())
            .map(|k| {
                let d = dzbar(chart, &g, k);
                ginv.zip_map(&d, |a, b| *a * *b)
            })
            .collect();
        HolomorphicTwist { a: OneFormField { comps }, gauge: Some(g) }
    }

    /// Random twist from a seeded trigonometric generator.
    pub fn from_spec(chart: &LatticeChart, spec: &TwistSpec) -> Self {
        let r = spec.rank;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let n_axes = chart.axes().len();
        let first_torus = if chart.has_cylinder() { 2 } else { 0 };
        let len = chart.spec().torus_len;
        struct Mode {
            k: Vec<f64>,
            phase: f64,
            coef: CMat,
        }
        let modes: Vec<Mode> = (0..spec.modes)
            .map(|_| {
                let mut k = vec![0.0; n_axes];
                for (mu, kmu) in k.iter_mut().enumerate() {
                    if mu >= first_torus {
                        *kmu = rng.gen_range(-1i32..=1) as f64 * std::f64::consts::TAU / len;
                    } else if mu == 1 && chart.axis(1).is_active() {
                        *kmu = rng.gen_range(-1i32..=1) as f64;
                    }
                }
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                let coef = CMat::from_fn(r, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                Mode { k, phase, coef }
            })
            .collect();
        let norm = spec.amplitude / (spec.modes.max(1) as f64).sqrt();
        let g = EndoField::from_fn(r, chart.len(), |x| {
            let mut xm = CMat::zeros(r);
            for m in &modes {
                let arg: f64 = m.phase + (0..n_axes).map(|mu| m.k[mu] * chart.position(x, mu)).sum::<f64>();
                xm += m.coef.scale(arg.cos());
            }
            let env = spec.envelope.eval(chart.s_of(x));
            xm.scale(norm * env).expm()
        });
        Self::from_gauge(chart, g)
    }

    pub fn rank(&self) -> usize {
        self.a.rank()
    }

    /// Largest `‖∂̄_k a_l − ∂̄_l a_k + [a_k, a_l]‖` over sites and pairs.
    pub fn integrability_residual(&self, chart: &LatticeChart) -> f64 {
        let n = chart.complex_dim();
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for l in (k + 1)..n {
                let dk = dzbar(chart, &self.a.comps[l], k);
                let dl = dzbar(chart, &self.a.comps[k], l);
                let ak = &self.a.comps[k];
                let al = &self.a.comps[l];
                for x in 0..chart.len() {
                    let res = dk[x] - dl[x] + ak[x].commutator(&al[x]);
                    worst = worst.max(res.norm());
                }
            }
        }
        worst
    }

    /// `sup` of `Σ_k |a_k|` over each `s` slice.
    pub fn slice_profile(&self, chart: &LatticeChart) -> Vec<f64> {
        (0..chart.n_slices())
            .map(|si| {
                chart
                    .slice_sites(si)
                    .map(|x| self.a.comps.iter().map(|c| c[x].norm_sq()).sum::<f64>().sqrt())
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

/// Random smooth Hermitian field `Σ cos(k·x + φ) B` with `modes` terms of
/// amplitude `amplitude/√modes`; torus wave numbers in `{−1,0,1}·2π/L`, and
/// on the cylinder a slow `s` profile `cos(π s k_s / S)`.
pub fn smooth_hermitian(chart: &LatticeChart, rank: usize, amplitude: f64, modes: usize, seed: u64) -> EndoField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_axes = chart.axes().len();
    let first_torus = if chart.has_cylinder() { 2 } else { 0 };
    let len = chart.spec().torus_len;
    let s_len = chart.spec().cylinder.map_or(1.0, |c| c.1);
    let terms: Vec<(Vec<f64>, f64, CMat)> = (0..modes)
        .map(|_| {
            let k: Vec<f64> = (0..n_axes)
                .map(|mu| {
                    let q = rng.gen_range(-1i32..=1) as f64;
                    if mu >= first_torus {
                        q * std::f64::consts::TAU / len
                    } else if mu == 0 {
                        q * std::f64::consts::PI / s_len
                    } else if chart.axis(1).is_active() {
                        q
                    } else {
                        0.0
                    }
                })
                .collect();
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let b = CMat::from_fn(rank, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            (k, phase, b.hermitian_part())
        })
        .collect();
    let norm = amplitude / (modes.max(1) as f64).sqrt();
    EndoField::from_fn(rank, chart.len(), |x| {
        let mut m = CMat::zeros(rank);
        for (k, phase, b) in &terms {
            let arg: f64 = phase + (0..n_axes).map(|mu| k[mu] * chart.position(x, mu)).sum::<f64>();
            m += b.scale(norm * arg.cos());
        }
        m
    })
}

/// `exp` of [`smooth_hermitian`]: a random smooth metric.
pub fn smooth_metric(chart: &LatticeChart, rank: usize, amplitude: f64, modes: usize, seed: u64) -> EndoField {
    smooth_hermitian(chart, rank, amplitude, modes, seed).map(|m| m.eigh().apply(f64::exp))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twist_decays_with_exponential_envelope() {
        let ch = LatticeChart::cylinder(1, 8, 32, 8.0, 1).unwrap();
        let spec = TwistSpec { rank: 2, amplitude: 0.3, modes: 3, envelope: Envelope::Exp { rate: 1.0 }, seed: 5 };
        let tw = HolomorphicTwist::from_spec(&ch, &spec);
        let prof = tw.slice_profile(&ch);
        assert!(prof[4] > 0.0);
        for s in 4..28 {
            let s_val = s as f64 * 0.25;
            assert!(prof[s] <= 1.5 * (-s_val).exp() * prof[4] / (-1.0f64).exp(), "slice {s}");
        }
    }

    #[test]
    fn integrability_residual_is_second_order() {
        let spec = TwistSpec { rank: 2, amplitude: 0.4, modes: 3, envelope: Envelope::Uniform, seed: 3 };
        let res: Vec<f64> = [8, 16]
            .iter()
            .map(|&n| {
                let ch = LatticeChart::torus(2, n).unwrap();
                HolomorphicTwist::from_spec(&ch, &spec).integrability_residual(&ch)
            })
            .collect();
        assert!(res[1] < res[0] / 3.0, "{res:?}");
    }
}
