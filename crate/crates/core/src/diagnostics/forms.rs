//! Matrix-valued 2-forms on ℝ⁷ in floating point, and the two algebraic
//! energy identities evaluated on them.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::Rng;

use crate::cmat::{CMat, C64};
use crate::exact::to_f64;
use crate::g2_algebra::{
    dz, kahler_slots, kahler_to_g2_frame, phi0, t_matrix_f64, two_form_basis, wedge_sign, ComplexForm,
    ExteriorElement, PHI0_ORIENTATION,
};
use crate::lattice_model::factorial;

/// Largest complex dimension that fits the seven real slots.
pub const MAX_KAHLER_DIM: usize = 3;

/// An `End E`-valued 2-form `Σ_I F_I e^I` over the 21 basis 2-forms of ℝ⁷
/// (order of [`two_form_basis`]).
#[derive(Clone, Debug, PartialEq)]
pub struct MatTwoForm {
    pub rank: usize,
    pub comps: Vec<CMat>,
}

fn basis_masks() -> &'static [u8] {
    static B: OnceLock<Vec<u8>> = OnceLock::new();
    B.get_or_init(two_form_basis)
}

fn basis_index(mask: u8) -> usize {
    basis_masks().iter().position(|&m| m == mask).expect("mask of a basis 2-form")
}

/// Coefficients of an exact real 2-form in the basis order.
fn two_form_coeffs(e: &ExteriorElement) -> Vec<(usize, f64)> {
    e.terms().filter(|(_, c)| !num_traits::Zero::is_zero(*c)).map(|(m, c)| (basis_index(m), to_f64(c))).collect()
}

/// `dz^j ∧ dz̄^k` (1-based `j, k`) as complex coefficients in the basis, either
/// in Kähler slots or rewritten in the G₂ frame.
fn dzdzbar_table(g2_frame: bool) -> &'static Vec<Vec<(usize, C64)>> {
    static KAHLER: OnceLock<Vec<Vec<(usize, C64)>>> = OnceLock::new();
    static G2: OnceLock<Vec<Vec<(usize, C64)>>> = OnceLock::new();
    let build = move || {
        let mut out = Vec::new();
        for j in 1..=MAX_KAHLER_DIM {
            for k in 1..=MAX_KAHLER_DIM {
                let a = dz(j);
                let b = dz(k);
                let bbar = ComplexForm { re: b.re.clone(), im: b.im.scale(&crate::exact::rat(-1)) };
                let w = a.wedge(&bbar);
                let (re, im) = if g2_frame {
                    (kahler_to_g2_frame(&w.re), kahler_to_g2_frame(&w.im))
                } else {
                    (w.re, w.im)
                };
                let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
                for (i, c) in two_form_coeffs(&re) {
                    *acc.entry(i).or_default() += C64::new(c, 0.0);
                }
                for (i, c) in two_form_coeffs(&im) {
                    *acc.entry(i).or_default() += C64::new(0.0, c);
                }
                out.push(acc.into_iter().collect());
            }
        }
        out
    };
    if g2_frame {
        G2.get_or_init(build)
    } else {
        KAHLER.get_or_init(build)
    }
}

impl MatTwoForm {
    pub fn zero(rank: usize) -> Self {
        MatTwoForm { rank, comps: vec![CMat::zeros(rank); 21] }
    }

    /// `Σ_{jk} F_{jk̄} dz^j∧dz̄^k` from row-major components (`n ≤ 3`), with
    /// `dz^j = dx^j + i dy^j` placed in the Kähler coordinate slots; with
    /// `g2_frame` the result is rewritten in the G₂ frame.
    pub fn from_kahler(n: usize, rank: usize, f: &[CMat], g2_frame: bool) -> Self {
        assert!(n <= MAX_KAHLER_DIM && f.len() == n * n);
        let table = dzdzbar_table(g2_frame);
        let mut out = Self::zero(rank);
        for j in 0..n {
            for k in 0..n {
                for &(i, c) in &table[j * MAX_KAHLER_DIM + k] {
                    out.comps[i] += f[j * n + k].scale_c(c);
                }
            }
        }
        out
    }

    /// `Σ_I tr(F_I F_I†)`.
    pub fn norm_sq(&self) -> f64 {
        self.comps.iter().map(CMat::norm_sq).sum()
    }

    /// Applies a real 21×21 matrix componentwise (`(AF)_r = Σ_c A_rc F_c`).
    fn apply(&self, a: &[[f64; 21]; 21]) -> Self {
        let comps = (0..21)
            .map(|r| {
                (0..21).fold(CMat::zeros(self.rank), |acc, c| {
                    if a[r][c] == 0.0 {
                        acc
                    } else {
                        acc + self.comps[c].scale(a[r][c])
                    }
                })
            })
            .collect();
        MatTwoForm { rank: self.rank, comps }
    }

    /// Λ²₊ ⊕ Λ²₋ parts: `(T+1)F/3` and `(2−T)F/3`.
    pub fn g2_split(&self) -> (Self, Self) {
        let t = t_matrix_f64();
        let plus: [[f64; 21]; 21] =
            std::array::from_fn(|r| std::array::from_fn(|c| (t[r][c] + if r == c { 1.0 } else { 0.0 }) / 3.0));
        let minus: [[f64; 21]; 21] =
            std::array::from_fn(|r| std::array::from_fn(|c| (if r == c { 2.0 } else { 0.0 } - t[r][c]) / 3.0));
        (self.apply(&plus), self.apply(&minus))
    }

    /// The 4-form `tr(F∧F)` as `mask ↦ coefficient`.
    pub fn tr_square(&self) -> BTreeMap<u8, C64> {
        let masks = basis_masks();
        let mut out = BTreeMap::new();
        for (a, &ma) in masks.iter().enumerate() {
            for (b, &mb) in masks.iter().enumerate() {
                if ma & mb != 0 {
                    continue;
                }
                let v = (self.comps[a] * self.comps[b]).trace() * wedge_sign(ma, mb) as f64;
                *out.entry(ma | mb).or_insert(C64::new(0.0, 0.0)) += v;
            }
        }
        out
    }
}

/// Wedge of two scalar forms given as `mask ↦ coefficient`.
pub fn wedge_scalar(a: &BTreeMap<u8, C64>, b: &BTreeMap<u8, C64>) -> BTreeMap<u8, C64> {
    let mut out = BTreeMap::new();
    for (&ma, &ca) in a {
        for (&mb, &cb) in b {
            if ma & mb == 0 {
                *out.entry(ma | mb).or_insert(C64::new(0.0, 0.0)) += ca * cb * wedge_sign(ma, mb) as f64;
            }
        }
    }
    out
}

fn real_form(e: &ExteriorElement) -> BTreeMap<u8, C64> {
    e.terms().map(|(m, c)| (m, C64::new(to_f64(c), 0.0))).collect()
}

/// Pointwise Chern–Weil densities of one lifted curvature value.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct ChernWeilDensity {
    pub f_plus_sq: f64,
    pub f_minus_sq: f64,
    /// `|F|²` computed directly from the components.
    pub ym: f64,
    /// Coefficient of `tr(F∧F)∧φ₀` against the volume form of φ₀'s orientation.
    pub kappa: f64,
}

/// Evaluates `|F^±|²`, `|F|²` and the `tr F²∧φ₀` density. The wedge is
/// evaluated directly and is independent of the projectors.
pub fn chern_weil_density(f: &MatTwoForm) -> ChernWeilDensity {
    static PHI: OnceLock<BTreeMap<u8, C64>> = OnceLock::new();
    let phi = PHI.get_or_init(|| real_form(&phi0()));
    let (p, m) = f.g2_split();
    let top = wedge_scalar(&f.tr_square(), phi);
    let vol = top.get(&crate::g2_algebra::TOP).copied().unwrap_or_default();
    ChernWeilDensity {
        f_plus_sq: p.norm_sq(),
        f_minus_sq: m.norm_sq(),
        ym: f.norm_sq(),
        kappa: PHI0_ORIENTATION as f64 * vol.re,
    }
}

/// Both sides of `tr F²∧ω^{n−2} = [(n−2)!|F^⊥|² − (n−1)!|F̂|²/n]·vol` for a form in
/// Kähler slots, `ω = Σ dx^j∧dy^j`, `F̂ = ΛF`, `F = (F̂/n)ω + F^⊥`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct HodgeRiemann {
    pub lhs: f64,
    pub rhs: f64,
    pub perp_sq: f64,
    pub fhat_sq: f64,
}

impl HodgeRiemann {
    /// `|lhs − rhs| / max(|F|², tiny)`.
    pub fn relative_residual(&self) -> f64 {
        let scale = (self.perp_sq + self.fhat_sq).max(1e-300);
        (self.lhs - self.rhs).abs() / scale
    }
}

pub fn hodge_riemann(n: usize, f: &MatTwoForm) -> HodgeRiemann {
    assert!((2..=MAX_KAHLER_DIM).contains(&n));
    let kahler_pairs: Vec<usize> = (1..=n)
        .map(|j| basis_index((1u8 << (kahler_slots::x(j) - 1)) | (1u8 << (kahler_slots::y(j) - 1))))
        .collect();
    let fhat = kahler_pairs.iter().fold(CMat::zeros(f.rank), |acc, &i| acc + f.comps[i]);
    let mut perp = f.clone();
    for &i in &kahler_pairs {
        perp.comps[i] -= fhat.scale(1.0 / n as f64);
    }
    let omega: BTreeMap<u8, C64> = kahler_pairs.iter().map(|&i| (basis_masks()[i], C64::new(1.0, 0.0))).collect();
    let mut acc = f.tr_square();
    for _ in 2..n {
        acc = wedge_scalar(&acc, &omega);
    }
    let vol_mask = ((1u16 << (2 * n)) - 1) as u8;
    let lhs = acc.get(&vol_mask).copied().unwrap_or_default().re;
    let perp_sq = perp.norm_sq();
    let fhat_sq = fhat.norm_sq();
    let rhs = factorial(n - 2) * perp_sq - factorial(n - 1) * fhat_sq / n as f64;
    HodgeRiemann { lhs, rhs, perp_sq, fhat_sq }
}

/// Random components `F_{jk̄}` with `F_{kj̄} = F_{jk̄}†`, so that the 2-form is
/// anti-Hermitian (the curvature of a unitary connection in a unitary frame).
pub fn random_kahler_curvature<R: Rng>(n: usize, rank: usize, rng: &mut R) -> Vec<CMat> {
    let mut f = vec![CMat::zeros(rank); n * n];
    for j in 0..n {
        for k in j..n {
            let m = CMat::from_fn(rank, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            if j == k {
                f[j * n + j] = m.hermitian_part();
            } else {
                f[j * n + k] = m;
                f[k * n + j] = m.adjoint();
            }
        }
    }
    f
}
