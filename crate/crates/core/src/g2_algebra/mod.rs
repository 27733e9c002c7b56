//! Exact G₂ linear algebra on ℝ⁷.
//!
//! The model 3-form is
//!
//! ```text
//! φ₀ = (e¹²−e³⁴)∧e⁵ + (e¹³−e⁴²)∧e⁶ + (e¹⁴−e²³)∧e⁷ + e⁵⁶⁷
//! ```
//!
//! and everything else — the cross product, the induced metric, the octonion
//! product, the operator `T η = *(η∧φ₀)` on 2-forms and its eigenspace split
//! Λ² = Λ²₊ ⊕ Λ²₋ (eigenvalues 2 and −1, dimensions 7 and 14) — is derived
//! from it with exact rational arithmetic so that eigenspace membership is
//! decided without rounding.

pub mod exterior;

use num_rational::BigRational;
use num_traits::{One, Zero};

pub use exterior::{wedge_sign, ExteriorElement, FormError, Vector7, DIM, TOP};

use crate::exact::{rank, rat, ratio, to_f64, RatMatrix};

/// Normalisation constant relating `(a⌟φ₀)∧(b⌟φ₀)∧φ₀` to `⟨a,b⟩ e^{1…7}`.
///
/// Fixed by evaluating the raw wedge on `(v₁, v₁)`; see [`metric_calibration`].
/// It is negative because φ₀ induces the orientation `−e^{1…7}`, opposite to
/// the one used by [`hodge_star`]. Its magnitude 6 is the usual factor for the
/// positive-orientation identity.
pub const METRIC_NORMALISATION: i64 = -6;

/// Sign of the volume form induced by φ₀ relative to `e^{1…7}`.
///
/// The written-out [`star_phi0`] is the Euclidean star for `e^{1…7}`, while the
/// G₂ identities (metric, eigenvalues of `T`, Kähler lift) hold for the
/// orientation of φ₀ itself, which is the opposite one.
pub const PHI0_ORIENTATION: i64 = -1;

/// The G₂ 3-form φ₀.
pub fn phi0() -> ExteriorElement {
    let e = ExteriorElement::basis;
    let terms = [
        e(&[1, 2, 5]),
        -&e(&[3, 4, 5]),
        e(&[1, 3, 6]),
        -&e(&[4, 2, 6]),
        e(&[1, 4, 7]),
        -&e(&[2, 3, 7]),
        e(&[5, 6, 7]),
    ];
    terms.iter().fold(ExteriorElement::zero(), |acc, t| &acc + t)
}

/// The 4-form *φ₀ written out term by term:
///
/// ```text
/// *φ₀ = (e³⁴−e¹²)∧e⁶⁷ + (e⁴²−e¹³)∧e⁷⁵ + (e²³−e¹⁴)∧e⁵⁶ + e¹²³⁴
/// ```
pub fn star_phi0() -> ExteriorElement {
    let e = ExteriorElement::basis;
    let terms = [
        e(&[3, 4, 6, 7]),
        -&e(&[1, 2, 6, 7]),
        e(&[4, 2, 7, 5]),
        -&e(&[1, 3, 7, 5]),
        e(&[2, 3, 5, 6]),
        -&e(&[1, 4, 5, 6]),
        e(&[1, 2, 3, 4]),
    ];
    terms.iter().fold(ExteriorElement::zero(), |acc, t| &acc + t)
}

/// The volume form `e^{1…7}`.
pub fn volume_form() -> ExteriorElement {
    ExteriorElement::basis(&[1, 2, 3, 4, 5, 6, 7])
}

/// `α_i = v_i ⌟ φ₀`, the spanning set of Λ²₊.
pub fn alpha(i: usize) -> ExteriorElement {
    phi0().contract(&Vector7::basis(i))
}

/// `x ⌟ a`.
pub fn contract(x: &Vector7, a: &ExteriorElement) -> ExteriorElement {
    a.contract(x)
}

/// `a ∧ b`.
pub fn wedge(a: &ExteriorElement, b: &ExteriorElement) -> ExteriorElement {
    a.wedge(b)
}

/// Euclidean Hodge star, orientation `e^{1…7}`.
pub fn hodge_star(a: &ExteriorElement) -> Result<ExteriorElement, FormError> {
    a.hodge_star()
}

/// Evaluates the 3-form φ₀ on three vectors.
pub fn phi0_eval(a: &Vector7, b: &Vector7, c: &Vector7) -> BigRational {
    phi0().contract(a).contract(b).contract(c).coeff(0)
}

/// Cross product: the metric dual of `φ₀(a, b, ·)`.
pub fn cross(a: &Vector7, b: &Vector7) -> Vector7 {
    let one_form = phi0().contract(a).contract(b);
    Vector7(std::array::from_fn(|k| one_form.coeff(1 << k)))
}

/// Raw top coefficient of `(a⌟φ₀)∧(b⌟φ₀)∧φ₀`.
pub fn metric_raw(a: &Vector7, b: &Vector7) -> BigRational {
    let phi = phi0();
    phi.contract(a).wedge(&phi.contract(b)).wedge(&phi).coeff(TOP)
}

/// The raw wedge on `(v₁, v₁)`; equals [`METRIC_NORMALISATION`].
pub fn metric_calibration() -> BigRational {
    metric_raw(&Vector7::basis(1), &Vector7::basis(1))
}

/// Inner product induced by φ₀, normalised so that it is Euclidean.
pub fn metric_from_phi(a: &Vector7, b: &Vector7) -> BigRational {
    metric_raw(a, b) / rat(METRIC_NORMALISATION)
}

/// Trace of `T_{a,b}: v ↦ a×(b×v)` computed on the standard basis.
pub fn t_map_trace(a: &Vector7, b: &Vector7) -> BigRational {
    (1..=DIM)
        .map(|k| {
            let vk = Vector7::basis(k);
            cross(a, &cross(b, &vk)).0[k - 1].clone()
        })
        .sum()
}

/// Product of two imaginary octonions, split into real part
/// `(1/6) tr T_{a,b} = −⟨a,b⟩` and imaginary part `a×b`.
pub fn octonion_mul(a: &Vector7, b: &Vector7) -> (BigRational, Vector7) {
    (t_map_trace(a, b) / rat(6), cross(a, b))
}

/// Product of full octonions `(r, v)·(s, w) = (rs − ⟨v,w⟩, rw + sv + v×w)`.
pub fn octonion_mul_full(
    x: &(BigRational, Vector7),
    y: &(BigRational, Vector7),
) -> (BigRational, Vector7) {
    let (r, v) = x;
    let (s, w) = y;
    let (re, im) = octonion_mul(v, w);
    let vec = &(&w.scale(r) + &v.scale(s)) + &im;
    (r * s + re, vec)
}

/// `T η = *_φ(η ∧ φ₀)` on 2-forms, with the star of the orientation induced
/// by φ₀ (see [`PHI0_ORIENTATION`]). In this orientation `T` has eigenvalues
/// `2` on Λ²₊ and `−1` on Λ²₋.
pub fn t_map(eta: &ExteriorElement) -> Result<ExteriorElement, FormError> {
    eta.expect_degree(2)?;
    Ok(eta.wedge(&phi0()).hodge_star()?.scale(&rat(PHI0_ORIENTATION)))
}

/// Splitting of a 2-form into its Λ²₊ (eigenvalue 2) and Λ²₋ (eigenvalue −1) parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoFormSplit {
    pub plus: ExteriorElement,
    pub minus: ExteriorElement,
}

/// Exact split `plus = (T+1)η/3`, `minus = (2−T)η/3`.
pub fn t_eigen_split(eta: &ExteriorElement) -> Result<TwoFormSplit, FormError> {
    let t = t_map(eta)?;
    let third = ratio(1, 3);
    let plus = (&t + eta).scale(&third);
    let minus = (&eta.scale(&rat(2)) - &t).scale(&third);
    Ok(TwoFormSplit { plus, minus })
}

/// `L_{*φ₀} η = η ∧ *φ₀`; injective on Λ²₊ and zero on Λ²₋.
pub fn project_plus_l(eta: &ExteriorElement) -> Result<ExteriorElement, FormError> {
    eta.expect_degree(2)?;
    Ok(eta.wedge(&star_phi0()))
}

/// Masks of the 21 basis 2-forms `e^{ij}`, `i<j`, in lexicographic order.
pub fn two_form_basis() -> Vec<u8> {
    let mut out = Vec::with_capacity(21);
    for i in 0..DIM {
        for j in (i + 1)..DIM {
            out.push((1u8 << i) | (1u8 << j));
        }
    }
    out
}

/// Exact 21×21 matrix of `T` in the basis [`two_form_basis`] (column = image).
pub fn t_matrix() -> RatMatrix {
    let basis = two_form_basis();
    let mut m = vec![vec![BigRational::zero(); 21]; 21];
    for (c, &mb) in basis.iter().enumerate() {
        let mut eta = ExteriorElement::zero();
        eta.add_term(mb, BigRational::one());
        let img = t_map(&eta).expect("basis 2-form");
        for (r, &mr) in basis.iter().enumerate() {
            m[r][c] = img.coeff(mr);
        }
    }
    m
}

/// Floating-point copy of [`t_matrix`]; it is symmetric with integer entries.
pub fn t_matrix_f64() -> [[f64; 21]; 21] {
    let m = t_matrix();
    std::array::from_fn(|r| std::array::from_fn(|c| to_f64(&m[r][c])))
}

/// Ranks of the Λ²₊ and Λ²₋ projectors, computed exactly.
pub fn projector_ranks() -> (usize, usize) {
    let t = t_matrix();
    let third = ratio(1, 3);
    let plus: RatMatrix = (0..21)
        .map(|r| {
            (0..21)
                .map(|c| {
                    let id = if r == c { rat(1) } else { rat(0) };
                    (&t[r][c] + id) * &third
                })
                .collect()
        })
        .collect();
    let minus: RatMatrix = (0..21)
        .map(|r| {
            (0..21)
                .map(|c| {
                    let id = if r == c { rat(2) } else { rat(0) };
                    (id - &t[r][c]) * &third
                })
                .collect()
        })
        .collect();
    (rank(&plus), rank(&minus))
}

/// Checks `T² = T + 2` on every basis 2-form; returns the number of failures.
pub fn t_minimal_polynomial_failures() -> usize {
    two_form_basis()
        .iter()
        .filter(|&&mb| {
            let mut eta = ExteriorElement::zero();
            eta.add_term(mb, BigRational::one());
            let t1 = t_map(&eta).unwrap();
            let t2 = t_map(&t1).unwrap();
            t2 != &t1 + &eta.scale(&rat(2))
        })
        .count()
}

/// A complex-valued form stored as real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ComplexForm {
    pub re: ExteriorElement,
    pub im: ExteriorElement,
}

impl ComplexForm {
    pub fn wedge(&self, o: &ComplexForm) -> ComplexForm {
        ComplexForm {
            re: &self.re.wedge(&o.re) - &self.im.wedge(&o.im),
            im: &self.re.wedge(&o.im) + &self.im.wedge(&o.re),
        }
    }
}

/// Coordinate slots used for Kähler data: `(x¹,y¹,x²,y²,x³,y³,θ)` ↦ 1..=7.
pub mod kahler_slots {
    pub const fn x(j: usize) -> usize {
        2 * j - 1
    }
    pub const fn y(j: usize) -> usize {
        2 * j
    }
    pub const THETA: usize = 7;
}

/// Frame substitution `e¹=dx², e²=dx³, e³=dy², e⁴=dy³, e⁵=dy¹, e⁶=dθ, e⁷=dx¹`,
/// as a map from coordinate slot to frame index.
pub const KAHLER_TO_G2_FRAME: [usize; DIM] = [7, 5, 1, 3, 2, 4, 6];

/// `dz^j = dx^j + i dy^j` in coordinate slots.
pub fn dz(j: usize) -> ComplexForm {
    ComplexForm {
        re: ExteriorElement::basis(&[kahler_slots::x(j)]),
        im: ExteriorElement::basis(&[kahler_slots::y(j)]),
    }
}

/// Standard flat data `ω = Σ dx^j∧dy^j` and `Ω = dz¹∧dz²∧dz³`.
pub fn standard_kahler_data() -> (ExteriorElement, ComplexForm) {
    let omega = (1..=3).fold(ExteriorElement::zero(), |acc, j| {
        &acc + &ExteriorElement::basis(&[kahler_slots::x(j), kahler_slots::y(j)])
    });
    let big = dz(1).wedge(&dz(2)).wedge(&dz(3));
    (omega, big)
}

/// Builds `φ = ω∧dθ + Im Ω` and `*φ = ½ω∧ω − Re Ω∧dθ` from pointwise Kähler
/// data and rewrites both in the G₂ frame [`KAHLER_TO_G2_FRAME`].
///
/// The frame substitution reverses orientation, so for the standard data the
/// second output is `−`[`star_phi0`], the star of φ₀ in its own orientation.
pub fn lift_kahler_structure(
    omega: &ExteriorElement,
    big_omega: &ComplexForm,
) -> (ExteriorElement, ExteriorElement) {
    let dtheta = ExteriorElement::basis(&[kahler_slots::THETA]);
    let phi = &omega.wedge(&dtheta) + &big_omega.im;
    let star_phi = &omega.wedge(omega).scale(&ratio(1, 2)) - &big_omega.re.wedge(&dtheta);
    (phi.relabel(&KAHLER_TO_G2_FRAME), star_phi.relabel(&KAHLER_TO_G2_FRAME))
}

/// Rewrites a form given in Kähler coordinate slots in the G₂ frame.
pub fn kahler_to_g2_frame(form: &ExteriorElement) -> ExteriorElement {
    form.relabel(&KAHLER_TO_G2_FRAME)
}

/// Endomorphism-valued form: one scalar form per matrix entry (row-major),
/// with separate real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndoForm {
    pub rank: usize,
    pub re: Vec<ExteriorElement>,
    pub im: Vec<ExteriorElement>,
}

impl EndoForm {
    pub fn zero(rank: usize) -> Self {
        EndoForm {
            rank,
            re: vec![ExteriorElement::zero(); rank * rank],
            im: vec![ExteriorElement::zero(); rank * rank],
        }
    }

    /// `η ⊗ Id`.
    pub fn scalar(rank: usize, eta: &ExteriorElement) -> Self {
        let mut f = Self::zero(rank);
        for i in 0..rank {
            f.re[i * rank + i] = eta.clone();
        }
        f
    }
}

/// Squared norm (exact) and norm of `F ∧ *φ₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct InstantonResidual {
    pub norm_sq: BigRational,
    pub norm: f64,
}

/// `‖F ∧ *φ₀‖`; it vanishes exactly when the Λ²₊ part of `F` vanishes.
pub fn instanton_residual(f: &EndoForm) -> Result<InstantonResidual, FormError> {
    let sp = star_phi0();
    let mut acc = BigRational::zero();
    for part in f.re.iter().chain(f.im.iter()) {
        part.expect_degree(2)?;
        acc += part.wedge(&sp).norm_sq();
    }
    let norm = to_f64(&acc).sqrt();
    Ok(InstantonResidual { norm_sq: acc, norm })
}

/// One row of the self-test table.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Runs every exact identity of this module and returns a table of results.
pub fn selftest() -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        out.push(IdentityCheck { name: name.to_string(), passed, detail })
    };

    let star = hodge_star(&phi0()).expect("homogeneous");
    push("*φ₀ (Hodge star) equals the written-out 4-form", star == star_phi0(), format!("{star}"));

    let top = wedge(&phi0(), &star_phi0());
    push(
        "φ₀ ∧ *φ₀ = 7·e^{1…7}",
        top == volume_form().scale(&rat(7)),
        format!("{top}"),
    );

    let cal = metric_calibration();
    push(
        "metric normalisation from (v₁,v₁)",
        cal == rat(METRIC_NORMALISATION),
        format!("{cal}"),
    );

    let mut metric_ok = true;
    let mut trace_ok = true;
    for i in 1..=DIM {
        for j in 1..=DIM {
            let (a, b) = (Vector7::basis(i), Vector7::basis(j));
            let g = metric_from_phi(&a, &b);
            metric_ok &= g == if i == j { rat(1) } else { rat(0) };
            trace_ok &= rat(6) * g == -t_map_trace(&a, &b);
        }
    }
    push("⟨v_i,v_j⟩ = δ_ij from φ₀", metric_ok, "49 pairs".into());
    push("6⟨a,b⟩ = −tr T_{a,b}", trace_ok, "49 pairs".into());

    let mut triple_ok = true;
    for i in 1..=DIM {
        for j in 1..=DIM {
            let c = cross(&Vector7::basis(i), &Vector7::basis(j));
            for k in 1..=DIM {
                let vk = Vector7::basis(k);
                triple_ok &= phi0_eval(&Vector7::basis(i), &Vector7::basis(j), &vk) == c.dot(&vk);
            }
        }
    }
    push("φ₀(a,b,c) = ⟨a×b,c⟩", triple_ok, "343 triples".into());

    let fails = t_minimal_polynomial_failures();
    push("T² = T + 2 on Λ²", fails == 0, format!("{fails} failures / 21"));

    let (rp, rm) = projector_ranks();
    push("rank Λ²₊ = 7, rank Λ²₋ = 14", rp == 7 && rm == 14, format!("{rp}/{rm}"));

    let mut l_ok = true;
    for i in 1..=DIM {
        let idx: Vec<usize> = (1..=DIM).filter(|&k| k != i).collect();
        let sign = if i % 2 == 1 { 3 } else { -3 };
        l_ok &= project_plus_l(&alpha(i)).unwrap() == ExteriorElement::basis(&idx).scale(&rat(sign));
    }
    push("L_{*φ₀} α_i = 3(−1)^{i−1} e^{1…î…7}", l_ok, "i = 1..7".into());

    let (phi, sphi) = {
        let (w, big) = standard_kahler_data();
        lift_kahler_structure(&w, &big)
    };
    push(
        "Kähler data lifts to (φ₀, *_φ φ₀)",
        phi == phi0() && sphi == star_phi0().scale(&rat(PHI0_ORIENTATION)),
        format!("φ = {phi}"),
    );

    let mut oct_ok = true;
    for i in 1..=DIM {
        let (re, im) = octonion_mul(&Vector7::basis(i), &Vector7::basis(i));
        oct_ok &= re == -BigRational::one() && im.is_zero();
    }
    push("v_i · v_i = −1", oct_ok, "i = 1..7".into());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_has_seven_terms() {
        assert_eq!(phi0().num_terms(), 7);
        assert_eq!(star_phi0().num_terms(), 7);
    }

    #[test]
    fn selftest_passes() {
        let failed: Vec<String> = selftest()
            .into_iter()
            .filter(|r| !r.passed)
            .map(|r| format!("{}: {}", r.name, r.detail))
            .collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }
}
