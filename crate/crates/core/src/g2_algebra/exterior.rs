//! Exact exterior algebra of (ℝ⁷)* with rational coefficients.
//!
//! A basis monomial `e^{i₁…i_p}` (with `1 ≤ i₁ < … < i_p ≤ 7`) is stored as a
//! 7-bit mask; bit `k-1` set means index `k` is present. Zero coefficients are
//! never stored, so structural equality is mathematical equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::exact::rat;

/// Dimension of the underlying vector space.
pub const DIM: usize = 7;
/// Mask of the top-degree monomial `e^{1…7}`.
pub const TOP: u8 = 0b111_1111;

/// Errors raised by operations that need homogeneous input of a given degree.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormError {
    #[error("element is not homogeneous (degrees present: {0:?})")]
    NotHomogeneous(Vec<usize>),
    #[error("expected a form of degree {expected}, found degree {found}")]
    WrongDegree { expected: usize, found: usize },
    #[error("basis index {0} outside 1..=7")]
    BadIndex(usize),
}

/// A vector of ℝ⁷ with exact rational components in the basis `v₁…v₇`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Vector7(pub [BigRational; DIM]);

impl Vector7 {
    pub fn zero() -> Self {
        Vector7(std::array::from_fn(|_| BigRational::zero()))
    }

    /// Basis vector `v_i`, `i ∈ 1..=7`.
    pub fn basis(i: usize) -> Self {
        assert!((1..=DIM).contains(&i), "basis index {i} outside 1..=7");
        let mut v = Self::zero();
        v.0[i - 1] = BigRational::one();
        v
    }

    pub fn from_ints(c: [i64; DIM]) -> Self {
        Vector7(std::array::from_fn(|k| rat(c[k])))
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Vector7(std::array::from_fn(|k| &self.0[k] * s))
    }

    /// Euclidean inner product in the standard basis.
    pub fn dot(&self, other: &Self) -> BigRational {
        (0..DIM).map(|k| &self.0[k] * &other.0[k]).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

impl Add for &Vector7 {
    type Output = Vector7;
    fn add(self, o: &Vector7) -> Vector7 {
        Vector7(std::array::from_fn(|k| &self.0[k] + &o.0[k]))
    }
}

impl Sub for &Vector7 {
    type Output = Vector7;
    fn sub(self, o: &Vector7) -> Vector7 {
        Vector7(std::array::from_fn(|k| &self.0[k] - &o.0[k]))
    }
}

/// Element of Λ•(ℝ⁷)* with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct ExteriorElement {
    terms: BTreeMap<u8, BigRational>,
}

/// Sign of `e^a ∧ e^b` relative to `e^{a∪b}` for disjoint masks: the parity of
/// the number of pairs `(i ∈ a, j ∈ b)` with `i > j`.
pub fn wedge_sign(a: u8, b: u8) -> i32 {
    debug_assert_eq!(a & b, 0);
    let mut inversions = 0u32;
    for j in 0..DIM {
        if b & (1 << j) != 0 {
            inversions += (a >> (j + 1)).count_ones();
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Converts an index list (1-based, any order) to a mask and the sign of the
/// sorting permutation. Returns `None` when an index repeats.
pub fn indices_to_mask(idx: &[usize]) -> Result<Option<(u8, i32)>, FormError> {
    let mut mask = 0u8;
    let mut sign = 1;
    for &i in idx {
        if !(1..=DIM).contains(&i) {
            return Err(FormError::BadIndex(i));
        }
        let bit = 1u8 << (i - 1);
        if mask & bit != 0 {
            return Ok(None);
        }
        sign *= wedge_sign(mask, bit);
        mask |= bit;
    }
    Ok(Some((mask, sign)))
}

/// The 1-based indices of a mask in increasing order.
pub fn mask_indices(mask: u8) -> Vec<usize> {
    (0..DIM).filter(|k| mask & (1 << k) != 0).map(|k| k + 1).collect()
}

impl ExteriorElement {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The scalar `c` as a degree-0 element.
    pub fn scalar(c: BigRational) -> Self {
        let mut e = Self::zero();
        e.add_term(0, c);
        e
    }

    /// `e^{i₁…i_p}` for indices in any order (sign of the reordering applied);
    /// repeated indices give zero.
    pub fn basis(idx: &[usize]) -> Self {
        Self::monomial(idx, BigRational::one())
    }

    /// `c · e^{i₁…i_p}`.
    pub fn monomial(idx: &[usize], c: BigRational) -> Self {
        match indices_to_mask(idx).expect("basis index outside 1..=7") {
            None => Self::zero(),
            Some((mask, sign)) => {
                let mut e = Self::zero();
                e.add_term(mask, if sign < 0 { -c } else { c });
                e
            }
        }
    }

    /// Adds `c · e^{mask}`, dropping the entry if it cancels.
    pub fn add_term(&mut self, mask: u8, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(mask).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&mask);
        }
    }

    /// Coefficient of `e^{mask}`.
    pub fn coeff(&self, mask: u8) -> BigRational {
        self.terms.get(&mask).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Coefficient of the monomial with the given (sorted) indices.
    pub fn coeff_of(&self, idx: &[usize]) -> BigRational {
        match indices_to_mask(idx).expect("basis index outside 1..=7") {
            None => BigRational::zero(),
            Some((mask, sign)) => {
                let c = self.coeff(mask);
                if sign < 0 {
                    -c
                } else {
                    c
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u8, &BigRational)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Sorted list of the degrees that occur.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.terms.keys().map(|m| m.count_ones() as usize).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// Degree of a homogeneous element; `None` for zero.
    pub fn homogeneous_degree(&self) -> Result<Option<usize>, FormError> {
        let d = self.degrees();
        match d.len() {
            0 => Ok(None),
            1 => Ok(Some(d[0])),
            _ => Err(FormError::NotHomogeneous(d)),
        }
    }

    /// Checks that the element is zero or homogeneous of degree `p`.
    pub fn expect_degree(&self, p: usize) -> Result<(), FormError> {
        match self.homogeneous_degree()? {
            None => Ok(()),
            Some(d) if d == p => Ok(()),
            Some(d) => Err(FormError::WrongDegree { expected: p, found: d }),
        }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        let mut out = Self::zero();
        for (m, c) in self.terms() {
            out.add_term(m, c * s);
        }
        out
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                if a & b != 0 {
                    continue;
                }
                let c = ca * cb;
                out.add_term(a | b, if wedge_sign(a, b) < 0 { -c } else { c });
            }
        }
        out
    }

    /// Euclidean Hodge star with orientation `e^{1…7}`: `*e^I = ε · e^{Iᶜ}` where
    /// `e^I ∧ ε e^{Iᶜ} = e^{1…7}`. Non-homogeneous input is rejected.
    pub fn hodge_star(&self) -> Result<Self, FormError> {
        self.homogeneous_degree()?;
        let mut out = Self::zero();
        for (m, c) in self.terms() {
            let comp = TOP & !m;
            let s = wedge_sign(m, comp);
            out.add_term(comp, if s < 0 { -c.clone() } else { c.clone() });
        }
        Ok(out)
    }

    /// Interior product `x ⌟ a`, inserting `x` into the first slot.
    pub fn contract(&self, x: &Vector7) -> Self {
        let mut out = Self::zero();
        for (m, c) in self.terms() {
            let idx = mask_indices(m);
            for (pos, &i) in idx.iter().enumerate() {
                let xi = &x.0[i - 1];
                if xi.is_zero() {
                    continue;
                }
                let v = c * xi;
                let v = if pos % 2 == 1 { -v } else { v };
                out.add_term(m & !(1 << (i - 1)), v);
            }
        }
        out
    }

    /// Sum of squared coefficients (the Euclidean norm² on Λ•, basis orthonormal).
    pub fn norm_sq(&self) -> BigRational {
        self.terms().map(|(_, c)| c * c).sum()
    }

    /// Euclidean inner product of two elements.
    pub fn inner(&self, other: &Self) -> BigRational {
        self.terms().map(|(m, c)| c * other.coeff(m)).sum()
    }

    /// Applies a relabelling of basis covectors `e^i ↦ e^{perm[i-1]}` (a
    /// permutation of 1..=7) with the induced sign on each monomial.
    pub fn relabel(&self, perm: &[usize; DIM]) -> Self {
        let mut out = Self::zero();
        for (m, c) in self.terms() {
            let idx: Vec<usize> = mask_indices(m).iter().map(|&i| perm[i - 1]).collect();
            out = &out + &Self::monomial(&idx, c.clone());
        }
        out
    }
}

impl Add for &ExteriorElement {
    type Output = ExteriorElement;
    fn add(self, o: &ExteriorElement) -> ExteriorElement {
        let mut out = self.clone();
        for (m, c) in o.terms() {
            out.add_term(m, c.clone());
        }
        out
    }
}

impl Sub for &ExteriorElement {
    type Output = ExteriorElement;
    fn sub(self, o: &ExteriorElement) -> ExteriorElement {
        let mut out = self.clone();
        for (m, c) in o.terms() {
            out.add_term(m, -c.clone());
        }
        out
    }
}

impl Neg for &ExteriorElement {
    type Output = ExteriorElement;
    fn neg(self) -> ExteriorElement {
        self.scale(&-BigRational::one())
    }
}

impl Mul<&BigRational> for &ExteriorElement {
    type Output = ExteriorElement;
    fn mul(self, s: &BigRational) -> ExteriorElement {
        self.scale(s)
    }
}

impl fmt::Debug for ExteriorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ExteriorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let idx: String = mask_indices(m).iter().map(|i| i.to_string()).collect();
            if m == 0 {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "e{idx}")?;
            } else {
                write!(f, "{a}·e{idx}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_wedge_and_repeats() {
        let e1 = ExteriorElement::basis(&[1]);
        let e2 = ExteriorElement::basis(&[2]);
        assert_eq!(e1.wedge(&e2), ExteriorElement::basis(&[1, 2]));
        assert!(ExteriorElement::basis(&[1, 2]).wedge(&e1).is_zero());
        assert_eq!(ExteriorElement::basis(&[2, 1]), -&ExteriorElement::basis(&[1, 2]));
    }

    #[test]
    fn star_of_basis_elements() {
        let s = ExteriorElement::basis(&[1]).hodge_star().unwrap();
        assert_eq!(s, ExteriorElement::basis(&[2, 3, 4, 5, 6, 7]));
        let top = ExteriorElement::basis(&[1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(top.hodge_star().unwrap(), ExteriorElement::scalar(rat(1)));
        let e12 = ExteriorElement::basis(&[1, 2]);
        assert_eq!(e12.hodge_star().unwrap().hodge_star().unwrap(), e12);
    }

    #[test]
    fn star_rejects_mixed_degrees() {
        let mixed = &ExteriorElement::basis(&[1]) + &ExteriorElement::basis(&[2, 3]);
        assert!(matches!(mixed.hodge_star(), Err(FormError::NotHomogeneous(_))));
    }

    #[test]
    fn contraction_basics() {
        assert_eq!(
            ExteriorElement::basis(&[5]).contract(&Vector7::basis(5)),
            ExteriorElement::scalar(rat(1))
        );
        assert!(ExteriorElement::basis(&[1, 2]).contract(&Vector7::basis(3)).is_zero());
        assert!(ExteriorElement::scalar(rat(3)).contract(&Vector7::basis(1)).is_zero());
        // second-slot insertion picks up a sign
        assert_eq!(
            ExteriorElement::basis(&[1, 2]).contract(&Vector7::basis(2)),
            -&ExteriorElement::basis(&[1])
        );
    }

    #[test]
    fn display_is_readable() {
        let e = &ExteriorElement::basis(&[1, 2]) - &ExteriorElement::basis(&[3, 4]);
        assert_eq!(format!("{e}"), "e12 - e34");
    }
}
