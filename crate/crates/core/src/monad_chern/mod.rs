//! Chern-class arithmetic in `ℤ[h]/(h^{dim+1})` and exact instanton monads
//! `𝒪(−1)^c → 𝒪^{2+2c} → 𝒪(1)^c` on ℙ³.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{kernel_basis, rank, rat, RatMatrix};

/// Truncated polynomial `Σ_k a_k h^k`, `k ≤ dim`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChernPolynomial {
    pub dim: usize,
    #[serde(serialize_with = "ser_bigints")]
    pub coeffs: Vec<BigInt>,
}

fn ser_bigints<S: serde::Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

impl ChernPolynomial {
    pub fn one(dim: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); dim + 1];
        coeffs[0] = BigInt::one();
        ChernPolynomial { dim, coeffs }
    }

    /// `1 + a·h`, the total Chern class of `𝒪(a)`.
    pub fn line(dim: usize, a: i64) -> Self {
        let mut p = Self::one(dim);
        if dim >= 1 {
            p.coeffs[1] = BigInt::from(a);
        }
        p
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim);
        let mut coeffs = vec![BigInt::zero(); self.dim + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j <= self.dim {
                    coeffs[i + j] += a * b;
                }
            }
        }
        ChernPolynomial { dim: self.dim, coeffs }
    }

    pub fn pow(&self, n: usize) -> Self {
        (0..n).fold(Self::one(self.dim), |acc, _| acc.mul(self))
    }

    /// Inverse of a polynomial with constant term 1, by the recursion
    /// `b_k = −Σ_{i≥1} a_i b_{k−i}`.
    pub fn inverse(&self) -> Self {
        assert!(self.coeffs[0].is_one(), "constant term must be 1");
        let mut b = vec![BigInt::zero(); self.dim + 1];
        b[0] = BigInt::one();
        for k in 1..=self.dim {
            let mut s = BigInt::zero();
            for i in 1..=k {
                s += &self.coeffs[i] * &b[k - i];
            }
            b[k] = -s;
        }
        ChernPolynomial { dim: self.dim, coeffs: b }
    }

    /// Truncation to a smaller ambient dimension.
    pub fn truncate(&self, dim: usize) -> Self {
        let mut coeffs: Vec<BigInt> = self.coeffs.iter().take(dim + 1).cloned().collect();
        coeffs.resize(dim + 1, BigInt::zero());
        ChernPolynomial { dim, coeffs }
    }

    /// Chern polynomial of `E ⊗ 𝒪(a)` for `E` of the given rank:
    /// `c_k(E(a)) = Σ_{i≤k} C(r−i, k−i) c_i(E) a^{k−i}`.
    pub fn twist(&self, rank: usize, a: i64) -> Self {
        let a = BigInt::from(a);
        let mut coeffs = vec![BigInt::zero(); self.dim + 1];
        for (k, out) in coeffs.iter_mut().enumerate() {
            for i in 0..=k.min(rank) {
                if k - i > rank - i {
                    continue;
                }
                let b = binomial(BigInt::from(rank - i), BigInt::from(k - i));
                *out += b * &self.coeffs[i] * num_traits::pow(a.clone(), k - i);
            }
        }
        ChernPolynomial { dim: self.dim, coeffs }
    }
}

/// Rank and total Chern class of the monad cohomology:
/// `c(ℰ) = c(𝒪)^{2+2c} / (c(𝒪(−1))^c · c(𝒪(1))^c)`.
pub fn chern_of_monad(c: usize, dim: usize) -> (usize, ChernPolynomial) {
    let denom = ChernPolynomial::line(dim, -1).pow(c).mul(&ChernPolynomial::line(dim, 1).pow(c));
    ((2 + 2 * c) - 2 * c, denom.inverse())
}

/// Chern data of `ℰ|_D` for a divisor `D` of degree `d`.
#[derive(Clone, Debug, Serialize)]
pub struct RestrictionChern {
    pub d: i64,
    /// `c(ℰ(−d))` on the ambient space.
    pub twisted: ChernPolynomial,
    /// `c(ℰ)/c(ℰ(−d))` on the ambient space (the torsion sheaf `ℰ|_D`).
    pub ambient_quotient: ChernPolynomial,
    /// `c(ℰ|_D)` in `ℤ[h_D]/(h_D^{dim})`, `h_D` the restricted hyperplane class.
    pub on_divisor: ChernPolynomial,
    /// `∫_D h_D^{dim−1} = d`.
    pub divisor_degree: i64,
}

/// Whitney arithmetic for `0 → ℰ(−d) → ℰ → ℰ|_D → 0` with `ℰ` the rank-2
/// monad bundle of charge `c` (`c = 0` gives the trivial bundle).
pub fn restriction_chern(c: usize, d: i64, dim: usize) -> RestrictionChern {
    let e = if c == 0 { ChernPolynomial::one(dim) } else { chern_of_monad(c, dim).1 };
    let twisted = e.twist(2, -d);
    let ambient_quotient = e.mul(&twisted.inverse());
    RestrictionChern {
        d,
        twisted,
        ambient_quotient,
        on_divisor: e.truncate(dim.saturating_sub(1)),
        divisor_degree: d,
    }
}

/// A linear form `Σ a_i x_i` in four variables.
pub type LinearForm = [BigRational; 4];

/// Matrix of linear forms, row-major.
pub type FormMatrix = Vec<Vec<LinearForm>>;

#[derive(Debug, Error)]
pub enum MonadError {
    #[error("no monad with full fibre ranks after {0} attempts")]
    RankDeficient(usize),
    #[error("charge must be at least 1")]
    Charge,
}

#[derive(Clone, Debug)]
pub struct MonadData {
    pub c: usize,
    /// `(2+2c) × c`.
    pub alpha: FormMatrix,
    /// `c × (2+2c)`.
    pub beta: FormMatrix,
}

fn zero_form() -> LinearForm {
    std::array::from_fn(|_| BigRational::zero())
}

/// Standard symplectic form on `(2+2c)`-space: blocks `[[0, 1], [−1, 0]]`.
fn symplectic(m: usize) -> RatMatrix {
    let mut j = vec![vec![BigRational::zero(); m]; m];
    for b in (0..m).step_by(2) {
        j[b][b + 1] = rat(1);
        j[b + 1][b] = rat(-1);
    }
    j
}

/// `α = J βᵀ`.
fn alpha_from_beta(beta: &FormMatrix) -> FormMatrix {
    let m = beta[0].len();
    let j = symplectic(m);
    (0..m)
        .map(|i| {
            beta.iter()
                .map(|row| {
                    let mut f = zero_form();
                    for (k, jk) in j[i].iter().enumerate() {
                        if !jk.is_zero() {
                            for v in 0..4 {
                                f[v] += jk * &row[k][v];
                            }
                        }
                    }
                    f
                })
                .collect()
        })
        .collect()
}

impl MonadData {
    /// `β·α` as a `c×c` matrix of quadrics `q[a][b]` (coefficient of `x_a x_b`, `a ≤ b`).
    pub fn product(&self) -> Vec<Vec<[[BigRational; 4]; 4]>> {
        let c = self.c;
        let m = self.alpha.len();
        let mut out = vec![vec![std::array::from_fn(|_| std::array::from_fn(|_| BigRational::zero())); c]; c];
        for i in 0..c {
            for j in 0..c {
                for k in 0..m {
                    let (b, a) = (&self.beta[i][k], &self.alpha[k][j]);
                    for u in 0..4 {
                        for v in 0..4 {
                            let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
                            out[i][j][lo][hi] += &b[u] * &a[v];
                        }
                    }
                }
            }
        }
        out
    }

    /// Whether `β·α = 0` as a polynomial identity.
    pub fn composition_vanishes(&self) -> bool {
        self.product().iter().flatten().flatten().flatten().all(Zero::is_zero)
    }

    fn eval(m: &FormMatrix, p: &[BigRational; 4]) -> RatMatrix {
        m.iter()
            .map(|row| row.iter().map(|f| (0..4).fold(BigRational::zero(), |acc, v| acc + &f[v] * &p[v])).collect())
            .collect()
    }

    /// `(rank α(p), rank β(p))` at one point.
    pub fn fiber_ranks(&self, p: &[BigRational; 4]) -> (usize, usize) {
        (rank(&Self::eval(&self.alpha, p)), rank(&Self::eval(&self.beta, p)))
    }
}

/// The null-correlation monad: `α = (x₀, x₁, x₂, x₃)ᵀ`, `β = (−x₁, x₀, −x₃, x₂)`.
pub fn null_correlation() -> MonadData {
    let unit = |i: usize, s: i64| {
        let mut f = zero_form();
        f[i] = rat(s);
        f
    };
    let beta = vec![vec![unit(1, -1), unit(0, 1), unit(3, -1), unit(2, 1)]];
    let alpha = (0..4).map(|i| vec![unit(i, 1)]).collect();
    MonadData { c: 1, alpha, beta }
}

/// Linear conditions on a new row `v` of `β` making `v J β_lᵀ = 0` as a quadric.
fn row_constraints(prev: &[Vec<LinearForm>], m: usize) -> RatMatrix {
    let j = symplectic(m);
    let mut rows = Vec::new();
    for bl in prev {
        // u_i = Σ_k J_ik β_l[k], a linear form per column i.
        let u: Vec<LinearForm> = (0..m)
            .map(|i| {
                let mut f = zero_form();
                for (k, jk) in j[i].iter().enumerate() {
                    if !jk.is_zero() {
                        for v in 0..4 {
                            f[v] += jk * &bl[k][v];
                        }
                    }
                }
                f
            })
            .collect();
        for a in 0..4 {
            for b in a..4 {
                let mut row = vec![BigRational::zero(); 4 * m];
                for i in 0..m {
                    row[4 * i + a] += &u[i][b];
                    if a != b {
                        row[4 * i + b] += &u[i][a];
                    }
                }
                rows.push(row);
            }
        }
    }
    rows
}

/// Random sample points with small non-zero integer coordinates.
pub fn sample_points(count: usize, seed: u64) -> Vec<[BigRational; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (0..count)
        .map(|_| loop {
            let p: [BigRational; 4] = std::array::from_fn(|_| rat(rng.gen_range(-5..=5)));
            if p.iter().any(|v| !v.is_zero()) {
                break p;
            }
        })
        .collect()
}

/// Report of the fibrewise exactness sample.
#[derive(Clone, Debug, Serialize)]
pub struct ExactnessReport {
    pub c: usize,
    pub points: usize,
    pub composition_vanishes: bool,
    /// Points where `rank α = c` and `rank β = c`.
    pub full_rank_points: usize,
    pub attempts: usize,
}

/// Random monad: rows of `β` are drawn one at a time from the kernel of the
/// conditions `β_k J β_lᵀ = 0` (`l < k`) and `α = Jβᵀ`, so `β·α = βJβᵀ = 0`
/// exactly. Draws are repeated until both maps have full rank at every
/// sample point.
pub fn sample_monad(c: usize, seed: u64) -> Result<(MonadData, ExactnessReport), MonadError> {
    if c == 0 {
        return Err(MonadError::Charge);
    }
    const ATTEMPTS: usize = 100;
    let m = 2 + 2 * c;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = sample_points(100, seed);
    for attempt in 1..=ATTEMPTS {
        let mut beta: FormMatrix = Vec::new();
        let mut ok = true;
        for _ in 0..c {
            let cons = row_constraints(&beta, m);
            let basis =
                if cons.is_empty() { kernel_basis(&vec![vec![BigRational::zero(); 4 * m]], 4 * m) } else { kernel_basis(&cons, 4 * m) };
            if basis.is_empty() {
                ok = false;
                break;
            }
            let mut v = vec![BigRational::zero(); 4 * m];
            for b in &basis {
                let k = rat(rng.gen_range(-2..=2));
                if !k.is_zero() {
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi += &k * bi;
                    }
                }
            }
            beta.push((0..m).map(|i| std::array::from_fn(|a| v[4 * i + a].clone())).collect());
        }
        if !ok {
            continue;
        }
        let data = MonadData { c, alpha: alpha_from_beta(&beta), beta };
        let full = points.par_iter().filter(|p| data.fiber_ranks(p) == (c, c)).count();
        if full == points.len() {
            let report = ExactnessReport {
                c,
                points: points.len(),
                composition_vanishes: data.composition_vanishes(),
                full_rank_points: full,
                attempts: attempt,
            };
            return Ok((data, report));
        }
    }
    Err(MonadError::RankDeficient(ATTEMPTS))
}

#[cfg(test)]
mod tests;
