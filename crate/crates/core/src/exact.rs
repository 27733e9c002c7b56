//! Exact rational linear algebra shared by the exterior-algebra and monad code.
//!
//! Matrices are dense `Vec<Vec<BigRational>>` in row-major order. Sizes in this
//! crate never exceed a few hundred rows, so plain Gauss–Jordan elimination with
//! exact arithmetic is both adequate and reproducible.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Dense rational matrix, row-major.
pub type RatMatrix = Vec<Vec<BigRational>>;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Shorthand for the rational `p/q`.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Lossy conversion used only for reporting and floating-point companions.
pub fn to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// Reduced row-echelon form in place; returns the pivot columns.
pub fn rref(m: &mut RatMatrix) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let t = &m[r][j] * &f;
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of a rational matrix.
pub fn rank(m: &RatMatrix) -> usize {
    let mut w = m.clone();
    rref(&mut w).len()
}

/// Basis of the right null space `{x : m·x = 0}`.
pub fn kernel_basis(m: &RatMatrix, cols: usize) -> Vec<Vec<BigRational>> {
    let mut w = m.clone();
    let pivots = rref(&mut w);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -w[row][f].clone();
            }
            v
        })
        .collect()
}

/// Matrix product of two rational matrices.
pub fn matmul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![BigRational::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                let t = &a[i][l] * &b[l][j];
                out[i][j] += t;
            }
        }
    }
    out
}

/// Identity matrix of size `n`.
pub fn identity(n: usize) -> RatMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { rat(1) } else { rat(0) }).collect())
        .collect()
}

/// Largest absolute entry, used in reports.
pub fn max_abs(m: &RatMatrix) -> BigRational {
    m.iter()
        .flat_map(|r| r.iter())
        .map(|x| x.abs())
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_rank_one_matrix() {
        let m = vec![vec![rat(1), rat(2), rat(3)], vec![rat(2), rat(4), rat(6)]];
        assert_eq!(rank(&m), 1);
        let k = kernel_basis(&m, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            let s: BigRational = (0..3).map(|j| &m[0][j] * &v[j]).sum();
            assert!(s.is_zero());
        }
    }

    #[test]
    fn identity_has_full_rank_and_trivial_kernel() {
        let id = identity(4);
        assert_eq!(rank(&id), 4);
        assert!(kernel_basis(&id, 4).is_empty());
        assert_eq!(matmul(&id, &id), id);
    }
}
