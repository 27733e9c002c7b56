//! Small dense complex matrices with inline storage.
//!
//! Lattice fields hold one `r×r` matrix per site, and the flow touches every
//! site many times per step, so heap-allocated matrices would dominate the
//! run time. [`CMat`] keeps up to [`MAX_RANK`]² entries inline and is `Copy`.
//! Hermitian eigen-decompositions use cyclic complex Jacobi rotations, which
//! are unconditionally convergent and accurate to machine precision at these
//! sizes.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Largest supported bundle rank.
pub const MAX_RANK: usize = 4;
const CAP: usize = MAX_RANK * MAX_RANK;

pub type C64 = Complex64;

/// The imaginary unit.
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Square complex matrix of size `n ≤ MAX_RANK`, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct CMat {
    n: usize,
    a: [C64; CAP],
}

impl std::fmt::Debug for CMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CMat{}[", self.n)?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.n {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i ", z.re, z.im)?;
            }
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.a[i * MAX_RANK + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.a[i * MAX_RANK + j]
    }
}

impl CMat {
    /// Zero matrix of size `n`.
    #[inline]
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_RANK, "rank {n} outside 1..={MAX_RANK}");
        CMat { n, a: [C64::new(0.0, 0.0); CAP] }
    }

    #[inline]
    pub fn identity(n: usize) -> Self {
        Self::scalar(n, C64::new(1.0, 0.0))
    }

    #[inline]
    pub fn scalar(n: usize, s: C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = s;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Diagonal matrix with real entries.
    pub fn diag_real(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// Row-major entries (length `n²`).
    pub fn from_row_major(n: usize, v: &[C64]) -> Self {
        assert_eq!(v.len(), n * n);
        Self::from_fn(n, |i, j| v[i * n + j])
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.n * self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                v.push(self[(i, j)]);
            }
        }
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Conjugate transpose.
    #[inline]
    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self[(j, i)].conj();
            }
        }
        m
    }

    #[inline]
    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] *= s;
            }
        }
        m
    }

    #[inline]
    pub fn scale_c(&self, s: C64) -> Self {
        let mut m = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] *= s;
            }
        }
        m
    }

    /// `(A + A†)/2`.
    #[inline]
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale(0.5)
    }

    /// `(A − A†)/2`.
    #[inline]
    pub fn antihermitian_part(&self) -> Self {
        (*self - self.adjoint()).scale(0.5)
    }

    /// `[A, B] = AB − BA`.
    #[inline]
    pub fn commutator(&self, b: &CMat) -> Self {
        *self * *b - *b * *self
    }

    /// Frobenius norm squared `tr(A A†)`.
    #[inline]
    pub fn norm_sq(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self[(i, j)].norm_sqr();
            }
        }
        s
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Largest absolute entry.
    /// `|M|²_H = tr(M H⁻¹ M† H)` for a metric `H` with inverse `hinv`.
    pub fn norm_sq_in(&self, h: &CMat, hinv: &CMat) -> f64 {
        (*self * *hinv * self.adjoint() * *h).trace().re
    }

    pub fn max_abs(&self) -> f64 {
        let mut s: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s = s.max(self[(i, j)].norm());
            }
        }
        s
    }

    pub fn is_finite(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self[(i, j)].re.is_finite() && self[(i, j)].im.is_finite()))
    }

    /// Entrywise conjugate (no transpose).
    pub fn conj(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(i, j)].conj())
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> C64 {
        let n = self.n;
        let mut m = *self;
        let mut det = C64::new(1.0, 0.0);
        for col in 0..n {
            let p = (col..n)
                .max_by(|&x, &y| m[(x, col)].norm().total_cmp(&m[(y, col)].norm()))
                .unwrap();
            if m[(p, col)].norm() == 0.0 {
                return C64::new(0.0, 0.0);
            }
            if p != col {
                for j in 0..n {
                    let t = m[(p, j)];
                    m[(p, j)] = m[(col, j)];
                    m[(col, j)] = t;
                }
                det = -det;
            }
            let piv = m[(col, col)];
            det *= piv;
            for i in (col + 1)..n {
                let f = m[(i, col)] / piv;
                for j in col..n {
                    let t = m[(col, j)];
                    m[(i, j)] -= f * t;
                }
            }
        }
        det
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting; `None` if
    /// the matrix is numerically singular.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut m = *self;
        let mut inv = Self::identity(n);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let p = (col..n)
                .max_by(|&x, &y| m[(x, col)].norm().total_cmp(&m[(y, col)].norm()))
                .unwrap();
            if m[(p, col)].norm() <= 1e-300_f64.max(scale * 1e-15) {
                return None;
            }
            if p != col {
                for j in 0..n {
                    let t = m[(p, j)];
                    m[(p, j)] = m[(col, j)];
                    m[(col, j)] = t;
                    let t = inv[(p, j)];
                    inv[(p, j)] = inv[(col, j)];
                    inv[(col, j)] = t;
                }
            }
            let piv = m[(col, col)].inv();
            for j in 0..n {
                m[(col, j)] *= piv;
                inv[(col, j)] *= piv;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = m[(i, col)];
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let t = m[(col, j)];
                    m[(i, j)] -= f * t;
                    let t = inv[(col, j)];
                    inv[(i, j)] -= f * t;
                }
            }
        }
        Some(inv)
    }

    /// Eigen-decomposition of a Hermitian matrix (only the Hermitian part is
    /// used). Eigenvalues are returned in ascending order with the unitary
    /// matrix whose columns are the matching eigenvectors.
    pub fn eigh(&self) -> Eigh {
        let n = self.n;
        let mut a = self.hermitian_part();
        let mut v = Self::identity(n);
        let total = a.norm_sq().max(f64::MIN_POSITIVE);
        for _sweep in 0..64 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            if off <= 1e-32 * total {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let mag = apq.norm();
                    if mag <= 1e-300 {
                        continue;
                    }
                    let phase = apq / mag;
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let theta = (aqq - app) / (2.0 * mag);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let cs = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * cs;
                    // Rotation J acting on columns p, q: J = D·R with D = diag(…, e^{-iφ} at q).
                    let jpp = C64::new(cs, 0.0);
                    let jpq = C64::new(sn, 0.0);
                    let jqp = -phase.conj() * sn;
                    let jqq = phase.conj() * cs;
                    // A ← A J
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * jpp + akq * jqp;
                        a[(k, q)] = akp * jpq + akq * jqq;
                    }
                    // A ← J† A
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                    }
                    a[(p, q)] = C64::new(0.0, 0.0);
                    a[(q, p)] = C64::new(0.0, 0.0);
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * jpp + vkq * jqp;
                        v[(k, q)] = vkp * jpq + vkq * jqq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
        let mut values = [0.0; MAX_RANK];
        let mut vecs = Self::zeros(n);
        for (new, &old) in order.iter().enumerate() {
            values[new] = a[(old, old)].re;
            for k in 0..n {
                vecs[(k, new)] = v[(k, old)];
            }
        }
        Eigh { n, values, vectors: vecs }
    }

    /// `f(A)` for Hermitian `A` via its eigen-decomposition.
    pub fn herm_fn(&self, f: impl Fn(f64) -> f64) -> Self {
        self.eigh().apply(f)
    }

    /// Matrix exponential of a general (non-normal) matrix by scaling and
    /// squaring with a degree-18 Taylor polynomial.
    pub fn expm(&self) -> Self {
        let n = self.n;
        let norm = self.norm();
        let mut s = 0;
        let mut scaled = *self;
        if norm > 0.5 {
            s = (norm / 0.5).log2().ceil() as i32;
            scaled = self.scale(0.5_f64.powi(s));
        }
        let mut term = Self::identity(n);
        let mut sum = Self::identity(n);
        for k in 1..=18 {
            term = (term * scaled).scale(1.0 / k as f64);
            sum += term;
        }
        for _ in 0..s {
            sum = sum * sum;
        }
        sum
    }
}

/// Result of [`CMat::eigh`].
#[derive(Clone, Copy, Debug)]
pub struct Eigh {
    pub n: usize,
    pub values: [f64; MAX_RANK],
    pub vectors: CMat,
}

impl Eigh {
    pub fn values(&self) -> &[f64] {
        &self.values[..self.n]
    }

    pub fn max(&self) -> f64 {
        self.values[self.n - 1]
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// `U f(Λ) U†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMat {
        let d: Vec<f64> = self.values().iter().map(|&x| f(x)).collect();
        let u = self.vectors;
        let mut m = CMat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..self.n {
                    s += u[(i, k)] * d[k] * u[(j, k)].conj();
                }
                m[(i, j)] = s;
            }
        }
        m
    }

    /// Expresses `x` in the eigenbasis: `U† x U`.
    pub fn to_eigenbasis(&self, x: &CMat) -> CMat {
        self.vectors.adjoint() * *x * self.vectors
    }

    /// Inverse of [`Eigh::to_eigenbasis`]: `U y U†`.
    pub fn from_eigenbasis(&self, y: &CMat) -> CMat {
        self.vectors * *y * self.vectors.adjoint()
    }
}

/// First divided difference `(f(a) − f(b))/(a − b)`, with `df` used when the
/// arguments (nearly) coincide.
#[inline]
pub fn divided_difference(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let d = a - b;
    if d.abs() <= 1e-7 * (1.0 + a.abs().max(b.abs())) {
        df(0.5 * (a + b))
    } else {
        (f(a) - f(b)) / d
    }
}

impl Add for CMat {
    type Output = CMat;
    #[inline]
    fn add(mut self, o: CMat) -> CMat {
        self += o;
        self
    }
}

impl AddAssign for CMat {
    #[inline]
    fn add_assign(&mut self, o: CMat) {
        debug_assert_eq!(self.n, o.n);
        for i in 0..self.n {
            for j in 0..self.n {
                self[(i, j)] += o[(i, j)];
            }
        }
    }
}

impl Sub for CMat {
    type Output = CMat;
    #[inline]
    fn sub(mut self, o: CMat) -> CMat {
        self -= o;
        self
    }
}

impl SubAssign for CMat {
    #[inline]
    fn sub_assign(&mut self, o: CMat) {
        debug_assert_eq!(self.n, o.n);
        for i in 0..self.n {
            for j in 0..self.n {
                self[(i, j)] -= o[(i, j)];
            }
        }
    }
}

impl Neg for CMat {
    type Output = CMat;
    #[inline]
    fn neg(self) -> CMat {
        self.scale(-1.0)
    }
}

impl Mul for CMat {
    type Output = CMat;
    #[inline]
    fn mul(self, o: CMat) -> CMat {
        debug_assert_eq!(self.n, o.n);
        let n = self.n;
        let mut m = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                for j in 0..n {
                    m[(i, j)] += aik * o[(k, j)];
                }
            }
        }
        m
    }
}

impl Mul<f64> for CMat {
    type Output = CMat;
    #[inline]
    fn mul(self, s: f64) -> CMat {
        self.scale(s)
    }
}

impl Mul<C64> for CMat {
    type Output = CMat;
    #[inline]
    fn mul(self, s: C64) -> CMat {
        self.scale_c(s)
    }
}
