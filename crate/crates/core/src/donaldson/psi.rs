//! The even and odd parts of `Ψ(d) = (d − 1 + e^{−d})/d²` and their divided
//! differences.

/// `Ψe(x) = (cosh x − 1)/x²` or `Ψo(x) = (sinh x − x)/x²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Psi {
    Even,
    Odd,
}

const SERIES_RADIUS: f64 = 1.0;
const SERIES_TERMS: usize = 14;

/// `[psi][order][k]`: coefficient of `x^{2k}` after pulling out the odd
/// factor `x` where there is one.
fn coefficients() -> &'static [[[f64; SERIES_TERMS]; 2]; 2] {
    static TABLE: std::sync::OnceLock<[[[f64; SERIES_TERMS]; 2]; 2]> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        let fact = |n: usize| (1..=n).map(|q| q as f64).product::<f64>();
        let mut t = [[[0.0; SERIES_TERMS]; 2]; 2];
        for k in 0..SERIES_TERMS {
            // Even: Σ x^{2k}/(2k+2)!, derivative Σ 2k x^{2k−1}/(2k+2)! = x Σ 2(k+1) x^{2k}/(2k+4)!.
            t[0][0][k] = 1.0 / fact(2 * k + 2);
            t[0][1][k] = 2.0 * (k + 1) as f64 / fact(2 * k + 4);
            // Odd: Σ x^{2k+1}/(2k+3)!, derivative Σ (2k+1) x^{2k}/(2k+3)!.
            t[1][0][k] = 1.0 / fact(2 * k + 3);
            t[1][1][k] = (2 * k + 1) as f64 / fact(2 * k + 3);
        }
        t
    })
}

impl Psi {
    pub(crate) fn value(self, x: f64) -> f64 {
        if x.abs() <= SERIES_RADIUS {
            return self.series(x, 0);
        }
        match self {
            Psi::Even => (x.cosh() - 1.0) / (x * x),
            Psi::Odd => (x.sinh() - x) / (x * x),
        }
    }

    pub(crate) fn deriv(self, x: f64) -> f64 {
        if x.abs() <= SERIES_RADIUS {
            return self.series(x, 1);
        }
        let x3 = x * x * x;
        match self {
            Psi::Even => (x * x.sinh() - 2.0 * (x.cosh() - 1.0)) / x3,
            Psi::Odd => (x * x.cosh() - x - 2.0 * (x.sinh() - x)) / x3,
        }
    }

    /// `order`-th derivative (0 or 1) of the Taylor series `Σ x^p/(p+2)!` over
    /// the even (resp. odd) powers `p`, by Horner in `x²`.
    fn series(self, x: f64, order: usize) -> f64 {
        let c = &coefficients()[self as usize][order];
        let x2 = x * x;
        let s = c.iter().rev().fold(0.0, |acc, &k| acc * x2 + k);
        // Even value and odd derivative are series in x²; the other two carry one factor of x.
        match (self, order) {
            (Psi::Even, 0) | (Psi::Odd, 1) => s,
            _ => s * x,
        }
    }

    /// `(Ψ(p) − Ψ(q))/(p − q)`, switching to a midpoint expansion when the
    /// arguments are close.
    pub(crate) fn divided(self, p: f64, q: f64) -> f64 {
        let d = p - q;
        if d.abs() >= 1e-3 {
            return (self.value(p) - self.value(q)) / d;
        }
        let m = 0.5 * (p + q);
        let e = 1e-2;
        let third = (self.deriv(m + e) - 2.0 * self.deriv(m) + self.deriv(m - e)) / (e * e);
        self.deriv(m) + d * d / 24.0 * third
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_and_closed_forms_agree_at_the_seam() {
        for psi in [Psi::Even, Psi::Odd] {
            for x in [SERIES_RADIUS, -SERIES_RADIUS] {
                let closed = match psi {
                    Psi::Even => (x.cosh() - 1.0) / (x * x),
                    Psi::Odd => (x.sinh() - x) / (x * x),
                };
                assert!((psi.series(x, 0) - closed).abs() < 1e-15);
                let h = 1e-5;
                let fd = (psi.value(x + h) - psi.value(x - h)) / (2.0 * h);
                assert!((psi.deriv(x) - fd).abs() < 1e-9, "{psi:?} {x}");
            }
        }
    }

    #[test]
    fn divided_difference_is_continuous_across_the_switch() {
        for psi in [Psi::Even, Psi::Odd] {
            for m in [-2.0, -0.3, 0.0, 0.7, 3.0] {
                let a = psi.divided(m + 5.0001e-4, m - 5.0001e-4);
                let b = psi.divided(m + 4.9999e-4, m - 4.9999e-4);
                assert!((a - b).abs() < 1e-11, "{psi:?} {m} {a} {b}");
            }
        }
    }
}
