use serde::Serialize;

/// Outcome of [`heat_kernel_diag_check`].
#[derive(Clone, Debug, Serialize)]
pub struct HeatKernelReport {
    /// Least-squares slope of `log K_t(0,0)` against `log t`.
    pub diag_exponent: f64,
    /// Expected slope `−d/2` for real dimension `d`.
    pub expected_exponent: f64,
    /// `max_t K_t(0,0)·t^{d/2}` over the sampled times.
    pub c0: f64,
    /// Gaussian width constant in `exp(−r²/(C t))`.
    pub gaussian_c: f64,
    /// Smallest constant for which the envelope holds at every sample.
    pub required_c0: f64,
    /// First offending `(site, t, K, bound)`, if any.
    pub violation: Option<(usize, f64, f64, f64)>,
    /// Total mass at the final time (1 up to rounding).
    pub mass: f64,
    pub passed: bool,
}

/// Heat kernel of `∂_t u = ∇²u` on the flat periodic square lattice with unit
/// spacing, by explicit stepping from a unit delta at the origin.
///
/// Samples `K_t(x, 0)` at `samples` log-spaced times in `[t_min, t_max]`,
/// fits the diagonal decay exponent and `C₀`, and checks the envelope
/// `K_t(x,0) ≤ C₀ t^{−1} exp(−r²/(C t))` with `C = gaussian_c` at every site.
/// The exponent must be within 10% of `−1`. On a compact lattice the kernel
/// tends to the uniform density, so the diagonal fit only bounds the
/// off-diagonal values while `t` stays below the mixing time;
/// `required_c0` records the constant that the sampled values actually need.
pub fn heat_kernel_diag_check(side: usize, t_min: f64, t_max: f64, samples: usize, gaussian_c: f64) -> HeatKernelReport {
    assert!(samples >= 2 && t_max > t_min && t_min > 0.0);
    let dt = 0.2;
    let n = side;
    let mut u = vec![0.0; n * n];
    u[0] = 1.0;
    let mut next = vec![0.0; n * n];
    let times: Vec<f64> = (0..samples)
        .map(|k| t_min * (t_max / t_min).powf(k as f64 / (samples - 1) as f64))
        .collect();
    let mut t = 0.0;
    let mut snaps: Vec<(f64, Vec<f64>)> = Vec::new();
    for &target in &times {
        while t + 0.5 * dt < target {
            for i in 0..n {
                for j in 0..n {
                    let c = u[i * n + j];
                    let lap = u[((i + 1) % n) * n + j] + u[((i + n - 1) % n) * n + j] + u[i * n + (j + 1) % n]
                        + u[i * n + (j + n - 1) % n]
                        - 4.0 * c;
                    next[i * n + j] = c + dt * lap;
                }
            }
            std::mem::swap(&mut u, &mut next);
            t += dt;
        }
        snaps.push((t, u.clone()));
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = snaps.iter().map(|(t, k)| (t.ln(), k[0].ln())).unzip();
    let slope = crate::numerics::least_squares_slope(&lx, &ly);
    let c0 = snaps.iter().map(|(t, k)| k[0] * t).fold(0.0, f64::max);
    let mut violation = None;
    let mut required_c0: f64 = 0.0;
    for (t, k) in &snaps {
        for i in 0..n {
            for j in 0..n {
                let di = i.min(n - i) as f64;
                let dj = j.min(n - j) as f64;
                let r2 = di * di + dj * dj;
                let bound = c0 / t * (-r2 / (gaussian_c * t)).exp();
                let val = k[i * n + j];
                required_c0 = required_c0.max(val * t * (r2 / (gaussian_c * t)).exp());
                if val > bound * (1.0 + 1e-12) && violation.is_none() {
                    violation = Some((i * n + j, *t, val, bound));
                }
            }
        }
    }
    let mass = u.iter().sum();
    let expected = -1.0;
    let passed = violation.is_none() && ((slope - expected) / expected).abs() <= 0.1;
    HeatKernelReport { diag_exponent: slope, expected_exponent: expected, c0, gaussian_c, required_c0, violation, mass, passed }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_equilibrates_to_uniform_density() {
        let rep = heat_kernel_diag_check(8, 50.0, 400.0, 3, 5.0);
        assert!((rep.mass - 1.0).abs() < 1e-12);
        assert!(rep.required_c0.is_finite());
        assert!(rep.diag_exponent.abs() < 1e-6, "{rep:?}");
    }

    #[test]
    fn diagonal_decays_like_inverse_time_in_two_dimensions() {
        let rep = heat_kernel_diag_check(64, 5.0, 50.0, 7, 5.0);
        assert!(rep.passed, "{rep:?}");
        assert!((rep.c0 - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 0.02);
    }
}
