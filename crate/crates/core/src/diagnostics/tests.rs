use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::cmat::{CMat, C64};
use crate::exact::to_f64;
use crate::g2_algebra::{phi0, ExteriorElement, PHI0_ORIENTATION, TOP};
use crate::heat_flow::{lambda_bar, run, FlowConfig, FlowProblem};
use crate::lattice_model::{
    curvature, curvature_norm_sq, smooth_metric, Envelope, HolomorphicTwist, LatticeChart, TwistSpec,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_form(rank: usize, seed: u64) -> MatTwoForm {
    use rand::Rng;
    let mut r = rng(seed);
    let comps = (0..21)
        .map(|_| {
            let m = CMat::from_fn(rank, |_, _| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
            m.antihermitian_part()
        })
        .collect();
    MatTwoForm { rank, comps }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn chern_weil_minus_part_only() {
    let (_, m) = random_form(2, 1).g2_split();
    let d = chern_weil_density(&m);
    assert!(d.f_plus_sq < 1e-24);
    assert!(close(d.ym, d.kappa, 1e-12), "{d:?}");
}

#[test]
fn chern_weil_plus_part_only() {
    let (p, _) = random_form(3, 2).g2_split();
    let d = chern_weil_density(&p);
    assert!(d.f_minus_sq < 1e-24);
    assert!(close(d.kappa, -2.0 * d.f_plus_sq, 1e-12), "{d:?}");
    assert!(close(d.ym, d.f_plus_sq, 1e-12));
}

#[test]
fn chern_weil_zero_form() {
    let d = chern_weil_density(&MatTwoForm::zero(2));
    assert_eq!(d, ChernWeilDensity::default());
}

#[test]
fn float_wedge_agrees_with_exact_rational_wedge() {
    // rank 1, F = iη with small integer η: κ = −σ·coeff(η∧η∧φ₀).
    let pairs = [([1, 2], 1), ([3, 4], 2), ([5, 6], -1), ([1, 7], 3), ([2, 5], 1)];
    let mut eta = ExteriorElement::zero();
    let mut f = MatTwoForm::zero(1);
    let masks = crate::g2_algebra::two_form_basis();
    for (idx, c) in pairs {
        eta = &eta + &ExteriorElement::monomial(&idx, crate::exact::rat(c));
        let m = (1u8 << (idx[0] - 1)) | (1u8 << (idx[1] - 1));
        let i = masks.iter().position(|&b| b == m).unwrap();
        f.comps[i] = CMat::scalar(1, C64::new(0.0, c as f64));
    }
    let exact = to_f64(&eta.wedge(&eta).wedge(&phi0()).coeff(TOP));
    let d = chern_weil_density(&f);
    assert!((d.kappa - (-(PHI0_ORIENTATION as f64) * exact)).abs() < 1e-12, "{} vs {}", d.kappa, exact);
}

#[test]
fn split_identity_on_random_kahler_samples() {
    let mut r = rng(3);
    for n in 1..=3 {
        let samples: Vec<(Vec<CMat>, f64)> = (0..20).map(|_| (random_kahler_curvature(n, 2, &mut r), 0.5)).collect();
        let rep = chern_weil_report(n, &samples);
        assert!(rep.split_residual < 1e-12, "{rep:?}");
        assert!(rep.orthogonality_residual() < 1e-12);
        assert!(rep.hodge_riemann_residual < 1e-12);
    }
}

#[test]
fn primitive_kahler_curvature_lifts_to_an_instanton() {
    let mut r = rng(4);
    let n = 3;
    let mut f = random_kahler_curvature(n, 2, &mut r);
    // F_{jj̄} ↦ F_{jj̄} − (1/n)Σ F_{kk̄} removes ΛF.
    let tr = (0..n).fold(CMat::zeros(2), |a, j| a + f[j * n + j]).scale(1.0 / n as f64);
    for j in 0..n {
        f[j * n + j] -= tr;
    }
    let (p, _) = MatTwoForm::from_kahler(n, 2, &f, true).g2_split();
    assert!(p.norm_sq() < 1e-24);
}

#[test]
fn hodge_riemann_pure_trace_and_primitive() {
    let mut r = rng(5);
    for n in 2..=3 {
        let mut f = vec![CMat::zeros(2); n * n];
        let a = random_kahler_curvature(1, 2, &mut r)[0];
        for j in 0..n {
            f[j * n + j] = a;
        }
        let hr = hodge_riemann(n, &MatTwoForm::from_kahler(n, 2, &f, false));
        assert!(hr.perp_sq < 1e-24);
        assert!(close(hr.lhs, -crate::lattice_model::factorial(n - 1) * hr.fhat_sq / n as f64, 1e-12));
        let mut g = random_kahler_curvature(n, 2, &mut r);
        let tr = (0..n).fold(CMat::zeros(2), |acc, j| acc + g[j * n + j]).scale(1.0 / n as f64);
        for j in 0..n {
            g[j * n + j] -= tr;
        }
        let hr = hodge_riemann(n, &MatTwoForm::from_kahler(n, 2, &g, false));
        assert!(hr.fhat_sq < 1e-24);
        assert!(close(hr.lhs, crate::lattice_model::factorial(n - 2) * hr.perp_sq, 1e-12));
    }
}

#[test]
fn lifted_norm_matches_lattice_curvature_norm() {
    let ch = LatticeChart::cylinder(1, 6, 8, 2.0, 1).unwrap();
    let spec = TwistSpec { rank: 2, amplitude: 0.4, modes: 3, envelope: Envelope::Uniform, seed: 3 };
    let tw = HolomorphicTwist::from_spec(&ch, &spec);
    let h = smooth_metric(&ch, 2, 0.3, 3, 7);
    let f = curvature(&ch, &h, &tw).unwrap();
    let rep = lattice_chern_weil(&ch, &h, &f).unwrap();
    let direct: f64 = curvature_norm_sq(&h, &f).iter().enumerate().map(|(x, v)| ch.weight(x) * v).sum();
    // Symmetrisation only removes the compatibility defect.
    assert!(rep.compatibility_defect < 0.5);
    assert!(close(rep.ym, direct, 0.05), "{} {}", rep.ym, direct);
    assert!(rep.split_residual < 1e-10);
}

#[test]
fn energy_series_of_flat_data_vanishes() {
    let ch = LatticeChart::cylinder(1, 6, 8, 2.0, 1).unwrap();
    let spec = TwistSpec { rank: 2, amplitude: 0.0, modes: 1, envelope: Envelope::Uniform, seed: 0 };
    let tw = HolomorphicTwist::from_spec(&ch, &spec);
    let p = FlowProblem::new(ch.clone(), tw, crate::lattice_model::EndoField::identity(2, ch.len())).unwrap();
    let tr = run(&p, &FlowConfig { dt: 0.5 * ch.cfl_limit(), t_end: 0.05, ..FlowConfig::default() }).unwrap();
    let es = energy_e(&p, &tr).unwrap();
    assert!(es.e.iter().all(|v| *v == 0.0));
    assert!(es.non_positive && es.non_increasing);
}

fn scalar_field(ch: &LatticeChart, f: impl Fn(usize) -> f64) -> Vec<f64> {
    (0..ch.len()).map(f).collect()
}

#[test]
fn weak_bound_zero_field_passes_with_zero_beta() {
    let ch = LatticeChart::cylinder(1, 8, 32, 4.0, 1).unwrap();
    let bank = bump_bank(&ch, 4, &[0.5, 1.0]);
    assert!(!bank.is_empty());
    let rep = weak_laplacian_beta(&ch, &[vec![0.0; ch.len()]], 0.0, &bank);
    assert!(rep.passed);
}

#[test]
fn weak_bound_of_a_concave_quadratic_is_sharp() {
    // f = −A(s − 2)² has Δf = 2A for Δ = −Σ∂², so ∫fΔφ = 2A‖φ‖₁.
    let ch = LatticeChart::cylinder(1, 8, 32, 4.0, 1).unwrap();
    let a = 0.7;
    let f = scalar_field(&ch, |x| -a * (ch.s_of(x) - 2.0).powi(2));
    let bank = bump_bank(&ch, 4, &[0.5, 1.0]);
    let ok = weak_laplacian_beta(&ch, &[f.clone()], 2.0 * a * (1.0 + 1e-9), &bank);
    assert!(ok.passed, "{:?}", ok.worst_ratio_l1);
    assert!((ok.worst_ratio_l1 - 1.0).abs() < 1e-6);
    let bad = weak_laplacian_beta(&ch, &[f], 1.9 * a, &bank);
    assert!(!bad.passed);
    assert!(!bad.violations.is_empty());
}

#[test]
fn parabola_examples() {
    let s: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
    let beta = 2.0;
    let flat = vec![3.0; s.len()];
    let r = parabola_check(&s, &flat, beta);
    assert_eq!(r.violations, 0);
    assert_eq!(r.s_star, 10.0);
    let l = 5.0;
    let slow: Vec<f64> = s.iter().map(|v| l - beta / 4.0 * v * v).collect();
    let r = parabola_check(&s, &slow, beta);
    assert_eq!(r.s_star, 0.0);
    assert!(r.checked > 1);
    assert_eq!(r.violations, 0);
    let fast: Vec<f64> = s.iter().map(|v| l - 4.0 * beta * v * v).collect();
    assert!(parabola_check(&s, &fast, beta).violations > 0);
}

#[test]
fn delta_plus_closes_the_parabola_at_epsilon_l() {
    let (beta, eps, l) = (1.3, 0.5, 7.0);
    let d = delta_plus(beta, eps, l);
    assert!((parabola(l, beta, d) - eps * l).abs() < 1e-12);
}

#[test]
fn moser_constant_field_saturates_cylinders() {
    let ch = LatticeChart::cylinder(1, 8, 64, 8.0, 1).unwrap();
    let lam = vec![2.0; ch.len()];
    let uc = unit_cylinder(&ch, &lam, 3, 1.0);
    assert!((uc.ratio - 1.0).abs() < 1e-12, "{uc:?}");
    assert!((uc.volume - 0.5 * ch.torus_volume() * cylinder_extent(&ch)).abs() < 1e-9);
    let rep = moser_slab_check(&ch, &lam, 1.0, 0.5, 1.0, 0.4);
    assert!(rep.passed && !rep.vacuous);
    assert_eq!(rep.cylinder_violations, 0);
}

/// Whole slices in `[s, s + 1/2π)` times the circle length.
fn cylinder_extent(ch: &LatticeChart) -> f64 {
    let hs = ch.axis(0).h;
    let n = ((1.0 / std::f64::consts::TAU) / hs - 1e-12).ceil();
    n * hs * ch.axis(1).h
}

#[test]
fn moser_localised_field() {
    let ch = LatticeChart::cylinder(1, 8, 64, 8.0, 1).unwrap();
    let lam = scalar_field(&ch, |x| (-(ch.s_of(x) - 3.0).powi(2)).exp() * (1.0 + 0.3 * ch.position(x, 2).cos()));
    let k = calibrate_k_prime(&ch, &lam, 1.0);
    assert!(k > 0.0 && k <= 1.0);
    let rep = moser_slab_check(&ch, &lam, 0.5, 0.5, 1.0, k);
    assert!(rep.passed, "{rep:?}");
    let strict = moser_slab_check(&ch, &lam, 0.5, 0.5, 1.0, 1.01);
    assert!(!strict.passed);
    assert!(moser_slab_check(&ch, &vec![0.0; ch.len()], 0.5, 0.5, 1.0, k).vacuous);
}

#[test]
fn lp_interpolation_examples() {
    let w = vec![0.25; 16];
    let c = lp_interpolation_check(&vec![1.7; 16], &w, 4.0 / 3.0, 1.0);
    assert!((c.lhs - c.rhs).abs() < 1e-12 * c.lhs);
    let mut ind = vec![0.0; 16];
    ind[3] = 2.0;
    let r = lp_interpolation_check(&ind, &w, 4.0 / 3.0, 1.0);
    assert!(r.holds && r.lhs > r.rhs * 1.1);
}

#[test]
fn weak_max_principle_on_convex_and_concave_fields() {
    let ch = LatticeChart::cylinder(1, 8, 16, 4.0, 1).unwrap();
    let convex = scalar_field(&ch, |x| (ch.s_of(x) - 1.3).powi(2) + (ch.position(x, 2) - 2.0).powi(2));
    let lo = vec![2, 0, 1, 0];
    let hi = vec![12, 1, 7, 8];
    let r = weak_max_principle_check(&ch, &convex, &lo, &hi);
    assert!(r.applicable && r.holds, "{r:?}");
    let concave: Vec<f64> = convex.iter().map(|v| -v).collect();
    assert!(!weak_max_principle_check(&ch, &concave, &lo, &hi).applicable);
}

#[test]
fn claim_on_flat_flow_is_zero() {
    let ch = LatticeChart::cylinder(1, 6, 16, 4.0, 1).unwrap();
    let spec = TwistSpec { rank: 2, amplitude: 0.0, modes: 1, envelope: Envelope::Uniform, seed: 0 };
    let tw = HolomorphicTwist::from_spec(&ch, &spec);
    let h0 = crate::lattice_model::EndoField::identity(2, ch.len());
    let f = curvature(&ch, &h0, &tw).unwrap();
    let lam = lambda_bar(&h0, &h0);
    let rep = claim_lower_bound(&ch, 0.0, &lam, &slice_fhat_l2(&ch, &h0, &f), 1.0, 0.3);
    assert_eq!(rep.slab_energy, 0.0);
    assert_eq!(rep.l_t, 0.0);
    assert!(rep.ratio.is_none());
}

#[test]
fn claim_measure_scales_like_root_l() {
    let ch = LatticeChart::cylinder(1, 3, 480, 60.0, 1).unwrap();
    let beta = 1.0;
    let ratios: Vec<f64> = [50.0, 100.0, 200.0]
        .iter()
        .map(|&l| {
            let lam = scalar_field(&ch, |x| (l - beta / 4.0 * ch.s_of(x).powi(2)).max(0.0));
            let zeros = vec![vec![0.0; 1]; ch.n_slices()];
            claim_lower_bound(&ch, 1.0, &lam, &zeros, beta, 0.3).mu_over_sqrt_l.unwrap()
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / 3.0;
    assert!(ratios.iter().all(|r| (r - mean).abs() <= 0.2 * mean), "{ratios:?}");
}
