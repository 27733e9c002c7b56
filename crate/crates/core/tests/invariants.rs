//! Property tests for the structural invariants of each module.

use num_bigint::BigInt;
use num_integer::binomial;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use g2hym::cmat::{CMat, C64};
use g2hym::diagnostics::{
    chern_weil_density, hodge_riemann, lp_interpolation_check, random_kahler_curvature, MatTwoForm,
};
use g2hym::exact::rat;
use g2hym::g2_algebra::{
    cross, metric_from_phi, octonion_mul_full, phi0_eval, project_plus_l, t_eigen_split, t_map, two_form_basis,
    ExteriorElement, Vector7,
};
use g2hym::heat_flow::{lambda_bar, sigma, step, FlowProblem, FlowState};
use g2hym::lattice_model::{
    d1, kahler_laplacian, smooth_hermitian, smooth_metric, EndoField, Envelope, HolomorphicTwist, LatticeChart,
    TwistSpec,
};
use g2hym::monad_chern::{chern_of_monad, ChernPolynomial};

fn two_form(coeffs: &[i64]) -> ExteriorElement {
    let mut e = ExteriorElement::zero();
    for (&m, &c) in two_form_basis().iter().zip(coeffs) {
        e.add_term(m, rat(c));
    }
    e
}

fn vec7() -> impl Strategy<Value = Vector7> {
    prop::array::uniform7(-4i64..=4).prop_map(Vector7::from_ints)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn t_satisfies_its_minimal_polynomial(c in prop::collection::vec(-5i64..=5, 21)) {
        let eta = two_form(&c);
        let t = t_map(&eta).unwrap();
        let tt = t_map(&t).unwrap();
        prop_assert_eq!(tt, &t + &eta.scale(&rat(2)));
    }

    #[test]
    fn plus_lift_kills_the_minus_part(c in prop::collection::vec(-5i64..=5, 21)) {
        let split = t_eigen_split(&two_form(&c)).unwrap();
        prop_assert!(project_plus_l(&split.minus).unwrap().is_zero());
        prop_assert_eq!(&split.plus + &split.minus, two_form(&c));
    }

    #[test]
    fn cross_product_is_antisymmetric_and_dual_to_phi(a in vec7(), b in vec7(), c in vec7()) {
        let ab = cross(&a, &b);
        prop_assert_eq!(ab.clone(), cross(&b, &a).scale(&rat(-1)));
        prop_assert_eq!(phi0_eval(&a, &b, &c), metric_from_phi(&ab, &c));
    }

    #[test]
    fn octonions_are_alternative(ar in -3i64..=3, a in vec7(), br in -3i64..=3, b in vec7()) {
        let x = (rat(ar), a);
        let y = (rat(br), b);
        let left = octonion_mul_full(&x, &octonion_mul_full(&x, &y));
        let right = octonion_mul_full(&octonion_mul_full(&x, &x), &y);
        prop_assert_eq!(left, right);
    }

    #[test]
    fn chern_weil_and_hodge_riemann_on_random_curvature(seed in any::<u64>(), n in 2usize..=3, rank in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_kahler_curvature(n, rank, &mut rng);
        let d = chern_weil_density(&MatTwoForm::from_kahler(n, rank, &f, true));
        prop_assert!((d.ym - 3.0 * d.f_plus_sq - d.kappa).abs() <= 1e-8 * d.ym.max(1e-300));
        prop_assert!((d.ym - d.f_plus_sq - d.f_minus_sq).abs() <= 1e-8 * d.ym.max(1e-300));
        let hr = hodge_riemann(n, &MatTwoForm::from_kahler(n, rank, &f, false));
        prop_assert!(hr.relative_residual() <= 1e-8);
    }

    #[test]
    fn monad_classes_are_the_even_series(c in 1usize..=10, dim in 2usize..=3) {
        let (r, p) = chern_of_monad(c, dim);
        prop_assert_eq!(r, 2);
        for k in 0..=dim {
            let want = if k % 2 == 1 { BigInt::from(0) } else { binomial(BigInt::from(c + k / 2 - 1), BigInt::from(k / 2)) };
            prop_assert_eq!(p.coeff(k), want);
        }
    }

    #[test]
    fn twisting_is_invertible(c1 in -6i64..=6, c2 in -6i64..=6, a in -5i64..=5) {
        // Rank 2, so c₃ = 0.
        let p = ChernPolynomial { dim: 3, coeffs: [1, c1, c2, 0].into_iter().map(BigInt::from).collect() };
        prop_assert_eq!(p.twist(2, a).twist(2, -a), p);
    }

    #[test]
    fn lp_interpolation_holds(f in prop::collection::vec(0.0f64..5.0, 1..64), x in 0.1f64..2.0, p in 1.0f64..4.0) {
        let w: Vec<f64> = (0..f.len()).map(|i| 0.5 + (i % 3) as f64 * 0.25).collect();
        prop_assert!(lp_interpolation_check(&f, &w, p, x).holds);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sigma_and_lambda_bar_bounds(seed in 0u64..10_000, r in 2usize..=4, amp in 0.1f64..1.5) {
        let ch = LatticeChart::torus(1, 5).unwrap();
        let k = smooth_metric(&ch, r, amp, 3, seed);
        let h = smooth_metric(&ch, r, amp, 3, seed + 1);
        // Match determinants so that the eigenvalues of log(K⁻¹H) sum to zero.
        let h = EndoField::from_fn(r, ch.len(), |x| {
            let s = (k[x].det().re / h[x].det().re).powf(1.0 / r as f64);
            h[x].scale(s)
        });
        let sig = sigma(&h, &k).unwrap();
        let lb = lambda_bar(&h, &k);
        for x in 0..ch.len() {
            prop_assert!(sig[x] >= -1e-12);
            prop_assert!(lb[x].exp() <= sig[x] + 2.0 + 1e-10);
            prop_assert!(sig[x] <= 2.0 * r as f64 * ((r - 1) as f64 * lb[x]).exp() + 1e-10);
        }
        let back = sigma(&k, &h).unwrap();
        for x in 0..ch.len() {
            prop_assert!((sig[x] - back[x]).abs() <= 1e-10 * (1.0 + sig[x]));
        }
    }

    #[test]
    fn flow_step_keeps_metrics_positive_and_boundary_pinned(seed in 0u64..10_000, amp in 0.05f64..0.6) {
        let ch = LatticeChart::cylinder(1, 6, 8, 2.0, 1).unwrap();
        let spec = TwistSpec { rank: 2, amplitude: amp, modes: 3, envelope: Envelope::Exp { rate: 1.0 }, seed };
        let twist = HolomorphicTwist::from_spec(&ch, &spec);
        let h0 = smooth_metric(&ch, 2, 0.3, 2, seed + 7);
        let p = FlowProblem::new(ch.clone(), twist, h0.clone()).unwrap();
        let mut s = FlowState::initial(&p, h0.clone()).unwrap();
        let dt = 0.5 * ch.cfl_limit();
        for _ in 0..3 {
            s = step(&p, &s, dt, false).unwrap();
            for x in 0..ch.len() {
                let m = s.h[x];
                prop_assert!((m - m.adjoint()).max_abs() <= 1e-12 * m.max_abs());
                prop_assert!(m.eigh().min() > 0.0);
                if ch.is_boundary(x) {
                    prop_assert_eq!(m, h0[x]);
                }
            }
        }
    }

    #[test]
    fn summation_by_parts_on_the_torus(seed in 0u64..10_000) {
        // ⟨Δf, g⟩ = Σ_μ ⟨D⁺_μ f, D⁺_μ g⟩ with forward differences, exact on periodic axes.
        let ch = LatticeChart::torus(1, 7).unwrap();
        let f = smooth_hermitian(&ch, 1, 1.0, 4, seed);
        let g = smooth_hermitian(&ch, 1, 1.0, 4, seed + 1);
        let re = |m: &CMat| m.trace().re;
        let lap = kahler_laplacian(&ch, &f);
        let lhs: f64 = (0..ch.len()).map(|x| re(&lap[x]) * re(&g[x])).sum();
        let mut rhs = 0.0;
        for mu in 0..ch.axes().len() {
            let h = ch.axis(mu).h;
            for x in 0..ch.len() {
                let y = ch.shift(x, mu, 1).unwrap();
                rhs += (re(&f[y]) - re(&f[x])) * (re(&g[y]) - re(&g[x])) / (h * h);
            }
        }
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        // Central differences are anti-self-adjoint.
        let df = d1(&ch, &f, 0);
        let dg = d1(&ch, &g, 0);
        let a: f64 = (0..ch.len()).map(|x| re(&df[x]) * re(&g[x])).sum();
        let b: f64 = (0..ch.len()).map(|x| re(&f[x]) * re(&dg[x])).sum();
        prop_assert!((a + b).abs() <= 1e-10 * (1.0 + a.abs()));
    }
}

#[test]
fn scalar_identity_matrices_have_zero_sigma() {
    let ch = LatticeChart::torus(1, 4).unwrap();
    let h = EndoField::from_fn(2, ch.len(), |_| CMat::scalar(2, C64::new(1.0, 0.0)));
    assert!(sigma(&h, &h).unwrap().iter().all(|v| v.abs() < 1e-14));
}
