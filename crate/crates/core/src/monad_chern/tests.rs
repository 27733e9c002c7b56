use num_bigint::BigInt;

use super::*;

/// `(1 − h²)^{−c} = Σ_k C(c+k−1, k) h^{2k}`, truncated.
fn even_series(c: usize, dim: usize) -> Vec<BigInt> {
    (0..=dim)
        .map(|k| if k % 2 == 1 { BigInt::zero() } else { binomial(BigInt::from(c + k / 2 - 1), BigInt::from(k / 2)) })
        .collect()
}

#[test]
fn monad_chern_classes_match_the_even_series() {
    for dim in 2..=3 {
        for c in 1..=10 {
            let (r, p) = chern_of_monad(c, dim);
            assert_eq!(r, 2);
            assert_eq!(p.coeffs, even_series(c, dim), "c={c} dim={dim}");
            assert_eq!(p.coeff(1), BigInt::zero());
            assert_eq!(p.coeff(2), BigInt::from(c));
        }
    }
}

#[test]
fn null_correlation_signature() {
    let (r, p) = chern_of_monad(1, 3);
    assert_eq!(r, 2);
    assert_eq!(p.coeffs, vec![1, 0, 1, 0].into_iter().map(BigInt::from).collect::<Vec<_>>());
    let m = null_correlation();
    assert!(m.composition_vanishes());
    for pt in sample_points(50, 1) {
        assert_eq!(m.fiber_ranks(&pt), (1, 1));
    }
}

#[test]
fn inverse_and_multiplication_round_trip() {
    let p = ChernPolynomial::line(3, 2).mul(&ChernPolynomial::line(3, -5)).pow(2);
    assert_eq!(p.mul(&p.inverse()), ChernPolynomial::one(3));
}

#[test]
fn twist_of_a_rank_two_bundle() {
    let (_, e) = chern_of_monad(2, 3);
    let t = e.twist(2, -4);
    assert_eq!(t.coeff(1), BigInt::from(-8));
    // c₂(E(a)) = c₂ + a c₁ + a².
    assert_eq!(t.coeff(2), BigInt::from(2 + 16));
    // Twisting back recovers E.
    assert_eq!(t.twist(2, 4), e);
}

#[test]
fn restriction_examples() {
    let r = restriction_chern(1, 4, 3);
    assert_eq!(r.on_divisor.coeff(1), BigInt::zero());
    assert_eq!(r.on_divisor.dim, 2);
    assert_eq!(r.twisted.coeff(1), BigInt::from(-8));
    let triv = restriction_chern(0, 4, 3);
    assert_eq!(triv.on_divisor, ChernPolynomial::one(2));
    // c(𝒪/𝒪(−4))² for the trivial rank-2 bundle.
    let line = ChernPolynomial::line(3, -4).inverse();
    assert_eq!(triv.ambient_quotient, line.mul(&line));
}

#[test]
fn sampled_monads_are_complexes_with_full_fibre_ranks() {
    for c in 1..=4 {
        let (m, rep) = sample_monad(c, 7 + c as u64).unwrap();
        assert!(m.composition_vanishes());
        assert!(rep.composition_vanishes);
        assert_eq!(rep.full_rank_points, rep.points);
        assert_eq!(m.alpha.len(), 2 + 2 * c);
        assert_eq!(m.beta[0].len(), 2 + 2 * c);
    }
}

#[test]
fn charge_zero_is_refused() {
    assert!(matches!(sample_monad(0, 1), Err(MonadError::Charge)));
}
