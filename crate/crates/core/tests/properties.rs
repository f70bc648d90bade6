use fockwave_core::bootstrap::{derive_corrections, reference_tables};
use fockwave_core::exact::{psi_polynomials, Elementary, PolynomialE, PowerSeriesX, Rational};
use fockwave_core::recursion::{psi_sequence, transfer_product, transfer_step};
use fockwave_core::{asymptotics, Energy};
use proptest::prelude::*;

fn en(e: f64) -> Energy {
    Energy::new(e).unwrap()
}

fn small_poly() -> impl Strategy<Value = PolynomialE> {
    prop::collection::vec((-6i64..=6, 1i64..=5), 0..3).prop_map(|c| {
        PolynomialE::from_coeffs(c.into_iter().map(|(p, q)| Rational::new(p.into(), q.into())).collect())
    })
}

fn small_series(order: usize) -> impl Strategy<Value = PowerSeriesX> {
    prop::collection::vec(small_poly(), 0..=order + 1).prop_map(move |c| PowerSeriesX::from_coeffs(c, order))
}

fn nilpotent_series(order: usize) -> impl Strategy<Value = PowerSeriesX> {
    small_series(order).prop_map(move |s| {
        let mut c = s.coeffs().to_vec();
        if !c.is_empty() {
            c[0] = PolynomialE::zero();
        }
        PowerSeriesX::from_coeffs(c, order)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parity_is_bitwise(e in -10.0f64..10.0, n in 0usize..5000) {
        let plus = psi_sequence(en(e), n);
        let minus = psi_sequence(en(-e), n);
        for (k, (a, b)) in plus.values().iter().zip(minus.values()).enumerate() {
            let want = if k % 2 == 0 { *a } else { -*a };
            prop_assert_eq!(want, *b);
        }
    }

    #[test]
    fn product_matches_recursion(e in -10.0f64..10.0, n in 1usize..20_000) {
        let seq = psi_sequence(en(e), n);
        let (p, q) = transfer_product(en(e), n).unwrap();
        let (rp, rq) = (seq.values()[n - 1], seq.values()[n]);
        let scale = rp.hypot(rq);
        prop_assert!((p - rp).abs() <= 1e-10 * scale);
        prop_assert!((q - rq).abs() <= 1e-10 * scale);
    }

    #[test]
    fn determinant_of_step(n in 1usize..1_000_000, e in -50.0f64..50.0) {
        let det = transfer_step(n, en(e)).unwrap().determinant();
        let want = 1.0 - 1.0 / n as f64;
        prop_assert!((det - want).abs() <= 4.0 * f64::EPSILON * want.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn series_ring_laws(a in small_series(4), b in small_series(4), c in small_series(4)) {
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(
            a.mul(&b.add(&c).unwrap()).unwrap(),
            a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
        );
        prop_assert!(a.sub(&a).unwrap().is_zero());
    }

    #[test]
    fn pythagorean_identity(s in nilpotent_series(6)) {
        let sin = s.compose_elementary(Elementary::Sin).unwrap();
        let cos = s.compose_elementary(Elementary::Cos).unwrap();
        let sum = sin.mul(&sin).unwrap().add(&cos.mul(&cos).unwrap()).unwrap();
        prop_assert_eq!(sum, PowerSeriesX::one(6));
    }

    #[test]
    fn sqrt1p_squares_back(s in nilpotent_series(5)) {
        let r = s.compose_elementary(Elementary::Sqrt1p).unwrap();
        let one_plus = s.add(&PowerSeriesX::one(5)).unwrap();
        prop_assert_eq!(r.mul(&r).unwrap(), one_plus);
    }

    #[test]
    fn envelope_bound(e in -3.0f64..3.0) {
        let tables = reference_tables();
        let w = asymptotics::Window::new(1000, 4000).unwrap();
        let fit = asymptotics::extract_constants(en(e), w, &tables).unwrap();
        let ev = tables.evaluator(e);
        let psi = psi_sequence(en(e), w.n_max);
        for n in w.n_min..=w.n_max {
            let bound = fit.a_est * (1.0 + ev.delta_at(n as f64).abs()) * (1.0 + 1e-6);
            prop_assert!(psi.values()[n].abs() * (n as f64).sqrt() <= bound);
        }
        prop_assert!(fit.amplitudes.iter().all(|&a| a > 0.0));
        prop_assert!(fit.phases.windows(2).all(|p| (p[1] - p[0]).abs() < std::f64::consts::FRAC_PI_2));
    }
}

#[test]
fn exact_polynomials_agree_with_float_recursion() {
    let polys = psi_polynomials(30);
    for i in 0..20 {
        let e = -5.0 + 10.0 * i as f64 / 19.0;
        let seq = psi_sequence(en(e), 30);
        for (n, p) in polys.iter().enumerate() {
            let exact = p.eval(e);
            let float = seq.values()[n];
            let scale = exact.abs().max(1e-300);
            assert!(
                (exact - float).abs() <= 1e-12 * scale.max(seq.values()[n.saturating_sub(1)].abs()),
                "n={n} E={e}: {exact} vs {float}"
            );
        }
    }
}

#[test]
fn exact_polynomial_parity() {
    for (n, p) in psi_polynomials(40).iter().enumerate() {
        for (k, c) in p.coeffs().iter().enumerate() {
            if k % 2 != n % 2 {
                assert!(num_traits::Zero::is_zero(c), "psi_{n} has E^{k}");
            }
        }
    }
}

#[test]
fn decay_envelope_is_bounded() {
    for e in [0.0, 0.7, -2.0, 5.0] {
        let mut early: f64 = 0.0;
        let mut late: f64 = 0.0;
        let mut low = f64::INFINITY;
        let mut prev: f64 = 0.0;
        for (n, psi) in fockwave_core::recursion::PsiIter::new(en(e)).enumerate().take(1_000_001) {
            if n > 100 {
                let m = ((n - 1) as f64).sqrt() * prev.abs().max(psi.abs());
                if n <= 10_000 {
                    early = early.max(m);
                } else if n > 100_000 {
                    late = late.max(m);
                }
                low = low.min(m);
            }
            prev = psi;
        }
        // sqrt(n) max(|psi_n|, |psi_{n+1}|) neither grows nor collapses
        assert!(late <= 1.01 * early, "E={e}: {early} -> {late}");
        assert!(low > 0.5 * early, "E={e}: min {low}, max {early}");
    }
}

#[test]
fn correction_parity() {
    let t = derive_corrections(8).unwrap();
    for d in t.delta() {
        assert!(d.is_even(), "{d}");
    }
    for e in t.epsilon() {
        assert!(e.is_odd(), "{e}");
    }
}

#[test]
fn residual_shrinks_by_two_to_the_order_plus_one() {
    // doubling n_min multiplies the stripped residual by ~2^-(J+1); windows
    // sit low enough that J = 6 stays above double-precision noise
    let full = reference_tables();
    for j in [1usize, 2, 6] {
        let t = full.truncated(j);
        for e in [0.0, 1.0, 2.5] {
            let r = |n: usize| {
                asymptotics::extract_constants(en(e), asymptotics::Window::new(n, 10 * n).unwrap(), &t)
                    .unwrap()
                    .residual
            };
            let ratio = r(20) / r(40);
            let want = 2f64.powi(j as i32 + 1);
            assert!(ratio > want / 2.0 && ratio < want * 2.0, "J={j} E={e}: ratio {ratio}, want {want}");
        }
    }
}

#[test]
fn higher_order_stripping_reduces_spread() {
    let full = reference_tables();
    // J = 6 is already at double-precision noise on [10^3, 10^4], so the
    // comparison runs where both spreads are resolvable
    let w = asymptotics::Window::new(20, 200).unwrap();
    for e in [0.0, 1.0, 2.5] {
        let s2 = asymptotics::extract_constants(en(e), w, &full.truncated(2)).unwrap().amplitude_stdev();
        let s6 = asymptotics::extract_constants(en(e), w, &full).unwrap().amplitude_stdev();
        assert!(s2 / s6 > 1e3, "E={e}: {s2} vs {s6}");
    }
}
