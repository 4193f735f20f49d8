use hcseries::checks::{aw1, gl3, koornwinder, semisimple_a};
use hcseries::harish_chandra::{phi_rank_one, HcSeries, Numerics};
use hcseries::qkz::random_element;
use hcseries::qseries::{theta, QContext};
use hcseries::root_data::{datum, Bullet, Datum, DescentOrder, Family, Kappa, KappaSpec, RVec};
use hcseries::sample::Sampler;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn pick(k: usize, kappa: f64, q: f64) -> Datum {
    match k % 7 {
        0 => datum(Family::Gl, 1, Bullet::U, &[("roots", KappaSpec::uniform(kappa))], q).unwrap(),
        1 => datum(Family::Gl, 2, Bullet::U, &[("roots", KappaSpec::uniform(kappa))], q).unwrap(),
        2 => semisimple_a(1, kappa, q),
        3 => semisimple_a(2, kappa, q),
        4 => aw1(Kappa { alpha: kappa, two_alpha: 0.1, alpha1: 0.5 * kappa, two_alpha1: -0.2 }, q),
        5 => koornwinder(2, q),
        _ => koornwinder(3, q),
    }
}

fn apply_word(d: &Datum, word: &[usize], v: &RVec) -> RVec {
    word.iter().rev().fold(v.clone(), |acc, &i| d.weyl.apply(d.weyl.simple[i - 1], &acc))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn aw_parameters_constant_on_orbits(k in 0usize..7, kappa in 0.05f64..0.6, q in 0.2f64..0.8) {
        let d = pick(k, kappa, q);
        for w in 0..d.weyl.order() {
            for r in 0..d.roots.len() {
                let a = d.aw_params(r);
                let b = d.aw_params(d.root_action[w][r]);
                for j in 0..4 {
                    prop_assert!((a[j] - b[j]).abs() <= 1e-14 * a[j].abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn longest_element_negates_rho(k in 0usize..7, kappa in 0.05f64..0.6) {
        let d = pick(k, kappa, 0.5);
        let w0 = d.w0();
        for v in [&d.rho, &d.rho_tilde] {
            let image = d.weyl.apply_f(w0, v);
            for j in 0..d.dim {
                prop_assert!((image[j] + v[j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn reduced_words_give_the_same_element(k in 0usize..7, seed in 0u64..10_000) {
        let d = pick(k, 0.3, 0.5);
        let w = Sampler::new(seed).index(d.weyl.order());
        let (a, _) = d.reduced_word(&d.finite(w), DescentOrder::Smallest);
        let (b, _) = d.reduced_word(&d.finite(w), DescentOrder::Largest);
        prop_assert_eq!(a.len(), b.len());
        for j in 0..d.dim {
            let e = RVec::unit(d.dim, j);
            let expect = d.weyl.apply(w, &e);
            prop_assert_eq!(&apply_word(&d, &a, &e), &expect);
            prop_assert_eq!(&apply_word(&d, &b, &e), &expect);
        }
    }

    #[test]
    fn length_by_inversions_and_by_words(k in 0usize..7, seed in 0u64..10_000) {
        let d = pick(k, 0.3, 0.5);
        let mut s = Sampler::new(seed);
        let w = random_element(&d, &mut s, 2);
        let inv = d.inversion_set(&w).len();
        prop_assert_eq!(d.length(&w), inv);
        prop_assert_eq!(d.reduced_word(&w, DescentOrder::Smallest).0.len(), inv);
        prop_assert_eq!(d.reduced_word(&w, DescentOrder::Largest).0.len(), inv);
    }

    #[test]
    fn dual_is_an_involution(k in 0usize..7, kappa in 0.05f64..0.6, q in 0.2f64..0.8) {
        let d = pick(k, kappa, q);
        let dd = d.dual().dual();
        prop_assert_eq!(d.roots.len(), dd.roots.len());
        for r in 0..d.roots.len() {
            prop_assert_eq!(&d.roots[r].v, &dd.roots[r].v);
            prop_assert_eq!(d.aw_params(r), dd.aw_params(r));
        }
        prop_assert_eq!(&d.rho, &dd.rho);
        prop_assert_eq!(&d.lattice.gens, &dd.lattice.gens);
        prop_assert_eq!(&d.lattice_tilde.gens, &dd.lattice_tilde.gens);
    }

    #[test]
    fn theta_functional_equation(r in -3i32..=3, m in 0.2f64..5.0, arg in -3.1f64..3.1, q in 0.1f64..0.9) {
        let ctx = QContext::new(q);
        let x = C64::from_polar(m, arg);
        let lhs = theta(x * q.powi(r), &ctx).unwrap();
        let th = theta(x, &ctx).unwrap();
        let rhs = (-x / q.sqrt()).powi(-r) * q.powf(-(r * r) as f64 / 2.0) * th;
        prop_assert!((lhs - rhs).norm() < 1e-10 * th.norm().max(rhs.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn truncation_is_graded(k in 0usize..2, seed in 0u64..10_000) {
        let d = if k == 0 { gl3(0.4) } else { koornwinder(2, 0.4) };
        let xi = Sampler::new(seed).spectral_point(&d, (-0.6, 0.6), (-0.6, 0.6));
        let small = HcSeries::new(&d, &xi, &Numerics::new(&d, 6)).unwrap();
        let large = HcSeries::new(&d, &xi, &Numerics::new(&d, 10)).unwrap();
        let t = &small.table.psi;
        for (i, e) in t.idx.exps.iter().enumerate() {
            let abs: Vec<i64> = e.iter().zip(&t.offset).map(|(a, b)| *a as i64 + b).collect();
            prop_assert_eq!(t.c[i], large.table.psi.coeff(&abs));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn rank_one_series_matches_closed_form(
        ka in 0.05f64..0.4, k2a in -0.2f64..0.2, k1 in 0.05f64..0.4, k2 in -0.2f64..0.2,
        xr in -1.2f64..0.2, xim in -0.6f64..0.6, yr in -0.6f64..0.6, yim in -0.6f64..0.6,
    ) {
        let d = aw1(Kappa { alpha: ka, two_alpha: k2a, alpha1: k1, two_alpha1: k2 }, 0.45);
        let num = Numerics::new(&d, 30);
        let (x, y) = (C64::new(xr, xim), C64::new(yr, yim));
        let Ok(h) = HcSeries::new(&d, &[y], &num) else { return Ok(()) };
        let Ok(closed) = phi_rank_one(&d, 1, x, &[y], &num.ctx) else { return Ok(()) };
        prop_assert!((h.eval(&[x]) - closed).norm() < 1e-8 * closed.norm());
    }
}
