use num_complex::Complex64;
use proptest::prelude::*;
use soliton_squeeze::model::{make_grid, scalar_product, second_derivative, FluctuationField, ModelParams};
use soliton_squeeze::soliton::{soliton_profile, stationary_residual, Branch};

fn field(values: &[(f64, f64)]) -> Vec<Complex64> {
    values.iter().map(|&(a, b)| Complex64::new(a, b)).collect()
}

fn pair(n: usize) -> impl Strategy<Value = FluctuationField> {
    (prop::collection::vec((-1.0..1.0, -1.0..1.0), n), prop::collection::vec((-1.0..1.0, -1.0..1.0), n))
        .prop_map(|(u, l)| FluctuationField::new(field(&u), field(&l)).unwrap())
}

/// (μ, Δ₁) inside the bright-soliton region.
fn in_region() -> impl Strategy<Value = (f64, f64)> {
    (0.5f64..2.0, 0.0f64..1.0).prop_map(|(d, t)| {
        let mu0 = (1.0 + d * d).sqrt();
        (1.0 + t * (mu0 - 1.0), d)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_product_is_hermitian(u in pair(32), s in pair(32)) {
        let g = make_grid(32, 8.0).unwrap();
        let a = scalar_product(&u, &s, &g).unwrap();
        let b = scalar_product(&s, &u, &g).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-14 * (1.0 + a.norm()));
    }

    #[test]
    fn second_derivative_is_linear(
        f in prop::collection::vec((-1.0..1.0, -1.0..1.0), 64),
        h in prop::collection::vec((-1.0..1.0, -1.0..1.0), 64),
        a in (-2.0..2.0, -2.0..2.0),
        b in (-2.0..2.0, -2.0..2.0),
    ) {
        let g = make_grid(64, 10.0).unwrap();
        let (f, h) = (field(&f), field(&h));
        let (a, b) = (Complex64::new(a.0, a.1), Complex64::new(b.0, b.1));
        let mix: Vec<Complex64> = f.iter().zip(&h).map(|(x, y)| a * x + b * y).collect();
        let lhs = second_derivative(&mix, &g).unwrap();
        let (df, dh) = (second_derivative(&f, &g).unwrap(), second_derivative(&h, &g).unwrap());
        let scale = df.iter().chain(&dh).map(|v| v.norm()).fold(1.0, f64::max);
        for k in 0..64 {
            prop_assert!((lhs[k] - a * df[k] - b * dh[k]).norm() < 1e-12 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn soliton_solves_the_stationary_equation((mu, delta1) in in_region()) {
        let g = make_grid(512, 40.0).unwrap();
        let p = ModelParams::focusing(mu, delta1).unwrap();
        let s = soliton_profile(&p, &g, Branch::Plus).unwrap();
        let r = stationary_residual(&s.psi_bar, &p, &g).unwrap();
        prop_assert!(r < 1e-8, "residual {r} at ({mu}, {delta1})");
    }

    #[test]
    fn spectral_derivative_matches_closed_form((mu, delta1) in in_region()) {
        let g = make_grid(512, 40.0).unwrap();
        let s = soliton_profile(&ModelParams::focusing(mu, delta1).unwrap(), &g, Branch::Plus).unwrap();
        let exact = s.dpsi_closed_form();
        let err = s.dpsi_bar.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn soliton_is_even((mu, delta1) in in_region()) {
        let g = make_grid(256, 40.0).unwrap();
        let s = soliton_profile(&ModelParams::focusing(mu, delta1).unwrap(), &g, Branch::Plus).unwrap();
        for j in 0..g.n() {
            prop_assert_eq!(s.psi_bar[j], s.psi_bar[g.mirror(j)]);
        }
    }
}
