use fsl_core::polyfield::{AffineMap2, Poly2, PlanarField, Scalar};
use proptest::prelude::*;

fn poly(max_deg: u32) -> impl Strategy<Value = Poly2> {
    prop::collection::vec(((0..=max_deg, 0..=max_deg), -5i64..=5, 1i64..=4), 0..6)
        .prop_map(|ts| Poly2::from_terms(ts.into_iter().map(|((i, j), n, d)| ((i, j), Scalar::ratio(n, d)))))
}

fn field() -> impl Strategy<Value = PlanarField> {
    (poly(3), poly(3)).prop_map(|(p, q)| PlanarField::new(p, q))
}

fn invertible_map() -> impl Strategy<Value = AffineMap2> {
    (prop::array::uniform4(-3i64..=3), prop::array::uniform2(-2i64..=2))
        .prop_filter("invertible", |(m, _)| m[0] * m[3] - m[1] * m[2] != 0)
        .prop_map(|(m, t)| {
            AffineMap2::new(
                [[Scalar::int(m[0]), Scalar::int(m[1])], [Scalar::int(m[2]), Scalar::int(m[3])]],
                [Scalar::int(t[0]), Scalar::int(t[1])],
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_pullback_round_trip(f in field(), m in invertible_map()) {
        let back = f.pullback_affine(&m).unwrap().pullback_affine(&m.inverse().unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn divide_exact_inverts_multiplication(f in field(), d in poly(2), k in 0u32..=3) {
        prop_assume!(!d.is_zero());
        let dk = d.pow(k);
        let g = PlanarField::new(&f.p * &dk, &f.q * &dk);
        prop_assert_eq!(g.divide_exact(&d, k).unwrap(), f);
    }

    #[test]
    fn identity_substitution_keeps_field(f in field()) {
        let r = f.substitute(&Poly2::x(), &Poly2::y()).unwrap().into_field().unwrap();
        prop_assert_eq!(r, f);
    }
}

#[test]
fn radial_field_in_directional_chart_is_u_du() {
    let radial = PlanarField::new(Poly2::x(), Poly2::y());
    let (u, v) = (Poly2::x(), Poly2::y());
    let f = radial.substitute(&u, &(&u * &v)).unwrap().into_field().unwrap().divide_exact(&u, 0).unwrap();
    assert_eq!(f.p, Poly2::x());
    assert!(f.q.is_zero());
}
