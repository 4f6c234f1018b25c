#![allow(dead_code)]

use fsl_core::normalform::NormalFormField;
use fsl_core::polyfield::{Poly2, Scalar};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn r(num: i64, den: i64) -> Scalar {
    Scalar::ratio(num, den)
}

/// Exact `(a, b, c)` on a grid of eighths, any sign of `d`.
pub fn random_abc(rng: &mut ChaCha8Rng) -> (Scalar, Scalar, Scalar) {
    (r(rng.gen_range(-24..=24), 8), r(rng.gen_range(-24..=24), 8), r(rng.gen_range(-24..=24), 8))
}

/// Exact `(a, b, c)` with `d > 0`.
pub fn random_hyperbolic_abc(rng: &mut ChaCha8Rng) -> (Scalar, Scalar, Scalar) {
    loop {
        let a = r(rng.gen_range(-16..=16), 8);
        let c = r(rng.gen_range(-16..=7), 8);
        let b = r(rng.gen_range(-16..=16), 8);
        let d = &(&r(4, 1) * &(&Scalar::one() - &c)) - &(&a - &b).pow(2);
        if d.to_f64() > 0.05 {
            return (a, b, c);
        }
    }
}

fn small_terms(rng: &mut ChaCha8Rng, exps: &[(u32, u32)]) -> Poly2 {
    Poly2::from_terms(exps.iter().map(|&e| (e, r(rng.gen_range(-2..=2), 10))))
}

/// Normal form with the given quadratic invariants and random higher-order
/// terms. `f1(x, 0) ≥ 0.6` on `[-1, 1]`.
pub fn random_nf_with(rng: &mut ChaCha8Rng, a: Scalar, b: Scalar, c: Scalar) -> NormalFormField {
    let f1 = &Poly2::one() + &small_terms(rng, &[(1, 0), (2, 0), (0, 1), (1, 1)]);
    let f2 = &Poly2::one() + &small_terms(rng, &[(1, 0), (0, 1), (0, 2)]);
    let g1 = &Poly2::constant(c) + &small_terms(rng, &[(1, 0), (2, 0), (0, 1), (3, 0)]);
    let g2 = &Poly2::constant(b) + &small_terms(rng, &[(0, 1), (0, 2)]);
    NormalFormField::new(f1, f2, g1, g2, a).expect("normalized by construction")
}

pub fn random_hyperbolic_nf(rng: &mut ChaCha8Rng) -> NormalFormField {
    let (a, b, c) = random_hyperbolic_abc(rng);
    random_nf_with(rng, a, b, c)
}
