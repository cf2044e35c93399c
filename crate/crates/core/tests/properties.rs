use mhdrt::basis::Discretization;
use mhdrt::forms::{assemble_forms, evaluate_energy, reduce_basis, ReducedMode};
use mhdrt::growthrate::{fixed_point_forms, phi, Stability};
use mhdrt::model::{critical_field, FluidParams, MagneticField};
use mhdrt::spectrum::alpha_value;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params() -> impl Strategy<Value = FluidParams<f64>> {
    (
        0.5..1.5f64,
        1.1..3.0f64,
        0.3..2.0f64,
        0.3..2.0f64,
        0.5..2.0f64,
        0.5..2.0f64,
        0.5..2.0f64,
    )
        .prop_map(|(rm, r, mp, mm, g, l, m)| FluidParams::new(rm * r, rm, mp, mm, g, l, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn alpha_increases_with_s(p in params(), b in -1.0..1.0f64, frac in 0.0..2.0f64, kx in -8.0..8.0f64, ky in 0.5..8.0f64) {
        let d = Discretization::uniform(12, p.ell, p.m).unwrap();
        let f = MagneticField::new(b, 0.3 * b, frac * critical_field(&p));
        let forms = assemble_forms(&p, &f, [kx, ky], &d).unwrap();
        let a1 = alpha_value(&forms, 0.01).unwrap();
        let a2 = alpha_value(&forms, 0.1).unwrap();
        let a3 = alpha_value(&forms, 1.0).unwrap();
        prop_assert!(a1 < a2 && a2 < a3, "{a1} {a2} {a3}");
    }

    #[test]
    fn phi_is_one_at_growth_rate(p in params(), frac in 0.0..0.8f64, kmag in 2.0..15.0f64) {
        let d = Discretization::uniform(16, p.ell, p.m).unwrap();
        let f = MagneticField::new(0.0, 0.0, frac * critical_field(&p));
        let forms = assemble_forms(&p, &f, [0.0, kmag], &d).unwrap();
        let r = fixed_point_forms(&forms, 1e-10).unwrap();
        if r.status == Stability::Unstable {
            prop_assert!((phi(&forms, r.lambda).unwrap() - 1.0).abs() < 1e-8);
            prop_assert!(phi(&forms, 0.5 * r.lambda).unwrap() < 1.0);
            prop_assert!(phi(&forms, 2.0 * r.lambda).unwrap() > 1.0);
        }
    }

    #[test]
    fn supercritical_never_grows(p in params(), frac in 1.05..3.0f64, kmag in 0.1..100.0f64, b in -1.0..1.0f64) {
        let d = Discretization::uniform(16, p.ell, p.m).unwrap();
        let f = MagneticField::new(b, -b, frac * critical_field(&p));
        let forms = assemble_forms(&p, &f, [kmag, 0.5 * kmag], &d).unwrap();
        prop_assert_eq!(fixed_point_forms(&forms, 1e-10).unwrap().status, Stability::Stable);
    }

    #[test]
    fn energies_are_nonnegative(p in params(), seed in 0u64..1000, kx in -5.0..5.0f64, ky in 0.2..5.0f64) {
        let d = Discretization::uniform(12, p.ell, p.m).unwrap();
        let f = MagneticField::new(0.4, 0.1, 0.2);
        let forms = assemble_forms(&p, &f, [kx, ky], &d).unwrap();
        let rb = reduce_basis(&d, [kx, ky]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = ReducedMode::random(&d, &rb, &mut rng, 0.7, 6);
        let e = evaluate_energy(&forms, &m, 0.5).unwrap();
        prop_assert!(e.j > 0.0 && e.e1 > 0.0);
    }
}

#[test]
fn single_precision_agrees() {
    let k = [0.0f32, 10.0];
    let d32 = Discretization::<f32>::uniform(12, 1.0, 1.0).unwrap();
    let p32 = FluidParams::<f32>::canonical();
    let f32_forms = assemble_forms(&p32, &MagneticField::new(0.0, 0.0, 0.3), k, &d32).unwrap();
    let r32 = fixed_point_forms(&f32_forms, 1e-4).unwrap();
    let d = Discretization::<f64>::uniform(12, 1.0, 1.0).unwrap();
    let forms = assemble_forms(&FluidParams::canonical(), &MagneticField::new(0.0, 0.0, 0.3), [0.0, 10.0], &d).unwrap();
    let r = fixed_point_forms(&forms, 1e-10).unwrap();
    assert_eq!(r32.status, Stability::Unstable);
    assert!(
        (r32.lambda as f64 - r.lambda).abs() < 1e-2 * r.lambda,
        "{} vs {}",
        r32.lambda,
        r.lambda
    );
}
