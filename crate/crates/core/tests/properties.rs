use proptest::prelude::*;
use pspin_qaoa::analytic::{canonicalize, symmetry_transforms};
use pspin_qaoa::optimizer::{l_init, r_init, Summary};
use pspin_qaoa::phase::PowerResidue;
use pspin_qaoa::{ProblemSpec, QaoaModel, QaoaParams};
use std::f64::consts::PI;

fn circuit(depth: usize) -> impl Strategy<Value = QaoaParams> {
    (prop::collection::vec(-PI..PI, depth), prop::collection::vec(-PI..PI, depth))
        .prop_map(|(g, b)| QaoaParams::new(g, b).unwrap())
}

fn instance() -> impl Strategy<Value = (u32, u32, f64, QaoaParams)> {
    (1u32..=12, 2u32..=5, 0.0f64..2.5, 1usize..=5)
        .prop_flat_map(|(n, p, h, d)| (Just(n), Just(p), Just(h), circuit(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn circuits_preserve_the_norm((n, p, h, params) in instance()) {
        let model = QaoaModel::new(ProblemSpec::new(n, p, h).unwrap()).unwrap();
        prop_assert!((model.state(&params).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_lies_within_the_spectrum((n, p, h, params) in instance()) {
        let model = QaoaModel::new(ProblemSpec::new(n, p, h).unwrap()).unwrap();
        let rec = model.evaluate(&params).unwrap();
        prop_assert!((0.0..=1.0).contains(&rec.residual));
        prop_assert!(rec.fidelity <= 1.0 + 1e-12);
    }

    #[test]
    fn symmetries_preserve_the_energy(n in 2u32..=7, p in 2u32..=3, h in 0.0f64..2.0, params in (1usize..=4).prop_flat_map(circuit)) {
        let model = QaoaModel::new(ProblemSpec::new(n, p, h).unwrap()).unwrap();
        let e0 = model.energy(&params);
        for t in symmetry_transforms(p, n, params.depth()) {
            prop_assert!((model.energy(&t.apply(&params)) - e0).abs() < 1e-12);
        }
        let canon = canonicalize(&params, p, n);
        prop_assert!((model.energy(&canon) - e0).abs() < 1e-12);
        prop_assert_eq!(canonicalize(&canon, p, n), canon);
    }

    #[test]
    fn adjoint_gradient_matches_finite_differences((n, p, h, params) in instance()) {
        let model = QaoaModel::new(ProblemSpec::new(n, p, h).unwrap()).unwrap();
        let (_, grad) = model.energy_and_gradient(&params);
        let x = params.to_flat();
        let step = 1e-6;
        for i in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += step;
            xm[i] -= step;
            let fd = (model.energy(&QaoaParams::from_flat(&xp).unwrap())
                - model.energy(&QaoaParams::from_flat(&xm).unwrap()))
                / (2.0 * step);
            let scale = model.spec().interaction_scale() * (n as f64);
            prop_assert!((fd - grad[i]).abs() < 1e-6 * scale.max(1.0) * (1.0 + grad[i].abs()), "component {}: {} vs {}", i, fd, grad[i]);
        }
    }

    #[test]
    fn power_residue_matches_exact_reduction(m in -40i64..=40, p in 2u32..=20, mant in 1u64..1 << 20, s in 1i32..=40) {
        let t = mant as f64 * 2f64.powi(-s);
        let exact = (m as i128).pow(p);
        let modulus = 1i128 << s;
        let r = (mant as i128 % modulus) * (exact.rem_euclid(modulus)) % modulus;
        let expected = (r as f64 / modulus as f64).rem_euclid(1.0);
        let got = PowerResidue::new(m, p).turns(t).rem_euclid(1.0);
        let d = (got - expected).abs();
        prop_assert!(d.min(1.0 - d) < 1e-15, "{} vs {}", got, expected);
    }

    #[test]
    fn summary_ignores_order(mut v in prop::collection::vec(0.0f64..1.0, 1..30), rot in 0usize..30) {
        let a = Summary::of(&v).unwrap();
        let k = rot % v.len();
        v.rotate_left(k);
        v.reverse();
        prop_assert_eq!(Summary::of(&v).unwrap(), a);
        prop_assert!(a.min <= a.mean && a.mean <= a.max);
    }

    #[test]
    fn initial_points_are_in_range(depth in 1usize..=12, seed in any::<u64>(), n in 2u32..40, p in 2u32..5, h in 0.0f64..3.0) {
        let r = r_init(depth, seed).unwrap();
        prop_assert!(r.to_flat().iter().all(|x| (0.0..=PI).contains(x)));
        let spec = ProblemSpec::new(n, p, h).unwrap();
        let clean = l_init(depth, &spec, 1.0, 0.0, seed).unwrap().to_flat();
        let noisy = l_init(depth, &spec, 1.0, 0.05, seed).unwrap().to_flat();
        for (a, b) in noisy.iter().zip(&clean) {
            prop_assert!((a - b).abs() <= 0.05 * b.abs() * (1.0 + 1e-12));
        }
    }
}
