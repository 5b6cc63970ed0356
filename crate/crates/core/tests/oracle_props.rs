use iml_core::oracles::{oracle_kappa, oracle_lempert, OracleDomainTag};
use iml_core::{CPoint, CVector, C64};
use proptest::prelude::*;

fn in_disc(r: f64) -> impl Strategy<Value = C64> {
    (0.0..r, 0.0..6.3f64).prop_map(|(m, t)| C64::from_polar(m, t))
}

fn tags() -> Vec<OracleDomainTag> {
    vec![
        OracleDomainTag::Polydisc { radii: vec![1.0, 1.0] },
        OracleDomainTag::EuclideanBall { radius: 1.0, dim: 2 },
    ]
}

proptest! {
    #[test]
    fn lempert_is_symmetric(a in in_disc(0.6), b in in_disc(0.6), c in in_disc(0.6), d in in_disc(0.6)) {
        let z = CPoint::new(vec![a, b]).unwrap();
        let w = CPoint::new(vec![c, d]).unwrap();
        for t in tags() {
            let x = oracle_lempert(&t, &z, &w).unwrap().value;
            let y = oracle_lempert(&t, &w, &z).unwrap().value;
            prop_assert!((x - y).abs() < 1e-12);
            prop_assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn disc_distance_is_mobius_invariant(a in in_disc(0.9), b in in_disc(0.9), p in in_disc(0.9), t in 0.0..6.3f64) {
        let phi = |z: C64| C64::from_polar(1.0, t) * (z - p) / (C64::new(1.0, 0.0) - p.conj() * z);
        let d = |x: C64, y: C64| {
            oracle_lempert(&OracleDomainTag::UnitDisc, &CPoint::new(vec![x]).unwrap(), &CPoint::new(vec![y]).unwrap()).unwrap().value
        };
        prop_assert!((d(a, b) - d(phi(a), phi(b))).abs() < 1e-9);
    }

    #[test]
    fn hyperbolic_distance_satisfies_the_triangle_inequality(a in in_disc(0.9), b in in_disc(0.9), c in in_disc(0.9)) {
        let d = |x: C64, y: C64| {
            oracle_lempert(&OracleDomainTag::UnitDisc, &CPoint::new(vec![x]).unwrap(), &CPoint::new(vec![y]).unwrap())
                .unwrap().value.atanh()
        };
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-9);
    }

    #[test]
    fn larger_domains_have_smaller_metrics(a in in_disc(0.6), b in in_disc(0.6), x in in_disc(2.0), y in in_disc(2.0)) {
        // ball ⊂ polydisc
        let z = CPoint::new(vec![a, b]).unwrap();
        let v = CVector::new(vec![x, y]).unwrap();
        let ball = OracleDomainTag::EuclideanBall { radius: 1.0, dim: 2 };
        let poly = OracleDomainTag::Polydisc { radii: vec![1.0, 1.0] };
        if z.norm() < 1.0 {
            prop_assert!(oracle_kappa(&poly, &z, &v).unwrap().value <= oracle_kappa(&ball, &z, &v).unwrap().value + 1e-12);
        }
    }

    #[test]
    fn metric_is_homogeneous(a in in_disc(0.6), b in in_disc(0.6), x in in_disc(2.0), l in in_disc(3.0)) {
        let z = CPoint::new(vec![a, b]).unwrap();
        let v = CVector::new(vec![x, C64::new(0.3, 0.0)]).unwrap();
        let lv = CVector::new(vec![x * l, C64::new(0.3, 0.0) * l]).unwrap();
        for t in tags() {
            let k = oracle_kappa(&t, &z, &v).unwrap().value;
            prop_assert!((oracle_kappa(&t, &z, &lv).unwrap().value - l.norm() * k).abs() < 1e-12 * (1.0 + k));
        }
    }
}

#[test]
fn reference_values() {
    let z = CPoint::origin(2);
    let ball = OracleDomainTag::EuclideanBall { radius: 1.0, dim: 2 };
    assert!((oracle_kappa(&ball, &z, &CVector::from_real(&[3.0, 4.0]).unwrap()).unwrap().value - 5.0).abs() < 1e-14);
    let poly = OracleDomainTag::Polydisc { radii: vec![1.0, 1.0] };
    assert_eq!(oracle_kappa(&poly, &z, &CVector::from_real(&[1.0, 2.0]).unwrap()).unwrap().value, 2.0);
    let half = CPoint::from_real(&[0.5]).unwrap();
    let k = oracle_kappa(&OracleDomainTag::UnitDisc, &half, &CVector::from_real(&[1.0]).unwrap()).unwrap().value;
    assert!((k - 4.0 / 3.0).abs() < 1e-14);
}
