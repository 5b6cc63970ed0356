use iml_core::curves::{
    example3_chain_experiment, length_by_distance, length_by_metric, length_ladder, ChainExperimentConfig,
    ParametricCurve, SegmentKind,
};
use iml_core::example_domains::{Example3Domain, Example3Params};
use iml_core::oracles::{oracle_kappa, oracle_lempert, OracleDomainTag};
use iml_core::{CPoint, CVector, Error, C64};
use proptest::prelude::*;

fn in_disc(r: f64) -> impl Strategy<Value = C64> {
    (0.0..r, 0.0..6.3f64).prop_map(|(m, t)| C64::from_polar(m, t))
}

fn poincare(a: &CPoint, b: &CPoint) -> iml_core::Result<f64> {
    Ok(oracle_lempert(&OracleDomainTag::UnitDisc, a, b)?.value.atanh())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn partition_sums_grow_and_dominate_the_distance(a in in_disc(0.9), b in in_disc(0.9)) {
        let seg = ParametricCurve::segment(CPoint::new(vec![a]).unwrap(), CPoint::new(vec![b]).unwrap()).unwrap();
        let ladder = length_ladder(poincare, &seg, 5).unwrap();
        prop_assert!(ladder.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12));
        let d = poincare(&seg.point(0.0), &seg.point(1.0)).unwrap();
        prop_assert!(ladder[0].1 >= d - 1e-12);
        let mu = |z: &CPoint, x: &CVector| Ok(oracle_kappa(&OracleDomainTag::UnitDisc, z, x)?.value);
        let l = length_by_metric(mu, &seg, 129).unwrap();
        prop_assert!(l >= d * (1.0 - 1e-3));
    }
}

#[test]
fn invalid_resolutions() {
    let c = ParametricCurve::Example3Gamma;
    assert!(matches!(length_by_distance(poincare, &c, 0), Err(Error::InvalidParameter(_))));
    assert!(matches!(length_by_metric(|_: &CPoint, _: &CVector| Ok(1.0), &c, 1), Err(Error::InvalidParameter(_))));
}

#[test]
fn chain_report_is_consistent() {
    let dom = Example3Domain::new(Example3Params::new(200, 20).unwrap());
    let r = example3_chain_experiment(&dom, 0.0, 1.0, &ChainExperimentConfig::default()).unwrap();
    let sum: f64 = r.segments.iter().map(|s| s.cost).sum();
    assert!((sum - r.total).abs() < 1e-15);
    let pts = r.points();
    assert_eq!(pts.first(), Some(&ParametricCurve::Example3Gamma.point(0.0)));
    assert_eq!(pts.last(), Some(&ParametricCurve::Example3Gamma.point(1.0)));
    for s in &r.segments {
        assert!(s.lempert_star < 1.0 && s.cost >= 0.0 && s.min_margin > 0.0);
        if s.kind != SegmentKind::Hop {
            assert!(s.cost < 1e-9, "{s:?}");
        }
    }
    assert!(r.hop_distances.iter().all(|&d| d <= 0.25));
    let tight = ChainExperimentConfig { hop_radius: 1e-6, ..Default::default() };
    assert!(matches!(example3_chain_experiment(&dom, 0.0, 1.0, &tight), Err(Error::NoSingularLine { .. })));
    assert!(matches!(example3_chain_experiment(&dom, 0.0, 1.5, &Default::default()), Err(Error::InvalidParameter(_))));
}
