use iml_core::higher_metrics::{
    hull_functional, kobayashi_distance, kobayashi_ladder, lempert_ladder, Chain, LadderConfig, OracleKappa,
    OracleLempert, SearchLempert,
};
use iml_core::disc_search::SearchConfig;
use iml_core::{CPoint, CVector, DomainDescriptor, DomainModel, Gauge, MinkowskiFunctional, C64};
use proptest::prelude::*;

fn in_disc(r: f64) -> impl Strategy<Value = C64> {
    (0.0..r, 0.0..6.3f64).prop_map(|(m, t)| C64::from_polar(m, t))
}

fn quick() -> LadderConfig {
    LadderConfig { restarts: 8, max_evals: 1500, hull_points: 1024, ..LadderConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ladder_is_nonincreasing_and_above_the_hull(x in in_disc(2.0), y in in_disc(2.0)) {
        prop_assume!(x.norm() + y.norm() > 1e-2);
        let v = CVector::new(vec![x, y]).unwrap();
        for g in [Gauge::MaxGeo { c: 2.0 }, Gauge::Euclidean, Gauge::L1] {
            let dom = DomainModel::new(&DomainDescriptor::balanced(g.clone(), 2)).unwrap();
            let metric = OracleKappa::new(&dom).unwrap();
            let (values, d) = kobayashi_ladder(&metric, &CPoint::origin(2), &v, 4, &quick()).unwrap();
            prop_assert!(values.windows(2).all(|w| w[1] <= w[0]));
            let sum = d.sum();
            prop_assert!(sum.sub(&v).norm() <= 1e-9 * (1.0 + v.norm()));
            let hull = hull_functional(&MinkowskiFunctional::new(g.clone(), 2).unwrap(), &v, 1024).unwrap();
            // the decomposition value never undercuts the convex-hull gauge
            prop_assert!(values[3] >= hull * (1.0 - 2e-3), "{g:?}: {} < {hull}", values[3]);
            if g.is_convex() {
                prop_assert!((values[3] - values[0]).abs() <= 1e-9 * values[0]);
            }
        }
    }

    #[test]
    fn chain_ladder_never_exceeds_a_single_disc(a in in_disc(0.6), b in in_disc(0.6)) {
        let dom = DomainModel::new(&DomainDescriptor::unit_polydisc(2)).unwrap();
        let eval = OracleLempert::new(&dom).unwrap();
        let z = CPoint::origin(2);
        let w = CPoint::new(vec![a, b]).unwrap();
        let (values, chain) = lempert_ladder(&eval, &z, &w, 3, &[], &quick()).unwrap();
        prop_assert!(values.windows(2).all(|p| p[1] <= p[0]));
        prop_assert_eq!(chain.points.first(), Some(&z));
        prop_assert_eq!(chain.points.last(), Some(&w));
        // convex domains: chains cannot beat the hyperbolic distance
        prop_assert!(values[2] >= values[0] * (1.0 - 1e-9));
    }
}

#[test]
fn seeded_chains_are_used() {
    let dom = DomainModel::new(&"geo-mean".parse().unwrap()).unwrap();
    let eval = SearchLempert { dom: dom.clone(), cfg: SearchConfig::linear() };
    let z = CPoint::from_real(&[0.5, 0.0]).unwrap();
    let w = CPoint::from_real(&[0.0, 0.5]).unwrap();
    let through_origin = Chain { points: vec![z.clone(), CPoint::origin(2), w.clone()] };
    let cfg = LadderConfig { chain_restarts: 0, ..quick() };
    let (values, _) = lempert_ladder(&eval, &z, &w, 2, &[through_origin], &cfg).unwrap();
    // both legs lie on coordinate axes, which are contained in the domain
    assert!(values[1] < 1e-6, "{values:?}");
    let d = kobayashi_distance(&eval, &z, &w, &[Chain { points: vec![z.clone(), CPoint::origin(2), w.clone()] }], &LadderConfig { max_m: 3, ..cfg }).unwrap();
    assert!(d.estimate.value < 1e-6);
    assert!(d.stabilizing_m <= 2);
}

#[test]
fn degenerate_hull_and_axis_splits() {
    let dom = DomainModel::new(&"geo-mean".parse().unwrap()).unwrap();
    let metric = OracleKappa::new(&dom).unwrap();
    let (values, _) = kobayashi_ladder(&metric, &CPoint::origin(2), &CVector::from_real(&[1.0, 1.0]).unwrap(), 2, &quick()).unwrap();
    assert!(values[0] > 0.9);
    assert!(values[1] <= 1e-3);
}
