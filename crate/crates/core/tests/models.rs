use std::collections::BTreeSet;

use p1cube::construction::{build, invariants, toric_obstruction};
use p1cube::geometry::Geometry;
use p1cube::model::bundled;
use p1cube::orbifold::Basket;
use p1cube::rr::{verify_decomposition, CalibrationTable};
use p1cube::search::verify_model;
use p1cube::series::qr;

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[test]
fn mi4_strata() {
    let m = bundled("mi4").unwrap();
    for n in 1..6 {
        let r = m.r_of(n);
        let x = build(&m.instantiate(n).unwrap()).unwrap();
        let strata = Geometry::new(&x).strata();
        let s3 = strata.iter().find(|s| s.g == 3).expect("weight-3 stratum");
        assert_eq!(s3.coordinate_points().len(), 3, "r = {}", r);
        let s2 = strata.iter().find(|s| s.g == 2);
        if r % 2 == 0 {
            assert_eq!(s2.expect("weight-2 stratum").coordinate_points().len(), 2, "r = {}", r);
        } else {
            assert!(s2.is_none_or(|s| s.coordinate_points().is_empty()), "r = {}", r);
        }
    }
}

#[test]
fn mi4_base_locus_is_four_curves() {
    let m = bundled("mi4").unwrap();
    let expected: BTreeSet<BTreeSet<String>> = [
        set(&["X121", "X122"]),
        set(&["X122", "X222"]),
        set(&["X211", "X212"]),
        set(&["X212", "X222"]),
    ]
    .into_iter()
    .collect();
    for n in 1..4 {
        let x = build(&m.instantiate(n).unwrap()).unwrap();
        let base = Geometry::new(&x).base_locus(x.kappa);
        assert!(base.iter().all(|c| c.dim == 1));
        let got: BTreeSet<BTreeSet<String>> = base.iter().map(|c| c.support.iter().cloned().collect()).collect();
        assert_eq!(got, expected);
    }
}

#[test]
fn m12_is_obstructed_with_finite_base_locus() {
    let m = bundled("m12").unwrap();
    for n in 1..4 {
        let r = m.r_of(n);
        let x = build(&m.instantiate(n).unwrap()).unwrap();
        let inv = invariants(&x).unwrap();
        assert_eq!(inv.h0, 0);
        assert!(toric_obstruction(&inv));
        let base = Geometry::new(&x).base_locus(2 * r);
        assert!(base.iter().all(|c| c.dim == 0), "r = {}", r);
    }
}

#[test]
fn mi2_degree_at_first_member() {
    let m = bundled("mi2").unwrap();
    let x = build(&m.instantiate(1).unwrap()).unwrap();
    assert_eq!(invariants(&x).unwrap().minus_ksq, qr(250, 63));
}

#[test]
fn mi3_basket_at_r11() {
    let m = bundled("mi3").unwrap();
    assert_eq!(m.r_of(1), 11);
    let x = build(&m.instantiate(1).unwrap()).unwrap();
    let b = Geometry::new(&x).basket();
    assert!(b.flags.is_empty());
    let expected = Basket::parse("1/3(1,1), 2 x 1/7(8,3), 2 x 1/15(4,7), 1/19(1,1)").unwrap();
    assert_eq!(b.basket.canonical(), expected.canonical());
}

#[test]
fn geometric_baskets_satisfy_riemann_roch() {
    let mut table = CalibrationTable::new();
    for name in ["mi2", "mi3", "mi4", "mi5", "m12"] {
        let m = bundled(name).unwrap();
        for n in m.n_min..m.n_min + 3 {
            let x = build(&m.instantiate(n).unwrap()).unwrap();
            let inv = invariants(&x).unwrap();
            let b = Geometry::new(&x).basket();
            assert!(b.flags.is_empty(), "{} n = {}: {:?}", name, n, b.flags);
            let types: Vec<_> = b.basket.entries().map(|(p, _)| p.canonical()).collect();
            table.ensure(&types, i64::MAX).unwrap();
            let terms = 2 * *x.ambient_weights().last().unwrap() as usize + 60;
            assert!(verify_decomposition(&x.series, x.kappa, &inv.dsq, &b.basket, &table, terms).unwrap(), "{} n = {}", name, n);
        }
    }
}

#[test]
fn verify_reports_every_field() {
    let mut table = CalibrationTable::new();
    let m = bundled("mi5").unwrap();
    let reports = verify_model(&m, &[1, 2], &mut table);
    for rep in &reports {
        assert!(rep.error.is_none());
        for f in ["ambient", "minus_ksq", "h0", "wellformed", "basket_geometric", "basket_rr", "geometric_rr"] {
            assert!(rep.check(f).is_some(), "missing {}", f);
        }
        assert!(rep.passed(), "{:?}", rep.checks);
    }
}

#[test]
fn instantiation_errors_name_n() {
    let text = "name = bad\nr = 2n + 1\nn_min = 1\nmu = 0, r/2, 0, 1, 1, r\nsections = r@X221\n";
    let m = p1cube::model::ModelSpec::parse(text).unwrap();
    let err = m.instantiate(1).unwrap_err();
    assert!(err.to_string().contains("n = 1"), "{}", err);
}
