use std::collections::HashSet;

use p1cube::rr::CalibrationTable;
use p1cube::search::{ambient_wellformed, canonical_cubes, enumerate, merge_db, SearchConfig, SearchOutcome, DB_HEADER};

fn run(config: &SearchConfig) -> SearchOutcome {
    enumerate(config, &mut CalibrationTable::new()).unwrap()
}

fn quick(index_min: i64, index_max: i64, adjunction: i64) -> SearchConfig {
    SearchConfig { index_min, index_max, adjunction, max_cones: 0, ..SearchConfig::default() }
}

#[test]
fn index_three_is_empty() {
    let out = run(&SearchConfig { index_min: 3, index_max: 3, ..SearchConfig::default() });
    assert!(out.records.is_empty(), "{:?}", out.records.iter().map(|r| r.to_line()).collect::<Vec<_>>());
}

#[test]
fn smaller_bound_gives_a_subset() {
    let small = run(&quick(1, 16, 60));
    let large = run(&quick(1, 16, 96));
    let keys: HashSet<_> = large.records.iter().map(|r| r.key.clone()).collect();
    for r in &small.records {
        assert!(r.adjunction <= 60);
        assert!(keys.contains(&r.key), "{}", r.to_line());
    }
    assert!(small.records.len() <= large.records.len());
}

#[test]
fn records_are_unique_and_ordered() {
    let out = run(&quick(1, 16, 96));
    let keys: HashSet<_> = out.records.iter().map(|r| &r.key).collect();
    assert_eq!(keys.len(), out.records.len());
    for w in out.records.windows(2) {
        assert!((w[0].index, &w[0].ambient) <= (w[1].index, &w[1].ambient));
    }
    for r in &out.records {
        assert_eq!(r.ambient.iter().sum::<i64>(), 3 * r.recipe.cube.socle() + r.index);
        assert!(ambient_wellformed(&r.ambient));
        assert!(!r.baskets.is_empty());
    }
}

#[test]
fn output_is_deterministic() {
    let config = quick(1, 16, 96);
    let a: Vec<String> = run(&config).records.iter().map(|r| r.to_line()).collect();
    let b: Vec<String> = run(&config).records.iter().map(|r| r.to_line()).collect();
    assert_eq!(a, b);
}

#[test]
fn merge_is_idempotent() {
    let lines: Vec<String> = run(&quick(5, 10, 96)).records.iter().map(|r| r.to_line()).collect();
    assert!(!lines.is_empty());
    let once = merge_db(&format!("{}\n", DB_HEADER), &lines).unwrap();
    let twice = merge_db(&once, &lines).unwrap();
    assert_eq!(once, twice);
    let body: Vec<&str> = once.lines().skip(1).collect();
    let mut sorted = body.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(body, sorted);
    assert!(merge_db("not a header\n", &lines).is_err());
}

#[test]
fn canonical_cubes_are_normalized() {
    for cube in canonical_cubes(12) {
        let [a1, a2, b1, b2, c1, c2] = cube.canonical_mu().as_array();
        assert_eq!((a1, b1), (0, 0));
        assert!(c1 >= 1);
        assert!(a2 <= b2 && b2 <= c2 - c1);
        assert!(cube.socle() <= 12);
    }
}
