//! Independent oracles: brute-force counts and direct evaluations that do
//! not share code with the library routes they check.

use num_integer::Integer;
use p1cube::construction::{build, invariants, BuildRecipe, Section};
use p1cube::cube::{hilbert_series_wp, MuVector, Vertex};
use p1cube::orbifold::{classify, OrbifoldPoint, PolarizedPoint};
use p1cube::rr::{calibrate, smooth_coeff, CalibrationTable};
use p1cube::search::dsq_integer_route;
use p1cube::series::{q, qr, HilbertSeries, Q};

/// Monomials of multidegree (m, m, m) in three pairs of variables whose
/// weighted degree is n: the graded pieces of the Segre ring.
fn segre_count(mu: &MuVector, n: i64) -> i64 {
    let [a1, a2, b1, b2, c1, c2] = mu.as_array();
    let mut count = 0;
    for m in 0..=n {
        for x in 0..=m {
            for y in 0..=m {
                for z in 0..=m {
                    if a1 * x + a2 * (m - x) + b1 * y + b2 * (m - y) + c1 * z + c2 * (m - z) == n {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

#[test]
fn straight_format_is_cubes() {
    let s = hilbert_series_wp(&MuVector::new(0, 0, 0, 0, 1, 1)).unwrap();
    let e = s.expand(20).unwrap();
    for (n, c) in e.iter().enumerate() {
        assert_eq!(*c, q(((n + 1) * (n + 1) * (n + 1)) as i64));
    }
}

#[test]
fn format_series_counts_segre_monomials() {
    for mu in [
        MuVector::new(0, 1, 0, 1, 1, 2),
        MuVector::new(0, 2, 0, 5, 1, 8),
        MuVector::new(0, 3, 0, 3, 2, 5),
        MuVector::new(0, 0, 0, 4, 3, 3),
    ] {
        let e = hilbert_series_wp(&mu).unwrap().expand(24).unwrap();
        for (n, c) in e.iter().enumerate() {
            assert_eq!(*c, q(segre_count(&mu, n as i64)), "{} at n = {}", mu, n);
        }
    }
}

fn gcd_by_subtraction(mut x: i64, mut y: i64) -> i64 {
    if x == 0 {
        return y;
    }
    while y != 0 {
        if x > y {
            std::mem::swap(&mut x, &mut y);
        }
        y -= x;
    }
    x
}

#[test]
fn rigidity_matches_direct_evaluation() {
    for r in 2..=50i64 {
        for a in 0..r {
            for b in 0..r {
                let c = classify(r, a, b);
                let d = gcd_by_subtraction((a + b) % r, r);
                let m = r / d;
                assert_eq!(c.rigid, d < m, "1/{}({},{})", r, a, b);
                let iso = gcd_by_subtraction(a, r) == 1 && gcd_by_subtraction(b, r) == 1;
                assert_eq!(c.isolated, iso, "1/{}({},{})", r, a, b);
            }
        }
    }
}

#[test]
fn t_singularities_are_not_rigid() {
    // isolated T-types are 1/(kn²)(1, kna − 1) with gcd(n, a) = 1
    for n in 1..=7i64 {
        for k in 1..=50 / (n * n) {
            let r = k * n * n;
            if r < 2 {
                continue;
            }
            for a in 1..n.max(2) {
                if a.gcd(&n) != 1 {
                    continue;
                }
                let b = (k * n * a - 1).rem_euclid(r);
                if b.gcd(&r) != 1 {
                    continue;
                }
                assert!(!classify(r, 1, b).rigid, "1/{}(1,{})", r, b);
            }
        }
    }
}

#[test]
fn calibration_spot_values() {
    let t = calibrate(&[OrbifoldPoint { r: 2, a: 1, b: 1 }, OrbifoldPoint { r: 3, a: 1, b: 1 }], 10).unwrap();
    let half = t.contribution(&PolarizedPoint::new(2, 1, 1)).unwrap();
    assert_eq!(half.values, vec![q(0), qr(-1, 4)]);
    let third = t.contribution(&PolarizedPoint::new(3, 1, 1)).unwrap();
    assert_eq!(third.values, vec![q(0), q(0), qr(-1, 3)]);
}

/// P(w₁,w₂,w₃) with pairwise coprime weights has one point 1/wᵢ(wⱼ,w_k)
/// for each weight above 1.
fn plane_points(w: [i64; 3]) -> Vec<PolarizedPoint> {
    (0..3).filter(|&i| w[i] > 1).map(|i| PolarizedPoint::new(w[i], w[(i + 1) % 3], w[(i + 2) % 3])).collect()
}

#[test]
fn calibration_reproduces_planes() {
    let mut table = CalibrationTable::new();
    for a in 1..=500i64 {
        for b in a..=500 / a {
            for c in b..=500 / (a * b) {
                if a.gcd(&b) != 1 || a.gcd(&c) != 1 || b.gcd(&c) != 1 {
                    continue;
                }
                let w = [a, b, c];
                let pts = plane_points(w);
                let types: Vec<_> = pts.iter().map(|p| p.canonical()).collect();
                table.ensure(&types, i64::MAX).unwrap();
                let len = (3 * a * b * c) as usize;
                let h = HilbertSeries::weighted_projective(&w).unwrap().expand(len).unwrap();
                let dsq = qr(1, a * b * c);
                let contribs: Vec<_> = pts.iter().map(|p| table.contribution(p).unwrap()).collect();
                for (n, hn) in h.iter().enumerate() {
                    let mut v = smooth_coeff(n as i64, a + b + c, &dsq);
                    for c in &contribs {
                        v += c.at(n as i64);
                    }
                    assert_eq!(&v, hn, "P({},{},{}) at n = {}", a, b, c, n);
                }
            }
        }
    }
}

#[test]
fn dsq_two_routes() {
    let v = Vertex::new;
    let recipes = [
        BuildRecipe::from_mu(&MuVector::new(0, 1, 0, 1, 1, 2), vec![], vec![Section::at(4, v(2, 2, 2))]).unwrap(),
        BuildRecipe::from_mu(&MuVector::new(0, 2, 0, 8, 1, 11), vec![], vec![Section::at(11, v(2, 2, 1))]).unwrap(),
        BuildRecipe::from_mu(&MuVector::new(0, 3, 0, 3, 2, 5), vec![4], vec![Section::at(8, v(2, 1, 2)), Section::at(8, v(2, 2, 1))])
            .unwrap(),
        BuildRecipe::from_mu(&MuVector::new(0, 1, 0, 7, 2, 10), vec![9], vec![Section::at(10, v(1, 1, 2)), Section::at(18, v(2, 2, 2))])
            .unwrap(),
    ];
    for r in &recipes {
        let exact: Q = invariants(&build(r).unwrap()).unwrap().dsq;
        assert_eq!(dsq_integer_route(r), exact);
    }
}
