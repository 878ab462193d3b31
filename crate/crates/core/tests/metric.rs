mod common;

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use hypocone::cones::Subspace;
use hypocone::frame::Point;
use hypocone::lie::HallBasis;
use hypocone::metric::{
    cc_distance, cone_convergence_check, group_cc_distance, horizontal_flow, path_length, ControlPath, SolverOptions,
};
use hypocone::rational::qi;

use common::{elliptic, grushin};

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn p(x: f64, y: f64) -> Point {
    Point::new(vec![x, y])
}

/// Shortest path on a lattice whose edges are constant-control Grushin
/// segments: from `(x, y)` the control `(dx, dy / (x + dx/2))` reaches
/// `(x + dx, y + dy)` in unit time.
fn grushin_dijkstra(target: f64) -> f64 {
    let sx = target.sqrt() / 8.0;
    let sy = target / 40.0;
    let (ni, j0, nj) = (24i64, -20i64, 60i64);
    let idx = |i: i64, j: i64| ((i + ni) * (nj - j0 + 1) + (j - j0)) as usize;
    let total = ((2 * ni + 1) * (nj - j0 + 1)) as usize;
    let mut dist = vec![f64::INFINITY; total];
    let mut heap = BinaryHeap::new();
    dist[idx(0, 0)] = 0.0;
    heap.push((Reverse(0u64), 0i64, 0i64));
    let goal = idx(0, 40);
    while let Some((Reverse(dk), i, j)) = heap.pop() {
        let d = f64::from_bits(dk);
        if d > dist[idx(i, j)] {
            continue;
        }
        if idx(i, j) == goal {
            return d;
        }
        for di in -2..=2i64 {
            for dj in -8..=8i64 {
                let (a, b) = (i + di, j + dj);
                if a.abs() > ni || b < j0 || b > nj || (di == 0 && dj == 0) {
                    continue;
                }
                let dx = di as f64 * sx;
                let dy = dj as f64 * sy;
                let mid = i as f64 * sx + dx / 2.0;
                let cost = if dj == 0 {
                    dx.abs()
                } else if mid.abs() < 1e-15 {
                    continue;
                } else {
                    (dx * dx + (dy / mid).powi(2)).sqrt()
                };
                let nd = d + cost;
                if nd < dist[idx(a, b)] {
                    dist[idx(a, b)] = nd;
                    heap.push((Reverse(nd.to_bits()), a, b));
                }
            }
        }
    }
    f64::INFINITY
}

#[test]
fn square_loop_exhibits_the_bracket() {
    let f = grushin();
    for s in [0.1, 0.3] {
        let u = ControlPath::from_rows(vec![
            vec![4.0 * s, 0.0],
            vec![0.0, 4.0 * s],
            vec![-4.0 * s, 0.0],
            vec![0.0, -4.0 * s],
        ])
        .unwrap();
        let tr = horizontal_flow(&f, &p(0.0, 0.0), &u, 8).unwrap();
        let e = tr.endpoint.coords();
        assert!(e[0].abs() < 1e-12);
        assert!((e[1] - s * s).abs() < 1e-12, "{e:?}");
        assert!((path_length(&u) - 4.0 * s).abs() < 1e-12);
    }
}

#[test]
fn euclidean_distance_on_the_elliptic_frame() {
    let d = cc_distance(&elliptic(), &p(0.0, 0.0), &p(3.0, 4.0), &opts()).unwrap();
    assert!((d.value - 5.0).abs() < 0.05, "{}", d.value);
    assert!(d.residual <= 1e-6);
    assert!(d.converged);
}

#[test]
fn grushin_vertical_distance_scales_like_square_root() {
    // closed form for geodesics through the singular line: sqrt(2 pi b)
    let f = grushin();
    let mut ratios = Vec::new();
    for b in [1e-1, 1e-2, 1e-3] {
        let d = cc_distance(&f, &p(0.0, 0.0), &p(0.0, b), &opts()).unwrap();
        ratios.push(d.value / b.sqrt());
    }
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    assert!(hi / lo < 1.1, "{ratios:?}");
    for r in &ratios {
        assert!((r / (2.0 * PI).sqrt() - 1.0).abs() < 0.02, "{ratios:?}");
    }
    let slope = (ratios[2].ln() - ratios[0].ln()) / (1e-3f64.ln() - 1e-1f64.ln());
    assert!(slope.abs() < 0.02, "{slope}");
}

#[test]
fn grushin_distance_against_lattice_oracle() {
    let b = 0.1;
    let oracle = grushin_dijkstra(b);
    let d = cc_distance(&grushin(), &p(0.0, 0.0), &p(0.0, b), &opts()).unwrap();
    assert!(d.value <= oracle * 1.01, "{} vs {oracle}", d.value);
    assert!(d.value >= oracle * 0.85, "{} vs {oracle}", d.value);
}

#[test]
fn symmetry_and_triangle_inequality() {
    let f = grushin();
    let pts = [p(0.0, 0.0), p(0.3, 0.1), p(-0.2, 0.25)];
    let d = |a: &Point, b: &Point| cc_distance(&f, a, b, &opts()).unwrap().value;
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                m[i][j] = d(&pts[i], &pts[j]);
            }
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            assert!((m[i][j] - m[j][i]).abs() < 1e-3 * m[i][j].max(1.0), "{m:?}");
            for k in 0..3 {
                if i != j && j != k && i != k {
                    assert!(m[i][k] <= m[i][j] + m[j][k] + 1e-4, "{m:?}");
                }
            }
        }
    }
}

#[test]
fn distance_dominates_chart_distance() {
    // |X1|, |X2| <= 1 on the unit box, so d >= |y - x| / sqrt(2)
    let f = grushin();
    for (a, b) in [(p(0.1, 0.2), p(0.5, -0.3)), (p(-0.4, 0.0), p(0.2, 0.4))] {
        let d = cc_distance(&f, &a, &b, &opts()).unwrap().value;
        let e = ((a.coords()[0] - b.coords()[0]).powi(2) + (a.coords()[1] - b.coords()[1]).powi(2)).sqrt();
        assert!(d >= e / 2f64.sqrt(), "{d} {e}");
    }
}

#[test]
fn refinement_does_not_increase_distance() {
    let f = grushin();
    let coarse = SolverOptions { steps: 32, ..opts() };
    let a = cc_distance(&f, &p(0.0, 0.0), &p(0.2, 0.05), &coarse).unwrap().value;
    let b = cc_distance(&f, &p(0.0, 0.0), &p(0.2, 0.05), &opts()).unwrap().value;
    assert!(b <= a + 1e-5, "{a} {b}");
}

#[test]
fn abelian_group_distance_is_euclidean() {
    let hall = HallBasis::new(3, 1).unwrap();
    let d = group_cc_distance(&hall, &Subspace::zero(3), &[1.0, 2.0, 2.0], &opts()).unwrap();
    assert!((d.value - 3.0).abs() < 0.03, "{}", d.value);
}

#[test]
fn heisenberg_center_distance() {
    // isoperimetric oracle: a loop enclosing area s has length >= 2 sqrt(pi s)
    let hall = HallBasis::new(2, 2).unwrap();
    let mut ratios = Vec::new();
    for s in [1.0, 0.25, 0.01] {
        let mut v = vec![0.0; 3];
        v[2] = s;
        let d = group_cc_distance(&hall, &Subspace::zero(3), &v, &opts()).unwrap();
        assert!(d.value > 0.0);
        ratios.push(d.value / s.sqrt());
    }
    for r in &ratios {
        assert!((r / (2.0 * PI.sqrt()) - 1.0).abs() < 0.02, "{ratios:?}");
    }
}

#[test]
fn quotient_by_the_center_is_euclidean() {
    let hall = HallBasis::new(2, 2).unwrap();
    let h = Subspace::from_exact(3, vec![vec![qi(0), qi(0), qi(1)]]).unwrap();
    let d = group_cc_distance(&hall, &h, &[3.0, 4.0, 7.0], &opts()).unwrap();
    assert!((d.value - 5.0).abs() < 0.05, "{}", d.value);
}

#[test]
fn quotient_by_a_generator_is_the_grushin_plane() {
    let hall = HallBasis::new(2, 2).unwrap();
    let h = Subspace::from_exact(3, vec![vec![qi(0), qi(1), qi(0)]]).unwrap();
    let b = 0.05;
    let d = group_cc_distance(&hall, &h, &[0.0, 0.0, b], &opts()).unwrap();
    assert!((d.value / (2.0 * PI * b).sqrt() - 1.0).abs() < 0.02, "{}", d.value);
}

#[test]
fn cone_check_on_the_flat_frame() {
    let f = elliptic();
    let dirs = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.6, -0.8]];
    let t = cone_convergence_check(&f, &p(0.3, 0.2), &Subspace::zero(2), &dirs, &[0.1], &opts()).unwrap();
    assert_eq!(t.cells.len(), 3);
    assert_eq!(t.row(0).next().unwrap().residual, Some(0.0));
    assert!(t.max_relative().unwrap() < 0.02);
}

#[test]
fn cone_check_at_a_regular_grushin_point() {
    let f = grushin();
    let h = Subspace::from_exact(3, vec![vec![qi(0), qi(0), qi(1)]]).unwrap();
    let dirs = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.6, 0.8, 1.0]];
    let t = cone_convergence_check(&f, &p(1.0, 0.0), &h, &dirs, &[0.05, 0.2, 0.1], &opts()).unwrap();
    let ts: Vec<f64> = t.row(0).map(|c| c.t).collect();
    assert_eq!(ts, vec![0.2, 0.1, 0.05]);
    for i in 0..dirs.len() {
        assert!(t.decreasing(i, 1e-6), "{:?}", t.row(i).collect::<Vec<_>>());
    }
}
