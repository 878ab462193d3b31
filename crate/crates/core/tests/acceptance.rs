//! Acceptance run: one PASS/FAIL line per criterion, with wall time against the budget.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use hypocone::cones::{
    dilated_kernel_exact, grassmann_distance, groupoid_compose, groupoid_convergence_check, groupoid_inverse,
    groupoid_range, groupoid_source, hn_membership_def2, is_subalgebra, limit_along, ApproachPath, ConeSampling,
    GroupoidElement, LimitOptions, Subspace,
};
use hypocone::estimates::{growth_report, Growth, TorusModel};
use hypocone::frame::Point;
use hypocone::lie::{bch, coadjoint, orbit_dimension, Functional, HallBasis, LieElement};
use hypocone::metric::{cc_distance, cone_convergence_check, SolverOptions};
use hypocone::model::parse_model;
use hypocone::rational::{q, qi, to_f64, Q};
use hypocone::symbols::{
    check_max_hypoelliptic, symbol, HypoOptions, NCPoly, RepCatalog, Representation, SymbolOperator,
};
use hypocone::frame::{CPoly, Poly};
use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::oracles::{coadjoint_by_matrices, heis_coords, heis_matrix, m_exp, m_id, m_log, m_mul, rand_q, rand_vec, witt};
use common::{d_ell, elliptic, grushin};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

fn line(v: Vec<Q>) -> Subspace {
    Subspace::from_exact(3, vec![v]).unwrap()
}

fn center() -> Subspace {
    line(vec![qi(0), qi(0), qi(1)])
}

fn pencil(l: &Q) -> Subspace {
    line(vec![qi(0), qi(1), l.clone()])
}

fn hall_witt() -> Outcome {
    let mut checked = 0;
    for n in 1..=3 {
        for step in 1..=5 {
            let b = HallBasis::new(n, step).map_err(|e| e.to_string())?;
            let want: Vec<usize> = (1..=step as u64).map(|k| witt(n as u64, k) as usize).collect();
            ensure!(b.graded_dims() == want, "g({n},{step}): {:?} vs {want:?}", b.graded_dims());
            checked += 1;
        }
    }
    Ok(format!("{checked} algebras"))
}

fn bch_matrix() -> Outcome {
    let b = HallBasis::new(2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..100 {
        let (u, v) = (rand_vec(&mut rng, 3), rand_vec(&mut rng, 3));
        let want = heis_coords(&m_log(&m_mul(&m_exp(&heis_matrix(&u)), &m_exp(&heis_matrix(&v)))));
        let got = bch(&b, &LieElement::new(u), &LieElement::new(v)).map_err(|e| e.to_string())?;
        ensure!(got.coords() == &want[..], "pair {i}: {:?} vs {want:?}", got.coords());
    }
    Ok("100 pairs exact".into())
}

fn coadjoint_formula() -> Outcome {
    let b = HallBasis::new(2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..100 {
        let (a, mut f) = (rand_vec(&mut rng, 3), rand_vec(&mut rng, 3));
        if i % 5 == 0 {
            f[2] = qi(0);
        }
        let mut gm = m_id();
        gm[0][1] = a[0].clone();
        gm[1][2] = a[1].clone();
        gm[0][2] = a[2].clone();
        let g = LieElement::new(heis_coords(&m_log(&gm)));
        let got = coadjoint(&b, &g, &Functional::new(f.clone())).map_err(|e| e.to_string())?;
        let closed = [&f[0] + &a[1] * &f[2], &f[1] - &a[0] * &f[2], f[2].clone()];
        ensure!(got.coords() == &closed[..], "sample {i}: closed form");
        ensure!(got.coords() == &coadjoint_by_matrices(&a, &f)[..], "sample {i}: matrix model");
        let d = orbit_dimension(&b, &Functional::new(f.clone())).unwrap();
        ensure!(d == if f[2].is_zero() { 0 } else { 2 }, "sample {i}: orbit dimension {d}");
    }
    Ok("100 samples, orbit dimensions 0/2".into())
}

fn anchor_kernel() -> Outcome {
    let f = grushin();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..100 {
        let (x, v) = (rand_vec(&mut rng, 2), rand_vec(&mut rng, 3));
        let got = f
            .anchor_at_exact(&LieElement::new(v.clone()), &Point::exact(x.clone()))
            .map_err(|e| e.to_string())?
            .ok_or("no exact anchor")?;
        ensure!(got == vec![v[0].clone(), &v[1] * &x[0] + &v[2]], "anchor sample {i}");
        let t = q(rng.gen_range(1..=30), rng.gen_range(1..=7));
        let k = dilated_kernel_exact(&f, &x, &t).map_err(|e| e.to_string())?.ok_or("no exact kernel")?;
        ensure!(k.exact() == line(vec![qi(0), t.clone(), -x[0].clone()]).exact(), "kernel sample {i}");
    }
    Ok("100 rational points".into())
}

fn cone_limits() -> Outcome {
    let f = grushin();
    let opts = LimitOptions::default();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut check = |p: ApproachPath, want: Subspace| -> Result<(), String> {
        let lim = limit_along(&f, &p, &opts)
            .map_err(|e| e.to_string())?
            .converged()
            .ok_or_else(|| format!("{p} diverged"))?;
        let gap = grassmann_distance(&lim.subspace, &want).unwrap();
        worst = worst.max(gap).max(lim.residual);
        count += 1;
        ensure!(lim.residual < 1e-8 && gap < 1e-8, "{p}: residual {:e}, gap {gap:e}", lim.residual);
        ensure!(is_subalgebra(f.basis(), &lim.subspace, 1e-9), "{p}: not a subalgebra");
        Ok(())
    };
    for x in [vec![qi(1), qi(0)], vec![q(-1, 3), qi(2)]] {
        check(ApproachPath::fixed(&x), center())?;
        check(ApproachPath::linear(&x, 0, &qi(2)), center())?;
        check(ApproachPath::parabolic(&x, 1, -1), center())?;
    }
    let origin = [qi(0), qi(1)];
    for l in [qi(0), q(1, 2), qi(-2), qi(7)] {
        check(ApproachPath::linear(&origin, 0, &l), pencil(&-l.clone()))?;
    }
    check(ApproachPath::parabolic(&origin, 0, 1), center())?;
    let sampling = ConeSampling::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let regular = Point::exact(vec![q(3, 2), qi(-1)]);
    let singular = Point::exact(vec![qi(0), q(1, 2)]);
    for i in 0..20 {
        let mut xi: Vec<f64> = rand_vec(&mut rng, 3).iter().map(to_f64).collect();
        if i % 4 == 0 {
            xi[2] = 0.0;
        }
        let off = hn_membership_def2(&f, &regular, &xi, &sampling, 1e-7).map_err(|e| e.to_string())?;
        ensure!(off.member == (xi[2] == 0.0), "x != 0, functional {xi:?}: member = {}", off.member);
        let on = hn_membership_def2(&f, &singular, &xi, &sampling, 1e-7).map_err(|e| e.to_string())?;
        ensure!(on.member, "x = 0, functional {xi:?} rejected");
    }
    Ok(format!("{count} limits, worst residual {worst:.1e}; 20 functionals"))
}

fn symbols() -> Outcome {
    let g = grushin();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let (a, b, ell) = (rand_q(&mut rng), rand_q(&mut rng), rand_q(&mut rng));
        let y = rand_q(&mut rng);
        let s = symbol(g.basis(), &d_ell(ell), &Point::exact(vec![qi(0), y]), &Representation::character(vec![a.clone(), b.clone()]))
            .map_err(|e| e.to_string())?;
        let want = Complex::new(-(&a * &a + &b * &b), qi(0));
        ensure!(matches!(&s, SymbolOperator::Scalar { exact: Some(v), .. } if *v == want), "character ({a}, {b})");
    }
    let mut worst: f64 = 0.0;
    for ell in [0i64, 2, 3] {
        for eps in [1i8, -1] {
            let s = symbol(g.basis(), &d_ell(qi(ell)), &Point::parse("0,2").unwrap(), &Representation::schrodinger(eps, 200))
                .map_err(|e| e.to_string())?;
            let mut ev = s.interior_eigenvalues(0.5);
            ev.sort_by(|p, q| q.re.total_cmp(&p.re));
            ensure!(ev.len() >= 50, "only {} interior eigenvalues", ev.len());
            for (k, z) in ev.iter().take(50).enumerate() {
                let want = -(2.0 * k as f64 + 1.0) - (ell * eps as i64) as f64;
                let err = (z - Complex::new(want, 0.0)).norm();
                worst = worst.max(err);
                ensure!(err < 1e-8, "ell={ell} eps={eps} k={k}: {z} vs {want}");
            }
        }
    }
    Ok(format!("20 exact characters; K=200 worst eigenvalue error {worst:.1e}"))
}

fn hypo_criterion() -> Outcome {
    let g = grushin();
    let catalog = RepCatalog::builtin(g.basis(), 64);
    let grid = [Point::parse("0,0").unwrap(), Point::parse("0,-3/2").unwrap(), Point::parse("1,1").unwrap()];
    let good = [qi(0), qi(2), qi(1) + q(1, 1000)];
    let bad = [qi(1), qi(3), qi(-5)];
    for (ell, expect) in good.iter().map(|l| (l, true)).chain(bad.iter().map(|l| (l, false))) {
        let r = check_max_hypoelliptic(&g, &d_ell(ell.clone()), &grid, &catalog, &HypoOptions::default())
            .map_err(|e| e.to_string())?;
        ensure!(r.hypoelliptic == expect, "ell = {ell}: verdict {}", r.hypoelliptic);
        ensure!(r.points[2].hypoelliptic, "ell = {ell}: fails off the axis");
        if !expect {
            let worst = r.points[0].worst().ok_or("no margins")?;
            ensure!(
                worst.margin < 1e-6 && worst.rep.starts_with("schrodinger"),
                "ell = {ell}: worst {} margin {:e}",
                worst.rep,
                worst.margin
            );
        }
    }
    Ok("{0, 2, 1.001} hypoelliptic; {1, 3, -5} fail at a Schrodinger rep".into())
}

fn estimates() -> Outcome {
    let m = TorusModel::grushin_torus();
    let one = CPoly::real(Poly::one(2));
    let x1x1 = NCPoly::zero(2, 2).with_term(one.clone(), &[0, 0]).unwrap();
    let br = NCPoly::zero(2, 2)
        .with_term(one.clone(), &[0, 1])
        .unwrap()
        .with_term(&CPoly::zero(2) - &one, &[1, 0])
        .unwrap();
    let ks = [8, 16, 24, 32];
    let a = growth_report(&m, &x1x1, &d_ell(qi(0)), &ks).map_err(|e| e.to_string())?;
    let b = growth_report(&m, &br, &d_ell(qi(3)), &ks).map_err(|e| e.to_string())?;
    ensure!(a.classification == Growth::Bounded, "D0, X1^2: {} (slope {:.3})", a.classification, a.slope);
    ensure!(b.classification == Growth::Growing, "D3, bracket: {} (slope {:.3})", b.classification, b.slope);
    Ok(format!("D0/X1^2 slope {:.3} bounded, D3/bracket slope {:.3} growing", a.slope, b.slope))
}

fn cc_metric() -> Outcome {
    let opts = SolverOptions::default();
    let e = elliptic();
    let origin = Point::new(vec![0.0, 0.0]);
    let mut worst: f64 = 0.0;
    for to in [[3.0, 4.0], [-1.0, 2.0], [0.5, -0.25]] {
        let d = cc_distance(&e, &origin, &Point::new(to.to_vec()), &opts).map_err(|e| e.to_string())?;
        let want = (to[0] * to[0] + to[1] * to[1]).sqrt();
        worst = worst.max((d.value - want).abs() / want);
        ensure!((d.value - want).abs() <= 0.01 * want, "elliptic to {to:?}: {} vs {want}", d.value);
    }
    let g = grushin();
    let ratios: Vec<f64> = [1e-3, 1e-2, 1e-1, 1.0]
        .iter()
        .map(|&b| {
            cc_distance(&g, &origin, &Point::new(vec![0.0, b]), &opts).map(|d| d.value / f64::sqrt(b))
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    ensure!(hi <= 1.1 * lo, "d/sqrt(b) ranges over [{lo}, {hi}]");
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models/grushin.json");
    let model = parse_model(&std::fs::read_to_string(path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let grid = model.grids.get("default").ok_or("model has no default grid")?;
    let dirs = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.6, 0.8, 1.0]];
    let ts = [0.2, 0.1, 0.05];
    let slack = 10.0 * opts.endpoint_tol;
    let sampling = ConeSampling::default();
    for x in grid {
        let cone = hypocone::cones::cone_g0(&model.frame, x, &sampling).map_err(|e| e.to_string())?;
        let h = cone
            .members
            .into_iter()
            .find(|m| m.approaches.iter().any(|a| a == "fixed"))
            .ok_or("no fixed-path limit")?
            .subspace;
        let table = cone_convergence_check(&model.frame, x, &h, &dirs, &ts, &opts).map_err(|e| e.to_string())?;
        for i in 0..dirs.len() {
            ensure!(table.decreasing(i, slack), "at {x}, direction {i}: {:?}", table.row(i).map(|c| c.residual).collect::<Vec<_>>());
        }
    }
    Ok(format!(
        "elliptic worst {:.2}%; d/sqrt(b) in [{lo:.4}, {hi:.4}]; cone check on {} grid points",
        100.0 * worst,
        grid.len()
    ))
}

fn groupoid() -> Outcome {
    let f = grushin();
    let hall = f.basis();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = |x: &GroupoidElement, y: &GroupoidElement| groupoid_compose(hall, x, y).map_err(|e| e.to_string());
    let check = |a: &GroupoidElement, b: &GroupoidElement, c: &GroupoidElement| -> Result<(), String> {
        ensure!(m(&m(a, b)?, c)? == m(a, &m(b, c)?)?, "associativity fails on {a}, {b}, {c}");
        for e in [a, b, c] {
            let r = groupoid_range(hall, e).map_err(|e| e.to_string())?;
            let s = groupoid_source(hall, e);
            let inv = groupoid_inverse(hall, e).map_err(|e| e.to_string())?;
            ensure!(&m(&r, e)? == e && &m(e, &s)? == e, "unit law fails on {e}");
            ensure!(m(e, &inv)? == r && m(&inv, e)? == s, "inverse law fails on {e}");
        }
        Ok(())
    };
    for _ in 0..500 {
        let t = q(rng.gen_range(1..=20), rng.gen_range(1..=9));
        let p: Vec<Vec<Q>> = (0..4).map(|_| rand_vec(&mut rng, 2)).collect();
        let e = |i: usize| GroupoidElement::pair(p[i].clone(), p[i + 1].clone(), t.clone()).unwrap();
        check(&e(0), &e(1), &e(2))?;
    }
    let coset = |g: Vec<Q>, h: &Subspace, x: &[Q]| GroupoidElement::coset(hall, &g, h, x.to_vec()).unwrap();
    let h_of = |e: &GroupoidElement| Subspace::from_exact(3, e.subalgebra().unwrap().to_vec()).unwrap();
    for i in 0..500 {
        let (x, h) = if i % 2 == 0 {
            (vec![qi(0), rand_q(&mut rng)], pencil(&rand_q(&mut rng)))
        } else {
            (vec![q(rng.gen_range(1..=9), rng.gen_range(1..=5)), rand_q(&mut rng)], center())
        };
        let c = coset(rand_vec(&mut rng, 3), &h, &x);
        let b = coset(rand_vec(&mut rng, 3), &h_of(&groupoid_range(hall, &c).unwrap()), &x);
        let a = coset(rand_vec(&mut rng, 3), &h_of(&groupoid_range(hall, &b).unwrap()), &x);
        check(&a, &b, &c)?;
    }
    let mut cases = vec![
        (ApproachPath::fixed(&[qi(1), qi(0)]), center()),
        (ApproachPath::fixed(&[q(-1, 2), qi(2)]), center()),
    ];
    for l in [qi(1), q(-1, 2)] {
        cases.push((ApproachPath::linear(&[qi(0), qi(0)], 0, &l), pencil(&-l.clone())));
    }
    let mut rates = Vec::new();
    for (path, h) in cases {
        for _ in 0..2 {
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let table = groupoid_convergence_check(&f, &v, &h, &path, 0.25, 6).map_err(|e| e.to_string())?;
            let rate = table.rate();
            ensure!(rate.is_none_or(|r| r > 0.9), "{path} v={v:?}: rate {rate:?}");
            ensure!(table.rate_constant() < 10.0, "{path} v={v:?}: residual/t up to {}", table.rate_constant());
            rates.extend(rate);
        }
    }
    let min_rate = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(format!("1000 tuples exact; convergence order >= {min_rate:.2}"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("Hall/Witt graded dimensions", Duration::from_secs(1), hall_witt),
        ("BCH against the 3x3 matrix model", Duration::from_secs(1), bch_matrix),
        ("coadjoint action and orbit dimensions", Duration::from_secs(1), coadjoint_formula),
        ("anchor and dilated kernel", Duration::from_secs(1), anchor_kernel),
        ("cone limits and Helffer-Nourrigat sets", Duration::from_secs(10), cone_limits),
        ("symbols on characters and Schrodinger reps", Duration::from_secs(5), symbols),
        ("maximal hypoellipticity criterion", Duration::from_secs(10), hypo_criterion),
        ("finite-K maximal estimate growth", Duration::from_secs(120), estimates),
        ("Carnot-Caratheodory distances", Duration::from_secs(300), cc_metric),
        ("groupoid axioms and convergence", Duration::from_secs(10), groupoid),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > *budget => Err(format!("{msg}; over budget {budget:?}")),
            o => o,
        };
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} ({:.2}s)", i + 1, elapsed.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} ({:.2}s)", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
