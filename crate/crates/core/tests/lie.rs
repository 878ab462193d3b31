mod common;

use hypocone::lie::{bch, bracket, coadjoint, dilate, inverse, orbit_dimension, Functional, HallBasis, LieElement};
use hypocone::rational::{q, qi, Q};
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::oracles::{coadjoint_by_matrices, heis_coords, heis_matrix, m_exp, m_log, m_mul, rand_vec, witt};

fn rational() -> impl Strategy<Value = Q> {
    (-12i64..=12, 1i64..=6).prop_map(|(n, d)| q(n, d))
}

fn element(dim: usize) -> impl Strategy<Value = LieElement> {
    prop::collection::vec(rational(), dim).prop_map(LieElement::new)
}

#[test]
fn graded_dimensions_match_witt() {
    for n in 1..=3 {
        for step in 1..=5 {
            let b = HallBasis::new(n, step).unwrap();
            let want: Vec<usize> = (1..=step as u64).map(|k| witt(n as u64, k) as usize).collect();
            assert_eq!(b.graded_dims(), want, "g({n},{step})");
            assert_eq!(b.dim(), want.iter().sum::<usize>());
        }
    }
}

#[test]
fn witt_oracle_sanity() {
    // necklace counts: 2 letters gives 2, 1, 2, 3, 6, 9; 3 letters gives 3, 3, 8, 18, 48
    assert_eq!((1..=6).map(|k| witt(2, k)).collect::<Vec<_>>(), [2, 1, 2, 3, 6, 9]);
    assert_eq!((1..=5).map(|k| witt(3, k)).collect::<Vec<_>>(), [3, 3, 8, 18, 48]);
}

#[test]
fn bch_agrees_with_matrix_logarithm() {
    let b = HallBasis::new(2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let (u, v) = (rand_vec(&mut rng, 3), rand_vec(&mut rng, 3));
        let want = heis_coords(&m_log(&m_mul(&m_exp(&heis_matrix(&u)), &m_exp(&heis_matrix(&v)))));
        let got = bch(&b, &LieElement::new(u), &LieElement::new(v)).unwrap();
        assert_eq!(got.coords(), &want[..]);
    }
}

#[test]
fn matrix_bracket_matches_structure_constants() {
    let b = HallBasis::new(2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let (u, v) = (rand_vec(&mut rng, 3), rand_vec(&mut rng, 3));
        let (mu, mv) = (heis_matrix(&u), heis_matrix(&v));
        let comm = common::oracles::m_add(&m_mul(&mu, &mv), &m_mul(&mv, &mu), &qi(-1));
        let got = bracket(&b, &LieElement::new(u), &LieElement::new(v)).unwrap();
        assert_eq!(got.coords(), &heis_coords(&comm)[..]);
    }
}

#[test]
fn coadjoint_matches_matrix_model_and_closed_form() {
    let b = HallBasis::new(2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let (a, f) = (rand_vec(&mut rng, 3), rand_vec(&mut rng, 3));
        let mut gm = common::oracles::m_id();
        gm[0][1] = a[0].clone();
        gm[1][2] = a[1].clone();
        gm[0][2] = a[2].clone();
        let g = LieElement::new(heis_coords(&m_log(&gm)));
        let got = coadjoint(&b, &g, &Functional::new(f.clone())).unwrap();
        let closed = [&f[0] + &a[1] * &f[2], &f[1] - &a[0] * &f[2], f[2].clone()];
        assert_eq!(got.coords(), &closed[..]);
        assert_eq!(got.coords(), &coadjoint_by_matrices(&a, &f)[..]);
        let d = orbit_dimension(&b, &Functional::new(f.clone())).unwrap();
        assert_eq!(d, if f[2].is_zero() { 0 } else { 2 });
    }
    assert_eq!(orbit_dimension(&b, &Functional::new(vec![qi(3), qi(-1), qi(0)])).unwrap(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jacobi_identity(a in element(14), bb in element(14), c in element(14)) {
        let h = HallBasis::new(3, 3).unwrap();
        let br = |x: &LieElement, y: &LieElement| bracket(&h, x, y).unwrap();
        let s = &(&br(&a, &br(&bb, &c)) + &br(&bb, &br(&c, &a))) + &br(&c, &br(&a, &bb));
        prop_assert!(s.is_zero());
        prop_assert_eq!(br(&a, &bb), -&br(&bb, &a));
    }

    #[test]
    fn group_law_is_associative(a in element(8), bb in element(8), c in element(8)) {
        let h = HallBasis::new(2, 4).unwrap();
        let m = |x: &LieElement, y: &LieElement| bch(&h, x, y).unwrap();
        prop_assert_eq!(m(&m(&a, &bb), &c), m(&a, &m(&bb, &c)));
        prop_assert!(m(&a, &inverse(&a)).is_zero());
    }

    #[test]
    fn dilations_are_automorphisms(a in element(8), bb in element(8), t in (1i64..=9, 1i64..=9)) {
        let h = HallBasis::new(2, 4).unwrap();
        let t = q(t.0, t.1);
        let d = |x: &LieElement| dilate(&h, &t, x).unwrap();
        prop_assert_eq!(d(&bracket(&h, &a, &bb).unwrap()), bracket(&h, &d(&a), &d(&bb)).unwrap());
        prop_assert_eq!(d(&bch(&h, &a, &bb).unwrap()), bch(&h, &d(&a), &d(&bb)).unwrap());
    }

    #[test]
    fn coadjoint_is_an_action(g in element(8), k in element(8), f in prop::collection::vec(rational(), 8)) {
        let h = HallBasis::new(2, 4).unwrap();
        let xi = Functional::new(f);
        let gk = bch(&h, &g, &k).unwrap();
        let lhs = coadjoint(&h, &g, &coadjoint(&h, &k, &xi).unwrap()).unwrap();
        prop_assert_eq!(lhs, coadjoint(&h, &gk, &xi).unwrap());
    }
}
