use laminar::holonomy::rational::{int, q, ten_to_minus, Q};
use laminar::holonomy::{
    commutator, commutator_factorization, concatenate, conjugacy_witness, genus_factorization,
    residual, sample_points, solve_concatenation_i, solve_concatenation_ii, HoloError, HoloMap,
    Partition, PlMap,
};
use num_traits::Signed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dyadic(rng: &mut ChaCha8Rng, lo: &Q, hi: &Q) -> Q {
    let t = Q::new(rng.gen_range(1..1024i64).into(), 1024.into());
    lo + (hi - lo) * t
}

/// Random PL map with the requested number of interior fixed points,
/// alternating sides between them.
fn random_pl(rng: &mut ChaCha8Rng, fixed: usize) -> PlMap {
    let mut cuts: Vec<Q> = (0..fixed).map(|_| dyadic(rng, &int(-1), &int(1))).collect();
    cuts.sort();
    cuts.dedup();
    let mut bounds = vec![int(-1)];
    bounds.extend(cuts);
    bounds.push(int(1));
    let mut pts = vec![(int(-1), int(-1))];
    let mut up = rng.gen_bool(0.5);
    for w in bounds.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let x = dyadic(rng, a, b);
        let y = if up { dyadic(rng, &x, b) } else { dyadic(rng, a, &x) };
        pts.push((x, y));
        pts.push((b.clone(), b.clone()));
        up = !up;
    }
    PlMap::new(pts).unwrap()
}

fn above(rng: &mut ChaCha8Rng) -> PlMap {
    loop {
        let x = dyadic(rng, &int(-1), &int(1));
        let y = dyadic(rng, &x, &int(1));
        let x2 = dyadic(rng, &x, &int(1));
        let y2 = dyadic(rng, &y.clone().max(x2.clone()), &int(1));
        if let Ok(m) = PlMap::new(vec![(int(-1), int(-1)), (x, y), (x2, y2), (int(1), int(1))]) {
            if m.drift().is_ok() {
                return m;
            }
        }
    }
}

fn eps() -> Q {
    ten_to_minus(9)
}

#[test]
fn group_laws_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let (f, g, h) = (random_pl(&mut rng, 2), random_pl(&mut rng, 1), random_pl(&mut rng, 3));
        assert_eq!(f.compose(&g).compose(&h), f.compose(&g.compose(&h)));
        assert!(f.compose(&f.inverse()).is_identity());
        let gg = commutator(&HoloMap::pl(g.clone()), &HoloMap::pl(g.clone()));
        assert!(gg.is_exact_identity());
        for z in f.compose(&g).test_points() {
            assert_eq!(f.compose(&g).eval(&z), f.eval(&g.eval(&z)));
        }
    }
}

#[test]
fn conjugacy_relation_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pts = sample_points(7, 200);
    for _ in 0..20 {
        let (f, p) = (above(&mut rng), above(&mut rng));
        let qm = conjugacy_witness(&f, &p).unwrap();
        let lhs = qm.compose(&HoloMap::pl(f.clone()));
        let rhs = HoloMap::pl(p.clone()).compose(&qm);
        assert!(residual(&lhs, &rhs, &pts, &eps()) <= eps() * int(4));
    }
}

#[test]
fn conjugacy_to_itself_is_identity_on_domain() {
    let f = PlMap::through(int(0), q(1, 2)).unwrap();
    let qm = conjugacy_witness(&f, &f).unwrap();
    for z in [int(0), q(1, 8), q(1, 3), q(-7, 8), q(15, 16)] {
        let v = qm.evaluate(&z, &ten_to_minus(12));
        assert!((v.value - &z).abs() <= ten_to_minus(12));
    }
}

#[test]
fn conjugacy_rejects_opposite_sides() {
    let f = PlMap::through(int(0), q(-1, 2)).unwrap();
    let p = PlMap::through(int(0), q(1, 2)).unwrap();
    assert!(matches!(conjugacy_witness(&f, &p), Err(HoloError::Precondition { .. })));
}

#[test]
fn commutator_of_identity_is_exact() {
    let (g, h) = commutator_factorization(&PlMap::identity());
    assert!(commutator(&g, &h).is_exact_identity());
}

#[test]
fn commutator_with_fixed_point_at_zero() {
    let f = PlMap::new(vec![(int(-1), int(-1)), (q(-1, 2), q(-1, 4)), (int(0), int(0)), (q(1, 2), q(1, 4)), (int(1), int(1))]).unwrap();
    let (g, h) = commutator_factorization(&f);
    let pts = sample_points(3, 200);
    assert!(residual(&commutator(&g, &h), &HoloMap::pl(f), &pts, &eps()) <= eps() * int(4));
}

#[test]
fn commutators_of_random_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pts = sample_points(5, 100);
    for i in 0..12 {
        let f = random_pl(&mut rng, i % 4);
        let (g, h) = commutator_factorization(&f);
        let r = residual(&commutator(&g, &h), &HoloMap::pl(f), &pts, &eps());
        assert!(r <= eps() * int(4), "residual {r}");
    }
}

#[test]
fn genus_pads_identities() {
    assert_eq!(genus_factorization(&PlMap::identity(), 0), Err(HoloError::GenusZero));
    let pairs = genus_factorization(&PlMap::identity(), 3).unwrap();
    assert_eq!(pairs.len(), 3);
    assert!(pairs.iter().all(|(a, b)| a.is_exact_identity() && b.is_exact_identity()));
    let f = PlMap::through(q(1, 3), q(-1, 5)).unwrap();
    let pairs = genus_factorization(&f, 2).unwrap();
    let product = pairs.iter().fold(HoloMap::identity(), |acc, (a, b)| acc.compose(&commutator(a, b)));
    assert!(residual(&product, &HoloMap::pl(f), &sample_points(9, 200), &eps()) <= eps() * int(4));
}

/// `n`-fold exact iterate of `g ↦ concat([f, g, h])` from the identity.
fn iterate_i(f: &PlMap, h: &PlMap, n: usize) -> PlMap {
    let mut g = PlMap::identity();
    for _ in 0..n {
        let maps = [f, &g, h].map(|m| HoloMap::pl(m.clone()));
        g = concatenate(&maps, &Partition::thirds()).unwrap().as_pl().unwrap().clone();
    }
    g
}

#[test]
fn concatenation_i_matches_iterates() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..5 {
        let (f, h) = (random_pl(&mut rng, 1), random_pl(&mut rng, 0));
        let g = solve_concatenation_i(Some(HoloMap::pl(f.clone())), Some(HoloMap::pl(h.clone())));
        let n = 8;
        let oracle = iterate_i(&f, &h, n);
        // The iterate agrees with the fixed point outside the middle block of
        // width 2/3^n, whose image is pinned to the same block.
        let slack = q(2, 3i64.pow(n as u32));
        for z in sample_points(11, 200) {
            let v = g.value(&z, &eps());
            assert!((v - oracle.eval(&z)).abs() <= &slack + eps() * int(2));
        }
    }
}

#[test]
fn concatenation_i_relation_and_depth() {
    let f = HoloMap::pl(PlMap::through(int(0), q(1, 2)).unwrap());
    let h = HoloMap::pl(PlMap::through(q(-1, 3), int(0)).unwrap());
    let g = solve_concatenation_i(Some(f.clone()), Some(h.clone()));
    let rhs = concatenate(&[f, g.clone(), h], &Partition::thirds()).unwrap();
    let e = ten_to_minus(12);
    assert!(residual(&g, &rhs, &sample_points(13, 200), &e) <= e.clone() * int(4));
    let bound = (1e12f64).ln() / 3f64.ln() + 6.0;
    for z in sample_points(14, 50) {
        let ev = g.evaluate(&z, &e);
        assert!(ev.converged && (ev.depth as f64) <= bound, "depth {}", ev.depth);
    }
}

#[test]
fn concatenation_degenerate_cases() {
    assert!(solve_concatenation_i(None, None).is_exact_identity());
    assert!(solve_concatenation_i(Some(HoloMap::identity()), Some(HoloMap::identity())).is_exact_identity());
    let f = HoloMap::pl(PlMap::through(int(0), q(1, 2)).unwrap());
    let g = solve_concatenation_i(Some(f.clone()), None);
    let rhs = concatenate(&[f, g.clone()], &Partition::equal(2)).unwrap();
    assert!(residual(&g, &rhs, &sample_points(15, 100), &eps()) <= eps() * int(4));
    let (a, b) = solve_concatenation_ii(None, None, None, None);
    assert!(a.is_exact_identity() && b.is_exact_identity());
}

fn check_ii(f: &HoloMap, h: &HoloMap, s: &HoloMap, t: &HoloMap, g: &HoloMap, mu: &HoloMap) {
    let pts = sample_points(17, 100);
    let th = Partition::thirds();
    let mu_rhs = concatenate(&[f.clone(), g.invert(), h.clone()], &th).unwrap();
    let g_rhs = concatenate(&[s.clone(), mu.invert(), t.clone()], &th).unwrap();
    assert!(residual(mu, &mu_rhs, &pts, &eps()) <= eps() * int(4));
    assert!(residual(g, &g_rhs, &pts, &eps()) <= eps() * int(4));
}

#[test]
fn concatenation_ii_relations_and_swap() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let maps: Vec<HoloMap> = (0..4).map(|i| HoloMap::pl(random_pl(&mut rng, i % 2))).collect();
    let [f, h, s, t] = [0, 1, 2, 3].map(|i| maps[i].clone());
    let (g, mu) = solve_concatenation_ii(Some(f.clone()), Some(h.clone()), Some(s.clone()), Some(t.clone()));
    check_ii(&f, &h, &s, &t, &g, &mu);
    let (g2, mu2) = solve_concatenation_ii(Some(s.clone()), Some(t.clone()), Some(f.clone()), Some(h.clone()));
    check_ii(&s, &t, &f, &h, &g2, &mu2);
    let pts = sample_points(19, 100);
    assert!(residual(&g2, &mu, &pts, &eps()) <= eps() * int(4));
    assert!(residual(&mu2, &g, &pts, &eps()) <= eps() * int(4));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lazy_evaluation_refines_consistently(seed in any::<u64>(), zn in -1023i64..1024) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_pl(&mut rng, (seed % 4) as usize);
        let (g, _) = commutator_factorization(&f);
        let z = Q::new(zn.into(), 1024.into());
        let (e1, e2) = (ten_to_minus(6), ten_to_minus(10));
        let (a, b) = (g.value(&z, &e1), g.value(&z, &e2));
        prop_assert!((a - b).abs() <= &e1 + &e2);
        prop_assert_eq!(g.value(&int(1), &e2), int(1));
        prop_assert_eq!(g.value(&int(-1), &e2), int(-1));
    }

    #[test]
    fn lazy_evaluation_is_monotone(seed in any::<u64>(), a in -1023i64..1024, d in 1i64..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = HoloMap::pl(random_pl(&mut rng, 1));
        let h = HoloMap::pl(random_pl(&mut rng, 2));
        let g = solve_concatenation_i(Some(f), Some(h));
        let e = ten_to_minus(9);
        let (x, y) = (Q::new(a.into(), 1024.into()), Q::new((a + d).min(1024).into(), 1024.into()));
        prop_assert!(g.value(&x, &e) <= g.value(&y, &e) + e * int(2));
    }

    #[test]
    fn conjugacy_survives_slopes_near_one(k in 8u32..48, xn in -1000i64..1000, zn in -(1i64 << 30) + 1..(1i64 << 30), up in any::<bool>()) {
        // The displacement at x is 2^-k of the room left, so long orbits
        // are needed to cross the fundamental domain.
        let x = Q::new(xn.into(), 1024.into());
        let room = if up { int(1) - &x } else { &x + int(1) };
        let shift = room * Q::new(1.into(), num_bigint::BigInt::from(1u64) << k);
        let f = PlMap::through(x.clone(), if up { &x + &shift } else { &x - &shift }).unwrap();
        let p = PlMap::through(int(0), if up { q(1, 2) } else { q(-1, 2) }).unwrap();
        let qm = conjugacy_witness(&f, &p).unwrap();
        let z = Q::new(zn.into(), (1i64 << 30).into());
        let e = ten_to_minus(12);
        let lhs = qm.value(&f.eval(&z), &e);
        let rhs = p.eval(&qm.value(&z, &e));
        prop_assert!((lhs - rhs).abs() <= ten_to_minus(9));
    }
}
