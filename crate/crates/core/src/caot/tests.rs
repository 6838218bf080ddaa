use proptest::prelude::*;

use super::*;
use crate::exactnum::{frac, rat};
use crate::fgl::MoravaLaw;
use crate::polyring::partitions_of;

fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

fn law(p: u64, n: u32, bound: u32) -> MoravaLaw {
    MoravaLaw::lubin_tate(prime(p), n, bound).unwrap()
}

fn poly(l: u32, ring: Ring, terms: &[(&[u32], Rational)]) -> WeightedPoly {
    WeightedPoly::from_terms(
        ring,
        VarTable::t(l),
        terms.iter().map(|(e, c)| (e.to_vec(), c.clone())),
        None,
    )
    .unwrap()
}

fn row_of(sys: &LinearSystem, l: u32, mono: &[u32]) -> Vec<(usize, Rational)> {
    sys.row(l, mono).map(|r| r.coeffs.clone()).unwrap_or_default()
}

#[test]
fn variable_order() {
    let v: Vec<(u32, Vec<u32>)> = variables(4)
        .into_iter()
        .map(|(l, r)| (l, r.parts().to_vec()))
        .collect();
    assert_eq!(
        v,
        vec![
            (1, vec![4]),
            (2, vec![3, 1]),
            (2, vec![2, 2]),
            (3, vec![2, 1, 1]),
            (4, vec![1, 1, 1, 1])
        ]
    );
}

#[test]
fn degree_one_is_free() {
    let m = law(2, 1, 4);
    let sys = build_system(m.fgl(), 1, 1, Ring::Q).unwrap();
    assert!(sys.rows().is_empty());
    let k = solve_kernel(&sys).unwrap();
    assert_eq!(k.len(), 1);
    let g = integral_generator(m.fgl(), 1, 1).unwrap();
    assert_eq!(g.g(1).unwrap(), &poly(1, Ring::ZpLocal(prime(2)), &[(&[1], rat(1))]));
}

// For the (2,1) law F = x + y - xy + (x^2 y + x y^2) + ..., expanded by hand:
// m = 2, A_1 at uv:     2 alpha_(2) + alpha_(1,1)
// m = 3, A_1 at u^2 v:  3 alpha_(3) + alpha_(2,1) - alpha_(1,1,1)
// m = 3, A_2 at t1 u v: 2 alpha_(2,1) + alpha_(1,1,1)
#[test]
fn hand_expanded_rows() {
    let m = law(2, 1, 6);
    assert_eq!(m.fgl().a(1, 1), rat(-1));
    assert_eq!(m.fgl().a(2, 1), rat(1));
    let s2 = build_system(m.fgl(), 1, 2, Ring::Q).unwrap();
    assert_eq!(row_of(&s2, 1, &[1, 1]), vec![(0, rat(2)), (1, rat(1))]);
    assert_eq!(s2.rows().len(), 1);
    let s3 = build_system(m.fgl(), 1, 3, Ring::Q).unwrap();
    assert_eq!(row_of(&s3, 1, &[2, 1]), vec![(0, rat(3)), (1, rat(1)), (2, rat(-1))]);
    assert_eq!(row_of(&s3, 1, &[1, 2]), vec![(0, rat(3)), (1, rat(1)), (2, rat(-1))]);
    assert_eq!(row_of(&s3, 2, &[1, 1, 1]), vec![(1, rat(2)), (2, rat(1))]);
    let g = integral_generator(m.fgl(), 1, 3).unwrap();
    assert_eq!(g.coords(), vec![rat(1), rat(-1), rat(2)]);
}

#[test]
fn additive_source_kernel_is_p_special() {
    for p in [2u64, 3] {
        let pr = prime(p);
        let fa = crate::fgl::FormalGroupLaw::additive(pr, 9).unwrap();
        for m in 1..=9 {
            let sys = build_system(&fa, 1, m, Ring::Fp(pr)).unwrap();
            let kernel = solve_kernel(&sys).unwrap();
            let special: Vec<usize> = variables(m)
                .iter()
                .enumerate()
                .filter(|(_, (_, r))| is_p_special(r, pr))
                .map(|(i, _)| i)
                .collect();
            assert_eq!(kernel.len(), special.len(), "p={p} m={m}");
            for (g, &i) in kernel.iter().zip(&special) {
                let c = g.coords();
                assert!(c.iter().enumerate().all(|(j, x)| (j == i) == !x.is_zero()));
                assert!(naturality_check(g, &fa).unwrap());
            }
        }
    }
}

#[test]
fn rational_kernel_is_a_line() {
    for (p, n, mmax) in [(2, 1, 6), (3, 1, 5), (2, 2, 5)] {
        let l = law(p, n, mmax);
        for m in 1..=mmax {
            let k = solve_kernel(&build_system(l.fgl(), n, m, Ring::Q).unwrap()).unwrap();
            assert_eq!(k.len(), 1, "({p},{n}) m={m}");
            assert!(naturality_check(&k[0], l.fgl()).unwrap());
        }
    }
}

#[test]
fn modular_kernel_contains_frobenius_of_phi_1() {
    let l = law(2, 2, 4);
    let pr = prime(2);
    let k = solve_kernel(&build_system(l.fgl(), 2, 2, Ring::Fp(pr)).unwrap()).unwrap();
    assert!(k.len() >= 2);
    for g in &k {
        assert!(naturality_check(g, l.fgl()).unwrap());
    }
    assert!(k.iter().any(|g| !is_gradable(g)));
    let phi1_sq = integral_generator(l.fgl(), 2, 1)
        .unwrap()
        .to_ring(Ring::Fp(pr))
        .unwrap()
        .pointwise_pow(2)
        .unwrap();
    assert!(!is_gradable(&phi1_sq));
    assert!(naturality_check(&phi1_sq, l.fgl()).unwrap());
    assert_eq!(gradable_subspace(&k).unwrap().len(), 1);
}

#[test]
fn small_degrees_mod_p_are_one_dimensional() {
    let l = law(3, 1, 4);
    for m in 1..=2 {
        let k = solve_kernel(&build_system(l.fgl(), 1, m, Ring::Fp(prime(3))).unwrap()).unwrap();
        assert_eq!(k.len(), 1);
    }
}

#[test]
fn naturality_oracle() {
    let pr = prime(2);
    let fm = crate::fgl::FormalGroupLaw::multiplicative(pr, 4).unwrap();
    assert!(naturality_check(&GData::zero(pr, 1, 2, Ring::Q), &fm).unwrap());
    // F = x + y + xy: A_1 gives 2uv - G_2(u, v) = 0 for G_1 = t^2.
    let g = GData::new(
        pr,
        1,
        2,
        Ring::Q,
        vec![poly(1, Ring::Q, &[(&[2], rat(1))]), poly(2, Ring::Q, &[(&[1, 1], rat(2))])],
    )
    .unwrap();
    assert!(naturality_check(&g, &fm).unwrap());
    let bad = GData::new(
        pr,
        1,
        2,
        Ring::Q,
        vec![poly(1, Ring::Q, &[(&[2], rat(1))]), poly(2, Ring::Q, &[(&[1, 1], rat(3))])],
    )
    .unwrap();
    assert!(!naturality_check(&bad, &fm).unwrap());
}

#[test]
fn gdata_validation() {
    let pr = prime(3);
    let not_sym = vec![
        poly(1, Ring::Q, &[(&[2], rat(1))]),
        poly(2, Ring::Q, &[(&[1, 1], rat(1))]),
    ];
    assert!(GData::new(pr, 1, 2, Ring::Q, not_sym).is_ok());
    let asym = vec![
        WeightedPoly::zero(Ring::Q, VarTable::t(1), None),
        poly(2, Ring::Q, &[(&[1, 2], rat(1))]),
    ];
    assert!(GData::new(pr, 1, 3, Ring::Q, {
        let mut v = asym;
        v.push(WeightedPoly::zero(Ring::Q, VarTable::t(3), None));
        v
    })
    .is_err());
    let not_div = vec![poly(1, Ring::Q, &[(&[2], rat(1))]), poly(2, Ring::Q, &[(&[2, 0], rat(1)), (&[0, 2], rat(1))])];
    assert!(GData::new(pr, 1, 2, Ring::Q, not_div).is_err());
}

#[test]
fn gradability() {
    let l = law(2, 2, 4);
    let g = GData::new(
        prime(2),
        2,
        2,
        Ring::Fp(prime(2)),
        vec![
            poly(1, Ring::Fp(prime(2)), &[(&[2], rat(1))]),
            WeightedPoly::zero(Ring::Fp(prime(2)), VarTable::t(2), None),
        ],
    )
    .unwrap();
    assert!(!is_gradable(&g));
    let l1 = law(2, 1, 6);
    for m in 1..=6 {
        let phi = integral_generator(l1.fgl(), 1, m).unwrap();
        assert!(is_gradable(&phi));
    }
    for m in 1..=4 {
        assert!(is_gradable(&integral_generator(l.fgl(), 2, m).unwrap()));
    }
}

#[test]
fn generator_is_integral_and_spans_gradable_mod_p() {
    for (p, n, mmax) in [(2, 1, 6), (3, 1, 5), (2, 2, 5)] {
        let l = law(p, n, mmax);
        let fp = Ring::Fp(prime(p));
        for m in 1..=mmax {
            let phi = integral_generator(l.fgl(), n, m).unwrap();
            assert!(phi.has_unit_content(), "({p},{n}) m={m}");
            let red = phi.to_ring(fp).unwrap();
            assert!(!red.is_zero() && is_gradable(&red));
            let k = solve_kernel(&build_system(l.fgl(), n, m, fp).unwrap()).unwrap();
            let grad = gradable_subspace(&k).unwrap();
            assert_eq!(grad.len(), 1, "({p},{n}) m={m}");
            let mut e = Echelon::new(fp, variables(m).len());
            e.insert(&grad[0].coords()).unwrap();
            assert!(e.contains(&red.coords()).unwrap());
        }
    }
}

#[test]
fn chern_character() {
    let pr = prime(2);
    let fa = crate::fgl::FormalGroupLaw::additive(pr, 5).unwrap();
    let ch = ch_gdata(&fa, 1, 3).unwrap();
    assert!(ch.g(1).unwrap().is_zero() && ch.g(2).unwrap().is_zero());
    assert_eq!(ch.g(3).unwrap(), &poly(3, Ring::Q, &[(&[1, 1, 1], rat(1))]));
    // exp of the (2,2) law has exponents 1 mod 3 only
    let l = law(2, 2, 10);
    let exps: Vec<u32> = l.fgl().exp().terms().map(|(m, _)| m.exps()[0]).collect();
    assert!(exps.iter().all(|e| e % 3 == 1), "{exps:?}");
    // below p^n the generator is a unit multiple of ch_m
    for (p, n) in [(2, 2), (3, 1)] {
        let l = law(p, n, 4);
        let pr = prime(p);
        for m in 1..p.pow(n) as u32 {
            let ch = ch_gdata(l.fgl(), n, m).unwrap();
            assert!(naturality_check(&ch, l.fgl()).unwrap());
            let phi = integral_generator(l.fgl(), n, m).unwrap();
            let (pc, cc) = (phi.coords(), ch.coords());
            let i = cc.iter().position(|x| !x.is_zero()).unwrap();
            let ratio = &pc[i] / &cc[i];
            assert!(crate::exactnum::is_p_unit(&ratio, pr));
            assert_eq!(ch.scale(&ratio).coords(), pc);
        }
    }
    // K_0: ch_m has G_1 = t^m / m!
    let fm = crate::fgl::FormalGroupLaw::multiplicative(pr, 5).unwrap();
    let ch = ch_gdata(&fm, 1, 4).unwrap();
    assert_eq!(ch.g(1).unwrap(), &poly(1, Ring::Q, &[(&[4], frac(1, 24))]));
}

#[test]
fn evaluation_on_classes() {
    let l = law(2, 1, 6);
    let phi = integral_generator(l.fgl(), 1, 3).unwrap();
    let z = |n: u32, terms: &[(&[u32], i64)]| {
        WeightedPoly::from_terms(
            Ring::Q,
            VarTable::z(n),
            terms.iter().map(|(e, c)| (e.to_vec(), rat(*c))),
            None,
        )
        .unwrap()
    };
    let v = evaluate_additive(&phi, &z(3, &[(&[1, 1, 1], 1)])).unwrap();
    assert_eq!(&v, phi.g(3).unwrap());
    let v = evaluate_additive(&phi, &z(1, &[(&[1], 2)])).unwrap();
    assert_eq!(v, phi.g(1).unwrap().scale(&rat(2)));
    let v = evaluate_additive(&phi, &z(1, &[(&[2], 1)])).unwrap();
    let diag = phi.g(2).unwrap().embed(&VarTable::t(1), &[0, 0]).unwrap();
    assert_eq!(v, diag);
    let half = WeightedPoly::from_terms(Ring::Q, VarTable::z(1), [(vec![1], frac(1, 2))], None).unwrap();
    assert!(matches!(evaluate_additive(&phi, &half), Err(Error::UseAdamsTrick(_))));
}

#[test]
fn adams_operations_commute() {
    let l = law(3, 1, 6);
    for m in 1..=4 {
        let phi = integral_generator(l.fgl(), 1, m).unwrap();
        for k in [0, 1, 2, -1] {
            assert!(adams_commutation_check(&phi, l.fgl(), k).unwrap(), "m={m} k={k}");
        }
    }
    let g = GData::new(
        prime(3),
        1,
        2,
        Ring::Q,
        vec![poly(1, Ring::Q, &[(&[2], rat(1))]), WeightedPoly::zero(Ring::Q, VarTable::t(2), None)],
    )
    .unwrap();
    assert!(adams_commutation_check(&g, l.fgl(), 1).unwrap());
    assert!(!adams_commutation_check(&g, l.fgl(), 2).unwrap());
}

#[test]
fn chow_operation_composition() {
    let pr = prime(3);
    let fp = Ring::Fp(pr);
    let q = CHOpData::from_p_partition(pr, &[3, 1]).unwrap();
    assert_eq!((q.source(), q.target()), (2, 4));
    let g = GData::new(
        pr,
        2,
        2,
        fp,
        vec![WeightedPoly::zero(fp, VarTable::t(1), None), poly(2, fp, &[(&[1, 1], rat(1))])],
    )
    .unwrap();
    let out = compose_ch_operation(&q, &g).unwrap();
    assert_eq!(out.g(2).unwrap(), &poly(2, fp, &[(&[3, 1], rat(1)), (&[1, 3], rat(1))]));
    assert!(out.g(1).unwrap().is_zero() && out.g(3).unwrap().is_zero());
    let id = CHOpData::from_p_partition(pr, &[1, 1]).unwrap();
    assert_eq!(compose_ch_operation(&id, &g).unwrap(), g);
    assert!(CHOpData::from_p_partition(pr, &[2, 1]).is_err());
    assert!(matches!(
        compose_ch_operation(&CHOpData::from_p_partition(pr, &[1]).unwrap(), &g),
        Err(Error::DegreeMismatch { .. })
    ));
    let l = law(3, 2, 4);
    let phi2 = integral_generator(l.fgl(), 2, 2).unwrap();
    let composed = compose_ch_operation(&q, &phi2.to_ring(fp).unwrap()).unwrap();
    assert!(!composed.is_zero());
    assert!(naturality_check(&composed, l.fgl()).unwrap());
}

#[test]
fn pivot_structure() {
    for (p, n, mmax) in [(2, 1, 8), (3, 1, 8), (2, 2, 8)] {
        let l = law(p, n, mmax);
        for m in 1..=mmax {
            let ut = upper_triangular_check(l.fgl(), n, m).unwrap();
            assert!(ut.holds(), "({p},{n}) m={m}: {:?}", ut.failures);
            let gc = grad_coef_check(l.fgl(), n, m).unwrap();
            assert!(gc.holds(), "({p},{n}) m={m}: {:?}", gc.failures);
        }
    }
}

#[test]
fn gdata_json_roundtrip_and_rejection() {
    let l = law(2, 2, 5);
    let phi = integral_generator(l.fgl(), 2, 4).unwrap();
    let s = phi.to_json_string();
    assert_eq!(parse_gdata(&s).unwrap(), phi);
    let mut j = phi.to_json();
    j.polys[3].terms[0].1 = "1/2".into();
    assert!(GData::from_json(&j).is_err());
    let mut j = phi.to_json();
    j.polys.swap(0, 1);
    assert!(GData::from_json(&j).is_err());
    let mut j = phi.to_json();
    j.polys[1].terms.push((vec![3, 1], "1".into()));
    assert!(GData::from_json(&j).is_err());
    assert!(parse_gdata("{}").is_err());
    assert!(parse_gdata(&s.replace("\"schema_version\": 1", "\"schema_version\": 2")).is_err());
}

fn config() -> impl Strategy<Value = (u64, u32)> {
    prop_oneof![Just((2u64, 1u32)), Just((3, 1)), Just((2, 2))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernel_vectors_are_natural((p, n) in config(), m in 1u32..6, fp in any::<bool>()) {
        let l = law(p, n, 6);
        let ring = if fp { Ring::Fp(prime(p)) } else { Ring::Q };
        let k = solve_kernel(&build_system(l.fgl(), n, m, ring).unwrap()).unwrap();
        for g in &k {
            prop_assert!(naturality_check(g, l.fgl()).unwrap());
        }
    }

    #[test]
    fn perturbed_solutions_fail((p, n) in config(), m in 2u32..6, which in any::<prop::sample::Index>()) {
        let l = law(p, n, 6);
        let phi = integral_generator(l.fgl(), n, m).unwrap().to_ring(Ring::Q).unwrap();
        let mut c = phi.coords();
        let i = which.index(c.len());
        c[i] += rat(1);
        let g = GData::from_coords(prime(p), n, m, Ring::Q, &c).unwrap();
        let mut line = Echelon::new(Ring::Q, c.len());
        line.insert(&phi.coords()).unwrap();
        prop_assert_eq!(naturality_check(&g, l.fgl()).unwrap(), line.contains(&c).unwrap());
    }

    #[test]
    fn random_combinations_stay_natural(m in 2u32..6, coeffs in prop::collection::vec(0u64..2, 8)) {
        let pr = prime(2);
        let l = law(2, 2, 6);
        let k = solve_kernel(&build_system(l.fgl(), 2, m, Ring::Fp(pr)).unwrap()).unwrap();
        let mut acc = GData::zero(pr, 2, m, Ring::Fp(pr));
        for (g, &c) in k.iter().zip(&coeffs) {
            acc = acc.add(&g.scale(&rat(c as i64))).unwrap();
        }
        prop_assert!(naturality_check(&acc, l.fgl()).unwrap());
        prop_assert_eq!(parse_gdata(&acc.to_json_string()).unwrap(), acc);
    }

    #[test]
    fn partition_count_matches_unknowns(m in 1u32..12) {
        prop_assert_eq!(variables(m).len(), partitions_of(m, None).len());
    }
}
