use super::*;
use crate::exactnum::{frac, rat};
use proptest::prelude::*;

fn p2() -> Prime {
    Prime::new(2).unwrap()
}

fn uni(coeffs: &[(u32, Rational)], bound: Option<u32>) -> WeightedPoly {
    WeightedPoly::from_terms(
        Ring::Q,
        VarTable::x(),
        coeffs.iter().map(|(e, c)| (vec![*e], c.clone())),
        bound,
    )
    .unwrap()
}

fn zvar(vars: &Vars, i: usize) -> WeightedPoly {
    WeightedPoly::var(Ring::Q, vars.clone(), i, None)
}

#[test]
fn product_and_truncation() {
    let v = VarTable::xy();
    let (x, y) = (zvar(&v, 0), zvar(&v, 1));
    let prod = x.add(&y).unwrap().mul(&x.sub(&y).unwrap()).unwrap();
    let expected = x.pow(2).sub(&y.pow(2)).unwrap();
    assert_eq!(prod, expected);

    let s = uni(&[(1, rat(1)), (2, rat(1))], Some(2));
    assert_eq!(s.mul(&s).unwrap(), uni(&[(2, rat(1))], Some(2)));

    let xf = x.to_ring(Ring::Fp(p2())).unwrap();
    let yf = y.to_ring(Ring::Fp(p2())).unwrap();
    let sq = xf.add(&yf).unwrap().pow(2);
    assert_eq!(sq, xf.pow(2).add(&yf.pow(2)).unwrap());
}

#[test]
fn ring_and_table_mismatch() {
    let a = zvar(&VarTable::xy(), 0);
    let b = zvar(&VarTable::z(2), 0);
    assert_eq!(a.add(&b), Err(Error::TableMismatch));
    let c = a.to_ring(Ring::Fp(p2())).unwrap();
    assert!(matches!(a.mul(&c), Err(Error::RingMismatch(..))));
}

#[test]
fn substitution_examples() {
    let v = VarTable::z(2);
    let (z1, z2) = (zvar(&v, 0), zvar(&v, 1));
    let f = z1.mul(&z2).unwrap();
    assert_eq!(f.substitute(&[(1, z1.clone())]).unwrap(), z1.pow(2));
    let segre = z1.add(&z2).unwrap().add(&f).unwrap();
    assert_eq!(z1.substitute(&[(0, segre.clone())]).unwrap(), segre);
    let zero = WeightedPoly::zero(Ring::Q, v.clone(), None);
    assert!(f.substitute(&[(1, zero)]).unwrap().is_zero());
}

#[test]
fn non_nilpotent_substitution_rejected() {
    let f = uni(&[(1, rat(1)), (2, rat(1))], Some(4));
    let img = uni(&[(0, rat(1)), (1, rat(1))], None);
    assert!(matches!(
        f.compose(&VarTable::x(), std::slice::from_ref(&img), None),
        Err(Error::NonNilpotentSubstitution(_))
    ));
    // An exact polynomial may take images with a constant term.
    let g = uni(&[(1, rat(1)), (2, rat(1))], None);
    let out = g.compose(&VarTable::x(), &[img], None).unwrap();
    assert_eq!(out, uni(&[(0, rat(2)), (1, rat(3)), (2, rat(1))], None));
}

#[test]
fn composition_bound_tracks_weight_growth() {
    // f known to weight 3, substituted x -> x^2: known to weight 7.
    let f = uni(&[(1, rat(1)), (3, rat(5))], Some(3));
    let sq = uni(&[(2, rat(1))], None);
    let out = f.compose(&VarTable::x(), &[sq], None).unwrap();
    assert_eq!(out.bound(), Some(7));
    assert_eq!(out, uni(&[(2, rat(1)), (6, rat(5))], Some(7)));
}

#[test]
fn coefficients() {
    let f = uni(&[(1, rat(1)), (2, rat(2))], None);
    assert_eq!(f.coefficient_of(&[2]), rat(2));
    assert_eq!(f.coefficient_of(&[7]), rat(0));
    let log1p = log1p_series(6);
    assert_eq!(log1p.coefficient_of(&[3]), frac(1, 3));
    assert_eq!(WeightedPoly::zero(Ring::Q, VarTable::x(), None).coefficient_of(&[1]), rat(0));
}

fn log1p_series(d: u32) -> WeightedPoly {
    let terms: Vec<_> = (1..=d as i64)
        .map(|k| (k as u32, frac(if k % 2 == 1 { 1 } else { -1 }, k)))
        .collect();
    uni(&terms, Some(d))
}

/// Independent oracle: fixed-point iteration g <- x - (f(g) - g), run d times.
fn revert_fixed_point(f: &WeightedPoly, d: u32) -> WeightedPoly {
    let x = uni(&[(1, rat(1))], Some(d));
    let mut g = x.clone();
    for _ in 0..d {
        let fg = f.compose(&VarTable::x(), &[g.clone()], Some(d)).unwrap();
        g = x.sub(&fg.sub(&g).unwrap()).unwrap();
    }
    g
}

/// Independent oracle: Lagrange inversion, [x^n] g = (1/n) [x^(n-1)] (x/f)^n.
fn revert_lagrange(f: &WeightedPoly, d: u32) -> Vec<Rational> {
    // h = f/x as a dense series, then its reciprocal
    let mut h = vec![rat(0); d as usize + 1];
    for (m, c) in f.terms() {
        let e = m.exps()[0] as usize;
        if e >= 1 && e - 1 <= d as usize {
            h[e - 1] = c.clone();
        }
    }
    let mut r = vec![rat(0); d as usize + 1];
    r[0] = h[0].recip();
    for n in 1..=d as usize {
        let mut s = rat(0);
        for k in 1..=n {
            s += &h[k] * &r[n - k];
        }
        r[n] = -(s / &h[0]);
    }
    let rpoly = uni(
        &r.iter().enumerate().map(|(e, c)| (e as u32, c.clone())).collect::<Vec<_>>(),
        Some(d),
    );
    (1..=d)
        .map(|n| rpoly.pow(n).coefficient_of(&[n - 1]) / rat(n as i64))
        .collect()
}

#[test]
fn reversion_examples() {
    let x = uni(&[(1, rat(1))], Some(6));
    assert_eq!(revert(&x).unwrap(), x);

    let f = uni(&[(1, rat(1)), (2, rat(1))], Some(6));
    let g = revert(&f).unwrap();
    let catalan = [1, -1, 2, -5, 14, -42];
    for (k, c) in catalan.iter().enumerate() {
        assert_eq!(g.coefficient_of(&[k as u32 + 1]), rat(*c));
    }
    assert_eq!(g, revert_fixed_point(&f, 6));

    let e = revert(&log1p_series(6)).unwrap();
    let mut fact = 1i64;
    for k in 1..=6 {
        fact *= k;
        assert_eq!(e.coefficient_of(&[k as u32]), frac(1, fact));
    }
}

#[test]
fn reversion_errors() {
    let f = uni(&[(2, rat(1))], Some(4));
    assert!(matches!(revert(&f), Err(Error::NotReversible(_))));
    let g = uni(&[(1, rat(2)), (2, rat(1))], Some(4))
        .to_ring(Ring::ZpLocal(p2()))
        .unwrap();
    assert!(matches!(revert(&g), Err(Error::NotReversible(_))));
    let h = uni(&[(1, rat(3)), (2, rat(1))], Some(4));
    assert!(revert(&h).is_ok());
}

#[test]
fn reversion_over_fp() {
    let f = uni(&[(1, rat(1)), (2, rat(1)), (3, rat(1))], Some(8))
        .to_ring(Ring::Fp(Prime::new(3).unwrap()))
        .unwrap();
    let g = revert(&f).unwrap();
    let id = f.compose(&VarTable::x(), &[g], None).unwrap();
    assert_eq!(id, WeightedPoly::var(f.ring(), VarTable::x(), 0, Some(8)));
}

#[test]
fn partitions() {
    let all = partitions_of(4, None);
    let parts: Vec<&[u32]> = all.iter().map(Partition::parts).collect();
    assert_eq!(
        parts,
        vec![&[4][..], &[3, 1], &[2, 2], &[2, 1, 1], &[1, 1, 1, 1]]
    );
    assert_eq!(partitions_of(3, Some(2)).len(), 1);
    assert_eq!(partitions_of(0, None), vec![Partition::new(vec![]).unwrap()]);
    // exhaustive oracle: count non-increasing sequences by brute force
    for m in 0..=12u32 {
        assert_eq!(partitions_of(m, None).len(), brute_partition_count(m, m));
        let by_len: usize = (0..=m).map(|l| partitions_of(m, Some(l)).len()).sum();
        assert_eq!(by_len, partitions_of(m, None).len());
    }
}

fn brute_partition_count(m: u32, max: u32) -> usize {
    if m == 0 {
        return 1;
    }
    (1..=max.min(m)).map(|k| brute_partition_count(m - k, k)).sum()
}

#[test]
fn symmetrization() {
    let s = symmetrize(&[2, 1], Ring::Q);
    assert_eq!(s.len(), 2);
    assert_eq!(s.coefficient_of(&[1, 2]), rat(1));
    assert_eq!(symmetrize(&[1, 1], Ring::Q).len(), 1);
    let c = symmetrize(&[3, 0], Ring::Q);
    assert_eq!(c.coefficient_of(&[0, 3]), rat(1));
    assert_eq!(c.coefficient_of(&[3, 0]), rat(1));
    assert_eq!(distinct_permutations(&[2, 1, 1]).len(), 3);
}

#[test]
fn symmetry_predicate() {
    let v = VarTable::t(2);
    let (t1, t2) = (zvar(&v, 0), zvar(&v, 1));
    let a = t1.mul(&t2).unwrap();
    assert!(a.is_symmetric(&[0, 1]));
    let b = t1.pow(2).mul(&t2).unwrap();
    assert!(!b.is_symmetric(&[0, 1]));
    let c = b.add(&t1.mul(&t2.pow(2)).unwrap()).unwrap();
    assert!(c.is_symmetric(&[0, 1]));
}

#[test]
fn pretty_printing() {
    let v = VarTable::chern(1, 4);
    let c1 = zvar(&v, 0);
    let p = c1.pow(2).scale(&frac(-1, 2));
    assert_eq!(p.pretty(), "-(1/2)c1^2");
    let q = zvar(&v, 2).mul(&c1).unwrap().add(&c1.pow(4).scale(&rat(3))).unwrap();
    assert_eq!(q.pretty(), "c1c3 + 3c1^4");
}

#[test]
fn json_round_trip_and_rejections() {
    let v = VarTable::xy();
    let f = zvar(&v, 0).add(&zvar(&v, 1).pow(2).scale(&frac(-3, 4))).unwrap().truncated(5);
    let s = f.to_json_string();
    assert_eq!(WeightedPoly::from_json_str(&s).unwrap(), f);
    assert_eq!(s, WeightedPoly::from_json_str(&s).unwrap().to_json_string());
    let bad = [
        r#"{"ring":"q","vars":["x"],"weights":[1],"bound":null,"terms":[[[1],"0"]]}"#,
        r#"{"ring":"q","vars":["x"],"weights":[1],"bound":1,"terms":[[[2],"1"]]}"#,
        r#"{"ring":"q","vars":["x","x"],"weights":[1,1],"bound":null,"terms":[]}"#,
        r#"{"ring":"fp","p":2,"vars":["x"],"weights":[1],"bound":null,"terms":[[[1],"3"]]}"#,
        r#"{"ring":"fp","p":4,"vars":["x"],"weights":[1],"bound":null,"terms":[]}"#,
        r#"{"ring":"q","vars":["x"],"weights":[1],"bound":null,"terms":[[[1],"1"],[[1],"2"]]}"#,
        r#"{"ring":"q","vars":["q7"],"weights":[1],"bound":null,"terms":[]}"#,
        r#"{"ring":"q","vars":["x"],"weights":[0],"bound":null,"terms":[]}"#,
    ];
    for b in bad {
        assert!(WeightedPoly::from_json_str(b).is_err(), "{b}");
    }
}

#[test]
fn variable_names_round_trip() {
    for k in [
        VarKind::T(3),
        VarKind::Z(12),
        VarKind::U,
        VarKind::Chern { index: 4, slot: 1 },
        VarKind::Chern { index: 2, slot: 3 },
    ] {
        assert_eq!(VarKind::parse(&k.name()), Some(k));
    }
    for s in ["t0", "c2[1]", "c", "t01", "c3[", "zz"] {
        assert_eq!(VarKind::parse(s), None, "{s}");
    }
}

fn small_poly(vars: Vars, bound: Option<u32>) -> impl Strategy<Value = WeightedPoly> {
    let n = vars.len();
    prop::collection::vec((prop::collection::vec(0u32..3, n), -5i64..6, 1i64..4), 0..6).prop_map(
        move |ts| {
            WeightedPoly::from_terms(
                Ring::Q,
                vars.clone(),
                ts.into_iter().map(|(e, a, b)| (e, frac(a, b))),
                bound,
            )
            .unwrap()
        },
    )
}

fn nilpotent_uni(d: u32) -> impl Strategy<Value = WeightedPoly> {
    prop::collection::vec(-4i64..5, 1..(d as usize)).prop_map(move |cs| {
        let mut terms = vec![(vec![1], rat(1))];
        for (k, c) in cs.into_iter().enumerate() {
            terms.push((vec![k as u32 + 2], rat(c)));
        }
        WeightedPoly::from_terms(Ring::Q, VarTable::x(), terms, Some(d)).unwrap()
    })
}

proptest! {
    #[test]
    fn ring_axioms(a in small_poly(VarTable::xy(), Some(5)),
                   b in small_poly(VarTable::xy(), Some(5)),
                   c in small_poly(VarTable::xy(), Some(5))) {
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(
            a.mul(&b.add(&c).unwrap()).unwrap(),
            a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
        );
    }

    #[test]
    fn reversion_is_involutive(f in nilpotent_uni(7)) {
        let g = revert(&f).unwrap();
        prop_assert_eq!(revert(&g).unwrap(), f.clone());
        let id = f.compose(&VarTable::x(), std::slice::from_ref(&g), None).unwrap();
        prop_assert_eq!(id, uni(&[(1, rat(1))], Some(7)));
        let lag = revert_lagrange(&f, 7);
        for (k, c) in lag.iter().enumerate() {
            prop_assert_eq!(&g.coefficient_of(&[k as u32 + 1]), c);
        }
    }

    #[test]
    fn substitution_composes(f in small_poly(VarTable::xy(), None),
                             s in small_poly(VarTable::xy(), None),
                             t in small_poly(VarTable::xy(), None)) {
        // sigma: x -> s ; tau: y -> t
        let lhs = f.substitute(&[(0, s.clone())]).unwrap().substitute(&[(1, t.clone())]).unwrap();
        let s_tau = s.substitute(&[(1, t.clone())]).unwrap();
        let rhs = f.substitute(&[(0, s_tau), (1, t)]).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn serialization_is_deterministic(f in small_poly(VarTable::xyw(), Some(6))) {
        let a = f.to_json_string();
        let b = f.clone().to_json_string();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(WeightedPoly::from_json_str(&a).unwrap(), f);
    }
}
