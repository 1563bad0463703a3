use std::collections::BTreeSet;

use intertwine::{make_field, CharacterValue, Error, LocalFieldCtx, ResidueRing, Val};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q5() -> LocalFieldCtx {
    make_field(5, 1, &[-5, 1], 12).unwrap()
}

fn q2r2() -> LocalFieldCtx {
    make_field(2, 2, &[-2, 0, 1], 14).unwrap()
}

fn fields() -> Vec<LocalFieldCtx> {
    vec![
        q5(),
        q2r2(),
        make_field(2, 1, &[-2, 1], 14).unwrap(),
        make_field(3, 2, &[3, 6, 1], 10).unwrap(),
        make_field(2, 3, &[2, 2, 0, 1], 12).unwrap(),
        make_field(7, 1, &[14, 1], 8).unwrap(),
    ]
}

#[test]
fn construction_checks() {
    assert_eq!(make_field(4, 1, &[-4, 1], 8).unwrap_err(), Error::NotPrime(4));
    assert_eq!(make_field(5, 1, &[-25, 1], 8).unwrap_err(), Error::NotEisenstein(5));
    assert_eq!(make_field(2, 2, &[2, 1, 1], 8).unwrap_err(), Error::NotEisenstein(2));
    assert!(matches!(
        make_field(2, 2, &[-2, 0, 1], 5),
        Err(Error::PrecisionTooSmall { need: 6, .. })
    ));
    let k = q2r2();
    assert_eq!(k.ord(&k.from_int(2)).unwrap(), Val::Finite(2));
    let k = q5();
    assert_eq!(k.ord(&k.from_int(5)).unwrap(), Val::Finite(1));
}

#[test]
fn uniformizer_satisfies_its_polynomial() {
    for k in fields() {
        let pi = k.pi();
        let mut acc = k.zero();
        for (i, &c) in k.eisenstein().iter().enumerate() {
            acc = k.add(&acc, &k.mul(&k.from_int(c), &k.pow(&pi, i as i64).unwrap()));
        }
        assert!(acc.is_zero(), "{}", k.format(&acc));
    }
}

#[test]
fn ord_examples() {
    let k = q5();
    assert_eq!(k.ord(&k.from_int(50)).unwrap(), Val::Finite(2));
    assert_eq!(k.ord(&k.zero()).unwrap(), Val::Infinite);
    let k = q2r2();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = k.random_unit(&mut rng);
    let x = k.mul(&k.pow(&k.pi(), 3).unwrap(), &u);
    assert_eq!(k.ord(&x).unwrap(), Val::Finite(3));
}

#[test]
fn cancellation_is_detected() {
    let k = q5();
    let n = k.precision() as i64;
    let a = k.add(&k.one(), &k.pi_pow(n + 3));
    let d = k.sub(&a, &k.one());
    assert!(matches!(k.ord(&d), Err(Error::PrecisionExhausted(_))));
    assert!(k.in_ideal(&d, 3).unwrap());
    assert!(k.in_ideal(&d, n + 5).is_err());
}

#[test]
fn ring_axioms_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in fields() {
        for _ in 0..300 {
            let a = k.random_elem(&mut rng, -3, 3);
            let b = k.random_elem(&mut rng, -3, 3);
            let c = k.random_elem(&mut rng, -3, 3);
            assert!(k.eq(&k.add(&k.add(&a, &b), &c), &k.add(&a, &k.add(&b, &c))));
            assert!(k.eq(&k.mul(&k.mul(&a, &b), &c), &k.mul(&a, &k.mul(&b, &c))));
            assert!(k.eq(&k.add(&a, &b), &k.add(&b, &a)));
            assert!(k.eq(&k.mul(&a, &b), &k.mul(&b, &a)));
            let lhs = k.mul(&a, &k.add(&b, &c));
            let rhs = k.add(&k.mul(&a, &b), &k.mul(&a, &c));
            assert!(k.eq(&lhs, &rhs));
            assert!(k.sub(&a, &a).is_zero());
            if !a.is_zero() {
                assert!(k.eq(&k.mul(&a, &k.inv(&a).unwrap()), &k.one()));
            }
        }
    }
}

#[test]
fn ord_is_a_valuation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in fields() {
        let mut checked = 0;
        while checked < 1000 {
            let a = k.random_nonzero(&mut rng, -4, 4);
            let b = k.random_nonzero(&mut rng, -4, 4);
            let (va, vb) = (k.ord(&a).unwrap(), k.ord(&b).unwrap());
            assert_eq!(k.ord(&k.mul(&a, &b)).unwrap(), va.add(vb));
            let s = k.add(&a, &b);
            match k.ord(&s) {
                Ok(v) => assert!(v >= va.min(vb)),
                Err(_) => assert!(k.in_ideal(&s, va.min(vb).finite().unwrap()).unwrap()),
            }
            if va != vb {
                assert_eq!(k.ord(&s).unwrap(), va.min(vb));
            }
            checked += 1;
        }
    }
}

#[test]
fn digits_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in fields() {
        for _ in 0..100 {
            let mut d: Vec<u64> = (0..k.precision()).map(|_| rng.gen_range(0..k.p())).collect();
            d[0] = rng.gen_range(1..k.p());
            let v = rng.gen_range(-3..4);
            let x = k.from_digits(v, &d);
            assert_eq!(k.unit_digits(&x), d);
            assert_eq!(k.ord(&x).unwrap(), Val::Finite(v));
            let back = k.parse(&k.format(&x)).unwrap();
            assert!(k.eq(&back, &x));
        }
    }
}

#[test]
fn parser_accepts_expressions() {
    let k = q2r2();
    let a = k.parse("1 + pi^2").unwrap();
    assert!(k.eq(&a, &k.from_int(3)));
    let b = k.parse("ϖ^-1").unwrap();
    assert_eq!(k.ord(&b).unwrap(), Val::Finite(-1));
    let c = k.parse("3ϖ^2 - 6").unwrap();
    assert!(c.is_zero());
    assert!(k.parse("1 +").is_err());
}

#[test]
fn principal_part_drops_integral_digits() {
    let k = q5();
    let x = k.parse("3*pi^-2 + 2*pi^-1 + 4 + pi").unwrap();
    let pp = k.principal_part(&x).unwrap();
    assert!(k.eq(&pp, &k.parse("3*pi^-2 + 2*pi^-1").unwrap()));
    assert!(k.principal_part(&k.from_int(7)).unwrap().is_exact_zero());
}

// squares mod ϖ^level decided by brute force over all square roots
fn unit_class_count_oracle(k: &LocalFieldCtx) -> usize {
    let level = 2 * k.ord_two() + 1;
    let size = k.p().pow(level);
    let units: Vec<u64> = (0..size).filter(|i| i % k.p() != 0).collect();
    let sq = |x: u64| {
        let e = k.from_index(x, level);
        k.index_mod(&k.mul(&e, &e), level).unwrap()
    };
    let squares: BTreeSet<u64> = units.iter().map(|&u| sq(u)).collect();
    let mut classes: Vec<BTreeSet<u64>> = Vec::new();
    for &u in &units {
        let ue = k.from_index(u, level);
        let found = classes.iter().any(|cl| {
            let r = *cl.iter().next().unwrap();
            let t = k.div(&ue, &k.from_index(r, level)).unwrap();
            squares.contains(&k.index_mod(&t, level).unwrap())
        });
        if !found {
            classes.push([u].into_iter().collect());
        }
    }
    classes.len()
}

#[test]
fn square_class_cardinalities() {
    let k = q5();
    let s = k.square_class_reps().unwrap();
    assert_eq!((s.unit_count(), s.count()), (2, 4));
    let k = q2r2();
    let s = k.square_class_reps().unwrap();
    assert_eq!(s.unit_count(), unit_class_count_oracle(&k));
    assert_eq!((s.unit_count(), s.count()), (8, 16));
    let k = make_field(2, 1, &[-2, 1], 14).unwrap();
    let s = k.square_class_reps().unwrap();
    assert_eq!(s.unit_count(), unit_class_count_oracle(&k));
    assert_eq!(s.count(), 8);
}

#[test]
fn square_classes_partition_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in fields() {
        let s = k.square_class_reps().unwrap();
        assert!(k.eq(&s.rep(&k, 0), &k.one()));
        for i in 0..s.count() {
            assert_eq!(s.class_of(&k, &s.rep(&k, i)).unwrap(), i);
        }
        let mut seen = BTreeSet::new();
        for _ in 0..500 {
            let x = k.random_nonzero(&mut rng, -3, 3);
            let c = s.class_of(&k, &x).unwrap();
            let y = k.mul(&x, &k.mul(&x, &x));
            // x^3 is in the class of x
            assert_eq!(s.class_of(&k, &y).unwrap(), c);
            let sq = k.mul(&x, &x);
            assert_eq!(s.class_of(&k, &sq).unwrap(), 0);
            seen.insert(c);
        }
        assert_eq!(seen.len(), s.count());
    }
}

#[test]
fn additive_character() {
    let k = q5();
    assert_eq!(k.additive_char(&k.pi()).unwrap(), CharacterValue::one(5));
    assert_eq!(k.additive_char(&k.from_int(3)).unwrap(), CharacterValue::root(5, 3));
    for a in 0..5 {
        for b in 0..5 {
            let (x, y) = (k.from_int(a), k.from_int(b));
            let lhs = k.additive_char(&k.add(&x, &y)).unwrap();
            let rhs = &k.additive_char(&x).unwrap() * &k.additive_char(&y).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
    assert!(matches!(k.additive_char(&k.pi_pow(-1)), Err(Error::DomainError(_))));
    let k = q2r2();
    assert_eq!(k.additive_char(&k.one()).unwrap(), CharacterValue::from_int(2, -1));
    assert_eq!(k.additive_char(&k.pi()).unwrap(), CharacterValue::one(2));
}

#[test]
fn residue_ring_tables_match_field() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in fields() {
        let r = ResidueRing::new(&k, 2).unwrap();
        for _ in 0..200 {
            let a = k.random_elem(&mut rng, 0, 3);
            let b = k.random_elem(&mut rng, 0, 3);
            let (ia, ib) = (r.reduce(&k, &a).unwrap(), r.reduce(&k, &b).unwrap());
            assert_eq!(r.add(ia, ib), r.reduce(&k, &k.add(&a, &b)).unwrap());
            assert_eq!(r.mul(ia, ib), r.reduce(&k, &k.mul(&a, &b)).unwrap());
        }
        let q = k.p() as usize;
        assert_eq!(r.gl2().len(), (q * q - 1) * (q * q - q) * q.pow(4));
    }
}
