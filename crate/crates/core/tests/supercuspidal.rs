use intertwine::supercuspidal::{
    b_classes, classify, kappa_vdash_check, orbit_data, support_scan, y_matrix, KutzkoDatum,
    Regime, SubgroupLevel,
};
use intertwine::{make_field, CharacterValue, Elem, LocalFieldCtx, Mat, TorusElem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p5() -> LocalFieldCtx {
    make_field(5, 1, &[-5, 1], 14).unwrap()
}
fn p3() -> LocalFieldCtx {
    make_field(3, 1, &[-3, 1], 14).unwrap()
}
fn p2e2() -> LocalFieldCtx {
    make_field(2, 2, &[-2, 0, 1], 20).unwrap()
}

fn random_i1<R: Rng>(k: &LocalFieldCtx, rng: &mut R) -> Mat {
    Mat::m2(
        k.add(&k.one(), &k.random_elem(rng, 1, 5)),
        k.random_elem(rng, 0, 5),
        k.random_elem(rng, 1, 5),
        k.add(&k.one(), &k.random_elem(rng, 1, 5)),
    )
}

fn random_i2<R: Rng>(k: &LocalFieldCtx, rng: &mut R) -> Mat {
    Mat::m2(
        k.add(&k.one(), &k.random_elem(rng, 2, 5)),
        k.random_elem(rng, 1, 5),
        k.random_elem(rng, 2, 5),
        k.add(&k.one(), &k.random_elem(rng, 2, 5)),
    )
}

/// `x + yϖ_E` with `x` a unit.
fn random_oe_unit<R: Rng>(d: &KutzkoDatum, rng: &mut R) -> Mat {
    let k = &d.ctx;
    let x = k.random_unit(rng);
    let y = k.random_elem(rng, 0, 4);
    Mat::identity(k, 2).scale(k, &x).add(k, &d.pi_e.scale(k, &y))
}

#[test]
fn membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for k in [p5(), p2e2(), p3()] {
        let d = KutzkoDatum::new(&k).unwrap();
        let id = Mat::identity(&k, 2);
        use SubgroupLevel::*;
        for l in [K, I0, I1, I2, C0, C] {
            assert!(d.member(&id, l).unwrap());
        }
        let n1 = Mat::from_ints(&k, 2, &[1, 1, 0, 1]);
        assert!(d.member(&n1, I1).unwrap());
        assert!(!d.member(&n1, I2).unwrap());
        assert!(d.member(&d.pi_e, C).unwrap());
        assert!(!d.member(&d.pi_e, C0).unwrap());
        for _ in 0..200 {
            let g = Mat::random_invertible(&k, &mut rng, 2, 0, 2);
            let chain = [I2, I1, I0, K];
            for w in chain.windows(2) {
                if d.member(&g, w[0]).unwrap() {
                    assert!(d.member(&g, w[1]).unwrap());
                }
            }
            if d.member(&g, C0).unwrap() {
                assert!(d.member(&g, I0).unwrap());
            }
            let u = random_oe_unit(&d, &mut rng);
            let h = random_i1(&k, &mut rng);
            assert!(d.member(&u.mul(&k, &h), C0).unwrap());
            assert!(d.member(&d.pi_e.mul(&k, &u).mul(&k, &h), C).unwrap());
        }
    }
    assert!(KutzkoDatum::new(&make_field(2, 1, &[-2, 1], 14).unwrap()).is_err());
}

#[test]
fn lambda_character() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let k = p2e2();
    let d = KutzkoDatum::new(&k).unwrap();
    let n1 = Mat::from_ints(&k, 2, &[1, 1, 0, 1]);
    assert_eq!(d.lambda_char(&n1).unwrap(), CharacterValue::from_int(2, -1));
    assert!(d.lambda_char(&Mat::from_ints(&k, 2, &[0, 1, 1, 0])).is_err());
    for k in [p2e2(), p5(), p3()] {
        let d = KutzkoDatum::new(&k).unwrap();
        let p = k.p();
        for _ in 0..500 {
            let a = random_i1(&k, &mut rng);
            let b = random_i1(&k, &mut rng);
            let la = d.lambda_exp(&a).unwrap();
            let lb = d.lambda_exp(&b).unwrap();
            assert_eq!(d.lambda_exp(&a.mul(&k, &b)).unwrap(), (la + lb) % p);
            let z = random_i2(&k, &mut rng);
            assert_eq!(d.lambda_exp(&z).unwrap(), 0);
            assert_eq!(d.lambda_exp(&a.mul(&k, &z)).unwrap(), la);
            if p == 2 {
                assert_eq!(2 * la % p, 0);
                assert_eq!(d.lambda_exp(&a.mul(&k, &a)).unwrap(), 0);
            }
        }
    }
}

#[test]
fn psi_factorization() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for k in [p2e2(), p5(), p3()] {
        let d = KutzkoDatum::new(&k).unwrap();
        let p = k.p();
        assert_eq!(d.psi_exp(&Mat::identity(&k, 2)).unwrap(), Some(0));
        let bad = Mat::diag(&k, &[k.pi_pow(2), k.one()]);
        assert_eq!(d.psi_exp(&bad).unwrap(), None);
        assert!(d.psi(&bad).unwrap().is_zero());
        for _ in 0..200 {
            let h = random_i1(&k, &mut rng);
            let z = random_i2(&k, &mut rng);
            assert_eq!(d.psi_exp(&z).unwrap(), Some(0));
            let j = rng.gen_range(-3..=3i64);
            let mut pe = Mat::identity(&k, 2);
            for _ in 0..j.rem_euclid(2) {
                pe = pe.mul(&k, &d.pi_e);
            }
            pe = pe.scale(&k, &k.pi_pow(j.div_euclid(2)));
            // two different lifts of the same residue
            let r = k.random_unit(&mut rng);
            let r2 = k.mul(&r, &k.add(&k.one(), &k.random_elem(&mut rng, 1, 4)));
            let g = pe.mul(&k, &h).scale(&k, &r);
            let g2 = pe.mul(&k, &h).scale(&k, &r2);
            let want = d.lambda_exp(&h).unwrap();
            assert_eq!(d.psi_exp(&g).unwrap(), Some(want));
            assert_eq!(d.psi_exp(&g2).unwrap(), Some(want));
            let (jj, res, hh) = d.factor(&g).unwrap().unwrap();
            assert_eq!(jj, j);
            let mut back = Mat::identity(&k, 2);
            for _ in 0..jj.rem_euclid(2) {
                back = back.mul(&k, &d.pi_e);
            }
            back = back.scale(&k, &k.pi_pow(jj.div_euclid(2)));
            // g = ϖ_E^j·h·ρ with ρ a scalar of residue r
            let rho = back.mul(&k, &hh).inv(&k).unwrap().mul(&k, &g);
            assert!(rho.get(0, 1).is_zero() && rho.get(1, 0).is_zero());
            assert!(k.eq(rho.get(0, 0), rho.get(1, 1)));
            assert_eq!(k.residue(rho.get(0, 0)).unwrap(), res);
            // ψ is a character of G′
            let h2 = random_i1(&k, &mut rng);
            let g3 = d.pi_e.mul(&k, &h2);
            let prod = d.psi_exp(&g.mul(&k, &g3)).unwrap().unwrap();
            let sum = (want + d.psi_exp(&g3).unwrap().unwrap()) % p;
            assert_eq!(prod, sum);
            if p == 2 {
                // trivial on all of E^× when p = 2
                let u = random_oe_unit(&d, &mut rng);
                assert_eq!(d.psi_exp(&u.mul(&k, &h)).unwrap(), Some(want));
            }
        }
    }
}

#[test]
fn f_g_support_and_center() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for k in [p2e2(), p5()] {
        let d = KutzkoDatum::new(&k).unwrap();
        for _ in 0..100 {
            let h = random_i1(&k, &mut rng);
            let u = random_oe_unit(&d, &mut rng);
            let g0 = if rng.gen_bool(0.5) {
                u.mul(&k, &h)
            } else {
                d.pi_e.mul(&k, &u).mul(&k, &h)
            };
            assert!(!d.f_g(&g0).unwrap().is_zero());
            assert!(d.f_g(&g0.scale(&k, &k.pi())).unwrap().is_zero());
            let (f0, f1) = d.f_split(&g0).unwrap();
            assert_eq!(&f0 + &f1, d.f_g(&g0).unwrap());
            // Σ_z f_G(z g) over z-valuation classes recovers ψ(g)
            let g = g0.scale(&k, &k.pi_pow(rng.gen_range(-3..=3)));
            let mut total = CharacterValue::zero(k.p());
            for v in -6..=6 {
                let zu = k.mul(&k.pi_pow(v), &k.random_unit(&mut rng));
                total = &total + &d.f_g(&g.scale(&k, &zu)).unwrap();
            }
            assert_eq!(total, d.psi(&g).unwrap());
        }
    }
}

#[test]
fn residue_fn_matches_f_g() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    for k in [p2e2(), p5(), p3()] {
        let d = KutzkoDatum::new(&k).unwrap();
        let f = d.residue_fn().unwrap();
        let mut hits = 0;
        for t in 0..600 {
            let g = match t % 3 {
                0 => Mat::random_invertible(&k, &mut rng, 2, 0, 2),
                1 => random_oe_unit(&d, &mut rng).mul(&k, &random_i1(&k, &mut rng)),
                _ => d
                    .pi_e
                    .mul(&k, &random_oe_unit(&d, &mut rng))
                    .mul(&k, &random_i1(&k, &mut rng)),
            };
            if !g.is_integral(&k).unwrap() {
                continue;
            }
            let gb = intertwine::supercuspidal::reduce_mat(&f.ring, &k, &g).unwrap();
            let want = d.f_g_exp(&g).unwrap();
            assert_eq!(f.eval(&gb), want, "{}", g.format(&k));
            hits += want.is_some() as usize;
        }
        assert!(hits > 100);
    }
}

#[test]
fn kappa_vdash_needs_two_in_p2() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    let (n, fails) = kappa_vdash_check(&p2e2(), 500, &mut rng).unwrap();
    assert_eq!((n, fails), (500, 0));
    let q2 = make_field(2, 1, &[-2, 1], 14).unwrap();
    let (_, fails) = kappa_vdash_check(&q2, 500, &mut rng).unwrap();
    assert!(fails > 0);
}

fn scan_none(d: &KutzkoDatum, a: Elem, depth: u32) {
    let g = TorusElem::new(&d.ctx, a).unwrap();
    let r = support_scan(d, &g, depth, 4).unwrap();
    assert!(r.witness.is_none(), "{} {:?}", d.ctx.format(&a), r.witness);
}

#[test]
fn support_vanishing() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for k in [p5(), p2e2(), p3()] {
        let d = KutzkoDatum::new(&k).unwrap();
        for a in [k.pi(), k.pi_pow(2), k.pi_pow(-1)] {
            let g = TorusElem::new(&k, a).unwrap();
            assert_eq!(classify(&k, &g).unwrap(), Regime::NonCompact);
            scan_none(&d, a, 6);
        }
        for _ in 0..20 {
            let a = k.random_nonzero(&mut rng, -3, 3);
            if !k.is_unit(&a).unwrap() {
                scan_none(&d, a, 6);
            }
        }
    }
    let k = p5();
    let d = KutzkoDatum::new(&k).unwrap();
    let mut count = 0;
    while count < 50 {
        let a = k.random_unit(&mut rng);
        let r = k.residue(&a).unwrap();
        if r == 1 || r == 4 {
            continue;
        }
        scan_none(&d, a, 6);
        count += 1;
    }
    for k in [p5(), p3()] {
        let d = KutzkoDatum::new(&k).unwrap();
        for t in 0..50 {
            let e = 1 + t % 2;
            let a = k.add(&k.one(), &k.mul(&k.pi_pow(e), &k.random_unit(&mut rng)));
            let g = TorusElem::new(&k, a).unwrap();
            assert_eq!(classify(&k, &g).unwrap(), Regime::OddNearOne);
            scan_none(&d, a, 6);
        }
    }
}

#[test]
fn even_witness() {
    let k = p2e2();
    let d = KutzkoDatum::new(&k).unwrap();
    let a = k.add(&k.one(), &k.pi_pow(2));
    let g = TorusElem::new(&k, a).unwrap();
    let r = support_scan(&d, &g, 6, 4).unwrap();
    assert_eq!(r.regime, Regime::EvenNearOne);
    assert!(r.witness.is_some());
}

#[test]
fn orbit_geometry() {
    let k = p5();
    let a = k.add(&k.one(), &k.pi_pow(2));
    let od = orbit_data(&k, &TorusElem::new(&k, a).unwrap()).unwrap();
    assert_eq!(od.level, 2);
    // s1 + s2 = -1
    assert!(k.eq(&k.add(&od.s1, &od.s2), &k.from_int(-1)));
    let bs = b_classes(&k, 2);
    assert_eq!(bs.len(), 25);
    for b in &bs {
        assert!(y_matrix(&k, &od, b).is_integral(&k).unwrap());
    }
}
