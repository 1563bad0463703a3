use intertwine::matlattice::{
    delta, eps, gnorm, gnorm_via_inverse, image_ord, image_ord_star, iwasawa, n_of, nu, solve_y,
    vdash,
};
use intertwine::{make_field, mat_ord, GroupForm, LatticeSpec, LocalFieldCtx, Mat, Val};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fields() -> Vec<LocalFieldCtx> {
    vec![
        make_field(5, 1, &[-5, 1], 12).unwrap(),
        make_field(2, 2, &[-2, 0, 1], 16).unwrap(),
        make_field(3, 1, &[-3, 1], 14).unwrap(),
    ]
}

fn parse_mat(k: &LocalFieldCtx, n: usize, s: &[&str]) -> Mat {
    Mat::from_vec(n, s.iter().map(|t| k.parse(t).unwrap()).collect())
}

#[test]
fn mat_ord_examples() {
    let k = &fields()[0];
    let x = parse_mat(k, 2, &["pi", "1", "pi^2", "pi^-1"]);
    assert_eq!(mat_ord(k, &x).unwrap(), Val::Finite(-1));
    assert_eq!(mat_ord(k, &Mat::identity(k, 3)).unwrap(), Val::Finite(0));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in fields() {
        for _ in 0..200 {
            let n = rng.gen_range(2..=4);
            let a = Mat::random_invertible(&k, &mut rng, n, -2, 2);
            let b = Mat::random_invertible(&k, &mut rng, n, -2, 2);
            let lhs = mat_ord(&k, &a.mul(&k, &b)).unwrap();
            assert!(lhs >= mat_ord(&k, &a).unwrap().add(mat_ord(&k, &b).unwrap()));
        }
    }
}

#[test]
fn inverse_and_det() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in fields() {
        for _ in 0..100 {
            let n = rng.gen_range(1..=4);
            let a = Mat::random_invertible(&k, &mut rng, n, -2, 2);
            let ai = a.inv(&k).unwrap();
            assert!(a.mul(&k, &ai).eq(&k, &Mat::identity(&k, n)));
            let b = Mat::random_invertible(&k, &mut rng, n, -2, 2);
            let d = a.mul(&k, &b).det(&k);
            assert!(k.eq(&d, &k.mul(&a.det(&k), &b.det(&k))));
        }
        let s = Mat::from_ints(&k, 2, &[1, 2, 2, 4]);
        assert!(s.inv(&k).is_err());
    }
}

#[test]
fn lattice_ords() {
    assert_eq!(LatticeSpec { i: 0 }.ord(), 0);
    assert_eq!(LatticeSpec { i: 3 }.ord_star(), -3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in fields() {
        for _ in 0..170 {
            let n = rng.gen_range(2..=3);
            let g = Mat::random_invertible(&k, &mut rng, n, -2, 2);
            let h = Mat::random_invertible(&k, &mut rng, n, -2, 2);
            let l = LatticeSpec { i: rng.gen_range(-2..=2) };
            let o = |m: &Mat| mat_ord(&k, m).unwrap().finite().unwrap();
            let img = image_ord(&k, &g, &l, &h).unwrap();
            assert!(img >= o(&g) + o(&h) + l.ord());
            let star = image_ord_star(&k, &g, &l, &h).unwrap();
            let gi = g.inv(&k).unwrap();
            let hi = h.inv(&k).unwrap();
            assert!(star <= l.ord_star() - o(&gi) - o(&hi));
            assert!(img <= star);
        }
    }
}

#[test]
fn gnorm_examples_and_equivalence() {
    let k = &fields()[0];
    assert_eq!(gnorm(k, &Mat::identity(k, 2)).unwrap(), 0);
    let g = Mat::diag(k, &[k.pi(), k.one()]);
    assert_eq!(gnorm(k, &g).unwrap(), 1);
    // the two norms agree up to the n-th power, not exactly
    let g = Mat::diag(k, &[k.pi_pow(-2), k.pi_pow(3)]);
    assert_eq!(gnorm(k, &g).unwrap(), 2);
    assert_eq!(gnorm_via_inverse(k, &g).unwrap(), 3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in fields() {
        for _ in 0..200 {
            let n = rng.gen_range(2..=3);
            let g = Mat::random_invertible(&k, &mut rng, n, -3, 3);
            let a = gnorm(&k, &g).unwrap();
            let b = gnorm_via_inverse(&k, &g).unwrap();
            assert!(a >= 0 && b >= 0);
            assert!(a <= n as i64 * b && b <= n as i64 * a, "{a} {b}");
        }
    }
}

#[test]
fn vdash_laws() {
    let k = &fields()[0];
    let o2 = GroupForm::split_orthogonal(k, 2);
    let g = parse_mat(k, 2, &["1", "2", "3", "4"]);
    assert!(vdash(k, &g, &o2).eq(k, &parse_mat(k, 2, &["4", "2", "3", "1"])));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in fields() {
        for n in [2usize, 4, 6] {
            let forms = [
                GroupForm::split_orthogonal(&k, n),
                GroupForm::symplectic(&k, n).unwrap(),
            ];
            for f in &forms {
                assert!(vdash(&k, &Mat::identity(&k, n), f).eq(&k, &Mat::identity(&k, n)));
                for _ in 0..20 {
                    let a = Mat::random_invertible(&k, &mut rng, n, -2, 2);
                    let b = Mat::random_invertible(&k, &mut rng, n, -2, 2);
                    assert!(vdash(&k, &vdash(&k, &a, f), f).eq(&k, &a));
                    let lhs = vdash(&k, &a.mul(&k, &b), f);
                    let rhs = vdash(&k, &b, f).mul(&k, &vdash(&k, &a, f));
                    assert!(lhs.eq(&k, &rhs));
                    let ea = eps(&k, &a, f).unwrap();
                    assert!(eps(&k, &ea, f).unwrap().eq(&k, &a));
                    let lhs = eps(&k, &a.mul(&k, &b), f).unwrap();
                    assert!(lhs.eq(&k, &ea.mul(&k, &eps(&k, &b, f).unwrap())));
                }
            }
        }
        let f = GroupForm::split_orthogonal(&k, 2);
        assert!(eps(&k, &Mat::identity(&k, 2), &f).unwrap().eq(&k, &Mat::identity(&k, 2)));
        let _ = nu(&k, &Mat::identity(&k, 2), &f).unwrap();
    }
}

#[test]
fn unipotent_relation() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in fields() {
        for n in [2usize, 4] {
            let forms = [
                GroupForm::split_orthogonal(&k, n),
                GroupForm::symplectic(&k, n).unwrap(),
            ];
            for f in &forms {
                let zero = Mat::zeros(&k, n);
                assert!(n_of(&k, &zero, &zero, f).is_ok());
                let id = Mat::identity(&k, n);
                let y = solve_y(&k, &id, f).unwrap();
                assert!(n_of(&k, &id, &y, f).is_ok());
                for _ in 0..10 {
                    let x = Mat::random_invertible(&k, &mut rng, n, -1, 2);
                    let y = solve_y(&k, &x, f).unwrap();
                    let u = n_of(&k, &x, &y, f).unwrap_or_else(|e| panic!("{:?} n={n}: {e}", f.kind));
                    assert_eq!(u.full.n(), 3 * n);
                    let mut bump = Mat::zeros(&k, n);
                    bump.set(0, 0, k.one());
                    let bad = y.add(&k, &bump);
                    assert!(n_of(&k, &x, &bad, f).is_err());
                }
            }
        }
    }
}

#[test]
fn iwasawa_examples() {
    let k = &fields()[0];
    let g = Mat::diag(k, &[k.pi(), k.one()]);
    let iw = iwasawa(k, &g).unwrap();
    assert_eq!(iw.coset.e, 1);
    assert!(iw.coset.b.is_exact_zero());
    assert!(iw.coset.kappa.eq(k, &Mat::identity(k, 2)));
    assert!(k.eq(&iw.alpha, &k.one()));
    let g = Mat::diag(k, &[k.pi_pow(2), k.pi()]);
    let iw = iwasawa(k, &g).unwrap();
    assert_eq!(iw.coset.e, 3);
    assert!(iw.coset.kappa.eq(k, &Mat::identity(k, 2)));
    assert!(k.eq(&iw.alpha, &k.pi_pow(-1)));
}

#[test]
fn iwasawa_reconstruction() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in fields() {
        for _ in 0..300 {
            let g = Mat::random_invertible(&k, &mut rng, 2, -3, 3);
            let iw = iwasawa(&k, &g).unwrap();
            assert!(iw.reconstruct(&k).unwrap().eq(&k, &g));
            assert!(iw.coset.kappa.is_integral(&k).unwrap());
            assert!(k.is_unit(&iw.coset.kappa.det(&k)).unwrap());
            assert!(!iw.coset.b.is_zero() || iw.coset.b.is_exact_zero());
            if !iw.coset.b.is_exact_zero() {
                assert!(k.ord(&iw.coset.b).unwrap() < Val::Finite(0));
            }
            let det_at = k.mul(&k.pi_pow(iw.coset.e), &k.one());
            let d = k.ord(&iw.coset.upper(&k).det(&k)).unwrap();
            assert_eq!(d, k.ord(&det_at).unwrap());
        }
    }
}

#[test]
fn delta_examples_and_invariance() {
    let k = &fields()[0];
    let g = parse_mat(k, 2, &["pi", "1", "0", "1"]);
    assert_eq!(delta(k, &g, 1).unwrap(), 1);
    for n in [2usize, 4] {
        for i in 1..=n / 2 {
            assert_eq!(delta(k, &Mat::identity(k, n), i).unwrap(), 0);
            let s = Mat::identity(k, n).scale(k, &k.pi_pow(3));
            assert_eq!(delta(k, &s, i).unwrap(), 6);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in fields() {
        for _ in 0..200 {
            let n = if rng.gen_bool(0.5) { 2 } else { 4 };
            let g = Mat::random_invertible(&k, &mut rng, n, -3, 3);
            let kap = Mat::random_gl_o(&k, &mut rng, n);
            for i in 1..=n / 2 {
                assert_eq!(
                    delta(&k, &kap.mul(&k, &g), i).unwrap(),
                    delta(&k, &g, i).unwrap()
                );
            }
        }
    }
}
