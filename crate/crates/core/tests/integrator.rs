use intertwine::integrator::{
    assemble_coefficients, coefficient_a_b, orbital_twisted, psi_k, rg_term, stratum_values,
    KAverage, KIndicator, ResidueIntegrand, TruncationSpec, ZeroIntegrand,
};
use intertwine::localfield::ResMat;
use intertwine::supercuspidal::KutzkoDatum;
use intertwine::twisted::{s_of, twisted_conj};
use intertwine::weights::{w_k_total, QuadCharTable};
use intertwine::{make_field, CharacterValue, GroupForm, LocalFieldCtx, Mat, ResidueRing, TorusElem};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p5() -> LocalFieldCtx {
    make_field(5, 1, &[-5, 1], 16).unwrap()
}
fn p2e2() -> LocalFieldCtx {
    make_field(2, 2, &[-2, 0, 1], 24).unwrap()
}

fn small() -> TruncationSpec {
    TruncationSpec {
        m: 2,
        b_window: 7,
        e_max: 4,
        v_max: 2,
        k_max: 4,
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `X ↦ f(κ_0 X κ_0^⊢)`.
struct Conjugated<'a, F: ResidueIntegrand> {
    inner: &'a F,
    kappa: ResMat,
}

impl<F: ResidueIntegrand> ResidueIntegrand for Conjugated<'_, F> {
    fn p(&self) -> u64 {
        self.inner.p()
    }
    fn level(&self) -> u32 {
        self.inner.level()
    }
    fn det_ords(&self) -> Vec<i64> {
        self.inner.det_ords()
    }
    fn eval(&self, ring: &ResidueRing, y: &ResMat) -> Option<u64> {
        let k = self.kappa;
        let kv = [k[3], k[1], k[2], k[0]];
        self.inner.eval(ring, &ring.mat_mul(&ring.mat_mul(&k, y), &kv))
    }
}

/// `ψ_k(γ)` by brute force: wide `i`/`b` windows, lifted `κ`, `f_G` and
/// `W_k` evaluated on full matrices.
fn psi_brute(d: &KutzkoDatum, alpha: intertwine::Elem, k: i64, imin: i64, imax: i64, bdepth: i64) -> CharacterValue {
    let ctx = &d.ctx;
    let form = GroupForm::split_orthogonal(ctx, 2);
    let si = s_of(ctx, &TorusElem::new(ctx, alpha).unwrap(), &form)
        .unwrap()
        .inv(ctx)
        .unwrap();
    let ring = ResidueRing::new(ctx, 2).unwrap();
    let kappas: Vec<Mat> = ring
        .gl2()
        .iter()
        .map(|m| Mat::m2(ring.lift(ctx, m[0]), ring.lift(ctx, m[1]), ring.lift(ctx, m[2]), ring.lift(ctx, m[3])))
        .collect();
    let cls = ctx.square_class_reps().unwrap();
    let om = QuadCharTable::trivial(&cls);
    let id = Mat::identity(ctx, 2);
    let p = ctx.p();
    let mut bs = vec![ctx.zero()];
    for j in 1..=bdepth {
        for idx in 0..p.pow(j as u32) {
            let digits: Vec<u64> = (0..j).map(|t| idx / p.pow(t as u32) % p).collect();
            if digits[0] != 0 {
                bs.push(ctx.from_digits(-j, &digits));
            }
        }
    }
    let mut total = CharacterValue::zero(p);
    for i in imin..=imax {
        for b in &bs {
            let g = Mat::m2(ctx.pi_pow(i), *b, ctx.zero(), ctx.one());
            let w = w_k_total(ctx, &g, &id, &om, &cls, k).unwrap();
            if w == 0 {
                continue;
            }
            let mut acc = CharacterValue::zero(p);
            for kap in &kappas {
                let x = twisted_conj(ctx, &kap.mul(ctx, &g), &si, &form);
                acc = &acc + &d.f_g(&x).unwrap();
            }
            total = &total + &acc.scale(&rat(w, kappas.len() as i64));
        }
    }
    total
}

#[test]
fn zero_integrand() {
    let k = p5();
    let tr = small();
    let t = assemble_coefficients(&k, &ZeroIntegrand { p: 5 }, &tr).unwrap();
    assert!(t.coeffs.iter().all(|c| c.is_zero()));
    assert_eq!(t.regime(), "zero");
    let delta = Mat::diag(&k, &[k.from_int(1), k.from_int(2)]);
    assert!(orbital_twisted(&k, &delta, &ZeroIntegrand { p: 5 }, &tr).unwrap().is_zero());
}

#[test]
fn k_indicator_orbit_volume() {
    // δ ∈ K with s_1 + s_2 a unit: the orbit meets K only in the coset of K
    for (k, s) in [(p5(), [1, 2]), (p5(), [3, 4]), (make_field(3, 1, &[-3, 1], 14).unwrap(), [1, 4])] {
        let delta = Mat::diag(&k, &[k.from_int(s[0]), k.from_int(s[1])]);
        let v = orbital_twisted(&k, &delta, &KIndicator { p: k.p() }, &small()).unwrap();
        assert_eq!(v.value, CharacterValue::one(k.p()));
        let form = GroupForm::split_orthogonal(&k, 2);
        let rep = intertwine::twisted::d_eps(&k, &delta, &form).unwrap();
        assert_eq!(v.half_q_exp, rep.value_exponent);
    }
    // s_1 + s_2 ∈ 𝔭: b-classes of depth 1 also land in K
    let k = p5();
    let delta = Mat::diag(&k, &[k.from_int(1), k.from_int(4)]);
    let v = orbital_twisted(&k, &delta, &KIndicator { p: 5 }, &small()).unwrap();
    assert_eq!(v.value, CharacterValue::from_int(5, 5));
}

#[test]
fn right_translation_invariance() {
    let k = p2e2();
    let d = KutzkoDatum::new(&k).unwrap();
    let f = d.residue_fn().unwrap();
    let form = GroupForm::split_orthogonal(&k, 2);
    for e in 1..=3 {
        let alpha = k.add(&k.one(), &k.add(&k.pi_pow(e), &k.pi_pow(e + 1)));
        let si = s_of(&k, &TorusElem::new(&k, alpha).unwrap(), &form)
            .unwrap()
            .inv(&k)
            .unwrap();
        let base = orbital_twisted(&k, &si, &f, &small()).unwrap();
        for shift in [-2, -1, 1, 3] {
            let moved = si.scale(&k, &k.pi_pow(shift));
            let v = orbital_twisted(&k, &moved, &f, &small()).unwrap();
            assert_eq!(v, base);
        }
    }
    let k = p5();
    let delta = Mat::diag(&k, &[k.from_int(1), k.from_int(4)]);
    let base = orbital_twisted(&k, &delta, &KIndicator { p: 5 }, &small()).unwrap();
    let moved = delta.scale(&k, &k.pi_pow(2));
    assert_eq!(orbital_twisted(&k, &moved, &KIndicator { p: 5 }, &small()).unwrap(), base);
}

#[test]
fn psi_matches_brute_force() {
    let k = p2e2();
    let d = KutzkoDatum::new(&k).unwrap();
    let tr = small();
    let cases = [
        k.add(&k.one(), &k.pi()),
        k.add(&k.one(), &k.pi_pow(2)),
        k.add(&k.one(), &k.add(&k.pi_pow(3), &k.pi_pow(4))),
        k.pi(),
        k.add(&k.pi_pow(-1), &k.one()),
    ];
    for alpha in cases {
        for kk in [0, 2] {
            let fast = psi_k(&d, &TorusElem::new(&k, alpha).unwrap(), kk, &tr).unwrap();
            let slow = psi_brute(&d, alpha, kk, -2, 5, 5);
            assert_eq!(fast.value, slow);
        }
    }
    let k = p5();
    let d = KutzkoDatum::new(&k).unwrap();
    for alpha in [k.from_int(-6), k.from_int(6)] {
        let fast = psi_k(&d, &TorusElem::new(&k, alpha).unwrap(), 1, &tr).unwrap();
        assert_eq!(fast.value, psi_brute(&d, alpha, 1, 0, 1, 0));
    }
}

#[test]
fn psi_signs_and_vanishing() {
    let k = p2e2();
    let d = KutzkoDatum::new(&k).unwrap();
    let tr = small();
    for e in 2..=4 {
        let g = TorusElem::new(&k, k.add(&k.one(), &k.pi_pow(e))).unwrap();
        for kk in 0..=3 {
            let v = psi_k(&d, &g, kk, &tr).unwrap().value.as_rational().unwrap();
            assert!(v > BigRational::zero());
        }
    }
    for alpha in [k.pi(), k.pi_pow(2), k.pi_pow(-1)] {
        let g = TorusElem::new(&k, alpha).unwrap();
        assert!(psi_k(&d, &g, 1, &tr).unwrap().is_zero());
    }
    // odd p, α ≡ -1: ψ_k = (4k+1)·|O×/O×²|·Φ(S^{-1})
    let k = p5();
    let d = KutzkoDatum::new(&k).unwrap();
    let g = TorusElem::new(&k, k.from_int(-6)).unwrap();
    let p0 = psi_k(&d, &g, 0, &tr).unwrap().value;
    for kk in 0..=4 {
        let v = psi_k(&d, &g, kk, &tr).unwrap().value;
        assert_eq!(v, p0.scale(&rat(4 * kk + 1, 1)));
    }
}

#[test]
fn stratum_sums_vanish() {
    // Σ_{i,b} Φ is a constant term of a cuspidal function
    for (k, e_max) in [(p2e2(), 5), (p5(), 2)] {
        let d = KutzkoDatum::new(&k).unwrap();
        let f = d.residue_fn().unwrap();
        let avg = KAverage::new(&k, &f).unwrap();
        let mut tr = small();
        tr.e_max = e_max;
        for sv in stratum_values(&k, &avg, &tr).unwrap() {
            let mut s = CharacterValue::zero(k.p());
            for v in sv.table.values() {
                s = &s + v;
            }
            assert!(s.is_zero(), "stratum {:?}", sv.stratum);
        }
    }
}

#[test]
fn k_invariance() {
    let k = p2e2();
    let d = KutzkoDatum::new(&k).unwrap();
    let f = d.residue_fn().unwrap();
    let tr = small();
    let base = assemble_coefficients(&k, &f, &tr).unwrap();
    let ring = ResidueRing::new(&k, 2).unwrap();
    let gl = ring.gl2();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..4 {
        let kappa = gl[rng.gen_range(0..gl.len())];
        let g = Conjugated { inner: &f, kappa };
        let t = assemble_coefficients(&k, &g, &tr).unwrap();
        assert_eq!(t.coeffs, base.coeffs);
    }
}

#[test]
fn odd_factorization() {
    let k = p5();
    let d = KutzkoDatum::new(&k).unwrap();
    let f = d.residue_fn().unwrap();
    let tr = TruncationSpec {
        e_max: 2,
        k_max: 6,
        ..small()
    };
    let t = assemble_coefficients(&k, &f, &tr).unwrap();
    let c0 = t.coeffs[0].value.clone();
    for (kk, c) in t.coeffs.iter().enumerate() {
        assert_eq!(c.value, c0.scale(&rat(4 * kk as i64 + 1, 1)));
    }
    for (e, row) in &t.per_e {
        if *e >= 1 {
            assert!(row.iter().all(|x| x.is_zero()));
        }
    }
    assert!(t.nonunit.iter().all(|x| x.is_zero()));
    let rg = rg_term(&k, &f, &tr).unwrap();
    let units = t.unit_classes as i64;
    assert_eq!(c0, rg.value.scale(&rat(2 * units, 1)));
}

#[test]
fn even_affine() {
    let k = p2e2();
    let d = KutzkoDatum::new(&k).unwrap();
    let tr = TruncationSpec {
        e_max: 6,
        k_max: 8,
        ..small()
    };
    let ab = coefficient_a_b(&d, &tr).unwrap();
    let c: Vec<BigRational> = ab
        .table
        .coeffs
        .iter()
        .map(|x| x.value.as_rational().unwrap())
        .collect();
    for w in c.windows(3) {
        assert_eq!(&w[2] - &w[1] * rat(2, 1) + &w[0], BigRational::zero());
    }
    let a = ab.a.as_rational().unwrap();
    assert!(a > BigRational::zero());
    assert!(ab.b.is_zero());
    let u = ab.table.unit_classes as i64;
    for (kk, ck) in c.iter().enumerate() {
        let want = (&a + ab.b.as_rational().unwrap() * rat(kk as i64, 1)) * rat(2 * u, 1);
        assert_eq!(ck, &want);
    }
    let incs: Vec<BigRational> = ab.increments.iter().map(|i| i.a.as_rational().unwrap()).collect();
    for w in incs.windows(2) {
        assert!(w[1] < w[0]);
    }
    // the volume formula assumes Φ = 1 on all of G_e^-; the computed A is smaller
    assert!(ab.a_formula.as_rational().unwrap() > a);
    for inc in &ab.increments {
        // b ∈ O alone: 4·q^{-e}·|D_ε|
        let single = rat(4, 1) * rat(1, 2i64.pow(inc.e as u32)) * rat(1, 4i64.pow(inc.e as u32 + 1));
        assert!(inc.b_formula.as_rational().unwrap() >= single);
    }
    assert!(coefficient_a_b(&KutzkoDatum::new(&p5()).unwrap(), &tr).is_err());
}

#[test]
fn worker_count_determinism() {
    let k = p2e2();
    let d = KutzkoDatum::new(&k).unwrap();
    let f = d.residue_fn().unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| format!("{:?}", assemble_coefficients(&k, &f, &small()).unwrap()))
    };
    assert_eq!(run(1), run(3));
}
