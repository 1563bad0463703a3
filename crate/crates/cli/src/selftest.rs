//! The acceptance suite. Each criterion is self-contained and seeded.

use std::time::Instant;

use anyhow::{ensure, Result};
use intertwine::integrator::{assemble_coefficients, coefficient_a_b, TruncationSpec};
use intertwine::matlattice::{delta, nu};
use intertwine::residue::{fit_polynomial, laurent_at_zero, principal_part, residue_report, ClosedForm, LaurentTerm};
use intertwine::supercuspidal::{kappa_vdash_check, support_scan, KutzkoDatum};
use intertwine::twisted::{d_eps, s_of, twisted_centralizer_sample};
use intertwine::weights::{w_k_closed, w_k_oracle, TorusSpec, WeightQuery};
use intertwine::{make_field, GroupForm, LocalFieldCtx, Mat, TorusElem, Val};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

type Check = fn() -> Result<String>;

pub const CRITERIA: [(u32, &str, Check); 11] = [
    (1, "weight factor closed form equals oracle", c1_weights),
    (2, "torus volume (2k+1)^r law", c2_two_k_plus_one),
    (3, "lower bound with h", c3_lower_bound),
    (4, "nu(S(gamma)) = -gamma", c4_nu),
    (5, "twisted centralizer is the torus", c5_centralizer),
    (6, "character suite and the 2 in p^2 hypothesis", c6_characters),
    (7, "support vanishing and the even witness", c7_support),
    (8, "odd p factorization c_k = (4k+1) c_0", c8_odd),
    (9, "even p affinity with A > 0 and B > 0", c9_even),
    (10, "residue benchmark 1/(1-u)", c10_residue),
    (11, "determinism across worker counts", c11_determinism),
];

pub fn run(only: &[u32]) -> Vec<Outcome> {
    CRITERIA
        .iter()
        .filter(|(id, _, _)| only.is_empty() || only.contains(id))
        .map(|&(id, title, f)| {
            let t = Instant::now();
            let r = f();
            let seconds = t.elapsed().as_secs_f64();
            let (pass, detail) = match r {
                Ok(d) => (true, d),
                Err(e) => (false, format!("{e:#}")),
            };
            Outcome {
                id,
                title,
                pass,
                detail,
                seconds,
            }
        })
        .collect()
}

pub fn line(o: &Outcome) -> String {
    format!(
        "[{}] {:>2} {} ({:.1}s): {}",
        if o.pass { "PASS" } else { "FAIL" },
        o.id,
        o.title,
        o.seconds,
        o.detail
    )
}

/// Prints the table and returns the process exit code.
pub fn main(only: &[u32], json: bool) -> Result<i32> {
    let out = run(only);
    if json {
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        for o in &out {
            println!("{}", line(o));
        }
        let passed = out.iter().filter(|o| o.pass).count();
        println!("{passed}/{} criteria passed", out.len());
    }
    Ok(if out.iter().all(|o| o.pass) { 0 } else { 1 })
}

fn field(p: u64, e: u32, prec: u32) -> LocalFieldCtx {
    let mut poly = vec![0i64; e as usize + 1];
    poly[0] = -(p as i64);
    poly[e as usize] = 1;
    make_field(p, e, &poly, prec).expect("Eisenstein x^e - p")
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn c1_weights() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let fields = [field(5, 1, 12), field(2, 2, 14), field(3, 1, 12), field(2, 1, 14)];
    let mut cases = 0;
    for k in &fields {
        for _ in 0..150 {
            let n = if rng.gen_bool(0.5) { 2 } else { 4 };
            let r = rng.gen_range(1..=n / 2);
            let g = Mat::random_invertible(k, &mut rng, n, -2, 2);
            let kk = rng.gen_range(-2..=3);
            let q = WeightQuery::simple(k, g, kk, r);
            let (a, b) = (w_k_closed(k, &q)?, w_k_oracle(k, &q)?);
            ensure!(a == b, "p = {}: closed {a} vs oracle {b} at k = {kk}", k.p());
            cases += 1;
        }
    }
    Ok(format!("{cases} cases, 0 mismatches"))
}

fn c2_two_k_plus_one() -> Result<String> {
    let mut checked = 0;
    for k in [field(5, 1, 12), field(2, 2, 14)] {
        for (n, r) in [(2, 1), (4, 2)] {
            for kk in -3..=5i64 {
                let q = WeightQuery::simple(&k, Mat::identity(&k, n), kk, r);
                let want = if kk >= 0 { (2 * kk as u64 + 1).pow(r as u32) } else { 0 };
                let got = w_k_oracle(&k, &q)?;
                ensure!(got == want, "r = {r}, k = {kk}: {got} != {want}");
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} exact values"))
}

fn c3_lower_bound() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let fields = [field(5, 1, 12), field(2, 2, 14), field(3, 1, 12)];
    let mut checked = 0;
    let mut tight = 0;
    while checked < 200 {
        let k = &fields[checked % 3];
        let n = if rng.gen_bool(0.5) { 2 } else { 4 };
        let g = Mat::random_invertible(k, &mut rng, n, -1, 2);
        let h = Mat::random_invertible(k, &mut rng, n, -1, 2);
        let kk = rng.gen_range(0..=3);
        let ht = h.transpose();
        let mut factors = Vec::new();
        for i in 1..=n / 2 {
            factors.push(delta(k, &g, i)? + delta(k, &ht, i)? + 2 * kk + 1);
        }
        if factors.iter().any(|&f| f < 1) {
            continue;
        }
        let bound: i64 = factors.iter().product();
        let w = w_k_oracle(k, &WeightQuery::new(g, h, kk, TorusSpec::split(n / 2)))? as i64;
        ensure!(bound <= w, "bound {bound} exceeds w_k = {w}");
        tight += usize::from(bound == w);
        checked += 1;
    }
    Ok(format!("{checked} cases, {tight} with equality"))
}

fn random_regular<R: Rng>(k: &LocalFieldCtx, rng: &mut R, lo: i64, hi: i64) -> Result<TorusElem> {
    loop {
        let a = k.random_nonzero(rng, lo, hi);
        let g = TorusElem::new(k, a)?;
        let near = |c: i64| {
            k.ord(&k.sub(&a, &k.from_int(c)))
                .map(|v| v >= Val::Finite(5))
                .unwrap_or(true)
        };
        if g.is_regular(k) && !near(1) && !near(-1) {
            return Ok(g);
        }
    }
}

fn c4_nu() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let fields = [field(5, 1, 14), field(2, 2, 20), field(3, 1, 14)];
    for t in 0..100 {
        let k = &fields[t % 3];
        let form = GroupForm::split_orthogonal(k, 2);
        let g = random_regular(k, &mut rng, -2, 3)?;
        let s = s_of(k, &g, &form)?;
        let lhs = nu(k, &s, &form)?;
        ensure!(
            lhs.eq(k, &g.matrix(k)?.neg(k)),
            "alpha = {}: nu(S) = {}",
            k.format(&g.alpha),
            lhs.format(k)
        );
    }
    Ok("100 regular gamma over p = 5, 2, 3".into())
}

fn c5_centralizer() -> Result<String> {
    let k = field(5, 1, 14);
    let form = GroupForm::split_orthogonal(&k, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let (mut solutions, mut trials, mut gammas) = (0usize, 0usize, 0usize);
    while solutions < 10_000 {
        let a = k.random_unit(&mut rng);
        let r = k.residue(&a)?;
        if r == 1 || r == 4 {
            continue;
        }
        let g = TorusElem::new(&k, a)?;
        let rep = twisted_centralizer_sample(&k, &g, 4, 1000, &mut rng)?;
        ensure!(rep.all_in_torus(), "alpha = {}: {} solutions outside T", k.format(&a), rep.non_torus);
        solutions += rep.solutions;
        trials += rep.trials;
        gammas += 1;
    }
    let mut kernels = 0;
    for _ in 0..200 {
        let g = random_regular(&k, &mut rng, -2, 3)?;
        let si = s_of(&k, &g, &form)?.inv(&k)?;
        let d = d_eps(&k, &si, &form)?;
        ensure!(d.kernel_dim == 1, "alpha = {}: kernel dimension {}", k.format(&g.alpha), d.kernel_dim);
        kernels += 1;
    }
    Ok(format!(
        "{solutions} solutions mod p^4 from {trials} walks over {gammas} gamma, all in T; kernel 1 for {kernels} gamma"
    ))
}

fn unit_plus<R: Rng>(k: &LocalFieldCtx, rng: &mut R, from: i64) -> intertwine::Elem {
    k.add(&k.one(), &k.random_elem(rng, from, 5))
}

fn random_iwahori<R: Rng>(k: &LocalFieldCtx, rng: &mut R, level: i64) -> Mat {
    Mat::m2(
        unit_plus(k, rng, level),
        k.random_elem(rng, level - 1, 5),
        k.random_elem(rng, level, 5),
        unit_plus(k, rng, level),
    )
}

fn c6_characters() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for k in [field(2, 2, 20), field(5, 1, 14), field(3, 1, 14)] {
        let d = KutzkoDatum::new(&k)?;
        let p = k.p();
        for _ in 0..500 {
            let a = random_iwahori(&k, &mut rng, 1);
            let b = random_iwahori(&k, &mut rng, 1);
            let (la, lb) = (d.lambda_exp(&a)?, d.lambda_exp(&b)?);
            ensure!(d.lambda_exp(&a.mul(&k, &b))? == (la + lb) % p, "p = {p}: not multiplicative");
            let z = random_iwahori(&k, &mut rng, 2);
            ensure!(d.lambda_exp(&z)? == 0, "p = {p}: nontrivial on I_2");
            ensure!(d.lambda_exp(&a.mul(&k, &z))? == la, "p = {p}: not I_2-invariant");
            if p == 2 {
                ensure!(d.lambda_exp(&a.mul(&k, &a))? == 0, "lambda^2 != 1");
            }
        }
    }
    let (n, fails) = kappa_vdash_check(&field(2, 2, 20), 500, &mut rng)?;
    ensure!(fails == 0, "(p, e) = (2, 2): {fails}/{n} failures");
    let (n1, fails1) = kappa_vdash_check(&field(2, 1, 14), 500, &mut rng)?;
    ensure!(fails1 > 0, "(p, e) = (2, 1): expected failures, got none");
    Ok(format!(
        "500 pairs per field; kappa check 0/{n} failures at e = 2, {fails1}/{n1} at e = 1"
    ))
}

fn c7_support() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut scans = 0;
    let mut none = |d: &KutzkoDatum, a: intertwine::Elem| -> Result<()> {
        let g = TorusElem::new(&d.ctx, a)?;
        let r = support_scan(d, &g, 6, 4)?;
        ensure!(r.witness.is_none(), "p = {}: witness for alpha = {}", d.ctx.p(), d.ctx.format(&a));
        scans += 1;
        Ok(())
    };
    for k in [field(5, 1, 14), field(2, 2, 20), field(3, 1, 14)] {
        let d = KutzkoDatum::new(&k)?;
        for a in [k.pi(), k.pi_pow(2), k.pi_pow(-1)] {
            none(&d, a)?;
        }
    }
    let k5 = field(5, 1, 14);
    let d5 = KutzkoDatum::new(&k5)?;
    let mut units = 0;
    while units < 30 {
        let a = k5.random_unit(&mut rng);
        let r = k5.residue(&a)?;
        if r == 1 || r == 4 {
            continue;
        }
        none(&d5, a)?;
        units += 1;
    }
    for k in [field(5, 1, 14), field(3, 1, 14)] {
        let d = KutzkoDatum::new(&k)?;
        for t in 0..20 {
            let a = k.add(&k.one(), &k.mul(&k.pi_pow(1 + t % 2), &k.random_unit(&mut rng)));
            none(&d, a)?;
        }
    }
    let k = field(2, 2, 20);
    let d = KutzkoDatum::new(&k)?;
    let g = TorusElem::new(&k, k.add(&k.one(), &k.pi_pow(2)))?;
    let r = support_scan(&d, &g, 6, 4)?;
    let w = r.witness.ok_or_else(|| anyhow::anyhow!("no witness for alpha = 1 + pi^2"))?;
    Ok(format!(
        "{scans} scans at depth 6 empty; witness kappa = {:?}, b = {}, level {}",
        w.kappa, w.b, w.level
    ))
}

fn c8_odd() -> Result<String> {
    let k = field(5, 1, 16);
    let f = KutzkoDatum::new(&k)?.residue_fn()?;
    let tr = TruncationSpec {
        m: 3,
        e_max: 5,
        k_max: 6,
        ..TruncationSpec::default()
    };
    let t = assemble_coefficients(&k, &f, &tr)?;
    let c0 = t.coeffs[0].value.clone();
    for (kk, c) in t.coeffs.iter().enumerate() {
        ensure!(
            c.value == c0.scale(&rat(4 * kk as i64 + 1)),
            "k = {kk}: c_k = {} but (4k+1) c_0 = {}",
            c.value,
            c0.scale(&rat(4 * kk as i64 + 1))
        );
    }
    Ok(format!("c_0 = {c0}, k in 0..=6 (holds with R_G = 0)"))
}

fn c9_even() -> Result<String> {
    let k = field(2, 2, 24);
    let d = KutzkoDatum::new(&k)?;
    let tr = TruncationSpec {
        m: 3,
        e_max: 6,
        k_max: 8,
        ..TruncationSpec::default()
    };
    let ab = coefficient_a_b(&d, &tr)?;
    let c: Vec<BigRational> = ab
        .table
        .coeffs
        .iter()
        .map(|x| x.value.as_rational())
        .collect::<Option<_>>()
        .ok_or_else(|| anyhow::anyhow!("non-rational coefficient"))?;
    let fit = fit_polynomial(&c, 1)?;
    ensure!(fit.k0 <= 2, "second differences settle only from k0 = {}", fit.k0);
    let incs: Vec<BigRational> = ab
        .increments
        .iter()
        .filter(|i| i.e >= 2)
        .map(|i| i.a.as_rational().unwrap_or_default().abs())
        .collect();
    ensure!(
        incs.windows(2).all(|w| w[1] < w[0]),
        "per-e increments of A are not decreasing"
    );
    let a = ab.a.as_rational().unwrap_or_default();
    let b = ab.b.as_rational().unwrap_or_default();
    ensure!(a > BigRational::zero(), "A = {a} is not positive");
    ensure!(
        b > BigRational::zero(),
        "A = {a} > 0, k0 = {}, increments decrease; but B = {b} is not positive (volume formulas give A = {}, B = {})",
        fit.k0,
        ab.a_formula,
        ab.b_formula
    );
    Ok(format!("A = {a}, B = {b}, k0 = {}", fit.k0))
}

fn c10_residue() -> Result<String> {
    let cf = ClosedForm {
        num: vec![rat(1)],
        den: vec![rat(1), rat(-1)],
        pole_order: 1,
    };
    for n in 1..=4u32 {
        let l = laurent_at_zero(&cf, n, 0)?;
        let want = vec![LaurentTerm {
            order: -1,
            rational: BigRational::new(BigInt::from(1), BigInt::from(2 * n)),
            lnq_power: -1,
        }];
        ensure!(principal_part(&l) == want, "n = {n}: principal part {:?}", principal_part(&l));
    }
    let mut worst = 0.0f64;
    for q in [2u64, 5] {
        let rep = residue_report(&vec![rat(1); 8], 2, q, 1, "benchmark")?;
        for c in &rep.checks.numeric {
            worst = worst.max(c.rel_err);
        }
    }
    ensure!(worst <= 1e-6, "numeric relative error {worst:e}");
    Ok(format!("residue 1/(2n) (ln q)^-1 for n = 1..4; worst relative error {worst:.1e}"))
}

const DETERMINISM_CONFIG: &str = "\
[field]
p = 2
e = 2
eisenstein = -2, 0, 1
[pipeline]
regime = even
k_max = 6
e_max = 4
[query]
alpha = 1 + pi^2; 1 + pi^3; 3
k = 0..2
trials = 200
";

fn c11_determinism() -> Result<String> {
    let mut bytes = 0;
    for format in ["csv", "json"] {
        for cmd in ["dtwist", "psik", "coeffs", "rg-term", "residue"] {
            let mut outs = Vec::new();
            for workers in [1, 3] {
                let text = format!("{DETERMINISM_CONFIG}[output]\nformat = {format}\n[run]\nworkers = {workers}\n");
                let cfg = RunConfig::from_str_env(&text, None)?;
                outs.push(crate::render(cmd, &cfg)?);
            }
            ensure!(outs[0] == outs[1], "{cmd} ({format}) differs between 1 and 3 workers");
            bytes += outs[0].len();
        }
    }
    Ok(format!("10 outputs, {bytes} bytes, identical for 1 and 3 workers"))
}
