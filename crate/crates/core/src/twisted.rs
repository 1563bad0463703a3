//! The norm correspondence `S(γ)`, twisted conjugation `δ ↦ gδg^⊢`, and the
//! discriminants `D_ε` and `D`.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::localfield::{Elem, LocalFieldCtx, ResMat, ResidueRing, Val};
use crate::matlattice::{vdash, GroupForm, Mat};

/// `γ = diag(α, α^{-1})` in the split torus of `SO(2)`.
#[derive(Clone, Copy, Debug)]
pub struct TorusElem {
    pub alpha: Elem,
}

impl TorusElem {
    pub fn new(ctx: &LocalFieldCtx, alpha: Elem) -> Result<Self> {
        if alpha.is_zero() {
            return Err(Error::DomainError("α must be nonzero".into()));
        }
        let _ = ctx.ord(&alpha)?;
        Ok(TorusElem { alpha })
    }

    pub fn is_regular(&self, ctx: &LocalFieldCtx) -> bool {
        let one = ctx.one();
        !ctx.eq(&self.alpha, &one) && !ctx.eq(&self.alpha, &ctx.neg(&one))
    }

    pub fn matrix(&self, ctx: &LocalFieldCtx) -> Result<Mat> {
        Ok(Mat::diag(ctx, &[self.alpha, ctx.inv(&self.alpha)?]))
    }

    /// `ord(α - 1)`, the depth of `γ` in `T_1`.
    pub fn depth(&self, ctx: &LocalFieldCtx) -> Result<Val> {
        ctx.ord(&ctx.sub(&self.alpha, &ctx.one()))
    }
}

/// `S(γ) = w J^{-1} (γ - I)`.
pub fn s_of(ctx: &LocalFieldCtx, gamma: &TorusElem, form: &GroupForm) -> Result<Mat> {
    if form.n != 2 {
        return Err(Error::DomainError("S(γ) is implemented for n = 2".into()));
    }
    let gm = gamma.matrix(ctx)?.sub(ctx, &Mat::identity(ctx, 2));
    if gm.entries().iter().any(|x| x.is_zero() && !x.is_exact_zero())
        || gm.get(0, 0).is_zero()
        || gm.get(1, 1).is_zero()
    {
        return Err(Error::SingularGammaMinusOne);
    }
    Ok(form.w.mul(ctx, &form.j.inv(ctx)?).mul(ctx, &gm))
}

/// `g·δ·g^⊢`.
pub fn twisted_conj(ctx: &LocalFieldCtx, g: &Mat, delta: &Mat, form: &GroupForm) -> Mat {
    g.mul(ctx, delta).mul(ctx, &vdash(ctx, g, form))
}

pub fn is_eps_symmetric(ctx: &LocalFieldCtx, x: &Mat, form: &GroupForm) -> bool {
    x.eq(ctx, &vdash(ctx, x, form))
}

/// `X ≡ X^⊢ mod 𝔭^m`.
pub fn is_eps_symmetric_mod(ctx: &LocalFieldCtx, x: &Mat, form: &GroupForm, m: i64) -> Result<bool> {
    x.sub(ctx, &vdash(ctx, x, form)).in_ideal(ctx, m)
}

/// A discriminant given by its absolute value `q^{exponent}`.
#[derive(Clone, Debug, Serialize)]
pub struct DiscriminantReport {
    /// `|D| = q^{value_exponent}`
    pub value_exponent: i64,
    pub kernel_dim: usize,
    #[serde(serialize_with = "ser_elem_ord")]
    pub charpoly_lowterm: Elem,
    pub regular: bool,
}

fn ser_elem_ord<S: serde::Serializer>(e: &Elem, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{:?}", e.abs_prec()))
}

impl DiscriminantReport {
    /// `|D|` as an exact rational.
    pub fn abs_value(&self, q: u64) -> BigRational {
        let b = BigInt::from(q).pow(self.value_exponent.unsigned_abs() as u32);
        if self.value_exponent >= 0 {
            BigRational::from_integer(b)
        } else {
            BigRational::new(BigInt::from(1), b)
        }
    }

    /// `log_q max{1, |D|^{-1}}`.
    pub fn phi(&self) -> i64 {
        (-self.value_exponent).max(0)
    }
}

/// Matrix of a linear map on `M_n(F)` in the basis `E_ab` (row-major index).
fn operator_matrix<F>(ctx: &LocalFieldCtx, n: usize, f: F) -> Mat
where
    F: Fn(&Mat) -> Mat,
{
    let d = n * n;
    let mut a = Mat::zeros(ctx, d);
    for col in 0..d {
        let mut e = Mat::zeros(ctx, n);
        e.set(col / n, col % n, ctx.one());
        let img = f(&e);
        for row in 0..d {
            a.set(row, col, *img.get(row / n, row % n));
        }
    }
    a
}

/// `X ↦ -δ X^⊢ δ^{-1} - X` on `M_n(F)`.
pub fn twisted_operator(ctx: &LocalFieldCtx, delta: &Mat, form: &GroupForm) -> Result<Mat> {
    let di = delta.inv(ctx)?;
    Ok(operator_matrix(ctx, delta.n(), |x| {
        delta
            .mul(ctx, &vdash(ctx, x, form))
            .mul(ctx, &di)
            .neg(ctx)
            .sub(ctx, x)
    }))
}

/// Kernel dimension and lowest nonzero coefficient of the characteristic
/// polynomial of `a`.
pub fn operator_discriminant(ctx: &LocalFieldCtx, a: &Mat) -> Result<(usize, Elem)> {
    let cp = a.charpoly(ctx);
    let d = a.n();
    let mut r = 0;
    while r < d && cp[d - r].is_zero() {
        r += 1;
    }
    if r == d {
        return Ok((d, ctx.one()));
    }
    let low = cp[d - r];
    ctx.ord(&low)?;
    Ok((r, low))
}

/// `|D_ε(δ)|` from the charpoly of `Ad(δ)∘dε - 1`.
pub fn d_eps(ctx: &LocalFieldCtx, delta: &Mat, form: &GroupForm) -> Result<DiscriminantReport> {
    let a = twisted_operator(ctx, delta, form)?;
    let (r, low) = operator_discriminant(ctx, &a)?;
    let v = ctx.ord(&low)?.finite().expect("nonzero low term");
    let expected = delta.n() / 2;
    let rep = DiscriminantReport {
        value_exponent: -v,
        kernel_dim: r,
        charpoly_lowterm: low,
        regular: r == expected,
    };
    if !rep.regular {
        return Err(Error::NotRegular(r));
    }
    Ok(rep)
}

/// Which `H` the Weyl discriminant is taken in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HForm {
    SplitSO2,
    /// `Sp_2 = SL_2`
    Symplectic2,
}

/// `D(γ) = det(Ad(γ) - 1; Lie(H)/Lie(T))`.
pub fn weyl_disc(ctx: &LocalFieldCtx, gamma: &TorusElem, h: HForm) -> Result<DiscriminantReport> {
    if !gamma.is_regular(ctx) {
        return Err(Error::DomainError("γ is not regular".into()));
    }
    let g = gamma.matrix(ctx)?;
    let gi = g.inv(ctx)?;
    // coordinates of Lie(H) elements and the basis itself
    let basis: Vec<Mat> = match h {
        HForm::SplitSO2 => vec![Mat::diag(ctx, &[ctx.one(), ctx.from_int(-1)])],
        HForm::Symplectic2 => vec![
            Mat::diag(ctx, &[ctx.one(), ctx.from_int(-1)]),
            Mat::m2(ctx.zero(), ctx.one(), ctx.zero(), ctx.zero()),
            Mat::m2(ctx.zero(), ctx.zero(), ctx.one(), ctx.zero()),
        ],
    };
    let coords = |x: &Mat| -> Vec<Elem> {
        match h {
            HForm::SplitSO2 => vec![*x.get(0, 0)],
            HForm::Symplectic2 => vec![*x.get(0, 0), *x.get(0, 1), *x.get(1, 0)],
        }
    };
    let d = basis.len();
    let mut a = Mat::zeros(ctx, d);
    for (col, b) in basis.iter().enumerate() {
        let img = g.mul(ctx, b).mul(ctx, &gi).sub(ctx, b);
        for (row, c) in coords(&img).into_iter().enumerate() {
            a.set(row, col, c);
        }
    }
    let (r, low) = operator_discriminant(ctx, &a)?;
    let v = ctx.ord(&low)?.finite().expect("nonzero low term");
    Ok(DiscriminantReport {
        value_exponent: -v,
        kernel_dim: r,
        charpoly_lowterm: low,
        regular: r == 1,
    })
}

/// Outcome of the randomized search for the twisted centralizer.
#[derive(Clone, Debug, Serialize)]
pub struct CentralizerReport {
    pub depth: u32,
    pub trials: usize,
    pub solutions: usize,
    pub dead_ends: usize,
    pub non_torus: usize,
}

impl CentralizerReport {
    pub fn all_in_torus(&self) -> bool {
        self.non_torus == 0
    }
}

/// Random walk down the Hensel tree of `g δ g^⊢ ≡ δ (mod 𝔭^j)`, `δ = S(γ)^{-1}`.
///
/// Each completed walk yields a solution modulo `𝔭^m`, which is then
/// checked to be diagonal with `g11·g22 ≡ 1` modulo `𝔭^{m-1}`.
pub fn twisted_centralizer_sample<R: Rng + ?Sized>(
    ctx: &LocalFieldCtx,
    gamma: &TorusElem,
    m: u32,
    trials: usize,
    rng: &mut R,
) -> Result<CentralizerReport> {
    if !gamma.is_regular(ctx) {
        return Err(Error::DomainError("γ is not regular".into()));
    }
    let form = GroupForm::split_orthogonal(ctx, 2);
    let delta = s_of(ctx, gamma, &form)?.inv(ctx)?;
    if !delta.is_integral(ctx)? {
        return Err(Error::DomainError("S(γ)^{-1} must be integral for the residue search".into()));
    }
    let ring = ResidueRing::new(ctx, m)?;
    let dl: ResMat = [
        ring.reduce(ctx, delta.get(0, 0))?,
        ring.reduce(ctx, delta.get(0, 1))?,
        ring.reduce(ctx, delta.get(1, 0))?,
        ring.reduce(ctx, delta.get(1, 1))?,
    ];
    let p = ctx.p();
    let pj: Vec<u64> = (0..=m).map(|j| p.pow(j)).collect();
    let reduce_to = |x: u16, j: u32| (x as u64 % pj[j as usize]) as u16;
    let holds = |g: &ResMat, j: u32| {
        let t = twisted_conj_res(&ring, g, &dl);
        (0..4).all(|i| reduce_to(t[i], j) == reduce_to(dl[i], j))
    };
    // level-1 solutions: all of GL_2(F_p)
    let mut level1 = Vec::new();
    for a in 0..p as u16 {
        for b in 0..p as u16 {
            for c in 0..p as u16 {
                for d in 0..p as u16 {
                    let g = [a, b, c, d];
                    if ring.is_unit(ring.det(&g)) && holds(&g, 1) {
                        level1.push(g);
                    }
                }
            }
        }
    }
    let mut report = CentralizerReport {
        depth: m,
        trials,
        solutions: 0,
        dead_ends: 0,
        non_torus: 0,
    };
    let q4 = p.pow(4);
    for _ in 0..trials {
        let mut g = level1[rng.gen_range(0..level1.len())];
        let mut ok = true;
        for j in 1..m {
            let mut lifts = Vec::new();
            for code in 0..q4 {
                let mut h = g;
                let mut c = code;
                for slot in h.iter_mut() {
                    let digit = (c % p) * pj[j as usize];
                    c /= p;
                    *slot = (*slot as u64 + digit) as u16;
                }
                if holds(&h, j + 1) {
                    lifts.push(h);
                }
            }
            if lifts.is_empty() {
                ok = false;
                break;
            }
            g = lifts[rng.gen_range(0..lifts.len())];
        }
        if !ok {
            report.dead_ends += 1;
            continue;
        }
        report.solutions += 1;
        let lvl = m - 1;
        let diag_ok = reduce_to(g[1], lvl) == 0 && reduce_to(g[2], lvl) == 0;
        let det_ok = reduce_to(ring.mul(g[0], g[3]), lvl) == 1 % pj[lvl as usize] as u16;
        if !(diag_ok && det_ok) {
            report.non_torus += 1;
        }
    }
    Ok(report)
}

/// `g δ g^⊢` for the split orthogonal form over `O/𝔭^m`.
pub fn twisted_conj_res(ring: &ResidueRing, g: &ResMat, delta: &ResMat) -> ResMat {
    let gv = [g[3], g[1], g[2], g[0]];
    ring.mat_mul(&ring.mat_mul(g, delta), &gv)
}
