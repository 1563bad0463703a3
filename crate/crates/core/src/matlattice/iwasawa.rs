use crate::error::{Error, Result};
use crate::localfield::{Elem, LocalFieldCtx, Val};

use super::{entries_ord, Mat};

/// A point `κ·n_b·a_e` of `GL_2(F)/T`.
#[derive(Clone, Debug)]
pub struct CosetRep {
    pub kappa: Mat,
    /// principal part of `b`; zero when `b ∈ O`
    pub b: Elem,
    pub e: i64,
}

impl CosetRep {
    pub fn n_b(ctx: &LocalFieldCtx, b: &Elem) -> Mat {
        Mat::m2(ctx.one(), *b, ctx.zero(), ctx.one())
    }

    pub fn a_e(ctx: &LocalFieldCtx, e: i64) -> Mat {
        Mat::diag(ctx, &[ctx.pi_pow(e), ctx.one()])
    }

    /// `n_b·a_e`.
    pub fn upper(&self, ctx: &LocalFieldCtx) -> Mat {
        Self::n_b(ctx, &self.b).mul(ctx, &Self::a_e(ctx, self.e))
    }

    pub fn matrix(&self, ctx: &LocalFieldCtx) -> Mat {
        self.kappa.mul(ctx, &self.upper(ctx))
    }

    pub fn format(&self, ctx: &LocalFieldCtx) -> String {
        format!(
            "(κ={}, b={}, e={})",
            self.kappa.format(ctx),
            ctx.format(&self.b),
            self.e
        )
    }
}

#[derive(Clone, Debug)]
pub struct Iwasawa {
    pub coset: CosetRep,
    /// `t = diag(α, α^{-1})`
    pub alpha: Elem,
}

impl Iwasawa {
    pub fn torus(&self, ctx: &LocalFieldCtx) -> Result<Mat> {
        Ok(Mat::diag(ctx, &[self.alpha, ctx.inv(&self.alpha)?]))
    }

    pub fn reconstruct(&self, ctx: &LocalFieldCtx) -> Result<Mat> {
        Ok(self.coset.matrix(ctx).mul(ctx, &self.torus(ctx)?))
    }
}

/// Writes `g = κ·n_b·a_e·t` with `κ ∈ GL_2(O)`, `b ∈ F/O`, `t = diag(α, α^{-1})`.
pub fn iwasawa(ctx: &LocalFieldCtx, g: &Mat) -> Result<Iwasawa> {
    if g.n() != 2 {
        return Err(Error::DomainError("Iwasawa coordinates are implemented for GL_2".into()));
    }
    let (g11, g12, g21, g22) = (*g.get(0, 0), *g.get(0, 1), *g.get(1, 0), *g.get(1, 1));
    let o11 = ord_or_inf(ctx, &g11)?;
    let o21 = ord_or_inf(ctx, &g21)?;
    if o11 == Val::Infinite && o21 == Val::Infinite {
        return Err(Error::Singular);
    }
    // κ^{-1} g upper triangular
    let (kappa, x, y, z) = if o21 <= o11 {
        let c = ctx.div(&g11, &g21)?;
        let kappa = Mat::m2(c, ctx.one(), ctx.one(), ctx.zero());
        let z = ctx.sub(&g12, &ctx.mul(&c, &g22));
        (kappa, g21, g22, z)
    } else {
        let c = ctx.div(&g21, &g11)?;
        let kappa = Mat::m2(ctx.one(), ctx.zero(), c, ctx.one());
        let z = ctx.sub(&g22, &ctx.mul(&c, &g12));
        (kappa, g11, g12, z)
    };
    let xz = ctx.mul(&x, &z);
    let e = ctx.ord(&xz)?.finite().ok_or(Error::Singular)?;
    let u = ctx.shift(&xz, -e);
    let alpha = ctx.inv(&z)?;
    let b = ctx.div(&y, &ctx.mul(&u, &z))?;
    let b_pp = ctx.principal_part(&b)?;
    let b_int = ctx.sub(&b, &b_pp);
    let kappa = kappa
        .mul(ctx, &Mat::diag(ctx, &[u, ctx.one()]))
        .mul(ctx, &CosetRep::n_b(ctx, &b_int));
    Ok(Iwasawa {
        coset: CosetRep {
            kappa,
            b: b_pp,
            e,
        },
        alpha,
    })
}

fn ord_or_inf(ctx: &LocalFieldCtx, x: &Elem) -> Result<Val> {
    if x.is_exact_zero() {
        Ok(Val::Infinite)
    } else {
        ctx.ord(x)
    }
}

/// `Δ_i(g) = ord(v_i) + ord(v_{n+1-i})` for columns `v_j`, `i` 1-based.
pub fn delta(ctx: &LocalFieldCtx, g: &Mat, i: usize) -> Result<i64> {
    let n = g.n();
    if i == 0 || i > n {
        return Err(Error::DomainError(format!("column index {i} out of range")));
    }
    let a = entries_ord(ctx, &g.column(i - 1))?;
    let b = entries_ord(ctx, &g.column(n - i))?;
    match (a, b) {
        (Val::Finite(a), Val::Finite(b)) => Ok(a + b),
        _ => Err(Error::Singular),
    }
}

/// `(Δ_1, …, Δ_r)`.
pub fn delta_vector(ctx: &LocalFieldCtx, g: &Mat, r: usize) -> Result<Vec<i64>> {
    (1..=r).map(|i| delta(ctx, g, i)).collect()
}
