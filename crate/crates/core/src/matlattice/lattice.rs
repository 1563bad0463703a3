use serde::Serialize;

use crate::error::{Error, Result};
use crate::localfield::{LocalFieldCtx, Val};

use super::{mat_ord, Mat};

/// The lattice `ϖ^{-i}·M_n(O)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeSpec {
    pub i: i64,
}

impl LatticeSpec {
    pub fn standard() -> Self {
        LatticeSpec { i: 0 }
    }

    pub fn ord(&self) -> i64 {
        -self.i
    }

    pub fn ord_star(&self) -> i64 {
        -self.i
    }

    pub fn contains(&self, ctx: &LocalFieldCtx, x: &Mat) -> Result<bool> {
        x.in_ideal(ctx, -self.i)
    }
}

fn elementary(ctx: &LocalFieldCtx, n: usize, a: usize, b: usize) -> Mat {
    let mut e = Mat::zeros(ctx, n);
    e.set(a, b, ctx.one());
    e
}

/// `ord(g L h)` from the images of the generators `ϖ^{-i}E_ab`.
pub fn image_ord(ctx: &LocalFieldCtx, g: &Mat, l: &LatticeSpec, h: &Mat) -> Result<i64> {
    let n = g.n();
    let mut best = Val::Infinite;
    for a in 0..n {
        for b in 0..n {
            let img = g.mul(ctx, &elementary(ctx, n, a, b)).mul(ctx, h);
            best = best.min(mat_ord(ctx, &img)?);
        }
    }
    best.finite().map(|v| v - l.i).ok_or(Error::Singular)
}

/// `ord_*(g L h) = min{j : ϖ^j M_n(O) ⊆ gLh}`.
pub fn image_ord_star(ctx: &LocalFieldCtx, g: &Mat, l: &LatticeSpec, h: &Mat) -> Result<i64> {
    let gi = g.inv(ctx)?;
    let hi = h.inv(ctx)?;
    // ϖ^j E_ab ∈ gLh  iff  ord(g^{-1} E_ab h^{-1}) + j ≥ -i
    let back = image_ord(ctx, &gi, &LatticeSpec::standard(), &hi)?;
    Ok(-l.i - back)
}

/// `||g|| = max{|g|, |det g|^{-1}}`, returned as the exponent of `q`.
pub fn gnorm(ctx: &LocalFieldCtx, g: &Mat) -> Result<i64> {
    let d = ctx.ord(&g.det(ctx))?.finite().ok_or(Error::Singular)?;
    let o = mat_ord(ctx, g)?.finite().ok_or(Error::Singular)?;
    Ok((-o).max(d))
}

/// `max{|g|, |g^{-1}|}` as the exponent of `q`.
pub fn gnorm_via_inverse(ctx: &LocalFieldCtx, g: &Mat) -> Result<i64> {
    let o = mat_ord(ctx, g)?.finite().ok_or(Error::Singular)?;
    let oi = mat_ord(ctx, &g.inv(ctx)?)?.finite().ok_or(Error::Singular)?;
    Ok((-o).max(-oi))
}
