use serde::Serialize;

use crate::error::{Error, Result};
use crate::localfield::{Elem, LocalFieldCtx};

use super::Mat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FormKind {
    Orthogonal,
    Symplectic,
}

#[derive(Clone, Debug)]
pub struct GroupForm {
    pub kind: FormKind,
    pub n: usize,
    pub j: Mat,
    pub w: Mat,
}

impl GroupForm {
    /// Orthogonal form: block antidiagonal `(w_i, Λ, w_i)` with `n = 2i + 2`.
    pub fn orthogonal(ctx: &LocalFieldCtx, n: usize, lambda: &Mat) -> Result<Self> {
        if n < 2 || n % 2 != 0 || lambda.n() != 2 {
            return Err(Error::DomainError("orthogonal form needs even n and 2×2 Λ".into()));
        }
        if !lambda.get(0, 1).is_zero() || !lambda.get(1, 0).is_zero() {
            if !ctx.eq(lambda.get(0, 1), lambda.get(1, 0)) {
                return Err(Error::DomainError("Λ must be symmetric".into()));
            }
        }
        if lambda.det(ctx).is_zero() {
            return Err(Error::Singular);
        }
        let i = (n - 2) / 2;
        let mut j = Mat::zeros(ctx, n);
        for r in 0..i {
            j.set(r, n - 1 - r, ctx.one());
            j.set(n - 1 - r, r, ctx.one());
        }
        for a in 0..2 {
            for b in 0..2 {
                j.set(i + a, i + b, *lambda.get(a, b));
            }
        }
        Ok(GroupForm {
            kind: FormKind::Orthogonal,
            n,
            j,
            w: Mat::antidiag(ctx, n),
        })
    }

    /// The split form `J = w_n`.
    pub fn split_orthogonal(ctx: &LocalFieldCtx, n: usize) -> Self {
        Self::orthogonal(ctx, n, &Mat::antidiag(ctx, 2)).expect("w_2 is a valid Λ")
    }

    /// `u_n`, antidiagonal with entry `(n+1-j, j) = (-1)^j`.
    pub fn symplectic(ctx: &LocalFieldCtx, n: usize) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(Error::DomainError("symplectic form needs even n".into()));
        }
        let mut u = Mat::zeros(ctx, n);
        for j in 1..=n {
            let s = if j % 2 == 0 { 1 } else { -1 };
            u.set(n - j, j - 1, ctx.from_int(s));
        }
        Ok(GroupForm {
            kind: FormKind::Symplectic,
            n,
            j: u,
            w: Mat::antidiag(ctx, n),
        })
    }
}

/// `g^⊢`: `w ᵗg w^{-1}` (orthogonal) or `u ᵗg u^{-1}` (symplectic).
///
/// Both conjugators are signed permutation matrices, so this only moves
/// entries and flips signs.
pub fn vdash(ctx: &LocalFieldCtx, g: &Mat, form: &GroupForm) -> Mat {
    let n = g.n();
    assert_eq!(n, form.n);
    let mut out = Mat::zeros(ctx, n);
    for i in 0..n {
        for j in 0..n {
            let x = *g.get(n - 1 - j, n - 1 - i);
            let x = match form.kind {
                FormKind::Orthogonal => x,
                FormKind::Symplectic => {
                    // u_{i,n-1-i} = s(i), u^{-1} = -u for u² = -1
                    let s = sign_u(n, i) * sign_u(n, j);
                    if s < 0 {
                        ctx.neg(&x)
                    } else {
                        x
                    }
                }
            };
            out.set(i, j, x);
        }
    }
    out
}

// sign of u_n in row i (0-based)
fn sign_u(n: usize, i: usize) -> i32 {
    // entry (n+1-j, j) = (-1)^j, so row i has column j = n - i (1-based)
    let j = n - i;
    if j % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `ε(g) = (g^{-1})^⊢`.
pub fn eps(ctx: &LocalFieldCtx, g: &Mat, form: &GroupForm) -> Result<Mat> {
    Ok(vdash(ctx, &g.inv(ctx)?, form))
}

/// `ν(g) = ε(g)·g`.
pub fn nu(ctx: &LocalFieldCtx, g: &Mat, form: &GroupForm) -> Result<Mat> {
    Ok(eps(ctx, g, form)?.mul(ctx, g))
}

/// A validated unipotent `n(X, Y)`.
#[derive(Clone, Debug)]
pub struct BlockUnipotent {
    pub x: Mat,
    pub x_prime: Mat,
    pub y: Mat,
    pub full: Mat,
}

/// `X' = -J ᵗX w` (orthogonal) or `-u ᵗX u^{-1}` (symplectic), the rule that
/// makes `X X'` fixed by `⊢`.
fn x_prime(ctx: &LocalFieldCtx, x: &Mat, form: &GroupForm) -> Mat {
    match form.kind {
        FormKind::Orthogonal => form.j.mul(ctx, &x.transpose()).mul(ctx, &form.w).neg(ctx),
        FormKind::Symplectic => vdash(ctx, x, form).neg(ctx),
    }
}

/// Builds `n(X, Y)` after checking `Y + Y^⊢ = X X'`.
pub fn n_of(ctx: &LocalFieldCtx, x: &Mat, y: &Mat, form: &GroupForm) -> Result<BlockUnipotent> {
    let n = form.n;
    let xp = x_prime(ctx, x, form);
    let lhs = y.add(ctx, &vdash(ctx, y, form));
    let rhs = x.mul(ctx, &xp);
    let residual = lhs.sub(ctx, &rhs);
    if !residual.entries().iter().all(Elem::is_zero) {
        return Err(Error::RelationViolated(residual.format(ctx)));
    }
    let mut full = Mat::identity(ctx, 3 * n);
    for i in 0..n {
        for j in 0..n {
            full.set(i, n + j, *x.get(i, j));
            full.set(i, 2 * n + j, *y.get(i, j));
            full.set(n + i, 2 * n + j, *xp.get(i, j));
        }
    }
    Ok(BlockUnipotent {
        x: x.clone(),
        x_prime: xp,
        y: y.clone(),
        full,
    })
}

/// Solves `Y + Y^⊢ = X X'` for `Y`.
///
/// `⊢` permutes entries along orbits of size 1 or 2 (up to sign); one entry
/// of each 2-orbit carries `Z` and the other is 0, fixed entries get `Z/2`.
pub fn solve_y(ctx: &LocalFieldCtx, x: &Mat, form: &GroupForm) -> Result<Mat> {
    let n = form.n;
    let z = x.mul(ctx, &x_prime(ctx, x, form));
    let mut y = Mat::zeros(ctx, n);
    let half = ctx.inv(&ctx.from_int(2))?;
    for i in 0..n {
        for j in 0..n {
            let (pi, pj) = (n - 1 - j, n - 1 - i);
            if (pi, pj) == (i, j) {
                let mut probe = Mat::zeros(ctx, n);
                probe.set(i, j, ctx.one());
                let s = vdash(ctx, &probe, form);
                if ctx.eq(s.get(i, j), &ctx.one()) {
                    y.set(i, j, ctx.mul(z.get(i, j), &half));
                } else if !z.get(i, j).is_zero() {
                    return Err(Error::RelationViolated(z.format(ctx)));
                }
            } else if (i, j) < (pi, pj) {
                y.set(i, j, *z.get(i, j));
            }
        }
    }
    Ok(y)
}
