//! Torus volumes `w_k(g,h) = vol_T(T ∩ ϖ^{-k} g^{-1} L h^{-1})` and their
//! square-class sums `W_k`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::localfield::{Elem, LocalFieldCtx, SquareClassSet, Val};
use crate::matlattice::{delta, entries_ord, mat_ord, LatticeSpec, Mat};

/// A torus `T = A·T_c` with `A` the diagonal split torus
/// `diag(t_1, …, t_r, 1, …, 1, t_r^{-1}, …, t_1^{-1})`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TorusSpec {
    pub split_rank: usize,
    /// `T_c` is declared to stabilize `L`
    pub compact_stabilizes: bool,
}

impl TorusSpec {
    pub fn split(r: usize) -> Self {
        TorusSpec {
            split_rank: r,
            compact_stabilizes: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WeightQuery {
    pub g: Mat,
    pub h: Mat,
    pub k: i64,
    pub lattice: LatticeSpec,
    pub torus: TorusSpec,
}

impl WeightQuery {
    pub fn new(g: Mat, h: Mat, k: i64, torus: TorusSpec) -> Self {
        WeightQuery {
            g,
            h,
            k,
            lattice: LatticeSpec::standard(),
            torus,
        }
    }

    /// `h = 1` and `L = M_n(O)`.
    pub fn simple(ctx: &LocalFieldCtx, g: Mat, k: i64, r: usize) -> Self {
        let n = g.n();
        Self::new(g, Mat::identity(ctx, n), k, TorusSpec::split(r))
    }

    fn check(&self) -> Result<()> {
        let n = self.g.n();
        let r = self.torus.split_rank;
        if !self.torus.compact_stabilizes || r > n / 2 {
            return Err(Error::ClubsuitViolated(format!("split rank {r} in GL_{n}")));
        }
        Ok(())
    }
}

fn col_ord(ctx: &LocalFieldCtx, g: &Mat, j: usize) -> Result<i64> {
    entries_ord(ctx, &g.column(j))?.finite().ok_or(Error::Singular)
}

/// `∏_i (Δ_i(g) + 2k + 1)`, or 0 once some factor is nonpositive.
///
/// For `r < n/2` the middle columns are fixed by `A` and must already lie
/// in `ϖ^{-k}L`, otherwise the volume is 0.
pub fn w_k_closed(ctx: &LocalFieldCtx, q: &WeightQuery) -> Result<u64> {
    q.check()?;
    let n = q.g.n();
    if !q.h.eq(ctx, &Mat::identity(ctx, n)) {
        return Err(Error::DomainError("the closed form needs h = 1".into()));
    }
    let k = q.k + q.lattice.i;
    let r = q.torus.split_rank;
    for j in r..n - r {
        if col_ord(ctx, &q.g, j)? + k < 0 {
            return Ok(0);
        }
    }
    let mut prod = 1u64;
    for i in 1..=r {
        let f = delta(ctx, &q.g, i)? + 2 * k + 1;
        if f <= 0 {
            return Ok(0);
        }
        prod *= f as u64;
    }
    Ok(prod)
}

/// The split-torus element with valuation vector `a`.
pub fn torus_point(ctx: &LocalFieldCtx, n: usize, a: &[i64]) -> Mat {
    let mut d = vec![ctx.one(); n];
    for (i, &v) in a.iter().enumerate() {
        d[i] = ctx.pi_pow(v);
        d[n - 1 - i] = ctx.pi_pow(-v);
    }
    Mat::diag(ctx, &d)
}

/// Counts valuation vectors `a` with `ϖ^k g t_a h ∈ L` by direct membership.
///
/// The window `|a_i| ≤ B` comes from `ord(t) ≥ ord(g^{-1}) + ord(h^{-1}) - k - i`;
/// a solution on the ring just outside it raises `WindowOverflow`.
pub fn w_k_oracle(ctx: &LocalFieldCtx, q: &WeightQuery) -> Result<u64> {
    let n = q.g.n();
    let r = q.torus.split_rank;
    if r > n / 2 {
        return Err(Error::ClubsuitViolated(format!("split rank {r} in GL_{n}")));
    }
    let o = |m: &Mat| -> Result<i64> { mat_ord(ctx, m)?.finite().ok_or(Error::Singular) };
    let lo = o(&q.g.inv(ctx)?)? + o(&q.h.inv(ctx)?)? - q.k - q.lattice.i;
    if lo > 0 {
        return Ok(0);
    }
    let bound = -lo;
    if r == 0 {
        return Ok(member(ctx, q, &[])? as u64);
    }
    let outer = bound + 1;
    let firsts: Vec<i64> = (-outer..=outer).collect();
    let per: Vec<Result<(u64, bool)>> = firsts
        .par_iter()
        .map(|&a0| {
            let mut count = 0u64;
            let mut overflow = false;
            let mut a = vec![a0; r];
            let span = (2 * outer + 1) as usize;
            let total = span.pow((r - 1) as u32);
            for code in 0..total {
                let mut c = code;
                for slot in a.iter_mut().skip(1) {
                    *slot = (c % span) as i64 - outer;
                    c /= span;
                }
                if member(ctx, q, &a)? {
                    if a.iter().any(|v| v.abs() > bound) {
                        overflow = true;
                    } else {
                        count += 1;
                    }
                }
            }
            Ok((count, overflow))
        })
        .collect();
    let mut total = 0;
    for item in per {
        let (c, of) = item?;
        if of {
            return Err(Error::WindowOverflow(format!("solution beyond |a| ≤ {bound}")));
        }
        total += c;
    }
    Ok(total)
}

fn member(ctx: &LocalFieldCtx, q: &WeightQuery, a: &[i64]) -> Result<bool> {
    let t = torus_point(ctx, q.g.n(), a);
    let x = q
        .g
        .mul(ctx, &t)
        .mul(ctx, &q.h)
        .scale(ctx, &ctx.pi_pow(q.k));
    q.lattice.contains(ctx, &x)
}

/// `x_α = diag(α·I_m, I_m)`, `n = 2m`.
pub fn x_alpha(ctx: &LocalFieldCtx, alpha: &Elem, n: usize) -> Mat {
    let m = n / 2;
    let d: Vec<Elem> = (0..n).map(|i| if i < m { *alpha } else { ctx.one() }).collect();
    Mat::diag(ctx, &d)
}

/// A quadratic character given by its values `±1` on square-class indices.
#[derive(Clone, Debug, Serialize)]
pub struct QuadCharTable {
    pub values: Vec<i8>,
}

impl QuadCharTable {
    pub fn trivial(classes: &SquareClassSet) -> Self {
        QuadCharTable {
            values: vec![1; classes.count()],
        }
    }

    fn check(&self, classes: &SquareClassSet) -> Result<()> {
        if self.values.len() != classes.count() || self.values.iter().any(|v| v.abs() != 1) {
            return Err(Error::DomainError("ω must be ±1 on every square class".into()));
        }
        Ok(())
    }
}

/// `W_k` with the factor `|α|^{-ns}` kept symbolic: keys are `-ord(α)`,
/// i.e. twice the exponent of `u = q^{-2ns}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SymbolicWeight {
    pub terms: BTreeMap<i64, i64>,
}

impl SymbolicWeight {
    /// Value at `s = 0`.
    pub fn collapse(&self) -> i64 {
        self.terms.values().sum()
    }
}

/// `Σ_α ω(α)^{-1} |α|^{-ns} w_k(g x_α^{-1}, h)` term by term.
pub fn w_k_symbolic(
    ctx: &LocalFieldCtx,
    g: &Mat,
    h: &Mat,
    omega: &QuadCharTable,
    classes: &SquareClassSet,
    k: i64,
) -> Result<SymbolicWeight> {
    omega.check(classes)?;
    let n = g.n();
    let mut out = SymbolicWeight::default();
    for c in 0..classes.count() {
        let alpha = classes.rep(ctx, c);
        let xi = x_alpha(ctx, &ctx.inv(&alpha)?, n);
        let q = WeightQuery::new(g.mul(ctx, &xi), h.clone(), k, TorusSpec::split(n / 2));
        let w = if h.eq(ctx, &Mat::identity(ctx, n)) {
            w_k_closed(ctx, &q)?
        } else {
            w_k_oracle(ctx, &q)?
        };
        let v = match ctx.ord(&alpha)? {
            Val::Finite(v) => v,
            Val::Infinite => unreachable!("representatives are nonzero"),
        };
        *out.terms.entry(-v).or_insert(0) += omega.values[c] as i64 * w as i64;
    }
    Ok(out)
}

/// `W_k(g, h)` at `s = 0`.
pub fn w_k_total(
    ctx: &LocalFieldCtx,
    g: &Mat,
    h: &Mat,
    omega: &QuadCharTable,
    classes: &SquareClassSet,
    k: i64,
) -> Result<i64> {
    Ok(w_k_symbolic(ctx, g, h, omega, classes, k)?.collapse())
}

/// `W_k(n_b a_i)` for `GL_2` with `ω = 1`, `h = 1`:
/// `|O×/O×²|·(2Δ + 4k + 1)` when `Δ ≥ -2k`, smaller otherwise.
///
/// Evaluated from `Δ = Δ_1(g)` alone, which is all `W_k` depends on here.
pub fn w_k_gl2_from_delta(unit_classes: usize, delta1: i64, k: i64) -> i64 {
    let unit = (delta1 + 2 * k + 1).max(0);
    let pi = (delta1 + 2 * k).max(0);
    unit_classes as i64 * (unit + pi)
}
