//! Matrices over `F`, their valuations, and the lattices `ϖ^{-i}M_n(O)`.

mod forms;
mod iwasawa;
mod lattice;

pub use forms::{eps, n_of, nu, solve_y, vdash, BlockUnipotent, FormKind, GroupForm};
pub use iwasawa::{delta, delta_vector, iwasawa, CosetRep, Iwasawa};
pub use lattice::{gnorm, gnorm_via_inverse, image_ord, image_ord_star, LatticeSpec};

use rand::Rng;

use crate::error::{Error, Result};
use crate::localfield::{Elem, LocalFieldCtx, Val};

#[derive(Clone, Debug)]
pub struct Mat {
    n: usize,
    a: Vec<Elem>,
}

impl Mat {
    pub fn from_vec(n: usize, a: Vec<Elem>) -> Self {
        assert_eq!(a.len(), n * n);
        Mat { n, a }
    }

    pub fn zeros(ctx: &LocalFieldCtx, n: usize) -> Self {
        Mat {
            n,
            a: vec![ctx.zero(); n * n],
        }
    }

    pub fn identity(ctx: &LocalFieldCtx, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n);
        for i in 0..n {
            m.a[i * n + i] = ctx.one();
        }
        m
    }

    pub fn diag(ctx: &LocalFieldCtx, d: &[Elem]) -> Self {
        let mut m = Self::zeros(ctx, d.len());
        for (i, x) in d.iter().enumerate() {
            m.a[i * d.len() + i] = *x;
        }
        m
    }

    pub fn from_ints(ctx: &LocalFieldCtx, n: usize, v: &[i64]) -> Self {
        Mat::from_vec(n, v.iter().map(|&x| ctx.from_int(x)).collect())
    }

    /// `[[a, b], [c, d]]`.
    pub fn m2(a: Elem, b: Elem, c: Elem, d: Elem) -> Self {
        Mat::from_vec(2, vec![a, b, c, d])
    }

    /// Antidiagonal matrix of ones.
    pub fn antidiag(ctx: &LocalFieldCtx, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n);
        for i in 0..n {
            m.a[i * n + (n - 1 - i)] = ctx.one();
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Elem {
        &self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: Elem) {
        self.a[i * self.n + j] = x;
    }

    pub fn entries(&self) -> &[Elem] {
        &self.a
    }

    pub fn transpose(&self) -> Mat {
        let n = self.n;
        let mut a = self.a.clone();
        for i in 0..n {
            for j in 0..n {
                a[j * n + i] = self.a[i * n + j];
            }
        }
        Mat { n, a }
    }

    pub fn column(&self, j: usize) -> Vec<Elem> {
        (0..self.n).map(|i| self.a[i * self.n + j]).collect()
    }

    pub fn add(&self, ctx: &LocalFieldCtx, o: &Mat) -> Mat {
        let a = self.a.iter().zip(&o.a).map(|(x, y)| ctx.add(x, y)).collect();
        Mat { n: self.n, a }
    }

    pub fn sub(&self, ctx: &LocalFieldCtx, o: &Mat) -> Mat {
        let a = self.a.iter().zip(&o.a).map(|(x, y)| ctx.sub(x, y)).collect();
        Mat { n: self.n, a }
    }

    pub fn neg(&self, ctx: &LocalFieldCtx) -> Mat {
        Mat {
            n: self.n,
            a: self.a.iter().map(|x| ctx.neg(x)).collect(),
        }
    }

    pub fn scale(&self, ctx: &LocalFieldCtx, c: &Elem) -> Mat {
        Mat {
            n: self.n,
            a: self.a.iter().map(|x| ctx.mul(c, x)).collect(),
        }
    }

    pub fn mul(&self, ctx: &LocalFieldCtx, o: &Mat) -> Mat {
        assert_eq!(self.n, o.n);
        let n = self.n;
        let mut a = vec![ctx.zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let x = &self.a[i * n + k];
                if x.is_exact_zero() {
                    continue;
                }
                for j in 0..n {
                    let t = ctx.mul(x, &o.a[k * n + j]);
                    a[i * n + j] = ctx.add(&a[i * n + j], &t);
                }
            }
        }
        Mat { n, a }
    }

    /// Agreement on all known digits.
    pub fn eq(&self, ctx: &LocalFieldCtx, o: &Mat) -> bool {
        self.n == o.n && self.a.iter().zip(&o.a).all(|(x, y)| ctx.eq(x, y))
    }

    pub fn is_integral(&self, ctx: &LocalFieldCtx) -> Result<bool> {
        for x in &self.a {
            if !ctx.in_ideal(x, 0)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Entrywise membership in `𝔭^m`.
    pub fn in_ideal(&self, ctx: &LocalFieldCtx, m: i64) -> Result<bool> {
        for x in &self.a {
            if !ctx.in_ideal(x, m)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Characteristic polynomial `det(xI - A)`, leading coefficient first.
    ///
    /// Berkowitz' algorithm; no divisions, so it is exact on any input.
    pub fn charpoly(&self, ctx: &LocalFieldCtx) -> Vec<Elem> {
        let n = self.n;
        let mut poly = vec![ctx.one()];
        for r in 0..n {
            let a = self.get(r, r);
            let mut q = vec![ctx.one(), ctx.neg(a)];
            // v = S^k·C for growing k, S the leading r×r block
            let mut v: Vec<Elem> = (0..r).map(|i| *self.get(i, r)).collect();
            for _ in 0..r {
                let mut rv = ctx.zero();
                for (j, vj) in v.iter().enumerate() {
                    rv = ctx.add(&rv, &ctx.mul(self.get(r, j), vj));
                }
                q.push(ctx.neg(&rv));
                let mut nv = vec![ctx.zero(); r];
                for (i, slot) in nv.iter_mut().enumerate() {
                    for (j, vj) in v.iter().enumerate() {
                        *slot = ctx.add(slot, &ctx.mul(self.get(i, j), vj));
                    }
                }
                v = nv;
            }
            let mut next = vec![ctx.zero(); r + 2];
            for (i, slot) in next.iter_mut().enumerate() {
                for j in 0..=r.min(i) {
                    if i - j < q.len() {
                        *slot = ctx.add(slot, &ctx.mul(&q[i - j], &poly[j]));
                    }
                }
            }
            poly = next;
        }
        poly
    }

    pub fn det(&self, ctx: &LocalFieldCtx) -> Elem {
        let cp = self.charpoly(ctx);
        let c = cp[self.n];
        if self.n % 2 == 1 {
            ctx.neg(&c)
        } else {
            c
        }
    }

    pub fn trace(&self, ctx: &LocalFieldCtx) -> Elem {
        (0..self.n).fold(ctx.zero(), |acc, i| ctx.add(&acc, self.get(i, i)))
    }

    /// Gauss-Jordan with pivots of minimal valuation.
    pub fn inv(&self, ctx: &LocalFieldCtx) -> Result<Mat> {
        let n = self.n;
        let mut a = self.clone();
        let mut b = Mat::identity(ctx, n);
        for col in 0..n {
            let mut best: Option<(usize, i64)> = None;
            let mut undetermined = false;
            for r in col..n {
                let x = a.get(r, col);
                if x.is_exact_zero() {
                    continue;
                }
                match ctx.ord(x) {
                    Ok(Val::Finite(v)) => {
                        if best.is_none_or(|(_, bv)| v < bv) {
                            best = Some((r, v));
                        }
                    }
                    _ => undetermined = true,
                }
            }
            let (piv, _) = match best {
                Some(b) => b,
                None if undetermined => {
                    return Err(Error::PrecisionExhausted("pivot below working precision"))
                }
                None => return Err(Error::Singular),
            };
            a.swap_rows(piv, col);
            b.swap_rows(piv, col);
            let pinv = ctx.inv(a.get(col, col))?;
            a.scale_row(ctx, col, &pinv);
            b.scale_row(ctx, col, &pinv);
            for r in 0..n {
                if r == col || a.get(r, col).is_exact_zero() {
                    continue;
                }
                let f = *a.get(r, col);
                a.axpy_row(ctx, r, col, &f);
                b.axpy_row(ctx, r, col, &f);
            }
        }
        Ok(b)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.n {
            self.a.swap(i * self.n + c, j * self.n + c);
        }
    }

    fn scale_row(&mut self, ctx: &LocalFieldCtx, i: usize, f: &Elem) {
        for c in 0..self.n {
            self.a[i * self.n + c] = ctx.mul(&self.a[i * self.n + c], f);
        }
    }

    // row_i -= f·row_j
    fn axpy_row(&mut self, ctx: &LocalFieldCtx, i: usize, j: usize, f: &Elem) {
        for c in 0..self.n {
            let t = ctx.mul(f, &self.a[j * self.n + c]);
            self.a[i * self.n + c] = ctx.sub(&self.a[i * self.n + c], &t);
        }
    }

    pub fn format(&self, ctx: &LocalFieldCtx) -> String {
        let rows: Vec<String> = (0..self.n)
            .map(|i| {
                let r: Vec<String> = (0..self.n).map(|j| ctx.format(self.get(i, j))).collect();
                format!("[{}]", r.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }

    /// Random matrix with entries of valuation in `[vmin, vmax]`, invertible.
    pub fn random_invertible<R: Rng + ?Sized>(
        ctx: &LocalFieldCtx,
        rng: &mut R,
        n: usize,
        vmin: i64,
        vmax: i64,
    ) -> Mat {
        loop {
            let a: Vec<Elem> = (0..n * n).map(|_| ctx.random_elem(rng, vmin, vmax)).collect();
            let m = Mat::from_vec(n, a);
            if let Ok(Val::Finite(_)) = ctx.ord(&m.det(ctx)) {
                return m;
            }
        }
    }

    /// Random element of `GL_n(O)`.
    pub fn random_gl_o<R: Rng + ?Sized>(ctx: &LocalFieldCtx, rng: &mut R, n: usize) -> Mat {
        loop {
            let m = Mat::random_invertible(ctx, rng, n, 0, 3);
            if ctx.is_unit(&m.det(ctx)).unwrap_or(false) {
                return m;
            }
        }
    }
}

/// `min_ij ord(X_ij)`.
pub fn mat_ord(ctx: &LocalFieldCtx, x: &Mat) -> Result<Val> {
    entries_ord(ctx, x.entries())
}

pub(crate) fn entries_ord(ctx: &LocalFieldCtx, xs: &[Elem]) -> Result<Val> {
    let mut best = Val::Infinite;
    let mut floor: Option<i64> = None;
    for x in xs {
        if x.is_exact_zero() {
            continue;
        }
        match ctx.ord(x) {
            Ok(v) => best = best.min(v),
            Err(_) => {
                let k = x.abs_prec().expect("not exact zero");
                floor = Some(floor.map_or(k, |f: i64| f.min(k)));
            }
        }
    }
    match (floor, best) {
        (None, b) => Ok(b),
        (Some(k), Val::Finite(v)) if k >= v => Ok(best),
        _ => Err(Error::PrecisionExhausted("matrix valuation undetermined")),
    }
}
