use crate::error::{Error, Result};

use super::{Elem, LocalFieldCtx};

/// `O/𝔭^m` with full addition and multiplication tables.
///
/// Elements are indices `Σ d_j p^j` built from the `ϖ`-adic digits, so the
/// lowest base-`p` digit of an index is its residue in `F_p`.
#[derive(Clone, Debug)]
pub struct ResidueRing {
    p: u64,
    m: u32,
    size: usize,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

/// 2×2 matrix over `O/𝔭^m`, row-major.
pub type ResMat = [u16; 4];

const MAX_SIZE: usize = 1024;

impl ResidueRing {
    pub fn new(ctx: &LocalFieldCtx, m: u32) -> Result<Self> {
        let p = ctx.p();
        let size = (p as usize)
            .checked_pow(m)
            .filter(|&s| s <= MAX_SIZE)
            .ok_or_else(|| Error::DomainError(format!("residue ring O/p^{m} too large")))?;
        let elems: Vec<Elem> = (0..size).map(|i| ctx.from_index(i as u64, m)).collect();
        let idx = |x: &Elem| ctx.index_mod(x, m).map(|v| v as u16);
        let mut add = vec![0u16; size * size];
        let mut mul = vec![0u16; size * size];
        for i in 0..size {
            for j in i..size {
                let s = idx(&ctx.add(&elems[i], &elems[j]))?;
                let t = idx(&ctx.mul(&elems[i], &elems[j]))?;
                add[i * size + j] = s;
                add[j * size + i] = s;
                mul[i * size + j] = t;
                mul[j * size + i] = t;
            }
        }
        let mut neg = vec![0u16; size];
        let mut inv = vec![u16::MAX; size];
        for i in 0..size {
            for j in 0..size {
                if add[i * size + j] == 0 {
                    neg[i] = j as u16;
                }
                if mul[i * size + j] == 1 {
                    inv[i] = j as u16;
                }
            }
        }
        Ok(ResidueRing {
            p,
            m,
            size,
            add,
            mul,
            neg,
            inv,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }
    pub fn depth(&self) -> u32 {
        self.m
    }
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        self.add[a as usize * self.size + b as usize]
    }
    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.size + b as usize]
    }
    #[inline]
    pub fn neg(&self, a: u16) -> u16 {
        self.neg[a as usize]
    }
    #[inline]
    pub fn sub(&self, a: u16, b: u16) -> u16 {
        self.add(a, self.neg(b))
    }
    /// Inverse of a unit; `None` on non-units.
    pub fn inv(&self, a: u16) -> Option<u16> {
        let v = self.inv[a as usize];
        (v != u16::MAX).then_some(v)
    }

    /// `j`-th `ϖ`-adic digit.
    #[inline]
    pub fn digit(&self, a: u16, j: u32) -> u64 {
        (a as u64 / self.p.pow(j)) % self.p
    }

    pub fn is_unit(&self, a: u16) -> bool {
        self.digit(a, 0) != 0
    }

    /// Valuation of `a`, `m` for zero.
    pub fn ord(&self, a: u16) -> u32 {
        (0..self.m).find(|&j| self.digit(a, j) != 0).unwrap_or(self.m)
    }

    /// Reduction of `p`-adic digit `d` viewed as an element.
    pub fn from_small(&self, d: u64) -> u16 {
        (d % self.p) as u16
    }

    pub fn mat_mul(&self, a: &ResMat, b: &ResMat) -> ResMat {
        let dot = |x0: u16, y0: u16, x1: u16, y1: u16| self.add(self.mul(x0, y0), self.mul(x1, y1));
        [
            dot(a[0], b[0], a[1], b[2]),
            dot(a[0], b[1], a[1], b[3]),
            dot(a[2], b[0], a[3], b[2]),
            dot(a[2], b[1], a[3], b[3]),
        ]
    }

    pub fn det(&self, a: &ResMat) -> u16 {
        self.sub(self.mul(a[0], a[3]), self.mul(a[1], a[2]))
    }

    /// All of `GL_2(O/𝔭^m)` in lexicographic order.
    pub fn gl2(&self) -> Vec<ResMat> {
        let s = self.size as u16;
        let mut out = Vec::new();
        for a in 0..s {
            for b in 0..s {
                for c in 0..s {
                    for d in 0..s {
                        let g = [a, b, c, d];
                        if self.is_unit(self.det(&g)) {
                            out.push(g);
                        }
                    }
                }
            }
        }
        out
    }

    /// Reduction of an integral element.
    pub fn reduce(&self, ctx: &LocalFieldCtx, x: &Elem) -> Result<u16> {
        Ok(ctx.index_mod(x, self.m)? as u16)
    }

    pub fn lift(&self, ctx: &LocalFieldCtx, a: u16) -> Elem {
        ctx.from_index(a as u64, self.m)
    }
}
