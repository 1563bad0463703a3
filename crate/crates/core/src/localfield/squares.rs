use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};

use super::{Elem, LocalFieldCtx};

/// Representatives of `F×/F×²` and `O×/O×²`.
///
/// Unit classes are decided modulo `ϖ^level` with `level = 2·ord(2) + 1`,
/// where a unit is a square iff it is a square modulo that level.
#[derive(Clone, Debug, Serialize)]
pub struct SquareClassSet {
    pub level: u32,
    /// indices mod `ϖ^level` of the unit representatives
    pub unit_rep_indices: Vec<u64>,
    #[serde(skip)]
    pub unit_reps: Vec<Elem>,
    /// `(unit rep position, ϖ-parity)` for every class of `F×/F×²`
    pub reps: Vec<(usize, u32)>,
    #[serde(skip)]
    square_units: BTreeSet<u64>,
    #[serde(skip)]
    p: u64,
}

impl SquareClassSet {
    pub fn unit_count(&self) -> usize {
        self.unit_reps.len()
    }

    pub fn count(&self) -> usize {
        self.reps.len()
    }

    /// The representative element of class `i`.
    pub fn rep(&self, ctx: &LocalFieldCtx, i: usize) -> Elem {
        let (u, par) = self.reps[i];
        ctx.shift(&self.unit_reps[u], par as i64)
    }

    /// Class index of a nonzero element.
    pub fn class_of(&self, ctx: &LocalFieldCtx, x: &Elem) -> Result<usize> {
        let v = ctx
            .ord(x)?
            .finite()
            .ok_or_else(|| Error::DomainError("square class of zero".into()))?;
        let par = v.rem_euclid(2) as u32;
        let unit = ctx.shift(x, -v);
        for (pos, r) in self.unit_reps.iter().enumerate() {
            let t = ctx.div(&unit, r)?;
            if self.square_units.contains(&ctx.index_mod(&t, self.level)?) {
                let cls = self
                    .reps
                    .iter()
                    .position(|&(u, pp)| u == pos && pp == par)
                    .expect("all parities present");
                return Ok(cls);
            }
        }
        unreachable!("unit classes are exhaustive")
    }

    pub fn is_square(&self, ctx: &LocalFieldCtx, x: &Elem) -> Result<bool> {
        Ok(self.class_of(ctx, x)? == 0)
    }

    pub fn p(&self) -> u64 {
        self.p
    }
}

/// Enumerates units modulo `ϖ^level` and splits them by the squaring image.
pub fn square_class_reps(ctx: &LocalFieldCtx) -> Result<SquareClassSet> {
    let level = 2 * ctx.ord_two() + 1;
    let p = ctx.p();
    let size = p.pow(level);
    let units: Vec<u64> = (0..size).filter(|i| i % p != 0).collect();
    let mut squares = BTreeSet::new();
    for &u in &units {
        let x = ctx.from_index(u, level);
        squares.insert(ctx.index_mod(&ctx.mul(&x, &x), level)?);
    }
    let mut covered = BTreeSet::new();
    let mut rep_idx = Vec::new();
    for &u in &units {
        if covered.contains(&u) {
            continue;
        }
        rep_idx.push(u);
        let x = ctx.from_index(u, level);
        for &s in &squares {
            let y = ctx.mul(&x, &ctx.from_index(s, level));
            covered.insert(ctx.index_mod(&y, level)?);
        }
    }
    let unit_reps: Vec<Elem> = rep_idx.iter().map(|&i| ctx.from_index(i, level)).collect();
    let mut reps = Vec::new();
    for par in 0..2 {
        for u in 0..unit_reps.len() {
            reps.push((u, par));
        }
    }
    Ok(SquareClassSet {
        level,
        unit_rep_indices: rep_idx,
        unit_reps,
        reps,
        square_units: squares,
        p,
    })
}

impl LocalFieldCtx {
    pub fn square_class_reps(&self) -> Result<SquareClassSet> {
        square_class_reps(self)
    }
}
