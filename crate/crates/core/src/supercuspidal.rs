//! The test function `f_G = ψ·1_C` built from `E = F(√ϖ)` and the level-`I_1`
//! character `λ(g) = Λ_1(tr(ϖ_E^{-1}(g-1)))`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::character::CharacterValue;
use crate::error::{Error, Result};
use crate::localfield::{Elem, LocalFieldCtx, ResMat, ResidueRing, Val};
use crate::matlattice::{vdash, GroupForm, Mat};
use crate::twisted::{s_of, TorusElem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SubgroupLevel {
    K,
    I0,
    I1,
    I2,
    C0,
    C,
}

/// `ϖ_E ↦ [[0,1],[ϖ,0]]` inside `M_2(F)` with inducing subgroup `I_1`.
#[derive(Clone, Debug)]
pub struct KutzkoDatum {
    pub ctx: LocalFieldCtx,
    pub pi_e: Mat,
    pub pi_e_inv: Mat,
    pub form: GroupForm,
}

impl KutzkoDatum {
    pub fn new(ctx: &LocalFieldCtx) -> Result<Self> {
        if ctx.p() == 2 && ctx.e() < 2 {
            return Err(Error::DomainError("p = 2 needs 2 ∈ 𝔭², i.e. e ≥ 2".into()));
        }
        Ok(Self::new_unchecked(ctx))
    }

    /// Same construction without the `2 ∈ 𝔭²` check, for the diagnostics
    /// that show why it is needed.
    pub fn new_unchecked(ctx: &LocalFieldCtx) -> Self {
        let pi_e = Mat::m2(ctx.zero(), ctx.one(), ctx.pi(), ctx.zero());
        let pi_e_inv = Mat::m2(ctx.zero(), ctx.pi_pow(-1), ctx.one(), ctx.zero());
        KutzkoDatum {
            ctx: ctx.clone(),
            pi_e,
            pi_e_inv,
            form: GroupForm::split_orthogonal(ctx, 2),
        }
    }

    fn p(&self) -> u64 {
        self.ctx.p()
    }

    fn in_p(&self, x: &Elem, m: i64) -> Result<bool> {
        self.ctx.in_ideal(x, m)
    }

    fn minus_one(&self, x: &Elem) -> Elem {
        self.ctx.sub(x, &self.ctx.one())
    }

    pub fn member(&self, g: &Mat, level: SubgroupLevel) -> Result<bool> {
        let k = &self.ctx;
        if g.n() != 2 {
            return Err(Error::DomainError("membership is for 2×2 matrices".into()));
        }
        let (a, b, c, d) = (g.get(0, 0), g.get(0, 1), g.get(1, 0), g.get(1, 1));
        let in_k = g.is_integral(k)? && k.is_unit(&g.det(k))?;
        Ok(match level {
            SubgroupLevel::K => in_k,
            SubgroupLevel::I0 => in_k && self.in_p(c, 1)?,
            SubgroupLevel::I1 => {
                in_k && self.in_p(c, 1)?
                    && self.in_p(&self.minus_one(a), 1)?
                    && self.in_p(&self.minus_one(d), 1)?
            }
            SubgroupLevel::I2 => {
                in_k && self.in_p(b, 1)?
                    && self.in_p(c, 2)?
                    && self.in_p(&self.minus_one(a), 2)?
                    && self.in_p(&self.minus_one(d), 2)?
            }
            SubgroupLevel::C0 => self.c0_residue(g)?.is_some(),
            SubgroupLevel::C => {
                self.c0_residue(g)?.is_some()
                    || self.c0_residue(&self.pi_e_inv.mul(k, g))?.is_some()
            }
        })
    }

    /// For `g ∈ C_0 = O_E^×·I_1`: the residue `r` with `r^{-1}g ∈ I_1`.
    fn c0_residue(&self, g: &Mat) -> Result<Option<u64>> {
        let k = &self.ctx;
        if !g.is_integral(k)? || !self.in_p(g.get(1, 0), 1)? {
            return Ok(None);
        }
        let r = k.residue(g.get(0, 0))?;
        if r == 0 || k.residue(g.get(1, 1))? != r {
            return Ok(None);
        }
        Ok(Some(r))
    }

    /// `λ(h) = Λ_1(h_21/ϖ + h_12)` on `I_1`, as an exponent of `ζ_p`.
    pub fn lambda_exp(&self, h: &Mat) -> Result<u64> {
        if !self.member(h, SubgroupLevel::I1)? {
            return Err(Error::DomainError("λ is defined on I_1".into()));
        }
        let k = &self.ctx;
        let t = k.add(&k.shift(h.get(1, 0), -1), h.get(0, 1));
        k.additive_char_exp(&t)
    }

    pub fn lambda_char(&self, h: &Mat) -> Result<CharacterValue> {
        Ok(CharacterValue::root(self.p(), self.lambda_exp(h)?))
    }

    /// `g = ϖ_E^j·r·h` with `h ∈ I_1`, `r` a Teichmüller-free lift of the residue.
    ///
    /// Returns `(j, r, h)` or `None` when `g ∉ E^×I_1`.
    pub fn factor(&self, g: &Mat) -> Result<Option<(i64, u64, Mat)>> {
        let k = &self.ctx;
        let det = g.det(k);
        let j = match k.ord(&det)? {
            Val::Finite(j) => j,
            Val::Infinite => return Ok(None),
        };
        // ϖ_E^{-j} = ϖ^{-j/2} or ϖ^{-(j+1)/2}·ϖ_E
        let half = j.div_euclid(2);
        let mut gp = g.scale(k, &k.pi_pow(-half));
        if j.rem_euclid(2) == 1 {
            gp = self.pi_e_inv.mul(k, &gp);
        }
        let Some(r) = self.c0_residue(&gp)? else {
            return Ok(None);
        };
        let rinv = k.inv(&k.from_int(r as i64))?;
        Ok(Some((j, r, gp.scale(k, &rinv))))
    }

    /// `ψ` as a `ζ_p`-exponent, `None` off `G′ = E^×I_1`.
    ///
    /// The extension is trivial on `F^×` and on `ϖ_E`.
    pub fn psi_exp(&self, g: &Mat) -> Result<Option<u64>> {
        match self.factor(g)? {
            None => Ok(None),
            Some((_, _, h)) => Ok(Some(self.lambda_exp(&h)?)),
        }
    }

    pub fn psi(&self, g: &Mat) -> Result<CharacterValue> {
        Ok(match self.psi_exp(g)? {
            None => CharacterValue::zero(self.p()),
            Some(e) => CharacterValue::root(self.p(), e),
        })
    }

    /// `f_G = ψ·1_C`, with `C = C_0 ∪ ϖ_E C_0` cut out by `ord det ∈ {0, 1}`.
    pub fn f_g_exp(&self, g: &Mat) -> Result<Option<u64>> {
        let k = &self.ctx;
        match k.ord(&g.det(k))? {
            Val::Finite(0) | Val::Finite(1) => self.psi_exp(g),
            _ => Ok(None),
        }
    }

    pub fn f_g(&self, g: &Mat) -> Result<CharacterValue> {
        Ok(match self.f_g_exp(g)? {
            None => CharacterValue::zero(self.p()),
            Some(e) => CharacterValue::root(self.p(), e),
        })
    }

    /// `f_0 = ψ·1_{C_0}` and `f_1 = ψ·1_{ϖ_E C_0}`.
    pub fn f_split(&self, g: &Mat) -> Result<(CharacterValue, CharacterValue)> {
        let k = &self.ctx;
        let zero = CharacterValue::zero(self.p());
        Ok(match k.ord(&g.det(k))? {
            Val::Finite(0) => (self.f_g(g)?, zero),
            Val::Finite(1) => (zero, self.f_g(g)?),
            _ => (zero.clone(), zero),
        })
    }

    /// `f_G` on integral matrices through their class in `M_2(O/𝔭²)`.
    pub fn residue_fn(&self) -> Result<ResidueTestFn> {
        ResidueTestFn::new(&self.ctx)
    }
}

/// `f_G` restricted to `M_2(O)`, which factors through `M_2(O/𝔭²)`.
#[derive(Clone, Debug)]
pub struct ResidueTestFn {
    pub ring: ResidueRing,
    p: u64,
    inv_p: Vec<u64>,
}

impl ResidueTestFn {
    pub fn new(ctx: &LocalFieldCtx) -> Result<Self> {
        let p = ctx.p();
        let mut inv_p = vec![0u64; p as usize];
        for a in 1..p {
            inv_p[a as usize] = (1..p).find(|b| a * b % p == 1).expect("F_p is a field");
        }
        Ok(ResidueTestFn {
            ring: ResidueRing::new(ctx, 2)?,
            p,
            inv_p,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// `ζ_p`-exponent of `f_G(g)` for any integral lift `g`, `None` for 0.
    pub fn eval(&self, g: &ResMat) -> Option<u64> {
        let r = &self.ring;
        let p = self.p;
        let d0 = |x: u16| r.digit(x, 0);
        let d1 = |x: u16| r.digit(x, 1);
        let det = r.det(g);
        let [a, b, c, d] = *g;
        if d0(det) != 0 {
            let rr = d0(a);
            if d0(c) != 0 || rr == 0 || d0(d) != rr {
                return None;
            }
            Some(self.inv_p[rr as usize] * ((d1(c) + d0(b)) % p) % p)
        } else if d1(det) != 0 {
            if d0(c) != 0 || d0(d) != 0 || d0(a) != 0 {
                return None;
            }
            let rr = d1(c);
            if rr == 0 || d0(b) != rr {
                return None;
            }
            Some(self.inv_p[rr as usize] * ((d1(a) + d1(d)) % p) % p)
        } else {
            None
        }
    }

    /// `κ ȳ κ^⊢` for the split orthogonal form.
    pub fn twist(&self, kappa: &ResMat, y: &ResMat) -> ResMat {
        let kv = [kappa[3], kappa[1], kappa[2], kappa[0]];
        self.ring.mat_mul(&self.ring.mat_mul(kappa, y), &kv)
    }
}

/// Samples `κ ∈ GL_2(O)` and tests `det(κ)^{-1}·κκ^⊢ ∈ I_2`.
///
/// Returns `(checked, failures)`.
pub fn kappa_vdash_check<R: Rng + ?Sized>(
    ctx: &LocalFieldCtx,
    trials: usize,
    rng: &mut R,
) -> Result<(usize, usize)> {
    let datum = KutzkoDatum::new_unchecked(ctx);
    let mut fails = 0;
    for _ in 0..trials {
        let kap = Mat::random_gl_o(ctx, rng, 2);
        let kk = kap.mul(ctx, &vdash(ctx, &kap, &datum.form));
        let x = kk.scale(ctx, &ctx.inv(&kap.det(ctx))?);
        if !datum.member(&x, SubgroupLevel::I2)? {
            fails += 1;
        }
    }
    Ok((trials, fails))
}

/// Which vanishing statement applies to `γ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    NonCompact,
    UnitNotPlusMinusOne,
    OddNearOne,
    OddNearMinusOne,
    EvenNearOne,
}

pub fn classify(ctx: &LocalFieldCtx, gamma: &TorusElem) -> Result<Regime> {
    if !ctx.is_unit(&gamma.alpha)? {
        return Ok(Regime::NonCompact);
    }
    let res = ctx.residue(&gamma.alpha)?;
    let p = ctx.p();
    Ok(if res == 1 {
        if p == 2 {
            Regime::EvenNearOne
        } else {
            Regime::OddNearOne
        }
    } else if res == p - 1 {
        Regime::OddNearMinusOne
    } else {
        Regime::UnitNotPlusMinusOne
    })
}

/// `S(γ)^{-1} = diag(s_1, s_2)` and the forced level `i` with
/// `ord det(a_i S^{-1} a_i^⊢) ∈ {0, 1}`.
#[derive(Clone, Debug)]
pub struct OrbitData {
    pub s1: Elem,
    pub s2: Elem,
    pub level: i64,
}

pub fn orbit_data(ctx: &LocalFieldCtx, gamma: &TorusElem) -> Result<OrbitData> {
    let form = GroupForm::split_orthogonal(ctx, 2);
    let si = s_of(ctx, gamma, &form)?.inv(ctx)?;
    let (s1, s2) = (*si.get(0, 0), *si.get(1, 1));
    let d = ctx.ord(&ctx.mul(&s1, &s2))?.finite().ok_or(Error::Singular)?;
    Ok(OrbitData {
        s1,
        s2,
        level: (1 - d).div_euclid(2),
    })
}

/// `Y = n_b a_i S^{-1} (n_b a_i)^⊢ = ϖ^i [[s_1, b(s_1+s_2)], [0, s_2]]`.
pub fn y_matrix(ctx: &LocalFieldCtx, od: &OrbitData, b: &Elem) -> Mat {
    let pi = ctx.pi_pow(od.level);
    let s = ctx.add(&od.s1, &od.s2);
    Mat::m2(
        ctx.mul(&pi, &od.s1),
        ctx.mul(&pi, &ctx.mul(b, &s)),
        ctx.zero(),
        ctx.mul(&pi, &od.s2),
    )
}

/// Principal parts `b ∈ F/O` with `ord b ≥ -j`, `b = 0` first.
pub fn b_classes(ctx: &LocalFieldCtx, j: i64) -> Vec<Elem> {
    let mut out = vec![ctx.zero()];
    let p = ctx.p();
    for depth in 1..=j {
        // leading digit d_0 ≠ 0 at ϖ^{-depth}
        let count = p.pow(depth as u32);
        for idx in 0..count {
            let digits: Vec<u64> = (0..depth).map(|t| idx / p.pow(t as u32) % p).collect();
            if digits[0] == 0 {
                continue;
            }
            out.push(ctx.from_digits(-depth, &digits));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub kappa: [u64; 4],
    pub b: String,
    pub level: i64,
    pub value_exp: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub regime: Regime,
    pub depth: u32,
    pub effective_depth: u32,
    pub strata_searched: usize,
    pub witness: Option<Witness>,
}

/// Searches `g = κ n_b a_i` for `f_G(g S(γ)^{-1} g^⊢) ≠ 0`.
///
/// `i` is forced by `ord det`; `b` must keep `Y` integral, so `ord b ≥ -i`.
/// On integral `Y` the value depends on `κ` modulo `𝔭²` only, so deeper
/// congruence levels add no new classes.
pub fn support_scan(
    datum: &KutzkoDatum,
    gamma: &TorusElem,
    depth: u32,
    b_window: i64,
) -> Result<ScanResult> {
    let ctx = &datum.ctx;
    if !gamma.is_regular(ctx) {
        return Err(Error::DomainError("γ is not regular".into()));
    }
    let regime = classify(ctx, gamma)?;
    let od = orbit_data(ctx, gamma)?;
    let eff = depth.min(2);
    let mut result = ScanResult {
        regime,
        depth,
        effective_depth: eff,
        strata_searched: 0,
        witness: None,
    };
    let y0 = y_matrix(ctx, &od, &ctx.zero());
    if !ctx.in_ideal(y0.get(0, 0), 0)? || !ctx.in_ideal(y0.get(1, 1), 0)? {
        return Ok(result);
    }
    if od.level > b_window {
        return Err(Error::WindowOverflow(format!(
            "b-classes down to ord -{} exceed window {b_window}",
            od.level
        )));
    }
    let f = datum.residue_fn()?;
    let kappas = f.ring.gl2();
    for b in b_classes(ctx, od.level) {
        let y = y_matrix(ctx, &od, &b);
        debug_assert!(y.is_integral(ctx)?);
        let yb = reduce_mat(&f.ring, ctx, &y)?;
        result.strata_searched += 1;
        let hit = kappas
            .par_iter()
            .position_first(|kap| f.eval(&f.twist(kap, &yb)).is_some());
        if let Some(pos) = hit {
            let kap = kappas[pos];
            result.witness = Some(Witness {
                kappa: kap.map(u64::from),
                b: ctx.format(&b),
                level: od.level,
                value_exp: f.eval(&f.twist(&kap, &yb)).expect("hit"),
            });
            return Ok(result);
        }
    }
    Ok(result)
}

pub fn reduce_mat(ring: &ResidueRing, ctx: &LocalFieldCtx, y: &Mat) -> Result<ResMat> {
    Ok([
        ring.reduce(ctx, y.get(0, 0))?,
        ring.reduce(ctx, y.get(0, 1))?,
        ring.reduce(ctx, y.get(1, 0))?,
        ring.reduce(ctx, y.get(1, 1))?,
    ])
}
