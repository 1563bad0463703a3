//! Stratified evaluation of twisted orbital integrals over `GL_2(F)/T` and
//! of the coefficients `c_k` of `Σ_k c_k q^{-4ks}`.
//!
//! Measures: `vol(GL_2(O)) = 1`, `vol(O^×) = 1` on `T` through `α`, and on
//! `G/T` one unit per `(i, b mod O)` with `g = κ·n_b·a_i`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::character::CharacterValue;
use crate::error::{Error, Result};
use crate::localfield::{Elem, LocalFieldCtx, ResMat, ResidueRing, Val};
use crate::matlattice::{GroupForm, Mat};
use crate::supercuspidal::{reduce_mat, KutzkoDatum, ResidueTestFn};
use crate::twisted::{d_eps, s_of, TorusElem};
use crate::weights::w_k_gl2_from_delta;

/// `value · q^{half_q_exp/2}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureValue {
    pub value: CharacterValue,
    pub half_q_exp: i64,
}

impl MeasureValue {
    pub fn exact(value: CharacterValue) -> Self {
        MeasureValue {
            value,
            half_q_exp: 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
}

/// Desk-scale truncation policy.
#[derive(Clone, Debug, Serialize)]
pub struct TruncationSpec {
    /// congruence depth requested for `κ`
    pub m: u32,
    /// deepest `b`-class `ord b = -b_window`
    pub b_window: i64,
    /// `T`-strata with `ord(α-1) ≤ e_max`
    pub e_max: i64,
    /// non-unit strata with `|ord α| ≤ v_max`
    pub v_max: i64,
    pub k_max: i64,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        TruncationSpec {
            m: 3,
            b_window: 6,
            e_max: 5,
            v_max: 2,
            k_max: 6,
        }
    }
}

/// A function on `M_2(F)` supported in `M_2(O)` that factors through
/// `M_2(O/𝔭^level)` and takes values in `μ_p ∪ {0}`.
pub trait ResidueIntegrand: Sync {
    fn p(&self) -> u64;
    fn level(&self) -> u32;
    /// `ord det` values allowed on the support
    fn det_ords(&self) -> Vec<i64>;
    /// `ζ_p`-exponent, `None` for 0
    fn eval(&self, ring: &ResidueRing, y: &ResMat) -> Option<u64>;
}

impl ResidueIntegrand for ResidueTestFn {
    fn p(&self) -> u64 {
        ResidueTestFn::p(self)
    }
    fn level(&self) -> u32 {
        2
    }
    fn det_ords(&self) -> Vec<i64> {
        vec![0, 1]
    }
    fn eval(&self, _ring: &ResidueRing, y: &ResMat) -> Option<u64> {
        ResidueTestFn::eval(self, y)
    }
}

/// Characteristic function of `GL_2(O)`.
#[derive(Clone, Debug)]
pub struct KIndicator {
    pub p: u64,
}

impl ResidueIntegrand for KIndicator {
    fn p(&self) -> u64 {
        self.p
    }
    fn level(&self) -> u32 {
        1
    }
    fn det_ords(&self) -> Vec<i64> {
        vec![0]
    }
    fn eval(&self, ring: &ResidueRing, y: &ResMat) -> Option<u64> {
        ring.is_unit(ring.det(y)).then_some(0)
    }
}

/// The zero function.
#[derive(Clone, Debug)]
pub struct ZeroIntegrand {
    pub p: u64,
}

impl ResidueIntegrand for ZeroIntegrand {
    fn p(&self) -> u64 {
        self.p
    }
    fn level(&self) -> u32 {
        1
    }
    fn det_ords(&self) -> Vec<i64> {
        vec![0]
    }
    fn eval(&self, _ring: &ResidueRing, _y: &ResMat) -> Option<u64> {
        None
    }
}

/// `Φ(Ȳ) = ∫_K f(κ Y κ^⊢) dκ`, memoized on `Ȳ ∈ M_2(O/𝔭^L)`.
pub struct KAverage<'a, F: ResidueIntegrand + ?Sized> {
    pub f: &'a F,
    pub ring: ResidueRing,
    kappas: Vec<ResMat>,
    cache: Mutex<HashMap<ResMat, Vec<i64>>>,
}

impl<'a, F: ResidueIntegrand + ?Sized> KAverage<'a, F> {
    pub fn new(ctx: &LocalFieldCtx, f: &'a F) -> Result<Self> {
        let ring = ResidueRing::new(ctx, f.level())?;
        let kappas = ring.gl2();
        Ok(KAverage {
            f,
            ring,
            kappas,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn group_order(&self) -> usize {
        self.kappas.len()
    }

    /// Counts of `κ` by value exponent.
    pub fn counts(&self, y: &ResMat) -> Vec<i64> {
        if let Some(c) = self.cache.lock().expect("cache lock").get(y) {
            return c.clone();
        }
        let p = self.f.p() as usize;
        let ring = &self.ring;
        let counts = self
            .kappas
            .par_chunks(4096)
            .map(|chunk| {
                let mut c = vec![0i64; p];
                for kap in chunk {
                    let kv = [kap[3], kap[1], kap[2], kap[0]];
                    let x = ring.mat_mul(&ring.mat_mul(kap, y), &kv);
                    if let Some(e) = self.f.eval(ring, &x) {
                        c[e as usize] += 1;
                    }
                }
                c
            })
            .reduce(
                || vec![0i64; p],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        self.cache
            .lock()
            .expect("cache lock")
            .insert(*y, counts.clone());
        counts
    }

    pub fn phi(&self, y: &ResMat) -> CharacterValue {
        let c = self.counts(y);
        CharacterValue::from_counts(self.f.p(), &c).scale(&BigRational::new(
            BigInt::one(),
            BigInt::from(self.kappas.len()),
        ))
    }
}

/// `Φ` summed over the `b`-classes of each level, keyed by `Δ_1(n_b a_i) = i + min(ord b, 0)`.
pub type DeltaTable = BTreeMap<i64, CharacterValue>;

/// Principal parts of exact depth `j ≥ 1`.
fn b_classes_at(ctx: &LocalFieldCtx, j: i64) -> Vec<Elem> {
    let p = ctx.p();
    let count = p.pow(j as u32);
    let mut out = Vec::with_capacity(count as usize);
    for idx in 0..count {
        let digits: Vec<u64> = (0..j).map(|t| idx / p.pow(t as u32) % p).collect();
        if digits[0] != 0 {
            out.push(ctx.from_digits(-j, &digits));
        }
    }
    out
}

fn ord_fin(ctx: &LocalFieldCtx, x: &Elem) -> Result<i64> {
    match ctx.ord(x)? {
        Val::Finite(v) => Ok(v),
        Val::Infinite => Err(Error::Singular),
    }
}

/// `Σ_{i, b} Φ(n_b a_i δ (n_b a_i)^⊢)` for diagonal `δ = diag(s_1, s_2)`,
/// grouped by `Δ_1`.
pub fn orbit_table<F: ResidueIntegrand + ?Sized>(
    ctx: &LocalFieldCtx,
    s1: &Elem,
    s2: &Elem,
    avg: &KAverage<'_, F>,
    trunc: &TruncationSpec,
) -> Result<DeltaTable> {
    let p = ctx.p();
    let mut table = DeltaTable::new();
    let o1 = ord_fin(ctx, s1)?;
    let o2 = ord_fin(ctx, s2)?;
    let sum = ctx.add(s1, s2);
    let os = ord_fin(ctx, &sum)?;
    for d in avg.f.det_ords() {
        let twice = d - o1 - o2;
        if twice.rem_euclid(2) != 0 {
            continue;
        }
        let i = twice / 2;
        if i + o1 < 0 || i + o2 < 0 {
            continue;
        }
        let pi = ctx.pi_pow(i);
        let (y11, y22) = (ctx.mul(&pi, s1), ctx.mul(&pi, s2));
        let ys = ctx.mul(&pi, &sum);
        let jmax = i + os;
        let mut add = |b: &Elem, delta: i64| -> Result<bool> {
            let y = Mat::m2(y11, ctx.mul(b, &ys), ctx.zero(), y22);
            let yb = reduce_mat(&avg.ring, ctx, &y)?;
            let v = avg.phi(&yb);
            let nz = !v.is_zero();
            let slot = table
                .entry(delta)
                .or_insert_with(|| CharacterValue::zero(p));
            *slot = &*slot + &v;
            Ok(nz)
        };
        add(&ctx.zero(), i)?;
        let top = jmax.min(trunc.b_window);
        for j in 1..=top {
            let mut boundary = false;
            for b in b_classes_at(ctx, j) {
                boundary |= add(&b, i - j)?;
            }
            if boundary && j == trunc.b_window && jmax > trunc.b_window {
                return Err(Error::TailNonzero(format!(
                    "b-classes of depth {j} contribute at level i = {i}"
                )));
            }
        }
    }
    Ok(table)
}

/// `I_ε(δ, f) = |D_ε(δ)|^{1/2} ∫_{G/T} f(g δ g^⊢) dg`, `δ` diagonal and regular.
pub fn orbital_twisted<F: ResidueIntegrand + ?Sized>(
    ctx: &LocalFieldCtx,
    delta: &Mat,
    f: &F,
    trunc: &TruncationSpec,
) -> Result<MeasureValue> {
    if delta.n() != 2 || !delta.get(0, 1).is_zero() || !delta.get(1, 0).is_zero() {
        return Err(Error::DomainError("orbital_twisted needs a diagonal 2×2 δ".into()));
    }
    let form = GroupForm::split_orthogonal(ctx, 2);
    let rep = d_eps(ctx, delta, &form)?;
    let avg = KAverage::new(ctx, f)?;
    let table = orbit_table(ctx, delta.get(0, 0), delta.get(1, 1), &avg, trunc)?;
    let mut total = CharacterValue::zero(f.p());
    for v in table.values() {
        total = &total + v;
    }
    Ok(MeasureValue {
        value: total,
        half_q_exp: rep.value_exponent,
    })
}

/// `Σ_Δ W_k(Δ)·table[Δ]`.
fn weigh(table: &DeltaTable, unit_classes: usize, k: i64, p: u64) -> CharacterValue {
    let mut out = CharacterValue::zero(p);
    for (&delta, v) in table {
        let w = w_k_gl2_from_delta(unit_classes, delta, k);
        if w != 0 {
            out = &out + &v.scale(&BigRational::from_integer(BigInt::from(w)));
        }
    }
    out
}

/// `ψ_k(γ) = ∫_{G/T} f_G(g S(γ)^{-1} g^⊢) W_k(g) dg/dt`.
pub fn psi_k(
    datum: &KutzkoDatum,
    gamma: &TorusElem,
    k: i64,
    trunc: &TruncationSpec,
) -> Result<MeasureValue> {
    let ctx = &datum.ctx;
    let f = datum.residue_fn()?;
    let avg = KAverage::new(ctx, &f)?;
    let table = gamma_table(ctx, gamma, &avg, trunc)?;
    let units = ctx.square_class_reps()?.unit_count();
    Ok(MeasureValue::exact(weigh(&table, units, k, ctx.p())))
}

fn gamma_table<F: ResidueIntegrand + ?Sized>(
    ctx: &LocalFieldCtx,
    gamma: &TorusElem,
    avg: &KAverage<'_, F>,
    trunc: &TruncationSpec,
) -> Result<DeltaTable> {
    if !gamma.is_regular(ctx) {
        return Err(Error::DomainError("γ is not regular".into()));
    }
    let form = GroupForm::split_orthogonal(ctx, 2);
    let si = s_of(ctx, gamma, &form)?.inv(ctx)?;
    orbit_table(ctx, si.get(0, 0), si.get(1, 1), avg, trunc)
}

/// A piece of `T ≅ F^×` on which the integrand is constant.
#[derive(Clone, Debug, Serialize)]
pub struct TStratum {
    /// `ord(α - 1)` for unit `α`, `None` off `O^×`
    pub e: Option<i64>,
    pub v: i64,
    #[serde(skip)]
    pub alpha: Elem,
    #[serde(serialize_with = "ser_rat")]
    pub volume: BigRational,
}

fn ser_rat<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn q_pow(q: u64, e: i64) -> BigRational {
    let b = BigInt::from(q).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(b)
    } else {
        BigRational::new(BigInt::one(), b)
    }
}

/// Strata of `T` at class depth `level`.
///
/// Units with `α ≢ 1`: classes mod `𝔭^level`, volume `1/((q-1)q^{level-1})` each.
/// `α = 1 + ϖ^e w`: classes of `w` mod `𝔭^level`, volume `q^{-e}/((q-1)q^{level-1})` each.
/// `α = ϖ^v w`: the same classes of `w`, volume as for units.
pub fn t_strata(ctx: &LocalFieldCtx, level: u32, e_max: i64, v_max: i64) -> Vec<TStratum> {
    let q = ctx.q();
    let count = q.pow(level);
    let per = BigRational::new(
        BigInt::one(),
        BigInt::from((q - 1) * q.pow(level - 1)),
    );
    // class representatives never equal ±1 exactly
    let nudge = ctx.pi_pow(level as i64);
    let units: Vec<Elem> = (0..count)
        .map(|idx| ctx.from_index(idx, level))
        .filter(|x| ctx.residue(x).map(|r| r != 0).unwrap_or(false))
        .map(|x| ctx.add(&x, &nudge))
        .collect();
    let mut out = Vec::new();
    for a in &units {
        if ctx.residue(a).ok() != Some(1) {
            out.push(TStratum {
                e: Some(0),
                v: 0,
                alpha: *a,
                volume: per.clone(),
            });
        }
    }
    for e in 1..=e_max {
        for w in &units {
            out.push(TStratum {
                e: Some(e),
                v: 0,
                alpha: ctx.add(&ctx.one(), &ctx.shift(w, e)),
                volume: &per * q_pow(q, -e),
            });
        }
    }
    for v in (-v_max..=v_max).filter(|&v| v != 0) {
        for w in &units {
            out.push(TStratum {
                e: None,
                v,
                alpha: ctx.shift(w, v),
                volume: per.clone(),
            });
        }
    }
    out
}

/// One stratum's `vol·|D_ε|·Σ_{i,b}` table.
#[derive(Clone, Debug)]
pub struct StratumValue {
    pub stratum: TStratum,
    pub d_eps_exp: i64,
    pub table: DeltaTable,
}

impl StratumValue {
    fn scale(&self, q: u64) -> BigRational {
        &self.stratum.volume * q_pow(q, self.d_eps_exp)
    }
}

/// Evaluates every `T`-stratum; order follows `t_strata`.
pub fn stratum_values<F: ResidueIntegrand + ?Sized>(
    ctx: &LocalFieldCtx,
    avg: &KAverage<'_, F>,
    trunc: &TruncationSpec,
) -> Result<Vec<StratumValue>> {
    let form = GroupForm::split_orthogonal(ctx, 2);
    let strata = t_strata(ctx, avg.f.level(), trunc.e_max, trunc.v_max);
    strata
        .into_par_iter()
        .map(|st| {
            let gamma = TorusElem::new(ctx, st.alpha)?;
            let si = s_of(ctx, &gamma, &form)?.inv(ctx)?;
            let rep = d_eps(ctx, &si, &form)?;
            let table = orbit_table(ctx, si.get(0, 0), si.get(1, 1), avg, trunc)?;
            Ok(StratumValue {
                stratum: st,
                d_eps_exp: rep.value_exponent,
                table,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientTable {
    pub p: u64,
    pub e_field: u32,
    pub unit_classes: usize,
    pub k_max: i64,
    /// `c_0, …, c_{k_max}`
    pub coeffs: Vec<MeasureValue>,
    /// per `ord(α-1)`: that stratum's share of each `c_k`
    pub per_e: Vec<(i64, Vec<CharacterValue>)>,
    /// total over `α ∉ O^×`
    pub nonunit: Vec<CharacterValue>,
}

impl CoefficientTable {
    pub fn regime(&self) -> &'static str {
        if self.coeffs.iter().all(|c| c.is_zero()) {
            "zero"
        } else if self.p == 2 {
            "even-affine"
        } else {
            "odd-factorized"
        }
    }
}

/// `c_k = 2·∫_T |D_ε(γ)| ψ_k(γ) dγ`, `k = 0..k_max`.
pub fn assemble_coefficients<F: ResidueIntegrand + ?Sized>(
    ctx: &LocalFieldCtx,
    f: &F,
    trunc: &TruncationSpec,
) -> Result<CoefficientTable> {
    let avg = KAverage::new(ctx, f)?;
    let values = stratum_values(ctx, &avg, trunc)?;
    let units = ctx.square_class_reps()?.unit_count();
    let q = ctx.q();
    let p = ctx.p();
    let two = BigRational::from_integer(BigInt::from(2));
    let ks: Vec<i64> = (0..=trunc.k_max).collect();
    let zero_row = || vec![CharacterValue::zero(p); ks.len()];
    let mut coeffs = zero_row();
    let mut per_e: BTreeMap<i64, Vec<CharacterValue>> = BTreeMap::new();
    let mut nonunit = zero_row();
    for sv in &values {
        let s = sv.scale(q) * &two;
        let row: Vec<CharacterValue> = ks
            .iter()
            .map(|&k| weigh(&sv.table, units, k, p).scale(&s))
            .collect();
        let bucket = match sv.stratum.e {
            Some(e) => per_e.entry(e).or_insert_with(zero_row),
            None => &mut nonunit,
        };
        for (slot, x) in bucket.iter_mut().zip(&row) {
            *slot = &*slot + x;
        }
        for (slot, x) in coeffs.iter_mut().zip(&row) {
            *slot = &*slot + x;
        }
    }
    Ok(CoefficientTable {
        p,
        e_field: ctx.e(),
        unit_classes: units,
        k_max: trunc.k_max,
        coeffs: coeffs.into_iter().map(MeasureValue::exact).collect(),
        per_e: per_e.into_iter().collect(),
        nonunit,
    })
}

/// `R_G = ∫_T |D_ε(γ)| ∫_K f(κ S(γ)^{-1} κ^⊢) dκ dγ`.
pub fn rg_term<F: ResidueIntegrand + ?Sized>(
    ctx: &LocalFieldCtx,
    f: &F,
    trunc: &TruncationSpec,
) -> Result<MeasureValue> {
    let avg = KAverage::new(ctx, f)?;
    let form = GroupForm::split_orthogonal(ctx, 2);
    let q = ctx.q();
    let strata = t_strata(ctx, f.level(), trunc.e_max, trunc.v_max);
    let parts: Vec<Result<CharacterValue>> = strata
        .par_iter()
        .map(|st| {
            let gamma = TorusElem::new(ctx, st.alpha)?;
            let si = s_of(ctx, &gamma, &form)?.inv(ctx)?;
            if !si.is_integral(ctx)? {
                return Ok(CharacterValue::zero(f.p()));
            }
            let rep = d_eps(ctx, &si, &form)?;
            let yb = reduce_mat(&avg.ring, ctx, &si)?;
            Ok(avg.phi(&yb).scale(&(&st.volume * q_pow(q, rep.value_exponent))))
        })
        .collect();
    let mut total = CharacterValue::zero(f.p());
    for x in parts {
        total = &total + &x?;
    }
    Ok(MeasureValue::exact(total))
}

/// Per-`e` pieces of `A` and `B`.
#[derive(Clone, Debug, Serialize)]
pub struct ABIncrement {
    pub e: i64,
    pub a: CharacterValue,
    pub b: CharacterValue,
    pub a_formula: CharacterValue,
    pub b_formula: CharacterValue,
}

#[derive(Clone, Debug, Serialize)]
pub struct ABReport {
    pub a: CharacterValue,
    pub b: CharacterValue,
    /// from the volume formulas, assuming `f = 1` on `G_e^-` and 0 elsewhere
    pub a_formula: CharacterValue,
    pub b_formula: CharacterValue,
    pub increments: Vec<ABIncrement>,
    pub table: CoefficientTable,
}

/// `c_k = 2|O^×/O^{×2}|(A + Bk)`; `A`, `B` read off `c_0`, `c_1` and
/// compared with the direct volume formulas over `G_e^-`.
pub fn coefficient_a_b(datum: &KutzkoDatum, trunc: &TruncationSpec) -> Result<ABReport> {
    let ctx = &datum.ctx;
    if ctx.p() != 2 || ctx.e() < 2 {
        return Err(Error::DomainError("A, B are defined for p = 2 with 2 ∈ 𝔭²".into()));
    }
    let mut tr = trunc.clone();
    tr.k_max = tr.k_max.max(1);
    let f = datum.residue_fn()?;
    let table = assemble_coefficients(ctx, &f, &tr)?;
    let q = ctx.q();
    let units = table.unit_classes as i64;
    let norm = BigRational::new(BigInt::one(), BigInt::from(2 * units));
    let a_of = |row: &[CharacterValue]| row[0].scale(&norm);
    let b_of = |row: &[CharacterValue]| (&row[1] - &row[0]).scale(&norm);
    let two_ord = ord_fin(ctx, &ctx.from_int(2))?;
    let mut increments = Vec::new();
    let mut a_formula = CharacterValue::zero(2);
    let mut b_formula = CharacterValue::zero(2);
    for (e, row) in &table.per_e {
        let e = *e;
        // vol(1 + ϖ^e O^×) = q^{-e}, |D_ε| = |2|·q^{-2e}, classes ord b > -e
        let weight = q_pow(q, -e) * q_pow(q, -two_ord - 2 * e);
        let mut af = BigRational::zero();
        let mut count = BigRational::zero();
        if e >= 1 {
            for j in 0..e {
                let classes = if j == 0 { 1 } else { (q - 1) * q.pow(j as u32 - 1) };
                let c = BigRational::from_integer(BigInt::from(classes));
                af += &c * BigRational::from_integer(BigInt::from(2 * (e - j) + 1));
                count += c;
            }
        }
        let inc = ABIncrement {
            e,
            a: a_of(row),
            b: b_of(row),
            a_formula: CharacterValue::rational(2, af * &weight),
            b_formula: CharacterValue::rational(
                2,
                count * &weight * BigRational::from_integer(BigInt::from(4)),
            ),
        };
        a_formula = &a_formula + &inc.a_formula;
        b_formula = &b_formula + &inc.b_formula;
        increments.push(inc);
    }
    let coeffs: Vec<CharacterValue> = table.coeffs.iter().map(|c| c.value.clone()).collect();
    Ok(ABReport {
        a: a_of(&coeffs),
        b: b_of(&coeffs),
        a_formula,
        b_formula,
        increments,
        table,
    })
}
