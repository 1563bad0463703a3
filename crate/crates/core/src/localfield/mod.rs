//! Truncated arithmetic in a totally ramified extension `F = Q_p(ϖ)`.
//!
//! Units are stored as polynomials in `ϖ` of degree `< e` with coefficients
//! modulo `p^M`, reduced by the Eisenstein relation. Every element carries
//! its relative precision, so cancellation is detected instead of guessed.

mod residue_ring;
mod squares;
mod text;

pub use residue_ring::{ResMat, ResidueRing};
pub use squares::SquareClassSet;

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::character::CharacterValue;
use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 4;

type Digits = [u64; MAX_DEGREE];

/// A valuation: an integer or `+∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Val {
    Finite(i64),
    Infinite,
}

impl Val {
    pub fn finite(self) -> Option<i64> {
        match self {
            Val::Finite(v) => Some(v),
            Val::Infinite => None,
        }
    }

    pub fn add(self, other: Val) -> Val {
        match (self, other) {
            (Val::Finite(a), Val::Finite(b)) => Val::Finite(a + b),
            _ => Val::Infinite,
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Finite(v) => write!(f, "{v}"),
            Val::Infinite => write!(f, "inf"),
        }
    }
}

const EXACT_ZERO: i64 = i64::MAX;

/// An element of `F` known to a finite number of `ϖ`-adic digits.
///
/// `rel == 0` marks a value indistinguishable from zero: either the exact
/// zero (`val == i64::MAX`) or `O(ϖ^val)`.
#[derive(Clone, Copy, Debug)]
pub struct Elem {
    val: i64,
    rel: u32,
    unit: Digits,
}

impl Elem {
    pub fn is_exact_zero(&self) -> bool {
        self.val == EXACT_ZERO
    }

    /// True if no digit of the value is known to be nonzero.
    pub fn is_zero(&self) -> bool {
        self.rel == 0
    }

    pub fn rel_prec(&self) -> u32 {
        self.rel
    }

    /// Absolute precision, `None` for the exact zero.
    pub fn abs_prec(&self) -> Option<i64> {
        if self.is_exact_zero() {
            None
        } else {
            Some(self.val + self.rel as i64)
        }
    }
}

#[derive(Clone, Debug)]
pub struct LocalFieldCtx {
    p: u64,
    e: u32,
    eisenstein: Vec<i64>,
    prec: u32,
    // storage: coefficients live in Z / p^m
    m: u32,
    modulus: u64,
    // x^e = sum reduce[i] x^i
    reduce: Digits,
    // p / ϖ as a polynomial in ϖ
    p_over_pi: Digits,
    // p / ϖ^e
    eps: Digits,
    eps_pows: Vec<Digits>,
    pi_pows: Vec<Digits>,
    p_pows: Vec<u64>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn vp(mut n: i128, p: u64) -> u32 {
    let p = p as i128;
    let mut v = 0;
    while n != 0 && n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1);
    t0.rem_euclid(m as i128) as u64
}

/// Builds a field context. `eisenstein` lists coefficients constant-to-leading.
pub fn make_field(p: u64, e: u32, eisenstein: &[i64], prec: u32) -> Result<LocalFieldCtx> {
    LocalFieldCtx::new(p, e, eisenstein, prec)
}

impl LocalFieldCtx {
    pub fn new(p: u64, e: u32, eisenstein: &[i64], prec: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if e == 0 || e as usize > MAX_DEGREE {
            return Err(Error::UnsupportedDegree(e));
        }
        if eisenstein.len() != e as usize + 1 || eisenstein[e as usize] != 1 {
            return Err(Error::NotEisenstein(p));
        }
        if vp(eisenstein[0] as i128, p) != 1 {
            return Err(Error::NotEisenstein(p));
        }
        if eisenstein[1..e as usize].iter().any(|&c| c % p as i64 != 0) {
            return Err(Error::NotEisenstein(p));
        }
        let need = 2 * e + 2;
        if prec < need {
            return Err(Error::PrecisionTooSmall { got: prec, need });
        }
        let m = prec.div_ceil(e) + 1;
        let mut modulus: u64 = 1;
        for _ in 0..m {
            modulus = modulus
                .checked_mul(p)
                .filter(|&x| x < (1u64 << 62))
                .ok_or(Error::PrecisionTooLarge(prec))?;
        }
        let md = modulus as i128;
        let mut reduce = [0u64; MAX_DEGREE];
        for i in 0..e as usize {
            reduce[i] = (-(eisenstein[i] as i128)).rem_euclid(md) as u64;
        }
        let mut p_pows = vec![1u64];
        for _ in 0..m {
            p_pows.push(p_pows.last().unwrap() * p);
        }
        let mut ctx = LocalFieldCtx {
            p,
            e,
            eisenstein: eisenstein.to_vec(),
            prec,
            m,
            modulus,
            reduce,
            p_over_pi: [0; MAX_DEGREE],
            eps: [0; MAX_DEGREE],
            eps_pows: Vec::new(),
            pi_pows: Vec::new(),
            p_pows,
        };
        // ϖ·Q(ϖ) = -c0 = p·(-u0), so p/ϖ = Q(ϖ)·(-u0)^{-1}
        let u0 = eisenstein[0] / p as i64;
        let neg_u0_inv = mod_inverse((-(u0 as i128)).rem_euclid(md) as u64, modulus);
        let mut qpoly = [0u64; MAX_DEGREE];
        for i in 0..e as usize {
            qpoly[i] = (eisenstein[i + 1] as i128).rem_euclid(md) as u64;
        }
        ctx.p_over_pi = ctx.poly_scale(&qpoly, neg_u0_inv);
        // ϖ^e = p·η with η = -Σ (c_i/p) ϖ^i
        let mut eta = [0u64; MAX_DEGREE];
        for i in 0..e as usize {
            eta[i] = (-((eisenstein[i] / p as i64) as i128)).rem_euclid(md) as u64;
        }
        ctx.eps = ctx.poly_unit_inverse(&eta);
        let mut eps_pows = vec![ctx.poly_const(1)];
        for _ in 0..m {
            eps_pows.push(ctx.poly_mul(eps_pows.last().unwrap(), &ctx.eps));
        }
        ctx.eps_pows = eps_pows;
        let mut pows = vec![ctx.poly_const(1)];
        let mut x = [0u64; MAX_DEGREE];
        if e == 1 {
            x[0] = ctx.reduce[0];
        } else {
            x[1] = 1;
        }
        for _ in 0..(2 * prec as usize + 2) {
            let next = ctx.poly_mul(pows.last().unwrap(), &x);
            pows.push(next);
        }
        ctx.pi_pows = pows;
        Ok(ctx)
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn q(&self) -> u64 {
        self.p
    }
    pub fn e(&self) -> u32 {
        self.e
    }
    pub fn precision(&self) -> u32 {
        self.prec
    }
    pub fn eisenstein(&self) -> &[i64] {
        &self.eisenstein
    }

    /// `ord(2)`.
    pub fn ord_two(&self) -> u32 {
        if self.p == 2 {
            self.e
        } else {
            0
        }
    }

    // ---- polynomial layer (coefficients mod p^m) ----

    fn poly_const(&self, c: u64) -> Digits {
        let mut r = [0; MAX_DEGREE];
        r[0] = c % self.modulus;
        r
    }

    fn mulmod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    fn poly_add(&self, a: &Digits, b: &Digits) -> Digits {
        let mut r = [0; MAX_DEGREE];
        for i in 0..self.e as usize {
            r[i] = (a[i] + b[i]) % self.modulus;
        }
        r
    }

    fn poly_neg(&self, a: &Digits) -> Digits {
        let mut r = [0; MAX_DEGREE];
        for i in 0..self.e as usize {
            r[i] = (self.modulus - a[i]) % self.modulus;
        }
        r
    }

    fn poly_scale(&self, a: &Digits, c: u64) -> Digits {
        let mut r = [0; MAX_DEGREE];
        for i in 0..self.e as usize {
            r[i] = self.mulmod(a[i], c);
        }
        r
    }

    fn poly_mul(&self, a: &Digits, b: &Digits) -> Digits {
        let e = self.e as usize;
        let mut t = [0u64; 2 * MAX_DEGREE];
        for i in 0..e {
            if a[i] == 0 {
                continue;
            }
            for j in 0..e {
                t[i + j] = (t[i + j] + self.mulmod(a[i], b[j])) % self.modulus;
            }
        }
        for d in (e..2 * e - 1).rev() {
            let c = t[d];
            if c == 0 {
                continue;
            }
            t[d] = 0;
            for i in 0..e {
                let k = d - e + i;
                t[k] = (t[k] + self.mulmod(c, self.reduce[i])) % self.modulus;
            }
        }
        let mut r = [0; MAX_DEGREE];
        r[..e].copy_from_slice(&t[..e]);
        r
    }

    fn poly_unit_inverse(&self, a: &Digits) -> Digits {
        let mut t = self.poly_const(mod_inverse(a[0] % self.modulus, self.modulus));
        let two = self.poly_const(2);
        let target = self.e * self.m;
        let mut reached = 1;
        while reached < target {
            let at = self.poly_mul(a, &t);
            t = self.poly_mul(&t, &self.poly_add(&two, &self.poly_neg(&at)));
            reached *= 2;
        }
        t
    }

    fn poly_ord(&self, a: &Digits) -> u32 {
        let mut best = self.e * self.m;
        for i in 0..self.e as usize {
            if a[i] != 0 {
                let v = vp(a[i] as i128, self.p);
                best = best.min(self.e * v + i as u32);
            }
        }
        best
    }

    fn poly_div_pi(&self, a: &Digits) -> Digits {
        let e = self.e as usize;
        debug_assert_eq!(a[0] % self.p, 0);
        let c0 = a[0] / self.p;
        let mut r = self.poly_scale(&self.p_over_pi, c0);
        for i in 1..e {
            r[i - 1] = (r[i - 1] + a[i]) % self.modulus;
        }
        r
    }

    fn poly_div_pi_pow(&self, a: &Digits, w: u32) -> Digits {
        let (q, r) = (w / self.e, w % self.e);
        let mut out = *a;
        if q > 0 {
            let d = self.p_pows[q as usize];
            for c in out.iter_mut().take(self.e as usize) {
                debug_assert_eq!(*c % d, 0);
                *c /= d;
            }
            // s/ϖ^{ea} = (s/p^a)·(p/ϖ^e)^a
            out = self.poly_mul(&out, &self.eps_pows[q as usize]);
        }
        for _ in 0..r {
            out = self.poly_div_pi(&out);
        }
        out
    }

    fn canonical(&self, a: &Digits, rel: u32) -> Digits {
        let mut r = [0; MAX_DEGREE];
        for i in 0..self.e as usize {
            if rel as usize > i {
                let k = (rel - i as u32).div_ceil(self.e);
                r[i] = a[i] % self.p_pows[k.min(self.m) as usize];
            }
        }
        r
    }

    fn pi_pow_poly(&self, d: i64) -> Digits {
        if d as usize >= self.pi_pows.len() {
            [0; MAX_DEGREE]
        } else {
            self.pi_pows[d as usize]
        }
    }

    fn from_poly(&self, s: &Digits, base_val: i64, abs: i64) -> Elem {
        // s is a value at scale ϖ^base_val known modulo ϖ^abs (absolute)
        let known = abs - base_val;
        if known <= 0 {
            return self.indeterminate(abs);
        }
        let w = self.poly_ord(s) as i64;
        if w >= known {
            return self.indeterminate(abs);
        }
        let u = self.poly_div_pi_pow(s, w as u32);
        let rel = (known - w).min(self.prec as i64) as u32;
        Elem {
            val: base_val + w,
            rel,
            unit: self.canonical(&u, rel),
        }
    }

    // ---- constructors ----

    pub fn zero(&self) -> Elem {
        Elem {
            val: EXACT_ZERO,
            rel: 0,
            unit: [0; MAX_DEGREE],
        }
    }

    /// `O(ϖ^k)`.
    pub fn indeterminate(&self, k: i64) -> Elem {
        Elem {
            val: k,
            rel: 0,
            unit: [0; MAX_DEGREE],
        }
    }

    pub fn one(&self) -> Elem {
        self.from_int(1)
    }

    pub fn pi(&self) -> Elem {
        self.pi_pow(1)
    }

    pub fn pi_pow(&self, v: i64) -> Elem {
        Elem {
            val: v,
            rel: self.prec,
            unit: self.canonical(&self.poly_const(1), self.prec),
        }
    }

    pub fn from_int(&self, n: i64) -> Elem {
        if n == 0 {
            return self.zero();
        }
        let a = vp(n as i128, self.p);
        let rest = n as i128 / (self.p as i128).pow(a);
        let mut u = self.poly_const((rest.rem_euclid(self.modulus as i128)) as u64);
        for _ in 0..a {
            u = self.poly_mul(&u, &self.eps);
        }
        Elem {
            val: (self.e * a) as i64,
            rel: self.prec,
            unit: self.canonical(&u, self.prec),
        }
    }

    /// `ϖ^v · Σ d_j ϖ^j`, exact.
    pub fn from_digits(&self, v: i64, digits: &[u64]) -> Elem {
        let mut s = [0u64; MAX_DEGREE];
        for (j, &d) in digits.iter().enumerate() {
            let t = self.poly_scale(&self.pi_pow_poly(j as i64), d % self.p);
            s = self.poly_add(&s, &t);
        }
        if digits.iter().all(|&d| d % self.p == 0) {
            return self.zero();
        }
        self.from_poly(&s, v, v + digits.len() as i64 + self.prec as i64)
    }

    /// Integer whose base-`p` digits are read as `ϖ`-adic digits.
    pub fn from_index(&self, mut idx: u64, len: u32) -> Elem {
        let mut d = Vec::with_capacity(len as usize);
        for _ in 0..len {
            d.push(idx % self.p);
            idx /= self.p;
        }
        self.from_digits(0, &d)
    }

    // ---- arithmetic ----

    pub fn neg(&self, a: &Elem) -> Elem {
        if a.is_zero() {
            return *a;
        }
        Elem {
            val: a.val,
            rel: a.rel,
            unit: self.canonical(&self.poly_neg(&a.unit), a.rel),
        }
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        if a.is_exact_zero() {
            return *b;
        }
        if b.is_exact_zero() {
            return *a;
        }
        let abs = (a.val + a.rel as i64).min(b.val + b.rel as i64);
        if a.is_zero() && b.is_zero() {
            return self.indeterminate(abs);
        }
        if a.is_zero() {
            return self.truncate_abs(b, abs);
        }
        if b.is_zero() {
            return self.truncate_abs(a, abs);
        }
        let v = a.val.min(b.val);
        let mut s = [0u64; MAX_DEGREE];
        for x in [a, b] {
            let d = x.val - v;
            if v + d < abs {
                s = self.poly_add(&s, &self.poly_mul(&x.unit, &self.pi_pow_poly(d)));
            }
        }
        self.from_poly(&s, v, abs)
    }

    fn truncate_abs(&self, a: &Elem, abs: i64) -> Elem {
        let known = abs - a.val;
        if known <= 0 {
            return self.indeterminate(abs);
        }
        if known as u32 >= a.rel {
            return *a;
        }
        let rel = known as u32;
        Elem {
            val: a.val,
            rel,
            unit: self.canonical(&a.unit, rel),
        }
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        if a.is_exact_zero() || b.is_exact_zero() {
            return self.zero();
        }
        if a.is_zero() || b.is_zero() {
            return self.indeterminate(a.val + b.val);
        }
        let rel = a.rel.min(b.rel);
        Elem {
            val: a.val + b.val,
            rel,
            unit: self.canonical(&self.poly_mul(&a.unit, &b.unit), rel),
        }
    }

    pub fn inv(&self, a: &Elem) -> Result<Elem> {
        if a.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        if a.is_zero() {
            return Err(Error::PrecisionExhausted("inverse of an undetermined value"));
        }
        Ok(Elem {
            val: -a.val,
            rel: a.rel,
            unit: self.canonical(&self.poly_unit_inverse(&a.unit), a.rel),
        })
    }

    pub fn div(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &Elem, k: i64) -> Result<Elem> {
        let base = if k < 0 { self.inv(a)? } else { *a };
        let mut r = self.one();
        for _ in 0..k.unsigned_abs() {
            r = self.mul(&r, &base);
        }
        Ok(r)
    }

    /// Multiplies by `ϖ^k`, exact.
    pub fn shift(&self, a: &Elem, k: i64) -> Elem {
        if a.is_exact_zero() {
            return *a;
        }
        Elem {
            val: a.val + k,
            ..*a
        }
    }

    // ---- queries ----

    pub fn ord(&self, a: &Elem) -> Result<Val> {
        if a.is_exact_zero() {
            Ok(Val::Infinite)
        } else if a.is_zero() {
            Err(Error::PrecisionExhausted("leading digit beyond working precision"))
        } else {
            Ok(Val::Finite(a.val))
        }
    }

    /// Decides `a ∈ 𝔭^m`.
    pub fn in_ideal(&self, a: &Elem, m: i64) -> Result<bool> {
        if a.is_exact_zero() {
            return Ok(true);
        }
        if a.is_zero() {
            return if a.val >= m {
                Ok(true)
            } else {
                Err(Error::PrecisionExhausted("membership undecidable at this precision"))
            };
        }
        Ok(a.val >= m)
    }

    pub fn is_unit(&self, a: &Elem) -> Result<bool> {
        Ok(self.ord(a)? == Val::Finite(0))
    }

    /// Equality up to the precision of both operands.
    pub fn eq(&self, a: &Elem, b: &Elem) -> bool {
        self.sub(a, b).is_zero()
    }

    /// Residue class of `a ∈ O` in `F_p`.
    pub fn residue(&self, a: &Elem) -> Result<u64> {
        if !self.in_ideal(a, 0)? {
            return Err(Error::DomainError("residue of a non-integral element".into()));
        }
        if a.is_zero() || a.val > 0 {
            return Ok(0);
        }
        Ok(a.unit[0] % self.p)
    }

    /// `ϖ`-adic digits `d_0..d_{len-1}` of `a ∈ O`.
    pub fn int_digits(&self, a: &Elem, len: u32) -> Result<Vec<u64>> {
        if !self.in_ideal(a, 0)? {
            return Err(Error::DomainError("digits of a non-integral element".into()));
        }
        let mut out = vec![0u64; len as usize];
        if a.is_exact_zero() {
            return Ok(out);
        }
        if a.val + (a.rel as i64) < len as i64 {
            return Err(Error::PrecisionExhausted("digit beyond known precision"));
        }
        if a.is_zero() {
            return Ok(out);
        }
        let mut s = a.unit;
        for j in a.val..len as i64 {
            let d = s[0] % self.p;
            out[j as usize] = d;
            let mut t = s;
            t[0] = (t[0] + self.modulus - d) % self.modulus;
            s = self.poly_div_pi(&t);
        }
        Ok(out)
    }

    /// Index of `a mod 𝔭^len` in base `p` digit order.
    pub fn index_mod(&self, a: &Elem, len: u32) -> Result<u64> {
        let d = self.int_digits(a, len)?;
        Ok(d.iter().rev().fold(0, |acc, &x| acc * self.p + x))
    }

    /// Digits of the unit part, `rel` of them.
    pub fn unit_digits(&self, a: &Elem) -> Vec<u64> {
        if a.is_zero() {
            return Vec::new();
        }
        let u = Elem { val: 0, ..*a };
        self.int_digits(&u, a.rel).expect("unit digits are known")
    }

    /// Principal part `Σ_{j<0} d_j ϖ^j`.
    pub fn principal_part(&self, a: &Elem) -> Result<Elem> {
        if self.in_ideal(a, 0)? {
            return Ok(self.zero());
        }
        let need = (-a.val) as u32;
        if a.rel < need {
            return Err(Error::PrecisionExhausted("principal part beyond precision"));
        }
        let u = Elem { val: 0, ..*a };
        let d = self.int_digits(&u, need)?;
        Ok(self.from_digits(a.val, &d))
    }

    /// Additive character with kernel `𝔭`: `x ↦ ζ_p^{res(x)}`.
    pub fn additive_char(&self, a: &Elem) -> Result<CharacterValue> {
        Ok(CharacterValue::root(self.p, self.additive_char_exp(a)?))
    }

    pub fn additive_char_exp(&self, a: &Elem) -> Result<u64> {
        if !self.in_ideal(a, 0)? {
            return Err(Error::DomainError("additive character evaluated off O".into()));
        }
        self.residue(a)
    }

    fn with_rel_internal(&self, a: Elem, rel: u32) -> Elem {
        if a.is_zero() {
            return a;
        }
        let rel = rel.min(self.prec);
        Elem {
            val: a.val,
            rel,
            unit: self.canonical(&a.unit, rel),
        }
    }

    /// Drops precision to `rel` relative digits (never raises it).
    pub fn truncate(&self, a: &Elem, rel: u32) -> Elem {
        self.with_rel_internal(*a, rel.min(a.rel))
    }

    // ---- sampling ----

    /// Random exact unit.
    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> Elem {
        let mut d: Vec<u64> = (0..self.prec).map(|_| rng.gen_range(0..self.p)).collect();
        d[0] = rng.gen_range(1..self.p);
        self.from_digits(0, &d)
    }

    /// Random exact nonzero element with valuation in `[vmin, vmax]`.
    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R, vmin: i64, vmax: i64) -> Elem {
        let v = rng.gen_range(vmin..=vmax);
        self.shift(&self.random_unit(rng), v)
    }

    /// Random exact element of `𝔭^vmin`, zero with small probability.
    pub fn random_elem<R: Rng + ?Sized>(&self, rng: &mut R, vmin: i64, vmax: i64) -> Elem {
        if rng.gen_ratio(1, 10) {
            self.zero()
        } else {
            self.random_nonzero(rng, vmin, vmax)
        }
    }
}
