//! Closed-form summation of `Σ_k c_k u^k`, `u = q^{-2ns}`, and its Laurent
//! expansion at `s = 0` with coefficients in `Q[(ln q)^{-1}]`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::character::CharacterValue;
use crate::error::{Error, Result};

/// Dense polynomial, lowest degree first.
pub type Poly = Vec<BigRational>;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_add(a: &[BigRational], b: &[BigRational]) -> Poly {
    let n = a.len().max(b.len());
    let z = BigRational::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect())
}

fn one_minus_u_pow(m: usize) -> Poly {
    let mut out = vec![rat(1)];
    for _ in 0..m {
        out = poly_mul(&out, &[rat(1), rat(-1)]);
    }
    out
}

fn eval(p: &[BigRational], x: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

/// Exact division by `(1 - u)`; `None` when `p(1) ≠ 0`.
fn div_one_minus_u(p: &[BigRational]) -> Option<Poly> {
    if !eval(p, &rat(1)).is_zero() {
        return None;
    }
    // p = (1-u) r  ⇔  r_i = Σ_{j≤i} p_j
    let mut r = Vec::with_capacity(p.len().saturating_sub(1));
    let mut acc = BigRational::zero();
    for c in &p[..p.len().saturating_sub(1)] {
        acc += c;
        r.push(acc.clone());
    }
    Some(trim(r))
}

/// Polynomial remainder.
fn poly_rem(a: &[BigRational], b: &[BigRational]) -> Poly {
    let b = trim(b.to_vec());
    let mut r = trim(a.to_vec());
    let lead = b.last().expect("nonzero divisor").clone();
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let f = r.last().unwrap() / &lead;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &f * c;
        }
        r = trim(r);
    }
    r
}

fn binom_poly(j: usize) -> Poly {
    // C(k, j) as a polynomial in k
    let mut out = vec![rat(1)];
    for t in 0..j {
        out = poly_mul(&out, &[rat(-(t as i64)), rat(1)]);
    }
    let fact: BigInt = (1..=j as i64).map(BigInt::from).product();
    out.iter().map(|c| c / BigRational::from_integer(fact.clone())).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolyFit {
    /// `P(k)` in the monomial basis, lowest first
    #[serde(serialize_with = "ser_poly")]
    pub poly: Poly,
    pub k0: usize,
}

impl PolyFit {
    pub fn at(&self, k: usize) -> BigRational {
        eval(&self.poly, &rat(k as i64))
    }
}

fn ser_poly<S: serde::Serializer>(p: &Poly, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(p.len()))?;
    for c in p {
        seq.serialize_element(&c.to_string())?;
    }
    seq.end()
}

fn difference_table(c: &[BigRational], order: usize) -> Vec<Vec<BigRational>> {
    let mut rows = vec![c.to_vec()];
    for _ in 0..order {
        let last = rows.last().unwrap();
        let next: Vec<BigRational> = last.windows(2).map(|w| &w[1] - &w[0]).collect();
        rows.push(next);
    }
    rows
}

/// Exact polynomial fit of degree `≤ max_degree` from the first index `k_0`
/// after which the `(max_degree+1)`-th differences vanish.
pub fn fit_polynomial(coeffs: &[BigRational], max_degree: usize) -> Result<PolyFit> {
    let order = max_degree + 1;
    let rows = difference_table(coeffs, order);
    let top = &rows[order];
    // smallest k0 with top[k] = 0 for all k ≥ k0
    let k0 = top.iter().rposition(|x| !x.is_zero()).map_or(0, |i| i + 1);
    if coeffs.len() < k0 + max_degree + 3 {
        let table: Vec<String> = rows
            .iter()
            .enumerate()
            .map(|(j, r)| {
                let cells: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                format!("Δ^{j}: {}", cells.join(" "))
            })
            .collect();
        return Err(Error::NoStabilization(table.join("; ")));
    }
    // Newton form at k0
    let mut poly = Poly::new();
    for (j, row) in rows.iter().take(order).enumerate() {
        let shifted = compose_shift(&binom_poly(j), k0);
        poly = poly_add(&poly, &shifted.iter().map(|c| c * &row[k0]).collect::<Poly>());
    }
    Ok(PolyFit { poly, k0 })
}

/// `p(k - k0)` in `k`.
fn compose_shift(p: &[BigRational], k0: usize) -> Poly {
    let lin = [rat(-(k0 as i64)), rat(1)];
    let mut out = Poly::new();
    for c in p.iter().rev() {
        out = poly_add(&poly_mul(&out, &lin), &[c.clone()]);
    }
    out
}

/// `num(u) / (1-u)^pole_order`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedForm {
    #[serde(serialize_with = "ser_poly")]
    pub num: Poly,
    #[serde(serialize_with = "ser_poly")]
    pub den: Poly,
    pub pole_order: usize,
}

impl ClosedForm {
    /// First `len` Taylor coefficients at `u = 0`.
    pub fn expand(&self, len: usize) -> Vec<BigRational> {
        series_div(&self.num, &self.den, len)
    }
}

fn series_div(num: &[BigRational], den: &[BigRational], len: usize) -> Vec<BigRational> {
    let d0 = den[0].clone();
    let mut out: Vec<BigRational> = Vec::with_capacity(len);
    for k in 0..len {
        let mut acc = num.get(k).cloned().unwrap_or_else(BigRational::zero);
        for j in 1..=k.min(den.len() - 1) {
            acc -= &den[j] * &out[k - j];
        }
        out.push(acc / &d0);
    }
    out
}

/// `Σ_k P(k) u^k` plus the head correction `Σ_{k<k_0} (c_k - P(k)) u^k`,
/// with common `(1-u)` factors removed.
pub fn closed_form(fit: &PolyFit, coeffs: &[BigRational]) -> ClosedForm {
    let d = fit.poly.len().saturating_sub(1);
    // binomial basis: P(k) = Σ a_j C(k, j), a_j = Δ^j P(0)
    let vals: Vec<BigRational> = (0..=d).map(|k| fit.at(k)).collect();
    let diffs = difference_table(&vals, d);
    let mut num = Poly::new();
    for (j, row) in diffs.iter().enumerate() {
        let mut term = vec![BigRational::zero(); j];
        term.push(row[0].clone());
        num = poly_add(&num, &poly_mul(&term, &one_minus_u_pow(d - j)));
    }
    let mut m = d + 1;
    let full = one_minus_u_pow(m);
    for (k, c) in coeffs.iter().enumerate().take(fit.k0) {
        let delta = c - fit.at(k);
        if !delta.is_zero() {
            let mut term = vec![BigRational::zero(); k];
            term.push(delta);
            num = poly_add(&num, &poly_mul(&term, &full));
        }
    }
    if num.is_empty() {
        return ClosedForm {
            num,
            den: vec![rat(1)],
            pole_order: 0,
        };
    }
    while m > 0 {
        match div_one_minus_u(&num) {
            Some(r) => {
                num = r;
                m -= 1;
            }
            None => break,
        }
    }
    ClosedForm {
        num,
        den: one_minus_u_pow(m),
        pole_order: m,
    }
}

/// Coefficient `rational·(ln q)^{lnq_power}` of `s^order`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LaurentTerm {
    pub order: i64,
    #[serde(serialize_with = "ser_rat")]
    pub rational: BigRational,
    pub lnq_power: i64,
}

fn ser_rat<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn factorial(n: usize) -> BigInt {
    (1..=n as i64).map(BigInt::from).product()
}

/// `p(e^{-t})` as a power series in `t`.
fn exp_series(p: &[BigRational], len: usize) -> Vec<BigRational> {
    (0..len)
        .map(|j| {
            let s: BigRational = p
                .iter()
                .enumerate()
                .map(|(i, c)| c * rat(-(i as i64)).pow(j as i32))
                .sum();
            s / BigRational::from_integer(factorial(j))
        })
        .collect()
}

/// Coefficients of `t^{-m} .. t^{top}` of `N(e^{-t}) / ((1 - e^{-t})^m D'(e^{-t}))`.
fn t_expansion(num: &[BigRational], rest: &[BigRational], m: usize, top: usize) -> Vec<BigRational> {
    let len = m + top + 1;
    // E(t) = (1 - e^{-t})/t
    let e: Vec<BigRational> = (0..len)
        .map(|j| {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            rat(sign) / BigRational::from_integer(factorial(j + 1))
        })
        .collect();
    let mut den = exp_series(rest, len);
    for _ in 0..m {
        den = poly_mul(&den, &e);
        den.resize(len, BigRational::zero());
        den.truncate(len);
    }
    series_div(&exp_series(num, len), &den, len)
}

/// Checks that no factor of `den/(1-u)^m` vanishes on `|u| = 1`.
fn check_unit_circle(den: &[BigRational], m: usize) -> Result<Poly> {
    let mut rest = trim(den.to_vec());
    for _ in 0..m {
        rest = div_one_minus_u(&rest).ok_or_else(|| {
            Error::UnexpectedPole("denominator lacks the stated (1-u) power".into())
        })?;
    }
    if eval(&rest, &rat(1)).is_zero() {
        return Err(Error::UnexpectedPole("extra pole at u = 1".into()));
    }
    let deg = rest.len().saturating_sub(1);
    if deg == 0 {
        return Ok(rest);
    }
    // roots of unity: Φ_n | rest, with φ(n) ≤ deg forcing n ≤ 2·deg² + 2
    for n in 2..=(2 * deg * deg + 2) {
        let phi = cyclotomic(n);
        if phi.len() - 1 <= deg && poly_rem(&rest, &phi).is_empty() {
            return Err(Error::UnexpectedPole(format!("pole at a primitive {n}-th root of unity")));
        }
    }
    for z in numeric_roots(&rest) {
        if (z.norm() - 1.0).abs() < 1e-8 {
            return Err(Error::UnexpectedPole(format!(
                "pole near the unit circle at {:.6}+{:.6}i",
                z.re, z.im
            )));
        }
    }
    Ok(rest)
}

fn cyclotomic(n: usize) -> Poly {
    // u^n - 1 divided by Φ_d for proper divisors d
    let mut p = vec![BigRational::zero(); n + 1];
    p[0] = rat(-1);
    p[n] = rat(1);
    for d in 1..n {
        if n % d == 0 {
            p = poly_div_exact(&p, &cyclotomic(d));
        }
    }
    p
}

fn poly_div_exact(a: &[BigRational], b: &[BigRational]) -> Poly {
    let mut r = trim(a.to_vec());
    let b = trim(b.to_vec());
    let lead = b.last().unwrap().clone();
    let mut q = vec![BigRational::zero(); r.len() + 1 - b.len()];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let f = r.last().unwrap() / &lead;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &f * c;
        }
        q[shift] = f;
        r = trim(r);
    }
    trim(q)
}

#[derive(Clone, Copy, Debug)]
struct Cx {
    re: f64,
    im: f64,
}

impl Cx {
    fn norm(self) -> f64 {
        self.re.hypot(self.im)
    }
    fn mul(self, o: Cx) -> Cx {
        Cx {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
    fn sub(self, o: Cx) -> Cx {
        Cx {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
    fn div(self, o: Cx) -> Cx {
        let d = o.re * o.re + o.im * o.im;
        Cx {
            re: (self.re * o.re + self.im * o.im) / d,
            im: (self.im * o.re - self.re * o.im) / d,
        }
    }
}

/// Durand–Kerner.
fn numeric_roots(p: &[BigRational]) -> Vec<Cx> {
    let lead = p.last().unwrap().to_f64().unwrap_or(1.0);
    let c: Vec<f64> = p.iter().map(|x| x.to_f64().unwrap_or(0.0) / lead).collect();
    let deg = c.len() - 1;
    let evalc = |z: Cx| {
        c.iter()
            .rev()
            .fold(Cx { re: 0.0, im: 0.0 }, |acc, &a| {
                let m = acc.mul(z);
                Cx { re: m.re + a, im: m.im }
            })
    };
    let seed = Cx { re: 0.4, im: 0.9 };
    let mut z: Vec<Cx> = (0..deg)
        .map(|i| (0..i).fold(Cx { re: 1.0, im: 0.0 }, |acc, _| acc.mul(seed)))
        .collect();
    for _ in 0..500 {
        for i in 0..deg {
            let mut den = Cx { re: 1.0, im: 0.0 };
            for j in 0..deg {
                if i != j {
                    den = den.mul(z[i].sub(z[j]));
                }
            }
            z[i] = z[i].sub(evalc(z[i]).div(den));
        }
    }
    z
}

/// Laurent data at `s = 0` of `R(q^{-2ns})`, orders `-m ..= top`.
pub fn laurent_at_zero(cf: &ClosedForm, n: u32, top: usize) -> Result<Vec<LaurentTerm>> {
    let rest = check_unit_circle(&cf.den, cf.pole_order)?;
    let m = cf.pole_order;
    let c = t_expansion(&cf.num, &rest, m, top);
    let two_n = rat(2 * n as i64);
    Ok(c.into_iter()
        .enumerate()
        .map(|(idx, a)| {
            let j = idx as i64 - m as i64;
            let f = if j >= 0 {
                two_n.pow(j as i32)
            } else {
                BigRational::one() / two_n.pow((-j) as i32)
            };
            LaurentTerm {
                order: j,
                rational: a * f,
                lnq_power: j,
            }
        })
        .filter(|t| !t.rational.is_zero())
        .collect())
}

/// Principal part only.
pub fn principal_part(terms: &[LaurentTerm]) -> Vec<LaurentTerm> {
    terms.iter().filter(|t| t.order < 0).cloned().collect()
}

/// `Σ_t rational·(ln q)^{lnq_power}·s^{order}` in floating point.
pub fn laurent_value(terms: &[LaurentTerm], q: u64, s: f64) -> f64 {
    let l = (q as f64).ln();
    terms
        .iter()
        .map(|t| t.rational.to_f64().unwrap_or(f64::NAN) * l.powi(t.lnq_power as i32) * s.powi(t.order as i32))
        .sum()
}

/// `Σ_k c_k u^k` at `u = q^{-2ns}`, `c_k = P(k)` beyond the table, summed
/// until the terms are negligible.
pub fn series_value(fit: &PolyFit, coeffs: &[BigRational], q: u64, n: u32, s: f64) -> f64 {
    let u = (-(2.0 * n as f64) * s * (q as f64).ln()).exp();
    let head: Vec<f64> = coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    let pf: Vec<f64> = fit.poly.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    let terms = (80.0 / -u.ln()).ceil() as usize + coeffs.len();
    let (mut sum, mut comp, mut uk) = (0.0f64, 0.0f64, 1.0f64);
    for k in 0..terms {
        let c = if k < head.len() {
            head[k]
        } else {
            pf.iter().rev().fold(0.0, |acc, a| acc * k as f64 + a)
        };
        // Kahan summation
        let y = c * uk - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        uk *= u;
    }
    sum
}

#[derive(Clone, Debug, Serialize)]
pub struct NumericCheck {
    pub s: f64,
    pub series: f64,
    pub laurent: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportChecks {
    pub reexpansion_exact: bool,
    pub numeric: Vec<NumericCheck>,
    pub shift_invariant: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormOut {
    #[serde(serialize_with = "ser_poly")]
    pub num: Poly,
    #[serde(serialize_with = "ser_poly")]
    pub den: Poly,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidueReport {
    pub regime: String,
    /// every coefficient is zero
    pub vanishing: bool,
    pub n: u32,
    pub q: u64,
    pub k0: usize,
    #[serde(rename = "P", serialize_with = "ser_poly")]
    pub p_coeffs: Poly,
    pub closed_form: ClosedFormOut,
    pub laurent: Vec<LaurentTerm>,
    /// the `s^{-1}` coefficient
    pub residue: Option<LaurentTerm>,
    pub checks: ReportChecks,
}

/// Rational coordinates of a coefficient table; non-rational entries are rejected.
pub fn rational_coeffs(values: &[CharacterValue]) -> Result<Vec<BigRational>> {
    values
        .iter()
        .map(|v| {
            v.as_rational()
                .ok_or_else(|| Error::DomainError(format!("coefficient {v} is not rational")))
        })
        .collect()
}

/// `c_k → P → closed form → Laurent data`, with the exactness, numeric and
/// shift checks.
pub fn residue_report(
    coeffs: &[BigRational],
    n: u32,
    q: u64,
    max_degree: usize,
    regime: &str,
) -> Result<ResidueReport> {
    let fit = fit_polynomial(coeffs, max_degree)?;
    let cf = closed_form(&fit, coeffs);
    let reexpansion_exact = cf.expand(coeffs.len()) == coeffs;
    let full = laurent_at_zero(&cf, n, 2)?;
    let laurent: Vec<LaurentTerm> = full.iter().filter(|t| t.order <= 0).cloned().collect();
    let mut numeric = Vec::new();
    if !laurent.is_empty() && cf.pole_order > 0 {
        for s in [1e-3, 1e-4] {
            let series = series_value(&fit, coeffs, q, n, s);
            let approx = laurent_value(&full, q, s);
            numeric.push(NumericCheck {
                s,
                series,
                laurent: approx,
                rel_err: ((series - approx) / approx).abs(),
            });
        }
    }
    let shift_invariant = (1..=fit.k0 + 2).all(|drop| {
        let mut c = coeffs.to_vec();
        for x in c.iter_mut().take(drop.min(coeffs.len())) {
            *x = BigRational::zero();
        }
        match fit_polynomial(&c, max_degree) {
            Ok(f2) => {
                let cf2 = closed_form(&f2, &c);
                laurent_at_zero(&cf2, n, 0)
                    .map(|l| principal_part(&l) == principal_part(&laurent))
                    .unwrap_or(false)
            }
            Err(_) => false,
        }
    });
    let residue = laurent.iter().find(|t| t.order == -1).cloned();
    Ok(ResidueReport {
        regime: regime.to_string(),
        vanishing: coeffs.iter().all(|c| c.is_zero()),
        n,
        q,
        k0: fit.k0,
        p_coeffs: fit.poly.clone(),
        closed_form: ClosedFormOut {
            num: cf.num.clone(),
            den: cf.den.clone(),
        },
        laurent,
        residue,
        checks: ReportChecks {
            reexpansion_exact,
            numeric,
            shift_invariant,
        },
    })
}

/// Whether every numeric check is within `tol`.
pub fn numeric_ok(report: &ResidueReport, tol: f64) -> bool {
    report.checks.numeric.iter().all(|c| c.rel_err <= tol && c.rel_err.is_finite())
}
