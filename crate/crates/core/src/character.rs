//! Exact values in `Q[ζ_p]`.
//!
//! Stored in the basis `1, ζ, …, ζ^{p-2}`; `ζ^{p-1}` is rewritten as
//! `-(1 + ζ + … + ζ^{p-2})`. For `p = 2` this is just `Q` with `ζ = -1`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CharacterValue {
    p: u64,
    coords: Vec<BigRational>,
}

impl CharacterValue {
    pub fn zero(p: u64) -> Self {
        CharacterValue {
            p,
            coords: vec![BigRational::zero(); (p - 1) as usize],
        }
    }

    pub fn one(p: u64) -> Self {
        Self::rational(p, BigRational::one())
    }

    pub fn rational(p: u64, r: BigRational) -> Self {
        let mut v = Self::zero(p);
        v.coords[0] = r;
        v
    }

    pub fn from_int(p: u64, n: i64) -> Self {
        Self::rational(p, BigRational::from_integer(BigInt::from(n)))
    }

    /// `ζ_p^j`.
    pub fn root(p: u64, j: u64) -> Self {
        let mut counts = vec![0i64; p as usize];
        counts[(j % p) as usize] = 1;
        Self::from_counts(p, &counts)
    }

    /// `Σ_j counts[j]·ζ^j` for `j` in `0..p`.
    pub fn from_counts(p: u64, counts: &[i64]) -> Self {
        debug_assert_eq!(counts.len(), p as usize);
        let last = counts[p as usize - 1];
        CharacterValue {
            p,
            coords: counts[..p as usize - 1]
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c - last)))
                .collect(),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn from_coords(p: u64, coords: Vec<BigRational>) -> Self {
        assert_eq!(coords.len(), (p - 1) as usize);
        CharacterValue { p, coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// The rational value if it lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.coords[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| self.coords[0].clone())
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        CharacterValue {
            p: self.p,
            coords: self.coords.iter().map(|c| c * r).collect(),
        }
    }

    fn full(&self) -> Vec<BigRational> {
        let mut v = self.coords.clone();
        v.push(BigRational::zero());
        v
    }

    fn reduce(p: u64, full: Vec<BigRational>) -> Self {
        let last = full[p as usize - 1].clone();
        CharacterValue {
            p,
            coords: full[..p as usize - 1].iter().map(|c| c - &last).collect(),
        }
    }

    /// Raises to the `k`-th Galois conjugate `ζ ↦ ζ^k`.
    pub fn galois(&self, k: u64) -> Self {
        let p = self.p;
        let mut full = vec![BigRational::zero(); p as usize];
        for (j, c) in self.full().into_iter().enumerate() {
            full[(j as u64 * k % p) as usize] += c;
        }
        Self::reduce(p, full)
    }

    /// Approximate complex value, for diagnostics only.
    pub fn to_complex(&self) -> (f64, f64) {
        use num_traits::ToPrimitive;
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, c) in self.coords.iter().enumerate() {
            let t = 2.0 * std::f64::consts::PI * j as f64 / self.p as f64;
            let c = c.to_f64().unwrap_or(f64::NAN);
            re += c * t.cos();
            im += c * t.sin();
        }
        (re, im)
    }
}

impl Add for &CharacterValue {
    type Output = CharacterValue;
    fn add(self, o: &CharacterValue) -> CharacterValue {
        assert_eq!(self.p, o.p);
        CharacterValue {
            p: self.p,
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CharacterValue {
    type Output = CharacterValue;
    fn sub(self, o: &CharacterValue) -> CharacterValue {
        self + &(-o)
    }
}

impl Neg for &CharacterValue {
    type Output = CharacterValue;
    fn neg(self) -> CharacterValue {
        CharacterValue {
            p: self.p,
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul for &CharacterValue {
    type Output = CharacterValue;
    fn mul(self, o: &CharacterValue) -> CharacterValue {
        assert_eq!(self.p, o.p);
        let p = self.p as usize;
        let mut full = vec![BigRational::zero(); p];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coords.iter().enumerate() {
                if !b.is_zero() {
                    full[(i + j) % p] += a * b;
                }
            }
        }
        CharacterValue::reduce(self.p, full)
    }
}

impl fmt::Display for CharacterValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (j, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            parts.push(match j {
                0 => format!("{c}"),
                _ => format!("({c})*z^{j}"),
            });
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl Serialize for CharacterValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        v.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_multiply() {
        for p in [2u64, 3, 5, 7] {
            for a in 0..p {
                for b in 0..p {
                    let lhs = &CharacterValue::root(p, a) * &CharacterValue::root(p, b);
                    assert_eq!(lhs, CharacterValue::root(p, a + b));
                }
            }
        }
    }

    #[test]
    fn sum_of_roots_vanishes() {
        for p in [2u64, 3, 5] {
            let mut s = CharacterValue::zero(p);
            for j in 0..p {
                s = &s + &CharacterValue::root(p, j);
            }
            assert!(s.is_zero());
        }
    }

    #[test]
    fn quadratic_case_is_rational() {
        let z = CharacterValue::root(2, 1);
        assert_eq!(z.as_rational(), Some(BigRational::from_integer((-1).into())));
    }
}
