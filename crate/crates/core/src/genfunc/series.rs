use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive};

use crate::error::{Error, Result};

/// Coefficient field for series and polynomials: `f64` or exact `BigRational`.
pub trait Coeff: Clone + PartialEq + fmt::Debug + fmt::Display + Num + std::ops::Neg<Output = Self> + Send + Sync {
    const EXACT: bool;
    fn to_f64(&self) -> f64;
    fn abs_value(&self) -> Self;
}

impl Coeff for f64 {
    const EXACT: bool = false;
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs_value(&self) -> Self {
        self.abs()
    }
}

impl Coeff for BigRational {
    const EXACT: bool = true;
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn abs_value(&self) -> Self {
        self.abs()
    }
}

/// Parses `"p/q"`, an integer or a plain decimal such as `"0.125"` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Validation(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q == BigInt::from(0) {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = if digits.is_empty() { BigInt::from(0) } else { digits.parse().map_err(|_| bad())? };
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Sparse polynomial in x, y keyed by `(deg_x, deg_y)`; zero terms are never stored.
#[derive(Clone, PartialEq)]
pub struct BivariatePolynomial<C> {
    terms: BTreeMap<(usize, usize), C>,
}

impl<C: Coeff> fmt::Debug for BivariatePolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<C: Coeff> fmt::Display for BivariatePolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms_grlex();
        if terms.is_empty() {
            return f.write_str("0");
        }
        for (k, ((i, j), c)) in terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})")?;
            match i {
                0 => {}
                1 => f.write_str("·x")?,
                _ => write!(f, "·x^{i}")?,
            }
            match j {
                0 => {}
                1 => f.write_str("·y")?,
                _ => write!(f, "·y^{j}")?,
            }
        }
        Ok(())
    }
}

impl<C: Coeff> Default for BivariatePolynomial<C> {
    fn default() -> Self {
        BivariatePolynomial { terms: BTreeMap::new() }
    }
}

impl<C: Coeff> BivariatePolynomial<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: C, i: usize, j: usize) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((usize, usize), C)>) -> Self {
        let mut p = Self::zero();
        for ((i, j), c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    pub fn add_term(&mut self, i: usize, j: usize, c: C) {
        let slot = self.terms.entry((i, j)).or_insert_with(C::zero);
        *slot = slot.clone() + c;
        if slot.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn coeff(&self, i: usize, j: usize) -> C {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Ascending total degree; within a degree, higher x-exponent first.
    pub fn terms_grlex(&self) -> Vec<((usize, usize), C)> {
        let mut out: Vec<_> = self.terms.iter().map(|(k, c)| (*k, c.clone())).collect();
        out.sort_by(|((a, b), _), ((c, d), _)| (a + b).cmp(&(c + d)).then(c.cmp(a)));
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &C)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((i, j), c) in &other.terms {
            out.add_term(*i, *j, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| (*k, -c.clone())))
    }

    pub fn scale(&self, s: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| (*k, c.clone() * s.clone())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for ((i, j), a) in &self.terms {
            for ((k, l), b) in &other.terms {
                out.add_term(i + k, j + l, a.clone() * b.clone());
            }
        }
        out
    }

    /// Multiply by `x^i y^j`.
    pub fn shift(&self, i: usize, j: usize) -> Self {
        Self::from_terms(self.terms.iter().map(|((a, b), c)| ((a + i, b + j), c.clone())))
    }

    pub fn max_degree(&self) -> (usize, usize) {
        self.terms.keys().fold((0, 0), |(a, b), (i, j)| (a.max(*i), b.max(*j)))
    }

    pub fn eval(&self, x: &C, y: &C) -> C {
        self.terms
            .iter()
            .fold(C::zero(), |acc, ((i, j), c)| acc + c.clone() * num_traits::pow(x.clone(), *i) * num_traits::pow(y.clone(), *j))
    }

    /// Largest coefficient difference, as a double.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> BivariatePolynomial<D> {
        BivariatePolynomial::from_terms(self.terms.iter().map(|(k, c)| (*k, f(c))))
    }
}

/// Dense truncated series `Σ c[m][n] x^m y^n`, `0 ≤ m ≤ M`, `0 ≤ n ≤ N`.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariateSeries<C> {
    m: usize,
    n: usize,
    coeffs: Vec<C>,
}

impl<C: Coeff> BivariateSeries<C> {
    pub fn zeros(m: usize, n: usize) -> Self {
        BivariateSeries { m, n, coeffs: vec![C::zero(); (m + 1) * (n + 1)] }
    }

    pub fn from_fn(m: usize, n: usize, mut f: impl FnMut(usize, usize) -> C) -> Self {
        let mut s = Self::zeros(m, n);
        for i in 0..=m {
            for j in 0..=n {
                s.coeffs[i * (n + 1) + j] = f(i, j);
            }
        }
        s
    }

    pub fn from_polynomial(p: &BivariatePolynomial<C>, m: usize, n: usize) -> Self {
        let mut s = Self::zeros(m, n);
        for ((i, j), c) in p.iter() {
            if *i <= m && *j <= n {
                s.coeffs[i * (n + 1) + j] = c.clone();
            }
        }
        s
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn get(&self, i: usize, j: usize) -> &C {
        &self.coeffs[i * (self.n + 1) + j]
    }

    pub fn set(&mut self, i: usize, j: usize, c: C) {
        self.coeffs[i * (self.n + 1) + j] = c;
    }

    /// `(m, n, c)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, &C)> + '_ {
        self.coeffs.iter().enumerate().map(|(k, c)| (k / (self.n + 1), k % (self.n + 1), c))
    }

    fn check_orders(&self, other: &Self) -> Result<()> {
        if self.orders() != other.orders() {
            return Err(Error::Validation(format!(
                "truncation orders differ: {:?} vs {:?}",
                self.orders(),
                other.orders()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_orders(other)?;
        Ok(BivariateSeries {
            m: self.m,
            n: self.n,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() + b.clone()).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_orders(other)?;
        Ok(BivariateSeries {
            m: self.m,
            n: self.n,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() - b.clone()).collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_orders(other)?;
        let mut out = Self::zeros(self.m, self.n);
        for i in 0..=self.m {
            for j in 0..=self.n {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..=self.m - i {
                    for l in 0..=self.n - j {
                        let b = other.get(k, l);
                        if !b.is_zero() {
                            let slot = &mut out.coeffs[(i + k) * (self.n + 1) + j + l];
                            *slot = slot.clone() + a.clone() * b.clone();
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// `self / other`; needs `other[0][0] ≠ 0`.
    pub fn divide(&self, other: &Self) -> Result<Self> {
        self.check_orders(other)?;
        let lead = other.get(0, 0).clone();
        if lead.is_zero() {
            return Err(Error::Domain("series division by a series with zero constant term".into()));
        }
        let support: Vec<(usize, usize, C)> =
            other.cells().filter(|(i, j, c)| (*i, *j) != (0, 0) && !c.is_zero()).map(|(i, j, c)| (i, j, c.clone())).collect();
        let mut out = Self::zeros(self.m, self.n);
        for i in 0..=self.m {
            for j in 0..=self.n {
                let mut acc = self.get(i, j).clone();
                for (k, l, q) in &support {
                    if *k <= i && *l <= j {
                        acc = acc - q.clone() * out.get(i - k, j - l).clone();
                    }
                }
                out.set(i, j, acc / lead.clone());
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> BivariateSeries<D> {
        BivariateSeries { m: self.m, n: self.n, coeffs: self.coeffs.iter().map(f).collect() }
    }
}
