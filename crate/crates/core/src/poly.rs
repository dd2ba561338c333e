//! Sparse multivariate polynomials over exact rationals or `f64`.
//!
//! Terms are keyed by [`MultiIndex`] and kept in graded lexicographic order,
//! which makes serialization and iteration deterministic.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent vector α = (α₁,…,αₙ) of a monomial `x^α`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// Unit index e_i.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree |α|.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// α! = ∏ αᵢ!
    pub fn factorial(&self) -> BigInt {
        self.0
            .iter()
            .fold(BigInt::one(), |acc, &a| acc * factorial(a))
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All multi-indices of dimension `dim` with total degree exactly `degree`,
    /// in graded lexicographic order.
    pub fn all_of_degree(dim: usize, degree: u32) -> Vec<MultiIndex> {
        fn rec(dim: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if cur.len() + 1 == dim {
                cur.push(left);
                out.push(MultiIndex(cur.clone()));
                cur.pop();
                return;
            }
            for a in 0..=left {
                cur.push(a);
                rec(dim, left - a, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if dim == 0 {
            return out;
        }
        rec(dim, degree, &mut Vec::with_capacity(dim), &mut out);
        out.sort();
        out
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

pub fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// E[Z^d] for a standard normal Z: (d−1)!! for even d, 0 for odd d.
pub fn gaussian_moment(d: u32) -> BigInt {
    static TABLE: OnceLock<Vec<BigInt>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(257);
        let mut acc = BigInt::one();
        for d in 0..=256u32 {
            if d % 2 == 1 {
                t.push(BigInt::zero());
            } else {
                if d >= 2 {
                    acc *= BigInt::from(d - 1);
                }
                t.push(acc.clone());
            }
        }
        t
    });
    match table.get(d as usize) {
        Some(v) => v.clone(),
        None if d % 2 == 1 => BigInt::zero(),
        None => (1..d).step_by(2).fold(BigInt::one(), |a, k| a * BigInt::from(k)),
    }
}

/// Coefficient ring used by [`Poly`].
pub trait Coeff:
    Clone
    + fmt::Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_bigint(v: &BigInt) -> Self;
    fn to_f64(&self) -> f64;
}

impl Coeff for BigRational {
    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Coeff for f64 {
    fn from_bigint(v: &BigInt) -> Self {
        v.to_f64().unwrap_or(f64::INFINITY)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidParameter(format!("non-finite value {x}")))
}

/// Parses "p", "p/q" or a decimal string such as "-1.25e-3" into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational coefficient {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// One serialized polynomial term: `{"alpha":[…],"coeff":"p/q"}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermJson {
    pub alpha: Vec<u32>,
    pub coeff: String,
}

/// Sparse polynomial in `dim` variables.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly<C: Coeff> {
    dim: usize,
    terms: BTreeMap<MultiIndex, C>,
}

pub type QPoly = Poly<BigRational>;

impl<C: Coeff> Poly<C> {
    pub fn zero(dim: usize) -> Self {
        Poly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: C) -> Self {
        Self::monomial(MultiIndex::zero(dim), c)
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, C::one())
    }

    /// The coordinate function x_i (0-based).
    pub fn var(dim: usize, i: usize) -> Self {
        Self::monomial(MultiIndex::unit(dim, i), C::one())
    }

    pub fn monomial(alpha: MultiIndex, c: C) -> Self {
        let mut p = Poly::zero(alpha.dim());
        p.add_term(alpha, c);
        p
    }

    /// Builds a polynomial from (α, c) pairs; repeated α are summed.
    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (MultiIndex, C)>) -> Result<Self> {
        let mut p = Poly::zero(dim);
        for (alpha, c) in terms {
            if alpha.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: alpha.dim() });
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> C {
        self.terms.get(alpha).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// Largest exponent of each variable.
    pub fn degree_per_var(&self) -> Vec<u32> {
        let mut d = vec![0; self.dim];
        for alpha in self.terms.keys() {
            for (di, &a) in d.iter_mut().zip(alpha.exponents()) {
                *di = (*di).max(a);
            }
        }
        d
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: C) {
        debug_assert_eq!(alpha.dim(), self.dim);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(alpha) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Poly::zero(self.dim);
        }
        Poly {
            dim: self.dim,
            terms: self.terms.iter().map(|(a, v)| (a.clone(), v.clone() * c.clone())).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Poly::one(self.dim);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative ∂/∂x_i (0-based).
    pub fn partial(&self, i: usize) -> Result<Self> {
        if i >= self.dim {
            return Err(Error::IndexOutOfRange { index: i, dim: self.dim });
        }
        let mut out = Poly::zero(self.dim);
        for (alpha, c) in &self.terms {
            let a = alpha.0[i];
            if a == 0 {
                continue;
            }
            let mut beta = alpha.clone();
            beta.0[i] -= 1;
            out.add_term(beta, c.clone() * C::from_bigint(&BigInt::from(a)));
        }
        Ok(out)
    }

    /// Mixed partial derivative along the listed variables.
    pub fn partial_multi(&self, vars: &[usize]) -> Result<Self> {
        let mut p = self.clone();
        for &i in vars {
            p = p.partial(i)?;
        }
        Ok(p)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(self.eval_f64_unchecked(x))
    }

    pub(crate) fn eval_f64_unchecked(&self, x: &[f64]) -> f64 {
        let degs = self.degree_per_var();
        let powers: Vec<Vec<f64>> = x
            .iter()
            .zip(&degs)
            .map(|(&xi, &d)| {
                let mut p = Vec::with_capacity(d as usize + 1);
                let mut acc = 1.0;
                for _ in 0..=d {
                    p.push(acc);
                    acc *= xi;
                }
                p
            })
            .collect();
        self.terms
            .iter()
            .map(|(alpha, c)| {
                alpha
                    .0
                    .iter()
                    .zip(&powers)
                    .fold(c.to_f64(), |acc, (&a, pw)| acc * pw[a as usize])
            })
            .sum()
    }

    /// Exact evaluation in the coefficient ring.
    pub fn eval(&self, x: &[C]) -> Result<C> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let mut total = C::zero();
        for (alpha, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &a) in x.iter().zip(&alpha.0) {
                for _ in 0..a {
                    t = t * xi.clone();
                }
            }
            total = total + t;
        }
        Ok(total)
    }

    /// E[p(Z)] for Z ~ N(0, Iₙ), computed from the Gaussian moments.
    pub fn expectation(&self) -> C {
        let mut total = C::zero();
        for (alpha, c) in &self.terms {
            if alpha.0.iter().any(|a| a % 2 == 1) {
                continue;
            }
            let m = alpha.0.iter().fold(BigInt::one(), |acc, &a| acc * gaussian_moment(a));
            total = total + c.clone() * C::from_bigint(&m);
        }
        total
    }

    /// Substitutes polynomial `subs[i]` (all in a common dimension) for x_i.
    pub fn compose(&self, subs: &[Poly<C>]) -> Result<Self> {
        if subs.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: subs.len() });
        }
        let out_dim = subs.first().map(|s| s.dim).unwrap_or(0);
        if subs.iter().any(|s| s.dim != out_dim) {
            return Err(Error::InvalidParameter("substitutions must share one dimension".into()));
        }
        let degs = self.degree_per_var();
        let powers: Vec<Vec<Poly<C>>> = subs
            .iter()
            .zip(&degs)
            .map(|(s, &d)| {
                let mut v = vec![Poly::one(out_dim)];
                for k in 1..=d as usize {
                    let next = &v[k - 1] * s;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Poly::zero(out_dim);
        for (alpha, c) in &self.terms {
            let mut t = Poly::constant(out_dim, c.clone());
            for (i, &a) in alpha.0.iter().enumerate() {
                if a > 0 {
                    t = &t * &powers[i][a as usize];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Embeds into a larger number of variables (new variables appended).
    pub fn extend_dim(&self, new_dim: usize) -> Self {
        assert!(new_dim >= self.dim);
        Poly {
            dim: new_dim,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| {
                    let mut e = a.0.clone();
                    e.resize(new_dim, 0);
                    (MultiIndex(e), c.clone())
                })
                .collect(),
        }
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        let mut out = Poly::zero(self.dim);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), f(c));
        }
        out
    }

    pub fn to_f64(&self) -> Poly<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    /// Keeps only the terms of total degree `k`.
    pub fn homogeneous_part(&self, k: u32) -> Self {
        Poly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(a, _)| a.degree() == k)
                .map(|(a, c)| (a.clone(), c.clone()))
                .collect(),
        }
    }
}

impl Poly<BigRational> {
    pub fn to_json_terms(&self) -> Vec<TermJson> {
        self.terms
            .iter()
            .map(|(a, c)| TermJson { alpha: a.0.clone(), coeff: c.to_string() })
            .collect()
    }

    pub fn from_json_terms(dim: usize, terms: &[TermJson]) -> Result<Self> {
        Poly::from_terms(
            dim,
            terms
                .iter()
                .map(|t| Ok((MultiIndex::new(t.alpha.clone()), parse_rational(&t.coeff)?)))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Integer numerators over a common positive denominator.
    pub(crate) fn integer_form(&self) -> (Vec<(&MultiIndex, BigInt)>, BigInt) {
        let den = self
            .terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let nums = self
            .terms
            .iter()
            .map(|(a, c)| (a, c.numer() * (&den / c.denom())))
            .collect();
        (nums, den)
    }

    /// Exact E[p·q] without materializing the product.
    pub fn expectation_of_product(&self, other: &QPoly) -> BigRational {
        let (na, da) = self.integer_form();
        let (nb, db) = other.integer_form();
        let mut total = BigInt::zero();
        for (a, ca) in &na {
            for (b, cb) in &nb {
                if a.0.iter().zip(&b.0).any(|(x, y)| (x + y) % 2 == 1) {
                    continue;
                }
                let m = a
                    .0
                    .iter()
                    .zip(&b.0)
                    .fold(BigInt::one(), |acc, (x, y)| acc * gaussian_moment(x + y));
                total += ca * cb * m;
            }
        }
        BigRational::new(total, da * db)
    }

    /// Largest absolute coefficient, as f64.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| Coeff::to_f64(&c.abs())).fold(0.0, f64::max)
    }
}

impl<C: Coeff> Add for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: &Poly<C>) -> Poly<C> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in polynomial addition");
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(a.clone(), c.clone());
        }
        out
    }
}

impl<C: Coeff> Sub for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: &Poly<C>) -> Poly<C> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in polynomial subtraction");
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(a.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coeff> Mul for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: &Poly<C>) -> Poly<C> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in polynomial product");
        let mut out = Poly::zero(self.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.add(b), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Coeff> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        Poly {
            dim: self.dim,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), -c.clone())).collect(),
        }
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (alpha, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (i, &a) in alpha.0.iter().enumerate() {
                match a {
                    0 => {}
                    1 => write!(f, "·x{}", i + 1)?,
                    _ => write!(f, "·x{}^{a}", i + 1)?,
                }
            }
        }
        Ok(())
    }
}
