//! Probabilists' Hermite polynomials and Wiener-chaos decomposition of
//! polynomial functionals.
//!
//! For a polynomial `f` on ℝⁿ the chaos expansion is finite and exact:
//! `f = Σ_α c_α H_α` with `H_α(x) = ∏ H_{αᵢ}(xᵢ)`, and the k-th chaos
//! projection keeps the terms with `|α| = k`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::PolyFunctional;
use crate::integrate::{lq_norm, QuadratureConfig};
use crate::malliavin::MeanTensor;
use crate::poly::{factorial, parse_rational, rat, MultiIndex, QPoly, TermJson};

/// H_k with exact monomial coefficients, lowest power first.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitePoly {
    pub degree: u32,
    pub coefficients: Vec<BigRational>,
}

/// H_k via H_{k+1}(t) = t·H_k(t) − k·H_{k−1}(t), H_0 = 1, H_1 = t.
pub fn hermite(k: u32) -> HermitePoly {
    let mut prev: Vec<BigInt> = vec![BigInt::one()];
    if k == 0 {
        return HermitePoly { degree: 0, coefficients: vec![rat(1)] };
    }
    let mut cur: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
    for j in 1..k {
        let mut next = vec![BigInt::zero(); cur.len() + 1];
        for (p, c) in cur.iter().enumerate() {
            next[p + 1] += c;
        }
        for (p, c) in prev.iter().enumerate() {
            next[p] -= c * BigInt::from(j);
        }
        prev = std::mem::replace(&mut cur, next);
    }
    HermitePoly {
        degree: k,
        coefficients: cur.into_iter().map(BigRational::from_integer).collect(),
    }
}

impl HermitePoly {
    pub fn eval(&self, t: &BigRational) -> BigRational {
        self.coefficients
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * t + c)
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        use num_traits::ToPrimitive;
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * t + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Formal derivative in the monomial basis.
    pub fn derivative(&self) -> Vec<BigRational> {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(p, c)| c * rat(p as i64))
            .collect()
    }

    /// H_k(x_var) as a polynomial in `dim` variables.
    pub fn to_poly(&self, dim: usize, var: usize) -> QPoly {
        let mut p = QPoly::zero(dim);
        for (pow, c) in self.coefficients.iter().enumerate() {
            let mut e = vec![0; dim];
            e[var] = pow as u32;
            p.add_term(MultiIndex::new(e), c.clone());
        }
        p
    }
}

/// t^m = Σ_j m! / (2^j j! (m−2j)!) · H_{m−2j}(t), as (index, coefficient) pairs.
fn monomial_in_hermite(m: u32) -> Vec<(u32, BigRational)> {
    (0..=m / 2)
        .map(|j| {
            let num = factorial(m);
            let den = num_traits::pow(BigInt::from(2), j as usize) * factorial(j) * factorial(m - 2 * j);
            (m - 2 * j, BigRational::new(num, den))
        })
        .collect()
}

/// Finite expansion Σ_α c_α H_α of a scalar polynomial on ℝⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteExpansion {
    pub dim: usize,
    pub coeffs: BTreeMap<MultiIndex, BigRational>,
}

#[derive(Serialize, Deserialize)]
struct HermiteExpansionJson {
    dim: usize,
    terms: Vec<TermJson>,
}

/// Exact Hermite expansion of `p`, which must live in dimension `dim`.
pub fn to_hermite(p: &QPoly, dim: usize) -> Result<HermiteExpansion> {
    if p.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
    }
    let mut cache: BTreeMap<u32, Vec<(u32, BigRational)>> = BTreeMap::new();
    let mut coeffs: BTreeMap<MultiIndex, BigRational> = BTreeMap::new();
    for (alpha, c) in p.terms() {
        let per_var: Vec<Vec<(u32, BigRational)>> = alpha
            .exponents()
            .iter()
            .map(|&m| cache.entry(m).or_insert_with(|| monomial_in_hermite(m)).clone())
            .collect();
        // Cartesian product over variables.
        let mut partial: Vec<(Vec<u32>, BigRational)> = vec![(Vec::with_capacity(dim), c.clone())];
        for opts in &per_var {
            let mut next = Vec::with_capacity(partial.len() * opts.len());
            for (idx, w) in &partial {
                for (k, v) in opts {
                    let mut i2 = idx.clone();
                    i2.push(*k);
                    next.push((i2, w * v));
                }
            }
            partial = next;
        }
        for (idx, w) in partial {
            let key = MultiIndex::new(idx);
            let e = coeffs.entry(key).or_insert_with(BigRational::zero);
            *e += w;
        }
    }
    coeffs.retain(|_, v| !v.is_zero());
    Ok(HermiteExpansion { dim, coeffs })
}

/// Σ_α c_α H_α back in the monomial basis.
pub fn from_hermite(e: &HermiteExpansion) -> QPoly {
    let max_deg = e
        .coeffs
        .keys()
        .flat_map(|a| a.exponents().iter().copied())
        .max()
        .unwrap_or(0);
    let table: Vec<HermitePoly> = (0..=max_deg).map(hermite).collect();
    let mut out = QPoly::zero(e.dim);
    for (alpha, c) in &e.coeffs {
        let mut term = QPoly::constant(e.dim, c.clone());
        for (i, &a) in alpha.exponents().iter().enumerate() {
            if a > 0 {
                term = &term * &table[a as usize].to_poly(e.dim, i);
            }
        }
        out = &out + &term;
    }
    out
}

impl HermiteExpansion {
    /// E[FG] = Σ_α α! c_α d_α.
    pub fn inner_product(&self, other: &HermiteExpansion) -> BigRational {
        self.coeffs
            .iter()
            .filter_map(|(a, c)| other.coeffs.get(a).map(|d| BigRational::from_integer(a.factorial()) * c * d))
            .fold(BigRational::zero(), |acc, v| acc + v)
    }

    pub fn l2_norm_sq(&self) -> BigRational {
        self.inner_product(self)
    }

    /// ‖J_k F‖² = Σ_{|α|=k} α! c_α².
    pub fn chaos_l2_sq(&self, k: u32) -> BigRational {
        self.coeffs
            .iter()
            .filter(|(a, _)| a.degree() == k)
            .map(|(a, c)| BigRational::from_integer(a.factorial()) * c * c)
            .fold(BigRational::zero(), |acc, v| acc + v)
    }

    pub fn chaos_part(&self, k: u32) -> HermiteExpansion {
        HermiteExpansion {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(a, _)| a.degree() == k)
                .map(|(a, c)| (a.clone(), c.clone()))
                .collect(),
        }
    }

    /// Highest chaos order present.
    pub fn max_order(&self) -> u32 {
        self.coeffs.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// Degree of the first coefficient outside chaos `k`, if any.
    pub fn impurity(&self, k: u32) -> Option<u32> {
        self.coeffs.keys().map(MultiIndex::degree).find(|&d| d != k)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let j = HermiteExpansionJson {
            dim: self.dim,
            terms: self
                .coeffs
                .iter()
                .map(|(a, c)| TermJson { alpha: a.exponents().to_vec(), coeff: c.to_string() })
                .collect(),
        };
        serde_json::to_value(j).expect("expansion serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: HermiteExpansionJson = serde_json::from_value(v.clone())?;
        let mut coeffs = BTreeMap::new();
        for t in &j.terms {
            if t.alpha.len() != j.dim {
                return Err(Error::DimensionMismatch { expected: j.dim, got: t.alpha.len() });
            }
            let c = parse_rational(&t.coeff)?;
            let e = coeffs.entry(MultiIndex::new(t.alpha.clone())).or_insert_with(BigRational::zero);
            *e += c;
        }
        coeffs.retain(|_, v: &mut BigRational| !v.is_zero());
        Ok(HermiteExpansion { dim: j.dim, coeffs })
    }
}

/// Per-component Hermite expansions of a (possibly vector-valued) functional.
pub fn expand(f: &PolyFunctional) -> Vec<HermiteExpansion> {
    f.components()
        .iter()
        .map(|c| to_hermite(c, f.dim()).expect("components share the functional dimension"))
        .collect()
}

/// J_k F, the projection onto the k-th Wiener chaos.
pub fn project(f: &PolyFunctional, k: u32) -> PolyFunctional {
    let comps = expand(f).iter().map(|e| from_hermite(&e.chaos_part(k))).collect();
    PolyFunctional::new(f.dim(), comps).expect("projection preserves the shape")
}

/// ‖J_k F‖²_{L²} exactly (Euclidean over components).
pub fn chaos_l2_sq(f: &PolyFunctional, k: u32) -> BigRational {
    expand(f).iter().map(|e| e.chaos_l2_sq(k)).fold(BigRational::zero(), |a, v| a + v)
}

pub fn l2_norm_chaos(f: &PolyFunctional, k: u32) -> f64 {
    use num_traits::ToPrimitive;
    chaos_l2_sq(f, k).to_f64().unwrap_or(f64::NAN).sqrt()
}

/// True iff every expansion coefficient lies in chaos `order`.
pub fn is_chaos_pure(f: &PolyFunctional, order: u32) -> bool {
    expand(f).iter().all(|e| e.impurity(order).is_none())
}

/// | ‖E[D^k F]‖ − √(k!)·‖J_k F‖ |, evaluated on squared quantities first so the
/// rational path returns exactly zero.
pub fn chaos_identity_check(f: &PolyFunctional, k: u32, mean: &MeanTensor) -> Result<f64> {
    use num_traits::ToPrimitive;
    if mean.order != k as usize {
        return Err(Error::OrderMismatch { expected: k as usize, got: mean.order });
    }
    let lhs_sq = mean.norm_sq();
    let rhs_sq = BigRational::from_integer(factorial(k)) * chaos_l2_sq(f, k);
    if lhs_sq == rhs_sq {
        return Ok(0.0);
    }
    let a = lhs_sq.to_f64().unwrap_or(f64::NAN).sqrt();
    let b = rhs_sq.to_f64().unwrap_or(f64::NAN).sqrt();
    Ok((a - b).abs())
}

/// Both sides of the chaos hypercontractivity estimate
/// `‖F‖_s ≤ ‖F‖_r ≤ ((r−1)/(s−1))^{ℓ/2} ‖F‖_s`.
#[derive(Clone, Debug, Serialize)]
pub struct HypercontractivityRatio {
    pub order: u32,
    pub s: f64,
    pub r: f64,
    pub norm_s: f64,
    pub norm_r: f64,
    /// ((r−1)/(s−1))^{ℓ/2}·‖F‖_s
    pub rhs: f64,
    pub error_estimate: f64,
}

impl HypercontractivityRatio {
    pub fn lhs(&self) -> f64 {
        self.norm_r
    }
}

pub fn hypercontractivity_ratio(
    f: &PolyFunctional,
    order: u32,
    s: f64,
    r: f64,
    cfg: &QuadratureConfig,
) -> Result<HypercontractivityRatio> {
    if !(s > 1.0 && r >= s && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("need 1 < s ≤ r < ∞, got s = {s}, r = {r}")));
    }
    for e in expand(f) {
        if let Some(found) = e.impurity(order) {
            return Err(Error::NotChaosPure { order, found });
        }
    }
    let ns = lq_norm(f, s, cfg)?;
    let nr = lq_norm(f, r, cfg)?;
    let factor = ((r - 1.0) / (s - 1.0)).powf(order as f64 / 2.0);
    Ok(HypercontractivityRatio {
        order,
        s,
        r,
        norm_s: ns.value,
        norm_r: nr.value,
        rhs: factor * ns.value,
        error_estimate: nr.error_estimate + factor * ns.error_estimate,
    })
}

/// Data for the L¹ equivalence on a fixed chaos: the Hölder interpolation
/// `‖F‖₂ ≤ ‖F‖₁^{1/4}‖F‖₃^{3/4}`, the hypercontractive step
/// `‖F‖₃ ≤ 2^{ℓ/2}‖F‖₂`, and the two candidate constants 2^{3ℓ/2} (what the
/// chain yields) and 2^{3ℓ/8}.
#[derive(Clone, Debug, Serialize)]
pub struct ChaosL1Equivalence {
    pub order: u32,
    pub norm_1: f64,
    pub norm_2: f64,
    pub norm_3: f64,
    pub holder_rhs: f64,
    pub hyper_rhs: f64,
    /// ‖F‖₂ / ‖F‖₁
    pub ratio: f64,
    pub chain_constant: f64,
    pub stated_constant: f64,
    pub error_estimate: f64,
}

pub fn chaos_l1_equivalence(f: &PolyFunctional, order: u32, cfg: &QuadratureConfig) -> Result<ChaosL1Equivalence> {
    for e in expand(f) {
        if let Some(found) = e.impurity(order) {
            return Err(Error::NotChaosPure { order, found });
        }
    }
    let n1 = lq_norm(f, 1.0, cfg)?;
    let n2 = lq_norm(f, 2.0, cfg)?;
    let n3 = lq_norm(f, 3.0, cfg)?;
    let l = order as f64;
    Ok(ChaosL1Equivalence {
        order,
        norm_1: n1.value,
        norm_2: n2.value,
        norm_3: n3.value,
        holder_rhs: n1.value.powf(0.25) * n3.value.powf(0.75),
        hyper_rhs: 2f64.powf(l / 2.0) * n2.value,
        ratio: if n1.value > 0.0 { n2.value / n1.value } else { 0.0 },
        chain_constant: 2f64.powf(3.0 * l / 2.0),
        stated_constant: 2f64.powf(3.0 * l / 8.0),
        error_estimate: n1.error_estimate + n2.error_estimate + n3.error_estimate,
    })
}

/// E[H_j H_k] computed from exact Gaussian moments.
pub fn hermite_product_moment(j: u32, k: u32) -> BigRational {
    let hj = hermite(j).to_poly(1, 0);
    let hk = hermite(k).to_poly(1, 0);
    hj.expectation_of_product(&hk)
}
