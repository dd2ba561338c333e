//! Malliavin derivatives D^ℓF and the Gaussian Sobolev norms built from them.
//!
//! D^ℓF is the dense tensor of ℓ-th partial derivatives of every component,
//! flattened as ((i₁·n + i₂)·n + … + i_ℓ)·J + j. Its pointwise norm is the
//! Frobenius norm over all indices, the 𝒱 = ℝ^J index included. D⁰F = F.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{NumericFunctional, PolyFunctional};
use crate::integrate::{lq_norm_field, lq_norm_sos, IntegralResult, QuadratureConfig, SquaredNormField, SumOfSquares};
use crate::poly::{factorial, QPoly, TermJson};

#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeTensor {
    pub order: usize,
    pub dim: usize,
    pub codim: usize,
    entries: Vec<QPoly>,
}

fn flat_index(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

/// All non-decreasing index tuples of length `order` over 0..dim.
fn sorted_tuples(dim: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..order {
        let mut next = Vec::new();
        for t in &out {
            let start = t.last().copied().unwrap_or(0);
            for i in start..dim {
                let mut u = t.clone();
                u.push(i);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

/// Number of distinct orderings of a sorted tuple: ℓ!/∏ mᵢ!.
fn multiplicity(t: &[usize]) -> BigInt {
    let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
    for &i in t {
        *counts.entry(i).or_default() += 1;
    }
    counts.values().fold(factorial(t.len() as u32), |acc, &m| acc / factorial(m))
}

/// D^ℓF, exact. Each distinct mixed partial is computed once and copied to
/// every permutation of its indices, so the tensor is exactly symmetric.
pub fn derivative(f: &PolyFunctional, order: usize) -> DerivativeTensor {
    let (n, jdim) = (f.dim(), f.codim());
    let mut by_sorted: BTreeMap<Vec<usize>, Vec<QPoly>> = BTreeMap::new();
    by_sorted.insert(vec![], f.components().to_vec());
    for level in 1..=order {
        for t in sorted_tuples(n, level) {
            let (last, head) = t.split_last().expect("level ≥ 1");
            let parent = &by_sorted[head];
            let d: Vec<QPoly> = parent.iter().map(|p| p.partial(*last).expect("index < dim")).collect();
            by_sorted.insert(t, d);
        }
    }
    let total = n.pow(order as u32);
    let mut entries = vec![QPoly::zero(n); total * jdim];
    let mut idx = vec![0usize; order];
    for flat in 0..total {
        let mut rem = flat;
        for slot in idx.iter_mut().rev() {
            *slot = rem % n;
            rem /= n;
        }
        let mut key = idx.clone();
        key.sort_unstable();
        for (j, p) in by_sorted[&key].iter().enumerate() {
            entries[flat * jdim + j] = p.clone();
        }
    }
    DerivativeTensor { order, dim: n, codim: jdim, entries }
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    order: usize,
    dim: usize,
    codim: usize,
    entries: Vec<Vec<TermJson>>,
}

impl DerivativeTensor {
    pub fn entries(&self) -> &[QPoly] {
        &self.entries
    }

    pub fn entry(&self, idx: &[usize], j: usize) -> Result<&QPoly> {
        if idx.len() != self.order {
            return Err(Error::OrderMismatch { expected: self.order, got: idx.len() });
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.dim) {
            return Err(Error::IndexOutOfRange { index: bad, dim: self.dim });
        }
        if j >= self.codim {
            return Err(Error::IndexOutOfRange { index: j, dim: self.codim });
        }
        Ok(&self.entries[flat_index(idx, self.dim) * self.codim + j])
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(self.entries.iter().map(|p| p.eval_f64_unchecked(x)).collect())
    }

    /// Frobenius norm of the tensor at x.
    pub fn hs_norm_pointwise(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x)?.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// Checks that every permutation of the derivative indices gives the same entry.
    pub fn is_symmetric(&self) -> bool {
        let total = self.dim.pow(self.order as u32);
        let mut idx = vec![0usize; self.order];
        for flat in 0..total {
            let mut rem = flat;
            for slot in idx.iter_mut().rev() {
                *slot = rem % self.dim;
                rem /= self.dim;
            }
            for a in 0..self.order {
                for b in a + 1..self.order {
                    let mut sw = idx.clone();
                    sw.swap(a, b);
                    let other = flat_index(&sw, self.dim);
                    for j in 0..self.codim {
                        if self.entries[flat * self.codim + j] != self.entries[other * self.codim + j] {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// The squared pointwise norm as Σ (multiplicity)·(distinct entry)².
    pub fn sum_of_squares(&self) -> SumOfSquares {
        let mut s = SumOfSquares::new(self.dim);
        for t in sorted_tuples(self.dim, self.order) {
            let w = BigRational::from_integer(multiplicity(&t));
            let base = flat_index(&t, self.dim) * self.codim;
            for j in 0..self.codim {
                s.push(w.clone(), self.entries[base + j].clone());
            }
        }
        s
    }

    /// Entrywise E[D^ℓF].
    pub fn mean(&self) -> MeanTensor {
        MeanTensor {
            order: self.order,
            dim: self.dim,
            codim: self.codim,
            entries: self.entries.iter().map(QPoly::expectation).collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TensorJson {
            order: self.order,
            dim: self.dim,
            codim: self.codim,
            entries: self.entries.iter().map(QPoly::to_json_terms).collect(),
        })
        .expect("tensor serializes")
    }
}

/// A constant tensor, typically E[D^ℓF].
#[derive(Clone, Debug, PartialEq)]
pub struct MeanTensor {
    pub order: usize,
    pub dim: usize,
    pub codim: usize,
    pub entries: Vec<BigRational>,
}

impl MeanTensor {
    pub fn norm_sq(&self) -> BigRational {
        self.entries.iter().map(|c| c * c).fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().to_f64().unwrap_or(f64::NAN).sqrt()
    }
}

/// E[D^ℓF] computed from exact Gaussian moments.
pub fn mean_derivative(f: &PolyFunctional, order: usize) -> MeanTensor {
    derivative(f, order).mean()
}

/// ‖D^ℓF‖_{L^q}.
pub fn derivative_norm(f: &PolyFunctional, order: usize, q: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    lq_norm_sos(&derivative(f, order).sum_of_squares(), q, cfg)
}

/// D^ℓ of a numeric functional as a field for the quadrature layer.
pub struct NumericDerivativeField<'a> {
    f: &'a NumericFunctional,
    order: usize,
}

impl<'a> NumericDerivativeField<'a> {
    pub fn new(f: &'a NumericFunctional, order: usize) -> Result<Self> {
        if order > f.declared_order() {
            return Err(Error::MissingOracle { order, declared: f.declared_order() });
        }
        Ok(NumericDerivativeField { f, order })
    }

    pub fn hs_norm_pointwise(&self, x: &[f64]) -> Result<f64> {
        Ok(self.f.derivative_at(self.order, x)?.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}

impl SquaredNormField for NumericDerivativeField<'_> {
    fn dim(&self) -> usize {
        self.f.dim()
    }
    fn growth_degree(&self) -> u32 {
        self.f.growth()
    }
    fn sq_norm_at(&self, x: &[f64]) -> f64 {
        match self.f.derivative_at(self.order, x) {
            Ok(v) => v.iter().map(|c| c * c).sum(),
            Err(_) => f64::NAN,
        }
    }
}

pub fn numeric_derivative_norm(f: &NumericFunctional, order: usize, q: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    lq_norm_field(&NumericDerivativeField::new(f, order)?, q, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SobolevKind {
    Graph,
    Full,
    Single(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevNormRequest {
    pub k: usize,
    pub q: f64,
    pub kind: SobolevKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SobolevNorm {
    pub value: f64,
    pub error_estimate: f64,
}

impl SobolevNormRequest {
    fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParameter("Sobolev order k must be at least 1".into()));
        }
        if !(self.q >= 1.0 && self.q.is_finite()) {
            return Err(Error::InvalidParameter(format!("q must be ≥ 1, got {}", self.q)));
        }
        Ok(())
    }

    /// Derivative orders whose L^q norms this request needs.
    pub fn orders(&self) -> Vec<usize> {
        match self.kind {
            SobolevKind::Graph => vec![0, self.k],
            SobolevKind::Full => (0..=self.k).collect(),
            SobolevKind::Single(l) => vec![l],
        }
    }

    /// Combines per-order norms `(‖D^ℓF‖_q, error)` indexed by ℓ.
    pub fn combine(&self, parts: &[(f64, f64)]) -> SobolevNorm {
        let q = self.q;
        match self.kind {
            SobolevKind::Graph => SobolevNorm { value: parts[0].0 + parts[self.k].0, error_estimate: parts[0].1 + parts[self.k].1 },
            SobolevKind::Full => {
                let s: f64 = parts[..=self.k].iter().map(|(v, _)| v.powf(q)).sum();
                // Each partial derivative of (Σ vᵢ^q)^{1/q} lies in [0, 1].
                SobolevNorm { value: s.powf(1.0 / q), error_estimate: parts[..=self.k].iter().map(|p| p.1).sum() }
            }
            SobolevKind::Single(l) => SobolevNorm { value: parts[l].0, error_estimate: parts[l].1 },
        }
    }
}

/// 𝒢(k,q), 𝒟(k,q) or a single ‖D^ℓF‖_q.
pub fn sobolev_norm(f: &PolyFunctional, req: &SobolevNormRequest, cfg: &QuadratureConfig) -> Result<SobolevNorm> {
    req.validate()?;
    let top = req.orders().into_iter().max().unwrap_or(0);
    let mut parts = vec![(0.0, 0.0); top + 1];
    for l in req.orders() {
        let r = derivative_norm(f, l, req.q, cfg)?;
        parts[l] = (r.value, r.error_estimate);
    }
    Ok(req.combine(&parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn x(n: usize, i: usize) -> QPoly {
        QPoly::var(n, i)
    }

    #[test]
    fn derivative_examples() {
        let f = PolyFunctional::scalar(&x(2, 0) * &x(2, 1));
        let d2 = derivative(&f, 2);
        assert_eq!(d2.entry(&[0, 1], 0).unwrap(), &QPoly::one(2));
        assert_eq!(d2.entry(&[1, 0], 0).unwrap(), &QPoly::one(2));
        assert!(d2.entry(&[0, 0], 0).unwrap().is_zero());
        assert!(d2.entry(&[1, 1], 0).unwrap().is_zero());
        let sq = PolyFunctional::scalar(x(1, 0).pow(2));
        let t = derivative(&sq, 2);
        assert_eq!(t.entry(&[0, 0], 0).unwrap(), &QPoly::constant(1, rat(2)));
        assert_eq!(t.mean().entries, vec![rat(2)]);
        let h1 = PolyFunctional::scalar(x(1, 0));
        assert!(derivative(&h1, 2).entries().iter().all(QPoly::is_zero));
        assert_eq!(derivative(&h1, 0).entries(), h1.components());
    }

    #[test]
    fn hs_norm_examples() {
        let f = PolyFunctional::scalar(&x(2, 0) + &x(2, 1));
        assert!((derivative(&f, 1).hs_norm_pointwise(&[0.3, 9.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let g = PolyFunctional::scalar(x(1, 0).pow(2));
        assert_eq!(derivative(&g, 1).hs_norm_pointwise(&[3.0]).unwrap(), 6.0);
        let h = PolyFunctional::scalar(&x(2, 0) * &x(2, 1));
        assert!((derivative(&h, 2).hs_norm_pointwise(&[1.0, -4.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(derivative(&h, 2).hs_norm_pointwise(&[1.0]).is_err());
    }

    #[test]
    fn mean_derivative_examples() {
        let c = PolyFunctional::scalar(x(1, 0).pow(3));
        assert_eq!(mean_derivative(&c, 1).entries, vec![rat(3)]);
        assert_eq!(mean_derivative(&c, 2).entries, vec![rat(0)]);
        assert_eq!(mean_derivative(&c, 3).norm(), 6.0);
    }

    #[test]
    fn symmetry_and_weights() {
        let p = &(&x(3, 0).pow(2) * &x(3, 1)) + &(&x(3, 1) * &x(3, 2).pow(3));
        let f = PolyFunctional::new(3, vec![p.clone(), &p * &x(3, 0)]).unwrap();
        for l in 0..=4 {
            let t = derivative(&f, l);
            assert!(t.is_symmetric());
            let pt = [0.4, -1.2, 0.9];
            let direct = t.hs_norm_pointwise(&pt).unwrap().powi(2);
            let folded = t.sum_of_squares().sq_norm_at(&pt);
            assert!((direct - folded).abs() <= 1e-12 * direct.max(1.0), "order {l}");
        }
    }

    #[test]
    fn sobolev_examples() {
        let cfg = QuadratureConfig::default();
        let f = PolyFunctional::scalar(x(1, 0));
        let full = |k| sobolev_norm(&f, &SobolevNormRequest { k, q: 2.0, kind: SobolevKind::Full }, &cfg).unwrap().value;
        let graph = |k| sobolev_norm(&f, &SobolevNormRequest { k, q: 2.0, kind: SobolevKind::Graph }, &cfg).unwrap().value;
        assert!((full(1) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(graph(1), 2.0);
        assert_eq!(graph(2), 1.0);
        assert!((full(2) - 2f64.sqrt()).abs() < 1e-15);
        assert!(sobolev_norm(&f, &SobolevNormRequest { k: 0, q: 2.0, kind: SobolevKind::Full }, &cfg).is_err());
    }

    #[test]
    fn numeric_oracle_requirements() {
        let f = PolyFunctional::scalar(x(1, 0).pow(2));
        let nf = NumericFunctional::from_poly(&f, 1);
        assert!(matches!(NumericDerivativeField::new(&nf, 2), Err(Error::MissingOracle { .. })));
        let r = numeric_derivative_norm(&nf, 1, 2.0, &QuadratureConfig::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }
}
