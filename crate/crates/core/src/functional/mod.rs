//! Smooth random variables F = f(W(e₁),…,W(eₙ)) with values in ℝ^J.

mod corpus;
mod numeric;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub use corpus::{generate_corpus, normalize, CorpusMember, CorpusSpec};
pub use numeric::{Evaluator, NumericFunctional};

use crate::error::{Error, Result};
use crate::poly::{rational_from_f64, QPoly, TermJson};

/// Exact polynomial functional with `codim` components sharing one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyFunctional {
    dim: usize,
    components: Vec<QPoly>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyFunctionalJson {
    dim: usize,
    codim: usize,
    components: Vec<Vec<TermJson>>,
}

impl PolyFunctional {
    pub fn new(dim: usize, components: Vec<QPoly>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if components.is_empty() {
            return Err(Error::InvalidParameter("a functional needs at least one component".into()));
        }
        if let Some(bad) = components.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.dim() });
        }
        Ok(PolyFunctional { dim, components })
    }

    pub fn scalar(p: QPoly) -> Self {
        let dim = p.dim().max(1);
        let p = if p.dim() == 0 { p.extend_dim(1) } else { p };
        PolyFunctional { dim, components: vec![p] }
    }

    /// Stacks scalar (or vector) functionals of one dimension into a single vector functional.
    pub fn stack(parts: &[PolyFunctional]) -> Result<Self> {
        let dim = parts.first().map(|p| p.dim).ok_or_else(|| Error::InvalidParameter("nothing to stack".into()))?;
        let comps = parts
            .iter()
            .map(|p| if p.dim == dim { Ok(p.components.clone()) } else { Err(Error::DimensionMismatch { expected: dim, got: p.dim }) })
            .collect::<Result<Vec<_>>>()?
            .concat();
        PolyFunctional::new(dim, comps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[QPoly] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &QPoly {
        &self.components[j]
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(QPoly::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(QPoly::is_zero)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval_f64(x)).collect()
    }

    pub fn eval_exact(&self, x: &[BigRational]) -> Result<Vec<BigRational>> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    /// ∂f/∂x_i, 0-based.
    pub fn partial(&self, i: usize) -> Result<Self> {
        let comps = self.components.iter().map(|c| c.partial(i)).collect::<Result<Vec<_>>>()?;
        Ok(PolyFunctional { dim: self.dim, components: comps })
    }

    /// E[F], exactly, per component.
    pub fn mean(&self) -> Vec<BigRational> {
        self.components.iter().map(QPoly::expectation).collect()
    }

    /// F − E[F].
    pub fn centered(&self) -> Self {
        let comps = self
            .components
            .iter()
            .map(|c| {
                let m = c.expectation();
                c - &QPoly::constant(self.dim, m)
            })
            .collect();
        PolyFunctional { dim: self.dim, components: comps }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        PolyFunctional { dim: self.dim, components: self.components.iter().map(|p| p.scale(c)).collect() }
    }

    /// ‖F‖²_{L²} = Σ_j E[f_j²], exactly.
    pub fn l2_norm_sq(&self) -> BigRational {
        self.components
            .iter()
            .map(|c| c.expectation_of_product(c))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// Embeds into a higher Gaussian dimension (extra variables unused).
    pub fn extend_dim(&self, dim: usize) -> Result<Self> {
        if dim < self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: dim });
        }
        Ok(PolyFunctional { dim, components: self.components.iter().map(|c| c.extend_dim(dim)).collect() })
    }

    /// f∘Rᵀ for an orthogonal n×n matrix given row-major.
    ///
    /// The entries of R are taken as the exact rationals of their f64 values.
    pub fn rotate(&self, r: &[Vec<f64>]) -> Result<Self> {
        let n = self.dim;
        if r.len() != n || r.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: r.len() });
        }
        let mut deviation = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| r[k][i] * r[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                deviation = deviation.max((dot - target).abs());
            }
        }
        if deviation > 1e-12 {
            return Err(Error::NotOrthogonal { deviation });
        }
        // (Rᵀx)_i = Σ_k R_{k i} x_k
        let mut subs = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = QPoly::zero(n);
            for (k, row) in r.iter().enumerate() {
                s = &s + &QPoly::var(n, k).scale(&rational_from_f64(row[i])?);
            }
            subs.push(s);
        }
        let comps = self.components.iter().map(|c| c.compose(&subs)).collect::<Result<Vec<_>>>()?;
        Ok(PolyFunctional { dim: n, components: comps })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PolyFunctionalJson {
            dim: self.dim,
            codim: self.codim(),
            components: self.components.iter().map(QPoly::to_json_terms).collect(),
        })
        .expect("functional serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: PolyFunctionalJson = serde_json::from_value(v.clone())?;
        if j.components.len() != j.codim {
            return Err(Error::DimensionMismatch { expected: j.codim, got: j.components.len() });
        }
        let comps = j
            .components
            .iter()
            .map(|terms| QPoly::from_json_terms(j.dim, terms))
            .collect::<Result<Vec<_>>>()?;
        PolyFunctional::new(j.dim, comps)
    }
}

impl From<QPoly> for PolyFunctional {
    fn from(p: QPoly) -> Self {
        PolyFunctional::scalar(p)
    }
}

/// Rotation by θ in the (i, j)-plane, row-major.
pub fn givens(n: usize, i: usize, j: usize, theta: f64) -> Vec<Vec<f64>> {
    let mut r: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|b| if a == b { 1.0 } else { 0.0 }).collect()).collect();
    let (s, c) = theta.sin_cos();
    r[i][i] = c;
    r[j][j] = c;
    r[i][j] = -s;
    r[j][i] = s;
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::hermite;
    use crate::integrate::{lq_norm, QuadratureConfig};
    use crate::poly::rat;

    fn x(n: usize, i: usize) -> QPoly {
        QPoly::var(n, i)
    }

    #[test]
    fn eval_examples() {
        let f = PolyFunctional::scalar(&x(2, 0).pow(2) + &x(2, 1));
        assert_eq!(f.eval(&[2.0, 1.0]).unwrap(), vec![5.0]);
        let h3 = PolyFunctional::scalar(hermite(3).to_poly(1, 0));
        assert_eq!(h3.eval(&[1.0]).unwrap(), vec![-2.0]);
        let v = PolyFunctional::new(2, vec![x(2, 0), &x(2, 0) * &x(2, 1)]).unwrap();
        assert_eq!(v.eval(&[3.0, 2.0]).unwrap(), vec![3.0, 6.0]);
        assert!(v.eval(&[1.0]).is_err());
    }

    #[test]
    fn partial_examples() {
        let f = PolyFunctional::scalar(&x(2, 0).pow(2) * &x(2, 1));
        assert_eq!(f.partial(0).unwrap().component(0), &(&x(2, 0) * &x(2, 1)).scale(&rat(2)));
        let h4 = PolyFunctional::scalar(hermite(4).to_poly(1, 0));
        assert_eq!(h4.partial(0).unwrap().component(0), &hermite(3).to_poly(1, 0).scale(&rat(4)));
        let g = PolyFunctional::scalar(x(2, 0).pow(2));
        assert!(g.partial(1).unwrap().is_zero());
        assert!(matches!(g.partial(2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn rotation_examples() {
        let f = PolyFunctional::scalar(x(2, 0));
        let id = givens(2, 0, 1, 0.0);
        assert_eq!(f.rotate(&id).unwrap(), f);
        let theta = 0.6f64;
        let g = f.rotate(&givens(2, 0, 1, theta)).unwrap();
        let v = g.eval(&[0.3, -1.1]).unwrap()[0];
        assert!((v - (theta.cos() * 0.3 + theta.sin() * -1.1)).abs() < 1e-15);
        let n2 = lq_norm(&g, 2.0, &QuadratureConfig::default()).unwrap().value;
        assert!((n2 - 1.0).abs() < 1e-15);
        let radial = PolyFunctional::scalar(&x(2, 0).pow(2) + &x(2, 1).pow(2));
        let rr = radial.rotate(&givens(2, 0, 1, 1.1)).unwrap();
        for pt in [[0.3, 0.4], [-2.0, 1.5]] {
            assert!((rr.eval(&pt).unwrap()[0] - radial.eval(&pt).unwrap()[0]).abs() < 1e-14);
        }
        let bad = vec![vec![1.0, 0.1], vec![0.0, 1.0]];
        assert!(matches!(f.rotate(&bad), Err(Error::NotOrthogonal { .. })));
        assert!(f.rotate(&[vec![1.0]]).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let v = PolyFunctional::new(2, vec![x(2, 0), &x(2, 0) * &x(2, 1)]).unwrap();
        let j = v.to_json();
        assert_eq!(j["codim"], 2);
        assert_eq!(PolyFunctional::from_json(&j).unwrap(), v);
        let bad = serde_json::json!({"dim": 1, "codim": 2, "components": [[]]});
        assert!(PolyFunctional::from_json(&bad).is_err());
    }

    #[test]
    fn stacking_and_centering() {
        let a = PolyFunctional::scalar(x(1, 0).pow(2));
        let b = PolyFunctional::scalar(x(1, 0));
        let s = PolyFunctional::stack(&[a.clone(), b]).unwrap();
        assert_eq!(s.codim(), 2);
        assert_eq!(a.centered().component(0), &hermite(2).to_poly(1, 0));
        assert_eq!(s.l2_norm_sq(), rat(4));
    }
}
