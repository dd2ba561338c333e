use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::PolyFunctional;
use crate::error::{Error, Result};
use crate::integrate::SquaredNormField;

/// Pointwise map ℝⁿ → ℝ^m. Derivative oracles of order ℓ return the n^ℓ·J
/// tensor flattened as ((i₁·n + i₂)·n + …)·J + j.
pub type Evaluator = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A functional given only through evaluation, with optional derivative oracles.
#[derive(Clone)]
pub struct NumericFunctional {
    dim: usize,
    codim: usize,
    evaluator: Evaluator,
    oracles: Vec<Evaluator>,
    growth: u32,
}

impl fmt::Debug for NumericFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumericFunctional")
            .field("dim", &self.dim)
            .field("codim", &self.codim)
            .field("declared_order", &self.oracles.len())
            .field("growth", &self.growth)
            .finish()
    }
}

impl NumericFunctional {
    pub fn new(dim: usize, codim: usize, growth: u32, evaluator: Evaluator) -> Self {
        NumericFunctional { dim, codim, evaluator, oracles: Vec::new(), growth }
    }

    /// Declares the oracle for the next derivative order.
    pub fn with_oracle(mut self, oracle: Evaluator) -> Self {
        self.oracles.push(oracle);
        self
    }

    /// Numeric view of a polynomial functional with oracles up to `order`.
    pub fn from_poly(f: &PolyFunctional, order: usize) -> Self {
        let g = f.clone();
        let ev: Evaluator = Arc::new(move |x| g.eval(x).expect("dimension checked by caller"));
        let mut out = NumericFunctional::new(f.dim(), f.codim(), f.degree(), ev);
        for l in 1..=order {
            let t = crate::malliavin::derivative(f, l);
            out = out.with_oracle(Arc::new(move |x| t.eval(x).expect("dimension checked by caller")));
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn declared_order(&self) -> usize {
        self.oracles.len()
    }

    pub fn growth(&self) -> u32 {
        self.growth
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.derivative_at(0, x)
    }

    /// D^ℓf(x) flattened; ℓ = 0 is f itself.
    pub fn derivative_at(&self, order: usize, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let ev = match order {
            0 => &self.evaluator,
            l => self
                .oracles
                .get(l - 1)
                .ok_or(Error::MissingOracle { order: l, declared: self.oracles.len() })?,
        };
        let v = ev(x);
        let want = self.dim.pow(order as u32) * self.codim;
        if v.len() != want {
            return Err(Error::DimensionMismatch { expected: want, got: v.len() });
        }
        if v.iter().any(|c| c.is_nan()) {
            return Err(Error::NanIntegrand { point: x.to_vec() });
        }
        Ok(v)
    }

    /// Largest discrepancy between each declared oracle and central
    /// differences (step `h`) of the order below it, over `probes` seeded
    /// Gaussian points. Errors are relative with a unit floor:
    /// |fd − oracle| / max(|oracle|, 1).
    pub fn check_oracles(&self, probes: usize, seed: u64, h: f64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..probes {
            let x: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
            for order in 1..=self.oracles.len() {
                let oracle = self.derivative_at(order, &x)?;
                let lower_len = self.dim.pow(order as u32 - 1) * self.codim;
                for i in 0..self.dim {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    let fp = self.derivative_at(order - 1, &xp)?;
                    let fm = self.derivative_at(order - 1, &xm)?;
                    for lower in 0..lower_len {
                        let (base, j) = (lower / self.codim, lower % self.codim);
                        let idx = (base * self.dim + i) * self.codim + j;
                        let fd = (fp[lower] - fm[lower]) / (2.0 * h);
                        let err = (fd - oracle[idx]).abs() / oracle[idx].abs().max(1.0);
                        worst = worst.max(err);
                    }
                }
            }
        }
        Ok(worst)
    }
}

impl SquaredNormField for NumericFunctional {
    fn dim(&self) -> usize {
        self.dim
    }
    fn growth_degree(&self) -> u32 {
        self.growth
    }
    fn sq_norm_at(&self, x: &[f64]) -> f64 {
        match self.eval(x) {
            Ok(v) => v.iter().map(|c| c * c).sum(),
            Err(_) => f64::NAN,
        }
    }
}
