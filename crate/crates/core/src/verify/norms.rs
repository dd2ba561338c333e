use std::collections::HashMap;
use std::ops::{Add, Mul};

use crate::functional::{CorpusMember, PolyFunctional};
use crate::integrate::{lq_norm, QuadratureConfig};
use crate::malliavin::{derivative_norm, mean_derivative};

/// A computed quantity with its absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Val {
    pub value: f64,
    pub error: f64,
}

impl Val {
    pub fn exact(value: f64) -> Self {
        Val { value, error: 0.0 }
    }

    /// v^p with the error propagated to first order.
    pub fn powf(self, p: f64) -> Self {
        let value = self.value.powf(p);
        let error = if self.value > 0.0 { (p * value / self.value).abs() * self.error } else { self.error.powf(p) };
        Val { value, error }
    }

    pub fn ratio(self, d: Val) -> Self {
        let value = self.value / d.value;
        Val { value, error: (self.error + value.abs() * d.error) / d.value.abs() }
    }
}

impl Add for Val {
    type Output = Val;
    fn add(self, o: Val) -> Val {
        Val { value: self.value + o.value, error: self.error + o.error }
    }
}

impl Mul<Val> for f64 {
    type Output = Val;
    fn mul(self, v: Val) -> Val {
        Val { value: self * v.value, error: self.abs() * v.error }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormKind {
    /// ‖D^ℓF‖_q (ℓ = 0 is ‖F‖_q).
    Derivative(usize),
    /// ‖F − E[F]‖_q.
    Centered,
}

/// Memoized L^q norms of corpus members, shared by all checks of a run.
pub struct NormCache<'a> {
    members: &'a [CorpusMember],
    cfg: QuadratureConfig,
    norms: HashMap<(usize, NormKind, u64), Result<Val, String>>,
    means: HashMap<(usize, usize), f64>,
}

impl<'a> NormCache<'a> {
    pub fn new(members: &'a [CorpusMember], cfg: QuadratureConfig) -> Self {
        NormCache { members, cfg, norms: HashMap::new(), means: HashMap::new() }
    }

    pub fn members(&self) -> &'a [CorpusMember] {
        self.members
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.cfg
    }

    /// Failures are kept as messages so a failing norm is reported once per row.
    pub fn norm(&mut self, i: usize, kind: NormKind, q: f64) -> Result<Val, String> {
        let key = (i, kind, q.to_bits());
        if let Some(v) = self.norms.get(&key) {
            return v.clone();
        }
        let f = &self.members[i].functional;
        let r = match kind {
            NormKind::Derivative(l) => derivative_norm(f, l, q, &self.cfg),
            NormKind::Centered => lq_norm(&f.centered(), q, &self.cfg),
        };
        let v = r.map(|r| Val { value: r.value, error: r.error_estimate }).map_err(|e| e.to_string());
        self.norms.insert(key, v.clone());
        v
    }

    pub fn d(&mut self, i: usize, l: usize, q: f64) -> Result<Val, String> {
        self.norm(i, NormKind::Derivative(l), q)
    }

    /// ‖E[D^ℓF]‖, exact up to the final square root.
    pub fn mean_norm(&mut self, i: usize, l: usize) -> f64 {
        let f: &PolyFunctional = &self.members[i].functional;
        *self.means.entry((i, l)).or_insert_with(|| mean_derivative(f, l).norm())
    }

    /// 𝒢(k,q) = ‖F‖ + ‖D^kF‖.
    pub fn graph(&mut self, i: usize, k: usize, q: f64) -> Result<Val, String> {
        Ok(self.d(i, 0, q)? + self.d(i, k, q)?)
    }

    /// 𝒟(k,q) = (Σ_{ℓ≤k} ‖D^ℓF‖^q)^{1/q}; each partial derivative of the
    /// combination lies in [0, 1], so errors add.
    pub fn full(&mut self, i: usize, k: usize, q: f64) -> Result<Val, String> {
        let parts = (0..=k).map(|l| self.d(i, l, q)).collect::<Result<Vec<_>, _>>()?;
        let s: f64 = parts.iter().map(|p| p.value.powf(q)).sum();
        Ok(Val { value: s.powf(1.0 / q), error: parts.iter().map(|p| p.error).sum() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{generate_corpus, CorpusSpec};

    #[test]
    fn cached_norms_match_direct_computation() {
        let corpus = generate_corpus(&CorpusSpec { count: 6, ..CorpusSpec::default() }).unwrap();
        let mut c = NormCache::new(&corpus, QuadratureConfig::default());
        // witness-x1: ‖x‖₂ = 1, ‖Dx‖₂ = 1, 𝒟(2,2) = √2, 𝒢(2,2) = 1
        assert_eq!(c.d(0, 0, 2.0).unwrap(), Val::exact(1.0));
        assert!((c.full(0, 2, 2.0).unwrap().value - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.graph(0, 2, 2.0).unwrap().value, 1.0);
        assert_eq!(c.mean_norm(0, 1), 1.0);
        let a = c.d(5, 1, 1.5).unwrap();
        assert_eq!(c.d(5, 1, 1.5).unwrap(), a);
        let direct = derivative_norm(&corpus[5].functional, 1, 1.5, &QuadratureConfig::default()).unwrap();
        assert_eq!(a.value, direct.value);
    }

    #[test]
    fn val_arithmetic() {
        let v = Val { value: 4.0, error: 0.1 };
        assert_eq!((2.0 * v).error, 0.2);
        assert!((v.powf(0.5).error - 0.025).abs() < 1e-15);
        let r = Val::exact(1.0).ratio(Val { value: 2.0, error: 0.2 });
        assert!((r.error - 0.05).abs() < 1e-15);
    }
}
