use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::CorpusSpec;
use crate::integrate::QuadratureConfig;

/// The checks the suite knows how to run, in report order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    ChaosIdentity,
    Poincare,
    ExpectedDerivative,
    L1MeanDerivative,
    L1Sandwich,
    NormEquivalence,
    TrivialBound,
    FiniteDim,
    Adams,
    Counterexample,
    ChaosPoincare,
    Hypercontractivity,
    OuSemigroup,
    VectorConsistency,
}

impl CheckId {
    pub const ALL: [CheckId; 14] = [
        CheckId::ChaosIdentity,
        CheckId::Poincare,
        CheckId::ExpectedDerivative,
        CheckId::L1MeanDerivative,
        CheckId::L1Sandwich,
        CheckId::NormEquivalence,
        CheckId::TrivialBound,
        CheckId::FiniteDim,
        CheckId::Adams,
        CheckId::Counterexample,
        CheckId::ChaosPoincare,
        CheckId::Hypercontractivity,
        CheckId::OuSemigroup,
        CheckId::VectorConsistency,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckId::ChaosIdentity => "chaos_identity",
            CheckId::Poincare => "poincare",
            CheckId::ExpectedDerivative => "expected_derivative",
            CheckId::L1MeanDerivative => "l1_mean_derivative",
            CheckId::L1Sandwich => "l1_sandwich",
            CheckId::NormEquivalence => "norm_equivalence",
            CheckId::TrivialBound => "trivial_bound",
            CheckId::FiniteDim => "finite_dim",
            CheckId::Adams => "adams",
            CheckId::Counterexample => "counterexample",
            CheckId::ChaosPoincare => "chaos_poincare",
            CheckId::Hypercontractivity => "hypercontractivity",
            CheckId::OuSemigroup => "ou_semigroup",
            CheckId::VectorConsistency => "vector_consistency",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        CheckId::ALL
            .into_iter()
            .find(|c| c.as_str() == norm)
            .ok_or_else(|| Error::Config(format!("unknown check id `{s}`")))
    }
}

/// Parameter grids swept by the checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub q: Vec<f64>,
    /// Derivative orders ℓ.
    pub ell: Vec<u32>,
    /// Sobolev orders k (at least 2).
    pub k: Vec<u32>,
    pub rho: Vec<f64>,
    pub eps: Vec<f64>,
    /// Ornstein–Uhlenbeck times.
    pub t: Vec<f64>,
    pub finite_dim_q: Vec<f64>,
    /// Orders of the chaos-pure witnesses H_ℓ(x₁).
    pub chaos_orders: Vec<u32>,
    /// Largest k in the chaos identity check.
    pub chaos_identity_max: u32,
    /// (s, r) pairs for hypercontractivity.
    pub hyper_pairs: Vec<(f64, f64)>,
    pub counterexample_k: Vec<f64>,
    pub counterexample_rho: Vec<f64>,
    /// Base points x₀ for the interval forms g(t) = f(x₀ + t).
    pub adams_x0: Vec<f64>,
    pub ou_q: Vec<f64>,
    /// Number of corpus members (of dimension ≤ `ou_max_dim`) used by the node checks.
    pub ou_members: usize,
    pub ou_max_dim: usize,
    /// Gauss–Hermite nodes per axis for the pointwise semigroup bounds.
    pub ou_nodes: usize,
    /// Number of stacked triples in the vector consistency check.
    pub vector_triples: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            q: vec![1.0, 1.5, 2.0, 3.0, 4.0],
            ell: vec![1, 2, 3],
            k: vec![2, 3],
            rho: vec![0.1, 0.5, 0.9],
            eps: vec![0.1, 0.5, 0.9],
            t: vec![0.1, 0.5, 1.0],
            finite_dim_q: vec![1.0, 2.0],
            chaos_orders: vec![1, 2, 3, 4],
            chaos_identity_max: 4,
            hyper_pairs: vec![(2.0, 3.0), (2.0, 4.0), (3.0, 4.0)],
            counterexample_k: vec![1.0, 10.0, 100.0],
            counterexample_rho: vec![0.1, 1.0, 10.0, 100.0],
            adams_x0: vec![0.0, 1.0],
            ou_q: vec![1.0, 2.0, 3.0],
            ou_members: 100,
            ou_max_dim: 2,
            ou_nodes: 6,
            vector_triples: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub quadrature_rel: f64,
    /// A row passes iff margin ≥ −(margin_abs + integration error).
    pub margin_abs: f64,
    pub m_max: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { quadrature_rel: 1e-8, margin_abs: 1e-7, m_max: 128 }
    }
}

/// Corpus recipe; the seed comes from the top-level `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub dims: Vec<usize>,
    pub codims: Vec<usize>,
    pub degree: (u32, u32),
    pub coeff_bound: i64,
    pub max_terms: usize,
    pub count: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        let s = CorpusSpec::default();
        CorpusConfig {
            dims: s.dims,
            codims: s.codims,
            degree: s.degree,
            coeff_bound: s.coeff_bound,
            max_terms: s.max_terms,
            count: s.count,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    pub grids: Grids,
    pub tolerances: Tolerances,
    pub corpus: CorpusConfig,
    pub checks: Vec<CheckId>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 42,
            grids: Grids::default(),
            tolerances: Tolerances::default(),
            corpus: CorpusConfig::default(),
            checks: CheckId::ALL.to_vec(),
        }
    }
}

impl VerifyConfig {
    /// Parses and validates a JSON config; every failure is an [`Error::Config`].
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: VerifyConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let g = &self.grids;
        if let Some(q) = g.q.iter().chain(&g.finite_dim_q).chain(&g.ou_q).find(|q| !(q.is_finite() && **q >= 1.0)) {
            return bad(format!("every q must be a finite number ≥ 1, got {q}"));
        }
        if let Some(r) = g.rho.iter().chain(&g.eps).find(|r| !(**r > 0.0 && **r < 1.0)) {
            return bad(format!("ρ and ε must lie in (0, 1), got {r}"));
        }
        if let Some(t) = g.t.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return bad(format!("OU times must be positive, got {t}"));
        }
        if g.ell.contains(&0) || g.chaos_orders.contains(&0) {
            return bad("derivative and chaos orders must be at least 1".into());
        }
        if g.k.iter().any(|&k| k < 2) {
            return bad("Sobolev orders k must be at least 2".into());
        }
        if let Some((s, r)) = g.hyper_pairs.iter().find(|(s, r)| !(*s > 1.0 && r >= s && r.is_finite())) {
            return bad(format!("hypercontractivity pairs need 1 < s ≤ r < ∞, got ({s}, {r})"));
        }
        if g.counterexample_k.iter().chain(&g.counterexample_rho).any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("counterexample K and ρ values must be positive".into());
        }
        if g.ou_nodes == 0 {
            return bad("ou_nodes must be at least 1".into());
        }
        let t = &self.tolerances;
        if !(t.quadrature_rel > 0.0 && t.quadrature_rel < 1.0) || !(t.margin_abs >= 0.0) || t.m_max < 2 {
            return bad("tolerances need 0 < quadrature_rel < 1, margin_abs ≥ 0 and m_max ≥ 2".into());
        }
        self.corpus_spec().validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn corpus_spec(&self) -> CorpusSpec {
        let c = &self.corpus;
        CorpusSpec {
            dims: c.dims.clone(),
            codims: c.codims.clone(),
            degree: c.degree,
            coeff_bound: c.coeff_bound,
            max_terms: c.max_terms,
            count: c.count,
            seed: self.seed,
            witnesses: true,
        }
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: self.tolerances.quadrature_rel,
            m_max: self.tolerances.m_max,
            mc_seed: self.seed,
            ..QuadratureConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = VerifyConfig::default();
        let s = serde_json::to_string(&cfg).unwrap();
        assert_eq!(VerifyConfig::from_json_str(&s).unwrap(), cfg);
        assert_eq!(VerifyConfig::from_json_str("{}").unwrap(), cfg);
        assert_eq!(cfg.corpus_spec(), CorpusSpec::default());
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            r#"{"sed": 1}"#,
            r#"{"grids": {"rho": [1.5]}}"#,
            r#"{"grids": {"q": [0.5]}}"#,
            r#"{"grids": {"k": [1]}}"#,
            r#"{"checks": ["nope"]}"#,
            r#"{"tolerances": {"quadrature_rel": 0}}"#,
            r#"{"corpus": {"count": 0}}"#,
            "not json",
        ] {
            assert!(matches!(VerifyConfig::from_json_str(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn check_ids_parse() {
        assert_eq!("l1-sandwich".parse::<CheckId>().unwrap(), CheckId::L1Sandwich);
        assert_eq!("ou_semigroup".parse::<CheckId>().unwrap(), CheckId::OuSemigroup);
        assert!("x".parse::<CheckId>().is_err());
        for c in CheckId::ALL {
            assert_eq!(c.as_str().parse::<CheckId>().unwrap(), c);
        }
    }
}
