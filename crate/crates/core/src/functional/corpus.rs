use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PolyFunctional;
use crate::error::{Error, Result};
use crate::hermite::hermite;
use crate::poly::{factorial, rational_from_f64, MultiIndex, QPoly};

/// Recipe for a deterministic corpus of L²-normalized polynomial functionals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    /// Gaussian dimensions to draw from.
    pub dims: Vec<usize>,
    /// Output dimensions J to draw from.
    pub codims: Vec<usize>,
    /// Inclusive total-degree range.
    pub degree: (u32, u32),
    /// Coefficients are nonzero integers in [−coeff_bound, coeff_bound].
    pub coeff_bound: i64,
    /// Terms per component are drawn from 1..=max_terms.
    pub max_terms: usize,
    pub count: usize,
    pub seed: u64,
    /// Put the witnesses x₁ and H_k(x₁) first.
    pub witnesses: bool,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            dims: vec![1, 2, 3],
            codims: vec![1, 3],
            degree: (1, 4),
            coeff_bound: 5,
            max_terms: 5,
            count: 100,
            seed: 42,
            witnesses: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusMember {
    pub id: String,
    pub functional: PolyFunctional,
    /// Hermite order if the member is the witness H_k(x₁) (x₁ has order 1).
    pub chaos_order: Option<u32>,
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.count == 0 {
            return bad("corpus count must be at least 1");
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return bad("corpus dims must be a nonempty list of positive integers");
        }
        if self.codims.is_empty() || self.codims.contains(&0) {
            return bad("corpus codims must be a nonempty list of positive integers");
        }
        if self.degree.0 > self.degree.1 {
            return bad("corpus degree range is empty");
        }
        if self.coeff_bound < 1 || self.max_terms < 1 {
            return bad("coeff_bound and max_terms must be at least 1");
        }
        Ok(())
    }
}

/// Scales `f` by the rational nearest to 1/‖f‖_{L²} in f64.
pub fn normalize(f: &PolyFunctional) -> Result<PolyFunctional> {
    let n2 = f.l2_norm_sq().to_f64().unwrap_or(f64::NAN);
    if !(n2 > 0.0) {
        return Err(Error::InvalidParameter("cannot normalize a functional with zero L² norm".into()));
    }
    Ok(f.scale(&rational_from_f64(1.0 / n2.sqrt())?))
}

fn random_component(rng: &mut ChaCha8Rng, dim: usize, degree: u32, spec: &CorpusSpec) -> QPoly {
    let all: Vec<MultiIndex> = (0..=degree).flat_map(|d| MultiIndex::all_of_degree(dim, d)).collect();
    let top = MultiIndex::all_of_degree(dim, degree);
    let terms = rng.random_range(1..=spec.max_terms.min(all.len()));
    let mut chosen = vec![top[rng.random_range(0..top.len())].clone()];
    while chosen.len() < terms {
        let m = all[rng.random_range(0..all.len())].clone();
        if !chosen.contains(&m) {
            chosen.push(m);
        }
    }
    let mut p = QPoly::zero(dim);
    for m in chosen {
        let mut c = 0;
        while c == 0 {
            c = rng.random_range(-spec.coeff_bound..=spec.coeff_bound);
        }
        p.add_term(m, BigRational::from_integer(BigInt::from(c)));
    }
    p
}

/// Deterministic corpus: witnesses first, then random members.
///
/// Member i uses ChaCha stream i of the master seed, so members can be
/// generated independently and in any order.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Vec<CorpusMember>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.count);
    if spec.witnesses {
        let n = *spec.dims.iter().min().expect("validated");
        out.push(CorpusMember {
            id: "witness-x1".into(),
            functional: PolyFunctional::scalar(QPoly::var(n, 0)),
            chaos_order: Some(1),
        });
        for k in 2..=spec.degree.1.max(1) {
            let h = hermite(k).to_poly(n, 0);
            let s = rational_from_f64(1.0 / factorial(k).to_f64().unwrap_or(f64::NAN).sqrt())?;
            out.push(CorpusMember {
                id: format!("witness-H{k}"),
                functional: PolyFunctional::scalar(h.scale(&s)),
                chaos_order: Some(k),
            });
        }
        out.truncate(spec.count);
    }
    let start = out.len();
    for i in start..spec.count {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(i as u64);
        let n = spec.dims[rng.random_range(0..spec.dims.len())];
        let j = spec.codims[rng.random_range(0..spec.codims.len())];
        let deg = rng.random_range(spec.degree.0..=spec.degree.1);
        let comps = (0..j).map(|_| random_component(&mut rng, n, deg, spec)).collect();
        let f = PolyFunctional::new(n, comps)?;
        out.push(CorpusMember { id: format!("random-{i:03}"), functional: normalize(&f)?, chaos_order: None });
    }
    Ok(out)
}
