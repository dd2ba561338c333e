//! Explicit constants of the Gaussian Poincaré, expected-derivative and
//! Sobolev-equivalence estimates.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn require_q(q: f64, min: f64, strict: bool) -> Result<()> {
    let ok = q.is_finite() && if strict { q > min } else { q >= min };
    if ok {
        Ok(())
    } else {
        let rel = if strict { ">" } else { "≥" };
        Err(Error::InvalidParameter(format!("q must be {rel} {min}, got {q}")))
    }
}

/// Conjugate exponent q/(q−1).
pub fn conjugate(q: f64) -> f64 {
    q / (q - 1.0)
}

/// Poincaré constant c_q: √(q−1) for q ≥ 2, π/2 for 1 ≤ q < 2.
pub fn c_poincare(q: f64) -> Result<f64> {
    require_q(q, 1.0, false)?;
    Ok(if q >= 2.0 { (q - 1.0).sqrt() } else { PI / 2.0 })
}

/// d_{ℓ,q} bounding ‖E[D^ℓF]‖ by ‖F‖_q: √(ℓ!) for q ≥ 2 and
/// √(ℓ!)(q̄−1)^{ℓ/2} for 1 < q < 2. There is no such bound at q = 1.
pub fn d_expected(l: u32, q: f64) -> Result<f64> {
    if l == 0 {
        return Err(Error::InvalidParameter("derivative order ℓ must be at least 1".into()));
    }
    if q == 1.0 {
        return Err(Error::ExpectedDerivativeAtQOne { q });
    }
    require_q(q, 1.0, true)?;
    let base = factorial_f64(l).sqrt();
    Ok(if q >= 2.0 { base } else { base * (conjugate(q) - 1.0).powf(l as f64 / 2.0) })
}

/// τ_{k,q} = ∏_{ℓ=1}^{k−1} (1 + max(d_{ℓ,q}, c_q)).
pub fn tau_equivalence(k: u32, q: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    if q <= 1.0 {
        return Err(Error::InvalidParameter(format!("τ needs q > 1, got {q}")));
    }
    let c = c_poincare(q)?;
    (1..k).try_fold(1.0, |acc, l| Ok(acc * (1.0 + d_expected(l, q)?.max(c))))
}

/// 18√(2e), the L¹ mean-derivative constant.
pub fn l1_mean_derivative_constant() -> f64 {
    18.0 * (2.0 * E).sqrt()
}

/// η = π/2 + 18√(2e).
pub fn eta_l1() -> f64 {
    PI / 2.0 + l1_mean_derivative_constant()
}

/// C_{1,n} = 18√e·n.
pub fn c_one(n: u32) -> f64 {
    18.0 * E.sqrt() * n as f64
}

/// Exponents (a, b) with C_{ℓ,n} = 2^a·C_{1,n}^b:
/// a = Σ_{m=1}^{ℓ−1} ℓ!/(ℓ−m)!, b = Σ_{m=1}^{ℓ} ℓ!/(ℓ−m)!.
pub fn finite_dim_exponents(l: u32) -> (u64, u64) {
    let falling = |m: u32| ((l - m + 1)..=l).map(u64::from).product::<u64>();
    let a = (1..l).map(falling).sum();
    let b = (1..=l).map(falling).sum();
    (a, b)
}

/// C_{ℓ,n} in closed form.
pub fn c_finite_dim(l: u32, n: u32) -> Result<f64> {
    if l == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!("need ℓ ≥ 1 and n ≥ 1, got ℓ = {l}, n = {n}")));
    }
    let (a, b) = finite_dim_exponents(l);
    Ok(2f64.powf(a as f64) * c_one(n).powf(b as f64))
}

/// C_{ℓ,n} from C_{ℓ,n} = 2^ℓ·C_{1,n}^ℓ·C_{ℓ−1,n}^ℓ.
pub fn c_finite_dim_recursive(l: u32, n: u32) -> Result<f64> {
    if l == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!("need ℓ ≥ 1 and n ≥ 1, got ℓ = {l}, n = {n}")));
    }
    let c1 = c_one(n);
    let mut c = c1;
    for m in 2..=l {
        c = (2.0 * c1 * c).powi(m as i32);
    }
    Ok(c)
}

/// E|N|^p = 2^{p/2} Γ((p+1)/2) / √π for a standard normal N.
pub fn gaussian_abs_moment(p: f64) -> f64 {
    2f64.powf(p / 2.0) * libm::tgamma((p + 1.0) / 2.0) / PI.sqrt()
}

/// √2·π^{−1/(2q)}·Γ((q+1)/2)^{1/q} = ‖N‖_q, a lower bound for the optimal c_q.
pub fn poincare_lower_bound(q: f64) -> Result<f64> {
    require_q(q, 1.0, false)?;
    Ok(2f64.sqrt() * PI.powf(-1.0 / (2.0 * q)) * libm::tgamma((q + 1.0) / 2.0).powf(1.0 / q))
}

/// ((q−1)^ℓ/ℓ)^{1/2}, the Poincaré constant on the ℓ-th chaos for q > 2.
pub fn chaos_poincare_constant(l: u32, q: f64) -> Result<f64> {
    if l == 0 {
        return Err(Error::InvalidParameter("chaos order must be at least 1".into()));
    }
    require_q(q, 2.0, true)?;
    Ok(((q - 1.0).powi(l as i32) / l as f64).sqrt())
}

/// ((r−1)/(s−1))^{ℓ/2}.
pub fn hypercontractivity_constant(l: u32, s: f64, r: f64) -> Result<f64> {
    if !(s > 1.0 && r >= s && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("need 1 < s ≤ r < ∞, got s = {s}, r = {r}")));
    }
    Ok(((r - 1.0) / (s - 1.0)).powf(l as f64 / 2.0))
}

/// 2^{k+1} C_{k−1,n}^k / ε^{k−1}, the ‖F‖_q coefficient in the
/// finite-dimensional full-norm bound (k ≥ 2, 0 < ε < 1).
pub fn finite_dim_norm_prefactor(k: u32, n: u32, eps: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("ε must lie in (0, 1), got {eps}")));
    }
    Ok(2f64.powi(k as i32 + 1) * c_finite_dim(k - 1, n)?.powi(k as i32) / eps.powi(k as i32 - 1))
}

fn factorial_f64(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// One evaluated constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantEntry {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub formula: String,
    pub value: f64,
}

/// Parameter grid for [`constant_table`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantGrid {
    pub q: Vec<f64>,
    pub l: Vec<u32>,
    pub k: Vec<u32>,
    pub n: Vec<u32>,
}

impl Default for ConstantGrid {
    fn default() -> Self {
        ConstantGrid { q: vec![1.0, 1.5, 2.0, 3.0, 4.0], l: vec![1, 2, 3], k: vec![2, 3], n: vec![1, 2, 3] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantTable {
    pub entries: Vec<ConstantEntry>,
}

/// Every constant at every valid grid point. Points outside a constant's
/// domain (for example d_{ℓ,1}) are skipped.
pub fn constant_table(grid: &ConstantGrid) -> ConstantTable {
    let mut entries = Vec::new();
    let mut push = |name: &str, params: &[(&str, f64)], formula: &str, value: Result<f64>| {
        if let Ok(value) = value {
            entries.push(ConstantEntry {
                name: name.into(),
                params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
                formula: formula.into(),
                value,
            });
        }
    };
    push("eta", &[], "pi/2 + 18*sqrt(2e)", Ok(eta_l1()));
    push("l1_mean_derivative", &[], "18*sqrt(2e)", Ok(l1_mean_derivative_constant()));
    for &q in &grid.q {
        push("c_poincare", &[("q", q)], "sqrt(q-1) if q>=2 else pi/2", c_poincare(q));
        push("poincare_lower_bound", &[("q", q)], "sqrt(2) pi^(-1/(2q)) Gamma((q+1)/2)^(1/q)", poincare_lower_bound(q));
        for &l in &grid.l {
            push(
                "d_expected",
                &[("l", l as f64), ("q", q)],
                "sqrt(l!) if q>=2 else sqrt(l!) (q/(q-1)-1)^(l/2)",
                d_expected(l, q),
            );
        }
        for &k in &grid.k {
            push("tau", &[("k", k as f64), ("q", q)], "prod_{l<k} (1 + max(d_{l,q}, c_q))", tau_equivalence(k, q));
        }
    }
    for &n in &grid.n {
        for &l in &grid.l {
            push(
                "c_finite_dim",
                &[("l", l as f64), ("n", n as f64)],
                "2^(sum_{m<l} l!/(l-m)!) * (18 sqrt(e) n)^(sum_{m<=l} l!/(l-m)!)",
                c_finite_dim(l, n),
            );
        }
    }
    ConstantTable { entries }
}

impl ConstantTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "params", "formula", "value"]).expect("in-memory write");
        for e in &self.entries {
            let params: Vec<String> = e.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            w.write_record([e.name.clone(), params.join(";"), e.formula.clone(), format!("{:.17e}", e.value)]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}
