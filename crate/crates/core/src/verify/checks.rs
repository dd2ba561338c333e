//! The individual checks. Each returns a [`CheckReport`] whose rows claim
//! `lhs ≤ rhs` unless the relation says otherwise.

use std::collections::BTreeMap;
use std::f64::consts::{E, FRAC_2_PI};

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{CheckId, VerifyConfig};
use super::norms::{NormCache, Val};
use super::report::{CheckReport, CheckRow, Status};
use crate::constants::{
    c_finite_dim, c_finite_dim_recursive, c_poincare, chaos_poincare_constant, d_expected, eta_l1,
    finite_dim_norm_prefactor, l1_mean_derivative_constant, poincare_lower_bound, tau_equivalence,
};
use crate::functional::{CorpusMember, PolyFunctional};
use crate::hermite::{chaos_identity_check, chaos_l1_equivalence, chaos_l2_sq, hermite, hypercontractivity_ratio, to_hermite};
use crate::integrate::roots::{derivative as poly_derivative, horner};
use crate::integrate::{interval_integral, lq_norm, real_roots, QuadratureConfig, Weight};
use crate::malliavin::{derivative, mean_derivative};
use crate::ou::{apply, apply_diagonal, check_gradient_commutation, check_long_time_limit, check_mean_preservation, check_smoothing_bound, OUTime};
use crate::poly::{factorial, QPoly};

type Params<'a> = &'a [(&'a str, f64)];

fn params(p: Params) -> BTreeMap<String, f64> {
    p.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn row(case: &str, relation: &str, p: Params, lhs: f64, rhs: f64, err: f64, status: Status) -> CheckRow {
    CheckRow {
        case_id: case.into(),
        relation: relation.into(),
        params: params(p),
        lhs: Some(lhs),
        rhs: Some(rhs),
        margin: Some(rhs - lhs),
        integration_error: err,
        status,
        note: None,
    }
}

fn with_note(mut r: CheckRow, note: impl Into<String>) -> CheckRow {
    r.note = Some(note.into());
    r
}

fn failed(case: &str, relation: &str, p: Params, msg: String) -> CheckRow {
    CheckRow {
        case_id: case.into(),
        relation: relation.into(),
        params: params(p),
        lhs: None,
        rhs: None,
        margin: None,
        integration_error: 0.0,
        status: Status::IntegrationFailure,
        note: Some(msg),
    }
}

/// Pass iff rhs − lhs ≥ −(tol + integration error).
fn judged(case: &str, relation: &str, p: Params, sides: Result<(Val, Val), String>, tol: f64) -> CheckRow {
    match sides {
        Ok((l, r)) => {
            let err = l.error + r.error;
            let ok = r.value - l.value >= -(tol + err);
            row(case, relation, p, l.value, r.value, err, if ok { Status::Pass } else { Status::Fail })
        }
        Err(msg) => failed(case, relation, p, msg),
    }
}

/// |lhs − rhs| ≤ tol, reported with margin tol − |lhs − rhs|.
fn agreement(case: &str, relation: &str, p: Params, lhs: f64, rhs: f64, tol: f64) -> CheckRow {
    let gap = (lhs - rhs).abs();
    let mut r = row(case, relation, p, lhs, rhs, 0.0, if gap <= tol { Status::Pass } else { Status::Fail });
    r.margin = Some(tol - gap);
    r
}

fn exact(case: &str, relation: &str, p: Params, lhs: f64, rhs: f64, equal: bool) -> CheckRow {
    let mut r = row(case, relation, p, lhs, rhs, 0.0, if equal { Status::Pass } else { Status::Fail });
    r.margin = Some(0.0);
    r
}

fn exploratory(case: &str, relation: &str, p: Params, lhs: f64, rhs: f64, err: f64) -> CheckRow {
    row(case, relation, p, lhs, rhs, err, Status::Exploratory)
}

fn hermite_witness(l: u32) -> PolyFunctional {
    PolyFunctional::scalar(hermite(l).to_poly(1, 0))
}

fn x1() -> PolyFunctional {
    hermite_witness(1)
}

fn val(r: crate::Result<crate::IntegralResult>) -> Result<Val, String> {
    r.map(|r| Val { value: r.value, error: r.error_estimate }).map_err(|e| e.to_string())
}

/// Runs checks over one corpus, sharing the norm cache between them.
pub struct Checker<'a> {
    cfg: &'a VerifyConfig,
    cache: NormCache<'a>,
    tol: f64,
}

impl<'a> Checker<'a> {
    pub fn new(cfg: &'a VerifyConfig, members: &'a [CorpusMember]) -> Self {
        Checker { cfg, cache: NormCache::new(members, cfg.quadrature()), tol: cfg.tolerances.margin_abs }
    }

    fn members(&self) -> &'a [CorpusMember] {
        self.cache.members()
    }

    fn quad(&self) -> QuadratureConfig {
        self.cache.quadrature().clone()
    }

    pub fn run(&mut self, id: CheckId) -> CheckReport {
        let (mut rows, extras, notes) = match id {
            CheckId::ChaosIdentity => self.chaos_identity(),
            CheckId::Poincare => self.poincare(),
            CheckId::ExpectedDerivative => self.expected_derivative(),
            CheckId::L1MeanDerivative => self.l1_mean_derivative(),
            CheckId::L1Sandwich => self.l1_sandwich(),
            CheckId::NormEquivalence => self.norm_equivalence(),
            CheckId::TrivialBound => self.trivial_bound(),
            CheckId::FiniteDim => self.finite_dim(),
            CheckId::Adams => self.adams(),
            CheckId::Counterexample => {
                let g = &self.cfg.grids;
                let r = demonstrate_counterexample(&g.counterexample_k, &g.counterexample_rho, &self.quad());
                (r.rows, r.summary.extras, r.summary.notes)
            }
            CheckId::ChaosPoincare => self.chaos_poincare(),
            CheckId::Hypercontractivity => self.hypercontractivity(),
            CheckId::OuSemigroup => self.ou_semigroup(),
            CheckId::VectorConsistency => self.vector_consistency(),
        };
        rows.sort_by(|a, b| a.case_id.cmp(&b.case_id));
        CheckReport::new(id, rows, extras, notes)
    }
}

type Outcome = (Vec<CheckRow>, BTreeMap<String, f64>, Vec<String>);

impl Checker<'_> {
    fn chaos_identity(&mut self) -> Outcome {
        let mut rows = Vec::new();
        for m in self.members() {
            let f = &m.functional;
            for k in 0..=self.cfg.grids.chaos_identity_max {
                let p: Params = &[("k", k as f64)];
                let mean = mean_derivative(f, k as usize);
                match chaos_identity_check(f, k, &mean) {
                    Ok(res) => {
                        let lhs = mean.norm();
                        let rhs = (factorial(k).to_f64().unwrap_or(f64::NAN) * chaos_l2_sq(f, k).to_f64().unwrap_or(f64::NAN)).sqrt();
                        let mut r = exact(&m.id, "chaos_identity", p, lhs, rhs, res == 0.0);
                        r.margin = Some(-res);
                        rows.push(r);
                    }
                    Err(e) => rows.push(with_note(exact(&m.id, "chaos_identity", p, f64::NAN, f64::NAN, false), e.to_string())),
                }
            }
        }
        (rows, BTreeMap::new(), vec![])
    }

    fn poincare(&mut self) -> Outcome {
        let mut rows = Vec::new();
        let mut extras = BTreeMap::new();
        let tol = self.tol;
        let witness = self.members().iter().position(|m| m.id == "witness-x1");
        for &q in &self.cfg.grids.q.clone() {
            let c = c_poincare(q).expect("validated q");
            let p: Params = &[("q", q)];
            let mut sup: Option<(f64, f64)> = None;
            for i in 0..self.members().len() {
                let id = self.members()[i].id.clone();
                let sides = self.cache.norm(i, super::norms::NormKind::Centered, q).and_then(|l| Ok((l, self.cache.d(i, 1, q)?)));
                if let Ok((l, d)) = &sides {
                    if d.value > 0.0 {
                        let r = l.ratio(*d);
                        if sup.is_none_or(|s| r.value > s.0) {
                            sup = Some((r.value, r.error));
                        }
                    }
                }
                rows.push(judged(&id, "poincare", p, sides.map(|(l, d)| (l, c * d)), tol));
            }
            if let Some((s, e)) = sup {
                extras.insert(format!("sup_ratio_q{q}"), s);
                rows.push(judged("corpus", "sup_ratio", p, Ok((Val { value: s, error: e }, Val::exact(c))), tol));
            }
            let lb = poincare_lower_bound(q).expect("validated q");
            if let Some(w) = witness {
                let ratio = self.cache.norm(w, super::norms::NormKind::Centered, q).and_then(|l| Ok(l.ratio(self.cache.d(w, 1, q)?)));
                match ratio {
                    Ok(r) => {
                        extras.insert(format!("witness_ratio_q{q}"), r.value);
                        rows.push(judged("witness-x1", "witness_lower_bound", p, Ok((Val::exact(lb), r)), 1e-6));
                        rows.push(judged("witness-x1", "witness_below_constant", p, Ok((r, Val::exact(c))), tol));
                        if q == 2.0 {
                            rows.push(agreement("witness-x1", "saturation", p, r.value, 1.0, 1e-9));
                        }
                    }
                    Err(e) => rows.push(failed("witness-x1", "witness_lower_bound", p, e)),
                }
            }
        }
        for i in 0..=76 {
            let q = 1.0 + 0.25 * i as f64;
            let lb = poincare_lower_bound(q).expect("q ≥ 1");
            let ub = c_poincare(q).expect("q ≥ 1");
            // lb(2) = ub(2) = 1 up to rounding
            rows.push(judged("constants", "lower_le_upper", &[("q", q)], Ok((Val::exact(lb), Val::exact(ub))), 1e-14));
        }
        (rows, extras, vec![])
    }

    fn expected_derivative(&mut self) -> Outcome {
        let mut rows = Vec::new();
        let mut notes = Vec::new();
        let g = self.cfg.grids.clone();
        for &l in &g.ell {
            let refused = d_expected(l, 1.0).is_err();
            rows.push(with_note(
                exact("constants", "refuses_q1", &[("ell", l as f64)], 1.0, 1.0, refused),
                "the bound has no finite constant at q = 1",
            ));
        }
        for &q in &g.q {
            if q <= 1.0 {
                notes.push(format!("q = {q} skipped: the expected-derivative bound needs q > 1"));
                continue;
            }
            for &l in &g.ell {
                let d = d_expected(l, q).expect("q > 1, ℓ ≥ 1");
                let p: Params = &[("ell", l as f64), ("q", q)];
                for i in 0..self.members().len() {
                    let id = self.members()[i].id.clone();
                    let lhs = Val::exact(self.cache.mean_norm(i, l as usize));
                    let sides = self.cache.d(i, 0, q).map(|n| (lhs, d * n));
                    rows.push(judged(&id, "expected_derivative", p, sides, self.tol));
                }
            }
        }
        (rows, BTreeMap::new(), notes)
    }

    fn l1_mean_derivative(&mut self) -> Outcome {
        let mut rows = Vec::new();
        let c = l1_mean_derivative_constant();
        let g = self.cfg.grids.clone();
        for &l in &g.ell {
            for &rho in &g.rho {
                let p: Params = &[("ell", l as f64), ("rho", rho)];
                for i in 0..self.members().len() {
                    let id = self.members()[i].id.clone();
                    let lhs = Val::exact(self.cache.mean_norm(i, l as usize));
                    let l = l as usize;
                    let sides = (|| Ok((lhs, c * ((1.0 / rho) * self.cache.d(i, l - 1, 1.0)? + rho * self.cache.d(i, l + 1, 1.0)?))))();
                    rows.push(judged(&id, "l1_mean_derivative", p, sides, self.tol));
                }
            }
        }
        (rows, BTreeMap::new(), vec![])
    }

    fn l1_sandwich(&mut self) -> Outcome {
        let mut rows = Vec::new();
        let eta = eta_l1();
        for &l in &self.cfg.grids.ell.clone() {
            let l = l as usize;
            let p: Params = &[("ell", l as f64)];
            for i in 0..self.members().len() {
                let id = self.members()[i].id.clone();
                let sides = (|| Ok((self.cache.d(i, l, 1.0)?, eta * (self.cache.d(i, l - 1, 1.0)? + self.cache.d(i, l + 1, 1.0)?))))();
                rows.push(judged(&id, "l1_sandwich", p, sides, self.tol));
            }
        }
        (rows, BTreeMap::new(), vec![])
    }

    fn norm_equivalence(&mut self) -> Outcome {
        let mut rows = Vec::new();
        let mut extras = BTreeMap::new();
        let mut notes = Vec::new();
        let eta = eta_l1();
        let g = self.cfg.grids.clone();
        for &k in &g.k {
            for &q in &g.q {
                let ku = k as usize;
                let p: Params = &[("k", k as f64), ("q", q)];
                let lower_c = 2f64.powf(1.0 / q - 1.0);
                let mut max_ratio: f64 = 0.0;
                for i in 0..self.members().len() {
                    let id = self.members()[i].id.clone();
                    let both = (|| Ok((self.cache.graph(i, ku, q)?, self.cache.full(i, ku, q)?)))();
                    rows.push(judged(&id, "lower", p, both.clone().map(|(gr, d)| (lower_c * gr, d)), self.tol));
                    if q > 1.0 {
                        let tau = tau_equivalence(k, q).expect("k ≥ 2, q > 1");
                        rows.push(judged(&id, "upper", p, both.map(|(gr, d)| (d, tau * gr)), self.tol));
                    } else if k == 2 {
                        rows.push(judged(&id, "upper_q1_k2", p, both.map(|(gr, d)| (d, (1.0 + eta) * gr)), self.tol));
                    } else {
                        let even = (|| {
                            let extra = (1..ku.div_ceil(2)).try_fold(Val::exact(0.0), |acc, l| Ok::<_, String>(acc + self.cache.d(i, 2 * l, 1.0)?))?;
                            Ok((self.cache.full(i, ku, 1.0)?, (1.0 + 2.0 * eta) * (self.cache.graph(i, ku, 1.0)? + extra)))
                        })();
                        rows.push(judged(&id, "upper_even", p, even, self.tol));
                        let odd = (|| {
                            let extra = (1..=ku / 2).try_fold(Val::exact(0.0), |acc, l| Ok::<_, String>(acc + self.cache.d(i, 2 * l - 1, 1.0)?))?;
                            Ok((self.cache.full(i, ku, 1.0)?, (1.0 + 2.0 * eta) * (self.cache.graph(i, ku, 1.0)? + extra)))
                        })();
                        rows.push(judged(&id, "upper_odd", p, odd, self.tol));
                        if let Ok((gr, d)) = both {
                            if gr.value > 0.0 {
                                let r = d.ratio(gr);
                                max_ratio = max_ratio.max(r.value);
                                rows.push(exploratory(&id, "ratio", p, d.value, gr.value, r.error));
                            }
                        }
                    }
                }
                if q == 1.0 && k >= 3 {
                    extras.insert(format!("max_full_over_graph_k{k}_q1"), max_ratio);
                    notes.push(format!("k = {k}, q = 1: the full/graph ratio is recorded without a threshold"));
                }
            }
        }
        (rows, extras, notes)
    }

    fn trivial_bound(&mut self) -> Outcome {
        let mut rows = Vec::new();
        let g = self.cfg.grids.clone();
        for &k in &g.k {
            for &q in &g.q {
                let p: Params = &[("k", k as f64), ("q", q)];
                let c = 2f64.powf(1.0 - 1.0 / q);
                for i in 0..self.members().len() {
                    let id = self.members()[i].id.clone();
                    let sides = (|| Ok((self.cache.graph(i, k as usize, q)?, c * self.cache.full(i, k as usize, q)?)))();
                    rows.push(judged(&id, "trivial_bound", p, sides, self.tol));
                }
            }
        }
        (rows, BTreeMap::new(), vec![])
    }

    fn finite_dim(&mut self) -> Outcome {
        let mut rows = Vec::new();
        for l in 1..=4u32 {
            for n in 1..=8u32 {
                let a = c_finite_dim(l, n).expect("ℓ, n ≥ 1");
                let b = c_finite_dim_recursive(l, n).expect("ℓ, n ≥ 1");
                let rel = (a - b).abs() / a.abs();
                let mut r = row("constants", "closed_form_vs_recursion", &[("ell", l as f64), ("n", n as f64)], a, b, 0.0, if rel <= 1e-10 { Status::Pass } else { Status::Fail });
                r.margin = Some(1e-10 - rel);
                rows.push(r);
            }
        }
        let g = self.cfg.grids.clone();
        for &q in &g.finite_dim_q {
            for i in 0..self.members().len() {
                let id = self.members()[i].id.clone();
                let n = self.members()[i].functional.dim() as u32;
                for &l in &g.ell {
                    let c = c_finite_dim(l, n).expect("ℓ, n ≥ 1");
                    for &rho in &g.rho {
                        let p: Params = &[("ell", l as f64), ("n", n as f64), ("q", q), ("rho", rho)];
                        let lu = l as usize;
                        let sides = (|| Ok((self.cache.d(i, lu, q)?, c * (rho.powi(-(l as i32)) * self.cache.d(i, 0, q)? + rho * self.cache.d(i, lu + 1, q)?))))();
                        rows.push(judged(&id, "derivative_interpolation", p, sides, self.tol));
                    }
                }
                for &k in &g.k {
                    for &eps in &g.eps {
                        let pre = finite_dim_norm_prefactor(k, n, eps).expect("k ≥ 2, ε ∈ (0, 1)");
                        let p: Params = &[("eps", eps), ("k", k as f64), ("n", n as f64), ("q", q)];
                        let ku = k as usize;
                        let sides = (|| Ok((self.cache.full(i, ku, q)?, pre * self.cache.d(i, 0, q)? + (1.0 + eps) * self.cache.d(i, ku, q)?)))();
                        rows.push(judged(&id, "full_norm_bound", p, sides, self.tol));
                    }
                }
            }
        }
        (rows, BTreeMap::new(), vec![])
    }

    fn adams(&mut self) -> Outcome {
        let mut rows = Vec::new();
        let g = self.cfg.grids.clone();
        let quad = self.quad();
        let one_d: Vec<usize> = (0..self.members().len()).filter(|&i| self.members()[i].functional.dim() == 1).collect();
        for &i in &one_d {
            let m = &self.members()[i];
            let comps: Vec<Vec<f64>> = m.functional.components().iter().map(univariate).collect();
            for &x0 in &g.adams_x0 {
                let shifted: Vec<Vec<f64>> = comps.iter().map(|c| shift(c, x0)).collect();
                for &rho in &g.rho {
                    for (j, c) in shifted.iter().enumerate() {
                        let p: Params = &[("component", j as f64), ("rho", rho), ("x0", x0)];
                        rows.push(judged(&m.id, "interval_scalar", p, adams_scalar(c, rho, &quad), self.tol));
                    }
                    for &q in &g.q {
                        let p: Params = &[("q", q), ("rho", rho), ("x0", x0)];
                        rows.push(judged(&m.id, "interval_vector", p, adams_vector(&shifted, q, rho, &quad), self.tol));
                    }
                }
            }
        }
        for &i in &one_d {
            let id = self.members()[i].id.clone();
            for &q in &g.q {
                for &rho in &g.rho {
                    let p: Params = &[("q", q), ("rho", rho)];
                    let c = 18f64.powf(q) * E.sqrt();
                    let sides = (|| {
                        let lhs = self.cache.d(i, 1, q)?.powf(q);
                        let rhs = c * (rho.powf(-q) * self.cache.d(i, 0, q)?.powf(q) + rho.powf(q) * self.cache.d(i, 2, q)?.powf(q));
                        Ok((lhs, rhs))
                    })();
                    rows.push(judged(&id, "gaussian", p, sides, self.tol));
                }
            }
        }
        (rows, BTreeMap::new(), vec![])
    }

    fn chaos_poincare(&mut self) -> Outcome {
        let mut rows = Vec::new();
        let mut notes = Vec::new();
        let quad = self.quad();
        let g = self.cfg.grids.clone();
        for &q in &g.q {
            if q <= 2.0 {
                continue;
            }
            for &l in &g.chaos_orders {
                let f = hermite_witness(l);
                let c = chaos_poincare_constant(l, q).expect("q > 2, ℓ ≥ 1");
                let p: Params = &[("ell", l as f64), ("q", q)];
                let id = format!("H{l}");
                let sides = (|| Ok((val(lq_norm(&f.centered(), q, &quad))?, c * val(crate::malliavin::derivative_norm(&f, 1, q, &quad))?)))();
                rows.push(judged(&id, "chaos_poincare", p, sides, self.tol));
                if l == 1 {
                    let cq = c_poincare(q).expect("q > 2");
                    rows.push(agreement("constants", "order_one_constant", p, c, cq, 1e-12 * cq));
                }
            }
        }
        if rows.is_empty() {
            notes.push("no q > 2 in the grid".into());
        }
        (rows, BTreeMap::new(), notes)
    }

    fn hypercontractivity(&mut self) -> Outcome {
        let mut rows = Vec::new();
        let mut extras = BTreeMap::new();
        let mut notes = Vec::new();
        let quad = self.quad();
        let g = self.cfg.grids.clone();
        for &l in &g.chaos_orders {
            let f = hermite_witness(l);
            let id = format!("H{l}");
            for &(s, r) in &g.hyper_pairs {
                let p: Params = &[("ell", l as f64), ("r", r), ("s", s)];
                match hypercontractivity_ratio(&f, l, s, r, &quad) {
                    Ok(h) => {
                        let e = h.error_estimate;
                        rows.push(judged(&id, "upper", p, Ok((Val { value: h.norm_r, error: e }, Val::exact(h.rhs))), self.tol));
                        rows.push(judged(&id, "monotone", p, Ok((Val { value: h.norm_s, error: e }, Val::exact(h.norm_r))), self.tol));
                    }
                    Err(e) => rows.push(failed(&id, "upper", p, e.to_string())),
                }
            }
            let p: Params = &[("ell", l as f64)];
            match chaos_l1_equivalence(&f, l, &quad) {
                Ok(c) => {
                    let e = c.error_estimate;
                    rows.push(judged(&id, "holder", p, Ok((Val { value: c.norm_2, error: e }, Val::exact(c.holder_rhs))), self.tol));
                    rows.push(judged(&id, "hyper_step", p, Ok((Val { value: c.norm_3, error: e }, Val::exact(c.hyper_rhs))), self.tol));
                    let chain = c.chain_constant * c.norm_1;
                    rows.push(judged(&id, "l1_chain", p, Ok((Val { value: c.norm_2, error: e }, Val::exact(chain))), self.tol));
                    let stated = c.stated_constant * c.norm_1;
                    let holds = c.norm_2 <= stated + e;
                    rows.push(with_note(
                        exploratory(&id, "l1_stated", p, c.norm_2, stated, e),
                        if holds { "holds on this witness" } else { "violated on this witness" },
                    ));
                    extras.insert(format!("l2_over_l1_ell{l}"), c.ratio);
                    extras.insert(format!("l2_over_l1_log2_per_ell{l}"), c.ratio.log2() / l as f64);
                }
                Err(e) => rows.push(failed(&id, "holder", p, e.to_string())),
            }
            if l == 2 {
                match lq_norm(&f, 4.0, &quad) {
                    Ok(n) => rows.push(agreement(&id, "h2_l4_value", &[("q", 4.0)], n.value, 60f64.powf(0.25), 1e-8)),
                    Err(e) => rows.push(failed(&id, "h2_l4_value", &[("q", 4.0)], e.to_string())),
                }
            }
        }
        notes.push("l1_stated rows record the constant 2^{3ℓ/8} without a threshold; l1_chain uses 2^{3ℓ/2}".into());
        (rows, extras, notes)
    }

    fn ou_members(&self) -> Vec<usize> {
        let g = &self.cfg.grids;
        (0..self.members().len())
            .filter(|&i| self.members()[i].functional.dim() <= g.ou_max_dim)
            .take(g.ou_members)
            .collect()
    }

    fn ou_semigroup(&mut self) -> Outcome {
        let mut rows = Vec::new();
        let mut notes = Vec::new();
        let quad = self.quad();
        let g = self.cfg.grids.clone();
        let times: Vec<OUTime> = g.t.iter().map(|&t| OUTime::new(t).expect("validated t")).collect();
        let chosen = self.ou_members();
        for &i in &chosen {
            let m = &self.members()[i];
            let f = &m.functional;
            for (ti, t) in times.iter().enumerate() {
                let p: Params = &[("t", t.t())];
                let pt = apply(f, t);
                rows.push(eigen_row(&m.id, f, &pt, t.t()));
                rows.push(exact(&m.id, "mehler_vs_diagonal", p, 0.0, 0.0, pt == apply_diagonal(f, t)));
                let drift = check_mean_preservation(f, t);
                rows.push(exact(&m.id, "mean_preservation", p, drift, 0.0, drift == 0.0));
                for s in &times[ti..] {
                    let both = apply(&pt, s) == apply(f, &t.then(s));
                    rows.push(exact(&m.id, "semigroup_law", &[("s", s.t()), ("t", t.t())], 0.0, 0.0, both));
                }
                for &q in &g.ou_q {
                    let p: Params = &[("q", q), ("t", t.t())];
                    rows.push(node_row(&m.id, "gradient_commutation", p, check_gradient_commutation(f, t, q, g.ou_nodes, &quad), self.tol));
                    if q > 1.0 && f.codim() == 1 {
                        rows.push(node_row(&m.id, "smoothing", p, check_smoothing_bound(f, t, q, g.ou_nodes, &quad), self.tol));
                    }
                }
            }
            match check_long_time_limit(f, &times, 2.0, &quad) {
                Ok(v) => {
                    let base = f.centered().l2_norm_sq().to_f64().unwrap_or(f64::NAN).sqrt();
                    for (t, r) in times.iter().zip(&v) {
                        let p: Params = &[("q", 2.0), ("t", t.t())];
                        let rhs = Val::exact((-t.t()).exp() * base);
                        rows.push(judged(&m.id, "spectral_gap", p, Ok((Val { value: r.value, error: r.error_estimate }, rhs)), self.tol));
                    }
                }
                Err(e) => rows.push(failed(&m.id, "spectral_gap", &[("q", 2.0)], e.to_string())),
            }
        }
        notes.push(format!("semigroup node checks use {} members of dimension ≤ {}", chosen.len(), g.ou_max_dim));
        notes.push("the smoothing bound is checked for scalar members and q > 1".into());
        match check_long_time_limit(&x1(), &times, 2.0, &quad) {
            Ok(v) => {
                for (t, r) in times.iter().zip(&v) {
                    rows.push(agreement("witness-x1", "long_time_residual", &[("q", 2.0), ("t", t.t())], r.value, (-t.t()).exp(), 1e-9));
                }
            }
            Err(e) => rows.push(failed("witness-x1", "long_time_residual", &[("q", 2.0)], e.to_string())),
        }
        (rows, BTreeMap::new(), notes)
    }

    fn vector_consistency(&mut self) -> Outcome {
        let mut rows = Vec::new();
        let mut notes = Vec::new();
        let quad = self.quad();
        let pool: Vec<usize> = (0..self.members().len())
            .filter(|&i| {
                let f = &self.members()[i].functional;
                f.codim() == 1 && f.dim() <= 2
            })
            .collect();
        if pool.is_empty() {
            notes.push("no scalar members of dimension ≤ 2".into());
            return (rows, BTreeMap::new(), notes);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ 0x7665_6374_6f72);
        for trial in 0..self.cfg.grids.vector_triples {
            let pick: Vec<usize> = (0..3).map(|_| pool[rng.random_range(0..pool.len())]).collect();
            let parts: Vec<&CorpusMember> = pick.iter().map(|&i| &self.members()[i]).collect();
            let id = format!("triple-{trial}:{}", parts.iter().map(|m| m.id.as_str()).collect::<Vec<_>>().join("+"));
            let dim = parts.iter().map(|m| m.functional.dim()).max().unwrap_or(1);
            let fs: Vec<PolyFunctional> = parts.iter().map(|m| m.functional.extend_dim(dim).expect("dimension grows")).collect();
            let stacked = PolyFunctional::stack(&fs).expect("same dimension");
            let sum = |v: Vec<BigRational>| v.into_iter().fold(BigRational::zero(), |a, b| a + b);
            let lhs = stacked.l2_norm_sq();
            let rhs = sum(fs.iter().map(|f| f.l2_norm_sq()).collect());
            rows.push(exact(&id, "l2_pythagoras", &[], lhs.to_f64().unwrap_or(f64::NAN), rhs.to_f64().unwrap_or(f64::NAN), lhs == rhs));
            let lhs = derivative(&stacked, 1).sum_of_squares().exact_power_mean(1);
            let rhs = sum(fs.iter().map(|f| derivative(f, 1).sum_of_squares().exact_power_mean(1)).collect());
            rows.push(exact(&id, "derivative_pythagoras", &[], lhs.to_f64().unwrap_or(f64::NAN), rhs.to_f64().unwrap_or(f64::NAN), lhs == rhs));
            for l in 1..=2usize {
                let lhs = mean_derivative(&stacked, l).norm_sq();
                let rhs = sum(fs.iter().map(|f| mean_derivative(f, l).norm_sq()).collect());
                rows.push(exact(&id, "mean_derivative_pythagoras", &[("ell", l as f64)], lhs.to_f64().unwrap_or(f64::NAN), rhs.to_f64().unwrap_or(f64::NAN), lhs == rhs));
            }
            for q in [1.0, 3.0] {
                let p: Params = &[("q", q)];
                let whole = val(lq_norm(&stacked, q, &quad));
                let parts: Result<Vec<Val>, String> = fs.iter().map(|f| val(lq_norm(f, q, &quad))).collect();
                let (whole, parts) = match (whole, parts) {
                    (Ok(w), Ok(p)) => (w, p),
                    (Err(e), _) | (_, Err(e)) => {
                        rows.push(failed(&id, "triangle", p, e));
                        continue;
                    }
                };
                let total = parts.iter().fold(Val::exact(0.0), |a, &b| a + b);
                rows.push(judged(&id, "triangle", p, Ok((whole, total)), self.tol));
                let top = parts.iter().copied().max_by(|a, b| a.value.total_cmp(&b.value)).expect("three parts");
                rows.push(judged(&id, "component_below", p, Ok((top, whole)), self.tol));
            }
        }
        (rows, BTreeMap::new(), notes)
    }
}

fn node_row(id: &str, relation: &str, p: Params, r: crate::Result<crate::ou::NodeCheck>, tol: f64) -> CheckRow {
    match r {
        Ok(n) => {
            let ok = n.margin >= -(tol + n.integration_error);
            let mut r = row(id, relation, p, n.lhs, n.rhs, n.integration_error, if ok { Status::Pass } else { Status::Fail });
            r.note = Some(format!("worst of {} nodes at {:?}", n.nodes, n.worst_point));
            r
        }
        Err(e) => failed(id, relation, p, e.to_string()),
    }
}

/// Largest deviation of the Hermite coefficients of P_tF from e^{−|α|t}c_α,
/// relative to the largest |c_α|.
fn eigen_row(id: &str, f: &PolyFunctional, pt: &PolyFunctional, t: f64) -> CheckRow {
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (a, b) in f.components().iter().zip(pt.components()) {
        let ea = to_hermite(a, f.dim()).expect("same dimension");
        let eb = to_hermite(b, f.dim()).expect("same dimension");
        for (alpha, c) in &ea.coeffs {
            let c = c.to_f64().unwrap_or(f64::NAN);
            scale = scale.max(c.abs());
            let got = eb.coeffs.get(alpha).map_or(0.0, |v| v.to_f64().unwrap_or(f64::NAN));
            worst = worst.max((got - (-(alpha.degree() as f64) * t).exp() * c).abs());
        }
        for (alpha, v) in &eb.coeffs {
            if !ea.coeffs.contains_key(alpha) {
                worst = worst.max(v.abs().to_f64().unwrap_or(f64::NAN));
            }
        }
    }
    let rel = if scale > 0.0 { worst / scale } else { worst };
    let mut r = row(id, "eigenrelation", &[("t", t)], rel, 1e-12, 0.0, if rel <= 1e-12 { Status::Pass } else { Status::Fail });
    r.margin = Some(1e-12 - rel);
    r
}

/// Coefficients, lowest power first, of a polynomial in one variable.
fn univariate(p: &QPoly) -> Vec<f64> {
    let mut c = vec![0.0; p.degree() as usize + 1];
    for (alpha, v) in p.terms() {
        c[alpha.exponents()[0] as usize] += v.to_f64().unwrap_or(f64::NAN);
    }
    c
}

/// Coefficients of t ↦ p(x₀ + t).
fn shift(c: &[f64], x0: f64) -> Vec<f64> {
    let mut out = c.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            out[j] += x0 * out[j + 1];
        }
    }
    out
}

fn integral(g: impl Fn(f64) -> f64, rho: f64, breaks: &[f64], quad: &QuadratureConfig) -> Result<Val, String> {
    val(interval_integral(g, 0.0, rho, breaks, Weight::Lebesgue, quad))
}

fn kinks(polys: &[Vec<f64>], rho: f64) -> Vec<f64> {
    let mut b: Vec<f64> = polys.iter().flat_map(|c| real_roots(c, 0.0, rho)).collect();
    b.sort_by(f64::total_cmp);
    b
}

/// |g′(0)| against 9(ρ^{−2}∫₀^ρ|g| + ∫₀^ρ|g″|).
fn adams_scalar(g: &[f64], rho: f64, quad: &QuadratureConfig) -> Result<(Val, Val), String> {
    let g1 = poly_derivative(g);
    let g2 = poly_derivative(&g1);
    let lhs = Val::exact(g1.first().copied().unwrap_or(0.0).abs());
    let a = integral(|t| horner(g, t).abs(), rho, &kinks(&[g.to_vec()], rho), quad)?;
    let b = integral(|t| horner(&g2, t).abs(), rho, &kinks(&[g2.clone()], rho), quad)?;
    Ok((lhs, 9.0 * ((1.0 / (rho * rho)) * a + b)))
}

/// ‖g′(0)‖^q against 9^q 2^{q−1}(ρ^{−q−1}∫₀^ρ‖g‖^q + ρ^{q−1}∫₀^ρ‖g″‖^q).
fn adams_vector(g: &[Vec<f64>], q: f64, rho: f64, quad: &QuadratureConfig) -> Result<(Val, Val), String> {
    let g2: Vec<Vec<f64>> = g.iter().map(|c| poly_derivative(&poly_derivative(c))).collect();
    let norm = |v: &[Vec<f64>], t: f64| v.iter().map(|c| horner(c, t).powi(2)).sum::<f64>().sqrt().powf(q);
    let d0: f64 = g.iter().map(|c| c.get(1).copied().unwrap_or(0.0).powi(2)).sum::<f64>().sqrt();
    let a = integral(|t| norm(g, t), rho, &kinks(g, rho), quad)?;
    let b = integral(|t| norm(&g2, t), rho, &kinks(&g2, rho), quad)?;
    let c = 9f64.powf(q) * 2f64.powf(q - 1.0);
    Ok((Val::exact(d0.powf(q)), c * (rho.powf(-q - 1.0) * a + rho.powf(q - 1.0) * b)))
}

/// The failed Gaussian inequality ‖f′‖_{L¹} ≤ K(ρ^{−1}‖f‖_{L¹} + ρ‖f″‖_{L¹})
/// for f(x) = x. For each K, ρ = 2K√(2/π) gives a right side of 1/2 < 1.
pub fn demonstrate_counterexample(k_grid: &[f64], rho_grid: &[f64], quad: &QuadratureConfig) -> CheckReport {
    let mut rows = Vec::new();
    let mut extras = BTreeMap::new();
    let f = x1();
    let exact_l1 = FRAC_2_PI.sqrt();
    let lhs = val(crate::malliavin::derivative_norm(&f, 1, 1.0, quad));
    let norm = val(lq_norm(&f, 1.0, quad));
    let second = val(crate::malliavin::derivative_norm(&f, 2, 1.0, quad));
    let (lhs, norm, second) = match (lhs, norm, second) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
            rows.push(failed("x", "l1_norm", &[], e));
            return CheckReport::new(CheckId::Counterexample, rows, extras, vec![]);
        }
    };
    rows.push(agreement("x", "l1_norm", &[], norm.value, exact_l1, 1e-9));
    extras.insert("l1_norm_x".into(), norm.value);
    let rhs_at = |k: f64, rho: f64| k * ((1.0 / rho) * norm + rho * second);
    for &k in k_grid {
        let rho = 2.0 * k * exact_l1;
        let rhs = rhs_at(k, rho);
        let err = lhs.error + rhs.error;
        let status = if rhs.value < lhs.value - err { Status::FalsifiedAsExpected } else { Status::Fail };
        rows.push(with_note(
            row("x", "witness", &[("K", k), ("rho", rho)], lhs.value, rhs.value, err, status),
            format!("K = {k}, ρ = {rho:.6} violates the inequality"),
        ));
        let threshold = k * exact_l1;
        let r = rhs_at(k, threshold);
        rows.push(exploratory("x", "threshold", &[("K", k), ("rho", threshold)], lhs.value, r.value, lhs.error + r.error));
        for &rho in rho_grid {
            let r = rhs_at(k, rho);
            let e = lhs.error + r.error;
            let status = if r.value < lhs.value - e { Status::FalsifiedAsExpected } else { Status::Exploratory };
            rows.push(row("x", "grid", &[("K", k), ("rho", rho)], lhs.value, r.value, e, status));
        }
    }
    let notes = vec!["any ρ > K√(2/π) violates the inequality for f(x) = x; it cannot hold with a uniform K".to_string()];
    CheckReport::new(CheckId::Counterexample, rows, extras, notes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_and_univariate() {
        // (x + 1)² = 1 + 2x + x²
        assert_eq!(shift(&[0.0, 0.0, 1.0], 1.0), vec![1.0, 2.0, 1.0]);
        // x³ − 3x at x = 2 + t: 2 + 9t + 6t² + t³
        assert_eq!(shift(&[0.0, -3.0, 0.0, 1.0], 2.0), vec![2.0, 9.0, 6.0, 1.0]);
        assert_eq!(univariate(&hermite(2).to_poly(1, 0)), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn adams_examples() {
        let quad = QuadratureConfig::default();
        // g(t) = t, ρ = 1: 1 ≤ 9·(1/2)
        let (l, r) = adams_scalar(&[0.0, 1.0], 1.0, &quad).unwrap();
        assert_eq!(l.value, 1.0);
        assert!((r.value - 4.5).abs() < 1e-12);
        let (l, _) = adams_scalar(&[3.0], 0.5, &quad).unwrap();
        assert_eq!(l.value, 0.0);
        // g(t) = (t − 1/2)² on [0, 1]: ∫|g| = 1/12, ∫|g″| = 2, g′(0) = −1
        let (l, r) = adams_scalar(&[0.25, -1.0, 1.0], 1.0, &quad).unwrap();
        assert_eq!(l.value, 1.0);
        assert!((r.value - 9.0 * (1.0 / 12.0 + 2.0)).abs() < 1e-12);
        // vector form at q = 1 reduces to the scalar form for one component
        let (lv, rv) = adams_vector(&[vec![0.0, 1.0]], 1.0, 1.0, &quad).unwrap();
        assert_eq!(lv.value, 1.0);
        assert!((rv.value - 4.5).abs() < 1e-12);
    }

    #[test]
    fn counterexample_statuses() {
        let r = demonstrate_counterexample(&[10.0], &[0.1, 10.0], &QuadratureConfig::default());
        let w = r.rows_with("witness").next().unwrap();
        assert_eq!(w.status, Status::FalsifiedAsExpected);
        assert!((w.rhs.unwrap() - 0.5).abs() < 1e-9);
        let grid: Vec<_> = r.rows_with("grid").collect();
        // K = 10, ρ = 10: rhs = √(2/π) ≈ 0.798 < 1
        assert_eq!(grid[1].status, Status::FalsifiedAsExpected);
        assert!((grid[1].rhs.unwrap() - 0.797_884_560_802_865_4).abs() < 1e-9);
        // K = 10, ρ = 0.1: no contradiction
        assert_eq!(grid[0].status, Status::Exploratory);
        let t = r.rows_with("threshold").next().unwrap();
        assert!((t.rhs.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(r.rows_with("l1_norm").next().unwrap().status, Status::Pass);
    }

    #[test]
    fn judge_uses_tolerance_and_error() {
        let l = Val { value: 1.0, error: 1e-6 };
        let r = Val::exact(1.0 - 5e-7);
        assert_eq!(judged("a", "r", &[], Ok((l, r)), 0.0).status, Status::Pass);
        assert_eq!(judged("a", "r", &[], Ok((Val::exact(1.0), r)), 1e-7).status, Status::Fail);
        assert_eq!(judged("a", "r", &[], Err("x".into()), 0.0).status, Status::IntegrationFailure);
    }
}
