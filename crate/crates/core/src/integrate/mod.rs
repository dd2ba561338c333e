//! Expectations under the standard Gaussian measure γₙ.
//!
//! Three paths, chosen per call:
//! * exact Gaussian moments when the integrand is a polynomial (even q);
//! * nested adaptive Gauss–Kronrod for polynomial fields in up to three
//!   active variables, with breakpoints at the zeros of the field on each
//!   innermost line;
//! * tensor Gauss–Hermite (m doubling) up to six variables, Monte Carlo beyond.

mod adaptive;
mod dense;
mod mc;
pub(crate) mod roots;
mod rules;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use dense::DensePoly;
pub use mc::{lq_norm_mc, power_mean_mc};
pub use roots::real_roots;
pub use rules::{gauss_hermite, QuadratureGrid};
use rules::{GK31, GK61};

use crate::error::{Error, Result};
use crate::functional::PolyFunctional;
use crate::poly::{Poly, QPoly};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// One step of a refinement sequence: rule size (nodes per axis, or number
/// of adaptive panels) and the value obtained with it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub m: usize,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Symbolic,
    Quadrature,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub method: Method,
    pub error_estimate: f64,
    pub refinement_history: Vec<Refinement>,
}

impl IntegralResult {
    pub fn exact(value: f64) -> Self {
        IntegralResult { value, method: Method::Symbolic, error_estimate: 0.0, refinement_history: vec![] }
    }
}

/// Which integration path to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrationMethod {
    /// Symbolic for even q, adaptive up to 3 variables, Gauss–Hermite up to 6, MC beyond.
    #[default]
    Auto,
    /// Numerical quadrature even where the symbolic path applies.
    Quadrature,
    TensorGaussHermite,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub m_start: usize,
    pub m_max: usize,
    /// Cap on the number of tensor Gauss–Hermite nodes.
    pub max_nodes: usize,
    /// Cap on adaptive panels per integration level.
    pub max_intervals: usize,
    pub method: IntegrationMethod,
    pub mc_samples: usize,
    pub mc_seed: u64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-8,
            abs_floor: 1e-13,
            m_start: 8,
            m_max: 128,
            max_nodes: 1 << 22,
            max_intervals: 400,
            method: IntegrationMethod::Auto,
            mc_samples: 200_000,
            mc_seed: 0,
        }
    }
}

/// Anything with a pointwise squared Euclidean norm on ℝⁿ.
pub trait SquaredNormField: Sync {
    fn dim(&self) -> usize;
    /// Polynomial growth degree of ‖f(x)‖.
    fn growth_degree(&self) -> u32;
    fn sq_norm_at(&self, x: &[f64]) -> f64;
}

/// S(x) = Σ wᵢ pᵢ(x)² with exact nonnegative weights.
///
/// This is the squared Euclidean (or Hilbert–Schmidt) norm of a vector or
/// tensor field with polynomial entries, possibly with repeated entries
/// folded into a weight.
#[derive(Clone, Debug, PartialEq)]
pub struct SumOfSquares {
    dim: usize,
    terms: Vec<(BigRational, QPoly)>,
}

impl SumOfSquares {
    pub fn new(dim: usize) -> Self {
        SumOfSquares { dim, terms: Vec::new() }
    }

    pub fn from_components(dim: usize, comps: &[QPoly]) -> Self {
        let mut s = SumOfSquares::new(dim);
        for c in comps {
            s.push(BigRational::from_integer(BigInt::from(1)), c.clone());
        }
        s
    }

    pub fn push(&mut self, weight: BigRational, p: QPoly) {
        assert_eq!(p.dim(), self.dim, "component dimension");
        assert!(weight >= BigRational::zero(), "weights are nonnegative");
        if !p.is_zero() && !weight.is_zero() {
            self.terms.push((weight, p));
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(BigRational, QPoly)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, p)| p.degree()).max().unwrap_or(0)
    }

    /// Variables some term depends on.
    pub fn active_vars(&self) -> Vec<usize> {
        let mut used = vec![false; self.dim];
        for (_, p) in &self.terms {
            for (u, d) in used.iter_mut().zip(p.degree_per_var()) {
                *u |= d > 0;
            }
        }
        (0..self.dim).filter(|&i| used[i]).collect()
    }

    pub fn materialize(&self) -> QPoly {
        let mut s = QPoly::zero(self.dim);
        for (w, p) in &self.terms {
            s = &s + &(p * p).scale(w);
        }
        s
    }

    /// E[S^m] exactly.
    pub fn exact_power_mean(&self, m: u32) -> BigRational {
        match m {
            0 => BigRational::from_integer(BigInt::from(1)),
            1 => self
                .terms
                .iter()
                .map(|(w, p)| w * p.expectation_of_product(p))
                .fold(BigRational::zero(), |a, b| a + b),
            _ => {
                let s = self.materialize();
                let lo = s.pow(m / 2);
                let hi = if m % 2 == 0 { lo.clone() } else { &lo * &s };
                lo.expectation_of_product(&hi)
            }
        }
    }

    fn weighted_f64(&self, vars: &[usize]) -> Vec<(f64, DensePoly)> {
        self.terms
            .iter()
            .map(|(w, p)| (w.to_f64().unwrap_or(f64::NAN), DensePoly::from_poly(&p.to_f64(), vars)))
            .collect()
    }
}

impl SquaredNormField for SumOfSquares {
    fn dim(&self) -> usize {
        self.dim
    }
    fn growth_degree(&self) -> u32 {
        self.degree()
    }
    fn sq_norm_at(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(w, p)| {
                let v = p.eval_f64_unchecked(x);
                w.to_f64().unwrap_or(f64::NAN) * v * v
            })
            .sum()
    }
}

impl SquaredNormField for PolyFunctional {
    fn dim(&self) -> usize {
        PolyFunctional::dim(self)
    }
    fn growth_degree(&self) -> u32 {
        self.degree()
    }
    fn sq_norm_at(&self, x: &[f64]) -> f64 {
        self.components()
            .iter()
            .map(|p| {
                let v = p.eval_f64_unchecked(x);
                v * v
            })
            .sum()
    }
}

/// E[f] per component, exactly.
pub fn moment(f: &PolyFunctional) -> Vec<BigRational> {
    f.components().iter().map(QPoly::expectation).collect()
}

fn check_q(q: f64) -> Result<()> {
    if q >= 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("q must be a finite number ≥ 1, got {q}")))
    }
}

fn even_integer(q: f64) -> Option<u32> {
    (q.fract() == 0.0 && q >= 2.0 && (q as u64) % 2 == 0 && q <= 64.0).then(|| (q / 2.0) as u32)
}

/// (E‖f‖^q)^{1/q} for a polynomial functional.
pub fn lq_norm(f: &PolyFunctional, q: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    lq_norm_sos(&SumOfSquares::from_components(f.dim(), f.components()), q, cfg)
}

/// (E[S^{q/2}])^{1/q}.
pub fn lq_norm_sos(s: &SumOfSquares, q: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    check_q(q)?;
    if s.is_zero() {
        return Ok(IntegralResult::exact(0.0));
    }
    let active = s.active_vars();
    if active.is_empty() {
        // Constant field.
        let v = s.sq_norm_at(&vec![0.0; s.dim()]);
        return Ok(IntegralResult::exact(v.sqrt()));
    }
    match cfg.method {
        IntegrationMethod::Auto => {
            if let Some(m) = even_integer(q) {
                let e = s.exact_power_mean(m);
                return Ok(IntegralResult::exact(e.to_f64().unwrap_or(f64::NAN).powf(1.0 / q)));
            }
            numeric_sos(s, &active, q, cfg)
        }
        IntegrationMethod::Quadrature => numeric_sos(s, &active, q, cfg),
        IntegrationMethod::TensorGaussHermite => {
            let reduced = Reduced { inner: s, vars: &active };
            lq_norm_tensor_gh(&reduced, q, cfg)
        }
        IntegrationMethod::MonteCarlo => lq_norm_mc(s, q, cfg.mc_samples, cfg.mc_seed),
    }
}

fn numeric_sos(s: &SumOfSquares, active: &[usize], q: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    if active.len() <= 3 {
        let comps = s.weighted_f64(active);
        let pm = nested_power_mean(&comps, q, s.degree(), cfg)?;
        Ok(pm.into_norm(q))
    } else if active.len() <= 6 {
        let reduced = Reduced { inner: s, vars: active };
        lq_norm_tensor_gh(&reduced, q, cfg)
    } else {
        lq_norm_mc(s, q, cfg.mc_samples, cfg.mc_seed)
    }
}

/// A field viewed on a subset of its variables (the rest are irrelevant).
struct Reduced<'a> {
    inner: &'a SumOfSquares,
    vars: &'a [usize],
}

impl SquaredNormField for Reduced<'_> {
    fn dim(&self) -> usize {
        self.vars.len()
    }
    fn growth_degree(&self) -> u32 {
        self.inner.degree()
    }
    fn sq_norm_at(&self, x: &[f64]) -> f64 {
        let mut full = vec![0.0; self.inner.dim()];
        for (&v, &xi) in self.vars.iter().zip(x) {
            full[v] = xi;
        }
        self.inner.sq_norm_at(&full)
    }
}

/// Value of E[S^{q/2}] from a numerical path.
#[derive(Clone, Debug)]
pub struct PowerMean {
    pub value: f64,
    pub error: f64,
    pub history: Vec<Refinement>,
}

impl PowerMean {
    fn into_norm(self, q: f64) -> IntegralResult {
        let value = self.value.max(0.0).powf(1.0 / q);
        let error_estimate = if self.value > 0.0 { self.error * value / (q * self.value) } else { self.error.powf(1.0 / q) };
        IntegralResult {
            value,
            method: Method::Quadrature,
            error_estimate,
            refinement_history: self
                .history
                .into_iter()
                .map(|r| Refinement { m: r.m, value: r.value.max(0.0).powf(1.0 / q) })
                .collect(),
        }
    }
}

/// Half-width of the truncated domain for an integrand growing like |x|^g.
fn truncation(g: f64) -> f64 {
    let mut l = 8.0f64;
    while g * l.ln() - 0.5 * l * l > -40.0 {
        l += 0.25;
    }
    l
}

pub static LINES: std::sync::atomic::AtomicUsize = std::sync::atomic::AtomicUsize::new(0);
pub static EVALS: std::sync::atomic::AtomicUsize = std::sync::atomic::AtomicUsize::new(0);
struct Nested {
    exponent: f64,
    l: f64,
    rel_tol: f64,
    limit: usize,
}

impl Nested {
    /// ∫ S^{q/2} dγ_d over the remaining d variables to within max(abs_tol, rel·|I|).
    ///
    /// An inner integral at outer node x enters the outer sum with weight
    /// φ(x) times a quadrature weight, and those weights total at most 2L, so
    /// it only needs abs_tol/(20·L·φ(x)) to keep the summed inner error below
    /// a tenth of the outer budget.
    fn level(&self, comps: &[(f64, DensePoly)], depth: usize, abs_tol: f64) -> (f64, f64, bool, Vec<(usize, f64)>) {
        let Some(nv) = comps.first().map(|c| c.1.nvars()) else {
            return (0.0, 0.0, true, vec![]);
        };
        if nv == 1 {
            let (v, e, c) = self.line(comps, depth, abs_tol);
            return (v, e, c, vec![]);
        }
        if comps.iter().all(|(_, p)| p.leading_degree() == 0) {
            let spec: Vec<(f64, DensePoly)> = comps.iter().map(|(w, p)| (*w, p.specialize_first(0.0))).collect();
            return self.level(&spec, depth + 1, abs_tol);
        }
        let mut all_ok = true;
        let out = adaptive::integrate(
            &GK61,
            |x| {
                let w = phi(x);
                if w == 0.0 {
                    return (0.0, 0.0);
                }
                let spec: Vec<(f64, DensePoly)> = comps.iter().map(|(wt, p)| (*wt, p.specialize_first(x))).collect();
                let (v, e, ok, _) = self.level(&spec, depth + 1, self.child_tol(abs_tol, w));
                all_ok &= ok;
                (w * v, w * e)
            },
            &[-self.l, 0.0, self.l],
            abs_tol,
            self.rel_at(depth),
            self.limit,
        );
        (out.value, out.error, out.converged && all_ok, out.history)
    }

    fn child_tol(&self, abs_tol: f64, weight: f64) -> f64 {
        0.1 * abs_tol / (2.0 * self.l * weight)
    }

    fn rel_at(&self, depth: usize) -> f64 {
        if depth == 0 {
            self.rel_tol
        } else {
            0.1 * self.rel_tol
        }
    }

    /// One-dimensional integral along the innermost variable.
    fn line(&self, comps: &[(f64, DensePoly)], depth: usize, abs_tol: f64) -> (f64, f64, bool) {
        let polys: Vec<(f64, &[f64])> = comps.iter().map(|(w, p)| (*w, p.coefficients())).collect();
        let h = self.exponent;
        if polys.iter().all(|(_, c)| c.iter().skip(1).all(|&v| v == 0.0)) {
            let s: f64 = polys.iter().map(|(w, c)| w * c[0] * c[0]).sum();
            return (s.max(0.0).powf(h), 0.0, true);
        }
        let mut breaks = vec![-self.l];
        if polys.len() == 1 {
            breaks.extend(roots::real_roots(polys[0].1, -self.l, self.l));
        } else {
            let mut s = Vec::new();
            for (w, c) in &polys {
                let sq = convolve(c, c);
                if s.len() < sq.len() {
                    s.resize(sq.len(), 0.0);
                }
                for (a, b) in s.iter_mut().zip(&sq) {
                    *a += w * b;
                }
            }
            breaks.extend(roots::real_roots(&roots::derivative(&s), -self.l, self.l));
        }
        breaks.push(self.l);
        let out = adaptive::integrate(
            &GK31,
            |t| {
                let s: f64 = polys
                    .iter()
                    .map(|(w, c)| {
                        let v = roots::horner(c, t);
                        w * v * v
                    })
                    .sum();
                (half_power(s.max(0.0), h) * phi(t), 0.0)
            },
            &breaks,
            abs_tol,
            self.rel_at(depth),
            self.limit,
        );
        (out.value, out.error, out.converged)
    }
}

/// s^h with the common exponents done by square roots.
fn half_power(s: f64, h: f64) -> f64 {
    if h == 0.5 {
        s.sqrt()
    } else if h == 1.5 {
        s * s.sqrt()
    } else if h == 0.75 {
        let r = s.sqrt();
        r * r.sqrt()
    } else {
        s.powf(h)
    }
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// E[(Σ wᵢ pᵢ²)^{q/2}] for f64 polynomial fields in at most three variables.
///
/// `degree` bounds the total degree of the pᵢ and fixes the truncation of ℝ
/// to [−L, L] on every axis.
pub fn nested_power_mean(comps: &[(f64, DensePoly)], q: f64, degree: u32, cfg: &QuadratureConfig) -> Result<PowerMean> {
    check_q(q)?;
    if comps.is_empty() {
        return Ok(PowerMean { value: 0.0, error: 0.0, history: vec![] });
    }
    let nv = comps[0].1.nvars();
    if nv == 0 || nv > 3 || comps.iter().any(|(_, p)| p.nvars() != nv) {
        return Err(Error::InvalidParameter(format!("nested quadrature handles 1 to 3 variables, got {nv}")));
    }
    let nest = Nested { exponent: q / 2.0, l: truncation(q * degree as f64), rel_tol: cfg.rel_tol, limit: cfg.max_intervals };
    // A coarse Gauss–Hermite pass sizes the absolute budget handed to inner levels.
    let grid = QuadratureGrid::new(nv, 12);
    let rough = grid.integrate(|x| comps.iter().map(|(w, p)| w * p.eval(x).powi(2)).sum::<f64>().max(0.0).powf(q / 2.0));
    let abs_tol = cfg.abs_floor.max(cfg.rel_tol * rough.abs());
    let (value, error, ok, hist) = nest.level(comps, 0, abs_tol);
    if value.is_nan() {
        return Err(Error::NanIntegrand { point: vec![] });
    }
    let history: Vec<Refinement> = hist.into_iter().map(|(m, value)| Refinement { m, value }).collect();
    let tol = cfg.abs_floor.max(cfg.rel_tol * value.abs());
    if !ok && error > 10.0 * tol {
        let mut h = history;
        h.push(Refinement { m: usize::MAX, value });
        return Err(Error::NotConverged { history: h });
    }
    Ok(PowerMean { value, error, history })
}

/// E[(Σ wᵢ pᵢ²)^{q/2}] for polynomial fields with f64 coefficients.
pub fn power_mean_f64(comps: &[(f64, Poly<f64>)], q: f64, cfg: &QuadratureConfig) -> Result<PowerMean> {
    check_q(q)?;
    let Some(dim) = comps.first().map(|c| c.1.dim()) else {
        return Ok(PowerMean { value: 0.0, error: 0.0, history: vec![] });
    };
    let mut used = vec![false; dim];
    for (_, p) in comps {
        for (u, d) in used.iter_mut().zip(p.degree_per_var()) {
            *u |= d > 0;
        }
    }
    let vars: Vec<usize> = (0..dim).filter(|&i| used[i]).collect();
    let degree = comps.iter().map(|(_, p)| p.degree()).max().unwrap_or(0);
    if vars.is_empty() {
        let s: f64 = comps.iter().map(|(w, p)| w * p.coeff(&crate::poly::MultiIndex::zero(dim)).powi(2)).sum();
        return Ok(PowerMean { value: s.max(0.0).powf(q / 2.0), error: 0.0, history: vec![] });
    }
    let dense: Vec<(f64, DensePoly)> = comps.iter().map(|(w, p)| (*w, DensePoly::from_poly(p, &vars))).collect();
    if vars.len() <= 3 {
        return nested_power_mean(&dense, q, degree, cfg);
    }
    struct Field<'a>(&'a [(f64, DensePoly)], usize, u32);
    impl SquaredNormField for Field<'_> {
        fn dim(&self) -> usize {
            self.1
        }
        fn growth_degree(&self) -> u32 {
            self.2
        }
        fn sq_norm_at(&self, x: &[f64]) -> f64 {
            self.0.iter().map(|(w, p)| w * p.eval(x).powi(2)).sum()
        }
    }
    let field = Field(&dense, vars.len(), degree);
    let r = tensor_gh_power_mean(&field, q, cfg)?;
    Ok(r)
}

fn tensor_gh_power_mean<F: SquaredNormField + ?Sized>(f: &F, q: f64, cfg: &QuadratureConfig) -> Result<PowerMean> {
    let n = f.dim() as u32;
    let mut history: Vec<Refinement> = Vec::new();
    let mut m = cfg.m_start.max(1);
    let mut prev: Option<f64> = None;
    while m <= cfg.m_max && m.checked_pow(n).is_some_and(|p| p <= cfg.max_nodes) {
        let grid = QuadratureGrid::new(n as usize, m);
        let mut nan_at = None;
        let v = grid.integrate(|x| {
            let s = f.sq_norm_at(x).max(0.0).powf(q / 2.0);
            if s.is_nan() && nan_at.is_none() {
                nan_at = Some(x.to_vec());
            }
            s
        });
        if let Some(point) = nan_at {
            return Err(Error::NanIntegrand { point });
        }
        history.push(Refinement { m, value: v });
        if let Some(p) = prev {
            let diff = (v - p).abs();
            if diff <= cfg.abs_floor.max(cfg.rel_tol * v.abs()) {
                return Ok(PowerMean { value: v, error: diff, history });
            }
        }
        prev = Some(v);
        m *= 2;
    }
    Err(Error::NotConverged {
        history: history.into_iter().map(|r| Refinement { m: r.m, value: r.value.max(0.0).powf(1.0 / q) }).collect(),
    })
}

/// Tensor Gauss–Hermite with m doubling from `m_start` to `m_max`.
pub fn lq_norm_tensor_gh<F: SquaredNormField + ?Sized>(f: &F, q: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    check_q(q)?;
    tensor_gh_power_mean(f, q, cfg).map(|pm| pm.into_norm(q))
}

/// L^q norm of an arbitrary field: tensor Gauss–Hermite up to six variables,
/// Monte Carlo beyond (or when requested).
pub fn lq_norm_field<F: SquaredNormField + ?Sized>(f: &F, q: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    check_q(q)?;
    if cfg.method == IntegrationMethod::MonteCarlo || f.dim() > 6 {
        lq_norm_mc(f, q, cfg.mc_samples, cfg.mc_seed)
    } else {
        lq_norm_tensor_gh(f, q, cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weight {
    Gaussian,
    Lebesgue,
}

/// ∫_a^b g(t) w(t) dt by adaptive Gauss–Kronrod; `b` may be +∞ for the
/// Gaussian weight.
pub fn halfline_interval_integral(
    g: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    weight: Weight,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    interval_integral(g, a, b, &[], weight, cfg)
}

/// As [`halfline_interval_integral`], with interior breakpoints where `g`
/// is not smooth.
pub fn interval_integral(
    g: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    weight: Weight,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    if !(a < b) || a.is_infinite() {
        return Err(Error::InvalidParameter(format!("need a finite a < b, got [{a}, {b}]")));
    }
    let b = if b.is_infinite() {
        if weight == Weight::Lebesgue {
            return Err(Error::InvalidParameter("an infinite bound needs the Gaussian weight".into()));
        }
        a.max(0.0) + 40.0
    } else {
        b
    };
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let mut nan = None;
    let out = adaptive::integrate(
        &rules::GK15,
        |t| {
            let w = match weight {
                Weight::Gaussian => phi(t),
                Weight::Lebesgue => 1.0,
            };
            if w == 0.0 {
                return (0.0, 0.0);
            }
            let v = g(t) * w;
            if v.is_nan() && nan.is_none() {
                nan = Some(t);
            }
            (v, 0.0)
        },
        &pts,
        cfg.abs_floor,
        cfg.rel_tol,
        cfg.max_intervals.max(1000),
    );
    if let Some(t) = nan {
        return Err(Error::NanIntegrand { point: vec![t] });
    }
    let history = out.history.iter().map(|&(m, value)| Refinement { m, value }).collect();
    if !out.converged {
        return Err(Error::NotConverged { history });
    }
    Ok(IntegralResult { value: out.value, method: Method::Quadrature, error_estimate: out.error, refinement_history: history })
}
