//! The Ornstein–Uhlenbeck semigroup
//! (P_t f)(x) = E[f(e^{−t}x + √(1−e^{−2t}) Y)], Y ~ γₙ.
//!
//! The decay factor a = e^{−t} is held as an exact rational (the f64 value
//! of e^{−t}). Odd powers of √(1−a²) integrate to zero against Y, so the
//! Mehler substitution stays in ℚ; the Hermite-diagonal route
//! c_α ↦ a^{|α|}c_α is exact as well, and the two agree identically.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::constants::{conjugate, gaussian_abs_moment};
use crate::error::{Error, Result};
use crate::functional::PolyFunctional;
use crate::hermite::{from_hermite, to_hermite};
use crate::integrate::{lq_norm, power_mean_f64, IntegralResult, QuadratureConfig, QuadratureGrid};
use crate::malliavin::derivative;
use crate::poly::{gaussian_moment, rational_from_f64, MultiIndex, Poly, QPoly};

#[derive(Clone, Debug, PartialEq)]
pub struct OUTime {
    t: f64,
    decay: BigRational,
}

impl OUTime {
    pub fn new(t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("OU time must be finite and ≥ 0, got {t}")));
        }
        let decay = if t == 0.0 { BigRational::one() } else { rational_from_f64((-t).exp())? };
        Ok(OUTime { t, decay })
    }

    /// The time with e^{−t} = a exactly, 0 < a ≤ 1.
    pub fn from_decay(a: BigRational) -> Result<Self> {
        if !(a > BigRational::zero() && a <= BigRational::one()) {
            return Err(Error::InvalidParameter(format!("decay factor must lie in (0, 1], got {a}")));
        }
        let t = -a.to_f64().unwrap_or(f64::NAN).ln();
        Ok(OUTime { t: t.max(0.0), decay: a })
    }

    pub fn zero() -> Self {
        OUTime { t: 0.0, decay: BigRational::one() }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// e^{−t} as held exactly.
    pub fn decay(&self) -> &BigRational {
        &self.decay
    }

    pub fn decay_f64(&self) -> f64 {
        self.decay.to_f64().unwrap_or(f64::NAN)
    }

    /// s + t, with the decay factors multiplied exactly.
    pub fn then(&self, other: &OUTime) -> OUTime {
        OUTime { t: self.t + other.t, decay: &self.decay * &other.decay }
    }
}

/// ∫ (a x + b y)^m γ₁(dy) = Σ_{j even} C(m,j) a^{m−j} (1−a²)^{j/2} (j−1)!! x^{m−j}.
fn mehler_1d(m: u32, a: &BigRational, var_pow: &mut BTreeMap<u32, Vec<(u32, BigRational)>>) -> Vec<(u32, BigRational)> {
    if let Some(v) = var_pow.get(&m) {
        return v.clone();
    }
    let b2 = BigRational::one() - a * a;
    let mut binom = BigInt::one();
    let mut out = Vec::new();
    for j in 0..=m {
        if j > 0 {
            binom = binom * BigInt::from(m - j + 1) / BigInt::from(j);
        }
        if j % 2 == 1 {
            continue;
        }
        let c = BigRational::from_integer(&binom * gaussian_moment(j))
            * num_traits::pow(a.clone(), (m - j) as usize)
            * num_traits::pow(b2.clone(), (j / 2) as usize);
        if !c.is_zero() {
            out.push((m - j, c));
        }
    }
    var_pow.insert(m, out.clone());
    out
}

fn mehler_poly(p: &QPoly, a: &BigRational) -> QPoly {
    let n = p.dim();
    let mut cache = BTreeMap::new();
    let mut out = QPoly::zero(n);
    for (alpha, c) in p.terms() {
        let mut partial: Vec<(Vec<u32>, BigRational)> = vec![(Vec::with_capacity(n), c.clone())];
        for &m in alpha.exponents() {
            let opts = mehler_1d(m, a, &mut cache);
            let mut next = Vec::with_capacity(partial.len() * opts.len());
            for (idx, w) in &partial {
                for (e, v) in &opts {
                    let mut i2 = idx.clone();
                    i2.push(*e);
                    next.push((i2, w * v));
                }
            }
            partial = next;
        }
        for (idx, w) in partial {
            out.add_term(MultiIndex::new(idx), w);
        }
    }
    out
}

/// P_tF by Mehler's formula with the Gaussian variable integrated out exactly.
pub fn apply(f: &PolyFunctional, t: &OUTime) -> PolyFunctional {
    let comps = f.components().iter().map(|p| mehler_poly(p, &t.decay)).collect();
    PolyFunctional::new(f.dim(), comps).expect("shape preserved")
}

/// P_tF through the Hermite expansion, c_α ↦ a^{|α|}c_α.
pub fn apply_diagonal(f: &PolyFunctional, t: &OUTime) -> PolyFunctional {
    let comps = f
        .components()
        .iter()
        .map(|p| {
            let mut e = to_hermite(p, f.dim()).expect("component dimension");
            for (alpha, c) in e.coeffs.iter_mut() {
                *c = &*c * num_traits::pow(t.decay.clone(), alpha.degree() as usize);
            }
            from_hermite(&e)
        })
        .collect();
    PolyFunctional::new(f.dim(), comps).expect("shape preserved")
}

/// |E[P_tF] − E[F]| (Euclidean over components), computed exactly.
pub fn check_mean_preservation(f: &PolyFunctional, t: &OUTime) -> f64 {
    let pt = apply(f, t);
    let d: BigRational = pt
        .mean()
        .iter()
        .zip(f.mean())
        .map(|(a, b)| {
            let x = a - b;
            &x * &x
        })
        .fold(BigRational::zero(), |a, b| a + b);
    d.abs().to_f64().unwrap_or(f64::NAN).sqrt()
}

/// Worst pointwise outcome of a bound checked at quadrature nodes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeCheck {
    /// lhs, rhs and margin = rhs − lhs at the node with the smallest margin.
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub worst_point: Vec<f64>,
    pub nodes: usize,
    /// Largest integration error among the inner integrals on the right side.
    pub integration_error: f64,
}

/// Substitutes x ↦ a·x₀ + b·y into `p`, as an f64 polynomial in y.
fn shifted(p: &QPoly, a: f64, b: f64, x0: &[f64]) -> Result<Poly<f64>> {
    let n = p.dim();
    let subs: Vec<Poly<f64>> = (0..n)
        .map(|i| &Poly::constant(n, a * x0[i]) + &Poly::var(n, i).scale(&b))
        .collect();
    p.to_f64().compose(&subs)
}

fn node_checks(
    f: &PolyFunctional,
    nodes_per_axis: usize,
    mut at: impl FnMut(&[f64]) -> Result<(f64, f64, f64)>,
) -> Result<NodeCheck> {
    let grid = QuadratureGrid::new(f.dim(), nodes_per_axis);
    let mut worst: Option<NodeCheck> = None;
    let mut err_max = 0.0f64;
    let mut status = Ok(());
    grid.for_each(|x, _| {
        if status.is_err() {
            return;
        }
        match at(x) {
            Ok((lhs, rhs, err)) => {
                err_max = err_max.max(err);
                let margin = rhs - lhs;
                if worst.as_ref().is_none_or(|w| margin < w.margin) {
                    worst = Some(NodeCheck { lhs, rhs, margin, worst_point: x.to_vec(), nodes: 0, integration_error: 0.0 });
                }
            }
            Err(e) => status = Err(e),
        }
    });
    status?;
    let mut w = worst.expect("grid is nonempty");
    w.nodes = grid.num_points();
    w.integration_error = err_max;
    Ok(w)
}

/// ‖D(P_tF)(x)‖^q against e^{−qt}(P_t‖DF‖^q)(x) at every node of an
/// m-point tensor Gauss–Hermite grid.
pub fn check_gradient_commutation(
    f: &PolyFunctional,
    t: &OUTime,
    q: f64,
    nodes_per_axis: usize,
    cfg: &QuadratureConfig,
) -> Result<NodeCheck> {
    if q < 1.0 {
        return Err(Error::InvalidParameter(format!("q must be ≥ 1, got {q}")));
    }
    let a = t.decay_f64();
    let b = (1.0 - a * a).max(0.0).sqrt();
    let dpt = derivative(&apply(f, t), 1);
    let df = derivative(f, 1).sum_of_squares();
    node_checks(f, nodes_per_axis, |x| {
        let lhs = dpt.hs_norm_pointwise(x)?.powf(q);
        let comps = df
            .terms()
            .iter()
            .map(|(w, p)| Ok((w.to_f64().unwrap_or(f64::NAN), shifted(p, a, b, x)?)))
            .collect::<Result<Vec<_>>>()?;
        let inner = power_mean_f64(&comps, q, cfg)?;
        let factor = a.powf(q);
        Ok((lhs, factor * inner.value, factor * inner.error))
    })
}

/// ‖D(P_tF)(x)‖^q against
/// (e^{−t}/√(1−e^{−2t}))^q (E|u|^{q̄})^{q/q̄} (P_t|F|^q)(x) for scalar F.
pub fn check_smoothing_bound(
    f: &PolyFunctional,
    t: &OUTime,
    q: f64,
    nodes_per_axis: usize,
    cfg: &QuadratureConfig,
) -> Result<NodeCheck> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("the smoothing bound needs q > 1, got {q}")));
    }
    if t.t() <= 0.0 || t.decay >= BigRational::one() {
        return Err(Error::InvalidParameter("the smoothing bound needs t > 0".into()));
    }
    if f.codim() != 1 {
        return Err(Error::InvalidParameter("the smoothing bound is checked for scalar functionals only".into()));
    }
    let a = t.decay_f64();
    let b = (1.0 - a * a).sqrt();
    let qbar = conjugate(q);
    let constant = (a / b).powf(q) * gaussian_abs_moment(qbar).powf(q / qbar);
    let dpt = derivative(&apply(f, t), 1);
    node_checks(f, nodes_per_axis, |x| {
        let lhs = dpt.hs_norm_pointwise(x)?.powf(q);
        let g = shifted(f.component(0), a, b, x)?;
        let inner = power_mean_f64(&[(1.0, g)], q, cfg)?;
        Ok((lhs, constant * inner.value, constant * inner.error))
    })
}

/// ‖P_tF − E[F]‖_{L^q} along an increasing time grid.
pub fn check_long_time_limit(
    f: &PolyFunctional,
    t_grid: &[OUTime],
    q: f64,
    cfg: &QuadratureConfig,
) -> Result<Vec<IntegralResult>> {
    if t_grid.windows(2).any(|w| w[1].t() < w[0].t()) {
        return Err(Error::InvalidParameter("time grid must be increasing".into()));
    }
    t_grid.iter().map(|t| lq_norm(&apply(f, t).centered(), q, cfg)).collect()
}
