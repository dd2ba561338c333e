//! Worked examples checked against values derived here by hand or by an
//! independent brute-force integral, never against the library itself.

use std::f64::consts::{E, FRAC_2_PI, PI};

use gauss_malliavin::constants::*;
use gauss_malliavin::hermite::{chaos_identity_check, hermite, hypercontractivity_ratio};
use gauss_malliavin::integrate::lq_norm;
use gauss_malliavin::malliavin::{derivative, derivative_norm, mean_derivative, sobolev_norm, SobolevKind, SobolevNormRequest};
use gauss_malliavin::ou::{apply, check_gradient_commutation, check_long_time_limit, OUTime};
use gauss_malliavin::poly::{rat, ratio};
use gauss_malliavin::verify::{demonstrate_counterexample, Status};
use gauss_malliavin::{PolyFunctional, QPoly, QuadratureConfig};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn x() -> PolyFunctional {
    PolyFunctional::scalar(QPoly::var(1, 0))
}

fn h(k: u32) -> PolyFunctional {
    PolyFunctional::scalar(hermite(k).to_poly(1, 0))
}

fn xpow(k: u32) -> PolyFunctional {
    PolyFunctional::scalar(QPoly::var(1, 0).pow(k))
}

/// Composite Simpson for E[g(N)] on [−14, 14] with step 1e−4, so kinks at
/// integers fall on even nodes.
fn brute_mean(g: impl Fn(f64) -> f64) -> f64 {
    let n = 280_000;
    let step = 28.0 / n as f64;
    let f = |i: usize| {
        let t = -14.0 + i as f64 * step;
        g(t) * (-t * t / 2.0).exp() / (2.0 * PI).sqrt()
    };
    let mut s = f(0) + f(n);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i);
    }
    s * step / 3.0
}

fn close(a: f64, b: f64, rel: f64) {
    assert!((a - b).abs() <= rel * b.abs().max(1e-300), "{a} vs {b}");
}

#[test]
fn hermite_values() {
    assert_eq!(hermite(3).eval_f64(1.0), -2.0);
    assert_eq!(hermite(4).eval_f64(0.0), 3.0);
}

#[test]
fn brute_force_oracle_is_sharp() {
    close(brute_mean(|t| t.abs()), FRAC_2_PI.sqrt(), 1e-11);
    close(brute_mean(|t| t.powi(4)), 3.0, 1e-11);
}

#[test]
fn poincare_witnesses() {
    // x at q = 1: ‖x‖₁ = √(2/π), ‖Dx‖₁ = 1, ratio over c₁ = 2√2/π^{3/2}
    let n1 = lq_norm(&x(), 1.0, &cfg()).unwrap().value;
    close(n1, FRAC_2_PI.sqrt(), 1e-10);
    close(derivative_norm(&x(), 1, 1.0, &cfg()).unwrap().value, 1.0, 1e-12);
    let ratio = n1 / (c_poincare(1.0).unwrap() * 1.0);
    close(ratio, 2.0 * 2f64.sqrt() / PI.powf(1.5), 1e-10);
    assert!((ratio - 0.5079).abs() < 1e-4);

    // H₂ at q = 2: ‖H₂‖₂ = √2 ≤ c₂‖2x‖₂ = 2
    close(lq_norm(&h(2), 2.0, &cfg()).unwrap().value, 2f64.sqrt(), 1e-14);
    close(derivative_norm(&h(2), 1, 2.0, &cfg()).unwrap().value, 2.0, 1e-14);
}

#[test]
fn expected_derivative_examples() {
    // E[D²x²] = 2 ≤ √2·√E[x⁴] = √6; E[D³x³] = 6 ≤ √6·√15
    close(mean_derivative(&xpow(2), 2).norm(), 2.0, 1e-15);
    close(d_expected(2, 2.0).unwrap() * lq_norm(&xpow(2), 2.0, &cfg()).unwrap().value, 6f64.sqrt(), 1e-14);
    close(mean_derivative(&xpow(3), 3).norm(), 6.0, 1e-15);
    close(d_expected(3, 2.0).unwrap() * lq_norm(&xpow(3), 2.0, &cfg()).unwrap().value, 90f64.sqrt(), 1e-14);
    close(mean_derivative(&xpow(3), 1).norm(), 3.0, 1e-15);
    close(d_expected(1, 1.5).unwrap(), 2f64.sqrt(), 1e-15);
}

#[test]
fn chaos_identity_x_cubed() {
    let f = xpow(3);
    assert_eq!(chaos_identity_check(&f, 3, &mean_derivative(&f, 3)).unwrap(), 0.0);
}

#[test]
fn l1_norms_against_brute_force() {
    let want = 4.0 / (2.0 * PI * E).sqrt();
    close(brute_mean(|t| (t * t - 1.0).abs()), want, 1e-10);
    close(lq_norm(&h(2), 1.0, &cfg()).unwrap().value, want, 1e-9);
    close(lq_norm(&h(3), 3.0, &cfg()).unwrap().value, brute_mean(|t| (t.powi(3) - 3.0 * t).abs().powi(3)).cbrt(), 1e-9);
}

#[test]
fn l1_mean_derivative_examples() {
    close(l1_mean_derivative_constant(), 41.9696, 1e-5);
    // x, ℓ = 1: rhs = η(‖x‖₁ + ‖D²x‖₁) = η√(2/π) ≈ 34.74
    close(eta_l1() * FRAC_2_PI.sqrt(), 34.74, 1e-3);
    // H₂, ℓ = 1: ‖DH₂‖₁ = 2√(2/π) against η(4/√(2πe) + 2)
    close(derivative_norm(&h(2), 1, 1.0, &cfg()).unwrap().value, 2.0 * FRAC_2_PI.sqrt(), 1e-9);
    close(derivative_norm(&h(2), 2, 1.0, &cfg()).unwrap().value, 2.0, 1e-14);
}

#[test]
fn hypercontractivity_h2() {
    // E[(x²−1)⁴] = 105 − 4·15 + 6·3 − 4 + 1 = 60
    let r = hypercontractivity_ratio(&h(2), 2, 2.0, 4.0, &cfg()).unwrap();
    close(r.norm_r, 60f64.powf(0.25), 1e-12);
    close(r.rhs, 3.0 * 2f64.sqrt(), 1e-12);
    let r3 = hypercontractivity_ratio(&h(3), 3, 2.0, 3.0, &cfg()).unwrap();
    close(r3.rhs, 2f64.powf(1.5) * 6f64.sqrt(), 1e-12);
    assert!(r3.lhs() <= r3.rhs);
}

#[test]
fn sobolev_norms_of_x() {
    let full = sobolev_norm(&x(), &SobolevNormRequest { k: 1, q: 2.0, kind: SobolevKind::Full }, &cfg()).unwrap();
    let graph = sobolev_norm(&x(), &SobolevNormRequest { k: 1, q: 2.0, kind: SobolevKind::Graph }, &cfg()).unwrap();
    close(full.value, 2f64.sqrt(), 1e-14);
    close(graph.value, 2.0, 1e-14);
    // x₁x₂: D² has two unit entries
    let p = &QPoly::var(2, 0) * &QPoly::var(2, 1);
    let d2 = derivative(&PolyFunctional::scalar(p), 2);
    close(d2.hs_norm_pointwise(&[0.3, -1.7]).unwrap(), 2f64.sqrt(), 1e-15);
}

#[test]
fn constants_examples() {
    close(c_poincare(4.0).unwrap(), 3f64.sqrt(), 1e-15);
    close(poincare_lower_bound(1.0).unwrap(), FRAC_2_PI.sqrt(), 1e-14);
    close(poincare_lower_bound(4.0).unwrap(), 3f64.powf(0.25), 1e-14);
    for q in [1.5, 3.0, 7.0] {
        close(poincare_lower_bound(q).unwrap(), brute_mean(|t| t.abs().powf(q)).powf(1.0 / q), 1e-10);
    }
    close(tau_equivalence(2, 2.0).unwrap(), 2.0, 1e-15);
    close(tau_equivalence(3, 2.0).unwrap(), 2.0 * (1.0 + 2f64.sqrt()), 1e-14);
    close(tau_equivalence(2, 1.5).unwrap(), 1.0 + PI / 2.0, 1e-15);
    close(c_finite_dim(2, 1).unwrap(), 4.0 * (18.0 * E.sqrt()).powi(4), 1e-13);
    assert!((c_finite_dim(2, 1).unwrap() / 3.1027e6 - 1.0).abs() < 1e-4);
    close(chaos_poincare_constant(2, 4.0).unwrap(), 4.5f64.sqrt(), 1e-15);
    close(chaos_poincare_constant(3, 3.0).unwrap(), (8.0f64 / 3.0).sqrt(), 1e-15);
}

#[test]
fn finite_dim_example() {
    // x, n = 1, ρ = 0.5: 1 ≤ C_{1,1}(ρ⁻¹‖x‖₁ + ρ‖D²x‖₁) = 18√e·2√(2/π)
    let rhs = c_finite_dim(1, 1).unwrap() * (2.0 * lq_norm(&x(), 1.0, &cfg()).unwrap().value);
    close(rhs, 18.0 * E.sqrt() * 2.0 * FRAC_2_PI.sqrt(), 1e-10);
    assert!((rhs - 47.35).abs() < 0.02);
}

#[test]
fn ornstein_uhlenbeck_examples() {
    let t = OUTime::new(0.7).unwrap();
    let a = t.decay().clone();
    // P_t x² = a²x² + 1 − a²
    let want = (&QPoly::var(1, 0).pow(2).scale(&(&a * &a))) + &QPoly::constant(1, rat(1) - &a * &a);
    assert_eq!(apply(&xpow(2), &t).component(0), &want);

    // ‖P_t(H₂ + H₁) − E‖₂² = e^{−2t} + 2e^{−4t}
    let f = PolyFunctional::scalar(&hermite(2).to_poly(1, 0) + &hermite(1).to_poly(1, 0));
    let times: Vec<OUTime> = [0.1, 0.5, 1.0].iter().map(|&s| OUTime::new(s).unwrap()).collect();
    for (r, t) in check_long_time_limit(&f, &times, 2.0, &cfg()).unwrap().iter().zip(&times) {
        let a = t.decay_f64();
        close(r.value * r.value, a * a + 2.0 * a.powi(4), 1e-13);
    }

    // linear functional saturates the gradient commutation
    let c = check_gradient_commutation(&x(), &OUTime::from_decay(ratio(1, 2)).unwrap(), 3.0, 6, &cfg()).unwrap();
    close(c.lhs, 0.125, 1e-15);
    assert!(c.margin.abs() < 1e-12);
}

#[test]
fn counterexample_examples() {
    let r = demonstrate_counterexample(&[10.0, 1.0], &[10.0, 0.1], &cfg());
    let find = |k: f64, rho: f64| r.rows_with("grid").find(|row| row.params["K"] == k && row.params["rho"] == rho).unwrap().clone();
    let a = find(10.0, 10.0);
    close(a.rhs.unwrap(), FRAC_2_PI.sqrt(), 1e-9);
    assert_eq!(a.status, Status::FalsifiedAsExpected);
    let b = find(1.0, 0.1);
    close(b.rhs.unwrap(), 10.0 * FRAC_2_PI.sqrt(), 1e-9);
    assert_eq!(b.status, Status::Exploratory);
    for t in r.rows_with("threshold") {
        close(t.rhs.unwrap(), 1.0, 1e-9);
    }
}
