//! Acceptance criteria 1–11 on the default configuration (seed 42, 100
//! functionals). One line per criterion; the process fails if any does.

use std::f64::consts::{E, FRAC_2_PI, PI};
use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use gauss_malliavin::constants::{c_poincare, d_expected, eta_l1, poincare_lower_bound, tau_equivalence};
use gauss_malliavin::functional::{generate_corpus, CorpusMember};
use gauss_malliavin::integrate::{lq_norm, lq_norm_mc, IntegrationMethod};
use gauss_malliavin::malliavin::derivative;
use gauss_malliavin::verify::{run_suite, CheckId, CheckReport, CheckRow, Status, SuiteReport, VerifyConfig};
use gauss_malliavin::{Error, QuadratureConfig};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rows<'a>(r: &'a SuiteReport, id: CheckId, relation: &'a str) -> Vec<&'a CheckRow> {
    r.check(id).map(|c| c.rows_with(relation).collect()).unwrap_or_default()
}

fn check(r: &SuiteReport, id: CheckId) -> Result<&CheckReport, String> {
    r.check(id).ok_or_else(|| format!("{id} missing from report"))
}

fn param(row: &CheckRow, k: &str) -> f64 {
    row.params.get(k).copied().unwrap_or(f64::NAN)
}

/// Every row of `relation` passes; returns the count.
fn all_pass(rs: &[&CheckRow], relation: &str) -> Result<usize, String> {
    ensure(!rs.is_empty(), || format!("no `{relation}` rows"))?;
    if let Some(bad) = rs.iter().find(|r| r.status != Status::Pass) {
        return Err(format!("{relation}: {} {:?} is {:?} (lhs {:?}, rhs {:?}, note {:?})", bad.case_id, bad.params, bad.status, bad.lhs, bad.rhs, bad.note));
    }
    Ok(rs.len())
}

fn grid_covered(rs: &[&CheckRow], key: &str, want: &[f64]) -> Result<(), String> {
    for w in want {
        ensure(rs.iter().any(|r| param(r, key) == *w), || format!("no rows with {key} = {w}"))?;
    }
    Ok(())
}

fn c1(r: &SuiteReport, n: usize) -> Outcome {
    let rs = rows(r, CheckId::ChaosIdentity, "chaos_identity");
    let count = all_pass(&rs, "chaos_identity")?;
    ensure(count == n * 5, || format!("expected {} rows, got {count}", n * 5))?;
    ensure(rs.iter().all(|r| r.margin == Some(0.0) || r.margin == Some(-0.0)), || "nonzero residual".into())?;
    ensure(rs.iter().all(|r| param(r, "k") <= 4.0), || "k out of range".into())?;
    Ok(format!("{count} rows (k = 0..4), every residual exactly 0"))
}

fn c2(r: &SuiteReport, n: usize) -> Outcome {
    let qs = [1.0, 1.5, 2.0, 3.0, 4.0];
    let rs = rows(r, CheckId::Poincare, "poincare");
    let count = all_pass(&rs, "poincare")?;
    for q in qs {
        let k = rs.iter().filter(|r| param(r, "q") == q).count();
        ensure(k == n, || format!("q = {q}: {k} rows, expected {n}"))?;
    }
    let sup = rows(r, CheckId::Poincare, "sup_ratio");
    all_pass(&sup, "sup_ratio")?;
    let sat = rows(r, CheckId::Poincare, "saturation");
    ensure(sat.len() == 1 && sat[0].case_id == "witness-x1", || "missing saturation row for x₁".into())?;
    let ratio = sat[0].lhs.unwrap_or(f64::NAN);
    ensure((ratio - 1.0).abs() <= 1e-9, || format!("x₁ ratio at q = 2 is {ratio}"))?;
    Ok(format!("{count} rows, zero violations at q ∈ {{1,1.5,2,3,4}}; x₁ ratio at q = 2 is 1 + {:.1e}", ratio - 1.0))
}

fn c3(r: &SuiteReport) -> Outcome {
    let w = rows(r, CheckId::Poincare, "witness_lower_bound");
    grid_covered(&w, "q", &[1.0, 1.5, 2.0, 3.0, 4.0])?;
    for row in &w {
        let (lb, ratio) = (row.lhs.unwrap_or(f64::NAN), row.rhs.unwrap_or(f64::NAN));
        ensure(ratio >= lb - 1e-6, || format!("q = {}: witness ratio {ratio} < lb {lb} − 1e−6", param(row, "q")))?;
    }
    let lu = rows(r, CheckId::Poincare, "lower_le_upper");
    all_pass(&lu, "lower_le_upper")?;
    ensure(lu.iter().any(|r| param(r, "q") == 1.0) && lu.iter().any(|r| param(r, "q") == 20.0), || "lb ≤ ub grid does not span [1, 20]".into())?;
    // finer grid straight from the constants
    for i in 0..=1900 {
        let q = 1.0 + i as f64 / 100.0;
        let (lb, ub) = (poincare_lower_bound(q).unwrap(), c_poincare(q).unwrap());
        ensure(lb <= ub * (1.0 + 1e-14), || format!("lb({q}) = {lb} > ub = {ub}"))?;
    }
    Ok(format!("witness ratio ≥ lb(q) − 1e−6 at {} q values; lb ≤ ub on [1, 20]", w.len()))
}

fn c4(r: &SuiteReport) -> Outcome {
    let rs = rows(r, CheckId::ExpectedDerivative, "expected_derivative");
    let count = all_pass(&rs, "expected_derivative")?;
    grid_covered(&rs, "q", &[1.5, 2.0, 3.0, 4.0])?;
    grid_covered(&rs, "ell", &[1.0, 2.0, 3.0])?;
    ensure(rs.iter().all(|r| param(r, "q") > 1.0), || "a row at q ≤ 1".into())?;
    all_pass(&rows(r, CheckId::ExpectedDerivative, "refuses_q1"), "refuses_q1")?;
    for l in 1..=3 {
        ensure(matches!(d_expected(l, 1.0), Err(Error::ExpectedDerivativeAtQOne { .. })), || format!("d_expected({l}, 1) accepted"))?;
    }
    Ok(format!("{count} rows, zero violations; q = 1 refused"))
}

fn c5(r: &SuiteReport) -> Outcome {
    let md = rows(r, CheckId::L1MeanDerivative, "l1_mean_derivative");
    let a = all_pass(&md, "l1_mean_derivative")?;
    grid_covered(&md, "rho", &[0.1, 0.5, 0.9])?;
    grid_covered(&md, "ell", &[1.0, 2.0, 3.0])?;
    let sw = rows(r, CheckId::L1Sandwich, "l1_sandwich");
    let b = all_pass(&sw, "l1_sandwich")?;
    grid_covered(&sw, "ell", &[1.0, 2.0, 3.0])?;
    let co = rows(r, CheckId::NormEquivalence, "upper_q1_k2");
    let c = all_pass(&co, "upper_q1_k2")?;
    let eta = PI / 2.0 + 18.0 * (2.0 * E).sqrt();
    ensure((eta_l1() - eta).abs() <= 1e-12 * eta, || "η differs from π/2 + 18√(2e)".into())?;
    // x₁ at k = 2: 𝒢(2,1) = ‖x‖₁ = √(2/π), so the right side must be (1+η)√(2/π)
    let x = co.iter().find(|r| r.case_id == "witness-x1").ok_or("no q = 1, k = 2 upper row for x₁")?;
    let want = (1.0 + eta) * FRAC_2_PI.sqrt();
    let got = x.rhs.unwrap_or(f64::NAN);
    ensure((got - want).abs() <= 1e-8 * want, || format!("q = 1, k = 2 upper rhs for x₁ is {got}, expected (1+η)√(2/π) = {want}"))?;
    Ok(format!("{a} mean-derivative, {b} sandwich, {c} q = 1 upper rows; factor 1+η = {:.6}", 1.0 + eta))
}

fn c6(r: &SuiteReport) -> Outcome {
    let qs = [1.5, 2.0, 3.0];
    let mut count = 0;
    for rel in ["lower", "upper"] {
        let rs: Vec<&CheckRow> = rows(r, CheckId::NormEquivalence, rel).into_iter().filter(|r| qs.contains(&param(r, "q"))).collect();
        count += all_pass(&rs, rel)?;
        grid_covered(&rs, "k", &[2.0, 3.0])?;
        grid_covered(&rs, "q", &qs)?;
    }
    ensure((tau_equivalence(2, 2.0).unwrap() - 2.0).abs() < 1e-15, || "τ₂,₂ ≠ 2".into())?;
    ensure((tau_equivalence(3, 2.0).unwrap() - 2.0 * (1.0 + 2f64.sqrt())).abs() < 1e-14, || "τ₃,₂ ≠ 2(1+√2)".into())?;
    let x = rows(r, CheckId::NormEquivalence, "upper")
        .into_iter()
        .find(|r| r.case_id == "witness-x1" && param(r, "k") == 2.0 && param(r, "q") == 2.0)
        .ok_or("no x₁ row at k = 2, q = 2")?;
    ensure((x.lhs.unwrap() - 2f64.sqrt()).abs() < 1e-12 && (x.rhs.unwrap() - 2.0).abs() < 1e-12, || format!("x₁: {:?} vs √2 ≤ 2", (x.lhs, x.rhs)))?;
    let tb = rows(r, CheckId::TrivialBound, "trivial_bound");
    let t = all_pass(&tb, "trivial_bound")?;
    Ok(format!("{count} two-sided rows at q ∈ {{1.5,2,3}}, k ∈ {{2,3}}; {t} trivial-bound rows, all pass"))
}

fn c7(r: &SuiteReport) -> Outcome {
    let di = rows(r, CheckId::FiniteDim, "derivative_interpolation");
    let a = all_pass(&di, "derivative_interpolation")?;
    grid_covered(&di, "q", &[1.0, 2.0])?;
    grid_covered(&di, "rho", &[0.1, 0.5, 0.9])?;
    grid_covered(&di, "n", &[1.0, 2.0, 3.0])?;
    let fb = rows(r, CheckId::FiniteDim, "full_norm_bound");
    let b = all_pass(&fb, "full_norm_bound")?;
    grid_covered(&fb, "eps", &[0.1, 0.5, 0.9])?;
    grid_covered(&fb, "k", &[2.0, 3.0])?;
    let cc = rows(r, CheckId::FiniteDim, "closed_form_vs_recursion");
    let c = all_pass(&cc, "closed_form_vs_recursion")?;
    for row in &cc {
        let (x, y) = (row.lhs.unwrap(), row.rhs.unwrap());
        ensure((x - y).abs() <= 1e-10 * x.abs(), || format!("C({}, {}) differs: {x} vs {y}", param(row, "ell"), param(row, "n")))?;
    }
    Ok(format!("{a} interpolation rows, {b} full-norm rows, {c} constant rows (closed form = recursion to 1e−10)"))
}

fn c8(r: &SuiteReport) -> Outcome {
    let mut counts = Vec::new();
    for rel in ["eigenrelation", "semigroup_law", "mehler_vs_diagonal", "mean_preservation", "gradient_commutation", "smoothing", "spectral_gap"] {
        let rs = rows(r, CheckId::OuSemigroup, rel);
        counts.push(all_pass(&rs, rel)?);
        if rel != "semigroup_law" {
            grid_covered(&rs, "t", &[0.1, 0.5, 1.0])?;
        }
    }
    let lt = rows(r, CheckId::OuSemigroup, "long_time_residual");
    all_pass(&lt, "long_time_residual")?;
    for row in &lt {
        let t = param(row, "t");
        let got = row.lhs.unwrap_or(f64::NAN);
        ensure((got - (-t).exp()).abs() <= 1e-9, || format!("t = {t}: residual {got} vs e^−t"))?;
    }
    grid_covered(&lt, "t", &[0.1, 0.5, 1.0])?;
    Ok(format!(
        "eigen {} / law {} / Mehler {} / mean {} / gradient {} / smoothing {} / gap {} rows; x residual = e^−t to 1e−9",
        counts[0], counts[1], counts[2], counts[3], counts[4], counts[5], counts[6]
    ))
}

fn c9(r: &SuiteReport) -> Outcome {
    let ce = check(r, CheckId::Counterexample)?;
    ensure(ce.summary.failed == 0 && ce.summary.integration_failures == 0, || "counterexample has failing rows".into())?;
    let w: Vec<&CheckRow> = ce.rows_with("witness").collect();
    ensure(!w.is_empty(), || "no witness rows".into())?;
    for row in &w {
        ensure(row.status == Status::FalsifiedAsExpected, || format!("K = {} not falsified: {:?}", param(row, "K"), row.status))?;
        ensure(row.rhs.unwrap() < row.lhs.unwrap(), || "witness rhs ≥ lhs".into())?;
    }
    let l1 = ce.rows_with("l1_norm").next().ok_or("no l1_norm row")?;
    let got = l1.lhs.unwrap_or(f64::NAN);
    ensure((got - FRAC_2_PI.sqrt()).abs() <= 1e-9, || format!("‖x‖₁ = {got}"))?;
    let ex = w.iter().map(|r| format!("(K={}, ρ={:.4})", param(r, "K"), param(r, "rho"))).collect::<Vec<_>>().join(" ");
    Ok(format!("FALSIFIED-AS-EXPECTED at {ex}; ‖x‖₁ − √(2/π) = {:.1e}", got - FRAC_2_PI.sqrt()))
}

fn c10(r: &SuiteReport) -> Outcome {
    let mut count = 0;
    for rel in ["upper", "monotone"] {
        let rs = rows(r, CheckId::Hypercontractivity, rel);
        count += all_pass(&rs, rel)?;
        grid_covered(&rs, "ell", &[1.0, 2.0, 3.0, 4.0])?;
        for (s, t) in [(2.0, 3.0), (2.0, 4.0), (3.0, 4.0)] {
            ensure(rs.iter().any(|r| param(r, "s") == s && param(r, "r") == t), || format!("missing (s, r) = ({s}, {t})"))?;
        }
    }
    let h = rows(r, CheckId::Hypercontractivity, "h2_l4_value");
    all_pass(&h, "h2_l4_value")?;
    let got = h[0].lhs.unwrap();
    ensure((got - 60f64.powf(0.25)).abs() <= 1e-8, || format!("‖H₂‖₄ = {got}"))?;
    Ok(format!("{count} rows, zero violations; ‖H₂‖₄ = {got:.12} = 60^(1/4)"))
}

fn fd_gradients(corpus: &[CorpusMember]) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for m in corpus {
        let f = &m.functional;
        let (n, jd) = (f.dim(), f.codim());
        let d = derivative(f, 1);
        for _ in 0..3 {
            let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let g = d.eval(&x).map_err(|e| e.to_string())?;
            for i in 0..n {
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[i] += h;
                xm[i] -= h;
                let (fp, fm) = (f.eval(&xp).unwrap(), f.eval(&xm).unwrap());
                for j in 0..jd {
                    let fd = (fp[j] - fm[j]) / (2.0 * h);
                    let exact = g[i * jd + j];
                    worst = worst.max((fd - exact).abs() / exact.abs().max(1.0));
                }
            }
        }
    }
    Ok(worst)
}

fn c11(r: &SuiteReport, cfg: &VerifyConfig, corpus: &[CorpusMember]) -> Outcome {
    let fd = fd_gradients(corpus)?;
    ensure(fd <= 1e-6, || format!("finite-difference gradient error {fd:.2e}"))?;

    let quad = QuadratureConfig { method: IntegrationMethod::Quadrature, rel_tol: 1e-11, ..QuadratureConfig::default() };
    let mut q_err: f64 = 0.0;
    for m in corpus {
        for q in [2.0, 4.0] {
            let sym = lq_norm(&m.functional, q, &QuadratureConfig::default()).map_err(|e| e.to_string())?;
            let num = lq_norm(&m.functional, q, &quad).map_err(|e| format!("{} q={q}: {e}", m.id))?;
            q_err = q_err.max((num.value - sym.value).abs() / sym.value);
        }
    }
    ensure(q_err <= 1e-9, || format!("quadrature vs symbolic relative error {q_err:.2e}"))?;

    let base = cfg.quadrature();
    let mut worst_z: f64 = 0.0;
    for (i, m) in corpus.iter().take(40).enumerate() {
        for q in [1.0, 3.0] {
            let num = lq_norm(&m.functional, q, &base).map_err(|e| e.to_string())?;
            let mc = lq_norm_mc(&m.functional, q, 200_000, cfg.seed.wrapping_add(i as u64)).map_err(|e| e.to_string())?;
            let z = (mc.value - num.value).abs() / (mc.error_estimate + num.error_estimate);
            worst_z = worst_z.max(z);
        }
    }
    ensure(worst_z <= 4.0, || format!("MC deviates by {worst_z:.2} standard errors"))?;

    let again = run_suite(cfg).map_err(|e| e.to_string())?;
    let mut a = r.clone();
    let mut b = again.clone();
    a.generated_at = 0;
    b.generated_at = 0;
    ensure(a.to_json_pretty() == b.to_json_pretty(), || "second run produced a different report".into())?;
    ensure(r.canonical_sha256 == again.canonical_sha256, || "canonical hashes differ".into())?;
    Ok(format!(
        "FD gradient err {fd:.1e}; quadrature vs symbolic {q_err:.1e}; MC within {worst_z:.2} SE; rerun hash {}…",
        &r.canonical_sha256[..12]
    ))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cfg = VerifyConfig::default();
    let corpus = generate_corpus(&cfg.corpus_spec()).expect("default corpus");
    let report = match run_suite(&cfg) {
        Ok(r) => r,
        Err(e) => {
            println!("acceptance: suite did not run: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!("acceptance: default suite (seed {}, {} functionals) ran in {:.0}s", cfg.seed, corpus.len(), start.elapsed().as_secs_f64());
    let n = corpus.len();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("chaos identity", Box::new(|| c1(&report, n))),
        ("Poincaré", Box::new(|| c2(&report, n))),
        ("lower-bound consistency", Box::new(|| c3(&report))),
        ("expected derivative", Box::new(|| c4(&report))),
        ("L¹ results", Box::new(|| c5(&report))),
        ("norm equivalence", Box::new(|| c6(&report))),
        ("finite-dimensional results", Box::new(|| c7(&report))),
        ("OU semigroup", Box::new(|| c8(&report))),
        ("counterexample", Box::new(|| c9(&report))),
        ("hypercontractivity", Box::new(|| c10(&report))),
        ("numerics hygiene", Box::new(|| c11(&report, &cfg, &corpus))),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL {name}: {why}", i + 1);
            }
        }
    }
    let code_ok = report.exit_code == 0;
    println!("acceptance: suite exit code {}; {failures} criteria failed; total {:.0}s", report.exit_code, start.elapsed().as_secs_f64());
    if failures == 0 && code_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
